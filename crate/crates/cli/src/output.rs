use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gsd::format::round_sig;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Buffered writer on `path`, or on stdout when there is none.
pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Data(format!("cannot create {}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// JSON with every float rounded to the shared number of significant digits.
/// Non-finite values become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_floats(&mut v);
    v
}

pub fn write_json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, &to_json(value))?;
    writeln!(out)
}

pub fn write_json_pretty<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, &to_json(value))?;
    writeln!(out)
}
