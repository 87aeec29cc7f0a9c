//! Reading and writing score tables.
//!
//! Two layouts are accepted, both UTF-8 with a header row:
//!
//! * long: one answer per row, columns `pvs_id,subject_id,score` (looked up
//!   by name, in any order; extra columns are ignored);
//! * wide: one item per row, `pvs_id` followed by one column per answer.
//!   Blank cells are skipped, so rows may have different lengths.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sample::ScoreSample;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: score {score} outside 1..={m}")]
    OutOfRange { line: u64, score: i64, m: u32 },
    #[error("line {line}: duplicate sample id '{id}'")]
    DuplicateId { line: u64, id: String },
    #[error("missing column '{0}'")]
    MissingColumn(&'static str),
    #[error("no data rows")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsvFormat {
    Long,
    Wide,
}

impl FromStr for CsvFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "long" => Ok(Self::Long),
            "wide" => Ok(Self::Wide),
            other => Err(format!("unknown format '{other}', expected long or wide")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<ScoreSample>,
    pub m: u32,
    pub source_path: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn parse_scores_csv(path: impl AsRef<Path>, format: CsvFormat, m: u32) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_scores(file, format, m, &path.display().to_string())
}

fn csv_error(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => DataError::Io {
            path: "<input>".into(),
            source,
        },
        kind => DataError::Malformed {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn parse_score(field: &str, line: u64, m: u32) -> Result<u32, DataError> {
    let score: i64 = field.parse().map_err(|_| DataError::Malformed {
        line,
        message: format!("score '{field}' is not an integer"),
    })?;
    if score < 1 || score > m as i64 {
        return Err(DataError::OutOfRange { line, score, m });
    }
    Ok(score as u32)
}

/// Parses a score table from any reader; `source` is recorded in the dataset.
pub fn read_scores<R: Read>(reader: R, format: CsvFormat, m: u32, source: &str) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(DataError::Empty);
    }
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(DataError::MissingColumn(name))
    };

    let mut order: Vec<String> = Vec::new();
    let mut scores: HashMap<String, (u64, Vec<u32>)> = HashMap::new();
    match format {
        CsvFormat::Long => {
            let id_col = column("pvs_id")?;
            let score_col = column("score")?;
            for record in rdr.records() {
                let record = record.map_err(csv_error)?;
                let line = record.position().map_or(0, |p| p.line());
                if record.iter().all(str::is_empty) {
                    continue;
                }
                let field = |col: usize, name: &str| {
                    record
                        .get(col)
                        .filter(|v| !v.is_empty())
                        .ok_or_else(|| DataError::Malformed {
                            line,
                            message: format!("missing {name}"),
                        })
                };
                let id = field(id_col, "pvs_id")?;
                let score = parse_score(field(score_col, "score")?, line, m)?;
                scores
                    .entry(id.to_string())
                    .or_insert_with(|| {
                        order.push(id.to_string());
                        (line, Vec::new())
                    })
                    .1
                    .push(score);
            }
        }
        CsvFormat::Wide => {
            if column("pvs_id")? != 0 {
                return Err(DataError::Malformed {
                    line: 1,
                    message: "wide format needs pvs_id as the first column".into(),
                });
            }
            for record in rdr.records() {
                let record = record.map_err(csv_error)?;
                let line = record.position().map_or(0, |p| p.line());
                if record.iter().all(str::is_empty) {
                    continue;
                }
                let id = record.get(0).filter(|v| !v.is_empty()).ok_or_else(|| DataError::Malformed {
                    line,
                    message: "missing pvs_id".into(),
                })?;
                if scores.contains_key(id) {
                    return Err(DataError::DuplicateId {
                        line,
                        id: id.to_string(),
                    });
                }
                let row = record
                    .iter()
                    .skip(1)
                    .filter(|v| !v.is_empty())
                    .map(|v| parse_score(v, line, m))
                    .collect::<Result<Vec<_>, _>>()?;
                if row.is_empty() {
                    return Err(DataError::Malformed {
                        line,
                        message: format!("sample '{id}' has no scores"),
                    });
                }
                order.push(id.to_string());
                scores.insert(id.to_string(), (line, row));
            }
        }
    }
    if order.is_empty() {
        return Err(DataError::Empty);
    }
    let samples = order
        .into_iter()
        .map(|id| {
            let (line, values) = scores.remove(&id).expect("every id was recorded");
            ScoreSample::new(id, values, m).map_err(|e| DataError::Malformed {
                line,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        samples,
        m,
        source_path: source.to_string(),
    })
}

/// Writes samples in either layout; long-format subject ids are `s1, s2, ...`
/// by position within each sample.
pub fn write_scores_csv<W: Write>(samples: &[ScoreSample], format: CsvFormat, out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let to_io = |e: csv::Error| std::io::Error::other(e);
    match format {
        CsvFormat::Long => {
            w.write_record(["pvs_id", "subject_id", "score"]).map_err(to_io)?;
            for s in samples {
                for (i, score) in s.scores().iter().enumerate() {
                    w.write_record([s.id().to_string(), format!("s{}", i + 1), score.to_string()])
                        .map_err(to_io)?;
                }
            }
        }
        CsvFormat::Wide => {
            let width = samples.iter().map(ScoreSample::len).max().unwrap_or(0);
            let header: Vec<String> = std::iter::once("pvs_id".to_string())
                .chain((1..=width).map(|i| format!("s{i}")))
                .collect();
            w.write_record(&header).map_err(to_io)?;
            for s in samples {
                let row: Vec<String> = std::iter::once(s.id().to_string())
                    .chain(s.scores().iter().map(u32::to_string))
                    .collect();
                w.write_record(&row).map_err(to_io)?;
            }
        }
    }
    w.flush()
}
