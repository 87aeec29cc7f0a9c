//! Number formatting shared by the CSV and JSON writers.

/// Significant digits kept in every serialized floating-point value.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits. Non-finite values
/// pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text that reads back as `round_sig(x)`, always with a decimal
/// point or exponent (`1.0`, `0.0625`, `1e-10`).
pub fn fmt_sig(x: f64) -> String {
    format!("{:?}", round_sig(x))
}
