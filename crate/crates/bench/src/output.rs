//! Numeric formatting for CSV output: every float is written with 17
//! significant digits so values round-trip exactly through the decimal
//! representation.

/// Formats a float with 17 significant digits. NaN and infinities keep
/// their standard spellings.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses a comma-separated list of floats.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad float {part:?}: {e}"))
        })
        .collect()
}
