//! Fixed CSV conventions: `.` decimal separator, no grouping, 12 significant
//! digits in scientific notation, mandatory header row.

/// Formats a float with 12 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// Joins floats with `;` so a variable-length vector fits in one field.
pub fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}
