//! Float formatting for machine-readable and human-readable output.

/// Significant digits for CSV and other machine outputs; enough to round-trip
/// any `f64`.
pub const MACHINE_DIGITS: usize = 17;

/// Significant digits for human summaries.
pub const HUMAN_DIGITS: usize = 6;

/// `x` with `digits` significant digits, positional when the magnitude is
/// moderate and scientific otherwise.
pub fn sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // the exponent after rounding to `digits`, so 9.9999.. is seen as 10
    let sci = format!("{:.*e}", digits - 1, x);
    let e: i32 = sci.rsplit('e').next().and_then(|t| t.parse().ok()).unwrap_or(0);
    if !(-5..=15).contains(&e) {
        return sci;
    }
    let decimals = (digits as i32 - 1 - e).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn machine(x: f64) -> String {
    sig(x, MACHINE_DIGITS)
}

pub fn human(x: f64) -> String {
    sig(x, HUMAN_DIGITS)
}
