//! Number formatting shared by the CSV writers.

/// Fixed notation with six significant digits: `max(0, 5 − ⌊log₁₀|x|⌋)`
/// decimals. Zero prints as `0`, infinities as `inf`/`-inf`.
pub fn fixed6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into the next decade (9.999996 → 10.00000)
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && rounded.abs() >= 10f64.powi(magnitude + 1) {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}
