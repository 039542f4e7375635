/// Formats `x` with 17 significant digits: positional notation for
/// magnitudes in `[1e-5, 1e16)`, scientific otherwise.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs();
    if (1e-5..1e16).contains(&magnitude) {
        let exponent = magnitude.log10().floor() as i32;
        let decimals = (16 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}
