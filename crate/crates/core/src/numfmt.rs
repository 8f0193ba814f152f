//! Fixed-precision number formatting for reproducible text outputs.

/// Nine significant digits, positional for exponents in `[-5, 9)` and
/// scientific otherwise. Zero (of either sign) prints as `0`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific format always carries an exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn examples() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(300.0), "300.000000");
        assert_eq!(sig9(305.2848), "305.284800");
        assert_eq!(sig9(-0.45), "-0.450000000");
        assert_eq!(sig9(1.25e-4), "0.000125000000");
        assert_eq!(sig9(1e-7), "1.00000000e-7");
        assert_eq!(sig9(9.999999999), "10.0000000");
        assert_eq!(sig9(2.5e12), "2.50000000e12");
    }
}
