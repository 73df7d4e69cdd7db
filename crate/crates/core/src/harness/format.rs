//! Number formatting for the CSV outputs.

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-5, 1e12)`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const DIGITS: usize = 12;
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g12() {
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(1.0), "1");
        assert_eq!(fmt_float(-2.5), "-2.5");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(123456.789), "123456.789");
        assert_eq!(fmt_float(1e-7), "1e-07");
        assert_eq!(fmt_float(2.0f64.powi(60)), "1.15292150461e+18");
        assert_eq!(fmt_float(0.000123), "0.000123");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(999999999999.5), "1e+12");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for &x in &[std::f64::consts::PI, 6.02214076e23, -1.602176634e-19, 0.398107170553497] {
            let back: f64 = fmt_float(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-12 * x.abs());
        }
    }
}
