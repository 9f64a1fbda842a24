//! Fixed-precision number formatting for CSV output.

/// Significant digits written to CSV files.
pub const CSV_DIGITS: usize = 12;

/// `x` with `digits` significant digits, trailing zeros trimmed. Very large
/// or small magnitudes switch to exponent form.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let exp = format!("{:.*e}", digits - 1, x);
    let (mantissa, e) = exp.split_once('e').expect("exponent form");
    let e: i32 = e.parse().expect("integer exponent");
    if (-5..(digits as i32)).contains(&e) {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        trim(&format!("{:.*}", decimals, x)).to_string()
    } else {
        format!("{}e{}", trim(mantissa), e)
    }
}

/// [`sig`] with the CSV precision.
pub fn csv(x: f64) -> String {
    sig(x, CSV_DIGITS)
}

pub fn csv_opt(x: Option<f64>) -> String {
    x.map(csv).unwrap_or_default()
}

fn trim(s: &str) -> &str {
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
    fn formats() {
        assert_eq!(csv(4.5), "4.5");
        assert_eq!(csv(1.0 / 3.0), "0.333333333333");
        assert_eq!(csv(0.004389045848236), "0.00438904584824");
        assert_eq!(csv(-2.0), "-2");
        assert_eq!(csv(1.5e-9), "1.5e-9");
        assert_eq!(csv(6.02214076e23), "6.02214076e23");
        assert_eq!(csv(0.0), "0");
        assert_eq!(csv(123456789012.4), "123456789012");
        assert_eq!(csv_opt(None), "");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for x in [std::f64::consts::PI, 1.125, 7.29e-7, 98765.4321] {
            let back: f64 = csv(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11);
        }
    }
}
