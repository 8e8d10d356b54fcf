//! Number formatting for CSV output.

/// Renders `v` with 9 significant digits, `%.9g` style: fixed notation for
/// decimal exponents in `[-4, 9)`, scientific otherwise, trailing zeros
/// trimmed.
pub fn fmt_sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // Round to 9 significant digits first so the exponent reflects rounding.
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567891.0, "1.23456789e+09"),
            (1e-4, "0.0001"),
            (1e-5, "1e-05"),
            (5e-6, "5e-06"),
            (999999999.6, "1e+09"),
            (0.000123456789123, "0.000123456789"),
            (f64::NAN, "nan"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_sig9(v), want, "formatting {v:e}");
        }
    }

    #[test]
    fn round_trips_within_precision() {
        for v in [std::f64::consts::PI, 6.02214076e23, -1.602e-19, 1000.25] {
            let back: f64 = fmt_sig9(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-8);
        }
    }
}
