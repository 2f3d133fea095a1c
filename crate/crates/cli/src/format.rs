//! Number formatting shared by every output file.

/// Nine significant digits, `%g` style: fixed notation for exponents in
/// `-4..9`, scientific otherwise, trailing zeros trimmed.
pub fn float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn floats(vs: &[f64]) -> String {
    vs.iter().map(|&v| float(v)).collect::<Vec<_>>().join(" ")
}

pub fn ids(vs: &[usize]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(float(0.0), "0");
        assert_eq!(float(-0.0), "0");
        assert_eq!(float(1.0), "1");
        assert_eq!(float(0.5), "0.5");
        assert_eq!(float(-2.25), "-2.25");
        assert_eq!(float(1.0 / 3.0), "0.333333333");
        assert_eq!(float(2.0 / 3.0), "0.666666667");
        assert_eq!(float(39.43), "39.43");
        assert_eq!(float(123456789.0), "123456789");
        assert_eq!(float(1234567891.0), "1.23456789e+09");
        assert_eq!(float(0.0001), "0.0001");
        assert_eq!(float(0.00001234), "1.234e-05");
        assert_eq!(float(9.9999999999), "10");
    }

    #[test]
    fn lists() {
        assert_eq!(floats(&[0.5, 0.5]), "0.5 0.5");
        assert_eq!(ids(&[0, 3]), "0 3");
        assert_eq!(ids(&[]), "");
    }
}
