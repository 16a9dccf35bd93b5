/// Scientific notation with 17 significant digits, enough to round-trip
/// every `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_float(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

pub fn parse_bool(s: &str) -> Option<bool> {
    match s.trim() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, f64::MIN_POSITIVE, 0.0] {
            let s = fmt_float(v);
            assert_eq!(parse_float(&s), Some(v), "{s}");
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }
}
