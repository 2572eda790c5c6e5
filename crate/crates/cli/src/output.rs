//! Deterministic text output: shortest round-trip float formatting and CSV
//! assembly (UTF-8, comma-separated, LF line endings, `null` for absent
//! values).

use std::fmt::Write as _;

/// Shortest decimal representation that round-trips the exact f64 value,
/// identical across platforms.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt_f64(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "null".to_string(),
    }
}

/// Render header + rows with LF endings.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 1e-12, 3.482050807568877, -7.25] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_opt_f64(None), "null");
    }

    #[test]
    fn csv_uses_lf_only() {
        let text = csv(&["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(text, "a,b\n1,2\n");
        assert!(!text.contains('\r'));
    }
}
