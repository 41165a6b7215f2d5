//! Deterministic text serialization helpers.
//!
//! All numeric output (JSON and CSV) goes through [`fmt_f64`] so that
//! identical runs produce byte-identical artifacts: 17 significant digits in
//! lowercase scientific notation, enough to round-trip any finite `f64`.

/// Format a finite `f64` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    assert!(x.is_finite(), "refusing to serialize non-finite value {x}");
    format!("{x:.16e}")
}

/// Minimal JSON string escaping (quotes, backslash, control characters).
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
