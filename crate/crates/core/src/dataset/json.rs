//! Byte-stable JSON: struct field order is fixed by declaration and every
//! float is written with 17 significant digits (`%.17g`).

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 <= |v| < 1e17`. Non-finite values become `null`.
pub fn format_g17(v: f64) -> String {
    if !v.is_finite() {
        return "null".to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if !(-4..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let frac = if tail.is_empty() { String::new() } else { format!(".{tail}") };
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{head}{frac}e{esign}{:02}", exp.abs());
    }
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        return format!("{sign}0.{zeros}{digits}");
    }
    let int_len = exp as usize + 1;
    if digits.len() <= int_len {
        format!("{sign}{digits}{}", "0".repeat(int_len - digits.len()))
    } else {
        let (int, frac) = digits.split_at(int_len);
        format!("{sign}{int}.{frac}")
    }
}

/// Compact JSON with `%.17g` floats.
#[derive(Default)]
pub struct G17Formatter;

impl Formatter for G17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    out.push(b'\n');
    out
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, to_json_bytes(value)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        let cases: &[(f64, &str)] = &[
            (5.0, "5"),
            (0.1, "0.10000000000000001"),
            (123.45, "123.45000000000000"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (0.00012, "0.00012000000000000000"),
            (1e17, "1e+17"),
            (12345678901234567.0, "12345678901234568"),
            (1e300, "1.0000000000000001e+300"),
            (0.0, "0"),
            (213.0, "213"),
        ];
        for &(v, expect) in cases {
            // strip trailing zeros the way %g does
            let want = if expect.contains('.') && !expect.contains('e') {
                expect.trim_end_matches('0').trim_end_matches('.').to_string()
            } else {
                expect.to_string()
            };
            assert_eq!(format_g17(v), want, "{v}");
        }
    }

    #[test]
    fn lossless() {
        for v in [0.1, 1.0 / 3.0, 400.123456789, -7.25e-9, 6.02214076e23, f64::MIN_POSITIVE] {
            let back: f64 = format_g17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn serializer_uses_g17() {
        let bytes = to_json_bytes(&serde_json::json!({"a": [0.1, 2.0, 3]}));
        assert_eq!(String::from_utf8(bytes).unwrap(), "{\"a\":[0.10000000000000001,2,3]}\n");
    }
}
