//! Deterministic JSON emission: fixed key order, floats always written with
//! 17 significant digits, rationals as "num/den" strings. Repeated runs of
//! the same configuration produce byte-identical artifacts.

use num_rational::BigRational;

pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    /// Key order is emission order.
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn rational(r: &BigRational) -> Json {
        Json::Str(format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn object(fields: Vec<(&str, Json)>) -> Json {
        Json::Object(
            fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(v) => out.push_str(&v.to_string()),
            Json::Float(x) => out.push_str(&format_f64(*x)),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => {
                            out.push_str(&format!("\\u{:04x}", c as u32))
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    out.push('"');
                    out.push_str(k);
                    out.push_str("\": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

/// 17 significant digits, enough to round-trip any f64, formatted as a
/// plain JSON number.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "null".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 {
            "1e999".to_string()
        } else {
            "-1e999".to_string()
        };
    }
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_digits() {
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(-0.5), "-5.0000000000000000e-1");
        let x = 0.1f64;
        let s = format_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn deterministic_render() {
        let doc = Json::object(vec![
            ("b", Json::Int(2)),
            ("a", Json::Array(vec![Json::Float(0.25), Json::Bool(true)])),
        ]);
        let r1 = doc.render();
        let r2 = doc.render();
        assert_eq!(r1, r2);
        assert!(r1.contains("\"b\": 2"));
        assert!(r1.contains("2.5000000000000000e-1"));
    }
}
