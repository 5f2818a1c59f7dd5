//! `.msf` text model files.
//!
//! ```text
//! SEEDSEG-MLP 1
//! dims 6 <H> 2 norm 255
//! <H lines of 6 w1 values>
//! <1 line of H b1 values>
//! <2 lines of H w2 values>
//! <1 line of 2 b2 values>
//! ```
//!
//! Values are written with 17 significant digits so binary64 parameters
//! survive a round trip bit-exactly.

use super::{Mlp, INPUTS, OUTPUTS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MSF_MAGIC: &str = "SEEDSEG-MLP 1";

fn write_row<T: Scalar>(out: &mut String, row: &[T]) {
    let cells: Vec<String> = row.iter().map(|v| format!("{:.16e}", v.widen())).collect();
    out.push_str(&cells.join(" "));
    out.push('\n');
}

pub fn serialize_model<T: Scalar>(mlp: &Mlp<T>) -> Vec<u8> {
    let h = mlp.hidden_size();
    let mut out = format!("{MSF_MAGIC}\ndims {INPUTS} {h} {OUTPUTS} norm {}\n", mlp.norm().widen());
    for row in mlp.w1_rows() {
        write_row(&mut out, &row);
    }
    write_row(&mut out, mlp.b1());
    for k in 0..OUTPUTS {
        write_row(&mut out, mlp.w2_row(k));
    }
    write_row(&mut out, &mlp.b2());
    out.into_bytes()
}

fn parse_value<T: Scalar>(tok: &str) -> Result<T> {
    let v: f64 = tok.parse().map_err(|_| Error::Token(tok.to_string()))?;
    T::from_f64(v).ok_or_else(|| Error::Token(tok.to_string()))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn row<T: Scalar>(&mut self, what: &str, expected: usize) -> Result<Vec<T>> {
        let (n, line) = self
            .inner
            .next()
            .ok_or_else(|| Error::DimensionMismatch(format!("missing {what} line")))?;
        let row: Vec<T> = line.split_whitespace().map(parse_value).collect::<Result<_>>()?;
        if row.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "line {}: {what} has {} values, expected {expected}",
                n + 1,
                row.len()
            )));
        }
        Ok(row)
    }
}

pub fn parse_model<T: Scalar>(bytes: &[u8]) -> Result<Mlp<T>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Header("model file is not UTF-8".into()))?;
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or("").trim_end();
    if magic != MSF_MAGIC {
        if magic.split_whitespace().next() == Some("SEEDSEG-MLP") {
            return Err(Error::Version(magic.to_string()));
        }
        return Err(Error::BadMagic { expected: MSF_MAGIC, found: magic.to_string() });
    }
    let dims: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    let ["dims", inputs, hidden, outputs, "norm", norm] = dims[..] else {
        return Err(Error::Header(format!("malformed dims line {:?}", dims.join(" "))));
    };
    let count = |t: &str| t.parse::<usize>().map_err(|_| Error::Token(t.to_string()));
    let (inputs, h, outputs) = (count(inputs)?, count(hidden)?, count(outputs)?);
    if inputs != INPUTS || outputs != OUTPUTS {
        return Err(Error::DimensionMismatch(format!(
            "expected a {INPUTS}-H-{OUTPUTS} network, file declares {inputs}-{h}-{outputs}"
        )));
    }
    let norm: T = parse_value(norm)?;
    let mut rows = Lines { inner: text.lines().enumerate() };
    rows.inner.nth(1);
    let mut w1 = Vec::with_capacity(h);
    for _ in 0..h {
        let row = rows.row::<T>("w1 row", INPUTS)?;
        w1.push(std::array::from_fn(|i| row[i]));
    }
    let b1 = rows.row("b1", h)?;
    let w2 = [rows.row("w2 row", h)?, rows.row("w2 row", h)?];
    let b2 = rows.row::<T>("b2", OUTPUTS)?;
    if let Some((n, extra)) = rows.inner.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::DimensionMismatch(format!("unexpected line {}: {extra:?}", n + 1)));
    }
    Mlp::from_parts(&w1, b1, w2, [b2[0], b2[1]], norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_line_count() {
        let m = Mlp::<f64>::init(1, 8).unwrap();
        let text = String::from_utf8(serialize_model(&m)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "SEEDSEG-MLP 1");
        assert_eq!(lines[1], "dims 6 1 2 norm 255");
        assert_eq!(lines.len(), 2 + 1 + 1 + 2 + 1);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = Mlp::<f64>::init(7, 21).unwrap();
        let back: Mlp<f64> = parse_model(&serialize_model(&m)).unwrap();
        assert!(m.params().zip(back.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let m = Mlp::<f32>::init(7, 21).unwrap();
        assert_eq!(parse_model::<f32>(&serialize_model(&m)).unwrap(), m);
    }

    #[test]
    fn wrong_version() {
        let text = "SEEDSEG-MLP 2\ndims 6 1 2 norm 255\n";
        assert!(matches!(parse_model::<f64>(text.as_bytes()), Err(Error::Version(_))));
        assert!(matches!(parse_model::<f64>(b"P6\n"), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn short_w1_row() {
        let m = Mlp::<f64>::init(1, 8).unwrap();
        let text = String::from_utf8(serialize_model(&m)).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let row: Vec<&str> = lines[2].split(' ').take(5).collect();
        lines[2] = row.join(" ");
        let err = parse_model::<f64>(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)), "{err}");
    }

    #[test]
    fn non_numeric_token() {
        let m = Mlp::<f64>::init(1, 8).unwrap();
        let text = String::from_utf8(serialize_model(&m)).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[3] = "abc".into();
        let text = lines.join("\n");
        assert!(matches!(parse_model::<f64>(text.as_bytes()), Err(Error::Token(_))));
    }

    #[test]
    fn rejects_other_topologies() {
        let text = "SEEDSEG-MLP 1\ndims 5 1 2 norm 255\n";
        assert!(matches!(parse_model::<f64>(text.as_bytes()), Err(Error::DimensionMismatch(_))));
        let text = "SEEDSEG-MLP 1\ndims 6 1 2 norm 255\n0 0 0 0 0 0\n0\n0\n0\n0 0\n0 0\n";
        assert!(matches!(parse_model::<f64>(text.as_bytes()), Err(Error::DimensionMismatch(_))));
    }
}
