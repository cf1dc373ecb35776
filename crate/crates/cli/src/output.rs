//! Serialization with 17 significant digits for every float.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{CliError, CliResult};

struct Precise;

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(real(v).as_bytes())
    }
}

/// `v` with 17 significant digits; round-trips exactly.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV cell for an optional real; empty when absent or non-finite.
pub fn real_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => real(x),
        _ => String::new(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Output(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, -0.0, f64::MIN_POSITIVE] {
            let s = real(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(real(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn json_uses_full_precision_and_null() {
        #[derive(Serialize)]
        struct R {
            x: f64,
            y: Option<f64>,
            z: f64,
        }
        let s = to_json(&R { x: 0.1, y: None, z: f64::NAN }).unwrap();
        assert_eq!(
            String::from_utf8(s).unwrap(),
            "{\"x\":1.0000000000000001e-1,\"y\":null,\"z\":null}\n"
        );
    }
}
