use crate::eval::{key_name, Row, SweepKey, INPUT_KEYS};
use crate::CliError;
use me_kit::metrics::RatePoint;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};
use std::io;

pub const CSV_HEADER: [&str; 14] = [
    "metric", "R", "S", "K", "theta", "a", "t", "q", "M", "value", "path", "imag_residual", "quad_error", "warnings",
];

pub const OPT_HEADER: [&str; 7] = ["theta", "g", "interior", "rate", "throughput", "snr", "stationarity"];

/// Writes every float with 17 significant digits.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

pub fn json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    v.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("utf-8 json")
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn row_json(r: &Row) -> Value {
    let mut o = Map::new();
    o.insert("metric".into(), json!(r.metric));
    for (k, v) in &r.inputs {
        let v = match k {
            SweepKey::K | SweepKey::M => json!(*v as u64),
            _ => num(*v),
        };
        o.insert(key_name(*k), v);
    }
    o.insert("value".into(), num(r.value));
    o.insert("path".into(), json!(r.path));
    o.insert("imag_residual".into(), num(r.imag_residual));
    o.insert("quad_error".into(), r.quad_error.map(num).unwrap_or(Value::Null));
    o.insert("warnings".into(), json!(r.warnings));
    if let Some(e) = &r.extra {
        o.insert("extra".into(), e.clone());
    }
    Value::Object(o)
}

pub fn rows_json(rows: &[Row]) -> Value {
    Value::Array(rows.iter().map(row_json).collect())
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("csv output: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => fmt_f64(x),
        _ => String::new(),
    }
}

pub fn rows_csv(rows: &[Row]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.metric.clone()];
        for k in INPUT_KEYS {
            let v = r.inputs.iter().find(|(kk, _)| *kk == k).map(|p| p.1);
            rec.push(match (k, v) {
                (SweepKey::K | SweepKey::M, Some(n)) => (n as u64).to_string(),
                _ => cell(v),
            });
        }
        rec.push(cell(Some(r.value)));
        rec.push(r.path.clone());
        rec.push(cell(Some(r.imag_residual)));
        rec.push(cell(r.quad_error));
        rec.push(r.warnings.join("; "));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// Branch-point rows keep `Θ` and `g` and leave the optimum empty.
fn opt_fields(p: &RatePoint) -> [Option<f64>; 4] {
    if p.interior {
        [Some(p.rate), Some(p.throughput), Some(p.snr), Some(p.stationarity)]
    } else {
        [None; 4]
    }
}

pub fn optimize_json(pts: &[RatePoint]) -> Value {
    Value::Array(
        pts.iter()
            .map(|p| {
                let [rate, tp, snr, st] = opt_fields(p).map(|v| v.map(num).unwrap_or(Value::Null));
                json!({
                    "theta": num(p.theta),
                    "g": num(p.g),
                    "interior": p.interior,
                    "rate": rate,
                    "throughput": tp,
                    "snr": snr,
                    "stationarity": st,
                })
            })
            .collect(),
    )
}

pub fn optimize_csv(pts: &[RatePoint]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(OPT_HEADER).map_err(csv_err)?;
    for p in pts {
        let mut rec = vec![cell(Some(p.theta)), cell(Some(p.g)), p.interior.to_string()];
        rec.extend(opt_fields(p).map(cell));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02214076e23] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mant = s.split('e').next().unwrap().replace(['.', '-'], "");
            assert_eq!(mant.len(), 17, "{s}");
        }
        let j = json_string(&json!({"x": 0.5, "n": 3, "b": true}));
        assert_eq!(j, r#"{"b":true,"n":3,"x":5.0000000000000000e-1}"#);
    }
}
