//! File formats: case-table CSV in, canonical JSON and plain CSV out.
//!
//! Canonical JSON has object keys sorted and every non-integer number
//! printed with 17 significant digits, so identical inputs give
//! byte-identical files.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::Design;

/// Name of the observation column in case-table CSV files.
pub const OBSERVATION_COLUMN: &str = "x_obs";

pub fn ser_vec<S: Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

/// Row-major nested sequence.
pub fn ser_mat<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

/// Serialize `value` as canonical JSON (sorted keys, 17 significant digits,
/// two-space indent, trailing newline).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Data(e.to_string()))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

/// Shortest-free float formatting used in every emitted file.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() {
                    out.push_str(&format_f64(f));
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric arrays stay on one line
            if items.iter().all(|i| matches!(i, Value::Number(_) | Value::Null | Value::Bool(_))) {
                out.push('[');
                for (idx, item) in items.iter().enumerate() {
                    if idx > 0 {
                        out.push_str(", ");
                    }
                    write_value(item, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (idx, item) in items.iter().enumerate() {
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
                if idx + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (idx, key) in keys.iter().enumerate() {
                push_indent(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("string serializes"));
                out.push_str(": ");
                write_value(&map[key.as_str()], indent + 1, out);
                if idx + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Predictor columns plus (optionally) the observation column.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub design: Design,
    pub x_obs: Option<DVector<f64>>,
}

/// Parse a case table: header row, one row per case. Every column except
/// `x_obs` is a predictor, in file order.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Data(format!("reading header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() {
        return Err(Error::Data("empty header row".into()));
    }
    let obs_idx = headers.iter().position(|h| h == OBSERVATION_COLUMN);
    let predictor_idx: Vec<usize> = (0..headers.len()).filter(|&i| Some(i) != obs_idx).collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {}: {e}", line + 1)))?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!("row {} has {} fields, header has {}", line + 1, record.len(), headers.len())));
        }
        let parsed = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::Data(format!("row {}, column `{}`: cannot parse `{}` as a finite number", line + 1, headers[c], field))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    let n = rows.len();
    let matrix = DMatrix::from_fn(n, predictor_idx.len(), |i, k| rows[i][predictor_idx[k]]);
    let names = predictor_idx.iter().map(|&i| headers[i].clone()).collect();
    let design = Design::with_names(matrix, names)?;
    let x_obs = obs_idx.map(|c| DVector::from_iterator(n, rows.iter().map(|r| r[c])));
    Ok(Dataset { design, x_obs })
}

/// Write a case table readable by [`read_dataset`] without loss.
pub fn write_dataset<W: Write>(writer: W, design: &Design, x_obs: &DVector<f64>) -> Result<()> {
    if x_obs.len() != design.n() {
        return Err(Error::Shape(format!("{} observations for {} cases", x_obs.len(), design.n())));
    }
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = design.names().to_vec();
    header.push(OBSERVATION_COLUMN.to_string());
    wtr.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
    for i in 0..design.n() {
        let mut row: Vec<String> = design.matrix().row(i).iter().map(|v| format_f64(*v)).collect();
        row.push(format_f64(x_obs[i]));
        wtr.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Data(e.to_string()))
}

/// Row-major matrix dump, no header.
pub fn write_matrix_csv<W: Write>(writer: W, m: &DMatrix<f64>) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        wtr.write_record(&fields).map_err(|e| Error::Data(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Data(e.to_string()))
}

/// Table with a header row and numeric columns.
pub fn write_table_csv<W: Write>(writer: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header).map_err(|e| Error::Data(e.to_string()))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        wtr.write_record(&fields).map_err(|e| Error::Data(e.to_string()))?;
    }
    wtr.flush().map_err(|e| Error::Data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys_and_pins_floats() {
        let v = serde_json::json!({"b": 0.1, "a": [1, 2.5], "c": {"z": true, "y": null}});
        let s = to_canonical_json(&v).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": [1, 2.5000000000000000e0],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": {\n    \"y\": null,\n    \"z\": true\n  }\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn dataset_roundtrip_is_lossless() {
        let design = Design::with_names(DMatrix::from_row_slice(3, 1, &[0.1, 1.0 / 3.0, 2.0]), vec!["u".into()]).unwrap();
        let x = DVector::from_column_slice(&[std::f64::consts::PI, -1e-300, 7.0]);
        let mut buf = Vec::new();
        write_dataset(&mut buf, &design, &x).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back.design, design);
        assert_eq!(back.x_obs.unwrap(), x);
    }

    #[test]
    fn dataset_errors_name_the_problem() {
        let err = read_dataset("u,x_obs\n1,abc\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("x_obs"));
        assert!(read_dataset("u,x_obs\n".as_bytes()).is_err());
        let no_obs = read_dataset("a,b\n1,2\n".as_bytes()).unwrap();
        assert!(no_obs.x_obs.is_none());
        assert_eq!(no_obs.design.m(), 2);
    }
}
