//! Byte-stable artifact encodings: reals with 9 significant digits, JSON with
//! sorted keys, CSV with `\n` line ends.

use serde_json::Value;

/// `printf("%.9g")`: 9 significant digits, trailing zeros dropped, exponent
/// form when the decimal exponent is below -4 or at least 9. Negative zero
/// prints as `0`.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        trim_fraction(format!("{:.*}", (8 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_fraction(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Pretty JSON (two-space indent) with object keys sorted and every
/// non-integer number rendered by [`fmt_real`]; ends with a newline.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => {
            out.push_str(&serde_json::to_string(v).expect("scalar serializes"))
        }
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (None, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&fmt_real(n.as_f64().expect("finite number"))),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Arrays of scalars stay on one line; nested structure is broken out.
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, level, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                indent(level + 1, out);
                write_value(x, level + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
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
            for (i, k) in keys.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(&map[k.as_str()], level + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(level, out);
            out.push('}');
        }
    }
}

/// A JSON number for a real; non-finite values become `null`.
pub fn real(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| real(x)).collect())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory writer cannot fail")
}

/// `video_id,{prefix}0,...` followed by one row per id.
pub fn feature_csv<'a, I>(prefix: &str, dim: usize, rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = (&'a str, &'a [f64])>,
{
    let mut w = csv_writer();
    let mut header = vec!["video_id".to_string()];
    header.extend((0..dim).map(|i| format!("{prefix}{i}")));
    w.write_record(&header).expect("in-memory write");
    for (id, values) in rows {
        let mut rec = vec![id.to_string()];
        rec.extend(values.iter().map(|&x| fmt_real(x)));
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

/// Ids and rows read back from [`feature_csv`] output.
pub fn parse_feature_csv(bytes: &[u8]) -> Result<(Vec<String>, usize, Vec<f64>), String> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let dim = r
        .headers()
        .map_err(|e| e.to_string())?
        .len()
        .saturating_sub(1);
    if dim == 0 {
        return Err("feature CSV has no value columns".into());
    }
    let (mut ids, mut data) = (Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != dim + 1 {
            return Err(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                rec.len(),
                dim + 1
            ));
        }
        ids.push(rec[0].to_string());
        for field in rec.iter().skip(1) {
            data.push(
                field
                    .parse::<f64>()
                    .map_err(|_| format!("row {}: {field:?} is not a number", line + 1))?,
            );
        }
    }
    Ok((ids, dim, data))
}

pub fn envelope_csv(bins: &[(f64, f64)]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["bin", "min", "max"])
        .expect("in-memory write");
    for (i, (lo, hi)) in bins.iter().enumerate() {
        w.write_record([i.to_string(), fmt_real(*lo), fmt_real(*hi)])
            .expect("in-memory write");
    }
    finish(w)
}

/// Square matrix with the ids as header row and first column.
pub fn similarity_csv(ids: &[String], matrix: &[f64]) -> Vec<u8> {
    let n = ids.len();
    let mut w = csv_writer();
    let mut header = vec!["video_id".to_string()];
    header.extend(ids.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (i, id) in ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend(matrix[i * n..(i + 1) * n].iter().map(|&x| fmt_real(x)));
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

/// One token per line, in the given (sorted) order.
pub fn vocabulary_txt(vocab: &[String]) -> Vec<u8> {
    let mut out = String::new();
    for t in vocab {
        out.push_str(t);
        out.push('\n');
    }
    out.into_bytes()
}
