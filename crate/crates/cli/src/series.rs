//! Reading and writing count series as CSV.
//!
//! Accepted input: a `t,y[,...]` header followed by rows with a 0-based,
//! consecutive `t`, or a headerless single column of counts. Lines starting
//! with `#` are skipped anywhere in the file.

use std::fmt::Write;

use serde_json::Value;

use crate::CliError;

enum Layout {
    Single,
    Columns(usize),
}

fn line_error(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}: {msg}"))
}

fn parse_count(field: &str, line: usize) -> Result<u64, CliError> {
    if field.is_empty() {
        return Err(line_error(line, "missing value"));
    }
    field.parse::<u64>().map_err(|_| match field.parse::<f64>() {
        Ok(v) if v < 0.0 => line_error(line, format!("negative count '{field}'")),
        Ok(_) => line_error(line, format!("non-integer count '{field}'")),
        Err(_) => line_error(line, format!("'{field}' is not a count")),
    })
}

pub fn parse_series(text: &str) -> Result<Vec<u64>, CliError> {
    let mut layout = None;
    let mut y = Vec::new();
    for (idx, raw) in text.trim_end().lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let layout = match layout {
            Some(ref l) => l,
            None if fields[0].eq_ignore_ascii_case("t") => {
                if fields.get(1).map(|f| f.eq_ignore_ascii_case("y")) != Some(true) {
                    return Err(line_error(line, "header must start with 't,y'"));
                }
                layout = Some(Layout::Columns(fields.len()));
                continue;
            }
            None if fields.len() == 1 => layout.insert(Layout::Single),
            None => return Err(line_error(line, "expected a 't,y' header or a single column of counts")),
        };
        match *layout {
            Layout::Single => {
                if fields.len() != 1 {
                    return Err(line_error(line, format!("expected 1 field, found {}", fields.len())));
                }
                y.push(parse_count(fields[0], line)?);
            }
            Layout::Columns(width) => {
                if fields.len() != width {
                    return Err(line_error(line, format!("expected {width} fields, found {}", fields.len())));
                }
                let t: usize = fields[0]
                    .parse()
                    .map_err(|_| line_error(line, format!("invalid index t = '{}'", fields[0])))?;
                if t != y.len() {
                    return Err(line_error(line, format!("t = {t} out of sequence (expected {})", y.len())));
                }
                y.push(parse_count(fields[1], line)?);
            }
        }
    }
    if y.is_empty() {
        return Err(CliError::Input("series contains no observations".into()));
    }
    Ok(y)
}

/// `# key = value` lines for every entry of a JSON object, in key order.
pub fn echo_header(command: &str, config: &Value) -> String {
    let mut out = format!("# bnbar {command} {}\n", env!("CARGO_PKG_VERSION"));
    if let Value::Object(map) = config {
        for (key, value) in map {
            match value {
                Value::Null => {}
                Value::String(s) => {
                    let _ = writeln!(out, "# {key} = {s}");
                }
                other => {
                    let _ = writeln!(out, "# {key} = {other}");
                }
            }
        }
    }
    out
}

/// `header` followed by one `t,y,lambda` row per observation.
pub fn write_columns(header: &str, y: &[u64], lambda: &[f64]) -> String {
    let mut out = String::with_capacity(16 * y.len());
    let _ = writeln!(out, "{header}");
    for (t, (y, l)) in y.iter().zip(lambda).enumerate() {
        let _ = writeln!(out, "{t},{y},{l}");
    }
    out
}
