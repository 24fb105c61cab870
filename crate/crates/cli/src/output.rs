use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Number, Value};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::CliError;

/// Rewrites every non-integer number with 17 significant digits so that
/// the text round-trips to the same `f64`.
pub fn with_full_precision(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(f) if f.is_finite() => Value::Number(Number::from_str(&format!("{f:.16e}")).expect("valid number")),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(with_full_precision).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, with_full_precision(v))).collect()),
        other => other,
    }
}

/// The JSON envelope shared by all commands.
pub fn envelope(command: &str, config: Map<String, Value>, result: Value, exit_code: u8) -> Value {
    let timestamp = OffsetDateTime::now_utc().format(&Rfc3339).unwrap_or_default();
    let mut root = Map::new();
    root.insert("command".into(), Value::from(command));
    root.insert("timestamp".into(), Value::from(timestamp));
    root.insert("exit_code".into(), Value::from(exit_code));
    root.insert("config".into(), Value::Object(config));
    root.insert("result".into(), result);
    with_full_precision(Value::Object(root))
}

/// Writes `bytes` to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_get_seventeen_digits() {
        let v = with_full_precision(serde_json::json!({"a": 0.1, "b": [1, 2.5e-300], "c": "x"}));
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"a":1.0000000000000001e-1,"b":[1,2.5000000000000000e-300],"c":"x"}"#);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
