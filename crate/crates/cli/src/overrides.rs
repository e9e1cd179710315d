use serde_json::Value;

use crate::failure::Failure;

/// Applies `key.path=value` to a JSON document. The value is read as JSON
/// when it parses (`[10,15]`, `7`, `{"kind":"fixed"}`) and as a bare string
/// otherwise (`scheme=matched_filter`). Missing objects along the path are
/// created.
pub fn apply(doc: &mut Value, assignment: &str) -> Result<(), Failure> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("--set {assignment:?}: expected KEY=VALUE")))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Failure::usage(format!("--set {assignment:?}: empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));

    let mut node = doc;
    let mut keys = path.split('.').peekable();
    while let Some(key) = keys.next() {
        let Value::Object(map) = node else {
            return Err(Failure::usage(format!("--set {path}: {key:?} is not inside an object")));
        };
        if keys.peek().is_none() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one key")
}
