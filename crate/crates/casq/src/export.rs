//! JSON result records: `{operation, inputs-digest, tensor entries as
//! [re, im] pairs, meta}` with a digest that is stable across reruns and
//! changes whenever any input field changes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::discrete::GreenValue;
use crate::math::ComplexTensor3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub operation: String,
    pub inputs_digest: String,
    /// Flattened complex entries as [re, im]; length 1 for scalars, 9 for
    /// tensors (row-major).
    pub entries: Vec<[f64; 2]>,
    pub meta: Value,
}

impl ResultRecord {
    pub fn scalar(operation: &str, inputs: &Value, value: Complex64, meta: Value) -> Self {
        Self {
            operation: operation.to_string(),
            inputs_digest: digest_value(inputs),
            entries: vec![[value.re, value.im]],
            meta,
        }
    }

    pub fn tensor(operation: &str, inputs: &Value, value: &ComplexTensor3, meta: Value) -> Self {
        let mut entries = Vec::with_capacity(9);
        for row in &value.entries {
            for e in row {
                entries.push([e.re, e.im]);
            }
        }
        Self {
            operation: operation.to_string(),
            inputs_digest: digest_value(inputs),
            entries,
            meta,
        }
    }

    pub fn green(operation: &str, inputs: &Value, value: &GreenValue, meta: Value) -> Self {
        match value {
            GreenValue::Scalar(s) => Self::scalar(operation, inputs, *s, meta),
            GreenValue::Tensor(t) => Self::tensor(operation, inputs, t, meta),
        }
    }
}

/// SHA-256 of the canonical (key-sorted) JSON encoding.
pub fn digest_value(v: &Value) -> String {
    let mut hasher = Sha256::new();
    let mut buf = String::new();
    write_canonical(v, &mut buf);
    hasher.update(buf.as_bytes());
    hex_digest(&hasher.finalize())
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            out.push('{');
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                write_canonical(&map[*k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}
