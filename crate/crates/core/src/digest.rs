use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// SHA-256 of the canonical JSON form of `value` (object keys sorted).
pub fn sha256_json<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let canonical = serde_json::to_value(value)?;
    let bytes = serde_json::to_vec(&canonical)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_order_is_irrelevant() {
        let a = sha256_json(&json!({"a": 1, "b": [1.5, 2]})).unwrap();
        let b = sha256_json(&json!({"b": [1.5, 2], "a": 1})).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert_ne!(a, sha256_json(&json!({"a": 2, "b": [1.5, 2]})).unwrap());
    }

    #[test]
    fn empty_object() {
        assert_eq!(
            sha256_json(&json!({})).unwrap(),
            "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
        );
    }
}
