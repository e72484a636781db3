use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Record of one CLI run. Everything except the two timestamps is a
/// deterministic function of the command, its configuration and its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    /// SHA-256 over the command, the configuration, the seed and the raw input files.
    pub input_hash: String,
    pub seed: Option<u64>,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub passed: bool,
    pub results: Value,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub fn input_hash(command: &str, config: &Value, seed: Option<u64>, inputs: &[(String, Vec<u8>)]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(config).expect("config serializes"));
    h.update(serde_json::to_vec(&seed).expect("seed serializes"));
    for (name, bytes) in inputs {
        h.update([0]);
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_depends_on_every_input() {
        let cfg = json!({"shots": 10});
        let a = input_hash("test4", &cfg, Some(1), &[("u".into(), b"abc".to_vec())]);
        assert_eq!(a.len(), 64);
        assert_eq!(a, input_hash("test4", &cfg, Some(1), &[("u".into(), b"abc".to_vec())]));
        assert_ne!(a, input_hash("test4", &cfg, Some(1), &[("u".into(), b"abd".to_vec())]));
        assert_ne!(a, input_hash("test4", &cfg, Some(2), &[("u".into(), b"abc".to_vec())]));
        assert_ne!(a, input_hash("sctest", &cfg, Some(1), &[("u".into(), b"abc".to_vec())]));
        assert_ne!(a, input_hash("test4", &json!({"shots": 11}), Some(1), &[("u".into(), b"abc".to_vec())]));
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            command: "pacc".into(),
            config: json!({"exact": true}),
            input_hash: "00".into(),
            seed: None,
            started_unix_ms: 1,
            finished_unix_ms: 2,
            passed: true,
            results: json!({"pacc": 0.75}),
        };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<RunManifest>(&s).unwrap(), m);
    }
}
