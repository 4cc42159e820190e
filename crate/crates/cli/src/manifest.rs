use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// What was run and with which resolved parameters. Two runs with equal
/// manifests write the same bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: &'static str,
    pub command: Value,
    pub parameters: Value,
    /// SHA-256 of the canonical JSON of `command` and `parameters`.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: Value, parameters: Value, seed: Option<u64>, outputs: Vec<String>) -> Self {
        // serde_json objects keep keys sorted, so this text is canonical
        let canonical = serde_json::json!({ "command": command, "parameters": parameters }).to_string();
        let digest = Sha256::digest(canonical.as_bytes());
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION"),
            command,
            parameters,
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
            outputs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_depends_only_on_content() {
        let a = RunManifest::new(json!({"tree": "distance"}), json!({"p": 3, "seed": 1}), Some(1), vec![]);
        let b = RunManifest::new(json!({"tree": "distance"}), json!({"seed": 1, "p": 3}), Some(1), vec!["x".into()]);
        let c = RunManifest::new(json!({"tree": "distance"}), json!({"p": 5, "seed": 1}), Some(1), vec![]);
        assert_eq!(a.config_hash, b.config_hash);
        assert_ne!(a.config_hash, c.config_hash);
        assert_eq!(a.config_hash.len(), 64);
    }
}
