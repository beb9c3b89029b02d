use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a value's canonical JSON encoding.
pub fn json_digest<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("serializable value"))
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Provenance of one command invocation.
///
/// `digest` covers the command, tool version, resolved configuration, instance content and
/// seeds. Timestamps are recorded for information only and are left out of the digest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config_digest: String,
    pub instance_digest: Option<String>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_unix: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_unix: Option<u64>,
    pub digest: String,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, instance_digest: Option<String>, seeds: Vec<u64>) -> Self {
        let mut m = RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: json_digest(config),
            instance_digest,
            seeds,
            started_unix: None,
            finished_unix: None,
            digest: String::new(),
        };
        m.digest = json_digest(&(
            &m.command,
            &m.tool_version,
            &m.config_digest,
            &m.instance_digest,
            &m.seeds,
        ));
        m
    }

    pub fn stamp_start(&mut self, timing: bool) {
        if timing {
            self.started_unix = Some(unix_now());
        }
    }

    pub fn stamp_finish(&mut self, timing: bool) {
        if timing {
            self.finished_unix = Some(unix_now());
        }
    }

    /// First line of every CSV output.
    pub fn csv_comment(&self, extra: &str) -> String {
        if extra.is_empty() {
            format!("manifest_digest={}", self.digest)
        } else {
            format!("{extra} manifest_digest={}", self.digest)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_timestamps_and_tracks_inputs() {
        let a = RunManifest::new("solve", &("cfg", 1), Some("abc".into()), vec![7]);
        let mut b = a.clone();
        b.stamp_start(true);
        b.stamp_finish(true);
        assert_eq!(a.digest, b.digest);
        let c = RunManifest::new("solve", &("cfg", 2), Some("abc".into()), vec![7]);
        assert_ne!(a.digest, c.digest);
        let d = RunManifest::new("solve", &("cfg", 1), Some("abc".into()), vec![8]);
        assert_ne!(a.digest, d.digest);
        assert_eq!(a.digest.len(), 64);
    }

    #[test]
    fn known_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
