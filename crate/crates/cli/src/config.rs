//! Config-file options. Every field is optional; command-line flags take precedence.

use std::path::Path;

use lfne::pgs::{Icrf, InitStrategy};
use lfne::ridehail::batch::Algo;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub algo: Option<AlgoList>,
    pub tau0: Option<f64>,
    pub omega: Option<f64>,
    pub icrf: Option<Icrf>,
    /// Stopping threshold on the cost-to-move.
    pub tol: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<InitStrategy>,
    pub big_m: Option<f64>,
    pub max_big_m: Option<f64>,
    pub gap_tol: Option<f64>,
    pub node_limit: Option<usize>,
    pub confirm: Option<bool>,
    pub confirm_tol: Option<f64>,
    pub alpha: Option<f64>,
    pub inner_iters: Option<usize>,
    pub outer_iters: Option<usize>,
    pub verify_tol: Option<f64>,
    pub kkt_tol: Option<f64>,
    pub certify: Option<bool>,
    pub jobs: Option<usize>,
    pub instances: Option<usize>,
    pub leaders: Option<usize>,
    pub followers: Option<usize>,
    pub areas: Option<usize>,
}

/// `"pgs"` or `["pgs", "eg"]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgoList {
    One(Algo),
    Many(Vec<Algo>),
}

impl AlgoList {
    pub fn into_vec(self) -> Vec<Algo> {
        match self {
            AlgoList::One(a) => vec![a],
            AlgoList::Many(v) => v,
        }
    }
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("malformed config {}: {e}", path.display())))
    }
}

/// Command line first, then the config file, then the built-in default.
pub fn pick<T>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None::<i32>, None, 3), 3);
    }

    #[test]
    fn parses_flat_keys_and_rejects_unknown() {
        let c: ConfigFile = serde_json::from_str(r#"{"tau0": 0.5, "icrf": "euclidean-approx", "algo": ["pgs", "eg"]}"#).unwrap();
        assert_eq!(c.tau0, Some(0.5));
        assert_eq!(c.icrf, Some(Icrf::EuclideanApprox));
        assert_eq!(c.algo.unwrap().into_vec(), vec![Algo::Pgs, Algo::Eg]);
        assert!(serde_json::from_str::<ConfigFile>(r#"{"tau": 1}"#).is_err());
        let one: ConfigFile = serde_json::from_str(r#"{"algo": "eg"}"#).unwrap();
        assert_eq!(one.algo.unwrap().into_vec(), vec![Algo::Eg]);
    }
}
