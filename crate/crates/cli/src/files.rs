//! On-disk formats: instance JSON, solution JSON, parameter JSON.
//!
//! JSON outputs are objects with an extra top-level `manifest` key; readers ignore it.

use std::fs;
use std::path::Path;

use lfne::model::{validate_game, HierarchicalGame, LeaderBlock, PopulationState};
use lfne::pgs::{BigMStats, RunStatus};
use lfne::reformulate::VarMap;
use lfne::ridehail::batch::Algo;
use lfne::ridehail::{PlatformMetrics, RidehailParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::manifest::{json_digest, RunManifest};
use crate::CliError;

pub const SOLUTION_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    pub version: u32,
    pub instance_id: String,
    /// Digest of the instance this state belongs to; checked by `verify` when present.
    #[serde(default)]
    pub instance_digest: Option<String>,
    pub algo: Algo,
    pub status: RunStatus,
    pub sweeps: usize,
    pub final_potential: Option<f64>,
    pub final_cost_to_move: Option<f64>,
    pub leader_costs: Vec<f64>,
    #[serde(default)]
    pub big_m: Option<BigMStats>,
    #[serde(default)]
    pub metrics: Option<Vec<PlatformMetrics>>,
    pub state: PopulationState,
}

/// Instance file as written by `generate`: the game plus, for generated ride-hail games,
/// the parameters it came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    pub instance_id: String,
    pub params: RidehailParams,
}

pub fn game_digest(g: &HierarchicalGame) -> String {
    json_digest(g)
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("malformed {what} {}: {e}", path.display())))
}

/// Pretty JSON with the manifest attached under `manifest`, newline-terminated.
pub fn write_json<T: Serialize>(path: &Path, value: &T, manifest: &RunManifest) -> Result<(), CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::internal(format!("serialization: {e}")))?;
    if let serde_json::Value::Object(map) = &mut v {
        map.insert(
            "manifest".into(),
            serde_json::to_value(manifest).map_err(|e| CliError::internal(e.to_string()))?,
        );
    }
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::internal(e.to_string()))?;
    text.push('\n');
    create_parent(path)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn create_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(())
}

/// Read and validate a game.
pub fn read_game(path: &Path) -> Result<HierarchicalGame, CliError> {
    let g: HierarchicalGame = read_json(path, "instance")?;
    let rep = validate_game(&g);
    if !rep.is_valid() {
        return Err(CliError::invalid(format!(
            "instance {} failed validation:\n  {}",
            path.display(),
            rep.issues.join("\n  ")
        )));
    }
    Ok(g)
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, CliError> {
    read_json(path, "solution")
}

pub fn read_params(path: &Path) -> Result<ParamsFile, CliError> {
    read_json(path, "parameter file")
}

/// Check that every block has the shape the game's encoding expects.
pub fn check_state_shape(g: &HierarchicalGame, z: &[LeaderBlock]) -> Result<(), CliError> {
    if z.len() != g.num_leaders() {
        return Err(CliError::invalid(format!(
            "solution has {} leader blocks but the instance has {} leaders",
            z.len(),
            g.num_leaders()
        )));
    }
    for (i, (b, l)) in z.iter().zip(&g.leaders).enumerate() {
        let shape_ok = b.x.len() == l.n
            && b.y.len() == l.num_followers()
            && b.y.iter().zip(&l.followers).all(|(y, f)| y.len() == f.dim)
            && b.flatten().len() == VarMap::new(l, g.mode).len;
        if !shape_ok {
            return Err(CliError::invalid(format!(
                "solution block for leader {} does not match the instance's dimensions",
                i + 1
            )));
        }
    }
    Ok(())
}
