//! Run configuration: a JSON file mirroring every tunable, overridden by
//! command-line flags (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cbp_core::branching::{Contamination, ControlLaw};
use cbp_core::disparity::DisparityKind;
use cbp_core::dposterior::Prior1D;
use cbp_core::{Error, Result};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // model
    pub family: Option<String>,
    pub theta: Option<f64>,
    pub control: Option<ControlLaw>,
    pub z0: Option<u64>,
    pub generations: Option<u64>,
    pub contamination: Option<Contamination>,

    // estimation
    pub kinds: Option<Vec<String>>,
    pub grid: Option<usize>,
    pub draws: Option<usize>,
    pub prior: Option<Prior1D>,
    pub dirichlet: Option<[f64; 3]>,
    pub hpd_level: Option<f64>,

    // data source
    pub fixture: Option<String>,
    pub dataset: Option<PathBuf>,

    // robustness scans
    pub theta0: Option<f64>,
    pub alpha: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub l_list: Option<Vec<u64>>,
    pub l_max: Option<u64>,
    pub delta: Option<u64>,
    pub estimators: Option<Vec<String>>,

    // sensitivity sweeps
    pub beta_priors: Option<Vec<(f64, f64)>>,
    pub dirichlet_priors: Option<Vec<[f64; 3]>>,

    // replication harness
    pub replicates: Option<usize>,
    pub checkpoints: Option<Vec<u64>>,

    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Domain(format!("invalid config {}: {e}", path.display())))
    }

    pub fn kinds(&self) -> Result<Vec<DisparityKind>> {
        match &self.kinds {
            None => Ok(vec![DisparityKind::Hd, DisparityKind::Ned, DisparityKind::Kl]),
            Some(list) => list.iter().map(|s| DisparityKind::parse(s)).collect(),
        }
    }

    pub fn prior(&self) -> Prior1D {
        self.prior
            .clone()
            .unwrap_or(Prior1D::Beta { rho: 0.5, beta: 0.5 })
    }

    pub fn dirichlet(&self) -> [f64; 3] {
        self.dirichlet.unwrap_or([0.5, 0.5, 0.5])
    }

    pub fn grid(&self) -> usize {
        self.grid.unwrap_or(cbp_core::dposterior::DEFAULT_GRID)
    }

    pub fn draws(&self) -> usize {
        self.draws.unwrap_or(cbp_core::multitype::DEFAULT_DRAWS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }
}
