use std::fmt;

use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianSpec;
use crate::error::{Error, Result};
use crate::noise::NoiseModelKind;
use crate::sim::DENSITY_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    EnergyConvergence,
    AllLocalPaulis,
    ZneSweep,
    EntropyMap,
    BudgetReport,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::EnergyConvergence => "energy-convergence",
            ExperimentKind::AllLocalPaulis => "all-local-paulis",
            ExperimentKind::ZneSweep => "zne-sweep",
            ExperimentKind::EntropyMap => "entropy-map",
            ExperimentKind::BudgetReport => "budget-report",
        }
    }

    fn needs_oracle(self) -> bool {
        self != ExperimentKind::BudgetReport
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Gate noise drawn for the ansatz's two-qubit gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// `biased_pauli` (per-gate random `p`, `η`) or `depolarizing` (uniform `p`).
    #[serde(default = "default_model")]
    pub model: NoiseModelKind,
    #[serde(default)]
    pub p_mean: f64,
    #[serde(default = "default_eta_mean")]
    pub eta_mean: f64,
    #[serde(default = "default_eta_sd")]
    pub eta_sd: f64,
    /// Rescale the drawn rates so that `ξ = Σ_k p_k` equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_target: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_model() -> NoiseModelKind {
    NoiseModelKind::BiasedPauli
}
fn default_eta_mean() -> f64 {
    0.9
}
fn default_eta_sd() -> f64 {
    0.015
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            model: default_model(),
            p_mean: 0.0,
            eta_mean: default_eta_mean(),
            eta_sd: default_eta_sd(),
            xi_target: None,
            seed: 0,
        }
    }
}

/// Input of [`super::run_experiment`]. Omitted fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Stem of the output files; defaults to the experiment kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub layers: usize,
    /// Ansatz angles; a shipped fixture (or seeded random angles) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub readout_alpha: f64,
    /// Shot budgets `N_s`.
    #[serde(default = "default_schedule")]
    pub schedule: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// PEC pool size; `10 · max(schedule)` by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_size: Option<usize>,
    /// Conventional pool size; `2 · max(schedule)` by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conventional_pool_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Largest Pauli weight (all-local-paulis, budget-report) or the exact
    /// weight of the extrapolated Paulis (zne-sweep).
    #[serde(default = "default_locality")]
    pub locality: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Absolute noise rates for zne-sweep; each must be at least `noise.p_mean`.
    #[serde(default)]
    pub boost_levels: Vec<f64>,
    /// zne-sweep extrapolates Paulis whose ideal value has at least this magnitude.
    #[serde(default = "default_zne_min_ideal")]
    pub zne_min_ideal: f64,
    /// Median-of-means batch count; derived from `M` and `δ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mom_k: Option<usize>,
}

fn default_schedule() -> Vec<usize> {
    vec![100, 1000, 10_000]
}
fn default_repetitions() -> usize {
    100
}
fn default_locality() -> usize {
    2
}
fn default_delta() -> f64 {
    1e-3
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_zne_min_ideal() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, hamiltonian: HamiltonianSpec) -> Self {
        ExperimentConfig {
            experiment,
            name: None,
            hamiltonian,
            layers: 0,
            params: None,
            noise: NoiseConfig::default(),
            readout_alpha: 0.0,
            schedule: default_schedule(),
            repetitions: default_repetitions(),
            pool_size: None,
            conventional_pool_size: None,
            seed: 0,
            locality: default_locality(),
            delta: default_delta(),
            epsilon: default_epsilon(),
            boost_levels: Vec::new(),
            zne_min_ideal: default_zne_min_ideal(),
            mom_k: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn file_stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.to_string())
    }

    pub fn max_schedule(&self) -> usize {
        self.schedule.iter().copied().max().unwrap_or(0)
    }

    pub fn pec_pool(&self) -> usize {
        self.pool_size.unwrap_or(10 * self.max_schedule())
    }

    pub fn conventional_pool(&self) -> usize {
        self.conventional_pool_size.unwrap_or(2 * self.max_schedule())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.schedule.is_empty() || self.schedule.contains(&0) {
            return bad("schedule must be a non-empty list of positive shot counts".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive".into());
        }
        let n = self.hamiltonian.n_qubits;
        if self.experiment.needs_oracle() && n > DENSITY_LIMIT {
            return Err(Error::TooLarge {
                n_qubits: n,
                limit: DENSITY_LIMIT,
            });
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                return bad(format!("output name {name:?} is not a plain file stem"));
            }
        }
        if !(0.0..0.5).contains(&self.readout_alpha) {
            return bad(format!("readout α = {} outside [0, 0.5)", self.readout_alpha));
        }
        let nc = &self.noise;
        if !(0.0..0.5).contains(&nc.p_mean) {
            return bad(format!("p_mean = {} outside [0, 0.5)", nc.p_mean));
        }
        if nc.model == NoiseModelKind::Explicit {
            return bad("experiments draw biased_pauli or depolarizing noise".into());
        }
        if let Some(xi) = nc.xi_target {
            if !(xi >= 0.0 && xi.is_finite()) || (xi > 0.0 && nc.p_mean == 0.0) {
                return bad(format!("ξ target {xi} needs a positive p_mean"));
            }
        }
        if self.locality == 0 || self.locality > n {
            return bad(format!("locality {} outside 1..={n}", self.locality));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) || !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad("δ must lie in (0, 1) and ε in (0, 1]".into());
        }
        if let Some(k) = self.mom_k {
            if k == 0 || k % 2 == 0 {
                return bad(format!("mom_k = {k} must be odd"));
            }
        }
        let max = self.max_schedule();
        match self.experiment {
            ExperimentKind::EnergyConvergence if self.pec_pool() < max || self.conventional_pool() < max => {
                bad("pools must hold at least max(schedule) snapshots".into())
            }
            ExperimentKind::ZneSweep => {
                if nc.model != NoiseModelKind::Depolarizing || nc.p_mean <= 0.0 {
                    return bad("zne-sweep needs depolarizing noise with p_mean > 0".into());
                }
                let mut levels = self.boost_levels.clone();
                levels.push(nc.p_mean);
                levels.sort_by(f64::total_cmp);
                levels.dedup();
                if self.boost_levels.iter().any(|&p| !(p >= nc.p_mean && p < 0.5)) || levels.len() < 2 {
                    return bad("zne-sweep needs boost levels in [p_mean, 0.5) and at least two distinct rates".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::new(ExperimentKind::AllLocalPaulis, HamiltonianSpec::spin_ring(4, 1))
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let json = r#"{"experiment":"entropy-map","hamiltonian":{"kind":"heisenberg-chain","n_qubits":4}}"#;
        let cfg = ExperimentConfig::from_json_str(json).unwrap();
        assert_eq!(cfg.schedule, vec![100, 1000, 10_000]);
        assert_eq!(cfg.hamiltonian.coupling, 0.3);
        assert_eq!(cfg.pec_pool(), 100_000);
        let back = ExperimentConfig::from_json_str(&cfg.to_json_string()).unwrap();
        assert_eq!(back, cfg);
        assert!(ExperimentConfig::from_json_str(r#"{"experiment":"nope"}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = base();
        c.schedule.clear();
        assert!(c.validate().is_err());
        let mut c = base();
        c.hamiltonian.n_qubits = 13;
        assert!(matches!(c.validate(), Err(Error::TooLarge { .. })));
        c.experiment = ExperimentKind::BudgetReport;
        assert!(c.validate().is_ok());
        let mut c = base();
        c.experiment = ExperimentKind::ZneSweep;
        assert!(c.validate().is_err());
        c.noise.model = NoiseModelKind::Depolarizing;
        c.noise.p_mean = 1e-3;
        c.boost_levels = vec![2e-3, 5e-3];
        assert!(c.validate().is_ok());
        c.boost_levels = vec![5e-4];
        assert!(c.validate().is_err());
        let mut c = base();
        c.name = Some("../x".into());
        assert!(c.validate().is_err());
        let mut c = base();
        c.mom_k = Some(4);
        assert!(c.validate().is_err());
    }
}
