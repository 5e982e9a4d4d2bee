use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::ansatz::{build_hva_ansatz, find_fixture, hva_param_count};
use super::config::{ExperimentConfig, ExperimentKind, NoiseConfig};
use super::hamiltonian::{build_hamiltonian, Hamiltonian, GROUND_ENERGY_LIMIT};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::estimators::{
    epsilon_bound, estimate_pauli, estimate_purity, next_odd_at_least, renyi_entropy, renyi_from_estimate,
    sample_budget, shadow_norm_sq, zne_extrapolate, Estimate, MomConfig, PauliEvaluator, ZneModel, ZnePoint,
};
use crate::noise::{circuit_decomposition, GateNoise, NoiseModelKind, NoiseSpec};
use crate::pauli::{PauliAxis, PauliString};
use crate::shadow::{FactorTable, ReadoutModel, ShadowMode, ShadowSampler};
use crate::sim::{exact_density, exact_subsystem_purity, RecoveryPolicy, StateVector};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Snapshots generated per streaming chunk.
const STREAM_CHUNK: usize = 1 << 16;

/// Mixes a tag into a root seed so that sub-tasks get unrelated streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One line of an experiment CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    #[serde(rename = "N_s")]
    pub n_s: Option<usize>,
    pub estimator: String,
    pub observable: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub oracle_value: Option<f64>,
    pub abs_error: Option<f64>,
    pub bound: Option<f64>,
}

impl ResultRow {
    fn new(kind: ExperimentKind, n_s: Option<usize>, estimator: &str, observable: &str, value: f64) -> Self {
        ResultRow {
            experiment: kind.to_string(),
            n_s,
            estimator: estimator.to_string(),
            observable: observable.to_string(),
            value,
            stderr: None,
            oracle_value: None,
            abs_error: None,
            bound: None,
        }
    }

    fn stderr(mut self, s: f64) -> Self {
        self.stderr = Some(s);
        self
    }

    fn oracle(mut self, o: f64) -> Self {
        self.oracle_value = Some(o);
        self.abs_error = Some((self.value - o).abs());
        self
    }

    fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }
}

pub fn write_rows_csv<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("csv: {other:?}")),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Circuit, noise and Hamiltonian of one configured run.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub hamiltonian: Hamiltonian,
    pub params: Vec<f64>,
    pub circuit: Circuit,
    pub noise: NoiseSpec,
    pub g_norm: f64,
    pub xi: f64,
}

/// Draws the configured noise on the circuit's two-qubit gates.
pub fn draw_noise(c: &Circuit, nc: &NoiseConfig) -> Result<NoiseSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(nc.seed);
    let spec = match nc.model {
        NoiseModelKind::BiasedPauli => NoiseSpec::random_biased(c, nc.p_mean, nc.eta_mean, nc.eta_sd, true, &mut rng)?,
        NoiseModelKind::Depolarizing => NoiseSpec::uniform(c, GateNoise::depolarizing(nc.p_mean), true),
        NoiseModelKind::Explicit => {
            return Err(Error::InvalidParameter("experiments draw parametric noise only".into()))
        }
    };
    match nc.xi_target {
        Some(target) => rescale_to_xi(c, spec, target),
        None => Ok(spec),
    }
}

/// Scales all rates until the circuit error rate `ξ` equals `target`.
pub fn rescale_to_xi(c: &Circuit, mut spec: NoiseSpec, target: f64) -> Result<NoiseSpec> {
    if target == 0.0 {
        return spec.scaled(0.0);
    }
    for _ in 0..100 {
        let xi = circuit_decomposition(c, &spec)?.xi();
        if xi == 0.0 {
            return Err(Error::InvalidParameter("cannot rescale a noiseless circuit to ξ > 0".into()));
        }
        if (xi - target).abs() <= 1e-12 * target {
            return Ok(spec);
        }
        spec = spec.scaled(target / xi)?;
    }
    Err(Error::InvalidParameter(format!("could not reach ξ = {target}")))
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<ExperimentSetup> {
    cfg.validate()?;
    let hamiltonian = build_hamiltonian(&cfg.hamiltonian)?;
    let params = match &cfg.params {
        Some(p) => p.clone(),
        None => match find_fixture(&cfg.hamiltonian, cfg.layers) {
            Some(f) => f.params,
            None => {
                log::warn!("no ansatz parameters given and no shipped fixture matches; using seeded random angles");
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 7));
                let dist = Normal::new(0.0, 0.5).expect("valid normal");
                (0..hva_param_count(&cfg.hamiltonian, cfg.layers)).map(|_| dist.sample(&mut rng)).collect()
            }
        },
    };
    let circuit = build_hva_ansatz(&cfg.hamiltonian, cfg.layers, &params)?;
    let readout = if cfg.readout_alpha > 0.0 {
        ReadoutModel::symmetric(cfg.readout_alpha)?
    } else {
        ReadoutModel::none()
    };
    let noise = draw_noise(&circuit, &cfg.noise)?.with_readout(readout);
    let d = circuit_decomposition(&circuit, &noise)?;
    Ok(ExperimentSetup {
        hamiltonian,
        params,
        g_norm: d.g_norm(),
        xi: d.xi(),
        circuit,
        noise,
    })
}

/// All Pauli strings of weight `1..=max_weight`, by weight, then support, then axes.
pub fn local_paulis(n_qubits: usize, min_weight: usize, max_weight: usize) -> Vec<PauliString> {
    fn supports(n: usize, w: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == w {
            out.push(cur.clone());
            return;
        }
        for q in start..n {
            cur.push(q);
            supports(n, w, q + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for w in min_weight.max(1)..=max_weight.min(n_qubits) {
        let mut sups = Vec::new();
        supports(n_qubits, w, 0, &mut Vec::new(), &mut sups);
        for s in sups {
            for code in 0..3usize.pow(w as u32) {
                let axes = (0..w).map(|i| PauliAxis::BASES[code / 3usize.pow(i as u32) % 3]);
                out.push(PauliString::from_sparse(n_qubits, s.iter().copied().zip(axes)).expect("distinct qubits"));
            }
        }
    }
    out
}

/// Per-snapshot energy values `Σ_t c_t ‖g‖₁ s_i tr(P_t ρ̂_i)` for snapshots
/// `start..start + count`, generated chunk by chunk.
pub fn energy_values(
    sampler: &ShadowSampler,
    h: &Hamiltonian,
    start: u64,
    count: usize,
    readout_mitigation: bool,
) -> Result<Vec<f64>> {
    let header = sampler.header();
    let tables = if readout_mitigation {
        FactorTable::new(header.n_qubits, &header.readout, header.basis_probs)?
    } else {
        FactorTable::unmitigated(header.n_qubits, header.basis_probs)?
    };
    let mut constant = 0.0;
    let mut evals = Vec::new();
    for (c, p) in &h.terms {
        let e = PauliEvaluator::new(p, &tables)?;
        if e.is_identity() {
            constant += c * p.phase().sign().unwrap_or(0.0);
        } else {
            evals.push((*c, e));
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut done = 0;
    while done < count {
        let m = STREAM_CHUNK.min(count - done);
        let set = sampler.sample_range(start + done as u64, m);
        let g = set.g_norm();
        for i in 0..set.len() {
            let v: f64 = evals.iter().map(|(c, e)| c * e.raw(&set, i)).sum();
            out.push(constant + g * set.sign(i) as f64 * v);
        }
        done += m;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResampleStats {
    pub mean_abs_error: f64,
    /// Standard error of `mean_abs_error` across repetitions.
    pub stderr: f64,
    pub rms_error: f64,
}

/// Draws `reps` subsets of `n_s` distinct pool entries and summarises
/// `|mean(subset) − target|`.
pub fn resample_errors(pool: &[f64], n_s: usize, reps: usize, target: f64, seed: u64) -> Result<ResampleStats> {
    if n_s == 0 || n_s > pool.len() {
        return Err(Error::NotEnoughSnapshots {
            needed: n_s.max(1),
            have: pool.len(),
        });
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let errors: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let idx = rand::seq::index::sample(&mut rng, pool.len(), n_s);
            let mean = idx.iter().map(|i| pool[i]).sum::<f64>() / n_s as f64;
            (mean - target).abs()
        })
        .collect();
    let n = reps as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = if reps > 1 {
        errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(ResampleStats {
        mean_abs_error: mean,
        stderr: (var / n).sqrt(),
        rms_error: (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n_s: usize,
    pub pec: ResampleStats,
    pub conventional: ResampleStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyConvergence {
    pub ideal_energy: f64,
    pub noisy_energy: f64,
    pub ground_energy: Option<f64>,
    pub pec_pool_mean: f64,
    pub conventional_pool_mean: f64,
    pub points: Vec<ConvergencePoint>,
}

impl EnergyConvergence {
    /// `|tr(Hρ) − tr(Hρ_id)|`, the level conventional shadows converge to.
    pub fn bias(&self) -> f64 {
        (self.noisy_energy - self.ideal_energy).abs()
    }

    /// Least-squares slope of `log(error)` against `log(N_s)` for `N_s ≥ from`.
    pub fn pec_loglog_slope(&self, from: usize) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.n_s >= from)
            .map(|p| ((p.n_s as f64).ln(), p.pec.mean_abs_error.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(Error::DegenerateFit("need two schedule points for a slope".into()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }
}

/// Energy error against shot budget for PEC and conventional shadows, both
/// readout-mitigated, by resampling from two snapshot pools.
pub fn energy_convergence(
    setup: &ExperimentSetup,
    schedule: &[usize],
    reps: usize,
    pec_pool: usize,
    conventional_pool: usize,
    seed: u64,
) -> Result<EnergyConvergence> {
    let h = &setup.hamiltonian;
    let ideal_energy = h.expectation(&StateVector::from_circuit(&setup.circuit)?)?;
    let rho = exact_density(&setup.circuit, &setup.noise, RecoveryPolicy::None)?;
    let noisy_energy = h.expectation_density(&rho)?;
    let ground_energy = if h.n_qubits <= GROUND_ENERGY_LIMIT {
        Some(h.ground_energy()?)
    } else {
        None
    };

    let pec = ShadowSampler::pec(&setup.circuit, &setup.noise, derive_seed(seed, 1))?;
    let pec_values = energy_values(&pec, h, 0, pec_pool, true)?;
    drop(pec);
    let conv = ShadowSampler::conventional(&setup.circuit, &setup.noise, derive_seed(seed, 2))?;
    let conv_values = energy_values(&conv, h, 0, conventional_pool, true)?;

    let mut points = Vec::with_capacity(schedule.len());
    for (j, &n_s) in schedule.iter().enumerate() {
        points.push(ConvergencePoint {
            n_s,
            pec: resample_errors(&pec_values, n_s, reps, ideal_energy, derive_seed(seed, 100 + 2 * j as u64))?,
            conventional: resample_errors(
                &conv_values,
                n_s,
                reps,
                ideal_energy,
                derive_seed(seed, 101 + 2 * j as u64),
            )?,
        });
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(EnergyConvergence {
        ideal_energy,
        noisy_energy,
        ground_energy,
        pec_pool_mean: mean(&pec_values),
        conventional_pool_mean: mean(&conv_values),
        points,
    })
}

/// Largest odd integer `≤ n`.
fn odd_at_most(n: usize) -> usize {
    if n % 2 == 0 {
        n.saturating_sub(1).max(1)
    } else {
        n
    }
}

/// Estimates of every Pauli of weight `≤ locality` at each shot budget, with
/// the accuracy bound of the sample-budget inversion.
pub fn all_local_paulis(
    setup: &ExperimentSetup,
    locality: usize,
    schedule: &[usize],
    delta: f64,
    mom_k: Option<usize>,
    seed: u64,
) -> Result<Vec<ResultRow>> {
    let kind = ExperimentKind::AllLocalPaulis;
    let n = setup.circuit.n_qubits();
    let paulis = local_paulis(n, 1, locality);
    let m = paulis.len() as u64;
    let ideal_state = StateVector::from_circuit(&setup.circuit)?;
    let ideal: Vec<f64> = paulis.iter().map(|p| ideal_state.expectation(p)).collect::<Result<_>>()?;
    let alpha = setup.noise.readout.alpha_plus(0);
    let norm_sq = shadow_norm_sq(locality, alpha)?;
    let k_default = next_odd_at_least(8.0 * (m as f64 / delta).ln()) as usize;
    let max = schedule.iter().copied().max().unwrap_or(0);

    let mut rows = Vec::new();
    let arms = [
        ("pec", ShadowMode::Pec, setup.g_norm, 1u64),
        ("conventional", ShadowMode::Conventional, 1.0, 2),
    ];
    for (label, mode, g, tag) in arms {
        let sampler = match mode {
            ShadowMode::Pec => ShadowSampler::pec(&setup.circuit, &setup.noise, derive_seed(seed, tag))?,
            _ => ShadowSampler::conventional(&setup.circuit, &setup.noise, derive_seed(seed, tag))?,
        };
        let pool = sampler.sample_set(max);
        for &n_s in schedule {
            let k = odd_at_most(mom_k.unwrap_or(k_default).min(n_s));
            let cfg = MomConfig::new(k)?;
            let set = pool.select(&(0..n_s).collect::<Vec<_>>());
            let bound = epsilon_bound(n_s as u64, delta, m, g, norm_sq)?;
            let estimates: Vec<Estimate> = paulis
                .par_iter()
                .map(|p| estimate_pauli(&set, p, &cfg))
                .collect::<Result<_>>()?;
            for ((p, e), o) in paulis.iter().zip(&estimates).zip(&ideal) {
                rows.push(
                    ResultRow::new(kind, Some(n_s), label, &p.sparse_label(), e.value)
                        .stderr(e.stderr)
                        .oracle(*o)
                        .bound(bound),
                );
            }
        }
    }
    Ok(rows)
}

/// One seeded extrapolation trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZneTrial {
    /// Noise rates, native first.
    pub levels: Vec<f64>,
    /// `noisy[level][observable]`.
    pub noisy: Vec<Vec<Estimate>>,
    pub extrapolated: Vec<Estimate>,
}

impl ZneTrial {
    pub fn mean_abs_error_native(&self, ideal: &[f64]) -> f64 {
        mean_abs(&self.noisy[0], ideal)
    }

    pub fn mean_abs_error_extrapolated(&self, ideal: &[f64]) -> f64 {
        mean_abs(&self.extrapolated, ideal)
    }
}

fn mean_abs(e: &[Estimate], ideal: &[f64]) -> f64 {
    e.iter().zip(ideal).map(|(e, o)| (e.value - o).abs()).sum::<f64>() / e.len().max(1) as f64
}

/// Noisy estimates at the native rate of `noise` and at each boosted rate,
/// linearly extrapolated to zero noise.
pub fn zne_trial(
    circuit: &Circuit,
    noise: &NoiseSpec,
    boost_levels: &[f64],
    n_s: usize,
    observables: &[PauliString],
    seed: u64,
) -> Result<ZneTrial> {
    let native = noise.native_rate()?;
    let mut levels = vec![native];
    for &p in boost_levels {
        if !levels.iter().any(|&l| (l - p).abs() <= 1e-15) {
            levels.push(p);
        }
    }
    let cfg = MomConfig::default();
    let mut noisy = Vec::with_capacity(levels.len());
    for (j, &p) in levels.iter().enumerate() {
        let s = derive_seed(seed, j as u64);
        let sampler = if j == 0 {
            ShadowSampler::conventional(circuit, noise, s)?
        } else {
            ShadowSampler::boosted(circuit, noise, p, s)?
        };
        let set = sampler.sample_set(n_s);
        noisy.push(
            observables
                .par_iter()
                .map(|o| estimate_pauli(&set, o, &cfg))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let extrapolated = (0..observables.len())
        .map(|i| {
            let pts: Vec<ZnePoint> = levels
                .iter()
                .zip(&noisy)
                .map(|(&p, est)| ZnePoint {
                    p,
                    value: est[i].value,
                    stderr: est[i].stderr,
                })
                .collect();
            zne_extrapolate(&pts, ZneModel::Linear).map(|r| r.estimate)
        })
        .collect::<Result<_>>()?;
    Ok(ZneTrial {
        levels,
        noisy,
        extrapolated,
    })
}

/// Purity estimates with and without PEC for every one- and two-qubit subsystem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityEntry {
    pub subsystem: Vec<usize>,
    pub oracle: f64,
    pub pec: Estimate,
    pub conventional: Estimate,
}

pub fn entropy_map(setup: &ExperimentSetup, n_s: usize, mom_k: Option<usize>, seed: u64) -> Result<Vec<PurityEntry>> {
    let n = setup.circuit.n_qubits();
    let rho = exact_density(&setup.circuit, &NoiseSpec::noiseless(), RecoveryPolicy::None)?;
    let mut subsystems: Vec<Vec<usize>> = (0..n).map(|q| vec![q]).collect();
    for a in 0..n {
        for b in a + 1..n {
            subsystems.push(vec![a, b]);
        }
    }
    let cfg = MomConfig::new(odd_at_most(mom_k.unwrap_or(1).min(n_s)))?;
    let pec = ShadowSampler::pec(&setup.circuit, &setup.noise, derive_seed(seed, 1))?.sample_set(n_s);
    let conv = ShadowSampler::conventional(&setup.circuit, &setup.noise, derive_seed(seed, 2))?.sample_set(n_s);
    subsystems
        .into_iter()
        .map(|q| {
            Ok(PurityEntry {
                oracle: exact_subsystem_purity(&rho, &q)?,
                pec: estimate_purity(&pec, &q, &cfg)?,
                conventional: estimate_purity(&conv, &q, &cfg)?,
                subsystem: q,
            })
        })
        .collect()
}

fn subsystem_label(q: &[usize]) -> String {
    q.iter().map(|q| q.to_string()).collect::<Vec<_>>().join("-")
}

/// Output files and rows of one run.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: serde_json::Value,
}

/// Runs the configured pipeline and returns its CSV rows and a manifest of
/// every seed and parameter used (without a timestamp).
pub fn run_rows(cfg: &ExperimentConfig) -> Result<(Vec<ResultRow>, serde_json::Value)> {
    let setup = prepare(cfg)?;
    let kind = cfg.experiment;
    let mut rows = Vec::new();
    let mut summary = serde_json::Map::new();
    match kind {
        ExperimentKind::EnergyConvergence => {
            let r = energy_convergence(
                &setup,
                &cfg.schedule,
                cfg.repetitions,
                cfg.pec_pool(),
                cfg.conventional_pool(),
                cfg.seed,
            )?;
            rows.push(ResultRow::new(kind, None, "oracle", "H", r.ideal_energy));
            rows.push(ResultRow::new(kind, None, "oracle-noisy", "H", r.noisy_energy).oracle(r.ideal_energy));
            if let Some(e0) = r.ground_energy {
                rows.push(ResultRow::new(kind, None, "ground", "H", e0));
            }
            for p in &r.points {
                for (label, s) in [("pec", &p.pec), ("conventional", &p.conventional)] {
                    rows.push(
                        ResultRow::new(kind, Some(p.n_s), label, "mean_abs_error(H)", s.mean_abs_error)
                            .stderr(s.stderr),
                    );
                }
            }
            summary.insert("bias".into(), json!(r.bias()));
            summary.insert("ideal_energy".into(), json!(r.ideal_energy));
            summary.insert("noisy_energy".into(), json!(r.noisy_energy));
        }
        ExperimentKind::AllLocalPaulis => {
            rows = all_local_paulis(&setup, cfg.locality, &cfg.schedule, cfg.delta, cfg.mom_k, cfg.seed)?;
        }
        ExperimentKind::ZneSweep => {
            let n_s = cfg.max_schedule();
            let n = setup.circuit.n_qubits();
            let ideal_state = StateVector::from_circuit(&setup.circuit)?;
            let mut observables = Vec::new();
            let mut ideal = Vec::new();
            for p in local_paulis(n, cfg.locality, cfg.locality) {
                let v = ideal_state.expectation(&p)?;
                if v.abs() >= cfg.zne_min_ideal {
                    observables.push(p);
                    ideal.push(v);
                }
            }
            if observables.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "no weight-{} Pauli has |ideal value| ≥ {}",
                    cfg.locality, cfg.zne_min_ideal
                )));
            }
            let trials: Vec<ZneTrial> = (0..cfg.repetitions)
                .map(|r| {
                    zne_trial(
                        &setup.circuit,
                        &setup.noise,
                        &cfg.boost_levels,
                        n_s,
                        &observables,
                        derive_seed(cfg.seed, 1000 + r as u64),
                    )
                })
                .collect::<Result<_>>()?;
            let first = &trials[0];
            for (i, (o, v)) in observables.iter().zip(&ideal).enumerate() {
                let label = o.sparse_label();
                for (j, &p) in first.levels.iter().enumerate() {
                    let est = if j == 0 {
                        "conventional".to_string()
                    } else {
                        ShadowMode::Boosted(p).to_string()
                    };
                    let e = &first.noisy[j][i];
                    rows.push(ResultRow::new(kind, Some(n_s), &est, &label, e.value).stderr(e.stderr).oracle(*v));
                }
                let e = &first.extrapolated[i];
                rows.push(ResultRow::new(kind, Some(n_s), "zne-linear", &label, e.value).stderr(e.stderr).oracle(*v));
            }
            let improved = trials
                .iter()
                .filter(|t| t.mean_abs_error_extrapolated(&ideal) < t.mean_abs_error_native(&ideal))
                .count() as f64
                / trials.len() as f64;
            rows.push(ResultRow::new(kind, Some(n_s), "zne-linear", "improved_fraction", improved));
            summary.insert("improved_fraction".into(), json!(improved));
            summary.insert("observables".into(), json!(observables.len()));
        }
        ExperimentKind::EntropyMap => {
            let n_s = cfg.max_schedule();
            let entries = entropy_map(&setup, n_s, cfg.mom_k, cfg.seed)?;
            let (mut max_pec, mut max_conv) = (0.0f64, 0.0f64);
            for e in &entries {
                let label = subsystem_label(&e.subsystem);
                let size = e.subsystem.len();
                for (est, x) in [("pec", &e.pec), ("conventional", &e.conventional)] {
                    rows.push(ResultRow::new(kind, Some(n_s), est, &format!("purity:{label}"), x.value).stderr(x.stderr).oracle(e.oracle));
                    rows.push(
                        ResultRow::new(kind, Some(n_s), est, &format!("renyi2:{label}"), renyi_from_estimate(x.value, size))
                            .oracle(renyi_entropy(e.oracle)),
                    );
                }
                max_pec = max_pec.max((e.pec.value - e.oracle).abs());
                max_conv = max_conv.max((e.conventional.value - e.oracle).abs());
            }
            summary.insert("max_abs_error_pec".into(), json!(max_pec));
            summary.insert("max_abs_error_conventional".into(), json!(max_conv));
        }
        ExperimentKind::BudgetReport => {
            let n = setup.circuit.n_qubits();
            let m = local_paulis(n, cfg.locality, cfg.locality).len() as u64;
            let norm_sq = shadow_norm_sq(cfg.locality, cfg.readout_alpha)?;
            for (label, g) in [("pec", setup.g_norm), ("conventional", 1.0)] {
                let b = sample_budget(cfg.epsilon, cfg.delta, m, g, norm_sq)?;
                for (name, v) in [
                    ("M", m as f64),
                    ("g_norm", g),
                    ("shadow_norm_sq", norm_sq),
                    ("K", b.k as f64),
                    ("N_batch", b.n_batch as f64),
                    ("N", b.n as f64),
                    ("headline_N", b.headline_n),
                ] {
                    rows.push(ResultRow::new(kind, None, label, name, v));
                }
                for &n_s in &cfg.schedule {
                    let eps = epsilon_bound(n_s as u64, cfg.delta, m, g, norm_sq)?;
                    rows.push(ResultRow::new(kind, Some(n_s), label, "epsilon", eps).bound(eps));
                }
            }
        }
    }
    let manifest = json!({
        "version": VERSION,
        "experiment": kind.as_str(),
        "config": cfg,
        "seeds": {
            "run": cfg.seed,
            "noise": cfg.noise.seed,
            "hamiltonian": cfg.hamiltonian.seed,
        },
        "noise_spec": setup.noise,
        "params": setup.params,
        "n_gates": setup.circuit.len(),
        "g_norm": setup.g_norm,
        "xi": setup.xi,
        "rows": rows.len(),
        "summary": summary,
    });
    Ok((rows, manifest))
}

/// Runs the experiment and writes `<stem>.csv` and `<stem>.manifest.json` into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput> {
    let (rows, mut manifest) = run_rows(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let stem = cfg.file_stem();
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let manifest_path = out_dir.join(format!("{stem}.manifest.json"));
    write_rows_csv(std::io::BufWriter::new(std::fs::File::create(&csv_path)?), &rows)?;
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    manifest["created_unix"] = json!(created);
    manifest["csv"] = json!(csv_path.file_name().and_then(|s| s.to_str()));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(ExperimentOutput {
        rows,
        csv_path,
        manifest_path,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::HamiltonianSpec;

    #[test]
    fn local_pauli_counts() {
        assert_eq!(local_paulis(6, 1, 2).len(), 18 + 135);
        assert_eq!(local_paulis(3, 3, 3).len(), 27);
        assert_eq!(local_paulis(12, 3, 3).len(), 5940);
        let ps = local_paulis(4, 1, 3);
        let mut labels: Vec<String> = ps.iter().map(|p| p.sparse_label()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), ps.len());
    }

    #[test]
    fn xi_rescaling_hits_target() {
        let spec = HamiltonianSpec::spin_ring(4, 3);
        let c = build_hva_ansatz(&spec, 2, &vec![0.2; hva_param_count(&spec, 2)]).unwrap();
        let nc = NoiseConfig {
            p_mean: 0.01,
            xi_target: Some(0.2),
            ..Default::default()
        };
        let noise = draw_noise(&c, &nc).unwrap();
        let xi = circuit_decomposition(&c, &noise).unwrap().xi();
        assert!((xi - 0.2).abs() < 1e-10);
    }

    #[test]
    fn resampling_without_replacement_is_exact_at_full_size() {
        let pool: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let s = resample_errors(&pool, 100, 5, 49.5, 1).unwrap();
        assert!(s.mean_abs_error < 1e-12);
        assert!(resample_errors(&pool, 101, 5, 0.0, 1).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(0, 1), derive_seed(0, 2));
        assert_ne!(derive_seed(1, 1), derive_seed(0, 1));
    }

    #[test]
    fn rows_carry_consistent_errors() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::AllLocalPaulis, HamiltonianSpec::spin_ring(3, 2));
        cfg.layers = 1;
        cfg.noise.p_mean = 0.01;
        cfg.schedule = vec![300];
        cfg.locality = 1;
        let (rows, manifest) = run_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 9);
        for r in &rows {
            let o = r.oracle_value.unwrap();
            assert!((r.abs_error.unwrap() - (r.value - o).abs()).abs() < 1e-12);
        }
        assert_eq!(manifest["seeds"]["run"], 0);
    }
}
