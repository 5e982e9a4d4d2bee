use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::set::{pack_log, ShadowHeader, ShadowMode, ShadowSet, Snapshot};
use super::ReadoutModel;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::noise::{circuit_decomposition, insertion_channel, NoiseSpec, QuasiDecomposition};
use crate::sim::kernels::{self, PauliMasks, C64};
use crate::sim::{gate_pauli_masks, StateVector};

/// Prefix states are cached when `ν · 2^n` stays below this many amplitudes.
const PREFIX_CACHE_AMPLITUDES: usize = 1 << 22;
/// Outcome distributions of the ideal state are cached per basis setting up to this size.
const CDF_CACHE_QUBITS: usize = 8;
const CHUNK: usize = 8192;

/// Discrete distribution over small indices, most likely first.
#[derive(Debug, Clone)]
struct Table {
    cum: Vec<f64>,
    idx: Vec<u8>,
}

impl Table {
    fn new(weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        let mut entries: Vec<(f64, u8)> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (w / total, i as u8))
            .collect();
        entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut acc = 0.0;
        let mut cum = Vec::with_capacity(entries.len());
        for (w, _) in &entries {
            acc += w;
            cum.push(acc);
        }
        if let Some(last) = cum.last_mut() {
            *last = f64::INFINITY;
        }
        Table {
            cum,
            idx: entries.into_iter().map(|(_, i)| i).collect(),
        }
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        if self.idx.len() == 1 {
            return self.idx[0];
        }
        let u: f64 = rng.random();
        let pos = self.cum.iter().position(|&c| u < c).unwrap_or(self.cum.len() - 1);
        self.idx[pos]
    }
}

#[derive(Debug, Clone)]
struct GatePlan {
    noise: Option<Table>,
    /// PEC recovery or boost insertion.
    extra: Option<Table>,
    extra_signs: Vec<i8>,
    masks: Vec<PauliMasks>,
}

/// Options for [`ShadowSampler::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerOptions {
    pub mode: ShadowMode,
    /// Record per-gate recovery choices (PEC only).
    pub gate_log: bool,
    /// Locally biased basis probabilities `[p_x, p_y, p_z]`.
    pub basis_probs: Option<[f64; 3]>,
    pub seed: u64,
}

impl SamplerOptions {
    pub fn new(mode: ShadowMode, seed: u64) -> Self {
        SamplerOptions {
            mode,
            gate_log: mode == ShadowMode::Pec,
            basis_probs: None,
            seed,
        }
    }
}

/// Reusable buffers for one worker.
#[derive(Debug, Default)]
struct Scratch {
    state: Vec<C64>,
    masks: Vec<PauliMasks>,
    bases: Vec<u8>,
    bits: Vec<u8>,
    glog: Vec<u8>,
    sign: i8,
}

/// Draws shadow snapshots of a noisy circuit.
///
/// Snapshot `i` uses the ChaCha8 stream `i` of the root seed, so any index
/// range can be regenerated independently and in parallel.
pub struct ShadowSampler {
    circuit: Circuit,
    plans: Vec<GatePlan>,
    readout: ReadoutModel,
    header: ShadowHeader,
    basis_cum: Option<[f64; 3]>,
    ideal: Vec<C64>,
    prefix: Option<Vec<Vec<C64>>>,
    final_cdf: Option<Vec<OnceLock<Box<[f64]>>>>,
}

impl ShadowSampler {
    pub fn new(c: &Circuit, noise: &NoiseSpec, opts: SamplerOptions) -> Result<Self> {
        c.validate()?;
        let decomp = match opts.mode {
            ShadowMode::Pec => Some(circuit_decomposition(c, noise)?),
            _ => None,
        };
        Self::build(c, noise, decomp, opts)
    }

    /// PEC sampler from an existing decomposition of `c` under `noise`.
    pub fn with_decomposition(
        c: &Circuit,
        noise: &NoiseSpec,
        decomp: &QuasiDecomposition,
        opts: SamplerOptions,
    ) -> Result<Self> {
        if decomp.len() != c.len() {
            return Err(Error::InvalidParameter(format!(
                "decomposition has {} gates, circuit has {}",
                decomp.len(),
                c.len()
            )));
        }
        Self::build(c, noise, Some(decomp.clone()), SamplerOptions { mode: ShadowMode::Pec, ..opts })
    }

    fn build(
        c: &Circuit,
        noise: &NoiseSpec,
        decomp: Option<QuasiDecomposition>,
        opts: SamplerOptions,
    ) -> Result<Self> {
        let channels = noise.resolve(c)?;
        let n = c.n_qubits();
        let mut header = ShadowHeader::new(n, opts.mode);
        header.readout = noise.readout.clone();
        header.basis_probs = opts.basis_probs;
        header.seed = opts.seed;

        let extras: Vec<Option<(Vec<f64>, Vec<i8>)>> = match opts.mode {
            ShadowMode::Pec => {
                let d = decomp.expect("PEC mode has a decomposition");
                header.gate_norms = d.gate_norms();
                header.g_norm = d.g_norm();
                header.gate_log = opts.gate_log;
                d.inverses()
                    .iter()
                    .map(|q| {
                        q.as_ref().map(|q| {
                            let signs = (0..q.gamma().len()).map(|k| q.sign(k)).collect();
                            (q.sampling_probs(), signs)
                        })
                    })
                    .collect()
            }
            ShadowMode::Conventional => vec![None; c.len()],
            ShadowMode::Boosted(p) => {
                let boosted = noise.boosted(p)?.resolve(c)?;
                channels
                    .iter()
                    .zip(&boosted)
                    .map(|(nat, b)| match (nat, b) {
                        (Some(nat), Some(b)) => insertion_channel(nat, b)
                            .map(|ins| Some((ins.probs().to_vec(), vec![1; ins.probs().len()]))),
                        (None, None) => Ok(None),
                        _ => Err(Error::InvalidNoise("boosted spec changes noisy gate set".into())),
                    })
                    .collect::<Result<_>>()?
            }
        };
        header.validate()?;

        let plans = c
            .gates()
            .iter()
            .zip(&channels)
            .zip(extras)
            .map(|((g, ch), extra)| {
                let count = 1usize << (2 * g.targets.len());
                let (extra, extra_signs) = match extra {
                    Some((w, s)) => (Some(Table::new(&w)), s),
                    None => (None, Vec::new()),
                };
                GatePlan {
                    noise: ch.as_ref().map(|ch| Table::new(ch.probs())),
                    extra,
                    extra_signs,
                    masks: (0..count).map(|k| gate_pauli_masks(g, k)).collect(),
                }
            })
            .collect();

        let basis_cum = opts.basis_probs.map(|p| [p[0], p[0] + p[1], f64::INFINITY]);
        let ideal_state = StateVector::from_circuit(c)?;
        let prefix = (c.len().max(1) << n <= PREFIX_CACHE_AMPLITUDES).then(|| {
            let mut s = StateVector::zero(n).expect("size checked");
            c.gates()
                .iter()
                .map(|g| {
                    kernels::apply_gate(s.amplitudes_mut(), &g.kind, &g.targets, false);
                    s.amplitudes().to_vec()
                })
                .collect()
        });
        let final_cdf =
            (n <= CDF_CACHE_QUBITS).then(|| (0..3usize.pow(n as u32)).map(|_| OnceLock::new()).collect());
        Ok(ShadowSampler {
            circuit: c.clone(),
            plans,
            readout: noise.readout.clone(),
            header,
            basis_cum,
            ideal: ideal_state.amplitudes().to_vec(),
            prefix,
            final_cdf,
        })
    }

    pub fn pec(c: &Circuit, noise: &NoiseSpec, seed: u64) -> Result<Self> {
        Self::new(c, noise, SamplerOptions::new(ShadowMode::Pec, seed))
    }

    pub fn conventional(c: &Circuit, noise: &NoiseSpec, seed: u64) -> Result<Self> {
        Self::new(c, noise, SamplerOptions::new(ShadowMode::Conventional, seed))
    }

    pub fn boosted(c: &Circuit, noise: &NoiseSpec, p: f64, seed: u64) -> Result<Self> {
        Self::new(c, noise, SamplerOptions::new(ShadowMode::Boosted(p), seed))
    }

    /// Header of the sets this sampler produces (with `n_snapshots = 0`).
    pub fn header(&self) -> &ShadowHeader {
        &self.header
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn rng_for(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.header.seed);
        rng.set_stream(index);
        rng
    }

    /// Snapshot number `index` of this sampler's seed.
    pub fn sample(&self, index: u64) -> Snapshot {
        self.sample_with_rng(&mut self.rng_for(index))
    }

    pub fn sample_with_rng<R: Rng + ?Sized>(&self, rng: &mut R) -> Snapshot {
        let mut scratch = Scratch::default();
        self.sample_raw(rng, &mut scratch);
        let mut set = ShadowSet::new(self.header.clone());
        set.push_raw(&scratch.bases, &scratch.bits, scratch.sign, &scratch.glog);
        set.snapshot(0)
    }

    /// Snapshots `start..start + count`, generated in parallel.
    pub fn sample_range(&self, start: u64, count: usize) -> ShadowSet {
        let n_chunks = count.div_ceil(CHUNK);
        let parts: Vec<ShadowSet> = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let lo = chunk * CHUNK;
                let hi = (lo + CHUNK).min(count);
                let mut part = ShadowSet::new(self.header.clone());
                let mut scratch = Scratch::default();
                for i in lo..hi {
                    let mut rng = self.rng_for(start + i as u64);
                    self.sample_raw(&mut rng, &mut scratch);
                    part.push_raw(&scratch.bases, &scratch.bits, scratch.sign, &scratch.glog);
                }
                part
            })
            .collect();
        let mut out = ShadowSet::new(self.header.clone());
        for p in parts {
            out.append(p);
        }
        out
    }

    pub fn sample_set(&self, count: usize) -> ShadowSet {
        self.sample_range(0, count)
    }

    fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R, s: &mut Scratch) {
        let n = self.header.n_qubits;
        s.bases.clear();
        for _ in 0..n {
            let b = match &self.basis_cum {
                None => rng.random_range(0..3u8),
                Some(cum) => {
                    let u: f64 = rng.random();
                    cum.iter().position(|&c| u < c).unwrap_or(2) as u8
                }
            };
            s.bases.push(b);
        }

        s.masks.clear();
        s.glog.clear();
        s.sign = 1;
        let mut first_event = None;
        for (g, plan) in self.plans.iter().enumerate() {
            let mut m = PauliMasks::default();
            if let Some(t) = &plan.extra {
                let k = t.sample(rng);
                m = plan.masks[k as usize];
                let sign = plan.extra_signs[k as usize];
                s.sign *= sign;
                if self.header.gate_log {
                    s.glog.push(pack_log(k, sign));
                }
            } else if self.header.gate_log {
                s.glog.push(0);
            }
            if let Some(t) = &plan.noise {
                let k = t.sample(rng);
                if k != 0 {
                    m = m.xor(plan.masks[k as usize]);
                }
            }
            if first_event.is_none() && !m.is_identity() {
                first_event = Some(g);
            }
            s.masks.push(m);
        }

        let idx = match first_event {
            None => self.sample_ideal(rng, s),
            Some(first) => {
                self.evolve_from(first, s);
                let mut st = std::mem::take(&mut s.state);
                rotate(&mut st, &s.bases);
                let idx = sample_amplitudes(&st, rng);
                s.state = st;
                idx
            }
        };

        s.bits.clear();
        for q in 0..n {
            let mut bit = (idx >> q & 1) as u8;
            let flip = self.readout.flip_probability(q, bit == 1);
            if flip > 0.0 && rng.random::<f64>() < flip {
                bit ^= 1;
            }
            s.bits.push(bit);
        }
    }

    fn evolve_from(&self, first: usize, s: &mut Scratch) {
        let gates = self.circuit.gates();
        let start = match &self.prefix {
            Some(prefix) => {
                s.state.clear();
                s.state.extend_from_slice(&prefix[first]);
                kernels::apply_pauli_unphased(&mut s.state, s.masks[first]);
                first + 1
            }
            None => {
                s.state.clear();
                s.state.resize(1 << self.header.n_qubits, C64::new(0.0, 0.0));
                s.state[0] = C64::new(1.0, 0.0);
                0
            }
        };
        for (g, m) in gates.iter().zip(&s.masks).skip(start) {
            kernels::apply_gate(&mut s.state, &g.kind, &g.targets, false);
            if !m.is_identity() {
                kernels::apply_pauli_unphased(&mut s.state, *m);
            }
        }
    }

    fn sample_ideal<R: Rng + ?Sized>(&self, rng: &mut R, s: &mut Scratch) -> usize {
        match &self.final_cdf {
            Some(cache) => {
                let key = s.bases.iter().rev().fold(0usize, |acc, &b| acc * 3 + b as usize);
                let cdf = cache[key].get_or_init(|| {
                    let mut st = self.ideal.clone();
                    rotate(&mut st, &s.bases);
                    let mut acc = 0.0;
                    st.iter()
                        .map(|a| {
                            acc += a.norm_sqr();
                            acc
                        })
                        .collect()
                });
                let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
                cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
            }
            None => {
                s.state.clear();
                s.state.extend_from_slice(&self.ideal);
                let mut st = std::mem::take(&mut s.state);
                rotate(&mut st, &s.bases);
                let idx = sample_amplitudes(&st, rng);
                s.state = st;
                idx
            }
        }
    }
}

fn rotate(state: &mut [C64], bases: &[u8]) {
    for (q, &b) in bases.iter().enumerate() {
        if b != 2 {
            let axis = crate::pauli::PauliAxis::BASES[b as usize];
            kernels::apply_1q(state, q, &kernels::basis_rotation(axis));
        }
    }
}

fn sample_amplitudes<R: Rng + ?Sized>(state: &[C64], rng: &mut R) -> usize {
    let total: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, a) in state.iter().enumerate() {
        acc += a.norm_sqr();
        if u < acc {
            return i;
        }
    }
    state.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0)
}

/// One PEC snapshot. Builds a sampler per call; use [`ShadowSampler`] for bulk sampling.
pub fn sample_pec_snapshot<R: Rng + ?Sized>(
    decomp: &QuasiDecomposition,
    c: &Circuit,
    noise: &NoiseSpec,
    readout: &ReadoutModel,
    rng: &mut R,
) -> Result<Snapshot> {
    let spec = noise.clone().with_readout(readout.clone());
    let sampler =
        ShadowSampler::with_decomposition(c, &spec, decomp, SamplerOptions::new(ShadowMode::Pec, 0))?;
    Ok(sampler.sample_with_rng(rng))
}

/// One conventional snapshot of the noisy state.
pub fn sample_conventional_snapshot<R: Rng + ?Sized>(
    c: &Circuit,
    noise: &NoiseSpec,
    readout: &ReadoutModel,
    rng: &mut R,
) -> Result<Snapshot> {
    let spec = noise.clone().with_readout(readout.clone());
    Ok(ShadowSampler::conventional(c, &spec, 0)?.sample_with_rng(rng))
}

/// One snapshot of the circuit with noise boosted to rate `p`.
pub fn sample_boosted_snapshot<R: Rng + ?Sized>(
    c: &Circuit,
    noise: &NoiseSpec,
    p: f64,
    readout: &ReadoutModel,
    rng: &mut R,
) -> Result<Snapshot> {
    let spec = noise.clone().with_readout(readout.clone());
    Ok(ShadowSampler::boosted(c, &spec, p, 0)?.sample_with_rng(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::noise::GateNoise;
    use crate::pauli::PauliAxis;
    use std::collections::BTreeMap;

    #[test]
    fn noiseless_pec_equals_conventional() {
        let c = Circuit::new(3).with(GateKind::H, &[0]).with(GateKind::Cnot, &[0, 2]);
        let spec = NoiseSpec::noiseless();
        let pec = ShadowSampler::pec(&c, &spec, 5).unwrap().sample_set(2000);
        let conv = ShadowSampler::conventional(&c, &spec, 5).unwrap().sample_set(2000);
        for i in 0..2000 {
            assert_eq!(pec.bases_of(i), conv.bases_of(i));
            assert_eq!(pec.bits_of(i), conv.bits_of(i));
            assert_eq!(pec.sign(i), 1);
            assert!(pec.snapshot(i).gate_log.iter().all(|&(k, s)| k == 0 && s == 1));
        }
    }

    #[test]
    fn z_bases_on_zero_state() {
        let c = Circuit::new(2);
        let opts = SamplerOptions {
            basis_probs: Some([1e-9, 1e-9, 1.0 - 2e-9]),
            ..SamplerOptions::new(ShadowMode::Conventional, 1)
        };
        let set = ShadowSampler::new(&c, &NoiseSpec::noiseless(), opts).unwrap().sample_set(200);
        for s in set.iter() {
            if s.bases.iter().all(|b| *b == PauliAxis::Z) {
                assert!(s.bits.iter().all(|b| !b));
            }
        }
    }

    #[test]
    fn negative_sign_fraction() {
        // a Z-only channel has γ = {I: a > 0, Z: -b < 0}
        let c = Circuit::new(1).with(GateKind::H, &[0]);
        let mut spec = NoiseSpec::noiseless();
        spec.insert("1", GateNoise::explicit(BTreeMap::from([("Z".to_string(), 0.1)])));
        let sampler = ShadowSampler::pec(&c, &spec, 9).unwrap();
        let d = circuit_decomposition(&c, &spec).unwrap();
        let q = d.gate(1).unwrap();
        let (a, b) = (q.gamma()[0], -q.gamma()[3]);
        assert!(a > 0.0 && b > 0.0 && q.gamma()[1] == 0.0);
        let n = 20_000;
        let set = sampler.sample_set(n);
        let neg = (0..n).filter(|&i| set.sign(i) < 0).count() as f64 / n as f64;
        let want = b / (a + b);
        let sigma = (want * (1.0 - want) / n as f64).sqrt();
        assert!((neg - want).abs() < 3.0 * sigma, "{neg} vs {want}");
    }

    #[test]
    fn deterministic_by_index() {
        let c = Circuit::new(2).with(GateKind::Ry(0.3), &[0]).with(GateKind::Cz, &[0, 1]);
        let spec = NoiseSpec::uniform(&c, GateNoise::depolarizing(0.05), false);
        let sampler = ShadowSampler::pec(&c, &spec, 42).unwrap();
        let set = sampler.sample_range(100, 50);
        for i in 0..50 {
            assert_eq!(set.snapshot(i), sampler.sample(100 + i as u64));
        }
    }

    #[test]
    fn basis_marginals_uniform() {
        let c = Circuit::new(2);
        let set = ShadowSampler::conventional(&c, &NoiseSpec::noiseless(), 3).unwrap().sample_set(30_000);
        let mut counts = [0usize; 3];
        for i in 0..set.len() {
            counts[set.bases_of(i)[0] as usize] += 1;
        }
        let n = set.len() as f64;
        let sigma = (n * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - n / 3.0).abs() < 3.0 * sigma);
        }
    }
}
