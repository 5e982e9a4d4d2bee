//! Subsystem purities from pairs of snapshots.
//!
//! A pair `(i, j)` contributes `g² s_i s_j ∏_{q∈Q} tr(F_{i,q} F_{j,q})`. Pairs are
//! split into MoM batches by `(i + j) mod K`. Two routes compute the same
//! batch sums: a direct pairwise loop, and a grouped one that histograms
//! snapshots by residue `i mod K` and outcome pattern on `Q`, then contracts
//! the histograms with the per-qubit pair-factor matrices.

use rayon::prelude::*;

use super::mom::{median, Estimate, MomConfig};
use super::pauli::factor_table;
use crate::error::{Error, Result};
use crate::shadow::{pair_matrix, ShadowSet};

/// Largest subsystem handled by the grouped route (`6^|Q|` patterns).
pub const GROUPED_MAX_QUBITS: usize = 6;

struct PairStats {
    batch_sums: Vec<f64>,
    batch_counts: Vec<f64>,
    /// `Σ_{j≠i} h(i, j)` per snapshot.
    row_sums: Vec<f64>,
    /// `Σ_{i≠j} h(i, j)²` over ordered pairs.
    sum_sq: f64,
}

fn check_subsystem(set: &ShadowSet, qubits: &[usize], k: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::InvalidParameter("empty subsystem".into()));
    }
    for (i, &q) in qubits.iter().enumerate() {
        if q >= set.n_qubits() || qubits[..i].contains(&q) {
            return Err(Error::InvalidParameter(format!("bad subsystem qubit {q}")));
        }
    }
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidParameter(format!("batch count K = {k} must be odd")));
    }
    let needed = k.max(2);
    if set.len() < needed {
        return Err(Error::NotEnoughSnapshots {
            needed,
            have: set.len(),
        });
    }
    Ok(())
}

fn patterns(set: &ShadowSet, qubits: &[usize]) -> Vec<usize> {
    (0..set.len())
        .map(|i| {
            let (bases, bits) = (set.bases_of(i), set.bits_of(i));
            qubits
                .iter()
                .rev()
                .fold(0, |acc, &q| acc * 6 + bases[q] as usize * 2 + bits[q] as usize)
        })
        .collect()
}

fn finish(stats: PairStats, n: usize, g2: f64) -> Estimate {
    let means: Vec<f64> = stats
        .batch_sums
        .iter()
        .zip(&stats.batch_counts)
        .map(|(s, c)| g2 * s / c)
        .collect();
    let value = median(means);
    let nf = n as f64;
    let pairs = nf * (nf - 1.0) / 2.0;
    let u = g2 * stats.batch_sums.iter().sum::<f64>() / pairs;
    let h1: Vec<f64> = stats.row_sums.iter().map(|r| g2 * r / (nf - 1.0)).collect();
    let zeta1 = h1.iter().map(|x| (x - u).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
    let zeta2 = (g2 * g2 * stats.sum_sq / (nf * (nf - 1.0)) - u * u).max(0.0);
    let var = (4.0 * (nf - 2.0) * zeta1 + 2.0 * zeta2) / (nf * (nf - 1.0));
    Estimate {
        value,
        stderr: var.max(0.0).sqrt(),
        n_used: n,
        norm_used: g2.sqrt(),
    }
}

/// Pairwise reference implementation, `O(|Q| N²)`.
pub fn estimate_purity_direct(set: &ShadowSet, qubits: &[usize], cfg: &MomConfig) -> Result<Estimate> {
    check_subsystem(set, qubits, cfg.k)?;
    let tables = factor_table(set, cfg)?;
    let mats: Vec<[[f64; 6]; 6]> = qubits.iter().map(|&q| pair_matrix(tables.qubit(q))).collect();
    let n = set.len();
    let k = cfg.k;
    let pats: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let (b, t) = (set.bases_of(i), set.bits_of(i));
            qubits.iter().map(|&q| b[q] as usize * 2 + t[q] as usize).collect()
        })
        .collect();
    let signs: Vec<f64> = (0..n).map(|i| set.sign(i) as f64).collect();
    let h = |i: usize, j: usize| -> f64 {
        let mut v = signs[i] * signs[j];
        for (m, (a, b)) in mats.iter().zip(pats[i].iter().zip(&pats[j])) {
            v *= m[*a][*b];
        }
        v
    };
    let rows: Vec<(f64, Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = 0.0;
            let mut batch = vec![0.0; k];
            let mut sq = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let v = h(i, j);
                row += v;
                sq += v * v;
                if j > i {
                    batch[(i + j) % k] += v;
                }
            }
            (row, batch, sq)
        })
        .collect();
    let mut stats = PairStats {
        batch_sums: vec![0.0; k],
        batch_counts: vec![0.0; k],
        row_sums: Vec::with_capacity(n),
        sum_sq: 0.0,
    };
    for (row, batch, sq) in rows {
        stats.row_sums.push(row);
        stats.sum_sq += sq;
        for (acc, b) in stats.batch_sums.iter_mut().zip(batch) {
            *acc += b;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            stats.batch_counts[(i + j) % k] += 1.0;
        }
    }
    let g = set.g_norm();
    Ok(finish(stats, n, g * g))
}

/// `out = (⊗_q M_q) v` for vectors indexed by base-6 patterns.
fn contract(mats: &[[[f64; 6]; 6]], v: &[f64]) -> Vec<f64> {
    let mut cur = v.to_vec();
    let mut next = vec![0.0; v.len()];
    let mut stride = 1;
    for m in mats {
        for block in (0..cur.len()).step_by(6 * stride) {
            for off in 0..stride {
                for a in 0..6 {
                    let mut acc = 0.0;
                    for (b, mab) in m[a].iter().enumerate() {
                        acc += mab * cur[block + off + b * stride];
                    }
                    next[block + off + a * stride] = acc;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        stride *= 6;
    }
    cur
}

/// Diagonal of `⊗_q M_q` at pattern `a`.
fn diag(mats: &[[[f64; 6]; 6]], mut a: usize) -> f64 {
    let mut v = 1.0;
    for m in mats {
        v *= m[a % 6][a % 6];
        a /= 6;
    }
    v
}

/// Grouped route, `O(N + K² 6^|Q|)`; requires `|Q| ≤ GROUPED_MAX_QUBITS`.
pub fn estimate_purity_grouped(set: &ShadowSet, qubits: &[usize], cfg: &MomConfig) -> Result<Estimate> {
    check_subsystem(set, qubits, cfg.k)?;
    if qubits.len() > GROUPED_MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "grouped purity supports at most {GROUPED_MAX_QUBITS} qubits"
        )));
    }
    let tables = factor_table(set, cfg)?;
    let mats: Vec<[[f64; 6]; 6]> = qubits.iter().map(|&q| pair_matrix(tables.qubit(q))).collect();
    let sq_mats: Vec<[[f64; 6]; 6]> = mats
        .iter()
        .map(|m| {
            let mut s = *m;
            s.iter_mut().flatten().for_each(|x| *x *= *x);
            s
        })
        .collect();
    let n = set.len();
    let k = cfg.k;
    let d = 6usize.pow(qubits.len() as u32);
    let pats = patterns(set, qubits);

    let mut hist = vec![vec![0.0; d]; k];
    let mut counts = vec![0.0; k];
    let mut diag_sums = vec![0.0; k];
    let mut occupancy = vec![0.0; d];
    for (i, &a) in pats.iter().enumerate() {
        let r = i % k;
        hist[r][a] += set.sign(i) as f64;
        counts[r] += 1.0;
        diag_sums[r] += diag(&mats, a);
        occupancy[a] += 1.0;
    }
    let contracted: Vec<Vec<f64>> = hist.iter().map(|h| contract(&mats, h)).collect();

    let mut batch_sums = vec![0.0; k];
    let mut batch_counts = vec![0.0; k];
    for (b, (sum, count)) in batch_sums.iter_mut().zip(batch_counts.iter_mut()).enumerate() {
        let mut s = 0.0;
        let mut c = 0.0;
        for r in 0..k {
            let r2 = (b + k - r) % k;
            s += hist[r].iter().zip(&contracted[r2]).map(|(x, y)| x * y).sum::<f64>();
            c += counts[r] * counts[r2];
            if (2 * r) % k == b {
                s -= diag_sums[r];
                c -= counts[r];
            }
        }
        *sum = s / 2.0;
        *count = c / 2.0;
    }

    let total: Vec<f64> = (0..d).map(|a| hist.iter().map(|h| h[a]).sum()).collect();
    let total_c = contract(&mats, &total);
    let row_sums = pats
        .iter()
        .enumerate()
        .map(|(i, &a)| set.sign(i) as f64 * (total_c[a] - set.sign(i) as f64 * diag(&mats, a)))
        .collect();
    let occ_c = contract(&sq_mats, &occupancy);
    let sum_sq = occupancy.iter().zip(&occ_c).map(|(x, y)| x * y).sum::<f64>()
        - pats.iter().map(|&a| diag(&sq_mats, a)).sum::<f64>();

    let g = set.g_norm();
    Ok(finish(
        PairStats {
            batch_sums,
            batch_counts,
            row_sums,
            sum_sq,
        },
        n,
        g * g,
    ))
}

/// `tr(ρ_Q²)` estimate; grouped route when `|Q|` is small, else pairwise.
pub fn estimate_purity(set: &ShadowSet, qubits: &[usize], cfg: &MomConfig) -> Result<Estimate> {
    if qubits.len() <= GROUPED_MAX_QUBITS {
        estimate_purity_grouped(set, qubits, cfg)
    } else {
        estimate_purity_direct(set, qubits, cfg)
    }
}

/// `−ln(purity)`; NaN (with a warning) for non-positive input.
pub fn renyi_entropy(purity: f64) -> f64 {
    if purity > 0.0 {
        -purity.ln()
    } else {
        log::warn!("purity estimate {purity} is not positive; entropy undefined");
        f64::NAN
    }
}

/// Entropy of a raw purity estimate, clamped to the physical range `[2^{−|Q|}, 1]` first.
pub fn renyi_from_estimate(purity: f64, subsystem_size: usize) -> f64 {
    let floor = 0.5f64.powi(subsystem_size as i32);
    renyi_entropy(purity.clamp(floor, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, GateKind};
    use crate::noise::{GateNoise, NoiseSpec};
    use crate::shadow::ShadowSampler;
    use approx::assert_abs_diff_eq;

    #[test]
    fn routes_agree() {
        let c = Circuit::new(3)
            .with(GateKind::H, &[0])
            .with(GateKind::Cnot, &[0, 1])
            .with(GateKind::Ry(0.6), &[2])
            .with(GateKind::Cz, &[1, 2]);
        let spec = NoiseSpec::uniform(&c, GateNoise::biased_pauli(0.05, 0.8), true);
        let set = ShadowSampler::pec(&c, &spec, 4).unwrap().sample_set(600);
        for k in [1, 3, 7] {
            let cfg = MomConfig::new(k).unwrap();
            for q in [vec![0], vec![1, 2], vec![2, 0, 1]] {
                let a = estimate_purity_direct(&set, &q, &cfg).unwrap();
                let b = estimate_purity_grouped(&set, &q, &cfg).unwrap();
                assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-9 * a.value.abs().max(1.0));
                assert_abs_diff_eq!(a.stderr, b.stderr, epsilon = 1e-9 * a.stderr.max(1.0));
            }
        }
    }

    #[test]
    fn pure_zero_state() {
        let c = Circuit::new(2);
        let set = ShadowSampler::conventional(&c, &NoiseSpec::noiseless(), 2).unwrap().sample_set(4000);
        let e = estimate_purity(&set, &[0], &MomConfig::default()).unwrap();
        assert!((e.value - 1.0).abs() < 5.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn errors() {
        let set = ShadowSampler::conventional(&Circuit::new(2), &NoiseSpec::noiseless(), 2)
            .unwrap()
            .sample_set(1);
        assert!(estimate_purity(&set, &[0], &MomConfig::default()).is_err());
        assert!(estimate_purity(&set, &[], &MomConfig::default()).is_err());
    }

    #[test]
    fn entropies() {
        assert_eq!(renyi_entropy(1.0), 0.0);
        assert_abs_diff_eq!(renyi_entropy(0.5), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(renyi_entropy(0.25), 4f64.ln(), epsilon = 1e-15);
        assert!(renyi_entropy(-0.1).is_nan());
        assert_abs_diff_eq!(renyi_from_estimate(-0.1, 2), 4f64.ln(), epsilon = 1e-15);
    }
}
