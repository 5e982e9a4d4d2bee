use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pauli::{pauli_mul, PauliString};
use crate::shadow::ShadowSet;

use super::mom::{batch_means, median_of_means, Estimate, MomConfig};
use super::pauli::{factor_table, PauliEvaluator};

/// Checks that `group` contains the identity, has Hermitian elements and is
/// closed under multiplication (phases included).
pub fn validate_symmetry_group(group: &[PauliString]) -> Result<()> {
    let n = group
        .first()
        .ok_or_else(|| Error::InvalidParameter("symmetry group is empty".into()))?
        .n_qubits();
    if group.iter().any(|s| s.n_qubits() != n) {
        return Err(Error::InvalidParameter("symmetry elements differ in size".into()));
    }
    if let Some(s) = group.iter().find(|s| !s.phase().is_real()) {
        return Err(Error::InvalidParameter(format!("symmetry {s} is not Hermitian")));
    }
    let id = PauliString::identity(n);
    if !group.contains(&id) {
        return Err(Error::InvalidParameter("symmetry group lacks the identity".into()));
    }
    for a in group {
        for b in group {
            let ab = pauli_mul(a, b)?;
            if !group.contains(&ab) {
                return Err(Error::InvalidParameter(format!(
                    "symmetry group not closed: {a} · {b} = {ab}"
                )));
            }
        }
    }
    Ok(())
}

/// Real linear combination of Pauli strings, keyed by the unsigned string.
fn accumulate(terms: &mut BTreeMap<String, (PauliString, f64)>, p: PauliString, weight: f64) {
    let Some(sign) = p.phase().sign() else {
        // pairs (S, S') and (S', S) contribute conjugate values; their imaginary parts cancel
        return;
    };
    let key = p.unsigned();
    let entry = terms.entry(key.sparse_label()).or_insert((key, 0.0));
    entry.1 += sign * weight;
}

fn combination_values(
    set: &ShadowSet,
    terms: &BTreeMap<String, (PauliString, f64)>,
    cfg: &MomConfig,
) -> Result<Vec<f64>> {
    let tables = factor_table(set, cfg)?;
    let mut constant = 0.0;
    let mut evals = Vec::new();
    for (p, w) in terms.values() {
        if *w == 0.0 {
            continue;
        }
        if p.is_identity() {
            constant += w;
        } else {
            evals.push((PauliEvaluator::new(p, &tables)?, *w));
        }
    }
    let g = set.g_norm();
    Ok((0..set.len())
        .map(|i| {
            let scale = g * set.sign(i) as f64;
            constant + evals.iter().map(|(e, w)| w * scale * e.raw(set, i)).sum::<f64>()
        })
        .collect())
}

/// `⟨O⟩` in the symmetry sector `Π = |𝕊|⁻¹ Σ_S S`, as the ratio of two shadow
/// estimates. With `commuting` set, `O` must commute with every element and
/// the numerator is `Σ_S SO`; otherwise it is `|𝕊|⁻¹ Σ_{S,S'} S O S'`.
pub fn symmetry_verified_expectation(
    set: &ShadowSet,
    o: &PauliString,
    symmetries: &[PauliString],
    commuting: bool,
    cfg: &MomConfig,
) -> Result<Estimate> {
    validate_symmetry_group(symmetries)?;
    if o.n_qubits() != set.n_qubits() || symmetries[0].n_qubits() != set.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: set.n_qubits(),
            actual: o.n_qubits(),
        });
    }
    if o.phase().sign().is_none() {
        return Err(Error::InvalidParameter(format!("observable {o} is not Hermitian")));
    }
    if set.is_empty() {
        return Err(Error::EmptyShadow);
    }
    let size = symmetries.len() as f64;
    let mut num = BTreeMap::new();
    let mut den = BTreeMap::new();
    for s in symmetries {
        accumulate(&mut den, s.clone(), 1.0);
        if commuting {
            if !s.commutes_with(o) {
                return Err(Error::InvalidParameter(format!("{o} does not commute with {s}")));
            }
            accumulate(&mut num, pauli_mul(s, o)?, 1.0);
        } else {
            let so = pauli_mul(s, o)?;
            for s2 in symmetries {
                accumulate(&mut num, pauli_mul(&so, s2)?, 1.0 / size);
            }
        }
    }
    let nv = combination_values(set, &num, cfg)?;
    let dv = combination_values(set, &den, cfg)?;
    let n_hat = median_of_means(&nv, cfg.k)?;
    let d_hat = median_of_means(&dv, cfg.k)?;
    let (var_n, var_d, cov) = if cfg.k >= 2 {
        let (bn, bd) = (batch_means(&nv, cfg.k), batch_means(&dv, cfg.k));
        let (vn, vd, c) = covariance(&bn, &bd);
        let k = cfg.k as f64;
        (vn / k, vd / k, c / k)
    } else {
        let (vn, vd, c) = covariance(&nv, &dv);
        let n = nv.len() as f64;
        (vn / n, vd / n, c / n)
    };
    let d_err = var_d.sqrt();
    if d_hat.abs() < 3.0 * d_err || d_hat == 0.0 {
        return Err(Error::DegenerateProjection {
            value: d_hat,
            stderr: d_err,
        });
    }
    let r = n_hat / d_hat;
    let var_r = ((var_n - 2.0 * r * cov + r * r * var_d) / (d_hat * d_hat)).max(0.0);
    Ok(Estimate {
        value: r,
        stderr: var_r.sqrt(),
        n_used: set.len(),
        norm_used: set.g_norm(),
    })
}

/// Sample variances of `a`, `b` and their covariance.
fn covariance(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let n = a.len() as f64;
    if a.len() < 2 {
        return (0.0, 0.0, 0.0);
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut va, mut vb, mut c) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
        c += (x - ma) * (y - mb);
    }
    (va / (n - 1.0), vb / (n - 1.0), c / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::estimate_pauli;
    use crate::pauli::PauliAxis;
    use crate::shadow::{ShadowHeader, ShadowMode, Snapshot};

    fn p(s: &str) -> PauliString {
        PauliString::parse(s, 2).unwrap()
    }

    fn parity_group() -> Vec<PauliString> {
        vec![PauliString::identity(2), p("ZZ")]
    }

    fn z_shadows(bits: &[[bool; 2]]) -> ShadowSet {
        let mut set = ShadowSet::new(ShadowHeader::new(2, ShadowMode::Conventional));
        for b in bits {
            set.push(&Snapshot {
                bases: vec![PauliAxis::Z, PauliAxis::Z],
                bits: b.to_vec(),
                sign: 1,
                gate_log: vec![],
            })
            .unwrap();
        }
        set
    }

    #[test]
    fn group_validation() {
        assert!(validate_symmetry_group(&parity_group()).is_ok());
        assert!(validate_symmetry_group(&[p("ZZ")]).is_err());
        assert!(validate_symmetry_group(&[PauliString::identity(2), p("ZZ"), p("XX")]).is_err());
        assert!(validate_symmetry_group(&[PauliString::identity(2), p("ZZ"), p("XX"), p("-YY")]).is_ok());
        assert!(validate_symmetry_group(&[]).is_err());
    }

    #[test]
    fn trivial_group_matches_plain_estimate() {
        let set = z_shadows(&[[false, false], [true, false], [false, false]]);
        let cfg = MomConfig::default();
        let z0 = p("Z0");
        let plain = estimate_pauli(&set, &z0, &cfg).unwrap();
        let sym = symmetry_verified_expectation(&set, &z0, &[PauliString::identity(2)], true, &cfg).unwrap();
        assert!((plain.value - sym.value).abs() < 1e-12);
        let general = symmetry_verified_expectation(&set, &z0, &[PauliString::identity(2)], false, &cfg).unwrap();
        assert!((plain.value - general.value).abs() < 1e-12);
    }

    #[test]
    fn ratio_of_combined_means() {
        // Z-basis records only: Z0 and Z1 shots are ±3, ZZ shots ±9
        let mut bits = vec![[false, false]; 60];
        bits.extend([[true, false]; 20]);
        let set = z_shadows(&bits);
        let cfg = MomConfig::default();
        let num = 60.0 * 6.0 / 80.0;
        let den = 1.0 + (60.0 * 9.0 - 20.0 * 9.0) / 80.0;
        let r = symmetry_verified_expectation(&set, &p("Z0"), &parity_group(), true, &cfg).unwrap();
        assert!((r.value - num / den).abs() < 1e-12);
        let g = symmetry_verified_expectation(&set, &p("Z0"), &parity_group(), false, &cfg).unwrap();
        assert!((g.value - num / den).abs() < 1e-12);
        assert!(r.stderr > 0.0);
    }

    #[test]
    fn rejects_wrong_commuting_flag_and_degenerate_sector() {
        let set = z_shadows(&[[true, false]; 4]);
        let cfg = MomConfig::default();
        assert!(symmetry_verified_expectation(&set, &p("X0"), &parity_group(), true, &cfg).is_err());
        let mut bits = vec![[true, false]; 4];
        bits.extend([[false, false]; 4]);
        let set = z_shadows(&bits);
        assert!(matches!(
            symmetry_verified_expectation(&set, &p("Z0"), &parity_group(), true, &cfg),
            Err(Error::DegenerateProjection { .. })
        ));
    }
}
