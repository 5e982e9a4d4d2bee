use serde::{Deserialize, Serialize};

use super::mom::Estimate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZneModel {
    Linear,
    /// `a · exp(−b p)`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZnePoint {
    pub p: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZneResult {
    pub estimate: Estimate,
    pub model: ZneModel,
    /// Set when an exponential fit failed and the linear fit was used instead.
    pub fell_back: bool,
}

/// Weights `1/stderr²`, or unit weights if any stderr is zero.
fn weights(points: &[ZnePoint]) -> Vec<f64> {
    if points.iter().any(|pt| pt.stderr <= 0.0) {
        vec![1.0; points.len()]
    } else {
        points.iter().map(|pt| 1.0 / (pt.stderr * pt.stderr)).collect()
    }
}

/// Weighted straight-line fit; returns `(intercept, slope, d intercept / d y_i)`.
fn wls(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    if !(det.abs() > 1e-300) || det.abs() < 1e-12 * sw * sxx {
        return Err(Error::DegenerateFit("all noise levels coincide".into()));
    }
    let intercept = (sxx * sy - sx * sxy) / det;
    let slope = (sw * sxy - sx * sy) / det;
    let grad = w.iter().zip(x).map(|(w, x)| w * (sxx - sx * x) / det).collect();
    Ok((intercept, slope, grad))
}

fn distinct_levels(points: &[ZnePoint]) -> usize {
    let mut ps: Vec<f64> = points.iter().map(|pt| pt.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    ps.len()
}

fn linear(points: &[ZnePoint]) -> Result<Estimate> {
    if distinct_levels(points) < 2 {
        return Err(Error::DegenerateFit("linear extrapolation needs two noise levels".into()));
    }
    let x: Vec<f64> = points.iter().map(|pt| pt.p).collect();
    let y: Vec<f64> = points.iter().map(|pt| pt.value).collect();
    let (a, _, grad) = wls(&x, &y, &weights(points))?;
    let var: f64 = grad.iter().zip(points).map(|(g, pt)| (g * pt.stderr).powi(2)).sum();
    Ok(Estimate {
        value: a,
        stderr: var.sqrt(),
        n_used: points.len(),
        norm_used: 1.0,
    })
}

fn exponential(points: &[ZnePoint]) -> Result<Estimate> {
    let x: Vec<f64> = points.iter().map(|pt| pt.p).collect();
    let same_sign = points.iter().all(|pt| pt.value > 0.0) || points.iter().all(|pt| pt.value < 0.0);
    if same_sign {
        let s = points[0].value.signum();
        let y: Vec<f64> = points.iter().map(|pt| (pt.value * s).ln()).collect();
        // var(ln v) ≈ (se / v)²
        let pts: Vec<ZnePoint> = points
            .iter()
            .zip(&y)
            .map(|(pt, &ly)| ZnePoint {
                p: pt.p,
                value: ly,
                stderr: pt.stderr / pt.value.abs(),
            })
            .collect();
        let (c, _, grad) = wls(&x, &y, &weights(&pts))?;
        let a = s * c.exp();
        let var: f64 = grad.iter().zip(&pts).map(|(g, pt)| (g * pt.stderr).powi(2)).sum();
        return Ok(Estimate {
            value: a,
            stderr: a.abs() * var.sqrt(),
            n_used: points.len(),
            norm_used: 1.0,
        });
    }
    gauss_newton(points)
}

/// Weighted least squares for `a e^{−bp}` started from the linear fit.
fn gauss_newton(points: &[ZnePoint]) -> Result<Estimate> {
    let lin = linear(points)?;
    let x: Vec<f64> = points.iter().map(|pt| pt.p).collect();
    let y: Vec<f64> = points.iter().map(|pt| pt.value).collect();
    let w = weights(points);
    let (_, slope, _) = wls(&x, &y, &w)?;
    let mut a = lin.value;
    if a == 0.0 {
        return Err(Error::DegenerateFit("zero intercept start".into()));
    }
    let mut b = -slope / a;
    let cost = |a: f64, b: f64| -> f64 {
        x.iter().zip(&y).zip(&w).map(|((x, y), w)| w * (y - a * (-b * x).exp()).powi(2)).sum()
    };
    let mut current = cost(a, b);
    for _ in 0..100 {
        // normal equations of the 2-parameter model
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for ((xi, yi), wi) in x.iter().zip(&y).zip(&w) {
            let e = (-b * xi).exp();
            let j = [e, -a * xi * e];
            let r = yi - a * e;
            for u in 0..2 {
                jtr[u] += wi * j[u] * r;
                for v in 0..2 {
                    jtj[u][v] += wi * j[u] * j[v];
                }
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::DegenerateFit("singular exponential fit".into()));
        }
        let da = (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let db = (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        let mut step = 1.0;
        loop {
            let next = cost(a + step * da, b + step * db);
            if next <= current {
                a += step * da;
                b += step * db;
                let done = (current - next).abs() <= 1e-15 * current.max(1e-300);
                current = next;
                if done {
                    let var = if jtj[1][1] > 0.0 { jtj[1][1] / det } else { f64::NAN };
                    let stderr = if points.iter().all(|pt| pt.stderr > 0.0) { var.sqrt() } else { 0.0 };
                    return Ok(Estimate {
                        value: a,
                        stderr,
                        n_used: points.len(),
                        norm_used: 1.0,
                    });
                }
                break;
            }
            step /= 2.0;
            if step < 1e-10 {
                return Err(Error::DegenerateFit("exponential fit did not converge".into()));
            }
        }
    }
    Err(Error::DegenerateFit("exponential fit did not converge".into()))
}

/// Extrapolates noisy expectation values to zero noise.
pub fn zne_extrapolate(points: &[ZnePoint], model: ZneModel) -> Result<ZneResult> {
    if points.iter().any(|pt| !pt.p.is_finite() || !pt.value.is_finite() || pt.stderr < 0.0) {
        return Err(Error::InvalidParameter("non-finite ZNE point".into()));
    }
    match model {
        ZneModel::Linear => Ok(ZneResult {
            estimate: linear(points)?,
            model,
            fell_back: false,
        }),
        ZneModel::Exponential => {
            if distinct_levels(points) < 3 {
                return Err(Error::DegenerateFit("exponential extrapolation needs three noise levels".into()));
            }
            match exponential(points) {
                Ok(estimate) if estimate.value.is_finite() => Ok(ZneResult {
                    estimate,
                    model,
                    fell_back: false,
                }),
                _ => Ok(ZneResult {
                    estimate: linear(points)?,
                    model: ZneModel::Linear,
                    fell_back: true,
                }),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pts(f: impl Fn(f64) -> f64, se: f64) -> Vec<ZnePoint> {
        [1e-3, 2e-3, 5e-3]
            .iter()
            .map(|&p| ZnePoint {
                p,
                value: f(p),
                stderr: se,
            })
            .collect()
    }

    #[test]
    fn exact_linear() {
        let r = zne_extrapolate(&pts(|p| 0.7 - 10.0 * p, 0.0), ZneModel::Linear).unwrap();
        assert_abs_diff_eq!(r.estimate.value, 0.7, epsilon = 1e-10);
        let r = zne_extrapolate(&pts(|p| 0.7 - 10.0 * p, 0.01), ZneModel::Linear).unwrap();
        assert_abs_diff_eq!(r.estimate.value, 0.7, epsilon = 1e-10);
        assert!(r.estimate.stderr > 0.01);
    }

    #[test]
    fn exact_exponential() {
        let r = zne_extrapolate(&pts(|p| 0.8 * (-30.0 * p).exp(), 0.0), ZneModel::Exponential).unwrap();
        assert!(!r.fell_back);
        assert_abs_diff_eq!(r.estimate.value, 0.8, epsilon = 1e-10);
        let r = zne_extrapolate(&pts(|p| -0.5 * (-30.0 * p).exp(), 0.001), ZneModel::Exponential).unwrap();
        assert_abs_diff_eq!(r.estimate.value, -0.5, epsilon = 1e-10);
    }

    #[test]
    fn mixed_signs_use_refinement_or_fall_back() {
        let data = pts(|p| 0.001 - 0.4 * p, 0.01);
        let r = zne_extrapolate(&data, ZneModel::Exponential).unwrap();
        assert!(r.estimate.value.is_finite());
        if r.fell_back {
            assert_eq!(r.model, ZneModel::Linear);
        }
    }

    #[test]
    fn degenerate() {
        let one = [ZnePoint { p: 1e-3, value: 0.5, stderr: 0.0 }; 2];
        assert!(matches!(zne_extrapolate(&one, ZneModel::Linear), Err(Error::DegenerateFit(_))));
        assert!(zne_extrapolate(&pts(|p| p, 0.0)[..2], ZneModel::Exponential).is_err());
    }
}
