use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Median-of-means settings: snapshot `i` goes to batch `i mod k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomConfig {
    pub k: usize,
    /// Use readout-corrected snapshot factors when the shadow header has a readout model.
    #[serde(default = "default_true")]
    pub readout_mitigation: bool,
}

fn default_true() -> bool {
    true
}

impl Default for MomConfig {
    fn default() -> Self {
        MomConfig {
            k: 1,
            readout_mitigation: true,
        }
    }
}

impl MomConfig {
    pub fn new(k: usize) -> Result<Self> {
        check_k(k)?;
        Ok(MomConfig {
            k,
            ..Default::default()
        })
    }

    pub fn unmitigated(mut self) -> Self {
        self.readout_mitigation = false;
        self
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidParameter(format!("batch count K = {k} must be odd and positive")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_used: usize,
    /// `‖g‖₁` (or the light-cone norm) the values were scaled by.
    pub norm_used: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            n_used: 0,
            norm_used: 1.0,
        }
    }
}

pub(crate) fn batch_means(values: &[f64], k: usize) -> Vec<f64> {
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (i, v) in values.iter().enumerate() {
        sums[i % k] += v;
        counts[i % k] += 1;
    }
    sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect()
}

pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    let mid = xs.len() / 2;
    let (_, m, _) = xs.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

pub(crate) fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Middle order statistic of the `k` batch means.
pub fn median_of_means(values: &[f64], k: usize) -> Result<f64> {
    check_k(k)?;
    if values.is_empty() {
        return Err(Error::EmptyShadow);
    }
    if k > values.len() {
        return Err(Error::NotEnoughSnapshots {
            needed: k,
            have: values.len(),
        });
    }
    Ok(median(batch_means(values, k)))
}

/// Median of means with a standard error from the spread of the batch means
/// (or of the single values when `k = 1`).
pub fn mom_estimate(values: &[f64], k: usize, norm_used: f64) -> Result<Estimate> {
    let value = median_of_means(values, k)?;
    let stderr = if k >= 2 {
        (mean_and_var(&batch_means(values, k)).1 / k as f64).sqrt()
    } else {
        (mean_and_var(values).1 / values.len() as f64).sqrt()
    };
    Ok(Estimate {
        value,
        stderr,
        n_used: values.len(),
        norm_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_cases() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(median_of_means(&v, 1).unwrap(), 2.5);
        assert_eq!(median_of_means(&[7.0; 10], 5).unwrap(), 7.0);
        assert!(median_of_means(&v, 2).is_err());
        assert!(median_of_means(&[], 1).is_err());
        assert!(matches!(median_of_means(&v, 5), Err(Error::NotEnoughSnapshots { .. })));
    }

    #[test]
    fn outlier_is_confined() {
        let mut v = vec![1.0; 50];
        v[7] = 1e9;
        assert_eq!(median_of_means(&v, 5).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn median_lies_between_batch_extremes(v in proptest::collection::vec(-10.0f64..10.0, 5..60), k in prop_oneof![Just(1usize), Just(3), Just(5)]) {
            let m = median_of_means(&v, k).unwrap();
            let b = batch_means(&v, k);
            let lo = b.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= m && m <= hi);
        }
    }
}
