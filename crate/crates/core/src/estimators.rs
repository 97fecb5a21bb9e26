//! Empirical MPL estimators under simple random and ranked set sampling.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::ranking::RankedSetSample;

/// A point estimate of `K(t)`, optionally with a variance and a
/// normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MplEstimate {
    pub t: f64,
    pub value: f64,
    /// Number of observations at or below `t`.
    pub count_at_risk: usize,
    pub variance: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub level: Option<f64>,
}

impl MplEstimate {
    fn point(t: f64, value: f64, count_at_risk: usize) -> Self {
        Self {
            t,
            value,
            count_at_risk,
            variance: None,
            ci: None,
            level: None,
        }
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.variance = Some(variance);
        self
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must be positive and finite, got {t}")))
    }
}

/// Sums `(t - x)` and counts over observations `x <= t`.
fn past_sums(xs: &[f64], t: f64) -> (f64, usize) {
    xs.iter()
        .filter(|&&x| x <= t)
        .fold((0.0, 0), |(u, v), &x| (u + (t - x), v + 1))
}

/// `K_SRS(t)`: average elapsed time `t - X` over observations at or below
/// `t`, or 0 when there are none.
pub fn k_srs(data: &[f64], t: f64) -> Result<MplEstimate> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    check_t(t)?;
    let (u, v) = past_sums(data, t);
    let value = if v > 0 { u / v as f64 } else { 0.0 };
    Ok(MplEstimate::point(t, value, v))
}

/// `K_RSS(t) = W * sum_r U_r`, with `W = 1{sum V > 0} / sum V`.
pub fn k_rss(sample: &RankedSetSample, t: f64) -> Result<MplEstimate> {
    check_t(t)?;
    let (u, v) = sample
        .rank_rows()
        .map(|row| past_sums(row, t))
        .fold((0.0, 0), |(u, v), (ur, vr)| (u + ur, v + vr));
    let value = if v > 0 { u / v as f64 } else { 0.0 };
    Ok(MplEstimate::point(t, value, v))
}

/// Fraction of all `mk` measured values at or below `t`.
pub fn f_rss(sample: &RankedSetSample, t: f64) -> f64 {
    let below = sample.values().iter().filter(|&&x| x <= t).count();
    below as f64 / sample.len() as f64
}

/// Plug-in estimate of `Var(K_RSS(t))`: the asymptotic variance function with
/// every population quantity replaced by its per-rank empirical counterpart,
/// divided by `n`.
///
/// Per rank, `F_[r] = V_r / m`, `K_[r] = U_r / V_r` and `sigma2_[r]` is the
/// divide-by-`V_r` variance of `t - X` over that rank's values at or below
/// `t`. Empty ranks contribute `K_[r] = sigma2_[r] = 0`.
pub fn var_plugin(sample: &RankedSetSample, t: f64) -> Result<f64> {
    check_t(t)?;
    let f_hat = f_rss(sample, t);
    if f_hat <= 0.0 {
        return Err(Error::UndefinedAtT(t));
    }
    let k_hat = k_rss(sample, t)?.value;
    let k = sample.set_size() as f64;
    let m = sample.cycles() as f64;
    let n = sample.len() as f64;
    let mut total = 0.0;
    for row in sample.rank_rows() {
        let (u, v) = past_sums(row, t);
        let fr = v as f64 / m;
        let (kr, s2r) = if v == 0 {
            (0.0, 0.0)
        } else {
            let kr = u / v as f64;
            let s2r = if v > 1 {
                row.iter()
                    .filter(|&&x| x <= t)
                    .map(|&x| (t - x - kr).powi(2))
                    .sum::<f64>()
                    / v as f64
            } else {
                0.0
            };
            (kr, s2r)
        };
        total += s2r * fr + fr * (1.0 - fr) * (kr - k_hat).powi(2);
    }
    Ok(total / (k * f_hat * f_hat) / n)
}

/// Two-sided standard normal critical value `z_{(1 + level) / 2}`.
pub fn normal_critical(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidProbability(level));
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(std.inverse_cdf(0.5 * (1.0 + level)))
}

/// Fills in the normal-approximation interval `value -/+ z * sqrt(variance)`,
/// truncating the lower end at zero.
pub fn ci_na(estimate: &MplEstimate, level: f64) -> Result<MplEstimate> {
    let var = estimate.variance.ok_or(Error::MissingVariance)?;
    let z = normal_critical(level)?;
    let half = z * var.max(0.0).sqrt();
    let mut out = *estimate;
    out.ci = Some(((estimate.value - half).max(0.0), estimate.value + half));
    out.level = Some(level);
    Ok(out)
}

/// `K_RSS(t)` with plug-in variance and interval at `level`. Where the
/// variance is undefined (nothing at or below `t`) only the point estimate is
/// returned.
pub fn estimate_rss(sample: &RankedSetSample, t: f64, level: f64) -> Result<MplEstimate> {
    let est = k_rss(sample, t)?;
    match var_plugin(sample, t) {
        Ok(v) => ci_na(&est.with_variance(v), level),
        Err(Error::UndefinedAtT(_)) => Ok(est),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn hiv() -> RankedSetSample {
        crate::harness::hiv_sample()
    }

    #[test]
    fn k_srs_examples() {
        let e = k_srs(&[0.5], 1.0).unwrap();
        assert_eq!((e.value, e.count_at_risk), (0.5, 1));
        let e = k_srs(&[2.0, 3.0], 1.0).unwrap();
        assert_eq!((e.value, e.count_at_risk), (0.0, 0));
        let pooled = hiv().values().to_vec();
        let e = k_srs(&pooled, 200.0).unwrap();
        assert_eq!((e.value, e.count_at_risk), (39.8, 5));
        assert_eq!(k_srs(&[], 1.0), Err(Error::EmptySample));
        assert!(k_srs(&[1.0], 0.0).is_err());
    }

    #[test]
    fn k_rss_examples() {
        let e = k_rss(&hiv(), 200.0).unwrap();
        assert_eq!(e.value, 39.8);
        assert_eq!(e.count_at_risk, 5);
        let e = k_rss(&hiv(), 100.0).unwrap();
        assert_eq!((e.value, e.count_at_risk), (0.0, 0));
        let one = RankedSetSample::from_rank_rows(vec![vec![0.5]]).unwrap();
        assert_eq!(k_rss(&one, 1.0).unwrap().value, 0.5);
    }

    #[test]
    fn f_rss_examples() {
        let s = hiv();
        assert_eq!(f_rss(&s, 200.0), 5.0 / 30.0);
        assert_eq!(f_rss(&s, 1.0), 0.0);
        assert_eq!(f_rss(&s, 1e6), 1.0);
    }

    // Exact rational value from an independent hand computation of the
    // plug-in formula on the fixture: 140114 / 1875.
    #[test]
    fn var_plugin_hiv_locked() {
        let v = var_plugin(&hiv(), 200.0).unwrap();
        assert!((v - 140114.0 / 1875.0).abs() < 1e-10, "{v}");
        let v = var_plugin(&hiv(), 250.0).unwrap();
        assert!((v - 1536069.0 / 14641.0).abs() < 1e-10, "{v}");
        let v = var_plugin(&hiv(), 300.0).unwrap();
        assert!((v - 88715.0 / 972.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn var_plugin_undefined_below_data() {
        assert_eq!(var_plugin(&hiv(), 100.0), Err(Error::UndefinedAtT(100.0)));
    }

    #[test]
    fn var_plugin_single_hits_per_rank() {
        // every rank has at most one value <= t, so only the between-rank term remains
        let s = RankedSetSample::from_rank_rows(vec![
            vec![1.0, 9.0, 9.0],
            vec![2.0, 9.0, 9.0],
            vec![9.0, 9.0, 9.0],
        ])
        .unwrap();
        let t = 3.0;
        let v = var_plugin(&s, t).unwrap();
        let (fh, kh): (f64, f64) = (2.0 / 9.0, 1.5);
        let fr = 1.0 / 3.0;
        // the empty third rank has weight F_[3] = 0
        let between = fr * (1.0 - fr) * ((2.0 - kh).powi(2) + (1.0 - kh).powi(2));
        let want = between / (3.0 * fh * fh) / 9.0;
        assert!((v - want).abs() < 1e-15);
        assert!(v >= 0.0 && v.is_finite());
    }

    #[test]
    fn var_plugin_k1_collapses_to_srs() {
        let xs = vec![0.2, 0.9, 1.4, 0.4, 3.0, 0.05, 2.2];
        let s = RankedSetSample::from_rank_rows(vec![xs.clone()]).unwrap();
        let t = 1.5;
        let below: Vec<f64> = xs.iter().filter(|&&x| x <= t).map(|&x| t - x).collect();
        let kh = below.iter().sum::<f64>() / below.len() as f64;
        let s2 = below.iter().map(|d| (d - kh).powi(2)).sum::<f64>() / below.len() as f64;
        let fh = below.len() as f64 / xs.len() as f64;
        let want = s2 / (xs.len() as f64 * fh);
        assert!((var_plugin(&s, t).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn ci_examples() {
        let base = MplEstimate::point(10.0, 5.0, 3);
        assert_eq!(ci_na(&base, 0.95), Err(Error::MissingVariance));
        let e = ci_na(&base.with_variance(0.0), 0.95).unwrap();
        assert_eq!(e.ci, Some((5.0, 5.0)));
        let e = ci_na(&base.with_variance(4.0), 0.95).unwrap();
        let (lo, hi) = e.ci.unwrap();
        assert!((lo - (5.0 - 1.959964 * 2.0)).abs() < 1e-5);
        assert!((hi - (5.0 + 1.959964 * 2.0)).abs() < 1e-5);
        let e = ci_na(&base.with_variance(100.0), 0.95).unwrap();
        assert_eq!(e.ci.unwrap().0, 0.0);
        assert!(ci_na(&base.with_variance(1.0), 1.0).is_err());
    }

    #[test]
    fn normal_critical_value() {
        assert!((normal_critical(0.95).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn estimate_rss_wires_everything() {
        let e = estimate_rss(&hiv(), 200.0, 0.95).unwrap();
        assert_eq!(e.value, 39.8);
        assert!(e.variance.is_some() && e.ci.is_some());
        let e = estimate_rss(&hiv(), 50.0, 0.95).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.variance.is_none() && e.ci.is_none());
    }
}
