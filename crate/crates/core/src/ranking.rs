//! Order statistics, judged-rank CDFs under imperfect ranking, and draws of
//! ranked set samples.

use std::fmt;

use rand::Rng;

use crate::distributions::{open_unit, Distribution};
use crate::error::{Error, Result};

/// How the judge assigns ranks within a set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankingModel {
    Perfect,
    /// Correct with probability `p`, otherwise a uniformly random unit of the set.
    FractionRandom { p: f64 },
    /// Correct with probability `p`, otherwise one of the two adjacent order
    /// statistics with probability `(1 - p) / 2` each (clamped at the ends).
    FractionNeighbor { p: f64 },
}

fn check_p(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidParameter(format!("ranking probability must be in [0, 1], got {p}")))
    }
}

impl RankingModel {
    pub fn fraction_random(p: f64) -> Result<Self> {
        Ok(Self::FractionRandom { p: check_p(p)? })
    }

    pub fn fraction_neighbor(p: f64) -> Result<Self> {
        Ok(Self::FractionNeighbor { p: check_p(p)? })
    }

    /// Builds a model from its CLI name (`perfect`, `random`, `neighbor`).
    pub fn from_name(name: &str, p: f64) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "perfect" => Ok(Self::Perfect),
            "random" => Self::fraction_random(p),
            "neighbor" | "neighbour" => Self::fraction_neighbor(p),
            other => Err(Error::Parse(format!("unknown ranking model '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Perfect => "perfect",
            Self::FractionRandom { .. } => "random",
            Self::FractionNeighbor { .. } => "neighbor",
        }
    }

    /// Probability of a correct judgement.
    pub fn p(&self) -> f64 {
        match *self {
            Self::Perfect => 1.0,
            Self::FractionRandom { p } | Self::FractionNeighbor { p } => p,
        }
    }

    /// Zero-based index of the sorted set that is measured for target rank
    /// `r` (zero-based), given one selection uniform `u`.
    fn select(&self, r: usize, k: usize, u: f64) -> usize {
        match *self {
            Self::Perfect => r,
            Self::FractionRandom { p } => {
                if u < p {
                    r
                } else {
                    (((u - p) / (1.0 - p) * k as f64) as usize).min(k - 1)
                }
            }
            Self::FractionNeighbor { p } => {
                if u < p {
                    r
                } else if u < p + 0.5 * (1.0 - p) {
                    r.saturating_sub(1)
                } else {
                    (r + 1).min(k - 1)
                }
            }
        }
    }
}

impl fmt::Display for RankingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_rank(k: usize, r: usize) -> Result<()> {
    if r >= 1 && r <= k {
        Ok(())
    } else {
        Err(Error::RankOutOfRange { r, k })
    }
}

/// `F_(r)` expressed through the parent probability `prob = F(t)`:
/// `sum_{j=r}^{k} C(k, j) prob^j (1 - prob)^(k - j)`.
pub fn order_stat_cdf_from_prob(prob: f64, k: usize, r: usize) -> Result<f64> {
    check_rank(k, r)?;
    if prob <= 0.0 {
        return Ok(0.0);
    }
    if prob >= 1.0 {
        return Ok(1.0);
    }
    let q = 1.0 - prob;
    let mut coef = 1.0;
    let mut sum = 0.0;
    for j in 0..=k {
        if j >= r {
            sum += coef * prob.powi(j as i32) * q.powi((k - j) as i32);
        }
        coef = coef * (k - j) as f64 / (j + 1) as f64;
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// CDF of the `r`-th smallest of `k` i.i.d. draws from `dist`.
pub fn order_stat_cdf(dist: &Distribution, k: usize, r: usize, t: f64) -> Result<f64> {
    order_stat_cdf_from_prob(dist.cdf(t), k, r)
}

/// `F_[r]` as a function of the parent probability.
pub fn judged_cdf_from_prob(prob: f64, model: &RankingModel, k: usize, r: usize) -> Result<f64> {
    check_rank(k, r)?;
    let exact = order_stat_cdf_from_prob(prob, k, r)?;
    Ok(match *model {
        RankingModel::Perfect => exact,
        RankingModel::FractionRandom { p } => p * exact + (1.0 - p) * prob,
        RankingModel::FractionNeighbor { p } => {
            let below = order_stat_cdf_from_prob(prob, k, r.saturating_sub(1).max(1))?;
            let above = order_stat_cdf_from_prob(prob, k, (r + 1).min(k))?;
            0.5 * (1.0 - p) * below + p * exact + 0.5 * (1.0 - p) * above
        }
    })
}

/// CDF of the unit judged to have rank `r` in a set of size `k`.
pub fn judged_cdf(
    dist: &Distribution,
    model: &RankingModel,
    k: usize,
    r: usize,
    t: f64,
) -> Result<f64> {
    judged_cdf_from_prob(dist.cdf(t), model, k, r)
}

/// A balanced ranked set sample: `m` cycles, each measuring one unit at every
/// judged rank `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSetSample {
    k: usize,
    m: usize,
    // rank-major: entry (r, j) lives at (r - 1) * m + (j - 1)
    values: Vec<f64>,
}

impl RankedSetSample {
    /// Builds a sample from one row per rank, each holding `m` cycle values.
    pub fn from_rank_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::EmptySample);
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::EmptySample);
        }
        if rows.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParameter(
                "every rank must have the same number of cycles".into(),
            ));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "sample values must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { k, m, values })
    }

    /// Builds a sample from one row per cycle, each holding `k` rank values.
    pub fn from_cycle_rows(cycles: &[Vec<f64>]) -> Result<Self> {
        let m = cycles.len();
        if m == 0 {
            return Err(Error::EmptySample);
        }
        let k = cycles[0].len();
        if cycles.iter().any(|c| c.len() != k) {
            return Err(Error::InvalidParameter(
                "every cycle must have the same number of ranks".into(),
            ));
        }
        let rows = (0..k).map(|r| cycles.iter().map(|c| c[r]).collect()).collect();
        Self::from_rank_rows(rows)
    }

    pub fn set_size(&self) -> usize {
        self.k
    }

    pub fn cycles(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The `m` measured values with judged rank `r` (one-based).
    pub fn rank(&self, r: usize) -> &[f64] {
        assert!(r >= 1 && r <= self.k, "rank {r} out of 1..={}", self.k);
        &self.values[(r - 1) * self.m..r * self.m]
    }

    /// `X_[r]j` with one-based rank and cycle.
    pub fn value(&self, r: usize, j: usize) -> f64 {
        assert!(j >= 1 && j <= self.m, "cycle {j} out of 1..={}", self.m);
        self.rank(r)[j - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rank_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.m)
    }

    /// `(cycle, rank, value)` triples ordered by cycle, then rank.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..=self.m).flat_map(move |j| (1..=self.k).map(move |r| (j, r, self.value(r, j))))
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            k: self.k,
            m: self.m,
            values: self.values.iter().copied().map(f).collect(),
        }
    }
}

/// Draws a ranked set sample.
///
/// Cycles are generated in order; within a cycle ranks go `1..=k`. Each unit
/// consumes `k` uniforms for a fresh set followed by one selection uniform.
pub fn draw_rss<R: Rng + ?Sized>(
    dist: &Distribution,
    model: &RankingModel,
    k: usize,
    m: usize,
    rng: &mut R,
) -> Result<RankedSetSample> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "set size and cycle count must be positive, got k={k}, m={m}"
        )));
    }
    let mut values = vec![0.0; k * m];
    let mut set = vec![0.0; k];
    for j in 0..m {
        for r in 0..k {
            for x in set.iter_mut() {
                *x = dist.draw(rng);
            }
            set.sort_by(f64::total_cmp);
            let idx = model.select(r, k, open_unit(rng));
            values[r * m + j] = set[idx];
        }
    }
    Ok(RankedSetSample { k, m, values })
}

/// `n` i.i.d. parent draws.
pub fn draw_srs<R: Rng + ?Sized>(dist: &Distribution, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(dist.sample(rng, n))
}
