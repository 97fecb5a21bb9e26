//! Exact population quantities behind the estimators: `K(t)`, `sigma^2(t)`,
//! their judged-rank analogues, the asymptotic variances under SRS and RSS,
//! the ARE, and exact finite-sample moments of `K_RSS(t)`.

use statrs::function::gamma::ln_gamma;

use crate::distributions::{integrate, CompensatedSum, Distribution, QuadratureConfig};
use crate::error::{Error, Result};
use crate::ranking::{judged_cdf_from_prob, RankingModel};

/// CDF values below this are treated as zero mass.
pub const ZERO_MASS: f64 = 1e-12;

/// Default cap on `(m + 1)^k` for [`exact_moments_krss`].
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Everything the exact formulas share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationContext {
    pub dist: Distribution,
    pub model: RankingModel,
    pub k: usize,
    pub quad: QuadratureConfig,
}

impl PopulationContext {
    pub fn new(dist: Distribution, model: RankingModel, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("set size k must be at least 1".into()));
        }
        Ok(Self {
            dist,
            model,
            k,
            quad: QuadratureConfig::default(),
        })
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    /// `F_[r](x)` for this context.
    pub fn judged_cdf(&self, r: usize, x: f64) -> Result<f64> {
        judged_cdf_from_prob(self.dist.cdf(x), &self.model, self.k, r)
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if r >= 1 && r <= self.k {
            Ok(())
        } else {
            Err(Error::RankOutOfRange { r, k: self.k })
        }
    }
}

/// Mean and variance of a scalar statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub mean: f64,
    pub variance: f64,
}

/// The integrals of a CDF `G` over `[0, t]` that determine the conditional
/// law of `t - X` given `X <= t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PastIntegrals {
    pub t: f64,
    /// `G(t)`
    pub mass: f64,
    /// `int_0^t G(x) dx`
    pub first: f64,
    /// `2 int_0^t (t - x) G(x) dx`, i.e. `G(t) E[(t - X)^2 | X <= t]`
    pub second: f64,
}

impl PastIntegrals {
    pub fn compute<G: Fn(f64) -> f64>(cdf: G, t: f64, quad: &QuadratureConfig) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("t must be positive and finite, got {t}")));
        }
        let mass = cdf(t);
        let first = integrate(&cdf, 0.0, t, quad)?;
        let second = 2.0 * integrate(|x| (t - x) * cdf(x), 0.0, t, quad)?;
        Ok(Self {
            t,
            mass,
            first,
            second,
        })
    }

    fn require_mass(&self) -> Result<()> {
        if self.mass < ZERO_MASS {
            Err(Error::ZeroMass {
                t: self.t,
                mass: self.mass,
            })
        } else {
            Ok(())
        }
    }

    /// `E[t - X | X <= t]`.
    pub fn mpl(&self) -> Result<f64> {
        self.require_mass()?;
        Ok(self.first / self.mass)
    }

    /// `Var(t - X | X <= t)`.
    pub fn variance(&self) -> Result<f64> {
        self.require_mass()?;
        let k = self.first / self.mass;
        Ok((self.second / self.mass - k * k).max(0.0))
    }

    /// `G(t) * Var(t - X | X <= t)` without dividing by a small mass twice.
    fn weighted_variance(&self) -> f64 {
        if self.mass < ZERO_MASS {
            return 0.0;
        }
        (self.second - self.first * self.first / self.mass).max(0.0)
    }
}

fn parent(dist: &Distribution, t: f64, quad: &QuadratureConfig) -> Result<PastIntegrals> {
    PastIntegrals::compute(|x| dist.cdf(x), t, quad)
}

fn judged(ctx: &PopulationContext, r: usize, t: f64) -> Result<PastIntegrals> {
    ctx.check_rank(r)?;
    let (model, k) = (ctx.model, ctx.k);
    PastIntegrals::compute(
        |x| judged_cdf_from_prob(ctx.dist.cdf(x), &model, k, r).expect("rank checked"),
        t,
        &ctx.quad,
    )
}

/// `K(t) = int_0^t F / F(t)`.
pub fn mpl_exact(dist: &Distribution, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    parent(dist, t, quad)?.mpl()
}

/// `sigma^2(t) = Var(t - X | X <= t)`.
pub fn sigma2_exact(dist: &Distribution, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    parent(dist, t, quad)?.variance()
}

/// `K_[r](t) = E[t - X_[r] | X_[r] <= t]`.
pub fn mpl_judged(ctx: &PopulationContext, r: usize, t: f64) -> Result<f64> {
    judged(ctx, r, t)?.mpl()
}

/// `sigma^2_[r](t) = Var(t - X_[r] | X_[r] <= t)`.
pub fn sigma2_judged(ctx: &PopulationContext, r: usize, t: f64) -> Result<f64> {
    judged(ctx, r, t)?.variance()
}

/// Asymptotic variance of `sqrt(n) (K_SRS - K)`: `sigma^2(t) / F(t)`.
pub fn avar_srs(dist: &Distribution, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    let p = parent(dist, t, quad)?;
    Ok(p.variance()? / p.mass)
}

/// Parent and per-rank integrals at one `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub parent: PastIntegrals,
    pub ranks: Vec<PastIntegrals>,
}

impl RankProfile {
    pub fn compute(ctx: &PopulationContext, t: f64) -> Result<Self> {
        let parent = parent(&ctx.dist, t, &ctx.quad)?;
        parent.require_mass()?;
        let ranks = (1..=ctx.k).map(|r| judged(ctx, r, t)).collect::<Result<_>>()?;
        Ok(Self { parent, ranks })
    }

    pub fn avar_srs(&self) -> f64 {
        self.parent.weighted_variance() / (self.parent.mass * self.parent.mass)
    }

    /// `(1 / (k F^2)) sum_r [sigma2_[r] F_[r] + F_[r] (1 - F_[r]) (K_[r] - K)^2]`.
    pub fn avar_rss(&self) -> f64 {
        let f = self.parent.mass;
        let kt = self.parent.first / f;
        let mut acc = CompensatedSum::default();
        for rank in &self.ranks {
            if rank.mass < ZERO_MASS {
                continue;
            }
            let between = rank.first - kt * rank.mass;
            acc.add(rank.weighted_variance());
            acc.add((1.0 - rank.mass) * between * between / rank.mass);
        }
        acc.value() / (self.ranks.len() as f64 * f * f)
    }

    pub fn are(&self) -> f64 {
        self.avar_srs() / self.avar_rss()
    }
}

/// Asymptotic variance of `sqrt(n) (K_RSS - K)`.
pub fn avar_rss(ctx: &PopulationContext, t: f64) -> Result<f64> {
    Ok(RankProfile::compute(ctx, t)?.avar_rss())
}

/// `sigma^2_SRS(t) / sigma^2_RSS(t)`.
pub fn are(ctx: &PopulationContext, t: f64) -> Result<f64> {
    Ok(RankProfile::compute(ctx, t)?.are())
}

fn binomial_pmf(m: usize, prob: f64) -> Vec<f64> {
    if prob <= 0.0 {
        let mut v = vec![0.0; m + 1];
        v[0] = 1.0;
        return v;
    }
    if prob >= 1.0 {
        let mut v = vec![0.0; m + 1];
        v[m] = 1.0;
        return v;
    }
    let (lp, lq) = (prob.ln(), (-prob).ln_1p());
    let lm = ln_gamma(m as f64 + 1.0);
    (0..=m)
        .map(|v| {
            let lc = lm - ln_gamma(v as f64 + 1.0) - ln_gamma((m - v) as f64 + 1.0);
            (lc + v as f64 * lp + (m - v) as f64 * lq).exp()
        })
        .collect()
}

/// Exact mean and variance of `K_RSS(t)` with `m` cycles, by enumerating
/// every count vector `V = (V_1, .., V_k)` with `V_r ~ Bin(m, F_[r](t))`
/// independent.
///
/// Given `V`, `K_RSS` has mean `sum V_r K_[r] / S` and variance
/// `sum V_r sigma2_[r] / S^2` with `S = sum V_r`; the all-zero state is the
/// zero-convention value and contributes nothing.
pub fn exact_moments_krss(ctx: &PopulationContext, m: usize, t: f64) -> Result<MomentPair> {
    exact_moments_krss_with_limit(ctx, m, t, ENUMERATION_LIMIT)
}

pub fn exact_moments_krss_with_limit(
    ctx: &PopulationContext,
    m: usize,
    t: f64,
    limit: u128,
) -> Result<MomentPair> {
    if m == 0 {
        return Err(Error::InvalidParameter("cycle count m must be at least 1".into()));
    }
    let states = (m as u128 + 1).checked_pow(ctx.k as u32).unwrap_or(u128::MAX);
    if states > limit {
        return Err(Error::StateSpaceLimitExceeded { states, limit });
    }
    let k = ctx.k;
    let mut means = Vec::with_capacity(k);
    let mut vars = Vec::with_capacity(k);
    let mut pmfs = Vec::with_capacity(k);
    for r in 1..=k {
        let p = judged(ctx, r, t)?;
        if p.mass < ZERO_MASS {
            means.push(0.0);
            vars.push(0.0);
            pmfs.push(binomial_pmf(m, 0.0));
        } else {
            means.push(p.mpl()?);
            vars.push(p.variance()?);
            pmfs.push(binomial_pmf(m, p.mass));
        }
    }

    let mut mean = CompensatedSum::default();
    let mut second = CompensatedSum::default();
    let mut within = CompensatedSum::default();
    let mut v = vec![0usize; k];
    for _ in 0..states {
        let s: usize = v.iter().sum();
        if s > 0 {
            let prob: f64 = v.iter().zip(&pmfs).map(|(&vr, pmf)| pmf[vr]).product();
            if prob > 0.0 {
                let sf = s as f64;
                let cond_mean = v.iter().zip(&means).map(|(&vr, kr)| vr as f64 * kr).sum::<f64>() / sf;
                let cond_var =
                    v.iter().zip(&vars).map(|(&vr, s2)| vr as f64 * s2).sum::<f64>() / (sf * sf);
                mean.add(prob * cond_mean);
                second.add(prob * cond_mean * cond_mean);
                within.add(prob * cond_var);
            }
        }
        // mixed-radix increment, rank 1 fastest
        for digit in v.iter_mut() {
            *digit += 1;
            if *digit <= m {
                break;
            }
            *digit = 0;
        }
    }
    let mu = mean.value();
    Ok(MomentPair {
        mean: mu,
        variance: (within.value() + second.value() - mu * mu).max(0.0),
    })
}
