//! Reproducible Monte Carlo studies comparing `K_RSS` with `K_SRS`, exact
//! curve sweeps, and the HIV demonstration data.
//!
//! Replication `i` always draws from substream `i` of the configured seed:
//! first the SRS sample, then the RSS sample. Replications are grouped into
//! `batches` contiguous blocks (and fixed-size chunks inside each block) so
//! the reduction order never depends on how many threads ran the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{mpl_exact, PopulationContext, RankProfile};
use crate::distributions::{Distribution, QuadratureConfig};
use crate::error::{Error, Result};
use crate::estimators::{estimate_rss, k_rss, k_srs, MplEstimate};
use crate::par::map_indexed;
use crate::ranking::{draw_rss, draw_srs, RankedSetSample, RankingModel};

pub const DEFAULT_REPLICATIONS: usize = 100_000;
pub const DEFAULT_BATCHES: usize = 20;
pub const MAX_SET_SIZE: usize = 20;

/// Replications per parallel work item.
const CHUNK: usize = 1024;

/// `Q_0.05, Q_0.10, .., Q_0.95` as probabilities.
pub fn quantile_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 / 20.0).collect()
}

/// Independent stream for one replication. ChaCha's 64-bit stream id is the
/// replication index, so the stream depends only on `(seed, index)`.
pub fn rng_substream(seed: u64, replication_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication_index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dist: Distribution,
    pub model: RankingModel,
    /// Total sample size per design; `n / k` cycles for RSS.
    pub n: usize,
    pub k: usize,
    pub replications: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub batches: usize,
}

impl ExperimentConfig {
    pub fn new(dist: Distribution, model: RankingModel, n: usize, k: usize) -> Self {
        Self {
            dist,
            model,
            n,
            k,
            replications: DEFAULT_REPLICATIONS,
            grid: quantile_grid(),
            seed: 0,
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn replications(mut self, r: usize) -> Self {
        self.replications = r;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn batches(mut self, b: usize) -> Self {
        self.batches = b;
        self
    }

    pub fn grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn cycles(&self) -> usize {
        self.n / self.k
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.k == 0 || self.k > MAX_SET_SIZE {
            return bad(format!("set size k must be in 1..={MAX_SET_SIZE}, got {}", self.k));
        }
        if self.n == 0 || !self.n.is_multiple_of(self.k) {
            return bad(format!("n={} must be a positive multiple of k={}", self.n, self.k));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.batches == 0 || self.batches > self.replications {
            return bad(format!(
                "batches must be in 1..=replications ({}), got {}",
                self.replications, self.batches
            ));
        }
        if self.grid.is_empty() {
            return bad("quantile grid is empty".into());
        }
        if self.grid.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return bad("grid probabilities must lie in (0, 1)".into());
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("grid probabilities must be strictly increasing".into());
        }
        Ok(())
    }

    fn batch_bounds(&self, b: usize) -> (usize, usize) {
        let r = self.replications;
        (b * r / self.batches, (b + 1) * r / self.batches)
    }
}

/// Running sums of `estimate - target` for both designs at one `t`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct PointAcc {
    count: usize,
    srs_sum: f64,
    srs_sq: f64,
    rss_sum: f64,
    rss_sq: f64,
    srs_zero: usize,
    rss_zero: usize,
}

impl PointAcc {
    fn merge(&mut self, o: &PointAcc) {
        self.count += o.count;
        self.srs_sum += o.srs_sum;
        self.srs_sq += o.srs_sq;
        self.rss_sum += o.rss_sum;
        self.rss_sq += o.rss_sq;
        self.srs_zero += o.srs_zero;
        self.rss_zero += o.rss_zero;
    }

    fn mse_srs(&self) -> f64 {
        self.srs_sq / self.count as f64
    }

    fn mse_rss(&self) -> f64 {
        self.rss_sq / self.count as f64
    }
}

/// Per-batch accumulators for every `t`, reduced in replication order.
fn run_replications(cfg: &ExperimentConfig, ts: &[f64], targets: &[f64]) -> Vec<Vec<PointAcc>> {
    let m = cfg.cycles();
    let mut tasks = Vec::new();
    for b in 0..cfg.batches {
        let (lo, hi) = cfg.batch_bounds(b);
        let mut start = lo;
        while start < hi {
            let end = (start + CHUNK).min(hi);
            tasks.push((b, start, end));
            start = end;
        }
    }
    let partials = map_indexed(tasks.len(), |task| {
        let (_, lo, hi) = tasks[task];
        let mut acc = vec![PointAcc::default(); ts.len()];
        for i in lo..hi {
            let mut rng = rng_substream(cfg.seed, i as u64);
            let srs = draw_srs(&cfg.dist, cfg.n, &mut rng).expect("n validated");
            let rss = draw_rss(&cfg.dist, &cfg.model, cfg.k, m, &mut rng).expect("k, m validated");
            for ((a, &t), &target) in acc.iter_mut().zip(ts).zip(targets) {
                let es = k_srs(&srs, t).expect("t > 0");
                let er = k_rss(&rss, t).expect("t > 0");
                let ds = es.value - target;
                let dr = er.value - target;
                a.count += 1;
                a.srs_sum += ds;
                a.srs_sq += ds * ds;
                a.rss_sum += dr;
                a.rss_sq += dr * dr;
                a.srs_zero += usize::from(es.count_at_risk == 0);
                a.rss_zero += usize::from(er.count_at_risk == 0);
            }
        }
        acc
    });
    let mut batches = vec![vec![PointAcc::default(); ts.len()]; cfg.batches];
    for (&(b, _, _), part) in tasks.iter().zip(&partials) {
        for (acc, p) in batches[b].iter_mut().zip(part) {
            acc.merge(p);
        }
    }
    batches
}

/// Standard error of the mean of `xs` (sample standard deviation over sqrt(len)).
fn batch_stderr(xs: &[f64]) -> f64 {
    let b = xs.len();
    if b < 2 {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / b as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub q: f64,
    pub t: f64,
    /// Exact `K(t)` the squared errors are measured against.
    pub k_exact: f64,
    pub mse_srs: f64,
    pub mse_rss: f64,
    pub re: f64,
    pub re_stderr: f64,
    /// Fraction of replications where the estimator used the zero convention.
    pub zero_frac_srs: f64,
    pub zero_frac_rss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub rows: Vec<EfficiencyRow>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

/// Monte Carlo relative efficiency `MSE(K_SRS) / MSE(K_RSS)` on the
/// configured quantile grid, with batch-means standard errors.
pub fn simulate_re(cfg: &ExperimentConfig) -> Result<EfficiencyReport> {
    cfg.validate()?;
    let quad = QuadratureConfig::default();
    let ts = cfg
        .grid
        .iter()
        .map(|&q| cfg.dist.quantile(q))
        .collect::<Result<Vec<_>>>()?;
    let targets = ts
        .iter()
        .map(|&t| mpl_exact(&cfg.dist, t, &quad))
        .collect::<Result<Vec<_>>>()?;
    let batches = run_replications(cfg, &ts, &targets);

    let rows = (0..ts.len())
        .map(|i| {
            let mut total = PointAcc::default();
            for b in &batches {
                total.merge(&b[i]);
            }
            let batch_re: Vec<f64> = batches
                .iter()
                .map(|b| ratio(b[i].mse_srs(), b[i].mse_rss()))
                .collect();
            let reps = total.count as f64;
            EfficiencyRow {
                q: cfg.grid[i],
                t: ts[i],
                k_exact: targets[i],
                mse_srs: total.mse_srs(),
                mse_rss: total.mse_rss(),
                re: ratio(total.mse_srs(), total.mse_rss()),
                re_stderr: batch_stderr(&batch_re),
                zero_frac_srs: total.srs_zero as f64 / reps,
                zero_frac_rss: total.rss_zero as f64 / reps,
            }
        })
        .collect();
    Ok(EfficiencyReport { rows })
}

/// Monte Carlo summary of one estimator's sampling distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSummary {
    pub mean: f64,
    /// Absent with a single replication.
    pub variance: Option<f64>,
    pub mean_stderr: Option<f64>,
    pub variance_stderr: Option<f64>,
    pub zero_fraction: f64,
}

impl EstimatorSummary {
    pub fn moments(&self) -> Option<crate::asymptotics::MomentPair> {
        self.variance.map(|variance| crate::asymptotics::MomentPair {
            mean: self.mean,
            variance,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingDistribution {
    pub t: f64,
    pub k_exact: f64,
    pub srs: EstimatorSummary,
    pub rss: EstimatorSummary,
}

fn summarize(batches: &[PointAcc], target: f64, pick: impl Fn(&PointAcc) -> (f64, f64, usize)) -> EstimatorSummary {
    let mut n = 0usize;
    let (mut s, mut s2, mut z) = (0.0, 0.0, 0usize);
    let mut means = Vec::with_capacity(batches.len());
    let mut vars = Vec::with_capacity(batches.len());
    for b in batches {
        let (bs, bs2, bz) = pick(b);
        n += b.count;
        s += bs;
        s2 += bs2;
        z += bz;
        let c = b.count as f64;
        means.push(bs / c);
        if b.count > 1 {
            vars.push((bs2 - bs * bs / c) / (c - 1.0));
        }
    }
    let nf = n as f64;
    let variance = (n > 1).then(|| ((s2 - s * s / nf) / (nf - 1.0)).max(0.0));
    let finite = |x: f64| x.is_finite().then_some(x);
    EstimatorSummary {
        mean: target + s / nf,
        variance,
        mean_stderr: finite(batch_stderr(&means)),
        variance_stderr: if vars.len() == batches.len() {
            finite(batch_stderr(&vars))
        } else {
            None
        },
        zero_fraction: z as f64 / nf,
    }
}

/// Monte Carlo mean and variance of `K_SRS(t)` and `K_RSS(t)`.
pub fn simulate_sampling_distribution(cfg: &ExperimentConfig, t: f64) -> Result<SamplingDistribution> {
    cfg.validate()?;
    let k_exact = mpl_exact(&cfg.dist, t, &QuadratureConfig::default())?;
    let batches: Vec<PointAcc> = run_replications(cfg, &[t], &[k_exact])
        .into_iter()
        .map(|b| b[0])
        .collect();
    Ok(SamplingDistribution {
        t,
        k_exact,
        srs: summarize(&batches, k_exact, |b| (b.srs_sum, b.srs_sq, b.srs_zero)),
        rss: summarize(&batches, k_exact, |b| (b.rss_sum, b.rss_sq, b.rss_zero)),
    })
}

/// One point of an exact `K(t)` curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MplPoint {
    pub q: f64,
    pub t: f64,
    pub k: f64,
}

pub fn exact_mpl_curve(dist: &Distribution, grid: &[f64], quad: &QuadratureConfig) -> Result<Vec<MplPoint>> {
    map_indexed(grid.len(), |i| {
        let q = grid[i];
        let t = dist.quantile(q)?;
        Ok(MplPoint {
            q,
            t,
            k: mpl_exact(dist, t, quad)?,
        })
    })
    .into_iter()
    .collect()
}

/// One point of an exact ARE curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArePoint {
    pub q: f64,
    pub t: f64,
    pub avar_srs: f64,
    pub avar_rss: f64,
    pub are: f64,
}

pub fn exact_are_curve(ctx: &PopulationContext, grid: &[f64]) -> Result<Vec<ArePoint>> {
    map_indexed(grid.len(), |i| {
        let q = grid[i];
        let t = ctx.dist.quantile(q)?;
        let prof = RankProfile::compute(ctx, t)?;
        Ok(ArePoint {
            q,
            t,
            avar_srs: prof.avar_srs(),
            avar_rss: prof.avar_rss(),
            are: prof.are(),
        })
    })
    .into_iter()
    .collect()
}

/// Simulated HIV infection times in weeks: 6 cycles of set size 5, listed
/// cycle by cycle with ranks 1..5. The rank-4 value of cycle 3 (2447) is far
/// outside the rest of the data and is likely a misprint; it is kept as given.
pub const HIV_DATA: [[f64; 5]; 6] = [
    [192.0, 277.0, 293.0, 329.0, 376.0],
    [158.0, 256.0, 236.0, 411.0, 508.0],
    [137.0, 280.0, 451.0, 2447.0, 478.0],
    [171.0, 229.0, 143.0, 268.0, 248.0],
    [203.0, 232.0, 238.0, 367.0, 363.0],
    [287.0, 274.0, 415.0, 413.0, 323.0],
];

pub fn hiv_sample() -> RankedSetSample {
    let cycles: Vec<Vec<f64>> = HIV_DATA.iter().map(|c| c.to_vec()).collect();
    RankedSetSample::from_cycle_rows(&cycles).expect("fixture is well formed")
}

pub const DEMO_GRID_POINTS: usize = 40;
pub const DEMO_LEVEL: f64 = 0.95;

/// Equally spaced points from the smallest to the largest observation.
pub fn demo_grid(sample: &RankedSetSample) -> Vec<f64> {
    let lo = sample.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sample.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let step = (hi - lo) / (DEMO_GRID_POINTS - 1) as f64;
    (0..DEMO_GRID_POINTS)
        .map(|i| if i + 1 == DEMO_GRID_POINTS { hi } else { lo + step * i as f64 })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HivDemo {
    pub sample: RankedSetSample,
    pub curve: Vec<MplEstimate>,
}

/// The HIV example: the bundled fixture when `seed` is `None`, otherwise a
/// fresh Gamma(shape 8, scale 40) sample with k=5, m=6 under fraction-of-random
/// ranking with p=0.8, rounded to whole weeks. Returns the sample with
/// `K_RSS`, plug-in variance and a 95% interval over [`demo_grid`].
pub fn hiv_demo(seed: Option<u64>) -> Result<HivDemo> {
    let sample = match seed {
        None => hiv_sample(),
        Some(s) => {
            let dist = Distribution::gamma(8.0, 40.0)?;
            let model = RankingModel::fraction_random(0.8)?;
            let mut rng = rng_substream(s, 0);
            draw_rss(&dist, &model, 5, 6, &mut rng)?.map_values(f64::round)
        }
    };
    let curve = demo_grid(&sample)
        .into_iter()
        .map(|t| estimate_rss(&sample, t, DEMO_LEVEL))
        .collect::<Result<_>>()?;
    Ok(HivDemo { sample, curve })
}
