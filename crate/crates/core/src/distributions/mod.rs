//! Parent lifetime distributions and the numerical primitives built on them.

mod quadrature;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use statrs::function::gamma::{gamma, gamma_lr, ln_gamma};

use crate::error::{Error, Result};

pub(crate) use quadrature::CompensatedSum;
pub use quadrature::{integrate, QuadratureConfig};

/// Probability-scale tolerance for bisection quantiles.
pub const QUANTILE_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 400;

/// A continuous, nonnegative lifetime law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Density `(3/2)(1 - x)^2` on `(0, 2)`.
    RescaledBeta,
    Gamma { shape: f64, scale: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Distribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self::Exponential {
            rate: positive("rate", rate)?,
        })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self::Weibull {
            shape: positive("shape", shape)?,
            scale: positive("scale", scale)?,
        })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self::Gamma {
            shape: positive("shape", shape)?,
            scale: positive("scale", scale)?,
        })
    }

    /// Support as `[lower, upper)`; `upper` may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::RescaledBeta => (0.0, 2.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x >= hi {
            return 0.0;
        }
        match *self {
            Self::Exponential { rate } => rate * (-rate * x).exp(),
            Self::Weibull { shape, scale } => {
                let z = x / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
            Self::RescaledBeta => 1.5 * (1.0 - x).powi(2),
            Self::Gamma { shape, scale } => {
                if x == 0.0 {
                    return if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    };
                }
                ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
            }
        }
    }

    /// `F(t)`, clamped to 0 below the support and 1 above it.
    pub fn cdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        match *self {
            Self::Exponential { rate } => -(-rate * t).exp_m1(),
            Self::Weibull { shape, scale } => -(-(t / scale).powf(shape)).exp_m1(),
            Self::RescaledBeta => 0.5 * (1.0 - (1.0 - t).powi(3)),
            Self::Gamma { shape, scale } => gamma_lr(shape, t / scale),
        }
    }

    /// Inverse CDF on `(0, 1)`. Closed form where one exists, bisection on
    /// [`cdf`](Self::cdf) for the gamma law.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidProbability(q));
        }
        Ok(match *self {
            Self::Exponential { rate } => -(-q).ln_1p() / rate,
            Self::Weibull { shape, scale } => scale * (-(-q).ln_1p()).powf(1.0 / shape),
            Self::RescaledBeta => 1.0 - (1.0 - 2.0 * q).cbrt(),
            Self::Gamma { .. } => self.bisect_quantile(q),
        })
    }

    fn bisect_quantile(&self, q: f64) -> f64 {
        let mut lo = 0.0;
        let mut hi = self.mean().max(f64::MIN_POSITIVE);
        while self.cdf(hi) < q {
            lo = hi;
            hi *= 2.0;
        }
        let tol = QUANTILE_TOL * q.min(1.0 - q).min(1.0);
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.cdf(mid);
            if (fm - q).abs() <= tol {
                return mid;
            }
            if fm < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Maps a uniform in `(0, 1)` to a variate by inverse transform.
    pub fn from_uniform(&self, u: f64) -> f64 {
        // Uniforms produced by `open_unit` never hit the endpoints.
        self.quantile(u).expect("uniform must lie in (0, 1)")
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_uniform(open_unit(rng))
    }

    /// `count` i.i.d. draws, one uniform each.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            Self::RescaledBeta => 1.0,
            Self::Gamma { shape, scale } => shape * scale,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / (rate * rate),
            Self::Weibull { shape, scale } => {
                let g1 = gamma(1.0 + 1.0 / shape);
                scale * scale * (gamma(1.0 + 2.0 / shape) - g1 * g1)
            }
            Self::RescaledBeta => 0.6,
            Self::Gamma { shape, scale } => shape * scale * scale,
        }
    }
}

/// A uniform on the open interval `(0, 1)` built from the top 53 bits of one
/// `u64`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) as f64 + 0.5) * SCALE
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "exp({rate})"),
            Self::Weibull { shape, scale } => write!(f, "weibull({shape},{scale})"),
            Self::RescaledBeta => write!(f, "rbeta"),
            Self::Gamma { shape, scale } => write!(f, "gamma({shape},{scale})"),
        }
    }
}

fn parse_args(s: &str, name: &str) -> Result<Vec<f64>> {
    let inner = s
        .strip_prefix(name)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("malformed distribution '{s}'")))?;
    inner
        .split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad parameter '{a}' in '{s}': {e}")))
        })
        .collect()
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "exp1" => return Self::exponential(1.0),
            "rbeta" | "rbeta(1,3)" => return Ok(Self::RescaledBeta),
            _ => {}
        }
        let (name, arity) = if s.starts_with("exp(") {
            ("exp", 1)
        } else if s.starts_with("weibull(") {
            ("weibull", 2)
        } else if s.starts_with("gamma(") {
            ("gamma", 2)
        } else {
            return Err(Error::Parse(format!("unknown distribution '{s}'")));
        };
        let args = parse_args(&s, name)?;
        if args.len() != arity {
            return Err(Error::Parse(format!(
                "'{name}' takes {arity} parameter(s), got {}",
                args.len()
            )));
        }
        match name {
            "exp" => Self::exponential(args[0]),
            "weibull" => Self::weibull(args[0], args[1]),
            _ => Self::gamma(args[0], args[1]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn study_laws() -> Vec<Distribution> {
        vec![
            Distribution::exponential(1.0).unwrap(),
            Distribution::weibull(4.0, 3.0).unwrap(),
            Distribution::RescaledBeta,
            Distribution::gamma(8.0, 40.0).unwrap(),
        ]
    }

    fn bisect(d: &Distribution, q: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        while d.cdf(hi) < q {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if d.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        assert_eq!(e.cdf(0.0), 0.0);
        assert!((e.cdf(1.0) - 0.632121).abs() < 1e-6);
        assert_eq!(Distribution::RescaledBeta.cdf(2.0), 1.0);
        assert_eq!(Distribution::RescaledBeta.cdf(-1.0), 0.0);
    }

    #[test]
    fn cdf_agrees_with_density_quadrature() {
        let cfg = QuadratureConfig::default();
        let e = Distribution::exponential(1.0).unwrap();
        let v = integrate(|x| e.density(x), 0.0, 1.0, &cfg).unwrap();
        assert!((v - e.cdf(1.0)).abs() < 1e-9);
        let rb = Distribution::RescaledBeta;
        let full = integrate(|x| rb.density(x), 0.0, 2.0, &cfg).unwrap();
        assert!((full - 1.0).abs() < 1e-9);
        for t in [0.3, 1.0, 1.7] {
            let v = integrate(|x| rb.density(x), 0.0, t, &cfg).unwrap();
            assert!((v - (1.0 - (1.0 - t).powi(3)) / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_examples() {
        let e = Distribution::exponential(1.0).unwrap();
        let q = e.quantile(0.5).unwrap();
        assert!((q - bisect(&e, 0.5)).abs() < 1e-12);
        assert!((q - std::f64::consts::LN_2).abs() < 1e-15);
        let rb = Distribution::RescaledBeta;
        let q = rb.quantile(0.5).unwrap();
        // the density vanishes at 1, so bisection resolves x only to ~cbrt(eps)
        assert!((q - bisect(&rb, 0.5)).abs() < 1e-5);
        assert!((q - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_rejects_bad_probability() {
        let e = Distribution::exponential(1.0).unwrap();
        for q in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(e.quantile(q), Err(Error::InvalidProbability(_))));
        }
    }

    #[test]
    fn quantile_cdf_round_trips() {
        for d in study_laws() {
            for i in 1..=50 {
                let q = i as f64 / 51.0;
                let t = d.quantile(q).unwrap();
                assert!((d.cdf(t) - q).abs() < 1e-11, "{d} q={q}");
                let back = d.quantile(d.cdf(t)).unwrap();
                assert!((back - t).abs() <= 1e-8 * t.max(1.0), "{d} t={t} back={back}");
            }
        }
    }

    #[test]
    fn gamma_bisection_is_tight() {
        let g = Distribution::gamma(8.0, 40.0).unwrap();
        for q in [1e-9, 0.01, 0.5, 0.99, 1.0 - 1e-9] {
            let t = g.quantile(q).unwrap();
            assert!((g.cdf(t) - q).abs() <= QUANTILE_TOL, "q={q}");
        }
    }

    #[test]
    fn forced_uniform_is_inverse_transform() {
        for d in study_laws() {
            let t0 = d.quantile(0.37).unwrap();
            let u = d.cdf(t0);
            assert!((d.from_uniform(u) - t0).abs() < 1e-8 * t0.max(1.0));
        }
    }

    #[test]
    fn sample_means_within_four_standard_errors() {
        for d in [
            Distribution::exponential(1.0).unwrap(),
            Distribution::gamma(8.0, 40.0).unwrap(),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let n = 100_000;
            let xs = d.sample(&mut rng, n);
            let mean = xs.iter().sum::<f64>() / n as f64;
            let se = (d.variance() / n as f64).sqrt();
            assert!((mean - d.mean()).abs() < 4.0 * se, "{d}: {mean}");
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = Distribution::weibull(4.0, 3.0).unwrap();
        let a = d.sample(&mut ChaCha8Rng::seed_from_u64(5), 100);
        let b = d.sample(&mut ChaCha8Rng::seed_from_u64(5), 100);
        assert_eq!(a, b);
    }

    #[test]
    fn analytic_moments_match_quadrature() {
        let cfg = QuadratureConfig::default();
        let rb = Distribution::RescaledBeta;
        let m = integrate(|x| x * rb.density(x), 0.0, 2.0, &cfg).unwrap();
        assert!((m - rb.mean()).abs() < 1e-9);
        let w = Distribution::weibull(4.0, 3.0).unwrap();
        let m = integrate(|x| x * w.density(x), 0.0, 12.0, &cfg).unwrap();
        assert!((m - w.mean()).abs() < 1e-8);
    }

    #[test]
    fn parses_cli_names() {
        assert_eq!("exp1".parse::<Distribution>().unwrap(), Distribution::exponential(1.0).unwrap());
        assert_eq!("exp(2.5)".parse::<Distribution>().unwrap(), Distribution::exponential(2.5).unwrap());
        assert_eq!("weibull(4,3)".parse::<Distribution>().unwrap(), Distribution::weibull(4.0, 3.0).unwrap());
        assert_eq!("rbeta".parse::<Distribution>().unwrap(), Distribution::RescaledBeta);
        assert_eq!("gamma(8, 40)".parse::<Distribution>().unwrap(), Distribution::gamma(8.0, 40.0).unwrap());
        assert!("normal(0,1)".parse::<Distribution>().is_err());
        assert!("weibull(4)".parse::<Distribution>().is_err());
        assert!("exp(-1)".parse::<Distribution>().is_err());
        for d in study_laws() {
            assert_eq!(d.to_string().parse::<Distribution>().unwrap(), d);
        }
    }
}
