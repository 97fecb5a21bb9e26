//! Nonparametric estimation of the mean past lifetime (MPL) under ranked set
//! sampling.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`]: parent laws, adaptive Simpson quadrature, quantiles.
//! * [`ranking`]: order-statistic and judged-rank CDFs, RSS/SRS sample draws.
//! * [`estimators`]: `K_SRS`, `K_RSS`, the RSS empirical CDF, plug-in variance
//!   and normal-approximation intervals.
//! * [`asymptotics`]: exact population quantities, asymptotic variances, ARE
//!   and the exact finite-sample moments of `K_RSS` by enumeration.
//! * [`harness`]: reproducible Monte Carlo efficiency studies and the HIV
//!   demonstration data.
//!
//! Monte Carlo loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise; results are bit-identical either way.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod io;
mod par;
pub mod ranking;

pub use asymptotics::{MomentPair, PopulationContext};
pub use distributions::{Distribution, QuadratureConfig};
pub use error::{Error, Result};
pub use estimators::MplEstimate;
pub use harness::{EfficiencyReport, ExperimentConfig};
pub use par::with_threads;
pub use ranking::{RankedSetSample, RankingModel};
