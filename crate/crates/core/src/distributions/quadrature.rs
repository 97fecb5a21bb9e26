//! Adaptive Simpson quadrature on a finite interval.

use crate::error::{Error, Result};

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive, got abs={abs_tol}, rel={rel_tol}"
            )));
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 1_000_000,
        }
    }
}

/// Number of equal panels the interval is cut into before adaptation starts.
/// Guards against a lucky agreement of the coarse and refined estimates.
const INITIAL_PANELS: usize = 16;

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Integrates `f` over `[a, b]` by adaptive Simpson.
///
/// The global tolerance is `max(abs_tol, rel_tol * |I|)` where `I` is the
/// composite estimate on the initial panels; each segment receives a share of
/// it proportional to its width. Accepted segments contribute the
/// Richardson-corrected value `S2 + (S2 - S1) / 15`.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a <= b) {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let width = b - a;
    let h = width / INITIAL_PANELS as f64;
    let mut stack = Vec::with_capacity(64);
    let mut coarse = CompensatedSum::default();
    let mut f_left = f(a);
    for i in 0..INITIAL_PANELS {
        let sa = a + h * i as f64;
        let sb = if i + 1 == INITIAL_PANELS {
            b
        } else {
            a + h * (i + 1) as f64
        };
        let fm = f(0.5 * (sa + sb));
        let fb = f(sb);
        let whole = simpson(sa, sb, f_left, fm, fb);
        coarse.add(whole);
        stack.push(Segment {
            a: sa,
            b: sb,
            fa: f_left,
            fm,
            fb,
            whole,
        });
        f_left = fb;
    }
    // Process left to right so the accumulation order is fixed.
    stack.reverse();
    let tol = cfg.abs_tol.max(cfg.rel_tol * coarse.value().abs());

    let mut total = CompensatedSum::default();
    let mut subdivisions = 0usize;
    while let Some(seg) = stack.pop() {
        let m = 0.5 * (seg.a + seg.b);
        let lm = 0.5 * (seg.a + m);
        let rm = 0.5 * (m + seg.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(seg.a, m, seg.fa, flm, seg.fm);
        let right = simpson(m, seg.b, seg.fm, frm, seg.fb);
        let refined = left + right;
        let diff = refined - seg.whole;
        let local_tol = tol * (seg.b - seg.a) / width;
        let exhausted = lm <= seg.a || rm >= seg.b || m <= seg.a || m >= seg.b;
        if diff.abs() <= 15.0 * local_tol || exhausted {
            total.add(refined + diff / 15.0);
            continue;
        }
        subdivisions += 1;
        if subdivisions > cfg.max_subdivisions {
            return Err(Error::SubdivisionLimitExceeded(cfg.max_subdivisions));
        }
        stack.push(Segment {
            a: m,
            b: seg.b,
            fa: seg.fm,
            fm: frm,
            fb: seg.fb,
            whole: right,
        });
        stack.push(Segment {
            a: seg.a,
            b: m,
            fa: seg.fa,
            fm: flm,
            fb: seg.fm,
            whole: left,
        });
    }
    Ok(total.value())
}
