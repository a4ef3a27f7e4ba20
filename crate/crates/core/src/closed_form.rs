//! Analytic second-order correlation functions as cosine series in the
//! detector phase difference `Δ = δ₂ − δ₁`.
//!
//! Only the polarizer pairs built from π/4 and 3π/4 (and removed filters
//! next to one of them) have closed forms; every other combination is
//! evaluated by [`crate::oracle`].

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use crate::emitter::{
    canonical_angle, DetectorSetting, EmitterChain, PhysicalConstants, PolarizerSetting,
};
use crate::error::{Error, Result};
use crate::golden::golden_section_min;
use crate::oracle;

/// Value of the step function at zero. The correlation formulas use
/// `Θ(0) = 0`; the other convention exists only so verification can show
/// that it breaks oracle agreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeavisideConvention {
    #[default]
    ZeroAtOrigin,
    OneAtOrigin,
}

impl HeavisideConvention {
    pub fn step(self, x: i64) -> f64 {
        match self {
            HeavisideConvention::ZeroAtOrigin => (x > 0) as u8 as f64,
            HeavisideConvention::OneAtOrigin => (x >= 0) as u8 as f64,
        }
    }
}

/// `constant + Σ_{n=1}^{N} c_n cos(nΔ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeries {
    constant: f64,
    coefficients: Vec<f64>,
}

impl CosineSeries {
    pub fn new(constant: f64, coefficients: Vec<f64>) -> Self {
        Self {
            constant,
            coefficients,
        }
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluate with the Chebyshev recurrence `cos((n+1)x) = 2cos(x)cos(nx) − cos((n−1)x)`.
    pub fn eval(&self, delta: f64) -> f64 {
        let c1 = delta.cos();
        let two_c1 = 2.0 * c1;
        let (mut prev, mut cur) = (1.0, c1);
        let mut acc = self.constant;
        for &c in &self.coefficients {
            acc += c * cur;
            let next = two_c1 * cur - prev;
            prev = cur;
            cur = next;
        }
        acc
    }

    /// Term-wise sum of two series of the same length.
    pub fn plus(&self, other: &CosineSeries) -> CosineSeries {
        assert_eq!(self.coefficients.len(), other.coefficients.len());
        CosineSeries {
            constant: self.constant + other.constant,
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> CosineSeries {
        CosineSeries {
            constant: self.constant * factor,
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }
}

fn normalised_series(chain: &EmitterChain, e0: f64, raw: Vec<f64>) -> CosineSeries {
    let n = chain.n() as f64;
    let prefactor = e0.powi(4) / 8.0;
    let weight = 2.0 / (n * (n - 1.0));
    CosineSeries::new(
        prefactor,
        raw.into_iter().map(|c| prefactor * weight * c).collect(),
    )
}

/// G² with both filters at π/4.
pub fn parallel_series(chain: &EmitterChain, consts: &PhysicalConstants) -> CosineSeries {
    let n = chain.n();
    let raw = (1..=n).map(|k| (n - k) as f64).collect();
    normalised_series(chain, consts.e0(), raw)
}

/// G² with filters at π/4 and 3π/4, for even and odd chains.
pub fn orthogonal_series(chain: &EmitterChain, consts: &PhysicalConstants) -> CosineSeries {
    orthogonal_series_with(chain, consts, HeavisideConvention::default())
}

pub fn orthogonal_series_with(
    chain: &EmitterChain,
    consts: &PhysicalConstants,
    heaviside: HeavisideConvention,
) -> CosineSeries {
    let n = chain.n() as i64;
    // N/2 for even chains, (N-1)/2 for odd ones
    let half = n / 2;
    let raw = (1..=n)
        .map(|k| {
            let direct = if k <= half { (n - 2 * k) as f64 } else { 0.0 };
            let overlap: f64 = (1..=half)
                .map(|alpha| heaviside.step(n - k - alpha + 1) * heaviside.step(k - alpha + 1))
                .sum();
            direct - overlap
        })
        .collect();
    normalised_series(chain, consts.e0(), raw)
}

pub fn g2_parallel(chain: &EmitterChain, delta1: f64, delta2: f64) -> f64 {
    parallel_series(chain, &PhysicalConstants::default()).eval(delta2 - delta1)
}

pub fn g2_orthogonal(chain: &EmitterChain, delta1: f64, delta2: f64) -> f64 {
    orthogonal_series(chain, &PhysicalConstants::default()).eval(delta2 - delta1)
}

const ANGLE_MATCH: f64 = 1e-12;

/// 0 for π/4, 1 for 3π/4, `None` otherwise.
fn quarter_class(theta: f64) -> Option<u8> {
    let t = canonical_angle(theta);
    if (t - FRAC_PI_4).abs() <= ANGLE_MATCH {
        Some(0)
    } else if (t - 3.0 * FRAC_PI_4).abs() <= ANGLE_MATCH {
        Some(1)
    } else {
        None
    }
}

/// Which precompiled series a polarizer pair maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Parallel,
    Orthogonal,
    /// One filter removed, the other at π/4 or 3π/4: parallel + orthogonal.
    OneRemoved,
}

pub fn series_kind(p1: PolarizerSetting, p2: PolarizerSetting) -> Option<SeriesKind> {
    use PolarizerSetting::*;
    match (p1, p2) {
        (Angle(a), Angle(b)) => {
            let (ca, cb) = (quarter_class(a)?, quarter_class(b)?);
            Some(if ca == cb {
                SeriesKind::Parallel
            } else {
                SeriesKind::Orthogonal
            })
        }
        (Angle(a), Removed) | (Removed, Angle(a)) => {
            quarter_class(a).map(|_| SeriesKind::OneRemoved)
        }
        (Removed, Removed) => None,
    }
}

/// Series for the parallel, orthogonal and single-removed settings of one
/// chain, compiled once and evaluated in O(N).
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    chain: EmitterChain,
    consts: PhysicalConstants,
    parallel: CosineSeries,
    orthogonal: CosineSeries,
    one_removed: CosineSeries,
}

impl CorrelationSeries {
    pub fn new(chain: &EmitterChain, consts: &PhysicalConstants) -> Self {
        Self::with_heaviside(chain, consts, HeavisideConvention::default())
    }

    pub fn with_heaviside(
        chain: &EmitterChain,
        consts: &PhysicalConstants,
        heaviside: HeavisideConvention,
    ) -> Self {
        let parallel = parallel_series(chain, consts);
        let orthogonal = orthogonal_series_with(chain, consts, heaviside);
        let one_removed = parallel.plus(&orthogonal);
        Self {
            chain: *chain,
            consts: *consts,
            parallel,
            orthogonal,
            one_removed,
        }
    }

    pub fn chain(&self) -> &EmitterChain {
        &self.chain
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    pub fn series(&self, kind: SeriesKind) -> &CosineSeries {
        match kind {
            SeriesKind::Parallel => &self.parallel,
            SeriesKind::Orthogonal => &self.orthogonal,
            SeriesKind::OneRemoved => &self.one_removed,
        }
    }

    /// G² for arbitrary detector settings; falls back to the oracle when no
    /// series covers the polarizer pair.
    pub fn g2(&self, d1: &DetectorSetting, d2: &DetectorSetting) -> f64 {
        match series_kind(d1.polarizer(), d2.polarizer()) {
            Some(kind) => self.series(kind).eval(d2.phase() - d1.phase()),
            None => {
                self.consts.e0().powi(4)
                    * oracle::g2_oracle_unpolarized(
                        &self.chain,
                        d1.phase(),
                        d2.phase(),
                        d1.polarizer(),
                        d2.polarizer(),
                    )
            }
        }
    }

    /// `C₀²/E₀⁴ · G²`.
    pub fn joint_probability(&self, d1: &DetectorSetting, d2: &DetectorSetting) -> f64 {
        let c0 = self.consts.c0();
        c0 * c0 / self.consts.e0().powi(4) * self.g2(d1, d2)
    }
}

/// Joint probability of detecting the first two photons at `d1` and `d2`.
pub fn joint_probability(
    chain: &EmitterChain,
    d1: &DetectorSetting,
    d2: &DetectorSetting,
    consts: &PhysicalConstants,
) -> f64 {
    CorrelationSeries::new(chain, consts).joint_probability(d1, d2)
}

/// The two-emitter, both-filters-removed probability `C₀²/2`. Every
/// inequality functional is divided by this value regardless of N.
pub fn normalization_constant(consts: &PhysicalConstants) -> f64 {
    consts.c0() * consts.c0() / 2.0
}

/// Fringe visibility `N/(3N−4)` of the parallel-filter signal.
pub fn visibility(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "visibility needs at least 2 emitters, got {n}"
        )));
    }
    let n = n as f64;
    Ok(n / (3.0 * n - 4.0))
}

const VISIBILITY_SCAN: usize = 4096;

/// Visibility from a direct scan of the parallel-filter signal, refined by
/// golden section around the best scan points.
pub fn visibility_numeric(chain: &EmitterChain) -> f64 {
    let series = parallel_series(chain, &PhysicalConstants::default());
    let step = TAU / VISIBILITY_SCAN as f64;
    let (mut imin, mut imax) = (0, 0);
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..VISIBILITY_SCAN {
        let v = series.eval(i as f64 * step);
        if v < vmin {
            vmin = v;
            imin = i;
        }
        if v > vmax {
            vmax = v;
            imax = i;
        }
    }
    let refine = |centre: f64, sign: f64| {
        let m = golden_section_min(
            |x| sign * series.eval(x),
            centre - step,
            centre + step,
            1e-12,
        );
        sign * m.value
    };
    let lo = refine(imin as f64 * step, 1.0).min(vmin);
    let hi = refine(imax as f64 * step, -1.0).max(vmax);
    (hi - lo) / (hi + lo)
}

/// Phase difference where the parallel-filter signal is smallest, in `[0, π]`.
pub fn parallel_minimum_location(chain: &EmitterChain) -> f64 {
    let series = parallel_series(chain, &PhysicalConstants::default());
    let step = PI / VISIBILITY_SCAN as f64;
    let best = (0..=VISIBILITY_SCAN)
        .map(|i| i as f64 * step)
        .min_by(|a, b| series.eval(*a).total_cmp(&series.eval(*b)))
        .unwrap_or(PI);
    golden_section_min(
        |x| series.eval(x),
        best - step,
        (best + step).min(PI),
        1e-12,
    )
    .x
}
