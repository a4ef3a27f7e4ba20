//! Randomised property suites backing the `verify` command.

use std::f64::consts::{FRAC_PI_4, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closed_form::{CorrelationSeries, HeavisideConvention, SeriesKind};
use crate::emitter::{DetectorSetting, EmitterChain, PhysicalConstants, PolarizerSetting};
use crate::inequalities::{bw_scalar, hbw_scalar, InequalityEvaluator};
use crate::oracle::g2_oracle;

pub const SCALAR_SLACK: f64 = 1e-12;
pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const ORACLE_SAMPLES: usize = 1000;
pub const SHIFT_TOLERANCE: f64 = 1e-14;
pub const SCALE_TOLERANCE: f64 = 1e-12;
pub const CONSTANCY_VARIANCE: f64 = 1e-24;
pub const REDUCTION_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub heaviside: HeavisideConvention,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 42,
            heaviside: HeavisideConvention::default(),
        }
    }
}

fn report(name: &'static str, passed: bool, detail: String) -> SuiteReport {
    SuiteReport {
        name,
        passed,
        detail,
    }
}

/// Uniform samples of `[0,1]³`; returns the smallest `bw_scalar` value.
pub fn bw_min_over_samples(rng: &mut impl Rng, samples: usize) -> f64 {
    (0..samples)
        .map(|_| bw_scalar(rng.gen(), rng.gen(), rng.gen()).expect("sample inside the cube"))
        .fold(f64::INFINITY, f64::min)
}

/// Uniform samples of `0 ≤ x₁,x₂,x₃ ≤ x₄ ≤ 1`. The marginal of `x₄` has
/// density `4x₄³`, sampled as `u^{1/4}`.
pub fn sample_hbw_region(rng: &mut impl Rng) -> [f64; 4] {
    let x4 = rng.gen::<f64>().powf(0.25);
    [
        rng.gen::<f64>() * x4,
        rng.gen::<f64>() * x4,
        rng.gen::<f64>() * x4,
        x4,
    ]
}

pub fn hbw_min_over_samples(rng: &mut impl Rng, samples: usize) -> f64 {
    (0..samples)
        .map(|_| {
            let [a, b, c, d] = sample_hbw_region(rng);
            hbw_scalar(a, b, c, d).expect("sample inside the region")
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest deviation between the series and the oracle over random
/// `(N, δ₁, δ₂)`, for the parallel and the orthogonal filter pair.
pub fn oracle_max_deviation(
    rng: &mut impl Rng,
    samples: usize,
    heaviside: HeavisideConvention,
) -> (f64, f64) {
    let q = FRAC_PI_4;
    let k = PhysicalConstants::default();
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let n = rng.gen_range(2..=10);
        let d1 = rng.gen_range(0.0..TAU);
        let d2 = rng.gen_range(0.0..TAU);
        let chain = EmitterChain::new(n).expect("n >= 2");
        let s = CorrelationSeries::with_heaviside(&chain, &k, heaviside);
        let par =
            (s.series(SeriesKind::Parallel).eval(d2 - d1) - g2_oracle(&chain, d1, d2, q, q)).abs();
        let orth = (s.series(SeriesKind::Orthogonal).eval(d2 - d1)
            - g2_oracle(&chain, d1, d2, q, 3.0 * q))
        .abs();
        worst = (worst.0.max(par), worst.1.max(orth));
    }
    worst
}

/// Largest change of `S_N` / `T_N` under a common phase shift.
pub fn shift_max_deviation(rng: &mut impl Rng, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(2..=10);
        let e = InequalityEvaluator::new(
            &EmitterChain::new(n).expect("n >= 2"),
            &PhysicalConstants::default(),
        );
        let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
        let s = rng.gen_range(0.0..TAU);
        let shifted = d.map(|x| x + s);
        worst = worst
            .max((e.ch74(&d) - e.ch74(&shifted)).abs())
            .max((e.hbw(&d) - e.hbw(&shifted)).abs());
    }
    worst
}

/// Largest change of `S_N` / `T_N` when `E₀`, `C₀` range over {0.25, 0.5, 1}.
pub fn scale_max_deviation(rng: &mut impl Rng, samples: usize) -> f64 {
    let levels = [0.25, 0.5, 1.0];
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(2..=10);
        let chain = EmitterChain::new(n).expect("n >= 2");
        let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..TAU));
        let base = InequalityEvaluator::new(&chain, &PhysicalConstants::default());
        let (s0, t0) = (base.ch74(&d), base.hbw(&d));
        for e0 in levels {
            for c0 in levels {
                let k = PhysicalConstants::new(e0, c0).expect("valid constants");
                let e = InequalityEvaluator::new(&chain, &k);
                worst = worst
                    .max((e.ch74(&d) - s0).abs())
                    .max((e.hbw(&d) - t0).abs());
            }
        }
    }
    worst
}

/// Mean and variance of `p(δ₁,δ₄; π/4, removed)` for two emitters over a
/// `points × points` phase grid.
pub fn two_emitter_open_filter_stats(points: usize, consts: &PhysicalConstants) -> (f64, f64) {
    let chain = EmitterChain::new(2).expect("two emitters");
    let s = CorrelationSeries::new(&chain, consts);
    let pol = PolarizerSetting::angle(FRAC_PI_4);
    let step = TAU / points as f64;
    let vals: Vec<f64> = (0..points * points)
        .map(|ij| {
            let a = DetectorSetting::new((ij / points) as f64 * step, pol);
            let b = DetectorSetting::new((ij % points) as f64 * step, PolarizerSetting::Removed);
            s.joint_probability(&a, &b)
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    (mean, var)
}

/// Run every suite; each draws from its own stream derived from `seed`.
pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    let samples = opts.samples.max(1);
    let rng = |stream: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
        r.set_stream(stream);
        r
    };
    let mut out = Vec::new();

    let m = bw_min_over_samples(&mut rng(1), samples);
    out.push(report(
        "bell-wigner scalar nonnegativity",
        m >= -SCALAR_SLACK,
        format!("min over {samples} samples = {m:e}"),
    ));

    let m = hbw_min_over_samples(&mut rng(2), samples);
    out.push(report(
        "homogeneous bell-wigner scalar nonnegativity",
        m >= -SCALAR_SLACK,
        format!("min over {samples} samples = {m:e}"),
    ));

    let reduction = samples.min(REDUCTION_SAMPLES);
    let mut r = rng(3);
    let mismatches = (0..reduction)
        .filter(|_| {
            let (a, b, c) = (r.gen(), r.gen(), r.gen());
            hbw_scalar(a, b, c, 1.0).ok() != bw_scalar(a, b, c).ok()
        })
        .count();
    out.push(report(
        "homogeneous form reduces to bell-wigner at x4=1",
        mismatches == 0,
        format!("{mismatches} mismatches over {reduction} samples"),
    ));

    let (par, orth) = oracle_max_deviation(&mut rng(4), ORACLE_SAMPLES, opts.heaviside);
    out.push(report(
        "closed form vs oracle",
        par <= ORACLE_TOLERANCE && orth <= ORACLE_TOLERANCE,
        format!("max |diff| parallel = {par:e}, orthogonal = {orth:e}"),
    ));

    let small = samples.min(ORACLE_SAMPLES);
    let d = shift_max_deviation(&mut rng(5), small);
    out.push(report(
        "global phase-shift invariance",
        d <= SHIFT_TOLERANCE,
        format!("max |diff| over {small} tuples = {d:e}"),
    ));

    let d = scale_max_deviation(&mut rng(6), small);
    out.push(report(
        "E0/C0 scale invariance",
        d <= SCALE_TOLERANCE,
        format!("max |diff| over {small} tuples = {d:e}"),
    ));

    let k = PhysicalConstants::default();
    let (mean, var) = two_emitter_open_filter_stats(256, &k);
    let want = k.c0() * k.c0() / 4.0;
    out.push(report(
        "two-emitter open-filter constancy",
        var < CONSTANCY_VARIANCE && (mean - want).abs() < 1e-15,
        format!("mean = {mean}, variance = {var:e}"),
    ));

    out
}
