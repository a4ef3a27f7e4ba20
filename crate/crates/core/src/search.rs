//! Derivative-free global search over detector phases.
//!
//! Both functionals depend only on phase differences, so the first phase is
//! pinned to zero and the remaining three are scanned on a periodic grid.
//! Grid-local extrema (plus any seed tuples) are then polished by cyclic
//! coordinate-wise golden-section descent. Everything is ordered, so runs
//! with the same configuration are bit-identical regardless of thread count.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_4, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emitter::{EmitterChain, PhysicalConstants};
use crate::error::{Error, Result};
use crate::golden::golden_section_min;
use crate::inequalities::{Functional, InequalityEvaluator, PhaseTuple4};

/// Refined extrema closer than this are treated as equal and the
/// lexicographically smaller phase tuple wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

const MAX_CYCLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub grid_resolution: usize,
    pub refine_candidates: usize,
    pub refine_tolerance: f64,
    #[serde(default)]
    pub seed_candidates: Vec<PhaseTuple4>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 64,
            refine_candidates: 16,
            refine_tolerance: 1e-9,
            seed_candidates: Vec::new(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid resolution must be at least 8, got {}",
                self.grid_resolution
            )));
        }
        if !(self.refine_tolerance > 0.0 && self.refine_tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "refine tolerance must be positive, got {}",
                self.refine_tolerance
            )));
        }
        if self.refine_candidates == 0 {
            return Err(Error::InvalidArgument(
                "at least one candidate must be refined".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityResult {
    pub n: usize,
    pub kind: Functional,
    pub extremum: f64,
    /// Canonical optimum with the first phase at zero.
    pub phases: PhaseTuple4,
    pub evaluations: u64,
    pub config: SearchConfig,
}

/// Outcome of polishing one starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub point: [f64; 3],
    pub value: f64,
    pub evaluations: u64,
    /// Objective after every accepted move, starting with the initial value.
    pub history: Vec<f64>,
}

/// Cyclic coordinate descent; each coordinate is minimised by golden section
/// on `[x − h, x + h]`. A move is kept only if it strictly lowers `f`.
/// Stops once a full cycle moves no coordinate by `tol` or more.
pub fn refine_coordinatewise<F>(f: F, start: [f64; 3], initial_step: f64, tol: f64) -> Refinement
where
    F: Fn(&[f64; 3]) -> f64,
{
    let line_tol = (tol * 1e-3).max(1e-13);
    let mut x = start;
    let mut fx = f(&x);
    let mut evaluations = 1;
    let mut history = vec![fx];
    let mut h = initial_step;
    for _ in 0..MAX_CYCLES {
        let mut max_move: f64 = 0.0;
        for c in 0..3 {
            let centre = x[c];
            let mut probe = x;
            let m = golden_section_min(
                |t| {
                    probe[c] = t;
                    f(&probe)
                },
                centre - h,
                centre + h,
                line_tol,
            );
            evaluations += m.evaluations;
            if m.value < fx {
                max_move = max_move.max((m.x - centre).abs());
                x[c] = m.x;
                fx = m.value;
                history.push(fx);
            }
        }
        if max_move < tol {
            break;
        }
        h = (2.0 * max_move).clamp(tol, PI);
    }
    Refinement {
        point: x,
        value: fx,
        evaluations,
        history,
    }
}

/// Analytic optimum families for `S_N`, first phase pinned to zero.
///
/// Two emitters: every tuple of π/4 multiples (this contains
/// `(0, π/4, π/2, 3π/4)`). More emitters: every tuple with entries in `{0, π}`.
pub fn candidate_phases(n: usize) -> Result<Vec<PhaseTuple4>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "candidate phases need at least 2 emitters, got {n}"
        )));
    }
    let values: Vec<f64> = if n == 2 {
        (0..8).map(|k| k as f64 * FRAC_PI_4).collect()
    } else {
        vec![0.0, PI]
    };
    let mut out = Vec::with_capacity(values.len().pow(3));
    for &a in &values {
        for &b in &values {
            for &c in &values {
                out.push(PhaseTuple4::new([0.0, a, b, c]));
            }
        }
    }
    Ok(out)
}

fn lex3(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Sign that turns the requested extremum into a minimisation.
fn orientation(kind: Functional) -> f64 {
    match kind {
        Functional::Ch74 => -1.0,
        Functional::Hbw => 1.0,
    }
}

/// Periodic grid of the objective; index `(i*r + j)*r + k`.
fn scan_grid<F>(cost: &F, r: usize) -> Vec<f64>
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    let step = TAU / r as f64;
    (0..r)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..r * r).map(move |jk| {
                let (j, k) = (jk / r, jk % r);
                cost(&[i as f64 * step, j as f64 * step, k as f64 * step])
            })
        })
        .collect()
}

/// Cells no larger than any of their 26 periodic neighbours.
fn grid_local_minima(values: &[f64], r: usize) -> Vec<(f64, [usize; 3])> {
    let at = |i: usize, j: usize, k: usize| values[(i * r + j) * r + k];
    let wrap = |x: usize, d: isize| ((x as isize + d).rem_euclid(r as isize)) as usize;
    (0..r)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..r * r).filter_map(move |jk| {
                let (j, k) = (jk / r, jk % r);
                let v = at(i, j, k);
                for di in -1..=1 {
                    for dj in -1..=1 {
                        for dk in -1..=1 {
                            if (di, dj, dk) != (0, 0, 0)
                                && at(wrap(i, di), wrap(j, dj), wrap(k, dk)) < v
                            {
                                return None;
                            }
                        }
                    }
                }
                Some((v, [i, j, k]))
            })
        })
        .collect()
}

/// Global extremum of `kind` over phase tuples: maximum for CH74, minimum
/// for HBW.
pub fn search(
    chain: &EmitterChain,
    kind: Functional,
    config: &SearchConfig,
) -> Result<InequalityResult> {
    config.validate()?;
    let n = chain.n();
    let evaluator = InequalityEvaluator::new(chain, &PhysicalConstants::default());
    let sign = orientation(kind);
    let cost = |x: &[f64; 3]| sign * evaluator.value(kind, &[0.0, x[0], x[1], x[2]]);

    let r = config.grid_resolution;
    let step = TAU / r as f64;
    let grid = scan_grid(&cost, r);
    let mut evaluations = grid.len() as u64;

    let mut pool: Vec<(f64, [f64; 3])> = grid_local_minima(&grid, r)
        .into_iter()
        .map(|(v, [i, j, k])| (v, [i as f64 * step, j as f64 * step, k as f64 * step]))
        .collect();

    let mut seeds = config.seed_candidates.clone();
    if kind == Functional::Ch74 {
        seeds.extend(candidate_phases(n)?);
    }
    for s in &seeds {
        let p = *s.anchored().as_array();
        let x = [p[1], p[2], p[3]];
        pool.push((cost(&x), x));
        evaluations += 1;
    }

    pool.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex3(&a.1, &b.1)));
    pool.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    pool.truncate(config.refine_candidates);

    let refined: Vec<Refinement> = pool
        .par_iter()
        .map(|(_, x)| refine_coordinatewise(cost, *x, step, config.refine_tolerance))
        .collect();

    let mut best: Option<(f64, PhaseTuple4)> = None;
    for r in &refined {
        evaluations += r.evaluations;
        let phases = PhaseTuple4::new([0.0, r.point[0], r.point[1], r.point[2]]);
        let value = evaluator.value(kind, phases.as_array());
        let better = match &best {
            None => true,
            Some((bv, bp)) => {
                let (c, bc) = (sign * value, sign * bv);
                c < bc - TIE_TOLERANCE
                    || ((c - bc).abs() <= TIE_TOLERANCE && phases.lex_cmp(bp) == Ordering::Less)
            }
        };
        if better {
            best = Some((value, phases));
        }
    }

    let (extremum, phases) = best.ok_or_else(|| Error::Search {
        n,
        reason: "no candidates to refine".into(),
    })?;
    if !extremum.is_finite() {
        return Err(Error::Search {
            n,
            reason: format!("non-finite extremum {extremum}"),
        });
    }
    Ok(InequalityResult {
        n,
        kind,
        extremum,
        phases,
        evaluations,
        config: config.clone(),
    })
}

pub fn maximize_ch74(chain: &EmitterChain, config: &SearchConfig) -> Result<InequalityResult> {
    search(chain, Functional::Ch74, config)
}

pub fn minimize_hbw(chain: &EmitterChain, config: &SearchConfig) -> Result<InequalityResult> {
    search(chain, Functional::Hbw, config)
}

/// Independent searches for every N in `n_min..=n_max`, returned in
/// ascending N.
pub fn sweep(
    n_min: usize,
    n_max: usize,
    kind: Functional,
    config: &SearchConfig,
) -> Result<Vec<InequalityResult>> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "sweep range must satisfy 2 <= n_min <= n_max, got {n_min}..{n_max}"
        )));
    }
    config.validate()?;
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let chain = EmitterChain::new(n)?;
            search(&chain, kind, config).map_err(|e| match e {
                e @ Error::Search { .. } => e,
                other => Error::Search {
                    n,
                    reason: other.to_string(),
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn chain(n: usize) -> EmitterChain {
        EmitterChain::new(n).unwrap()
    }

    fn small() -> SearchConfig {
        SearchConfig {
            grid_resolution: 24,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SearchConfig::default();
        assert!(c.validate().is_ok());
        c.grid_resolution = 7;
        assert!(c.validate().is_err());
        c.grid_resolution = 8;
        c.refine_tolerance = 0.0;
        assert!(c.validate().is_err());
        c.refine_tolerance = 1e-9;
        c.refine_candidates = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn candidates() {
        let c2 = candidate_phases(2).unwrap();
        assert!(c2.contains(&PhaseTuple4::new([0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0])));
        let c5 = candidate_phases(5).unwrap();
        assert_eq!(c5.len(), 8);
        assert!(c5.contains(&PhaseTuple4::new([0.0, 0.0, PI, PI])));
        assert!(candidate_phases(1).is_err());
    }

    #[test]
    fn refinement_monotone_and_converges() {
        let f = |x: &[f64; 3]| -(x[0].cos() + (x[1] - 1.0).cos() + (x[0] - x[2]).cos());
        let r = refine_coordinatewise(f, [0.3, 0.7, 1.0], 0.2, 1e-10);
        assert!(r.history.windows(2).all(|w| w[1] < w[0]));
        assert!((r.value + 3.0).abs() < 1e-12);
        assert!(r.point[0].abs() < 1e-5 && (r.point[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn ch74_two_emitters() {
        let r = maximize_ch74(&chain(2), &small()).unwrap();
        assert!((r.extremum - (SQRT_2 - 1.0) / 2.0).abs() < 1e-9);
        let want = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
        for (a, b) in r.phases.as_array().iter().zip(want) {
            assert!((a - b).abs() < 1e-6, "{:?}", r.phases);
        }
    }

    #[test]
    fn hbw_two_emitters() {
        let r = minimize_hbw(&chain(2), &small()).unwrap();
        assert!((r.extremum + 0.125).abs() < 1e-9);
        assert_eq!(r.phases.as_array()[0], 0.0);
    }

    #[test]
    fn result_consistency() {
        for n in [3, 6] {
            for kind in [Functional::Ch74, Functional::Hbw] {
                let r = search(&chain(n), kind, &small()).unwrap();
                let e = InequalityEvaluator::new(&chain(n), &PhysicalConstants::default());
                assert!((e.value(kind, r.phases.as_array()) - r.extremum).abs() <= 1e-12);
                assert_eq!(r.phases.as_array()[0], 0.0);
                assert!(r.phases.as_array().iter().all(|p| (0.0..TAU).contains(p)));
                assert!(r.evaluations > (24 * 24 * 24) as u64);
            }
        }
    }

    #[test]
    fn candidates_never_beat_search() {
        for n in 3..=10 {
            let e = InequalityEvaluator::new(&chain(n), &PhysicalConstants::default());
            let best = candidate_phases(n)
                .unwrap()
                .iter()
                .map(|p| e.ch74(p.as_array()))
                .fold(f64::NEG_INFINITY, f64::max);
            let r = maximize_ch74(&chain(n), &SearchConfig::default()).unwrap();
            assert!(best <= r.extremum + 1e-12);
            if n == 4 {
                // the {0, π} family attains the maximum here
                assert!((best - r.extremum).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn sweep_ordering_and_errors() {
        let rs = sweep(2, 5, Functional::Hbw, &small()).unwrap();
        assert_eq!(rs.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 3, 4, 5]);
        assert!(sweep(1, 3, Functional::Hbw, &small()).is_err());
        assert!(sweep(4, 3, Functional::Hbw, &small()).is_err());
    }

    #[test]
    fn deterministic_across_runs() {
        let a = search(&chain(5), Functional::Hbw, &small()).unwrap();
        let b = search(&chain(5), Functional::Hbw, &small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.extremum.to_bits(), b.extremum.to_bits());
    }

    #[test]
    fn seeds_are_used() {
        let cfg = SearchConfig {
            grid_resolution: 8,
            refine_candidates: 1,
            seed_candidates: vec![PhaseTuple4::new([1.0, 1.0 + PI / 3.0, 1.0 - PI / 3.0, 0.0])],
            ..SearchConfig::default()
        };
        let r = minimize_hbw(&chain(2), &cfg).unwrap();
        assert!((r.extremum + 0.125).abs() < 1e-12);
    }
}
