//! The CH74 functional `S_N` (local bound `S_N ≤ 0`) and the homogeneous
//! Bell-Wigner functional `T_N` (local bound `T_N ≥ 0`), both built from
//! joint detection probabilities and divided by the constant `C₀²/2`.

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::closed_form::{normalization_constant, series_kind, CorrelationSeries, CosineSeries};
use crate::emitter::{canonical_phase, EmitterChain, PhysicalConstants, PolarizerSetting};
use crate::error::{Error, Result};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Functional {
    #[serde(rename = "CH74")]
    Ch74,
    #[serde(rename = "HBW")]
    Hbw,
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Functional::Ch74 => "CH74",
            Functional::Hbw => "HBW",
        })
    }
}

/// Four detector phases, each reduced to `[0, 2π)`.
///
/// For `S_N` the components are `(δ₁, δ₂, δ₁′, δ₂′)`; for `T_N` they are
/// `(δ₁, δ₂, δ₃, δ₄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTuple4([f64; 4]);

impl PhaseTuple4 {
    pub fn new(phases: [f64; 4]) -> Self {
        PhaseTuple4(phases.map(canonical_phase))
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    /// Shift all phases so that the first one is zero.
    pub fn anchored(&self) -> Self {
        let base = self.0[0];
        PhaseTuple4::new(self.0.map(|p| p - base))
    }

    /// Lexicographic comparison used for tie-breaking.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl From<[f64; 4]> for PhaseTuple4 {
    fn from(p: [f64; 4]) -> Self {
        PhaseTuple4::new(p)
    }
}

/// A joint probability `p(a, b; pol1, pol2)` as a function of two phases.
#[derive(Debug, Clone)]
struct Term {
    series: Option<CosineSeries>,
    pol1: PolarizerSetting,
    pol2: PolarizerSetting,
}

/// Compiled evaluator for both functionals on one chain.
#[derive(Debug, Clone)]
pub struct InequalityEvaluator {
    chain: EmitterChain,
    consts: PhysicalConstants,
    angles: (f64, f64),
    // C₀²/E₀⁴ / (C₀²/2)
    scale: f64,
    filtered: Term,
    same: Term,
    first_open: Term,
    second_open: Term,
}

impl InequalityEvaluator {
    /// Filters at π/4 on both detectors, probabilities from the cosine series.
    pub fn new(chain: &EmitterChain, consts: &PhysicalConstants) -> Self {
        Self::with_angles(chain, consts, FRAC_PI_4, FRAC_PI_4, false)
    }

    /// Arbitrary filter angles. With `use_oracle` every probability is taken
    /// from the brute-force pair sum instead of the series.
    pub fn with_angles(
        chain: &EmitterChain,
        consts: &PhysicalConstants,
        theta1: f64,
        theta2: f64,
        use_oracle: bool,
    ) -> Self {
        let corr = CorrelationSeries::new(chain, consts);
        let term = |pol1: PolarizerSetting, pol2: PolarizerSetting| Term {
            series: if use_oracle {
                None
            } else {
                series_kind(pol1, pol2).map(|k| corr.series(k).clone())
            },
            pol1,
            pol2,
        };
        let a1 = PolarizerSetting::angle(theta1);
        let a2 = PolarizerSetting::angle(theta2);
        let e4 = consts.e0().powi(4);
        let c2 = consts.c0() * consts.c0();
        Self {
            chain: *chain,
            consts: *consts,
            angles: (theta1, theta2),
            scale: c2 / e4 / normalization_constant(consts),
            filtered: term(a1, a2),
            same: term(a1, a1),
            first_open: term(a1, PolarizerSetting::Removed),
            second_open: term(PolarizerSetting::Removed, a2),
        }
    }

    pub fn chain(&self) -> &EmitterChain {
        &self.chain
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    pub fn angles(&self) -> (f64, f64) {
        self.angles
    }

    /// Unnormalised G² of one term.
    fn g2(&self, t: &Term, a: f64, b: f64) -> f64 {
        match &t.series {
            Some(s) => s.eval(b - a),
            None => {
                self.consts.e0().powi(4)
                    * oracle::g2_oracle_unpolarized(&self.chain, a, b, t.pol1, t.pol2)
            }
        }
    }

    pub fn ch74(&self, phases: &[f64; 4]) -> f64 {
        let [d1, d2, d1p, d2p] = *phases;
        let f = &self.filtered;
        let sum =
            self.g2(f, d1, d2) - self.g2(f, d1, d2p) + self.g2(f, d1p, d2) + self.g2(f, d1p, d2p)
                - self.g2(&self.first_open, d1p, d2)
                - self.g2(&self.second_open, d1, d2);
        sum * self.scale
    }

    pub fn hbw(&self, phases: &[f64; 4]) -> f64 {
        let [d1, d2, d3, d4] = *phases;
        let f = &self.filtered;
        let sum =
            self.g2(&self.first_open, d1, d4) - self.g2(&self.same, d1, d2) - self.g2(f, d1, d3)
                + self.g2(f, d2, d3);
        sum * self.scale
    }

    pub fn value(&self, kind: Functional, phases: &[f64; 4]) -> f64 {
        match kind {
            Functional::Ch74 => self.ch74(phases),
            Functional::Hbw => self.hbw(phases),
        }
    }
}

/// `S_N` at filters π/4, π/4.
pub fn ch74_value(chain: &EmitterChain, phases: &PhaseTuple4, consts: &PhysicalConstants) -> f64 {
    InequalityEvaluator::new(chain, consts).ch74(phases.as_array())
}

/// `T_N` at filters π/4, π/4.
pub fn hbw_value(chain: &EmitterChain, phases: &PhaseTuple4, consts: &PhysicalConstants) -> f64 {
    InequalityEvaluator::new(chain, consts).hbw(phases.as_array())
}

/// Best two-emitter `S₂` for a fringe of visibility `v`: `√2·v − 1`.
/// Positive values mean the local bound can be violated.
pub fn ch74_value_reduced_visibility(visibility: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::Domain(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    Ok(SQRT_2 * visibility - 1.0)
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// `x₁ − x₁x₂ − x₁x₃ + x₂x₃`, nonnegative on `[0,1]³`.
pub fn bw_scalar(x1: f64, x2: f64, x3: f64) -> Result<f64> {
    check_unit("x1", x1)?;
    check_unit("x2", x2)?;
    check_unit("x3", x3)?;
    Ok(x1 - x1 * x2 - x1 * x3 + x2 * x3)
}

/// `x₁x₄ − x₁x₂ − x₁x₃ + x₂x₃`, nonnegative when `0 ≤ x₁,x₂,x₃ ≤ x₄ ≤ 1`.
pub fn hbw_scalar(x1: f64, x2: f64, x3: f64, x4: f64) -> Result<f64> {
    check_unit("x1", x1)?;
    check_unit("x2", x2)?;
    check_unit("x3", x3)?;
    check_unit("x4", x4)?;
    if x4 < x1.max(x2).max(x3) {
        return Err(Error::Domain(format!(
            "x4 = {x4} must dominate x1, x2, x3 = ({x1}, {x2}, {x3})"
        )));
    }
    Ok(x1 * x4 - x1 * x2 - x1 * x3 + x2 * x3)
}
