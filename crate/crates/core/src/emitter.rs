//! Emitter chain, detector settings and the geometry-to-phase map.
//!
//! Emitters are indexed from 1 so that emitter `n` picks up the phase factor
//! `exp(i n delta)` at a detector with optical phase `delta`.

use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduce a phase into `[0, 2π)`.
pub fn canonical_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce a polarizer angle into `[0, π)`. Angles differing by π describe the
/// same filter up to a global sign.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// A chain of `n` equidistant emitters. The first `group_minus().len()`
/// emitters start in `|e,-1>`, the rest in `|e,+1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitterChain {
    n: usize,
    minus_len: usize,
}

impl EmitterChain {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "an emitter chain needs at least 2 emitters for two detectors, got {n}"
            )));
        }
        Ok(Self {
            n,
            minus_len: n / 2,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group_minus(&self) -> RangeInclusive<usize> {
        1..=self.minus_len
    }

    pub fn group_plus(&self) -> RangeInclusive<usize> {
        self.minus_len + 1..=self.n
    }

    /// Whether emitter `index` (1-based) belongs to the `|e,-1>` prefix.
    pub fn is_minus(&self, index: usize) -> Result<bool> {
        if index == 0 || index > self.n {
            return Err(Error::IndexOutOfRange { index, n: self.n });
        }
        Ok(index <= self.minus_len)
    }

    /// Number of unordered emitter pairs, `N(N-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

/// Same as [`EmitterChain::new`].
pub fn build_chain(n: usize) -> Result<EmitterChain> {
    EmitterChain::new(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolarizerSetting {
    /// Filter transmitting `sin(θ) σ+ + cos(θ) σ-`, θ in `[0, π)`.
    Angle(f64),
    Removed,
}

impl PolarizerSetting {
    pub fn angle(theta: f64) -> Self {
        PolarizerSetting::Angle(canonical_angle(theta))
    }

    pub fn is_removed(&self) -> bool {
        matches!(self, PolarizerSetting::Removed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSetting {
    phase: f64,
    polarizer: PolarizerSetting,
}

impl DetectorSetting {
    pub fn new(phase: f64, polarizer: PolarizerSetting) -> Self {
        let polarizer = match polarizer {
            PolarizerSetting::Angle(t) => PolarizerSetting::angle(t),
            PolarizerSetting::Removed => PolarizerSetting::Removed,
        };
        Self {
            phase: canonical_phase(phase),
            polarizer,
        }
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn polarizer(&self) -> PolarizerSetting {
        self.polarizer
    }
}

/// Field amplitude `e0` and single-photon success probability `c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    e0: f64,
    c0: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { e0: 1.0, c0: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(e0: f64, c0: f64) -> Result<Self> {
        if !(e0 > 0.0 && e0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "e0 must be positive, got {e0}"
            )));
        }
        if !(c0 > 0.0 && c0 <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "c0 must lie in (0, 1], got {c0}"
            )));
        }
        Ok(Self { e0, c0 })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }
}

/// Optical phase `kd sin(θ)` between adjacent emitters, reduced to `[0, 2π)`.
pub fn phase_from_geometry(kd: f64, theta: f64) -> Result<f64> {
    if !(kd >= 0.0 && kd.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "kd must be finite and >= 0, got {kd}"
        )));
    }
    Ok(canonical_phase(kd * theta.sin()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn members(r: RangeInclusive<usize>) -> Vec<usize> {
        r.collect()
    }

    #[test]
    fn chain_splits() {
        let c = build_chain(2).unwrap();
        assert_eq!(members(c.group_minus()), vec![1]);
        assert_eq!(members(c.group_plus()), vec![2]);
        let c = build_chain(3).unwrap();
        assert_eq!(members(c.group_minus()), vec![1]);
        assert_eq!(members(c.group_plus()), vec![2, 3]);
        let c = build_chain(4).unwrap();
        assert_eq!(members(c.group_minus()), vec![1, 2]);
        assert_eq!(members(c.group_plus()), vec![3, 4]);
    }

    #[test]
    fn chain_too_small() {
        assert!(matches!(build_chain(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_chain(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn index_bounds() {
        let c = build_chain(4).unwrap();
        assert!(c.is_minus(0).is_err());
        assert!(c.is_minus(5).is_err());
        assert!(c.is_minus(2).unwrap());
        assert!(!c.is_minus(3).unwrap());
    }

    #[test]
    fn geometry_examples() {
        assert!((phase_from_geometry(TAU, PI / 6.0).unwrap() - PI).abs() < 1e-12);
        assert_eq!(phase_from_geometry(3.7, 0.0).unwrap(), 0.0);
        let p = phase_from_geometry(2.0 * TAU, PI / 2.0).unwrap();
        assert!(p < 1e-12 || (TAU - p) < 1e-12);
        assert!(phase_from_geometry(-1.0, 0.3).is_err());
    }

    #[test]
    fn constants_validation() {
        assert!(PhysicalConstants::new(0.0, 0.5).is_err());
        assert!(PhysicalConstants::new(1.0, 0.0).is_err());
        assert!(PhysicalConstants::new(1.0, 1.5).is_err());
        assert!(PhysicalConstants::new(2.0, 1.0).is_ok());
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical_phase(-1e-300), 0.0);
        assert!((canonical_phase(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((canonical_angle(1.25 * PI) - 0.25 * PI).abs() < 1e-15);
        let d = DetectorSetting::new(-PI, PolarizerSetting::Angle(-PI / 4.0));
        assert!((d.phase() - PI).abs() < 1e-15);
        assert_eq!(d.polarizer(), PolarizerSetting::Angle(0.75 * PI));
    }

    proptest! {
        #[test]
        fn group_sizes_balanced(n in 2usize..200) {
            let c = build_chain(n).unwrap();
            let minus = c.group_minus().count();
            let plus = c.group_plus().count();
            prop_assert_eq!(minus + plus, n);
            prop_assert_eq!(plus - minus, n % 2);
            prop_assert_eq!(*c.group_minus().start(), 1);
        }

        #[test]
        fn geometry_periodic_and_odd(kd in 0.0f64..50.0, theta in -3.0f64..3.0) {
            let p = phase_from_geometry(kd, theta).unwrap();
            prop_assert!((0.0..TAU).contains(&p));
            let q = phase_from_geometry(kd, -theta).unwrap();
            // odd before reduction: p + q ≡ 0 (mod 2π)
            let s = canonical_phase(p + q);
            prop_assert!(s < 1e-9 || TAU - s < 1e-9);
        }
    }
}
