//! Brute-force two-photon correlation from the pair amplitudes.
//!
//! Two successive detections map the initial product state onto states where
//! exactly two emitters `{n, m}` have decayed. Each such final state collects
//! the two orderings in which the detectors could have registered the photons:
//!
//! `A_nm = (E₀²/2) [w₁(n) w₂(m) e^{i(nδ₁+mδ₂)} + w₁(m) w₂(n) e^{i(mδ₁+nδ₂)}]`
//!
//! with `w_j` the filter weight of detector `j` on the emitter's transition.
//! The squared amplitudes are summed over pairs and divided by the pair count,
//! which puts the result on the same scale as the closed forms (`E₀ = 1`).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::emitter::{EmitterChain, PolarizerSetting};
use crate::error::Result;

/// Basis angle used to resolve a removed filter into two orthogonal ones.
pub const REMOVED_BASIS: f64 = FRAC_PI_4;

/// `sin θ` on the `|e,-1>` prefix, `cos θ` on the rest.
pub fn branch_weight(chain: &EmitterChain, emitter: usize, theta: f64) -> Result<f64> {
    Ok(if chain.is_minus(emitter)? {
        theta.sin()
    } else {
        theta.cos()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairAmplitude {
    pub pair: (usize, usize),
    pub amplitude: Complex64,
}

/// All pair amplitudes in ascending `(n, m)` order, `E₀ = 1`.
pub fn pair_amplitudes(
    chain: &EmitterChain,
    delta1: f64,
    delta2: f64,
    theta1: f64,
    theta2: f64,
) -> Vec<PairAmplitude> {
    let n = chain.n();
    let minus_len = chain.group_minus().count();
    let weight = |idx: usize, theta: f64| {
        if idx <= minus_len {
            theta.sin()
        } else {
            theta.cos()
        }
    };
    let w1: Vec<f64> = (1..=n).map(|i| weight(i, theta1)).collect();
    let w2: Vec<f64> = (1..=n).map(|i| weight(i, theta2)).collect();
    let mut out = Vec::with_capacity(chain.pair_count());
    for a in 1..=n {
        for b in a + 1..=n {
            let (fa, fb) = (a as f64, b as f64);
            let first = Complex64::from_polar(w1[a - 1] * w2[b - 1], fa * delta1 + fb * delta2);
            let second = Complex64::from_polar(w1[b - 1] * w2[a - 1], fb * delta1 + fa * delta2);
            out.push(PairAmplitude {
                pair: (a, b),
                amplitude: 0.5 * (first + second),
            });
        }
    }
    out
}

/// Pair-normalised G² for two filters at `theta1`, `theta2` (`E₀ = 1`).
pub fn g2_oracle(chain: &EmitterChain, delta1: f64, delta2: f64, theta1: f64, theta2: f64) -> f64 {
    let total: f64 = pair_amplitudes(chain, delta1, delta2, theta1, theta2)
        .iter()
        .map(|p| p.amplitude.norm_sqr())
        .sum();
    total / chain.pair_count() as f64
}

fn resolve(p: PolarizerSetting, basis: f64) -> Vec<f64> {
    match p {
        PolarizerSetting::Angle(t) => vec![t],
        PolarizerSetting::Removed => vec![basis, basis + FRAC_PI_2],
    }
}

/// G² where either filter may be removed; a removed filter is summed over
/// the orthogonal pair `{π/4, 3π/4}`.
pub fn g2_oracle_unpolarized(
    chain: &EmitterChain,
    delta1: f64,
    delta2: f64,
    pol1: PolarizerSetting,
    pol2: PolarizerSetting,
) -> f64 {
    g2_oracle_unpolarized_in_basis(chain, delta1, delta2, pol1, pol2, REMOVED_BASIS)
}

pub fn g2_oracle_unpolarized_in_basis(
    chain: &EmitterChain,
    delta1: f64,
    delta2: f64,
    pol1: PolarizerSetting,
    pol2: PolarizerSetting,
    basis: f64,
) -> f64 {
    let mut acc = 0.0;
    for t1 in resolve(pol1, basis) {
        for t2 in resolve(pol2, basis) {
            acc += g2_oracle(chain, delta1, delta2, t1, t2);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{g2_orthogonal, g2_parallel};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    const Q: f64 = FRAC_PI_4;

    fn chain(n: usize) -> EmitterChain {
        EmitterChain::new(n).unwrap()
    }

    #[test]
    fn weights() {
        let c = chain(4);
        assert!((branch_weight(&c, 1, Q).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((branch_weight(&c, 3, 3.0 * Q).unwrap() + 0.5f64.sqrt()).abs() < 1e-15);
        assert!(branch_weight(&c, 4, PI / 2.0).unwrap().abs() < 1e-15);
        assert!(branch_weight(&c, 5, Q).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert!((g2_oracle(&chain(2), 0.0, 0.0, Q, Q) - 0.25).abs() < 1e-15);
        assert!((g2_oracle(&chain(3), 0.0, 0.0, Q, Q) - 0.25).abs() < 1e-15);
        assert!((g2_oracle(&chain(2), 0.0, PI, Q, 3.0 * Q) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unpolarized_examples() {
        let r = PolarizerSetting::Removed;
        let a = PolarizerSetting::angle(Q);
        for d in [0.0, 1.0, 2.5, 4.0] {
            assert!((g2_oracle_unpolarized(&chain(2), 0.0, d, a, r) - 0.25).abs() < 1e-15);
            assert!((g2_oracle_unpolarized(&chain(2), 0.3, d, r, r) - 0.5).abs() < 1e-15);
            // three emitters: fully unpolarised value is (1/2) + cos(Δ)/6
            let v = g2_oracle_unpolarized(&chain(3), 0.0, d, r, r);
            assert!((v - (0.5 + d.cos() / 6.0)).abs() < 1e-14);
        }
        let v = g2_oracle_unpolarized(&chain(4), 0.0, 0.0, a, r);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_group_support_n3() {
        // θ = 0 silences emitter 1, leaving only the pair {2,3}
        let c = chain(3);
        for d in [0.0, 0.9, PI, 4.4] {
            let v = g2_oracle(&c, 0.0, d, 0.0, 0.0);
            assert!((v - (1.0 + d.cos()) / 6.0).abs() < 1e-15);
            // θ = π/2 leaves a single emitter, which cannot supply two photons
            assert!(g2_oracle(&c, 0.0, d, PI / 2.0, PI / 2.0).abs() < 1e-30);
        }
        let amps = pair_amplitudes(&c, 0.1, 0.2, 0.0, 0.0);
        assert_eq!(
            amps.iter().map(|p| p.pair).collect::<Vec<_>>(),
            vec![(1, 2), (1, 3), (2, 3)]
        );
        assert_eq!(amps[0].amplitude, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn closed_form_equivalence_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(2..=10);
            let d1 = rng.gen_range(0.0..TAU);
            let d2 = rng.gen_range(0.0..TAU);
            let c = chain(n);
            assert!((g2_oracle(&c, d1, d2, Q, Q) - g2_parallel(&c, d1, d2)).abs() <= 1e-10);
            assert!((g2_oracle(&c, d1, d2, Q, 3.0 * Q) - g2_orthogonal(&c, d1, d2)).abs() <= 1e-10);
            // both filters at 3π/4 behave like the parallel pair
            assert!(
                (g2_oracle(&c, d1, d2, 3.0 * Q, 3.0 * Q) - g2_parallel(&c, d1, d2)).abs() <= 1e-10
            );
        }
    }

    proptest! {
        #[test]
        fn basis_independence(n in 2usize..9, d1 in 0.0..TAU, d2 in 0.0..TAU, b1 in 0.0..PI, b2 in 0.0..PI, t in 0.0..PI) {
            let c = chain(n);
            let r = PolarizerSetting::Removed;
            let a = PolarizerSetting::angle(t);
            for (p1, p2) in [(r, r), (a, r), (r, a)] {
                let x = g2_oracle_unpolarized_in_basis(&c, d1, d2, p1, p2, b1);
                let y = g2_oracle_unpolarized_in_basis(&c, d1, d2, p1, p2, b2);
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn detector_swap_and_shift(n in 2usize..9, d1 in 0.0..TAU, d2 in 0.0..TAU, t1 in 0.0..PI, t2 in 0.0..PI, s in -10.0f64..10.0) {
            let c = chain(n);
            let v = g2_oracle(&c, d1, d2, t1, t2);
            prop_assert!((v - g2_oracle(&c, d2, d1, t2, t1)).abs() < 1e-14);
            prop_assert!((v - g2_oracle(&c, d1 + s, d2 + s, t1, t2)).abs() < 1e-12);
            prop_assert!((v - g2_oracle(&c, d1 + TAU, d2, t1, t2)).abs() < 1e-12);
            prop_assert!(v >= 0.0);
        }
    }
}
