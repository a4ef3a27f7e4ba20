//! One-dimensional golden-section minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMin {
    pub x: f64,
    pub value: f64,
    pub evaluations: u64,
}

/// Minimise `f` on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// Assumes `f` is unimodal on the bracket; on multimodal input it returns a
/// local minimum inside the bracket.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> LineMin
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let tol = tol.max(f64::EPSILON * (a.abs() + b.abs()).max(1.0));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    if fc <= fd {
        LineMin {
            x: c,
            value: fc,
            evaluations,
        }
    } else {
        LineMin {
            x: d,
            value: fd,
            evaluations,
        }
    }
}
