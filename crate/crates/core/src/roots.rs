//! Bracketed scalar root finding for increasing functions.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Safeguarded Newton iteration for an increasing `f` with `f(lo) <= 0 <= f(hi)`.
///
/// Newton steps that leave the bracket, or shrink more slowly than
/// bisection would, are replaced by bisection. `f` returns `(value, derivative)`.
pub(crate) fn increasing_root<F>(mut f: F, lo: f64, hi: f64, x0: f64, max_iter: usize, rtol: f64) -> Root
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo, hi);
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut dx_old = hi - lo;
    let mut best = Root { x, fx: f64::INFINITY, iterations: 0 };
    for it in 1..=max_iter {
        let (fx, dfx) = f(x);
        if !(fx.abs() >= best.fx.abs()) {
            best = Root { x, fx, iterations: it };
        }
        best.iterations = it;
        if fx == 0.0 {
            return best;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= rtol * hi.abs().max(lo.abs()) || hi - lo <= f64::MIN_POSITIVE {
            return best;
        }
        let newton = x - fx / dfx;
        // bisect when Newton leaves the bracket or is not shrinking the step fast enough
        let next = if !newton.is_finite() || newton <= lo || newton >= hi || (2.0 * fx).abs() > (dx_old * dfx).abs() {
            0.5 * (lo + hi)
        } else {
            newton
        };
        dx_old = next - x;
        if dx_old.abs() <= 0.25 * rtol * x.abs() {
            let (fn_, _) = f(next);
            if fn_.abs() <= best.fx.abs() {
                best = Root { x: next, fx: fn_, iterations: it + 1 };
            }
            return best;
        }
        x = next;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = increasing_root(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 2.0, 200, 1e-15);
        assert!((r.x - 2f64.cbrt()).abs() < 1e-15);
        assert!(r.iterations < 20);
    }

    #[test]
    fn flat_derivative_falls_back_to_bisection() {
        let r = increasing_root(|x| (x.powi(7), 0.0), -1.0, 3.0, 1.0, 500, 1e-15);
        assert!(r.x.abs() < 1e-2);
        assert!(r.fx.abs() < 1e-14);
    }
}
