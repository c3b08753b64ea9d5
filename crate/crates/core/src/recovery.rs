//! Conservative-to-primitive recovery through the scalar equation `f_U(ξ) = 0`,
//! where the unknown is `ξ = ρhW²`.

use crate::admissible::{f_omega, is_admissible_first_form, xi_4};
use crate::error::{Result, RmhdError};
use crate::roots::increasing_root;
use crate::state::{dot, norm2, ConservedState, Eos, PrimitiveState};

/// Iteration budget for the bracketed solve.
pub const MAX_ITERATIONS: usize = 500;

/// Scalar invariants of `U` entering `f_U`.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    d: f64,
    e: f64,
    b2: f64,
    m2: f64,
    tau: f64,
    k: f64,
}

impl Coeffs {
    fn new(u: &ConservedState, eos: &Eos) -> Self {
        let mb = dot(&u.m, &u.b);
        Coeffs {
            d: u.d,
            e: u.e,
            b2: norm2(&u.b),
            m2: norm2(&u.m),
            tau: mb * mb,
            k: eos.gm1_over_gamma(),
        }
    }

    /// `1/W²` as a function of `ξ`.
    #[inline]
    fn inv_w2(&self, xi: f64) -> f64 {
        let s = xi + self.b2;
        1.0 - (xi * xi * self.m2 + (2.0 * xi + self.b2) * self.tau) / (xi * xi * s * s)
    }

    /// `(f_U(ξ), f_U'(ξ))`.
    #[inline]
    fn eval(&self, xi: f64) -> (f64, f64) {
        let Coeffs { d, e, b2, m2, tau, k } = *self;
        let s = xi + b2;
        let xi2 = xi * xi;
        let y = self.inv_w2(xi);
        let dy = 2.0 * (m2 * xi2 * xi + tau * (3.0 * xi2 + 3.0 * xi * b2 + b2 * b2)) / (xi2 * xi * s * s * s);
        let sy = y.max(0.0).sqrt();
        let f = xi - k * (xi * y - d * sy) + b2 - 0.5 * (b2 * y + tau / xi2) - e;
        let df = 1.0 - k * (y + xi * dy - 0.5 * d * dy / sy) - 0.5 * (b2 * dy - 2.0 * tau / (xi2 * xi));
        (f, df)
    }
}

/// `f_U(ξ)`; errors when `ξ` lies outside `Ω_f = {f_Ω > 0}`.
pub fn eval_fu(xi: f64, u: &ConservedState, eos: &Eos) -> Result<f64> {
    let c = Coeffs::new(u, eos);
    if !(xi > 0.0) || !(f_omega(xi, c.b2, c.m2, c.tau) > 0.0) {
        return Err(RmhdError::OutsideDomain { xi });
    }
    Ok(c.eval(xi).0)
}

/// `W(ξ)` on `Ω_f`.
pub fn lorentz_of_xi(xi: f64, u: &ConservedState) -> Result<f64> {
    let mb = dot(&u.m, &u.b);
    let (b2, m2, tau) = (norm2(&u.b), norm2(&u.m), mb * mb);
    let fo = f_omega(xi, b2, m2, tau);
    if !(xi > 0.0) || !(fo > 0.0) {
        return Err(RmhdError::OutsideDomain { xi });
    }
    let s = xi + b2;
    Ok(xi * s / fo.sqrt())
}

/// Solution details beyond the primitive vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovery {
    pub prim: PrimitiveState,
    pub xi: f64,
    pub lorentz: f64,
    pub iterations: usize,
}

/// Recovers `V` from an admissible `U`; returns `(V, ξ*)`.
pub fn recover_primitives(u: &ConservedState, eos: &Eos) -> Result<(PrimitiveState, f64)> {
    recover(u, eos).map(|r| (r.prim, r.xi))
}

pub fn recover(u: &ConservedState, eos: &Eos) -> Result<Recovery> {
    let rep = is_admissible_first_form(u);
    let not_admissible = || RmhdError::NotAdmissible {
        d: u.d,
        q: rep.q_value,
        psi: rep.psi_value,
    };
    if !rep.admissible {
        return Err(not_admissible());
    }
    let c = Coeffs::new(u, eos);
    // ξ₄ > ξ_Ω whenever D > 0, so ξ₄ alone is the lower end of the bracket.
    let lo = xi_4(u);
    let hi = eos.gamma() * u.e;
    let (f_lo, _) = c.eval(lo);
    if !(f_lo < 0.0) || !(hi > lo) {
        // f_U(ξ₄) < 0 is equivalent to admissibility; failing here means the
        // state sits on the boundary to within rounding.
        return Err(not_admissible());
    }
    let tol = 1e-12 * u.e.max(1.0);
    let root = increasing_root(|x| c.eval(x), lo, hi, hi, MAX_ITERATIONS, 4.0 * f64::EPSILON);
    if !(root.fx.abs() <= tol) {
        return Err(RmhdError::NoConvergence {
            residual: root.fx.abs(),
            iterations: root.iterations,
        });
    }
    let xi = root.x;
    let y = c.inv_w2(xi);
    let sy = y.sqrt();
    let vf = 1.0 / (xi + c.b2);
    let mbx = dot(&u.m, &u.b) / xi;
    let v = [
        (u.m[0] + mbx * u.b[0]) * vf,
        (u.m[1] + mbx * u.b[1]) * vf,
        (u.m[2] + mbx * u.b[2]) * vf,
    ];
    let rho = u.d * sy;
    let p = c.k * (xi * y - u.d * sy);
    if !(rho > 0.0) || !(p > 0.0) || !(y > 0.0) {
        return Err(not_admissible());
    }
    Ok(Recovery {
        prim: PrimitiveState { rho, v, b: u.b, p },
        xi,
        lorentz: 1.0 / sy,
        iterations: root.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::primitive_to_conserved;

    fn u(a: [f64; 8]) -> ConservedState {
        ConservedState::from_array(a)
    }

    #[test]
    fn fu_examples() {
        let eos = Eos::new(5.0 / 3.0).unwrap();
        let gas = u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]);
        assert!(eval_fu(3.5, &gas, &eos).unwrap().abs() < 1e-15);
        let mag = u([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0]);
        assert!(eval_fu(3.5, &mag, &eos).unwrap().abs() < 1e-15);
        assert!((eval_fu(2.0, &gas, &eos).unwrap() + 0.9).abs() < 1e-15);
    }

    #[test]
    fn fu_outside_domain() {
        let eos = Eos::default();
        let s = u([1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0]);
        assert!(matches!(eval_fu(2.0, &s, &eos), Err(RmhdError::OutsideDomain { .. })));
        assert!(eval_fu(3.5, &s, &eos).is_ok());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let eos = Eos::default();
        let v = PrimitiveState::new(0.5, [0.4, -0.3, 0.2], [2.0, 1.0, -1.5], 0.3);
        let s = primitive_to_conserved(&v, &eos).unwrap();
        let c = Coeffs::new(&s, &eos);
        for xi in [4.0, 6.0, 10.0] {
            let h = 1e-6 * xi;
            let fd = (c.eval(xi + h).0 - c.eval(xi - h).0) / (2.0 * h);
            let (_, df) = c.eval(xi);
            assert!((fd - df).abs() < 1e-6 * df.abs().max(1.0), "{fd} vs {df}");
        }
    }

    #[test]
    fn recover_examples() {
        let eos = Eos::default();
        let (v, xi) = recover_primitives(&u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]), &eos).unwrap();
        assert!((xi - 3.5).abs() < 1e-14);
        assert!((v.rho - 1.0).abs() < 1e-14 && (v.p - 1.0).abs() < 1e-14);
        assert_eq!(v.v, [0.0; 3]);

        let (v, xi) = recover_primitives(&u([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0]), &eos).unwrap();
        assert!((xi - 3.5).abs() < 1e-14);
        assert!((v.p - 1.0).abs() < 1e-14);
        assert_eq!(v.b, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn recover_roundtrip_moderate() {
        let eos = Eos::default();
        let v0 = PrimitiveState::new(2.0, [0.9, -0.3, 0.1], [10.0, -5.0, 3.0], 0.7);
        let s = primitive_to_conserved(&v0, &eos).unwrap();
        let r = recover(&s, &eos).unwrap();
        for (a, b) in r.prim.to_array().iter().zip(v0.to_array().iter()) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!((r.lorentz - v0.lorentz_factor()).abs() < 1e-10 * r.lorentz);
        assert!(r.iterations < 40);
    }

    #[test]
    fn recover_rejects_inadmissible() {
        let eos = Eos::default();
        let bad = u([1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        assert!(matches!(recover(&bad, &eos), Err(RmhdError::NotAdmissible { .. })));
    }
}
