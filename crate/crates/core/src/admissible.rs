//! Admissibility predicates for conservative states.
//!
//! A state is admissible when it corresponds to `ρ > 0`, `p > 0`, `|v| < 1`.
//! Two explicit characterisations are provided: the nonlinear one through
//! `(D, q, Ψ)` and the linear one through the family of half-spaces indexed
//! by `(v*, B*)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RmhdError};
use crate::roots::increasing_root;
use crate::state::{dot, norm2, ConservedState, Vec3};

/// Below this `|B|²` the closed-form zero-field roots are used.
const TINY_B2: f64 = 1e-300;

/// `q(U) = E − √(D² + |m|²)`.
pub fn q_fn(u: &ConservedState) -> f64 {
    u.e - (u.d * u.d + norm2(&u.m)).sqrt()
}

/// `E² − D² − |m|²`, evaluated as `q (E + √(D²+|m|²))` to avoid cancellation.
fn energy_excess(u: &ConservedState) -> f64 {
    let s = (u.d * u.d + norm2(&u.m)).sqrt();
    (u.e - s) * (u.e + s)
}

/// The two terms of `Ψ = T₁ − T₂`; exposed so that callers can measure
/// relative accuracy against the size of the terms rather than of `Ψ`.
pub(crate) fn psi_terms(u: &ConservedState) -> (f64, f64, f64) {
    let b2 = norm2(&u.b);
    let mb = dot(&u.m, &u.b);
    let a = u.e - b2;
    let c = energy_excess(u);
    let phi = (a * a + 3.0 * c).max(0.0).sqrt();
    // Φ − a, rewritten as 3c/(Φ + a) when a > 0 to dodge cancellation
    let radicand = if a > 0.0 { 3.0 * c / (phi + a) } else { phi - a };
    let t1 = (phi + 2.0 * a) * radicand.max(0.0).sqrt();
    let t2 = (13.5 * (u.d * u.d * b2 + mb * mb)).sqrt();
    (phi, t1, t2)
}

/// Returns `(Φ(U), Ψ(U))`.
pub fn psi_fn(u: &ConservedState) -> Result<(f64, f64)> {
    let q = q_fn(u);
    if !(q > 0.0) {
        return Err(RmhdError::PreconditionViolated(format!("q(U) = {q} <= 0")));
    }
    let (phi, t1, t2) = psi_terms(u);
    Ok((phi, t1 - t2))
}

/// `Ψ_ε(U) = Ψ(D, m, B, E − ε)`; `None` when `q(U) − ε ≤ 0`.
pub fn psi_eps(u: &ConservedState, eps: f64) -> Option<f64> {
    let mut ue = *u;
    ue.e -= eps;
    if q_fn(&ue) < 0.0 {
        return None;
    }
    let (_, t1, t2) = psi_terms(&ue);
    Some(t1 - t2)
}

/// Returns `(q̂, q̃)`; under `D > 0, q > 0` the condition `Ψ > 0` is
/// equivalent to `q̂ > 0 ∧ q̃ > 0`.
pub fn hat_tilde_q(u: &ConservedState) -> (f64, f64) {
    let b2 = norm2(&u.b);
    let mb = dot(&u.m, &u.b);
    let a = u.e - b2;
    let c = energy_excess(u);
    let phi = (a * a + 3.0 * c).max(0.0).sqrt();
    let q_hat = phi + 2.0 * a;
    let inner = a * a * a + 13.5 * (b2 * u.d * u.d + mb * mb) - 9.0 * c * a;
    let phi3 = phi * phi * phi;
    // Φ⁶ − inner², factored to keep the difference of squares accurate
    let q_tilde = (phi3 - inner) * (phi3 + inner);
    (q_hat, q_tilde)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub d_positive: bool,
    pub q_value: f64,
    /// `Ψ(U)` when `q > 0`; otherwise `min(q̂, q̃)`, whose sign carries the
    /// same information and which stays defined.
    pub psi_value: f64,
    pub admissible: bool,
}

pub fn is_admissible_first_form(u: &ConservedState) -> AdmissibilityReport {
    let d_positive = u.d > 0.0;
    let q_value = q_fn(u);
    let psi_value = if q_value > 0.0 {
        let (_, t1, t2) = psi_terms(u);
        t1 - t2
    } else {
        let (qh, qt) = hat_tilde_q(u);
        qh.min(qt)
    };
    let admissible = d_positive && q_value > 0.0 && psi_value > 0.0 && u.is_finite();
    AdmissibilityReport {
        d_positive,
        q_value,
        psi_value,
        admissible,
    }
}

pub fn is_admissible(u: &ConservedState) -> bool {
    is_admissible_first_form(u).admissible
}

/// Membership in the ε-strengthened set: `D ≥ ε`, `q ≥ ε`, `Ψ_ε ≥ 0`.
pub fn is_admissible_eps(u: &ConservedState, eps: f64) -> bool {
    is_admissible_eps_split(u, eps, eps)
}

/// Like [`is_admissible_eps`] with separate tolerances for the `(D, q)` pair
/// and the `Ψ_ε` constraint.
pub fn is_admissible_eps_split(u: &ConservedState, eps_dq: f64, eps_psi: f64) -> bool {
    u.is_finite()
        && u.d >= eps_dq
        && q_fn(u) >= eps_dq
        && psi_eps(u, eps_psi).is_some_and(|p| p >= 0.0)
}

/// `U·n* + p_m*`, positive for every admissible `U` and every `|v*| < 1`.
pub fn second_form_margin(u: &ConservedState, v_star: &Vec3, b_star: &Vec3) -> Result<f64> {
    let v2 = norm2(v_star);
    if !(v2 < 1.0) {
        return Err(RmhdError::InvalidDirection(v2.sqrt()));
    }
    let (n, pm) = second_form_normal(v_star, b_star);
    Ok(u.dot(&n) + pm)
}

/// The inward normal `n*` and `p_m*` for a direction pair.
pub fn second_form_normal(v_star: &Vec3, b_star: &Vec3) -> (ConservedState, f64) {
    let g = 1.0 - norm2(v_star);
    let vb = dot(v_star, b_star);
    let n = ConservedState {
        d: -g.sqrt(),
        m: [-v_star[0], -v_star[1], -v_star[2]],
        b: [
            -g * b_star[0] - vb * v_star[0],
            -g * b_star[1] - vb * v_star[1],
            -g * b_star[2] - vb * v_star[2],
        ],
        e: 1.0,
    };
    let pm = 0.5 * (g * norm2(b_star) + vb * vb);
    (n, pm)
}

/// `U_λ = (λD, λm, √λ B, λE)`.
pub fn scale_state(u: &ConservedState, lambda: f64) -> Result<ConservedState> {
    if !(lambda > 0.0) {
        return Err(RmhdError::NonpositiveScale(lambda));
    }
    let s = lambda.sqrt();
    Ok(ConservedState {
        d: lambda * u.d,
        m: [lambda * u.m[0], lambda * u.m[1], lambda * u.m[2]],
        b: [s * u.b[0], s * u.b[1], s * u.b[2]],
        e: lambda * u.e,
    })
}

pub type Mat3 = [[f64; 3]; 3];

pub fn mat_vec(t: &Mat3, x: &Vec3) -> Vec3 {
    [dot(&t[0], x), dot(&t[1], x), dot(&t[2], x)]
}

/// Applies `diag(1, T₃, T₃, 1)`.
pub fn rotate_state(u: &ConservedState, t3: &Mat3) -> Result<ConservedState> {
    let mut dev = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let g: f64 = (0..3).map(|k| t3[k][i] * t3[k][j]).sum();
            let id = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g - id).abs());
        }
    }
    if !(dev <= 1e-12) {
        return Err(RmhdError::NotOrthogonal(dev));
    }
    Ok(ConservedState {
        d: u.d,
        m: mat_vec(t3, &u.m),
        b: mat_vec(t3, &u.b),
        e: u.e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuxKind {
    Omega,
    Quartic4,
    Cubic3,
    Quad2,
}

/// Evaluates `f_Ω`, `f₄`, `f₃` or `f₂` at `ξ`.
pub fn eval_aux_polynomial(kind: AuxKind, xi: f64, u: &ConservedState) -> f64 {
    let b2 = norm2(&u.b);
    let m2 = norm2(&u.m);
    let mb = dot(&u.m, &u.b);
    let tau = mb * mb;
    match kind {
        AuxKind::Omega => f_omega(xi, b2, m2, tau),
        AuxKind::Quartic4 => {
            let s = xi + b2;
            f_omega(xi, b2, m2, tau) - u.d * u.d * s * s
        }
        AuxKind::Cubic3 => xi * xi * xi + (b2 - u.e) * xi * xi - 0.5 * (b2 * u.d * u.d + tau),
        AuxKind::Quad2 => {
            3.0 * xi * xi + 4.0 * (b2 - u.e) * xi + b2 * b2 + u.d * u.d + m2 - 2.0 * b2 * u.e
        }
    }
}

#[inline]
pub(crate) fn f_omega(xi: f64, b2: f64, m2: f64, tau: f64) -> f64 {
    let s = xi + b2;
    xi * xi * s * s - (xi * xi * m2 + (2.0 * xi + b2) * tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxRoots {
    pub xi_omega: f64,
    pub xi_4: f64,
    pub xi_3: f64,
    pub xi_2r: f64,
}

const AUX_RTOL: f64 = 1e-15;
const AUX_ITERS: usize = 300;

/// Largest nonnegative root of `f_Ω`.
pub fn xi_omega(u: &ConservedState) -> f64 {
    let b2 = norm2(&u.b);
    let m2 = norm2(&u.m);
    let mb = dot(&u.m, &u.b);
    let tau = mb * mb;
    if tau == 0.0 || b2 < TINY_B2 {
        return (m2.sqrt() - b2).max(0.0);
    }
    // f_Ω(0) = −|B|²(m·B)² < 0 and f_Ω(|m|) = (2|m| + |B|²)(|m|²|B|² − (m·B)²) ≥ 0;
    // f_Ω/ξ² is increasing on ξ > 0 so the positive root is unique.
    let hi = m2.sqrt();
    let lo = (tau / b2).sqrt().min(hi);
    let r = increasing_root(
        |x| {
            let s = x + b2;
            let g = s * s - m2 - tau * (2.0 / x + b2 / (x * x));
            let dg = 2.0 * s + tau * (2.0 / (x * x) + 2.0 * b2 / (x * x * x));
            (g, dg)
        },
        lo,
        hi,
        hi,
        AUX_ITERS,
        AUX_RTOL,
    );
    r.x
}

/// Unique positive root of `f₄`.
pub fn xi_4(u: &ConservedState) -> f64 {
    let b2 = norm2(&u.b);
    let m2 = norm2(&u.m);
    let d2 = u.d * u.d;
    let hi = (d2 + m2).sqrt();
    if b2 < TINY_B2 {
        return hi;
    }
    let mb = dot(&u.m, &u.b);
    let tau = mb * mb;
    let lo = (d2 + tau / b2).sqrt().min(hi);
    if lo == hi {
        return hi;
    }
    let r = increasing_root(
        |x| {
            let s = x + b2;
            let f = x * x * s * s - x * x * m2 - (2.0 * x + b2) * tau - d2 * s * s;
            let df = 2.0 * x * s * s + 2.0 * x * x * s - 2.0 * x * m2 - 2.0 * tau - 2.0 * d2 * s;
            (f, df)
        },
        lo,
        hi,
        hi,
        AUX_ITERS,
        AUX_RTOL,
    );
    r.x
}

/// Unique positive root of `f₃`.
pub fn xi_3(u: &ConservedState) -> f64 {
    let b2 = norm2(&u.b);
    if b2 < TINY_B2 {
        return u.e;
    }
    let mb = dot(&u.m, &u.b);
    let c = 0.5 * (b2 * u.d * u.d + mb * mb);
    let a = u.e - b2;
    let hi = a.max(0.0) + c.cbrt();
    let r = increasing_root(
        |x| {
            let f = x * x * (x - a) - c;
            let df = 3.0 * x * x - 2.0 * a * x;
            (f, df)
        },
        0.0,
        hi,
        hi,
        AUX_ITERS,
        AUX_RTOL,
    );
    r.x
}

/// `ξ_Ω, ξ₄, ξ₃, ξ_{2,R}` for a state with `D > 0` and `q > 0`.
pub fn aux_roots(u: &ConservedState) -> Result<AuxRoots> {
    let q = q_fn(u);
    if !(u.d > 0.0) || !(q > 0.0) {
        return Err(RmhdError::PreconditionViolated(format!(
            "aux_roots needs D > 0 and q > 0 (D = {}, q = {q})",
            u.d
        )));
    }
    let (q_hat, _) = hat_tilde_q(u);
    Ok(AuxRoots {
        xi_omega: xi_omega(u),
        xi_4: xi_4(u),
        xi_3: xi_3(u),
        xi_2r: q_hat / 3.0,
    })
}

/// Conservative state on the zero-pressure surface for given `(ρ, v, B)`.
pub fn zero_pressure_state(rho: f64, v: &Vec3, b: &Vec3) -> ConservedState {
    let g = 1.0 - norm2(v);
    let w2 = 1.0 / g;
    let vb = dot(v, b);
    let b2 = norm2(b);
    let pm = 0.5 * (g * b2 + vb * vb);
    let mf = rho * w2 + b2;
    ConservedState {
        d: rho * w2.sqrt(),
        m: [mf * v[0] - vb * b[0], mf * v[1] - vb * b[1], mf * v[2] - vb * b[2]],
        b: *b,
        e: rho * w2 - pm + b2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{primitive_to_conserved, Eos, PrimitiveState};

    fn u(a: [f64; 8]) -> ConservedState {
        ConservedState::from_array(a)
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_fn(&u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5])), 1.5);
        let bad = u([1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        assert!((q_fn(&bad) - (2.0 - 10f64.sqrt())).abs() < 1e-15);
        assert!(!is_admissible(&bad));
    }

    #[test]
    fn psi_examples() {
        let (phi, psi) = psi_fn(&u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5])).unwrap();
        let s22 = 22f64.sqrt();
        assert!((phi - s22).abs() < 1e-14);
        let want = (s22 + 5.0) * (s22 - 2.5).sqrt();
        assert!((psi - want).abs() < 1e-13);
        assert!((psi - 14.34).abs() < 5e-3);

        let (phi, psi) = psi_fn(&u([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.5])).unwrap();
        assert!((phi - 2.0).abs() < 1e-15);
        assert!(psi.abs() < 1e-14);

        assert!(psi_fn(&u([1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0])).is_err());
    }

    #[test]
    fn hat_tilde_on_zero_pressure_surface() {
        let s = zero_pressure_state(1.0, &[0.0; 3], &[1.0, 0.0, 0.0]);
        assert_eq!(s.to_array(), [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.5]);
        let (qh, qt) = hat_tilde_q(&s);
        assert!((qh - 3.0).abs() < 1e-14);
        assert!(qt.abs() < 1e-12);

        let (qh, qt) = hat_tilde_q(&u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]));
        assert!((qh - (22f64.sqrt() + 5.0)).abs() < 1e-14);
        assert!(qt > 0.0);
    }

    #[test]
    fn tilde_q_lxf_split_limit() {
        // U ± F₁(U) at vanishing ρ = p for v = (0.5,0,0), B = (1,0,0)
        let up = u([0.0, -0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.5]);
        let (_, qt) = hat_tilde_q(&up);
        assert!((qt + 675.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn report_examples() {
        let r = is_admissible_first_form(&u([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]));
        assert!(!r.d_positive && !r.admissible);
        let eos = Eos::default();
        let v = PrimitiveState::new(0.3, [0.2, -0.5, 0.1], [3.0, 1.0, -2.0], 0.01);
        assert!(is_admissible(&primitive_to_conserved(&v, &eos).unwrap()));
    }

    #[test]
    fn eps_set_examples() {
        let eps = 1e-13;
        assert!(is_admissible_eps(&u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]), eps));
        let thin = u([eps / 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, eps]);
        assert!(!is_admissible_eps(&thin, eps));
        assert!(is_admissible(&thin));
    }

    #[test]
    fn second_form_examples() {
        let s = u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]);
        assert_eq!(second_form_margin(&s, &[0.0; 3], &[0.0; 3]).unwrap(), 1.5);
        let t = u([1.0, 0.3, -0.2, 0.1, 0.5, 0.5, 0.0, 3.0]);
        let n = (1.0 + norm2(&t.m)).sqrt();
        let vs = [t.m[0] / n, t.m[1] / n, t.m[2] / n];
        let margin = second_form_margin(&t, &vs, &[0.0; 3]).unwrap();
        assert!((margin - q_fn(&t)).abs() < 1e-14);
        assert!(matches!(
            second_form_margin(&s, &[1.0, 0.0, 0.0], &[0.0; 3]),
            Err(RmhdError::InvalidDirection(_))
        ));
    }

    #[test]
    fn scale_and_rotate_examples() {
        let s = u([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0]);
        assert_eq!(scale_state(&s, 1.0).unwrap(), s);
        assert_eq!(
            scale_state(&s, 4.0).unwrap().to_array(),
            [4.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 12.0]
        );
        assert!(scale_state(&s, 0.0).is_err());

        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let swap = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let g = u([1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 9.0]);
        assert_eq!(rotate_state(&g, &id).unwrap(), g);
        assert_eq!(
            rotate_state(&g, &swap).unwrap().to_array(),
            [1.0, 2.0, 1.0, 3.0, 5.0, 4.0, 6.0, 9.0]
        );
        let shear = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(rotate_state(&g, &shear), Err(RmhdError::NotOrthogonal(_))));
    }

    #[test]
    fn aux_polynomial_examples() {
        let z = u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]);
        assert_eq!(eval_aux_polynomial(AuxKind::Omega, 1.0, &z), 1.0);
        assert_eq!(eval_aux_polynomial(AuxKind::Cubic3, z.e, &z), 0.0);
        let w = u([1.0, 0.6, 0.8, 0.0, 0.0, 0.0, 0.0, 2.5]);
        let x4 = (1.0 + 1.0f64).sqrt();
        assert!(eval_aux_polynomial(AuxKind::Quartic4, x4, &w).abs() < 1e-14);
    }

    #[test]
    fn aux_roots_zero_field() {
        let r = aux_roots(&u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5])).unwrap();
        assert_eq!(r.xi_omega, 0.0);
        assert_eq!(r.xi_4, 1.0);
        assert_eq!(r.xi_3, 2.5);
        assert!((r.xi_2r - (22f64.sqrt() + 5.0) / 3.0).abs() < 1e-15);
        assert!((r.xi_2r - 3.2301).abs() < 1e-4);
    }

    #[test]
    fn xi_omega_orthogonal_field() {
        let s = u([1.0, 3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 10.0]);
        assert_eq!(xi_omega(&s), 2.0);
        let s = u([1.0, 0.5, 0.0, 0.0, 0.0, 1.0, 0.0, 10.0]);
        assert_eq!(xi_omega(&s), 0.0);
    }

    #[test]
    fn aux_roots_general() {
        let eos = Eos::default();
        let v = PrimitiveState::new(0.7, [0.3, 0.4, -0.2], [1.5, -0.7, 2.0], 0.2);
        let s = primitive_to_conserved(&v, &eos).unwrap();
        let r = aux_roots(&s).unwrap();
        assert!(r.xi_omega < r.xi_4);
        assert!(r.xi_4 < r.xi_3);
        let scale4 = r.xi_4.powi(4) + norm2(&s.b).powi(2) * r.xi_4.powi(2);
        assert!(eval_aux_polynomial(AuxKind::Quartic4, r.xi_4, &s).abs() < 1e-12 * scale4);
        assert!(eval_aux_polynomial(AuxKind::Omega, r.xi_omega, &s).abs() < 1e-10);
        // sign scan oracle for the f₄ root
        let n = 20000;
        let hi = (s.d * s.d + norm2(&s.m)).sqrt();
        let mut prev = eval_aux_polynomial(AuxKind::Quartic4, 0.0, &s);
        let mut crossing = None;
        for k in 1..=n {
            let x = hi * 1.5 * k as f64 / n as f64;
            let f = eval_aux_polynomial(AuxKind::Quartic4, x, &s);
            if x > 0.0 && prev <= 0.0 && f > 0.0 {
                crossing = Some(x);
            }
            prev = f;
        }
        let c = crossing.unwrap();
        assert!((c - r.xi_4).abs() <= hi * 1.5 / n as f64);
    }

    #[test]
    fn aux_roots_needs_positive_q() {
        assert!(aux_roots(&u([1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0])).is_err());
        assert!(aux_roots(&u([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0])).is_err());
    }
}
