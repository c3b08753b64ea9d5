//! Physical fluxes, the Lax–Friedrichs numerical flux and edge-normal fluxes.

use serde::{Deserialize, Serialize};

use crate::admissible::{mat_vec, Mat3};
use crate::error::{Result, RmhdError};
use crate::recovery::recover_primitives;
use crate::state::{dot, norm2, ConservedState, Eos, PrimitiveState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Builds an axis from the one-based index used in the literature.
    pub fn from_index(i: usize) -> Result<Axis> {
        match i {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            3 => Ok(Axis::Z),
            _ => Err(RmhdError::PreconditionViolated(format!("axis index {i} not in 1..=3"))),
        }
    }

    /// Zero-based component offset.
    pub fn offset(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// `F_i(U)` evaluated from already recovered primitives of the same state.
///
/// Solvers recover each cell once per stage and feed the result here, which
/// is how the cost of repeated recovery is avoided.
pub fn flux_from_primitive(v: &PrimitiveState, u: &ConservedState, axis: Axis) -> ConservedState {
    let i = axis.offset();
    let vi = v.v[i];
    let bi = v.b[i];
    let g = 1.0 - norm2(&v.v);
    let vb = dot(&v.v, &v.b);
    let ptot = v.p + 0.5 * (g * norm2(&v.b) + vb * vb);
    let mut m = [0.0; 3];
    let mut b = [0.0; 3];
    for k in 0..3 {
        m[k] = vi * u.m[k] - bi * (g * v.b[k] + vb * v.v[k]);
        // written so that the k = i component is exactly zero
        b[k] = vi * v.b[k] - bi * v.v[k];
    }
    m[i] += ptot;
    ConservedState {
        d: u.d * vi,
        m,
        b,
        e: u.m[i],
    }
}

/// `F_i(U)`; recovers the primitives first.
pub fn physical_flux(u: &ConservedState, eos: &Eos, axis: Axis) -> Result<ConservedState> {
    let (v, _) = recover_primitives(u, eos)?;
    Ok(flux_from_primitive(&v, u, axis))
}

/// `½(F⁻ + F⁺ − ϱ(U⁺ − U⁻))` from precomputed physical fluxes.
#[inline]
pub fn lax_friedrichs_combine(
    f_minus: &ConservedState,
    f_plus: &ConservedState,
    u_minus: &ConservedState,
    u_plus: &ConservedState,
    rho_spectral: f64,
) -> ConservedState {
    (*f_minus + *f_plus - (*u_plus - *u_minus) * rho_spectral) * 0.5
}

pub fn lax_friedrichs_flux(
    u_minus: &ConservedState,
    u_plus: &ConservedState,
    rho_spectral: f64,
    eos: &Eos,
    axis: Axis,
) -> Result<ConservedState> {
    if !(rho_spectral >= 1.0) {
        return Err(RmhdError::PreconditionViolated(format!(
            "spectral radius bound {rho_spectral} < 1"
        )));
    }
    let fm = physical_flux(u_minus, eos, axis)?;
    let fp = physical_flux(u_plus, eos, axis)?;
    Ok(lax_friedrichs_combine(&fm, &fp, u_minus, u_plus, rho_spectral))
}

fn check_normal(normal: (f64, f64)) -> Result<()> {
    let n2 = normal.0 * normal.0 + normal.1 * normal.1;
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(RmhdError::NotUnitNormal(normal.0, normal.1));
    }
    Ok(())
}

/// `N₁F₁(U) + N₂F₂(U)`.
pub fn rotated_flux(u: &ConservedState, eos: &Eos, normal: (f64, f64)) -> Result<ConservedState> {
    check_normal(normal)?;
    let (v, _) = recover_primitives(u, eos)?;
    let f1 = flux_from_primitive(&v, u, Axis::X);
    let f2 = flux_from_primitive(&v, u, Axis::Y);
    Ok(f1 * normal.0 + f2 * normal.1)
}

/// The same flux computed as `T⁻¹F₁(TU)` with `T` rotating the normal onto `x`.
pub fn rotated_flux_via_frame(u: &ConservedState, eos: &Eos, normal: (f64, f64)) -> Result<ConservedState> {
    check_normal(normal)?;
    let (n1, n2) = normal;
    let t: Mat3 = [[n1, n2, 0.0], [-n2, n1, 0.0], [0.0, 0.0, 1.0]];
    let tt: Mat3 = [[n1, -n2, 0.0], [n2, n1, 0.0], [0.0, 0.0, 1.0]];
    let ur = ConservedState {
        d: u.d,
        m: mat_vec(&t, &u.m),
        b: mat_vec(&t, &u.b),
        e: u.e,
    };
    let f = physical_flux(&ur, eos, Axis::X)?;
    Ok(ConservedState {
        d: f.d,
        m: mat_vec(&tt, &f.m),
        b: mat_vec(&tt, &f.b),
        e: f.e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::primitive_to_conserved;

    fn u(a: [f64; 8]) -> ConservedState {
        ConservedState::from_array(a)
    }

    fn assert_close(a: &ConservedState, b: &ConservedState, tol: f64) {
        let s = a.max_abs().max(b.max_abs()).max(1.0);
        for k in 0..8 {
            assert!((a[k] - b[k]).abs() <= tol * s, "component {k}: {} vs {}", a[k], b[k]);
        }
    }

    #[test]
    fn rest_state_fluxes() {
        let eos = Eos::default();
        let f = physical_flux(&u([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0]), &eos, Axis::X).unwrap();
        assert_close(&f, &u([0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 1e-14);
        let gas = u([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]);
        let f = physical_flux(&gas, &eos, Axis::X).unwrap();
        assert_close(&f, &u([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 1e-14);
        let lf = lax_friedrichs_flux(&gas, &gas, 1.0, &eos, Axis::X).unwrap();
        assert_close(&lf, &f, 1e-15);
    }

    #[test]
    fn self_flux_of_field_vanishes_exactly() {
        let eos = Eos::default();
        let v = PrimitiveState::new(0.4, [0.3, -0.6, 0.2], [1.3, -2.0, 0.7], 0.05);
        let s = primitive_to_conserved(&v, &eos).unwrap();
        for (axis, k) in [(Axis::X, 4), (Axis::Y, 5), (Axis::Z, 6)] {
            assert_eq!(physical_flux(&s, &eos, axis).unwrap()[k], 0.0);
        }
        let f1 = physical_flux(&s, &eos, Axis::X).unwrap();
        let f2 = physical_flux(&s, &eos, Axis::Y).unwrap();
        assert_eq!(f1[5], -f2[4]);
    }

    #[test]
    fn dissipation_flips_under_swap() {
        let eos = Eos::default();
        let a = primitive_to_conserved(&PrimitiveState::new(1.0, [0.1, 0.0, 0.0], [0.5, 0.2, 0.0], 1.0), &eos).unwrap();
        let b = primitive_to_conserved(&PrimitiveState::new(0.5, [-0.2, 0.3, 0.0], [0.5, -0.1, 0.3], 0.2), &eos).unwrap();
        let ab = lax_friedrichs_flux(&a, &b, 1.0, &eos, Axis::X).unwrap();
        let ba = lax_friedrichs_flux(&b, &a, 1.0, &eos, Axis::X).unwrap();
        let central = (physical_flux(&a, &eos, Axis::X).unwrap() + physical_flux(&b, &eos, Axis::X).unwrap()) * 0.5;
        assert_close(&((ab + ba) * 0.5), &central, 1e-14);
        assert_close(&(ab - ba), &(a - b), 1e-14);
        assert!(lax_friedrichs_flux(&a, &b, 0.5, &eos, Axis::X).is_err());
    }

    #[test]
    fn rotated_paths_agree() {
        let eos = Eos::default();
        let v = PrimitiveState::new(0.8, [0.5, -0.4, 0.3], [2.0, 1.0, -1.0], 0.3);
        let s = primitive_to_conserved(&v, &eos).unwrap();
        let th = std::f64::consts::PI / 6.0;
        let n = (th.cos(), th.sin());
        let a = rotated_flux(&s, &eos, n).unwrap();
        let b = rotated_flux_via_frame(&s, &eos, n).unwrap();
        assert_close(&a, &b, 1e-12);
        assert_close(&rotated_flux(&s, &eos, (1.0, 0.0)).unwrap(), &physical_flux(&s, &eos, Axis::X).unwrap(), 0.0);
        assert_close(&rotated_flux(&s, &eos, (0.0, 1.0)).unwrap(), &physical_flux(&s, &eos, Axis::Y).unwrap(), 0.0);
        assert!(matches!(rotated_flux(&s, &eos, (1.0, 1.0)), Err(RmhdError::NotUnitNormal(..))));
    }

    #[test]
    fn axis_indices() {
        assert_eq!(Axis::from_index(2).unwrap(), Axis::Y);
        assert!(Axis::from_index(0).is_err());
        assert!(Axis::from_index(4).is_err());
    }
}
