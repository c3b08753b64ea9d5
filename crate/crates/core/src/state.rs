//! Conservative and primitive state vectors and the Γ-law equation of state.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RmhdError};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm2(a: &Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn scale3(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Γ-law equation of state, `p = (Γ - 1) ρ e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eos {
    gamma: f64,
}

impl Eos {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 && gamma <= 2.0 {
            Ok(Eos { gamma })
        } else {
            Err(RmhdError::InvalidGamma(gamma))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(Γ - 1) / Γ`, the factor that appears throughout the recovery equation.
    pub fn gm1_over_gamma(&self) -> f64 {
        (self.gamma - 1.0) / self.gamma
    }

    /// Specific enthalpy `h = 1 + e + p/ρ = 1 + Γ/(Γ-1) p/ρ`.
    pub fn enthalpy(&self, rho: f64, p: f64) -> f64 {
        1.0 + self.gamma / (self.gamma - 1.0) * p / rho
    }
}

impl Default for Eos {
    fn default() -> Self {
        Eos { gamma: 5.0 / 3.0 }
    }
}

/// Primitive variables `V = (ρ, v, B, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub v: Vec3,
    pub b: Vec3,
    pub p: f64,
}

impl PrimitiveState {
    pub fn new(rho: f64, v: Vec3, b: Vec3, p: f64) -> Self {
        PrimitiveState { rho, v, b, p }
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        PrimitiveState {
            rho: a[0],
            v: [a[1], a[2], a[3]],
            b: [a[4], a[5], a[6]],
            p: a[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.rho, self.v[0], self.v[1], self.v[2], self.b[0], self.b[1], self.b[2], self.p,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let v2 = norm2(&self.v);
        let finite = self.to_array().iter().all(|x| x.is_finite());
        if !finite {
            return Err(RmhdError::InvalidPrimitive("non-finite component".into()));
        }
        if !(self.rho > 0.0) {
            return Err(RmhdError::InvalidPrimitive(format!("rho = {} <= 0", self.rho)));
        }
        if !(self.p > 0.0) {
            return Err(RmhdError::InvalidPrimitive(format!("p = {} <= 0", self.p)));
        }
        if !(v2 < 1.0) {
            return Err(RmhdError::InvalidPrimitive(format!("|v| = {} >= 1", v2.sqrt())));
        }
        Ok(())
    }

    pub fn lorentz_factor(&self) -> f64 {
        1.0 / (1.0 - norm2(&self.v)).sqrt()
    }

    /// Magnetic pressure `p_m = ½(W⁻²|B|² + (v·B)²)`.
    pub fn magnetic_pressure(&self) -> f64 {
        let vb = dot(&self.v, &self.b);
        0.5 * ((1.0 - norm2(&self.v)) * norm2(&self.b) + vb * vb)
    }

    pub fn total_pressure(&self) -> f64 {
        self.p + self.magnetic_pressure()
    }

    /// Plasma beta `p / p_m` (infinite when the field vanishes).
    pub fn plasma_beta(&self) -> f64 {
        self.p / self.magnetic_pressure()
    }
}

/// Conservative variables `U = (D, m, B, E)`.
///
/// No invariant is attached to the type: admissibility is a predicate
/// evaluated by [`crate::admissible`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConservedState {
    pub d: f64,
    pub m: Vec3,
    pub b: Vec3,
    pub e: f64,
}

impl ConservedState {
    pub const ZERO: ConservedState = ConservedState {
        d: 0.0,
        m: [0.0; 3],
        b: [0.0; 3],
        e: 0.0,
    };

    pub fn new(d: f64, m: Vec3, b: Vec3, e: f64) -> Self {
        ConservedState { d, m, b, e }
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        ConservedState {
            d: a[0],
            m: [a[1], a[2], a[3]],
            b: [a[4], a[5], a[6]],
            e: a[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.d, self.m[0], self.m[1], self.m[2], self.b[0], self.b[1], self.b[2], self.e,
        ]
    }

    pub fn dot(&self, other: &ConservedState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &ConservedState, t: f64) -> ConservedState {
        *self + (*other - *self) * t
    }
}

impl Index<usize> for ConservedState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.d,
            1..=3 => &self.m[i - 1],
            4..=6 => &self.b[i - 4],
            7 => &self.e,
            _ => panic!("conserved component index {i} out of range"),
        }
    }
}

impl Add for ConservedState {
    type Output = ConservedState;
    fn add(self, o: ConservedState) -> ConservedState {
        ConservedState {
            d: self.d + o.d,
            m: [self.m[0] + o.m[0], self.m[1] + o.m[1], self.m[2] + o.m[2]],
            b: [self.b[0] + o.b[0], self.b[1] + o.b[1], self.b[2] + o.b[2]],
            e: self.e + o.e,
        }
    }
}

impl AddAssign for ConservedState {
    fn add_assign(&mut self, o: ConservedState) {
        *self = *self + o;
    }
}

impl Sub for ConservedState {
    type Output = ConservedState;
    fn sub(self, o: ConservedState) -> ConservedState {
        ConservedState {
            d: self.d - o.d,
            m: [self.m[0] - o.m[0], self.m[1] - o.m[1], self.m[2] - o.m[2]],
            b: [self.b[0] - o.b[0], self.b[1] - o.b[1], self.b[2] - o.b[2]],
            e: self.e - o.e,
        }
    }
}

impl Mul<f64> for ConservedState {
    type Output = ConservedState;
    fn mul(self, s: f64) -> ConservedState {
        ConservedState {
            d: self.d * s,
            m: scale3(&self.m, s),
            b: scale3(&self.b, s),
            e: self.e * s,
        }
    }
}

impl Neg for ConservedState {
    type Output = ConservedState;
    fn neg(self) -> ConservedState {
        self * -1.0
    }
}

/// Maps primitive variables to the conservative vector:
/// `D = ρW`, `m = (ρhW² + |B|²)v − (v·B)B`, `E = ρhW² − p_tot + |B|²`.
pub fn primitive_to_conserved(v: &PrimitiveState, eos: &Eos) -> Result<ConservedState> {
    v.validate()?;
    Ok(primitive_to_conserved_unchecked(v, eos))
}

pub(crate) fn primitive_to_conserved_unchecked(v: &PrimitiveState, eos: &Eos) -> ConservedState {
    let v2 = norm2(&v.v);
    let w2 = 1.0 / (1.0 - v2);
    let w = w2.sqrt();
    let h = eos.enthalpy(v.rho, v.p);
    let rhohw2 = v.rho * h * w2;
    let b2 = norm2(&v.b);
    let vb = dot(&v.v, &v.b);
    let pm = 0.5 * (b2 / w2 + vb * vb);
    let mfac = rhohw2 + b2;
    ConservedState {
        d: v.rho * w,
        m: [
            mfac * v.v[0] - vb * v.b[0],
            mfac * v.v[1] - vb * v.b[1],
            mfac * v.v[2] - vb * v.b[2],
        ],
        b: v.b,
        e: rhohw2 - v.p - pm + b2,
    }
}
