//! Initial data of the benchmark problems.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryKind;
use crate::error::{Result, RmhdError};
use crate::state::{Eos, PrimitiveState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "alfven1d")]
    Alfven1d,
    #[serde(rename = "sine2d-init")]
    Sine2dInit,
    #[serde(rename = "rp1")]
    Rp1,
    #[serde(rename = "rp2")]
    Rp2,
    #[serde(rename = "rp3")]
    Rp3,
    #[serde(rename = "rotor")]
    Rotor,
    #[serde(rename = "blast")]
    Blast,
    /// 1D Riemann problem with user-supplied left and right states.
    #[serde(rename = "custom")]
    Custom,
}

/// Amplitude of the transverse velocity in the Alfvén wave.
pub const ALFVEN_AMPLITUDE: f64 = 0.99;
pub const ALFVEN_PRESSURE: f64 = 0.01;
pub const ROTOR_OMEGA: f64 = 9.95;
pub const BLAST_FIELD: f64 = 0.1;

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Alfven1d => "alfven1d",
            Preset::Sine2dInit => "sine2d-init",
            Preset::Rp1 => "rp1",
            Preset::Rp2 => "rp2",
            Preset::Rp3 => "rp3",
            Preset::Rotor => "rotor",
            Preset::Blast => "blast",
            Preset::Custom => "custom",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Preset::Sine2dInit | Preset::Rotor | Preset::Blast => 2,
            _ => 1,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Preset::Blast => 4.0 / 3.0,
            _ => 5.0 / 3.0,
        }
    }

    pub fn boundary(&self) -> BoundaryKind {
        match self {
            Preset::Alfven1d | Preset::Sine2dInit => BoundaryKind::Periodic,
            Preset::Rp1 | Preset::Rp2 | Preset::Rp3 | Preset::Custom => BoundaryKind::Dirichlet,
            Preset::Rotor | Preset::Blast => BoundaryKind::Outflow,
        }
    }

    /// `(lo, hi)` along each axis.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Preset::Alfven1d | Preset::Sine2dInit => (0.0, 1.0),
            Preset::Blast => (-6.0, 6.0),
            _ => (-0.5, 0.5),
        }
    }

    pub fn default_t_final(&self) -> f64 {
        match self {
            Preset::Alfven1d => 1.0,
            Preset::Sine2dInit => 0.1,
            Preset::Rp1 | Preset::Rp2 | Preset::Rp3 | Preset::Custom => 0.4,
            Preset::Rotor => 0.1,
            Preset::Blast => 0.5,
        }
    }

    /// Left and right states of the Riemann presets.
    pub fn riemann_states(&self) -> Option<(PrimitiveState, PrimitiveState)> {
        let p = PrimitiveState::new;
        match self {
            Preset::Rp1 => Some((
                p(1.0, [0.0; 3], [5.0, 26.0, 26.0], 30.0),
                p(1.0, [0.0; 3], [5.0, 0.7, 0.7], 1.0),
            )),
            Preset::Rp2 => Some((
                p(1.0, [0.0; 3], [10.0, 7.0, 7.0], 1e4),
                p(1.0, [0.0; 3], [10.0, 0.7, 0.7], 1e-8),
            )),
            Preset::Rp3 => Some((
                p(1.0, [0.99999, 0.0, 0.0], [100.0, 70.0, 70.0], 0.1),
                p(1.0, [-0.99999, 0.0, 0.0], [100.0, -70.0, -70.0], 0.1),
            )),
            _ => None,
        }
    }
}

/// `κ = √(1 + ρhW²)` for the Alfvén wave.
pub fn alfven_kappa(eos: &Eos) -> f64 {
    let w2 = 1.0 / (1.0 - ALFVEN_AMPLITUDE * ALFVEN_AMPLITUDE);
    (1.0 + eos.enthalpy(1.0, ALFVEN_PRESSURE) * w2).sqrt()
}

/// Exact Alfvén wave solution at `(x, t)`.
pub fn alfven_exact(x: f64, t: f64, eos: &Eos) -> PrimitiveState {
    let k = alfven_kappa(eos);
    let phase = 2.0 * PI * (x + t / k);
    let v2 = ALFVEN_AMPLITUDE * phase.sin();
    let v3 = ALFVEN_AMPLITUDE * phase.cos();
    PrimitiveState::new(1.0, [0.0, v2, v3], [1.0, k * v2, k * v3], ALFVEN_PRESSURE)
}

pub fn sine2d(x: f64, y: f64) -> PrimitiveState {
    PrimitiveState::new(
        1.0 + 0.99999999 * (2.0 * PI * (x + y)).sin(),
        [0.9, 0.2, 0.0],
        [1.0, 1.0, 1.0],
        0.01,
    )
}

pub fn rotor(x: f64, y: f64) -> PrimitiveState {
    let r = (x * x + y * y).sqrt();
    let a = ROTOR_OMEGA;
    let b = [1.0, 0.0, 0.0];
    if r < 0.1 {
        PrimitiveState::new(10.0, [-a * y, a * x, 0.0], b, 1.0)
    } else if r <= 0.115 {
        let d = (0.115 - r) / 0.015;
        // speed tapers linearly from the disk edge value α·0.1 to zero
        let s = a * 0.1 * d / r;
        PrimitiveState::new(1.0 + 9.0 * d, [-s * y, s * x, 0.0], b, 1.0)
    } else {
        PrimitiveState::new(1.0, [0.0; 3], b, 1.0)
    }
}

pub fn blast(x: f64, y: f64, b_ambient: f64) -> PrimitiveState {
    let r = (x * x + y * y).sqrt();
    let (rho, p) = if r < 0.8 {
        (1e-2, 1.0)
    } else if r > 1.0 {
        (1e-4, 5e-4)
    } else {
        let s = (r - 0.8) / 0.2;
        (1e-2 + s * (1e-4 - 1e-2), 1.0 + s * (5e-4 - 1.0))
    };
    PrimitiveState::new(rho, [0.0; 3], [b_ambient, 0.0, 0.0], p)
}

/// Pointwise initial data of a 2D preset.
pub fn initial_2d(preset: Preset, b_ambient: f64) -> Result<Box<dyn Fn(f64, f64) -> PrimitiveState + Sync>> {
    match preset {
        Preset::Sine2dInit => Ok(Box::new(sine2d)),
        Preset::Rotor => Ok(Box::new(rotor)),
        Preset::Blast => Ok(Box::new(move |x, y| blast(x, y, b_ambient))),
        other => Err(RmhdError::Config(format!("preset {} is not two-dimensional", other.name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_value() {
        let k = alfven_kappa(&Eos::default());
        assert!((k - 7.2462).abs() < 1e-4, "{k}");
    }

    #[test]
    fn alfven_is_periodic() {
        let eos = Eos::default();
        let a = alfven_exact(0.1, 0.0, &eos);
        let k = alfven_kappa(&eos);
        let b = alfven_exact(0.1, k, &eos);
        for (x, y) in a.to_array().iter().zip(b.to_array().iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.lorentz_factor() - 1.0 / (1.0f64 - 0.9801).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rotor_regions() {
        assert_eq!(rotor(0.0, 0.0).rho, 10.0);
        let inner = rotor(0.0, 0.099);
        assert!((inner.v[0] + 9.95 * 0.099).abs() < 1e-14);
        assert_eq!(rotor(0.3, 0.0).rho, 1.0);
        let mid = rotor(0.1075, 0.0);
        assert!((mid.rho - 5.5).abs() < 1e-12);
        // maximal Lorentz factor just inside r = 0.1
        let w = rotor(0.0999999, 0.0).lorentz_factor();
        assert!((w - 10.01).abs() < 0.01, "{w}");
    }

    #[test]
    fn blast_taper() {
        let mid = blast(0.9, 0.0, 0.1);
        assert!((mid.rho - 0.00505).abs() < 1e-12);
        assert_eq!(blast(0.0, 0.0, 0.1).p, 1.0);
        assert_eq!(blast(5.0, 0.0, 0.1).rho, 1e-4);
    }

    #[test]
    fn riemann_tables() {
        let (l, r) = Preset::Rp3.riemann_states().unwrap();
        assert!((l.lorentz_factor() - 223.607).abs() < 1e-3);
        assert_eq!(r.b, [100.0, -70.0, -70.0]);
        assert!(Preset::Rotor.riemann_states().is_none());
    }
}
