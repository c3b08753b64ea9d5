//! Run configuration read from flat-key JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::boundary::BoundaryKind;
use crate::error::{Result, RmhdError};
use crate::limiter::DEFAULT_EPS;
use crate::presets::{Preset, BLAST_FIELD};
use crate::state::{Eos, PrimitiveState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "lxf1")]
    Lxf1,
    #[serde(rename = "muscl2-pcp")]
    Muscl2Pcp,
    #[serde(rename = "lxf2d")]
    Lxf2d,
}

impl Scheme {
    /// Largest admissible CFL number for the scheme.
    pub fn cfl_bound(&self) -> f64 {
        match self {
            Scheme::Lxf1 | Scheme::Lxf2d => 1.0,
            // half the Gauss–Lobatto end weight of the two-point rule
            Scheme::Muscl2Pcp => 0.5,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Scheme::Lxf2d => 2,
            _ => 1,
        }
    }
}

/// Slope used by the MUSCL reconstruction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeKind {
    /// Componentwise minmod of the one-sided differences.
    #[default]
    Minmod,
    /// Unlimited centred difference; only the admissibility limiter acts.
    Central,
}

/// Limiter tolerance; `None` disables limiting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsSetting(pub Option<f64>);

impl Default for EpsSetting {
    fn default() -> Self {
        EpsSetting(Some(DEFAULT_EPS))
    }
}

impl Serialize for EpsSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("off"),
        }
    }
}

impl<'de> Deserialize<'de> for EpsSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v > 0.0 => Ok(EpsSetting(Some(v))),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("eps must be positive, got {v}"))),
            Raw::Word(w) if w == "off" => Ok(EpsSetting(None)),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("eps must be a number or \"off\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Preset,
    pub scheme: Scheme,
    #[serde(default)]
    pub n_cells: Option<usize>,
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub eps: EpsSetting,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Stop after this many steps even if `t_final` is not reached.
    #[serde(default)]
    pub max_steps: Option<usize>,
    /// Gauss points per direction used to average the initial data.
    #[serde(default = "default_quad")]
    pub quad_order: usize,
    /// Mesh sizes of a convergence study.
    #[serde(default)]
    pub cells_list: Option<Vec<usize>>,
    /// Left state `[ρ, v₁, v₂, v₃, B₁, B₂, B₃, p]` of the custom preset.
    #[serde(default)]
    pub left_state: Option<[f64; 8]>,
    #[serde(default)]
    pub right_state: Option<[f64; 8]>,
    #[serde(default)]
    pub boundary: Option<BoundaryKind>,
    /// Ambient field of the blast preset.
    #[serde(default)]
    pub b_ambient: Option<f64>,
    /// Blast at 400×400 to t = 4 instead of the desk-scale defaults.
    #[serde(default)]
    pub full_scale: bool,
    /// Write a snapshot every this many steps (0: only initial and final).
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub slope: SlopeKind,
}

fn default_cfl() -> f64 {
    0.15
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_quad() -> usize {
    5
}

impl RunConfig {
    pub fn new(preset: Preset, scheme: Scheme) -> Self {
        RunConfig {
            preset,
            scheme,
            n_cells: None,
            nx: None,
            ny: None,
            cfl: default_cfl(),
            t_final: None,
            eps: EpsSetting::default(),
            gamma: None,
            seed: 0,
            output_dir: default_output_dir(),
            max_steps: None,
            quad_order: default_quad(),
            cells_list: None,
            left_state: None,
            right_state: None,
            boundary: None,
            b_ambient: None,
            full_scale: false,
            snapshot_every: 0,
            slope: SlopeKind::Minmod,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| RmhdError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RmhdError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn eos(&self) -> Result<Eos> {
        Eos::new(self.gamma.unwrap_or_else(|| self.preset.gamma()))
    }

    pub fn t_final(&self) -> f64 {
        match self.t_final {
            Some(t) => t,
            None if self.preset == Preset::Blast && self.full_scale => 4.0,
            None => self.preset.default_t_final(),
        }
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary.unwrap_or_else(|| self.preset.boundary())
    }

    pub fn b_ambient(&self) -> f64 {
        self.b_ambient.unwrap_or(BLAST_FIELD)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells.unwrap_or(match self.scheme {
            Scheme::Muscl2Pcp => 400,
            _ => 200,
        })
    }

    pub fn grid_2d(&self) -> (usize, usize) {
        let d = if self.preset == Preset::Blast && self.full_scale { 400 } else { 100 };
        (self.nx.unwrap_or(d), self.ny.unwrap_or(d))
    }

    /// Left and right states of a 1D Riemann preset.
    pub fn riemann_states(&self) -> Option<(PrimitiveState, PrimitiveState)> {
        match self.preset {
            Preset::Custom => Some((
                PrimitiveState::from_array(self.left_state?),
                PrimitiveState::from_array(self.right_state?),
            )),
            p => p.riemann_states(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RmhdError::Config(m));
        self.eos()?;
        if self.preset.dimension() != self.scheme.dimension() {
            return bad(format!(
                "preset {} is {}D but the scheme is {}D",
                self.preset.name(),
                self.preset.dimension(),
                self.scheme.dimension()
            ));
        }
        if !(self.cfl > 0.0) || self.cfl > self.scheme.cfl_bound() {
            return Err(RmhdError::CflTooLarge {
                cfl: self.cfl,
                bound: self.scheme.cfl_bound(),
            });
        }
        if !(self.t_final() >= 0.0) {
            return bad(format!("t_final must be nonnegative, got {}", self.t_final()));
        }
        if self.preset.dimension() == 1 && self.n_cells() < 4 {
            return bad("n_cells must be at least 4".into());
        }
        let (nx, ny) = self.grid_2d();
        if self.preset.dimension() == 2 && (nx < 4 || ny < 4) {
            return bad("nx and ny must be at least 4".into());
        }
        if !(1..=5).contains(&self.quad_order) {
            return bad(format!("quad_order {} not in 1..=5", self.quad_order));
        }
        if self.preset == Preset::Custom {
            let (l, r) = self
                .riemann_states()
                .ok_or_else(|| RmhdError::Config("custom preset needs left_state and right_state".into()))?;
            l.validate()?;
            r.validate()?;
        }
        if let Some(list) = &self.cells_list {
            if list.iter().any(|&n| n < 4) {
                return bad("cells_list entries must be at least 4".into());
            }
        }
        Ok(())
    }
}
