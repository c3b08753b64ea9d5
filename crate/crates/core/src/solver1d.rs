//! One-dimensional schemes: first-order Lax–Friedrichs and second-order MUSCL
//! with the PCP limiter and SSP-RK3 time stepping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissible::is_admissible_first_form;
use crate::boundary::{pad_1d, BoundaryKind, GHOSTS};
use crate::config::{RunConfig, Scheme, SlopeKind};
use crate::error::{Result, RmhdError};
use crate::flux::{flux_from_primitive, lax_friedrichs_combine, Axis};
use crate::limiter::{pcp_limit, CellNodeData};
use crate::presets::{alfven_exact, Preset};
use crate::quadrature::gauss_legendre;
use crate::recovery::recover;
use crate::state::{norm2, primitive_to_conserved, ConservedState, Eos, PrimitiveState};

/// Spectral radius bound used by every numerical flux (the speed of light).
pub const RHO_SPECTRAL: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_lo: f64,
    pub dx: f64,
    pub cells: Vec<ConservedState>,
    pub bc: BoundaryKind,
    /// Left and right ghost states for Dirichlet boundaries.
    pub fixed: (ConservedState, ConservedState),
}

impl Grid1D {
    pub fn new(x_lo: f64, x_hi: f64, cells: Vec<ConservedState>, bc: BoundaryKind) -> Result<Self> {
        if cells.len() < 4 {
            return Err(RmhdError::Config(format!("need at least 4 cells, got {}", cells.len())));
        }
        let dx = (x_hi - x_lo) / cells.len() as f64;
        if !(dx > 0.0) {
            return Err(RmhdError::Config("empty domain".into()));
        }
        let fixed = (cells[0], cells[cells.len() - 1]);
        Ok(Grid1D { x_lo, dx, cells, bc, fixed })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn x_center(&self, j: usize) -> f64 {
        self.x_lo + (j as f64 + 0.5) * self.dx
    }

    pub fn padded(&self) -> Vec<ConservedState> {
        pad_1d(&self.cells, self.bc, self.fixed)
    }

    /// `Σ_j Ū_j Δx`.
    pub fn totals(&self) -> ConservedState {
        self.cells.iter().fold(ConservedState::ZERO, |a, u| a + *u) * self.dx
    }

    fn with_cells(&self, cells: Vec<ConservedState>) -> Grid1D {
        Grid1D { cells, ..self.clone() }
    }
}

/// Cell averages of `f` over a uniform mesh, by `quad_order`-point Gauss rules.
pub fn average_cells_1d(
    x_lo: f64,
    x_hi: f64,
    n: usize,
    quad_order: usize,
    eos: &Eos,
    f: impl Fn(f64) -> PrimitiveState + Sync,
) -> Result<Vec<ConservedState>> {
    let (xq, wq) = gauss_legendre(quad_order)?;
    let dx = (x_hi - x_lo) / n as f64;
    (0..n)
        .into_par_iter()
        .map(|j| {
            let c = x_lo + (j as f64 + 0.5) * dx;
            let mut acc = ConservedState::ZERO;
            for (xi, wi) in xq.iter().zip(&wq) {
                acc += primitive_to_conserved(&f(c + 0.5 * dx * xi), eos)? * (0.5 * wi);
            }
            Ok(acc)
        })
        .collect()
}

/// Builds the initial grid of a 1D preset.
pub fn initial_grid_1d(cfg: &RunConfig, n: usize) -> Result<Grid1D> {
    let eos = cfg.eos()?;
    let (lo, hi) = cfg.preset.domain();
    let bc = cfg.boundary();
    if cfg.preset == Preset::Alfven1d {
        let cells = average_cells_1d(lo, hi, n, cfg.quad_order, &eos, |x| alfven_exact(x, 0.0, &eos))?;
        return Grid1D::new(lo, hi, cells, bc);
    }
    let (l, r) = cfg
        .riemann_states()
        .ok_or_else(|| RmhdError::Config(format!("preset {} is not one-dimensional", cfg.preset.name())))?;
    let ul = primitive_to_conserved(&l, &eos)?;
    let ur = primitive_to_conserved(&r, &eos)?;
    let x0 = 0.5 * (lo + hi);
    let dx = (hi - lo) / n as f64;
    let (xq, wq) = gauss_legendre(cfg.quad_order)?;
    let cells = (0..n)
        .map(|j| {
            let a = lo + j as f64 * dx;
            let b = a + dx;
            if b <= x0 {
                ul
            } else if a >= x0 {
                ur
            } else {
                let c = 0.5 * (a + b);
                xq.iter().zip(&wq).fold(ConservedState::ZERO, |acc, (xi, wi)| {
                    acc + if c + 0.5 * dx * xi < x0 { ul } else { ur } * (0.5 * wi)
                })
            }
        })
        .collect();
    let mut g = Grid1D::new(lo, hi, cells, bc)?;
    g.fixed = (ul, ur);
    Ok(g)
}

/// `Δt = cfl·Δx`, rejecting CFL numbers above the scheme's bound.
pub fn compute_dt(grid: &Grid1D, cfl: f64, scheme: Scheme) -> Result<f64> {
    let bound = scheme.cfl_bound();
    if !(cfl > 0.0) || cfl > bound || scheme == Scheme::Lxf2d {
        return Err(RmhdError::CflTooLarge { cfl, bound });
    }
    Ok(cfl * grid.dx)
}

fn recover_all(states: &[ConservedState], eos: &Eos, offset: isize) -> Result<Vec<PrimitiveState>> {
    states
        .par_iter()
        .enumerate()
        .map(|(k, u)| {
            recover(u, eos)
                .map(|r| r.prim)
                .map_err(|e| RmhdError::at_cell(format!("{}", k as isize - offset), e))
        })
        .collect()
}

/// One forward-Euler Lax–Friedrichs step.
pub fn step_lxf_1d(grid: &Grid1D, dt: f64, eos: &Eos) -> Result<Grid1D> {
    let pad = grid.padded();
    let prim = recover_all(&pad, eos, GHOSTS as isize)?;
    let flux: Vec<ConservedState> = pad
        .iter()
        .zip(&prim)
        .map(|(u, v)| flux_from_primitive(v, u, Axis::X))
        .collect();
    let n = grid.n_cells();
    // interface k sits between padded cells k and k+1
    let fhat: Vec<ConservedState> = (GHOSTS - 1..GHOSTS + n)
        .map(|k| lax_friedrichs_combine(&flux[k], &flux[k + 1], &pad[k], &pad[k + 1], RHO_SPECTRAL))
        .collect();
    let lambda = dt / grid.dx;
    let cells = (0..n)
        .map(|j| grid.cells[j] - (fhat[j + 1] - fhat[j]) * lambda)
        .collect();
    Ok(grid.with_cells(cells))
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

fn limited_slope(l: &ConservedState, c: &ConservedState, r: &ConservedState, kind: SlopeKind) -> ConservedState {
    match kind {
        SlopeKind::Central => (*r - *l) * 0.5,
        SlopeKind::Minmod => {
            let a = (*c - *l).to_array();
            let b = (*r - *c).to_array();
            let mut s = [0.0; 8];
            for k in 0..8 {
                s[k] = minmod(a[k], b[k]);
            }
            ConservedState::from_array(s)
        }
    }
}

/// Minmod-limited linear traces `(U⁺_{j−½}, U⁻_{j+½})` of every interior cell.
pub fn reconstruct_muscl(grid: &Grid1D) -> Vec<(ConservedState, ConservedState)> {
    let pad = grid.padded();
    (GHOSTS..GHOSTS + grid.n_cells())
        .map(|k| traces(&pad, k, SlopeKind::Minmod))
        .collect()
}

fn traces(pad: &[ConservedState], k: usize, kind: SlopeKind) -> (ConservedState, ConservedState) {
    let half = limited_slope(&pad[k - 1], &pad[k], &pad[k + 1], kind) * 0.5;
    (pad[k] - half, pad[k] + half)
}

/// Per-step bookkeeping of the MUSCL scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    /// Cells (summed over stages) where the limiter changed the traces.
    pub limiter_activations: usize,
}

/// `L(U) = −(F̂_{j+½} − F̂_{j−½})/Δx` with limited traces.
fn muscl_rhs(grid: &Grid1D, eos: &Eos, eps: Option<f64>, kind: SlopeKind) -> Result<(Vec<ConservedState>, usize)> {
    let pad = grid.padded();
    let n = grid.n_cells();
    // traces for interior cells plus one ghost on each side
    let ks: Vec<usize> = (GHOSTS - 1..GHOSTS + n + 1).collect();
    let limited: Vec<((ConservedState, ConservedState), bool)> = ks
        .par_iter()
        .map(|&k| {
            let (l, r) = traces(&pad, k, kind);
            match eps {
                None => Ok(((l, r), false)),
                Some(e) => {
                    let data = CellNodeData::new(pad[k], vec![l, r]);
                    let (out, th) = pcp_limit(&data, e)
                        .map_err(|err| RmhdError::at_cell(format!("{}", k as isize - GHOSTS as isize), err))?;
                    Ok(((out.node_values[0], out.node_values[1]), th.is_active()))
                }
            }
        })
        .collect::<Result<_>>()?;
    let activations = limited[1..=n].iter().filter(|(_, a)| *a).count();
    let flat: Vec<ConservedState> = limited.iter().flat_map(|((l, r), _)| [*l, *r]).collect();
    let prim = recover_all(&flat, eos, 0)
        .map_err(|e| match e {
            RmhdError::AtCell { cell, source } => {
                let idx: isize = cell.parse().unwrap_or(0);
                let side = if idx % 2 == 0 { "left" } else { "right" };
                RmhdError::at_cell(format!("{} ({side} trace)", idx / 2 - 1), *source)
            }
            other => other,
        })?;
    let flux: Vec<ConservedState> = flat
        .iter()
        .zip(&prim)
        .map(|(u, v)| flux_from_primitive(v, u, Axis::X))
        .collect();
    // interface between trace-cell c (right trace 2c+1) and c+1 (left trace 2c+2)
    let fhat: Vec<ConservedState> = (0..=n)
        .map(|c| {
            let (a, b) = (2 * c + 1, 2 * c + 2);
            lax_friedrichs_combine(&flux[a], &flux[b], &flat[a], &flat[b], RHO_SPECTRAL)
        })
        .collect();
    let inv_dx = 1.0 / grid.dx;
    let rhs = (0..n).map(|j| (fhat[j + 1] - fhat[j]) * (-inv_dx)).collect();
    Ok((rhs, activations))
}

fn euler(grid: &Grid1D, rhs: &[ConservedState], dt: f64) -> Grid1D {
    grid.with_cells(grid.cells.iter().zip(rhs).map(|(u, r)| *u + *r * dt).collect())
}

/// `u + c (v − u)` cellwise; the SSP-RK3 stages in convex-combination form.
fn blend(u: &Grid1D, v: &Grid1D, c: f64) -> Grid1D {
    u.with_cells(u.cells.iter().zip(&v.cells).map(|(a, b)| *a + (*b - *a) * c).collect())
}

fn check_averages(grid: &Grid1D) -> Result<()> {
    for (j, u) in grid.cells.iter().enumerate() {
        let r = is_admissible_first_form(u);
        if !r.admissible {
            return Err(RmhdError::at_cell(
                format!("{j}"),
                RmhdError::NotAdmissible { d: u.d, q: r.q_value, psi: r.psi_value },
            ));
        }
    }
    Ok(())
}

/// One SSP-RK3 step of the limited MUSCL scheme; `eps = None` disables limiting.
pub fn step_muscl_pcp_1d(grid: &Grid1D, dt: f64, eos: &Eos, eps: Option<f64>) -> Result<(Grid1D, StageStats)> {
    step_muscl_pcp_1d_with(grid, dt, eos, eps, SlopeKind::Minmod)
}

/// As [`step_muscl_pcp_1d`] with an explicit slope choice.
pub fn step_muscl_pcp_1d_with(
    grid: &Grid1D,
    dt: f64,
    eos: &Eos,
    eps: Option<f64>,
    kind: SlopeKind,
) -> Result<(Grid1D, StageStats)> {
    let (l0, a0) = muscl_rhs(grid, eos, eps, kind)?;
    let u1 = euler(grid, &l0, dt);
    check_averages(&u1)?;
    let (l1, a1) = muscl_rhs(&u1, eos, eps, kind)?;
    let u2 = blend(grid, &euler(&u1, &l1, dt), 0.25);
    check_averages(&u2)?;
    let (l2, a2) = muscl_rhs(&u2, eos, eps, kind)?;
    let u3 = blend(grid, &euler(&u2, &l2, dt), 2.0 / 3.0);
    Ok((u3, StageStats { limiter_activations: a0 + a1 + a2 }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub min_rho: f64,
    pub min_p: f64,
    pub max_v: f64,
    pub limiter_activations: usize,
}

/// Primitive extrema over a set of states; fails on the first inadmissible one.
pub fn primitive_extrema(cells: &[ConservedState], eos: &Eos) -> Result<(f64, f64, f64)> {
    let prim = recover_all(cells, eos, 0)?;
    Ok(prim.iter().fold((f64::INFINITY, f64::INFINITY, 0.0_f64), |(r, p, v), w| {
        (r.min(w.rho), p.min(w.p), v.max(norm2(&w.v).sqrt()))
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run1d {
    /// `(t, grid)` pairs, always including the initial and final states.
    pub snapshots: Vec<(f64, Grid1D)>,
    pub log: Vec<StepRecord>,
}

/// Advances a 1D preset to its final time.
pub fn run_1d(cfg: &RunConfig) -> Result<Run1d> {
    cfg.validate()?;
    let grid = initial_grid_1d(cfg, cfg.n_cells())?;
    run_1d_from(cfg, grid)
}

/// Like [`run_1d`] from a given initial grid.
pub fn run_1d_from(cfg: &RunConfig, mut grid: Grid1D) -> Result<Run1d> {
    let eos = cfg.eos()?;
    let t_final = cfg.t_final();
    let dt_full = compute_dt(&grid, cfg.cfl, cfg.scheme)?;
    check_averages(&grid).map_err(|e| e.at_step(0))?;
    let mut snapshots = vec![(0.0, grid.clone())];
    let mut log = Vec::new();
    let mut t = 0.0;
    let mut step = 0;
    while t < t_final && cfg.max_steps.is_none_or(|m| step < m) {
        let dt = dt_full.min(t_final - t);
        let (next, acts) = match cfg.scheme {
            Scheme::Lxf1 => (step_lxf_1d(&grid, dt, &eos), 0),
            Scheme::Muscl2Pcp => match step_muscl_pcp_1d_with(&grid, dt, &eos, cfg.eps.0, cfg.slope) {
                Ok((g, s)) => (Ok(g), s.limiter_activations),
                Err(e) => (Err(e), 0),
            },
            Scheme::Lxf2d => unreachable!("validated as 1D"),
        };
        step += 1;
        grid = next.map_err(|e| e.at_step(step))?;
        check_averages(&grid).map_err(|e| e.at_step(step))?;
        t = if t_final - t <= dt_full { t_final } else { t + dt };
        let (min_rho, min_p, max_v) = primitive_extrema(&grid.cells, &eos).map_err(|e| e.at_step(step))?;
        log.push(StepRecord { step, t, dt, min_rho, min_p, max_v, limiter_activations: acts });
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 && t < t_final {
            snapshots.push((t, grid.clone()));
        }
    }
    if log.last().is_some_and(|r| r.t > 0.0) {
        snapshots.push((t, grid));
    }
    Ok(Run1d { snapshots, log })
}
