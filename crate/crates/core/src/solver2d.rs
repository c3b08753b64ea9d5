//! Two-dimensional first-order Lax–Friedrichs scheme, divergence-aware
//! initial averaging and the discrete divergence diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissible::is_admissible_first_form;
use crate::boundary::{BoundaryKind, GHOSTS};
use crate::config::{RunConfig, Scheme};
use crate::error::{Result, RmhdError};
use crate::flux::{flux_from_primitive, lax_friedrichs_combine, Axis};
use crate::presets::initial_2d;
use crate::quadrature::gauss_legendre;
use crate::recovery::recover;
use crate::solver1d::RHO_SPECTRAL;
use crate::state::{norm2, primitive_to_conserved, ConservedState, Eos, PrimitiveState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry2D {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Geometry2D {
    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_hi - self.y_lo) / self.ny as f64
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y_lo + (j as f64 + 0.5) * self.dy()
    }
}

/// Cell averages on a uniform rectangular mesh, stored row by row (`j·nx + i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub geom: Geometry2D,
    pub cells: Vec<ConservedState>,
    pub bc_x: BoundaryKind,
    pub bc_y: BoundaryKind,
    pub eos: Eos,
    /// Ghost ring frozen at construction, used by Dirichlet sides.
    frozen: Vec<ConservedState>,
}

impl Grid2D {
    pub fn new(
        geom: Geometry2D,
        cells: Vec<ConservedState>,
        bc_x: BoundaryKind,
        bc_y: BoundaryKind,
        eos: Eos,
    ) -> Result<Self> {
        if geom.nx < 4 || geom.ny < 4 || cells.len() != geom.nx * geom.ny {
            return Err(RmhdError::Config(format!(
                "grid {}x{} with {} cells",
                geom.nx,
                geom.ny,
                cells.len()
            )));
        }
        let mut g = Grid2D { geom, cells, bc_x, bc_y, eos, frozen: Vec::new() };
        g.frozen = g.padded_with(BoundaryKind::Outflow, BoundaryKind::Outflow);
        Ok(g)
    }

    pub fn nx(&self) -> usize {
        self.geom.nx
    }

    pub fn ny(&self) -> usize {
        self.geom.ny
    }

    pub fn at(&self, i: usize, j: usize) -> &ConservedState {
        &self.cells[j * self.geom.nx + i]
    }

    pub fn totals(&self) -> ConservedState {
        self.cells.iter().fold(ConservedState::ZERO, |a, u| a + *u) * (self.geom.dx() * self.geom.dy())
    }

    fn padded_with(&self, bx: BoundaryKind, by: BoundaryKind) -> Vec<ConservedState> {
        let (nx, ny) = (self.geom.nx, self.geom.ny);
        let (px, py) = (nx + 2 * GHOSTS, ny + 2 * GHOSTS);
        let map = |k: usize, n: usize, bc: BoundaryKind| -> Option<usize> {
            let s = k as isize - GHOSTS as isize;
            if s >= 0 && (s as usize) < n {
                return Some(s as usize);
            }
            match bc {
                BoundaryKind::Periodic => Some(((s + n as isize) % n as isize) as usize),
                BoundaryKind::Outflow => Some(s.clamp(0, n as isize - 1) as usize),
                BoundaryKind::Dirichlet => None,
            }
        };
        let mut out = Vec::with_capacity(px * py);
        for jj in 0..py {
            for ii in 0..px {
                let v = match (map(ii, nx, bx), map(jj, ny, by)) {
                    (Some(i), Some(j)) => self.cells[j * nx + i],
                    _ => self.frozen[jj * px + ii],
                };
                out.push(v);
            }
        }
        out
    }

    /// Cells with `GHOSTS` layers on every side, row by row.
    ///
    /// Outflow ghosts copy the neighbouring primitive state except for the
    /// normal field component of the first layer, which is chosen so that the
    /// central-difference divergence of the boundary cell vanishes. A plain
    /// copy would seed divergence errors at the boundary that then diffuse
    /// inward.
    pub fn padded(&self) -> Vec<ConservedState> {
        let mut pad = self.padded_with(self.bc_x, self.bc_y);
        if self.bc_y == BoundaryKind::Outflow {
            self.fill_normal_field(&mut pad, Axis::Y);
        }
        if self.bc_x == BoundaryKind::Outflow {
            self.fill_normal_field(&mut pad, Axis::X);
        }
        pad
    }

    fn fill_normal_field(&self, pad: &mut [ConservedState], axis: Axis) {
        let (nx, ny) = (self.geom.nx, self.geom.ny);
        let px = nx + 2 * GHOSTS;
        let at = |i: isize, j: isize| ((j + GHOSTS as isize) as usize) * px + (i + GHOSTS as isize) as usize;
        // (ghost, inner neighbour, boundary cell, tangential stride, sign)
        let mut edges: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
        let (ratio, comp_n, comp_t) = match axis {
            Axis::Y => {
                let (top, bot) = (ny as isize, -1);
                for i in 0..nx as isize {
                    edges.push((at(i, top), at(i, top - 2), at(i, top - 1), 1, -1.0));
                    edges.push((at(i, bot), at(i, bot + 2), at(i, bot + 1), 1, 1.0));
                }
                (self.geom.dy() / self.geom.dx(), 1, 0)
            }
            _ => {
                let (right, left) = (nx as isize, -1);
                for j in 0..ny as isize {
                    edges.push((at(right, j), at(right - 2, j), at(right - 1, j), px, -1.0));
                    edges.push((at(left, j), at(left + 2, j), at(left + 1, j), px, 1.0));
                }
                (self.geom.dx() / self.geom.dy(), 0, 1)
            }
        };
        for (ghost, inner, cell, stride, sign) in edges {
            let Ok(rec) = recover(&pad[cell], &self.eos) else {
                // left as a plain copy; the step reports the failing cell
                continue;
            };
            let tangential = pad[cell + stride].b[comp_t] - pad[cell - stride].b[comp_t];
            let mut v = rec.prim;
            v.b[comp_n] = pad[inner].b[comp_n] + sign * ratio * tangential;
            if let Ok(u) = primitive_to_conserved(&v, &self.eos) {
                pad[ghost] = u;
            }
        }
    }

    fn with_cells(&self, cells: Vec<ConservedState>) -> Grid2D {
        Grid2D { cells, ..self.clone() }
    }
}

/// Central-difference divergence of the cell-average field at cell `(i, j)`;
/// boundary cells use ghost values.
pub fn discrete_divergence(grid: &Grid2D, i: usize, j: usize) -> Result<f64> {
    if i >= grid.nx() || j >= grid.ny() {
        return Err(RmhdError::IndexOutOfRange(i, j));
    }
    Ok(divergence_field(grid)[j * grid.nx() + i])
}

/// `div_ij` for every cell.
pub fn divergence_field(grid: &Grid2D) -> Vec<f64> {
    let pad = grid.padded();
    divergence_from_padded(&pad, grid.geom)
}

fn divergence_from_padded(pad: &[ConservedState], g: Geometry2D) -> Vec<f64> {
    let px = g.nx + 2 * GHOSTS;
    let (hx, hy) = (0.5 / g.dx(), 0.5 / g.dy());
    let mut out = Vec::with_capacity(g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = (j + GHOSTS) * px + i + GHOSTS;
            out.push((pad[k + 1].b[0] - pad[k - 1].b[0]) * hx + (pad[k + px].b[1] - pad[k - px].b[1]) * hy);
        }
    }
    out
}

/// `E_∞ = max_ij |div_ij|`.
pub fn divergence_error_sup(grid: &Grid2D) -> f64 {
    divergence_field(grid).iter().fold(0.0, |a, d| a.max(d.abs()))
}

/// Cell averages of pointwise primitive data. `ρ, v, B₃, p` are averaged over
/// the cell; `B₁` over the vertical segment through the centre spanning the
/// neighbouring centres, `B₂` over the matching horizontal segment. For a
/// solenoidal field integrated exactly this makes every `div_ij` vanish.
pub fn init_cell_averages_2d(
    v0: &(dyn Fn(f64, f64) -> PrimitiveState + Sync),
    geom: Geometry2D,
    quad_order: usize,
    eos: &Eos,
) -> Result<Vec<ConservedState>> {
    let (xq, wq) = gauss_legendre(quad_order)?;
    let (dx, dy) = (geom.dx(), geom.dy());
    (0..geom.nx * geom.ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % geom.nx, k / geom.nx);
            let (xc, yc) = (geom.x_center(i), geom.y_center(j));
            let mut acc = [0.0; 6]; // ρ, v₁, v₂, v₃, B₃, p
            for (a, wa) in xq.iter().zip(&wq) {
                for (b, wb) in xq.iter().zip(&wq) {
                    let v = v0(xc + 0.5 * dx * a, yc + 0.5 * dy * b);
                    let w = 0.25 * wa * wb;
                    acc[0] += w * v.rho;
                    acc[1] += w * v.v[0];
                    acc[2] += w * v.v[1];
                    acc[3] += w * v.v[2];
                    acc[4] += w * v.b[2];
                    acc[5] += w * v.p;
                }
            }
            let mut b1 = 0.0;
            let mut b2 = 0.0;
            for (a, wa) in xq.iter().zip(&wq) {
                b1 += 0.5 * wa * v0(xc, yc + dy * a).b[0];
                b2 += 0.5 * wa * v0(xc + dx * a, yc).b[1];
            }
            let avg = PrimitiveState::new(acc[0], [acc[1], acc[2], acc[3]], [b1, b2, acc[4]], acc[5]);
            primitive_to_conserved(&avg, eos)
                .map_err(|e| RmhdError::at_cell(format!("({i}, {j})"), e))
        })
        .collect()
}

pub fn initial_grid_2d(cfg: &RunConfig) -> Result<Grid2D> {
    let eos = cfg.eos()?;
    let (lo, hi) = cfg.preset.domain();
    let (nx, ny) = cfg.grid_2d();
    let geom = Geometry2D { x_lo: lo, x_hi: hi, y_lo: lo, y_hi: hi, nx, ny };
    let f = initial_2d(cfg.preset, cfg.b_ambient())?;
    let cells = init_cell_averages_2d(f.as_ref(), geom, cfg.quad_order, &eos)?;
    Grid2D::new(geom, cells, cfg.boundary(), cfg.boundary(), eos)
}

/// `Δt = cfl / (1/Δx + 1/Δy)`, so `cfl ≤ 1` is the PCP bound.
pub fn compute_dt_2d(grid: &Grid2D, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0) || cfl > 1.0 {
        return Err(RmhdError::CflTooLarge { cfl, bound: 1.0 });
    }
    Ok(cfl / (1.0 / grid.geom.dx() + 1.0 / grid.geom.dy()))
}

/// One Lax–Friedrichs step.
pub fn step_lxf_2d(grid: &Grid2D, dt: f64, eos: &Eos) -> Result<Grid2D> {
    let g = grid.geom;
    let (nx, ny) = (g.nx, g.ny);
    let px = nx + 2 * GHOSTS;
    let pad = grid.padded();
    let fluxes: Vec<(ConservedState, ConservedState)> = pad
        .par_iter()
        .enumerate()
        .map(|(k, u)| {
            let (ii, jj) = (k % px, k / px);
            let inside = |a: usize, n: usize| a + 1 >= GHOSTS && a <= n + GHOSTS;
            if !(inside(ii, nx) && inside(jj, ny)) {
                // corners and the outer ghost layer never enter an interface flux
                return Ok((ConservedState::ZERO, ConservedState::ZERO));
            }
            let v = recover(u, eos).map_err(|e| {
                RmhdError::at_cell(
                    format!("({}, {})", ii as isize - GHOSTS as isize, jj as isize - GHOSTS as isize),
                    e,
                )
            })?;
            Ok((flux_from_primitive(&v.prim, u, Axis::X), flux_from_primitive(&v.prim, u, Axis::Y)))
        })
        .collect::<Result<_>>()?;
    let (lx, ly) = (dt / g.dx(), dt / g.dy());
    let cells = (0..nx * ny)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let k = (j + GHOSTS) * px + i + GHOSTS;
            let fx = |a: usize, b: usize| lax_friedrichs_combine(&fluxes[a].0, &fluxes[b].0, &pad[a], &pad[b], RHO_SPECTRAL);
            let fy = |a: usize, b: usize| lax_friedrichs_combine(&fluxes[a].1, &fluxes[b].1, &pad[a], &pad[b], RHO_SPECTRAL);
            pad[k] - (fx(k, k + 1) - fx(k - 1, k)) * lx - (fy(k, k + px) - fy(k - px, k)) * ly
        })
        .collect();
    Ok(grid.with_cells(cells))
}

/// Lax–Friedrichs update of one cell from its four edge neighbours, with
/// `lx = Δt/Δx` and `ly = Δt/Δy`.
#[allow(clippy::too_many_arguments)]
pub fn lxf_update_cell(
    center: &ConservedState,
    east: &ConservedState,
    west: &ConservedState,
    north: &ConservedState,
    south: &ConservedState,
    lx: f64,
    ly: f64,
    eos: &Eos,
) -> Result<ConservedState> {
    let names = ["center", "east", "west", "north", "south"];
    let states = [center, east, west, north, south];
    let mut fx = [ConservedState::ZERO; 5];
    let mut fy = [ConservedState::ZERO; 5];
    for (k, u) in states.iter().enumerate() {
        let v = recover(u, eos).map_err(|e| RmhdError::at_cell(names[k], e))?;
        fx[k] = flux_from_primitive(&v.prim, u, Axis::X);
        fy[k] = flux_from_primitive(&v.prim, u, Axis::Y);
    }
    let lf = |f: &[ConservedState; 5], a: usize, b: usize| {
        lax_friedrichs_combine(&f[a], &f[b], states[a], states[b], RHO_SPECTRAL)
    };
    Ok(*center - (lf(&fx, 0, 1) - lf(&fx, 2, 0)) * lx - (lf(&fy, 0, 3) - lf(&fy, 4, 0)) * ly)
}

/// The five-point stencil of the divergence counterexample: every cell holds
/// `(ε, 0.5, 0, 0, 0, 0, 0, ε)` except the east neighbour, which carries
/// `B₁ = 1`. Returns the updated centre cell for `Δt/Δx = Δt/Δy = lambda`.
pub fn divergence_counterexample_update(eps: f64, lambda: f64, eos: &Eos) -> Result<ConservedState> {
    let hat = primitive_to_conserved(&PrimitiveState::new(eps, [0.5, 0.0, 0.0], [0.0; 3], eps), eos)?;
    let tilde = primitive_to_conserved(&PrimitiveState::new(eps, [0.5, 0.0, 0.0], [1.0, 0.0, 0.0], eps), eos)?;
    lxf_update_cell(&hat, &tilde, &hat, &hat, &hat, lambda, lambda, eos)
}

/// Limit `ε → 0` of `q̃` for the updated centre cell of the counterexample.
pub fn divergence_counterexample_limit(lambda: f64) -> f64 {
    27.0 * (lambda / 4.0).powi(7) * (2.0 * lambda + 1.0).powi(2) * (lambda - 4.0)
}

/// Normal-component traces of `B` at the `Q` Gauss points of each edge of one
/// cell; `in` traces come from the cell's own polynomial, `out` traces from
/// the neighbour across the edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTraces {
    pub right_in: Vec<f64>,
    pub right_out: Vec<f64>,
    pub left_in: Vec<f64>,
    pub left_out: Vec<f64>,
    pub top_in: Vec<f64>,
    pub top_out: Vec<f64>,
    pub bottom_in: Vec<f64>,
    pub bottom_out: Vec<f64>,
}

/// Returns `(div_in, div_out)`; weights must sum to one.
pub fn div_in_out_diagnostics(t: &EdgeTraces, weights: &[f64], dx: f64, dy: f64) -> Result<(f64, f64)> {
    let q = weights.len();
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(RmhdError::WeightMismatch(format!("weights sum to {sum}, expected 1")));
    }
    let all = [
        &t.right_in, &t.right_out, &t.left_in, &t.left_out, &t.top_in, &t.top_out, &t.bottom_in, &t.bottom_out,
    ];
    if all.iter().any(|v| v.len() != q) {
        return Err(RmhdError::WeightMismatch(format!("every edge needs {q} trace values")));
    }
    let ws = |a: &[f64], b: &[f64]| -> f64 { weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - y)).sum() };
    let div_in = ws(&t.right_in, &t.left_in) / dx + ws(&t.top_in, &t.bottom_in) / dy;
    let div_out = ws(&t.right_out, &t.left_out) / dx + ws(&t.top_out, &t.bottom_out) / dy;
    Ok((div_in, div_out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord2d {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub div_sup: f64,
    pub min_rho: f64,
    pub min_p: f64,
    pub max_lorentz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run2d {
    pub snapshots: Vec<(f64, Grid2D)>,
    pub log: Vec<StepRecord2d>,
}

fn check_and_measure(grid: &Grid2D, eos: &Eos) -> Result<(f64, f64, f64)> {
    let nx = grid.nx();
    grid.cells
        .par_iter()
        .enumerate()
        .map(|(k, u)| {
            let cell = || format!("({}, {})", k % nx, k / nx);
            let r = is_admissible_first_form(u);
            if !r.admissible {
                return Err(RmhdError::at_cell(
                    cell(),
                    RmhdError::NotAdmissible { d: u.d, q: r.q_value, psi: r.psi_value },
                ));
            }
            let v = recover(u, eos).map_err(|e| RmhdError::at_cell(cell(), e))?;
            Ok((v.prim.rho, v.prim.p, 1.0 / (1.0 - norm2(&v.prim.v)).sqrt()))
        })
        .try_reduce(
            || (f64::INFINITY, f64::INFINITY, 1.0),
            |a, b| Ok((a.0.min(b.0), a.1.min(b.1), a.2.max(b.2))),
        )
}

pub fn run_2d(cfg: &RunConfig) -> Result<Run2d> {
    cfg.validate()?;
    if cfg.scheme != Scheme::Lxf2d {
        return Err(RmhdError::Config("2D runs use the lxf2d scheme".into()));
    }
    run_2d_from(cfg, initial_grid_2d(cfg)?)
}

pub fn run_2d_from(cfg: &RunConfig, mut grid: Grid2D) -> Result<Run2d> {
    let eos = cfg.eos()?;
    let t_final = cfg.t_final();
    let dt_full = compute_dt_2d(&grid, cfg.cfl)?;
    check_and_measure(&grid, &eos).map_err(|e| e.at_step(0))?;
    let mut snapshots = vec![(0.0, grid.clone())];
    let mut log = Vec::new();
    let (mut t, mut step) = (0.0, 0);
    while t < t_final && cfg.max_steps.is_none_or(|m| step < m) {
        let dt = dt_full.min(t_final - t);
        step += 1;
        grid = step_lxf_2d(&grid, dt, &eos).map_err(|e| e.at_step(step))?;
        let (min_rho, min_p, max_lorentz) = check_and_measure(&grid, &eos).map_err(|e| e.at_step(step))?;
        t = if t_final - t <= dt_full { t_final } else { t + dt };
        log.push(StepRecord2d { step, t, dt, div_sup: divergence_error_sup(&grid), min_rho, min_p, max_lorentz });
        if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 && t < t_final {
            snapshots.push((t, grid.clone()));
        }
    }
    if step > 0 {
        snapshots.push((t, grid));
    }
    Ok(Run2d { snapshots, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n: usize) -> Geometry2D {
        Geometry2D { x_lo: 0.0, x_hi: 1.0, y_lo: 0.0, y_hi: 1.0, nx: n, ny: n }
    }

    #[test]
    fn uniform_field_is_divergence_free_and_fixed() {
        let eos = Eos::default();
        let v = PrimitiveState::new(1.0, [0.2, -0.1, 0.3], [1.0, 0.5, -0.3], 0.4);
        let cells = init_cell_averages_2d(&|_, _| v, geom(8), 3, &eos).unwrap();
        let g = Grid2D::new(geom(8), cells, BoundaryKind::Periodic, BoundaryKind::Outflow, eos).unwrap();
        assert_eq!(divergence_error_sup(&g), 0.0);
        let n = step_lxf_2d(&g, 0.01, &eos).unwrap();
        for (a, b) in n.cells.iter().zip(&g.cells) {
            assert!((*a - *b).max_abs() < 1e-14);
        }
    }

    #[test]
    fn linear_solenoidal_field() {
        let eos = Eos::default();
        let f = |x: f64, y: f64| PrimitiveState::new(1.0, [0.0; 3], [y, x, 0.0], 1.0);
        let cells = init_cell_averages_2d(&f, geom(10), 2, &eos).unwrap();
        let g = Grid2D::new(geom(10), cells, BoundaryKind::Outflow, BoundaryKind::Outflow, eos).unwrap();
        for j in 1..9 {
            for i in 1..9 {
                assert!(discrete_divergence(&g, i, j).unwrap().abs() < 1e-13);
            }
        }
        assert!(matches!(discrete_divergence(&g, 10, 0), Err(RmhdError::IndexOutOfRange(10, 0))));
    }

    #[test]
    fn point_sampled_ramp_has_unit_divergence() {
        let eos = Eos::default();
        let f = |x: f64, _: f64| PrimitiveState::new(1.0, [0.0; 3], [x, 0.0, 0.0], 1.0);
        let cells = init_cell_averages_2d(&f, geom(10), 1, &eos).unwrap();
        let g = Grid2D::new(geom(10), cells, BoundaryKind::Outflow, BoundaryKind::Outflow, eos).unwrap();
        assert!((discrete_divergence(&g, 4, 4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trig_solenoidal_field() {
        let eos = Eos::default();
        let f = |x: f64, y: f64| PrimitiveState::new(1.0, [0.0; 3], [-(y.sin()), x.sin(), 0.0], 1.0);
        let cells = init_cell_averages_2d(&f, geom(16), 5, &eos).unwrap();
        let g = Grid2D::new(geom(16), cells, BoundaryKind::Outflow, BoundaryKind::Outflow, eos).unwrap();
        for j in 1..15 {
            for i in 1..15 {
                assert!(discrete_divergence(&g, i, j).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dt_bound() {
        let eos = Eos::default();
        let v = PrimitiveState::new(1.0, [0.0; 3], [0.0; 3], 1.0);
        let cells = init_cell_averages_2d(&|_, _| v, geom(10), 1, &eos).unwrap();
        let g = Grid2D::new(geom(10), cells, BoundaryKind::Periodic, BoundaryKind::Periodic, eos).unwrap();
        assert!((compute_dt_2d(&g, 1.0).unwrap() - 0.05).abs() < 1e-15);
        assert!(compute_dt_2d(&g, 1.01).is_err());
    }

    #[test]
    fn counterexample_stencil() {
        let eos = Eos::default();
        let lim = divergence_counterexample_limit(0.5);
        assert!((lim + 1.80244e-4).abs() < 1e-8);
        for eps in [1e-4, 1e-6, 1e-8] {
            let u = divergence_counterexample_update(eps, 0.5, &eos).unwrap();
            assert!(!is_admissible_first_form(&u).admissible);
        }
        let u = divergence_counterexample_update(1e-6, 0.5, &eos).unwrap();
        assert!((crate::admissible::hat_tilde_q(&u).1 - lim).abs() < 1e-6);
        assert!((u.b[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn div_diagnostics() {
        let z = vec![0.0];
        let uniform = EdgeTraces {
            right_in: vec![1.0], right_out: vec![1.0], left_in: vec![1.0], left_out: vec![1.0],
            top_in: vec![2.0], top_out: vec![2.0], bottom_in: vec![2.0], bottom_out: vec![2.0],
        };
        assert_eq!(div_in_out_diagnostics(&uniform, &[1.0], 0.1, 0.1).unwrap(), (0.0, 0.0));
        // piecewise constant: zero field in the cell, B₁ = 1 to the right
        let jump = EdgeTraces {
            right_in: z.clone(), right_out: vec![1.0], left_in: z.clone(), left_out: z.clone(),
            top_in: z.clone(), top_out: z.clone(), bottom_in: z.clone(), bottom_out: z.clone(),
        };
        let (di, dout) = div_in_out_diagnostics(&jump, &[1.0], 0.1, 0.1).unwrap();
        assert_eq!(di, 0.0);
        assert!((dout - 10.0).abs() < 1e-12);
        assert!(div_in_out_diagnostics(&jump, &[0.6], 0.1, 0.1).is_err());
        assert!(div_in_out_diagnostics(&jump, &[0.5, 0.5], 0.1, 0.1).is_err());
    }

    #[test]
    fn linear_in_cell_field_two_point_traces() {
        // B = (x, −y) inside the cell [0,h]², with arbitrary outer traces
        let h = 0.2;
        let (xq, wq) = gauss_legendre(2).unwrap();
        let w: Vec<f64> = wq.iter().map(|x| 0.5 * x).collect();
        let ys: Vec<f64> = xq.iter().map(|a| 0.5 * h * (1.0 + a)).collect();
        let t = EdgeTraces {
            right_in: ys.iter().map(|_| h).collect(),
            left_in: ys.iter().map(|_| 0.0).collect(),
            top_in: ys.iter().map(|_| -h).collect(),
            bottom_in: ys.iter().map(|_| 0.0).collect(),
            right_out: vec![1.0, 1.0],
            left_out: vec![0.0, 0.0],
            top_out: vec![0.0, 0.0],
            bottom_out: vec![0.0, 0.0],
        };
        let (di, dout) = div_in_out_diagnostics(&t, &w, h, h).unwrap();
        assert!(di.abs() < 1e-14);
        assert!(dout.abs() > 1.0);
    }
}
