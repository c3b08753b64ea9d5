//! Mesh-refinement studies against exact solutions.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Result, RmhdError};
use crate::presets::{alfven_exact, Preset};
use crate::solver1d::{average_cells_1d, initial_grid_1d, run_1d_from};
use crate::state::ConservedState;

pub const DEFAULT_CELLS: [usize; 4] = [50, 100, 200, 400];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    /// `log₂(e_{N/2} / e_N)` against the previous row; absent on the first.
    pub order_l1: Option<f64>,
    pub order_l2: Option<f64>,
    pub steps: usize,
    pub limiter_activations: usize,
}

/// Exact cell averages at time `t`, for presets that have a closed form.
pub fn exact_cell_averages(cfg: &RunConfig, n: usize, t: f64) -> Result<Vec<ConservedState>> {
    if cfg.preset != Preset::Alfven1d {
        return Err(RmhdError::NoExactSolution(cfg.preset.name().to_string()));
    }
    let eos = cfg.eos()?;
    let (lo, hi) = cfg.preset.domain();
    average_cells_1d(lo, hi, n, cfg.quad_order, &eos, |x| alfven_exact(x, t, &eos))
}

/// Discrete `l¹` and `l²` norms of the difference, summed over all eight
/// conservative components and weighted by `dx`.
pub fn error_norms(numerical: &[ConservedState], exact: &[ConservedState], dx: f64) -> (f64, f64) {
    let (s1, s2) = numerical.iter().zip(exact).fold((0.0, 0.0), |(a, b), (u, e)| {
        let d = (*u - *e).to_array();
        (a + d.iter().map(|x| x.abs()).sum::<f64>(), b + d.iter().map(|x| x * x).sum::<f64>())
    });
    (s1 * dx, (s2 * dx).sqrt())
}

/// Runs the configured scheme on every mesh of `cells` (or the config's
/// `cells_list`, or [`DEFAULT_CELLS`]) and tabulates errors and orders.
pub fn convergence_study(cfg: &RunConfig, cells: Option<&[usize]>) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    if cfg.preset != Preset::Alfven1d {
        return Err(RmhdError::NoExactSolution(cfg.preset.name().to_string()));
    }
    let list: Vec<usize> = match cells {
        Some(c) => c.to_vec(),
        None => cfg.cells_list.clone().unwrap_or_else(|| DEFAULT_CELLS.to_vec()),
    };
    if list.is_empty() {
        return Err(RmhdError::Config("empty cell list".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(list.len());
    for &n in &list {
        let grid = initial_grid_1d(cfg, n)?;
        let run = run_1d_from(cfg, grid)?;
        let (t, last) = run.snapshots.last().expect("at least the initial snapshot");
        let exact = exact_cell_averages(cfg, n, *t)?;
        let (l1, l2) = error_norms(&last.cells, &exact, last.dx);
        let order = |prev: f64, cur: f64, np: usize| (prev / cur).ln() / (n as f64 / np as f64).ln();
        let (order_l1, order_l2) = match rows.last() {
            Some(p) => (Some(order(p.l1, l1, p.n)), Some(order(p.l2, l2, p.n))),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            l1,
            l2,
            order_l1,
            order_l2,
            steps: run.log.len(),
            limiter_activations: run.log.iter().map(|r| r.limiter_activations).sum(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scheme;

    #[test]
    fn exact_solution_only_for_alfven() {
        let cfg = RunConfig::new(Preset::Rp1, Scheme::Lxf1);
        assert!(matches!(exact_cell_averages(&cfg, 10, 0.0), Err(RmhdError::NoExactSolution(_))));
        assert!(matches!(convergence_study(&cfg, None), Err(RmhdError::NoExactSolution(_))));
    }

    #[test]
    fn zero_time_error_vanishes() {
        let mut cfg = RunConfig::new(Preset::Alfven1d, Scheme::Lxf1);
        cfg.t_final = Some(0.0);
        let rows = convergence_study(&cfg, Some(&[16])).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].l1, rows[0].order_l1), (0.0, None));
    }

    #[test]
    fn orders_use_mesh_ratio() {
        let mut cfg = RunConfig::new(Preset::Alfven1d, Scheme::Lxf1);
        cfg.t_final = Some(0.05);
        let rows = convergence_study(&cfg, Some(&[20, 40])).unwrap();
        let o = rows[1].order_l1.unwrap();
        assert!(o > 0.5 && o < 1.3, "{o}");
    }
}
