use serde::{Deserialize, Serialize};

use crate::state::ConservedState;

/// Number of ghost layers on each side.
pub const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Periodic,
    Outflow,
    /// Ghost cells keep the values they were initialised with.
    Dirichlet,
}

/// Pads `cells` with `GHOSTS` layers per side. `fixed` supplies the left and
/// right ghost states used by the Dirichlet kind.
pub fn pad_1d(
    cells: &[ConservedState],
    bc: BoundaryKind,
    fixed: (ConservedState, ConservedState),
) -> Vec<ConservedState> {
    let n = cells.len();
    let mut out = Vec::with_capacity(n + 2 * GHOSTS);
    for g in 0..GHOSTS {
        out.push(match bc {
            BoundaryKind::Periodic => cells[(n + g - GHOSTS) % n],
            BoundaryKind::Outflow => cells[0],
            BoundaryKind::Dirichlet => fixed.0,
        });
    }
    out.extend_from_slice(cells);
    for g in 0..GHOSTS {
        out.push(match bc {
            BoundaryKind::Periodic => cells[g % n],
            BoundaryKind::Outflow => cells[n - 1],
            BoundaryKind::Dirichlet => fixed.1,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> ConservedState {
        ConservedState::new(x, [0.0; 3], [0.0; 3], 1.0)
    }

    #[test]
    fn periodic_wraps() {
        let c: Vec<_> = (0..5).map(|i| s(i as f64)).collect();
        let p = pad_1d(&c, BoundaryKind::Periodic, (s(-1.0), s(-1.0)));
        let d: Vec<f64> = p.iter().map(|u| u.d).collect();
        assert_eq!(d, vec![3.0, 4.0, 0.0, 1.0, 2.0, 3.0, 4.0, 0.0, 1.0]);
    }

    #[test]
    fn outflow_and_dirichlet() {
        let c: Vec<_> = (0..4).map(|i| s(i as f64)).collect();
        let p = pad_1d(&c, BoundaryKind::Outflow, (s(-1.0), s(-1.0)));
        assert_eq!(p[0].d, 0.0);
        assert_eq!(p[7].d, 3.0);
        let p = pad_1d(&c, BoundaryKind::Dirichlet, (s(-1.0), s(9.0)));
        assert_eq!((p[1].d, p[6].d), (-1.0, 9.0));
    }
}
