//! Physical-constraints-preserving limiter: scales node values toward the cell
//! average in three stages (density, `q`, `Ψ_ε`) until every node lies in `G_ε`.

use serde::{Deserialize, Serialize};

use crate::admissible::{psi_eps, q_fn};
use crate::error::{Result, RmhdError};
use crate::state::ConservedState;

/// Default limiter tolerance.
pub const DEFAULT_EPS: f64 = 1e-13;

const THETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellNodeData {
    pub average: ConservedState,
    pub node_values: Vec<ConservedState>,
}

impl CellNodeData {
    pub fn new(average: ConservedState, node_values: Vec<ConservedState>) -> Self {
        CellNodeData { average, node_values }
    }

    /// Weighted combination of the node values.
    pub fn weighted_mean(&self, weights: &[f64]) -> Result<ConservedState> {
        if weights.len() != self.node_values.len() {
            return Err(RmhdError::WeightMismatch(format!(
                "{} weights for {} nodes",
                weights.len(),
                self.node_values.len()
            )));
        }
        Ok(self
            .node_values
            .iter()
            .zip(weights)
            .fold(ConservedState::ZERO, |acc, (u, w)| acc + *u * *w))
    }
}

/// Scaling factors of the three stages; `1` means the stage left the data alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thetas {
    pub density: f64,
    pub q: f64,
    pub psi: f64,
}

impl Thetas {
    pub const IDENTITY: Thetas = Thetas { density: 1.0, q: 1.0, psi: 1.0 };

    pub fn is_active(&self) -> bool {
        self.density < 1.0 || self.q < 1.0 || self.psi < 1.0
    }
}

/// Tolerances of `G_ε`: `eps` for `D` and `q`, `eps·max(1, Ē)` for `Ψ_ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsPolicy {
    pub dq: f64,
    pub psi: f64,
}

impl EpsPolicy {
    pub fn for_average(eps: f64, average: &ConservedState) -> Self {
        EpsPolicy {
            dq: eps,
            psi: eps * average.e.max(1.0),
        }
    }

    pub fn contains(&self, u: &ConservedState) -> bool {
        u.is_finite()
            && u.d >= self.dq
            && q_fn(u) >= self.dq
            && psi_eps(u, self.psi).is_some_and(|p| p >= 0.0)
    }
}

fn psi_nonneg(u: &ConservedState, eps_psi: f64) -> bool {
    psi_eps(u, eps_psi).is_some_and(|p| p >= 0.0)
}

/// Shrinks `theta` until `ok(theta)` holds; the mathematical value already
/// satisfies it, so this only absorbs rounding in the affine map.
fn shrink_until(mut theta: f64, ok: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..64 {
        if theta <= 0.0 || ok(theta) {
            return theta.max(0.0);
        }
        theta = theta * (1.0 - 1e-15) - f64::MIN_POSITIVE;
        if !ok(theta) {
            theta -= 4.0 * f64::EPSILON;
        }
    }
    0.0
}

/// Solves `Ψ_ε((1−θ)Ū + θŬ) = 0` for `θ ∈ [0, 1)` by bisection, returning the
/// lower end of the final bracket so the combination satisfies `Ψ_ε ≥ 0`.
pub fn solve_theta(average: &ConservedState, candidate: &ConservedState, eps: f64) -> Result<f64> {
    solve_theta_with(average, candidate, EpsPolicy::for_average(eps, average))
}

fn solve_theta_with(average: &ConservedState, candidate: &ConservedState, pol: EpsPolicy) -> Result<f64> {
    if !pol.contains(average) {
        return Err(RmhdError::PreconditionViolated("average outside G_eps".into()));
    }
    if psi_nonneg(candidate, pol.psi) {
        return Err(RmhdError::PreconditionViolated("candidate already satisfies psi_eps >= 0".into()));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > THETA_TOL {
        let mid = 0.5 * (lo + hi);
        if psi_nonneg(&average.lerp(candidate, mid), pol.psi) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Applies the three limiting stages. Errors when the average is not in `G_ε`.
pub fn pcp_limit(data: &CellNodeData, eps: f64) -> Result<(CellNodeData, Thetas)> {
    let avg = data.average;
    let pol = EpsPolicy::for_average(eps, &avg);
    if !pol.contains(&avg) {
        let q = q_fn(&avg);
        return Err(RmhdError::AverageNotAdmissible {
            d: avg.d,
            q,
            psi_eps: psi_eps(&avg, pol.psi).unwrap_or(f64::NAN),
        });
    }
    if data.node_values.iter().all(|u| pol.contains(u)) {
        return Ok((data.clone(), Thetas::IDENTITY));
    }
    let mut nodes = data.node_values.clone();
    let mut th = Thetas::IDENTITY;

    // (i) density
    let d_min = nodes.iter().map(|u| u.d).fold(f64::INFINITY, f64::min);
    if !(d_min >= pol.dq) {
        let den = avg.d - d_min;
        let t = if den > 0.0 { ((avg.d - pol.dq) / den).clamp(0.0, 1.0) } else { 0.0 };
        let t = shrink_until(t, |t| nodes.iter().all(|u| avg.d + t * (u.d - avg.d) >= pol.dq));
        for u in nodes.iter_mut() {
            u.d = avg.d + t * (u.d - avg.d);
        }
        th.density = t;
    }

    // (ii) q, scaling D, m and E while leaving B as is
    let scale_dme = |u: &ConservedState, t: f64| ConservedState {
        d: avg.d + t * (u.d - avg.d),
        m: [
            avg.m[0] + t * (u.m[0] - avg.m[0]),
            avg.m[1] + t * (u.m[1] - avg.m[1]),
            avg.m[2] + t * (u.m[2] - avg.m[2]),
        ],
        b: u.b,
        e: avg.e + t * (u.e - avg.e),
    };
    let q_min = nodes.iter().map(q_fn).fold(f64::INFINITY, f64::min);
    if !(q_min >= pol.dq) {
        let q_avg = q_fn(&avg);
        let den = q_avg - q_min;
        let t = if den > 0.0 { ((q_avg - pol.dq) / den).clamp(0.0, 1.0) } else { 0.0 };
        let t = shrink_until(t, |t| nodes.iter().all(|u| q_fn(&scale_dme(u, t)) >= pol.dq));
        for u in nodes.iter_mut() {
            *u = scale_dme(u, t);
        }
        th.q = t;
    }

    // (iii) Ψ_ε, scaling every component
    let mut t3 = 1.0_f64;
    for u in nodes.iter() {
        if !psi_nonneg(u, pol.psi) {
            t3 = t3.min(solve_theta_with(&avg, u, pol)?);
        }
    }
    if t3 < 1.0 {
        let t3 = shrink_until(t3, |t| nodes.iter().all(|u| pol.contains(&avg.lerp(u, t))));
        for u in nodes.iter_mut() {
            *u = avg.lerp(u, t3);
        }
        th.psi = t3;
    }
    Ok((CellNodeData::new(avg, nodes), th))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::is_admissible_eps;

    fn u(a: [f64; 8]) -> ConservedState {
        ConservedState::from_array(a)
    }

    const GAS: [f64; 8] = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5];

    #[test]
    fn identity_when_inside() {
        let data = CellNodeData::new(
            u(GAS),
            vec![u([1.1, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 2.6]), u([0.9, -0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 2.4])],
        );
        let (out, th) = pcp_limit(&data, DEFAULT_EPS).unwrap();
        assert_eq!(out, data);
        assert_eq!(th, Thetas::IDENTITY);
    }

    #[test]
    fn density_stage() {
        let eps = 1e-13;
        let data = CellNodeData::new(
            u(GAS),
            vec![u([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5]), u([3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5])],
        );
        let (out, th) = pcp_limit(&data, eps).unwrap();
        assert!((th.density - (1.0 - eps) / 2.0).abs() < 1e-15);
        assert!((out.node_values[0].d - eps).abs() < 1e-15);
        assert!(out.node_values[0].d >= eps);
        let mean = out.weighted_mean(&[0.5, 0.5]).unwrap();
        assert!((mean - data.average).max_abs() < 1e-12);
    }

    #[test]
    fn psi_stage_lands_on_boundary() {
        // admissible D and q but Ψ < 0: a cold, strongly magnetised candidate
        let avg = u([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0]);
        let bad = u([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.45]);
        assert!(q_fn(&bad) > 0.0);
        assert!(psi_eps(&bad, 0.0).unwrap() < 0.0);
        let mirror = avg * 2.0 - bad;
        let data = CellNodeData::new(avg, vec![bad, mirror]);
        let (out, th) = pcp_limit(&data, DEFAULT_EPS).unwrap();
        assert!(th.psi < 1.0 && th.density == 1.0);
        let eps_psi = DEFAULT_EPS * avg.e;
        let p = psi_eps(&out.node_values[0], eps_psi).unwrap();
        assert!(p >= 0.0 && p <= 1e-10 * avg.e.max(1.0), "psi_eps = {p}");
        for v in &out.node_values {
            assert!(is_admissible_eps(v, DEFAULT_EPS));
        }
    }

    #[test]
    fn solve_theta_guards() {
        let avg = u(GAS);
        assert!(solve_theta(&avg, &avg, DEFAULT_EPS).is_err());
        let cold = u([1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 2.9]);
        let hot = u([1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 6.0]);
        assert!(psi_eps(&cold, 0.0).unwrap() < 0.0);
        let t = solve_theta(&hot, &cold, DEFAULT_EPS).unwrap();
        assert!(t > 0.0 && t < 1.0);
    }

    #[test]
    fn rejects_bad_average() {
        let data = CellNodeData::new(u([1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]), vec![]);
        assert!(matches!(pcp_limit(&data, DEFAULT_EPS), Err(RmhdError::AverageNotAdmissible { .. })));
    }
}
