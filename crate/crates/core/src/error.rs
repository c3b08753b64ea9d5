use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RmhdError {
    #[error("adiabatic index {0} outside (1, 2]")]
    InvalidGamma(f64),

    #[error("invalid primitive state: {0}")]
    InvalidPrimitive(String),

    #[error("xi = {xi} lies outside the domain where f_Omega > 0")]
    OutsideDomain { xi: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("state is not admissible (D = {d}, q = {q}, psi = {psi})")]
    NotAdmissible { d: f64, q: f64, psi: f64 },

    #[error("root solve did not converge: residual {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("|v*| = {0} must be < 1")]
    InvalidDirection(f64),

    #[error("scale factor {0} must be positive")]
    NonpositiveScale(f64),

    #[error("matrix is not orthogonal (max |T^T T - I| = {0})")]
    NotOrthogonal(f64),

    #[error("normal ({0}, {1}) is not a unit vector")]
    NotUnitNormal(f64, f64),

    #[error("cell average is outside G_eps (D = {d}, q = {q}, psi_eps = {psi_eps})")]
    AverageNotAdmissible { d: f64, q: f64, psi_eps: f64 },

    #[error("cfl {cfl} exceeds the bound {bound} for this scheme")]
    CflTooLarge { cfl: f64, bound: f64 },

    #[error("cell index ({0}, {1}) out of range")]
    IndexOutOfRange(usize, usize),

    #[error("quadrature weights mismatch: {0}")]
    WeightMismatch(String),

    #[error("divergence constraint infeasible for this sample")]
    ConstraintInfeasible,

    #[error("preset {0} has no exact solution")]
    NoExactSolution(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("admissibility lost at step {step}, cell {cell}: {source}")]
    StepFailure {
        step: usize,
        cell: String,
        #[source]
        source: Box<RmhdError>,
    },

    #[error("cell {cell}: {source}")]
    AtCell {
        cell: String,
        #[source]
        source: Box<RmhdError>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for RmhdError {
    fn from(e: std::io::Error) -> Self {
        RmhdError::Io(e.to_string())
    }
}

impl RmhdError {
    pub(crate) fn at_cell(cell: impl Into<String>, source: RmhdError) -> Self {
        RmhdError::AtCell {
            cell: cell.into(),
            source: Box::new(source),
        }
    }

    /// Wraps a cell-level error into a step failure; other errors pass through.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            RmhdError::AtCell { cell, source } => RmhdError::StepFailure { step, cell, source },
            other => other,
        }
    }

    /// True for errors meaning a state left the admissible set.
    pub fn is_admissibility_failure(&self) -> bool {
        match self {
            RmhdError::NotAdmissible { .. } | RmhdError::AverageNotAdmissible { .. } => true,
            RmhdError::AtCell { source, .. } | RmhdError::StepFailure { source, .. } => {
                source.is_admissibility_failure()
            }
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, RmhdError>;
