//! Special relativistic MHD: admissible-state theory, physical-constraints-preserving
//! limiting, and Lax–Friedrichs / MUSCL finite-volume schemes in one and two dimensions.

// `!(x > 0.0)` is used on purpose so that NaN fails every positivity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissible;
pub mod boundary;
pub mod config;
pub mod convergence;
pub mod error;
pub mod flux;
pub mod limiter;
pub mod output;
pub mod presets;
pub mod quadrature;
pub mod recovery;
mod roots;
pub mod solver1d;
pub mod solver2d;
pub mod state;
pub mod verify;

pub use admissible::{
    aux_roots, eval_aux_polynomial, hat_tilde_q, is_admissible, is_admissible_eps,
    is_admissible_first_form, psi_fn, q_fn, rotate_state, scale_state, second_form_margin,
    AdmissibilityReport, AuxKind, AuxRoots,
};
pub use boundary::BoundaryKind;
pub use config::{EpsSetting, RunConfig, Scheme, SlopeKind};
pub use error::{Result, RmhdError};
pub use flux::{lax_friedrichs_flux, physical_flux, rotated_flux, Axis};
pub use limiter::{pcp_limit, solve_theta, CellNodeData, Thetas};
pub use presets::Preset;
pub use recovery::{eval_fu, recover, recover_primitives, Recovery};
pub use solver1d::{run_1d, Grid1D};
pub use solver2d::{run_2d, Grid2D};
pub use state::{primitive_to_conserved, ConservedState, Eos, PrimitiveState, Vec3};
