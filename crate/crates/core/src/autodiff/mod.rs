//! Forward-mode jets and the finite-difference oracle.

mod fd;
mod jet;
pub mod matrix;

pub use fd::{fd_derivatives, fd_derivatives_vec, Gradient, Hessian, DEFAULT_STEP};
pub use jet::{
    jet_arith, lift_point, lift_point_order, real_values, Jet, JetOp, Layout, EPS_DOMAIN,
};

/// The second-order jet of a function: value, gradient and Hessian.
pub type Jet2 = Jet;
