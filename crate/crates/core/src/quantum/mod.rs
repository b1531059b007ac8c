//! Section bases, quadrature and Bergman kernels.

mod basis;
pub mod gauss;
mod kernel;
mod quadrature;

pub use basis::{build_basis, build_basis_capped, log_factorials, QuantumBasis, DEFAULT_DIM_CAP};
pub use kernel::{
    verify_offdiagonal_decay, verify_reproducing, DecayReport, KernelValue, ReproducingReport,
};
pub use quadrature::{build_quadrature, QuadratureRule, QuadratureSpec, RadialNode};
