//! Finite-dimensional verification toolkit for J-Hermitian determinantal point
//! processes realized as particle densities of quasi-free CAR representations.

pub mod dpp;
pub mod error;
pub mod fock;
pub mod kernel_io;
pub mod moments;
pub mod sites;
pub mod space;
pub mod suites;

pub use error::{Error, Result};
pub use sites::SiteSet;
pub use space::{
    assemble_j_kernel, build_space, check_j_self_adjoint, correlation_determinant, growth_bound_constant,
    hat_transform, sqrt_factors, validate_correlation_operator, CMatrix, CVector, JKernelBundle, Kernel, Part,
    SpacePartition, C64, DEFAULT_TOL,
};
