//! Random variates, special functions and matrix utilities shared by the
//! inference modules.

pub mod matrix;
pub mod rng;
pub mod sampling;
pub mod special;

pub use matrix::{psd_repair, PsdRepair, SymMatrix, DEFAULT_EIGEN_FLOOR};
pub use rng::{derive_seed, substream, RngStream};
pub use sampling::{
    sample_beta, sample_dirichlet, sample_flat_dirichlet, sample_gamma, sample_mvnormal,
    sample_truncated_normal, MvNormal,
};
pub use special::{beta_cdf, gamma_cdf, gamma_quantile, normal_cdf, normal_quantile};
