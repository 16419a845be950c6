//! Minimal dense linear algebra: everything the pulse-design pipeline needs
//! and nothing more. Dimensions stay in the hundreds, so all storage is dense.

mod cmat;
mod expm;
mod mat;
mod tridiag;

pub use cmat::{real_mul_cvec, real_transpose_mul_cvec, CMat};
pub use expm::{expm, expm_frechet};
pub use mat::{dot, norm, norm_inf, Cholesky, Lu, Mat};
pub use tridiag::{eig_sym_tridiag, TridiagLdl};
