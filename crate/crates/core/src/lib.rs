//! Steady states of antitone systems `y = k + M(1/y)`.
//!
//! The crate is `no_std` (it needs `alloc`) and covers:
//!
//! - [`vecorder`]: vectors under the componentwise partial order
//! - [`linalg`]: dense square matrices, LU, eigenvalues
//! - [`matclass`]: Z-, M-, P- and P₀-matrix certificates and the
//!   `det(A + diag(x))` polynomial expansion
//! - [`system`]: the map `S(y) = k + M(1/y)`, its Jacobian, the residual
//!   `Ψ(y) = y − S(y)` and grid ingestion
//! - [`iterate`]: fixed-point iteration, cycle detection and monotone bracketing
//! - [`solve`]: certificates and fixed-point enumeration
//!
//! ```
//! use antitone_core::{system::ElectricSystem, solve, vecorder::OrderedVector};
//! use antitone_core::linalg::SquareMatrix;
//!
//! let sys = ElectricSystem::new(
//!     OrderedVector::new(vec![3.0]).unwrap(),
//!     SquareMatrix::from_rows(&[[1.0]]).unwrap(),
//! )
//! .unwrap();
//! let report = solve::solve_positive_k(&sys, 10_000).unwrap();
//! let y = report.roots[0].point[0];
//! assert!((y - (3.0 + 13f64.sqrt()) / 2.0).abs() < 1e-12);
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod iterate;
pub mod linalg;
pub mod matclass;
pub mod solve;
pub mod system;
pub mod vecorder;

pub use error::{Error, Result};
