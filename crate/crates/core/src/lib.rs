//! Numerical core for the degenerate elliptic problem
//!
//! ```text
//! -div( a(x, ∇u) / (1 + |u|)^γ ) + u = f   in Ω,      u = 0 on ∂Ω,
//! ```
//!
//! posed on the unit ball of `R^N` (radially symmetric data) or on the unit
//! interval. The crate is `no_std` and only needs `alloc`.
//!
//! * [`problem`]: coefficient fields, truncation, data and the closed-form
//!   singular solution used for convergence studies.
//! * [`mesh`]: graded radial meshes with weight `r^(N-1)`, quadrature, nodal
//!   functions and the weighted norms and restricted integrals.
//! * [`solver`]: lumped-mass P1 discretization, frozen-coefficient fixed
//!   point for bounded data and the truncated-datum approximation sequence.
//! * [`certificates`]: numerical checks of the a-priori estimates, the L¹
//!   contraction, comparison, the solution map and the change of variables.
//! * [`experiment`]: concentrated (Dirac-like) data and the collapse of the
//!   approximate solutions for `γ > 1`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod certificates;
pub mod error;
pub mod experiment;
pub mod linalg;
pub(crate) mod math;
pub mod mesh;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{GridFunction, QuadPoint, RadialField, RadialMesh};
pub use problem::{CoefficientField, Datum, Domain, ManufacturedSolution, ProblemSpec};
pub use solver::{SequenceReport, SolveReport, SolverConfig};
