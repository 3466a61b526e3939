//! Dense primal-dual interior-point solver for small cone programs.
//!
//! Problems take the form
//!
//! ```text
//! minimize    cᵀx
//! subject to  b − A x ∈ K
//! ```
//!
//! where `K` is a product of zero cones, nonnegative orthants, second-order
//! cones and PSD cones (in svec form). The dual is
//! `maximize −bᵀy subject to Aᵀy + c = 0, y ∈ K*`.
//!
//! The solver runs a homogeneous self-dual embedding with Nesterov–Todd
//! scaling and Mehrotra predictor-corrector steps, so infeasible and
//! unbounded problems terminate with a certificate instead of diverging.
//!
//! ```
//! use conic::{solve, Cone, ConicProblem, Status};
//! use nalgebra::{DMatrix, DVector};
//!
//! // minimize t subject to ‖(3, 4)‖ ≤ t
//! let p = ConicProblem::new(
//!     DVector::from_vec(vec![1.0]),
//!     DMatrix::from_column_slice(3, 1, &[-1.0, 0.0, 0.0]),
//!     DVector::from_vec(vec![0.0, 3.0, 4.0]),
//!     vec![Cone::Soc(3)],
//! )
//! .unwrap();
//! let sol = solve(&p, 1e-8, 200);
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.x[0] - 5.0).abs() < 1e-6);
//! ```

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cone;
mod error;
mod hermitian;
mod kkt;
mod problem;
mod residuals;
mod solver;

pub use cone::{psd_dim_from_len, smat, svec, svec_index, svec_into, Cone};
pub use error::ConicError;
pub use hermitian::{embed_unchecked, hermitian_deviation, hermitian_to_real};
pub use problem::{ConicProblem, ConicSolution, ProblemDump, Residuals, Status};
pub use residuals::{kkt_residuals, kkt_residuals_at};
pub use solver::{solve, solve_with, IterateInfo, Settings};
