//! Exact symbolic solver for first-order ODEs `y' = M/N` built on Darboux
//! polynomials of the associated derivation.
//!
//! The pipeline, each stage of which is exposed as a public module:
//!
//! 1. [`parse`] the ODE text into an expression tree.
//! 2. [`basis`]: collect the elementary function kernels (`exp`, `ln`,
//!    `sin`, `cos`, `tan`, rational powers) appearing in the equation and
//!    close the set under differentiation, introducing one variable `u_i`
//!    per kernel; rewrite the right-hand side as a ratio of polynomials
//!    `M/N` in `x`, `y`, `u1..um`.
//! 3. [`dop`]: build the denominator-cleared derivation
//!    `D = delta * [N (d/dx + sum u_ix d/du_i) + M (d/dy + sum u_iy d/du_i)]`
//!    and the matching cleared divergence `T`.
//! 4. [`darboux`]: find polynomials `f` of bounded degree with
//!    `D[f] = g * f` ("eigen-polynomials" and their cofactors).
//! 5. [`intfact`]: solve `sum n_i g_i = -T` for rational exponents and
//!    assemble an integrating factor `R = prod f_i^{n_i}`, optionally with
//!    an exponential part `exp(P/Q)`; verify the defining identity exactly.
//! 6. [`quadrature`]: integrate `R*M dx - R*N dy` term by term into a first
//!    integral `F(x, y) = C`, falling back to unevaluated integral nodes,
//!    and verify `N*F_x + M*F_y = 0` formally.
//!
//! All arithmetic is exact over the Gaussian rationals; nothing is floating
//! point and no step is numeric.

pub mod basis;
pub mod corpus;
pub mod darboux;
pub mod dop;
pub mod error;
pub mod expr;
pub mod funcfield;
pub mod gcd;
pub mod intfact;
pub mod linsolve;
pub mod manufacture;
pub mod parse;
pub mod poly;
pub mod quadrature;
pub mod ratfunc;
pub mod scalar;
pub mod solve;

pub use error::Error;
pub use expr::Expr;
pub use poly::{Monomial, MultiPoly, VarList};
pub use ratfunc::RationalFunction;
pub use scalar::GaussianRational;
