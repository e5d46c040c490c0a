//! Principal eigenvalue of `-D φ'' - 2α m' φ' + V φ = λ φ` on (0, 1) with
//! Robin or Dirichlet ends, its α → ∞ limit, and a periodic/rectangular 2D
//! analog.

pub mod catalog;
pub mod classify;
pub mod eig1d;
pub mod eig2d;
pub mod error;
pub mod gauge;
pub mod io;
pub mod model;
pub mod predict;
pub mod sweep;
pub mod poly;

pub use error::{Error, IterationRecord, Result};
pub use model::{
    side_class, validate, End, PiecewisePoly, PiecewiseProfile, Potential, ProblemSpec1D,
    RobinSide, SignClass, SlopeSign, ValidationReport, Violation,
};
pub use poly::Poly;
