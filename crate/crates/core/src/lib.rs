//! Numerical laboratory for degenerate second-order elliptic quadratic forms whose
//! coefficients behave like powers of the boundary distance `d(x)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: exact distance calculus, interior diameter, volume and
//!   superharmonicity scans for intervals, convex polygons, discs, annuli and tori.
//! - [`expr`]: the coefficient expression language (`"d^-1.5"`, `"neg(q)"`, ...).
//! - [`mesh`]: graded 1D meshes, boundary-graded triangulations, tubular strips and
//!   the axisymmetric reduction of the torus.
//! - [`forms`]: P1 assembly of quadratic forms into sparse pencils `(K, M)` and the
//!   IMS partition of unity.
//! - [`eigen`]: shift-invert Lanczos for the bottom of a pencil, counting functions and
//!   mesh-convergence tables.
//! - [`hardy`]: Hardy constants, the λ(Ω) catalogue and numerical certification of
//!   weighted Hardy inequalities.
//! - [`spectral`]: the strip-exhaustion sequence for the bottom of the essential
//!   spectrum, the discreteness criteria and the diagnostic pipeline.
//! - [`cli`]: configuration-driven runs that emit JSON/CSV reports.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod config;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod forms;
pub mod geometry;
pub mod hardy;
pub mod mesh;
pub mod quadrature;
pub mod report;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use expr::CoefficientExpr;
pub use geometry::Domain;
