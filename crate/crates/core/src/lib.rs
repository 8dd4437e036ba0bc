//! Exact computations with Gaussian measures over `p`-adic fields.
//!
//! Scalars are rationals viewed inside `Q_p`. A Gaussian on `K^d` is the
//! normalized Haar measure on a full-rank lattice; this crate provides the
//! lattice algebra, sampling and estimation, conditional-independence
//! matroids, tropical tail exponents and the Bruhat-Tits building of `PGL_d`.

pub mod building;
pub mod error;
pub mod exec;
pub mod field;
pub mod fp;
pub mod gaussian;
pub mod gen;
pub mod io;
pub mod lattice;
pub mod matrix;
pub mod matroid;
pub mod orthogonal;
pub mod rng;
pub mod tropical;

pub use building::{
    ball, ball_with, canonicalize, is_adjacent, neighbors, BallGraph, LatticeClass,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{AbsValue, DigitExpansion, FieldConfig, Scalar, ValInt};
pub use gaussian::{mle, GaussianDist, LogLikelihood, SampleResult};
pub use lattice::{hnf, HermiteForm, Lattice};
pub use matrix::MatrixK;
pub use matroid::{ci_matroid, is_ci, MatroidRep};
pub use orthogonal::{orthonormalize, svd, SvdDecomposition};
pub use tropical::{
    fit_tropical, mc_tail, phi_exact, trop2d, verify_conjecture, ConjectureReport, TailEstimate,
    TropPoly,
};
