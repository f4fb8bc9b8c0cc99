//! Numerical laboratory for the two-weight inequality of the Poisson
//! semigroup on a manifold with two ends of different dimension.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: the two-ended profile geometry and atomic measures.
//! * [`kernel`]: the model Poisson kernel and its pieces.
//! * [`dyadic`]: dyadic cubes, Carleson boxes, Whitney families, maximal function.
//! * [`operators`]: the Poisson extension, its adjoint and the operator norm.
//! * [`testing`]: forward and backward testing constants and the norm comparison.
//! * [`proofscope`]: checks of the level-set and stopping-time machinery.
//! * [`generate`] and [`io`]: random instances and file formats.

pub mod dyadic;
pub mod error;
pub mod generate;
pub mod io;
pub mod kernel;
pub mod model;
pub mod operators;
pub mod proofscope;
pub mod testing;

pub use error::{Error, Result};
pub use kernel::{poisson, KernelCase, PieceId};
pub use model::{
    ball_volume, distance, norm_of, DiscreteMeasure, EndTag, KernelParams, MuAtom, Point, SigmaAtom,
    UpperHalfMeasure,
};
