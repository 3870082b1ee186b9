//! Executable Osterwalder–Schrader positivity on finite instances.
//!
//! * [`lattice`]: time lattices, test functions, Gaussian path measures.
//! * [`positivity`]: Gram-matrix certificates for positive-definiteness and
//!   reflection positivity.
//! * [`reconstruction`]: physical Hilbert space, transfer semigroup,
//!   Hamiltonian and the n-point identity.
//! * [`lie`]: structure-constant algebras, involutions, c-duality, hyperbolic
//!   cones, sampled semigroup membership and commutants.

pub mod error;
pub mod lattice;
pub mod lie;
pub mod linalg;
pub mod positivity;
pub mod reconstruction;
pub mod reference;
pub mod suite;
pub mod wick;

pub use error::{Error, Result};
pub use lattice::{GaussianEuclideanMeasure, KernelKind, MeasureDocument, PathSample, TestFunction, TimeLattice};
pub use positivity::{PsdCertificate, Verdict};
