//! Coupled random projection CPD for large dense third-order tensors.
//!
//! This crate computes the canonical polyadic decomposition (CPD) of a dense
//! third-order tensor three ways:
//!
//! - [`cpd::als_cpd`]: direct alternating least squares on the full tensor,
//! - [`cpd::rap_cpd`]: random-projection compression to a single small core
//!   tensor, CPD of the core, and back-projection of the factors,
//! - [`ccpd::corap_cpd`]: coupled random projections — several compressed
//!   cores sharing one third-mode projector are decomposed jointly under a
//!   shared third-mode factor, and the best-fitting core is back-projected.
//!
//! The coupled route exploits more sketched data than a single projection and
//! is the interesting path; the other two serve as baselines. [`bench`]
//! provides the synthetic-data generator, the permutation/scale-invariant
//! factor error metric, and a Monte Carlo experiment runner with CSV output.
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability, and the `corap` binary for the `bench`/`decompose`/`gen`
//! command-line entry points.

pub mod assignment;
pub mod bench;
pub mod ccpd;
pub mod cpd;
pub mod error;
pub mod linalg;
pub mod random;
pub mod sketch;
pub mod tensor;

pub use ccpd::{corap_cpd, CcpdResult, CoupledFactors};
pub use cpd::{als_cpd, rap_cpd, AlsOptions, CpdResult, FactorInit};
pub use error::{CorapError, Result};
pub use sketch::{CompressedEnsemble, ProjectionTriad, SketchConfig};
pub use tensor::{DenseTensor3, FactorTriple};
