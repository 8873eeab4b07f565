//! Controlled frames and controlled fusion frames on finite-dimensional
//! Hilbert spaces.
//!
//! Every operator is a dense `Complex64` matrix. The inner product
//! `⟨x, y⟩` is linear in the first argument and conjugate-linear in the
//! second, see [`numerics::inner`].
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: Hermitian spectra, square roots, SVD and friends.
//! * [`vector_frames`]: `(C, C′)`-controlled frames of vectors and their bounds.
//! * [`fusion_frames`]: weighted subspaces, controlled projection roots,
//!   analysis/synthesis/frame operators.
//! * [`erasure`]: deleting members, fixed-point subspaces, 1-erasure error.
//! * [`approx`]: composition of two systems and the approximation operator.
//! * [`config`] and [`generate`]: JSON system files and seeded random systems.

pub mod approx;
pub mod config;
pub mod erasure;
mod error;
pub mod fusion_frames;
pub mod generate;
pub mod numerics;
pub mod vector_frames;

pub use error::{Error, Result};
pub use fusion_frames::{ControlledFusionSystem, SequenceVector, Subspace, WeightedSubspace};
pub use numerics::{Matrix, Scalar, Vector};
pub use vector_frames::{Classification, ControlledPair, FrameBounds, VectorFrame};

/// Tolerances used when a caller does not supply its own.
///
/// `check` is the general Hermitian/positivity tolerance (relative to
/// `max(1, ‖M‖)`), `pinv_cutoff` and `rank` are relative to the largest
/// singular value, `fixed_point` is the absolute window `|λ − 1|` used for
/// fixed-point subspaces.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub check: f64,
    pub pinv_cutoff: f64,
    pub rank: f64,
    pub fixed_point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            check: 1e-9,
            pinv_cutoff: 1e-12,
            rank: 1e-10,
            fixed_point: 1e-8,
        }
    }
}
