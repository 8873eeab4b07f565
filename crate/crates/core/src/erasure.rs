//! Deleting members from a controlled fusion system.
//!
//! For an index set `J` with `α = Σ_{i∈J} v_i²` and optimal bounds `(A, B)`:
//!
//! * `α > B`: the fixed-point subspaces `M_i = {f : R_i f = f}` for `i ∈ J`
//!   intersect trivially.
//! * `α = B`: every common fixed point lies in the kernel of each remaining root.
//! * `α < A`: the remaining members form a system with bounds `A − α` and `B`.
//!
//! Between `A` and `B` nothing is claimed and the outcome is `Inconclusive`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::fusion_frames::{fusion_frame_bounds, fusion_frame_operator, Subspace};
use crate::numerics::{self, Matrix};
use crate::vector_frames::FrameBounds;
use crate::{ControlledFusionSystem, Error, Result};

/// Fixed-point subspace `M_i` of the root `R_i`: eigenvectors with
/// `|λ − 1| ≤ tol`. `None` is the zero subspace.
pub fn fixed_point_subspace(
    sys: &ControlledFusionSystem,
    i: usize,
    tol: f64,
) -> Result<Option<Subspace>> {
    if i >= sys.len() {
        return Err(Error::InvalidIndices(format!(
            "index {i} out of range for {} members",
            sys.len()
        )));
    }
    let root = sys
        .root(i)
        .ok_or(Error::PositivityViolated { indices: vec![i] })?;
    let spec = numerics::hermitian_spectrum(root, 1e-9)?;
    let keep: Vec<usize> = (0..spec.values.len())
        .filter(|&k| (spec.values[k] - 1.0).abs() <= tol)
        .collect();
    if keep.is_empty() {
        return Ok(None);
    }
    let mut basis = Matrix::zeros(sys.dim(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        basis.set_column(c, &spec.vectors.column(k));
    }
    Subspace::new(basis, 1e-10).map(Some)
}

fn fixed_point_basis(sys: &ControlledFusionSystem, i: usize, tol: f64) -> Result<Matrix> {
    Ok(fixed_point_subspace(sys, i, tol)?
        .map(|s| s.basis().clone())
        .unwrap_or_else(|| Matrix::zeros(sys.dim(), 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErasureCase {
    AboveB,
    EqualsB,
    BelowA,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureReport {
    /// Zero-based, sorted.
    pub erased_indices: Vec<usize>,
    pub alpha: f64,
    /// Optimal bounds of the full system.
    pub bounds: FrameBounds,
    pub case: ErasureCase,
    /// `A − α`, present only when `case` is `BelowA`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_lower: Option<f64>,
    pub actual_bounds: FrameBounds,
    /// `dim ⋂_{i∈J} M_i`.
    pub intersection_dim: usize,
    /// Every vector of the intersection is annihilated by every remaining root.
    pub kernel_check: bool,
    pub theorem_holds: bool,
    /// `‖Σ_{i∈J} v_i² C*π_{W_i}C′‖`, the mass actually removed. Equals `α`
    /// at most when every `‖C*π_{W_i}C′‖ ≤ 1`.
    pub erased_norm: f64,
    /// `A − erased_norm` when positive.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub corrected_lower: Option<f64>,
    /// The reduced bounds lie in `[corrected_lower, B]`; vacuous without one.
    pub corrected_holds: bool,
}

/// Erasure analysis with the fixed-point window defaulting to 1e-8.
pub fn erasure_analysis(
    sys: &ControlledFusionSystem,
    erased: &[usize],
    tol: f64,
) -> Result<ErasureReport> {
    erasure_analysis_with(sys, erased, tol, crate::Tolerances::default().fixed_point)
}

pub fn erasure_analysis_with(
    sys: &ControlledFusionSystem,
    erased: &[usize],
    tol: f64,
    fixed_point_tol: f64,
) -> Result<ErasureReport> {
    sys.require_positive()?;
    let set: BTreeSet<usize> = erased.iter().copied().collect();
    if set.is_empty() {
        return Err(Error::InvalidIndices("nothing to erase".into()));
    }
    if let Some(&bad) = set.iter().find(|&&i| i >= sys.len()) {
        return Err(Error::InvalidIndices(format!(
            "index {bad} out of range for {} members",
            sys.len()
        )));
    }
    let keep: Vec<usize> = (0..sys.len()).filter(|i| !set.contains(i)).collect();

    let weights = sys.weights();
    let alpha: f64 = set.iter().map(|&i| weights[i] * weights[i]).sum();
    let bounds = fusion_frame_bounds(sys, tol)?;
    let (a, b) = (bounds.lower, bounds.upper);
    let case = if (alpha - b).abs() <= tol * b.max(1.0) {
        ErasureCase::EqualsB
    } else if alpha > b {
        ErasureCase::AboveB
    } else if alpha < a {
        ErasureCase::BelowA
    } else {
        ErasureCase::Inconclusive
    };

    let fixed: Vec<Matrix> = set
        .iter()
        .map(|&i| fixed_point_basis(sys, i, fixed_point_tol))
        .collect::<Result<_>>()?;
    let intersection = numerics::subspace_intersection(&fixed, 1e-8)?;
    let kernel_check = keep.iter().all(|&k| {
        let r = sys.root(k).expect("positivity checked");
        intersection.column_iter().all(|v| (r * v).norm() <= tol)
    });

    // erasing every member leaves the zero operator
    let actual_bounds = if keep.is_empty() {
        FrameBounds {
            lower: 0.0,
            upper: 0.0,
            classification: crate::Classification::NotAFrame,
            selfadjoint_defect: 0.0,
            rayleigh: None,
        }
    } else {
        fusion_frame_bounds(&sys.subsystem(&keep)?, tol)?
    };

    let n = sys.dim();
    let erased_op = set.iter().fold(Matrix::zeros(n, n), |acc, &i| {
        acc + sys.controlled_projection(i).scale(weights[i] * weights[i])
    });
    let erased_norm = numerics::operator_norm(&erased_op)?;
    let corrected_lower = (erased_norm < a).then_some(a - erased_norm);
    let corrected_holds = corrected_lower.is_none_or(|lo| {
        actual_bounds.lower >= lo - tol * b.max(1.0) && actual_bounds.upper <= b + tol * b.max(1.0)
    });

    let predicted_lower = (case == ErasureCase::BelowA).then_some(a - alpha);
    let theorem_holds = match case {
        ErasureCase::AboveB => intersection.ncols() == 0,
        ErasureCase::EqualsB => kernel_check,
        ErasureCase::BelowA => {
            actual_bounds.lower >= a - alpha - tol && actual_bounds.upper <= b + tol
        }
        ErasureCase::Inconclusive => true,
    };
    Ok(ErasureReport {
        erased_indices: set.into_iter().collect(),
        alpha,
        bounds,
        case,
        predicted_lower,
        actual_bounds,
        intersection_dim: intersection.ncols(),
        kernel_check,
        theorem_holds,
        erased_norm,
        corrected_lower,
        corrected_holds,
    })
}

/// `T* D_i T` assembled from the analysis matrix with all blocks but `i`
/// zeroed.
pub fn erasure_operator(sys: &ControlledFusionSystem, i: usize) -> Result<Matrix> {
    if i >= sys.len() {
        return Err(Error::InvalidIndices(format!(
            "index {i} out of range for {} members",
            sys.len()
        )));
    }
    let t = crate::fusion_frames::analysis_matrix(sys)?;
    let n = sys.dim();
    let mut dt = Matrix::zeros(t.nrows(), n);
    dt.view_mut((i * n, 0), (n, n))
        .copy_from(&t.view((i * n, 0), (n, n)));
    Ok(t.adjoint() * dt)
}

/// `‖T* D_i T‖ = v_i² ‖C*π_{W_i}C′‖`.
pub fn erasure_operator_norm(sys: &ControlledFusionSystem, i: usize) -> Result<f64> {
    sys.require_positive()?;
    if i >= sys.len() {
        return Err(Error::InvalidIndices(format!(
            "index {i} out of range for {} members",
            sys.len()
        )));
    }
    let v = sys.members()[i].weight;
    Ok(v * v * numerics::operator_norm(sys.controlled_projection(i))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E1Report {
    pub per_index_norm: Vec<f64>,
    /// `max_i ‖T* D_i T‖`.
    pub e1_exact: f64,
    /// `max_i v_i² ‖C‖ ‖C′‖`.
    pub e1_nominal: f64,
    /// `|v_i² ‖C‖‖C′‖ − n / (m · dim W_i)|`.
    pub optimality_residuals: Vec<f64>,
    pub optimal: bool,
    /// Whether `S_W` is Parseval; the optimality criterion presumes it.
    pub parseval: bool,
}

/// 1-erasure reconstruction error and the per-index optimality condition.
pub fn reconstruction_error(sys: &ControlledFusionSystem, tol: f64) -> Result<E1Report> {
    sys.require_positive()?;
    let per_index_norm = (0..sys.len())
        .map(|i| erasure_operator_norm(sys, i))
        .collect::<Result<Vec<_>>>()?;
    let e1_exact = per_index_norm.iter().copied().fold(0.0, f64::max);
    let norm_product = sys.pair().norm_product()?;
    let (n, m) = (sys.dim() as f64, sys.len() as f64);
    let nominal: Vec<f64> = sys.weights().iter().map(|v| v * v * norm_product).collect();
    let e1_nominal = nominal.iter().copied().fold(0.0, f64::max);
    let optimality_residuals: Vec<f64> = nominal
        .iter()
        .zip(sys.members())
        .map(|(x, w)| (x - n / (m * w.subspace.dim() as f64)).abs())
        .collect();
    let optimal = optimality_residuals.iter().all(|&r| r <= tol);
    let parseval = crate::vector_frames::bounds_of_operator(&fusion_frame_operator(sys), tol)?
        .classification
        == crate::Classification::Parseval;
    Ok(E1Report {
        per_index_norm,
        e1_exact,
        e1_nominal,
        optimality_residuals,
        optimal,
        parseval,
    })
}
