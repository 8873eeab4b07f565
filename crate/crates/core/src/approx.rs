//! Composing two controlled fusion systems on the same index set.
//!
//! `φ = T_W* T_Z = Σ v_i w_i R_{W,i} R_{Z,i}` is trace class with
//! `tr|φ| ≤ √(B_W B_Z)·m`, and the approximation operator
//! `Φ = Σ v_i² R_{Z,i} R_{W,i}` turns a closeness estimate
//! `‖f − Φf‖² ≤ γ‖f‖²` into frame bounds for both systems.

use serde::{Deserialize, Serialize};

use crate::fusion_frames::{analysis_matrix, fusion_frame_bounds};
use crate::numerics::{self, Matrix};
use crate::vector_frames::FrameBounds;
use crate::{ControlledFusionSystem, Error, Result};

const WEIGHT_MATCH_TOL: f64 = 1e-12;

fn check_shapes(w: &ControlledFusionSystem, z: &ControlledFusionSystem) -> Result<()> {
    if w.dim() != z.dim() || w.len() != z.len() {
        return Err(Error::DimensionMismatch(format!(
            "systems of shape (n={}, m={}) and (n={}, m={})",
            w.dim(),
            w.len(),
            z.dim(),
            z.len()
        )));
    }
    w.require_positive()?;
    z.require_positive()
}

/// `φ = T_W* T_Z`.
pub fn cross_operator(w: &ControlledFusionSystem, z: &ControlledFusionSystem) -> Result<Matrix> {
    check_shapes(w, z)?;
    let n = w.dim();
    Ok((0..w.len()).fold(Matrix::zeros(n, n), |acc, i| {
        let scale = w.members()[i].weight * z.members()[i].weight;
        acc + (w.root(i).unwrap() * z.root(i).unwrap()).scale(scale)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceClassReport {
    /// `tr|φ|`.
    pub trace_norm_phi: f64,
    /// `√(B_W B_Z)·m` with `‖u‖ = 1`.
    pub bound: f64,
    pub holds: bool,
    /// `√(B_W B_Z)·max(m, n)`.
    pub bound_max_mn: f64,
    pub holds_max_mn: bool,
    pub members: usize,
    pub dimension: usize,
}

pub fn trace_class_check(
    w: &ControlledFusionSystem,
    z: &ControlledFusionSystem,
) -> Result<TraceClassReport> {
    let phi = cross_operator(w, z)?;
    let trace_norm_phi = numerics::trace_norm(&phi)?;
    let b_w = fusion_frame_bounds(w, 1e-9)?.upper;
    let b_z = fusion_frame_bounds(z, 1e-9)?.upper;
    let root = (b_w * b_z).sqrt();
    let (m, n) = (w.len(), w.dim());
    let bound = root * m as f64;
    let bound_max_mn = root * m.max(n) as f64;
    let within = |b: f64| trace_norm_phi <= b + 1e-9 * b.max(1.0);
    Ok(TraceClassReport {
        trace_norm_phi,
        bound,
        holds: within(bound),
        bound_max_mn,
        holds_max_mn: within(bound_max_mn),
        members: m,
        dimension: n,
    })
}

fn check_shared_weights(w: &ControlledFusionSystem, z: &ControlledFusionSystem) -> Result<()> {
    let same = w
        .weights()
        .iter()
        .zip(z.weights())
        .all(|(a, b)| (a - b).abs() <= WEIGHT_MATCH_TOL * a.max(1.0));
    if same {
        Ok(())
    } else {
        Err(Error::WeightMismatch)
    }
}

/// `Φ = Σ v_i² R_{Z,i} R_{W,i}` with the weights of `w`.
pub fn approximation_operator(
    w: &ControlledFusionSystem,
    z: &ControlledFusionSystem,
) -> Result<Matrix> {
    check_shapes(w, z)?;
    check_shared_weights(w, z)?;
    let n = w.dim();
    Ok(w.members()
        .iter()
        .enumerate()
        .fold(Matrix::zeros(n, n), |acc, (i, m)| {
            acc + (z.root(i).unwrap() * w.root(i).unwrap()).scale(m.weight * m.weight)
        }))
}

/// Lower/upper pair predicted for one side of the approximation theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedBounds {
    pub lower: f64,
    pub upper: f64,
}

impl PredictedBounds {
    fn admits(&self, actual: &FrameBounds, tol: f64) -> bool {
        actual.lower >= self.lower - tol && actual.upper <= self.upper + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    /// Squared-norm constant `‖I − Φ‖²` of `‖f − Φf‖² ≤ γ‖f‖²`.
    pub gamma: f64,
    /// `λ_max(S_W)`: the Bessel constant of `W`.
    pub a1: f64,
    /// `λ_max(S_Z)`: the synthesis constant of `Z`.
    pub a2: f64,
    /// `‖T_Z*‖²` over the whole stacked space.
    pub a2_stacked: f64,
    /// `m · max_i v_i² ‖C*π_{Z_i}C′‖`.
    pub a2_block: f64,
    /// `m · max_i v_i² ‖C*π_{W_i}C′‖`.
    pub a1_block: f64,
    pub applicable: bool,
    /// `((1−γ)²/A2, A1)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_w: Option<PredictedBounds>,
    /// `((1−γ)²/A1, A2)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_z: Option<PredictedBounds>,
    /// As `predicted_w`/`predicted_z` with the block constants.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_w_block: Option<PredictedBounds>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_z_block: Option<PredictedBounds>,
    /// `(1 − √γ)²/A2` and `(1 − √γ)²/A1`: what `‖Φ⁻¹‖ ≤ (1 − ‖I − Φ‖)⁻¹`
    /// actually yields.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub corrected_w: Option<PredictedBounds>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub corrected_z: Option<PredictedBounds>,
    pub actual_w: FrameBounds,
    pub actual_z: FrameBounds,
    /// Predictions with the tight constants contain the actual bounds.
    pub holds: bool,
    pub holds_block: bool,
    pub holds_corrected: bool,
    /// `Σ v_i² R_{W,i} R_{Z,i}` equals `Φ*`.
    pub dual_consistent: bool,
}

pub fn approximation_analysis(
    w: &ControlledFusionSystem,
    z: &ControlledFusionSystem,
    tol: f64,
) -> Result<ApproxReport> {
    let phi = approximation_operator(w, z)?;
    let dual = approximation_operator(z, w)?;
    let dual_consistent = (&dual - phi.adjoint()).camax() <= 1e-10 * numerics::fro(&phi).max(1.0);

    let n = w.dim();
    let gamma = numerics::operator_norm(&(Matrix::identity(n, n) - &phi))?.powi(2);
    let actual_w = fusion_frame_bounds(w, tol)?;
    let actual_z = fusion_frame_bounds(z, tol)?;
    let a1 = actual_w.upper;
    let a2 = actual_z.upper;
    let a2_stacked = numerics::operator_norm(&analysis_matrix(z)?.adjoint())?.powi(2);
    let block = |sys: &ControlledFusionSystem| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, m) in sys.members().iter().enumerate() {
            worst = worst
                .max(m.weight * m.weight * numerics::operator_norm(sys.controlled_projection(i))?);
        }
        Ok(sys.len() as f64 * worst)
    };
    let a1_block = block(w)?;
    let a2_block = block(z)?;

    let applicable = gamma < 1.0 && a1.is_finite() && a2.is_finite() && a1 > 0.0 && a2 > 0.0;
    let pair = |num: f64, lower_const: f64, upper: f64| PredictedBounds {
        lower: num / lower_const,
        upper,
    };
    let stated = (1.0 - gamma).powi(2);
    let corrected = (1.0 - gamma.sqrt()).powi(2);

    let mut report = ApproxReport {
        gamma,
        a1,
        a2,
        a2_stacked,
        a2_block,
        a1_block,
        applicable,
        predicted_w: None,
        predicted_z: None,
        predicted_w_block: None,
        predicted_z_block: None,
        corrected_w: None,
        corrected_z: None,
        actual_w,
        actual_z,
        holds: false,
        holds_block: false,
        holds_corrected: false,
        dual_consistent,
    };
    if applicable {
        let pw = pair(stated, a2, a1);
        let pz = pair(stated, a1, a2);
        let bw = pair(stated, a2_block, a1_block);
        let bz = pair(stated, a1_block, a2_block);
        let cw = pair(corrected, a2, a1);
        let cz = pair(corrected, a1, a2);
        let (aw, az) = (&report.actual_w, &report.actual_z);
        report.holds = pw.admits(aw, tol) && pz.admits(az, tol);
        report.holds_block = bw.admits(aw, tol) && bz.admits(az, tol);
        report.holds_corrected = cw.admits(aw, tol) && cz.admits(az, tol);
        report.predicted_w = Some(pw);
        report.predicted_z = Some(pz);
        report.predicted_w_block = Some(bw);
        report.predicted_z_block = Some(bz);
        report.corrected_w = Some(cw);
        report.corrected_z = Some(cz);
    }
    Ok(report)
}
