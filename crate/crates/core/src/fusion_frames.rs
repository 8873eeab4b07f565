//! Controlled fusion systems `W = {(W_i, v_i)}` with control pair `(C, C′)`.
//!
//! For each member the controlled projection `C*π_{W_i}C′` is formed once
//! at build time. Where it is a positive operator its square root `R_i` is
//! cached; the analysis operator is `T f = {v_i R_i f}` and the frame
//! operator is `S_W = Σ v_i² C*π_{W_i}C′`.

use serde::{Deserialize, Serialize};

use crate::generate::random_unit_vector;
use crate::numerics::{self, Matrix, Vector};
use crate::vector_frames::{bounds_of_operator, FrameBounds, RayleighCheck, VectorFrame};
use crate::{ControlledPair, Error, Result};

/// Default number of Rayleigh samples drawn by [`fusion_frame_bounds`].
pub const DEFAULT_RAYLEIGH_SAMPLES: usize = 1000;
const RAYLEIGH_SLACK: f64 = 1e-8;

/// A subspace stored as an orthonormal column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Spans `columns`. Columns that are already orthonormal (to 1e-12) are
    /// kept verbatim; anything else is orthonormalized with rank tolerance `tol`.
    pub fn new(columns: Matrix, tol: f64) -> Result<Self> {
        if !numerics::is_finite(&columns) {
            return Err(Error::NonFinite("subspace basis"));
        }
        if columns.ncols() > 0
            && columns.ncols() <= columns.nrows()
            && numerics::orthonormality_defect(&columns) <= 1e-12
        {
            return Ok(Subspace { basis: columns });
        }
        Ok(Subspace {
            basis: numerics::orthonormalize(&columns, tol)?,
        })
    }

    /// Coordinate subspace spanned by the given standard basis vectors.
    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Result<Self> {
        let mut m = Matrix::zeros(ambient_dim, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a >= ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "axis {a} outside dimension {ambient_dim}"
                )));
            }
            m[(a, j)] = 1.0.into();
        }
        Self::new(m, 1e-10)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }
}

/// Orthogonal projection `π = U U*`.
pub fn projection(w: &Subspace) -> Matrix {
    &w.basis * w.basis.adjoint()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSubspace {
    pub subspace: Subspace,
    pub weight: f64,
}

impl WeightedSubspace {
    pub fn new(subspace: Subspace, weight: f64) -> Self {
        WeightedSubspace { subspace, weight }
    }
}

/// An element of `⊕ H`: one block per member.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceVector {
    pub blocks: Vec<Vector>,
}

impl SequenceVector {
    pub fn zeros(members: usize, dim: usize) -> Self {
        SequenceVector {
            blocks: vec![Vector::zeros(dim); members],
        }
    }

    pub fn stacked(&self) -> Vector {
        let n = self.blocks.first().map_or(0, |b| b.len());
        let mut out = Vector::zeros(n * self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            out.rows_mut(i * n, n).copy_from(b);
        }
        out
    }

    pub fn from_stacked(stacked: &Vector, members: usize) -> Result<Self> {
        if members == 0 || !stacked.len().is_multiple_of(members) {
            return Err(Error::DimensionMismatch(format!(
                "cannot split {} entries into {} blocks",
                stacked.len(),
                members
            )));
        }
        let n = stacked.len() / members;
        Ok(SequenceVector {
            blocks: (0..members)
                .map(|i| stacked.rows(i * n, n).into_owned())
                .collect(),
        })
    }

    /// The erasure projection `D_i`: keeps block `i`, zeroes the rest.
    pub fn keep_block(&self, i: usize) -> Self {
        SequenceVector {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    if k == i {
                        b.clone()
                    } else {
                        Vector::zeros(b.len())
                    }
                })
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

/// Immutable after [`build_system`].
#[derive(Debug, Clone)]
pub struct ControlledFusionSystem {
    pair: ControlledPair,
    members: Vec<WeightedSubspace>,
    operators: Vec<Matrix>,
    roots: Vec<Option<Matrix>>,
}

/// Validates the members and computes each `C*π_{W_i}C′` and, where it is
/// positive within `tol`, its square root.
pub fn build_system(
    pair: ControlledPair,
    members: Vec<WeightedSubspace>,
    tol: f64,
) -> Result<ControlledFusionSystem> {
    if members.is_empty() {
        return Err(Error::Empty);
    }
    let n = pair.dim();
    for (index, m) in members.iter().enumerate() {
        if m.subspace.ambient_dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "member {} lives in dimension {}, system has dimension {}",
                index,
                m.subspace.ambient_dim(),
                n
            )));
        }
        if !(m.weight > 0.0 && m.weight.is_finite()) {
            return Err(Error::InvalidWeight {
                index,
                weight: m.weight,
            });
        }
    }
    let c_adj = pair.c().adjoint();
    let mut operators = Vec::with_capacity(members.len());
    let mut roots = Vec::with_capacity(members.len());
    for m in &members {
        let op = &c_adj * projection(&m.subspace) * pair.c_prime();
        let root = match numerics::psd_sqrt(&op, tol) {
            Ok(r) => Some(r),
            Err(Error::NotHermitian { .. } | Error::NotPositive { .. }) => None,
            Err(e) => return Err(e),
        };
        operators.push(op);
        roots.push(root);
    }
    Ok(ControlledFusionSystem {
        pair,
        members,
        operators,
        roots,
    })
}

impl ControlledFusionSystem {
    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    /// Number of members `m`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn pair(&self) -> &ControlledPair {
        &self.pair
    }

    pub fn members(&self) -> &[WeightedSubspace] {
        &self.members
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }

    /// `C*π_{W_i}C′`.
    pub fn controlled_projection(&self, i: usize) -> &Matrix {
        &self.operators[i]
    }

    /// `(C*π_{W_i}C′)^{1/2}`, if that operator is positive.
    pub fn root(&self, i: usize) -> Option<&Matrix> {
        self.roots[i].as_ref()
    }

    pub fn positivity_ok(&self) -> Vec<bool> {
        self.roots.iter().map(Option::is_some).collect()
    }

    pub fn all_positive(&self) -> bool {
        self.roots.iter().all(Option::is_some)
    }

    /// Zero-based indices whose controlled projection is not positive.
    pub fn non_positive_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.roots[i].is_none())
            .collect()
    }

    pub fn require_positive(&self) -> Result<()> {
        let indices = self.non_positive_indices();
        if indices.is_empty() {
            Ok(())
        } else {
            Err(Error::PositivityViolated { indices })
        }
    }

    pub(crate) fn roots_unchecked(&self) -> impl Iterator<Item = &Matrix> {
        self.roots
            .iter()
            .map(|r| r.as_ref().expect("positivity checked"))
    }

    /// The members at `keep`, in that order, sharing this system's cached data.
    pub fn subsystem(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyRemainder);
        }
        if let Some(&bad) = keep.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidIndices(format!(
                "index {bad} out of range for {} members",
                self.len()
            )));
        }
        Ok(ControlledFusionSystem {
            pair: self.pair.clone(),
            members: keep.iter().map(|&i| self.members[i].clone()).collect(),
            operators: keep.iter().map(|&i| self.operators[i].clone()).collect(),
            roots: keep.iter().map(|&i| self.roots[i].clone()).collect(),
        })
    }

    /// Same subspaces and controls with every weight multiplied by `t`.
    pub fn scale_weights(&self, t: f64) -> Result<Self> {
        let mut out = self.clone();
        for (index, m) in out.members.iter_mut().enumerate() {
            m.weight *= t;
            if !(m.weight > 0.0 && m.weight.is_finite()) {
                return Err(Error::InvalidWeight {
                    index,
                    weight: m.weight,
                });
            }
        }
        Ok(out)
    }

    /// The weighted basis vectors `{v_i e_ij}` under the same control pair.
    /// Their controlled frame operator is `S_W`.
    pub fn to_vector_frame(&self) -> Result<VectorFrame> {
        let vectors = self
            .members
            .iter()
            .flat_map(|m| {
                m.subspace
                    .basis()
                    .column_iter()
                    .map(move |c| c.into_owned().scale(m.weight))
            })
            .collect();
        VectorFrame::new(vectors, self.pair.clone())
    }
}

/// `T`: the `(n·m) × n` matrix whose `i`-th block is `v_i R_i`.
pub fn analysis_matrix(sys: &ControlledFusionSystem) -> Result<Matrix> {
    sys.require_positive()?;
    let n = sys.dim();
    let mut t = Matrix::zeros(n * sys.len(), n);
    for (i, (m, r)) in sys.members.iter().zip(sys.roots_unchecked()).enumerate() {
        t.view_mut((i * n, 0), (n, n)).copy_from(&r.scale(m.weight));
    }
    Ok(t)
}

/// `T f = {v_i R_i f}`.
pub fn analysis_apply(sys: &ControlledFusionSystem, f: &Vector) -> Result<SequenceVector> {
    sys.require_positive()?;
    if f.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in dimension {}",
            f.len(),
            sys.dim()
        )));
    }
    Ok(SequenceVector {
        blocks: sys
            .members
            .iter()
            .zip(sys.roots_unchecked())
            .map(|(m, r)| (r * f).scale(m.weight))
            .collect(),
    })
}

/// `T* g = Σ v_i R_i g_i`.
pub fn synthesis_apply(sys: &ControlledFusionSystem, g: &SequenceVector) -> Result<Vector> {
    sys.require_positive()?;
    if g.blocks.len() != sys.len() || g.blocks.iter().any(|b| b.len() != sys.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "sequence with {} blocks for a system of {} members in dimension {}",
            g.blocks.len(),
            sys.len(),
            sys.dim()
        )));
    }
    Ok(sys
        .members
        .iter()
        .zip(sys.roots_unchecked())
        .zip(&g.blocks)
        .fold(Vector::zeros(sys.dim()), |acc, ((m, r), b)| {
            acc + (r * b).scale(m.weight)
        }))
}

/// Whether `g` lies in the range of `T` (the space `K_{2,W}`), within `tol`
/// relative to `‖g‖`.
pub fn in_analysis_range(
    sys: &ControlledFusionSystem,
    g: &SequenceVector,
    tol: f64,
) -> Result<bool> {
    let t = analysis_matrix(sys)?;
    let x = g.stacked();
    if x.len() != t.nrows() {
        return Err(Error::DimensionMismatch(
            "sequence shape does not match system".into(),
        ));
    }
    let p = numerics::pinv(&t, 1e-12)?;
    let residual = &x - &t * (&p * &x);
    Ok(residual.norm() <= tol * x.norm().max(1.0))
}

/// `S_W = Σ v_i² C*π_{W_i}C′`, built from the raw controlled projections.
pub fn fusion_frame_operator(sys: &ControlledFusionSystem) -> Matrix {
    let n = sys.dim();
    sys.members
        .iter()
        .zip(&sys.operators)
        .fold(Matrix::zeros(n, n), |acc, (m, op)| {
            acc + op.scale(m.weight * m.weight)
        })
}

/// Optimal bounds of `S_W` with a 1000-sample Rayleigh cross-check (seed 0).
pub fn fusion_frame_bounds(sys: &ControlledFusionSystem, tol: f64) -> Result<FrameBounds> {
    fusion_frame_bounds_sampled(sys, tol, DEFAULT_RAYLEIGH_SAMPLES, 0)
}

/// As [`fusion_frame_bounds`] with an explicit sample count and seed. Sample
/// `k` is drawn from the sub-seed `seed + k`.
///
/// A system with some non-positive controlled projection is reported as
/// `Indefinite` and gets no Rayleigh check.
pub fn fusion_frame_bounds_sampled(
    sys: &ControlledFusionSystem,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<FrameBounds> {
    let s = fusion_frame_operator(sys);
    let mut bounds = bounds_of_operator(&s, tol)?;
    if !sys.all_positive() {
        bounds.classification = crate::Classification::Indefinite;
        return Ok(bounds);
    }
    if samples == 0 {
        return Ok(bounds);
    }
    let (mut min, mut max, mut escapes) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    let slack = RAYLEIGH_SLACK * bounds.upper.abs().max(1.0);
    for k in 0..samples {
        let f = random_unit_vector(sys.dim(), seed.wrapping_add(k as u64));
        let q: f64 = sys
            .members
            .iter()
            .zip(sys.roots_unchecked())
            .map(|(m, r)| m.weight * m.weight * (r * &f).norm_squared())
            .sum();
        min = min.min(q);
        max = max.max(q);
        if q < bounds.lower - slack || q > bounds.upper + slack {
            escapes += 1;
        }
    }
    bounds.rayleigh = Some(RayleighCheck {
        samples,
        seed,
        min,
        max,
        escapes,
    });
    Ok(bounds)
}

/// Outcome of the synthesis-operator characterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Characterization {
    pub surjective: bool,
    pub rank: usize,
    /// `‖T*‖`.
    pub norm: f64,
    /// `λ_max(S_W)`, the tight upper bound `B`.
    pub upper: f64,
    /// `|‖T*‖² − B|`.
    pub norm_defect: f64,
    /// `‖T*‖ ≤ √B` within tolerance.
    pub norm_within_sqrt_upper: bool,
    /// `‖(T*)†‖⁻²`.
    pub pinv_lower: f64,
    /// `λ_min(S_W)`.
    pub lower: f64,
    /// For a surjective `T*`: `pinv_lower` matches `λ_min`. Otherwise: `λ_min`
    /// is zero within tolerance, i.e. the system is not a frame either.
    pub consistent: bool,
}

pub fn synthesis_characterization(
    sys: &ControlledFusionSystem,
    tol: f64,
) -> Result<Characterization> {
    let t_adj = analysis_matrix(sys)?.adjoint();
    let svd = numerics::svd(&t_adj)?;
    let rank = svd.rank(tol);
    let surjective = rank == sys.dim();
    let norm = svd.max();

    let spec = numerics::hermitian_spectrum(&fusion_frame_operator(sys), tol)?;
    let (lower, upper) = (spec.min(), spec.max());
    let norm_defect = (norm * norm - upper).abs();
    let norm_within_sqrt_upper = norm * norm <= upper + tol * upper.max(1.0);

    let pinv_norm = numerics::operator_norm(&numerics::pinv(&t_adj, tol)?)?;
    let pinv_lower = if pinv_norm > 0.0 {
        pinv_norm.powi(-2)
    } else {
        f64::INFINITY
    };
    let consistent = if surjective {
        (pinv_lower - lower).abs() <= tol * lower.max(1.0)
    } else {
        lower <= tol * upper.max(1.0)
    };
    Ok(Characterization {
        surjective,
        rank,
        norm,
        upper,
        norm_defect,
        norm_within_sqrt_upper,
        pinv_lower,
        lower,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{real_diagonal, real_matrix, real_vector};
    use crate::Classification;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn r3(third: &[usize]) -> ControlledFusionSystem {
        let members = [&[0usize, 1][..], &[1, 2], third]
            .iter()
            .map(|axes| WeightedSubspace::new(Subspace::coordinate(3, axes).unwrap(), H))
            .collect();
        build_system(ControlledPair::identity(3), members, 1e-9).unwrap()
    }

    fn full(n: usize, weights: &[f64]) -> ControlledFusionSystem {
        let axes: Vec<usize> = (0..n).collect();
        let members = weights
            .iter()
            .map(|&w| WeightedSubspace::new(Subspace::coordinate(n, &axes).unwrap(), w))
            .collect();
        build_system(ControlledPair::identity(n), members, 1e-9).unwrap()
    }

    #[test]
    fn projection_examples() {
        let p = projection(&Subspace::coordinate(3, &[0, 1]).unwrap());
        assert_eq!(p, real_diagonal(&[1.0, 1.0, 0.0]));
        let p = projection(&Subspace::coordinate(2, &[0, 1]).unwrap());
        assert_eq!(p, Matrix::identity(2, 2));
        let w = Subspace::new(real_matrix(&[&[1.0], &[1.0]]), 1e-10).unwrap();
        assert!((projection(&w) - real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]])).camax() < 1e-15);
    }

    #[test]
    fn identity_controls_give_projection_roots() {
        let sys = r3(&[2]);
        assert!(sys.all_positive());
        for i in 0..3 {
            let p = projection(&sys.members()[i].subspace);
            assert!((sys.root(i).unwrap() - p).camax() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_controlled_projection_is_flagged() {
        let pair =
            ControlledPair::new(real_diagonal(&[1.0, -1.0]), Matrix::identity(2, 2)).unwrap();
        let w = Subspace::new(real_matrix(&[&[1.0], &[1.0]]), 1e-10).unwrap();
        let sys = build_system(pair, vec![WeightedSubspace::new(w, 1.0)], 1e-9).unwrap();
        let want = real_matrix(&[&[0.5, 0.5], &[-0.5, -0.5]]);
        assert!((sys.controlled_projection(0) - want).camax() < 1e-15);
        assert_eq!(sys.positivity_ok(), vec![false]);
        assert_eq!(
            analysis_matrix(&sys).unwrap_err(),
            Error::PositivityViolated { indices: vec![0] }
        );
        let b = fusion_frame_bounds(&sys, 1e-9).unwrap();
        assert_eq!(b.classification, Classification::Indefinite);
    }

    #[test]
    fn build_rejects_bad_members() {
        let w = WeightedSubspace::new(Subspace::coordinate(3, &[0]).unwrap(), 0.0);
        assert!(matches!(
            build_system(ControlledPair::identity(3), vec![w], 1e-9),
            Err(Error::InvalidWeight { index: 0, .. })
        ));
        let w = WeightedSubspace::new(Subspace::coordinate(2, &[0]).unwrap(), 1.0);
        assert!(matches!(
            build_system(ControlledPair::identity(3), vec![w], 1e-9),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn analysis_blocks_of_r3_system() {
        let t = analysis_matrix(&r3(&[2])).unwrap();
        let blocks = [[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]];
        for (i, d) in blocks.iter().enumerate() {
            let want = real_diagonal(d).scale(H);
            assert!((t.view((3 * i, 0), (3, 3)) - want).camax() < 1e-12);
        }
        assert_eq!(
            analysis_matrix(&full(2, &[1.0])).unwrap(),
            Matrix::identity(2, 2)
        );
        let zero = analysis_apply(&r3(&[2]), &Vector::zeros(3)).unwrap();
        assert_eq!(zero, SequenceVector::zeros(3, 3));
    }

    #[test]
    fn synthesis_examples() {
        let sys = r3(&[2]);
        let e2 = real_vector(&[0.0, 1.0, 0.0]);
        let g = analysis_apply(&sys, &e2).unwrap();
        assert!((synthesis_apply(&sys, &g).unwrap() - &e2).camax() < 1e-12);
        assert_eq!(
            synthesis_apply(&sys, &SequenceVector::zeros(3, 3)).unwrap(),
            Vector::zeros(3)
        );

        let h = real_vector(&[0.25, -2.0]);
        let g = SequenceVector {
            blocks: vec![h.clone()],
        };
        assert_eq!(synthesis_apply(&full(2, &[1.0]), &g).unwrap(), h);
        assert!(synthesis_apply(&sys, &SequenceVector::zeros(2, 3)).is_err());
    }

    #[test]
    fn frame_operator_and_bounds() {
        let s = fusion_frame_operator(&r3(&[2]));
        assert!((s - real_diagonal(&[0.5, 1.0, 1.0])).camax() < 1e-15);
        let b = fusion_frame_bounds(&r3(&[2]), 1e-9).unwrap();
        assert!((b.lower - 0.5).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
        assert_eq!(b.classification, Classification::Frame);
        assert_eq!(b.rayleigh.unwrap().escapes, 0);

        let s = fusion_frame_operator(&r3(&[0, 2]));
        assert!((s - Matrix::identity(3, 3)).camax() < 1e-15);
        let b = fusion_frame_bounds(&r3(&[0, 2]), 1e-9).unwrap();
        assert_eq!(b.classification, Classification::Parseval);

        assert_eq!(
            fusion_frame_operator(&full(3, &[1.0])),
            Matrix::identity(3, 3)
        );
        let b = fusion_frame_bounds(&full(2, &[1.0, 1.0]), 1e-9).unwrap();
        assert_eq!(
            (b.lower, b.upper, b.classification),
            (2.0, 2.0, Classification::Tight)
        );
    }

    #[test]
    fn characterization_examples() {
        let c = synthesis_characterization(&r3(&[2]), 1e-9).unwrap();
        assert!(c.surjective && c.consistent);
        assert!((c.norm - 1.0).abs() < 1e-12);
        assert!((c.pinv_lower - 0.5).abs() < 1e-12);

        let c = synthesis_characterization(&r3(&[0, 2]), 1e-9).unwrap();
        assert!((c.norm - 1.0).abs() < 1e-12 && (c.pinv_lower - 1.0).abs() < 1e-12);

        let line = Subspace::coordinate(2, &[0]).unwrap();
        let members = vec![
            WeightedSubspace::new(line.clone(), 1.0),
            WeightedSubspace::new(line, 0.5),
        ];
        let sys = build_system(ControlledPair::identity(2), members, 1e-9).unwrap();
        let c = synthesis_characterization(&sys, 1e-9).unwrap();
        assert!(!c.surjective);
        assert_eq!(c.rank, 1);
        assert!(c.consistent);
    }

    #[test]
    fn range_membership() {
        let sys = r3(&[2]);
        let g = analysis_apply(&sys, &real_vector(&[1.0, -2.0, 0.5])).unwrap();
        assert!(in_analysis_range(&sys, &g, 1e-9).unwrap());
        let mut off = SequenceVector::zeros(3, 3);
        off.blocks[2] = real_vector(&[1.0, 0.0, 0.0]);
        assert!(!in_analysis_range(&sys, &off, 1e-9).unwrap());
    }

    #[test]
    fn vector_frame_reproduces_frame_operator() {
        let sys = r3(&[2]);
        let vf = sys.to_vector_frame().unwrap();
        let s = crate::vector_frames::controlled_frame_operator(&vf);
        assert!((s - fusion_frame_operator(&sys)).camax() < 1e-15);
    }
}
