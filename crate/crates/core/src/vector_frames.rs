//! `(C, C′)`-controlled frames of vectors.
//!
//! A family `{f_i}` is a controlled frame when
//! `A‖f‖² ≤ Σ ⟨C′f, f_i⟩⟨f_i, Cf⟩ ≤ B‖f‖²` for all `f`. The middle term is
//! `⟨S f, f⟩` for the controlled frame operator
//! `S f = Σ ⟨C′f, f_i⟩ C* f_i`, so the optimal bounds are the extreme
//! eigenvalues of `S` whenever `S` is self-adjoint.

use serde::{Deserialize, Serialize};

use crate::numerics::{self, inner, Matrix, Vector};
use crate::{Error, Result};

/// The pair of invertible control operators `(C, C′)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledPair {
    c: Matrix,
    c_prime: Matrix,
    cond_c: f64,
    cond_c_prime: f64,
}

impl ControlledPair {
    /// Largest condition number still treated as invertible.
    pub const MAX_CONDITION: f64 = 1e12;

    pub fn new(c: Matrix, c_prime: Matrix) -> Result<Self> {
        if !c.is_square() || c.shape() != c_prime.shape() {
            return Err(Error::DimensionMismatch(format!(
                "controls must be square and equal in size, got {:?} and {:?}",
                c.shape(),
                c_prime.shape()
            )));
        }
        if !numerics::is_finite(&c) || !numerics::is_finite(&c_prime) {
            return Err(Error::NonFinite("control matrix"));
        }
        let cond_c = numerics::condition_number(&c)?;
        if cond_c.is_nan() || cond_c > Self::MAX_CONDITION {
            return Err(Error::NotInvertible {
                which: "C",
                cond: cond_c,
            });
        }
        let cond_c_prime = numerics::condition_number(&c_prime)?;
        if cond_c_prime.is_nan() || cond_c_prime > Self::MAX_CONDITION {
            return Err(Error::NotInvertible {
                which: "C′",
                cond: cond_c_prime,
            });
        }
        Ok(ControlledPair {
            c,
            c_prime,
            cond_c,
            cond_c_prime,
        })
    }

    pub fn identity(n: usize) -> Self {
        ControlledPair {
            c: Matrix::identity(n, n),
            c_prime: Matrix::identity(n, n),
            cond_c: 1.0,
            cond_c_prime: 1.0,
        }
    }

    /// `C′ = C`.
    pub fn same(c: Matrix) -> Result<Self> {
        Self::new(c.clone(), c)
    }

    /// `C′ = (C*)⁻¹`, which turns an orthonormal basis into a Parseval system.
    pub fn inverse_adjoint(c: Matrix) -> Result<Self> {
        let cond = numerics::condition_number(&c)?;
        if cond.is_nan() || cond > Self::MAX_CONDITION {
            return Err(Error::NotInvertible { which: "C", cond });
        }
        let inv = c
            .adjoint()
            .try_inverse()
            .ok_or(Error::NotInvertible { which: "C*", cond })?;
        Self::new(c, inv)
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn c_prime(&self) -> &Matrix {
        &self.c_prime
    }

    pub fn cond_c(&self) -> f64 {
        self.cond_c
    }

    pub fn cond_c_prime(&self) -> f64 {
        self.cond_c_prime
    }

    /// `‖C‖·‖C′‖`.
    pub fn norm_product(&self) -> Result<f64> {
        Ok(numerics::operator_norm(&self.c)? * numerics::operator_norm(&self.c_prime)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NotAFrame,
    Frame,
    Tight,
    Parseval,
    /// The frame operator is not self-adjoint, so the quadratic form in the
    /// frame inequality is not real in general.
    Indefinite,
}

/// Monte Carlo cross-check of the bounds against sampled Rayleigh quotients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighCheck {
    pub samples: usize,
    pub seed: u64,
    pub min: f64,
    pub max: f64,
    /// Samples outside `[A − 1e-8, B + 1e-8]`.
    pub escapes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub classification: Classification,
    /// `‖S − S*‖ / ‖S‖` (Frobenius).
    pub selfadjoint_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rayleigh: Option<RayleighCheck>,
}

impl FrameBounds {
    pub fn is_frame(&self) -> bool {
        matches!(
            self.classification,
            Classification::Frame | Classification::Tight | Classification::Parseval
        )
    }
}

/// Optimal bounds of a frame-type operator `S`.
///
/// Self-adjoint `S` (within `tol`) gives its extreme eigenvalues; otherwise
/// the extremes of the Hermitian part are reported as `Indefinite`.
pub fn bounds_of_operator(s: &Matrix, tol: f64) -> Result<FrameBounds> {
    let scale = numerics::fro(s);
    let defect = numerics::hermitian_defect(s);
    let selfadjoint_defect = if scale > 0.0 { defect / scale } else { 0.0 };
    if !numerics::is_hermitian(s, tol) {
        let spec = numerics::hermitian_spectrum(&numerics::hermitian_part(s), tol)?;
        return Ok(FrameBounds {
            lower: spec.min(),
            upper: spec.max(),
            classification: Classification::Indefinite,
            selfadjoint_defect,
            rayleigh: None,
        });
    }
    let spec = numerics::hermitian_spectrum(s, tol)?;
    let (lower, upper) = (spec.min(), spec.max());
    let classification = if lower <= tol {
        Classification::NotAFrame
    } else if (lower - 1.0).abs() <= tol && (upper - 1.0).abs() <= tol {
        Classification::Parseval
    } else if (upper - lower).abs() <= tol * upper.max(1.0) {
        Classification::Tight
    } else {
        Classification::Frame
    };
    Ok(FrameBounds {
        lower,
        upper,
        classification,
        selfadjoint_defect,
        rayleigh: None,
    })
}

/// A finite family of vectors with its control pair.
#[derive(Debug, Clone)]
pub struct VectorFrame {
    vectors: Vec<Vector>,
    pair: ControlledPair,
}

impl VectorFrame {
    pub fn new(vectors: Vec<Vector>, pair: ControlledPair) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Empty);
        }
        let n = pair.dim();
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in a space of dimension {}",
                v.len(),
                n
            )));
        }
        Ok(VectorFrame { vectors, pair })
    }

    /// The `C`-controlled variant `Σ ⟨f, f_i⟩⟨C f_i, f⟩`, whose operator is
    /// `S f = Σ ⟨f, f_i⟩ C f_i`. It is the pair `(C*, I)`.
    pub fn c_controlled(vectors: Vec<Vector>, c: Matrix) -> Result<Self> {
        let n = c.nrows();
        let pair = ControlledPair::new(c.adjoint(), Matrix::identity(n, n))?;
        Self::new(vectors, pair)
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn pair(&self) -> &ControlledPair {
        &self.pair
    }

    /// `Σ ⟨C′f, f_i⟩⟨f_i, Cf⟩` evaluated term by term.
    pub fn quadratic_form(&self, f: &Vector) -> numerics::Scalar {
        let cf = self.pair.c() * f;
        let cpf = self.pair.c_prime() * f;
        self.vectors
            .iter()
            .map(|fi| inner(&cpf, fi) * inner(fi, &cf))
            .sum()
    }
}

/// `S = Σ (C* f_i)(C′* f_i)*`.
pub fn controlled_frame_operator(frame: &VectorFrame) -> Matrix {
    let n = frame.dim();
    let c_adj = frame.pair.c().adjoint();
    let cp_adj = frame.pair.c_prime().adjoint();
    frame.vectors.iter().fold(Matrix::zeros(n, n), |acc, f| {
        acc + (&c_adj * f) * (&cp_adj * f).adjoint()
    })
}

pub fn controlled_frame_bounds(frame: &VectorFrame, tol: f64) -> Result<FrameBounds> {
    bounds_of_operator(&controlled_frame_operator(frame), tol)
}

/// Both sides of the eigenvalue-sum identity `Σ λ_k = Σ ⟨C* f_i, C′* f_i⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigensumReport {
    /// `tr S` (real part).
    pub lhs: f64,
    pub lhs_im: f64,
    /// Accumulated vector by vector (real part).
    pub rhs: f64,
    pub rhs_im: f64,
    pub holds: bool,
    pub dimension: usize,
    pub parseval: bool,
    /// `|rhs − n| ≤ tol`, reported for Parseval systems only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub equals_dimension: Option<bool>,
}

pub fn eigensum_identity(frame: &VectorFrame, tol: f64) -> Result<EigensumReport> {
    let s = controlled_frame_operator(frame);
    let lhs = s.trace();
    let c_adj = frame.pair.c().adjoint();
    let cp_adj = frame.pair.c_prime().adjoint();
    let rhs: numerics::Scalar = frame
        .vectors
        .iter()
        .map(|f| inner(&(&c_adj * f), &(&cp_adj * f)))
        .sum();
    let holds = (lhs - rhs).norm() <= tol * lhs.norm().max(1.0);
    let parseval = bounds_of_operator(&s, tol)?.classification == Classification::Parseval;
    let n = frame.dim();
    let equals_dimension = parseval.then(|| (rhs - n as f64).norm() <= tol * (n as f64).max(1.0));
    Ok(EigensumReport {
        lhs: lhs.re,
        lhs_im: lhs.im,
        rhs: rhs.re,
        rhs_im: rhs.im,
        holds,
        dimension: n,
        parseval,
        equals_dimension,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{real_diagonal, real_matrix, real_vector};

    fn e(n: usize, k: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[k] = 1.0.into();
        v
    }

    #[test]
    fn operator_examples() {
        let f = VectorFrame::new(vec![e(2, 0), e(2, 1)], ControlledPair::identity(2)).unwrap();
        assert!((controlled_frame_operator(&f) - Matrix::identity(2, 2)).camax() < 1e-15);

        let f =
            VectorFrame::new(vec![e(2, 0), e(2, 0), e(2, 1)], ControlledPair::identity(2)).unwrap();
        assert!((controlled_frame_operator(&f) - real_diagonal(&[2.0, 1.0])).camax() < 1e-15);

        let pair = ControlledPair::new(real_diagonal(&[2.0, 1.0]), Matrix::identity(2, 2)).unwrap();
        let f = VectorFrame::new(vec![e(2, 0), e(2, 1)], pair).unwrap();
        assert!((controlled_frame_operator(&f) - real_diagonal(&[2.0, 1.0])).camax() < 1e-15);
    }

    #[test]
    fn bounds_examples() {
        let c = real_matrix(&[&[2.0, 1.0, 0.0], &[0.0, 1.0, 3.0], &[1.0, 0.0, 1.0]]);
        let pair = ControlledPair::inverse_adjoint(c).unwrap();
        let f = VectorFrame::new((0..3).map(|k| e(3, k)).collect(), pair).unwrap();
        let b = controlled_frame_bounds(&f, 1e-9).unwrap();
        assert_eq!(b.classification, Classification::Parseval);
        assert!((b.lower - 1.0).abs() < 1e-10 && (b.upper - 1.0).abs() < 1e-10);

        let f =
            VectorFrame::new(vec![e(2, 0), e(2, 0), e(2, 1)], ControlledPair::identity(2)).unwrap();
        let b = controlled_frame_bounds(&f, 1e-9).unwrap();
        assert_eq!(
            (b.lower, b.upper, b.classification),
            (1.0, 2.0, Classification::Frame)
        );

        let f = VectorFrame::new(vec![e(2, 0)], ControlledPair::identity(2)).unwrap();
        let b = controlled_frame_bounds(&f, 1e-9).unwrap();
        assert_eq!(
            (b.lower, b.upper, b.classification),
            (0.0, 1.0, Classification::NotAFrame)
        );
    }

    #[test]
    fn non_selfadjoint_operator_is_indefinite() {
        let c = real_matrix(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let pair = ControlledPair::new(c, Matrix::identity(2, 2)).unwrap();
        let f = VectorFrame::new(vec![e(2, 0), e(2, 1)], pair).unwrap();
        let b = controlled_frame_bounds(&f, 1e-9).unwrap();
        assert_eq!(b.classification, Classification::Indefinite);
        assert!(b.selfadjoint_defect > 0.1);
    }

    #[test]
    fn c_controlled_variant() {
        // S f = Σ ⟨f, f_i⟩ C f_i with C = diag(3, 1) and the standard basis gives diag(3, 1)
        let f =
            VectorFrame::c_controlled(vec![e(2, 0), e(2, 1)], real_diagonal(&[3.0, 1.0])).unwrap();
        assert!((controlled_frame_operator(&f) - real_diagonal(&[3.0, 1.0])).camax() < 1e-15);
        let x = real_vector(&[0.3, -0.7]);
        let direct: numerics::Scalar = f
            .vectors()
            .iter()
            .map(|fi| inner(&x, fi) * inner(&(real_diagonal(&[3.0, 1.0]) * fi), &x))
            .sum();
        assert!((f.quadratic_form(&x) - direct).norm() < 1e-14);
    }

    #[test]
    fn eigensum_identity_basis() {
        let f = VectorFrame::new(
            (0..4).map(|k| e(4, k)).collect(),
            ControlledPair::identity(4),
        )
        .unwrap();
        let r = eigensum_identity(&f, 1e-9).unwrap();
        assert_eq!((r.lhs, r.rhs), (4.0, 4.0));
        assert!(r.holds && r.parseval);
        assert_eq!(r.equals_dimension, Some(true));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            VectorFrame::new(vec![], ControlledPair::identity(2)).unwrap_err(),
            Error::Empty
        );
        assert!(matches!(
            VectorFrame::new(vec![e(3, 0)], ControlledPair::identity(2)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            ControlledPair::same(real_diagonal(&[1.0, 0.0])),
            Err(Error::NotInvertible { .. })
        ));
    }
}
