#![allow(dead_code)]

use cff_core::generate::{self, ControlMode, Field, GenerateSpec, WeightLaw};
use cff_core::{ControlledFusionSystem, Matrix, Vector};
use num_complex::Complex64;
use rand::Rng;

pub fn field(seed: u64) -> Field {
    if seed.is_multiple_of(2) {
        Field::Real
    } else {
        Field::Complex
    }
}

/// Random system with `m` members of random dimension in `n`-space.
pub fn system(n: usize, m: usize, mode: ControlMode, seed: u64) -> ControlledFusionSystem {
    let mut rng = generate::rng_from_seed(seed ^ 0x5eed);
    let subspace_dims = (0..m).map(|_| rng.random_range(1..=n)).collect();
    let spec = GenerateSpec {
        dim: n,
        subspace_dims,
        mode,
        weights: WeightLaw::Random,
        field: field(seed),
        seed,
    };
    generate::generate_system(&spec, 1e-9).unwrap()
}

pub fn matrix(n: usize, k: usize, seed: u64) -> Matrix {
    generate::gaussian_matrix(&mut generate::rng_from_seed(seed), n, k, field(seed))
}

/// Random vector with unit norm.
pub fn unit(n: usize, seed: u64) -> Vector {
    generate::random_unit_vector(n, seed)
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Projection `QQ*` for an orthonormal `Q`.
pub fn proj(q: &Matrix) -> Matrix {
    q * q.adjoint()
}

/// `S_W` summed straight from the definition.
pub fn frame_operator_oracle(sys: &ControlledFusionSystem) -> Matrix {
    let n = sys.dim();
    let (c, cp) = (sys.pair().c(), sys.pair().c_prime());
    sys.members().iter().fold(Matrix::zeros(n, n), |acc, m| {
        acc + (c.adjoint() * proj(m.subspace.basis()) * cp).scale(m.weight * m.weight)
    })
}

/// Extreme eigenvalues of the Hermitian part, straight from nalgebra.
pub fn hermitian_extremes(m: &Matrix) -> (f64, f64) {
    let h = (m + m.adjoint()).scale(0.5);
    let e = nalgebra::SymmetricEigen::new(h).eigenvalues;
    let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
