//! Seeded random systems.
//!
//! All randomness goes through `ChaCha8Rng` so a seed reproduces the same
//! matrices bit for bit on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::{ControlSpec, MemberConfig, SystemConfig};
use crate::numerics::{self, Matrix, Vector};
use crate::{ControlledFusionSystem, Error, Result};

/// Largest condition number accepted for a random control matrix.
pub const MAX_GENERATED_CONDITION: f64 = 1e6;
const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// `C = C′ = I`.
    Identity,
    /// Random `C`, `C′ = C`; every controlled projection is positive.
    C2,
    /// Independent random `C` and `C′`; positivity is not guaranteed.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    Uniform(f64),
    /// Uniform on `[0.5, 1.5)`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSpec {
    pub dim: usize,
    pub subspace_dims: Vec<usize>,
    pub mode: ControlMode,
    pub weights: WeightLaw,
    pub field: Field,
    pub seed: u64,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(rng: &mut R, field: Field) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    match field {
        Field::Real => Complex64::new(re, 0.0),
        Field::Complex => {
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im).scale(std::f64::consts::FRAC_1_SQRT_2)
        }
    }
}

/// Matrix with independent standard Gaussian entries.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, field: Field) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    // row-major fill so the stream order matches the file layout
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng, field);
        }
    }
    m
}

/// Gaussian matrix resampled until its condition number is at most `max_cond`.
pub fn random_invertible<R: Rng>(
    rng: &mut R,
    n: usize,
    field: Field,
    max_cond: f64,
) -> Result<Matrix> {
    for _ in 0..MAX_ATTEMPTS {
        let m = gaussian_matrix(rng, n, n, field);
        if numerics::condition_number(&m)? <= max_cond {
            return Ok(m);
        }
    }
    Err(Error::GenerationFailure(format!(
        "no {n}x{n} matrix with condition number ≤ {max_cond:e} in {MAX_ATTEMPTS} attempts"
    )))
}

/// Random unitary (Gaussian followed by orthonormalization).
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize, field: Field) -> Result<Matrix> {
    loop {
        let g = gaussian_matrix(rng, n, n, field);
        let q = numerics::orthonormalize(&g, 1e-10)?;
        if q.ncols() == n {
            return Ok(q);
        }
    }
}

/// Orthonormal basis of a random `k`-dimensional subspace of the `n`-space.
pub fn random_subspace_basis<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    field: Field,
) -> Result<Matrix> {
    for _ in 0..MAX_ATTEMPTS {
        let g = gaussian_matrix(rng, n, k, field);
        let q = numerics::orthonormalize(&g, 1e-10)?;
        if q.ncols() == k {
            return Ok(q);
        }
    }
    Err(Error::GenerationFailure(format!(
        "rank-deficient {n}x{k} draws"
    )))
}

/// Complex Gaussian vector of unit norm drawn from `seed`.
pub fn random_unit_vector(n: usize, seed: u64) -> Vector {
    let mut rng = rng_from_seed(seed);
    loop {
        let v = Vector::from_fn(n, |_, _| gaussian(&mut rng, Field::Complex));
        let norm = v.norm();
        if norm > 1e-300 {
            return v.unscale(norm);
        }
    }
}

/// Random configuration; deterministic in `spec.seed`.
pub fn generate_config(spec: &GenerateSpec) -> Result<SystemConfig> {
    let n = spec.dim;
    if n == 0 || spec.subspace_dims.is_empty() {
        return Err(Error::GenerationFailure(
            "need a positive dimension and at least one subspace".into(),
        ));
    }
    if let Some(&k) = spec.subspace_dims.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::GenerationFailure(format!(
            "subspace dimension {k} outside [1, {n}]"
        )));
    }
    if let WeightLaw::Uniform(v) = spec.weights {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidWeight {
                index: 0,
                weight: v,
            });
        }
    }
    let mut rng = rng_from_seed(spec.seed);
    let (c, c_prime) = match spec.mode {
        ControlMode::Identity => (ControlSpec::Identity, ControlSpec::Identity),
        ControlMode::C2 => (
            ControlSpec::Matrix(random_invertible(
                &mut rng,
                n,
                spec.field,
                MAX_GENERATED_CONDITION,
            )?),
            ControlSpec::Same,
        ),
        ControlMode::Pair => {
            let c = random_invertible(&mut rng, n, spec.field, MAX_GENERATED_CONDITION)?;
            let cp = random_invertible(&mut rng, n, spec.field, MAX_GENERATED_CONDITION)?;
            (ControlSpec::Matrix(c), ControlSpec::Matrix(cp))
        }
    };
    let mut subspaces = Vec::with_capacity(spec.subspace_dims.len());
    for &k in &spec.subspace_dims {
        let basis = random_subspace_basis(&mut rng, n, k, spec.field)?;
        let weight = match spec.weights {
            WeightLaw::Uniform(v) => v,
            WeightLaw::Random => rng.random_range(0.5..1.5),
        };
        subspaces.push(MemberConfig { basis, weight });
    }
    Ok(SystemConfig {
        dimension: n,
        field: spec.field,
        c,
        c_prime,
        subspaces,
        expected: None,
    })
}

pub fn generate_system(spec: &GenerateSpec, tol: f64) -> Result<ControlledFusionSystem> {
    generate_config(spec)?
        .build(tol, 1e-10)
        .map_err(|e| match e {
            crate::config::ConfigError::System(e) => e,
            other => Error::GenerationFailure(other.to_string()),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mode: ControlMode, seed: u64) -> GenerateSpec {
        GenerateSpec {
            dim: 4,
            subspace_dims: vec![2, 3, 1],
            mode,
            weights: WeightLaw::Random,
            field: Field::Real,
            seed,
        }
    }

    #[test]
    fn same_seed_same_matrices() {
        let a = generate_config(&spec(ControlMode::Pair, 11)).unwrap();
        let b = generate_config(&spec(ControlMode::Pair, 11)).unwrap();
        assert_eq!(a, b);
        let c = generate_config(&spec(ControlMode::Pair, 12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn c2_mode_is_positive() {
        for seed in 0..20 {
            let mut s = spec(ControlMode::C2, seed);
            s.field = if seed % 2 == 0 {
                Field::Real
            } else {
                Field::Complex
            };
            let sys = generate_system(&s, 1e-9).unwrap();
            assert!(sys.all_positive(), "seed {seed}");
        }
    }

    #[test]
    fn identity_mode() {
        let mut s = spec(ControlMode::Identity, 3);
        s.weights = WeightLaw::Uniform(std::f64::consts::FRAC_1_SQRT_2);
        let sys = generate_system(&s, 1e-9).unwrap();
        assert_eq!(sys.pair().c(), &Matrix::identity(4, 4));
        assert!(sys
            .weights()
            .iter()
            .all(|&w| w == std::f64::consts::FRAC_1_SQRT_2));
        assert_eq!(
            sys.members()
                .iter()
                .map(|m| m.subspace.dim())
                .collect::<Vec<_>>(),
            vec![2, 3, 1]
        );
    }

    #[test]
    fn rejects_bad_dims() {
        let mut s = spec(ControlMode::Identity, 0);
        s.subspace_dims = vec![5];
        assert!(matches!(
            generate_config(&s),
            Err(Error::GenerationFailure(_))
        ));
        s.subspace_dims = vec![0];
        assert!(generate_config(&s).is_err());
    }

    #[test]
    fn unit_vectors_are_unit() {
        for seed in 0..10 {
            assert!((random_unit_vector(5, seed).norm() - 1.0).abs() < 1e-14);
        }
    }
}
