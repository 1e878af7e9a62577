//! Convex quadratic with additive uniform noise on the linear term.

use super::{check_dim, OracleCaps, OracleError, Payload, ProblemConstants, QueryCounter, Sample, StochasticOracle};
use crate::linalg::{self, Matrix};
use crate::rng::Rng;

/// `F(x; z) = 0.5 x'Ax - (b + z)'x` with `A` positive semidefinite and
/// `z` uniform on `[-noise, noise]^d`, so the noise cancels in expectation
/// and `F(x) = 0.5 x'Ax - b'x`.
///
/// The sampling distribution never depends on `x` (oblivious), the Hessian
/// `A` is exact, and with `noise = 0` the instance is fully deterministic,
/// which is what the zero-noise degeneration checks rely on.
pub struct ObliviousQuadratic {
    a: Matrix,
    b: Vec<f64>,
    noise: f64,
    spectral_bound: f64,
    constants: ProblemConstants,
    queries: QueryCounter,
}

impl ObliviousQuadratic {
    /// Builds the instance from explicit data. `spectral_bound` must be a
    /// valid upper bound on `||A||_2` (exact when the spectrum is known);
    /// `domain_radius` bounds `||x||` over the feasible set the instance
    /// will be optimized on.
    pub fn new(
        a: Matrix,
        b: Vec<f64>,
        noise: f64,
        spectral_bound: f64,
        domain_radius: f64,
    ) -> Result<Self, OracleError> {
        if a.dim() != b.len() {
            return Err(OracleError::DimensionMismatch { expected: a.dim(), got: b.len() });
        }
        if noise < 0.0 {
            return Err(OracleError::InvalidParameter(format!("negative noise {noise}")));
        }
        let constants = Self::derive_constants(spectral_bound, &b, noise, domain_radius);
        Ok(Self { a, b, noise, spectral_bound, constants, queries: QueryCounter::new() })
    }

    /// Random instance with known spectrum:` A = V diag(eigs) V'` for a
    /// random orthogonal `V` and eigenvalues spread linearly over
    /// `[eig_lo, eig_hi]`, so `||A||_2 = eig_hi` exactly.
    pub fn generate(
        dim: usize,
        eig_lo: f64,
        eig_hi: f64,
        noise: f64,
        domain_radius: f64,
        seed: u64,
    ) -> Result<Self, OracleError> {
        if dim == 0 {
            return Err(OracleError::InvalidParameter("dimension 0".into()));
        }
        if !(0.0 <= eig_lo && eig_lo <= eig_hi) {
            return Err(OracleError::InvalidParameter(format!(
                "bad spectrum [{eig_lo}, {eig_hi}]"
            )));
        }
        let mut rng = Rng::seed_from_u64(seed);
        let v = random_orthogonal(dim, &mut rng);
        let eigs: Vec<f64> = (0..dim)
            .map(|i| {
                if dim == 1 {
                    eig_hi
                } else {
                    eig_lo + (eig_hi - eig_lo) * i as f64 / (dim - 1) as f64
                }
            })
            .collect();
        let a = Matrix::from_fn(dim, |i, j| {
            (0..dim).map(|k| v.get(i, k) * eigs[k] * v.get(j, k)).sum()
        });
        let b: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        Self::new(a, b, noise, eig_hi, domain_radius)
    }

    /// Replaces the linear term, recomputing the certified constants.
    pub fn with_linear_term(mut self, b: Vec<f64>) -> Result<Self, OracleError> {
        check_dim(self.a.dim(), b.len())?;
        self.constants = Self::derive_constants(
            self.spectral_bound,
            &b,
            self.noise,
            self.constants_domain_radius(),
        );
        self.b = b;
        Ok(self)
    }

    fn constants_domain_radius(&self) -> f64 {
        // Recover R from G_F = ||A|| R + ||b|| + noise sqrt(d).
        let d = self.a.dim() as f64;
        (self.constants.grad_f - linalg::norm(&self.b) - self.noise * d.sqrt())
            / self.spectral_bound.max(f64::MIN_POSITIVE)
    }

    fn derive_constants(spectral: f64, b: &[f64], noise: f64, r: f64) -> ProblemConstants {
        let d = b.len() as f64;
        let noise_norm = noise * d.sqrt();
        let b_norm = linalg::norm(b);
        ProblemConstants {
            b: 0.5 * spectral * r * r + (b_norm + noise_norm) * r,
            grad_f: spectral * r + b_norm + noise_norm,
            grad_p: 0.0,
            lip_f: spectral,
            lip_p: 0.0,
            second_order: 0.0,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.b
    }

    pub fn noise_amplitude(&self) -> f64 {
        self.noise
    }
}

impl StochasticOracle for ObliviousQuadratic {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn caps(&self) -> OracleCaps {
        OracleCaps {
            is_oblivious: true,
            has_exact_hessian: true,
            has_exact_expectation: true,
            z_is_finite: self.noise == 0.0,
        }
    }

    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    fn queries(&self) -> u64 {
        self.queries.count()
    }

    fn sample(&self, x: &[f64], rng: &mut Rng) -> Result<Sample, OracleError> {
        check_dim(self.dim(), x.len())?;
        let z: Vec<f64> = (0..self.dim()).map(|_| rng.symmetric(self.noise)).collect();
        self.queries.bump();
        Ok(Sample { payload: Payload::Vector(z), birth_point: x.to_vec() })
    }

    fn value(&self, x: &[f64], z: &Sample) -> f64 {
        let z = z.payload.vector();
        0.5 * self.a.quad_form(x) - linalg::dot(&linalg::add(&self.b, z), x)
    }

    fn grad(&self, x: &[f64], z: &Sample) -> Vec<f64> {
        let z = z.payload.vector();
        let mut g = self.a.matvec(x);
        for ((gi, bi), zi) in g.iter_mut().zip(&self.b).zip(z) {
            *gi -= bi + zi;
        }
        g
    }

    fn hess_vec(&self, _x: &[f64], _z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), u.len())?;
        Ok(self.a.matvec(u))
    }

    fn exact_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        check_dim(self.dim(), x.len())?;
        Ok(0.5 * self.a.quad_form(x) - linalg::dot(&self.b, x))
    }

    fn exact_grad(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), x.len())?;
        let mut g = self.a.matvec(x);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        Ok(g)
    }

    fn exact_hess(&self, _x: &[f64]) -> Result<Matrix, OracleError> {
        Ok(self.a.clone())
    }

    fn outcomes(&self, x: &[f64]) -> Option<Vec<(f64, Sample)>> {
        if self.noise == 0.0 {
            Some(vec![(
                1.0,
                Sample { payload: Payload::Vector(vec![0.0; self.dim()]), birth_point: x.to_vec() },
            )])
        } else {
            None
        }
    }
}

/// Random orthogonal matrix via Gram-Schmidt on a Gaussian matrix, with one
/// re-orthogonalization pass for numerical hygiene at small dimensions.
fn random_orthogonal(dim: usize, rng: &mut Rng) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        for _ in 0..2 {
            for c in &cols {
                let proj = linalg::dot(&v, c);
                linalg::axpy(&mut v, -proj, c);
            }
        }
        let n = linalg::norm(&v);
        if n > 1e-8 {
            cols.push(linalg::scaled(&v, 1.0 / n));
        }
    }
    Matrix::from_fn(dim, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::test_support::assert_grad_consistent;

    #[test]
    fn generated_matrix_is_symmetric_with_known_norm() {
        let q = ObliviousQuadratic::generate(6, 0.5, 2.0, 0.1, 1.0, 9).unwrap();
        let a = q.matrix();
        for i in 0..6 {
            for j in 0..6 {
                assert!((a.get(i, j) - a.get(j, i)).abs() < 1e-12);
            }
        }
        // Rayleigh quotients never exceed the declared spectral bound.
        let mut rng = Rng::seed_from_u64(4);
        for _ in 0..200 {
            let v: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
            let q_form = a.quad_form(&v) / linalg::dot(&v, &v);
            assert!(q_form <= 2.0 + 1e-9);
            assert!(q_form >= 0.5 - 1e-9);
        }
    }

    #[test]
    fn noise_cancels_in_expectation() {
        let q = ObliviousQuadratic::generate(4, 0.5, 1.5, 0.8, 1.0, 11).unwrap();
        let x = vec![0.2, 0.1, -0.3, 0.05];
        let mut rng = Rng::seed_from_u64(99);
        let reps = 200_000;
        let mut mean = vec![0.0; 4];
        for _ in 0..reps {
            let z = q.sample(&x, &mut rng).unwrap();
            linalg::axpy(&mut mean, 1.0 / reps as f64, &q.grad(&x, &z));
        }
        let exact = q.exact_grad(&x).unwrap();
        // SE per coordinate ~ noise/sqrt(3 reps) ~ 1e-3.
        assert!(linalg::max_abs_diff(&mean, &exact) < 6e-3);
        assert_eq!(q.queries(), reps as u64);
    }

    #[test]
    fn hessian_vector_product_ignores_noise() {
        let q = ObliviousQuadratic::generate(5, 0.5, 2.0, 0.4, 1.0, 3).unwrap();
        let mut rng = Rng::seed_from_u64(1);
        let x = vec![0.1; 5];
        let u: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let z = q.sample(&x, &mut rng).unwrap();
        let hv = q.hess_vec(&x, &z, &u).unwrap();
        assert_eq!(hv, q.matrix().matvec(&u));
    }

    #[test]
    fn exact_grad_matches_finite_differences() {
        let q = ObliviousQuadratic::generate(5, 0.2, 1.8, 0.3, 1.0, 17).unwrap();
        assert_grad_consistent(&q, &[0.1, -0.2, 0.3, 0.0, 0.25]);
    }

    #[test]
    fn zero_noise_is_deterministic() {
        let q = ObliviousQuadratic::generate(3, 1.0, 1.0, 0.0, 1.0, 5).unwrap();
        let mut rng = Rng::seed_from_u64(8);
        let x = vec![0.3, 0.3, 0.4];
        let z = q.sample(&x, &mut rng).unwrap();
        assert_eq!(q.grad(&x, &z), q.exact_grad(&x).unwrap());
        assert_eq!(q.outcomes(&x).unwrap().len(), 1);
    }
}
