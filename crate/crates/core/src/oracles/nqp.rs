//! Concave non-positive-definite quadratic program on the unit cube.

use super::{check_dim, OracleCaps, OracleError, Payload, ProblemConstants, QueryCounter, Sample, StochasticOracle};
use crate::linalg::{self, Matrix};
use crate::rng::Rng;

/// `F(x; z) = (h + z)'x + 0.5 x'Hx` with `H = -MM'` for an entrywise
/// nonnegative `M`, and `h_i >= sum_j |H_ij|`; `z` is zero-mean uniform
/// noise on the linear term.
///
/// On `[0, 1]^d` this makes the expected objective simultaneously concave,
/// monotone (`grad F >= 0`), and continuous DR-submodular (`H <= 0`
/// entrywise means the partial derivatives are antitone), which is the
/// regime the continuous-greedy updates target.
pub struct ConcaveNqp {
    linear: Vec<f64>,
    hmat: Matrix,
    noise: f64,
    constants: ProblemConstants,
    queries: QueryCounter,
}

impl ConcaveNqp {
    pub fn new(linear: Vec<f64>, hmat: Matrix, noise: f64) -> Result<Self, OracleError> {
        let dim = hmat.dim();
        check_dim(dim, linear.len())?;
        if noise < 0.0 {
            return Err(OracleError::InvalidParameter(format!("negative noise {noise}")));
        }
        for i in 0..dim {
            for j in 0..dim {
                if hmat.get(i, j) > 0.0 {
                    return Err(OracleError::InvalidParameter(
                        "curvature matrix must be entrywise nonpositive".into(),
                    ));
                }
            }
        }
        for (i, (h, row_sum)) in linear.iter().zip(hmat.abs_row_sums()).enumerate() {
            if *h < row_sum {
                return Err(OracleError::InvalidParameter(format!(
                    "linear term {i} too small for monotonicity: {h} < {row_sum}"
                )));
            }
        }
        let d = dim as f64;
        // Bounds over [0,1]^d (||x|| <= sqrt(d)); the Frobenius norm is a
        // closed-form upper bound on the spectral norm.
        let h_norm = hmat.frobenius_norm();
        let lin_bound = linalg::norm(&linear) + noise * d.sqrt();
        let constants = ProblemConstants {
            b: lin_bound * d.sqrt() + 0.5 * h_norm * d,
            grad_f: lin_bound + h_norm * d.sqrt(),
            grad_p: 0.0,
            lip_f: h_norm,
            lip_p: 0.0,
            second_order: 0.0,
        };
        Ok(Self { linear, hmat, noise, constants, queries: QueryCounter::new() })
    }

    /// Random instance: `M` entrywise uniform in `[0, 1/sqrt(d)]`, curvature
    /// `H = -MM'`, and linear terms padded above the monotonicity threshold
    /// by a uniform margin.
    pub fn generate(dim: usize, noise: f64, seed: u64) -> Result<Self, OracleError> {
        if dim == 0 {
            return Err(OracleError::InvalidParameter("dimension 0".into()));
        }
        let mut rng = Rng::seed_from_u64(seed);
        let scale = 1.0 / (dim as f64).sqrt();
        let m = Matrix::from_fn(dim, |_, _| rng.uniform() * scale);
        let hmat = Matrix::from_fn(dim, |i, j| {
            -(0..dim).map(|k| m.get(i, k) * m.get(j, k)).sum::<f64>()
        });
        let linear: Vec<f64> = hmat
            .abs_row_sums()
            .into_iter()
            .map(|s| s + rng.uniform_in(0.1, 0.5))
            .collect();
        Self::new(linear, hmat, noise)
    }

    pub fn curvature(&self) -> &Matrix {
        &self.hmat
    }
}

impl StochasticOracle for ConcaveNqp {
    fn dim(&self) -> usize {
        self.hmat.dim()
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
        linalg::dot(&linalg::add(&self.linear, z), x) + 0.5 * self.hmat.quad_form(x)
    }

    fn grad(&self, x: &[f64], z: &Sample) -> Vec<f64> {
        let z = z.payload.vector();
        let mut g = self.hmat.matvec(x);
        for ((gi, hi), zi) in g.iter_mut().zip(&self.linear).zip(z) {
            *gi += hi + zi;
        }
        g
    }

    fn hess_vec(&self, _x: &[f64], _z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), u.len())?;
        Ok(self.hmat.matvec(u))
    }

    fn exact_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        check_dim(self.dim(), x.len())?;
        Ok(linalg::dot(&self.linear, x) + 0.5 * self.hmat.quad_form(x))
    }

    fn exact_grad(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), x.len())?;
        let mut g = self.hmat.matvec(x);
        for (gi, hi) in g.iter_mut().zip(&self.linear) {
            *gi += hi;
        }
        Ok(g)
    }

    fn exact_hess(&self, _x: &[f64]) -> Result<Matrix, OracleError> {
        Ok(self.hmat.clone())
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::test_support::assert_grad_consistent;

    #[test]
    fn gradient_nonnegative_on_unit_cube() {
        for seed in 0..10 {
            let o = ConcaveNqp::generate(4, 0.0, seed).unwrap();
            let mut rng = Rng::seed_from_u64(seed + 100);
            for _ in 0..1000 {
                let x: Vec<f64> = (0..4).map(|_| rng.uniform()).collect();
                let g = o.exact_grad(&x).unwrap();
                assert!(g.iter().all(|gi| *gi >= -1e-12), "negative gradient at {x:?}");
            }
        }
    }

    #[test]
    fn partial_derivatives_antitone() {
        // DR property: grad F(x) >= grad F(y) componentwise when x <= y.
        let o = ConcaveNqp::generate(3, 0.0, 5).unwrap();
        let mut rng = Rng::seed_from_u64(9);
        for _ in 0..500 {
            let x: Vec<f64> = (0..3).map(|_| rng.uniform()).collect();
            let y: Vec<f64> = x.iter().map(|xi| xi + (1.0 - xi) * rng.uniform()).collect();
            let gx = o.exact_grad(&x).unwrap();
            let gy = o.exact_grad(&y).unwrap();
            for (a, b) in gx.iter().zip(&gy) {
                assert!(a >= &(b - 1e-12));
            }
        }
    }

    #[test]
    fn curvature_negative_semidefinite() {
        let o = ConcaveNqp::generate(5, 0.0, 2).unwrap();
        let mut rng = Rng::seed_from_u64(3);
        for _ in 0..500 {
            let v: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
            assert!(o.curvature().quad_form(&v) <= 1e-12);
        }
    }

    #[test]
    fn exact_grad_matches_finite_differences() {
        let o = ConcaveNqp::generate(4, 0.3, 8).unwrap();
        assert_grad_consistent(&o, &[0.2, 0.8, 0.5, 0.1]);
    }

    #[test]
    fn rejects_bad_instances() {
        let h = Matrix::from_fn(2, |_, _| 0.5);
        assert!(ConcaveNqp::new(vec![1.0, 1.0], h, 0.0).is_err());
        let h = Matrix::from_fn(2, |_, _| -0.5);
        assert!(ConcaveNqp::new(vec![0.1, 1.0], h, 0.0).is_err());
    }
}
