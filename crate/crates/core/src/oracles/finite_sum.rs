//! Finite-sum classification objectives: logistic loss (convex) and a
//! sigmoid loss (smooth, non-convex). Both sample a component index
//! uniformly, so they are oblivious, and both have closed-form stochastic
//! Hessians of rank one.

use super::{check_dim, OracleCaps, OracleError, Payload, ProblemConstants, QueryCounter, Sample, StochasticOracle};
use crate::linalg::{self, Matrix};
use crate::rng::Rng;

/// `sup |sigma''| = sqrt(3)/18`, attained where the sigmoid curvature peaks.
const SIGMOID_D2_MAX: f64 = 0.096_225_044_864_937_63;
/// `sup |sigma'''| = 1/8`, attained at the origin.
const SIGMOID_D3_MAX: f64 = 0.125;

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(t))`, overflow-safe.
fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid_deriv(t: f64) -> f64 {
    let s = sigmoid(t);
    s * (1.0 - s)
}

/// Rows `a_i` with labels `y_i` in `{-1, +1}`, generated deterministically
/// from a seed.
struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    max_row_norm: f64,
}

fn generate_dataset(terms: usize, dim: usize, feature_scale: f64, seed: u64) -> Dataset {
    let mut rng = Rng::seed_from_u64(seed);
    let sigma = feature_scale / (dim as f64).sqrt();
    let features: Vec<Vec<f64>> = (0..terms)
        .map(|_| (0..dim).map(|_| sigma * rng.normal()).collect())
        .collect();
    let labels: Vec<f64> = (0..terms)
        .map(|_| if rng.bernoulli(0.5) { 1.0 } else { -1.0 })
        .collect();
    let max_row_norm = features.iter().map(|r| linalg::norm(r)).fold(0.0, f64::max);
    Dataset { features, labels, max_row_norm }
}

macro_rules! finite_sum_common {
    () => {
        fn dim(&self) -> usize {
            self.dim
        }

        fn caps(&self) -> OracleCaps {
            OracleCaps {
                is_oblivious: true,
                has_exact_hessian: true,
                has_exact_expectation: true,
                z_is_finite: true,
            }
        }

        fn constants(&self) -> &ProblemConstants {
            &self.constants
        }

        fn queries(&self) -> u64 {
            self.queries.count()
        }

        fn sample(&self, x: &[f64], rng: &mut Rng) -> Result<Sample, OracleError> {
            check_dim(self.dim, x.len())?;
            let idx = rng.index(self.data.features.len());
            self.queries.bump();
            Ok(Sample { payload: Payload::Index(idx), birth_point: x.to_vec() })
        }

        fn outcomes(&self, x: &[f64]) -> Option<Vec<(f64, Sample)>> {
            let n = self.data.features.len();
            Some(
                (0..n)
                    .map(|i| {
                        (
                            1.0 / n as f64,
                            Sample { payload: Payload::Index(i), birth_point: x.to_vec() },
                        )
                    })
                    .collect(),
            )
        }
    };
}

/// `F(x; i) = ln(1 + exp(-y_i <a_i, x>))`, `i` uniform. Convex.
pub struct FiniteSumLogistic {
    data: Dataset,
    dim: usize,
    constants: ProblemConstants,
    queries: QueryCounter,
}

impl FiniteSumLogistic {
    pub fn generate(
        terms: usize,
        dim: usize,
        feature_scale: f64,
        domain_radius: f64,
        seed: u64,
    ) -> Result<Self, OracleError> {
        if terms == 0 || dim == 0 {
            return Err(OracleError::InvalidParameter("empty dataset".into()));
        }
        let data = generate_dataset(terms, dim, feature_scale, seed);
        let amax = data.max_row_norm;
        let constants = ProblemConstants {
            b: softplus(amax * domain_radius),
            grad_f: amax,
            grad_p: 0.0,
            lip_f: amax * amax / 4.0,
            lip_p: 0.0,
            second_order: amax.powi(3) * SIGMOID_D2_MAX,
        };
        Ok(Self { data, dim, constants, queries: QueryCounter::new() })
    }

    pub fn terms(&self) -> usize {
        self.data.features.len()
    }

    fn margin(&self, x: &[f64], i: usize) -> f64 {
        self.data.labels[i] * linalg::dot(&self.data.features[i], x)
    }
}

impl StochasticOracle for FiniteSumLogistic {
    finite_sum_common!();

    fn value(&self, x: &[f64], z: &Sample) -> f64 {
        softplus(-self.margin(x, z.payload.index()))
    }

    fn grad(&self, x: &[f64], z: &Sample) -> Vec<f64> {
        let i = z.payload.index();
        let coeff = -sigmoid(-self.margin(x, i)) * self.data.labels[i];
        linalg::scaled(&self.data.features[i], coeff)
    }

    fn hess_vec(&self, x: &[f64], z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim, u.len())?;
        let i = z.payload.index();
        let a = &self.data.features[i];
        let coeff = sigmoid_deriv(self.margin(x, i)) * linalg::dot(a, u);
        Ok(linalg::scaled(a, coeff))
    }

    fn exact_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        check_dim(self.dim, x.len())?;
        let n = self.terms() as f64;
        Ok((0..self.terms()).map(|i| softplus(-self.margin(x, i))).sum::<f64>() / n)
    }

    fn exact_grad(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim, x.len())?;
        let n = self.terms() as f64;
        let mut g = vec![0.0; self.dim];
        for i in 0..self.terms() {
            let coeff = -sigmoid(-self.margin(x, i)) * self.data.labels[i] / n;
            linalg::axpy(&mut g, coeff, &self.data.features[i]);
        }
        Ok(g)
    }

    fn exact_hess(&self, x: &[f64]) -> Result<Matrix, OracleError> {
        check_dim(self.dim, x.len())?;
        let n = self.terms() as f64;
        let mut h = Matrix::zeros(self.dim);
        for i in 0..self.terms() {
            let a = &self.data.features[i];
            let w = sigmoid_deriv(self.margin(x, i)) / n;
            for r in 0..self.dim {
                for c in 0..self.dim {
                    h.set(r, c, h.get(r, c) + w * a[r] * a[c]);
                }
            }
        }
        Ok(h)
    }
}

/// `F(x; i) = sigmoid(-y_i <a_i, x>)`, `i` uniform. Smooth and non-convex;
/// the stochastic Hessian is `sigma''(-y<a,x>) a a'`.
pub struct NonconvexSigmoidSum {
    data: Dataset,
    dim: usize,
    constants: ProblemConstants,
    queries: QueryCounter,
}

impl NonconvexSigmoidSum {
    pub fn generate(
        terms: usize,
        dim: usize,
        feature_scale: f64,
        seed: u64,
    ) -> Result<Self, OracleError> {
        if terms == 0 || dim == 0 {
            return Err(OracleError::InvalidParameter("empty dataset".into()));
        }
        let data = generate_dataset(terms, dim, feature_scale, seed);
        let amax = data.max_row_norm;
        let constants = ProblemConstants {
            b: 1.0,
            grad_f: amax / 4.0,
            grad_p: 0.0,
            lip_f: amax * amax * SIGMOID_D2_MAX,
            lip_p: 0.0,
            second_order: amax.powi(3) * SIGMOID_D3_MAX,
        };
        Ok(Self { data, dim, constants, queries: QueryCounter::new() })
    }

    pub fn terms(&self) -> usize {
        self.data.features.len()
    }

    fn margin(&self, x: &[f64], i: usize) -> f64 {
        self.data.labels[i] * linalg::dot(&self.data.features[i], x)
    }

    fn d2(t: f64) -> f64 {
        let s = sigmoid(t);
        s * (1.0 - s) * (1.0 - 2.0 * s)
    }
}

impl StochasticOracle for NonconvexSigmoidSum {
    finite_sum_common!();

    fn value(&self, x: &[f64], z: &Sample) -> f64 {
        sigmoid(-self.margin(x, z.payload.index()))
    }

    fn grad(&self, x: &[f64], z: &Sample) -> Vec<f64> {
        let i = z.payload.index();
        let coeff = -sigmoid_deriv(self.margin(x, i)) * self.data.labels[i];
        linalg::scaled(&self.data.features[i], coeff)
    }

    fn hess_vec(&self, x: &[f64], z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim, u.len())?;
        let i = z.payload.index();
        let a = &self.data.features[i];
        let coeff = Self::d2(-self.margin(x, i)) * linalg::dot(a, u);
        Ok(linalg::scaled(a, coeff))
    }

    fn exact_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        check_dim(self.dim, x.len())?;
        let n = self.terms() as f64;
        Ok((0..self.terms()).map(|i| sigmoid(-self.margin(x, i))).sum::<f64>() / n)
    }

    fn exact_grad(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim, x.len())?;
        let n = self.terms() as f64;
        let mut g = vec![0.0; self.dim];
        for i in 0..self.terms() {
            let coeff = -sigmoid_deriv(self.margin(x, i)) * self.data.labels[i] / n;
            linalg::axpy(&mut g, coeff, &self.data.features[i]);
        }
        Ok(g)
    }

    fn exact_hess(&self, x: &[f64]) -> Result<Matrix, OracleError> {
        check_dim(self.dim, x.len())?;
        let n = self.terms() as f64;
        let mut h = Matrix::zeros(self.dim);
        for i in 0..self.terms() {
            let a = &self.data.features[i];
            let w = Self::d2(-self.margin(x, i)) / n;
            for r in 0..self.dim {
                for c in 0..self.dim {
                    h.set(r, c, h.get(r, c) + w * a[r] * a[c]);
                }
            }
        }
        Ok(h)
    }
}
