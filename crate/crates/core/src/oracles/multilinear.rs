//! Smoothed multilinear extension of a monotone submodular set function:
//! the genuinely non-oblivious instance.
//!
//! The decision variable parameterizes the sampling distribution itself:
//! each ground element is included independently with probability
//! `xt_i = xi + (1 - 2 xi) x_i`, and the stochastic value is just the set
//! function at the drawn subset. The stochastic function therefore carries
//! no gradient at all; every bit of first- and second-order information
//! flows through the log-density derivatives.
//!
//! The smoothing `xi in (0, 1/2)` keeps the inclusion probabilities inside
//! `[xi, 1 - xi]`, which bounds the score norms (they blow up as raw
//! probabilities touch 0 or 1) while preserving monotonicity and the
//! diminishing-returns property, since the reparameterization is affine
//! with positive slope.

use super::{check_dim, OracleCaps, OracleError, Payload, ProblemConstants, QueryCounter, Sample, StochasticOracle};
use crate::linalg::Matrix;
use crate::rng::Rng;
use crate::sets::ConstraintSet;

/// Ground sets are enumerated exhaustively, so they stay small.
pub const MAX_GROUND_SET: usize = 12;

/// A set function tabulated over all subsets of a small ground set.
#[derive(Clone, Debug)]
pub struct SetFunction {
    dim: usize,
    table: Vec<f64>,
}

impl SetFunction {
    /// Builds from an explicit table indexed by subset bitmask.
    pub fn from_table(dim: usize, table: Vec<f64>) -> Result<Self, OracleError> {
        if dim == 0 || dim > MAX_GROUND_SET {
            return Err(OracleError::TooLarge { what: "ground set", limit: MAX_GROUND_SET, got: dim });
        }
        if table.len() != 1 << dim {
            return Err(OracleError::InvalidParameter(format!(
                "table length {} != 2^{dim}",
                table.len()
            )));
        }
        Ok(Self { dim, table })
    }

    /// Weighted coverage: item `i` covers the universe elements in
    /// `item_covers[i]`, and `f(S)` is the total weight covered by `S`.
    pub fn coverage(item_covers: Vec<u32>, universe_weights: Vec<f64>) -> Result<Self, OracleError> {
        let dim = item_covers.len();
        if dim == 0 || dim > MAX_GROUND_SET {
            return Err(OracleError::TooLarge { what: "ground set", limit: MAX_GROUND_SET, got: dim });
        }
        let m = universe_weights.len();
        if m > 32 {
            return Err(OracleError::InvalidParameter("universe larger than 32".into()));
        }
        let table = (0u32..(1 << dim))
            .map(|mask| {
                let mut covered = 0u32;
                for (i, c) in item_covers.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        covered |= c;
                    }
                }
                (0..m).filter(|e| covered & (1 << e) != 0).map(|e| universe_weights[e]).sum()
            })
            .collect();
        Self::from_table(dim, table)
    }

    /// Budget-additive: `f(S) = min(sum of weights in S, cap)`.
    pub fn budget_additive(weights: Vec<f64>, cap: f64) -> Result<Self, OracleError> {
        let dim = weights.len();
        if dim == 0 || dim > MAX_GROUND_SET {
            return Err(OracleError::TooLarge { what: "ground set", limit: MAX_GROUND_SET, got: dim });
        }
        if weights.iter().any(|w| *w < 0.0) || cap < 0.0 {
            return Err(OracleError::InvalidParameter("negative weight or cap".into()));
        }
        let table = (0u32..(1 << dim))
            .map(|mask| {
                let total: f64 =
                    (0..dim).filter(|i| mask & (1 << i) != 0).map(|i| weights[i]).sum();
                total.min(cap)
            })
            .collect();
        Self::from_table(dim, table)
    }

    /// Random coverage instance, deterministic in the seed.
    pub fn generate_coverage(dim: usize, seed: u64) -> Result<Self, OracleError> {
        let mut rng = Rng::seed_from_u64(seed);
        let universe = (2 * dim).min(32);
        let weights: Vec<f64> = (0..universe).map(|_| rng.uniform_in(0.5, 1.5)).collect();
        let covers: Vec<u32> = (0..dim)
            .map(|_| {
                let mut c = 0u32;
                for e in 0..universe {
                    if rng.bernoulli(0.45) {
                        c |= 1 << e;
                    }
                }
                if c == 0 {
                    c |= 1 << rng.index(universe);
                }
                c
            })
            .collect();
        Self::coverage(covers, weights)
    }

    /// Random budget-additive instance, deterministic in the seed.
    pub fn generate_budget_additive(dim: usize, seed: u64) -> Result<Self, OracleError> {
        let mut rng = Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..dim).map(|_| rng.uniform_in(0.5, 1.5)).collect();
        let cap = 0.6 * weights.iter().sum::<f64>();
        Self::budget_additive(weights, cap)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, mask: u32) -> f64 {
        self.table[mask as usize]
    }

    pub fn max_abs_value(&self) -> f64 {
        self.table.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Marginal gains never negative.
    pub fn is_monotone(&self) -> bool {
        (0u32..(1 << self.dim)).all(|mask| {
            (0..self.dim).all(|i| {
                mask & (1 << i) != 0 || self.value(mask | (1 << i)) >= self.value(mask) - 1e-12
            })
        })
    }

    /// Pairwise diminishing-returns check, equivalent to submodularity.
    pub fn is_submodular(&self) -> bool {
        (0u32..(1 << self.dim)).all(|mask| {
            (0..self.dim).all(|i| {
                if mask & (1 << i) != 0 {
                    return true;
                }
                (0..self.dim).all(|j| {
                    if j == i || mask & (1 << j) != 0 {
                        return true;
                    }
                    let fi = self.value(mask | (1 << i)) - self.value(mask);
                    let fij = self.value(mask | (1 << i) | (1 << j)) - self.value(mask | (1 << j));
                    fi >= fij - 1e-12
                })
            })
        })
    }
}

/// The smoothed multilinear oracle.
pub struct SmoothedMultilinear {
    f: SetFunction,
    xi: f64,
    constants: ProblemConstants,
    queries: QueryCounter,
}

impl SmoothedMultilinear {
    pub fn new(f: SetFunction, xi: f64) -> Result<Self, OracleError> {
        if !(xi > 0.0 && xi < 0.5) {
            return Err(OracleError::InvalidParameter(format!("xi must be in (0, 1/2), got {xi}")));
        }
        let d = f.dim() as f64;
        let slope = 1.0 - 2.0 * xi;
        let constants = ProblemConstants {
            b: f.max_abs_value(),
            grad_f: 0.0,
            grad_p: d.sqrt() * slope / xi,
            lip_f: 0.0,
            lip_p: slope * slope / (xi * xi),
            second_order: 2.0 * slope.powi(3) / xi.powi(3),
        };
        Ok(Self { f, xi, constants, queries: QueryCounter::new() })
    }

    pub fn set_function(&self) -> &SetFunction {
        &self.f
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Inclusion probability for coordinate value `x_i`.
    fn smooth(&self, xi_coord: f64) -> f64 {
        self.xi + (1.0 - 2.0 * self.xi) * xi_coord
    }

    fn smooth_all(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        let probs: Vec<f64> = x.iter().map(|v| self.smooth(*v)).collect();
        if probs.iter().any(|p| *p <= 0.0 || *p >= 1.0) {
            return Err(OracleError::InfeasiblePoint);
        }
        Ok(probs)
    }

    fn outcome_prob(probs: &[f64], mask: u32) -> f64 {
        probs
            .iter()
            .enumerate()
            .map(|(i, p)| if mask & (1 << i) != 0 { *p } else { 1.0 - p })
            .product()
    }

    /// Score of coordinate `i`: `d log p / d x_i`.
    fn score(&self, probs: &[f64], mask: u32, i: usize) -> f64 {
        let slope = 1.0 - 2.0 * self.xi;
        if mask & (1 << i) != 0 {
            slope / probs[i]
        } else {
            -slope / (1.0 - probs[i])
        }
    }

    /// Largest set value over subsets whose indicator vector is feasible.
    ///
    /// This is a discrete reference scale for the smoothed objective, not
    /// its exact optimum: the smoothing keeps every inclusion probability in
    /// `(0, 1)`, so continuous optima of the smoothed extension sit strictly
    /// between the empty-set and full-support values.
    pub fn discrete_reference(&self, set: &ConstraintSet) -> Result<(f64, Vec<f64>), OracleError> {
        check_dim(set.dim(), self.dim())?;
        let mut best = f64::NEG_INFINITY;
        let mut best_point = vec![0.0; self.dim()];
        for mask in 0u32..(1 << self.dim()) {
            let indicator: Vec<f64> = (0..self.dim())
                .map(|i| if mask & (1 << i) != 0 { 1.0 } else { 0.0 })
                .collect();
            if set.contains(&indicator, 1e-9) && self.f.value(mask) > best {
                best = self.f.value(mask);
                best_point = indicator;
            }
        }
        if best.is_finite() {
            Ok((best, best_point))
        } else {
            Err(OracleError::InfeasiblePoint)
        }
    }
}

impl StochasticOracle for SmoothedMultilinear {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn caps(&self) -> OracleCaps {
        OracleCaps {
            is_oblivious: false,
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
        check_dim(self.dim(), x.len())?;
        if x.iter().any(|v| *v < -1e-9 || *v > 1.0 + 1e-9) {
            return Err(OracleError::InfeasiblePoint);
        }
        let probs = self.smooth_all(x)?;
        let mut mask = 0u32;
        for (i, p) in probs.iter().enumerate() {
            if rng.bernoulli(*p) {
                mask |= 1 << i;
            }
        }
        self.queries.bump();
        Ok(Sample { payload: Payload::Bits(mask), birth_point: x.to_vec() })
    }

    /// The stochastic value is `f` at the drawn subset; it does not depend
    /// on `x` at all.
    fn value(&self, _x: &[f64], z: &Sample) -> f64 {
        self.f.value(z.payload.bits())
    }

    fn grad(&self, x: &[f64], _z: &Sample) -> Vec<f64> {
        vec![0.0; x.len()]
    }

    fn hess_vec(&self, x: &[f64], _z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), u.len())?;
        Ok(vec![0.0; x.len()])
    }

    fn logp_grad(&self, x: &[f64], z: &Sample) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), x.len())?;
        let probs = self.smooth_all(x)?;
        let mask = z.payload.bits();
        Ok((0..self.dim()).map(|i| self.score(&probs, mask, i)).collect())
    }

    fn logp_hess_vec(&self, x: &[f64], z: &Sample, u: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), u.len())?;
        let probs = self.smooth_all(x)?;
        let mask = z.payload.bits();
        let slope2 = (1.0 - 2.0 * self.xi).powi(2);
        // The log density separates over coordinates, so its Hessian is
        // diagonal.
        Ok((0..self.dim())
            .map(|i| {
                let h = if mask & (1 << i) != 0 {
                    -slope2 / (probs[i] * probs[i])
                } else {
                    -slope2 / ((1.0 - probs[i]) * (1.0 - probs[i]))
                };
                h * u[i]
            })
            .collect())
    }

    fn exact_value(&self, x: &[f64]) -> Result<f64, OracleError> {
        check_dim(self.dim(), x.len())?;
        let probs = self.smooth_all(x)?;
        Ok((0u32..(1 << self.dim()))
            .map(|mask| Self::outcome_prob(&probs, mask) * self.f.value(mask))
            .sum())
    }

    fn exact_grad(&self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        check_dim(self.dim(), x.len())?;
        let probs = self.smooth_all(x)?;
        let slope = 1.0 - 2.0 * self.xi;
        let mut g = vec![0.0; self.dim()];
        for mask in 0u32..(1 << self.dim()) {
            let pf = Self::outcome_prob(&probs, mask) * self.f.value(mask);
            for i in 0..self.dim() {
                // d p / d xt_i = p * (z_i - xt_i) / (xt_i (1 - xt_i)),
                // then the chain rule through the smoothing map.
                let r = if mask & (1 << i) != 0 { 1.0 / probs[i] } else { -1.0 / (1.0 - probs[i]) };
                g[i] += slope * pf * r;
            }
        }
        Ok(g)
    }

    fn exact_hess(&self, x: &[f64]) -> Result<Matrix, OracleError> {
        check_dim(self.dim(), x.len())?;
        let probs = self.smooth_all(x)?;
        let slope2 = (1.0 - 2.0 * self.xi).powi(2);
        let mut h = Matrix::zeros(self.dim());
        for mask in 0u32..(1 << self.dim()) {
            let pf = Self::outcome_prob(&probs, mask) * self.f.value(mask);
            for i in 0..self.dim() {
                let ri =
                    if mask & (1 << i) != 0 { 1.0 / probs[i] } else { -1.0 / (1.0 - probs[i]) };
                for (j, pj) in probs.iter().enumerate() {
                    if i == j {
                        // The density is multilinear in the probabilities,
                        // so pure second derivatives vanish.
                        continue;
                    }
                    let rj = if mask & (1 << j) != 0 { 1.0 / pj } else { -1.0 / (1.0 - pj) };
                    h.set(i, j, h.get(i, j) + slope2 * pf * ri * rj);
                }
            }
        }
        Ok(h)
    }

    fn outcomes(&self, x: &[f64]) -> Option<Vec<(f64, Sample)>> {
        let probs = self.smooth_all(x).ok()?;
        Some(
            (0u32..(1 << self.dim()))
                .map(|mask| {
                    (
                        Self::outcome_prob(&probs, mask),
                        Sample { payload: Payload::Bits(mask), birth_point: x.to_vec() },
                    )
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::oracles::test_support::assert_grad_consistent;

    fn single_item() -> SmoothedMultilinear {
        // f(empty) = 0, f({1}) = 1.
        let f = SetFunction::from_table(1, vec![0.0, 1.0]).unwrap();
        SmoothedMultilinear::new(f, 0.25).unwrap()
    }

    #[test]
    fn single_item_exact_value_is_affine() {
        let o = single_item();
        // E f(z) = P(z = 1) = 0.25 + 0.5 x.
        assert!((o.exact_value(&[0.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((o.exact_value(&[0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!((o.exact_value(&[1.0]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn score_formula_hand_value() {
        // xi = 0.25, x = 0.5 gives xt = 0.5; included item has score
        // (1 - 2 xi) / xt = 0.5 / 0.5 = 1.
        let o = single_item();
        let z = Sample { payload: Payload::Bits(1), birth_point: vec![0.5] };
        let s = o.logp_grad(&[0.5], &z).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn score_identity_zero_mean() {
        for seed in 0..5 {
            let f = SetFunction::generate_coverage(4, seed).unwrap();
            let o = SmoothedMultilinear::new(f, 0.25).unwrap();
            let mut rng = Rng::seed_from_u64(seed + 50);
            let x: Vec<f64> = (0..4).map(|_| rng.uniform()).collect();
            let mut total = vec![0.0; 4];
            for (p, z) in o.outcomes(&x).unwrap() {
                linalg::axpy(&mut total, p, &o.logp_grad(&x, &z).unwrap());
            }
            assert!(linalg::norm(&total) < 1e-12, "score mean {total:?}");
        }
    }

    #[test]
    fn stochastic_value_carries_no_gradient() {
        // The stochastic function is f at the drawn subset; every bit of
        // first/second-order structure lives in the log density.
        let f = SetFunction::generate_coverage(3, 2).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        let mut rng = Rng::seed_from_u64(4);
        let x = vec![0.2, 0.5, 0.9];
        let z = o.sample(&x, &mut rng).unwrap();
        assert_eq!(o.grad(&x, &z), vec![0.0; 3]);
        assert_eq!(o.hess_vec(&x, &z, &[1.0, -2.0, 0.5]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn bernoulli_sampling_frequencies() {
        let f = SetFunction::generate_coverage(3, 1).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        let x = vec![0.0, 0.5, 1.0];
        // xt = (0.25, 0.5, 0.75).
        let mut rng = Rng::seed_from_u64(77);
        let reps = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..reps {
            let z = o.sample(&x, &mut rng).unwrap();
            for (i, c) in counts.iter_mut().enumerate() {
                if z.payload.bits() & (1 << i) != 0 {
                    *c += 1;
                }
            }
        }
        let freqs: Vec<f64> = counts.iter().map(|c| *c as f64 / reps as f64).collect();
        for (freq, want) in freqs.iter().zip([0.25, 0.5, 0.75]) {
            assert!((freq - want).abs() < 0.005, "freq {freq} vs {want}");
        }
    }

    #[test]
    fn sampling_rejects_points_outside_cube() {
        let o = single_item();
        let mut rng = Rng::seed_from_u64(1);
        assert!(matches!(
            o.sample(&[1.5], &mut rng),
            Err(OracleError::InfeasiblePoint)
        ));
    }

    #[test]
    fn exact_grad_matches_finite_differences() {
        let f = SetFunction::generate_budget_additive(4, 6).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        assert_grad_consistent(&o, &[0.2, 0.7, 0.4, 0.9]);
    }

    #[test]
    fn exact_hess_matches_finite_differences() {
        use crate::oracles::test_support::assert_hess_consistent;
        let f = SetFunction::generate_coverage(3, 12).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        assert_hess_consistent(&o, &[0.3, 0.6, 0.8]);
        // Two items: the mixed-partial table from enumerating the four
        // outcomes, cross-checked numerically.
        let f2 = SetFunction::generate_coverage(2, 13).unwrap();
        let o2 = SmoothedMultilinear::new(f2, 0.25).unwrap();
        assert_hess_consistent(&o2, &[0.4, 0.7]);
        let h = o2.exact_hess(&[0.4, 0.7]).unwrap();
        assert_eq!(h.get(0, 0), 0.0);
        assert_eq!(h.get(1, 1), 0.0);
        assert!((h.get(0, 1) - h.get(1, 0)).abs() < 1e-15);
    }

    #[test]
    fn generated_functions_monotone_submodular() {
        for seed in 0..8 {
            let cov = SetFunction::generate_coverage(5, seed).unwrap();
            assert!(cov.is_monotone() && cov.is_submodular(), "coverage seed {seed}");
            let ba = SetFunction::generate_budget_additive(5, seed).unwrap();
            assert!(ba.is_monotone() && ba.is_submodular(), "budget-additive seed {seed}");
        }
    }

    #[test]
    fn diminishing_returns_of_smoothed_extension() {
        // On a 5-point grid per coordinate: x <= y implies each partial
        // derivative at x dominates the one at y.
        let f = SetFunction::generate_coverage(3, 3).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let mut points: Vec<Vec<f64>> = Vec::new();
        for a in grid {
            for b in grid {
                for c in grid {
                    points.push(vec![a, b, c]);
                }
            }
        }
        for x in &points {
            let gx = o.exact_grad(x).unwrap();
            for y in &points {
                if x.iter().zip(y).all(|(a, b)| a <= b) {
                    let gy = o.exact_grad(y).unwrap();
                    for (a, b) in gx.iter().zip(&gy) {
                        assert!(*a >= b - 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn discrete_reference_respects_feasibility() {
        let f = SetFunction::budget_additive(vec![1.0, 1.0, 1.0], 10.0).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        let set = ConstraintSet::budgeted_box(vec![1.0, 1.0, 1.0], 2.0).unwrap();
        let (best, point) = o.discrete_reference(&set).unwrap();
        assert!((best - 2.0).abs() < 1e-12);
        assert!(set.contains(&point, 1e-9));
    }
}
