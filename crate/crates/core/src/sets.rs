//! Compact convex constraint sets with exact linear optimization oracles.
//!
//! Frank-Wolfe style solvers touch the feasible region only through a linear
//! minimization (or maximization) oracle, so each set here carries an exact,
//! deterministic LMO plus closed-form (or vertex-enumerated) diameter and
//! radius. Ties in the LMO are broken toward the lowest coordinate index,
//! which pins the whole solver trajectory bit for bit.

use crate::linalg::{self, dot};
use crate::rng::Rng;
use thiserror::Error;

/// Optimization sense for [`ConstraintSet::lmo`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Error)]
pub enum SetError {
    #[error("dimension must be positive")]
    EmptyDimension,
    #[error("{name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("lower bound exceeds upper bound at coordinate {index}")]
    BoundsMismatch { index: usize },
    #[error("budget {budget} outside (0, sum of upper bounds = {max}]")]
    BadBudget { budget: f64, max: f64 },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("direction contains non-finite entries")]
    NonFiniteDirection,
}

/// The feasible-region shapes supported by the solvers.
#[derive(Clone, Debug)]
pub enum SetKind {
    /// `{ x >= 0, sum(x) = scale }`.
    UnitSimplex { scale: f64 },
    /// `{ ||x||_1 <= radius }`.
    L1Ball { radius: f64 },
    /// `{ ||x||_2 <= radius }`.
    L2Ball { radius: f64 },
    /// `{ lower <= x <= upper }` componentwise.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{ 0 <= x <= upper, sum(x) <= budget }`.
    BudgetedBox { upper: Vec<f64>, budget: f64 },
}

/// A compact convex feasible region with its LMO and size data.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    kind: SetKind,
    dim: usize,
    diameter: f64,
    diameter_is_upper_bound: bool,
    radius: f64,
}

/// Vertex-pair enumeration for the budgeted box is exact up to this
/// dimension; above it a closed-form upper bound is reported instead.
pub const BUDGETED_BOX_EXACT_DIM: usize = 12;

impl ConstraintSet {
    pub fn unit_simplex(dim: usize, scale: f64) -> Result<Self, SetError> {
        if dim == 0 {
            return Err(SetError::EmptyDimension);
        }
        if !(scale > 0.0) {
            return Err(SetError::NonPositiveParameter { name: "scale", value: scale });
        }
        let diameter = if dim >= 2 { scale * 2.0_f64.sqrt() } else { 0.0 };
        Ok(Self {
            kind: SetKind::UnitSimplex { scale },
            dim,
            diameter,
            diameter_is_upper_bound: false,
            radius: scale,
        })
    }

    pub fn l1_ball(dim: usize, radius: f64) -> Result<Self, SetError> {
        if dim == 0 {
            return Err(SetError::EmptyDimension);
        }
        if !(radius > 0.0) {
            return Err(SetError::NonPositiveParameter { name: "radius", value: radius });
        }
        Ok(Self {
            kind: SetKind::L1Ball { radius },
            dim,
            diameter: 2.0 * radius,
            diameter_is_upper_bound: false,
            radius,
        })
    }

    pub fn l2_ball(dim: usize, radius: f64) -> Result<Self, SetError> {
        if dim == 0 {
            return Err(SetError::EmptyDimension);
        }
        if !(radius > 0.0) {
            return Err(SetError::NonPositiveParameter { name: "radius", value: radius });
        }
        Ok(Self {
            kind: SetKind::L2Ball { radius },
            dim,
            diameter: 2.0 * radius,
            diameter_is_upper_bound: false,
            radius,
        })
    }

    pub fn hyper_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SetError> {
        if lower.is_empty() {
            return Err(SetError::EmptyDimension);
        }
        if lower.len() != upper.len() {
            return Err(SetError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l > u {
                return Err(SetError::BoundsMismatch { index: i });
            }
        }
        let dim = lower.len();
        let diameter = linalg::norm(&linalg::sub(&upper, &lower));
        let radius = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| l.abs().max(u.abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            kind: SetKind::Box { lower, upper },
            dim,
            diameter,
            diameter_is_upper_bound: false,
            radius,
        })
    }

    pub fn budgeted_box(upper: Vec<f64>, budget: f64) -> Result<Self, SetError> {
        if upper.is_empty() {
            return Err(SetError::EmptyDimension);
        }
        for (i, u) in upper.iter().enumerate() {
            if *u < 0.0 {
                return Err(SetError::BoundsMismatch { index: i });
            }
        }
        let total: f64 = upper.iter().sum();
        if !(budget > 0.0) || budget > total {
            return Err(SetError::BadBudget { budget, max: total });
        }
        let dim = upper.len();
        let (diameter, radius, exact) = if dim <= BUDGETED_BOX_EXACT_DIM {
            let verts = budgeted_box_vertices(&upper, budget);
            let mut best_d2 = 0.0_f64;
            let mut best_r2 = 0.0_f64;
            for (i, v) in verts.iter().enumerate() {
                best_r2 = best_r2.max(dot(v, v));
                for w in verts.iter().skip(i + 1) {
                    let d2: f64 = v.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
                    best_d2 = best_d2.max(d2);
                }
            }
            (best_d2.sqrt(), best_r2.sqrt(), true)
        } else {
            // x <= min(upper, budget) componentwise, so these bound R and D.
            let cap: f64 = upper.iter().map(|u| u.min(budget).powi(2)).sum::<f64>().sqrt();
            (2.0 * cap, cap, false)
        };
        Ok(Self {
            kind: SetKind::BudgetedBox { upper, budget },
            dim,
            diameter,
            diameter_is_upper_bound: !exact,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Largest distance between two feasible points. For the budgeted box in
    /// more than [`BUDGETED_BOX_EXACT_DIM`] dimensions this is an upper
    /// bound; see [`Self::diameter_is_upper_bound`].
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn diameter_is_upper_bound(&self) -> bool {
        self.diameter_is_upper_bound
    }

    /// Largest Euclidean norm of a feasible point.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Exact linear minimization/maximization oracle.
    ///
    /// Returns a vertex attaining the optimum of `<v, direction>` over the
    /// set. Maximization is literally minimization over the negated
    /// direction, so `lmo(d, Maximize) == lmo(-d, Minimize)` holds by
    /// construction. Ties go to the lowest coordinate index.
    pub fn lmo(&self, direction: &[f64], sense: Sense) -> Result<Vec<f64>, SetError> {
        if direction.len() != self.dim {
            return Err(SetError::DimensionMismatch { expected: self.dim, got: direction.len() });
        }
        if !linalg::all_finite(direction) {
            return Err(SetError::NonFiniteDirection);
        }
        match sense {
            Sense::Minimize => Ok(self.lmo_min(direction)),
            Sense::Maximize => Ok(self.lmo_min(&linalg::neg(direction))),
        }
    }

    fn lmo_min(&self, d: &[f64]) -> Vec<f64> {
        match &self.kind {
            SetKind::UnitSimplex { scale } => {
                let mut best = 0;
                for i in 1..self.dim {
                    if d[i] < d[best] {
                        best = i;
                    }
                }
                let mut v = vec![0.0; self.dim];
                v[best] = *scale;
                v
            }
            SetKind::L1Ball { radius } => {
                let mut best = 0;
                for i in 1..self.dim {
                    if d[i].abs() > d[best].abs() {
                        best = i;
                    }
                }
                let mut v = vec![0.0; self.dim];
                v[best] = if d[best] > 0.0 { -radius } else { *radius };
                v
            }
            SetKind::L2Ball { radius } => {
                let n = linalg::norm(d);
                if n == 0.0 {
                    // Every boundary point ties; pick the first axis vertex.
                    let mut v = vec![0.0; self.dim];
                    v[0] = *radius;
                    v
                } else {
                    linalg::scaled(d, -radius / n)
                }
            }
            SetKind::Box { lower, upper } => d
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(di, (l, u))| if *di > 0.0 { *l } else if *di < 0.0 { *u } else { *l })
                .collect(),
            SetKind::BudgetedBox { upper, budget } => {
                budgeted_box_greedy_max(upper, *budget, &linalg::neg(d))
            }
        }
    }

    /// Membership test within an additive tolerance on every defining
    /// inequality. A dimension mismatch is reported as infeasible.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || !linalg::all_finite(x) {
            return false;
        }
        match &self.kind {
            SetKind::UnitSimplex { scale } => {
                x.iter().all(|xi| *xi >= -tol) && (x.iter().sum::<f64>() - scale).abs() <= tol
            }
            SetKind::L1Ball { radius } => x.iter().map(|xi| xi.abs()).sum::<f64>() <= radius + tol,
            SetKind::L2Ball { radius } => linalg::norm(x) <= radius + tol,
            SetKind::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(xi, (l, u))| *xi >= l - tol && *xi <= u + tol),
            SetKind::BudgetedBox { upper, budget } => {
                x.iter().zip(upper).all(|(xi, u)| *xi >= -tol && *xi <= u + tol)
                    && x.iter().sum::<f64>() <= budget + tol
            }
        }
    }

    /// True when the origin is feasible; continuous-greedy style updates
    /// must start there.
    pub fn contains_origin(&self) -> bool {
        self.contains(&vec![0.0; self.dim], 1e-12)
    }

    /// Random feasible point built as a convex combination of `mixes` LMO
    /// vertices of Gaussian directions. Stays projection-free and feasible
    /// by convexity.
    pub fn random_point(&self, rng: &mut Rng, mixes: usize) -> Vec<f64> {
        let mixes = mixes.max(1);
        let mut weights: Vec<f64> = (0..mixes).map(|_| -(1.0 - rng.uniform()).ln()).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mut point = vec![0.0; self.dim];
        for w in weights {
            let dir: Vec<f64> = (0..self.dim).map(|_| rng.normal()).collect();
            let v = self.lmo(&dir, Sense::Minimize).expect("finite direction");
            linalg::axpy(&mut point, w, &v);
        }
        point
    }

    /// All vertices of a budgeted box (exact-dimension regime only).
    /// Intended for verification code: brute-force LP checks and diameter
    /// searches.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            SetKind::BudgetedBox { upper, budget } if self.dim <= BUDGETED_BOX_EXACT_DIM => {
                Some(budgeted_box_vertices(upper, *budget))
            }
            _ => None,
        }
    }
}

/// Greedy exact LMO for `max <v, d>` over `{0 <= v <= upper, sum v <= budget}`:
/// fill coordinates in order of decreasing positive `d_i` until the budget
/// runs out, giving the last one a fractional value.
fn budgeted_box_greedy_max(upper: &[f64], budget: f64, d: &[f64]) -> Vec<f64> {
    let dim = upper.len();
    let mut order: Vec<usize> = (0..dim).collect();
    // Descending by d, ascending index on ties.
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap().then(i.cmp(&j)));
    let mut v = vec![0.0; dim];
    let mut remaining = budget;
    for i in order {
        if d[i] <= 0.0 || remaining <= 0.0 {
            break;
        }
        let take = upper[i].min(remaining);
        v[i] = take;
        remaining -= take;
    }
    v
}

/// Enumerates the vertices of `{0 <= x <= upper, sum x <= budget}`.
///
/// A vertex saturates a subset `S` of coordinates at their upper bounds and
/// optionally spends the leftover budget on one extra coordinate; everything
/// else is zero. Exponential in the dimension, hence the
/// [`BUDGETED_BOX_EXACT_DIM`] cap.
fn budgeted_box_vertices(upper: &[f64], budget: f64) -> Vec<Vec<f64>> {
    let dim = upper.len();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for mask in 0u32..(1u32 << dim) {
        let mut base = vec![0.0; dim];
        let mut used = 0.0;
        let mut ok = true;
        for i in 0..dim {
            if mask & (1 << i) != 0 {
                base[i] = upper[i];
                used += upper[i];
                if used > budget + 1e-12 {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let leftover = budget - used;
        verts.push(base.clone());
        if leftover > 1e-12 {
            for j in 0..dim {
                if mask & (1 << j) == 0 && leftover < upper[j] - 1e-12 && upper[j] > 0.0 {
                    let mut v = base.clone();
                    v[j] = leftover;
                    verts.push(v);
                }
            }
        }
    }
    verts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    verts.dedup_by(|a, b| linalg::max_abs_diff(a, b) < 1e-12);
    verts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn simplex_lmo_picks_smallest_coordinate() {
        let k = ConstraintSet::unit_simplex(3, 1.0).unwrap();
        let v = k.lmo(&[0.5, -1.0, 0.3], Sense::Minimize).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn l2_ball_lmo_is_negative_unit_direction() {
        let k = ConstraintSet::l2_ball(2, 2.0).unwrap();
        let v = k.lmo(&[3.0, 4.0], Sense::Minimize).unwrap();
        assert_vec_close(&v, &[-1.2, -1.6], 1e-12);
    }

    #[test]
    fn box_lmo_maximize_sign_rule() {
        let k = ConstraintSet::hyper_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let v = k.lmo(&[1.0, -2.0], Sense::Maximize).unwrap();
        assert_eq!(v, vec![1.0, 0.0]);
    }

    #[test]
    fn budgeted_box_greedy_matches_vertex_lp() {
        let k = ConstraintSet::budgeted_box(vec![1.0, 1.0, 1.0], 1.5).unwrap();
        let d = [3.0, 2.0, 1.0];
        let v = k.lmo(&d, Sense::Maximize).unwrap();
        assert_vec_close(&v, &[1.0, 0.5, 0.0], 1e-12);
        // Independent check: exhaustive LP over the vertex list.
        let best = k
            .vertices()
            .unwrap()
            .into_iter()
            .max_by(|a, b| dot(a, &d).partial_cmp(&dot(b, &d)).unwrap())
            .unwrap();
        assert!((dot(&v, &d) - dot(&best, &d)).abs() <= 1e-12);
    }

    #[test]
    fn diameters_and_radii_closed_forms() {
        let simplex = ConstraintSet::unit_simplex(3, 1.0).unwrap();
        assert!((simplex.diameter() - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((simplex.radius() - 1.0).abs() < 1e-15);

        let l1 = ConstraintSet::l1_ball(4, 3.0).unwrap();
        assert_eq!(l1.diameter(), 6.0);
        assert_eq!(l1.radius(), 3.0);

        let boxed = ConstraintSet::hyper_box(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert!((boxed.diameter() - (4.0 + 4.0_f64).sqrt()).abs() < 1e-15);
        assert!((boxed.radius() - (1.0 + 4.0_f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn budgeted_box_diameter_from_vertex_pairs() {
        // Brute force over vertex pairs at dim 2 gives sqrt(2): the farthest
        // pair is (1,0) vs (0,1).
        let k = ConstraintSet::budgeted_box(vec![1.0, 1.0], 1.0).unwrap();
        assert!((k.diameter() - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(!k.diameter_is_upper_bound());
        assert!((k.radius() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budgeted_box_above_cap_reports_upper_bound() {
        let dim = BUDGETED_BOX_EXACT_DIM + 1;
        let k = ConstraintSet::budgeted_box(vec![1.0; dim], 2.0).unwrap();
        assert!(k.diameter_is_upper_bound());
        assert!(k.diameter() >= 2.0_f64.sqrt());
        assert!(k.diameter() <= 2.0 * k.radius() + 1e-12);
    }

    #[test]
    fn contains_tolerances() {
        let simplex = ConstraintSet::unit_simplex(3, 1.0).unwrap();
        assert!(simplex.contains(&[0.5, 0.5, 0.0], 1e-12));
        let l2 = ConstraintSet::l2_ball(2, 1.0).unwrap();
        assert!(!l2.contains(&[1.0 + 1e-6, 0.0], 1e-9));
        let boxed = ConstraintSet::hyper_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(boxed.contains(&[1.0 + 1e-10, 0.5], 1e-9));
    }

    #[test]
    fn lmo_rejects_bad_input() {
        let k = ConstraintSet::unit_simplex(3, 1.0).unwrap();
        assert!(matches!(
            k.lmo(&[1.0, 2.0], Sense::Minimize),
            Err(SetError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            k.lmo(&[1.0, f64::NAN, 0.0], Sense::Minimize),
            Err(SetError::NonFiniteDirection)
        ));
    }

    #[test]
    fn d_at_most_twice_r() {
        let sets = all_test_sets(4);
        for k in &sets {
            assert!(
                k.diameter() <= 2.0 * k.radius() + 1e-12,
                "D > 2R for {:?}",
                k.kind()
            );
        }
    }

    fn all_test_sets(dim: usize) -> Vec<ConstraintSet> {
        vec![
            ConstraintSet::unit_simplex(dim, 1.0).unwrap(),
            ConstraintSet::l1_ball(dim, 2.0).unwrap(),
            ConstraintSet::l2_ball(dim, 1.5).unwrap(),
            ConstraintSet::hyper_box(vec![-0.5; dim], vec![1.0; dim]).unwrap(),
            ConstraintSet::budgeted_box(vec![1.0; dim], 0.6 * dim as f64).unwrap(),
        ]
    }

    /// The LMO value must undercut every feasible point's value, for many
    /// random directions and a pool of random feasible points.
    #[test]
    fn lmo_optimality_against_random_feasible_pool() {
        let mut rng = Rng::seed_from_u64(2024);
        for k in all_test_sets(5) {
            let pool: Vec<Vec<f64>> =
                (0..1000).map(|_| k.random_point(&mut rng, 4)).collect();
            for p in &pool {
                assert!(k.contains(p, 1e-9), "random point infeasible for {:?}", k.kind());
            }
            for _ in 0..10_000 {
                let d: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
                let v = k.lmo(&d, Sense::Minimize).unwrap();
                assert!(k.contains(&v, 1e-9), "lmo vertex infeasible for {:?}", k.kind());
                let lmo_val = dot(&v, &d);
                for x in &pool {
                    assert!(
                        lmo_val <= dot(x, &d) + 1e-9,
                        "lmo suboptimal for {:?}",
                        k.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn maximize_equals_minimize_of_negation() {
        let mut rng = Rng::seed_from_u64(5);
        for k in all_test_sets(5) {
            for _ in 0..2000 {
                let d: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
                let a = k.lmo(&d, Sense::Maximize).unwrap();
                let b = k.lmo(&linalg::neg(&d), Sense::Minimize).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn lmo_positive_scaling_invariance() {
        let mut rng = Rng::seed_from_u64(6);
        for k in all_test_sets(5) {
            let polytope = !matches!(k.kind(), SetKind::L2Ball { .. });
            for _ in 0..2000 {
                let d: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
                let c = 10f64.powf(rng.uniform_in(-3.0, 3.0));
                let a = k.lmo(&d, Sense::Minimize).unwrap();
                let b = k.lmo(&linalg::scaled(&d, c), Sense::Minimize).unwrap();
                if polytope {
                    // Vertex selection is by comparisons, so positive
                    // scaling returns the identical vertex.
                    assert_eq!(a, b, "scaling by {c} changed the vertex");
                } else {
                    // The ball optimum is a continuum point; scaling only
                    // perturbs it by rounding.
                    assert!(linalg::max_abs_diff(&a, &b) < 1e-12, "scaling by {c} moved the point");
                }
            }
        }
    }

    /// Convex combinations of LMO outputs stay feasible; this is the
    /// induction that keeps solver iterates inside the set.
    #[test]
    fn convex_combinations_of_vertices_feasible() {
        let mut rng = Rng::seed_from_u64(7);
        for k in all_test_sets(6) {
            let mut x = k
                .lmo(&(0..6).map(|_| rng.normal()).collect::<Vec<_>>(), Sense::Minimize)
                .unwrap();
            for t in 1..5000u32 {
                let d: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
                let v = k.lmo(&d, Sense::Minimize).unwrap();
                let eta = 1.0 / f64::from(t + 1);
                for (xi, vi) in x.iter_mut().zip(&v) {
                    *xi += eta * (*vi - *xi);
                }
                if t % 500 == 0 {
                    assert!(k.contains(&x, 1e-9), "drifted out of {:?}", k.kind());
                }
            }
        }
    }

    #[test]
    fn dim_one_edge_cases() {
        let simplex = ConstraintSet::unit_simplex(1, 2.0).unwrap();
        assert_eq!(simplex.diameter(), 0.0);
        assert_eq!(simplex.lmo(&[5.0], Sense::Minimize).unwrap(), vec![2.0]);
        let bb = ConstraintSet::budgeted_box(vec![3.0], 1.5).unwrap();
        assert_eq!(bb.lmo(&[1.0], Sense::Maximize).unwrap(), vec![1.5]);
        assert!((bb.diameter() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn constructor_validation() {
        assert!(ConstraintSet::unit_simplex(0, 1.0).is_err());
        assert!(ConstraintSet::unit_simplex(3, 0.0).is_err());
        assert!(ConstraintSet::l1_ball(3, -1.0).is_err());
        assert!(ConstraintSet::hyper_box(vec![1.0], vec![0.0]).is_err());
        assert!(ConstraintSet::budgeted_box(vec![1.0, 1.0], 5.0).is_err());
        assert!(ConstraintSet::budgeted_box(vec![1.0, 1.0], 0.0).is_err());
    }
}
