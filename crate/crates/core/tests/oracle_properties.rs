//! Certificate checks for the problem zoo: the constants each instance
//! declares really do bound its stochastic values, gradients, and Hessians,
//! uniformly over random probes.

use sfw_core::diagnostics::spectral_norm;
use sfw_core::linalg;
use sfw_core::oracles::{
    ConcaveNqp, FiniteSumLogistic, NonconvexSigmoidSum, ObliviousQuadratic, SetFunction,
    SmoothedMultilinear, StochasticOracle,
};
use sfw_core::rng::Rng;

/// Draws a probe point inside the domain the instance certified its
/// constants for.
enum Domain {
    Ball(f64),
    UnitCube,
}

impl Domain {
    fn draw(&self, dim: usize, rng: &mut Rng) -> Vec<f64> {
        match self {
            Domain::Ball(r) => {
                let mut x: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
                let n = linalg::norm(&x).max(1e-12);
                let radius = r * rng.uniform().powf(1.0 / dim as f64);
                for v in &mut x {
                    *v *= radius / n;
                }
                x
            }
            Domain::UnitCube => (0..dim).map(|_| rng.uniform()).collect(),
        }
    }
}

fn certify<O: StochasticOracle>(label: &str, oracle: &O, domain: Domain, probes: usize) {
    let c = oracle.constants();
    let dim = oracle.dim();
    let mut rng = Rng::seed_from_u64(0xCE27);
    let mut worst_value = 0.0_f64;
    let mut worst_grad = 0.0_f64;
    let mut worst_hess = 0.0_f64;
    for k in 0..probes {
        let x = domain.draw(dim, &mut rng);
        let z = oracle.sample(&x, &mut rng).unwrap();
        worst_value = worst_value.max(oracle.value(&x, &z).abs());
        worst_grad = worst_grad.max(linalg::norm(&oracle.grad(&x, &z)));
        // Spectral norm of the stochastic Hessian by power iteration.
        if oracle.caps().has_exact_hessian {
            let iters = if k % 10 == 0 { 40 } else { 12 };
            let est = spectral_norm(
                |v| oracle.hess_vec(&x, &z, v).unwrap(),
                dim,
                iters,
                &mut rng,
            );
            worst_hess = worst_hess.max(est);
        }
    }
    assert!(worst_value <= c.b + 1e-9, "{label}: |value| {worst_value} > B {}", c.b);
    assert!(worst_grad <= c.grad_f + 1e-9, "{label}: ||grad|| {worst_grad} > G_F {}", c.grad_f);
    assert!(
        worst_hess <= c.lip_f + 1e-9,
        "{label}: ||hess|| {worst_hess} > L_F {}",
        c.lip_f
    );
}

#[test]
fn quadratic_constants_are_certificates() {
    let o = ObliviousQuadratic::generate(10, 0.5, 2.0, 1.0, 1.0, 7).unwrap();
    certify("oblivious_quadratic", &o, Domain::Ball(1.0), 100_000);
}

#[test]
fn logistic_constants_are_certificates() {
    let o = FiniteSumLogistic::generate(30, 8, 2.0, 1.0, 11).unwrap();
    certify("finite_sum_logistic", &o, Domain::Ball(1.0), 100_000);
}

#[test]
fn sigmoid_sum_constants_are_certificates() {
    let o = NonconvexSigmoidSum::generate(30, 8, 3.0, 13).unwrap();
    certify("nonconvex_sigmoid_sum", &o, Domain::Ball(1.0), 100_000);
}

#[test]
fn nqp_constants_are_certificates() {
    let o = ConcaveNqp::generate(4, 0.1, 17).unwrap();
    certify("concave_nqp", &o, Domain::UnitCube, 100_000);
}

#[test]
fn multilinear_constants_are_certificates() {
    let f = SetFunction::generate_coverage(6, 19).unwrap();
    let o = SmoothedMultilinear::new(f, 0.25).unwrap();
    certify("smoothed_multilinear", &o, Domain::UnitCube, 100_000);
}

/// The smoothed multilinear instance also certifies its score bounds:
/// the score norm bound `G_p` and score-Hessian bound `L_p` hold uniformly.
#[test]
fn multilinear_score_bounds() {
    let f = SetFunction::generate_coverage(6, 23).unwrap();
    let o = SmoothedMultilinear::new(f, 0.25).unwrap();
    let c = o.constants();
    let mut rng = Rng::seed_from_u64(29);
    for _ in 0..20_000 {
        let x: Vec<f64> = (0..6).map(|_| rng.uniform()).collect();
        let z = o.sample(&x, &mut rng).unwrap();
        let s = o.logp_grad(&x, &z).unwrap();
        assert!(linalg::norm(&s) <= c.grad_p + 1e-9);
        let h = spectral_norm(|v| o.logp_hess_vec(&x, &z, v).unwrap(), 6, 12, &mut rng);
        assert!(h <= c.lip_p + 1e-9);
    }
}

/// Score identity: the expected score is exactly zero (enumerated).
#[test]
fn score_identity_up_to_dim_ten() {
    for dim in [4usize, 8, 10] {
        let f = SetFunction::generate_coverage(dim, dim as u64).unwrap();
        let o = SmoothedMultilinear::new(f, 0.25).unwrap();
        let mut rng = Rng::seed_from_u64(31);
        for _ in 0..5 {
            let x: Vec<f64> = (0..dim).map(|_| rng.uniform()).collect();
            let mut total = vec![0.0; dim];
            for (p, z) in o.outcomes(&x).unwrap() {
                linalg::axpy(&mut total, p, &o.logp_grad(&x, &z).unwrap());
            }
            assert!(
                total.iter().all(|t| t.abs() <= 1e-10),
                "score mean {total:?} at dim {dim}"
            );
        }
    }
}
