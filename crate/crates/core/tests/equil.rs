mod common;

use cassini_core::equil::{solve_cassini, taylor_expand, to_action_angle, untangle, Quadratic};
use cassini_core::model::{assemble_hamiltonian, BodyParams};
use cassini_core::{TrigKind, TruncationPolicy};
use common::{rel, titan_reduction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn cassini_point_has_vanishing_finite_difference_gradient() {
    let t = TruncationPolicy::uniform(6, 8).unwrap();
    let h = assemble_hamiltonian(&BodyParams::titan(), &t).unwrap();
    let eq = solve_cassini(&h).unwrap();
    assert!(eq.gradient_residual <= 1e-12);
    let d = 1e-7;
    let (s1, s3) = (eq.sigma1_star, eq.sigma3_star);
    let g1 = (h.evaluate(s1 + d, s3, 0.0, 0.0) - h.evaluate(s1 - d, s3, 0.0, 0.0)) / (2.0 * d);
    let g3 = (h.evaluate(s1, s3 + d, 0.0, 0.0) - h.evaluate(s1, s3 - d, 0.0, 0.0)) / (2.0 * d);
    assert!(g1.abs() <= 1e-6 && g3.abs() <= 1e-6, "gradient ({g1:e}, {g3:e})");
    assert!((eq.k_star.cos() - (1.0 - s3 / s1)).abs() < 1e-15);
}

#[test]
fn taylor_polynomial_matches_direct_evaluation() {
    let t = TruncationPolicy::uniform(12, 8).unwrap();
    let h = assemble_hamiltonian(&BodyParams::titan(), &t).unwrap();
    let eq = solve_cassini(&h).unwrap();
    let q = taylor_expand(&h, &eq, &t).unwrap();
    let h_eq = h.evaluate(eq.sigma1_star, eq.sigma3_star, 0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        // ΔΣ₃ stays well inside the √Σ₃ convergence radius Σ₃*
        let x = [
            rng.gen_range(-1e-3..1e-3),
            rng.gen_range(-0.3..0.3) * eq.sigma3_star,
            rng.gen_range(-0.1..0.1),
            rng.gen_range(-0.1..0.1),
        ];
        let direct = h.evaluate(eq.sigma1_star + x[0], eq.sigma3_star + x[1], x[2], x[3]) - h_eq;
        let poly = q.evaluate(x);
        assert!((direct - poly).abs() < 1e-11, "at {x:?}: {direct:e} vs {poly:e}");
    }
}

#[test]
fn appendix_quadratic_coefficients_give_frequencies_and_scales() {
    // diagonal coefficients as printed; independent of the pipeline
    let (s1, s3, a1, a3): (f64, f64, f64, f64) = (7.20e1, 2.01e2, 2.52e-2, 7.00e-7);
    let omega = [2.0 * (s1 * a1).sqrt(), 2.0 * (s3 * a3).sqrt()];
    let u_star = [(s1 / a1).sqrt(), (s3 / a3).sqrt()];
    assert!(rel(omega[0], 2.690) < 5e-3 && rel(omega[1], 2.375e-2) < 5e-3, "{omega:?}");
    assert!(rel(u_star[0], 5.348e1) < 5e-3 && rel(u_star[1], 1.696e4) < 5e-3, "{u_star:?}");
}

#[test]
fn pipeline_linearization_obeys_its_formulas() {
    let red = titan_reduction(6);
    let d = Quadratic::of(&red.untangled.poly);
    let lin = red.linearization;
    for j in 0..2 {
        let (ms, ma) = (d.actions[2 * j], d.angles[2 * j]);
        assert!(ms * ma > 0.0);
        assert!(rel(lin.omega[j], 2.0 * (ms * ma).sqrt()) < 1e-15);
        assert!(rel(lin.u_star[j], (ms / ma).sqrt()) < 1e-15);
    }
    assert_eq!(d.actions[1], 0.0);
    assert_eq!(d.angles[1], 0.0);
    assert!(red.untangled.mixed_residual <= 1e-14);
}

#[test]
fn untangling_an_untangled_polynomial_is_trivial() {
    let red = titan_reduction(6);
    let again = untangle(&red.untangled.poly).unwrap();
    assert_eq!((again.alpha, again.beta), (0.0, 0.0));
    assert_eq!(again.poly, red.untangled.poly);
}

#[test]
fn h0_has_dalembert_parity_and_partitions_by_degree() {
    let red = titan_reduction(10);
    assert!(red.h0.iter().all(|t| t.key.is_dalembert()), "non-d'Alembert term in H0");
    let mut sum = cassini_core::PoissonSeries::zero(red.h0.trunc());
    for s in 0..=10 {
        sum = sum.add(&red.h0.homogeneous_part(s));
    }
    assert_eq!(sum, red.h0);
    assert_eq!(red.h0.homogeneous_part(2).len(), 2);
    assert_eq!(red.h0.homogeneous_part(3).len(), 10);
    assert!(red.h0.homogeneous_part(0).is_empty() && red.h0.homogeneous_part(1).is_empty());
}

#[test]
fn h0_quadratic_block_is_omega_dot_u() {
    let red = titan_reduction(4);
    let lin = red.linearization;
    let w1 = red.h0.coeff(2, 0, TrigKind::Cos, 0, 0);
    let w3 = red.h0.coeff(0, 2, TrigKind::Cos, 0, 0);
    assert!(rel(w1, lin.omega[0]) < 1e-13 && rel(w3, lin.omega[1]) < 1e-13, "{w1} {w3} vs {:?}", lin.omega);
}

#[test]
fn action_angle_rejects_hyperbolic_input() {
    let red = titan_reduction(4);
    let mut q = red.untangled.poly.clone();
    let c = q.get([0, 0, 2, 0]);
    q.add([0, 0, 2, 0], -2.0 * c);
    assert!(to_action_angle(&q).is_err());
}
