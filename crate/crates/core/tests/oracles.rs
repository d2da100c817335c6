//! Independent oracles: dense finite-difference eigensolves, closed-form
//! Fourier coefficients, the two-unknown reduction for `n = s = 1`, and
//! exact continued fractions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use mtbvp::denominator::{continued_fraction, continued_fraction_rational, continued_fraction_sqrt};
use mtbvp::eigen::{eigenpairs_for, model_eigenpairs, numeric_eigenpairs};
use mtbvp::modal::{assemble, solve_modal};
use mtbvp::problem::{AOverPi, BoundaryFn, ProblemSpec, Ratio};
use mtbvp::series::{solve_problem, SolveOptions};
use mtbvp::verify::{boundary_check, oracle_compare, reduced_determinant};

/// Lowest eigenvalues of `-u'' + p0 u`, `u(0) = u(pi) = 0`, second-order
/// differences on `m` interior nodes.
fn fd_eigenvalues(p0: impl Fn(f64) -> f64, m: usize, count: usize) -> Vec<f64> {
    let h = PI / (m + 1) as f64;
    let mat = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            2.0 / (h * h) + p0((i + 1) as f64 * h)
        } else if i.abs_diff(j) == 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(mat).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    ev
}

/// Two-level Richardson extrapolation of an `O(h^2)` sequence.
fn richardson(p0: impl Fn(f64) -> f64 + Copy, count: usize) -> Vec<f64> {
    let coarse = fd_eigenvalues(p0, 199, count);
    let mid = fd_eigenvalues(p0, 399, count);
    let fine = fd_eigenvalues(p0, 799, count);
    (0..count)
        .map(|k| {
            let r1 = (4.0 * mid[k] - coarse[k]) / 3.0;
            let r2 = (4.0 * fine[k] - mid[k]) / 3.0;
            (16.0 * r2 - r1) / 15.0
        })
        .collect()
}

#[test]
fn sin_squared_potential_matches_fd_richardson() {
    let p0 = |x: f64| 1.0 + x.sin().powi(2);
    let oracle = richardson(p0, 3);
    let basis = eigenpairs_for(1, &BoundaryFn::parse("1 + sin(x)^2").unwrap(), 8).unwrap();
    for (pair, expect) in basis.pairs.iter().zip(&oracle) {
        let rel = (pair.lambda - expect).abs() / expect;
        assert!(rel < 1e-7, "k={} galerkin {} oracle {expect}", pair.k, pair.lambda);
    }
}

#[test]
fn constant_potential_shifts_the_spectrum() {
    for c in [0.5, 3.0] {
        let basis = numeric_eigenpairs(2, &BoundaryFn::parse(&c.to_string()).unwrap(), 10, 80).unwrap();
        for p in &basis.pairs {
            let exact = (p.k as f64).powi(4) + c;
            assert!((p.lambda - exact).abs() / exact < 1e-10);
        }
        assert!(basis.orthonormality_error() < 1e-10);
    }
}

#[test]
fn parabola_coefficients() {
    let basis = model_eigenpairs(1, 30);
    let coefs = basis.expand(&BoundaryFn::parse("x*(pi - x)").unwrap());
    let norm = (2.0 / PI).sqrt();
    for (i, c) in coefs.iter().enumerate() {
        let k = (i + 1) as f64;
        let exact = if (i + 1) % 2 == 1 { 4.0 * norm / k.powi(3) } else { 0.0 };
        assert!((c - exact).abs() < 1e-10, "k={k}: {c} vs {exact}");
    }
}

#[test]
fn parabola_boundary_error_is_bounded_by_the_tail() {
    let spec = ProblemSpec::new(1, 1, AOverPi::parse("1").unwrap()).with_phi(0, BoundaryFn::parse("x*(pi - x)").unwrap());
    let k_max = 50;
    let field = solve_problem(&spec, &SolveOptions::with_k(k_max)).unwrap();
    let tail: f64 = (k_max + 1..200_000)
        .filter(|k| k % 2 == 1)
        .map(|k| 8.0 / (PI * (k as f64).powi(3)))
        .sum();
    let errors = boundary_check(&field, 401, 11);
    let lower = errors.iter().find(|e| e.side == "lower").unwrap();
    assert!(lower.error <= tail * 1.01 + 1e-12, "{} vs tail {tail}", lower.error);
    assert!(lower.error > 0.1 * tail);
    assert!(field.smoothness.status_of("phi[0]", "l(f)^(0)") == Some(mtbvp::series::Status::Fail));
}

#[test]
fn lb_scaled_determinant_first_mode() {
    let spec = ProblemSpec::new(1, 1, AOverPi::parse("1").unwrap());
    let basis = model_eigenpairs(1, 1);
    let sys = assemble(&spec, &basis.pairs[0], &[0.0], &[0.0]);
    let expect = -(1.0 - (-2.0 * PI).exp());
    assert!((sys.det_scaled - expect).abs() < 1e-12, "{}", sys.det_scaled);
    assert!((reduced_determinant(1.0, PI, 0, 0) - expect).abs() < 1e-12);
}

#[test]
fn lb_profiles_follow_the_reduction_for_other_orders() {
    for (q, chi, a) in [(1, 0, "1"), (0, 1, "1/3"), (1, 1, "2/5")] {
        let spec = ProblemSpec::new(1, 1, AOverPi::parse(a).unwrap())
            .with_orders(1, q, 1, chi)
            .with_phi(0, BoundaryFn::parse("sin(x) - 0.2*sin(4*x)").unwrap())
            .with_psi(0, BoundaryFn::parse("0.5*sin(3*x)").unwrap());
        let field = solve_problem(&spec, &SolveOptions::with_k(6)).unwrap();
        let cmp = oracle_compare(&field, 41, 41).unwrap();
        assert!(cmp.max_deviation < 1e-9, "q={q} chi={chi}: {}", cmp.max_deviation);
        assert!(cmp.ratio_spread < 1e-8);
    }
}

#[test]
fn lb_with_potential_follows_the_reduction() {
    let spec = ProblemSpec::new(1, 1, AOverPi::parse("1").unwrap())
        .with_p0(BoundaryFn::parse("1 + sin(x)^2").unwrap())
        .with_phi(0, BoundaryFn::parse("sin(x)*exp(cos(x))").unwrap());
    let field = solve_problem(&spec, &SolveOptions::with_k(12)).unwrap();
    let cmp = oracle_compare(&field, 41, 41).unwrap();
    assert!(cmp.max_deviation < 1e-9, "{}", cmp.max_deviation);
}

#[test]
fn profile_bound_constant_is_uniform_in_k() {
    let spec = ProblemSpec::new(1, 1, AOverPi::parse("1").unwrap());
    let basis = model_eigenpairs(1, 100);
    let consts: Vec<f64> = basis
        .pairs
        .iter()
        .map(|p| {
            let sys = assemble(&spec, p, &[1.0], &[1.0]);
            let sol = solve_modal(&sys, 1e-10).unwrap();
            sol.coefficient_mass() * sys.det_scaled.abs() / 2.0
        })
        .collect();
    let max = consts.iter().cloned().fold(0.0, f64::max);
    let min = consts.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 4.0, "{min} .. {max}");
}

#[test]
fn euclid_and_periodic_fractions() {
    assert_eq!(continued_fraction_rational(Ratio::new(3, 7).unwrap()).quotients, vec![0, 2, 3]);
    assert_eq!(continued_fraction(3.0 / 7.0, 10).quotients, vec![0, 2, 3]);
    let s2 = continued_fraction_sqrt(2, 8);
    assert_eq!(s2.quotients, vec![1, 2, 2, 2, 2, 2, 2, 2]);
    assert_eq!(s2.period, Some(1));
    let (p, q) = s2.convergents[7];
    assert!(((p as f64 / q as f64) - 2f64.sqrt()).abs() < 1.0 / (q * q) as f64);
    let golden = continued_fraction((1.0 + 5f64.sqrt()) / 2.0, 12);
    assert!(golden.quotients.iter().all(|&a| a == 1));
    let near = continued_fraction(PI, 6);
    assert_eq!(&near.quotients[..5], &[3, 7, 15, 1, 292]);
}
