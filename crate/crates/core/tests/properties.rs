use std::f64::consts::PI;

use proptest::prelude::*;

use mtbvp::denominator::{classify_phase, residue_floor_bruteforce, separation_check, Phase, Verdict};
use mtbvp::problem::{AOverPi, BoundaryFn, ProblemSpec, Ratio};
use mtbvp::series::{solve_problem, SolveOptions};

fn field_at(spec: &ProblemSpec, k: usize, pts: &[(f64, f64)]) -> Vec<f64> {
    let f = solve_problem(spec, &SolveOptions::with_k(k)).unwrap();
    pts.iter().map(|&(x, y)| f.evaluate(x, y, 0, 0).unwrap()).collect()
}

fn sample_points(a: f64) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..=6 {
        for j in 0..=6 {
            pts.push((PI * i as f64 / 6.0, -a + 2.0 * a * j as f64 / 6.0));
        }
    }
    pts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn superposition(alpha in -2.0f64..2.0, beta in -2.0f64..2.0, den in 1u64..5) {
        let a = AOverPi::Rational(Ratio::new(1, 2 * den - 1).unwrap());
        let base = ProblemSpec::new(1, 1, a);
        let pts = sample_points(base.a);
        let make = |p: &str, q: &str| base.clone()
            .with_phi(0, BoundaryFn::parse(p).unwrap())
            .with_psi(0, BoundaryFn::parse(q).unwrap());
        let u1 = field_at(&make("sin(x)", "0"), 4, &pts);
        let u2 = field_at(&make("0", "sin(3*x)"), 4, &pts);
        let both = field_at(&make(&format!("{alpha}*sin(x)"), &format!("{beta}*sin(3*x)")), 4, &pts);
        for i in 0..pts.len() {
            prop_assert!((both[i] - alpha * u1[i] - beta * u2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_the_data_scales_the_field(c in 0.1f64..10.0) {
        let spec = ProblemSpec::new(2, 2, AOverPi::parse("1").unwrap())
            .with_orders(1, 1, 1, 0)
            .with_phi(0, BoundaryFn::parse("sin(x) + 0.2*sin(2*x)").unwrap())
            .with_psi(1, BoundaryFn::parse("sin(3*x)").unwrap());
        let pts = sample_points(spec.a);
        let u = field_at(&spec, 4, &pts);
        let v = field_at(&spec.scaled_data(c), 4, &pts);
        for i in 0..pts.len() {
            prop_assert!((v[i] - c * u[i]).abs() <= 1e-10 * (1.0 + c * u[i].abs()));
        }
    }

    #[test]
    fn validation_is_deterministic(s in 0usize..7, n in 0usize..4, gamma in 0u32..4, delta in 0u32..4, q in 0usize..5, chi in 0usize..5) {
        let spec = ProblemSpec::new(s, n, AOverPi::parse("1").unwrap()).with_orders(gamma, q, delta, chi);
        let first = spec.validate();
        prop_assert_eq!(&first, &spec.validate());
        prop_assert_eq!(first.has("b_integer"), s > 0 && n > 0 && s % n != 0);
        prop_assert_eq!(first.has("gamma_delta_equal"), gamma != delta);
    }

    #[test]
    fn separation_matches_enumeration(num in 1u64..40, den in 1u64..40, phase_idx in 0usize..4) {
        let Some(r) = Ratio::new(num, den) else { return Ok(()); };
        let rows = [(4, 1, 0), (2, 1, 0), (4, 1, 1), (2, 1, 1)];
        let (two_n, gamma, q) = rows[phase_idx];
        let phase = classify_phase(two_n, gamma, q).unwrap();
        let sep = separation_check(&AOverPi::Rational(r), &phase).unwrap();
        let brute = residue_floor_bruteforce(r, 1, phase.phase);
        let with_zero = sep.residue_floor.min(phase.phase.value().sin().abs());
        prop_assert!((brute - with_zero).abs() < 1e-12, "brute {} vs {}", brute, with_zero);
        let vanishes = brute < 1e-12;
        prop_assert_eq!(sep.verdict == Verdict::NotGuaranteed, vanishes);
        if phase.phase == Phase::Zero {
            prop_assert_eq!(sep.verdict, Verdict::NotGuaranteed);
        }
    }

    #[test]
    fn half_turns_are_exact_for_rationals(num in 1u64..50, den in 1u64..50, k in 1u64..5000) {
        let Some(r) = Ratio::new(num, den) else { return Ok(()); };
        let a = AOverPi::Rational(r);
        let expect = ((k as u128 * r.num as u128) % (2 * r.den as u128)) as f64 / r.den as f64;
        prop_assert!((a.half_turns(k as f64) - expect).abs() < 1e-12);
    }
}
