use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_irl_core::linalg::{is_hurwitz, kron_basis, maximize_op, solve_lyapunov, IntervalMatrix, Matrix, SymMatrix};
use robust_irl_core::plant::{measure, step, MealSchedule, NoiseSpec, PatientParams, PlantState};
use robust_irl_core::sdp::{feasibility_solve, maximize_alpha, AffineLmi, Bounds, SolverOptions, VarId};

fn sym_from(n: usize, vals: &[f64]) -> SymMatrix {
    let mut it = vals.iter().copied().cycle();
    SymMatrix::from_upper(n, |_, _| it.next().unwrap())
}

fn quad(a: &Matrix, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    x.iter().zip(&ax).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn product_inequality(rows in 1usize..5, cols in 1usize..5, vals in proptest::collection::vec(-4.0f64..4.0, 50)) {
        let e = Matrix::from_fn(rows, cols, |i, j| vals[i * cols + j]);
        let f = Matrix::from_fn(rows, cols, |i, j| vals[25 + i * cols + j]);
        let lhs = &(&e * &f.transpose()) + &(&f * &e.transpose());
        let rhs = &(&e * &e.transpose()) + &(&f * &f.transpose());
        let gap = SymMatrix::from_matrix(&rhs - &lhs).unwrap();
        prop_assert!(gap.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn interval_bound_dominates(
        n in 1usize..5,
        c in proptest::collection::vec(-3.0f64..3.0, 10),
        h in proptest::collection::vec(0.0f64..2.0, 10),
        x in proptest::collection::vec(-2.0f64..2.0, 4),
        seed in any::<u64>(),
    ) {
        let center = sym_from(n, &c);
        let halfwidth = sym_from(n, &h);
        let x = &x[..n];
        let bound = maximize_op(&IntervalMatrix::new(center.clone(), halfwidth.clone()).unwrap(), x).unwrap();
        let top = bound.quad_form(x);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let a = Matrix::from_fn(n, n, |i, j| center[(i, j)] + halfwidth[(i, j)] * rng.random_range(-1.0..=1.0));
            prop_assert!(quad(&a, x) <= top + 1e-12);
        }
    }

    #[test]
    fn kron_identity(n in 1usize..5, p in proptest::collection::vec(-5.0f64..5.0, 10), x in proptest::collection::vec(-3.0f64..3.0, 4)) {
        let p = sym_from(n, &p);
        let x = &x[..n];
        let lhs: f64 = p.as_matrix().vec().iter().zip(kron_basis(x)).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - p.quad_form(x)).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn lyapunov_solution_positive_definite(vals in proptest::collection::vec(-2.0f64..2.0, 9), shift in 0.1f64..3.0) {
        let n = 3;
        let a = &Matrix::from_fn(n, n, |i, j| vals[i * n + j]) - &Matrix::identity(n).scale(shift);
        prop_assume!(is_hurwitz(&a).unwrap());
        let p = solve_lyapunov(&a, &SymMatrix::identity(n)).unwrap();
        prop_assert!(p.min_eigenvalue() > 0.0);
        let resid = &(&(&a.transpose() * p.as_matrix()) + &(p.as_matrix() * &a)) + &Matrix::identity(n);
        prop_assert!(resid.max_abs() <= 1e-8 * (1.0 + p.max_abs()));
    }

    #[test]
    fn bisection_brackets(c in 0.05f64..0.95) {
        let tol = 1e-3;
        let z = VarId(0);
        let build = |alpha: f64| {
            let lmi = AffineLmi::new(SymMatrix::diagonal(&[alpha, -c]))
                .with_term(z, SymMatrix::diagonal(&[-1.0, 1.0]))?
                .with_bounds(z, Bounds::new(-10.0, 10.0));
            Ok(vec![lmi])
        };
        let opts = SolverOptions::default();
        let best = maximize_alpha(build, 0.0, 1.0, tol, &opts, None).unwrap();
        prop_assert!(best.alpha <= c);
        let above = best.alpha + 2.0 * tol;
        prop_assert!(above >= 1.0 || feasibility_solve(&build(above).unwrap(), &opts, None).is_err());
        for lmi in build(best.alpha).unwrap() {
            prop_assert!(lmi.certificate(&best.solution.assignment).unwrap() <= -opts.eps / 2.0 + 1e-12);
        }
    }

    #[test]
    fn noiseless_runs_ignore_seed(a in any::<u64>(), b in any::<u64>(), u in proptest::collection::vec(-5.0f64..5.0, 50)) {
        let p = PatientParams::default();
        let meals = MealSchedule::three_meals();
        let run = |seed: u64| {
            let noise = NoiseSpec::case(1, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = PlantState::fasting(8.0);
            let mut out = Vec::new();
            for (k, u) in u.iter().enumerate() {
                let t = 415.0 + 0.1 * k as f64;
                out.push(measure(s.g, &noise, &mut rng));
                s = step(&s, meals.rate_at(t), *u, &p, &noise, &mut rng, 0.1).0;
            }
            (out, s)
        };
        prop_assert_eq!(run(a), run(b));
    }
}
