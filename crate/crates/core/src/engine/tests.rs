use super::*;
use crate::masked::{approx_error, trop_matmul, MaskedMatrix, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::from_fn(m, n, |_, _| rng.gen_range(-3.0..3.0))
}

fn rand_masked(rng: &mut ChaCha8Rng, m: usize, n: usize) -> MaskedMatrix {
    loop {
        let vals = rand_matrix(rng, m, n);
        let mask: Vec<bool> = (0..m * n).map(|_| rng.gen_bool(0.75)).collect();
        let r = MaskedMatrix::new(vals, mask).unwrap();
        if r.ensure_coverage().is_ok() {
            return r;
        }
    }
}

#[test]
fn ulf_worked_example() {
    let r = MaskedMatrix::full(Matrix::from_rows(&[[2.0, 3.0], [4.0, 5.0]]).unwrap()).unwrap();
    let mut u = Matrix::from_rows(&[[0.0], [0.0]]).unwrap();
    let mut v = Matrix::from_rows(&[[2.0, 3.0]]).unwrap();
    assert_eq!(approx_error(&r, &u, &v).unwrap(), 4.0);
    let out = f_ulf(&r, &mut u, &mut v, 1, 0, 0).unwrap();
    assert_eq!(u, Matrix::from_rows(&[[0.0], [2.0]]).unwrap());
    assert_eq!(v, Matrix::from_rows(&[[2.0, 3.0]]).unwrap());
    assert_eq!(out.prev_error, 4.0);
    assert_eq!(out.error, 0.0);
    assert!(out.improves());
}

#[test]
fn urf_is_ulf_on_the_transpose() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (m, n, r) = (rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(1..4));
        let data = rand_masked(&mut rng, m, n);
        let (i, j) = data
            .iter_given()
            .nth(rng.gen_range(0..data.given_count()))
            .map(|(i, j, _)| (i, j))
            .unwrap();
        let k = rng.gen_range(0..r);
        let (mut u, mut v) = (rand_matrix(&mut rng, m, r), rand_matrix(&mut rng, r, n));
        let (mut ut, mut vt) = (v.transpose(), u.transpose());
        let a = f_urf(&data, &mut u, &mut v, i, j, k).unwrap();
        let b = f_ulf(&data.transpose(), &mut ut, &mut vt, j, i, k).unwrap();
        assert_eq!(u, vt.transpose());
        assert_eq!(v, ut.transpose());
        assert!((a.error - b.error).abs() < 1e-12);
    }
}

#[test]
fn exact_product_is_a_fixed_point() {
    let u = Matrix::from_rows(&[[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]]).unwrap();
    let v = Matrix::from_rows(&[[1.0, 0.0, 2.0], [0.0, 3.0, 1.0]]).unwrap();
    let r = MaskedMatrix::full(trop_matmul(&u, &v).unwrap()).unwrap();
    let mut state = FitState::new(&r, u, v).unwrap();
    assert_eq!(state.error(), 0.0);
    for (i, j, _) in r.iter_given() {
        for k in 0..2 {
            for rule in [UpdateRule::Ulf, UpdateRule::Urf] {
                assert!(!state.try_update(rule, i, j, k).unwrap());
            }
        }
    }
    assert_eq!(state.error(), 0.0);
}

#[test]
fn updates_touch_only_index_k_and_revert_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (m, n, r) = (rng.gen_range(1..7), rng.gen_range(1..7), rng.gen_range(1..4));
        let data = rand_masked(&mut rng, m, n);
        let (i, j) = data
            .iter_given()
            .nth(rng.gen_range(0..data.given_count()))
            .map(|(i, j, _)| (i, j))
            .unwrap();
        let k = rng.gen_range(0..r);
        let (u0, v0) = (rand_matrix(&mut rng, m, r), rand_matrix(&mut rng, r, n));
        let (mut u, mut v) = (u0.clone(), v0.clone());
        let out = if rng.gen_bool(0.5) {
            f_ulf(&data, &mut u, &mut v, i, j, k).unwrap()
        } else {
            f_urf(&data, &mut u, &mut v, i, j, k).unwrap()
        };
        for l in (0..r).filter(|&l| l != k) {
            assert_eq!(u.column(l), u0.column(l));
            assert_eq!(v.row(l), v0.row(l));
        }
        assert_eq!(out.error, approx_error(&data, &u, &v).unwrap());
        revert(&mut u, &mut v, &out);
        assert_eq!(u, u0);
        assert_eq!(v, v0);
    }
}

#[test]
fn cached_trial_error_matches_full_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let (m, n, r) = (rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..4));
        let data = rand_masked(&mut rng, m, n);
        let mut state = FitState::new(&data, rand_matrix(&mut rng, m, r), rand_matrix(&mut rng, r, n)).unwrap();
        for _ in 0..30 {
            let (i, j) = data
                .iter_given()
                .nth(rng.gen_range(0..data.given_count()))
                .map(|(i, j, _)| (i, j))
                .unwrap();
            let rule = if rng.gen_bool(0.5) {
                UpdateRule::Ulf
            } else {
                UpdateRule::Urf
            };
            let out = state.trial(rule, i, j, rng.gen_range(0..r)).unwrap();
            assert_eq!(out.error, approx_error(&data, state.u(), state.v()).unwrap());
            if out.improves() {
                state.commit(out);
            } else {
                state.revert(out);
            }
            assert_eq!(state.error(), approx_error(&data, state.u(), state.v()).unwrap());
        }
    }
}

#[test]
fn bad_update_indices_are_errors() {
    let r = MaskedMatrix::from_options(&[[Some(1.0), None], [Some(2.0), Some(3.0)]]).unwrap();
    let mut u = Matrix::zeros(2, 1);
    let mut v = Matrix::zeros(1, 2);
    assert!(matches!(
        f_ulf(&r, &mut u, &mut v, 0, 1, 0),
        Err(Error::MissingEntry { row: 0, col: 1 })
    ));
    assert!(f_urf(&r, &mut u, &mut v, 0, 0, 1).is_err());
    assert!(FitState::new(&r, Matrix::zeros(2, 1), Matrix::zeros(2, 2)).is_err());
}

fn dataset(seed: u64, m: usize, n: usize) -> MaskedMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Matrix::from_fn(m, 3, |_, _| rng.gen::<f64>());
    let v = Matrix::from_fn(3, n, |_, _| rng.gen::<f64>());
    let full = trop_matmul(&u, &v).unwrap();
    let mask: Vec<bool> = (0..m * n).map(|_| rng.gen_bool(0.8)).collect();
    let r = MaskedMatrix::new(full, mask).unwrap();
    r.ensure_coverage().unwrap();
    r
}

#[test]
fn zero_sweep_budget_returns_initialization() {
    let r = dataset(1, 8, 6);
    let cfg = FitConfig::new(Budget::sweeps(0), 3);
    let out = stmf_baseline(&r, 2, &cfg).unwrap();
    assert_eq!(out.sweeps, 0);
    assert_eq!(out.trajectory.samples.len(), 1);
    assert_eq!(out.stop, StopReason::SweepBudget);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fitted_data = out.fitted.orientation.apply(&r).unwrap();
    let (u, v) = random_acol_init(&fitted_data, 2, DEFAULT_ACOL_COLUMNS, &mut rng).unwrap();
    assert_eq!(out.fitted.u, u);
    assert_eq!(out.fitted.v, v);
}

#[test]
fn invalid_configs_are_rejected() {
    let r = dataset(1, 5, 5);
    assert!(stmf_baseline(&r, 2, &FitConfig::new(Budget::seconds(0.0), 0)).is_err());
    assert!(stmf_baseline(&r, 2, &FitConfig::new(Budget::default(), 0)).is_err());
    assert!(stmf_baseline(&r, 0, &FitConfig::new(Budget::sweeps(1), 0)).is_err());
    let mut cfg = FitConfig::new(Budget::sweeps(1), 0);
    cfg.acol_columns = 0;
    assert!(stmf_baseline(&r, 2, &cfg).is_err());
    let empty_col = MaskedMatrix::from_options(&[[Some(1.0), None], [Some(2.0), None]]).unwrap();
    assert!(stmf_baseline(&empty_col, 1, &FitConfig::new(Budget::sweeps(1), 0)).is_err());
}

#[test]
fn baseline_runs_are_deterministic_and_monotone() {
    let r = dataset(7, 10, 8);
    let cfg = FitConfig::new(Budget::sweeps(5), 42);
    let a = stmf_baseline(&r, 3, &cfg).unwrap();
    let b = stmf_baseline(&r, 3, &cfg).unwrap();
    assert_eq!(a.factors, b.factors);
    assert_eq!(a.trajectory.without_wall_clock(), b.trajectory.without_wall_clock());
    assert!(a.trajectory.is_monotone());
    assert!(a.final_error() <= a.trajectory.initial_error().unwrap());
}

#[test]
fn restored_factors_reproduce_the_fitted_error() {
    let r = dataset(8, 9, 7);
    let out = stmf_baseline(&r, 3, &FitConfig::new(Budget::sweeps(3), 1)).unwrap();
    assert!(out.fitted.orientation.col_perm.is_some());
    let fitted_data = out.fitted.orientation.apply(&r).unwrap();
    assert_eq!(
        approx_error(&fitted_data, &out.fitted.u, &out.fitted.v).unwrap(),
        out.final_error()
    );
    let restored = approx_error(&r, &out.factors.u, &out.factors.v).unwrap();
    assert!((restored - out.final_error()).abs() < 1e-9);
}

#[test]
fn single_entry_is_fit_exactly() {
    let r = MaskedMatrix::full(Matrix::from_rows(&[[1.5]]).unwrap()).unwrap();
    let out = stmf_baseline(&r, 1, &FitConfig::new(Budget::sweeps(10), 0)).unwrap();
    assert_eq!(out.final_error(), 0.0);
    assert_eq!(out.stop, StopReason::ExactFit);
}

#[test]
fn wall_clock_budget_stops_the_run() {
    let r = dataset(2, 30, 30);
    let mut cfg = FitConfig::new(Budget::seconds(0.05), 0);
    cfg.epsilon = Epsilon::Absolute(0.0);
    let out = stmf_baseline(&r, 3, &cfg).unwrap();
    assert!(matches!(
        out.stop,
        StopReason::TimeBudget | StopReason::Converged | StopReason::ExactFit
    ));
    assert_eq!(out.trajectory.clock, Clock::Seconds);
    assert!(out.trajectory.samples.iter().all(|s| s.seconds.is_some()));
}

#[test]
fn orientation_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = rand_masked(&mut rng, 4, 6);
    let o = Orientation {
        transposed: true,
        row_perm: Some(crate::masked::Permutation::random(6, &mut rng)),
        col_perm: Some(crate::masked::Permutation::random(4, &mut rng)),
    };
    let fitted = o.apply(&r).unwrap();
    let (u, v) = (rand_matrix(&mut rng, 6, 2), rand_matrix(&mut rng, 2, 4));
    let pair = FactorPair { u, v, orientation: o };
    let restored = pair.restore().unwrap();
    let a = pair.product();
    let b = restored.product();
    let back = pair.orientation.apply(&MaskedMatrix::full(b).unwrap()).unwrap();
    assert_eq!(back.values(), &a);
    assert_eq!(
        approx_error(&fitted, &pair.u, &pair.v).unwrap(),
        approx_error(&r, &restored.u, &restored.v).unwrap()
    );
}

#[test]
fn whole_matrix_update_matches_the_fast_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let (m, n, r) = (rng.gen_range(1..7), rng.gen_range(1..7), rng.gen_range(1..4));
        let data = rand_masked(&mut rng, m, n);
        let (mut u0, v0) = random_acol_init(&data, r, 2, &mut rng).unwrap();
        // close U so that both updates start from a residuated pair
        let mut col = vec![0.0; m];
        for l in 0..r {
            crate::masked::residuate_col(&data, &v0, l, &mut col);
            u0.set_column(l, &col);
        }
        let mut whole = FitState::new(&data, u0, v0).unwrap();
        for _ in 0..10 {
            let (i, j) = data
                .iter_given()
                .nth(rng.gen_range(0..data.given_count()))
                .map(|(i, j, _)| (i, j))
                .unwrap();
            let rule = if rng.gen_bool(0.5) {
                UpdateRule::Ulf
            } else {
                UpdateRule::Urf
            };
            let k = rng.gen_range(0..r);
            let mut fast = FitState::new(&data, whole.u().clone(), whole.v().clone()).unwrap();
            let trial = fast.trial(rule, i, j, k).unwrap();
            let (tu, tv) = (fast.u().clone(), fast.v().clone());
            fast.revert(trial.clone());
            let prev = whole.error();
            if whole.try_update_whole(rule, i, j, k).unwrap() {
                assert!(trial.error < prev + 1e-9);
                assert!((whole.error() - trial.error).abs() < 1e-9);
                for (x, y) in tu.as_slice().iter().zip(whole.u().as_slice()) {
                    assert!((x - y).abs() < 1e-9);
                }
                for (x, y) in tv.as_slice().iter().zip(whole.v().as_slice()) {
                    assert!((x - y).abs() < 1e-9);
                }
            } else {
                assert!(trial.error > prev - 1e-9);
            }
            assert_eq!(whole.error(), approx_error(&data, whole.u(), whole.v()).unwrap());
        }
    }
}
