use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropfact_core::engine::{f_ulf, f_urf, random_acol_init, revert, FitState, UpdateRule};
use tropfact_core::masked::{
    approx_error, b_norm, masked_minplus, residuate_col, residuate_row, td, td_col, td_row, trop_matmul,
};
use tropfact_core::{MaskedMatrix, Matrix};

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::from_fn(m, n, |_, _| rng.gen_range(-5.0..5.0))
}

/// Random data with at least one given entry per row and column.
fn random_masked(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> MaskedMatrix {
    let values = random_matrix(rng, m, n);
    let mut mask: Vec<bool> = (0..m * n).map(|_| rng.gen_bool(density)).collect();
    for i in 0..m.max(n) {
        mask[(i % m) * n + i % n] = true;
    }
    MaskedMatrix::new(values, mask).unwrap()
}

fn naive_trop(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut best = f64::NEG_INFINITY;
        for k in 0..a.cols() {
            best = best.max(a[(i, k)] + b[(k, j)]);
        }
        best
    })
}

fn naive_minplus(a: &MaskedMatrix, b: &MaskedMatrix) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut best = f64::INFINITY;
        for k in 0..a.cols() {
            if let (Some(x), Some(y)) = (a.get(i, k), b.get(k, j)) {
                best = best.min(x + y);
            }
        }
        best
    })
}

/// Greatest `V` with `U ⊗ V ≤ R` on given entries, entry by entry.
fn naive_residual_v(r: &MaskedMatrix, u: &Matrix) -> Matrix {
    Matrix::from_fn(u.cols(), r.cols(), |k, j| {
        let mut best = f64::INFINITY;
        for i in 0..r.rows() {
            if let Some(x) = r.get(i, j) {
                best = best.min(x - u[(i, k)]);
            }
        }
        best
    })
}

fn naive_residual_u(r: &MaskedMatrix, v: &Matrix) -> Matrix {
    Matrix::from_fn(r.rows(), v.rows(), |i, k| {
        let mut best = f64::INFINITY;
        for j in 0..r.cols() {
            if let Some(x) = r.get(i, j) {
                best = best.min(x - v[(k, j)]);
            }
        }
        best
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kernels_match_loop_oracles(seed in any::<u64>(), m in 1..=8usize, n in 1..=8usize, r in 1..=3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, m, r);
        let b = random_matrix(&mut rng, r, n);
        prop_assert_eq!(trop_matmul(&a, &b).unwrap(), naive_trop(&a, &b));

        let ma = random_masked(&mut rng, m, r, 0.6);
        let mb = random_masked(&mut rng, r, n, 0.6);
        prop_assert_eq!(masked_minplus(&ma, &mb).unwrap(), naive_minplus(&ma, &mb));

        let data = random_masked(&mut rng, m, n, 0.7);
        let norm: f64 = (0..m).flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| data.get(i, j)).map(f64::abs).sum();
        prop_assert!(close(b_norm(&data), norm, 1e-12));

        let prod = naive_trop(&a, &b);
        let mut total = 0.0;
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..n {
                if let Some(x) = data.get(i, j) {
                    let d = (x - prod[(i, j)]).abs();
                    prop_assert_eq!(td(&data, &a, &b, i, j).unwrap(), d);
                    row += d;
                } else {
                    prop_assert!(td(&data, &a, &b, i, j).is_err());
                }
            }
            prop_assert!(close(td_row(&data, &a, &b, i), row, 1e-12));
            total += row;
        }
        for j in 0..n {
            let col: f64 = (0..m).filter_map(|i| data.get(i, j).map(|x| (x - prod[(i, j)]).abs())).sum();
            prop_assert!(close(td_col(&data, &a, &b, j), col, 1e-12));
        }
        prop_assert!(close(approx_error(&data, &a, &b).unwrap(), total, 1e-12));
    }

    #[test]
    fn residuation_gives_the_greatest_subsolution(seed in any::<u64>(), m in 1..=8usize, n in 1..=8usize, r in 1..=3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_masked(&mut rng, m, n, 0.7);
        let u = random_matrix(&mut rng, m, r);
        let mut v = Matrix::zeros(r, n);
        let mut buf = vec![0.0; n];
        for k in 0..r {
            residuate_row(&data, &u, k, &mut buf);
            v.row_mut(k).copy_from_slice(&buf);
        }
        prop_assert_eq!(&v, &naive_residual_v(&data, &u));
        let prod = trop_matmul(&u, &v).unwrap();
        for (i, j, x) in data.iter_given() {
            prop_assert!(x - prod[(i, j)] >= -1e-9);
        }
        for k in 0..r {
            for j in 0..n {
                let mut bumped = v.clone();
                bumped[(k, j)] += 1e-3;
                let p = trop_matmul(&u, &bumped).unwrap();
                prop_assert!(data.iter_given().any(|(i, jj, x)| p[(i, jj)] > x + 1e-9));
            }
        }

        let mut col = vec![0.0; m];
        let mut uu = Matrix::zeros(m, r);
        for k in 0..r {
            residuate_col(&data, &v, k, &mut col);
            uu.set_column(k, &col);
        }
        prop_assert_eq!(&uu, &naive_residual_u(&data, &v));
    }

    #[test]
    fn fast_updates_match_full_recomputation(seed in any::<u64>(), m in 1..=8usize, n in 1..=8usize, r in 1..=3usize, ulf in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_masked(&mut rng, m, n, 0.7);
        let mut u = random_matrix(&mut rng, m, r);
        let mut v = random_matrix(&mut rng, r, n);
        let given: Vec<(usize, usize, f64)> = data.iter_given().collect();
        let (i, j, x) = given[rng.gen_range(0..given.len())];
        let k = rng.gen_range(0..r);

        // oracle: seed one entry, then recompute every row of V (or column
        // of U) and every column of U (or row of V) from scratch, keeping
        // only factor k from the recomputation.
        let (mut ou, mut ov) = (u.clone(), v.clone());
        if ulf {
            ou[(i, k)] = x - ov[(k, j)];
            let full_v = naive_residual_v(&data, &ou);
            ov.row_mut(k).copy_from_slice(full_v.row(k));
            let full_u = naive_residual_u(&data, &ov);
            ou.set_column(k, &full_u.column(k));
        } else {
            ov[(k, j)] = x - ou[(i, k)];
            let full_u = naive_residual_u(&data, &ov);
            ou.set_column(k, &full_u.column(k));
            let full_v = naive_residual_v(&data, &ou);
            ov.row_mut(k).copy_from_slice(full_v.row(k));
        }

        let (u0, v0) = (u.clone(), v.clone());
        let out = if ulf {
            f_ulf(&data, &mut u, &mut v, i, j, k).unwrap()
        } else {
            f_urf(&data, &mut u, &mut v, i, j, k).unwrap()
        };
        for a in 0..m {
            for l in 0..r {
                if l == k {
                    prop_assert!(close(u[(a, l)], ou[(a, l)], 1e-12));
                } else {
                    prop_assert_eq!(u[(a, l)].to_bits(), u0[(a, l)].to_bits());
                }
            }
        }
        for l in 0..r {
            for b in 0..n {
                if l == k {
                    prop_assert!(close(v[(l, b)], ov[(l, b)], 1e-12));
                } else {
                    prop_assert_eq!(v[(l, b)].to_bits(), v0[(l, b)].to_bits());
                }
            }
        }
        prop_assert!(close(out.error, approx_error(&data, &ou, &ov).unwrap(), 1e-9));

        revert(&mut u, &mut v, &out);
        prop_assert_eq!(&u, &u0);
        prop_assert_eq!(&v, &v0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn updates_preserve_the_subsolution(seed in any::<u64>(), m in 2..=10usize, n in 2..=10usize, r in 1..=3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_masked(&mut rng, m, n, 0.7);
        let (u, v) = random_acol_init(&data, r, 2, &mut rng).unwrap();
        let mut state = FitState::new(&data, u, v).unwrap();
        let given: Vec<(usize, usize, f64)> = data.iter_given().collect();
        let mut last = state.error();
        for _ in 0..1000 {
            let (i, j, _) = given[rng.gen_range(0..given.len())];
            let rule = if rng.gen_bool(0.5) { UpdateRule::Ulf } else { UpdateRule::Urf };
            let k = rng.gen_range(0..r);
            let outcome = state.trial(rule, i, j, k).unwrap();
            let prod = trop_matmul(state.u(), state.v()).unwrap();
            for (a, b, x) in data.iter_given() {
                prop_assert!(x - prod[(a, b)] >= -1e-9, "entry ({a}, {b}) above data");
            }
            if outcome.improves() {
                state.commit(outcome);
            } else {
                state.revert(outcome);
            }
            prop_assert!(state.error() <= last);
            last = state.error();
        }
        prop_assert!(close(state.error(), approx_error(&data, state.u(), state.v()).unwrap(), 1e-9));
    }

    #[test]
    fn trial_then_revert_is_exact(seed in any::<u64>(), m in 1..=8usize, n in 1..=8usize, r in 1..=3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = random_masked(&mut rng, m, n, 0.7);
        let (u, v) = random_acol_init(&data, r, 1, &mut rng).unwrap();
        let mut state = FitState::new(&data, u.clone(), v.clone()).unwrap();
        let error = state.error();
        for (i, j, _) in data.iter_given() {
            for k in 0..r {
                for rule in [UpdateRule::Ulf, UpdateRule::Urf] {
                    let o = state.trial(rule, i, j, k).unwrap();
                    state.revert(o);
                    prop_assert_eq!(state.u(), &u);
                    prop_assert_eq!(state.v(), &v);
                    prop_assert_eq!(state.error().to_bits(), error.to_bits());
                }
            }
        }
    }
}
