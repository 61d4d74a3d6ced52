mod common;

use common::*;
use mlpagerank::extrapolation::{extrapolate, ExtrapolationMethod, SequenceWindow};
use mlpagerank::krylov::{arnoldi, dense_solve, gmres, GmresOptions};
use mlpagerank::linalg::{norm2, DenseMatrix};
use mlpagerank::solvers::fd_step;

#[test]
fn multilinear_and_residual_match_explicit_loops() {
    for seed in 0..20u64 {
        let order = 3 + (seed % 2) as usize;
        let n = 2 + (seed % 5) as usize;
        let (t, data) = random_tensor(order, n, 0.7, seed);
        let sparse = as_sparse(order, n, &data);
        let x = random_simplex(n, seed + 100);
        let want = brute_multilinear(order, n, &data, &x);
        assert!(max_abs_diff(&t.apply_multilinear(&x).unwrap(), &want) < 1e-13);
        assert!(max_abs_diff(&sparse.apply_multilinear(&x).unwrap(), &want) < 1e-13);

        let alpha = 0.85;
        let p = problem(t, alpha);
        let f = p.residual(&x).unwrap();
        for i in 0..n {
            let expect = alpha * want[i] + (1.0 - alpha) / n as f64 - x[i];
            assert!((f[i] - expect).abs() < 1e-13, "seed {seed}");
        }
    }
}

#[test]
fn jacobian_matches_loops_and_finite_differences() {
    for seed in 0..20u64 {
        let order = 3 + (seed % 2) as usize;
        let n = 2 + (seed % 5) as usize;
        let (t, data) = random_tensor(order, n, 0.8, seed);
        let x = random_simplex(n, seed + 7);
        let w = random_vector(n, seed + 13);
        let alpha = 0.7;

        let brute = brute_jacobian(order, n, &data, &x, alpha);
        let dense = t.dense_jacobian(&x, alpha).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((dense[(i, j)] - brute[i][j]).abs() < 1e-13);
            }
        }
        let jw = t.jacobian_apply(&x, &w, alpha).unwrap();
        assert!(max_abs_diff(&jw, &dense.matvec(&w)) < 1e-12);
        let sparse = as_sparse(order, n, &data);
        assert!(max_abs_diff(&sparse.jacobian_apply(&x, &w, alpha).unwrap(), &jw) < 1e-12);

        // forward difference error is O(σ)
        let p = problem(t, alpha);
        let sigma = fd_step(&x, &w);
        let xs: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + sigma * b).collect();
        let f0 = p.residual(&x).unwrap();
        let f1 = p.residual(&xs).unwrap();
        let fd: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| (a - b) / sigma).collect();
        let scale = norm2(&w) * (order as f64 * order as f64);
        assert!(max_abs_diff(&fd, &jw) < 1e3 * sigma * scale, "seed {seed}");
    }
}

#[test]
fn gmres_matches_lu_on_conditioned_systems() {
    for seed in 0..20u64 {
        let n = 20;
        let a = conditioned_matrix(n, 1e3, seed);
        let b = random_vector(n, seed + 50);
        let exact = dense_solve(&a, &b).unwrap();
        let opts = GmresOptions {
            tol: 1e-12,
            max_dim: 40,
            reorthogonalize: false,
        };
        let out = gmres(&a, &b, &vec![0.0; n], &opts).unwrap();
        let rel = max_abs_diff(&out.solution, &exact) / exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(rel < 1e-10, "seed {seed}: relative error {rel}");
        for w in out.estimates.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}

#[test]
fn arnoldi_relation_holds() {
    let n = 12;
    let a = conditioned_matrix(n, 50.0, 3);
    let r0 = random_vector(n, 4);
    let ws = arnoldi(&a, &r0, 6, true).unwrap();
    let k = ws.steps();
    let h = ws.hessenberg();
    // A V_k = V_{k+1} H̄_k
    for j in 0..k {
        let av = a.matvec(&ws.basis[j]);
        let mut vh = vec![0.0; n];
        for i in 0..=k.min(j + 1) {
            for r in 0..n {
                vh[r] += ws.basis[i][r] * h[(i, j)];
            }
        }
        assert!(max_abs_diff(&av, &vh) < 1e-12);
    }
    for i in 0..=k {
        for j in 0..=k {
            let d: f64 = ws.basis[i].iter().zip(&ws.basis[j]).map(|(x, y)| x * y).sum();
            assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
}

/// `s_{k+1} = M s_k + b` from a seeded rank-3 `M`, and the dense solution of
/// `(I - M) s = b`. The window starts one step into the iteration, so
/// `s_0 - s*` lies in the range of `M` and has a minimal polynomial of
/// degree at most 3.
fn linear_window(seed: u64, q: usize) -> (SequenceWindow, Vec<f64>) {
    let n = 8;
    let m = low_rank_contraction(n, 3, 0.8, seed);
    let b = random_vector(n, seed + 1);
    let step = |prev: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| m[i][j] * prev[j]).sum::<f64>() + b[i]).collect()
    };
    let mut s = vec![step(&random_vector(n, seed + 2))];
    for _ in 0..q + 1 {
        let next = step(s.last().unwrap());
        s.push(next);
    }
    let mut i_minus_m = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            i_minus_m[(i, j)] -= m[i][j];
        }
    }
    (SequenceWindow::new(s).unwrap(), dense_solve(&i_minus_m, &b).unwrap())
}

#[test]
fn extrapolation_recovers_linear_fixed_points() {
    for seed in 0..10u64 {
        let (window, exact) = linear_window(seed, 3);
        for method in [ExtrapolationMethod::Mpe, ExtrapolationMethod::Rre] {
            let t = extrapolate(&window, method).unwrap().vector;
            assert!(max_abs_diff(&t, &exact) < 1e-8, "seed {seed} {method}");
        }
    }
}

#[test]
fn extrapolation_is_affine_covariant() {
    let (window, _) = linear_window(5, 3);
    let shift = random_vector(8, 99);
    let shifted = SequenceWindow::new(
        window
            .iterates()
            .iter()
            .map(|s| s.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect(),
    )
    .unwrap();
    for method in [ExtrapolationMethod::Mpe, ExtrapolationMethod::Rre] {
        let t = extrapolate(&window, method).unwrap().vector;
        let ts = extrapolate(&shifted, method).unwrap().vector;
        let expect: Vec<f64> = t.iter().zip(&shift).map(|(a, b)| a + b).collect();
        assert!(max_abs_diff(&ts, &expect) < 1e-12, "{method}");
    }
}
