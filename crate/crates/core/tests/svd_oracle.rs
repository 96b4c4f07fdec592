mod support;

use appdemog::dimred::{project, reconstruction_error, truncated_svd, truncated_svd_with, SvdOptions};
use appdemog::{Axis, SparseBinaryMatrix};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn random_50x80_matches_dense_oracle() {
    let x = support::random_binary(50, 80, 0.3, 42);
    let oracle = support::jacobi_singular_values(&x);
    let f = truncated_svd(&x, 10, 7).unwrap();
    for (s, o) in f.singular_values.iter().zip(&oracle) {
        assert!(rel(*s, *o) < 1e-6, "{s} vs {o}");
    }
}

#[test]
fn factors_are_orthonormal_and_sorted() {
    let x = support::random_binary(60, 40, 0.2, 3);
    let f = truncated_svd(&x, 8, 1).unwrap();
    assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
    for a in 0..f.k {
        for b in 0..f.k {
            let d: f64 = f.right_vectors[a].iter().zip(&f.right_vectors[b]).map(|(p, q)| p * q).sum();
            let expect = if a == b { 1.0 } else { 0.0 };
            assert!((d - expect).abs() < 1e-8, "({a},{b}) = {d}");
        }
    }
}

#[test]
fn projection_column_norms_are_singular_values() {
    // X·Vᵀ = U·Σ, so column c of the projection has norm σ_c.
    let x = support::random_binary(40, 70, 0.25, 9);
    let oracle = support::jacobi_singular_values(&x);
    let f = truncated_svd(&x, 6, 2).unwrap();
    let p = project(&f, &x).unwrap();
    for (c, &sigma) in oracle.iter().enumerate().take(6) {
        let norm: f64 = (0..40).map(|i| p.get(i, c).powi(2)).sum::<f64>().sqrt();
        assert!(rel(norm, sigma) < 1e-6, "column {c}: {norm} vs {sigma}");
    }
}

#[test]
fn reconstruction_error_is_optimal_and_monotone() {
    let x = support::random_binary(80, 60, 0.3, 5);
    let oracle = support::jacobi_singular_values(&x);
    let mut last = f64::INFINITY;
    for k in 1..=10 {
        let f = truncated_svd(&x, k, 11).unwrap();
        let err = reconstruction_error(&f, &x).unwrap();
        let best = support::optimal_rank_k_error(&oracle, k);
        assert!(rel(err, best) < 1e-6, "k={k}: {err} vs {best}");
        assert!(err <= last + 1e-9);
        last = err;
    }
}

#[test]
fn singular_values_invariant_under_row_permutation() {
    let x = support::random_binary(50, 50, 0.3, 8);
    let perm: Vec<usize> = (0..50).map(|i| (i * 17) % 50).collect();
    let xp = x.select(Axis::Rows, &perm).unwrap();
    let a = truncated_svd(&x, 10, 4).unwrap();
    let b = truncated_svd(&xp, 10, 4).unwrap();
    for (s, t) in a.singular_values.iter().zip(&b.singular_values) {
        assert!((s - t).abs() <= 1e-8 * s.max(1.0));
    }
}

#[test]
fn fixed_two_power_iterations_is_honoured() {
    let x = support::random_binary(30, 30, 0.3, 1);
    let f = truncated_svd_with(&x, 5, 0, &SvdOptions::fixed(10, 2)).unwrap();
    assert_eq!(f.power_iterations, 2);
    // Leading value is well separated and converges fast regardless.
    let oracle = support::jacobi_singular_values(&x);
    assert!(rel(f.singular_values[0], oracle[0]) < 1e-6);
    let _ = SparseBinaryMatrix::identity(1);
}
