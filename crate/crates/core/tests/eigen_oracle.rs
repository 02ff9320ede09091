mod common;

use common::{gaussian, jacobi_eigen, max_abs_diff, tickers};
use corrspec_core::correlation::correlation_matrix;
use corrspec_core::returns::{normalize, ReturnMatrix};
use corrspec_core::spectrum::{eigendecompose, symmetric_eigen};
use corrspec_core::CorrMatrix;
use ndarray::{Array2, Axis};

fn sample_corr(n: usize, t: usize, seed: u64) -> CorrMatrix {
    let r = ReturnMatrix::new(tickers(n), gaussian(n, t, seed), 1).unwrap();
    correlation_matrix(&normalize(&r).unwrap())
}

#[test]
fn eigenvalues_match_jacobi() {
    for (n, t, seed) in [(5, 40, 1), (12, 30, 2), (30, 200, 3), (40, 35, 4)] {
        let c = sample_corr(n, t, seed);
        let s = eigendecompose(&c).unwrap();
        let (oracle, _) = jacobi_eigen(c.entries());
        for (a, b) in s.eigenvalues().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn eigenvectors_match_jacobi_up_to_sign() {
    let c = sample_corr(20, 100, 7);
    let s = eigendecompose(&c).unwrap();
    let (_, oracle) = jacobi_eigen(c.entries());
    for k in 0..20 {
        let dot: f64 = s.eigenvector(k).iter().zip(oracle.column(k)).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-8, "mode {k}: |dot| = {}", dot.abs());
    }
}

#[test]
fn reconstruction_and_orthonormality() {
    for (n, t, seed) in [(10, 50, 11), (60, 400, 12), (80, 60, 13)] {
        let c = sample_corr(n, t, seed);
        let s = eigendecompose(&c).unwrap();
        let u = s.eigenvectors();
        let gram = u.t().dot(u);
        assert!(max_abs_diff(&gram, &Array2::eye(n)) < 1e-8);
        let rebuilt = s.partial_sum(0..n);
        assert!(max_abs_diff(&rebuilt, c.entries()) < 1e-8);
        let sum: f64 = s.eigenvalues().iter().sum();
        assert!((sum - n as f64).abs() < 1e-8);
    }
}

#[test]
fn permutation_equivariance() {
    let n = 25;
    let c = sample_corr(n, 150, 21);
    let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
    let permuted = c.entries().select(Axis(0), &perm).select(Axis(1), &perm);
    let pt: Vec<String> = perm.iter().map(|&i| c.tickers()[i].clone()).collect();
    let cp = CorrMatrix::new(pt, permuted, c.observations()).unwrap();
    let (a, b) = (eigendecompose(&c).unwrap(), eigendecompose(&cp).unwrap());
    for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
        assert!((x - y).abs() < 1e-10);
    }
    // eigenvectors permute with the rows; all modes are simple here
    for k in 0..n {
        let dot: f64 = perm.iter().enumerate().map(|(row, &i)| b.eigenvector(k)[row] * a.eigenvector(k)[i]).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn degenerate_spectrum() {
    // 0.5 I + 0.5 J: one value 4.5, seven values 0.5
    let n = 8;
    let m = Array2::from_shape_fn((n, n), |(i, j)| if i == j { 1.0 } else { 0.5 });
    let (vals, vecs) = symmetric_eigen(&m).unwrap();
    let (oracle, _) = jacobi_eigen(&m);
    for (a, b) in vals.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((vals[0] - 4.5).abs() < 1e-12);
    assert!(vals[1..].iter().all(|v| (v - 0.5).abs() < 1e-12));
    let gram = vecs.t().dot(&vecs);
    assert!(max_abs_diff(&gram, &Array2::eye(n)) < 1e-10);
}

#[test]
fn sign_convention_is_deterministic() {
    let c = sample_corr(15, 80, 31);
    let a = eigendecompose(&c).unwrap();
    let b = eigendecompose(&c).unwrap();
    assert_eq!(a, b);
    for k in 0..15 {
        assert!(a.eigenvector(k).sum() >= -1e-12);
    }
}
