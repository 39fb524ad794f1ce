//! Small dense solves for the surrogate regressions.

use crate::error::{Error, Result};

/// Solves `A·x = b` for a symmetric positive (semi)definite `A` (row-major,
/// `n×n`) by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "matrix/vector size");
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty range");
        if a[pivot * n + col].abs() <= 1e-13 * scale {
            return Err(Error::SingularSystem);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    Ok(x)
}

/// Weighted least squares `min Σ wᵢ (yᵢ − xᵢ·β)² + Σ_j ridge_j β_j²` through
/// the normal equations.
pub fn weighted_least_squares(
    rows: &[Vec<f64>],
    targets: &[f64],
    weights: &[f64],
    ridge: &[f64],
) -> Result<Vec<f64>> {
    let p = ridge.len();
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for ((x, &y), &w) in rows.iter().zip(targets).zip(weights) {
        debug_assert_eq!(x.len(), p);
        for i in 0..p {
            if x[i] == 0.0 {
                continue;
            }
            let wx = w * x[i];
            xty[i] += wx * y;
            for j in 0..p {
                xtx[i * p + j] += wx * x[j];
            }
        }
    }
    for (i, &r) in ridge.iter().enumerate() {
        xtx[i * p + i] += r;
    }
    solve(xtx, xty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![4.0, 1.0, 2.0, 1.0, 3.0, 0.0, 2.0, 0.0, 5.0];
        let x = [1.0, -2.0, 0.5];
        let b = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum()).collect();
        let got = solve(a, b).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        assert!(matches!(
            solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0]),
            Err(Error::SingularSystem)
        ));
    }
}
