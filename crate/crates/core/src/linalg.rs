//! Dense kernels for the small (d ≤ ~8) symmetric matrices built by the tensor module.

#![allow(clippy::needless_range_loop)]

pub type Matrix = Vec<Vec<f64>>;

pub fn max_norm(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Determinant by LU factorisation with partial pivoting.
pub fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Matrix = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot_row][col] == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            det = -det;
        }
        let pivot = a[col][col];
        det *= pivot;
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    det
}

/// Attempts a Cholesky factorisation. Every pivot must exceed
/// `rel_tol · max_norm(m)`; returns the pivots on success.
pub fn cholesky_pivots(m: &[Vec<f64>], rel_tol: f64) -> Option<Vec<f64>> {
    let n = m.len();
    let threshold = rel_tol * max_norm(m);
    if threshold == 0.0 && n > 0 {
        return None;
    }
    let mut l = vec![vec![0.0; n]; n];
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let mut diag = m[j][j];
        for k in 0..j {
            diag -= l[j][k] * l[j][k];
        }
        if !(diag > threshold) {
            return None;
        }
        pivots.push(diag);
        let ljj = diag.sqrt();
        l[j][j] = ljj;
        for i in j + 1..n {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / ljj;
        }
    }
    Some(pivots)
}

pub fn is_symmetric(m: &[Vec<f64>], tol: f64) -> bool {
    let scale = max_norm(m).max(f64::MIN_POSITIVE);
    (0..m.len()).all(|i| (0..i).all(|j| (m[i][j] - m[j][i]).abs() <= tol * scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&[vec![2.0]]), 2.0);
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(determinant(&m), -1.0);
        let m = vec![vec![4.0, 3.0, 2.0], vec![1.0, 5.0, 7.0], vec![2.0, 8.0, 9.0]];
        // 4(45-56) - 3(9-14) + 2(8-10)
        assert!((determinant(&m) - (-33.0)).abs() < 1e-12);
        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(determinant(&singular).abs() < 1e-15);
    }

    #[test]
    fn cholesky_detects_definiteness() {
        let spd = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let piv = cholesky_pivots(&spd, 1e-13).unwrap();
        assert!((piv[0] * piv[1] - determinant(&spd)).abs() < 1e-12);
        let indefinite = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(cholesky_pivots(&indefinite, 1e-13).is_none());
        let rank_one = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(cholesky_pivots(&rank_one, 1e-13).is_none());
        assert!(cholesky_pivots(&[vec![0.0]], 1e-13).is_none());
    }
}
