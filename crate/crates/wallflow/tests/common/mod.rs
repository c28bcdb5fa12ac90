#![allow(dead_code)]
//! Dense linear-algebra oracles shared by the integration tests: a matrix
//! exponential (scaling and squaring) and a pivoted LU solver, written
//! directly against ndarray so solver output can be checked against an
//! independent code path.

use ndarray::Array2;

/// 1-norm (maximum absolute column sum).
pub fn one_norm(a: &Array2<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for c in 0..a.ncols() {
        let mut sum = 0.0;
        for r in 0..a.nrows() {
            sum += a[(r, c)].abs();
        }
        worst = worst.max(sum);
    }
    worst
}

/// `exp(a)` by scaling and squaring: the argument is scaled to 1-norm at most
/// 1/4, expanded in a Taylor series to relative tolerance 1e-18, and squared
/// back up.
pub fn expm(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|x| x / 2.0_f64.powi(squarings));
    let mut result = Array2::<f64>::eye(n);
    let mut term = Array2::<f64>::eye(n);
    for k in 1..=60 {
        term = term.dot(&scaled).mapv(|x| x / k as f64);
        result = &result + &term;
        if one_norm(&term) <= 1e-18 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Dense LU factorization with partial pivoting.
pub struct DenseLu {
    lu: Array2<f64>,
    pivots: Vec<usize>,
}

impl DenseLu {
    pub fn new(mut a: Array2<f64>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut pivots = vec![0usize; n];
        for col in 0..n {
            let mut best = col;
            for row in col + 1..n {
                if a[(row, col)].abs() > a[(best, col)].abs() {
                    best = row;
                }
            }
            assert!(a[(best, col)].abs() > 1e-300, "singular matrix in LU");
            pivots[col] = best;
            if best != col {
                for c in 0..n {
                    let tmp = a[(col, c)];
                    a[(col, c)] = a[(best, c)];
                    a[(best, c)] = tmp;
                }
            }
            for row in col + 1..n {
                let factor = a[(row, col)] / a[(col, col)];
                a[(row, col)] = factor;
                for c in col + 1..n {
                    a[(row, c)] -= factor * a[(col, c)];
                }
            }
        }
        DenseLu { lu: a, pivots }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.nrows();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut x = b.to_vec();
        for col in 0..n {
            x.swap(col, self.pivots[col]);
        }
        for row in 1..n {
            for col in 0..row {
                x[row] -= self.lu[(row, col)] * x[col];
            }
        }
        for row in (0..n).rev() {
            for col in row + 1..n {
                x[row] -= self.lu[(row, col)] * x[col];
            }
            x[row] /= self.lu[(row, row)];
        }
        x
    }
}

/// Dense matrix-vector product.
pub fn apply(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    let (n, m) = a.dim();
    assert_eq!(m, x.len(), "dimension mismatch");
    let mut y = vec![0.0; n];
    for r in 0..n {
        let mut sum = 0.0;
        for c in 0..m {
            sum += a[(r, c)] * x[c];
        }
        y[r] = sum;
    }
    y
}

/// Largest pointwise absolute difference.
pub fn max_abs_diff(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "length mismatch");
    xs.iter()
        .zip(ys)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}
