//! Tridiagonal (Thomas) solver with reusable factorization.
//!
//! No pivoting: every matrix assembled in this crate (Crank-Nicolson
//! diffusion, Poisson with Dirichlet rows, ghost-Neumann rows) is strictly
//! diagonally dominant or an M-matrix, for which elimination in natural order
//! is stable.

use num_traits::Num;

/// LU factorization of a tridiagonal matrix, reusable across right-hand sides.
///
/// Band convention for an `n x n` system: `diag` has `n` entries; `sub[i]` is
/// the entry at `(i+1, i)` and `sup[i]` the entry at `(i, i+1)`, both of
/// length `n - 1`.
#[derive(Debug, Clone)]
pub struct TridiagFactor<T> {
    /// Elimination multipliers, `mult[i]` applied to row `i+1`.
    mult: Vec<T>,
    /// Pivots after forward elimination.
    pivot: Vec<T>,
    /// Unchanged superdiagonal.
    sup: Vec<T>,
}

impl<T: Copy + Num> TridiagFactor<T> {
    /// Factors the matrix. Panics on a zero pivot (cannot occur for the
    /// diagonally dominant systems assembled by the solvers).
    pub fn new(sub: &[T], diag: &[T], sup: &[T]) -> Self {
        let n = diag.len();
        assert!(n >= 1, "empty system");
        assert_eq!(sub.len(), n - 1, "subdiagonal length");
        assert_eq!(sup.len(), n - 1, "superdiagonal length");
        let mut mult = Vec::with_capacity(n - 1);
        let mut pivot = Vec::with_capacity(n);
        pivot.push(diag[0]);
        for i in 1..n {
            let p = pivot[i - 1];
            assert!(!p.is_zero(), "zero pivot in tridiagonal factorization");
            let m = sub[i - 1] / p;
            mult.push(m);
            pivot.push(diag[i] - m * sup[i - 1]);
        }
        assert!(!pivot[n - 1].is_zero(), "singular tridiagonal matrix");
        TridiagFactor {
            mult,
            pivot,
            sup: sup.to_vec(),
        }
    }

    /// Dimension of the system.
    pub fn len(&self) -> usize {
        self.pivot.len()
    }

    /// True for the degenerate 1x1 case guard.
    pub fn is_empty(&self) -> bool {
        self.pivot.is_empty()
    }

    /// Solves in place, overwriting `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.pivot.len();
        assert_eq!(rhs.len(), n, "right-hand side length");
        for i in 1..n {
            rhs[i] = rhs[i] - self.mult[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] = rhs[n - 1] / self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.sup[i] * rhs[i + 1]) / self.pivot[i];
        }
    }

    /// Solves into a fresh vector.
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Tridiagonal system whose first row carries one extra entry in column 2
/// (produced by the wall closure of the compact fourth-order scheme).
///
/// The extra entry is eliminated against row 1 once at factorization time;
/// each solve applies the same elimination to the right-hand side and then
/// runs the plain Thomas substitution.
#[derive(Debug, Clone)]
pub struct BorderedTridiagFactor<T> {
    alpha: T,
    inner: TridiagFactor<T>,
}

impl<T: Copy + Num> BorderedTridiagFactor<T> {
    /// Factors the matrix with `first_row_extra` at position `(0, 2)`.
    /// Requires `n >= 3` and a nonzero `sup[1]` to eliminate against.
    pub fn new(sub: &[T], diag: &[T], sup: &[T], first_row_extra: T) -> Self {
        assert!(diag.len() >= 3, "bordered system needs at least 3 rows");
        assert!(
            !sup[1].is_zero(),
            "cannot eliminate the (0,2) entry against a zero (1,2) entry"
        );
        let alpha = first_row_extra / sup[1];
        let mut diag_mod = diag.to_vec();
        let mut sup_mod = sup.to_vec();
        diag_mod[0] = diag[0] - alpha * sub[0];
        sup_mod[0] = sup[0] - alpha * diag[1];
        BorderedTridiagFactor {
            alpha,
            inner: TridiagFactor::new(sub, &diag_mod, &sup_mod),
        }
    }

    /// Solves in place, overwriting `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        rhs[0] = rhs[0] - self.alpha * rhs[1];
        self.inner.solve_in_place(rhs);
    }
}
