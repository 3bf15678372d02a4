//! Blocked dense kernels for the surrogate's hot paths.
//!
//! nalgebra's factored routines are unblocked; the fit and the acquisition
//! search spend almost all of their time in Cholesky factorizations and
//! triangular solves with many right-hand sides, so both are reorganized
//! here into panel form where the bulk of the work lands in `gemm`.

use nalgebra::DMatrix;

const BLOCK: usize = 48;

/// Lower Cholesky of a symmetric positive definite matrix. Only the lower
/// triangle of the input is read and only the lower triangle of the result
/// is meaningful, so callers may leave the strict upper part unset.
/// Returns `None` when a pivot fails (matrix not positive definite).
pub(crate) fn blocked_cholesky(mut a: DMatrix<f64>) -> Option<DMatrix<f64>> {
    if blocked_cholesky_in_place(&mut a) {
        Some(a)
    } else {
        None
    }
}

/// In-place variant of [`blocked_cholesky`] for callers that reuse the
/// buffer across many factorizations.
pub(crate) fn blocked_cholesky_in_place(a: &mut DMatrix<f64>) -> bool {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut j0 = 0;
    while j0 < n {
        let b = BLOCK.min(n - j0);
        // Unblocked factorization of the diagonal block.
        for j in j0..j0 + b {
            let mut diag = a[(j, j)];
            for k in j0..j {
                let v = a[(j, k)];
                diag -= v * v;
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return false;
            }
            let pivot = diag.sqrt();
            a[(j, j)] = pivot;
            let inv = 1.0 / pivot;
            for i in j + 1..j0 + b {
                let mut v = a[(i, j)];
                for k in j0..j {
                    v -= a[(i, k)] * a[(j, k)];
                }
                a[(i, j)] = v * inv;
            }
        }
        let rest = j0 + b;
        if rest < n {
            // Panel solve: P = A[rest.., j0..rest] L_d^-T, column by column.
            for j in j0..rest {
                let inv = 1.0 / a[(j, j)];
                for k in j0..j {
                    let l_jk = a[(j, k)];
                    if l_jk != 0.0 {
                        let (col_k, col_j) = split_columns(a, k, j, rest, n);
                        for (x, &y) in col_j.iter_mut().zip(col_k.iter()) {
                            *x -= l_jk * y;
                        }
                    }
                }
                for i in rest..n {
                    a[(i, j)] *= inv;
                }
            }
            // Trailing update A[rest.., rest..] -= P P^T, done per column
            // panel so only the lower triangle is touched (half the flops
            // of a full gemm).
            let p = a.view((rest, j0), (n - rest, b)).clone_owned();
            let mut c0 = rest;
            while c0 < n {
                let bc = BLOCK.min(n - c0);
                // rows c0..n of columns c0..c0+bc cover the lower triangle
                let rows = n - c0;
                let left = p.view((c0 - rest, 0), (rows, b)).clone_owned();
                let right = p.view((c0 - rest, 0), (bc, b)).transpose();
                a.view_mut((c0, c0), (rows, bc)).gemm(-1.0, &left, &right, 1.0);
                c0 += bc;
            }
        }
        j0 += b;
    }
    true
}

/// Disjoint mutable views of rows `lo..hi` of columns `k` and `j` (k < j).
fn split_columns(
    a: &mut DMatrix<f64>,
    k: usize,
    j: usize,
    lo: usize,
    hi: usize,
) -> (&[f64], &mut [f64]) {
    debug_assert!(k < j);
    let nrows = a.nrows();
    let data = a.as_mut_slice();
    let (left, right) = data.split_at_mut(j * nrows);
    (
        &left[k * nrows + lo..k * nrows + hi],
        &mut right[lo..hi],
    )
}

/// Solves `L X = B` in place for a lower-triangular `L` (as produced by
/// [`blocked_cholesky`]; the strict upper triangle is ignored).
pub(crate) fn solve_lower_mut(l: &DMatrix<f64>, b: &mut DMatrix<f64>) {
    let n = l.nrows();
    debug_assert_eq!(n, b.nrows());
    let m = b.ncols();
    let mut i0 = 0;
    while i0 < n {
        let blk = BLOCK.min(n - i0);
        if i0 > 0 {
            // B[i0..i0+blk, :] -= L[i0..i0+blk, 0..i0] * X[0..i0, :]
            let l_panel = l.view((i0, 0), (blk, i0));
            let x_done = b.view((0, 0), (i0, m)).clone_owned();
            b.view_mut((i0, 0), (blk, m)).gemm(-1.0, &l_panel, &x_done, 1.0);
        }
        for c in 0..m {
            for i in i0..i0 + blk {
                let mut v = b[(i, c)];
                for k in i0..i {
                    v -= l[(i, k)] * b[(k, c)];
                }
                b[(i, c)] = v / l[(i, i)];
            }
        }
        i0 += blk;
    }
}

/// Solves `L^T x = b` in place for one right-hand side.
pub(crate) fn solve_lower_transpose_mut(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = l.nrows();
    debug_assert_eq!(n, b.len());
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= l[(k, i)] * b[k];
        }
        b[i] = v / l[(i, i)];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn spd(n: usize) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = (i as f64 - j as f64) / 7.0;
                k[(i, j)] = 1.7 * (-0.5 * d * d).exp();
            }
            k[(i, i)] += 1e-3 + 1e-4 * i as f64;
        }
        k
    }

    #[test]
    fn matches_nalgebra_cholesky() {
        for n in [1, 3, 17, 48, 49, 120, 200] {
            let k = spd(n);
            let ours = blocked_cholesky(k.clone()).unwrap();
            let reference = nalgebra::linalg::Cholesky::new(k).unwrap().unpack();
            for i in 0..n {
                for j in 0..=i {
                    assert!(
                        (ours[(i, j)] - reference[(i, j)]).abs() < 1e-10,
                        "n={n} ({i},{j}): {} vs {}",
                        ours[(i, j)],
                        reference[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_indefinite_matrices() {
        let mut k = spd(10);
        k[(4, 4)] = -5.0;
        assert!(blocked_cholesky(k).is_none());
    }

    #[test]
    fn triangular_solves_match_reference() {
        let n = 137;
        let k = spd(n);
        let l = blocked_cholesky(k.clone()).unwrap();
        let mut b = DMatrix::zeros(n, 9);
        for c in 0..9 {
            for i in 0..n {
                b[(i, c)] = ((i * 31 + c * 17) % 23) as f64 / 23.0 - 0.4;
            }
        }
        let mut x = b.clone();
        solve_lower_mut(&l, &mut x);
        let reference = nalgebra::linalg::Cholesky::new(k.clone()).unwrap();
        let mut expect = b.clone();
        reference
            .l_dirty()
            .solve_lower_triangular_unchecked_mut(&mut expect);
        for i in 0..n {
            for c in 0..9 {
                assert!((x[(i, c)] - expect[(i, c)]).abs() < 1e-10);
            }
        }

        // transpose solve against a full solve
        let rhs = DVector::from_fn(n, |i, _| (i as f64 * 0.37).sin());
        let mut y = rhs.clone().as_slice().to_vec();
        let mut ym = DMatrix::from_column_slice(n, 1, &y);
        solve_lower_mut(&l, &mut ym);
        y.copy_from_slice(ym.as_slice());
        solve_lower_transpose_mut(&l, &mut y);
        let full = reference.solve(&rhs);
        for i in 0..n {
            assert!((y[i] - full[i]).abs() < 1e-9, "{} vs {}", y[i], full[i]);
        }
    }
}
