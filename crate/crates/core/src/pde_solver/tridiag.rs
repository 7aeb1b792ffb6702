use crate::error::{Error, Result};

/// Solves a tridiagonal system, optionally with periodic corner entries.
///
/// `lower[i]` is `A[i][i-1]` and `upper[i]` is `A[i][i+1]`; in the cyclic
/// case `lower[0]` is `A[0][n-1]` and `upper[n-1]` is `A[n-1][0]`.
///
/// Gaussian elimination without pivoting. For a column diagonally dominant
/// Z-matrix (the implicit drift-diffusion operator) every update adds terms
/// of one sign, so a non-negative right-hand side gives a non-negative
/// solution in floating point too. The cyclic case tracks the fill-in of the
/// last column and the last row explicitly instead of using a
/// Sherman–Morrison correction, which would subtract.
pub(crate) fn solve(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
    cyclic: bool,
) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if cyclic {
        solve_cyclic(lower, diag, upper, rhs)
    } else {
        solve_plain(lower, diag, upper, rhs)
    }
}

fn pivot_error(i: usize, p: f64) -> Error {
    Error::Numerical(format!(
        "tridiagonal solve: non-positive pivot {p:e} at row {i}"
    ))
}

fn solve_plain(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut b = diag.to_vec();
    let mut d = rhs.to_vec();
    for i in 1..n {
        if !(b[i - 1] > 0.0) {
            return Err(pivot_error(i - 1, b[i - 1]));
        }
        let l = lower[i] / b[i - 1];
        b[i] -= l * upper[i - 1];
        d[i] -= l * d[i - 1];
    }
    if !(b[n - 1] > 0.0) {
        return Err(pivot_error(n - 1, b[n - 1]));
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1] / b[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (d[i] - upper[i] * x[i + 1]) / b[i];
    }
    Ok(x)
}

fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(n >= 3, "cyclic solve needs at least three unknowns");
    let last = n - 1;

    let mut b = diag[..last].to_vec();
    let mut c = upper[..last].to_vec();
    let mut d = rhs.to_vec();
    // column `last` for rows 0..last
    let mut col = vec![0.0; last];
    col[0] = lower[0];
    col[last - 1] += c[last - 1];
    c[last - 1] = 0.0;
    // row `last` for columns 0..last
    let mut row = vec![0.0; last];
    row[0] = upper[last];
    row[last - 1] += lower[last];
    let mut corner = diag[last];

    for i in 0..last {
        let p = b[i];
        if !(p > 0.0) {
            return Err(pivot_error(i, p));
        }
        if i + 1 < last {
            let l = lower[i + 1] / p;
            b[i + 1] -= l * c[i];
            col[i + 1] -= l * col[i];
            d[i + 1] -= l * d[i];
            let l2 = row[i] / p;
            row[i + 1] -= l2 * c[i];
            corner -= l2 * col[i];
            d[last] -= l2 * d[i];
        } else {
            let l2 = row[i] / p;
            corner -= l2 * col[i];
            d[last] -= l2 * d[i];
        }
    }
    if !(corner > 0.0) {
        return Err(pivot_error(last, corner));
    }

    let mut x = vec![0.0; n];
    x[last] = d[last] / corner;
    for i in (0..last).rev() {
        let next = if i + 1 < last { c[i] * x[i + 1] } else { 0.0 };
        x[i] = (d[i] - next - col[i] * x[last]) / b[i];
    }
    Ok(x)
}
