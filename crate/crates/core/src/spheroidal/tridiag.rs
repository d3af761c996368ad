//! Lowest eigenpair of a real symmetric tridiagonal matrix.

/// Number of eigenvalues strictly below `x` (Sturm sequence of LDL^T pivots).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 {
            d - x
        } else {
            d - x - off[i - 1] * off[i - 1] / q
        };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(T - shift I) x = rhs` for a positive definite shifted matrix.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = diag.len();
    let mut pivots = vec![0.0; n];
    pivots[0] = diag[0] - shift;
    for i in 1..n {
        let l = off[i - 1] / pivots[i - 1];
        pivots[i] = diag[i] - shift - l * off[i - 1];
        rhs[i] -= l * rhs[i - 1];
    }
    rhs[n - 1] /= pivots[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / pivots[i];
    }
}

/// Smallest eigenvalue by bisection, eigenvector by shifted inverse
/// iteration, normalized to unit length with a nonnegative first entry.
///
/// `off[i]` couples rows `i` and `i + 1`.
pub(crate) fn lowest_eigenpair(diag: &[f64], off: &[f64]) -> (f64, Vec<f64>) {
    let n = diag.len();
    debug_assert!(n >= 1 && off.len() + 1 == n);
    if n == 1 {
        return (diag[0], vec![1.0]);
    }
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n)
        .map(|i| diag[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let mut hi = diag[0];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let shift = lo - 1e-9 * scale;
    let mut v = vec![1.0; n];
    for _ in 0..4 {
        solve_shifted(diag, off, shift, &mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    if v[0] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (lambda, v)
}
