//! Spherical Bessel functions of the first kind, `j_0 .. j_n`.

/// `j_k(x)` for `k = 0..=n_max`, `x >= 0`, by Miller's downward recurrence
/// normalized against the closed forms of `j_0` or `j_1`.
pub(crate) fn spherical_jn(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let reach = (n_max as f64).max(x);
    let start = (reach + 30.0 + 10.0 * reach.sqrt()).ceil() as usize;
    let mut next = 0.0; // j_{k+1}
    let mut cur = 1e-300; // j_k
    for k in (1..=start).rev() {
        let prev = (2 * k + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 <= n_max {
            out[k - 1] = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let j0 = x.sin() / x;
    let j1 = if x < 1e-2 {
        let x2 = x * x;
        x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0))
    } else {
        (x.sin() / x - x.cos()) / x
    };
    // `next` now holds the unnormalized j_1.
    let scale = if j0.abs() >= j1.abs() {
        j0 / out[0]
    } else {
        j1 / next
    };
    out.iter_mut().for_each(|v| *v *= scale);
    out
}
