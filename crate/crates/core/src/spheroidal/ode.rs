//! Independent route to `chi_00` and `R00(c, 1)` by shooting on the angular
//! equation `(1 - t^2) y'' - 2 t y' + (chi - c^2 t^2) y = 0` on `[0, 1]`.
//!
//! The even solution regular at `t = 1` is matched to the even solution at
//! `t = 0` through their Wronskian at `t = 1/2`, and `R00(c, 1)` follows
//! from `int_0^1 S / S(0)`.

use crate::error::{Error, Result};

/// Largest bandwidth accepted by the shooting route.
pub const MAX_SHOOTING_BANDWIDTH: f64 = 50.0;

const MATCH: f64 = 0.5;
const SERIES_OFFSET: f64 = 0.05;

/// `(y, y', int y)` along the integration direction.
type State = [f64; 3];

struct Shooter {
    c2: f64,
    steps: usize,
}

struct Match {
    mismatch: f64,
    // Integral of the origin solution over [0, MATCH], of the endpoint
    // solution over [MATCH, 1], and their values at MATCH.
    left_integral: f64,
    right_integral: f64,
    left_value: f64,
    right_value: f64,
}

impl Shooter {
    fn deriv(&self, chi: f64, t: f64, s: &State) -> State {
        let (y, dy) = (s[0], s[1]);
        let d2y = (2.0 * t * dy - (chi - self.c2 * t * t) * y) / (1.0 - t * t);
        [dy, d2y, y]
    }

    fn rk4(&self, chi: f64, t0: f64, t1: f64, mut s: State) -> State {
        let h = (t1 - t0) / self.steps as f64;
        for i in 0..self.steps {
            let t = t0 + i as f64 * h;
            let k1 = self.deriv(chi, t, &s);
            let k2 = self.deriv(chi, t + 0.5 * h, &add(&s, &k1, 0.5 * h));
            let k3 = self.deriv(chi, t + 0.5 * h, &add(&s, &k2, 0.5 * h));
            let k4 = self.deriv(chi, t + h, &add(&s, &k3, h));
            for j in 0..3 {
                s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        s
    }

    /// Frobenius series of the regular solution in `u = 1 - t`, `y(1) = 1`:
    /// returns `(y, dy/du, int_0^u y)` at `u`.
    fn endpoint_series(&self, chi: f64, u: f64) -> (f64, f64, f64) {
        let c2 = self.c2;
        let mut a = [1.0, 0.0, 0.0]; // a_k, a_{k-1}, a_{k-2}
        let (mut y, mut dy, mut int) = (1.0, 0.0, u);
        let mut pow = 1.0; // u^k
        for k in 0..400usize {
            let kf = k as f64;
            let next = ((kf * (kf + 1.0) - (chi - c2)) * a[0] - 2.0 * c2 * a[1] + c2 * a[2])
                / (2.0 * (kf + 1.0) * (kf + 1.0));
            dy += (kf + 1.0) * next * pow;
            pow *= u;
            let term = next * pow;
            y += term;
            int += term * u / (kf + 2.0);
            a = [next, a[0], a[1]];
            if k > 8 && term.abs() < 1e-18 * y.abs() && (a[1] * pow).abs() < 1e-18 * y.abs() {
                break;
            }
        }
        (y, dy, int)
    }

    fn shoot(&self, chi: f64) -> Match {
        let left = self.rk4(chi, 0.0, MATCH, [1.0, 0.0, 0.0]);
        let (y, dy_du, series_int) = self.endpoint_series(chi, SERIES_OFFSET);
        let right = self.rk4(chi, 1.0 - SERIES_OFFSET, MATCH, [y, -dy_du, 0.0]);
        Match {
            mismatch: left[0] * right[1] - left[1] * right[0],
            left_integral: left[2],
            right_integral: series_int - right[2],
            left_value: left[0],
            right_value: right[0],
        }
    }
}

fn add(s: &State, k: &State, h: f64) -> State {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]]
}

/// Result of the shooting route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingSolution {
    pub chi: f64,
    pub r00: f64,
}

/// `chi_00(c)` and `R00(c, 1)` for `0 <= c <= MAX_SHOOTING_BANDWIDTH`.
pub fn solve_shooting(c: f64) -> Result<ShootingSolution> {
    if !(c.is_finite() && (0.0..=MAX_SHOOTING_BANDWIDTH).contains(&c)) {
        return Err(Error::OutOfRange(format!(
            "shooting route needs 0 <= c <= {MAX_SHOOTING_BANDWIDTH}, got {c}"
        )));
    }
    if c == 0.0 {
        return Ok(ShootingSolution { chi: 0.0, r00: 1.0 });
    }
    let shooter = Shooter {
        c2: c * c,
        steps: (400.0 * c).max(4000.0) as usize,
    };
    let d = |chi: f64| shooter.shoot(chi).mismatch;

    // The constant trial function bounds chi_00 by c^2 / 3; scan up to it
    // for the first sign change.
    let hi = c * c / 3.0;
    let pieces = 64;
    let mut bracket = None;
    let (mut a, mut fa) = (0.0, d(0.0));
    for i in 1..=pieces {
        let b = hi * i as f64 / pieces as f64;
        let fb = d(b);
        if fa == 0.0 {
            bracket = Some((a, a, fa, fa));
            break;
        }
        if fa.signum() != fb.signum() {
            bracket = Some((a, b, fa, fb));
            break;
        }
        (a, fa) = (b, fb);
    }
    let (mut a, mut b, mut fa, mut fb) = bracket.ok_or_else(|| Error::Convergence {
        what: "shooting",
        detail: format!("no sign change of the mismatch on [0, {hi}] at c = {c}"),
    })?;

    // Illinois regula falsi.
    let mut converged = a == b;
    for _ in 0..200 {
        if converged {
            break;
        }
        let x = b - fb * (b - a) / (fb - fa);
        let fx = d(x);
        if fx == 0.0 {
            (a, b, fa, fb) = (x, x, fx, fx);
            converged = true;
            break;
        }
        if fx.signum() != fb.signum() {
            (a, fa) = (b, fb);
        } else {
            fa *= 0.5;
        }
        (b, fb) = (x, fx);
        converged = (b - a).abs() <= 1e-15 * b.abs().max(1e-300);
    }
    if !converged {
        return Err(Error::Convergence {
            what: "shooting",
            detail: format!("regula falsi stalled at c = {c}"),
        });
    }
    let chi = if fa.abs() < fb.abs() { a } else { b };
    let m = shooter.shoot(chi);
    let r00 = m.left_integral + m.left_value / m.right_value * m.right_integral;
    Ok(ShootingSolution { chi, r00 })
}
