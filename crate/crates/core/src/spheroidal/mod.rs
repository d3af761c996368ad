//! Radial prolate spheroidal function `R00(c, xi)` and the coarse-graining
//! bound `C(gamma) = min{1 / (2 e pi), R00(gamma / 8, 1)^2 / (4 pi)}`.
//!
//! `R00` uses the Flammer normalization, `R00(c, xi) ~ sin(c xi) / (c xi)` as
//! `xi -> infinity`, so `R00(0, 1) = 1`. It is evaluated from the Legendre
//! expansion `S00(c, t) = sum' d_k P_k(t)` of the angular function over even
//! `k`. The `d_k` come from a symmetric tridiagonal eigenproblem whose lowest
//! eigenvalue is the characteristic value `chi_00(c)`.
//!
//! At `xi = 1`, `R00(c, 1) = d_0 / S00(c, 0)`, the `t = 0` case of the finite
//! Fourier transform eigen-equation. For `xi > 1` the Bessel series
//! `R00(c, xi) = sum' (-1)^(k/2) d_k j_k(c xi) / sum' d_k` is used; its
//! normalizer `S00(c, 1)` decays like `exp(-c)` relative to the terms, so it
//! loses digits as `c` grows and is not used at `xi = 1`.
//!
//! [`ode::solve_shooting`] is an independent route used to cross-check.

mod bessel;
pub mod ode;
mod table;
mod tridiag;

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};

pub use table::{coarse_bound_cached, BoundTable};

/// Largest bandwidth `c` accepted.
pub const MAX_BANDWIDTH: f64 = 1e4;
/// Largest Legendre truncation, in even-order terms.
pub const MAX_TERMS: usize = 2048;
/// `1 / (2 e pi)`, the small-`gamma` branch of `C`.
pub const ENTROPIC_CONSTANT: f64 = 1.0 / (2.0 * E * PI);

const MIN_TERMS: usize = 8;
const CHI_TOLERANCE: f64 = 1e-13;
const TAIL_TOLERANCE: f64 = 1e-14;

/// Characteristic value and Legendre coefficients of `S00(c, .)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpheroidalCharacteristic {
    pub c: f64,
    pub chi: f64,
    /// `d_0, d_2, d_4, ...` with `d_0 > 0`, scaled so the orthonormal-basis
    /// coefficient vector has unit length.
    pub coefficients: Vec<f64>,
}

impl SpheroidalCharacteristic {
    /// `sum' d_k P_k(t)`.
    pub fn angular(&self, t: f64) -> f64 {
        // Legendre recurrence over all orders, keeping the even ones.
        let (mut p_prev, mut p) = (0.0, 1.0);
        let mut acc = 0.0;
        for (i, d) in self.coefficients.iter().enumerate() {
            let k = 2 * i;
            acc += d * p;
            for n in [k, k + 1] {
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0) * t * p - nf * p_prev) / (nf + 1.0);
                p_prev = p;
                p = next;
            }
        }
        acc
    }
}

fn check_bandwidth(c: f64) -> Result<()> {
    if c.is_nan() || c < 0.0 {
        return Err(invalid(format!("bandwidth c must be nonnegative, got {c}")));
    }
    if c > MAX_BANDWIDTH {
        return Err(Error::OutOfRange(format!(
            "bandwidth c = {c} exceeds {MAX_BANDWIDTH}"
        )));
    }
    Ok(())
}

fn legendre_system(c: f64, terms: usize) -> (Vec<f64>, Vec<f64>) {
    let c2 = c * c;
    let diag = (0..terms)
        .map(|i| {
            let k = (2 * i) as f64;
            k * (k + 1.0) + c2 * (2.0 * k * (k + 1.0) - 1.0) / ((2.0 * k - 1.0) * (2.0 * k + 3.0))
        })
        .collect();
    let off = (0..terms - 1)
        .map(|i| {
            let k = (2 * i) as f64;
            c2 * (k + 1.0) * (k + 2.0)
                / ((2.0 * k + 3.0) * ((2.0 * k + 1.0) * (2.0 * k + 5.0)).sqrt())
        })
        .collect();
    (diag, off)
}

/// Lowest characteristic value `chi_00(c)` and its Legendre coefficients,
/// with the truncation doubled until `chi` is stable and the tail is
/// negligible.
pub fn characteristic_value(c: f64) -> Result<SpheroidalCharacteristic> {
    check_bandwidth(c)?;
    if c == 0.0 {
        return Ok(SpheroidalCharacteristic {
            c,
            chi: 0.0,
            coefficients: vec![1.0],
        });
    }
    let solve = |terms: usize| {
        let (diag, off) = legendre_system(c, terms);
        tridiag::lowest_eigenpair(&diag, &off)
    };
    let mut terms = MIN_TERMS.max((c as usize) / 2 + 8);
    let (mut chi, _) = solve(terms.min(MAX_TERMS));
    while terms < MAX_TERMS {
        terms = (2 * terms).min(MAX_TERMS);
        let (next_chi, next_v) = solve(terms);
        let lead = next_v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tail = next_v[next_v.len() / 2..]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let stable = (next_chi - chi).abs() < CHI_TOLERANCE * chi.abs().max(1.0);
        chi = next_chi;
        if stable && tail < TAIL_TOLERANCE * lead {
            let coefficients = next_v
                .iter()
                .enumerate()
                .map(|(i, x)| x * ((4 * i + 1) as f64 / 2.0).sqrt())
                .collect();
            return Ok(SpheroidalCharacteristic {
                c,
                chi,
                coefficients,
            });
        }
    }
    Err(Error::Convergence {
        what: "spheroidal characteristic value",
        detail: format!("not converged with {MAX_TERMS} terms at c = {c}"),
    })
}

/// Radial prolate spheroidal function of the first kind `R00(c, xi)`, `xi >= 1`.
pub fn radial_r00(c: f64, xi: f64) -> Result<f64> {
    if !(xi.is_finite() && xi >= 1.0) {
        return Err(invalid(format!(
            "radial coordinate must satisfy xi >= 1, got {xi}"
        )));
    }
    let ch = characteristic_value(c)?;
    Ok(radial_from(&ch, xi))
}

fn radial_from(ch: &SpheroidalCharacteristic, xi: f64) -> f64 {
    if xi == 1.0 {
        return ch.coefficients[0] / ch.angular(0.0);
    }
    bessel_series(ch, xi)
}

fn bessel_series(ch: &SpheroidalCharacteristic, xi: f64) -> f64 {
    let d = &ch.coefficients;
    let j = bessel::spherical_jn(2 * (d.len() - 1), ch.c * xi);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, dk) in d.iter().enumerate() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        num += sign * dk * j[2 * i];
        den += dk;
    }
    num / den
}

/// Largest eigenvalue of the time-and-band-limiting operator,
/// `lambda_0(c) = (2c / pi) R00(c, 1)^2`.
pub fn concentration_eigenvalue(c: f64) -> Result<f64> {
    let r = radial_r00(c, 1.0)?;
    Ok(2.0 * c / PI * r * r)
}

/// `C(gamma)` by direct evaluation; `gamma` is the product of the momentum
/// and position bin widths.
pub fn coarse_bound(gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(ENTROPIC_CONSTANT);
    }
    let r = radial_r00(gamma / 8.0, 1.0)?;
    Ok(ENTROPIC_CONSTANT.min(r * r / (4.0 * PI)))
}

/// The `gamma` above which the spheroidal branch of `C` is the smaller one,
/// i.e. `R00(gamma / 8, 1) = sqrt(2 / e)`.
pub fn crossover_gamma() -> f64 {
    static CROSSOVER: OnceLock<f64> = OnceLock::new();
    *CROSSOVER.get_or_init(|| {
        let target = 2.0 / E;
        let g = |gamma: f64| {
            let r =
                radial_r00(gamma / 8.0, 1.0).expect("bandwidth well inside the supported range");
            r * r - target
        };
        let (mut lo, mut hi) = (1.0, 40.0);
        debug_assert!(g(lo) > 0.0 && g(hi) < 0.0);
        while hi - lo > 1e-13 * hi {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}
