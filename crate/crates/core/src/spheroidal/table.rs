//! Tabulated `C(gamma)` with cubic interpolation, built once per process.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{coarse_bound, radial_r00, ENTROPIC_CONSTANT};
use crate::error::Result;

/// Tabulation step in `gamma`.
pub const TABLE_STEP: f64 = 1.0 / 32.0;
/// Largest tabulated `gamma`; larger values are evaluated directly.
pub const TABLE_MAX_GAMMA: f64 = 128.0;

/// `R00(gamma / 8, 1)^2` on a uniform `gamma` grid.
#[derive(Debug, Clone)]
pub struct BoundTable {
    r_squared: Vec<f64>,
}

impl BoundTable {
    pub fn build() -> Result<Self> {
        let n = (TABLE_MAX_GAMMA / TABLE_STEP).round() as usize + 1;
        let r_squared = (0..n)
            .map(|i| {
                let r = radial_r00(i as f64 * TABLE_STEP / 8.0, 1.0)?;
                Ok(r * r)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { r_squared })
    }

    /// The process-wide table, or `None` if it could not be built.
    pub fn global() -> Option<&'static BoundTable> {
        static TABLE: OnceLock<Option<BoundTable>> = OnceLock::new();
        TABLE.get_or_init(|| BoundTable::build().ok()).as_ref()
    }

    /// Four-point Lagrange interpolation of `R00^2`; `None` outside the table.
    fn r_squared_at(&self, gamma: f64) -> Option<f64> {
        let n = self.r_squared.len();
        let x = gamma / TABLE_STEP;
        if !(0.0..=(n - 1) as f64).contains(&x) {
            return None;
        }
        let i = (x.floor() as usize).clamp(1, n - 3);
        let t = x - i as f64;
        let f = &self.r_squared[i - 1..i + 3];
        let (tm, t0, t1, t2) = (t + 1.0, t, t - 1.0, t - 2.0);
        Some(
            -f[0] * t0 * t1 * t2 / 6.0 + f[1] * tm * t1 * t2 / 2.0 - f[2] * tm * t0 * t2 / 2.0
                + f[3] * tm * t0 * t1 / 6.0,
        )
    }

    pub fn coarse_bound(&self, gamma: f64) -> Result<f64> {
        match self.r_squared_at(gamma) {
            Some(r2) if gamma > 0.0 => Ok(ENTROPIC_CONSTANT.min(r2 / (4.0 * PI))),
            _ => coarse_bound(gamma),
        }
    }
}

/// `C(gamma)` from the process-wide table, falling back to direct evaluation.
pub fn coarse_bound_cached(gamma: f64) -> Result<f64> {
    match BoundTable::global() {
        Some(t) => t.coarse_bound(gamma),
        None => coarse_bound(gamma),
    }
}
