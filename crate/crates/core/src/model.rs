//! Pure Gaussian two-photon state, its exact global-variable marginals and
//! synthetic coincidence data.
//!
//! The momentum amplitude is
//! `A exp(-p+^2 / (4 s+^2)) exp(-p-^2 / (4 s-^2))` with `p± = p1 ± p2`,
//! so `p±` are Gaussian with std `s±` and, with `[x±, p±] = 2i`, the
//! conjugate `x±` are Gaussian with std `1 / s±`.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::binning::{BinGrid, CountHistogram, DEFAULT_MIN_CAPTURED};
use crate::error::{invalid, Error, Result};
use crate::ingest::{detector_to_source_scale, JointCounts, OpticalGeometry, Sign, VariablePair};
use crate::numeric::{integrate_adaptive, std_normal_cdf, std_normal_mass};

/// Stds outside `[SIGMA_MIN, SIGMA_MAX]` are rejected as degenerate.
pub const SIGMA_MIN: f64 = 1e-100;
pub const SIGMA_MAX: f64 = 1e100;

/// Largest synthetic scan side, in cells.
pub const MAX_SCAN_SIDE: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GlobalVariable {
    #[serde(rename = "x+")]
    XPlus,
    #[serde(rename = "x-")]
    XMinus,
    #[serde(rename = "p+")]
    PPlus,
    #[serde(rename = "p-")]
    PMinus,
}

impl GlobalVariable {
    pub fn new(pair: VariablePair, sign: Sign) -> Self {
        match (pair, sign) {
            (VariablePair::Position, Sign::Plus) => GlobalVariable::XPlus,
            (VariablePair::Position, Sign::Minus) => GlobalVariable::XMinus,
            (VariablePair::Momentum, Sign::Plus) => GlobalVariable::PPlus,
            (VariablePair::Momentum, Sign::Minus) => GlobalVariable::PMinus,
        }
    }

    pub fn pair(self) -> VariablePair {
        match self {
            GlobalVariable::XPlus | GlobalVariable::XMinus => VariablePair::Position,
            GlobalVariable::PPlus | GlobalVariable::PMinus => VariablePair::Momentum,
        }
    }

    pub fn sign(self) -> Sign {
        match self {
            GlobalVariable::XPlus | GlobalVariable::PPlus => Sign::Plus,
            GlobalVariable::XMinus | GlobalVariable::PMinus => Sign::Minus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GlobalVariable::XPlus => "x+",
            GlobalVariable::XMinus => "x-",
            GlobalVariable::PPlus => "p+",
            GlobalVariable::PMinus => "p-",
        }
    }
}

impl fmt::Display for GlobalVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A zero-mean (for this family) Gaussian marginal of one global variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalSpec {
    pub variable: GlobalVariable,
    pub mean: f64,
    pub std: f64,
}

impl MarginalSpec {
    /// Exact probability of `[a, b]`.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(invalid(format!("invalid interval [{a}, {b}]")));
        }
        Ok(std_normal_mass(
            (a - self.mean) / self.std,
            (b - self.mean) / self.std,
        ))
    }

    pub fn cdf(&self, z: f64) -> f64 {
        std_normal_cdf((z - self.mean) / self.std)
    }

    pub fn pdf(&self, z: f64) -> f64 {
        let u = (z - self.mean) / self.std;
        (-0.5 * u * u).exp() / (self.std * (2.0 * PI).sqrt())
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }

    /// Differential entropy `ln(std sqrt(2 pi e))` in nats.
    pub fn entropy(&self) -> f64 {
        0.5 * (2.0 * PI * std::f64::consts::E).ln() + self.std.ln()
    }
}

/// Interval-mass function for `binning::coarse_grain`.
///
/// Panics on a reversed interval; use [`MarginalSpec::interval_mass`] for a
/// checked call.
pub fn bin_mass_oracle(m: MarginalSpec) -> impl Fn(f64, f64) -> f64 {
    move |a, b| m.interval_mass(a, b).expect("bin edges are ordered")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianTwoPhotonState {
    sigma_plus: f64,
    sigma_minus: f64,
}

impl GaussianTwoPhotonState {
    pub fn new(sigma_plus: f64, sigma_minus: f64) -> Result<Self> {
        for (name, s) in [("sigma_plus", sigma_plus), ("sigma_minus", sigma_minus)] {
            if !(s.is_finite() && (SIGMA_MIN..=SIGMA_MAX).contains(&s)) {
                return Err(invalid(format!(
                    "{name} must lie in [{SIGMA_MIN:e}, {SIGMA_MAX:e}], got {s}"
                )));
            }
        }
        Ok(Self {
            sigma_plus,
            sigma_minus,
        })
    }

    pub fn sigma_plus(&self) -> f64 {
        self.sigma_plus
    }

    pub fn sigma_minus(&self) -> f64 {
        self.sigma_minus
    }

    /// `|A|^2` of the momentum joint density in `(p1, p2)`.
    pub fn normalization(&self) -> f64 {
        1.0 / (PI * self.sigma_plus * self.sigma_minus)
    }

    /// `|Psi(p1, p2)|^2`.
    pub fn momentum_density(&self, p1: f64, p2: f64) -> f64 {
        let (u, v) = ((p1 + p2) / self.sigma_plus, (p1 - p2) / self.sigma_minus);
        self.normalization() * (-0.5 * (u * u + v * v)).exp()
    }

    pub fn marginal(&self, variable: GlobalVariable) -> MarginalSpec {
        let std = match variable {
            GlobalVariable::PPlus => self.sigma_plus,
            GlobalVariable::PMinus => self.sigma_minus,
            GlobalVariable::XPlus => 1.0 / self.sigma_plus,
            GlobalVariable::XMinus => 1.0 / self.sigma_minus,
        };
        MarginalSpec {
            variable,
            mean: 0.0,
            std,
        }
    }

    /// Stds of the `+` and `-` global variables of one conjugate pair.
    pub fn global_stds(&self, pair: VariablePair) -> (f64, f64) {
        let plus = self.marginal(GlobalVariable::new(pair, Sign::Plus)).std;
        let minus = self.marginal(GlobalVariable::new(pair, Sign::Minus)).std;
        (plus, minus)
    }
}

/// `[x+, x-, p+, p-]` marginals.
pub fn exact_marginals(state: &GaussianTwoPhotonState) -> [MarginalSpec; 4] {
    [
        GlobalVariable::XPlus,
        GlobalVariable::XMinus,
        GlobalVariable::PPlus,
        GlobalVariable::PMinus,
    ]
    .map(|v| state.marginal(v))
}

/// Within the family, the state is a product state iff `s+ = s-`.
pub fn classify_separable(state: &GaussianTwoPhotonState) -> bool {
    let (a, b) = (state.sigma_plus, state.sigma_minus);
    (a - b).abs() <= 1e-12 * a.max(b)
}

/// Parameters of a synthetic scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingPlan {
    pub total_expected_counts: f64,
    pub seed: u64,
    /// Scan half-width in cells; `None` picks one covering about 8 per-photon stds.
    pub half_cells: Option<usize>,
}

impl SamplingPlan {
    pub fn new(total_expected_counts: f64, seed: u64) -> Self {
        Self {
            total_expected_counts,
            seed,
            half_cells: None,
        }
    }
}

/// Exact probability of every scan cell, row-major, for a `(2h+1)^2` scan
/// centered on index 0.
///
/// Cell `(i, j)` is the detector-1 / detector-2 square of side `a` centered
/// at `(i a, j a)` in source units, where `a` is the base global bin width.
/// In `(z+, z-)` it is a diamond of half-diagonal `a` centered at
/// `((i + j) a, (i - j) a)`, and the density factorizes there.
pub fn joint_cell_masses(
    state: &GaussianTwoPhotonState,
    geometry: &OpticalGeometry,
    pair: VariablePair,
    half_cells: usize,
) -> Result<Vec<f64>> {
    geometry.validate()?;
    let side = 2 * half_cells + 1;
    if side > MAX_SCAN_SIDE {
        return Err(invalid(format!(
            "scan of {side} cells per side exceeds {MAX_SCAN_SIDE}"
        )));
    }
    let a = detector_to_source_scale(geometry, pair);
    let plus = state.marginal(GlobalVariable::new(pair, Sign::Plus));
    let minus = state.marginal(GlobalVariable::new(pair, Sign::Minus));
    // Integrate over the narrower variable so the outer integrand is the peaked one.
    let (outer, inner) = if plus.std <= minus.std {
        (plus, minus)
    } else {
        (minus, plus)
    };
    let h = half_cells as i64;
    let masses: Vec<f64> = (0..side * side)
        .into_par_iter()
        .map(|cell| {
            let i = (cell / side) as i64 - h;
            let j = (cell % side) as i64 - h;
            let (c_plus, c_minus) = ((i + j) as f64 * a, (i - j) as f64 * a);
            let (c_out, c_in) = if plus.std <= minus.std {
                (c_plus, c_minus)
            } else {
                (c_minus, c_plus)
            };
            diamond_mass(&outer, &inner, c_out, c_in, a)
        })
        .collect();
    Ok(masses)
}

fn diamond_mass(outer: &MarginalSpec, inner: &MarginalSpec, c_out: f64, c_in: f64, a: f64) -> f64 {
    // Skip cells whose bounding box holds negligible mass.
    let box_mass = std_normal_mass((c_out - a) / outer.std, (c_out + a) / outer.std)
        * std_normal_mass((c_in - a) / inner.std, (c_in + a) / inner.std);
    if box_mass < 1e-300 {
        return 0.0;
    }
    let f = |u: f64| {
        let half = a - u.abs();
        let window = std_normal_mass((c_in - half) / inner.std, (c_in + half) / inner.std);
        outer.pdf(c_out + u) * window
    };
    let tol = 1e-15 + 1e-12 * box_mass;
    integrate_adaptive(&f, -a, 0.0, tol) + integrate_adaptive(&f, 0.0, a, tol)
}

/// Poisson-sampled coincidence scan of `state` at `geometry`.
pub fn sample_joint_counts(
    state: &GaussianTwoPhotonState,
    geometry: &OpticalGeometry,
    pair: VariablePair,
    plan: &SamplingPlan,
) -> Result<JointCounts> {
    geometry.validate()?;
    let total = plan.total_expected_counts;
    if !(total.is_finite() && total > 0.0) {
        return Err(invalid(format!(
            "total expected counts must be positive, got {total}"
        )));
    }
    let a = detector_to_source_scale(geometry, pair);
    let half = match plan.half_cells {
        Some(h) => h,
        None => {
            let (sp, sm) = state.global_stds(pair);
            let per_photon = 0.5 * (sp * sp + sm * sm).sqrt();
            let h = (8.0 * per_photon / a).ceil() + 1.0;
            if h > (MAX_SCAN_SIDE / 2) as f64 {
                return Err(invalid(format!(
                    "state too broad for the {pair} scan: needs {h} cells per half-side"
                )));
            }
            h as usize
        }
    };
    let masses = joint_cell_masses(state, geometry, pair, half)?;
    let captured: f64 = masses.iter().sum();
    if captured < DEFAULT_MIN_CAPTURED {
        return Err(Error::Truncation {
            captured,
            threshold: DEFAULT_MIN_CAPTURED,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut counts = Vec::with_capacity(masses.len());
    for m in masses {
        let lambda = total * m;
        let k = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| invalid(format!("Poisson mean {lambda}: {e}")))?
                .sample(&mut rng) as u64
        } else {
            0
        };
        counts.push(k);
    }
    let step = match pair {
        VariablePair::Position => geometry.s_x_mm,
        VariablePair::Momentum => geometry.s_p_mm,
    };
    let side = 2 * half + 1;
    let origin = -(half as i64);
    JointCounts::new(
        pair,
        step,
        *geometry,
        side,
        side,
        counts,
        Some((origin, origin)),
    )
}

/// Independent Poisson counts on `grid` with means `total * mass`; a
/// stand-in for a measured one-dimensional marginal.
pub fn sample_marginal_counts(
    m: &MarginalSpec,
    grid: &BinGrid,
    total: f64,
    seed: u64,
) -> Result<CountHistogram> {
    if !(total.is_finite() && total > 0.0) {
        return Err(invalid(format!(
            "total expected counts must be positive, got {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(grid.len());
    for j in grid.indices() {
        let lambda = total * m.interval_mass(grid.lower_edge(j), grid.upper_edge(j))?;
        counts.push(if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| invalid(format!("Poisson mean {lambda}: {e}")))?
                .sample(&mut rng) as u64
        } else {
            0
        });
    }
    CountHistogram::new(*grid, counts)
}
