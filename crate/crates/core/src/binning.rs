//! Uniform coarse graining of one-dimensional densities.
//!
//! A [`BinGrid`] of width `eta` has bin centers `z_j = j * eta`, so bin 0 is
//! always centered on the origin. Bin `j` covers `[(j - 1/2) eta, (j + 1/2) eta]`.
//! [`rect_indicator`] keeps that closed interval; everything that assigns mass
//! to bins uses the half-open `[(j - 1/2) eta, (j + 1/2) eta)` so each point
//! belongs to exactly one bin.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::compensated_sum;

/// Tolerance on `sum(masses) - 1` for a normalized distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Captured mass below which [`coarse_grain`] refuses to renormalize.
pub const DEFAULT_MIN_CAPTURED: f64 = 0.999;

/// Uniform bin lattice with centers at integer multiples of the width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinGrid {
    width: f64,
    j_min: i64,
    j_max: i64,
}

impl BinGrid {
    pub fn new(width: f64, j_min: i64, j_max: i64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid(format!(
                "bin width must be positive and finite, got {width}"
            )));
        }
        if j_min > j_max {
            return Err(invalid(format!("empty index range [{j_min}, {j_max}]")));
        }
        Ok(Self {
            width,
            j_min,
            j_max,
        })
    }

    /// Grid with indices `-half..=half`.
    pub fn symmetric(width: f64, half: i64) -> Result<Self> {
        Self::new(width, -half.abs(), half.abs())
    }

    /// Smallest symmetric grid whose covered interval contains `[-extent, extent]`.
    pub fn covering(width: f64, extent: f64) -> Result<Self> {
        if !(extent.is_finite() && extent >= 0.0) {
            return Err(invalid(format!(
                "extent must be finite and nonnegative, got {extent}"
            )));
        }
        let half = (extent / width - 0.5).ceil().max(0.0) as i64;
        Self::symmetric(width, half)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.j_min..=self.j_max
    }

    pub fn center(&self, j: i64) -> f64 {
        j as f64 * self.width
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.indices().map(move |j| self.center(j))
    }

    pub fn lower_edge(&self, j: i64) -> f64 {
        (j as f64 - 0.5) * self.width
    }

    pub fn upper_edge(&self, j: i64) -> f64 {
        (j as f64 + 0.5) * self.width
    }

    /// Interval covered by the whole grid.
    pub fn span(&self) -> (f64, f64) {
        (self.lower_edge(self.j_min), self.upper_edge(self.j_max))
    }

    /// Bin claiming `z` under the half-open tie-break, if it lies on the grid.
    pub fn index_of(&self, z: f64) -> Option<i64> {
        let j = (z / self.width + 0.5).floor();
        if !j.is_finite() {
            return None;
        }
        let j = j as i64;
        (self.j_min..=self.j_max).contains(&j).then_some(j)
    }

    fn position(&self, j: i64) -> Option<usize> {
        (self.j_min..=self.j_max)
            .contains(&j)
            .then(|| (j - self.j_min) as usize)
    }
}

/// Closed rectangular window: true iff `z` lies in `[(j - 1/2) eta, (j + 1/2) eta]`.
pub fn rect_indicator(j: i64, eta: f64, z: f64) -> Result<bool> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid(format!("window width must be positive, got {eta}")));
    }
    Ok(z >= (j as f64 - 0.5) * eta && z <= (j as f64 + 0.5) * eta)
}

/// Normalized bin masses on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    grid: BinGrid,
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(grid: BinGrid, masses: Vec<f64>) -> Result<Self> {
        check_len(&grid, masses.len())?;
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(invalid(format!(
                "bin masses must be finite and nonnegative, found {m}"
            )));
        }
        let total = compensated_sum(masses.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { grid, masses })
    }

    /// Normalizes nonnegative weights to unit total.
    pub fn from_weights(grid: BinGrid, weights: Vec<f64>) -> Result<Self> {
        check_len(&grid, weights.len())?;
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(invalid(format!(
                "weights must be finite and nonnegative, found {w}"
            )));
        }
        let total = compensated_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(invalid("weights sum to zero"));
        }
        let masses = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { grid, masses })
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Mass of bin `j`; zero off the grid.
    pub fn mass(&self, j: i64) -> f64 {
        self.grid.position(j).map_or(0.0, |p| self.masses[p])
    }

    /// `(center, mass)` pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.centers().zip(self.masses.iter().copied())
    }
}

/// Raw, unnormalized counts per bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountHistogram {
    grid: BinGrid,
    counts: Vec<u64>,
}

// BinGrid holds an f64 but is never NaN (validated in the constructor).
impl Eq for BinGrid {}

impl CountHistogram {
    pub fn new(grid: BinGrid, counts: Vec<u64>) -> Result<Self> {
        check_len(&grid, counts.len())?;
        Ok(Self { grid, counts })
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, j: i64) -> u64 {
        self.grid.position(j).map_or(0, |p| self.counts[p])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn normalize(&self) -> Result<DiscreteDistribution> {
        let total = self.total();
        if total == 0 {
            return Err(invalid(
                "cannot normalize a histogram with zero total counts",
            ));
        }
        let masses = self
            .counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect();
        Ok(DiscreteDistribution {
            grid: self.grid,
            masses,
        })
    }
}

fn check_len(grid: &BinGrid, len: usize) -> Result<()> {
    if grid.len() != len {
        return Err(invalid(format!(
            "grid has {} bins but {} values were given",
            grid.len(),
            len
        )));
    }
    Ok(())
}

/// Piecewise-constant density `mass_k / width` on each bin, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramDensity {
    distribution: DiscreteDistribution,
}

impl HistogramDensity {
    pub fn grid(&self) -> &BinGrid {
        self.distribution.grid()
    }

    pub fn masses(&self) -> &[f64] {
        self.distribution.masses()
    }

    pub fn distribution(&self) -> &DiscreteDistribution {
        &self.distribution
    }

    pub fn width(&self) -> f64 {
        self.distribution.grid().width()
    }

    /// Density value at `z` (half-open bins).
    pub fn value_at(&self, z: f64) -> f64 {
        match self.grid().index_of(z) {
            Some(j) => self.distribution.mass(j) / self.width(),
            None => 0.0,
        }
    }
}

pub fn histogram_density(d: &DiscreteDistribution) -> HistogramDensity {
    HistogramDensity {
        distribution: d.clone(),
    }
}

/// Result of [`coarse_grain`]: the renormalized masses and the fraction of
/// the underlying probability that fell on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrained {
    pub distribution: DiscreteDistribution,
    pub captured: f64,
}

/// Integrates a density over every bin of `grid`.
///
/// `bin_mass` must return the exact probability of an interval `[a, b]`.
/// Fails with [`Error::Truncation`] when the grid captures less than
/// `min_captured` of the total mass.
pub fn coarse_grain<F>(bin_mass: F, grid: &BinGrid, min_captured: f64) -> Result<CoarseGrained>
where
    F: Fn(f64, f64) -> f64,
{
    let raw: Vec<f64> = grid
        .indices()
        .map(|j| bin_mass(grid.lower_edge(j), grid.upper_edge(j)).max(0.0))
        .collect();
    let captured = compensated_sum(raw.iter().copied());
    if captured.is_nan() || captured < min_captured {
        return Err(Error::Truncation {
            captured,
            threshold: min_captured,
        });
    }
    let masses = raw.into_iter().map(|m| m / captured).collect();
    Ok(CoarseGrained {
        distribution: DiscreteDistribution {
            grid: *grid,
            masses,
        },
        captured,
    })
}

/// Odd-factor regrouping that keeps the central bin on the origin.
pub trait Rebin: Sized {
    /// New bin `J` collects the `factor` input bins centered on input index
    /// `J * factor`. Missing input bins count as empty, so totals are
    /// conserved exactly.
    fn rebin(&self, factor: usize) -> Result<Self>;
}

fn rebinned_grid(grid: &BinGrid, factor: usize) -> Result<BinGrid> {
    if factor == 0 || factor.is_multiple_of(2) {
        return Err(invalid(format!(
            "rebin factor must be odd and positive, got {factor}"
        )));
    }
    let f = factor as i64;
    let half = (f - 1) / 2;
    // Smallest/largest J whose group [J f - half, J f + half] touches the input.
    let j_min =
        (grid.j_min() - half).div_euclid(f) + i64::from((grid.j_min() - half).rem_euclid(f) != 0);
    let j_max = (grid.j_max() + half).div_euclid(f);
    BinGrid::new(grid.width() * factor as f64, j_min, j_max)
}

fn regroup<T, S>(grid: &BinGrid, values: &[T], factor: usize, sum: S) -> Result<(BinGrid, Vec<T>)>
where
    T: Copy,
    S: Fn(&[T]) -> T,
{
    let out = rebinned_grid(grid, factor)?;
    let f = factor as i64;
    let half = (f - 1) / 2;
    let grouped = out
        .indices()
        .map(|big| {
            let lo = (big * f - half).max(grid.j_min());
            let hi = (big * f + half).min(grid.j_max());
            let a = (lo - grid.j_min()) as usize;
            let b = (hi - grid.j_min()) as usize;
            sum(&values[a..=b])
        })
        .collect();
    Ok((out, grouped))
}

impl Rebin for CountHistogram {
    fn rebin(&self, factor: usize) -> Result<Self> {
        let (grid, counts) = regroup(&self.grid, &self.counts, factor, |s| s.iter().sum())?;
        Ok(Self { grid, counts })
    }
}

impl Rebin for DiscreteDistribution {
    fn rebin(&self, factor: usize) -> Result<Self> {
        let (grid, masses) = regroup(&self.grid, &self.masses, factor, |s| {
            compensated_sum(s.iter().copied())
        })?;
        Ok(Self { grid, masses })
    }
}
