//! Monte Carlo error propagation: Poisson resampling of counts and Gaussian
//! jitter of bin-center positions, pushed through the whole
//! rebin-normalize-witness pipeline.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::binning::{CountHistogram, Rebin};
use crate::error::{invalid, Error, Result};
use crate::ingest::{global_marginal, JointCounts, OpticalGeometry, VariablePair};
use crate::model::GlobalVariable;
use crate::numeric::sample_std;
use crate::stats::{discrete_entropy, weighted_variance};
use crate::witnesses::{
    evaluate_stats, BinnedStats, GlobalMarginal, Pairing, WitnessId, WitnessReport,
};

/// Fewest replicates accepted for reported errors outside fast mode.
pub const MIN_REPLICATES: usize = 100;
pub const DEFAULT_REPLICATES: usize = 1000;
/// Largest tolerated fraction of discarded (empty) replicates.
pub const MAX_DISCARD_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterMode {
    Off,
    /// Independent offset for every bin center.
    PerBin,
    /// One common offset per marginal.
    Rigid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorModel {
    pub poisson: bool,
    pub jitter: JitterMode,
    pub replicates: usize,
    pub seed: u64,
    /// Allows fewer than [`MIN_REPLICATES`] replicates.
    pub fast: bool,
}

impl ErrorModel {
    pub fn new(seed: u64) -> Self {
        Self {
            poisson: true,
            jitter: JitterMode::PerBin,
            replicates: DEFAULT_REPLICATES,
            seed,
            fast: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min = if self.fast { 2 } else { MIN_REPLICATES };
        if self.replicates < min {
            return Err(invalid(format!(
                "need at least {min} replicates, got {}",
                self.replicates
            )));
        }
        Ok(())
    }
}

/// Bin-center std of the `n`-fold position bin: `m_step sqrt(2) n f1 / f2`.
pub fn position_center_sigma(geometry: &OpticalGeometry, n: usize) -> f64 {
    geometry.micrometer_step_mm * SQRT_2 * n as f64 * geometry.f1_mm / geometry.f2_mm
}

/// Bin-center std of the `m`-fold momentum bin: `m_step sqrt(2) 2 m pi / (f3 lambda)`.
pub fn momentum_center_sigma(geometry: &OpticalGeometry, m: usize) -> f64 {
    geometry.micrometer_step_mm * SQRT_2 * 2.0 * m as f64 * PI
        / (geometry.f3_mm * geometry.lambda_mm)
}

/// One witness evaluation: pairing, rebin factors and witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Cell {
    pub pairing: Pairing,
    pub n: usize,
    pub m: usize,
    pub witness: WitnessId,
}

impl Cell {
    fn position_key(&self) -> (GlobalVariable, usize) {
        (self.pairing.position_variable(), self.n)
    }

    fn momentum_key(&self) -> (GlobalVariable, usize) {
        (self.pairing.momentum_variable(), self.m)
    }
}

/// Base-width count histograms of the four global variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMarginals {
    histograms: [CountHistogram; 4],
    position_geometry: OpticalGeometry,
    momentum_geometry: OpticalGeometry,
}

fn slot(v: GlobalVariable) -> usize {
    match v {
        GlobalVariable::XPlus => 0,
        GlobalVariable::XMinus => 1,
        GlobalVariable::PPlus => 2,
        GlobalVariable::PMinus => 3,
    }
}

impl BaseMarginals {
    pub fn new(position: &JointCounts, momentum: &JointCounts) -> Result<Self> {
        if position.variable_pair() != VariablePair::Position {
            return Err(Error::Config("first scan must be a position scan".into()));
        }
        if momentum.variable_pair() != VariablePair::Momentum {
            return Err(Error::Config("second scan must be a momentum scan".into()));
        }
        let histograms = [
            GlobalVariable::XPlus,
            GlobalVariable::XMinus,
            GlobalVariable::PPlus,
            GlobalVariable::PMinus,
        ]
        .map(|v| {
            let scan = if v.pair() == VariablePair::Position {
                position
            } else {
                momentum
            };
            global_marginal(scan, v.sign())
        });
        Ok(Self {
            histograms,
            position_geometry: *position.geometry(),
            momentum_geometry: *momentum.geometry(),
        })
    }

    pub fn histogram(&self, v: GlobalVariable) -> &CountHistogram {
        &self.histograms[slot(v)]
    }

    fn center_sigma(&self, v: GlobalVariable, factor: usize) -> f64 {
        match v.pair() {
            VariablePair::Position => position_center_sigma(&self.position_geometry, factor),
            VariablePair::Momentum => momentum_center_sigma(&self.momentum_geometry, factor),
        }
    }

    /// Normalized marginal of `v` rebinned by `factor`.
    pub fn marginal(&self, v: GlobalVariable, factor: usize) -> Result<GlobalMarginal> {
        let h = self.histogram(v).rebin(factor)?;
        Ok(GlobalMarginal::new(v, h.normalize()?))
    }
}

/// Witness value for `cell` on the observed counts, without uncertainty.
pub fn evaluate_cell(base: &BaseMarginals, cell: &Cell) -> Result<WitnessReport> {
    let r = base.marginal(cell.pairing.position_variable(), cell.n)?;
    let s = base.marginal(cell.pairing.momentum_variable(), cell.m)?;
    evaluate_stats(
        cell.witness,
        cell.pairing,
        &BinnedStats::of(&r),
        &BinnedStats::of(&s),
    )
}

/// Per-cell standard errors and the number of discarded replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Propagation {
    pub uncertainties: Vec<f64>,
    pub replicates: usize,
    pub discarded: usize,
}

fn resample(h: &CountHistogram, rng: &mut ChaCha8Rng) -> Result<CountHistogram> {
    let counts = h
        .counts()
        .iter()
        .map(|&c| {
            if c == 0 {
                0
            } else {
                Poisson::new(c as f64).expect("positive mean").sample(rng) as u64
            }
        })
        .collect();
    CountHistogram::new(*h.grid(), counts)
}

/// Stats of a rebinned histogram with jittered bin centers; `None` when empty.
fn jittered_stats(
    h: &CountHistogram,
    factor: usize,
    jitter: JitterMode,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<BinnedStats>> {
    let h = h.rebin(factor)?;
    if h.total() == 0 {
        return Ok(None);
    }
    let d = h.normalize()?;
    let offsets: Vec<f64> = match jitter {
        JitterMode::Off => vec![0.0; d.masses().len()],
        JitterMode::PerBin => (0..d.masses().len())
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        JitterMode::Rigid => vec![sigma * rng.sample::<f64, _>(StandardNormal); d.masses().len()],
    };
    let points: Vec<(f64, f64)> = d
        .iter()
        .zip(&offsets)
        .map(|((x, q), e)| (x + e, q))
        .collect();
    Ok(Some(BinnedStats {
        discrete_variance: weighted_variance(&points),
        discrete_entropy: discrete_entropy(&d),
        width: d.grid().width(),
    }))
}

fn replicate(
    base: &BaseMarginals,
    cells: &[Cell],
    em: &ErrorModel,
    index: u64,
) -> Result<Option<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(em.seed);
    rng.set_stream(index);
    let keys: BTreeMap<(usize, usize), GlobalVariable> = cells
        .iter()
        .flat_map(|c| [c.position_key(), c.momentum_key()])
        .map(|(v, f)| ((slot(v), f), v))
        .collect();
    let mut resampled: [Option<CountHistogram>; 4] = Default::default();
    for &(s, _) in keys.keys() {
        if resampled[s].is_none() {
            let h = &base.histograms[s];
            resampled[s] = Some(if em.poisson {
                resample(h, &mut rng)?
            } else {
                h.clone()
            });
        }
    }
    let mut stats = BTreeMap::new();
    for (&(s, factor), &v) in &keys {
        let h = resampled[s].as_ref().expect("resampled above");
        match jittered_stats(h, factor, em.jitter, base.center_sigma(v, factor), &mut rng)? {
            Some(st) => {
                stats.insert((s, factor), st);
            }
            None => return Ok(None),
        }
    }
    cells
        .iter()
        .map(|c| {
            let (rv, rf) = c.position_key();
            let (sv, sf) = c.momentum_key();
            Ok(evaluate_stats(
                c.witness,
                c.pairing,
                &stats[&(slot(rv), rf)],
                &stats[&(slot(sv), sf)],
            )?
            .value)
        })
        .collect::<Result<Vec<f64>>>()
        .map(Some)
}

/// Monte Carlo standard errors of every cell. Replicate `r` draws from
/// `ChaCha8Rng` seeded with `em.seed` on stream `r`, so results do not
/// depend on thread scheduling.
pub fn propagate_cells(
    base: &BaseMarginals,
    cells: &[Cell],
    em: &ErrorModel,
) -> Result<Propagation> {
    em.validate()?;
    let runs = (0..em.replicates as u64)
        .into_par_iter()
        .map(|r| replicate(base, cells, em, r))
        .collect::<Result<Vec<_>>>()?;
    let kept: Vec<Vec<f64>> = runs.into_iter().flatten().collect();
    let discarded = em.replicates - kept.len();
    if discarded as f64 > MAX_DISCARD_FRACTION * em.replicates as f64 || kept.len() < 2 {
        return Err(Error::Propagation {
            discarded,
            replicates: em.replicates,
        });
    }
    let uncertainties = (0..cells.len())
        .map(|i| sample_std(&kept.iter().map(|v| v[i]).collect::<Vec<_>>()))
        .collect();
    Ok(Propagation {
        uncertainties,
        replicates: em.replicates,
        discarded,
    })
}

/// Witness value of `cell` on the observed data, with its Monte Carlo
/// standard error.
pub fn propagate(
    position: &JointCounts,
    momentum: &JointCounts,
    cell: &Cell,
    em: &ErrorModel,
) -> Result<WitnessReport> {
    let base = BaseMarginals::new(position, momentum)?;
    let report = evaluate_cell(&base, cell)?;
    let p = propagate_cells(&base, std::slice::from_ref(cell), em)?;
    Ok(report.with_uncertainty(p.uncertainties[0]))
}
