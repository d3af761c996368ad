//! Entanglement witnesses for continuous-variable systems measured with
//! finite-resolution detectors.
//!
//! The crate is organised bottom-up:
//!
//! - [`binning`]: uniform bin grids, coarse graining of a density into bin
//!   masses, odd-factor rebinning and piecewise-constant histogram densities.
//! - [`stats`]: variances and Shannon entropies of bin masses and of the
//!   histogram densities built from them.
//! - [`model`]: the two-parameter Gaussian two-photon state, its exact
//!   global-variable marginals and a synthetic coincidence-count generator.
//! - [`spheroidal`]: the radial prolate spheroidal function `R00(c, 1)` and
//!   the coarse-graining bound `C(gamma)` used by the entropic witness.
//! - [`witnesses`]: continuous, coarse-grained and naive (unsafe) criteria.
//! - [`ingest`]: joint-count files, optical unit conversion and
//!   global-variable marginals.
//! - [`uncertainty`]: Monte Carlo error propagation.
//! - [`sweep`]: bin-size sweeps over measured or simulated data.
//!
//! All witness values follow one sign convention: left-hand side minus the
//! separable bound, so a negative value means entanglement was detected.

#![forbid(unsafe_code)]

pub mod binning;
mod error;
pub mod ingest;
pub mod model;
mod numeric;
pub mod spheroidal;
pub mod stats;
pub mod sweep;
pub mod uncertainty;
pub mod witnesses;

pub use binning::{BinGrid, CountHistogram, DiscreteDistribution, HistogramDensity};
pub use error::{Error, Result};
pub use ingest::{JointCounts, OpticalGeometry, Sign, VariablePair};
pub use model::{GaussianTwoPhotonState, GlobalVariable, MarginalSpec};
pub use stats::SummaryStat;
pub use sweep::{SweepConfig, SweepResult, SweepRow};
pub use uncertainty::{ErrorModel, JitterMode};
pub use witnesses::{GlobalMarginal, Pairing, WitnessId, WitnessReport};
