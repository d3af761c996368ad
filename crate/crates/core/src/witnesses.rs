//! Entanglement witnesses. Every value is left-hand side minus separable
//! bound, so a negative value signals entanglement.
//!
//! The coarse-grained witnesses hold for any bin widths. The naive discrete
//! witness evaluates the continuous variance criterion on bin masses alone
//! and can report entanglement for separable states; it is kept only to
//! demonstrate that failure.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::binning::{histogram_density, DiscreteDistribution, HistogramDensity};
use crate::error::{invalid, Error, Result};
use crate::ingest::{Sign, VariablePair};
use crate::model::GlobalVariable;
use crate::spheroidal::coarse_bound_cached;
use crate::stats::{discrete_entropy, discrete_variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessId {
    MgvtContinuous,
    EntropicContinuous,
    CoarseVariance,
    CoarseEntropic,
    NaiveDiscrete,
}

impl WitnessId {
    pub const ALL: [WitnessId; 5] = [
        WitnessId::MgvtContinuous,
        WitnessId::EntropicContinuous,
        WitnessId::CoarseVariance,
        WitnessId::CoarseEntropic,
        WitnessId::NaiveDiscrete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WitnessId::MgvtContinuous => "mgvt_continuous",
            WitnessId::EntropicContinuous => "entropic_continuous",
            WitnessId::CoarseVariance => "coarse_variance",
            WitnessId::CoarseEntropic => "coarse_entropic",
            WitnessId::NaiveDiscrete => "naive_discrete",
        }
    }

    /// True for the witness that can report entanglement of separable states.
    pub fn is_unsafe(self) -> bool {
        self == WitnessId::NaiveDiscrete
    }
}

impl fmt::Display for WitnessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WitnessId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WitnessId::ALL
            .into_iter()
            .find(|w| w.as_str() == s.trim())
            .ok_or_else(|| invalid(format!("unknown witness {s:?}")))
    }
}

/// Which global variables are combined: `(R+, S-)` or `(R-, S+)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Pairing {
    #[serde(rename = "pm")]
    PlusMinus,
    #[serde(rename = "mp")]
    MinusPlus,
}

impl Pairing {
    pub const BOTH: [Pairing; 2] = [Pairing::PlusMinus, Pairing::MinusPlus];

    pub fn as_str(self) -> &'static str {
        match self {
            Pairing::PlusMinus => "pm",
            Pairing::MinusPlus => "mp",
        }
    }

    pub fn position_sign(self) -> Sign {
        match self {
            Pairing::PlusMinus => Sign::Plus,
            Pairing::MinusPlus => Sign::Minus,
        }
    }

    pub fn momentum_sign(self) -> Sign {
        self.position_sign().opposite()
    }

    pub fn position_variable(self) -> GlobalVariable {
        GlobalVariable::new(VariablePair::Position, self.position_sign())
    }

    pub fn momentum_variable(self) -> GlobalVariable {
        GlobalVariable::new(VariablePair::Momentum, self.momentum_sign())
    }

    /// The pairing formed by a position variable and a momentum variable of
    /// opposite sign.
    pub fn from_variables(r: GlobalVariable, s: GlobalVariable) -> Result<Pairing> {
        if r.pair() != VariablePair::Position || s.pair() != VariablePair::Momentum {
            return Err(Error::InvalidPairing(format!(
                "expected (position, momentum) variables, got ({r}, {s})"
            )));
        }
        match (r.sign(), s.sign()) {
            (Sign::Plus, Sign::Minus) => Ok(Pairing::PlusMinus),
            (Sign::Minus, Sign::Plus) => Ok(Pairing::MinusPlus),
            _ => Err(Error::InvalidPairing(format!(
                "{r} must be paired with a momentum variable of opposite sign, got {s}"
            ))),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pm" | "+-" => Ok(Pairing::PlusMinus),
            "mp" | "-+" => Ok(Pairing::MinusPlus),
            other => Err(invalid(format!("unknown pairing {other:?}"))),
        }
    }
}

/// Bin masses of one global variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalMarginal {
    variable: GlobalVariable,
    distribution: DiscreteDistribution,
}

impl GlobalMarginal {
    pub fn new(variable: GlobalVariable, distribution: DiscreteDistribution) -> Self {
        Self {
            variable,
            distribution,
        }
    }

    pub fn variable(&self) -> GlobalVariable {
        self.variable
    }

    pub fn distribution(&self) -> &DiscreteDistribution {
        &self.distribution
    }

    pub fn width(&self) -> f64 {
        self.distribution.grid().width()
    }

    pub fn histogram(&self) -> HistogramDensity {
        histogram_density(&self.distribution)
    }
}

/// The statistics a witness was evaluated from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessInputs {
    /// Variance or entropy of the position-type marginal.
    pub position: f64,
    /// Variance or entropy of the momentum-type marginal.
    pub momentum: f64,
    /// The separable bound subtracted from the left-hand side.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub witness: WitnessId,
    pub pairing: Option<Pairing>,
    pub value: f64,
    pub inputs: WitnessInputs,
    /// `(position width, momentum width)` for binned witnesses.
    pub bin_widths: Option<(f64, f64)>,
    pub uncertainty: Option<f64>,
    /// Set for witnesses that can report entanglement of separable states.
    #[serde(rename = "unsafe")]
    pub unsafe_flag: bool,
}

impl WitnessReport {
    fn new(witness: WitnessId, position: f64, momentum: f64, lhs: f64, bound: f64) -> Result<Self> {
        let value = lhs - bound;
        if !value.is_finite() {
            return Err(invalid(format!(
                "{witness} evaluated to a non-finite value from ({position}, {momentum})"
            )));
        }
        Ok(Self {
            witness,
            pairing: None,
            value,
            inputs: WitnessInputs {
                position,
                momentum,
                bound,
            },
            bin_widths: None,
            uncertainty: None,
            unsafe_flag: witness.is_unsafe(),
        })
    }

    pub fn with_pairing(mut self, pairing: Pairing) -> Self {
        self.pairing = Some(pairing);
        self
    }

    pub fn with_uncertainty(mut self, sigma: f64) -> Self {
        self.uncertainty = Some(sigma);
        self
    }

    /// `value + k * uncertainty < 0`, or `value < 0` without an uncertainty.
    pub fn detected(&self, k_sigma: f64) -> bool {
        self.value + k_sigma * self.uncertainty.unwrap_or(0.0) < 0.0
    }
}

/// `var_R var_S - 1`.
pub fn mgvt_continuous(var_r: f64, var_s: f64) -> Result<WitnessReport> {
    if !(var_r > 0.0 && var_s > 0.0) {
        return Err(invalid(format!(
            "variances must be positive, got ({var_r}, {var_s})"
        )));
    }
    WitnessReport::new(WitnessId::MgvtContinuous, var_r, var_s, var_r * var_s, 1.0)
}

/// `h_R + h_S - ln(2 pi e)`.
pub fn entropic_continuous(h_r: f64, h_s: f64) -> Result<WitnessReport> {
    WitnessReport::new(
        WitnessId::EntropicContinuous,
        h_r,
        h_s,
        h_r + h_s,
        (2.0 * PI * E).ln(),
    )
}

/// Discrete variance, discrete entropy and bin width of one marginal; the
/// histogram corrections are applied by the witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinnedStats {
    pub discrete_variance: f64,
    pub discrete_entropy: f64,
    pub width: f64,
}

impl BinnedStats {
    pub fn of(m: &GlobalMarginal) -> Self {
        let d = m.distribution();
        Self {
            discrete_variance: discrete_variance(d),
            discrete_entropy: discrete_entropy(d),
            width: m.width(),
        }
    }

    pub fn histogram_variance(&self) -> f64 {
        self.discrete_variance + self.width * self.width / 12.0
    }

    pub fn histogram_entropy(&self) -> f64 {
        self.discrete_entropy + self.width.ln()
    }
}

/// Evaluates `witness` from precomputed statistics.
///
/// The continuous witnesses, given binned data, use the histogram-density
/// variance and entropy.
pub fn evaluate_stats(
    witness: WitnessId,
    pairing: Pairing,
    r: &BinnedStats,
    s: &BinnedStats,
) -> Result<WitnessReport> {
    let report = match witness {
        WitnessId::MgvtContinuous => {
            mgvt_continuous(r.histogram_variance(), s.histogram_variance())?
        }
        WitnessId::EntropicContinuous => {
            entropic_continuous(r.histogram_entropy(), s.histogram_entropy())?
        }
        WitnessId::CoarseVariance => {
            let (vr, vs) = (r.histogram_variance(), s.histogram_variance());
            WitnessReport::new(witness, vr, vs, vr * vs, 1.0)?
        }
        WitnessId::CoarseEntropic => {
            let (hr, hs) = (r.histogram_entropy(), s.histogram_entropy());
            let bound = -coarse_bound_cached(r.width * s.width)?.ln();
            WitnessReport::new(witness, hr, hs, hr + hs, bound)?
        }
        WitnessId::NaiveDiscrete => {
            let (vr, vs) = (r.discrete_variance, s.discrete_variance);
            WitnessReport::new(witness, vr, vs, vr * vs, 1.0)?
        }
    };
    Ok(WitnessReport {
        pairing: Some(pairing),
        bin_widths: Some((r.width, s.width)),
        ..report
    })
}

/// Evaluates `witness` on a position-type and a momentum-type marginal.
pub fn evaluate(
    witness: WitnessId,
    r: &GlobalMarginal,
    s: &GlobalMarginal,
) -> Result<WitnessReport> {
    let pairing = Pairing::from_variables(r.variable(), s.variable())?;
    evaluate_stats(witness, pairing, &BinnedStats::of(r), &BinnedStats::of(s))
}

/// `sigma^2[R^Delta] sigma^2[S^delta] - 1` on histogram densities.
pub fn coarse_variance_witness(r: &GlobalMarginal, s: &GlobalMarginal) -> Result<WitnessReport> {
    evaluate(WitnessId::CoarseVariance, r, s)
}

/// `h[R^Delta] + h[S^delta] + ln C(Delta delta)` on histogram densities.
pub fn coarse_entropic_witness(r: &GlobalMarginal, s: &GlobalMarginal) -> Result<WitnessReport> {
    evaluate(WitnessId::CoarseEntropic, r, s)
}

/// Product of discrete variances minus 1. Unsafe: can yield false positives.
pub fn naive_discrete_witness(r: &GlobalMarginal, s: &GlobalMarginal) -> Result<WitnessReport> {
    evaluate(WitnessId::NaiveDiscrete, r, s)
}
