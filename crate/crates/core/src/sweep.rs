//! Bin-size sweeps: every witness at every pair of rebin factors `(n, m)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::ingest::JointCounts;
use crate::uncertainty::{evaluate_cell, propagate_cells, BaseMarginals, Cell, ErrorModel};
use crate::witnesses::{Pairing, WitnessId};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub pairings: Vec<Pairing>,
    pub witnesses: Vec<WitnessId>,
    /// Monte Carlo error model; `None` reports values only.
    pub errors: Option<ErrorModel>,
    /// With errors, a cell is detected when `value + k_sigma * stderr < 0`.
    pub k_sigma: f64,
}

/// `1, 3, 5, ..., 21`.
pub fn default_factors() -> Vec<usize> {
    (1..=21).step_by(2).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: default_factors(),
            m_values: default_factors(),
            pairings: Pairing::BOTH.to_vec(),
            witnesses: vec![WitnessId::CoarseVariance, WitnessId::CoarseEntropic],
            errors: None,
            k_sigma: 1.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("n", &self.n_values), ("m", &self.m_values)] {
            if list.is_empty() {
                return Err(invalid(format!("{name} list is empty")));
            }
            if let Some(bad) = list.iter().find(|&&f| f == 0 || f % 2 == 0) {
                return Err(invalid(format!(
                    "{name} list entries must be odd and positive, got {bad}"
                )));
            }
        }
        if self.pairings.is_empty() {
            return Err(invalid("no pairings selected"));
        }
        if self.witnesses.is_empty() {
            return Err(invalid("no witnesses selected"));
        }
        if !(self.k_sigma.is_finite() && self.k_sigma >= 0.0) {
            return Err(invalid(format!(
                "k_sigma must be nonnegative, got {}",
                self.k_sigma
            )));
        }
        if let Some(em) = &self.errors {
            em.validate()?;
        }
        Ok(())
    }

    /// Cells in output order: `n`, then `m`, then pairing, then witness.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.n_values {
            for &m in &self.m_values {
                for &pairing in &self.pairings {
                    for &witness in &self.witnesses {
                        cells.push(Cell {
                            pairing,
                            n,
                            m,
                            witness,
                        });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub pairing: Pairing,
    pub witness: WitnessId,
    /// Position and momentum bin widths.
    pub delta_x: f64,
    pub delta_p: f64,
    pub value: f64,
    pub uncertainty: Option<f64>,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: Vec<SweepRow>,
    /// The `n = m` rows of `grid`, in the same order.
    pub diagonal: Vec<SweepRow>,
}

impl SweepResult {
    /// Largest `n` on the diagonal at which `witness` detects entanglement
    /// with `pairing`.
    pub fn max_detected_diagonal(&self, witness: WitnessId, pairing: Pairing) -> Option<usize> {
        self.diagonal
            .iter()
            .filter(|r| r.witness == witness && r.pairing == pairing && r.detected)
            .map(|r| r.n)
            .max()
    }

    pub fn any_detected(&self, witness: WitnessId) -> bool {
        self.grid.iter().any(|r| r.witness == witness && r.detected)
    }
}

/// Runs every configured cell on a position scan and a momentum scan.
pub fn run_sweep(
    position: &JointCounts,
    momentum: &JointCounts,
    config: &SweepConfig,
) -> Result<SweepResult> {
    config.validate()?;
    if position.geometry() != momentum.geometry() {
        return Err(Error::Config(
            "position and momentum scans were taken with different geometries".into(),
        ));
    }
    let base = BaseMarginals::new(position, momentum)?;
    let cells = config.cells();
    let reports = cells
        .par_iter()
        .map(|c| evaluate_cell(&base, c))
        .collect::<Result<Vec<_>>>()?;
    let uncertainties = match &config.errors {
        Some(em) => propagate_cells(&base, &cells, em)?
            .uncertainties
            .into_iter()
            .map(Some)
            .collect(),
        None => vec![None; cells.len()],
    };
    let grid: Vec<SweepRow> = cells
        .iter()
        .zip(reports)
        .zip(uncertainties)
        .map(|((cell, report), uncertainty)| {
            let report = match uncertainty {
                Some(u) => report.with_uncertainty(u),
                None => report,
            };
            let (delta_x, delta_p) = report.bin_widths.expect("binned witness");
            SweepRow {
                n: cell.n,
                m: cell.m,
                pairing: cell.pairing,
                witness: cell.witness,
                delta_x,
                delta_p,
                value: report.value,
                uncertainty: report.uncertainty,
                detected: report.detected(config.k_sigma),
            }
        })
        .collect();
    let diagonal = grid.iter().filter(|r| r.n == r.m).cloned().collect();
    Ok(SweepResult { grid, diagonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{OpticalGeometry, VariablePair};
    use crate::model::{sample_joint_counts, GaussianTwoPhotonState, SamplingPlan};
    use crate::uncertainty::JitterMode;
    use crate::witnesses::{evaluate, GlobalMarginal};

    fn scans(ratio: f64, total: f64, seed: u64) -> (JointCounts, JointCounts) {
        let g = OpticalGeometry::reference();
        let base = (g.base_bin_width(VariablePair::Momentum)
            / g.base_bin_width(VariablePair::Position))
        .sqrt();
        let sm = base / ratio.sqrt();
        let st = GaussianTwoPhotonState::new(ratio * sm, sm).unwrap();
        let x = sample_joint_counts(
            &st,
            &g,
            VariablePair::Position,
            &SamplingPlan::new(total, seed),
        )
        .unwrap();
        let p = sample_joint_counts(
            &st,
            &g,
            VariablePair::Momentum,
            &SamplingPlan::new(total, seed + 1),
        )
        .unwrap();
        (x, p)
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        assert_eq!(
            SweepConfig::default().n_values,
            vec![1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21]
        );
        let bad = SweepConfig {
            n_values: vec![1, 2],
            ..SweepConfig::default()
        };
        assert!(bad.validate().is_err());
        let empty = SweepConfig {
            m_values: vec![],
            ..SweepConfig::default()
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn diagonal_is_a_subset_of_grid() {
        let (x, p) = scans(4.0, 1e5, 1);
        let cfg = SweepConfig {
            n_values: vec![1, 3, 5],
            m_values: vec![1, 3, 5],
            ..SweepConfig::default()
        };
        let res = run_sweep(&x, &p, &cfg).unwrap();
        assert_eq!(res.grid.len(), 3 * 3 * 2 * 2);
        assert_eq!(res.diagonal.len(), 3 * 2 * 2);
        for d in &res.diagonal {
            assert!(res.grid.contains(d));
        }
    }

    #[test]
    fn unrebinned_cell_matches_direct_evaluation() {
        let (x, p) = scans(4.0, 1e5, 2);
        let cfg = SweepConfig {
            n_values: vec![1],
            m_values: vec![1],
            ..SweepConfig::default()
        };
        let res = run_sweep(&x, &p, &cfg).unwrap();
        for row in &res.grid {
            let r = GlobalMarginal::new(
                row.pairing.position_variable(),
                crate::ingest::global_marginal(&x, row.pairing.position_sign())
                    .normalize()
                    .unwrap(),
            );
            let s = GlobalMarginal::new(
                row.pairing.momentum_variable(),
                crate::ingest::global_marginal(&p, row.pairing.momentum_sign())
                    .normalize()
                    .unwrap(),
            );
            assert_eq!(evaluate(row.witness, &r, &s).unwrap().value, row.value);
        }
    }

    #[test]
    fn geometry_mismatch_is_a_config_error() {
        let (x, p) = scans(2.0, 1e4, 3);
        let g = OpticalGeometry {
            f3_mm: 300.0,
            ..*p.geometry()
        };
        let p2 = JointCounts::new(
            VariablePair::Momentum,
            p.step_mm(),
            g,
            p.shape().0,
            p.shape().1,
            p.counts().to_vec(),
            Some(p.origin()),
        )
        .unwrap();
        assert!(matches!(
            run_sweep(&x, &p2, &SweepConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn errors_raise_the_detection_bar() {
        let (x, p) = scans(4.0, 1e5, 4);
        let em = ErrorModel {
            replicates: 100,
            jitter: JitterMode::PerBin,
            ..ErrorModel::new(11)
        };
        let cfg = SweepConfig {
            n_values: vec![1, 5],
            m_values: vec![1, 5],
            errors: Some(em),
            ..SweepConfig::default()
        };
        let res = run_sweep(&x, &p, &cfg).unwrap();
        for r in &res.grid {
            let u = r.uncertainty.unwrap();
            assert!(u > 0.0);
            assert_eq!(r.detected, r.value + u < 0.0);
        }
    }
}
