use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cgwitness::binning::{coarse_grain, DEFAULT_MIN_CAPTURED};
use cgwitness::ingest::{load_joint_counts, save_joint_counts};
use cgwitness::model::{
    bin_mass_oracle, sample_joint_counts, sample_marginal_counts, SamplingPlan,
};
use cgwitness::spheroidal::coarse_bound;
use cgwitness::sweep::{default_factors, run_sweep, SweepResult, SweepRow};
use cgwitness::witnesses::{evaluate, GlobalMarginal};
use cgwitness::{
    BinGrid, ErrorModel, GaussianTwoPhotonState, JitterMode, OpticalGeometry, Pairing, SweepConfig,
    VariablePair, WitnessId,
};

#[derive(Debug, Parser)]
#[command(
    name = "cgwitness",
    version,
    about = "Entanglement witnesses for coarse-grained measurements"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic position and momentum coincidence scans of a Gaussian state.
    Simulate(SimulateArgs),
    /// Evaluate witnesses over a grid of bin sizes.
    Sweep(SweepArgs),
    /// Show the naive discrete witness reporting entanglement of a separable state.
    DemoFalsePositive(DemoArgs),
    /// Tabulate the coarse-graining bound C(gamma).
    BoundTable(BoundTableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairingArg {
    Pm,
    Mp,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum JitterArg {
    PerBin,
    Rigid,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[arg(long, default_value_t = 50.0)]
    f1_mm: f64,
    #[arg(long, default_value_t = 200.0)]
    f2_mm: f64,
    #[arg(long, default_value_t = 250.0)]
    f3_mm: f64,
    #[arg(long, default_value_t = 650e-6)]
    lambda_mm: f64,
    #[arg(long, default_value_t = 0.050)]
    s_x_mm: f64,
    #[arg(long, default_value_t = 0.020)]
    s_p_mm: f64,
    #[arg(long, default_value_t = 0.01)]
    micrometer_step_mm: f64,
}

impl GeometryArgs {
    fn geometry(&self) -> Result<OpticalGeometry> {
        let g = OpticalGeometry {
            f1_mm: self.f1_mm,
            f2_mm: self.f2_mm,
            f3_mm: self.f3_mm,
            lambda_mm: self.lambda_mm,
            s_x_mm: self.s_x_mm,
            s_p_mm: self.s_p_mm,
            micrometer_step_mm: self.micrometer_step_mm,
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Std of p+ = p1 + p2, in 1/mm.
    #[arg(long)]
    sigma_plus: f64,
    /// Std of p- = p1 - p2, in 1/mm.
    #[arg(long)]
    sigma_minus: f64,
    /// Expected total coincidences per scan.
    #[arg(long, default_value_t = 1e6)]
    total_counts: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; receives `position.txt` and `momentum.txt`.
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    position: PathBuf,
    #[arg(long)]
    momentum: PathBuf,
    /// Odd position rebin factors, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = default_factors())]
    n_list: Vec<usize>,
    /// Odd momentum rebin factors, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = default_factors())]
    m_list: Vec<usize>,
    #[arg(long, value_enum, default_value_t = PairingArg::Both)]
    pairing: PairingArg,
    /// Witness ids, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "coarse_variance,coarse_entropic"
    )]
    witnesses: Vec<String>,
    #[arg(long, value_enum, default_value_t = Toggle::Off)]
    errors: Toggle,
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    /// Permit fewer than 100 replicates.
    #[arg(long)]
    fast: bool,
    #[arg(long, value_enum, default_value_t = JitterArg::PerBin)]
    jitter: JitterArg,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    poisson: Toggle,
    /// Detection requires value + k_sigma * stderr < 0 when errors are on.
    #[arg(long, default_value_t = 1.0)]
    k_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DemoArgs {
    /// Common std of p+ and p-, in 1/mm.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Std of p-, if different from `--sigma` (rejected: the demo needs a separable state).
    #[arg(long)]
    sigma_minus: Option<f64>,
    /// Bin width in units of each marginal's std.
    #[arg(long, default_value_t = 6.0)]
    multiplier: f64,
    #[arg(long, default_value_t = 1e6)]
    total_counts: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundTableArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma_min: f64,
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    gamma_max: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    spacing: Spacing,
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Sweep(a) => sweep(&a),
        Command::DemoFalsePositive(a) => demo(&a),
        Command::BoundTable(a) => bound_table(&a),
    }
}

fn emit(output: Option<&Path>, body: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => io::stdout()
            .write_all(body)
            .context("writing to standard output"),
    }
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let state = GaussianTwoPhotonState::new(a.sigma_plus, a.sigma_minus)?;
    let geometry = a.geometry.geometry()?;
    fs::create_dir_all(&a.output).with_context(|| format!("creating {}", a.output.display()))?;
    for (pair, seed) in [
        (VariablePair::Position, a.seed),
        (VariablePair::Momentum, a.seed.wrapping_add(1)),
    ] {
        let jc = sample_joint_counts(
            &state,
            &geometry,
            pair,
            &SamplingPlan::new(a.total_counts, seed),
        )?;
        let path = a.output.join(format!("{pair}.txt"));
        save_joint_counts(&path, &jc).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let position = load_joint_counts(&a.position)
        .with_context(|| format!("reading {}", a.position.display()))?;
    let momentum = load_joint_counts(&a.momentum)
        .with_context(|| format!("reading {}", a.momentum.display()))?;
    let witnesses = a
        .witnesses
        .iter()
        .map(|w| w.parse::<WitnessId>())
        .collect::<cgwitness::Result<Vec<_>>>()?;
    let pairings = match a.pairing {
        PairingArg::Pm => vec![Pairing::PlusMinus],
        PairingArg::Mp => vec![Pairing::MinusPlus],
        PairingArg::Both => Pairing::BOTH.to_vec(),
    };
    let errors = (a.errors == Toggle::On).then(|| ErrorModel {
        poisson: a.poisson == Toggle::On,
        jitter: match a.jitter {
            JitterArg::PerBin => JitterMode::PerBin,
            JitterArg::Rigid => JitterMode::Rigid,
            JitterArg::Off => JitterMode::Off,
        },
        replicates: a.replicates,
        seed: a.seed,
        fast: a.fast,
    });
    let config = SweepConfig {
        n_values: a.n_list.clone(),
        m_values: a.m_list.clone(),
        pairings,
        witnesses,
        errors,
        k_sigma: a.k_sigma,
    };
    let result = run_sweep(&position, &momentum, &config)?;
    let body = match a.format {
        Format::Csv => sweep_csv(&result)?,
        Format::Json => serde_json::to_vec_pretty(&result)?,
    };
    emit(a.output.as_deref(), &body)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    section: &'a str,
    n: usize,
    m: usize,
    pairing: Pairing,
    witness: WitnessId,
    delta_x: f64,
    delta_p: f64,
    value: f64,
    uncertainty: Option<f64>,
    detected: bool,
}

fn csv_row<'a>(section: &'a str, r: &SweepRow) -> CsvRow<'a> {
    CsvRow {
        section,
        n: r.n,
        m: r.m,
        pairing: r.pairing,
        witness: r.witness,
        delta_x: r.delta_x,
        delta_p: r.delta_p,
        value: r.value,
        uncertainty: r.uncertainty,
        detected: r.detected,
    }
}

fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &result.grid {
        w.serialize(csv_row("grid", r))?;
    }
    for r in &result.diagonal {
        w.serialize(csv_row("diagonal", r))?;
    }
    Ok(w.into_inner()?)
}

#[derive(Debug, Serialize)]
struct DemoRow {
    source: &'static str,
    witness: WitnessId,
    value: f64,
    detected: bool,
    #[serde(rename = "unsafe")]
    unsafe_flag: bool,
}

fn demo(a: &DemoArgs) -> Result<()> {
    if let Some(sm) = a.sigma_minus {
        if sm != a.sigma {
            bail!(cgwitness::Error::InvalidParameter(format!(
                "the demonstration needs a separable state (sigma_plus = sigma_minus), got {} and {sm}",
                a.sigma
            )));
        }
    }
    if !(a.multiplier.is_finite() && a.multiplier > 0.0) {
        bail!(cgwitness::Error::InvalidParameter(format!(
            "multiplier must be positive, got {}",
            a.multiplier
        )));
    }
    let state = GaussianTwoPhotonState::new(a.sigma, a.sigma)?;
    let pairing = Pairing::PlusMinus;
    let specs =
        [pairing.position_variable(), pairing.momentum_variable()].map(|v| state.marginal(v));
    let grids = specs
        .iter()
        .map(|m| BinGrid::covering(a.multiplier * m.std, 10.0 * m.std))
        .collect::<cgwitness::Result<Vec<_>>>()?;

    let analytic = specs
        .iter()
        .zip(&grids)
        .map(|(m, g)| {
            Ok(GlobalMarginal::new(
                m.variable,
                coarse_grain(bin_mass_oracle(*m), g, DEFAULT_MIN_CAPTURED)?.distribution,
            ))
        })
        .collect::<cgwitness::Result<Vec<_>>>()?;
    let sampled = specs
        .iter()
        .zip(&grids)
        .zip([a.seed, a.seed.wrapping_add(1)])
        .map(|((m, g), seed)| {
            let h = sample_marginal_counts(m, g, a.total_counts, seed)?;
            Ok(GlobalMarginal::new(m.variable, h.normalize()?))
        })
        .collect::<cgwitness::Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (source, marginals) in [("analytic", &analytic), ("sampled", &sampled)] {
        for w in [
            WitnessId::NaiveDiscrete,
            WitnessId::CoarseVariance,
            WitnessId::CoarseEntropic,
        ] {
            let r = evaluate(w, &marginals[0], &marginals[1])?;
            rows.push(DemoRow {
                source,
                witness: w,
                value: r.value,
                detected: r.detected(0.0),
                unsafe_flag: r.unsafe_flag,
            });
        }
    }
    let body = match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)?;
            }
            w.into_inner()?
        }
        Format::Json => serde_json::to_vec_pretty(&rows)?,
    };
    emit(a.output.as_deref(), &body)?;
    for r in rows.iter().filter(|r| r.detected) {
        eprintln!(
            "{} {}: {:.6} < 0 on a separable state (false positive)",
            r.source, r.witness, r.value
        );
    }
    Ok(())
}

fn bound_table(a: &BoundTableArgs) -> Result<()> {
    let (lo, hi) = (a.gamma_min, a.gamma_max);
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
        bail!(cgwitness::Error::InvalidParameter(format!(
            "invalid gamma range [{lo}, {hi}]"
        )));
    }
    if a.points < 2 && hi > lo || a.points == 0 {
        bail!(cgwitness::Error::InvalidParameter(format!(
            "need at least 2 points for [{lo}, {hi}]"
        )));
    }
    if a.spacing == Spacing::Log && lo <= 0.0 {
        bail!(cgwitness::Error::InvalidParameter(
            "log spacing needs gamma_min > 0".into()
        ));
    }
    let mut out = String::from("gamma,C\n");
    for i in 0..a.points {
        let t = if a.points == 1 {
            0.0
        } else {
            i as f64 / (a.points - 1) as f64
        };
        let gamma = match a.spacing {
            Spacing::Linear => lo + (hi - lo) * t,
            Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * t).exp(),
        };
        out.push_str(&format!("{gamma},{}\n", coarse_bound(gamma)?));
    }
    emit(a.output.as_deref(), out.as_bytes())
}
