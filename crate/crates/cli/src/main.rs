use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use mecs_core::measures::solve_max_p;
use mecs_core::protocol::{
    analytic_collapse, fidelity, mecs_target, sample_outcome, BellResult, QUARTER_PERIOD_TOL,
};
use mecs_core::sweep::{self, SweepGrid, DEFAULT_P_MAX};
use mecs_core::verify::{self, Suite};
use mecs_core::{
    bell_measure, product_state, Amplitude, CoherentLabel, GeneralizedBellOutcome, MeasureReport,
    MecsError, MecsSpec, MultimodeSuperposition, ProtocolParams, Sign, SplitSpec,
};

#[derive(Parser)]
#[command(
    name = "mecs",
    version,
    about = "Entanglement of multipartite entangled coherent states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrences and N-tangle of one state, with numeric cross-checks
    Measure(MeasureArgs),
    /// Write a CSV grid of pair concurrence and N-tangle
    Sweep(SweepArgs),
    /// Run the swapping protocol for one measurement outcome
    Simulate(SimulateArgs),
    /// Overlap p that maximizes the pair concurrence
    SolveMax(SolveMaxArgs),
    /// Run a self-check suite
    Verify(VerifyArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct AmplitudeArgs {
    /// Real coherent amplitude alpha
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Overlap p = exp(-2|alpha|^2)
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ThetaArgs {
    /// Relative phase in radians
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Relative phase in units of pi
    #[arg(long, allow_negative_numbers = true)]
    theta_pi: Option<f64>,
}

impl ThetaArgs {
    fn radians(&self) -> f64 {
        match (self.theta, self.theta_pi) {
            (Some(t), _) => t,
            (_, Some(x)) => x * PI,
            _ => unreachable!("clap requires one of the group"),
        }
    }
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    amplitude: AmplitudeArgs,
    #[command(flatten)]
    theta: ThetaArgs,
    #[arg(long)]
    n: usize,
    /// Size k of the first block of the k | N-k split
    #[arg(long, default_value_t = 1)]
    split: usize,
    /// Skip the numeric cross-checks
    #[arg(long)]
    no_oracle: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Party count of a (p, theta) surface
    #[arg(long, conflicts_with = "n_list")]
    n: Option<usize>,
    #[arg(long, default_value_t = 100)]
    p_steps: usize,
    /// Evenly spaced theta points on [0, 2 pi) for a surface
    #[arg(long, default_value_t = 60)]
    theta_steps: usize,
    /// Comma-separated phases in radians for p curves
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "theta_pi_list"
    )]
    theta_list: Option<Vec<f64>>,
    /// Comma-separated phases in units of pi for p curves
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta_pi_list: Option<Vec<f64>>,
    /// Comma-separated party counts for p curves
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_P_MAX)]
    p_max: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    /// Imaginary part of alpha
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_im: f64,
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long)]
    n: usize,
    /// Electronic bit pattern, first bit 0
    #[arg(long, requires = "sign", conflicts_with = "seed")]
    pattern: Option<String>,
    /// + or -
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<Sign>,
    /// Draw the outcome at random with this seed
    #[arg(long, required_unless_present = "pattern")]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveMaxArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    theta: ThetaArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// wootters, tangle, protocol, cnot, table1 or all
    #[arg(long, default_value = "all")]
    suite: Suite,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Check(anyhow::Error),
}

impl From<MecsError> for Failure {
    fn from(e: MecsError) -> Self {
        Failure::Usage(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn emit<T: Serialize>(value: &T) -> CmdResult {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Check(e.into()))?;
    writeln!(out).map_err(|e| Failure::Check(e.into()))
}

fn measure(args: MeasureArgs) -> CmdResult {
    let amplitude = match (args.amplitude.alpha, args.amplitude.p) {
        (Some(a), _) => Amplitude::Alpha(CoherentLabel::real(a)?),
        (_, Some(p)) => Amplitude::Overlap(p),
        _ => unreachable!("clap requires one of the group"),
    };
    let spec = MecsSpec::new(amplitude, args.theta.radians(), args.n)?;
    let split = SplitSpec::new(args.split, args.n)?;
    let report = if args.no_oracle {
        MeasureReport::closed_form(&spec, split)?
    } else {
        MeasureReport::with_oracles(&spec, split)?
    };
    emit(&report)?;
    if !report.oracles_consistent() {
        return Err(Failure::Check(anyhow!(
            "numeric cross-checks disagree with the closed forms: {:?}",
            report.oracle_deltas
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    out: PathBuf,
    rows: usize,
    ps: usize,
    ns: Vec<usize>,
    thetas: Vec<f64>,
}

fn sweep(args: SweepArgs) -> CmdResult {
    let thetas = match (&args.theta_list, &args.theta_pi_list) {
        (Some(t), _) => Some(t.clone()),
        (_, Some(x)) => Some(x.iter().map(|v| v * PI).collect()),
        _ => None,
    };
    let grid = match (args.n, args.n_list, thetas) {
        (Some(n), None, None) => SweepGrid::surface(n, args.p_steps, args.theta_steps, args.p_max)?,
        (None, Some(ns), Some(thetas)) => {
            SweepGrid::families(ns, thetas, args.p_steps, args.p_max)?
        }
        _ => {
            return Err(Failure::Usage(anyhow!(
                "give either --n (surface) or --n-list with --theta-list/--theta-pi-list (curves)"
            )))
        }
    };
    let rows = sweep::evaluate(&grid)?;
    let file = File::create(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))
        .map_err(Failure::Check)?;
    sweep::write_csv(&rows, BufWriter::new(file))
        .with_context(|| format!("cannot write {}", args.out.display()))
        .map_err(Failure::Check)?;
    emit(&SweepSummary {
        out: args.out,
        rows: rows.len(),
        ps: grid.ps.len(),
        ns: grid.ns,
        thetas: grid.thetas,
    })
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    ZeroProbability,
}

#[derive(Serialize)]
struct SimulateReport {
    params: ProtocolParams,
    pattern: String,
    sign: Sign,
    sampled: bool,
    status: Status,
    probability: f64,
    collapsed: Option<MultimodeSuperposition>,
    /// Overlap with the two-branch state predicted for this outcome.
    analytic_fidelity: Option<f64>,
    /// Overlap with the MECS of amplitude `i alpha`; all-zeros pattern at
    /// `tau = pi/2` only.
    mecs_fidelity: Option<f64>,
}

fn simulate(args: SimulateArgs) -> CmdResult {
    let alpha = CoherentLabel::new(Complex64::new(args.alpha, args.alpha_im))?;
    let params = ProtocolParams::new(alpha, args.tau, args.n)?;
    let state = product_state(&params)?;
    let (outcome, result, sampled) = match (&args.pattern, args.sign, args.seed) {
        (Some(pattern), Some(sign), _) => {
            let outcome = GeneralizedBellOutcome::parse(pattern, sign)?;
            (outcome, bell_measure(&state, &outcome)?, false)
        }
        (None, _, Some(seed)) => {
            let (o, r) = sample_outcome(&state, &mut StdRng::seed_from_u64(seed))?;
            (o, r, true)
        }
        _ => {
            return Err(Failure::Usage(anyhow!(
                "give --pattern with --sign, or --seed"
            )))
        }
    };
    let BellResult {
        probability,
        collapsed,
    } = result;
    let (status, analytic_fidelity, mecs_fidelity) = match &collapsed {
        None => (Status::ZeroProbability, None, None),
        Some(c) => {
            let analytic = fidelity(&analytic_collapse(&params, &outcome)?, c)?;
            let quarter = (params.tau - FRAC_PI_2).abs() <= QUARTER_PERIOD_TOL;
            let mecs = if quarter && outcome.pattern() == 0 {
                match mecs_target(&params, outcome.sign()) {
                    Ok(t) => Some(fidelity(&t, c)?),
                    Err(MecsError::NullState(_)) => None,
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };
            (Status::Ok, Some(analytic), mecs)
        }
    };
    if matches!(status, Status::ZeroProbability) {
        eprintln!(
            "outcome {}{} has zero probability",
            outcome.pattern_string(),
            outcome.sign()
        );
    }
    emit(&SimulateReport {
        params,
        pattern: outcome.pattern_string(),
        sign: outcome.sign(),
        sampled,
        status,
        probability,
        collapsed,
        analytic_fidelity,
        mecs_fidelity,
    })
}

fn solve_max(args: SolveMaxArgs) -> CmdResult {
    emit(&solve_max_p(args.n, args.theta.radians())?)
}

fn verify_cmd(args: VerifyArgs) -> CmdResult {
    let reports = verify::run(args.suite).map_err(|e| Failure::Check(e.into()))?;
    emit(&reports)?;
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .filter(|c| !c.passed)
                .map(move |c| format!("{}/{}", r.suite, c.name))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(anyhow!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Measure(a) => measure(a),
        Command::Sweep(a) => sweep(a),
        Command::Simulate(a) => simulate(a),
        Command::SolveMax(a) => solve_max(a),
        Command::Verify(a) => verify_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
