use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use spinreg::analysis::{fit_decaying_cosine, fit_exp_decay, fit_lorentzian_lines, fit_trace, FitModel};
use spinreg::analytic::ChainBudget;
use spinreg::io::{cmd_plan, cmd_reproduce_paper, cmd_simulate, read_trace_csv, simulate, RunManifest};
use spinreg::sequence::SweepParameter;

const EXIT_VALIDATION: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

#[derive(Parser)]
#[command(name = "spinreg", version, about = "Simulate and analyze dark-spin registers read out through an NV center")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments against a network and write CSV traces plus a JSON summary.
    Simulate(SimulateArgs),
    /// Fit one model to a CSV trace and print the result as JSON.
    Fit(FitArgs),
    /// Chain coherence per layer and the deepest usable layer.
    Plan(PlanArgs),
    /// Rerun the shipped figure manifests and calculators against reference values.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Network file (same as --network).
    network_pos: Option<PathBuf>,
    /// Experiment file (same as --experiment).
    experiment_pos: Option<PathBuf>,
    #[arg(long)]
    network: Option<PathBuf>,
    /// Repeatable.
    #[arg(long = "experiment")]
    experiments: Vec<PathBuf>,
    /// Manifest file; other flags override its fields.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Readout noise, in units of the NV polarization.
    #[arg(long)]
    noise: Option<f64>,
    /// Output directory, or a `.csv` path for a single experiment.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    #[arg(long)]
    mask_sub_300ns: bool,
}

#[derive(Args)]
struct FitArgs {
    /// lorentzian, decaying-cosine, exp-decay, cosine or fft-peak-lorentzian.
    model: String,
    input: PathBuf,
    /// Exponential decay toward zero.
    #[arg(long)]
    fix_b0_zero: bool,
    /// Pin the decaying-cosine frequency (Hz).
    #[arg(long)]
    fixed_d0: Option<f64>,
    /// Fit up to this many separate Lorentzian lines.
    #[arg(long)]
    lines: Option<usize>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, default_value_t = 10e-6)]
    t_gate: f64,
    #[arg(long, default_value_t = 100e-6)]
    t1_rho: f64,
    /// `inf` for no T1 decay.
    #[arg(long, default_value_t = f64::INFINITY)]
    t1: f64,
    #[arg(long, default_value_t = 50e-6)]
    t2: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short = 'o', default_value = "repro-out")]
    out: PathBuf,
}

fn manifest_from(a: &SimulateArgs) -> anyhow::Result<RunManifest> {
    let mut m = match &a.manifest {
        Some(p) => RunManifest::load(p)?,
        None => {
            let network = a
                .network
                .clone()
                .or_else(|| a.network_pos.clone())
                .context("a network is required: --network, a positional path or --manifest")?;
            let mut experiments = a.experiments.clone();
            experiments.extend(a.experiment_pos.clone());
            RunManifest {
                network_file: network,
                experiment_files: experiments,
                seed: 0,
                output_dir: "out".into(),
                noise_sigma: 0.0,
                mask_sub_300ns: false,
            }
        }
    };
    if a.manifest.is_some() {
        if let Some(n) = &a.network {
            m.network_file = n.clone();
        }
        if !a.experiments.is_empty() {
            m.experiment_files = a.experiments.clone();
        }
    }
    if let Some(s) = a.seed {
        m.seed = s;
    }
    if let Some(n) = a.noise {
        m.noise_sigma = n;
    }
    if let Some(o) = &a.out {
        m.output_dir = o.clone();
    }
    m.mask_sub_300ns |= a.mask_sub_300ns;
    m.validate()?;
    Ok(m)
}

fn run_simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let m = manifest_from(a)?;
    let single_csv = m.output_dir.extension().is_some_and(|e| e == "csv");
    if single_csv {
        if m.experiment_files.len() != 1 {
            anyhow::bail!(spinreg::Error::InvalidArgument("a .csv output takes exactly one experiment".into()));
        }
        let network = m.load_network()?;
        let specs = m.load_experiments(&network)?;
        let out = simulate(&network, &specs, &m)?;
        let bytes = out.file(&out.summary.experiments[0].csv).expect("trace is always rendered");
        if let Some(dir) = m.output_dir.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&m.output_dir, bytes)?;
        eprintln!("wrote {}", m.output_dir.display());
        return Ok(());
    }
    let summary = cmd_simulate(&m)?;
    for e in &summary.experiments {
        eprintln!("wrote {}", m.output_dir.join(&e.csv).display());
        for w in &e.fit_errors {
            eprintln!("  {}: {w}", e.name);
        }
    }
    for c in &summary.couplings {
        eprintln!("d({},{}) = {:.2} +- {:.2} kHz", c.probe, c.target, c.d_hz / 1e3, c.sigma_hz / 1e3);
    }
    Ok(())
}

fn run_fit(a: &FitArgs) -> anyhow::Result<()> {
    let model = FitModel::parse(&a.model)?;
    let parameter = if model == FitModel::Lorentzian { SweepParameter::Frequency } else { SweepParameter::EchoTime };
    let file = std::fs::File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let trace = read_trace_csv(file, parameter).map_err(|e| spinreg::Error::Schema {
        file: a.input.display().to_string(),
        message: e.to_string(),
    })?;
    let json = match model {
        FitModel::Lorentzian if a.lines.is_some() => {
            serde_json::to_string_pretty(&fit_lorentzian_lines(&trace, a.lines.unwrap_or(1), 0.5)?)?
        }
        FitModel::ExpDecay => serde_json::to_string_pretty(&fit_exp_decay(&trace, a.fix_b0_zero)?)?,
        FitModel::DecayingCosine => serde_json::to_string_pretty(&fit_decaying_cosine(&trace, a.fixed_d0)?)?,
        m => serde_json::to_string_pretty(&fit_trace(m, &trace)?)?,
    };
    println!("{json}");
    Ok(())
}

fn run_plan(a: &PlanArgs) -> anyhow::Result<()> {
    let b = ChainBudget { t_gate: a.t_gate, t1_rho: a.t1_rho, t1: a.t1, t2: a.t2, eta: a.eta, threshold: a.threshold };
    print!("{}", cmd_plan(&b)?);
    Ok(())
}

fn run_reproduce(a: &ReproduceArgs) -> anyhow::Result<bool> {
    let report = cmd_reproduce_paper(a.seed, &a.out)?;
    for (c, ok) in report.criteria() {
        println!("criterion {c:>2}: {}", if ok { "pass" } else { "FAIL" });
    }
    eprintln!("report written to {}", a.out.join("report.md").display());
    Ok(report.passed())
}

fn exit_for(e: &anyhow::Error) -> ExitCode {
    match e.downcast_ref::<spinreg::Error>() {
        Some(spinreg::Error::Io(_)) => ExitCode::FAILURE,
        Some(_) => ExitCode::from(EXIT_VALIDATION),
        None if e.downcast_ref::<std::io::Error>().is_some() => ExitCode::FAILURE,
        None => ExitCode::from(EXIT_VALIDATION),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => run_simulate(a).map(|_| true),
        Command::Fit(a) => run_fit(a).map(|_| true),
        Command::Plan(a) => run_plan(a).map(|_| true),
        Command::Reproduce(a) => run_reproduce(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ACCEPTANCE),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    }
}
