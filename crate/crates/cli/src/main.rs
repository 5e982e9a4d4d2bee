use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pecshadow::estimators::{
    epsilon_bound, estimate_pauli, estimate_pauli_lightcone, estimate_purity, sample_budget, shadow_norm_sq,
    symmetry_verified_expectation, write_estimates_csv, Estimate, EstimateRow, MomConfig,
};
use pecshadow::experiment::{prepare, run_experiment, ExperimentConfig};
use pecshadow::noise::{circuit_decomposition, NoiseSpec};
use pecshadow::shadow::{read_shadow, SamplerOptions, ShadowMode, ShadowSampler, ShadowWriter};
use pecshadow::sim::{exact_density, exact_expectation, exact_subsystem_purity, RecoveryPolicy};
use pecshadow::{Circuit, Error, PauliString, Result};
use serde_json::json;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;
const SAMPLE_CHUNK: usize = 1 << 16;

#[derive(Parser)]
#[command(name = "pecshadow", version, about = "Error-mitigated classical shadows of simulated noisy circuits")]
struct Cli {
    /// Root seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (sample, estimate, oracle, bounds) or directory (experiment).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment config JSON; supplies the circuit and noise when no files are given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw snapshots and write a shadow file.
    Sample(SampleArgs),
    /// Estimate observables or purities from a shadow file.
    Estimate(EstimateArgs),
    /// Run a full experiment pipeline from --config.
    Experiment,
    /// Sample budgets and shadow norms.
    Bounds(BoundsArgs),
    /// Exact values from the density-matrix simulator.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct Source {
    /// Circuit JSON.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Noise spec JSON (noiseless when omitted).
    #[arg(long)]
    noise: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Pec,
    Conventional,
    Boosted,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "pec")]
    mode: Mode,
    /// Boosted noise rate (boosted mode).
    #[arg(long)]
    p: Option<f64>,
    /// Number of snapshots.
    #[arg(long, short = 'n', default_value_t = 10_000)]
    snapshots: usize,
    /// Omit the per-gate recovery log (disables light-cone estimates).
    #[arg(long)]
    no_gate_log: bool,
    /// Locally biased basis probabilities `px,py,pz`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    basis_probs: Option<Vec<f64>>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Shadow file.
    shadow: PathBuf,
    /// Pauli observable, e.g. "Z0 Z1" (repeatable).
    #[arg(long)]
    observable: Vec<String>,
    /// Subsystem for a purity estimate, e.g. "0,1" (repeatable).
    #[arg(long)]
    purity: Vec<String>,
    /// Median-of-means batch count.
    #[arg(long, short = 'k', default_value_t = 1)]
    k: usize,
    #[arg(long)]
    no_readout_mitigation: bool,
    /// Restrict error cancellation to each observable's light cone (needs --circuit).
    #[arg(long)]
    lightcone: bool,
    /// Circuit the shadows were drawn from.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Symmetry group element (repeatable; include the identity "I").
    #[arg(long)]
    symmetry: Vec<String>,
    /// Observables commute with every symmetry.
    #[arg(long)]
    commuting: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    /// Number of observables.
    #[arg(long = "M", default_value_t = 1)]
    m: u64,
    #[arg(long, default_value_t = 1.0)]
    g_norm: f64,
    /// Pauli weight.
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Readout flip probability.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Also report the accuracy reached with this many snapshots.
    #[arg(long)]
    n_s: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    observable: Vec<String>,
    #[arg(long)]
    purity: Vec<String>,
    /// Evaluate the noise-free circuit instead of the noisy one.
    #[arg(long)]
    ideal: bool,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_source(source: &Source, config: &Option<PathBuf>) -> Result<(Circuit, NoiseSpec)> {
    match (&source.circuit, config) {
        (Some(c), _) => {
            let circuit = Circuit::from_json_str(&read_text(c)?)?;
            let noise = match &source.noise {
                Some(n) => NoiseSpec::from_json_str(&read_text(n)?)?,
                None => NoiseSpec::noiseless(),
            };
            Ok((circuit, noise))
        }
        (None, Some(cfg)) => {
            let setup = prepare(&ExperimentConfig::from_json_str(&read_text(cfg)?)?)?;
            Ok((setup.circuit, setup.noise))
        }
        (None, None) => Err(Error::InvalidParameter("give --circuit (and --noise) or --config".into())),
    }
}

fn parse_subsystem(s: &str) -> Result<Vec<usize>> {
    s.split(|c: char| c == ',' || c == '-' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad subsystem {s:?}"))))
        .collect()
}

fn sample(cli: &Cli, a: &SampleArgs) -> Result<()> {
    let (circuit, noise) = load_source(&a.source, &cli.config)?;
    let mode = match a.mode {
        Mode::Pec => ShadowMode::Pec,
        Mode::Conventional => ShadowMode::Conventional,
        Mode::Boosted => ShadowMode::Boosted(
            a.p.ok_or_else(|| Error::InvalidParameter("boosted mode needs --p".into()))?,
        ),
    };
    let mut opts = SamplerOptions::new(mode, cli.seed);
    opts.gate_log = mode == ShadowMode::Pec && !a.no_gate_log;
    opts.basis_probs = a.basis_probs.as_ref().map(|v| [v[0], v[1], v[2]]);
    let sampler = ShadowSampler::new(&circuit, &noise, opts)?;
    let mut header = sampler.header().clone();
    header.n_snapshots = a.snapshots as u64;
    let mut w = ShadowWriter::new(output(&cli.out)?, header)?;
    let mut done = 0;
    while done < a.snapshots {
        let m = SAMPLE_CHUNK.min(a.snapshots - done);
        for s in sampler.sample_range(done as u64, m).iter() {
            w.write(&s)?;
        }
        done += m;
    }
    w.finish()?.flush()?;
    log::info!("wrote {} snapshots (mode {mode}, g = {:.6})", a.snapshots, sampler.header().g_norm);
    Ok(())
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> Result<()> {
    let set = read_shadow(&a.shadow).map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", a.shadow.display()))),
        e => e,
    })?;
    let n = set.n_qubits();
    let mut cfg = MomConfig::new(a.k)?;
    cfg.readout_mitigation = !a.no_readout_mitigation;
    let mode = set.header().mode;
    let circuit = match &a.circuit {
        Some(p) => Some(Circuit::from_json_str(&read_text(p)?)?),
        None => None,
    };
    let group: Vec<PauliString> = a
        .symmetry
        .iter()
        .map(|s| PauliString::parse(s, n))
        .collect::<Result<_>>()?;
    if a.observable.is_empty() && a.purity.is_empty() {
        return Err(Error::InvalidParameter("nothing to estimate; pass --observable or --purity".into()));
    }
    let mut rows = Vec::new();
    for text in &a.observable {
        let p = PauliString::parse(text, n)?;
        let e: Estimate = if !group.is_empty() {
            symmetry_verified_expectation(&set, &p, &group, a.commuting, &cfg)?
        } else if a.lightcone {
            let c = circuit
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--lightcone needs --circuit".into()))?;
            estimate_pauli_lightcone(&set, &p, c, &cfg)?
        } else {
            estimate_pauli(&set, &p, &cfg)?
        };
        rows.push(EstimateRow::new(text.clone(), &e, mode));
    }
    for text in &a.purity {
        let q = parse_subsystem(text)?;
        let e = estimate_purity(&set, &q, &cfg)?;
        let label = q.iter().map(|q| q.to_string()).collect::<Vec<_>>().join("-");
        rows.push(EstimateRow::new(format!("purity:{label}"), &e, mode));
    }
    write_estimates_csv(output(&cli.out)?, &rows)
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Result<()> {
    let norm_sq = shadow_norm_sq(a.q, a.alpha)?;
    let b = sample_budget(a.epsilon, a.delta, a.m, a.g_norm, norm_sq)?;
    let mut report = json!({
        "epsilon": a.epsilon,
        "delta": a.delta,
        "M": a.m,
        "g_norm": a.g_norm,
        "q": a.q,
        "alpha": a.alpha,
        "shadow_norm_sq": norm_sq,
        "K": b.k,
        "N_batch": b.n_batch,
        "N": b.n,
        "headline_N": b.headline_n,
    });
    if let Some(n_s) = a.n_s {
        report["epsilon_at_n_s"] = json!(epsilon_bound(n_s, a.delta, a.m, a.g_norm, norm_sq)?);
    }
    let mut w = output(&cli.out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn oracle(cli: &Cli, a: &OracleArgs) -> Result<()> {
    let (circuit, noise) = load_source(&a.source, &cli.config)?;
    let spec = if a.ideal { NoiseSpec::noiseless() } else { noise };
    let rho = exact_density(&circuit, &spec, RecoveryPolicy::None)?;
    let n = circuit.n_qubits();
    let mode = if a.ideal { "oracle-ideal" } else { "oracle-noisy" };
    let g_norm = circuit_decomposition(&circuit, &spec)?.g_norm();
    let mut rows = Vec::new();
    for text in &a.observable {
        let v = exact_expectation(&rho, &PauliString::parse(text, n)?)?;
        rows.push(EstimateRow::new(text.clone(), &exact(v, g_norm), mode));
    }
    for text in &a.purity {
        let q = parse_subsystem(text)?;
        let v = exact_subsystem_purity(&rho, &q)?;
        let label = q.iter().map(|q| q.to_string()).collect::<Vec<_>>().join("-");
        rows.push(EstimateRow::new(format!("purity:{label}"), &exact(v, g_norm), mode));
    }
    write_estimates_csv(output(&cli.out)?, &rows)
}

fn exact(value: f64, norm_used: f64) -> Estimate {
    Estimate {
        norm_used,
        ..Estimate::exact(value)
    }
}

fn experiment(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("experiment needs --config".into()))?;
    let mut cfg = ExperimentConfig::from_json_str(&read_text(path)?)?;
    if cli.seed != 0 {
        cfg.seed = cli.seed;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let out = run_experiment(&cfg, &out_dir)?;
    println!("{}", out.csv_path.display());
    println!("{}", out.manifest_path.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else if e.is_io() {
        EXIT_IO
    } else {
        EXIT_CONFIG
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match &cli.command {
        Command::Sample(a) => sample(&cli, a),
        Command::Estimate(a) => estimate(&cli, a),
        Command::Experiment => experiment(&cli),
        Command::Bounds(a) => bounds(&cli, a),
        Command::Oracle(a) => oracle(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
