use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pauliflow::config::{ConfigDocument, OutputFormat};
use pauliflow::experiments::{preset, sweep_all, ExperimentConfig, ExperimentError, PreparedPoint, PRESETS};
use pauliflow::flow::{parse_sequence, track_clifford, validate_sequence};
use pauliflow::library::{get_gate, GATE_NAMES};
use pauliflow::noise::write_multipliers_csv;
use pauliflow::output::{summary_table, write_csv, write_json};

const OK: u8 = 0;
const USAGE: u8 = 1;
const INVALID: u8 = 2;
const NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "pauliflow", version, about = "Adiabatic Pauli-sequence gates: verification and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a sequence and print the logical gate it implements.
    Verify(VerifyArgs),
    /// One run of a configuration.
    Simulate(SimulateArgs),
    /// Monte Carlo sweep from a config file or a preset.
    Sweep(SweepArgs),
    /// Library gates and their qubit roles.
    ListGates,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct VerifyArgs {
    #[arg(long, group = "source")]
    gate: Option<String>,
    #[arg(long, group = "source")]
    file: Option<PathBuf>,
    /// Rotation angle for rz, rx and ry.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    run: u64,
    /// Noise-free control trace as CSV.
    #[arg(long)]
    dump_trace: Option<PathBuf>,
    /// Noise multipliers of this run as CSV.
    #[arg(long)]
    dump_noise: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct SweepArgs {
    #[arg(long, group = "source")]
    config: Option<PathBuf>,
    #[arg(long, group = "source", value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the extension of `--out`.
    #[arg(long)]
    format: Option<String>,
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn exit_for(e: &ExperimentError) -> u8 {
    if e.is_config() {
        USAGE
    } else {
        NUMERICAL
    }
}

fn verify(args: VerifyArgs) -> ExitCode {
    if let Some(name) = args.gate {
        let gate = match get_gate(&name, args.theta) {
            Ok(g) => g,
            Err(e) => return fail(USAGE, e),
        };
        if gate.reconstructed {
            eprintln!("warning: {name} stages are a search-based reconstruction, not a reference sequence");
        }
        let seq = &gate.sequence;
        let report = validate_sequence(seq);
        print!("{}", report.to_text());
        if !report.passed() {
            return ExitCode::from(INVALID);
        }
        match gate.check() {
            Ok(()) => {
                match track_clifford(seq) {
                    Ok(t) => println!("{t}"),
                    Err(_) => println!("certificate: verified for angle {}", gate.theta.unwrap_or_default()),
                }
                ExitCode::from(OK)
            }
            Err(msg) => fail(INVALID, msg),
        }
    } else {
        let path = args.file.expect("clap enforces a source");
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => return fail(USAGE, format!("{}: {e}", path.display())),
        };
        let seq = match parse_sequence(&text) {
            Ok(s) => s,
            Err(e) => return fail(USAGE, e),
        };
        let report = validate_sequence(&seq);
        print!("{}", report.to_text());
        if !report.passed() {
            return ExitCode::from(INVALID);
        }
        match track_clifford(&seq) {
            Ok(t) => {
                println!("{t}");
                ExitCode::from(OK)
            }
            Err(e) => {
                println!("no Clifford transformation derived: {e}");
                ExitCode::from(OK)
            }
        }
    }
}

fn load_config(path: &Path) -> Result<ConfigDocument, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ConfigDocument::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn simulate(args: SimulateArgs) -> ExitCode {
    let doc = match load_config(&args.config) {
        Ok(d) => d,
        Err(e) => return fail(USAGE, e),
    };
    let config = doc.experiment;
    if config.sweep.is_some() {
        return fail(USAGE, "simulate takes a config without sweep keys; use `sweep`");
    }
    let point = match PreparedPoint::new(&config) {
        Ok(p) => p,
        Err(e) => return fail(exit_for(&e), e),
    };
    for w in &point.trace().warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &args.dump_trace {
        if let Err(e) = create(path).map_err(csv::Error::from).and_then(|f| point.trace().write_csv(f)) {
            return fail(USAGE, format!("{}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.dump_noise {
        let m = point.multipliers(args.run);
        if let Err(e) = create(path).map_err(csv::Error::from).and_then(|f| write_multipliers_csv(&point.trace().times, &m, f)) {
            return fail(USAGE, format!("{}: {e}", path.display()));
        }
    }
    match point.run(args.run) {
        Ok(r) => {
            println!("config_digest {}", config.digest());
            println!("run {}", args.run);
            println!("error {:e}", r.error);
            println!("leakage {:e}", r.leakage);
            println!("unitarity_defect {:e}", r.unitarity_defect);
            ExitCode::from(OK)
        }
        Err(e) => fail(exit_for(&e), e),
    }
}

fn sweep_cmd(args: SweepArgs) -> ExitCode {
    let (mut configs, mut out_path, mut format) = match (&args.config, &args.preset) {
        (Some(path), _) => match load_config(path) {
            Ok(doc) => (vec![doc.experiment], doc.output.path.map(PathBuf::from), Some(doc.output.format)),
            Err(e) => return fail(USAGE, e),
        },
        (None, Some(name)) => (preset(name, args.seed.unwrap_or(0), args.runs.unwrap_or(1000)).expect("validated preset"), None, None),
        (None, None) => unreachable!("clap enforces a source"),
    };
    for c in &mut configs {
        if let Some(seed) = args.seed {
            c.seed = seed;
            c.noise.seed = seed;
        }
        if let Some(runs) = args.runs {
            c.runs = runs;
        }
        if c.sweep.is_none() {
            return fail(USAGE, "config has no sweep.variable / sweep.values");
        }
    }
    if args.out.is_some() {
        out_path = args.out.clone();
        format = None;
    }
    if let Some(f) = &args.format {
        match OutputFormat::parse(f) {
            Some(f) => format = Some(f),
            None => return fail(USAGE, format!("unknown format {f:?}")),
        }
    }
    let format = format.unwrap_or_else(|| match out_path.as_ref().and_then(|p| p.extension()) {
        Some(ext) if ext == "json" => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });
    let result = match sweep_all(&configs) {
        Ok(r) => r,
        Err(e) => return fail(exit_for(&e), e),
    };
    print!("{}", summary_table(&result));
    let written = match &out_path {
        Some(path) => write_result(path, format, &result, &configs),
        None => Ok(()),
    };
    if let Err(e) = written {
        return fail(USAGE, e);
    }
    if result.failures.is_empty() {
        ExitCode::from(OK)
    } else {
        fail(NUMERICAL, format!("{} point(s) failed; partial results kept", result.failures.len()))
    }
}

fn write_result(
    path: &Path,
    format: OutputFormat,
    result: &pauliflow::experiments::SweepResult,
    configs: &[ExperimentConfig],
) -> Result<(), String> {
    let err = |e: &dyn std::fmt::Display| format!("{}: {e}", path.display());
    let mut f = create(path).map_err(|e| err(&e))?;
    match format {
        OutputFormat::Csv => write_csv(result, &mut f).map_err(|e| err(&e))?,
        OutputFormat::Json => write_json(result, configs, &mut f).map_err(|e| err(&e))?,
    }
    f.flush().map_err(|e| err(&e))
}

fn list_gates() -> ExitCode {
    for name in GATE_NAMES {
        let theta = matches!(name, "rz" | "rx" | "ry").then_some(std::f64::consts::FRAC_PI_4);
        match get_gate(name, theta) {
            Ok(g) => println!("{}", g.summary()),
            Err(e) => return fail(NUMERICAL, e),
        }
    }
    ExitCode::from(OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::ListGates => list_gates(),
    }
}
