use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use marchenko_cli::{exit, run, CliError, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "marchenko", version, about = "Direct and inverse half-line matrix scattering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Potential and boundary matrix to scattering data.
    Direct(Common),
    /// Scattering data to potential and boundary matrix.
    Inverse(Common),
    /// Direct then inverse, compared against the input.
    Roundtrip(Common),
    /// Edge-by-edge scalar inversion of diagonal scattering data.
    Stargraph(Common),
    /// Built-in analytic checks.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    potential: Option<PathBuf>,
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output file for `direct`, output directory otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    kmax: Option<f64>,
    #[arg(long)]
    nk: Option<usize>,
    #[arg(long)]
    xmax: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    /// Skip the admissibility screen on the scattering data.
    #[arg(long)]
    force: bool,
    /// Print the summary as JSON on stdout.
    #[arg(long)]
    json_summary: bool,
}

fn config(cli: Cli) -> RunConfig {
    let (mode, a) = match cli.command {
        Command::Direct(a) => (Mode::Direct, a),
        Command::Inverse(a) => (Mode::Inverse, a),
        Command::Roundtrip(a) => (Mode::Roundtrip, a),
        Command::Stargraph(a) => (Mode::Stargraph, a),
        Command::Selftest(a) => (Mode::Selftest, a),
    };
    let mut cfg = RunConfig::new(mode);
    cfg.potential = a.potential;
    cfg.boundary = a.boundary;
    cfg.data = a.data;
    cfg.out = a.out;
    cfg.k_max = a.kmax.unwrap_or(cfg.k_max);
    cfg.n_k = a.nk.unwrap_or(cfg.n_k);
    cfg.x_max = a.xmax.unwrap_or(cfg.x_max);
    cfg.n_x = a.nx.unwrap_or(cfg.n_x);
    cfg.force = a.force;
    cfg.json_summary = a.json_summary;
    cfg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            return ExitCode::from(code);
        }
    };
    let cfg = config(cli);
    match run(&cfg) {
        Ok(report) => {
            let text = if cfg.json_summary {
                serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
            } else {
                report.to_text()
            };
            // A closed pipe on stdout is not a failure of the run.
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(if report.passed { exit::OK } else { exit::TOLERANCE })
        }
        Err(e) => {
            report_error(&cfg, &e);
            ExitCode::from(e.exit_code())
        }
    }
}

fn report_error(cfg: &RunConfig, e: &CliError) {
    eprintln!("error: {e}");
    if cfg.json_summary {
        let v = json!({ "command": cfg.mode.name(), "error": e.kind(), "exit_code": e.exit_code(), "message": e.to_string() });
        let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&v).expect("error serializes"));
    }
}
