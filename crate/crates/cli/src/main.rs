use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use recind_cli::bench::{front_trace_csv, run_bench, DEFAULT_DIM, DEFAULT_OBSERVATIONS};
use recind_cli::config::SimulateConfig;
use recind_cli::decompose::{parse_pmf_input, run_decompose};
use recind_cli::exact::{marginal_table_csv, run_exact, tv_table_csv};
use recind_cli::indicators::indicators_csv;
use recind_cli::input::{parse_htable, parse_path};
use recind_cli::output::{to_json, OutputDir};
use recind_cli::{thread_pool_from_env, CliError, CliResult, ModeSelection};
use recind_core::{SemanticsMode, DEFAULT_STATE_CAP};

/// Record indicators in R^d and their independence.
#[derive(Debug, Parser)]
#[command(name = "recind", version)]
struct Cli {
    /// Record semantics; the default depends on the command.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeSelection>,

    /// Master seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo replicates (overrides the config file).
    #[arg(long, global = true)]
    replicates: Option<u64>,

    /// Directory for output files; stdout when omitted where allowed.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Largest number of rank tuples exact enumeration may visit.
    #[arg(long, global = true)]
    cap_states: Option<u128>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-observation record indicators for a path file.
    Indicators { input: PathBuf },
    /// Exact joint law for iid observations by rank enumeration.
    Exact {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Monte Carlo experiment described by a config file.
    Simulate { config: PathBuf },
    /// Checks the pattern decomposition of E ∏ h_j(ζ_j).
    Decompose {
        #[arg(long)]
        n: usize,
        /// CSV rows `j,h0,h1` for j = 2..=n.
        #[arg(long)]
        h: PathBuf,
        /// JSON from `exact` or CSV rows `outcome,prob`.
        #[arg(long)]
        pmf: PathBuf,
    },
    /// Throughput of the streaming detector.
    Bench {
        #[arg(long, default_value_t = DEFAULT_OBSERVATIONS)]
        observations: u64,
        #[arg(long, default_value_t = DEFAULT_DIM)]
        d: usize,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn emit(out_dir: Option<&Path>, name: &str, contents: &str) -> CliResult<()> {
    match out_dir {
        Some(dir) => {
            OutputDir::create(dir)?.write(name, contents)?;
        }
        None => std::io::stdout().write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let out_dir = cli.out_dir.as_deref();
    let cap = cli.cap_states.unwrap_or(DEFAULT_STATE_CAP);
    match cli.command {
        Command::Indicators { input } => {
            let path = parse_path(&read(&input)?)?;
            let modes = cli.mode.unwrap_or(ModeSelection::Both).modes();
            emit(out_dir, "indicators.csv", &indicators_csv(&path, &modes))
        }
        Command::Exact { n, d } => {
            let modes = cli.mode.unwrap_or(ModeSelection::Both).modes();
            let report = run_exact(n, d, &modes, cap)?;
            let json = to_json(&report)?;
            if let Some(dir) = out_dir {
                let mut out = OutputDir::create(dir)?;
                out.write("exact.json", &json)?;
                out.write("exact_marginals.csv", &marginal_table_csv(&report))?;
                out.write("exact_tv.csv", &tv_table_csv(&report))?;
                Ok(())
            } else {
                emit(None, "", &json)
            }
        }
        Command::Simulate { config } => {
            let mut cfg: SimulateConfig = read(&config)?.parse()?;
            if let Some(m) = cli.mode {
                cfg.mode = m;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(r) = cli.replicates {
                if r == 0 {
                    return Err(CliError::input("--replicates must be at least 1"));
                }
                cfg.replicates = r;
            }
            if let Some(c) = cli.cap_states {
                cfg.cap_states = c;
            }
            let dir = out_dir.ok_or_else(|| CliError::input("simulate needs --out-dir"))?;
            let report = recind_cli::simulate::run_simulate(&cfg, dir)?;
            for m in &report.modes {
                let l = &m.l_statistics;
                eprintln!("{}: mean L = {} (se {})", m.mode, l.mean, l.std_error);
            }
            Ok(())
        }
        Command::Decompose { n, h, pmf } => {
            let table = parse_htable(&read(&h)?, n)?;
            let single = cli.mode.and_then(|m| match m.modes().as_slice() {
                [one] => Some(*one),
                _ => None,
            });
            let (pmf_n, probs) = parse_pmf_input(&read(&pmf)?, single)?;
            let report = run_decompose(n, table, pmf_n, probs)?;
            emit(out_dir, "decompose.json", &to_json(&report)?)
        }
        Command::Bench { observations, d } => {
            let seed = cli.seed.unwrap_or(0);
            let modes: Vec<SemanticsMode> = cli.mode.unwrap_or(ModeSelection::Chain).modes();
            let reports = modes
                .iter()
                .map(|&m| run_bench(observations, d, m, seed))
                .collect::<CliResult<Vec<_>>>()?;
            match out_dir {
                Some(dir) => {
                    let mut out = OutputDir::create(dir)?;
                    out.write("bench.json", &to_json(&reports)?)?;
                    out.write("front_trace.csv", &front_trace_csv(&reports))?;
                    Ok(())
                }
                None => emit(None, "", &to_json(&reports)?),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = thread_pool_from_env().and_then(|pool| match pool {
        Some(pool) => pool.install(|| run(cli)),
        None => run(cli),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("recind: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
