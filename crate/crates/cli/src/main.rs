use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use privstate_cli::config::parse_range;
use privstate_cli::report::write_output;
use privstate_cli::{bounds, construct, optimize, render, suites, CliError, Format, RunConfig, Suite};
use privstate_core::Family;

#[derive(Parser)]
#[command(name = "privstate", version, about = "Numerical checks for private states and their key rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites.
    Verify(Common),
    /// Tabulate bounds over a dimension sweep.
    Bounds(Common),
    /// Maximize the partially measured divergence over Alice's measurements.
    Optimize(Common),
    /// Dump a family member as JSON.
    Construct(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Comma-separated suites, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    /// State family (swap, fourier, flower, ppt, ppt_invariant, two_m_example, alpha, alpha_tilde).
    #[arg(long)]
    family: Option<String>,
    /// Single shield dimension.
    #[arg(long = "d", conflicts_with = "d_range")]
    d: Option<usize>,
    /// Inclusive dimension range, e.g. 2..8.
    #[arg(long = "d-range")]
    d_range: Option<String>,
    /// Key length in bits.
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Number of tensor copies for optimize (1 or 2).
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Overrides every check tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn config(&self, verify: bool) -> Result<RunConfig, CliError> {
        let family =
            self.family.as_deref().map(str::parse::<Family>).transpose().map_err(|e| CliError::Usage(e.to_string()))?;
        let dims = match (&self.d, &self.d_range) {
            (Some(d), _) => vec![*d],
            (None, Some(r)) => parse_range(r)?,
            (None, None) => Vec::new(),
        };
        let cfg = RunConfig {
            suites: if verify { Suite::parse_list(&self.suite)? } else { Vec::new() },
            family,
            dims,
            m: self.m,
            copies: self.copies,
            seed: self.seed,
            restarts: self.restarts,
            out: self.out.clone(),
            format: self.format.parse()?,
            tol: self.tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify(a) => {
            let cfg = a.config(true)?;
            let report = suites::run_verify(&cfg);
            write_output(&render(&report, cfg.format)?, cfg.out.as_deref())?;
            Ok(report.all_passed())
        }
        Command::Bounds(a) => {
            let cfg = a.config(false)?;
            let (report, rows) = bounds::run_bounds(&cfg)?;
            let text = match cfg.format {
                Format::Csv => bounds::table_csv(&rows)?,
                Format::Json => report.to_json(),
            };
            write_output(&text, cfg.out.as_deref())?;
            Ok(report.all_passed())
        }
        Command::Optimize(a) => {
            let cfg = a.config(false)?;
            let report = optimize::run_optimize(&cfg)?;
            write_output(&render(&report, cfg.format)?, cfg.out.as_deref())?;
            Ok(report.all_passed())
        }
        Command::Construct(a) => {
            let cfg = a.config(false)?;
            if cfg.format != Format::Json {
                return Err(CliError::Usage("construct only writes JSON".into()));
            }
            let family = cfg.family.ok_or_else(|| CliError::Usage("construct needs --family".into()))?;
            let d = match (cfg.dims.as_slice(), family) {
                ([d], _) => *d,
                ([], Family::TwoMExample) => {
                    1usize.checked_shl(cfg.m).ok_or_else(|| CliError::Usage(format!("--m {} is too large", cfg.m)))?
                }
                ([], _) => return Err(CliError::Usage("construct needs --d".into())),
                _ => return Err(CliError::Usage("construct takes a single dimension".into())),
            };
            write_output(&construct::construct_json(family, d)?, cfg.out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("privstate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
