use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cu_factor::error::{CuError, Result};
use cu_factor::runner::{report_path, run_scenario, write_report};
use cu_factor::scenario::{parse_scenario, Format};

/// Runs the checks of a scenario file and writes a report.
#[derive(Parser, Debug)]
#[command(name = "cu-factor", version)]
struct Args {
    /// Scenario file.
    #[arg(long)]
    input: PathBuf,
    /// Directory for the report; defaults to the directory of the input.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `depth` in the scenario settings.
    #[arg(long)]
    depth: Option<u64>,
    /// Overrides `frac_bound` in the scenario settings.
    #[arg(long)]
    frac_bound: Option<u64>,
    /// Overrides `seed` in the scenario settings.
    #[arg(long)]
    seed: Option<u64>,
    /// Report format: text or machine (JSON).
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, env = "CU_FACTOR_JOBS")]
    jobs: Option<usize>,
    /// Print the report to stdout as well.
    #[arg(long)]
    print: bool,
}

fn run(args: &Args) -> Result<i32> {
    if let Some(n) = args.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| CuError::Io(e.to_string()))?;
    }
    let text = fs::read_to_string(&args.input)?;
    let mut sc = parse_scenario(&text)?;
    if let Some(d) = args.depth {
        sc.settings.depth = d;
    }
    if let Some(b) = args.frac_bound {
        sc.settings.frac_bound = b;
    }
    if let Some(s) = args.seed {
        sc.settings.seed = s;
    }
    if let Some(f) = args.format {
        sc.settings.format = f;
    }
    let format = sc.settings.format;
    let outcome = run_scenario(&sc)?;
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args.input.parent().map(PathBuf::from).unwrap_or_default(),
    };
    let path = report_path(&dir, &args.input, format);
    write_report(&outcome, &path, format)?;
    if args.print {
        print!("{}", outcome.render(format));
    }
    for rec in &outcome.records {
        let mark = if rec.unexpected { "UNEXPECTED" } else { "ok" };
        eprintln!("{:>10} {} [{}]: {}", mark, rec.command, rec.report.subject, rec.report.status);
    }
    eprintln!("report: {}", path.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
