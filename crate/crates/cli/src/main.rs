mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trimmed_iga::analysis::{convergence_study, oracle_measure, rate_summary, write_csv, CaseKind, Column};
use trimmed_iga::verify;

#[derive(Parser)]
#[command(name = "trimmed-iga", version, about = "Convergence studies for trimmed isogeometric analysis")]
struct Cli {
    /// Worker threads (default: config value, else 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Random seed for oracles and the verify suite (default: config value, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path, overriding `output_path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall time in the `secs` column (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write the CSV and rate summary.
    Run { config: PathBuf },
    /// Run the invariant suite; exit status 0 when everything passes.
    Verify,
    /// Monte-Carlo estimate of the trimmed domain measure.
    Oracle {
        #[arg(long)]
        case: CaseKind,
        /// Sample count; scientific notation such as 1e7 is accepted.
        #[arg(long, default_value = "1e6", value_parser = parse_count)]
        samples: usize,
    },
    /// Print raw and diagonally scaled condition numbers per mesh level.
    Condition { config: PathBuf },
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v >= 1.0 && v <= 1e12 && v.fract() == 0.0) {
        return Err(format!("sample count must be a positive integer, got {s}"));
    }
    Ok(v as usize)
}

fn init_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| e.to_string())
}

fn load(path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn rates_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    csv.with_file_name(format!("{stem}.rates.txt"))
}

fn run(cli: &Cli, path: &Path) -> Result<(), String> {
    let cfg = load(path)?;
    init_threads(cli.threads.or(cfg.threads).unwrap_or(1))?;
    let mut s = cfg.settings();
    s.condition = true;
    s.timing = cli.timing;
    let records = convergence_study(cfg.case_name, &[s], &cfg.elements());
    let csv = cli.out.clone().or(cfg.output_path.clone()).unwrap_or_else(|| {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
        PathBuf::from(format!("{stem}.csv"))
    });
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let mut buf = Vec::new();
    write_csv(&records, &mut buf).map_err(|e| e.to_string())?;
    fs::write(&csv, buf).map_err(|e| format!("{}: {e}", csv.display()))?;
    let summary = rate_summary(&records);
    let rates = rates_path(&csv);
    fs::write(&rates, &summary).map_err(|e| format!("{}: {e}", rates.display()))?;
    print!("{summary}");
    println!("wrote {} and {}", csv.display(), rates.display());
    let failed = records.iter().flat_map(|r| &r.rows).filter(|r| r.failure.is_some()).count();
    if failed > 0 {
        return Err(format!("{failed} mesh level(s) failed"));
    }
    Ok(())
}

fn condition(cli: &Cli, path: &Path) -> Result<(), String> {
    let cfg = load(path)?;
    init_threads(cli.threads.or(cfg.threads).unwrap_or(1))?;
    let mut s = cfg.settings();
    s.condition = true;
    let records = convergence_study(cfg.case_name, &[s], &cfg.elements());
    println!("{:>8} {:>8} {:>12} {:>12} {:>10}", "elements", "dofs", "cond_raw", "cond_scaled", "ratio");
    for row in &records[0].rows {
        match &row.failure {
            None => println!(
                "{:>8} {:>8} {:>12.4e} {:>12.4e} {:>10.3e}",
                row.elements,
                row.dofs,
                row.cond_raw,
                row.cond_scaled,
                row.cond_raw / row.cond_scaled
            ),
            Some(e) => println!("{:>8} failed: {e}", row.elements),
        }
    }
    for c in [Column::CondRaw, Column::CondScaled] {
        if let Some(v) = records[0].slope(c) {
            println!("{} slope vs h: {:.3}", c.name(), v);
        }
    }
    Ok(())
}

fn verify_cmd(cli: &Cli) -> Result<(), String> {
    init_threads(cli.threads.unwrap_or(1))?;
    let checks = verify::run_all(cli.seed.unwrap_or(0));
    let mut failed = 0;
    for c in &checks {
        println!("{} {:<24} {:>7.2}s  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.secs, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(format!("{failed} of {} checks failed", checks.len()));
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}

fn oracle(cli: &Cli, kind: CaseKind, samples: usize) -> Result<(), String> {
    init_threads(cli.threads.unwrap_or(1))?;
    let case = kind.build();
    let mut hi = [1.0, 1.0, 0.0];
    if case.dim == 3 {
        hi[2] = 1.0;
    }
    let m = oracle_measure(&case.boundary, &case.map(), &[0.0; 3], &hi, samples, cli.seed.unwrap_or(0));
    println!("{} measure = {:.12} ± {:.3e} ({} samples)", case.name(), m.value, m.std_error, m.samples);
    println!("closed form = {:.12}", case.exact_measure);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Verify => verify_cmd(&cli),
        Command::Oracle { case, samples } => oracle(&cli, *case, *samples),
        Command::Condition { config } => condition(&cli, config),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
