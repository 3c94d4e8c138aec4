//! `tsand` — command-line front end for the one-dimensional tropical
//! sandpile simulator.
//!
//! Subcommands: `relax`, `limit`, `mc`, `scan`, `area`, `avalanche`.
//! Every file-producing run writes a `manifest.json` sidecar recording
//! the flags needed to reproduce it bit for bit. Exit codes: 0 success,
//! 2 flag or input errors, 3 relaxation guard tripped, 1 I/O failure.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use tropical_sandpile::config::{LimitCase, PointConfig};
use tropical_sandpile::coord::{snap, Coord};
use tropical_sandpile::montecarlo::{
    avalanche_trials, ccdf, fit_tail, run_trials, TrialConfig, DEFAULT_DENOM_LOG2,
};
use tropical_sandpile::observables::n2_locus_area;
use tropical_sandpile::raster;
use tropical_sandpile::relax::{relax, relax_traced, DEFAULT_MAX_SWEEPS};

#[derive(Parser)]
#[command(name = "tsand", version, about = "One-dimensional tropical sandpile simulator")]
struct Cli {
    /// Worker threads for the statistics commands (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relax a configuration of grain points to its stable state.
    Relax {
        /// Comma-separated points, exact fractions `a/b` or decimals.
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<String>,
        /// Print every toppling application.
        #[arg(long)]
        trace: bool,
        /// Snap the points to the grid with denominator 2^K instead of
        /// using their exact common denominator.
        #[arg(long, value_name = "K")]
        denom_log2: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: u64,
    },
    /// Print the closed-form limit state of a configuration.
    Limit {
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<String>,
        #[arg(long, value_name = "K")]
        denom_log2: Option<u32>,
    },
    /// Monte Carlo histogram of the relaxation length for uniform points.
    Mc {
        /// Points per configuration.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for histogram.csv, ccdf.csv, fit.csv, manifest.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DENOM_LOG2, value_name = "K")]
        denom_log2: u32,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: u64,
        /// Log-log fit range over the tail, as MIN,MAX.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [10, 300])]
        fit_range: Vec<u64>,
    },
    /// Raster scan of L(p, q) over the unit square.
    Scan {
        /// Grid resolution R: the scan covers R x R cell centers.
        #[arg(long)]
        grid: u32,
        /// Output directory for grid.pgm, grid.csv, manifest.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
        max_sweeps: u64,
    },
    /// Exact area of the two-grain locus with relaxation length N.
    Area {
        #[arg(long = "N")]
        n: u64,
    },
    /// Empirical avalanche-length distribution for n prior grains.
    Avalanche {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for density.csv, stats.csv, manifest.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DENOM_LOG2, value_name = "K")]
        denom_log2: u32,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn flag(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn guard(message: impl Into<String>) -> CliError {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> CliError {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if workers == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .expect("worker pool is configured once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Relax {
            points,
            trace,
            denom_log2,
            max_sweeps,
        } => cmd_relax(&points, trace, denom_log2, max_sweeps),
        Command::Limit { points, denom_log2 } => cmd_limit(&points, denom_log2),
        Command::Mc {
            n,
            trials,
            seed,
            out,
            denom_log2,
            max_sweeps,
            fit_range,
        } => cmd_mc(
            n,
            trials,
            seed,
            &out,
            denom_log2,
            max_sweeps,
            &fit_range,
            cli.workers,
        ),
        Command::Scan {
            grid,
            out,
            max_sweeps,
        } => cmd_scan(grid, &out, max_sweeps, cli.workers),
        Command::Area { n } => cmd_area(n),
        Command::Avalanche {
            n,
            trials,
            seed,
            out,
            denom_log2,
        } => cmd_avalanche(n, trials, seed, &out, denom_log2, cli.workers),
    }
}

/// Parses point flags into an exact configuration. Without `denom_log2`
/// the points keep their exact values over a common denominator; with it
/// they snap to the dyadic grid and every changed value is echoed.
fn parse_points(raw: &[String], denom_log2: Option<u32>) -> Result<PointConfig, CliError> {
    let mut coords = Vec::with_capacity(raw.len());
    for text in raw {
        let parsed: Coord = text.parse().map_err(|e| CliError::flag(format!("{}", e)))?;
        coords.push(parsed);
    }
    if let Some(k) = denom_log2 {
        if !(1..=63).contains(&k) {
            return Err(CliError::flag("--denom-log2 must be in 1..=63"));
        }
        let den = 1u64 << k;
        let mut snapped = Vec::with_capacity(coords.len());
        for (text, c) in raw.iter().zip(&coords) {
            let s = snap(c.num() as u128, c.den() as u128, den);
            if s != *c {
                println!("snap: {} -> {}", text.trim(), s);
            }
            snapped.push(s);
        }
        coords = snapped;
    }
    PointConfig::new(coords).map_err(|e| CliError::flag(e.to_string()))
}

fn cmd_relax(
    raw_points: &[String],
    trace: bool,
    denom_log2: Option<u32>,
    max_sweeps: u64,
) -> Result<(), CliError> {
    let cfg = parse_points(raw_points, denom_log2)?;
    println!("points: {}", cfg);
    println!("denominator: {}", cfg.den());
    let result = if trace {
        relax_traced(&cfg, max_sweeps)
    } else {
        relax(&cfg, max_sweeps)
    }
    .map_err(|e| CliError::guard(e.to_string()))?;
    if let Some(steps) = &result.trace {
        for (k, step) in steps.iter().enumerate() {
            let at = cfg.points()[step.point_index];
            if step.changed {
                println!("step {}: topple at {} -> {}", k + 1, at, step.state);
            } else {
                println!("step {}: topple at {} -> no change", k + 1, at);
            }
        }
    }
    println!("L = {}", result.sweeps);
    println!("final: {}", result.final_state);
    Ok(())
}

fn cmd_limit(raw_points: &[String], denom_log2: Option<u32>) -> Result<(), CliError> {
    let cfg = parse_points(raw_points, denom_log2)?;
    println!("points: {}", cfg);
    println!("denominator: {}", cfg.den());
    println!("q = {}", cfg.fractional_q());
    match cfg.limit_case() {
        LimitCase::IntegralSum => println!("case 1: the point sum is an integer (q = 0)"),
        LimitCase::OnGrainPoint(j) => {
            println!("case 2: q coincides with point {} (multiplicity 2)", j + 1)
        }
        LimitCase::NewBreakPoint(q) => println!("case 3: q = {} is a new break point", q),
    }
    println!("H = {}", cfg.limit_state());
    Ok(())
}

fn cmd_area(n: u64) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::flag("--N must be at least 1"));
    }
    println!("{}", n2_locus_area(n));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc(
    n: usize,
    trials: u64,
    seed: u64,
    out: &Path,
    denom_log2: u32,
    max_sweeps: u64,
    fit_range: &[u64],
    workers: Option<usize>,
) -> Result<(), CliError> {
    if n == 0 || trials == 0 {
        return Err(CliError::flag("--n and --trials must be at least 1"));
    }
    if !(1..=63).contains(&denom_log2) {
        return Err(CliError::flag("--denom-log2 must be in 1..=63"));
    }
    let (fit_min, fit_max) = (fit_range[0], fit_range[1]);
    if fit_min >= fit_max {
        return Err(CliError::flag("--fit-range MIN must be below MAX"));
    }
    let tc = TrialConfig {
        n,
        trials,
        master_seed: seed,
        denom_log2,
        max_sweeps,
    };
    let hist = run_trials(&tc).map_err(|e| CliError::guard(e.to_string()))?;
    let table = ccdf(&hist);
    let fit = fit_tail(&table, fit_min, fit_max);

    let mut dir = OutputDir::create(out)?;
    let outcome = (|| -> Result<(), CliError> {
        dir.write_file("histogram.csv", |w| {
            writeln!(w, "L,count")?;
            for (length, count) in hist.iter() {
                writeln!(w, "{},{}", length, count)?;
            }
            Ok(())
        })?;
        dir.write_file("ccdf.csv", |w| {
            writeln!(w, "N,ccdf")?;
            for (k, &(threshold, _)) in table.rows().iter().enumerate() {
                let p = table.probability(k);
                let p = *p.numer() as f64 / *p.denom() as f64;
                writeln!(w, "{},{}", threshold, sci(p))?;
            }
            Ok(())
        })?;
        match &fit {
            Ok(fit) => {
                dir.write_file("fit.csv", |w| {
                    writeln!(w, "param,value")?;
                    writeln!(w, "ccdf_slope,{}", sci(fit.ccdf_slope))?;
                    writeln!(w, "pmf_exponent,{}", sci(fit.pmf_exponent))?;
                    writeln!(w, "intercept,{}", sci(fit.intercept))?;
                    writeln!(w, "amplitude,{}", sci(fit.amplitude))?;
                    writeln!(w, "n_min,{}", fit.n_min)?;
                    writeln!(w, "n_max,{}", fit.n_max)?;
                    writeln!(w, "points_used,{}", fit.points_used)?;
                    writeln!(w, "residual_rms,{}", sci(fit.residual_rms))?;
                    Ok(())
                })?;
            }
            Err(e) => eprintln!("note: no tail fit written: {}", e),
        }
        dir.write_manifest(
            "mc",
            json!({
                "n": n,
                "trials": trials,
                "seed": seed,
                "denom_log2": denom_log2,
                "max_sweeps": max_sweeps,
                "fit_range": [fit_min, fit_max],
                "workers": workers,
                "out": out.display().to_string(),
            }),
        )?;
        Ok(())
    })();
    dir.finish(outcome)?;

    println!(
        "trials: {}, distinct L values: {}",
        trials,
        hist.iter().count()
    );
    println!("freq(L=1) = {}", sci(hist.frequency(1)));
    if let Ok(fit) = &fit {
        println!(
            "ccdf slope over [{}, {}] = {:.4} (pmf exponent {:.4})",
            fit.n_min, fit.n_max, fit.ccdf_slope, fit.pmf_exponent
        );
    }
    println!(
        "wrote histogram.csv, ccdf.csv{} and manifest.json to {}",
        if fit.is_ok() { ", fit.csv" } else { "" },
        out.display()
    );
    Ok(())
}

fn cmd_scan(
    grid: u32,
    out: &Path,
    max_sweeps: u64,
    workers: Option<usize>,
) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::flag("--grid must be at least 2"));
    }
    let raster = raster::scan(grid, max_sweeps);
    let tripped = raster.guard_tripped();

    let mut dir = OutputDir::create(out)?;
    let outcome = (|| -> Result<(), CliError> {
        dir.write_file("grid.pgm", |w| raster.write_pgm(w))?;
        dir.write_file("grid.csv", |w| raster.write_csv(w))?;
        dir.write_manifest(
            "scan",
            json!({
                "grid": grid,
                "max_sweeps": max_sweeps,
                "workers": workers,
                "out": out.display().to_string(),
            }),
        )?;
        Ok(())
    })();
    dir.finish(outcome)?;

    let mut areas = String::new();
    for length in 1..=6u32 {
        let a = raster.area_estimate(length);
        let _ = write!(
            areas,
            "{}L={}: {:.4}",
            if length > 1 { ", " } else { "" },
            length,
            *a.numer() as f64 / *a.denom() as f64
        );
    }
    println!("grid: {0} x {0}", grid);
    println!("areas: {}", areas);
    if tripped.is_empty() {
        println!("guard-tripped cells: none");
    } else {
        println!("guard-tripped cells: {} (recorded as 0)", tripped.len());
    }
    println!(
        "wrote grid.pgm, grid.csv and manifest.json to {}",
        out.display()
    );
    Ok(())
}

fn cmd_avalanche(
    n: usize,
    trials: u64,
    seed: u64,
    out: &Path,
    denom_log2: u32,
    workers: Option<usize>,
) -> Result<(), CliError> {
    if n == 0 || trials == 0 {
        return Err(CliError::flag("--n and --trials must be at least 1"));
    }
    if !(1..=63).contains(&denom_log2) {
        return Err(CliError::flag("--denom-log2 must be in 1..=63"));
    }
    let tc = TrialConfig {
        n,
        trials,
        master_seed: seed,
        denom_log2,
        max_sweeps: DEFAULT_MAX_SWEEPS,
    };
    const BINS: usize = 100;
    let stats = avalanche_trials(&tc, BINS);

    let mut dir = OutputDir::create(out)?;
    let outcome = (|| -> Result<(), CliError> {
        dir.write_file("density.csv", |w| {
            writeln!(w, "bin_lo,bin_hi,count,density")?;
            for (k, &count) in stats.bins.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    sci(k as f64 / BINS as f64),
                    sci((k + 1) as f64 / BINS as f64),
                    count,
                    sci(stats.density(k))
                )?;
            }
            Ok(())
        })?;
        dir.write_file("stats.csv", |w| {
            writeln!(w, "stat,value")?;
            writeln!(w, "trials,{}", stats.trials)?;
            writeln!(w, "degenerate_resamples,{}", stats.degenerate_resamples)?;
            writeln!(w, "mean,{}", sci(stats.mean))?;
            writeln!(w, "variance,{}", sci(stats.variance))?;
            Ok(())
        })?;
        dir.write_manifest(
            "avalanche",
            json!({
                "n": n,
                "trials": trials,
                "seed": seed,
                "denom_log2": denom_log2,
                "bins": BINS,
                "workers": workers,
                "out": out.display().to_string(),
            }),
        )?;
        Ok(())
    })();
    dir.finish(outcome)?;

    println!(
        "trials: {}, degenerate resamples: {}",
        stats.trials, stats.degenerate_resamples
    );
    println!(
        "mean avalanche length = {:.4} (law predicts 2/3)",
        stats.mean
    );
    println!(
        "wrote density.csv, stats.csv and manifest.json to {}",
        out.display()
    );
    Ok(())
}

/// 17-significant-digit scientific notation for statistical outputs.
fn sci(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Output directory that keeps runs atomic: files are written to a
/// temporary name and renamed, and every file of a failed run is removed.
struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    fn create(dir: &Path) -> Result<OutputDir, CliError> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write_file(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let tmp = self.dir.join(format!("{}.tmp", name));
        let path = self.dir.join(name);
        let result = (|| -> io::Result<()> {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            write(&mut w)?;
            w.flush()?;
            fs::rename(&tmp, &path)
        })();
        match result {
            Ok(()) => {
                self.written.push(path);
                Ok(())
            }
            Err(e) => {
                let _ = fs::remove_file(&tmp);
                Err(e.into())
            }
        }
    }

    fn write_manifest(
        &mut self,
        subcommand: &str,
        flags: serde_json::Value,
    ) -> Result<(), CliError> {
        let manifest = json!({
            "tool": "tsand",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": subcommand,
            "flags": flags,
        });
        self.write_file("manifest.json", |w| {
            writeln!(w, "{}", serde_json::to_string_pretty(&manifest)?)?;
            Ok(())
        })
    }

    /// Propagates the run outcome, removing all files on failure.
    fn finish(self, outcome: Result<(), CliError>) -> Result<(), CliError> {
        if outcome.is_err() {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
        outcome
    }
}
