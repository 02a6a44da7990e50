//! Command-line front end: run configuration, the wire benchmark, the
//! reference-tensor cache, CSV and VTK output.
//!
//! ```text
//! q3d run --config wire.json [--steps N] [--out DIR]
//! q3d precompute-tensors --pmax P --mmax M
//! q3d export --config wire.json --step K [--out DIR]
//! ```
//!
//! The reference-tensor cache lives in `$Q3D_CACHE_DIR` (default `.q3d_cache`).

mod benchmark;
mod config;
mod vtk;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

pub use benchmark::{build_wire_benchmark, conductor_material, wire_cross_section, AIR_REGION, WIRE_REGION};
pub use config::{Discretization, Geometry, InitialCondition, Output, RunConfig, Source};
pub use vtk::{flux_density_at, format_value, sample_fields, temperature_at, VtkGrid};

use crate::error::{Error, Result};
use crate::solver::{initial_state, run_transient, StepRecord};
use crate::spectral1d::{CacheStatus, ReferenceTensorSet, BASIS_ID};

pub const CACHE_ENV: &str = "Q3D_CACHE_DIR";
pub const CSV_HEADER: &str = "t_s,E_mag_J,E_th_J,picard_iters,front_lo_m,front_hi_m";

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".q3d_cache"))
}

fn parse_cache_name(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix(&format!("reftensors_{BASIS_ID}_p"))?.strip_suffix(".bin")?;
    let (p, m) = rest.split_once("_m")?;
    Some((p.parse().ok()?, m.parse().ok()?))
}

/// Reference tensors with at least basis order `p` and Chebyshev order `m`:
/// the smallest valid cache file in `dir` that covers them, else a fresh
/// `(p, m)` set written to `dir`.
pub fn load_reference_tensors(dir: &Path, p: usize, m: usize) -> Result<Arc<ReferenceTensorSet>> {
    let mut candidates: Vec<(usize, usize)> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .filter_map(|e| parse_cache_name(&e.file_name().to_string_lossy()))
                .filter(|&(pp, mm)| pp >= p && mm >= m)
                .collect()
        })
        .unwrap_or_default();
    candidates.sort_by_key(|&(pp, mm)| (pp * (mm + 1), pp, mm));
    for (pp, mm) in candidates {
        let path = ReferenceTensorSet::cache_path(dir, pp, mm);
        match ReferenceTensorSet::read(&path) {
            Ok(set) if set.max_basis_order() == pp && set.max_cheb_order() == mm => {
                log::info!("reference tensors loaded from {}", path.display());
                return Ok(Arc::new(set));
            }
            Ok(_) => log::warn!("{}: orders do not match the file name", path.display()),
            Err(e) => log::warn!("{e}"),
        }
    }
    let (set, status) = ReferenceTensorSet::load_or_build(dir, p, m)?;
    log::info!("reference tensors (P = {p}, M = {m}): {status:?}");
    Ok(Arc::new(set))
}

#[derive(Debug, Clone)]
pub struct PrecomputeReport {
    pub path: PathBuf,
    pub status: CacheStatus,
    pub checksum: String,
}

/// Builds and stores the `(P, M)` reference tensors; an existing valid file is
/// only verified.
pub fn precompute_tensors(dir: &Path, pmax: usize, mmax: usize) -> Result<PrecomputeReport> {
    let (set, status) = ReferenceTensorSet::load_or_build(dir, pmax, mmax)?;
    Ok(PrecomputeReport {
        path: ReferenceTensorSet::cache_path(dir, pmax, mmax),
        status,
        checksum: set.checksum_hex(),
    })
}

fn csv_value(v: f64) -> String {
    format!("{v:e}")
}

pub fn csv_row(r: &StepRecord) -> String {
    let (lo, hi) = match r.front {
        Some((a, b)) => (csv_value(a), csv_value(b)),
        None => (String::new(), String::new()),
    };
    format!("{},{},{},{},{lo},{hi}", csv_value(r.t), csv_value(r.e_mag), csv_value(r.e_th), r.picard_iters)
}

/// Energy time series, flushed after every row.
pub struct CsvWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.line(CSV_HEADER)?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn write_record(&mut self, r: &StepRecord) -> Result<()> {
        self.line(&csv_row(r))
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<StepRecord>,
    pub all_converged: bool,
    pub csv_path: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("fields_step{step:04}.vtk"))
}

/// Runs the wire benchmark described by `config`: writes `energies.csv` (and
/// the requested VTK snapshots) to the output directory and prints one line
/// per step.
pub fn run(config: &RunConfig, cache: &Path) -> Result<RunSummary> {
    config.validate()?;
    let out_dir = config.output.dir.clone();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let d = &config.discretization;
    let refs = load_reference_tensors(cache, d.z_order, d.cheb_order)?;
    let (mut model, bump) = build_wire_benchmark(config, refs)?;
    let state = initial_state(&mut model, &bump, &config.transient)?;
    let csv_path = out_dir.join("energies.csv");
    let mut csv = CsvWriter::create(&csv_path)?;
    let mut snapshots = Vec::new();
    let (result, _) = run_transient(&mut model, state, &config.transient, |rec, st, m| {
        csv.write_record(rec)?;
        let front = match rec.front {
            Some((a, b)) => format!("[{a:.4}, {b:.4}] m"),
            None => "none".into(),
        };
        println!(
            "step {:>3}  t = {:.4} s  picard = {:>2}  E_mag = {:.6e} J  E_th = {:.6e} J  θ_max = {:.1} K  front = {front}",
            rec.step, rec.t, rec.picard_iters, rec.e_mag, rec.e_th, rec.theta_max
        );
        if config.output.snapshot_steps.contains(&rec.step) {
            let path = snapshot_path(&out_dir, rec.step);
            let title = format!("q3d step {} t = {} s", rec.step, rec.t);
            sample_fields(m, &st.a.values, &st.u.values, config.output.snapshot_dims, &title)?.write(&path)?;
            snapshots.push(path);
        }
        Ok(())
    })?;
    Ok(RunSummary {
        records: result.records,
        all_converged: result.all_converged,
        csv_path,
        snapshots,
    })
}

/// Recomputes the run up to `step` (runs are deterministic) and writes that
/// step's fields as a VTK snapshot.
pub fn export(config: &RunConfig, step: usize, cache: &Path) -> Result<PathBuf> {
    config.validate()?;
    if step > config.transient.n_steps {
        return Err(Error::Config(format!("step {step} beyond the {} configured steps", config.transient.n_steps)));
    }
    let out_dir = config.output.dir.clone();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let d = &config.discretization;
    let refs = load_reference_tensors(cache, d.z_order, d.cheb_order)?;
    let (mut model, bump) = build_wire_benchmark(config, refs)?;
    let state = initial_state(&mut model, &bump, &config.transient)?;
    let mut tc = config.transient;
    tc.t_end_s = config.transient.dt() * step.max(1) as f64;
    tc.n_steps = step;
    let path = snapshot_path(&out_dir, step);
    let mut written = false;
    let (_, _) = run_transient(&mut model, state, &tc, |rec, st, m| {
        if rec.step == step {
            let title = format!("q3d step {} t = {} s", rec.step, rec.t);
            sample_fields(m, &st.a.values, &st.u.values, config.output.snapshot_dims, &title)?.write(&path)?;
            written = true;
        }
        Ok(())
    })?;
    debug_assert!(written);
    Ok(path)
}

#[derive(Parser, Debug)]
#[command(name = "q3d", version, about = "Quasi-3D magneto-thermal quench simulation")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the transient wire simulation.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the number of time steps (the step size is kept).
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build (or verify) the reference-tensor cache.
    PrecomputeTensors {
        #[arg(long)]
        pmax: usize,
        #[arg(long)]
        mmax: usize,
    },
    /// Write the fields of one step as a VTK structured grid.
    Export {
        #[arg(long)]
        step: usize,
        #[arg(long, default_value = "wire.json")]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &Path, out: Option<PathBuf>) -> Result<RunConfig> {
    let mut c = RunConfig::load(path)?;
    if let Some(dir) = out {
        c.output.dir = dir;
    }
    Ok(c)
}

fn dispatch(cli: Cli) -> Result<i32> {
    let cache = cache_dir();
    match cli.command {
        Command::Run { config, steps, out } => {
            let mut c = load_config(&config, out)?;
            if let Some(n) = steps {
                let dt = c.transient.dt();
                c.transient.n_steps = n;
                if n > 0 {
                    c.transient.t_end_s = dt * n as f64;
                }
            }
            let summary = run(&c, &cache)?;
            println!("energies written to {}", summary.csv_path.display());
            if summary.all_converged {
                Ok(0)
            } else {
                eprintln!("error: at least one step did not converge");
                Ok(2)
            }
        }
        Command::PrecomputeTensors { pmax, mmax } => {
            let r = precompute_tensors(&cache, pmax, mmax)?;
            match r.status {
                CacheStatus::Loaded => println!("cache valid: {} (sha256 {})", r.path.display(), r.checksum),
                CacheStatus::Built => println!("cache built: {} (sha256 {})", r.path.display(), r.checksum),
                CacheStatus::Rebuilt => println!("cache rebuilt: {} (sha256 {})", r.path.display(), r.checksum),
            }
            Ok(0)
        }
        Command::Export { step, config, out } => {
            let c = load_config(&config, out)?;
            let path = export(&c, step, &cache)?;
            println!("fields of step {step} written to {}", path.display());
            Ok(0)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 64 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_names() {
        assert_eq!(parse_cache_name(&format!("reftensors_{BASIS_ID}_p6_m16.bin")), Some((6, 16)));
        assert_eq!(parse_cache_name("reftensors_other_p6_m16.bin"), None);
    }

    #[test]
    fn csv_row_format() {
        let r = StepRecord {
            step: 1,
            t: 0.04,
            e_mag: 1.5e-3,
            e_th: 2.0,
            picard_iters: 3,
            converged: true,
            front: None,
            front_spacing: 0.0,
            theta_max: 11.2,
            z_elements: 5,
        };
        assert_eq!(csv_row(&r), "4e-2,1.5e-3,2e0,3,,");
        let r2 = StepRecord { front: Some((0.25, 0.75)), ..r };
        assert_eq!(csv_row(&r2), "4e-2,1.5e-3,2e0,3,2.5e-1,7.5e-1");
        assert_eq!(CSV_HEADER.split(',').count(), 6);
    }
}
