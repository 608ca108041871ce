//! The `swp` command line: single correlators, volume polynomials, tables,
//! series dumps and the verification suite, backed by a persistent cache.

pub mod cache;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use swp_core::correlator::degree_valid_keys;
use swp_core::scalar::{render_rational, render_rational_explicit};
use swp_core::tau::{build_free_energy, build_tau_function, SeriesCutoff};
use swp_core::volumes::{normalized_volume, super_volume, volume_polynomial};
use swp_core::{CorrelatorKey, Engine, MultiIndex, Rational, Strategy};
use thiserror::Error;

pub use verify::{Bounds, Suite, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] swp_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cache: {0}")]
    Cache(String),
    #[error("output: {0}")]
    Output(String),
    #[error("{failed} verification check(s) failed")]
    VerifyFailed { failed: usize },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 2 for bad input, 3 for inputs the theory leaves undefined, 4 for
    /// disagreeing values, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(swp_core::Error::InvalidArgument(_) | swp_core::Error::NotApplicable { .. }) => 2,
            CliError::Core(swp_core::Error::Undefined(_)) => 3,
            CliError::Core(swp_core::Error::Inconsistent { .. }) => 4,
            _ => 1,
        }
    }
}

fn output_error(e: impl std::fmt::Display) -> CliError {
    CliError::Output(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "swp", version, about = "Exact Θ-class intersection numbers and super Weil-Petersson volumes")]
pub struct Cli {
    /// Correlator cache file (JSON lines).
    #[arg(long, global = true, env = "SWP_CACHE", value_name = "PATH")]
    pub cache: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    /// Print cache and evaluation counters to stderr.
    #[arg(long, global = true)]
    pub stats: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one intersection number ⟨κ(b) Π τ_d⟩_g.
    Corr(CorrArgs),
    /// Print a volume polynomial.
    Volume(VolumeArgs),
    /// Tabulate every nonvanishing correlator up to the given bounds.
    Table(TableArgs),
    /// Run a verification suite and print its JSON report.
    Verify(VerifyArgs),
    /// Dump the free energy or tau function within a cutoff.
    Series(SeriesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// Cached value, or all three recursions checked against each other.
    Auto,
    Kmz,
    Thm14,
    Thm15,
    Closed,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    #[arg(short, long)]
    pub genus: u32,
    /// κ classes as index:count pairs, e.g. "1:2,3:1" for κ_1^2 κ_3.
    #[arg(short, long, default_value = "", value_parser = parse_kappa)]
    pub kappa: MultiIndex,
    /// ψ exponents, e.g. "0,0,1".
    #[arg(short, long, default_value = "", value_parser = parse_psi)]
    pub psi: Psi,
    #[arg(short, long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    #[arg(short, long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VolumeVariant {
    /// `V_{g,n}(L)`.
    Plain,
    /// `v_{g,n}(L)`, lengths divided by 2π and no π powers.
    Normalized,
    /// `V̂_{g,n}(L)`.
    Super,
}

impl VolumeVariant {
    fn name(self) -> &'static str {
        match self {
            VolumeVariant::Plain => "plain",
            VolumeVariant::Normalized => "normalized",
            VolumeVariant::Super => "super",
        }
    }
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[arg(short, long)]
    pub genus: u32,
    #[arg(short, long)]
    pub n: usize,
    #[arg(short, long, value_enum, default_value_t = VolumeVariant::Plain)]
    pub variant: VolumeVariant,
    #[arg(short, long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub g_max: u32,
    /// Bound on the number of ψ insertions plus the number of κ classes.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub weight_max: u32,
    #[arg(short, long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(short, long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[command(flatten)]
    pub bounds: Bounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    /// `F = log G`.
    FreeEnergy,
    /// `G = exp F`.
    Tau,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, default_value_t = 2)]
    pub max_genus: u32,
    #[arg(long, default_value_t = 3)]
    pub max_points: u32,
    #[arg(long, default_value_t = 2)]
    pub max_t_index: u32,
    #[arg(long, default_value_t = 1)]
    pub max_s_weight: u32,
    #[arg(short, long, value_enum, default_value_t = SeriesKind::FreeEnergy)]
    pub kind: SeriesKind,
    /// Drop the κ variables `s`.
    #[arg(long)]
    pub no_kappa: bool,
}

/// ψ exponents as given on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Psi(pub Vec<u32>);

fn parse_u32_list(text: &str) -> Result<Vec<u32>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|p| p.trim().parse::<u32>().map_err(|e| format!("{:?}: {e}", p.trim()))).collect()
}

pub fn parse_psi(text: &str) -> Result<Psi, String> {
    parse_u32_list(text).map(Psi)
}

pub fn parse_kappa(text: &str) -> Result<MultiIndex, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(MultiIndex::zero());
    }
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let (i, c) = part.split_once(':').ok_or_else(|| format!("{:?}: expected index:count", part.trim()))?;
        let i: usize = i.trim().parse().map_err(|e| format!("{:?}: {e}", i.trim()))?;
        let c: u32 = c.trim().parse().map_err(|e| format!("{:?}: {e}", c.trim()))?;
        if i == 0 {
            return Err("κ indices start at 1".into());
        }
        pairs.push((i, c));
    }
    Ok(MultiIndex::from_pairs(pairs))
}

fn psi_text(psi: &[u32]) -> String {
    psi.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(jobs) = cli.jobs {
        // Fails only if a pool already exists, as in repeated in-process runs.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build_global();
    }
    let stdout = io::stdout();
    let stderr = io::stderr();
    match run(&cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed { .. }) {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}

/// Runs a parsed command against a fresh engine seeded from the cache.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let engine = Engine::new();
    let path = cache::resolve_path(cli.cache.as_deref(), cli.no_cache);
    let loaded = match &path {
        Some(p) => cache::cache_load(&engine, p)?,
        None => 0,
    };
    let result = dispatch(&cli.command, &engine, out);
    if matches!(result, Err(CliError::Core(swp_core::Error::Inconsistent { .. }))) {
        return result;
    }
    let stored = match &path {
        Some(p) => cache::cache_store(&engine, p)?,
        None => 0,
    };
    if cli.stats {
        let s = engine.stats();
        writeln!(
            err,
            "stats: cache_loaded={loaded} cache_hits={} computed={} cache_stored={stored}",
            s.cache_hits, s.computed
        )
        .map_err(output_error)?;
    }
    result
}

fn dispatch(command: &Command, engine: &Engine, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Corr(a) => cmd_corr(engine, a, out),
        Command::Volume(a) => cmd_volume(engine, a, out),
        Command::Table(a) => cmd_table(engine, a, out),
        Command::Verify(a) => {
            let report = verify::run_suite(engine, a.suite, &a.bounds);
            let text = serde_json::to_string_pretty(&report).map_err(output_error)?;
            writeln!(out, "{text}").map_err(output_error)?;
            match report.failed() {
                0 => Ok(()),
                failed => Err(CliError::VerifyFailed { failed }),
            }
        }
        Command::Series(a) => cmd_series(engine, a, out),
    }
}

/// Evaluates one correlator; `auto` returns a cached value or insists that
/// the three recursions agree.
pub fn correlator_value(engine: &Engine, key: &CorrelatorKey, strategy: StrategyArg) -> Result<Rational, CliError> {
    let value = match strategy {
        StrategyArg::Auto => {
            if engine.published_value(key).is_some() {
                engine.value(key)?
            } else {
                let mut value = engine.correlator(key, Strategy::KmzDvv)?;
                for s in [Strategy::Thm14, Strategy::Thm15] {
                    value = engine.correlator(key, s)?;
                }
                value
            }
        }
        StrategyArg::Kmz => engine.correlator(key, Strategy::KmzDvv)?,
        StrategyArg::Thm14 => engine.correlator(key, Strategy::Thm14)?,
        StrategyArg::Thm15 => engine.correlator(key, Strategy::Thm15)?,
        StrategyArg::Closed => engine.correlator(key, Strategy::Closed)?,
    };
    Ok(value)
}

fn cmd_corr(engine: &Engine, a: &CorrArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let key = CorrelatorKey::new(a.genus, a.kappa.clone(), a.psi.0.clone());
    let value = correlator_value(engine, &key, a.strategy)?;
    let text = match a.format {
        Format::Text => render_rational(&value),
        Format::Json => json!({
            "genus": key.genus,
            "kappa": key.kappa.render_pairs(),
            "psi": psi_text(&key.psi),
            "value": render_rational_explicit(&value),
        })
        .to_string(),
    };
    writeln!(out, "{text}").map_err(output_error)
}

fn cmd_volume(engine: &Engine, a: &VolumeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let v = match a.variant {
        VolumeVariant::Plain => volume_polynomial(engine, a.genus, a.n)?,
        VolumeVariant::Normalized => normalized_volume(engine, a.genus, a.n)?,
        VolumeVariant::Super => super_volume(engine, a.genus, a.n)?,
    };
    let text = match a.format {
        Format::Text => v.to_string(),
        Format::Json => {
            let terms: Vec<_> = v
                .terms()
                .map(|(m, c)| json!({"pi_power": m.pi_power, "lengths": m.lengths, "value": render_rational_explicit(c)}))
                .collect();
            json!({
                "genus": a.genus,
                "n": a.n,
                "variant": a.variant.name(),
                "polynomial": v.to_string(),
                "terms": terms,
            })
            .to_string()
        }
    };
    writeln!(out, "{text}").map_err(output_error)
}

/// Every degree-valid key with `g ≤ g_max` and `n + ||b|| ≤ weight_max`, in
/// canonical order, with its value.
pub fn table_rows(engine: &Engine, g_max: u32, weight_max: u32) -> Result<Vec<(CorrelatorKey, Rational)>, CliError> {
    let keys: Vec<CorrelatorKey> = degree_valid_keys(g_max, weight_max as usize, weight_max)
        .into_iter()
        .filter(|k| k.n() as u32 + k.kappa.size() <= weight_max)
        .collect();
    let rows = keys.into_par_iter().map(|k| engine.value(&k).map(|v| (k, v))).collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

fn cmd_table(engine: &Engine, a: &TableArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = table_rows(engine, a.g_max, a.weight_max)?;
    let mut buf = Vec::new();
    match a.format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["g", "kappa", "psi", "value"]).map_err(output_error)?;
            for (k, v) in &rows {
                w.write_record([k.genus.to_string(), k.kappa.render_pairs(), psi_text(&k.psi), render_rational(v)])
                    .map_err(output_error)?;
            }
            w.flush().map_err(output_error)?;
        }
        TableFormat::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(k, v)| {
                    json!({
                        "g": k.genus,
                        "kappa": k.kappa.render_pairs(),
                        "psi": psi_text(&k.psi),
                        "value": render_rational_explicit(v),
                    })
                })
                .collect();
            buf = serde_json::to_vec_pretty(&rows).map_err(output_error)?;
            buf.push(b'\n');
        }
    }
    match &a.out {
        Some(path) => fs::write(path, &buf).map_err(|e| CliError::io(path, e)),
        None => out.write_all(&buf).map_err(output_error),
    }
}

fn cmd_series(engine: &Engine, a: &SeriesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cutoff = SeriesCutoff::new(a.max_genus, a.max_points, a.max_t_index, a.max_s_weight);
    let series = match a.kind {
        SeriesKind::FreeEnergy => build_free_energy(engine, &cutoff, !a.no_kappa)?,
        SeriesKind::Tau => build_tau_function(engine, &cutoff, !a.no_kappa)?,
    };
    out.write_all(series.dump().as_bytes()).map_err(output_error)
}
