//! Command-line front end.
//!
//! Every subcommand writes a `#`-prefixed run manifest followed by CSV, to
//! stdout or to `--out`. Operating SNRs and total powers are given in dB and
//! converted once here; thresholds and mean channel gains are linear ratios.
//! Options may also come from a `key=value` file passed with `--config`;
//! flags on the command line take precedence over the file.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channel::ChannelModel;
use crate::classifier::{
    build_empirical_table, default_classes, map_classify, normalize_priors, sigma2_ml_estimate,
    AmplitudeSequence, ClassModel, TABLE_PROBES,
};
use crate::montecarlo::{mc_curve, per_hop_power, McConfig, SafKernel, SdfKernel};
use crate::numeric::bisect;
use crate::power_alloc::{
    epa, outage_vs_distance, pa_asymptotic, pa_fixed_point_with, pa_objective, pa_oracle,
    FixedPointWeights,
};
use crate::saf::outage_saf;
use crate::sdf::{
    diversity_order, local_slopes, outage_sdf_best, threshold_from_rate, NetworkConfig, OutagePoint,
};
use crate::{db_to_linear, Error};

/// Exit status for bad arguments, unreadable input and invalid parameters.
pub const EXIT_USAGE: i32 = 1;
/// Exit status when an iterative numerical method fails to converge.
pub const EXIT_NUMERICAL: i32 = 2;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5eed;

const DEFAULT_GAMMA_O: f64 = 3.0;
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "cascaded-relay", version, about = "Outage, diversity, power allocation and cascade-order classification for dual-hop relaying over cascaded Rayleigh fading")]
pub struct Cli {
    /// Write CSV to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// File of `key=value` lines supplying any long option of the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outage probability against per-hop SNR.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Outage(OutageArgs),
    /// Local log-log slope of the outage curve.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Diversity(DiversityArgs),
    /// Source/relay power split by several methods.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Pa(PaArgs),
    /// Outage against the source-relay distance.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Distance(DistanceArgs),
    /// Empirical amplitude densities per cascade order at the training probes.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Table1(Table1Args),
    /// MAP cascade-order decision for a file of amplitudes.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Classify(ClassifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Outage(_) => "outage",
            Command::Diversity(_) => "diversity",
            Command::Pa(_) => "pa",
            Command::Distance(_) => "distance",
            Command::Table1(_) => "table1",
            Command::Classify(_) => "classify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Sdf,
    Saf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Channel {
    /// Product of Rayleigh factors.
    Exact,
    /// Gamma-type approximation of the hop SNR.
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PaMethod {
    FixedPoint,
    Oracle,
    Asymptotic,
    Epa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weights {
    Consistent,
    Printed,
}

/// An inclusive `start:stop:step` grid, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: String,
    points: Vec<f64>,
}

impl Grid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if parts.iter().any(|v| !v.is_finite()) {
            return Err(format!("`{s}` has a non-finite entry"));
        }
        let points = match parts[..] {
            [v] => vec![v],
            [start, stop, step] => {
                if !(step > 0.0) || stop < start {
                    return Err(format!("`{s}` needs start <= stop and step > 0"));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > MAX_GRID_POINTS {
                    return Err(format!("`{s}` has more than {MAX_GRID_POINTS} points"));
                }
                (0..count)
                    .map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9)
                    .collect()
            }
            _ => return Err(format!("`{s}` is not of the form start:stop:step")),
        };
        Ok(Grid {
            spec: s.to_string(),
            points,
        })
    }
}

/// Threshold options shared by the analytic commands.
#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Outage threshold γ_o (linear). Defaults to 3, the threshold for rate 1.
    #[arg(long, conflicts_with = "rate")]
    pub gamma_o: Option<f64>,

    /// Target rate R in bits/s/Hz; sets γ_o = 2^{2R} − 1.
    #[arg(long)]
    pub rate: Option<f64>,
}

impl ThresholdArgs {
    fn resolve(&self) -> Result<f64, Failure> {
        match (self.gamma_o, self.rate) {
            (_, Some(r)) => Ok(threshold_from_rate(r)?),
            (Some(g), None) => Ok(g),
            (None, None) => Ok(DEFAULT_GAMMA_O),
        }
    }

    fn push_params(&self, p: &mut Vec<(&'static str, String)>) {
        match (self.gamma_o, self.rate) {
            (_, Some(r)) => p.push(("rate", r.to_string())),
            (g, None) => p.push(("gamma-o", g.unwrap_or(DEFAULT_GAMMA_O).to_string())),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutageArgs {
    #[arg(long, value_enum, default_value_t = Scheme::Sdf)]
    pub scheme: Scheme,

    /// Cascade order of both hops.
    #[arg(long, default_value_t = 2)]
    pub n: u32,

    /// Number of relays N.
    #[arg(long, default_value_t = 3)]
    pub relays: usize,

    /// Per-hop SNR P/N₀ grid in dB.
    #[arg(long, allow_hyphen_values = true, default_value = "0:40:1")]
    pub snr: Grid,

    #[command(flatten)]
    pub threshold: ThresholdArgs,

    /// Mean channel gain of the source-relay hops (linear).
    #[arg(long, default_value_t = 1.0)]
    pub lambda1: f64,

    /// Mean channel gain of the relay-destination hops (linear).
    #[arg(long, default_value_t = 1.0)]
    pub lambda2: f64,

    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,

    /// Monte-Carlo trials per SNR point.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Monte-Carlo worker threads (results do not depend on this).
    #[arg(long)]
    pub workers: Option<usize>,

    /// Channel law used by the Monte-Carlo engine.
    #[arg(long, value_enum, default_value_t = Channel::Exact)]
    pub channel: Channel,

    /// Replace γ_o by the threshold at which the analytic outage equals
    /// `--target` at this per-hop SNR (dB).
    #[arg(long, value_name = "SNR_DB")]
    pub calibrate: Option<f64>,

    /// Outage level used by `--calibrate`.
    #[arg(long, default_value_t = 1e-3)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    #[arg(long, value_enum, default_value_t = Scheme::Sdf)]
    pub scheme: Scheme,

    #[arg(long, default_value_t = 2)]
    pub n: u32,

    #[arg(long, default_value_t = 2)]
    pub relays: usize,

    /// Per-hop SNR window in dB.
    #[arg(long, allow_hyphen_values = true, default_value = "30:60:2")]
    pub snr: Grid,

    #[command(flatten)]
    pub threshold: ThresholdArgs,

    #[arg(long, default_value_t = 1.0)]
    pub lambda1: f64,

    #[arg(long, default_value_t = 1.0)]
    pub lambda2: f64,

    /// Use the synthetic curve SNR^{−d} instead of the network model.
    #[arg(long, value_name = "D")]
    pub power_law: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PaArgs {
    #[arg(long, default_value_t = 2)]
    pub n: u32,

    #[arg(long, default_value_t = 3)]
    pub relays: usize,

    #[arg(long, default_value_t = 1.0)]
    pub lambda1: f64,

    #[arg(long, default_value_t = 10.0)]
    pub lambda2: f64,

    /// Total SNR P_T/N₀ in dB.
    #[arg(long, default_value_t = 20.0)]
    pub pt: f64,

    #[command(flatten)]
    pub threshold: ThresholdArgs,

    /// Methods to report, comma separated.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "fixed-point,oracle,asymptotic,epa"
    )]
    pub method: Vec<PaMethod>,

    /// Weight form used by the fixed-point iteration.
    #[arg(long, value_enum, default_value_t = Weights::Consistent)]
    pub weights: Weights,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long, default_value_t = 2)]
    pub n: u32,

    #[arg(long, default_value_t = 3)]
    pub relays: usize,

    /// Path-loss exponent σ.
    #[arg(long, default_value_t = 3.0)]
    pub pathloss: f64,

    /// Total SNR P_T/N₀ in dB, split equally between the hops.
    #[arg(long, default_value_t = 20.0)]
    pub snr: f64,

    /// Normalized source-relay distances in (0, 1).
    #[arg(long, allow_hyphen_values = true, default_value = "0.05:0.95:0.05")]
    pub d1: Grid,

    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Samples per class.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Cascade orders, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    pub orders: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// File of amplitudes separated by whitespace, commas or newlines; `#` starts a comment.
    #[arg(long)]
    pub input: PathBuf,

    /// File of `n,prior` lines. The listed orders form the class set.
    #[arg(long)]
    pub priors: Option<PathBuf>,

    /// Class set when no priors file is given (uniform priors).
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    pub orders: Vec<u32>,

    /// Replace each class's default σ² = 2^{−n} by its maximum-likelihood fit to the input.
    #[arg(long)]
    pub fit_sigma2: bool,
}

/// A failed run: the message for stderr and the process exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE },
            message: e.to_string(),
        }
    }
}

/// Header lines identifying how an output was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Vec<(&'static str, String)>,
    pub base_seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
    /// Derived quantities worth recording next to the data.
    pub notes: Vec<(&'static str, String)>,
}

impl RunManifest {
    fn new(command: &str, parameters: Vec<(&'static str, String)>, base_seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            base_seed,
            version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            timestamp: timestamp(),
            notes: Vec::new(),
        }
    }

    /// `#` lines; each `param:` entry is valid `--config` input once the prefix is removed.
    pub fn render(&self) -> String {
        let mut out = format!("# command: {}\n", self.command);
        for (k, v) in &self.parameters {
            out.push_str(&format!("# param: {k}={v}\n"));
        }
        match self.base_seed {
            Some(s) => out.push_str(&format!("# base_seed: {s}\n")),
            None => out.push_str("# base_seed: none\n"),
        }
        out.push_str(&format!("# version: {}\n", self.version));
        out.push_str(&format!("# timestamp: {}\n", self.timestamp));
        for (k, v) in &self.notes {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }
}

/// RFC 3339 time of the run, or of `SOURCE_DATE_EPOCH` when that is set.
fn timestamp() -> String {
    use time::format_description::well_known::Rfc3339;
    use time::OffsetDateTime;

    let t = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| OffsetDateTime::from_unix_timestamp(s).ok())
        .unwrap_or_else(OffsetDateTime::now_utc);
    t.format(&Rfc3339).unwrap_or_else(|_| "unknown".into())
}

/// Formats a number so that it parses back to the same `f64`.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<String, Failure> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Failure::usage(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Failure::usage(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Failure::usage(e.to_string()))
    }
}

/// Parses `args`, runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse_with_config(&args) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                return EXIT_USAGE;
            }
            let _ = stdout.write_all(text.as_bytes());
            return 0;
        }
        Err(ParseFailure::Other(f)) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout
                    .write_all(text.as_bytes())
                    .map_err(|e| format!("cannot write output: {e}")),
            };
            match written {
                Ok(()) => 0,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_USAGE
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

enum ParseFailure {
    Clap(clap::Error),
    Other(Failure),
}

/// Parses once to find `--config`, then reparses with the file's options
/// inserted ahead of the command-line flags so that later flags win.
fn parse_with_config(args: &[OsString]) -> Result<Cli, ParseFailure> {
    let cli = Cli::try_parse_from(args).map_err(ParseFailure::Clap)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let extra = read_config(&path).map_err(ParseFailure::Other)?;
    let name = cli.command.name();
    let at = args
        .iter()
        .position(|a| a.to_str() == Some(name))
        .ok_or_else(|| ParseFailure::Other(Failure::usage("cannot locate subcommand")))?;
    let mut merged = args[..=at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[at + 1..]);
    Cli::try_parse_from(merged).map_err(ParseFailure::Clap)
}

/// Turns `key=value` lines into long options. `true`/`false` toggle switches.
fn read_config(path: &Path) -> Result<Vec<OsString>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Failure::usage(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(Failure::usage(format!(
                "{}:{}: config files cannot nest",
                path.display(),
                i + 1
            )));
        }
        match value.trim() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => {
                out.push(format!("--{key}").into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let (manifest, table) = match &cli.command {
        Command::Outage(a) => cmd_outage(a)?,
        Command::Diversity(a) => cmd_diversity(a)?,
        Command::Pa(a) => cmd_pa(a)?,
        Command::Distance(a) => cmd_distance(a)?,
        Command::Table1(a) => cmd_table1(a)?,
        Command::Classify(a) => cmd_classify(a)?,
    };
    Ok(manifest.render() + &table)
}

fn network(n: u32, relays: usize, lambda1: f64, lambda2: f64, gamma_o: f64) -> Result<NetworkConfig, Failure> {
    if relays == 0 {
        return Err(Failure::usage("--relays must be at least 1"));
    }
    Ok(NetworkConfig::uniform(n, relays, lambda1, lambda2, gamma_o)?)
}

fn analytic_outage(scheme: Scheme, config: &NetworkConfig, snr_db: f64) -> crate::Result<f64> {
    let power = per_hop_power(config, snr_db);
    match scheme {
        Scheme::Sdf => outage_sdf_best(config, &power),
        Scheme::Saf => outage_saf(config, &power),
    }
}

/// Threshold at which the analytic outage equals `target` at `snr_db`.
fn calibrate(scheme: Scheme, config: &NetworkConfig, target: f64, snr_db: f64) -> Result<f64, Failure> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Failure::usage("--target must lie in (0, 1)"));
    }
    let f = |ln_g: f64| -> crate::Result<f64> {
        let c = config.with_threshold(ln_g.exp())?;
        Ok(analytic_outage(scheme, &c, snr_db)?.ln() - target.ln())
    };
    Ok(bisect(f, -30.0, 30.0, 1e-12, 300)?.exp())
}

fn cmd_outage(a: &OutageArgs) -> Result<(RunManifest, String), Failure> {
    let mut config = network(a.n, a.relays, a.lambda1, a.lambda2, a.threshold.resolve()?)?;
    let mut params = vec![
        ("scheme", enum_name(a.scheme)),
        ("n", a.n.to_string()),
        ("relays", a.relays.to_string()),
        ("snr", a.snr.to_string()),
    ];
    a.threshold.push_params(&mut params);
    params.push(("lambda1", a.lambda1.to_string()));
    params.push(("lambda2", a.lambda2.to_string()));
    params.push(("mode", enum_name(a.mode)));
    let uses_mc = a.mode != Mode::Analytic;
    if uses_mc {
        params.push(("trials", a.trials.to_string()));
        params.push(("channel", enum_name(a.channel)));
    }
    if let Some(db) = a.calibrate {
        params.push(("calibrate", db.to_string()));
        params.push(("target", a.target.to_string()));
    }
    let mut manifest = RunManifest::new("outage", params, uses_mc.then_some(a.seed));

    if let Some(db) = a.calibrate {
        let g = calibrate(a.scheme, &config, a.target, db)?;
        config = config.with_threshold(g)?;
        manifest.notes.push(("calibrated gamma_o", num(g)));
    }

    let grid = a.snr.points();
    let analytic = if a.mode == Mode::Mc {
        None
    } else {
        Some(
            grid.iter()
                .map(|&s| analytic_outage(a.scheme, &config, s))
                .collect::<crate::Result<Vec<_>>>()?,
        )
    };
    let mc = if uses_mc {
        let mut mc = McConfig::new(a.trials, a.seed)?.with_channel(match a.channel {
            Channel::Exact => ChannelModel::CascadedRayleigh,
            Channel::Gamma => ChannelModel::GammaSurrogate,
        });
        if let Some(w) = a.workers {
            mc = mc.with_workers(w);
        }
        let model = mc.channel;
        let points = match a.scheme {
            Scheme::Sdf => mc_curve(
                grid,
                |s| SdfKernel::new(&config, &per_hop_power(&config, s), model),
                &mc,
            )?,
            Scheme::Saf => mc_curve(
                grid,
                |s| SafKernel::new(&config, &per_hop_power(&config, s), model),
                &mc,
            )?,
        };
        Some(points)
    } else {
        None
    };

    let mut header = vec!["snr_db"];
    if analytic.is_some() {
        header.push("p_out_analytic");
    }
    if mc.is_some() {
        header.extend(["p_out_mc", "mc_se"]);
    }
    let mut table = Table::new(&header);
    for (k, &s) in grid.iter().enumerate() {
        let mut row = vec![num(s)];
        if let Some(v) = &analytic {
            row.push(num(v[k]));
        }
        if let Some(m) = &mc {
            row.push(num(m[k].estimate.value));
            row.push(num(m[k].estimate.std_error));
        }
        table.push(row);
    }
    Ok((manifest, table.to_csv()?))
}

fn cmd_diversity(a: &DiversityArgs) -> Result<(RunManifest, String), Failure> {
    let grid = a.snr.points();
    if grid.len() < 2 {
        return Err(Failure::usage("--snr needs at least two points"));
    }
    let mut params = vec![("snr", a.snr.to_string())];
    let mut notes = Vec::new();
    let curve: Vec<OutagePoint> = if let Some(d) = a.power_law {
        params.push(("power-law", d.to_string()));
        notes.push(("asymptotic diversity order", num(d)));
        grid.iter()
            .map(|&s| OutagePoint {
                snr_db: s,
                p_out: db_to_linear(s).powf(-d),
            })
            .collect()
    } else {
        params.extend([
            ("scheme", enum_name(a.scheme)),
            ("n", a.n.to_string()),
            ("relays", a.relays.to_string()),
        ]);
        a.threshold.push_params(&mut params);
        params.push(("lambda1", a.lambda1.to_string()));
        params.push(("lambda2", a.lambda2.to_string()));
        let config = network(a.n, a.relays, a.lambda1, a.lambda2, a.threshold.resolve()?)?;
        let d = diversity_order(&config.relays[0].source, a.relays);
        notes.push(("asymptotic diversity order", num(d)));
        grid.iter()
            .map(|&s| {
                Ok(OutagePoint {
                    snr_db: s,
                    p_out: analytic_outage(a.scheme, &config, s)?,
                })
            })
            .collect::<crate::Result<Vec<_>>>()?
    };
    let mut manifest = RunManifest::new("diversity", params, None);
    manifest.notes = notes;
    let mut table = Table::new(&["snr_db", "slope"]);
    for p in local_slopes(&curve)? {
        table.push(vec![num(p.snr_db), num(p.p_out)]);
    }
    Ok((manifest, table.to_csv()?))
}

fn cmd_pa(a: &PaArgs) -> Result<(RunManifest, String), Failure> {
    let mut params = vec![
        ("n", a.n.to_string()),
        ("relays", a.relays.to_string()),
        ("lambda1", a.lambda1.to_string()),
        ("lambda2", a.lambda2.to_string()),
        ("pt", a.pt.to_string()),
    ];
    a.threshold.push_params(&mut params);
    let methods: Vec<String> = a.method.iter().map(|m| enum_name(*m)).collect();
    params.push(("method", methods.join(",")));
    params.push(("weights", enum_name(a.weights)));
    let mut manifest = RunManifest::new("pa", params, None);

    let base = network(a.n, a.relays, a.lambda1, a.lambda2, a.threshold.resolve()?)?;
    let config = base.with_total_power(base.noise_power * db_to_linear(a.pt))?;
    let mut table = Table::new(&["method", "rho", "p_out"]);
    for &m in &a.method {
        let rho = match m {
            PaMethod::FixedPoint => {
                let weights = match a.weights {
                    Weights::Consistent => FixedPointWeights::Consistent,
                    Weights::Printed => FixedPointWeights::Printed,
                };
                let sol = pa_fixed_point_with(&config, 1e-10, 10_000, weights)?;
                manifest
                    .notes
                    .push(("fixed-point iterations", sol.iterations.to_string()));
                sol.split.rho
            }
            PaMethod::Oracle => pa_oracle(&config)?.rho,
            PaMethod::Asymptotic => pa_asymptotic(&config)?.rho,
            PaMethod::Epa => epa(&config).rho,
        };
        table.push(vec![enum_name(m), num(rho), num(pa_objective(rho, &config)?)]);
    }
    Ok((manifest, table.to_csv()?))
}

fn cmd_distance(a: &DistanceArgs) -> Result<(RunManifest, String), Failure> {
    let mut params = vec![
        ("n", a.n.to_string()),
        ("relays", a.relays.to_string()),
        ("pathloss", a.pathloss.to_string()),
        ("snr", a.snr.to_string()),
        ("d1", a.d1.to_string()),
    ];
    a.threshold.push_params(&mut params);
    let manifest = RunManifest::new("distance", params, None);

    let base = network(a.n, a.relays, 1.0, 1.0, a.threshold.resolve()?)?;
    let config = base.with_total_power(base.noise_power * db_to_linear(a.snr))?;
    let power = epa(&config);
    let mut table = Table::new(&["d1", "p_out"]);
    for &d in a.d1.points() {
        table.push(vec![num(d), num(outage_vs_distance(d, &config, a.pathloss, &power)?)]);
    }
    Ok((manifest, table.to_csv()?))
}

fn cmd_table1(a: &Table1Args) -> Result<(RunManifest, String), Failure> {
    let orders: Vec<String> = a.orders.iter().map(u32::to_string).collect();
    let params = vec![
        ("samples", a.samples.to_string()),
        ("orders", orders.join(",")),
    ];
    let manifest = RunManifest::new("table1", params, Some(a.seed));
    let classes = default_classes(a.orders.iter().copied())?;
    let table = build_empirical_table(a.samples, &classes, &TABLE_PROBES, a.seed)?;
    Ok((manifest, table.to_csv()?))
}

fn read_amplitudes(path: &Path) -> Result<AmplitudeSequence, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v = tok.parse::<f64>().map_err(|_| {
                Failure::usage(format!("{}:{}: `{tok}` is not a number", path.display(), i + 1))
            })?;
            samples.push(v);
        }
    }
    if samples.is_empty() {
        return Err(Failure::usage(format!(
            "{} contains no amplitude samples",
            path.display()
        )));
    }
    Ok(AmplitudeSequence::new(samples)?)
}

fn read_priors(path: &Path) -> Result<Vec<ClassModel>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut models = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Failure::usage(format!("{}:{}: expected `n,prior`", path.display(), i + 1));
        let mut parts = line
            .split(|c: char| c == ',' || c == '=' || c.is_whitespace())
            .filter(|t| !t.is_empty());
        let n: u32 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let prior: f64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        models.push(ClassModel::new(n, ClassModel::default_sigma2(n), prior)?);
    }
    if models.is_empty() {
        return Err(Failure::usage(format!("{} lists no classes", path.display())));
    }
    normalize_priors(&mut models)?;
    Ok(models)
}

fn cmd_classify(a: &ClassifyArgs) -> Result<(RunManifest, String), Failure> {
    let mut params = vec![("input", a.input.display().to_string())];
    if let Some(p) = &a.priors {
        params.push(("priors", p.display().to_string()));
    } else {
        let orders: Vec<String> = a.orders.iter().map(u32::to_string).collect();
        params.push(("orders", orders.join(",")));
    }
    params.push(("fit-sigma2", a.fit_sigma2.to_string()));
    let mut manifest = RunManifest::new("classify", params, None);

    let seq = read_amplitudes(&a.input)?;
    let mut models = match &a.priors {
        Some(p) => read_priors(p)?,
        None => default_classes(a.orders.iter().copied())?,
    };
    if a.fit_sigma2 {
        for m in &mut models {
            m.sigma2 = sigma2_ml_estimate(&seq, m.n)?;
        }
    }
    let result = map_classify(&seq, &models)?;
    manifest.notes.push(("samples", seq.len().to_string()));
    manifest.notes.push(("label", result.label.to_string()));

    let top = result
        .scores
        .iter()
        .map(|s| s.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = result.scores.iter().map(|s| (s.1 - top).exp()).sum();
    let mut table = Table::new(&["n", "sigma2", "prior", "log_score", "posterior", "selected"]);
    for (model, &(n, score)) in models.iter().zip(&result.scores) {
        let score_text = if score.is_finite() { num(score) } else { "-inf".into() };
        table.push(vec![
            n.to_string(),
            num(model.sigma2),
            num(model.prior),
            score_text,
            num((score - top).exp() / total),
            u8::from(n == result.label).to_string(),
        ]);
    }
    Ok((manifest, table.to_csv()?))
}

fn enum_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}
