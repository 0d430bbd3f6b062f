//! Command-line driver. Parsing, config merging and the five commands live
//! here so tests and examples can call them without a subprocess.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use rayon::prelude::*;

use crate::bounds::{compute_bounds, crosscheck, verify_report};
use crate::config::{Command, Format, RunConfig};
use crate::error::{Error, Result};
use crate::games::{estimate_runs, run_spec, summarize, validate_spec, wilson_interval, Z95};
use crate::kem::FoKem;
use crate::oracle::{run_seed, stream};
use crate::pke::PkeScheme;
use crate::report::*;
use crate::stats::{estimate_failure_stats, ffp_nk_bound_chebyshev};
use crate::toy::{exact_failure_stats, gamma_exact_toy, gamma_floor, gamma_hqc, budget_exponent, preset, SpreadnessParams, ToyScheme};

/// Relative tolerance between the two bound evaluation paths.
pub const CROSSCHECK_TOLERANCE: f64 = 1e-12;

pub const THREADS_ENV: &str = "FO_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fo-lab", version, about = "FO KEM lab: games, failure statistics and security bounds")]
pub struct Args {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Exit status for an error raised while running a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownAdversary { .. } | Error::MissingInput(_) | Error::InvalidParameter(_) => 1,
        Error::Invariant(_) => 3,
        _ => 2,
    }
}

/// A config-phase failure: always exit status 1.
fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Merges flags into the config file (flags win).
pub fn resolve_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match (args.command, cfg.command) {
        (Some(a), Some(c)) if a != c => {
            return Err(Error::Config(format!("command {} conflicts with {} in the config", a.as_str(), c.as_str())))
        }
        (Some(a), _) => cfg.command = Some(a),
        (None, None) => return Err(Error::Config("no command given".into())),
        _ => {}
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    Ok(cfg)
}

/// Runs the configured command. Per-item failures are listed in the report
/// rather than returned; the second value is the exit status.
pub fn execute(cfg: &RunConfig) -> Result<(Report, i32)> {
    let command = cfg.command.ok_or_else(|| Error::Config("no command given".into()))?;
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let mut errors = Vec::new();
    let results = match command {
        Command::Demo => Results::Demo(demo(cfg)?),
        Command::Games => Results::Games(games(cfg, &mut errors)?),
        Command::Stats => Results::Stats(stats(cfg)?),
        Command::Bounds => Results::Bounds(bounds(cfg)?),
        Command::Spread => Results::Spread(spread(cfg)?),
    };
    let status = errors.iter().map(|(_, code)| *code).max().unwrap_or(0);
    let mut recorded = cfg.clone();
    recorded.out = None;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command,
        config: recorded,
        results,
        errors: errors.into_iter().map(|(e, _)| e).collect(),
    };
    Ok((report, status))
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}

fn demo(cfg: &RunConfig) -> Result<DemoResult> {
    let scheme = cfg.scheme.resolve()?;
    let kem = FoKem::new(scheme.clone());
    let cycles: Vec<(bool, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let seed = run_seed(cfg.seed, i);
            let keys = kem.keygen(&mut stream(seed, "demo/keys"));
            let mut oracles = kem.oracles(seed);
            let enc = kem.encaps(&mut oracles, &keys.keys.pk, &mut stream(seed, "demo/encaps"))?;
            let dec = kem.decaps(&mut oracles, &keys, &enc.ciphertext)?;
            Ok((dec.is_none(), dec.is_some_and(|k| k != enc.key)))
        })
        .collect::<Result<_>>()?;
    let rejections = cycles.iter().filter(|c| c.0).count() as u64;
    let mismatches = cycles.iter().filter(|c| c.1).count() as u64;
    let failures = rejections + mismatches;
    let (lo, hi) = wilson_interval(failures, cfg.trials, Z95);
    Ok(DemoResult {
        scheme: scheme.name(),
        cycles: cfg.trials,
        mismatches,
        rejections,
        failure_rate: failures as f64 / cfg.trials as f64,
        std_error: crate::games::proportion_se(failures, cfg.trials),
        wilson_low: lo,
        wilson_high: hi,
    })
}

fn games(cfg: &RunConfig, errors: &mut Vec<(ItemError, i32)>) -> Result<GamesResult> {
    let scheme = cfg.scheme.resolve()?;
    if cfg.games.is_empty() {
        return Err(Error::Config("no [[games]] entries".into()));
    }
    for spec in &cfg.games {
        validate_spec(spec, &scheme).map_err(config_err)?;
    }
    let mut runs = Vec::new();
    for spec in &cfg.games {
        // every game sees the same master seed, so runs are matched across games
        match estimate_runs(cfg.trials, cfg.seed, |s| run_spec(spec, &scheme, s)) {
            Ok(outs) => runs.push(GameRun {
                spec: spec.clone(),
                summary: Some(summarize(&outs)),
                outcomes: if cfg.outcomes.is_some() { outs } else { Vec::new() },
            }),
            Err(e) => {
                let code = if matches!(e, Error::Invariant(_)) { 3 } else { 2 };
                errors.push((ItemError { item: format!("{}/{}", spec.game, spec.adversary), message: e.to_string() }, code));
                runs.push(GameRun { spec: spec.clone(), summary: None, outcomes: Vec::new() });
            }
        }
    }
    Ok(GamesResult { scheme: scheme.name(), runs })
}

fn stats(cfg: &RunConfig) -> Result<StatsResult> {
    let scheme = cfg.scheme.resolve()?;
    let req = cfg.stats_request();
    let stats = estimate_failure_stats(&scheme, &req)?;
    let exact = exact_comparison(&scheme, &stats);
    let nk_bounds = [1u64, 1 << 10, 1 << 20]
        .into_iter()
        .map(|q| {
            let v = ffp_nk_bound_chebyshev(q as u128, stats.delta_ik.value, stats.sigma.value)?;
            Ok(NkBoundPoint { q, chebyshev: v.to_f64() })
        })
        .collect::<Result<_>>()?;
    Ok(StatsResult { scheme: scheme.name(), records: stats.records(), stats, exact, nk_bounds })
}

/// Largest z-score of the estimates against exact enumeration.
pub fn exact_comparison(scheme: &ToyScheme, stats: &crate::stats::FailureStats) -> Option<ExactComparison> {
    let exact = exact_failure_stats(scheme).ok()?;
    let z = |est: f64, se: f64, truth: f64| {
        if se > 0.0 {
            (est - truth).abs() / se
        } else if est == truth {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let tail: Vec<f64> = stats.tail.iter().map(|p| exact.tail(p.t)).collect();
    let mut max_z = z(stats.delta_ik.value, stats.delta_ik.std_error, exact.delta_f64())
        .max(z(stats.sigma.value, stats.sigma.std_error, exact.sigma()));
    for (p, t) in stats.tail.iter().zip(&tail) {
        max_z = max_z.max(z(p.value, p.std_error, *t));
    }
    Some(ExactComparison { delta_ik: exact.delta_f64(), sigma: exact.sigma(), tail, max_z })
}

fn bounds(cfg: &RunConfig) -> Result<BoundsResult> {
    let inputs = cfg.bounds.as_ref().ok_or_else(|| Error::Config("missing [bounds] section".into()))?;
    inputs.validate().map_err(config_err)?;
    let set = compute_bounds(inputs).map_err(|e| match e {
        Error::MissingInput(_) | Error::Domain(_) => config_err(e),
        other => other,
    })?;
    let mut checks = Vec::new();
    for r in &set.reports {
        verify_report(r)?;
        let (dev, width) = crosscheck(r)?;
        if !(dev <= CROSSCHECK_TOLERANCE) {
            return Err(Error::Invariant(format!("route {}: evaluation paths differ by {dev:e}", r.route)));
        }
        checks.push(Crosscheck { route: r.route.clone(), max_deviation: dev, max_relative_width: width });
    }
    let spread_budget = crate::toy::PRESET_NAMES.iter().map(|n| spread_row(n, preset(n).unwrap())).collect::<Result<_>>()?;
    Ok(BoundsResult { bounds: set, crosscheck: checks, spread_budget })
}

pub fn spread_row(name: &str, params: SpreadnessParams) -> Result<SpreadRow> {
    let floor = gamma_floor(&params)?;
    let (gamma, log2_binomial_floor) = match params {
        SpreadnessParams::Frodo { .. } => (floor as f64, None),
        SpreadnessParams::Hqc { n1, n2, weight } => {
            let h = gamma_hqc(n1 * n2, weight)?;
            (h.gamma_exact, Some(h.log2_binomial_floor))
        }
    };
    let e = budget_exponent(floor);
    Ok(SpreadRow {
        name: name.into(),
        params,
        gamma,
        gamma_floor: floor,
        log2_binomial_floor,
        budget_exponent: e,
        budget: format!("q_G * 2^{e}"),
    })
}

fn spread(cfg: &RunConfig) -> Result<SpreadResult> {
    let mut rows = Vec::new();
    for name in &cfg.spread.presets {
        let p = preset(name).ok_or_else(|| Error::Config(format!("unknown spreadness preset {name:?}")))?;
        rows.push(spread_row(name, p)?);
    }
    for p in &cfg.spread.params {
        let name = match p {
            SpreadnessParams::Frodo { rows, cols, .. } => format!("frodo({rows}x{cols})"),
            SpreadnessParams::Hqc { n1, n2, weight } => format!("hqc({}, {weight})", n1 * n2),
        };
        rows.push(spread_row(&name, p.clone()).map_err(config_err)?);
    }
    let toy = if cfg.spread.toy {
        let scheme = cfg.scheme.resolve()?;
        let keys = scheme.keygen(&mut stream(cfg.seed, "spread/keys"));
        let t = gamma_exact_toy(&scheme, &keys)?;
        Some(ToySpreadRow {
            scheme: scheme.name(),
            gamma: t.gamma,
            max_multiplicity: t.max_multiplicity,
            randomness_size: t.randomness_size,
            argmax_message: t.argmax_message.0,
        })
    } else {
        None
    };
    Ok(SpreadResult { rows, toy })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Invariant(e.to_string()))
}

/// Full CLI run; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run(args: &Args) -> Result<i32> {
    let cfg = resolve_config(args)?;
    let pool = thread_pool()?;
    let (report, status) = pool.install(|| execute(&cfg))?;
    let text = render(&report, cfg.format)?;
    if let Some(path) = &cfg.outcomes {
        std::fs::write(path, report.outcome_lines()?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    for e in &report.errors {
        eprintln!("error: {}: {}", e.item, e.message);
    }
    Ok(status)
}
