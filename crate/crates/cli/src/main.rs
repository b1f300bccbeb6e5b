use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use goldbach_core::config::{parse_count, OutputFormat, RunConfig};
use goldbach_core::exp_sums::t_bound_scan;
use goldbach_core::goldbach::{r_direct, r_window_direct, r_window_fft};
use goldbach_core::lambda::{psi, sieve_window, write_cache};
use goldbach_core::report::{emit_plotdata, emit_t_scan, fmt_sig};
use goldbach_core::verifier::{
    grid_campaign, lemma_sieve_limit, run_lemma, verify_average, verify_long_interval, verify_main,
    Arithmetic, CampaignCheck, CampaignConfig, LemmaId, LemmaInput,
};
use goldbach_core::zero_sums::{
    psi_zero_sum, second_difference_term, second_difference_term_integral,
};
use goldbach_core::zeros::{
    bundled_zeros, count_check, declared_precision, find_zeros_low, load_zeros,
};
use goldbach_core::{Error, Report, VerificationReport, WindowSpec, ZeroSet};

/// Numerical checks of the short-interval explicit formula for Cesàro
/// averages of the Goldbach function R(n).
///
/// Exit status: 0 success, 1 a check failed, 2 usage error, 3 data error.
#[derive(Debug, Parser)]
#[command(name = "goldbach", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// key = value configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Zero table, one ordinate per line. Falls back to the config file,
    /// then $GOLDBACH_ZEROS, then the bundled 100-zero table.
    #[arg(long, global = true, value_name = "FILE")]
    zeros: Option<PathBuf>,
    /// Use at most this many ordinates of the zero table.
    #[arg(long, global = true, value_name = "COUNT")]
    max_zeros: Option<String>,
    /// Worker threads (recorded in every report).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print reports as CSV.
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    /// Directory for report files and plot data.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// File formats written to the output directory (csv, json).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    formats: Vec<String>,
    /// Also write gnuplot tables into the output directory.
    #[arg(long, global = true)]
    plot: bool,
    /// Override one config key, e.g. `tolerance.main=0.5`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sieve the von Mangoldt function on [lo, hi] and print ψ(hi).
    Sieve {
        /// Lower end of the range.
        #[arg(long, default_value_t = 1)]
        lo: u64,
        /// Upper end of the range.
        #[arg(long)]
        hi: u64,
        /// List every prime power in the range as `n p k Lambda(n)`.
        #[arg(long)]
        list: bool,
        /// Write the sieved window to this binary cache file.
        #[arg(long, value_name = "FILE")]
        cache: Option<PathBuf>,
    },
    /// R(n) = Σ_{h+k=n} Λ(h)Λ(k) for one n, or as `n,R(n)` rows over [N−H, N+H].
    R {
        /// Single argument n.
        #[arg(long)]
        n: Option<u64>,
        /// Window centre N.
        #[arg(long = "N", value_name = "N")]
        big_n: Option<u64>,
        /// Window half-width H.
        #[arg(long = "H", value_name = "H")]
        h: Option<u64>,
        /// Evaluation method for windows.
        #[arg(long, value_enum, default_value_t = MethodArg::Fft)]
        method: MethodArg,
    },
    /// Zero tables and the low-height zero finder.
    Zeros {
        #[command(subcommand)]
        command: ZerosCommand,
    },
    /// Truncated sums over the zeros.
    ZeroSum {
        #[command(subcommand)]
        command: ZeroSumCommand,
    },
    /// Run a check: `main`, `average`, `long`, `lemma <id>` or `lemma:<id>`.
    Verify(VerifyArgs),
    /// Run the configured checks over an (N, H) grid.
    Campaign(CampaignArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Fft,
}

#[derive(Debug, Subcommand)]
enum ZerosCommand {
    /// Load a table, report count and ordering, and run the zero-count check.
    Validate {
        /// Table to validate (defaults to the resolved zero table).
        #[arg(long, value_name = "FILE")]
        file: Option<PathBuf>,
        /// Read at most this many ordinates.
        #[arg(long, value_name = "COUNT")]
        max: Option<String>,
        /// Height of the count check (defaults to the table height).
        #[arg(long = "T", value_name = "T")]
        t: Option<f64>,
    },
    /// Find the zeros of Hardy's Z function below T (T at most 500).
    Find {
        /// Search height.
        #[arg(long = "T", value_name = "T")]
        t: f64,
    },
}

#[derive(Debug, Subcommand)]
enum ZeroSumCommand {
    /// Σ_ρ M^{ρ+1}/(ρ(ρ+1)).
    Psi {
        #[arg(long = "M", value_name = "M")]
        m: f64,
    },
    /// Σ_ρ ((N+H)^{ρ+2} − 2N^{ρ+2} + (N−H)^{ρ+2})/(ρ(ρ+1)(ρ+2)).
    SecondDiff {
        #[arg(long = "N", value_name = "N")]
        big_n: String,
        #[arg(long = "H", value_name = "H")]
        h: String,
        /// Use the integral representation instead of the power form.
        #[arg(long)]
        integral: bool,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// `main`, `average`, `long`, `lemma` or `lemma:<id>`.
    target: String,
    /// Lemma id when the target is `lemma`.
    id: Option<String>,
    /// N.
    #[arg(long = "N", value_name = "N")]
    big_n: Option<String>,
    /// H.
    #[arg(long = "H", value_name = "H")]
    h: Option<String>,
    /// Offset y for lemma checks that take one.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<i64>,
    /// Extra lemma parameter: M, ξ, n or T depending on the lemma.
    #[arg(long)]
    param: Option<f64>,
    /// Also run the check with an empty zero set (main and long).
    #[arg(long)]
    ablation: bool,
}

#[derive(Debug, Args)]
struct CampaignArgs {
    /// N values crossed with every family.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    ns: Option<Vec<String>>,
    /// Families: pow:NUM/DEN (H = N^{NUM/DEN}) or frac:DIV (H = N/DIV).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    families: Option<Vec<String>>,
    /// Explicit N:H pairs.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pairs: Option<Vec<String>>,
    /// Checks to run: main, ablation, average, pesato, zero-term, chain, long.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    checks: Option<Vec<String>>,
}

/// A command-line mistake the parser could not catch.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidRange { .. }
            | Error::RangeOverflow { .. }
            | Error::InvalidWindow(_)
            | Error::Domain(_)
            | Error::Config(_)
            | Error::Precondition(_),
        ) => EXIT_USAGE,
        Some(
            Error::Quadrature { .. }
            | Error::GridResolution(_)
            | Error::Convergence { .. }
            | Error::AliasBudget(_),
        ) => EXIT_CHECK,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn build_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let here = Path::new(".");
    if let Some(z) = &common.zeros {
        cfg.zeros_path = Some(z.clone());
    }
    if let Some(m) = &common.max_zeros {
        cfg.apply("max_zeros", m, here)?;
    }
    if let Some(t) = common.threads {
        cfg.threads = t;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = Some(o.clone());
    }
    if !common.formats.is_empty() {
        cfg.apply("formats", &common.formats.join(","), here)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.apply(k.trim(), v, here)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_zero_set(cfg: &RunConfig) -> Result<ZeroSet> {
    match cfg.resolve_zeros_path() {
        Some(path) => Ok(load_zeros(&path, cfg.max_zeros)?),
        None => {
            eprintln!("note: no zero table given; using the bundled 100 ordinates");
            Ok(bundled_zeros().take(cfg.max_zeros))
        }
    }
}

fn count_arg(v: &Option<String>, name: &str) -> Result<u64> {
    let s = v
        .as_deref()
        .ok_or_else(|| usage(format!("--{name} is required")))?;
    parse_count(s).map_err(|e| usage(format!("--{name}: {e}")))
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = build_config(&cli.common)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .context("configuring the worker pool")?;
    let out = io::stdout();
    let mut out = out.lock();
    match &cli.command {
        Command::Sieve {
            lo,
            hi,
            list,
            cache,
        } => {
            let w = sieve_window(*lo, *hi)?;
            let count = w.entries().iter().filter(|e| !e.is_zero()).count();
            writeln!(out, "range {} {}", lo, hi)?;
            writeln!(out, "prime_powers {count}")?;
            if *lo == 1 {
                writeln!(out, "psi {}", fmt_sig(psi(*hi, &w)?.value))?;
            }
            if *list {
                for n in *lo..=*hi {
                    if let Some(goldbach_core::LambdaEntry::PrimePower { p, k, log_p }) = w.entry(n)
                    {
                        writeln!(out, "{n} {p} {k} {}", fmt_sig(*log_p))?;
                    }
                }
            }
            if let Some(path) = cache {
                write_cache(&w, path)?;
            }
            Ok(true)
        }
        Command::R {
            n,
            big_n,
            h,
            method,
        } => {
            match (n, big_n, h) {
                (Some(n), None, None) => {
                    let w = sieve_window(1, (*n).max(2))?;
                    writeln!(out, "{}", fmt_sig(r_direct(*n, &w)?))?;
                }
                (None, Some(bn), Some(h)) => {
                    let spec = WindowSpec::new(*bn, *h)?;
                    let w = sieve_window(1, spec.end())?;
                    let rwin = match method {
                        MethodArg::Direct => r_window_direct(&spec, &w)?,
                        MethodArg::Fft => r_window_fft(&spec, &w)?,
                    };
                    rwin.write_csv(&mut out)?;
                }
                _ => return Err(usage("give either --n or both --N and --H")),
            }
            Ok(true)
        }
        Command::Zeros { command } => zeros_command(command, &cfg, &cli.common, &mut out),
        Command::ZeroSum { command } => {
            let zs = load_zero_set(&cfg)?;
            let res = match command {
                ZeroSumCommand::Psi { m } => psi_zero_sum(*m, &zs)?,
                ZeroSumCommand::SecondDiff { big_n, h, integral } => {
                    let n = parse_count(big_n).map_err(|e| usage(e.to_string()))?;
                    let h = parse_count(h).map_err(|e| usage(e.to_string()))?;
                    if *integral {
                        second_difference_term_integral(n, h, &zs)?
                    } else {
                        second_difference_term(n, h, &zs)?
                    }
                }
            };
            if cli.common.json {
                serde_json::to_writer_pretty(&mut out, &res)?;
                writeln!(out)?;
            } else {
                writeln!(out, "value {}", fmt_sig(res.value))?;
                writeln!(out, "terms {}", res.terms_used)?;
                writeln!(out, "height {}", fmt_sig(res.truncation_height))?;
                writeln!(out, "tail_estimate {}", fmt_sig(res.tail_estimate))?;
                writeln!(out, "path {:?}", res.evaluation_path)?;
                for w in &res.warnings {
                    writeln!(out, "warning {w}")?;
                }
            }
            Ok(true)
        }
        Command::Verify(args) => {
            let report = verify_command(args, &cfg)?;
            emit(&report, &cfg, &cli.common, &mut out)
        }
        Command::Campaign(args) => {
            let report = campaign_command(args, cfg.clone())?;
            emit(&report, &cfg, &cli.common, &mut out)
        }
    }
}

fn zeros_command(
    cmd: &ZerosCommand,
    cfg: &RunConfig,
    common: &Common,
    out: &mut impl Write,
) -> Result<bool> {
    match cmd {
        ZerosCommand::Validate { file, max, t } => {
            let max = match max {
                Some(m) => parse_count(m).map_err(|e| usage(e.to_string()))? as usize,
                None => cfg.max_zeros,
            };
            let zs = match file {
                Some(p) => load_zeros(p, max)?,
                None => {
                    let mut c = cfg.clone();
                    c.max_zeros = max;
                    load_zero_set(&c)?
                }
            };
            let g = zs.gammas();
            let mut report = Report::new(cfg.threads, cfg.tolerances);
            let tol = &cfg.tolerances;
            let height = t.unwrap_or_else(|| zs.complete_to());
            let mut row = count_check(&zs, height, tol.count_c, tol.count_mean);
            row.extra("count", g.len() as f64);
            row.extra("first", g[0]);
            row.extra("last", g[g.len() - 1]);
            if let Some(p) = declared_precision(&zs) {
                row.extra("precision", p);
            }
            row.note("ordinates strictly ascending and positive");
            report.push(row);
            if !(common.json || common.csv) {
                writeln!(out, "count {}", g.len())?;
                writeln!(out, "first {}", fmt_sig(g[0]))?;
                writeln!(out, "last {}", fmt_sig(g[g.len() - 1]))?;
                writeln!(out, "ordering ok")?;
            }
            emit(&report, cfg, common, out)
        }
        ZerosCommand::Find { t } => {
            let zs = find_zeros_low(*t)?;
            for g in zs.gammas() {
                writeln!(out, "{}", fmt_sig(*g))?;
            }
            Ok(true)
        }
    }
}

fn verify_command(args: &VerifyArgs, cfg: &RunConfig) -> Result<Report> {
    let tol = &cfg.tolerances;
    let mut report = Report::new(cfg.threads, *tol);
    let lemma = if let Some(id) = args.target.strip_prefix("lemma:") {
        Some(id.to_string())
    } else if args.target == "lemma" {
        Some(
            args.id
                .clone()
                .ok_or_else(|| usage("verify lemma needs an id"))?,
        )
    } else {
        None
    };
    if let Some(id) = lemma {
        let id: LemmaId = id.parse().map_err(|e: Error| usage(e.to_string()))?;
        let opt = |v: &Option<String>| -> Result<u64> {
            v.as_deref()
                .map_or(Ok(0), |s| parse_count(s).map_err(|e| usage(e.to_string())))
        };
        let n = opt(&args.big_n)?;
        let h = opt(&args.h)?;
        let standalone =
            id == LemmaId::ZeroCount || (id == LemmaId::PsiExplicit && args.param.is_some());
        if n == 0 && !standalone {
            return Err(usage("--N is required"));
        }
        let input = LemmaInput {
            n,
            h,
            y: args.y.unwrap_or(h as i64),
            param: args.param,
        };
        let arith = Arithmetic::sieve(lemma_sieve_limit(id, &input))?;
        let zs = if id.needs_zeros() {
            load_zero_set(cfg)?
        } else {
            ZeroSet::empty()
        };
        report.extend(run_lemma(id, &input, &arith, &zs, tol)?);
        if let (LemmaId::TBound, Some(dir)) = (id, cfg.output_dir.as_ref()) {
            let spec = WindowSpec::with_y(n, h, input.y)?;
            emit_t_scan(&t_bound_scan(&spec, 2000), dir)?;
        }
        return Ok(report);
    }
    if args.id.is_some() {
        return Err(usage(format!("unexpected argument after {}", args.target)));
    }
    let n = count_arg(&args.big_n, "N")?;
    match args.target.as_str() {
        "main" => {
            let spec = WindowSpec::new(n, count_arg(&args.h, "H")?)?;
            let arith = Arithmetic::sieve(spec.end())?;
            let zs = load_zero_set(cfg)?;
            report.push(verify_main(&spec, &arith, &zs, tol)?);
            if args.ablation {
                report.push(verify_main(&spec, &arith, &ZeroSet::empty(), tol)?);
            }
        }
        "average" => {
            let spec = WindowSpec::new(n, count_arg(&args.h, "H")?)?;
            let arith = Arithmetic::sieve(spec.end())?;
            report.extend(verify_average(&spec, &arith, tol)?);
        }
        "long" => {
            let arith = Arithmetic::sieve(n)?;
            let zs = load_zero_set(cfg)?;
            report.extend(verify_long_interval(n, &arith, &zs, tol)?);
            if args.ablation {
                report.extend(verify_long_interval(n, &arith, &ZeroSet::empty(), tol)?);
            }
        }
        other => return Err(usage(format!("unknown verify target {other:?}"))),
    }
    Ok(report)
}

fn campaign_command(args: &CampaignArgs, mut cfg: RunConfig) -> Result<Report> {
    let here = Path::new(".");
    if let Some(v) = &args.ns {
        cfg.apply("grid.ns", &v.join(","), here)?;
    }
    if let Some(v) = &args.families {
        cfg.apply("grid.families", &v.join(","), here)?;
    }
    if let Some(v) = &args.pairs {
        cfg.apply("grid.pairs", &v.join(","), here)?;
    }
    if let Some(v) = &args.checks {
        cfg.apply("checks", &v.join(","), here)?;
    }
    let needs_zeros = cfg.checks.iter().any(|c| {
        !matches!(
            c,
            CampaignCheck::Average | CampaignCheck::Chain | CampaignCheck::Ablation
        )
    });
    let zs = if needs_zeros && !cfg.grid.is_empty() {
        load_zero_set(&cfg)?
    } else {
        ZeroSet::empty()
    };
    let arith = Arithmetic::sieve(cfg.grid.sieve_limit())?;
    let campaign = CampaignConfig {
        grid: cfg.grid.clone(),
        checks: cfg.checks.clone(),
        tolerances: cfg.tolerances,
        threads: cfg.threads,
    };
    Ok(grid_campaign(&campaign, &arith, &zs))
}

fn text_row(r: &VerificationReport) -> String {
    let mut s = r.check.clone();
    if let Some(f) = &r.family {
        s += &format!(" family={f}");
    }
    for (k, v) in [("N", r.n), ("H", r.h)] {
        if let Some(v) = v {
            s += &format!(" {k}={v}");
        }
    }
    if let Some(y) = r.y {
        s += &format!(" y={y}");
    }
    if let Some(p) = r.param {
        s += &format!(" param={}", fmt_sig(p));
    }
    if let Some(e) = &r.error {
        return s + &format!(" ERROR {e}");
    }
    s += &format!(
        " lhs={} main={} zero={} error={} bound={} ratio={} constant={}",
        fmt_sig(r.lhs),
        fmt_sig(r.main_term),
        fmt_sig(r.zero_term),
        fmt_sig(r.observed_error),
        fmt_sig(r.bound),
        fmt_sig(r.ratio),
        fmt_sig(r.constant)
    );
    if let (Some(sl), Some(lim)) = (r.trend_slope, r.slope_limit) {
        s += &format!(" slope={} limit={}", fmt_sig(sl), fmt_sig(lim));
    }
    s += if r.pass { " PASS" } else { " FAIL" };
    if r.ablation {
        s += " (ablation)";
    }
    s
}

fn emit(report: &Report, cfg: &RunConfig, common: &Common, out: &mut impl Write) -> Result<bool> {
    if common.json {
        report.write_json(&mut *out)?;
    } else if common.csv {
        report.write_csv(&mut *out)?;
    } else {
        writeln!(
            out,
            "# schema_version={} threads={}",
            report.schema_version, report.threads
        )?;
        for r in &report.rows {
            writeln!(out, "{}", text_row(r))?;
        }
        for s in &report.family_slopes {
            writeln!(
                out,
                "slope {} family={} error={} ratio={}",
                s.check,
                s.family,
                s.error_slope.map_or("-".into(), fmt_sig),
                s.ratio_slope.map_or("-".into(), fmt_sig)
            )?;
        }
    }
    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let formats = if cfg.formats.is_empty() {
            vec![OutputFormat::Csv, OutputFormat::Json]
        } else {
            cfg.formats.clone()
        };
        for f in formats {
            match f {
                OutputFormat::Csv => {
                    let path = dir.join("report.csv");
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
                }
                OutputFormat::Json => {
                    let path = dir.join("report.json");
                    let mut buf = Vec::new();
                    report.write_json(&mut buf)?;
                    fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
                }
            }
        }
        if common.plot {
            emit_plotdata(&report.rows, &dir.join("plot"))?;
        }
    } else if common.plot {
        bail!(usage("--plot needs --out"));
    }
    Ok(report.all_pass())
}
