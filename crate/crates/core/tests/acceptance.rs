//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use goldbach_core::circle::{i_decomposition_check, CircleConstants};
use goldbach_core::exp_sums::{t_bound_scan, t_sum_closed, t_sum_direct};
use goldbach_core::goldbach::{r_direct, r_window_direct, r_window_fft};
use goldbach_core::lambda::{psi, sieve_window};
use goldbach_core::verifier::{
    grid_campaign, psi_explicit_trend, CampaignCheck, CampaignConfig, Family, GridSpec,
};
use goldbach_core::zero_sums::{
    psi_explicit_check, second_difference_term, second_difference_term_integral,
};
use goldbach_core::zeros::{count_check, find_zeros_low, load_zeros};
use goldbach_core::{Arithmetic, LambdaEntry, Report, Tolerances, WindowSpec, ZeroSet};

type Outcome = std::result::Result<String, String>;

/// Ratio constants frozen from one calibration run on the working table.
fn frozen_tolerances() -> Tolerances {
    Tolerances {
        main: 0.02,
        average_max: 0.003,
        average_full: 0.02,
        pesato: 0.3,
        psi_explicit: 3.0,
        zero_term: 0.006,
        long_sum: 0.007,
        long_cesaro: 4.0,
        ..Tolerances::default()
    }
}

fn campaign_grid() -> GridSpec {
    GridSpec {
        pairs: Vec::new(),
        ns: vec![10_000, 100_000, 1_000_000],
        families: ["pow:1/2", "pow:2/3", "frac:10"]
            .iter()
            .map(|s| s.parse::<Family>().unwrap())
            .collect(),
    }
}

fn campaign_config() -> CampaignConfig {
    CampaignConfig {
        grid: campaign_grid(),
        checks: vec![
            CampaignCheck::Main,
            CampaignCheck::Ablation,
            CampaignCheck::Average,
            CampaignCheck::Pesato,
        ],
        tolerances: frozen_tolerances(),
        threads: 2,
    }
}

fn zero_table() -> ZeroSet {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/zeros_100k.txt");
    load_zeros(&path, 100_000).expect("working zero table")
}

struct SplitMix(u64);

impl SplitMix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn failures(rows: &[&goldbach_core::VerificationReport]) -> Vec<String> {
    rows.iter()
        .filter(|r| !r.pass)
        .map(|r| {
            format!(
                "{} N={:?} H={:?} ratio={:.4} slope={:?}{}",
                r.check,
                r.n,
                r.h,
                r.ratio,
                r.trend_slope,
                r.error
                    .as_deref()
                    .map(|e| format!(" error={e}"))
                    .unwrap_or_default()
            )
        })
        .collect()
}

fn max_ratio(rows: &[&goldbach_core::VerificationReport]) -> f64 {
    rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

fn max_slope(rows: &[&goldbach_core::VerificationReport]) -> f64 {
    rows.iter()
        .filter_map(|r| r.trend_slope)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Independent Λ oracle: (p, k) by trial division.
fn trial_prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..)
        .take_while(|d| d * d <= n)
        .find(|d| n % d == 0)
        .unwrap_or(n);
    let (mut m, mut k) = (n, 0);
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p, k))
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

fn criterion_1() -> Outcome {
    let window = sieve_window(1, 1_000_000).map_err(|e| e.to_string())?;
    let mut prime_powers = 0;
    for n in 1..=1_000_000u64 {
        let entry = window.entry(n).ok_or(format!("n = {n} missing"))?;
        match (trial_prime_power(n), entry) {
            (None, LambdaEntry::Zero) => {}
            (
                Some((p, k)),
                &LambdaEntry::PrimePower {
                    p: sp,
                    k: sk,
                    log_p,
                },
            ) => {
                if (p, k) != (sp, sk) || ulps(log_p, (p as f64).ln()) > 1 {
                    return Err(format!(
                        "n = {n}: sieve {sp}^{sk} ({log_p}) vs oracle {p}^{k}"
                    ));
                }
                prime_powers += 1;
            }
            (oracle, got) => return Err(format!("n = {n}: sieve {got:?} vs oracle {oracle:?}")),
        }
    }
    let psi10 = psi(10, &window).map_err(|e| e.to_string())?.value;
    if (psi10 - 7.8320141).abs() > 1e-6 {
        return Err(format!("psi(10) = {psi10}"));
    }
    Ok(format!(
        "{prime_powers} prime powers <= 1e6 agree; psi(10) = {psi10:.9}"
    ))
}

fn criterion_2(arith: &Arithmetic) -> Outcome {
    let mut worst = 0.0f64;
    for n in [1_000u64, 10_000] {
        let spec = WindowSpec::new(n, n / 10).map_err(|e| e.to_string())?;
        let fft = r_window_fft(&spec, &arith.window).map_err(|e| e.to_string())?;
        let direct = r_window_direct(&spec, &arith.window).map_err(|e| e.to_string())?;
        for (a, b) in fft.values().iter().zip(direct.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    let spec = WindowSpec::new(100_000, 10_000).map_err(|e| e.to_string())?;
    let fft = r_window_fft(&spec, &arith.window).map_err(|e| e.to_string())?;
    let mut rng = SplitMix(0x5eed);
    for _ in 0..20 {
        let n = spec.start() + rng.below(spec.end() - spec.start() + 1);
        let d = r_direct(n, &arith.window).map_err(|e| e.to_string())?;
        worst = worst.max((fft.r(n) - d).abs());
    }
    if worst > 1e-9 {
        return Err(format!("max |fft - direct| = {worst:e}"));
    }
    Ok(format!("max |fft - direct| = {worst:.3e}"))
}

fn criterion_3(arith: &Arithmetic) -> Outcome {
    let mut rng = SplitMix(0xc0ffee);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let h = 1 + rng.below(2000);
        let n = h + rng.below(1_000_000);
        let y = rng.below(2 * h + 1) as i64 - h as i64;
        let alpha = match rng.below(3) {
            0 => rng.unit() - 0.5,
            1 => (rng.unit() - 0.5) / (h * h) as f64,
            _ => (rng.below(2 * h) as f64 - h as f64) / (2 * h) as f64,
        };
        let spec = WindowSpec::with_y(n, h, y).map_err(|e| e.to_string())?;
        let d = t_sum_direct(&spec, alpha);
        let c = t_sum_closed(&spec, alpha);
        let rel = (c - d).norm() / d.norm().max(1.0);
        if rel > 1e-9 {
            return Err(format!(
                "t closed vs direct at N={n} H={h} y={y} alpha={alpha}: rel {rel:e}"
            ));
        }
        worst = worst.max(rel);
    }
    for h in [1u64, 7, 64, 1000, 65_536] {
        let spec = WindowSpec::new(10 * h, h).map_err(|e| e.to_string())?;
        let t0 = t_sum_closed(&spec, 0.0);
        if t0.re != (h * h) as f64 || t0.im != 0.0 {
            return Err(format!("T(0) = {t0} for H = {h}"));
        }
    }
    let k = CircleConstants::default();
    let mut identity = Vec::new();
    for (n, h, y) in [(1000u64, 31u64, 0i64), (2000, 200, 200), (2000, 44, -22)] {
        let checks = i_decomposition_check(n, h, y, &arith.window, &arith.psi, &k)
            .map_err(|e| e.to_string())?;
        for c in &checks {
            if !c.pass {
                return Err(format!(
                    "{} at N={n} H={h} y={y}: ratio {:.3e}",
                    c.name,
                    c.ratio()
                ));
            }
        }
        if let Some(c) = checks.iter().find(|c| c.name == "circle-identity") {
            identity.push(format!("{:.1e}", c.ratio()));
        }
    }
    Ok(format!(
        "t closed vs direct worst rel {worst:.1e}; T(0) = H^2; circle identity ratios [{}]",
        identity.join(", ")
    ))
}

fn criterion_4(tol: &Tolerances) -> Outcome {
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    let mut sharp = f64::INFINITY;
    for h in [8u64, 64, 512] {
        let hi = h as i64;
        for y in [-hi / 2, 0, hi / 2, hi] {
            let spec = WindowSpec::with_y(100_000, h, y).map_err(|e| e.to_string())?;
            let scan = t_bound_scan(&spec, 2000);
            let rows = scan.reports(tol.t_bound, tol.sharpness);
            if y == hi && !rows.iter().any(|r| r.check == "t-bound-second") {
                return Err(format!("no second-bound row at H={h}"));
            }
            if 2 * y <= hi && !rows.iter().any(|r| r.check == "t-sharpness") {
                return Err(format!("no sharpness row at H={h} y={y}"));
            }
            for r in &rows {
                if !r.pass {
                    return Err(format!("{} at H={h} y={y}: {:.4}", r.check, r.ratio));
                }
                match r.check.as_str() {
                    "t-bound-first" => first = first.max(r.ratio),
                    "t-bound-second" => second = second.max(r.ratio),
                    _ => sharp = sharp.min(r.ratio),
                }
            }
        }
    }
    Ok(format!(
        "max first ratio {first:.3}, max second ratio (y = H) {second:.3}, min sharpness {sharp:.3}"
    ))
}

fn criterion_5(arith: &Arithmetic, zs: &ZeroSet, tol: &Tolerances) -> Outcome {
    let mut rows = Vec::new();
    for m in [1e3, 1e4, 1e5, 1e6] {
        rows.push(
            psi_explicit_check(m, zs, &arith.psi, tol.psi_explicit).map_err(|e| e.to_string())?,
        );
    }
    let slope = psi_explicit_trend(&mut rows, tol.psi_slope);
    let refs: Vec<_> = rows.iter().collect();
    let bad = failures(&refs);
    let summary = format!(
        "max ratio {:.4} (<= {}), remainder slope {slope:.3?} (<= {})",
        max_ratio(&refs),
        tol.psi_explicit,
        tol.psi_slope
    );
    if bad.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", bad.join("; ")))
    }
}

fn rows_named<'a>(
    report: &'a Report,
    names: &[&str],
) -> Vec<&'a goldbach_core::VerificationReport> {
    report
        .rows
        .iter()
        .filter(|r| names.contains(&r.check.as_str()))
        .collect()
}

fn all_pass(report: &Report, names: &[&str], expected: usize, constant: &str) -> Outcome {
    let rows = rows_named(report, names);
    if rows.len() != expected {
        return Err(format!("expected {expected} rows, got {}", rows.len()));
    }
    let summary = format!(
        "{} rows, max ratio {:.4} ({constant}), max trend slope {:.3}",
        rows.len(),
        max_ratio(&rows),
        max_slope(&rows)
    );
    let bad = failures(&rows);
    if bad.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", bad.join("; ")))
    }
}

fn criterion_6(report: &Report, tol: &Tolerances) -> Outcome {
    all_pass(report, &["pesato"], 9, &format!("<= {}", tol.pesato))
}

fn criterion_7(report: &Report, tol: &Tolerances) -> Outcome {
    all_pass(
        report,
        &["average-max", "average-full"],
        18,
        &format!("<= {} / {}", tol.average_max, tol.average_full),
    )
}

fn criterion_8(report: &Report, tol: &Tolerances) -> Outcome {
    let main = all_pass(report, &["main"], 9, &format!("<= {}", tol.main))?;
    let ablation = rows_named(report, &["main-ablation"]);
    if ablation.len() != 9 {
        return Err(format!("expected 9 ablation rows, got {}", ablation.len()));
    }
    let mut failing_families = Vec::new();
    for f in campaign_grid().families {
        let label = f.label();
        if ablation
            .iter()
            .any(|r| r.family.as_deref() == Some(label.as_str()) && !r.pass)
        {
            failing_families.push(label);
        }
    }
    if failing_families.len() != 3 {
        return Err(format!(
            "{main}; ablation fails only in families {failing_families:?}"
        ));
    }
    let failing = ablation.iter().filter(|r| !r.pass).count();
    Ok(format!(
        "{main}; ablation fails in every family ({failing}/9 rows)"
    ))
}

fn criterion_9(zs: &ZeroSet, tol: &Tolerances) -> Outcome {
    let low = find_zeros_low(100.0).map_err(|e| e.to_string())?;
    if low.len() != 29 {
        return Err(format!("{} zeros below 100", low.len()));
    }
    let g = low.gammas();
    if (g[0] - 14.134725).abs() > 1e-6 || (g[1] - 21.022040).abs() > 1e-6 {
        return Err(format!("gamma_1 = {}, gamma_2 = {}", g[0], g[1]));
    }
    let count = count_check(zs, zs.complete_to(), tol.count_c, tol.count_mean);
    if !count.pass {
        return Err(format!(
            "count check at T = {}: {:?}",
            zs.complete_to(),
            count.notes
        ));
    }
    let head = zs.take(1000);
    let mut integral_rel = 0.0f64;
    for (n, h) in [
        (10_000u64, 100u64),
        (100_000, 316),
        (1_000_000, 100_000),
        (50_000, 37),
    ] {
        let a = second_difference_term(n, h, &head)
            .map_err(|e| e.to_string())?
            .value;
        let b = second_difference_term_integral(n, h, &head)
            .map_err(|e| e.to_string())?
            .value;
        let rel = (a - b).abs() / b.abs();
        if rel > 1e-8 {
            return Err(format!("integral form at N={n} H={h}: rel {rel:e}"));
        }
        integral_rel = integral_rel.max(rel);
    }
    let mut oracle_rel = 0.0f64;
    for (gamma, n, h) in [
        (14.134725, 10_000u64, 100u64),
        (14.134725, 1_000_000, 1),
        (14.134725, 1000, 1000),
        (5000.5, 1_000_000, 10),
        (74_920.827, 100_000, 1000),
    ] {
        let want = common::oracle(gamma, n, h);
        let single = ZeroSet::synthetic(vec![gamma]).map_err(|e| e.to_string())?;
        let got = second_difference_term(n, h, &single)
            .map_err(|e| e.to_string())?
            .value;
        let rel = (got - want).abs() / want.abs();
        if rel > 1e-10 {
            return Err(format!("oracle at gamma={gamma} N={n} H={h}: rel {rel:e}"));
        }
        oracle_rel = oracle_rel.max(rel);
    }
    Ok(format!(
        "29 zeros below 100, gamma_1 = {:.7}, gamma_2 = {:.7}; count check at T = {:.1}; \
         integral rel {integral_rel:.1e}; oracle rel {oracle_rel:.1e}",
        g[0],
        g[1],
        zs.complete_to()
    ))
}

fn serialize(report: &Report) -> (Vec<u8>, Vec<u8>) {
    let mut csv = Vec::new();
    report.write_csv(&mut csv).expect("csv");
    let mut json = Vec::new();
    report.write_json(&mut json).expect("json");
    (csv, json)
}

fn criterion_10(first: &Report, cfg: &CampaignConfig, arith: &Arithmetic, zs: &ZeroSet) -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| e.to_string())?;
    let second = pool.install(|| grid_campaign(cfg, arith, zs));
    let (c1, j1) = serialize(first);
    let (c2, j2) = serialize(&second);
    if c1 != c2 {
        return Err("CSV reports differ".into());
    }
    if j1 != j2 {
        return Err("JSON reports differ".into());
    }
    Ok(format!(
        "{} rows; CSV ({} bytes) and JSON ({} bytes) identical at {} threads",
        first.rows.len(),
        c1.len(),
        j1.len(),
        cfg.threads
    ))
}

fn report(id: usize, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (verdict, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {id:>2}: {verdict} {title} [{secs:.1}s]: {detail}");
    outcome.is_ok()
}

fn main() -> ExitCode {
    let tol = frozen_tolerances();
    let cfg = campaign_config();
    let zs = zero_table();
    let arith = Arithmetic::sieve(cfg.grid.sieve_limit().max(1_000_000)).expect("sieve");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .expect("thread pool");
    let start = Instant::now();
    let campaign = pool.install(|| grid_campaign(&cfg, &arith, &zs));
    println!(
        "campaign for criteria 6-8: {} rows in {:.1}s",
        campaign.rows.len(),
        start.elapsed().as_secs_f64()
    );

    let results = [
        report(1, "lambda and psi oracle", criterion_1),
        report(2, "FFT vs direct R(n)", || criterion_2(&arith)),
        report(3, "exponential-sum identities", || criterion_3(&arith)),
        report(4, "T bounds and sharpness", || criterion_4(&tol)),
        report(5, "psi explicit formula", || criterion_5(&arith, &zs, &tol)),
        report(6, "weighted psi identity", || criterion_6(&campaign, &tol)),
        report(7, "averaged statements", || criterion_7(&campaign, &tol)),
        report(8, "main statement and ablation", || {
            criterion_8(&campaign, &tol)
        }),
        report(9, "zero infrastructure", || criterion_9(&zs, &tol)),
        report(10, "determinism", || {
            criterion_10(&campaign, &cfg, &arith, &zs)
        }),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
