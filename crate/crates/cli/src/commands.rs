//! Subcommand implementations. Each writes its artifacts under the
//! configured output directory and returns whether every check passed.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use excesslab::analysis::{
    data_processing_bound, default_regressor, fit_rate, lemma1_partial, lemma1_tail, predicted_class,
    theorem1_bound, RateClass, RateFitReport, Regressor, ReportRow, Source,
};
use excesslab::decoder::{decode_past, dn_entropy_closed_form, en_dn_identity_check_with, hidden_truth, DecoderFault, Dn};
use excesslab::exact::{
    block_mi, enumerate_joint, event_entropy, triple_information, BlockLabel, EnumerationOptions, JointBlockTable,
    MIResult,
};
use excesslab::model::{branch_constant, normalization_constant};
use excesslab::sampling::{
    estimate_block_mi, estimate_pooled, sample_pooled_windows_with_state, sample_trajectory, EstimatorOptions,
    EstimatorReport,
};
use excesslab::series::{level_term, KahanSum};
use excesslab::{ProcessKind, ProcessModel, VERSION};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Provenance written next to every artifact.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunMeta<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a RunConfig,
}

fn prepare(cfg: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    Ok(cfg.output_dir.clone())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_meta(dir: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    let meta = RunMeta {
        command,
        version: VERSION,
        config: cfg,
    };
    write_json(&dir.join(format!("{command}.json")), &meta)
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn enumeration_options(cfg: &RunConfig) -> EnumerationOptions {
    EnumerationOptions {
        level_cutoff: cfg.level_cutoff,
        prune_eps: cfg.prune_eps,
        tail_aggregation: cfg.process == ProcessKind::Hpm1,
        ..Default::default()
    }
}

fn exact_table(cfg: &RunConfig, n: usize) -> excesslab::Result<JointBlockTable> {
    let model = ProcessModel::new(cfg.process, cfg.alpha());
    enumerate_joint(&model, n, &enumeration_options(cfg))
}

/// Certified `E(n)` for every configured block length; lengths the engine
/// cannot handle are reported as skipped rows.
pub fn cmd_exact(cfg: &RunConfig) -> Result<bool> {
    let dir = prepare(cfg)?;
    let mut w = csv::Writer::from_path(dir.join("exact.csv"))?;
    w.write_record([
        "kind",
        "alpha",
        "n",
        "value",
        "err_low",
        "err_high",
        "source",
        "entries",
        "missing_mass",
        "status",
    ])?;
    for &n in &cfg.block_lengths {
        let mut row = vec![cfg.process.name().to_string(), cfg.alpha.to_string(), n.to_string()];
        match exact_table(cfg, n) {
            Ok(t) => {
                let e = block_mi(&t);
                row.extend([
                    sci(e.value),
                    sci(e.err_low),
                    sci(e.err_high),
                    "exact".into(),
                    t.len().to_string(),
                    sci(t.missing_mass()),
                    "ok".into(),
                ]);
            }
            Err(err) => {
                eprintln!("n = {n}: skipped: {err}");
                row.extend(["", "", "", "exact", "", ""].map(String::from));
                row.push(format!("skipped: {err}"));
            }
        }
        w.write_record(&row)?;
        w.flush()?;
    }
    write_meta(&dir, "exact", cfg)?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
struct EstimateRow {
    n: usize,
    seed: u64,
    report: EstimatorReport,
}

/// Sampled estimates over the `(n, seed)` grid: pooled runs for the
/// non-ergodic kinds, sliding windows on one long run for the ergodic one.
pub fn cmd_estimate(cfg: &RunConfig) -> Result<bool> {
    let dir = prepare(cfg)?;
    let model = ProcessModel::new(cfg.process, cfg.alpha());
    let opts = |seed: u64| EstimatorOptions {
        method: cfg.estimator,
        resamples: cfg.resamples,
        seed,
        ..Default::default()
    };
    let grid: Vec<(usize, u64)> = cfg
        .block_lengths
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let rows: Vec<EstimateRow> = if cfg.process.is_ergodic() {
        let runs: Vec<_> = cfg
            .seeds
            .par_iter()
            .map(|&s| sample_trajectory(&model, cfg.sample_length, s).map(|t| (s, t)))
            .collect::<excesslab::Result<_>>()?;
        grid.par_iter()
            .map(|&(n, seed)| {
                let traj = &runs.iter().find(|r| r.0 == seed).unwrap().1;
                estimate_block_mi(traj, n, &opts(seed)).map(|report| EstimateRow { n, seed, report })
            })
            .collect::<excesslab::Result<_>>()?
    } else {
        // the pooled sampler is itself parallel
        grid.iter()
            .map(|&(n, seed)| {
                estimate_pooled(&model, n, cfg.trajectories, &opts(seed)).map(|report| EstimateRow { n, seed, report })
            })
            .collect::<excesslab::Result<_>>()?
    };
    let mut w = csv::Writer::from_path(dir.join("estimate.csv"))?;
    w.write_record([
        "kind",
        "alpha",
        "n",
        "seed",
        "method",
        "regime",
        "point_estimate",
        "std_error",
        "sample_count",
        "resamples",
    ])?;
    for r in &rows {
        w.write_record([
            cfg.process.name().to_string(),
            cfg.alpha.to_string(),
            r.n.to_string(),
            r.seed.to_string(),
            variant_name(&r.report.method),
            variant_name(&r.report.regime),
            sci(r.report.point_estimate),
            sci(r.report.std_error),
            r.report.sample_count.to_string(),
            r.report.resamples.to_string(),
        ])?;
    }
    w.flush()?;
    write_meta(&dir, "estimate", cfg)?;
    Ok(true)
}

/// The serde name of a unit enum variant.
fn variant_name(v: &impl Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub n: Option<usize>,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, n: Option<usize>, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            n,
            passed,
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyLedger<'a> {
    pub version: &'a str,
    pub config: &'a RunConfig,
    pub decoder_fault_injected: bool,
    pub all_passed: bool,
    pub checks: Vec<Check>,
    pub predicted_class: RateClass,
    pub regressor: String,
    /// Fit of the exact values with `n ≥ 8`, when there are enough of them.
    pub fit: Option<RateFitReport>,
}

fn lemma_checks(cfg: &RunConfig) -> Vec<Check> {
    let alpha = cfg.alpha();
    let a = cfg.alpha;
    let mut out = Vec::new();
    for n in [2u64, 1 << 4, 1 << 10, 1 << 20] {
        let direct: KahanSum = (2..=n).map(|m| level_term(a - 1.0, m as f64)).collect();
        let b = lemma1_partial(alpha, n);
        out.push(Check::new(
            "lemma_partial_bracket",
            Some(n as usize),
            b.contains_within(direct.value(), 1e-12),
            format!("sum {} in [{}, {}]", direct.value(), b.lower, b.upper),
        ));
    }
    for n in [2u64, 1 << 4, 1 << 10] {
        let finite: KahanSum = (n..2 * n).map(|m| level_term(a, m as f64)).collect();
        let (hi, lo) = (lemma1_tail(alpha, n), lemma1_tail(alpha, 2 * n));
        let (l, u) = (hi.lower - lo.upper, hi.upper - lo.lower);
        let v = finite.value();
        out.push(Check::new(
            "lemma_tail_bracket",
            Some(n as usize),
            l - 1e-12 <= v && v <= u + 1e-12,
            format!("sum {v} in [{l}, {u}]"),
        ));
    }
    out
}

fn decoder_check(cfg: &RunConfig, n: usize, dn: &Dn) -> Result<Check> {
    let model = ProcessModel::new(cfg.process, cfg.alpha());
    let windows = sample_pooled_windows_with_state(&model, n, cfg.decoder_windows, cfg.seeds[0])?;
    let mut mismatches = 0usize;
    let mut first = None;
    for (pair, state) in &windows {
        let (past, future) = (pair.past_symbols(n), pair.future_symbols(n));
        let (p, f) = (dn.of_past(&past), dn.of_future(&future));
        let truth = state.and_then(|s| hidden_truth(cfg.process, s, n)).map(|v| v.value());
        if p != f || truth.is_some_and(|t| t != p) {
            mismatches += 1;
            first.get_or_insert(format!("past {past:?} -> {p}, future {future:?} -> {f}, truth {truth:?}"));
        }
    }
    Ok(Check::new(
        "decoder_agreement",
        Some(n),
        mismatches == 0,
        format!(
            "{mismatches} of {} windows disagree{}",
            windows.len(),
            first.map(|s| format!("; first: {s}")).unwrap_or_default()
        ),
    ))
}

fn table_checks(cfg: &RunConfig, n: usize, t: &JointBlockTable, e: &MIResult) -> Result<Vec<Check>> {
    let alpha = cfg.alpha();
    let kind = cfg.process;
    let mut out = Vec::new();
    let id = en_dn_identity_check_with(t, &Dn::new(kind))?;
    out.push(Check::new(
        "endn_identity",
        Some(n),
        id.holds(),
        format!("residual {:e}, tolerance {:e}", id.residual, id.tolerance),
    ));
    let h = dn_entropy_closed_form(kind, alpha, n);
    let upper = theorem1_bound(kind, alpha, n);
    let dp = data_processing_bound(kind, alpha, n, cfg.level_cutoff);
    out.push(Check::new(
        "sandwich",
        Some(n),
        h.lower() <= e.upper() && e.lower() <= upper.hi && e.lower() <= dp.hi,
        format!(
            "H(D) >= {}, E in [{}, {}], bounds {} and {}",
            h.lower(),
            e.lower(),
            e.upper(),
            upper.hi,
            dp.hi
        ),
    ));
    let marked = |p: &excesslab::block::BlockPair| {
        decode_past(kind, &p.past_symbols(n)).is_ok_and(|v| v.is_determined())
    };
    let tri = triple_information(t, marked);
    let h_event = event_entropy(t, marked);
    let slack = e.width() + 1e-9;
    out.push(Check::new(
        "triple_information",
        Some(n),
        tri.abs() <= h_event + slack,
        format!("|I(X;Y;B)| = {} vs H(B) = {h_event}", tri.abs()),
    ));
    Ok(out)
}

/// Runs the invariant suite and writes `verify.json`.
pub fn cmd_verify(cfg: &RunConfig, fault: bool) -> Result<bool> {
    let dir = prepare(cfg)?;
    let kind = cfg.process;
    let dn = if fault {
        Dn::with_fault(kind, DecoderFault::FutureOffByOne)
    } else {
        Dn::new(kind)
    };
    let mut checks = lemma_checks(cfg);
    let mut points = Vec::new();
    for &n in &cfg.block_lengths {
        checks.push(decoder_check(cfg, n, &dn)?);
        match exact_table(cfg, n) {
            Ok(t) => {
                let e = block_mi(&t);
                checks.extend(table_checks(cfg, n, &t, &e)?);
                points.push((n as f64, e.value));
            }
            Err(err) => checks.push(Check::new("enumeration", Some(n), false, err.to_string())),
        }
    }
    let class = predicted_class(kind, cfg.alpha());
    let regressor = default_regressor(class);
    let window: Vec<_> = points.into_iter().filter(|p| p.0 >= 8.0).collect();
    let fit = if window.len() >= 4 {
        fit_rate(&window, regressor).ok().map(|r| r.for_process(kind, cfg.alpha()))
    } else {
        None
    };
    let all_passed = checks.iter().all(|c| c.passed);
    let ledger = VerifyLedger {
        version: VERSION,
        config: cfg,
        decoder_fault_injected: fault,
        all_passed,
        checks,
        predicted_class: class,
        regressor: regressor.describe(),
        fit,
    };
    write_json(&dir.join("verify.json"), &ledger)?;
    for c in ledger.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAILED {} (n = {:?}): {}", c.name, c.n, c.detail);
    }
    Ok(all_passed)
}

/// Which series `fit` regresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    /// Certified `E(n)` from the exact engine.
    Exact,
    /// Closed-form entropy of the decoded level value.
    ClosedForm,
    /// The upper-bound curve.
    Bound,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitOutput<'a> {
    pub version: &'a str,
    pub config: &'a RunConfig,
    pub series: Series,
    pub min_n: usize,
    pub points: Vec<ReportRow>,
    pub report: RateFitReport,
}

/// Fits one series over the block lengths `≥ min_n` and writes `fit.json`
/// plus the points as `fit.csv`.
pub fn cmd_fit(cfg: &RunConfig, series: Series, regressor: Option<Regressor>, min_n: usize) -> Result<bool> {
    let dir = prepare(cfg)?;
    let (kind, alpha) = (cfg.process, cfg.alpha());
    let lengths: Vec<usize> = cfg.block_lengths.iter().copied().filter(|&n| n >= min_n).collect();
    let points: Vec<ReportRow> = lengths
        .iter()
        .map(|&n| {
            let (value, err_low, err_high, source) = match series {
                Series::Exact => {
                    let e = block_mi(&exact_table(cfg, n)?);
                    (e.value, e.err_low, e.err_high, Source::Exact)
                }
                Series::ClosedForm => {
                    let h = dn_entropy_closed_form(kind, alpha, n);
                    (h.value, h.err_low, h.err_high, Source::ClosedForm)
                }
                Series::Bound => {
                    let b = theorem1_bound(kind, alpha, n);
                    (b.hi, b.hi - b.lo, 0.0, Source::Bound)
                }
            };
            Ok(ReportRow {
                kind,
                alpha: cfg.alpha,
                n,
                value,
                err_low,
                err_high,
                source,
            })
        })
        .collect::<Result<_>>()?;
    let regressor = regressor.unwrap_or_else(|| default_regressor(predicted_class(kind, alpha)));
    let xy: Vec<_> = points.iter().map(|r| (r.n as f64, r.value)).collect();
    let report = fit_rate(&xy, regressor)?.for_process(kind, alpha);
    excesslab::analysis::write_report(fs::File::create(dir.join("fit.csv"))?, &points)?;
    let out = FitOutput {
        version: VERSION,
        config: cfg,
        series,
        min_n,
        points,
        report,
    };
    write_json(&dir.join("fit.json"), &out)?;
    print_json(&out.report)?;
    Ok(true)
}

/// Prints model constants and the predicted growth class.
pub fn cmd_info(cfg: &RunConfig) -> Result<bool> {
    let alpha = cfg.alpha();
    let c = normalization_constant(alpha).interval();
    let class = predicted_class(cfg.process, alpha);
    let branch = (cfg.process == ProcessKind::Hmc).then(|| {
        let d = branch_constant(alpha).interval();
        [d.lo, d.hi]
    });
    let info = serde_json::json!({
        "version": VERSION,
        "process": cfg.process,
        "alpha": cfg.alpha,
        "alphabetSize": cfg.process.alphabet_size(),
        "ergodic": cfg.process.is_ergodic(),
        "normalizationConstant": [c.lo, c.hi],
        "branchConstant": branch,
        "predictedClass": class,
        "defaultRegressor": default_regressor(class).describe(),
        "config": cfg,
    });
    print_json(&info)?;
    Ok(true)
}

/// Pretty JSON on stdout; a closed pipe (`| head`) is not an error.
fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let res = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|()| writeln!(out));
    match res {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}
