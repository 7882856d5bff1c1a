//! The six experiments. Each returns tables in grid order plus metadata;
//! nothing here touches the file system.

use std::time::Instant;

use glzi_core::battery::{BatteryStateSpec, SqueezeAlignment};
use glzi_core::metrics::{backaction, contrast, contrast_deficit_fit};
use glzi_core::protocol::{theta_grid, uniform_grid, POSITIVITY_TOLERANCE};
use serde_json::{json, Value};

use crate::config::{Experiment, ScanConfig};
use crate::format::{fmt_num, fmt_opt, Table};
use crate::runner::{product_grid, run_jobs, squeeze_kind, with_pool, Job, RunContext, ScanRecord, Source};
use crate::{oracle, svg, ScanError};

pub const FRINGE_COLUMNS: [&str; 5] = ["theta_geo", "P_e", "delta_n", "var_n_init", "eta_coh_init"];
pub const HEATMAP_COLUMNS: [&str; 3] = ["theta_geo", "tau_p", "P_e"];
pub const CONTRAST_COLUMNS: [&str; 5] = ["nbar", "C", "C_cl", "deficit", "inv_nbar"];
pub const BACKACTION_COLUMNS: [&str; 4] = ["nbar", "mean_delta_n", "std_delta_n", "rel_backaction"];
pub const SQUEEZE_COLUMNS: [&str; 7] = [
    "state_kind",
    "nbar",
    "r_or_q",
    "C",
    "delta_C",
    "var_n_init",
    "eta_coh_init",
];

/// Monotonicity slack for C(n̄).
pub const MONOTONE_TOL: f64 = 1e-4;

/// A CSV table with the metadata that goes into its sidecar.
#[derive(Debug, Clone)]
pub struct Artifact {
    /// File stem; the CSV is `<name>.csv` and the sidecar `<name>.json`.
    pub name: String,
    pub table: Table,
    pub metadata: Value,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: Experiment,
    pub tables: Vec<Artifact>,
    /// Stand-alone JSON documents (fit summaries, oracle report).
    pub documents: Vec<(String, Value)>,
    /// SVG renderings, written only on request.
    pub plots: Vec<(String, String)>,
    pub summary: Value,
    pub warnings: Vec<String>,
    pub points: usize,
    pub workers: usize,
    /// Wall-clock time of the whole experiment.
    pub elapsed_s: f64,
    /// Sum of per-point compute times.
    pub compute_s: f64,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|a| a.name == name).map(|a| &a.table)
    }

    pub fn document(&self, name: &str) -> Option<&Value> {
        self.documents.iter().find(|d| d.0 == name).map(|d| &d.1)
    }
}

struct Partial {
    tables: Vec<Artifact>,
    documents: Vec<(String, Value)>,
    plots: Vec<(String, String)>,
    summary: Value,
    warnings: Vec<String>,
    records: Vec<ScanRecord>,
}

impl Partial {
    fn new(summary: Value) -> Self {
        Self {
            tables: Vec::new(),
            documents: Vec::new(),
            plots: Vec::new(),
            summary,
            warnings: Vec::new(),
            records: Vec::new(),
        }
    }
}

/// Runs `experiment` on a pool of `workers` threads.
pub fn run_experiment(cfg: &ScanConfig, experiment: Experiment, workers: usize) -> Result<Report, ScanError> {
    cfg.validate()?;
    let mut warnings = cfg.warnings();
    for w in &warnings {
        log::warn!("{w}");
    }
    let start = Instant::now();
    let partial = with_pool(workers, || -> Result<Partial, ScanError> {
        match experiment {
            Experiment::Fringe => fringe(cfg),
            Experiment::Heatmap => heatmap(cfg),
            Experiment::ContrastScan => contrast_scan(cfg),
            Experiment::Backaction => backaction_scan(cfg),
            Experiment::SqueezeBench => squeeze_bench(cfg),
            Experiment::OracleCheck => oracle_check(cfg),
        }
    })??;
    warnings.extend(partial.warnings);
    Ok(Report {
        experiment,
        tables: partial.tables,
        documents: partial.documents,
        plots: partial.plots,
        summary: partial.summary,
        warnings,
        points: partial.records.len(),
        workers: workers.max(1),
        elapsed_s: start.elapsed().as_secs_f64(),
        compute_s: partial.records.iter().map(|r| r.wall_time).sum(),
    })
}

/// Integrity summary of one result set.
fn diagnostics(records: &[ScanRecord]) -> Value {
    let max_trace = records.iter().map(|r| r.trace_defect).fold(0.0, f64::max);
    let min_eig = records.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
    let violations = records.iter().filter(|r| r.min_eig < -POSITIVITY_TOLERANCE).count();
    json!({
        "points": records.len(),
        "max_trace_defect": max_trace,
        "min_eigenvalue": min_eig,
        "positivity_violations": violations,
    })
}

fn coherent(nbar: f64) -> Source {
    Source::Quantum(BatteryStateSpec::Coherent { nbar, phase: 0.0 })
}

fn theta_points(cfg: &ScanConfig) -> Vec<(f64, f64)> {
    theta_grid(cfg.grid.theta_count)
        .into_iter()
        .map(|t| (t, cfg.protocol.tau_p_ns))
        .collect()
}

fn p_e(records: &[ScanRecord]) -> Vec<f64> {
    records.iter().map(|r| r.p_e).collect()
}

fn nbar_label(nbar: f64) -> String {
    format!("nbar_{}", fmt_num(nbar))
}

fn fringe(cfg: &ScanConfig) -> Result<Partial, ScanError> {
    let ctx = RunContext::new(cfg, Experiment::Fringe)?;
    let points = theta_points(cfg);
    let mut jobs: Vec<Job> = cfg
        .grid
        .fringe_nbar
        .iter()
        .map(|&n| Job {
            source: coherent(n),
            points: points.clone(),
        })
        .collect();
    jobs.push(Job {
        source: Source::Classical,
        points,
    });
    let results = run_jobs(&ctx, &jobs)?;

    let mut out = Partial::new(Value::Null);
    let mut series = Vec::new();
    let mut contrasts = serde_json::Map::new();
    for (job, recs) in jobs.iter().zip(results) {
        let name = match job.source.nbar() {
            Some(n) => format!("fringe_{}", nbar_label(n)),
            None => "fringe_classical".to_string(),
        };
        let mut table = Table::new(&FRINGE_COLUMNS);
        for r in &recs {
            table.push(vec![
                fmt_num(r.theta_geo),
                fmt_num(r.p_e),
                fmt_opt(r.delta_n),
                fmt_opt(r.var_n_init),
                fmt_opt(r.eta_coh_init),
            ]);
        }
        let c = contrast(&p_e(&recs))?;
        contrasts.insert(job.source.descriptor(), json!(c));
        series.push((
            job.source.descriptor(),
            recs.iter().map(|r| (r.theta_geo, r.p_e)).collect(),
        ));
        out.tables.push(Artifact {
            name,
            table,
            metadata: json!({
                "battery": job.source.descriptor(),
                "tau_p_ns": cfg.protocol.tau_p_ns,
                "contrast": c,
                "diagnostics": diagnostics(&recs),
            }),
        });
        out.records.extend(recs);
    }
    out.plots.push((
        "fringe".into(),
        svg::line_plot("Fringes", "theta_geo (rad)", "P_e", &series),
    ));
    out.summary = json!({ "contrast": contrasts });
    Ok(out)
}

fn heatmap(cfg: &ScanConfig) -> Result<Partial, ScanError> {
    let ctx = RunContext::new(cfg, Experiment::Heatmap)?;
    let g = &cfg.grid;
    let theta = theta_grid(g.theta_count);
    let taus = uniform_grid(g.tau_p_min_ns, g.tau_p_max_ns, g.tau_p_count);
    let points = product_grid(&theta, &taus);
    let mut jobs: Vec<Job> = g
        .heatmap_nbar
        .iter()
        .map(|&n| Job {
            source: coherent(n),
            points: points.clone(),
        })
        .collect();
    jobs.push(Job {
        source: Source::Classical,
        points,
    });
    let results = run_jobs(&ctx, &jobs)?;
    let classical = p_e(results.last().expect("classical job is present"));

    let mut out = Partial::new(Value::Null);
    let mut summary = serde_json::Map::new();
    for (job, recs) in jobs.iter().zip(results) {
        let name = match job.source.nbar() {
            Some(n) => format!("heatmap_{}", nbar_label(n)),
            None => "heatmap_classical".to_string(),
        };
        let mut table = Table::new(&HEATMAP_COLUMNS);
        for r in &recs {
            table.push(vec![fmt_num(r.theta_geo), fmt_num(r.tau_p), fmt_num(r.p_e)]);
        }
        let mut metadata = json!({
            "battery": job.source.descriptor(),
            "theta_count": theta.len(),
            "tau_p_count": taus.len(),
            "diagnostics": diagnostics(&recs),
        });
        if job.source.nbar().is_some() {
            let (k, d) = recs
                .iter()
                .zip(&classical)
                .map(|(r, c)| (r.p_e - c).abs())
                .enumerate()
                .fold((0, 0.0f64), |best, (k, d)| if d > best.1 { (k, d) } else { best });
            metadata["max_abs_delta_p_e"] = json!(d);
            metadata["max_abs_delta_p_e_at"] = json!({ "theta_geo": recs[k].theta_geo, "tau_p": recs[k].tau_p });
            summary.insert(job.source.descriptor(), json!({ "max_abs_delta_p_e": d }));
        }
        let values: Vec<Vec<f64>> = recs.chunks(taus.len()).map(p_e).collect();
        out.plots.push((
            name.clone(),
            svg::heatmap(
                &job.source.descriptor(),
                "theta_geo (rad)",
                "tau_p (ns)",
                &theta,
                &taus,
                &values,
            ),
        ));
        out.tables.push(Artifact { name, table, metadata });
        out.records.extend(recs);
    }
    out.summary = Value::Object(summary);
    Ok(out)
}

/// C(n̄) per coherent battery, C_cl, then the raw records of both.
type Sweep = (Vec<f64>, f64, Vec<Vec<ScanRecord>>, Vec<ScanRecord>);

fn contrast_sweep(cfg: &ScanConfig) -> Result<Sweep, ScanError> {
    let ctx = RunContext::new(cfg, Experiment::ContrastScan)?;
    let points = theta_points(cfg);
    let mut jobs: Vec<Job> = cfg
        .grid
        .nbar
        .iter()
        .map(|&n| Job {
            source: coherent(n),
            points: points.clone(),
        })
        .collect();
    jobs.push(Job {
        source: Source::Classical,
        points,
    });
    let mut results = run_jobs(&ctx, &jobs)?;
    let classical = results.pop().expect("classical job is present");
    let c_cl = contrast(&p_e(&classical))?;
    let c = results
        .iter()
        .map(|recs| contrast(&p_e(recs)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((c, c_cl, results, classical))
}

fn contrast_scan(cfg: &ScanConfig) -> Result<Partial, ScanError> {
    let (c, c_cl, results, classical) = contrast_sweep(cfg)?;
    let nbar = &cfg.grid.nbar;
    let mut table = Table::new(&CONTRAST_COLUMNS);
    for (&n, &ci) in nbar.iter().zip(&c) {
        table.push(vec![
            fmt_num(n),
            fmt_num(ci),
            fmt_num(c_cl),
            fmt_num(c_cl - ci),
            fmt_num(1.0 / n),
        ]);
    }

    // Fit over n̄ ≥ fit_min_nbar, in list order.
    let (fit_n, fit_c): (Vec<f64>, Vec<f64>) = nbar
        .iter()
        .zip(&c)
        .filter(|(n, _)| **n >= cfg.grid.fit_min_nbar)
        .map(|(n, c)| (*n, *c))
        .unzip();
    let mut out = Partial::new(Value::Null);
    let fit = match contrast_deficit_fit(&fit_n, &fit_c, c_cl) {
        Ok(f) => json!({ "slope": f.slope, "intercept": f.intercept, "r2": f.r2 }),
        Err(e) => {
            out.warnings.push(format!("contrast-deficit fit skipped: {e}"));
            json!({ "slope": null, "intercept": null, "r2": null, "error": e.to_string() })
        }
    };
    let mut order: Vec<usize> = (0..nbar.len()).collect();
    order.sort_by(|&a, &b| nbar[a].total_cmp(&nbar[b]));
    let monotone = order.windows(2).all(|w| c[w[1]] >= c[w[0]] - MONOTONE_TOL);
    let mut document = fit.clone();
    document["fit_nbar"] = json!(fit_n);
    document["fit_min_nbar"] = json!(cfg.grid.fit_min_nbar);
    document["c_cl"] = json!(c_cl);
    document["monotone_nondecreasing"] = json!(monotone);
    document["monotone_tolerance"] = json!(MONOTONE_TOL);

    let all: Vec<&ScanRecord> = results.iter().flatten().chain(&classical).collect();
    let flat: Vec<ScanRecord> = all.into_iter().cloned().collect();
    out.tables.push(Artifact {
        name: "contrast_scan".into(),
        table,
        metadata: json!({ "fit": document.clone(), "diagnostics": diagnostics(&flat) }),
    });
    out.plots.push((
        "contrast_scan".into(),
        svg::line_plot(
            "Fringe contrast",
            "nbar",
            "C",
            &[
                ("C".into(), nbar.iter().zip(&c).map(|(n, c)| (*n, *c)).collect()),
                ("C_cl".into(), nbar.iter().map(|n| (*n, c_cl)).collect()),
            ],
        ),
    ));
    out.summary = document.clone();
    out.documents.push(("contrast_fit".into(), document));
    out.records = flat;
    Ok(out)
}

fn backaction_table(nbar: &[f64], results: &[Vec<ScanRecord>]) -> Result<(Table, Vec<f64>), ScanError> {
    let mut table = Table::new(&BACKACTION_COLUMNS);
    let mut rel = Vec::new();
    for (&n, recs) in nbar.iter().zip(results) {
        let dn: Vec<f64> = recs.iter().map(|r| r.delta_n.unwrap_or(f64::NAN)).collect();
        let b = backaction(&dn)?;
        rel.push(b.mean_delta_n / n);
        table.push(vec![
            fmt_num(n),
            fmt_num(b.mean_delta_n),
            fmt_num(b.std_delta_n),
            fmt_num(b.mean_delta_n / n),
        ]);
    }
    Ok((table, rel))
}

fn backaction_scan(cfg: &ScanConfig) -> Result<Partial, ScanError> {
    let points = theta_points(cfg);
    let nbar = &cfg.grid.nbar;
    let jobs: Vec<Job> = nbar
        .iter()
        .map(|&n| Job {
            source: coherent(n),
            points: points.clone(),
        })
        .collect();
    let ctx = RunContext::new(cfg, Experiment::Backaction)?;
    let results = run_jobs(&ctx, &jobs)?;
    let (table, rel) = backaction_table(nbar, &results)?;
    let decreasing = rel.windows(2).all(|w| w[1] < w[0]);

    let mut out = Partial::new(json!({ "rel_backaction_decreasing": decreasing }));
    out.records = results.iter().flatten().cloned().collect();
    out.plots.push((
        "backaction".into(),
        svg::line_plot(
            "Battery back-action",
            "nbar",
            "mean delta_n",
            &[(
                "mean_delta_n".into(),
                nbar.iter()
                    .zip(table.column("mean_delta_n").unwrap_or_default())
                    .map(|(n, d)| (*n, d))
                    .collect(),
            )],
        ),
    ));
    out.tables.push(Artifact {
        name: "backaction".into(),
        table,
        metadata: json!({
            "rel_backaction_decreasing": decreasing,
            "diagnostics": diagnostics(&out.records),
        }),
    });

    if cfg.backaction_control {
        // Decoupled (g = 0) lossless battery: every Δn must vanish.
        let mut ctx = RunContext::new(cfg, Experiment::Backaction)?;
        ctx.omega_override = Some(0.0);
        ctx.noise.kappa = 0.0;
        ctx.noise.n_th = 0.0;
        let control = run_jobs(&ctx, &jobs)?;
        let (table, _) = backaction_table(nbar, &control)?;
        let flat: Vec<ScanRecord> = control.into_iter().flatten().collect();
        out.tables.push(Artifact {
            name: "backaction_control".into(),
            table,
            metadata: json!({
                "control": "g = 0, kappa = 0, n_th = 0",
                "diagnostics": diagnostics(&flat),
            }),
        });
        out.records.extend(flat);
    }
    Ok(out)
}

/// One squeeze-benchmark row specification.
#[derive(Debug, Clone, Copy)]
struct BenchState {
    kind: &'static str,
    r_or_q: f64,
    source: Source,
}

fn bench_states(cfg: &ScanConfig, nbar: f64, skipped: &mut Vec<String>) -> Vec<BenchState> {
    let mut states = vec![BenchState {
        kind: "coherent",
        r_or_q: 0.0,
        source: coherent(nbar),
    }];
    let mut alignments = vec![SqueezeAlignment::Amplitude];
    if cfg.grid.phase_squeezed {
        alignments.push(SqueezeAlignment::Phase);
    }
    for alignment in alignments {
        for &r in &cfg.grid.r {
            if nbar <= r.sinh().powi(2) {
                skipped.push(format!(
                    "{}(nbar={},r={})",
                    squeeze_kind(alignment),
                    fmt_num(nbar),
                    fmt_num(r)
                ));
                continue;
            }
            states.push(BenchState {
                kind: squeeze_kind(alignment),
                r_or_q: r,
                source: Source::Quantum(BatteryStateSpec::DisplacedSqueezed {
                    nbar,
                    r,
                    phase: 0.0,
                    alignment,
                }),
            });
        }
    }
    for &q in &cfg.grid.q {
        states.push(BenchState {
            kind: "number_squeezed",
            r_or_q: q,
            source: Source::Quantum(BatteryStateSpec::NumberSqueezedGaussian { nbar, q, phase: 0.0 }),
        });
    }
    states
}

fn squeeze_bench(cfg: &ScanConfig) -> Result<Partial, ScanError> {
    let ctx = RunContext::new(cfg, Experiment::SqueezeBench)?;
    let points = theta_points(cfg);
    let mut skipped = Vec::new();
    let groups: Vec<(f64, Vec<BenchState>)> = cfg
        .grid
        .squeeze_nbar
        .iter()
        .map(|&n| (n, bench_states(cfg, n, &mut skipped)))
        .collect();
    let jobs: Vec<Job> = groups
        .iter()
        .flat_map(|(_, states)| states.iter())
        .map(|s| Job {
            source: s.source,
            points: points.clone(),
        })
        .collect();
    let results = run_jobs(&ctx, &jobs)?;

    let mut out = Partial::new(Value::Null);
    let mut table = Table::new(&SQUEEZE_COLUMNS);
    let mut it = results.into_iter();
    let mut worst_delta = f64::NEG_INFINITY;
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (nbar, states) in &groups {
        let mut c_coh = f64::NAN;
        for s in states {
            let recs = it.next().expect("one result set per job");
            let c = contrast(&p_e(&recs))?;
            if s.kind == "coherent" {
                c_coh = c;
            } else {
                worst_delta = worst_delta.max(c - c_coh);
            }
            let label = format!("{}({})", s.kind, fmt_num(s.r_or_q));
            match series.iter_mut().find(|e| e.0 == label) {
                Some(e) => e.1.push((*nbar, c)),
                None => series.push((label, vec![(*nbar, c)])),
            }
            table.push(vec![
                s.kind.to_string(),
                fmt_num(*nbar),
                fmt_num(s.r_or_q),
                fmt_num(c),
                fmt_num(c - c_coh),
                fmt_opt(recs[0].var_n_init),
                fmt_opt(recs[0].eta_coh_init),
            ]);
            out.records.extend(recs);
        }
    }
    for s in &skipped {
        out.warnings.push(format!("skipped {s}: n̄ does not exceed sinh²r"));
    }
    let summary = json!({
        "max_delta_C": if worst_delta.is_finite() { json!(worst_delta) } else { Value::Null },
        "skipped": skipped,
    });
    out.plots.push((
        "squeeze_bench".into(),
        svg::line_plot("Squeezed batteries", "nbar", "C", &series),
    ));
    out.tables.push(Artifact {
        name: "squeeze_bench".into(),
        table,
        metadata: json!({ "summary": summary.clone(), "diagnostics": diagnostics(&out.records) }),
    });
    out.summary = summary;
    Ok(out)
}

fn oracle_check(cfg: &ScanConfig) -> Result<Partial, ScanError> {
    let checks = oracle::run_checks(cfg);
    let passed = checks.iter().filter(|c| c.passed).count();
    let document = json!({
        "checks": checks.iter().map(oracle::Check::to_json).collect::<Vec<_>>(),
        "passed": passed,
        "total": checks.len(),
        "all_passed": passed == checks.len(),
    });
    let mut out = Partial::new(json!({ "passed": passed, "total": checks.len() }));
    out.documents.push(("oracle_check".into(), document));
    Ok(out)
}
