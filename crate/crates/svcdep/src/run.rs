//! The five commands. Each returns the lines it wants printed so callers
//! (the binary, tests) decide where they go.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use svcdep_core::eval::{rolling_eval, run_point, EvalReport, SweepSpec};
use svcdep_core::experiment::{detect, prepare, Detection, Prepared};
use svcdep_core::graph::build_graph;
use svcdep_core::simgen::{generate_topology, simulate};
use svcdep_core::train::train_from;
use svcdep_core::{encoder, Dataset, TrainConfig};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::RunError;
use crate::io;

pub const EDGES_FILE: &str = "edges.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const SCORES_FILE: &str = "scores.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const ROLLING_FILE: &str = "rolling.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Lines for stdout.
pub type Output = Vec<String>;

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, RunError> {
    let dir = cfg.paths.out.clone();
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Files named in the config, or the configured scenario.
pub fn dataset(cfg: &RunConfig) -> Result<Dataset, RunError> {
    cfg.check_paths()?;
    match (&cfg.paths.edges, &cfg.paths.metrics) {
        (Some(e), Some(m)) => {
            let edges = io::read_edges(e)?;
            let graph = build_graph(&edges, cfg.direction)?;
            let (panel, report) = io::read_metrics(m, Some(graph.node_ids()))?;
            if report.rejected > 0 {
                log::warn!("{}: rejected {} rows with non-finite values", m.display(), report.rejected);
            }
            if report.filled > 0 {
                log::info!("{}: filled {} missing cells", m.display(), report.filled);
            }
            Ok(Dataset::Given { panel, graph })
        }
        _ => {
            cfg.scenario.validate()?;
            Ok(Dataset::Simulated(cfg.scenario.clone()))
        }
    }
}

/// Simulate the configured scenario into `edges.csv` + `metrics.csv`.
pub fn gen(cfg: &RunConfig) -> Result<Output, RunError> {
    let dir = out_dir(cfg)?;
    let topo = generate_topology(cfg.scenario.tiers, cfg.scenario.seed)?;
    let panel = simulate(&topo, &cfg.scenario)?;
    io::write_edges(&dir.join(EDGES_FILE), &topo.edge_list())?;
    io::write_metrics(&dir.join(METRICS_FILE), &panel)?;
    Ok(vec![format!(
        "generated {} nodes x {} steps, anomaly rate {:.4} -> {}",
        panel.num_nodes(),
        panel.num_steps(),
        panel.anomaly_rate(),
        dir.display()
    )])
}

fn train_prepared(cfg: &RunConfig, prep: &Prepared, dir: &Path) -> Result<(Checkpoint, Output), RunError> {
    let exp = cfg.experiment();
    let train = TrainConfig { seed: exp.seed, ..exp.train };
    let init = encoder::init_params(exp.model.dims, exp.model.activation, exp.seed)?;
    let started = Instant::now();
    let mut wall = || started.elapsed().as_secs_f64();
    let mut zero = || 0.0;
    let clock: &mut dyn FnMut() -> f64 = if cfg.output.record_wall_time { &mut wall } else { &mut zero };
    let (params, history) = train_from(init, &prep.panel, &prep.graph, &exp.model, &exp.objective, &train, prep.splits.train.clone(), clock)?;
    let ck = Checkpoint { params, stats: Some(prep.stats.clone()) };
    ck.save(&dir.join(CHECKPOINT_FILE))?;
    io::write_history(&dir.join(HISTORY_FILE), &history)?;
    let last = history.epochs.last().expect("at least one epoch");
    let lines = vec![format!(
        "trained {} epochs: loss {:.6} (contrast {:.6}, temporal {:.6})",
        history.len(),
        last.total,
        last.contrast,
        last.temporal
    )];
    Ok((ck, lines))
}

pub fn train(cfg: &RunConfig) -> Result<Output, RunError> {
    let dir = out_dir(cfg)?;
    let prep = prepare(&dataset(cfg)?, &cfg.experiment())?;
    Ok(train_prepared(cfg, &prep, &dir)?.1)
}

fn eval_prepared(cfg: &RunConfig, prep: &Prepared, ck: &Checkpoint, dir: &Path) -> Result<(Detection, Output), RunError> {
    if let Some(stats) = &ck.stats {
        if *stats != prep.stats {
            return Err(RunError::Config("checkpoint was trained on data with different standardization".into()));
        }
    }
    let exp = cfg.experiment();
    if ck.params.dims != exp.model.dims {
        return Err(RunError::Config("checkpoint dims differ from [model.dims]".into()));
    }
    let det = detect(&ck.params, prep, &exp)?;
    io::write_scores(&dir.join(SCORES_FILE), &det.scores, &prep.truth, det.threshold)?;
    io::write_report(&dir.join(REPORT_FILE), std::slice::from_ref(&det.report))?;
    let test = det.scores.slice(prep.splits.test.clone());
    let rolling = rolling_eval(&test, &prep.truth, det.threshold, cfg.output.rolling_window.min(test.steps().len()))?;
    io::write_rolling(&dir.join(ROLLING_FILE), &rolling, &prep.truth)?;
    let val_labeled = prep.splits.val.clone().map(|t| prep.panel.step_labels(t).iter().filter(|l| l.is_labeled()).count()).sum::<usize>();
    let r = &det.report;
    let lines = vec![
        format!(
            "threshold {} from validation steps {}..{} ({} labeled cells, bank {})",
            det.threshold, prep.splits.val.start, prep.splits.val.end, val_labeled, det.bank_size
        ),
        metrics_line(r),
    ];
    Ok((det, lines))
}

pub fn metrics_line(r: &EvalReport) -> String {
    let auc = r.auc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "undefined".into());
    format!(
        "test precision {:.4} recall {:.4} f1 {:.4} auc {} (tp {} fp {} tn {} fn {})",
        r.precision, r.recall, r.f1, auc, r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn_
    )
}

pub fn eval(cfg: &RunConfig, checkpoint: Option<&Path>) -> Result<Output, RunError> {
    let dir = out_dir(cfg)?;
    let path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| dir.join(CHECKPOINT_FILE));
    let ck = Checkpoint::load(&path)?;
    let prep = prepare(&dataset(cfg)?, &cfg.experiment())?;
    Ok(eval_prepared(cfg, &prep, &ck, &dir)?.1)
}

/// Every grid point on a pool of `jobs` workers; rows keep grid order.
pub fn sweep(cfg: &RunConfig, spec: &SweepSpec, jobs: usize) -> Result<Output, RunError> {
    spec.validate()?;
    let dir = out_dir(cfg)?;
    let data = dataset(cfg)?;
    let base = cfg.experiment();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| RunError::Config(e.to_string()))?;
    let points = spec.points();
    let reports: Vec<EvalReport> = pool.install(|| points.par_iter().map(|p| run_point(p, &base, &data)).collect::<Result<_, _>>())?;
    io::write_report(&dir.join(SWEEP_FILE), &reports)?;
    let mut lines = Vec::with_capacity(reports.len());
    for r in &reports {
        let coords: Vec<String> = r.sweep_coords.iter().map(|(k, v)| format!("{k}={v}")).collect();
        lines.push(format!("{}: {}", coords.join(" "), metrics_line(r)));
    }
    Ok(lines)
}

/// gen (for simulated data) + train + eval in one pass.
pub fn e2e(cfg: &RunConfig) -> Result<Output, RunError> {
    let dir = out_dir(cfg)?;
    let mut lines = Vec::new();
    let data = dataset(cfg)?;
    if let Dataset::Simulated(_) = data {
        lines.extend(gen(cfg)?);
    }
    let prep = prepare(&data, &cfg.experiment())?;
    let (ck, train_lines) = train_prepared(cfg, &prep, &dir)?;
    lines.extend(train_lines);
    lines.extend(eval_prepared(cfg, &prep, &ck, &dir)?.1);
    Ok(lines)
}
