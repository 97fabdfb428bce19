//! CSV / JSON-lines readers and writers for every file the CLI touches.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back parses to the same bits and reruns produce identical bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use svcdep_core::detect::AnomalyScore;
use svcdep_core::eval::{EvalReport, RollingPoint};
use svcdep_core::telemetry::{assemble_panel, canonical_feature_names, IngestReport, Label, MetricRecord};
use svcdep_core::{MetricPanel, TrainHistory};

use crate::error::RunError;

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, RunError> {
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(File::create(path)?)))
}

fn label_field(label: Label) -> &'static str {
    match label {
        Label::Normal => "0",
        Label::Anomaly => "1",
        Label::Unlabeled => "",
    }
}

fn parse_label(raw: &str, line: usize) -> Result<Option<bool>, RunError> {
    match raw.trim() {
        "" | "-1" => Ok(None),
        "0" => Ok(Some(false)),
        "1" => Ok(Some(true)),
        other => Err(RunError::Config(format!("line {line}: label must be 0, 1 or empty, got `{other}`"))),
    }
}

/// Edge file with header `src,dst`.
pub fn read_edges(path: &Path) -> Result<Vec<(String, String)>, RunError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| RunError::Config(format!("{}: missing column `{name}`", path.display())))
    };
    let (src, dst) = (col("src")?, col("dst")?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        out.push((row[src].to_string(), row[dst].to_string()));
    }
    Ok(out)
}

pub fn write_edges(path: &Path, edges: &[(String, String)]) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    w.write_record(["src", "dst"])?;
    for (a, b) in edges {
        w.write_record([a, b])?;
    }
    w.flush()?;
    Ok(())
}

/// Metrics file, CSV or JSON lines (`.jsonl` / `.ndjson`), onto a regular
/// grid. `nodes` fixes the node order (normally the graph's).
pub fn read_metrics(path: &Path, nodes: Option<&[String]>) -> Result<(MetricPanel, IngestReport), RunError> {
    let names = canonical_feature_names();
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let records = if matches!(ext, "jsonl" | "ndjson") { metric_records_jsonl(path, &names)? } else { metric_records_csv(path, &names)? };
    Ok(assemble_panel(&records, nodes, &names, None)?)
}

fn metric_records_csv(path: &Path, names: &[String]) -> Result<Vec<MetricRecord>, RunError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| RunError::Config(format!("{}: missing column `{name}`", path.display())));
    let ts = need("timestamp")?;
    let svc = need("service")?;
    let feats = names.iter().map(|n| need(n)).collect::<Result<Vec<_>, _>>()?;
    let label = col("label");

    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row?;
        let line = k + 2;
        let timestamp = row[ts].parse::<i64>().map_err(|_| RunError::Config(format!("line {line}: bad timestamp `{}`", &row[ts])))?;
        // unparsable values become NaN and the row is rejected downstream
        let values = feats.iter().map(|&c| row[c].parse::<f64>().unwrap_or(f64::NAN)).collect();
        let label = match label {
            Some(c) => parse_label(row.get(c).unwrap_or(""), line)?,
            None => None,
        };
        out.push(MetricRecord { timestamp, service: row[svc].to_string(), values, label });
    }
    Ok(out)
}

fn metric_records_jsonl(path: &Path, names: &[String]) -> Result<Vec<MetricRecord>, RunError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let n = k + 1;
        let v: serde_json::Value = serde_json::from_str(&line).map_err(|e| RunError::Config(format!("line {n}: {e}")))?;
        let timestamp = v["timestamp"].as_i64().ok_or_else(|| RunError::Config(format!("line {n}: missing integer timestamp")))?;
        let service = v["service"].as_str().ok_or_else(|| RunError::Config(format!("line {n}: missing service")))?.to_string();
        let values = names.iter().map(|f| v[f.as_str()].as_f64().unwrap_or(f64::NAN)).collect();
        let label = match &v["label"] {
            serde_json::Value::Null => None,
            serde_json::Value::Number(x) => parse_label(&x.to_string(), n)?,
            serde_json::Value::String(s) => parse_label(s, n)?,
            other => return Err(RunError::Config(format!("line {n}: bad label {other}"))),
        };
        out.push(MetricRecord { timestamp, service, values, label });
    }
    Ok(out)
}

/// Metrics CSV, one row per (step, service), steps outermost.
pub fn write_metrics(path: &Path, panel: &MetricPanel) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["timestamp".to_string(), "service".to_string()];
    header.extend(panel.feature_names().iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for t in 0..panel.num_steps() {
        for (n, id) in panel.node_ids().iter().enumerate() {
            let mut row = vec![panel.timestamp(t).to_string(), id.clone()];
            row.extend(panel.features_at(n, t).iter().map(|v| v.to_string()));
            row.push(label_field(panel.label(n, t)).into());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `epoch,total,contrast,temporal,seconds`, epochs counted from 1.
pub fn write_history(path: &Path, history: &TrainHistory) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    w.write_record(["epoch", "total", "contrast", "temporal", "seconds"])?;
    for (k, e) in history.epochs.iter().enumerate() {
        w.write_record([(k + 1).to_string(), e.total.to_string(), e.contrast.to_string(), e.temporal.to_string(), e.seconds.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `service,timestamp,score,prediction,label` for every scored cell,
/// labels taken from `truth`.
pub fn write_scores(path: &Path, scores: &AnomalyScore, truth: &MetricPanel, threshold: f64) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    w.write_record(["service", "timestamp", "score", "prediction", "label"])?;
    for t in scores.steps() {
        for (n, id) in truth.node_ids().iter().enumerate() {
            let s = scores.get(n, t);
            let pred = if s > threshold { "1" } else { "0" };
            w.write_record([id.as_str(), &truth.timestamp(t).to_string(), &s.to_string(), pred, label_field(truth.label(n, t))])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn auc_field(r: &EvalReport) -> String {
    r.auc.map(|a| a.to_string()).unwrap_or_default()
}

/// `knob1,knob2,…,precision,recall,f1,auc,tp,fp,tn,fn`; an undefined AUC is
/// left empty. Knob columns come from the first report.
pub fn write_report(path: &Path, reports: &[EvalReport]) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    let knobs: Vec<String> = reports.first().map(|r| r.sweep_coords.iter().map(|c| c.0.clone()).collect()).unwrap_or_default();
    let mut header = knobs.clone();
    header.extend(["precision", "recall", "f1", "auc", "tp", "fp", "tn", "fn"].map(String::from));
    w.write_record(&header)?;
    for r in reports {
        let mut row: Vec<String> = r.sweep_coords.iter().map(|c| c.1.to_string()).collect();
        row.extend([r.precision.to_string(), r.recall.to_string(), r.f1.to_string(), auc_field(r)]);
        row.extend([r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn_].map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `start_step,timestamp,precision,recall,f1,auc,tp,fp,tn,fn`.
pub fn write_rolling(path: &Path, points: &[RollingPoint], panel: &MetricPanel) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    w.write_record(["start_step", "timestamp", "precision", "recall", "f1", "auc", "tp", "fp", "tn", "fn"])?;
    for p in points {
        let r = &p.report;
        let mut row = vec![p.start.to_string(), panel.timestamp(p.start).to_string()];
        row.extend([r.precision.to_string(), r.recall.to_string(), r.f1.to_string(), auc_field(r)]);
        row.extend([r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn_].map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}
