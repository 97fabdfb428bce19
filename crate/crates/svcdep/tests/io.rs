use std::fs;

use svcdep::io::{read_edges, read_metrics, write_edges, write_metrics};
use svcdep_core::simgen::{generate_topology, simulate};
use svcdep_core::telemetry::Label;
use svcdep_core::{ScenarioConfig, TierCounts};

fn small_panel() -> svcdep_core::MetricPanel {
    let sc = ScenarioConfig { tiers: TierCounts { gateway: 1, middle: 2, backend: 2 }, steps: 120, random_faults: None, ..Default::default() };
    let topo = generate_topology(sc.tiers, 3).unwrap();
    let mut panel = simulate(&topo, &sc).unwrap();
    panel.set_label(0, 5, Label::Anomaly);
    panel.set_label(1, 6, Label::Normal);
    panel
}

#[test]
fn metrics_csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let panel = small_panel();
    let path = dir.path().join("metrics.csv");
    write_metrics(&path, &panel).unwrap();
    let (back, report) = read_metrics(&path, Some(panel.node_ids())).unwrap();
    assert_eq!(report.filled + report.rejected, 0);
    assert_eq!(back.node_ids(), panel.node_ids());
    assert_eq!(back.start_time(), panel.start_time());
    assert_eq!(back.step_seconds(), panel.step_seconds());
    assert!(back.raw_features().iter().zip(panel.raw_features()).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(back.raw_labels(), panel.raw_labels());

    let again = dir.path().join("again.csv");
    write_metrics(&again, &back).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn jsonl_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let header = "timestamp,service,cpu,mem,io,net_in,net_out,latency,error_rate,label\n";
    let csv = format!("{header}0,a,1,2,3,4,5,6,0.5,1\n0,b,1,1,1,1,1,1,0,\n60,a,2,2,3,4,5,6,0.5,0\n60,b,1,1,1,1,1,1,0,-1\n");
    let jsonl = [
        r#"{"timestamp":0,"service":"a","cpu":1,"mem":2,"io":3,"net_in":4,"net_out":5,"latency":6,"error_rate":0.5,"label":1}"#,
        r#"{"timestamp":0,"service":"b","cpu":1,"mem":1,"io":1,"net_in":1,"net_out":1,"latency":1,"error_rate":0}"#,
        "",
        r#"{"timestamp":60,"service":"a","cpu":2,"mem":2,"io":3,"net_in":4,"net_out":5,"latency":6,"error_rate":0.5,"label":"0"}"#,
        r#"{"timestamp":60,"service":"b","cpu":1,"mem":1,"io":1,"net_in":1,"net_out":1,"latency":1,"error_rate":0,"label":null}"#,
    ]
    .join("\n");
    let (c, j) = (dir.path().join("m.csv"), dir.path().join("m.jsonl"));
    fs::write(&c, csv).unwrap();
    fs::write(&j, jsonl).unwrap();
    let (a, _) = read_metrics(&c, None).unwrap();
    let (b, _) = read_metrics(&j, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.label(0, 0), Label::Anomaly);
    assert_eq!(a.label(0, 1), Label::Normal);
    assert_eq!(a.label(1, 0), Label::Unlabeled);
    assert_eq!(a.label(1, 1), Label::Unlabeled);
}

#[test]
fn gaps_are_filled_and_bad_rows_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let text = "timestamp,service,cpu,mem,io,net_in,net_out,latency,error_rate\n\
        0,a,1,1,1,1,1,1,0\n0,b,2,2,2,2,2,2,0\n\
        60,a,3,1,1,1,1,1,0\n60,b,oops,2,2,2,2,2,0\n\
        120,a,5,1,1,1,1,1,0\n120,b,4,2,2,2,2,2,NaN\n\
        180,a,1,1,1,1,1,1,0\n180,b,6,2,2,2,2,2,0\n";
    fs::write(&path, text).unwrap();
    let (panel, report) = read_metrics(&path, None).unwrap();
    assert_eq!(panel.num_steps(), 4);
    assert_eq!(report.rejected, 2);
    assert!(report.filled > 0);
    assert!(panel.raw_features().iter().all(|v| v.is_finite()));
    assert!(panel.raw_labels().iter().all(|l| *l == Label::Unlabeled));
}

#[test]
fn bad_inputs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing_col = dir.path().join("a.csv");
    fs::write(&missing_col, "timestamp,service,cpu\n0,a,1\n").unwrap();
    assert_eq!(read_metrics(&missing_col, None).unwrap_err().exit_code(), 1);
    let bad_label = dir.path().join("b.csv");
    fs::write(&bad_label, "timestamp,service,cpu,mem,io,net_in,net_out,latency,error_rate,label\n0,a,1,1,1,1,1,1,0,yes\n").unwrap();
    assert_eq!(read_metrics(&bad_label, None).unwrap_err().exit_code(), 1);
    let edges = dir.path().join("e.csv");
    fs::write(&edges, "from,to\na,b\n").unwrap();
    assert!(read_edges(&edges).is_err());
}

#[test]
fn edges_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edges.csv");
    let edges = vec![("gw".to_string(), "api".to_string()), ("api".to_string(), "db".to_string())];
    write_edges(&path, &edges).unwrap();
    assert_eq!(read_edges(&path).unwrap(), edges);
}
