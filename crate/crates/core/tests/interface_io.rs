mod common;

use std::process::Command;

use common::*;
use interface_miner::evaluator::gen_olap_log;
use interface_miner::pipeline::Miner;
use interface_miner::serve::{self, ServeOptions};
use interface_miner::spec_io::{export, export_json, import, import_json, to_json, Layout};
use interface_miner::widget::{WidgetKind, WidgetLibrary};

fn imine() -> Command {
    Command::new(env!("CARGO_BIN_EXE_imine"))
}

fn model(qs: &[impl AsRef<str>]) -> interface_miner::mapper::InterfaceModel {
    Miner::default().mine(&parse_all(qs)).unwrap()
}

#[test]
fn worked_logs_round_trip_byte_identical() {
    let (lib, ann) = (WidgetLibrary::default(), ann());
    let logs: Vec<Vec<String>> = vec![
        threshold_log(),
        top_log(),
        SUBQUERY_LOG.iter().map(|s| s.to_string()).collect(),
        FUNCTION_LOG.iter().map(|s| s.to_string()).collect(),
        gen_olap_log(150, 1),
    ];
    for log in logs {
        let text = export_json(&model(&log));
        let back = import_json(&text, &lib, &ann).unwrap();
        assert_eq!(export_json(&back), text);
    }
}

#[test]
fn edited_labels_types_and_layout_survive_import() {
    let (lib, ann) = (WidgetLibrary::default(), ann());
    let build = interface_miner::graph::BuildOptions { window: 2, pruning: interface_miner::diff::Pruning::None };
    let m = Miner { build, ..Miner::default() }.mine(&parse_all(&AGGREGATE_LOG)).unwrap();
    let mut doc = export(&m);
    let swapped = match doc.widgets[0].kind {
        WidgetKind::Dropdown => WidgetKind::RadioButtons,
        _ => WidgetKind::Dropdown,
    };
    doc.widgets[0].label = "Aggregate".into();
    doc.widgets[0].kind = swapped;
    doc.layout = Layout { columns: 3, cells: vec![interface_miner::spec_io::Cell { widget: "w0".into(), row: 2, col: 1 }] };
    let back = import(&doc, &lib, &ann).unwrap();
    assert_eq!(back.widgets[0].label, "Aggregate");
    assert_eq!(back.widgets[0].kind, swapped);
    assert_eq!(to_json(&export(&back)), to_json(&doc));

    // strings cannot move onto a slider
    let mut bad = export(&model(&threshold_log()));
    bad.widgets[1].kind = WidgetKind::Slider;
    let err = import(&bad, &lib, &ann).unwrap_err().to_string();
    assert!(err.contains("w1"), "{err}");
}

#[test]
fn cli_gen_mine_eval() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("olap.sql");
    let spec = dir.path().join("olap.json");
    let report = dir.path().join("report.txt");
    let curve = dir.path().join("curve.csv");

    let st = imine().args(["gen-olap", "--n", "120", "--seed", "3", "--out"]).arg(&log).status().unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(text.matches("SELECT").count(), 120);

    let st = imine().args(["mine", "--log"]).arg(&log).arg("--out").arg(&spec).status().unwrap();
    assert!(st.success());
    let written = std::fs::read_to_string(&spec).unwrap();
    assert_eq!(written, export_json(&model(&gen_olap_log(120, 3))));

    let out = imine()
        .args(["eval", "--split", "60:60", "--log"])
        .arg(&log)
        .arg("--report")
        .arg(&report)
        .arg("--curve")
        .arg(&curve)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&report).unwrap().contains("recall="));
    assert!(std::fs::read_to_string(&curve).unwrap().starts_with("train_size,recall"));
}

#[test]
fn cli_splits_clients_and_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("clients.tsv");
    let lines: Vec<String> = ["SELECT a FROM t", "SELECT b FROM t"]
        .iter()
        .enumerate()
        .flat_map(|(i, q)| ["alice", "bob"].map(|c| format!("{c}\t2020-01-0{}\t{q}", i + 1)))
        .collect();
    std::fs::write(&log, lines.join("\n")).unwrap();
    let out = dir.path().join("ui.json");
    let st = imine().args(["mine", "--log"]).arg(&log).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    assert!(dir.path().join("ui-alice.json").exists());
    assert!(dir.path().join("ui-bob.json").exists());

    let st = imine().args(["mine", "--window", "0", "--log"]).arg(&log).arg("--out").arg(&out).output().unwrap();
    assert!(!st.status.success());
    let st = imine().args(["gen-olap", "--n", "0", "--out"]).arg(&out).output().unwrap();
    assert!(!st.status.success());
    let st = imine().args(["mine", "--gamma", "0.5", "--log"]).arg(&log).arg("--out").arg(&out).output().unwrap();
    assert!(!st.status.success());
}

fn post(url: &str, body: &str) -> ureq::Response {
    match ureq::post(url).send_string(body) {
        Ok(r) => r,
        Err(ureq::Error::Status(_, r)) => r,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn serve_spec_and_exec() {
    let m = model(&threshold_log());
    let spec = export_json(&m);
    let h = serve::start("127.0.0.1:0", m.clone(), ann(), ServeOptions::default()).unwrap();
    let base = h.url();

    assert_eq!(ureq::get(&format!("{base}/spec.json")).call().unwrap().into_string().unwrap(), spec);
    let index = ureq::get(&format!("{base}/")).call().unwrap().into_string().unwrap();
    assert!(index.contains("spec.json"));

    let inside = threshold_query(8, "Alice");
    let r = post(&format!("{base}/exec"), &inside);
    assert_eq!(r.status(), 200);
    assert_eq!(r.header("X-In-Closure"), Some("true"));
    assert_eq!(r.into_string().unwrap(), format!("sql\n{inside}\n"));

    let r = post(&format!("{base}/exec"), "SELECT nothing FROM elsewhere");
    assert_eq!(r.header("X-In-Closure"), Some("false"));
    assert_eq!(post(&format!("{base}/exec"), "SELEC broken").status(), 400);
    h.stop();

    let opts = ServeOptions { exec_adapter: Some("cat".into()), ..ServeOptions::default() };
    let h = serve::start("127.0.0.1:0", m.clone(), ann(), opts).unwrap();
    let r = post(&format!("{}/exec", h.url()), &inside);
    assert_eq!(r.into_string().unwrap(), inside);
    h.stop();

    let opts = ServeOptions { exec_adapter: Some("exit 3".into()), ..ServeOptions::default() };
    let h = serve::start("127.0.0.1:0", m, ann(), opts).unwrap();
    assert_eq!(post(&format!("{}/exec", h.url()), &inside).status(), 502);
    h.stop();
}

#[test]
fn serve_static_dir_blocks_parent_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>custom</p>").unwrap();
    let opts = ServeOptions { static_dir: Some(dir.path().to_path_buf()), ..ServeOptions::default() };
    let h = serve::start("127.0.0.1:0", model(&AGGREGATE_LOG), ann(), opts).unwrap();
    let body = ureq::get(&format!("{}/", h.url())).call().unwrap().into_string().unwrap();
    assert_eq!(body, "<p>custom</p>");
    let status = match ureq::get(&format!("{}/a/../../etc/passwd", h.url())).call() {
        Ok(r) => r.status(),
        Err(ureq::Error::Status(s, _)) => s,
        Err(e) => panic!("{e}"),
    };
    assert_eq!(status, 404);
    h.stop();
}
