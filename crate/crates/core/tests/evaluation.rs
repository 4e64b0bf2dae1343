mod common;

use common::*;
use interface_miner::diff::{extract_deltas, Pruning};
use interface_miner::error::EvalError;
use interface_miner::evaluator::*;
use interface_miner::graph::BuildOptions;
use interface_miner::pipeline::Miner;
use interface_miner::spec_io::export_json;

#[test]
fn olap_steps_have_their_leaf_counts() {
    let ann = ann();
    let walk = gen_olap_walk(1001, 11);
    let qs = parse_all(&walk.iter().map(|(q, _)| q.as_str()).collect::<Vec<_>>());
    assert_eq!(walk[0].1, Step::Seed);
    for (i, pair) in qs.windows(2).enumerate() {
        let set = extract_deltas(&pair[0], &pair[1], Pruning::Lca, &ann);
        assert_eq!(set.leaves().count(), walk[i + 1].1.leaf_count(), "step {} {:?}", i + 1, walk[i + 1].1);
    }
}

#[test]
fn some_seed_drops_the_aggregate_then_moves_month() {
    // drop the aggregate, then move Month from 9 to 8
    let found = (0..2000u64).find(|&seed| {
        let log = gen_olap_log(3, seed);
        log[1] == "SELECT DestState FROM ontime WHERE Month = 9 AND Day = 3 GROUP BY DestState"
            && log[2] == "SELECT DestState FROM ontime WHERE Month = 8 AND Day = 3 GROUP BY DestState"
    });
    assert!(found.is_some());
}

#[test]
fn olap_partitions_are_the_four_slots() {
    let m = Miner::default().mine(&parse_all(&gen_olap_log(200, 3))).unwrap();
    let labels: Vec<&str> = m.widgets.iter().map(|w| w.label.as_str()).collect();
    assert_eq!(labels, ["SELECT column", "SELECT expression", "WHERE Month", "WHERE Day", "GROUP BY column"]);
}

#[test]
fn window_and_pruning_do_not_change_the_spec() {
    for seed in [4, 9] {
        let log = parse_all(&gen_olap_log(200, seed));
        let spec = |window, pruning| {
            export_json(&Miner { build: BuildOptions { window, pruning }, ..Miner::default() }.mine(&log).unwrap())
        };
        let base = spec(2, Pruning::Lca);
        assert_eq!(base, spec(200, Pruning::Lca));
        assert_eq!(base, spec(2, Pruning::None));
    }
}

#[test]
fn recall_bounds() {
    let cfg = EvalConfig::default();
    let log = parse_all(&gen_olap_log(60, 5));
    assert_eq!(recall(&log, &log[10..30], &cfg).unwrap(), 1.0);
    let other = parse_all(&["SELECT x FROM elsewhere", "SELECT y FROM elsewhere"]);
    assert_eq!(recall(&log, &other, &cfg).unwrap(), 0.0);
    assert_eq!(recall(&log, &[], &cfg).unwrap_err(), EvalError::EmptyHoldout);
    assert_eq!(recall(&[], &log, &cfg).unwrap_err(), EvalError::EmptyTraining);
}

#[test]
fn training_log_is_fully_expressed() {
    let ann = ann();
    for seed in 0..3 {
        let log = parse_all(&gen_olap_log(80, seed));
        let m = Miner::default().mine(&log).unwrap();
        assert_eq!(expressiveness(&m, &log, &ann, 20_000), 1.0);
    }
}

#[test]
fn evaluate_reports_every_measure() {
    let log = parse_all(&gen_olap_log(120, 2));
    let report = evaluate(&log, Split { train: 60, holdout: 60 }, &EvalConfig::default()).unwrap();
    assert_eq!(report.chunks, 1);
    assert_eq!(report.expressiveness, 1.0);
    assert!(report.recall > 0.0 && report.recall <= 1.0);
    assert_eq!(report.curve.last().map(|c| c.0), Some(60));
    let text = report.to_text();
    for key in ["recall=", "expressiveness=", "widgets="] {
        assert!(text.contains(key), "{text}");
    }
    assert!(report.curve_csv().starts_with("train_size,recall\n"));
}

#[test]
fn two_table_precision_before_and_after_filtering() {
    let ann = ann();
    let log = parse_all(&Client::new(0).log(30, 0));
    let m = Miner::default().mine(&log).unwrap();
    let schema = SchemaMap::from_corpus(&log);
    assert_eq!(schema.tables_of("ew0").map(|t| t.len()), Some(1));
    assert_eq!(schema.tables_of("specobjid0").map(|t| t.len()), Some(2));
    let opts = EnumOptions::default();
    let raw = schema_filter(&m, &schema, &ann, &opts);
    // 2 tables × 2 columns × 3 values, one table/column pair invalid
    assert_eq!((raw.states, raw.passing), (12, 9));
    assert_eq!(filtered_precision(&m, &schema, &ann, &opts).fraction(), 1.0);
}

#[test]
fn mixing_clients_lowers_precision() {
    let ann = ann();
    let precision = |m: usize| {
        let log = parse_all(&mixed_log(m, 30));
        let model = Miner::default().mine(&log).unwrap();
        schema_filter(&model, &SchemaMap::from_corpus(&log), &ann, &EnumOptions::default()).fraction()
    };
    let (one, eight) = (precision(1), precision(8));
    assert!((one - 0.75).abs() < 1e-12);
    assert!((eight - 3.0 / 32.0).abs() < 1e-12);
}
