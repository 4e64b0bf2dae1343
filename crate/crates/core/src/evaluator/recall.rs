//! Hold-out recall and evaluation reports.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::ast::AstNode;
use crate::error::EvalError;
use crate::pipeline::Miner;

use super::closure::{expressiveness, in_closure, EnumOptions, DEFAULT_SEARCH_BUDGET};
use super::schema::{schema_filter, Precision, SchemaMap};

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub miner: Miner,
    /// States the membership search may expand per query.
    pub search_budget: usize,
    pub enumeration: EnumOptions,
    /// Training sizes between curve points.
    pub curve_step: usize,
    /// Derived from the log when unset.
    pub schema: Option<SchemaMap>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            miner: Miner::default(),
            search_budget: DEFAULT_SEARCH_BUDGET,
            enumeration: EnumOptions::default(),
            curve_step: 10,
            schema: None,
        }
    }
}

/// Training and hold-out sizes of one chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub train: usize,
    pub holdout: usize,
}

impl Default for Split {
    fn default() -> Self {
        Split { train: 100, holdout: 100 }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected TRAIN:HOLDOUT, got `{s}`"))?;
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad split `{s}`: {e}"));
        Ok(Split { train: parse(a)?, holdout: parse(b)? })
    }
}

/// Fraction of `holdout` inside the closure of the interface mined from
/// `train`.
pub fn recall(train: &[AstNode], holdout: &[AstNode], cfg: &EvalConfig) -> Result<f64, EvalError> {
    if holdout.is_empty() {
        return Err(EvalError::EmptyHoldout);
    }
    if train.is_empty() {
        return Err(EvalError::EmptyTraining);
    }
    let model = cfg.miner.mine(train)?;
    let ann = &cfg.miner.grammar;
    let hits = holdout.par_iter().filter(|q| in_closure(&model, q, ann, cfg.search_budget)).count();
    Ok(hits as f64 / holdout.len() as f64)
}

/// Recall of nested training prefixes `step, 2·step, …, train.len()`.
pub fn recall_curve(train: &[AstNode], holdout: &[AstNode], cfg: &EvalConfig) -> Result<Vec<(usize, f64)>, EvalError> {
    let step = cfg.curve_step.max(1);
    let mut sizes: Vec<usize> = (step..train.len()).step_by(step).collect();
    sizes.push(train.len());
    sizes.into_iter().map(|k| Ok((k, recall(&train[..k], holdout, cfg)?))).collect()
}

#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub queries: usize,
    pub chunks: usize,
    pub split: Option<Split>,
    /// Widgets in the first chunk's interface.
    pub widgets: usize,
    /// Mean over chunks, on each chunk's training part.
    pub expressiveness: f64,
    /// Mean over chunks.
    pub recall: f64,
    /// Mean recall per training size.
    pub curve: Vec<(usize, f64)>,
    pub precision: Option<Precision>,
    pub timings: Vec<(&'static str, Duration)>,
}

/// Chunk the log into `train + holdout` windows; each window's last
/// `holdout` queries are scored against the interface of the rest.
pub fn evaluate(log: &[AstNode], split: Split, cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    if split.train == 0 {
        return Err(EvalError::EmptyTraining);
    }
    let chunks: Vec<&[AstNode]> = log.chunks(split.train + split.holdout).filter(|c| c.len() > split.train).collect();
    if chunks.is_empty() || split.holdout == 0 {
        return Err(EvalError::EmptyHoldout);
    }
    let ann = &cfg.miner.grammar;
    let mut report = EvalReport { queries: log.len(), chunks: chunks.len(), split: Some(split), ..EvalReport::default() };
    let (mut mine_t, mut closure_t, mut curve_t) = (Duration::ZERO, Duration::ZERO, Duration::ZERO);
    let mut sums: Vec<(usize, f64)> = Vec::new();
    let mut first_model = None;
    for chunk in &chunks {
        let (train, holdout) = chunk.split_at(split.train);
        let t = Instant::now();
        let model = cfg.miner.mine(train)?;
        mine_t += t.elapsed();
        let t = Instant::now();
        report.expressiveness += expressiveness(&model, train, ann, cfg.search_budget);
        report.recall += expressiveness(&model, holdout, ann, cfg.search_budget);
        closure_t += t.elapsed();
        let t = Instant::now();
        for (i, (k, r)) in recall_curve(train, holdout, cfg)?.into_iter().enumerate() {
            match sums.get_mut(i) {
                Some(slot) => slot.1 += r,
                None => sums.push((k, r)),
            }
        }
        curve_t += t.elapsed();
        first_model.get_or_insert(model);
    }
    let n = chunks.len() as f64;
    report.expressiveness /= n;
    report.recall /= n;
    report.curve = sums.into_iter().map(|(k, r)| (k, r / n)).collect();
    let model = first_model.expect("at least one chunk");
    report.widgets = model.widgets.len();
    let schema = cfg.schema.clone().unwrap_or_else(|| SchemaMap::from_corpus(log));
    let t = Instant::now();
    if !schema.is_empty() {
        report.precision = Some(schema_filter(&model, &schema, ann, &cfg.enumeration));
    }
    report.timings = vec![("mine", mine_t), ("closure", closure_t), ("curve", curve_t), ("precision", t.elapsed())];
    Ok(report)
}

impl EvalReport {
    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "queries={}", self.queries);
        let _ = writeln!(out, "chunks={}", self.chunks);
        if let Some(s) = self.split {
            let _ = writeln!(out, "train={}", s.train);
            let _ = writeln!(out, "holdout={}", s.holdout);
        }
        let _ = writeln!(out, "widgets={}", self.widgets);
        let _ = writeln!(out, "expressiveness={:.4}", self.expressiveness);
        let _ = writeln!(out, "recall={:.4}", self.recall);
        if let Some(p) = self.precision {
            let _ = writeln!(out, "precision={:.4}", p.fraction());
            let _ = writeln!(out, "precision_states={}", p.states);
            let _ = writeln!(out, "precision_truncated={}", p.truncated);
        }
        for (name, d) in &self.timings {
            let _ = writeln!(out, "time_{name}_ms={}", d.as_millis());
        }
        out
    }

    pub fn curve_csv(&self) -> String {
        let mut out = String::from("train_size,recall\n");
        for (k, r) in &self.curve {
            let _ = writeln!(out, "{k},{r:.4}");
        }
        out
    }
}
