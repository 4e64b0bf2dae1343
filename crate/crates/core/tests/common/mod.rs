//! Fixtures and independent oracles shared by the integration tests and the
//! acceptance binary.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use interface_miner::ast::{AstNode, NodePath};
use interface_miner::diff::Pruning;
use interface_miner::graph::{BuildOptions, InteractionGraph};
use interface_miner::grammar::GrammarAnnotations;
use interface_miner::mapper::InterfaceModel;
use interface_miner::parser::parse;
use interface_miner::widget::{DomainValue, Widget, WidgetKind, WidgetLibrary};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ann() -> GrammarAnnotations {
    GrammarAnnotations::default()
}

pub fn parse_all<S: AsRef<str>>(qs: &[S]) -> Vec<AstNode> {
    let ann = ann();
    qs.iter().map(|q| parse(q.as_ref(), &ann).unwrap_or_else(|e| panic!("{}: {e}", q.as_ref()))).collect()
}

pub fn paths(model: &InterfaceModel) -> Vec<String> {
    model.widgets.iter().map(|w| w.path.to_string()).collect()
}

// ---------------------------------------------------------------------------
// worked logs

pub const SALES_Q1: &str = "SELECT day, sales FROM sf WHERE cty = 'USA'";
pub const SALES_Q2: &str = "SELECT day, costs FROM sf WHERE cty = 'EUR'";

pub fn threshold_query(n: u32, customer: &str) -> String {
    format!(
        "SELECT spec_ts, sum(price) FROM (SELECT action, sum(customer) FROM t \
         WHERE spec_ts > now and spec_ts < now + {n}) \
         WHERE cust = '{customer}' and country = 'China' GROUP BY spec_ts"
    )
}

pub const THRESHOLD_RUNS: [(u32, &str); 5] = [(3, "Alice"), (5, "Alice"), (5, "Bob"), (9, "Carol"), (7, "Bob")];

pub fn threshold_log() -> Vec<String> {
    THRESHOLD_RUNS.iter().map(|(n, c)| threshold_query(*n, c)).collect()
}

pub const AGGREGATE_LOG: [&str; 3] = ["SELECT avg(a)", "SELECT count(b)", "SELECT count(c)"];

pub const FUNCTION_LOG: [&str; 13] = [
    "SELECT avg(a)",
    "SELECT count(b)",
    "SELECT count(c)",
    "SELECT avg(b)",
    "SELECT count(a)",
    "SELECT avg(c)",
    "SELECT avg(d)",
    "SELECT avg(e)",
    "SELECT count(d)",
    "SELECT count(e)",
    "SELECT count(b)",
    "SELECT count(c)",
    "SELECT avg(a)",
];

const NEARBY: &str = "g.objID FROM Galaxy as g, dbo.fGetNearbyObjEq(5.848,0.352,2.0616) as d WHERE d.objID = g.objID";

pub fn top_log() -> Vec<String> {
    vec![format!("SELECT {NEARBY}"), format!("SELECT TOP 1 {NEARBY}"), format!("SELECT TOP 10 {NEARBY}")]
}

pub const SUBQUERY_LOG: [&str; 4] = [
    "SELECT * FROM T",
    "SELECT * FROM (SELECT a FROM T WHERE b > 10)",
    "SELECT * FROM (SELECT a FROM T WHERE b > 20)",
    "SELECT * FROM (SELECT b FROM T WHERE b > 20)",
];

// ---------------------------------------------------------------------------
// cross-product closure oracle

/// Every query reachable by setting each widget independently, for
/// interfaces whose widget paths are pairwise disjoint. Sliders contribute
/// every integer in their range.
pub fn cross_product(model: &InterfaceModel) -> BTreeSet<String> {
    let ann = ann();
    for (i, a) in model.widgets.iter().enumerate() {
        for b in &model.widgets[i + 1..] {
            assert!(!a.path.is_prefix_of(&b.path) && !b.path.is_prefix_of(&a.path), "nested widgets");
        }
    }
    let choices: Vec<Vec<AstNode>> = model
        .widgets
        .iter()
        .map(|w| match w.kind {
            WidgetKind::Slider => {
                let r = w.range().expect("slider range");
                (r.min as i64..=r.max as i64).map(|v| AstNode::num(v.to_string())).collect()
            }
            _ => w.domain.iter().map(|v| v.as_deref().expect("present value").clone()).collect(),
        })
        .collect();
    let mut states = vec![model.initial_query.as_ref().clone()];
    for (w, values) in model.widgets.iter().zip(&choices) {
        states = states
            .iter()
            .flat_map(|q| values.iter().map(|v| q.replace_at(&w.path, Some(v.clone()), &ann).expect("slot exists")))
            .collect();
    }
    states.iter().map(interface_miner::serialize::serialize).collect()
}

// ---------------------------------------------------------------------------
// toy logs and the exhaustive mapping oracle

const TOY_COLUMNS: [&str; 4] = ["a", "b", "c", "d"];
const TOY_TABLES: [&str; 4] = ["T", "U", "V", "W"];
const TOY_NUMBERS: [&str; 4] = ["1", "2", "5", "9"];
const TOY_STRINGS: [&str; 4] = ["USA", "EUR", "CHN", "JPN"];

fn toy_sql(slots: &[usize; 4]) -> String {
    format!(
        "SELECT {} FROM {} WHERE x > {} AND name = '{}'",
        TOY_COLUMNS[slots[0]], TOY_TABLES[slots[1]], TOY_NUMBERS[slots[2]], TOY_STRINGS[slots[3]]
    )
}

/// A short random walk over 1 to 3 slots of the toy template.
fn toy_walk(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut slots: Vec<usize> = (0..4).collect();
    slots.shuffle(rng);
    slots.truncate(rng.gen_range(1..=3));
    let pools: Vec<Vec<usize>> = (0..4)
        .map(|_| {
            let mut p: Vec<usize> = (0..4).collect();
            p.shuffle(rng);
            p.truncate(rng.gen_range(2..=4));
            p
        })
        .collect();
    let mut state = [pools[0][0], pools[1][0], pools[2][0], pools[3][0]];
    let mut log = vec![toy_sql(&state)];
    for _ in 0..rng.gen_range(2..=9) {
        let k = if slots.len() > 1 && rng.gen_bool(0.2) { 2 } else { 1 };
        let mut moved: Vec<usize> = slots.clone();
        moved.shuffle(rng);
        for &s in &moved[..k] {
            let options: Vec<usize> = pools[s].iter().copied().filter(|v| *v != state[s]).collect();
            state[s] = *options.choose(rng).expect("pools have two values");
        }
        log.push(toy_sql(&state));
    }
    log
}

/// A toy log and its graph with at most 3 δ paths and 4 values per path.
pub fn toy_graph(seed: u64) -> (Vec<String>, InteractionGraph) {
    let ann = ann();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let log = toy_walk(&mut rng);
        let g = InteractionGraph::build(&parse_all(&log), BuildOptions { window: 2, pruning: Pruning::Lca }, &ann).expect("non-empty log");
        let mut values: BTreeMap<&NodePath, BTreeSet<Option<&AstNode>>> = BTreeMap::new();
        for d in &g.omega {
            let e = values.entry(&d.path).or_default();
            e.insert(d.tau_old.as_deref());
            e.insert(d.tau_new.as_deref());
        }
        if !values.is_empty() && values.len() <= 3 && values.values().all(|v| v.len() <= 4) {
            return (log, g);
        }
    }
}

/// Minimum interface cost over every assignment of δs to one widget per
/// path and every widget type accepting the resulting domain, subject to
/// every vertex being reachable from the initial one.
pub fn brute_force_cost(g: &InteractionGraph, lib: &WidgetLibrary) -> f64 {
    let ann = ann();
    let mut by_path: BTreeMap<NodePath, Vec<usize>> = BTreeMap::new();
    for (i, d) in g.omega.iter().enumerate() {
        by_path.entry(d.path.clone()).or_default().push(i);
    }

    // per path: value index of each δ's τ1 and τ2, and min cost per admitted set
    let mut slot: Vec<(Vec<(usize, usize)>, Vec<(u32, f64)>)> = Vec::new();
    let mut delta_slot: HashMap<usize, (usize, usize)> = HashMap::new();
    for (p, (path, ids)) in by_path.iter().enumerate() {
        let mut values: Vec<DomainValue> = Vec::new();
        let mut index = |v: &DomainValue| match values.iter().position(|x| x == v) {
            Some(i) => i,
            None => {
                values.push(v.clone());
                values.len() - 1
            }
        };
        let idx: Vec<(usize, usize)> = ids.iter().map(|&d| (index(&g.omega[d].tau_old), index(&g.omega[d].tau_new))).collect();
        for (k, &d) in ids.iter().enumerate() {
            delta_slot.insert(d, (p, k));
        }
        let pairs: BTreeSet<(usize, usize)> = idx.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        let mut best: HashMap<u32, f64> = HashMap::from([(0, 0.0)]);
        for mask in 1u32..(1 << pairs.len()) {
            let mut chosen: BTreeSet<usize> = BTreeSet::new();
            for (b, &(x, y)) in pairs.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    chosen.insert(x);
                    chosen.insert(y);
                }
            }
            let domain: Vec<DomainValue> = chosen.iter().map(|&i| values[i].clone()).collect();
            for t in lib.types.iter().filter(|t| t.accepts(&domain, &ann)) {
                let w = Widget {
                    kind: t.name,
                    path: path.clone(),
                    domain: domain.clone(),
                    init: Vec::new(),
                    cost: t.cost(domain.len()),
                    label: String::new(),
                };
                let sig = (0..values.len()).filter(|&i| w.admits(values[i].as_deref())).fold(0u32, |s, i| s | (1 << i));
                let e = best.entry(sig).or_insert(f64::INFINITY);
                *e = e.min(w.cost);
            }
        }
        slot.push((idx, best.into_iter().collect()));
    }

    let mut best = f64::INFINITY;
    let mut pick = vec![0usize; slot.len()];
    loop {
        let cost: f64 = pick.iter().enumerate().map(|(p, &k)| slot[p].1[k].1).sum();
        if cost < best && toy_covers(g, &slot, &delta_slot, &pick) {
            best = cost;
        }
        // odometer
        let mut p = 0;
        while p < pick.len() {
            pick[p] += 1;
            if pick[p] < slot[p].1.len() {
                break;
            }
            pick[p] = 0;
            p += 1;
        }
        if p == pick.len() {
            return best;
        }
    }
}

type Slots = [(Vec<(usize, usize)>, Vec<(u32, f64)>)];

fn toy_covers(g: &InteractionGraph, slot: &Slots, delta_slot: &HashMap<usize, (usize, usize)>, pick: &[usize]) -> bool {
    let admitted = |d: usize, new: bool| {
        let (p, k) = delta_slot[&d];
        let (a, b) = slot[p].0[k];
        let sig = slot[p].1[pick[p]].0;
        sig & (1 << if new { b } else { a }) != 0
    };
    let n = g.vertices.len();
    let mut adj = vec![Vec::new(); n];
    for e in &g.edges {
        if e.deltas.iter().all(|&d| admitted(d, true)) {
            adj[e.from].push(e.to);
        }
        if e.deltas.iter().all(|&d| admitted(d, false)) {
            adj[e.to].push(e.from);
        }
    }
    let mut seen = vec![false; n];
    let start = g.sequence[0];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !std::mem::replace(&mut seen[v], true) {
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Minimum interface cost over every assignment of each diffed pair to one
/// of its labeled edges (the leaf edge or an ancestor edge). Each path's
/// widget gets the τs of the δs assigned to it and the cheapest accepting
/// type.
pub fn assignment_optimum(g: &InteractionGraph, lib: &WidgetLibrary) -> f64 {
    let ann = ann();
    let mut pairs: Vec<Vec<&[usize]>> = Vec::new();
    let mut last = None;
    for e in &g.edges {
        if last != Some((e.from, e.to)) {
            pairs.push(Vec::new());
            last = Some((e.from, e.to));
        }
        pairs.last_mut().expect("pushed above").push(&e.deltas);
    }
    let mut best = f64::INFINITY;
    let mut pick = vec![0usize; pairs.len()];
    loop {
        let mut domains: BTreeMap<&NodePath, Vec<DomainValue>> = BTreeMap::new();
        for (p, &k) in pick.iter().enumerate() {
            for &d in pairs[p][k] {
                let delta = &g.omega[d];
                let dom = domains.entry(&delta.path).or_default();
                for t in [&delta.tau_old, &delta.tau_new] {
                    if !dom.contains(t) {
                        dom.push(t.clone());
                    }
                }
            }
        }
        let cost: Option<f64> = domains.values().map(|d| lib.pick(d, &ann).map(|(_, c)| c)).sum();
        if let Some(c) = cost {
            best = best.min(c);
        }
        let mut p = 0;
        while p < pick.len() {
            pick[p] += 1;
            if pick[p] < pairs[p].len() {
                break;
            }
            pick[p] = 0;
            p += 1;
        }
        if p == pick.len() {
            return if g.edges.is_empty() { 0.0 } else { best };
        }
    }
}

// ---------------------------------------------------------------------------
// multi-client schema corpus

/// Client `k` works on two tables sharing one column; a second column
/// exists only in the first table.
pub struct Client {
    pub tables: [String; 2],
    pub shared: String,
    pub only_first: String,
}

impl Client {
    pub fn new(k: usize) -> Self {
        let (a, b) = if k == 0 {
            ("SpecLineIndex".to_string(), "XCRedshift".to_string())
        } else {
            (format!("SpecLineIndex{k}"), format!("XCRedshift{k}"))
        };
        Client { tables: [a, b], shared: format!("specobjid{k}"), only_first: format!("ew{k}") }
    }

    fn valid(&self, table: usize, column: usize) -> bool {
        !(table == 1 && column == 1)
    }

    fn sql(&self, table: usize, column: usize, n: u32) -> String {
        let col = if column == 0 { &self.shared } else { &self.only_first };
        format!("SELECT * FROM {} WHERE {col} = {n}", self.tables[table])
    }

    /// A walk over valid (table, column, value) states that visits all
    /// three valid table/column combinations.
    pub fn log(&self, len: usize, seed: u64) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![self.sql(0, 0, 1), self.sql(0, 1, 1), self.sql(0, 0, 1), self.sql(1, 0, 1)];
        let (mut t, mut c, mut n) = (1usize, 0usize, 1u32);
        while out.len() < len {
            match rng.gen_range(0..3) {
                0 if self.valid(1 - t, c) => t = 1 - t,
                1 if self.valid(t, 1 - c) => c = 1 - c,
                2 => n = if n == 3 { 1 } else { n + 1 },
                _ => continue,
            }
            out.push(self.sql(t, c, n));
        }
        out
    }
}

/// Concatenated logs of `m` clients.
pub fn mixed_log(m: usize, per_client: usize) -> Vec<String> {
    (0..m).flat_map(|k| Client::new(k).log(per_client, k as u64)).collect()
}

pub fn arc(q: &str) -> Arc<AstNode> {
    Arc::new(parse(q, &ann()).expect("fixture parses"))
}
