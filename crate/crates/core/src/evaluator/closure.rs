//! Closure membership and budgeted closure enumeration.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use crate::ast::{AstNode, NodePath};
use crate::diff::{extract_deltas, Pruning};
use crate::grammar::GrammarAnnotations;
use crate::mapper::InterfaceModel;
use crate::widget::{Widget, WidgetKind};

pub const DEFAULT_SEARCH_BUDGET: usize = 20_000;
pub const DEFAULT_ENUM_BUDGET: usize = 100_000;

/// What the widget would have to show for its slot to match `target`.
fn wanted(w: &Widget, target: &AstNode) -> Option<Option<AstNode>> {
    match target.get(&w.path) {
        Some(n) if w.slot_types().contains(&n.node_type) => Some(Some(n.clone())),
        _ if w.allows_absent() => Some(None),
        _ => None,
    }
}

/// Leaf difference paths between a state and the target.
fn differences(s: &AstNode, target: &AstNode, ann: &GrammarAnnotations) -> Vec<NodePath> {
    extract_deltas(s, target, Pruning::Lca, ann).leaves().map(|d| d.path.clone()).collect()
}

/// A widget can only help if it edits a subtree containing a difference, a
/// node inside one, or a later sibling shifted by one.
fn relevant(w: &Widget, diffs: &[NodePath]) -> bool {
    diffs.iter().any(|d| {
        w.path.is_prefix_of(d)
            || d.is_prefix_of(&w.path)
            || (w.path.parent() == d.parent() && w.path.0.last() >= d.0.last())
    })
}

/// Set every widget straight to the target's value at its path until nothing
/// changes. Succeeds when the target's differences decompose over the
/// widgets.
fn direct(model: &InterfaceModel, target: &AstNode, ann: &GrammarAnnotations) -> bool {
    let mut s = model.initial_query.as_ref().clone();
    for _ in 0..=model.widgets.len() {
        if s == *target {
            return true;
        }
        let mut changed = false;
        for w in &model.widgets {
            if let Some(v) = wanted(w, target) {
                if let Some(next) = w.apply(&s, v.as_ref(), ann) {
                    s = next;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    s == *target
}

/// A difference no widget can ever fill: every widget that touches it sits
/// exactly at its path and rejects the target's subtree there.
fn blocked(model: &InterfaceModel, d: &NodePath, target: &AstNode) -> bool {
    let Some(want) = target.get(d) else { return false };
    let touching: Vec<&Widget> = model.widgets.iter().filter(|w| relevant(w, std::slice::from_ref(d))).collect();
    touching.iter().all(|w| w.path == *d && w.slot_types().contains(&want.node_type) && !w.admits(Some(want)))
}

/// Whether `target` is reachable from the initial query by widget
/// interactions.
///
/// The direct decomposition is tried first; guarded widgets (a slider inside
/// an optional clause) may need an enabling move first, so a best-first
/// search over widget moves follows, bounded by `budget` expanded states.
pub fn in_closure(model: &InterfaceModel, target: &AstNode, ann: &GrammarAnnotations, budget: usize) -> bool {
    if *model.initial_query == *target || direct(model, target, ann) {
        return true;
    }
    let start = model.initial_query.as_ref().clone();
    let first = differences(&start, target, ann);
    if first.iter().any(|d| blocked(model, d, target)) {
        return false;
    }
    let mut seen: HashSet<AstNode> = HashSet::from([start.clone()]);
    let mut heap = BinaryHeap::from([Reverse((first.len(), 0usize, start, first))]);
    let mut tick = 0usize;
    let mut expanded = 0usize;
    while let Some(Reverse((_, _, s, diffs))) = heap.pop() {
        expanded += 1;
        if expanded > budget {
            return false;
        }
        for w in &model.widgets {
            if !relevant(w, &diffs) || !w.is_active(&s) {
                continue;
            }
            let mut values: Vec<Option<AstNode>> = w.domain.iter().map(|d| d.as_deref().cloned()).collect();
            if let Some(v) = wanted(w, target) {
                values.push(v);
            }
            for v in values {
                let Some(next) = w.apply(&s, v.as_ref(), ann) else { continue };
                if next == *target {
                    return true;
                }
                if seen.insert(next.clone()) {
                    tick += 1;
                    let d = differences(&next, target, ann);
                    heap.push(Reverse((d.len(), tick, next, d)));
                }
            }
        }
    }
    false
}

/// Fraction of `queries` inside the closure.
pub fn expressiveness(model: &InterfaceModel, queries: &[AstNode], ann: &GrammarAnnotations, budget: usize) -> f64 {
    use rayon::prelude::*;
    if queries.is_empty() {
        return 1.0;
    }
    let hits = queries.par_iter().filter(|q| in_closure(model, q, ann, budget)).count();
    hits as f64 / queries.len() as f64
}

/// A finite slice of the closure.
#[derive(Debug, Clone, Default)]
pub struct Closure {
    pub states: Vec<AstNode>,
    /// Set when the budget stopped the enumeration early.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    pub budget: usize,
    /// Sliders with at most this many grid positions are probed at every
    /// position; wider ones at their domain values and both ends.
    pub slider_grid: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { budget: DEFAULT_ENUM_BUDGET, slider_grid: 64 }
    }
}

/// The finite value set a widget is probed with during enumeration.
pub fn probe_values(w: &Widget, opts: &EnumOptions) -> Vec<Option<AstNode>> {
    let mut out: Vec<Option<AstNode>> = w.domain.iter().map(|d| d.as_deref().cloned()).collect();
    if w.kind == WidgetKind::Slider {
        if let Some(r) = w.range() {
            let positions = ((r.max - r.min) / r.step).round() as usize + 1;
            let xs: Vec<f64> = if positions <= opts.slider_grid {
                (0..positions).map(|i| r.min + i as f64 * r.step).collect()
            } else {
                vec![r.min, r.max]
            };
            for x in xs {
                let lit = Some(r.literal(x));
                if !out.contains(&lit) {
                    out.push(lit);
                }
            }
        }
    }
    out
}

/// Breadth-first enumeration of the states reachable from the initial query,
/// visiting at most `opts.budget` states. `keep` prunes states (and their
/// successors) from the walk.
pub fn enumerate_closure_with(
    model: &InterfaceModel,
    ann: &GrammarAnnotations,
    opts: &EnumOptions,
    keep: impl Fn(&AstNode) -> bool,
) -> Closure {
    let probes: Vec<Vec<Option<AstNode>>> = model.widgets.iter().map(|w| probe_values(w, opts)).collect();
    let start = model.initial_query.as_ref().clone();
    let mut out = Closure::default();
    if !keep(&start) {
        return out;
    }
    let mut index: HashMap<AstNode, ()> = HashMap::from([(start.clone(), ())]);
    let mut queue = VecDeque::from([start.clone()]);
    out.states.push(start);
    while let Some(s) = queue.pop_front() {
        for (w, values) in model.widgets.iter().zip(&probes) {
            for v in values {
                let Some(next) = w.apply(&s, v.as_ref(), ann) else { continue };
                if index.contains_key(&next) || !keep(&next) {
                    continue;
                }
                if out.states.len() >= opts.budget {
                    out.truncated = true;
                    return out;
                }
                index.insert(next.clone(), ());
                out.states.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    out
}

pub fn enumerate_closure(model: &InterfaceModel, ann: &GrammarAnnotations, opts: &EnumOptions) -> Closure {
    enumerate_closure_with(model, ann, opts, |_| true)
}
