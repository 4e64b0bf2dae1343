//! Mapping an interaction graph to a low-cost widget set that still reaches
//! every logged query from the initial one.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::ast::{AstNode, NodePath, NodeType};
use crate::graph::InteractionGraph;
use crate::grammar::GrammarAnnotations;
use crate::serialize::serialize;
use crate::widget::{element_type, DomainValue, Widget, WidgetLibrary};

/// A mined interface: widgets plus the query they start from.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceModel {
    pub widgets: Vec<Widget>,
    pub initial_query: Arc<AstNode>,
    /// Grid placement; `None` means the default two-column grid.
    pub layout: Option<crate::spec_io::Layout>,
}

impl InterfaceModel {
    pub fn total_cost(&self) -> f64 {
        self.widgets.iter().map(|w| w.cost).sum()
    }

    pub fn widget(&self, id: &str) -> Option<&Widget> {
        self.widgets.iter().enumerate().find(|(i, _)| widget_id(*i) == id).map(|(_, w)| w)
    }
}

pub fn widget_id(index: usize) -> String {
    format!("w{index}")
}

/// Mapping parameters. Only full coverage (`gamma = 1`) is supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions {
    pub gamma: f64,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions { gamma: 1.0 }
    }
}

impl MapOptions {
    pub fn validate(&self) -> Result<(), String> {
        if self.gamma == 1.0 {
            Ok(())
        } else {
            Err(format!("gamma = {} is not supported; only full coverage (gamma = 1) is implemented", self.gamma))
        }
    }
}

/// Per-run statistics of the merge loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergeTrace {
    pub initial_cost: f64,
    /// Total cost after each applied merge.
    pub costs: Vec<f64>,
    pub passes: usize,
}

pub struct Mapper<'a> {
    graph: &'a InteractionGraph,
    lib: &'a WidgetLibrary,
    ann: &'a GrammarAnnotations,
}

impl<'a> Mapper<'a> {
    pub fn new(graph: &'a InteractionGraph, lib: &'a WidgetLibrary, ann: &'a GrammarAnnotations) -> Self {
        Mapper { graph, lib, ann }
    }

    /// One widget per δ path.
    pub fn initialize(&self) -> Vec<Widget> {
        let mut parts: BTreeMap<&NodePath, Vec<usize>> = BTreeMap::new();
        for (id, d) in self.graph.omega.iter().enumerate() {
            parts.entry(&d.path).or_default().push(id);
        }
        parts
            .into_iter()
            .filter_map(|(path, ids)| self.make_widget(path.clone(), ids))
            .collect()
    }

    /// `pickWidget` over the τs of `init`; `None` for an empty set.
    pub fn make_widget(&self, path: NodePath, init: Vec<usize>) -> Option<Widget> {
        let domain = self.domain_of(&init);
        if domain.is_empty() {
            return None;
        }
        let (kind, cost) = self.lib.pick(&domain, self.ann)?;
        Some(Widget { kind, path, domain, init, cost, label: String::new() })
    }

    fn domain_of(&self, init: &[usize]) -> Vec<DomainValue> {
        let mut seen: HashSet<Option<&AstNode>> = HashSet::new();
        let mut out = Vec::new();
        for &id in init {
            let d = &self.graph.omega[id];
            for t in [&d.tau_old, &d.tau_new] {
                if seen.insert(t.as_deref()) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    /// Every vertex reachable from the initial vertex along expressed edges.
    pub fn covers(&self, widgets: &[Widget]) -> bool {
        reachable(self.graph, widgets).iter().all(|r| *r)
    }

    /// Initialize, then merge until a full pass yields no reduction.
    pub fn run(&self) -> (InterfaceModel, MergeTrace) {
        let mut widgets = self.initialize();
        let mut trace = MergeTrace { initial_cost: total(&widgets), ..MergeTrace::default() };
        loop {
            trace.passes += 1;
            let mut changed = false;
            let mut order: Vec<NodePath> = widgets.iter().map(|w| w.path.clone()).collect();
            order.sort_by(|a, b| b.depth().cmp(&a.depth()).then(a.cmp(b)));
            for anc in order {
                if let Some(next) = self.merge_at(&widgets, &anc) {
                    widgets = next;
                    trace.costs.push(total(&widgets));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let model = self.finish(widgets);
        (model, trace)
    }

    /// One merge of the widget at `anc` against all of its descendants.
    /// Returns the new widget set if the merge reduces cost and keeps
    /// coverage.
    pub fn merge_at(&self, widgets: &[Widget], anc: &NodePath) -> Option<Vec<Widget>> {
        let ai = widgets.iter().position(|w| &w.path == anc)?;
        let desc: Vec<usize> = (0..widgets.len()).filter(|&i| anc.is_proper_prefix_of(&widgets[i].path)).collect();
        if desc.is_empty() {
            return None;
        }
        let ends = &self.graph.endpoints;
        let touched = |ids: &[usize]| -> HashSet<usize> { ids.iter().flat_map(|&d| [ends[d].0, ends[d].1]).collect() };
        let va = touched(&widgets[ai].init);
        let vd: HashSet<usize> = desc.iter().flat_map(|&i| touched(&widgets[i].init)).collect();
        let v: HashSet<usize> = va.intersection(&vd).copied().collect();
        let inside = |d: &usize| v.contains(&ends[*d].0) && v.contains(&ends[*d].1);

        let shrink = |w: &Widget| -> Option<Widget> {
            let rest: Vec<usize> = w.init.iter().copied().filter(|d| !inside(d)).collect();
            if rest.len() == w.init.len() {
                return Some(w.clone());
            }
            self.make_widget(w.path.clone(), rest)
        };
        let cost_of = |w: &Option<Widget>| w.as_ref().map_or(0.0, |w| w.cost);

        let new_a = shrink(&widgets[ai]);
        let s_a = widgets[ai].cost - cost_of(&new_a);
        let new_d: Vec<(usize, Option<Widget>)> = desc.iter().map(|&i| (i, shrink(&widgets[i]))).collect();
        let s_d: f64 = new_d.iter().map(|(i, w)| widgets[*i].cost - cost_of(w)).sum();

        let from_ancestor = |ws: &[Widget]| -> Vec<Widget> {
            let mut out = ws.to_vec();
            match &new_a {
                Some(w) => out[ai] = w.clone(),
                None => {
                    out.remove(ai);
                }
            }
            out
        };
        let from_descendants = |ws: &[Widget]| -> Vec<Widget> {
            let mut out: Vec<Option<Widget>> = ws.iter().cloned().map(Some).collect();
            for (i, w) in &new_d {
                out[*i] = w.clone();
            }
            out.into_iter().flatten().collect()
        };

        // on a tie the side with the wider value type gives way; equal
        // types keep the descendants
        let ty = |w: &Widget| w.domain.iter().flatten().map(|n| element_type(n, self.ann)).max();
        let ty_a = ty(&widgets[ai]);
        let ty_d = desc.iter().filter_map(|&i| ty(&widgets[i])).max();
        let tied = (s_a - s_d).abs() <= 1e-9;
        let mut options = if s_a > s_d + 1e-9 || (tied && ty_a > ty_d) {
            vec![(s_a, true), (s_d, false)]
        } else {
            vec![(s_d, false), (s_a, true)]
        };
        options.retain(|(s, _)| *s > 1e-9);
        options.into_iter().find_map(|(_, ancestor_side)| {
            let next = if ancestor_side { from_ancestor(widgets) } else { from_descendants(widgets) };
            let ok = self.covers(&next);
            log::debug!("merge at {anc}: s_a={s_a:.2} s_d={s_d:.2} side={} covers={ok}", if ancestor_side { "ancestor" } else { "descendants" });
            ok.then_some(next)
        })
    }

    /// Canonical domain order, labels, and the initial query.
    fn finish(&self, mut widgets: Vec<Widget>) -> InterfaceModel {
        let q0 = self.graph.vertices[self.graph.initial_vertex()].clone();
        widgets.sort_by(|a, b| a.path.cmp(&b.path));
        for w in &mut widgets {
            sort_domain(w, &self.graph.vertices);
            w.label = label_for(w, &q0, &self.graph.vertices);
        }
        InterfaceModel { widgets, initial_query: q0, layout: None }
    }
}

/// Convenience wrapper: initialize and merge.
pub fn map_interface(graph: &InteractionGraph, lib: &WidgetLibrary, ann: &GrammarAnnotations) -> InterfaceModel {
    Mapper::new(graph, lib, ann).run().0
}

fn total(ws: &[Widget]) -> f64 {
    ws.iter().map(|w| w.cost).sum()
}

/// Reachability of each vertex from the initial vertex; edges are walked
/// forward when every δ's `τ2` is admitted and backward when every `τ1` is.
pub fn reachable(graph: &InteractionGraph, widgets: &[Widget]) -> Vec<bool> {
    let mut by_path: HashMap<&NodePath, Vec<&Widget>> = HashMap::new();
    for w in widgets {
        by_path.entry(&w.path).or_default().push(w);
    }
    let admitted = |path: &NodePath, v: Option<&AstNode>| by_path.get(path).is_some_and(|ws| ws.iter().any(|w| w.admits(v)));
    let fwd: Vec<bool> = graph.omega.iter().map(|d| admitted(&d.path, d.tau_new.as_deref())).collect();
    let bwd: Vec<bool> = graph.omega.iter().map(|d| admitted(&d.path, d.tau_old.as_deref())).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); graph.vertices.len()];
    for e in &graph.edges {
        if e.deltas.iter().all(|&d| fwd[d]) {
            adj[e.from].push(e.to);
        }
        if e.deltas.iter().all(|&d| bwd[d]) {
            adj[e.to].push(e.from);
        }
    }
    let mut seen = vec![false; graph.vertices.len()];
    let start = graph.initial_vertex();
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Order domain values by the first logged query holding them at the
/// widget's path, then by SQL text; sliders order numerically.
fn sort_domain(w: &mut Widget, vertices: &[Arc<AstNode>]) {
    let first_seen = |v: &DomainValue| -> usize {
        match v {
            Some(t) => vertices.iter().position(|q| q.get(&w.path) == Some(t.as_ref())).unwrap_or(usize::MAX),
            None => vertices.iter().position(|q| q.get(&w.path).is_none()).unwrap_or(usize::MAX),
        }
    };
    let mut keyed: Vec<((f64, usize, String), DomainValue)> = w
        .domain
        .drain(..)
        .map(|v| {
            let num = if w.kind == crate::widget::WidgetKind::Slider {
                v.as_deref().and_then(AstNode::numeric_value).unwrap_or(0.0)
            } else {
                0.0
            };
            let text = v.as_deref().map(serialize).unwrap_or_default();
            ((num, first_seen(&v), text), v)
        })
        .collect();
    keyed.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.cmp(&b.0 .1)).then(a.0 .2.cmp(&b.0 .2)));
    w.domain = keyed.into_iter().map(|(_, v)| v).collect();
}

/// Default label: innermost clause keyword plus the nearest column, table
/// or function name around the widget's path.
pub fn label_for(w: &Widget, q0: &AstNode, vertices: &[Arc<AstNode>]) -> String {
    if w.path.is_root() {
        return "Query".to_string();
    }
    let present: Vec<&AstNode> = w.domain.iter().flatten().map(Arc::as_ref).collect();
    let host = std::iter::once(q0)
        .chain(vertices.iter().map(Arc::as_ref))
        .find(|q| q.get(&w.path).is_some_and(|n| present.contains(&n)));
    let Some(host) = host else {
        return format!("Widget {}", w.path);
    };
    let mut chain = vec![host];
    for &i in &w.path.0 {
        let next = &chain[chain.len() - 1].children[i];
        chain.push(next);
    }
    let clause_at = chain.iter().rposition(|n| clause_keyword(n.node_type).is_some());
    let clause = clause_at.and_then(|i| clause_keyword(chain[i].node_type));
    let scope = &chain[clause_at.unwrap_or(0)..];
    let target = scope[scope.len() - 1];
    let name = scope
        .iter()
        .rev()
        .find(|n| n.node_type == NodeType::BiExpr && n.attr("op").is_some_and(is_comparison))
        .and_then(|n| first_name(n))
        .or_else(|| {
            // a name that varies across the domain describes a value, not the slot
            let names: HashSet<Option<String>> = present.iter().map(|n| first_name(n)).collect();
            match names.len() {
                1 => first_name(target),
                _ => Some(noun(target.node_type).to_string()),
            }
        })
        .or_else(|| scope.iter().rev().find_map(|n| first_name(n)));
    match (clause, name) {
        (Some(c), Some(n)) => format!("{c} {n}"),
        (Some(c), None) => c.to_string(),
        (None, Some(n)) => n,
        (None, None) => format!("Widget {}", w.path),
    }
}

fn clause_keyword(t: NodeType) -> Option<&'static str> {
    match t {
        NodeType::Project => Some("SELECT"),
        NodeType::From => Some("FROM"),
        NodeType::Where => Some("WHERE"),
        NodeType::GroupBy => Some("GROUP BY"),
        NodeType::Having => Some("HAVING"),
        NodeType::TopClause => Some("TOP"),
        NodeType::Distinct => Some("DISTINCT"),
        _ => None,
    }
}

fn noun(t: NodeType) -> &'static str {
    match t {
        NodeType::ColExpr => "column",
        NodeType::TableRef | NodeType::TableFunc => "table",
        NodeType::FuncName => "function",
        _ => "expression",
    }
}

fn is_comparison(op: &str) -> bool {
    matches!(op, "=" | "<>" | "!=" | "<" | ">" | "<=" | ">=" | "LIKE")
}

fn first_name(n: &AstNode) -> Option<String> {
    n.preorder().into_iter().find_map(|(_, x)| match x.node_type {
        NodeType::ColExpr | NodeType::TableRef | NodeType::FuncName | NodeType::TableFunc => x.attr("name").map(str::to_string),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::Pruning;
    use crate::graph::BuildOptions;
    use crate::parser::parse;
    use crate::widget::WidgetKind;

    fn mine(qs: &[&str], pruning: Pruning) -> InterfaceModel {
        let ann = GrammarAnnotations::default();
        let log: Vec<AstNode> = qs.iter().map(|q| parse(q, &ann).unwrap()).collect();
        let g = InteractionGraph::build(&log, BuildOptions { window: 2, pruning }, &ann).unwrap();
        map_interface(&g, &WidgetLibrary::default(), &ann)
    }

    #[test]
    fn single_vertex_gives_empty_interface() {
        let m = mine(&["SELECT a FROM t"], Pruning::Lca);
        assert!(m.widgets.is_empty());
        assert_eq!(m.total_cost(), 0.0);
    }

    #[test]
    fn numeric_leaf_maps_to_slider() {
        let m = mine(&["SELECT a FROM t WHERE b > 1", "SELECT a FROM t WHERE b > 5", "SELECT a FROM t WHERE b > 100"], Pruning::Lca);
        assert_eq!(m.widgets.len(), 1);
        assert_eq!(m.widgets[0].kind, WidgetKind::Slider);
        assert_eq!(m.widgets[0].label, "WHERE b");
        assert_eq!(m.widgets[0].range().map(|r| (r.min, r.max)), Some((1.0, 100.0)));
    }

    #[test]
    fn gamma_below_one_is_rejected() {
        assert!(MapOptions { gamma: 0.5 }.validate().is_err());
        assert!(MapOptions::default().validate().is_ok());
    }
}
