//! Ordered tree alignment and subtree deltas between query pairs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, NodePath, ValueType};
use crate::error::TreeError;
use crate::grammar::GrammarAnnotations;
use crate::serialize::serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pruning {
    #[default]
    Lca,
    None,
}

/// One subtree transformation. An absent `tau_old` is an insertion, an
/// absent `tau_new` a deletion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Delta {
    pub path: NodePath,
    pub tau_old: Option<Arc<AstNode>>,
    pub tau_new: Option<Arc<AstNode>>,
    pub value_type: ValueType,
}

impl Delta {
    pub fn new(path: NodePath, tau_old: Option<AstNode>, tau_new: Option<AstNode>, ann: &GrammarAnnotations) -> Self {
        assert!(tau_old.is_some() || tau_new.is_some(), "delta needs at least one subtree");
        let value_type = delta_value_type(tau_old.as_ref(), tau_new.as_ref(), ann);
        Delta {
            path,
            tau_old: tau_old.map(Arc::new),
            tau_new: tau_new.map(Arc::new),
            value_type,
        }
    }

    pub fn inverse(&self) -> Delta {
        Delta {
            path: self.path.clone(),
            tau_old: self.tau_new.clone(),
            tau_new: self.tau_old.clone(),
            value_type: self.value_type,
        }
    }

    pub fn is_insertion(&self) -> bool {
        self.tau_old.is_none()
    }

    pub fn is_deletion(&self) -> bool {
        self.tau_new.is_none()
    }

    /// `δ(q)`: checks `tau_old` against `q` and substitutes `tau_new`.
    pub fn apply(&self, q: &AstNode, ann: &GrammarAnnotations) -> Result<AstNode, TreeError> {
        match (&self.tau_old, &self.tau_new) {
            (Some(old), new) => {
                let cur = q.node_at(&self.path).map_err(|_| TreeError::Mismatch { path: self.path.clone() })?;
                if cur != old.as_ref() {
                    return Err(TreeError::Mismatch { path: self.path.clone() });
                }
                q.replace_at(&self.path, new.as_deref().cloned(), ann)
            }
            (None, Some(new)) => q.insert_at(&self.path, new.as_ref().clone(), ann),
            (None, None) => unreachable!("delta without subtrees"),
        }
    }
}

fn delta_value_type(a: Option<&AstNode>, b: Option<&AstNode>, ann: &GrammarAnnotations) -> ValueType {
    let kinds: Vec<Option<ValueType>> = [a, b]
        .into_iter()
        .flatten()
        .map(|n| ann.primitive_kind(n.node_type).filter(|_| n.children.is_empty()))
        .collect();
    match kinds.as_slice() {
        [Some(k)] => *k,
        [Some(k1), Some(k2)] if k1 == k2 => *k1,
        _ => ValueType::Tree,
    }
}

/// All δs for one ordered query pair, sorted by path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffSet {
    pub deltas: Vec<Delta>,
    pub leaf_flags: Vec<bool>,
}

impl DiffSet {
    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Delta> {
        self.deltas.iter().zip(&self.leaf_flags).filter(|(_, l)| **l).map(|(d, _)| d)
    }

    pub fn ancestors(&self) -> impl Iterator<Item = &Delta> {
        self.deltas.iter().zip(&self.leaf_flags).filter(|(_, l)| !**l).map(|(d, _)| d)
    }

    pub fn paths(&self) -> Vec<NodePath> {
        self.deltas.iter().map(|d| d.path.clone()).collect()
    }
}

/// Apply a set of leaf δs from one pair. Replacements and deletions run in
/// reverse path order, then insertions in ascending order.
pub fn apply_all<'a>(
    deltas: impl IntoIterator<Item = &'a Delta>,
    q: &AstNode,
    ann: &GrammarAnnotations,
) -> Result<AstNode, TreeError> {
    let (mut ins, mut rest): (Vec<&Delta>, Vec<&Delta>) = deltas.into_iter().partition(|d| d.is_insertion());
    rest.sort_by(|a, b| b.path.cmp(&a.path));
    ins.sort_by(|a, b| a.path.cmp(&b.path));
    let mut cur = q.clone();
    for d in rest.into_iter().chain(ins) {
        cur = d.apply(&cur, ann)?;
    }
    Ok(cur)
}

/// A top-down alignment of two trees whose roots carry the same label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// Matched node count in this subtree pair, roots included.
    pub matched: usize,
    shape: usize,
    /// Matched child index pairs and their own alignments.
    pub children: Vec<(usize, usize, Alignment)>,
}

impl Alignment {
    /// Flatten to matched `(from, to)` path pairs in pre-order.
    pub fn pairs(&self) -> Vec<(NodePath, NodePath)> {
        fn walk(al: &Alignment, a: &mut Vec<usize>, b: &mut Vec<usize>, out: &mut Vec<(NodePath, NodePath)>) {
            out.push((NodePath(a.clone()), NodePath(b.clone())));
            for (i, j, sub) in &al.children {
                a.push(*i);
                b.push(*j);
                walk(sub, a, b, out);
                a.pop();
                b.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut Vec::new(), &mut out);
        out
    }
}

/// Maximal top-down, order-preserving node mapping. `None` when the roots'
/// labels differ. Ties prefer type-compatible leftovers, then the leftmost
/// match.
pub fn align(t1: &AstNode, t2: &AstNode) -> Option<Alignment> {
    if !t1.same_label(t2) {
        return None;
    }
    let (m, n) = (t1.children.len(), t2.children.len());
    let sub: Vec<Vec<Option<Alignment>>> = t1
        .children
        .iter()
        .map(|c1| t2.children.iter().map(|c2| align(c1, c2)).collect())
        .collect();
    let pair_bonus = |i: usize, j: usize| usize::from(t1.children[i].node_type == t2.children[j].node_type);

    // dp[i][j]: best score for suffixes children[i..], children[j..]
    let mut dp = vec![vec![(0usize, 0usize); n + 1]; m + 1];
    for i in (0..m).rev() {
        for j in (0..n).rev() {
            let mut best = dp[i + 1][j].max(dp[i][j + 1]);
            let diag = dp[i + 1][j + 1];
            let step = match &sub[i][j] {
                Some(al) => (al.matched, al.shape),
                None => (0, pair_bonus(i, j)),
            };
            best = best.max((diag.0 + step.0, diag.1 + step.1));
            dp[i][j] = best;
        }
    }

    let mut children = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        let target = dp[i][j];
        let diag = dp[i + 1][j + 1];
        match &sub[i][j] {
            Some(al) if (diag.0 + al.matched, diag.1 + al.shape) == target => {
                children.push((i, j, al.clone()));
                i += 1;
                j += 1;
                continue;
            }
            None if (diag.0, diag.1 + pair_bonus(i, j)) == target => {
                i += 1;
                j += 1;
                continue;
            }
            _ => {}
        }
        if dp[i + 1][j] == target {
            i += 1;
        } else {
            j += 1;
        }
    }
    Some(Alignment {
        matched: 1 + dp[0][0].0,
        shape: dp[0][0].1,
        children,
    })
}

/// Leaf δs and ancestor δs between two queries.
pub fn extract_deltas(q_from: &AstNode, q_to: &AstNode, pruning: Pruning, ann: &GrammarAnnotations) -> DiffSet {
    let mut leaves = Vec::new();
    match align(q_from, q_to) {
        Some(al) => collect_leaves(q_from, q_to, &al, &mut Vec::new(), ann, &mut leaves),
        None => leaves.push(Delta::new(NodePath::root(), Some(q_from.clone()), Some(q_to.clone()), ann)),
    }
    if leaves.is_empty() {
        return DiffSet::default();
    }
    let leaf_paths: BTreeSet<NodePath> = leaves.iter().map(|d| d.path.clone()).collect();
    let ancestors = ancestor_paths(&leaf_paths, pruning);
    let mut all: Vec<(Delta, bool)> = leaves.into_iter().map(|d| (d, true)).collect();
    for a in ancestors {
        let old = q_from.node_at(&a).expect("ancestor of a delta resolves").clone();
        let new = q_to.node_at(&a).expect("ancestor of a delta resolves").clone();
        all.push((Delta::new(a, Some(old), Some(new), ann), false));
    }
    all.sort_by(|x, y| x.0.path.cmp(&y.0.path));
    let (deltas, leaf_flags) = all.into_iter().unzip();
    DiffSet { deltas, leaf_flags }
}

#[derive(Default)]
struct Gather {
    /// Paired replacements and nested δs, keyed by child index.
    local: Vec<(usize, Delta)>,
    /// Unpaired children: deletions (from-index) or insertions (to-index).
    excess: Vec<(usize, Delta)>,
    has_ins: bool,
    has_del: bool,
    ok: bool,
}

impl Gather {
    #[allow(clippy::too_many_arguments)]
    fn gap(&mut self, a: &AstNode, b: &AstNode, path: &[usize], i0: usize, i1: usize, j0: usize, j1: usize, ann: &GrammarAnnotations) {
        let at = |i: usize| {
            let mut p = path.to_vec();
            p.push(i);
            NodePath(p)
        };
        let k = (i1 - i0).min(j1 - j0);
        for t in 0..k {
            let (i, j) = (i0 + t, j0 + t);
            if i != j {
                self.ok = false;
                return;
            }
            self.local.push((i, Delta::new(at(i), Some(a.children[i].clone()), Some(b.children[j].clone()), ann)));
        }
        for i in i0 + k..i1 {
            let c = &a.children[i];
            self.has_del = true;
            self.ok &= ann.allows_insert_delete(a.node_type, c.node_type);
            self.excess.push((i, Delta::new(at(i), Some(c.clone()), None, ann)));
        }
        for j in j0 + k..j1 {
            let c = &b.children[j];
            self.has_ins = true;
            self.ok &= ann.allows_insert_delete(b.node_type, c.node_type);
            self.excess.push((j, Delta::new(at(j), None, Some(c.clone()), ann)));
        }
    }
}

/// Ancestor paths to emit alongside the leaf paths.
///
/// `Pruning::None` keeps, per distinct set of covered leaves, the deepest
/// ancestor covering exactly that set, plus the root. `Pruning::Lca` keeps
/// only ancestors whose covered leaves branch through at least two children.
pub fn ancestor_paths(leaf_paths: &BTreeSet<NodePath>, pruning: Pruning) -> BTreeSet<NodePath> {
    let covered = |a: &NodePath| -> Vec<&NodePath> { leaf_paths.iter().filter(|p| a.is_proper_prefix_of(p)).collect() };
    let mut candidates = BTreeSet::new();
    for p in leaf_paths {
        for a in p.ancestors() {
            if !leaf_paths.contains(&a) {
                candidates.insert(a);
            }
        }
    }
    candidates
        .iter()
        .filter(|a| match pruning {
            Pruning::Lca => {
                let branches: BTreeSet<usize> = covered(a).iter().map(|p| p.0[a.depth()]).collect();
                branches.len() >= 2
            }
            Pruning::None => {
                let mine = covered(a);
                a.is_root()
                    || !candidates
                        .iter()
                        .any(|b| a.is_proper_prefix_of(b) && covered(b) == mine)
            }
        })
        .cloned()
        .collect()
}

fn collect_leaves(
    a: &AstNode,
    b: &AstNode,
    al: &Alignment,
    path: &mut Vec<usize>,
    ann: &GrammarAnnotations,
    out: &mut Vec<Delta>,
) {
    let mut g = Gather { ok: true, ..Gather::default() };
    let (mut pi, mut pj) = (0, 0);
    for (i, j, sub) in &al.children {
        g.gap(a, b, path, pi, *i, pj, *j, ann);
        let mut nested = Vec::new();
        path.push(*i);
        collect_leaves(&a.children[*i], &b.children[*j], sub, path, ann, &mut nested);
        path.pop();
        if !nested.is_empty() && i != j {
            g.ok = false;
        }
        g.local.extend(nested.into_iter().map(|d| (*i, d)));
        pi = i + 1;
        pj = j + 1;
    }
    g.gap(a, b, path, pi, a.children.len(), pj, b.children.len(), ann);
    if g.has_ins && g.has_del {
        g.ok = false;
    }
    if let Some(shift) = g.excess.iter().map(|(i, _)| *i).min() {
        g.ok &= g.local.iter().all(|(i, _)| *i < shift);
    }
    if g.ok {
        out.extend(g.local.into_iter().map(|(_, d)| d));
        out.extend(g.excess.into_iter().map(|(_, d)| d));
    } else {
        out.push(Delta::new(NodePath(path.clone()), Some(a.clone()), Some(b.clone()), ann));
    }
}

/// The diffs table for a pair as TSV: `q1 q2 π τ1 τ2 type`.
pub fn diffs_tsv(q1: usize, q2: usize, set: &DiffSet) -> String {
    let mut out = String::new();
    for d in &set.deltas {
        let show = |t: &Option<Arc<AstNode>>| t.as_deref().map(serialize).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{q1}\t{q2}\t{}\t{}\t{}\t{}", d.path, show(&d.tau_old), show(&d.tau_new), d.value_type);
    }
    out
}
