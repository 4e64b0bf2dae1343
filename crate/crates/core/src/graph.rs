//! The interaction graph: distinct queries as vertices, δ-sets as edges.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::ast::AstNode;
use crate::diff::{extract_deltas, Delta, DiffSet, Pruning};
use crate::error::GraphError;
use crate::grammar::GrammarAnnotations;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub window: usize,
    pub pruning: Pruning,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            window: 2,
            pruning: Pruning::Lca,
        }
    }
}

/// A labeled edge; `deltas` index into [`InteractionGraph::omega`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub deltas: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct InteractionGraph {
    /// Distinct queries in order of first appearance.
    pub vertices: Vec<Arc<AstNode>>,
    /// Vertex id of every log entry, in log order.
    pub sequence: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Every δ of every diffed pair.
    pub omega: Vec<Delta>,
    /// `(from, to)` vertex ids of the pair each δ in `omega` came from.
    pub endpoints: Vec<(usize, usize)>,
    pub pairs_diffed: usize,
}

impl InteractionGraph {
    pub fn build(log: &[AstNode], opts: BuildOptions, ann: &GrammarAnnotations) -> Result<Self, GraphError> {
        if log.is_empty() {
            return Err(GraphError::EmptyLog);
        }
        if opts.window == 0 {
            return Err(GraphError::ZeroWindow);
        }
        let mut ids: HashMap<&AstNode, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let sequence: Vec<usize> = log
            .iter()
            .map(|q| {
                *ids.entry(q).or_insert_with(|| {
                    vertices.push(Arc::new(q.clone()));
                    vertices.len() - 1
                })
            })
            .collect();

        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        for i in 0..sequence.len() {
            for j in i + 1..sequence.len().min(i + opts.window) {
                let (a, b) = (sequence[i], sequence[j]);
                if a != b && seen.insert((a.min(b), a.max(b))) {
                    pairs.push((a, b));
                }
            }
        }

        let diffs: Vec<DiffSet> = pairs
            .par_iter()
            .map(|&(a, b)| extract_deltas(&vertices[a], &vertices[b], opts.pruning, ann))
            .collect();

        let mut g = InteractionGraph {
            vertices,
            sequence,
            edges: Vec::new(),
            omega: Vec::new(),
            endpoints: Vec::new(),
            pairs_diffed: pairs.len(),
        };
        for (&(a, b), set) in pairs.iter().zip(diffs) {
            g.add_pair(a, b, set);
        }
        Ok(g)
    }

    fn add_pair(&mut self, a: usize, b: usize, set: DiffSet) {
        let base = self.omega.len();
        let leaves: Vec<usize> = set.leaf_flags.iter().enumerate().filter(|(_, l)| **l).map(|(i, _)| base + i).collect();
        self.edges.push(Edge { from: a, to: b, deltas: leaves.clone() });
        for (i, flag) in set.leaf_flags.iter().enumerate() {
            if !flag {
                let anc = &set.deltas[i].path;
                let mut deltas = vec![base + i];
                deltas.extend(leaves.iter().copied().filter(|&l| !anc.is_prefix_of(&set.deltas[l - base].path)));
                deltas.sort_unstable();
                self.edges.push(Edge { from: a, to: b, deltas });
            }
        }
        self.omega.extend(set.deltas);
        self.endpoints.extend(std::iter::repeat((a, b)).take(self.omega.len() - base));
    }

    pub fn initial_vertex(&self) -> usize {
        self.sequence[0]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Line-delimited dump: `V id sql` and `E from to path,path,...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "V\t{i}\t{}", crate::serialize::serialize(v));
        }
        for e in &self.edges {
            let paths: Vec<String> = e.deltas.iter().map(|&d| self.omega[d].path.to_string()).collect();
            let _ = writeln!(out, "E\t{}\t{}\t{}", e.from, e.to, paths.join(","));
        }
        out
    }
}
