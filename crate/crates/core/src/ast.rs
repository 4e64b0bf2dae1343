//! Ordered, attribute-carrying syntax trees and path addressing.
//!
//! Every query in a log is represented as an [`AstNode`]. Structural equality
//! is the derived `Eq`: node types, attribute maps (order-insensitive, since
//! they are `BTreeMap`s) and child lists must agree. The parser normalizes
//! keywords and function names, so formatting noise never reaches this level.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;
use crate::grammar::GrammarAnnotations;

/// The closed node-type taxonomy of the supported SQL subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    Select,
    Distinct,
    TopClause,
    Project,
    ProjClause,
    Star,
    From,
    TableRef,
    TableFunc,
    SubQuery,
    Where,
    Having,
    Cond,
    GroupBy,
    BiExpr,
    UnExpr,
    FuncExpr,
    FuncName,
    ColExpr,
    StrExpr,
    NumExpr,
    CaseExpr,
    WhenClause,
    ElseClause,
    CastExpr,
}

impl NodeType {
    pub const ALL: [NodeType; 25] = [
        NodeType::Select,
        NodeType::Distinct,
        NodeType::TopClause,
        NodeType::Project,
        NodeType::ProjClause,
        NodeType::Star,
        NodeType::From,
        NodeType::TableRef,
        NodeType::TableFunc,
        NodeType::SubQuery,
        NodeType::Where,
        NodeType::Having,
        NodeType::Cond,
        NodeType::GroupBy,
        NodeType::BiExpr,
        NodeType::UnExpr,
        NodeType::FuncExpr,
        NodeType::FuncName,
        NodeType::ColExpr,
        NodeType::StrExpr,
        NodeType::NumExpr,
        NodeType::CaseExpr,
        NodeType::WhenClause,
        NodeType::ElseClause,
        NodeType::CastExpr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeType::Select => "Select",
            NodeType::Distinct => "Distinct",
            NodeType::TopClause => "TopClause",
            NodeType::Project => "Project",
            NodeType::ProjClause => "ProjClause",
            NodeType::Star => "Star",
            NodeType::From => "From",
            NodeType::TableRef => "TableRef",
            NodeType::TableFunc => "TableFunc",
            NodeType::SubQuery => "SubQuery",
            NodeType::Where => "Where",
            NodeType::Having => "Having",
            NodeType::Cond => "Cond",
            NodeType::GroupBy => "GroupBy",
            NodeType::BiExpr => "BiExpr",
            NodeType::UnExpr => "UnExpr",
            NodeType::FuncExpr => "FuncExpr",
            NodeType::FuncName => "FuncName",
            NodeType::ColExpr => "ColExpr",
            NodeType::StrExpr => "StrExpr",
            NodeType::NumExpr => "NumExpr",
            NodeType::CaseExpr => "CaseExpr",
            NodeType::WhenClause => "WhenClause",
            NodeType::ElseClause => "ElseClause",
            NodeType::CastExpr => "CastExpr",
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NodeType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeType::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown node type `{s}`"))
    }
}

/// Value types of subtrees, ordered as the cast lattice `number ⊑ string ⊑ tree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Number,
    String,
    Tree,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Number => "number",
            ValueType::String => "string",
            ValueType::Tree => "tree",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A node of a query syntax tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AstNode {
    #[serde(rename = "type")]
    pub node_type: NodeType,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn new(node_type: NodeType) -> Self {
        AstNode {
            node_type,
            attrs: BTreeMap::new(),
            children: Vec::new(),
        }
    }

    pub fn with_attr(mut self, key: &str, value: impl Into<String>) -> Self {
        self.attrs.insert(key.to_string(), value.into());
        self
    }

    pub fn with_child(mut self, child: AstNode) -> Self {
        self.children.push(child);
        self
    }

    pub fn with_children(mut self, children: impl IntoIterator<Item = AstNode>) -> Self {
        self.children.extend(children);
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).map(String::as_str)
    }

    /// Shorthand constructors for the literal node types.
    pub fn num(lexeme: impl Into<String>) -> Self {
        AstNode::new(NodeType::NumExpr).with_attr("value", lexeme)
    }

    pub fn string(value: impl Into<String>) -> Self {
        AstNode::new(NodeType::StrExpr).with_attr("value", value)
    }

    pub fn column(name: impl Into<String>) -> Self {
        AstNode::new(NodeType::ColExpr).with_attr("name", name)
    }

    /// Whether the node's own label (type and attributes) equals `other`'s.
    pub fn same_label(&self, other: &AstNode) -> bool {
        self.node_type == other.node_type && self.attrs == other.attrs
    }

    /// Number of nodes in the subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(AstNode::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(AstNode::depth).max().unwrap_or(0)
    }

    /// Pre-order traversal yielding every node with its path.
    pub fn preorder(&self) -> Vec<(NodePath, &AstNode)> {
        fn walk<'a>(node: &'a AstNode, path: &mut Vec<usize>, out: &mut Vec<(NodePath, &'a AstNode)>) {
            out.push((NodePath(path.clone()), node));
            for (i, child) in node.children.iter().enumerate() {
                path.push(i);
                walk(child, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Numeric value of a `NumExpr`, accepting hex literals.
    pub fn numeric_value(&self) -> Option<f64> {
        if self.node_type != NodeType::NumExpr {
            return None;
        }
        parse_number(self.attr("value")?)
    }

    pub fn value_type(&self, ann: &GrammarAnnotations) -> ValueType {
        ann.primitive_kind(self.node_type).unwrap_or(ValueType::Tree)
    }

    pub fn node_at(&self, path: &NodePath) -> Result<&AstNode, TreeError> {
        let mut node = self;
        for &i in &path.0 {
            node = node
                .children
                .get(i)
                .ok_or_else(|| TreeError::Path { path: path.clone() })?;
        }
        Ok(node)
    }

    pub fn get(&self, path: &NodePath) -> Option<&AstNode> {
        self.node_at(path).ok()
    }

    fn node_at_mut(&mut self, path: &[usize]) -> Option<&mut AstNode> {
        let mut node = self;
        for &i in path {
            node = node.children.get_mut(i)?;
        }
        Some(node)
    }

    /// Replace, delete or append the subtree at `path`, returning a new tree.
    ///
    /// `Some(subtree)` replaces the node at `path`, or appends when the last
    /// index equals the parent's child count. `None` deletes the node. Appends
    /// and deletions require an insertable parent/child pair (see
    /// [`GrammarAnnotations::allows_insert_delete`]).
    pub fn replace_at(
        &self,
        path: &NodePath,
        subtree: Option<AstNode>,
        ann: &GrammarAnnotations,
    ) -> Result<AstNode, TreeError> {
        let Some((&idx, parent_path)) = path.0.split_last() else {
            return match subtree {
                Some(node) => Ok(node),
                None => Err(TreeError::Collection { path: path.clone() }),
            };
        };
        let mut out = self.clone();
        let parent = out
            .node_at_mut(parent_path)
            .ok_or_else(|| TreeError::Path { path: path.clone() })?;
        match subtree {
            Some(node) if idx < parent.children.len() => parent.children[idx] = node,
            Some(node) if idx == parent.children.len() => {
                if !ann.allows_insert_delete(parent.node_type, node.node_type) {
                    return Err(TreeError::Collection { path: path.clone() });
                }
                parent.children.push(node);
            }
            None if idx < parent.children.len() => {
                if !ann.allows_insert_delete(parent.node_type, parent.children[idx].node_type) {
                    return Err(TreeError::Collection { path: path.clone() });
                }
                parent.children.remove(idx);
            }
            _ => return Err(TreeError::Path { path: path.clone() }),
        }
        Ok(out)
    }

    /// Insert `subtree` so that it ends up at `path`, shifting later siblings.
    pub fn insert_at(
        &self,
        path: &NodePath,
        subtree: AstNode,
        ann: &GrammarAnnotations,
    ) -> Result<AstNode, TreeError> {
        let Some((&idx, parent_path)) = path.0.split_last() else {
            return Err(TreeError::Collection { path: path.clone() });
        };
        let mut out = self.clone();
        let parent = out
            .node_at_mut(parent_path)
            .ok_or_else(|| TreeError::Path { path: path.clone() })?;
        if idx > parent.children.len() {
            return Err(TreeError::Path { path: path.clone() });
        }
        if !ann.allows_insert_delete(parent.node_type, subtree.node_type) {
            return Err(TreeError::Collection { path: path.clone() });
        }
        parent.children.insert(idx, subtree);
        Ok(out)
    }
}

/// Parse a numeric literal lexeme (decimal, exponent or `0x` hex).
pub fn parse_number(lexeme: &str) -> Option<f64> {
    let (neg, body) = match lexeme.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, lexeme),
    };
    let value = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()? as f64
    } else {
        body.parse::<f64>().ok()?
    };
    Some(if neg { -value } else { value })
}

/// Address of a subtree: zero-based child indices from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, index: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(index);
        NodePath(v)
    }

    pub fn join(&self, rest: &NodePath) -> NodePath {
        let mut v = self.0.clone();
        v.extend_from_slice(&rest.0);
        NodePath(v)
    }

    pub fn parent(&self) -> Option<NodePath> {
        self.0.split_last().map(|(_, p)| NodePath(p.to_vec()))
    }

    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_proper_prefix_of(&self, other: &NodePath) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }

    /// The suffix of `self` below `prefix`, if `prefix` is a prefix.
    pub fn strip_prefix(&self, prefix: &NodePath) -> Option<NodePath> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| NodePath(rest.to_vec()))
    }

    /// All proper prefixes, root first.
    pub fn ancestors(&self) -> impl Iterator<Item = NodePath> + '_ {
        (0..self.0.len()).map(|n| NodePath(self.0[..n].to_vec()))
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_end_matches('/');
        if s.is_empty() {
            return Ok(NodePath::root());
        }
        s.split('/')
            .map(|part| part.parse::<usize>().map_err(|_| format!("bad path component `{part}`")))
            .collect::<Result<Vec<_>, _>>()
            .map(NodePath)
    }
}

impl Serialize for NodePath {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodePath {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<Vec<usize>> for NodePath {
    fn from(v: Vec<usize>) -> Self {
        NodePath(v)
    }
}
