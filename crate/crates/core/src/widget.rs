//! Widget types, their acceptance rules and cost polynomials, and
//! instantiated widgets.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, NodePath, NodeType, ValueType};
use crate::diff::Delta;
use crate::error::ConfigError;
use crate::grammar::GrammarAnnotations;

pub const WIDGET_CONFIG_VERSION: u64 = 1;

const DEFAULT_CONFIG: &str = include_str!("../config/widgets.json");

/// A domain element; `None` is the absent subtree.
pub type DomainValue = Option<Arc<AstNode>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetKind {
    Textbox,
    ToggleButton,
    SingleCheckbox,
    RadioButtons,
    Dropdown,
    Slider,
    RangeSlider,
    CheckboxList,
    DragAndDrop,
}

impl WidgetKind {
    pub const ALL: [WidgetKind; 9] = [
        WidgetKind::Textbox,
        WidgetKind::ToggleButton,
        WidgetKind::SingleCheckbox,
        WidgetKind::RadioButtons,
        WidgetKind::Dropdown,
        WidgetKind::Slider,
        WidgetKind::RangeSlider,
        WidgetKind::CheckboxList,
        WidgetKind::DragAndDrop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WidgetKind::Textbox => "textbox",
            WidgetKind::ToggleButton => "toggle_button",
            WidgetKind::SingleCheckbox => "single_checkbox",
            WidgetKind::RadioButtons => "radio_buttons",
            WidgetKind::Dropdown => "dropdown",
            WidgetKind::Slider => "slider",
            WidgetKind::RangeSlider => "range_slider",
            WidgetKind::CheckboxList => "checkbox_list",
            WidgetKind::DragAndDrop => "drag_and_drop",
        }
    }

    /// Whether the widget's value set is exactly its listed domain.
    pub fn is_enumerated(self) -> bool {
        matches!(
            self,
            WidgetKind::ToggleButton | WidgetKind::SingleCheckbox | WidgetKind::RadioButtons | WidgetKind::Dropdown
        )
    }
}

impl fmt::Display for WidgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WidgetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        WidgetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown widget type `{s}`"))
    }
}

/// Structural constraint beyond the value-type rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Any,
    /// Trees identical except for exactly two numeric literals.
    NumericPair,
    /// Instances of one collection node type.
    Collection,
    /// Reorderings of one collection.
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidgetType {
    pub name: WidgetKind,
    /// Every element's value type must cast into this.
    pub ceiling: ValueType,
    /// The join of the elements' value types must reach this.
    #[serde(default)]
    pub floor: Option<ValueType>,
    pub allows_absent: bool,
    #[serde(default)]
    pub requires_absent: bool,
    #[serde(default)]
    pub max_domain: Option<usize>,
    #[serde(default)]
    pub shape: Shape,
    /// `(a0, a1, a2)` of `a0 + a1·n + a2·n²`.
    pub cost: [f64; 3],
}

impl WidgetType {
    pub fn cost(&self, n: usize) -> f64 {
        let n = n as f64;
        self.cost[0] + self.cost[1] * n + self.cost[2] * n * n
    }

    pub fn accepts(&self, domain: &[DomainValue], ann: &GrammarAnnotations) -> bool {
        if domain.is_empty() {
            return false;
        }
        let has_absent = domain.iter().any(Option::is_none);
        if (has_absent && !self.allows_absent) || (self.requires_absent && !has_absent) {
            return false;
        }
        if self.max_domain.is_some_and(|m| domain.len() > m) {
            return false;
        }
        let types: Vec<ValueType> = domain.iter().flatten().map(|n| element_type(n, ann)).collect();
        if types.iter().any(|t| *t > self.ceiling) {
            return false;
        }
        if let Some(floor) = self.floor {
            if types.iter().copied().max().is_none_or(|j| j < floor) {
                return false;
            }
        }
        let present: Vec<&AstNode> = domain.iter().flatten().map(Arc::as_ref).collect();
        match self.shape {
            Shape::Any => true,
            Shape::NumericPair => numeric_pair(&present).is_some(),
            Shape::Collection => collection_universe(&present, ann).is_some(),
            Shape::Permutation => is_permutation_family(&present, ann),
        }
    }
}

/// Value type of a single domain element.
pub fn element_type(n: &AstNode, ann: &GrammarAnnotations) -> ValueType {
    match ann.primitive_kind(n.node_type) {
        Some(k) if n.children.is_empty() => k,
        _ => ValueType::Tree,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidgetLibrary {
    pub version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub types: Vec<WidgetType>,
}

impl Default for WidgetLibrary {
    fn default() -> Self {
        WidgetLibrary::from_json(DEFAULT_CONFIG).expect("bundled widget config is valid")
    }
}

impl WidgetLibrary {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let lib: WidgetLibrary = serde_json::from_str(text)?;
        if lib.version != WIDGET_CONFIG_VERSION {
            return Err(ConfigError::Version(lib.version));
        }
        let mut seen = BTreeSet::new();
        for t in &lib.types {
            if !seen.insert(t.name) {
                return Err(ConfigError::Invalid(format!("widget type {} listed twice", t.name)));
            }
            if t.cost.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                return Err(ConfigError::Invalid(format!("cost coefficients of {} must be finite and non-negative", t.name)));
            }
        }
        Ok(lib)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, kind: WidgetKind) -> Option<&WidgetType> {
        self.types.iter().find(|t| t.name == kind)
    }

    /// Cheapest accepting type. Ties go to the smaller ceiling, then the
    /// fixed kind order.
    pub fn pick(&self, domain: &[DomainValue], ann: &GrammarAnnotations) -> Option<(WidgetKind, f64)> {
        self.types
            .iter()
            .filter(|t| t.accepts(domain, ann))
            .map(|t| (t.cost(domain.len()), t.ceiling, t.name))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map(|(c, _, k)| (k, c))
    }
}

/// Numeric slider bounds over a domain of numeric literals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl NumRange {
    pub fn of<'a>(values: impl IntoIterator<Item = &'a AstNode>) -> Option<NumRange> {
        let nums: Vec<f64> = values.into_iter().map(AstNode::numeric_value).collect::<Option<_>>()?;
        if nums.is_empty() {
            return None;
        }
        let integral = nums.iter().all(|v| v.fract() == 0.0);
        Some(NumRange {
            min: nums.iter().copied().fold(f64::INFINITY, f64::min),
            max: nums.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            step: if integral { 1.0 } else { 0.01 },
        })
    }

    pub fn contains(&self, v: f64) -> bool {
        const EPS: f64 = 1e-9;
        if v < self.min - EPS || v > self.max + EPS {
            return false;
        }
        self.step != 1.0 || v.fract() == 0.0
    }

    /// The literal a slider emits at position `v`.
    pub fn literal(&self, v: f64) -> AstNode {
        AstNode::num(format_number(v, self.step))
    }
}

pub fn format_number(v: f64, step: f64) -> String {
    if step == 1.0 || v.fract() == 0.0 {
        format!("{}", v.round() as i64)
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Positions (relative paths) of the two varying numeric literals, with
/// their ranges.
pub fn numeric_pair(trees: &[&AstNode]) -> Option<([NodePath; 2], [NumRange; 2])> {
    let first = *trees.first()?;
    let skeleton = blank_numbers(first);
    if trees.iter().any(|t| blank_numbers(t) != skeleton) {
        return None;
    }
    let positions: Vec<NodePath> = first
        .preorder()
        .into_iter()
        .filter(|(_, n)| n.node_type == NodeType::NumExpr)
        .map(|(p, _)| p)
        .filter(|p| {
            let v0 = first.node_at(p).ok().and_then(AstNode::numeric_value);
            trees.iter().any(|t| t.node_at(p).ok().and_then(AstNode::numeric_value) != v0)
        })
        .collect();
    let [a, b] = <[NodePath; 2]>::try_from(positions).ok()?;
    let range = |p: &NodePath| NumRange::of(trees.iter().map(|t| t.node_at(p).expect("same skeleton")));
    Some(([a.clone(), b.clone()], [range(&a)?, range(&b)?]))
}

fn blank_numbers(n: &AstNode) -> AstNode {
    let mut out = n.clone();
    fn walk(n: &mut AstNode) {
        if n.node_type == NodeType::NumExpr {
            n.attrs.clear();
        }
        n.children.iter_mut().for_each(walk);
    }
    walk(&mut out);
    out
}

/// Item universe of a family of same-label collection nodes, in first-seen
/// order.
pub fn collection_universe(trees: &[&AstNode], ann: &GrammarAnnotations) -> Option<Vec<AstNode>> {
    let first = *trees.first()?;
    if !ann.is_collection(first.node_type) || trees.iter().any(|t| !t.same_label(first)) {
        return None;
    }
    let mut universe: Vec<AstNode> = Vec::new();
    for t in trees {
        for c in &t.children {
            if !universe.contains(c) {
                universe.push(c.clone());
            }
        }
    }
    Some(universe)
}

fn sorted_children(n: &AstNode) -> Vec<&AstNode> {
    let mut v: Vec<&AstNode> = n.children.iter().collect();
    v.sort();
    v
}

fn is_permutation_family(trees: &[&AstNode], ann: &GrammarAnnotations) -> bool {
    if collection_universe(trees, ann).is_none() || trees.len() < 2 {
        return false;
    }
    let base = sorted_children(trees[0]);
    trees.iter().all(|t| sorted_children(t) == base)
}

/// An instantiated widget.
#[derive(Debug, Clone, PartialEq)]
pub struct Widget {
    pub kind: WidgetKind,
    pub path: NodePath,
    pub domain: Vec<DomainValue>,
    /// Ids (into the graph's δ list) of the δs that initialized the widget.
    pub init: Vec<usize>,
    pub cost: f64,
    pub label: String,
}

impl Widget {
    /// Whether the widget can put `value` at its path.
    pub fn admits(&self, value: Option<&AstNode>) -> bool {
        if self.domain.iter().any(|d| d.as_deref() == value) {
            return true;
        }
        let Some(v) = value else {
            return false;
        };
        let present: Vec<&AstNode> = self.domain.iter().flatten().map(Arc::as_ref).collect();
        match self.kind {
            WidgetKind::Textbox => {
                v.children.is_empty()
                    && matches!(v.node_type, NodeType::NumExpr | NodeType::StrExpr | NodeType::ColExpr | NodeType::TableRef | NodeType::FuncName)
                    && present.iter().any(|d| d.node_type == v.node_type)
            }
            WidgetKind::Slider => match (NumRange::of(present.iter().copied()), v.numeric_value()) {
                (Some(r), Some(x)) => v.node_type == NodeType::NumExpr && r.contains(x),
                _ => false,
            },
            WidgetKind::RangeSlider => {
                let Some(([pa, pb], [ra, rb])) = numeric_pair(&present) else {
                    return false;
                };
                blank_numbers(v) == blank_numbers(present[0])
                    && v.preorder().into_iter().filter(|(_, n)| n.node_type == NodeType::NumExpr).all(|(p, n)| {
                        let x = n.numeric_value().unwrap_or(f64::NAN);
                        if p == pa {
                            ra.contains(x)
                        } else if p == pb {
                            rb.contains(x)
                        } else {
                            present[0].node_at(&p).ok() == Some(n)
                        }
                    })
            }
            WidgetKind::CheckboxList => {
                let first = present[0];
                if !v.same_label(first) {
                    return false;
                }
                let mut universe: Vec<&AstNode> = Vec::new();
                for t in &present {
                    for c in &t.children {
                        if !universe.contains(&c) {
                            universe.push(c);
                        }
                    }
                }
                let mut pos = 0;
                v.children.iter().all(|c| match universe[pos..].iter().position(|u| *u == c) {
                    Some(k) => {
                        pos += k + 1;
                        true
                    }
                    None => false,
                })
            }
            WidgetKind::DragAndDrop => v.same_label(present[0]) && sorted_children(v) == sorted_children(present[0]),
            _ => false,
        }
    }

    /// `expresses(w, δ)`: same path and `τ2` admitted.
    pub fn expresses(&self, d: &Delta) -> bool {
        self.path == d.path && self.admits(d.tau_new.as_deref())
    }

    pub fn range(&self) -> Option<NumRange> {
        if self.kind != WidgetKind::Slider {
            return None;
        }
        NumRange::of(self.domain.iter().flatten().map(Arc::as_ref))
    }

    /// Node types the widget's present domain values carry.
    pub fn slot_types(&self) -> BTreeSet<NodeType> {
        self.domain.iter().flatten().map(|n| n.node_type).collect()
    }

    /// Whether the widget's slot is currently filled in `q`.
    pub fn occupied(&self, q: &AstNode) -> bool {
        q.get(&self.path).is_some_and(|n| self.slot_types().contains(&n.node_type))
    }

    /// A widget is usable when its slot is filled, or when it can insert into
    /// an existing parent.
    pub fn is_active(&self, q: &AstNode) -> bool {
        if self.occupied(q) {
            return true;
        }
        self.allows_absent()
            && match (self.path.parent(), self.path.0.last()) {
                (Some(parent), Some(&i)) => q.get(&parent).is_some_and(|p| i <= p.children.len()),
                _ => false,
            }
    }

    /// Set the widget to `value` in state `q`. A present value replaces a
    /// filled slot or is inserted into an empty one; `None` deletes. Returns
    /// `None` when the widget is inactive, the value is not admitted, or the
    /// edit is a no-op.
    pub fn apply(&self, q: &AstNode, value: Option<&AstNode>, ann: &GrammarAnnotations) -> Option<AstNode> {
        if !self.is_active(q) || !self.admits(value) {
            return None;
        }
        let occupied = self.occupied(q);
        let out = match (occupied, value) {
            (true, Some(v)) => q.replace_at(&self.path, Some(v.clone()), ann).ok()?,
            (true, None) => q.replace_at(&self.path, None, ann).ok()?,
            (false, Some(v)) => q.insert_at(&self.path, v.clone(), ann).ok()?,
            (false, None) => return None,
        };
        (out != *q).then_some(out)
    }

    /// The value currently shown by the widget in `q` (`None` = absent).
    pub fn current(&self, q: &AstNode) -> Option<Option<AstNode>> {
        if self.occupied(q) {
            Some(q.get(&self.path).cloned())
        } else if self.is_active(q) {
            Some(None)
        } else {
            None
        }
    }

    pub fn allows_absent(&self) -> bool {
        self.domain.iter().any(Option::is_none)
    }
}
