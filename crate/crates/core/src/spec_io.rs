//! The interface document: a versioned JSON file that carries everything a
//! renderer needs, including SQL previews of every domain value.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, NodePath};
use crate::error::SpecError;
use crate::grammar::GrammarAnnotations;
use crate::mapper::{widget_id, InterfaceModel};
use crate::serialize::serialize;
use crate::widget::{NumRange, Widget, WidgetKind, WidgetLibrary};

pub const SPEC_VERSION: u64 = 1;
pub const GRID_COLUMNS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpecDocument {
    pub version: u64,
    pub initial_query: QueryEntry,
    pub widgets: Vec<WidgetEntry>,
    pub layout: Layout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub sql: String,
    pub ast: AstNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidgetEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: WidgetKind,
    pub path: NodePath,
    pub label: String,
    pub cost: f64,
    pub allows_absent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<NumRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled_when: Option<Guard>,
    pub domain: Vec<DomainEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainEntry {
    Subtree { sql: String, ast: AstNode },
    Absent,
}

/// The widget is usable only while the guard widget shows one of the listed
/// domain entries (by index), or an edited variant of one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guard {
    pub widget: String,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub columns: usize,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub widget: String,
    pub row: usize,
    pub col: usize,
}

impl Layout {
    pub fn grid(ids: impl IntoIterator<Item = String>) -> Self {
        let cells = ids
            .into_iter()
            .enumerate()
            .map(|(i, widget)| Cell { widget, row: i / GRID_COLUMNS, col: i % GRID_COLUMNS })
            .collect();
        Layout { columns: GRID_COLUMNS, cells }
    }
}

/// Domain entries of `g` under which `w`'s slot exists.
fn enabling(g: &Widget, w: &Widget) -> Vec<usize> {
    let rel = w.path.strip_prefix(&g.path).expect("guard is an ancestor");
    let types = w.slot_types();
    g.domain
        .iter()
        .enumerate()
        .filter(|(_, d)| d.as_deref().and_then(|t| t.get(&rel)).is_some_and(|n| types.contains(&n.node_type)))
        .map(|(k, _)| k)
        .collect()
}

/// The nearest ancestor widget with some domain entry that removes `w`'s
/// slot, with the entries that keep it.
pub fn guard_of(model: &InterfaceModel, i: usize) -> Option<(usize, Vec<usize>)> {
    let w = &model.widgets[i];
    model
        .widgets
        .iter()
        .enumerate()
        .filter(|(_, g)| g.path.is_proper_prefix_of(&w.path))
        .map(|(j, g)| (j, g.path.depth(), enabling(g, w), g.domain.len()))
        .filter(|(_, _, on, n)| on.len() < *n)
        .max_by_key(|(_, depth, _, _)| *depth)
        .map(|(j, _, on, _)| (j, on))
}

pub fn export(model: &InterfaceModel) -> InterfaceSpecDocument {
    let widgets = model
        .widgets
        .iter()
        .enumerate()
        .map(|(i, w)| WidgetEntry {
            id: widget_id(i),
            kind: w.kind,
            path: w.path.clone(),
            label: w.label.clone(),
            cost: w.cost,
            allows_absent: w.allows_absent(),
            range: w.range(),
            enabled_when: guard_of(model, i).map(|(j, values)| Guard { widget: widget_id(j), values }),
            domain: w
                .domain
                .iter()
                .map(|d| match d {
                    Some(t) => DomainEntry::Subtree { sql: serialize(t), ast: t.as_ref().clone() },
                    None => DomainEntry::Absent,
                })
                .collect(),
        })
        .collect();
    InterfaceSpecDocument {
        version: SPEC_VERSION,
        initial_query: QueryEntry { sql: serialize(&model.initial_query), ast: model.initial_query.as_ref().clone() },
        widgets,
        layout: model.layout.clone().unwrap_or_else(|| Layout::grid((0..model.widgets.len()).map(widget_id))),
    }
}

pub fn to_json(doc: &InterfaceSpecDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

pub fn export_json(model: &InterfaceModel) -> String {
    to_json(&export(model))
}

fn invalid(field: impl Into<String>, widget: Option<&str>, message: impl Into<String>) -> SpecError {
    SpecError::Validation { field: field.into(), widget: widget.map(str::to_string), message: message.into() }
}

/// Rebuild a model. Types are checked against `lib`, so an edited type must
/// still accept its domain; costs are recomputed.
pub fn import(doc: &InterfaceSpecDocument, lib: &WidgetLibrary, ann: &GrammarAnnotations) -> Result<InterfaceModel, SpecError> {
    if doc.version != SPEC_VERSION {
        return Err(SpecError::SchemaVersion { found: doc.version, expected: SPEC_VERSION });
    }
    if serialize(&doc.initial_query.ast) != doc.initial_query.sql {
        return Err(invalid("initial_query.sql", None, "preview does not match the syntax tree"));
    }
    let mut widgets = Vec::with_capacity(doc.widgets.len());
    for (i, e) in doc.widgets.iter().enumerate() {
        let id = e.id.as_str();
        if e.id != widget_id(i) {
            return Err(invalid(format!("widgets[{i}].id"), Some(id), format!("expected `{}`", widget_id(i))));
        }
        let mut domain = Vec::with_capacity(e.domain.len());
        for (k, d) in e.domain.iter().enumerate() {
            domain.push(match d {
                DomainEntry::Absent => None,
                DomainEntry::Subtree { sql, ast } => {
                    if serialize(ast) != *sql {
                        return Err(invalid(format!("widgets[{i}].domain[{k}].sql"), Some(id), "preview does not match the syntax tree"));
                    }
                    Some(Arc::new(ast.clone()))
                }
            });
        }
        if domain.is_empty() {
            return Err(invalid(format!("widgets[{i}].domain"), Some(id), "domain is empty"));
        }
        let rule = lib
            .get(e.kind)
            .ok_or_else(|| invalid(format!("widgets[{i}].type"), Some(id), format!("`{}` is not in the widget library", e.kind)))?;
        if !rule.accepts(&domain, ann) {
            return Err(invalid(format!("widgets[{i}].type"), Some(id), format!("`{}` does not accept this domain", e.kind)));
        }
        if let Some(r) = e.range {
            if !(r.min <= r.max && r.step > 0.0) {
                return Err(invalid(format!("widgets[{i}].range"), Some(id), "need min <= max and step > 0"));
            }
        }
        if let Some(g) = &e.enabled_when {
            let Some(other) = doc.widgets.iter().find(|o| o.id == g.widget && o.id != e.id) else {
                return Err(invalid(format!("widgets[{i}].enabled_when.widget"), Some(id), format!("unknown widget `{}`", g.widget)));
            };
            if g.values.iter().any(|&k| k >= other.domain.len()) {
                return Err(invalid(format!("widgets[{i}].enabled_when.values"), Some(id), "index outside the guard's domain"));
            }
        }
        widgets.push(Widget {
            kind: e.kind,
            path: e.path.clone(),
            cost: rule.cost(domain.len()),
            domain,
            init: Vec::new(),
            label: e.label.clone(),
        });
    }
    let mut placed: Vec<&str> = doc.layout.cells.iter().map(|c| c.widget.as_str()).collect();
    placed.sort_unstable();
    let mut ids: Vec<&str> = doc.widgets.iter().map(|w| w.id.as_str()).collect();
    ids.sort_unstable();
    if placed != ids {
        return Err(invalid("layout.cells", None, "every widget must be placed exactly once"));
    }
    if doc.layout.columns == 0 || doc.layout.cells.iter().any(|c| c.col >= doc.layout.columns) {
        return Err(invalid("layout.columns", None, "cell column outside the grid"));
    }
    Ok(InterfaceModel {
        widgets,
        initial_query: Arc::new(doc.initial_query.ast.clone()),
        layout: Some(doc.layout.clone()),
    })
}

pub fn from_json(text: &str) -> Result<InterfaceSpecDocument, SpecError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v != SPEC_VERSION => return Err(SpecError::SchemaVersion { found: v, expected: SPEC_VERSION }),
        None => return Err(invalid("version", None, "missing or not an integer")),
        _ => {}
    }
    Ok(serde_json::from_value(value)?)
}

pub fn import_json(text: &str, lib: &WidgetLibrary, ann: &GrammarAnnotations) -> Result<InterfaceModel, SpecError> {
    import(&from_json(text)?, lib, ann)
}

pub fn load(path: &Path, lib: &WidgetLibrary, ann: &GrammarAnnotations) -> Result<InterfaceModel, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid("file", None, e.to_string()))?;
    import_json(&text, lib, ann)
}
