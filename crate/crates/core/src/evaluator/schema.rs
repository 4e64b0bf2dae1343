//! Column-to-table schema maps and closure precision.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ast::{AstNode, NodeType};
use crate::error::ConfigError;
use crate::grammar::GrammarAnnotations;
use crate::mapper::InterfaceModel;

use super::closure::{enumerate_closure_with, EnumOptions};

/// Column name → tables that contain it. Names are compared lowercase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SchemaMap(pub BTreeMap<String, BTreeSet<String>>);

impl SchemaMap {
    pub fn insert(&mut self, column: &str, table: &str) {
        self.0.entry(column.to_lowercase()).or_default().insert(table.to_lowercase());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tables_of(&self, column: &str) -> Option<&BTreeSet<String>> {
        self.0.get(&column.to_lowercase())
    }

    /// Columns are attributed to the single table of a one-table query, and
    /// qualified columns to the table their qualifier names.
    pub fn from_corpus<'a>(queries: impl IntoIterator<Item = &'a AstNode>) -> Self {
        let mut map = SchemaMap::default();
        for q in queries {
            let nodes = q.preorder();
            let mut alias: HashMap<String, String> = HashMap::new();
            let mut tables = BTreeSet::new();
            for (_, n) in &nodes {
                if n.node_type == NodeType::TableRef {
                    let name = n.attr("name").unwrap_or_default().to_lowercase();
                    alias.insert(name.clone(), name.clone());
                    if let Some(a) = n.attr("alias") {
                        alias.insert(a.to_lowercase(), name.clone());
                    }
                    tables.insert(name);
                }
            }
            for (_, n) in &nodes {
                if n.node_type != NodeType::ColExpr {
                    continue;
                }
                let Some(col) = n.attr("name").filter(|c| *c != "*") else { continue };
                match n.attr("qual") {
                    Some(qual) => {
                        if let Some(t) = alias.get(&qual.to_lowercase()) {
                            map.insert(col, t);
                        }
                    }
                    None if tables.len() == 1 => map.insert(col, tables.iter().next().expect("one table")),
                    None => {}
                }
            }
        }
        map
    }

    /// JSON object mapping each column to a list of table names.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: BTreeMap<String, BTreeSet<String>> = serde_json::from_str(text)?;
        let mut map = SchemaMap::default();
        for (col, tables) in raw {
            if tables.is_empty() {
                return Err(ConfigError::Invalid(format!("column `{col}` maps to no table")));
            }
            for t in tables {
                map.insert(&col, &t);
            }
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Every known column in `q` has one of its tables somewhere in `q`.
    pub fn admits(&self, q: &AstNode) -> bool {
        let nodes = q.preorder();
        let present: BTreeSet<String> = nodes
            .iter()
            .filter(|(_, n)| n.node_type == NodeType::TableRef)
            .filter_map(|(_, n)| n.attr("name"))
            .map(str::to_lowercase)
            .collect();
        nodes.iter().filter(|(_, n)| n.node_type == NodeType::ColExpr).all(|(_, n)| {
            match n.attr("name").and_then(|c| self.tables_of(c)) {
                Some(tables) => tables.iter().any(|t| present.contains(t)),
                None => true,
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    pub states: usize,
    pub passing: usize,
    pub truncated: bool,
}

impl Precision {
    pub fn fraction(&self) -> f64 {
        if self.states == 0 {
            1.0
        } else {
            self.passing as f64 / self.states as f64
        }
    }
}

/// Share of the (budgeted) closure that the schema admits.
pub fn schema_filter(model: &InterfaceModel, schema: &SchemaMap, ann: &GrammarAnnotations, opts: &EnumOptions) -> Precision {
    let c = enumerate_closure_with(model, ann, opts, |_| true);
    Precision {
        states: c.states.len(),
        passing: c.states.iter().filter(|q| schema.admits(q)).count(),
        truncated: c.truncated,
    }
}

/// Precision of the closure once the interface refuses schema-invalid
/// states.
pub fn filtered_precision(model: &InterfaceModel, schema: &SchemaMap, ann: &GrammarAnnotations, opts: &EnumOptions) -> Precision {
    let c = enumerate_closure_with(model, ann, opts, |q| schema.admits(q));
    Precision {
        states: c.states.len(),
        passing: c.states.iter().filter(|q| schema.admits(q)).count(),
        truncated: c.truncated,
    }
}
