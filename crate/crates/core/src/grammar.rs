//! Grammar annotations: which node types are primitives, and where subtrees
//! may be inserted or deleted.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ast::{NodeType, ValueType};
use crate::error::ConfigError;

pub const GRAMMAR_CONFIG_VERSION: u64 = 1;

const DEFAULT_CONFIG: &str = include_str!("../config/grammar.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarAnnotations {
    pub version: u64,
    /// Primitive node types and the value type of their literal.
    pub primitive_map: BTreeMap<NodeType, ValueType>,
    /// Node types whose children form an unordered-length list.
    pub collection_types: BTreeSet<NodeType>,
    /// Node types that may appear or disappear as a whole under any parent.
    #[serde(default)]
    pub optional_types: BTreeSet<NodeType>,
}

impl Default for GrammarAnnotations {
    fn default() -> Self {
        GrammarAnnotations::from_json(DEFAULT_CONFIG).expect("bundled grammar config is valid")
    }
}

impl GrammarAnnotations {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let ann: GrammarAnnotations = serde_json::from_str(text)?;
        if ann.version != GRAMMAR_CONFIG_VERSION {
            return Err(ConfigError::Version(ann.version));
        }
        if let Some(t) = ann.primitive_map.iter().find(|(_, v)| **v == ValueType::Tree) {
            return Err(ConfigError::Invalid(format!(
                "primitive type {} must map to number or string",
                t.0
            )));
        }
        Ok(ann)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn primitive_kind(&self, t: NodeType) -> Option<ValueType> {
        self.primitive_map.get(&t).copied()
    }

    pub fn is_primitive(&self, t: NodeType) -> bool {
        self.primitive_map.contains_key(&t)
    }

    pub fn is_collection(&self, t: NodeType) -> bool {
        self.collection_types.contains(&t)
    }

    pub fn allows_insert_delete(&self, parent: NodeType, child: NodeType) -> bool {
        self.is_collection(parent) || self.optional_types.contains(&child)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults() {
        let ann = GrammarAnnotations::default();
        assert_eq!(ann.primitive_kind(NodeType::NumExpr), Some(ValueType::Number));
        assert_eq!(ann.primitive_kind(NodeType::StrExpr), Some(ValueType::String));
        assert_eq!(ann.primitive_kind(NodeType::BiExpr), None);
        assert!(ann.is_collection(NodeType::Project));
        assert!(ann.allows_insert_delete(NodeType::Select, NodeType::TopClause));
        assert!(!ann.allows_insert_delete(NodeType::BiExpr, NodeType::ColExpr));
    }

    #[test]
    fn rejects_wrong_version_and_tree_primitives() {
        let bad = r#"{"version": 7, "primitive_map": {}, "collection_types": []}"#;
        assert!(matches!(GrammarAnnotations::from_json(bad), Err(ConfigError::Version(7))));
        let tree = r#"{"version": 1, "primitive_map": {"BiExpr": "tree"}, "collection_types": []}"#;
        assert!(matches!(GrammarAnnotations::from_json(tree), Err(ConfigError::Invalid(_))));
    }
}
