//! Query log ingestion.
//!
//! Two layouts are accepted. If every non-blank line has at least two tabs,
//! lines are read as `client_id \t timestamp \t sql`. Otherwise the text is
//! split on top-level semicolons, or on newlines when it has none.

use std::collections::BTreeMap;

use log::warn;

use crate::ast::AstNode;
use crate::grammar::GrammarAnnotations;
use crate::parser::{parse, split_statements};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub client: Option<String>,
    pub timestamp: Option<String>,
    pub sql: String,
}

impl LogEntry {
    pub fn plain(sql: impl Into<String>) -> Self {
        LogEntry { client: None, timestamp: None, sql: sql.into() }
    }
}

pub fn read_log(text: &str) -> Vec<LogEntry> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if !lines.is_empty() && lines.iter().all(|l| l.matches('\t').count() >= 2) {
        return lines
            .iter()
            .filter_map(|l| {
                let mut parts = l.splitn(3, '\t');
                let client = parts.next()?.trim().to_string();
                let ts = parts.next()?.trim().to_string();
                let sql = parts.next()?.trim().trim_end_matches(';').trim().to_string();
                Some(LogEntry {
                    client: (!client.is_empty()).then_some(client),
                    timestamp: (!ts.is_empty()).then_some(ts),
                    sql,
                })
            })
            .collect();
    }
    let statements = split_statements(text);
    if statements.len() <= 1 && lines.len() > 1 {
        return lines
            .iter()
            .flat_map(|l| split_statements(l))
            .map(LogEntry::plain)
            .collect();
    }
    statements.into_iter().map(LogEntry::plain).collect()
}

/// Parse every entry, logging and skipping the ones outside the grammar.
pub fn parse_entries(entries: &[LogEntry], ann: &GrammarAnnotations) -> Vec<AstNode> {
    entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| match parse(&e.sql, ann) {
            Ok(ast) => Some(ast),
            Err(err) => {
                warn!("skipping log entry {i}: {err}");
                None
            }
        })
        .collect()
}

/// Entries grouped by client id; entries without one go under `""`.
pub fn by_client(entries: &[LogEntry]) -> BTreeMap<String, Vec<LogEntry>> {
    let mut out: BTreeMap<String, Vec<LogEntry>> = BTreeMap::new();
    for e in entries {
        out.entry(e.client.clone().unwrap_or_default()).or_default().push(e.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_layout() {
        let text = "c1\t2020-01-01\tSELECT a FROM t\nc2\t2020-01-02\tSELECT b FROM t;\n";
        let e = read_log(text);
        assert_eq!(e.len(), 2);
        assert_eq!(e[1].client.as_deref(), Some("c2"));
        assert_eq!(e[1].sql, "SELECT b FROM t");
        let groups = by_client(&e);
        assert_eq!(groups.keys().collect::<Vec<_>>(), vec!["c1", "c2"]);
    }

    #[test]
    fn newline_and_semicolon_layouts() {
        assert_eq!(read_log("SELECT a FROM t\nSELECT b FROM t\n").len(), 2);
        let multi = "SELECT a\n  FROM t;\nSELECT b FROM t;";
        let e = read_log(multi);
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].sql, "SELECT a FROM t");
    }

    #[test]
    fn unparseable_entries_are_skipped() {
        let e = read_log("SELECT a FROM t\nDELETE FROM t\nSELECT b FROM t");
        assert_eq!(parse_entries(&e, &GrammarAnnotations::default()).len(), 2);
    }
}
