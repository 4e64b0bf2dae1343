//! Canonical SQL text for any subtree.

use crate::ast::{AstNode, NodeType};
use crate::parser::keyword;

/// Render `ast` as SQL. Non-`Select` roots render as the fragment they
/// represent, e.g. `TOP 10` for a `TopClause`.
pub fn serialize(ast: &AstNode) -> String {
    let mut out = String::new();
    write_node(ast, &mut out);
    out
}

fn write_node(n: &AstNode, out: &mut String) {
    use NodeType as N;
    match n.node_type {
        N::Select => {
            out.push_str("SELECT");
            for c in &n.children {
                out.push(' ');
                write_node(c, out);
            }
        }
        N::Distinct => out.push_str("DISTINCT"),
        N::TopClause => {
            out.push_str("TOP ");
            write_list(&n.children, out);
        }
        N::Project => write_list(&n.children, out),
        N::ProjClause => {
            write_list(&n.children, out);
            write_alias(n, out);
        }
        N::Star => out.push('*'),
        N::From => {
            out.push_str("FROM ");
            write_list(&n.children, out);
        }
        N::TableRef => {
            write_name(n.attr("name").unwrap_or_default(), out);
            write_alias(n, out);
        }
        N::TableFunc => {
            write_name(n.attr("name").unwrap_or_default(), out);
            out.push('(');
            write_list(&n.children, out);
            out.push(')');
            write_alias(n, out);
        }
        N::SubQuery => {
            out.push('(');
            write_list(&n.children, out);
            out.push(')');
            write_alias(n, out);
        }
        N::Where | N::Having => {
            out.push_str(if n.node_type == N::Where { "WHERE " } else { "HAVING " });
            write_list(&n.children, out);
        }
        N::Cond => write_list(&n.children, out),
        N::GroupBy => {
            out.push_str("GROUP BY ");
            write_list(&n.children, out);
        }
        N::BiExpr => {
            let op = n.attr("op").unwrap_or("=");
            let prec = binary_prec(op);
            if let Some(l) = n.children.first() {
                let wrap = expr_prec(l) < prec || (expr_prec(l) == prec && prec == CMP);
                write_wrapped(l, wrap, out);
            }
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            if let Some(r) = n.children.get(1) {
                write_wrapped(r, expr_prec(r) <= prec, out);
            }
        }
        N::UnExpr => {
            let op = n.attr("op").unwrap_or("NOT");
            let child = n.children.first();
            if op == "-" {
                out.push('-');
                let wrap = child.is_some_and(|c| {
                    expr_prec(c) < UNARY
                        || c.node_type == N::UnExpr
                        || c.attr("value").is_some_and(|v| v.starts_with('-'))
                });
                if let Some(c) = child {
                    write_wrapped(c, wrap, out);
                }
            } else {
                out.push_str(op);
                out.push(' ');
                if let Some(c) = child {
                    write_wrapped(c, expr_prec(c) < NOT, out);
                }
            }
        }
        N::FuncExpr => {
            if let Some(name) = n.children.first() {
                write_node(name, out);
            }
            out.push('(');
            write_list(n.children.get(1..).unwrap_or_default(), out);
            out.push(')');
        }
        N::FuncName => write_name(n.attr("name").unwrap_or_default(), out),
        N::ColExpr => {
            if let Some(q) = n.attr("qual") {
                write_name(q, out);
                out.push('.');
            }
            write_ident(n.attr("name").unwrap_or_default(), out);
        }
        N::StrExpr => {
            out.push('\'');
            out.push_str(&n.attr("value").unwrap_or_default().replace('\'', "''"));
            out.push('\'');
        }
        N::NumExpr => out.push_str(n.attr("value").unwrap_or("0")),
        N::CaseExpr => {
            out.push_str("CASE");
            for c in &n.children {
                out.push(' ');
                write_node(c, out);
            }
            out.push_str(" END");
        }
        N::WhenClause => {
            out.push_str("WHEN ");
            if let Some(c) = n.children.first() {
                write_node(c, out);
            }
            out.push_str(" THEN ");
            if let Some(r) = n.children.get(1) {
                write_node(r, out);
            }
        }
        N::ElseClause => {
            out.push_str("ELSE ");
            write_list(&n.children, out);
        }
        N::CastExpr => {
            out.push_str("CAST(");
            write_list(&n.children, out);
            if let Some(t) = n.attr("type") {
                out.push_str(" AS ");
                out.push_str(t);
            }
            out.push(')');
        }
    }
}

const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const UNARY: u8 = 7;
const ATOM: u8 = 8;

fn binary_prec(op: &str) -> u8 {
    match op {
        "OR" => OR,
        "AND" => AND,
        "+" | "-" => ADD,
        "*" | "/" | "%" => MUL,
        _ => CMP,
    }
}

fn expr_prec(n: &AstNode) -> u8 {
    match n.node_type {
        NodeType::BiExpr => binary_prec(n.attr("op").unwrap_or("=")),
        NodeType::UnExpr if n.attr("op") == Some("NOT") => NOT,
        NodeType::UnExpr => UNARY,
        _ => ATOM,
    }
}

fn write_wrapped(n: &AstNode, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
    }
    write_node(n, out);
    if wrap {
        out.push(')');
    }
}

fn write_list(items: &[AstNode], out: &mut String) {
    for (i, c) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_node(c, out);
    }
}

fn write_alias(n: &AstNode, out: &mut String) {
    if let Some(a) = n.attr("alias") {
        out.push_str(" AS ");
        write_ident(a, out);
    }
}

fn write_name(dotted: &str, out: &mut String) {
    for (i, part) in dotted.split('.').enumerate() {
        if i > 0 {
            out.push('.');
        }
        write_ident(part, out);
    }
}

fn write_ident(name: &str, out: &mut String) {
    let plain = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || matches!(c, '_' | '@' | '#'))
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '@' | '#'))
        && keyword(name).is_none();
    if plain {
        out.push_str(name);
    } else {
        out.push('"');
        out.push_str(&name.replace('"', "\"\""));
        out.push('"');
    }
}
