//! Recursive-descent parser for the supported SELECT subset.
//!
//! Tree shape, by example:
//!
//! ```text
//! SELECT day, sales FROM sf WHERE cty = 'USA'
//!
//! Select
//! ├─ Project
//! │  ├─ ProjClause ─ ColExpr{name: day}
//! │  └─ ProjClause ─ ColExpr{name: sales}
//! ├─ From ─ TableRef{name: sf}
//! └─ Where ─ Cond ─ BiExpr{op: =}
//!                   ├─ ColExpr{name: cty}
//!                   └─ StrExpr{value: USA}
//! ```
//!
//! Clause order under `Select` is fixed: `Distinct`, `TopClause`, `Project`,
//! `From`, `Where`, `GroupBy`, `Having`, each present only when written.

mod lexer;

use crate::ast::{AstNode, NodeType};
use crate::error::ParseError;
use crate::grammar::GrammarAnnotations;
use lexer::{Tok, Token};

pub(crate) use lexer::keyword;

/// Parse one statement. A single trailing semicolon is accepted.
pub fn parse(text: &str, ann: &GrammarAnnotations) -> Result<AstNode, ParseError> {
    let mut p = Parser::new(text)?;
    let ast = p.select()?;
    p.eat_sym(";");
    p.expect_end()?;
    debug_assert!(literals_annotated(&ast, ann));
    Ok(ast)
}

/// Parse a fragment that serializes a subtree of type `node_type`.
///
/// Accepts whatever [`crate::serialize::serialize`] produces for that node
/// type, e.g. `"TOP 10"` for `TopClause` or `"a AS x"` for `ProjClause`.
pub fn parse_fragment(text: &str, node_type: NodeType) -> Result<AstNode, ParseError> {
    let mut p = Parser::new(text)?;
    let node = p.fragment(node_type)?;
    p.expect_end()?;
    if node.node_type != node_type {
        return Err(ParseError::new(0, format!("expected a {node_type} fragment, found {}", node.node_type)));
    }
    Ok(node)
}

/// Split a raw log text into statements on top-level semicolons, dropping
/// comments and blank statements. Quoted text and parentheses are respected.
pub fn split_statements(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\'' | '"' => {
                cur.push(c);
                while let Some(d) = chars.next() {
                    cur.push(d);
                    if d == c {
                        if chars.peek() == Some(&c) {
                            cur.push(chars.next().unwrap_or(c));
                        } else {
                            break;
                        }
                    }
                }
            }
            '-' if chars.peek() == Some(&'-') => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        cur.push('\n');
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = ' ';
                for d in chars.by_ref() {
                    if prev == '*' && d == '/' {
                        break;
                    }
                    prev = d;
                }
                cur.push(' ');
            }
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            ';' if depth <= 0 => {
                push_statement(&mut out, &mut cur);
                depth = 0;
            }
            _ => cur.push(c),
        }
    }
    push_statement(&mut out, &mut cur);
    out
}

fn push_statement(out: &mut Vec<String>, cur: &mut String) {
    let s = cur.split_whitespace().collect::<Vec<_>>().join(" ");
    if !s.is_empty() {
        out.push(s);
    }
    cur.clear();
}

fn literals_annotated(ast: &AstNode, ann: &GrammarAnnotations) -> bool {
    ast.preorder().into_iter().all(|(_, n)| match n.node_type {
        NodeType::NumExpr | NodeType::StrExpr => ann.is_primitive(n.node_type),
        _ => true,
    })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lexer::tokenize(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(self.offset(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            None => self.error(format!("expected {wanted}, found end of input")),
            Some(Tok::Keyword(k)) if matches!(*k, "ORDER" | "LIMIT" | "JOIN" | "UNION" | "IN" | "IS" | "BETWEEN" | "WITH" | "EXISTS" | "NULL") => {
                self.error(format!("unsupported construct `{k}`"))
            }
            Some(t) => self.error(format!("expected {wanted}, found {}", describe(t))),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Keyword(k)) if *k == kw)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.unexpected(kw)
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => self.unexpected("end of statement"),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    /// `a.b.c` as a dotted name.
    fn dotted(&mut self) -> Result<Vec<String>, ParseError> {
        let mut parts = vec![self.ident()?];
        while self.is_sym(".") && matches!(self.peek_at(1), Some(Tok::Ident(_))) {
            self.pos += 1;
            parts.push(self.ident()?);
        }
        Ok(parts)
    }

    fn alias(&mut self) -> Result<Option<String>, ParseError> {
        if self.eat_kw("AS") {
            return self.ident().map(Some);
        }
        if let Some(Tok::Ident(_)) = self.peek() {
            return self.ident().map(Some);
        }
        Ok(None)
    }

    fn select(&mut self) -> Result<AstNode, ParseError> {
        self.expect_kw("SELECT")?;
        let mut node = AstNode::new(NodeType::Select);
        if self.eat_kw("DISTINCT") {
            node.children.push(AstNode::new(NodeType::Distinct));
        }
        if self.is_kw("TOP") {
            node.children.push(self.top()?);
        }
        node.children.push(self.project()?);
        if self.is_kw("FROM") {
            node.children.push(self.from()?);
        }
        if self.is_kw("WHERE") {
            node.children.push(self.condition_clause("WHERE", NodeType::Where)?);
        }
        if self.is_kw("GROUP") {
            node.children.push(self.group_by()?);
        }
        if self.is_kw("HAVING") {
            node.children.push(self.condition_clause("HAVING", NodeType::Having)?);
        }
        Ok(node)
    }

    fn top(&mut self) -> Result<AstNode, ParseError> {
        self.expect_kw("TOP")?;
        let n = match self.peek() {
            Some(Tok::Number(n)) => AstNode::num(n.clone()),
            _ => return self.unexpected("row count after TOP"),
        };
        self.pos += 1;
        Ok(AstNode::new(NodeType::TopClause).with_child(n))
    }

    fn project(&mut self) -> Result<AstNode, ParseError> {
        let mut node = AstNode::new(NodeType::Project);
        loop {
            node.children.push(self.proj_clause()?);
            if !self.eat_sym(",") {
                return Ok(node);
            }
        }
    }

    fn proj_clause(&mut self) -> Result<AstNode, ParseError> {
        let mut clause = AstNode::new(NodeType::ProjClause);
        if self.eat_sym("*") {
            return Ok(clause.with_child(AstNode::new(NodeType::Star)));
        }
        clause.children.push(self.expr()?);
        if let Some(a) = self.alias()? {
            clause.attrs.insert("alias".into(), a);
        }
        Ok(clause)
    }

    fn from(&mut self) -> Result<AstNode, ParseError> {
        self.expect_kw("FROM")?;
        let mut node = AstNode::new(NodeType::From);
        loop {
            node.children.push(self.from_item()?);
            if !self.eat_sym(",") {
                return Ok(node);
            }
        }
    }

    fn from_item(&mut self) -> Result<AstNode, ParseError> {
        let mut item = if self.is_sym("(") {
            self.pos += 1;
            if !self.is_kw("SELECT") {
                return self.unexpected("subquery");
            }
            let sub = self.select()?;
            self.expect_sym(")")?;
            AstNode::new(NodeType::SubQuery).with_child(sub)
        } else {
            let name = self.dotted()?.join(".");
            if self.eat_sym("(") {
                let args = self.args()?;
                AstNode::new(NodeType::TableFunc)
                    .with_attr("name", name)
                    .with_children(args)
            } else {
                AstNode::new(NodeType::TableRef).with_attr("name", name)
            }
        };
        if let Some(a) = self.alias()? {
            item.attrs.insert("alias".into(), a);
        }
        Ok(item)
    }

    /// Arguments after an opening parenthesis, through the closing one.
    fn args(&mut self) -> Result<Vec<AstNode>, ParseError> {
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            if self.eat_sym("*") {
                args.push(AstNode::new(NodeType::Star));
            } else {
                args.push(self.expr()?);
            }
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn condition_clause(&mut self, kw: &str, t: NodeType) -> Result<AstNode, ParseError> {
        self.expect_kw(kw)?;
        let cond = AstNode::new(NodeType::Cond).with_child(self.expr()?);
        Ok(AstNode::new(t).with_child(cond))
    }

    fn group_by(&mut self) -> Result<AstNode, ParseError> {
        self.expect_kw("GROUP")?;
        self.expect_kw("BY")?;
        let mut node = AstNode::new(NodeType::GroupBy);
        loop {
            node.children.push(self.expr()?);
            if !self.eat_sym(",") {
                return Ok(node);
            }
        }
    }

    fn expr(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.and_expr()?;
        while self.eat_kw("OR") {
            let right = self.and_expr()?;
            left = binary("OR", left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.not_expr()?;
        while self.eat_kw("AND") {
            let right = self.not_expr()?;
            left = binary("AND", left, right);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<AstNode, ParseError> {
        if self.eat_kw("NOT") {
            let inner = self.not_expr()?;
            return Ok(AstNode::new(NodeType::UnExpr).with_attr("op", "NOT").with_child(inner));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<AstNode, ParseError> {
        let left = self.additive()?;
        let op = match self.peek() {
            Some(Tok::Sym(s)) if matches!(*s, "=" | "<>" | "!=" | "<" | ">" | "<=" | ">=") => *s,
            Some(Tok::Keyword("LIKE")) => "LIKE",
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.additive()?;
        Ok(binary(op, left, right))
    }

    fn additive(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.multiplicative()?;
        while let Some(Tok::Sym(s @ ("+" | "-"))) = self.peek() {
            let op = *s;
            self.pos += 1;
            let right = self.multiplicative()?;
            left = binary(op, left, right);
        }
        Ok(left)
    }

    fn multiplicative(&mut self) -> Result<AstNode, ParseError> {
        let mut left = self.unary()?;
        while let Some(Tok::Sym(s @ ("*" | "/" | "%"))) = self.peek() {
            let op = *s;
            self.pos += 1;
            let right = self.unary()?;
            left = binary(op, left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<AstNode, ParseError> {
        if self.eat_sym("-") {
            if let Some(Tok::Number(n)) = self.peek() {
                let n = format!("-{n}");
                self.pos += 1;
                return Ok(AstNode::num(n));
            }
            let inner = self.unary()?;
            return Ok(AstNode::new(NodeType::UnExpr).with_attr("op", "-").with_child(inner));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<AstNode, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Number(n)) => {
                self.pos += 1;
                Ok(AstNode::num(n))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(AstNode::string(s))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                if self.is_kw("SELECT") {
                    return self.error("unsupported construct `scalar subquery`");
                }
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Keyword("CASE")) => self.case(),
            Some(Tok::Keyword("CAST")) => self.cast(),
            Some(Tok::Ident(_)) => {
                let mut parts = self.dotted()?;
                if self.eat_sym("(") {
                    let name = parts.join(".").to_ascii_uppercase();
                    let args = self.args()?;
                    return Ok(AstNode::new(NodeType::FuncExpr)
                        .with_child(AstNode::new(NodeType::FuncName).with_attr("name", name))
                        .with_children(args));
                }
                let name = parts.pop().unwrap_or_default();
                let mut col = AstNode::column(name);
                if !parts.is_empty() {
                    col.attrs.insert("qual".into(), parts.join("."));
                }
                Ok(col)
            }
            _ => self.unexpected("expression"),
        }
    }

    fn case(&mut self) -> Result<AstNode, ParseError> {
        self.expect_kw("CASE")?;
        let mut node = AstNode::new(NodeType::CaseExpr);
        if !self.is_kw("WHEN") {
            node.attrs.insert("simple".into(), "true".into());
            node.children.push(self.expr()?);
        }
        if !self.is_kw("WHEN") {
            return self.unexpected("WHEN");
        }
        while self.eat_kw("WHEN") {
            let cond = self.expr()?;
            self.expect_kw("THEN")?;
            let result = self.expr()?;
            node.children.push(AstNode::new(NodeType::WhenClause).with_child(cond).with_child(result));
        }
        if self.eat_kw("ELSE") {
            node.children.push(AstNode::new(NodeType::ElseClause).with_child(self.expr()?));
        }
        self.expect_kw("END")?;
        Ok(node)
    }

    fn cast(&mut self) -> Result<AstNode, ParseError> {
        self.expect_kw("CAST")?;
        self.expect_sym("(")?;
        let inner = self.expr()?;
        let mut node = AstNode::new(NodeType::CastExpr);
        if self.eat_kw("AS") {
            let mut ty = self.ident()?.to_ascii_uppercase();
            if self.eat_sym("(") {
                let mut dims = Vec::new();
                loop {
                    match self.peek() {
                        Some(Tok::Number(n)) => dims.push(n.clone()),
                        _ => return self.unexpected("type size"),
                    }
                    self.pos += 1;
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
                ty = format!("{ty}({})", dims.join(","));
            }
            node.attrs.insert("type".into(), ty);
        }
        self.expect_sym(")")?;
        Ok(node.with_child(inner))
    }

    fn fragment(&mut self, t: NodeType) -> Result<AstNode, ParseError> {
        use NodeType as N;
        match t {
            N::Select => self.select(),
            N::Distinct => {
                self.expect_kw("DISTINCT")?;
                Ok(AstNode::new(N::Distinct))
            }
            N::TopClause => self.top(),
            N::Project => self.project(),
            N::ProjClause => self.proj_clause(),
            N::Star => {
                self.expect_sym("*")?;
                Ok(AstNode::new(N::Star))
            }
            N::From => self.from(),
            N::TableRef | N::TableFunc | N::SubQuery => self.from_item(),
            N::Where => self.condition_clause("WHERE", N::Where),
            N::Having => self.condition_clause("HAVING", N::Having),
            N::Cond => Ok(AstNode::new(N::Cond).with_child(self.expr()?)),
            N::GroupBy => self.group_by(),
            N::FuncName => {
                let name = self.dotted()?.join(".").to_ascii_uppercase();
                Ok(AstNode::new(N::FuncName).with_attr("name", name))
            }
            N::WhenClause => {
                self.expect_kw("WHEN")?;
                let cond = self.expr()?;
                self.expect_kw("THEN")?;
                let result = self.expr()?;
                Ok(AstNode::new(N::WhenClause).with_child(cond).with_child(result))
            }
            N::ElseClause => {
                self.expect_kw("ELSE")?;
                Ok(AstNode::new(N::ElseClause).with_child(self.expr()?))
            }
            N::BiExpr | N::UnExpr | N::FuncExpr | N::ColExpr | N::StrExpr | N::NumExpr | N::CaseExpr | N::CastExpr => {
                self.expr()
            }
        }
    }
}

fn binary(op: &str, left: AstNode, right: AstNode) -> AstNode {
    AstNode::new(NodeType::BiExpr)
        .with_attr("op", op)
        .with_child(left)
        .with_child(right)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Keyword(k) => format!("keyword `{k}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Number(n) => format!("number `{n}`"),
        Tok::Str(s) => format!("string '{s}'"),
        Tok::Sym(s) => format!("`{s}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::NodePath;

    fn p(s: &str) -> AstNode {
        parse(s, &GrammarAnnotations::default()).unwrap()
    }

    fn at<'a>(t: &'a AstNode, path: &str) -> &'a AstNode {
        t.node_at(&path.parse::<NodePath>().unwrap()).unwrap()
    }

    #[test]
    fn sdss_literal_query() {
        let t = p("SELECT * FROM SpecLineIndex WHERE specObjId=0x400");
        assert_eq!(at(&t, "0/0/0").node_type, NodeType::Star);
        assert_eq!(at(&t, "1/0").attr("name"), Some("SpecLineIndex"));
        let cmp = at(&t, "2/0/0");
        assert_eq!(cmp.attr("op"), Some("="));
        assert_eq!(at(&t, "2/0/0/0"), &AstNode::column("specObjId"));
        assert_eq!(at(&t, "2/0/0/1"), &AstNode::num("0x400"));
    }

    #[test]
    fn keywords_case_insensitive_and_function_names_normalized() {
        assert_eq!(p("select avg(a)"), p("SELECT AVG(a)"));
        assert_eq!(at(&p("SELECT count(b)"), "0/0/0/0").attr("name"), Some("COUNT"));
        assert_ne!(p("SELECT 'a'"), p("SELECT 'A'"));
    }

    #[test]
    fn left_associative_chains() {
        let t = p("SELECT a FROM t WHERE x = 1 AND y = 2 AND z = 3");
        let top = at(&t, "2/0/0");
        assert_eq!(top.attr("op"), Some("AND"));
        assert_eq!(top.children[0].attr("op"), Some("AND"));
        assert_eq!(top.children[1].attr("op"), Some("="));
    }

    #[test]
    fn top_subquery_and_table_function() {
        let t = p("SELECT TOP 10 g.objID FROM Galaxy as g, dbo.fGetNearbyObjEq(5.848,0.352,2.0616) as d WHERE d.objID = g.objID");
        assert_eq!(at(&t, "0").node_type, NodeType::TopClause);
        assert_eq!(at(&t, "0/0"), &AstNode::num("10"));
        assert_eq!(at(&t, "1/0/0").attr("qual"), Some("g"));
        assert_eq!(at(&t, "2/0").attr("alias"), Some("g"));
        let f = at(&t, "2/1");
        assert_eq!(f.node_type, NodeType::TableFunc);
        assert_eq!(f.attr("name"), Some("dbo.fGetNearbyObjEq"));
        assert_eq!(f.children.len(), 3);

        let s = p("SELECT * FROM (SELECT a FROM T WHERE b > 10)");
        assert_eq!(at(&s, "1/0").node_type, NodeType::SubQuery);
        assert_eq!(at(&s, "1/0/0/2/0/0/1"), &AstNode::num("10"));
    }

    #[test]
    fn case_cast_having() {
        let t = p("SELECT (CASE carrier WHEN 'AA' THEN 'AA' ELSE 'Other' END) AS carrier, FLOOR(distance/5) AS distance FROM ontime");
        let case = at(&t, "0/0/0");
        assert_eq!(case.node_type, NodeType::CaseExpr);
        assert_eq!(case.children.len(), 3);
        assert_eq!(at(&t, "0/0").attr("alias"), Some("carrier"));
        let h = p("SELECT SUM(flights) FROM ontime WHERE canceled = 1 HAVING SUM(lights) > 149 and SUM(flights) < 1354");
        assert_eq!(at(&h, "3").node_type, NodeType::Having);
        let c = p("SELECT CAST(uniquecarrier) AS uniquecarrier FROM ontime");
        assert_eq!(at(&c, "0/0/0").node_type, NodeType::CastExpr);
        let c2 = p("SELECT CAST(x AS varchar(10)) FROM t");
        assert_eq!(at(&c2, "0/0/0").attr("type"), Some("VARCHAR(10)"));
    }

    #[test]
    fn negative_literals_fold() {
        let t = p("SELECT a - -5 FROM t");
        assert_eq!(at(&t, "0/0/0/1"), &AstNode::num("-5"));
        let u = p("SELECT -a FROM t");
        assert_eq!(at(&u, "0/0/0").node_type, NodeType::UnExpr);
    }

    #[test]
    fn malformed_and_unsupported() {
        let e = parse("SELECT ?? FROM", &GrammarAnnotations::default()).unwrap_err();
        assert_eq!(e.offset, 7);
        let e = parse("SELECT a FROM t ORDER BY a", &GrammarAnnotations::default()).unwrap_err();
        assert_eq!(e.offset, 16);
        assert!(e.message.contains("ORDER"));
        assert!(parse("SELECT a FROM", &GrammarAnnotations::default()).is_err());
        assert!(parse("SELECT a FROM t; SELECT b", &GrammarAnnotations::default()).is_err());
    }

    #[test]
    fn fragments() {
        assert_eq!(parse_fragment("TOP 10", NodeType::TopClause).unwrap(), AstNode::new(NodeType::TopClause).with_child(AstNode::num("10")));
        assert_eq!(parse_fragment("'USA'", NodeType::StrExpr).unwrap(), AstNode::string("USA"));
        assert!(parse_fragment("'USA'", NodeType::NumExpr).is_err());
        let pc = parse_fragment("a AS x", NodeType::ProjClause).unwrap();
        assert_eq!(pc.attr("alias"), Some("x"));
    }

    #[test]
    fn statement_splitting() {
        let log = "SELECT a FROM t; -- note; here\nSELECT 'x;y' FROM u;\n\n/* skip; */ SELECT b FROM (SELECT c FROM v)";
        assert_eq!(
            split_statements(log),
            vec!["SELECT a FROM t", "SELECT 'x;y' FROM u", "SELECT b FROM (SELECT c FROM v)"]
        );
    }
}
