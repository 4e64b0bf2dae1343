use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Reserved word, uppercased.
    Keyword(&'static str),
    Ident(String),
    Number(String),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) const KEYWORDS: &[&str] = &[
    "ALL", "AND", "AS", "ASC", "BETWEEN", "BY", "CASE", "CAST", "DESC", "DISTINCT", "ELSE", "END",
    "EXISTS", "FROM", "FULL", "GROUP", "HAVING", "IN", "INNER", "INTERSECT", "IS", "JOIN", "LEFT",
    "LIKE", "LIMIT", "NOT", "NULL", "OFFSET", "ON", "OR", "ORDER", "OUTER", "RIGHT", "SELECT",
    "THEN", "TOP", "UNION", "WHEN", "WHERE", "WITH",
];

const SYMBOLS: &[&str] = &[
    "<>", "!=", "<=", ">=", "=", "<", ">", "+", "-", "*", "/", "%", "(", ")", ",", ".", ";",
];

pub(crate) fn keyword(word: &str) -> Option<&'static str> {
    let upper = word.to_ascii_uppercase();
    KEYWORDS.iter().copied().find(|k| *k == upper)
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with("--") {
            i = text[i..].find('\n').map_or(bytes.len(), |n| i + n);
            continue;
        }
        if text[i..].starts_with("/*") {
            let end = text[i + 2..]
                .find("*/")
                .ok_or_else(|| ParseError::new(i, "unterminated comment"))?;
            i += end + 4;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i = scan_number(bytes, i);
            Tok::Number(text[start..i].to_string())
        } else if c.is_ascii_alphabetic() || c == b'_' || c == b'@' || c == b'#' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'$' | b'@' | b'#')) {
                i += 1;
            }
            let word = &text[start..i];
            match keyword(word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word.to_string()),
            }
        } else if c == b'\'' {
            let (s, next) = scan_quoted(text, i, '\'')?;
            i = next;
            Tok::Str(s)
        } else if c == b'"' || c == b'[' || c == b'`' {
            let close = match c {
                b'[' => ']',
                b'`' => '`',
                _ => '"',
            };
            let (s, next) = scan_quoted(text, i, close)?;
            i = next;
            Tok::Ident(s)
        } else if let Some(sym) = SYMBOLS.iter().copied().find(|s| text[i..].starts_with(s)) {
            i += sym.len();
            Tok::Sym(sym)
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError::new(i, format!("unexpected character `{ch}`")));
        };
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    if bytes[i] == b'0' && matches!(bytes.get(i + 1), Some(b'x' | b'X')) && bytes.get(i + 2).is_some_and(u8::is_ascii_hexdigit) {
        i += 2;
        while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
            i += 1;
        }
        return i;
    }
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        let mut j = i + 1;
        if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = j;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    i
}

/// Scan a quoted run starting at `start`; a doubled closing quote escapes it.
fn scan_quoted(text: &str, start: usize, close: char) -> Result<(String, usize), ParseError> {
    let mut out = String::new();
    let mut chars = text[start + 1..].char_indices().peekable();
    while let Some((off, ch)) = chars.next() {
        if ch == close {
            if close != ']' && chars.peek().map(|(_, c)| *c) == Some(close) {
                chars.next();
                out.push(close);
                continue;
            }
            return Ok((out, start + 1 + off + ch.len_utf8()));
        }
        out.push(ch);
    }
    Err(ParseError::new(start, "unterminated quoted text"))
}
