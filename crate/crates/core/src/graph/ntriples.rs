//! Line-oriented triple format.
//!
//! One statement per line:
//!
//! ```text
//! @prefix lanl: <http://www.lanl.gov/> .
//! lanl:marko lanl:hasFriend lanl:johan .
//! <urn:a> <urn:name> "Marko"^^<http://www.w3.org/2001/XMLSchema#string> .
//! _:b1 <urn:p> "plain" .   # comment
//! ```
//!
//! Prefixed names expand by concatenation and must be declared first.

use std::collections::HashMap;
use std::fmt;

use super::network::SemanticNetwork;
use super::term::{BlankNode, Literal, Node, Triple};
use super::GraphError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    /// 1-based column (in characters).
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

/// Parses a whole document into a fresh network.
pub fn parse_triples(text: &str) -> Result<SemanticNetwork, ParseError> {
    let mut net = SemanticNetwork::new();
    parse_into(&mut net, text)?;
    Ok(net)
}

/// Parses a document into an existing network. Blank nodes are scoped to
/// this document. Returns the number of new triples.
pub fn parse_into(net: &mut SemanticNetwork, text: &str) -> Result<usize, ParseError> {
    let scope = net.next_scope();
    let triples = read_triples(text, scope)?;
    Ok(net.extend(triples))
}

/// Parses a document into a triple list without building a network.
pub fn read_triples(text: &str, scope: u32) -> Result<Vec<Triple>, ParseError> {
    let mut prefixes = HashMap::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut lexer = Lexer {
            chars: line.chars().collect(),
            pos: 0,
            line: i + 1,
            scope,
        };
        if let Some(t) = lexer.statement(&mut prefixes)? {
            out.push(t);
        }
    }
    Ok(out)
}

/// Writes every triple with full IRIs, one per line, in insertion order.
pub fn serialize(net: &SemanticNetwork) -> String {
    let mut out = String::new();
    for t in net.iter() {
        out.push_str(&t.to_ntriples());
        out.push('\n');
    }
    out
}

/// Writes triples using the given `(prefix, base)` abbreviations where the
/// remainder is a plain local name. A blank line separates subjects.
pub fn serialize_prefixed(triples: &[Triple], prefixes: &[(&str, &str)]) -> String {
    let mut out = String::new();
    for (name, base) in prefixes {
        out.push_str(&format!("@prefix {name}: <{base}> .\n"));
    }
    let mut last: Option<&Node> = None;
    for t in triples {
        if last.is_some_and(|s| s != t.subject()) || (last.is_none() && !prefixes.is_empty()) {
            out.push('\n');
        }
        last = Some(t.subject());
        out.push_str(&format!(
            "{} {} {} .\n",
            abbreviate(t.subject(), prefixes),
            abbreviate(t.predicate(), prefixes),
            abbreviate(t.object(), prefixes)
        ));
    }
    out
}

fn abbreviate(node: &Node, prefixes: &[(&str, &str)]) -> String {
    let short = |iri: &str| -> Option<String> {
        prefixes
            .iter()
            .filter_map(|(name, base)| {
                let local = iri.strip_prefix(base)?;
                let plain = !local.is_empty()
                    && local
                        .chars()
                        .all(|c| c.is_alphanumeric() || c == '_' || c == '-');
                plain.then(|| (base.len(), format!("{name}:{local}")))
            })
            .max_by_key(|(len, _)| *len)
            .map(|(_, s)| s)
    };
    match node {
        Node::Iri(iri) => short(iri).unwrap_or_else(|| node.to_ntriples()),
        Node::Literal(Literal {
            lexical,
            datatype: Some(dt),
        }) => match short(dt) {
            Some(dt) => {
                let plain = Node::literal(lexical.clone()).to_ntriples();
                format!("{plain}^^{dt}")
            }
            None => node.to_ntriples(),
        },
        _ => node.to_ntriples(),
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    scope: u32,
}

impl Lexer {
    fn statement(
        &mut self,
        prefixes: &mut HashMap<String, String>,
    ) -> Result<Option<Triple>, ParseError> {
        self.skip_ws();
        if self.at_end() {
            return Ok(None);
        }
        if self.peek() == Some('@') {
            self.prefix_decl(prefixes)?;
            return Ok(None);
        }
        let mut cols = [0usize; 3];
        let mut terms = Vec::with_capacity(3);
        for col in cols.iter_mut() {
            self.skip_ws();
            *col = self.column();
            terms.push(self.term(prefixes)?);
        }
        self.finish()?;
        let object = terms.pop().expect("three terms");
        let predicate = terms.pop().expect("three terms");
        let subject = terms.pop().expect("three terms");
        Triple::new(subject, predicate, object)
            .map(Some)
            .map_err(|e| {
                let column = match &e {
                    GraphError::Structure { position, .. } => match position {
                        super::Position::Subject => cols[0],
                        super::Position::Predicate => cols[1],
                        super::Position::Object => cols[2],
                    },
                    GraphError::Parse(p) => p.column,
                };
                self.error_at(column, e.to_string())
            })
    }

    fn prefix_decl(&mut self, prefixes: &mut HashMap<String, String>) -> Result<(), ParseError> {
        let word = self.take_while(|c| !c.is_whitespace());
        if word != "@prefix" {
            return Err(self.error(format!("unknown directive '{word}'")));
        }
        self.skip_ws();
        let start = self.column();
        let name = self.take_while(|c| c != ':' && !c.is_whitespace());
        if self.peek() != Some(':') || !valid_prefix(&name) {
            return Err(self.error_at(start, "expected a prefix name followed by ':'".into()));
        }
        self.pos += 1;
        self.skip_ws();
        if self.peek() != Some('<') {
            return Err(self.error("expected <iri> in prefix declaration".into()));
        }
        let iri = self.iri()?;
        self.finish()?;
        prefixes.insert(name, iri);
        Ok(())
    }

    fn term(&mut self, prefixes: &HashMap<String, String>) -> Result<Node, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of line".into())),
            Some('<') => Ok(Node::Iri(self.iri()?)),
            Some('"') => self.literal(prefixes),
            Some('_') if self.peek_at(1) == Some(':') => {
                self.pos += 2;
                let label = self.name_chars();
                if label.is_empty() {
                    return Err(self.error("empty blank node label".into()));
                }
                Ok(Node::Blank(BlankNode {
                    label,
                    scope: self.scope,
                }))
            }
            Some(_) => Ok(Node::Iri(self.prefixed(prefixes)?)),
        }
    }

    fn iri(&mut self) -> Result<String, ParseError> {
        let start = self.column();
        self.pos += 1;
        let mut iri = String::new();
        loop {
            match self.next() {
                None => return Err(self.error_at(start, "unterminated IRI".into())),
                Some('>') => break,
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '`') => {
                    return Err(self.error(format!("invalid character {c:?} in IRI")));
                }
                Some(c) => iri.push(c),
            }
        }
        if iri.is_empty() {
            return Err(self.error_at(start, "empty IRI".into()));
        }
        Ok(iri)
    }

    fn prefixed(&mut self, prefixes: &HashMap<String, String>) -> Result<String, ParseError> {
        let start = self.column();
        let prefix = self.take_while(|c| c != ':' && !c.is_whitespace());
        if self.peek() != Some(':') || !valid_prefix(&prefix) {
            return Err(self.error_at(
                start,
                "expected <iri>, prefix:name, _:id or a literal".into(),
            ));
        }
        self.pos += 1;
        let local = self.name_chars();
        let Some(base) = prefixes.get(&prefix) else {
            return Err(self.error_at(start, format!("undeclared prefix '{prefix}:'")));
        };
        Ok(format!("{base}{local}"))
    }

    fn literal(&mut self, prefixes: &HashMap<String, String>) -> Result<Node, ParseError> {
        let start = self.column();
        self.pos += 1;
        let mut lexical = String::new();
        loop {
            match self.next() {
                None => return Err(self.error_at(start, "unterminated literal".into())),
                Some('"') => break,
                Some('\\') => lexical.push(self.escape()?),
                Some(c) => lexical.push(c),
            }
        }
        let datatype = if self.peek() == Some('^') {
            if self.peek_at(1) != Some('^') {
                return Err(self.error("expected '^^' before datatype".into()));
            }
            self.pos += 2;
            match self.peek() {
                Some('<') => Some(self.iri()?),
                Some(_) => Some(self.prefixed(prefixes)?),
                None => return Err(self.error("missing datatype".into())),
            }
        } else if self.peek() == Some('@') {
            return Err(self.error("language tags are not supported".into()));
        } else {
            None
        };
        Ok(Node::Literal(Literal { lexical, datatype }))
    }

    fn escape(&mut self) -> Result<char, ParseError> {
        let c = match self.next() {
            Some('t') => '\t',
            Some('n') => '\n',
            Some('r') => '\r',
            Some('b') => '\u{8}',
            Some('f') => '\u{c}',
            Some('"') => '"',
            Some('\'') => '\'',
            Some('\\') => '\\',
            Some(u @ ('u' | 'U')) => {
                let len = if u == 'u' { 4 } else { 8 };
                let hex: String = (0..len).filter_map(|_| self.next()).collect();
                let code = u32::from_str_radix(&hex, 16)
                    .ok()
                    .filter(|_| hex.len() == len)
                    .and_then(char::from_u32);
                match code {
                    Some(c) => c,
                    None => return Err(self.error(format!("bad unicode escape '\\{u}{hex}'"))),
                }
            }
            Some(c) => return Err(self.error(format!("unknown escape '\\{c}'"))),
            None => return Err(self.error("dangling '\\'".into())),
        };
        Ok(c)
    }

    /// Consumes the terminal `.` plus an optional trailing comment.
    fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() != Some('.') {
            return Err(self.error("expected '.' at end of statement".into()));
        }
        self.pos += 1;
        self.skip_ws();
        if !self.at_end() {
            return Err(self.error("unexpected content after '.'".into()));
        }
        Ok(())
    }

    /// Local-name / label characters; a trailing `.` is left for [`finish`].
    fn name_chars(&mut self) -> String {
        let mut s =
            self.take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%'));
        while s.ends_with('.') {
            s.pop();
            self.pos -= 1;
        }
        s
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
        if self.peek() == Some('#') {
            self.pos = self.chars.len();
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, message: String) -> ParseError {
        self.error_at(self.column(), message)
    }

    fn error_at(&self, column: usize, message: String) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message,
        }
    }
}

fn valid_prefix(name: &str) -> bool {
    name.chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}
