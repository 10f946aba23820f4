//! Textual tree encoding: `(KIND "label" child*)`.
//!
//! The format is bit-exact: one space between the kind, the label and each
//! child, no other whitespace. Inside labels only `"` and `\` are escaped.

use std::fmt;

use super::{AstNode, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixtureError {
    Unbalanced { offset: usize },
    UnknownKind { offset: usize, kind: String },
    BadEscape { offset: usize },
    Unexpected { offset: usize, expected: &'static str },
}

impl fmt::Display for FixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureError::Unbalanced { offset } => write!(f, "unbalanced parentheses at byte {offset}"),
            FixtureError::UnknownKind { offset, kind } => {
                write!(f, "unknown node kind `{kind}` at byte {offset}")
            }
            FixtureError::BadEscape { offset } => write!(f, "bad escape sequence at byte {offset}"),
            FixtureError::Unexpected { offset, expected } => {
                write!(f, "expected {expected} at byte {offset}")
            }
        }
    }
}

impl std::error::Error for FixtureError {}

pub fn serialize_ast(root: &AstNode) -> String {
    let mut out = String::with_capacity(root.node_count() * 16);
    write_node(root, &mut out);
    out
}

fn write_node(node: &AstNode, out: &mut String) {
    out.push('(');
    out.push_str(node.kind.name());
    out.push_str(" \"");
    for c in node.label.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    for child in &node.children {
        out.push(' ');
        write_node(child, out);
    }
    out.push(')');
}

/// Parses one tree. Surrounding whitespace is ignored.
pub fn parse_fixture(text: &str) -> Result<AstNode, FixtureError> {
    let trimmed_start = text.len() - text.trim_start().len();
    let body = text.trim();
    let mut reader = Reader {
        bytes: body.as_bytes(),
        text: body,
        pos: 0,
        base: trimmed_start,
    };
    let node = reader.node()?;
    if reader.pos != body.len() {
        return Err(if body.as_bytes()[reader.pos] == b')' {
            FixtureError::Unbalanced {
                offset: reader.offset(),
            }
        } else {
            FixtureError::Unexpected {
                offset: reader.offset(),
                expected: "end of input",
            }
        });
    }
    Ok(node)
}

struct Reader<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
    base: usize,
}

impl Reader<'_> {
    fn offset(&self) -> usize {
        self.base + self.pos
    }

    fn expect(&mut self, byte: u8, what: &'static str) -> Result<(), FixtureError> {
        match self.bytes.get(self.pos) {
            Some(&b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            None => Err(FixtureError::Unbalanced { offset: self.offset() }),
            Some(_) => Err(FixtureError::Unexpected {
                offset: self.offset(),
                expected: what,
            }),
        }
    }

    fn node(&mut self) -> Result<AstNode, FixtureError> {
        self.expect(b'(', "`(`")?;
        let kind_start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_uppercase() || *b == b'_')
        {
            self.pos += 1;
        }
        let kind_text = &self.text[kind_start..self.pos];
        let kind: NodeKind = kind_text.parse().map_err(|_| FixtureError::UnknownKind {
            offset: self.base + kind_start,
            kind: kind_text.to_string(),
        })?;
        self.expect(b' ', "space after kind")?;
        self.expect(b'"', "`\"`")?;
        let label = self.label()?;
        let mut children = Vec::new();
        loop {
            match self.bytes.get(self.pos) {
                Some(b')') => {
                    self.pos += 1;
                    return Ok(AstNode::with_children(kind, label, children));
                }
                Some(b' ') => {
                    self.pos += 1;
                    children.push(self.node()?);
                }
                None => return Err(FixtureError::Unbalanced { offset: self.offset() }),
                Some(_) => {
                    return Err(FixtureError::Unexpected {
                        offset: self.offset(),
                        expected: "` (` or `)`",
                    })
                }
            }
        }
    }

    /// Reads label bytes after the opening quote, consuming the closing quote.
    fn label(&mut self) -> Result<String, FixtureError> {
        let mut out = String::new();
        let mut run_start = self.pos;
        loop {
            match self.bytes.get(self.pos) {
                None => return Err(FixtureError::Unbalanced { offset: self.offset() }),
                Some(b'"') => {
                    out.push_str(&self.text[run_start..self.pos]);
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => {
                    out.push_str(&self.text[run_start..self.pos]);
                    match self.bytes.get(self.pos + 1) {
                        Some(&c @ (b'"' | b'\\')) => out.push(c as char),
                        _ => return Err(FixtureError::BadEscape { offset: self.offset() }),
                    }
                    self.pos += 2;
                    run_start = self.pos;
                }
                Some(_) => self.pos += 1,
            }
        }
    }
}
