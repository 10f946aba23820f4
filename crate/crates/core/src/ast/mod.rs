//! Labeled, ordered syntax trees for a small Java-like language.
//!
//! Source files are parsed into a shallow tree: classes, fields, methods and
//! their signatures, doc comments, and statements compared by normalized
//! text. Control-flow statements (`if`, `while`, `for`) are the only
//! statements with structure: a CONDITION child followed by one or more BODY
//! children.
//!
//! The fixture grammar in [`fixture`] is a bit-exact textual encoding used by
//! tests and debugging output.

mod fixture;
mod hash;
mod lexer;
mod parser;

use std::fmt;
use std::str::FromStr;

pub use fixture::{parse_fixture, serialize_ast, FixtureError};
pub(crate) use hash::hash_parts;
pub use hash::structural_hash;
pub use lexer::count_tokens;
pub use parser::{parse_source, parse_source_with_diagnostics, ParseError, ParsedSource};

/// Kind of an [`AstNode`]. The declaration order is the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    CompilationUnit,
    Class,
    Method,
    Field,
    Parameter,
    ParameterList,
    ReturnType,
    Body,
    Statement,
    Condition,
    DocComment,
}

impl NodeKind {
    pub const ALL: [NodeKind; 11] = [
        NodeKind::CompilationUnit,
        NodeKind::Class,
        NodeKind::Method,
        NodeKind::Field,
        NodeKind::Parameter,
        NodeKind::ParameterList,
        NodeKind::ReturnType,
        NodeKind::Body,
        NodeKind::Statement,
        NodeKind::Condition,
        NodeKind::DocComment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::CompilationUnit => "COMPILATION_UNIT",
            NodeKind::Class => "CLASS",
            NodeKind::Method => "METHOD",
            NodeKind::Field => "FIELD",
            NodeKind::Parameter => "PARAMETER",
            NodeKind::ParameterList => "PARAMETER_LIST",
            NodeKind::ReturnType => "RETURN_TYPE",
            NodeKind::Body => "BODY",
            NodeKind::Statement => "STATEMENT",
            NodeKind::Condition => "CONDITION",
            NodeKind::DocComment => "DOC_COMMENT",
        }
    }

    /// Classes, methods and fields: the nodes that make up entity paths.
    pub fn is_entity(self) -> bool {
        matches!(self, NodeKind::Class | NodeKind::Method | NodeKind::Field)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownKind(pub String);

impl fmt::Display for UnknownKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown node kind `{}`", self.0)
    }
}

impl std::error::Error for UnknownKind {}

impl FromStr for NodeKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

/// A node of a labeled ordered tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AstNode {
    pub kind: NodeKind,
    pub label: String,
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn new(kind: NodeKind, label: impl Into<String>) -> Self {
        AstNode {
            kind,
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn with_children(kind: NodeKind, label: impl Into<String>, children: Vec<AstNode>) -> Self {
        AstNode {
            kind,
            label: label.into(),
            children,
        }
    }

    /// An empty compilation unit, the tree of an empty (or absent) file.
    pub fn empty_unit() -> Self {
        AstNode::new(NodeKind::CompilationUnit, "")
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn preorder(&self) -> impl Iterator<Item = &AstNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    /// Checks the placement rules of the source grammar. Fixture trees built
    /// by hand are not required to satisfy them.
    pub fn validate(&self) -> Result<(), String> {
        if self.kind != NodeKind::CompilationUnit {
            return Err(format!("root must be COMPILATION_UNIT, found {}", self.kind));
        }
        self.validate_below()
    }

    fn validate_below(&self) -> Result<(), String> {
        if self.label.contains('\n') {
            return Err(format!("{} label contains a newline", self.kind));
        }
        for child in &self.children {
            let allowed = match child.kind {
                NodeKind::CompilationUnit => false,
                NodeKind::Parameter => self.kind == NodeKind::ParameterList,
                NodeKind::ReturnType | NodeKind::ParameterList => self.kind == NodeKind::Method,
                NodeKind::Body => matches!(self.kind, NodeKind::Method | NodeKind::Statement),
                _ => true,
            };
            if !allowed {
                return Err(format!("{} may not appear under {}", child.kind, self.kind));
            }
            child.validate_below()?;
        }
        Ok(())
    }
}

/// A source file at one revision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceUnit {
            path: path.into(),
            text: text.into(),
        }
    }

    /// The missing side of an added or deleted file.
    pub fn empty(path: impl Into<String>) -> Self {
        SourceUnit::new(path, String::new())
    }
}

/// Strips leading `@Marker` tokens from an entity label, returning the
/// markers and the bare name.
///
/// Entity labels carry simple annotation markers in front of the name, e.g.
/// `@Test testParse` or `@Deprecated count:int`.
pub fn split_markers(label: &str) -> (Vec<&str>, &str) {
    let mut markers = Vec::new();
    let mut rest = label;
    while rest.starts_with('@') {
        match rest.find(' ') {
            Some(i) => {
                markers.push(&rest[..i]);
                rest = &rest[i + 1..];
            }
            None => break,
        }
    }
    (markers, rest)
}

/// Collapses runs of whitespace to single spaces and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}
