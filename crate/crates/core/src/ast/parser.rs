//! Recursive-descent parser for the reference grammar.
//!
//! Top level: optional `package`/`import` lines, then type declarations
//! (`class`, `interface`, `enum`, `record`, `@interface`). Members are nested
//! types, fields, methods, constructors and initializer blocks. Method bodies
//! are split into statements; everything that is not `if`/`while`/`for` is a
//! leaf labeled with its normalized text.

use std::fmt;

use super::lexer::{join_tokens, tokenize, Token, TokenKind};
use super::{AstNode, NodeKind, SourceUnit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Parse result together with the number of skipped garbage regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSource {
    pub root: AstNode,
    pub warnings: usize,
}

pub fn parse_source(unit: &SourceUnit) -> Result<AstNode, ParseError> {
    parse_source_with_diagnostics(unit).map(|p| p.root)
}

pub fn parse_source_with_diagnostics(unit: &SourceUnit) -> Result<ParsedSource, ParseError> {
    let tokens = tokenize(&unit.text)?;
    let mut parser = Parser {
        toks: tokens,
        pos: 0,
        warnings: 0,
    };
    let children = parser.unit()?;
    Ok(ParsedSource {
        root: AstNode::with_children(NodeKind::CompilationUnit, "", children),
        warnings: parser.warnings,
    })
}

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

const TYPE_KEYWORDS: &[&str] = &["class", "interface", "enum", "record"];

struct Parser<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
    warnings: usize,
}

fn entity_label(markers: &[String], name: &str) -> String {
    if markers.is_empty() {
        name.to_string()
    } else {
        format!("{} {}", markers.join(" "), name)
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&Token<'a>> {
        self.toks.get(self.pos + n)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn at_ident(&self) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Ident)
    }

    fn bump(&mut self) -> Option<&Token<'a>> {
        let tok = self.toks.get(self.pos);
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn error_at(&self, index: usize, message: &str) -> ParseError {
        match self.toks.get(index).or(self.toks.last()) {
            Some(t) => ParseError::new(t.line, t.column, message),
            None => ParseError::new(1, 1, message),
        }
    }

    fn unit(&mut self) -> Result<Vec<AstNode>, ParseError> {
        let mut classes = Vec::new();
        let mut doc: Option<String> = None;
        while let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Doc {
                doc = tok.doc.clone();
                self.pos += 1;
                continue;
            }
            if tok.is("package") || tok.is("import") {
                while let Some(t) = self.bump() {
                    if t.is(";") {
                        break;
                    }
                }
                doc = None;
                continue;
            }
            if tok.is(";") {
                self.pos += 1;
                continue;
            }
            let save = self.pos;
            let markers = self.decl_prefix();
            if self.at_type_keyword() {
                classes.push(self.class(doc.take(), &markers)?);
                continue;
            }
            self.pos = save;
            self.warnings += 1;
            self.skip_top_level_garbage();
            doc = None;
        }
        Ok(classes)
    }

    /// Consumes annotations and modifiers, returning the annotation markers.
    fn decl_prefix(&mut self) -> Vec<String> {
        let mut markers = Vec::new();
        loop {
            if self.at("@")
                && self
                    .peek_at(1)
                    .is_some_and(|t| t.kind == TokenKind::Ident && !t.is("interface"))
            {
                self.pos += 1;
                let mut name = self.bump().map(|t| t.text).unwrap_or_default();
                while self.at(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Ident) {
                    self.pos += 1;
                    name = self.bump().map(|t| t.text).unwrap_or_default();
                }
                markers.push(format!("@{name}"));
                if self.at("(") {
                    self.skip_balanced();
                }
            } else if self.peek().is_some_and(|t| MODIFIERS.iter().any(|m| t.is(m))) {
                self.pos += 1;
            } else {
                return markers;
            }
        }
    }

    fn at_type_keyword(&self) -> bool {
        let Some(tok) = self.peek() else { return false };
        let keyword = TYPE_KEYWORDS.iter().any(|k| tok.is(k))
            || (tok.is("@") && self.peek_at(1).is_some_and(|t| t.is("interface")));
        if !keyword {
            return false;
        }
        let name_at = if tok.is("@") { 2 } else { 1 };
        self.peek_at(name_at).is_some_and(|t| t.kind == TokenKind::Ident)
    }

    fn could_start_declaration(&self) -> bool {
        match self.peek() {
            None => false,
            Some(t) => {
                t.kind == TokenKind::Doc
                    || t.is("@")
                    || t.is("package")
                    || t.is("import")
                    || MODIFIERS.iter().any(|m| t.is(m))
                    || TYPE_KEYWORDS.iter().any(|k| t.is(k))
            }
        }
    }

    fn skip_top_level_garbage(&mut self) {
        loop {
            match self.peek() {
                None => return,
                Some(t) if t.is("{") => {
                    self.skip_balanced();
                }
                Some(_) => self.pos += 1,
            }
            if self.could_start_declaration() {
                return;
            }
        }
    }

    /// Skips a bracketed group starting at the current opening token.
    /// Returns false if input ended before the group closed.
    fn skip_balanced(&mut self) -> bool {
        let mut depth = 0usize;
        while let Some(t) = self.bump() {
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || t.is("}") {
                depth = depth.saturating_sub(1);
            }
            if depth == 0 {
                return true;
            }
        }
        false
    }

    fn skip_angles(&mut self) -> bool {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if t.is(";") || t.is("{") || t.is("}") {
                return false;
            }
            let (open, close) = (t.is("<"), t.is(">"));
            self.pos += 1;
            if open {
                depth += 1;
            } else if close {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return true;
                }
            }
        }
        false
    }

    fn class(&mut self, doc: Option<String>, markers: &[String]) -> Result<AstNode, ParseError> {
        let start = self.pos;
        if self.at("@") {
            self.pos += 1;
        }
        let is_enum = self.at("enum");
        self.pos += 1;
        let name = self.bump().map(|t| t.text.to_string()).unwrap_or_default();

        // Header: type parameters, record components, extends/implements.
        loop {
            match self.peek() {
                None => return Err(self.error_at(start, "expected class body")),
                Some(t) if t.is("{") => break,
                Some(t) if t.is("(") => {
                    if !self.skip_balanced() {
                        return Err(self.error_at(start, "expected class body"));
                    }
                }
                Some(_) => self.pos += 1,
            }
        }
        self.pos += 1;

        let mut children = Vec::new();
        if let Some(doc) = doc {
            children.push(AstNode::new(NodeKind::DocComment, doc));
        }
        if is_enum {
            self.skip_enum_constants(start)?;
        }
        self.members(&name, start, &mut children)?;
        Ok(AstNode::with_children(
            NodeKind::Class,
            entity_label(markers, &name),
            children,
        ))
    }

    fn skip_enum_constants(&mut self, class_start: usize) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                None => return Err(self.error_at(class_start, "unexpected end of input in enum body")),
                Some(t) if t.is("}") => return Ok(()),
                Some(t) if t.is(";") => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(t) if t.is("(") || t.is("{") => {
                    if !self.skip_balanced() {
                        return Err(self.error_at(class_start, "unexpected end of input in enum body"));
                    }
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    /// Parses members up to and including the closing brace.
    fn members(&mut self, class_name: &str, class_start: usize, out: &mut Vec<AstNode>) -> Result<(), ParseError> {
        let mut doc: Option<String> = None;
        loop {
            let Some(tok) = self.peek() else {
                return Err(self.error_at(class_start, "unexpected end of input in class body"));
            };
            if tok.is("}") {
                self.pos += 1;
                return Ok(());
            }
            if tok.is(";") {
                self.pos += 1;
                continue;
            }
            if tok.kind == TokenKind::Doc {
                doc = tok.doc.clone();
                self.pos += 1;
                continue;
            }
            let save = self.pos;
            let markers = self.decl_prefix();
            if self.at_type_keyword() {
                out.push(self.class(doc.take(), &markers)?);
                continue;
            }
            if self.at("{") {
                // Initializer block.
                let open = self.pos;
                if !self.skip_balanced() {
                    return Err(self.error_at(open, "unterminated initializer block"));
                }
                doc = None;
                continue;
            }
            match self.member(class_name, doc.take(), &markers)? {
                Some(nodes) => out.extend(nodes),
                None => {
                    self.pos = save;
                    self.warnings += 1;
                    self.skip_member_garbage(class_start)?;
                }
            }
        }
    }

    fn skip_member_garbage(&mut self, class_start: usize) -> Result<(), ParseError> {
        let mut consumed = false;
        loop {
            match self.peek() {
                None => return Err(self.error_at(class_start, "unexpected end of input in class body")),
                Some(t) if t.is("}") && consumed => return Ok(()),
                Some(t) if t.is("}") => {
                    // A stray closing brace would end the class; drop it instead.
                    self.pos += 1;
                    return Ok(());
                }
                Some(t) if t.is(";") => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(t) if t.is("{") || t.is("(") || t.is("[") => {
                    let brace = t.is("{");
                    if !self.skip_balanced() {
                        return Err(self.error_at(class_start, "unexpected end of input in class body"));
                    }
                    if brace {
                        return Ok(());
                    }
                }
                Some(_) => self.pos += 1,
            }
            consumed = true;
        }
    }

    /// Parses a field, method or constructor. `Ok(None)` means the tokens do
    /// not form a member and should be skipped as garbage.
    fn member(
        &mut self,
        class_name: &str,
        doc: Option<String>,
        markers: &[String],
    ) -> Result<Option<Vec<AstNode>>, ParseError> {
        if self.at("<") && !self.skip_angles() {
            return Ok(None);
        }
        let is_constructor =
            self.peek().is_some_and(|t| t.is(class_name)) && self.peek_at(1).is_some_and(|t| t.is("("));
        let return_type = if is_constructor {
            String::new()
        } else {
            match self.type_name() {
                Some(t) => t,
                None => return Ok(None),
            }
        };
        if !self.at_ident() {
            return Ok(None);
        }
        let name = self.bump().map(|t| t.text.to_string()).unwrap_or_default();

        if self.at("(") {
            return self.method(doc, markers, name, return_type).map(Some);
        }

        let mut fields = Vec::new();
        let mut name = name;
        let mut doc = doc;
        loop {
            let mut ty = return_type.clone();
            while self.at("[") && self.peek_at(1).is_some_and(|t| t.is("]")) {
                self.pos += 2;
                ty.push_str("[]");
            }
            if self.at("=") {
                self.pos += 1;
                self.skip_initializer();
            }
            let mut field = AstNode::new(NodeKind::Field, entity_label(markers, &format!("{name}:{ty}")));
            if let Some(doc) = doc.take() {
                field.children.push(AstNode::new(NodeKind::DocComment, doc));
            }
            fields.push(field);
            if self.at(",") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Ident) {
                self.pos += 1;
                name = self.bump().map(|t| t.text.to_string()).unwrap_or_default();
                continue;
            }
            if self.at(";") {
                self.pos += 1;
                return Ok(Some(fields));
            }
            return Ok(None);
        }
    }

    fn skip_initializer(&mut self) {
        while let Some(t) = self.peek() {
            if t.is(",") || t.is(";") || t.is("}") {
                return;
            }
            if t.is("(") || t.is("[") || t.is("{") {
                self.skip_balanced();
            } else {
                self.pos += 1;
            }
        }
    }

    fn type_name(&mut self) -> Option<String> {
        let start = self.pos;
        if !self.at_ident() {
            return None;
        }
        self.pos += 1;
        while self.at(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Ident) {
            self.pos += 2;
        }
        if self.at("<") && !self.skip_angles() {
            self.pos = start;
            return None;
        }
        while self.at("[") && self.peek_at(1).is_some_and(|t| t.is("]")) {
            self.pos += 2;
        }
        if self.at(".") && self.peek_at(1).is_some_and(|t| t.is(".")) && self.peek_at(2).is_some_and(|t| t.is(".")) {
            self.pos += 3;
        }
        Some(join_tokens(&self.toks[start..self.pos]))
    }

    fn method(
        &mut self,
        doc: Option<String>,
        markers: &[String],
        name: String,
        return_type: String,
    ) -> Result<Vec<AstNode>, ParseError> {
        let open = self.pos;
        self.pos += 1;
        let mut params = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        let mut depth = 0usize;
        loop {
            let Some(t) = self.peek() else {
                return Err(self.error_at(open, "unterminated parameter list"));
            };
            if t.is(")") && depth == 0 {
                self.pos += 1;
                break;
            }
            if t.is(",") && depth == 0 {
                params.extend(self.parameter(&current));
                current.clear();
                self.pos += 1;
                continue;
            }
            if t.is("(") || t.is("<") || t.is("[") {
                depth += 1;
            } else if t.is(")") || t.is(">") || t.is("]") {
                depth = depth.saturating_sub(1);
            }
            current.push(self.pos);
            self.pos += 1;
        }
        params.extend(self.parameter(&current));

        // Array dimensions after the parameter list, throws clause, default value.
        loop {
            match self.peek() {
                None => return Err(self.error_at(open, "expected method body")),
                Some(t) if t.is("{") || t.is(";") => break,
                Some(t) if t.is("}") => return Err(self.error_at(open, "expected method body")),
                Some(t) if t.is("(") => {
                    if !self.skip_balanced() {
                        return Err(self.error_at(open, "expected method body"));
                    }
                }
                Some(_) => self.pos += 1,
            }
        }
        let statements = if self.at("{") {
            self.block()?
        } else {
            self.pos += 1;
            Vec::new()
        };

        let mut children = Vec::new();
        if let Some(doc) = doc {
            children.push(AstNode::new(NodeKind::DocComment, doc));
        }
        children.push(AstNode::new(NodeKind::ReturnType, return_type));
        children.push(AstNode::with_children(NodeKind::ParameterList, "", params));
        children.push(AstNode::with_children(NodeKind::Body, "", statements));
        Ok(vec![AstNode::with_children(
            NodeKind::Method,
            entity_label(markers, &name),
            children,
        )])
    }

    /// Builds a `name:Type` parameter from the token indices of one
    /// comma-separated slot. Parameter annotations and `final` are dropped.
    fn parameter(&self, indices: &[usize]) -> Option<AstNode> {
        let mut toks: Vec<Token<'a>> = Vec::new();
        let mut i = 0;
        while i < indices.len() {
            let t = &self.toks[indices[i]];
            if t.is("@") && i + 1 < indices.len() {
                i += 2;
                if i < indices.len() && self.toks[indices[i]].is("(") {
                    let mut depth = 0usize;
                    while i < indices.len() {
                        let t = &self.toks[indices[i]];
                        if t.is("(") {
                            depth += 1;
                        } else if t.is(")") {
                            depth -= 1;
                        }
                        i += 1;
                        if depth == 0 {
                            break;
                        }
                    }
                }
                continue;
            }
            if t.is("final") {
                i += 1;
                continue;
            }
            toks.push(t.clone());
            i += 1;
        }
        if toks.is_empty() {
            return None;
        }
        let mut dims = String::new();
        while toks.len() >= 2 && toks[toks.len() - 1].is("]") && toks[toks.len() - 2].is("[") {
            toks.truncate(toks.len() - 2);
            dims.push_str("[]");
        }
        let label = match toks.split_last() {
            Some((name, ty)) if !ty.is_empty() && name.kind == TokenKind::Ident => {
                let mut ty_text = join_tokens(ty);
                ty_text.push_str(&dims);
                format!("{}:{}", name.text, ty_text)
            }
            _ => join_tokens(&toks),
        };
        Some(AstNode::new(NodeKind::Parameter, label))
    }

    /// Parses `{ statement* }`, starting at the opening brace.
    fn block(&mut self) -> Result<Vec<AstNode>, ParseError> {
        let open = self.pos;
        self.pos += 1;
        let mut statements = Vec::new();
        loop {
            match self.peek() {
                None => return Err(self.error_at(open, "unterminated block")),
                Some(t) if t.is("}") => {
                    self.pos += 1;
                    return Ok(statements);
                }
                Some(_) => statements.extend(self.statement()?),
            }
        }
    }

    fn statement(&mut self) -> Result<Vec<AstNode>, ParseError> {
        let Some(tok) = self.peek() else {
            return Ok(Vec::new());
        };
        if tok.kind == TokenKind::Doc || tok.is(";") {
            self.pos += 1;
            return Ok(Vec::new());
        }
        if tok.is("{") {
            return self.block();
        }
        let opens_paren = self.peek_at(1).is_some_and(|t| t.is("("));
        for keyword in ["if", "while", "for"] {
            if tok.is(keyword) && opens_paren {
                return self.control(keyword).map(|s| vec![s]);
            }
        }
        self.simple_statement()
    }

    fn control(&mut self, keyword: &str) -> Result<AstNode, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let cond_start = self.pos + 1;
        if !self.skip_balanced() {
            return Err(self.error_at(start, "unterminated condition"));
        }
        let condition = join_tokens(&self.toks[cond_start..self.pos - 1]);
        let mut children = vec![AstNode::new(NodeKind::Condition, condition), self.branch(start)?];
        if keyword == "if" && self.at("else") {
            self.pos += 1;
            children.push(self.branch(start)?);
        }
        Ok(AstNode::with_children(NodeKind::Statement, keyword, children))
    }

    fn branch(&mut self, owner: usize) -> Result<AstNode, ParseError> {
        if self.peek().is_none() || self.at("}") {
            return Err(self.error_at(owner, "missing statement body"));
        }
        let statements = if self.at("{") { self.block()? } else { self.statement()? };
        Ok(AstNode::with_children(NodeKind::Body, "", statements))
    }

    fn simple_statement(&mut self) -> Result<Vec<AstNode>, ParseError> {
        let start = self.pos;
        let starts_with_do = self.at("do");
        let mut depth = 0usize;
        loop {
            let Some(t) = self.peek() else {
                return Err(self.error_at(start, "unterminated statement"));
            };
            if depth == 0 && t.is("}") {
                break;
            }
            let (is_semi, is_close_brace) = (t.is(";"), t.is("}"));
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || is_close_brace {
                depth = depth.saturating_sub(1);
            }
            self.pos += 1;
            if depth == 0 && is_semi {
                break;
            }
            if depth == 0 && is_close_brace {
                if self.at(";") {
                    self.pos += 1;
                    break;
                }
                let continues =
                    self.at("catch") || self.at("finally") || self.at("else") || (starts_with_do && self.at("while"));
                if !continues {
                    break;
                }
            }
        }
        let label = join_tokens(&self.toks[start..self.pos]);
        if label.is_empty() {
            return Ok(Vec::new());
        }
        Ok(vec![AstNode::new(NodeKind::Statement, label)])
    }
}
