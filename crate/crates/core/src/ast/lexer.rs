use super::normalize_whitespace;
use super::parser::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident,
    Number,
    Literal,
    Punct,
    Doc,
}

#[derive(Debug, Clone)]
pub(crate) struct Token<'a> {
    pub kind: TokenKind,
    /// Source text of the token; normalized doc text for `Doc` tokens.
    pub text: &'a str,
    pub doc: Option<String>,
    pub line: usize,
    pub column: usize,
    /// Whitespace or a comment separates this token from the previous one.
    pub spaced: bool,
}

impl Token<'_> {
    pub fn is(&self, text: &str) -> bool {
        self.kind != TokenKind::Doc && self.kind != TokenKind::Literal && self.text == text
    }
}

/// Number of tokens in `text`, counting each doc comment as one token and
/// ignoring ordinary comments.
pub fn count_tokens(text: &str) -> Result<usize, ParseError> {
    tokenize(text).map(|t| t.len())
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token<'_>>, ParseError> {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut spaced = false;

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            spaced = true;
            continue;
        }
        let (line, column, start) = (cur.line, cur.column, cur.pos);

        if cur.rest().starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            spaced = true;
            continue;
        }
        if cur.rest().starts_with("/*") {
            let is_doc = cur.rest().starts_with("/**") && !cur.rest().starts_with("/**/");
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(ParseError::new(line, column, "unterminated comment"));
                }
            }
            if is_doc {
                let raw = &src[start..cur.pos];
                tokens.push(Token {
                    kind: TokenKind::Doc,
                    text: raw,
                    doc: Some(doc_text(raw)),
                    line,
                    column,
                    spaced,
                });
                spaced = false;
            } else {
                spaced = true;
            }
            continue;
        }

        let kind = if c.is_alphabetic() || c == '_' || c == '$' {
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' || c == '$' {
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Ident
        } else if c.is_ascii_digit() {
            while let Some(c) = cur.peek() {
                let exponent_sign = (c == '+' || c == '-')
                    && matches!(src[start..cur.pos].chars().last(), Some('e' | 'E'))
                    && !src[start..cur.pos].starts_with("0x");
                if c.is_alphanumeric() || c == '_' || c == '.' || exponent_sign {
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Number
        } else if c == '"' || c == '\'' {
            cur.bump();
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(ParseError::new(line, column, "unterminated literal"));
                    }
                    Some('\\') => {
                        cur.bump();
                    }
                    Some(q) if q == c => break,
                    Some(_) => {}
                }
            }
            TokenKind::Literal
        } else {
            cur.bump();
            TokenKind::Punct
        };
        tokens.push(Token {
            kind,
            text: &src[start..cur.pos],
            doc: None,
            line,
            column,
            spaced,
        });
        spaced = false;
    }
    Ok(tokens)
}

/// Text of a `/** ... */` comment without delimiters and leading stars.
fn doc_text(raw: &str) -> String {
    let inner = raw.strip_prefix("/**").and_then(|s| s.strip_suffix("*/")).unwrap_or("");
    let stripped: Vec<&str> = inner.lines().map(|l| l.trim_start().trim_start_matches('*')).collect();
    normalize_whitespace(&stripped.join(" "))
}

/// Joins tokens back into text, keeping a single space wherever the source
/// had whitespace or a comment between two tokens.
pub(crate) fn join_tokens(tokens: &[Token<'_>]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 && tok.spaced {
            out.push(' ');
        }
        match &tok.doc {
            Some(doc) => out.push_str(doc),
            None => out.push_str(tok.text),
        }
    }
    out
}
