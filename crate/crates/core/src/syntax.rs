//! Tokenizer shared by the regex and query surface syntaxes.

use thiserror::Error;

/// A parse failure, located by byte offset into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {expected}")]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: String,
}

impl SyntaxError {
    pub(crate) fn new(offset: usize, expected: impl Into<String>) -> Self {
        SyntaxError {
            offset,
            expected: expected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// `[A-Za-z0-9_]+`, including the keywords `eps` and `_` and numerals.
    Word(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Pipe,
    Dot,
    Amp,
    Star,
    Plus,
    Question,
    Caret,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Question => "`?`".into(),
            Tok::Caret => "`^`".into(),
        }
    }
}

pub(crate) fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Splits `text` into tokens paired with their starting byte offset.
pub(crate) fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if is_word_byte(b) {
            let start = i;
            while i < bytes.len() && is_word_byte(bytes[i]) {
                i += 1;
            }
            out.push((start, Tok::Word(text[start..i].to_string())));
            continue;
        }
        let tok = match b {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b',' => Tok::Comma,
            b'|' => Tok::Pipe,
            b'.' => Tok::Dot,
            b'&' => Tok::Amp,
            b'*' => Tok::Star,
            b'+' => Tok::Plus,
            b'?' => Tok::Question,
            b'^' => Tok::Caret,
            _ => return Err(SyntaxError::new(i, "a label, an operator or a bracket")),
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

/// Cursor over a token stream, tracking the end-of-input offset for errors.
pub(crate) struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Cursor {
            toks: tokenize(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    pub(crate) fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(tok.describe()))
        }
    }

    pub(crate) fn error(&self, expected: impl Into<String>) -> SyntaxError {
        let mut expected = expected.into();
        match self.peek() {
            Some(t) => expected.push_str(&format!(", found {}", t.describe())),
            None => expected.push_str(", found end of input"),
        }
        SyntaxError::new(self.offset(), expected)
    }

    pub(crate) fn finish(&self) -> Result<(), SyntaxError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }
}
