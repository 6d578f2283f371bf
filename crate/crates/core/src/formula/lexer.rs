//! Tokenizer for formula body text.
//!
//! Produces a flat token list with byte offsets so parse errors can point at
//! the offending character. Out-of-scope syntax (R1C1 references, array
//! literals, spill and structured-table references) is rejected here with a
//! message naming the construct.

use crate::formula::FormulaError;
use crate::model::{column_index, MAX_ROWS};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Text(String),
    ErrorLit(String),
    /// Function name, defined name, bare sheet name, or column letters.
    Ident(String),
    /// Quoted name ('My Sheet'), quotes stripped and unescaped.
    QuotedName(String),
    CellRef {
        abs_col: bool,
        column: u32,
        abs_row: bool,
        row: u32,
    },
    /// External workbook reference captured verbatim, e.g. "[Book.xlsx]Prices!A1:B4".
    External {
        locator: String,
        text: String,
    },
    Bang,
    Colon,
    Comma,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Amp,
    Percent,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub len: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

const ERROR_LITERALS: &[&str] = &[
    "#NULL!",
    "#DIV/0!",
    "#VALUE!",
    "#REF!",
    "#NAME?",
    "#NUM!",
    "#N/A",
    "#SPILL!",
    "#CALC!",
    "#GETTING_DATA",
];

struct Lexer<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
    tokens: Vec<Token>,
}

pub fn lex(input: &str) -> Result<Vec<Token>, FormulaError> {
    let mut lexer = Lexer {
        input,
        bytes: input.as_bytes(),
        pos: 0,
        tokens: Vec::new(),
    };
    lexer.run()?;
    Ok(lexer.tokens)
}

impl<'a> Lexer<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> FormulaError {
        FormulaError {
            offset,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.tokens.push(Token {
            kind,
            start,
            len: self.pos - start,
        });
    }

    fn last_allows_postfix(&self) -> bool {
        matches!(
            self.tokens.last().map(|t| &t.kind),
            Some(
                TokenKind::CellRef { .. }
                    | TokenKind::RParen
                    | TokenKind::Ident(_)
                    | TokenKind::Number(_)
            )
        )
    }

    fn run(&mut self) -> Result<(), FormulaError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.pos += 1;
                }
                b'"' => self.lex_string(start)?,
                b'\'' => self.lex_quoted_name(start)?,
                b'#' => self.lex_error_literal(start)?,
                b'[' => self.lex_bracket(start)?,
                b'{' => {
                    return Err(self.err(start, "array literals are not supported"));
                }
                b'0'..=b'9' => self.lex_number(start)?,
                b'.' if matches!(self.peek_at(1), Some(b'0'..=b'9')) => self.lex_number(start)?,
                b'$' => self.lex_word(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => self.lex_word(start)?,
                b'!' => self.single(TokenKind::Bang),
                b':' => self.single(TokenKind::Colon),
                b',' => self.single(TokenKind::Comma),
                b'(' => self.single(TokenKind::LParen),
                b')' => self.single(TokenKind::RParen),
                b'+' => self.single(TokenKind::Plus),
                b'-' => self.single(TokenKind::Minus),
                b'*' => self.single(TokenKind::Star),
                b'/' => self.single(TokenKind::Slash),
                b'^' => self.single(TokenKind::Caret),
                b'&' => self.single(TokenKind::Amp),
                b'%' => self.single(TokenKind::Percent),
                b'=' => self.single(TokenKind::Eq),
                b'<' => {
                    self.pos += 1;
                    match self.peek() {
                        Some(b'=') => {
                            self.pos += 1;
                            self.push(TokenKind::Le, start);
                        }
                        Some(b'>') => {
                            self.pos += 1;
                            self.push(TokenKind::Ne, start);
                        }
                        _ => self.push(TokenKind::Lt, start),
                    }
                }
                b'>' => {
                    self.pos += 1;
                    if self.peek() == Some(b'=') {
                        self.pos += 1;
                        self.push(TokenKind::Ge, start);
                    } else {
                        self.push(TokenKind::Gt, start);
                    }
                }
                b']' => return Err(self.err(start, "unexpected ']'")),
                _ => {
                    let ch = self.input[start..].chars().next().unwrap();
                    return Err(self.err(start, format!("unexpected character {ch:?}")));
                }
            }
        }
        Ok(())
    }

    fn single(&mut self, kind: TokenKind) {
        let start = self.pos;
        self.pos += 1;
        self.push(kind, start);
    }

    fn lex_string(&mut self, start: usize) -> Result<(), FormulaError> {
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.peek() {
                Some(b'"') => {
                    if self.peek_at(1) == Some(b'"') {
                        value.push('"');
                        self.pos += 2;
                    } else {
                        self.pos += 1;
                        self.push(TokenKind::Text(value), start);
                        return Ok(());
                    }
                }
                Some(_) => {
                    let ch = self.input[self.pos..].chars().next().unwrap();
                    value.push(ch);
                    self.pos += ch.len_utf8();
                }
                None => return Err(self.err(start, "unterminated string literal")),
            }
        }
    }

    fn lex_quoted_name(&mut self, start: usize) -> Result<(), FormulaError> {
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.peek() {
                Some(b'\'') => {
                    if self.peek_at(1) == Some(b'\'') {
                        value.push('\'');
                        self.pos += 2;
                    } else {
                        self.pos += 1;
                        if value.is_empty() {
                            return Err(self.err(start, "empty quoted name"));
                        }
                        self.push(TokenKind::QuotedName(value), start);
                        return Ok(());
                    }
                }
                Some(_) => {
                    let ch = self.input[self.pos..].chars().next().unwrap();
                    value.push(ch);
                    self.pos += ch.len_utf8();
                }
                None => return Err(self.err(start, "unterminated quoted name")),
            }
        }
    }

    fn lex_error_literal(&mut self, start: usize) -> Result<(), FormulaError> {
        let rest = &self.input[start..];
        let upper: String = rest
            .chars()
            .take(ERROR_LITERALS.iter().map(|l| l.len()).max().unwrap())
            .collect::<String>()
            .to_ascii_uppercase();
        for lit in ERROR_LITERALS {
            if upper.starts_with(lit) {
                self.pos = start + lit.len();
                self.push(TokenKind::ErrorLit((*lit).to_string()), start);
                return Ok(());
            }
        }
        if self.last_allows_postfix() {
            return Err(self.err(start, "spill references ('#') are not supported"));
        }
        Err(self.err(start, "unrecognized error literal"))
    }

    /// Brackets start external workbook references when they open a
    /// reference; after a name they are structured-table syntax, which is
    /// out of scope.
    fn lex_bracket(&mut self, start: usize) -> Result<(), FormulaError> {
        if let Some(Token {
            kind: TokenKind::Ident(name),
            ..
        }) = self.tokens.last()
        {
            if name.eq_ignore_ascii_case("r") || name.eq_ignore_ascii_case("c") {
                return Err(self.err(start, "R1C1-style references are not supported"));
            }
            return Err(self.err(start, "structured table references are not supported"));
        }
        // [locator]
        self.pos += 1;
        let locator_start = self.pos;
        while let Some(c) = self.peek() {
            if c == b']' {
                break;
            }
            self.pos += 1;
        }
        if self.peek() != Some(b']') {
            return Err(self.err(start, "unterminated workbook locator"));
        }
        let locator = self.input[locator_start..self.pos].to_string();
        self.pos += 1;
        if locator.is_empty() {
            return Err(self.err(start, "empty workbook locator"));
        }
        // Sheet part and reference, captured verbatim up to the end of the
        // A1 reference (optionally a range).
        if self.peek() == Some(b'\'') {
            return Err(self.err(
                self.pos,
                "quote the whole external reference, not the sheet part",
            ));
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b' ' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.peek() != Some(b'!') {
            return Err(self.err(self.pos, "expected '!' in external reference"));
        }
        self.pos += 1;
        let mut seen_colon = false;
        while let Some(c) = self.peek() {
            match c {
                b'$' | b'0'..=b'9' => self.pos += 1,
                c if c.is_ascii_alphabetic() => self.pos += 1,
                b':' if !seen_colon => {
                    seen_colon = true;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        let text = self.input[start..self.pos].to_string();
        self.push(TokenKind::External { locator, text }, start);
        Ok(())
    }

    fn lex_number(&mut self, start: usize) -> Result<(), FormulaError> {
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mut ahead = 1;
            if matches!(self.peek_at(1), Some(b'+' | b'-')) {
                ahead = 2;
            }
            if matches!(self.peek_at(ahead), Some(b'0'..=b'9')) {
                self.pos += ahead;
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
            }
        }
        let text = &self.input[start..self.pos];
        let value: f64 = text
            .parse()
            .map_err(|_| self.err(start, format!("malformed number {text:?}")))?;
        self.push(TokenKind::Number(value), start);
        Ok(())
    }

    /// Lexes a `$`/letter/digit run and classifies it as a cell reference
    /// or an identifier.
    fn lex_word(&mut self, start: usize) -> Result<(), FormulaError> {
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b'$' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let word = &self.input[start..self.pos];
        if let Some(kind) = classify_cell_ref(word) {
            self.push(kind, start);
            return Ok(());
        }
        if !word.contains('$') {
            self.push(TokenKind::Ident(word.to_string()), start);
            return Ok(());
        }
        // A `$` is only legal inside a cell reference or on a column/row
        // range endpoint ($A:$A, $1:$2).
        let bare = word.trim_start_matches('$');
        let range_context = self.peek() == Some(b':')
            || matches!(self.tokens.last().map(|t| &t.kind), Some(TokenKind::Colon));
        if range_context && !bare.is_empty() && !bare.contains('$') {
            if bare.chars().all(|c| c.is_ascii_alphabetic()) {
                self.push(TokenKind::Ident(bare.to_string()), start);
                return Ok(());
            }
            if bare.chars().all(|c| c.is_ascii_digit()) {
                let value: f64 = bare
                    .parse()
                    .map_err(|_| self.err(start, "malformed row number"))?;
                self.push(TokenKind::Number(value), start);
                return Ok(());
            }
        }
        Err(self.err(start, format!("unexpected '$' in {word:?}")))
    }
}

/// Classifies a word as an A1 cell reference when it matches
/// `$?letters{1,3}$?digits` and lies inside the grid.
fn classify_cell_ref(word: &str) -> Option<TokenKind> {
    let bytes = word.as_bytes();
    let mut pos = 0;
    let abs_col = bytes.first() == Some(&b'$');
    if abs_col {
        pos += 1;
    }
    let letter_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() {
        pos += 1;
    }
    let letters = &word[letter_start..pos];
    if letters.is_empty() || letters.len() > 3 {
        return None;
    }
    let abs_row = bytes.get(pos) == Some(&b'$');
    if abs_row {
        pos += 1;
    }
    let digit_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    if pos != bytes.len() || digit_start == pos {
        return None;
    }
    let column = column_index(letters)?;
    let row: u32 = word[digit_start..].parse().ok()?;
    if row == 0 || row > MAX_ROWS {
        return None;
    }
    Some(TokenKind::CellRef {
        abs_col,
        column,
        abs_row,
        row,
    })
}
