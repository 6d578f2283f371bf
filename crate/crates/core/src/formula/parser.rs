//! Recursive descent parser for formula bodies.
//!
//! Operator precedence, loosest binding first: comparisons, `&`, `+ -`,
//! `* /`, prefix `- +`, `^`, postfix `%`. Prefix minus deliberately binds
//! looser than `^`, so `-A1^2` means `-(A1^2)`; spreadsheet applications
//! disagree with mathematical convention here and with each other, so the
//! choice is pinned and documented rather than inherited.

use std::collections::BTreeMap;

use crate::formula::lexer::{lex, Token, TokenKind};
use crate::formula::{Ast, BinaryOp, FormulaError, UnaryOp};
use crate::model::{column_index, CellAddress, Region, MAX_COLUMNS, MAX_ROWS};

pub fn parse_formula(
    text: &str,
    default_sheet: &str,
    defined_names: &BTreeMap<String, Region>,
) -> Result<Ast, FormulaError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        input: text,
        tokens,
        pos: 0,
        default_sheet,
        defined_names,
    };
    let ast = parser.expression()?;
    if let Some(tok) = parser.current() {
        return Err(parser.err_at(tok.start, format!("unexpected {}", parser.describe(tok))));
    }
    Ok(ast)
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    default_sheet: &'a str,
    defined_names: &'a BTreeMap<String, Region>,
}

impl<'a> Parser<'a> {
    fn current(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.current().map(|t| &t.kind)
    }

    fn peek_kind_at(&self, off: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + off).map(|t| &t.kind)
    }

    fn advance(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn err_at(&self, offset: usize, message: impl Into<String>) -> FormulaError {
        FormulaError {
            offset,
            message: message.into(),
        }
    }

    fn err_here(&self, message: impl Into<String>) -> FormulaError {
        let offset = self
            .current()
            .map(|t| t.start)
            .unwrap_or_else(|| self.input.len());
        self.err_at(offset, message)
    }

    fn describe(&self, tok: &Token) -> String {
        format!("'{}'", &self.input[tok.start..tok.end()])
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, FormulaError> {
        match self.current() {
            Some(tok) if tok.kind == kind => Ok(self.advance().unwrap()),
            Some(tok) => {
                let d = self.describe(tok);
                Err(self.err_at(tok.start, format!("expected {what}, found {d}")))
            }
            None => Err(self.err_here(format!("expected {what} at end of formula"))),
        }
    }

    // expression := concat (cmp concat)*
    fn expression(&mut self) -> Result<Ast, FormulaError> {
        let mut lhs = self.concat()?;
        while let Some(op) = match self.peek_kind() {
            Some(TokenKind::Eq) => Some(BinaryOp::Eq),
            Some(TokenKind::Ne) => Some(BinaryOp::Ne),
            Some(TokenKind::Lt) => Some(BinaryOp::Lt),
            Some(TokenKind::Le) => Some(BinaryOp::Le),
            Some(TokenKind::Gt) => Some(BinaryOp::Gt),
            Some(TokenKind::Ge) => Some(BinaryOp::Ge),
            _ => None,
        } {
            self.advance();
            let rhs = self.concat()?;
            lhs = Ast::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn concat(&mut self) -> Result<Ast, FormulaError> {
        let mut lhs = self.additive()?;
        while self.peek_kind() == Some(&TokenKind::Amp) {
            self.advance();
            let rhs = self.additive()?;
            lhs = Ast::Binary {
                op: BinaryOp::Concat,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Ast, FormulaError> {
        let mut lhs = self.multiplicative()?;
        while let Some(op) = match self.peek_kind() {
            Some(TokenKind::Plus) => Some(BinaryOp::Add),
            Some(TokenKind::Minus) => Some(BinaryOp::Sub),
            _ => None,
        } {
            self.advance();
            let rhs = self.multiplicative()?;
            lhs = Ast::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Ast, FormulaError> {
        let mut lhs = self.unary()?;
        while let Some(op) = match self.peek_kind() {
            Some(TokenKind::Star) => Some(BinaryOp::Mul),
            Some(TokenKind::Slash) => Some(BinaryOp::Div),
            _ => None,
        } {
            self.advance();
            let rhs = self.unary()?;
            lhs = Ast::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    // unary := ('-' | '+')* power
    fn unary(&mut self) -> Result<Ast, FormulaError> {
        match self.peek_kind() {
            Some(TokenKind::Minus) => {
                self.advance();
                let operand = self.unary()?;
                Ok(Ast::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(operand),
                })
            }
            Some(TokenKind::Plus) => {
                self.advance();
                let operand = self.unary()?;
                Ok(Ast::Unary {
                    op: UnaryOp::Plus,
                    operand: Box::new(operand),
                })
            }
            _ => self.power(),
        }
    }

    // power := postfix ('^' caret_rhs)*, left-associative
    fn power(&mut self) -> Result<Ast, FormulaError> {
        let mut lhs = self.postfix()?;
        while self.peek_kind() == Some(&TokenKind::Caret) {
            self.advance();
            let rhs = self.caret_rhs()?;
            lhs = Ast::Binary {
                op: BinaryOp::Pow,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    // The right side of '^' admits a sign, so 2^-3 parses.
    fn caret_rhs(&mut self) -> Result<Ast, FormulaError> {
        match self.peek_kind() {
            Some(TokenKind::Minus) => {
                self.advance();
                let operand = self.caret_rhs()?;
                Ok(Ast::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(operand),
                })
            }
            Some(TokenKind::Plus) => {
                self.advance();
                let operand = self.caret_rhs()?;
                Ok(Ast::Unary {
                    op: UnaryOp::Plus,
                    operand: Box::new(operand),
                })
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Ast, FormulaError> {
        let mut node = self.primary()?;
        while self.peek_kind() == Some(&TokenKind::Percent) {
            self.advance();
            node = Ast::Unary {
                op: UnaryOp::Percent,
                operand: Box::new(node),
            };
        }
        Ok(node)
    }

    fn primary(&mut self) -> Result<Ast, FormulaError> {
        let tok = match self.current() {
            Some(t) => t.clone(),
            None => return Err(self.err_here("unexpected end of formula")),
        };
        match &tok.kind {
            TokenKind::Number(v) => {
                self.advance();
                if self.peek_kind() == Some(&TokenKind::Colon) {
                    return self.row_range(*v, &tok, None);
                }
                Ok(Ast::Number(*v))
            }
            TokenKind::Text(s) => {
                self.advance();
                Ok(Ast::Text(s.clone()))
            }
            TokenKind::ErrorLit(s) => {
                self.advance();
                Ok(Ast::Error(s.clone()))
            }
            TokenKind::External { locator, text } => {
                self.advance();
                Ok(Ast::External {
                    locator: locator.clone(),
                    text: text.clone(),
                })
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expression()?;
                self.expect(TokenKind::RParen, "')'")?;
                Ok(inner)
            }
            TokenKind::QuotedName(name) => {
                self.advance();
                if let Some(rest) = name.strip_prefix('[') {
                    // '[Book.xlsx]Sheet'!A1 form.
                    return self.quoted_external(&tok, rest);
                }
                self.expect(TokenKind::Bang, "'!' after sheet name")?;
                self.qualified_ref(name.clone())
            }
            TokenKind::Ident(name) => {
                let name = name.clone();
                self.advance();
                match self.peek_kind() {
                    Some(TokenKind::LParen) => self.function_call(name),
                    Some(TokenKind::Bang) => {
                        self.advance();
                        self.qualified_ref(name)
                    }
                    Some(TokenKind::Colon) => self.column_range(&name, &tok, None),
                    _ => {
                        if name.eq_ignore_ascii_case("TRUE") {
                            return Ok(Ast::Bool(true));
                        }
                        if name.eq_ignore_ascii_case("FALSE") {
                            return Ok(Ast::Bool(false));
                        }
                        Ok(self.name_ref(name))
                    }
                }
            }
            TokenKind::CellRef { column, row, .. } => {
                let (column, row) = (*column, *row);
                self.advance();
                match self.peek_kind() {
                    // Words like LOG10 fit the reference pattern but name a
                    // function when '(' follows.
                    Some(TokenKind::LParen) => {
                        let name = self.input[tok.start..tok.end()].to_string();
                        if name.contains('$') {
                            return Err(self
                                .err_at(tok.start, format!("unexpected '$' in {name:?}")));
                        }
                        self.function_call(name)
                    }
                    Some(TokenKind::Bang) => {
                        // A sheet whose name happens to look like a cell
                        // reference, e.g. "A1!B2".
                        let sheet = self.input[tok.start..tok.end()]
                            .trim_matches('$')
                            .to_string();
                        self.advance();
                        self.qualified_ref(sheet)
                    }
                    Some(TokenKind::Colon) => {
                        self.advance();
                        let (end, _) = self.range_endpoint(None)?;
                        Ok(Ast::RangeRef {
                            region: Region::rect(
                                self.default_sheet,
                                (column, row),
                                (end.column, end.row),
                            ),
                            explicit_sheet: false,
                        })
                    }
                    _ => Ok(Ast::CellRef {
                        addr: CellAddress::new(self.default_sheet, column, row),
                        explicit_sheet: false,
                    }),
                }
            }
            other => Err(self.err_at(
                tok.start,
                format!("unexpected {}", {
                    let _ = other;
                    self.describe(&tok)
                }),
            )),
        }
    }

    fn name_ref(&self, name: String) -> Ast {
        let target = self
            .defined_names
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(&name))
            .map(|(_, r)| r.clone());
        Ast::NameRef { name, target }
    }

    fn function_call(&mut self, name: String) -> Result<Ast, FormulaError> {
        self.expect(TokenKind::LParen, "'('")?;
        let mut args = Vec::new();
        if self.peek_kind() == Some(&TokenKind::RParen) {
            self.advance();
            return Ok(Ast::Call { name, args });
        }
        loop {
            args.push(self.expression()?);
            match self.peek_kind() {
                Some(TokenKind::Comma) => {
                    self.advance();
                }
                Some(TokenKind::RParen) => {
                    self.advance();
                    return Ok(Ast::Call { name, args });
                }
                _ => return Err(self.err_here("expected ',' or ')' in argument list")),
            }
        }
    }

    /// Local reference following `<sheet>!`: a cell, a cell range, a column
    /// range, or a row range.
    fn qualified_ref(&mut self, sheet: String) -> Result<Ast, FormulaError> {
        let tok = match self.current() {
            Some(t) => t.clone(),
            None => return Err(self.err_here("expected reference after '!'")),
        };
        match &tok.kind {
            TokenKind::CellRef { column, row, .. } => {
                let (column, row) = (*column, *row);
                self.advance();
                if self.peek_kind() == Some(&TokenKind::Colon) {
                    self.advance();
                    let (end, _) = self.range_endpoint(Some(&sheet))?;
                    return Ok(Ast::RangeRef {
                        region: Region::rect(sheet, (column, row), (end.column, end.row)),
                        explicit_sheet: true,
                    });
                }
                Ok(Ast::CellRef {
                    addr: CellAddress::new(sheet, column, row),
                    explicit_sheet: true,
                })
            }
            TokenKind::Ident(word) => {
                let word = word.clone();
                self.advance();
                self.column_range(&word, &tok, Some(sheet))
            }
            TokenKind::Number(v) => {
                let v = *v;
                self.advance();
                self.row_range(v, &tok, Some(sheet))
            }
            _ => {
                let d = self.describe(&tok);
                Err(self.err_at(tok.start, format!("expected reference after '!', found {d}")))
            }
        }
    }

    /// Range endpoint after a ':'. Accepts an optional sheet qualifier,
    /// which must name the same sheet as the start of the range.
    fn range_endpoint(
        &mut self,
        sheet: Option<&str>,
    ) -> Result<(CellAddress, bool), FormulaError> {
        let expected_sheet = sheet.unwrap_or(self.default_sheet);
        let mut explicit = false;
        let qualifier = match self.peek_kind() {
            Some(TokenKind::QuotedName(n)) if self.peek_kind_at(1) == Some(&TokenKind::Bang) => {
                Some(n.clone())
            }
            Some(TokenKind::Ident(n)) if self.peek_kind_at(1) == Some(&TokenKind::Bang) => {
                Some(n.clone())
            }
            _ => None,
        };
        if let Some(name) = qualifier {
            if !name.eq_ignore_ascii_case(expected_sheet) {
                let offset = self.current().map(|t| t.start).unwrap_or(0);
                return Err(self.err_at(
                    offset,
                    "range endpoints must be on the same sheet (3-D references are not supported)",
                ));
            }
            self.advance();
            self.advance();
            explicit = true;
        }
        match self.current().cloned() {
            Some(Token {
                kind: TokenKind::CellRef { column, row, .. },
                ..
            }) => {
                self.advance();
                Ok((CellAddress::new(expected_sheet, column, row), explicit))
            }
            Some(tok) => {
                let d = self.describe(&tok);
                Err(self.err_at(tok.start, format!("expected cell reference after ':', found {d}")))
            }
            None => Err(self.err_here("expected cell reference after ':'")),
        }
    }

    /// `A:B` style whole-column range. `word` is the already-consumed left
    /// endpoint; the current token is the ':'.
    fn column_range(
        &mut self,
        word: &str,
        tok: &Token,
        sheet: Option<String>,
    ) -> Result<Ast, FormulaError> {
        let start_col = match valid_column_letters(word) {
            Some(c) => c,
            None => {
                // Not a column; an identifier followed by ':' is either an
                // attempted 3-D reference or plain nonsense.
                if matches!(self.peek_kind_at(1), Some(TokenKind::Ident(_) | TokenKind::QuotedName(_)))
                    && self.peek_kind_at(2) == Some(&TokenKind::Bang)
                {
                    return Err(
                        self.err_at(tok.start, "3-D references are not supported")
                    );
                }
                return Err(self.err_at(
                    tok.start,
                    format!("'{word}' is not a column reference"),
                ));
            }
        };
        self.expect(TokenKind::Colon, "':'")?;
        let end_tok = match self.current().cloned() {
            Some(t) => t,
            None => return Err(self.err_here("expected column letters after ':'")),
        };
        let end_col = match &end_tok.kind {
            TokenKind::Ident(w) => valid_column_letters(w),
            _ => None,
        }
        .ok_or_else(|| self.err_at(end_tok.start, "expected column letters after ':'"))?;
        self.advance();
        Ok(Ast::RangeRef {
            region: Region::rect(
                sheet.clone().unwrap_or_else(|| self.default_sheet.to_string()),
                (start_col, 1),
                (end_col, MAX_ROWS),
            ),
            explicit_sheet: sheet.is_some(),
        })
    }

    /// `1:3` style whole-row range. `start` is the already-consumed left
    /// endpoint.
    fn row_range(
        &mut self,
        start: f64,
        tok: &Token,
        sheet: Option<String>,
    ) -> Result<Ast, FormulaError> {
        let start_row = valid_row_number(start)
            .ok_or_else(|| self.err_at(tok.start, "row range endpoint out of bounds"))?;
        self.expect(TokenKind::Colon, "':'")?;
        let end_tok = match self.current().cloned() {
            Some(t) => t,
            None => return Err(self.err_here("expected row number after ':'")),
        };
        let end_row = match end_tok.kind {
            TokenKind::Number(v) => valid_row_number(v),
            _ => None,
        }
        .ok_or_else(|| self.err_at(end_tok.start, "expected row number after ':'"))?;
        self.advance();
        Ok(Ast::RangeRef {
            region: Region::rect(
                sheet.clone().unwrap_or_else(|| self.default_sheet.to_string()),
                (1, start_row),
                (MAX_COLUMNS, end_row),
            ),
            explicit_sheet: sheet.is_some(),
        })
    }

    /// External reference written as a quoted name: '[Book]Sheet'!A1.
    fn quoted_external(&mut self, qtok: &Token, content: &str) -> Result<Ast, FormulaError> {
        let locator = match content.split_once(']') {
            Some((loc, _)) if !loc.is_empty() => loc.to_string(),
            _ => {
                return Err(self.err_at(qtok.start, "malformed external workbook locator"));
            }
        };
        self.expect(TokenKind::Bang, "'!' after external sheet name")?;
        let end = match self.current().cloned() {
            Some(Token {
                kind: TokenKind::CellRef { .. },
                ..
            }) => {
                let first = self.advance().unwrap();
                if self.peek_kind() == Some(&TokenKind::Colon) {
                    self.advance();
                    match self.current().cloned() {
                        Some(Token {
                            kind: TokenKind::CellRef { .. },
                            ..
                        }) => self.advance().unwrap().end(),
                        _ => return Err(self.err_here("expected cell reference after ':'")),
                    }
                } else {
                    first.end()
                }
            }
            _ => return Err(self.err_here("expected cell reference in external reference")),
        };
        Ok(Ast::External {
            locator,
            text: self.input[qtok.start..end].to_string(),
        })
    }
}

fn valid_column_letters(word: &str) -> Option<u32> {
    if word.is_empty() || word.len() > 3 || !word.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    column_index(word)
}

fn valid_row_number(v: f64) -> Option<u32> {
    if v.fract() != 0.0 || v < 1.0 || v > MAX_ROWS as f64 {
        return None;
    }
    Some(v as u32)
}
