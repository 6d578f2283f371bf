//! Formula text analysis: lexing, parsing, reference extraction, and the
//! structural triviality test used on report-page formulas.

mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{quote_sheet_name, CellAddress, Region, MAX_COLUMNS, MAX_ROWS};

pub use lexer::{lex, Token, TokenKind};
pub use parser::parse_formula;

/// Default ceiling on expanding one range reference into member cells.
/// Larger ranges (whole columns, whole rows) are kept region-level.
pub const DEFAULT_RANGE_CAP: usize = 65_536;

/// A positioned formula error; `offset` is a byte offset into the body text.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at offset {offset}: {message}")]
pub struct FormulaError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Concat => "&",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 1,
            BinaryOp::Concat => 2,
            BinaryOp::Add | BinaryOp::Sub => 3,
            BinaryOp::Mul | BinaryOp::Div => 4,
            BinaryOp::Pow => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
    Percent,
}

/// Parse tree of one formula body.
#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Number(f64),
    Text(String),
    Bool(bool),
    Error(String),
    CellRef {
        addr: CellAddress,
        /// Whether the source spelled out the sheet qualifier. Rendering
        /// preserves this so messages cite formulas the way they were written.
        explicit_sheet: bool,
    },
    RangeRef {
        region: Region,
        explicit_sheet: bool,
    },
    NameRef {
        name: String,
        /// Resolved target, when the name was known at parse time.
        target: Option<Region>,
    },
    Call {
        name: String,
        args: Vec<Ast>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Ast>,
        rhs: Box<Ast>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Ast>,
    },
    External {
        locator: String,
        text: String,
    },
}

impl Ast {
    /// Tree depth; a bare reference or literal has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Ast::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
            Ast::Unary { operand, .. } => 1 + operand.depth(),
            Ast::Call { args, .. } => {
                1 + args.iter().map(Ast::depth).max().unwrap_or(0)
            }
            _ => 1,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Ast::Binary { op, .. } => op.precedence(),
            Ast::Unary {
                op: UnaryOp::Percent,
                ..
            } => 7,
            Ast::Unary { .. } => 5,
            _ => 8,
        }
    }
}

fn render(ast: &Ast, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = |f: &mut fmt::Formatter<'_>, child: &Ast, needed: bool| -> fmt::Result {
        if needed {
            write!(f, "(")?;
            render(child, f)?;
            write!(f, ")")
        } else {
            render(child, f)
        }
    };
    match ast {
        Ast::Number(v) => write!(f, "{v}"),
        Ast::Text(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
        Ast::Bool(true) => write!(f, "TRUE"),
        Ast::Bool(false) => write!(f, "FALSE"),
        Ast::Error(e) => write!(f, "{e}"),
        Ast::CellRef {
            addr,
            explicit_sheet,
        } => {
            if *explicit_sheet {
                write!(f, "{}!{}", quote_sheet_name(&addr.sheet), addr.to_a1())
            } else {
                write!(f, "{}", addr.to_a1())
            }
        }
        Ast::RangeRef {
            region,
            explicit_sheet,
        } => {
            let body = render_region_body(region);
            if *explicit_sheet {
                write!(f, "{}!{}", quote_sheet_name(region.sheet()), body)
            } else {
                write!(f, "{body}")
            }
        }
        Ast::NameRef { name, .. } => write!(f, "{name}"),
        Ast::Call { name, args } => {
            write!(f, "{name}(")?;
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                render(arg, f)?;
            }
            write!(f, ")")
        }
        Ast::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            paren(f, lhs, lhs.precedence() < prec)?;
            write!(f, "{}", op.symbol())?;
            // Operators are left-associative, so an equal-precedence right
            // child needs parentheses to survive re-parsing.
            paren(f, rhs, rhs.precedence() <= prec)
        }
        Ast::Unary { op, operand } => match op {
            UnaryOp::Percent => {
                paren(f, operand, operand.precedence() < 7)?;
                write!(f, "%")
            }
            UnaryOp::Neg => {
                write!(f, "-")?;
                paren(f, operand, operand.precedence() < 5)
            }
            UnaryOp::Plus => {
                write!(f, "+")?;
                paren(f, operand, operand.precedence() < 5)
            }
        },
        Ast::External { text, .. } => write!(f, "{text}"),
    }
}

/// Local (unqualified) rendering of a region for formula bodies.
fn render_region_body(region: &Region) -> String {
    use crate::model::column_letters;
    match region {
        Region::WholeSheet { .. } => "*".to_string(),
        Region::Rect {
            start_column,
            start_row,
            end_column,
            end_row,
            ..
        } => {
            // Whole-column and whole-row ranges keep their compact forms.
            if *start_row == 1 && *end_row == MAX_ROWS {
                return format!(
                    "{}:{}",
                    column_letters(*start_column),
                    column_letters(*end_column)
                );
            }
            if *start_column == 1 && *end_column == MAX_COLUMNS {
                return format!("{start_row}:{end_row}");
            }
            format!(
                "{}{}:{}{}",
                column_letters(*start_column),
                start_row,
                column_letters(*end_column),
                end_row
            )
        }
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(self, f)
    }
}

/// Why part of a formula could not be resolved to concrete cell edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnanalyzableReason {
    Indirect,
    Offset,
    ExternalWorkbook,
    UnresolvedName,
    OversizedRange,
    /// The formula text failed to parse at all; used by the dependency
    /// graph, never produced by `extract_refs`.
    ParseFailure,
}

impl UnanalyzableReason {
    pub fn label(self) -> &'static str {
        match self {
            UnanalyzableReason::Indirect => "INDIRECT",
            UnanalyzableReason::Offset => "OFFSET",
            UnanalyzableReason::ExternalWorkbook => "external-workbook",
            UnanalyzableReason::UnresolvedName => "unresolved-name",
            UnanalyzableReason::OversizedRange => "oversized-range",
            UnanalyzableReason::ParseFailure => "parse-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Unanalyzable {
    pub reason: UnanalyzableReason,
    pub source: String,
}

/// Statically derivable cell precedents of one formula.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefSet {
    pub cells: BTreeSet<CellAddress>,
    pub unanalyzable: Vec<Unanalyzable>,
}

/// Walks an AST and collects every statically derivable cell reference,
/// expanding ranges up to `range_cap` member cells. Ranges beyond the cap,
/// external references, unresolved names, and the arguments of INDIRECT and
/// OFFSET are disclosed in `unanalyzable` instead of silently dropped.
pub fn extract_refs(ast: &Ast, range_cap: usize) -> RefSet {
    let mut refs = RefSet::default();
    walk_refs(ast, range_cap, &mut refs);
    refs
}

fn walk_refs(ast: &Ast, range_cap: usize, out: &mut RefSet) {
    match ast {
        Ast::CellRef { addr, .. } => {
            out.cells.insert(addr.clone());
        }
        Ast::RangeRef { region, .. } => expand_region(region, range_cap, None, out),
        Ast::NameRef { name, target } => match target {
            Some(region) => expand_region(region, range_cap, Some(name), out),
            None => out.unanalyzable.push(Unanalyzable {
                reason: UnanalyzableReason::UnresolvedName,
                source: name.clone(),
            }),
        },
        Ast::Call { name, args } => {
            let reason = if name.eq_ignore_ascii_case("INDIRECT") {
                Some(UnanalyzableReason::Indirect)
            } else if name.eq_ignore_ascii_case("OFFSET") {
                Some(UnanalyzableReason::Offset)
            } else {
                None
            };
            if let Some(reason) = reason {
                let source = args
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                out.unanalyzable.push(Unanalyzable { reason, source });
            }
            // Arguments still contribute their static references; INDIRECT(C1)
            // reads C1 even though the indirection target is unknowable.
            for arg in args {
                walk_refs(arg, range_cap, out);
            }
        }
        Ast::Binary { lhs, rhs, .. } => {
            walk_refs(lhs, range_cap, out);
            walk_refs(rhs, range_cap, out);
        }
        Ast::Unary { operand, .. } => walk_refs(operand, range_cap, out),
        Ast::External { text, .. } => out.unanalyzable.push(Unanalyzable {
            reason: UnanalyzableReason::ExternalWorkbook,
            source: text.clone(),
        }),
        Ast::Number(_) | Ast::Text(_) | Ast::Bool(_) | Ast::Error(_) => {}
    }
}

fn expand_region(region: &Region, range_cap: usize, name: Option<&str>, out: &mut RefSet) {
    let oversized = |out: &mut RefSet| {
        out.unanalyzable.push(Unanalyzable {
            reason: UnanalyzableReason::OversizedRange,
            source: name
                .map(str::to_string)
                .unwrap_or_else(|| region.to_string()),
        });
    };
    match region.cell_count() {
        Some(n) if n as usize <= range_cap => {
            out.cells.extend(region.cells());
        }
        _ => oversized(out),
    }
}

/// True when the formula is a pure link or an allowlisted presentational
/// wrapper around one: (a) a single cell reference, or (b) one call to an
/// allowlisted function whose arguments are exactly one cell or range
/// reference plus optional literals.
///
/// `allowlist` entries are compared case-insensitively.
pub fn is_trivial(ast: &Ast, allowlist: &BTreeSet<String>) -> bool {
    match ast {
        Ast::CellRef { .. } => true,
        Ast::Call { name, args } => {
            if !allowlist
                .iter()
                .any(|allowed| allowed.eq_ignore_ascii_case(name))
            {
                return false;
            }
            let mut ref_args = 0usize;
            for arg in args {
                match arg {
                    Ast::CellRef { .. } | Ast::RangeRef { .. } => ref_args += 1,
                    Ast::Number(_) | Ast::Text(_) | Ast::Bool(_) | Ast::Error(_) => {}
                    _ => return false,
                }
            }
            ref_args == 1
        }
        _ => false,
    }
}

/// Rewrites relative cell references in `text` by the given row/column
/// deltas, preserving absolute markers and all other source text verbatim.
/// References pushed off the grid become "#REF!". Used to expand shared
/// formulas to their member cells.
pub fn shift_references(text: &str, delta_row: i64, delta_col: i64) -> Result<String, FormulaError> {
    use crate::model::column_letters;
    let tokens = lex(text)?;
    let mut output = String::with_capacity(text.len());
    let mut cursor = 0usize;
    for tok in &tokens {
        if let TokenKind::CellRef {
            abs_col,
            column,
            abs_row,
            row,
        } = tok.kind
        {
            output.push_str(&text[cursor..tok.start]);
            let new_col = if abs_col {
                column as i64
            } else {
                column as i64 + delta_col
            };
            let new_row = if abs_row {
                row as i64
            } else {
                row as i64 + delta_row
            };
            if new_col < 1
                || new_col > MAX_COLUMNS as i64
                || new_row < 1
                || new_row > MAX_ROWS as i64
            {
                output.push_str("#REF!");
            } else {
                if abs_col {
                    output.push('$');
                }
                output.push_str(&column_letters(new_col as u32));
                if abs_row {
                    output.push('$');
                }
                output.push_str(&new_row.to_string());
            }
            cursor = tok.end();
        }
    }
    output.push_str(&text[cursor..]);
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn parse(text: &str) -> Ast {
        parse_formula(text, "S", &BTreeMap::new()).unwrap()
    }

    fn addr(sheet: &str, col: u32, row: u32) -> CellAddress {
        CellAddress::new(sheet, col, row)
    }

    #[test]
    fn precedence_of_plus_and_times() {
        let ast = parse("A1+B2*3");
        assert_eq!(
            ast,
            Ast::Binary {
                op: BinaryOp::Add,
                lhs: Box::new(Ast::CellRef {
                    addr: addr("S", 1, 1),
                    explicit_sheet: false
                }),
                rhs: Box::new(Ast::Binary {
                    op: BinaryOp::Mul,
                    lhs: Box::new(Ast::CellRef {
                        addr: addr("S", 2, 2),
                        explicit_sheet: false
                    }),
                    rhs: Box::new(Ast::Number(3.0)),
                }),
            }
        );
    }

    #[test]
    fn quoted_sheet_range_in_function() {
        let ast = parse("SUM('My Sheet'!A1:A3)");
        assert_eq!(
            ast,
            Ast::Call {
                name: "SUM".into(),
                args: vec![Ast::RangeRef {
                    region: Region::rect("My Sheet", (1, 1), (1, 3)),
                    explicit_sheet: true
                }],
            }
        );
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let ast = parse("-A1^2");
        assert_eq!(
            ast,
            Ast::Unary {
                op: UnaryOp::Neg,
                operand: Box::new(Ast::Binary {
                    op: BinaryOp::Pow,
                    lhs: Box::new(Ast::CellRef {
                        addr: addr("S", 1, 1),
                        explicit_sheet: false
                    }),
                    rhs: Box::new(Ast::Number(2.0)),
                }),
            }
        );
    }

    #[test]
    fn dangling_operator_reports_offset() {
        let err = parse_formula("A1+", "S", &BTreeMap::new()).unwrap_err();
        assert_eq!(err.offset, 3);
    }

    #[test]
    fn unbalanced_parens_report_offset() {
        let err = parse_formula("(A1+B2", "S", &BTreeMap::new()).unwrap_err();
        assert_eq!(err.offset, 6);
        let err = parse_formula("A1)", "S", &BTreeMap::new()).unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn extract_refs_basic() {
        let refs = extract_refs(&parse("A1+B2"), DEFAULT_RANGE_CAP);
        assert_eq!(
            refs.cells.into_iter().collect::<Vec<_>>(),
            vec![addr("S", 1, 1), addr("S", 2, 2)]
        );
    }

    #[test]
    fn extract_refs_expands_ranges() {
        let refs = extract_refs(&parse("SUM(A1:A3)"), DEFAULT_RANGE_CAP);
        assert_eq!(
            refs.cells.into_iter().collect::<Vec<_>>(),
            vec![addr("S", 1, 1), addr("S", 1, 2), addr("S", 1, 3)]
        );
        assert!(extract_refs(&parse("SUM(A1:A3)"), DEFAULT_RANGE_CAP)
            .unanalyzable
            .is_empty());
    }

    #[test]
    fn indirect_keeps_static_arg_and_discloses() {
        let refs = extract_refs(&parse("INDIRECT(C1)"), DEFAULT_RANGE_CAP);
        assert_eq!(
            refs.cells.into_iter().collect::<Vec<_>>(),
            vec![addr("S", 3, 1)]
        );
        assert_eq!(
            refs.unanalyzable,
            vec![Unanalyzable {
                reason: UnanalyzableReason::Indirect,
                source: "C1".into()
            }]
        );
    }

    #[test]
    fn whole_column_range_is_region_level() {
        let refs = extract_refs(&parse("SUM(A:A)"), DEFAULT_RANGE_CAP);
        assert!(refs.cells.is_empty());
        assert_eq!(
            refs.unanalyzable[0].reason,
            UnanalyzableReason::OversizedRange
        );
    }

    #[test]
    fn oversized_rect_respects_cap() {
        let refs = extract_refs(&parse("SUM(A1:A10)"), 5);
        assert!(refs.cells.is_empty());
        assert_eq!(
            refs.unanalyzable,
            vec![Unanalyzable {
                reason: UnanalyzableReason::OversizedRange,
                source: "S!A1:A10".into()
            }]
        );
    }

    #[test]
    fn external_reference_is_unanalyzable() {
        let refs = extract_refs(&parse("[Book.xlsx]Prices!A1+1"), DEFAULT_RANGE_CAP);
        assert!(refs.cells.is_empty());
        assert_eq!(
            refs.unanalyzable[0].reason,
            UnanalyzableReason::ExternalWorkbook
        );
    }

    #[test]
    fn name_resolution() {
        let mut names = BTreeMap::new();
        names.insert("Rates".to_string(), Region::rect("S", (1, 1), (1, 2)));
        let ast = parse_formula("SUM(rates)", "S", &names).unwrap();
        let refs = extract_refs(&ast, DEFAULT_RANGE_CAP);
        assert_eq!(refs.cells.len(), 2);

        let ast = parse_formula("SUM(unknown)", "S", &names).unwrap();
        let refs = extract_refs(&ast, DEFAULT_RANGE_CAP);
        assert_eq!(
            refs.unanalyzable,
            vec![Unanalyzable {
                reason: UnanalyzableReason::UnresolvedName,
                source: "unknown".into()
            }]
        );
    }

    #[test]
    fn triviality_cases() {
        let allow: BTreeSet<String> =
            ["ROUND", "TEXT", "ABS"].iter().map(|s| s.to_string()).collect();
        assert!(is_trivial(&parse("Calc!B9"), &allow));
        assert!(is_trivial(&parse("ROUND(Calc!B9, 2)"), &allow));
        assert!(!is_trivial(&parse("Calc!B9 + Calc!C9"), &allow));
        assert!(!is_trivial(&parse("SUM(Calc!B9:B12)"), &allow));
        assert!(!is_trivial(&parse("ROUND(Calc!B9, Calc!C9)"), &allow));
        assert!(!is_trivial(&parse("ROUND(ABS(Calc!B9), 2)"), &allow));
        assert!(!is_trivial(&parse("42"), &allow));
    }

    #[test]
    fn shift_preserves_absolute_markers() {
        assert_eq!(shift_references("$A$1+B2", 1, 1).unwrap(), "$A$1+C3");
        assert_eq!(shift_references("A$1+$B2", 2, 3).unwrap(), "D$1+$B4");
        assert_eq!(
            shift_references("SUM(Data!A1:A3)*2", 1, 0).unwrap(),
            "SUM(Data!A2:A4)*2"
        );
    }

    #[test]
    fn shift_off_grid_becomes_ref_error() {
        assert_eq!(shift_references("A1+B2", -1, 0).unwrap(), "#REF!+B1");
    }

    #[test]
    fn depth_of_bare_reference_is_one() {
        assert_eq!(parse("A1").depth(), 1);
        assert_eq!(parse("A1+1").depth(), 2);
        assert_eq!(parse("SUM(A1+1, 2)").depth(), 3);
    }

    #[test]
    fn render_preserves_structure() {
        for text in [
            "A1+B2*3",
            "-A1^2",
            "(A1+B2)*C3",
            "A1&\" units\"",
            "ROUND('My Sheet'!B9, 2)",
            "2^-3",
            "A1%",
            "(A1+B2)%",
            "A1-(B2-C3)",
            "IF(A1>=2, \"hi\", FALSE)",
        ] {
            let ast = parse(text);
            let rendered = ast.to_string();
            let reparsed = parse(&rendered);
            assert_eq!(reparsed, ast, "render of {text:?} was {rendered:?}");
        }
    }
}
