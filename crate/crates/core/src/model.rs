//! In-memory representation of a workbook artifact.
//!
//! A [`Workbook`] is an immutable, sparse grid: only non-blank cells are
//! stored, and reads of unstored addresses synthesize [`CellValue::Blank`].
//! Construction goes through [`WorkbookBuilder`], which enforces unique
//! sheet names (case-insensitive) and unique cell addresses.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Grid bounds of the xlsx format: column "XFD", row 1048576.
pub const MAX_COLUMNS: u32 = 16_384;
pub const MAX_ROWS: u32 = 1_048_576;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("cannot parse address {text:?}: {reason}")]
    AddressParse { text: String, reason: String },
    #[error("cannot parse region {text:?}: {reason}")]
    RegionParse { text: String, reason: String },
    #[error("duplicate sheet name {0:?}")]
    DuplicateSheet(String),
    #[error("duplicate cell at {0}")]
    DuplicateCell(String),
    #[error("unknown sheet {0:?}")]
    UnknownSheet(String),
    #[error("formula at {0} is empty")]
    EmptyFormula(String),
}

/// A 1-based cell coordinate, qualified by sheet name.
///
/// Ordering is (sheet, row, column), i.e. row-major reading order within a
/// sheet, which keeps downstream iteration and reporting deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellAddress {
    pub sheet: String,
    pub row: u32,
    pub column: u32,
}

impl CellAddress {
    pub fn new(sheet: impl Into<String>, column: u32, row: u32) -> Self {
        let addr = CellAddress {
            sheet: sheet.into(),
            row,
            column,
        };
        debug_assert!(addr.column >= 1 && addr.row >= 1);
        addr
    }

    /// Renders to local A1 notation without the sheet qualifier, e.g. "B3".
    pub fn to_a1(&self) -> String {
        format!("{}{}", column_letters(self.column), self.row)
    }

    /// Renders to sheet-qualified A1 notation, quoting the sheet name when
    /// it contains characters that would not survive re-parsing bare.
    pub fn to_qualified_a1(&self) -> String {
        format!("{}!{}", quote_sheet_name(&self.sheet), self.to_a1())
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_qualified_a1())
    }
}

/// Converts a 1-based column index to its letter form (1 -> "A", 27 -> "AA").
pub fn column_letters(mut column: u32) -> String {
    debug_assert!(column >= 1);
    let mut letters = Vec::new();
    while column > 0 {
        let rem = (column - 1) % 26;
        letters.push((b'A' + rem as u8) as char);
        column = (column - 1) / 26;
    }
    letters.iter().rev().collect()
}

/// Converts column letters to the 1-based index ("A" -> 1, "AA" -> 27).
/// Returns None for empty input or an index beyond the grid.
pub fn column_index(letters: &str) -> Option<u32> {
    if letters.is_empty() {
        return None;
    }
    let mut column: u64 = 0;
    for ch in letters.chars() {
        if !ch.is_ascii_alphabetic() {
            return None;
        }
        column = column * 26 + (ch.to_ascii_uppercase() as u64 - 'A' as u64 + 1);
        if column > MAX_COLUMNS as u64 {
            return None;
        }
    }
    Some(column as u32)
}

/// True when a sheet name can appear unquoted in A1 notation.
fn is_bare_sheet_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        && !name.chars().next().unwrap().is_ascii_digit()
}

/// Quotes a sheet name for A1 notation when required ("My Sheet" -> "'My Sheet'").
pub fn quote_sheet_name(name: &str) -> String {
    if is_bare_sheet_name(name) {
        name.to_string()
    } else {
        format!("'{}'", name.replace('\'', "''"))
    }
}

/// Parses A1 notation into a [`CellAddress`].
///
/// Absolute markers (`$`) are accepted and discarded. Sheet-qualified forms
/// (`Sheet2!B3`, `'My Sheet'!B3`) resolve the sheet part; unqualified input
/// falls back to `default_sheet`.
pub fn parse_a1(text: &str, default_sheet: &str) -> Result<CellAddress, ModelError> {
    let err = |reason: &str| ModelError::AddressParse {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    if text.is_empty() {
        return Err(err("empty address"));
    }

    let (sheet, local) = split_sheet_qualifier(text)
        .map_err(|reason| err(&reason))?
        .map_or((default_sheet.to_string(), text), |(s, rest)| (s, rest));

    let mut chars = local.chars().peekable();
    if chars.peek() == Some(&'$') {
        chars.next();
    }
    let mut letters = String::new();
    while let Some(c) = chars.peek() {
        if c.is_ascii_alphabetic() {
            letters.push(*c);
            chars.next();
        } else {
            break;
        }
    }
    if letters.is_empty() {
        return Err(err("no column letters"));
    }
    if chars.peek() == Some(&'$') {
        chars.next();
    }
    let digits: String = chars.collect();
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(err("missing or malformed row number"));
    }
    let column = column_index(&letters)
        .ok_or_else(|| err(&format!("column {letters:?} is outside the grid")))?;
    let row: u32 = digits
        .parse()
        .map_err(|_| err("row number out of range"))?;
    if row == 0 {
        return Err(err("row must be at least 1"));
    }
    if row > MAX_ROWS {
        return Err(err(&format!("row {row} is outside the grid")));
    }
    Ok(CellAddress::new(sheet, column, row))
}

/// Splits an optional sheet qualifier off an A1 or region string.
/// Returns Ok(None) when no `!` separates a sheet part.
pub(crate) fn split_sheet_qualifier(text: &str) -> Result<Option<(String, &str)>, String> {
    if let Some(rest) = text.strip_prefix('\'') {
        // Quoted sheet name; embedded quotes are doubled.
        let mut name = String::new();
        let mut chars = rest.char_indices().peekable();
        loop {
            match chars.next() {
                Some((i, '\'')) => {
                    if let Some(&(_, '\'')) = chars.peek() {
                        chars.next();
                        name.push('\'');
                    } else {
                        let after = &rest[i + 1..];
                        let local = after
                            .strip_prefix('!')
                            .ok_or_else(|| "expected '!' after quoted sheet name".to_string())?;
                        if name.is_empty() {
                            return Err("empty sheet name".to_string());
                        }
                        return Ok(Some((name, local)));
                    }
                }
                Some((_, c)) => name.push(c),
                None => return Err("unterminated quote in sheet name".to_string()),
            }
        }
    }
    match text.find('!') {
        Some(pos) => {
            let name = &text[..pos];
            if name.is_empty() {
                return Err("empty sheet name".to_string());
            }
            Ok(Some((name.to_string(), &text[pos + 1..])))
        }
        None => Ok(None),
    }
}

/// A rectangular block of cells, or an entire sheet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Rect {
        sheet: String,
        start_column: u32,
        start_row: u32,
        end_column: u32,
        end_row: u32,
    },
    WholeSheet { sheet: String },
}

impl Region {
    /// Builds a rectangle from two corners; corners may come in any order.
    pub fn rect(sheet: impl Into<String>, c1: (u32, u32), c2: (u32, u32)) -> Region {
        let (col_a, row_a) = c1;
        let (col_b, row_b) = c2;
        Region::Rect {
            sheet: sheet.into(),
            start_column: col_a.min(col_b),
            start_row: row_a.min(row_b),
            end_column: col_a.max(col_b),
            end_row: row_a.max(row_b),
        }
    }

    pub fn whole_sheet(sheet: impl Into<String>) -> Region {
        Region::WholeSheet {
            sheet: sheet.into(),
        }
    }

    pub fn single(addr: &CellAddress) -> Region {
        Region::rect(
            addr.sheet.clone(),
            (addr.column, addr.row),
            (addr.column, addr.row),
        )
    }

    pub fn sheet(&self) -> &str {
        match self {
            Region::Rect { sheet, .. } | Region::WholeSheet { sheet } => sheet,
        }
    }

    /// Membership test. Whole-sheet regions match every address on the sheet.
    /// Sheet names compare case-insensitively, as everywhere in the model.
    pub fn contains(&self, addr: &CellAddress) -> bool {
        match self {
            Region::WholeSheet { sheet } => sheet.eq_ignore_ascii_case(&addr.sheet),
            Region::Rect {
                sheet,
                start_column,
                start_row,
                end_column,
                end_row,
            } => {
                sheet.eq_ignore_ascii_case(&addr.sheet)
                    && (*start_column..=*end_column).contains(&addr.column)
                    && (*start_row..=*end_row).contains(&addr.row)
            }
        }
    }

    /// Number of cells in a rectangle; None for whole-sheet regions.
    pub fn cell_count(&self) -> Option<u64> {
        match self {
            Region::WholeSheet { .. } => None,
            Region::Rect {
                start_column,
                start_row,
                end_column,
                end_row,
                ..
            } => Some(
                (*end_column as u64 - *start_column as u64 + 1)
                    * (*end_row as u64 - *start_row as u64 + 1),
            ),
        }
    }

    /// Row-major iteration over a rectangle's addresses. Empty for
    /// whole-sheet regions, which are never expanded cell by cell.
    pub fn cells(&self) -> impl Iterator<Item = CellAddress> + '_ {
        let bounds = match self {
            Region::Rect {
                sheet,
                start_column,
                start_row,
                end_column,
                end_row,
            } => Some((
                sheet.clone(),
                *start_column,
                *start_row,
                *end_column,
                *end_row,
            )),
            Region::WholeSheet { .. } => None,
        };
        bounds
            .into_iter()
            .flat_map(|(sheet, sc, sr, ec, er)| {
                (sr..=er).flat_map(move |row| {
                    let sheet = sheet.clone();
                    (sc..=ec).map(move |col| CellAddress::new(sheet.clone(), col, row))
                })
            })
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::WholeSheet { sheet } => write!(f, "{}!*", quote_sheet_name(sheet)),
            Region::Rect {
                sheet,
                start_column,
                start_row,
                end_column,
                end_row,
            } => {
                if start_column == end_column && start_row == end_row {
                    write!(
                        f,
                        "{}!{}{}",
                        quote_sheet_name(sheet),
                        column_letters(*start_column),
                        start_row
                    )
                } else {
                    write!(
                        f,
                        "{}!{}{}:{}{}",
                        quote_sheet_name(sheet),
                        column_letters(*start_column),
                        start_row,
                        column_letters(*end_column),
                        end_row
                    )
                }
            }
        }
    }
}

/// Parses a region in `Sheet!A1:C10`, `Sheet!B2`, or `Sheet!*` form.
/// The sheet qualifier is required; `$` markers are accepted and discarded.
pub fn parse_region(text: &str) -> Result<Region, ModelError> {
    let err = |reason: &str| ModelError::RegionParse {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let (sheet, local) = split_sheet_qualifier(text)
        .map_err(|reason| err(&reason))?
        .ok_or_else(|| err("missing sheet qualifier"))?;
    if local == "*" {
        return Ok(Region::whole_sheet(sheet));
    }
    match local.split_once(':') {
        None => {
            let addr = parse_a1(local, &sheet).map_err(|e| err(&e.to_string()))?;
            Ok(Region::single(&CellAddress::new(
                sheet,
                addr.column,
                addr.row,
            )))
        }
        Some((a, b)) => {
            let start = parse_a1(a, &sheet).map_err(|e| err(&e.to_string()))?;
            let end = parse_a1(b, &sheet).map_err(|e| err(&e.to_string()))?;
            Ok(Region::rect(
                sheet,
                (start.column, start.row),
                (end.column, end.row),
            ))
        }
    }
}

/// A constant cell value. Exactly one variant, by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Number(f64),
    Text(String),
    Boolean(bool),
    Blank,
    /// A stored error text such as "#REF!".
    ErrorLiteral(String),
}

impl CellValue {
    pub fn is_text(&self) -> bool {
        matches!(self, CellValue::Text(_))
    }
}

/// Cell content: a constant, or formula source text with the leading "="
/// already stripped.
#[derive(Debug, Clone, PartialEq)]
pub enum CellContent {
    Constant(CellValue),
    Formula(String),
}

impl CellContent {
    pub fn is_formula(&self) -> bool {
        matches!(self, CellContent::Formula(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub address: CellAddress,
    pub content: CellContent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sheet {
    name: String,
    /// Keyed by (row, column): row-major reading order.
    cells: BTreeMap<(u32, u32), Cell>,
}

impl Sheet {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.values()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, column: u32, row: u32) -> Option<&Cell> {
        self.cells.get(&(row, column))
    }
}

/// The workbook artifact under analysis. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Workbook {
    sheets: Vec<Sheet>,
    defined_names: BTreeMap<String, Region>,
    pub has_pivot_tables: bool,
    pub has_autofilters: bool,
}

static BLANK: CellContent = CellContent::Constant(CellValue::Blank);

impl Workbook {
    pub fn builder() -> WorkbookBuilder {
        WorkbookBuilder::default()
    }

    pub fn sheets(&self) -> &[Sheet] {
        &self.sheets
    }

    /// Case-insensitive sheet lookup; original casing is preserved in the
    /// returned sheet.
    pub fn sheet(&self, name: &str) -> Option<&Sheet> {
        self.sheets
            .iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
    }

    /// Rewrites an address's sheet part to the stored casing, when the sheet
    /// exists. Addresses pointing at unknown sheets pass through unchanged.
    pub fn canonicalize(&self, addr: &CellAddress) -> CellAddress {
        match self.sheet(&addr.sheet) {
            Some(sheet) if sheet.name != addr.sheet => {
                CellAddress::new(sheet.name.clone(), addr.column, addr.row)
            }
            _ => addr.clone(),
        }
    }

    /// Returns the stored content at `addr`, or a synthesized blank constant
    /// for unstored addresses on a known sheet.
    pub fn lookup(&self, addr: &CellAddress) -> Result<&CellContent, ModelError> {
        let sheet = self
            .sheet(&addr.sheet)
            .ok_or_else(|| ModelError::UnknownSheet(addr.sheet.clone()))?;
        Ok(sheet
            .get(addr.column, addr.row)
            .map(|c| &c.content)
            .unwrap_or(&BLANK))
    }

    pub fn defined_names(&self) -> &BTreeMap<String, Region> {
        &self.defined_names
    }

    /// Case-insensitive defined-name lookup.
    pub fn defined_name(&self, name: &str) -> Option<&Region> {
        self.defined_names
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, r)| r)
    }

    /// All stored cells, in sheet order then row-major within each sheet.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.sheets.iter().flat_map(|s| s.cells())
    }

    pub fn cell_count(&self) -> usize {
        self.sheets.iter().map(|s| s.cell_count()).sum()
    }

    pub fn formula_count(&self) -> usize {
        self.cells().filter(|c| c.content.is_formula()).count()
    }
}

/// Staged construction of a [`Workbook`]; rejects duplicate sheets and
/// duplicate cell addresses at insertion time.
#[derive(Debug, Default)]
pub struct WorkbookBuilder {
    sheets: Vec<Sheet>,
    defined_names: BTreeMap<String, Region>,
    has_pivot_tables: bool,
    has_autofilters: bool,
}

impl WorkbookBuilder {
    pub fn add_sheet(&mut self, name: impl Into<String>) -> Result<(), ModelError> {
        let name = name.into();
        if self
            .sheets
            .iter()
            .any(|s| s.name.eq_ignore_ascii_case(&name))
        {
            return Err(ModelError::DuplicateSheet(name));
        }
        self.sheets.push(Sheet {
            name,
            cells: BTreeMap::new(),
        });
        Ok(())
    }

    pub fn has_sheet(&self, name: &str) -> bool {
        self.sheets.iter().any(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn set_cell(
        &mut self,
        addr: CellAddress,
        content: CellContent,
    ) -> Result<(), ModelError> {
        if addr.column > MAX_COLUMNS || addr.row > MAX_ROWS || addr.column == 0 || addr.row == 0 {
            return Err(ModelError::AddressParse {
                text: addr.to_qualified_a1(),
                reason: "address outside the grid".to_string(),
            });
        }
        if let CellContent::Formula(text) = &content {
            if text.trim().is_empty() {
                return Err(ModelError::EmptyFormula(addr.to_qualified_a1()));
            }
        }
        let sheet = self
            .sheets
            .iter_mut()
            .find(|s| s.name.eq_ignore_ascii_case(&addr.sheet))
            .ok_or_else(|| ModelError::UnknownSheet(addr.sheet.clone()))?;
        let key = (addr.row, addr.column);
        if sheet.cells.contains_key(&key) {
            return Err(ModelError::DuplicateCell(addr.to_qualified_a1()));
        }
        // Store the canonical sheet casing on the cell itself.
        let address = CellAddress::new(sheet.name.clone(), addr.column, addr.row);
        sheet.cells.insert(key, Cell { address, content });
        Ok(())
    }

    pub fn define_name(&mut self, name: impl Into<String>, region: Region) {
        self.defined_names.insert(name.into(), region);
    }

    pub fn set_pivot_tables(&mut self, value: bool) {
        self.has_pivot_tables = value;
    }

    pub fn set_autofilters(&mut self, value: bool) {
        self.has_autofilters = value;
    }

    pub fn build(self) -> Workbook {
        Workbook {
            sheets: self.sheets,
            defined_names: self.defined_names,
            has_pivot_tables: self.has_pivot_tables,
            has_autofilters: self.has_autofilters,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_plain_address() {
        let a = parse_a1("B3", "S").unwrap();
        assert_eq!(a, CellAddress::new("S", 2, 3));
    }

    #[test]
    fn absolute_markers_are_discarded() {
        let a = parse_a1("$AA$10", "S").unwrap();
        assert_eq!(a, CellAddress::new("S", 27, 10));
    }

    #[test]
    fn quoted_sheet_qualifier_resolves() {
        let a = parse_a1("'My Sheet'!A1", "S").unwrap();
        assert_eq!(a, CellAddress::new("My Sheet", 1, 1));
    }

    #[test]
    fn bare_sheet_qualifier_resolves() {
        let a = parse_a1("Sheet2!B3", "S").unwrap();
        assert_eq!(a, CellAddress::new("Sheet2", 2, 3));
    }

    #[test]
    fn row_zero_is_rejected() {
        let e = parse_a1("A0", "S").unwrap_err();
        assert!(e.to_string().contains("A0"), "error names the text: {e}");
    }

    #[test]
    fn malformed_addresses_are_rejected() {
        assert!(parse_a1("", "S").is_err());
        assert!(parse_a1("123", "S").is_err());
        assert!(parse_a1("ABC", "S").is_err());
        assert!(parse_a1("A1B", "S").is_err());
        assert!(parse_a1("'Open!A1", "S").is_err());
        assert!(parse_a1("XFE1", "S").is_err(), "column beyond grid");
        assert!(parse_a1("A1048577", "S").is_err(), "row beyond grid");
    }

    #[test]
    fn doubled_quote_in_sheet_name() {
        let a = parse_a1("'It''s'!C4", "S").unwrap();
        assert_eq!(a.sheet, "It's");
        assert_eq!(a.to_qualified_a1(), "'It''s'!C4");
    }

    #[test]
    fn column_letter_bounds() {
        assert_eq!(column_letters(1), "A");
        assert_eq!(column_letters(26), "Z");
        assert_eq!(column_letters(27), "AA");
        assert_eq!(column_letters(702), "ZZ");
        assert_eq!(column_letters(703), "AAA");
        assert_eq!(column_letters(MAX_COLUMNS), "XFD");
        assert_eq!(column_index("XFD"), Some(MAX_COLUMNS));
        assert_eq!(column_index("XFE"), None);
    }

    #[test]
    fn region_contains_matches_examples() {
        let r = parse_region("S!A1:C3").unwrap();
        assert!(r.contains(&CellAddress::new("S", 2, 2)));
        assert!(!r.contains(&CellAddress::new("S", 4, 1)));
        let w = parse_region("Calc!*").unwrap();
        assert!(w.contains(&CellAddress::new("Calc", 26, 99)));
        assert!(!w.contains(&CellAddress::new("Other", 26, 99)));
    }

    #[test]
    fn region_display_roundtrips() {
        for text in ["S!A1:C3", "Calc!*", "'My Sheet'!B2"] {
            let region = parse_region(text).unwrap();
            assert_eq!(parse_region(&region.to_string()).unwrap(), region);
        }
    }

    #[test]
    fn lookup_synthesizes_blank_and_rejects_unknown_sheet() {
        let mut b = Workbook::builder();
        b.add_sheet("S").unwrap();
        b.set_cell(
            CellAddress::new("S", 1, 1),
            CellContent::Constant(CellValue::Number(5.0)),
        )
        .unwrap();
        let wb = b.build();
        assert_eq!(
            wb.lookup(&CellAddress::new("S", 1, 1)).unwrap(),
            &CellContent::Constant(CellValue::Number(5.0))
        );
        assert_eq!(
            wb.lookup(&CellAddress::new("S", 26, 99)).unwrap(),
            &CellContent::Constant(CellValue::Blank)
        );
        assert!(wb.lookup(&CellAddress::new("Nope", 1, 1)).is_err());
    }

    #[test]
    fn builder_rejects_duplicates() {
        let mut b = Workbook::builder();
        b.add_sheet("Data").unwrap();
        assert_eq!(
            b.add_sheet("DATA").unwrap_err(),
            ModelError::DuplicateSheet("DATA".to_string())
        );
        b.set_cell(
            CellAddress::new("Data", 1, 1),
            CellContent::Constant(CellValue::Number(1.0)),
        )
        .unwrap();
        assert!(matches!(
            b.set_cell(
                CellAddress::new("data", 1, 1),
                CellContent::Constant(CellValue::Number(2.0)),
            ),
            Err(ModelError::DuplicateCell(_))
        ));
    }

    #[test]
    fn sheet_lookup_is_case_insensitive_preserving_case() {
        let mut b = Workbook::builder();
        b.add_sheet("My Sheet").unwrap();
        let wb = b.build();
        assert_eq!(wb.sheet("my sheet").unwrap().name(), "My Sheet");
        let canon = wb.canonicalize(&CellAddress::new("MY SHEET", 1, 1));
        assert_eq!(canon.sheet, "My Sheet");
    }

    proptest! {
        #[test]
        fn a1_roundtrip(column in 1u32..=MAX_COLUMNS, row in 1u32..=MAX_ROWS) {
            let addr = CellAddress::new("S", column, row);
            let parsed = parse_a1(&addr.to_a1(), "S").unwrap();
            prop_assert_eq!(parsed, addr);
        }

        #[test]
        fn qualified_a1_roundtrip(
            column in 1u32..=MAX_COLUMNS,
            row in 1u32..=MAX_ROWS,
            sheet in "[A-Za-z ][A-Za-z0-9 _']{0,12}",
        ) {
            let addr = CellAddress::new(sheet.trim_end().to_string() + "x", column, row);
            let parsed = parse_a1(&addr.to_qualified_a1(), "other").unwrap();
            prop_assert_eq!(parsed, addr);
        }

        #[test]
        fn region_membership_matches_enumeration(
            sc in 1u32..=100, sr in 1u32..=100,
            w in 0u32..20, h in 0u32..20,
            qc in 1u32..=130, qr in 1u32..=130,
        ) {
            let region = Region::rect("S", (sc, sr), (sc + w, sr + h));
            let probe = CellAddress::new("S", qc, qr);
            let brute = region.cells().any(|a| a == probe);
            prop_assert_eq!(region.contains(&probe), brute);
        }
    }
}
