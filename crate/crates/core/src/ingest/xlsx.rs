//! Reader for the Office Open XML spreadsheet package (`.xlsx`).
//!
//! Only structure is extracted: cell addresses, constant values, formula
//! text, defined names, and the pivot-table / autofilter feature flags.
//! Cached formula results in `<v>` elements are ignored; the analyzer
//! inspects formulas, not their last computed values. Shared formulas are
//! expanded to per-cell text so the dependency graph sees real precedents.

use std::collections::BTreeMap;
use std::io::{Cursor, Read};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use zip::ZipArchive;

use crate::formula::shift_references;
use crate::ingest::{IngestError, IngestReport, IngestWarning};
use crate::model::{parse_a1, parse_region, CellContent, CellValue, Workbook, WorkbookBuilder};

pub fn load_xlsx_bytes(bytes: &[u8]) -> Result<IngestReport, IngestError> {
    load_xlsx_named(bytes, "<xlsx>")
}

pub(crate) fn load_xlsx_named(bytes: &[u8], path: &str) -> Result<IngestReport, IngestError> {
    Loader {
        path,
        warnings: Vec::new(),
    }
    .run(bytes)
}

struct Loader<'a> {
    path: &'a str,
    warnings: Vec<IngestWarning>,
}

struct SheetEntry {
    name: String,
    rel_id: String,
    hidden: bool,
}

impl<'a> Loader<'a> {
    fn err(&self, part: &str, message: impl Into<String>) -> IngestError {
        IngestError::Xlsx {
            path: self.path.to_string(),
            part: part.to_string(),
            message: message.into(),
        }
    }

    fn warn(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(IngestWarning {
            location: location.into(),
            message: message.into(),
        });
    }

    fn run(mut self, bytes: &[u8]) -> Result<IngestReport, IngestError> {
        let mut archive = ZipArchive::new(Cursor::new(bytes))
            .map_err(|_| self.err("<package>", "not a ZIP archive"))?;

        let part_names: Vec<String> = archive.file_names().map(str::to_string).collect();
        let has_pivot = part_names
            .iter()
            .any(|n| n.contains("pivotTable") || n.contains("pivotCache"));
        if part_names.iter().any(|n| n.starts_with("xl/externalLinks/")) {
            self.warn("<package>", "external workbook links present; not followed");
        }
        if part_names.iter().any(|n| n.ends_with("vbaProject.bin")) {
            self.warn("<package>", "macro project present; ignored");
        }

        let workbook_xml = read_part(&mut archive, "xl/workbook.xml")
            .ok_or_else(|| self.err("xl/workbook.xml", "missing workbook part"))?;
        let (sheets, defined_names) = self.parse_workbook_part(&workbook_xml)?;

        let rels_xml = read_part(&mut archive, "xl/_rels/workbook.xml.rels")
            .ok_or_else(|| self.err("xl/_rels/workbook.xml.rels", "missing relationships part"))?;
        let rel_targets = self.parse_relationships(&rels_xml)?;

        let shared_strings = match read_part(&mut archive, "xl/sharedStrings.xml") {
            Some(xml) => self.parse_shared_strings(&xml)?,
            None => Vec::new(),
        };

        let mut builder = Workbook::builder();
        builder.set_pivot_tables(has_pivot);
        let mut has_autofilters = false;

        for sheet in &sheets {
            builder
                .add_sheet(sheet.name.clone())
                .map_err(|e| self.err("xl/workbook.xml", e.to_string()))?;
            if sheet.hidden {
                self.warn(&sheet.name, "sheet is hidden; analyzed like a visible sheet");
            }
        }

        for sheet in &sheets {
            let target = rel_targets.get(&sheet.rel_id).ok_or_else(|| {
                self.err(
                    "xl/_rels/workbook.xml.rels",
                    format!("no relationship for sheet {:?}", sheet.name),
                )
            })?;
            let part = normalize_target(target);
            let xml = read_part(&mut archive, &part)
                .ok_or_else(|| self.err(&part, "missing worksheet part"))?;
            let sheet_has_filter =
                self.parse_sheet_part(&xml, &part, &sheet.name, &shared_strings, &mut builder)?;
            has_autofilters |= sheet_has_filter;
        }
        builder.set_autofilters(has_autofilters);

        for (name, value) in defined_names {
            if name.starts_with("_xlnm") {
                continue;
            }
            match parse_region(&value) {
                Ok(region) => builder.define_name(name, region),
                Err(_) => self.warn(
                    format!("defined name {name:?}"),
                    format!("target {value:?} is not a plain region; ignored"),
                ),
            }
        }

        Ok(IngestReport {
            workbook: builder.build(),
            warnings: self.warnings,
        })
    }

    /// Sheet list (name, relationship id, visibility) and raw defined names.
    fn parse_workbook_part(
        &self,
        xml: &[u8],
    ) -> Result<(Vec<SheetEntry>, Vec<(String, String)>), IngestError> {
        let part = "xl/workbook.xml";
        let mut reader = xml_reader(xml);
        let mut buf = Vec::new();
        let mut sheets = Vec::new();
        let mut defined_names = Vec::new();
        let mut pending_name: Option<String> = None;
        let mut pending_value = String::new();

        loop {
            match reader.read_event_into(&mut buf) {
                Ok(Event::Start(e)) | Ok(Event::Empty(e)) => match e.local_name().as_ref() {
                    b"sheet" => {
                        let name = attr(&e, b"name").unwrap_or_default();
                        let rel_id = attr(&e, b"id").unwrap_or_default();
                        if name.is_empty() || rel_id.is_empty() {
                            return Err(self.err(part, "sheet element missing name or r:id"));
                        }
                        let hidden = matches!(
                            attr(&e, b"state").as_deref(),
                            Some("hidden") | Some("veryHidden")
                        );
                        sheets.push(SheetEntry {
                            name,
                            rel_id,
                            hidden,
                        });
                    }
                    b"definedName" => {
                        pending_name = attr(&e, b"name");
                        pending_value.clear();
                    }
                    _ => {}
                },
                Ok(Event::Text(t)) => {
                    if pending_name.is_some() {
                        pending_value.push_str(&t.unescape().map_err(|e| {
                            self.err(part, format!("malformed XML text: {e}"))
                        })?);
                    }
                }
                Ok(Event::End(e)) => {
                    if e.local_name().as_ref() == b"definedName" {
                        if let Some(name) = pending_name.take() {
                            defined_names.push((name, pending_value.trim().to_string()));
                        }
                    }
                }
                Ok(Event::Eof) => break,
                Ok(_) => {}
                Err(e) => return Err(self.err(part, format!("malformed XML: {e}"))),
            }
            buf.clear();
        }
        if sheets.is_empty() {
            return Err(self.err(part, "workbook declares no sheets"));
        }
        Ok((sheets, defined_names))
    }

    fn parse_relationships(&self, xml: &[u8]) -> Result<BTreeMap<String, String>, IngestError> {
        let part = "xl/_rels/workbook.xml.rels";
        let mut reader = xml_reader(xml);
        let mut buf = Vec::new();
        let mut map = BTreeMap::new();
        loop {
            match reader.read_event_into(&mut buf) {
                Ok(Event::Start(e)) | Ok(Event::Empty(e)) => {
                    if e.local_name().as_ref() == b"Relationship" {
                        if let (Some(id), Some(target)) = (attr(&e, b"Id"), attr(&e, b"Target")) {
                            map.insert(id, target);
                        }
                    }
                }
                Ok(Event::Eof) => break,
                Ok(_) => {}
                Err(e) => return Err(self.err(part, format!("malformed XML: {e}"))),
            }
            buf.clear();
        }
        Ok(map)
    }

    fn parse_shared_strings(&self, xml: &[u8]) -> Result<Vec<String>, IngestError> {
        let part = "xl/sharedStrings.xml";
        let mut reader = xml_reader(xml);
        let mut buf = Vec::new();
        let mut strings = Vec::new();
        let mut current: Option<String> = None;
        let mut in_text = false;
        loop {
            match reader.read_event_into(&mut buf) {
                Ok(Event::Start(e)) => match e.local_name().as_ref() {
                    b"si" => current = Some(String::new()),
                    b"t" => in_text = true,
                    _ => {}
                },
                Ok(Event::Text(t)) => {
                    if in_text {
                        if let Some(s) = current.as_mut() {
                            s.push_str(&t.unescape().map_err(|e| {
                                self.err(part, format!("malformed XML text: {e}"))
                            })?);
                        }
                    }
                }
                Ok(Event::End(e)) => match e.local_name().as_ref() {
                    b"si" => {
                        if let Some(s) = current.take() {
                            strings.push(s);
                        }
                    }
                    b"t" => in_text = false,
                    _ => {}
                },
                Ok(Event::Eof) => break,
                Ok(_) => {}
                Err(e) => return Err(self.err(part, format!("malformed XML: {e}"))),
            }
            buf.clear();
        }
        Ok(strings)
    }

    /// Parses one worksheet part into cells; returns whether the sheet
    /// declares an autofilter.
    fn parse_sheet_part(
        &mut self,
        xml: &[u8],
        part: &str,
        sheet_name: &str,
        shared_strings: &[String],
        builder: &mut WorkbookBuilder,
    ) -> Result<bool, IngestError> {
        let mut reader = xml_reader(xml);
        let mut buf = Vec::new();
        let mut has_autofilter = false;

        // Shared formula masters, keyed by si: (master column, master row, text).
        let mut shared_masters: BTreeMap<String, (u32, u32, String)> = BTreeMap::new();

        let mut current_row: u32 = 0;
        let mut next_col: u32 = 1;

        struct PendingCell {
            column: u32,
            row: u32,
            type_attr: String,
            value: Option<String>,
            formula: Option<String>,
            formula_shared_si: Option<String>,
            formula_is_array: bool,
            inline_text: Option<String>,
        }
        let mut cell: Option<PendingCell> = None;
        #[derive(PartialEq)]
        enum TextTarget {
            None,
            Value,
            Formula,
            InlineString,
        }
        let mut text_target = TextTarget::None;

        loop {
            let event = reader
                .read_event_into(&mut buf)
                .map_err(|e| self.err(part, format!("malformed XML: {e}")))?;
            let is_empty = matches!(event, Event::Empty(_));
            match event {
                Event::Start(ref e) | Event::Empty(ref e) => match e.local_name().as_ref() {
                    b"autoFilter" => has_autofilter = true,
                    b"row" => {
                        current_row = match attr(e, b"r") {
                            Some(r) => r
                                .parse()
                                .map_err(|_| self.err(part, format!("bad row index {r:?}")))?,
                            None => current_row + 1,
                        };
                        next_col = 1;
                    }
                    b"c" => {
                        let (column, row) = match attr(e, b"r") {
                            Some(r) => {
                                let a = parse_a1(&r, sheet_name)
                                    .map_err(|err| self.err(part, err.to_string()))?;
                                (a.column, a.row)
                            }
                            None => (next_col, current_row),
                        };
                        next_col = column + 1;
                        let pending = PendingCell {
                            column,
                            row,
                            type_attr: attr(e, b"t").unwrap_or_else(|| "n".to_string()),
                            value: None,
                            formula: None,
                            formula_shared_si: None,
                            formula_is_array: false,
                            inline_text: None,
                        };
                        if is_empty {
                            // No children: blank placeholder, nothing stored.
                        } else {
                            cell = Some(pending);
                        }
                    }
                    b"v" if cell.is_some() => {
                        text_target = TextTarget::Value;
                        if let Some(c) = cell.as_mut() {
                            c.value = Some(String::new());
                        }
                    }
                    b"f" if cell.is_some() => {
                        if let Some(c) = cell.as_mut() {
                            c.formula = Some(String::new());
                            let ftype = attr(e, b"t").unwrap_or_default();
                            if ftype == "shared" {
                                c.formula_shared_si = attr(e, b"si");
                            } else if ftype == "array" {
                                c.formula_is_array = true;
                            }
                        }
                        text_target = TextTarget::Formula;
                    }
                    b"t" if cell.is_some() => {
                        if let Some(c) = cell.as_mut() {
                            if c.inline_text.is_none() {
                                c.inline_text = Some(String::new());
                            }
                        }
                        text_target = TextTarget::InlineString;
                    }
                    _ => {}
                },
                Event::Text(t) => {
                    let text = t
                        .unescape()
                        .map_err(|e| self.err(part, format!("malformed XML text: {e}")))?;
                    if let Some(c) = cell.as_mut() {
                        match text_target {
                            TextTarget::Value => {
                                if let Some(v) = c.value.as_mut() {
                                    v.push_str(&text);
                                }
                            }
                            TextTarget::Formula => {
                                if let Some(fx) = c.formula.as_mut() {
                                    fx.push_str(&text);
                                }
                            }
                            TextTarget::InlineString => {
                                if let Some(s) = c.inline_text.as_mut() {
                                    s.push_str(&text);
                                }
                            }
                            TextTarget::None => {}
                        }
                    }
                }
                Event::End(ref e) => match e.local_name().as_ref() {
                    b"v" | b"f" | b"t" => text_target = TextTarget::None,
                    b"c" => {
                        if let Some(c) = cell.take() {
                            self.store_cell(
                                c.column,
                                c.row,
                                &c.type_attr,
                                c.value,
                                c.formula,
                                c.formula_shared_si,
                                c.formula_is_array,
                                c.inline_text,
                                sheet_name,
                                part,
                                shared_strings,
                                &mut shared_masters,
                                builder,
                            )?;
                        }
                    }
                    _ => {}
                },
                Event::Eof => break,
                _ => {}
            }
            buf.clear();
        }
        Ok(has_autofilter)
    }

    #[allow(clippy::too_many_arguments)]
    fn store_cell(
        &mut self,
        column: u32,
        row: u32,
        type_attr: &str,
        value: Option<String>,
        formula: Option<String>,
        shared_si: Option<String>,
        is_array: bool,
        inline_text: Option<String>,
        sheet_name: &str,
        part: &str,
        shared_strings: &[String],
        shared_masters: &mut BTreeMap<String, (u32, u32, String)>,
        builder: &mut WorkbookBuilder,
    ) -> Result<(), IngestError> {
        let addr = crate::model::CellAddress::new(sheet_name, column, row);
        let a1 = addr.to_qualified_a1();

        if let Some(formula_text) = formula {
            let formula_text = formula_text.trim().to_string();
            let resolved = if let Some(si) = shared_si {
                if formula_text.is_empty() {
                    // Member of a shared group: shift the master's text.
                    match shared_masters.get(&si) {
                        Some((mcol, mrow, mtext)) => {
                            let drow = row as i64 - *mrow as i64;
                            let dcol = column as i64 - *mcol as i64;
                            match shift_references(mtext, drow, dcol) {
                                Ok(shifted) => shifted,
                                Err(e) => {
                                    self.warn(
                                        &a1,
                                        format!("cannot expand shared formula: {e}; cell skipped"),
                                    );
                                    return Ok(());
                                }
                            }
                        }
                        None => {
                            self.warn(
                                &a1,
                                format!("shared formula group {si} has no master; cell skipped"),
                            );
                            return Ok(());
                        }
                    }
                } else {
                    shared_masters.insert(si, (column, row, formula_text.clone()));
                    formula_text
                }
            } else {
                formula_text
            };
            if is_array {
                self.warn(
                    &a1,
                    "array formula ingested as an ordinary formula at its anchor cell",
                );
            }
            if resolved.is_empty() {
                self.warn(&a1, "empty formula element; cell skipped");
                return Ok(());
            }
            // Cached <v> under a formula cell is intentionally dropped.
            builder
                .set_cell(addr, CellContent::Formula(resolved))
                .map_err(|e| self.err(part, e.to_string()))?;
            return Ok(());
        }

        let constant = match type_attr {
            "s" => {
                let v = value.unwrap_or_default();
                let idx: usize = v.trim().parse().map_err(|_| {
                    self.err(part, format!("{a1}: bad shared string index {v:?}"))
                })?;
                let text = shared_strings.get(idx).ok_or_else(|| {
                    self.err(part, format!("{a1}: shared string index {idx} out of range"))
                })?;
                CellValue::Text(text.clone())
            }
            "inlineStr" => CellValue::Text(inline_text.unwrap_or_default()),
            "b" => match value.as_deref().map(str::trim) {
                Some("1") | Some("true") => CellValue::Boolean(true),
                Some("0") | Some("false") => CellValue::Boolean(false),
                other => {
                    return Err(
                        self.err(part, format!("{a1}: bad boolean value {other:?}"))
                    )
                }
            },
            "e" => CellValue::ErrorLiteral(value.unwrap_or_default().trim().to_string()),
            // "str" is a cached formula string; with no <f> it degrades to text.
            "str" => CellValue::Text(value.unwrap_or_default()),
            _ => match value {
                None => return Ok(()), // placeholder cell, stays blank
                Some(v) => {
                    let parsed: f64 = v.trim().parse().map_err(|_| {
                        self.err(part, format!("{a1}: bad numeric value {v:?}"))
                    })?;
                    CellValue::Number(parsed)
                }
            },
        };
        builder
            .set_cell(addr, CellContent::Constant(constant))
            .map_err(|e| self.err(part, e.to_string()))
    }
}

fn xml_reader(xml: &[u8]) -> Reader<&[u8]> {
    let mut reader = Reader::from_reader(xml);
    reader.trim_text(false);
    reader
}

fn attr(e: &BytesStart<'_>, name: &[u8]) -> Option<String> {
    e.attributes().flatten().find_map(|a| {
        if a.key.local_name().as_ref() == name {
            Some(String::from_utf8_lossy(&a.value).into_owned())
        } else {
            None
        }
    })
}

fn read_part<R: Read + std::io::Seek>(archive: &mut ZipArchive<R>, name: &str) -> Option<Vec<u8>> {
    let mut file = archive.by_name(name).ok()?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).ok()?;
    Some(bytes)
}

/// Relationship targets are relative to xl/ unless they start with '/'.
fn normalize_target(target: &str) -> String {
    if let Some(absolute) = target.strip_prefix('/') {
        absolute.to_string()
    } else {
        format!("xl/{target}")
    }
}
