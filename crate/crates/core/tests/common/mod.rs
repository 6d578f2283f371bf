//! Shared test support: independent oracles and a realistic `.xlsx` writer.
//!
//! The reference scanner and the reachability SCC oracle deliberately share
//! no code with the library's lexer, parser, or Tarjan implementation; they
//! exist to check those paths from the outside.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use ssqa_core::model::{column_index, column_letters, CellAddress, Workbook};
use ssqa_core::{CellContent, CellValue};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture readable")
}

/// Every .sfx fixture in the corpus, as (relative name, text).
pub fn corpus_fixtures() -> Vec<(String, String)> {
    let root = fixture_path("");
    let mut out = Vec::new();
    let mut stack = vec![root.clone()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("fixture dir readable") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().map(|e| e == "sfx").unwrap_or(false) {
                let name = path
                    .strip_prefix(&root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.push((name, std::fs::read_to_string(&path).expect("readable")));
            }
        }
    }
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// Brute-force reference scanner (graph oracle)
// ---------------------------------------------------------------------------

/// Collects every A1-pattern reference in a formula body by raw text
/// scanning: no lexer, no parser, no AST. String literals are skipped;
/// words followed by `(` are function names; ranges expand up to `cap`
/// member cells and are dropped (region-level) beyond it.
pub fn scan_formula_refs(
    body: &str,
    default_sheet: &str,
    workbook: &Workbook,
    cap: usize,
) -> BTreeSet<CellAddress> {
    let chars: Vec<char> = body.chars().collect();
    let mut refs = BTreeSet::new();
    let mut i = 0usize;
    let mut pending_sheet: Option<String> = None;

    while i < chars.len() {
        let c = chars[i];
        if c == '"' {
            i += 1;
            while i < chars.len() {
                if chars[i] == '"' {
                    if chars.get(i + 1) == Some(&'"') {
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                i += 1;
            }
            continue;
        }
        if c == '\'' {
            let mut name = String::new();
            i += 1;
            while i < chars.len() {
                if chars[i] == '\'' {
                    if chars.get(i + 1) == Some(&'\'') {
                        name.push('\'');
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                name.push(chars[i]);
                i += 1;
            }
            if chars.get(i) == Some(&'!') {
                i += 1;
                if name.starts_with('[') {
                    // External reference: swallow the ref without recording.
                    skip_ref_chars(&chars, &mut i);
                } else {
                    pending_sheet = Some(name);
                }
            }
            continue;
        }
        if c == '[' {
            // External bracket form: skip locator, sheet, '!' and the ref.
            while i < chars.len() && chars[i] != '!' {
                i += 1;
            }
            if i < chars.len() {
                i += 1;
                skip_ref_chars(&chars, &mut i);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '.' | '$')) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&'(') {
                pending_sheet = None;
                continue; // function name
            }
            if chars.get(i) == Some(&'!') {
                i += 1;
                pending_sheet = Some(word.trim_matches('$').to_string());
                continue;
            }
            if let Some((col, row)) = a1_pattern(&word) {
                let sheet = pending_sheet
                    .take()
                    .unwrap_or_else(|| default_sheet.to_string());
                // Look ahead for a range tail.
                let mut j = i;
                while j < chars.len() && chars[j] == ' ' {
                    j += 1;
                }
                if chars.get(j) == Some(&':') {
                    j += 1;
                    while j < chars.len() && chars[j] == ' ' {
                        j += 1;
                    }
                    // Optional same-sheet qualifier on the right endpoint.
                    let mut k = j;
                    if chars.get(k) == Some(&'\'') {
                        k += 1;
                        while k < chars.len() && chars[k] != '\'' {
                            k += 1;
                        }
                        k += 1;
                        if chars.get(k) == Some(&'!') {
                            j = k + 1;
                        }
                    } else {
                        let mut m = k;
                        while m < chars.len()
                            && (chars[m].is_ascii_alphanumeric() || matches!(chars[m], '_' | '.' | '$'))
                        {
                            m += 1;
                        }
                        if chars.get(m) == Some(&'!') {
                            j = m + 1;
                        }
                    }
                    let end_start = j;
                    while j < chars.len()
                        && (chars[j].is_ascii_alphanumeric() || chars[j] == '$')
                    {
                        j += 1;
                    }
                    let end_word: String = chars[end_start..j].iter().collect();
                    if let Some((col2, row2)) = a1_pattern(&end_word) {
                        i = j;
                        let (c1, c2) = (col.min(col2), col.max(col2));
                        let (r1, r2) = (row.min(row2), row.max(row2));
                        let count = (c2 - c1 + 1) as u64 * (r2 - r1 + 1) as u64;
                        if count <= cap as u64 {
                            for r in r1..=r2 {
                                for c in c1..=c2 {
                                    refs.insert(
                                        workbook
                                            .canonicalize(&CellAddress::new(sheet.clone(), c, r)),
                                    );
                                }
                            }
                        }
                        continue;
                    }
                }
                refs.insert(workbook.canonicalize(&CellAddress::new(sheet, col, row)));
                continue;
            }
            pending_sheet = None;
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && (chars[i].is_ascii_digit() || matches!(chars[i], '.' | 'e' | 'E' | '+' | '-')) {
                // Stop '+'/'-' unless directly after an exponent marker.
                if matches!(chars[i], '+' | '-')
                    && !matches!(chars.get(i.wrapping_sub(1)), Some('e') | Some('E'))
                {
                    break;
                }
                i += 1;
            }
            continue;
        }
        i += 1;
    }
    refs
}

fn skip_ref_chars(chars: &[char], i: &mut usize) {
    let mut seen_colon = false;
    while *i < chars.len() {
        let c = chars[*i];
        if c.is_ascii_alphanumeric() || c == '$' {
            *i += 1;
        } else if c == ':' && !seen_colon {
            seen_colon = true;
            *i += 1;
        } else {
            break;
        }
    }
}

/// `$?letters{1,3}$?digits`, inside the grid.
fn a1_pattern(word: &str) -> Option<(u32, u32)> {
    let bytes = word.as_bytes();
    let mut pos = 0;
    if bytes.first() == Some(&b'$') {
        pos += 1;
    }
    let letters_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() {
        pos += 1;
    }
    let letters = &word[letters_start..pos];
    if letters.is_empty() || letters.len() > 3 {
        return None;
    }
    if bytes.get(pos) == Some(&b'$') {
        pos += 1;
    }
    let digits = &word[pos..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let col = column_index(letters)?;
    let row: u32 = digits.parse().ok()?;
    if row == 0 || row > 1_048_576 {
        return None;
    }
    Some((col, row))
}

/// The full edge set of a workbook per the raw-text scanner: one
/// (precedent, dependent) pair per formula reference.
pub fn oracle_edges(workbook: &Workbook, cap: usize) -> BTreeSet<(CellAddress, CellAddress)> {
    let mut edges = BTreeSet::new();
    for cell in workbook.cells() {
        if let CellContent::Formula(body) = &cell.content {
            for target in scan_formula_refs(body, &cell.address.sheet, workbook, cap) {
                edges.insert((target, cell.address.clone()));
            }
        }
    }
    edges
}

// ---------------------------------------------------------------------------
// Reachability-based SCC oracle
// ---------------------------------------------------------------------------

/// Nontrivial strongly connected components by pairwise reachability:
/// u and v share a component iff each reaches the other. O(n^3), fine for
/// the small random graphs it checks.
pub fn reachability_cycles(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for a in 0..n {
            if reach[a][k] {
                for b in 0..n {
                    if reach[k][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for v in 0..n {
        if seen[v] {
            continue;
        }
        let mut comp = vec![v];
        seen[v] = true;
        for w in v + 1..n {
            if !seen[w] && reach[v][w] && reach[w][v] {
                comp.push(w);
                seen[w] = true;
            }
        }
        if comp.len() > 1 || reach[v][v] {
            comps.push(comp);
        }
    }
    comps.sort();
    comps
}

// ---------------------------------------------------------------------------
// xlsx writer
// ---------------------------------------------------------------------------

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Serializes a workbook as a spreadsheet application would: shared strings
/// for text, cached `<v>` results under formulas, relationship parts,
/// document properties, and a styles part.
pub fn xlsx_bytes(workbook: &Workbook) -> Vec<u8> {
    let mut shared: Vec<String> = Vec::new();
    let mut shared_index = std::collections::HashMap::new();
    let mut intern = |s: &str, shared: &mut Vec<String>, idx: &mut std::collections::HashMap<String, usize>| -> usize {
        if let Some(&i) = idx.get(s) {
            return i;
        }
        let i = shared.len();
        shared.push(s.to_string());
        idx.insert(s.to_string(), i);
        i
    };

    let mut sheet_parts: Vec<String> = Vec::new();
    for (sheet_no, sheet) in workbook.sheets().iter().enumerate() {
        let mut rows: std::collections::BTreeMap<u32, Vec<String>> = Default::default();
        for cell in sheet.cells() {
            let a1 = cell.address.to_a1();
            let xml = match &cell.content {
                CellContent::Formula(text) => format!(
                    "<c r=\"{a1}\"><f>{}</f><v>0</v></c>",
                    xml_escape(text)
                ),
                CellContent::Constant(CellValue::Number(n)) => {
                    format!("<c r=\"{a1}\"><v>{n}</v></c>")
                }
                CellContent::Constant(CellValue::Text(t)) => {
                    let idx = intern(t, &mut shared, &mut shared_index);
                    format!("<c r=\"{a1}\" t=\"s\"><v>{idx}</v></c>")
                }
                CellContent::Constant(CellValue::Boolean(b)) => {
                    format!("<c r=\"{a1}\" t=\"b\"><v>{}</v></c>", u8::from(*b))
                }
                CellContent::Constant(CellValue::ErrorLiteral(e)) => {
                    format!("<c r=\"{a1}\" t=\"e\"><v>{}</v></c>", xml_escape(e))
                }
                CellContent::Constant(CellValue::Blank) => continue,
            };
            rows.entry(cell.address.row).or_default().push(xml);
        }
        let mut body = String::from(
            "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<worksheet xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\"><sheetData>",
        );
        for (row_no, cells) in &rows {
            body.push_str(&format!("<row r=\"{row_no}\">"));
            for c in cells {
                body.push_str(c);
            }
            body.push_str("</row>");
        }
        body.push_str("</sheetData>");
        if workbook.has_autofilters && sheet_no == 0 {
            body.push_str("<autoFilter ref=\"A1:B4\"/>");
        }
        body.push_str("</worksheet>");
        sheet_parts.push(body);
    }

    let mut workbook_xml = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<workbook xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\"><sheets>",
    );
    for (i, sheet) in workbook.sheets().iter().enumerate() {
        workbook_xml.push_str(&format!(
            "<sheet name=\"{}\" sheetId=\"{}\" r:id=\"rId{}\"/>",
            xml_escape(sheet.name()),
            i + 1,
            i + 1
        ));
    }
    workbook_xml.push_str("</sheets>");
    if !workbook.defined_names().is_empty() {
        workbook_xml.push_str("<definedNames>");
        for (name, region) in workbook.defined_names() {
            let value = match region {
                ssqa_core::Region::Rect {
                    sheet,
                    start_column,
                    start_row,
                    end_column,
                    end_row,
                } => format!(
                    "{}!${}${}:${}${}",
                    xml_escape(sheet),
                    column_letters(*start_column),
                    start_row,
                    column_letters(*end_column),
                    end_row
                ),
                ssqa_core::Region::WholeSheet { sheet } => format!("{}!*", xml_escape(sheet)),
            };
            workbook_xml.push_str(&format!(
                "<definedName name=\"{}\">{}</definedName>",
                xml_escape(name),
                value
            ));
        }
        workbook_xml.push_str("</definedNames>");
    }
    workbook_xml.push_str("</workbook>");

    let mut rels = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">",
    );
    let sheet_count = workbook.sheets().len();
    for i in 0..sheet_count {
        rels.push_str(&format!(
            "<Relationship Id=\"rId{}\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet\" Target=\"worksheets/sheet{}.xml\"/>",
            i + 1,
            i + 1
        ));
    }
    rels.push_str(&format!(
        "<Relationship Id=\"rId{}\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/styles\" Target=\"styles.xml\"/>",
        sheet_count + 1
    ));
    rels.push_str(&format!(
        "<Relationship Id=\"rId{}\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/sharedStrings\" Target=\"sharedStrings.xml\"/>",
        sheet_count + 2
    ));
    rels.push_str("</Relationships>");

    let mut shared_xml = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<sst xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" count=\"{}\" uniqueCount=\"{}\">",
        shared.len(),
        shared.len()
    );
    for s in &shared {
        shared_xml.push_str(&format!("<si><t xml:space=\"preserve\">{}</t></si>", xml_escape(s)));
    }
    shared_xml.push_str("</sst>");

    let mut content_types = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\"><Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/><Default Extension=\"xml\" ContentType=\"application/xml\"/><Override PartName=\"/xl/workbook.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml\"/><Override PartName=\"/xl/styles.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml\"/><Override PartName=\"/xl/sharedStrings.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml\"/>",
    );
    for i in 0..sheet_count {
        content_types.push_str(&format!(
            "<Override PartName=\"/xl/worksheets/sheet{}.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml\"/>",
            i + 1
        ));
    }
    if workbook.has_pivot_tables {
        content_types.push_str("<Override PartName=\"/xl/pivotTables/pivotTable1.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.pivotTable+xml\"/>");
    }
    content_types.push_str("</Types>");

    let root_rels = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\"><Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument\" Target=\"xl/workbook.xml\"/></Relationships>";

    let styles = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<styleSheet xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\"><fonts count=\"1\"><font><sz val=\"11\"/><name val=\"Calibri\"/></font></fonts><fills count=\"1\"><fill><patternFill patternType=\"none\"/></fill></fills><borders count=\"1\"><border/></borders><cellXfs count=\"1\"><xf numFmtId=\"0\" fontId=\"0\" fillId=\"0\" borderId=\"0\"/></cellXfs></styleSheet>";

    let pivot_part = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n<pivotTableDefinition xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" name=\"PivotTable1\" cacheId=\"1\"/>";

    let buffer = std::io::Cursor::new(Vec::new());
    let mut zip = zip::ZipWriter::new(buffer);
    let options = zip::write::FileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated);

    let mut add = |zip: &mut zip::ZipWriter<std::io::Cursor<Vec<u8>>>, name: &str, data: &str| {
        zip.start_file(name, options).expect("zip entry");
        zip.write_all(data.as_bytes()).expect("zip write");
    };

    add(&mut zip, "[Content_Types].xml", &content_types);
    add(&mut zip, "_rels/.rels", root_rels);
    add(&mut zip, "xl/workbook.xml", &workbook_xml);
    add(&mut zip, "xl/_rels/workbook.xml.rels", &rels);
    add(&mut zip, "xl/styles.xml", styles);
    add(&mut zip, "xl/sharedStrings.xml", &shared_xml);
    for (i, part) in sheet_parts.iter().enumerate() {
        add(&mut zip, &format!("xl/worksheets/sheet{}.xml", i + 1), part);
    }
    if workbook.has_pivot_tables {
        add(&mut zip, "xl/pivotTables/pivotTable1.xml", pivot_part);
    }

    zip.finish().expect("zip finish").into_inner()
}
