//! Plain-text workbook fixture format.
//!
//! One file describes one workbook:
//!
//! ```text
//! # comment
//! [sheet: Inputs]
//! B2 = 100            # decimal number
//! B3 = "label"        # text
//! B4 = true           # boolean
//! B5 = =B2*2          # formula ('=' prefix)
//! [pivot]             # sets the pivot-table feature flag
//! [autofilter]        # sets the autofilter feature flag
//! ```

use crate::ingest::{IngestError, IngestReport};
use crate::model::{parse_a1, CellContent, CellValue, Workbook};

pub fn parse_fixture(text: &str) -> Result<IngestReport, IngestError> {
    parse_fixture_named(text, "<fixture>")
}

pub(crate) fn parse_fixture_named(text: &str, path: &str) -> Result<IngestReport, IngestError> {
    let mut builder = Workbook::builder();
    let mut current_sheet: Option<String> = None;

    let err = |line: usize, message: String| IngestError::Fixture {
        path: path.to_string(),
        line,
        message,
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }

        if let Some(directive) = line.strip_prefix('[') {
            let directive = directive
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "unterminated '[' directive".to_string()))?
                .trim();
            if let Some(name) = directive.strip_prefix("sheet:") {
                let name = name.trim();
                if name.is_empty() {
                    return Err(err(line_no, "empty sheet name".to_string()));
                }
                builder
                    .add_sheet(name)
                    .map_err(|e| err(line_no, e.to_string()))?;
                current_sheet = Some(name.to_string());
            } else if directive.eq_ignore_ascii_case("pivot") {
                builder.set_pivot_tables(true);
            } else if directive.eq_ignore_ascii_case("autofilter") {
                builder.set_autofilters(true);
            } else {
                return Err(err(line_no, format!("unknown directive [{directive}]")));
            }
            continue;
        }

        // Cell line: "<address> = <payload>".
        let eq = line
            .find('=')
            .ok_or_else(|| err(line_no, "expected '=' after cell address".to_string()))?;
        let addr_text = line[..eq].trim();
        let payload = line[eq + 1..].trim();
        let sheet = current_sheet
            .as_deref()
            .ok_or_else(|| err(line_no, "cell defined before any [sheet:] directive".to_string()))?;
        if addr_text.contains('!') || addr_text.contains('\'') {
            return Err(err(
                line_no,
                "cell address must be local to the current sheet".to_string(),
            ));
        }
        let addr = parse_a1(addr_text, sheet).map_err(|e| err(line_no, e.to_string()))?;
        let content = parse_payload(payload).map_err(|m| err(line_no, m))?;
        builder
            .set_cell(addr, content)
            .map_err(|e| err(line_no, e.to_string()))?;
    }

    Ok(IngestReport {
        workbook: builder.build(),
        warnings: Vec::new(),
    })
}

/// Cuts a `#` comment, ignoring `#` inside a quoted string.
fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_payload(payload: &str) -> Result<CellContent, String> {
    if let Some(body) = payload.strip_prefix('=') {
        let body = body.trim();
        if body.is_empty() {
            return Err("empty formula body".to_string());
        }
        return Ok(CellContent::Formula(body.to_string()));
    }
    if payload.starts_with('"') {
        let inner = payload
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .ok_or_else(|| "unterminated text literal".to_string())?;
        return Ok(CellContent::Constant(CellValue::Text(
            inner.replace("\"\"", "\""),
        )));
    }
    if payload.eq_ignore_ascii_case("true") {
        return Ok(CellContent::Constant(CellValue::Boolean(true)));
    }
    if payload.eq_ignore_ascii_case("false") {
        return Ok(CellContent::Constant(CellValue::Boolean(false)));
    }
    if payload.is_empty() {
        return Err("empty cell payload".to_string());
    }
    let number: f64 = payload
        .parse()
        .map_err(|_| format!("cannot parse {payload:?} as a number"))?;
    Ok(CellContent::Constant(CellValue::Number(number)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellAddress;

    #[test]
    fn parses_sheet_and_number() {
        let report = parse_fixture("[sheet: Inputs]\nB2 = 100").unwrap();
        let wb = &report.workbook;
        assert_eq!(wb.sheets().len(), 1);
        assert_eq!(
            wb.lookup(&CellAddress::new("Inputs", 2, 2)).unwrap(),
            &CellContent::Constant(CellValue::Number(100.0))
        );
    }

    #[test]
    fn equals_prefix_marks_formula() {
        let report = parse_fixture("[sheet: S]\nB2 = =A1+1").unwrap();
        assert_eq!(
            report
                .workbook
                .lookup(&CellAddress::new("S", 2, 2))
                .unwrap(),
            &CellContent::Formula("A1+1".to_string())
        );
    }

    #[test]
    fn missing_equals_errors_with_line() {
        let e = parse_fixture("[sheet: S]\nB2 100").unwrap_err();
        match e {
            IngestError::Fixture { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn payload_kinds() {
        let report = parse_fixture(
            "[sheet: S]\nA1 = \"Revenue #1\" # trailing comment\nA2 = true\nA3 = -2.5\nA4 = \"say \"\"hi\"\"\"",
        )
        .unwrap();
        let wb = &report.workbook;
        let get = |r| wb.lookup(&CellAddress::new("S", 1, r)).unwrap().clone();
        assert_eq!(get(1), CellContent::Constant(CellValue::Text("Revenue #1".into())));
        assert_eq!(get(2), CellContent::Constant(CellValue::Boolean(true)));
        assert_eq!(get(3), CellContent::Constant(CellValue::Number(-2.5)));
        assert_eq!(get(4), CellContent::Constant(CellValue::Text("say \"hi\"".into())));
    }

    #[test]
    fn directives_set_feature_flags() {
        let report = parse_fixture("[sheet: S]\n[pivot]\n[autofilter]\nA1 = 1").unwrap();
        assert!(report.workbook.has_pivot_tables);
        assert!(report.workbook.has_autofilters);
    }

    #[test]
    fn cell_before_sheet_is_an_error() {
        let e = parse_fixture("A1 = 1").unwrap_err();
        assert!(e.to_string().contains("before any [sheet:]"));
    }

    #[test]
    fn duplicate_cell_is_an_error() {
        let e = parse_fixture("[sheet: S]\nA1 = 1\nA1 = 2").unwrap_err();
        assert!(e.to_string().contains("duplicate cell"));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let report = parse_fixture("# header\n\n[sheet: S]\n\n# mid\nA1 = 1\n").unwrap();
        assert_eq!(report.workbook.cell_count(), 1);
    }
}
