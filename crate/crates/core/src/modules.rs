//! Assignment of workbook regions to the three top-level modules (Inputs,
//! Computations, Reports) and the input sub-modules, either from an explicit
//! manifest or by heuristic inference over sheet names and cell roles.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::graph::CellRole;
use crate::model::{parse_region, CellAddress, Region, Workbook};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: String,
        line: usize,
        message: String,
    },
    #[error("manifest region {region} names unknown sheet {sheet:?}")]
    UnknownSheet { region: String, sheet: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Sub-division of the Inputs module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputSubModule {
    /// Inputs region without a declared sub-module.
    Unspecified,
    /// External inputs kept in their original, raw form.
    SourceData,
    /// Judgmental or frequently changing inputs.
    Assumptions,
    /// Choices under the organization's control.
    DecisionVariables,
    /// Formulas that adapt the other inputs for the computations.
    PreProcessing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModuleKind {
    Inputs(InputSubModule),
    Computations,
    Reports,
}

impl ModuleKind {
    pub fn top_level(&self) -> TopLevel {
        match self {
            ModuleKind::Inputs(_) => TopLevel::Inputs,
            ModuleKind::Computations => TopLevel::Computations,
            ModuleKind::Reports => TopLevel::Reports,
        }
    }

    /// Manifest path form, e.g. "inputs.assumptions" or "computations".
    pub fn path(&self) -> &'static str {
        match self {
            ModuleKind::Inputs(InputSubModule::Unspecified) => "inputs",
            ModuleKind::Inputs(InputSubModule::SourceData) => "inputs.source",
            ModuleKind::Inputs(InputSubModule::Assumptions) => "inputs.assumptions",
            ModuleKind::Inputs(InputSubModule::DecisionVariables) => "inputs.decisions",
            ModuleKind::Inputs(InputSubModule::PreProcessing) => "inputs.preprocessing",
            ModuleKind::Computations => "computations",
            ModuleKind::Reports => "reports",
        }
    }

    pub fn from_path(path: &str) -> Option<ModuleKind> {
        Some(match path {
            "inputs" => ModuleKind::Inputs(InputSubModule::Unspecified),
            "inputs.source" => ModuleKind::Inputs(InputSubModule::SourceData),
            "inputs.assumptions" => ModuleKind::Inputs(InputSubModule::Assumptions),
            "inputs.decisions" => ModuleKind::Inputs(InputSubModule::DecisionVariables),
            "inputs.preprocessing" => ModuleKind::Inputs(InputSubModule::PreProcessing),
            "computations" => ModuleKind::Computations,
            "reports" => ModuleKind::Reports,
            _ => return None,
        })
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.path())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TopLevel {
    Inputs,
    Computations,
    Reports,
}

impl TopLevel {
    pub const ALL: [TopLevel; 3] = [TopLevel::Inputs, TopLevel::Computations, TopLevel::Reports];

    pub fn name(&self) -> &'static str {
        match self {
            TopLevel::Inputs => "Inputs",
            TopLevel::Computations => "Computations",
            TopLevel::Reports => "Reports",
        }
    }
}

/// Module membership of a cell: a concrete module, or the synthetic
/// "unassigned" bucket for cells no region claims.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModuleLabel {
    Assigned(ModuleKind),
    Unassigned,
}

impl ModuleLabel {
    pub fn kind(&self) -> Option<&ModuleKind> {
        match self {
            ModuleLabel::Assigned(k) => Some(k),
            ModuleLabel::Unassigned => None,
        }
    }
}

impl fmt::Display for ModuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleLabel::Assigned(k) => k.fmt(f),
            ModuleLabel::Unassigned => f.write_str("unassigned"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Manifest,
    Inferred,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub region: Region,
    pub kind: ModuleKind,
    /// Present on inferred assignments only.
    pub confidence: Option<f64>,
}

/// Ordered region-to-module assignments. On overlap, the later assignment
/// wins, so manifests can claim a whole sheet and then carve out sub-regions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleMap {
    pub assignments: Vec<Assignment>,
    pub provenance: Provenance,
}

impl ModuleMap {
    pub fn empty(provenance: Provenance) -> Self {
        ModuleMap {
            assignments: Vec::new(),
            provenance,
        }
    }

    /// Last matching assignment wins; no match is Unassigned.
    pub fn module_of(&self, addr: &CellAddress) -> Option<&ModuleKind> {
        self.assignments
            .iter()
            .rev()
            .find(|a| a.region.contains(addr))
            .map(|a| &a.kind)
    }

    pub fn label_of(&self, addr: &CellAddress) -> ModuleLabel {
        match self.module_of(addr) {
            Some(kind) => ModuleLabel::Assigned(*kind),
            None => ModuleLabel::Unassigned,
        }
    }

    pub fn has_top_level(&self, top: TopLevel) -> bool {
        self.assignments.iter().any(|a| a.kind.top_level() == top)
    }

    /// True when any assignment names a concrete input sub-module.
    pub fn has_input_submodules(&self) -> bool {
        self.assignments.iter().any(|a| {
            matches!(
                a.kind,
                ModuleKind::Inputs(sub) if sub != InputSubModule::Unspecified
            )
        })
    }

    /// Validates every assigned region against the workbook's sheet list.
    pub fn bind(&self, workbook: &Workbook) -> Result<(), ManifestError> {
        for a in &self.assignments {
            let sheet = a.region.sheet();
            if workbook.sheet(sheet).is_none() {
                return Err(ManifestError::UnknownSheet {
                    region: a.region.to_string(),
                    sheet: sheet.to_string(),
                });
            }
        }
        Ok(())
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<ModuleMap, ManifestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest_named(&text, &path.display().to_string())
}

pub fn parse_manifest(text: &str) -> Result<ModuleMap, ManifestError> {
    parse_manifest_named(text, "<manifest>")
}

fn parse_manifest_named(text: &str, path: &str) -> Result<ModuleMap, ManifestError> {
    let err = |line: usize, message: String| ManifestError::Syntax {
        path: path.to_string(),
        line,
        message,
    };
    let mut assignments = Vec::new();
    // Whole-sheet claims seen so far, for the duplicate-claim check.
    let mut whole_sheets: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected '<module> = <regions>'".to_string()))?;
        let key = key.trim();
        let kind = ModuleKind::from_path(key)
            .ok_or_else(|| err(line_no, format!("unknown module keyword {key:?}")))?;
        for region_text in value.split(',') {
            let region_text = region_text.trim();
            if region_text.is_empty() {
                return Err(err(line_no, "empty region in list".to_string()));
            }
            let region =
                parse_region(region_text).map_err(|e| err(line_no, e.to_string()))?;
            if let Region::WholeSheet { sheet } = &region {
                if let Some((_, prev_line)) = whole_sheets
                    .iter()
                    .find(|(s, _)| s.eq_ignore_ascii_case(sheet))
                {
                    return Err(err(
                        line_no,
                        format!(
                            "sheet {sheet:?} is already claimed whole by line {prev_line}"
                        ),
                    ));
                }
                whole_sheets.push((sheet.clone(), line_no));
            }
            assignments.push(Assignment {
                region,
                kind,
                confidence: None,
            });
        }
    }
    Ok(ModuleMap {
        assignments,
        provenance: Provenance::Manifest,
    })
}

/// Keyword lists steering stage-1 name inference. Matching is
/// case-insensitive and substring-based.
#[derive(Debug, Clone)]
pub struct InferenceKeywords {
    pub inputs: Vec<String>,
    pub computations: Vec<String>,
    pub reports: Vec<String>,
}

impl Default for InferenceKeywords {
    fn default() -> Self {
        let list = |items: &[&str]| items.iter().map(|s| s.to_string()).collect();
        InferenceKeywords {
            inputs: list(&["input", "assumption", "data", "source", "decision", "driver"]),
            computations: list(&["calc", "model", "working", "engine", "compute"]),
            reports: list(&["report", "output", "dashboard", "summary"]),
        }
    }
}

const STAGE1_CONFIDENCE: f64 = 0.9;
const STAGE2_CONFIDENCE: f64 = 0.5;
const ROLE_MAJORITY: f64 = 0.6;

/// Heuristic module inference, used only when no manifest is supplied.
///
/// Stage 1 maps whole sheets by name keyword. A name matching keywords of
/// several modules resolves Computations first, then Inputs, then Reports:
/// treating a mixed sheet as computations is the safest over-approximation
/// for the flow rules. Stage 2 maps the remaining sheets by majority cell
/// role. Input sub-modules come only from stage-1 sub-keywords; role counts
/// cannot distinguish assumptions from decisions.
pub fn infer_modules(
    workbook: &Workbook,
    roles: &BTreeMap<CellAddress, CellRole>,
    keywords: &InferenceKeywords,
) -> ModuleMap {
    let mut assignments = Vec::new();
    for sheet in workbook.sheets() {
        let name = sheet.name().to_ascii_lowercase();
        let matches = |list: &[String]| list.iter().any(|k| name.contains(k.as_str()));

        let stage1 = if matches(&keywords.computations) {
            Some(ModuleKind::Computations)
        } else if matches(&keywords.inputs) {
            Some(ModuleKind::Inputs(input_sub_keyword(&name)))
        } else if matches(&keywords.reports) {
            Some(ModuleKind::Reports)
        } else {
            None
        };

        let (kind, confidence) = match stage1 {
            Some(kind) => (kind, STAGE1_CONFIDENCE),
            None => (infer_by_roles(sheet, roles), STAGE2_CONFIDENCE),
        };
        assignments.push(Assignment {
            region: Region::whole_sheet(sheet.name()),
            kind,
            confidence: Some(confidence),
        });
    }
    ModuleMap {
        assignments,
        provenance: Provenance::Inferred,
    }
}

fn input_sub_keyword(lower_name: &str) -> InputSubModule {
    if lower_name.contains("source") {
        InputSubModule::SourceData
    } else if lower_name.contains("assumption") {
        InputSubModule::Assumptions
    } else if lower_name.contains("decision") {
        InputSubModule::DecisionVariables
    } else if lower_name.contains("preproc") || lower_name.contains("staging") {
        InputSubModule::PreProcessing
    } else {
        InputSubModule::Unspecified
    }
}

fn infer_by_roles(
    sheet: &crate::model::Sheet,
    roles: &BTreeMap<CellAddress, CellRole>,
) -> ModuleKind {
    let mut non_blank = 0usize;
    let mut inputs = 0usize;
    let mut formulas = 0usize;
    let mut outputs = 0usize;
    for cell in sheet.cells() {
        non_blank += 1;
        match roles.get(&cell.address) {
            Some(CellRole::Input) => inputs += 1,
            Some(CellRole::Intermediate) => formulas += 1,
            Some(CellRole::Output) => {
                formulas += 1;
                outputs += 1;
            }
            _ => {}
        }
    }
    if non_blank > 0 && inputs as f64 / non_blank as f64 >= ROLE_MAJORITY {
        return ModuleKind::Inputs(InputSubModule::Unspecified);
    }
    if formulas > 0 && outputs as f64 / formulas as f64 >= ROLE_MAJORITY {
        return ModuleKind::Reports;
    }
    ModuleKind::Computations
}
