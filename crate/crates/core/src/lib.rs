//! Structural quality analysis for analytical spreadsheet workbooks.
//!
//! The library loads a workbook (from `.xlsx` or the plain-text fixture
//! format), parses every formula, builds the cell dependency graph, assigns
//! regions to the Inputs / Computations / Reports modules, and evaluates a
//! rule catalog that scores the workbook along six quality dimensions.

pub mod analysis;
pub mod config;
pub mod formula;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod modules;
pub mod rules;

pub use analysis::{analyze_workbook, Analysis};
pub use config::{load_config, parse_config, AnalyzerConfig, ConfigError};
pub use ingest::{load_auto, load_fixture, load_xlsx, IngestError, IngestReport, IngestWarning};
pub use model::{
    parse_a1, parse_region, Cell, CellAddress, CellContent, CellValue, ModelError, Region, Sheet,
    Workbook, WorkbookBuilder,
};
pub use modules::{
    load_manifest, parse_manifest, InputSubModule, ManifestError, ModuleKind, ModuleLabel,
    ModuleMap, Provenance, TopLevel,
};
pub use rules::{
    Applicability, Dimension, Finding, Location, QualityReport, RuleId, Severity,
};
