//! The rule catalog and quality scoring.
//!
//! Rules are pure functions over immutable inputs (workbook, dependency
//! graph, cell roles, module map). Each violation becomes a [`Finding`]
//! charged against one or more quality dimensions; per-dimension scores
//! start at 100 and lose points per finding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::config::AnalyzerConfig;
use crate::formula::{extract_refs, is_trivial, Ast, UnanalyzableReason};
use crate::graph::{CellRole, DepGraph, ParsedFormulas, Quotient};
use crate::model::{CellAddress, CellContent, Region, Workbook};
use crate::modules::{InputSubModule, ModuleKind, ModuleLabel, ModuleMap, TopLevel};

/// The six quality dimensions scored by the analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    SuitableForAnalysis,
    Readable,
    Transferable,
    Accurate,
    Reusable,
    Modifiable,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::SuitableForAnalysis,
        Dimension::Readable,
        Dimension::Transferable,
        Dimension::Accurate,
        Dimension::Reusable,
        Dimension::Modifiable,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Dimension::SuitableForAnalysis => "suitable-for-analysis",
            Dimension::Readable => "readable",
            Dimension::Transferable => "transferable",
            Dimension::Accurate => "accurate",
            Dimension::Reusable => "reusable",
            Dimension::Modifiable => "modifiable",
        }
    }

    pub fn from_label(label: &str) -> Option<Dimension> {
        Dimension::ALL.into_iter().find(|d| d.label() == label)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Finding severity. Ordering is semantic: Info < Warning < Error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl Severity {
    pub fn label(self) -> &'static str {
        match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }

    pub fn from_label(label: &str) -> Option<Severity> {
        match label {
            "info" => Some(Severity::Info),
            "warning" => Some(Severity::Warning),
            "error" => Some(Severity::Error),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[allow(clippy::upper_case_acronyms)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
    R11,
    R12,
}

impl RuleId {
    pub const ALL: [RuleId; 12] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
        RuleId::R9,
        RuleId::R10,
        RuleId::R11,
        RuleId::R12,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RuleId::R1 => "R1",
            RuleId::R2 => "R2",
            RuleId::R3 => "R3",
            RuleId::R4 => "R4",
            RuleId::R5 => "R5",
            RuleId::R6 => "R6",
            RuleId::R7 => "R7",
            RuleId::R8 => "R8",
            RuleId::R9 => "R9",
            RuleId::R10 => "R10",
            RuleId::R11 => "R11",
            RuleId::R12 => "R12",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::R1 => "ModulesPresent",
            RuleId::R2 => "ModuleCohesion",
            RuleId::R3 => "InputsSeparated",
            RuleId::R4 => "OutputsGrouped",
            RuleId::R5 => "CalculatorDesign",
            RuleId::R6 => "FlowDirection",
            RuleId::R7 => "NoCircularity",
            RuleId::R8 => "InputsModuleDiscipline",
            RuleId::R9 => "ReportsTrivial",
            RuleId::R10 => "ReportsLinkSources",
            RuleId::R11 => "DomainApplicability",
            RuleId::R12 => "EchoDetection",
        }
    }

    pub fn from_code(code: &str) -> Option<RuleId> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.code().eq_ignore_ascii_case(code))
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Where a finding points. Ordering puts workbook-level findings first,
/// then regions, then cells, which keeps report output stable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    Workbook,
    Region(Region),
    Cell(CellAddress),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Workbook => f.write_str("workbook"),
            Location::Region(r) => r.fmt(f),
            Location::Cell(a) => f.write_str(&a.to_qualified_a1()),
        }
    }
}

/// One rule violation (or disclosure) with the dimensions it degrades.
/// `penalty` is charged per listed dimension; info findings carry zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub rule: RuleId,
    pub severity: Severity,
    pub location: Location,
    pub message: String,
    pub dimensions: Vec<Dimension>,
    pub penalty: u32,
}

/// Domain screen verdict. This never blocks analysis or charges points; it
/// annotates the report header, because the guidelines are meaningful only
/// for analytical models in the first place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applicability {
    Applicable,
    LikelyNotAnalytical { reasons: Vec<String> },
}

impl Applicability {
    pub fn is_applicable(&self) -> bool {
        matches!(self, Applicability::Applicable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub findings: Vec<Finding>,
    pub dimension_scores: BTreeMap<Dimension, u32>,
    pub applicability: Applicability,
    /// Pass iff no error-level finding from R1, R3, R6, or R7: the workbook
    /// has the three modules, separated inputs, and disciplined flow.
    pub structured_design_pass: bool,
}

/// Everything the rules read. All pieces must come from the same workbook.
pub struct RuleContext<'a> {
    pub workbook: &'a Workbook,
    pub graph: &'a DepGraph,
    pub roles: &'a BTreeMap<CellAddress, CellRole>,
    pub map: &'a ModuleMap,
    pub quotient: &'a Quotient,
    pub parsed: &'a ParsedFormulas,
    pub config: &'a AnalyzerConfig,
}

impl<'a> RuleContext<'a> {
    fn label_of(&self, addr: &CellAddress) -> ModuleLabel {
        self.map.label_of(addr)
    }

    fn ast_of(&self, addr: &CellAddress) -> Option<&Ast> {
        self.parsed.asts.get(addr)
    }
}

/// Evaluates every enabled rule and aggregates scores. Findings come out
/// sorted by (rule, location, message), so two runs over the same inputs
/// are byte-identical.
pub fn run_rules(ctx: &RuleContext<'_>) -> QualityReport {
    let mut findings = Vec::new();
    let shared = SharedAnalysis::compute(ctx);

    let rules: [(RuleId, fn(&RuleContext<'_>, &SharedAnalysis, &mut Emitter)); 12] = [
        (RuleId::R1, r1_modules_present),
        (RuleId::R2, r2_module_cohesion),
        (RuleId::R3, r3_inputs_separated),
        (RuleId::R4, r4_outputs_grouped),
        (RuleId::R5, r5_calculator_design),
        (RuleId::R6, r6_flow_direction),
        (RuleId::R7, r7_no_circularity),
        (RuleId::R8, r8_inputs_module_discipline),
        (RuleId::R9, r9_reports_trivial),
        (RuleId::R10, r10_reports_link_sources),
        (RuleId::R11, r11_domain_applicability),
        (RuleId::R12, r12_echo_detection),
    ];
    for (rule, eval) in rules {
        if !ctx.config.rule_enabled(rule) {
            continue;
        }
        let mut emitter = Emitter {
            rule,
            config: ctx.config,
            out: &mut findings,
        };
        eval(ctx, &shared, &mut emitter);
    }

    findings.sort_by(|a, b| {
        (a.rule, &a.location, &a.message).cmp(&(b.rule, &b.location, &b.message))
    });

    let dimension_scores = score(&findings, ctx.config);
    let structured_design_pass = !findings.iter().any(|f| {
        f.severity == Severity::Error
            && matches!(f.rule, RuleId::R1 | RuleId::R3 | RuleId::R6 | RuleId::R7)
    });

    QualityReport {
        dimension_scores,
        applicability: applicability_verdict(ctx),
        structured_design_pass,
        findings,
    }
}

/// Per-dimension scores: 100 minus the penalties of every finding charging
/// that dimension, floored at zero.
pub fn score(findings: &[Finding], _config: &AnalyzerConfig) -> BTreeMap<Dimension, u32> {
    let mut totals: BTreeMap<Dimension, u64> = Dimension::ALL.iter().map(|d| (*d, 0)).collect();
    for finding in findings {
        for dim in &finding.dimensions {
            *totals.get_mut(dim).expect("all dimensions present") += finding.penalty as u64;
        }
    }
    totals
        .into_iter()
        .map(|(d, total)| (d, 100u64.saturating_sub(total) as u32))
        .collect()
}

struct Emitter<'a> {
    rule: RuleId,
    config: &'a AnalyzerConfig,
    out: &'a mut Vec<Finding>,
}

impl Emitter<'_> {
    fn error(&mut self, location: Location, message: String, dimensions: &[Dimension]) {
        self.out.push(Finding {
            rule: self.rule,
            severity: Severity::Error,
            location,
            message,
            dimensions: dimensions.to_vec(),
            penalty: self.config.penalty_error,
        });
    }

    fn warning(&mut self, location: Location, message: String, dimensions: &[Dimension]) {
        self.out.push(Finding {
            rule: self.rule,
            severity: Severity::Warning,
            location,
            message,
            dimensions: dimensions.to_vec(),
            penalty: self.config.penalty_warning,
        });
    }

    fn info(&mut self, location: Location, message: String) {
        self.out.push(Finding {
            rule: self.rule,
            severity: Severity::Info,
            location,
            message,
            dimensions: Vec::new(),
            penalty: 0,
        });
    }
}

/// Facts shared by several rules, computed once: echo cells (recognized
/// ingredient links) and the interleaved input cells of the calculator
/// pattern. Both are pure functions of the inputs, independent of which
/// rules are enabled.
struct SharedAnalysis {
    echo_cells: BTreeSet<CellAddress>,
    /// Per sheet: number of separated input runs inside computations cells,
    /// and the participating input cells, when runs reach the threshold.
    interleaves: Vec<SheetInterleave>,
    /// Union of all interleaved input cells, exempted from the grouping rule.
    claimed_by_interleave: BTreeSet<CellAddress>,
}

struct SheetInterleave {
    runs: usize,
    input_cells: Vec<CellAddress>,
}

impl SharedAnalysis {
    fn compute(ctx: &RuleContext<'_>) -> SharedAnalysis {
        let mut echo_cells = BTreeSet::new();
        for cell in ctx.workbook.cells() {
            if ctx.label_of(&cell.address) != ModuleLabel::Assigned(ModuleKind::Computations) {
                continue;
            }
            let Some(Ast::CellRef { addr, .. }) = ctx.ast_of(&cell.address) else {
                continue;
            };
            let precedent = ctx.workbook.canonicalize(addr);
            match ctx.label_of(&precedent) {
                ModuleLabel::Assigned(kind) if kind.top_level() != TopLevel::Computations => {
                    echo_cells.insert(cell.address.clone());
                }
                _ => {}
            }
        }

        let mut interleaves = Vec::new();
        let mut claimed = BTreeSet::new();
        for sheet in ctx.workbook.sheets() {
            let mut runs = 0usize;
            let mut input_cells = Vec::new();
            let mut previous_was_input: Option<bool> = None;
            for cell in sheet.cells() {
                if ctx.label_of(&cell.address)
                    != ModuleLabel::Assigned(ModuleKind::Computations)
                {
                    continue;
                }
                let is_input = match &cell.content {
                    CellContent::Formula(_) => false,
                    CellContent::Constant(_) => {
                        if ctx.roles.get(&cell.address) == Some(&CellRole::Input) {
                            true
                        } else {
                            continue; // labels and orphans do not break runs
                        }
                    }
                };
                if is_input {
                    if previous_was_input != Some(true) {
                        runs += 1;
                    }
                    input_cells.push(cell.address.clone());
                }
                previous_was_input = Some(is_input);
            }
            if runs >= ctx.config.interleave_min && input_cells.len() >= 2 {
                claimed.extend(input_cells.iter().cloned());
                interleaves.push(SheetInterleave { runs, input_cells });
            }
        }

        SharedAnalysis {
            echo_cells,
            interleaves,
            claimed_by_interleave: claimed,
        }
    }
}

fn applicability_verdict(ctx: &RuleContext<'_>) -> Applicability {
    let mut reasons = Vec::new();
    if ctx.workbook.has_pivot_tables {
        reasons.push("workbook contains pivot tables".to_string());
    }
    if ctx.workbook.has_autofilters {
        reasons.push("workbook declares autofilters".to_string());
    }
    let cells = ctx.workbook.cell_count();
    let density = if cells == 0 {
        0.0
    } else {
        ctx.workbook.formula_count() as f64 / cells as f64
    };
    if density < ctx.config.density_threshold {
        reasons.push(format!(
            "formula density {:.3} is below {}",
            density, ctx.config.density_threshold
        ));
    }
    if reasons.is_empty() {
        Applicability::Applicable
    } else {
        Applicability::LikelyNotAnalytical { reasons }
    }
}

/// R1: the workbook must exhibit the three top-level modules.
fn r1_modules_present(ctx: &RuleContext<'_>, _shared: &SharedAnalysis, emit: &mut Emitter) {
    for top in TopLevel::ALL {
        if !ctx.map.has_top_level(top) {
            emit.error(
                Location::Workbook,
                format!("no {} module identified in the workbook", top.name()),
                &[Dimension::Readable, Dimension::Transferable],
            );
        }
    }
}

/// R2: each module should be dominated by its characteristic content.
/// Inputs by constants (pre-processing excluded), computations by formulas
/// (ingredient links excluded), reports by trivial formulas and labels.
fn r2_module_cohesion(ctx: &RuleContext<'_>, shared: &SharedAnalysis, emit: &mut Emitter) {
    let mut tallies: BTreeMap<TopLevel, (usize, usize)> = BTreeMap::new();
    for cell in ctx.workbook.cells() {
        let ModuleLabel::Assigned(kind) = ctx.label_of(&cell.address) else {
            continue;
        };
        let top = kind.top_level();
        let counted = match top {
            TopLevel::Inputs => {
                if kind == ModuleKind::Inputs(InputSubModule::PreProcessing) {
                    continue;
                }
                matches!(cell.content, CellContent::Constant(_))
            }
            TopLevel::Computations => {
                if shared.echo_cells.contains(&cell.address) {
                    continue;
                }
                cell.content.is_formula()
            }
            TopLevel::Reports => match &cell.content {
                CellContent::Formula(_) => ctx
                    .ast_of(&cell.address)
                    .map(|ast| is_trivial(ast, &ctx.config.trivial_functions))
                    .unwrap_or(false),
                CellContent::Constant(v) => v.is_text(),
            },
        };
        let entry = tallies.entry(top).or_insert((0, 0));
        entry.1 += 1;
        if counted {
            entry.0 += 1;
        }
    }
    for (top, (dominant, total)) in tallies {
        if total == 0 {
            continue;
        }
        let fraction = dominant as f64 / total as f64;
        if fraction < ctx.config.cohesion_threshold {
            let expected = match top {
                TopLevel::Inputs => "constants",
                TopLevel::Computations => "formulas",
                TopLevel::Reports => "trivial formulas and labels",
            };
            emit.warning(
                Location::Workbook,
                format!(
                    "{} module lacks a clear purpose: {:.0}% {} (threshold {:.0}%)",
                    top.name(),
                    fraction * 100.0,
                    expected,
                    ctx.config.cohesion_threshold * 100.0
                ),
                &[Dimension::Readable, Dimension::Modifiable],
            );
        }
    }
}

/// R3: inputs live in the Inputs module and nowhere else. Formulas in
/// source-data regions are the input-discipline rule's finding, and
/// interleaved inputs are the calculator rule's, so neither is double
/// charged here.
fn r3_inputs_separated(ctx: &RuleContext<'_>, shared: &SharedAnalysis, emit: &mut Emitter) {
    let dims = [Dimension::SuitableForAnalysis, Dimension::Reusable];
    for cell in ctx.workbook.cells() {
        match ctx.label_of(&cell.address) {
            ModuleLabel::Assigned(ModuleKind::Inputs(sub)) => {
                if cell.content.is_formula()
                    && sub != InputSubModule::PreProcessing
                    && sub != InputSubModule::SourceData
                {
                    emit.error(
                        Location::Cell(cell.address.clone()),
                        "formula inside the Inputs module; move it to computations or the \
                         input pre-processing area"
                            .to_string(),
                        &dims,
                    );
                }
            }
            ModuleLabel::Assigned(ModuleKind::Computations) => {
                // Without an Inputs module there is nowhere to relocate the
                // constant; the missing module is already the R1 finding.
                if !ctx.map.has_top_level(TopLevel::Inputs) {
                    continue;
                }
                if ctx.roles.get(&cell.address) == Some(&CellRole::Input)
                    && !shared.claimed_by_interleave.contains(&cell.address)
                {
                    emit.error(
                        Location::Cell(cell.address.clone()),
                        "input constant inside the Computations module; move it to the \
                         Inputs module"
                            .to_string(),
                        &dims,
                    );
                }
            }
            _ => {}
        }
    }
}

/// R4: when a Reports module exists, results should surface there instead
/// of dead-ending inside the computations.
fn r4_outputs_grouped(ctx: &RuleContext<'_>, _shared: &SharedAnalysis, emit: &mut Emitter) {
    if !ctx.map.has_top_level(TopLevel::Reports) {
        return;
    }
    for cell in ctx.workbook.cells() {
        if ctx.label_of(&cell.address) == ModuleLabel::Assigned(ModuleKind::Computations)
            && ctx.roles.get(&cell.address) == Some(&CellRole::Output)
        {
            emit.warning(
                Location::Cell(cell.address.clone()),
                "unreferenced result inside the Computations module; link it from the \
                 Reports module"
                    .to_string(),
                &[Dimension::SuitableForAnalysis, Dimension::Transferable],
            );
        }
    }
}

/// R5: calculator layout, where inputs are entered, used for calculation,
/// then more inputs are entered. Detected as two or more separated runs of
/// input constants among the formulas of one sheet, in reading order.
fn r5_calculator_design(_ctx: &RuleContext<'_>, shared: &SharedAnalysis, emit: &mut Emitter) {
    for interleave in &shared.interleaves {
        let bounding = bounding_region(&interleave.input_cells);
        let sample: Vec<String> = interleave
            .input_cells
            .iter()
            .take(6)
            .map(|a| a.to_qualified_a1())
            .collect();
        emit.warning(
            Location::Region(bounding),
            format!(
                "calculator layout: {} separated input groups interleaved with formulas \
                 ({} input cells, e.g. {})",
                interleave.runs,
                interleave.input_cells.len(),
                sample.join(", ")
            ),
            &[Dimension::SuitableForAnalysis],
        );
    }
}

fn bounding_region(cells: &[CellAddress]) -> Region {
    let first = &cells[0];
    let mut min_col = first.column;
    let mut max_col = first.column;
    let mut min_row = first.row;
    let mut max_row = first.row;
    for c in cells {
        min_col = min_col.min(c.column);
        max_col = max_col.max(c.column);
        min_row = min_row.min(c.row);
        max_row = max_row.max(c.row);
    }
    Region::rect(first.sheet.clone(), (min_col, min_row), (max_col, max_row))
}

/// R6: information flows Inputs -> Computations -> Reports. Direct
/// Inputs -> Reports links are allowed as well: report pages may cite raw
/// inputs alongside computed results. Within the Inputs module, sub-modules
/// feed only the pre-processing area. Edges touching unassigned cells are
/// warnings, not errors, since an inference gap is not a model defect.
fn r6_flow_direction(ctx: &RuleContext<'_>, _shared: &SharedAnalysis, emit: &mut Emitter) {
    let dims = [Dimension::Accurate, Dimension::Modifiable];
    for edge in &ctx.quotient.edges {
        match (edge.from.kind(), edge.to.kind()) {
            (Some(from), Some(to)) => {
                if flow_allowed(from, to) {
                    continue;
                }
                emit.error(
                    Location::Cell(edge.witness.1.clone()),
                    format!(
                        "illegal information flow {} -> {}: {} reference(s), e.g. {} -> {}",
                        edge.from,
                        edge.to,
                        edge.count,
                        edge.witness.0.to_qualified_a1(),
                        edge.witness.1.to_qualified_a1()
                    ),
                    &dims,
                );
            }
            _ => {
                emit.warning(
                    Location::Cell(edge.witness.1.clone()),
                    format!(
                        "flow cannot be certified: edge {} -> {} touches unassigned cells \
                         (e.g. {} -> {})",
                        edge.from,
                        edge.to,
                        edge.witness.0.to_qualified_a1(),
                        edge.witness.1.to_qualified_a1()
                    ),
                    &dims,
                );
            }
        }
    }
}

fn flow_allowed(from: &ModuleKind, to: &ModuleKind) -> bool {
    use ModuleKind::*;
    match (from, to) {
        (Inputs(_), Computations) => true,
        (Inputs(_), Reports) => true,
        (Computations, Reports) => true,
        (Inputs(sub), Inputs(InputSubModule::PreProcessing)) => {
            *sub != InputSubModule::PreProcessing
        }
        _ => false,
    }
}

/// R7: no circular references, and every statically invisible reference is
/// disclosed, because flow cannot be certified around blind spots.
fn r7_no_circularity(ctx: &RuleContext<'_>, _shared: &SharedAnalysis, emit: &mut Emitter) {
    let dims = [Dimension::Accurate];
    for cycle in ctx.graph.find_cycles() {
        let members: Vec<String> = cycle.iter().take(8).map(|a| a.to_qualified_a1()).collect();
        let suffix = if cycle.len() > 8 { ", ..." } else { "" };
        emit.error(
            Location::Cell(cycle[0].clone()),
            format!(
                "circular reference among {} cell(s): {}{}",
                cycle.len(),
                members.join(", "),
                suffix
            ),
            &dims,
        );
    }
    for entry in ctx.graph.unanalyzable() {
        let message = match entry.reason {
            UnanalyzableReason::ParseFailure => {
                format!("formula could not be parsed: {}", entry.source)
            }
            reason => format!(
                "reference cannot be analyzed statically ({}: {})",
                reason.label(),
                entry.source
            ),
        };
        emit.warning(Location::Cell(entry.owner.clone()), message, &dims);
    }
}

/// R8: the Inputs module receives inputs in raw form. Source-data cells
/// hold no formulas; pre-processing formulas read only Inputs cells.
/// Skipped with an info note when no sub-modules are mapped, since the
/// distinctions are not statically observable without a manifest.
fn r8_inputs_module_discipline(
    ctx: &RuleContext<'_>,
    _shared: &SharedAnalysis,
    emit: &mut Emitter,
) {
    if !ctx.map.has_input_submodules() {
        emit.info(
            Location::Workbook,
            "input sub-modules are not mapped; input-discipline checks skipped".to_string(),
        );
        return;
    }
    let dims = [Dimension::Reusable, Dimension::Accurate];
    for cell in ctx.workbook.cells() {
        match ctx.label_of(&cell.address) {
            ModuleLabel::Assigned(ModuleKind::Inputs(InputSubModule::SourceData)) => {
                if cell.content.is_formula() {
                    emit.error(
                        Location::Cell(cell.address.clone()),
                        "source data must be presented in its original form; found a formula"
                            .to_string(),
                        &dims,
                    );
                }
            }
            ModuleLabel::Assigned(ModuleKind::Inputs(InputSubModule::PreProcessing)) => {
                let Some(ast) = ctx.ast_of(&cell.address) else {
                    continue;
                };
                let refs = extract_refs(ast, ctx.config.range_cap);
                let mut outside: Vec<String> = Vec::new();
                for target in refs.cells {
                    let target = ctx.workbook.canonicalize(&target);
                    let is_inputs = matches!(
                        ctx.label_of(&target),
                        ModuleLabel::Assigned(ModuleKind::Inputs(_))
                    );
                    if !is_inputs {
                        outside.push(target.to_qualified_a1());
                    }
                }
                if !outside.is_empty() {
                    outside.truncate(4);
                    emit.error(
                        Location::Cell(cell.address.clone()),
                        format!(
                            "input pre-processing formula reaches outside the Inputs \
                             module: {}",
                            outside.join(", ")
                        ),
                        &dims,
                    );
                }
            }
            _ => {}
        }
    }
}

/// R9: report formulas do no or only trivial computation; anything beyond a
/// link (or an allowlisted presentational wrapper) belongs in computations.
fn r9_reports_trivial(ctx: &RuleContext<'_>, _shared: &SharedAnalysis, emit: &mut Emitter) {
    for cell in ctx.workbook.cells() {
        if ctx.label_of(&cell.address) != ModuleLabel::Assigned(ModuleKind::Reports) {
            continue;
        }
        let Some(ast) = ctx.ast_of(&cell.address) else {
            continue;
        };
        if !is_trivial(ast, &ctx.config.trivial_functions) {
            let CellContent::Formula(text) = &cell.content else {
                continue;
            };
            let shown: String = text.chars().take(60).collect();
            emit.error(
                Location::Cell(cell.address.clone()),
                format!("report formula computes instead of linking: ={shown}"),
                &[Dimension::Readable, Dimension::Accurate],
            );
        }
    }
}

/// R10: report links should point at Inputs or Computations cells. A
/// non-trivial formula over other report cells, or a link into unassigned
/// territory, makes the report's provenance unclear.
fn r10_reports_link_sources(ctx: &RuleContext<'_>, _shared: &SharedAnalysis, emit: &mut Emitter) {
    let dims = [Dimension::Transferable];
    for cell in ctx.workbook.cells() {
        if ctx.label_of(&cell.address) != ModuleLabel::Assigned(ModuleKind::Reports) {
            continue;
        }
        let Some(ast) = ctx.ast_of(&cell.address) else {
            continue;
        };
        let refs = extract_refs(ast, ctx.config.range_cap);
        let mut references_reports = false;
        let mut unassigned: Vec<String> = Vec::new();
        for target in refs.cells {
            let target = ctx.workbook.canonicalize(&target);
            match ctx.label_of(&target) {
                ModuleLabel::Assigned(ModuleKind::Reports) => references_reports = true,
                ModuleLabel::Unassigned => unassigned.push(target.to_qualified_a1()),
                _ => {}
            }
        }
        if references_reports && !is_trivial(ast, &ctx.config.trivial_functions) {
            emit.warning(
                Location::Cell(cell.address.clone()),
                "report formula computes over other report cells; link Inputs or \
                 Computations cells instead"
                    .to_string(),
                &dims,
            );
        }
        if !unassigned.is_empty() {
            unassigned.truncate(4);
            emit.warning(
                Location::Cell(cell.address.clone()),
                format!(
                    "report references cells outside any mapped module: {}",
                    unassigned.join(", ")
                ),
                &dims,
            );
        }
    }
}

/// R11: domain screen. Heavy business-intelligence tooling (pivot tables,
/// autofilters) or a near-constant grid suggests a data-driven spreadsheet,
/// not an analytical model; the verdict annotates the report header and
/// charges nothing.
fn r11_domain_applicability(ctx: &RuleContext<'_>, _shared: &SharedAnalysis, emit: &mut Emitter) {
    if let Applicability::LikelyNotAnalytical { reasons } = applicability_verdict(ctx) {
        emit.info(
            Location::Workbook,
            format!(
                "likely not an analytical spreadsheet model: {}",
                reasons.join("; ")
            ),
        );
    }
}

/// R12: a pure-reference formula in computations that brings a distant cell
/// next to the logic that uses it. Recognized as an ingredient pattern and
/// reported for information only.
fn r12_echo_detection(ctx: &RuleContext<'_>, shared: &SharedAnalysis, emit: &mut Emitter) {
    for addr in &shared.echo_cells {
        let precedent = match ctx.ast_of(addr) {
            Some(Ast::CellRef { addr: p, .. }) => ctx.workbook.canonicalize(p).to_qualified_a1(),
            _ => continue,
        };
        emit.info(
            Location::Cell(addr.clone()),
            format!("ingredient link: echoes {precedent} next to the computations"),
        );
    }
}
