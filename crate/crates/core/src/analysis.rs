//! End-to-end analysis pipeline: parse formulas, build the graph, classify
//! roles, resolve the module map, and run the rules.

use std::collections::BTreeMap;

use crate::config::AnalyzerConfig;
use crate::graph::{
    build_graph_with_cap, classify, module_quotient, parse_workbook_formulas, CellRole, DepGraph,
    ParsedFormulas, Quotient,
};
use crate::model::{CellAddress, Workbook};
use crate::modules::{infer_modules, ManifestError, ModuleMap};
use crate::rules::{run_rules, QualityReport, RuleContext};

/// Everything one analysis run produced. The report is the headline; the
/// rest is kept for output formats that want the details (module table,
/// quotient dump).
#[derive(Debug)]
pub struct Analysis {
    pub report: QualityReport,
    pub module_map: ModuleMap,
    pub quotient: Quotient,
    pub roles: BTreeMap<CellAddress, CellRole>,
    pub graph: DepGraph,
    pub parsed: ParsedFormulas,
}

/// Runs the full pipeline over a loaded workbook. A supplied manifest
/// always overrides inference and is validated against the workbook's
/// sheets before use.
pub fn analyze_workbook(
    workbook: &Workbook,
    manifest: Option<ModuleMap>,
    config: &AnalyzerConfig,
) -> Result<Analysis, ManifestError> {
    let parsed = parse_workbook_formulas(workbook);
    let graph = build_graph_with_cap(workbook, &parsed, config.range_cap);
    let roles = classify(workbook, &graph);

    let module_map = match manifest {
        Some(map) => {
            map.bind(workbook)?;
            map
        }
        None => infer_modules(workbook, &roles, &config.keywords),
    };

    let quotient = module_quotient(&graph, &module_map);
    let report = run_rules(&RuleContext {
        workbook,
        graph: &graph,
        roles: &roles,
        map: &module_map,
        quotient: &quotient,
        parsed: &parsed,
        config,
    });

    Ok(Analysis {
        report,
        module_map,
        quotient,
        roles,
        graph,
        parsed,
    })
}
