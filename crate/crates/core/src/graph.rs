//! Cell dependency graph: edges run precedent -> dependent. Built once per
//! workbook, then shared immutably by every rule evaluation.

use std::collections::{BTreeMap, HashMap};

use crate::formula::{extract_refs, Ast, FormulaError, UnanalyzableReason};
use crate::model::{CellAddress, CellContent, CellValue, Workbook};
use crate::modules::{ModuleLabel, ModuleMap};

/// Formula ASTs for a workbook, plus the cells whose formulas failed to
/// parse. Failures contribute no edges; they surface as findings instead.
#[derive(Debug, Default)]
pub struct ParsedFormulas {
    pub asts: BTreeMap<CellAddress, Ast>,
    pub failures: Vec<(CellAddress, FormulaError)>,
}

/// Parses every formula cell in the workbook against its own sheet and the
/// workbook's defined names.
pub fn parse_workbook_formulas(workbook: &Workbook) -> ParsedFormulas {
    let mut parsed = ParsedFormulas::default();
    for cell in workbook.cells() {
        if let CellContent::Formula(text) = &cell.content {
            match crate::formula::parse_formula(
                text,
                &cell.address.sheet,
                workbook.defined_names(),
            ) {
                Ok(ast) => {
                    parsed.asts.insert(cell.address.clone(), ast);
                }
                Err(e) => parsed.failures.push((cell.address.clone(), e)),
            }
        }
    }
    parsed
}

/// A reference that produced no edges, kept so the analyzer can disclose
/// exactly where its view of the flow is incomplete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnanalyzableEdge {
    /// The formula cell whose reference could not be resolved.
    pub owner: CellAddress,
    pub reason: UnanalyzableReason,
    pub source: String,
}

#[derive(Debug)]
pub struct DepGraph {
    nodes: Vec<CellAddress>,
    index: HashMap<CellAddress, usize>,
    /// Out-edges: `dependents[r]` lists the formula cells reading node r.
    dependents: Vec<Vec<usize>>,
    /// In-edges: `precedents[d]` lists the cells formula d reads.
    precedents: Vec<Vec<usize>>,
    /// Whether the node is a stored cell (false: synthesized blank target).
    stored: Vec<bool>,
    edge_count: usize,
    unanalyzable: Vec<UnanalyzableEdge>,
}

/// Builds the dependency graph. Every stored cell becomes a node; references
/// to blank or unstored addresses synthesize extra nodes so flow rules still
/// see those edges.
pub fn build_graph(workbook: &Workbook, parsed: &ParsedFormulas) -> DepGraph {
    build_graph_with_cap(workbook, parsed, crate::formula::DEFAULT_RANGE_CAP)
}

pub fn build_graph_with_cap(
    workbook: &Workbook,
    parsed: &ParsedFormulas,
    range_cap: usize,
) -> DepGraph {
    let mut graph = DepGraph {
        nodes: Vec::new(),
        index: HashMap::new(),
        dependents: Vec::new(),
        precedents: Vec::new(),
        stored: Vec::new(),
        edge_count: 0,
        unanalyzable: Vec::new(),
    };

    for cell in workbook.cells() {
        graph.intern(cell.address.clone(), true);
    }

    for cell in workbook.cells() {
        let Some(ast) = parsed.asts.get(&cell.address) else {
            continue;
        };
        let dependent = graph.intern(cell.address.clone(), true);
        let refs = extract_refs(ast, range_cap);
        for target in refs.cells {
            let precedent = graph.intern(workbook.canonicalize(&target), false);
            graph.dependents[precedent].push(dependent);
            graph.precedents[dependent].push(precedent);
            graph.edge_count += 1;
        }
        for entry in refs.unanalyzable {
            graph.unanalyzable.push(UnanalyzableEdge {
                owner: cell.address.clone(),
                reason: entry.reason,
                source: entry.source,
            });
        }
    }

    for (addr, error) in &parsed.failures {
        graph.unanalyzable.push(UnanalyzableEdge {
            owner: addr.clone(),
            reason: UnanalyzableReason::ParseFailure,
            source: error.to_string(),
        });
    }

    graph
}

impl DepGraph {
    fn intern(&mut self, addr: CellAddress, is_stored: bool) -> usize {
        if let Some(&i) = self.index.get(&addr) {
            if is_stored {
                self.stored[i] = true;
            }
            return i;
        }
        let i = self.nodes.len();
        self.index.insert(addr.clone(), i);
        self.nodes.push(addr);
        self.dependents.push(Vec::new());
        self.precedents.push(Vec::new());
        self.stored.push(is_stored);
        i
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[CellAddress] {
        &self.nodes
    }

    pub fn node_index(&self, addr: &CellAddress) -> Option<usize> {
        self.index.get(addr).copied()
    }

    pub fn is_stored(&self, node: usize) -> bool {
        self.stored[node]
    }

    /// True when at least one formula reads the given node.
    pub fn is_referenced(&self, node: usize) -> bool {
        !self.dependents[node].is_empty()
    }

    pub fn unanalyzable(&self) -> &[UnanalyzableEdge] {
        &self.unanalyzable
    }

    /// All edges as (precedent, dependent) address pairs, sorted.
    pub fn edges(&self) -> Vec<(&CellAddress, &CellAddress)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (r, deps) in self.dependents.iter().enumerate() {
            for &d in deps {
                out.push((&self.nodes[r], &self.nodes[d]));
            }
        }
        out.sort();
        out
    }

    /// Nontrivial strongly connected components: size two or more, or a
    /// single self-referencing cell. Members and components are sorted by
    /// address for deterministic reporting.
    pub fn find_cycles(&self) -> Vec<Vec<CellAddress>> {
        let components = strongly_connected_components(&self.dependents);
        let mut cycles: Vec<Vec<CellAddress>> = Vec::new();
        for comp in components {
            let nontrivial = comp.len() > 1
                || self.dependents[comp[0]].contains(&comp[0]);
            if nontrivial {
                let mut members: Vec<CellAddress> =
                    comp.iter().map(|&i| self.nodes[i].clone()).collect();
                members.sort();
                cycles.push(members);
            }
        }
        cycles.sort();
        cycles
    }
}

/// Tarjan's algorithm, iterative so deep dependency chains cannot overflow
/// the call stack. Returns every component, trivial ones included.
pub fn strongly_connected_components(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut index_of: Vec<Option<usize>> = vec![None; n];
    let mut lowlink: Vec<usize> = vec![0; n];
    let mut on_stack: Vec<bool> = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();

    // Explicit DFS frames: (node, next child position).
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if index_of[start].is_some() {
            continue;
        }
        frames.push((start, 0));
        index_of[start] = Some(next_index);
        lowlink[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            if *child < adjacency[v].len() {
                let w = adjacency[v][*child];
                *child += 1;
                match index_of[w] {
                    None => {
                        index_of[w] = Some(next_index);
                        lowlink[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, 0));
                    }
                    Some(w_index) => {
                        if on_stack[w] {
                            lowlink[v] = lowlink[v].min(w_index);
                        }
                    }
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index_of[v].unwrap() {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("scc stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(component);
                }
            }
        }
    }
    components
}

/// Structural classification of a cell, derived from its content and from
/// whether any formula references it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellRole {
    /// Constant referenced by at least one formula.
    Input,
    /// Formula referenced by at least one formula.
    Intermediate,
    /// Formula referenced by nothing.
    Output,
    /// Text constant referenced by nothing.
    Label,
    /// Non-text constant referenced by nothing.
    OrphanConstant,
}

impl CellRole {
    pub fn label(self) -> &'static str {
        match self {
            CellRole::Input => "input",
            CellRole::Intermediate => "intermediate",
            CellRole::Output => "output",
            CellRole::Label => "label",
            CellRole::OrphanConstant => "orphan-constant",
        }
    }
}

/// Assigns a role to every graph node. Stored cells partition into the five
/// roles; synthesized blank targets are reported as orphan constants.
pub fn classify(workbook: &Workbook, graph: &DepGraph) -> BTreeMap<CellAddress, CellRole> {
    let mut roles = BTreeMap::new();
    for (i, addr) in graph.nodes().iter().enumerate() {
        let referenced = graph.is_referenced(i);
        let role = if !graph.is_stored(i) {
            CellRole::OrphanConstant
        } else {
            match workbook.lookup(addr) {
                Ok(CellContent::Formula(_)) => {
                    if referenced {
                        CellRole::Intermediate
                    } else {
                        CellRole::Output
                    }
                }
                Ok(CellContent::Constant(value)) => {
                    if referenced {
                        CellRole::Input
                    } else if value.is_text() {
                        CellRole::Label
                    } else {
                        CellRole::OrphanConstant
                    }
                }
                Err(_) => CellRole::OrphanConstant,
            }
        };
        roles.insert(addr.clone(), role);
    }
    // A stored blank would be unusual, but keep the roles aligned with the
    // design rule: blanks read like constants.
    let _ = CellValue::Blank;
    roles
}

/// One aggregated edge of the module quotient graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientEdge {
    pub from: ModuleLabel,
    pub to: ModuleLabel,
    pub count: usize,
    /// Smallest witnessing (precedent, dependent) pair, for citations.
    pub witness: (CellAddress, CellAddress),
}

/// The cell graph folded over module labels. Intra-module edges are counted
/// separately from cross-module edges.
#[derive(Debug, Default)]
pub struct Quotient {
    pub edges: Vec<QuotientEdge>,
    pub intra: BTreeMap<ModuleLabel, usize>,
}

impl Quotient {
    pub fn cross_edge_total(&self) -> usize {
        self.edges.iter().map(|e| e.count).sum()
    }

    pub fn intra_edge_total(&self) -> usize {
        self.intra.values().sum()
    }
}

/// Folds the cell graph over the module map. Unassigned nodes land in the
/// synthetic [`ModuleLabel::Unassigned`] bucket.
pub fn module_quotient(graph: &DepGraph, map: &ModuleMap) -> Quotient {
    let labels: Vec<ModuleLabel> = graph
        .nodes()
        .iter()
        .map(|addr| map.label_of(addr))
        .collect();

    let mut cross: BTreeMap<(ModuleLabel, ModuleLabel), (usize, (CellAddress, CellAddress))> =
        BTreeMap::new();
    let mut intra: BTreeMap<ModuleLabel, usize> = BTreeMap::new();

    for (r, deps) in graph.dependents.iter().enumerate() {
        for &d in deps {
            let from = labels[r].clone();
            let to = labels[d].clone();
            if from == to {
                *intra.entry(from).or_insert(0) += 1;
                continue;
            }
            let witness = (graph.nodes()[r].clone(), graph.nodes()[d].clone());
            cross
                .entry((from, to))
                .and_modify(|(count, best)| {
                    *count += 1;
                    if witness < *best {
                        *best = witness.clone();
                    }
                })
                .or_insert((1, witness.clone()));
        }
    }

    Quotient {
        edges: cross
            .into_iter()
            .map(|((from, to), (count, witness))| QuotientEdge {
                from,
                to,
                count,
                witness,
            })
            .collect(),
        intra,
    }
}
