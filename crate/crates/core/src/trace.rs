//! Machine-readable renderings of reduction traces.
//!
//! A [`TraceDocument`] captures one normalization run — input term,
//! strategy, budget, and every trace produced — and renders it as
//! versioned JSON or as a Graphviz digraph. Field order and node
//! numbering are fixed, so identical runs serialize byte-identically.

use crate::rewrite::{ReductionTrace, Strategy};
use crate::syntax::Term;
use serde::Serialize;
use std::fmt::Write as _;

/// Version tag embedded in every serialized document.
pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// One contraction in a serialized trace. `equivalence` lists the
/// structural chain from `from` to the redex, endpoints included.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub from: String,
    pub equivalence: Vec<String>,
    pub rule: String,
    pub to: String,
}

/// One complete reduction to a normal form.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord {
    pub result: String,
    pub exhaustive: bool,
    pub steps: Vec<StepRecord>,
}

/// A normalization run rendered with printed terms.
#[derive(Clone, Debug, Serialize)]
pub struct TraceDocument {
    pub schema: u32,
    pub term: String,
    pub strategy: String,
    pub budget: usize,
    pub traces: Vec<TraceRecord>,
}

impl TraceDocument {
    pub fn new(term: &Term, strategy: Strategy, budget: usize, traces: &[ReductionTrace]) -> Self {
        let strategy = match strategy {
            Strategy::Deterministic => "deterministic",
            Strategy::Exhaustive => "exhaustive",
        };
        TraceDocument {
            schema: TRACE_SCHEMA_VERSION,
            term: term.to_string(),
            strategy: strategy.to_string(),
            budget,
            traces: traces
                .iter()
                .map(|trace| TraceRecord {
                    result: trace.result.to_string(),
                    exhaustive: trace.exhaustive,
                    steps: trace
                        .steps
                        .iter()
                        .map(|step| StepRecord {
                            from: step.from.to_string(),
                            equivalence: step
                                .equiv_witness
                                .iter()
                                .map(|t| t.to_string())
                                .collect(),
                            rule: step.rule.to_string(),
                            to: step.to.to_string(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace documents always serialize")
    }

    /// A Graphviz digraph: dashed unlabeled edges for structural steps,
    /// solid rule-labeled edges for contractions, doubled ovals for
    /// results that are known normal forms.
    pub fn to_dot(&self) -> String {
        let mut nodes: Vec<String> = Vec::new();
        let index_of = |label: &str, nodes: &mut Vec<String>| -> usize {
            match nodes.iter().position(|n| n == label) {
                Some(i) => i,
                None => {
                    nodes.push(label.to_string());
                    nodes.len() - 1
                }
            }
        };
        struct Edge {
            from: usize,
            to: usize,
            rule: Option<String>,
        }
        let mut edges: Vec<Edge> = Vec::new();
        let mut finals: Vec<usize> = Vec::new();
        index_of(&self.term, &mut nodes);
        for trace in &self.traces {
            // Normalization works on the renamed-apart form of the
            // input; tie the printed input to it when they differ.
            let start = match trace.steps.first() {
                Some(step) => index_of(&step.from, &mut nodes),
                None => index_of(&trace.result, &mut nodes),
            };
            if start != 0 && !edges.iter().any(|e| e.from == 0 && e.to == start) {
                edges.push(Edge {
                    from: 0,
                    to: start,
                    rule: None,
                });
            }
            for step in &trace.steps {
                let chain: Vec<usize> = step
                    .equivalence
                    .iter()
                    .map(|t| index_of(t, &mut nodes))
                    .collect();
                for pair in chain.windows(2) {
                    if !edges
                        .iter()
                        .any(|e| e.from == pair[0] && e.to == pair[1] && e.rule.is_none())
                    {
                        edges.push(Edge {
                            from: pair[0],
                            to: pair[1],
                            rule: None,
                        });
                    }
                }
                let redex = *chain.last().unwrap_or(&index_of(&step.from, &mut nodes));
                let to = index_of(&step.to, &mut nodes);
                if !edges.iter().any(|e| {
                    e.from == redex && e.to == to && e.rule.as_deref() == Some(&step.rule)
                }) {
                    edges.push(Edge {
                        from: redex,
                        to,
                        rule: Some(step.rule.clone()),
                    });
                }
            }
            if trace.exhaustive {
                let result = index_of(&trace.result, &mut nodes);
                if !finals.contains(&result) {
                    finals.push(result);
                }
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "digraph trace {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  node [shape=oval, fontname=\"monospace\"];");
        for (i, label) in nodes.iter().enumerate() {
            let peripheries = if finals.contains(&i) {
                ", peripheries=2"
            } else {
                ""
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"{}];", i, dot_escape(label), peripheries);
        }
        for edge in &edges {
            match &edge.rule {
                Some(rule) => {
                    let _ = writeln!(
                        out,
                        "  n{} -> n{} [label=\"{}\"];",
                        edge.from,
                        edge.to,
                        dot_escape(rule)
                    );
                }
                None => {
                    let _ = writeln!(out, "  n{} -> n{} [style=dashed, dir=none];", edge.from, edge.to);
                }
            }
        }
        let _ = writeln!(out, "}}");
        out
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
