//! The weighted acyclic-oriented-graph-matching score.
//!
//! The score is an edit cost: how many vertex splits, vertex additions and
//! deletions, and edge additions, deletions and semantic changes turn the
//! computed graph into the reference graph, each multiplied by its weight.
//!
//! The edge classifier also exposes per-edge verdicts. They make the
//! division-link failure mode directly observable: a division link whose
//! endpoints were detected a frame or two off is *unsupported* and costs
//! extra, so adding it raises the score even though the division itself
//! was found.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::lineage_graph::{Edge, TrackingGraph, VertexId};
use crate::matching::{match_vertices, Correspondence, MatchingStrategy};
use crate::{Error, Result};

/// Weights for the six error terms. Defaults follow the established
/// AOGM parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AogmWeights {
    /// Missed splits (NS).
    pub ns: f64,
    /// False negative vertices (FN).
    #[serde(rename = "fn")]
    pub fn_: f64,
    /// False positive vertices (FP).
    pub fp: f64,
    /// Redundant edges to delete (ED).
    pub ed: f64,
    /// Missing edges to add (EA).
    pub ea: f64,
    /// Edges with wrong semantics (EC).
    pub ec: f64,
}

impl Default for AogmWeights {
    fn default() -> Self {
        AogmWeights {
            ns: 5.0,
            fn_: 10.0,
            fp: 1.0,
            ed: 1.0,
            ea: 1.5,
            ec: 1.5,
        }
    }
}

impl AogmWeights {
    pub fn all_non_negative(&self) -> bool {
        [self.ns, self.fn_, self.fp, self.ed, self.ea, self.ec]
            .iter()
            .all(|w| *w >= 0.0)
    }
}

/// The six error tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AogmCounts {
    pub ns: u32,
    #[serde(rename = "fn")]
    pub fn_: u32,
    pub fp: u32,
    pub ed: u32,
    pub ea: u32,
    pub ec: u32,
}

impl AogmCounts {
    pub fn is_zero(&self) -> bool {
        self.ns == 0 && self.fn_ == 0 && self.fp == 0 && self.ed == 0 && self.ea == 0 && self.ec == 0
    }
}

/// Verdict for a computed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompEdgeVerdict {
    /// Endpoint matches form a reference edge with equal semantics.
    SupportedCorrect,
    /// Endpoint matches form a reference edge, but semantics differ (EC).
    WrongSemantics,
    /// No reference edge behind it; must be deleted (ED).
    Unsupported,
}

/// Verdict for a reference edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RefEdgeVerdict {
    /// Present in the computed graph with matching semantics; costs nothing.
    Realized,
    /// Present in the computed graph with wrong semantics; already charged
    /// once on the computed side (EC), so not also EA.
    CoveredWrongSemantics,
    /// Must be added to the computed graph (EA).
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeVerdicts {
    pub computed: Vec<(Edge, CompEdgeVerdict)>,
    pub reference: Vec<(Edge, RefEdgeVerdict)>,
}

impl EdgeVerdicts {
    /// (unsupported, supported-correct, wrong-semantics) tallies over the
    /// computed graph's ParentLink edges; the three quantities in the
    /// strip-links identity.
    pub fn parent_link_breakdown(&self) -> (u32, u32, u32) {
        use crate::lineage_graph::EdgeSemantics::ParentLink;
        let mut unsupported = 0;
        let mut supported = 0;
        let mut wrong = 0;
        for (e, v) in &self.computed {
            if e.semantics != ParentLink {
                continue;
            }
            match v {
                CompEdgeVerdict::Unsupported => unsupported += 1,
                CompEdgeVerdict::SupportedCorrect => supported += 1,
                CompEdgeVerdict::WrongSemantics => wrong += 1,
            }
        }
        (unsupported, supported, wrong)
    }
}

/// FN / FP / NS from the correspondence alone.
///
/// FN: unmatched reference vertices. FP: computed vertices nothing matched
/// to. NS: split operations, `k - 1` for every computed vertex matched by
/// `k > 1` reference vertices.
pub fn classify_vertices(
    corr: &Correspondence,
    reference: &TrackingGraph,
    computed: &TrackingGraph,
) -> (u32, u32, u32) {
    let fn_ = reference
        .vertices()
        .iter()
        .filter(|v| corr.comp_for_ref(v.id).is_none())
        .count() as u32;
    let mut fp = 0;
    let mut ns = 0;
    for v in computed.vertices() {
        let k = corr.comp_match_count(v.id);
        if k == 0 {
            fp += 1;
        } else {
            ns += (k - 1) as u32;
        }
    }
    (fn_, fp, ns)
}

/// EA / ED / EC with per-edge verdicts.
///
/// A computed edge is supported iff some reference edge maps onto it under
/// the correspondence. A reference edge is realized iff both endpoints are
/// matched to distinct computed vertices joined by an edge of the same
/// semantics; if the computed edge exists with different semantics the
/// mistake is charged once as EC, otherwise the reference edge is missing
/// (EA). Unsupported computed edges, including edges hanging off false
/// positive vertices, are redundant (ED).
pub fn classify_edges(
    corr: &Correspondence,
    reference: &TrackingGraph,
    computed: &TrackingGraph,
) -> (u32, u32, u32, EdgeVerdicts) {
    // All (comp_from, comp_to) pairs induced by reference edges.
    let mut induced: HashMap<(VertexId, VertexId), Vec<&Edge>> = HashMap::new();
    for e in reference.edges() {
        if let (Some(a), Some(b)) = (corr.comp_for_ref(e.from), corr.comp_for_ref(e.to)) {
            if a != b {
                induced.entry((a, b)).or_default().push(e);
            }
        }
    }

    let mut ed = 0;
    let mut ec = 0;
    let mut computed_verdicts = Vec::with_capacity(computed.edge_count());
    for e in computed.edges() {
        let verdict = match induced.get(&(e.from, e.to)) {
            Some(backing) => {
                if backing.iter().any(|r| r.semantics == e.semantics) {
                    CompEdgeVerdict::SupportedCorrect
                } else {
                    ec += 1;
                    CompEdgeVerdict::WrongSemantics
                }
            }
            None => {
                ed += 1;
                CompEdgeVerdict::Unsupported
            }
        };
        computed_verdicts.push((*e, verdict));
    }

    let mut ea = 0;
    let mut reference_verdicts = Vec::with_capacity(reference.edge_count());
    for e in reference.edges() {
        let verdict = match (corr.comp_for_ref(e.from), corr.comp_for_ref(e.to)) {
            (Some(a), Some(b)) if a != b => match computed.has_edge(a, b) {
                Some(sem) if sem == e.semantics => RefEdgeVerdict::Realized,
                Some(_) => RefEdgeVerdict::CoveredWrongSemantics,
                None => RefEdgeVerdict::Missing,
            },
            // Unmatched endpoint, or both endpoints collapsed into one
            // computed vertex: the edge still has to be added.
            _ => RefEdgeVerdict::Missing,
        };
        if verdict == RefEdgeVerdict::Missing {
            ea += 1;
        }
        reference_verdicts.push((*e, verdict));
    }

    (
        ea,
        ed,
        ec,
        EdgeVerdicts {
            computed: computed_verdicts,
            reference: reference_verdicts,
        },
    )
}

/// The weighted sum; exact, no rounding.
pub fn aogm_score(counts: &AogmCounts, weights: &AogmWeights) -> f64 {
    weights.ns * counts.ns as f64
        + weights.fn_ * counts.fn_ as f64
        + weights.fp * counts.fp as f64
        + weights.ed * counts.ed as f64
        + weights.ea * counts.ea as f64
        + weights.ec * counts.ec as f64
}

/// Full evaluation of one (reference, computed) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub counts: AogmCounts,
    pub weights: AogmWeights,
    /// w * count per term, in (ns, fn, fp, ed, ea, ec) order.
    pub contributions: [f64; 6],
    pub total: f64,
    pub verdicts: EdgeVerdicts,
    /// (reference id, computed id) pairs, sorted.
    pub matched: Vec<(VertexId, VertexId)>,
}

fn counts_from(
    corr: &Correspondence,
    reference: &TrackingGraph,
    computed: &TrackingGraph,
) -> (AogmCounts, EdgeVerdicts) {
    let (fn_, fp, ns) = classify_vertices(corr, reference, computed);
    let (ea, ed, ec, verdicts) = classify_edges(corr, reference, computed);
    (
        AogmCounts {
            ns,
            fn_,
            fp,
            ed,
            ea,
            ec,
        },
        verdicts,
    )
}

/// Matches vertices, classifies vertices and edges, and assembles the
/// weighted report.
pub fn evaluate(
    reference: &TrackingGraph,
    computed: &TrackingGraph,
    strategy: MatchingStrategy,
    weights: &AogmWeights,
) -> Result<EvaluationReport> {
    let corr = match_vertices(reference, computed, strategy)?;
    Ok(evaluate_with_correspondence(reference, computed, &corr, weights))
}

/// Same as [`evaluate`] but with a fixed, precomputed correspondence.
pub fn evaluate_with_correspondence(
    reference: &TrackingGraph,
    computed: &TrackingGraph,
    corr: &Correspondence,
    weights: &AogmWeights,
) -> EvaluationReport {
    let (counts, verdicts) = counts_from(corr, reference, computed);
    let contributions = [
        weights.ns * counts.ns as f64,
        weights.fn_ * counts.fn_ as f64,
        weights.fp * counts.fp as f64,
        weights.ed * counts.ed as f64,
        weights.ea * counts.ea as f64,
        weights.ec * counts.ec as f64,
    ];
    EvaluationReport {
        counts,
        weights: *weights,
        contributions,
        total: aogm_score(&counts, weights),
        verdicts,
        matched: corr.pairs().to_vec(),
    }
}

/// Score change from keeping one computed edge, under a fixed
/// correspondence: AOGM(computed) - AOGM(computed without the edge).
///
/// Negative for edges that realize reference edges, positive for
/// unsupported edges, zero (at default weights) for a wrong-semantics edge.
pub fn edge_delta(
    reference: &TrackingGraph,
    computed: &TrackingGraph,
    corr: &Correspondence,
    edge: &Edge,
    weights: &AogmWeights,
) -> Result<f64> {
    if computed.has_edge(edge.from, edge.to).is_none() {
        return Err(Error::EdgeNotFound {
            from: edge.from,
            to: edge.to,
        });
    }
    let (with_counts, _) = counts_from(corr, reference, computed);
    let without = TrackingGraph::new(
        computed.vertices().to_vec(),
        computed
            .edges()
            .iter()
            .filter(|e| !(e.from == edge.from && e.to == edge.to))
            .cloned()
            .collect(),
    )
    .expect("removing an edge keeps the graph well-formed");
    let (without_counts, _) = counts_from(corr, reference, &without);
    Ok(aogm_score(&with_counts, weights) - aogm_score(&without_counts, weights))
}
