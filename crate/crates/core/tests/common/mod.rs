//! Shared test helpers: a seeded random lineage generator and a naive,
//! independently written scoring oracle.
//!
//! Compiled once per test target, so any single target uses only a
//! subset of the helpers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lineage_eval::aogm::AogmWeights;
use lineage_eval::lineage_graph::{build_graph, Detection, TrackRow, TrackTable, TrackingGraph};
use lineage_eval::lineage_graph::{Edge, EdgeSemantics, Vertex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid track table with at most `max_tracks` tracks over at most
/// `max_frames` frames; roughly half of the eligible tracks get a parent.
pub fn random_table(rng: &mut ChaCha8Rng, max_frames: u32, max_tracks: u32) -> TrackTable {
    let frames = rng.gen_range(1..=max_frames);
    let tracks = rng.gen_range(1..=max_tracks);
    let mut rows: Vec<TrackRow> = Vec::new();
    for label in 1..=tracks {
        let begin = rng.gen_range(0..frames);
        let end = rng.gen_range(begin..frames);
        let parent = if begin > 0 && rng.gen_bool(0.6) {
            let eligible: Vec<u32> = rows
                .iter()
                .filter(|r| r.end < begin)
                .filter(|r| rows.iter().filter(|c| c.parent == Some(r.label)).count() < 2)
                .map(|r| r.label)
                .collect();
            if eligible.is_empty() {
                None
            } else {
                Some(eligible[rng.gen_range(0..eligible.len())])
            }
        } else {
            None
        };
        rows.push(TrackRow {
            label,
            begin,
            end,
            parent,
        });
    }
    let mut detections = BTreeMap::new();
    for row in &rows {
        for frame in row.begin..=row.end {
            detections.insert(
                (row.label, frame),
                Detection {
                    centroid: (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)),
                    bbox: None,
                },
            );
        }
    }
    TrackTable {
        rows,
        detections,
        synthetic_geometry: false,
    }
}

/// Random (reference, computed) pair over a shared label space, so that
/// id matching pairs a useful fraction of the vertices.
pub fn random_pair(rng: &mut ChaCha8Rng, max_frames: u32, max_tracks: u32) -> (TrackingGraph, TrackingGraph) {
    let reference = build_graph(&random_table(rng, max_frames, max_tracks)).unwrap();
    let computed = build_graph(&random_table(rng, max_frames, max_tracks)).unwrap();
    (reference, computed)
}

/// Counts from the naive oracle, in score order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCounts {
    pub ns: u32,
    pub fn_: u32,
    pub fp: u32,
    pub ed: u32,
    pub ea: u32,
    pub ec: u32,
}

/// Unsupported / supported / wrong-semantics division links on the
/// computed side, counted naively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLinkBreakdown {
    pub unsupported: u32,
    pub supported: u32,
    pub wrong_semantics: u32,
}

fn id_match(reference: &TrackingGraph, computed: &TrackingGraph) -> Vec<(u32, u32)> {
    // Brute-force (track, frame) matching; quadratic on purpose.
    let mut pairs = Vec::new();
    for r in reference.vertices() {
        for c in computed.vertices() {
            if r.track_id == c.track_id && r.frame == c.frame {
                pairs.push((r.id, c.id));
            }
        }
    }
    pairs
}

fn edge_between(graph: &TrackingGraph, from: u32, to: u32) -> Option<&Edge> {
    graph.edges().iter().find(|e| e.from == from && e.to == to)
}

/// Independent scoring oracle under id matching. Deliberately naive:
/// brute-force matching, per-edge linear scans, and the edge books kept
/// from both sides with a cross-check that they agree.
pub fn naive_counts(reference: &TrackingGraph, computed: &TrackingGraph) -> OracleCounts {
    let pairs = id_match(reference, computed);
    let map: BTreeMap<u32, u32> = pairs.iter().copied().collect();
    let mapped = |rid: u32| map.get(&rid).copied();

    let fn_ = reference
        .vertices()
        .iter()
        .filter(|r| mapped(r.id).is_none())
        .count() as u32;
    let fp = computed
        .vertices()
        .iter()
        .filter(|c| pairs.iter().all(|(_, cid)| *cid != c.id))
        .count() as u32;
    let ns = computed
        .vertices()
        .iter()
        .map(|c| {
            let k = pairs.iter().filter(|(_, cid)| *cid == c.id).count() as u32;
            k.saturating_sub(1)
        })
        .sum::<u32>();

    // Computed-side book: each computed edge is kept, re-typed, or deleted.
    let mut ed = 0u32;
    let mut ec_comp = 0u32;
    for ce in computed.edges() {
        let mut supported = false;
        let mut semantics_ok = false;
        for re in reference.edges() {
            if mapped(re.from) == Some(ce.from) && mapped(re.to) == Some(ce.to) && ce.from != ce.to
            {
                supported = true;
                if re.semantics == ce.semantics {
                    semantics_ok = true;
                }
            }
        }
        if !supported {
            ed += 1;
        } else if !semantics_ok {
            ec_comp += 1;
        }
    }

    // Reference-side book: each reference edge is realized, covered by a
    // wrong-type computed edge, or must be added.
    let mut ea = 0u32;
    let mut ec_ref = 0u32;
    for re in reference.edges() {
        let (Some(cf), Some(ct)) = (mapped(re.from), mapped(re.to)) else {
            ea += 1;
            continue;
        };
        if cf == ct {
            ea += 1;
            continue;
        }
        match edge_between(computed, cf, ct) {
            Some(ce) if ce.semantics == re.semantics => {}
            Some(_) => ec_ref += 1,
            None => ea += 1,
        }
    }

    // Double entry: id matching is one-to-one, so the two books must see
    // the same set of wrong-type edges.
    assert_eq!(
        ec_comp, ec_ref,
        "edge books disagree on wrong-semantics count"
    );

    OracleCounts {
        ns,
        fn_,
        fp,
        ed,
        ea,
        ec: ec_comp,
    }
}

pub fn naive_score(reference: &TrackingGraph, computed: &TrackingGraph, w: &AogmWeights) -> f64 {
    let c = naive_counts(reference, computed);
    c.ns as f64 * w.ns
        + c.fn_ as f64 * w.fn_
        + c.fp as f64 * w.fp
        + c.ed as f64 * w.ed
        + c.ea as f64 * w.ea
        + c.ec as f64 * w.ec
}

/// Classifies the computed graph's division links naively, for checking
/// the strip-links identity from first principles.
pub fn naive_link_breakdown(
    reference: &TrackingGraph,
    computed: &TrackingGraph,
) -> OracleLinkBreakdown {
    let pairs = id_match(reference, computed);
    let map: BTreeMap<u32, u32> = pairs.iter().copied().collect();
    let mapped = |rid: u32| map.get(&rid).copied();

    let mut out = OracleLinkBreakdown {
        unsupported: 0,
        supported: 0,
        wrong_semantics: 0,
    };
    for ce in computed.edges() {
        if ce.semantics != EdgeSemantics::ParentLink {
            continue;
        }
        let mut supporting: Vec<&Edge> = Vec::new();
        for re in reference.edges() {
            if mapped(re.from) == Some(ce.from) && mapped(re.to) == Some(ce.to) {
                supporting.push(re);
            }
        }
        if supporting.is_empty() {
            out.unsupported += 1;
        } else if supporting
            .iter()
            .any(|re| re.semantics == EdgeSemantics::ParentLink)
        {
            out.supported += 1;
        } else {
            out.wrong_semantics += 1;
        }
    }
    out
}

/// Quick structural sanity check used by fuzzing helpers.
pub fn graph_is_valid(graph: &TrackingGraph) -> bool {
    graph.validate().is_empty()
}

#[allow(dead_code)]
pub fn vertex_by_key<'g>(graph: &'g TrackingGraph, track: u32, frame: u32) -> Option<&'g Vertex> {
    graph
        .vertices()
        .iter()
        .find(|v| v.track_id == track && v.frame == frame)
}
