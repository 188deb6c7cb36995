//! Scenario construction: lineage-tree references, the named tracking
//! mistakes applied to them, and an exhaustive search for score
//! inversions.
//!
//! An *inversion* is a (reference, computed) pair where the computed graph
//! with its division links scores worse under AOGM than the identical
//! graph with every division link removed, even though every division was
//! detected within tolerance.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::aogm::{evaluate, AogmWeights};
use crate::lineage_graph::{
    build_graph, Detection, Edge, EdgeSemantics, MitosisEvent, TrackRow, TrackTable,
    TrackingGraph, Vertex, VertexId,
};
use crate::matching::MatchingStrategy;
use crate::mitosis_metrics::{match_mitosis, mitosis_pr, MitosisTolerances};
use crate::{Error, Result};

/// Named tracking mistakes that still find the division itself.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// Daughters appear `d` frames late: the first `d` detections of each
    /// daughter are removed and the parent links re-target the daughters'
    /// new first detections.
    ShiftDaughterOnset(u32),
    /// The mother's track id continues into one daughter; that parent
    /// link becomes a TrackLink and any sibling link is dropped (the
    /// sibling starts as a fresh, parentless track).
    ExtendMotherIntoDaughter,
    /// Removes the listed detections and their incident edges.
    DropVertices(BTreeSet<VertexId>),
    /// One parent link is replaced by a same-track continuation via track
    /// relabeling; like [`Perturbation::ExtendMotherIntoDaughter`] but
    /// absorbing the other daughter.
    WrongSemanticsContinuation,
}

/// A reference graph with the same prediction twice: once with its
/// division links, once with them stripped. The two computed graphs share
/// the exact same vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPair {
    pub name: String,
    pub reference: TrackingGraph,
    pub computed_with_links: TrackingGraph,
    pub computed_without_links: TrackingGraph,
}

impl ScenarioPair {
    fn new(name: impl Into<String>, reference: TrackingGraph, with_links: TrackingGraph) -> Self {
        let computed_without_links = with_links.strip_parent_edges();
        ScenarioPair {
            name: name.into(),
            reference,
            computed_with_links: with_links,
            computed_without_links,
        }
    }
}

/// Full binary lineage: one root track that divides at each scheduled
/// frame, every live track dividing in each round. `k` division frames
/// yield `2^(k+1) - 1` tracks, `2^k` leaves and `2^k - 1` division events.
///
/// Track labels are heap-style: root 1, daughters of `L` are `2L` and
/// `2L + 1`. Centroids spread tracks horizontally and advance with the
/// frame vertically.
pub fn binary_tree_reference(divisions: &[u32], last_frame: u32) -> Result<TrackingGraph> {
    build_graph(&binary_tree_table(divisions, last_frame)?)
}

pub(crate) fn binary_tree_table(divisions: &[u32], last_frame: u32) -> Result<TrackTable> {
    for pair in divisions.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::BadSchedule(format!(
                "division frames must be strictly increasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if let Some(&last_division) = divisions.last() {
        if last_division >= last_frame {
            return Err(Error::BadSchedule(format!(
                "last division frame {last_division} must precede last frame {last_frame}"
            )));
        }
    }

    const SPAN: f64 = 1024.0;
    let generations = divisions.len();
    let mut rows = Vec::new();
    let mut detections = BTreeMap::new();
    for generation in 0..=generations {
        let width = 1u32 << generation;
        let begin = if generation == 0 {
            0
        } else {
            divisions[generation - 1] + 1
        };
        let end = if generation < generations {
            divisions[generation]
        } else {
            last_frame
        };
        for position in 0..width {
            let label = width + position;
            rows.push(TrackRow {
                label,
                begin,
                end,
                parent: (generation > 0).then_some(label / 2),
            });
            let x = (position as f64 + 0.5) * SPAN / width as f64;
            for frame in begin..=end {
                detections.insert(
                    (label, frame),
                    Detection {
                        centroid: (x, frame as f64 * 10.0),
                        bbox: None,
                    },
                );
            }
        }
    }
    Ok(TrackTable {
        rows,
        detections,
        synthetic_geometry: false,
    })
}

fn vertex_at(graph: &TrackingGraph, track: u32, frame: u32) -> Option<VertexId> {
    graph
        .vertices()
        .iter()
        .find(|v| v.track_id == track && v.frame == frame)
        .map(|v| v.id)
}

fn track_vertices(graph: &TrackingGraph, track: u32) -> Vec<&Vertex> {
    let mut vs: Vec<&Vertex> = graph
        .vertices()
        .iter()
        .filter(|v| v.track_id == track)
        .collect();
    vs.sort_by_key(|v| v.frame);
    vs
}

fn remove_vertices(graph: &TrackingGraph, removed: &BTreeSet<VertexId>) -> TrackingGraph {
    let vertices = graph
        .vertices()
        .iter()
        .filter(|v| !removed.contains(&v.id))
        .cloned()
        .collect();
    let edges = graph
        .edges()
        .iter()
        .filter(|e| !removed.contains(&e.from) && !removed.contains(&e.to))
        .cloned()
        .collect();
    TrackingGraph::new(vertices, edges).expect("subgraph of a well-formed graph")
}

/// Applies one mistake at one division event. The result always passes
/// [`TrackingGraph::validate`].
pub fn perturb(
    graph: &TrackingGraph,
    at: &MitosisEvent,
    perturbation: &Perturbation,
) -> Result<TrackingGraph> {
    let mother_last = vertex_at(graph, at.mother_track, at.mother_last_frame).ok_or_else(|| {
        Error::NotApplicable(format!(
            "no detection of track {} at frame {}",
            at.mother_track, at.mother_last_frame
        ))
    })?;

    match perturbation {
        Perturbation::ShiftDaughterOnset(d) => {
            let d = *d as usize;
            if d == 0 {
                return Err(Error::NotApplicable(
                    "onset shift must be at least one frame".into(),
                ));
            }
            let mut removed = BTreeSet::new();
            let mut relink = Vec::new();
            for daughter in &at.daughters {
                let dets = track_vertices(graph, daughter.track);
                if dets.len() <= d {
                    return Err(Error::NotApplicable(format!(
                        "track {} has only {} detections, cannot shift onset by {}",
                        daughter.track,
                        dets.len(),
                        d
                    )));
                }
                removed.extend(dets[..d].iter().map(|v| v.id));
                relink.push(dets[d].id);
            }
            let pruned = remove_vertices(graph, &removed);
            let mut edges = pruned.edges().to_vec();
            for new_first in relink {
                edges.push(Edge {
                    from: mother_last,
                    to: new_first,
                    semantics: EdgeSemantics::ParentLink,
                });
            }
            TrackingGraph::new(pruned.vertices().to_vec(), edges)
        }
        Perturbation::DropVertices(ids) => {
            for id in ids {
                if graph.vertex(*id).is_none() {
                    return Err(Error::NotApplicable(format!("no vertex with id {id}")));
                }
            }
            Ok(remove_vertices(graph, ids))
        }
        Perturbation::ExtendMotherIntoDaughter | Perturbation::WrongSemanticsContinuation => {
            // Same mechanics, different choice of continued daughter.
            let continued = match perturbation {
                Perturbation::ExtendMotherIntoDaughter => at.daughters.first(),
                _ => at.daughters.last(),
            }
            .ok_or_else(|| Error::NotApplicable("event has no daughters".into()))?;
            let absorbed: HashSet<u32> = std::iter::once(continued.track).collect();

            let vertices = graph
                .vertices()
                .iter()
                .map(|v| {
                    let mut v = v.clone();
                    if absorbed.contains(&v.track_id) {
                        v.track_id = at.mother_track;
                    }
                    v
                })
                .collect();
            let continued_first = vertex_at(graph, continued.track, continued.first_frame)
                .expect("daughter first detection exists");
            let edges = graph
                .edges()
                .iter()
                .filter_map(|e| {
                    if e.semantics == EdgeSemantics::ParentLink && e.from == mother_last {
                        if e.to == continued_first {
                            // The continuation itself.
                            Some(Edge {
                                semantics: EdgeSemantics::TrackLink,
                                ..*e
                            })
                        } else {
                            // Sibling links are dropped: with the mother
                            // continuing past the division frame, a link
                            // from a mid-track detection would no longer
                            // be structurally valid.
                            None
                        }
                    } else {
                        Some(*e)
                    }
                })
                .collect();
            TrackingGraph::new(vertices, edges)
        }
    }
}

/// Re-adds a division link from the mother's current last detection to
/// each daughter's current first detection. Used after perturbations that
/// removed the original link endpoints, modeling a tracker that still
/// reports the division at the shifted positions.
fn relink_event(graph: &TrackingGraph, mother: u32, daughters: &[u32]) -> TrackingGraph {
    let mother_dets = track_vertices(graph, mother);
    let Some(mother_last) = mother_dets.last().map(|v| v.id) else {
        return graph.clone();
    };
    let mother_last_frame = graph.vertex(mother_last).unwrap().frame;
    let mut edges = graph.edges().to_vec();
    for &daughter in daughters {
        let dets = track_vertices(graph, daughter);
        if let Some(first) = dets.first() {
            if first.frame > mother_last_frame && graph.has_edge(mother_last, first.id).is_none() {
                edges.push(Edge {
                    from: mother_last,
                    to: first.id,
                    semantics: EdgeSemantics::ParentLink,
                });
            }
        }
    }
    TrackingGraph::new(graph.vertices().to_vec(), edges).expect("relink keeps graph well-formed")
}

/// The four single-division cases: two where the predicted links are
/// supported (adding them lowers the score) and two where detection
/// shifts leave the links unsupported (adding them raises the score).
pub fn figure1_cases() -> Vec<ScenarioPair> {
    let reference = binary_tree_reference(&[1], 3).expect("static schedule");
    let event = reference.mitosis_events().remove(0);
    let daughters: Vec<u32> = event.daughters.iter().map(|d| d.track).collect();

    // Case 1: the prediction is the reference itself.
    let case1 = ScenarioPair::new("blue-1-exact", reference.clone(), reference.clone());

    // Case 2: daughters truncated at the far end; link endpoints intact.
    let last_ids: BTreeSet<VertexId> = daughters
        .iter()
        .map(|&t| track_vertices(&reference, t).last().unwrap().id)
        .collect();
    let with2 = perturb(&reference, &event, &Perturbation::DropVertices(last_ids)).unwrap();
    let case2 = ScenarioPair::new("blue-2-truncated-daughters", reference.clone(), with2);

    // Case 3: daughters detected one frame late.
    let with3 = perturb(&reference, &event, &Perturbation::ShiftDaughterOnset(1)).unwrap();
    let case3 = ScenarioPair::new("red-3-shifted-onset", reference.clone(), with3);

    // Case 4: daughters' first detections missed; links re-attached to
    // the surviving detections.
    let first_ids: BTreeSet<VertexId> = daughters
        .iter()
        .map(|&t| track_vertices(&reference, t).first().unwrap().id)
        .collect();
    let dropped = perturb(&reference, &event, &Perturbation::DropVertices(first_ids)).unwrap();
    let with4 = relink_event(&dropped, event.mother_track, &daughters);
    let case4 = ScenarioPair::new("red-4-dropped-daughter-onsets", reference, with4);

    vec![case1, case2, case3, case4]
}

/// Mistake types available for the lineage-tree simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mistake {
    /// Daughters appear one frame late; links follow them (unsupported).
    ShiftOnset,
    /// Mother's id continues into one daughter; no division link remains.
    ExtendMother,
    /// Mother's last detection missed; links re-attached one frame early
    /// (unsupported).
    DropMotherLast,
}

pub const DEFAULT_DIVISIONS: [u32; 3] = [1, 4, 7];
pub const DEFAULT_LAST_FRAME: u32 = 9;

/// Default mistake mix for the seven-event tree: three shifted onsets and
/// two of each other type, assigned round-robin over events in
/// (mother last frame, mother label) order.
pub fn default_mistake_mix(events: usize) -> Vec<Mistake> {
    const CYCLE: [Mistake; 3] = [
        Mistake::ShiftOnset,
        Mistake::ExtendMother,
        Mistake::DropMotherLast,
    ];
    (0..events).map(|i| CYCLE[i % 3]).collect()
}

/// Seven-event lineage-tree scenario with the default mistake mix.
pub fn figure2_scenario() -> ScenarioPair {
    figure2_scenario_with(
        &DEFAULT_DIVISIONS,
        DEFAULT_LAST_FRAME,
        &default_mistake_mix(7),
    )
    .expect("static schedule")
}

/// Lineage-tree scenario with an explicit division schedule and one
/// mistake per event. `mix[i]` applies to the i-th event in (mother last
/// frame, mother label) order.
pub fn figure2_scenario_with(
    divisions: &[u32],
    last_frame: u32,
    mix: &[Mistake],
) -> Result<ScenarioPair> {
    let reference = binary_tree_reference(divisions, last_frame)?;
    let events = reference.mitosis_events();
    if events.len() != mix.len() {
        return Err(Error::BadSchedule(format!(
            "{} events but {} mistakes",
            events.len(),
            mix.len()
        )));
    }

    // Later events are perturbed first so earlier events' anchors stay
    // valid (relabeling only propagates labels downward through the tree).
    let mut computed = reference.clone();
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by_key(|&i| {
        std::cmp::Reverse((events[i].mother_last_frame, events[i].mother_track))
    });
    for i in order {
        let event = &events[i];
        let daughters: Vec<u32> = event.daughters.iter().map(|d| d.track).collect();
        computed = match mix[i] {
            Mistake::ShiftOnset => {
                perturb(&computed, event, &Perturbation::ShiftDaughterOnset(1))?
            }
            Mistake::ExtendMother => {
                perturb(&computed, event, &Perturbation::ExtendMotherIntoDaughter)?
            }
            Mistake::DropMotherLast => {
                let id = vertex_at(&computed, event.mother_track, event.mother_last_frame)
                    .ok_or_else(|| {
                        Error::NotApplicable(format!(
                            "mother {} has no detection at frame {}",
                            event.mother_track, event.mother_last_frame
                        ))
                    })?;
                let dropped = perturb(
                    &computed,
                    event,
                    &Perturbation::DropVertices(BTreeSet::from([id])),
                )?;
                relink_event(&dropped, event.mother_track, &daughters)
            }
        };
    }

    let name = format!(
        "tree-{}ev-{}",
        events.len(),
        mix.iter()
            .map(|m| match m {
                Mistake::ShiftOnset => 's',
                Mistake::ExtendMother => 'e',
                Mistake::DropMotherLast => 'd',
            })
            .collect::<String>()
    );
    Ok(ScenarioPair::new(name, reference, computed))
}

pub const ENUMERATION_FRAME_CAP: u32 = 6;
pub const ENUMERATION_TRACK_CAP: u32 = 7;

fn enum_table(rows: Vec<TrackRow>) -> TrackTable {
    let mut detections = BTreeMap::new();
    for row in &rows {
        for frame in row.begin..=row.end {
            detections.insert(
                (row.label, frame),
                Detection {
                    // Keeps same-track detections in different frames close
                    // enough that a truncated mother still matches its
                    // reference event under the default tolerances.
                    centroid: (row.label as f64 * 100.0, frame as f64 * 5.0),
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

/// Exhaustively enumerates single-division reference graphs within the
/// bounds together with truncation-style predictions of them, and returns
/// every pair where the prediction's division is detected perfectly
/// (recall = precision = 1 at default tolerances) yet AOGM scores the
/// prediction with its links worse than without them.
///
/// Results are deduplicated, sorted by total vertex count and fully
/// deterministic.
pub fn enumerate_inversions(max_frames: u32, max_tracks: u32) -> Result<Vec<ScenarioPair>> {
    if max_frames > ENUMERATION_FRAME_CAP || max_tracks > ENUMERATION_TRACK_CAP {
        return Err(Error::BoundsTooLarge {
            max_frames,
            frame_cap: ENUMERATION_FRAME_CAP,
            max_tracks,
            track_cap: ENUMERATION_TRACK_CAP,
        });
    }
    let weights = AogmWeights::default();
    let tolerances = MitosisTolerances::default();
    let mut results: Vec<(usize, String, ScenarioPair)> = Vec::new();
    let mut seen = HashSet::new();

    if max_frames < 2 || max_tracks < 2 {
        return Ok(Vec::new());
    }
    let last = max_frames - 1;

    // Reference shapes: mother over [0, me], one or two daughters over
    // [b_i, e_i] with b_i > me. Daughter spans are kept sorted to skip
    // label-swapped duplicates.
    let mut daughter_spans = Vec::new();
    for mother_end in 0..last {
        let mut spans = Vec::new();
        for begin in mother_end + 1..=last {
            for end in begin..=last {
                spans.push((begin, end));
            }
        }
        for n_daughters in 1..=2u32 {
            if 1 + n_daughters > max_tracks {
                continue;
            }
            daughter_spans.clear();
            if n_daughters == 1 {
                daughter_spans.extend(spans.iter().map(|&s| vec![s]));
            } else {
                for (i, &a) in spans.iter().enumerate() {
                    for &b in &spans[i..] {
                        daughter_spans.push(vec![a, b]);
                    }
                }
            }
            for spans_choice in &daughter_spans {
                let mut ref_rows = vec![TrackRow {
                    label: 1,
                    begin: 0,
                    end: mother_end,
                    parent: None,
                }];
                for (i, &(b, e)) in spans_choice.iter().enumerate() {
                    ref_rows.push(TrackRow {
                        label: 2 + i as u32,
                        begin: b,
                        end: e,
                        parent: Some(1),
                    });
                }
                let ref_table = enum_table(ref_rows);
                let Ok(reference) = build_graph(&ref_table) else {
                    continue;
                };

                collect_truncated_predictions(
                    &reference,
                    mother_end,
                    spans_choice,
                    &weights,
                    &tolerances,
                    &mut results,
                    &mut seen,
                );
            }
        }
    }

    results.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(results.into_iter().map(|(_, _, p)| p).collect())
}

/// Predictions are per-track truncations of the reference: the mother
/// keeps a prefix, each daughter keeps a suffix (or disappears), and the
/// division links connect the surviving endpoints.
#[allow(clippy::too_many_arguments)]
fn collect_truncated_predictions(
    reference: &TrackingGraph,
    mother_end: u32,
    spans: &[(u32, u32)],
    weights: &AogmWeights,
    tolerances: &MitosisTolerances,
    results: &mut Vec<(usize, String, ScenarioPair)>,
    seen: &mut HashSet<String>,
) {
    let ref_events = reference.mitosis_events();

    // Per-daughter choices: keep the suffix starting at b2, or drop the
    // track entirely (b2 = e + 1 sentinel).
    let daughter_choices: Vec<Vec<Option<u32>>> = spans
        .iter()
        .map(|&(b, e)| {
            let mut c: Vec<Option<u32>> = (b..=e).map(Some).collect();
            c.push(None);
            c
        })
        .collect();

    for comp_mother_end in 0..=mother_end {
        let mut stack = vec![Vec::new()];
        while let Some(choice) = stack.pop() {
            if choice.len() < spans.len() {
                for option in &daughter_choices[choice.len()] {
                    let mut next = choice.clone();
                    next.push(*option);
                    stack.push(next);
                }
                continue;
            }
            if choice.iter().all(|c: &Option<u32>| c.is_none()) {
                continue; // no daughters, no division to judge
            }
            let mut comp_rows = vec![TrackRow {
                label: 1,
                begin: 0,
                end: comp_mother_end,
                parent: None,
            }];
            for (i, begin) in choice.iter().enumerate() {
                if let Some(b2) = begin {
                    comp_rows.push(TrackRow {
                        label: 2 + i as u32,
                        begin: *b2,
                        end: spans[i].1,
                        parent: Some(1),
                    });
                }
            }
            let comp_table = enum_table(comp_rows);
            let Ok(computed) = build_graph(&comp_table) else {
                continue;
            };

            let with = evaluate(reference, &computed, MatchingStrategy::ExactId, weights)
                .expect("enumerated graphs have unique (track, frame) keys");
            let without_graph = computed.strip_parent_edges();
            let without =
                evaluate(reference, &without_graph, MatchingStrategy::ExactId, weights)
                    .expect("enumerated graphs have unique (track, frame) keys");
            if with.total <= without.total {
                continue;
            }
            let pr = mitosis_pr(&match_mitosis(
                &ref_events,
                &computed.mitosis_events(),
                tolerances,
            ));
            if pr.recall != 1.0 || pr.precision != 1.0 {
                continue;
            }

            let name = format!(
                "ref-m{}-{}__comp-m{}-{}",
                mother_end,
                spans
                    .iter()
                    .map(|(b, e)| format!("d{b}e{e}"))
                    .collect::<Vec<_>>()
                    .join("-"),
                comp_mother_end,
                choice
                    .iter()
                    .map(|c| match c {
                        Some(b) => format!("d{b}"),
                        None => "x".into(),
                    })
                    .collect::<Vec<_>>()
                    .join("-"),
            );
            if seen.insert(name.clone()) {
                let size = reference.vertex_count() + computed.vertex_count();
                results.push((
                    size,
                    name.clone(),
                    ScenarioPair::new(name, reference.clone(), computed),
                ));
            }
        }
    }
}
