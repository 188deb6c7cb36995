//! Reference-to-computed vertex correspondence.
//!
//! Matching is strictly per frame: a reference detection may only pair
//! with a computed detection in the same frame, so temporal shifts surface
//! as vertex and edge errors rather than being absorbed by the matching.

use std::collections::HashMap;

use crate::lineage_graph::{TrackingGraph, Vertex, VertexId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchingStrategy {
    /// Pair iff same (track id, frame). For simulated graphs that share ids.
    ExactId,
    /// A reference vertex pairs with the computed vertex whose box contains
    /// its centroid; one computed box may absorb several reference vertices
    /// (that is what feeds the missed-split count).
    CentroidInBox,
    /// Greedy one-to-one assignment by descending IoU at the given
    /// threshold in (0, 1].
    IouThreshold(f64),
}

/// Reference-to-computed vertex pairs. Each reference vertex appears in at
/// most one pair; a computed vertex may appear in many (its multiplicity
/// `k_c` drives the missed-split count).
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pairs: Vec<(VertexId, VertexId)>,
    ref_to_comp: HashMap<VertexId, VertexId>,
    comp_counts: HashMap<VertexId, usize>,
}

impl Correspondence {
    fn from_pairs(mut pairs: Vec<(VertexId, VertexId)>) -> Self {
        pairs.sort_unstable();
        let ref_to_comp = pairs.iter().copied().collect();
        let mut comp_counts: HashMap<VertexId, usize> = HashMap::new();
        for &(_, c) in &pairs {
            *comp_counts.entry(c).or_default() += 1;
        }
        Correspondence {
            pairs,
            ref_to_comp,
            comp_counts,
        }
    }

    /// Pairs sorted by (reference id, computed id).
    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pairs
    }

    pub fn comp_for_ref(&self, ref_id: VertexId) -> Option<VertexId> {
        self.ref_to_comp.get(&ref_id).copied()
    }

    /// Number of reference vertices matched to this computed vertex.
    pub fn comp_match_count(&self, comp_id: VertexId) -> usize {
        self.comp_counts.get(&comp_id).copied().unwrap_or(0)
    }

    pub fn matched_ref_count(&self) -> usize {
        self.pairs.len()
    }
}

fn by_frame(g: &TrackingGraph) -> HashMap<u32, Vec<&Vertex>> {
    let mut map: HashMap<u32, Vec<&Vertex>> = HashMap::new();
    for v in g.vertices() {
        map.entry(v.frame).or_default().push(v);
    }
    for vs in map.values_mut() {
        vs.sort_by_key(|v| v.id);
    }
    map
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// Frame-by-frame vertex matching under the chosen strategy. Deterministic:
/// ties break toward lower vertex ids.
pub fn match_vertices(
    reference: &TrackingGraph,
    computed: &TrackingGraph,
    strategy: MatchingStrategy,
) -> Result<Correspondence> {
    match strategy {
        MatchingStrategy::ExactId => {
            let key_map = |g: &TrackingGraph, side: &'static str| -> Result<HashMap<(u32, u32), VertexId>> {
                let mut map = HashMap::with_capacity(g.vertex_count());
                for v in g.vertices() {
                    if map.insert((v.track_id, v.frame), v.id).is_some() {
                        return Err(Error::IncomparableGraphs {
                            side,
                            track: v.track_id,
                            frame: v.frame,
                        });
                    }
                }
                Ok(map)
            };
            let ref_keys = key_map(reference, "reference")?;
            let comp_keys = key_map(computed, "computed")?;
            let mut pairs = Vec::new();
            for (key, &r) in &ref_keys {
                if let Some(&c) = comp_keys.get(key) {
                    pairs.push((r, c));
                }
            }
            Ok(Correspondence::from_pairs(pairs))
        }
        MatchingStrategy::CentroidInBox => {
            let comp_frames = by_frame(computed);
            let mut pairs = Vec::new();
            for r in reference.vertices() {
                let Some(candidates) = comp_frames.get(&r.frame) else {
                    continue;
                };
                let best = candidates
                    .iter()
                    .filter(|c| c.bbox.map_or(false, |b| b.contains(r.centroid)))
                    .min_by(|a, b| {
                        let da = dist2(a.centroid, r.centroid);
                        let db = dist2(b.centroid, r.centroid);
                        da.partial_cmp(&db)
                            .unwrap()
                            .then(a.id.cmp(&b.id))
                    });
                if let Some(c) = best {
                    pairs.push((r.id, c.id));
                }
            }
            Ok(Correspondence::from_pairs(pairs))
        }
        MatchingStrategy::IouThreshold(theta) => {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(Error::BadStrategy(format!(
                    "IoU threshold {theta} outside (0, 1]"
                )));
            }
            let ref_frames = by_frame(reference);
            let comp_frames = by_frame(computed);
            let mut pairs = Vec::new();
            let mut frames: Vec<u32> = ref_frames.keys().copied().collect();
            frames.sort_unstable();
            for frame in frames {
                let Some(comps) = comp_frames.get(&frame) else {
                    continue;
                };
                let refs = &ref_frames[&frame];
                let mut candidates = Vec::new();
                for r in refs {
                    let Some(rb) = r.bbox else { continue };
                    for c in comps {
                        let Some(cb) = c.bbox else { continue };
                        let iou = rb.iou(&cb);
                        if iou >= theta {
                            candidates.push((iou, r.id, c.id));
                        }
                    }
                }
                // Descending IoU, then lower ids; one-to-one on both sides.
                candidates.sort_by(|a, b| {
                    b.0.partial_cmp(&a.0)
                        .unwrap()
                        .then(a.1.cmp(&b.1))
                        .then(a.2.cmp(&b.2))
                });
                let mut ref_used = std::collections::HashSet::new();
                let mut comp_used = std::collections::HashSet::new();
                for (_, r, c) in candidates {
                    if ref_used.contains(&r) || comp_used.contains(&c) {
                        continue;
                    }
                    ref_used.insert(r);
                    comp_used.insert(c);
                    pairs.push((r, c));
                }
            }
            Ok(Correspondence::from_pairs(pairs))
        }
    }
}
