//! Event-level division metrics: recall, precision and F1 of mitosis
//! detection under temporal and spatial tolerances.
//!
//! This is the complementary view to the edge-level AOGM score: a division
//! predicted a frame or two off still counts as detected here, while AOGM
//! charges every shifted link.

use serde::Serialize;

use crate::lineage_graph::MitosisEvent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MitosisTolerances {
    /// Maximum |mother-last-frame difference| in frames.
    pub temporal: u32,
    /// Maximum mother-centroid distance in pixels.
    pub spatial: f64,
}

impl Default for MitosisTolerances {
    fn default() -> Self {
        MitosisTolerances {
            temporal: 5,
            spatial: 50.0,
        }
    }
}

/// One matched (reference, computed) event pair. Events are anchored at
/// the mother's last detection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitosisPair {
    pub reference: MitosisEvent,
    pub computed: MitosisEvent,
    /// computed mother-last frame minus reference mother-last frame.
    pub frame_offset: i64,
    pub centroid_distance: f64,
    /// Set when the two events disagree on the number of daughters; the
    /// pair still counts as matched.
    pub daughter_count_mismatch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitosisMatchResult {
    pub pairs: Vec<MitosisPair>,
    pub unmatched_reference: Vec<MitosisEvent>,
    pub unmatched_computed: Vec<MitosisEvent>,
}

impl MitosisMatchResult {
    pub fn reference_count(&self) -> usize {
        self.pairs.len() + self.unmatched_reference.len()
    }

    pub fn computed_count(&self) -> usize {
        self.pairs.len() + self.unmatched_computed.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Greedy one-to-one assignment of computed to reference events.
///
/// Candidate pairs satisfy both tolerances; they are consumed in
/// (centroid distance, |frame offset|, reference mother label, computed
/// mother label) order, so the result is deterministic.
pub fn match_mitosis(
    reference: &[MitosisEvent],
    computed: &[MitosisEvent],
    tol: &MitosisTolerances,
) -> MitosisMatchResult {
    let mut candidates = Vec::new();
    for (ri, r) in reference.iter().enumerate() {
        for (ci, c) in computed.iter().enumerate() {
            let offset = c.mother_last_frame as i64 - r.mother_last_frame as i64;
            if offset.unsigned_abs() > tol.temporal as u64 {
                continue;
            }
            let dist = distance(r.mother_last_centroid, c.mother_last_centroid);
            if dist > tol.spatial {
                continue;
            }
            candidates.push((dist, offset.abs(), r.mother_track, c.mother_track, ri, ci));
        }
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });

    let mut ref_taken = vec![false; reference.len()];
    let mut comp_taken = vec![false; computed.len()];
    let mut pairs = Vec::new();
    for (dist, _, _, _, ri, ci) in candidates {
        if ref_taken[ri] || comp_taken[ci] {
            continue;
        }
        ref_taken[ri] = true;
        comp_taken[ci] = true;
        let r = &reference[ri];
        let c = &computed[ci];
        pairs.push(MitosisPair {
            reference: r.clone(),
            computed: c.clone(),
            frame_offset: c.mother_last_frame as i64 - r.mother_last_frame as i64,
            centroid_distance: dist,
            daughter_count_mismatch: r.daughters.len() != c.daughters.len(),
        });
    }

    MitosisMatchResult {
        pairs,
        unmatched_reference: reference
            .iter()
            .zip(&ref_taken)
            .filter(|(_, taken)| !**taken)
            .map(|(e, _)| e.clone())
            .collect(),
        unmatched_computed: computed
            .iter()
            .zip(&comp_taken)
            .filter(|(_, taken)| !**taken)
            .map(|(e, _)| e.clone())
            .collect(),
    }
}

/// Precision, recall and F1 of the match. Empty denominators score 1.0 so
/// that division-free clips are not penalized; F1 is 0 when both precision
/// and recall are 0.
pub fn mitosis_pr(result: &MitosisMatchResult) -> PrecisionRecall {
    let matched = result.pairs.len() as f64;
    let n_ref = result.reference_count() as f64;
    let n_comp = result.computed_count() as f64;
    let recall = if n_ref == 0.0 { 1.0 } else { matched / n_ref };
    let precision = if n_comp == 0.0 { 1.0 } else { matched / n_comp };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    PrecisionRecall {
        precision,
        recall,
        f1,
    }
}
