//! Mitosis-linkage post-processing: turns plain per-track output into a
//! lineage by linking a disappeared track to one or two nearby newborn
//! tracks as its daughters.

use std::collections::HashMap;

use crate::lineage_graph::TrackTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkerParams {
    /// Daughters must begin within this many frames after the mother ends.
    pub window: u32,
    /// Daughters' first centroid must lie within this radius of the
    /// mother's last centroid, in pixels.
    pub radius: f64,
}

impl Default for LinkerParams {
    fn default() -> Self {
        LinkerParams {
            window: 5,
            radius: 50.0,
        }
    }
}

/// A mother adopts at most two daughters.
pub const MAX_DAUGHTERS: usize = 2;

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Fills parent fields on a copy of the table; geometry and existing
/// parent assignments are untouched.
///
/// A track ending before the clip's final frame is a candidate mother; a
/// track ending at the final frame merely leaves the field of view.
/// Candidate daughters are parentless tracks beginning in
/// `(end, end + window]` whose first centroid lies within `radius` of the
/// mother's last centroid. A contested newborn goes to the nearest mother
/// (ties: earlier-ending mother, then lower label); each mother then keeps
/// its two nearest daughters (ties: lower label).
pub fn link_mitosis(tracks: &TrackTable, params: &LinkerParams) -> TrackTable {
    let mut out = tracks.clone();
    let Some(final_frame) = tracks.last_frame() else {
        return out;
    };

    let centroid_at = |label: u32, frame: u32| tracks.detections[&(label, frame)].centroid;

    // Daughters a mother already has; adoption never pushes a mother past
    // MAX_DAUGHTERS, and a full mother still attracts (and then rejects)
    // its nearest candidates, which keeps a second pass a no-op.
    let mut existing: HashMap<u32, usize> = HashMap::new();
    for row in &tracks.rows {
        if let Some(p) = row.parent {
            *existing.entry(p).or_default() += 1;
        }
    }

    // Phase 1: each parentless newborn picks its nearest eligible mother.
    let mut adopted: HashMap<u32, Vec<(f64, u32)>> = HashMap::new();
    for child in &tracks.rows {
        if child.parent.is_some() {
            continue;
        }
        let child_centroid = centroid_at(child.label, child.begin);
        let best = tracks
            .rows
            .iter()
            .filter(|m| {
                m.label != child.label
                    && m.end < final_frame
                    && m.end < child.begin
                    && child.begin <= m.end + params.window
            })
            .filter_map(|m| {
                let d = distance(centroid_at(m.label, m.end), child_centroid);
                (d <= params.radius).then_some((d, m.end, m.label))
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        if let Some((d, _, mother)) = best {
            adopted.entry(mother).or_default().push((d, child.label));
        }
    }

    // Phase 2: each mother keeps its two nearest daughters.
    for (mother, mut daughters) in adopted {
        daughters.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let slots = MAX_DAUGHTERS.saturating_sub(existing.get(&mother).copied().unwrap_or(0));
        for &(_, child) in daughters.iter().take(slots) {
            let row = out.rows.iter_mut().find(|r| r.label == child).unwrap();
            row.parent = Some(mother);
        }
    }

    out
}
