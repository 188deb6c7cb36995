//! Core data model: acyclic oriented tracking graphs, track tables, and
//! mitosis event extraction.
//!
//! A graph vertex is one detection of one track in one frame. Edges run
//! strictly forward in time and are either [`EdgeSemantics::TrackLink`]
//! (same track, consecutive detections) or [`EdgeSemantics::ParentLink`]
//! (mother's last detection to a daughter's first detection).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type VertexId = u32;

/// Axis-aligned box in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.x && p.0 <= self.x + self.w && p.1 >= self.y && p.1 <= self.y + self.h
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        inter / (self.w * self.h + other.w * other.h - inter)
    }
}

/// One detection: a track observed in a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub frame: u32,
    pub track_id: u32,
    pub centroid: (f64, f64),
    pub bbox: Option<BBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeSemantics {
    /// Consecutive detections of the same track.
    TrackLink,
    /// Mother's last detection to a daughter's first detection.
    ParentLink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub semantics: EdgeSemantics,
}

/// Acyclic oriented tracking graph. Immutable after construction; all
/// operations return new graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    index: HashMap<VertexId, usize>,
}

impl TrackingGraph {
    /// Builds a graph from raw parts. Rejects duplicate vertex ids,
    /// dangling edge endpoints and duplicate ordered vertex pairs; all
    /// other structural invariants are reported by [`validate`].
    ///
    /// [`validate`]: TrackingGraph::validate
    pub fn new(mut vertices: Vec<Vertex>, mut edges: Vec<Edge>) -> Result<Self> {
        vertices.sort_by_key(|v| v.id);
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {}", v.id)));
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if !index.contains_key(&e.from) || !index.contains_key(&e.to) {
                return Err(Error::InvalidGraph(format!(
                    "edge {} -> {} references unknown vertex",
                    e.from, e.to
                )));
            }
            if !seen.insert((e.from, e.to)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {} -> {}",
                    e.from, e.to
                )));
            }
        }
        Ok(TrackingGraph {
            vertices,
            edges,
            index,
        })
    }

    pub fn empty() -> Self {
        TrackingGraph {
            vertices: Vec::new(),
            edges: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Vertices sorted by id.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edges sorted by (from, to).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.index.get(&id).map(|&i| &self.vertices[i])
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: VertexId, to: VertexId) -> Option<EdgeSemantics> {
        self.edges
            .binary_search_by_key(&(from, to), |e| (e.from, e.to))
            .ok()
            .map(|i| self.edges[i].semantics)
    }

    /// Last frame present in the graph, if any vertex exists.
    pub fn last_frame(&self) -> Option<u32> {
        self.vertices.iter().map(|v| v.frame).max()
    }

    /// Detections of each track, sorted by frame.
    pub fn track_detections(&self) -> BTreeMap<u32, Vec<&Vertex>> {
        let mut tracks: BTreeMap<u32, Vec<&Vertex>> = BTreeMap::new();
        for v in &self.vertices {
            tracks.entry(v.track_id).or_default().push(v);
        }
        for dets in tracks.values_mut() {
            dets.sort_by_key(|v| v.frame);
        }
        tracks
    }

    /// Checks every structural invariant and reports all violations with
    /// the offending element ids. Empty report iff the graph is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut report = |rule: &'static str, detail: String| {
            violations.push(Violation {
                rule,
                detail,
            });
        };

        for v in &self.vertices {
            if !v.centroid.0.is_finite() || !v.centroid.1.is_finite() {
                report("non-finite centroid", format!("vertex {}", v.id));
            }
            if let Some(b) = &v.bbox {
                if !(b.w > 0.0 && b.h > 0.0) {
                    report("non-positive bbox", format!("vertex {}", v.id));
                }
            }
        }

        let tracks = self.track_detections();
        let track_first: HashMap<u32, VertexId> =
            tracks.iter().map(|(t, d)| (*t, d[0].id)).collect();
        let track_last: HashMap<u32, VertexId> = tracks
            .iter()
            .map(|(t, d)| (*t, d[d.len() - 1].id))
            .collect();
        let frames_by_track: HashMap<u32, Vec<u32>> = tracks
            .iter()
            .map(|(t, d)| (*t, d.iter().map(|v| v.frame).collect()))
            .collect();

        let mut in_track: HashMap<VertexId, u32> = HashMap::new();
        let mut out_track: HashMap<VertexId, u32> = HashMap::new();

        for e in &self.edges {
            let (from, to) = (self.vertex(e.from).unwrap(), self.vertex(e.to).unwrap());
            if from.frame >= to.frame {
                report("non-forward edge", format!("edge {} -> {}", e.from, e.to));
            }
            match e.semantics {
                EdgeSemantics::TrackLink => {
                    *out_track.entry(e.from).or_default() += 1;
                    *in_track.entry(e.to).or_default() += 1;
                    if from.track_id != to.track_id {
                        report(
                            "track link across tracks",
                            format!("edge {} -> {}", e.from, e.to),
                        );
                    } else if frames_by_track[&from.track_id]
                        .iter()
                        .any(|&f| f > from.frame && f < to.frame)
                    {
                        report(
                            "non-consecutive track link",
                            format!("edge {} -> {}", e.from, e.to),
                        );
                    }
                }
                EdgeSemantics::ParentLink => {
                    if from.track_id == to.track_id {
                        report(
                            "parent link within track",
                            format!("edge {} -> {}", e.from, e.to),
                        );
                        continue;
                    }
                    if track_last.get(&from.track_id) != Some(&e.from) {
                        report(
                            "parent link not from track end",
                            format!("edge {} -> {}", e.from, e.to),
                        );
                    }
                    if track_first.get(&to.track_id) != Some(&e.to) {
                        report(
                            "parent link not into track start",
                            format!("edge {} -> {}", e.from, e.to),
                        );
                    }
                }
            }
        }

        for (id, n) in out_track {
            if n > 1 {
                report(
                    "track branching without ParentLink",
                    format!("vertex {} has {} outgoing track links", id, n),
                );
            }
        }
        for (id, n) in in_track {
            if n > 1 {
                report(
                    "track merging",
                    format!("vertex {} has {} incoming track links", id, n),
                );
            }
        }

        let mut daughters: HashMap<u32, u32> = HashMap::new();
        for e in &self.edges {
            if e.semantics == EdgeSemantics::ParentLink {
                let mother = self.vertex(e.from).unwrap().track_id;
                *daughters.entry(mother).or_default() += 1;
            }
        }
        for (track, n) in daughters {
            if n > 2 {
                report(
                    "more than two daughters",
                    format!("track {} has {} daughters", track, n),
                );
            }
        }

        violations.sort_by(|a, b| (a.rule, &a.detail).cmp(&(b.rule, &b.detail)));
        ValidationReport { violations }
    }

    /// Removes every ParentLink; vertices and TrackLinks are untouched.
    pub fn strip_parent_edges(&self) -> TrackingGraph {
        TrackingGraph {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .filter(|e| e.semantics == EdgeSemantics::TrackLink)
                .cloned()
                .collect(),
            index: self.index.clone(),
        }
    }

    /// Extracts one event per track with outgoing ParentLinks. Daughters
    /// are sorted by (first frame, track label); events by (mother last
    /// frame, mother label).
    pub fn mitosis_events(&self) -> Vec<MitosisEvent> {
        let mut by_mother: BTreeMap<u32, (u32, (f64, f64), Vec<DaughterRecord>)> = BTreeMap::new();
        for e in &self.edges {
            if e.semantics != EdgeSemantics::ParentLink {
                continue;
            }
            let from = self.vertex(e.from).unwrap();
            let to = self.vertex(e.to).unwrap();
            let entry = by_mother
                .entry(from.track_id)
                .or_insert((from.frame, from.centroid, Vec::new()));
            entry.2.push(DaughterRecord {
                track: to.track_id,
                first_frame: to.frame,
                first_centroid: to.centroid,
            });
        }
        let mut events: Vec<MitosisEvent> = by_mother
            .into_iter()
            .map(|(mother, (frame, centroid, mut daughters))| {
                daughters.sort_by(|a, b| (a.first_frame, a.track).cmp(&(b.first_frame, b.track)));
                MitosisEvent {
                    mother_track: mother,
                    mother_last_frame: frame,
                    mother_last_centroid: centroid,
                    daughters,
                }
            })
            .collect();
        events.sort_by_key(|e| (e.mother_last_frame, e.mother_track));
        events
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// One mother-to-daughters division event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitosisEvent {
    pub mother_track: u32,
    pub mother_last_frame: u32,
    pub mother_last_centroid: (f64, f64),
    pub daughters: Vec<DaughterRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DaughterRecord {
    pub track: u32,
    pub first_frame: u32,
    pub first_centroid: (f64, f64),
}

/// Per-track record: label, frame span and optional parent label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackRow {
    pub label: u32,
    pub begin: u32,
    pub end: u32,
    pub parent: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub centroid: (f64, f64),
    pub bbox: Option<BBox>,
}

/// Track records plus per-frame geometry, the ingestion-side mirror of a
/// tracking graph. Tracks are frame-contiguous: a detection must exist for
/// every frame in [begin, end].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackTable {
    pub rows: Vec<TrackRow>,
    pub detections: BTreeMap<(u32, u32), Detection>,
    /// Set when centroids were synthesized (no detection source); such
    /// tables are only usable with id-based matching.
    pub synthetic_geometry: bool,
}

impl TrackTable {
    pub fn row(&self, label: u32) -> Option<&TrackRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Final frame over all rows (None for an empty table).
    pub fn last_frame(&self) -> Option<u32> {
        self.rows.iter().map(|r| r.end).max()
    }
}

/// Converts a track table into a tracking graph: one vertex per detection,
/// TrackLinks between consecutive detections, ParentLinks from a parent's
/// last detection to each child's first.
pub fn build_graph(tracks: &TrackTable) -> Result<TrackingGraph> {
    let mut labels = HashSet::new();
    for row in &tracks.rows {
        if row.label == 0 {
            return Err(Error::InvalidTable("track label 0 is reserved".into()));
        }
        if !labels.insert(row.label) {
            return Err(Error::InvalidTable(format!(
                "duplicate track label {}",
                row.label
            )));
        }
        if row.begin > row.end {
            return Err(Error::InvalidTable(format!(
                "track {}: begin {} after end {}",
                row.label, row.begin, row.end
            )));
        }
    }
    let mut daughter_count: HashMap<u32, u32> = HashMap::new();
    for row in &tracks.rows {
        if let Some(parent) = row.parent {
            let parent_row = tracks.row(parent).ok_or(Error::BadParent {
                label: row.label,
                parent,
                reason: "unknown parent label".into(),
            })?;
            if parent_row.end >= row.begin {
                return Err(Error::BadParent {
                    label: row.label,
                    parent,
                    reason: format!(
                        "parent ends at frame {} but child begins at frame {}",
                        parent_row.end, row.begin
                    ),
                });
            }
            let n = daughter_count.entry(parent).or_default();
            *n += 1;
            if *n > 2 {
                return Err(Error::BadParent {
                    label: row.label,
                    parent,
                    reason: "parent already has two daughters".into(),
                });
            }
        }
    }

    // Vertices in (frame, track) order so ids are stable across rebuilds.
    let mut keys: Vec<(u32, u32)> = Vec::new();
    for row in &tracks.rows {
        for frame in row.begin..=row.end {
            if !tracks.detections.contains_key(&(row.label, frame)) {
                return Err(Error::MissingDetection {
                    label: row.label,
                    frame,
                });
            }
            keys.push((frame, row.label));
        }
    }
    keys.sort_unstable();

    let mut vertices = Vec::with_capacity(keys.len());
    let mut id_of: HashMap<(u32, u32), VertexId> = HashMap::with_capacity(keys.len());
    for (id, &(frame, label)) in keys.iter().enumerate() {
        let det = &tracks.detections[&(label, frame)];
        let id = id as VertexId;
        id_of.insert((label, frame), id);
        vertices.push(Vertex {
            id,
            frame,
            track_id: label,
            centroid: det.centroid,
            bbox: det.bbox,
        });
    }

    let mut edges = Vec::new();
    for row in &tracks.rows {
        for frame in row.begin..row.end {
            edges.push(Edge {
                from: id_of[&(row.label, frame)],
                to: id_of[&(row.label, frame + 1)],
                semantics: EdgeSemantics::TrackLink,
            });
        }
        if let Some(parent) = row.parent {
            let parent_row = tracks.row(parent).unwrap();
            edges.push(Edge {
                from: id_of[&(parent, parent_row.end)],
                to: id_of[&(row.label, row.begin)],
                semantics: EdgeSemantics::ParentLink,
            });
        }
    }

    TrackingGraph::new(vertices, edges)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn det(c: (f64, f64)) -> Detection {
        Detection {
            centroid: c,
            bbox: None,
        }
    }

    /// Single-cell division shape: mother 1 over frames 0-1, daughters 2
    /// and 3 over frames 2-3.
    pub(crate) fn single_mitosis_table() -> TrackTable {
        let rows = vec![
            TrackRow { label: 1, begin: 0, end: 1, parent: None },
            TrackRow { label: 2, begin: 2, end: 3, parent: Some(1) },
            TrackRow { label: 3, begin: 2, end: 3, parent: Some(1) },
        ];
        let mut detections = BTreeMap::new();
        for row in &rows {
            for frame in row.begin..=row.end {
                detections.insert(
                    (row.label, frame),
                    det((row.label as f64 * 10.0, frame as f64 * 10.0)),
                );
            }
        }
        TrackTable {
            rows,
            detections,
            synthetic_geometry: false,
        }
    }

    #[test]
    fn chain_track_builds_plain_path() {
        let mut detections = BTreeMap::new();
        for frame in 0..=2 {
            detections.insert((1, frame), det((0.0, frame as f64)));
        }
        let table = TrackTable {
            rows: vec![TrackRow { label: 1, begin: 0, end: 2, parent: None }],
            detections,
            synthetic_geometry: false,
        };
        let g = build_graph(&table).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert!(g.edges().iter().all(|e| e.semantics == EdgeSemantics::TrackLink));
        assert!(g.mitosis_events().is_empty());
    }

    #[test]
    fn single_mitosis_builds_tree() {
        let g = build_graph(&single_mitosis_table()).unwrap();
        assert_eq!(g.vertex_count(), 6);
        let track_links = g
            .edges()
            .iter()
            .filter(|e| e.semantics == EdgeSemantics::TrackLink)
            .count();
        let parent_links = g
            .edges()
            .iter()
            .filter(|e| e.semantics == EdgeSemantics::ParentLink)
            .count();
        assert_eq!(track_links, 3);
        assert_eq!(parent_links, 2);
        assert!(g.validate().is_empty());
    }

    #[test]
    fn child_overlapping_parent_is_rejected() {
        let mut table = single_mitosis_table();
        table.rows[1].begin = 1;
        table
            .detections
            .insert((2, 1), det((20.0, 10.0)));
        match build_graph(&table) {
            Err(Error::BadParent { label: 2, parent: 1, .. }) => {}
            other => panic!("expected BadParent, got {other:?}"),
        }
    }

    #[test]
    fn missing_detection_is_rejected() {
        let mut table = single_mitosis_table();
        table.detections.remove(&(3, 3));
        match build_graph(&table) {
            Err(Error::MissingDetection { label: 3, frame: 3 }) => {}
            other => panic!("expected MissingDetection, got {other:?}"),
        }
    }

    #[test]
    fn three_daughters_rejected() {
        let mut table = single_mitosis_table();
        table.rows.push(TrackRow { label: 4, begin: 2, end: 3, parent: Some(1) });
        table.detections.insert((4, 2), det((40.0, 20.0)));
        table.detections.insert((4, 3), det((40.0, 30.0)));
        assert!(matches!(build_graph(&table), Err(Error::BadParent { .. })));
    }

    #[test]
    fn validate_flags_non_forward_edge() {
        let vertices = vec![
            Vertex { id: 0, frame: 1, track_id: 1, centroid: (0.0, 0.0), bbox: None },
            Vertex { id: 1, frame: 1, track_id: 1, centroid: (1.0, 0.0), bbox: None },
        ];
        let edges = vec![Edge { from: 0, to: 1, semantics: EdgeSemantics::TrackLink }];
        let g = TrackingGraph::new(vertices, edges).unwrap();
        let report = g.validate();
        assert!(report.violations.iter().any(|v| v.rule == "non-forward edge"));
    }

    #[test]
    fn validate_flags_track_branching() {
        let g = build_graph(&single_mitosis_table()).unwrap();
        let mut edges: Vec<Edge> = g.edges().to_vec();
        // A daughter's first vertex gains a second outgoing track link
        // (into the sibling track), so it now branches without a division.
        let daughter_first = g
            .vertices()
            .iter()
            .find(|v| v.track_id == 2 && v.frame == 2)
            .unwrap()
            .id;
        let sibling_second = g
            .vertices()
            .iter()
            .find(|v| v.track_id == 3 && v.frame == 3)
            .unwrap()
            .id;
        edges.push(Edge { from: daughter_first, to: sibling_second, semantics: EdgeSemantics::TrackLink });
        let bad = TrackingGraph::new(g.vertices().to_vec(), edges).unwrap();
        let report = bad.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == "track branching without ParentLink"));
    }

    #[test]
    fn strip_parent_edges_removes_only_parent_links() {
        let g = build_graph(&single_mitosis_table()).unwrap();
        let stripped = g.strip_parent_edges();
        assert_eq!(stripped.vertex_count(), g.vertex_count());
        assert_eq!(stripped.edge_count(), g.edge_count() - 2);
        // Idempotent.
        assert_eq!(stripped.strip_parent_edges(), stripped);
    }

    #[test]
    fn mitosis_events_two_daughters() {
        let g = build_graph(&single_mitosis_table()).unwrap();
        let events = g.mitosis_events();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].mother_track, 1);
        assert_eq!(events[0].mother_last_frame, 1);
        assert_eq!(events[0].daughters.len(), 2);
        assert_eq!(events[0].daughters[0].track, 2);
        assert_eq!(events[0].daughters[1].track, 3);
    }

    #[test]
    fn mitosis_event_single_daughter() {
        let mut table = single_mitosis_table();
        table.rows.remove(2);
        table.detections.remove(&(3, 2));
        table.detections.remove(&(3, 3));
        let g = build_graph(&table).unwrap();
        let events = g.mitosis_events();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].daughters.len(), 1);
        assert!(g.validate().is_empty());
    }
}
