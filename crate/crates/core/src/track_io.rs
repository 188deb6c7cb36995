//! Strict parsers and writers: track record files ("L B E P" lines),
//! detection CSVs, graph documents (JSON) and evaluation reports.
//!
//! Parsers reject anything that violates a domain invariant, and every
//! rejection carries a location (line/column or the offending element).
//! Writers emit canonical forms: parse-then-write round-trips are
//! byte-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aogm::EvaluationReport;
use crate::lineage_graph::{
    BBox, Detection, Edge, EdgeSemantics, TrackRow, TrackTable, TrackingGraph, Vertex,
};
use crate::{Error, Result};

pub const REPORT_FORMAT_VERSION: u32 = 1;
pub const GRAPH_FORMAT_VERSION: u32 = 1;

/// One row of a detection CSV: `frame,track_id,x,y,w,h` with `(x, y)` the
/// box's top-left corner. The detection centroid is the box center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRow {
    pub frame: u32,
    pub track_id: u32,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn semantic(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Semantic {
        location: location.into(),
        message: message.into(),
    }
}

/// Splits a line into (column, token) pairs; any run of spaces or tabs
/// separates fields.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c == ' ' || c == '\t' {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_int(token: &str, line: usize, column: usize, what: &str) -> Result<u32> {
    token
        .parse::<u32>()
        .map_err(|_| syntax(line, column, format!("{what} must be a non-negative integer, got {token:?}")))
}

/// Parses track records, one "label begin end parent" line per track
/// (parent 0 means none). When a detection source is given, geometry is
/// joined on (label, frame) and a missing join is an error; without one,
/// synthetic (0, 0) centroids are assigned and the table is flagged as
/// only usable with id matching.
pub fn parse_ctc_tracks(text: &str, detections: Option<&[DetectionRow]>) -> Result<TrackTable> {
    let mut rows: Vec<(usize, TrackRow)> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let fields = tokens(line);
        if fields.is_empty() {
            continue; // blank line
        }
        if fields.len() != 4 {
            let col = fields.get(4).map(|f| f.0).unwrap_or(1);
            return Err(syntax(
                line_no,
                col,
                format!("expected 4 fields (label begin end parent), got {}", fields.len()),
            ));
        }
        let label = parse_int(fields[0].1, line_no, fields[0].0, "label")?;
        let begin = parse_int(fields[1].1, line_no, fields[1].0, "begin frame")?;
        let end = parse_int(fields[2].1, line_no, fields[2].0, "end frame")?;
        let parent = parse_int(fields[3].1, line_no, fields[3].0, "parent label")?;
        if label == 0 {
            return Err(semantic(format!("line {line_no}"), "label must be at least 1"));
        }
        if begin > end {
            return Err(semantic(
                format!("line {line_no}"),
                format!("track {label}: begin {begin} after end {end}"),
            ));
        }
        if parent == label {
            return Err(semantic(
                format!("line {line_no}"),
                format!("track {label} cannot be its own parent"),
            ));
        }
        rows.push((
            line_no,
            TrackRow {
                label,
                begin,
                end,
                parent: (parent != 0).then_some(parent),
            },
        ));
    }

    let mut by_label: BTreeMap<u32, (usize, TrackRow)> = BTreeMap::new();
    for (line_no, row) in &rows {
        if by_label.insert(row.label, (*line_no, *row)).is_some() {
            return Err(semantic(
                format!("line {line_no}"),
                format!("duplicate track label {}", row.label),
            ));
        }
    }
    let mut daughters: BTreeMap<u32, u32> = BTreeMap::new();
    for (line_no, row) in &rows {
        if let Some(parent) = row.parent {
            let Some((_, parent_row)) = by_label.get(&parent) else {
                return Err(semantic(
                    format!("line {line_no}"),
                    format!("track {}: unknown parent {}", row.label, parent),
                ));
            };
            if parent_row.end >= row.begin {
                return Err(semantic(
                    format!("line {line_no}"),
                    format!(
                        "track {}: parent {} ends at frame {} but child begins at frame {}",
                        row.label, parent, parent_row.end, row.begin
                    ),
                ));
            }
            let n = daughters.entry(parent).or_default();
            *n += 1;
            if *n > 2 {
                return Err(semantic(
                    format!("line {line_no}"),
                    format!("parent {parent} has more than two daughters"),
                ));
            }
        }
    }

    let mut table = TrackTable::default();
    table.rows = rows.iter().map(|(_, r)| *r).collect();
    table.rows.sort_by_key(|r| r.label);

    match detections {
        Some(source) => {
            let mut by_key: BTreeMap<(u32, u32), Detection> = BTreeMap::new();
            for d in source {
                by_key.insert(
                    (d.track_id, d.frame),
                    Detection {
                        centroid: (d.x + d.w / 2.0, d.y + d.h / 2.0),
                        bbox: Some(BBox {
                            x: d.x,
                            y: d.y,
                            w: d.w,
                            h: d.h,
                        }),
                    },
                );
            }
            for row in &table.rows {
                for frame in row.begin..=row.end {
                    let det = by_key.get(&(row.label, frame)).ok_or(Error::Join {
                        label: row.label,
                        frame,
                    })?;
                    table.detections.insert((row.label, frame), *det);
                }
            }
        }
        None => {
            table.synthetic_geometry = true;
            for row in &table.rows {
                for frame in row.begin..=row.end {
                    table.detections.insert(
                        (row.label, frame),
                        Detection {
                            centroid: (0.0, 0.0),
                            bbox: None,
                        },
                    );
                }
            }
        }
    }
    Ok(table)
}

/// Canonical track-record text: one "label begin end parent" line per
/// track, sorted by label.
pub fn write_ctc_tracks(table: &TrackTable) -> String {
    let mut rows: Vec<&TrackRow> = table.rows.iter().collect();
    rows.sort_by_key(|r| r.label);
    let mut out = String::new();
    for row in rows {
        out.push_str(&format!(
            "{} {} {} {}\n",
            row.label,
            row.begin,
            row.end,
            row.parent.unwrap_or(0)
        ));
    }
    out
}

/// Parses a strict `frame,track_id,x,y,w,h` CSV (no header).
pub fn parse_detection_csv(text: &str) -> Result<Vec<DetectionRow>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(syntax(
                line_no,
                1,
                format!("expected 6 comma-separated fields, got {}", fields.len()),
            ));
        }
        let column_of = |i: usize| {
            fields[..i].iter().map(|f| f.len() + 1).sum::<usize>() + 1
        };
        let frame = fields[0].trim().parse::<u32>().map_err(|_| {
            syntax(line_no, column_of(0), format!("bad frame {:?}", fields[0]))
        })?;
        let track_id = fields[1].trim().parse::<u32>().map_err(|_| {
            syntax(line_no, column_of(1), format!("bad track id {:?}", fields[1]))
        })?;
        let mut reals = [0.0f64; 4];
        for (i, slot) in reals.iter_mut().enumerate() {
            let field = fields[2 + i];
            *slot = field.trim().parse::<f64>().map_err(|_| {
                syntax(line_no, column_of(2 + i), format!("bad number {field:?}"))
            })?;
            if !slot.is_finite() {
                return Err(syntax(line_no, column_of(2 + i), "value must be finite"));
            }
        }
        let [x, y, w, h] = reals;
        if w <= 0.0 || h <= 0.0 {
            return Err(semantic(
                format!("line {line_no}"),
                format!("box size must be positive, got {w}x{h}"),
            ));
        }
        if !seen.insert((track_id, frame)) {
            return Err(semantic(
                format!("line {line_no}"),
                format!("duplicate detection for track {track_id} at frame {frame}"),
            ));
        }
        out.push(DetectionRow {
            frame,
            track_id,
            x,
            y,
            w,
            h,
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    format_version: u32,
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: u32,
    frame: u32,
    track: u32,
    x: f64,
    y: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    bbox: Option<[f64; 4]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    from: u32,
    to: u32,
    semantics: EdgeSemanticsDoc,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum EdgeSemanticsDoc {
    #[serde(rename = "track")]
    Track,
    #[serde(rename = "parent")]
    Parent,
}

/// Parses and fully validates a graph document; any structural violation
/// is a semantic error naming the offending element.
pub fn parse_graph_document(text: &str) -> Result<TrackingGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format_version != GRAPH_FORMAT_VERSION {
        return Err(semantic(
            "format_version",
            format!(
                "unsupported graph format version {} (expected {GRAPH_FORMAT_VERSION})",
                doc.format_version
            ),
        ));
    }
    let vertices: Vec<Vertex> = doc
        .vertices
        .iter()
        .map(|v| Vertex {
            id: v.id,
            frame: v.frame,
            track_id: v.track,
            centroid: (v.x, v.y),
            bbox: v.bbox.map(|[x, y, w, h]| BBox { x, y, w, h }),
        })
        .collect();
    let edges: Vec<Edge> = doc
        .edges
        .iter()
        .map(|e| Edge {
            from: e.from,
            to: e.to,
            semantics: match e.semantics {
                EdgeSemanticsDoc::Track => EdgeSemantics::TrackLink,
                EdgeSemanticsDoc::Parent => EdgeSemantics::ParentLink,
            },
        })
        .collect();
    let graph = TrackingGraph::new(vertices, edges)
        .map_err(|e| semantic("graph", e.to_string()))?;
    let report = graph.validate();
    if let Some(v) = report.violations.first() {
        return Err(semantic(v.detail.clone(), v.rule));
    }
    Ok(graph)
}

/// Canonical graph document: vertices sorted by (frame, track), edges by
/// (from, to), pretty-printed JSON with a trailing newline.
pub fn write_graph_document(graph: &TrackingGraph) -> String {
    let mut vertices: Vec<&Vertex> = graph.vertices().iter().collect();
    vertices.sort_by_key(|v| (v.frame, v.track_id, v.id));
    let doc = GraphDoc {
        format_version: GRAPH_FORMAT_VERSION,
        vertices: vertices
            .into_iter()
            .map(|v| VertexDoc {
                id: v.id,
                frame: v.frame,
                track: v.track_id,
                x: v.centroid.0,
                y: v.centroid.1,
                bbox: v.bbox.map(|b| [b.x, b.y, b.w, b.h]),
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                from: e.from,
                to: e.to,
                semantics: match e.semantics {
                    EdgeSemantics::TrackLink => EdgeSemanticsDoc::Track,
                    EdgeSemantics::ParentLink => EdgeSemanticsDoc::Parent,
                },
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("document serialization");
    out.push('\n');
    out
}

/// Mitosis precision/recall block attached to reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MitosisSummary {
    pub matched: usize,
    pub reference_events: usize,
    pub computed_events: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    format_version: u32,
    #[serde(flatten)]
    evaluation: &'a EvaluationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mitosis: Option<&'a MitosisSummary>,
}

/// Renders an evaluation report. The table form prints each weighted term
/// and the total with one decimal place and mitosis metrics with four;
/// the JSON form is stable-ordered and versioned.
pub fn write_report(
    report: &EvaluationReport,
    mitosis: Option<&MitosisSummary>,
    format: ReportFormat,
) -> String {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(&ReportDoc {
                format_version: REPORT_FORMAT_VERSION,
                evaluation: report,
                mitosis,
            })
            .expect("report serialization");
            out.push('\n');
            out
        }
        ReportFormat::Table => {
            let w = &report.weights;
            let c = &report.counts;
            let mut out = String::new();
            out.push_str(&format!(
                "weights: ns={:.1} fn={:.1} fp={:.1} ed={:.1} ea={:.1} ec={:.1}\n",
                w.ns, w.fn_, w.fp, w.ed, w.ea, w.ec
            ));
            let terms = [
                ("NS", c.ns, w.ns),
                ("FN", c.fn_, w.fn_),
                ("FP", c.fp, w.fp),
                ("ED", c.ed, w.ed),
                ("EA", c.ea, w.ea),
                ("EC", c.ec, w.ec),
            ];
            for (name, count, weight) in terms {
                out.push_str(&format!(
                    "{name}  {count} \u{d7} {weight:.1} = {:.1}\n",
                    count as f64 * weight
                ));
            }
            out.push_str(&format!("total {:.1}\n", report.total));
            if let Some(m) = mitosis {
                out.push_str(&format!(
                    "mitosis precision {:.4} recall {:.4} f1 {:.4} (matched {} of {} reference, {} computed)\n",
                    m.precision, m.recall, m.f1, m.matched, m.reference_events, m.computed_events
                ));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aogm::{evaluate, AogmWeights};
    use crate::lineage_graph::build_graph;
    use crate::matching::MatchingStrategy;
    use crate::scenarios::figure1_cases;

    #[test]
    fn single_track_record() {
        let table = parse_ctc_tracks("1 0 9 0\n", None).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0], TrackRow { label: 1, begin: 0, end: 9, parent: None });
        assert!(table.synthetic_geometry);
        assert_eq!(table.detections.len(), 10);
    }

    #[test]
    fn mitosis_records_build_the_small_tree() {
        let table = parse_ctc_tracks("1 0 1 0\n2 2 3 1\n3 2 3 1\n", None).unwrap();
        let g = build_graph(&table).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.mitosis_events().len(), 1);
    }

    #[test]
    fn begin_after_end_is_semantic_error() {
        match parse_ctc_tracks("1 5 3 0\n", None) {
            Err(Error::Semantic { location, message }) => {
                assert_eq!(location, "line 1");
                assert!(message.contains("begin 5 after end 3"));
            }
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn non_integer_field_is_syntax_error_with_location() {
        match parse_ctc_tracks("1 0 9 0\n2 x 9 0\n", None) {
            Err(Error::Syntax { line: 2, column: 3, .. }) => {}
            other => panic!("expected syntax error at 2:3, got {other:?}"),
        }
    }

    #[test]
    fn tabs_and_blank_lines_are_tolerated() {
        let table = parse_ctc_tracks("1\t0\t1\t0\n\n2  2\t3 1\n3 2 3 1\n\n", None).unwrap();
        assert_eq!(table.rows.len(), 3);
    }

    #[test]
    fn unknown_parent_and_overlap_are_rejected() {
        assert!(matches!(
            parse_ctc_tracks("1 0 1 0\n2 2 3 9\n", None),
            Err(Error::Semantic { .. })
        ));
        assert!(matches!(
            parse_ctc_tracks("1 0 3 0\n2 2 3 1\n", None),
            Err(Error::Semantic { .. })
        ));
    }

    #[test]
    fn detection_join_fills_geometry() {
        let detections = vec![
            DetectionRow { frame: 0, track_id: 1, x: 10.0, y: 20.0, w: 4.0, h: 6.0 },
            DetectionRow { frame: 1, track_id: 1, x: 12.0, y: 22.0, w: 4.0, h: 6.0 },
        ];
        let table = parse_ctc_tracks("1 0 1 0\n", Some(&detections)).unwrap();
        assert!(!table.synthetic_geometry);
        assert_eq!(table.detections[&(1, 0)].centroid, (12.0, 23.0));
        assert!(table.detections[&(1, 0)].bbox.is_some());
    }

    #[test]
    fn missing_join_is_an_error() {
        let detections = vec![DetectionRow { frame: 0, track_id: 1, x: 0.0, y: 0.0, w: 1.0, h: 1.0 }];
        match parse_ctc_tracks("1 0 1 0\n", Some(&detections)) {
            Err(Error::Join { label: 1, frame: 1 }) => {}
            other => panic!("expected join error, got {other:?}"),
        }
    }

    #[test]
    fn ctc_round_trip_is_identity() {
        let text = "1 0 1 0\n2 2 3 1\n3 2 3 1\n";
        let table = parse_ctc_tracks(text, None).unwrap();
        assert_eq!(write_ctc_tracks(&table), text);
    }

    #[test]
    fn detection_csv_rejects_bad_rows() {
        assert!(parse_detection_csv("0,1,5.0,5.0,10.0,10.0\n").is_ok());
        assert!(matches!(
            parse_detection_csv("0,1,5.0,5.0\n"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_detection_csv("0,1,5.0,5.0,0.0,10.0\n"),
            Err(Error::Semantic { .. })
        ));
        assert!(matches!(
            parse_detection_csv("0,1,5.0,5.0,10.0,10.0\n0,1,6.0,6.0,10.0,10.0\n"),
            Err(Error::Semantic { .. })
        ));
    }

    #[test]
    fn graph_document_round_trip() {
        for case in figure1_cases() {
            for g in [&case.reference, &case.computed_with_links] {
                let text = write_graph_document(g);
                let parsed = parse_graph_document(&text).unwrap();
                assert_eq!(write_graph_document(&parsed), text);
                assert_eq!(parsed.vertex_count(), g.vertex_count());
                assert_eq!(parsed.edges(), g.edges());
            }
        }
    }

    #[test]
    fn empty_graph_document_parses() {
        let g = parse_graph_document(r#"{"format_version":1,"vertices":[],"edges":[]}"#).unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn dangling_edge_is_semantic_error() {
        let doc = r#"{"format_version":1,"vertices":[{"id":0,"frame":0,"track":1,"x":0.0,"y":0.0}],"edges":[{"from":0,"to":7,"semantics":"track"}]}"#;
        match parse_graph_document(doc) {
            Err(Error::Semantic { message, .. }) => assert!(message.contains("unknown vertex")),
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn backward_edge_is_rejected_at_parse_time() {
        let doc = r#"{
            "format_version": 1,
            "vertices": [
                {"id": 0, "frame": 1, "track": 1, "x": 0.0, "y": 0.0},
                {"id": 1, "frame": 1, "track": 1, "x": 1.0, "y": 0.0}
            ],
            "edges": [{"from": 0, "to": 1, "semantics": "track"}]
        }"#;
        match parse_graph_document(doc) {
            Err(Error::Semantic { message, .. }) => {
                assert!(message.contains("non-forward edge"), "{message}");
            }
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn json_syntax_error_has_location() {
        let err = parse_graph_document("{not json").unwrap_err();
        assert!(err.has_location());
    }

    #[test]
    fn report_rendering_matches_goldens() {
        let weights = AogmWeights::default();
        let cases = figure1_cases();

        // Zero report.
        let zero = evaluate(
            &cases[0].reference,
            &cases[0].computed_with_links,
            MatchingStrategy::ExactId,
            &weights,
        )
        .unwrap();
        let text = write_report(&zero, None, ReportFormat::Table);
        assert!(text.contains("total 0.0\n"), "{text}");

        // Shifted-onset prediction with links.
        let shifted = evaluate(
            &cases[2].reference,
            &cases[2].computed_with_links,
            MatchingStrategy::ExactId,
            &weights,
        )
        .unwrap();
        let text = write_report(&shifted, None, ReportFormat::Table);
        assert!(text.contains("total 28.0\n"), "{text}");
        assert!(text.contains("2 \u{d7} 1.0 = 2.0"), "{text}");
    }

    #[test]
    fn machine_report_is_stable() {
        let weights = AogmWeights::default();
        let cases = figure1_cases();
        let report = evaluate(
            &cases[2].reference,
            &cases[2].computed_with_links,
            MatchingStrategy::ExactId,
            &weights,
        )
        .unwrap();
        let a = write_report(&report, None, ReportFormat::Json);
        let b = write_report(&report, None, ReportFormat::Json);
        assert_eq!(a, b);
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["format_version"], 1);
        assert_eq!(parsed["total"], 28.0);
        assert_eq!(parsed["counts"]["ed"], 2);
    }
}
