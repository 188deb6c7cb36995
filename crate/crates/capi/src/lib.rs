//! C ABI for the lineage-eval library.
//!
//! Conventions:
//! - Graphs and reports are opaque handles created and destroyed here;
//!   never free them with anything but the matching `*_free` function.
//! - Every fallible call returns an [`LeStatus`]; on failure,
//!   [`le_last_error_message`] returns a thread-local, NUL-terminated
//!   description that stays valid until the next fallible call on the
//!   same thread.
//! - All `char*` arguments are NUL-terminated UTF-8. Strings returned by
//!   `le_*_json` calls are owned by the caller and must be released with
//!   [`le_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use lineage_eval::aogm::{evaluate, AogmWeights, EvaluationReport};
use lineage_eval::lineage_graph::{build_graph, TrackingGraph};
use lineage_eval::matching::MatchingStrategy;
use lineage_eval::mitosis_metrics::{match_mitosis, mitosis_pr, MitosisTolerances};
use lineage_eval::track_io::{parse_ctc_tracks, parse_graph_document};

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LeStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input failed to parse or violated a structural invariant.
    InvalidInput = 3,
    /// The two graphs cannot be compared under the requested matching.
    Incomparable = 4,
}

/// Opaque tracking graph handle.
pub struct LeGraph(TrackingGraph);

/// Opaque evaluation report handle.
pub struct LeReport(EvaluationReport);

/// Score weights; obtain the library defaults from
/// [`le_weights_default`].
#[repr(C)]
#[derive(Clone, Copy)]
pub struct LeWeights {
    pub ns: f64,
    pub fn_: f64,
    pub fp: f64,
    pub ed: f64,
    pub ea: f64,
    pub ec: f64,
}

/// The six edit counts of a report.
#[repr(C)]
#[derive(Clone, Copy, Default)]
pub struct LeCounts {
    pub ns: u32,
    pub fn_: u32,
    pub fp: u32,
    pub ed: u32,
    pub ea: u32,
    pub ec: u32,
}

/// Division-detection precision/recall under tolerances.
#[repr(C)]
#[derive(Clone, Copy, Default)]
pub struct LePrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(message).unwrap());
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::default());
}

/// Message describing the most recent failure on this thread; empty
/// string if the last fallible call succeeded. The pointer is invalidated
/// by the next fallible call on the same thread.
#[no_mangle]
pub extern "C" fn le_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// # Safety
/// `text` must be a valid NUL-terminated string.
unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, LeStatus> {
    if text.is_null() {
        set_error("text argument is NULL");
        return Err(LeStatus::NullArgument);
    }
    CStr::from_ptr(text).to_str().map_err(|_| {
        set_error("text argument is not valid UTF-8");
        LeStatus::InvalidUtf8
    })
}

fn emit_graph(graph: TrackingGraph, out: *mut *mut LeGraph) -> LeStatus {
    if out.is_null() {
        set_error("output argument is NULL");
        return LeStatus::NullArgument;
    }
    clear_error();
    unsafe { *out = Box::into_raw(Box::new(LeGraph(graph))) };
    LeStatus::Ok
}

/// Parses a JSON graph document into a new graph handle.
///
/// # Safety
/// `text` must be NUL-terminated; `out_graph` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn le_graph_parse_document(
    text: *const c_char,
    out_graph: *mut *mut LeGraph,
) -> LeStatus {
    let text = match read_str(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_graph_document(text) {
        Ok(graph) => emit_graph(graph, out_graph),
        Err(e) => {
            set_error(e.to_string());
            LeStatus::InvalidInput
        }
    }
}

/// Parses "label begin end parent" track records (without geometry) into
/// a new graph handle.
///
/// # Safety
/// `text` must be NUL-terminated; `out_graph` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn le_graph_parse_tracks(
    text: *const c_char,
    out_graph: *mut *mut LeGraph,
) -> LeStatus {
    let text = match read_str(text) {
        Ok(t) => t,
        Err(status) => return status,
    };
    match parse_ctc_tracks(text, None).and_then(|table| build_graph(&table)) {
        Ok(graph) => emit_graph(graph, out_graph),
        Err(e) => {
            set_error(e.to_string());
            LeStatus::InvalidInput
        }
    }
}

/// Releases a graph handle; NULL is a no-op.
///
/// # Safety
/// `graph` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn le_graph_free(graph: *mut LeGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of vertices; 0 for NULL.
#[no_mangle]
pub extern "C" fn le_graph_vertex_count(graph: *const LeGraph) -> u64 {
    unsafe { graph.as_ref() }.map_or(0, |g| g.0.vertex_count() as u64)
}

/// Number of edges; 0 for NULL.
#[no_mangle]
pub extern "C" fn le_graph_edge_count(graph: *const LeGraph) -> u64 {
    unsafe { graph.as_ref() }.map_or(0, |g| g.0.edge_count() as u64)
}

/// Number of division events; 0 for NULL.
#[no_mangle]
pub extern "C" fn le_graph_mitosis_count(graph: *const LeGraph) -> u64 {
    unsafe { graph.as_ref() }.map_or(0, |g| g.0.mitosis_events().len() as u64)
}

/// New graph with every division link removed; NULL for NULL.
///
/// # Safety
/// `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn le_graph_strip_links(graph: *const LeGraph) -> *mut LeGraph {
    match graph.as_ref() {
        None => ptr::null_mut(),
        Some(g) => Box::into_raw(Box::new(LeGraph(g.0.strip_parent_edges()))),
    }
}

/// The library's default score weights.
#[no_mangle]
pub extern "C" fn le_weights_default() -> LeWeights {
    let w = AogmWeights::default();
    LeWeights {
        ns: w.ns,
        fn_: w.fn_,
        fp: w.fp,
        ed: w.ed,
        ea: w.ea,
        ec: w.ec,
    }
}

/// Scores `computed` against `reference` under id matching. `weights`
/// may be NULL for the defaults.
///
/// # Safety
/// All handles must be live; `out_report` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn le_evaluate(
    reference: *const LeGraph,
    computed: *const LeGraph,
    weights: *const LeWeights,
    out_report: *mut *mut LeReport,
) -> LeStatus {
    let (Some(reference), Some(computed)) = (reference.as_ref(), computed.as_ref()) else {
        set_error("graph argument is NULL");
        return LeStatus::NullArgument;
    };
    if out_report.is_null() {
        set_error("output argument is NULL");
        return LeStatus::NullArgument;
    }
    let weights = match weights.as_ref() {
        None => AogmWeights::default(),
        Some(w) => AogmWeights {
            ns: w.ns,
            fn_: w.fn_,
            fp: w.fp,
            ed: w.ed,
            ea: w.ea,
            ec: w.ec,
        },
    };
    match evaluate(&reference.0, &computed.0, MatchingStrategy::ExactId, &weights) {
        Ok(report) => {
            clear_error();
            *out_report = Box::into_raw(Box::new(LeReport(report)));
            LeStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            LeStatus::Incomparable
        }
    }
}

/// Releases a report handle; NULL is a no-op.
///
/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn le_report_free(report: *mut LeReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Weighted total of a report; NaN for NULL.
#[no_mangle]
pub extern "C" fn le_report_total(report: *const LeReport) -> f64 {
    unsafe { report.as_ref() }.map_or(f64::NAN, |r| r.0.total)
}

/// Copies the six edit counts out of a report.
///
/// # Safety
/// `report` must be live; `out_counts` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn le_report_counts(
    report: *const LeReport,
    out_counts: *mut LeCounts,
) -> LeStatus {
    let (Some(report), Some(out)) = (report.as_ref(), out_counts.as_mut()) else {
        set_error("argument is NULL");
        return LeStatus::NullArgument;
    };
    let c = report.0.counts;
    *out = LeCounts {
        ns: c.ns,
        fn_: c.fn_,
        fp: c.fp,
        ed: c.ed,
        ea: c.ea,
        ec: c.ec,
    };
    clear_error();
    LeStatus::Ok
}

/// Serializes a report to JSON. The returned string is owned by the
/// caller; release it with [`le_string_free`]. NULL for NULL input.
///
/// # Safety
/// `report` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn le_report_json(report: *const LeReport) -> *mut c_char {
    match report.as_ref() {
        None => ptr::null_mut(),
        Some(r) => {
            let json = serde_json_string(&r.0);
            CString::new(json).map_or(ptr::null_mut(), CString::into_raw)
        }
    }
}

fn serde_json_string(report: &EvaluationReport) -> String {
    // The core crate renders reports; going through it keeps the JSON
    // shape identical to the CLI's machine output.
    lineage_eval::track_io::write_report(
        report,
        None,
        lineage_eval::track_io::ReportFormat::Json,
    )
}

/// Releases a string returned by this library; NULL is a no-op.
///
/// # Safety
/// `text` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn le_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Division-detection precision/recall between two graphs at the given
/// tolerances (frames, pixels).
///
/// # Safety
/// Both graph handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn le_mitosis_precision_recall(
    reference: *const LeGraph,
    computed: *const LeGraph,
    temporal_tolerance: u32,
    spatial_tolerance: f64,
    out: *mut LePrecisionRecall,
) -> LeStatus {
    let (Some(reference), Some(computed), Some(out)) =
        (reference.as_ref(), computed.as_ref(), out.as_mut())
    else {
        set_error("argument is NULL");
        return LeStatus::NullArgument;
    };
    let result = match_mitosis(
        &reference.0.mitosis_events(),
        &computed.0.mitosis_events(),
        &MitosisTolerances {
            temporal: temporal_tolerance,
            spatial: spatial_tolerance,
        },
    );
    let pr = mitosis_pr(&result);
    *out = LePrecisionRecall {
        precision: pr.precision,
        recall: pr.recall,
        f1: pr.f1,
    };
    clear_error();
    LeStatus::Ok
}
