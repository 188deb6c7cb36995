use thiserror::Error;

/// Errors produced by graph construction, matching, scenario building and
/// the parsers. Parse errors always carry a location (line/column or the
/// offending element id).
#[derive(Debug, Error)]
pub enum Error {
    #[error("track {label}: missing detection at frame {frame}")]
    MissingDetection { label: u32, frame: u32 },

    #[error("track {label}: bad parent {parent}: {reason}")]
    BadParent {
        label: u32,
        parent: u32,
        reason: String,
    },

    #[error("invalid track table: {0}")]
    InvalidTable(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graphs not comparable by id: duplicate (track {track}, frame {frame}) in {side} graph")]
    IncomparableGraphs {
        side: &'static str,
        track: u32,
        frame: u32,
    },

    #[error("invalid matching strategy: {0}")]
    BadStrategy(String),

    #[error("edge {from} -> {to} not found in computed graph")]
    EdgeNotFound { from: u32, to: u32 },

    #[error("bad division schedule: {0}")]
    BadSchedule(String),

    #[error("perturbation not applicable: {0}")]
    NotApplicable(String),

    #[error("enumeration bounds too large: max_frames {max_frames} (cap {frame_cap}), max_tracks {max_tracks} (cap {track_cap})")]
    BoundsTooLarge {
        max_frames: u32,
        frame_cap: u32,
        max_tracks: u32,
        track_cap: u32,
    },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("semantic error at {location}: {message}")]
    Semantic { location: String, message: String },

    #[error("join error: track {label} has no detection at frame {frame} in the detection source")]
    Join { label: u32, frame: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that pinpoint a location in an input document.
    pub fn has_location(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::Semantic { .. } | Error::Join { .. }
        )
    }
}
