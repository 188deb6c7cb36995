//! Command-line front end: evaluate or compare tracking results, link
//! mitosis events, and generate or search for benchmark scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use lineage_eval::aogm::{evaluate, AogmWeights, EvaluationReport};
use lineage_eval::lineage_graph::{build_graph, TrackingGraph};
use lineage_eval::linker::{link_mitosis, LinkerParams};
use lineage_eval::matching::MatchingStrategy;
use lineage_eval::mitosis_metrics::{match_mitosis, mitosis_pr, MitosisTolerances};
use lineage_eval::scenarios::{
    default_mistake_mix, enumerate_inversions, figure1_cases, figure2_scenario_with,
    ScenarioPair, DEFAULT_DIVISIONS, DEFAULT_LAST_FRAME,
};
use lineage_eval::track_io::{
    parse_ctc_tracks, parse_detection_csv, parse_graph_document, write_ctc_tracks,
    write_graph_document, write_report, MitosisSummary, ReportFormat,
};

#[derive(Parser)]
#[command(
    name = "lineage-eval",
    about = "Evaluate tracking results as lineage graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a computed tracking result against a reference.
    Evaluate(EvaluateArgs),
    /// Score a result with and without its division links and report the gap.
    Compare(CompareArgs),
    /// Add mother-daughter links to a plain track file.
    Link(LinkArgs),
    /// Generate built-in benchmark scenario documents.
    Simulate(SimulateArgs),
    /// Search exhaustively for pairs where division links worsen the score.
    EnumerateInversions(EnumerateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Reference: a track record file, or a graph document if it ends in .json.
    #[arg(long = "ref", value_name = "PATH")]
    reference: PathBuf,
    /// Computed result, same formats as --ref.
    #[arg(long = "comp", value_name = "PATH")]
    computed: PathBuf,
    /// Detection CSV (frame,track_id,x,y,w,h) joined to the reference track file.
    #[arg(long, value_name = "PATH")]
    ref_detections: Option<PathBuf>,
    /// Detection CSV joined to the computed track file.
    #[arg(long, value_name = "PATH")]
    comp_detections: Option<PathBuf>,
}

#[derive(Args)]
struct ScoringArgs {
    /// Vertex matching strategy.
    #[arg(long, value_enum)]
    matching: Option<MatchingKind>,
    /// IoU threshold in (0, 1] for --matching iou.
    #[arg(long)]
    iou: Option<f64>,
    /// Weight overrides, e.g. ns=5,fn=10,ed=1.5 (unlisted weights keep defaults).
    #[arg(long)]
    weights: Option<String>,
    /// Temporal tolerance for division matching, in frames.
    #[arg(long)]
    mitosis_window: Option<u32>,
    /// Spatial tolerance for division matching, in pixels.
    #[arg(long)]
    mitosis_radius: Option<f64>,
    /// Optional TOML file with the same keys as the flags; flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Also write the report to this file.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args)]
struct LinkArgs {
    /// Track record file to augment.
    #[arg(long, value_name = "PATH")]
    tracks: PathBuf,
    /// Detection CSV providing the geometry the linker needs.
    #[arg(long, value_name = "PATH")]
    detections: PathBuf,
    /// Daughters must begin within this many frames after a mother ends.
    #[arg(long)]
    window: Option<u32>,
    /// Daughters must begin within this radius of the mother's last centroid.
    #[arg(long)]
    radius: Option<f64>,
    /// Write the augmented track file here instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Optional TOML file with the same keys as the flags; flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario family to generate.
    #[arg(long, value_enum)]
    scenario: Scenario,
    /// Division frames for the figure2 lineage tree, e.g. 1,4,7.
    #[arg(long, value_delimiter = ',')]
    divisions: Option<Vec<u32>>,
    /// Last frame of the figure2 lineage tree.
    #[arg(long)]
    last_frame: Option<u32>,
    /// Directory receiving the generated graph documents.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    max_frames: u32,
    #[arg(long)]
    max_tracks: u32,
    /// When set, write each counterexample's graph documents here.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MatchingKind {
    /// Pair vertices sharing (track id, frame).
    Id,
    /// Pair a reference vertex with computed vertices whose box contains its centroid.
    Centroid,
    /// Greedy one-to-one pairing by IoU above a threshold.
    Iou,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scenario {
    Figure1,
    Figure2,
}

/// Config-file counterpart of the flags. Every field is optional; a flag
/// given on the command line always wins.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    matching: Option<MatchingKind>,
    iou: Option<f64>,
    weights: Option<PartialWeights>,
    mitosis_window: Option<u32>,
    mitosis_radius: Option<f64>,
    window: Option<u32>,
    radius: Option<f64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialWeights {
    ns: Option<f64>,
    #[serde(rename = "fn")]
    fn_: Option<f64>,
    fp: Option<f64>,
    ed: Option<f64>,
    ea: Option<f64>,
    ec: Option<f64>,
}

enum AppError {
    Usage(String),
    Data(String),
}

impl From<lineage_eval::Error> for AppError {
    fn from(e: lineage_eval::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Link(args) => cmd_link(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::EnumerateInversions(args) => cmd_enumerate(args),
    }
}

fn read_to_string(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&PathBuf>) -> Result<FileConfig, AppError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = read_to_string(path)?;
            toml::from_str(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))
        }
    }
}

fn parse_weight_overrides(spec: &str, weights: &mut AogmWeights) -> Result<(), AppError> {
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("weight override {part:?} is not key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("weight {key:?} has non-numeric value {value:?}")))?;
        if !value.is_finite() || value < 0.0 {
            return Err(usage(format!("weight {key:?} must be finite and non-negative")));
        }
        let slot = match key.trim() {
            "ns" => &mut weights.ns,
            "fn" => &mut weights.fn_,
            "fp" => &mut weights.fp,
            "ed" => &mut weights.ed,
            "ea" => &mut weights.ea,
            "ec" => &mut weights.ec,
            other => return Err(usage(format!("unknown weight {other:?}"))),
        };
        *slot = value;
    }
    Ok(())
}

/// Scoring settings after merging defaults, config file and flags.
struct Scoring {
    strategy: MatchingStrategy,
    weights: AogmWeights,
    tolerances: MitosisTolerances,
}

fn resolve_scoring(args: &ScoringArgs) -> Result<Scoring, AppError> {
    let config = load_config(args.config.as_ref())?;

    let kind = args
        .matching
        .or(config.matching)
        .unwrap_or(MatchingKind::Id);
    let strategy = match kind {
        MatchingKind::Id => MatchingStrategy::ExactId,
        MatchingKind::Centroid => MatchingStrategy::CentroidInBox,
        MatchingKind::Iou => {
            let threshold = args.iou.or(config.iou).unwrap_or(0.5);
            if !(threshold > 0.0 && threshold <= 1.0) {
                return Err(usage(format!("--iou must be in (0, 1], got {threshold}")));
            }
            MatchingStrategy::IouThreshold(threshold)
        }
    };

    let mut weights = AogmWeights::default();
    if let Some(w) = &config.weights {
        for (slot, value) in [
            (&mut weights.ns, w.ns),
            (&mut weights.fn_, w.fn_),
            (&mut weights.fp, w.fp),
            (&mut weights.ed, w.ed),
            (&mut weights.ea, w.ea),
            (&mut weights.ec, w.ec),
        ] {
            if let Some(v) = value {
                *slot = v;
            }
        }
    }
    if let Some(spec) = &args.weights {
        parse_weight_overrides(spec, &mut weights)?;
    }
    if !weights.all_non_negative() {
        return Err(usage("weights must be non-negative"));
    }

    let mut tolerances = MitosisTolerances::default();
    if let Some(w) = args.mitosis_window.or(config.mitosis_window) {
        tolerances.temporal = w;
    }
    if let Some(r) = args.mitosis_radius.or(config.mitosis_radius) {
        if !(r.is_finite() && r >= 0.0) {
            return Err(usage("--mitosis-radius must be finite and non-negative"));
        }
        tolerances.spatial = r;
    }

    Ok(Scoring {
        strategy,
        weights,
        tolerances,
    })
}

fn load_graph(
    path: &Path,
    detections: Option<&PathBuf>,
    strategy: MatchingStrategy,
) -> Result<TrackingGraph, AppError> {
    let text = read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        if detections.is_some() {
            return Err(usage(format!(
                "{}: graph documents carry geometry; a detection file cannot be joined",
                path.display()
            )));
        }
        return Ok(parse_graph_document(&text)?);
    }
    let rows;
    let detections = match detections {
        Some(det_path) => {
            rows = parse_detection_csv(&read_to_string(det_path)?)?;
            Some(rows.as_slice())
        }
        None => None,
    };
    let table = parse_ctc_tracks(&text, detections)?;
    if table.synthetic_geometry && strategy != MatchingStrategy::ExactId {
        return Err(usage(format!(
            "{}: geometric matching needs a detection file (--ref-detections/--comp-detections)",
            path.display()
        )));
    }
    Ok(build_graph(&table)?)
}

fn mitosis_summary(
    reference: &TrackingGraph,
    computed: &TrackingGraph,
    tolerances: &MitosisTolerances,
) -> MitosisSummary {
    let result = match_mitosis(
        &reference.mitosis_events(),
        &computed.mitosis_events(),
        tolerances,
    );
    let pr = mitosis_pr(&result);
    MitosisSummary {
        matched: result.pairs.len(),
        reference_events: result.reference_count(),
        computed_events: result.computed_count(),
        precision: pr.precision,
        recall: pr.recall,
        f1: pr.f1,
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), AppError> {
    let scoring = resolve_scoring(&args.scoring)?;
    let reference = load_graph(
        &args.input.reference,
        args.input.ref_detections.as_ref(),
        scoring.strategy,
    )?;
    let computed = load_graph(
        &args.input.computed,
        args.input.comp_detections.as_ref(),
        scoring.strategy,
    )?;
    let report = evaluate(&reference, &computed, scoring.strategy, &scoring.weights)?;
    let mitosis = mitosis_summary(&reference, &computed, &scoring.tolerances);
    let format = match args.format {
        OutputFormat::Table => ReportFormat::Table,
        OutputFormat::Json => ReportFormat::Json,
    };
    let text = write_report(&report, Some(&mitosis), format);
    print!("{text}");
    if let Some(path) = &args.output {
        std::fs::write(path, &text)
            .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn format_delta(delta: f64) -> String {
    if delta >= 0.0 {
        format!("+{delta:.1}")
    } else {
        format!("{delta:.1}")
    }
}

fn print_compare(
    with: &EvaluationReport,
    without: &EvaluationReport,
    mitosis_with: &MitosisSummary,
    mitosis_without: &MitosisSummary,
) {
    let (u, s, w) = with.verdicts.parent_link_breakdown();
    println!("with-links total {:.1}", with.total);
    println!("without-links total {:.1}", without.total);
    println!("delta {}", format_delta(with.total - without.total));
    println!("division links: U = {u} unsupported, S = {s} supported, W = {w} wrong-semantics");
    for (label, m) in [("with-links", mitosis_with), ("without-links", mitosis_without)] {
        println!(
            "mitosis {label}: precision {:.4} recall {:.4} f1 {:.4} (matched {} of {} reference, {} computed)",
            m.precision, m.recall, m.f1, m.matched, m.reference_events, m.computed_events
        );
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), AppError> {
    let scoring = resolve_scoring(&args.scoring)?;
    let reference = load_graph(
        &args.input.reference,
        args.input.ref_detections.as_ref(),
        scoring.strategy,
    )?;
    let computed = load_graph(
        &args.input.computed,
        args.input.comp_detections.as_ref(),
        scoring.strategy,
    )?;
    let stripped = computed.strip_parent_edges();
    let with = evaluate(&reference, &computed, scoring.strategy, &scoring.weights)?;
    let without = evaluate(&reference, &stripped, scoring.strategy, &scoring.weights)?;
    let mitosis_with = mitosis_summary(&reference, &computed, &scoring.tolerances);
    let mitosis_without = mitosis_summary(&reference, &stripped, &scoring.tolerances);
    print_compare(&with, &without, &mitosis_with, &mitosis_without);
    Ok(())
}

fn cmd_link(args: LinkArgs) -> Result<(), AppError> {
    let config = load_config(args.config.as_ref())?;
    let mut params = LinkerParams::default();
    if let Some(w) = args.window.or(config.window) {
        params.window = w;
    }
    if let Some(r) = args.radius.or(config.radius) {
        if !(r.is_finite() && r >= 0.0) {
            return Err(usage("--radius must be finite and non-negative"));
        }
        params.radius = r;
    }
    let detections = parse_detection_csv(&read_to_string(&args.detections)?)?;
    let table = parse_ctc_tracks(&read_to_string(&args.tracks)?, Some(&detections))?;
    let linked = link_mitosis(&table, &params);
    build_graph(&linked)?; // the linker must hand back a valid lineage
    let text = write_ctc_tracks(&linked);
    match &args.output {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_pair(dir: &Path, pair: &ScenarioPair) -> Result<(), AppError> {
    let io_err = |e: std::io::Error| AppError::Data(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let parts = [
        ("reference", &pair.reference),
        ("with-links", &pair.computed_with_links),
        ("without-links", &pair.computed_without_links),
    ];
    for (suffix, graph) in parts {
        let path = dir.join(format!("{}-{suffix}.json", pair.name));
        std::fs::write(&path, write_graph_document(graph))
            .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), AppError> {
    let pairs = match args.scenario {
        Scenario::Figure1 => {
            if args.divisions.is_some() || args.last_frame.is_some() {
                return Err(usage("--divisions/--last-frame apply only to --scenario figure2"));
            }
            figure1_cases()
        }
        Scenario::Figure2 => {
            let divisions = args.divisions.unwrap_or_else(|| DEFAULT_DIVISIONS.to_vec());
            let last_frame = args.last_frame.unwrap_or(DEFAULT_LAST_FRAME);
            let events = (1usize << divisions.len()) - 1;
            vec![figure2_scenario_with(
                &divisions,
                last_frame,
                &default_mistake_mix(events),
            )?]
        }
    };
    for pair in &pairs {
        write_pair(&args.out_dir, pair)?;
        println!(
            "{}: reference {} vertices, prediction {} vertices",
            pair.name,
            pair.reference.vertex_count(),
            pair.computed_with_links.vertex_count()
        );
    }
    Ok(())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<(), AppError> {
    let pairs = enumerate_inversions(args.max_frames, args.max_tracks)?;
    for pair in &pairs {
        if let Some(dir) = &args.out_dir {
            write_pair(dir, pair)?;
        }
        println!(
            "{}: {} reference vertices, {} prediction vertices",
            pair.name,
            pair.reference.vertex_count(),
            pair.computed_with_links.vertex_count()
        );
    }
    println!("{} counterexamples", pairs.len());
    Ok(())
}
