use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use netsimp::classification::classify;
use netsimp::continuity::{ContinuityParams, StrokeSet};
use netsimp::evaluation::{compare_networks, GridParams, DEFAULT_GRID_EDGE};
use netsimp::faces::polygonize;
use netsimp::fixtures::{generate, FIXTURE_NAMES};
use netsimp::io::{read_network, read_regions, records_to_geojson, write_network};
use netsimp::pipeline::{simplify, SimplifyParams};
use netsimp::topology::fix_topology;
use netsimp::{detect_artifacts, Error, Network};

#[derive(Parser)]
#[command(
    name = "netsimp",
    version,
    about = "Simplify street networks while keeping street continuity"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simplify a network and write the result as GeoJSON.
    Simplify(SimplifyArgs),
    /// Compare two networks cell by cell on a hexagonal grid.
    Evaluate(EvaluateArgs),
    /// Assign every edge to a continuity stroke.
    Strokes(StrokesArgs),
    /// Tabulate faces with their artifact index and classification.
    Artifacts(ArtifactsArgs),
    /// Write a built-in test situation as GeoJSON.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Distance within which nearby nodes are merged (metres).
    #[arg(long, default_value_t = 2.0)]
    consolidation_tolerance: f64,
    /// Minimum interior angle (degrees) at which two segments continue a stroke.
    #[arg(long, default_value_t = 120.0)]
    angle_threshold: f64,
    /// Boundary samples per metre for skeletons.
    #[arg(long, default_value_t = 1.0)]
    segmentation_density: f64,
    #[arg(long, default_value_t = 2)]
    loops: usize,
    /// Fixed artifact index threshold; derived from the data when omitted.
    #[arg(long, visible_alias = "threshold")]
    artifact_threshold: Option<f64>,
    /// Relative margin for flagging faces next to artifacts.
    #[arg(long)]
    neighbor_margin: Option<f64>,
    /// Polygons (GeoJSON) whose faces are never treated as artifacts.
    #[arg(long)]
    exclusion_mask: Option<PathBuf>,
}

impl ParamArgs {
    fn to_params(&self) -> Result<SimplifyParams> {
        let mut p = SimplifyParams::default();
        p.consolidation.tolerance = self.consolidation_tolerance;
        p.continuity.angle_threshold = self.angle_threshold;
        p.skeleton.segmentation_density = self.segmentation_density;
        p.loops = self.loops;
        p.detection.threshold = self.artifact_threshold;
        if let Some(m) = self.neighbor_margin {
            p.detection.neighbor_similarity = m;
        }
        if let Some(path) = &self.exclusion_mask {
            p.detection.exclusion_mask =
                read_regions(path).with_context(|| format!("reading mask {}", path.display()))?;
        }
        if !(p.skeleton.segmentation_density > 0.0) {
            return Err(Error::InvalidParameter("segmentation density must be > 0".into()).into());
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct SimplifyArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Write the run report (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stat {
    Pearson,
    Spearman,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Reference network (for example a hand-simplified one).
    #[arg(short, long)]
    reference: PathBuf,
    /// Network to compare against the reference.
    #[arg(short = 'c', long, visible_alias = "input", short_alias = 'i')]
    candidate: PathBuf,
    /// Per-cell values as CSV (network, cell_id, metric, value).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Full comparison as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Hexagon edge length (metres).
    #[arg(long, default_value_t = DEFAULT_GRID_EDGE)]
    grid_edge: f64,
    #[arg(long, default_value_t = 120.0)]
    angle_threshold: f64,
    /// Extra summary columns.
    #[arg(long, value_enum, value_delimiter = ',')]
    stats: Vec<Stat>,
}

#[derive(Args)]
struct StrokesArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 120.0)]
    angle_threshold: f64,
}

#[derive(Args)]
struct ArtifactsArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct FixtureArgs {
    /// Situation name, e.g. "Roundabouts" or "t-junction".
    #[arg(required_unless_present = "list")]
    name: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the goal network instead of the input.
    #[arg(long)]
    goal: bool,
    /// List the available names.
    #[arg(long)]
    list: bool,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(path: &Path) -> Result<Network> {
    read_network(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_simplify(a: &SimplifyArgs) -> Result<()> {
    let params = a.params.to_params()?;
    let net = load(&a.input)?;
    let (out, report) = simplify(&net, &params)?;
    for w in &report.warnings {
        log::warn!("{} at ({:.1}, {:.1})", w.message, w.location.x, w.location.y);
    }
    write_network(&out, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    if let Some(r) = &a.report {
        std::fs::write(r, report.to_json()?).with_context(|| format!("writing {}", r.display()))?;
    }
    log::info!(
        "{} -> {} edges, {} warnings",
        report.edges_before,
        report.edges_after,
        report.warnings.len()
    );
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let reference = load(&a.reference)?;
    let candidate = load(&a.candidate)?;
    let params = GridParams {
        edge: a.grid_edge,
        continuity: ContinuityParams {
            angle_threshold: a.angle_threshold,
            ..Default::default()
        },
    };
    params.continuity.validate()?;
    let result = compare_networks(&reference, &candidate, &params)?;

    if let Some(path) = &a.output {
        let mut w = csv::Writer::from_writer(sink(Some(path))?);
        w.write_record(["network", "cell_id", "metric", "value"])?;
        for (net, cell, metric, value) in result.cell_rows() {
            w.write_record([net, cell.as_str(), metric.as_str(), &value.to_string()])?;
        }
        w.flush()?;
    }
    if let Some(path) = &a.report {
        std::fs::write(path, serde_json::to_string_pretty(&result)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let mut header = vec!["metric", "d", "xi"];
    if a.stats.contains(&Stat::Pearson) {
        header.push("pearson");
    }
    if a.stats.contains(&Stat::Spearman) {
        header.push("spearman");
    }
    w.write_record(&header)?;
    for m in &result.metrics {
        let mut row = vec![m.metric.to_string(), m.d.to_string(), m.xi.to_string()];
        if a.stats.contains(&Stat::Pearson) {
            row.push(fmt_opt(m.pearson));
        }
        if a.stats.contains(&Stat::Spearman) {
            row.push(fmt_opt(m.spearman));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_strokes(a: &StrokesArgs) -> Result<()> {
    let params = ContinuityParams {
        angle_threshold: a.angle_threshold,
        ..Default::default()
    };
    params.validate()?;
    let net = load(&a.input)?;
    let strokes = StrokeSet::detect(&net, &params);
    let mut w = csv::Writer::from_writer(sink(a.output.as_deref())?);
    w.write_record(["edge_id", "stroke_id", "length"])?;
    let mut rows: Vec<_> = strokes
        .strokes
        .iter()
        .flat_map(|s| s.edge_ids.iter().map(move |e| (*e, s.id, s.total_length)))
        .collect();
    rows.sort_by_key(|r| r.0);
    for (e, s, len) in rows {
        w.write_record([e.0.to_string(), s.to_string(), len.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_artifacts(a: &ArtifactsArgs) -> Result<()> {
    let params = a.params.to_params()?;
    let net = fix_topology(&load(&a.input)?, &params.consolidation);
    let faces = polygonize(&net)?;
    let detection = detect_artifacts(&faces, &params.detection)?;
    let strokes = StrokeSet::detect(&net, &params.continuity);
    let groups = classify(&net, &faces, &detection, &strokes);
    let mut group_of = vec![None; faces.len()];
    for g in &groups {
        for f in &g.faces {
            group_of[f.0] = Some(g);
        }
    }
    log::info!("threshold {} ({:?})", detection.threshold, detection.threshold_source);
    let mut w = csv::Writer::from_writer(sink(a.output.as_deref())?);
    w.write_record(["face_id", "fai", "is_artifact", "group_kind", "ces_type"])?;
    for f in &detection.faces {
        let g = group_of[f.face.0];
        w.write_record([
            f.face.0.to_string(),
            f.fai.to_string(),
            f.is_artifact.to_string(),
            g.map(|g| g.kind.as_str().to_owned()).unwrap_or_default(),
            g.and_then(|g| g.ces_type.as_ref())
                .map(|t| t.to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_fixture(a: &FixtureArgs) -> Result<()> {
    let mut out = sink(a.output.as_deref())?;
    if a.list {
        for n in FIXTURE_NAMES {
            writeln!(out, "{n}")?;
        }
        return Ok(());
    }
    let case = generate(a.name.as_deref().unwrap_or_default())?;
    let net = if a.goal { &case.goal } else { &case.input };
    out.write_all(records_to_geojson(&net.records(), None)?.as_bytes())?;
    Ok(())
}

/// Exit status for an error: 2 for bad input, 3 for unusable CRS, 4 for
/// networks that cannot be compared.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::GeographicCrs => 3,
                Error::CrsMismatch(..) | Error::GridMismatch => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() || cause.downcast_ref::<csv::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    let result = match &cli.command {
        Command::Simplify(a) => cmd_simplify(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Strokes(a) => cmd_strokes(a),
        Command::Artifacts(a) => cmd_artifacts(a),
        Command::Fixture(a) => cmd_fixture(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
