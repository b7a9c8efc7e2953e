//! End-to-end simplification: topology repair, detect/classify/replace
//! loops, final repair, and a machine-readable run report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::artifacts::{detect_artifacts, DetectionParams, ThresholdSource};
use crate::classification::{classify, GroupKind};
use crate::continuity::{ContinuityParams, StrokeSet};
use crate::error::{Error, Result};
use crate::faces::polygonize;
use crate::geom::Coord;
use crate::network::Network;
use crate::replacement::{apply_edits, plan_edits, SkeletonParams};
use crate::topology::{
    drop_duplicate_edges, fix_topology, induce_intersection_nodes, remove_interstitial_nodes, ConsolidationParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifyParams {
    pub consolidation: ConsolidationParams,
    pub continuity: ContinuityParams,
    pub detection: DetectionParams,
    pub skeleton: SkeletonParams,
    pub loops: usize,
}

impl Default for SimplifyParams {
    fn default() -> Self {
        SimplifyParams {
            consolidation: ConsolidationParams::default(),
            continuity: ContinuityParams::default(),
            detection: DetectionParams::default(),
            skeleton: SkeletonParams::default(),
            loops: 2,
        }
    }
}

impl SimplifyParams {
    pub fn validate(&self) -> Result<()> {
        if self.loops < 1 {
            return Err(Error::InvalidParameter("loops must be >= 1".into()));
        }
        if !(self.consolidation.tolerance >= 0.0) {
            return Err(Error::InvalidParameter("consolidation tolerance must be >= 0".into()));
        }
        self.continuity.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportWarning {
    /// 1-based loop number; `None` for the final check.
    pub loop_index: Option<usize>,
    pub kind: Option<GroupKind>,
    pub location: Coord,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoopStats {
    pub threshold: f64,
    pub threshold_source: Option<ThresholdSource>,
    pub faces: usize,
    pub artifacts: usize,
    pub by_kind: BTreeMap<String, usize>,
    pub by_ces_type: BTreeMap<String, usize>,
    pub by_rule: BTreeMap<String, usize>,
    pub edits_applied: usize,
    pub edges_after: usize,
    pub warnings: Vec<ReportWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub threshold: Option<f64>,
    pub loops: Vec<LoopStats>,
    /// Artifacts still present after the last loop, plus every loop warning.
    pub warnings: Vec<ReportWarning>,
    pub edges_before: usize,
    pub edges_after: usize,
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub length_before: f64,
    pub length_after: f64,
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Warnings left by the final check (artifacts still present).
    pub fn unresolved(&self) -> impl Iterator<Item = &ReportWarning> {
        self.warnings.iter().filter(|w| w.loop_index.is_none())
    }
}

fn rule_name(r: crate::replacement::Rule) -> String {
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// One detect → classify → replace pass. With `threshold` set the
/// threshold is not derived.
pub fn loop_once(net: &Network, params: &SimplifyParams, threshold: Option<f64>) -> Result<(Network, LoopStats)> {
    let faces = polygonize(net)?;
    let mut det_params = params.detection.clone();
    if threshold.is_some() {
        det_params.threshold = threshold;
    }
    let detection = detect_artifacts(&faces, &det_params)?;
    let mut stats = LoopStats {
        threshold: detection.threshold,
        threshold_source: Some(detection.threshold_source),
        faces: faces.len(),
        artifacts: detection.artifact_count(),
        ..Default::default()
    };
    if stats.artifacts == 0 {
        stats.edges_after = net.edge_count();
        return Ok((net.clone(), stats));
    }
    let strokes = StrokeSet::detect(net, &params.continuity);
    let groups = classify(net, &faces, &detection, &strokes);
    for g in &groups {
        *stats.by_kind.entry(g.kind.as_str().to_owned()).or_insert(0) += 1;
        if let Some(t) = &g.ces_type {
            *stats.by_ces_type.entry(t.to_string()).or_insert(0) += 1;
        }
    }
    let (edits, warnings) = plan_edits(net, &faces, &groups, &strokes, &params.skeleton);
    for (_, e) in &edits {
        for &r in &e.rules {
            *stats.by_rule.entry(rule_name(r)).or_insert(0) += 1;
        }
    }
    stats.edits_applied = edits.len();
    stats.warnings = warnings
        .into_iter()
        .map(|w| ReportWarning {
            loop_index: None,
            kind: Some(w.kind),
            location: w.location,
            message: w.message,
        })
        .collect();
    let edits: Vec<_> = edits.into_iter().map(|(_, e)| e).collect();
    let out = apply_edits(net, &edits);
    // keep the network noded for the next pass
    let out = drop_duplicate_edges(&remove_interstitial_nodes(&induce_intersection_nodes(&out)));
    stats.edges_after = out.edge_count();
    Ok((out, stats))
}

/// Full simplification. Unresolved artifacts are reported, never fatal.
pub fn simplify(net: &Network, params: &SimplifyParams) -> Result<(Network, RunReport)> {
    params.validate()?;
    let mut report = RunReport {
        edges_before: net.edge_count(),
        nodes_before: net.node_count(),
        length_before: net.total_length(),
        ..Default::default()
    };
    let timed = |stage: String, t: Instant, report: &mut RunReport| {
        report.timings.push(StageTiming {
            stage,
            seconds: t.elapsed().as_secs_f64(),
        });
    };

    let t = Instant::now();
    let mut cur = fix_topology(net, &params.consolidation);
    timed("fix_topology".into(), t, &mut report);

    let mut threshold = params.detection.threshold;
    for i in 0..params.loops {
        let t = Instant::now();
        let (next, mut stats) = loop_once(&cur, params, threshold)?;
        timed(format!("loop_{}", i + 1), t, &mut report);
        if threshold.is_none() {
            threshold = Some(stats.threshold);
        }
        for w in &mut stats.warnings {
            w.loop_index = Some(i + 1);
        }
        report.warnings.extend(stats.warnings.iter().cloned());
        report.loops.push(stats);
        cur = next;
    }
    report.threshold = threshold;

    let t = Instant::now();
    cur = fix_topology(&cur, &params.consolidation);
    timed("post_process".into(), t, &mut report);

    let t = Instant::now();
    let faces = polygonize(&cur)?;
    let mut det_params = params.detection.clone();
    det_params.threshold = threshold;
    let detection = detect_artifacts(&faces, &det_params)?;
    for f in detection.faces.iter().filter(|f| f.is_artifact) {
        report.warnings.push(ReportWarning {
            loop_index: None,
            kind: None,
            location: faces[f.face.0].region.centroid(),
            message: format!("unresolved artifact (index {:.3})", f.fai),
        });
    }
    timed("final_check".into(), t, &mut report);

    report.edges_after = cur.edge_count();
    report.nodes_after = cur.node_count();
    report.length_after = cur.total_length();
    Ok((cur, report))
}
