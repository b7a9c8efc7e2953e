//! Geometry replacement for classified artifacts.
//!
//! Priority is: drop S edges first, then adjust E, and keep C. Each group
//! yields an [`Edit`]; edits are applied together, after which degree-2
//! nodes are merged (joining an original edge with a new link marks it
//! extended).

pub mod skeleton;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

pub use skeleton::{voronoi_skeleton, SkeletonParams};

use crate::classification::{outline, ArtifactGroup, GroupKind, Outline};
use crate::clustering::UnionFind;
use crate::continuity::{edge_label, CesLabel, StrokeSet};
use crate::faces::FacePolygon;
use crate::geom::{locate_on_polyline, Coord, LineLocation};
use crate::network::{Attributes, EdgeId, EdgeRecord, EdgeStatus, Network, NodeId};
use crate::topology::{drop_duplicate_edges, remove_interstitial_nodes, split_polyline};

/// Compactness (4πA/P²) at or above which an artifact without a continuous
/// stroke collapses to its centroid instead of a skeleton.
pub const COMPACTNESS_THRESHOLD: f64 = 0.5;

const CONTAIN_TOL: f64 = 1e-6;
/// Projection points this close to an existing vertex use the vertex.
const VERTEX_SNAP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Keep the continuous strokes, drop the rest, link loose ends to them.
    KeepContinuous,
    /// Replace with a single node at the area centroid.
    CentroidCollapse,
    /// Replace with a skeleton joining the connection points.
    Skeleton,
    /// Dead-end loop replaced by a stub to its farthest vertex.
    DeadEndStub,
    /// Pair split by a continuous edge, handled as two isolates.
    SplitPair,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Edit {
    pub removed: BTreeSet<EdgeId>,
    /// Points where a retained edge is cut to receive a link.
    pub splits: Vec<(EdgeId, Coord)>,
    /// New lines, all inside the artifact.
    pub added: Vec<Vec<Coord>>,
    pub rules: Vec<Rule>,
}

impl Edit {
    fn merge(&mut self, other: Edit) {
        self.removed.extend(other.removed);
        self.splits.extend(other.splits);
        self.added.extend(other.added);
        self.rules.extend(other.rules);
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.splits.is_empty() && self.added.is_empty()
    }

    /// Overlapping removals, or one edit cutting an edge the other removes.
    pub fn conflicts_with(&self, other: &Edit) -> bool {
        let touches = |a: &Edit, b: &Edit| a.splits.iter().any(|(e, _)| b.removed.contains(e));
        self.removed.intersection(&other.removed).next().is_some() || touches(self, other) || touches(other, self)
    }
}

/// Why an artifact was left as it was.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub kind: GroupKind,
    pub face_count: usize,
    pub location: Coord,
    pub message: String,
}

type Outcome = std::result::Result<Option<Edit>, String>;

fn geometry(net: &Network, e: EdgeId) -> &[Coord] {
    &net.edge(e).expect("edge in network").geometry
}

fn edge_nodes(net: &Network, edges: &BTreeSet<EdgeId>) -> BTreeSet<NodeId> {
    edges
        .iter()
        .flat_map(|&e| {
            let x = net.edge(e).unwrap();
            [x.endpoints.0, x.endpoints.1]
        })
        .collect()
}

/// Boundary nodes with an edge leaving the artifact.
pub fn connection_nodes(net: &Network, o: &Outline, art: &BTreeSet<EdgeId>) -> Vec<NodeId> {
    o.boundary_nodes
        .iter()
        .copied()
        .filter(|&n| net.incident(n).iter().any(|&(i, _)| !art.contains(&net.edges()[i].id)))
        .collect()
}

fn is_connected(net: &Network, edges: &BTreeSet<EdgeId>) -> bool {
    let nodes: Vec<NodeId> = edge_nodes(net, edges).into_iter().collect();
    let pos: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut uf = UnionFind::new(nodes.len());
    for &e in edges {
        let x = net.edge(e).unwrap();
        uf.union(pos[&x.endpoints.0], pos[&x.endpoints.1]);
    }
    (0..nodes.len()).all(|i| uf.find(i) == uf.find(0))
}

/// Straight link from `p` to the closest reachable point of `targets`
/// inside the outline. Returns the edge to cut (if the point is not already
/// a node) and the point.
fn link_to(net: &Network, targets: &BTreeSet<EdgeId>, p: Coord, o: &Outline) -> Option<(Option<EdgeId>, Coord)> {
    let mut cands: Vec<(f64, EdgeId, Coord)> = Vec::new();
    for &id in targets {
        let g = geometry(net, id);
        let loc = locate_on_polyline(p, g);
        let mut q = loc.point;
        if let Some(v) = g.iter().find(|v| v.dist(q) <= VERTEX_SNAP) {
            q = *v;
        }
        cands.push((p.dist(q), id, q));
        for end in [g[0], g[g.len() - 1]] {
            cands.push((p.dist(end), id, end));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (d, id, q) in cands {
        if d < 1e-9 {
            return Some((None, q));
        }
        if o.region.covers_polyline(&[p, q], CONTAIN_TOL) {
            let g = geometry(net, id);
            let at_node = q.key() == g[0].key() || q.key() == g[g.len() - 1].key();
            return Some(((!at_node).then_some(id), q));
        }
    }
    None
}

fn coords(net: &Network, nodes: &[NodeId]) -> Vec<Coord> {
    nodes.iter().map(|&n| net.node(n).coord).collect()
}

fn skeleton_edit(
    net: &Network,
    o: &Outline,
    remove: BTreeSet<EdgeId>,
    terminals: &[Coord],
    obstacles: &BTreeSet<EdgeId>,
    params: &SkeletonParams,
) -> Outcome {
    let obs: Vec<Vec<Coord>> = obstacles.iter().map(|&e| geometry(net, e).to_vec()).collect();
    let lines = voronoi_skeleton(&o.region, terminals, &obs, params).map_err(|e| e.to_string())?;
    Ok(Some(Edit {
        removed: remove,
        splits: Vec::new(),
        added: lines,
        rules: vec![Rule::Skeleton],
    }))
}

fn dead_end_stub(net: &Network, o: &Outline, art: &BTreeSet<EdgeId>, node: NodeId) -> Outcome {
    let p = net.node(node).coord;
    let mut verts: Vec<Coord> = o.region.rings.iter().flatten().copied().collect();
    verts.sort_by(|a, b| p.dist(*b).total_cmp(&p.dist(*a)));
    let far = verts
        .into_iter()
        .find(|&v| v.dist(p) > 0.0 && o.region.covers_polyline(&[p, v], CONTAIN_TOL))
        .ok_or("no contained stub to the far side of the loop")?;
    Ok(Some(Edit {
        removed: art.clone(),
        splits: Vec::new(),
        added: vec![vec![p, far]],
        rules: vec![Rule::DeadEndStub],
    }))
}

fn centroid_collapse(net: &Network, o: &Outline, art: &BTreeSet<EdgeId>, conn: &[NodeId]) -> Option<Edit> {
    let c = o.region.centroid();
    if !o.region.contains(c) {
        return None;
    }
    let mut added = Vec::new();
    for p in coords(net, conn) {
        if !o.region.covers_polyline(&[p, c], CONTAIN_TOL) {
            return None;
        }
        added.push(vec![p, c]);
    }
    Some(Edit {
        removed: art.clone(),
        splits: Vec::new(),
        added,
        rules: vec![Rule::CentroidCollapse],
    })
}

/// Keeps `kept`, removes the rest of the artifact, links orphaned
/// connection nodes to the kept geometry. Returns the orphans that could
/// not be linked directly.
fn keep_and_link(
    net: &Network,
    o: &Outline,
    art: &BTreeSet<EdgeId>,
    kept: &BTreeSet<EdgeId>,
    conn: &[NodeId],
) -> (Edit, Vec<NodeId>) {
    let kept_nodes = edge_nodes(net, kept);
    let mut edit = Edit {
        removed: art.difference(kept).copied().collect(),
        rules: vec![Rule::KeepContinuous],
        ..Default::default()
    };
    let mut failed = Vec::new();
    for &n in conn.iter().filter(|n| !kept_nodes.contains(n)) {
        let p = net.node(n).coord;
        match link_to(net, kept, p, o) {
            Some((split, q)) => {
                if let Some(e) = split {
                    edit.splits.push((e, q));
                }
                edit.added.push(vec![p, q]);
            }
            None => failed.push(n),
        }
    }
    (edit, failed)
}

/// Replacement for a single artifact outline (an isolate, or a merged
/// pair). `protected` edges are never removed.
pub fn simplify_isolate(
    net: &Network,
    o: &Outline,
    strokes: &StrokeSet,
    protected: &BTreeSet<EdgeId>,
    params: &SkeletonParams,
) -> Outcome {
    let art = o.all_edges();
    let conn = connection_nodes(net, o, &art);
    match conn.len() {
        0 => return Ok(None),
        1 if protected.is_empty() => return dead_end_stub(net, o, &art, conn[0]),
        _ => {}
    }
    let mut kept: BTreeSet<EdgeId> = art
        .iter()
        .copied()
        .filter(|&e| edge_label(strokes, &art, e) == CesLabel::C)
        .collect();
    kept.extend(protected.iter().copied());

    if !kept.is_empty() {
        if !is_connected(net, &kept) {
            if !protected.is_empty() {
                return Err("protected edge leaves continuous strokes disconnected".into());
            }
            // parallel continuous strokes: replace all of them
            return skeleton_edit(net, o, art.clone(), &coords(net, &conn), &BTreeSet::new(), params);
        }
        let (edit, failed) = keep_and_link(net, o, &art, &kept, &conn);
        if failed.is_empty() {
            return Ok(Some(edit));
        }
        if !protected.is_empty() {
            return Err("connection cannot reach the retained stroke".into());
        }
        return skeleton_edit(net, o, art.clone(), &coords(net, &conn), &BTreeSet::new(), params);
    }

    if o.region.isoperimetric_quotient() >= COMPACTNESS_THRESHOLD {
        if let Some(edit) = centroid_collapse(net, o, &art, &conn) {
            return Ok(Some(edit));
        }
    }
    skeleton_edit(net, o, art.clone(), &coords(net, &conn), &BTreeSet::new(), params)
}

/// A pair split by a continuous edge is handled as two isolates sharing
/// that edge; otherwise the shared edge goes and the union is one isolate.
pub fn simplify_pair(
    net: &Network,
    faces: &[FacePolygon],
    group: &ArtifactGroup,
    strokes: &StrokeSet,
    params: &SkeletonParams,
) -> Outcome {
    let o = &group.outline;
    let art = o.all_edges();
    let shared: BTreeSet<EdgeId> = o.shared_edges.iter().copied().collect();
    let continuous = !shared.is_empty() && shared.iter().all(|&e| edge_label(strokes, &art, e) == CesLabel::C);
    if continuous {
        let mut combined = Edit::default();
        let mut ok = true;
        for &f in &group.faces {
            let single = outline(net, &[&faces[f.0]]);
            match simplify_isolate(net, &single, strokes, &shared, params) {
                Ok(Some(e)) => {
                    if combined.conflicts_with(&e) {
                        ok = false;
                        break;
                    }
                    combined.merge(e);
                }
                Ok(None) => {}
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            combined.rules.insert(0, Rule::SplitPair);
            return Ok(Some(combined));
        }
    }
    simplify_isolate(net, o, strokes, &BTreeSet::new(), params)
}

/// Clusters keep only continuous strokes running through their interior;
/// everything else is replaced by a skeleton.
pub fn simplify_cluster(net: &Network, group: &ArtifactGroup, strokes: &StrokeSet, params: &SkeletonParams) -> Outcome {
    let o = &group.outline;
    let art = o.all_edges();
    let internal: BTreeSet<EdgeId> = o.shared_edges.iter().chain(&o.inner_edges).copied().collect();
    let kept: BTreeSet<EdgeId> = art
        .iter()
        .copied()
        .filter(|&e| {
            edge_label(strokes, &art, e) == CesLabel::C
                && strokes.stroke_of(e).is_some_and(|s| {
                    s.edge_ids
                        .iter()
                        .filter(|x| art.contains(x))
                        .all(|x| internal.contains(x))
                })
        })
        .collect();
    let conn = connection_nodes(net, o, &art);
    if conn.len() < 2 && kept.is_empty() {
        return match conn.first() {
            Some(&n) => dead_end_stub(net, o, &art, n),
            None => Ok(None),
        };
    }
    if kept.is_empty() {
        return skeleton_edit(net, o, art.clone(), &coords(net, &conn), &kept, params);
    }
    let (mut edit, failed) = keep_and_link(net, o, &art, &kept, &conn);
    if failed.is_empty() {
        return Ok(Some(edit));
    }
    // join the rest through a skeleton anchored on the nearest kept node
    let centre = o.region.centroid();
    let anchor = edge_nodes(net, &kept)
        .into_iter()
        .map(|n| net.node(n).coord)
        .min_by(|a, b| a.dist(centre).total_cmp(&b.dist(centre)))
        .unwrap();
    let mut terminals = coords(net, &failed);
    terminals.push(anchor);
    let lines = voronoi_skeleton(
        &o.region,
        &terminals,
        &kept.iter().map(|&e| geometry(net, e).to_vec()).collect::<Vec<_>>(),
        params,
    )
    .map_err(|e| e.to_string())?;
    edit.added.extend(lines);
    edit.rules.push(Rule::Skeleton);
    Ok(Some(edit))
}

/// Plans one edit per group. Groups whose edit conflicts with an earlier
/// one are deferred; failures become warnings.
pub fn plan_edits(
    net: &Network,
    faces: &[FacePolygon],
    groups: &[ArtifactGroup],
    strokes: &StrokeSet,
    params: &SkeletonParams,
) -> (Vec<(usize, Edit)>, Vec<Warning>) {
    let mut edits: Vec<(usize, Edit)> = Vec::new();
    let mut warnings = Vec::new();
    for g in groups {
        let outcome = match g.kind {
            GroupKind::Isolate => simplify_isolate(net, &g.outline, strokes, &BTreeSet::new(), params),
            GroupKind::Pair => simplify_pair(net, faces, g, strokes, params),
            GroupKind::Cluster => simplify_cluster(net, g, strokes, params),
        };
        let warn = |message: String| Warning {
            kind: g.kind,
            face_count: g.faces.len(),
            location: g.outline.region.centroid(),
            message,
        };
        match outcome {
            Ok(Some(edit)) if !edit.is_empty() => {
                if edits.iter().any(|(_, e)| e.conflicts_with(&edit)) {
                    warnings.push(warn("deferred: overlaps another replacement".into()));
                } else {
                    edits.push((g.id, edit));
                }
            }
            Ok(_) => {}
            Err(msg) => warnings.push(warn(format!("artifact insufficiently simplified: {msg}"))),
        }
    }
    (edits, warnings)
}

/// Applies edits, then merges degree-2 nodes and drops duplicates.
pub fn apply_edits(net: &Network, edits: &[Edit]) -> Network {
    if edits.iter().all(Edit::is_empty) {
        return net.clone();
    }
    let removed: BTreeSet<EdgeId> = edits.iter().flat_map(|e| e.removed.iter().copied()).collect();
    let mut cuts: BTreeMap<EdgeId, Vec<Coord>> = BTreeMap::new();
    for e in edits {
        for &(id, c) in &e.splits {
            cuts.entry(id).or_default().push(c);
        }
    }
    let mut next = net.next_edge_id();
    let mut records = Vec::with_capacity(net.edge_count());
    for e in net.edges() {
        if removed.contains(&e.id) {
            continue;
        }
        let Some(points) = cuts.get(&e.id) else {
            records.push(e.to_record());
            continue;
        };
        let locs: Vec<(LineLocation, Coord)> = points
            .iter()
            .map(|&c| (locate_on_polyline(c, &e.geometry), c))
            .collect();
        for (k, piece) in split_polyline(&e.geometry, &locs, net.snap_epsilon())
            .into_iter()
            .enumerate()
        {
            let id = if k == 0 {
                e.id
            } else {
                next += 1;
                EdgeId(next - 1)
            };
            records.push(EdgeRecord {
                id,
                geometry: piece,
                status: e.status,
                attributes: e.attributes.clone(),
            });
        }
    }
    for line in edits.iter().flat_map(|e| e.added.iter()) {
        records.push(EdgeRecord {
            id: EdgeId(next),
            geometry: line.clone(),
            status: EdgeStatus::New,
            attributes: Attributes::new(),
        });
        next += 1;
    }
    drop_duplicate_edges(&remove_interstitial_nodes(&net.rebuilt(records)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifacts::{detect_artifacts, DetectionParams};
    use crate::classification::classify;
    use crate::continuity::ContinuityParams;
    use crate::faces::polygonize;

    fn l(pts: &[(f64, f64)]) -> Vec<Coord> {
        pts.iter().map(|&(x, y)| Coord::new(x, y)).collect()
    }

    fn run(net: &Network) -> (Network, Vec<Edit>, Vec<Warning>) {
        let faces = polygonize(net).unwrap();
        let det = detect_artifacts(
            &faces,
            &DetectionParams {
                threshold: Some(f64::INFINITY),
                ..Default::default()
            },
        )
        .unwrap();
        let strokes = StrokeSet::detect(net, &ContinuityParams::default());
        let groups = classify(net, &faces, &det, &strokes);
        let (edits, warnings) = plan_edits(net, &faces, &groups, &strokes, &SkeletonParams::default());
        let edits: Vec<Edit> = edits.into_iter().map(|(_, e)| e).collect();
        (apply_edits(net, &edits), edits, warnings)
    }

    fn circle(cx: f64, cy: f64, r: f64, n: usize, from: f64, to: f64) -> Vec<Coord> {
        (0..=n)
            .map(|i| {
                let a = from + (to - from) * i as f64 / n as f64;
                Coord::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect()
    }

    #[test]
    fn roundabout_collapses_to_centre() {
        use std::f64::consts::FRAC_PI_2;
        let mut lines = Vec::new();
        for q in 0..4 {
            let a0 = q as f64 * FRAC_PI_2;
            lines.push(circle(0.0, 0.0, 15.0, 8, a0, a0 + FRAC_PI_2));
            let (c, s) = (a0.cos(), a0.sin());
            lines.push(l(&[(15.0 * c, 15.0 * s), (100.0 * c, 100.0 * s)]));
        }
        let (out, edits, warnings) = run(&Network::from_lines(lines));
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(edits[0].rules, vec![Rule::CentroidCollapse]);
        let hub = out.nodes().iter().find(|n| n.degree == 4).expect("hub");
        assert!(hub.coord.dist(Coord::new(0.0, 0.0)) < 5.0);
        assert_eq!(out.edge_count(), 4);
        assert!(out.edges().iter().all(|e| e.status == EdgeStatus::Extended));
    }

    #[test]
    fn triangle_keeps_continuous_base() {
        let net = Network::from_lines(vec![
            l(&[(-50.0, 0.0), (0.0, 0.0)]),
            l(&[(0.0, 0.0), (20.0, 0.0)]),
            l(&[(20.0, 0.0), (70.0, 0.0)]),
            l(&[(20.0, 0.0), (10.0, 15.0)]),
            l(&[(10.0, 15.0), (0.0, 0.0)]),
            l(&[(10.0, 15.0), (0.0, 30.0)]),
        ]);
        let (out, edits, warnings) = run(&net);
        assert!(warnings.is_empty());
        assert_eq!(edits[0].rules, vec![Rule::KeepContinuous]);
        assert_eq!(edits[0].removed.len(), 2);
        // base intact, apex linked straight down onto it
        let foot = out.node_at(Coord::new(10.0, 0.0)).expect("split point");
        assert_eq!(out.node(foot).degree, 3);
        assert!(out.edges().iter().any(|e| e.status == EdgeStatus::Extended));
        assert!(crate::faces::polygonize(&out).unwrap().is_empty());
    }

    #[test]
    fn cul_de_sac_stub() {
        let mut ring = vec![Coord::new(0.0, 0.0)];
        ring.extend(
            circle(
                0.0,
                10.0,
                10.0,
                24,
                -std::f64::consts::FRAC_PI_2,
                1.5 * std::f64::consts::PI,
            )
            .into_iter()
            .skip(1),
        );
        *ring.last_mut().unwrap() = Coord::new(0.0, 0.0);
        let net = Network::from_lines(vec![l(&[(0.0, -40.0), (0.0, 0.0)]), ring]);
        let (out, edits, _) = run(&net);
        assert_eq!(edits[0].rules, vec![Rule::DeadEndStub]);
        assert_eq!(out.edge_count(), 1);
        let e = &out.edges()[0];
        assert!((e.length() - 60.0).abs() < 1e-6, "{}", e.length());
        assert_eq!(e.status, EdgeStatus::Extended);
    }

    #[test]
    fn elongated_without_continuity_gets_skeleton() {
        // 100×10 box fed from both short sides, approaches at right angles
        // so no stroke runs along the box
        let net = Network::from_lines(vec![
            l(&[(0.0, 0.0), (100.0, 0.0)]),
            l(&[(100.0, 0.0), (100.0, 5.0)]),
            l(&[(100.0, 5.0), (100.0, 10.0)]),
            l(&[(100.0, 10.0), (0.0, 10.0)]),
            l(&[(0.0, 10.0), (0.0, 5.0)]),
            l(&[(0.0, 5.0), (0.0, 0.0)]),
            l(&[(0.0, 5.0), (-1.0, 50.0)]),
            l(&[(100.0, 5.0), (101.0, 50.0)]),
        ]);
        let (out, edits, warnings) = run(&net);
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(edits[0].rules, vec![Rule::Skeleton]);
        assert!(crate::faces::polygonize(&out).unwrap().is_empty());
        let new_len: f64 = edits[0].added.iter().map(|g| crate::geom::polyline_length(g)).sum();
        assert!((new_len - 100.0).abs() < 2.0, "{new_len}");
    }

    #[test]
    fn conflicts() {
        let a = Edit {
            removed: [EdgeId(1)].into(),
            ..Default::default()
        };
        let b = Edit {
            splits: vec![(EdgeId(1), Coord::new(0.0, 0.0))],
            ..Default::default()
        };
        let c = Edit {
            removed: [EdgeId(2)].into(),
            ..Default::default()
        };
        assert!(a.conflicts_with(&b));
        assert!(b.conflicts_with(&a));
        assert!(!a.conflicts_with(&c));
    }
}
