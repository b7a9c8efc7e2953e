//! Synthetic corpus of typical simplification situations, each with a
//! hand-drawn goal network and structural goal predicates.
//!
//! Coordinates are metres; every case is centred near the origin.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Coord, Region};
use crate::network::{Network, NodeId};

pub const FIXTURE_NAMES: [&str; 19] = [
    "Parallel edges",
    "Roundabouts",
    "Diverging streets",
    "T-junction",
    "Simple intersection",
    "A cross-shaped intersection",
    "Intersection",
    "Side edges",
    "Cul-de-sac",
    "Ovalabout",
    "Cloverleaf interchange",
    "Multi-level carriageway",
    "Special case roundabouts",
    "Parallel edges connected with a linking edge",
    "Outliers",
    "Parallel edges leading to different levels",
    "Roundabout with edges on different levels",
    "Partial cloverleaf interchange",
    "Complicated freeway intersection",
];

/// Cases with no single correct answer or that need level information;
/// only connectivity is checked for them.
pub const UNGATED: [&str; 3] = [
    "Multi-level carriageway",
    "Roundabout with edges on different levels",
    "Complicated freeway intersection",
];

/// Radius within which a predicate point matches a network node.
const NODE_MATCH_RADIUS: f64 = 1.0;

/// Exactly one node of `degree` within `radius` of `near`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HubPredicate {
    pub near: Coord,
    pub degree: usize,
    pub radius: f64,
}

/// Shortest-path length between two nodes, within an absolute tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPredicate {
    pub from: Coord,
    pub to: Coord,
    pub length: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GoalPredicates {
    pub node_count: Option<usize>,
    pub edge_count: Option<usize>,
    pub degree_histogram: Option<BTreeMap<usize, usize>>,
    /// Node pairs that must stay in one connected component.
    pub connected: Vec<(Coord, Coord)>,
    pub hub: Option<HubPredicate>,
    pub path: Option<PathPredicate>,
}

pub fn degree_histogram(net: &Network) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for n in net.nodes() {
        *h.entry(n.degree).or_insert(0) += 1;
    }
    h
}

fn nearest_node(net: &Network, p: Coord) -> Option<NodeId> {
    net.nodes()
        .iter()
        .filter(|n| n.coord.dist(p) <= NODE_MATCH_RADIUS)
        .min_by(|a, b| a.coord.dist(p).total_cmp(&b.coord.dist(p)))
        .map(|n| n.id)
}

fn node_adjacency(net: &Network) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); net.node_count()];
    for e in net.edges() {
        let (a, b) = (e.endpoints.0 .0, e.endpoints.1 .0);
        adj[a].push((b, e.length()));
        adj[b].push((a, e.length()));
    }
    adj
}

/// Dijkstra distance between the nodes nearest `a` and `b`.
pub fn shortest_path_length(net: &Network, a: Coord, b: Coord) -> Option<f64> {
    let (s, t) = (nearest_node(net, a)?, nearest_node(net, b)?);
    let adj = node_adjacency(net);
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = std::collections::BinaryHeap::new();
    dist[s.0] = 0.0;
    heap.push(std::cmp::Reverse((OrdF64(0.0), s.0)));
    while let Some(std::cmp::Reverse((OrdF64(d), u))) = heap.pop() {
        if u == t.0 {
            return Some(d);
        }
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            if d + w < dist[v] {
                dist[v] = d + w;
                heap.push(std::cmp::Reverse((OrdF64(d + w), v)));
            }
        }
    }
    None
}

#[derive(PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl GoalPredicates {
    /// Failed predicates, described; empty when all hold.
    pub fn check(&self, net: &Network) -> Vec<String> {
        let mut fails = Vec::new();
        if let Some(n) = self.node_count {
            if net.node_count() != n {
                fails.push(format!("node count {} != {n}", net.node_count()));
            }
        }
        if let Some(n) = self.edge_count {
            if net.edge_count() != n {
                fails.push(format!("edge count {} != {n}", net.edge_count()));
            }
        }
        if let Some(h) = &self.degree_histogram {
            let got = degree_histogram(net);
            if &got != h {
                fails.push(format!("degree histogram {got:?} != {h:?}"));
            }
        }
        for &(a, b) in &self.connected {
            if shortest_path_length(net, a, b).is_none() {
                fails.push(format!("({}, {}) and ({}, {}) not connected", a.x, a.y, b.x, b.y));
            }
        }
        if let Some(hub) = &self.hub {
            let n = net
                .nodes()
                .iter()
                .filter(|n| n.degree == hub.degree && n.coord.dist(hub.near) <= hub.radius)
                .count();
            if n != 1 {
                fails.push(format!(
                    "{n} nodes of degree {} within {} m of ({}, {})",
                    hub.degree, hub.radius, hub.near.x, hub.near.y
                ));
            }
        }
        if let Some(p) = &self.path {
            match shortest_path_length(net, p.from, p.to) {
                Some(l) if (l - p.length).abs() <= p.tolerance => {}
                other => fails.push(format!(
                    "path length {other:?}, expected {} ± {}",
                    p.length, p.tolerance
                )),
            }
        }
        fails
    }
}

#[derive(Debug, Clone)]
pub struct FixtureCase {
    pub name: &'static str,
    pub input: Network,
    pub goal: Network,
    /// Exclusion mask shipped with the case (buildings and similar).
    pub mask: Vec<Region>,
    pub predicates: GoalPredicates,
    /// Whether the case takes part in pass/fail gating.
    pub gated: bool,
}

impl FixtureCase {
    pub fn slug(&self) -> String {
        slug(self.name)
    }
}

pub fn slug(name: &str) -> String {
    let mut s = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('-') {
            s.push('-');
        }
    }
    s.trim_matches('-').to_owned()
}

fn c(x: f64, y: f64) -> Coord {
    Coord::new(x, y)
}

fn seg(a: (f64, f64), b: (f64, f64)) -> Vec<Coord> {
    vec![c(a.0, a.1), c(b.0, b.1)]
}

fn path(points: &[(f64, f64)]) -> Vec<Coord> {
    points.iter().map(|&(x, y)| c(x, y)).collect()
}

/// Elliptical arc from angle `a0` to `a1` (radians), `n` segments.
fn arc(center: Coord, rx: f64, ry: f64, a0: f64, a1: f64, n: usize) -> Vec<Coord> {
    (0..=n)
        .map(|i| {
            let t = a0 + (a1 - a0) * i as f64 / n as f64;
            // pin the cardinal points so arcs meet approaches exactly
            let (s, co) = t.sin_cos();
            let snap = |v: f64| {
                if v.abs() < 1e-12 {
                    0.0
                } else if (v.abs() - 1.0).abs() < 1e-12 {
                    v.signum()
                } else {
                    v
                }
            };
            c(center.x + rx * snap(co), center.y + ry * snap(s))
        })
        .collect()
}

/// Ring split into four arcs at the axis points, plus radial approaches.
fn ring_with_approaches(rx: f64, ry: f64, approach: f64, arms: [bool; 4]) -> Vec<Vec<Coord>> {
    let o = c(0.0, 0.0);
    let mut lines: Vec<Vec<Coord>> = (0..4)
        .map(|q| arc(o, rx, ry, q as f64 * PI / 2.0, (q + 1) as f64 * PI / 2.0, 8))
        .collect();
    let ends = [
        (rx, 0.0, 1.0, 0.0),
        (0.0, ry, 0.0, 1.0),
        (-rx, 0.0, -1.0, 0.0),
        (0.0, -ry, 0.0, -1.0),
    ];
    for (k, &(x, y, dx, dy)) in ends.iter().enumerate() {
        if arms[k] {
            lines.push(seg((x, y), (x + dx * approach, y + dy * approach)));
        }
    }
    lines
}

fn cross(half: f64) -> Vec<Vec<Coord>> {
    vec![
        seg((-half, 0.0), (0.0, 0.0)),
        seg((0.0, 0.0), (half, 0.0)),
        seg((0.0, -half), (0.0, 0.0)),
        seg((0.0, 0.0), (0.0, half)),
    ]
}

fn tee(half: f64) -> Vec<Vec<Coord>> {
    vec![
        seg((-half, 0.0), (0.0, 0.0)),
        seg((0.0, 0.0), (half, 0.0)),
        seg((0.0, -half), (0.0, 0.0)),
    ]
}

fn hist(pairs: &[(usize, usize)]) -> Option<BTreeMap<usize, usize>> {
    Some(pairs.iter().copied().collect())
}

fn all_pairs(points: &[(f64, f64)]) -> Vec<(Coord, Coord)> {
    points
        .windows(2)
        .map(|w| (c(w[0].0, w[0].1), c(w[1].0, w[1].1)))
        .collect()
}

fn counts(nodes: usize, edges: usize, h: &[(usize, usize)], terminals: &[(f64, f64)]) -> GoalPredicates {
    GoalPredicates {
        node_count: Some(nodes),
        edge_count: Some(edges),
        degree_histogram: hist(h),
        connected: all_pairs(terminals),
        ..Default::default()
    }
}

/// Dual carriageway: two lanes 10 m apart from x = 0 to `len`, meeting at
/// single nodes at both ends, split at the given x positions.
fn dual_lanes(len: f64, splits: &[f64]) -> Vec<Vec<Coord>> {
    let mut lines = Vec::new();
    for side in [1.0, -1.0] {
        let mut xs = vec![10.0];
        xs.extend_from_slice(splits);
        xs.push(len - 10.0);
        let mut pts = vec![(0.0, 0.0)];
        let mut cur = Vec::new();
        for (i, &x) in xs.iter().enumerate() {
            pts.push((x, 5.0 * side));
            if i > 0 && i < xs.len() - 1 {
                cur.push(path(&pts));
                pts = vec![(x, 5.0 * side)];
            }
        }
        pts.push((len, 0.0));
        cur.push(path(&pts));
        lines.extend(cur);
    }
    lines
}

fn quarter_leaf(sx: f64, sy: f64, r: f64) -> Vec<Coord> {
    // 270° loop through (sx r, 0) and (0, sy r), bulging away from the origin
    let center = c(sx * r, sy * r);
    let start = (-sy).atan2(0.0);
    arc(center, r, r, start, start + sx * sy * 1.5 * PI, 24)
}

pub fn generate(name: &str) -> Result<FixtureCase> {
    let wanted = slug(name);
    let name = FIXTURE_NAMES
        .iter()
        .copied()
        .find(|n| slug(n) == wanted)
        .ok_or_else(|| Error::UnknownFixture(name.to_owned()))?;
    let mut mask = Vec::new();
    let (input, goal, predicates): (Vec<Vec<Coord>>, Vec<Vec<Coord>>, GoalPredicates) = match name {
        "Parallel edges" => {
            let mut input = dual_lanes(500.0, &[250.0]);
            input.push(seg((-100.0, 0.0), (0.0, 0.0)));
            input.push(seg((500.0, 0.0), (600.0, 0.0)));
            input.push(seg((250.0, 5.0), (250.0, 100.0)));
            input.push(seg((250.0, -5.0), (250.0, -100.0)));
            let goal = vec![
                seg((-100.0, 0.0), (250.0, 0.0)),
                seg((250.0, 0.0), (600.0, 0.0)),
                seg((250.0, 0.0), (250.0, 100.0)),
                seg((250.0, 0.0), (250.0, -100.0)),
            ];
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(-100.0, 0.0), (600.0, 0.0), (250.0, 100.0), (250.0, -100.0)],
            );
            p.path = Some(PathPredicate {
                from: c(-100.0, 0.0),
                to: c(600.0, 0.0),
                length: 700.0,
                tolerance: 10.0,
            });
            (input, goal, p)
        }
        "Roundabouts" => {
            let input = ring_with_approaches(15.0, 15.0, 100.0, [true; 4]);
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(115.0, 0.0), (0.0, 115.0), (-115.0, 0.0), (0.0, -115.0)],
            );
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 4,
                radius: 5.0,
            });
            (input, cross(115.0), p)
        }
        "Diverging streets" => {
            let mut input = Vec::new();
            for s in [-1.0, 1.0] {
                input.push(seg((s * 200.0, 0.0), (s * 30.0, 0.0)));
                input.push(seg((s * 30.0, 0.0), (0.0, 0.0)));
                input.push(seg((0.0, s * 200.0), (0.0, s * 30.0)));
                input.push(seg((0.0, s * 30.0), (0.0, 0.0)));
                input.push(seg((s * 30.0, 0.0), (0.0, s * 30.0)));
            }
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(-200.0, 0.0), (200.0, 0.0), (0.0, -200.0), (0.0, 200.0)],
            );
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 4,
                radius: 5.0,
            });
            (input, cross(200.0), p)
        }
        "T-junction" => {
            let input = vec![
                seg((-200.0, 0.0), (-15.0, 0.0)),
                seg((-15.0, 0.0), (15.0, 0.0)),
                seg((15.0, 0.0), (200.0, 0.0)),
                seg((0.0, -200.0), (0.0, -40.0)),
                seg((0.0, -40.0), (-15.0, 0.0)),
                seg((0.0, -40.0), (15.0, 0.0)),
            ];
            let mut p = counts(4, 3, &[(1, 3), (3, 1)], &[(-200.0, 0.0), (200.0, 0.0), (0.0, -200.0)]);
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 3,
                radius: 5.0,
            });
            (input, tee(200.0), p)
        }
        "Simple intersection" => {
            // two dual carriageways crossing; lanes 10 m apart converge 60 m out
            let mut input = Vec::new();
            for (ax, ay) in [(1.0, 0.0), (0.0, 1.0)] {
                let rot = |x: f64, y: f64| (x * ax - y * ay, x * ay + y * ax);
                for s in [-1.0, 1.0] {
                    let lane = |x0: f64, x1: f64| -> Vec<Coord> {
                        let (a, b) = (rot(x0, s * 5.0), rot(x1, s * 5.0));
                        seg(a, b)
                    };
                    // lane pieces between the four crossing points
                    input.push(lane(-5.0, 5.0));
                    for d in [-1.0, 1.0] {
                        let (p, q, r) = (rot(d * 5.0, s * 5.0), rot(d * 60.0, s * 5.0), rot(d * 70.0, 0.0));
                        input.push(path(&[p, q, r]));
                    }
                }
                for d in [-1.0, 1.0] {
                    input.push(seg(rot(d * 70.0, 0.0), rot(d * 200.0, 0.0)));
                }
            }
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(-200.0, 0.0), (200.0, 0.0), (0.0, -200.0), (0.0, 200.0)],
            );
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 4,
                radius: 5.0,
            });
            (input, cross(200.0), p)
        }
        "A cross-shaped intersection" => {
            // branches opposite each other meet at well under the join angle,
            // so no stroke runs straight through the pair of triangles
            let mut input = vec![
                seg((-200.0, 0.0), (-20.0, 0.0)),
                seg((-20.0, 0.0), (20.0, 0.0)),
                seg((20.0, 0.0), (200.0, 0.0)),
            ];
            for s in [-1.0, 1.0] {
                input.push(seg((0.0, s * 200.0), (0.0, s * 25.0)));
                input.push(seg((0.0, s * 25.0), (-20.0, 0.0)));
                input.push(seg((0.0, s * 25.0), (20.0, 0.0)));
            }
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(-200.0, 0.0), (200.0, 0.0), (0.0, -200.0), (0.0, 200.0)],
            );
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 4,
                radius: 5.0,
            });
            (input, cross(200.0), p)
        }
        "Intersection" => {
            // four streets stop short of each other on an irregular loop
            let q = [(9.0, 1.0), (-1.0, 8.0), (-8.0, -2.0), (2.0, -7.0)];
            let mut input: Vec<Vec<Coord>> = (0..4).map(|i| path(&[q[i], q[(i + 1) % 4]])).collect();
            input.push(seg(q[0], (200.0, 1.0)));
            input.push(seg(q[1], (-1.0, 200.0)));
            input.push(seg(q[2], (-200.0, -2.0)));
            input.push(seg(q[3], (2.0, -200.0)));
            let goal = vec![
                seg((0.0, 0.0), (200.0, 1.0)),
                seg((0.0, 0.0), (-1.0, 200.0)),
                seg((0.0, 0.0), (-200.0, -2.0)),
                seg((0.0, 0.0), (2.0, -200.0)),
            ];
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(200.0, 1.0), (-1.0, 200.0), (-200.0, -2.0), (2.0, -200.0)],
            );
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 4,
                radius: 5.0,
            });
            (input, goal, p)
        }
        "Side edges" => {
            let input = vec![
                seg((-200.0, 0.0), (-40.0, 0.0)),
                seg((-40.0, 0.0), (40.0, 0.0)),
                seg((40.0, 0.0), (200.0, 0.0)),
                path(&[(-40.0, 0.0), (-30.0, 12.0), (30.0, 12.0), (40.0, 0.0)]),
            ];
            (
                input,
                vec![seg((-200.0, 0.0), (200.0, 0.0))],
                counts(2, 1, &[(1, 2)], &[(-200.0, 0.0), (200.0, 0.0)]),
            )
        }
        "Cul-de-sac" => {
            let ring = arc(c(0.0, 12.0), 12.0, 12.0, -PI / 2.0, 1.5 * PI, 24);
            let input = vec![seg((0.0, -100.0), (0.0, 0.0)), ring];
            let mut p = counts(2, 1, &[(1, 2)], &[(0.0, -100.0), (0.0, 24.0)]);
            p.path = Some(PathPredicate {
                from: c(0.0, -100.0),
                to: c(0.0, 24.0),
                length: 124.0,
                tolerance: 1.0,
            });
            (input, vec![seg((0.0, -100.0), (0.0, 24.0))], p)
        }
        "Ovalabout" => {
            let input = ring_with_approaches(30.0, 12.0, 100.0, [true; 4]);
            let goal = vec![
                seg((-130.0, 0.0), (0.0, 0.0)),
                seg((0.0, 0.0), (130.0, 0.0)),
                seg((0.0, -112.0), (0.0, 0.0)),
                seg((0.0, 0.0), (0.0, 112.0)),
            ];
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(130.0, 0.0), (0.0, 112.0), (-130.0, 0.0), (0.0, -112.0)],
            );
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 4,
                radius: 5.0,
            });
            (input, goal, p)
        }
        "Cloverleaf interchange" => {
            let mut input = Vec::new();
            for s in [-1.0, 1.0] {
                input.push(seg((s * 200.0, 0.0), (s * 20.0, 0.0)));
                input.push(seg((s * 20.0, 0.0), (0.0, 0.0)));
                input.push(seg((0.0, s * 200.0), (0.0, s * 20.0)));
                input.push(seg((0.0, s * 20.0), (0.0, 0.0)));
                for t in [-1.0, 1.0] {
                    input.push(quarter_leaf(s, t, 20.0));
                }
            }
            let mut p = counts(
                5,
                4,
                &[(1, 4), (4, 1)],
                &[(-200.0, 0.0), (200.0, 0.0), (0.0, -200.0), (0.0, 200.0)],
            );
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 4,
                radius: 5.0,
            });
            (input, cross(200.0), p)
        }
        "Multi-level carriageway" => {
            let mut input = dual_lanes(300.0, &[]);
            input.push(seg((-100.0, 0.0), (0.0, 0.0)));
            input.push(seg((300.0, 0.0), (400.0, 0.0)));
            // overpass, not noded with the lanes it crosses
            input.push(seg((150.0, -100.0), (150.0, 100.0)));
            let goal = vec![seg((-100.0, 0.0), (400.0, 0.0)), seg((150.0, -100.0), (150.0, 100.0))];
            let p = GoalPredicates {
                connected: vec![(c(-100.0, 0.0), c(400.0, 0.0)), (c(150.0, -100.0), c(150.0, 100.0))],
                ..Default::default()
            };
            (input, goal, p)
        }
        "Special case roundabouts" => {
            let input = ring_with_approaches(20.0, 20.0, 100.0, [true; 4]);
            mask.push(Region::rect(c(-6.0, -6.0), c(6.0, 6.0)));
            let p = counts(
                8,
                8,
                &[(1, 4), (3, 4)],
                &[(120.0, 0.0), (0.0, 120.0), (-120.0, 0.0), (0.0, -120.0)],
            );
            (input.clone(), input, p)
        }
        "Parallel edges connected with a linking edge" => {
            let mut input = dual_lanes(500.0, &[250.0]);
            input.push(seg((-100.0, 0.0), (0.0, 0.0)));
            input.push(seg((500.0, 0.0), (600.0, 0.0)));
            input.push(seg((250.0, -5.0), (250.0, 5.0)));
            let mut p = counts(2, 1, &[(1, 2)], &[(-100.0, 0.0), (600.0, 0.0)]);
            p.path = Some(PathPredicate {
                from: c(-100.0, 0.0),
                to: c(600.0, 0.0),
                length: 700.0,
                tolerance: 10.0,
            });
            (input, vec![seg((-100.0, 0.0), (600.0, 0.0))], p)
        }
        "Outliers" => {
            let input = vec![
                seg((-200.0, 0.0), (-10.0, 0.0)),
                seg((-10.0, 0.0), (10.0, 0.0)),
                seg((10.0, 0.0), (50.0, 0.0)),
                seg((50.0, 0.0), (70.0, 0.0)),
                seg((70.0, 0.0), (200.0, 0.0)),
                // spurious detours digitised next to the street
                path(&[(-10.0, 0.0), (0.0, 6.0), (10.0, 0.0)]),
                path(&[(50.0, 0.0), (55.0, -3.0), (65.0, -3.0), (70.0, 0.0)]),
            ];
            (
                input,
                vec![seg((-200.0, 0.0), (200.0, 0.0))],
                counts(2, 1, &[(1, 2)], &[(-200.0, 0.0), (200.0, 0.0)]),
            )
        }
        "Parallel edges leading to different levels" => {
            let mut input = dual_lanes(300.0, &[50.0]);
            input.push(seg((-100.0, 0.0), (0.0, 0.0)));
            input.push(seg((300.0, 0.0), (400.0, 0.0)));
            // ramp leaving the upper lane towards a bridge
            input.push(path(&[(50.0, 5.0), (100.0, 15.0), (250.0, 15.0), (300.0, 150.0)]));
            let goal = vec![
                seg((-100.0, 0.0), (50.0, 0.0)),
                seg((50.0, 0.0), (400.0, 0.0)),
                path(&[(50.0, 0.0), (100.0, 15.0), (250.0, 15.0), (300.0, 150.0)]),
            ];
            let p = counts(4, 3, &[(1, 3), (3, 1)], &[(-100.0, 0.0), (400.0, 0.0), (300.0, 150.0)]);
            (input, goal, p)
        }
        "Roundabout with edges on different levels" => {
            let mut input = ring_with_approaches(20.0, 20.0, 100.0, [true, true, true, false]);
            // through road passing over the ring without touching it
            input.push(seg((-120.0, -30.0), (120.0, 10.0)));
            let goal = vec![
                seg((0.0, 0.0), (120.0, 0.0)),
                seg((0.0, 0.0), (0.0, 120.0)),
                seg((0.0, 0.0), (-120.0, 0.0)),
                seg((-120.0, -30.0), (120.0, 10.0)),
            ];
            let p = GoalPredicates {
                connected: vec![
                    (c(120.0, 0.0), c(0.0, 120.0)),
                    (c(0.0, 120.0), c(-120.0, 0.0)),
                    (c(-120.0, -30.0), c(120.0, 10.0)),
                ],
                ..Default::default()
            };
            (input, goal, p)
        }
        "Partial cloverleaf interchange" => {
            let mut input = vec![
                seg((-200.0, 0.0), (-20.0, 0.0)),
                seg((-20.0, 0.0), (0.0, 0.0)),
                seg((0.0, 0.0), (20.0, 0.0)),
                seg((20.0, 0.0), (200.0, 0.0)),
                seg((0.0, -200.0), (0.0, -20.0)),
                seg((0.0, -20.0), (0.0, 0.0)),
            ];
            for s in [-1.0, 1.0] {
                input.push(quarter_leaf(s, -1.0, 20.0));
            }
            let mut p = counts(4, 3, &[(1, 3), (3, 1)], &[(-200.0, 0.0), (200.0, 0.0), (0.0, -200.0)]);
            p.hub = Some(HubPredicate {
                near: c(0.0, 0.0),
                degree: 3,
                radius: 5.0,
            });
            (input, tee(200.0), p)
        }
        "Complicated freeway intersection" => {
            let mut input = dual_lanes(400.0, &[150.0, 250.0]);
            input.push(seg((-100.0, 0.0), (0.0, 0.0)));
            input.push(seg((400.0, 0.0), (500.0, 0.0)));
            // crossing road on a bridge, joined to the lanes by ramps
            input.push(seg((200.0, -150.0), (200.0, -60.0)));
            input.push(seg((200.0, -60.0), (200.0, 60.0)));
            input.push(seg((200.0, 60.0), (200.0, 150.0)));
            input.push(path(&[(200.0, -60.0), (170.0, -30.0), (150.0, -5.0)]));
            input.push(path(&[(200.0, 60.0), (230.0, 30.0), (250.0, 5.0)]));
            input.push(path(&[(150.0, 5.0), (170.0, 30.0), (200.0, 60.0)]));
            let goal = vec![
                seg((-100.0, 0.0), (200.0, 0.0)),
                seg((200.0, 0.0), (500.0, 0.0)),
                seg((200.0, -150.0), (200.0, 0.0)),
                seg((200.0, 0.0), (200.0, 150.0)),
            ];
            let p = GoalPredicates {
                connected: all_pairs(&[(-100.0, 0.0), (500.0, 0.0), (200.0, -150.0), (200.0, 150.0)]),
                ..Default::default()
            };
            (input, goal, p)
        }
        _ => unreachable!("every fixture name has a generator"),
    };
    Ok(FixtureCase {
        name,
        input: Network::from_lines(input),
        goal: Network::from_lines(goal),
        mask,
        predicates,
        gated: !UNGATED.contains(&name),
    })
}

pub fn all_fixtures() -> Vec<FixtureCase> {
    FIXTURE_NAMES
        .iter()
        .map(|n| generate(n).expect("known fixture"))
        .collect()
}

/// Street grid of `n` × `n` blocks (120 m) with roundabouts at some
/// intersections, side edges along some streets and slip roads cutting
/// some corners. Roughly `2n²` edges plus the extras.
pub fn synthetic_city(n: usize) -> Network {
    const BLOCK: f64 = 120.0;
    const RING: f64 = 12.0;
    let n = n as i64;
    let roundabout = |i: i64, j: i64| i > 0 && j > 0 && i < n && j < n && (i + 2 * j) % 7 == 0;
    let node = |i: i64, j: i64| c(i as f64 * BLOCK, j as f64 * BLOCK);
    let mut lines = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let o = node(i, j);
            if roundabout(i, j) {
                for q in 0..4 {
                    let a = q as f64 * PI / 2.0;
                    lines.push(arc(o, RING, RING, a, a + PI / 2.0, 8));
                }
            }
            // street towards +x (dir 0) and +y (dir 1)
            for dir in 0..2 {
                let (ni, nj) = if dir == 0 { (i + 1, j) } else { (i, j + 1) };
                if ni > n || nj > n {
                    continue;
                }
                let unit = if dir == 0 { c(1.0, 0.0) } else { c(0.0, 1.0) };
                let normal = c(-unit.y, unit.x);
                let start = if roundabout(i, j) { o + unit * RING } else { o };
                let end = if roundabout(ni, nj) {
                    node(ni, nj) - unit * RING
                } else {
                    node(ni, nj)
                };
                if (3 * i + 5 * j + dir) % 11 == 0 {
                    let (a, b) = (o + unit * 30.0, o + unit * 90.0);
                    lines.push(vec![start, a]);
                    lines.push(vec![a, b]);
                    lines.push(vec![b, end]);
                    lines.push(vec![
                        a,
                        a + unit * 10.0 + normal * 8.0,
                        b - unit * 10.0 + normal * 8.0,
                        b,
                    ]);
                } else {
                    lines.push(vec![start, end]);
                }
            }
            // slip road across the north-east corner of some plain intersections
            if !roundabout(i, j) && i < n && j < n && (5 * i + 3 * j) % 13 == 0 && (3 * i + 5 * j) % 11 != 0 {
                let (a, b) = (o + c(25.0, 0.0), o + c(0.0, 25.0));
                // split the two streets at the slip road ends
                let east = lines
                    .iter()
                    .rposition(|l: &Vec<Coord>| l.len() == 2 && l[0] == o && l[1].y == o.y);
                let north = lines
                    .iter()
                    .rposition(|l: &Vec<Coord>| l.len() == 2 && l[0] == o && l[1].x == o.x);
                if let (Some(e), Some(nn)) = (east, north) {
                    let (e_end, n_end) = (lines[e][1], lines[nn][1]);
                    lines[e] = vec![o, a];
                    lines[nn] = vec![o, b];
                    lines.push(vec![a, e_end]);
                    lines.push(vec![b, n_end]);
                    lines.push(vec![a, b]);
                }
            }
        }
    }
    Network::from_lines(lines)
}
