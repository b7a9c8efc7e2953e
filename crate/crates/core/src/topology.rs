//! Topology verification and repair.
//!
//! A clean network has: a node wherever an edge ends on another edge,
//! no degree-2 nodes, no duplicated geometries, and no two nodes within the
//! consolidation tolerance of each other.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clustering::average_linkage_clusters;
use crate::geom::{dedup_consecutive, locate_on_polyline, Bbox, Coord, LineLocation};
use crate::network::{canonical_geometry, Attributes, EdgeRecord, EdgeStatus, End, Network, NodeId};

/// Node consolidation settings. Linkage is always average linkage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationParams {
    pub tolerance: f64,
}

impl Default for ConsolidationParams {
    fn default() -> Self {
        ConsolidationParams { tolerance: 2.0 }
    }
}

/// An edge endpoint lying on the interior of an edge without a node there.
#[derive(Debug, Clone, Copy)]
pub struct Touch {
    /// Index of the edge whose endpoint touches.
    pub edge: usize,
    pub end: End,
    /// Index of the touched edge.
    pub touched: usize,
    pub location: LineLocation,
}

/// Every endpoint-on-interior touch in the network.
pub fn endpoint_touches(net: &Network) -> Vec<Touch> {
    let eps = net.snap_epsilon();
    let mut out = Vec::new();
    for node in net.nodes() {
        let c = node.coord;
        let probe = Bbox::of([c]).buffered(eps);
        for cand in net.query(probe) {
            let e = &net.edges()[cand];
            let n = e.geometry.len();
            let starts_here = e.endpoints.0 == node.id;
            let ends_here = e.endpoints.1 == node.id;
            // segments adjacent to this node cannot carry an interior touch
            let lo = usize::from(starts_here);
            let hi = if ends_here { n - 2 } else { n - 1 };
            if lo >= hi {
                continue;
            }
            let loc = locate_on_polyline(c, &e.geometry[lo..=hi]);
            if loc.distance > eps {
                continue;
            }
            let loc = LineLocation {
                segment: loc.segment + lo,
                ..loc
            };
            let first = e.geometry[0];
            let last = e.geometry[n - 1];
            if loc.point.dist(first) <= eps && (lo == 0 || loc.position() <= lo as f64) {
                continue;
            }
            if loc.point.dist(last) <= eps && (hi == n - 1 || loc.position() >= hi as f64) {
                continue;
            }
            if !starts_here && loc.point.dist(first) <= eps {
                continue;
            }
            if !ends_here && loc.point.dist(last) <= eps {
                continue;
            }
            let (ei, end) = net.incident(node.id)[0];
            out.push(Touch {
                edge: ei,
                end,
                touched: cand,
                location: loc,
            });
        }
    }
    out
}

/// Splits a polyline at the given locations, inserting the exact cut
/// coordinates. Cuts at the polyline ends are ignored.
pub(crate) fn split_polyline(line: &[Coord], cuts: &[(LineLocation, Coord)], eps: f64) -> Vec<Vec<Coord>> {
    let n = line.len();
    // normalise to (vertex-or-segment position, coord)
    let mut norm: Vec<(usize, bool, f64, Coord)> = Vec::new(); // (index, at_vertex, t, coord)
    for &(loc, c) in cuts {
        let a = line[loc.segment];
        let b = line[loc.segment + 1];
        if loc.point.dist(a) <= eps || loc.t <= 0.0 {
            norm.push((loc.segment, true, 0.0, c));
        } else if loc.point.dist(b) <= eps || loc.t >= 1.0 {
            norm.push((loc.segment + 1, true, 0.0, c));
        } else {
            norm.push((loc.segment, false, loc.t, c));
        }
    }
    norm.retain(|&(i, at_vertex, _, _)| !(at_vertex && (i == 0 || i == n - 1)));
    norm.sort_by(|a, b| a.0.cmp(&b.0).then((!a.1).cmp(&!b.1)).then(a.2.total_cmp(&b.2)));
    norm.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1 && (a.1 || a.3.key() == b.3.key()));

    let mut pieces = Vec::new();
    let mut cur = vec![line[0]];
    let mut k = 0;
    for i in 0..n - 1 {
        // cut at vertex i (i > 0)
        while k < norm.len() && norm[k].0 == i && norm[k].1 {
            let c = norm[k].3;
            cur.pop();
            cur.push(c);
            pieces.push(std::mem::replace(&mut cur, vec![c]));
            k += 1;
        }
        while k < norm.len() && norm[k].0 == i && !norm[k].1 {
            let c = norm[k].3;
            cur.push(c);
            pieces.push(std::mem::replace(&mut cur, vec![c]));
            k += 1;
        }
        cur.push(line[i + 1]);
    }
    pieces.push(cur);
    pieces
        .into_iter()
        .map(|mut p| {
            dedup_consecutive(&mut p);
            p
        })
        .filter(|p| p.len() >= 2)
        .collect()
}

/// Splits every edge that another edge ends on. Interior crossings are
/// left alone (possible bridges or tunnels).
pub fn induce_intersection_nodes(net: &Network) -> Network {
    let touches = endpoint_touches(net);
    if touches.is_empty() {
        return net.clone();
    }
    let mut cuts: BTreeMap<usize, Vec<(LineLocation, Coord)>> = BTreeMap::new();
    for t in &touches {
        let c = net.edges()[t.edge].coord_at(t.end);
        cuts.entry(t.touched).or_default().push((t.location, c));
    }
    let mut next_id = net.next_edge_id();
    let mut records = Vec::with_capacity(net.edge_count() + touches.len());
    for (i, e) in net.edges().iter().enumerate() {
        match cuts.get(&i) {
            None => records.push(e.to_record()),
            Some(c) => {
                for (k, piece) in split_polyline(&e.geometry, c, net.snap_epsilon())
                    .into_iter()
                    .enumerate()
                {
                    let id = if k == 0 {
                        e.id
                    } else {
                        next_id += 1;
                        crate::network::EdgeId(next_id - 1)
                    };
                    records.push(EdgeRecord {
                        id,
                        geometry: piece,
                        status: e.status,
                        attributes: e.attributes.clone(),
                    });
                }
            }
        }
    }
    net.rebuilt(records)
}

/// Keeps one edge of every group with identical geometry (either orientation).
pub fn drop_duplicate_edges(net: &Network) -> Network {
    let mut seen = HashSet::new();
    let mut dropped = false;
    let records: Vec<EdgeRecord> = net
        .edges()
        .iter()
        .filter(|e| {
            let fresh = seen.insert(canonical_geometry(&e.geometry));
            dropped |= !fresh;
            fresh
        })
        .map(|e| e.to_record())
        .collect();
    if !dropped {
        return net.clone();
    }
    net.rebuilt(records)
}

/// True for a degree-2 node joining two different edges.
fn is_interstitial(net: &Network, node: NodeId) -> bool {
    let inc = net.incident(node);
    inc.len() == 2 && inc[0].0 != inc[1].0
}

/// Merges the two edges at every degree-2 node. Isolated rings keep one
/// node (their first vertex). Attribute bags of merged edges become lists.
pub fn remove_interstitial_nodes(net: &Network) -> Network {
    if !net.nodes().iter().any(|n| is_interstitial(net, n.id)) {
        return net.clone();
    }
    let edges = net.edges();
    let mut used = vec![false; edges.len()];
    let mut records = Vec::with_capacity(edges.len());

    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        // (edge index, traversed forward)
        let mut chain: VecDeque<(usize, bool)> = VecDeque::from([(start, true)]);
        let mut ring = false;

        // extend past the end node
        loop {
            let (ei, fwd) = *chain.back().unwrap();
            let e = &edges[ei];
            let (node, arrived) = if fwd {
                (e.endpoints.1, End::End)
            } else {
                (e.endpoints.0, End::Start)
            };
            if !is_interstitial(net, node) {
                break;
            }
            let &(next, next_end) = net
                .incident(node)
                .iter()
                .find(|&&(x, end)| !(x == ei && end == arrived))
                .unwrap();
            if next == start {
                ring = true;
                break;
            }
            if used[next] {
                break;
            }
            used[next] = true;
            chain.push_back((next, next_end == End::Start));
        }
        // extend before the start node
        if !ring {
            loop {
                let (ei, fwd) = *chain.front().unwrap();
                let e = &edges[ei];
                let (node, left) = if fwd {
                    (e.endpoints.0, End::Start)
                } else {
                    (e.endpoints.1, End::End)
                };
                if !is_interstitial(net, node) {
                    break;
                }
                let &(prev, prev_end) = net
                    .incident(node)
                    .iter()
                    .find(|&&(x, end)| !(x == ei && end == left))
                    .unwrap();
                if used[prev] {
                    break;
                }
                used[prev] = true;
                // prev must arrive at `node`, so it runs forward iff it ends there
                chain.push_front((prev, prev_end == End::End));
            }
        }

        if chain.len() == 1 {
            records.push(edges[start].to_record());
            continue;
        }
        let mut geometry: Vec<Coord> = Vec::new();
        for &(ei, fwd) in &chain {
            let g = &edges[ei].geometry;
            let it: Box<dyn Iterator<Item = &Coord>> = if fwd {
                Box::new(g.iter())
            } else {
                Box::new(g.iter().rev())
            };
            if geometry.is_empty() {
                geometry.extend(it);
            } else {
                geometry.extend(it.skip(1));
            }
        }
        let members: Vec<usize> = chain.iter().map(|&(i, _)| i).collect();
        records.push(EdgeRecord {
            id: members.iter().map(|&i| edges[i].id).min().unwrap(),
            geometry,
            status: EdgeStatus::combine(members.iter().map(|&i| edges[i].status)),
            attributes: merge_attributes(members.iter().map(|&i| &edges[i].attributes)),
        });
    }
    net.rebuilt(records)
}

/// Concatenates attribute bags key-wise into list values; existing lists
/// are flattened, absent keys skipped.
pub fn merge_attributes<'a>(bags: impl IntoIterator<Item = &'a Attributes>) -> Attributes {
    let mut out: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    for bag in bags {
        for (k, v) in bag {
            let slot = out.entry(k.clone()).or_default();
            match v {
                Value::Array(items) => slot.extend(items.iter().cloned()),
                other => slot.push(other.clone()),
            }
        }
    }
    out.into_iter().map(|(k, v)| (k, Value::Array(v))).collect()
}

/// Merges nodes closer than the tolerance (average linkage), moving edge
/// ends onto the cluster mean, until no pair of nodes is within tolerance.
/// Original edges whose ends move become extended.
pub fn consolidate_nodes(net: &Network, params: &ConsolidationParams) -> Network {
    let mut cur = net.clone();
    // every productive round removes at least one node
    for _ in 0..net.node_count().max(1) {
        let points: Vec<Coord> = cur.nodes().iter().map(|n| n.coord).collect();
        let clusters = average_linkage_clusters(&points, params.tolerance);
        if clusters.iter().all(|c| c.members.len() == 1) {
            break;
        }
        let mut target: Vec<Option<(usize, Coord)>> = vec![None; points.len()];
        for (ci, c) in clusters.iter().enumerate() {
            if c.members.len() > 1 {
                for &m in &c.members {
                    target[m] = Some((ci, c.centroid));
                }
            }
        }
        let mut records = Vec::with_capacity(cur.edge_count());
        for e in cur.edges() {
            let a = target[e.endpoints.0 .0];
            let b = target[e.endpoints.1 .0];
            if a.is_none() && b.is_none() {
                records.push(e.to_record());
                continue;
            }
            let mut g = e.geometry.clone();
            if let Some((_, c)) = a {
                g[0] = c;
            }
            if let Some((_, c)) = b {
                let n = g.len();
                g[n - 1] = c;
            }
            if let (Some((ca, c)), Some((cb, _))) = (a, b) {
                // collapsed into the cluster neighbourhood
                if ca == cb && g.iter().all(|p| p.dist(c) <= params.tolerance) {
                    continue;
                }
            }
            dedup_consecutive(&mut g);
            if g.len() < 2 {
                continue;
            }
            let mut rec = e.to_record();
            rec.geometry = g;
            if rec.status == EdgeStatus::Original {
                rec.status = EdgeStatus::Extended;
            }
            records.push(rec);
        }
        cur = remove_interstitial_nodes(&drop_duplicate_edges(&cur.rebuilt(records)));
    }
    cur
}

/// Applies all repairs until the network stops changing.
pub fn fix_topology(net: &Network, params: &ConsolidationParams) -> Network {
    let mut cur = net.clone();
    for _ in 0..32 {
        let before = cur.geometry_signature();
        cur = induce_intersection_nodes(&cur);
        cur = drop_duplicate_edges(&cur);
        cur = remove_interstitial_nodes(&cur);
        cur = consolidate_nodes(&cur, params);
        if cur.geometry_signature() == before {
            break;
        }
    }
    cur
}

/// Counts of violated topology requirements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TopologyViolations {
    pub unnoded_touches: usize,
    pub degree_two_nodes: usize,
    pub duplicate_geometries: usize,
    pub close_node_pairs: usize,
}

impl TopologyViolations {
    pub fn is_clean(&self) -> bool {
        *self == TopologyViolations::default()
    }
}

/// Checks all four topology requirements. Isolated rings (a single loop
/// edge at its only node) are not counted as degree-2 violations.
pub fn check_topology(net: &Network, tolerance: f64) -> TopologyViolations {
    let mut seen = HashSet::new();
    let duplicate_geometries = net
        .edges()
        .iter()
        .filter(|e| !seen.insert(canonical_geometry(&e.geometry)))
        .count();
    let degree_two_nodes = net.nodes().iter().filter(|n| is_interstitial(net, n.id)).count();
    let tree = RTree::bulk_load(
        net.nodes()
            .iter()
            .map(|n| GeomWithData::new(n.coord.as_array(), n.id.0))
            .collect(),
    );
    let close_node_pairs = net
        .nodes()
        .iter()
        .map(|n| {
            tree.locate_within_distance(n.coord.as_array(), tolerance * tolerance)
                .filter(|h| h.data > n.id.0)
                .count()
        })
        .sum();
    TopologyViolations {
        unnoded_touches: endpoint_touches(net).len(),
        degree_two_nodes,
        duplicate_geometries,
        close_node_pairs,
    }
}
