//! Voronoi skeleton of an artifact polygon, pruned to the subtree that
//! joins a set of terminals on its boundary.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geom::{douglas_peucker, segments_cross_properly, Coord, Region};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonParams {
    /// Boundary sample spacing in metres.
    pub segmentation_density: f64,
    /// Douglas-Peucker tolerance applied to the output lines.
    pub simplification_tolerance: f64,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        SkeletonParams {
            segmentation_density: 1.0,
            simplification_tolerance: 1.0,
        }
    }
}

const CONTAIN_TOL: f64 = 1e-6;

struct Sample {
    pos: Point2<f64>,
    source: usize,
}

impl HasPosition for Sample {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Samples every segment at the given spacing, offset half a step from its
/// ends. Each segment is its own source, so the branch separating two
/// segments starts exactly at the vertex between them.
fn samples(region: &Region, obstacles: &[Vec<Coord>], density: f64) -> Vec<Sample> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut source = 0;
    let mut push = |p: Coord, source: usize, out: &mut Vec<Sample>| {
        if seen.insert(p.key()) {
            out.push(Sample {
                pos: Point2::new(p.x, p.y),
                source,
            });
        }
    };
    let lines = region.rings.iter().chain(obstacles.iter());
    for line in lines {
        for w in line.windows(2) {
            let m = ((w[0].dist(w[1]) / density).ceil() as usize).max(1);
            for i in 0..m {
                push(w[0].lerp(w[1], (i as f64 + 0.5) / m as f64), source, &mut out);
            }
            source += 1;
        }
    }
    out
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    d: f64,
    v: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.d.total_cmp(&self.d).then(other.v.cmp(&self.v))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Default)]
struct Graph {
    verts: Vec<Coord>,
    adj: Vec<Vec<(usize, f64)>>,
    index: HashMap<(u64, u64), usize>,
}

impl Graph {
    fn vertex(&mut self, c: Coord) -> usize {
        if let Some(&i) = self.index.get(&c.key()) {
            return i;
        }
        self.verts.push(c);
        self.adj.push(Vec::new());
        self.index.insert(c.key(), self.verts.len() - 1);
        self.verts.len() - 1
    }

    fn link(&mut self, a: usize, b: usize) {
        if a == b || self.adj[a].iter().any(|&(x, _)| x == b) {
            return;
        }
        let w = self.verts[a].dist(self.verts[b]);
        self.adj[a].push((b, w));
        self.adj[b].push((a, w));
    }
}

fn crosses_any(a: Coord, b: Coord, obstacles: &[Vec<Coord>]) -> bool {
    obstacles
        .iter()
        .flat_map(|o| o.windows(2))
        .any(|w| segments_cross_properly(a, b, w[0], w[1]))
}

/// Skeleton lines joining `terminals` inside `region`. `obstacles` are
/// retained lines inside the region that act as extra Voronoi sources and
/// must not be crossed.
pub fn voronoi_skeleton(
    region: &Region,
    terminals: &[Coord],
    obstacles: &[Vec<Coord>],
    params: &SkeletonParams,
) -> Result<Vec<Vec<Coord>>> {
    if !(params.segmentation_density > 0.0) {
        return Err(Error::InvalidParameter("segmentation density must be > 0".into()));
    }
    if terminals.len() < 2 {
        return Err(Error::Skeleton("need at least two connection points".into()));
    }
    for (i, a) in terminals.iter().enumerate() {
        if terminals[i + 1..].iter().any(|b| a.dist(*b) < CONTAIN_TOL) {
            return Err(Error::Skeleton("coincident connection points".into()));
        }
    }

    let tri: DelaunayTriangulation<Sample> =
        DelaunayTriangulation::bulk_load(samples(region, obstacles, params.segmentation_density))
            .map_err(|e| Error::Skeleton(format!("triangulation failed: {e:?}")))?;

    let mut g = Graph::default();
    let mut inside: HashMap<usize, bool> = HashMap::new();
    for e in tri.undirected_edges() {
        let [a, b] = e.vertices();
        if a.data().source == b.data().source {
            continue;
        }
        let d = e.as_directed();
        let mut centre = |f: spade::handles::FaceHandle<'_, spade::handles::InnerTag, Sample, (), (), ()>| {
            let c = f.circumcenter();
            let c = Coord::new(c.x, c.y);
            let ok = *inside
                .entry(f.fix().index())
                .or_insert_with(|| c.is_finite() && region.contains(c));
            (c, ok)
        };
        let ends = [d.face().as_inner(), d.rev().face().as_inner()].map(|f| f.map(&mut centre));
        let (c1, c2) = match ends {
            [Some((c1, true)), Some((c2, true))] => {
                if !region.contains(c1.lerp(c2, 0.5)) {
                    continue;
                }
                (c1, c2)
            }
            // the branch leaves the region: keep it up to the boundary
            // between the two samples
            [Some((c, true)), _] | [_, Some((c, true))] => {
                let (pa, pb) = (a.position(), b.position());
                let m = Coord::new((pa.x + pb.x) / 2.0, (pa.y + pb.y) / 2.0);
                if !region.covers_polyline(&[c, m], CONTAIN_TOL) {
                    continue;
                }
                (c, m)
            }
            _ => continue,
        };
        if crosses_any(c1, c2, obstacles) {
            continue;
        }
        let (i, j) = (g.vertex(c1), g.vertex(c2));
        g.link(i, j);
    }
    if g.verts.is_empty() {
        return Err(Error::Skeleton("no interior skeleton".into()));
    }

    let tree = RTree::bulk_load(
        g.verts
            .iter()
            .enumerate()
            .map(|(i, c)| GeomWithData::new(c.as_array(), i))
            .collect(),
    );
    let mut term_ids = Vec::with_capacity(terminals.len());
    for &t in terminals {
        let target = tree
            .nearest_neighbor_iter(&t.as_array())
            .take(256)
            .map(|h| h.data)
            .find(|&v| {
                let link = [t, g.verts[v]];
                region.covers_polyline(&link, CONTAIN_TOL) && !crosses_any(t, g.verts[v], obstacles)
            })
            .ok_or_else(|| Error::Skeleton("connection point cannot reach the skeleton".into()))?;
        let ti = g.vertex(t);
        g.link(ti, target);
        term_ids.push(ti);
    }

    let edges = steiner_tree(&g, &term_ids)?;
    Ok(tree_lines(&g, &edges, &term_ids)
        .into_iter()
        .map(|line| {
            let simple = douglas_peucker(&line, params.simplification_tolerance);
            if region.covers_polyline(&simple, CONTAIN_TOL)
                && !simple.windows(2).any(|w| crosses_any(w[0], w[1], obstacles))
            {
                simple
            } else {
                line
            }
        })
        .collect())
}

/// Shortest-path heuristic: grow from the first terminal, repeatedly
/// attaching the closest remaining terminal by its shortest path.
fn steiner_tree(g: &Graph, terminals: &[usize]) -> Result<Vec<(usize, usize)>> {
    let n = g.verts.len();
    let mut in_tree = vec![false; n];
    in_tree[terminals[0]] = true;
    let mut remaining: HashSet<usize> = terminals[1..].iter().copied().collect();
    remaining.remove(&terminals[0]);
    let mut edges = Vec::new();
    while !remaining.is_empty() {
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for v in 0..n {
            if in_tree[v] {
                dist[v] = 0.0;
                heap.push(State { d: 0.0, v });
            }
        }
        let mut reached = None;
        while let Some(State { d, v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if remaining.contains(&v) {
                reached = Some(v);
                break;
            }
            for &(w, len) in &g.adj[v] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    prev[w] = v;
                    heap.push(State { d: nd, v: w });
                }
            }
        }
        let mut v = reached.ok_or_else(|| Error::Skeleton("skeleton is disconnected".into()))?;
        remaining.remove(&v);
        while !in_tree[v] {
            in_tree[v] = true;
            remaining.remove(&v);
            let p = prev[v];
            edges.push((p, v));
            v = p;
        }
    }
    Ok(edges)
}

/// Splits a tree into polylines between branch points, leaves and terminals.
fn tree_lines(g: &Graph, edges: &[(usize, usize)], terminals: &[usize]) -> Vec<Vec<Coord>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let term: HashSet<usize> = terminals.iter().copied().collect();
    let is_break = |v: usize| adj[&v].len() != 2 || term.contains(&v);
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut starts: Vec<usize> = adj.keys().copied().filter(|&v| is_break(v)).collect();
    starts.sort();
    let mut lines = Vec::new();
    for s in starts {
        for &first in &adj[&s] {
            if used.contains(&(s.min(first), s.max(first))) {
                continue;
            }
            let mut line = vec![g.verts[s]];
            let (mut prev, mut cur) = (s, first);
            loop {
                used.insert((prev.min(cur), prev.max(cur)));
                line.push(g.verts[cur]);
                if is_break(cur) {
                    break;
                }
                let next = *adj[&cur].iter().find(|&&x| x != prev).unwrap();
                prev = cur;
                cur = next;
            }
            lines.push(line);
        }
    }
    lines
}
