//! Average-linkage agglomerative clustering of node coordinates.
//!
//! Candidate groups are first split into connected components of the
//! "within tolerance" graph: an average-linkage merge at height `h` implies
//! some member pair closer than `h`, so no cluster can span two components.
//! Each component is then clustered exactly with the nearest-neighbour chain
//! algorithm and cut at the tolerance.

use rstar::primitives::GeomWithData;
use rstar::RTree;

use crate::geom::Coord;

/// A cluster of input points with its coordinate mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Indices into the input slice, ascending.
    pub members: Vec<usize>,
    pub centroid: Coord,
}

/// Clusters points with average linkage, merging while the average
/// pairwise distance between clusters is `<= tolerance`.
///
/// Returns every cluster (singletons included), ordered by smallest member.
pub fn average_linkage_clusters(points: &[Coord], tolerance: f64) -> Vec<Cluster> {
    let tree = RTree::bulk_load(
        points
            .iter()
            .enumerate()
            .map(|(i, p)| GeomWithData::new(p.as_array(), i))
            .collect(),
    );
    let mut uf = UnionFind::new(points.len());
    let r2 = tolerance * tolerance;
    for (i, p) in points.iter().enumerate() {
        for hit in tree.locate_within_distance(p.as_array(), r2) {
            uf.union(i, hit.data);
        }
    }
    let mut components: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    for i in 0..points.len() {
        components[uf.find(i)].push(i);
    }

    let mut clusters = Vec::new();
    for comp in components.into_iter().filter(|c| !c.is_empty()) {
        if comp.len() == 1 {
            clusters.push(comp);
            continue;
        }
        let local: Vec<Coord> = comp.iter().map(|&i| points[i]).collect();
        for group in cut_dendrogram(&local, tolerance) {
            clusters.push(group.into_iter().map(|k| comp[k]).collect());
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
        .into_iter()
        .map(|members| {
            let n = members.len() as f64;
            let (sx, sy) = members
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &i| (sx + points[i].x, sy + points[i].y));
            Cluster {
                centroid: Coord::new(sx / n, sy / n),
                members,
            }
        })
        .collect()
}

/// Exact average-linkage dendrogram via the nearest-neighbour chain,
/// cut at `tolerance`.
fn cut_dendrogram(points: &[Coord], tolerance: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i].dist(points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut uf = UnionFind::new(n);

    for _ in 1..n {
        if chain.is_empty() {
            chain.push(active.iter().position(|a| *a).expect("active cluster"));
        }
        let (a, b) = loop {
            let a = *chain.last().unwrap();
            let prev = chain.len().checked_sub(2).map(|k| chain[k]);
            let mut best = prev;
            let mut best_d = prev.map_or(f64::INFINITY, |p| dist[a * n + p]);
            for k in 0..n {
                if k != a && active[k] && dist[a * n + k] < best_d {
                    best_d = dist[a * n + k];
                    best = Some(k);
                }
            }
            let b = best.expect("at least two active clusters");
            if Some(b) == prev {
                chain.pop();
                chain.pop();
                break (a, b);
            }
            chain.push(b);
        };
        let height = dist[a * n + b];
        if height <= tolerance {
            uf.union(a, b);
        }
        // keep the merged cluster at `keep`, retire `gone`
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        let (sk, sg) = (size[keep] as f64, size[gone] as f64);
        for k in 0..n {
            if active[k] && k != keep && k != gone {
                let d = (sk * dist[k * n + keep] + sg * dist[k * n + gone]) / (sk + sg);
                dist[k * n + keep] = d;
                dist[keep * n + k] = d;
            }
        }
        size[keep] += size[gone];
        active[gone] = false;
        for c in &mut chain {
            if *c == gone {
                *c = keep;
            }
        }
        chain.dedup();
    }

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        groups[uf.find(i)].push(i);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Coord> {
        v.iter().map(|&(x, y)| Coord::new(x, y)).collect()
    }

    #[test]
    fn two_close_points_merge_to_midpoint() {
        let c = average_linkage_clusters(&pts(&[(0.0, 0.0), (1.0, 0.0)]), 2.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].centroid, Coord::new(0.5, 0.0));
    }

    #[test]
    fn average_linkage_does_not_chain() {
        let c = average_linkage_clusters(&pts(&[(0.0, 0.0), (1.5, 0.0), (3.0, 0.0)]), 2.0);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].members, vec![0, 1]);
        assert_eq!(c[0].centroid, Coord::new(0.75, 0.0));
        assert_eq!(c[1].members, vec![2]);
        assert_eq!(c[1].centroid, Coord::new(3.0, 0.0));
    }

    #[test]
    fn single_point() {
        let c = average_linkage_clusters(&pts(&[(4.0, 2.0)]), 2.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].members, vec![0]);
    }

    #[test]
    fn far_points_stay_apart() {
        let c = average_linkage_clusters(&pts(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)]), 2.0);
        assert_eq!(c.len(), 3);
    }
}
