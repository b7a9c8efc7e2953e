//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use netsimp::geom::{distance_to_polyline, Coord};
use netsimp::network::{EdgeRecord, Network};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Raw street data with every defect topology repair has to fix: split
/// chains (degree-2 nodes), duplicated and reversed geometries, endpoints a
/// metre or so off their junction, and dangles ending on another street's
/// interior. Built on a jittered grid of `k` × `k` cells, 50 m apart.
pub fn random_raw_network(rng: &mut StdRng, k: usize) -> Network {
    let spacing = 50.0;
    let mut nodes = vec![vec![Coord::new(0.0, 0.0); k + 1]; k + 1];
    for (i, row) in nodes.iter_mut().enumerate() {
        for (j, p) in row.iter_mut().enumerate() {
            *p = Coord::new(
                i as f64 * spacing + rng.random_range(-10.0..10.0),
                j as f64 * spacing + rng.random_range(-10.0..10.0),
            );
        }
    }
    let mut lines: Vec<Vec<Coord>> = Vec::new();
    for i in 0..=k {
        for j in 0..=k {
            for (di, dj) in [(1, 0), (0, 1)] {
                let (ni, nj) = (i + di, j + dj);
                if ni > k || nj > k || rng.random_bool(0.15) {
                    continue;
                }
                let (mut a, mut b) = (nodes[i][j], nodes[ni][nj]);
                // endpoint a little off the junction
                if rng.random_bool(0.08) {
                    a = a + Coord::new(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2));
                }
                if rng.random_bool(0.08) {
                    b = b + Coord::new(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2));
                }
                let mut geom = vec![a];
                if rng.random_bool(0.3) {
                    let mid = a.lerp(b, rng.random_range(0.3..0.7));
                    geom.push(mid + Coord::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)));
                }
                geom.push(b);
                if rng.random_bool(0.05) {
                    let mut dup = geom.clone();
                    if rng.random_bool(0.5) {
                        dup.reverse();
                    }
                    lines.push(dup);
                }
                if rng.random_bool(0.15) && geom.len() == 2 {
                    // split into a chain with a degree-2 node
                    let m = a.lerp(b, rng.random_range(0.2..0.8));
                    lines.push(vec![a, m]);
                    lines.push(vec![m, b]);
                } else {
                    if rng.random_bool(0.05) {
                        // dangle from the middle of the first segment
                        let (p, q) = (geom[0], geom[1]);
                        let m = p.lerp(q, 0.5);
                        let d = q - p;
                        let n = Coord::new(-d.y, d.x) * (8.0 / d.norm());
                        lines.push(vec![m, m + n]);
                    }
                    lines.push(geom);
                }
            }
        }
    }
    Network::from_lines(lines)
}

/// Grid size giving roughly `edges` edges.
pub fn grid_size_for(edges: usize) -> usize {
    (((edges as f64) / 2.2).sqrt().round() as usize).max(1)
}

fn key(c: Coord) -> (u64, u64) {
    c.key()
}

/// Independent count of the four topology defects.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Defects {
    pub degree_two: usize,
    pub duplicates: usize,
    pub close_pairs: usize,
    pub unnoded_touches: usize,
}

pub fn brute_force_defects(net: &Network, tolerance: f64) -> Defects {
    let eps = 1e-6;
    let edges = net.edges();
    let mut incidences: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, e) in edges.iter().enumerate() {
        incidences.entry(key(e.geometry[0])).or_default().push(i);
        incidences.entry(key(*e.geometry.last().unwrap())).or_default().push(i);
    }
    let degree_two = incidences.values().filter(|v| v.len() == 2 && v[0] != v[1]).count();

    let mut seen = HashSet::new();
    let mut duplicates = 0;
    for e in edges {
        let fwd: Vec<(u64, u64)> = e.geometry.iter().map(|&c| key(c)).collect();
        let mut rev = fwd.clone();
        rev.reverse();
        let canon = fwd.min(rev);
        if !seen.insert(canon) {
            duplicates += 1;
        }
    }

    let pts: Vec<Coord> = incidences
        .keys()
        .map(|&(x, y)| Coord::new(f64::from_bits(x), f64::from_bits(y)))
        .collect();
    let mut close_pairs = 0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].dist(pts[j]) <= tolerance {
                close_pairs += 1;
            }
        }
    }

    let mut unnoded_touches = 0;
    for p in &pts {
        for e in edges {
            let (first, last) = (e.geometry[0], *e.geometry.last().unwrap());
            if p.dist(first) <= eps || p.dist(last) <= eps {
                continue;
            }
            if distance_to_polyline(*p, &e.geometry) <= eps {
                unnoded_touches += 1;
            }
        }
    }
    Defects {
        degree_two,
        duplicates,
        close_pairs,
        unnoded_touches,
    }
}

/// Naive average-linkage clustering: repeatedly merge the closest pair of
/// clusters (mean pairwise distance) while that distance is within
/// `tolerance`. Returns member lists sorted by smallest member.
pub fn naive_average_linkage(points: &[Coord], tolerance: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut sum = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        sum += points[i].dist(points[j]);
                    }
                }
                let d = sum / (clusters[a].len() * clusters[b].len()) as f64;
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        match best {
            Some((d, a, b)) if d <= tolerance => {
                let moved = clusters.remove(b);
                clusters[a].extend(moved);
            }
            _ => break,
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Repeats clustering on cluster means until nothing merges; returns the
/// final position of every input point.
pub fn naive_consolidation(points: &[Coord], tolerance: f64) -> Vec<Coord> {
    let mut pos: Vec<Coord> = points.to_vec();
    // current distinct locations and which inputs sit on each
    let mut sites: Vec<(Coord, Vec<usize>)> = points.iter().enumerate().map(|(i, &p)| (p, vec![i])).collect();
    loop {
        let coords: Vec<Coord> = sites.iter().map(|s| s.0).collect();
        let clusters = naive_average_linkage(&coords, tolerance);
        if clusters.iter().all(|c| c.len() == 1) {
            break;
        }
        sites = clusters
            .into_iter()
            .map(|c| {
                let n = c.len() as f64;
                let (sx, sy) = c
                    .iter()
                    .fold((0.0, 0.0), |(x, y), &s| (x + coords[s].x, y + coords[s].y));
                let members = c.iter().flat_map(|&s| sites[s].1.clone()).collect();
                (Coord::new(sx / n, sy / n), members)
            })
            .collect();
    }
    for (c, members) in sites {
        for m in members {
            pos[m] = c;
        }
    }
    pos
}

/// Network of three long spokes from every point, so each point becomes a
/// node of degree 3 and spoke tips stay far apart.
pub fn spokes(points: &[Coord]) -> Network {
    let n = points.len() * 3;
    let records = points
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| {
            (0..3).map(move |k| {
                let a = std::f64::consts::TAU * (3 * i + k) as f64 / n as f64;
                EdgeRecord::new((3 * i + k) as u64, vec![p, p + Coord::new(a.cos(), a.sin()) * 1000.0])
            })
        })
        .collect();
    Network::assemble(records, netsimp::network::DEFAULT_SNAP_EPSILON)
}

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Exact squared Euclidean distance between two aligned series.
pub fn exact_squared_distance(p: &[f64], q: &[f64]) -> BigRational {
    p.iter().zip(q).fold(BigRational::zero(), |acc, (&a, &b)| {
        let d = rational(b) - rational(a);
        acc + &d * &d
    })
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// ξ from its definition with exact integer arithmetic.
pub fn exact_xi(p: &[f64], q: &[f64]) -> BigRational {
    let n = p.len();
    let mut by_q: Vec<usize> = (0..n).collect();
    by_q.sort_by(|&a, &b| q[a].total_cmp(&q[b]));
    let mut rank = vec![0i64; n];
    for (r, i) in by_q.into_iter().enumerate() {
        rank[i] = r as i64 + 1;
    }
    let mut by_p: Vec<usize> = (0..n).collect();
    by_p.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let sum: i64 = by_p.windows(2).map(|w| (rank[w[1]] - rank[w[0]]).abs()).sum();
    let n = n as i64;
    BigRational::new(BigInt::from(1), BigInt::from(1))
        - BigRational::new(BigInt::from(3 * sum), BigInt::from(n * n - 1))
}

pub fn degree_histogram(net: &Network) -> BTreeMap<usize, usize> {
    netsimp::fixtures::degree_histogram(net)
}
