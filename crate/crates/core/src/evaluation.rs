//! Grid-based comparison of two networks.
//!
//! Both networks are measured on the same hexagonal grid (seven per-cell
//! metrics), and each metric's two series are compared with the Euclidean
//! distance and Chatterjee's ξ, plus Pearson and Spearman for reference.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::continuity::{detect_strokes, ContinuityParams};
use crate::error::{Error, Result};
use crate::geom::{Bbox, Coord};
use crate::network::Network;

pub const DEFAULT_GRID_EDGE: f64 = 200.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Axial position of a flat-topped hexagon: column, and row within the
/// column (odd columns sit half a row higher).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub col: i64,
    pub row: i64,
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}r{}", self.col, self.row)
    }
}

impl Serialize for CellId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HexCell {
    pub id: CellId,
    pub center: Coord,
    /// Hexagon clipped to the grid extent, closed.
    pub polygon: Vec<Coord>,
}

/// Half-plane `normal · (x - point) >= 0`; points on the line belong to it
/// only when `inclusive`.
#[derive(Debug, Clone, Copy)]
struct HalfPlane {
    point: Coord,
    normal: Coord,
    inclusive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridKey {
    pub edge: f64,
    pub origin: Coord,
}

#[derive(Debug, Clone, Serialize)]
pub struct HexGrid {
    pub key: GridKey,
    pub extent: Bbox,
    /// Sorted by id.
    pub cells: Vec<HexCell>,
    #[serde(skip)]
    index: HashMap<CellId, usize>,
}

fn sutherland_hodgman(poly: &[Coord], planes: &[HalfPlane]) -> Vec<Coord> {
    let mut out: Vec<Coord> = poly.to_vec();
    for hp in planes {
        if out.is_empty() {
            break;
        }
        let side = |p: Coord| hp.normal.dot(p - hp.point);
        let input = std::mem::take(&mut out);
        for i in 0..input.len() {
            let cur = input[i];
            let prev = input[(i + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(prev.lerp(cur, sp / (sp - sc)));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(prev.lerp(cur, sp / (sp - sc)));
            }
        }
    }
    out
}

fn ring_area(ring: &[Coord]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].cross(ring[(i + 1) % n])).sum::<f64>().abs() / 2.0
}

impl HexGrid {
    pub fn edge(&self) -> f64 {
        self.key.edge
    }

    pub fn center(&self, id: CellId) -> Coord {
        let s = self.key.edge;
        let o = self.key.origin;
        let shift = if id.col.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
        Coord::new(o.x + 1.5 * s * id.col as f64, o.y + SQRT3 * s * (id.row as f64 + shift))
    }

    fn hexagon(&self, id: CellId) -> [Coord; 6] {
        let c = self.center(id);
        let s = self.key.edge;
        let h = SQRT3 / 2.0 * s;
        [
            Coord::new(c.x + s, c.y),
            Coord::new(c.x + s / 2.0, c.y + h),
            Coord::new(c.x - s / 2.0, c.y + h),
            Coord::new(c.x - s, c.y),
            Coord::new(c.x - s / 2.0, c.y - h),
            Coord::new(c.x + s / 2.0, c.y - h),
        ]
    }

    /// The cell's half-planes: hexagon sides (left and bottom sides
    /// inclusive) and the extent (inclusive).
    fn half_planes(&self, id: CellId) -> Vec<HalfPlane> {
        let v = self.hexagon(id);
        let mut planes = Vec::with_capacity(10);
        for i in 0..6 {
            let (a, b) = (v[i], v[(i + 1) % 6]);
            let d = b - a;
            // counter-clockwise ring: interior on the left
            let normal = Coord::new(-d.y, d.x);
            // sides 2..=4 face left, lower-left and down
            planes.push(HalfPlane {
                point: a,
                normal,
                inclusive: (2..=4).contains(&i),
            });
        }
        let e = self.extent;
        for (point, normal) in [
            (Coord::new(e.min.x, e.min.y), Coord::new(1.0, 0.0)),
            (Coord::new(e.min.x, e.min.y), Coord::new(0.0, 1.0)),
            (Coord::new(e.max.x, e.max.y), Coord::new(-1.0, 0.0)),
            (Coord::new(e.max.x, e.max.y), Coord::new(0.0, -1.0)),
        ] {
            planes.push(HalfPlane {
                point,
                normal,
                inclusive: true,
            });
        }
        planes
    }

    /// Cell whose centre is nearest; ties go to the larger x, then the
    /// larger y (cells own their left and bottom sides).
    pub fn cell_of(&self, p: Coord) -> Option<CellId> {
        let s = self.key.edge;
        let o = self.key.origin;
        let col = ((p.x - o.x) / (1.5 * s)).round() as i64;
        let mut best: Option<(f64, CellId, Coord)> = None;
        for c in col - 1..=col + 1 {
            let shift = if c.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
            let row = ((p.y - o.y) / (SQRT3 * s) - shift).round() as i64;
            for r in row - 1..=row + 1 {
                let id = CellId { col: c, row: r };
                if !self.index.contains_key(&id) {
                    continue;
                }
                let ctr = self.center(id);
                let d = p.dist_sq(ctr);
                let better = match best {
                    None => true,
                    Some((bd, _, bc)) => {
                        d.total_cmp(&bd)
                            .then(bc.x.total_cmp(&ctr.x))
                            .then(bc.y.total_cmp(&ctr.y))
                            == Ordering::Less
                    }
                };
                if better {
                    best = Some((d, id, ctr));
                }
            }
        }
        best.map(|b| b.1)
    }

    /// Length of the segment inside the cell (Cyrus–Beck).
    pub fn clip_length(&self, id: CellId, a: Coord, b: Coord) -> f64 {
        let d = b - a;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for hp in self.half_planes(id) {
            let num = hp.normal.dot(a - hp.point);
            let den = hp.normal.dot(d);
            if den == 0.0 {
                if num < 0.0 || (num == 0.0 && !hp.inclusive) {
                    return 0.0;
                }
                continue;
            }
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 >= t1 {
                return 0.0;
            }
        }
        (t1 - t0) * d.norm()
    }

    /// Cells whose hexagon may meet the box.
    fn candidates(&self, b: Bbox) -> Vec<CellId> {
        let s = self.key.edge;
        let o = self.key.origin;
        let c0 = ((b.min.x - o.x - s) / (1.5 * s)).floor() as i64;
        let c1 = ((b.max.x - o.x + s) / (1.5 * s)).ceil() as i64;
        let r0 = ((b.min.y - o.y) / (SQRT3 * s)).floor() as i64 - 1;
        let r1 = ((b.max.y - o.y) / (SQRT3 * s)).ceil() as i64 + 1;
        let mut out = Vec::new();
        for col in c0..=c1 {
            for row in r0..=r1 {
                let id = CellId { col, row };
                if self.index.contains_key(&id) {
                    out.push(id);
                }
            }
        }
        out
    }
}

/// Flat-topped hexagons with the given edge length covering `extent`; the
/// first cell is centred on the extent's lower-left corner.
pub fn tile_extent(extent: Bbox, edge: f64) -> Result<HexGrid> {
    if !(edge > 0.0) || !edge.is_finite() {
        return Err(Error::InvalidParameter(format!("grid edge must be > 0, got {edge}")));
    }
    if extent.is_empty()
        || !(extent.width() > 0.0 && extent.height() > 0.0)
        || !(extent.width().is_finite() && extent.height().is_finite())
    {
        return Err(Error::EmptyExtent);
    }
    let origin = Coord::new(extent.min.x, extent.min.y);
    let mut grid = HexGrid {
        key: GridKey { edge, origin },
        extent,
        cells: Vec::new(),
        index: HashMap::new(),
    };
    let cols = (extent.width() / (1.5 * edge)).ceil() as i64 + 1;
    let rows = (extent.height() / (SQRT3 * edge)).ceil() as i64 + 1;
    let rect = [
        HalfPlane {
            point: origin,
            normal: Coord::new(1.0, 0.0),
            inclusive: true,
        },
        HalfPlane {
            point: origin,
            normal: Coord::new(0.0, 1.0),
            inclusive: true,
        },
        HalfPlane {
            point: Coord::new(extent.max.x, extent.max.y),
            normal: Coord::new(-1.0, 0.0),
            inclusive: true,
        },
        HalfPlane {
            point: Coord::new(extent.max.x, extent.max.y),
            normal: Coord::new(0.0, -1.0),
            inclusive: true,
        },
    ];
    let min_area = 1e-9 * edge * edge;
    for col in -1..=cols {
        for row in -1..=rows {
            let id = CellId { col, row };
            let clipped = sutherland_hodgman(&grid.hexagon(id), &rect);
            if clipped.len() >= 3 && ring_area(&clipped) > min_area {
                let mut polygon = clipped;
                polygon.push(polygon[0]);
                grid.cells.push(HexCell {
                    id,
                    center: grid.center(id),
                    polygon,
                });
            }
        }
    }
    grid.cells.sort_by_key(|c| c.id);
    grid.index = grid.cells.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AvgNodeDegree,
    CoordinateCount,
    EdgeCount,
    TotalLength,
    StrokeCount,
    MaxStrokeLength,
    TotalStrokeLength,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::AvgNodeDegree,
        Metric::CoordinateCount,
        Metric::EdgeCount,
        Metric::TotalLength,
        Metric::StrokeCount,
        Metric::MaxStrokeLength,
        Metric::TotalStrokeLength,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::AvgNodeDegree => "avg_node_degree",
            Metric::CoordinateCount => "coordinate_count",
            Metric::EdgeCount => "edge_count",
            Metric::TotalLength => "total_length",
            Metric::StrokeCount => "stroke_count",
            Metric::MaxStrokeLength => "max_stroke_length",
            Metric::TotalStrokeLength => "total_stroke_length",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSeries {
    pub metric: Metric,
    pub grid: GridKey,
    pub values: BTreeMap<CellId, f64>,
}

impl MetricSeries {
    pub fn new(metric: Metric, grid: GridKey, values: BTreeMap<CellId, f64>) -> Self {
        MetricSeries { metric, grid, values }
    }

    /// Series on a synthetic grid, cells numbered 0.. in column 0.
    pub fn from_values(metric: Metric, values: &[f64]) -> Self {
        MetricSeries {
            metric,
            grid: GridKey {
                edge: 1.0,
                origin: Coord::new(0.0, 0.0),
            },
            values: values
                .iter()
                .enumerate()
                .map(|(i, &v)| (CellId { col: 0, row: i as i64 }, v))
                .collect(),
        }
    }
}

/// All seven metrics for one network. Every grid cell gets a value.
pub fn cell_metrics(net: &Network, grid: &HexGrid, continuity: &ContinuityParams) -> Vec<MetricSeries> {
    #[derive(Default, Clone)]
    struct Acc {
        degree_sum: f64,
        nodes: usize,
        coords: usize,
        edges: usize,
        length: f64,
        strokes: BTreeSet<usize>,
    }
    let mut acc: BTreeMap<CellId, Acc> = grid.cells.iter().map(|c| (c.id, Acc::default())).collect();

    for n in net.nodes() {
        if let Some(id) = grid.cell_of(n.coord) {
            let a = acc.get_mut(&id).unwrap();
            a.degree_sum += n.degree as f64;
            a.nodes += 1;
        }
    }

    let strokes = detect_strokes(net, continuity);
    let mut stroke_of: HashMap<crate::network::EdgeId, Vec<usize>> = HashMap::new();
    for (si, s) in strokes.iter().enumerate() {
        for &e in &s.edge_ids {
            stroke_of.entry(e).or_default().push(si);
        }
    }

    for e in net.edges() {
        let mut touched: BTreeSet<CellId> = BTreeSet::new();
        for &p in &e.geometry {
            if let Some(id) = grid.cell_of(p) {
                acc.get_mut(&id).unwrap().coords += 1;
                touched.insert(id);
            }
        }
        for id in grid.candidates(e.bbox()) {
            let len: f64 = e.geometry.windows(2).map(|w| grid.clip_length(id, w[0], w[1])).sum();
            if len > 0.0 {
                acc.get_mut(&id).unwrap().length += len;
                touched.insert(id);
            }
        }
        for id in touched {
            let a = acc.get_mut(&id).unwrap();
            a.edges += 1;
            if let Some(ss) = stroke_of.get(&e.id) {
                a.strokes.extend(ss.iter().copied());
            }
        }
    }

    let mut out: Vec<BTreeMap<CellId, f64>> = vec![BTreeMap::new(); 7];
    for (id, a) in acc {
        let lengths: Vec<f64> = a.strokes.iter().map(|&s| strokes[s].total_length).collect();
        let vals = [
            if a.nodes > 0 {
                a.degree_sum / a.nodes as f64
            } else {
                0.0
            },
            a.coords as f64,
            a.edges as f64,
            a.length,
            a.strokes.len() as f64,
            lengths.iter().copied().fold(0.0, f64::max),
            neumaier_sum(lengths.iter().copied()),
        ];
        for (k, v) in vals.into_iter().enumerate() {
            out[k].insert(id, v);
        }
    }
    Metric::ALL
        .iter()
        .zip(out)
        .map(|(&m, values)| MetricSeries::new(m, grid.key, values))
        .collect()
}

fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Aligned value pairs over the union of cells, missing cells as zero.
fn paired(p: &MetricSeries, q: &MetricSeries) -> Result<Vec<(f64, f64)>> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch);
    }
    let ids: BTreeSet<CellId> = p.values.keys().chain(q.values.keys()).copied().collect();
    Ok(ids
        .into_iter()
        .map(|id| {
            (
                p.values.get(&id).copied().unwrap_or(0.0),
                q.values.get(&id).copied().unwrap_or(0.0),
            )
        })
        .collect())
}

pub fn euclidean_distance(p: &MetricSeries, q: &MetricSeries) -> Result<f64> {
    let pairs = paired(p, q)?;
    Ok(neumaier_sum(pairs.iter().map(|&(a, b)| (b - a) * (b - a))).sqrt())
}

/// Ranks 1..=n; ties keep their input order.
fn ordinal_ranks(v: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0; v.len()];
    for (r, i) in order.into_iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Ranks 1..=n with ties sharing their average rank.
fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    ranks
}

/// ξ on plain slices (pairs in cell order).
pub fn xi_from_pairs(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let q: Vec<f64> = pairs.iter().map(|x| x.1).collect();
    let r = ordinal_ranks(&q);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0));
    let sum: u128 = order.windows(2).map(|w| r[w[0]].abs_diff(r[w[1]]) as u128).sum();
    let n = n as f64;
    Ok(1.0 - 3.0 * sum as f64 / (n * n - 1.0))
}

pub fn chatterjee_xi(p: &MetricSeries, q: &MetricSeries) -> Result<f64> {
    xi_from_pairs(&paired(p, q)?)
}

fn pearson_slices(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = neumaier_sum(a.iter().copied()) / n;
    let mb = neumaier_sum(b.iter().copied()) / n;
    let cov = neumaier_sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    let va = neumaier_sum(a.iter().map(|x| (x - ma) * (x - ma)));
    let vb = neumaier_sum(b.iter().map(|y| (y - mb) * (y - mb)));
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson and Spearman coefficients; `None` where a series is constant.
pub fn rank_correlations(p: &MetricSeries, q: &MetricSeries) -> Result<(Option<f64>, Option<f64>)> {
    let pairs = paired(p, q)?;
    if pairs.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: pairs.len(),
        });
    }
    let a: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    let b: Vec<f64> = pairs.iter().map(|x| x.1).collect();
    Ok((
        pearson_slices(&a, &b),
        pearson_slices(&average_ranks(&a), &average_ranks(&b)),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub metric: Metric,
    pub d: f64,
    pub xi: f64,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonResult {
    pub grid_edge: f64,
    pub cell_count: usize,
    pub metrics: Vec<MetricComparison>,
    pub reference: Vec<MetricSeries>,
    pub candidate: Vec<MetricSeries>,
}

impl ComparisonResult {
    pub fn metric(&self, m: Metric) -> &MetricComparison {
        self.metrics
            .iter()
            .find(|c| c.metric == m)
            .expect("all metrics computed")
    }

    /// Long-format rows `(network, cell_id, metric, value)`.
    pub fn cell_rows(&self) -> Vec<(&'static str, String, Metric, f64)> {
        let mut rows = Vec::new();
        for (label, series) in [("reference", &self.reference), ("candidate", &self.candidate)] {
            for s in series {
                for (id, &v) in &s.values {
                    rows.push((label, id.to_string(), s.metric, v));
                }
            }
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridParams {
    pub edge: f64,
    pub continuity: ContinuityParams,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            edge: DEFAULT_GRID_EDGE,
            continuity: ContinuityParams::default(),
        }
    }
}

/// Measures both networks on a grid over their joint extent and compares
/// every metric (p = reference, q = candidate).
pub fn compare_networks(reference: &Network, candidate: &Network, params: &GridParams) -> Result<ComparisonResult> {
    if let (Some(a), Some(b)) = (reference.crs(), candidate.crs()) {
        if a != b {
            return Err(Error::CrsMismatch(a.to_owned(), b.to_owned()));
        }
    }
    let mut extent = Bbox::empty();
    for n in [reference, candidate] {
        if !n.is_empty() {
            extent = extent.union(&n.bbox());
        }
    }
    let grid = tile_extent(extent, params.edge)?;
    let rs = cell_metrics(reference, &grid, &params.continuity);
    let cs = cell_metrics(candidate, &grid, &params.continuity);
    let metrics = rs
        .iter()
        .zip(&cs)
        .map(|(p, q)| {
            let (pearson, spearman) = rank_correlations(p, q).unwrap_or((None, None));
            Ok(MetricComparison {
                metric: p.metric,
                d: euclidean_distance(p, q)?,
                xi: chatterjee_xi(p, q)?,
                pearson,
                spearman,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonResult {
        grid_edge: params.edge,
        cell_count: grid.cells.len(),
        metrics,
        reference: rs,
        candidate: cs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[f64]) -> MetricSeries {
        MetricSeries::from_values(Metric::EdgeCount, v)
    }

    fn km() -> HexGrid {
        tile_extent(Bbox::of([Coord::new(0.0, 0.0), Coord::new(1000.0, 1000.0)]), 200.0).unwrap()
    }

    #[test]
    fn square_km_cell_count() {
        let g = km();
        assert!((10..=16).contains(&g.cells.len()), "{}", g.cells.len());
        let total: f64 = g
            .cells
            .iter()
            .map(|c| ring_area(&c.polygon[..c.polygon.len() - 1]))
            .sum();
        assert!((total - 1e6).abs() < 1e-3, "{total}");
        let again = km();
        let ids: Vec<CellId> = g.cells.iter().map(|c| c.id).collect();
        assert_eq!(ids, again.cells.iter().map(|c| c.id).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_extent() {
        let flat = Bbox::of([Coord::new(0.0, 0.0), Coord::new(10.0, 0.0)]);
        assert!(matches!(tile_extent(flat, 200.0), Err(Error::EmptyExtent)));
        assert!(matches!(tile_extent(Bbox::empty(), 200.0), Err(Error::EmptyExtent)));
    }

    #[test]
    fn boundary_points_go_right_and_up() {
        let g = km();
        // shared horizontal side of cells (0,0) and (0,1)
        let p = Coord::new(0.0, SQRT3 * 100.0);
        assert_eq!(g.cell_of(p), Some(CellId { col: 0, row: 1 }));
    }

    #[test]
    fn edge_inside_one_cell() {
        let net = Network::from_lines(vec![vec![Coord::new(450.0, 300.0), Coord::new(550.0, 300.0)]]);
        let g = km();
        let m = cell_metrics(&net, &g, &ContinuityParams::default());
        let id = g.cell_of(Coord::new(500.0, 300.0)).unwrap();
        let v = |k: usize| m[k].values[&id];
        assert_eq!(v(0), 1.0);
        assert_eq!(v(1), 2.0);
        assert_eq!(v(2), 1.0);
        assert!((v(3) - 100.0).abs() < 1e-9);
        assert_eq!(v(4), 1.0);
    }

    #[test]
    fn lengths_add_up() {
        let net = Network::from_lines(vec![
            vec![Coord::new(0.0, 0.0), Coord::new(1000.0, 1000.0)],
            vec![Coord::new(0.0, 500.0), Coord::new(1000.0, 500.0)],
            // along a horizontal hexagon side
            vec![Coord::new(0.0, SQRT3 * 100.0), Coord::new(100.0, SQRT3 * 100.0)],
        ]);
        let g = km();
        let m = cell_metrics(&net, &g, &ContinuityParams::default());
        let total: f64 = m[3].values.values().sum();
        assert!((total - net.total_length()).abs() / net.total_length() < 1e-9);
    }

    #[test]
    fn whole_stroke_lengths() {
        // 300 m stroke that dips 10 m into the right-most cells
        let net = Network::from_lines(vec![vec![Coord::new(700.0, 500.0), Coord::new(1000.0, 500.0)]]);
        let g = km();
        let m = cell_metrics(&net, &g, &ContinuityParams::default());
        for id in g.cells.iter().map(|c| c.id) {
            if m[2].values[&id] > 0.0 {
                assert_eq!(m[4].values[&id], 1.0);
                assert!((m[5].values[&id] - 300.0).abs() < 1e-9);
                assert!((m[6].values[&id] - 300.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            euclidean_distance(&series(&[1.0, 2.0]), &series(&[4.0, 6.0])).unwrap(),
            5.0
        );
        assert_eq!(
            euclidean_distance(&series(&[1.0, 2.0]), &series(&[1.0, 2.0])).unwrap(),
            0.0
        );
        let mut other = series(&[1.0]);
        other.grid.edge = 2.0;
        assert!(matches!(
            euclidean_distance(&series(&[1.0]), &other),
            Err(Error::GridMismatch)
        ));
        // missing cells count as zero
        assert_eq!(euclidean_distance(&series(&[3.0, 4.0]), &series(&[])).unwrap(), 5.0);
    }

    #[test]
    fn xi_examples() {
        let p = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(chatterjee_xi(&p, &p).unwrap(), 0.5);
        let q = series(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        assert_eq!(chatterjee_xi(&p, &q).unwrap(), 0.5);
        assert!(matches!(
            chatterjee_xi(&series(&[1.0]), &series(&[1.0])),
            Err(Error::TooFewObservations { got: 1, .. })
        ));
    }

    #[test]
    fn correlation_examples() {
        let p = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let (r, s) = rank_correlations(&p, &p).unwrap();
        assert!((r.unwrap() - 1.0).abs() < 1e-12 && (s.unwrap() - 1.0).abs() < 1e-12);
        let neg = series(&[-1.0, -2.0, -3.0, -4.0, -5.0]);
        let (r, s) = rank_correlations(&p, &neg).unwrap();
        assert!((r.unwrap() + 1.0).abs() < 1e-12 && (s.unwrap() + 1.0).abs() < 1e-12);
        let cube = series(&[1.0, 8.0, 27.0, 64.0, 125.0]);
        let (r, s) = rank_correlations(&p, &cube).unwrap();
        assert!(r.unwrap() < 1.0);
        assert!((s.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(average_ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn compare_with_self_and_empty() {
        let net = Network::from_lines(vec![
            vec![Coord::new(0.0, 0.0), Coord::new(800.0, 600.0)],
            vec![Coord::new(0.0, 600.0), Coord::new(800.0, 0.0)],
        ]);
        let r = compare_networks(&net, &net, &GridParams::default()).unwrap();
        assert!(r.metrics.iter().all(|m| m.d == 0.0));
        let r = compare_networks(&net, &Network::default(), &GridParams::default()).unwrap();
        for (m, s) in r.metrics.iter().zip(&r.reference) {
            let norm = s.values.values().map(|v| v * v).sum::<f64>().sqrt();
            assert!((m.d - norm).abs() < 1e-9);
        }
        let a = net.clone().with_crs(Some("EPSG:3857".into()));
        let b = net.with_crs(Some("EPSG:27700".into()));
        assert!(matches!(
            compare_networks(&a, &b, &GridParams::default()),
            Err(Error::CrsMismatch(..))
        ));
    }
}
