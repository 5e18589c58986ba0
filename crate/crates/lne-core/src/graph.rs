//! ε-neighbor graphs over samples and shortest-path (inner) distances.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{ambient_distance, AmbientMetric, Point};
use crate::sample::Sample;

/// Weighted neighbor graph over a sample. Edges join pairs within their
/// scale under the sample's ambient metric; weights are ambient distances.
#[derive(Debug, Clone)]
pub struct ProximityGraph {
    pub n: usize,
    /// Representative scale: the largest edge-admission threshold used.
    pub eps: f64,
    adj: Vec<Vec<(u32, f64)>>,
    component: Vec<u32>,
    pub n_components: usize,
}

impl ProximityGraph {
    pub fn neighbors(&self, v: usize) -> &[(u32, f64)] {
        &self.adj[v]
    }

    /// Insert an extra edge (both directions) and refresh the component
    /// labelling. Used to stitch descriptor-known connectivity (junction
    /// passages) across sampling holes.
    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) {
        if i == j || !(weight > 0.0) {
            return;
        }
        self.adj[i].push((j as u32, weight));
        self.adj[j].push((i as u32, weight));
        let (component, n_components) = components_from_adj(&self.adj);
        self.component = component;
        self.n_components = n_components;
    }

    pub fn component_of(&self, v: usize) -> u32 {
        self.component[v]
    }

    pub fn same_component(&self, i: usize, j: usize) -> bool {
        self.component[i] == self.component[j]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }
}

/// Uniform-grid spatial index for ε-range queries.
struct Grid {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<u32>>,
}

// cell indices clamp here; far-apart clamped buckets collide harmlessly
// because candidate pairs are distance-filtered afterwards
const GRID_INDEX_CAP: f64 = 1e15;

fn grid_key(c: f64, cell: f64) -> i64 {
    (c / cell).floor().clamp(-GRID_INDEX_CAP, GRID_INDEX_CAP) as i64
}

impl Grid {
    fn build(points: &[Point], cell: f64) -> Grid {
        let dim = points.first().map(|p| p.dim()).unwrap_or(0);
        let mut buckets: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let key: Vec<i64> = p.coords().iter().map(|c| grid_key(*c, cell)).collect();
            buckets.entry(key).or_default().push(i as u32);
        }
        Grid { cell, dim, buckets }
    }

    fn for_neighbors(&self, p: &Point, mut f: impl FnMut(u32)) {
        let base: Vec<i64> =
            p.coords().iter().map(|c| grid_key(*c, self.cell)).collect();
        let mut offset = vec![-1i64; self.dim];
        loop {
            let key: Vec<i64> = base
                .iter()
                .zip(offset.iter())
                .map(|(b, o)| b.saturating_add(*o))
                .collect();
            if let Some(bucket) = self.buckets.get(&key) {
                for &i in bucket {
                    f(i);
                }
            }
            // advance the mixed-radix counter over {-1,0,1}^dim
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }
}

/// All unordered pairs within `eps` under `metric`.
///
/// For the projective metric the grid uses chordal distance between
/// sign-canonical representatives, which dominates the projective distance,
/// so no pair is missed.
pub fn neighbor_pairs(points: &[Point], metric: AmbientMetric, eps: f64) -> Vec<(u32, u32, f64)> {
    let mut pairs = Vec::new();
    if points.is_empty() {
        return pairs;
    }
    let grid = Grid::build(points, eps.max(1e-300));
    for (i, p) in points.iter().enumerate() {
        let mut cands: Vec<u32> = Vec::new();
        grid.for_neighbors(p, |j| {
            if (j as usize) > i {
                cands.push(j);
            }
        });
        cands.sort_unstable();
        for j in cands {
            let d = ambient_distance(metric, p, &points[j as usize]).unwrap_or(f64::INFINITY);
            if d <= eps {
                pairs.push((i as u32, j, d));
            }
        }
    }
    pairs
}

fn components_from_adj(adj: &[Vec<(u32, f64)>]) -> (Vec<u32>, usize) {
    let n = adj.len();
    let mut comp = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        comp[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if comp[w as usize] == u32::MAX {
                    comp[w as usize] = next;
                    stack.push(w as usize);
                }
            }
        }
        next += 1;
    }
    (comp, next as usize)
}

/// Build the ε-neighbor graph over a sample: edges are exactly the pairs
/// within `eps` under the sample's ambient metric.
pub fn build_graph(s: &Sample, eps: f64) -> Result<ProximityGraph> {
    if !(eps > 0.0) {
        return Err(Error::Scale("graph scale must be positive".into()));
    }
    let n = s.points.len();
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (i, j, d) in neighbor_pairs(&s.points, s.metric, eps) {
        if i == j || d <= 0.0 {
            continue;
        }
        adj[i as usize].push((j, d));
        adj[j as usize].push((i, d));
    }
    if n > 1 && adj.iter().all(|a| a.is_empty()) {
        return Err(Error::Scale(format!(
            "graph fully disconnected at scale {eps}; increase the scale"
        )));
    }
    let (component, n_components) = components_from_adj(&adj);
    Ok(ProximityGraph { n, eps, adj, component, n_components })
}

/// Median nearest-neighbor spacing of a sample (ambient metric), estimated
/// from grid neighborhoods with a doubling fallback for isolated points.
pub fn median_nn_spacing(points: &[Point], metric: AmbientMetric) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    // probe with a scale from a coarse bounding-box heuristic, then widen
    let mut lo = vec![f64::INFINITY; points[0].dim()];
    let mut hi = vec![f64::NEG_INFINITY; points[0].dim()];
    for p in points {
        for (k, c) in p.coords().iter().enumerate() {
            lo[k] = lo[k].min(*c);
            hi[k] = hi[k].max(*c);
        }
    }
    let diameter = crate::geometry::dist(&lo, &hi);
    if !(diameter > 1e-300) {
        return 0.0;
    }
    let mut probe = diameter / (n as f64).powf(1.0 / points[0].dim() as f64) * 2.0;
    for _ in 0..48 {
        let mut nearest = vec![f64::INFINITY; n];
        let grid = Grid::build(points, probe);
        for (i, p) in points.iter().enumerate() {
            grid.for_neighbors(p, |j| {
                if j as usize != i {
                    let d = ambient_distance(metric, p, &points[j as usize])
                        .unwrap_or(f64::INFINITY);
                    if d < nearest[i] {
                        nearest[i] = d;
                    }
                }
            });
        }
        let mut finite: Vec<f64> = nearest.iter().copied().filter(|d| d.is_finite()).collect();
        if finite.len() >= n / 2 + 1 {
            finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return finite[finite.len() / 2];
        }
        probe *= 2.0;
    }
    diameter
}

/// Graph scale policy: 3 × median nearest-neighbor spacing.
pub fn auto_eps(points: &[Point], metric: AmbientMetric) -> f64 {
    3.0 * median_nn_spacing(points, metric)
}

/// Per-band scale factor for the multiscale builder. More generous than the
/// flat-ε policy: a band's spacing gradient plus sampling jitter can open
/// gaps near twice the median without any geometric significance.
const MULTISCALE_EPS_FACTOR: f64 = 4.0;

/// Multiscale neighbor graph keyed by the sample's radial tags.
pub fn build_graph_multiscale(s: &Sample) -> Result<ProximityGraph> {
    build_graph_multiscale_keyed(s, &s.radial)
}

/// Multiscale neighbor graph for samples spanning several scale decades:
/// points are binned by the dyadic band of their `key` value, each band gets
/// ε_b = 3 × its median nearest-neighbor spacing, and pairs are admitted at
/// the larger of the two bands' scales. Within any one band this is exactly
/// the ε-graph; across bands it stitches adjacent scales.
pub fn build_graph_multiscale_keyed(s: &Sample, key: &[f64]) -> Result<ProximityGraph> {
    let n = s.points.len();
    if n < 2 {
        return Err(Error::Scale("multiscale graph needs at least two points".into()));
    }
    debug_assert_eq!(key.len(), n);
    let r_min = key.iter().copied().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
    let r_max = key.iter().copied().fold(0.0f64, f64::max);
    if !r_min.is_finite() || r_max <= 0.0 {
        return build_graph(s, auto_eps(&s.points, s.metric));
    }
    let band_of = |r: f64| -> i32 {
        if r <= 0.0 {
            0
        } else {
            (r / r_min).log2().floor() as i32
        }
    };
    let n_bands = band_of(r_max) + 1;
    let mut band_eps = vec![0.0f64; n_bands as usize + 1];
    let mut band_points: Vec<Vec<usize>> = vec![Vec::new(); n_bands as usize + 1];
    for (i, &r) in key.iter().enumerate() {
        band_points[band_of(r).clamp(0, n_bands) as usize].push(i);
    }
    for (b, idxs) in band_points.iter().enumerate() {
        if idxs.len() >= 2 {
            let pts: Vec<Point> = idxs.iter().map(|&i| s.points[i].clone()).collect();
            band_eps[b] = MULTISCALE_EPS_FACTOR * median_nn_spacing(&pts, s.metric);
        }
    }
    // propagate a scale into sparse bands from their neighbors
    for b in 0..band_eps.len() {
        if band_eps[b] == 0.0 {
            let left = (0..b).rev().find(|&k| band_eps[k] > 0.0).map(|k| band_eps[k]);
            let right = (b + 1..band_eps.len()).find(|&k| band_eps[k] > 0.0).map(|k| band_eps[k]);
            band_eps[b] = left.or(right).unwrap_or(0.0);
        }
    }
    let global_eps = band_eps.iter().copied().fold(0.0f64, f64::max);
    if global_eps == 0.0 {
        return Err(Error::Scale("could not estimate any band scale".into()));
    }
    let grid = Grid::build(&s.points, global_eps);
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (i, p) in s.points.iter().enumerate() {
        let bi = band_of(key[i]).clamp(0, n_bands) as usize;
        let mut cands: Vec<u32> = Vec::new();
        grid.for_neighbors(p, |j| {
            if (j as usize) > i {
                cands.push(j);
            }
        });
        cands.sort_unstable();
        for j in cands {
            let ju = j as usize;
            let bj = band_of(key[ju]).clamp(0, n_bands) as usize;
            if (bi as i64 - bj as i64).abs() > 1 {
                continue;
            }
            let eps = band_eps[bi].max(band_eps[bj]);
            let d = ambient_distance(s.metric, p, &s.points[ju]).unwrap_or(f64::INFINITY);
            if d > 0.0 && d <= eps {
                adj[i].push((j, d));
                adj[ju].push((i as u32, d));
            }
        }
    }
    if adj.iter().all(|a| a.is_empty()) {
        return Err(Error::Scale("multiscale graph fully disconnected".into()));
    }
    let (component, n_components) = components_from_adj(&adj);
    Ok(ProximityGraph { n, eps: global_eps, adj, component, n_components })
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    v: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap by distance, ties by vertex for determinism
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then(other.v.cmp(&self.v))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths; unreachable vertices get +∞.
pub fn shortest_paths(g: &ProximityGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry { dist: 0.0, v: source as u32 });
    while let Some(HeapEntry { dist: d, v }) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for &(w, len) in &g.adj[v as usize] {
            let nd = d + len;
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push(HeapEntry { dist: nd, v: w });
            }
        }
    }
    dist
}

/// Graph inner distance between two vertices; +∞ across components.
pub fn inner_distance(g: &ProximityGraph, i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    if !g.same_component(i, j) {
        return f64::INFINITY;
    }
    shortest_paths(g, i)[j]
}

/// Rows of shortest-path distances from chosen source vertices.
#[derive(Debug, Clone)]
pub struct GeodesicTable {
    pub sources: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl GeodesicTable {
    pub fn compute(g: &ProximityGraph, sources: &[usize]) -> GeodesicTable {
        let rows = sources.iter().map(|&s| shortest_paths(g, s)).collect();
        GeodesicTable { sources: sources.to_vec(), rows }
    }

    /// CSV matrix, one row per source; ∞ is written as the literal `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (s, row) in self.sources.iter().zip(self.rows.iter()) {
            out.push_str(&format!("{s}"));
            for d in row {
                if d.is_finite() {
                    out.push_str(&format!(",{d}"));
                } else {
                    out.push_str(",inf");
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sample;

    fn cloud(points: Vec<Vec<f64>>) -> Sample {
        let pts: Vec<Point> = points.into_iter().map(|c| Point::new(c).unwrap()).collect();
        Sample::from_points(pts, AmbientMetric::Euclidean(2))
    }

    #[test]
    fn two_points_one_edge() {
        let s = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        let g = build_graph(&s, 2.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0)[0].1, 1.0);
    }

    #[test]
    fn scale_error_when_isolated() {
        let s = cloud(vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![20.0, 0.0]]);
        assert!(matches!(build_graph(&s, 0.5), Err(Error::Scale(_))));
    }

    #[test]
    fn circle_cycle_at_three_spacings() {
        let n = 100;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let s = cloud(pts);
        let eps = 3.0 * (2.0 * std::f64::consts::PI / n as f64);
        let g = build_graph(&s, eps).unwrap();
        assert_eq!(g.n_components, 1);
        assert!(g.neighbors(0).len() >= 2);
        // antipodal geodesic close to π
        let d = inner_distance(&g, 0, n / 2);
        assert!((d - std::f64::consts::PI).abs() / std::f64::consts::PI < 0.03, "d = {d}");
    }

    #[test]
    fn inner_distance_basics() {
        let s = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![50.0, 0.0]]);
        let g = build_graph(&s, 1.5).unwrap();
        assert_eq!(inner_distance(&g, 0, 0), 0.0);
        assert_eq!(inner_distance(&g, 0, 2), 2.0);
        assert!(inner_distance(&g, 0, 3).is_infinite());
    }

    #[test]
    fn geodesic_table_csv_uses_inf() {
        let s = cloud(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![50.0, 0.0]]);
        let g = build_graph(&s, 1.5).unwrap();
        let t = GeodesicTable::compute(&g, &[0]);
        let csv = t.to_csv();
        assert!(csv.contains("inf"));
        assert!(csv.starts_with("0,0,1,"));
    }

    #[test]
    fn inner_at_least_outer() {
        let pts: Vec<Vec<f64>> = (0..60)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 60.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let s = cloud(pts.clone());
        let g = build_graph(&s, 0.4).unwrap();
        let d0 = shortest_paths(&g, 0);
        for (j, d) in d0.iter().enumerate() {
            if d.is_finite() {
                let outer = crate::geometry::dist(&pts[0], &pts[j]);
                assert!(*d >= outer - 1e-9);
            }
        }
    }
}
