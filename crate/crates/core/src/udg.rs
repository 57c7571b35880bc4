//! Planar point sets and their unit disk graphs.
//!
//! Two distinct points are adjacent iff their Euclidean distance is at most 1,
//! and the edge weight is that distance. Two metrics live on the graph: the
//! weighted shortest-path metric and the hop (BFS) metric.

use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Squared-distance slack for the unit threshold.
pub const EDGE_EPS: f64 = 1e-12;

/// Sentinel hop distance for unreachable vertices.
pub const UNREACHABLE_HOPS: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(id: usize, x: f64, y: f64) -> Self {
        Point { id, x, y }
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        libm::sqrt(self.dist2(other))
    }
}

#[derive(Debug, Clone)]
pub struct UnitDiskGraph {
    points: Vec<Point>,
    /// Per vertex, neighbors sorted by id with their edge weight.
    adjacency: Vec<Vec<(usize, f64)>>,
    component: Vec<usize>,
    components: usize,
}

#[inline]
fn cell_of(p: &Point) -> (i64, i64) {
    (libm::floor(p.x) as i64, libm::floor(p.y) as i64)
}

/// Builds the exact unit disk graph of `points`.
///
/// Points are bucketed into unit cells so each point only scans the 3x3 block
/// of cells around it. Ids must be `0..n` in order.
pub fn build_udg(points: &[Point]) -> Result<UnitDiskGraph> {
    if points.is_empty() {
        return Err(Error::InvalidInput("point set is empty".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.id != i {
            return Err(Error::InvalidInput(alloc::format!(
                "point ids must be contiguous from 0; found id {} at position {}",
                p.id,
                i
            )));
        }
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::InvalidInput(alloc::format!(
                "point {} has non-finite coordinates",
                i
            )));
        }
    }

    let mut buckets: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for p in points {
        buckets.entry(cell_of(p)).or_default().push(p.id);
    }

    let n = points.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for p in points {
        let (cx, cy) = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = buckets.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &q in bucket {
                    if q <= p.id {
                        continue;
                    }
                    let d2 = p.dist2(&points[q]);
                    if d2 == 0.0 {
                        return Err(Error::CoincidentPoints(p.id, q));
                    }
                    if d2 <= 1.0 + EDGE_EPS {
                        let w = libm::sqrt(d2).min(1.0);
                        adjacency[p.id].push((q, w));
                        adjacency[q].push((p.id, w));
                    }
                }
            }
        }
    }
    for nbrs in adjacency.iter_mut() {
        nbrs.sort_by_key(|&(v, _)| v);
    }
    Ok(UnitDiskGraph::from_parts(points.to_vec(), adjacency))
}

impl UnitDiskGraph {
    /// Convenience constructor from bare coordinates; ids follow input order.
    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Self> {
        let points: Vec<Point> = coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Point::new(i, x, y))
            .collect();
        build_udg(&points)
    }

    fn from_parts(points: Vec<Point>, adjacency: Vec<Vec<(usize, f64)>>) -> Self {
        let n = points.len();
        let mut component = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            component[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &adjacency[u] {
                    if component[v] == usize::MAX {
                        component[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        UnitDiskGraph {
            points,
            adjacency,
            component,
            components: count,
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, v: usize) -> &Point {
        &self.points[v]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .filter(move |&&(v, _)| v > u)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| self.adjacency[u][i].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn euclid(&self, u: usize, v: usize) -> f64 {
        self.points[u].dist(&self.points[v])
    }

    pub fn component_id(&self, v: usize) -> usize {
        self.component[v]
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn is_connected(&self) -> bool {
        self.components <= 1
    }

    /// Axis-aligned bounding box `(min_x, min_y, max_x, max_y)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut bb = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            bb.0 = bb.0.min(p.x);
            bb.1 = bb.1.min(p.y);
            bb.2 = bb.2.max(p.x);
            bb.3 = bb.3.max(p.y);
        }
        bb
    }

    /// Induced subgraph on `subset` (which must be sorted and deduplicated).
    ///
    /// Returns the subgraph with local ids `0..subset.len()` and the map from
    /// local to host ids. The induced subgraph of a unit disk graph is the unit
    /// disk graph of the retained points.
    pub fn induced(&self, subset: &[usize]) -> (UnitDiskGraph, Vec<usize>) {
        debug_assert!(subset.windows(2).all(|w| w[0] < w[1]));
        let mut local = BTreeMap::new();
        for (i, &v) in subset.iter().enumerate() {
            local.insert(v, i);
        }
        let points = subset
            .iter()
            .enumerate()
            .map(|(i, &v)| Point::new(i, self.points[v].x, self.points[v].y))
            .collect();
        let adjacency = subset
            .iter()
            .map(|&v| {
                self.adjacency[v]
                    .iter()
                    .filter_map(|&(u, w)| local.get(&u).map(|&lu| (lu, w)))
                    .collect()
            })
            .collect();
        (UnitDiskGraph::from_parts(points, adjacency), subset.to_vec())
    }
}

/// Shortest-path data from one source under both metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub source: usize,
    /// Weighted shortest-path distance (`f64::INFINITY` when unreachable).
    pub weighted: Vec<f64>,
    /// Hop distance (`UNREACHABLE_HOPS` when unreachable).
    pub hops: Vec<u32>,
    /// Parent in the tree of the operation that produced this field.
    pub parent: Vec<Option<usize>>,
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    label: usize,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (dist, label, vertex).
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.label.cmp(&self.label))
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a multi-source Dijkstra.
#[derive(Debug, Clone)]
pub struct NearestSource {
    pub dist: Vec<f64>,
    /// Index into the `sources` slice of the nearest source, ties to the
    /// smaller source vertex id.
    pub label: Vec<Option<usize>>,
    pub parent: Vec<Option<usize>>,
}

/// Multi-source Dijkstra, optionally stopping at `cutoff`.
///
/// Vertices farther than `cutoff` keep distance infinity.
pub fn nearest_source(g: &UnitDiskGraph, sources: &[usize], cutoff: f64) -> NearestSource {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut label_vertex = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for (idx, &s) in sources.iter().enumerate() {
        if dist[s] > 0.0 || s < label_vertex[s] {
            dist[s] = 0.0;
            label[s] = Some(idx);
            label_vertex[s] = s;
        }
    }
    for &s in sources {
        heap.push(HeapItem {
            dist: 0.0,
            label: s,
            vertex: s,
        });
    }
    while let Some(HeapItem { dist: d, label: lv, vertex: u }) = heap.pop() {
        if done[u] || d > dist[u] || (d == dist[u] && lv != label_vertex[u]) {
            continue;
        }
        done[u] = true;
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd > cutoff {
                continue;
            }
            let better = nd < dist[v] || (nd == dist[v] && !done[v] && lv < label_vertex[v]);
            if better {
                dist[v] = nd;
                label[v] = label[u];
                label_vertex[v] = lv;
                parent[v] = Some(u);
                heap.push(HeapItem {
                    dist: nd,
                    label: lv,
                    vertex: v,
                });
            }
        }
    }
    NearestSource {
        dist,
        label,
        parent,
    }
}

/// Single-source weighted distances only (no labels).
pub fn dijkstra(g: &UnitDiskGraph, src: usize) -> Vec<f64> {
    nearest_source(g, &[src], f64::INFINITY).dist
}

/// Hop distances by levelled BFS; each vertex's parent is its smallest-id
/// neighbor on the previous level.
pub fn bfs_levels(g: &UnitDiskGraph, src: usize) -> (Vec<u32>, Vec<Option<usize>>) {
    let n = g.n();
    let mut hops = vec![UNREACHABLE_HOPS; n];
    let mut parent = vec![None; n];
    hops[src] = 0;
    let mut frontier = vec![src];
    let mut level = 0u32;
    while !frontier.is_empty() {
        frontier.sort_unstable();
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, _) in g.neighbors(u) {
                if hops[v] == UNREACHABLE_HOPS {
                    hops[v] = level + 1;
                    parent[v] = Some(u);
                    next.push(v);
                }
            }
        }
        frontier = next;
        level += 1;
    }
    (hops, parent)
}

/// Exact weighted shortest paths from `src`, with the shortest-path tree as
/// parent and true hop distances alongside.
pub fn weighted_sssp(g: &UnitDiskGraph, src: usize) -> DistanceField {
    let ns = nearest_source(g, &[src], f64::INFINITY);
    let (hops, _) = bfs_levels(g, src);
    DistanceField {
        source: src,
        weighted: ns.dist,
        hops,
        parent: ns.parent,
    }
}

/// Hop distances from `src` with a deterministic BFS tree as parent and true
/// weighted distances alongside.
pub fn hop_bfs(g: &UnitDiskGraph, src: usize) -> DistanceField {
    let (hops, parent) = bfs_levels(g, src);
    DistanceField {
        source: src,
        weighted: dijkstra(g, src),
        hops,
        parent,
    }
}

/// Maximum host-graph distance between two members of `subset`.
pub fn weak_diameter(host: &UnitDiskGraph, subset: &[usize]) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, &u) in subset.iter().enumerate() {
        if i + 1 == subset.len() {
            break;
        }
        let d = dijkstra(host, u);
        for &v in &subset[i + 1..] {
            diam = diam.max(d[v]);
        }
    }
    diam
}

/// All vertices within weighted distance `radius` of some seed, sorted.
pub fn r_neighborhood(g: &UnitDiskGraph, seeds: &[usize], radius: f64) -> Vec<usize> {
    if seeds.is_empty() {
        return Vec::new();
    }
    let ns = nearest_source(g, seeds, radius + EDGE_EPS);
    (0..g.n()).filter(|&v| ns.dist[v] <= radius + EDGE_EPS).collect()
}

/// Dense all-pairs weighted distances (row-major `n * n`).
pub fn all_pairs(g: &UnitDiskGraph) -> Vec<f64> {
    let n = g.n();
    let mut out = Vec::with_capacity(n * n);
    for u in 0..n {
        out.extend(dijkstra(g, u));
    }
    out
}

/// Walks `parent` pointers from `v` back to the root; returns root-first.
pub fn tree_path(parent: &[Option<usize>], v: usize) -> Vec<usize> {
    let mut path = vec![v];
    let mut cur = v;
    while let Some(p) = parent[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points_one_edge() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (0.5, 0.0), (2.0, 0.0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(0.5));
        assert!(!g.has_edge(1, 2));
        assert_eq!(g.component_count(), 2);
    }

    #[test]
    fn singleton() {
        let g = UnitDiskGraph::from_coords(&[(3.0, -1.0)]).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_connected());
    }

    #[test]
    fn coincident_points_rejected() {
        let err = UnitDiskGraph::from_coords(&[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]).unwrap_err();
        assert_eq!(err, Error::CoincidentPoints(0, 2));
    }

    #[test]
    fn non_contiguous_ids_rejected() {
        let pts = [Point::new(0, 0.0, 0.0), Point::new(2, 1.0, 0.0)];
        assert!(matches!(build_udg(&pts), Err(Error::InvalidInput(_))));
        assert!(build_udg(&[]).is_err());
        assert!(build_udg(&[Point::new(0, f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn exact_unit_distance_is_an_edge() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (1.0, 0.0), (2.0 + 1e-9, 0.0)]).unwrap();
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 2));
    }

    #[test]
    fn path_distances() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (0.9, 0.0), (1.8, 0.0)]).unwrap();
        let f = weighted_sssp(&g, 0);
        assert!((f.weighted[2] - 1.8).abs() < 1e-12);
        assert_eq!(f.hops[2], 2);
        let b = hop_bfs(&g, 0);
        assert_eq!(b.hops[2], 2);
        assert_eq!(b.parent[2], Some(1));
    }

    #[test]
    fn disconnected_pair_is_infinite() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (5.0, 0.0)]).unwrap();
        let f = weighted_sssp(&g, 0);
        assert!(f.weighted[1].is_infinite());
        assert_eq!(f.hops[1], UNREACHABLE_HOPS);
        assert!(weak_diameter(&g, &[0, 1]).is_infinite());
    }

    #[test]
    fn star_leaves_one_hop() {
        let mut coords = vec![(0.0, 0.0)];
        for k in 0..5 {
            let a = k as f64 * core::f64::consts::TAU / 5.0;
            coords.push((0.9 * libm::cos(a), 0.9 * libm::sin(a)));
        }
        let g = UnitDiskGraph::from_coords(&coords).unwrap();
        let b = hop_bfs(&g, 0);
        assert!(b.hops[1..].iter().all(|&h| h == 1));
    }

    #[test]
    fn bfs_parent_is_smallest_previous_level_neighbor() {
        // 0 adjacent to 1 and 2; both adjacent to 3.
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (0.8, 0.5), (0.8, -0.5), (1.6, 0.0)])
            .unwrap();
        let (hops, parent) = bfs_levels(&g, 0);
        assert_eq!(hops, vec![0, 1, 1, 2]);
        assert_eq!(parent[3], Some(1));
    }

    #[test]
    fn weak_diameter_small_cases() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (0.7, 0.0), (1.4, 0.0)]).unwrap();
        assert_eq!(weak_diameter(&g, &[1]), 0.0);
        assert!((weak_diameter(&g, &[0, 1]) - 0.7).abs() < 1e-12);
        // Distances measured through the host: 0 and 2 are not adjacent.
        assert!((weak_diameter(&g, &[0, 2]) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn neighborhoods_on_a_chain() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).unwrap();
        assert_eq!(r_neighborhood(&g, &[0], 0.0), vec![0]);
        assert_eq!(r_neighborhood(&g, &[0], 1.0), vec![0, 1]);
        assert_eq!(r_neighborhood(&g, &[0, 2], 0.5), vec![0, 2]);
    }

    #[test]
    fn nearest_source_ties_go_to_smaller_source() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]).unwrap();
        let ns = nearest_source(&g, &[2, 0], f64::INFINITY);
        // Vertex 1 is equidistant; source vertex 0 (index 1 in the slice) wins.
        assert_eq!(ns.label[1], Some(1));
        assert_eq!(ns.label[2], Some(0));
    }

    #[test]
    fn induced_keeps_weights() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (0.6, 0.0), (1.2, 0.0), (5.0, 5.0)])
            .unwrap();
        let (h, map) = g.induced(&[0, 2, 3]);
        assert_eq!(map, vec![0, 2, 3]);
        assert_eq!(h.edge_count(), 0);
        let (h2, _) = g.induced(&[1, 2]);
        assert!((h2.weight(0, 1).unwrap() - 0.6).abs() < 1e-12);
    }
}
