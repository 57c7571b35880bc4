//! Euclidean 1/8-net over a padded sub-instance and its net graph G'.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::udg::{all_pairs, UnitDiskGraph};

/// Net spacing and ball radius.
pub const NET_RADIUS: f64 = 0.125;

/// Constant in the recorded size bound `|V'| <= 64 (2Γ + 1)^4`.
pub const NET_SIZE_CONSTANT: f64 = 64.0;

#[derive(Debug, Clone)]
pub struct NetGraph {
    pub host: Arc<UnitDiskGraph>,
    /// Greedy net in processing order (host ids).
    pub base: Vec<usize>,
    /// Vertices added by augmentation, in order added (host ids).
    pub augmented: Vec<usize>,
    /// Center pairs `(A, B)` that required a witness edge.
    pub augmented_pairs: Vec<(usize, usize)>,
    /// V', sorted host ids; net index `i` is `vertices[i]`.
    pub vertices: Vec<usize>,
    /// Ball center (host id) of every host vertex.
    pub ball_of: Vec<usize>,
    /// G': unit disk graph over V' in net indices.
    pub graph: UnitDiskGraph,
    /// All-pairs distances of G', row-major.
    pub dist: Vec<f64>,
}

impl NetGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, host: usize) -> Option<usize> {
        self.vertices.binary_search(&host).ok()
    }

    /// Net index of the ball center of host vertex `v`.
    pub fn ball_index(&self, v: usize) -> usize {
        self.index_of(self.ball_of[v]).expect("ball center is a net vertex")
    }

    pub fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.len() + b]
    }

    /// Largest finite distance in G'.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max)
    }

    /// `64 (2Γ + 1)^4`.
    pub fn size_bound(gamma: f64) -> f64 {
        NET_SIZE_CONSTANT * libm::pow(2.0 * gamma + 1.0, 4.0)
    }
}

struct Buckets {
    cells: BTreeMap<(i64, i64), Vec<usize>>,
}

impl Buckets {
    fn cell(x: f64, y: f64) -> (i64, i64) {
        (libm::floor(x / NET_RADIUS) as i64, libm::floor(y / NET_RADIUS) as i64)
    }

    fn insert(&mut self, g: &UnitDiskGraph, v: usize) {
        let p = g.point(v);
        self.cells.entry(Self::cell(p.x, p.y)).or_default().push(v);
    }

    /// Members strictly closer than the net radius to `v`, in insertion order
    /// within each cell.
    fn near<'a>(&'a self, g: &'a UnitDiskGraph, v: usize) -> impl Iterator<Item = usize> + 'a {
        let p = *g.point(v);
        let (cx, cy) = Self::cell(p.x, p.y);
        (-1..=1)
            .flat_map(move |dx| (-1..=1).map(move |dy| (cx + dx, cy + dy)))
            .filter_map(move |c| self.cells.get(&c))
            .flatten()
            .copied()
            .filter(move |&u| g.point(u).dist(&p) < NET_RADIUS)
    }
}

/// Greedy net in id order, augmentation for cross-ball edges, ball
/// assignment, and G' with its all-pairs distances.
///
/// For every pair of distinct base centers `A`, `B` joined by a host edge
/// between `ball(A)` and `ball(B)` (centers included) and not adjacent
/// themselves, the endpoints of the smallest such edge join V'.
pub fn build_net(host: Arc<UnitDiskGraph>) -> NetGraph {
    let g = &*host;
    let n = g.n();
    let mut buckets = Buckets { cells: BTreeMap::new() };
    let mut base = Vec::new();
    for v in 0..n {
        if buckets.near(g, v).next().is_none() {
            buckets.insert(g, v);
            base.push(v);
        }
    }
    let rank: BTreeMap<usize, usize> = base.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let base_ball: Vec<usize> = (0..n)
        .map(|v| buckets.near(g, v).min_by_key(|u| rank[u]).expect("greedy net covers"))
        .collect();

    let mut in_net = vec![false; n];
    for &v in &base {
        in_net[v] = true;
    }
    let mut witness: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (a, b, _) in g.edges() {
        let (ca, cb) = (base_ball[a], base_ball[b]);
        if ca == cb {
            continue;
        }
        let key = (ca.min(cb), ca.max(cb));
        if witness.contains_key(&key) || g.has_edge(key.0, key.1) {
            continue;
        }
        witness.insert(key, (a, b));
    }
    let mut augmented = Vec::new();
    let mut augmented_pairs = Vec::new();
    for (key, (a, b)) in witness {
        augmented_pairs.push(key);
        for v in [a, b] {
            if !in_net[v] {
                in_net[v] = true;
                augmented.push(v);
            }
        }
    }

    // Balls: base centers first, then augmented ones, first within radius.
    let mut order_rank = vec![usize::MAX; n];
    for (i, &v) in base.iter().chain(augmented.iter()).enumerate() {
        order_rank[v] = i;
    }
    let mut all_centers = Buckets { cells: BTreeMap::new() };
    for &v in base.iter().chain(augmented.iter()) {
        all_centers.insert(g, v);
    }
    let ball_of: Vec<usize> = (0..n)
        .map(|v| all_centers.near(g, v).min_by_key(|&u| order_rank[u]).unwrap())
        .collect();

    let vertices: Vec<usize> = (0..n).filter(|&v| in_net[v]).collect();
    let (graph, _) = g.induced(&vertices);
    let dist = all_pairs(&graph);
    NetGraph {
        host,
        base,
        augmented,
        augmented_pairs,
        vertices,
        ball_of,
        graph,
        dist,
    }
}
