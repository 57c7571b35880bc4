use std::collections::{BTreeSet, VecDeque};

use udgfl_core::separator::Separator;
use udgfl_core::udg::UnitDiskGraph;

use super::bellman_ford;

pub fn hop_dist(g: &UnitDiskGraph, s: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; g.n()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for v in 0..g.n() {
            if g.euclid(u, v) * g.euclid(u, v) <= 1.0 + 1e-12 && v != u && d[v] == usize::MAX {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

/// Independent validity check written from the separator contract.
pub fn oracle_valid(g: &UnitDiskGraph, x: &[usize], sep: &Separator) -> bool {
    let n = g.n();
    if sep.source >= n {
        return false;
    }
    let hops = hop_dist(g, sep.source);
    for p in [&sep.path_x, &sep.path_y] {
        if p.first() != Some(&sep.source) || p.iter().any(|&v| v >= n) {
            return false;
        }
        if p.windows(2).any(|w| !g.has_edge(w[0], w[1])) || hops[*p.last().unwrap()] != p.len() - 1 {
            return false;
        }
    }
    let path: BTreeSet<usize> = sep.path_x.iter().chain(&sep.path_y).copied().collect();
    let s1: BTreeSet<usize> = sep.side1.iter().copied().collect();
    let s2: BTreeSet<usize> = sep.side2.iter().copied().collect();
    if s1.len() != sep.side1.len() || s2.len() != sep.side2.len() {
        return false;
    }
    if !s1.is_disjoint(&s2) || !s1.is_disjoint(&path) || !s2.is_disjoint(&path) {
        return false;
    }
    if s1.len() + s2.len() + path.len() != n || s1.iter().chain(&s2).any(|&v| v >= n) {
        return false;
    }
    let limit = (2 * x.len()).div_ceil(3);
    if x.iter().filter(|v| s1.contains(v)).count() > limit || x.iter().filter(|v| s2.contains(v)).count() > limit {
        return false;
    }
    let mut certified = BTreeSet::new();
    for c in &sep.certificates {
        if c.a >= n || c.b >= n || !g.has_edge(c.a, c.b) || !path.contains(&c.witness) {
            return false;
        }
        let d = bellman_ford(g, c.witness);
        if (d[c.a] - c.da).abs() > 1e-9 || (d[c.b] - c.db).abs() > 1e-9 || d[c.a] > 4.0 + 1e-9 || d[c.b] > 4.0 + 1e-9 {
            return false;
        }
        certified.insert((c.a.min(c.b), c.a.max(c.b)));
    }
    g.edges().all(|(u, v, _)| {
        let crossing = (s1.contains(&u) && s2.contains(&v)) || (s2.contains(&u) && s1.contains(&v));
        !crossing || certified.contains(&(u, v))
    })
}
