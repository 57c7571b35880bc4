use rand::seq::SliceRandom;
use rand::Rng;
use udgfl_core::dp::*;
use udgfl_core::udg::all_pairs;

use super::{connected_udg, rng};

/// Depth-one problem on a random UDG metric: both leaves share the portal
/// set, every client and facility sits exactly on a site of its leaf.
pub struct TwoLeaf {
    pub problem: DpProblem,
    pub portals: Vec<usize>,
    /// Per leaf: client sites and facility (site, cost) pairs.
    pub clients: [Vec<usize>; 2],
    pub facilities: [Vec<(usize, f64)>; 2],
}

pub fn two_leaf(seed: u64, portal_count: usize, g: f64) -> TwoLeaf {
    let graph = connected_udg(seed, 12);
    let m = graph.n();
    let dist = all_pairs(&graph);
    let diam = dist.iter().copied().fold(0.0, f64::max);
    let mut r = rng(seed);
    let mut ids: Vec<usize> = (0..m).collect();
    ids.shuffle(&mut r);
    let mut portals = ids[..portal_count].to_vec();
    portals.sort_unstable();
    let rest = &ids[portal_count..];
    let half = rest.len() / 2;
    let mut clients: [Vec<usize>; 2] = Default::default();
    let mut facilities: [Vec<(usize, f64)>; 2] = Default::default();
    let mut nodes = vec![DpNode {
        portals: Vec::new(),
        children: Some((1, 2)),
        ..Default::default()
    }];
    for (leaf, own) in [&rest[..half], &rest[half..]].into_iter().enumerate() {
        let mut node = DpNode {
            portals: portals.clone(),
            sites: portals.iter().chain(own.iter()).copied().collect(),
            ..Default::default()
        };
        node.sites.sort_unstable();
        for &v in own {
            if r.gen_bool(0.6) {
                clients[leaf].push(v);
                node.clients.push(DpClient { id: v, at: v, offset: 0.0 });
            }
            if r.gen_bool(0.5) || own.len() == 1 {
                let cost = r.gen_range(0.2..3.0);
                facilities[leaf].push((v, cost));
                node.facilities.push(DpFacility { id: v, at: v, offset: 0.0, cost });
            }
        }
        nodes.push(node);
    }
    let problem = DpProblem {
        nodes,
        root: 0,
        m,
        dist,
        g,
        k: sentinel_for(diam, g).unwrap(),
        vector_cap: DEFAULT_VECTOR_CAP,
    };
    TwoLeaf {
        problem,
        portals,
        clients,
        facilities,
    }
}

pub fn units(p: &DpProblem, d: f64) -> u8 {
    if !d.is_finite() {
        return p.k;
    }
    let u = (d / p.g - 1e-9).ceil().max(0.0);
    if u >= p.k as f64 {
        p.k
    } else {
        u as u8
    }
}

/// Reach vector of an open set at the portals.
pub fn reach_vector(p: &DpProblem, portals: &[usize], open: &[usize]) -> Vec<u8> {
    portals
        .iter()
        .map(|&q| units(p, open.iter().map(|&f| p.d(q, f)).fold(f64::INFINITY, f64::min)))
        .collect()
}

/// Cost of one leaf given its open set and an outside vector.
pub fn leaf_cost(p: &DpProblem, portals: &[usize], clients: &[usize], open: &[(usize, f64)], out: &[u8]) -> f64 {
    let mut cost: f64 = open.iter().map(|f| f.1).sum();
    for &c in clients {
        let mut best = open.iter().map(|f| p.d(c, f.0)).fold(f64::INFINITY, f64::min);
        for (i, &q) in portals.iter().enumerate() {
            if out[i] < p.k {
                best = best.min(p.d(c, q) + out[i] as f64 * p.g);
            }
        }
        cost += best;
    }
    cost
}

pub fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0u32..1 << items.len())
        .map(|mask| (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i].clone()).collect())
        .collect()
}

/// Oracle A: every pair of open sets, each side routing into the other's
/// exact reach vector.
pub fn oracle_open_sets(t: &TwoLeaf) -> (f64, Vec<usize>) {
    let p = &t.problem;
    let mut best = (f64::INFINITY, Vec::new());
    for s1 in subsets(&t.facilities[0]) {
        let ids1: Vec<usize> = s1.iter().map(|f| f.0).collect();
        let r1 = reach_vector(p, &t.portals, &ids1);
        if !p.is_valid(&t.portals, &r1) {
            continue;
        }
        for s2 in subsets(&t.facilities[1]) {
            let ids2: Vec<usize> = s2.iter().map(|f| f.0).collect();
            let r2 = reach_vector(p, &t.portals, &ids2);
            if !p.is_valid(&t.portals, &r2) {
                continue;
            }
            let cost = leaf_cost(p, &t.portals, &t.clients[0], &s1, &r2) + leaf_cost(p, &t.portals, &t.clients[1], &s2, &r1);
            if cost < best.0 {
                let mut open = ids1.clone();
                open.extend(ids2);
                open.sort_unstable();
                best = (cost, open);
            }
        }
    }
    best
}

/// Oracle B: all valid out-vector pairs with the verbatim cross rule, each
/// leaf priced by the base case.
pub fn oracle_vectors(t: &TwoLeaf) -> f64 {
    let p = &t.problem;
    let outs = enumerate_valid_vectors(p, 1, &t.portals).unwrap();
    let mut best = f64::INFINITY;
    for o1 in &outs {
        for o2 in &outs {
            if !check_consistency(&[], &[], &[], &t.portals, o2, o1, &t.portals, o1, o2) {
                continue;
            }
            let c1 = solve_base_case(p, 1, o2, o1).unwrap().cost;
            let c2 = solve_base_case(p, 2, o1, o2).unwrap().cost;
            best = best.min(c1 + c2);
        }
    }
    best
}
