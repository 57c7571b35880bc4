//! Portal dynamic program over a decomposition tree.
//!
//! Vector values are `u8` in `0..=K`. A finite value `v < K` at portal π
//! means distance at most `v * g`; `K` means unconstrained for in-vectors and
//! unavailable for out-vectors. Two values at portals with rounded distance
//! `z = round(D / g)` may differ by at most `z + 1`, with `K` compared as a
//! number.
//!
//! Leaf entries record, for each set of opened sites, the tightest in-vector
//! the set guarantees, with out values no client routes through raised to
//! `K`. Tables are monotone: an entry remains valid when the real outside is
//! at least as good as its out-vector, and dominated entries are dropped.
//!
//! Joins accept `in_child <= out_sibling` on new portals. On portals shared
//! by the parent and both children, a child's out value may be backed by the
//! sibling's in value instead of the parent's out value; the strict equality
//! form of `check_consistency` would hide sibling facilities behind every
//! inherited portal.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::decomp::DecompTree;
use crate::error::{Error, Result};
use crate::fl::{evaluate, FLInstance, FLSolution};
use crate::net::NetGraph;

/// Default cap on valid vectors (and table entries) per node.
pub const DEFAULT_VECTOR_CAP: usize = 1_000_000;

/// Most facility-bearing sites a leaf may enumerate subsets of.
pub const MAX_LEAF_SITES: usize = 20;

pub type Vector = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct DpClient {
    pub id: usize,
    /// Location the client starts from.
    pub at: usize,
    /// Cost already paid to reach `at`.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpFacility {
    pub id: usize,
    pub at: usize,
    /// Distance from `at` to the true facility.
    pub offset: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DpNode {
    /// Portal locations, sorted.
    pub portals: Vec<usize>,
    pub children: Option<(usize, usize)>,
    /// Leaf only: locations points are moved to.
    pub sites: Vec<usize>,
    pub clients: Vec<DpClient>,
    pub facilities: Vec<DpFacility>,
}

/// A DP instance over `m` locations with metric `dist`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpProblem {
    pub nodes: Vec<DpNode>,
    pub root: usize,
    pub m: usize,
    pub dist: Vec<f64>,
    pub g: f64,
    pub k: u8,
    pub vector_cap: usize,
}

impl DpProblem {
    pub fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.m + b]
    }

    /// Rounded distance in units of `g`; `None` when unreachable.
    pub fn z(&self, a: usize, b: usize) -> Option<u32> {
        let d = self.d(a, b);
        d.is_finite().then(|| libm::round(d / self.g) as u32)
    }

    pub fn is_valid(&self, portals: &[usize], v: &[u8]) -> bool {
        if v.len() != portals.len() || v.iter().any(|&x| x > self.k) {
            return false;
        }
        for i in 0..portals.len() {
            for j in 0..i {
                if let Some(z) = self.z(portals[i], portals[j]) {
                    if (v[i] as i64 - v[j] as i64).unsigned_abs() > z as u64 + 1 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `ceil(d / g)` as a vector value; `K` when beyond range.
    fn units(&self, d: f64) -> u8 {
        if !d.is_finite() {
            return self.k;
        }
        let u = libm::ceil(d / self.g - 1e-9).max(0.0);
        if u >= self.k as f64 {
            self.k
        } else {
            u as u8
        }
    }
}

/// All valid vectors over `portals` in lexicographic order; errors once the
/// count exceeds `problem.vector_cap`.
pub fn enumerate_valid_vectors(problem: &DpProblem, node: usize, portals: &[usize]) -> Result<Vec<Vector>> {
    let p = portals.len();
    let k = problem.k;
    let cap = problem.vector_cap;
    let mut out = Vec::new();
    let mut cur = vec![0u8; p];
    fn rec(
        problem: &DpProblem,
        portals: &[usize],
        i: usize,
        cur: &mut Vec<u8>,
        out: &mut Vec<Vector>,
        k: u8,
        cap: usize,
        node: usize,
    ) -> Result<()> {
        if i == portals.len() {
            out.push(cur.clone());
            if out.len() > cap {
                return Err(Error::VectorCapExceeded {
                    node,
                    count: out.len(),
                    cap,
                });
            }
            return Ok(());
        }
        'value: for val in 0..=k {
            for j in 0..i {
                if let Some(z) = problem.z(portals[i], portals[j]) {
                    if (val as i64 - cur[j] as i64).unsigned_abs() > z as u64 + 1 {
                        continue 'value;
                    }
                }
            }
            cur[i] = val;
            rec(problem, portals, i + 1, cur, out, k, cap, node)?;
        }
        Ok(())
    }
    rec(problem, portals, 0, &mut cur, &mut out, k, cap, node)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Choice {
    /// Facility ids opened by a leaf.
    Leaf(Vec<usize>),
    /// Keys of the combined child entries.
    Join {
        left: (Vector, Vector),
        right: (Vector, Vector),
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub cost: f64,
    pub choice: Choice,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeTable {
    pub portals: Vec<usize>,
    /// `(in, out) -> entry`. An entry stays valid whenever the real outside
    /// is at least as good as `out`; entries dominated by a cheaper one with
    /// a stronger guarantee and a weaker assumption are dropped.
    pub entries: BTreeMap<(Vector, Vector), Entry>,
    /// Number of valid out-vectors considered.
    pub valid_out: usize,
}

impl NodeTable {
    /// Cheapest entry usable under `(in_v, out_v)`:
    /// `min { cost : in_e <= in_v, out_e >= out_v pointwise }`.
    pub fn lookup(&self, in_v: &[u8], out_v: &[u8]) -> f64 {
        self.entries
            .iter()
            .filter(|((i, o), _)| leq(i, in_v) && leq(out_v, o))
            .map(|(_, e)| e.cost)
            .fold(f64::INFINITY, f64::min)
    }
}

fn leq(a: &[u8], b: &[u8]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn prune(entries: BTreeMap<(Vector, Vector), Entry>) -> BTreeMap<(Vector, Vector), Entry> {
    let mut list: Vec<((Vector, Vector), Entry)> = entries.into_iter().collect();
    list.sort_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)));
    let mut kept: Vec<((Vector, Vector), Entry)> = Vec::new();
    for (key, e) in list {
        let dominated = kept.iter().any(|((ki, ko), _)| leq(ki, &key.0) && leq(&key.1, ko));
        if !dominated {
            kept.push((key, e));
        }
    }
    kept.into_iter().collect()
}

struct Leaf {
    /// Per client: site index, fixed moving cost, distance to each portal.
    clients: Vec<(usize, f64, Vec<f64>)>,
    /// Facility-bearing sites: (site location, cost, offset, facility id).
    fac_sites: Vec<(usize, f64, f64, usize)>,
    sites: Vec<usize>,
}

fn nearest(problem: &DpProblem, from: usize, sites: &[usize]) -> Option<(usize, f64)> {
    sites
        .iter()
        .map(|&s| (s, problem.d(from, s)))
        .filter(|(_, d)| d.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

fn leaf_model(problem: &DpProblem, node: usize) -> Result<Option<Leaf>> {
    let nd = &problem.nodes[node];
    let mut sites = nd.sites.clone();
    sites.sort_unstable();
    sites.dedup();
    let mut clients = Vec::new();
    for c in &nd.clients {
        let Some((p, d)) = nearest(problem, c.at, &sites) else {
            return Ok(None);
        };
        let to_portals = nd.portals.iter().map(|&q| problem.d(p, q)).collect();
        clients.push((p, c.offset + d, to_portals));
    }
    // Cheapest facility per site, ties to the smaller offset.
    let mut best: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for f in &nd.facilities {
        let Some((q, d)) = nearest(problem, f.at, &sites) else { continue };
        let cand = (f.cost, d + f.offset, f.id);
        let slot = best.entry(q).or_insert(cand);
        if (cand.0, cand.1) < (slot.0, slot.1) {
            *slot = cand;
        }
    }
    if best.len() > MAX_LEAF_SITES {
        return Err(Error::VectorCapExceeded {
            node,
            count: 1usize << best.len().min(62),
            cap: 1 << MAX_LEAF_SITES,
        });
    }
    let fac_sites = best.into_iter().map(|(q, (c, e, id))| (q, c, e, id)).collect();
    Ok(Some(Leaf {
        clients,
        fac_sites,
        sites,
    }))
}

fn leaf_entries(problem: &DpProblem, node: usize, outs: &[Vector]) -> Result<BTreeMap<(Vector, Vector), Entry>> {
    let mut entries = BTreeMap::new();
    let Some(leaf) = leaf_model(problem, node)? else {
        return Ok(entries);
    };
    let portals = &problem.nodes[node].portals;
    let k = leaf.fac_sites.len();
    let _ = &leaf.sites;
    for mask in 0u64..(1u64 << k) {
        let chosen: Vec<&(usize, f64, f64, usize)> =
            (0..k).filter(|i| mask >> i & 1 == 1).map(|i| &leaf.fac_sites[i]).collect();
        let open_cost: f64 = chosen.iter().map(|f| f.1).sum();
        let reach = |from: usize| -> f64 {
            chosen
                .iter()
                .map(|&&(q, _, e, _)| problem.d(from, q) + e)
                .fold(f64::INFINITY, f64::min)
        };
        let in_v: Vector = portals.iter().map(|&p| problem.units(reach(p))).collect();
        if !problem.is_valid(portals, &in_v) {
            continue;
        }
        let base: Vec<f64> = leaf.clients.iter().map(|c| reach(c.0)).collect();
        let ids: Vec<usize> = chosen.iter().map(|f| f.3).collect();
        for out_v in outs {
            let mut cost = open_cost;
            let mut used = vec![false; out_v.len()];
            for (ci, c) in leaf.clients.iter().enumerate() {
                let mut best = base[ci];
                let mut via = None;
                for (pi, &o) in out_v.iter().enumerate() {
                    if o < problem.k && c.2[pi] + o as f64 * problem.g < best {
                        best = c.2[pi] + o as f64 * problem.g;
                        via = Some(pi);
                    }
                }
                if let Some(pi) = via {
                    used[pi] = true;
                }
                cost += c.1 + best;
            }
            if !cost.is_finite() {
                continue;
            }
            // Assumptions no client relies on are dropped; the cost is unchanged.
            let canon: Vector = out_v.iter().zip(&used).map(|(&o, &u)| if u { o } else { problem.k }).collect();
            let key = (in_v.clone(), canon);
            let better = entries.get(&key).is_none_or(|e: &Entry| cost < e.cost);
            if better {
                entries.insert(
                    key,
                    Entry {
                        cost,
                        choice: Choice::Leaf(ids.clone()),
                    },
                );
            }
        }
    }
    Ok(entries)
}

/// Cheapest leaf solution guaranteeing `in_v` under the outside assumption
/// `out_v`; cost is infinite when no open set qualifies.
pub fn solve_base_case(problem: &DpProblem, node: usize, in_v: &[u8], out_v: &[u8]) -> Result<Entry> {
    let entries = leaf_entries(problem, node, &[out_v.to_vec()])?;
    let best = entries
        .into_iter()
        .filter(|((i, _), _)| i.iter().zip(in_v).all(|(a, b)| a <= b))
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)))
        .map(|(_, e)| e);
    Ok(best.unwrap_or(Entry {
        cost: f64::INFINITY,
        choice: Choice::Leaf(Vec::new()),
    }))
}

/// The three matching rules between a node and its children, verbatim:
/// portals of the parent kept by one child copy both values; portals kept by
/// both children share the out value and take the in value from one of them;
/// new portals cross-match `in1 = out2` and `in2 = out1`.
#[allow(clippy::too_many_arguments)]
pub fn check_consistency(
    portals: &[usize],
    in_v: &[u8],
    out_v: &[u8],
    portals1: &[usize],
    in1: &[u8],
    out1: &[u8],
    portals2: &[usize],
    in2: &[u8],
    out2: &[u8],
) -> bool {
    let pos = |ps: &[usize], p: usize| ps.binary_search(&p).ok();
    for (i, &p) in portals.iter().enumerate() {
        match (pos(portals1, p), pos(portals2, p)) {
            (Some(a), Some(b)) => {
                if !(in1[a] == in_v[i] || in2[b] == in_v[i]) || out1[a] != out_v[i] || out2[b] != out_v[i] {
                    return false;
                }
            }
            (Some(a), None) => {
                if in1[a] != in_v[i] || out1[a] != out_v[i] {
                    return false;
                }
            }
            (None, Some(b)) => {
                if in2[b] != in_v[i] || out2[b] != out_v[i] {
                    return false;
                }
            }
            (None, None) => return false,
        }
    }
    for (a, &p) in portals1.iter().enumerate() {
        if pos(portals, p).is_some() {
            continue;
        }
        match pos(portals2, p) {
            Some(b) => {
                if in1[a] != out2[b] || in2[b] != out1[a] {
                    return false;
                }
            }
            None => return false,
        }
    }
    for &p in portals2 {
        if pos(portals, p).is_none() && pos(portals1, p).is_none() {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy)]
enum Slot {
    Both(usize, usize),
    Left(usize),
    Right(usize),
}

fn join(problem: &DpProblem, node: usize, t1: &NodeTable, t2: &NodeTable) -> Result<NodeTable> {
    let portals = problem.nodes[node].portals.clone();
    let pos = |ps: &[usize], p: usize| ps.binary_search(&p).ok();
    let mut slots = Vec::with_capacity(portals.len());
    for &p in &portals {
        slots.push(match (pos(&t1.portals, p), pos(&t2.portals, p)) {
            (Some(a), Some(b)) => Slot::Both(a, b),
            (Some(a), None) => Slot::Left(a),
            (None, Some(b)) => Slot::Right(b),
            (None, None) => {
                return Err(Error::InvalidInput(alloc::format!(
                    "portal {} of node {} is in neither child",
                    p,
                    node
                )))
            }
        });
    }
    let mut fresh: Vec<(usize, usize)> = Vec::new();
    for (a, &p) in t1.portals.iter().enumerate() {
        if pos(&portals, p).is_none() {
            match pos(&t2.portals, p) {
                Some(b) => fresh.push((a, b)),
                None => {
                    return Err(Error::InvalidInput(alloc::format!(
                        "child portal {} below node {} is dangling",
                        p,
                        node
                    )))
                }
            }
        }
    }
    if t2.portals.iter().any(|&p| pos(&portals, p).is_none() && pos(&t1.portals, p).is_none()) {
        return Err(Error::InvalidInput(alloc::format!("dangling portal below node {}", node)));
    }
    // A child's outside assumption at a portal it shares with the parent is
    // backed by the parent's outside or by the sibling's guarantee there;
    // the parent keeps the weakest outside value that backs both children.
    let k = problem.k;
    let back = |own_out: u8, sibling_in: u8| if sibling_in <= own_out { k } else { own_out };
    let e1: Vec<(&(Vector, Vector), &Entry)> = t1.entries.iter().collect();
    let e2: Vec<(&(Vector, Vector), &Entry)> = t2.entries.iter().collect();
    let mut entries: BTreeMap<(Vector, Vector), Entry> = BTreeMap::new();
    let mut outs: alloc::collections::BTreeSet<Vector> = alloc::collections::BTreeSet::new();
    for ((in1, o1), x1) in &e1 {
        for ((in2, o2), x2) in &e2 {
            if fresh.iter().any(|&(a, b)| in1[a] > o2[b] || in2[b] > o1[a]) {
                continue;
            }
            let out_v: Vector = slots
                .iter()
                .map(|s| match *s {
                    Slot::Both(a, b) => back(o1[a], in2[b]).min(back(o2[b], in1[a])),
                    Slot::Left(a) => o1[a],
                    Slot::Right(b) => o2[b],
                })
                .collect();
            let in_v: Vector = slots
                .iter()
                .map(|s| match *s {
                    Slot::Both(a, b) => in1[a].min(in2[b]),
                    Slot::Left(a) => in1[a],
                    Slot::Right(b) => in2[b],
                })
                .collect();
            let cost = x1.cost + x2.cost;
            outs.insert(out_v.clone());
            let key = (in_v, out_v);
            if entries.get(&key).is_none_or(|e| cost < e.cost) {
                entries.insert(
                    key,
                    Entry {
                        cost,
                        choice: Choice::Join {
                            left: (in1.clone(), o1.clone()),
                            right: (in2.clone(), o2.clone()),
                        },
                    },
                );
                if entries.len() > problem.vector_cap {
                    return Err(Error::VectorCapExceeded {
                        node,
                        count: entries.len(),
                        cap: problem.vector_cap,
                    });
                }
            }
        }
    }
    let outs_seen = outs.len();
    Ok(NodeTable {
        portals,
        entries: prune(entries),
        valid_out: outs_seen,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpTable {
    pub nodes: Vec<NodeTable>,
    pub root: usize,
}

impl DpTable {
    /// Root cost; infinite when no consistent solution exists.
    pub fn root_cost(&self) -> f64 {
        self.nodes[self.root]
            .entries
            .values()
            .map(|e| e.cost)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn entry_count(&self) -> usize {
        self.nodes.iter().map(|t| t.entries.len()).sum()
    }
}

/// Fills the table bottom-up. The root carries no portals, so its single
/// key is the pair of empty vectors.
pub fn fill_table(problem: &DpProblem) -> Result<DpTable> {
    let n = problem.nodes.len();
    if !problem.nodes[problem.root].portals.is_empty() {
        return Err(Error::InvalidInput("root node must not carry portals".into()));
    }
    // Post-order from the root.
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![(problem.root, false)];
    while let Some((t, expanded)) = stack.pop() {
        if expanded {
            order.push(t);
            continue;
        }
        stack.push((t, true));
        if let Some((a, b)) = problem.nodes[t].children {
            stack.push((b, false));
            stack.push((a, false));
        }
    }
    let mut tables: Vec<Option<NodeTable>> = vec![None; n];
    for t in order {
        let node = &problem.nodes[t];
        let table = match node.children {
            None => {
                let outs = enumerate_valid_vectors(problem, t, &node.portals)?;
                let entries = leaf_entries(problem, t, &outs)?;
                NodeTable {
                    portals: node.portals.clone(),
                    entries: prune(entries),
                    valid_out: outs.len(),
                }
            }
            Some((a, b)) => {
                let t1 = tables[a].as_ref().unwrap();
                let t2 = tables[b].as_ref().unwrap();
                join(problem, t, t1, t2)?
            }
        };
        tables[t] = Some(table);
    }
    let table = DpTable {
        nodes: tables.into_iter().map(|t| t.unwrap_or_default()).collect(),
        root: problem.root,
    };
    if !table.root_cost().is_finite() {
        return Err(Error::DiscretizationInfeasible);
    }
    Ok(table)
}

/// Facility ids opened by the optimal root entry, sorted.
pub fn extract_open(problem: &DpProblem, table: &DpTable) -> Result<Vec<usize>> {
    let root = &table.nodes[table.root];
    let (key, _) = root
        .entries
        .iter()
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(b.0)))
        .ok_or(Error::DiscretizationInfeasible)?;
    let mut open = Vec::new();
    let mut stack = vec![(table.root, key.clone())];
    while let Some((t, k)) = stack.pop() {
        let entry = table.nodes[t].entries.get(&k).ok_or(Error::DiscretizationInfeasible)?;
        match &entry.choice {
            Choice::Leaf(ids) => open.extend(ids.iter().copied()),
            Choice::Join { left, right } => {
                let (a, b) = problem.nodes[t].children.unwrap();
                stack.push((a, left.clone()));
                stack.push((b, right.clone()));
            }
        }
    }
    open.sort_unstable();
    open.dedup();
    Ok(open)
}

/// Extracted open set plus the free facilities, evaluated on `inst`.
pub fn extract_solution(problem: &DpProblem, table: &DpTable, inst: &FLInstance) -> Result<FLSolution> {
    let mut open = extract_open(problem, table)?;
    open.extend_from_slice(inst.free());
    evaluate(inst, &open)
}

/// `ceil((diam + 1/4) / g) + 1`.
pub fn sentinel_for(diameter: f64, g: f64) -> Result<u8> {
    let k = libm::ceil((diameter + 0.25) / g) + 1.0;
    if !(k <= u8::MAX as f64 - 1.0) {
        return Err(Error::InvalidInput(alloc::format!(
            "portal granularity {} too fine for diameter {}",
            g,
            diameter
        )));
    }
    Ok(k as u8)
}

/// DP instance for a padded sub-instance: locations are net vertices, each
/// host client and facility belongs to the leaf owning its ball center.
pub fn problem_from_tree(inst: &FLInstance, net: &NetGraph, tree: &DecompTree, vector_cap: usize) -> Result<DpProblem> {
    let g = tree.delta_portal as f64;
    let k = sentinel_for(net.diameter(), g)?;
    let owner = tree.owner_of(net.len());
    let host = &*net.host;
    let mut nodes: Vec<DpNode> = tree
        .nodes
        .iter()
        .map(|t| {
            let mut sites = t.portals.clone();
            if t.is_leaf() {
                sites.extend(t.core.iter().copied());
                sites.sort_unstable();
                sites.dedup();
            } else {
                sites.clear();
            }
            DpNode {
                portals: t.portals.clone(),
                children: t.children,
                sites,
                clients: Vec::new(),
                facilities: Vec::new(),
            }
        })
        .collect();
    let off = |v: usize| host.euclid(v, net.ball_of[v]);
    for &c in inst.clients() {
        let at = net.ball_index(c);
        nodes[owner[at]].clients.push(DpClient {
            id: c,
            at,
            offset: off(c),
        });
    }
    for &(f, cost) in inst.facilities() {
        let at = net.ball_index(f);
        nodes[owner[at]].facilities.push(DpFacility {
            id: f,
            at,
            offset: off(f),
            cost,
        });
    }
    Ok(DpProblem {
        nodes,
        root: 0,
        m: net.len(),
        dist: net.dist.clone(),
        g,
        k,
        vector_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Locations on a line at the given coordinates.
    fn line(xs: &[f64]) -> (usize, Vec<f64>) {
        let m = xs.len();
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                d[i * m + j] = (xs[i] - xs[j]).abs();
            }
        }
        (m, d)
    }

    fn single_leaf(portals: Vec<usize>, k: u8) -> DpProblem {
        let (m, dist) = line(&[0.0, 1.0, 2.0, 3.0]);
        DpProblem {
            nodes: vec![DpNode {
                sites: portals.clone(),
                portals,
                ..Default::default()
            }],
            root: 0,
            m,
            dist,
            g: 1.0,
            k,
            vector_cap: DEFAULT_VECTOR_CAP,
        }
    }

    #[test]
    fn one_portal_four_vectors() {
        let p = single_leaf(vec![0], 3);
        assert_eq!(enumerate_valid_vectors(&p, 0, &[0]).unwrap().len(), 4);
    }

    #[test]
    fn zero_distance_pairs_differ_by_one() {
        let mut p = single_leaf(vec![0, 1], 3);
        p.dist[1] = 0.0;
        p.dist[p.m] = 0.0;
        let vs = enumerate_valid_vectors(&p, 0, &[0, 1]).unwrap();
        assert!(vs.iter().all(|v| (v[0] as i32 - v[1] as i32).abs() <= 1));
        assert_eq!(vs.len(), 4 + 3 + 3);
    }

    #[test]
    fn three_portals_match_brute_force() {
        let p = single_leaf(vec![0, 1, 3], 4);
        let fast = enumerate_valid_vectors(&p, 0, &[0, 1, 3]).unwrap();
        let mut slow = Vec::new();
        for a in 0..=4u8 {
            for b in 0..=4u8 {
                for c in 0..=4u8 {
                    if p.is_valid(&[0, 1, 3], &[a, b, c]) {
                        slow.push(vec![a, b, c]);
                    }
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn cap_is_enforced() {
        let mut p = single_leaf(vec![0, 3], 4);
        p.vector_cap = 3;
        assert!(matches!(
            enumerate_valid_vectors(&p, 0, &[0, 3]),
            Err(Error::VectorCapExceeded { .. })
        ));
    }

    #[test]
    fn empty_leaf_costs_nothing() {
        let p = single_leaf(vec![0], 3);
        let e = solve_base_case(&p, 0, &[3], &[3]).unwrap();
        assert_eq!(e.cost, 0.0);
        assert_eq!(e.choice, Choice::Leaf(vec![]));
    }

    #[test]
    fn demanded_portal_facility_opens() {
        let mut p = single_leaf(vec![0], 3);
        p.nodes[0].facilities.push(DpFacility {
            id: 7,
            at: 0,
            offset: 0.0,
            cost: 2.0,
        });
        for _ in 0..3 {
            p.nodes[0].clients.push(DpClient { id: 1, at: 0, offset: 0.0 });
        }
        let e = solve_base_case(&p, 0, &[0], &[3]).unwrap();
        assert_eq!(e.cost, 2.0);
        assert_eq!(e.choice, Choice::Leaf(vec![7]));
    }

    #[test]
    fn consistency_rules() {
        // Parent has no portals; children share new portal 5.
        assert!(check_consistency(&[], &[], &[], &[5], &[0], &[0], &[5], &[0], &[0]));
        assert!(!check_consistency(&[], &[], &[], &[5], &[1], &[0], &[5], &[0], &[2]));
        // Shared boundary portal 2: out must agree everywhere.
        assert!(check_consistency(&[2], &[1], &[3], &[2], &[1], &[3], &[2], &[2], &[3]));
        assert!(!check_consistency(&[2], &[1], &[3], &[2], &[1], &[3], &[2], &[2], &[2]));
        assert!(!check_consistency(&[2], &[0], &[3], &[2], &[1], &[3], &[2], &[2], &[3]));
    }

    #[test]
    fn single_leaf_tree_is_base_case() {
        let mut p = single_leaf(vec![], 3);
        p.nodes[0].sites = vec![0, 2];
        p.nodes[0].facilities.push(DpFacility {
            id: 4,
            at: 2,
            offset: 0.0,
            cost: 1.0,
        });
        p.nodes[0].clients.push(DpClient { id: 0, at: 0, offset: 0.5 });
        let t = fill_table(&p).unwrap();
        assert_eq!(t.root_cost(), 1.0 + 0.5 + 2.0);
        assert_eq!(extract_open(&p, &t).unwrap(), vec![4]);
    }

    #[test]
    fn infeasible_root_reported() {
        let mut p = single_leaf(vec![], 3);
        p.nodes[0].sites = vec![0];
        p.nodes[0].clients.push(DpClient { id: 0, at: 0, offset: 0.0 });
        assert_eq!(fill_table(&p), Err(Error::DiscretizationInfeasible));
    }
}
