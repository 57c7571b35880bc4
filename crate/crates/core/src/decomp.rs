//! Hierarchical decomposition of the net graph by balanced partly separators.
//!
//! All vertex ids here are net indices. Every node keeps its region ψ(t), the
//! separator paths on its boundary, its core X(t) = ψ(t) \ bd(t), and the
//! portals Π_t of its boundary paths that lie in ψ(t).

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::net::NetGraph;
use crate::separator::{find_partly_separator, verify_separator, Separator, SeparatorCheck};
use crate::udg::{dijkstra, UnitDiskGraph};

/// Default ratio `ε' / ε`.
pub const EPS_PRIME_FACTOR: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// ψ(t), sorted.
    pub psi: Vec<usize>,
    /// Indices into [`DecompTree::paths`] of the boundary paths.
    pub bd: Vec<usize>,
    /// X(t), sorted.
    pub core: Vec<usize>,
    /// Π_t, sorted.
    pub portals: Vec<usize>,
    pub children: Option<(usize, usize)>,
    /// Separator of an internal node, in net indices.
    pub separator: Option<Separator>,
    /// Leaf only: net vertices whose ball content this leaf owns.
    pub owned: Vec<usize>,
}

impl DecompNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparatorPath {
    /// Root-first vertices.
    pub vertices: Vec<usize>,
    /// Portal positions: every `delta_portal`-th vertex plus both ends.
    pub portals: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecompTree {
    pub nodes: Vec<DecompNode>,
    pub paths: Vec<SeparatorPath>,
    pub source: usize,
    pub delta_portal: u32,
    /// Largest weighted gap between consecutive portals on a path.
    pub delta_weighted: f64,
    pub gamma: f64,
    pub eps_prime: f64,
}

impl DecompTree {
    pub fn root(&self) -> &DecompNode {
        &self.nodes[0]
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &DecompNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn max_portals(&self) -> usize {
        self.nodes.iter().map(|n| n.portals.len()).max().unwrap_or(0)
    }

    /// Leaf owning the ball content of each net vertex.
    pub fn owner_of(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n];
        for leaf in self.leaves() {
            for &v in &leaf.owned {
                owner[v] = leaf.id;
            }
        }
        owner
    }

    /// `ceil(log_{3/2} |V'|) + 1`.
    pub fn depth_bound(net_size: usize) -> usize {
        if net_size <= 1 {
            return 1;
        }
        libm::ceil(libm::log(net_size as f64) / libm::log(1.5)) as usize + 1
    }
}

/// `max(1, ceil(ε' Γ / log2(Γ + 2)))` hops.
pub fn portal_spacing(eps_prime: f64, gamma: f64) -> u32 {
    let raw = eps_prime * gamma / libm::log2(gamma + 2.0);
    if !raw.is_finite() {
        return 1;
    }
    libm::ceil(raw).clamp(1.0, u32::MAX as f64) as u32
}

fn make_path(vertices: Vec<usize>, delta: u32, net: &UnitDiskGraph) -> (SeparatorPath, f64) {
    let mut portals: Vec<usize> = (0..vertices.len())
        .step_by(delta as usize)
        .map(|i| vertices[i])
        .collect();
    if let Some(&last) = vertices.last() {
        if portals.last() != Some(&last) {
            portals.push(last);
        }
    }
    let mut gap: f64 = 0.0;
    let mut run = 0.0;
    let portal_set: BTreeSet<usize> = portals.iter().copied().collect();
    for w in vertices.windows(2) {
        run += net.weight(w[0], w[1]).unwrap_or(f64::INFINITY);
        if portal_set.contains(&w[1]) {
            gap = gap.max(run);
            run = 0.0;
        }
    }
    (SeparatorPath { vertices, portals }, gap)
}

/// Splits every node with `|X(t)| > 1` by a partly separator of G'[ψ(t)]
/// from the fixed source `s`.
pub fn build_decomp_tree(net: &NetGraph, s: usize, eps_prime: f64) -> Result<DecompTree> {
    let n = net.len();
    if s >= n {
        return Err(Error::InvalidInput(alloc::format!("source {} not a net vertex", s)));
    }
    let gamma = net.diameter();
    let delta = portal_spacing(eps_prime, gamma);
    let all: Vec<usize> = (0..n).collect();
    let mut nodes = vec![DecompNode {
        id: 0,
        parent: None,
        depth: 0,
        psi: all.clone(),
        bd: Vec::new(),
        core: all,
        portals: Vec::new(),
        children: None,
        separator: None,
        owned: Vec::new(),
    }];
    let mut paths: Vec<SeparatorPath> = Vec::new();
    let mut path_index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut delta_weighted: f64 = 0.0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(t) = queue.pop_front() {
        if nodes[t].core.len() <= 1 {
            continue;
        }
        let psi = nodes[t].psi.clone();
        let (region, map) = net.graph.induced(&psi);
        let local = |v: usize| psi.binary_search(&v).unwrap();
        let core_local: Vec<usize> = nodes[t].core.iter().map(|&v| local(v)).collect();
        let sep_local = find_partly_separator(&region, &core_local, local(s))?;
        let lift = |vs: &[usize]| -> Vec<usize> { vs.iter().map(|&v| map[v]).collect() };
        let sep = Separator {
            source: s,
            path_x: lift(&sep_local.path_x),
            path_y: lift(&sep_local.path_y),
            side1: lift(&sep_local.side1),
            side2: lift(&sep_local.side2),
            certificates: sep_local
                .certificates
                .iter()
                .map(|c| crate::separator::Certificate {
                    a: map[c.a],
                    b: map[c.b],
                    witness: map[c.witness],
                    ..*c
                })
                .collect(),
            radius: sep_local.radius,
        };
        let mut bd = nodes[t].bd.clone();
        for p in [&sep.path_x, &sep.path_y] {
            let idx = match path_index.get(p) {
                Some(&i) => i,
                None => {
                    let (path, gap) = make_path(p.clone(), delta, &net.graph);
                    delta_weighted = delta_weighted.max(gap);
                    paths.push(path);
                    path_index.insert(p.clone(), paths.len() - 1);
                    paths.len() - 1
                }
            };
            if !bd.contains(&idx) {
                bd.push(idx);
            }
        }
        let on_path = sep.path_vertices();
        let depth = nodes[t].depth + 1;
        let mut child_ids = [0usize; 2];
        for (i, side) in [&sep.side1, &sep.side2].into_iter().enumerate() {
            let mut psi_c: Vec<usize> = side.iter().chain(on_path.iter()).copied().collect();
            psi_c.sort_unstable();
            let core: Vec<usize> = nodes[t]
                .core
                .iter()
                .copied()
                .filter(|v| side.binary_search(v).is_ok())
                .collect();
            let mut portals: BTreeSet<usize> = BTreeSet::new();
            for &pi in &bd {
                for &p in &paths[pi].portals {
                    if psi_c.binary_search(&p).is_ok() {
                        portals.insert(p);
                    }
                }
            }
            let id = nodes.len();
            child_ids[i] = id;
            nodes.push(DecompNode {
                id,
                parent: Some(t),
                depth,
                psi: psi_c,
                bd: bd.clone(),
                core,
                portals: portals.into_iter().collect(),
                children: None,
                separator: None,
                owned: Vec::new(),
            });
            queue.push_back(id);
        }
        nodes[t].children = Some((child_ids[0], child_ids[1]));
        nodes[t].separator = Some(sep);
    }

    // Ball ownership: side1 and path vertices go to the first child.
    let mut owned: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let mut t = 0;
        while let (Some((c1, c2)), Some(sep)) = (nodes[t].children, nodes[t].separator.as_ref()) {
            t = if sep.side2.binary_search(&v).is_ok() { c2 } else { c1 };
        }
        owned.entry(t).or_default().push(v);
    }
    for (t, vs) in owned {
        nodes[t].owned = vs;
    }
    Ok(DecompTree {
        nodes,
        paths,
        source: s,
        delta_portal: delta,
        delta_weighted,
        gamma,
        eps_prime,
    })
}

/// Re-verifies every stored separator on its region G'[ψ(t)] in local ids.
/// Returns `(node id, check)` per internal node.
pub fn verify_tree_separators(net: &NetGraph, tree: &DecompTree) -> Vec<(usize, SeparatorCheck)> {
    let mut out = Vec::new();
    for node in &tree.nodes {
        let Some(sep) = node.separator.as_ref() else { continue };
        let (region, _) = net.graph.induced(&node.psi);
        let local = |vs: &[usize]| -> Vec<usize> {
            vs.iter().filter_map(|v| node.psi.binary_search(v).ok()).collect()
        };
        let sep_local = Separator {
            source: node.psi.binary_search(&sep.source).unwrap_or(usize::MAX),
            path_x: local(&sep.path_x),
            path_y: local(&sep.path_y),
            side1: local(&sep.side1),
            side2: local(&sep.side2),
            certificates: sep
                .certificates
                .iter()
                .map(|c| crate::separator::Certificate {
                    a: node.psi.binary_search(&c.a).unwrap_or(usize::MAX),
                    b: node.psi.binary_search(&c.b).unwrap_or(usize::MAX),
                    witness: node.psi.binary_search(&c.witness).unwrap_or(usize::MAX),
                    ..*c
                })
                .collect(),
            radius: sep.radius,
        };
        out.push((node.id, verify_separator(&region, &local(&node.core), &sep_local)));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetourAudit {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `min_π (d(u,π) + d(π,v)) - d(u,v)` seen.
    pub max_excess: f64,
    /// `δ_w + 4`.
    pub bound: f64,
    /// Host pairs checked against `d_H(a,b) + δ_w + 5` through ball centers.
    pub host_pairs: usize,
    pub host_exceed: usize,
    pub host_max_excess: f64,
}

/// Checks the portal detour bound on sibling pairs of every internal node in
/// the region metric G'[ψ(t)]. All pairs are checked when there are at most
/// `samples` of them per node; otherwise `samples` pairs are drawn. The host
/// extension through ball centers is measured, not enforced.
pub fn portal_detour_bound_audit<R: Rng + ?Sized>(
    net: &NetGraph,
    tree: &DecompTree,
    samples: usize,
    rng: &mut R,
) -> DetourAudit {
    let bound = tree.delta_weighted + 4.0;
    let mut audit = DetourAudit {
        bound,
        ..Default::default()
    };
    let host = &*net.host;
    for node in &tree.nodes {
        let Some(sep) = node.separator.as_ref() else { continue };
        let mut portals: BTreeSet<usize> = BTreeSet::new();
        for p in [&sep.path_x, &sep.path_y] {
            if let Some(&idx) = tree.paths.iter().position(|q| &q.vertices == p).as_ref() {
                portals.extend(tree.paths[idx].portals.iter().copied());
            }
        }
        let portals: Vec<usize> = portals.into_iter().collect();
        let (region, map) = net.graph.induced(&node.psi);
        let local = |v: usize| node.psi.binary_search(&v).unwrap();
        let from_portal: Vec<Vec<f64>> = portals.iter().map(|&p| dijkstra(&region, local(p))).collect();
        let mut left: Vec<usize> = sep.side1.clone();
        let mut right: Vec<usize> = sep.side2.clone();
        left.extend(sep.path_x.iter().copied());
        right.extend(sep.path_y.iter().copied());
        let total = left.len() * right.len();
        let pairs: Vec<(usize, usize)> = if total <= samples {
            left.iter().flat_map(|&u| right.iter().map(move |&v| (u, v))).collect()
        } else {
            (0..samples)
                .map(|_| (left[rng.gen_range(0..left.len())], right[rng.gen_range(0..right.len())]))
                .collect()
        };
        let mut cache: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (u, v) in pairs {
            let du = cache.entry(u).or_insert_with(|| dijkstra(&region, local(u)));
            let duv = du[local(v)];
            if !duv.is_finite() {
                continue;
            }
            let best = from_portal
                .iter()
                .map(|d| d[local(u)] + d[local(v)])
                .fold(f64::INFINITY, f64::min);
            audit.pairs += 1;
            let excess = best - duv;
            audit.max_excess = audit.max_excess.max(excess);
            if excess > bound + 1e-9 {
                audit.violations += 1;
            }
        }
        // Host extension: pairs of host vertices whose centers straddle.
        let side_of = |c: usize| -> u8 {
            if sep.side1.binary_search(&c).is_ok() {
                1
            } else if sep.side2.binary_search(&c).is_ok() {
                2
            } else {
                0
            }
        };
        let mut a_side = Vec::new();
        let mut b_side = Vec::new();
        for h in 0..host.n() {
            let c = net.ball_index(h);
            if node.psi.binary_search(&c).is_err() {
                continue;
            }
            match side_of(c) {
                1 => a_side.push((h, c)),
                2 => b_side.push((h, c)),
                _ => {}
            }
        }
        if a_side.is_empty() || b_side.is_empty() {
            continue;
        }
        let draws = samples.min(a_side.len() * b_side.len()).min(256);
        let mut host_cache: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for _ in 0..draws {
            let (a, ca) = a_side[rng.gen_range(0..a_side.len())];
            let (b, cb) = b_side[rng.gen_range(0..b_side.len())];
            let dab = host_cache.entry(a).or_insert_with(|| dijkstra(host, a))[b];
            if !dab.is_finite() {
                continue;
            }
            let best = from_portal
                .iter()
                .map(|d| d[local(ca)] + d[local(cb)])
                .fold(f64::INFINITY, f64::min);
            audit.host_pairs += 1;
            let excess = best - dab;
            audit.host_max_excess = audit.host_max_excess.max(excess);
            if excess > tree.delta_weighted + 5.0 + 1e-9 {
                audit.host_exceed += 1;
            }
        }
        let _ = map;
    }
    audit
}
