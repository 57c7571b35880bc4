//! Hop-band chopping and the red/blue layering of a structured sub-instance.
//!
//! `d'` below is the hop distance. Annulus `A_0` holds vertices with
//! `d' < r0`; `A_j` holds `r0 + (j-1)δ <= d' < r0 + jδ`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::fl::FLInstance;
use crate::reduction::StructuredSubInstance;
use crate::udg::{dijkstra, r_neighborhood, weak_diameter, UnitDiskGraph, UNREACHABLE_HOPS};

/// Chopping rounds used by the layering step.
pub const DEFAULT_ROUNDS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChopResult {
    /// `annuli[0]` is `A_0`. Vertices unreachable from the root, if any, form
    /// one extra trailing set.
    pub annuli: Vec<Vec<usize>>,
    pub offset: u32,
    pub delta: u32,
    /// Edges `(u, v)`, `u < v`, whose endpoints lie in different annuli.
    pub cut_edges: Vec<(usize, usize)>,
}

impl ChopResult {
    pub fn annulus_of(&self, n: usize) -> Vec<usize> {
        let mut of = vec![usize::MAX; n];
        for (j, a) in self.annuli.iter().enumerate() {
            for &v in a {
                of[v] = j;
            }
        }
        of
    }
}

/// Hop BFS from `sources` that only visits vertices with `member[v]`.
fn restricted_bfs(g: &UnitDiskGraph, member: &[bool], sources: &[usize]) -> Vec<u32> {
    let mut hops = vec![UNREACHABLE_HOPS; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if member[s] && hops[s] == UNREACHABLE_HOPS {
            hops[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(v, _) in g.neighbors(u) {
            if member[v] && hops[v] == UNREACHABLE_HOPS {
                hops[v] = hops[u] + 1;
                queue.push_back(v);
            }
        }
    }
    hops
}

/// Connected components of the subgraph induced by `subset`, each sorted,
/// ordered by smallest member.
pub fn components_within(g: &UnitDiskGraph, subset: &[usize]) -> Vec<Vec<usize>> {
    let mut member = vec![false; g.n()];
    for &v in subset {
        member[v] = true;
    }
    let mut seen = vec![false; g.n()];
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for &s in &sorted {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _) in g.neighbors(u) {
                if member[v] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Maximum host hop distance between two members of `subset`.
pub fn hop_weak_diameter(host: &UnitDiskGraph, subset: &[usize]) -> u32 {
    let all = vec![true; host.n()];
    let mut diam = 0;
    for (i, &u) in subset.iter().enumerate() {
        if i + 1 == subset.len() {
            break;
        }
        let h = restricted_bfs(host, &all, &[u]);
        for &v in &subset[i + 1..] {
            diam = diam.max(h[v]);
        }
    }
    diam
}

fn chop_restricted(
    g: &UnitDiskGraph,
    member: &[bool],
    vertices: &[usize],
    delta: u32,
    root: usize,
    r0: u32,
) -> ChopResult {
    let delta = delta.max(1);
    let hops = restricted_bfs(g, member, &[root]);
    let mut bands: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    let unreachable_key = u64::MAX;
    for &v in vertices {
        let h = hops[v];
        let key = if h == UNREACHABLE_HOPS {
            unreachable_key
        } else if h < r0 {
            0
        } else {
            1 + ((h - r0) / delta) as u64
        };
        bands.entry(key).or_default().push(v);
    }
    let mut annuli: Vec<Vec<usize>> = Vec::new();
    let last = bands.keys().copied().filter(|&k| k != unreachable_key).max().unwrap_or(0);
    for j in 0..=last {
        annuli.push(bands.remove(&j).unwrap_or_default());
    }
    if let Some(rest) = bands.remove(&unreachable_key) {
        annuli.push(rest);
    }
    let mut of = BTreeMap::new();
    for (j, a) in annuli.iter_mut().enumerate() {
        a.sort_unstable();
        for &v in a.iter() {
            of.insert(v, j);
        }
    }
    let mut cut_edges = Vec::new();
    for &u in vertices {
        for &(v, _) in g.neighbors(u) {
            if u < v && member[v] && of[&u] != of[&v] {
                cut_edges.push((u, v));
            }
        }
    }
    cut_edges.sort_unstable();
    ChopResult {
        annuli,
        offset: r0,
        delta,
        cut_edges,
    }
}

/// δ-chopping from `root` with a fixed offset `r0`.
pub fn chop_with_offset(g: &UnitDiskGraph, delta: u32, root: usize, r0: u32) -> ChopResult {
    let member = vec![true; g.n()];
    let vertices: Vec<usize> = (0..g.n()).collect();
    chop_restricted(g, &member, &vertices, delta, root, r0)
}

/// δ-chopping from `root` with `r0` uniform in `0..=delta`.
pub fn chop_once<R: Rng + ?Sized>(g: &UnitDiskGraph, delta: u32, root: usize, rng: &mut R) -> ChopResult {
    let delta = delta.max(1);
    let r0 = rng.gen_range(0..=delta);
    chop_with_offset(g, delta, root, r0)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IteratedChop {
    /// Final parts, each sorted, ordered by smallest member.
    pub parts: Vec<Vec<usize>>,
    pub delta: u32,
    pub rounds: usize,
    /// Maximum host hop weak diameter of a part divided by `delta`.
    pub max_weak_ratio: f64,
    /// Edges of `g` between different parts.
    pub cut_edges: usize,
}

/// Applies `rounds` rounds of chopping to every connected piece of `subset`.
///
/// Each round chops each current part from its smallest vertex inside the
/// part's induced subgraph and splits every annulus into its connected
/// components. Parts whose host hop weak diameter is already below `delta`
/// are left intact.
pub fn chop_iterated_within<R: Rng + ?Sized>(
    g: &UnitDiskGraph,
    subset: &[usize],
    delta: u32,
    rounds: usize,
    rng: &mut R,
) -> IteratedChop {
    let delta = delta.max(1);
    let mut parts = components_within(g, subset);
    let mut member = vec![false; g.n()];
    for _ in 0..rounds.max(1) {
        let mut next = Vec::new();
        for part in parts {
            if part.len() <= 1 || hop_weak_diameter(g, &part) < delta {
                next.push(part);
                continue;
            }
            for &v in &part {
                member[v] = true;
            }
            let r0 = rng.gen_range(0..=delta);
            let chop = chop_restricted(g, &member, &part, delta, part[0], r0);
            for &v in &part {
                member[v] = false;
            }
            for annulus in chop.annuli {
                if !annulus.is_empty() {
                    next.extend(components_within(g, &annulus));
                }
            }
        }
        parts = next;
    }
    parts.sort_by_key(|p| p[0]);
    let mut max_weak_ratio: f64 = 0.0;
    for p in &parts {
        max_weak_ratio = max_weak_ratio.max(hop_weak_diameter(g, p) as f64 / delta as f64);
    }
    let mut part_of = vec![usize::MAX; g.n()];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            part_of[v] = i;
        }
    }
    let cut_edges = g
        .edges()
        .filter(|&(u, v, _)| part_of[u] != usize::MAX && part_of[v] != usize::MAX && part_of[u] != part_of[v])
        .count();
    IteratedChop {
        parts,
        delta,
        rounds: rounds.max(1),
        max_weak_ratio,
        cut_edges,
    }
}

/// [`chop_iterated_within`] over all of `g`.
pub fn chop_iterated<R: Rng + ?Sized>(g: &UnitDiskGraph, delta: u32, rounds: usize, rng: &mut R) -> IteratedChop {
    let all: Vec<usize> = (0..g.n()).collect();
    chop_iterated_within(g, &all, delta, rounds, rng)
}

/// One independent sub-instance produced by layering.
#[derive(Debug, Clone)]
pub struct SubInstanceH {
    /// Instance on the padded graph, in local ids. Red-opened anchors inside
    /// the part and anchors of part clients lying outside it are free.
    pub inst: FLInstance,
    pub local_to_global: Vec<usize>,
    /// C_ℓ in global ids.
    pub core_clients: Vec<usize>,
    /// Chop part in global ids.
    pub part: Vec<usize>,
    /// Vertices added by padding, global ids, disjoint from `part`.
    pub padded_vertices: Vec<usize>,
    /// Measured weighted diameter of the padded graph.
    pub gamma: f64,
    /// Bundle band this part came from.
    pub band: i64,
}

impl SubInstanceH {
    pub fn to_global(&self, local: usize) -> usize {
        self.local_to_global[local]
    }

    pub fn to_local(&self, global: usize) -> Option<usize> {
        self.local_to_global.binary_search(&global).ok()
    }
}

/// Overrides for N and r; the measured values are used otherwise.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LayerParams {
    pub n_min: Option<f64>,
    pub r: Option<f64>,
    pub rounds: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayeringDiagnostics {
    pub n_min: f64,
    pub r: f64,
    /// Layer thickness in hops (`2 * ceil(7 N r)`).
    pub thickness: u64,
    pub bundle_layers: u64,
    pub offset: u64,
    pub layer_count: u64,
    pub band_count: usize,
    pub red_anchors: usize,
    pub inner_delta: u32,
    pub halvings: u32,
    /// Weak-diameter budget `r N / eps^2`.
    pub budget: f64,
    pub max_weak_diameter: f64,
    pub max_weak_ratio: f64,
    pub cut_fraction: f64,
    pub max_gamma: f64,
}

#[derive(Debug, Clone)]
pub struct LayeringResult {
    pub hs: Vec<SubInstanceH>,
    /// Anchors opened because they lie in red layers.
    pub red_open: Vec<usize>,
    /// Σ f + Σ d over red anchors and their removed clusters.
    pub opened_red_cost: f64,
    /// Clients removed with a red anchor: `(client, anchor, distance)`.
    pub removed: Vec<(usize, usize, f64)>,
    /// Anchors made free in a part because a part client's anchor lies outside.
    pub chop_open: Vec<usize>,
    /// Opening cost of `chop_open` not already covered by red anchors.
    pub chop_cost: f64,
    pub diagnostics: LayeringDiagnostics,
}

fn saturating_hops(x: f64) -> u64 {
    if !(x.is_finite()) || x >= 1e15 {
        1_000_000_000_000_000
    } else {
        libm::ceil(x).max(1.0) as u64
    }
}

/// Splits a structured sub-instance into independent sub-instances.
///
/// Hop levels are taken from the smallest vertex of each component of G.
/// Layers are `14 N r` hops thick and grouped into bundles of `ceil(eps^-2)`
/// layers with a random offset; the first layer of every bundle is red. Red
/// anchors open and take their clusters with them. Each bundle, shifted by
/// `7 N r` levels, is chopped so parts have weak diameter within `r N /
/// eps^2` and then padded by all vertices within that distance.
pub fn layer_and_bundle<R: Rng + ?Sized>(
    sub: &StructuredSubInstance,
    eps: f64,
    rng: &mut R,
) -> Result<LayeringResult> {
    layer_and_bundle_with(sub, eps, LayerParams::default(), rng)
}

pub fn layer_and_bundle_with<R: Rng + ?Sized>(
    sub: &StructuredSubInstance,
    eps: f64,
    params: LayerParams,
    rng: &mut R,
) -> Result<LayeringResult> {
    let g = sub.inst.graph();
    let n = g.n();
    let n_min = params.n_min.unwrap_or(sub.n_min);
    let r = params.r.unwrap_or_else(|| sub.effective_r());
    let rounds = params.rounds.unwrap_or(DEFAULT_ROUNDS);
    let nr = n_min * r;
    let half = saturating_hops(7.0 * nr).min(n as u64 + 1);
    let thickness = 2 * half;
    let bundle = libm::ceil(1.0 / (eps * eps)).max(1.0) as u64;
    let offset = rng.gen_range(0..bundle);
    let budget = nr / (eps * eps);

    // Hop levels from the smallest vertex of each component.
    let mut roots = Vec::new();
    let mut seen = BTreeSet::new();
    for v in 0..n {
        if seen.insert(g.component_id(v)) {
            roots.push(v);
        }
    }
    let all = vec![true; n];
    let level = restricted_bfs(g, &all, &roots);
    let layer = |v: usize| level[v] as u64 / thickness;
    let is_red = |v: usize| (layer(v) + offset) % bundle == 0;
    let band_of = |v: usize| -> i64 {
        let x = level[v] as i64 - half as i64 + (offset * thickness) as i64;
        x.div_euclid((bundle * thickness) as i64)
    };

    let mut anchor_of: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, cs) in &sub.cluster {
        for &c in cs {
            anchor_of.insert(c, a);
        }
    }
    let red_open: Vec<usize> = sub.anchors.iter().copied().filter(|&a| is_red(a)).collect();
    let mut removed = Vec::new();
    let mut opened_red_cost = 0.0;
    let mut red_clients = BTreeSet::new();
    for &a in &red_open {
        opened_red_cost += sub.inst.opening_cost(a).unwrap_or(0.0);
        if let Some(cs) = sub.cluster.get(&a) {
            let d = dijkstra(g, a);
            for &c in cs {
                removed.push((c, a, d[c]));
                opened_red_cost += d[c];
                red_clients.insert(c);
            }
        }
    }
    let remaining: Vec<usize> = sub
        .inst
        .clients()
        .iter()
        .copied()
        .filter(|c| !red_clients.contains(c))
        .collect();

    let mut band_clients: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for &c in &remaining {
        band_clients.entry(band_of(c)).or_default().push(c);
    }
    let mut band_vertices: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let b = band_of(v);
        if band_clients.contains_key(&b) {
            band_vertices.entry(b).or_default().push(v);
        }
    }

    // Only band components exceeding the budget are chopped.
    let has_client = |b: i64, p: &[usize]| p.iter().any(|v| band_clients[&b].binary_search(v).is_ok());
    let mut band_components: BTreeMap<i64, Vec<(Vec<usize>, bool)>> = BTreeMap::new();
    for (&b, vs) in &band_vertices {
        let comps = components_within(g, vs)
            .into_iter()
            .filter(|c| has_client(b, c))
            .map(|c| {
                let wide = weak_diameter(g, &c) > budget * (1.0 + 1e-12);
                (c, wide)
            })
            .collect();
        band_components.insert(b, comps);
    }
    let mut delta = saturating_hops(nr / (8.0 * eps * eps)).min(u32::MAX as u64) as u32;
    let mut halvings = 0;
    let mut chops: BTreeMap<i64, Vec<Vec<usize>>>;
    let mut max_weak;
    let mut max_weak_ratio: f64;
    let mut cut;
    loop {
        chops = BTreeMap::new();
        max_weak = 0.0f64;
        max_weak_ratio = 0.0;
        cut = 0usize;
        for (&b, comps) in &band_components {
            let mut parts = Vec::new();
            for (comp, wide) in comps {
                if !*wide {
                    max_weak = max_weak.max(weak_diameter(g, comp));
                    parts.push(comp.clone());
                    continue;
                }
                let chop = chop_iterated_within(g, comp, delta, rounds, rng);
                max_weak_ratio = max_weak_ratio.max(chop.max_weak_ratio);
                cut += chop.cut_edges;
                for p in chop.parts {
                    if has_client(b, &p) {
                        max_weak = max_weak.max(weak_diameter(g, &p));
                        parts.push(p);
                    }
                }
            }
            chops.insert(b, parts);
        }
        if max_weak <= budget * (1.0 + 1e-12) || delta == 1 {
            break;
        }
        delta = (delta / 2).max(1);
        halvings += 1;
    }

    let red_set: BTreeSet<usize> = red_open.iter().copied().collect();
    let mut hs = Vec::new();
    let mut chop_open = BTreeSet::new();
    let mut band_edges = 0usize;
    let mut max_gamma: f64 = 0.0;
    for (&b, parts) in &chops {
        let vs = &band_vertices[&b];
        band_edges += g
            .edges()
            .filter(|&(u, v, _)| vs.binary_search(&u).is_ok() && vs.binary_search(&v).is_ok())
            .count();
        for part in parts {
            let core: Vec<usize> = band_clients[&b]
                .iter()
                .copied()
                .filter(|c| part.binary_search(c).is_ok())
                .collect();
            if core.is_empty() {
                continue;
            }
            let outside: BTreeSet<usize> = core
                .iter()
                .filter_map(|c| anchor_of.get(c).copied())
                .filter(|a| part.binary_search(a).is_err())
                .collect();
            let mut vertices: BTreeSet<usize> = r_neighborhood(g, part, budget).into_iter().collect();
            vertices.extend(part.iter().copied());
            vertices.extend(outside.iter().copied());
            let vertices: Vec<usize> = vertices.into_iter().collect();
            let (hg, map) = g.induced(&vertices);
            let local = |v: usize| map.binary_search(&v).unwrap();
            let mut facilities = Vec::new();
            let mut free = Vec::new();
            for &(f, cost) in sub.inst.facilities() {
                let in_part = part.binary_search(&f).is_ok();
                if in_part || outside.contains(&f) {
                    facilities.push((local(f), cost));
                    if outside.contains(&f) || (in_part && red_set.contains(&f)) {
                        free.push(local(f));
                    }
                }
            }
            chop_open.extend(outside.iter().copied());
            let clients: Vec<usize> = core.iter().map(|&c| local(c)).collect();
            let inst = FLInstance::new(Arc::new(hg), clients, facilities)?.with_free(&free)?;
            let mut gamma: f64 = 0.0;
            for u in 0..inst.graph().n() {
                for d in dijkstra(inst.graph(), u) {
                    gamma = gamma.max(d);
                }
            }
            max_gamma = max_gamma.max(gamma);
            let padded_vertices = map
                .iter()
                .copied()
                .filter(|v| part.binary_search(v).is_err())
                .collect();
            hs.push(SubInstanceH {
                inst,
                local_to_global: map,
                core_clients: core,
                part: part.clone(),
                padded_vertices,
                gamma,
                band: b,
            });
        }
    }
    let chop_open: Vec<usize> = chop_open.into_iter().collect();
    let chop_cost = chop_open
        .iter()
        .filter(|a| !red_set.contains(a))
        .map(|&a| sub.inst.opening_cost(a).unwrap_or(0.0))
        .sum();
    let max_level = level.iter().copied().filter(|&l| l != UNREACHABLE_HOPS).max().unwrap_or(0) as u64;
    let diagnostics = LayeringDiagnostics {
        n_min,
        r,
        thickness,
        bundle_layers: bundle,
        offset,
        layer_count: max_level / thickness + 1,
        band_count: chops.len(),
        red_anchors: red_open.len(),
        inner_delta: delta,
        halvings,
        budget,
        max_weak_diameter: max_weak,
        max_weak_ratio,
        cut_fraction: if band_edges == 0 { 0.0 } else { cut as f64 / band_edges as f64 },
        max_gamma,
    };
    Ok(LayeringResult {
        hs,
        red_open,
        opened_red_cost,
        removed,
        chop_open,
        chop_cost,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn path(n: usize) -> UnitDiskGraph {
        let coords: Vec<(f64, f64)> = (0..n).map(|i| (i as f64 * 0.9, 0.0)).collect();
        UnitDiskGraph::from_coords(&coords).unwrap()
    }

    #[test]
    fn path_annuli_sizes() {
        let g = path(10);
        let c = chop_with_offset(&g, 3, 0, 1);
        let sizes: Vec<usize> = c.annuli.iter().map(|a| a.len()).collect();
        assert_eq!(sizes, vec![1, 3, 3, 3]);
        assert_eq!(c.cut_edges, vec![(0, 1), (3, 4), (6, 7)]);
    }

    #[test]
    fn large_delta_zero_offset_single_band() {
        let g = path(6);
        let c = chop_with_offset(&g, 50, 0, 0);
        assert_eq!(c.annuli.len(), 2);
        assert!(c.annuli[0].is_empty());
        assert_eq!(c.annuli[1].len(), 6);
        assert!(c.cut_edges.is_empty());
    }

    #[test]
    fn offset_within_range() {
        let g = path(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let c = chop_once(&g, 4, 0, &mut rng);
            assert!(c.offset <= 4);
            assert_eq!(c.annuli.iter().map(|a| a.len()).sum::<usize>(), 8);
        }
    }

    #[test]
    fn small_graph_left_intact() {
        let g = path(4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let it = chop_iterated(&g, 10, 4, &mut rng);
        assert_eq!(it.parts, vec![vec![0, 1, 2, 3]]);
        assert_eq!(it.cut_edges, 0);
    }

    #[test]
    fn long_path_parts_bounded() {
        let g = path(40);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let it = chop_iterated(&g, 5, 1, &mut rng);
        for p in &it.parts {
            assert!(p.len() <= 5, "part {:?}", p);
        }
        assert_eq!(it.parts.iter().map(|p| p.len()).sum::<usize>(), 40);
    }

    #[test]
    fn components_split() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (0.5, 0.0), (5.0, 0.0)]).unwrap();
        assert_eq!(components_within(&g, &[0, 1, 2]), vec![vec![0, 1], vec![2]]);
        assert_eq!(components_within(&g, &[0, 2]), vec![vec![0], vec![2]]);
    }

    fn strip_sub(n: usize, eps: f64) -> (FLInstance, StructuredSubInstance) {
        use crate::fl::Site;
        use crate::reduction::{aspect_bound, baseline_approx, filter_clients, partition_by_aspect};
        let sites: Vec<Site> = (0..n)
            .map(|i| Site {
                x: i as f64 * 0.45,
                y: if i % 2 == 0 { 0.0 } else { 0.3 },
                client: i % 3 != 0,
                facility: if i % 3 == 0 { Some(1.0) } else { None },
            })
            .collect();
        let inst = FLInstance::from_sites(&sites, false).unwrap();
        let base = baseline_approx(&inst, eps).unwrap();
        let (ip, _) = filter_clients(&inst, &base, eps);
        let mut subs = partition_by_aspect(&ip, &base, eps, aspect_bound(eps)).unwrap();
        (inst, subs.remove(0))
    }

    #[test]
    fn single_bundle_keeps_all_unremoved_clients() {
        let (_, sub) = strip_sub(12, 0.5);
        for seed in 0..8 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let lay = layer_and_bundle(&sub, 0.5, &mut rng).unwrap();
            assert_eq!(lay.diagnostics.layer_count, 1);
            let mut core: Vec<usize> = lay.hs.iter().flat_map(|h| h.core_clients.clone()).collect();
            core.extend(lay.removed.iter().map(|r| r.0));
            core.sort_unstable();
            assert_eq!(core, sub.inst.clients());
            assert!(lay.hs.len() <= 1);
        }
    }

    #[test]
    fn thin_layers_give_disjoint_feasible_parts() {
        let (_, sub) = strip_sub(60, 0.5);
        let params = LayerParams {
            n_min: Some(0.1),
            r: Some(1.0),
            rounds: None,
        };
        for seed in 0..6 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let lay = layer_and_bundle_with(&sub, 0.5, params, &mut rng).unwrap();
            assert!(lay.diagnostics.layer_count > 4);
            assert!(lay.hs.len() >= 2);
            let mut seen = BTreeSet::new();
            for h in &lay.hs {
                for &c in &h.core_clients {
                    assert!(seen.insert(c), "client {} in two parts", c);
                }
                for &p in &h.padded_vertices {
                    assert!(h.part.binary_search(&p).is_err());
                }
                let all = h.inst.facility_ids();
                crate::fl::evaluate(&h.inst, &all).unwrap();
                assert!(h.gamma <= 3.0 * lay.diagnostics.budget + 1e-9);
            }
            for &(c, _, _) in &lay.removed {
                assert!(seen.insert(c));
            }
            assert_eq!(seen.len(), sub.inst.clients().len());
        }
    }
}
