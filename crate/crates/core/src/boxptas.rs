//! Bounded-region scheme: candidate facility nets, a randomly shifted grid of
//! 1/2 × 1/2 cells, prize-collecting facility location per cell, assembly.
//!
//! Every point of a cell lies within distance `1/√2 < 1` of every other, so
//! cell points are pairwise adjacent and their graph distance is Euclidean.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fl::{evaluate, FLInstance, FLSolution};
use crate::udg::{nearest_source, UnitDiskGraph};

pub const GRID_CELL: f64 = 0.5;
pub const DEFAULT_GRID_TRIALS: usize = 32;
/// Cell facility count up to which PCFL is solved by enumeration.
pub const PCFL_EXACT_LIMIT: usize = 20;
/// Default cap on the number of enumerated candidate nets.
pub const DEFAULT_NET_ENUM_CAP: usize = 1 << 14;
/// Packing constant `c_net` in `ceil(c_net L / eps^2)`.
pub const NET_PACKING_CONSTANT: f64 = 64.0 / PI;

/// `ceil(64 L / (π eps^2))`.
pub fn net_size_cap(l: f64, eps: f64) -> usize {
    let v = libm::ceil(NET_PACKING_CONSTANT * l / (eps * eps));
    if v >= usize::MAX as f64 {
        usize::MAX
    } else {
        v as usize
    }
}

/// Most points pairwise at least `eps` apart inside an `L × L` box:
/// `(L + eps)^2 / (π (eps/2)^2)`.
pub fn packing_bound(l: f64, eps: f64) -> f64 {
    (l + eps) * (l + eps) / (PI * (eps / 2.0) * (eps / 2.0))
}

/// `Σ_{k <= cap} C(m, k)` in floating point.
pub fn candidate_count(m: usize, cap: usize) -> f64 {
    let mut total = 0.0;
    let mut c = 1.0;
    for k in 0..=cap.min(m) {
        if k > 0 {
            c = c * (m - k + 1) as f64 / k as f64;
        }
        total += c;
    }
    total
}

/// All subsets of at most `cap` elements of a sorted id list, by size then
/// lexicographically.
#[derive(Debug, Clone)]
pub struct CandidateNets {
    items: Vec<usize>,
    cap: usize,
    /// Current combination as indices; `None` once exhausted.
    idx: Option<Vec<usize>>,
}

impl Iterator for CandidateNets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.idx.take()?;
        let out = cur.iter().map(|&i| self.items[i]).collect();
        let m = self.items.len();
        let k = cur.len();
        let mut nxt = cur;
        let mut i = k;
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if nxt[i] < m - k + i {
                nxt[i] += 1;
                for j in i + 1..k {
                    nxt[j] = nxt[j - 1] + 1;
                }
                break true;
            }
        };
        if advanced {
            self.idx = Some(nxt);
        } else if k < self.cap.min(m) {
            self.idx = Some((0..k + 1).collect());
        }
        Some(out)
    }
}

/// Streams every facility subset of size at most `size_cap`; refuses when
/// their number exceeds `enum_cap`.
pub fn enumerate_candidate_nets(facilities: &[usize], size_cap: usize, enum_cap: usize) -> Result<CandidateNets> {
    let count = candidate_count(facilities.len(), size_cap);
    if count > enum_cap as f64 {
        return Err(Error::NetEnumerationInfeasible { count, cap: enum_cap });
    }
    let mut items = facilities.to_vec();
    items.sort_unstable();
    items.dedup();
    Ok(CandidateNets {
        items,
        cap: size_cap,
        idx: Some(Vec::new()),
    })
}

/// Facilities sorted by opening cost (ties by id), each kept when farther
/// than `eps` from every kept one. For `eps < 1` the kept set covers `set`
/// within graph distance `eps`.
pub fn greedy_facility_net(inst: &FLInstance, set: &[usize], eps: f64) -> Vec<usize> {
    let g = inst.graph();
    let mut order: Vec<(f64, usize)> = set.iter().map(|&v| (inst.opening_cost(v).unwrap_or(0.0), v)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut net: Vec<usize> = Vec::new();
    for (_, v) in order {
        if net.iter().all(|&u| g.euclid(u, v) > eps) {
            net.push(v);
        }
    }
    net.sort_unstable();
    net
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    pub offset: (f64, f64),
    /// Cell index → vertices, each list sorted.
    pub cells: BTreeMap<(i64, i64), Vec<usize>>,
}

impl GridPartition {
    pub fn cell_of(offset: (f64, f64), x: f64, y: f64) -> (i64, i64) {
        (
            libm::floor((x - offset.0) / GRID_CELL) as i64,
            libm::floor((y - offset.1) / GRID_CELL) as i64,
        )
    }

    pub fn with_offset(g: &UnitDiskGraph, offset: (f64, f64)) -> Self {
        let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for p in g.points() {
            cells.entry(Self::cell_of(offset, p.x, p.y)).or_default().push(p.id);
        }
        GridPartition { offset, cells }
    }

    /// True when `a` and `b` fall into different cells.
    pub fn cuts(&self, g: &UnitDiskGraph, a: usize, b: usize) -> bool {
        let (pa, pb) = (g.point(a), g.point(b));
        Self::cell_of(self.offset, pa.x, pa.y) != Self::cell_of(self.offset, pb.x, pb.y)
    }
}

/// Grid of cell size 1/2 with offset uniform in `[0, 1/2)^2`.
pub fn make_grid<R: Rng + ?Sized>(g: &UnitDiskGraph, rng: &mut R) -> GridPartition {
    let offset = (rng.gen_range(0.0..GRID_CELL), rng.gen_range(0.0..GRID_CELL));
    GridPartition::with_offset(g, offset)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PCFLInstance {
    pub clients: Vec<usize>,
    /// `(vertex, opening cost)` of the cell's facilities.
    pub facilities: Vec<(usize, f64)>,
    /// Per client, in `clients` order.
    pub penalty: Vec<f64>,
    /// Client-by-facility Euclidean distances, row-major.
    pub dist: Vec<f64>,
}

impl PCFLInstance {
    pub fn d(&self, ci: usize, fi: usize) -> f64 {
        self.dist[ci * self.facilities.len() + fi]
    }
}

/// Graph distance from every vertex to the net; infinite when it is empty.
pub fn net_penalties(g: &UnitDiskGraph, net: &[usize]) -> Vec<f64> {
    if net.is_empty() {
        return vec![f64::INFINITY; g.n()];
    }
    nearest_source(g, net, f64::INFINITY).dist
}

/// PCFL instance of a cell with penalties `d_G(j, F')`.
pub fn build_pcfl(cell: &[usize], inst: &FLInstance, net: &[usize]) -> PCFLInstance {
    build_pcfl_with(cell, inst, &net_penalties(inst.graph(), net))
}

/// As [`build_pcfl`] with precomputed per-vertex penalties.
pub fn build_pcfl_with(cell: &[usize], inst: &FLInstance, penalties: &[f64]) -> PCFLInstance {
    let g = inst.graph();
    let clients: Vec<usize> = cell.iter().copied().filter(|&v| inst.clients().binary_search(&v).is_ok()).collect();
    let facilities: Vec<(usize, f64)> = cell
        .iter()
        .filter_map(|&v| inst.opening_cost(v).map(|f| (v, f)))
        .collect();
    let mut dist = Vec::with_capacity(clients.len() * facilities.len());
    for &c in &clients {
        for &(f, _) in &facilities {
            dist.push(g.euclid(c, f));
        }
    }
    PCFLInstance {
        penalty: clients.iter().map(|&c| penalties[c]).collect(),
        clients,
        facilities,
        dist,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PCFLSolution {
    pub open: Vec<usize>,
    pub served: Vec<usize>,
    pub penalized: Vec<usize>,
    pub cost: f64,
    /// False when local search was used.
    pub exact: bool,
}

fn pcfl_cost(inst: &PCFLInstance, mask: &[bool]) -> f64 {
    let open: f64 = inst
        .facilities
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(f, _)| f.1)
        .sum();
    let mut total = open;
    for ci in 0..inst.clients.len() {
        let mut best = inst.penalty[ci];
        for fi in 0..inst.facilities.len() {
            if mask[fi] {
                best = best.min(inst.d(ci, fi));
            }
        }
        total += best;
    }
    total
}

fn pcfl_solution(inst: &PCFLInstance, mask: &[bool], exact: bool) -> PCFLSolution {
    let mut served = Vec::new();
    let mut penalized = Vec::new();
    for (ci, &c) in inst.clients.iter().enumerate() {
        let conn = (0..inst.facilities.len())
            .filter(|&fi| mask[fi])
            .map(|fi| inst.d(ci, fi))
            .fold(f64::INFINITY, f64::min);
        if conn <= inst.penalty[ci] {
            served.push(c);
        } else {
            penalized.push(c);
        }
    }
    PCFLSolution {
        open: inst
            .facilities
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(f, _)| f.0)
            .collect(),
        served,
        penalized,
        cost: pcfl_cost(inst, mask),
        exact,
    }
}

/// Exact enumeration for at most [`PCFL_EXACT_LIMIT`] facilities, otherwise
/// open/close/swap local search from the empty set. Ties keep the earlier
/// mask; a client equally far from its facility and its penalty is served.
pub fn solve_pcfl(inst: &PCFLInstance, _eps: f64) -> PCFLSolution {
    let k = inst.facilities.len();
    if k <= PCFL_EXACT_LIMIT {
        let mut best_mask = vec![false; k];
        let mut best = pcfl_cost(inst, &best_mask);
        let mut mask = vec![false; k];
        for bits in 1u32..(1u32 << k) {
            for (i, m) in mask.iter_mut().enumerate() {
                *m = bits >> i & 1 == 1;
            }
            let c = pcfl_cost(inst, &mask);
            if c < best {
                best = c;
                best_mask.clone_from(&mask);
            }
        }
        return pcfl_solution(inst, &best_mask, true);
    }
    let mut mask = vec![false; k];
    let mut best = pcfl_cost(inst, &mask);
    loop {
        let mut improved = false;
        for i in 0..k {
            mask[i] = !mask[i];
            let c = pcfl_cost(inst, &mask);
            if c + 1e-12 < best {
                best = c;
                improved = true;
            } else {
                mask[i] = !mask[i];
            }
        }
        for i in 0..k {
            if !mask[i] {
                continue;
            }
            for j in 0..k {
                if mask[j] {
                    continue;
                }
                mask[i] = false;
                mask[j] = true;
                let c = pcfl_cost(inst, &mask);
                if c + 1e-12 < best {
                    best = c;
                    improved = true;
                    break;
                }
                mask[i] = true;
                mask[j] = false;
            }
        }
        if !improved {
            break;
        }
    }
    pcfl_solution(inst, &mask, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxConfig {
    pub grid_trials: usize,
    /// Most candidate nets enumerated before refusing.
    pub net_enum_cap: usize,
    /// Nets to sample when enumeration is refused; `None` propagates the error.
    pub sample_nets: Option<usize>,
}

impl Default for BoxConfig {
    fn default() -> Self {
        BoxConfig {
            grid_trials: DEFAULT_GRID_TRIALS,
            net_enum_cap: DEFAULT_NET_ENUM_CAP,
            sample_nets: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxDiagnostics {
    pub side: f64,
    pub net_size_cap: usize,
    pub candidate_count: f64,
    pub nets_tried: usize,
    pub grid_trials: usize,
    pub max_cell_facilities: usize,
    pub local_search_cells: usize,
    pub infeasible_assemblies: usize,
    /// Nets were sampled rather than enumerated.
    pub heuristic: bool,
    pub best_net: Vec<usize>,
    pub best_offset: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxOutcome {
    pub solution: FLSolution,
    pub diagnostics: BoxDiagnostics,
}

/// Side of the smallest axis-parallel square containing every client and
/// facility of the instance.
pub fn instance_side(inst: &FLInstance) -> f64 {
    let g = inst.graph();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let fac = inst.facilities().iter().map(|&(v, _)| v);
    for v in inst.clients().iter().copied().chain(fac) {
        let p = g.point(v);
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    if x0 > x1 {
        0.0
    } else {
        (x1 - x0).max(y1 - y0)
    }
}

fn sampled_nets<R: Rng + ?Sized>(inst: &FLInstance, eps: f64, count: usize, size_cap: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let ids = inst.facility_ids();
    let mut nets = vec![Vec::new(), greedy_facility_net(inst, &ids, eps)];
    while nets.len() < count.max(2) {
        let mut s: Vec<usize> = ids.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        s.truncate(size_cap);
        nets.push(s);
    }
    nets
}

/// Best assembled solution over candidate nets and random grids.
///
/// For each net F' and grid, every cell is solved as PCFL with penalties
/// `d_G(j, F')`; F', the cell openings and all free facilities are opened and
/// the result is re-evaluated exactly. Assemblies with an unreachable client
/// are skipped.
pub fn solve_bounded<R: Rng + ?Sized>(
    inst: &FLInstance,
    l: f64,
    eps: f64,
    cfg: &BoxConfig,
    rng: &mut R,
) -> Result<BoxOutcome> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(alloc::format!("eps must lie in (0, 1), got {}", eps)));
    }
    let g = inst.graph();
    let side = instance_side(inst);
    if !(l.is_finite() && side <= l + 1e-9) {
        return Err(Error::InvalidInput(alloc::format!(
            "points span {} which exceeds box side {}",
            side,
            l
        )));
    }
    let size_cap = net_size_cap(l, eps);
    let ids = inst.facility_ids();
    let mut diag = BoxDiagnostics {
        side,
        net_size_cap: size_cap,
        candidate_count: candidate_count(ids.len(), size_cap),
        grid_trials: cfg.grid_trials.max(1),
        ..Default::default()
    };
    let nets: Vec<Vec<usize>> = match enumerate_candidate_nets(&ids, size_cap, cfg.net_enum_cap) {
        Ok(it) => it.collect(),
        Err(e) => match cfg.sample_nets {
            Some(k) => {
                diag.heuristic = true;
                sampled_nets(inst, eps, k, size_cap, rng)
            }
            None => return Err(e),
        },
    };
    let grids: Vec<GridPartition> = (0..diag.grid_trials).map(|_| make_grid(g, rng)).collect();
    let mut best: Option<FLSolution> = None;
    for net in &nets {
        diag.nets_tried += 1;
        let pen = net_penalties(g, net);
        for grid in &grids {
            let mut open: Vec<usize> = net.clone();
            open.extend_from_slice(inst.free());
            for cell in grid.cells.values() {
                let p = build_pcfl_with(cell, inst, &pen);
                diag.max_cell_facilities = diag.max_cell_facilities.max(p.facilities.len());
                let s = solve_pcfl(&p, eps);
                if !s.exact {
                    diag.local_search_cells += 1;
                }
                open.extend(s.open);
            }
            match evaluate(inst, &open) {
                Ok(sol) => {
                    if best.as_ref().is_none_or(|b| sol.total_cost < b.total_cost) {
                        diag.best_net = net.clone();
                        diag.best_offset = grid.offset;
                        best = Some(sol);
                    }
                }
                Err(Error::InfeasibleAssignment { .. }) => diag.infeasible_assemblies += 1,
                Err(e) => return Err(e),
            }
        }
    }
    match best {
        Some(solution) => Ok(BoxOutcome {
            solution,
            diagnostics: diag,
        }),
        None => match inst.clients().first() {
            Some(&client) => Err(Error::InfeasibleAssignment { client }),
            None => Ok(BoxOutcome {
                solution: evaluate(inst, inst.free())?,
                diagnostics: diag,
            }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl::{exact_solve, Site};
    use crate::SeededRng;
    use rand::SeedableRng;

    fn site(x: f64, y: f64, client: bool, facility: Option<f64>) -> Site {
        Site { x, y, client, facility }
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_candidate_nets(&[4, 5, 6], 1, 100).unwrap().count(), 4);
        let all: Vec<Vec<usize>> = enumerate_candidate_nets(&[1, 2, 3], 5, 100).unwrap().collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], Vec::<usize>::new());
        assert_eq!(all[7], vec![1, 2, 3]);
        for m in 0..9 {
            for cap in 0..10 {
                let ids: Vec<usize> = (0..m).collect();
                let n = enumerate_candidate_nets(&ids, cap, 1 << 20).unwrap().count();
                assert_eq!(n as f64, candidate_count(m, cap));
            }
        }
        assert!(matches!(
            enumerate_candidate_nets(&[0, 1, 2, 3], 4, 15),
            Err(Error::NetEnumerationInfeasible { .. })
        ));
    }

    #[test]
    fn grid_cells_are_cliques() {
        let coords: Vec<(f64, f64)> = (0..40).map(|i| ((i as f64 * 0.137) % 2.0, (i as f64 * 0.291) % 2.0)).collect();
        let g = UnitDiskGraph::from_coords(&coords).unwrap();
        let mut rng = SeededRng::seed_from_u64(3);
        let grid = make_grid(&g, &mut rng);
        assert!(grid.offset.0 >= 0.0 && grid.offset.0 < 0.5);
        let total: usize = grid.cells.values().map(|c| c.len()).sum();
        assert_eq!(total, 40);
        for cell in grid.cells.values() {
            for &a in cell {
                for &b in cell {
                    assert!(a == b || g.has_edge(a, b));
                }
            }
        }
    }

    #[test]
    fn far_points_always_cut() {
        let g = UnitDiskGraph::from_coords(&[(0.0, 0.0), (2.0, 0.0)]).unwrap();
        let mut rng = SeededRng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(make_grid(&g, &mut rng).cuts(&g, 0, 1));
        }
    }

    #[test]
    fn penalty_cheaper_than_opening() {
        let p = PCFLInstance {
            clients: vec![0],
            facilities: vec![(1, 5.0)],
            penalty: vec![0.1],
            dist: vec![0.2],
        };
        let s = solve_pcfl(&p, 0.5);
        assert_eq!(s.cost, 0.1);
        assert_eq!(s.penalized, vec![0]);
        assert!(s.open.is_empty());
    }

    #[test]
    fn penalties_from_net() {
        let inst = FLInstance::from_sites(
            &[site(0.0, 0.0, true, Some(1.0)), site(0.3, 0.0, true, None), site(0.9, 0.0, true, Some(2.0))],
            false,
        )
        .unwrap();
        let p = build_pcfl(&[0, 1], &inst, &[0]);
        assert_eq!(p.penalty, vec![0.0, 0.3]);
        let q = build_pcfl(&[0, 1], &inst, &[]);
        assert!(q.penalty.iter().all(|x| x.is_infinite()));
    }

    #[test]
    fn bounded_single_facility() {
        let inst = FLInstance::from_sites(
            &[site(0.0, 0.0, false, Some(1.0)), site(0.3, 0.2, true, None), site(0.6, 0.1, true, None)],
            false,
        )
        .unwrap();
        let mut rng = SeededRng::seed_from_u64(9);
        let out = solve_bounded(&inst, 1.0, 0.5, &BoxConfig::default(), &mut rng).unwrap();
        assert_eq!(out.solution, evaluate(&inst, &[0]).unwrap());
    }

    #[test]
    fn bounded_never_beats_opt() {
        let mut rng = SeededRng::seed_from_u64(17);
        for _ in 0..5 {
            let sites: Vec<Site> = (0..12)
                .map(|i| {
                    let x = rng.gen_range(0.0..1.5);
                    let y = rng.gen_range(0.0..1.5);
                    site(x, y, i % 2 == 0, (i % 3 == 0).then(|| rng.gen_range(0.1..2.0)))
                })
                .collect();
            let inst = FLInstance::from_sites(&sites, true).unwrap();
            if !inst.graph().is_connected() {
                continue;
            }
            let opt = exact_solve(&inst, 24).unwrap();
            let cfg = BoxConfig {
                grid_trials: 4,
                ..Default::default()
            };
            let out = solve_bounded(&inst, 1.5, 0.5, &cfg, &mut rng).unwrap();
            assert!(out.solution.total_cost >= opt.total_cost - 1e-9);
        }
    }

    #[test]
    fn greedy_net_is_spaced_and_covers() {
        let coords: Vec<(f64, f64)> = (0..30).map(|i| ((i as f64 * 0.173) % 1.0, (i as f64 * 0.377) % 1.0)).collect();
        let sites: Vec<Site> = coords.iter().map(|&(x, y)| site(x, y, false, Some(1.0))).collect();
        let inst = FLInstance::from_sites(&sites, false).unwrap();
        let all = inst.facility_ids();
        let net = greedy_facility_net(&inst, &all, 0.3);
        let g = inst.graph();
        for &a in &net {
            for &b in &net {
                assert!(a == b || g.euclid(a, b) > 0.3);
            }
        }
        for &v in &all {
            assert!(net.iter().any(|&u| g.euclid(u, v) <= 0.3));
        }
        assert!((net.len() as f64) <= packing_bound(1.0, 0.3));
    }
}
