//! End-to-end solving with per-stage diagnostics and invariant audits.
//!
//! The approximation scheme runs: baseline on opening costs scaled by eps,
//! client filtering, aspect partition, then per sub-instance either the
//! bounded-region scheme (small N) or layering, net, decomposition tree and
//! the portal DP. DP runs that exceed the vector cap, or are infeasible under
//! the portal discretization, fall back to the bounded-region scheme and the
//! fallback is recorded.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;

use crate::boxptas::{instance_side, solve_bounded, BoxConfig, BoxDiagnostics, GridPartition, DEFAULT_GRID_TRIALS, DEFAULT_NET_ENUM_CAP};
use crate::chop::{layer_and_bundle, LayeringDiagnostics, SubInstanceH};
use crate::decomp::{build_decomp_tree, portal_detour_bound_audit, verify_tree_separators, DetourAudit, EPS_PRIME_FACTOR};
use crate::dp::{extract_solution, fill_table, problem_from_tree, DEFAULT_VECTOR_CAP};
use crate::error::{Error, Result};
use crate::fl::{evaluate, exact_solve, FLInstance, FLSolution, DEFAULT_ORACLE_CAP};
use crate::net::{build_net, NetGraph, NET_RADIUS};
use crate::reduction::{aspect_bound, baseline_approx, filter_clients, merge_solutions, partition_by_aspect, BaselineResult, CreditLedger, StructuredSubInstance};
use crate::SeededRng;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolverKind {
    Exact,
    Baseline,
    Qptas,
    Boxptas,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Baseline => "baseline",
            SolverKind::Qptas => "qptas",
            SolverKind::Boxptas => "boxptas",
        }
    }
}

impl core::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "baseline" => Ok(SolverKind::Baseline),
            "qptas" => Ok(SolverKind::Qptas),
            "boxptas" => Ok(SolverKind::Boxptas),
            _ => Err(Error::InvalidInput(format!("unknown solver `{}`", s))),
        }
    }
}

/// Which sub-instances go through layering and the DP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Routing {
    /// Bounded-region scheme when `N <= eps^-2`, layering otherwise.
    Auto,
    /// Layering and the DP for every sub-instance.
    Layered,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolveConfig {
    pub solver: SolverKind,
    pub eps: f64,
    /// Portal granularity; `eps / 16` when absent.
    pub eps_prime: Option<f64>,
    pub seed: u64,
    pub oracle_cap: usize,
    pub vector_cap: usize,
    pub net_enum_cap: usize,
    pub grid_trials: usize,
    /// Nets sampled when enumeration is refused.
    pub sample_nets: usize,
    /// Box side for the bounded-region solver; measured when absent.
    pub box_side: Option<f64>,
    pub detour_samples: usize,
    pub routing: Routing,
    /// Solve exactly as well, when small enough, to report ratios.
    pub compare_oracle: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            solver: SolverKind::Qptas,
            eps: 0.5,
            eps_prime: None,
            seed: 0,
            oracle_cap: DEFAULT_ORACLE_CAP,
            vector_cap: DEFAULT_VECTOR_CAP,
            net_enum_cap: DEFAULT_NET_ENUM_CAP,
            grid_trials: DEFAULT_GRID_TRIALS,
            sample_nets: 64,
            box_side: None,
            detour_samples: 10_000,
            routing: Routing::Auto,
            compare_oracle: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if let Some(e) = self.eps_prime {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::InvalidInput(format!("eps' must be positive, got {}", e)));
            }
        }
        for (name, v) in [
            ("oracle cap", self.oracle_cap),
            ("vector cap", self.vector_cap),
            ("net enumeration cap", self.net_enum_cap),
            ("grid trials", self.grid_trials),
            ("sampled nets", self.sample_nets),
        ] {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{} must be positive", name)));
            }
        }
        Ok(())
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_prime.unwrap_or(self.eps * EPS_PRIME_FACTOR)
    }

    fn box_config(&self) -> BoxConfig {
        BoxConfig {
            grid_trials: self.grid_trials,
            net_enum_cap: self.net_enum_cap,
            sample_nets: Some(self.sample_nets),
        }
    }
}

/// One invariant check: pass/fail with the first failure as witness.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuditOutcome {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

#[derive(Debug, Default)]
struct Audit {
    checked: usize,
    witness: Option<String>,
}

impl Audit {
    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self, name: &str) -> AuditOutcome {
        AuditOutcome {
            name: name.to_string(),
            passed: self.witness.is_none(),
            checked: self.checked,
            witness: self.witness,
        }
    }
}

/// Audits with equal names are folded together.
#[derive(Debug, Default)]
struct AuditBook {
    items: Vec<(String, Audit)>,
}

impl AuditBook {
    fn get(&mut self, name: &str) -> &mut Audit {
        let pos = match self.items.iter().position(|(n, _)| n == name) {
            Some(p) => p,
            None => {
                self.items.push((name.to_string(), Audit::default()));
                self.items.len() - 1
            }
        };
        &mut self.items[pos].1
    }

    fn check(&mut self, name: &str, ok: bool, witness: impl FnOnce() -> String) {
        self.get(name).check(ok, witness);
    }

    fn finish(self) -> Vec<AuditOutcome> {
        self.items.into_iter().map(|(n, a)| a.finish(&n)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DpDiagnostics {
    pub sentinel: u8,
    pub granularity: f64,
    pub entries: usize,
    pub root_cost: f64,
    pub true_cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HDiagnostics {
    pub vertices: usize,
    pub core_clients: usize,
    pub facilities: usize,
    pub gamma: f64,
    pub net_size: usize,
    pub net_base: usize,
    pub net_augmented: usize,
    pub net_size_bound: f64,
    pub tree_nodes: usize,
    pub tree_depth: usize,
    pub tree_depth_bound: usize,
    pub max_portals: usize,
    pub delta_portal: u32,
    pub delta_weighted: f64,
    pub detour: Option<DetourAudit>,
    pub dp: Option<DpDiagnostics>,
    /// Reason the bounded-region scheme replaced the DP.
    pub fallback: Option<String>,
    pub box_diagnostics: Option<BoxDiagnostics>,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubDiagnostics {
    pub clients: usize,
    pub facilities: usize,
    pub anchors: usize,
    pub n_min: f64,
    pub r: f64,
    pub aspect_ratio: f64,
    /// `box` or `layered`.
    pub route: String,
    pub layering: Option<LayeringDiagnostics>,
    pub opened_red_cost: f64,
    pub chop_cost: f64,
    pub hs: Vec<HDiagnostics>,
    pub box_diagnostics: Option<BoxDiagnostics>,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineSummary {
    pub open: Vec<usize>,
    pub alpha: f64,
    pub scale: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineDiagnostics {
    pub baseline: Option<BaselineSummary>,
    pub filtered_clients: usize,
    pub credits: Option<CreditLedger>,
    pub ledger_total: f64,
    pub aspect_bound: f64,
    pub subs: Vec<SubDiagnostics>,
    pub box_diagnostics: Option<BoxDiagnostics>,
    pub oracle_cost: Option<f64>,
    pub ratio: Option<f64>,
    /// Number of DP runs replaced by the bounded-region scheme.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineOutcome {
    pub solver: SolverKind,
    pub solution: FLSolution,
    pub diagnostics: PipelineDiagnostics,
    pub audits: Vec<AuditOutcome>,
}

impl PipelineOutcome {
    pub fn audits_pass(&self) -> bool {
        self.audits.iter().all(|a| a.passed)
    }
}

/// Solves `inst` with the configured solver.
pub fn run_pipeline(inst: &FLInstance, cfg: &SolveConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let mut rng = SeededRng::seed_from_u64(cfg.seed);
    let mut book = AuditBook::default();
    let mut diag = PipelineDiagnostics::default();
    let solution = match cfg.solver {
        SolverKind::Exact => exact_solve(inst, cfg.oracle_cap).map_err(|e| e.at("exact"))?,
        SolverKind::Baseline => {
            let base = baseline_approx(inst, 1.0).map_err(|e| e.at("baseline"))?;
            diag.baseline = Some(summary(&base, inst));
            let mut open = base.open.clone();
            open.extend_from_slice(inst.free());
            evaluate(inst, &open).map_err(|e| e.at("baseline"))?
        }
        SolverKind::Boxptas => {
            let side = cfg.box_side.unwrap_or_else(|| instance_side(inst));
            let out = solve_bounded(inst, side, cfg.eps, &cfg.box_config(), &mut rng).map_err(|e| e.at("box"))?;
            audit_grid_cells(inst, out.diagnostics.best_offset, &mut book);
            diag.box_diagnostics = Some(out.diagnostics);
            out.solution
        }
        SolverKind::Qptas => qptas(inst, cfg, &mut rng, &mut diag, &mut book)?,
    };

    let recomputed = evaluate(inst, &solution.open).map_err(|e| e.at("audit"))?;
    book.check("solution.recompute", (recomputed.total_cost - solution.total_cost).abs() <= TOL * (1.0 + solution.total_cost), || {
        format!("reported {} but nearest-open evaluation gives {}", solution.total_cost, recomputed.total_cost)
    });
    if cfg.compare_oracle && cfg.solver != SolverKind::Exact {
        let paid = inst.facilities().iter().filter(|(v, _)| !inst.is_free(*v)).count();
        if paid <= cfg.oracle_cap {
            let opt = exact_solve(inst, cfg.oracle_cap).map_err(|e| e.at("oracle"))?;
            book.check("oracle.dominance", solution.total_cost >= opt.total_cost - TOL * (1.0 + opt.total_cost), || {
                format!("cost {} below optimum {}", solution.total_cost, opt.total_cost)
            });
            diag.oracle_cost = Some(opt.total_cost);
            diag.ratio = Some(if opt.total_cost > 0.0 {
                solution.total_cost / opt.total_cost
            } else if solution.total_cost == 0.0 {
                1.0
            } else {
                f64::MAX
            });
        }
    }
    Ok(PipelineOutcome {
        solver: cfg.solver,
        solution,
        diagnostics: diag,
        audits: book.finish(),
    })
}

fn summary(base: &BaselineResult, inst: &FLInstance) -> BaselineSummary {
    BaselineSummary {
        open: base.open.clone(),
        alpha: base.alpha,
        scale: base.scale,
        cost: base.cost(inst),
    }
}

fn audit_grid_cells(inst: &FLInstance, offset: (f64, f64), book: &mut AuditBook) {
    let g = inst.graph();
    let grid = GridPartition::with_offset(g, offset);
    for (cell, vs) in &grid.cells {
        let ok = vs.iter().all(|&a| vs.iter().all(|&b| a == b || g.has_edge(a, b)));
        book.check("box.cell_adjacency", ok, || format!("cell {:?} holds non-adjacent points", cell));
    }
}

fn qptas(
    inst: &FLInstance,
    cfg: &SolveConfig,
    rng: &mut SeededRng,
    diag: &mut PipelineDiagnostics,
    book: &mut AuditBook,
) -> Result<FLSolution> {
    if inst.clients().is_empty() {
        return evaluate(inst, inst.free());
    }
    let eps = cfg.eps;
    let base = baseline_approx(inst, eps).map_err(|e| e.at("baseline"))?;
    diag.baseline = Some(summary(&base, inst));
    let (iprime, ledger) = filter_clients(inst, &base, eps);
    diag.filtered_clients = ledger.entries.len();
    diag.ledger_total = ledger.total_for(&[]);
    for &c in iprime.clients() {
        if let Some(&(a, d)) = base.anchor_of.get(&c) {
            let avg = base.avgcost[&a];
            let tol = 1e-12 * avg.max(1.0);
            book.check("filter.property_i", d + tol >= eps * eps * avg && d <= avg / (eps * eps) + tol, || {
                format!("client {} at distance {} from anchor {} with avgcost {}", c, d, a, avg)
            });
        }
    }
    let r = aspect_bound(eps);
    diag.aspect_bound = r;
    let subs = partition_by_aspect(&iprime, &base, eps, r).map_err(|e| e.at("partition"))?;

    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut dup = None;
    for sub in &subs {
        for &c in sub.inst.clients() {
            if !seen.insert(c) && dup.is_none() {
                dup = Some(c);
            }
        }
        book.check("partition.aspect", sub.aspect_ratio() <= r * (1.0 + 1e-12), || {
            format!("group aspect ratio {} exceeds {}", sub.aspect_ratio(), r)
        });
    }
    let expected: BTreeSet<usize> = iprime.clients().iter().copied().collect();
    book.check("partition.clients", dup.is_none() && seen == expected, || match dup {
        Some(c) => format!("client {} in two groups", c),
        None => format!("{} grouped clients, {} filtered clients", seen.len(), expected.len()),
    });

    let mut solved: Vec<(StructuredSubInstance, FLSolution)> = Vec::new();
    for sub in subs {
        let (sol, sd) = solve_sub(&sub, cfg, rng, diag, book)?;
        diag.subs.push(sd);
        solved.push((sub, sol));
    }
    let merged = merge_solutions(&solved, &ledger, inst).map_err(|e| e.at("merge"))?;
    let parts: f64 = solved.iter().map(|(_, s)| s.total_cost).sum();
    let bound = parts + ledger.total_for(&[]);
    book.check("merge.dominance", merged.total_cost <= bound + TOL * (1.0 + bound), || {
        format!("merged {} exceeds parts {} plus ledger {}", merged.total_cost, parts, ledger.total_for(&[]))
    });
    diag.credits = Some(ledger);
    Ok(merged)
}

fn solve_sub(
    sub: &StructuredSubInstance,
    cfg: &SolveConfig,
    rng: &mut SeededRng,
    diag: &mut PipelineDiagnostics,
    book: &mut AuditBook,
) -> Result<(FLSolution, SubDiagnostics)> {
    let eps = cfg.eps;
    let mut sd = SubDiagnostics {
        clients: sub.inst.clients().len(),
        facilities: sub.inst.facilities().len(),
        anchors: sub.anchors.len(),
        n_min: sub.n_min,
        r: sub.effective_r(),
        aspect_ratio: sub.aspect_ratio(),
        ..Default::default()
    };
    let small = sub.n_min <= 1.0 / (eps * eps);
    if cfg.routing == Routing::Auto && small {
        sd.route = "box".into();
        let out = solve_bounded(&sub.inst, instance_side(&sub.inst), eps, &cfg.box_config(), rng).map_err(|e| e.at("box"))?;
        audit_grid_cells(&sub.inst, out.diagnostics.best_offset, book);
        sd.cost = out.solution.total_cost;
        sd.box_diagnostics = Some(out.diagnostics);
        return Ok((out.solution, sd));
    }
    sd.route = "layered".into();
    let lay = layer_and_bundle(sub, eps, rng).map_err(|e| e.at("layering"))?;
    sd.opened_red_cost = lay.opened_red_cost;
    sd.chop_cost = lay.chop_cost;
    let budget = lay.diagnostics.budget;
    let mut open: BTreeSet<usize> = lay.red_open.iter().copied().collect();
    open.extend(lay.chop_open.iter().copied());
    let mut core_seen: BTreeSet<usize> = BTreeSet::new();
    for h in &lay.hs {
        for &c in &h.core_clients {
            book.check("layering.core_disjoint", core_seen.insert(c), || format!("client {} in two sub-instances", c));
        }
        audit_padding(h, &lay.chop_open, book);
        book.check("layering.gamma", h.gamma <= 3.0 * budget * (1.0 + 1e-9) + TOL, || {
            format!("diameter {} exceeds 3 r N / eps^2 = {}", h.gamma, 3.0 * budget)
        });
        let (h_open, hd) = solve_h(h, cfg, rng, book)?;
        if hd.fallback.is_some() {
            diag.fallbacks += 1;
        }
        open.extend(h_open.iter().map(|&v| h.to_global(v)));
        sd.hs.push(hd);
    }
    sd.layering = Some(lay.diagnostics);
    let open: Vec<usize> = open.into_iter().filter(|&v| sub.inst.is_facility(v)).collect();
    let sol = evaluate(&sub.inst, &open).map_err(|e| e.at("layering"))?;
    sd.cost = sol.total_cost;
    Ok((sol, sd))
}

fn audit_padding(h: &SubInstanceH, chop_open: &[usize], book: &mut AuditBook) {
    let part: BTreeSet<usize> = h.part.iter().copied().collect();
    for &c in h.inst.clients() {
        let g = h.to_global(c);
        book.check("layering.padding", part.contains(&g), || format!("padding brought in client {}", g));
    }
    for &(f, _) in h.inst.facilities() {
        let g = h.to_global(f);
        book.check("layering.padding", part.contains(&g) || chop_open.contains(&g), || {
            format!("padding brought in facility {}", g)
        });
    }
}

fn audit_net(net: &NetGraph, gamma: f64, book: &mut AuditBook) {
    let host = &*net.host;
    for (i, &a) in net.base.iter().enumerate() {
        for &b in &net.base[i + 1..] {
            let d = host.euclid(a, b);
            book.check("net.spacing", d >= NET_RADIUS, || format!("centers {} and {} are {} apart", a, b, d));
        }
    }
    for v in 0..host.n() {
        let c = net.ball_of[v];
        let d = host.euclid(v, c);
        book.check("net.coverage", d < NET_RADIUS && net.index_of(c).is_some(), || {
            format!("vertex {} is {} from its center {}", v, d, c)
        });
    }
    let bound = NetGraph::size_bound(gamma);
    book.check("net.size_bound", net.len() as f64 <= bound, || format!("|V'| = {} exceeds {}", net.len(), bound));
}

/// Net, tree and DP on one layered sub-instance; returns local open ids.
fn solve_h(h: &SubInstanceH, cfg: &SolveConfig, rng: &mut SeededRng, book: &mut AuditBook) -> Result<(Vec<usize>, HDiagnostics)> {
    let inst = &h.inst;
    let mut hd = HDiagnostics {
        vertices: inst.graph().n(),
        core_clients: h.core_clients.len(),
        facilities: inst.facilities().len(),
        gamma: h.gamma,
        ..Default::default()
    };
    let net = build_net(inst.graph_arc().clone());
    audit_net(&net, h.gamma, book);
    hd.net_size = net.len();
    hd.net_base = net.base.len();
    hd.net_augmented = net.augmented.len();
    hd.net_size_bound = NetGraph::size_bound(h.gamma);
    let tree = build_decomp_tree(&net, 0, cfg.eps_prime()).map_err(|e| e.at("decomposition"))?;
    hd.tree_nodes = tree.nodes.len();
    hd.tree_depth = tree.depth();
    hd.tree_depth_bound = crate::decomp::DecompTree::depth_bound(net.len());
    hd.max_portals = tree.max_portals();
    hd.delta_portal = tree.delta_portal;
    hd.delta_weighted = tree.delta_weighted;
    for (node, check) in verify_tree_separators(&net, &tree) {
        book.check("separator.verify", check.ok, || {
            format!("node {}: {}", node, check.reason.clone().unwrap_or_default())
        });
    }
    let detour = portal_detour_bound_audit(&net, &tree, cfg.detour_samples, rng);
    book.check("decomposition.detour", detour.violations == 0, || {
        format!("{} of {} pairs exceed the bound, max excess {}", detour.violations, detour.pairs, detour.max_excess)
    });
    hd.detour = Some(detour);

    let dp = problem_from_tree(inst, &net, &tree, cfg.vector_cap).and_then(|p| {
        let table = fill_table(&p)?;
        let sol = extract_solution(&p, &table, inst)?;
        Ok((p, table, sol))
    });
    match dp {
        Ok((p, table, sol)) => {
            let root = table.root_cost();
            book.check("dp.soundness", sol.total_cost <= root + TOL * (1.0 + root), || {
                format!("true cost {} exceeds DP root cost {}", sol.total_cost, root)
            });
            hd.dp = Some(DpDiagnostics {
                sentinel: p.k,
                granularity: p.g,
                entries: table.entry_count(),
                root_cost: root,
                true_cost: sol.total_cost,
            });
            hd.cost = sol.total_cost;
            Ok((sol.open, hd))
        }
        Err(e @ (Error::VectorCapExceeded { .. } | Error::DiscretizationInfeasible | Error::InvalidInput(_))) => {
            hd.fallback = Some(e.to_string());
            let out = solve_bounded(inst, instance_side(inst), cfg.eps, &cfg.box_config(), rng).map_err(|e| e.at("box"))?;
            hd.cost = out.solution.total_cost;
            let open = out.solution.open.clone();
            hd.box_diagnostics = Some(out.diagnostics);
            Ok((open, hd))
        }
        Err(e) => Err(e.at("dp")),
    }
}
