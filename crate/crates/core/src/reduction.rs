//! Reduction to structured instances.
//!
//! A primal-dual baseline on opening costs scaled by `scale` yields the anchor
//! set D̃ with its clusters and average costs. Clients whose anchor distance
//! falls outside `[eps^2 * avgcost, eps^-2 * avgcost]` are pre-assigned to
//! their anchor in a [`CreditLedger`]; the remaining anchors are grouped by
//! average cost into sub-instances of bounded aspect ratio.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fl::{evaluate, Assignment, FLInstance, FLSolution};
use crate::udg::nearest_source;

/// Approximation ratio proven for the primal-dual baseline.
pub const BASELINE_ALPHA: f64 = 3.0;

/// Hard cap on the configured aspect-ratio bound.
pub const ASPECT_CAP: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineResult {
    /// D̃: open facilities, each with a nonempty cluster.
    pub open: Vec<usize>,
    pub cluster: BTreeMap<usize, Vec<usize>>,
    pub avgcost: BTreeMap<usize, f64>,
    /// Anchor of every client and its distance to it.
    pub anchor_of: BTreeMap<usize, (usize, f64)>,
    pub alpha: f64,
    pub scale: f64,
}

impl BaselineResult {
    /// `Σ_i (f_i + Σ_{j ∈ cluster(i)} d(j, i))` with unscaled opening costs.
    pub fn cost(&self, inst: &FLInstance) -> f64 {
        self.open
            .iter()
            .map(|&i| inst.opening_cost(i).unwrap_or(0.0))
            .sum::<f64>()
            + self.anchor_of.values().map(|&(_, d)| d).sum::<f64>()
    }
}

/// Jain-Vazirani primal-dual: returns the open set of the scaled instance.
///
/// Phase one raises client duals uniformly; a facility becomes tentatively
/// open once its opening cost (times `scale`) is paid for, and active clients
/// freeze on reaching a tentatively open facility. Phase two keeps a maximal
/// set of tentatively open facilities, in opening order, that share no client
/// with positive contribution.
pub fn primal_dual(inst: &FLInstance, scale: f64) -> Result<Vec<usize>> {
    let nc = inst.clients().len();
    if nc == 0 {
        return Ok(Vec::new());
    }
    let table = inst.distance_table();
    let nf = table.nf;
    let cost: Vec<f64> = inst.facilities().iter().map(|&(_, f)| f * scale).collect();
    let scale_tol = 1e-12
        * (1.0
            + cost.iter().copied().fold(0.0, f64::max)
            + table.d.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max));

    let mut t = 0.0f64;
    let mut active = vec![true; nc];
    let mut alpha = vec![0.0f64; nc];
    let mut open_time: Vec<Option<f64>> = vec![None; nf];
    let mut remaining = nc;

    let paid = |i: usize, t: f64, active: &[bool], alpha: &[f64]| -> (f64, usize) {
        let mut pay = 0.0;
        let mut rate = 0;
        for j in 0..nc {
            let d = table.get(j, i);
            if active[j] {
                if d <= t + scale_tol {
                    pay += (t - d).max(0.0);
                    rate += 1;
                }
            } else {
                pay += (alpha[j] - d).max(0.0);
            }
        }
        (pay, rate)
    };

    loop {
        // Settle everything that happens at time t.
        loop {
            let mut changed = false;
            for i in 0..nf {
                if open_time[i].is_none() {
                    let (pay, _) = paid(i, t, &active, &alpha);
                    if pay >= cost[i] - scale_tol {
                        open_time[i] = Some(t);
                        changed = true;
                    }
                }
            }
            for j in 0..nc {
                if !active[j] {
                    continue;
                }
                let reached = (0..nf).any(|i| open_time[i].is_some() && table.get(j, i) <= t + scale_tol);
                if reached {
                    active[j] = false;
                    alpha[j] = t;
                    remaining -= 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if remaining == 0 {
            break;
        }
        let mut next = f64::INFINITY;
        for i in 0..nf {
            for j in 0..nc {
                if active[j] {
                    let d = table.get(j, i);
                    if d > t + scale_tol && d < next {
                        next = d;
                    }
                }
            }
            if open_time[i].is_none() {
                let (pay, rate) = paid(i, t, &active, &alpha);
                if rate > 0 {
                    let when = t + (cost[i] - pay) / rate as f64;
                    if when < next {
                        next = when;
                    }
                }
            }
        }
        if !next.is_finite() {
            let client = (0..nc).find(|&j| active[j]).map(|j| inst.clients()[j]).unwrap_or(0);
            return Err(Error::InfeasibleAssignment { client });
        }
        t = next.max(t);
    }

    let mut order: Vec<usize> = (0..nf).filter(|&i| open_time[i].is_some()).collect();
    order.sort_by(|&a, &b| {
        open_time[a]
            .unwrap()
            .total_cmp(&open_time[b].unwrap())
            .then(a.cmp(&b))
    });
    let contributes = |i: usize, j: usize| alpha[j] - table.get(j, i) > scale_tol;
    let mut chosen: Vec<usize> = Vec::new();
    for &i in &order {
        let conflict = chosen
            .iter()
            .any(|&k| (0..nc).any(|j| contributes(i, j) && contributes(k, j)));
        if !conflict {
            chosen.push(i);
        }
    }
    let mut open: Vec<usize> = chosen.iter().map(|&i| inst.facilities()[i].0).collect();
    open.sort_unstable();
    Ok(open)
}

/// Runs the baseline on opening costs scaled by `scale` and derives clusters
/// (nearest-open assignment) and average costs with the original opening
/// costs. Facilities that end up serving nobody are dropped from D̃.
pub fn baseline_approx(inst: &FLInstance, scale: f64) -> Result<BaselineResult> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidInput(alloc::format!("scale {} outside (0, 1]", scale)));
    }
    let open = primal_dual(inst, scale)?;
    let sol = evaluate(inst, &open)?;
    let mut cluster: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut anchor_of = BTreeMap::new();
    for a in &sol.assignment {
        cluster.entry(a.facility).or_default().push(a.client);
        anchor_of.insert(a.client, (a.facility, a.route_cost));
    }
    let mut avgcost = BTreeMap::new();
    for (&i, members) in &cluster {
        let f = inst.opening_cost(i).unwrap_or(0.0);
        let conn: f64 = members.iter().map(|c| anchor_of[c].1).sum();
        avgcost.insert(i, (f + conn) / members.len() as f64);
    }
    Ok(BaselineResult {
        open: cluster.keys().copied().collect(),
        cluster,
        avgcost,
        anchor_of,
        alpha: BASELINE_ALPHA,
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Credit {
    pub client: usize,
    pub anchor: usize,
    pub route_cost: f64,
}

/// Clients removed by filtering, each pre-assigned to its anchor.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CreditLedger {
    pub entries: Vec<Credit>,
    /// Distinct anchors of removed clients with their opening cost.
    pub anchors: Vec<(usize, f64)>,
}

impl CreditLedger {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn anchor_ids(&self) -> Vec<usize> {
        self.anchors.iter().map(|&(a, _)| a).collect()
    }

    /// Extra cost of extending a solution with open set `open`: every removed
    /// client's route plus the opening cost of each anchor not already open.
    pub fn total_for(&self, open: &[usize]) -> f64 {
        let routes: f64 = self.entries.iter().map(|c| c.route_cost).sum();
        let opening: f64 = self
            .anchors
            .iter()
            .filter(|(a, _)| !open.contains(a))
            .map(|&(_, f)| f)
            .sum();
        routes + opening
    }

    /// Extends a solution of the filtered instance to the original one:
    /// ledger anchors are opened and removed clients keep their pre-assignment.
    pub fn extend(&self, original: &FLInstance, sol: &FLSolution) -> FLSolution {
        let mut open = sol.open.clone();
        open.extend(self.anchor_ids());
        let mut assignment = sol.assignment.clone();
        assignment.extend(self.entries.iter().map(|c| Assignment {
            client: c.client,
            facility: c.anchor,
            route_cost: c.route_cost,
        }));
        assignment.sort_by_key(|a| a.client);
        FLSolution::from_parts(original, open, assignment)
    }
}

/// Removes clients violating `eps^2 * avgcost <= d(j, anchor) <= eps^-2 * avgcost`.
pub fn filter_clients(
    inst: &FLInstance,
    base: &BaselineResult,
    eps: f64,
) -> (FLInstance, CreditLedger) {
    let lo_factor = eps * eps;
    let hi_factor = 1.0 / (eps * eps);
    let mut kept = Vec::new();
    let mut ledger = CreditLedger::default();
    let mut anchors = BTreeSet::new();
    for &c in inst.clients() {
        let Some(&(anchor, d)) = base.anchor_of.get(&c) else {
            kept.push(c);
            continue;
        };
        let avg = base.avgcost[&anchor];
        let tol = 1e-12 * avg.max(1.0);
        if d + tol < lo_factor * avg || d > hi_factor * avg + tol {
            ledger.entries.push(Credit {
                client: c,
                anchor,
                route_cost: d,
            });
            anchors.insert(anchor);
        } else {
            kept.push(c);
        }
    }
    ledger.anchors = anchors
        .into_iter()
        .map(|a| (a, inst.opening_cost(a).unwrap_or(0.0)))
        .collect();
    (inst.with_clients(kept), ledger)
}

/// Configured aspect-ratio bound `min(eps^-ceil(eps^-2), 1e6)`.
pub fn aspect_bound(eps: f64) -> f64 {
    let exponent = libm::ceil(1.0 / (eps * eps));
    libm::pow(1.0 / eps, exponent).min(ASPECT_CAP)
}

#[derive(Debug, Clone)]
pub struct StructuredSubInstance {
    pub inst: FLInstance,
    /// D̃ members owning this group's clusters, sorted.
    pub anchors: Vec<usize>,
    pub cluster: BTreeMap<usize, Vec<usize>>,
    pub avgcost: BTreeMap<usize, f64>,
    /// Minimum client-to-anchor distance (N).
    pub n_min: f64,
    /// Configured aspect-ratio bound (r).
    pub r: f64,
    /// Measured `max(max d(j, anchor), max avgcost) / N`; infinite when N = 0.
    pub spread: f64,
}

impl StructuredSubInstance {
    /// Largest client-anchor distance over this group.
    pub fn max_anchor_distance(&self) -> f64 {
        self.cluster
            .iter()
            .flat_map(|(&a, cs)| cs.iter().map(move |&c| (a, c)))
            .map(|(a, c)| self.anchor_distance(a, c))
            .fold(0.0, f64::max)
    }

    pub fn anchor_distance(&self, anchor: usize, client: usize) -> f64 {
        nearest_source(self.inst.graph(), &[anchor], f64::INFINITY).dist[client]
    }

    /// Aspect ratio of the average costs over the anchors.
    pub fn aspect_ratio(&self) -> f64 {
        aspect_of(self.avgcost.values().copied())
    }

    /// Bound used for layering: the configured r, raised to the measured
    /// spread so that `N <= d(j, anchor) <= r N` holds for every client.
    pub fn effective_r(&self) -> f64 {
        if self.spread.is_finite() {
            self.r.max(self.spread)
        } else {
            self.r
        }
    }
}

fn aspect_of(values: impl Iterator<Item = f64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in values {
        if !v.is_finite() {
            return f64::INFINITY;
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi == 0.0 {
        1.0
    } else if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Groups anchors of the filtered instance by average cost.
///
/// Anchors are sorted by avgcost and a new group starts wherever consecutive
/// values differ by more than a factor `eps^-2`, or where extending the group
/// would push its aspect ratio past `r`. Each group gets its clusters' clients
/// and every facility within `eps^-2 * (group max avgcost)` of one of its
/// anchors.
pub fn partition_by_aspect(
    iprime: &FLInstance,
    base: &BaselineResult,
    eps: f64,
    r: f64,
) -> Result<Vec<StructuredSubInstance>> {
    let gap = 1.0 / (eps * eps);
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &c in iprime.clients() {
        if let Some(&(a, _)) = base.anchor_of.get(&c) {
            clusters.entry(a).or_default().push(c);
        }
    }
    let mut anchors: Vec<usize> = clusters.keys().copied().collect();
    anchors.sort_by(|a, b| base.avgcost[a].total_cmp(&base.avgcost[b]).then(a.cmp(b)));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_min = 0.0;
    let mut prev = 0.0;
    for &a in &anchors {
        let v = base.avgcost[&a];
        let start_new = match groups.last() {
            None => true,
            Some(_) => {
                let jump = if prev == 0.0 { v > 0.0 } else { v > gap * prev };
                let span = if group_min == 0.0 { v > 0.0 } else { v > r * group_min };
                jump || span
            }
        };
        if start_new {
            groups.push(Vec::new());
            group_min = v;
        }
        groups.last_mut().unwrap().push(a);
        prev = v;
    }

    let graph = iprime.graph();
    let mut out = Vec::with_capacity(groups.len());
    for group in groups {
        let ratio = aspect_of(group.iter().map(|a| base.avgcost[a]));
        if !(ratio <= r) {
            return Err(Error::AspectPartitionFailed { ratio, bound: r });
        }
        let max_avg = group.iter().map(|a| base.avgcost[a]).fold(0.0, f64::max);
        let radius = gap * max_avg;
        let reach = nearest_source(graph, &group, radius * (1.0 + 1e-12) + 1e-12);
        let facilities: Vec<(usize, f64)> = iprime
            .facilities()
            .iter()
            .copied()
            .filter(|&(f, _)| reach.dist[f].is_finite() || group.contains(&f))
            .collect();
        let mut clients = Vec::new();
        let mut cluster = BTreeMap::new();
        let mut avgcost = BTreeMap::new();
        let mut n_min = f64::INFINITY;
        let mut d_max = 0.0f64;
        for &a in &group {
            let members = clusters[&a].clone();
            for c in &members {
                let d = base.anchor_of[c].1;
                n_min = n_min.min(d);
                d_max = d_max.max(d);
            }
            clients.extend(members.iter().copied());
            cluster.insert(a, members);
            avgcost.insert(a, base.avgcost[&a]);
        }
        let mut anchors_sorted = group.clone();
        anchors_sorted.sort_unstable();
        let inst = FLInstance::new(iprime.graph_arc().clone(), clients, facilities)?;
        let spread = if n_min > 0.0 {
            d_max.max(max_avg) / n_min
        } else {
            f64::INFINITY
        };
        out.push(StructuredSubInstance {
            inst,
            anchors: anchors_sorted,
            cluster,
            avgcost,
            n_min,
            r,
            spread,
        });
    }
    Ok(out)
}

/// Combines sub-solutions: opens the union of their open sets and the ledger
/// anchors, then reassigns every original client to its nearest open facility.
pub fn merge_solutions(
    subs: &[(StructuredSubInstance, FLSolution)],
    ledger: &CreditLedger,
    original: &FLInstance,
) -> Result<FLSolution> {
    let mut open: BTreeSet<usize> = BTreeSet::new();
    for (_, sol) in subs {
        open.extend(sol.open.iter().copied());
    }
    open.extend(ledger.anchor_ids());
    let open: Vec<usize> = open.into_iter().collect();
    evaluate(original, &open)
}
