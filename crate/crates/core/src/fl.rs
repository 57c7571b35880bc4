//! Facility-location instances, solutions and the exact oracle.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::udg::{build_udg, nearest_source, Point, UnitDiskGraph};

/// Default cap on non-free facilities for [`exact_solve`].
pub const DEFAULT_ORACLE_CAP: usize = 24;

/// One input record: a location with optional client and facility roles.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Site {
    pub x: f64,
    pub y: f64,
    pub client: bool,
    /// Opening cost when the site hosts a facility.
    pub facility: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FLInstance {
    graph: Arc<UnitDiskGraph>,
    clients: Vec<usize>,
    /// `(vertex, opening cost)` sorted by vertex.
    facilities: Vec<(usize, f64)>,
    /// Facilities that are already open; they carry cost 0.
    free: Vec<usize>,
}

impl FLInstance {
    pub fn new(
        graph: Arc<UnitDiskGraph>,
        mut clients: Vec<usize>,
        mut facilities: Vec<(usize, f64)>,
    ) -> Result<Self> {
        let n = graph.n();
        clients.sort_unstable();
        clients.dedup();
        if let Some(&c) = clients.iter().find(|&&c| c >= n) {
            return Err(Error::InvalidInput(alloc::format!("client {} out of range", c)));
        }
        facilities.sort_by_key(|&(v, _)| v);
        for w in facilities.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(alloc::format!(
                    "facility {} listed twice",
                    w[0].0
                )));
            }
        }
        for &(v, f) in &facilities {
            if v >= n {
                return Err(Error::InvalidInput(alloc::format!("facility {} out of range", v)));
            }
            if !(f >= 0.0) || !f.is_finite() {
                return Err(Error::InvalidInput(alloc::format!(
                    "facility {} has invalid opening cost {}",
                    v,
                    f
                )));
            }
        }
        Ok(FLInstance {
            graph,
            clients,
            facilities,
            free: Vec::new(),
        })
    }

    /// Builds the unit disk graph and instance from site records.
    ///
    /// Coincident sites are rejected unless `merge` is set, in which case they
    /// collapse into one vertex that is a client if any merged site is and a
    /// facility with the cheapest merged opening cost.
    pub fn from_sites(sites: &[Site], merge: bool) -> Result<Self> {
        let sites: Vec<Site> = if merge {
            let mut by_coord: BTreeMap<(u64, u64), usize> = BTreeMap::new();
            let mut merged: Vec<Site> = Vec::new();
            for s in sites {
                // -0.0 and 0.0 describe the same location.
                let key = ((s.x + 0.0).to_bits(), (s.y + 0.0).to_bits());
                match by_coord.get(&key) {
                    Some(&i) => {
                        let m = &mut merged[i];
                        m.client |= s.client;
                        m.facility = match (m.facility, s.facility) {
                            (Some(a), Some(b)) => Some(a.min(b)),
                            (a, b) => a.or(b),
                        };
                    }
                    None => {
                        by_coord.insert(key, merged.len());
                        merged.push(*s);
                    }
                }
            }
            merged
        } else {
            sites.to_vec()
        };
        let points: Vec<Point> = sites
            .iter()
            .enumerate()
            .map(|(i, s)| Point::new(i, s.x, s.y))
            .collect();
        let graph = Arc::new(build_udg(&points)?);
        let clients = sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.client)
            .map(|(i, _)| i)
            .collect();
        let facilities = sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.facility.map(|f| (i, f)))
            .collect();
        FLInstance::new(graph, clients, facilities)
    }

    /// Marks `free` facilities as already open with cost 0.
    pub fn with_free(mut self, free: &[usize]) -> Result<Self> {
        for &v in free {
            match self.facilities.binary_search_by_key(&v, |&(u, _)| u) {
                Ok(i) => self.facilities[i].1 = 0.0,
                Err(_) => {
                    return Err(Error::InvalidInput(alloc::format!(
                        "free facility {} is not a facility",
                        v
                    )))
                }
            }
            self.free.push(v);
        }
        self.free.sort_unstable();
        self.free.dedup();
        Ok(self)
    }

    pub fn graph(&self) -> &UnitDiskGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<UnitDiskGraph> {
        &self.graph
    }

    pub fn clients(&self) -> &[usize] {
        &self.clients
    }

    pub fn facilities(&self) -> &[(usize, f64)] {
        &self.facilities
    }

    pub fn facility_ids(&self) -> Vec<usize> {
        self.facilities.iter().map(|&(v, _)| v).collect()
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.free.binary_search(&v).is_ok()
    }

    pub fn opening_cost(&self, v: usize) -> Option<f64> {
        self.facilities
            .binary_search_by_key(&v, |&(u, _)| u)
            .ok()
            .map(|i| self.facilities[i].1)
    }

    pub fn is_facility(&self, v: usize) -> bool {
        self.opening_cost(v).is_some()
    }

    /// Same graph and facilities, different client set.
    pub fn with_clients(&self, clients: Vec<usize>) -> FLInstance {
        let mut out = self.clone();
        let mut clients = clients;
        clients.sort_unstable();
        clients.dedup();
        out.clients = clients;
        out
    }

    /// Client-by-facility distance table (`clients.len() * facilities.len()`).
    pub fn distance_table(&self) -> DistanceTable {
        let nc = self.clients.len();
        let nf = self.facilities.len();
        let mut d = vec![f64::INFINITY; nc * nf];
        for (fi, &(f, _)) in self.facilities.iter().enumerate() {
            let dist = nearest_source(&self.graph, &[f], f64::INFINITY).dist;
            for (ci, &c) in self.clients.iter().enumerate() {
                d[ci * nf + fi] = dist[c];
            }
        }
        DistanceTable { nc, nf, d }
    }
}

/// Dense client-by-facility distances in the graph metric.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    pub nc: usize,
    pub nf: usize,
    pub d: Vec<f64>,
}

impl DistanceTable {
    #[inline]
    pub fn get(&self, client_idx: usize, facility_idx: usize) -> f64 {
        self.d[client_idx * self.nf + facility_idx]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    pub client: usize,
    pub facility: usize,
    /// Length of the route the client pays; never below the graph distance.
    pub route_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FLSolution {
    pub open: Vec<usize>,
    pub assignment: Vec<Assignment>,
    pub open_cost: f64,
    pub conn_cost: f64,
    pub total_cost: f64,
}

impl FLSolution {
    /// Builds a solution from explicit assignments, summing the breakdown.
    pub fn from_parts(inst: &FLInstance, mut open: Vec<usize>, assignment: Vec<Assignment>) -> Self {
        open.sort_unstable();
        open.dedup();
        let open_cost = open.iter().filter_map(|&v| inst.opening_cost(v)).sum::<f64>();
        let conn_cost = assignment.iter().map(|a| a.route_cost).sum::<f64>();
        FLSolution {
            open,
            assignment,
            open_cost,
            conn_cost,
            total_cost: open_cost + conn_cost,
        }
    }

    pub fn empty() -> Self {
        FLSolution {
            open: Vec::new(),
            assignment: Vec::new(),
            open_cost: 0.0,
            conn_cost: 0.0,
            total_cost: 0.0,
        }
    }
}

/// Assigns every client to its nearest open facility and reports the exact
/// cost breakdown. Equidistant facilities resolve to the smaller id.
pub fn evaluate(inst: &FLInstance, open: &[usize]) -> Result<FLSolution> {
    let mut open: Vec<usize> = open.to_vec();
    open.sort_unstable();
    open.dedup();
    for &v in &open {
        if !inst.is_facility(v) {
            return Err(Error::InvalidInput(alloc::format!("{} is not a facility", v)));
        }
    }
    if inst.clients.is_empty() {
        return Ok(FLSolution::from_parts(inst, open, Vec::new()));
    }
    let ns = nearest_source(&inst.graph, &open, f64::INFINITY);
    let mut assignment = Vec::with_capacity(inst.clients.len());
    for &c in &inst.clients {
        match ns.label[c] {
            Some(idx) if ns.dist[c].is_finite() => assignment.push(Assignment {
                client: c,
                facility: open[idx],
                route_cost: ns.dist[c],
            }),
            _ => return Err(Error::InfeasibleAssignment { client: c }),
        }
    }
    Ok(FLSolution::from_parts(inst, open, assignment))
}

/// Exact optimum by enumerating every subset of the non-free facilities.
///
/// Free facilities are always open. Subsets are visited in lexicographic
/// order of their sorted id lists and only strict improvements replace the
/// incumbent, so ties resolve to the lexicographically first open set.
pub fn exact_solve(inst: &FLInstance, cap: usize) -> Result<FLSolution> {
    let paid: Vec<usize> = (0..inst.facilities.len())
        .filter(|&i| !inst.is_free(inst.facilities[i].0))
        .collect();
    if paid.len() > cap {
        return Err(Error::OracleTooLarge {
            facilities: paid.len(),
            cap,
        });
    }
    let table = inst.distance_table();
    let nc = table.nc;
    let mut base = vec![f64::INFINITY; nc];
    for (fi, &(f, _)) in inst.facilities.iter().enumerate() {
        if inst.is_free(f) {
            for (ci, b) in base.iter_mut().enumerate() {
                *b = b.min(table.get(ci, fi));
            }
        }
    }

    struct Search<'a> {
        table: &'a DistanceTable,
        costs: Vec<f64>,
        paid: &'a [usize],
        best_cost: f64,
        best_set: Option<Vec<usize>>,
        stack: Vec<usize>,
    }

    impl Search<'_> {
        fn consider(&mut self, mins: &[f64], open_cost: f64) {
            let conn: f64 = mins.iter().sum();
            let cost = open_cost + conn;
            if !cost.is_finite() {
                return;
            }
            let tol = 1e-12 * self.best_cost.abs().max(1.0);
            if self.best_set.is_none() || cost < self.best_cost - tol {
                self.best_cost = cost;
                self.best_set = Some(self.stack.clone());
            }
        }

        fn visit(&mut self, from: usize, mins: &[f64], open_cost: f64) {
            self.consider(mins, open_cost);
            for k in from..self.paid.len() {
                let fi = self.paid[k];
                let next: Vec<f64> = mins
                    .iter()
                    .enumerate()
                    .map(|(ci, &m)| m.min(self.table.get(ci, fi)))
                    .collect();
                self.stack.push(fi);
                let oc = open_cost + self.costs[fi];
                self.visit(k + 1, &next, oc);
                self.stack.pop();
            }
        }
    }

    let mut search = Search {
        table: &table,
        costs: inst.facilities.iter().map(|&(_, f)| f).collect(),
        paid: &paid,
        best_cost: f64::INFINITY,
        best_set: None,
        stack: Vec::new(),
    };
    search.visit(0, &base, 0.0);
    let chosen = match search.best_set {
        Some(set) => set,
        None => {
            let client = inst.clients.first().copied().unwrap_or(0);
            return Err(Error::InfeasibleAssignment { client });
        }
    };
    let mut open: Vec<usize> = chosen.iter().map(|&fi| inst.facilities[fi].0).collect();
    open.extend_from_slice(&inst.free);
    evaluate(inst, &open)
}
