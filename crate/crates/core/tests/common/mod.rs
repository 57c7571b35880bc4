#![allow(dead_code)]

pub mod separator_oracle;
pub mod two_leaf;

use rand::{Rng, SeedableRng};
use udgfl_core::udg::UnitDiskGraph;
use udgfl_core::{FLInstance, SeededRng, Site};

pub fn rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// `n` sites uniform in `[0, side]^2`; roles drawn independently, at least
/// one client and one facility.
pub fn random_sites(rng: &mut SeededRng, n: usize, side: f64, p_client: f64, p_fac: f64) -> Vec<Site> {
    let mut sites: Vec<Site> = (0..n)
        .map(|_| Site {
            x: rng.gen_range(0.0..side),
            y: rng.gen_range(0.0..side),
            client: rng.gen_bool(p_client),
            facility: rng.gen_bool(p_fac).then(|| rng.gen_range(0.1..3.0)),
        })
        .collect();
    sites[0].client = true;
    if sites.iter().all(|s| s.facility.is_none()) {
        sites[n - 1].facility = Some(1.0);
    }
    sites
}

/// Random connected instance with at most `max_fac` facilities; retries with
/// derived seeds until the graph is connected.
pub fn connected_instance(seed: u64, n: usize, side: f64, max_fac: usize) -> FLInstance {
    for attempt in 0..1000u64 {
        let mut r = rng(seed.wrapping_mul(7919).wrapping_add(attempt));
        let p_fac = (max_fac as f64 / n as f64).min(0.9);
        let mut sites = random_sites(&mut r, n, side, 0.6, p_fac);
        let mut seen = 0;
        for s in sites.iter_mut() {
            if s.facility.is_some() {
                seen += 1;
                if seen > max_fac {
                    s.facility = None;
                }
            }
        }
        let inst = FLInstance::from_sites(&sites, true).unwrap();
        if inst.graph().is_connected() && !inst.facilities().is_empty() && !inst.clients().is_empty() {
            return inst;
        }
    }
    panic!("no connected instance for seed {}", seed);
}

/// Connected UDG of `n` random points in a square sized for mean degree ~8.
pub fn connected_udg(seed: u64, n: usize) -> UnitDiskGraph {
    let side = (n as f64 * std::f64::consts::PI / 8.0).sqrt().max(1.0);
    for attempt in 0..1000u64 {
        let mut r = rng(seed.wrapping_mul(104_729).wrapping_add(attempt));
        let coords: Vec<(f64, f64)> = (0..n).map(|_| (r.gen_range(0.0..side), r.gen_range(0.0..side))).collect();
        let g = UnitDiskGraph::from_coords(&coords).unwrap();
        if g.is_connected() {
            return g;
        }
    }
    panic!("no connected graph for seed {}", seed);
}

/// Unit disk graph on a long thin strip.
pub fn corridor_udg(seed: u64, length: f64, width: f64, density: f64) -> UnitDiskGraph {
    let n = (length * width * density).ceil() as usize;
    for attempt in 0..1000u64 {
        let mut r = rng(seed.wrapping_mul(31).wrapping_add(attempt));
        let coords: Vec<(f64, f64)> = (0..n).map(|_| (r.gen_range(0.0..length), r.gen_range(0.0..width))).collect();
        let g = UnitDiskGraph::from_coords(&coords).unwrap();
        if g.is_connected() {
            return g;
        }
    }
    panic!("no connected corridor for seed {}", seed);
}

/// Bellman-Ford relaxation over all edges.
pub fn bellman_ford(g: &UnitDiskGraph, src: usize) -> Vec<f64> {
    let n = g.n();
    let mut d = vec![f64::INFINITY; n];
    d[src] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            if !d[u].is_finite() {
                continue;
            }
            for &(v, w) in g.neighbors(u) {
                if d[u] + w < d[v] {
                    d[v] = d[u] + w;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d
}

/// Facility-location instance on a connected strip `[0, length] × [0, 1.5]`;
/// every fourth site is a facility.
pub fn corridor_instance(seed: u64, length: f64, n: usize) -> FLInstance {
    for attempt in 0..1000u64 {
        let mut r = rng(seed.wrapping_mul(1000).wrapping_add(attempt));
        let sites: Vec<Site> = (0..n)
            .map(|i| Site {
                x: r.gen_range(0.0..length),
                y: r.gen_range(0.0..1.5),
                client: i % 4 != 0,
                facility: (i % 4 == 0).then(|| r.gen_range(0.5..3.0)),
            })
            .collect();
        let inst = FLInstance::from_sites(&sites, true).unwrap();
        if inst.graph().is_connected() {
            return inst;
        }
    }
    panic!("no connected corridor instance for seed {}", seed);
}
