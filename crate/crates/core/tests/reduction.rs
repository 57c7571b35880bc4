mod common;

use std::collections::BTreeSet;

use common::*;
use rand::Rng;
use udgfl_core::reduction::*;
use udgfl_core::udg::dijkstra;
use udgfl_core::{evaluate, exact_solve, FLInstance, Site};

fn scaled(inst: &FLInstance, s: f64) -> FLInstance {
    let fac = inst.facilities().iter().map(|&(v, f)| (v, f * s)).collect();
    FLInstance::new(inst.graph_arc().clone(), inst.clients().to_vec(), fac).unwrap()
}

#[test]
fn baseline_within_three_of_scaled_optimum() {
    for seed in 0..10 {
        let inst = connected_instance(seed, 25, 3.0, 10);
        for s in [0.5, 1.0] {
            let base = baseline_approx(&inst, s).unwrap();
            let si = scaled(&inst, s);
            let got = evaluate(&si, &base.open).unwrap().total_cost;
            let opt = exact_solve(&si, 24).unwrap().total_cost;
            assert!(got <= 3.0 * opt + 1e-9, "seed {} scale {}: {} > 3 * {}", seed, s, got, opt);
            // Clusters partition the clients and are nonempty.
            let mut all: Vec<usize> = base.cluster.values().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, inst.clients());
            assert!(base.cluster.values().all(|c| !c.is_empty()));
            for (&i, cs) in &base.cluster {
                let d = dijkstra(inst.graph(), i);
                let avg = (inst.opening_cost(i).unwrap() + cs.iter().map(|&c| d[c]).sum::<f64>()) / cs.len() as f64;
                assert!((avg - base.avgcost[&i]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn optimum_has_a_facility_near_every_baseline_facility() {
    for seed in 0..15 {
        let inst = connected_instance(seed + 40, 22, 3.0, 9);
        let base = baseline_approx(&inst, 0.5).unwrap();
        let opt = exact_solve(&inst, 24).unwrap();
        for &i in &base.open {
            let d = dijkstra(inst.graph(), i);
            let near = opt.open.iter().map(|&g| d[g]).fold(f64::INFINITY, f64::min);
            assert!(near <= 2.0 * base.avgcost[&i] + 1e-9, "seed {} facility {}: {} > 2 * {}", seed, i, near, base.avgcost[&i]);
        }
    }
}

#[test]
fn filtering_and_ledger_extension() {
    for seed in 0..10 {
        let inst = connected_instance(seed + 200, 30, 3.0, 10);
        let eps = 0.5;
        let base = baseline_approx(&inst, eps).unwrap();
        let (ip, ledger) = filter_clients(&inst, &base, eps);
        for &c in ip.clients() {
            let (a, d) = base.anchor_of[&c];
            let avg = base.avgcost[&a];
            assert!(d + 1e-12 >= eps * eps * avg && d <= avg / (eps * eps) + 1e-12);
        }
        let kept: BTreeSet<usize> = ip.clients().iter().copied().collect();
        let removed: BTreeSet<usize> = ledger.entries.iter().map(|c| c.client).collect();
        assert!(kept.is_disjoint(&removed));
        assert_eq!(kept.len() + removed.len(), inst.clients().len());

        let ids = inst.facility_ids();
        let mut r = rng(seed);
        for _ in 0..50 {
            let open: Vec<usize> = ids.iter().copied().filter(|_| r.gen_bool(0.5)).collect();
            let Ok(sol) = evaluate(&ip, &open) else { continue };
            let ext = ledger.extend(&inst, &sol);
            let diff = ext.total_cost - sol.total_cost;
            assert!((diff - ledger.total_for(&sol.open)).abs() < 1e-9);
            for a in &ext.assignment {
                assert!(a.route_cost + 1e-12 >= dijkstra(inst.graph(), a.client)[a.facility]);
            }
        }
    }
}

#[test]
fn collocated_client_goes_to_ledger() {
    let sites = [
        Site { x: 0.0, y: 0.0, client: true, facility: Some(2.0) },
        Site { x: 0.6, y: 0.0, client: true, facility: None },
    ];
    let inst = FLInstance::from_sites(&sites, false).unwrap();
    let base = baseline_approx(&inst, 0.5).unwrap();
    let (ip, ledger) = filter_clients(&inst, &base, 0.5);
    assert_eq!(ip.clients(), &[1]);
    assert_eq!(ledger.entries.len(), 1);
    assert_eq!((ledger.entries[0].client, ledger.entries[0].anchor), (0, 0));
}

#[test]
fn partition_is_structured_and_merge_dominates() {
    for seed in 0..10 {
        let inst = connected_instance(seed + 300, 30, 4.0, 10);
        let eps = 0.5;
        let base = baseline_approx(&inst, eps).unwrap();
        let (ip, ledger) = filter_clients(&inst, &base, eps);
        let r = aspect_bound(eps);
        let subs = partition_by_aspect(&ip, &base, eps, r).unwrap();
        let mut seen = BTreeSet::new();
        for sub in &subs {
            assert!(sub.aspect_ratio() <= r);
            for &c in sub.inst.clients() {
                assert!(seen.insert(c));
            }
            let er = sub.effective_r();
            for (&a, cs) in &sub.cluster {
                let d = dijkstra(sub.inst.graph(), a);
                for &c in cs {
                    assert!(d[c] + 1e-12 >= sub.n_min && d[c] <= er * sub.n_min + 1e-9);
                }
            }
        }
        assert_eq!(seen, ip.clients().iter().copied().collect());

        let solved: Vec<_> = subs.iter().map(|s| (s.clone(), exact_solve(&s.inst, 24).unwrap())).collect();
        let merged = merge_solutions(&solved, &ledger, &inst).unwrap();
        let parts: f64 = solved.iter().map(|(_, s)| s.total_cost).sum();
        assert!(merged.total_cost <= parts + ledger.total_for(&[]) + 1e-9);
    }
}

#[test]
fn distant_average_costs_split() {
    use std::collections::BTreeMap;
    let sites = [
        Site { x: 0.0, y: 0.0, client: false, facility: Some(0.5) },
        Site { x: 0.5, y: 0.0, client: true, facility: None },
        Site { x: 5.0, y: 0.0, client: false, facility: Some(1e6) },
        Site { x: 5.5, y: 0.0, client: true, facility: None },
    ];
    let inst = FLInstance::from_sites(&sites, false).unwrap();
    let base = BaselineResult {
        open: vec![0, 2],
        cluster: BTreeMap::from([(0, vec![1]), (2, vec![3])]),
        avgcost: BTreeMap::from([(0, 1.0), (2, 1e6)]),
        anchor_of: BTreeMap::from([(1, (0, 0.5)), (3, (2, 0.5))]),
        alpha: 3.0,
        scale: 1.0,
    };
    let subs = partition_by_aspect(&inst, &base, 0.5, aspect_bound(0.5)).unwrap();
    assert_eq!(subs.len(), 2);
    let equal = BaselineResult {
        avgcost: BTreeMap::from([(0, 1.0), (2, 1.0)]),
        ..base
    };
    assert_eq!(partition_by_aspect(&inst, &equal, 0.5, aspect_bound(0.5)).unwrap().len(), 1);
}
