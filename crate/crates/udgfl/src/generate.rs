//! Seeded instance families: uniform in a square, Gaussian clusters, and a
//! long thin corridor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use udgfl_core::udg::{build_udg, Point};

use crate::format::{Role, SiteRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Uniform,
    Clustered,
    Corridor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub family: Family,
    pub n: usize,
    /// Square side, or corridor length.
    pub side: f64,
    /// Corridor width.
    pub width: f64,
    pub clusters: usize,
    /// Standard deviation of each cluster.
    pub sigma: f64,
    pub p_client: f64,
    pub p_facility: f64,
    pub cost_min: f64,
    pub cost_max: f64,
    /// Keep only the largest connected component.
    pub largest_component: bool,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            family: Family::Uniform,
            n: 100,
            side: 5.0,
            width: 1.5,
            clusters: 4,
            sigma: 0.5,
            p_client: 0.7,
            p_facility: 0.3,
            cost_min: 0.5,
            cost_max: 3.0,
            largest_component: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Graph(#[from] udgfl_core::Error),
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GenerateError> {
        let bad = |m: &str| Err(GenerateError::Params(m.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.side > 0.0 && self.side.is_finite()) || !(self.width > 0.0 && self.width.is_finite()) {
            return bad("side and width must be positive");
        }
        if self.family == Family::Clustered && (self.clusters == 0 || !(self.sigma > 0.0)) {
            return bad("clustered family needs clusters > 0 and sigma > 0");
        }
        for p in [self.p_client, self.p_facility] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        if !(0.0 <= self.cost_min && self.cost_min <= self.cost_max && self.cost_max.is_finite()) {
            return bad("need 0 <= cost_min <= cost_max");
        }
        Ok(())
    }
}

/// Generates site records; every instance has at least one client and one
/// facility.
pub fn generate(params: &GeneratorParams, seed: u64) -> Result<Vec<SiteRecord>, GenerateError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords: Vec<(f64, f64)> = match params.family {
        Family::Uniform => (0..params.n)
            .map(|_| (rng.gen_range(0.0..params.side), rng.gen_range(0.0..params.side)))
            .collect(),
        Family::Corridor => (0..params.n)
            .map(|_| (rng.gen_range(0.0..params.side), rng.gen_range(0.0..params.width)))
            .collect(),
        Family::Clustered => {
            let centers: Vec<(f64, f64)> = (0..params.clusters)
                .map(|_| (rng.gen_range(0.0..params.side), rng.gen_range(0.0..params.side)))
                .collect();
            let normal = Normal::new(0.0, params.sigma).expect("sigma checked positive");
            (0..params.n)
                .map(|_| {
                    let (cx, cy) = centers[rng.gen_range(0..centers.len())];
                    (cx + normal.sample(&mut rng), cy + normal.sample(&mut rng))
                })
                .collect()
        }
    };
    if params.largest_component && coords.len() > 1 {
        coords = largest_component(&coords)?;
    }
    let mut recs: Vec<SiteRecord> = coords
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| {
            let client = rng.gen_bool(params.p_client);
            let facility = rng.gen_bool(params.p_facility);
            let cost = facility.then(|| cost(params, &mut rng));
            let role = match (client, facility) {
                (true, true) => Role::Both,
                (true, false) => Role::Client,
                (false, true) => Role::Facility,
                (false, false) => Role::None,
            };
            SiteRecord { id, x, y, role, cost }
        })
        .collect();
    if !recs.iter().any(|r| r.role.has_facility()) {
        let r = &mut recs[0];
        r.role = if r.role.has_client() { Role::Both } else { Role::Facility };
        r.cost = Some(cost(params, &mut rng));
    }
    if !recs.iter().any(|r| r.role.has_client()) {
        let r = recs.last_mut().expect("n > 0");
        r.role = if r.role.has_facility() { Role::Both } else { Role::Client };
    }
    Ok(recs)
}

fn cost(params: &GeneratorParams, rng: &mut ChaCha8Rng) -> f64 {
    if params.cost_max > params.cost_min {
        rng.gen_range(params.cost_min..params.cost_max)
    } else {
        params.cost_min
    }
}

/// Points of the largest component, in original order; ties go to the
/// component holding the smallest index.
fn largest_component(coords: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, GenerateError> {
    let points: Vec<Point> = coords.iter().enumerate().map(|(i, &(x, y))| Point::new(i, x, y)).collect();
    let g = build_udg(&points)?;
    let mut size = vec![0usize; g.component_count()];
    for v in 0..g.n() {
        size[g.component_id(v)] += 1;
    }
    let best = (0..g.n()).map(|v| g.component_id(v)).max_by_key(|&c| (size[c], std::cmp::Reverse(c))).unwrap_or(0);
    Ok((0..g.n()).filter(|&v| g.component_id(v) == best).map(|v| coords[v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_points_rejected() {
        let p = GeneratorParams { n: 0, ..Default::default() };
        assert!(generate(&p, 1).is_err());
    }

    #[test]
    fn single_point() {
        let p = GeneratorParams { n: 1, ..Default::default() };
        let recs = generate(&p, 3).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].role, Role::Both);
    }

    #[test]
    fn seeded_and_connected() {
        for family in [Family::Uniform, Family::Clustered, Family::Corridor] {
            let p = GeneratorParams { family, n: 150, side: 8.0, ..Default::default() };
            let a = generate(&p, 9).unwrap();
            assert_eq!(a, generate(&p, 9).unwrap());
            assert_ne!(a, generate(&p, 10).unwrap());
            let inst = crate::format::instance_from_records(&a, false).unwrap();
            assert!(inst.graph().is_connected());
            assert!(!inst.clients().is_empty() && !inst.facilities().is_empty());
        }
    }
}
