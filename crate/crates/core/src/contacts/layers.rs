//! Household, school and workplace layers, and per-layer weight scaling.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Edge;
use crate::error::{Error, Result};
use crate::population::{Household, Population};
use crate::rng::{self, Stream};

/// Complete graph within every household, ω = 1/(n_h − 1).
pub fn household_weights(households: &[Household]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for h in households {
        clique(&h.member_ids, &mut edges);
    }
    edges.sort_unstable_by_key(|e| (e.i, e.j));
    edges
}

/// Complete graph per school, ω = 1/(n_s − 1).
pub fn school_weights(schools: &[Vec<u32>]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for members in schools {
        clique(members, &mut edges);
    }
    edges.sort_unstable_by_key(|e| (e.i, e.j));
    edges
}

fn clique(members: &[u32], out: &mut Vec<Edge>) {
    let n = members.len();
    if n < 2 {
        return;
    }
    let w = 1.0 / (n - 1) as f64;
    for a in 0..n {
        for b in a + 1..n {
            out.push(Edge::new(members[a], members[b], w));
        }
    }
}

/// One school per tract holding all children of school age.
pub fn school_assignment(pop: &Population, school_ages: (u8, u8), n_tracts: usize) -> Vec<Vec<u32>> {
    let mut schools = vec![Vec::new(); n_tracts];
    for p in &pop.persons {
        if p.age >= school_ages.0 && p.age < school_ages.1 {
            schools[p.tract_id as usize].push(p.person_id);
        }
    }
    schools
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkplaceModel {
    /// Workers per workplace block group.
    pub workers_per_cbg: usize,
    /// Points of interest per workplace block group.
    pub poi_per_cbg: u32,
    /// Probability a worker is at work on a weekend template day.
    pub weekend_presence: f64,
}

/// Workplace block group per person (`None` for non-workers). Workers of one
/// industry are shuffled and cut into consecutive groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkplaceAssignment {
    pub cbg_of: Vec<Option<u32>>,
    pub n_poi: Vec<u32>,
}

pub fn assign_workplaces(
    pop: &Population,
    n_industries: usize,
    model: &WorkplaceModel,
    seed: u64,
) -> WorkplaceAssignment {
    let mut cbg_of = vec![None; pop.len()];
    let mut n_poi = Vec::new();
    let size = model.workers_per_cbg.max(1);
    for k in 0..n_industries {
        let mut workers: Vec<u32> = pop
            .persons
            .iter()
            .filter(|p| p.employed && p.industry == Some(k))
            .map(|p| p.person_id)
            .collect();
        workers.shuffle(&mut rng::stream(seed, Stream::Workplaces, k as u64));
        for chunk in workers.chunks(size) {
            let id = n_poi.len() as u32;
            n_poi.push(model.poi_per_cbg);
            for &w in chunk {
                cbg_of[w as usize] = Some(id);
            }
        }
    }
    WorkplaceAssignment { cbg_of, n_poi }
}

/// ω_ij = 1/N_POI(α) for workers `i`, `j` both present in block group α,
/// kept when above `threshold`.
pub fn workplace_weights(
    assignment: &WorkplaceAssignment,
    present: &[bool],
    threshold: f64,
) -> Result<Vec<Edge>> {
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); assignment.n_poi.len()];
    for (i, cbg) in assignment.cbg_of.iter().enumerate() {
        if let Some(c) = cbg {
            if present[i] {
                groups[*c as usize].push(i as u32);
            }
        }
    }
    let mut edges = Vec::new();
    for (c, members) in groups.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let n_poi = assignment.n_poi[c];
        if n_poi == 0 {
            return Err(Error::config(
                "workplace_model",
                format!("block group {c} has workers but no points of interest"),
            ));
        }
        let w = 1.0 / n_poi as f64;
        if w <= threshold {
            continue;
        }
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                edges.push(Edge::new(members[a], members[b], w));
            }
        }
    }
    edges.sort_unstable_by_key(|e| (e.i, e.j));
    Ok(edges)
}

/// How the raw weights of a layer are turned into contact rates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaNormalization {
    /// Divide by the mean per-person strength N⁻¹ Σ_ij ω_ij over active
    /// nodes, so that an average active person has total contact rate κ.
    #[default]
    PerPersonStrength,
    /// Divide by the mean raw edge weight, so the mean scaled edge weight is κ.
    EdgeMean,
}

/// Normalizer of a layer over the template period: mean per-person strength
/// or mean edge weight. `None` when the layer has no edges.
pub fn layer_normalizer(days: &[&[Edge]], mode: KappaNormalization) -> Option<f64> {
    let mut weight = 0.0;
    let mut count = 0usize;
    for edges in days {
        weight += edges.iter().map(|e| e.weight).sum::<f64>();
        count += match mode {
            KappaNormalization::EdgeMean => edges.len(),
            KappaNormalization::PerPersonStrength => active_nodes(edges),
        };
    }
    if count == 0 || weight <= 0.0 {
        return None;
    }
    Some(match mode {
        KappaNormalization::EdgeMean => weight / count as f64,
        // each edge adds its weight to both endpoints
        KappaNormalization::PerPersonStrength => 2.0 * weight / count as f64,
    })
}

fn active_nodes(edges: &[Edge]) -> usize {
    let mut ids: Vec<u32> = edges.iter().flat_map(|e| [e.i, e.j]).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// Multiplies every weight of a layer by κ / normalizer. Returns the factor,
/// or `None` (weights untouched) for an empty layer.
pub fn scale_layer(days: &mut [Vec<Edge>], kappa: f64, mode: KappaNormalization) -> Option<f64> {
    let refs: Vec<&[Edge]> = days.iter().map(|d| d.as_slice()).collect();
    let Some(norm) = layer_normalizer(&refs, mode) else {
        log::warn!("empty contact layer left unscaled");
        return None;
    };
    let f = kappa / norm;
    for e in days.iter_mut().flatten() {
        e.weight *= f;
    }
    Some(f)
}
