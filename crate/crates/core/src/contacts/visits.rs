//! Synthetic community places and visit templates, and the co-location
//! weights derived from them.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use super::Edge;
use crate::error::{Error, Result};
use crate::industry::IndustryId;
use crate::population::Population;
use crate::rng::{self, CumulativeTable, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Place {
    pub place_id: u32,
    /// Block group the place sits in; at desk scale this is the tract.
    pub cbg_id: u32,
    pub industry: Option<IndustryId>,
    pub outdoor: bool,
    /// Relative attractiveness used when persons pick their places.
    pub popularity: f64,
}

/// One kind of place in the place mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceKind {
    pub industry: Option<IndustryId>,
    /// Share of all places that are of this kind.
    pub share: f64,
    /// Mean popularity of a single place of this kind.
    pub popularity: f64,
    /// Probability a place of this kind is outdoors.
    pub outdoor_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceConfig {
    pub n_places: usize,
    pub kinds: Vec<PlaceKind>,
    /// Log-scale dispersion of popularity between places of the same kind.
    pub popularity_sigma: f64,
}

/// Places spread uniformly over tracts; kind drawn from the kind shares,
/// popularity lognormal around the kind mean.
pub fn synth_places(config: &PlaceConfig, n_tracts: usize, seed: u64) -> Result<Vec<Place>> {
    let shares: Vec<f64> = config.kinds.iter().map(|k| k.share).collect();
    let kinds = CumulativeTable::new(&shares)
        .ok_or_else(|| Error::config("places.kinds", "all place shares are zero"))?;
    let s = config.popularity_sigma;
    let noise = LogNormal::new(-0.5 * s * s, s).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = rng::stream(seed, Stream::Places, 0);
    Ok((0..config.n_places)
        .map(|p| {
            let kind = &config.kinds[kinds.sample(&mut rng)];
            Place {
                place_id: p as u32,
                cbg_id: (p % n_tracts.max(1)) as u32,
                industry: kind.industry,
                outdoor: rng.random::<f64>() < kind.outdoor_share,
                popularity: kind.popularity * noise.sample(&mut rng),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitModel {
    /// Size of each person's personal set of community places.
    pub places_per_person: usize,
    /// Mean community visits per person on a weekday and on a weekend day.
    pub weekday_visits: f64,
    pub weekend_visits: f64,
    /// Popularity multiplier for places in the person's own tract.
    pub local_bias: f64,
    pub min_minutes: f64,
    pub max_minutes: f64,
    /// Number of distinct weeks of templates.
    pub n_weeks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub person_id: u32,
    pub place_id: u32,
    pub minutes: f64,
}

/// Visit records per template day. Template day `d` falls on weekday
/// `d % 7` with 0 = Monday.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VisitLog {
    pub days: Vec<Vec<Visit>>,
}

pub fn is_weekend(weekday: usize) -> bool {
    weekday >= 5
}

/// Each person draws a personal set of places weighted by popularity (own
/// tract favoured), then on each template day visits a Poisson number of
/// them chosen uniformly. A place drawn twice into the set is visited twice as
/// often, so visit frequencies stay proportional to popularity.
pub fn synth_visits(
    pop: &Population,
    places: &[Place],
    model: &VisitModel,
    seed: u64,
) -> Result<VisitLog> {
    let n_days = 7 * model.n_weeks;
    let any_visits = model.weekday_visits > 0.0 || model.weekend_visits > 0.0;
    if !any_visits {
        return Ok(VisitLog { days: vec![Vec::new(); n_days] });
    }
    if places.is_empty() || places.iter().all(|p| p.popularity <= 0.0) {
        return Err(Error::config(
            "visit_model",
            "visits requested but there are no community places",
        ));
    }
    if !(model.min_minutes > 0.0 && model.max_minutes >= model.min_minutes) {
        return Err(Error::config("visit_model", "visit minutes must be positive and ordered"));
    }

    let n_tracts = places.iter().map(|p| p.cbg_id as usize + 1).max().unwrap_or(1);
    let tables: Vec<CumulativeTable> = (0..n_tracts)
        .map(|t| {
            let w: Vec<f64> = places
                .iter()
                .map(|p| {
                    let bias = if p.cbg_id as usize == t { model.local_bias } else { 1.0 };
                    p.popularity.max(0.0) * bias
                })
                .collect();
            CumulativeTable::new(&w).expect("positive popularity checked above")
        })
        .collect();

    let mut days = vec![Vec::new(); n_days];
    let weekday = Poisson::new(model.weekday_visits.max(1e-12)).map_err(|e| Error::Domain(e.to_string()))?;
    let weekend = Poisson::new(model.weekend_visits.max(1e-12)).map_err(|e| Error::Domain(e.to_string()))?;
    let m = model.places_per_person.max(1);
    for person in &pop.persons {
        let mut rng = rng::stream(seed, Stream::Visits, person.person_id as u64);
        let table = &tables[(person.tract_id as usize).min(n_tracts - 1)];
        let own: Vec<u32> = (0..m).map(|_| table.sample(&mut rng) as u32).collect();
        for (d, day) in days.iter_mut().enumerate() {
            let dist = if is_weekend(d % 7) { &weekend } else { &weekday };
            let n = dist.sample(&mut rng) as usize;
            let mut seen: Vec<(u32, f64)> = Vec::with_capacity(n);
            for _ in 0..n {
                let place = own[rng.random_range(0..own.len())];
                let minutes = rng.random_range(model.min_minutes..=model.max_minutes);
                match seen.iter_mut().find(|(p, _)| *p == place) {
                    Some((_, t)) => *t += minutes,
                    None => seen.push((place, minutes)),
                }
            }
            day.extend(seen.into_iter().map(|(place_id, minutes)| Visit {
                person_id: person.person_id,
                place_id,
                minutes,
            }));
        }
    }
    Ok(VisitLog { days })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityWeights {
    pub edges: Vec<Edge>,
    pub candidate_weight: f64,
    pub candidate_links: usize,
}

/// Co-location weights for one template day:
/// ω_ij = Σ_p (T_ip / T_i)(T_jp / T_j), keeping ω > `threshold`. Each edge
/// carries the place contributing the largest term.
///
/// Also reports the candidate pairs before thresholding.
pub fn community_weights(visits: &[Visit], places: &[Place], threshold: f64) -> CommunityWeights {
    let mut total_time: HashMap<u32, f64> = HashMap::new();
    for v in visits {
        *total_time.entry(v.person_id).or_default() += v.minutes;
    }
    let mut by_place: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
    for v in visits {
        let t = total_time[&v.person_id];
        by_place
            .entry(v.place_id)
            .or_default()
            .push((v.person_id, v.minutes / t));
    }
    let mut place_ids: Vec<u32> = by_place.keys().copied().collect();
    place_ids.sort_unstable();

    // (weight, dominant place, dominant term)
    let mut pairs: HashMap<(u32, u32), (f64, u32, f64)> = HashMap::new();
    for p in place_ids {
        let mut v = by_place.remove(&p).expect("key present");
        v.sort_unstable_by_key(|&(id, _)| id);
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                let (i, fi) = v[a];
                let (j, fj) = v[b];
                if i == j {
                    continue;
                }
                let term = fi * fj;
                let e = pairs.entry((i, j)).or_insert((0.0, p, 0.0));
                e.0 += term;
                if term > e.2 {
                    e.1 = p;
                    e.2 = term;
                }
            }
        }
    }
    let mut pairs: Vec<((u32, u32), (f64, u32, f64))> = pairs.into_iter().collect();
    pairs.sort_unstable_by_key(|&(k, _)| k);
    let candidate_weight: f64 = pairs.iter().map(|(_, e)| e.0).sum();
    let candidate_links = pairs.len();
    let edges: Vec<Edge> = pairs
        .into_iter()
        .filter(|(_, e)| e.0 > threshold)
        .map(|((i, j), (w, p, _))| {
            let place = &places[p as usize];
            Edge {
                i,
                j,
                weight: w,
                place: Some(p),
                industry: place.industry,
                outdoor: place.outdoor,
            }
        })
        .collect();
    CommunityWeights {
        edges,
        candidate_weight,
        candidate_links,
    }
}
