//! Stochastic discrete-time SLIR dynamics with pre-symptomatic, symptomatic
//! and asymptomatic infectious stages, age-dependent severity and delayed
//! death reporting.
//!
//! All random draws are keyed by `(seed, day, ids)`. Disease course draws are
//! made once, at infection, so the schedule of a case never depends on how
//! many other people were processed first.

mod params;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use params::EpiParams;

use crate::contacts::{ContactNetworkDay, ContactTemplates, Csr, DayFilters, Layer, TemplateDay};
use crate::error::{Error, Result};
use crate::industry::IndustryId;
use crate::population::Population;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Compartment {
    S,
    L,
    #[serde(rename = "P_S")]
    PS,
    #[serde(rename = "I_S")]
    IS,
    #[serde(rename = "I_A")]
    IA,
    R,
    D,
}

impl Compartment {
    pub const ALL: [Compartment; 7] = [
        Compartment::S,
        Compartment::L,
        Compartment::PS,
        Compartment::IS,
        Compartment::IA,
        Compartment::R,
        Compartment::D,
    ];

    pub fn is_infectious(self) -> bool {
        matches!(self, Compartment::PS | Compartment::IS | Compartment::IA)
    }

    pub fn label(self) -> &'static str {
        match self {
            Compartment::S => "S",
            Compartment::L => "L",
            Compartment::PS => "P_S",
            Compartment::IS => "I_S",
            Compartment::IA => "I_A",
            Compartment::R => "R",
            Compartment::D => "D",
        }
    }
}

pub const NEVER: i32 = i32::MAX;

/// Where and from whom an infection came.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Infection {
    pub day: i32,
    pub infectee: u32,
    /// `None` for seeded cases.
    pub infector: Option<u32>,
    pub layer: Option<Layer>,
    pub place: Option<u32>,
    pub industry: Option<IndustryId>,
}

/// Per-person static epidemic attributes and derived rates.
#[derive(Debug, Clone)]
pub struct EpiModel {
    pub params: EpiParams,
    pub beta_s: f64,
    susceptibility: Vec<f64>,
    p_symptomatic: Vec<f64>,
    p_death: Vec<f64>,
}

impl EpiModel {
    pub fn new(params: EpiParams, pop: &Population) -> Result<Self> {
        params.validate()?;
        let p_symptomatic: Vec<f64> = pop
            .persons
            .iter()
            .map(|p| params.p_symptomatic_at(p.age))
            .collect();
        let mean_p = if p_symptomatic.is_empty() {
            0.0
        } else {
            p_symptomatic.iter().sum::<f64>() / p_symptomatic.len() as f64
        };
        Ok(Self {
            beta_s: params.beta_presym(mean_p),
            susceptibility: pop.persons.iter().map(|p| params.susceptibility_at(p.age)).collect(),
            p_death: pop
                .persons
                .iter()
                .map(|p| params.death_given_symptomatic(p.age))
                .collect(),
            p_symptomatic,
            params,
        })
    }

    /// Transmission rate of an infectious compartment.
    pub fn rate(&self, c: Compartment) -> f64 {
        match c {
            Compartment::PS => self.beta_s,
            Compartment::IS => self.params.beta,
            Compartment::IA => self.params.r * self.params.beta,
            _ => 0.0,
        }
    }

    /// P = χ (1 − exp(−β w)), with outdoor weights damped by θ.
    pub fn edge_probability(&self, c: Compartment, weight: f64, outdoor: bool, susceptible: u32) -> f64 {
        let w = if outdoor { self.params.theta * weight } else { weight };
        self.susceptibility[susceptible as usize] * -(-self.rate(c) * w).exp_m1()
    }
}

/// Compartments and scheduled transitions of every person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiState {
    pub compartment: Vec<Compartment>,
    pub infection_day: Vec<i32>,
    pub presym_day: Vec<i32>,
    pub onset_day: Vec<i32>,
    pub removal_day: Vec<i32>,
    pub death_day: Vec<i32>,
    pub report_day: Vec<i32>,
    pub symptomatic: Vec<bool>,
    pub will_die: Vec<bool>,
    counts: [usize; 7],
    /// Persons with a pending transition, ascending.
    active: Vec<u32>,
    /// Infectious persons, ascending; refreshed by progression.
    infectious: Vec<u32>,
    reports: BTreeMap<i32, u32>,
    ever_infected: usize,
}

impl EpiState {
    pub fn new(n: usize) -> Self {
        let mut counts = [0; 7];
        counts[Compartment::S as usize] = n;
        Self {
            compartment: vec![Compartment::S; n],
            infection_day: vec![NEVER; n],
            presym_day: vec![NEVER; n],
            onset_day: vec![NEVER; n],
            removal_day: vec![NEVER; n],
            death_day: vec![NEVER; n],
            report_day: vec![NEVER; n],
            symptomatic: vec![false; n],
            will_die: vec![false; n],
            counts,
            active: Vec::new(),
            infectious: Vec::new(),
            reports: BTreeMap::new(),
            ever_infected: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.compartment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.compartment.is_empty()
    }

    pub fn count(&self, c: Compartment) -> usize {
        self.counts[c as usize]
    }

    pub fn counts(&self) -> [usize; 7] {
        self.counts
    }

    pub fn ever_infected(&self) -> usize {
        self.ever_infected
    }

    pub fn infectious(&self) -> &[u32] {
        &self.infectious
    }

    /// Persons still latent or infectious.
    pub fn n_in_progress(&self) -> usize {
        self.count(Compartment::L)
            + self.count(Compartment::PS)
            + self.count(Compartment::IS)
            + self.count(Compartment::IA)
    }

    fn set(&mut self, i: u32, c: Compartment) {
        let old = self.compartment[i as usize];
        self.counts[old as usize] -= 1;
        self.counts[c as usize] += 1;
        self.compartment[i as usize] = c;
    }

    /// Moves a susceptible into L on `day` and draws the whole course of the
    /// infection.
    pub fn infect(&mut self, model: &EpiModel, i: u32, day: i32, seed: u64) {
        debug_assert_eq!(self.compartment[i as usize], Compartment::S);
        let p = &model.params;
        let u = |k: u64| rng::uniform(seed, Stream::Progression, i as u64, day as i64 as u64, k);
        let idx = i as usize;
        self.set(i, Compartment::L);
        self.ever_infected += 1;
        self.infection_day[idx] = day;
        self.presym_day[idx] = day + (p.epsilon - p.gamma) as i32;
        self.onset_day[idx] = day + p.epsilon as i32;
        let symptomatic = u(0) < model.p_symptomatic[idx];
        self.symptomatic[idx] = symptomatic;
        // Removal hazard 1/μ per day: geometric duration on {1, 2, ...}.
        let q = 1.0 / p.mu;
        let duration = if q >= 1.0 {
            1
        } else {
            1 + ((1.0 - u(1)).ln() / (1.0 - q).ln()).floor() as i32
        };
        self.removal_day[idx] = self.onset_day[idx] + duration.max(1);
        self.will_die[idx] = symptomatic && u(2) < model.p_death[idx];
        if self.will_die[idx] {
            let whole = p.delta_death.floor();
            let extra = i32::from(u(3) < p.delta_death - whole);
            self.death_day[idx] = self.removal_day[idx] + whole as i32 + extra;
            self.report_day[idx] = self.death_day[idx] + p.t_notify as i32;
            *self.reports.entry(self.report_day[idx]).or_default() += 1;
        }
        if let Err(pos) = self.active.binary_search(&i) {
            self.active.insert(pos, i);
        }
    }

    /// Applies every transition scheduled for `day`, then refreshes the
    /// infectious list.
    pub fn progression_step(&mut self, day: i32) {
        let mut active = std::mem::take(&mut self.active);
        self.infectious.clear();
        active.retain(|&i| {
            let idx = i as usize;
            let mut c = self.compartment[idx];
            if c == Compartment::L && day >= self.presym_day[idx] {
                c = Compartment::PS;
            }
            if c == Compartment::PS && day >= self.onset_day[idx] {
                c = if self.symptomatic[idx] { Compartment::IS } else { Compartment::IA };
            }
            if matches!(c, Compartment::IS | Compartment::IA) && day >= self.removal_day[idx] {
                c = Compartment::R;
            }
            if c == Compartment::R && self.will_die[idx] && day >= self.death_day[idx] {
                c = Compartment::D;
            }
            if c != self.compartment[idx] {
                self.set(i, c);
            }
            if c.is_infectious() {
                self.infectious.push(i);
            }
            !(c == Compartment::D || (c == Compartment::R && !self.will_die[idx]))
        });
        self.active = active;
    }

    /// Deaths reported on `day`.
    pub fn reported_deaths(&self, day: i32) -> u32 {
        self.reports.get(&day).copied().unwrap_or(0)
    }

    /// Deaths that have occurred on or before `day`.
    pub fn deaths_by(&self, day: i32) -> usize {
        self.death_day.iter().filter(|&&d| d <= day).count()
    }

    /// Shifts every scheduled day by `-offset`.
    fn shift(&mut self, offset: i32) {
        for v in [
            &mut self.infection_day,
            &mut self.presym_day,
            &mut self.onset_day,
            &mut self.removal_day,
            &mut self.death_day,
            &mut self.report_day,
        ] {
            for d in v.iter_mut().filter(|d| **d != NEVER) {
                *d -= offset;
            }
        }
        self.reports = std::mem::take(&mut self.reports)
            .into_iter()
            .map(|(d, n)| (d - offset, n))
            .collect();
    }
}

/// The contacts visible to transmission on one day.
#[derive(Clone, Copy)]
pub enum NetworkView<'a> {
    /// A template day with filters applied edge by edge.
    Template {
        day: &'a TemplateDay,
        filters: Option<&'a DayFilters<'a>>,
    },
    /// An already filtered network, one adjacency per layer.
    Explicit(&'a [Csr; 4]),
}

impl ContactNetworkDay {
    pub fn to_csr(&self, n: usize) -> [Csr; 4] {
        Layer::ALL.map(|l| Csr::from_edges(n, self.layer(l)))
    }
}

/// One day of transmission. Every infectious-susceptible edge fires
/// independently; a susceptible is infected by the first edge that fires, in
/// order of infector id then layer.
pub fn transmission_step(
    view: NetworkView,
    model: &EpiModel,
    state: &mut EpiState,
    day: i32,
    seed: u64,
) -> Vec<Infection> {
    let mut out = Vec::new();
    let infectious = state.infectious.clone();
    for &j in &infectious {
        let cj = state.compartment[j as usize];
        if model.rate(cj) <= 0.0 {
            continue;
        }
        for layer in Layer::ALL {
            let (csr, filters) = match view {
                NetworkView::Template { day: t, filters } => {
                    if let Some(f) = filters {
                        if layer == Layer::School && f.schools_closed {
                            continue;
                        }
                        if layer == Layer::Workplace && !f.at_work(j) {
                            continue;
                        }
                    }
                    (t.layer(layer), filters)
                }
                NetworkView::Explicit(layers) => (&layers[layer as usize], None),
            };
            for nb in csr.neighbors(j) {
                let i = nb.nbr;
                if state.compartment[i as usize] != Compartment::S {
                    continue;
                }
                if let Some(f) = filters {
                    let keep = match layer {
                        Layer::Workplace => f.at_work(i),
                        Layer::Community => f.community_keep(i, j, nb.industry()),
                        _ => true,
                    };
                    if !keep {
                        continue;
                    }
                }
                let p = model.edge_probability(cj, nb.weight, nb.outdoor, i);
                if p <= 0.0 {
                    continue;
                }
                let key = ((layer as u64) << 32) | j as u64;
                if rng::uniform(seed, Stream::Transmission, day as i64 as u64, key, i as u64) < p {
                    state.infect(model, i, day, seed);
                    out.push(Infection {
                        day,
                        infectee: i,
                        infector: Some(j),
                        layer: Some(layer),
                        place: (nb.place != crate::contacts::NO_PLACE).then_some(nb.place),
                        industry: nb.industry(),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingConfig {
    pub n_latent: usize,
    /// Cumulative exposed count that ends burn-in, at full reference scale.
    pub target_exposed: usize,
    /// Population the target refers to; the target scales with N / this.
    pub reference_population: usize,
    pub max_attempts: u32,
    pub max_burn_in_days: u32,
}

impl Default for SeedingConfig {
    fn default() -> Self {
        Self {
            n_latent: 10,
            target_exposed: 165,
            reference_population: 416_442,
            max_attempts: 20,
            max_burn_in_days: 365,
        }
    }
}

impl SeedingConfig {
    /// ceil(target · N / reference), at least `n_latent`.
    pub fn scaled_target(&self, n: usize) -> usize {
        let t = (self.target_exposed as f64 * n as f64 / self.reference_population as f64).ceil();
        (t as usize).max(self.n_latent)
    }
}

/// Result of burn-in: the state at calendar day 0 and the seeded infections.
#[derive(Debug, Clone)]
pub struct Seeded {
    pub state: EpiState,
    pub infections: Vec<Infection>,
    pub burn_in_days: i32,
    pub attempts: u32,
}

/// Seeds `n_latent` latent persons and runs unfiltered dynamics until the
/// cumulative number ever exposed reaches the scaled target. The state is
/// then re-dated so the next simulated day is day 0. Retries with fresh draws
/// when the outbreak dies out.
pub fn seed_epidemic(
    templates: &ContactTemplates,
    model: &EpiModel,
    config: &SeedingConfig,
    seed: u64,
) -> Result<Seeded> {
    let n = templates.n_persons;
    if config.n_latent == 0 || config.n_latent > n {
        return Err(Error::config("seeding.n_latent", "must be in [1, N]"));
    }
    let target = config.scaled_target(n);
    let mut best = 0;
    for attempt in 0..config.max_attempts {
        let s = rng::mix(&[seed, Stream::Seeding as u64, attempt as u64]);
        let mut state = EpiState::new(n);
        let mut infections = Vec::new();
        let mut rng = rng::stream(seed, Stream::Seeding, attempt as u64);
        for i in rand::seq::index::sample(&mut rng, n, config.n_latent) {
            state.infect(model, i as u32, 0, s);
            infections.push(Infection {
                day: 0,
                infectee: i as u32,
                infector: None,
                layer: None,
                place: None,
                industry: None,
            });
        }
        let mut day = 0i32;
        let mut reached = state.ever_infected() >= target;
        while !reached && day < config.max_burn_in_days as i32 && state.n_in_progress() > 0 {
            state.progression_step(day);
            let weekday = (day % 7) as u8;
            let t = templates.template_for_day(s, day as u32, weekday);
            let view = NetworkView::Template {
                day: &templates.days[t],
                filters: None,
            };
            infections.extend(transmission_step(view, model, &mut state, day, s));
            day += 1;
            reached = state.ever_infected() >= target;
        }
        best = best.max(state.ever_infected());
        if reached {
            state.shift(day);
            for inf in &mut infections {
                inf.day -= day;
            }
            return Ok(Seeded {
                state,
                infections,
                burn_in_days: day,
                attempts: attempt + 1,
            });
        }
        log::debug!("seeding attempt {attempt} reached {} of {target}", state.ever_infected());
    }
    Err(Error::SeedingFailed {
        attempts: config.max_attempts,
        best,
        target,
    })
}

#[cfg(test)]
mod tests;
