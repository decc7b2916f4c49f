//! Four-layer weighted contact network built from templates of typical days.
//!
//! Household and school layers are static; workplace and community layers
//! vary per template day. Each calendar day draws one template day with the
//! same weekday and applies the day's filters.

mod layers;
mod visits;

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use layers::{
    assign_workplaces, household_weights, layer_normalizer, scale_layer, school_assignment,
    school_weights, workplace_weights, KappaNormalization, WorkplaceAssignment, WorkplaceModel,
};
pub use visits::{
    community_weights, is_weekend, synth_places, synth_visits, CommunityWeights, Place,
    PlaceConfig, PlaceKind, Visit, VisitLog, VisitModel,
};

use crate::error::{Error, Result};
use crate::industry::IndustryId;
use crate::population::Population;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Household = 0,
    School = 1,
    Workplace = 2,
    Community = 3,
}

impl Layer {
    pub const ALL: [Layer; 4] = [Layer::Household, Layer::School, Layer::Workplace, Layer::Community];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Household => "household",
            Layer::School => "school",
            Layer::Workplace => "workplace",
            Layer::Community => "community",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// Undirected weighted contact with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub weight: f64,
    pub place: Option<u32>,
    pub industry: Option<IndustryId>,
    pub outdoor: bool,
}

impl Edge {
    /// Untagged edge in canonical order. Panics on a self-edge.
    pub fn new(a: u32, b: u32, weight: f64) -> Self {
        assert_ne!(a, b, "self-edge");
        Self {
            i: a.min(b),
            j: a.max(b),
            weight,
            place: None,
            industry: None,
            outdoor: false,
        }
    }
}

pub const NO_PLACE: u32 = u32::MAX;
pub const NO_INDUSTRY: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub nbr: u32,
    pub place: u32,
    pub weight: f64,
    pub industry: u8,
    pub outdoor: bool,
}

impl Neighbor {
    pub fn industry(&self) -> Option<IndustryId> {
        (self.industry != NO_INDUSTRY).then_some(self.industry as IndustryId)
    }
}

/// Compressed adjacency; every undirected edge is stored from both ends.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Csr {
    offsets: Vec<u32>,
    entries: Vec<Neighbor>,
}

impl Csr {
    pub fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut deg = vec![0u32; n + 1];
        for e in edges {
            deg[e.i as usize + 1] += 1;
            deg[e.j as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let offsets = deg.clone();
        let mut fill = deg;
        let blank = Neighbor {
            nbr: 0,
            place: NO_PLACE,
            weight: 0.0,
            industry: NO_INDUSTRY,
            outdoor: false,
        };
        let mut entries = vec![blank; edges.len() * 2];
        for e in edges {
            let ind = e.industry.map_or(NO_INDUSTRY, |k| k as u8);
            let place = e.place.unwrap_or(NO_PLACE);
            for (a, b) in [(e.i, e.j), (e.j, e.i)] {
                let slot = &mut fill[a as usize];
                entries[*slot as usize] = Neighbor {
                    nbr: b,
                    place,
                    weight: e.weight,
                    industry: ind,
                    outdoor: e.outdoor,
                };
                *slot += 1;
            }
        }
        Self { offsets, entries }
    }

    pub fn neighbors(&self, i: u32) -> &[Neighbor] {
        let i = i as usize;
        if i + 1 >= self.offsets.len() {
            return &[];
        }
        &self.entries[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn n_edges(&self) -> usize {
        self.entries.len() / 2
    }

    /// Canonical edge list, sorted by `(i, j)`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.n_edges());
        for i in 0..self.offsets.len().saturating_sub(1) {
            for nb in self.neighbors(i as u32) {
                if nb.nbr > i as u32 {
                    out.push(Edge {
                        i: i as u32,
                        j: nb.nbr,
                        weight: nb.weight,
                        place: (nb.place != NO_PLACE).then_some(nb.place),
                        industry: nb.industry(),
                        outdoor: nb.outdoor,
                    });
                }
            }
        }
        out.sort_unstable_by_key(|e| (e.i, e.j));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateDay {
    /// 0 = Monday.
    pub weekday: u8,
    pub layers: [Csr; 4],
}

impl TemplateDay {
    pub fn layer(&self, l: Layer) -> &Csr {
        &self.layers[l as usize]
    }
}

/// Scaled contact templates plus build diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactTemplates {
    pub n_persons: usize,
    pub days: Vec<TemplateDay>,
    /// Factor applied to raw weights, per layer (1 for empty layers).
    pub scale: [f64; 4],
    /// Share of candidate community weight dropped by the threshold.
    pub community_removed_weight_share: f64,
    /// Share of candidate community links dropped by the threshold.
    pub community_removed_link_share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappas {
    pub household: f64,
    pub school: f64,
    pub workplace: f64,
    pub community: f64,
}

impl Default for Kappas {
    fn default() -> Self {
        Self {
            household: 4.11,
            school: 11.41,
            workplace: 8.07,
            community: 2.79,
        }
    }
}

impl Kappas {
    pub fn get(&self, l: Layer) -> f64 {
        match l {
            Layer::Household => self.household,
            Layer::School => self.school,
            Layer::Workplace => self.workplace,
            Layer::Community => self.community,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactConfig {
    pub places: PlaceConfig,
    pub visits: VisitModel,
    pub workplace: WorkplaceModel,
    /// Half-open age range attending school.
    pub school_ages: (u8, u8),
    pub community_threshold: f64,
    pub workplace_threshold: f64,
    #[serde(default)]
    pub kappas: Kappas,
    #[serde(default)]
    pub normalization: KappaNormalization,
}

/// Everything the simulation needs from the contact side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactSetup {
    pub places: Vec<Place>,
    pub workplaces: WorkplaceAssignment,
    pub templates: ContactTemplates,
}

/// Places, visits, workplaces and scaled templates from one seed.
pub fn build_contacts(
    pop: &Population,
    n_tracts: usize,
    n_industries: usize,
    config: &ContactConfig,
    seed: u64,
) -> Result<ContactSetup> {
    let places = synth_places(&config.places, n_tracts, seed)?;
    let visits = synth_visits(pop, &places, &config.visits, seed)?;
    let workplaces = assign_workplaces(pop, n_industries, &config.workplace, seed);
    let templates = build_templates(pop, &places, &visits, &workplaces, config, seed)?;
    Ok(ContactSetup {
        places,
        workplaces,
        templates,
    })
}

pub fn build_templates(
    pop: &Population,
    places: &[Place],
    visits: &VisitLog,
    workplaces: &WorkplaceAssignment,
    config: &ContactConfig,
    seed: u64,
) -> Result<ContactTemplates> {
    let n = pop.len();
    let n_days = visits.days.len();
    if n_days == 0 || !n_days.is_multiple_of(7) {
        return Err(Error::config("visit_model.n_weeks", "templates need whole weeks"));
    }

    let mut household = vec![household_weights(&pop.households)];
    let schools = school_assignment(pop, config.school_ages, n_tracts(pop));
    let mut school = vec![school_weights(&schools)];

    let community: Vec<CommunityWeights> = visits
        .days
        .par_iter()
        .map(|d| community_weights(d, places, config.community_threshold))
        .collect();
    let mut workplace = Vec::with_capacity(n_days);
    for d in 0..n_days {
        let present: Vec<bool> = (0..n)
            .map(|i| {
                !is_weekend(d % 7)
                    || rng::uniform(seed, Stream::Workplaces, d as u64, i as u64, 1)
                        < config.workplace.weekend_presence
            })
            .collect();
        workplace.push(workplace_weights(workplaces, &present, config.workplace_threshold)?);
    }

    let cand_w: f64 = community.iter().map(|c| c.candidate_weight).sum();
    let cand_l: usize = community.iter().map(|c| c.candidate_links).sum();
    let kept_w: f64 = community.iter().flat_map(|c| &c.edges).map(|e| e.weight).sum();
    let kept_l: usize = community.iter().map(|c| c.edges.len()).sum();
    let mut community: Vec<Vec<Edge>> = community.into_iter().map(|c| c.edges).collect();

    let k = &config.kappas;
    let mode = config.normalization;
    // School normalization counts weekdays only, which for a static graph is
    // the same as the single graph.
    let scale = [
        scale_layer(&mut household, k.household, mode).unwrap_or(1.0),
        scale_layer(&mut school, k.school, mode).unwrap_or(1.0),
        scale_layer(&mut workplace, k.workplace, mode).unwrap_or(1.0),
        scale_layer(&mut community, k.community, mode).unwrap_or(1.0),
    ];

    let household = Csr::from_edges(n, &household[0]);
    let school = Csr::from_edges(n, &school[0]);
    let days = (0..n_days)
        .map(|d| {
            let weekend = is_weekend(d % 7);
            TemplateDay {
                weekday: (d % 7) as u8,
                layers: [
                    household.clone(),
                    if weekend { Csr::from_edges(n, &[]) } else { school.clone() },
                    Csr::from_edges(n, &workplace[d]),
                    Csr::from_edges(n, &community[d]),
                ],
            }
        })
        .collect();

    Ok(ContactTemplates {
        n_persons: n,
        days,
        scale,
        community_removed_weight_share: if cand_w > 0.0 { 1.0 - kept_w / cand_w } else { 0.0 },
        community_removed_link_share: if cand_l > 0 {
            1.0 - kept_l as f64 / cand_l as f64
        } else {
            0.0
        },
    })
}

fn n_tracts(pop: &Population) -> usize {
    pop.persons.iter().map(|p| p.tract_id as usize + 1).max().unwrap_or(0)
}

/// Filters that remove contacts on one calendar day. Every decision is a
/// pure function of `(seed, day, ids)`, so the same filter can be applied
/// lazily during transmission or eagerly by [`network_for_day`].
#[derive(Debug, Clone, Copy)]
pub struct DayFilters<'a> {
    pub seed: u64,
    pub day: u32,
    /// Voluntary reduction of community contacts and workplace attendance.
    pub lambda_epi: f64,
    /// Closure share per industry on the epidemic side.
    pub closure: &'a [f64],
    pub customer_facing: &'a [bool],
    pub schools_closed: bool,
    pub wfh_mandate: bool,
    /// Employment status as last reported by the economy.
    pub employed: &'a [bool],
    pub can_wfh: &'a [bool],
}

impl DayFilters<'_> {
    /// Probability a community edge tagged with `industry` survives.
    /// Untagged edges respond to fear but not to closures.
    pub fn community_survival(&self, industry: Option<IndustryId>) -> f64 {
        match industry {
            Some(k) => {
                let tau = if self.customer_facing[k] { 1.0 } else { 0.0 };
                (1.0 - self.lambda_epi * tau) * (1.0 - self.closure[k])
            }
            None => 1.0 - self.lambda_epi,
        }
    }

    pub fn community_keep(&self, i: u32, j: u32, industry: Option<IndustryId>) -> bool {
        let p = self.community_survival(industry);
        if p >= 1.0 {
            return true;
        }
        let (a, b) = (i.min(j), i.max(j));
        rng::uniform(self.seed, Stream::CommunityFilter, self.day as u64, a as u64, b as u64) < p
    }

    /// Whether person `i` attends the workplace today (given that the template
    /// places them there).
    pub fn at_work(&self, i: u32) -> bool {
        let i = i as usize;
        if !self.employed[i] {
            return false;
        }
        if !self.can_wfh[i] {
            return true;
        }
        if self.wfh_mandate {
            return false;
        }
        self.lambda_epi <= 0.0
            || rng::uniform(self.seed, Stream::WorkplaceAbsence, self.day as u64, i as u64, 0)
                >= self.lambda_epi
    }
}

impl ContactTemplates {
    /// Template day used on a calendar day, drawn uniformly among the
    /// templates with the same weekday.
    pub fn template_for_day(&self, seed: u64, day: u32, weekday: u8) -> usize {
        let matching: Vec<usize> = (0..self.days.len())
            .filter(|&d| self.days[d].weekday == weekday)
            .collect();
        assert!(!matching.is_empty(), "no template for weekday {weekday}");
        let u = rng::uniform(seed, Stream::Template, day as u64, 0, 0);
        matching[((u * matching.len() as f64) as usize).min(matching.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactNetworkDay {
    pub template_day: usize,
    pub layers: [Vec<Edge>; 4],
}

impl ContactNetworkDay {
    pub fn layer(&self, l: Layer) -> &[Edge] {
        &self.layers[l as usize]
    }
}

/// Materialized network for one calendar day with optional filters.
pub fn network_for_day(
    templates: &ContactTemplates,
    seed: u64,
    day: u32,
    weekday: u8,
    filters: Option<&DayFilters>,
) -> ContactNetworkDay {
    let d = templates.template_for_day(seed, day, weekday);
    let t = &templates.days[d];
    let mut layers: [Vec<Edge>; 4] = Layer::ALL.map(|l| t.layer(l).edges());
    if let Some(f) = filters {
        if f.schools_closed {
            layers[Layer::School as usize].clear();
        }
        layers[Layer::Workplace as usize].retain(|e| f.at_work(e.i) && f.at_work(e.j));
        layers[Layer::Community as usize].retain(|e| f.community_keep(e.i, e.j, e.industry));
    }
    ContactNetworkDay {
        template_day: d,
        layers,
    }
}

pub const TEMPLATE_CSV_HEADER: &str =
    "template_day,weekday,layer,i,j,weight,place,industry,outdoor";

pub fn write_templates_csv<W: Write>(templates: &ContactTemplates, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TEMPLATE_CSV_HEADER.split(','))?;
    for (d, day) in templates.days.iter().enumerate() {
        for l in Layer::ALL {
            for e in day.layer(l).edges() {
                w.write_record([
                    d.to_string(),
                    day.weekday.to_string(),
                    l.name().to_string(),
                    e.i.to_string(),
                    e.j.to_string(),
                    format!("{:e}", e.weight),
                    e.place.map(|p| p.to_string()).unwrap_or_default(),
                    e.industry.map(|k| k.to_string()).unwrap_or_default(),
                    u8::from(e.outdoor).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct TemplateRow {
    template_day: usize,
    weekday: u8,
    layer: String,
    i: u32,
    j: u32,
    weight: f64,
    place: Option<u32>,
    industry: Option<IndustryId>,
    outdoor: u8,
}

/// Reads templates written by [`write_templates_csv`]. Weights are taken as
/// already scaled; `scale` is reported as 1.
pub fn read_templates_csv<R: Read>(input: R, n_persons: usize) -> Result<ContactTemplates> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut days: Vec<(u8, [Vec<Edge>; 4])> = Vec::new();
    for row in rdr.deserialize() {
        let r: TemplateRow = row?;
        let layer = Layer::parse(&r.layer)
            .ok_or_else(|| Error::config("templates", format!("unknown layer `{}`", r.layer)))?;
        if r.i >= r.j || r.j as usize >= n_persons {
            return Err(Error::config("templates", format!("bad edge ({}, {})", r.i, r.j)));
        }
        while days.len() <= r.template_day {
            days.push((0, Default::default()));
        }
        let day = &mut days[r.template_day];
        day.0 = r.weekday;
        day.1[layer as usize].push(Edge {
            i: r.i,
            j: r.j,
            weight: r.weight,
            place: r.place,
            industry: r.industry,
            outdoor: r.outdoor != 0,
        });
    }
    let days = days
        .into_iter()
        .enumerate()
        .map(|(d, (wd, layers))| TemplateDay {
            weekday: if layers.iter().all(|l| l.is_empty()) { (d % 7) as u8 } else { wd },
            layers: layers.map(|edges| Csr::from_edges(n_persons, &edges)),
        })
        .collect();
    Ok(ContactTemplates {
        n_persons,
        days,
        scale: [1.0; 4],
        community_removed_weight_share: 0.0,
        community_removed_link_share: 0.0,
    })
}
