//! World configuration, the builder that turns it into a [`World`], and a
//! desk-scale synthetic configuration used by tests, examples and the CLI.

use serde::{Deserialize, Serialize};

use crate::contacts::{build_contacts, ContactConfig, Kappas, KappaNormalization};
use crate::contacts::{PlaceConfig, PlaceKind, VisitModel, WorkplaceModel};
use crate::coupling::{FearParams, World};
use crate::econ::{ConsumptionTable, EconParams};
use crate::econio::{make_use_to_industry, regionalize, MakeUse, NationalIO, TwoRegionIO};
use crate::epidemic::{EpiParams, SeedingConfig};
use crate::error::{Error, Result};
use crate::industry::{default_industries, default_occupations, IndustryInfo};
use crate::industry::{NON_ECONOMIC_PLACES, NON_ECONOMIC_WEIGHT};
use crate::population::{
    generate_population, AgeBand, AgeMass, GroupScheme, IncomeQuantiles, PopulationConfig,
    RetireeIncome, QUANTILE_Z,
};
use crate::shocks::{DemandShocks, LogisticWave, RestDeaths};

/// Where rest-of-country deaths come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestDeathSource {
    Zero,
    Series(Vec<f64>),
    Logistic(LogisticWave),
}

/// Regional GDP and FLQ settings used to split the national table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regionalization {
    pub gdp_region: Vec<f64>,
    pub gdp_nation: Vec<f64>,
    pub flq_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    /// Seed for the population, places, visits and workplaces.
    pub world_seed: u64,
    pub population: PopulationConfig,
    pub contacts: ContactConfig,
    pub industries: Vec<IndustryInfo>,
    pub make_use: MakeUse,
    pub regionalization: Regionalization,
    pub consumption: ConsumptionTable,
    #[serde(default)]
    pub epidemic: EpiParams,
    pub seeding: Option<SeedingConfig>,
    #[serde(default)]
    pub economy: EconParams,
    #[serde(default)]
    pub fear: FearParams,
    #[serde(default)]
    pub demand_shocks: DemandShocks,
    pub rest_deaths: RestDeathSource,
    pub fear_reference_population: f64,
    pub n_income_bands: usize,
}

impl WorldConfig {
    pub fn n_days(&self) -> u32 {
        140
    }

    pub fn national_io(&self) -> Result<NationalIO> {
        make_use_to_industry(&self.make_use)
    }

    pub fn two_region_io(&self) -> Result<TwoRegionIO> {
        let r = &self.regionalization;
        regionalize(&self.national_io()?, &r.gdp_region, &r.gdp_nation, r.flq_delta)
    }

    pub fn validate(&self) -> Result<()> {
        self.population.validate()?;
        self.epidemic.validate()?;
        self.economy.validate()?;
        self.fear.validate()?;
        let n = self.industries.len();
        if self.population.n_industries != n || self.make_use.industries.len() != n {
            return Err(Error::config("industries", "industry count differs between tables"));
        }
        if self.n_income_bands == 0 {
            return Err(Error::config("n_income_bands", "must be positive"));
        }
        if !(self.fear_reference_population > 0.0) {
            return Err(Error::config("fear_reference_population", "must be positive"));
        }
        Ok(())
    }
}

/// Builds the population, contact templates and two-region table.
pub fn build_world(cfg: &WorldConfig) -> Result<World> {
    cfg.validate()?;
    let pop = generate_population(&cfg.population, cfg.world_seed)?;
    let n_tracts = cfg.population.n_tracts();
    let contacts = build_contacts(&pop, n_tracts, cfg.industries.len(), &cfg.contacts, cfg.world_seed)?;
    let io = cfg.two_region_io()?;
    let n_days = cfg.n_days();
    let rest_deaths = match &cfg.rest_deaths {
        RestDeathSource::Zero => RestDeaths::zeros(n_days),
        RestDeathSource::Series(v) => {
            if v.len() < n_days as usize {
                return Err(Error::config("rest_deaths", format!("series shorter than {n_days} days")));
            }
            if v.iter().any(|d| !(*d >= 0.0)) {
                return Err(Error::config("rest_deaths", "negative deaths"));
            }
            RestDeaths { daily: v.clone() }
        }
        RestDeathSource::Logistic(w) => w.series(n_days),
    };
    Ok(World {
        pop,
        n_tracts,
        groups: cfg.population.groups.clone(),
        templates: contacts.templates,
        industries: cfg.industries.clone(),
        io,
        consumption: cfg.consumption.clone(),
        epi: cfg.epidemic.clone(),
        seeding: cfg.seeding.clone(),
        econ: cfg.economy.clone(),
        fear: cfg.fear,
        demand_shocks: cfg.demand_shocks,
        rest_deaths,
        fear_reference_population: cfg.fear_reference_population,
        n_income_bands: cfg.n_income_bands,
    })
}

// ---------------------------------------------------------------------------
// Desk-scale synthetic tables

/// National output per industry, billions.
const OUTPUT: [f64; 20] = [
    450.0, 550.0, 470.0, 1700.0, 6000.0, 2000.0, 2000.0, 1400.0, 1800.0, 2800.0, 3800.0, 2400.0,
    600.0, 1100.0, 400.0, 2500.0, 300.0, 1300.0, 650.0, 3500.0,
];

/// Share of national GDP produced in the region, per industry.
const REGION_SHARE: [f64; 20] = [
    0.003, 0.005, 0.04, 0.05, 0.025, 0.06, 0.06, 0.06, 0.10, 0.12, 0.09, 0.09, 0.08, 0.07, 0.09,
    0.07, 0.08, 0.07, 0.06, 0.05,
];

/// Final demand split (c, G); other final demand takes the rest and is
/// negative (net imports) for mining.
const FINAL_SPLIT: [(f64, f64); 20] = [
    (0.55, 0.05), (0.9, 0.3), (0.8, 0.1), (0.05, 0.15), (0.45, 0.1), (0.7, 0.05), (0.97, 0.0),
    (0.6, 0.1), (0.6, 0.1), (0.75, 0.02), (0.8, 0.02), (0.3, 0.15), (0.2, 0.1), (0.4, 0.2),
    (0.6, 0.35), (0.8, 0.18), (0.9, 0.05), (0.95, 0.02), (0.85, 0.05), (0.02, 0.95),
];

/// Employment share per industry before the tract tilt.
const EMPLOYMENT: [f64; 20] = [
    0.002, 0.002, 0.005, 0.06, 0.05, 0.035, 0.10, 0.06, 0.035, 0.07, 0.025, 0.09, 0.015, 0.06,
    0.09, 0.14, 0.025, 0.08, 0.04, 0.016,
];

/// Industries whose employment is concentrated in poorer and richer tracts.
const LOW_WAGE_INDUSTRIES: [usize; 6] = [6, 7, 13, 16, 17, 18];
const HIGH_WAGE_INDUSTRIES: [usize; 4] = [8, 9, 11, 12];
const HIGH_WAGE_OCCUPATIONS: [usize; 6] = [0, 1, 2, 3, 6, 9];
const LOW_WAGE_OCCUPATIONS: [usize; 5] = [10, 12, 13, 14, 21];

/// Specific occupations per industry; every industry also employs managers
/// and office staff.
const OCCUPATION_MIX: [&[(usize, f64)]; 20] = [
    &[(17, 0.6), (21, 0.1), (19, 0.08)],
    &[(18, 0.4), (19, 0.2), (21, 0.2), (3, 0.1)],
    &[(19, 0.35), (3, 0.2), (21, 0.1), (2, 0.05)],
    &[(18, 0.65), (19, 0.1), (21, 0.05)],
    &[(20, 0.5), (21, 0.1), (3, 0.08), (19, 0.06), (15, 0.04)],
    &[(15, 0.35), (21, 0.25), (1, 0.05)],
    &[(15, 0.55), (21, 0.12), (12, 0.03)],
    &[(21, 0.6), (19, 0.08)],
    &[(2, 0.3), (8, 0.2), (15, 0.1), (1, 0.1)],
    &[(1, 0.35), (15, 0.2), (2, 0.1)],
    &[(15, 0.3), (13, 0.15), (19, 0.1), (1, 0.1)],
    &[(1, 0.2), (2, 0.2), (3, 0.1), (6, 0.12), (4, 0.05), (8, 0.05)],
    &[(1, 0.35), (2, 0.1), (0, 0.14)],
    &[(13, 0.3), (11, 0.1), (16, 0.1), (21, 0.1)],
    &[(7, 0.7), (5, 0.05)],
    &[(9, 0.35), (10, 0.3), (5, 0.05), (14, 0.05)],
    &[(8, 0.25), (14, 0.25), (12, 0.15), (13, 0.1)],
    &[(12, 0.75), (13, 0.05)],
    &[(14, 0.4), (19, 0.2), (13, 0.05)],
    &[(11, 0.25), (1, 0.15), (5, 0.1), (6, 0.05)],
];

/// Median annual wage per occupation.
const OCC_MEDIAN: [f64; 22] = [
    110e3, 80e3, 95e3, 85e3, 75e3, 50e3, 95e3, 55e3, 55e3, 85e3, 32e3, 50e3, 25e3, 30e3, 28e3,
    35e3, 42e3, 30e3, 50e3, 50e3, 38e3, 36e3,
];

/// Wage premium per industry.
const IND_FACTOR: [f64; 20] = [
    0.85, 1.1, 1.15, 1.0, 1.0, 1.0, 0.85, 1.0, 1.15, 1.25, 1.0, 1.15, 1.2, 0.9, 1.0, 1.0, 0.9,
    0.8, 0.9, 1.05,
];

/// Household income level representative of each consumption income band.
const BAND_INCOME: [f64; 7] = [10e3, 22e3, 35e3, 45e3, 60e3, 85e3, 150e3];

/// Knobs of the desk-scale configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeskScale {
    pub n_tracts: usize,
    pub persons_per_tract: usize,
    pub world_seed: u64,
}

impl Default for DeskScale {
    fn default() -> Self {
        Self {
            n_tracts: 20,
            persons_per_tract: 500,
            world_seed: 20200212,
        }
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

fn affluence(t: usize, n: usize) -> f64 {
    if n <= 1 { 0.5 } else { t as f64 / (n - 1) as f64 }
}

fn desk_population(scale: &DeskScale) -> PopulationConfig {
    let nt = scale.n_tracts;
    let occupations = default_occupations();
    let mass = |lo, hi, weight| AgeMass { band: AgeBand::new(lo, hi), weight };
    let age_distribution = vec![
        mass(0, 5, 0.06),
        mass(5, 18, 0.16),
        mass(18, 25, 0.09),
        mass(25, 35, 0.15),
        mass(35, 45, 0.13),
        mass(45, 55, 0.13),
        mass(55, 65, 0.12),
        mass(65, 75, 0.09),
        mass(75, 90, 0.06),
        mass(90, 101, 0.01),
    ];
    let employment_bands = vec![
        AgeBand::new(18, 25),
        AgeBand::new(25, 55),
        AgeBand::new(55, 65),
        AgeBand::new(65, 101),
    ];
    let employment_rates = (0..nt)
        .map(|t| {
            let a = affluence(t, nt);
            vec![0.50 + 0.1 * a, 0.72 + 0.1 * a, 0.58 + 0.08 * a, 0.12]
        })
        .collect();
    let industry_shares = (0..nt)
        .map(|t| {
            let a = affluence(t, nt);
            let mut row = EMPLOYMENT.to_vec();
            for &k in &LOW_WAGE_INDUSTRIES {
                row[k] *= 1.3 - 0.6 * a;
            }
            for &k in &HIGH_WAGE_INDUSTRIES {
                row[k] *= 0.7 + 0.6 * a;
            }
            normalize(&mut row);
            row
        })
        .collect();
    let occupation_by_industry = OCCUPATION_MIX
        .iter()
        .map(|mix| {
            let mut row = vec![0.0; occupations.len()];
            row[0] += 0.06;
            row[16] += 0.10;
            for &(o, w) in mix.iter() {
                row[o] += w;
            }
            normalize(&mut row);
            row
        })
        .collect();
    let occupation_by_tract = (0..nt)
        .map(|t| {
            let a = affluence(t, nt);
            (0..occupations.len())
                .map(|o| {
                    if HIGH_WAGE_OCCUPATIONS.contains(&o) {
                        0.6 + 0.8 * a
                    } else if LOW_WAGE_OCCUPATIONS.contains(&o) {
                        1.4 - 0.8 * a
                    } else {
                        1.0
                    }
                })
                .collect()
        })
        .collect();
    let sigma = 0.55;
    let mut income_quantiles = Vec::new();
    for (k, f) in IND_FACTOR.iter().enumerate() {
        for (o, m) in OCC_MEDIAN.iter().enumerate() {
            income_quantiles.push(IncomeQuantiles {
                industry: k,
                occupation: o,
                quantiles: QUANTILE_Z.map(|z| m * f * (sigma * z).exp()),
            });
        }
    }
    PopulationConfig {
        tract_population: vec![scale.persons_per_tract; nt],
        age_distribution,
        household_size_distribution: vec![0.28, 0.30, 0.17, 0.14, 0.07, 0.04],
        adult_age: 18,
        employment_bands,
        employment_rates,
        n_industries: 20,
        industry_shares,
        occupation_by_industry,
        occupation_by_tract,
        remote_labor_index: occupations.iter().map(|o| o.remote_labor_index).collect(),
        income_quantiles,
        earnings_bands: vec![
            AgeBand::new(18, 25),
            AgeBand::new(25, 35),
            AgeBand::new(35, 45),
            AgeBand::new(45, 55),
            AgeBand::new(55, 65),
            AgeBand::new(65, 101),
        ],
        earnings_scalars: vec![0.55, 0.9, 1.1, 1.15, 1.1, 0.9],
        tract_mean_household_income: Some(
            (0..nt).map(|t| 45_000.0 + 60_000.0 * affluence(t, nt)).collect(),
        ),
        retiree_income: Some(RetireeIncome::default()),
        target_mean_income: Some(50_000.0),
        groups: GroupScheme::default(),
    }
}

fn desk_contacts(scale: &DeskScale, industries: &[IndustryInfo]) -> ContactConfig {
    let n = scale.n_tracts * scale.persons_per_tract;
    let total_places: f64 =
        industries.iter().map(|i| i.places as f64).sum::<f64>() + NON_ECONOMIC_PLACES as f64;
    let mut kinds: Vec<PlaceKind> = industries
        .iter()
        .enumerate()
        .filter(|(_, i)| i.places > 0 && i.community_weight > 0.0)
        .map(|(k, i)| PlaceKind {
            industry: Some(k),
            share: i.places as f64 / total_places,
            popularity: i.community_weight / i.places as f64,
            outdoor_share: if k == crate::industry::ARTS { 0.2 } else { 0.02 },
        })
        .collect();
    kinds.push(PlaceKind {
        industry: None,
        share: NON_ECONOMIC_PLACES as f64 / total_places,
        popularity: NON_ECONOMIC_WEIGHT / NON_ECONOMIC_PLACES as f64,
        outdoor_share: 0.5,
    });
    let s: f64 = kinds.iter().map(|k| k.share).sum();
    kinds.iter_mut().for_each(|k| k.share /= s);
    ContactConfig {
        places: PlaceConfig {
            n_places: (n / 5).max(1),
            kinds,
            popularity_sigma: 0.8,
        },
        visits: VisitModel {
            places_per_person: 8,
            weekday_visits: 1.2,
            weekend_visits: 1.6,
            local_bias: 4.0,
            min_minutes: 10.0,
            max_minutes: 90.0,
            n_weeks: 2,
        },
        workplace: WorkplaceModel {
            workers_per_cbg: 12,
            poi_per_cbg: 3,
            weekend_presence: 0.2,
        },
        school_ages: (5, 18),
        community_threshold: 0.01,
        workplace_threshold: 0.0,
        kappas: Kappas::default(),
        normalization: KappaNormalization::default(),
    }
}

/// A 20-industry make/use system. Each industry makes 95% of its own
/// commodity and 5% of the next one; intermediate use follows a banded
/// coefficient pattern.
pub fn desk_make_use(names: Vec<String>) -> MakeUse {
    let n = OUTPUT.len();
    let mut make = vec![vec![0.0; n]; n];
    for k in 0..n {
        make[k][k] = 0.95 * OUTPUT[k];
        make[k][(k + 1) % n] = 0.05 * OUTPUT[k];
    }
    let q: Vec<f64> = (0..n).map(|c| (0..n).map(|k| make[k][c]).sum()).collect();
    // commodity c used by industry l
    let coef = |c: usize, l: usize| -> f64 {
        let own = if c == l { 0.12 } else { 0.0 };
        let d = (c as i64 - l as i64).rem_euclid(n as i64) as f64;
        own + 0.02 * (-d / 4.0).exp() + 0.004
    };
    let use_table: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|l| coef(c, l) * OUTPUT[l]).collect())
        .collect();
    let final_demand = (0..n)
        .map(|c| {
            let total = q[c] - use_table[c].iter().sum::<f64>();
            let (cs, gs) = FINAL_SPLIT[c];
            [cs * total, gs * total, (1.0 - cs - gs) * total]
        })
        .collect();
    MakeUse {
        industries: names,
        make,
        use_table,
        commodity_output: q,
        industry_output: OUTPUT.to_vec(),
        scrap: Vec::new(),
        final_demand,
    }
}

/// Per-household spending: customer-facing goods are income-elastic, the
/// rest much less so. Older heads spend more on health, younger on education.
pub fn desk_consumption(industries: &[IndustryInfo], groups: &GroupScheme) -> ConsumptionTable {
    let n_age = groups.n_age();
    let spend = (0..groups.n_groups())
        .map(|g| {
            let (age, band) = (g / groups.n_income(), g % groups.n_income());
            let level = BAND_INCOME[band.min(BAND_INCOME.len() - 1)] / 50e3;
            industries
                .iter()
                .enumerate()
                .map(|(k, ind)| {
                    let elasticity = if ind.customer_facing { 1.1 } else { 0.5 };
                    let mut w = level.powf(elasticity);
                    if k == crate::industry::HEALTH && age + 1 == n_age {
                        w *= 1.5;
                    }
                    if k == crate::industry::EDUCATION && age < 2 {
                        w *= 1.5;
                    }
                    w
                })
                .collect()
        })
        .collect();
    ConsumptionTable { spend }
}

fn desk_regionalization(national: &NationalIO) -> Regionalization {
    let gdp_nation: Vec<f64> = (0..national.n())
        .map(|l| national.x[l] - (0..national.n()).map(|k| national.z[k][l]).sum::<f64>())
        .collect();
    Regionalization {
        gdp_region: gdp_nation.iter().zip(REGION_SHARE).map(|(y, s)| y * s).collect(),
        gdp_nation,
        flq_delta: 0.3,
    }
}

/// Rest-of-country first wave expressed at the reference population scale.
pub fn desk_rest_wave() -> LogisticWave {
    LogisticWave {
        total: 80.0,
        rate: 0.08,
        midpoint: 85.0,
    }
}

/// The desk-scale configuration: synthetic tables standing in for census,
/// mobility and national accounts data.
pub fn desk_config(scale: DeskScale) -> WorldConfig {
    let industries = default_industries();
    let population = desk_population(&scale);
    let contacts = desk_contacts(&scale, &industries);
    let make_use = desk_make_use(industries.iter().map(|i| i.name.clone()).collect());
    let national = make_use_to_industry(&make_use).expect("desk make/use is well formed");
    let consumption = desk_consumption(&industries, &population.groups);
    WorldConfig {
        world_seed: scale.world_seed,
        population,
        contacts,
        regionalization: desk_regionalization(&national),
        industries,
        make_use,
        consumption,
        epidemic: EpiParams {
            beta: DESK_BETA,
            ..EpiParams::default()
        },
        seeding: Some(SeedingConfig {
            n_latent: 3,
            ..SeedingConfig::default()
        }),
        economy: EconParams::default(),
        fear: FearParams::default(),
        demand_shocks: DemandShocks::default(),
        rest_deaths: RestDeathSource::Logistic(desk_rest_wave()),
        fear_reference_population: 416_442.0,
        n_income_bands: 5,
    }
}

pub fn desk_world(scale: DeskScale) -> Result<World> {
    build_world(&desk_config(scale))
}

/// A 1,000-person desk world shared by unit tests.
#[cfg(test)]
pub(crate) fn desk_world_small() -> &'static World {
    static W: std::sync::OnceLock<World> = std::sync::OnceLock::new();
    W.get_or_init(|| {
        desk_world(DeskScale { n_tracts: 4, persons_per_tract: 250, world_seed: 7 }).expect("desk world")
    })
}

/// Transmission rate giving a sizeable unmitigated first wave on the desk
/// world.
pub const DESK_BETA: f64 = 0.07;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_tables_are_valid() {
        let cfg = desk_config(DeskScale {
            n_tracts: 2,
            persons_per_tract: 200,
            world_seed: 1,
        });
        cfg.validate().unwrap();
        let io = cfg.two_region_io().unwrap();
        for o in 0..2 {
            for k in 0..io.n() {
                assert!(io.row_residual(o, k).abs() < 1e-9 * io.x[o][k]);
            }
        }
    }
}
