//! Synthetic population: persons grouped into households with jointly
//! consistent age, tract, employment, industry, occupation, work-from-home
//! capability and income.

mod config;
pub mod income;

use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

pub use config::{
    band_of, AgeBand, AgeMass, GroupScheme, IncomeQuantiles, PopulationConfig, RetireeIncome,
};
pub use income::{assign_income, fit_lognormal_quantiles, LognormalFit, QUANTILE_Z};

use crate::epidemic::Compartment;
use crate::error::{Error, Result};
use crate::industry::{IndustryId, OccupationId};
use crate::rng::{self, CumulativeTable, Stream};

pub type PersonId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Person {
    pub person_id: PersonId,
    pub household_id: u32,
    pub tract_id: u32,
    pub age: u8,
    pub employed: bool,
    pub industry: Option<IndustryId>,
    pub occupation: Option<OccupationId>,
    pub can_wfh: bool,
    pub income: f64,
    pub epi_state: Compartment,
}

impl Person {
    fn new(person_id: PersonId, household_id: u32, tract_id: u32, age: u8) -> Self {
        Self {
            person_id,
            household_id,
            tract_id,
            age,
            employed: false,
            industry: None,
            occupation: None,
            can_wfh: false,
            income: 0.0,
            epi_state: Compartment::S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub household_id: u32,
    pub member_ids: Vec<PersonId>,
    pub tract_id: u32,
    pub head_id: PersonId,
    pub group_id: usize,
}

/// Persons indexed by `person_id` plus their households.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub persons: Vec<Person>,
    pub households: Vec<Household>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    pub fn household_income(&self, h: &Household) -> f64 {
        h.member_ids
            .iter()
            .map(|&i| self.persons[i as usize].income)
            .sum()
    }
}

/// Runs every generation stage in order.
pub fn generate_population(config: &PopulationConfig, seed: u64) -> Result<Population> {
    config.validate()?;
    let mut pop = sample_households(config, seed)?;
    assign_employment_industry(&mut pop, config, seed)?;
    assign_occupations(&mut pop, config, seed)?;
    assign_wfh(&mut pop, config, seed)?;
    assign_income(&mut pop, config, seed)?;
    finalize_households(&mut pop, &config.groups);
    Ok(pop)
}

/// Household sizes from the configured distribution, ages i.i.d. from the
/// age distribution; a household without an adult is redrawn.
pub fn sample_households(config: &PopulationConfig, seed: u64) -> Result<Population> {
    let sizes = CumulativeTable::new(&config.household_size_distribution)
        .ok_or_else(|| Error::config("household_size_distribution", "all zero"))?;
    let age_weights: Vec<f64> = config.age_distribution.iter().map(|m| m.weight).collect();
    let ages = CumulativeTable::new(&age_weights)
        .ok_or_else(|| Error::config("age_distribution", "all zero"))?;
    let mut rng = rng::stream(seed, Stream::Households, 0);
    let draw_age = |rng: &mut rand_chacha::ChaCha8Rng| -> u8 {
        let band = config.age_distribution[ages.sample(rng)].band;
        rng.random_range(band.lo..band.hi)
    };

    let mut persons = Vec::with_capacity(config.total_population());
    let mut households = Vec::new();
    for (tract, &n) in config.tract_population.iter().enumerate() {
        let mut remaining = n;
        while remaining > 0 {
            let size = (sizes.sample(&mut rng) + 1).min(remaining);
            remaining -= size;
            let mut member_ages: Vec<u8>;
            loop {
                member_ages = (0..size).map(|_| draw_age(&mut rng)).collect();
                if member_ages.iter().any(|&a| a >= config.adult_age) {
                    break;
                }
            }
            let hid = households.len() as u32;
            let first = persons.len() as PersonId;
            for age in member_ages {
                persons.push(Person::new(persons.len() as PersonId, hid, tract as u32, age));
            }
            households.push(Household {
                household_id: hid,
                member_ids: (first..first + size as PersonId).collect(),
                tract_id: tract as u32,
                head_id: first,
                group_id: 0,
            });
        }
    }
    Ok(Population { persons, households })
}

/// Bernoulli employment by (tract, age band), then a categorical industry
/// draw from the tract's industry shares.
pub fn assign_employment_industry(
    pop: &mut Population,
    config: &PopulationConfig,
    seed: u64,
) -> Result<()> {
    let mut rng = rng::stream(seed, Stream::Employment, 0);
    let tables: Vec<CumulativeTable> = config
        .industry_shares
        .iter()
        .map(|row| CumulativeTable::new(row).expect("validated shares"))
        .collect();
    for p in &mut pop.persons {
        p.employed = false;
        p.industry = None;
        if p.age < config.adult_age {
            continue;
        }
        let band = band_of(&config.employment_bands, p.age).ok_or_else(|| {
            Error::config(
                "employment_bands",
                format!("no employment rate for tract {} age {}", p.tract_id, p.age),
            )
        })?;
        let rate = config
            .employment_rates
            .get(p.tract_id as usize)
            .and_then(|r| r.get(band))
            .copied()
            .ok_or_else(|| {
                Error::config(
                    "employment_rates",
                    format!("missing rate for tract {} band {band}", p.tract_id),
                )
            })?;
        if rng.random::<f64>() < rate {
            p.employed = true;
            p.industry = Some(tables[p.tract_id as usize].sample(&mut rng));
        }
    }
    Ok(())
}

/// Multinomial draw of `n` trials over `probs` via conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= p {
            out[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out[i] = k;
        left -= k;
        mass -= p;
    }
    out
}

/// Chooses `m` of `candidates` without replacement, each successive pick
/// proportional to its weight. Falls back to uniform when the remaining
/// weights are all zero. Returns positions into `candidates`.
pub fn weighted_without_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    m: usize,
    rng: &mut R,
) -> Vec<usize> {
    // Exponential-key form of Efraimidis-Spirakis: the m largest ln(u)/w win.
    let mut keyed: Vec<(f64, bool, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            if w > 0.0 {
                (u.ln() / w, true, i)
            } else {
                (u.ln(), false, i)
            }
        })
        .collect();
    keyed.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.total_cmp(&a.0)));
    keyed.into_iter().take(m).map(|(_, _, i)| i).collect()
}

/// Occupations per industry: multinomial head-counts from the industry's
/// occupation shares, then each occupation's seats go to workers with
/// probability proportional to their tract's weight for that occupation.
pub fn assign_occupations(
    pop: &mut Population,
    config: &PopulationConfig,
    seed: u64,
) -> Result<()> {
    for k in 0..config.n_industries {
        let shares = &config.occupation_by_industry[k];
        if shares.iter().all(|&s| s == 0.0) {
            return Err(Error::config(
                "occupation_by_industry",
                format!("industry {k} has all-zero occupation shares"),
            ));
        }
        let mut rng = rng::stream(seed, Stream::Occupations, k as u64);
        let mut pool: Vec<PersonId> = pop
            .persons
            .iter()
            .filter(|p| p.employed && p.industry == Some(k))
            .map(|p| p.person_id)
            .collect();
        let counts = multinomial(pool.len() as u64, shares, &mut rng);
        for (o, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let weights: Vec<f64> = pool
                .iter()
                .map(|&id| config.occupation_by_tract[pop.persons[id as usize].tract_id as usize][o])
                .collect();
            let mut chosen = weighted_without_replacement(&weights, count as usize, &mut rng);
            for &pos in &chosen {
                pop.persons[pool[pos] as usize].occupation = Some(o);
            }
            chosen.sort_unstable_by(|a, b| b.cmp(a));
            for pos in chosen {
                pool.swap_remove(pos);
            }
        }
        debug_assert!(pool.is_empty());
    }
    for p in &mut pop.persons {
        if !p.employed {
            p.occupation = None;
        }
    }
    Ok(())
}

/// Work-from-home capability ~ Bernoulli(remote labor index of occupation).
pub fn assign_wfh(pop: &mut Population, config: &PopulationConfig, seed: u64) -> Result<()> {
    if let Some(bad) = config
        .remote_labor_index
        .iter()
        .position(|&r| !(0.0..=1.0).contains(&r))
    {
        return Err(Error::config(
            "remote_labor_index",
            format!("occupation {bad} outside [0, 1]"),
        ));
    }
    let mut rng = rng::stream(seed, Stream::Wfh, 0);
    for p in &mut pop.persons {
        p.can_wfh = match p.occupation {
            Some(o) if p.employed => rng.random::<f64>() < config.remote_labor_index[o],
            _ => false,
        };
    }
    Ok(())
}

/// Picks household heads (highest income, ties to the lowest id) and assigns
/// age-income consumption groups.
pub fn finalize_households(pop: &mut Population, groups: &GroupScheme) {
    for hi in 0..pop.households.len() {
        let h = &pop.households[hi];
        let head = h
            .member_ids
            .iter()
            .copied()
            .reduce(|best, id| {
                if pop.persons[id as usize].income > pop.persons[best as usize].income {
                    id
                } else {
                    best
                }
            })
            .expect("households are non-empty");
        let income = pop.household_income(h);
        let head_age = pop.persons[head as usize].age;
        let h = &mut pop.households[hi];
        h.head_id = head;
        h.group_id = groups.group_of(head_age, income);
    }
}

pub const POPULATION_CSV_HEADER: &str =
    "person_id,household_id,tract_id,age,employed,industry,occupation,can_wfh,income";

/// One row per person in the fixed column order of [`POPULATION_CSV_HEADER`].
/// Missing industry or occupation is an empty field.
pub fn write_population_csv<W: Write>(pop: &Population, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POPULATION_CSV_HEADER.split(','))?;
    for p in &pop.persons {
        w.write_record([
            p.person_id.to_string(),
            p.household_id.to_string(),
            p.tract_id.to_string(),
            p.age.to_string(),
            u8::from(p.employed).to_string(),
            p.industry.map(|k| k.to_string()).unwrap_or_default(),
            p.occupation.map(|o| o.to_string()).unwrap_or_default(),
            u8::from(p.can_wfh).to_string(),
            format!("{:.6}", p.income),
        ])?;
    }
    w.flush()?;
    Ok(())
}
