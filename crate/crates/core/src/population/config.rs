use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SHARE_TOL: f64 = 1e-9;

/// Half-open age interval `[lo, hi)` in years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeBand {
    pub lo: u8,
    pub hi: u8,
}

impl AgeBand {
    pub const fn new(lo: u8, hi: u8) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, age: u8) -> bool {
        self.lo <= age && age < self.hi
    }
}

/// Index of the band containing `age`, if any.
pub fn band_of(bands: &[AgeBand], age: u8) -> Option<usize> {
    bands.iter().position(|b| b.contains(age))
}

/// Probability mass on an age interval; ages are uniform inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeMass {
    pub band: AgeBand,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncomeQuantiles {
    pub industry: usize,
    pub occupation: usize,
    /// Income at probabilities 0.10, 0.25, 0.50, 0.75, 0.90.
    pub quantiles: [f64; 5],
}

/// Age-of-head by household-income classification of households into
/// consumption groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScheme {
    /// Upper-exclusive edges between head-age bands, ascending.
    pub age_edges: Vec<u8>,
    /// Upper-exclusive edges between household-income bands, ascending.
    pub income_edges: Vec<f64>,
}

impl Default for GroupScheme {
    fn default() -> Self {
        Self {
            age_edges: vec![25, 35, 45, 55, 65],
            income_edges: vec![15_000.0, 30_000.0, 40_000.0, 50_000.0, 70_000.0, 100_000.0],
        }
    }
}

impl GroupScheme {
    pub fn n_age(&self) -> usize {
        self.age_edges.len() + 1
    }

    pub fn n_income(&self) -> usize {
        self.income_edges.len() + 1
    }

    pub fn n_groups(&self) -> usize {
        self.n_age() * self.n_income()
    }

    pub fn income_band(&self, income: f64) -> usize {
        self.income_edges.partition_point(|&e| e <= income)
    }

    pub fn group_of(&self, head_age: u8, household_income: f64) -> usize {
        let a = self.age_edges.partition_point(|&e| e <= head_age);
        a * self.n_income() + self.income_band(household_income)
    }
}

/// Retiree income settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetireeIncome {
    /// Non-employed persons at or above this age receive retirement income.
    pub min_age: u8,
    /// Target ratio of mean income of persons aged `min_age`+ to the mean
    /// income of persons in `reference_band`.
    pub ratio: f64,
    pub reference_band: AgeBand,
}

impl Default for RetireeIncome {
    fn default() -> Self {
        Self {
            min_age: 65,
            ratio: 0.6,
            reference_band: AgeBand::new(55, 65),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    /// Persons per census tract.
    pub tract_population: Vec<usize>,
    pub age_distribution: Vec<AgeMass>,
    /// `household_size_distribution[i]` is the probability of size `i + 1`.
    pub household_size_distribution: Vec<f64>,
    pub adult_age: u8,
    pub employment_bands: Vec<AgeBand>,
    /// tract × employment band
    pub employment_rates: Vec<Vec<f64>>,
    pub n_industries: usize,
    /// tract × industry
    pub industry_shares: Vec<Vec<f64>>,
    /// industry × occupation
    pub occupation_by_industry: Vec<Vec<f64>>,
    /// tract × occupation; relative weights, rows need not sum to one
    pub occupation_by_tract: Vec<Vec<f64>>,
    /// per occupation
    pub remote_labor_index: Vec<f64>,
    pub income_quantiles: Vec<IncomeQuantiles>,
    /// Age bands and relative mean earnings used to tilt incomes by age.
    /// Empty disables the stage.
    #[serde(default)]
    pub earnings_bands: Vec<AgeBand>,
    #[serde(default)]
    pub earnings_scalars: Vec<f64>,
    /// Target mean household income per tract. `None` disables the stage.
    #[serde(default)]
    pub tract_mean_household_income: Option<Vec<f64>>,
    #[serde(default)]
    pub retiree_income: Option<RetireeIncome>,
    /// Target mean income across income recipients. `None` disables the stage.
    #[serde(default)]
    pub target_mean_income: Option<f64>,
    #[serde(default)]
    pub groups: GroupScheme,
}

fn check_shares(table: &str, row: &[f64]) -> Result<()> {
    if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::config(table, "negative or non-finite share"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SHARE_TOL {
        return Err(Error::config(table, format!("shares sum to {sum}, expected 1")));
    }
    Ok(())
}

impl PopulationConfig {
    pub fn n_tracts(&self) -> usize {
        self.tract_population.len()
    }

    pub fn n_occupations(&self) -> usize {
        self.remote_labor_index.len()
    }

    pub fn total_population(&self) -> usize {
        self.tract_population.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let nt = self.n_tracts();
        if nt == 0 {
            return Err(Error::config("tract_population", "no tracts"));
        }
        let age_w: Vec<f64> = self.age_distribution.iter().map(|m| m.weight).collect();
        check_shares("age_distribution", &age_w)?;
        for m in &self.age_distribution {
            if m.band.lo >= m.band.hi || m.band.hi > 101 {
                return Err(Error::config("age_distribution", "empty or out-of-range age band"));
            }
        }
        if !self
            .age_distribution
            .iter()
            .any(|m| m.weight > 0.0 && m.band.hi > self.adult_age)
        {
            return Err(Error::config("age_distribution", "no mass on adult ages"));
        }
        check_shares("household_size_distribution", &self.household_size_distribution)?;

        if self.employment_rates.len() != nt {
            return Err(Error::config("employment_rates", "one row per tract required"));
        }
        for row in &self.employment_rates {
            if row.len() != self.employment_bands.len() {
                return Err(Error::config("employment_rates", "one rate per employment band required"));
            }
            if row.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
                return Err(Error::config("employment_rates", "rate outside [0, 1]"));
            }
        }
        if self.industry_shares.len() != nt {
            return Err(Error::config("industry_shares", "one row per tract required"));
        }
        for row in &self.industry_shares {
            if row.len() != self.n_industries {
                return Err(Error::config("industry_shares", "row length must equal n_industries"));
            }
            check_shares("industry_shares", row)?;
        }
        let no = self.n_occupations();
        if self.occupation_by_industry.len() != self.n_industries {
            return Err(Error::config("occupation_by_industry", "one row per industry required"));
        }
        for (k, row) in self.occupation_by_industry.iter().enumerate() {
            if row.len() != no {
                return Err(Error::config("occupation_by_industry", "row length must equal occupation count"));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::config(
                    "occupation_by_industry",
                    format!("industry {k} has all-zero occupation shares"),
                ));
            }
            check_shares("occupation_by_industry", row)?;
        }
        if self.occupation_by_tract.len() != nt
            || self.occupation_by_tract.iter().any(|r| r.len() != no)
        {
            return Err(Error::config("occupation_by_tract", "must be tract × occupation"));
        }
        if self
            .occupation_by_tract
            .iter()
            .flatten()
            .any(|&v| !(v >= 0.0))
        {
            return Err(Error::config("occupation_by_tract", "negative weight"));
        }
        if let Some(bad) = self
            .remote_labor_index
            .iter()
            .position(|&r| !(0.0..=1.0).contains(&r))
        {
            return Err(Error::config(
                "remote_labor_index",
                format!("occupation {bad} outside [0, 1]"),
            ));
        }
        for q in &self.income_quantiles {
            if q.industry >= self.n_industries || q.occupation >= no {
                return Err(Error::config("income_quantiles", "industry or occupation out of range"));
            }
            if q.quantiles.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(
                    "income_quantiles",
                    format!(
                        "quantiles for ({}, {}) not strictly increasing",
                        q.industry, q.occupation
                    ),
                ));
            }
        }
        if self.earnings_bands.len() != self.earnings_scalars.len() {
            return Err(Error::config("earnings_scalars", "one scalar per earnings band required"));
        }
        if let Some(t) = &self.tract_mean_household_income {
            if t.len() != nt || t.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::config("tract_mean_household_income", "one positive value per tract required"));
            }
        }
        if let Some(m) = self.target_mean_income {
            if !(m > 0.0) {
                return Err(Error::config("target_mean_income", "must be positive"));
            }
        }
        Ok(())
    }
}
