//! Exogenous series: closure supply shocks, rest-of-country deaths, and the
//! government and other final demand shocks.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::econio::{LOCAL, REST};
use crate::error::{Error, Result};
use crate::industry::IndustryInfo;

/// Which industries are closed while measures are in place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ClosureSet {
    NonEssential,
    /// Only customer-facing industries, with the shock scaled by the factor.
    CustomerFacing(f64),
    AllOpen,
}

impl ClosureSet {
    /// The scenario grid in decreasing order of strictness.
    pub const GRID: [ClosureSet; 6] = [
        ClosureSet::NonEssential,
        ClosureSet::CustomerFacing(1.0),
        ClosureSet::CustomerFacing(0.75),
        ClosureSet::CustomerFacing(0.5),
        ClosureSet::CustomerFacing(0.25),
        ClosureSet::AllOpen,
    ];
}

impl fmt::Display for ClosureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosureSet::NonEssential => write!(f, "non-essential"),
            ClosureSet::CustomerFacing(s) => write!(f, "customer-facing-{}", (s * 100.0).round()),
            ClosureSet::AllOpen => write!(f, "all-open"),
        }
    }
}

impl FromStr for ClosureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-essential" => Ok(ClosureSet::NonEssential),
            "all-open" | "none" => Ok(ClosureSet::AllOpen),
            "customer-facing" => Ok(ClosureSet::CustomerFacing(1.0)),
            _ => {
                let pct = s
                    .strip_prefix("customer-facing-")
                    .and_then(|p| p.parse::<f64>().ok())
                    .filter(|p| (0.0..=100.0).contains(p))
                    .ok_or_else(|| Error::config("closure_set", format!("unknown closure set '{s}'")))?;
                Ok(ClosureSet::CustomerFacing(pct / 100.0))
            }
        }
    }
}

impl TryFrom<String> for ClosureSet {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ClosureSet> for String {
    fn from(c: ClosureSet) -> Self {
        c.to_string()
    }
}

/// When measures are in force, as day indices from the simulation start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub start: NaiveDate,
    pub measures_start: NaiveDate,
    pub closure_relax: NaiveDate,
    pub n_days: u32,
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

impl Default for Timeline {
    fn default() -> Self {
        Self::with_measures_start(date(2020, 3, 16))
    }
}

impl Timeline {
    pub const EARLY: (i32, u32, u32) = (2020, 2, 17);
    pub const BASELINE: (i32, u32, u32) = (2020, 3, 16);
    pub const LATE: (i32, u32, u32) = (2020, 3, 30);

    pub fn with_measures_start(measures_start: NaiveDate) -> Self {
        Self {
            start: date(2020, 2, 12),
            measures_start,
            closure_relax: date(2020, 5, 15),
            n_days: 140,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start <= self.measures_start && self.measures_start <= self.closure_relax) {
            return Err(Error::config("timeline", "dates must be ordered start <= measures_start <= closure_relax"));
        }
        if self.n_days == 0 {
            return Err(Error::config("timeline.n_days", "must be positive"));
        }
        Ok(())
    }

    pub fn day_of(&self, d: NaiveDate) -> i64 {
        (d - self.start).num_days()
    }

    pub fn date_of(&self, day: u32) -> NaiveDate {
        self.start + Days::new(day as u64)
    }

    pub fn end(&self) -> NaiveDate {
        self.date_of(self.n_days - 1)
    }

    /// Weekday of a simulated day, 0 = Monday.
    pub fn weekday(&self, day: u32) -> u8 {
        use chrono::Datelike;
        self.date_of(day).weekday().num_days_from_monday() as u8
    }

    pub fn measures_day(&self) -> i64 {
        self.day_of(self.measures_start)
    }

    pub fn relax_day(&self) -> i64 {
        self.day_of(self.closure_relax)
    }

    /// Closures are in force on [measures_start, closure_relax).
    pub fn closed(&self, day: u32) -> bool {
        let d = day as i64;
        d >= self.measures_day() && d < self.relax_day()
    }

    /// Measures have started (demand shocks, school closure).
    pub fn measures_active(&self, day: u32) -> bool {
        day as i64 >= self.measures_day()
    }
}

/// Per-industry shock applied while closed, for each region.
pub fn closure_shocks(industries: &[IndustryInfo], set: ClosureSet) -> [Vec<f64>; 2] {
    let local_rest = |region: usize| -> Vec<f64> {
        industries
            .iter()
            .map(|ind| {
                let ess = if region == LOCAL { ind.essential_local } else { ind.essential_rest };
                match set {
                    ClosureSet::NonEssential => 1.0 - ess,
                    ClosureSet::CustomerFacing(f) if ind.customer_facing => f * (1.0 - ess),
                    _ => 0.0,
                }
            })
            .collect()
    };
    [local_rest(LOCAL), local_rest(REST)]
}

/// Piecewise-constant supply shock schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyShocks {
    pub timeline: Timeline,
    pub closed: [Vec<f64>; 2],
    open: Vec<f64>,
}

pub fn build_supply_shocks(
    industries: &[IndustryInfo],
    timeline: &Timeline,
    set: ClosureSet,
) -> Result<SupplyShocks> {
    timeline.validate()?;
    for ind in industries {
        for v in [ind.essential_local, ind.essential_rest] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(
                    "essential_scores",
                    format!("industry {}: score {v} outside [0, 1]", ind.code),
                ));
            }
        }
    }
    if let ClosureSet::CustomerFacing(f) = set {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::config("closure_set", "scale must be in [0, 1]"));
        }
    }
    Ok(SupplyShocks {
        timeline: timeline.clone(),
        closed: closure_shocks(industries, set),
        open: vec![0.0; industries.len()],
    })
}

impl SupplyShocks {
    pub fn at(&self, region: usize, day: u32) -> &[f64] {
        if self.timeline.closed(day) {
            &self.closed[region]
        } else {
            &self.open
        }
    }
}

/// Government (𝒢) and other final demand (𝒮) shocks, active from the start of
/// measures to the end of the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandShocks {
    pub gov: f64,
    pub other: f64,
}

impl Default for DemandShocks {
    fn default() -> Self {
        Self { gov: -0.05, other: 0.30 }
    }
}

impl DemandShocks {
    pub fn at(&self, timeline: &Timeline, day: u32) -> (f64, f64) {
        if timeline.measures_active(day) {
            (self.gov, self.other)
        } else {
            (0.0, 0.0)
        }
    }
}

/// Daily deaths in the rest of the country, indexed by simulated day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestDeaths {
    pub daily: Vec<f64>,
}

impl RestDeaths {
    pub fn zeros(n_days: u32) -> Self {
        Self { daily: vec![0.0; n_days as usize] }
    }

    /// Deaths on `day`; days before the start read as zero.
    pub fn at(&self, day: i64) -> f64 {
        if day < 0 {
            0.0
        } else {
            self.daily.get(day as usize).copied().unwrap_or(0.0)
        }
    }

    /// Reads `date,deaths` rows. Every day of the timeline must be present.
    pub fn from_csv<R: Read>(input: R, timeline: &Timeline) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            date: NaiveDate,
            deaths: f64,
        }
        let mut by_date = BTreeMap::new();
        for row in csv::Reader::from_reader(input).deserialize() {
            let row: Row = row?;
            if !(row.deaths >= 0.0) {
                return Err(Error::config("rest_deaths", format!("{}: negative deaths", row.date)));
            }
            by_date.insert(row.date, row.deaths);
        }
        let mut missing = Vec::new();
        let mut daily = Vec::with_capacity(timeline.n_days as usize);
        for day in 0..timeline.n_days {
            let d = timeline.date_of(day);
            match by_date.get(&d) {
                Some(&v) => daily.push(v),
                None => missing.push(d.to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingDates(missing));
        }
        Ok(Self { daily })
    }

    pub fn write_csv<W: Write>(&self, timeline: &Timeline, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "deaths"])?;
        for (day, v) in self.daily.iter().enumerate() {
            w.write_record([timeline.date_of(day as u32).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Synthetic wave: cumulative deaths follow K / (1 + exp(−r (t − t0))) and
/// daily deaths are its one-day increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticWave {
    pub total: f64,
    pub rate: f64,
    pub midpoint: f64,
}

impl LogisticWave {
    pub fn cumulative(&self, t: f64) -> f64 {
        self.total / (1.0 + (-self.rate * (t - self.midpoint)).exp())
    }

    pub fn daily(&self, day: u32) -> f64 {
        let t = day as f64;
        self.cumulative(t) - self.cumulative(t - 1.0)
    }

    pub fn series(&self, n_days: u32) -> RestDeaths {
        RestDeaths {
            daily: (0..n_days).map(|d| self.daily(d)).collect(),
        }
    }
}

pub const SCHEDULE_CSV_HEADER: &str = "day,date,region,industry,s,gov,other";

/// Full day × region × industry dump of the shock schedule for auditing.
pub fn write_schedule_csv<W: Write>(supply: &SupplyShocks, demand: &DemandShocks, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCHEDULE_CSV_HEADER.split(','))?;
    let tl = &supply.timeline;
    for day in 0..tl.n_days {
        let (g, s) = demand.at(tl, day);
        for (r, name) in crate::econio::REGIONS.iter().enumerate() {
            for (k, v) in supply.at(r, day).iter().enumerate() {
                w.write_record([
                    day.to_string(),
                    tl.date_of(day).to_string(),
                    name.to_string(),
                    k.to_string(),
                    v.to_string(),
                    g.to_string(),
                    s.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::industry::{default_industries, ACCOMMODATION_FOOD, ARTS, RETAIL};

    #[test]
    fn table_scores_give_expected_shocks() {
        let ind = default_industries();
        let s = closure_shocks(&ind, ClosureSet::NonEssential);
        assert_eq!(s[LOCAL][ARTS], 1.0);
        assert!((s[LOCAL][ACCOMMODATION_FOOD] - 0.78).abs() < 1e-12);
        let half = closure_shocks(&ind, ClosureSet::CustomerFacing(0.5));
        assert!((half[LOCAL][RETAIL] - 0.175).abs() < 1e-12);
        assert!(closure_shocks(&ind, ClosureSet::AllOpen)[LOCAL].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn closure_set_round_trips_as_text() {
        for c in ClosureSet::GRID {
            assert_eq!(c.to_string().parse::<ClosureSet>().unwrap(), c);
        }
        assert!("half-open".parse::<ClosureSet>().unwrap_err().is_config());
    }

    #[test]
    fn timeline_days() {
        let t = Timeline::default();
        assert_eq!(t.measures_day(), 33);
        assert_eq!(t.relax_day(), 93);
        assert_eq!(t.end(), date(2020, 6, 30));
        assert_eq!(t.weekday(0), 2);
        assert_eq!(Timeline::with_measures_start(date(2020, 2, 17)).measures_day(), 5);
        assert_eq!(Timeline::with_measures_start(date(2020, 3, 30)).measures_day(), 47);
    }
}
