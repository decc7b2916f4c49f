//! Rejection ABC over the seven free parameters, plus posterior resampling.
//!
//! The acceptance filter is a pure function of summaries, and summaries are
//! computed only from rows that a run writes to CSV, so a summary table can be
//! rebuilt offline from the output directory.

use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{run_with, EpiDayRecord, ModelParams, ScenarioConfig, World};
use crate::error::{Error, Result};
use crate::output::{read_rows, write_rows, EconRow};
use crate::rng::{mix, stream, Stream};
use crate::shocks::{date, Timeline};

/// The calibrated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub beta: f64,
    pub phi_epi: f64,
    pub phi_tilde: f64,
    pub phi_u: f64,
    pub delta_s: f64,
    pub gamma_h: f64,
    pub gamma_f: f64,
}

impl ParamSet {
    pub const NAMES: [&'static str; 7] =
        ["beta", "phi_epi", "phi_tilde", "phi_u", "delta_s", "gamma_h", "gamma_f"];

    pub fn of(p: &ModelParams) -> Self {
        Self {
            beta: p.epi.beta,
            phi_epi: p.fear.phi_epi,
            phi_tilde: p.fear.phi_tilde,
            phi_u: p.econ.phi_u,
            delta_s: p.econ.delta_s,
            gamma_h: p.econ.gamma_h,
            gamma_f: p.econ.gamma_f,
        }
    }

    pub fn apply(&self, base: &ModelParams) -> ModelParams {
        let mut p = base.clone();
        p.epi.beta = self.beta;
        p.fear.phi_epi = self.phi_epi;
        p.fear.phi_tilde = self.phi_tilde;
        p.econ.phi_u = self.phi_u;
        p.econ.delta_s = self.delta_s;
        p.econ.gamma_h = self.gamma_h;
        p.econ.gamma_f = self.gamma_f;
        p
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.beta, self.phi_epi, self.phi_tilde, self.phi_u, self.delta_s, self.gamma_h, self.gamma_f]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        let [beta, phi_epi, phi_tilde, phi_u, delta_s, gamma_h, gamma_f] = a;
        Self { beta, phi_epi, phi_tilde, phi_u, delta_s, gamma_h, gamma_f }
    }

    pub fn validate(&self, base: &ModelParams) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::config("prior.beta", "must be a non-negative number"));
        }
        let p = self.apply(base);
        p.fear.validate()?;
        p.econ.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.lo..self.hi)
    }
}

/// Independent uniform priors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorBox {
    pub beta: Range,
    pub phi_epi: Range,
    pub phi_tilde: Range,
    pub phi_u: Range,
    pub delta_s: Range,
    pub gamma_h: Range,
    pub gamma_f: Range,
}

impl PriorBox {
    pub fn ranges(&self) -> [Range; 7] {
        [self.beta, self.phi_epi, self.phi_tilde, self.phi_u, self.delta_s, self.gamma_h, self.gamma_f]
    }

    /// Checks ordering and that both corners of the box are admissible, which
    /// covers the interior since every parameter is range-checked independently.
    pub fn validate(&self, base: &ModelParams) -> Result<()> {
        let ranges = self.ranges();
        for (name, r) in ParamSet::NAMES.iter().zip(&ranges) {
            if !(r.lo < r.hi) || !r.lo.is_finite() || !r.hi.is_finite() {
                return Err(Error::config(format!("prior.{name}"), "lower bound must be below upper bound"));
            }
        }
        ParamSet::from_array(ranges.map(|r| r.lo)).validate(base)?;
        ParamSet::from_array(ranges.map(|r| r.hi)).validate(base)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> ParamSet {
        ParamSet::from_array(self.ranges().map(|r| r.sample(rng)))
    }
}

/// The six economic statistics, as percent change of the Q2 mean against the
/// pre-pandemic baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconStats {
    pub ny_employment: f64,
    pub ny_gdp: f64,
    pub us_gdp: f64,
    pub other_final_demand: f64,
    pub cf_consumption: f64,
    pub non_cf_consumption: f64,
}

impl EconStats {
    pub const NAMES: [&'static str; 6] = [
        "ny_employment",
        "ny_gdp",
        "us_gdp",
        "other_final_demand",
        "cf_consumption",
        "non_cf_consumption",
    ];

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.ny_employment,
            self.ny_gdp,
            self.us_gdp,
            self.other_final_demand,
            self.cf_consumption,
            self.non_cf_consumption,
        ]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        let [ny_employment, ny_gdp, us_gdp, other_final_demand, cf_consumption, non_cf_consumption] = a;
        Self { ny_employment, ny_gdp, us_gdp, other_final_demand, cf_consumption, non_cf_consumption }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Reported deaths per 1000 persons in each full week.
    pub weekly_deaths: Vec<f64>,
    pub econ: EconStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub weekly_deaths: Vec<f64>,
    pub econ: EconStats,
}

impl TargetSet {
    /// Observed first-wave drops. The death curve has to come from data.
    pub fn observed(weekly_deaths: Vec<f64>) -> Self {
        Self {
            weekly_deaths,
            econ: EconStats {
                ny_employment: -18.9,
                ny_gdp: -11.4,
                us_gdp: -10.2,
                other_final_demand: -18.8,
                cf_consumption: -20.7,
                non_cf_consumption: -3.4,
            },
        }
    }

    /// Targets taken from a reference run, for ground-truth recovery.
    pub fn from_summary(s: &Summary) -> Self {
        Self { weekly_deaths: s.weekly_deaths.clone(), econ: s.econ }
    }

    /// Element-wise mean of several reference runs. A single stochastic run
    /// can fizzle out, which makes a poor target.
    pub fn mean_of(summaries: &[Summary]) -> Result<Self> {
        let first = summaries.first().ok_or_else(|| Error::Domain("no reference summaries".into()))?;
        let weeks = first.weekly_deaths.len();
        if summaries.iter().any(|s| s.weekly_deaths.len() != weeks) {
            return Err(Error::Domain("reference runs differ in length".into()));
        }
        let n = summaries.len() as f64;
        let weekly_deaths =
            (0..weeks).map(|w| summaries.iter().map(|s| s.weekly_deaths[w]).sum::<f64>() / n).collect();
        let econ = std::array::from_fn(|i| summaries.iter().map(|s| s.econ.to_array()[i]).sum::<f64>() / n);
        Ok(Self { weekly_deaths, econ: EconStats::from_array(econ) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Weekly deaths per 1000, on the mean gap over all weeks.
    pub deaths: f64,
    /// Percentage points, per statistic.
    pub econ: EconStats,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            deaths: 0.012,
            econ: EconStats {
                ny_employment: 1.0,
                ny_gdp: 1.0,
                us_gdp: 2.0,
                other_final_demand: 4.0,
                cf_consumption: 2.0,
                non_cf_consumption: 2.0,
            },
        }
    }
}

impl Thresholds {
    pub fn to_array(&self) -> [f64; 7] {
        let e = self.econ.to_array();
        [self.deaths, e[0], e[1], e[2], e[3], e[4], e[5]]
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|&t| t > 0.0 && t.is_finite()) {
            Ok(())
        } else {
            Err(Error::config("thresholds", "every threshold must be positive"))
        }
    }
}

/// Distance of a summary from the targets, one entry per statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Errors {
    pub deaths: f64,
    pub econ: EconStats,
}

impl Errors {
    pub const NAMES: [&'static str; 7] = [
        "deaths",
        "ny_employment",
        "ny_gdp",
        "us_gdp",
        "other_final_demand",
        "cf_consumption",
        "non_cf_consumption",
    ];

    pub fn to_array(&self) -> [f64; 7] {
        let e = self.econ.to_array();
        [self.deaths, e[0], e[1], e[2], e[3], e[4], e[5]]
    }
}

/// Days of the second quarter of 2020 on the run clock.
pub fn q2_days(timeline: &Timeline) -> (usize, usize) {
    let a = timeline.day_of(date(2020, 4, 1)).max(0) as usize;
    let b = timeline.day_of(date(2020, 6, 30)).max(0) as usize;
    (a, b)
}

fn pct(value: f64, base: f64) -> f64 {
    100.0 * (value / base - 1.0)
}

/// Summary statistics from the emitted epidemic and economy rows.
pub fn summarize(
    epi: &[EpiDayRecord],
    econ: &[EconRow],
    customer_facing: &[bool],
    timeline: &Timeline,
) -> Result<Summary> {
    let n_persons = epi
        .first()
        .map(|r| r.counts().iter().sum::<usize>())
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Domain("summary needs epidemic rows".into()))?;
    let per_1000 = 1000.0 / n_persons as f64;
    let weekly_deaths = epi
        .chunks_exact(7)
        .map(|w| w.iter().map(|r| r.reported_deaths as f64).sum::<f64>() * per_1000)
        .collect();

    // [ny employment, ny va, us va, f, cf c, non-cf c] per day, with the
    // baseline in slot 0
    let (q_lo, q_hi) = q2_days(timeline);
    let mut base = [0.0; 6];
    let mut q2 = [0.0; 6];
    let mut q2_days_seen = vec![false; q_hi + 1];
    for row in econ {
        let local = row.region == crate::econio::REGIONS[crate::econio::LOCAL];
        let cf = *customer_facing
            .get(row.industry)
            .ok_or_else(|| Error::Domain(format!("industry {} outside customer-facing mask", row.industry)))?;
        let mut v = [0.0; 6];
        if local {
            v[0] = row.l_p + row.l_h;
            v[1] = row.va;
        }
        v[2] = row.va;
        v[3] = row.f;
        if cf {
            v[4] = row.c;
        } else {
            v[5] = row.c;
        }
        let acc = if row.day < 0 {
            &mut base
        } else if (q_lo..=q_hi).contains(&(row.day as usize)) {
            q2_days_seen[row.day as usize] = true;
            &mut q2
        } else {
            continue;
        };
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    let n_q2 = q2_days_seen[q_lo..].iter().filter(|&&s| s).count();
    if n_q2 == 0 || base.contains(&0.0) {
        return Err(Error::Domain("economy rows lack a baseline or Q2 days".into()));
    }
    let stats = std::array::from_fn(|i| pct(q2[i] / n_q2 as f64, base[i]));
    Ok(Summary { weekly_deaths, econ: EconStats::from_array(stats) })
}

pub fn errors(s: &Summary, t: &TargetSet) -> Result<Errors> {
    if s.weekly_deaths.len() != t.weekly_deaths.len() || t.weekly_deaths.is_empty() {
        return Err(Error::Domain(format!(
            "death curve has {} weeks, targets have {}",
            s.weekly_deaths.len(),
            t.weekly_deaths.len()
        )));
    }
    // same form as the economic errors: the time mean of the gap, then its size
    let deaths = (s
        .weekly_deaths
        .iter()
        .zip(&t.weekly_deaths)
        .map(|(a, b)| a - b)
        .sum::<f64>()
        / t.weekly_deaths.len() as f64)
        .abs();
    let (a, b) = (s.econ.to_array(), t.econ.to_array());
    Ok(Errors { deaths, econ: EconStats::from_array(std::array::from_fn(|i| (a[i] - b[i]).abs())) })
}

pub fn accept(e: &Errors, th: &Thresholds) -> bool {
    e.to_array().iter().zip(th.to_array()).all(|(&e, t)| e <= t)
}

/// Produces a summary for one parameter draw.
pub trait Runner: Sync {
    fn summarize(&self, params: &ParamSet, seed: u64) -> Result<Summary>;
}

impl<F> Runner for F
where
    F: Fn(&ParamSet, u64) -> Result<Summary> + Sync,
{
    fn summarize(&self, params: &ParamSet, seed: u64) -> Result<Summary> {
        self(params, seed)
    }
}

/// Runs the coupled model for one scenario over a fixed world.
pub struct ModelRunner<'w> {
    pub world: &'w World,
    pub scenario: ScenarioConfig,
}

impl Runner for ModelRunner<'_> {
    fn summarize(&self, params: &ParamSet, seed: u64) -> Result<Summary> {
        let p = params.apply(&self.world.params());
        let out = run_with(self.world, &p, &self.scenario, seed)?;
        summarize(&out.epi, &out.econ_rows(), &out.customer_facing, &out.timeline)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Executor {
    #[default]
    Sequential,
    /// Rayon's global pool.
    Parallel,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub index: usize,
    pub seed: u64,
    pub params: ParamSet,
    /// `Err` holds the message of a failed run, which counts as a rejection.
    pub summary: std::result::Result<Summary, String>,
}

/// The draw and run seed of sample `i`.
pub fn draw(prior: &PriorBox, seed: u64, i: usize) -> (ParamSet, u64) {
    let mut rng = stream(seed, Stream::Calibration, i as u64);
    (prior.sample(&mut rng), mix(&[seed, Stream::Calibration as u64, i as u64, 1]))
}

/// Runs every draw. Results come back in index order whatever the executor.
pub fn evaluate<R: Runner>(
    runner: &R,
    prior: &PriorBox,
    n_samples: usize,
    seed: u64,
    executor: Executor,
) -> Vec<Sample> {
    let one = |i: usize| {
        let (params, run_seed) = draw(prior, seed, i);
        let summary = runner.summarize(&params, run_seed).map_err(|e| e.to_string());
        if let Err(e) = &summary {
            log::debug!("sample {i} failed: {e}");
        }
        Sample { index: i, seed: run_seed, params, summary }
    };
    match executor {
        Executor::Sequential => (0..n_samples).map(one).collect(),
        Executor::Parallel => (0..n_samples).into_par_iter().map(one).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accepted {
    pub index: usize,
    pub seed: u64,
    pub params: ParamSet,
    pub summary: Summary,
    pub errors: Errors,
}

/// Smallest error reached per statistic, for reporting when nothing passes.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestMiss {
    pub best: [f64; 7],
    pub thresholds: [f64; 7],
    pub failed_runs: usize,
}

impl fmt::Display for NearestMiss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, name) in Errors::NAMES.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{name} best {:.4} vs {}", self.best[i], self.thresholds[i])?;
        }
        write!(f, "; {} failed runs", self.failed_runs)
    }
}

/// The rejection filter. Pure in the samples.
pub fn reject(samples: &[Sample], targets: &TargetSet, th: &Thresholds) -> Result<Vec<Accepted>> {
    th.validate()?;
    let mut best = [f64::INFINITY; 7];
    let mut failed = 0;
    let mut accepted = Vec::new();
    for s in samples {
        let Ok(summary) = &s.summary else {
            failed += 1;
            continue;
        };
        let e = errors(summary, targets)?;
        for (b, x) in best.iter_mut().zip(e.to_array()) {
            *b = b.min(x);
        }
        if accept(&e, th) {
            accepted.push(Accepted {
                index: s.index,
                seed: s.seed,
                params: s.params,
                summary: summary.clone(),
                errors: e,
            });
        }
    }
    if accepted.is_empty() {
        let miss = NearestMiss { best, thresholds: th.to_array(), failed_runs: failed };
        return Err(Error::NoAcceptance(miss.to_string()));
    }
    Ok(accepted)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbcConfig {
    pub prior: PriorBox,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub executor: Executor,
}

fn default_samples() -> usize {
    1000
}

pub fn abc_reject<R: Runner>(
    runner: &R,
    base: &ModelParams,
    cfg: &AbcConfig,
    targets: &TargetSet,
) -> Result<Vec<Accepted>> {
    cfg.prior.validate(base)?;
    cfg.thresholds.validate()?;
    let samples = evaluate(runner, &cfg.prior, cfg.n_samples, cfg.seed, cfg.executor);
    reject(&samples, targets, &cfg.thresholds)
}

/// Draws uniformly with replacement from the accepted combinations.
pub fn posterior_sample(accepted: &[ParamSet], n_draws: usize, seed: u64) -> Result<Vec<ParamSet>> {
    if accepted.is_empty() {
        return Err(Error::NoAcceptance("posterior needs at least one accepted combination".into()));
    }
    let mut rng = stream(seed, Stream::Posterior, 0);
    Ok((0..n_draws).map(|_| accepted[rng.random_range(0..accepted.len())]).collect())
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => values[n / 2],
        _ => 0.5 * (values[n / 2 - 1] + values[n / 2]),
    }
}

/// Flat CSV layout of one accepted combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedRow {
    pub index: usize,
    pub seed: u64,
    pub beta: f64,
    pub phi_epi: f64,
    pub phi_tilde: f64,
    pub phi_u: f64,
    pub delta_s: f64,
    pub gamma_h: f64,
    pub gamma_f: f64,
    pub err_deaths: f64,
    pub err_ny_employment: f64,
    pub err_ny_gdp: f64,
    pub err_us_gdp: f64,
    pub err_other_final_demand: f64,
    pub err_cf_consumption: f64,
    pub err_non_cf_consumption: f64,
    pub ny_employment: f64,
    pub ny_gdp: f64,
    pub us_gdp: f64,
    pub other_final_demand: f64,
    pub cf_consumption: f64,
    pub non_cf_consumption: f64,
    pub total_deaths_per_1000: f64,
}

impl AcceptedRow {
    pub fn params(&self) -> ParamSet {
        ParamSet {
            beta: self.beta,
            phi_epi: self.phi_epi,
            phi_tilde: self.phi_tilde,
            phi_u: self.phi_u,
            delta_s: self.delta_s,
            gamma_h: self.gamma_h,
            gamma_f: self.gamma_f,
        }
    }
}

impl From<&Accepted> for AcceptedRow {
    fn from(a: &Accepted) -> Self {
        let p = a.params;
        let (e, s) = (a.errors.econ, a.summary.econ);
        Self {
            index: a.index,
            seed: a.seed,
            beta: p.beta,
            phi_epi: p.phi_epi,
            phi_tilde: p.phi_tilde,
            phi_u: p.phi_u,
            delta_s: p.delta_s,
            gamma_h: p.gamma_h,
            gamma_f: p.gamma_f,
            err_deaths: a.errors.deaths,
            err_ny_employment: e.ny_employment,
            err_ny_gdp: e.ny_gdp,
            err_us_gdp: e.us_gdp,
            err_other_final_demand: e.other_final_demand,
            err_cf_consumption: e.cf_consumption,
            err_non_cf_consumption: e.non_cf_consumption,
            ny_employment: s.ny_employment,
            ny_gdp: s.ny_gdp,
            us_gdp: s.us_gdp,
            other_final_demand: s.other_final_demand,
            cf_consumption: s.cf_consumption,
            non_cf_consumption: s.non_cf_consumption,
            total_deaths_per_1000: a.summary.weekly_deaths.iter().sum(),
        }
    }
}

pub fn write_accepted<W: Write>(accepted: &[Accepted], out: W) -> Result<()> {
    let rows: Vec<AcceptedRow> = accepted.iter().map(AcceptedRow::from).collect();
    write_rows(&rows, out)
}

pub fn read_accepted<R: Read>(input: R) -> Result<Vec<AcceptedRow>> {
    read_rows(input)
}
