//! Fear of infection, the intervention timeline, contact filters, and the
//! daily orchestration of the epidemic and economic modules.
//!
//! Across module boundaries every read refers to the previous day: the
//! economy sees yesterday's reported deaths and the epidemic sees yesterday's
//! employment status. Values crossing the boundary are wrapped in [`Lagged`],
//! which records the day that produced them and can flag same-day reads.

use std::cell::RefCell;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::contacts::{ContactTemplates, DayFilters};
use crate::econ::{ConsumptionTable, EconDay, EconInputs, EconParams, Economy, LaborMarket};
use crate::econio::{TwoRegionIO, LOCAL, REST};
use crate::epidemic::{
    seed_epidemic, transmission_step, Compartment, EpiModel, EpiParams, EpiState, Infection,
    NetworkView, SeedingConfig,
};
use crate::error::{Error, Result};
use crate::industry::IndustryInfo;
use crate::population::{GroupScheme, Population};
use crate::shocks::{build_supply_shocks, ClosureSet, DemandShocks, RestDeaths, SupplyShocks, Timeline};

/// Λ = 1 − exp(−φ D).
pub fn behavior_change(phi: f64, deaths: f64) -> f64 {
    -(-phi * deaths).exp_m1()
}

/// Λ^ECO per industry: zero outside customer-facing industries.
pub fn consumption_reduction(phi_eco: f64, deaths: f64, customer_facing: &[bool]) -> Vec<f64> {
    let lambda = behavior_change(phi_eco, deaths);
    customer_facing
        .iter()
        .map(|&cf| if cf { lambda } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FearParams {
    pub phi_epi: f64,
    /// Ratio φ^ECO / φ^EPI.
    pub phi_tilde: f64,
}

impl Default for FearParams {
    fn default() -> Self {
        Self {
            phi_epi: 0.0025,
            phi_tilde: 1.0,
        }
    }
}

impl FearParams {
    pub fn phi_eco(&self) -> f64 {
        self.phi_epi * self.phi_tilde
    }

    /// Both channels scaled by a scenario multiplier.
    pub fn scaled(&self, multiplier: f64) -> (f64, f64) {
        (self.phi_epi * multiplier, self.phi_eco() * multiplier)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi_epi >= 0.0) || !(self.phi_tilde >= 0.0) {
            return Err(Error::config("fear", "fear parameters must be non-negative"));
        }
        Ok(())
    }
}

/// One counterfactual scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "one")]
    pub fear_multiplier: f64,
    #[serde(default = "non_essential")]
    pub closure_set: ClosureSet,
    #[serde(default = "baseline_start")]
    pub measures_start: NaiveDate,
    #[serde(default = "yes")]
    pub schools_closed: bool,
    #[serde(default)]
    pub wfh_mandated: bool,
    /// Keep the epidemic-side closure of community venues after the economic
    /// closure ends.
    #[serde(default = "yes")]
    pub epidemic_closures_persist: bool,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn non_essential() -> ClosureSet {
    ClosureSet::NonEssential
}
fn baseline_start() -> NaiveDate {
    let (y, m, d) = Timeline::BASELINE;
    crate::shocks::date(y, m, d)
}
fn default_seeds() -> Vec<u64> {
    vec![1]
}

impl Default for ScenarioConfig {
    /// The empirical scenario.
    fn default() -> Self {
        Self {
            fear_multiplier: 1.0,
            closure_set: ClosureSet::NonEssential,
            measures_start: baseline_start(),
            schools_closed: true,
            wfh_mandated: false,
            epidemic_closures_persist: true,
            seeds: default_seeds(),
        }
    }
}

impl ScenarioConfig {
    pub fn timeline(&self) -> Timeline {
        Timeline::with_measures_start(self.measures_start)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fear_multiplier >= 0.0) {
            return Err(Error::config("scenario.fear_multiplier", "must be non-negative"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("scenario.seeds", "at least one seed required"));
        }
        self.timeline().validate()
    }
}

/// The parameters a calibration varies. Kept apart from [`World`] so one
/// built world serves every draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub epi: EpiParams,
    pub fear: FearParams,
    pub econ: EconParams,
}

/// Everything that stays fixed across scenarios and seeds.
#[derive(Debug, Clone)]
pub struct World {
    pub pop: Population,
    pub n_tracts: usize,
    pub groups: GroupScheme,
    pub templates: ContactTemplates,
    pub industries: Vec<IndustryInfo>,
    pub io: TwoRegionIO,
    pub consumption: ConsumptionTable,
    pub epi: EpiParams,
    /// None runs without an epidemic.
    pub seeding: Option<SeedingConfig>,
    pub econ: EconParams,
    pub fear: FearParams,
    pub demand_shocks: DemandShocks,
    pub rest_deaths: RestDeaths,
    /// Local deaths enter fear as D × reference / N, so fear parameters do not
    /// depend on the size of the synthetic population.
    pub fear_reference_population: f64,
    pub n_income_bands: usize,
}

impl World {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            epi: self.epi.clone(),
            fear: self.fear,
            econ: self.econ.clone(),
        }
    }

    pub fn customer_facing(&self) -> Vec<bool> {
        self.industries.iter().map(|i| i.customer_facing).collect()
    }

    pub fn fear_scale(&self) -> f64 {
        if self.pop.is_empty() {
            1.0
        } else {
            self.fear_reference_population / self.pop.len() as f64
        }
    }
}

/// A value produced on `day` by one module and read by another.
#[derive(Debug, Clone)]
pub struct Lagged<T> {
    value: T,
    produced: i32,
}

/// Records same-day reads of lagged values when enabled.
#[derive(Debug, Default)]
pub struct TaintCheck {
    pub enabled: bool,
    violations: RefCell<Vec<String>>,
}

impl TaintCheck {
    pub fn violations(&self) -> Vec<String> {
        self.violations.borrow().clone()
    }
}

impl<T> Lagged<T> {
    pub fn new(value: T, produced: i32) -> Self {
        Self { value, produced }
    }

    pub fn produced(&self) -> i32 {
        self.produced
    }

    /// Reads the value on day `at`. Values produced on `at` or later are
    /// recorded as violations when taint checking is enabled.
    pub fn read(&self, at: i32, what: &str, taint: &TaintCheck) -> &T {
        if taint.enabled && self.produced >= at {
            taint
                .violations
                .borrow_mut()
                .push(format!("day {at}: {what} produced on day {}", self.produced));
        }
        &self.value
    }

    pub fn set(&mut self, value: T, produced: i32) {
        self.value = value;
        self.produced = produced;
    }
}

/// Order of the epidemic stages within a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StageOrder {
    /// Filters built from the lagged inputs, then transmission.
    #[default]
    FilterThenTransmit,
    /// Transmission runs on the filters built the day before; only for
    /// regression tests showing that the order matters.
    TransmitThenFilter,
}

/// Epidemic-side filter inputs for one day.
#[derive(Debug, Clone, PartialEq)]
struct FilterInputs {
    lambda_epi: f64,
    closure: Vec<f64>,
    schools_closed: bool,
    wfh_mandate: bool,
    employed: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpiDayRecord {
    pub day: u32,
    pub date: NaiveDate,
    pub s: usize,
    pub l: usize,
    pub p_s: usize,
    pub i_s: usize,
    pub i_a: usize,
    pub r: usize,
    pub d: usize,
    pub new_infections: usize,
    pub reported_deaths: u32,
    pub cumulative_reported_deaths: u64,
    /// Reported deaths of the previous day, as seen by fear.
    pub fear_deaths: f64,
    pub rest_deaths: f64,
    pub lambda_epi: f64,
    pub lambda_eco: f64,
    pub lambda_rest: f64,
}

impl EpiDayRecord {
    pub fn counts(&self) -> [usize; 7] {
        [self.s, self.l, self.p_s, self.i_s, self.i_a, self.r, self.d]
    }
}

/// Per-day employed head-counts for one partition of the initial workers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupEmployment {
    pub kind: &'static str,
    /// Group of each person, if initially employed.
    pub group_of: Vec<Option<usize>>,
    pub initial: Vec<usize>,
    /// day × group
    pub daily: Vec<Vec<usize>>,
}

impl GroupEmployment {
    fn new(kind: &'static str, group_of: Vec<Option<usize>>, n_groups: usize) -> Self {
        let mut initial = vec![0; n_groups];
        for g in group_of.iter().flatten() {
            initial[*g] += 1;
        }
        Self {
            kind,
            group_of,
            initial,
            daily: Vec::new(),
        }
    }

    fn record(&mut self, status: &[bool]) {
        let mut row = vec![0; self.initial.len()];
        for (i, g) in self.group_of.iter().enumerate() {
            if let (Some(g), true) = (g, status[i]) {
                row[*g] += 1;
            }
        }
        self.daily.push(row);
    }
}

/// Wall-clock time spent in each part of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    /// Epidemic seeding and model construction.
    pub setup: Duration,
    pub economy: Duration,
    pub filters: Duration,
    pub epidemic: Duration,
    pub record: Duration,
}

impl StageTimes {
    pub fn named(&self) -> [(&'static str, Duration); 5] {
        [
            ("setup", self.setup),
            ("economy", self.economy),
            ("filters", self.filters),
            ("epidemic", self.epidemic),
            ("record", self.record),
        ]
    }
}

/// Everything one run emits.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seed: u64,
    pub timeline: Timeline,
    pub n_persons: usize,
    pub customer_facing: Vec<bool>,
    pub epi: Vec<EpiDayRecord>,
    pub econ: Vec<EconDay>,
    pub econ_baseline: EconDay,
    pub consumption_baseline_by_band: Vec<f64>,
    pub infections: Vec<Infection>,
    pub employment_groups: Vec<GroupEmployment>,
    pub burn_in_days: i32,
    pub taint_violations: Vec<String>,
    pub stage_times: StageTimes,
}

/// Equal-count bands of `values`; returns the band of each value.
pub fn quantile_bands(values: &[f64], n: usize) -> Vec<usize> {
    let edges = crate::econ::quantile_edges(values, n);
    values.iter().map(|&v| edges.partition_point(|&e| e <= v)).collect()
}

pub struct Simulation<'w> {
    world: &'w World,
    scenario: ScenarioConfig,
    seed: u64,
    timeline: Timeline,
    supply: SupplyShocks,
    epi_closure: Vec<f64>,
    model: EpiModel,
    state: EpiState,
    econ: Economy,
    market: LaborMarket,
    can_wfh: Vec<bool>,
    phi: (f64, f64),
    order: StageOrder,
    pub taint: TaintCheck,
    deaths: Lagged<f64>,
    employment: Lagged<Vec<bool>>,
    prev_filter: Option<FilterInputs>,
    day: u32,
    cumulative_reported: u64,
    out: RunOutput,
}

impl<'w> Simulation<'w> {
    pub fn new(world: &'w World, scenario: &ScenarioConfig, seed: u64) -> Result<Self> {
        Self::with_params(world, &world.params(), scenario, seed)
    }

    /// Like [`Simulation::new`] with the calibrated parameters replaced.
    pub fn with_params(
        world: &'w World,
        params: &ModelParams,
        scenario: &ScenarioConfig,
        seed: u64,
    ) -> Result<Self> {
        let started = Instant::now();
        scenario.validate()?;
        params.fear.validate()?;
        let timeline = scenario.timeline();
        let supply = build_supply_shocks(&world.industries, &timeline, scenario.closure_set)?;
        let model = EpiModel::new(params.epi.clone(), &world.pop)?;
        let (state, infections, burn_in) = match &world.seeding {
            Some(cfg) => {
                let s = seed_epidemic(&world.templates, &model, cfg, seed)?;
                (s.state, s.infections, s.burn_in_days)
            }
            None => (EpiState::new(world.pop.len()), Vec::new(), 0),
        };
        let customer_facing = world.customer_facing();
        let econ = Economy::new(
            world.io.clone(),
            &world.pop,
            &world.groups,
            &world.consumption,
            customer_facing.clone(),
            params.econ.clone(),
            world.n_income_bands,
        )?;
        let market = LaborMarket::new(&world.pop, world.industries.len());
        let initial_deaths = state.reported_deaths(-1) as f64 * world.fear_scale();

        // initial workers by occupation, tract and own income quintile
        let persons = &world.pop.persons;
        let worker_incomes: Vec<f64> = persons.iter().filter(|p| p.employed).map(|p| p.income).collect();
        let edges = crate::econ::quantile_edges(&worker_incomes, world.n_income_bands.max(1));
        let n_occ = persons.iter().filter_map(|p| p.occupation).max().map_or(0, |m| m + 1);
        let groups = vec![
            GroupEmployment::new(
                "occupation",
                persons.iter().map(|p| p.occupation.filter(|_| p.employed)).collect(),
                n_occ,
            ),
            GroupEmployment::new(
                "tract",
                persons.iter().map(|p| p.employed.then_some(p.tract_id as usize)).collect(),
                world.n_tracts,
            ),
            GroupEmployment::new(
                "worker_income_band",
                persons
                    .iter()
                    .map(|p| p.employed.then(|| edges.partition_point(|&e| e <= p.income)))
                    .collect(),
                world.n_income_bands.max(1),
            ),
        ];

        let econ_baseline = baseline_day(&econ);
        let out = RunOutput {
            seed,
            timeline: timeline.clone(),
            n_persons: world.pop.len(),
            customer_facing,
            epi: Vec::with_capacity(timeline.n_days as usize),
            econ: Vec::with_capacity(timeline.n_days as usize),
            econ_baseline,
            consumption_baseline_by_band: econ.baseline_by_band.clone(),
            infections,
            employment_groups: groups,
            burn_in_days: burn_in,
            taint_violations: Vec::new(),
            stage_times: StageTimes { setup: started.elapsed(), ..StageTimes::default() },
        };
        let epi_closure = supply.closed[LOCAL].clone();
        Ok(Self {
            world,
            scenario: scenario.clone(),
            seed,
            supply,
            epi_closure,
            model,
            employment: Lagged::new(market.status.clone(), -1),
            deaths: Lagged::new(initial_deaths, -1),
            state,
            econ,
            market,
            can_wfh: persons.iter().map(|p| p.can_wfh).collect(),
            phi: params.fear.scaled(scenario.fear_multiplier),
            order: StageOrder::default(),
            taint: TaintCheck::default(),
            prev_filter: None,
            day: 0,
            cumulative_reported: 0,
            out,
            timeline,
        })
    }

    pub fn with_stage_order(mut self, order: StageOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_taint_check(mut self) -> Self {
        self.taint.enabled = true;
        self
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn epi_state(&self) -> &EpiState {
        &self.state
    }

    pub fn economy(&self) -> &Economy {
        &self.econ
    }

    pub fn market(&self) -> &LaborMarket {
        &self.market
    }

    fn epi_side_closed(&self, day: u32) -> bool {
        self.timeline.measures_active(day)
            && (self.timeline.closed(day) || self.scenario.epidemic_closures_persist)
    }

    /// Advances one day.
    pub fn step(&mut self) {
        let t = self.day;
        let ti = t as i32;
        let (phi_epi, phi_eco) = self.phi;
        let mut clock = Instant::now();
        let mut lap = || {
            let now = Instant::now();
            let d = now - clock;
            clock = now;
            d
        };

        // lagged cross-module inputs
        let d_prev = *self.deaths.read(ti, "reported deaths", &self.taint);
        let d_rest = self.world.rest_deaths.at(t as i64 - 1);
        let lambda_epi = behavior_change(phi_epi, d_prev);
        let lambda_eco = behavior_change(phi_eco, d_prev);
        let lambda_rest = behavior_change(phi_eco, d_rest);

        // 1-2: economy and hiring/firing
        let (gov, other) = self.world.demand_shocks.at(&self.timeline, t);
        let inputs = EconInputs {
            lambda_local: lambda_eco,
            lambda_rest,
            supply: [self.supply.at(LOCAL, t), self.supply.at(REST, t)],
            gov,
            other,
        };
        let econ_day = self.econ.step(&inputs, &mut self.market, self.seed, ti);
        self.out.stage_times.economy += lap();

        // 3: filters from yesterday's employment and deaths
        let closed = self.epi_side_closed(t);
        let today = FilterInputs {
            lambda_epi,
            closure: if closed { self.epi_closure.clone() } else { vec![0.0; self.epi_closure.len()] },
            schools_closed: self.scenario.schools_closed && self.timeline.measures_active(t),
            wfh_mandate: self.scenario.wfh_mandated && closed,
            employed: self.employment.read(ti, "employment status", &self.taint).clone(),
        };
        let used = match self.order {
            StageOrder::FilterThenTransmit => today.clone(),
            StageOrder::TransmitThenFilter => self.prev_filter.clone().unwrap_or_else(|| today.clone()),
        };

        self.out.stage_times.filters += lap();

        // 4: progression and transmission
        self.state.progression_step(ti);
        let cf = &self.out.customer_facing;
        let filters = DayFilters {
            seed: self.seed,
            day: t,
            lambda_epi: used.lambda_epi,
            closure: &used.closure,
            customer_facing: cf,
            schools_closed: used.schools_closed,
            wfh_mandate: used.wfh_mandate,
            employed: &used.employed,
            can_wfh: &self.can_wfh,
        };
        let weekday = self.timeline.weekday(t);
        let tday = self.world.templates.template_for_day(self.seed, t, weekday);
        let view = NetworkView::Template {
            day: &self.world.templates.days[tday],
            filters: Some(&filters),
        };
        let new = transmission_step(view, &self.model, &mut self.state, ti, self.seed);
        self.prev_filter = Some(today);
        self.out.stage_times.epidemic += lap();

        // 5: record today's outputs for tomorrow
        let reported = self.state.reported_deaths(ti);
        self.cumulative_reported += reported as u64;
        let c = self.state.counts();
        self.out.epi.push(EpiDayRecord {
            day: t,
            date: self.timeline.date_of(t),
            s: c[0],
            l: c[1],
            p_s: c[2],
            i_s: c[3],
            i_a: c[4],
            r: c[5],
            d: c[6],
            new_infections: new.len(),
            reported_deaths: reported,
            cumulative_reported_deaths: self.cumulative_reported,
            fear_deaths: d_prev,
            rest_deaths: d_rest,
            lambda_epi,
            lambda_eco,
            lambda_rest,
        });
        self.out.infections.extend(new);
        self.out.econ.push(econ_day);
        for g in &mut self.out.employment_groups {
            g.record(&self.market.status);
        }
        self.deaths.set(reported as f64 * self.world.fear_scale(), ti);
        self.employment.set(self.market.status.clone(), ti);
        self.day += 1;
        self.out.stage_times.record += lap();
    }

    pub fn run(mut self) -> RunOutput {
        while self.day < self.timeline.n_days {
            self.step();
        }
        self.finish()
    }

    pub fn finish(mut self) -> RunOutput {
        self.out.taint_violations = self.taint.violations();
        self.out
    }
}

/// The pre-pandemic state of the economy in the per-day record layout.
fn baseline_day(econ: &Economy) -> EconDay {
    let io = &econ.io;
    let n = econ.n();
    let mut day = EconDay::default();
    for o in [LOCAL, REST] {
        let r = &mut day.region[o];
        r.l_p = econ.l_p0[o].clone();
        r.l_h = econ.l_h0[o].clone();
        r.x = econ.x0[o].clone();
        r.d = econ.x0[o].clone();
        r.cap = econ.x0[o].clone();
        r.va = io.va[o].clone();
        for k in 0..n {
            let z: f64 = [LOCAL, REST]
                .iter()
                .map(|&d| io.z[o][d][k].iter().sum::<f64>())
                .sum();
            let comp = |i: usize| io.f[o][LOCAL][k][i] + io.f[o][REST][k][i];
            r.z_sales.push(z);
            r.c.push(comp(crate::econio::C));
            r.g.push(comp(crate::econio::G));
            r.f.push(comp(crate::econio::OTHER));
            r.c_demand.push(comp(crate::econio::C));
        }
    }
    day.consumption_by_band = econ.baseline_by_band.clone();
    day
}

/// Runs one scenario for one seed.
pub fn run_with(
    world: &World,
    params: &ModelParams,
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<RunOutput> {
    Ok(Simulation::with_params(world, params, scenario, seed)?.run())
}

pub fn run(world: &World, scenario: &ScenarioConfig, seed: u64) -> Result<RunOutput> {
    Ok(Simulation::new(world, scenario, seed)?.run())
}

impl RunOutput {
    /// Local unemployment rate per day, relative to initial employment.
    pub fn unemployment_rate(&self) -> Vec<f64> {
        let l0: f64 = self.econ_baseline.region[LOCAL]
            .l_p
            .iter()
            .chain(&self.econ_baseline.region[LOCAL].l_h)
            .sum();
        self.econ
            .iter()
            .map(|d| {
                let l: f64 = d.region[LOCAL].l_p.iter().chain(&d.region[LOCAL].l_h).sum();
                if l0 > 0.0 { (l0 - l) / l0 } else { 0.0 }
            })
            .collect()
    }

    pub fn mean_unemployment(&self) -> f64 {
        let u = self.unemployment_rate();
        if u.is_empty() { 0.0 } else { u.iter().sum::<f64>() / u.len() as f64 }
    }

    pub fn cumulative_deaths(&self) -> u64 {
        self.epi.last().map_or(0, |r| r.d as u64)
    }

    pub fn cumulative_reported_deaths(&self) -> u64 {
        self.epi.last().map_or(0, |r| r.cumulative_reported_deaths)
    }

    pub fn final_compartment_total(&self) -> usize {
        self.epi.last().map_or(self.n_persons, |r| r.counts().iter().sum())
    }

    pub fn group(&self, kind: &str) -> Option<&GroupEmployment> {
        self.employment_groups.iter().find(|g| g.kind == kind)
    }
}

/// Compartments in record order, for CSV headers.
pub const COMPARTMENT_COLUMNS: [Compartment; 7] = Compartment::ALL;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn behavior_change_examples() {
        assert_eq!(behavior_change(0.3, 0.0), 0.0);
        assert!((behavior_change(0.01, 100.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn tenfold_fear_from_baseline() {
        let phi = -(1.0f64 - 0.14).ln();
        let high = behavior_change(10.0 * phi, 1.0);
        assert!((high - 0.7787).abs() < 1e-4);
        assert!((high - 0.77).abs() < 0.01);
    }

    #[test]
    fn consumption_reduction_only_for_customer_facing() {
        let r = consumption_reduction(0.1, 5.0, &[true, false]);
        assert!(r[0] > 0.0);
        assert_eq!(r[1], 0.0);
        assert_eq!(consumption_reduction(0.1, 0.0, &[true]), vec![0.0]);
    }

    #[test]
    fn lagged_flags_same_day_reads() {
        let taint = TaintCheck {
            enabled: true,
            ..Default::default()
        };
        let v = Lagged::new(3.0, 4);
        assert_eq!(*v.read(5, "x", &taint), 3.0);
        assert!(taint.violations().is_empty());
        v.read(4, "x", &taint);
        assert_eq!(taint.violations().len(), 1);
    }
}
