use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use epiecon::calibrate::{
    abc_reject, median, posterior_sample, write_accepted, AbcConfig, ModelRunner, ParamSet, Runner,
    TargetSet,
};
use epiecon::coupling::{run, RunOutput, ScenarioConfig, StageTimes, World};
use epiecon::econio::write_io_csv;
use epiecon::output::write_rows;
use epiecon::population::{generate_population, write_population_csv};
use epiecon::shocks::{build_supply_shocks, write_schedule_csv};
use epiecon::world::build_world;
use epiecon::{Error, Result};

use crate::config::{CliConfig, TargetSpec};
use crate::manifest::{config_hash, RunManifest};

pub const POPULATION_CSV: &str = "population.csv";
pub const IO_CSV: &str = "io_table.csv";
pub const SCHEDULE_CSV: &str = "shock_schedule.csv";
pub const SWEEP_CSV: &str = "sweep_aggregate.csv";
pub const ACCEPTED_CSV: &str = "accepted.csv";
pub const POSTERIOR_CSV: &str = "posterior.csv";
pub const TARGETS_JSON: &str = "targets.json";

/// Settings shared by every subcommand.
pub struct Context {
    pub config: CliConfig,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub profile: bool,
}

/// Named wall-clock durations, printed to stderr under `--profile`.
#[derive(Default)]
struct Profile {
    stages: Vec<(String, Duration)>,
}

impl Profile {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.stages.push((name.to_string(), t.elapsed()));
        v
    }

    fn add_run(&mut self, times: &StageTimes) {
        for (name, d) in times.named() {
            let key = format!("run/{name}");
            match self.stages.iter_mut().find(|(n, _)| *n == key) {
                Some((_, total)) => *total += d,
                None => self.stages.push((key, d)),
            }
        }
    }

    fn report(&self, enabled: bool) {
        if !enabled {
            return;
        }
        for (name, d) in &self.stages {
            eprintln!("profile {name:<16} {:>10.3} ms", d.as_secs_f64() * 1e3);
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn finish(
    dir: &Path,
    command: &str,
    hash: &str,
    seeds: Vec<u64>,
    files: &[PathBuf],
    started: Instant,
) -> Result<()> {
    RunManifest::new(command, hash, seeds, dir, files, started.elapsed()).write(dir)?;
    Ok(())
}

pub fn gen_population(ctx: &Context) -> Result<()> {
    let started = Instant::now();
    let mut prof = Profile::default();
    let wc = ctx.config.world.resolve(ctx.seed)?;
    let pop = prof.time("population", || generate_population(&wc.population, wc.world_seed))?;
    fs::create_dir_all(&ctx.out)?;
    let path = ctx.out.join(POPULATION_CSV);
    prof.time("write", || write_population_csv(&pop, create(&path)?))?;
    println!("{} persons in {} households", pop.len(), pop.households.len());
    finish(&ctx.out, "gen-population", &config_hash(&wc), vec![wc.world_seed], &[path], started)?;
    prof.report(ctx.profile);
    Ok(())
}

pub fn build_io(ctx: &Context) -> Result<()> {
    let started = Instant::now();
    let mut prof = Profile::default();
    let wc = ctx.config.world.resolve(ctx.seed)?;
    let io = prof.time("io", || wc.two_region_io())?;
    fs::create_dir_all(&ctx.out)?;
    let path = ctx.out.join(IO_CSV);
    prof.time("write", || write_io_csv(&io, create(&path)?))?;
    println!("{} industries, 2 regions", io.n());
    finish(&ctx.out, "build-io", &config_hash(&wc), vec![], &[path], started)?;
    prof.report(ctx.profile);
    Ok(())
}

fn write_run(out: &RunOutput, world: &World, dir: &Path, hash: &str, started: Instant) -> Result<Vec<PathBuf>> {
    let mut files = out.write_dir(dir, &world.pop)?;
    finish(dir, "simulate", hash, vec![out.seed], &files, started)?;
    files.push(dir.join(crate::manifest::MANIFEST));
    Ok(files)
}

pub fn simulate(ctx: &Context) -> Result<()> {
    let started = Instant::now();
    let mut prof = Profile::default();
    let wc = ctx.config.world.resolve(None)?;
    let mut scenario = ctx.config.scenario.clone();
    if let Some(s) = ctx.seed {
        scenario.seeds = vec![s];
    }
    scenario.validate()?;
    let hash = config_hash(&json!({ "world": wc, "scenario": scenario }));
    let world = prof.time("world", || build_world(&wc))?;
    let outputs: Vec<RunOutput> = prof.time("runs", || {
        scenario
            .seeds
            .par_iter()
            .map(|&s| run(&world, &scenario, s))
            .collect::<Result<_>>()
    })?;

    fs::create_dir_all(&ctx.out)?;
    let supply = build_supply_shocks(&world.industries, &scenario.timeline(), scenario.closure_set)?;
    let schedule = ctx.out.join(SCHEDULE_CSV);
    write_schedule_csv(&supply, &world.demand_shocks, create(&schedule)?)?;
    let mut files = vec![schedule];
    let single = outputs.len() == 1;
    for out in &outputs {
        prof.add_run(&out.stage_times);
        let dir = if single { ctx.out.clone() } else { ctx.out.join(format!("seed-{}", out.seed)) };
        let written = write_run(out, &world, &dir, &hash, started)?;
        if single {
            // the run manifest is the directory manifest
            files.extend(written.into_iter().filter(|f| !f.ends_with(crate::manifest::MANIFEST)));
        } else {
            files.extend(written);
        }
        println!(
            "seed {}: cumulative deaths {}, reported {}, mean unemployment {:.4}",
            out.seed,
            out.cumulative_deaths(),
            out.cumulative_reported_deaths(),
            out.mean_unemployment()
        );
    }
    finish(&ctx.out, "simulate", &hash, scenario.seeds.clone(), &files, started)?;
    prof.report(ctx.profile);
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepRow {
    cell: usize,
    closure_set: String,
    fear_multiplier: f64,
    measures_start: String,
    n_runs: usize,
    mean_unemployment: f64,
    mean_cumulative_deaths: f64,
    mean_cumulative_reported_deaths: f64,
}

/// Directory of one sweep run, relative to the sweep output.
pub fn run_dir_name(cell: usize, seed: u64) -> String {
    format!("cell{cell:03}-seed{seed}")
}

pub fn sweep(ctx: &Context) -> Result<()> {
    let started = Instant::now();
    let mut prof = Profile::default();
    let grid = &ctx.config.sweep;
    grid.validate()?;
    let wc = ctx.config.world.resolve(None)?;
    let base_scenario = &ctx.config.scenario;
    let base_seed = ctx.seed.unwrap_or(base_scenario.seeds.first().copied().unwrap_or(1));
    let seeds: Vec<u64> = (0..grid.n_seeds as u64).map(|i| base_seed + i).collect();
    let cells = grid.cells();
    let scenarios: Vec<ScenarioConfig> = cells
        .iter()
        .map(|c| ScenarioConfig {
            closure_set: c.closure_set,
            fear_multiplier: c.fear_multiplier,
            measures_start: c.measures_start,
            seeds: seeds.clone(),
            ..base_scenario.clone()
        })
        .collect();
    for s in &scenarios {
        s.validate()?;
    }
    let hash = config_hash(&json!({ "world": wc, "scenario": base_scenario, "sweep": grid, "seeds": seeds }));
    let world = prof.time("world", || build_world(&wc))?;
    fs::create_dir_all(&ctx.out)?;

    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| seeds.iter().map(move |&s| (c, s))).collect();
    log::info!("sweep: {} cells × {} seeds", cells.len(), seeds.len());
    let results: Vec<(usize, f64, u64, u64, StageTimes, Vec<PathBuf>)> = prof.time("runs", || {
        jobs.par_iter()
            .map(|&(c, s)| {
                let t = Instant::now();
                let out = run(&world, &scenarios[c], s)?;
                let dir = ctx.out.join(run_dir_name(c, s));
                let files = write_run(&out, &world, &dir, &hash, t)?;
                Ok((
                    c,
                    out.mean_unemployment(),
                    out.cumulative_deaths(),
                    out.cumulative_reported_deaths(),
                    out.stage_times,
                    files,
                ))
            })
            .collect::<Result<_>>()
    })?;

    let mut rows = Vec::with_capacity(cells.len());
    for (ci, cell) in cells.iter().enumerate() {
        let mine: Vec<_> = results.iter().filter(|r| r.0 == ci).collect();
        let n = mine.len() as f64;
        rows.push(SweepRow {
            cell: ci,
            closure_set: cell.closure_set.to_string(),
            fear_multiplier: cell.fear_multiplier,
            measures_start: cell.measures_start.to_string(),
            n_runs: mine.len(),
            mean_unemployment: mine.iter().map(|r| r.1).sum::<f64>() / n,
            mean_cumulative_deaths: mine.iter().map(|r| r.2 as f64).sum::<f64>() / n,
            mean_cumulative_reported_deaths: mine.iter().map(|r| r.3 as f64).sum::<f64>() / n,
        });
    }
    let aggregate = ctx.out.join(SWEEP_CSV);
    write_rows(&rows, create(&aggregate)?)?;
    let mut files = vec![aggregate];
    for r in &results {
        prof.add_run(&r.4);
        files.extend(r.5.iter().cloned());
    }
    println!("{} cells × {} seeds = {} runs", cells.len(), seeds.len(), jobs.len());
    finish(&ctx.out, "sweep", &hash, seeds, &files, started)?;
    prof.report(ctx.profile);
    Ok(())
}

pub fn calibrate(ctx: &Context) -> Result<()> {
    let started = Instant::now();
    let mut prof = Profile::default();
    let spec = ctx
        .config
        .calibration
        .clone()
        .ok_or_else(|| Error::config("calibration", "section missing from the configuration"))?;
    let seed = ctx.seed.unwrap_or(spec.seed);
    let wc = ctx.config.world.resolve(None)?;
    let scenario = ctx.config.scenario.clone();
    scenario.validate()?;
    let hash = config_hash(&json!({ "world": wc, "scenario": scenario, "calibration": spec, "seed": seed }));
    let world = prof.time("world", || build_world(&wc))?;
    let base = world.params();
    let runner = ModelRunner { world: &world, scenario };

    let targets = match &spec.target {
        TargetSpec::GroundTruth { n_reference } => {
            if *n_reference == 0 {
                return Err(Error::config("calibration.target.ground_truth.n_reference", "must be positive"));
            }
            let truth = ParamSet::of(&base);
            let refs: Vec<_> = prof.time("reference", || {
                (0..*n_reference as u64)
                    .into_par_iter()
                    .map(|i| runner.summarize(&truth, epiecon::rng::mix(&[seed, 0x7e57, i])))
                    .collect::<Result<_>>()
            })?;
            TargetSet::mean_of(&refs)?
        }
        TargetSpec::Observed { weekly_deaths } => TargetSet::observed(weekly_deaths.clone()),
    };
    fs::create_dir_all(&ctx.out)?;
    let targets_path = ctx.out.join(TARGETS_JSON);
    let mut f = create(&targets_path)?;
    serde_json::to_writer_pretty(&mut f, &targets).map_err(std::io::Error::from)?;
    f.flush()?;

    let abc = AbcConfig {
        prior: spec.prior,
        thresholds: spec.thresholds,
        n_samples: spec.n_samples,
        seed,
        executor: spec.executor,
    };
    let accepted = prof.time("abc", || abc_reject(&runner, &base, &abc, &targets))?;
    let accepted_path = ctx.out.join(ACCEPTED_CSV);
    write_accepted(&accepted, create(&accepted_path)?)?;
    let mut files = vec![targets_path, accepted_path];

    let params: Vec<ParamSet> = accepted.iter().map(|a| a.params).collect();
    if spec.posterior_draws > 0 {
        let draws = posterior_sample(&params, spec.posterior_draws, seed)?;
        let path = ctx.out.join(POSTERIOR_CSV);
        write_rows(&draws, create(&path)?)?;
        files.push(path);
    }
    println!("accepted {} of {}", accepted.len(), spec.n_samples);
    for (i, name) in ParamSet::NAMES.iter().enumerate() {
        let mut v: Vec<f64> = params.iter().map(|p| p.to_array()[i]).collect();
        println!("  median {name:<10} {:.6}", median(&mut v));
    }
    finish(&ctx.out, "calibrate", &hash, vec![seed], &files, started)?;
    prof.report(ctx.profile);
    Ok(())
}
