//! End-to-end runs on a small desk world: output tables, summaries read back
//! from disk, and reproducibility.

use std::sync::OnceLock;

use epiecon::calibrate::summarize;
use epiecon::coupling::{run, ScenarioConfig, World};
use epiecon::output::{self, ConsumptionRow, EmploymentRow, InfectionRow};
use epiecon::world::{build_world, desk_config, desk_world, DeskScale, WorldConfig};

fn small_scale() -> DeskScale {
    DeskScale { n_tracts: 4, persons_per_tract: 250, world_seed: 11 }
}

fn world() -> &'static World {
    static W: OnceLock<World> = OnceLock::new();
    W.get_or_init(|| desk_world(small_scale()).expect("small desk world"))
}

#[test]
fn written_tables_read_back_identically() {
    let w = world();
    let out = run(w, &ScenarioConfig::default(), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = out.write_dir(dir.path(), &w.pop).unwrap();
    assert_eq!(paths.len(), 5);
    for p in &paths {
        assert!(p.exists());
    }

    assert_eq!(output::read_epidemic(dir.path()).unwrap(), out.epi);
    assert_eq!(output::read_economy(dir.path()).unwrap(), out.econ_rows());
    let open = |name| std::fs::File::open(dir.path().join(name)).unwrap();
    let cons: Vec<ConsumptionRow> = output::read_rows(open(output::CONSUMPTION_CSV)).unwrap();
    assert_eq!(cons, out.consumption_rows());
    let emp: Vec<EmploymentRow> = output::read_rows(open(output::EMPLOYMENT_CSV)).unwrap();
    assert_eq!(emp, out.employment_rows());
    let inf: Vec<InfectionRow> = output::read_rows(open(output::INFECTIONS_CSV)).unwrap();
    assert_eq!(inf.len(), out.infections.len());
}

#[test]
fn summary_from_disk_matches_memory() {
    let w = world();
    let out = run(w, &ScenarioConfig::default(), 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write_dir(dir.path(), &w.pop).unwrap();
    let mem = summarize(&out.epi, &out.econ_rows(), &out.customer_facing, &out.timeline).unwrap();
    let disk = summarize(
        &output::read_epidemic(dir.path()).unwrap(),
        &output::read_economy(dir.path()).unwrap(),
        &w.customer_facing(),
        &out.timeline,
    )
    .unwrap();
    assert_eq!(mem, disk);
    assert_eq!(mem.weekly_deaths.len(), out.epi.len() / 7);
}

#[test]
fn economy_table_has_baseline_and_daily_rows() {
    let w = world();
    let out = run(w, &ScenarioConfig::default(), 2).unwrap();
    let rows = out.econ_rows();
    let per_day = 2 * w.io.n();
    assert_eq!(rows.len(), per_day * (out.econ.len() + 1));
    assert!(rows[..per_day].iter().all(|r| r.day == -1));
    assert_eq!(out.econ.len(), out.epi.len());
}

#[test]
fn runs_are_reproducible_per_seed() {
    let w = world();
    let s = ScenarioConfig::default();
    let a = run(w, &s, 9).unwrap();
    let b = run(w, &s, 9).unwrap();
    let c = run(w, &s, 10).unwrap();
    assert_eq!(a.epi, b.epi);
    assert_eq!(a.econ_rows(), b.econ_rows());
    assert_eq!(a.infections, b.infections);
    assert_ne!(a.infections, c.infections);
}

#[test]
fn compartments_always_sum_to_population() {
    let w = world();
    let out = run(w, &ScenarioConfig::default(), 4).unwrap();
    for r in &out.epi {
        assert_eq!(r.counts().iter().sum::<usize>(), w.pop.len());
    }
    let last = out.epi.last().unwrap();
    let reported: u64 = out.epi.iter().map(|r| u64::from(r.reported_deaths)).sum();
    assert_eq!(reported, last.cumulative_reported_deaths);
}

#[test]
fn world_config_survives_json() {
    let cfg = desk_config(small_scale());
    let text = serde_json::to_string(&cfg).unwrap();
    let back: WorldConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let rebuilt = build_world(&back).unwrap();
    assert_eq!(rebuilt.pop, world().pop);
}
