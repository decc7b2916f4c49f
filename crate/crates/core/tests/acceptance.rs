//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Runs on the 10,000-person desk world. `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use epiecon::calibrate::{self, Executor, ModelRunner, ParamSet, PriorBox, Range, Runner, TargetSet, Thresholds};
use epiecon::coupling::{behavior_change, run, EpiDayRecord, RunOutput, ScenarioConfig, World};
use epiecon::econ::produce_and_ration;
use epiecon::econio::{regionalize, NationalIO, LOCAL, REST};
use epiecon::shocks::{ClosureSet, RestDeaths};
use epiecon::world::{desk_world, DeskScale};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

const SEEDS: u64 = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Two-sided p-value of a paired t-test on `b − a`, with the mean difference.
fn paired_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return (mean, if mean == 0.0 { 1.0 } else { 0.0 });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    (mean, 2.0 * (1.0 - dist.cdf(t.abs())))
}

/// One-sided sign test: P(X ≥ wins) under Binomial(n, 1/2).
fn sign_test(wins: u64, n: u64) -> f64 {
    if wins == 0 {
        return 1.0;
    }
    1.0 - Binomial::new(0.5, n).unwrap().cdf(wins - 1)
}

fn criterion_1(world: &World) -> Outcome {
    let mut w = world.clone();
    w.seeding = None;
    w.demand_shocks.gov = 0.0;
    w.demand_shocks.other = 0.0;
    w.rest_deaths = RestDeaths::zeros(140);
    let sc = ScenarioConfig {
        closure_set: ClosureSet::AllOpen,
        fear_multiplier: 0.0,
        ..Default::default()
    };
    let t0 = Instant::now();
    let out = match run(&w, &sc, 1) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let elapsed = t0.elapsed();
    let b = &out.econ_baseline;
    let mut worst: f64 = 0.0;
    for day in &out.econ {
        for r in [LOCAL, REST] {
            let (x, y) = (&day.region[r], &b.region[r]);
            for (u, v) in [
                (&x.l_p, &y.l_p),
                (&x.l_h, &y.l_h),
                (&x.x, &y.x),
                (&x.d, &y.d),
                (&x.cap, &y.cap),
                (&x.va, &y.va),
                (&x.z_sales, &y.z_sales),
                (&x.c, &y.c),
                (&x.g, &y.g),
                (&x.f, &y.f),
            ] {
                for (p, q) in u.iter().zip(v) {
                    worst = worst.max(rel(*p, *q));
                }
            }
        }
    }
    let nobody_sick = out.epi.iter().all(|r| r.s == out.n_persons);
    let pass = worst <= 1e-9 && nobody_sick && out.epi.len() == 140 && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "max relative drift {worst:.2e} over {} days (tol 1e-9); {} agents ran in {:.2?} (budget 5 s)",
            out.econ.len(),
            out.n_persons,
            elapsed
        ),
    )
}

fn accounting_residual(out: &RunOutput) -> f64 {
    let mut worst: f64 = 0.0;
    for day in &out.econ {
        for r in &day.region {
            for k in 0..r.x.len() {
                let rhs = r.z_sales[k] + r.c[k] + r.g[k] + r.f[k];
                worst = worst.max(rel(rhs, r.x[k]));
            }
        }
    }
    worst
}

fn criterion_2(runs: &[RunOutput]) -> Outcome {
    let worst = runs.iter().map(accounting_residual).fold(0.0, f64::max);
    outcome(
        worst <= 1e-9,
        format!("max relative |x - (sum Z + c + G + f)| {worst:.2e} over {} runs (tol 1e-9)", runs.len()),
    )
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for &phi in &[1e-4, 1e-3, 0.0025, 0.01, 0.05] {
        for &d in &[0.0, 0.5, 3.0, 17.0, 120.0, 900.0] {
            let lo = behavior_change(phi, d);
            let hi = behavior_change(10.0 * phi, d);
            worst = worst.max((hi - (1.0 - (1.0 - lo).powi(10))).abs());
        }
    }
    // fear level at which the baseline response is 0.14
    let phi = 0.01;
    let d = -(1.0f64 - 0.14).ln() / phi;
    let base = behavior_change(phi, d);
    let high = behavior_change(10.0 * phi, d);
    let expected = 1.0 - 0.86f64.powi(10);
    let pass = worst <= 1e-12 && (base - 0.14).abs() < 1e-12 && (high - expected).abs() < 1e-12 && (high - 0.77).abs() <= 0.01;
    outcome(
        pass,
        format!("identity error {worst:.1e} (tol 1e-12); baseline 0.14 gives {high:.4} vs 0.77 (tol 0.01)"),
    )
}

fn random_national(rng: &mut ChaCha8Rng, n: usize) -> NationalIO {
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(50.0..150.0)).collect();
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(0.0..0.04)).collect()).collect();
    let z: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|l| a[k][l] * x[l]).collect()).collect();
    let f = (0..n)
        .map(|k| {
            let rest = x[k] - z[k].iter().sum::<f64>();
            let c = rng.random_range(0.3..0.7);
            let g = rng.random_range(0.0..0.2);
            [c * rest, g * rest, (1.0 - c - g) * rest]
        })
        .collect();
    NationalIO::from_flows((0..n).map(|k| format!("i{k}")).collect(), z, f, x).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 5;
    let mut split_exact = true;
    let mut row_worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..200 {
        let nat = random_national(&mut rng, n);
        let y_nation: Vec<f64> = (0..n).map(|_| rng.random_range(20.0..60.0)).collect();
        let y_region: Vec<f64> = y_nation.iter().map(|y| y * rng.random_range(0.02..0.4)).collect();
        let io = match regionalize(&nat, &y_region, &y_nation, 0.3) {
            Ok(io) => io,
            Err(e) => return outcome(false, format!("regionalize failed: {e}")),
        };
        cases += 1;
        for d in [LOCAL, REST] {
            for k in 0..n {
                for l in 0..n {
                    if io.a[d][d][k][l] + io.a[1 - d][d][k][l] != nat.a[k][l] {
                        split_exact = false;
                    }
                }
            }
        }
        // row identity recomputed from coefficients and outputs
        for o in [LOCAL, REST] {
            for k in 0..n {
                let inter: f64 = [LOCAL, REST]
                    .iter()
                    .map(|&d| (0..n).map(|l| io.a[o][d][k][l] * io.x[d][l]).sum::<f64>())
                    .sum();
                let fin: f64 = [LOCAL, REST].iter().map(|&d| io.f[o][d][k].iter().sum::<f64>()).sum();
                row_worst = row_worst.max(rel(inter + fin, io.x[o][k]));
            }
        }
    }
    // the region is the whole nation
    let nat = random_national(&mut rng, n);
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(20.0..60.0)).collect();
    let rho_one = match regionalize(&nat, &y, &y, 0.3) {
        Ok(io) => io.rho[LOCAL].iter().flatten().all(|&r| (r - 1.0).abs() < 1e-12),
        Err(_) => false,
    };
    outcome(
        split_exact && rho_one && row_worst <= 1e-9,
        format!(
            "block sums exact: {split_exact}; whole-nation rho == 1: {rho_one}; row identity {row_worst:.1e} over {cases} random 5-industry tables (tol 1e-9)"
        ),
    )
}

fn criterion_5(runs: &[RunOutput]) -> Outcome {
    let mut bad = 0;
    let mut steps = 0;
    for r in runs {
        for rec in &r.epi {
            steps += 1;
            if rec.counts().iter().sum::<usize>() != r.n_persons {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{bad} of {steps} steps violate sum = N across {} runs", runs.len()))
}

fn criterion_6(world: &World, empirical: &[RunOutput]) -> Outcome {
    let t0 = Instant::now();
    let cf = run_set(world, ClosureSet::CustomerFacing(1.0));
    let open = run_set(world, ClosureSet::AllOpen);
    let elapsed = t0.elapsed();
    let sets = [empirical, cf.as_slice(), open.as_slice()];
    let deaths: Vec<Vec<f64>> = sets.iter().map(|s| s.iter().map(|r| r.cumulative_deaths() as f64).collect()).collect();
    let unemp: Vec<Vec<f64>> = sets.iter().map(|s| s.iter().map(RunOutput::mean_unemployment).collect()).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, b) in [(0, 1), (1, 2)] {
        let (dd, pd) = paired_t(&deaths[a], &deaths[b]);
        let (du, pu) = paired_t(&unemp[b], &unemp[a]);
        pass &= dd > 0.0 && pd < 0.01 && du > 0.0 && pu < 0.01;
        parts.push(format!("deaths +{dd:.2} (p={pd:.1e}), unemployment +{du:.4} (p={pu:.1e})"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    outcome(
        pass,
        format!(
            "mean deaths {:.1} < {:.1} < {:.1}; unemployment {:.4} > {:.4} > {:.4}; non-essential vs customer-facing: {}; customer-facing vs all open: {}; {SEEDS} seeds in {:.1?}",
            mean(&deaths[0]),
            mean(&deaths[1]),
            mean(&deaths[2]),
            mean(&unemp[0]),
            mean(&unemp[1]),
            mean(&unemp[2]),
            parts[0],
            parts[1],
            elapsed + empirical_elapsed(),
        ),
    )
}

static EMPIRICAL_ELAPSED: std::sync::OnceLock<Duration> = std::sync::OnceLock::new();

fn empirical_elapsed() -> Duration {
    EMPIRICAL_ELAPSED.get().copied().unwrap_or_default()
}

fn run_set(world: &World, set: ClosureSet) -> Vec<RunOutput> {
    use rayon::prelude::*;
    let sc = ScenarioConfig { closure_set: set, ..Default::default() };
    (1..=SEEDS)
        .into_par_iter()
        .map(|s| run(world, &sc, s).expect("run"))
        .collect()
}

fn criterion_7(world: &World) -> Outcome {
    let t0 = Instant::now();
    let runner = ModelRunner { world, scenario: ScenarioConfig::default() };
    let truth = ParamSet::of(&world.params());
    let refs: Result<Vec<_>, _> = (0..20).map(|i| runner.summarize(&truth, 700_000 + i)).collect();
    let target = match refs.and_then(|r| TargetSet::mean_of(&r)) {
        Ok(t) => t,
        Err(e) => return outcome(false, format!("reference runs failed: {e}")),
    };
    // deliberately lopsided around the truth so that the prior median alone
    // would miss the 20% band
    let prior = PriorBox {
        beta: Range::new(0.5 * truth.beta, 2.0 * truth.beta),
        phi_epi: Range::new(0.2 * truth.phi_epi, 3.0 * truth.phi_epi),
        phi_tilde: Range::new(0.5, 2.0),
        phi_u: Range::new(0.1, 0.5),
        delta_s: Range::new(0.25, 0.75),
        gamma_h: Range::new(0.05, 0.2),
        gamma_f: Range::new(0.05, 0.2),
    };
    let thresholds = Thresholds::default();
    let samples = calibrate::evaluate(&runner, &prior, 1000, 7, Executor::Parallel);
    let accepted = match calibrate::reject(&samples, &target, &thresholds) {
        Ok(a) => a,
        Err(e) => return outcome(false, format!("{e}")),
    };
    let mut betas: Vec<f64> = accepted.iter().map(|a| a.params.beta).collect();
    let med = calibrate::median(&mut betas);
    let within = rel(med, truth.beta) <= 0.2;

    // brute-force filter over the raw sample table
    let target_mean = target.weekly_deaths.iter().sum::<f64>() / target.weekly_deaths.len() as f64;
    let goal = target.econ.to_array();
    let limits = thresholds.econ.to_array();
    let brute: Vec<usize> = samples
        .iter()
        .filter_map(|s| {
            let sum = s.summary.as_ref().ok()?;
            let m = sum.weekly_deaths.iter().sum::<f64>() / sum.weekly_deaths.len() as f64;
            let econ = sum.econ.to_array();
            let ok = (m - target_mean).abs() <= thresholds.deaths + 1e-15
                && (0..6).all(|i| (econ[i] - goal[i]).abs() <= limits[i]);
            ok.then_some(s.index)
        })
        .collect();
    let got: Vec<usize> = accepted.iter().map(|a| a.index).collect();
    let oracle_match = brute == got;
    outcome(
        within && oracle_match,
        format!(
            "accepted {} of {}; median beta {med:.4} vs true {:.4} ({:+.1}%, tol 20%); brute-force filter agrees: {oracle_match}; {:.1?}",
            got.len(),
            samples.len(),
            truth.beta,
            100.0 * (med / truth.beta - 1.0),
            t0.elapsed()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..40);
        let claims: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.1) { -rng.random_range(0.0..5.0) } else { rng.random_range(0.0..100.0) })
            .collect();
        let total: f64 = claims.iter().sum();
        let cap = rng.random_range(0.0..1.2) * total.max(1.0);
        let r = produce_and_ration(&claims, cap);
        let ratios: Vec<f64> = claims
            .iter()
            .zip(&r.realized)
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, x)| x / c)
            .collect();
        if let Some(first) = ratios.first() {
            for q in &ratios {
                worst = worst.max((q - first).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max spread of realized/claim across claimants {worst:.1e} over 1000 cases (tol 1e-12)"))
}

fn criterion_9(runs: &[RunOutput]) -> Outcome {
    let mut emp_wins = 0;
    let mut cons_wins = 0;
    for out in runs {
        let Some(g) = out.group("worker_income_band") else {
            return outcome(false, "worker income bands missing");
        };
        let top = g.initial.len() - 1;
        let drop_e = |i: usize| {
            g.daily.iter().map(|row| 1.0 - row[i] as f64 / g.initial[i] as f64).sum::<f64>() / g.daily.len() as f64
        };
        let base = &out.consumption_baseline_by_band;
        let drop_c = |i: usize| {
            out.econ.iter().map(|d| 1.0 - d.consumption_by_band[i] / base[i]).sum::<f64>() / out.econ.len() as f64
        };
        if drop_e(0) > drop_e(top) {
            emp_wins += 1;
        }
        if drop_c(0) < drop_c(base.len() - 1) {
            cons_wins += 1;
        }
    }
    let n = runs.len() as u64;
    let (pe, pc) = (sign_test(emp_wins, n), sign_test(cons_wins, n));
    outcome(
        pe < 0.01 && pc < 0.01,
        format!(
            "bottom quintile loses more jobs in {emp_wins}/{n} runs (p={pe:.1e}); cuts consumption less in {cons_wins}/{n} runs (p={pc:.1e})"
        ),
    )
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let world = desk_world(DeskScale::default()).expect("desk world");
    println!("desk world: {} persons, built in {:.2?}", world.pop.len(), t0.elapsed());

    let te = Instant::now();
    let empirical = run_set(&world, ClosureSet::NonEssential);
    EMPIRICAL_ELAPSED.set(te.elapsed()).ok();
    let _: &[EpiDayRecord] = &empirical[0].epi;

    let results = [
        ("steady state", criterion_1(&world)),
        ("accounting identity", criterion_2(&empirical)),
        ("fear scaling", criterion_3()),
        ("regionalization identities", criterion_4()),
        ("SLIR conservation", criterion_5(&empirical)),
        ("counterfactual ordering", criterion_6(&world, &empirical)),
        ("ABC recovery", criterion_7(&world)),
        ("pro-rata rationing", criterion_8()),
        ("distributional direction", criterion_9(&empirical)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {}: {} [{name}] {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), t0.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
