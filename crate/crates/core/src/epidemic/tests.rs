use super::*;
use crate::contacts::Edge;
use crate::population::{Household, Person};
use proptest::prelude::*;

fn pop_of_ages(ages: &[u8]) -> Population {
    let persons = ages
        .iter()
        .enumerate()
        .map(|(i, &age)| Person {
            person_id: i as u32,
            household_id: i as u32,
            tract_id: 0,
            age,
            employed: false,
            industry: None,
            occupation: None,
            can_wfh: false,
            income: 0.0,
            epi_state: Compartment::S,
        })
        .collect();
    let households = (0..ages.len() as u32)
        .map(|i| Household { household_id: i, member_ids: vec![i], tract_id: 0, head_id: i, group_id: 0 })
        .collect();
    Population { persons, households }
}

fn model(beta: f64, ages: &[u8]) -> EpiModel {
    EpiModel::new(EpiParams { beta, ..EpiParams::default() }, &pop_of_ages(ages)).unwrap()
}

fn single_layer(n: usize, edges: &[Edge]) -> [Csr; 4] {
    [
        Csr::from_edges(n, edges),
        Csr::from_edges(n, &[]),
        Csr::from_edges(n, &[]),
        Csr::from_edges(n, &[]),
    ]
}

/// Puts person `i` straight into I_S by infecting and advancing to onset.
fn make_symptomatic(state: &mut EpiState, i: u32) {
    let idx = i as usize;
    state.compartment[idx] = Compartment::IS;
    state.counts[Compartment::S as usize] -= 1;
    state.counts[Compartment::IS as usize] += 1;
    state.symptomatic[idx] = true;
    state.removal_day[idx] = 1000;
    state.infectious.push(i);
    state.infectious.sort_unstable();
}

#[test]
fn edge_probability_values() {
    let m = model(0.05, &[40, 10]);
    let adult = 1.0 - (-0.05f64).exp();
    assert!((m.edge_probability(Compartment::IS, 1.0, false, 0) - adult).abs() < 1e-15);
    assert!((m.edge_probability(Compartment::IS, 1.0, false, 1) - 0.56 * adult).abs() < 1e-15);
    let outdoor = 1.0 - (-0.05f64 * 0.05).exp();
    assert!((m.edge_probability(Compartment::IS, 1.0, true, 0) - outdoor).abs() < 1e-15);
    let asym = 1.0 - (-0.025f64).exp();
    assert!((m.edge_probability(Compartment::IA, 1.0, false, 0) - asym).abs() < 1e-15);
    assert_eq!(m.edge_probability(Compartment::R, 1.0, false, 0), 0.0);
}

#[test]
fn severity_bands() {
    let p = EpiParams::default();
    assert_eq!(p.severity_band(0), 0);
    assert_eq!(p.severity_band(9), 0);
    assert_eq!(p.severity_band(10), 1);
    assert_eq!(p.severity_band(79), 7);
    assert_eq!(p.severity_band(80), 8);
    assert_eq!(p.severity_band(100), 8);
    assert_eq!(p.susceptibility_at(18), 0.56);
    assert_eq!(p.susceptibility_at(19), 1.0);
}

#[test]
fn death_probability_of_symptomatic_case() {
    let p = EpiParams::default();
    assert!((p.death_given_symptomatic(85) - 0.078 / 0.646).abs() < 1e-15);
    assert!((p.death_given_symptomatic(5) - 0.0000161 / 0.181).abs() < 1e-15);
}

#[test]
fn presymptomatic_rate_balances_shares() {
    let p = EpiParams { beta: 0.4, ..EpiParams::default() };
    // all symptomatic: β_S γ = β μ when k = 1/2
    assert!((p.beta_presym(1.0) - 0.4 * 2.5 / 2.0).abs() < 1e-15);
    // all asymptomatic: β̄ = r β
    assert!((p.beta_presym(0.0) - 0.5 * 0.4 * 2.5 / 2.0).abs() < 1e-15);
    let p = EpiParams { k_presym: 0.25, ..p };
    assert!((p.beta_presym(1.0) - (1.0 / 3.0) * 0.4 * 2.5 / 2.0).abs() < 1e-15);
}

#[test]
fn invalid_params_are_rejected() {
    let d = EpiParams::default();
    for bad in [
        EpiParams { beta: -1.0, ..d.clone() },
        EpiParams { gamma: 6, ..d.clone() },
        EpiParams { gamma: 0, ..d.clone() },
        EpiParams { mu: 0.5, ..d.clone() },
        EpiParams { k_presym: 1.0, ..d.clone() },
        EpiParams { ifr: vec![0.5; 9], ..d.clone() },
        EpiParams { p_symptomatic: vec![0.5; 3], ..d.clone() },
        EpiParams { susceptibility: vec![1.0], ..d.clone() },
    ] {
        assert!(bad.validate().unwrap_err().is_config());
    }
    d.validate().unwrap();
}

#[test]
fn course_of_infection_is_scheduled() {
    let ages = vec![85u8; 2000];
    let m = model(0.05, &ages);
    let mut s = EpiState::new(ages.len());
    for i in 0..ages.len() as u32 {
        s.infect(&m, i, 10, 3);
    }
    assert_eq!(s.count(Compartment::L), ages.len());
    assert_eq!(s.ever_infected(), ages.len());
    let mut deaths = 0;
    for i in 0..ages.len() {
        assert_eq!(s.infection_day[i], 10);
        assert_eq!(s.presym_day[i], 13);
        assert_eq!(s.onset_day[i], 15);
        assert!(s.removal_day[i] > s.onset_day[i]);
        if s.will_die[i] {
            deaths += 1;
            assert!(s.symptomatic[i]);
            let gap = s.death_day[i] - s.removal_day[i];
            assert!(gap == 12 || gap == 13);
            assert_eq!(s.report_day[i], s.death_day[i] + 7);
        } else {
            assert_eq!(s.death_day[i], NEVER);
        }
    }
    let reported: u32 = (0..200).map(|d| s.reported_deaths(d)).sum();
    assert_eq!(reported as usize, deaths);
}

#[test]
fn removal_duration_has_mean_mu() {
    let n = 20_000;
    let m = model(0.05, &vec![40; n]);
    let mut s = EpiState::new(n);
    for i in 0..n as u32 {
        s.infect(&m, i, 0, 17);
    }
    let mean = (0..n).map(|i| (s.removal_day[i] - s.onset_day[i]) as f64).sum::<f64>() / n as f64;
    // geometric on {1, 2, ...} with q = 0.4: variance (1 − q)/q²
    let se = (0.6f64 / 0.16 / n as f64).sqrt();
    assert!((mean - 2.5).abs() < 4.0 * se, "mean {mean}");
}

#[test]
fn symptomatic_and_death_shares() {
    let n = 20_000;
    let m = model(0.05, &vec![85; n]);
    let mut s = EpiState::new(n);
    for i in 0..n as u32 {
        s.infect(&m, i, 0, 5);
    }
    let check = |k: usize, p: f64| {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((k as f64 / n as f64 - p).abs() < 4.0 * se, "{k} vs {p}");
    };
    check(s.symptomatic.iter().filter(|&&x| x).count(), 0.646);
    check(s.will_die.iter().filter(|&&x| x).count(), 0.078);
}

#[test]
fn progression_walks_the_stages() {
    let m = model(0.05, &[40]);
    let mut s = EpiState::new(1);
    s.infect(&m, 0, 0, 1);
    let expect = |day: i32| -> Compartment {
        if day < s.presym_day[0] {
            Compartment::L
        } else if day < s.onset_day[0] {
            Compartment::PS
        } else if day < s.removal_day[0] {
            if s.symptomatic[0] { Compartment::IS } else { Compartment::IA }
        } else if s.will_die[0] && day >= s.death_day[0] {
            Compartment::D
        } else {
            Compartment::R
        }
    };
    let wanted: Vec<Compartment> = (0..40).map(expect).collect();
    for (day, want) in wanted.into_iter().enumerate() {
        s.progression_step(day as i32);
        assert_eq!(s.compartment[0], want, "day {day}");
        assert_eq!(s.infectious().contains(&0), want.is_infectious());
        assert_eq!(s.counts().iter().sum::<usize>(), 1);
    }
}

#[test]
fn no_infectious_no_infections() {
    let m = model(5.0, &[40, 40]);
    let mut s = EpiState::new(2);
    let layers = single_layer(2, &[Edge::new(0, 1, 10.0)]);
    assert!(transmission_step(NetworkView::Explicit(&layers), &m, &mut s, 0, 1).is_empty());
}

#[test]
fn single_edge_fires_at_the_edge_probability() {
    let m = model(0.5, &[40, 40]);
    let layers = single_layer(2, &[Edge::new(0, 1, 1.0)]);
    let trials = 4000;
    let mut hits = 0;
    for seed in 0..trials {
        let mut s = EpiState::new(2);
        make_symptomatic(&mut s, 0);
        hits += transmission_step(NetworkView::Explicit(&layers), &m, &mut s, 0, seed).len();
    }
    let p = 1.0 - (-0.5f64).exp();
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((hits as f64 / trials as f64 - p).abs() < 4.0 * se, "hits {hits}");
}

#[test]
fn only_susceptibles_are_infected() {
    let m = model(100.0, &[40, 40, 40]);
    let layers = single_layer(3, &[Edge::new(0, 1, 1.0), Edge::new(0, 2, 1.0)]);
    let mut s = EpiState::new(3);
    make_symptomatic(&mut s, 0);
    s.infect(&m, 2, -3, 1);
    let out = transmission_step(NetworkView::Explicit(&layers), &m, &mut s, 0, 1);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].infectee, 1);
    assert_eq!(out[0].infector, Some(0));
    assert_eq!(out[0].layer, Some(Layer::Household));
    assert_eq!(s.compartment[1], Compartment::L);
}

#[test]
fn first_infector_by_id_wins() {
    let m = model(100.0, &[40, 40, 40]);
    let layers = single_layer(3, &[Edge::new(0, 2, 1.0), Edge::new(1, 2, 1.0)]);
    let mut s = EpiState::new(3);
    make_symptomatic(&mut s, 1);
    make_symptomatic(&mut s, 0);
    let out = transmission_step(NetworkView::Explicit(&layers), &m, &mut s, 0, 1);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].infector, Some(0));
}

#[test]
fn transmission_is_deterministic() {
    let w = crate::world::desk_world_small();
    let m = EpiModel::new(w.params().epi, &w.pop).unwrap();
    let run = || {
        let mut s = EpiState::new(w.pop.len());
        for i in 0..20 {
            make_symptomatic(&mut s, i * 37);
        }
        let view = NetworkView::Template { day: &w.templates.days[0], filters: None };
        let out = transmission_step(view, &m, &mut s, 4, 99);
        (out, s)
    };
    let (a, sa) = run();
    let (b, sb) = run();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
}

#[test]
fn explicit_and_template_views_agree() {
    let w = crate::world::desk_world_small();
    let m = EpiModel::new(w.params().epi, &w.pop).unwrap();
    let t = &w.templates.days[1];
    let layers: [Csr; 4] = Layer::ALL.map(|l| Csr::from_edges(w.pop.len(), &t.layer(l).edges()));
    let start = || {
        let mut s = EpiState::new(w.pop.len());
        for i in 0..30 {
            make_symptomatic(&mut s, i * 29);
        }
        s
    };
    let (mut a, mut b) = (start(), start());
    let x = transmission_step(NetworkView::Template { day: t, filters: None }, &m, &mut a, 2, 5);
    let y = transmission_step(NetworkView::Explicit(&layers), &m, &mut b, 2, 5);
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn seeding_target_scales_with_population() {
    let c = SeedingConfig::default();
    assert_eq!(c.scaled_target(416_442), 165);
    assert_eq!(c.scaled_target(100_000), 40);
    assert_eq!(c.scaled_target(10_000), 10);
}

#[test]
fn seeding_reaches_target_and_redates() {
    let w = crate::world::desk_world_small();
    let m = EpiModel::new(w.params().epi, &w.pop).unwrap();
    let c = SeedingConfig { target_exposed: 20_000, ..SeedingConfig::default() };
    let target = c.scaled_target(w.pop.len());
    let s = seed_epidemic(&w.templates, &m, &c, 8).unwrap();
    assert!(s.state.ever_infected() >= target);
    assert_eq!(s.infections.len(), s.state.ever_infected());
    assert!(s.infections.iter().all(|i| i.day < 0 || (i.day == 0 && s.burn_in_days == 0)));
    assert_eq!(s.infections.iter().filter(|i| i.infector.is_none()).count(), c.n_latent);
    assert!(s.infections.iter().all(|i| s.state.infection_day[i.infectee as usize] == i.day));
    let again = seed_epidemic(&w.templates, &m, &c, 8).unwrap();
    assert_eq!(again.state, s.state);
}

#[test]
fn seeding_without_spread_fails() {
    let w = crate::world::desk_world_small();
    let m = EpiModel::new(EpiParams { beta: 0.0, ..w.params().epi }, &w.pop).unwrap();
    let c = SeedingConfig { target_exposed: 100_000, max_attempts: 3, ..SeedingConfig::default() };
    match seed_epidemic(&w.templates, &m, &c, 1) {
        Err(Error::SeedingFailed { attempts, best, .. }) => {
            assert_eq!(attempts, 3);
            assert_eq!(best, c.n_latent);
        }
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #[test]
    fn counts_stay_consistent(
        edges in prop::collection::vec((0u32..30, 0u32..30, 0.1f64..3.0), 0..120),
        seeds in prop::collection::vec(0u32..30, 1..5),
        beta in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let n = 30;
        let ages: Vec<u8> = (0..n).map(|i| (i * 3) as u8).collect();
        let m = model(beta, &ages);
        let edges: Vec<Edge> = edges
            .into_iter()
            .filter(|(i, j, _)| i != j)
            .map(|(i, j, w)| Edge::new(i, j, w))
            .collect();
        let mut edges = edges;
        edges.sort_by_key(|e| (e.i, e.j));
        edges.dedup_by_key(|e| (e.i, e.j));
        let layers = single_layer(n as usize, &edges);
        let mut s = EpiState::new(n as usize);
        for &i in &seeds {
            if s.compartment[i as usize] == Compartment::S {
                s.infect(&m, i, 0, seed);
            }
        }
        let mut dead = 0;
        let mut ever = s.ever_infected();
        for day in 0..60 {
            s.progression_step(day);
            let out = transmission_step(NetworkView::Explicit(&layers), &m, &mut s, day, seed);
            prop_assert_eq!(s.counts().iter().sum::<usize>(), n as usize);
            let tally = Compartment::ALL.map(|c| s.compartment.iter().filter(|&&x| x == c).count());
            prop_assert_eq!(tally, s.counts());
            prop_assert!(s.count(Compartment::D) >= dead);
            dead = s.count(Compartment::D);
            prop_assert_eq!(s.ever_infected(), ever + out.len());
            ever = s.ever_infected();
            prop_assert_eq!(s.ever_infected(), n as usize - s.count(Compartment::S));
        }
    }
}
