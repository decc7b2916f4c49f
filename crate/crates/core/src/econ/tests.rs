use super::*;
use crate::coupling::World;
use proptest::prelude::*;

fn economy(w: &World) -> Economy {
    Economy::new(
        w.io.clone(),
        &w.pop,
        &w.groups,
        &w.consumption,
        w.customer_facing(),
        w.econ.clone(),
        w.n_income_bands,
    )
    .unwrap()
}

fn calm(supply: &[f64]) -> EconInputs<'_> {
    EconInputs { lambda_local: 0.0, lambda_rest: 0.0, supply: [supply, supply], gov: 0.0, other: 0.0 }
}

#[test]
fn rationing_shares_shortfall_pro_rata() {
    let r = produce_and_ration(&[60.0, 40.0], 50.0);
    assert_eq!(r.output, 50.0);
    assert_eq!(r.demand, 100.0);
    assert_eq!(r.realized, vec![30.0, 20.0]);
}

#[test]
fn demand_below_capacity_is_met() {
    let r = produce_and_ration(&[10.0, 5.0], 50.0);
    assert_eq!(r.output, 15.0);
    assert_eq!(r.ratio, 1.0);
    assert_eq!(r.realized, vec![10.0, 5.0]);
}

#[test]
fn negative_claims_are_served_in_full() {
    let r = produce_and_ration(&[100.0, -20.0], 50.0);
    assert_eq!(r.output, 50.0);
    assert!((r.ratio - 0.7).abs() < 1e-15);
    assert!((r.realized[0] - 70.0).abs() < 1e-12);
    assert_eq!(r.realized[1], -20.0);
}

#[test]
fn non_positive_demand_gives_zero_output() {
    let r = produce_and_ration(&[-5.0, 2.0], 50.0);
    assert_eq!(r.output, 0.0);
    // the negative claim frees room for the positive one
    assert_eq!(r.ratio, 1.0);
    assert_eq!(r.realized, vec![-5.0, 2.0]);
}

#[test]
fn preference_shift_example() {
    assert!((non_customer_facing_preference(0.5, 10.0, 100.0) - 1.05).abs() < 1e-15);
    assert_eq!(non_customer_facing_preference(0.5, 10.0, 0.0), 1.0);
    assert_eq!(non_customer_facing_preference(0.0, 10.0, 100.0), 1.0);
}

#[test]
fn consumption_demand_example() {
    let params = EconParams { phi_u: 0.3, delta_s: 0.5, ..EconParams::default() };
    let d = consumption_demand(&[vec![10.0, 20.0]], &[true, false], 0.4, &[1], &[4], &params);
    // income 1 − 0.3/4, saved 4, upweight 1 + 0.5·4/20
    assert!((d[0][0] - 10.0 * 0.6 * 0.925).abs() < 1e-12);
    assert!((d[0][1] - 20.0 * 1.1 * 0.925).abs() < 1e-12);
}

#[test]
fn consumption_demand_without_shocks_is_base() {
    let base = vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.0, 7.0]];
    let d = consumption_demand(&base, &[true, false, true], 0.0, &[0, 0], &[3, 0], &EconParams::default());
    assert_eq!(d, base);
}

#[test]
fn quantile_edges_split_evenly() {
    let v: Vec<f64> = (1..=10).map(f64::from).collect();
    assert_eq!(quantile_edges(&v, 2), vec![6.0]);
    assert_eq!(quantile_edges(&v, 5), vec![3.0, 5.0, 7.0, 9.0]);
    assert!(quantile_edges(&v, 1).is_empty());
}

#[test]
fn invalid_params_rejected() {
    for p in [
        EconParams { gamma_h: 0.0, ..EconParams::default() },
        EconParams { gamma_f: 1.5, ..EconParams::default() },
        EconParams { phi_u: -0.1, ..EconParams::default() },
        EconParams { delta_s: 2.0, ..EconParams::default() },
    ] {
        assert!(p.validate().unwrap_err().is_config());
    }
}

#[test]
fn local_labor_matches_population() {
    let w = crate::world::desk_world_small();
    let e = economy(w);
    let employed = w.pop.persons.iter().filter(|p| p.employed).count();
    assert_eq!(e.initial_employment(crate::econio::LOCAL), employed as f64);
    let households: usize = e.households_per_group.iter().sum();
    assert_eq!(households, w.pop.households.len());
    assert!(e.baseline_by_band.iter().all(|&b| b > 0.0));
}

#[test]
fn group_base_adds_to_local_consumption() {
    let w = crate::world::desk_world_small();
    let e = economy(w);
    let (l, r) = (crate::econio::LOCAL, crate::econio::REST);
    for k in 0..e.n() {
        let total: f64 = e.group_base.iter().map(|row| row[k]).sum();
        let want = w.io.f[l][l][k][C] + w.io.f[r][l][k][C];
        assert!((total - want).abs() <= 1e-9 * want.abs().max(1.0));
    }
}

#[test]
fn unshocked_day_reproduces_baseline() {
    let w = crate::world::desk_world_small();
    let mut e = economy(w);
    let mut market = LaborMarket::new(&w.pop, e.n());
    let supply = vec![0.0; e.n()];
    for day in 0..5 {
        let out = e.step(&calm(&supply), &mut market, 3, day);
        assert_eq!((out.fired, out.hired), (0, 0));
        for r in 0..2 {
            for k in 0..e.n() {
                let x0 = w.io.x[r][k];
                assert!((out.region[r].x[k] - x0).abs() <= 1e-9 * x0.max(1.0));
                assert!((out.region[r].va[k] - w.io.va[r][k]).abs() <= 1e-9 * x0.max(1.0));
            }
        }
        for (b, b0) in out.consumption_by_band.iter().zip(&e.baseline_by_band) {
            assert!((b - b0).abs() <= 1e-9 * b0);
        }
    }
}

#[test]
fn full_closure_with_instant_firing_empties_in_person_work() {
    let w = crate::world::desk_world_small();
    let mut e = economy(w);
    e.params.gamma_f = 1.0;
    let mut market = LaborMarket::new(&w.pop, e.n());
    let k = (0..e.n()).max_by(|&a, &b| e.l_p0[0][a].total_cmp(&e.l_p0[0][b])).unwrap();
    let mut supply = vec![0.0; e.n()];
    supply[k] = 1.0;
    let moves = e.labor_stage(&calm(&supply), &mut market, 1, 0);
    assert_eq!(e.l_p[0][k], 0.0);
    assert_eq!(market.n_employed(k, WorkType::InPerson), 0);
    assert_eq!(moves.fired.len(), e.l_p0[0][k] as usize);
    assert!(moves.fired.iter().all(|&id| !market.status[id as usize]));
    assert!(moves.fired.iter().all(|&id| w.pop.persons[id as usize].industry == Some(k)));
    assert_eq!(e.l_p[1][k], 0.0);
}

#[test]
fn reopening_rehires_the_same_people() {
    let w = crate::world::desk_world_small();
    let mut e = economy(w);
    e.params.gamma_f = 1.0;
    e.params.gamma_h = 0.5;
    let mut market = LaborMarket::new(&w.pop, e.n());
    let n = e.n();
    let closed = vec![0.5; n];
    let mut fired = e.labor_stage(&calm(&closed), &mut market, 1, 0).fired;
    assert!(!fired.is_empty());
    let open = vec![0.0; n];
    let mut n_hired = 0;
    for day in 1..60 {
        e.production_stage(&calm(&open));
        let m = e.labor_stage(&calm(&open), &mut market, 1, day);
        for id in &m.hired {
            assert!(fired.contains(id), "hired {id} was never fired");
            let p = &w.pop.persons[*id as usize];
            let t = if p.can_wfh { WorkType::FromHome } else { WorkType::InPerson };
            assert!(market.employed(p.industry.unwrap(), t).contains(id));
        }
        n_hired += m.hired.len();
        fired.extend(m.fired);
    }
    assert!(n_hired > 0);
}

#[test]
fn head_unemployment_cuts_local_consumption() {
    let w = crate::world::desk_world_small();
    let mut e = economy(w);
    let supply = vec![0.0; e.n()];
    let before: f64 = e.production_stage(&calm(&supply)).region[0].c_demand.iter().sum();
    let g = (0..e.households_per_group.len()).max_by_key(|&g| e.households_per_group[g]).unwrap();
    e.unemployed_heads[g] = e.households_per_group[g];
    let after: f64 = e.production_stage(&calm(&supply)).region[0].c_demand.iter().sum();
    assert!(after < before);
}

#[test]
fn market_adjust_clamps_and_conserves() {
    let w = crate::world::desk_world_small();
    let mut market = LaborMarket::new(&w.pop, w.io.n());
    let k = (0..w.io.n()).find(|&k| market.n_employed(k, WorkType::InPerson) > 0).unwrap();
    let n0 = market.n_employed(k, WorkType::InPerson);
    let mut rng = crate::rng::stream(1, crate::rng::Stream::Hiring, 0);
    let mut moves = Moves::default();
    market.adjust(k, WorkType::InPerson, -(n0 as i64) - 5, &mut rng, &mut moves);
    assert_eq!(market.n_employed(k, WorkType::InPerson), 0);
    assert_eq!(market.n_fired(k, WorkType::InPerson), n0);
    market.adjust(k, WorkType::InPerson, 3, &mut rng, &mut moves);
    assert_eq!(market.n_employed(k, WorkType::InPerson), 3.min(n0));
    assert_eq!(moves.fired.len(), n0);
}

proptest! {
    #[test]
    fn rationing_invariants(
        claims in prop::collection::vec(-50.0f64..200.0, 1..12),
        cap in 0.0f64..1000.0,
    ) {
        let r = produce_and_ration(&claims, cap);
        prop_assert!(r.output >= 0.0 && r.output <= cap.max(0.0) + 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.ratio));
        for (got, &c) in r.realized.iter().zip(&claims) {
            if c > 0.0 {
                prop_assert!(*got >= 0.0 && *got <= c + 1e-12);
            } else {
                prop_assert_eq!(*got, c);
            }
        }
        if r.demand > 0.0 {
            let total: f64 = r.realized.iter().sum();
            prop_assert!((total - r.output).abs() <= 1e-9 * r.demand.max(1.0));
        }
    }

    #[test]
    fn labor_moves_toward_target(l in 0.0f64..100.0, t in 0.0f64..100.0, gh in 0.01f64..1.0, gf in 0.01f64..1.0) {
        let next = update_labor(l, t, gh, gf);
        prop_assert!((next - t).abs() <= (l - t).abs() + 1e-12);
        prop_assert!(next >= l.min(t) - 1e-12 && next <= l.max(t) + 1e-12);
    }
}
