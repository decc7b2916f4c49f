//! Daily economic dynamics for the local region (person-level labor) and the
//! rest of the country (aggregate labor): labor adjustment, hiring and
//! firing, consumption demand, orders, production and pro-rata rationing.

mod labor;

use serde::{Deserialize, Serialize};

pub use labor::{labor_demand, labor_targets, update_labor, LaborMarket, Moves, WorkType};

use crate::econio::{TwoRegionIO, C, G, LOCAL, OTHER, REST};
use crate::error::{Error, Result};
use crate::population::{GroupScheme, Population};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    pub gamma_h: f64,
    pub gamma_f: f64,
    /// Consumption cut of a household whose head is unemployed.
    pub phi_u: f64,
    /// Share of money saved on customer-facing goods spent elsewhere.
    pub delta_s: f64,
}

impl Default for EconParams {
    fn default() -> Self {
        Self {
            gamma_h: 0.1,
            gamma_f: 0.1,
            phi_u: 0.3,
            delta_s: 0.5,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v, lo_open) in [
            ("gamma_h", self.gamma_h, true),
            ("gamma_f", self.gamma_f, true),
            ("phi_u", self.phi_u, false),
            ("delta_s", self.delta_s, false),
        ] {
            let ok = if lo_open { v > 0.0 && v <= 1.0 } else { (0.0..=1.0).contains(&v) };
            if !ok {
                return Err(Error::config(format!("economy.{name}"), "out of range"));
            }
        }
        Ok(())
    }
}

/// Per-household spending weights of each consumption group on each industry.
/// Only relative values within an industry column matter: the column is
/// rescaled so groups add up to the regional consumption of that industry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionTable {
    /// group × industry
    pub spend: Vec<Vec<f64>>,
}

/// Exogenous inputs of one economic step, all known before the step starts.
#[derive(Debug, Clone, Copy)]
pub struct EconInputs<'a> {
    /// Consumption reduction of customer-facing goods from fear, local deaths.
    pub lambda_local: f64,
    /// Same, driven by deaths in the rest of the country.
    pub lambda_rest: f64,
    /// Supply shock per industry, local and rest.
    pub supply: [&'a [f64]; 2],
    /// Government demand shock 𝒢.
    pub gov: f64,
    /// Other final demand shock 𝒮.
    pub other: f64,
}

/// Outcome of pro-rata rationing of one industry.
#[derive(Debug, Clone, PartialEq)]
pub struct Rationing {
    pub demand: f64,
    pub output: f64,
    /// Share of each positive claim that is delivered.
    pub ratio: f64,
    pub realized: Vec<f64>,
}

/// Share of each positive claim delivered when `output` is available and
/// negative claims are served in full.
pub fn pro_rata_ratio(pos: f64, neg: f64, output: f64) -> f64 {
    if pos <= 0.0 {
        return 1.0;
    }
    ((output - neg) / pos).clamp(0.0, 1.0)
}

/// x = min(d, cap) shared pro rata across positive claims. Total demand at
/// or below zero is a degenerate case: output is clamped to zero.
pub fn produce_and_ration(claims: &[f64], cap: f64) -> Rationing {
    let pos: f64 = claims.iter().filter(|&&c| c > 0.0).sum();
    let neg: f64 = claims.iter().filter(|&&c| c < 0.0).sum();
    let demand = pos + neg;
    let mut output = demand.min(cap);
    if output < 0.0 {
        log::debug!("non-positive demand {demand}; output clamped to zero");
        output = 0.0;
    }
    let ratio = pro_rata_ratio(pos, neg, output);
    let realized = claims
        .iter()
        .map(|&c| if c > 0.0 { c * ratio } else { c })
        .collect();
    Rationing {
        demand,
        output,
        ratio,
        realized,
    }
}

/// Pandemic preference of a group: customer-facing goods scaled by 1 − Λ,
/// others raised so that a share Δs of the money saved is spent on them.
/// `saved` is Σ_k Λ_k c_{k,0} and `non_cf_base` is Σ_k (1 − τ_k) c_{k,0}.
pub fn non_customer_facing_preference(delta_s: f64, saved: f64, non_cf_base: f64) -> f64 {
    if non_cf_base <= 0.0 {
        1.0
    } else {
        1.0 + delta_s * saved / non_cf_base
    }
}

/// Local household consumption demand per group and industry,
/// c_{g,k,0} × preference × (1 − φ^U · unemployed heads / households).
pub fn consumption_demand(
    base: &[Vec<f64>],
    customer_facing: &[bool],
    lambda: f64,
    unemployed_heads: &[usize],
    households: &[usize],
    params: &EconParams,
) -> Vec<Vec<f64>> {
    base.iter()
        .enumerate()
        .map(|(g, row)| {
            let saved: f64 = row
                .iter()
                .zip(customer_facing)
                .filter(|(_, &cf)| cf)
                .map(|(c, _)| lambda * c)
                .sum();
            let non_cf: f64 = row
                .iter()
                .zip(customer_facing)
                .filter(|(_, &cf)| !cf)
                .map(|(c, _)| c)
                .sum();
            let up = non_customer_facing_preference(params.delta_s, saved, non_cf);
            let income = if households[g] > 0 {
                1.0 - params.phi_u * unemployed_heads[g] as f64 / households[g] as f64
            } else {
                1.0
            };
            row.iter()
                .zip(customer_facing)
                .map(|(c, &cf)| c * if cf { 1.0 - lambda } else { up } * income)
                .collect()
        })
        .collect()
}

/// State and flows of one region-industry block on one day.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionDay {
    pub l_p: Vec<f64>,
    pub l_h: Vec<f64>,
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    pub cap: Vec<f64>,
    pub va: Vec<f64>,
    /// Realized intermediate sales (row sums over all buyers).
    pub z_sales: Vec<f64>,
    /// Realized sales to final demand, per component.
    pub c: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    /// Consumption demand by origin industry before rationing.
    pub c_demand: Vec<f64>,
}

/// Economic record of one simulated day.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EconDay {
    pub region: [RegionDay; 2],
    /// Realized consumption of local households by household income band,
    /// and the pre-pandemic amount for the same band.
    pub consumption_by_band: Vec<f64>,
    pub fired: usize,
    pub hired: usize,
}

#[derive(Debug, Clone)]
pub struct Economy {
    pub io: TwoRegionIO,
    pub params: EconParams,
    pub customer_facing: Vec<bool>,
    n: usize,
    pub l_p0: [Vec<f64>; 2],
    pub l_h0: [Vec<f64>; 2],
    pub x0: [Vec<f64>; 2],
    pub l_p: [Vec<f64>; 2],
    pub l_h: [Vec<f64>; 2],
    pub x: [Vec<f64>; 2],
    pub d: [Vec<f64>; 2],
    pub cap: [Vec<f64>; 2],
    /// Local household demand per group and industry, both origins.
    pub group_base: Vec<Vec<f64>>,
    /// Share of local households' demand for k met by local producers.
    local_share: Vec<f64>,
    pub households_per_group: Vec<usize>,
    pub unemployed_heads: Vec<usize>,
    /// Group of the household a person heads, if the head was employed at
    /// the start.
    head_group: Vec<Option<usize>>,
    /// Household income band of the household a person heads.
    head_band: Vec<usize>,
    /// households per (group, band, head unemployed)
    cells: Vec<Vec<[usize; 2]>>,
    n_bands: usize,
    pub baseline_by_band: Vec<f64>,
}

/// Household income band edges that split households into `n` equal-count
/// bands.
pub fn quantile_edges(values: &[f64], n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    (1..n)
        .map(|q| {
            let idx = (q * v.len()) / n;
            v.get(idx).copied().unwrap_or(f64::INFINITY)
        })
        .collect()
}

impl Economy {
    pub fn new(
        io: TwoRegionIO,
        pop: &Population,
        groups: &GroupScheme,
        table: &ConsumptionTable,
        customer_facing: Vec<bool>,
        params: EconParams,
        n_income_bands: usize,
    ) -> Result<Self> {
        params.validate()?;
        let n = io.n();
        if customer_facing.len() != n {
            return Err(Error::config("industries", "one customer-facing flag per industry required"));
        }
        let ng = groups.n_groups();
        if table.spend.len() != ng || table.spend.iter().any(|r| r.len() != n) {
            return Err(Error::config(
                "consumption_table",
                format!("must be {ng} groups × {n} industries"),
            ));
        }
        if table.spend.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::config("consumption_table", "negative spending"));
        }

        // local labor from the synthetic population
        let mut l_p0_local = vec![0.0; n];
        let mut l_h0_local = vec![0.0; n];
        for p in &pop.persons {
            if let (true, Some(k)) = (p.employed, p.industry) {
                if p.can_wfh {
                    l_h0_local[k] += 1.0;
                } else {
                    l_p0_local[k] += 1.0;
                }
            }
        }
        // rest-of-country labor in proportion to output, at the local
        // labor-to-output ratio of each industry
        let ratios: Vec<Option<f64>> = (0..n)
            .map(|k| {
                let l = l_p0_local[k] + l_h0_local[k];
                (l > 0.0 && io.x[LOCAL][k] > 0.0).then(|| l / io.x[LOCAL][k])
            })
            .collect();
        let total_l: f64 = l_p0_local.iter().chain(&l_h0_local).sum();
        let total_x: f64 = io.x[LOCAL].iter().sum();
        let fallback = if total_x > 0.0 { total_l / total_x } else { 0.0 };
        let mut l_p0_rest = vec![0.0; n];
        let mut l_h0_rest = vec![0.0; n];
        for k in 0..n {
            let l = io.x[REST][k] * ratios[k].unwrap_or(fallback);
            let local = l_p0_local[k] + l_h0_local[k];
            let h_share = if local > 0.0 { l_h0_local[k] / local } else { 0.0 };
            l_h0_rest[k] = l * h_share;
            l_p0_rest[k] = l - l_h0_rest[k];
        }

        // households per group and household income bands
        let mut households_per_group = vec![0usize; ng];
        let incomes: Vec<f64> = pop.households.iter().map(|h| pop.household_income(h)).collect();
        let edges = quantile_edges(&incomes, n_income_bands.max(1));
        let band_of = |v: f64| edges.partition_point(|&e| e <= v);
        let mut head_group = vec![None; pop.len()];
        let mut head_band = vec![0; pop.len()];
        let mut cells = vec![vec![[0usize; 2]; n_income_bands.max(1)]; ng];
        for (h, inc) in pop.households.iter().zip(&incomes) {
            households_per_group[h.group_id] += 1;
            let b = band_of(*inc);
            cells[h.group_id][b][0] += 1;
            head_band[h.head_id as usize] = b;
            if pop.persons[h.head_id as usize].employed {
                head_group[h.head_id as usize] = Some(h.group_id);
            }
        }

        let local_demand: Vec<f64> = (0..n)
            .map(|k| io.f[LOCAL][LOCAL][k][C] + io.f[REST][LOCAL][k][C])
            .collect();
        let local_share: Vec<f64> = (0..n)
            .map(|k| {
                if local_demand[k] != 0.0 {
                    io.f[LOCAL][LOCAL][k][C] / local_demand[k]
                } else {
                    1.0
                }
            })
            .collect();
        let mut group_base = vec![vec![0.0; n]; ng];
        for k in 0..n {
            let w: Vec<f64> = (0..ng)
                .map(|g| households_per_group[g] as f64 * table.spend[g][k])
                .collect();
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                if local_demand[k] != 0.0 {
                    return Err(Error::config(
                        "consumption_table",
                        format!("no group spends on industry {k} but locals consume it"),
                    ));
                }
                continue;
            }
            for g in 0..ng {
                group_base[g][k] = local_demand[k] * w[g] / total;
            }
        }

        let x0 = io.x.clone();
        let mut econ = Self {
            customer_facing,
            n,
            l_p: [l_p0_local.clone(), l_p0_rest.clone()],
            l_h: [l_h0_local.clone(), l_h0_rest.clone()],
            l_p0: [l_p0_local, l_p0_rest],
            l_h0: [l_h0_local, l_h0_rest],
            x: x0.clone(),
            d: x0.clone(),
            cap: x0.clone(),
            x0,
            group_base,
            local_share,
            unemployed_heads: vec![0; ng],
            households_per_group,
            head_group,
            head_band,
            cells,
            n_bands: n_income_bands.max(1),
            baseline_by_band: Vec::new(),
            params,
            io,
        };
        econ.baseline_by_band = econ.consumption_by_band(&[], None);
        Ok(econ)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    /// Total employment of a region.
    pub fn employment(&self, r: usize) -> f64 {
        self.l_p[r].iter().chain(&self.l_h[r]).sum()
    }

    pub fn initial_employment(&self, r: usize) -> f64 {
        self.l_p0[r].iter().chain(&self.l_h0[r]).sum()
    }

    /// Consumption per household income band. Without `demand` this is the
    /// pre-pandemic amount; otherwise `demand[g]` holds the group's per-
    /// industry preference multipliers and `ratio` the delivered share per
    /// industry.
    fn consumption_by_band(&self, pref: &[Vec<f64>], ratio: Option<&[f64]>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_bands];
        for (g, row) in self.group_base.iter().enumerate() {
            let hh = self.households_per_group[g];
            if hh == 0 {
                continue;
            }
            for (b, cell) in self.cells[g].iter().enumerate() {
                for (u, &count) in cell.iter().enumerate() {
                    if count == 0 {
                        continue;
                    }
                    let income = if u == 1 { 1.0 - self.params.phi_u } else { 1.0 };
                    let per_hh: f64 = row
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            let p = pref.get(g).map_or(1.0, |r| r[k]);
                            let r = ratio.map_or(1.0, |r| r[k]);
                            c * p * r
                        })
                        .sum::<f64>()
                        / hh as f64;
                    let per_hh = if ratio.is_some() { per_hh * income } else { per_hh };
                    out[b] += per_hh * count as f64;
                }
            }
        }
        out
    }

    fn record_moves(&mut self, moves: &Moves) {
        for &id in &moves.fired {
            if let Some(g) = self.head_group[id as usize] {
                self.unemployed_heads[g] += 1;
                let b = self.head_band[id as usize];
                self.cells[g][b][0] -= 1;
                self.cells[g][b][1] += 1;
            }
        }
        for &id in &moves.hired {
            if let Some(g) = self.head_group[id as usize] {
                self.unemployed_heads[g] -= 1;
                let b = self.head_band[id as usize];
                self.cells[g][b][1] -= 1;
                self.cells[g][b][0] += 1;
            }
        }
    }

    /// Stages 1 and 2: labor targets from yesterday's demand and capacity,
    /// adjustment, and the matching hires and fires in the local lists.
    pub fn labor_stage(
        &mut self,
        inputs: &EconInputs,
        market: &mut LaborMarket,
        seed: u64,
        day: i32,
    ) -> Moves {
        let p = self.params.clone();
        let mut moves = Moves::default();
        let mut round_rng = rng::stream(seed, Stream::Labor, day as i64 as u64);
        let mut pick_rng = rng::stream(seed, Stream::Hiring, day as i64 as u64);
        for r in [LOCAL, REST] {
            for k in 0..self.n {
                let l0 = self.l_p0[r][k] + self.l_h0[r][k];
                let (x0, d_prev, cap_prev) = (self.x0[r][k], self.d[r][k], self.cap[r][k]);
                let l_pd = labor_demand(self.l_p[r][k], self.l_p0[r][k], x0, d_prev, cap_prev);
                let l_hd = labor_demand(self.l_h[r][k], self.l_h0[r][k], x0, d_prev, cap_prev);
                let (t_p, t_h) = labor_targets(
                    l_pd,
                    l_hd,
                    inputs.supply[r][k],
                    self.l_p0[r][k],
                    self.l_h0[r][k],
                );
                let new_p = update_labor(self.l_p[r][k], t_p, p.gamma_h, p.gamma_f);
                let new_h = update_labor(self.l_h[r][k], t_h, p.gamma_h, p.gamma_f);
                if r == REST || l0 == 0.0 {
                    self.l_p[r][k] = new_p;
                    self.l_h[r][k] = new_h;
                    continue;
                }
                for (t, new, target) in [(WorkType::InPerson, new_p, t_p), (WorkType::FromHome, new_h, t_h)] {
                    let (cur, init) = match t {
                        WorkType::InPerson => (self.l_p[r][k], self.l_p0[r][k]),
                        WorkType::FromHome => (self.l_h[r][k], self.l_h0[r][k]),
                    };
                    let step = rng::stochastic_round(new - cur, &mut round_rng);
                    // never step past the target by more than the rounding unit
                    let lo = cur.min(target).floor();
                    let hi = cur.max(target).ceil().min(init);
                    let next = (cur + step as f64).clamp(lo.max(0.0), hi);
                    let delta = (next - cur) as i64;
                    if delta != 0 {
                        market.adjust(k, t, delta, &mut pick_rng, &mut moves);
                    }
                    let count = market.n_employed(k, t) as f64;
                    match t {
                        WorkType::InPerson => self.l_p[r][k] = count,
                        WorkType::FromHome => self.l_h[r][k] = count,
                    }
                }
            }
        }
        self.record_moves(&moves);
        moves
    }

    /// Stages 3 and 4: demand, production and rationing.
    pub fn production_stage(&mut self, inputs: &EconInputs) -> EconDay {
        let n = self.n;
        let tau = &self.customer_facing;
        let p = &self.params;
        let io = &self.io;

        // local households
        let group_demand = consumption_demand(
            &self.group_base,
            tau,
            inputs.lambda_local,
            &self.unemployed_heads,
            &self.households_per_group,
            p,
        );
        let mut local_c = vec![0.0; n];
        for row in &group_demand {
            for (k, v) in row.iter().enumerate() {
                local_c[k] += v;
            }
        }

        // rest-of-country households, buying from both regions
        let l_rest = self.employment(REST);
        let l0_rest = self.initial_employment(REST);
        let income_rest = if l0_rest > 0.0 {
            1.0 - p.phi_u * (l0_rest - l_rest) / l0_rest
        } else {
            1.0
        };
        let lam = [inputs.lambda_local, inputs.lambda_rest];
        let (mut saved, mut non_cf) = (0.0, 0.0);
        for k in 0..n {
            for o in [LOCAL, REST] {
                let c0 = io.f[o][REST][k][C];
                if tau[k] {
                    saved += lam[o] * c0;
                } else {
                    non_cf += c0;
                }
            }
        }
        let up_rest = non_customer_facing_preference(p.delta_s, saved, non_cf);

        // claims per origin region and industry
        let mut c_claim = [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]];
        for k in 0..n {
            c_claim[LOCAL][LOCAL][k] = local_c[k] * self.local_share[k];
            c_claim[REST][LOCAL][k] = local_c[k] * (1.0 - self.local_share[k]);
            for o in [LOCAL, REST] {
                let pref = if tau[k] { 1.0 - lam[o] } else { up_rest };
                c_claim[o][REST][k] = io.f[o][REST][k][C] * pref * income_rest;
            }
        }
        let g_mult = 1.0 - inputs.gov;
        let f_mult = 1.0 - inputs.other;

        let mut out = EconDay::default();
        let mut ratio = [vec![1.0; n], vec![1.0; n]];
        let mut new_x = [vec![0.0; n], vec![0.0; n]];
        let mut new_d = [vec![0.0; n], vec![0.0; n]];
        let mut new_cap = [vec![0.0; n], vec![0.0; n]];
        for o in [LOCAL, REST] {
            let rd = &mut out.region[o];
            *rd = RegionDay {
                l_p: self.l_p[o].clone(),
                l_h: self.l_h[o].clone(),
                ..Default::default()
            };
            for k in 0..n {
                let mut pos = 0.0;
                let mut neg = 0.0;
                let mut add = |v: f64| {
                    if v > 0.0 {
                        pos += v;
                    } else {
                        neg += v;
                    }
                };
                for d in [LOCAL, REST] {
                    for l in 0..n {
                        add(io.a[o][d][k][l] * self.x[d][l]);
                    }
                }
                for d in [LOCAL, REST] {
                    add(c_claim[o][d][k]);
                    add(g_mult * io.f[o][d][k][G]);
                    add(f_mult * io.f[o][d][k][OTHER]);
                }
                let demand = pos + neg;
                let l0 = self.l_p0[o][k] + self.l_h0[o][k];
                let cap = if l0 > 0.0 {
                    (self.l_p[o][k] + self.l_h[o][k]) / l0 * self.x0[o][k]
                } else {
                    self.x0[o][k]
                };
                let mut x = demand.min(cap);
                if x < 0.0 {
                    log::debug!("non-positive demand for {}:{k}", crate::econio::REGIONS[o]);
                    x = 0.0;
                }
                let r = pro_rata_ratio(pos, neg, x);
                let real = |v: f64| if v > 0.0 { v * r } else { v };
                ratio[o][k] = r;
                new_x[o][k] = x;
                new_d[o][k] = demand;
                new_cap[o][k] = cap;
                let mut z_sales = 0.0;
                for d in [LOCAL, REST] {
                    for l in 0..n {
                        z_sales += real(io.a[o][d][k][l] * self.x[d][l]);
                    }
                }
                let (mut cr, mut gr, mut fr) = (0.0, 0.0, 0.0);
                for d in [LOCAL, REST] {
                    cr += real(c_claim[o][d][k]);
                    gr += real(g_mult * io.f[o][d][k][G]);
                    fr += real(f_mult * io.f[o][d][k][OTHER]);
                }
                rd.z_sales.push(z_sales);
                rd.c.push(cr);
                rd.g.push(gr);
                rd.f.push(fr);
                rd.c_demand.push(c_claim[o][LOCAL][k] + c_claim[o][REST][k]);
            }
        }
        // value added: output minus realized purchases of inputs
        for d in [LOCAL, REST] {
            let va: Vec<f64> = (0..n)
                .map(|l| {
                    let inputs: f64 = [LOCAL, REST]
                        .iter()
                        .map(|&o| {
                            (0..n)
                                .map(|k| {
                                    let v = io.a[o][d][k][l] * self.x[d][l];
                                    if v > 0.0 { v * ratio[o][k] } else { v }
                                })
                                .sum::<f64>()
                        })
                        .sum();
                    new_x[d][l] - inputs
                })
                .collect();
            out.region[d].va = va;
        }

        // delivered share of local households' demand per industry
        let eff: Vec<f64> = (0..n)
            .map(|k| self.local_share[k] * ratio[LOCAL][k] + (1.0 - self.local_share[k]) * ratio[REST][k])
            .collect();
        let pref: Vec<Vec<f64>> = group_demand
            .iter()
            .zip(&self.group_base)
            .enumerate()
            .map(|(g, (dem, base))| {
                let income = if self.households_per_group[g] > 0 {
                    1.0 - p.phi_u * self.unemployed_heads[g] as f64 / self.households_per_group[g] as f64
                } else {
                    1.0
                };
                dem.iter()
                    .zip(base)
                    .map(|(d, b)| if *b > 0.0 && income > 0.0 { d / b / income } else { 1.0 })
                    .collect()
            })
            .collect();
        out.consumption_by_band = self.consumption_by_band(&pref, Some(&eff));

        for o in [LOCAL, REST] {
            out.region[o].x = new_x[o].clone();
            out.region[o].d = new_d[o].clone();
            out.region[o].cap = new_cap[o].clone();
        }
        self.x = new_x;
        self.d = new_d;
        self.cap = new_cap;
        out
    }

    /// One full economic day.
    pub fn step(
        &mut self,
        inputs: &EconInputs,
        market: &mut LaborMarket,
        seed: u64,
        day: i32,
    ) -> EconDay {
        let moves = self.labor_stage(inputs, market, seed, day);
        let mut out = self.production_stage(inputs);
        out.fired = moves.fired.len();
        out.hired = moves.hired.len();
        out
    }
}

#[cfg(test)]
mod tests;
