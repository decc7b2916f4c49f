use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiParams {
    /// Transmission rate of symptomatic infectious persons per unit weight.
    pub beta: f64,
    /// Relative infectiousness of asymptomatic persons.
    pub r: f64,
    /// Share of transmission that happens before symptom onset.
    pub k_presym: f64,
    /// Incubation period, days.
    pub epsilon: u32,
    /// Pre-symptomatic infectious period, days.
    pub gamma: u32,
    /// Mean infectious period before removal, days.
    pub mu: f64,
    /// Days from removal to death.
    pub delta_death: f64,
    /// Delay between a death and its report, days.
    pub t_notify: u32,
    /// Transmission multiplier for outdoor community contacts.
    pub theta: f64,
    /// Upper-exclusive edges of the severity age bands.
    pub severity_edges: Vec<u8>,
    /// Probability of developing symptoms, per severity band.
    pub p_symptomatic: Vec<f64>,
    /// Infection fatality ratio per severity band, as a probability.
    pub ifr: Vec<f64>,
    /// Upper-exclusive edges of the susceptibility age bands.
    pub susceptibility_edges: Vec<u8>,
    pub susceptibility: Vec<f64>,
}

impl Default for EpiParams {
    fn default() -> Self {
        Self {
            beta: 0.05,
            r: 0.5,
            k_presym: 0.5,
            epsilon: 5,
            gamma: 2,
            mu: 2.5,
            delta_death: 12.5,
            t_notify: 7,
            theta: 0.05,
            severity_edges: vec![10, 20, 30, 40, 50, 60, 70, 80],
            p_symptomatic: vec![0.181, 0.181, 0.225, 0.225, 0.300, 0.300, 0.360, 0.360, 0.646],
            ifr: [0.00161, 0.00695, 0.0309, 0.0844, 0.161, 0.595, 1.93, 4.28, 7.80]
                .map(|pct| pct / 100.0)
                .to_vec(),
            susceptibility_edges: vec![19],
            susceptibility: vec![0.56, 1.0],
        }
    }
}

fn band(edges: &[u8], age: u8) -> usize {
    edges.partition_point(|&e| e <= age)
}

impl EpiParams {
    pub fn severity_band(&self, age: u8) -> usize {
        band(&self.severity_edges, age)
    }

    pub fn p_symptomatic_at(&self, age: u8) -> f64 {
        self.p_symptomatic[self.severity_band(age)]
    }

    pub fn susceptibility_at(&self, age: u8) -> f64 {
        self.susceptibility[band(&self.susceptibility_edges, age)]
    }

    /// Death probability of a symptomatic case: IFR / p.
    pub fn death_given_symptomatic(&self, age: u8) -> f64 {
        let b = self.severity_band(age);
        self.ifr[b] / self.p_symptomatic[b]
    }

    /// Pre-symptomatic rate chosen so that the expected share of transmission
    /// before symptom onset equals `k_presym`:
    /// β_S γ = k/(1−k) · β̄ μ with β̄ = β (p̄ + r (1 − p̄)).
    pub fn beta_presym(&self, mean_p_symptomatic: f64) -> f64 {
        let p = mean_p_symptomatic;
        let beta_bar = self.beta * (p + self.r * (1.0 - p));
        self.k_presym / (1.0 - self.k_presym) * beta_bar * self.mu / self.gamma as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::config(format!("epidemic.{field}"), why));
        if !(self.beta >= 0.0) {
            return bad("beta", "must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.r) {
            return bad("r", "must be in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.k_presym) {
            return bad("k_presym", "must be in [0, 1)");
        }
        if self.gamma == 0 || self.gamma > self.epsilon {
            return bad("gamma", "must be in [1, epsilon]");
        }
        if !(self.mu >= 1.0) {
            return bad("mu", "mean infectious period must be at least one day");
        }
        if !(self.delta_death >= 0.0) {
            return bad("delta_death", "must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad("theta", "must be in [0, 1]");
        }
        let nb = self.severity_edges.len() + 1;
        if self.p_symptomatic.len() != nb || self.ifr.len() != nb {
            return bad("p_symptomatic", "one value per severity band required");
        }
        if self.severity_edges.windows(2).any(|w| w[0] >= w[1]) {
            return bad("severity_edges", "must be increasing");
        }
        for (b, (&p, &ifr)) in self.p_symptomatic.iter().zip(&self.ifr).enumerate() {
            if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&ifr) {
                return bad("ifr", "probabilities must be in [0, 1]");
            }
            if ifr > p {
                return Err(Error::config(
                    "epidemic.ifr",
                    format!("band {b}: IFR {ifr} exceeds symptomatic probability {p}"),
                ));
            }
        }
        if self.susceptibility.len() != self.susceptibility_edges.len() + 1
            || self.susceptibility.iter().any(|c| !(0.0..=1.0).contains(c))
        {
            return bad("susceptibility", "one value in [0, 1] per band required");
        }
        Ok(())
    }
}
