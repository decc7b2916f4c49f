//! Industry labor dynamics and the person-level lists behind local
//! employment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::industry::IndustryId;
use crate::population::Population;

/// In-person or from-home worker list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorkType {
    InPerson = 0,
    FromHome = 1,
}

/// l^d = l_{t−1} + (l_0/x_0)(d_{t−1} − cap_{t−1}).
pub fn labor_demand(l_prev: f64, l0: f64, x0: f64, d_prev: f64, cap_prev: f64) -> f64 {
    if x0 <= 0.0 {
        return l_prev;
    }
    l_prev + l0 / x0 * (d_prev - cap_prev)
}

/// In-person target capped by the closure, from-home target by its initial
/// level; both floored at zero.
pub fn labor_targets(l_pd: f64, l_hd: f64, s: f64, l_p0: f64, l_h0: f64) -> (f64, f64) {
    let p_max = (1.0 - s) * l_p0;
    (p_max.min(l_pd).max(0.0), l_h0.min(l_hd).max(0.0))
}

/// Moves a fraction γ_H (hiring) or γ_F (firing) of the way to the target.
pub fn update_labor(l_prev: f64, target: f64, gamma_h: f64, gamma_f: f64) -> f64 {
    let gap = target - l_prev;
    let gamma = if gap >= 0.0 { gamma_h } else { gamma_f };
    l_prev + gamma * gap
}

/// Employed and fired person lists per industry and work type. Fired persons
/// can only be rehired into the industry and list they left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaborMarket {
    employed: Vec<[Vec<u32>; 2]>,
    fired: Vec<[Vec<u32>; 2]>,
    /// Current employment status per person.
    pub status: Vec<bool>,
}

/// Persons moved by one adjustment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Moves {
    pub fired: Vec<u32>,
    pub hired: Vec<u32>,
}

impl LaborMarket {
    pub fn new(pop: &Population, n_industries: usize) -> Self {
        let mut employed: Vec<[Vec<u32>; 2]> = vec![Default::default(); n_industries];
        for p in &pop.persons {
            if let (true, Some(k)) = (p.employed, p.industry) {
                let t = if p.can_wfh { WorkType::FromHome } else { WorkType::InPerson };
                employed[k][t as usize].push(p.person_id);
            }
        }
        Self {
            fired: vec![Default::default(); n_industries],
            employed,
            status: pop.persons.iter().map(|p| p.employed).collect(),
        }
    }

    pub fn n_employed(&self, k: IndustryId, t: WorkType) -> usize {
        self.employed[k][t as usize].len()
    }

    pub fn n_fired(&self, k: IndustryId, t: WorkType) -> usize {
        self.fired[k][t as usize].len()
    }

    pub fn employed(&self, k: IndustryId, t: WorkType) -> &[u32] {
        &self.employed[k][t as usize]
    }

    pub fn fired(&self, k: IndustryId, t: WorkType) -> &[u32] {
        &self.fired[k][t as usize]
    }

    /// Fires `-delta` (delta < 0) or rehires `delta` (delta > 0) persons,
    /// chosen uniformly at random. Requests beyond the list size are clamped.
    pub fn adjust<R: Rng + ?Sized>(
        &mut self,
        k: IndustryId,
        t: WorkType,
        delta: i64,
        rng: &mut R,
        moves: &mut Moves,
    ) {
        let ti = t as usize;
        let fire = delta < 0;
        let (from, to) = if fire {
            (&mut self.employed[k][ti], &mut self.fired[k][ti])
        } else {
            (&mut self.fired[k][ti], &mut self.employed[k][ti])
        };
        let want = delta.unsigned_abs() as usize;
        if want > from.len() {
            log::warn!(
                "industry {k}: requested {want} moves but only {} available",
                from.len()
            );
        }
        for _ in 0..want.min(from.len()) {
            let idx = rng.random_range(0..from.len());
            let id = from.swap_remove(idx);
            to.push(id);
            self.status[id as usize] = !fire;
            if fire {
                moves.fired.push(id);
            } else {
                moves.hired.push(id);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labor_demand_examples() {
        assert_eq!(labor_demand(100.0, 100.0, 200.0, 200.0, 200.0), 100.0);
        assert_eq!(labor_demand(100.0, 100.0, 200.0, 180.0, 200.0), 90.0);
        assert!(labor_demand(100.0, 100.0, 200.0, 210.0, 200.0) > 100.0);
    }

    #[test]
    fn targets_respect_closure_and_initials() {
        assert_eq!(labor_targets(50.0, 5.0, 1.0, 80.0, 20.0).0, 0.0);
        assert_eq!(labor_targets(500.0, 500.0, 0.0, 80.0, 20.0), (80.0, 20.0));
        let (p, _) = labor_targets(500.0, 0.0, 0.35, 100.0, 0.0);
        assert!((p - 65.0).abs() < 1e-12);
    }

    #[test]
    fn update_examples() {
        assert_eq!(update_labor(10.0, 4.0, 0.1, 1.0), 4.0);
        assert_eq!(update_labor(10.0, 20.0, 0.1, 1.0), 11.0);
        assert_eq!(update_labor(7.0, 7.0, 0.3, 0.3), 7.0);
    }
}
