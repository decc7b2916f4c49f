//! Income assignment: lognormal draws per industry-occupation pair followed
//! by a sequence of rescaling stages.

use std::collections::HashMap;

use rand_distr::{Distribution, LogNormal};

use super::{band_of, Population, PopulationConfig, RetireeIncome};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Standard-normal deviates at probabilities 0.10, 0.25, 0.50, 0.75, 0.90.
pub const QUANTILE_Z: [f64; 5] = [
    -1.281_551_565_544_600_4,
    -0.674_489_750_196_081_7,
    0.0,
    0.674_489_750_196_081_7,
    1.281_551_565_544_600_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
    /// Sum of squared residuals of the log-quantile regression.
    pub residual: f64,
}

impl LognormalFit {
    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }
}

/// Least-squares fit of `ln q = mu + sigma z` over the five quantiles.
pub fn fit_lognormal_quantiles(q: &[f64; 5]) -> Result<LognormalFit> {
    if let Some(bad) = q.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("non-positive quantile {bad}")));
    }
    let y: Vec<f64> = q.iter().map(|v| v.ln()).collect();
    // The z grid is symmetric, so mean(z) = 0 and the OLS slope reduces to
    // Σ z y / Σ z².
    let mu = y.iter().sum::<f64>() / 5.0;
    let szz: f64 = QUANTILE_Z.iter().map(|z| z * z).sum();
    let szy: f64 = QUANTILE_Z.iter().zip(&y).map(|(z, y)| z * y).sum();
    let sigma = szy / szz;
    if !(sigma > 1e-9) {
        return Err(Error::Domain(format!(
            "quantiles {q:?} give non-positive dispersion {sigma}"
        )));
    }
    let residual = QUANTILE_Z
        .iter()
        .zip(&y)
        .map(|(z, y)| (y - mu - sigma * z).powi(2))
        .sum();
    Ok(LognormalFit { mu, sigma, residual })
}

/// Runs every enabled income stage in order.
pub fn assign_income(pop: &mut Population, config: &PopulationConfig, seed: u64) -> Result<()> {
    draw_pair_incomes(pop, config, seed)?;
    if !config.earnings_bands.is_empty() {
        rescale_by_age(pop, config);
    }
    let tract_factor = match &config.tract_mean_household_income {
        Some(targets) => rescale_by_tract(pop, targets),
        None => vec![1.0; config.n_tracts()],
    };
    if let Some(ret) = &config.retiree_income {
        assign_retiree_income(pop, ret, &tract_factor, seed)?;
    }
    if let Some(target) = config.target_mean_income {
        normalize_mean(pop, target);
    }
    Ok(())
}

/// Employed persons draw from the lognormal of their (industry, occupation)
/// pair; everyone else starts at zero.
pub fn draw_pair_incomes(pop: &mut Population, config: &PopulationConfig, seed: u64) -> Result<()> {
    let mut fits: HashMap<(usize, usize), LogNormal<f64>> = HashMap::new();
    for q in &config.income_quantiles {
        let fit = fit_lognormal_quantiles(&q.quantiles).map_err(|e| {
            Error::config(
                "income_quantiles",
                format!("pair ({}, {}): {e}", q.industry, q.occupation),
            )
        })?;
        let dist = LogNormal::new(fit.mu, fit.sigma).map_err(|e| Error::Domain(e.to_string()))?;
        fits.insert((q.industry, q.occupation), dist);
    }
    let mut rng = rng::stream(seed, Stream::Income, 0);
    for p in &mut pop.persons {
        p.income = 0.0;
        if let (true, Some(k), Some(o)) = (p.employed, p.industry, p.occupation) {
            let dist = fits.get(&(k, o)).ok_or_else(|| {
                Error::config(
                    "income_quantiles",
                    format!("no quantiles for industry {k}, occupation {o}"),
                )
            })?;
            p.income = dist.sample(&mut rng);
        }
    }
    Ok(())
}

/// Rescales employed incomes so each earnings band's mean is proportional to
/// its scalar while the overall employed mean is unchanged.
pub fn rescale_by_age(pop: &mut Population, config: &PopulationConfig) {
    let nb = config.earnings_bands.len();
    let mut sum = vec![0.0; nb];
    let mut count = vec![0usize; nb];
    for p in pop.persons.iter().filter(|p| p.employed) {
        if let Some(b) = band_of(&config.earnings_bands, p.age) {
            sum[b] += p.income;
            count[b] += 1;
        }
    }
    let total: f64 = sum.iter().sum();
    let weighted: f64 = (0..nb)
        .map(|b| count[b] as f64 * config.earnings_scalars[b])
        .sum();
    if total <= 0.0 || weighted <= 0.0 {
        return;
    }
    let c = total / weighted;
    let factor: Vec<f64> = (0..nb)
        .map(|b| {
            if sum[b] > 0.0 {
                c * config.earnings_scalars[b] * count[b] as f64 / sum[b]
            } else {
                1.0
            }
        })
        .collect();
    for p in pop.persons.iter_mut().filter(|p| p.employed) {
        if let Some(b) = band_of(&config.earnings_bands, p.age) {
            p.income *= factor[b];
        }
    }
}

/// Mean household income (summed member income) per tract.
pub fn tract_mean_household_income(pop: &Population, n_tracts: usize) -> Vec<f64> {
    let mut sum = vec![0.0; n_tracts];
    let mut count = vec![0usize; n_tracts];
    for h in &pop.households {
        sum[h.tract_id as usize] += pop.household_income(h);
        count[h.tract_id as usize] += 1;
    }
    sum.iter()
        .zip(&count)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

/// Scales incomes within each tract to hit the target mean household income.
/// Returns the factor applied per tract; tracts without income keep factor 1.
pub fn rescale_by_tract(pop: &mut Population, targets: &[f64]) -> Vec<f64> {
    let current = tract_mean_household_income(pop, targets.len());
    let factor: Vec<f64> = current
        .iter()
        .zip(targets)
        .enumerate()
        .map(|(t, (&c, &target))| {
            if c > 0.0 {
                target / c
            } else {
                log::warn!("tract {t} has no income to rescale");
                1.0
            }
        })
        .collect();
    for p in &mut pop.persons {
        p.income *= factor[p.tract_id as usize];
    }
    factor
}

/// Non-employed persons at or above the retirement age draw from the
/// lognormal fitted to all employed incomes, shifted by their tract's
/// rescaling factor. A common multiplier then sets the mean income of all
/// persons aged `min_age`+ to `ratio` times that of the reference band.
pub fn assign_retiree_income(
    pop: &mut Population,
    ret: &RetireeIncome,
    tract_factor: &[f64],
    seed: u64,
) -> Result<()> {
    let logs: Vec<f64> = pop
        .persons
        .iter()
        .filter(|p| p.employed && p.income > 0.0)
        .map(|p| p.income.ln())
        .collect();
    if logs.len() < 2 {
        return Ok(());
    }
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / (n - 1.0);
    let dist = LogNormal::new(mu, var.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    // Undo the tract tilt already present in the employed incomes so the
    // shared draw is tract-neutral before re-applying the factor.
    let mean_factor = tract_factor.iter().sum::<f64>() / tract_factor.len() as f64;

    let mut rng = rng::stream(seed, Stream::Income, 1);
    let mut retirees = Vec::new();
    for p in &mut pop.persons {
        if !p.employed && p.age >= ret.min_age {
            p.income = dist.sample(&mut rng) * tract_factor[p.tract_id as usize] / mean_factor;
            retirees.push(p.person_id as usize);
        }
    }
    if retirees.is_empty() {
        return Ok(());
    }

    let (mut ref_sum, mut ref_n) = (0.0, 0usize);
    let (mut old_employed, mut old_n) = (0.0, 0usize);
    for p in &pop.persons {
        if ret.reference_band.contains(p.age) {
            ref_sum += p.income;
            ref_n += 1;
        }
        if p.age >= ret.min_age {
            old_n += 1;
            if p.employed {
                old_employed += p.income;
            }
        }
    }
    if ref_n == 0 {
        log::warn!("no persons in the retiree reference band; retiree incomes left unscaled");
        return Ok(());
    }
    let raw: f64 = retirees.iter().map(|&i| pop.persons[i].income).sum();
    let want = ret.ratio * ref_sum / ref_n as f64 * old_n as f64 - old_employed;
    let c = if raw > 0.0 { (want / raw).max(0.0) } else { 0.0 };
    if want < 0.0 {
        log::warn!("employed persons above retirement age already exceed the target mean");
    }
    for i in retirees {
        pop.persons[i].income *= c;
    }
    Ok(())
}

/// Scales all incomes so the mean over persons with positive income equals
/// `target`.
pub fn normalize_mean(pop: &mut Population, target: f64) {
    let (sum, n) = pop
        .persons
        .iter()
        .filter(|p| p.income > 0.0)
        .fold((0.0, 0usize), |(s, n), p| (s + p.income, n + 1));
    if n == 0 {
        return;
    }
    let f = target / (sum / n as f64);
    for p in &mut pop.persons {
        p.income *= f;
    }
}
