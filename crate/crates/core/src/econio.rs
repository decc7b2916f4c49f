//! Two-region input-output tables: make/use to industry-by-industry
//! conversion and Flegg location-quotient regionalization.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = Vec<Vec<f64>>;

/// Final demand components: private consumption, government, other.
pub const C: usize = 0;
pub const G: usize = 1;
pub const OTHER: usize = 2;
pub const COMPONENTS: [&str; 3] = ["c", "G", "f"];

pub const LOCAL: usize = 0;
pub const REST: usize = 1;
pub const REGIONS: [&str; 2] = ["local", "rest"];

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakeUse {
    pub industries: Vec<String>,
    /// industry × commodity
    pub make: Mat,
    /// commodity × industry
    pub use_table: Mat,
    pub commodity_output: Vec<f64>,
    pub industry_output: Vec<f64>,
    #[serde(default)]
    pub scrap: Vec<f64>,
    /// commodity × {c, G, other}
    pub final_demand: Vec<[f64; 3]>,
}

/// National industry-by-industry table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NationalIO {
    pub industries: Vec<String>,
    pub z: Mat,
    pub a: Mat,
    pub f: Vec<[f64; 3]>,
    pub x: Vec<f64>,
}

impl NationalIO {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Builds A from Z and x.
    pub fn from_flows(industries: Vec<String>, z: Mat, f: Vec<[f64; 3]>, x: Vec<f64>) -> Result<Self> {
        let a = technical_coefficients(&z, &x, &industries)?;
        Ok(Self {
            industries,
            z,
            a,
            f,
            x,
        })
    }
}

fn technical_coefficients(z: &Mat, x: &[f64], names: &[String]) -> Result<Mat> {
    for (l, &xl) in x.iter().enumerate() {
        if !(xl > 0.0) {
            return Err(Error::Domain(format!(
                "industry `{}` has zero output",
                names.get(l).map_or("?", |s| s.as_str())
            )));
        }
    }
    Ok(z.iter()
        .map(|row| row.iter().zip(x).map(|(zkl, xl)| zkl / xl).collect())
        .collect())
}

/// Industry technology assumption. With x = g − h, the transformation
/// T = diag(x/g) V q̂⁻¹ maps commodity flows to the industries that make them;
/// Z = T U, A = Z x̂⁻¹ and f = T f_c.
///
/// Without scrap T reduces to the market-share matrix V q̂⁻¹.
pub fn make_use_to_industry(mu: &MakeUse) -> Result<NationalIO> {
    let n = mu.industries.len();
    let m = mu.commodity_output.len();
    if mu.make.len() != n
        || mu.make.iter().any(|r| r.len() != m)
        || mu.use_table.len() != m
        || mu.use_table.iter().any(|r| r.len() != n)
        || mu.industry_output.len() != n
        || mu.final_demand.len() != m
        || !(mu.scrap.is_empty() || mu.scrap.len() == n)
    {
        return Err(Error::config("make_use", "inconsistent dimensions"));
    }
    for (c, &q) in mu.commodity_output.iter().enumerate() {
        if !(q > 0.0) {
            return Err(Error::Domain(format!("commodity {c} has zero output")));
        }
    }
    let x: Vec<f64> = (0..n)
        .map(|k| mu.industry_output[k] - mu.scrap.get(k).copied().unwrap_or(0.0))
        .collect();
    for k in 0..n {
        if !(mu.industry_output[k] > 0.0) || !(x[k] > 0.0) {
            return Err(Error::Domain(format!(
                "industry `{}` has zero output",
                mu.industries[k]
            )));
        }
    }
    let t: Mat = (0..n)
        .map(|k| {
            let s = x[k] / mu.industry_output[k];
            (0..m).map(|c| s * mu.make[k][c] / mu.commodity_output[c]).collect()
        })
        .collect();
    let z: Mat = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| (0..m).map(|c| t[k][c] * mu.use_table[c][l]).sum())
                .collect()
        })
        .collect();
    let f: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let mut row = [0.0; 3];
            for (comp, v) in row.iter_mut().enumerate() {
                *v = (0..m).map(|c| t[k][c] * mu.final_demand[c][comp]).sum();
            }
            row
        })
        .collect();
    NationalIO::from_flows(mu.industries.clone(), z, f, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationQuotients {
    pub slq: Vec<f64>,
    /// cilq[k][l] = slq[k] / slq[l]
    pub cilq: Mat,
    pub lambda: f64,
    /// FLQ with the diagonal set to λ·SLQ.
    pub flq: Mat,
}

/// SLQ_k = (y_k^r/y^r)/(y_k^n/y^n), CILQ_kl = SLQ_k/SLQ_l,
/// λ = [log₂(1 + y^r/y^n)]^δ.
pub fn location_quotients(y_region: &[f64], y_nation: &[f64], delta: f64) -> Result<LocationQuotients> {
    let n = y_nation.len();
    if y_region.len() != n {
        return Err(Error::config("gdp", "regional and national GDP lengths differ"));
    }
    if let Some(k) = y_nation.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("national GDP of industry {k} is not positive")));
    }
    if let Some(k) = y_region.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("regional GDP of industry {k} is not positive")));
    }
    let yr: f64 = y_region.iter().sum();
    let yn: f64 = y_nation.iter().sum();
    let slq: Vec<f64> = (0..n).map(|k| (y_region[k] / yr) / (y_nation[k] / yn)).collect();
    let cilq: Mat = (0..n).map(|k| (0..n).map(|l| slq[k] / slq[l]).collect()).collect();
    let lambda = (1.0 + yr / yn).log2().powf(delta);
    let flq = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| if k == l { lambda * slq[k] } else { lambda * cilq[k][l] })
                .collect()
        })
        .collect();
    Ok(LocationQuotients {
        slq,
        cilq,
        lambda,
        flq,
    })
}

/// Two-region table. Blocks are indexed `[origin][destination]`: `a[REST][LOCAL]`
/// holds inputs produced in the rest of the country and used by local
/// industries; `f[LOCAL][REST]` is final demand by rest-of-country agents for
/// locally produced output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoRegionIO {
    pub industries: Vec<String>,
    pub a: [[Mat; 2]; 2],
    pub z: [[Mat; 2]; 2],
    pub f: [[Vec<[f64; 3]>; 2]; 2],
    pub x: [Vec<f64>; 2],
    pub va: [Vec<f64>; 2],
    /// Regional purchase coefficients of the local and rest regions.
    pub rho: [Mat; 2],
}

impl TwoRegionIO {
    pub fn n(&self) -> usize {
        self.industries.len()
    }

    /// x_k − Σ Z_k· − Σ f_k· for one region-industry.
    pub fn row_residual(&self, o: usize, k: usize) -> f64 {
        let inter: f64 = (0..2).map(|d| self.z[o][d][k].iter().sum::<f64>()).sum();
        let fin: f64 = (0..2).map(|d| self.f[o][d][k].iter().sum::<f64>()).sum();
        self.x[o][k] - inter - fin
    }

    /// Value added per region-industry, as output minus all purchased inputs.
    pub fn compute_va(&self) -> [Vec<f64>; 2] {
        let n = self.n();
        [LOCAL, REST].map(|d| {
            (0..n)
                .map(|l| {
                    let inputs: f64 = (0..2)
                        .map(|o| (0..n).map(|k| self.z[o][d][k][l]).sum::<f64>())
                        .sum();
                    self.x[d][l] - inputs
                })
                .collect()
        })
    }
}

/// Splits the national table into local and rest-of-country blocks.
///
/// Regional output is the national output times the region's GDP share in
/// each industry. Intermediate coefficients follow ρ = min(FLQ, 1), with the
/// rest region using λ = 1. Local agents' final demand is the national
/// amount times the region's aggregate GDP share, sourced locally by
/// ρ_kk. Rest-of-country final demand is whatever output remains, split into
/// components by national shares.
pub fn regionalize(
    national: &NationalIO,
    y_region: &[f64],
    y_nation: &[f64],
    delta: f64,
) -> Result<TwoRegionIO> {
    let n = national.n();
    if y_nation.len() != n {
        return Err(Error::config("gdp", "GDP vector length differs from the table"));
    }
    let y_rest: Vec<f64> = y_nation.iter().zip(y_region).map(|(a, b)| a - b).collect();
    let rho_of = |lq: &LocationQuotients| -> Mat {
        lq.flq
            .iter()
            .map(|r| r.iter().map(|&v| v.min(1.0)).collect())
            .collect()
    };
    let rho_local = rho_of(&location_quotients(y_region, y_nation, delta)?);
    // A region covering the whole nation leaves an empty rest region, whose
    // coefficients are irrelevant; keep them at one.
    let rho_rest = if y_rest.iter().all(|&v| v.abs() <= 1e-12 * y_nation.iter().sum::<f64>()) {
        vec![vec![1.0; n]; n]
    } else {
        rho_of(&location_quotients(&y_rest, y_nation, 0.0)?)
    };
    let rho = [rho_local, rho_rest];

    let a = &national.a;
    let mut ab: [[Mat; 2]; 2] = Default::default();
    for d in [LOCAL, REST] {
        ab[d][d] = zeros(n, n);
        ab[1 - d][d] = zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                let (own, other) = split_exact(a[k][l], rho[d][k][l] * a[k][l]);
                ab[d][d][k][l] = own;
                ab[1 - d][d][k][l] = other;
            }
        }
    }

    let share: Vec<f64> = (0..n).map(|k| y_region[k] / y_nation[k]).collect();
    let x_local: Vec<f64> = (0..n).map(|k| share[k] * national.x[k]).collect();
    let x_rest: Vec<f64> = (0..n).map(|k| national.x[k] - x_local[k]).collect();
    let x = [x_local, x_rest];

    let mut z: [[Mat; 2]; 2] = Default::default();
    for o in [LOCAL, REST] {
        for d in [LOCAL, REST] {
            z[o][d] = (0..n)
                .map(|k| (0..n).map(|l| ab[o][d][k][l] * x[d][l]).collect())
                .collect();
        }
    }

    let size = y_region.iter().sum::<f64>() / y_nation.iter().sum::<f64>();
    let mut f: [[Vec<[f64; 3]>; 2]; 2] = Default::default();
    f[LOCAL][LOCAL] = vec![[0.0; 3]; n];
    f[REST][LOCAL] = vec![[0.0; 3]; n];
    for k in 0..n {
        for comp in 0..3 {
            let local_agents = national.f[k][comp] * size;
            let from_local = rho[LOCAL][k][k] * local_agents;
            f[LOCAL][LOCAL][k][comp] = from_local;
            f[REST][LOCAL][k][comp] = local_agents - from_local;
        }
    }
    for o in [LOCAL, REST] {
        let mut negative = Vec::new();
        f[o][REST] = (0..n)
            .map(|k| {
                let inter: f64 = (0..2).map(|d| z[o][d][k].iter().sum::<f64>()).sum();
                let residual = x[o][k] - inter - f[o][LOCAL][k].iter().sum::<f64>();
                if residual < 0.0 {
                    negative.push(national.industries[k].clone());
                }
                split_like(residual, &national.f[k])
            })
            .collect();
        if !negative.is_empty() {
            return Err(Error::NegativeFinalDemand {
                region: REGIONS[o],
                industries: negative,
            });
        }
    }

    let mut io = TwoRegionIO {
        industries: national.industries.clone(),
        a: ab,
        z,
        f,
        x,
        va: [Vec::new(), Vec::new()],
        rho,
    };
    io.va = io.compute_va();
    for (r, va) in io.va.iter().enumerate() {
        for (k, v) in va.iter().enumerate() {
            if *v < 0.0 {
                log::warn!("negative value added in {} `{}`", REGIONS[r], io.industries[k]);
            }
        }
    }
    Ok(io)
}

/// Splits `a` into parts near `(own, a − own)` whose floating-point sum is
/// exactly `a`, for 0 ≤ own ≤ a. Whichever of the two parts is at least a/2
/// makes the remaining subtraction exact (Sterbenz).
fn split_exact(a: f64, own: f64) -> (f64, f64) {
    let other = a - own;
    (a - other, other)
}

/// Splits `total` across components in the proportions of `like`. When the
/// reference row sums to zero everything goes to other final demand.
fn split_like(total: f64, like: &[f64; 3]) -> [f64; 3] {
    let s: f64 = like.iter().sum();
    if s == 0.0 {
        return [0.0, 0.0, total];
    }
    let mut out = like.map(|v| total * v / s);
    // put rounding drift on the last component so the row sums exactly
    out[OTHER] = total - out[C] - out[G];
    out
}

/// Writes the table with one row per origin region-industry and columns for
/// destination region-industries, then final demand per destination region
/// and component, then output. Two trailing rows hold value added and output.
pub fn write_io_csv<W: Write>(io: &TwoRegionIO, out: W) -> Result<()> {
    let n = io.n();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["origin".to_string()];
    for d in REGIONS {
        for name in &io.industries {
            header.push(format!("{d}:{name}"));
        }
    }
    for d in REGIONS {
        for c in COMPONENTS {
            header.push(format!("{d}:{c}"));
        }
    }
    header.push("x".into());
    w.write_record(&header)?;
    for o in [LOCAL, REST] {
        for k in 0..n {
            let mut row = vec![format!("{}:{}", REGIONS[o], io.industries[k])];
            for d in [LOCAL, REST] {
                row.extend(io.z[o][d][k].iter().map(|v| v.to_string()));
            }
            for d in [LOCAL, REST] {
                row.extend(io.f[o][d][k].iter().map(|v| v.to_string()));
            }
            row.push(io.x[o][k].to_string());
            w.write_record(&row)?;
        }
    }
    for (label, vals) in [("va", &io.va), ("x", &io.x)] {
        let mut row = vec![label.to_string()];
        for d in [LOCAL, REST] {
            row.extend(vals[d].iter().map(|v| v.to_string()));
        }
        row.extend(std::iter::repeat_n(String::new(), 7));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn split_sums_exactly(a in 0.0f64..1.0, rho in 0.0f64..=1.0) {
            let (own, other) = split_exact(a, rho * a);
            prop_assert_eq!(own + other, a);
            prop_assert!((own - rho * a).abs() <= 1e-15);
        }
    }
}
