//! CSV tables emitted by a run. Each file covers one concern and has a fixed
//! header; the calibration summaries are computed from these rows only.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::{EpiDayRecord, RunOutput};
use crate::econ::{EconDay, RegionDay};
use crate::econio::REGIONS;
use crate::error::Result;
use crate::population::Population;

pub const EPIDEMIC_CSV: &str = "epidemic.csv";
pub const ECONOMY_CSV: &str = "economy.csv";
pub const CONSUMPTION_CSV: &str = "consumption_by_band.csv";
pub const EMPLOYMENT_CSV: &str = "employment_groups.csv";
pub const INFECTIONS_CSV: &str = "infections.csv";

/// One region-industry on one day. Day −1 holds the pre-pandemic baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconRow {
    pub day: i32,
    pub region: String,
    pub industry: usize,
    pub l_p: f64,
    pub l_h: f64,
    pub x: f64,
    pub d: f64,
    pub cap: f64,
    pub va: f64,
    pub z_sales: f64,
    pub c: f64,
    pub g: f64,
    pub f: f64,
    pub c_demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionRow {
    pub day: i32,
    pub band: usize,
    pub realized: f64,
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmploymentRow {
    pub day: u32,
    pub kind: String,
    pub group: usize,
    pub employed: usize,
    pub initial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfectionRow {
    pub day: i32,
    pub infectee: u32,
    pub infector: Option<u32>,
    pub layer: Option<String>,
    pub place: Option<u32>,
    pub industry: Option<usize>,
    pub age: u8,
    pub income: f64,
    pub occupation: Option<usize>,
    pub tract: u32,
}

fn region_rows(day: i32, econ: &EconDay, out: &mut Vec<EconRow>) {
    for (r, rd) in econ.region.iter().enumerate() {
        let RegionDay { l_p, l_h, x, d, cap, va, z_sales, c, g, f, c_demand } = rd;
        for k in 0..x.len() {
            out.push(EconRow {
                day,
                region: REGIONS[r].to_string(),
                industry: k,
                l_p: l_p[k],
                l_h: l_h[k],
                x: x[k],
                d: d[k],
                cap: cap[k],
                va: va[k],
                z_sales: z_sales[k],
                c: c[k],
                g: g[k],
                f: f[k],
                c_demand: c_demand[k],
            });
        }
    }
}

impl RunOutput {
    pub fn econ_rows(&self) -> Vec<EconRow> {
        let mut out = Vec::new();
        region_rows(-1, &self.econ_baseline, &mut out);
        for (t, d) in self.econ.iter().enumerate() {
            region_rows(t as i32, d, &mut out);
        }
        out
    }

    pub fn consumption_rows(&self) -> Vec<ConsumptionRow> {
        let base = &self.consumption_baseline_by_band;
        self.econ
            .iter()
            .enumerate()
            .flat_map(|(t, d)| {
                d.consumption_by_band
                    .iter()
                    .enumerate()
                    .map(move |(b, &v)| ConsumptionRow {
                        day: t as i32,
                        band: b,
                        realized: v,
                        baseline: base[b],
                    })
            })
            .collect()
    }

    pub fn employment_rows(&self) -> Vec<EmploymentRow> {
        let mut out = Vec::new();
        for g in &self.employment_groups {
            for (t, row) in g.daily.iter().enumerate() {
                for (i, &e) in row.iter().enumerate() {
                    out.push(EmploymentRow {
                        day: t as u32,
                        kind: g.kind.to_string(),
                        group: i,
                        employed: e,
                        initial: g.initial[i],
                    });
                }
            }
        }
        out
    }

    pub fn infection_rows(&self, pop: &Population) -> Vec<InfectionRow> {
        self.infections
            .iter()
            .map(|inf| {
                let p = &pop.persons[inf.infectee as usize];
                InfectionRow {
                    day: inf.day,
                    infectee: inf.infectee,
                    infector: inf.infector,
                    layer: inf.layer.map(|l| l.name().to_string()),
                    place: inf.place,
                    industry: inf.industry,
                    age: p.age,
                    income: p.income,
                    occupation: p.occupation,
                    tract: p.tract_id,
                }
            })
            .collect()
    }

    /// Writes every table into `dir` and returns the file paths.
    pub fn write_dir(&self, dir: &Path, pop: &Population) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files = [
            (EPIDEMIC_CSV, write_rows(&self.epi, file(dir, EPIDEMIC_CSV)?)),
            (ECONOMY_CSV, write_rows(&self.econ_rows(), file(dir, ECONOMY_CSV)?)),
            (CONSUMPTION_CSV, write_rows(&self.consumption_rows(), file(dir, CONSUMPTION_CSV)?)),
            (EMPLOYMENT_CSV, write_rows(&self.employment_rows(), file(dir, EMPLOYMENT_CSV)?)),
            (INFECTIONS_CSV, write_rows(&self.infection_rows(pop), file(dir, INFECTIONS_CSV)?)),
        ];
        let mut paths = Vec::new();
        for (name, res) in files {
            res?;
            paths.push(dir.join(name));
        }
        Ok(paths)
    }
}

fn file(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: serde::de::DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

pub fn read_epidemic(dir: &Path) -> Result<Vec<EpiDayRecord>> {
    read_rows(File::open(dir.join(EPIDEMIC_CSV))?)
}

pub fn read_economy(dir: &Path) -> Result<Vec<EconRow>> {
    read_rows(File::open(dir.join(ECONOMY_CSV))?)
}
