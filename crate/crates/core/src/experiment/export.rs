//! Geometry exports recomputed from a stored configuration snapshot.

use std::str::FromStr;

use serde_json::{Map, Value};

use super::config::ExperimentConfig;
use super::run::{per_job, solve};
use super::store::ResultStore;
use crate::cutset::{cut_region, min_cutset};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Artifact {
    CutsetPlaquettes,
    StreamField,
    Regions,
}

impl FromStr for Artifact {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cutset-plaquettes" => Ok(Artifact::CutsetPlaquettes),
            "stream-field" => Ok(Artifact::StreamField),
            "regions" => Ok(Artifact::Regions),
            _ => Err(Error::Config(format!("unknown artifact {s:?}"))),
        }
    }
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::CutsetPlaquettes => "cutset-plaquettes",
            Artifact::StreamField => "stream-field",
            Artifact::Regions => "regions",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

/// A flat table shared by both formats.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Records {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Records {
    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|x| format!("{x}")))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    fn to_json(&self) -> Result<Vec<u8>> {
        let objs: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.header.iter().cloned().zip(r.iter().map(|&x| Value::from(x))).collect();
                Value::Object(m)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&objs)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| {
                rec?.iter()
                    .map(|f| f.parse::<f64>().map_err(|e| Error::Config(e.to_string())))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self { header, rows })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let objs: Vec<Map<String, Value>> = serde_json::from_str(text)?;
        let header: Vec<String> = objs.first().map(|o| o.keys().cloned().collect()).unwrap_or_default();
        let rows = objs.iter().map(|o| header.iter().map(|k| o[k].as_f64().unwrap_or(f64::NAN)).collect()).collect();
        Ok(Self { header, rows })
    }
}

fn records(cfg: &ExperimentConfig, what: Artifact, n: i64, rep: u64) -> Result<Records> {
    let spec = cfg.load_domain()?.ok_or_else(|| Error::Config("export needs a domain".into()))?;
    let s = solve(cfg, &spec, n, rep)?;
    let g = &s.disc.graph;
    let d = g.dim;
    let coords = |p: &'static str| (1..=d).map(move |i| format!("{p}_{i}"));
    let mut out = Records::default();
    match what {
        Artifact::CutsetPlaquettes => {
            let cut = min_cutset(g, &s.caps, &s.stream)?;
            out.header = coords("c").chain(["axis", "side", "t"].map(String::from)).collect();
            for &e in &cut.edges {
                let p = crate::cutset::plaquette(g, e);
                let mut row = p.center.clone();
                row.extend([p.axis as f64, p.side, s.caps.get_f64(e)]);
                out.rows.push(row);
            }
        }
        Artifact::StreamField => {
            out.header = coords("c").chain(["axis", "f"].map(String::from)).collect();
            for e in 0..g.edge_count() as u32 {
                let f = s.stream.get_f64(e);
                if f != 0.0 {
                    let mut row = g.edge_center_f64(e);
                    row.extend([g.edges[e as usize].axis as f64 + 1.0, f]);
                    out.rows.push(row);
                }
            }
        }
        Artifact::Regions => {
            let cut = min_cutset(g, &s.caps, &s.stream)?;
            let region = cut_region(g, &cut);
            out.header = coords("x").chain(["side"].map(String::from)).collect();
            for c in region.centers() {
                let mut row = c;
                row.push(1.0 / n as f64);
                out.rows.push(row);
            }
        }
    }
    Ok(out)
}

/// Writes `exports/<what>_n<n>_r<rep>.<ext>` for every job of the stored run.
pub fn export(store: &ResultStore, what: Artifact, format: Format) -> Result<Vec<String>> {
    let text = store.read_to_string("config.json").map_err(|_| Error::Config("store has no config.json".into()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    let tables = per_job(&cfg, |n, rep| Ok((n, rep, records(&cfg, what, n, rep)?)))?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut files = Vec::new();
    for (n, rep, t) in tables {
        let name = format!("exports/{}_n{n}_r{rep}.{ext}", what.name());
        let body = match format {
            Format::Csv => t.to_csv()?,
            Format::Json => t.to_json()?,
        };
        store.write_atomic(&name, |w| Ok(w.write_all(&body)?))?;
        files.push(name);
    }
    Ok(files)
}
