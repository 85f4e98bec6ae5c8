//! Dispatch of configured experiments to the library operations.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Kind};
use super::store::ResultStore;
use crate::capacity::{sample, sample_f64, CapacityField};
use crate::continuum::{cut_convergence, lln_experiment, ExperimentSpec};
use crate::cutset::{min_cutset, verify_cutset, Cutset};
use crate::cylinder::{estimate_nu, CylinderShape, NuTable};
use crate::discretization::{discretize, Discretization};
use crate::error::{Error, Result};
use crate::geometry::{domain_neighborhood_volume, qi, to_f64, DomainSpec};
use crate::maxflow::{max_flow, verify_stream, FlowResult, StreamFunction};
use crate::stream::{divergence_bound, divergence_residual, Bump, TestFunction};

/// One solved `(n, replicate)` instance.
pub struct Solved {
    pub disc: Discretization,
    pub caps: CapacityField,
    pub stream: StreamFunction,
    pub flow: FlowResult,
}

pub fn solve(cfg: &ExperimentConfig, spec: &DomainSpec, n: i64, rep: u64) -> Result<Solved> {
    let disc = discretize(spec, n)?;
    let g = &disc.graph;
    let caps = if cfg.exact { sample(&cfg.law, g, cfg.seed, rep)? } else { sample_f64(&cfg.law, g, cfg.seed, rep)? };
    let (stream, flow) = max_flow(g, &caps)?;
    if !cfg.exact {
        let report = verify_stream(g, &caps, &stream);
        if !report.is_admissible(cfg.tolerances.conservation) {
            return Err(Error::NotConservative {
                vertex: report.conservation_vertex.map_or(0, |v| v as usize),
                residual: report.max_conservation_residual,
            });
        }
    }
    Ok(Solved { disc, caps, stream, flow })
}

/// `f(n, replicate)` over every job, in parallel, returned in `(n, replicate)` order.
pub fn per_job<T: Send>(cfg: &ExperimentConfig, f: impl Fn(i64, u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let jobs: Vec<(i64, u64)> =
        cfg.n_list.iter().flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r))).collect();
    jobs.par_iter().map(|&(n, r)| f(n, r)).collect()
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn opt_ms(cfg: &ExperimentConfig, ms: f64) -> String {
    if cfg.timing {
        format!("{ms}")
    } else {
        String::new()
    }
}

/// Files written by a run, relative to the store root.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub kind: String,
    pub files: Vec<String>,
}

/// Validates `cfg`, then runs it into `store` on a pool of `cfg.threads` workers.
pub fn run(cfg: &ExperimentConfig, store: &ResultStore) -> Result<RunSummary> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run_inner(cfg, store))
}

fn run_inner(cfg: &ExperimentConfig, store: &ResultStore) -> Result<RunSummary> {
    let spec = cfg.load_domain()?;
    let reference = cfg.load_reference()?;
    let domain = || spec.as_ref().ok_or_else(|| Error::Config("missing domain".into()));
    let mut files = match cfg.kind {
        Kind::Maxflow => run_maxflow(cfg, domain()?, store)?,
        Kind::Mincut => run_mincut(cfg, domain()?, store)?,
        Kind::Nu => run_nu(cfg, store)?,
        Kind::Lln | Kind::Cutconv => run_convergence(cfg, domain()?, reference.as_ref(), store)?,
        Kind::Divergence => run_divergence(cfg, domain()?, store)?,
    };
    store.write_json("config.json", cfg)?;
    files.push("config.json".into());
    let summary = RunSummary { kind: cfg.kind.name().into(), files };
    Ok(summary)
}

fn run_maxflow(cfg: &ExperimentConfig, spec: &DomainSpec, store: &ResultStore) -> Result<Vec<String>> {
    let rows = per_job(cfg, |n, rep| {
        let s = solve(cfg, spec, n, rep)?;
        let name = format!("streams/stream_n{n}_r{rep}.csv");
        store.write_atomic(&name, |w| s.stream.write_csv(&s.disc.graph, w))?;
        Ok((s.flow, name))
    })?;
    store.write_atomic("flows.csv", |w| {
        let mut out = csv_writer(w);
        out.write_record(["n", "seed", "replicate", "phi", "phi_rescaled", "augment_ops", "runtime_ms"])?;
        for (r, _) in &rows {
            out.write_record([
                r.n.to_string(),
                r.seed.to_string(),
                r.replicate.to_string(),
                format!("{}", r.phi),
                format!("{}", r.phi_rescaled),
                r.augment_ops.to_string(),
                opt_ms(cfg, r.runtime_ms),
            ])?;
        }
        out.flush()?;
        Ok(())
    })?;
    let mut files = vec!["flows.csv".to_string()];
    files.extend(rows.into_iter().map(|(_, name)| name));
    Ok(files)
}

fn run_mincut(cfg: &ExperimentConfig, spec: &DomainSpec, store: &ResultStore) -> Result<Vec<String>> {
    let rows = per_job(cfg, |n, rep| {
        let s = solve(cfg, spec, n, rep)?;
        let g = &s.disc.graph;
        let cut: Cutset = min_cutset(g, &s.caps, &s.stream)?;
        let check = verify_cutset(g, &cut);
        let name = format!("cutsets/cutset_n{n}_r{rep}.csv");
        store.write_atomic(&name, |w| cut.write_csv(g, &s.caps, w))?;
        Ok((n, rep, s.flow.phi, cut.cardinality(), cut.capacity, check.ok(), name))
    })?;
    store.write_atomic("cuts.csv", |w| {
        let mut out = csv_writer(w);
        out.write_record(["n", "seed", "replicate", "phi", "cut_card", "cut_capacity", "verified"])?;
        for (n, rep, phi, card, cap, ok, _) in &rows {
            out.write_record([
                n.to_string(),
                cfg.seed.to_string(),
                rep.to_string(),
                format!("{phi}"),
                card.to_string(),
                format!("{cap}"),
                ok.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    })?;
    let mut files = vec!["cuts.csv".to_string()];
    files.extend(rows.into_iter().map(|r| r.6));
    Ok(files)
}

#[derive(Serialize)]
struct NuOutput<'a> {
    estimates: &'a [crate::cylinder::NuEstimate],
    table: &'a NuTable,
    convexity_warnings: Vec<crate::cylinder::ConvexityWarning>,
}

fn run_nu(cfg: &ExperimentConfig, store: &ResultStore) -> Result<Vec<String>> {
    let d = cfg.directions.first().map_or(2, Vec::len);
    let directions = if cfg.directions.is_empty() {
        let mut e = vec![0; d];
        e[0] = 1;
        vec![e]
    } else {
        cfg.directions.clone()
    };
    let shape = cfg.cylinder.clone().unwrap_or_else(|| CylinderShape::unit(d));
    let estimates = directions
        .iter()
        .map(|w| estimate_nu(w, &shape, &cfg.n_list, cfg.replicates as usize, &cfg.law, cfg.seed))
        .collect::<Result<Vec<_>>>()?;
    store.write_atomic("nu.csv", |w| {
        let mut out = csv_writer(w);
        let mut header: Vec<String> = (1..=d).map(|i| format!("w_{i}")).collect();
        header.extend(["n", "seed", "replicate", "nu_sample"].map(String::from));
        out.write_record(&header)?;
        for est in &estimates {
            for row in &est.rows {
                for (rep, x) in row.samples.iter().enumerate() {
                    let mut rec: Vec<String> = est.direction.iter().map(i64::to_string).collect();
                    rec.extend([row.n.to_string(), cfg.seed.to_string(), rep.to_string(), format!("{x}")]);
                    out.write_record(&rec)?;
                }
            }
        }
        out.flush()?;
        Ok(())
    })?;
    let table = NuTable::from_estimates(&estimates);
    let output = NuOutput { estimates: &estimates, table: &table, convexity_warnings: table.convexity_warnings() };
    store.write_json("summary.json", &output)?;
    Ok(vec!["nu.csv".into(), "summary.json".into()])
}

fn run_convergence(
    cfg: &ExperimentConfig,
    spec: &DomainSpec,
    reference: Option<&crate::geometry::BoxUnion>,
    store: &ResultStore,
) -> Result<Vec<String>> {
    let nu = cfg.nu();
    let x = ExperimentSpec {
        domain: spec,
        law: &cfg.law,
        n_list: &cfg.n_list,
        replicates: cfg.replicates,
        master_seed: cfg.seed,
        reference,
        nu: nu.as_ref(),
        timing: cfg.timing,
    };
    let report = if cfg.kind == Kind::Cutconv { cut_convergence(&x)? } else { lln_experiment(&x)? };
    store.write_atomic("convergence.csv", |w| report.write_csv(w))?;
    #[derive(Serialize)]
    struct Summary<'a> {
        summary: &'a [crate::continuum::ConvergenceSummary],
        capa_ref: Option<f64>,
        duality_violations: &'a [(i64, u64)],
    }
    store.write_json(
        "summary.json",
        &Summary { summary: &report.summary, capa_ref: report.capa_ref, duality_violations: &report.duality_violations },
    )?;
    Ok(vec!["convergence.csv".into(), "summary.json".into()])
}

fn run_divergence(cfg: &ExperimentConfig, spec: &DomainSpec, store: &ResultStore) -> Result<Vec<String>> {
    let bump = cfg.bump.as_ref().ok_or_else(|| Error::Config("missing bump".into()))?;
    let h = Bump { center: bump.center.clone(), radius: bump.radius };
    if h.center.len() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: h.center.len() });
    }
    let m = to_f64(&cfg.law.validate()?.max_value());
    let vol = domain_neighborhood_volume(spec, &qi(1), 64)?;
    let vol = to_f64(&(vol.value + vol.error));
    let rows = per_job(cfg, |n, rep| {
        let s = solve(cfg, spec, n, rep)?;
        let r = divergence_residual(&s.disc.graph, &s.stream, &h)?;
        Ok((n, rep, r, divergence_bound(spec.dim, h.k_bound(), m, vol, n)))
    })?;
    store.write_atomic("divergence.csv", |w| {
        let mut out = csv_writer(w);
        let mut header: Vec<String> = ["n", "seed", "replicate"].map(String::from).to_vec();
        header.extend((1..=spec.dim).map(|i| format!("lhs_{i}")));
        header.extend(["rhs", "residual", "bound"].map(String::from));
        out.write_record(&header)?;
        for (n, rep, r, bound) in &rows {
            let mut rec = vec![n.to_string(), cfg.seed.to_string(), rep.to_string()];
            rec.extend(r.lhs_axes.iter().map(|x| format!("{x}")));
            rec.extend([format!("{}", r.rhs), format!("{}", r.residual), format!("{bound}")]);
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    })?;
    Ok(vec!["divergence.csv".into()])
}
