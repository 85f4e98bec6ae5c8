//! Maximal flows and admissible stream functions on lattice graphs.

mod amount;
pub mod canonical;
pub mod push_relabel;

use std::io::Write;
use std::time::Instant;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

pub use amount::Amount;
pub use canonical::{canonicalize_stream, cancel_cycles, decompose};
pub use push_relabel::SolverStats;

use crate::capacity::{CapacityField, Values};
use crate::error::{Error, Result};
use crate::geometry::{q, Q};
use crate::lattice::LatticeGraph;

/// Conservation tolerance in floating mode.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum StreamValues {
    /// `f(e) = units[e] / scale`.
    Exact { scale: i64, units: Vec<i64> },
    Float(Vec<f64>),
}

/// `f_n` on the edges of `Π_n`, signed relative to the canonical orientation.
/// Entries requested outside `Π_n` are kept apart so the support condition can
/// be checked.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamFunction {
    pub n: i64,
    pub dim: usize,
    pub values: StreamValues,
    pub off_support: Vec<(usize, Vec<i64>, f64)>,
}

impl StreamFunction {
    pub fn zero(graph: &LatticeGraph, caps: &CapacityField) -> Self {
        let values = match &caps.values {
            Values::Exact { scale, .. } => StreamValues::Exact { scale: *scale, units: vec![0; graph.edge_count()] },
            Values::Float(_) => StreamValues::Float(vec![0.0; graph.edge_count()]),
        };
        Self { n: graph.n, dim: graph.dim, values, off_support: Vec::new() }
    }

    pub fn from_units(graph: &LatticeGraph, scale: i64, units: Vec<i64>) -> Self {
        Self { n: graph.n, dim: graph.dim, values: StreamValues::Exact { scale, units }, off_support: Vec::new() }
    }

    pub fn from_f64(graph: &LatticeGraph, values: Vec<f64>) -> Self {
        Self { n: graph.n, dim: graph.dim, values: StreamValues::Float(values), off_support: Vec::new() }
    }

    /// Floating stream from `(axis, k, f)` entries; unknown edges go to `off_support`.
    pub fn from_entries(graph: &LatticeGraph, entries: &[(usize, Vec<i64>, f64)]) -> Self {
        let mut values = vec![0.0; graph.edge_count()];
        let mut off = Vec::new();
        for (axis, k, f) in entries {
            match graph.edge_by_key(*axis, k) {
                Some(e) => values[e as usize] += f,
                None => off.push((*axis, k.clone(), *f)),
            }
        }
        Self { n: graph.n, dim: graph.dim, values: StreamValues::Float(values), off_support: off }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            StreamValues::Exact { units, .. } => units.len(),
            StreamValues::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_f64(&self, e: u32) -> f64 {
        match &self.values {
            StreamValues::Exact { scale, units } => units[e as usize] as f64 / *scale as f64,
            StreamValues::Float(v) => v[e as usize],
        }
    }

    pub fn get_q(&self, e: u32) -> Option<Q> {
        match &self.values {
            StreamValues::Exact { scale, units } => Some(q(units[e as usize] as i128, *scale as i128)),
            StreamValues::Float(_) => None,
        }
    }

    /// Net amount leaving `v`: `Σ_{e=<v,.>} f(e) - Σ_{e=<.,v>} f(e)`, in units.
    pub fn net_out_units(&self, graph: &LatticeGraph, v: u32) -> Option<i128> {
        match &self.values {
            StreamValues::Exact { units, .. } => {
                Some(graph.incident(v).map(|(e, s)| s as i128 * units[e as usize] as i128).sum())
            }
            StreamValues::Float(_) => None,
        }
    }

    pub fn net_out_f64(&self, graph: &LatticeGraph, v: u32) -> f64 {
        graph.incident(v).map(|(e, s)| s as f64 * self.get_f64(e)).sum()
    }

    /// Flow out of the sources `𝔣(f_n)`, unscaled.
    pub fn flow_f64(&self, graph: &LatticeGraph) -> f64 {
        graph.sources.iter().map(|&v| self.net_out_f64(graph, v)).sum()
    }

    pub fn flow_q(&self, graph: &LatticeGraph) -> Option<Q> {
        let scale = match &self.values {
            StreamValues::Exact { scale, .. } => *scale,
            StreamValues::Float(_) => return None,
        };
        let total: i128 = graph.sources.iter().map(|&v| self.net_out_units(graph, v).unwrap()).sum();
        Some(q(total, scale as i128))
    }

    /// Dump rows `(axis, k_1..k_d, f)`, axis 1-based.
    pub fn write_csv<W: Write>(&self, graph: &LatticeGraph, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["axis".to_string()];
        header.extend((1..=graph.dim).map(|i| format!("k_{i}")));
        header.push("f".into());
        w.write_record(&header)?;
        for e in 0..graph.edge_count() as u32 {
            let (axis, k) = graph.edge_key(e);
            let mut rec = vec![(axis + 1).to_string()];
            rec.extend(k.iter().map(i64::to_string));
            rec.push(format!("{}", self.get_f64(e)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Value of a maximal flow with solver statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub phi: f64,
    /// Exact value as `"num/den"` in exact mode.
    #[serde(skip)]
    pub phi_exact: Option<Q>,
    pub phi_rescaled: f64,
    pub n: i64,
    pub seed: u64,
    pub replicate: u64,
    pub runtime_ms: f64,
    pub augment_ops: u64,
    #[serde(skip)]
    pub stats: SolverStats,
}

/// Maximal flow from `graph.sources` to `graph.sinks` and an admissible stream attaining it.
pub fn max_flow(graph: &LatticeGraph, caps: &CapacityField) -> Result<(StreamFunction, FlowResult)> {
    if caps.len() != graph.edge_count() {
        return Err(Error::InvalidArgument("capacity field does not match the graph".into()));
    }
    let start = Instant::now();
    let (stream, phi, phi_exact, stats) = match &caps.values {
        Values::Exact { scale, units } => {
            let sol = push_relabel::solve(graph, units)?;
            let phi_q = q(sol.value as i128, *scale as i128);
            (StreamFunction::from_units(graph, *scale, sol.flows), crate::geometry::to_f64(&phi_q), Some(phi_q), sol.stats)
        }
        Values::Float(v) => {
            let sol = push_relabel::solve(graph, v)?;
            (StreamFunction::from_f64(graph, sol.flows), sol.value, None, sol.stats)
        }
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let scale = (graph.n as f64).powi(graph.dim as i32 - 1);
    let result = FlowResult {
        phi,
        phi_exact,
        phi_rescaled: phi / scale,
        n: graph.n,
        seed: caps.seed,
        replicate: caps.replicate,
        runtime_ms,
        augment_ops: stats.pushes + stats.relabels,
        stats,
    };
    Ok((stream, result))
}

/// Violations of support, capacity and conservation; empty iff admissible.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamReport {
    pub max_capacity_violation: f64,
    pub capacity_edge: Option<u32>,
    pub max_conservation_residual: f64,
    pub conservation_vertex: Option<u32>,
    pub support_violations: usize,
}

impl StreamReport {
    pub fn is_admissible(&self, tolerance: f64) -> bool {
        self.max_capacity_violation <= tolerance
            && self.max_conservation_residual <= tolerance
            && self.support_violations == 0
    }
}

pub fn verify_stream(graph: &LatticeGraph, caps: &CapacityField, s: &StreamFunction) -> StreamReport {
    let mut report = StreamReport {
        support_violations: s.off_support.iter().filter(|(_, _, f)| *f != 0.0).count(),
        ..Default::default()
    };
    let exact = matches!(s.values, StreamValues::Exact { .. }) && (caps.get_q(0).is_some() || caps.is_empty());
    for e in 0..graph.edge_count() as u32 {
        let over = if exact {
            let f = s.get_q(e).unwrap();
            let t = caps.get_q(e).unwrap();
            crate::geometry::to_f64(&(f.abs() - t))
        } else {
            s.get_f64(e).abs() - caps.get_f64(e)
        };
        if over > report.max_capacity_violation {
            report.max_capacity_violation = over;
            report.capacity_edge = Some(e);
        }
    }
    let src = graph.source_flags();
    let snk = graph.sink_flags();
    for v in 0..graph.vertex_count() as u32 {
        if src[v as usize] || snk[v as usize] {
            continue;
        }
        let r = match (&s.values, s.net_out_units(graph, v)) {
            (StreamValues::Exact { scale, .. }, Some(u)) => (u as f64 / *scale as f64).abs(),
            _ => s.net_out_f64(graph, v).abs(),
        };
        if r > report.max_conservation_residual {
            report.max_conservation_residual = r;
            report.conservation_vertex = Some(v);
        }
    }
    report
}
