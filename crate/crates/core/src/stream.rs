//! Measure-level analysis of streams: integrals, boundary fluxes, plane and
//! cylinder crossings, the discrete divergence identity and coarse graining.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cylinder::{CylinderSpec, NuTable};
use crate::error::{Error, Result};
use crate::geometry::{q, qi, Aabb, DomainSpec, Q};
use crate::lattice::LatticeGraph;
use crate::maxflow::{StreamFunction, StreamValues};

fn inv_pow(n: i64, k: i32) -> f64 {
    1.0 / (n as f64).powi(k)
}

/// `(1/n^d) Σ_e f(e) h(c(e)) ē`.
pub fn integrate(graph: &LatticeGraph, s: &StreamFunction, h: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; graph.dim];
    for e in 0..graph.edge_count() as u32 {
        let f = s.get_f64(e);
        if f != 0.0 {
            out[graph.edges[e as usize].axis as usize] += f * h(&graph.edge_center_f64(e));
        }
    }
    let w = inv_pow(graph.n, graph.dim as i32);
    out.iter().map(|x| x * w).collect()
}

/// `f̂(x) = Σ_{e=<.,x>} f(e) - Σ_{e=<x,.>} f(e)`: water appearing at a terminal.
pub fn boundary_flux(graph: &LatticeGraph, s: &StreamFunction, x: u32) -> Result<f64> {
    if !graph.sources.contains(&x) && !graph.sinks.contains(&x) {
        return Err(Error::InvalidArgument(format!("vertex {x} is not a terminal")));
    }
    Ok(-s.net_out_f64(graph, x))
}

/// `𝔣(f_n) / n^{d-1} = -(1/n^{d-1}) Σ_{x ∈ Γ¹_n} f̂(x)`.
pub fn flow_value(graph: &LatticeGraph, s: &StreamFunction) -> f64 {
    s.flow_f64(graph) * inv_pow(graph.n, graph.dim as i32 - 1)
}

/// Exact companion of [`flow_value`] in exact mode.
pub fn flow_value_exact(graph: &LatticeGraph, s: &StreamFunction) -> Option<Q> {
    s.flow_q(graph).map(|v| v / qi((graph.n as i128).pow(graph.dim as u32 - 1)))
}

fn sum_weighted(s: &StreamFunction, terms: &[(u32, i8)]) -> (f64, Option<Q>) {
    match &s.values {
        StreamValues::Exact { scale, units } => {
            let total: i128 = terms.iter().map(|&(e, w)| w as i128 * units[e as usize] as i128).sum();
            let v = q(total, *scale as i128);
            (crate::geometry::to_f64(&v), Some(v))
        }
        StreamValues::Float(_) => (terms.iter().map(|&(e, w)| w as f64 * s.get_f64(e)).sum(), None),
    }
}

fn cylinder_edges(graph: &LatticeGraph, cyl: &CylinderSpec) -> Result<Vec<u32>> {
    if graph.n != cyl.n || graph.dim != cyl.dim() {
        return Err(Error::InvalidArgument("cylinder and stream use different lattices".into()));
    }
    let inside: Vec<bool> = (0..graph.vertex_count() as u32).map(|v| cyl.contains(graph.vertex(v))).collect();
    Ok((0..graph.edge_count() as u32)
        .filter(|&e| {
            let ed = graph.edges[e as usize];
            inside[ed.lo as usize] && inside[ed.hi as usize]
        })
        .collect())
}

/// Flow through the plane at height `u ∈ [1/n, 2h - 1/n]` above the bottom of
/// the cylinder, over edges inside the cylinder, counted positively along `v`.
///
/// An edge crosses when exactly one endpoint lies strictly below the plane. For
/// directions with nonnegative coordinates this is the half-open rule `]a, b]`.
pub fn plane_crossing_flow(graph: &LatticeGraph, s: &StreamFunction, cyl: &CylinderSpec, u: &Q) -> Result<(f64, Option<Q>)> {
    let step = q(1, cyl.n as i128);
    if *u < step || *u > cyl.h * qi(2) - step {
        return Err(Error::InvalidArgument(format!("u = {u} outside [1/n, 2h - 1/n]")));
    }
    let c = *u - cyl.h;
    let below = |v: u32| cyl.side_of_plane(graph.vertex(v), &c).is_lt();
    let terms: Vec<(u32, i8)> = cylinder_edges(graph, cyl)?
        .into_iter()
        .filter_map(|e| {
            let ed = graph.edges[e as usize];
            match (below(ed.lo), below(ed.hi)) {
                (true, false) => Some((e, 1)),
                (false, true) => Some((e, -1)),
                _ => None,
            }
        })
        .collect();
    Ok(sum_weighted(s, &terms))
}

/// `Ψ`: net flow leaving `B'(A, h)` along edges inside the cylinder.
pub fn cylinder_crossing_flow(graph: &LatticeGraph, s: &StreamFunction, cyl: &CylinderSpec) -> Result<(f64, Option<Q>)> {
    let (bottom, _) = cyl.halves()?;
    let bottom: HashSet<Vec<i64>> = bottom.into_iter().collect();
    let in_b = |v: u32| bottom.contains(graph.vertex(v));
    let terms: Vec<(u32, i8)> = cylinder_edges(graph, cyl)?
        .into_iter()
        .filter_map(|e| {
            let ed = graph.edges[e as usize];
            match (in_b(ed.lo), in_b(ed.hi)) {
                (true, false) => Some((e, 1)),
                (false, true) => Some((e, -1)),
                _ => None,
            }
        })
        .collect();
    Ok(sum_weighted(s, &terms))
}

/// A smooth test function with a declared `K(h) = ‖h‖_{W^{2,∞}} / 2`.
pub trait TestFunction: Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn k_bound(&self) -> f64;
}

pub struct ConstantFn(pub f64);

impl TestFunction for ConstantFn {
    fn value(&self, _: &[f64]) -> f64 {
        self.0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }

    fn k_bound(&self) -> f64 {
        self.0.abs() / 2.0
    }
}

/// `h(x) = (1 - |x - c|²/r²)^4` inside the ball of radius `r`, zero outside.
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Bump {
    fn s(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (self.radius * self.radius)
    }
}

impl TestFunction for Bump {
    fn value(&self, x: &[f64]) -> f64 {
        let s = self.s(x);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s).powi(4)
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = self.s(x);
        if s >= 1.0 {
            return vec![0.0; x.len()];
        }
        let f = -8.0 * (1.0 - s).powi(3) / (self.radius * self.radius);
        x.iter().zip(&self.center).map(|(a, b)| f * (a - b)).collect()
    }

    /// `|h| <= 1`, `|∂h| <= 8/r`, `|∂²h| <= 56/r²`.
    fn k_bound(&self) -> f64 {
        let r = self.radius;
        (1.0 + 8.0 / r + 56.0 / (r * r)) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    /// `(1/n^d) Σ_{e ∈ E^i} f(e) ∂_i h(c(e))` per axis.
    pub lhs_axes: Vec<f64>,
    pub lhs: f64,
    /// `(1/n^{d-1}) Σ_{x ∈ Γ¹_n ∪ Γ²_n} h(x) f̂(x)`.
    pub rhs: f64,
    pub residual: f64,
}

/// Both sides of the discrete divergence identity for a test function.
pub fn divergence_residual(graph: &LatticeGraph, s: &StreamFunction, h: &dyn TestFunction) -> Result<DivergenceReport> {
    let d = graph.dim;
    let mut lhs_axes = vec![0.0; d];
    for e in 0..graph.edge_count() as u32 {
        let f = s.get_f64(e);
        if f != 0.0 {
            let axis = graph.edges[e as usize].axis as usize;
            lhs_axes[axis] += f * h.gradient(&graph.edge_center_f64(e))[axis];
        }
    }
    let w = inv_pow(graph.n, d as i32);
    for x in lhs_axes.iter_mut() {
        *x *= w;
    }
    let lhs = lhs_axes.iter().sum();
    let mut rhs = 0.0;
    for &x in graph.sources.iter().chain(&graph.sinks) {
        rhs += h.value(&graph.point_f64(x)) * boundary_flux(graph, s, x)?;
    }
    rhs *= inv_pow(graph.n, d as i32 - 1);
    Ok(DivergenceReport { lhs_axes, lhs, rhs, residual: (lhs - rhs).abs() })
}

/// `d K M L^d(V_∞(Ω, 1)) / n`.
pub fn divergence_bound(d: usize, k: f64, m: f64, neighbourhood_volume: f64, n: i64) -> f64 {
    d as f64 * k * m * neighbourhood_volume / n as f64
}

/// Box averages `σ̂ = μ_n(box) / L^d(box)` on the grid of side `1/ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseField {
    pub rho: i64,
    pub boxes: Vec<CoarseBox>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseBox {
    /// Box `[j/ρ, (j+1)/ρ)`.
    pub index: Vec<i64>,
    pub sigma: Vec<f64>,
    /// The closed box lies inside `Ω`, away from its boundary.
    pub interior: bool,
}

pub fn coarse_grain(graph: &LatticeGraph, s: &StreamFunction, rho: i64, spec: &DomainSpec) -> Result<CoarseField> {
    if rho < 1 {
        return Err(Error::InvalidArgument("resolution must be >= 1".into()));
    }
    let d = graph.dim;
    let mut acc: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    let two_n = 2 * graph.n;
    for e in 0..graph.edge_count() as u32 {
        let f = s.get_f64(e);
        let c2 = graph.edge_center2(e);
        // floor(c · ρ) with c = c2 / 2n, exactly
        let idx: Vec<i64> = c2.iter().map(|&c| (c * rho).div_euclid(two_n)).collect();
        let entry = acc.entry(idx).or_insert_with(|| vec![0.0; d]);
        entry[graph.edges[e as usize].axis as usize] += f;
    }
    let weight = inv_pow(graph.n, d as i32) * (rho as f64).powi(d as i32);
    let boxes = acc
        .into_iter()
        .map(|(index, sum)| {
            let b = Aabb {
                lo: index.iter().map(|&j| q(j as i128, rho as i128)).collect(),
                hi: index.iter().map(|&j| q(j as i128 + 1, rho as i128)).collect(),
            };
            let interior = box_is_interior(spec, &b);
            CoarseBox { index, sigma: sum.iter().map(|x| x * weight).collect(), interior }
        })
        .collect();
    Ok(CoarseField { rho, boxes })
}

fn box_is_interior(spec: &DomainSpec, b: &Aabb) -> bool {
    if !spec.contains(&b.center()).unwrap_or(false) {
        return false;
    }
    let cube = crate::geometry::ConvexSet::from_box(b);
    spec.boundary_pieces().iter().all(|p| match &p.rect {
        Some(r) => b.dist_inf_box(r) > Q::from_integer(0),
        None => cube.dist_inf_set(&p.set).is_none_or(|dist| dist > Q::from_integer(0)),
    })
}

impl CoarseField {
    /// `max σ̂·v - ν̂(v)` over interior boxes and the given directions.
    pub fn capacity_excess(&self, table: &NuTable, directions: &[Vec<f64>]) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for v in directions {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nu = table.lookup(v)?;
            for b in self.boxes.iter().filter(|b| b.interior) {
                let proj: f64 = b.sigma.iter().zip(v).map(|(a, c)| a * c / norm).sum();
                worst = worst.max(proj - nu);
            }
        }
        Ok(worst)
    }

    /// Rows `(j_1..j_d, sigma_1..sigma_d)`.
    pub fn write_csv<W: Write>(&self, dim: usize, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header: Vec<String> = (1..=dim).map(|i| format!("j_{i}")).collect();
        header.extend((1..=dim).map(|i| format!("sigma_{i}")));
        header.push("interior".into());
        w.write_record(&header)?;
        for b in &self.boxes {
            let mut rec: Vec<String> = b.index.iter().map(i64::to_string).collect();
            rec.extend(b.sigma.iter().map(|x| format!("{x}")));
            rec.push(b.interior.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
