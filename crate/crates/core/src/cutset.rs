//! Minimal cutsets, their source-side regions and geometric representations.

use std::collections::VecDeque;
use std::io::Write;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::capacity::{CapacityField, Values};
use crate::error::{Error, Result};
use crate::geometry::{q, to_f64, BoxUnion, VoxelSet, Q};
use crate::lattice::{flags, LatticeGraph};
use crate::maxflow::{max_flow, Amount, StreamFunction, StreamValues};

/// An inclusion-minimal set of edges separating the sources from the sinks.
#[derive(Clone, Debug, PartialEq)]
pub struct Cutset {
    pub n: i64,
    /// Edge ids, sorted.
    pub edges: Vec<u32>,
    pub capacity: f64,
    /// Exact `V(E)` in exact mode.
    pub capacity_exact: Option<Q>,
    /// `r(E)`: vertices joined to a source by a path avoiding `E`, sorted.
    pub source_side: Vec<u32>,
}

impl Cutset {
    pub fn cardinality(&self) -> usize {
        self.edges.len()
    }

    /// Dump rows `(axis, k_1..k_d, t)`, axis 1-based.
    pub fn write_csv<W: Write>(&self, graph: &LatticeGraph, caps: &CapacityField, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["axis".to_string()];
        header.extend((1..=graph.dim).map(|i| format!("k_{i}")));
        header.push("t".into());
        w.write_record(&header)?;
        for &e in &self.edges {
            let (axis, k) = graph.edge_key(e);
            let mut rec = vec![(axis + 1).to_string()];
            rec.extend(k.iter().map(i64::to_string));
            rec.push(format!("{}", caps.get_f64(e)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn plaquettes(&self, graph: &LatticeGraph) -> Vec<Plaquette> {
        self.edges.iter().map(|&e| plaquette(graph, e)).collect()
    }
}

/// The dual face `π(e)` bisecting an edge: centre `c(e)`, normal axis, side `1/n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plaquette {
    pub center: Vec<f64>,
    /// 1-based normal axis.
    pub axis: usize,
    pub side: f64,
}

pub fn plaquette(graph: &LatticeGraph, e: u32) -> Plaquette {
    Plaquette {
        center: graph.edge_center_f64(e),
        axis: graph.edges[e as usize].axis as usize + 1,
        side: 1.0 / graph.n as f64,
    }
}

/// Residual capacity of edge `e` traversed with sign `s`, in the stream's units.
fn residual_positive(caps: &CapacityField, s: &StreamFunction, e: u32, sign: i8, eps: f64) -> bool {
    match (&caps.values, &s.values) {
        (Values::Exact { scale: cs, units: t }, StreamValues::Exact { scale: ss, units: f }) if cs == ss => {
            t[e as usize] - sign as i64 * f[e as usize] > 0
        }
        _ => caps.get_f64(e) - sign as f64 * s.get_f64(e) > eps,
    }
}

fn bfs(graph: &LatticeGraph, starts: &[u32], mut pass: impl FnMut(u32, u32, i8, u32) -> bool) -> Vec<bool> {
    let mut seen = vec![false; graph.vertex_count()];
    let mut queue = VecDeque::new();
    for &v in starts {
        if !seen[v as usize] {
            seen[v as usize] = true;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for (e, s) in graph.incident(v) {
            let edge = graph.edges[e as usize];
            let w = if s > 0 { edge.hi } else { edge.lo };
            if !seen[w as usize] && pass(v, e, s, w) {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// `r(E)` as flags: vertices reachable from the sources without using `E`.
pub fn source_region(graph: &LatticeGraph, cut_flags: &[bool]) -> Vec<bool> {
    bfs(graph, &graph.sources, |_, e, _, _| !cut_flags[e as usize])
}

fn capacity_of(caps: &CapacityField, edges: &[u32]) -> (f64, Option<Q>) {
    match &caps.values {
        Values::Exact { scale, units } => {
            let total: i128 = edges.iter().map(|&e| units[e as usize] as i128).sum();
            let v = q(total, *scale as i128);
            (to_f64(&v), Some(v))
        }
        Values::Float(_) => (edges.iter().map(|&e| caps.get_f64(e)).sum(), None),
    }
}

/// Source-nearest minimal cutset of a maximal stream `s`.
pub fn min_cutset(graph: &LatticeGraph, caps: &CapacityField, s: &StreamFunction) -> Result<Cutset> {
    let eps = f64::tolerance(caps.max_f64()) * 8.0;
    let reach = bfs(graph, &graph.sources, |_, e, sign, _| residual_positive(caps, s, e, sign, eps));
    if let Some(&t) = graph.sinks.iter().find(|&&t| reach[t as usize]) {
        return Err(Error::NotMaximal(format!("residual path reaches outlet vertex {t}")));
    }
    // sink side: connected to a sink outside the residual-reachable set
    let far = bfs(graph, &graph.sinks, |_, _, _, w| !reach[w as usize]);
    let edges: Vec<u32> = (0..graph.edge_count() as u32)
        .filter(|&e| {
            let ed = graph.edges[e as usize];
            (reach[ed.lo as usize] && far[ed.hi as usize]) || (reach[ed.hi as usize] && far[ed.lo as usize])
        })
        .collect();
    Ok(finish(graph, caps, edges))
}

fn finish(graph: &LatticeGraph, caps: &CapacityField, edges: Vec<u32>) -> Cutset {
    let cut_flags = flags(graph.edge_count(), &edges);
    let region = source_region(graph, &cut_flags);
    let (capacity, capacity_exact) = capacity_of(caps, &edges);
    Cutset {
        n: graph.n,
        edges,
        capacity,
        capacity_exact,
        source_side: (0..graph.vertex_count() as u32).filter(|&v| region[v as usize]).collect(),
    }
}

/// Minimal cutset of minimal cardinality among those of minimal capacity,
/// from the perturbed capacities `K·t + 1` with `K = |Π_n| + 1`.
pub fn min_card_min_cutset(graph: &LatticeGraph, caps: &CapacityField) -> Result<Cutset> {
    let (scale, units) = match &caps.values {
        Values::Exact { scale, units } => (*scale, units),
        Values::Float(_) => {
            return Err(Error::Unavailable("minimal cardinality requires exact capacities".into()))
        }
    };
    let k = graph.edge_count() as i64 + 1;
    let overflow = || Error::Overflow("perturbed capacities exceed the exact-mode range".into());
    let perturbed: Vec<i64> = units
        .iter()
        .map(|&t| t.checked_mul(k).and_then(|x| x.checked_add(1)).ok_or_else(overflow))
        .collect::<Result<_>>()?;
    let pcaps = CapacityField::from_units(scale, perturbed);
    let (stream, _) = max_flow(graph, &pcaps)?;
    let cut = min_cutset(graph, &pcaps, &stream)?;
    Ok(finish(graph, caps, cut.edges))
}

/// Outcome of [`verify_cutset`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub cuts: bool,
    /// Vertex path from a source to a sink avoiding `E`, when `E` does not cut.
    pub witness_path: Option<Vec<u32>>,
    pub minimal: bool,
    /// Edges whose removal keeps the remaining set a cut.
    pub removable_edges: Vec<u32>,
    pub boundary_identity: bool,
}

impl CutReport {
    pub fn ok(&self) -> bool {
        self.cuts && self.minimal && self.boundary_identity
    }
}

pub fn verify_cutset(graph: &LatticeGraph, cut: &Cutset) -> CutReport {
    let cut_flags = flags(graph.edge_count(), &cut.edges);
    let mut parent = vec![u32::MAX; graph.vertex_count()];
    let from_sources = bfs(graph, &graph.sources, |v, e, _, w| {
        let ok = !cut_flags[e as usize];
        if ok {
            parent[w as usize] = v;
        }
        ok
    });
    let hit = graph.sinks.iter().copied().find(|&t| from_sources[t as usize]);
    let witness_path = hit.map(|t| {
        let mut path = vec![t];
        let mut cur = t;
        while parent[cur as usize] != u32::MAX {
            cur = parent[cur as usize];
            path.push(cur);
        }
        path.reverse();
        path
    });
    let from_sinks = bfs(graph, &graph.sinks, |_, e, _, _| !cut_flags[e as usize]);
    let removable_edges: Vec<u32> = cut
        .edges
        .iter()
        .copied()
        .filter(|&e| {
            let ed = graph.edges[e as usize];
            let joins = (from_sources[ed.lo as usize] && from_sinks[ed.hi as usize])
                || (from_sources[ed.hi as usize] && from_sinks[ed.lo as usize]);
            !joins
        })
        .collect();
    let boundary: Vec<u32> = (0..graph.edge_count() as u32)
        .filter(|&e| {
            let ed = graph.edges[e as usize];
            from_sources[ed.lo as usize] != from_sources[ed.hi as usize]
        })
        .collect();
    let mut sorted = cut.edges.clone();
    sorted.sort_unstable();
    sorted.dedup();
    CutReport {
        cuts: witness_path.is_none(),
        witness_path,
        minimal: removable_edges.is_empty(),
        removable_edges,
        boundary_identity: boundary == sorted,
    }
}

/// `R(E) = r(E) + (1/2n)[-1,1]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutRegion {
    pub voxels: VoxelSet,
}

pub fn cut_region(graph: &LatticeGraph, cut: &Cutset) -> CutRegion {
    CutRegion { voxels: graph.fatten(cut.source_side.iter().copied()) }
}

impl CutRegion {
    /// `L^d(R(E)) = |r(E)| / n^d`.
    pub fn volume(&self) -> Q {
        self.voxels.volume()
    }

    /// `L^d(R(E) ∩ Ω)` for a box-union domain.
    pub fn clipped_volume(&self, omega: &BoxUnion) -> Q {
        self.voxels.overlap_volume_cells(&omega.disjoint_cells())
    }

    /// `𝔡(R(E), E)` with `E = R(E) ∩ Ω`.
    pub fn distance_to_clipped(&self, omega: &BoxUnion) -> Q {
        self.volume() - self.clipped_volume(omega)
    }

    /// `𝔡(R(E) ∩ Ω, F)`.
    pub fn distance_to(&self, omega: &BoxUnion, reference: &BoxUnion) -> Q {
        self.voxels.sym_diff(Some(omega), reference)
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty() || self.volume().is_zero()
    }

    /// Cube centres `k / n`.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let n = self.voxels.n as f64;
        self.voxels.centers.iter().map(|k| k.iter().map(|&c| c as f64 / n).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{sample, LawSpec};
    use crate::discretization::discretize;
    use crate::geometry::{qi, shapes};

    fn single_edge() -> LatticeGraph {
        let mut g = LatticeGraph::from_predicate(2, 1, &[0, 0], &[1, 0], |_| true);
        g.sources = vec![0];
        g.sinks = vec![1];
        g
    }

    #[test]
    fn single_edge_cut() {
        let g = single_edge();
        let caps = CapacityField::from_units(1, vec![3]);
        let (s, _) = max_flow(&g, &caps).unwrap();
        let c = min_cutset(&g, &caps, &s).unwrap();
        assert_eq!(c.edges, vec![0]);
        assert_eq!(c.capacity, 3.0);
        assert!(verify_cutset(&g, &c).ok());
        assert_eq!(min_card_min_cutset(&g, &caps).unwrap(), c);
    }

    #[test]
    fn square_vertical_interface() {
        let disc = discretize(&shapes::unit_square(), 4).unwrap();
        let g = &disc.graph;
        let caps = sample(&LawSpec::constant(1), g, 0, 0).unwrap();
        let (s, r) = max_flow(g, &caps).unwrap();
        let c = min_cutset(g, &caps, &s).unwrap();
        assert_eq!(c.capacity_exact, Some(qi(5)));
        assert_eq!(r.phi, 5.0);
        assert_eq!(c.cardinality(), 5);
        assert!(c.edges.iter().all(|&e| g.edges[e as usize].axis == 0));
        let x0 = g.vertex(g.edges[c.edges[0] as usize].lo)[0];
        assert!(c.edges.iter().all(|&e| g.vertex(g.edges[e as usize].lo)[0] == x0));
        assert!(verify_cutset(g, &c).ok());
        let region = cut_region(g, &c);
        assert_eq!(region.volume(), q(c.source_side.len() as i128, 16));
        let mc = min_card_min_cutset(g, &caps).unwrap();
        assert_eq!(mc.cardinality(), 5);
    }

    #[test]
    fn zero_capacity_wall() {
        let disc = discretize(&shapes::unit_square(), 4).unwrap();
        let g = &disc.graph;
        // unit capacities except a zero wall of horizontal edges at x in [2/4, 3/4]
        let units: Vec<i64> = (0..g.edge_count() as u32)
            .map(|e| {
                let (axis, k) = g.edge_key(e);
                if axis == 0 && k[0] == 2 {
                    0
                } else {
                    1
                }
            })
            .collect();
        let caps = CapacityField::from_units(1, units);
        let (s, r) = max_flow(g, &caps).unwrap();
        assert_eq!(r.phi, 0.0);
        let c = min_cutset(g, &caps, &s).unwrap();
        assert_eq!(c.capacity, 0.0);
        assert!(c.edges.iter().all(|&e| caps.get_f64(e) == 0.0));
        assert!(verify_cutset(g, &c).ok());
    }

    #[test]
    fn verify_detects_defects() {
        let disc = discretize(&shapes::unit_square(), 3).unwrap();
        let g = &disc.graph;
        let caps = sample(&LawSpec::constant(1), g, 0, 0).unwrap();
        let (s, _) = max_flow(g, &caps).unwrap();
        let c = min_cutset(g, &caps, &s).unwrap();
        let mut extra = c.clone();
        let spare = (0..g.edge_count() as u32).find(|e| !c.edges.contains(e)).unwrap();
        extra.edges.push(spare);
        extra.edges.sort();
        let rep = verify_cutset(g, &extra);
        assert!(rep.cuts && !rep.minimal);
        assert_eq!(rep.removable_edges, vec![spare]);
        let mut fewer = c.clone();
        fewer.edges.remove(0);
        let rep = verify_cutset(g, &fewer);
        assert!(!rep.cuts);
        let path = rep.witness_path.unwrap();
        assert!(g.source_flags()[path[0] as usize]);
        assert!(g.sink_flags()[*path.last().unwrap() as usize]);
    }

    #[test]
    fn not_maximal_detected() {
        let g = single_edge();
        let caps = CapacityField::from_units(1, vec![3]);
        let s = StreamFunction::from_units(&g, 1, vec![1]);
        assert!(matches!(min_cutset(&g, &caps, &s), Err(Error::NotMaximal(_))));
    }

    #[test]
    fn min_card_prefers_shorter_cut() {
        // 4x2 strip with two cuts of capacity 2: the staircase through the free
        // vertical edge at x = 2 (three edges, nearest to the sources) and the
        // column of horizontal edges at x = 2 (two edges)
        let mut g = LatticeGraph::from_predicate(2, 1, &[0, 0], &[3, 1], |_| true);
        g.sources = vec![g.find(&[0, 0]).unwrap(), g.find(&[0, 1]).unwrap()];
        g.sinks = vec![g.find(&[3, 0]).unwrap(), g.find(&[3, 1]).unwrap()];
        let mut units = vec![10i64; g.edge_count()];
        let set = |units: &mut Vec<i64>, axis: usize, k: [i64; 2], v: i64| {
            units[g.edge_by_key(axis, &k).unwrap() as usize] = v;
        };
        set(&mut units, 0, [1, 0], 1);
        set(&mut units, 1, [2, 0], 0);
        set(&mut units, 0, [2, 1], 1);
        set(&mut units, 0, [2, 0], 1);
        let caps = CapacityField::from_units(1, units);
        let (s, r) = max_flow(&g, &caps).unwrap();
        assert_eq!(r.phi, 2.0);
        let c = min_cutset(&g, &caps, &s).unwrap();
        let mc = min_card_min_cutset(&g, &caps).unwrap();
        assert_eq!(mc.capacity, 2.0);
        assert!(mc.cardinality() <= c.cardinality());
        assert_eq!(mc.cardinality(), 2);
        assert!(verify_cutset(&g, &mc).ok());
    }

    #[test]
    fn float_mode_has_no_min_card() {
        let g = single_edge();
        let caps = CapacityField::from_f64(vec![1.5]);
        assert!(matches!(min_card_min_cutset(&g, &caps), Err(Error::Unavailable(_))));
        let (s, _) = max_flow(&g, &caps).unwrap();
        assert_eq!(min_cutset(&g, &caps, &s).unwrap().capacity, 1.5);
    }
}
