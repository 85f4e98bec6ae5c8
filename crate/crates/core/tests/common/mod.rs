#![allow(dead_code)]

use fppflow::capacity::{CapacityField, Values};
use fppflow::cylinder::CylinderSpec;
use fppflow::geometry::{q, qi};
use fppflow::lattice::LatticeGraph;
use fppflow::maxflow::{StreamFunction, StreamValues};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn units(caps: &CapacityField) -> (i64, &[i64]) {
    match &caps.values {
        Values::Exact { scale, units } => (*scale, units),
        Values::Float(_) => panic!("exact capacities expected"),
    }
}

pub fn stream_units(s: &StreamFunction) -> (i64, &[i64]) {
    match &s.values {
        StreamValues::Exact { scale, units } => (*scale, units),
        StreamValues::Float(_) => panic!("exact stream expected"),
    }
}

/// Minimum of `V(∂S)` over all vertex sets `S` containing every source and no
/// sink, by enumeration of the free vertices.
pub fn brute_force_min_cut(g: &LatticeGraph, t: &[i64]) -> i64 {
    let src = g.source_flags();
    let snk = g.sink_flags();
    let free: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| !src[v as usize] && !snk[v as usize]).collect();
    assert!(free.len() <= 16, "oracle limited to 2^16 subsets");
    let mut best = i64::MAX;
    let mut side = src.clone();
    for mask in 0u32..(1 << free.len()) {
        for (i, &v) in free.iter().enumerate() {
            side[v as usize] = mask >> i & 1 == 1;
        }
        let cut: i64 = g
            .edges
            .iter()
            .zip(t)
            .filter(|(e, _)| side[e.lo as usize] != side[e.hi as usize])
            .map(|(_, &c)| c)
            .sum();
        best = best.min(cut);
    }
    best
}

/// Edge subsets of minimum capacity and, among those, minimum size, by
/// enumeration of source-side vertex sets.
pub fn brute_force_min_card(g: &LatticeGraph, t: &[i64]) -> (i64, usize) {
    let src = g.source_flags();
    let snk = g.sink_flags();
    let free: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| !src[v as usize] && !snk[v as usize]).collect();
    let mut best = (i64::MAX, usize::MAX);
    let mut side = src.clone();
    for mask in 0u32..(1 << free.len()) {
        for (i, &v) in free.iter().enumerate() {
            side[v as usize] = mask >> i & 1 == 1;
        }
        let mut cap = 0;
        let mut card = 0;
        for (e, &c) in g.edges.iter().zip(t) {
            if side[e.lo as usize] != side[e.hi as usize] {
                cap += c;
                card += 1;
            }
        }
        best = best.min((cap, card));
    }
    best
}

/// Adds a random feasible circulation around every unit square of the lattice.
/// The flow value and admissibility are preserved.
pub fn add_circulations(g: &LatticeGraph, t: &[i64], f: &mut [i64], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut squares = Vec::new();
    for v in 0..g.vertex_count() as u32 {
        for i in 0..g.dim {
            for j in i + 1..g.dim {
                let k = g.vertex(v).to_vec();
                let step = |k: &[i64], a: usize| {
                    let mut m = k.to_vec();
                    m[a] += 1;
                    m
                };
                let b = step(&k, i);
                let d = step(&k, j);
                let edges = [
                    (g.edge_by_key(i, &k), 1i64),
                    (g.edge_by_key(j, &b), 1),
                    (g.edge_by_key(i, &d), -1),
                    (g.edge_by_key(j, &k), -1),
                ];
                if edges.iter().all(|(e, _)| e.is_some()) {
                    squares.push(edges.map(|(e, s)| (e.unwrap(), s)));
                }
            }
        }
    }
    squares.shuffle(&mut rng);
    for sq in squares {
        let mut lo = i64::MIN;
        let mut hi = i64::MAX;
        for (e, s) in sq {
            let (cur, cap) = (f[e as usize], t[e as usize]);
            // -cap <= cur + s*delta <= cap
            let (a, b) = if s > 0 { (-cap - cur, cap - cur) } else { (cur - cap, cur + cap) };
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if lo <= hi {
            let delta = rng.gen_range(lo..=hi);
            for (e, s) in sq {
                f[e as usize] += s * delta;
            }
        }
    }
}

/// Cylinder along `e_1` whose sources and sinks are restricted to the bottom and
/// top faces, so no flow crosses the lateral boundary.
pub fn closed_tube(n: i64) -> (CylinderSpec, LatticeGraph) {
    let cyl = CylinderSpec::new(vec![qi(0), qi(0)], vec![1, 0], vec![q(1, 2)], q(1, 2), n).unwrap();
    let mut g = cyl.graph().unwrap();
    let all: Vec<u32> = (0..g.vertex_count() as u32).collect();
    g.sources = all.iter().copied().filter(|&v| g.vertex(v)[0] == -n / 2).collect();
    g.sinks = all.iter().copied().filter(|&v| g.vertex(v)[0] == n / 2).collect();
    (cyl, g)
}

/// Γ¹ sign condition: no edge carries flow into an inlet vertex.
pub fn no_flow_into_inlet(g: &LatticeGraph, s: &StreamFunction) -> bool {
    let src = g.source_flags();
    g.edges.iter().enumerate().all(|(e, ed)| {
        let f = s.get_f64(e as u32);
        (!src[ed.hi as usize] || f <= 0.0) && (!src[ed.lo as usize] || f >= 0.0)
    })
}
