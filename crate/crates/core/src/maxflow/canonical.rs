//! Cycle cancellation and path decomposition of streams.

use super::{Amount, StreamFunction, StreamValues, FLOAT_TOLERANCE};
use crate::capacity::CapacityField;
use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;

/// Terminal class of a vertex: 0 interior, 1 source, 2 sink.
fn classes(graph: &LatticeGraph) -> Vec<u8> {
    let mut c = vec![0u8; graph.vertex_count()];
    for &v in &graph.sources {
        c[v as usize] = 1;
    }
    for &v in &graph.sinks {
        c[v as usize] = 2;
    }
    c
}

fn incidence(graph: &LatticeGraph) -> (Vec<u32>, Vec<(u32, i8)>) {
    let mut first = Vec::with_capacity(graph.vertex_count() + 1);
    let mut list = Vec::with_capacity(2 * graph.edge_count());
    for v in 0..graph.vertex_count() as u32 {
        first.push(list.len() as u32);
        list.extend(graph.incident(v));
    }
    first.push(list.len() as u32);
    (first, list)
}

fn other_end(graph: &LatticeGraph, e: u32, v: u32) -> u32 {
    let edge = graph.edges[e as usize];
    if edge.lo == v {
        edge.hi
    } else {
        edge.lo
    }
}

fn leaving<A: Amount>(flows: &[A], e: u32, s: i8) -> A {
    if s > 0 {
        flows[e as usize]
    } else {
        -flows[e as usize]
    }
}

fn reduce<A: Amount>(flows: &mut [A], e: u32, s: i8, b: A) {
    if s > 0 {
        flows[e as usize] -= b;
    } else {
        flows[e as usize] += b;
    }
}

/// Removes every directed cycle of the flow; boundary fluxes are unchanged.
pub fn cancel_cycles<A: Amount>(graph: &LatticeGraph, flows: &mut [A], eps: A) -> usize {
    let nv = graph.vertex_count();
    let (first, list) = incidence(graph);
    let mut ptr: Vec<usize> = first[..nv].iter().map(|&x| x as usize).collect();
    let mut state = vec![0u8; nv];
    let mut pos = vec![0usize; nv];
    let mut cancelled = 0;
    for root in 0..nv as u32 {
        if state[root as usize] != 0 {
            continue;
        }
        let mut stack = vec![root];
        state[root as usize] = 1;
        pos[root as usize] = 0;
        while let Some(&v) = stack.last() {
            let vi = v as usize;
            let end = first[vi + 1] as usize;
            while ptr[vi] < end {
                let (e, s) = list[ptr[vi]];
                if leaving(flows, e, s) > eps && state[other_end(graph, e, v) as usize] != 2 {
                    break;
                }
                ptr[vi] += 1;
            }
            if ptr[vi] == end {
                state[vi] = 2;
                stack.pop();
                continue;
            }
            let (e, s) = list[ptr[vi]];
            let w = other_end(graph, e, v);
            if state[w as usize] == 0 {
                state[w as usize] = 1;
                pos[w as usize] = stack.len();
                stack.push(w);
                continue;
            }
            // cycle stack[pos[w]..] closed by the current arc of v
            let p = pos[w as usize];
            let mut b = leaving(flows, e, s);
            for &u in &stack[p..] {
                let (e2, s2) = list[ptr[u as usize]];
                b = b.min_of(leaving(flows, e2, s2));
            }
            let mut cut = None;
            for (i, &u) in stack[p..].iter().enumerate() {
                let (e2, s2) = list[ptr[u as usize]];
                reduce(flows, e2, s2, b);
                if cut.is_none() && leaving(flows, e2, s2) <= eps {
                    cut = Some(p + i);
                }
            }
            cancelled += 1;
            let keep = cut.unwrap_or(stack.len() - 1);
            for &u in &stack[keep + 1..] {
                state[u as usize] = 0;
            }
            stack.truncate(keep + 1);
        }
    }
    cancelled
}

/// A path between terminals whose interior avoids terminals.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<A> {
    pub from: u32,
    pub to: u32,
    pub from_class: u8,
    pub to_class: u8,
    pub amount: A,
    /// Edges with the sign of traversal relative to the canonical orientation.
    pub edges: Vec<(u32, i8)>,
}

/// Decomposes an acyclic flow into terminal-to-terminal segments. Flow that
/// cannot be routed between terminals (numerical residue) is reported as the
/// second component.
pub fn decompose<A: Amount>(graph: &LatticeGraph, flows: &[A], eps: A) -> (Vec<Segment<A>>, A) {
    let nv = graph.vertex_count();
    let class = classes(graph);
    let (first, list) = incidence(graph);
    let mut ptr: Vec<usize> = first[..nv].iter().map(|&x| x as usize).collect();
    let mut f = flows.to_vec();
    let mut segments = Vec::new();
    let mut residue = A::ZERO;
    let terminals: Vec<u32> = graph.sources.iter().chain(&graph.sinks).copied().collect();
    let next_arc = |f: &[A], ptr: &mut [usize], v: u32| -> Option<(u32, i8)> {
        let vi = v as usize;
        let end = first[vi + 1] as usize;
        while ptr[vi] < end {
            let (e, s) = list[ptr[vi]];
            if leaving(f, e, s) > eps {
                return Some((e, s));
            }
            ptr[vi] += 1;
        }
        None
    };
    for &start in &terminals {
        loop {
            let mut path = Vec::new();
            let mut cur = start;
            while let Some((e, s)) = next_arc(&f, &mut ptr, cur) {
                path.push((e, s));
                cur = other_end(graph, e, cur);
                if class[cur as usize] != 0 {
                    break;
                }
            }
            if path.is_empty() {
                break;
            }
            let mut b = leaving(&f, path[0].0, path[0].1);
            for &(e, s) in &path[1..] {
                b = b.min_of(leaving(&f, e, s));
            }
            for &(e, s) in &path {
                reduce(&mut f, e, s, b);
            }
            if class[cur as usize] == 0 {
                residue += b;
                continue;
            }
            segments.push(Segment {
                from: start,
                to: cur,
                from_class: class[start as usize],
                to_class: class[cur as usize],
                amount: b,
                edges: path,
            });
        }
    }
    (segments, residue)
}

/// Core of [`canonicalize_stream`] on raw edge flows.
pub fn canonicalize_flows<A: Amount>(graph: &LatticeGraph, flows: &[A], eps: A) -> Result<Vec<A>> {
    let mut f = flows.to_vec();
    cancel_cycles(graph, &mut f, eps);
    let (segments, _) = decompose(graph, &f, eps);
    for seg in &segments {
        match (seg.from_class, seg.to_class) {
            (1, 2) => {}
            (2, 1) => {
                return Err(Error::NotMaximal(format!(
                    "flow of {:?} runs from outlet vertex {} back to inlet vertex {}",
                    seg.amount, seg.from, seg.to
                )))
            }
            _ => {
                for &(e, s) in &seg.edges {
                    reduce(&mut f, e, s, seg.amount);
                }
            }
        }
    }
    Ok(f)
}

fn check_conservation<A: Amount>(graph: &LatticeGraph, flows: &[A], tol: f64) -> Result<()> {
    let class = classes(graph);
    for v in 0..graph.vertex_count() as u32 {
        if class[v as usize] != 0 {
            continue;
        }
        let net: f64 = graph.incident(v).map(|(e, s)| s as f64 * flows[e as usize].to_f64()).sum();
        if net.abs() > tol {
            return Err(Error::NotConservative { vertex: v as usize, residual: net.abs() });
        }
    }
    Ok(())
}

/// Maximal stream with the same flow value, no circulation, and no flow
/// entering the inlet: the result decomposes into inlet-to-outlet paths only.
pub fn canonicalize_stream(graph: &LatticeGraph, caps: &CapacityField, s: &StreamFunction) -> Result<StreamFunction> {
    let values = match &s.values {
        StreamValues::Exact { scale, units } => {
            check_conservation(graph, units, 0.0)?;
            StreamValues::Exact { scale: *scale, units: canonicalize_flows(graph, units, 0)? }
        }
        StreamValues::Float(v) => {
            check_conservation(graph, v, FLOAT_TOLERANCE)?;
            StreamValues::Float(canonicalize_flows(graph, v, f64::tolerance(caps.max_f64()))?)
        }
    };
    Ok(StreamFunction { values, ..s.clone() })
}
