//! Highest-label preflow-push with gap relabelling and periodic global relabels.

use std::collections::VecDeque;

use super::amount::Amount;
use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub pushes: u64,
    pub relabels: u64,
    pub global_relabels: u64,
    pub gaps: u64,
}

/// Residual network in compressed adjacency form. Lattice vertices keep their
/// ids; the super source and super sink are the last two nodes.
struct Network<A> {
    nodes: usize,
    first: Vec<u32>,
    head: Vec<u32>,
    rev: Vec<u32>,
    res: Vec<A>,
    /// Arc carrying the `lo -> hi` direction of each lattice edge.
    edge_arc: Vec<u32>,
}

impl<A: Amount> Network<A> {
    fn build(g: &LatticeGraph, caps: &[A], big: A) -> Self {
        let v = g.vertex_count();
        let nodes = v + 2;
        let (s, t) = (v, v + 1);
        let mut tails: Vec<(u32, u32, A, A)> = Vec::with_capacity(g.edge_count() + g.sources.len() + g.sinks.len());
        for (e, edge) in g.edges.iter().enumerate() {
            tails.push((edge.lo, edge.hi, caps[e], caps[e]));
        }
        for &x in &g.sources {
            tails.push((s as u32, x, big, A::ZERO));
        }
        for &x in &g.sinks {
            tails.push((x, t as u32, big, A::ZERO));
        }
        let mut degree = vec![0u32; nodes + 1];
        for &(a, b, _, _) in &tails {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 0..nodes {
            degree[i + 1] += degree[i];
        }
        let first = degree.clone();
        let mut fill = degree;
        let m = 2 * tails.len();
        let mut head = vec![0u32; m];
        let mut rev = vec![0u32; m];
        let mut res = vec![A::ZERO; m];
        let mut edge_arc = Vec::with_capacity(g.edge_count());
        for (i, &(a, b, fwd, bwd)) in tails.iter().enumerate() {
            let ia = fill[a as usize];
            fill[a as usize] += 1;
            let ib = fill[b as usize];
            fill[b as usize] += 1;
            head[ia as usize] = b;
            rev[ia as usize] = ib;
            res[ia as usize] = fwd;
            head[ib as usize] = a;
            rev[ib as usize] = ia;
            res[ib as usize] = bwd;
            if i < g.edge_count() {
                edge_arc.push(ia);
            }
        }
        Network { nodes, first, head, rev, res, edge_arc }
    }

    fn arcs(&self, v: usize) -> std::ops::Range<usize> {
        self.first[v] as usize..self.first[v + 1] as usize
    }
}

struct Engine<'a, A> {
    net: &'a mut Network<A>,
    excess: Vec<A>,
    label: Vec<usize>,
    current: Vec<usize>,
    buckets: Vec<Vec<u32>>,
    count: Vec<usize>,
    eps: A,
    stats: SolverStats,
    work_since_global: usize,
}

impl<'a, A: Amount> Engine<'a, A> {
    fn is_active(&self, v: usize, target: usize, blocked: usize, ceiling: usize) -> bool {
        v != target && v != blocked && self.excess[v] > self.eps && self.label[v] < ceiling
    }

    /// Exact distances to `target` in the residual graph, avoiding `blocked`;
    /// unreachable nodes get `ceiling`.
    fn global_relabel(&mut self, target: usize, blocked: usize, ceiling: usize) {
        self.stats.global_relabels += 1;
        let nodes = self.net.nodes;
        for l in self.label.iter_mut() {
            *l = ceiling;
        }
        self.label[target] = 0;
        let mut queue = VecDeque::from([target]);
        while let Some(w) = queue.pop_front() {
            let next = self.label[w] + 1;
            for a in self.net.arcs(w) {
                let v = self.net.head[a] as usize;
                if v == blocked || self.label[v] != ceiling || v == target {
                    continue;
                }
                if self.net.res[self.net.rev[a] as usize] > self.eps {
                    self.label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        self.label[blocked] = ceiling;
        self.count = vec![0; ceiling + 1];
        for b in self.buckets.iter_mut() {
            b.clear();
        }
        for v in 0..nodes {
            if self.label[v] < ceiling {
                self.count[self.label[v]] += 1;
            }
            self.current[v] = self.net.first[v] as usize;
            if self.is_active(v, target, blocked, ceiling) {
                self.buckets[self.label[v]].push(v as u32);
            }
        }
        self.work_since_global = 0;
    }

    fn push(&mut self, v: usize, a: usize, target: usize, blocked: usize, ceiling: usize) {
        let w = self.net.head[a] as usize;
        let delta = self.excess[v].min_of(self.net.res[a]);
        let was_active = self.is_active(w, target, blocked, ceiling);
        self.net.res[a] -= delta;
        let r = self.net.rev[a] as usize;
        self.net.res[r] += delta;
        self.excess[v] -= delta;
        self.excess[w] += delta;
        self.stats.pushes += 1;
        if !was_active && self.is_active(w, target, blocked, ceiling) {
            self.buckets[self.label[w]].push(w as u32);
        }
    }

    fn relabel(&mut self, v: usize, ceiling: usize) {
        self.stats.relabels += 1;
        let old = self.label[v];
        let mut best = ceiling;
        for a in self.net.arcs(v) {
            if self.net.res[a] > self.eps {
                best = best.min(self.label[self.net.head[a] as usize] + 1);
            }
        }
        let new = best.min(ceiling);
        self.label[v] = new;
        self.current[v] = self.net.first[v] as usize;
        self.count[old] -= 1;
        if new < ceiling {
            self.count[new] += 1;
        }
        self.work_since_global += self.net.arcs(v).len() + 12;
        if self.count[old] == 0 && old > 0 {
            // nothing at label `old` any more: everything above is cut off from the target
            self.stats.gaps += 1;
            for u in 0..self.net.nodes {
                if self.label[u] > old && self.label[u] < ceiling {
                    self.count[self.label[u]] -= 1;
                    self.label[u] = ceiling;
                }
            }
        }
    }

    /// Pushes all excess towards `target` as far as the residual graph allows.
    fn run(&mut self, target: usize, blocked: usize, ceiling: usize) {
        self.buckets = vec![Vec::new(); ceiling + 1];
        self.global_relabel(target, blocked, ceiling);
        let mut top = ceiling;
        loop {
            if self.work_since_global > 6 * self.net.nodes + self.net.head.len() {
                self.global_relabel(target, blocked, ceiling);
                top = ceiling;
            }
            while top > 0 && self.buckets[top - 1].is_empty() {
                top -= 1;
            }
            if top == 0 {
                break;
            }
            let v = self.buckets[top - 1].pop().expect("nonempty bucket") as usize;
            if !self.is_active(v, target, blocked, ceiling) || self.label[v] != top - 1 {
                continue;
            }
            self.discharge(v, target, blocked, ceiling);
            // newly active nodes sit one label below v's final label
            top = top.max(self.label[v].min(ceiling));
        }
    }

    fn discharge(&mut self, v: usize, target: usize, blocked: usize, ceiling: usize) {
        let end = self.net.first[v + 1] as usize;
        while self.excess[v] > self.eps {
            if self.current[v] == end {
                self.relabel(v, ceiling);
                if self.label[v] >= ceiling {
                    return;
                }
                continue;
            }
            let a = self.current[v];
            let w = self.net.head[a] as usize;
            if w != blocked && self.net.res[a] > self.eps && self.label[v] == self.label[w] + 1 {
                self.push(v, a, target, blocked, ceiling);
            } else {
                self.current[v] += 1;
            }
        }
    }
}

/// Output of [`solve`]: net flow on each lattice edge along `lo -> hi`, and the flow value.
pub struct Solution<A> {
    pub flows: Vec<A>,
    pub value: A,
    pub stats: SolverStats,
}

/// Maximal flow from `g.sources` to `g.sinks` with undirected capacities `caps`.
pub fn solve<A: Amount>(g: &LatticeGraph, caps: &[A]) -> Result<Solution<A>> {
    if caps.len() != g.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "{} capacities for {} edges",
            caps.len(),
            g.edge_count()
        )));
    }
    if g.sources.is_empty() || g.sinks.is_empty() {
        return Err(Error::EmptyTerminals("source or sink set is empty".into()));
    }
    let mut total = A::ZERO;
    let mut max_cap = A::ZERO;
    for &c in caps {
        if c < A::ZERO {
            return Err(Error::InvalidArgument("negative capacity".into()));
        }
        total += c;
        if c > max_cap {
            max_cap = c;
        }
    }
    let big = total + A::from_i64(1);
    if big.to_f64() > (i64::MAX / 4) as f64 {
        return Err(Error::Overflow("total capacity exceeds the exact-mode range".into()));
    }
    let mut net = Network::build(g, caps, big);
    let v = g.vertex_count();
    let (s, t) = (v, v + 1);
    let nodes = net.nodes;
    let eps = A::tolerance(max_cap);
    let mut excess = vec![A::ZERO; nodes];
    for a in net.arcs(s) {
        let delta = net.res[a];
        let w = net.head[a] as usize;
        net.res[a] = A::ZERO;
        let r = net.rev[a] as usize;
        net.res[r] += delta;
        excess[w] += delta;
        excess[s] -= delta;
    }
    let mut engine = Engine {
        net: &mut net,
        excess,
        label: vec![0; nodes],
        current: vec![0; nodes],
        buckets: Vec::new(),
        count: Vec::new(),
        eps,
        stats: SolverStats::default(),
        work_since_global: 0,
    };
    // phase 1: maximal preflow into the sink
    engine.run(t, s, nodes);
    // phase 2: return the remaining excess to the source
    engine.run(s, t, 2 * nodes);
    let value = engine.excess[t];
    let stats = std::mem::take(&mut engine.stats);
    let flows = (0..g.edge_count()).map(|e| caps[e] - net.res[net.edge_arc[e] as usize]).collect();
    Ok(Solution { flows, value, stats })
}
