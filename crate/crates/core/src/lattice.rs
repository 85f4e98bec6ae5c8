//! Finite subgraphs of the lattice `Z^d / n` with a dense vertex index.

use crate::geometry::{q, BoxUnion, VoxelSet, Q};

pub const NONE: u32 = u32::MAX;

/// An edge `[k/n, (k + f_axis)/n]`, stored by its endpoints' vertex ids.
/// The canonical orientation runs from `lo` to `hi`, i.e. along `+f_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub axis: u8,
    pub lo: u32,
    pub hi: u32,
}

/// Dense index over an integer box `origin + [0, extent)`.
#[derive(Clone, Debug)]
struct DenseIndex {
    origin: Vec<i64>,
    extent: Vec<i64>,
    slots: Vec<u32>,
}

impl DenseIndex {
    fn offset(&self, k: &[i64]) -> Option<usize> {
        let mut off = 0usize;
        for i in (0..k.len()).rev() {
            let r = k[i] - self.origin[i];
            if r < 0 || r >= self.extent[i] {
                return None;
            }
            off = off * self.extent[i] as usize + r as usize;
        }
        Some(off)
    }
}

/// Vertices, undirected edges and two disjoint terminal sets.
#[derive(Clone, Debug)]
pub struct LatticeGraph {
    pub dim: usize,
    pub n: i64,
    coords: Vec<i64>,
    pub edges: Vec<Edge>,
    /// `up[v * d + i]` is the edge from `v` along `+f_i`, or `NONE`.
    up: Vec<u32>,
    down: Vec<u32>,
    pub sources: Vec<u32>,
    pub sinks: Vec<u32>,
    index: DenseIndex,
}

impl LatticeGraph {
    /// All `k` in `[lo, hi]` (inclusive) accepted by `keep`; edges join accepted
    /// lattice neighbours. Vertices are numbered with the first axis varying fastest.
    pub fn from_predicate(dim: usize, n: i64, lo: &[i64], hi: &[i64], mut keep: impl FnMut(&[i64]) -> bool) -> Self {
        let extent: Vec<i64> = lo.iter().zip(hi).map(|(a, b)| (b - a + 1).max(0)).collect();
        let total: usize = extent.iter().map(|&e| e as usize).product();
        let mut slots = vec![NONE; total];
        let mut coords = Vec::new();
        let mut count = 0u32;
        if total > 0 {
            let mut k = lo.to_vec();
            for slot in slots.iter_mut() {
                if keep(&k) {
                    *slot = count;
                    coords.extend_from_slice(&k);
                    count += 1;
                }
                for i in 0..dim {
                    k[i] += 1;
                    if k[i] <= hi[i] {
                        break;
                    }
                    k[i] = lo[i];
                }
            }
        }
        let index = DenseIndex { origin: lo.to_vec(), extent, slots };
        let mut g = LatticeGraph {
            dim,
            n,
            coords,
            edges: Vec::new(),
            up: vec![NONE; count as usize * dim],
            down: vec![NONE; count as usize * dim],
            sources: Vec::new(),
            sinks: Vec::new(),
            index,
        };
        let mut nb = vec![0i64; dim];
        for v in 0..count {
            for axis in 0..dim {
                nb.copy_from_slice(g.vertex(v));
                nb[axis] += 1;
                if let Some(w) = g.find(&nb) {
                    let id = g.edges.len() as u32;
                    g.edges.push(Edge { axis: axis as u8, lo: v, hi: w });
                    g.up[v as usize * dim + axis] = id;
                    g.down[w as usize * dim + axis] = id;
                }
            }
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.dim.max(1)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Integer coordinates `k` of vertex `v` (the point is `k / n`).
    pub fn vertex(&self, v: u32) -> &[i64] {
        let s = v as usize * self.dim;
        &self.coords[s..s + self.dim]
    }

    pub fn point(&self, v: u32) -> Vec<Q> {
        self.vertex(v).iter().map(|&c| q(c as i128, self.n as i128)).collect()
    }

    pub fn point_f64(&self, v: u32) -> Vec<f64> {
        self.vertex(v).iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    pub fn find(&self, k: &[i64]) -> Option<u32> {
        let s = self.index.slots[self.index.offset(k)?];
        (s != NONE).then_some(s)
    }

    /// Edge from `v` along `+f_axis`.
    pub fn up_edge(&self, v: u32, axis: usize) -> Option<u32> {
        let e = self.up[v as usize * self.dim + axis];
        (e != NONE).then_some(e)
    }

    /// Edge from `v` along `-f_axis`.
    pub fn down_edge(&self, v: u32, axis: usize) -> Option<u32> {
        let e = self.down[v as usize * self.dim + axis];
        (e != NONE).then_some(e)
    }

    /// Edge with identity `(axis, k)`, `k` the lower endpoint.
    pub fn edge_by_key(&self, axis: usize, k: &[i64]) -> Option<u32> {
        self.up_edge(self.find(k)?, axis)
    }

    /// Incident edges with the sign `+1` when `v` is the lower endpoint.
    pub fn incident(&self, v: u32) -> impl Iterator<Item = (u32, i8)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let up = self.up_edge(v, i).map(|e| (e, 1i8));
            let down = self.down_edge(v, i).map(|e| (e, -1i8));
            up.into_iter().chain(down)
        })
    }

    /// Number of lattice neighbours (in `Z^d`) of `v` missing from the graph.
    pub fn missing_neighbours(&self, v: u32) -> usize {
        (0..self.dim).map(|i| self.up_edge(v, i).is_none() as usize + self.down_edge(v, i).is_none() as usize).sum()
    }

    /// Lower endpoint coordinates of edge `e`.
    pub fn edge_key(&self, e: u32) -> (usize, &[i64]) {
        let edge = self.edges[e as usize];
        (edge.axis as usize, self.vertex(edge.lo))
    }

    /// Edge centre `c(e)` in doubled integer coordinates (`2k + f_axis`).
    pub fn edge_center2(&self, e: u32) -> Vec<i64> {
        let edge = self.edges[e as usize];
        let mut c: Vec<i64> = self.vertex(edge.lo).iter().map(|&x| 2 * x).collect();
        c[edge.axis as usize] += 1;
        c
    }

    pub fn edge_center_f64(&self, e: u32) -> Vec<f64> {
        self.edge_center2(e).iter().map(|&c| c as f64 / (2 * self.n) as f64).collect()
    }

    pub fn source_flags(&self) -> Vec<bool> {
        flags(self.vertex_count(), &self.sources)
    }

    pub fn sink_flags(&self) -> Vec<bool> {
        flags(self.vertex_count(), &self.sinks)
    }

    /// `S + (1/2n)[-1,1]^d` for a vertex subset.
    pub fn fatten(&self, vertices: impl IntoIterator<Item = u32>) -> VoxelSet {
        VoxelSet::new(self.dim, self.n, vertices.into_iter().map(|v| self.vertex(v).to_vec()).collect())
    }
}

pub fn flags(len: usize, ids: &[u32]) -> Vec<bool> {
    let mut f = vec![false; len];
    for &v in ids {
        f[v as usize] = true;
    }
    f
}

/// `S + (1/2n)[-1,1]^d` for integer points.
pub fn fatten(dim: usize, n: i64, points: &[Vec<i64>]) -> BoxUnion {
    VoxelSet::new(dim, n, points.to_vec()).to_box_union()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::qi;

    #[test]
    fn square_grid_counts() {
        let g = LatticeGraph::from_predicate(2, 4, &[0, 0], &[4, 4], |_| true);
        assert_eq!(g.vertex_count(), 25);
        assert_eq!(g.edge_count(), 40);
        let v = g.find(&[1, 2]).unwrap();
        assert_eq!(g.vertex(v), &[1, 2]);
        assert_eq!(g.incident(v).count(), 4);
        let corner = g.find(&[0, 0]).unwrap();
        assert_eq!(g.missing_neighbours(corner), 2);
        let e = g.edge_by_key(1, &[1, 2]).unwrap();
        assert_eq!(g.vertex(g.edges[e as usize].hi), &[1, 3]);
        assert_eq!(g.edge_center2(e), vec![2, 5]);
        assert!(g.find(&[5, 0]).is_none());
    }

    #[test]
    fn fatten_examples() {
        assert_eq!(fatten(2, 2, &[vec![0, 0]]).volume(), qi(1) / qi(4));
        assert_eq!(fatten(2, 1, &[vec![0, 0], vec![1, 0]]).volume(), qi(2));
        let pts: Vec<Vec<i64>> = (0..5).flat_map(|i| (0..5).map(move |j| vec![i, j])).collect();
        assert_eq!(fatten(2, 4, &pts).volume(), qi(25) / qi(16));
    }
}
