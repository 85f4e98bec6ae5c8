//! Axis-aligned boxes, finite box unions and lattice voxel sets, all exact.

use num_traits::{One, Zero};

use super::rational::{q, qi, Q};
use crate::error::{Error, Result};

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Aabb {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

impl Aabb {
    pub fn new(lo: Vec<Q>, hi: Vec<Q>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidArgument("box with lo > hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Some side has zero length.
    pub fn is_degenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a == b)
    }

    pub fn volume(&self) -> Q {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(Q::one(), |acc, s| acc * s)
    }

    pub fn center(&self) -> Vec<Q> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (a + b) / qi(2)).collect()
    }

    pub fn contains_open(&self, x: &[Q]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a < v && v < b)
    }

    pub fn contains_closed(&self, x: &[Q]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    /// L-infinity distance from `x` to the closed box.
    pub fn dist_inf(&self, x: &[Q]) -> Q {
        let mut best = Q::zero();
        for (v, (a, b)) in x.iter().zip(self.lo.iter().zip(&self.hi)) {
            let gap = if v < a {
                a - v
            } else if v > b {
                v - b
            } else {
                Q::zero()
            };
            if gap > best {
                best = gap;
            }
        }
        best
    }

    /// L-infinity distance between two closed boxes.
    pub fn dist_inf_box(&self, other: &Aabb) -> Q {
        let mut best = Q::zero();
        for i in 0..self.dim() {
            let gap = if self.hi[i] < other.lo[i] {
                other.lo[i] - self.hi[i]
            } else if other.hi[i] < self.lo[i] {
                self.lo[i] - other.hi[i]
            } else {
                Q::zero()
            };
            if gap > best {
                best = gap;
            }
        }
        best
    }

    /// Closed intersection, possibly degenerate.
    pub fn intersect(&self, other: &Aabb) -> Option<Aabb> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let a = self.lo[i].max(other.lo[i]);
            let b = self.hi[i].min(other.hi[i]);
            if a > b {
                return None;
            }
            lo.push(a);
            hi.push(b);
        }
        Some(Aabb { lo, hi })
    }

    pub fn overlap_volume(&self, other: &Aabb) -> Q {
        self.intersect(other).map(|b| b.volume()).unwrap_or_else(Q::zero)
    }

    pub fn expand(&self, r: &Q) -> Aabb {
        Aabb {
            lo: self.lo.iter().map(|a| a - r).collect(),
            hi: self.hi.iter().map(|b| b + r).collect(),
        }
    }
}

/// A (d-1)-dimensional boundary piece of a box union, normal to `axis`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisFace {
    /// Degenerate along `axis`.
    pub rect: Aabb,
    pub axis: usize,
    /// +1 when the outward normal is `+e_axis`.
    pub outward: i8,
}

impl AxisFace {
    pub fn area(&self) -> Q {
        (0..self.rect.dim())
            .filter(|&i| i != self.axis)
            .map(|i| self.rect.hi[i] - self.rect.lo[i])
            .fold(Q::one(), |acc, s| acc * s)
    }
}

/// Product grid generated by the distinct coordinates of a family of boxes.
#[derive(Clone, Debug)]
pub struct ElementaryGrid {
    pub coords: Vec<Vec<Q>>,
}

impl ElementaryGrid {
    pub fn from_boxes<'a>(dim: usize, boxes: impl IntoIterator<Item = &'a Aabb>) -> Self {
        let mut coords = vec![Vec::new(); dim];
        for b in boxes {
            for i in 0..dim {
                coords[i].push(b.lo[i]);
                coords[i].push(b.hi[i]);
            }
        }
        for c in &mut coords {
            c.sort();
            c.dedup();
        }
        Self { coords }
    }

    pub fn add_coords(&mut self, axis: usize, values: impl IntoIterator<Item = Q>) {
        self.coords[axis].extend(values);
        self.coords[axis].sort();
        self.coords[axis].dedup();
    }

    pub fn cells_per_axis(&self) -> Vec<usize> {
        self.coords.iter().map(|c| c.len().saturating_sub(1)).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis().iter().product()
    }

    pub fn cell_index(&self, multi: &[usize]) -> usize {
        let dims = self.cells_per_axis();
        let mut idx = 0;
        for i in (0..multi.len()).rev() {
            idx = idx * dims[i] + multi[i];
        }
        idx
    }

    pub fn cell_multi(&self, mut idx: usize) -> Vec<usize> {
        let dims = self.cells_per_axis();
        let mut multi = Vec::with_capacity(dims.len());
        for &d in &dims {
            multi.push(idx % d);
            idx /= d;
        }
        multi
    }

    pub fn cell_box(&self, multi: &[usize]) -> Aabb {
        Aabb {
            lo: multi.iter().enumerate().map(|(i, &j)| self.coords[i][j]).collect(),
            hi: multi.iter().enumerate().map(|(i, &j)| self.coords[i][j + 1]).collect(),
        }
    }

    /// Evaluates `inside` on every cell (by cell center).
    pub fn classify(&self, inside: impl Fn(&[Q]) -> bool) -> Vec<bool> {
        (0..self.cell_count())
            .map(|c| inside(&self.cell_box(&self.cell_multi(c)).center()))
            .collect()
    }

    /// Faces separating inside cells from outside cells (or from the exterior of the grid).
    pub fn interfaces(&self, flags: &[bool]) -> Vec<AxisFace> {
        let dims = self.cells_per_axis();
        let d = dims.len();
        let mut faces = Vec::new();
        if dims.contains(&0) {
            return faces;
        }
        for axis in 0..d {
            for c in 0..self.cell_count() {
                let multi = self.cell_multi(c);
                let here = flags[c];
                // face on the upper side of this cell along `axis`
                let upper = if multi[axis] + 1 < dims[axis] {
                    let mut m = multi.clone();
                    m[axis] += 1;
                    flags[self.cell_index(&m)]
                } else {
                    false
                };
                if here != upper {
                    faces.push(self.face(&multi, axis, multi[axis] + 1, if here { 1 } else { -1 }));
                }
                if multi[axis] == 0 && here {
                    faces.push(self.face(&multi, axis, 0, -1));
                }
            }
        }
        faces
    }

    fn face(&self, multi: &[usize], axis: usize, coord_idx: usize, outward: i8) -> AxisFace {
        let mut rect = self.cell_box(multi);
        rect.lo[axis] = self.coords[axis][coord_idx];
        rect.hi[axis] = self.coords[axis][coord_idx];
        AxisFace { rect, axis, outward }
    }
}

/// Finite union of closed boxes; the associated open set is the interior of the union.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxUnion {
    pub dim: usize,
    pub boxes: Vec<Aabb>,
}

impl BoxUnion {
    pub fn new(dim: usize, boxes: Vec<Aabb>) -> Result<Self> {
        if let Some(b) = boxes.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
        }
        Ok(Self { dim, boxes })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, boxes: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.iter().all(|b| b.is_degenerate())
    }

    pub fn grid(&self) -> ElementaryGrid {
        ElementaryGrid::from_boxes(self.dim, &self.boxes)
    }

    pub fn contains_closed(&self, x: &[Q]) -> bool {
        self.boxes.iter().any(|b| b.contains_closed(x))
    }

    /// Membership in the interior of the union: every orthant around `x` must be
    /// covered by some box.
    pub fn contains_open(&self, x: &[Q]) -> bool {
        let d = self.dim;
        (0..(1usize << d)).all(|mask| {
            self.boxes.iter().any(|b| {
                (0..d).all(|i| {
                    if mask >> i & 1 == 1 {
                        b.lo[i] <= x[i] && x[i] < b.hi[i]
                    } else {
                        b.lo[i] < x[i] && x[i] <= b.hi[i]
                    }
                })
            })
        })
    }

    pub fn dist_inf(&self, x: &[Q]) -> Option<Q> {
        self.boxes.iter().map(|b| b.dist_inf(x)).min()
    }

    pub fn bounding_box(&self) -> Option<Aabb> {
        let first = self.boxes.first()?;
        let mut bb = first.clone();
        for b in &self.boxes[1..] {
            for i in 0..self.dim {
                bb.lo[i] = bb.lo[i].min(b.lo[i]);
                bb.hi[i] = bb.hi[i].max(b.hi[i]);
            }
        }
        Some(bb)
    }

    /// Pairwise interior-disjoint boxes with the same union (up to measure zero).
    pub fn disjoint_cells(&self) -> Vec<Aabb> {
        if self.boxes.is_empty() {
            return Vec::new();
        }
        let grid = self.grid();
        let flags = grid.classify(|c| self.contains_closed(c));
        (0..grid.cell_count())
            .filter(|&c| flags[c])
            .map(|c| grid.cell_box(&grid.cell_multi(c)))
            .filter(|b| !b.is_degenerate())
            .collect()
    }

    pub fn volume(&self) -> Q {
        self.disjoint_cells().iter().map(Aabb::volume).sum()
    }

    pub fn intersection(&self, other: &BoxUnion) -> BoxUnion {
        let a = self.disjoint_cells();
        let b = other.disjoint_cells();
        let mut boxes = Vec::new();
        for x in &a {
            for y in &b {
                if let Some(z) = x.intersect(y) {
                    if !z.is_degenerate() {
                        boxes.push(z);
                    }
                }
            }
        }
        BoxUnion { dim: self.dim, boxes }
    }

    /// Volume of the union intersected with a box.
    pub fn overlap_volume(&self, b: &Aabb) -> Q {
        self.disjoint_cells().iter().map(|c| c.overlap_volume(b)).sum()
    }

    /// Boundary of the union as axis-aligned faces with outward normals.
    pub fn boundary_faces(&self) -> Vec<AxisFace> {
        let grid = self.grid();
        let flags = grid.classify(|c| self.contains_closed(c));
        grid.interfaces(&flags)
    }

    pub fn expand(&self, r: &Q) -> BoxUnion {
        BoxUnion { dim: self.dim, boxes: self.boxes.iter().map(|b| b.expand(r)).collect() }
    }
}

/// Exact volume of the symmetric difference of two box unions.
pub fn sym_diff_boxes(a: &BoxUnion, b: &BoxUnion) -> Q {
    let grid = ElementaryGrid::from_boxes(a.dim, a.boxes.iter().chain(&b.boxes));
    if grid.cell_count() == 0 {
        return Q::zero();
    }
    (0..grid.cell_count())
        .map(|c| grid.cell_box(&grid.cell_multi(c)))
        .filter(|cell| {
            let center = cell.center();
            a.contains_closed(&center) != b.contains_closed(&center)
        })
        .map(|cell| cell.volume())
        .sum()
}

/// Union of lattice cubes `k/n + (1/2n)[-1,1]^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoxelSet {
    pub dim: usize,
    pub n: i64,
    pub centers: Vec<Vec<i64>>,
}

impl VoxelSet {
    pub fn new(dim: usize, n: i64, mut centers: Vec<Vec<i64>>) -> Self {
        centers.sort();
        centers.dedup();
        Self { dim, n, centers }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn cube(&self, k: &[i64]) -> Aabb {
        let den = 2 * self.n as i128;
        Aabb {
            lo: k.iter().map(|&c| q(2 * c as i128 - 1, den)).collect(),
            hi: k.iter().map(|&c| q(2 * c as i128 + 1, den)).collect(),
        }
    }

    /// Cubes have disjoint interiors, so the volume is `|S| / n^d`.
    pub fn volume(&self) -> Q {
        q(self.centers.len() as i128, (self.n as i128).pow(self.dim as u32))
    }

    pub fn to_box_union(&self) -> BoxUnion {
        BoxUnion { dim: self.dim, boxes: self.centers.iter().map(|k| self.cube(k)).collect() }
    }

    /// `vol(self ∩ U)` where `U` is given by interior-disjoint cells.
    pub fn overlap_volume_cells(&self, cells: &[Aabb]) -> Q {
        let mut total = Q::zero();
        for k in &self.centers {
            let cube = self.cube(k);
            for c in cells {
                total += cube.overlap_volume(c);
            }
        }
        total
    }

    /// `vol((self ∩ clip) △ reference)`, with `clip = None` meaning no clipping.
    pub fn sym_diff(&self, clip: Option<&BoxUnion>, reference: &BoxUnion) -> Q {
        let own = match clip {
            Some(c) => self.overlap_volume_cells(&c.disjoint_cells()),
            None => self.volume(),
        };
        let reference_clipped = match clip {
            Some(c) => reference.intersection(c),
            None => reference.clone(),
        };
        let ref_cells = reference_clipped.disjoint_cells();
        let common = self.overlap_volume_cells(&ref_cells);
        // reference outside the clip set is still part of the symmetric difference
        let ref_total = reference.volume();
        own + ref_total - common * qi(2)
    }
}
