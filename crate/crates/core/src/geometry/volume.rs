//! Volumes of symmetric differences and boundary neighbourhoods.

use num_traits::{One, Zero};

use super::boxes::{sym_diff_boxes, Aabb, BoxUnion, VoxelSet};
use super::convex::ConvexSet;
use super::domain::{Body, DomainSpec, Region};
use super::rational::{q, qi, Q};
use crate::error::{Error, Result};

/// A volume with an absolute error bound; `error == 0` means exact.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: Q,
    pub error: Q,
}

impl VolumeEstimate {
    pub fn exact(value: Q) -> Self {
        Self { value, error: Q::zero() }
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_zero()
    }
}

/// A bounded solid accepted by [`sym_diff_volume`].
#[derive(Clone, Debug)]
pub enum Solid {
    Boxes(BoxUnion),
    Voxels(VoxelSet),
    Region(Region),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cover {
    In,
    Out,
    Partial,
}

impl Solid {
    fn as_box_union(&self) -> Option<BoxUnion> {
        match self {
            Solid::Boxes(u) => Some(u.clone()),
            Solid::Voxels(v) => Some(v.to_box_union()),
            Solid::Region(r) => region_boxes(r).map(|boxes| BoxUnion { dim: boxes[0].dim(), boxes }),
        }
    }

    fn bounding_box(&self) -> Result<Option<Aabb>> {
        match self {
            Solid::Boxes(u) => Ok(u.bounding_box()),
            Solid::Voxels(v) => Ok(v.to_box_union().bounding_box()),
            Solid::Region(r) => region_bbox(r),
        }
    }

    fn cover(&self, cell: &Aabb) -> Cover {
        match self {
            Solid::Boxes(u) => box_cover(u, cell),
            Solid::Voxels(v) => box_cover(&v.to_box_union(), cell),
            Solid::Region(r) => region_cover(r, cell),
        }
    }
}

fn region_boxes(r: &Region) -> Option<Vec<Aabb>> {
    match r {
        Region::Box(b) => Some(vec![b.clone()]),
        Region::Convex(_) => None,
        Region::Union(rs) => {
            let mut out = Vec::new();
            for r in rs {
                out.extend(region_boxes(r)?);
            }
            (!out.is_empty()).then_some(out)
        }
    }
}

fn region_bbox(r: &Region) -> Result<Option<Aabb>> {
    match r {
        Region::Box(b) => Ok(Some(b.clone())),
        Region::Convex(c) => {
            if !c.is_bounded() {
                return Err(Error::InvalidArgument("unbounded region".into()));
            }
            Ok(c.bounding_box())
        }
        Region::Union(rs) => {
            let mut acc: Option<Aabb> = None;
            for r in rs {
                if let Some(b) = region_bbox(r)? {
                    acc = Some(match acc {
                        None => b,
                        Some(a) => hull(&a, &b),
                    });
                }
            }
            Ok(acc)
        }
    }
}

fn hull(a: &Aabb, b: &Aabb) -> Aabb {
    Aabb {
        lo: a.lo.iter().zip(&b.lo).map(|(x, y)| *x.min(y)).collect(),
        hi: a.hi.iter().zip(&b.hi).map(|(x, y)| *x.max(y)).collect(),
    }
}

fn box_cover(u: &BoxUnion, cell: &Aabb) -> Cover {
    let v = u.overlap_volume(cell);
    if v.is_zero() {
        Cover::Out
    } else if v == cell.volume() {
        Cover::In
    } else {
        Cover::Partial
    }
}

fn convex_cover(c: &ConvexSet, cell: &Aabb) -> Cover {
    let d = cell.dim();
    let all_corners = (0..(1usize << d)).all(|mask| {
        let corner: Vec<Q> =
            (0..d).map(|i| if mask >> i & 1 == 1 { cell.hi[i] } else { cell.lo[i] }).collect();
        c.contains_closed(&corner)
    });
    if all_corners {
        return Cover::In;
    }
    let half = (cell.hi[0] - cell.lo[0]) / qi(2);
    match c.dist_inf(&cell.center()) {
        Some(dist) if dist >= half => Cover::Out,
        None => Cover::Out,
        _ => Cover::Partial,
    }
}

fn region_cover(r: &Region, cell: &Aabb) -> Cover {
    match r {
        Region::Box(b) => box_cover(&BoxUnion { dim: b.dim(), boxes: vec![b.clone()] }, cell),
        Region::Convex(c) => convex_cover(c, cell),
        Region::Union(rs) => {
            let covers: Vec<Cover> = rs.iter().map(|r| region_cover(r, cell)).collect();
            if covers.contains(&Cover::In) {
                Cover::In
            } else if covers.iter().all(|c| *c == Cover::Out) {
                Cover::Out
            } else {
                Cover::Partial
            }
        }
    }
}

/// Cubic cells of side `1/resolution` covering `bbox`.
fn grid_cells(bbox: &Aabb, resolution: i64) -> Vec<Aabb> {
    let d = bbox.dim();
    let res = qi(resolution as i128);
    let lo: Vec<i128> = bbox.lo.iter().map(|v| (v * res).floor().to_integer()).collect();
    let hi: Vec<i128> = bbox.hi.iter().map(|v| (v * res).ceil().to_integer()).collect();
    let mut out = Vec::new();
    let mut k = lo.clone();
    if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return out;
    }
    loop {
        out.push(Aabb {
            lo: k.iter().map(|&v| q(v, resolution as i128)).collect(),
            hi: k.iter().map(|&v| q(v + 1, resolution as i128)).collect(),
        });
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            k[i] += 1;
            if k[i] < hi[i] {
                break;
            }
            k[i] = lo[i];
            i += 1;
        }
    }
}

/// `L^d(A △ B)`. Exact for box unions and voxel sets; otherwise grid quadrature at
/// `resolution` cells per unit length with the uncertain cells reported as error.
pub fn sym_diff_volume(a: &Solid, b: &Solid, resolution: i64) -> Result<VolumeEstimate> {
    if resolution < 1 {
        return Err(Error::InvalidArgument("resolution must be >= 1".into()));
    }
    if let (Some(x), Some(y)) = (a.as_box_union(), b.as_box_union()) {
        return Ok(VolumeEstimate::exact(sym_diff_boxes(&x, &y)));
    }
    let bbox = match (a.bounding_box()?, b.bounding_box()?) {
        (Some(x), Some(y)) => hull(&x, &y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return Ok(VolumeEstimate::exact(Q::zero())),
    };
    let mut certain = Q::zero();
    let mut uncertain = Q::zero();
    for cell in grid_cells(&bbox, resolution) {
        let (ca, cb) = (a.cover(&cell), b.cover(&cell));
        match (ca, cb) {
            (Cover::In, Cover::Out) | (Cover::Out, Cover::In) => certain += cell.volume(),
            (Cover::In, Cover::In) | (Cover::Out, Cover::Out) => {}
            _ => uncertain += cell.volume(),
        }
    }
    let half = uncertain / qi(2);
    Ok(VolumeEstimate { value: certain + half, error: half })
}

/// Quadrature for `{x : dist(x) < r}` where `dist` is 1-Lipschitz in the sup norm.
fn sublevel_volume(bbox: &Aabb, r: &Q, resolution: i64, dist: impl Fn(&[Q]) -> Q) -> VolumeEstimate {
    let bbox = bbox.expand(r);
    let w = q(1, 2 * resolution as i128);
    let mut inside = Q::zero();
    let mut uncertain = Q::zero();
    for cell in grid_cells(&bbox, resolution) {
        let dc = dist(&cell.center());
        if dc + w < *r {
            inside += cell.volume();
        } else if dc - w < *r {
            uncertain += cell.volume();
        }
    }
    let half = uncertain / qi(2);
    VolumeEstimate { value: inside + half, error: half }
}

/// `L^d(V_∞(Γ, r))`, the open sup-norm neighbourhood of the boundary. Exact for box
/// bodies; polytopes use quadrature at `resolution`.
pub fn boundary_neighborhood_volume(spec: &DomainSpec, r: &Q, resolution: i64) -> Result<VolumeEstimate> {
    if *r <= Q::zero() {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    match &spec.body {
        Body::Boxes(_) => {
            let boxes = spec
                .boundary_pieces()
                .iter()
                .filter_map(|p| p.rect.as_ref().map(|b| b.expand(r)))
                .collect();
            Ok(VolumeEstimate::exact(BoxUnion { dim: spec.dim, boxes }.volume()))
        }
        Body::Polytope(_) => {
            Ok(sublevel_volume(&spec.bounding_box(), r, resolution.max(1), |x| spec.dist_inf_boundary(x)))
        }
    }
}

/// `L^d(V_∞(Ω, r))`.
pub fn domain_neighborhood_volume(spec: &DomainSpec, r: &Q, resolution: i64) -> Result<VolumeEstimate> {
    if *r <= Q::zero() {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    match &spec.body {
        Body::Boxes(u) => Ok(VolumeEstimate::exact(u.expand(r).volume())),
        Body::Polytope(p) => Ok(sublevel_volume(&spec.bounding_box(), r, resolution.max(1), |x| {
            p.dist_inf(x).unwrap_or_else(Q::one)
        })),
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn box_union() -> impl Strategy<Value = BoxUnion> {
        prop::collection::vec((0i128..8, 0i128..8, 1i128..5, 1i128..5), 0..4).prop_map(|v| {
            let boxes = v
                .into_iter()
                .map(|(x, y, w, h)| Aabb::new(vec![q(x, 4), q(y, 4)], vec![q(x + w, 4), q(y + h, 4)]).unwrap())
                .collect();
            BoxUnion::new(2, boxes).unwrap()
        })
    }

    fn dist(a: &BoxUnion, b: &BoxUnion) -> Q {
        sym_diff_volume(&Solid::Boxes(a.clone()), &Solid::Boxes(b.clone()), 1).unwrap().value
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pseudometric(a in box_union(), b in box_union(), c in box_union()) {
            prop_assert_eq!(dist(&a, &a), Q::zero());
            prop_assert_eq!(dist(&a, &b), dist(&b, &a));
            prop_assert!(dist(&a, &c) <= dist(&a, &b) + dist(&b, &c));
        }
    }
}
