//! Convex sets in half-space form and the small exact linear programs used to
//! measure L-infinity distances to them.
//!
//! The programs here have at most a few dozen constraints in dimension at most
//! seven, so optimal vertices are found by enumerating tight constraint subsets.

use num_traits::{Signed, Zero};

use super::boxes::Aabb;
use super::rational::{qi, Q};
use crate::error::{Error, Result};

/// Closed half-space `a · y <= b` (the open version uses `<`).
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub a: Vec<Q>,
    pub b: Q,
}

impl HalfSpace {
    pub fn eval(&self, y: &[Q]) -> Q {
        dot(&self.a, y)
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Intersection of finitely many half-spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexSet {
    pub dim: usize,
    pub halfspaces: Vec<HalfSpace>,
}

impl ConvexSet {
    pub fn new(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        if let Some(h) = halfspaces.iter().find(|h| h.a.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: h.a.len() });
        }
        Ok(Self { dim, halfspaces })
    }

    pub fn from_box(b: &Aabb) -> Self {
        let d = b.dim();
        let mut halfspaces = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut up = vec![Q::zero(); d];
            up[i] = qi(1);
            halfspaces.push(HalfSpace { a: up, b: b.hi[i] });
            let mut down = vec![Q::zero(); d];
            down[i] = qi(-1);
            halfspaces.push(HalfSpace { a: down, b: -b.lo[i] });
        }
        Self { dim: d, halfspaces }
    }

    pub fn intersect(&self, other: &ConvexSet) -> ConvexSet {
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.extend(other.halfspaces.iter().cloned());
        ConvexSet { dim: self.dim, halfspaces }
    }

    pub fn contains_open(&self, x: &[Q]) -> bool {
        self.halfspaces.iter().all(|h| h.eval(x) < h.b)
    }

    pub fn contains_closed(&self, x: &[Q]) -> bool {
        self.halfspaces.iter().all(|h| h.eval(x) <= h.b)
    }

    /// L-infinity distance from `x` to the closure; `None` when the set is empty.
    pub fn dist_inf(&self, x: &[Q]) -> Option<Q> {
        if self.contains_closed(x) {
            return Some(Q::zero());
        }
        if self.halfspaces.len() == 1 {
            let h = &self.halfspaces[0];
            let norm1: Q = h.a.iter().map(|v| v.abs()).sum();
            if norm1.is_zero() {
                return None;
            }
            return Some((h.eval(x) - h.b) / norm1);
        }
        let d = self.dim;
        // variables (y_1..y_d, r), minimise r
        let mut rows = Vec::with_capacity(self.halfspaces.len() + 2 * d);
        for h in &self.halfspaces {
            let mut a = h.a.clone();
            a.push(Q::zero());
            rows.push((a, h.b));
        }
        for i in 0..d {
            let mut a = vec![Q::zero(); d + 1];
            a[i] = qi(1);
            a[d] = qi(-1);
            rows.push((a.clone(), x[i]));
            a[i] = qi(-1);
            rows.push((a, -x[i]));
        }
        let mut c = vec![Q::zero(); d + 1];
        c[d] = qi(1);
        lp_vertex_min(&c, &rows).map(|(v, _)| v)
    }

    /// L-infinity distance between two closed convex sets (at least one bounded).
    pub fn dist_inf_set(&self, other: &ConvexSet) -> Option<Q> {
        let d = self.dim;
        let nv = 2 * d + 1;
        let mut rows = Vec::new();
        for h in &self.halfspaces {
            let mut a = h.a.clone();
            a.resize(nv, Q::zero());
            rows.push((a, h.b));
        }
        for h in &other.halfspaces {
            let mut a = vec![Q::zero(); d];
            a.extend(h.a.iter().cloned());
            a.push(Q::zero());
            rows.push((a, h.b));
        }
        for i in 0..d {
            let mut a = vec![Q::zero(); nv];
            a[i] = qi(1);
            a[d + i] = qi(-1);
            a[2 * d] = qi(-1);
            rows.push((a.clone(), Q::zero()));
            a[i] = qi(-1);
            a[d + i] = qi(1);
            rows.push((a, Q::zero()));
        }
        let mut c = vec![Q::zero(); nv];
        c[2 * d] = qi(1);
        lp_vertex_min(&c, &rows).map(|(v, _)| v)
    }

    /// Whether the strict inequalities have a common solution, with `equalities`
    /// (each `a · y = b`) imposed exactly. The feasible set must be bounded.
    pub fn relative_interior_nonempty(&self, equalities: &[HalfSpace]) -> bool {
        let d = self.dim;
        let mut rows = Vec::new();
        for h in &self.halfspaces {
            let mut a = h.a.clone();
            a.push(qi(1));
            rows.push((a, h.b));
        }
        for h in equalities {
            let mut a = h.a.clone();
            a.push(Q::zero());
            rows.push((a.clone(), h.b));
            rows.push((a.iter().map(|v| -v).collect(), -h.b));
        }
        let mut cap = vec![Q::zero(); d + 1];
        cap[d] = qi(1);
        rows.push((cap, qi(1)));
        let mut c = vec![Q::zero(); d + 1];
        c[d] = qi(-1);
        match lp_vertex_min(&c, &rows) {
            Some((v, _)) => v < Q::zero(),
            None => false,
        }
    }

    /// True when the recession cone is trivial.
    pub fn is_bounded(&self) -> bool {
        let d = self.dim;
        let mut rows: Vec<(Vec<Q>, Q)> = self.halfspaces.iter().map(|h| (h.a.clone(), Q::zero())).collect();
        for i in 0..d {
            let mut a = vec![Q::zero(); d];
            a[i] = qi(1);
            rows.push((a.clone(), qi(1)));
            a[i] = qi(-1);
            rows.push((a, qi(1)));
        }
        vertices(&rows, d).iter().all(|v| v.iter().all(Zero::is_zero))
    }

    /// Vertices of a bounded set.
    pub fn vertices(&self) -> Vec<Vec<Q>> {
        let rows: Vec<(Vec<Q>, Q)> = self.halfspaces.iter().map(|h| (h.a.clone(), h.b)).collect();
        vertices(&rows, self.dim)
    }

    /// Bounding box of a bounded, nonempty set.
    pub fn bounding_box(&self) -> Option<Aabb> {
        let vs = self.vertices();
        let first = vs.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for v in &vs[1..] {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        Some(Aabb { lo, hi })
    }
}

fn for_each_subset(k: usize, m: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, k: usize, m: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == m {
            f(cur);
            return;
        }
        for i in start..k {
            if k - i < m - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, k, m, cur, f);
            cur.pop();
        }
    }
    rec(0, k, m, &mut Vec::with_capacity(m), f);
}

/// Solves a square system exactly; `None` when singular.
pub fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col] / p;
                for c in col..m {
                    let delta = factor * a[col][c];
                    a[r][c] -= delta;
                }
                let delta = factor * b[col];
                b[r] -= delta;
            }
        }
    }
    Some((0..m).map(|i| b[i] / a[i][i]).collect())
}

fn feasible(rows: &[(Vec<Q>, Q)], z: &[Q]) -> bool {
    rows.iter().all(|(a, b)| dot(a, z) <= *b)
}

fn vertices(rows: &[(Vec<Q>, Q)], m: usize) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    for_each_subset(rows.len(), m, &mut |idx| {
        let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(z) = solve(a, b) {
            if feasible(rows, &z) && !out.contains(&z) {
                out.push(z);
            }
        }
    });
    out
}

/// Minimises `c · z` over `{rows: a · z <= b}` by vertex enumeration. The
/// feasible region must be pointed and the objective bounded below on it.
pub fn lp_vertex_min(c: &[Q], rows: &[(Vec<Q>, Q)]) -> Option<(Q, Vec<Q>)> {
    let m = c.len();
    let mut best: Option<(Q, Vec<Q>)> = None;
    for_each_subset(rows.len(), m, &mut |idx| {
        let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(z) = solve(a, b) {
            let val = dot(c, &z);
            if best.as_ref().is_some_and(|(v, _)| *v <= val) {
                return;
            }
            if feasible(rows, &z) {
                best = Some((val, z));
            }
        }
    });
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::q;

    fn triangle() -> ConvexSet {
        // x > 0, y > 0, x + y < 1
        ConvexSet::new(
            2,
            vec![
                HalfSpace { a: vec![qi(-1), qi(0)], b: qi(0) },
                HalfSpace { a: vec![qi(0), qi(-1)], b: qi(0) },
                HalfSpace { a: vec![qi(1), qi(1)], b: qi(1) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn distance_to_triangle() {
        let t = triangle();
        assert_eq!(t.dist_inf(&[q(1, 4), q(1, 4)]), Some(qi(0)));
        // from (1,1) the nearest point in L-inf is (1/2,1/2): distance 1/2
        assert_eq!(t.dist_inf(&[qi(1), qi(1)]), Some(q(1, 2)));
        assert_eq!(t.dist_inf(&[qi(-2), q(1, 2)]), Some(qi(2)));
    }

    #[test]
    fn distance_matches_box_formula() {
        let b = Aabb::new(vec![qi(1), qi(1)], vec![qi(2), qi(2)]).unwrap();
        let c = ConvexSet::from_box(&b);
        for x in [[qi(0), qi(0)], [qi(3), q(3, 2)], [q(-1, 3), q(7, 2)]] {
            assert_eq!(c.dist_inf(&x), Some(b.dist_inf(&x)));
        }
    }

    #[test]
    fn set_distance_and_interior() {
        let a = ConvexSet::from_box(&Aabb::new(vec![qi(0), qi(0)], vec![qi(1), qi(1)]).unwrap());
        let b = ConvexSet::from_box(&Aabb::new(vec![qi(3), qi(0)], vec![qi(4), qi(1)]).unwrap());
        assert_eq!(a.dist_inf_set(&b), Some(qi(2)));
        assert!(a.relative_interior_nonempty(&[]));
        assert!(triangle().is_bounded());
        let half = ConvexSet::new(2, vec![HalfSpace { a: vec![qi(1), qi(0)], b: qi(0) }]).unwrap();
        assert!(!half.is_bounded());
        // the unit square's bottom edge has nonempty relative interior
        let eq = HalfSpace { a: vec![qi(0), qi(1)], b: qi(0) };
        let strip = ConvexSet::new(
            2,
            vec![
                HalfSpace { a: vec![qi(1), qi(0)], b: qi(1) },
                HalfSpace { a: vec![qi(-1), qi(0)], b: qi(0) },
            ],
        )
        .unwrap();
        assert!(strip.relative_interior_nonempty(std::slice::from_ref(&eq)));
        let thin = strip.intersect(
            &ConvexSet::new(2, vec![HalfSpace { a: vec![qi(-1), qi(0)], b: qi(-1) }]).unwrap(),
        );
        assert!(!thin.relative_interior_nonempty(&[eq]));
    }
}
