//! Cylinder flows `τ_n(A, h)` and Monte Carlo estimates of the flow constant.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{derive_seed, sample_with, CapacityField, KeyMap, LawSpec};
use crate::error::{Error, Result};
use crate::geometry::rational::cmp_with_scaled_sqrt;
use crate::geometry::{q, qi, to_f64, Coord, Q};
use crate::lattice::LatticeGraph;
use crate::maxflow::{max_flow, FlowResult, StreamFunction};

fn dot_q(a: &[Q], w: &[i64]) -> Q {
    a.iter().zip(w).map(|(x, &c)| x * qi(c as i128)).sum()
}

fn norm2(w: &[i64]) -> i128 {
    w.iter().map(|&c| (c as i128) * (c as i128)).sum()
}

/// Integer vectors completing `w` to an orthogonal basis (`d = 2, 3`).
pub fn orthogonal_frame(w: &[i64]) -> Result<Vec<Vec<i64>>> {
    match w.len() {
        2 => Ok(vec![vec![-w[1], w[0]]]),
        3 => {
            let cross = |a: &[i64], b: &[i64]| vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            let k = (0..3).min_by_key(|&i| w[i].abs()).unwrap();
            let mut e = vec![0i64; 3];
            e[k] = 1;
            let u2 = cross(w, &e);
            let u3 = cross(w, &u2);
            Ok(vec![u2, u3])
        }
        d => Err(Error::InvalidArgument(format!("cylinders support d = 2, 3, got {d}"))),
    }
}

/// `cyl(A, h) = {z + t·v + Σ_j t_j·û_j : |t| <= h, |t_j| <= s_j}` with `v = w/|w|`
/// for an integer direction `w`, discretised at scale `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSpec {
    pub center: Vec<Q>,
    pub direction: Vec<i64>,
    pub frame: Vec<Vec<i64>>,
    /// Half side lengths of `A` along the frame vectors.
    pub half_sides: Vec<Q>,
    pub h: Q,
    pub n: i64,
}

impl CylinderSpec {
    pub fn new(center: Vec<Q>, direction: Vec<i64>, half_sides: Vec<Q>, h: Q, n: i64) -> Result<Self> {
        let d = direction.len();
        if center.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: center.len() });
        }
        if direction.iter().all(|&c| c == 0) {
            return Err(Error::InvalidArgument("zero direction".into()));
        }
        let frame = orthogonal_frame(&direction)?;
        if half_sides.len() != d - 1 || half_sides.iter().any(|s| !s.is_positive()) {
            return Err(Error::InvalidArgument("base needs d - 1 positive half sides".into()));
        }
        if !h.is_positive() {
            return Err(Error::InvalidArgument("height must be positive".into()));
        }
        if n < 1 {
            return Err(Error::InvalidArgument("scale must be >= 1".into()));
        }
        if h < q(1, n as i128) {
            return Err(Error::TooCoarse(format!("h = {h} < 1/n at n = {n}")));
        }
        Ok(Self { center, direction, frame, half_sides, h, n })
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// `H^{d-1}(A) = Π 2 s_j`.
    pub fn base_area(&self) -> Q {
        self.half_sides.iter().fold(Q::one(), |acc, s| acc * qi(2) * s)
    }

    pub fn unit_direction(&self) -> Vec<f64> {
        let norm = (norm2(&self.direction) as f64).sqrt();
        self.direction.iter().map(|&c| c as f64 / norm).collect()
    }

    /// `(x - z)·w` for the lattice point `k / n`.
    pub fn height_coord(&self, k: &[i64]) -> Q {
        let y: Vec<Q> = k.iter().zip(&self.center).map(|(&c, z)| q(c as i128, self.n as i128) - z).collect();
        dot_q(&y, &self.direction)
    }

    /// Closed membership, exact.
    pub fn contains(&self, k: &[i64]) -> bool {
        let y: Vec<Q> = k.iter().zip(&self.center).map(|(&c, z)| q(c as i128, self.n as i128) - z).collect();
        let t = dot_q(&y, &self.direction);
        if t * t > self.h * self.h * qi(norm2(&self.direction)) {
            return false;
        }
        self.frame.iter().zip(&self.half_sides).all(|(u, s)| {
            let tj = dot_q(&y, u);
            tj * tj <= s * s * qi(norm2(u))
        })
    }

    /// Integer box containing every lattice point of the cylinder.
    fn lattice_range(&self) -> (Vec<i64>, Vec<i64>) {
        let d = self.dim();
        let v = self.unit_direction();
        let mut extent: Vec<f64> = v.iter().map(|c| to_f64(&self.h) * c.abs()).collect();
        for (u, s) in self.frame.iter().zip(&self.half_sides) {
            let norm = (norm2(u) as f64).sqrt();
            for i in 0..d {
                extent[i] += to_f64(s) * (u[i] as f64 / norm).abs();
            }
        }
        let n = self.n as f64;
        let lo = (0..d).map(|i| ((to_f64(&self.center[i]) - extent[i]) * n).floor() as i64 - 2).collect();
        let hi = (0..d).map(|i| ((to_f64(&self.center[i]) + extent[i]) * n).ceil() as i64 + 2).collect();
        (lo, hi)
    }

    /// Lattice graph of the cylinder with `B'` as sources and `T'` as sinks.
    pub fn graph(&self) -> Result<LatticeGraph> {
        let (lo, hi) = self.lattice_range();
        let mut g = LatticeGraph::from_predicate(self.dim(), self.n, &lo, &hi, |k| self.contains(k));
        for v in 0..g.vertex_count() as u32 {
            if g.missing_neighbours(v) == 0 {
                continue;
            }
            match self.height_coord(g.vertex(v)).cmp(&Q::zero()) {
                Ordering::Greater => g.sinks.push(v),
                Ordering::Less => g.sources.push(v),
                Ordering::Equal => {}
            }
        }
        if g.sources.is_empty() || g.sinks.is_empty() {
            return Err(Error::TooCoarse(format!("empty cylinder boundary halves at n = {}", self.n)));
        }
        Ok(g)
    }

    /// `B'(A, h)` (sources) and `T'(A, h)` (sinks) as integer coordinates.
    pub fn halves(&self) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
        let g = self.graph()?;
        let pts = |ids: &[u32]| ids.iter().map(|&v| g.vertex(v).to_vec()).collect();
        Ok((pts(&g.sources), pts(&g.sinks)))
    }

    /// Sign of `(x - z)·v - c` for a plane at signed height `c` along `v`.
    pub fn side_of_plane(&self, k: &[i64], c: &Q) -> Ordering {
        cmp_with_scaled_sqrt(&self.height_coord(k), c, norm2(&self.direction))
    }
}

/// Seed of the capacity field for a cylinder direction at scale `n`.
pub fn cylinder_seed(master: u64, direction: &[i64], n: i64) -> u64 {
    let mut tags: Vec<u64> = direction.iter().map(|&c| c as u64).collect();
    tags.push(n as u64);
    derive_seed(master, &tags)
}

/// `τ_n(A, h)` with its maximal stream.
pub fn tau(
    cyl: &CylinderSpec,
    law: &LawSpec,
    seed: u64,
    replicate: u64,
    keys: &KeyMap,
) -> Result<(FlowResult, StreamFunction, CapacityField, LatticeGraph)> {
    let g = cyl.graph()?;
    let caps = sample_with(law, &g, seed, replicate, keys)?;
    let (s, r) = max_flow(&g, &caps)?;
    Ok((r, s, caps, g))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuRow {
    pub n: i64,
    pub mean: f64,
    pub stderr: f64,
    pub replicates: usize,
    pub samples: Vec<f64>,
}

/// Per-scale statistics of `τ_n / (n^{d-1} H^{d-1}(A))` for one direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    pub direction: Vec<i64>,
    pub unit: Vec<f64>,
    pub rows: Vec<NuRow>,
    /// Mean at the largest scale; subadditivity biases it upwards of the limit
    /// only through boundary terms, so no extrapolation is attempted.
    pub nu_hat: f64,
    pub stderr: f64,
    pub law: LawSpec,
}

impl NuEstimate {
    /// Homogeneous extension `ν̂(x) = |x|_2 ν̂(x / |x|_2)` along this direction.
    pub fn homogeneous(&self, scale: f64) -> f64 {
        scale.abs() * self.nu_hat
    }
}

/// Geometry of the cylinders used for estimation, relative to the direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderShape {
    pub center: Vec<Coord>,
    pub half_sides: Vec<Coord>,
    pub h: Coord,
}

impl CylinderShape {
    /// Base of unit measure, height 1, centred at the origin.
    pub fn unit(d: usize) -> Self {
        Self {
            center: vec![Coord::Int(0); d],
            half_sides: vec![Coord::Text("1/2".into()); d - 1],
            h: Coord::Text("1/2".into()),
        }
    }

    pub fn build(&self, direction: &[i64], n: i64) -> Result<CylinderSpec> {
        let center = self.center.iter().map(Coord::value).collect::<Result<Vec<_>>>()?;
        let half_sides = self.half_sides.iter().map(Coord::value).collect::<Result<Vec<_>>>()?;
        CylinderSpec::new(center, direction.to_vec(), half_sides, self.h.value()?, n)
    }
}

pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Monte Carlo estimate of `ν(w / |w|)` over `n_list` and `replicates`.
pub fn estimate_nu(
    direction: &[i64],
    shape: &CylinderShape,
    n_list: &[i64],
    replicates: usize,
    law: &LawSpec,
    master_seed: u64,
) -> Result<NuEstimate> {
    if n_list.is_empty() || n_list.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidArgument("n_list must be nonempty and increasing".into()));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be >= 1".into()));
    }
    let jobs: Vec<(i64, u64)> =
        n_list.iter().flat_map(|&n| (0..replicates as u64).map(move |r| (n, r))).collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(n, r)| -> Result<f64> {
            let cyl = shape.build(direction, n)?;
            let seed = cylinder_seed(master_seed, direction, n);
            let (res, ..) = tau(&cyl, law, seed, r, &KeyMap::default())?;
            let norm = (n as f64).powi(cyl.dim() as i32 - 1) * to_f64(&cyl.base_area());
            Ok(res.phi / norm)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<NuRow> = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let samples = values[i * replicates..(i + 1) * replicates].to_vec();
            let (mean, stderr) = mean_stderr(&samples);
            NuRow { n, mean, stderr, replicates, samples }
        })
        .collect();
    let last = rows.last().unwrap();
    let norm = (norm2(direction) as f64).sqrt();
    Ok(NuEstimate {
        direction: direction.to_vec(),
        unit: direction.iter().map(|&c| c as f64 / norm).collect(),
        nu_hat: last.mean,
        stderr: last.stderr,
        rows,
        law: law.clone(),
    })
}

/// Tabulated `ν̂` on rational directions, symmetric under `v ↦ -v`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NuTable {
    pub entries: Vec<NuEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuEntry {
    pub unit: Vec<f64>,
    pub nu: f64,
    pub stderr: f64,
}

/// Maximal angle between a face normal and each interpolation neighbour.
pub const MAX_INTERPOLATION_ANGLE_DEG: f64 = 30.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalise(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityWarning {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `ν̂(c) - (α ν̂(a) + β ν̂(b))` for `c = αa + βb`.
    pub excess: f64,
    pub combined_stderr: f64,
}

impl NuTable {
    pub fn constant(d: usize, value: f64) -> Self {
        let entries = (0..d)
            .map(|i| {
                let mut u = vec![0.0; d];
                u[i] = 1.0;
                NuEntry { unit: u, nu: value, stderr: 0.0 }
            })
            .collect();
        Self { entries }
    }

    pub fn from_estimates(estimates: &[NuEstimate]) -> Self {
        let mut t = NuTable::default();
        for e in estimates {
            t.insert(&e.unit, e.nu_hat, e.stderr);
        }
        t
    }

    /// Adds a direction; a direction already present as `v` or `-v` is averaged.
    pub fn insert(&mut self, unit: &[f64], nu: f64, stderr: f64) {
        let u = normalise(unit);
        for e in &mut self.entries {
            if dot(&e.unit, &u).abs() > 1.0 - 1e-12 {
                e.nu = 0.5 * (e.nu + nu);
                e.stderr = 0.5 * (e.stderr * e.stderr + stderr * stderr).sqrt();
                return;
            }
        }
        self.entries.push(NuEntry { unit: u, nu, stderr });
    }

    /// Entries with their antipodes.
    pub fn max_stderr(&self) -> f64 {
        self.entries.iter().map(|e| e.stderr).fold(0.0, f64::max)
    }

    fn symmetric(&self) -> Vec<NuEntry> {
        self.entries
            .iter()
            .flat_map(|e| {
                let neg = NuEntry { unit: e.unit.iter().map(|x| -x).collect(), ..e.clone() };
                [e.clone(), neg]
            })
            .collect()
    }

    /// `ν̂(v)` for a direction (any length; the unit vector is used).
    pub fn lookup(&self, v: &[f64]) -> Result<f64> {
        let u = normalise(v);
        let sym = self.symmetric();
        if let Some(e) = sym.iter().find(|e| dot(&e.unit, &u) > 1.0 - 1e-12) {
            return Ok(e.nu);
        }
        let missing = || Error::MissingDirection(format!("{u:?}"));
        if u.len() != 2 {
            return Err(missing());
        }
        let angle = |e: &NuEntry| (e.unit[1].atan2(e.unit[0]) - u[1].atan2(u[0]) + 3.0 * std::f64::consts::PI)
            .rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        let limit = MAX_INTERPOLATION_ANGLE_DEG.to_radians() + 1e-12;
        let left = sym.iter().filter(|e| angle(e) > 0.0).min_by(|a, b| angle(a).total_cmp(&angle(b)));
        let right = sym.iter().filter(|e| angle(e) < 0.0).max_by(|a, b| angle(a).total_cmp(&angle(b)));
        match (left, right) {
            (Some(a), Some(b)) if angle(a) <= limit && -angle(b) <= limit => {
                let (alpha, beta) = cone_coefficients(&a.unit, &b.unit, &u).ok_or_else(missing)?;
                Ok(alpha * a.nu + beta * b.nu)
            }
            _ => Err(missing()),
        }
    }

    /// Triples `(a, b, c)` with `c` in the open cone of `a, b` where the
    /// homogeneous extension fails convexity by more than three standard errors.
    pub fn convexity_warnings(&self) -> Vec<ConvexityWarning> {
        let sym = self.symmetric();
        let mut out = Vec::new();
        if self.entries.len() < 3 || sym.iter().any(|e| e.unit.len() != 2) {
            return out;
        }
        for (i, a) in sym.iter().enumerate() {
            for b in &sym[i + 1..] {
                if dot(&a.unit, &b.unit) < -1.0 + 1e-12 {
                    continue;
                }
                for c in &sym {
                    let Some((alpha, beta)) = cone_coefficients(&a.unit, &b.unit, &c.unit) else { continue };
                    if alpha <= 1e-12 || beta <= 1e-12 {
                        continue;
                    }
                    let excess = c.nu - (alpha * a.nu + beta * b.nu);
                    let se = (c.stderr.powi(2) + (alpha * a.stderr).powi(2) + (beta * b.stderr).powi(2)).sqrt();
                    if excess > 3.0 * se + 1e-12 {
                        out.push(ConvexityWarning {
                            a: a.unit.clone(),
                            b: b.unit.clone(),
                            c: c.unit.clone(),
                            excess,
                            combined_stderr: se,
                        });
                    }
                }
            }
        }
        out
    }
}

/// `(α, β)` with `c = α a + β b`, when both are nonnegative (planar case).
fn cone_coefficients(a: &[f64], b: &[f64], c: &[f64]) -> Option<(f64, f64)> {
    let det = a[0] * b[1] - a[1] * b[0];
    if det.abs() < 1e-14 {
        return None;
    }
    let alpha = (c[0] * b[1] - c[1] * b[0]) / det;
    let beta = (a[0] * c[1] - a[1] * c[0]) / det;
    (alpha >= -1e-12 && beta >= -1e-12).then_some((alpha.max(0.0), beta.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cyl(w: Vec<i64>, n: i64) -> CylinderSpec {
        CylinderSpec::new(vec![qi(0), qi(0)], w, vec![q(1, 2)], q(1, 2), n).unwrap()
    }

    #[test]
    fn halves_of_axis_cylinder() {
        let cyl = unit_cyl(vec![1, 0], 4);
        let (bottom, top) = cyl.halves().unwrap();
        let mut b = bottom.clone();
        b.sort();
        // left column x = -2 and the lower/upper rows with x < 0
        assert!(b.contains(&vec![-2, 0]));
        assert!(top.iter().all(|k| k[0] > 0));
        assert!(bottom.iter().all(|k| k[0] < 0));
        assert!(top.contains(&vec![2, -2]) && top.contains(&vec![2, 2]));
        assert_eq!(cyl.base_area(), qi(1));
    }

    #[test]
    fn too_coarse() {
        assert!(matches!(
            CylinderSpec::new(vec![qi(0), qi(0)], vec![1, 0], vec![q(1, 2)], q(1, 8), 4),
            Err(Error::TooCoarse(_))
        ));
    }

    #[test]
    fn constant_tau_counts_lines() {
        for n in [2, 4, 8] {
            let cyl = unit_cyl(vec![1, 0], n);
            let (r, ..) = tau(&cyl, &LawSpec::constant(1), 0, 0, &KeyMap::default()).unwrap();
            assert_eq!(r.phi, (n + 1) as f64);
        }
    }

    #[test]
    fn frames_are_orthogonal() {
        for w in [vec![1, 2, 3], vec![0, 0, 1], vec![2, -1, 0]] {
            let f = orthogonal_frame(&w).unwrap();
            for u in &f {
                assert_eq!(u.iter().zip(&w).map(|(a, b)| a * b).sum::<i64>(), 0);
            }
            assert_eq!(f[0].iter().zip(&f[1]).map(|(a, b)| a * b).sum::<i64>(), 0);
        }
    }

    #[test]
    fn table_lookup_and_interpolation() {
        let mut t = NuTable::default();
        t.insert(&[1.0, 0.0], 1.0, 0.0);
        t.insert(&[0.0, 1.0], 1.0, 0.0);
        t.insert(&[1.0, 1.0], 2f64.sqrt(), 0.0);
        assert_eq!(t.lookup(&[-1.0, 0.0]).unwrap(), 1.0);
        assert!((t.lookup(&[-1.0, -1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        // (2,1)/√5 lies between e1 and the diagonal, 26.6° and 18.4° away
        let v = [2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt()];
        assert!((t.lookup(&v).unwrap() - 3.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(t.lookup(&[-1.0, 2.0]), Err(Error::MissingDirection(_))));
        assert!(t.convexity_warnings().is_empty());
        t.insert(&[1.0, -1.0], 3.0, 0.1);
        assert!(!t.convexity_warnings().is_empty());
        let single = NuTable::constant(1, 1.0);
        assert!(single.convexity_warnings().is_empty());
    }

    #[test]
    fn estimate_is_deterministic() {
        let law = LawSpec::bernoulli("0.8", 1);
        let a = estimate_nu(&[1, 0], &CylinderShape::unit(2), &[4, 8], 3, &law, 5).unwrap();
        let b = estimate_nu(&[1, 0], &CylinderShape::unit(2), &[4, 8], 3, &law, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
        assert!(a.nu_hat >= 0.0);
    }
}
