//! Continuum capacity of polyhedral candidate sets and the convergence experiments.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{sample, LawSpec};
use crate::cutset::{cut_region, min_cutset};
use crate::cylinder::{mean_stderr, NuTable};
use crate::discretization::discretize;
use crate::error::{Error, Result};
use crate::geometry::{boundary_neighborhood_volume, q, to_f64, Aabb, BoxUnion, DomainSpec, ElementaryGrid, Q};
use crate::maxflow::max_flow;

/// The three terms of `capa(F)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Capa {
    /// `∫_{Ω ∩ ∂F} ν(v_F)`.
    pub interior: f64,
    /// `∫_{Γ² ∩ ∂F} ν(v_F)`.
    pub outlet: f64,
    /// `∫_{Γ¹ ∩ ∂(Ω \ F)} ν(v_Ω)`.
    pub inlet: f64,
}

impl Capa {
    pub fn total(&self) -> f64 {
        self.interior + self.outlet + self.inlet
    }
}

fn on_pieces(pieces: &[crate::geometry::BoundaryPiece], face: &Aabb) -> bool {
    let c = face.center();
    pieces.iter().any(|p| p.rect.as_ref().is_some_and(|r| r.contains_closed(&c)))
}

/// `capa(F)` for a box-union candidate `F` (clipped to `Ω`) in a box-union domain.
pub fn capa_polyhedral(f: &BoxUnion, nu: &NuTable, spec: &DomainSpec) -> Result<Capa> {
    let omega = spec
        .box_union()
        .ok_or_else(|| Error::InvalidArgument("capa is evaluated on box-union domains only".into()))?;
    if f.dim != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: f.dim });
    }
    let d = spec.dim;
    let mut grid = ElementaryGrid::from_boxes(d, omega.boxes.iter().chain(&f.boxes));
    for p in spec.inlet_pieces().iter().chain(spec.outlet_pieces()) {
        if let Some(r) = &p.rect {
            for i in 0..d {
                grid.add_coords(i, [r.lo[i], r.hi[i]]);
            }
        }
    }
    let in_omega = grid.classify(|x| omega.contains_open(x));
    let in_f: Vec<bool> = grid.classify(|x| f.contains_open(x)).iter().zip(&in_omega).map(|(a, b)| *a && *b).collect();
    let dims = grid.cells_per_axis();
    let mut capa = Capa::default();
    for axis in 0..d {
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        let nu_plus = nu.lookup(&e)?;
        e[axis] = -1.0;
        let nu_minus = nu.lookup(&e)?;
        for c in 0..grid.cell_count() {
            let multi = grid.cell_multi(c);
            // faces on the lower side of cell `c` and, at the top of the grid, its upper side
            let mut sides = vec![(None, Some(c), multi[axis])];
            if multi[axis] + 1 == dims[axis] {
                sides.push((Some(c), None, multi[axis] + 1));
            }
            if multi[axis] > 0 {
                let mut m = multi.clone();
                m[axis] -= 1;
                sides[0].0 = Some(grid.cell_index(&m));
            }
            for (below, above, coord) in sides {
                let flag = |v: &[bool], x: Option<usize>| x.is_some_and(|i| v[i]);
                let (fb, fa) = (flag(&in_f, below), flag(&in_f, above));
                let (ob, oa) = (flag(&in_omega, below), flag(&in_omega, above));
                let mut rect = grid.cell_box(&multi);
                rect.lo[axis] = grid.coords[axis][coord];
                rect.hi[axis] = grid.coords[axis][coord];
                let area = to_f64(
                    &(0..d).filter(|&i| i != axis).map(|i| rect.hi[i] - rect.lo[i]).fold(Q::from_integer(1), |a, s| a * s),
                );
                // normal pointing out of the F side (resp. out of Ω)
                let nu_out = |lower_inside: bool| if lower_inside { nu_plus } else { nu_minus };
                if fb != fa {
                    if ob && oa {
                        capa.interior += area * nu_out(fb);
                    } else if on_pieces(spec.outlet_pieces(), &rect) {
                        capa.outlet += area * nu_out(fb);
                    }
                } else if ob != oa && !fb && on_pieces(spec.inlet_pieces(), &rect) {
                    capa.inlet += area * nu_out(ob);
                }
            }
        }
    }
    Ok(capa)
}

/// One `(n, replicate)` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: i64,
    pub seed: u64,
    pub replicate: u64,
    pub phi_rescaled: f64,
    pub cut_card: usize,
    pub cut_capacity: f64,
    /// `𝔡(E_n, F_ref)` with `E_n = R(E) ∩ Ω`.
    pub dist_to_ref: Option<f64>,
    /// `𝔡(R(E), E_n)`.
    pub dist_re_e: Option<f64>,
    /// `L^d(V_∞(Γ, 1/n))`.
    pub boundary_bound: f64,
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub n: i64,
    pub replicates: usize,
    pub phi_mean: f64,
    pub phi_stderr: f64,
    pub dist_mean: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub summary: Vec<ConvergenceSummary>,
    /// `capa(F_ref)` when a reference and a ν̂ table were supplied.
    pub capa_ref: Option<f64>,
    /// Rows with `phi_rescaled > capa_ref + 3 stderr(ν̂)`.
    pub duality_violations: Vec<(i64, u64)>,
}

/// Inputs shared by [`lln_experiment`] and [`cut_convergence`].
#[derive(Clone, Debug)]
pub struct ExperimentSpec<'a> {
    pub domain: &'a DomainSpec,
    pub law: &'a LawSpec,
    pub n_list: &'a [i64],
    pub replicates: u64,
    pub master_seed: u64,
    pub reference: Option<&'a BoxUnion>,
    pub nu: Option<&'a NuTable>,
    pub timing: bool,
}

fn run_one(x: &ExperimentSpec, n: i64, rep: u64) -> Result<ConvergenceRow> {
    let start = Instant::now();
    let disc = discretize(x.domain, n)?;
    let g = &disc.graph;
    let caps = sample(x.law, g, x.master_seed, rep)?;
    let (stream, flow) = max_flow(g, &caps)?;
    let cut = min_cutset(g, &caps, &stream)?;
    let region = cut_region(g, &cut);
    let omega = x.domain.box_union();
    let dist_re_e = omega.map(|o| to_f64(&region.distance_to_clipped(o)));
    let dist_to_ref = match (omega, x.reference) {
        (Some(o), Some(f)) => Some(to_f64(&region.distance_to(o, f))),
        _ => None,
    };
    let bound = boundary_neighborhood_volume(x.domain, &q(1, n as i128), 8 * n)?;
    Ok(ConvergenceRow {
        n,
        seed: x.master_seed,
        replicate: rep,
        phi_rescaled: flow.phi_rescaled,
        cut_card: cut.cardinality(),
        cut_capacity: cut.capacity,
        dist_to_ref,
        dist_re_e,
        boundary_bound: to_f64(&(bound.value + bound.error)),
        runtime_ms: x.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

fn run(x: &ExperimentSpec) -> Result<ConvergenceReport> {
    let jobs: Vec<(i64, u64)> = x.n_list.iter().flat_map(|&n| (0..x.replicates).map(move |r| (n, r))).collect();
    let rows = jobs.par_iter().map(|&(n, r)| run_one(x, n, r)).collect::<Result<Vec<_>>>()?;
    let summary = x
        .n_list
        .iter()
        .map(|&n| {
            let these: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.n == n).collect();
            let phis: Vec<f64> = these.iter().map(|r| r.phi_rescaled).collect();
            let (phi_mean, phi_stderr) = mean_stderr(&phis);
            let dists: Option<Vec<f64>> = these.iter().map(|r| r.dist_to_ref).collect();
            ConvergenceSummary {
                n,
                replicates: these.len(),
                phi_mean,
                phi_stderr,
                dist_mean: dists.filter(|v| !v.is_empty()).map(|v| mean_stderr(&v).0),
            }
        })
        .collect();
    let mut report = ConvergenceReport { rows, summary, ..Default::default() };
    if let (Some(f), Some(nu)) = (x.reference, x.nu) {
        let capa = capa_polyhedral(f, nu, x.domain)?.total();
        let tol = 3.0 * nu.max_stderr() * capa_weight(f, x.domain)?;
        report.capa_ref = Some(capa);
        report.duality_violations =
            report.rows.iter().filter(|r| r.phi_rescaled > capa + tol).map(|r| (r.n, r.replicate)).collect();
    }
    Ok(report)
}

/// `capa(F)` with `ν ≡ 1`: the area that the ν̂ errors are multiplied by.
fn capa_weight(f: &BoxUnion, spec: &DomainSpec) -> Result<f64> {
    Ok(capa_polyhedral(f, &NuTable::constant(spec.dim, 1.0), spec)?.total())
}

/// `φ_n / n^{d-1}` per `(n, replicate)`, with the duality sandwich against `capa(F_ref)`.
pub fn lln_experiment(x: &ExperimentSpec) -> Result<ConvergenceReport> {
    run(x)
}

/// `𝔡(E_n, F_ref)` per `(n, replicate)`; requires a reference set.
pub fn cut_convergence(x: &ExperimentSpec) -> Result<ConvergenceReport> {
    if x.reference.is_none() {
        return Err(Error::InvalidArgument("cut convergence needs a reference set".into()));
    }
    if x.domain.box_union().is_none() {
        return Err(Error::InvalidArgument("cut convergence needs a box-union domain".into()));
    }
    run(x)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record([
            "n",
            "seed",
            "replicate",
            "phi_rescaled",
            "cut_card",
            "cut_capacity",
            "dist_to_ref",
            "dist_RE_E",
            "boundary_bound",
            "runtime_ms",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.seed.to_string(),
                r.replicate.to_string(),
                format!("{}", r.phi_rescaled),
                r.cut_card.to_string(),
                format!("{}", r.cut_capacity),
                opt(r.dist_to_ref),
                opt(r.dist_re_e),
                format!("{}", r.boundary_bound),
                opt(r.runtime_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Helper for tests and configs: `E_n` itself as a box union.
pub fn clipped_region(region: &crate::cutset::CutRegion, omega: &BoxUnion) -> BoxUnion {
    region.voxels.to_box_union().intersection(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{qi, shapes};

    fn boxes(lo: [(i128, i128); 2], hi: [(i128, i128); 2]) -> BoxUnion {
        let b = Aabb::new(lo.iter().map(|&(a, b)| q(a, b)).collect(), hi.iter().map(|&(a, b)| q(a, b)).collect()).unwrap();
        BoxUnion::new(2, vec![b]).unwrap()
    }

    #[test]
    fn capa_term_fixtures() {
        let spec = shapes::unit_square();
        let nu = NuTable::constant(2, 1.0);
        let left = boxes([(0, 1), (0, 1)], [(1, 2), (1, 1)]);
        assert_eq!(capa_polyhedral(&left, &nu, &spec).unwrap(), Capa { interior: 1.0, outlet: 0.0, inlet: 0.0 });
        let all = boxes([(0, 1), (0, 1)], [(1, 1), (1, 1)]);
        assert_eq!(capa_polyhedral(&all, &nu, &spec).unwrap(), Capa { interior: 0.0, outlet: 1.0, inlet: 0.0 });
        let none = BoxUnion::empty(2);
        assert_eq!(capa_polyhedral(&none, &nu, &spec).unwrap(), Capa { interior: 0.0, outlet: 0.0, inlet: 1.0 });
    }

    #[test]
    fn capa_uses_face_normals() {
        let spec = shapes::unit_square();
        let mut nu = NuTable::default();
        nu.insert(&[1.0, 0.0], 2.0, 0.0);
        nu.insert(&[0.0, 1.0], 5.0, 0.0);
        // bottom-left quarter: one vertical and one horizontal interior face of length 1/2
        let quarter = boxes([(0, 1), (0, 1)], [(1, 2), (1, 2)]);
        let c = capa_polyhedral(&quarter, &nu, &spec).unwrap();
        assert_eq!(c.interior, 0.5 * 2.0 + 0.5 * 5.0);
        assert_eq!(c.inlet, 0.5 * 2.0);
    }

    #[test]
    fn capa_of_hourglass_chamber() {
        let spec = shapes::hourglass();
        let nu = NuTable::constant(2, 1.0);
        let c = capa_polyhedral(&shapes::hourglass_left_chamber(), &nu, &spec).unwrap();
        assert!((c.total() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn lln_square_is_exact() {
        let spec = shapes::unit_square();
        let law = LawSpec::constant(1);
        let left = boxes([(0, 1), (0, 1)], [(1, 2), (1, 1)]);
        let nu = NuTable::constant(2, 1.0);
        let x = ExperimentSpec {
            domain: &spec,
            law: &law,
            n_list: &[4, 8],
            replicates: 2,
            master_seed: 1,
            reference: Some(&left),
            nu: Some(&nu),
            timing: false,
        };
        let rep = lln_experiment(&x).unwrap();
        assert_eq!(rep.rows.len(), 4);
        for r in &rep.rows {
            assert_eq!(r.phi_rescaled, (r.n + 1) as f64 / r.n as f64);
            assert_eq!(r.cut_card as i64, r.n + 1);
            assert!(r.dist_re_e.unwrap() <= r.boundary_bound);
        }
        assert_eq!(rep.capa_ref, Some(1.0));
        assert_eq!(rep.summary[0].phi_stderr, 0.0);
        let mut a = Vec::new();
        rep.write_csv(&mut a).unwrap();
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("n,seed,replicate,phi_rescaled"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn distance_to_own_region_is_zero() {
        let spec = shapes::hourglass();
        let n = 8;
        let disc = discretize(&spec, n).unwrap();
        let g = &disc.graph;
        let caps = sample(&LawSpec::constant(1), g, 0, 0).unwrap();
        let (s, _) = max_flow(g, &caps).unwrap();
        let region = cut_region(g, &min_cutset(g, &caps, &s).unwrap());
        let omega = spec.box_union().unwrap();
        let e_n = clipped_region(&region, omega);
        assert_eq!(region.distance_to(omega, &e_n), qi(0));
        let law = LawSpec::constant(1);
        let x = ExperimentSpec {
            domain: &spec,
            law: &law,
            n_list: &[n],
            replicates: 1,
            master_seed: 0,
            reference: Some(&e_n),
            nu: None,
            timing: true,
        };
        let rep = cut_convergence(&x).unwrap();
        assert_eq!(rep.rows[0].dist_to_ref, Some(0.0));
        assert!(rep.rows[0].runtime_ms.is_some());
    }
}
