//! The lattice realisation `(Ω_n, Γ_n, Γ¹_n, Γ²_n, Π_n)` of a domain.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{q, qi, DomainSpec, Q};
use crate::lattice::{flags, LatticeGraph};

/// Vertex sets are ids into `graph`; `graph.sources` is `Γ¹_n` and
/// `graph.sinks` is `Γ²_n`; `graph.edges` is `Π_n`.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub n: i64,
    pub graph: LatticeGraph,
    pub boundary: Vec<u32>,
}

impl Discretization {
    pub fn dim(&self) -> usize {
        self.graph.dim
    }

    pub fn boundary_flags(&self) -> Vec<bool> {
        flags(self.graph.vertex_count(), &self.boundary)
    }

    /// Rows `(class, k_1..k_d)` for every class a vertex belongs to.
    pub fn write_vertices_csv<W: Write>(&self, out: W) -> Result<()> {
        let g = &self.graph;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["class".to_string()];
        header.extend((1..=g.dim).map(|i| format!("k_{i}")));
        w.write_record(&header)?;
        let classes: [(&str, Vec<u32>); 4] = [
            ("omega", (0..g.vertex_count() as u32).collect()),
            ("gamma", self.boundary.clone()),
            ("gamma1", g.sources.clone()),
            ("gamma2", g.sinks.clone()),
        ];
        for (name, ids) in classes {
            for v in ids {
                let mut rec = vec![name.to_string()];
                rec.extend(g.vertex(v).iter().map(i64::to_string));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Rows `(axis, k_1..k_d)` with the axis 1-based and `k` the lower endpoint.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let g = &self.graph;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["axis".to_string()];
        header.extend((1..=g.dim).map(|i| format!("k_{i}")));
        w.write_record(&header)?;
        for e in 0..g.edge_count() as u32 {
            let (axis, k) = g.edge_key(e);
            let mut rec = vec![(axis + 1).to_string()];
            rec.extend(k.iter().map(i64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integer range of `k` with `n·lo - 1 < k < n·hi + 1`.
fn candidate_range(lo: &Q, hi: &Q, n: i64) -> Result<(i64, i64)> {
    let nq = qi(n as i128);
    let a = (lo * nq - qi(1)).floor().to_integer() + 1;
    let b = (hi * nq + qi(1)).ceil().to_integer() - 1;
    let lim = 1i128 << 40;
    if a.abs() > lim || b.abs() > lim {
        return Err(Error::Overflow(format!("lattice range at n = {n}")));
    }
    Ok((a as i64, b as i64))
}

/// Builds the discrete model at scale `n`.
///
/// Fails with [`Error::EmptyLattice`] when `Ω_n` is empty and with
/// [`Error::EmptyTerminals`] when `Γ¹_n` or `Γ²_n` is empty.
pub fn discretize(spec: &DomainSpec, n: i64) -> Result<Discretization> {
    let disc = discretize_unchecked(spec, n)?;
    if disc.graph.vertex_count() == 0 {
        return Err(Error::EmptyLattice(n as u64));
    }
    if disc.graph.sources.is_empty() || disc.graph.sinks.is_empty() {
        return Err(Error::EmptyTerminals(format!(
            "n = {n}: |Γ¹_n| = {}, |Γ²_n| = {}",
            disc.graph.sources.len(),
            disc.graph.sinks.len()
        )));
    }
    Ok(disc)
}

/// Like [`discretize`] but returns possibly empty vertex classes.
pub fn discretize_unchecked(spec: &DomainSpec, n: i64) -> Result<Discretization> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("scale n = {n} must be >= 1")));
    }
    let d = spec.dim;
    let bbox = spec.bounding_box();
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for i in 0..d {
        let (a, b) = candidate_range(&bbox.lo[i], &bbox.hi[i], n)?;
        lo.push(a);
        hi.push(b);
    }
    let step = q(1, n as i128);
    let to_point = |k: &[i64]| -> Vec<Q> { k.iter().map(|&c| q(c as i128, n as i128)).collect() };
    let mut graph = LatticeGraph::from_predicate(d, n, &lo, &hi, |k| {
        spec.dist_inf(&to_point(k)).map(|dist| dist < step).unwrap_or(false)
    });
    let boundary: Vec<u32> =
        (0..graph.vertex_count() as u32).filter(|&v| graph.missing_neighbours(v) > 0).collect();
    for &v in &boundary {
        let x = graph.point(v);
        let d1 = spec.dist_inf_inlet(&x);
        let d2 = spec.dist_inf_outlet(&x);
        if d1 < step && d2 >= step {
            graph.sources.push(v);
        } else if d2 < step && d1 >= step {
            graph.sinks.push(v);
        }
    }
    Ok(Discretization { n, graph, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boxes::Aabb, domain_neighborhood_volume, shapes, BoxUnion, Body, Region};

    #[test]
    fn unit_square_n4() {
        let disc = discretize(&shapes::unit_square(), 4).unwrap();
        let g = &disc.graph;
        assert_eq!(g.vertex_count(), 25);
        assert_eq!(disc.boundary.len(), 16);
        let mut src: Vec<Vec<i64>> = g.sources.iter().map(|&v| g.vertex(v).to_vec()).collect();
        src.sort();
        assert_eq!(src, (0..5).map(|j| vec![0, j]).collect::<Vec<_>>());
        let mut snk: Vec<Vec<i64>> = g.sinks.iter().map(|&v| g.vertex(v).to_vec()).collect();
        snk.sort();
        assert_eq!(snk, (0..5).map(|j| vec![4, j]).collect::<Vec<_>>());
    }

    #[test]
    fn unit_square_n1() {
        let disc = discretize(&shapes::unit_square(), 1).unwrap();
        assert_eq!(disc.graph.vertex_count(), 4);
        assert_eq!(disc.graph.edge_count(), 4);
    }

    #[test]
    fn edge_count_bound() {
        for spec in [shapes::unit_square(), shapes::hourglass(), shapes::unit_cube()] {
            let vol = domain_neighborhood_volume(&spec, &qi(1), 1).unwrap().value;
            for n in [1, 2, 3, 5, 8] {
                let disc = discretize_unchecked(&spec, n).unwrap();
                let bound = qi(2 * spec.dim as i128) * qi((n as i128).pow(spec.dim as u32)) * vol;
                assert!(qi(disc.graph.edge_count() as i128) <= bound);
                assert!(disc.graph.vertex_count() > 0);
            }
        }
    }

    #[test]
    fn terminal_neighbours_stay_inside() {
        let disc = discretize(&shapes::hourglass(), 8).unwrap();
        let g = &disc.graph;
        for &a in &g.sources {
            for (e, _) in g.incident(a) {
                let edge = g.edges[e as usize];
                let b = if edge.lo == a { edge.hi } else { edge.lo };
                assert!((b as usize) < g.vertex_count());
            }
        }
        let s = g.source_flags();
        assert!(g.sinks.iter().all(|&v| !s[v as usize]));
    }

    #[test]
    fn coarse_scale_reports_empty_terminals() {
        let square = Aabb::new(vec![qi(0), qi(0)], vec![qi(1), qi(1)]).unwrap();
        let body = Body::Boxes(BoxUnion::new(2, vec![square]).unwrap());
        // inlet and outlet are short pieces of the bottom side, one tenth apart
        let g1 = Region::Box(Aabb::new(vec![q(3, 10), q(-1, 2)], vec![q(9, 20), q(1, 2)]).unwrap());
        let g2 = Region::Box(Aabb::new(vec![q(11, 20), q(-1, 2)], vec![q(7, 10), q(1, 2)]).unwrap());
        let spec = DomainSpec::new(2, body, vec![g1], vec![g2]).unwrap();
        assert!(matches!(discretize(&spec, 1), Err(Error::EmptyTerminals(_))));
        assert!(discretize(&spec, 20).is_ok());
    }

    #[test]
    fn csv_exports() {
        let disc = discretize(&shapes::unit_square(), 1).unwrap();
        let mut buf = Vec::new();
        disc.write_edges_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("axis,k_1,k_2\n"));
        let mut buf = Vec::new();
        disc.write_vertices_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("gamma1,")).count(), 2);
    }
}
