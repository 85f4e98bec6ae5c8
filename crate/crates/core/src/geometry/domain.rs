//! Domains with selected inlet/outlet boundary regions.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::boxes::{Aabb, AxisFace, BoxUnion};
use super::convex::{ConvexSet, HalfSpace};
use super::rational::{parse_q, qi, Q};
use crate::error::{Error, Result};

/// An open region of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Open box (interior of the closed box).
    Box(Aabb),
    /// Open convex set `{a · x < b}`; a single half-space is allowed.
    Convex(ConvexSet),
    Union(Vec<Region>),
}

impl Region {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Region::Box(b) => Some(b.dim()),
            Region::Convex(c) => Some(c.dim),
            Region::Union(rs) => rs.first().and_then(Region::dim),
        }
    }

    fn check_dim(&self, x: &[Q]) -> Result<()> {
        match self.dim() {
            Some(d) if d != x.len() => Err(Error::DimensionMismatch { expected: d, got: x.len() }),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: &[Q]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(match self {
            Region::Box(b) => b.contains_open(x),
            Region::Convex(c) => c.contains_open(x),
            Region::Union(rs) => {
                for r in rs {
                    if r.contains(x)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// `inf_{a in A} |x - a|_inf`, computed on the closure.
    pub fn dist_inf(&self, x: &[Q]) -> Result<Q> {
        self.check_dim(x)?;
        match self {
            Region::Box(b) => Ok(b.dist_inf(x)),
            Region::Convex(c) => c.dist_inf(x).ok_or(Error::EmptyRegion),
            Region::Union(rs) => rs
                .iter()
                .filter_map(|r| r.dist_inf(x).ok())
                .min()
                .ok_or(Error::EmptyRegion),
        }
    }

    fn as_convex_parts(&self) -> Vec<ConvexSet> {
        match self {
            Region::Box(b) => vec![ConvexSet::from_box(b)],
            Region::Convex(c) => vec![c.clone()],
            Region::Union(rs) => rs.iter().flat_map(Region::as_convex_parts).collect(),
        }
    }
}

/// The domain body.
#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    /// Interior of a finite union of closed boxes.
    Boxes(BoxUnion),
    /// Interior of a bounded convex polytope.
    Polytope(ConvexSet),
}

/// A closed piece of the boundary: a face (or facet) of the body, possibly
/// restricted to an inlet/outlet region.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPiece {
    pub set: ConvexSet,
    /// Exact box form when the piece is axis aligned.
    pub rect: Option<Aabb>,
    /// Outward normal of the body along this piece (not normalised).
    pub normal: Vec<Q>,
}

impl BoundaryPiece {
    pub fn dist_inf(&self, x: &[Q]) -> Q {
        match &self.rect {
            Some(r) => r.dist_inf(x),
            None => self.set.dist_inf(x).unwrap_or_else(|| qi(i64::MAX as i128)),
        }
    }

    fn dist_inf_piece(&self, other: &BoundaryPiece) -> Option<Q> {
        match (&self.rect, &other.rect) {
            (Some(a), Some(b)) => Some(a.dist_inf_box(b)),
            _ => self.set.dist_inf_set(&other.set),
        }
    }
}

/// Continuous geometry of the flow problem.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub dim: usize,
    pub body: Body,
    pub gamma1: Vec<Region>,
    pub gamma2: Vec<Region>,
    faces: Vec<BoundaryPiece>,
    inlet: Vec<BoundaryPiece>,
    outlet: Vec<BoundaryPiece>,
}

impl DomainSpec {
    pub fn new(dim: usize, body: Body, gamma1: Vec<Region>, gamma2: Vec<Region>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDomain(format!("dimension {dim} < 2")));
        }
        for r in gamma1.iter().chain(&gamma2) {
            if let Some(d) = r.dim() {
                if d != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: d });
                }
            }
        }
        let faces = match &body {
            Body::Boxes(u) => {
                if u.dim != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: u.dim });
                }
                if u.boxes.is_empty() || u.boxes.iter().any(Aabb::is_degenerate) {
                    return Err(Error::InvalidDomain("box body must consist of nondegenerate boxes".into()));
                }
                u.boundary_faces().into_iter().map(axis_piece).collect()
            }
            Body::Polytope(p) => {
                if p.dim != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: p.dim });
                }
                if !p.is_bounded() {
                    return Err(Error::InvalidDomain("polytope body is unbounded".into()));
                }
                if !p.relative_interior_nonempty(&[]) {
                    return Err(Error::InvalidDomain("polytope body has empty interior".into()));
                }
                polytope_facets(p)
            }
        };
        let inlet = restrict(&faces, &gamma1);
        let outlet = restrict(&faces, &gamma2);
        if inlet.is_empty() {
            return Err(Error::InvalidDomain("inlet regions do not meet the boundary".into()));
        }
        if outlet.is_empty() {
            return Err(Error::InvalidDomain("outlet regions do not meet the boundary".into()));
        }
        for a in &inlet {
            for b in &outlet {
                match a.dist_inf_piece(b) {
                    Some(dist) if dist > Q::zero() => {}
                    Some(dist) => return Err(Error::TerminalsTouch(dist.to_string())),
                    None => {}
                }
            }
        }
        Ok(Self { dim, body, gamma1, gamma2, faces, inlet, outlet })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DomainDoc = serde_json::from_str(text)?;
        doc.build()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Membership in the open body.
    pub fn contains(&self, x: &[Q]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(match &self.body {
            Body::Boxes(u) => u.contains_open(x),
            Body::Polytope(p) => p.contains_open(x),
        })
    }

    pub fn contains_closed(&self, x: &[Q]) -> bool {
        match &self.body {
            Body::Boxes(u) => u.contains_closed(x),
            Body::Polytope(p) => p.contains_closed(x),
        }
    }

    fn check_dim(&self, x: &[Q]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// L-infinity distance to the body (equal to the distance to its closure).
    pub fn dist_inf(&self, x: &[Q]) -> Result<Q> {
        self.check_dim(x)?;
        match &self.body {
            Body::Boxes(u) => u.dist_inf(x).ok_or(Error::EmptyRegion),
            Body::Polytope(p) => p.dist_inf(x).ok_or(Error::EmptyRegion),
        }
    }

    pub fn dist_inf_boundary(&self, x: &[Q]) -> Q {
        min_dist(&self.faces, x)
    }

    pub fn dist_inf_inlet(&self, x: &[Q]) -> Q {
        min_dist(&self.inlet, x)
    }

    pub fn dist_inf_outlet(&self, x: &[Q]) -> Q {
        min_dist(&self.outlet, x)
    }

    pub fn boundary_pieces(&self) -> &[BoundaryPiece] {
        &self.faces
    }

    pub fn inlet_pieces(&self) -> &[BoundaryPiece] {
        &self.inlet
    }

    pub fn outlet_pieces(&self) -> &[BoundaryPiece] {
        &self.outlet
    }

    pub fn bounding_box(&self) -> Aabb {
        match &self.body {
            Body::Boxes(u) => u.bounding_box().expect("validated nonempty"),
            Body::Polytope(p) => p.bounding_box().expect("validated nonempty"),
        }
    }

    pub fn box_union(&self) -> Option<&BoxUnion> {
        match &self.body {
            Body::Boxes(u) => Some(u),
            Body::Polytope(_) => None,
        }
    }
}

fn min_dist(pieces: &[BoundaryPiece], x: &[Q]) -> Q {
    pieces
        .iter()
        .map(|p| p.dist_inf(x))
        .min()
        .unwrap_or_else(|| qi(i64::MAX as i128))
}

fn axis_piece(face: AxisFace) -> BoundaryPiece {
    let d = face.rect.dim();
    let mut normal = vec![Q::zero(); d];
    normal[face.axis] = qi(face.outward as i128);
    BoundaryPiece { set: ConvexSet::from_box(&face.rect), rect: Some(face.rect), normal }
}

fn polytope_facets(p: &ConvexSet) -> Vec<BoundaryPiece> {
    let mut out = Vec::new();
    for (j, h) in p.halfspaces.iter().enumerate() {
        let others: Vec<HalfSpace> =
            p.halfspaces.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, h)| h.clone()).collect();
        let rest = ConvexSet { dim: p.dim, halfspaces: others };
        if !rest.relative_interior_nonempty(std::slice::from_ref(h)) {
            continue;
        }
        let mut set = p.clone();
        set.halfspaces.push(HalfSpace { a: h.a.iter().map(|v| -v).collect(), b: -h.b });
        out.push(BoundaryPiece { set, rect: None, normal: h.a.clone() });
    }
    out
}

/// Closures of `face ∩ region` for every pair whose relative intersection is nonempty.
fn restrict(faces: &[BoundaryPiece], regions: &[Region]) -> Vec<BoundaryPiece> {
    let mut out = Vec::new();
    for face in faces {
        for region in regions {
            match (&face.rect, region) {
                (Some(rect), Region::Box(b)) => {
                    if let Some(piece) = open_box_on_face(rect, &face.normal, b) {
                        out.push(BoundaryPiece {
                            set: ConvexSet::from_box(&piece),
                            rect: Some(piece),
                            normal: face.normal.clone(),
                        });
                    }
                }
                _ => {
                    for part in region.as_convex_parts() {
                        if let Some(piece) = convex_on_face(face, &part) {
                            out.push(piece);
                        }
                    }
                }
            }
        }
    }
    out
}

fn open_box_on_face(rect: &Aabb, normal: &[Q], region: &Aabb) -> Option<Aabb> {
    let axis = normal.iter().position(|v| !v.is_zero())?;
    let c = rect.lo[axis];
    if !(region.lo[axis] < c && c < region.hi[axis]) {
        return None;
    }
    let mut piece = rect.intersect(region)?;
    piece.lo[axis] = c;
    piece.hi[axis] = c;
    let nondegenerate = (0..rect.dim()).filter(|&i| i != axis).all(|i| piece.lo[i] < piece.hi[i]);
    nondegenerate.then_some(piece)
}

fn convex_on_face(face: &BoundaryPiece, region: &ConvexSet) -> Option<BoundaryPiece> {
    // the face set is the closed facet; separate the supporting equality
    let (equalities, strict): (Vec<HalfSpace>, Vec<HalfSpace>) = {
        let eq = supporting_equality(face);
        let strict: Vec<HalfSpace> = face
            .set
            .halfspaces
            .iter()
            .filter(|h| !is_parallel_to(h, &eq))
            .cloned()
            .chain(region.halfspaces.iter().cloned())
            .collect();
        (vec![eq], strict)
    };
    let probe = ConvexSet { dim: region.dim, halfspaces: strict };
    if !probe.relative_interior_nonempty(&equalities) {
        return None;
    }
    Some(BoundaryPiece { set: face.set.intersect(region), rect: None, normal: face.normal.clone() })
}

fn supporting_equality(face: &BoundaryPiece) -> HalfSpace {
    // the facet lies in {normal · y = b}; recover b from any vertex
    let b = face
        .set
        .halfspaces
        .iter()
        .find(|h| h.a == face.normal)
        .map(|h| h.b)
        .unwrap_or_else(Q::zero);
    HalfSpace { a: face.normal.clone(), b }
}

fn is_parallel_to(h: &HalfSpace, eq: &HalfSpace) -> bool {
    let neg: Vec<Q> = eq.a.iter().map(|v| -v).collect();
    (h.a == eq.a && h.b == eq.b) || (h.a == neg && h.b == -eq.b)
}

// ---- JSON document --------------------------------------------------------

/// Exact number: a decimal/fraction string, an integer, or a float read through
/// its shortest decimal representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Text(String),
    Int(i64),
    Float(f64),
}

impl Coord {
    pub fn value(&self) -> Result<Q> {
        match self {
            Coord::Text(s) => parse_q(s),
            Coord::Int(v) => Ok(qi(*v as i128)),
            Coord::Float(v) => parse_q(&format!("{v}")),
        }
    }
}

impl From<&Q> for Coord {
    fn from(v: &Q) -> Self {
        if v.is_integer() {
            Coord::Int(v.to_integer() as i64)
        } else {
            Coord::Text(format!("{}/{}", v.numer(), v.denom()))
        }
    }
}

fn coords(v: &[Coord]) -> Result<Vec<Q>> {
    v.iter().map(Coord::value).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfSpaceDoc {
    pub a: Vec<Coord>,
    pub b: Coord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RegionDoc {
    Box { lo: Vec<Coord>, hi: Vec<Coord> },
    Halfspace { a: Vec<Coord>, b: Coord },
    Polytope { halfspaces: Vec<HalfSpaceDoc> },
    Union { regions: Vec<RegionDoc> },
}

impl RegionDoc {
    pub fn build(&self, dim: usize) -> Result<Region> {
        Ok(match self {
            RegionDoc::Box { lo, hi } => Region::Box(Aabb::new(coords(lo)?, coords(hi)?)?),
            RegionDoc::Halfspace { a, b } => {
                Region::Convex(ConvexSet::new(dim, vec![HalfSpace { a: coords(a)?, b: b.value()? }])?)
            }
            RegionDoc::Polytope { halfspaces } => Region::Convex(ConvexSet::new(
                dim,
                halfspaces
                    .iter()
                    .map(|h| Ok(HalfSpace { a: coords(&h.a)?, b: h.b.value()? }))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            RegionDoc::Union { regions } => {
                Region::Union(regions.iter().map(|r| r.build(dim)).collect::<Result<Vec<_>>>()?)
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "lowercase")]
pub enum BodyDoc {
    Boxes(Vec<BoxDoc>),
    Polytope(Vec<HalfSpaceDoc>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxDoc {
    pub lo: Vec<Coord>,
    pub hi: Vec<Coord>,
}

impl BoxDoc {
    pub fn build(&self) -> Result<Aabb> {
        Aabb::new(coords(&self.lo)?, coords(&self.hi)?)
    }
}

/// On-disk domain description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainDoc {
    pub d: usize,
    pub body: BodyDoc,
    pub gamma1: Vec<RegionDoc>,
    pub gamma2: Vec<RegionDoc>,
}

impl DomainDoc {
    pub fn build(&self) -> Result<DomainSpec> {
        let body = match &self.body {
            BodyDoc::Boxes(bs) => Body::Boxes(BoxUnion::new(
                self.d,
                bs.iter().map(|b| Aabb::new(coords(&b.lo)?, coords(&b.hi)?)).collect::<Result<Vec<_>>>()?,
            )?),
            BodyDoc::Polytope(hs) => Body::Polytope(ConvexSet::new(
                self.d,
                hs.iter()
                    .map(|h| Ok(HalfSpace { a: coords(&h.a)?, b: h.b.value()? }))
                    .collect::<Result<Vec<_>>>()?,
            )?),
        };
        let g1 = self.gamma1.iter().map(|r| r.build(self.d)).collect::<Result<Vec<_>>>()?;
        let g2 = self.gamma2.iter().map(|r| r.build(self.d)).collect::<Result<Vec<_>>>()?;
        DomainSpec::new(self.d, body, g1, g2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rational::q;
    use crate::geometry::shapes;

    #[test]
    fn unit_square_membership() {
        let s = shapes::unit_square();
        assert!(s.contains(&[q(1, 2), q(1, 2)]).unwrap());
        assert!(!s.contains(&[qi(0), q(1, 2)]).unwrap());
        assert!(!s.contains(&[qi(2), qi(0)]).unwrap());
        assert!(matches!(s.contains(&[qi(0)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn inlet_pieces_are_sides() {
        let s = shapes::unit_square();
        assert_eq!(s.inlet_pieces().len(), 1);
        assert_eq!(s.outlet_pieces().len(), 1);
        assert_eq!(s.dist_inf_inlet(&[q(1, 4), q(1, 2)]), q(1, 4));
        assert_eq!(s.dist_inf_outlet(&[q(1, 4), q(1, 2)]), q(3, 4));
    }

    #[test]
    fn touching_terminals_rejected() {
        let left = Region::Box(Aabb::new(vec![q(-1, 10), q(-1, 10)], vec![q(1, 10), q(11, 10)]).unwrap());
        // bottom side region reaches the corner (0,0) shared with the left side
        let bottom = Region::Box(Aabb::new(vec![q(-1, 10), q(-1, 10)], vec![q(11, 10), q(1, 10)]).unwrap());
        let body = Body::Boxes(
            BoxUnion::new(2, vec![Aabb::new(vec![qi(0), qi(0)], vec![qi(1), qi(1)]).unwrap()]).unwrap(),
        );
        let err = DomainSpec::new(2, body, vec![left], vec![bottom]).unwrap_err();
        assert!(matches!(err, Error::TerminalsTouch(_)), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "d": 2,
            "body": {"type": "boxes", "data": [{"lo": ["0", "0"], "hi": ["1", "1"]}]},
            "gamma1": [{"type": "box", "lo": ["-0.5", "0"], "hi": ["0.5", "1"]}],
            "gamma2": [{"type": "halfspace", "a": ["-1", "0"], "b": "-0.75"}]
        }"#;
        let s = DomainSpec::from_json(text).unwrap();
        assert_eq!(s.inlet_pieces().len(), 1);
        // the half-plane x > 3/4 also meets the top and bottom sides
        assert_eq!(s.outlet_pieces().len(), 3);
        assert_eq!(s.dist_inf_outlet(&[qi(0), q(1, 2)]), q(3, 4));
    }

    #[test]
    fn polytope_triangle() {
        let text = r#"{
            "d": 2,
            "body": {"type": "polytope", "data": [
                {"a": ["-1", "0"], "b": "0"}, {"a": ["0", "-1"], "b": "0"}, {"a": ["1", "1"], "b": "1"}]},
            "gamma1": [{"type": "box", "lo": ["-1", "0.25"], "hi": ["0.1", "0.75"]}],
            "gamma2": [{"type": "box", "lo": ["0.25", "-1"], "hi": ["0.75", "0.1"]}]
        }"#;
        let s = DomainSpec::from_json(text).unwrap();
        assert_eq!(s.boundary_pieces().len(), 3);
        assert_eq!(s.dist_inf_inlet(&[qi(0), q(1, 2)]), qi(0));
        assert_eq!(s.dist_inf_inlet(&[qi(0), qi(0)]), q(1, 4));
        assert_eq!(s.dist_inf(&[qi(1), qi(1)]).unwrap(), q(1, 2));
    }
}
