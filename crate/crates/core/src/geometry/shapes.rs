//! Reference domains used by tests, examples and the CLI defaults.

use super::boxes::{Aabb, BoxUnion};
use super::convex::{ConvexSet, HalfSpace};
use super::domain::{Body, DomainSpec, Region};
use super::rational::{q, qi, Q};

fn rect(lo: [Q; 2], hi: [Q; 2]) -> Aabb {
    Aabb::new(lo.to_vec(), hi.to_vec()).expect("valid box")
}

/// Open box selecting the vertical side `x = c` for `y` in `(y0, y1)`.
pub fn side_region(c: Q, y0: Q, y1: Q) -> Region {
    Region::Box(rect([c - q(1, 2), y0], [c + q(1, 2), y1]))
}

/// `(0,1)^2` with inlet on the left side and outlet on the right side.
pub fn unit_square() -> DomainSpec {
    let body = Body::Boxes(BoxUnion::new(2, vec![rect([qi(0), qi(0)], [qi(1), qi(1)])]).unwrap());
    DomainSpec::new(
        2,
        body,
        vec![side_region(qi(0), qi(0), qi(1))],
        vec![side_region(qi(1), qi(0), qi(1))],
    )
    .expect("valid domain")
}

/// Neck of the hourglass: `[1, 3/2] x [3/8, 23/40]`, width `1/5`.
pub fn hourglass_neck() -> Aabb {
    rect([qi(1), q(3, 8)], [q(3, 2), q(23, 40)])
}

/// Two unit chambers joined by a neck of width 1/5; inlet on the far left side,
/// outlet on the far right side.
pub fn hourglass() -> DomainSpec {
    let body = Body::Boxes(
        BoxUnion::new(
            2,
            vec![rect([qi(0), qi(0)], [qi(1), qi(1)]), hourglass_neck(), rect([q(3, 2), qi(0)], [q(5, 2), qi(1)])],
        )
        .unwrap(),
    );
    DomainSpec::new(
        2,
        body,
        vec![side_region(qi(0), qi(0), qi(1))],
        vec![side_region(q(5, 2), qi(0), qi(1))],
    )
    .expect("valid domain")
}

/// Left chamber of the hourglass, the continuum minimiser for constant capacities.
pub fn hourglass_left_chamber() -> BoxUnion {
    BoxUnion::new(2, vec![rect([qi(0), qi(0)], [qi(1), qi(1)])]).unwrap()
}

/// Right triangle `x, y > 0, x + y < 1`, inlet on the vertical leg, outlet on the
/// horizontal leg (both restricted to `(1/4, 3/4)`).
pub fn triangle() -> DomainSpec {
    let hs = |a: [i128; 2], b: Q| HalfSpace { a: vec![qi(a[0]), qi(a[1])], b };
    let body = Body::Polytope(ConvexSet::new(2, vec![hs([-1, 0], qi(0)), hs([0, -1], qi(0)), hs([1, 1], qi(1))]).unwrap());
    DomainSpec::new(
        2,
        body,
        vec![Region::Box(rect([q(-1, 2), q(1, 4)], [q(1, 8), q(3, 4)]))],
        vec![Region::Box(rect([q(1, 4), q(-1, 2)], [q(3, 4), q(1, 8)]))],
    )
    .expect("valid domain")
}

/// Unit cube in `d = 3` with inlet at `x = 0` and outlet at `x = 1`.
pub fn unit_cube() -> DomainSpec {
    let cube = Aabb::new(vec![qi(0); 3], vec![qi(1); 3]).unwrap();
    let side = |c: Q| Region::Box(Aabb::new(vec![c - q(1, 2), qi(0), qi(0)], vec![c + q(1, 2), qi(1), qi(1)]).unwrap());
    DomainSpec::new(3, Body::Boxes(BoxUnion::new(3, vec![cube]).unwrap()), vec![side(qi(0))], vec![side(qi(1))])
        .expect("valid domain")
}
