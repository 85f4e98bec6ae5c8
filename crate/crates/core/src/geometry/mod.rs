//! Continuous geometry: exact rationals, boxes, convex polytopes and domains.

pub mod boxes;
pub mod convex;
pub mod domain;
pub mod rational;
pub mod shapes;
pub mod volume;

pub use boxes::{Aabb, AxisFace, BoxUnion, ElementaryGrid, VoxelSet};
pub use convex::{ConvexSet, HalfSpace};
pub use domain::{Body, BoxDoc, Coord, BoundaryPiece, DomainDoc, DomainSpec, Region};
pub use rational::{q, qi, to_f64, Q};
pub use volume::{boundary_neighborhood_volume, domain_neighborhood_volume, sym_diff_volume, Solid, VolumeEstimate};
