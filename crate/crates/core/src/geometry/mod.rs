//! Metric and convexity primitives on the unit sphere.

mod cap;
mod hull;
mod point;
mod polygon;

pub use cap::{smallest_enclosing_cap, CapCover};
pub use hull::{
    caratheodory_reduce, origin_hull_distance, reduce_convex_combination, simplex_volume, CaratheodorySubset,
    HullDistance, CONTAINMENT_THRESHOLD, HULL_GAP_TOLERANCE,
};
pub use point::{chord, dedup_indices, set_diameter, PointSet, SpherePoint};
pub use polygon::{is_regular_pgon, Regularity};
