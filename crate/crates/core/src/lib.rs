//! Periodic homeomorphisms of spheres and how small their orbits can be.
//!
//! The crate builds periodic self-maps of `S^n` (rotation-spectrum isometries,
//! their projective conjugates, and piecewise-linear conjugates of circle
//! rotations), measures their shift and orbital diameter, and checks those
//! against the extremal constants of regular polygons and simplices.

pub mod circle;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod isometry;
pub mod lab;
pub mod linalg;
pub mod maps;
pub mod optimize;
pub mod orbit;
pub mod seed;

pub use circle::{antipodal_search, arc_gaps, build_pl_conjugacy, witness_chord, CircleHomeo};
pub use constants::{extremal_lengths, regular_configuration, ConfigurationKind, ExtremalLengths};
pub use error::{Error, Result};
pub use geometry::{
    caratheodory_reduce, is_regular_pgon, origin_hull_distance, set_diameter, smallest_enclosing_cap, CapCover,
    PointSet, SpherePoint,
};
pub use isometry::{
    build_block_isometry, canonical_simplex_rotation, minimal_period, random_periodic_isometry, shift_exact,
    PeriodicIsometry, RotationSpectrum,
};
pub use lab::{replay, run_check, CheckConfig, CheckId, ReplayOutcome, VerificationReport, Witness};
pub use maps::{projective_conjugate, MapKind, MapSpec, PeriodicMap};
pub use orbit::{barycentric, circle_degree, maximize_orbit_diameter, orbit, solve_lemma24, Orbit};
