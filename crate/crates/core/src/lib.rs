//! Numerical laboratory for the planar tent map with memory,
//! `G(x, y) = (y, tent(alpha*y + (1-alpha)*x))` on the unit square.
//!
//! For `alpha` in `(3/4, 1)` the map is piecewise affine, 2-to-1, and
//! area-contracting, so its long-run statistics concentrate on a
//! Lebesgue-null attractor. The crate provides
//!
//! * the map itself, its branches, orbits and itineraries ([`map`]),
//! * the invariant-cone direction fields and stretch rates ([`cone`]),
//! * exact refinement of segments and polygons under iteration
//!   ([`segment`], [`polygon`]),
//! * stable fibers and their length statistics ([`fiber`]),
//! * seeded, worker-count-independent Monte Carlo estimators of the
//!   invariant measure ([`measure`]), and
//! * a verification suite that checks the quantitative facts the
//!   construction rests on ([`verify`]).

pub mod cone;
pub mod error;
pub mod fiber;
pub mod map;
pub mod measure;
pub mod polygon;
pub mod rng;
pub mod segment;
pub mod verify;

pub use cone::{
    cone_constants, stable_direction, stretch_rates, unstable_direction, ConeConstants, Sign,
    SlopeU, SlopeV,
};
pub use error::{Error, Result};
pub use fiber::{in_stable_core, stable_fiber, StableFiber};
pub use map::{
    branch_matrices, inverse_branch, orbit, region_of, step, tent, weighted_coordinate, BranchId,
    Itinerary, MapParams, Past, Point2,
};
pub use measure::{EmpiricalMeasure2D, Observable};
pub use rng::CounterRng;
pub use segment::{gamma_n, refine_unstable_segment, DirectedSegment, RefinedCell};
pub use verify::{verification_suite, VerificationReport};
