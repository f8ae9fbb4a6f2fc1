//! Stable fibers: the segment through a point that shares its branch history.
//!
//! The fiber through `p` is approximated by the chord of the square through
//! `p` with the depth-truncated stable slope, trimmed at every forward step
//! where the current image crosses the cut line. Points of the trimmed piece
//! share the first `depth` itinerary symbols of `p`; its length `D` is the
//! quantity whose small-value tail (`O(delta^2)`) and reciprocal moments the
//! measure-theoretic checks rely on. The slope truncation contributes an
//! `O(kappa^depth)` error which is reported, not hidden; fibers that the cap
//! never trims keep the full chord length, an upper bound for the true `D`,
//! which biases tail counts downward.

use crate::cone::{cone_constants, stable_direction};
use crate::error::Result;
use crate::map::{self, MapParams, Point2};
use crate::segment::DirectedSegment;

/// Approximate stable fiber through a point. The parameter `t` is arclength
/// with `t = 0` at the point itself, so `t_minus <= 0 <= t_plus`.
#[derive(Clone, Debug)]
pub struct StableFiber {
    pub point: Point2,
    /// Unit direction `(1, v)/|(1, v)|` with `v` the truncated stable slope.
    pub dir: [f64; 2],
    pub t_minus: f64,
    pub t_plus: f64,
    /// Trim depth and direction-truncation depth used.
    pub depth: usize,
    /// Slope truncation bound `kappa^depth * 2*theta0`.
    pub direction_error: f64,
    /// Whether each end was cut by a crossing (rather than the square's edge).
    pub trimmed_minus: bool,
    pub trimmed_plus: bool,
    /// Set when trimming collapsed the interval below 1e-12; `length` is then
    /// reported as 0.
    pub collapsed: bool,
}

impl StableFiber {
    /// Fiber length `D`.
    pub fn length(&self) -> f64 {
        if self.collapsed {
            0.0
        } else {
            self.t_plus - self.t_minus
        }
    }

    pub fn d_minus(&self) -> f64 {
        -self.t_minus
    }

    pub fn d_plus(&self) -> f64 {
        self.t_plus
    }

    pub fn point_at(&self, t: f64) -> (f64, f64) {
        (
            self.point.x + t * self.dir[0],
            self.point.y + t * self.dir[1],
        )
    }

    pub fn segment(&self) -> Result<DirectedSegment> {
        DirectedSegment::new(self.point, self.dir, self.t_minus, self.t_plus)
    }
}

/// Computes the approximate stable fiber through `p`: starts from the maximal
/// chord of the square in the truncated stable direction and, for `depth`
/// forward steps, trims to the sub-piece containing the orbit of `p` whenever
/// the current image crosses the cut line.
pub fn stable_fiber(p: Point2, depth: usize, params: &MapParams) -> Result<StableFiber> {
    let (slope, direction_error) = stable_direction(p, depth, params)?;
    let cones = cone_constants(params)?;
    debug_assert!(cones.in_j_minus(slope.0, 1e-12));
    let dir = slope.unit_vector();

    // chord of the square through p
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (c, d) in [(p.x, dir[0]), (p.y, dir[1])] {
        if d.abs() < 1e-15 {
            continue;
        }
        let (a, b) = ((0.0 - c) / d, (1.0 - c) / d);
        t_lo = t_lo.max(a.min(b));
        t_hi = t_hi.min(a.max(b));
    }
    debug_assert!(t_lo <= 0.0 && t_hi >= 0.0);

    let a = params.alpha();
    let maps = map::branch_matrices(params);
    let mut trimmed_minus = false;
    let mut trimmed_plus = false;
    // image of p and of the direction under the fixed branch sequence of p
    let mut q = p;
    let mut d = dir;
    for _ in 0..depth {
        let w0 = map::weighted_coordinate(q, params);
        let dw = (1.0 - a) * d[0] + a * d[1];
        if dw.abs() > 1e-300 {
            let tc = (0.5 - w0) / dw;
            if tc > t_lo && tc < t_hi {
                // keep the side of the crossing containing p (t = 0); the
                // tie-break on the line itself assigns branch 1
                let p_below = w0 <= 0.5;
                if p_below == (dw > 0.0) {
                    t_hi = t_hi.min(tc);
                    trimmed_plus = true;
                } else {
                    t_lo = t_lo.max(tc);
                    trimmed_minus = true;
                }
            }
        }
        let (next, branch) = map::step(q, params);
        d = maps.forward(branch).apply_vec(d);
        q = next;
    }

    Ok(StableFiber {
        point: p,
        dir,
        t_minus: t_lo,
        t_plus: t_hi,
        depth,
        direction_error,
        trimmed_minus,
        trimmed_plus,
        collapsed: t_hi - t_lo < 1e-12,
    })
}

/// True when `dist(G^n p, L) >= delta * lambda^s_n(p)` holds for every
/// `n <= n_max`; such points sit at distance at least `delta` from both ends
/// of their fiber. When `n_max` is `None` it is chosen so that
/// `C * lambda_minus^n_max < 1e-12 * delta`, beyond which further violations
/// are below tolerance.
pub fn in_stable_core(
    p: Point2,
    delta: f64,
    n_max: Option<usize>,
    params: &MapParams,
) -> Result<bool> {
    assert!(delta > 0.0, "delta must be positive");
    let cones = cone_constants(params)?;
    let n_max = n_max.unwrap_or_else(|| {
        let c_hat = cones.h1_distortion();
        let n = ((1e-12 * delta / c_hat).ln() / cones.lambda_minus.ln()).ceil();
        (n.max(1.0) as usize).min(2_000)
    });
    let depth = 64;
    let lambdas = crate::cone::lambda_s_sequence(p, depth, n_max, params)?;
    let mut q = p;
    for lam in lambdas.iter().take(n_max + 1) {
        if map::distance_to_cut(q, params) < delta * lam {
            return Ok(false);
        }
        q = map::step(q, params).0;
    }
    Ok(true)
}
