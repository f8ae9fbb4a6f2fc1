//! Invariant-cone geometry of the branch derivatives.
//!
//! Writing unstable tangent directions as `(u, 1)` and stable ones as
//! `(1, v)`, the two branch derivatives induce the slope maps
//!
//! ```text
//! S_±(u) = 1 / (±2u(1-alpha) ± 2alpha)      (forward action on (u, 1))
//! T_±(v) = 2(1-alpha) / (-2alpha ± v)       (backward action on (1, v))
//! ```
//!
//! with the sign tied to the branch (branch 1 -> `+`, branch 2 -> `-`). For
//! `alpha` in `(3/4, 1)` let `theta0 = alpha - sqrt(alpha^2 + 2*alpha - 2)`.
//! The slope intervals `J_+ = { |2u(1-alpha)| <= theta0 }` and
//! `J_- = { |v| <= theta0 }` are invariant under every `S_±` and `T_±`
//! respectively, and both families contract with rate
//! `kappa = theta0 / (2*alpha - theta0) < 1/2`.
//!
//! Folding `T` along a forward itinerary therefore converges, like a continued
//! fraction, to the stable slope field `v(p)`; folding `S` along a chosen
//! admissible past converges to an unstable slope `u(p)`. Truncation after
//! `depth` levels is accurate to `kappa^depth` times the cone width, for any
//! seed inside the cone (we seed with 0, the cone center).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{self, BranchId, MapParams, Past, Point2};
use crate::polygon;

/// Closed-form constants of the cone geometry at a given `alpha`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeConstants {
    pub alpha: f64,
    /// Half-width of the stable slope cone `J_-`.
    pub theta0: f64,
    /// Post-image floor: `|S(u)| >= theta1` on `J_+`; equals `1/(2*alpha + theta0)`.
    pub theta1: f64,
    /// Contraction rate of `S` and `T` on their cones.
    pub kappa: f64,
    /// `theta0 / (2(1-alpha))`: half-width of `J_+` and the per-step
    /// backward contraction bound along unstable directions.
    pub lambda_plus: f64,
    /// Per-step stable contraction bound; equals `theta0`.
    pub lambda_minus: f64,
    /// Absolute Jacobian determinant `2(1-alpha)`.
    pub jac: f64,
}

impl ConeConstants {
    /// Half-width of `J_+` in the slope parameter `u`.
    pub fn j_plus_halfwidth(&self) -> f64 {
        self.lambda_plus
    }

    /// Half-width of `J_-` in the slope `v`.
    pub fn j_minus_halfwidth(&self) -> f64 {
        self.theta0
    }

    pub fn in_j_plus(&self, u: f64, tol: f64) -> bool {
        (2.0 * u * (1.0 - self.alpha)).abs() <= self.theta0 + tol
    }

    pub fn in_j_minus(&self, v: f64, tol: f64) -> bool {
        v.abs() <= self.theta0 + tol
    }

    /// `max h1 / min h1` over `J_-` with `h1(v) = 1/sqrt(1+v^2)`: the
    /// distortion prefactor in the stable rate bound
    /// `lambda^s_n <= C * lambda_minus^n`. Equals `sqrt(1 + theta0^2)`.
    pub fn h1_distortion(&self) -> f64 {
        (1.0 + self.theta0 * self.theta0).sqrt()
    }

    /// `max h2 / min h2` over `J_+` with `h2(u) = 1/sqrt(1+u^2)`; the same
    /// prefactor for unstable rates. Equals `sqrt(1 + lambda_plus^2)`.
    pub fn h2_distortion(&self) -> f64 {
        (1.0 + self.lambda_plus * self.lambda_plus).sqrt()
    }
}

/// Evaluates the closed forms. Requires a positive discriminant
/// `alpha^2 + 2*alpha - 2`, i.e. `alpha > sqrt(3) - 1`; the quantitative
/// hyperbolic bounds (`kappa < 1/2`, `lambda_plus < 1`) additionally need
/// strict-mode parameters.
pub fn cone_constants(params: &MapParams) -> Result<ConeConstants> {
    let a = params.alpha();
    let disc = a * a + 2.0 * a - 2.0;
    if disc <= 0.0 {
        return Err(Error::NonpositiveDiscriminant(a));
    }
    let root = disc.sqrt();
    let theta0 = a - root;
    Ok(ConeConstants {
        alpha: a,
        theta0,
        theta1: 1.0 / (2.0 * a + theta0),
        kappa: theta0 / (a + root),
        lambda_plus: theta0 / (2.0 * (1.0 - a)),
        lambda_minus: theta0,
        jac: params.jac(),
    })
}

/// Branch sign in the direction transforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl From<BranchId> for Sign {
    fn from(b: BranchId) -> Self {
        match b {
            BranchId::B1 => Sign::Plus,
            BranchId::B2 => Sign::Minus,
        }
    }
}

/// Slope `v` of a stable direction vector `(1, v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeV(pub f64);

impl SlopeV {
    /// Unit vector `(1, v)/|(1, v)|`.
    pub fn unit_vector(self) -> [f64; 2] {
        let n = 1.0_f64.hypot(self.0);
        [1.0 / n, self.0 / n]
    }
}

/// Slope parameter `u` of an unstable direction vector `(u, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeU(pub f64);

impl SlopeU {
    /// Unit vector `(u, 1)/|(u, 1)|`.
    pub fn unit_vector(self) -> [f64; 2] {
        let n = self.0.hypot(1.0);
        [self.0 / n, 1.0 / n]
    }
}

/// `S_sign(u)`: slope map on unstable directions.
pub fn apply_s(sign: Sign, u: f64, params: &MapParams) -> Result<f64> {
    let denom = sign.factor() * (2.0 * u * (1.0 - params.alpha()) + 2.0 * params.alpha());
    if denom.abs() < 1e-14 {
        return Err(Error::DirectionSingularity(denom));
    }
    Ok(1.0 / denom)
}

/// `T_sign(v)`: slope map on stable directions.
pub fn apply_t(sign: Sign, v: f64, params: &MapParams) -> Result<f64> {
    let denom = -2.0 * params.alpha() + sign.factor() * v;
    if denom.abs() < 1e-14 {
        return Err(Error::DirectionSingularity(denom));
    }
    Ok(params.jac() / denom)
}

/// `|S'| = 2(1-alpha) S^2`.
pub fn s_derivative_abs(sign: Sign, u: f64, params: &MapParams) -> Result<f64> {
    let s = apply_s(sign, u, params)?;
    Ok(params.jac() * s * s)
}

/// `|T'| = T^2 / (2(1-alpha))`.
pub fn t_derivative_abs(sign: Sign, v: f64, params: &MapParams) -> Result<f64> {
    let t = apply_t(sign, v, params)?;
    Ok(t * t / params.jac())
}

/// Folds `T` innermost-out over an explicit symbol window, seed 0.
pub fn stable_slope_from_symbols(symbols: &[BranchId], params: &MapParams) -> Result<f64> {
    let mut v = 0.0;
    for &b in symbols.iter().rev() {
        v = apply_t(b.into(), v, params)?;
    }
    Ok(v)
}

/// Stable direction slope at `p`: computes the forward itinerary to `depth`
/// symbols and folds `T` along it. Returns the slope and the truncation
/// bound `kappa^depth * 2*theta0`.
///
/// Orbits that hit the cut line exactly have ambiguous itineraries; the
/// tie-break takes branch 1 there, so the returned slope is one of the two
/// one-sided limits of the direction field.
pub fn stable_direction(p: Point2, depth: usize, params: &MapParams) -> Result<(SlopeV, f64)> {
    params.require_strict()?;
    let c = cone_constants(params)?;
    let it = map::itinerary(p, depth, params);
    let v = stable_slope_from_symbols(it.symbols(), params)?;
    Ok((SlopeV(v), c.kappa.powi(depth as i32) * 2.0 * c.theta0))
}

/// Unstable direction slope for the `depth` most recent branches of an
/// admissible past, by folding `S` innermost-out with seed 0. The truncation
/// bound is `kappa^depth * theta0/(1-alpha)` (the width of `J_+`).
///
/// Admissibility of the past prefix is verified first (exact-arithmetic
/// pullback, cost roughly quadratic in `depth`). For pasts recorded from an
/// actual orbit that check is redundant; bulk samplers can use
/// [`unstable_direction_unchecked`].
pub fn unstable_direction(past: &Past, depth: usize, params: &MapParams) -> Result<(SlopeU, f64)> {
    if depth > past.len() {
        return Err(Error::DepthExceedsPast {
            depth,
            len: past.len(),
        });
    }
    polygon::check_admissible(&past.0[..depth], params)?;
    unstable_direction_unchecked(past, depth, params)
}

/// [`unstable_direction`] without the admissibility check; callers must know
/// the past is realizable (e.g. recorded while generating an orbit).
pub fn unstable_direction_unchecked(
    past: &Past,
    depth: usize,
    params: &MapParams,
) -> Result<(SlopeU, f64)> {
    params.require_strict()?;
    if depth > past.len() {
        return Err(Error::DepthExceedsPast {
            depth,
            len: past.len(),
        });
    }
    let c = cone_constants(params)?;
    let mut u = 0.0;
    for &b in past.0[..depth].iter().rev() {
        u = apply_s(b.into(), u, params)?;
    }
    Ok((
        SlopeU(u),
        c.kappa.powi(depth as i32) * c.theta0 / (1.0 - params.alpha()),
    ))
}

/// Stable stretch data over `n` steps.
#[derive(Clone, Debug)]
pub struct StretchRates {
    /// `lambda^s_n(p)`: length contraction of stable vectors over `n` steps,
    /// `|v(p)| ... |v(G^{n-1}p)| * h1(p)/h1(G^n p)` with `h1 = 1/sqrt(1+v^2)`.
    pub lambda_s_n: f64,
    /// Depth-truncated stable slopes `v(G^k p)` for `k = 0..=n`.
    pub directions: Vec<SlopeV>,
}

fn h1(v: f64) -> f64 {
    1.0 / (1.0 + v * v).sqrt()
}

/// Slopes along the orbit from one shared itinerary of length `n + depth`.
fn direction_sequence(p: Point2, depth: usize, n: usize, params: &MapParams) -> Result<Vec<SlopeV>> {
    let it = map::itinerary(p, n + depth, params);
    let mut dirs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        dirs.push(SlopeV(stable_slope_from_symbols(
            &it.symbols()[k..k + depth],
            params,
        )?));
    }
    Ok(dirs)
}

/// `lambda^s_n(p)` together with the direction sequence used to build it.
/// `depth` truncates the direction field; `kappa^depth` should be well below
/// the accuracy the caller needs (the default elsewhere is 64).
pub fn stretch_rates(p: Point2, depth: usize, n: usize, params: &MapParams) -> Result<StretchRates> {
    params.require_strict()?;
    let dirs = direction_sequence(p, depth, n, params)?;
    let mut prod = 1.0;
    for d in &dirs[..n] {
        prod *= d.0.abs();
    }
    Ok(StretchRates {
        lambda_s_n: prod * h1(dirs[0].0) / h1(dirs[n].0),
        directions: dirs,
    })
}

/// The whole sequence `lambda^s_k(p)` for `k = 0..=n` (index 0 is 1).
pub fn lambda_s_sequence(p: Point2, depth: usize, n: usize, params: &MapParams) -> Result<Vec<f64>> {
    params.require_strict()?;
    let dirs = direction_sequence(p, depth, n, params)?;
    let h0 = h1(dirs[0].0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    let mut prod = 1.0;
    for k in 1..=n {
        prod *= dirs[k - 1].0.abs();
        out.push(prod * h0 / h1(dirs[k].0));
    }
    Ok(out)
}

/// One-step factor-map weight `g_T(p) = lambda^s(p) / jac`.
pub fn g_t_value(p: Point2, depth: usize, params: &MapParams) -> Result<f64> {
    Ok(stretch_rates(p, depth, 1, params)?.lambda_s_n / params.jac())
}

/// `g_n(p) = lambda^s_n(p) / jac^n`, the n-step weight; the expansion
/// condition asks for `g_n < 1` once `n` is large enough.
pub fn g_n_value(p: Point2, depth: usize, n: usize, params: &MapParams) -> Result<f64> {
    Ok(stretch_rates(p, depth, n, params)?.lambda_s_n / params.jac().powi(n as i32))
}
