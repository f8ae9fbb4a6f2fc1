//! The map, its branches, orbits and itineraries.
//!
//! `G(x, y) = (y, tent(w))` with `w = alpha*y + (1-alpha)*x`. The unit square
//! splits along the cut line `L = { w = 1/2 }` into the region `A1` (below,
//! `w <= 1/2`) where `G` acts as `(x, y) -> (y, 2w)` and the region `A2`
//! (above) where it acts as `(x, y) -> (y, 2 - 2w)`. Both branches are affine
//! with Jacobian determinant of absolute value `2(1-alpha)`, and they agree on
//! `L` itself (second coordinate 1), so the tie-break there only fixes the
//! recorded symbol.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Coordinates may overshoot `[0, 1]` by at most this much before they are
/// rejected; smaller overshoots are clamped away after every step.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Symmetric tent map `x -> 1 - 2|x - 1/2|` on `[0, 1]`.
pub fn tent(x: f64) -> Result<f64> {
    if !(-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&x) {
        return Err(Error::ValueOutOfDomain(x));
    }
    let x = x.clamp(0.0, 1.0);
    Ok(1.0 - 2.0 * (x - 0.5).abs())
}

/// Map parameters. `strict` marks the hyperbolic regime `alpha in (3/4, 1)`
/// required by the cone geometry; permissive parameters (any `alpha` in
/// `(0, 1)`) exist for the non-hyperbolic regression regimes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MapParams {
    alpha: f64,
    strict: bool,
    jac: f64,
}

impl MapParams {
    /// Permissive construction: any `alpha` in `(0, 1)`.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(Self {
            alpha,
            strict: false,
            jac: 2.0 * (1.0 - alpha),
        })
    }

    /// Strict construction: requires `alpha` in `(3/4, 1)`.
    pub fn strict(alpha: f64) -> Result<Self> {
        if !(alpha > 0.75 && alpha < 1.0) {
            return Err(Error::OutsideStrictRegime(alpha));
        }
        let mut params = Self::new(alpha)?;
        params.strict = true;
        Ok(params)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Absolute Jacobian determinant of both branches, `2(1-alpha)`.
    pub fn jac(&self) -> f64 {
        self.jac
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub(crate) fn require_strict(&self) -> Result<()> {
        if self.strict {
            Ok(())
        } else {
            Err(Error::OutsideStrictRegime(self.alpha))
        }
    }
}

/// A point of the closed unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    /// Accepts coordinates within [`DOMAIN_TOL`] of `[0, 1]` and clamps them in.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let ok = |c: f64| (-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&c);
        if !ok(x) || !ok(y) {
            return Err(Error::PointOutOfDomain(x, y));
        }
        Ok(Self::clamped(x, y))
    }

    pub(crate) fn clamped(x: f64, y: f64) -> Self {
        Self {
            x: x.clamp(0.0, 1.0),
            y: y.clamp(0.0, 1.0),
        }
    }
}

/// The two affine branches: `B1` acts on `A1` (`w <= 1/2`, including the cut
/// line by our tie-break), `B2` on `A2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchId {
    B1,
    B2,
}

impl BranchId {
    pub fn symbol(self) -> u8 {
        match self {
            BranchId::B1 => 1,
            BranchId::B2 => 2,
        }
    }

    pub fn from_symbol(s: u8) -> Option<Self> {
        match s {
            1 => Some(BranchId::B1),
            2 => Some(BranchId::B2),
            _ => None,
        }
    }

    /// Sign carried into the direction transforms: branch 1 -> `+1`, branch 2 -> `-1`.
    pub fn sign(self) -> f64 {
        match self {
            BranchId::B1 => 1.0,
            BranchId::B2 => -1.0,
        }
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Forward branch symbols of an orbit, index 0 first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Itinerary(pub Vec<BranchId>);

impl Itinerary {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[BranchId] {
        &self.0
    }

    /// The itinerary as a word over `{1, 2}`, e.g. `"1221"`.
    pub fn word(&self) -> String {
        self.0.iter().map(|b| char::from(b'0' + b.symbol())).collect()
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word())
    }
}

impl Serialize for Itinerary {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.word())
    }
}

/// A backward branch history: index 0 is the branch through which the point
/// was most recently reached. Every point has at least one admissible past;
/// unstable directions depend on which one is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Past(pub Vec<BranchId>);

impl Past {
    /// The realized history of an orbit endpoint: reverses the recorded
    /// forward symbols so that index 0 is the most recent branch.
    pub fn from_orbit_symbols(symbols: &[BranchId]) -> Self {
        Past(symbols.iter().rev().copied().collect())
    }

    pub fn constant(branch: BranchId, len: usize) -> Self {
        Past(vec![branch; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The argument of the tent map: `w = alpha*y + (1-alpha)*x`.
pub fn weighted_coordinate(p: Point2, params: &MapParams) -> f64 {
    params.alpha() * p.y + (1.0 - params.alpha()) * p.x
}

/// Which branch acts at `p`; points on the cut line get branch 1.
pub fn region_of(p: Point2, params: &MapParams) -> BranchId {
    if weighted_coordinate(p, params) <= 0.5 {
        BranchId::B1
    } else {
        BranchId::B2
    }
}

/// Euclidean distance from `p` to the cut line `{ w = 1/2 }`.
pub fn distance_to_cut(p: Point2, params: &MapParams) -> f64 {
    let a = params.alpha();
    (weighted_coordinate(p, params) - 0.5).abs() / (1.0 - a).hypot(a)
}

/// One application of the map, together with the branch it used.
pub fn step(p: Point2, params: &MapParams) -> (Point2, BranchId) {
    let w = weighted_coordinate(p, params);
    if w <= 0.5 {
        (Point2::clamped(p.y, 2.0 * w), BranchId::B1)
    } else {
        (Point2::clamped(p.y, 2.0 - 2.0 * w), BranchId::B2)
    }
}

/// First `n` steps of the orbit of `p0`: element `k` holds the point after
/// `k + 1` steps and the branch taken at step `k`.
pub fn orbit(p0: Point2, n: usize, params: &MapParams) -> Vec<(Point2, BranchId)> {
    let mut out = Vec::with_capacity(n);
    orbit_for_each(p0, n, params, |_, p, b| out.push((p, b)));
    out
}

/// Streaming variant of [`orbit`] for long runs; keeps memory O(1).
/// `visit(k, point_after_step_k, branch_at_step_k)`.
pub fn orbit_for_each(
    p0: Point2,
    n: usize,
    params: &MapParams,
    mut visit: impl FnMut(usize, Point2, BranchId),
) {
    let mut p = p0;
    for k in 0..n {
        let (q, b) = step(p, params);
        visit(k, q, b);
        p = q;
    }
}

/// Branch symbols of `p0, G(p0), ..., G^{n-1}(p0)`.
pub fn itinerary(p0: Point2, n: usize, params: &MapParams) -> Itinerary {
    let mut symbols = Vec::with_capacity(n);
    let mut p = p0;
    for _ in 0..n {
        let (q, b) = step(p, params);
        symbols.push(b);
        p = q;
    }
    Itinerary(symbols)
}

/// An affine map `q -> linear*q + offset`.
#[derive(Clone, Copy, Debug)]
pub struct AffineBranch {
    pub linear: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl AffineBranch {
    pub fn identity() -> Self {
        Self {
            linear: [[1.0, 0.0], [0.0, 1.0]],
            offset: [0.0, 0.0],
        }
    }

    pub fn apply_raw(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.linear[0][0] * x + self.linear[0][1] * y + self.offset[0],
            self.linear[1][0] * x + self.linear[1][1] * y + self.offset[1],
        )
    }

    pub fn apply(&self, p: Point2) -> (f64, f64) {
        self.apply_raw(p.x, p.y)
    }

    pub fn apply_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.linear[0][0] * v[0] + self.linear[0][1] * v[1],
            self.linear[1][0] * v[0] + self.linear[1][1] * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.linear[0][0] * self.linear[1][1] - self.linear[0][1] * self.linear[1][0]
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &AffineBranch) -> AffineBranch {
        let m = &self.linear;
        let n = &inner.linear;
        let (ox, oy) = self.apply_raw(inner.offset[0], inner.offset[1]);
        AffineBranch {
            linear: [
                [
                    m[0][0] * n[0][0] + m[0][1] * n[1][0],
                    m[0][0] * n[0][1] + m[0][1] * n[1][1],
                ],
                [
                    m[1][0] * n[0][0] + m[1][1] * n[1][0],
                    m[1][0] * n[0][1] + m[1][1] * n[1][1],
                ],
            ],
            offset: [ox, oy],
        }
    }
}

/// The four affine branches: forward `a1`/`a2` and the matching inverses
/// `b1`/`b2`, all with their offsets.
#[derive(Clone, Copy, Debug)]
pub struct BranchMaps {
    pub a1: AffineBranch,
    pub a2: AffineBranch,
    pub b1: AffineBranch,
    pub b2: AffineBranch,
}

impl BranchMaps {
    pub fn forward(&self, b: BranchId) -> &AffineBranch {
        match b {
            BranchId::B1 => &self.a1,
            BranchId::B2 => &self.a2,
        }
    }

    pub fn inverse(&self, b: BranchId) -> &AffineBranch {
        match b {
            BranchId::B1 => &self.b1,
            BranchId::B2 => &self.b2,
        }
    }
}

/// Forward linear parts are `[[0, 1], [±2(1-alpha), ±2*alpha]]` with offsets
/// `(0, 0)` and `(0, 2)`; the inverses follow by solving each branch for the
/// preimage.
pub fn branch_matrices(params: &MapParams) -> BranchMaps {
    let a = params.alpha();
    let j = params.jac();
    BranchMaps {
        a1: AffineBranch {
            linear: [[0.0, 1.0], [j, 2.0 * a]],
            offset: [0.0, 0.0],
        },
        a2: AffineBranch {
            linear: [[0.0, 1.0], [-j, -2.0 * a]],
            offset: [0.0, 2.0],
        },
        b1: AffineBranch {
            linear: [[-a / (1.0 - a), 1.0 / j], [1.0, 0.0]],
            offset: [0.0, 0.0],
        },
        b2: AffineBranch {
            linear: [[-a / (1.0 - a), -1.0 / j], [1.0, 0.0]],
            offset: [1.0 / (1.0 - a), 0.0],
        },
    }
}

/// Applies the inverse of branch `b`; `None` when the affine preimage leaves
/// the square by more than [`DOMAIN_TOL`], i.e. `p` has no preimage through
/// that branch.
pub fn inverse_branch(b: BranchId, p: Point2, params: &MapParams) -> Option<Point2> {
    let maps = branch_matrices(params);
    let (x, y) = maps.inverse(b).apply(p);
    Point2::new(x, y).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(alpha: f64) -> MapParams {
        MapParams::new(alpha).unwrap()
    }

    fn pt(x: f64, y: f64) -> Point2 {
        Point2::new(x, y).unwrap()
    }

    #[test]
    fn tent_endpoints_and_peak() {
        assert_eq!(tent(0.0).unwrap(), 0.0);
        assert_eq!(tent(1.0).unwrap(), 0.0);
        assert_eq!(tent(0.5).unwrap(), 1.0);
        assert!((tent(0.3).unwrap() - 0.6).abs() < 1e-15);
        assert!(tent(1.5).is_err());
        assert!(tent(-0.1).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MapParams::new(0.0).is_err());
        assert!(MapParams::new(1.0).is_err());
        assert!(MapParams::strict(0.75).is_err());
        assert!(MapParams::strict(1.0).is_err());
        let p = MapParams::strict(0.82).unwrap();
        assert!(p.is_strict());
        assert!((p.jac() - 0.36).abs() < 1e-15);
    }

    #[test]
    fn weighted_coordinate_examples() {
        let p = params(0.82);
        assert!((weighted_coordinate(pt(0.1, 0.2), &p) - 0.182).abs() < 1e-15);
        assert!((weighted_coordinate(pt(0.5, 0.8), &p) - 0.746).abs() < 1e-15);
        // convex combination of equal values
        for &(a, t) in &[(0.3, 0.7), (0.82, 0.137), (0.99, 0.5)] {
            assert!((weighted_coordinate(pt(t, t), &params(a)) - t).abs() < 1e-15);
        }
    }

    #[test]
    fn region_examples() {
        let p = params(0.82);
        assert_eq!(region_of(pt(0.1, 0.2), &p), BranchId::B1);
        assert_eq!(region_of(pt(2.0 / 3.0, 2.0 / 3.0), &p), BranchId::B2);
        // on the cut line the tie-break gives branch 1
        let x = 0.3;
        let y = (0.5 - 0.18 * x) / 0.82;
        assert_eq!(region_of(pt(x, y), &p), BranchId::B1);
    }

    #[test]
    fn step_examples() {
        let p = params(0.82);
        let (q, b) = step(pt(0.1, 0.2), &p);
        assert_eq!(b, BranchId::B1);
        assert!((q.x - 0.2).abs() < 1e-15 && (q.y - 0.364).abs() < 1e-15);

        let (q, b) = step(pt(0.5, 0.8), &p);
        assert_eq!(b, BranchId::B2);
        assert!((q.x - 0.8).abs() < 1e-15 && (q.y - 0.508).abs() < 1e-15);

        // fixed point
        let fp = pt(2.0 / 3.0, 2.0 / 3.0);
        let (q, b) = step(fp, &p);
        assert_eq!(b, BranchId::B2);
        assert!((q.x - fp.x).abs() < 1e-14 && (q.y - fp.y).abs() < 1e-14);
    }

    #[test]
    fn orbit_examples() {
        let p = params(0.82);
        assert!(orbit(pt(0.5, 0.5), 0, &p).is_empty());

        let fp = pt(2.0 / 3.0, 2.0 / 3.0);
        for (q, b) in orbit(fp, 5, &p) {
            assert_eq!(b, BranchId::B2);
            assert!((q.x - fp.x).abs() < 1e-13 && (q.y - fp.y).abs() < 1e-13);
        }

        let o = orbit(pt(0.1, 0.2), 2, &p);
        assert_eq!(o[0].1, BranchId::B1);
        assert!((o[0].0.x - 0.2).abs() < 1e-15 && (o[0].0.y - 0.364).abs() < 1e-15);
        let (q1, b1) = step(o[0].0, &p);
        assert_eq!(o[1].1, b1);
        assert_eq!(o[1].0, q1);
    }

    #[test]
    fn orbit_streaming_matches_collected() {
        let p = params(0.82);
        let collected = orbit(pt(0.31, 0.77), 50, &p);
        let mut k_seen = 0;
        orbit_for_each(pt(0.31, 0.77), 50, &p, |k, q, b| {
            assert_eq!(collected[k], (q, b));
            k_seen += 1;
        });
        assert_eq!(k_seen, 50);
    }

    #[test]
    fn branch_matrix_values() {
        let p = params(0.82);
        let m = branch_matrices(&p);
        let expect = [[0.0, 1.0], [0.36, 1.64]];
        for (row, erow) in m.a1.linear.iter().zip(&expect) {
            for (v, e) in row.iter().zip(erow) {
                assert!((v - e).abs() < 1e-15);
            }
        }
        assert!((m.a1.det() + 0.36).abs() < 1e-15);
        assert!((m.a2.det() - 0.36).abs() < 1e-15);
        // a2 ∘ b2 is the identity on the image of A2
        for &(x, y) in &[(0.9, 0.9), (0.7, 0.6), (0.5, 0.52)] {
            let q = pt(x, y);
            if region_of(q, &p) != BranchId::B2 {
                continue;
            }
            let (img, _) = step(q, &p);
            let (ix, iy) = m.a2.compose(&m.b2).apply(img);
            assert!((ix - img.x).abs() < 1e-12 && (iy - img.y).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_branch_examples() {
        let p = params(0.82);
        let q = inverse_branch(BranchId::B1, pt(0.2, 0.364), &p).unwrap();
        assert!((q.x - 0.1).abs() < 1e-12 && (q.y - 0.2).abs() < 1e-12);
        // (0,0) has no preimage through branch 2: the affine preimage lands at
        // x = 1/(1-alpha) > 1
        assert!(inverse_branch(BranchId::B2, pt(0.0, 0.0), &p).is_none());
    }

    #[test]
    fn continuity_across_cut_line() {
        // both branch formulas give second coordinate 1 on the cut line
        let p = params(0.82);
        for i in 0..10_000 {
            let x = i as f64 / 9_999.0;
            let y = (0.5 - 0.18 * x) / 0.82;
            if !(0.0..=1.0).contains(&y) {
                continue;
            }
            let q = pt(x, y);
            let w = weighted_coordinate(q, &p);
            assert!((2.0 * w - (2.0 - 2.0 * w)).abs() < 1e-12);
            let (img, _) = step(q, &p);
            assert!((img.y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn past_from_orbit_symbols_reverses() {
        let syms = [BranchId::B1, BranchId::B2, BranchId::B2];
        let past = Past::from_orbit_symbols(&syms);
        assert_eq!(past.0, vec![BranchId::B2, BranchId::B2, BranchId::B1]);
    }

    #[test]
    fn itinerary_word() {
        let p = params(0.82);
        let it = itinerary(pt(0.1, 0.2), 3, &p);
        assert_eq!(it.len(), 3);
        assert_eq!(it.word().chars().next(), Some('1'));
    }

    proptest! {
        #[test]
        fn step_stays_in_square(x in 0.0f64..=1.0, y in 0.0f64..=1.0, a in 0.1f64..0.95) {
            let p = params(a);
            let (q, _) = step(pt(x, y), &p);
            prop_assert!((0.0..=1.0).contains(&q.x) && (0.0..=1.0).contains(&q.y));
        }

        #[test]
        fn forward_then_inverse_roundtrip(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            let p = params(0.82);
            let q = pt(x, y);
            let (img, b) = step(q, &p);
            let back = inverse_branch(b, img, &p).expect("image must have a preimage");
            prop_assert!((back.x - q.x).abs() < 1e-10 && (back.y - q.y).abs() < 1e-10);
        }

        #[test]
        fn forward_det_is_jac(a in 0.05f64..0.95) {
            let p = params(a);
            let m = branch_matrices(&p);
            prop_assert!((m.a1.det().abs() - p.jac()).abs() < 1e-15);
            prop_assert!((m.a2.det().abs() - p.jac()).abs() < 1e-15);
        }
    }
}
