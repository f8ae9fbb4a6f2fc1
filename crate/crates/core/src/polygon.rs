//! Convex polygons under the affine branches: forward images of the square,
//! the cells of the n-step branch partition, and past admissibility.
//!
//! Every operation here reduces to two primitives: splitting a convex polygon
//! by the zero set of an affine functional, and mapping it by an affine
//! branch. Cells of the n-step partition are computed by carrying the
//! composed branch map alongside each domain polygon, so the split line for
//! `G^{-k}(L)` inside a cell is a single affine functional rather than an
//! iterated preimage.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{branch_matrices, AffineBranch, BranchId, Itinerary, MapParams};

/// Pieces with area below this are dropped as slivers.
pub const MIN_AREA: f64 = 1e-16;

/// Counterclockwise convex polygon.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    /// Callers must supply counterclockwise convex vertices.
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        debug_assert!(vertices.len() >= 3);
        let p = Self { vertices };
        debug_assert!(p.signed_area() >= -MIN_AREA);
        p
    }

    pub fn unit_square() -> Self {
        Self::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut twice = 0.0;
        for i in 0..n {
            let [x0, y0] = self.vertices[i];
            let [x1, y1] = self.vertices[(i + 1) % n];
            twice += x0 * y1 - x1 * y0;
        }
        twice / 2.0
    }

    /// Area (vertices are counterclockwise, so the signed area is nonnegative).
    pub fn area(&self) -> f64 {
        self.signed_area().max(0.0)
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vertices.len() as f64;
        let mut c = [0.0, 0.0];
        for v in &self.vertices {
            c[0] += v[0];
            c[1] += v[1];
        }
        [c[0] / n, c[1] / n]
    }

    /// True when `p` lies inside or within `tol` of the boundary.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let [x0, y0] = self.vertices[i];
            let [x1, y1] = self.vertices[(i + 1) % n];
            let cross = (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0);
            if cross < -tol * (x1 - x0).hypot(y1 - y0) {
                return false;
            }
        }
        true
    }

    /// Splits by the zero set of `f(x, y) = c[0]*x + c[1]*y + c[2]`, returning
    /// the `f <= 0` piece and the `f >= 0` piece. Slivers below [`MIN_AREA`]
    /// come back as `None`.
    pub fn split_by(&self, c: [f64; 3]) -> (Option<ConvexPolygon>, Option<ConvexPolygon>) {
        let f = |v: [f64; 2]| c[0] * v[0] + c[1] * v[1] + c[2];
        let n = self.vertices.len();
        let mut neg: Vec<[f64; 2]> = Vec::with_capacity(n + 1);
        let mut pos: Vec<[f64; 2]> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let v0 = self.vertices[i];
            let v1 = self.vertices[(i + 1) % n];
            let f0 = f(v0);
            let f1 = f(v1);
            if f0 <= 0.0 {
                neg.push(v0);
            }
            if f0 >= 0.0 {
                pos.push(v0);
            }
            if (f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0) {
                let t = f0 / (f0 - f1);
                let cut = [v0[0] + t * (v1[0] - v0[0]), v0[1] + t * (v1[1] - v0[1])];
                neg.push(cut);
                pos.push(cut);
            }
        }
        let finish = |mut vs: Vec<[f64; 2]>| -> Option<ConvexPolygon> {
            vs.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
            if vs.len() > 1 {
                let first = vs[0];
                let last = vs[vs.len() - 1];
                if (first[0] - last[0]).abs() < 1e-15 && (first[1] - last[1]).abs() < 1e-15 {
                    vs.pop();
                }
            }
            if vs.len() < 3 {
                return None;
            }
            let p = ConvexPolygon { vertices: vs };
            (p.signed_area() >= MIN_AREA).then_some(p)
        };
        (finish(neg), finish(pos))
    }

    /// Affine image; vertex order is reversed when the map flips orientation
    /// so the result stays counterclockwise.
    pub fn map_affine(&self, m: &AffineBranch) -> ConvexPolygon {
        let mut vertices: Vec<[f64; 2]> = self
            .vertices
            .iter()
            .map(|&[x, y]| {
                let (ix, iy) = m.apply_raw(x, y);
                [ix, iy]
            })
            .collect();
        if m.det() < 0.0 {
            vertices.reverse();
        }
        ConvexPolygon { vertices }
    }
}

/// A polygon labeled by the branch word that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct LabeledPolygon {
    pub word: Itinerary,
    pub polygon: ConvexPolygon,
}

/// Forward images of the unit square under `n` steps.
#[derive(Clone, Debug, Serialize)]
pub struct ForwardImages {
    pub pieces: Vec<LabeledPolygon>,
    /// Sum of piece areas, counting overlaps with multiplicity; each step
    /// scales it by `jac`, so it equals `jac^n` exactly up to rounding.
    pub total_area: f64,
    /// Slivers dropped during splitting.
    pub dropped: usize,
}

/// Splits every current piece along the cut line and maps each part by its
/// branch, `n` times, starting from the unit square.
///
/// Pieces are tracked as domain cells with their composed map, because image
/// pieces thin out exponentially and summing their shoelace areas directly
/// loses all precision. The total area instead factors exactly as
/// `jac^n * (sum of domain cell areas)`, whose geometric part stays
/// well-conditioned; the emitted image polygons are the mapped cells.
pub fn forward_image_polygons(n: usize, params: &MapParams) -> ForwardImages {
    let maps = branch_matrices(params);
    let a = params.alpha();
    let mut cells = vec![(
        ConvexPolygon::unit_square(),
        AffineBranch::identity(),
        Itinerary::default(),
    )];
    let mut dropped = 0usize;
    for _ in 0..n {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (poly, m, word) in &cells {
            let f = [
                (1.0 - a) * m.linear[0][0] + a * m.linear[1][0],
                (1.0 - a) * m.linear[0][1] + a * m.linear[1][1],
                (1.0 - a) * m.offset[0] + a * m.offset[1] - 0.5,
            ];
            let (below, above) = poly.split_by(f);
            let mut emitted = 0;
            for (piece, branch) in [(below, BranchId::B1), (above, BranchId::B2)] {
                if let Some(cell) = piece {
                    let mut w = word.clone();
                    w.0.push(branch);
                    next.push((cell, maps.forward(branch).compose(m), w));
                    emitted += 1;
                }
            }
            if emitted == 0 {
                dropped += 1;
            }
        }
        cells = next;
    }
    let domain_area: f64 = cells.iter().map(|(poly, _, _)| poly.area()).sum();
    let total_area = params.jac().powi(n as i32) * domain_area;
    let pieces = cells
        .into_iter()
        .map(|(poly, m, word)| LabeledPolygon {
            word,
            polygon: poly.map_affine(&m),
        })
        .collect();
    ForwardImages {
        pieces,
        total_area,
        dropped,
    }
}

/// Cells of the n-step branch partition: the maximal convex polygons on which
/// all of the first `n` branch choices are constant. They tile the square.
pub fn partition_polygons(n: usize, params: &MapParams) -> Vec<LabeledPolygon> {
    let maps = branch_matrices(params);
    let a = params.alpha();
    // (domain cell, composed forward map on it, word)
    let mut cells = vec![(
        ConvexPolygon::unit_square(),
        AffineBranch::identity(),
        Itinerary::default(),
    )];
    for _ in 0..n {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (poly, m, word) in &cells {
            // w(M q) - 1/2 as an affine functional of q
            let f = [
                (1.0 - a) * m.linear[0][0] + a * m.linear[1][0],
                (1.0 - a) * m.linear[0][1] + a * m.linear[1][1],
                (1.0 - a) * m.offset[0] + a * m.offset[1] - 0.5,
            ];
            let (below, above) = poly.split_by(f);
            for (piece, branch) in [(below, BranchId::B1), (above, BranchId::B2)] {
                if let Some(cell) = piece {
                    let mut w = word.clone();
                    w.0.push(branch);
                    next.push((cell, maps.forward(branch).compose(m), w));
                }
            }
        }
        cells = next;
    }
    cells
        .into_iter()
        .map(|(polygon, _, word)| LabeledPolygon { word, polygon })
        .collect()
}

/// Checks that a backward branch word is realizable: the set of points whose
/// `len` most recent branches match the prefix must be nonempty. Pulls the
/// square back through the branches from the deep end; emptiness of the full
/// pullback pins down the shortest inadmissible prefix.
pub fn check_admissible(past_prefix: &[BranchId], params: &MapParams) -> Result<()> {
    if past_admissible(past_prefix, params) {
        return Ok(());
    }
    for m in 1..=past_prefix.len() {
        if !past_admissible(&past_prefix[..m], params) {
            return Err(Error::InadmissiblePast(m));
        }
    }
    unreachable!("full pullback empty but every prefix nonempty");
}

/// Nonemptiness of `S_0` under the fold `S_i = G_{k_i}(S_{i+1} ∩ A_{k_i})`
/// from the deep end of the history, decided in exact rational arithmetic.
///
/// Floating point cannot decide this: the constraint set thins exponentially
/// along the stable direction, and any float representation accumulates
/// positional error amplified by the unstable multiplier per step, drowning
/// the set near depth 60. Every branch coefficient is a dyadic rational, so
/// the whole pullback is carried out over `BigRational` instead; emptiness
/// means exact area zero (pasts realized only on null sets count as
/// inadmissible). Cost grows roughly quadratically with depth and is a few
/// milliseconds at the default direction depth.
fn past_admissible(history: &[BranchId], params: &MapParams) -> bool {
    exact::pullback_nonempty(history, params.alpha())
}

mod exact {
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};

    use crate::map::BranchId;

    type Q = BigRational;

    fn q(x: f64) -> Q {
        BigRational::from_float(x).expect("finite float")
    }

    /// Counterclockwise convex polygon with exact vertices.
    struct QPoly {
        verts: Vec<[Q; 2]>,
    }

    impl QPoly {
        fn unit_square() -> Self {
            let (z, o) = (q(0.0), q(1.0));
            Self {
                verts: vec![
                    [z.clone(), z.clone()],
                    [o.clone(), z.clone()],
                    [o.clone(), o.clone()],
                    [z, o],
                ],
            }
        }

        fn twice_signed_area(&self) -> Q {
            let n = self.verts.len();
            let mut acc = q(0.0);
            for i in 0..n {
                let p = &self.verts[i];
                let r = &self.verts[(i + 1) % n];
                acc += &p[0] * &r[1] - &r[0] * &p[1];
            }
            acc
        }

        fn has_interior(&self) -> bool {
            self.verts.len() >= 3 && !self.twice_signed_area().is_zero()
        }

        /// Keeps the `f <= 0` or `f >= 0` side of `f = c0*x + c1*y + c2`.
        fn clip(&self, c: &[Q; 3], keep_nonpositive: bool) -> QPoly {
            let eval = |v: &[Q; 2]| -> Q { &c[0] * &v[0] + &c[1] * &v[1] + &c[2] };
            let keep = |f: &Q| -> bool {
                if keep_nonpositive {
                    !f.is_positive()
                } else {
                    !f.is_negative()
                }
            };
            let n = self.verts.len();
            let mut out: Vec<[Q; 2]> = Vec::with_capacity(n + 1);
            for i in 0..n {
                let v0 = &self.verts[i];
                let v1 = &self.verts[(i + 1) % n];
                let f0 = eval(v0);
                let f1 = eval(v1);
                if keep(&f0) && out.last() != Some(v0) {
                    out.push(v0.clone());
                }
                if (f0.is_negative() && f1.is_positive())
                    || (f0.is_positive() && f1.is_negative())
                {
                    let t = &f0 / (&f0 - &f1);
                    let cut = [
                        &v0[0] + &t * (&v1[0] - &v0[0]),
                        &v0[1] + &t * (&v1[1] - &v0[1]),
                    ];
                    if out.last() != Some(&cut) {
                        out.push(cut);
                    }
                }
            }
            if out.len() > 1 && out.first() == out.last() {
                out.pop();
            }
            QPoly { verts: out }
        }

        fn map(&self, lin: &[[Q; 2]; 2], off: &[Q; 2]) -> QPoly {
            let mut verts: Vec<[Q; 2]> = self
                .verts
                .iter()
                .map(|v| {
                    [
                        &lin[0][0] * &v[0] + &lin[0][1] * &v[1] + &off[0],
                        &lin[1][0] * &v[0] + &lin[1][1] * &v[1] + &off[1],
                    ]
                })
                .collect();
            let det = &lin[0][0] * &lin[1][1] - &lin[0][1] * &lin[1][0];
            if det.is_negative() {
                verts.reverse();
            }
            QPoly { verts }
        }
    }

    pub(super) fn pullback_nonempty(history: &[BranchId], alpha: f64) -> bool {
        let a = q(alpha);
        let one = q(1.0);
        let two = q(2.0);
        let half = q(0.5);
        let jac = &two * (&one - &a);
        let a1_lin = [
            [q(0.0), one.clone()],
            [jac.clone(), &two * &a],
        ];
        let a1_off = [q(0.0), q(0.0)];
        let a2_lin = [
            [q(0.0), one.clone()],
            [-jac.clone(), -(&two * &a)],
        ];
        let a2_off = [q(0.0), two.clone()];
        let cut = [&one - &a, a.clone(), -half];

        let mut set = QPoly::unit_square();
        for &b in history.iter().rev() {
            let clipped = set.clip(&cut, b == BranchId::B1);
            if !clipped.has_interior() {
                return false;
            }
            set = match b {
                BranchId::B1 => clipped.map(&a1_lin, &a1_off),
                BranchId::B2 => clipped.map(&a2_lin, &a2_off),
            };
        }
        true
    }
}
