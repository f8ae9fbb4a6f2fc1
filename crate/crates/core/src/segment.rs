//! Straight segments and their exact refinement under iteration.
//!
//! The map is affine on each side of the cut line, so on a segment the n-step
//! composition is affine between crossing parameters. Refinement tracks the
//! affine parameterization of the image (base point plus parameter
//! derivative) instead of re-iterating endpoints, which keeps every cell an
//! exact sub-interval of the original segment and the image an exact segment.

use serde::Serialize;

use crate::cone::cone_constants;
use crate::error::{Error, Result};
use crate::map::{branch_matrices, BranchId, Itinerary, MapParams, Point2};

/// Pieces whose parameter length falls below this are merged into a neighbor
/// rather than split off.
pub const CUT_TOL: f64 = 1e-13;

/// A straight segment `base + t * dir` for `t` in `[t0, t1]`, with `dir` a
/// unit vector so the parameter is arclength.
#[derive(Clone, Copy, Debug)]
pub struct DirectedSegment {
    base: Point2,
    dir: [f64; 2],
    t0: f64,
    t1: f64,
}

impl DirectedSegment {
    pub fn new(base: Point2, dir: [f64; 2], t0: f64, t1: f64) -> Result<Self> {
        let norm = dir[0].hypot(dir[1]);
        if norm == 0.0 || t1 < t0 {
            return Err(Error::DegenerateSegment(t1 - t0));
        }
        Ok(Self {
            base,
            dir: [dir[0] / norm, dir[1] / norm],
            t0,
            t1,
        })
    }

    pub fn from_endpoints(a: Point2, b: Point2) -> Result<Self> {
        let dir = [b.x - a.x, b.y - a.y];
        let len = dir[0].hypot(dir[1]);
        Self::new(a, dir, 0.0, len)
    }

    /// The vertical segment `x = const`, `y` from `y0` to `y1`; vertical is
    /// the center of the unstable cone.
    pub fn vertical(x: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::from_endpoints(Point2::new(x, y0)?, Point2::new(x, y1)?)
    }

    pub fn base(&self) -> Point2 {
        self.base
    }

    pub fn dir(&self) -> [f64; 2] {
        self.dir
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn point_at(&self, t: f64) -> (f64, f64) {
        (self.base.x + t * self.dir[0], self.base.y + t * self.dir[1])
    }

    /// Slope parameter `u` with `dir` parallel to `(u, 1)`, when defined.
    pub fn slope_u(&self) -> Option<f64> {
        (self.dir[1].abs() > 1e-15).then(|| self.dir[0] / self.dir[1])
    }

    /// Slope `v` with `dir` parallel to `(1, v)`, when defined.
    pub fn slope_v(&self) -> Option<f64> {
        (self.dir[0].abs() > 1e-15).then(|| self.dir[1] / self.dir[0])
    }
}

/// One cell of the refinement of a segment under `n` steps: the parameter
/// sub-interval on which all `n` branch choices are constant, with the exact
/// affine image.
#[derive(Clone, Debug, Serialize)]
pub struct RefinedCell {
    pub t0: f64,
    pub t1: f64,
    pub word: Itinerary,
    /// Image of the cell's `t0` endpoint under the n-step composition.
    pub image_base: [f64; 2],
    /// Parameter derivative of the image: `image(t) = image_base + (t - t0) * image_dir`.
    pub image_dir: [f64; 2],
}

impl RefinedCell {
    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }

    /// n-step length expansion on this cell.
    pub fn expansion(&self) -> f64 {
        self.image_dir[0].hypot(self.image_dir[1])
    }

    pub fn image_length(&self) -> f64 {
        self.expansion() * self.length()
    }

    pub fn image_at(&self, t: f64) -> (f64, f64) {
        (
            self.image_base[0] + (t - self.t0) * self.image_dir[0],
            self.image_base[1] + (t - self.t0) * self.image_dir[1],
        )
    }
}

/// Refines a segment with unstable-cone direction under `n` steps: at each
/// step every current image piece is split where it crosses the cut line and
/// each part is mapped by its branch. The cells tile the input interval.
pub fn refine_unstable_segment(
    seg: &DirectedSegment,
    n: usize,
    params: &MapParams,
) -> Result<Vec<RefinedCell>> {
    params.require_strict()?;
    if seg.length() < 1e-13 {
        return Err(Error::DegenerateSegment(seg.length()));
    }
    let cones = cone_constants(params)?;
    match seg.slope_u() {
        Some(u) if cones.in_j_plus(u, 1e-9) => {}
        Some(u) => return Err(Error::DirectionOutsideCone(u)),
        None => return Err(Error::DirectionOutsideCone(f64::INFINITY)),
    }

    let maps = branch_matrices(params);
    let a = params.alpha();
    let (sx, sy) = seg.point_at(seg.t0);
    let mut cells = vec![RefinedCell {
        t0: seg.t0,
        t1: seg.t1,
        word: Itinerary::default(),
        image_base: [sx, sy],
        image_dir: seg.dir(),
    }];

    for _ in 0..n {
        let mut next = Vec::with_capacity(cells.len() + 4);
        for cell in &cells {
            // w along the image is affine in t
            let w0 = (1.0 - a) * cell.image_base[0] + a * cell.image_base[1];
            let dw = (1.0 - a) * cell.image_dir[0] + a * cell.image_dir[1];
            let mut pieces: [(f64, f64); 2] = [(cell.t0, cell.t1), (0.0, 0.0)];
            let mut count = 1;
            if dw.abs() > 1e-300 {
                let tc = cell.t0 + (0.5 - w0) / dw;
                if tc > cell.t0 + CUT_TOL && tc < cell.t1 - CUT_TOL {
                    pieces = [(cell.t0, tc), (tc, cell.t1)];
                    count = 2;
                }
            }
            for &(lo, hi) in &pieces[..count] {
                // branch decided at the midpoint; robust against the cut ending
                // up a rounding error inside a piece
                let wm = w0 + (0.5 * (lo + hi) - cell.t0) * dw;
                let branch = if wm <= 0.5 { BranchId::B1 } else { BranchId::B2 };
                let m = maps.forward(branch);
                let bx = cell.image_base[0] + (lo - cell.t0) * cell.image_dir[0];
                let by = cell.image_base[1] + (lo - cell.t0) * cell.image_dir[1];
                let (ix, iy) = m.apply_raw(bx, by);
                let mut word = cell.word.clone();
                word.0.push(branch);
                next.push(RefinedCell {
                    t0: lo,
                    t1: hi,
                    word,
                    image_base: [ix, iy],
                    image_dir: m.apply_vec(cell.image_dir),
                });
            }
        }
        cells = next;
    }
    Ok(cells)
}

/// `Gamma_n(I) = sum over refinement cells J of |J| / |G^n(J)|`, the
/// reciprocal-expansion sum controlling refinement distortion. Bounded in `n`
/// by an envelope of the shape `F * (r^n + |I|)`.
pub fn gamma_n(seg: &DirectedSegment, n: usize, params: &MapParams) -> Result<f64> {
    let cells = refine_unstable_segment(seg, n, params)?;
    Ok(cells.iter().map(|c| c.length() / c.image_length()).sum())
}
