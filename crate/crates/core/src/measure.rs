//! Seeded Monte Carlo estimators of the invariant measure.
//!
//! All randomness comes from [`CounterRng`] streams indexed by absolute
//! sample number, and all floating-point reductions run over fixed index
//! chunks merged in order, so results are identical for any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiber::StableFiber;
use crate::map::{self, MapParams, Point2};
use crate::rng::CounterRng;
use crate::segment::DirectedSegment;

/// Gridded histogram over the unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure2D {
    resolution: usize,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalMeasure2D {
    pub fn new(resolution: usize) -> Self {
        assert!(resolution >= 1);
        Self {
            resolution,
            counts: vec![0; resolution * resolution],
            total: 0,
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn index_of(&self, p: Point2) -> usize {
        let r = self.resolution;
        let ix = ((p.x * r as f64) as usize).min(r - 1);
        let iy = ((p.y * r as f64) as usize).min(r - 1);
        iy * r + ix
    }

    pub fn record(&mut self, p: Point2) {
        let i = self.index_of(p);
        self.counts[i] += 1;
        self.total += 1;
    }

    /// Additive merge; both sides must share the resolution.
    pub fn merge(&mut self, other: &EmpiricalMeasure2D) {
        assert_eq!(self.resolution, other.resolution);
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
    }

    /// Count in cell `(ix, iy)` (column, row from the origin corner).
    pub fn count_at(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.resolution + ix]
    }

    pub fn occupied_fraction(&self) -> f64 {
        let occupied = self.counts.iter().filter(|&&c| c > 0).count();
        occupied as f64 / self.counts.len() as f64
    }

    /// Integral of `g` against the normalized histogram, evaluating `g` at
    /// cell centers.
    pub fn integrate(&self, g: &Observable) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let r = self.resolution;
        let mut sum = 0.0;
        for iy in 0..r {
            let cy = (iy as f64 + 0.5) / r as f64;
            for ix in 0..r {
                let c = self.counts[iy * r + ix];
                if c > 0 {
                    let cx = (ix as f64 + 0.5) / r as f64;
                    sum += c as f64 * g.eval(Point2::clamped(cx, cy));
                }
            }
        }
        sum / self.total as f64
    }

    /// Binary dump: `EM2D`, u32 version, f64 alpha, u64 seed, u32 resolution,
    /// u64 total, then row-major u64 counts, all little-endian.
    pub fn write_binary<W: std::io::Write>(
        &self,
        alpha: f64,
        seed: u64,
        mut w: W,
    ) -> std::io::Result<()> {
        w.write_all(b"EM2D")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&alpha.to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        w.write_all(&(self.resolution as u32).to_le_bytes())?;
        w.write_all(&self.total.to_le_bytes())?;
        for c in &self.counts {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a dump written by [`Self::write_binary`]; returns the histogram
    /// with the stored `(alpha, seed)`.
    pub fn read_binary<R: std::io::Read>(mut r: R) -> std::io::Result<(Self, f64, u64)> {
        use std::io::{Error, ErrorKind};
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"EM2D" {
            return Err(Error::new(ErrorKind::InvalidData, "bad magic"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != 1 {
            return Err(Error::new(ErrorKind::InvalidData, "unknown version"));
        }
        r.read_exact(&mut b8)?;
        let alpha = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b4)?;
        let resolution = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let total = u64::from_le_bytes(b8);
        let mut counts = vec![0u64; resolution * resolution];
        for c in counts.iter_mut() {
            r.read_exact(&mut b8)?;
            *c = u64::from_le_bytes(b8);
        }
        let sum: u64 = counts.iter().sum();
        if sum != total {
            return Err(Error::new(ErrorKind::InvalidData, "total mismatch"));
        }
        Ok((
            Self {
                resolution,
                counts,
                total,
            },
            alpha,
            seed,
        ))
    }
}

/// The bounded observables the estimators integrate; an enumerated family so
/// reports stay reproducible and serializable. Box indicators stand in for
/// arbitrary continuous test functions.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum Observable {
    CoordX,
    CoordY,
    ProductXy,
    BoxIndicator { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Observable {
    pub fn eval(&self, p: Point2) -> f64 {
        match *self {
            Observable::CoordX => p.x,
            Observable::CoordY => p.y,
            Observable::ProductXy => p.x * p.y,
            Observable::BoxIndicator { x0, y0, x1, y1 } => {
                if p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Spread statistics of per-start Birkhoff means.
#[derive(Clone, Debug, Serialize)]
pub struct BirkhoffResult {
    pub per_start_means: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of the per-start means.
    pub std: f64,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
}

/// Time average of `g` along the orbit of `p0`: discards `burn_in` iterates,
/// then averages over the next `n` images.
pub fn birkhoff_average(
    p0: Point2,
    g: &Observable,
    n: usize,
    burn_in: usize,
    params: &MapParams,
) -> f64 {
    assert!(n >= 1);
    let mut p = p0;
    for _ in 0..burn_in {
        p = map::step(p, params).0;
    }
    let mut sum = 0.0;
    for _ in 0..n {
        sum += g.eval(p);
        p = map::step(p, params).0;
    }
    sum / n as f64
}

/// Stream tag for start points (documented so dumps can be reproduced).
const STREAM_STARTS: u64 = 0x01;
const STREAM_PUSHFORWARD: u64 = 0x02;
const STREAM_TUBE: u64 = 0x03;

/// Birkhoff means from `starts` uniform-random start points. If the time
/// averages capture Lebesgue-almost-every point, the spread shrinks with `n`.
pub fn srb_consistency(
    starts: usize,
    g: &Observable,
    n: usize,
    burn_in: usize,
    seed: u64,
    params: &MapParams,
) -> BirkhoffResult {
    assert!(starts >= 2);
    let rng = CounterRng::new(seed).stream(STREAM_STARTS);
    let params = *params;
    let g = *g;
    let per_start_means: Vec<f64> = (0..starts as u64)
        .into_par_iter()
        .map(|i| birkhoff_average(rng.point_at(i), &g, n, burn_in, &params))
        .collect();
    let mean = per_start_means.iter().sum::<f64>() / starts as f64;
    let var = per_start_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / starts as f64;
    BirkhoffResult {
        per_start_means,
        mean,
        std: var.sqrt(),
        n,
        burn_in,
        seed,
    }
}

/// Histogram of post-burn-in orbit points from seeded uniform starts.
pub fn attractor_histogram(
    starts: usize,
    n: usize,
    burn_in: usize,
    resolution: usize,
    seed: u64,
    params: &MapParams,
) -> EmpiricalMeasure2D {
    assert!(resolution >= 16);
    let rng = CounterRng::new(seed).stream(STREAM_STARTS);
    let params = *params;
    (0..starts as u64)
        .into_par_iter()
        .fold(
            || EmpiricalMeasure2D::new(resolution),
            |mut hist, i| {
                let mut p = rng.point_at(i);
                for _ in 0..burn_in {
                    p = map::step(p, &params).0;
                }
                for _ in 0..n {
                    hist.record(p);
                    p = map::step(p, &params).0;
                }
                hist
            },
        )
        .reduce(
            || EmpiricalMeasure2D::new(resolution),
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
}

/// Pushes uniform mass on an unstable-cone segment forward `n` steps and bins
/// the images; integrals against observables approximate the same invariant
/// averages the Birkhoff estimator sees.
pub fn pushforward_unstable_segment(
    seg: &DirectedSegment,
    n: usize,
    samples: usize,
    resolution: usize,
    seed: u64,
    params: &MapParams,
) -> Result<EmpiricalMeasure2D> {
    let cones = crate::cone::cone_constants(params)?;
    match seg.slope_u() {
        Some(u) if cones.in_j_plus(u, 1e-9) => {}
        Some(u) => return Err(Error::DirectionOutsideCone(u)),
        None => return Err(Error::DirectionOutsideCone(f64::INFINITY)),
    }
    let rng = CounterRng::new(seed).stream(STREAM_PUSHFORWARD);
    let (t0, _) = seg.interval();
    let len = seg.length();
    let params = *params;
    let seg = *seg;
    let hist = (0..samples as u64)
        .into_par_iter()
        .fold(
            || EmpiricalMeasure2D::new(resolution),
            |mut hist, i| {
                let t = t0 + rng.unit_f64_at(i) * len;
                let (x, y) = seg.point_at(t);
                let mut p = Point2::clamped(x, y);
                for _ in 0..n {
                    p = map::step(p, &params).0;
                }
                hist.record(p);
                hist
            },
        )
        .reduce(
            || EmpiricalMeasure2D::new(resolution),
            |mut a, b| {
                a.merge(&b);
                a
            },
        );
    Ok(hist)
}

/// Coefficient of variation of bin counts.
pub(crate) fn cov_of_counts(counts: &[u64]) -> f64 {
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    var.sqrt() / mean
}

/// Probes the conditional density along a fiber: samples the rectangle
/// `[t_minus, t_plus] x [-h, h]` around the fiber uniformly, keeps points
/// whose first `fiber.depth` itinerary symbols match the fiber's, and bins
/// the accepted arclength positions. If mass conditioned on the fiber is
/// uniform along it, the coefficient of variation of the bin counts falls to
/// the sampling noise floor.
pub fn conditional_uniformity_probe(
    fiber: &StableFiber,
    tube_halfwidth: f64,
    samples: usize,
    bins: usize,
    seed: u64,
    params: &MapParams,
) -> Result<f64> {
    assert!(bins >= 1);
    let d = fiber.length();
    if d <= 10.0 * tube_halfwidth {
        return Err(Error::TubeTooWide {
            halfwidth: tube_halfwidth,
            length: d,
        });
    }
    if bins == 1 {
        return Ok(0.0);
    }
    let rng = CounterRng::new(seed).stream(STREAM_TUBE);
    let base_word = map::itinerary(fiber.point, fiber.depth, params);
    let normal = [-fiber.dir[1], fiber.dir[0]];
    let params = *params;

    const CHUNK: u64 = 1 << 14;
    let n_chunks = (samples as u64).div_ceil(CHUNK);
    let counts = (0..n_chunks)
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut counts, chunk| {
                let lo = chunk * CHUNK;
                let hi = ((chunk + 1) * CHUNK).min(samples as u64);
                for i in lo..hi {
                    let t = fiber.t_minus + rng.unit_f64_at(2 * i) * d;
                    let s = (2.0 * rng.unit_f64_at(2 * i + 1) - 1.0) * tube_halfwidth;
                    let (x, y) = fiber.point_at(t);
                    let (qx, qy) = (x + s * normal[0], y + s * normal[1]);
                    if !(0.0..=1.0).contains(&qx) || !(0.0..=1.0).contains(&qy) {
                        continue;
                    }
                    let q = Point2::clamped(qx, qy);
                    if map::itinerary(q, fiber.depth, &params) == base_word {
                        let b = (((t - fiber.t_minus) / d) * bins as f64) as usize;
                        counts[b.min(bins - 1)] += 1;
                    }
                }
                counts
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

    let accepted: u64 = counts.iter().sum();
    let rate = accepted as f64 / samples as f64;
    if rate < 1e-4 {
        return Err(Error::InconclusiveProbe(rate));
    }
    Ok(cov_of_counts(&counts))
}
