//! Image rendering: histograms and polygon sets to PPM (P6) or PNG.
//!
//! PPM is the byte-exact canonical format; PNG is a convenience re-encode of
//! the same pixel buffer. Intensity for count data is log-scaled,
//! `log(1 + c) / log(1 + max)`, since a linear map washes out the thin
//! attractor. Image row 0 is the top of the square (`y` near 1).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use memtent::map::{itinerary, MapParams, Point2};
use memtent::measure::EmpiricalMeasure2D;
use memtent::polygon::LabeledPolygon;
use memtent::rng::CounterRng;

pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            rgb: vec![0; width * height * 3],
        }
    }

    fn set(&mut self, x: usize, y: usize, px: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.rgb[i..i + 3].copy_from_slice(&px);
    }
}

fn log_intensity(count: u64, max: u64) -> u8 {
    if max == 0 {
        return 0;
    }
    let v = (1.0 + count as f64).ln() / (1.0 + max as f64).ln();
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Grayscale rendering of a histogram.
pub fn histogram_image(m: &EmpiricalMeasure2D) -> Image {
    let r = m.resolution();
    let max = m.counts().iter().copied().max().unwrap_or(0);
    let mut img = Image::new(r, r);
    for iy in 0..r {
        for ix in 0..r {
            let g = log_intensity(m.count_at(ix, iy), max);
            // histogram row 0 sits at the bottom of the square
            img.set(ix, r - 1 - iy, [g, g, g]);
        }
    }
    img
}

/// Partition cells colored by their branch word (each pixel's word comes from
/// its own itinerary), with black strokes where neighboring words differ.
pub fn partition_image(n: usize, res: usize, params: &MapParams) -> Image {
    let mut words = vec![0u64; res * res];
    for iy in 0..res {
        let y = (iy as f64 + 0.5) / res as f64;
        for ix in 0..res {
            let x = (ix as f64 + 0.5) / res as f64;
            let it = itinerary(Point2::new(x, y).unwrap(), n, params);
            let mut code = 1u64;
            for b in it.symbols() {
                code = code << 1 | (b.symbol() as u64 - 1);
            }
            words[iy * res + ix] = code;
        }
    }
    let mut img = Image::new(res, res);
    for iy in 0..res {
        for ix in 0..res {
            let code = words[iy * res + ix];
            let h = CounterRng::new(code).u64_at(0);
            let px = [
                128 + (h & 0x7f) as u8,
                128 + (h >> 8 & 0x7f) as u8,
                128 + (h >> 16 & 0x7f) as u8,
            ];
            img.set(ix, res - 1 - iy, px);
        }
    }
    // strokes on word changes
    for iy in 0..res {
        for ix in 0..res {
            let code = words[iy * res + ix];
            let differs = (ix > 0 && words[iy * res + ix - 1] != code)
                || (iy > 0 && words[(iy - 1) * res + ix] != code);
            if differs {
                img.set(ix, res - 1 - iy, [0, 0, 0]);
            }
        }
    }
    img
}

/// Forward-image pieces rendered by coverage count (overlaps brighter),
/// log-scaled like the histograms.
pub fn forward_images_image(pieces: &[LabeledPolygon], res: usize) -> Image {
    let mut counts = vec![0u64; res * res];
    for lp in pieces {
        let vs = lp.polygon.vertices();
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for v in vs {
            x0 = x0.min(v[0]);
            y0 = y0.min(v[1]);
            x1 = x1.max(v[0]);
            y1 = y1.max(v[1]);
        }
        let ix0 = ((x0 * res as f64).floor().max(0.0)) as usize;
        let iy0 = ((y0 * res as f64).floor().max(0.0)) as usize;
        let ix1 = ((x1 * res as f64).ceil() as usize).min(res - 1);
        let iy1 = ((y1 * res as f64).ceil() as usize).min(res - 1);
        for iy in iy0..=iy1 {
            let cy = (iy as f64 + 0.5) / res as f64;
            for ix in ix0..=ix1 {
                let cx = (ix as f64 + 0.5) / res as f64;
                if lp.polygon.contains([cx, cy], 0.0) {
                    counts[iy * res + ix] += 1;
                }
            }
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut img = Image::new(res, res);
    for iy in 0..res {
        for ix in 0..res {
            let g = log_intensity(counts[iy * res + ix], max);
            img.set(ix, res - 1 - iy, [g, g, g]);
        }
    }
    img
}

pub fn write_ppm(path: &Path, img: &Image) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
    w.write_all(&img.rgb)?;
    w.flush()
}

pub fn write_png(path: &Path, img: &Image) -> io::Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, img.width as u32, img.height as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| io::Error::other(e.to_string()))?;
    writer
        .write_image_data(&img.rgb)
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(())
}
