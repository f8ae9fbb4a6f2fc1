//! Command-line surface. Exit codes: 0 success, 1 verification-check
//! failure, 2 usage or regime error. Every command is deterministic under a
//! fixed configuration and writes only to its declared output path.

mod render;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memtent::cone::cone_constants;
use memtent::map::{orbit_for_each, MapParams, Point2};
use memtent::measure::attractor_histogram;
use memtent::polygon::{forward_image_polygons, partition_polygons, LabeledPolygon};
use memtent::verify::{verification_suite_scaled, SuiteScale};

#[derive(Parser)]
#[command(
    name = "memtent",
    version,
    about = "Planar tent map with memory: orbits, cone constants, partitions, attractor images, verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ImageFormat {
    Ppm,
    Png,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PartitionFormat {
    Ppm,
    Png,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the cone-geometry constants for a strict-regime alpha as JSON
    Constants(ConstantsArgs),
    /// Emit an orbit as CSV rows `k,x,y,symbol`
    Orbit(OrbitArgs),
    /// Render the attractor histogram from seeded random starts
    Attractor(AttractorArgs),
    /// Render the n-step branch partition, or forward images of the square
    Partition(PartitionArgs),
    /// Run the verification suite and emit the report as JSON
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    alpha: f64,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    x0: f64,
    #[arg(long, default_value_t = 0.2)]
    y0: f64,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttractorArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Recorded iterations per start
    #[arg(long, default_value_t = 1_000_000)]
    iters: usize,
    /// Discarded transient iterations per start
    #[arg(long, default_value_t = 1_000)]
    burn: usize,
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// Histogram resolution (grid is res x res)
    #[arg(long, default_value_t = 1024)]
    res: usize,
    /// Use the single start (x0, y0) instead of seeded random starts
    #[arg(long, requires = "y0")]
    x0: Option<f64>,
    #[arg(long, requires = "x0")]
    y0: Option<f64>,
    #[arg(long, default_value = "attractor.ppm")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ImageFormat::Ppm)]
    format: ImageFormat,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    alpha: f64,
    /// Partition depth (word length)
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Render forward images of the square instead of partition cells
    #[arg(long)]
    images: bool,
    #[arg(long, default_value_t = 512)]
    res: usize,
    #[arg(long, default_value = "partition.ppm")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = PartitionFormat::Ppm)]
    format: PartitionFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Allow non-hyperbolic alphas and run their regression regimes
    #[arg(long)]
    regimes: bool,
    /// Override the Birkhoff start count
    #[arg(long)]
    starts: Option<usize>,
    /// Override the Birkhoff iteration count
    #[arg(long)]
    iters: Option<usize>,
    /// Override the fiber trim/direction depth
    #[arg(long)]
    depth: Option<usize>,
    /// Report file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        // a closed stdout (e.g. piping into `head`) is not an error
        Err(e) if is_broken_pipe(e.as_ref()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &(dyn std::error::Error + 'static)) -> bool {
    let mut cur = Some(e);
    while let Some(err) = cur {
        if let Some(io_err) = err.downcast_ref::<io::Error>() {
            if io_err.kind() == io::ErrorKind::BrokenPipe {
                return true;
            }
        }
        cur = err.source();
    }
    false
}

fn run() -> Result<ExitCode, Box<dyn std::error::Error>> {
    match Cli::parse().cmd {
        Cmd::Constants(args) => constants_cmd(args),
        Cmd::Orbit(args) => orbit_cmd(args),
        Cmd::Attractor(args) => attractor_cmd(args),
        Cmd::Partition(args) => partition_cmd(args),
        Cmd::Verify(args) => verify_cmd(args),
    }
}

fn out_writer(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn constants_cmd(args: ConstantsArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = MapParams::strict(args.alpha)?;
    let constants = cone_constants(&params)?;
    let mut w = out_writer(&args.out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&constants)?)?;
    Ok(ExitCode::SUCCESS)
}

fn orbit_cmd(args: OrbitArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = MapParams::new(args.alpha)?;
    let p0 = Point2::new(args.x0, args.y0)?;
    let mut w = out_writer(&args.out)?;
    writeln!(w, "k,x,y,symbol")?;
    let mut io_err = None;
    orbit_for_each(p0, args.iters, &params, |k, p, b| {
        if io_err.is_none() {
            if let Err(e) = writeln!(w, "{},{},{},{}", k + 1, p.x, p.y, b.symbol()) {
                io_err = Some(e);
            }
        }
    });
    if let Some(e) = io_err {
        return Err(e.into());
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn attractor_cmd(args: AttractorArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = MapParams::new(args.alpha)?;
    if args.res < 16 {
        return Err("resolution must be at least 16".into());
    }
    let hist = match (args.x0, args.y0) {
        (Some(x0), Some(y0)) => {
            let mut h = memtent::measure::EmpiricalMeasure2D::new(args.res);
            let mut p = Point2::new(x0, y0)?;
            for _ in 0..args.burn {
                p = memtent::map::step(p, &params).0;
            }
            h.record(p);
            orbit_for_each(p, args.iters.saturating_sub(1), &params, |_, q, _| {
                h.record(q)
            });
            h
        }
        _ => attractor_histogram(
            args.starts,
            args.iters,
            args.burn,
            args.res,
            args.seed,
            &params,
        ),
    };
    eprintln!(
        "occupied fraction at res {}: {:.6}",
        args.res,
        hist.occupied_fraction()
    );
    let img = render::histogram_image(&hist);
    match args.format {
        ImageFormat::Ppm => render::write_ppm(&args.out, &img)?,
        ImageFormat::Png => render::write_png(&args.out, &img)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn polygons_json(alpha: f64, n: usize, kind: &str, pieces: &[LabeledPolygon]) -> serde_json::Value {
    let total: f64 = pieces.iter().map(|lp| lp.polygon.area()).sum();
    serde_json::json!({
        "alpha": alpha,
        "n": n,
        "kind": kind,
        "total_area": total,
        "cells": pieces
            .iter()
            .map(|lp| {
                serde_json::json!({
                    "word": lp.word.word(),
                    "vertices": lp.polygon.vertices(),
                })
            })
            .collect::<Vec<_>>(),
    })
}

fn partition_cmd(args: PartitionArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = MapParams::new(args.alpha)?;
    if args.images && args.n > 20 || !args.images && args.n > 14 {
        return Err("partition depth too large to enumerate".into());
    }
    if args.format == PartitionFormat::Json {
        let (kind, pieces) = if args.images {
            ("forward-images", forward_image_polygons(args.n, &params).pieces)
        } else {
            ("partition", partition_polygons(args.n, &params))
        };
        let json = polygons_json(args.alpha, args.n, kind, &pieces);
        let mut w = out_writer(&Some(args.out))?;
        writeln!(w, "{}", serde_json::to_string_pretty(&json)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    let img = if args.images {
        let pieces = forward_image_polygons(args.n, &params).pieces;
        render::forward_images_image(&pieces, args.res)
    } else {
        render::partition_image(args.n, args.res, &params)
    };
    match args.format {
        PartitionFormat::Ppm => render::write_ppm(&args.out, &img)?,
        PartitionFormat::Png => render::write_png(&args.out, &img)?,
        PartitionFormat::Json => unreachable!(),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(args: VerifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = match MapParams::strict(args.alpha) {
        Ok(p) => p,
        Err(e) if args.regimes => {
            let _ = e;
            MapParams::new(args.alpha)?
        }
        Err(e) => {
            return Err(format!("{e}; pass --regimes to run the regression regimes").into())
        }
    };
    let mut scale = SuiteScale::default();
    if let Some(s) = args.starts {
        scale.birkhoff_starts = s;
    }
    if let Some(n) = args.iters {
        scale.birkhoff_iters = n;
    }
    if let Some(d) = args.depth {
        scale.fiber_depth = d;
    }
    let report = verification_suite_scaled(&params, args.seed, &scale);
    let mut w = out_writer(&args.out)?;
    w.write_all(report.to_json().as_bytes())?;
    w.flush()?;
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
