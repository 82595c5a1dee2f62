//! Command-line front end: generate meshes, run either pipeline, verify
//! their outputs against the oracles, benchmark phases, and plot.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use polylla::bench::{named_cells, run_bench, write_csv, BenchConfig, PipelineKind};
use polylla::formats;
use polylla::mesh::TriMesh;
use polylla::par::{run_parallel_timed, ParConfig};
use polylla::seq::{run_sequential_timed, PolyMesh};
use polylla::svg::write_polymesh_svg;
use polylla::synth::{generate_grid, generate_random, GenKind, GenSpec};
use polylla::timing::fmt_ms;
use polylla::validate::{canonical_polygons, check_polymesh, mesh_stats, terminal_edge_regions};

#[derive(Parser)]
#[command(
    name = "polylla",
    about = "Tri-to-polygon mesh generation over a half-edge core",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a triangulation into a polygonal mesh.
    Run(RunArgs),
    /// Run both pipelines and the oracles; fail on any mismatch.
    Verify(VerifyArgs),
    /// Time pipeline phases over generated meshes and write a CSV.
    Bench(BenchArgs),
    /// Render a polygonal mesh as SVG.
    Plot(PlotArgs),
    /// Generate a triangulation and write it to disk.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineArg {
    Seq,
    Par,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunFormat {
    Off,
    Hedump,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFormat {
    NodeEle,
    Hedump,
}

#[derive(Args)]
struct InputArgs {
    /// Input mesh: a .node file (with a sibling .ele) or a .hedump file.
    #[arg(long, short = 'i', value_name = "PATH", conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Generate the input instead: grid:N or random:N.
    #[arg(long, value_name = "SPEC")]
    gen: Option<String>,
    /// Seed for random generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Border snap tolerance for random generation.
    #[arg(long, default_value_t = polylla::synth::DEFAULT_BORDER_TOLERANCE)]
    delta: f64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "seq")]
    pipeline: PipelineArg,
    /// Worker count for the parallel pipeline (default: POLYLLA_WORKERS or
    /// the number of CPUs).
    #[arg(long)]
    workers: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value = "off")]
    format: RunFormat,
    #[arg(long, short = 'o', value_name = "PATH")]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Mesh spec (repeatable): grid:N or random:N.
    #[arg(long = "gen", value_name = "SPEC", required = true)]
    specs: Vec<String>,
    /// Pipeline to time (repeatable); default both.
    #[arg(long = "pipeline", value_enum)]
    pipelines: Vec<PipelineArg>,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = polylla::synth::DEFAULT_BORDER_TOLERANCE)]
    delta: f64,
    #[arg(long, value_name = "PATH")]
    csv: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Pipeline used to build the polygons when the input is a
    /// triangulation.
    #[arg(long, value_enum, default_value = "seq")]
    pipeline: PipelineArg,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    max_elements: usize,
    #[arg(long, short = 'o', value_name = "PATH")]
    output: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Mesh spec: grid:N or random:N.
    #[arg(long, value_name = "SPEC", required = true)]
    gen: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = polylla::synth::DEFAULT_BORDER_TOLERANCE)]
    delta: f64,
    #[arg(long, value_enum, default_value = "node-ele")]
    format: GenFormat,
    /// Output base path (gets .node/.ele or .hedump appended).
    #[arg(long, short = 'o', value_name = "PATH")]
    output: PathBuf,
}

fn default_workers(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("POLYLLA_WORKERS")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
    .max(1)
}

fn parse_spec(spec: &str, seed: u64, delta: f64) -> Result<GenSpec> {
    let mut parsed = GenSpec::parse(spec).map_err(|e| anyhow!("{e}"))?;
    parsed.rng_seed = seed;
    if parsed.kind == GenKind::Random {
        parsed.border_tolerance = delta;
    }
    Ok(parsed)
}

fn generate_pair(spec: &GenSpec) -> Result<(Vec<(f64, f64)>, Vec<[usize; 3]>)> {
    let pair = match spec.kind {
        GenKind::Grid => generate_grid(spec.n_points),
        GenKind::Random => generate_random(spec),
    }
    .map_err(|e| anyhow!("{e}"))?;
    Ok(pair)
}

/// A loaded input: always a triangulation, or a ready-made polygonal mesh
/// when a poly hedump was given.
enum LoadedMesh {
    Tri(TriMesh),
    Poly(PolyMesh),
}

fn load_input(args: &InputArgs) -> Result<LoadedMesh> {
    if let Some(spec) = &args.gen {
        let spec = parse_spec(spec, args.seed, args.delta)?;
        let (points, triangles) = generate_pair(&spec)?;
        let mesh = TriMesh::from_triangles(&points, &triangles).map_err(|e| anyhow!("{e}"))?;
        return Ok(LoadedMesh::Tri(mesh));
    }
    let Some(path) = &args.input else {
        bail!("either --input or --gen is required");
    };
    if !path.exists() {
        bail!("input file {} does not exist", path.display());
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("node") => {
            let ele = path.with_extension("ele");
            if !ele.exists() {
                bail!("expected {} next to {}", ele.display(), path.display());
            }
            let (points, triangles) = formats::read_node_ele(path, &ele)
                .with_context(|| format!("reading {}", path.display()))?;
            let mesh =
                TriMesh::from_triangles(&points, &triangles).map_err(|e| anyhow!("{e}"))?;
            Ok(LoadedMesh::Tri(mesh))
        }
        Some("hedump") => match formats::read_hedump(path)
            .with_context(|| format!("reading {}", path.display()))?
        {
            formats::HedumpMesh::Tri(mesh) => Ok(LoadedMesh::Tri(mesh)),
            formats::HedumpMesh::Poly(poly) => Ok(LoadedMesh::Poly(poly)),
        },
        _ => bail!(
            "cannot infer format of {} (expected .node or .hedump)",
            path.display()
        ),
    }
}

fn run_pipeline(
    mesh: &TriMesh,
    pipeline: PipelineArg,
    workers: Option<usize>,
) -> Result<PolyMesh> {
    match pipeline {
        PipelineArg::Seq => {
            let (poly, t) = run_sequential_timed(mesh).map_err(|e| anyhow!("{e}"))?;
            println!(
                "phase timings (ms): LM={} LF={} LS={} Trav={} Rep={} Total={}",
                fmt_ms(t.label_longest),
                fmt_ms(t.label_frontier),
                fmt_ms(t.label_seeds),
                fmt_ms(t.traversal),
                fmt_ms(t.repair),
                fmt_ms(t.total())
            );
            Ok(poly)
        }
        PipelineArg::Par => {
            let workers = default_workers(workers);
            let (poly, t) =
                run_parallel_timed(mesh, &ParConfig::new(workers)).map_err(|e| anyhow!("{e}"))?;
            println!(
                "kernel timings (ms, {workers} workers): LLK={} LFK={} LSK={} LEK={} CaK={} SFK={} OSK={} Scan={} Total={}",
                fmt_ms(t.label_longest),
                fmt_ms(t.label_frontier),
                fmt_ms(t.label_seeds),
                fmt_ms(t.label_extra),
                fmt_ms(t.change_attributes),
                fmt_ms(t.search_frontier),
                fmt_ms(t.overwrite_seeds),
                fmt_ms(t.scan_compact),
                fmt_ms(t.kernel_total())
            );
            println!(
                "buffer copies (ms, simulated transfer): CtD={} BtH={} TwC={}",
                fmt_ms(t.copy_to_workers),
                fmt_ms(t.copy_back),
                fmt_ms(t.total_with_copies())
            );
            Ok(poly)
        }
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mesh = match load_input(&args.input)? {
        LoadedMesh::Tri(mesh) => mesh,
        LoadedMesh::Poly(_) => bail!("run needs a triangulation input, got a polygonal mesh"),
    };
    let poly = run_pipeline(&mesh, args.pipeline, args.workers)?;
    match args.format {
        RunFormat::Off => formats::write_poly_off(&poly, &args.output),
        RunFormat::Hedump => formats::write_hedump_poly(&poly, &args.output),
    }
    .with_context(|| format!("writing {}", args.output.display()))?;
    println!("{}", mesh_stats(&poly));
    println!("wrote {}", args.output.display());
    Ok(())
}

/// Distinguishes check failures (exit 2) from input errors (exit 1).
struct VerificationFailed;

fn cmd_verify(args: &VerifyArgs) -> Result<Result<(), VerificationFailed>> {
    let mesh = match load_input(&args.input)? {
        LoadedMesh::Tri(mesh) => mesh,
        LoadedMesh::Poly(_) => bail!("verify needs a triangulation input"),
    };
    mesh.check_invariants().map_err(|e| anyhow!(e))?;
    let workers = default_workers(args.workers);

    let sequential = polylla::run_sequential(&mesh).map_err(|e| anyhow!("{e}"))?;
    let parallel = polylla::run_parallel(&mesh, workers).map_err(|e| anyhow!("{e}"))?;
    let partition = terminal_edge_regions(&mesh).map_err(|e| anyhow!("{e}"))?;

    let seq_report = check_polymesh(&sequential, &mesh, &partition);
    let par_report = check_polymesh(&parallel, &mesh, &partition);
    let canonical_equal = canonical_polygons(&sequential) == canonical_polygons(&parallel);

    println!("sequential pipeline:\n{seq_report}\n");
    println!("parallel pipeline ({workers} workers):\n{par_report}\n");
    println!("pipelines_match={canonical_equal}");
    print!("{}", seq_report.to_kv_lines());

    if seq_report.all_passed() && par_report.all_passed() && canonical_equal {
        println!("verification OK");
        Ok(Ok(()))
    } else {
        println!("verification FAILED");
        Ok(Err(VerificationFailed))
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let specs = args
        .specs
        .iter()
        .map(|s| parse_spec(s, args.seed, args.delta))
        .collect::<Result<Vec<_>>>()?;
    let pipelines = if args.pipelines.is_empty() {
        vec![PipelineKind::Sequential, PipelineKind::Parallel]
    } else {
        args.pipelines
            .iter()
            .map(|p| match p {
                PipelineArg::Seq => PipelineKind::Sequential,
                PipelineArg::Par => PipelineKind::Parallel,
            })
            .collect()
    };
    let cfg = BenchConfig {
        specs,
        pipelines,
        repetitions: args.repetitions,
        workers: default_workers(args.workers),
    };
    let rows = run_bench(&cfg).map_err(|e| anyhow!("{e}"))?;
    write_csv(&rows, &args.csv).with_context(|| format!("writing {}", args.csv.display()))?;
    for row in rows.iter().filter(|r| r.rep == "median") {
        let cells: Vec<String> = named_cells(row)
            .iter()
            .map(|(n, v)| format!("{n}={}", fmt_ms(*v)))
            .collect();
        println!("{} {} median: {}", row.mesh, row.pipeline, cells.join(" "));
    }
    println!("wrote {}", args.csv.display());
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let poly = match load_input(&args.input)? {
        LoadedMesh::Poly(poly) => poly,
        LoadedMesh::Tri(mesh) => run_pipeline(&mesh, args.pipeline, args.workers)?,
    };
    write_polymesh_svg(&poly, &args.output, args.max_elements)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!(
        "wrote {} ({} polygons)",
        args.output.display(),
        poly.seeds.len()
    );
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let spec = parse_spec(&args.gen, args.seed, args.delta)?;
    let (points, triangles) = generate_pair(&spec)?;
    match args.format {
        GenFormat::NodeEle => {
            formats::write_node_ele(&points, &triangles, &args.output)
                .with_context(|| format!("writing {}", args.output.display()))?;
            println!(
                "wrote {} and {} ({} points, {} triangles)",
                args.output.with_extension("node").display(),
                args.output.with_extension("ele").display(),
                points.len(),
                triangles.len()
            );
        }
        GenFormat::Hedump => {
            let mesh =
                TriMesh::from_triangles(&points, &triangles).map_err(|e| anyhow!("{e}"))?;
            let path: &Path = &args.output;
            let path = if path.extension().is_some() {
                path.to_path_buf()
            } else {
                path.with_extension("hedump")
            };
            formats::write_hedump_tri(&mesh, &path)
                .with_context(|| format!("writing {}", path.display()))?;
            println!(
                "wrote {} ({} half-edges)",
                path.display(),
                mesh.n_halfedges()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Verify(args) => cmd_verify(args).map(|r| r.is_ok()),
        Command::Bench(args) => cmd_bench(args).map(|()| true),
        Command::Plot(args) => cmd_plot(args).map(|()| true),
        Command::Gen(args) => cmd_gen(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
