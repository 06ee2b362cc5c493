//! `digeo` command-line tool.
//!
//! Every subcommand writes to `--out` (stdout when absent). Failures print a
//! JSON record `{"kind": ..., "message": ...}` on stderr and exit nonzero.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use digeo::diff::{GfdConfig, Scheme};
use digeo::eval::{
    benchmark_pi, benchmark_schemes, benchmark_trace, gcvt_compare, gcvt_curve, initial_seeds, sphere_compare,
    sphere_gradcheck, torus_compare, BenchmarkRecord, GcvtRow, Method, SeedInit,
};
use digeo::io::{read_points_csv, read_vectors_csv, trace_records, write_json, ErrorRecord};
use digeo::mesh::{write_obj, write_polylines_obj};
use digeo::oracles::{make_annulus, make_cone, make_cylinder, make_disk, make_icosphere, make_plane, make_torus};
use digeo::{trace_batch, Mesh, TraceConfig, TraceRequest};

#[derive(Parser)]
#[command(name = "digeo", version, about = "Straightest geodesics on triangle meshes")]
struct Cli {
    /// Worker threads for batched tracing (overrides DIGEO_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed of every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    seed_rng: u64,
    #[arg(long, global = true, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fixture mesh as OBJ.
    Gen(GenArgs),
    /// Trace geodesics and write full traces as JSON.
    Trace(TraceArgs),
    /// Exponential map: end points and end directions as CSV.
    Expmap(ExpmapArgs),
    /// Gradient check against the closed-form sphere Jacobians.
    #[command(alias = "grad-check")]
    Gradcheck(GradcheckArgs),
    /// Timing sweeps over face counts and batch sizes as CSV.
    Benchmark(BenchmarkArgs),
    /// End-point accuracy against the sphere or torus exponential map.
    OracleCompare(OracleArgs),
    /// Geodesic centroidal Voronoi tessellation runs as CSV.
    Gcvt(GcvtArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Icosphere,
    Torus,
    Plane,
    Cylinder,
    Cone,
    Disk,
    Annulus,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    shape: Shape,
    /// Icosphere subdivision level.
    #[arg(long, default_value_t = 3)]
    subdiv: u32,
    /// Resolution along the first parameter (torus major circle, grid x, around the axis).
    #[arg(long, default_value_t = 32)]
    res_a: usize,
    /// Resolution along the second parameter (torus minor circle, grid y, along the axis or radius).
    #[arg(long, default_value_t = 16)]
    res_b: usize,
    /// Torus major radius, or cylinder/cone/disk radius, or annulus outer radius.
    #[arg(long, default_value_t = 2.0)]
    major: f64,
    /// Torus minor radius, or annulus inner radius.
    #[arg(long, default_value_t = 1.0)]
    minor: f64,
    /// Plane side length, or cylinder/cone height.
    #[arg(long, default_value_t = 1.0)]
    size: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// CSV `face,b0,b1,b2`.
    #[arg(long)]
    points: PathBuf,
    /// CSV `x,y,z`; one tangent vector per point.
    #[arg(long)]
    dirs: PathBuf,
    #[arg(long)]
    hole_avoidance: bool,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the traced paths as OBJ polylines.
    #[arg(long)]
    obj: Option<PathBuf>,
}

#[derive(Args)]
struct ExpmapArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    dirs: PathBuf,
    #[arg(long)]
    hole_avoidance: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A mesh file, or a generated icosphere when absent.
#[derive(Args)]
struct SphereMesh {
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    subdiv: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Ep,
    Gfd,
}

#[derive(Args)]
struct GradcheckArgs {
    #[command(flatten)]
    mesh: SphereMesh,
    #[arg(long, value_enum, default_value_t = SchemeArg::Gfd)]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// GFD step as a multiple of the mean edge length.
    #[arg(long, default_value_t = 1e-4)]
    eps_factor: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Icosphere subdivision levels.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    subdivs: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    batches: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Batch size of the projection-integration column (0 disables it).
    #[arg(long, default_value_t = 0)]
    pi_batch: usize,
    /// Add forward plus backward timings of both Jacobian schemes.
    #[arg(long)]
    schemes: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Surface {
    Sphere,
    Torus,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum, default_value_t = Surface::Sphere)]
    surface: Surface,
    /// Mesh file; defaults to a generated icosphere or torus.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    subdiv: u32,
    #[arg(long, default_value_t = 2.0)]
    major: f64,
    #[arg(long, default_value_t = 1.0)]
    minor: f64,
    #[arg(long, default_value_t = 128)]
    res_a: usize,
    #[arg(long, default_value_t = 64)]
    res_b: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Samples also run through projection integration (sphere only).
    #[arg(long, default_value_t = 20)]
    pi_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Uniform,
    Clustered,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lloyd,
    Lbfgs,
    Both,
}

#[derive(Args)]
struct GcvtArgs {
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    subdiv: u32,
    #[arg(long, value_enum, default_value_t = InitArg::Clustered)]
    seeds: InitArg,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary of both methods (with `--method both`).
    #[arg(long)]
    summary: Option<PathBuf>,
}

enum CliError {
    InvalidArgs(String),
    Io(String),
    Core(digeo::Error),
}

impl CliError {
    fn record(&self) -> ErrorRecord {
        match self {
            CliError::InvalidArgs(m) => ErrorRecord { kind: "InvalidArgs".into(), message: m.clone() },
            CliError::Io(m) => ErrorRecord { kind: "IOError".into(), message: m.clone() },
            CliError::Core(e) => ErrorRecord::from(e),
        }
    }
}

impl From<digeo::Error> for CliError {
    fn from(e: digeo::Error) -> Self {
        match e {
            digeo::Error::Io(e) => CliError::Io(e.to_string()),
            digeo::Error::InvalidArgument(m) => CliError::InvalidArgs(m),
            e => CliError::Core(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn load_mesh(path: &Path) -> CliResult<Mesh> {
    Ok(Mesh::from_obj(&mut open(path)?)?)
}

fn mesh_or_icosphere(path: Option<&Path>, subdiv: u32) -> CliResult<Mesh> {
    match path {
        Some(p) => load_mesh(p),
        None => Ok(make_icosphere(subdiv)),
    }
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(output(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn json<T: Serialize>(path: Option<&Path>, schema: &str, body: &T) -> CliResult<()> {
    Ok(write_json(output(path)?, schema, body)?)
}

fn requests(mesh: &Mesh, points: &Path, dirs: &Path) -> CliResult<Vec<TraceRequest>> {
    let p = read_points_csv(open(points)?)?;
    let v = read_vectors_csv(open(dirs)?)?;
    if p.len() != v.len() {
        return Err(CliError::InvalidArgs(format!("{} points but {} vectors", p.len(), v.len())));
    }
    if let Some(bad) = p.iter().find(|q| q.face >= mesh.num_faces()) {
        return Err(CliError::InvalidArgs(format!("face {} out of range", bad.face)));
    }
    Ok(p.into_iter().zip(v).map(|(p, v)| TraceRequest::new(p, v)).collect())
}

fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let m = match a.shape {
        Shape::Icosphere => make_icosphere(a.subdiv),
        Shape::Torus => make_torus(a.major, a.minor, a.res_a, a.res_b),
        Shape::Plane => make_plane(a.res_a, a.res_b, a.size),
        Shape::Cylinder => make_cylinder(a.major, a.size, a.res_a, a.res_b),
        Shape::Cone => make_cone(a.major, a.size, a.res_a, a.res_b),
        Shape::Disk => make_disk(a.major, a.res_b, a.res_a),
        Shape::Annulus => make_annulus(a.minor, a.major, a.res_b, a.res_a),
    };
    write_obj(&mut output(a.out.as_deref())?, m.vertices(), m.faces())?;
    Ok(())
}

fn cmd_trace(a: &TraceArgs, workers: Option<usize>) -> CliResult<()> {
    let mesh = load_mesh(&a.mesh)?;
    let reqs = requests(&mesh, &a.points, &a.dirs)?;
    let cfg = TraceConfig { hole_avoidance: a.hole_avoidance, max_steps: a.max_steps, record_path: true, ..Default::default() };
    let results = trace_batch(&mesh, &reqs, &cfg, workers);
    if let Some(obj) = &a.obj {
        let lines: Vec<Vec<_>> = results
            .iter()
            .filter_map(|r| r.as_ref().ok())
            .map(|t| t.points.iter().map(|p| mesh.embed(p)).collect())
            .collect();
        write_polylines_obj(&mut output(Some(obj))?, &lines)?;
    }
    #[derive(Serialize)]
    struct Body {
        traces: Vec<digeo::io::TraceRecord>,
    }
    json(a.out.as_deref(), "digeo.traces", &Body { traces: trace_records(results) })
}

#[derive(Serialize)]
struct ExpRow {
    index: usize,
    face: Option<usize>,
    b0: Option<f64>,
    b1: Option<f64>,
    b2: Option<f64>,
    x: Option<f64>,
    y: Option<f64>,
    z: Option<f64>,
    dx: Option<f64>,
    dy: Option<f64>,
    dz: Option<f64>,
    terminated_by: Option<String>,
    error: Option<String>,
}

fn cmd_expmap(a: &ExpmapArgs, workers: Option<usize>) -> CliResult<()> {
    let mesh = load_mesh(&a.mesh)?;
    let reqs = requests(&mesh, &a.points, &a.dirs)?;
    let cfg = TraceConfig { hole_avoidance: a.hole_avoidance, ..Default::default() };
    let rows: Vec<ExpRow> = trace_batch(&mesh, &reqs, &cfg, workers)
        .into_iter()
        .enumerate()
        .map(|(index, r)| match r {
            Ok(t) => {
                let x = mesh.embed(&t.final_point);
                let b = t.final_point.bary;
                ExpRow {
                    index,
                    face: Some(t.final_point.face),
                    b0: Some(b[0]),
                    b1: Some(b[1]),
                    b2: Some(b[2]),
                    x: Some(x.x),
                    y: Some(x.y),
                    z: Some(x.z),
                    dx: Some(t.final_dir.x),
                    dy: Some(t.final_dir.y),
                    dz: Some(t.final_dir.z),
                    terminated_by: Some(format!("{:?}", t.terminated_by)),
                    error: None,
                }
            }
            Err(e) => ExpRow {
                index,
                face: None,
                b0: None,
                b1: None,
                b2: None,
                x: None,
                y: None,
                z: None,
                dx: None,
                dy: None,
                dz: None,
                terminated_by: None,
                error: Some(e.kind().to_string()),
            },
        })
        .collect();
    write_csv(a.out.as_deref(), &rows)
}

fn cmd_gradcheck(a: &GradcheckArgs, seed: u64, workers: Option<usize>) -> CliResult<()> {
    let mesh = mesh_or_icosphere(a.mesh.mesh.as_deref(), a.mesh.subdiv)?;
    let scheme = match a.scheme {
        SchemeArg::Ep => Scheme::Ep,
        SchemeArg::Gfd => Scheme::Gfd,
    };
    let h = mesh.mean_edge_length();
    let gfd = GfdConfig::new(a.eps_factor * h, a.eps_factor * h)?;
    let (records, summary) = sphere_gradcheck(&mesh, scheme, a.samples, seed, &gfd, workers)?;
    #[derive(Serialize)]
    struct Body {
        faces: usize,
        eps_v: f64,
        eps_p: f64,
        summary: digeo::eval::GradSummary,
        records: Vec<digeo::eval::GradRecord>,
    }
    json(
        a.out.as_deref(),
        "digeo.gradcheck",
        &Body { faces: mesh.num_faces(), eps_v: gfd.eps_v, eps_p: gfd.eps_p, summary, records },
    )
}

fn cmd_benchmark(a: &BenchmarkArgs, seed: u64, workers: Option<usize>) -> CliResult<()> {
    let mut rows: Vec<BenchmarkRecord> = Vec::new();
    for &s in &a.subdivs {
        let mesh = make_icosphere(s);
        let id = format!("icosphere{s}");
        for &b in &a.batches {
            rows.push(benchmark_trace(&mesh, &id, b, a.reps, seed, workers));
        }
        if a.pi_batch > 0 {
            rows.push(benchmark_pi(&mesh, &id, a.pi_batch, a.reps, seed));
        }
        if a.schemes {
            for &b in &a.batches {
                let (ep, gfd) = benchmark_schemes(&mesh, &id, b, a.reps, seed, workers);
                rows.push(ep);
                rows.push(gfd);
            }
        }
    }
    write_csv(a.out.as_deref(), &rows)
}

fn cmd_oracle(a: &OracleArgs, seed: u64, workers: Option<usize>) -> CliResult<()> {
    let report = match a.surface {
        Surface::Sphere => {
            let mesh = mesh_or_icosphere(a.mesh.as_deref(), a.subdiv)?;
            sphere_compare(&mesh, a.samples, seed, a.pi_samples, workers)?
        }
        Surface::Torus => {
            let mesh = match &a.mesh {
                Some(p) => load_mesh(p)?,
                None => make_torus(a.major, a.minor, a.res_a, a.res_b),
            };
            torus_compare(&mesh, a.major, a.minor, a.samples, seed, workers)?
        }
    };
    json(a.out.as_deref(), "digeo.oracle", &report)
}

fn cmd_gcvt(a: &GcvtArgs, seed: u64) -> CliResult<()> {
    let mesh = mesh_or_icosphere(a.mesh.as_deref(), a.subdiv)?;
    let init = match a.seeds {
        InitArg::Uniform => SeedInit::Uniform,
        InitArg::Clustered => SeedInit::Clustered,
    };
    let rows: Vec<GcvtRow> = match a.method {
        MethodArg::Both => {
            let (rows, summary) = gcvt_compare(&mesh, a.n, init, a.runs, a.iters, seed)?;
            if let Some(p) = &a.summary {
                json(Some(p), "digeo.gcvt", &summary)?;
            }
            rows
        }
        MethodArg::Lloyd | MethodArg::Lbfgs => {
            let method = if matches!(a.method, MethodArg::Lloyd) { Method::Lloyd } else { Method::Lbfgs };
            let mut rows = Vec::new();
            for run in 0..a.runs {
                let s0 = initial_seeds(&mesh, a.n, init, seed.wrapping_add(run as u64))?;
                rows.extend(gcvt_curve(&mesh, &s0, method, a.iters, run)?);
            }
            rows
        }
    };
    write_csv(a.out.as_deref(), &rows)
}

fn run(cli: &Cli) -> CliResult<()> {
    if cli.precision == Precision::F32 {
        return Err(CliError::InvalidArgs("only --precision f64 is supported".into()));
    }
    if cli.workers == Some(0) {
        return Err(CliError::InvalidArgs("--workers must be positive".into()));
    }
    let (w, s) = (cli.workers, cli.seed_rng);
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Trace(a) => cmd_trace(a, w),
        Command::Expmap(a) => cmd_expmap(a, w),
        Command::Gradcheck(a) => cmd_gradcheck(a, s, w),
        Command::Benchmark(a) => cmd_benchmark(a, s, w),
        Command::OracleCompare(a) => cmd_oracle(a, s, w),
        Command::Gcvt(a) => cmd_gcvt(a, s),
    }
}

fn fail(e: CliError) -> ExitCode {
    let rec = e.record();
    eprintln!("{}", serde_json::to_string(&rec).unwrap_or_else(|_| rec.message.clone()));
    ExitCode::from(if rec.kind == "InvalidArgs" { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(CliError::InvalidArgs(first.to_string()));
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
