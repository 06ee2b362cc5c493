//! Evaluation harnesses: comparisons against analytic references, gradient
//! checks, timings and optimiser comparisons. The command-line tool and the
//! acceptance tests are thin wrappers around these.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{ep_jacobians, gfd_batched_many, pullback_ambient, GfdConfig, JacobianPair, Scheme};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint};
use crate::opt::{lloyd, mesh_lbfgs, GcvtObjective, LbfgsConfig, LloydConfig, SeedSet};
use crate::oracles::{
    pi_exp, sphere_exp, sphere_jacobian_p_transported, sphere_jacobians, to_unit_sphere, torus_exp, TorusState,
};
use crate::sampling::{rng, sample_clustered, sample_direction, sample_exp_input, sample_points, AreaSampler};
use crate::tracer::{trace_batch, worker_count, GeodesicTrace, TraceConfig, TraceRequest};
use crate::Vec3;

/// Default range of sampled vector lengths.
pub const LENGTH_RANGE: (f64, f64) = (0.1, FRAC_PI_2);

/// Linear-interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub median_s: f64,
    pub p25_s: f64,
    pub p75_s: f64,
}

/// Runs `f` `reps` times and summarises the wall times.
pub fn time_repeated<F: FnMut()>(reps: usize, mut f: F) -> TimingStats {
    let mut t: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64().max(1e-12)
        })
        .collect();
    t.sort_by(f64::total_cmp);
    TimingStats { median_s: quantile(&t, 0.5), p25_s: quantile(&t, 0.25), p75_s: quantile(&t, 0.75) }
}

/// Random `(p, v)` pairs with `|v|` uniform in `range`.
pub fn sample_inputs(mesh: &Mesh, n: usize, range: (f64, f64), seed: u64) -> Vec<(SurfacePoint, Vec3)> {
    let sampler = AreaSampler::new(mesh);
    let mut r = rng(seed);
    (0..n).map(|_| sample_exp_input(&sampler, mesh, range.0, range.1, &mut r)).collect()
}

fn requests(inputs: &[(SurfacePoint, Vec3)]) -> Vec<TraceRequest> {
    inputs.iter().map(|(p, v)| TraceRequest::new(*p, *v)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub surface: String,
    pub faces: usize,
    pub samples: usize,
    pub failures: usize,
    pub mean_error: f64,
    pub median_error: f64,
    pub max_error: f64,
    /// Projection integration against the same reference, on the first `pi_samples` inputs.
    pub pi_samples: usize,
    pub pi_mean_error: Option<f64>,
    /// Largest distance between projection-integration and traced end points.
    pub pi_vs_traced_max: Option<f64>,
    /// Largest end-point difference between one worker and all workers.
    pub parallel_max_deviation: f64,
    pub parallel_bitwise_equal: bool,
}

fn compare(
    mesh: &Mesh,
    surface: &str,
    inputs: &[(SurfacePoint, Vec3)],
    reference: impl Fn(&SurfacePoint, &Vec3) -> Result<Vec3>,
    pi_samples: usize,
    pi_step_fraction: f64,
    workers: Option<usize>,
) -> Result<OracleReport> {
    let cfg = TraceConfig::default();
    let reqs = requests(inputs);
    let serial = trace_batch(mesh, &reqs, &cfg, Some(1));
    let parallel = trace_batch(mesh, &reqs, &cfg, Some(worker_count(workers)));
    let mut deviation = 0.0f64;
    let mut bitwise = true;
    for (a, b) in serial.iter().zip(&parallel) {
        match (a, b) {
            (Ok(a), Ok(b)) => {
                bitwise &= a == b;
                deviation = deviation.max((mesh.embed(&a.final_point) - mesh.embed(&b.final_point)).norm());
            }
            (Err(_), Err(_)) => {}
            _ => bitwise = false,
        }
    }
    let mut errors = Vec::new();
    let mut failures = 0;
    let mut ends = Vec::with_capacity(inputs.len());
    for ((p, v), t) in inputs.iter().zip(&serial) {
        match (t, reference(p, v)) {
            (Ok(t), Ok(x)) => {
                let e = mesh.embed(&t.final_point);
                errors.push((e - x).norm());
                ends.push(Some((e, x)));
            }
            _ => {
                failures += 1;
                ends.push(None);
            }
        }
    }
    let (mut pi_err, mut pi_gap) = (Vec::new(), 0.0f64);
    for ((p, v), end) in inputs.iter().zip(&ends).take(pi_samples) {
        if let Some((traced, exact)) = end {
            let q = mesh.embed(&pi_exp(mesh, p, v, pi_step_fraction * v.norm())?);
            pi_err.push((q - exact).norm());
            pi_gap = pi_gap.max((q - traced).norm());
        }
    }
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(OracleReport {
        surface: surface.to_string(),
        faces: mesh.num_faces(),
        samples: inputs.len(),
        failures,
        mean_error: mean(&errors),
        median_error: quantile(&sorted, 0.5),
        max_error: sorted.last().copied().unwrap_or(f64::NAN),
        pi_samples: pi_err.len(),
        pi_mean_error: (!pi_err.is_empty()).then(|| mean(&pi_err)),
        pi_vs_traced_max: (!pi_err.is_empty()).then_some(pi_gap),
        parallel_max_deviation: deviation,
        parallel_bitwise_equal: bitwise,
    })
}

/// Traced end points against the unit-sphere exponential map. Inputs are
/// moved to the sphere by normalising the point and projecting `v` onto its
/// tangent plane.
pub fn sphere_compare(
    mesh: &Mesh,
    samples: usize,
    seed: u64,
    pi_samples: usize,
    workers: Option<usize>,
) -> Result<OracleReport> {
    let inputs = sample_inputs(mesh, samples, LENGTH_RANGE, seed);
    compare(
        mesh,
        "sphere",
        &inputs,
        |p, v| {
            let (x, u) = to_unit_sphere(mesh, p, v);
            sphere_exp(&x, &u)
        },
        pi_samples,
        1e-3,
        workers,
    )
}

/// Traced end points against RK4 geodesics of the smooth torus.
pub fn torus_compare(mesh: &Mesh, major: f64, minor: f64, samples: usize, seed: u64, workers: Option<usize>) -> Result<OracleReport> {
    let inputs = sample_inputs(mesh, samples, LENGTH_RANGE, seed);
    compare(
        mesh,
        "torus",
        &inputs,
        |p, v| {
            let s = TorusState::from_ambient(&mesh.embed(p), v, major, minor)?;
            Ok(torus_exp(&s, v.norm(), None)?.1)
        },
        0,
        1e-3,
        workers,
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradRecord {
    pub face: usize,
    pub bary: [f64; 3],
    pub length: f64,
    pub cos_v: f64,
    pub ratio_v: f64,
    /// Against `J_p = cos|v| I` (v held fixed in space).
    pub cos_p: Option<f64>,
    pub ratio_p: Option<f64>,
    /// Against the closed form with `v` carried along the perturbation of `p`.
    pub cos_p_transported: Option<f64>,
    pub ratio_p_transported: Option<f64>,
    pub grad_p_norm: f64,
    pub degraded: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradSummary {
    pub scheme: Scheme,
    pub samples: usize,
    pub failures: usize,
    pub median_cos_v: f64,
    pub median_ratio_v: f64,
    pub median_cos_p: Option<f64>,
    pub median_ratio_p: Option<f64>,
    pub median_cos_p_transported: Option<f64>,
    pub median_ratio_p_transported: Option<f64>,
    pub max_grad_p_norm: f64,
    pub degraded: usize,
}

fn cosine(a: &Vec3, b: &Vec3) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}

fn median_of(records: &[GradRecord], f: impl Fn(&GradRecord) -> Option<f64>) -> Option<f64> {
    let v: Vec<f64> = records.iter().filter_map(f).collect();
    (!v.is_empty()).then(|| median(&v))
}

/// Gradient check of `L = |Exp_p(v) - q|^2` on a mesh of the unit sphere.
///
/// The target is `q = Exp_p(w)` with `w` drawn like `v`. Mesh gradients come
/// from the chosen Jacobian scheme and the chain rule; references from the
/// closed-form sphere Jacobians.
pub fn sphere_gradcheck(
    mesh: &Mesh,
    scheme: Scheme,
    samples: usize,
    seed: u64,
    gfd: &GfdConfig,
    workers: Option<usize>,
) -> Result<(Vec<GradRecord>, GradSummary)> {
    let inputs = sample_inputs(mesh, samples, LENGTH_RANGE, seed);
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let targets: Vec<Vec3> = inputs
        .iter()
        .map(|(p, _)| {
            let w = sample_direction(mesh, p.face, &mut r) * r.gen_range(LENGTH_RANGE.0..LENGTH_RANGE.1);
            let (x, w) = to_unit_sphere(mesh, p, &w);
            sphere_exp(&x, &w)
        })
        .collect::<Result<_>>()?;
    let traces = trace_batch(mesh, &requests(&inputs), &TraceConfig::default(), workers);
    let jacobians: Vec<Result<JacobianPair>> = match scheme {
        Scheme::Gfd => gfd_batched_many(mesh, &inputs, gfd, workers),
        Scheme::Ep => inputs
            .iter()
            .zip(&traces)
            .map(|((p, v), t)| match t {
                Ok(t) => ep_jacobians(mesh, p, v, t),
                Err(e) => Err(Error::InvalidArgument(e.to_string())),
            })
            .collect(),
    };
    let mut records = Vec::new();
    let mut failures = 0;
    for ((((p, v), q), t), jac) in inputs.iter().zip(&targets).zip(&traces).zip(jacobians) {
        let (Ok(t), Ok(jac)) = (t, jac) else {
            failures += 1;
            continue;
        };
        let g = (mesh.embed(&t.final_point) - q) * 2.0;
        let (gv, gp) = pullback_ambient(&g, &jac);
        let (x, u) = to_unit_sphere(mesh, p, v);
        let (jp, jv) = sphere_jacobians(&x, &u)?;
        let jpt = sphere_jacobian_p_transported(&x, &u)?;
        let gs = (sphere_exp(&x, &u)? - q) * 2.0;
        let tangent = |y: Vec3| y - x * y.dot(&x);
        let rv = tangent(jv.transpose() * gs);
        let rp = tangent(jp.transpose() * gs);
        let rpt = tangent(jpt.transpose() * gs);
        let with_p = scheme == Scheme::Gfd;
        records.push(GradRecord {
            face: p.face,
            bary: p.bary,
            length: v.norm(),
            cos_v: cosine(&gv, &rv),
            ratio_v: gv.norm() / rv.norm(),
            cos_p: with_p.then(|| cosine(&gp, &rp)),
            ratio_p: with_p.then(|| gp.norm() / rp.norm()),
            cos_p_transported: with_p.then(|| cosine(&gp, &rpt)),
            ratio_p_transported: with_p.then(|| gp.norm() / rpt.norm()),
            grad_p_norm: gp.norm(),
            degraded: jac.is_degraded(),
        });
    }
    let summary = GradSummary {
        scheme,
        samples,
        failures,
        median_cos_v: median_of(&records, |r| Some(r.cos_v)).unwrap_or(f64::NAN),
        median_ratio_v: median_of(&records, |r| Some(r.ratio_v)).unwrap_or(f64::NAN),
        median_cos_p: median_of(&records, |r| r.cos_p),
        median_ratio_p: median_of(&records, |r| r.ratio_p),
        median_cos_p_transported: median_of(&records, |r| r.cos_p_transported),
        median_ratio_p_transported: median_of(&records, |r| r.ratio_p_transported),
        max_grad_p_norm: records.iter().map(|r| r.grad_p_norm).fold(0.0, f64::max),
        degraded: records.iter().filter(|r| r.degraded).count(),
    };
    Ok((records, summary))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub mesh: String,
    pub faces: usize,
    pub batch: usize,
    pub backend: String,
    pub median_s: f64,
    pub p25_s: f64,
    pub p75_s: f64,
    pub per_trace_s: f64,
}

impl BenchmarkRecord {
    fn new(mesh: &str, faces: usize, batch: usize, backend: &str, t: TimingStats) -> Self {
        Self {
            mesh: mesh.to_string(),
            faces,
            batch,
            backend: backend.to_string(),
            median_s: t.median_s,
            p25_s: t.p25_s,
            p75_s: t.p75_s,
            per_trace_s: t.median_s / batch.max(1) as f64,
        }
    }
}

/// Wall time of one `trace_batch` call over `batch` random inputs.
pub fn benchmark_trace(mesh: &Mesh, id: &str, batch: usize, reps: usize, seed: u64, workers: Option<usize>) -> BenchmarkRecord {
    let reqs = requests(&sample_inputs(mesh, batch, LENGTH_RANGE, seed));
    let cfg = TraceConfig::default();
    let t = time_repeated(reps, || {
        std::hint::black_box(trace_batch(mesh, &reqs, &cfg, workers));
    });
    BenchmarkRecord::new(id, mesh.num_faces(), batch, "straightest", t)
}

/// Wall time of projection integration with step `1e-3 |v|` over `batch` inputs.
pub fn benchmark_pi(mesh: &Mesh, id: &str, batch: usize, reps: usize, seed: u64) -> BenchmarkRecord {
    let inputs = sample_inputs(mesh, batch, LENGTH_RANGE, seed);
    let t = time_repeated(reps, || {
        for (p, v) in &inputs {
            let _ = std::hint::black_box(pi_exp(mesh, p, v, 1e-3 * v.norm()));
        }
    });
    BenchmarkRecord::new(id, mesh.num_faces(), batch, "projection", t)
}

/// Forward plus backward time of each Jacobian scheme on the same inputs.
/// EP traces the batch and builds frames; GFD runs its batched traces.
pub fn benchmark_schemes(
    mesh: &Mesh,
    id: &str,
    batch: usize,
    reps: usize,
    seed: u64,
    workers: Option<usize>,
) -> (BenchmarkRecord, BenchmarkRecord) {
    let inputs = sample_inputs(mesh, batch, LENGTH_RANGE, seed);
    let reqs = requests(&inputs);
    let cfg = TraceConfig::default();
    let gfd = GfdConfig::for_mesh(mesh);
    let ep = time_repeated(reps, || {
        let traces: Vec<Result<GeodesicTrace>> = trace_batch(mesh, &reqs, &cfg, workers);
        let jac: Vec<_> = inputs
            .iter()
            .zip(&traces)
            .map(|((p, v), t)| t.as_ref().ok().map(|t| ep_jacobians(mesh, p, v, t)))
            .collect();
        std::hint::black_box(jac);
    });
    let gfd_t = time_repeated(reps, || {
        std::hint::black_box(gfd_batched_many(mesh, &inputs, &gfd, workers));
    });
    (BenchmarkRecord::new(id, mesh.num_faces(), batch, "ep", ep), BenchmarkRecord::new(id, mesh.num_faces(), batch, "gfd", gfd_t))
}

/// Least-squares fit `y = a + b x`; returns `(a, b, r2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - my).powi(2)).sum();
    (a, b, 1.0 - ss_res / ss_tot)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedInit {
    Uniform,
    Clustered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lloyd,
    Lbfgs,
}

/// One point of an optimisation curve.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GcvtRow {
    pub run: usize,
    pub method: Method,
    pub iteration: usize,
    pub energy: f64,
    pub calls: usize,
}

/// Fraction of the surface area covered by clustered initial seeds.
pub const CLUSTER_FRACTION: f64 = 0.1;

pub fn initial_seeds(mesh: &Mesh, n: usize, init: SeedInit, seed: u64) -> Result<SeedSet> {
    let mut r = rng(seed);
    let pts = match init {
        SeedInit::Uniform => sample_points(mesh, n, &mut r),
        SeedInit::Clustered => sample_clustered(mesh, n, CLUSTER_FRACTION, &mut r)?,
    };
    SeedSet::new(mesh, pts)
}

/// Energy curve of one method from the given seeds, with default rates.
pub fn gcvt_curve(mesh: &Mesh, seeds: &SeedSet, method: Method, iterations: usize, run: usize) -> Result<Vec<GcvtRow>> {
    let obj = GcvtObjective { mesh };
    Ok(match method {
        Method::Lloyd => {
            let (_, energies) = lloyd(mesh, &obj, seeds, &LloydConfig { rate: 1.0, iterations })?;
            energies
                .into_iter()
                .enumerate()
                .map(|(iteration, energy)| GcvtRow { run, method, iteration, energy, calls: iteration + 1 })
                .collect()
        }
        Method::Lbfgs => {
            let out = mesh_lbfgs(mesh, &obj, seeds, &LbfgsConfig { iterations, ..Default::default() })?;
            out.trajectory
                .iter()
                .enumerate()
                .map(|(iteration, s)| GcvtRow { run, method, iteration, energy: s.energy, calls: s.calls })
                .collect()
        }
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GcvtComparison {
    pub runs: usize,
    pub median_final_lloyd: f64,
    pub median_final_lbfgs: f64,
    /// Calls Lloyd needs to first reach its own final energy.
    pub median_calls_lloyd: f64,
    /// Calls L-BFGS needs to first reach Lloyd's final energy (infinite if never).
    pub median_calls_lbfgs: f64,
}

/// Runs both methods from the same seeds and summarises the curves.
pub fn gcvt_compare(
    mesh: &Mesh,
    n: usize,
    init: SeedInit,
    runs: usize,
    iterations: usize,
    seed: u64,
) -> Result<(Vec<GcvtRow>, GcvtComparison)> {
    let mut rows = Vec::new();
    let (mut fl, mut fb, mut cl, mut cb) = (vec![], vec![], vec![], vec![]);
    for run in 0..runs {
        let s0 = initial_seeds(mesh, n, init, seed.wrapping_add(run as u64))?;
        let l = gcvt_curve(mesh, &s0, Method::Lloyd, iterations, run)?;
        let b = gcvt_curve(mesh, &s0, Method::Lbfgs, iterations, run)?;
        let target = l.last().expect("curves are non-empty").energy;
        let first_at = |c: &[GcvtRow]| c.iter().find(|r| r.energy <= target).map_or(f64::INFINITY, |r| r.calls as f64);
        fl.push(target);
        fb.push(b.last().expect("curves are non-empty").energy);
        cl.push(first_at(&l));
        cb.push(first_at(&b));
        rows.extend(l);
        rows.extend(b);
    }
    let summary = GcvtComparison {
        runs,
        median_final_lloyd: median(&fl),
        median_final_lbfgs: median(&fb),
        median_calls_lloyd: median(&cl),
        median_calls_lbfgs: median(&cb),
    };
    Ok((rows, summary))
}
