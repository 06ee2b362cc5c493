use nalgebra::{Matrix2, Vector2};

use super::{BaryFrame, JacobianPair, Scheme, TangentFrame};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint};
use crate::tracer::{trace_batch, trace_with_payload, GeodesicTrace, Termination, TraceConfig, TraceRequest};
use crate::Vec3;

/// Finite-difference step sizes (lengths on the surface).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GfdConfig {
    pub eps_v: f64,
    pub eps_p: f64,
}

impl GfdConfig {
    pub fn new(eps_v: f64, eps_p: f64) -> Result<Self> {
        if !(eps_v > 0.0 && eps_p > 0.0 && eps_v.is_finite() && eps_p.is_finite()) {
            return Err(Error::InvalidArgument("finite-difference steps must be positive".into()));
        }
        Ok(Self { eps_v, eps_p })
    }

    /// `1e-4` times the mean edge length for both steps.
    pub fn for_mesh(mesh: &Mesh) -> Self {
        Self::edge_scaled(mesh, 1e-4)
    }

    /// Both steps set to `factor` mean edge lengths.
    ///
    /// Curvature of a mesh sits at its vertices. Perturbed geodesics only
    /// feel it when they pass on different sides of a vertex, so steps well
    /// below the edge length give the Jacobian of the flat unfolding along
    /// the base geodesic. Factors near 1 resolve the curvature at the cost
    /// of an `O(eps)` chord error on curved faces.
    pub fn edge_scaled(mesh: &Mesh, factor: f64) -> Self {
        let eps = factor * mesh.mean_edge_length();
        Self { eps_v: eps, eps_p: eps }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    /// Short continuation from the end point along the arrival direction.
    VPar,
    /// Full retrace from `p` with `v + eps e_perp`.
    VPerp,
    /// Move `p` along `u_hat` carrying `v`, then retrace.
    PU,
    /// Same along `v_hat`.
    PV,
}

impl Column {
    fn index(self) -> usize {
        self as usize
    }
}

const V_COLUMNS: [Column; 2] = [Column::VPar, Column::VPerp];
const P_COLUMNS: [Column; 2] = [Column::PU, Column::PV];
const ALL_COLUMNS: [Column; 4] = [Column::VPar, Column::VPerp, Column::PU, Column::PV];

struct State {
    p: SurfacePoint,
    v: Vec3,
    frame_in_v: TangentFrame,
    frame_in_p: BaryFrame,
    base: Option<GeodesicTrace>,
    /// Difference quotients `(x(eps) - x') / eps` in ambient space.
    quotients: [Option<Vec3>; 4],
    degraded: [bool; 4],
}

impl State {
    fn base(&self) -> &GeodesicTrace {
        self.base.as_ref().expect("base trace is computed in the first round")
    }

    fn escaped(&self, t: &GeodesicTrace) -> bool {
        t.terminated_by == Termination::Boundary && self.base().terminated_by != Termination::Boundary
    }
}

type Exec<'a> = dyn Fn(&[TraceRequest]) -> Vec<Result<GeodesicTrace>> + 'a;

fn trace_config() -> TraceConfig {
    TraceConfig::default()
}

/// Request traced from the unperturbed start, if the column has one.
fn seed_request(st: &State, c: Column, cfg: &GfdConfig, sign: f64) -> Option<TraceRequest> {
    match c {
        Column::VPar => None,
        Column::VPerp => Some(TraceRequest::new(st.p, st.v + st.frame_in_v.e_perp * (sign * cfg.eps_v))),
        Column::PU => Some(TraceRequest::with_payload(st.p, st.frame_in_p.u_hat * (sign * cfg.eps_p), st.v)),
        Column::PV => Some(TraceRequest::with_payload(st.p, st.frame_in_p.v_hat * (sign * cfg.eps_p), st.v)),
    }
}

/// Request that depends on the base trace or on the seed trace.
fn dependent_request(st: &State, c: Column, cfg: &GfdConfig, sign: f64, seed: Option<&GeodesicTrace>) -> Option<TraceRequest> {
    match c {
        Column::VPar => {
            let b = st.base();
            let d = b.final_dir.normalize();
            Some(TraceRequest::new(b.final_point, d * (sign * cfg.eps_v)))
        }
        Column::VPerp => None,
        Column::PU | Column::PV => {
            let s = seed?;
            Some(TraceRequest::new(s.final_point, s.payload.unwrap_or(st.v)))
        }
    }
}

fn eps_of(c: Column, cfg: &GfdConfig) -> f64 {
    match c {
        Column::VPar | Column::VPerp => cfg.eps_v,
        Column::PU | Column::PV => cfg.eps_p,
    }
}

/// Evaluates `jobs` with one sign in two traced rounds. Missing base traces
/// are added to the first round. Returns the jobs whose perturbed trace left
/// the mesh.
fn round(
    mesh: &Mesh,
    cfg: &GfdConfig,
    states: &mut [Result<State>],
    jobs: &[(usize, Column)],
    sign: f64,
    exec: &Exec,
) -> Vec<(usize, Column)> {
    // Round 1: base traces and seeds.
    let mut reqs = Vec::new();
    let mut slots: Vec<(usize, Option<Column>)> = Vec::new();
    let mut seen = vec![false; states.len()];
    for &(i, c) in jobs {
        let Ok(st) = &states[i] else { continue };
        if st.base.is_none() && !seen[i] {
            seen[i] = true;
            reqs.push(TraceRequest::new(st.p, st.v));
            slots.push((i, None));
        }
        if let Some(r) = seed_request(st, c, cfg, sign) {
            reqs.push(r);
            slots.push((i, Some(c)));
        }
    }
    let mut seeds: Vec<[Option<GeodesicTrace>; 4]> = vec![Default::default(); states.len()];
    for ((i, c), res) in slots.into_iter().zip(exec(&reqs)) {
        let Ok(st) = &mut states[i] else { continue };
        match (res, c) {
            (Ok(t), None) => st.base = Some(t),
            (Ok(t), Some(c)) => seeds[i][c.index()] = Some(t),
            (Err(e), _) => states[i] = Err(e),
        }
    }

    // Round 2: retraces that depend on round 1.
    let mut escaped = Vec::new();
    let mut reqs = Vec::new();
    let mut slots = Vec::new();
    for &(i, c) in jobs {
        let Ok(st) = &states[i] else { continue };
        let seed = seeds[i][c.index()].as_ref();
        if let Some(s) = seed {
            if st.escaped(s) {
                escaped.push((i, c));
                continue;
            }
        }
        match dependent_request(st, c, cfg, sign, seed) {
            Some(r) => {
                reqs.push(r);
                slots.push((i, c));
            }
            None => {
                let end = mesh.embed(&seed.expect("single-trace column has a seed").final_point);
                let st = states[i].as_mut().ok().expect("checked above");
                let x0 = mesh.embed(&st.base().final_point);
                st.quotients[c.index()] = Some((end - x0) / (sign * eps_of(c, cfg)));
            }
        }
    }
    for ((i, c), res) in slots.into_iter().zip(exec(&reqs)) {
        let Ok(st) = &mut states[i] else { continue };
        match res {
            Ok(t) if st.escaped(&t) => escaped.push((i, c)),
            Ok(t) => {
                let x0 = mesh.embed(&st.base().final_point);
                st.quotients[c.index()] = Some((mesh.embed(&t.final_point) - x0) / (sign * eps_of(c, cfg)));
            }
            Err(e) => states[i] = Err(e),
        }
    }
    escaped.retain(|&(i, _)| states[i].is_ok());
    escaped
}

fn run(
    mesh: &Mesh,
    cfg: &GfdConfig,
    inputs: Vec<(SurfacePoint, Vec3, Option<GeodesicTrace>)>,
    columns: &[Column],
    exec: &Exec,
) -> Vec<Result<State>> {
    let mut states: Vec<Result<State>> = inputs
        .into_iter()
        .map(|(p, v, base)| {
            p.validated(mesh.num_faces())?;
            Ok(State {
                p,
                v,
                frame_in_v: TangentFrame::at(mesh, p, &v)?,
                frame_in_p: BaryFrame::at(mesh, p),
                base,
                quotients: [None; 4],
                degraded: [false; 4],
            })
        })
        .collect();
    let jobs: Vec<(usize, Column)> = (0..states.len())
        .filter(|&i| states[i].is_ok())
        .flat_map(|i| columns.iter().map(move |&c| (i, c)))
        .collect();
    let escaped = round(mesh, cfg, &mut states, &jobs, 1.0, exec);
    for &(i, c) in &escaped {
        if let Ok(st) = &mut states[i] {
            st.degraded[c.index()] = true;
        }
    }
    for (i, _) in round(mesh, cfg, &mut states, &escaped, -1.0, exec) {
        states[i] = Err(Error::PerturbationEscaped);
    }
    states
}

fn project(frame_out: &BaryFrame, st: &State, a: Column, b: Column) -> Matrix2<f64> {
    let col = |c: Column| -> Vector2<f64> { st.quotients[c.index()].map_or(Vector2::zeros(), |q| frame_out.coords(&q)) };
    Matrix2::from_columns(&[col(a), col(b)])
}

fn assemble(mesh: &Mesh, st: State) -> JacobianPair {
    let frame_out = BaryFrame::at(mesh, st.base().final_point);
    JacobianPair {
        scheme: Scheme::Gfd,
        j_v: project(&frame_out, &st, Column::VPar, Column::VPerp),
        j_p: project(&frame_out, &st, Column::PU, Column::PV),
        frame_in_v: st.frame_in_v,
        frame_in_p: st.frame_in_p,
        frame_out,
        rotation_ep: None,
        degraded: st.degraded,
    }
}

fn sequential(mesh: &Mesh) -> impl Fn(&[TraceRequest]) -> Vec<Result<GeodesicTrace>> + '_ {
    let tcfg = trace_config();
    move |reqs| reqs.iter().map(|r| trace_with_payload(mesh, &r.start, &r.dir, r.payload, &tcfg)).collect()
}

fn single(mesh: &Mesh, p: &SurfacePoint, v: &Vec3, trace: &GeodesicTrace, cfg: &GfdConfig, cols: &[Column]) -> Result<State> {
    let exec = sequential(mesh);
    run(mesh, cfg, vec![(*p, *v, Some(trace.clone()))], cols, &exec).pop().expect("one input")
}

/// `J_v` by geodesic finite differences, with the per-column degraded flags.
pub fn gfd_jacobian_v(
    mesh: &Mesh,
    p: &SurfacePoint,
    v: &Vec3,
    trace: &GeodesicTrace,
    cfg: &GfdConfig,
) -> Result<(Matrix2<f64>, [bool; 2])> {
    let st = single(mesh, p, v, trace, cfg, &V_COLUMNS)?;
    let frame_out = BaryFrame::at(mesh, trace.final_point);
    Ok((project(&frame_out, &st, Column::VPar, Column::VPerp), [st.degraded[0], st.degraded[1]]))
}

/// `J_p` by geodesic finite differences: the start point is moved along each
/// edge direction with `v` carried as payload, then the geodesic is retraced.
pub fn gfd_jacobian_p(
    mesh: &Mesh,
    p: &SurfacePoint,
    v: &Vec3,
    trace: &GeodesicTrace,
    cfg: &GfdConfig,
) -> Result<(Matrix2<f64>, [bool; 2])> {
    let st = single(mesh, p, v, trace, cfg, &P_COLUMNS)?;
    let frame_out = BaryFrame::at(mesh, trace.final_point);
    Ok((project(&frame_out, &st, Column::PU, Column::PV), [st.degraded[2], st.degraded[3]]))
}

/// Both GFD Jacobians, tracing one geodesic at a time.
pub fn gfd_jacobians(mesh: &Mesh, p: &SurfacePoint, v: &Vec3, cfg: &GfdConfig) -> Result<JacobianPair> {
    let exec = sequential(mesh);
    let st = run(mesh, cfg, vec![(*p, *v, None)], &ALL_COLUMNS, &exec).pop().expect("one input")?;
    Ok(assemble(mesh, st))
}

/// Same result as [`gfd_jacobians`], with the traces issued as batches.
pub fn gfd_batched(mesh: &Mesh, p: &SurfacePoint, v: &Vec3, cfg: &GfdConfig, workers: Option<usize>) -> Result<JacobianPair> {
    gfd_batched_many(mesh, &[(*p, *v)], cfg, workers).pop().expect("one input")
}

/// GFD Jacobians for many samples. The first batch holds every base trace
/// and seed, the second every dependent retrace; backward differences after
/// an escape take two more batches.
pub fn gfd_batched_many(
    mesh: &Mesh,
    samples: &[(SurfacePoint, Vec3)],
    cfg: &GfdConfig,
    workers: Option<usize>,
) -> Vec<Result<JacobianPair>> {
    let tcfg = trace_config();
    let exec = |reqs: &[TraceRequest]| trace_batch(mesh, reqs, &tcfg, workers);
    let inputs = samples.iter().map(|(p, v)| (*p, *v, None)).collect();
    run(mesh, cfg, inputs, &ALL_COLUMNS, &exec).into_iter().map(|s| s.map(|st| assemble(mesh, st))).collect()
}
