//! Straightest-geodesic tracing.
//!
//! A trace alternates in-face steps with edge and vertex crossings. At an
//! edge the direction is unfolded across the shared edge; at a vertex the exit
//! ray is chosen so that the angles on both sides of the curve are equal.

mod batch;
mod transport;

pub use batch::{trace_batch, trace_batch_merged, worker_count, TraceRequest};
pub use transport::{
    boundary_continue, geodesic_step, transport_over_edge, transport_over_vertex, BoundaryMove, EdgeUnfold,
    VertexExit,
};
pub(crate) use transport::rotate_between;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Location, Mesh, SurfacePoint};
use crate::Vec3;
use transport::TAU_DIR;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    LengthReached,
    Boundary,
    MaxSteps,
}

#[derive(Clone, Debug, Default)]
pub struct TraceConfig {
    /// Step budget; `None` uses [`default_max_steps`].
    pub max_steps: Option<usize>,
    /// Slide along boundaries instead of stopping at them.
    pub hole_avoidance: bool,
    /// Auxiliary tangent vector at the start, transported to the end point.
    pub transport_payload: Option<Vec3>,
    /// Keep every face-transition point and segment length.
    pub record_path: bool,
}

impl TraceConfig {
    pub fn with_path() -> Self {
        Self { record_path: true, ..Default::default() }
    }
}

/// `10 * sqrt(F) + 100`.
pub fn default_max_steps(num_faces: usize) -> usize {
    (10.0 * (num_faces as f64).sqrt()) as usize + 100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicTrace {
    /// Start point followed by the point reached after every in-face step.
    /// Empty unless the path was recorded.
    pub points: Vec<SurfacePoint>,
    pub segment_lengths: Vec<f64>,
    pub final_point: SurfacePoint,
    /// Unit travel direction at the end point, in the plane of its face.
    /// Zero for a zero-length request.
    pub final_dir: Vec3,
    pub traced_length: f64,
    pub requested_length: f64,
    pub terminated_by: Termination,
    pub payload: Option<Vec3>,
    pub steps: usize,
}

/// Exponential map: traces from `p` along `v` for length `|v|`.
pub fn trace(mesh: &Mesh, p: &SurfacePoint, v: &Vec3, cfg: &TraceConfig) -> Result<GeodesicTrace> {
    trace_with_payload(mesh, p, v, cfg.transport_payload, cfg)
}

/// Convenience wrapper returning only the end point.
pub fn exp_map(mesh: &Mesh, p: &SurfacePoint, v: &Vec3) -> Result<SurfacePoint> {
    Ok(trace(mesh, p, v, &TraceConfig::default())?.final_point)
}

struct Slide {
    resume: Vec3,
    behind: Option<usize>,
}

/// Like [`trace`], with the payload given explicitly (overrides the config's).
pub fn trace_with_payload(
    mesh: &Mesh,
    start: &SurfacePoint,
    v: &Vec3,
    payload: Option<Vec3>,
    cfg: &TraceConfig,
) -> Result<GeodesicTrace> {
    let mut p = start.validated(mesh.num_faces())?;
    let v = mesh.project_to_face_plane(p.face, v);
    let mut payload = payload.map(|w| mesh.project_to_face_plane(p.face, &w));
    let length = v.norm();
    let max_steps = cfg.max_steps.unwrap_or_else(|| default_max_steps(mesh.num_faces())).max(1);

    let mut points = Vec::new();
    let mut segments = Vec::new();
    if cfg.record_path {
        points.push(p);
    }
    if length == 0.0 || !length.is_finite() {
        if !length.is_finite() {
            return Err(Error::InvalidArgument("non-finite direction".into()));
        }
        return Ok(GeodesicTrace {
            points,
            segment_lengths: segments,
            final_point: p,
            final_dir: Vec3::zeros(),
            traced_length: 0.0,
            requested_length: 0.0,
            terminated_by: Termination::LengthReached,
            payload,
            steps: 0,
        });
    }

    let mut d = v / length;
    let mut remaining = length;
    let mut traced = 0.0;
    let mut steps = 0usize;
    let mut ready = false;
    let mut moved = false;
    let mut slide: Option<Slide> = None;

    let terminated_by = loop {
        if remaining <= 0.0 {
            break Termination::LengthReached;
        }
        if steps >= max_steps {
            break Termination::MaxSteps;
        }
        steps += 1;

        let loc = p.classify();
        let mut crossing = None;
        if !ready {
            match loc {
                Location::Interior => {}
                Location::Edge(k) => {
                    let bd = mesh.bary_direction(p.face, &d);
                    let scale = bd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if bd[k] < -TAU_DIR * scale {
                        crossing = Some(loc);
                    }
                }
                Location::Vertex(_) => {
                    if moved || !points_into_face(mesh, &p, &d) {
                        crossing = Some(loc);
                    }
                }
            }
        }
        ready = false;

        match crossing {
            None => {
                let (q, t) = geodesic_step(mesh, &p, &d, remaining)?;
                p = q;
                moved = true;
                traced += t;
                remaining = if t >= remaining { 0.0 } else { remaining - t };
                if cfg.record_path {
                    points.push(p);
                    segments.push(t);
                }
            }
            Some(Location::Edge(k)) => match transport_over_edge(mesh, &p, k, &d) {
                Some((q, nd, unfold)) => {
                    p = q;
                    d = mesh.project_to_face_plane(p.face, &nd).normalize();
                    if let Some(w) = payload.as_mut() {
                        *w = mesh.project_to_face_plane(p.face, &unfold.apply(w));
                    }
                    ready = true;
                }
                None => {
                    if !cfg.hole_avoidance {
                        break Termination::Boundary;
                    }
                    let f = mesh.face(p.face);
                    let (a, b) = (f[(k + 1) % 3], f[(k + 2) % 3]);
                    let e = (mesh.vertex(b) - mesh.vertex(a)).normalize();
                    let (dir, behind) = if d.dot(&e) >= 0.0 { (e, a) } else { (-e, b) };
                    let resume = slide.as_ref().map_or(d, |s| s.resume);
                    slide = Some(Slide { resume, behind: Some(behind) });
                    d = dir;
                    ready = true;
                }
            },
            Some(Location::Vertex(k)) => {
                let vertex = mesh.face(p.face)[k];
                let arriving = moved;
                let attempt = if slide.is_some() {
                    Err(Error::BoundaryHit { vertex })
                } else {
                    transport_over_vertex(mesh, &p, &d, arriving)
                };
                match attempt {
                    Ok(exit) => {
                        if let Some(w) = payload.as_mut() {
                            *w = exit.carry(w, &d);
                        }
                        p = exit.point;
                        d = exit.dir;
                        ready = true;
                    }
                    Err(Error::BoundaryHit { .. }) => {
                        if !cfg.hole_avoidance {
                            break Termination::Boundary;
                        }
                        let resume = slide.as_ref().map_or(d, |s| s.resume);
                        let behind = slide.as_ref().and_then(|s| s.behind);
                        let (exit, next) = match boundary_continue(mesh, &p, &resume, behind)? {
                            BoundaryMove::Resume(exit) => (exit, None),
                            BoundaryMove::Slide { exit, .. } => {
                                (exit, Some(Slide { resume, behind: Some(vertex) }))
                            }
                        };
                        if let Some(w) = payload.as_mut() {
                            *w = rotate_between(&exit.normal_in, &exit.normal_out, w);
                            *w = mesh.project_to_face_plane(exit.point.face, w);
                        }
                        p = exit.point;
                        d = exit.dir;
                        slide = next;
                        ready = true;
                    }
                    Err(e) => return Err(e),
                }
            }
            Some(Location::Interior) => unreachable!(),
        }
    };

    Ok(GeodesicTrace {
        points,
        segment_lengths: segments,
        final_point: p,
        final_dir: d,
        traced_length: traced,
        requested_length: length,
        terminated_by,
        payload,
        steps,
    })
}

/// True if moving along `d` from the vertex point `p` stays inside `p.face`.
fn points_into_face(mesh: &Mesh, p: &SurfacePoint, d: &Vec3) -> bool {
    let bd = mesh.bary_direction(p.face, d);
    let scale = bd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (0..3).all(|i| p.bary[i] > crate::mesh::TAU_CLS || bd[i] >= -TAU_DIR * scale)
}

#[cfg(test)]
mod tests;
