//! Optimisation over sets of surface points: geodesic centroidal Voronoi
//! tessellation energies, Lloyd iterations and a Riemannian L-BFGS on the
//! product manifold of seeds.

mod lbfgs;
mod lloyd;
mod voronoi;

pub use lbfgs::{desc, inner, mesh_lbfgs, LbfgsConfig, LbfgsMemory, LbfgsRun, LbfgsStatus, LbfgsStep, Transport};
pub use lloyd::{lloyd, lloyd_step, LloydConfig};
pub use voronoi::{gcvt_energy, karcher_direction, voronoi, VoronoiPartition};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint};
use crate::tracer::{trace_batch, TraceConfig, TraceRequest};
use crate::Vec3;

/// A point on the product manifold `M^S`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSet {
    pub seeds: Vec<SurfacePoint>,
}

impl SeedSet {
    pub fn new(mesh: &Mesh, seeds: Vec<SurfacePoint>) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::InvalidArgument("empty seed set".into()));
        }
        for s in &seeds {
            s.validated(mesh.num_faces())?;
        }
        Ok(Self { seeds })
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// Value and (surrogate) gradient of an objective on `M^S`. Every call to
/// [`Objective::evaluate`] counts as one function call.
pub trait Objective {
    /// Returns `f(S)` and one tangent vector per seed, each in its seed's face plane.
    fn evaluate(&self, seeds: &[SurfacePoint]) -> Result<(f64, Vec<Vec3>)>;
}

/// GCVT energy with the negated Karcher directions as gradient. Empty cells
/// contribute a zero direction.
pub struct GcvtObjective<'a> {
    pub mesh: &'a Mesh,
}

impl Objective for GcvtObjective<'_> {
    fn evaluate(&self, seeds: &[SurfacePoint]) -> Result<(f64, Vec<Vec3>)> {
        let part = voronoi(self.mesh, seeds)?;
        let grad = (0..seeds.len())
            .map(|i| match karcher_direction(self.mesh, &part, seeds, i) {
                Ok(t) => Ok(-t.dir),
                Err(Error::EmptyCell(_)) => Ok(Vec3::zeros()),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        Ok((gcvt_energy(self.mesh, &part), grad))
    }
}

/// `Exp_S(V)` seed by seed, with the parallel transport along each geodesic.
///
/// The transport of seed `i` is the rotation taking `[d, n x d, n]` at the
/// start onto the traced direction, the transported `n x d` and the face
/// normal at the end (`d` the unit step direction).
pub fn exp_seeds(mesh: &Mesh, seeds: &[SurfacePoint], steps: &[Vec3]) -> Result<(Vec<SurfacePoint>, Transport)> {
    let mut requests = Vec::with_capacity(seeds.len());
    let mut frames = Vec::with_capacity(seeds.len());
    for (s, v) in seeds.iter().zip(steps) {
        let n = mesh.face_normal(s.face);
        let v = mesh.project_to_face_plane(s.face, v);
        let len = v.norm();
        if len > 0.0 {
            let d = v / len;
            let w = n.cross(&d);
            frames.push(Some((d, w, n)));
            requests.push(TraceRequest::with_payload(*s, v, w));
        } else {
            frames.push(None);
            requests.push(TraceRequest::new(*s, v));
        }
    }
    let results = trace_batch(mesh, &requests, &TraceConfig::default(), None);
    let mut out = Vec::with_capacity(seeds.len());
    let mut mats = Vec::with_capacity(seeds.len());
    for ((r, frame), s) in results.into_iter().zip(frames).zip(seeds) {
        let t = r?;
        match frame {
            Some((d, w, n)) if t.final_dir.norm() > 0.0 => {
                let n1 = mesh.face_normal(t.final_point.face);
                let w1 = t.payload.unwrap_or(w);
                let from = nalgebra::Matrix3::from_columns(&[d, w, n]);
                let to = nalgebra::Matrix3::from_columns(&[t.final_dir, w1, n1]);
                mats.push(to * from.transpose());
                out.push(t.final_point);
            }
            _ => {
                mats.push(nalgebra::Matrix3::identity());
                out.push(*s);
            }
        }
    }
    Ok((out, Transport { mats }))
}
