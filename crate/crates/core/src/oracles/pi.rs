//! Projection Integration: small Euclidean steps followed by closest-point
//! projection onto the mesh. A baseline exponential map with O(F) cost per step.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint};
use crate::tracer::rotate_between;
use crate::Vec3;

/// Upper bound on the number of projection steps of one call.
pub const PI_MAX_ITERATIONS: usize = 10_000_000;

/// Walks `|v|` along the surface in Euclidean steps of length `step`; the last
/// step is shortened so the walked length equals `|v|` exactly.
pub fn pi_exp(mesh: &Mesh, p: &SurfacePoint, v: &Vec3, step: f64) -> Result<SurfacePoint> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("step size must be positive".into()));
    }
    let p = p.validated(mesh.num_faces())?;
    let u0 = mesh.project_to_face_plane(p.face, v);
    let length = u0.norm();
    if length == 0.0 {
        return Ok(p);
    }
    let n_steps = (length / step).ceil();
    if n_steps > PI_MAX_ITERATIONS as f64 {
        return Err(Error::MaxIterations(PI_MAX_ITERATIONS));
    }
    let mut x = mesh.embed(&p);
    let mut u = u0 / length;
    let mut n = mesh.face_normal(p.face);
    let mut q = p;
    let mut walked = 0.0;
    while walked < length {
        let s = step.min(length - walked);
        walked += s;
        let (cp, pos) = mesh.closest_point(&(x + u * s));
        let mut n_new = mesh.face_normal(cp.face);
        if n.dot(&n_new) < 0.0 {
            n_new = -n_new;
        }
        u = rotate_between(&n, &n_new, &u);
        u = (u - n_new * u.dot(&n_new)).normalize();
        n = n_new;
        x = pos;
        q = cp;
    }
    Ok(q)
}
