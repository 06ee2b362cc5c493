//! Analytic references and fixtures: sphere and torus exponential maps,
//! the projection-integration baseline and parametric mesh generators.

mod generators;
mod pi;
mod sphere;
mod torus;

pub use generators::{
    make_annulus, make_cone, make_cylinder, make_disk, make_icosphere, make_mobius, make_plane, make_plane_random,
    make_torus, torus_point,
};
pub use pi::{pi_exp, PI_MAX_ITERATIONS};
pub use sphere::{
    sphere_end_direction, sphere_exp, sphere_jacobian_p_transported, sphere_jacobians, sphere_transport,
};
pub use torus::{torus_exp, TorusState};

use crate::mesh::{Mesh, SurfacePoint};
use crate::Vec3;

/// Maps a mesh point and in-face vector onto the unit sphere: the point is
/// normalised and the vector projected onto its tangent plane, keeping `|v|`.
pub fn to_unit_sphere(mesh: &Mesh, p: &SurfacePoint, v: &Vec3) -> (Vec3, Vec3) {
    let x = mesh.embed(p).normalize();
    let t = v - x * v.dot(&x);
    let n = t.norm();
    let t = if n > 0.0 { t * (v.norm() / n) } else { t };
    (x, t)
}
