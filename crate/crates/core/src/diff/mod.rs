//! Jacobians of the exponential map and the chain-rule adapter.
//!
//! Two schemes are provided. The extrinsic proxy (EP) treats the map as the
//! rigid motion taking the start frame to the end frame, so its Jacobian with
//! respect to `v` is that rotation and its Jacobian with respect to `p` is
//! zero. Geodesic finite differences (GFD) retrace geodesics from perturbed
//! initial conditions and project the end-point differences into a local
//! frame at the end point.
//!
//! Coordinates:
//! - `J_v` maps `(a, b)` with `dv = a e_par + b e_perp` (the [`TangentFrame`] at `p`).
//! - `J_p` maps `(a, b)` with `dp = a u_hat + b v_hat` (the [`BaryFrame`] at `p`).
//! - Both return coordinates `c` of the end-point displacement `M c` in the
//!   [`BaryFrame`] at the end point, obtained with `M^+`.

mod ep;
mod gfd;

pub use ep::ep_jacobians;
pub use gfd::{gfd_batched, gfd_batched_many, gfd_jacobian_p, gfd_jacobian_v, gfd_jacobians, GfdConfig};

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Matrix3x2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint};
use crate::Vec3;

/// Orthonormal frame `(e_par, e_perp, normal)` built from a tangent direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub origin: SurfacePoint,
    pub e_par: Vec3,
    pub e_perp: Vec3,
    pub normal: Vec3,
}

impl TangentFrame {
    /// `e_par = dir/|dir|`, `e_perp = normal x e_par`.
    pub fn new(origin: SurfacePoint, dir: &Vec3, normal: &Vec3) -> Result<Self> {
        let d = dir - normal * normal.dot(dir);
        let n = d.norm();
        if n < 1e-12 {
            return Err(Error::DegenerateDirection);
        }
        let e_par = d / n;
        Ok(Self { origin, e_par, e_perp: normal.cross(&e_par), normal: *normal })
    }

    pub fn at(mesh: &Mesh, origin: SurfacePoint, dir: &Vec3) -> Result<Self> {
        Self::new(origin, dir, &mesh.face_normal(origin.face))
    }

    /// Columns `[e_par e_perp normal]`.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.e_par, self.e_perp, self.normal])
    }

    pub fn coords(&self, v: &Vec3) -> Vector2<f64> {
        Vector2::new(v.dot(&self.e_par), v.dot(&self.e_perp))
    }

    pub fn lift(&self, c: &Vector2<f64>) -> Vec3 {
        self.e_par * c.x + self.e_perp * c.y
    }
}

/// Frame of the two unit edge directions leaving vertex 0 of a face, with the
/// Moore-Penrose pseudo-inverse of `M = [u_hat v_hat]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaryFrame {
    pub origin: SurfacePoint,
    pub u_hat: Vec3,
    pub v_hat: Vec3,
    pub pseudo_inverse: Matrix2x3<f64>,
}

impl BaryFrame {
    pub fn at(mesh: &Mesh, origin: SurfacePoint) -> Self {
        let f = mesh.face(origin.face);
        let x0 = mesh.vertex(f[0]);
        let u_hat = (mesh.vertex(f[1]) - x0).normalize();
        let v_hat = (mesh.vertex(f[2]) - x0).normalize();
        let m = Matrix3x2::from_columns(&[u_hat, v_hat]);
        let mtm = m.transpose() * m;
        let pseudo_inverse = mtm.try_inverse().expect("non-degenerate face") * m.transpose();
        Self { origin, u_hat, v_hat, pseudo_inverse }
    }

    pub fn matrix(&self) -> Matrix3x2<f64> {
        Matrix3x2::from_columns(&[self.u_hat, self.v_hat])
    }

    /// Least-squares coordinates of an ambient vector.
    pub fn coords(&self, v: &Vec3) -> Vector2<f64> {
        self.pseudo_inverse * v
    }

    pub fn lift(&self, c: &Vector2<f64>) -> Vec3 {
        self.u_hat * c.x + self.v_hat * c.y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ep,
    Gfd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobianPair {
    pub scheme: Scheme,
    pub j_v: Matrix2<f64>,
    pub j_p: Matrix2<f64>,
    pub frame_in_v: TangentFrame,
    pub frame_in_p: BaryFrame,
    pub frame_out: BaryFrame,
    /// EP only: rotation taking the start frame to the end frame.
    pub rotation_ep: Option<Matrix3<f64>>,
    /// Columns computed from one-sided backward differences after a
    /// perturbed trace left the mesh: `[v_par, v_perp, p_u, p_v]`.
    pub degraded: [bool; 4],
}

impl JacobianPair {
    /// `J_v` with the output expressed in the start frame carried to the end
    /// point (`e_par`, `e_perp` of the end frame). For EP this is exactly `I`.
    pub fn matched_j_v(&self, end_frame: &TangentFrame) -> Matrix2<f64> {
        let m = self.frame_out.matrix();
        let to_end = Matrix2::from_rows(&[
            (m.transpose() * end_frame.e_par).transpose(),
            (m.transpose() * end_frame.e_perp).transpose(),
        ]);
        to_end * self.j_v
    }

    /// Same for `J_p`, with the input taken in the start tangent frame.
    pub fn matched_j_p(&self, end_frame: &TangentFrame) -> Matrix2<f64> {
        let m = self.frame_out.matrix();
        let to_end = Matrix2::from_rows(&[
            (m.transpose() * end_frame.e_par).transpose(),
            (m.transpose() * end_frame.e_perp).transpose(),
        ]);
        let from_start = Matrix2::from_columns(&[
            self.frame_in_p.coords(&self.frame_in_v.e_par),
            self.frame_in_p.coords(&self.frame_in_v.e_perp),
        ]);
        to_end * self.j_p * from_start
    }

    pub fn is_degraded(&self) -> bool {
        self.degraded.iter().any(|&d| d)
    }
}

/// Gradient with respect to the end point, expressed in `frame_out`, from an
/// ambient gradient: `M^T g`.
pub fn gradient_to_frame_out(jac: &JacobianPair, g: &Vec3) -> Vector2<f64> {
    jac.frame_out.matrix().transpose() * g
}

/// Inverse of [`gradient_to_frame_out`] on the tangent plane: `M^+T c`.
pub fn gradient_from_frame_out(jac: &JacobianPair, c: &Vector2<f64>) -> Vec3 {
    jac.frame_out.pseudo_inverse.transpose() * c
}

/// Chain rule through the exponential map: `(J_v^T g, J_p^T g)`.
pub fn pullback(g: &Vector2<f64>, jac: &JacobianPair) -> (Vector2<f64>, Vector2<f64>) {
    (jac.j_v.transpose() * g, jac.j_p.transpose() * g)
}

/// Ambient gradients `(d/dv, d/dp)` of a loss whose ambient gradient at the
/// end point is `g`. The `v` gradient lies in the start tangent frame, the
/// `p` gradient in the start face plane.
pub fn pullback_ambient(g: &Vec3, jac: &JacobianPair) -> (Vec3, Vec3) {
    let (gv, gp) = pullback(&gradient_to_frame_out(jac, g), jac);
    (jac.frame_in_v.lift(&gv), jac.frame_in_p.pseudo_inverse.transpose() * gp)
}
