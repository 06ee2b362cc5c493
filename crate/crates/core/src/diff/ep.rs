use nalgebra::{Matrix2, Matrix3x2};

use super::{BaryFrame, JacobianPair, Scheme, TangentFrame};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint};
use crate::tracer::GeodesicTrace;
use crate::Vec3;

/// Extrinsic-proxy Jacobians of `Exp_p(v)` given its forward trace.
///
/// `R = M' M^T` with `M = [e_par e_perp n]` at the start and `M'` built from
/// the transported direction and face normal at the end. `J_v` is `R`
/// restricted to the tangent planes, `J_p = 0`.
pub fn ep_jacobians(mesh: &Mesh, p: &SurfacePoint, v: &Vec3, trace: &GeodesicTrace) -> Result<JacobianPair> {
    if v.norm() < 1e-12 || trace.final_dir.norm() < 1e-12 {
        return Err(Error::DegenerateDirection);
    }
    let frame_in_v = TangentFrame::at(mesh, *p, v)?;
    let end = trace.final_point;
    let frame_end = TangentFrame::at(mesh, end, &trace.final_dir)?;
    let rotation = frame_end.matrix() * frame_in_v.matrix().transpose();
    let frame_out = BaryFrame::at(mesh, end);
    let image = Matrix3x2::from_columns(&[rotation * frame_in_v.e_par, rotation * frame_in_v.e_perp]);
    Ok(JacobianPair {
        scheme: Scheme::Ep,
        j_v: frame_out.pseudo_inverse * image,
        j_p: Matrix2::zeros(),
        frame_in_v,
        frame_in_p: BaryFrame::at(mesh, *p),
        frame_out,
        rotation_ep: Some(rotation),
        degraded: [false; 4],
    })
}
