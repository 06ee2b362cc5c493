//! Closed-form exponential map of the unit sphere and its Jacobians.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::Vec3;

const TOL: f64 = 1e-10;

fn check(p: &Vec3, v: &Vec3) -> Result<()> {
    if (p.norm() - 1.0).abs() > TOL {
        return Err(Error::NotOnSphere);
    }
    if p.dot(v).abs() > TOL * v.norm().max(1.0) {
        return Err(Error::NotTangent);
    }
    Ok(())
}

/// `cos|v| p + sin|v| v/|v|`, with `p` returned unchanged for `|v| < 1e-12`.
pub fn sphere_exp(p: &Vec3, v: &Vec3) -> Result<Vec3> {
    check(p, v)?;
    let n = v.norm();
    if n < 1e-12 {
        return Ok(*p);
    }
    Ok(p * n.cos() + v * (n.sin() / n))
}

/// Ambient Jacobians `(J_p, J_v)` of the sphere exponential map.
///
/// `J_p = cos|v| I` treats `v` as held fixed in the ambient space.
pub fn sphere_jacobians(p: &Vec3, v: &Vec3) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    check(p, v)?;
    let n = v.norm();
    if n < 1e-12 {
        return Err(Error::DegenerateDirection);
    }
    let (s, c) = n.sin_cos();
    let i = Matrix3::identity();
    let vvt = v * v.transpose();
    let jp = i * c;
    let jv = (i - p * v.transpose()) * (s / n) - vvt * (s / (n * n * n)) + vvt * (c / (n * n));
    Ok((jp, jv))
}

/// Jacobian with respect to `p` when `v` is parallel-transported along the
/// perturbation of `p` instead of being held fixed.
///
/// This is the derivative seen by schemes that move the start point and carry
/// the initial vector with it. With `L = |v|`, `u = v/L` and the end velocity
/// `g = -sin L p + cos L u` it equals `cos L (I - u u^T - p p^T) + g u^T`,
/// restricted to the tangent plane at `p`.
pub fn sphere_jacobian_p_transported(p: &Vec3, v: &Vec3) -> Result<Matrix3<f64>> {
    check(p, v)?;
    let n = v.norm();
    if n < 1e-12 {
        return Err(Error::DegenerateDirection);
    }
    let u = v / n;
    let (s, c) = n.sin_cos();
    let g = -p * s + u * c;
    Ok((Matrix3::identity() - u * u.transpose() - p * p.transpose()) * c + g * u.transpose())
}

/// End velocity (unit) of the great circle started at `p` along `v`.
pub fn sphere_end_direction(p: &Vec3, v: &Vec3) -> Result<Vec3> {
    check(p, v)?;
    let n = v.norm();
    if n < 1e-12 {
        return Err(Error::DegenerateDirection);
    }
    let u = v / n;
    Ok(-p * n.sin() + u * n.cos())
}

/// Parallel transport of `w` from `p` along the great circle of `v`.
pub fn sphere_transport(p: &Vec3, v: &Vec3, w: &Vec3) -> Result<Vec3> {
    check(p, v)?;
    let n = v.norm();
    if n < 1e-12 {
        return Ok(*w);
    }
    let u = v / n;
    let (s, c) = n.sin_cos();
    let a = w.dot(&u);
    Ok(w - u * a + (u * c - p * s) * a)
}
