//! Geodesics of the smooth torus by fixed-step RK4 on the geodesic ODE.
//!
//! Parametrisation: `F(a, b) = ((R + r cos b) cos a, (R + r cos b) sin a, r sin b)`
//! with metric `diag((R + r cos b)^2, r^2)`.

use crate::error::{Error, Result};
use crate::Vec3;

pub use super::generators::torus_point;

/// Default number of RK4 steps per unit of integrated length is `2048 / length`.
pub const DEFAULT_STEPS: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusState {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
    pub major: f64,
    pub minor: f64,
}

impl TorusState {
    pub fn new(alpha: f64, beta: f64, alpha_dot: f64, beta_dot: f64, major: f64, minor: f64) -> Result<Self> {
        if !(major > minor && minor > 0.0) {
            return Err(Error::InvalidArgument(format!("torus radii must satisfy R > r > 0, got R={major}, r={minor}")));
        }
        Ok(Self { alpha, beta, alpha_dot, beta_dot, major, minor })
    }

    /// Converts an ambient point and tangent vector. The point is first
    /// projected analytically onto the torus; the vector is expressed in the
    /// coordinate basis (its normal component is dropped).
    pub fn from_ambient(x: &Vec3, v: &Vec3, major: f64, minor: f64) -> Result<Self> {
        let alpha = x.y.atan2(x.x);
        let rho = (x.x * x.x + x.y * x.y).sqrt();
        let beta = x.z.atan2(rho - major);
        let (fa, fb) = tangents(alpha, beta, major, minor);
        Self::new(alpha, beta, v.dot(&fa) / fa.norm_squared(), v.dot(&fb) / fb.norm_squared(), major, minor)
    }

    pub fn position(&self) -> Vec3 {
        torus_point(self.alpha, self.beta, self.major, self.minor)
    }

    pub fn velocity(&self) -> Vec3 {
        let (fa, fb) = tangents(self.alpha, self.beta, self.major, self.minor);
        fa * self.alpha_dot + fb * self.beta_dot
    }

    /// Metric norm of the velocity.
    pub fn speed(&self) -> f64 {
        let rho = self.major + self.minor * self.beta.cos();
        ((rho * self.alpha_dot).powi(2) + (self.minor * self.beta_dot).powi(2)).sqrt()
    }

    fn deriv(&self, y: [f64; 4]) -> [f64; 4] {
        let [_, b, ad, bd] = y;
        let (sb, cb) = b.sin_cos();
        let rho = self.major + self.minor * cb;
        [
            ad,
            bd,
            2.0 * self.minor * sb / rho * ad * bd,
            -rho * sb / self.minor * ad * ad,
        ]
    }
}

fn tangents(alpha: f64, beta: f64, major: f64, minor: f64) -> (Vec3, Vec3) {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let rho = major + minor * cb;
    (Vec3::new(-rho * sa, rho * ca, 0.0), Vec3::new(-minor * sb * ca, -minor * sb * sa, minor * cb))
}

/// Integrates the unit-speed geodesic from `state0` for arc length `length`.
///
/// The initial velocity is rescaled to unit metric speed. `step` defaults to
/// `length / 2048`. Fails with `StepTooLarge` if the speed drifts by more
/// than 1e-6 relative.
pub fn torus_exp(state0: &TorusState, length: f64, step: Option<f64>) -> Result<(TorusState, Vec3)> {
    let speed = state0.speed();
    if length == 0.0 || speed == 0.0 {
        return Ok((*state0, state0.position()));
    }
    let mut s = *state0;
    s.alpha_dot /= speed;
    s.beta_dot /= speed;
    let h_req = step.unwrap_or(length / DEFAULT_STEPS as f64);
    let n = (length / h_req).ceil().max(1.0) as usize;
    let h = length / n as f64;
    let mut y = [s.alpha, s.beta, s.alpha_dot, s.beta_dot];
    let add = |y: &[f64; 4], k: &[f64; 4], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3]];
    for _ in 0..n {
        let k1 = s.deriv(y);
        let k2 = s.deriv(add(&y, &k1, 0.5 * h));
        let k3 = s.deriv(add(&y, &k2, 0.5 * h));
        let k4 = s.deriv(add(&y, &k3, h));
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let out = TorusState { alpha: y[0], beta: y[1], alpha_dot: y[2], beta_dot: y[3], ..s };
    let drift = (out.speed() - 1.0).abs();
    if drift > 1e-6 {
        return Err(Error::StepTooLarge(drift));
    }
    Ok((out, out.position()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minor_circle_motion() {
        let s = TorusState::new(0.3, 0.0, 0.0, 1.0, 2.0, 1.0).unwrap();
        let (out, _) = torus_exp(&s, 1.5, None).unwrap();
        assert_eq!(out.alpha, 0.3);
        assert!((out.beta - 1.5).abs() < 1e-12);
    }

    #[test]
    fn outer_equator_is_a_geodesic() {
        let s = TorusState::new(0.0, 0.0, 1.0, 0.0, 2.0, 1.0).unwrap();
        let (out, x) = torus_exp(&s, 2.0, None).unwrap();
        assert_eq!(out.beta, 0.0);
        assert!((out.alpha - 2.0 / 3.0).abs() < 1e-12);
        assert!((x.norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_radii() {
        assert!(TorusState::new(0.0, 0.0, 1.0, 0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn coarse_step_is_rejected() {
        let s = TorusState::new(0.0, 2.5, 0.7, 0.7, 2.0, 1.0).unwrap();
        assert!(matches!(torus_exp(&s, 20.0, Some(2.0)), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn ambient_round_trip() {
        let s = TorusState::new(1.0, 2.0, 0.2, -0.4, 2.0, 1.0).unwrap();
        let back = TorusState::from_ambient(&s.position(), &s.velocity(), 2.0, 1.0).unwrap();
        assert!((back.alpha - 1.0).abs() < 1e-12 && (back.beta - 2.0).abs() < 1e-12);
        assert!((back.alpha_dot - 0.2).abs() < 1e-12 && (back.beta_dot + 0.4).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn speed_conserved_and_reversible(a in 0.0..6.28f64, b in 0.0..6.28f64, th in 0.0..6.28f64, len in 0.1..3.0f64) {
            let rho = 2.0 + b.cos();
            let s = TorusState::new(a, b, th.cos() / rho, th.sin(), 2.0, 1.0).unwrap();
            let (out, _) = torus_exp(&s, len, None).unwrap();
            prop_assert!((out.speed() - 1.0).abs() < 1e-8);
            let rev = TorusState { alpha_dot: -out.alpha_dot, beta_dot: -out.beta_dot, ..out };
            let (back, x) = torus_exp(&rev, len, None).unwrap();
            prop_assert!((x - s.position()).norm() < 1e-6);
            prop_assert!((back.alpha - a).abs() < 1e-6 && (back.beta - b).abs() < 1e-6);
        }
    }
}
