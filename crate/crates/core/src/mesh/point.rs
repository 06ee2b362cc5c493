use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Snap threshold for barycentric classification.
///
/// A coordinate within `TAU_CLS` of 0 counts as lying on an edge, within
/// `TAU_CLS` of 1 as lying on a vertex.
pub const TAU_CLS: f64 = 1e-10;

/// Tolerance accepted on `sum(bary) == 1` when validating user input.
pub const BARY_SUM_TOL: f64 = 1e-9;

/// An intrinsic point on a mesh: a face index plus barycentric coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub face: usize,
    pub bary: [f64; 3],
}

/// Where a surface point sits inside its face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Interior,
    /// On the edge opposite the given local vertex.
    Edge(usize),
    /// On the given local vertex.
    Vertex(usize),
}

impl SurfacePoint {
    pub fn new(face: usize, bary: [f64; 3]) -> Self {
        Self { face, bary }
    }

    /// The point sitting exactly on local vertex `k` of `face`.
    pub fn at_vertex(face: usize, k: usize) -> Self {
        let mut bary = [0.0; 3];
        bary[k] = 1.0;
        Self { face, bary }
    }

    pub fn centroid(face: usize) -> Self {
        Self { face, bary: [1.0 / 3.0; 3] }
    }

    /// Checks the 2-simplex invariant and returns a renormalized copy.
    pub fn validated(&self, face_count: usize) -> Result<Self> {
        if self.face >= face_count {
            return Err(Error::InvalidPoint(format!(
                "face {} out of range (mesh has {face_count} faces)",
                self.face
            )));
        }
        let sum: f64 = self.bary.iter().sum();
        if self.bary.iter().any(|b| !b.is_finite() || *b < -BARY_SUM_TOL)
            || (sum - 1.0).abs() > BARY_SUM_TOL
        {
            return Err(Error::InvalidPoint(format!(
                "barycentric coordinates {:?} are not in the 2-simplex",
                self.bary
            )));
        }
        Ok(Self { face: self.face, bary: normalize_bary(self.bary) })
    }

    pub fn classify(&self) -> Location {
        classify_bary(&self.bary, TAU_CLS)
    }
}

/// Classifies barycentric coordinates with an explicit threshold.
pub fn classify_bary(b: &[f64; 3], tau: f64) -> Location {
    let (imax, bmax) = argmax(b);
    if bmax >= 1.0 - tau {
        return Location::Vertex(imax);
    }
    let (imin, bmin) = argmin(b);
    if bmin <= tau {
        Location::Edge(imin)
    } else {
        Location::Interior
    }
}

pub(crate) fn argmax(b: &[f64; 3]) -> (usize, f64) {
    let mut i = 0;
    for k in 1..3 {
        if b[k] > b[i] {
            i = k;
        }
    }
    (i, b[i])
}

pub(crate) fn argmin(b: &[f64; 3]) -> (usize, f64) {
    let mut i = 0;
    for k in 1..3 {
        if b[k] < b[i] {
            i = k;
        }
    }
    (i, b[i])
}

/// Clamps negatives to zero and rescales so the coordinates sum to one.
pub(crate) fn normalize_bary(b: [f64; 3]) -> [f64; 3] {
    let c = [b[0].max(0.0), b[1].max(0.0), b[2].max(0.0)];
    let s = c[0] + c[1] + c[2];
    [c[0] / s, c[1] / s, c[2] / s]
}

/// A tangent vector anchored at a surface point.
///
/// `dir` is an ambient 3-vector lying in the plane of the anchor face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub anchor: SurfacePoint,
    pub dir: Vec3,
}

impl TangentVector {
    pub fn new(anchor: SurfacePoint, dir: Vec3) -> Self {
        Self { anchor, dir }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_bary(&[1.0, 0.0, 0.0], TAU_CLS), Location::Vertex(0));
        assert_eq!(classify_bary(&[0.0, 0.3, 0.7], TAU_CLS), Location::Edge(0));
        assert_eq!(classify_bary(&[0.2, 0.3, 0.5], TAU_CLS), Location::Interior);
        assert_eq!(classify_bary(&[0.5, 0.5 - 1e-12, 1e-12], TAU_CLS), Location::Edge(2));
        assert_eq!(classify_bary(&[1e-11, 1.0 - 2e-11, 1e-11], TAU_CLS), Location::Vertex(1));
    }

    #[test]
    fn validation_rejects_out_of_simplex() {
        assert!(SurfacePoint::new(0, [0.5, 0.6, -0.1]).validated(1).is_err());
        assert!(SurfacePoint::new(0, [0.5, 0.6, 0.1]).validated(1).is_err());
        assert!(SurfacePoint::new(3, [1.0, 0.0, 0.0]).validated(1).is_err());
        let p = SurfacePoint::new(0, [0.2, 0.3, 0.5]).validated(1).unwrap();
        assert!((p.bary.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_shape() {
        let p = SurfacePoint::new(4, [0.25, 0.25, 0.5]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"face":4,"bary":[0.25,0.25,0.5]}"#);
        let back: SurfacePoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
