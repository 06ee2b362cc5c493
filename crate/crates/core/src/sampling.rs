//! Seeded random sampling of surface points and tangent vectors.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint};
use crate::Vec3;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in a triangle from two uniforms (square-root warp).
pub fn uniform_bary<R: Rng>(rng: &mut R) -> [f64; 3] {
    let r1: f64 = rng.gen::<f64>().sqrt();
    let r2: f64 = rng.gen();
    [1.0 - r1, r1 * (1.0 - r2), r1 * r2]
}

/// Area-uniform points on a subset of faces.
pub struct AreaSampler {
    faces: Vec<usize>,
    weights: WeightedIndex<f64>,
}

impl AreaSampler {
    pub fn new(mesh: &Mesh) -> Self {
        Self::on_faces(mesh, (0..mesh.num_faces()).collect()).expect("meshes have positive area")
    }

    pub fn on_faces(mesh: &Mesh, faces: Vec<usize>) -> Result<Self> {
        let weights = WeightedIndex::new(faces.iter().map(|&f| mesh.face_area(f)))
            .map_err(|e| Error::InvalidArgument(format!("cannot sample faces: {e}")))?;
        Ok(Self { faces, weights })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> SurfacePoint {
        let face = self.faces[self.weights.sample(rng)];
        SurfacePoint { face, bary: uniform_bary(rng) }
    }
}

pub fn sample_points<R: Rng>(mesh: &Mesh, n: usize, rng: &mut R) -> Vec<SurfacePoint> {
    let s = AreaSampler::new(mesh);
    (0..n).map(|_| s.sample(rng)).collect()
}

/// Points drawn from the faces nearest a random centre face, covering about
/// `fraction` of the total area.
pub fn sample_clustered<R: Rng>(mesh: &Mesh, n: usize, fraction: f64, rng: &mut R) -> Result<Vec<SurfacePoint>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument("cluster fraction must be in (0, 1]".into()));
    }
    let centroid = |f: usize| mesh.embed(&SurfacePoint::centroid(f));
    let c = centroid(rng.gen_range(0..mesh.num_faces()));
    let mut order: Vec<(f64, usize)> = (0..mesh.num_faces()).map(|f| ((centroid(f) - c).norm(), f)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let target = fraction * mesh.total_area();
    let mut area = 0.0;
    let mut faces = Vec::new();
    for (_, f) in order {
        faces.push(f);
        area += mesh.face_area(f);
        if area >= target {
            break;
        }
    }
    let s = AreaSampler::on_faces(mesh, faces)?;
    Ok((0..n).map(|_| s.sample(rng)).collect())
}

/// Unit vector in the plane of `face` with uniformly distributed angle.
pub fn sample_direction<R: Rng>(mesh: &Mesh, face: usize, rng: &mut R) -> Vec3 {
    let [a, b, _] = mesh.face(face);
    let e1 = (mesh.vertex(b) - mesh.vertex(a)).normalize();
    let e2 = mesh.face_normal(face).cross(&e1);
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    e1 * t.cos() + e2 * t.sin()
}

/// Random start point and tangent vector with length uniform in `[lo, hi)`.
pub fn sample_exp_input<R: Rng>(sampler: &AreaSampler, mesh: &Mesh, lo: f64, hi: f64, rng: &mut R) -> (SurfacePoint, Vec3) {
    let p = sampler.sample(rng);
    let d = sample_direction(mesh, p.face, rng);
    (p, d * rng.gen_range(lo..hi))
}
