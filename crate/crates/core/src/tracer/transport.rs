//! Single-step primitives: in-face motion, edge unfolding, vertex crossing and
//! boundary continuation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{normalize_bary, Location, Mesh, SurfacePoint, Wedge, TAU_CLS};
use crate::Vec3;

/// Relative threshold under which a barycentric direction component is treated as zero.
pub(crate) const TAU_DIR: f64 = 1e-9;

/// Moves from `p` along the unit in-plane direction `d` until the first edge
/// of the current face is reached or `remaining` is used up.
///
/// Coordinates already at zero are not candidates for the exit, so a point on
/// an edge with `d` pointing inward (or along the edge) advances normally.
/// Returns the new point and the ambient length travelled.
pub fn geodesic_step(mesh: &Mesh, p: &SurfacePoint, d: &Vec3, remaining: f64) -> Result<(SurfacePoint, f64)> {
    let b = p.bary;
    let bd = mesh.bary_direction(p.face, d);
    let scale = bd.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut t_exit = f64::INFINITY;
    let mut i_exit = 3;
    for i in 0..3 {
        if b[i] > TAU_CLS && bd[i] < -TAU_DIR * scale {
            let t = -b[i] / bd[i];
            if t < t_exit {
                t_exit = t;
                i_exit = i;
            }
        }
    }
    if !(t_exit.is_finite() && t_exit > 0.0) {
        return Err(Error::NumericalStall { face: p.face });
    }
    let t = t_exit.min(remaining);
    let mut nb = [b[0] + t * bd[0], b[1] + t * bd[1], b[2] + t * bd[2]];
    if t == t_exit {
        nb[i_exit] = 0.0;
    }
    for c in nb.iter_mut() {
        if *c <= TAU_CLS {
            *c = 0.0;
        }
    }
    Ok((SurfacePoint::new(p.face, normalize_bary(nb)), t))
}

/// Isometry unfolding the plane of one face onto the plane of its neighbour
/// across a shared edge.
///
/// It fixes the edge direction and sends the inward normal of the source face
/// to the outward normal of the target face. On consistently oriented meshes
/// this is the rotation about the edge by the dihedral angle; it needs no
/// orientation and therefore also works on non-orientable meshes.
#[derive(Clone, Copy, Debug)]
pub struct EdgeUnfold {
    pub edge_dir: Vec3,
    pub inward_src: Vec3,
    pub inward_dst: Vec3,
}

impl EdgeUnfold {
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.edge_dir * v.dot(&self.edge_dir) - self.inward_dst * v.dot(&self.inward_src)
    }
}

fn inward(mesh: &Mesh, face: usize, k: usize, a: &Vec3, e: &Vec3) -> Vec3 {
    let x = mesh.vertex(mesh.face(face)[k]) - a;
    (x - e * x.dot(e)).normalize()
}

/// Re-expresses a point on local edge `k` of `p.face` in the adjacent face and
/// unfolds `d` across the edge. Returns `None` on a boundary edge.
pub fn transport_over_edge(mesh: &Mesh, p: &SurfacePoint, k: usize, d: &Vec3) -> Option<(SurfacePoint, Vec3, EdgeUnfold)> {
    let link = mesh.neighbor(p.face, k)?;
    let f = mesh.face(p.face);
    let g = mesh.face(link.face);
    let (ia, ib) = ((k + 1) % 3, (k + 2) % 3);
    let (va, vb) = (f[ia], f[ib]);
    let xa = mesh.vertex(va);
    let e = (mesh.vertex(vb) - xa).normalize();
    let unfold = EdgeUnfold {
        edge_dir: e,
        inward_src: inward(mesh, p.face, k, &xa, &e),
        inward_dst: inward(mesh, link.face, link.edge, &xa, &e),
    };
    let mut nb = [0.0; 3];
    for j in 0..3 {
        if g[j] == va {
            nb[j] = p.bary[ia];
        } else if g[j] == vb {
            nb[j] = p.bary[ib];
        }
    }
    let q = SurfacePoint::new(link.face, normalize_bary(nb));
    Some((q, unfold.apply(d), unfold))
}

/// Orthonormal chart of one wedge: `ea` points to the wedge's `from` vertex,
/// `perp` completes it towards `to`, `normal` follows the fan orientation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct WedgeChart {
    pub ea: Vec3,
    pub perp: Vec3,
    pub normal: Vec3,
}

impl WedgeChart {
    pub fn new(mesh: &Mesh, center: usize, w: &Wedge) -> Self {
        let x0 = mesh.vertex(center);
        let ea = (mesh.vertex(w.from) - x0).normalize();
        let eb = mesh.vertex(w.to) - x0;
        let perp = (eb - ea * eb.dot(&ea)).normalize();
        Self { ea, perp, normal: ea.cross(&perp) }
    }

    /// Angle of an in-plane vector measured from `ea` towards `perp`.
    pub fn angle_of(&self, u: &Vec3) -> f64 {
        u.dot(&self.perp).atan2(u.dot(&self.ea))
    }

    pub fn direction(&self, beta: f64) -> Vec3 {
        self.ea * beta.cos() + self.perp * beta.sin()
    }
}

/// Result of crossing a vertex.
#[derive(Clone, Copy, Debug)]
pub struct VertexExit {
    pub point: SurfacePoint,
    pub dir: Vec3,
    /// Fan-oriented normal of the entry wedge.
    pub normal_in: Vec3,
    /// Fan-oriented normal of the exit wedge.
    pub normal_out: Vec3,
}

impl VertexExit {
    /// Carries an auxiliary vector across the vertex keeping its angle to the
    /// travel direction, which is the normalized-angle rule on the two flat
    /// faces on either side of the vertex.
    pub fn carry(&self, w: &Vec3, d_in: &Vec3) -> Vec3 {
        let a = w.dot(d_in);
        let b = w.dot(&self.normal_in.cross(d_in));
        self.dir * a + self.normal_out.cross(&self.dir) * b
    }
}

fn wrap(phi: f64, total: f64) -> f64 {
    let r = phi.rem_euclid(total);
    if r >= total {
        0.0
    } else {
        r
    }
}

fn wedge_at(wedges: &[Wedge], phi: f64) -> usize {
    wedges.iter().rposition(|w| w.start <= phi).unwrap_or(0)
}

fn entry_wedge(mesh: &Mesh, p: &SurfacePoint) -> Option<(usize, usize)> {
    let v = match p.classify() {
        Location::Vertex(k) => mesh.face(p.face)[k],
        _ => return None,
    };
    let idx = mesh.fan(v).position(p.face)?;
    Some((v, idx))
}

/// Crosses the vertex that `p` sits on.
///
/// With `arriving` set, `d` is the direction the trace came in with and the
/// exit is chosen so the angles on the left and right of the curve are equal,
/// i.e. half the total vertex angle away from the incoming ray. Otherwise the
/// trace departs from the vertex and `d` is placed in the fan chart as is.
///
/// On an open fan the incoming ray is continued by a flat half turn in
/// whichever sense stays inside the fan; if neither does the result is
/// `BoundaryHit`.
pub fn transport_over_vertex(mesh: &Mesh, p: &SurfacePoint, d: &Vec3, arriving: bool) -> Result<VertexExit> {
    let (v, idx) = entry_wedge(mesh, p).ok_or(Error::InvalidPoint("not on a vertex".into()))?;
    let fan = mesh.fan(v);
    let w_in = &fan.wedges[idx];
    let chart_in = WedgeChart::new(mesh, v, w_in);
    let total = fan.total();
    let tol = 1e-12 * total.max(1.0);
    let inside = |phi: f64| phi >= -tol && phi <= total + tol;
    let phi = if fan.closed {
        if arriving {
            wrap(w_in.start + chart_in.angle_of(&(-d)) + 0.5 * total, total)
        } else {
            wrap(w_in.start + chart_in.angle_of(d), total)
        }
    } else {
        let candidates = if arriving {
            let back = w_in.start + chart_in.angle_of(&(-d));
            [back + PI, back - PI]
        } else {
            let ahead = w_in.start + chart_in.angle_of(d);
            [ahead, ahead]
        };
        let phi = candidates.into_iter().find(|&phi| inside(phi)).ok_or(Error::BoundaryHit { vertex: v })?;
        phi.clamp(0.0, total)
    };
    let j = wedge_at(&fan.wedges, phi);
    let w_out = &fan.wedges[j];
    let chart_out = WedgeChart::new(mesh, v, w_out);
    let beta = (phi - w_out.start).clamp(0.0, w_out.angle);
    Ok(VertexExit {
        point: SurfacePoint::at_vertex(w_out.face, w_out.corner),
        dir: chart_out.direction(beta),
        normal_in: chart_in.normal,
        normal_out: chart_out.normal,
    })
}

/// Outcome of a boundary continuation at a vertex.
#[derive(Clone, Copy, Debug)]
pub enum BoundaryMove {
    /// The resume direction fits into a face of the fan; tracing continues along it.
    Resume(VertexExit),
    /// No face admits the resume direction; slide along a boundary edge towards `towards`.
    Slide { exit: VertexExit, towards: usize },
}

/// Hole-avoidance continuation at a boundary vertex.
///
/// Each face of the fan is scored by the angle between `resume` and its
/// projection onto the face plane, or infinity when that projection does not
/// point into the face. The best finite face wins. Otherwise the trace slides
/// along the incident boundary edge best aligned with `resume`, never back
/// towards `came_from`.
pub fn boundary_continue(mesh: &Mesh, p: &SurfacePoint, resume: &Vec3, came_from: Option<usize>) -> Result<BoundaryMove> {
    let (v, idx) = entry_wedge(mesh, p).ok_or(Error::InvalidPoint("not on a vertex".into()))?;
    let fan = mesh.fan(v);
    let normal_in = WedgeChart::new(mesh, v, &fan.wedges[idx]).normal;
    let r = resume.normalize();
    let mut best: Option<(f64, usize, Vec3)> = None;
    for (j, w) in fan.wedges.iter().enumerate() {
        let chart = WedgeChart::new(mesh, v, w);
        let proj = r - chart.normal * r.dot(&chart.normal);
        let len = proj.norm();
        if len < 1e-12 {
            continue;
        }
        let beta = chart.angle_of(&proj);
        let tol = 1e-12;
        if beta < -tol || beta > w.angle + tol {
            continue;
        }
        let err = r.dot(&(proj / len)).clamp(-1.0, 1.0).acos();
        if best.map_or(true, |(e, _, _)| err < e) {
            best = Some((err, j, chart.direction(beta.clamp(0.0, w.angle))));
        }
    }
    if let Some((_, j, dir)) = best {
        let w = &fan.wedges[j];
        return Ok(BoundaryMove::Resume(VertexExit {
            point: SurfacePoint::at_vertex(w.face, w.corner),
            dir,
            normal_in,
            normal_out: WedgeChart::new(mesh, v, w).normal,
        }));
    }

    // boundary edges of the fan: the `from` side of the first wedge and the `to` side of the last
    let mut options: Vec<(usize, usize, f64)> = Vec::with_capacity(2);
    if let (Some(first), Some(last)) = (fan.wedges.first(), fan.wedges.last()) {
        let fk = mesh.local_index(first.face, first.to).unwrap();
        if mesh.is_boundary_edge(first.face, fk) {
            options.push((0, first.from, 0.0));
        }
        let n = fan.wedges.len() - 1;
        let lk = mesh.local_index(last.face, last.from).unwrap();
        if mesh.is_boundary_edge(last.face, lk) {
            options.push((n, last.to, last.angle));
        }
    }
    let x0 = mesh.vertex(v);
    let mut pick: Option<(f64, usize, usize, f64)> = None;
    for &(j, target, beta) in &options {
        if Some(target) == came_from && options.len() > 1 {
            continue;
        }
        let dot = (mesh.vertex(target) - x0).normalize().dot(&r);
        if pick.map_or(true, |(b, ..)| dot > b) {
            pick = Some((dot, j, target, beta));
        }
    }
    let (_, j, target, beta) = pick.ok_or(Error::BoundaryHit { vertex: v })?;
    let w = &fan.wedges[j];
    let chart = WedgeChart::new(mesh, v, w);
    Ok(BoundaryMove::Slide {
        exit: VertexExit {
            point: SurfacePoint::at_vertex(w.face, w.corner),
            dir: chart.direction(beta),
            normal_in,
            normal_out: chart.normal,
        },
        towards: target,
    })
}

/// Minimal rotation taking unit vector `a` to unit vector `b`, applied to `v`.
pub(crate) fn rotate_between(a: &Vec3, b: &Vec3, v: &Vec3) -> Vec3 {
    let axis = a.cross(b);
    let s = axis.norm();
    let c = a.dot(b);
    if s < 1e-15 {
        if c > 0.0 {
            return *v;
        }
        // half turn about any axis perpendicular to a
        let t = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let k = (t - a * t.dot(a)).normalize();
        return k * (2.0 * k.dot(v)) - v;
    }
    let k = axis / s;
    v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}
