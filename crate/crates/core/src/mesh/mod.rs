//! Immutable triangle meshes with face adjacency and per-vertex angle data.
//!
//! Adjacency is stored per face and per local edge (edge `k` is the edge
//! opposite local vertex `k`). Faces are glued by sorted vertex pairs, so
//! non-orientable inputs such as a Möbius strip load without complaint.

mod geometry;
mod obj;
mod point;

use std::collections::HashMap;

pub use geometry::{closest_point_on_triangle, signed_angle_in_plane};
pub use obj::{read_obj, write_obj, write_polylines_obj};
pub use point::{classify_bary, Location, SurfacePoint, TangentVector, BARY_SUM_TOL, TAU_CLS};
pub(crate) use point::normalize_bary;

use crate::error::{Error, Result};
use crate::Vec3;

/// The face on the other side of a local edge, and that edge's local index there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeLink {
    pub face: usize,
    pub edge: usize,
}

/// One face of a vertex fan.
///
/// The wedge spans the corner of `face` at the fan's vertex, from the edge
/// towards `from` to the edge towards `to`. `start` is the accumulated angle
/// of all preceding wedges, so the fan is an angular chart of total size
/// equal to the vertex total angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wedge {
    pub face: usize,
    pub corner: usize,
    pub from: usize,
    pub to: usize,
    pub start: f64,
    pub angle: f64,
}

/// The ordered ring of faces around a vertex.
#[derive(Clone, Debug, Default)]
pub struct Fan {
    pub wedges: Vec<Wedge>,
    /// True when the walk returned to its first face without meeting a boundary edge.
    pub closed: bool,
}

impl Fan {
    pub fn total(&self) -> f64 {
        self.wedges.last().map(|w| w.start + w.angle).unwrap_or(0.0)
    }

    pub fn position(&self, face: usize) -> Option<usize> {
        self.wedges.iter().position(|w| w.face == face)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct FaceFrame {
    pub e1: Vec3,
    pub e2: Vec3,
    /// Inverse Gram matrix of (e1, e2) stored as [g11, g12, g22].
    pub ginv: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    adjacency: Vec<[Option<EdgeLink>; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    corner_angles: Vec<[f64; 3]>,
    total_angle: Vec<f64>,
    vertex_area: Vec<f64>,
    vertex_normals: Vec<Vec3>,
    boundary_vertex: Vec<bool>,
    fans: Vec<Fan>,
    frames: Vec<FaceFrame>,
    neighbor_offsets: Vec<usize>,
    neighbors: Vec<usize>,
    mean_edge_length: f64,
}

impl Mesh {
    /// Builds a mesh and all derived data, rejecting non-manifold edges and
    /// zero-area faces.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::Parse(format!("face {fi} references a vertex out of range")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateFace(fi));
            }
        }
        if let Some(v) = vertices.iter().position(|x| !x.iter().all(|c| c.is_finite())) {
            return Err(Error::Parse(format!("vertex {v} has non-finite coordinates")));
        }

        let mut normals = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        let mut corner_angles = Vec::with_capacity(faces.len());
        let mut frames = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let [a, b, c] = [vertices[f[0]], vertices[f[1]], vertices[f[2]]];
            let e1 = b - a;
            let e2 = c - a;
            let cross = e1.cross(&e2);
            let twice_area = cross.norm();
            let longest = e1.norm_squared().max(e2.norm_squared()).max((c - b).norm_squared());
            if !(twice_area > 1e-14 * longest) {
                return Err(Error::DegenerateFace(fi));
            }
            normals.push(cross / twice_area);
            areas.push(0.5 * twice_area);
            corner_angles.push([
                geometry::angle_between(&(b - a), &(c - a)),
                geometry::angle_between(&(c - b), &(a - b)),
                geometry::angle_between(&(a - c), &(b - c)),
            ]);
            let (g11, g12, g22) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
            let det = g11 * g22 - g12 * g12;
            frames.push(FaceFrame { e1, e2, ginv: [g22 / det, -g12 / det, g11 / det] });
        }

        let adjacency = build_adjacency(&faces)?;

        // vertex -> incident faces (CSR)
        let mut counts = vec![0usize; n + 1];
        for f in &faces {
            for &v in f {
                counts[v + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut incident = vec![0usize; counts[n]];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                incident[fill[v]] = fi;
                fill[v] += 1;
            }
        }

        let mut total_angle = vec![0.0; n];
        let mut vertex_area = vec![0.0; n];
        let mut vertex_normals = vec![Vec3::zeros(); n];
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                total_angle[f[k]] += corner_angles[fi][k];
                vertex_area[f[k]] += areas[fi] / 3.0;
                vertex_normals[f[k]] += normals[fi] * areas[fi];
            }
        }
        for nv in vertex_normals.iter_mut() {
            let len = nv.norm();
            if len > 0.0 {
                *nv /= len;
            }
        }

        let mut fans = Vec::with_capacity(n);
        let mut boundary_vertex = vec![false; n];
        for v in 0..n {
            let inc = &incident[counts[v]..counts[v + 1]];
            let fan = build_fan(v, inc, &faces, &adjacency, &corner_angles);
            boundary_vertex[v] = !fan.closed;
            fans.push(fan);
        }

        // vertex neighbours (CSR, sorted, deduplicated)
        let mut nbr_sets: Vec<Vec<usize>> = vec![Vec::new(); n];
        for f in &faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                nbr_sets[a].push(b);
                nbr_sets[b].push(a);
            }
        }
        let mut neighbor_offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut edge_len_sum = 0.0;
        let mut edge_count = 0usize;
        neighbor_offsets.push(0);
        for (a, set) in nbr_sets.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            for &b in set.iter() {
                if b > a {
                    edge_len_sum += (vertices[a] - vertices[b]).norm();
                    edge_count += 1;
                }
            }
            neighbors.extend_from_slice(set);
            neighbor_offsets.push(neighbors.len());
        }

        Ok(Self {
            vertices,
            faces,
            adjacency,
            normals,
            areas,
            corner_angles,
            total_angle,
            vertex_area,
            vertex_normals,
            boundary_vertex,
            fans,
            frames,
            neighbor_offsets,
            neighbors,
            mean_edge_length: if edge_count > 0 { edge_len_sum / edge_count as f64 } else { 0.0 },
        })
    }

    /// Parses an ASCII OBJ stream. Polygons are fan-triangulated; normals and
    /// texture coordinates in the file are ignored.
    pub fn from_obj<R: std::io::BufRead>(reader: &mut R) -> Result<Self> {
        let (v, f) = read_obj(reader)?;
        Self::new(v, f)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_obj(&mut std::io::BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        write_obj(&mut w, &self.vertices, &self.faces)?;
        Ok(())
    }

    /// Concatenates meshes into one, offsetting vertex and face indices.
    ///
    /// Returns the merged mesh and the face offset of each input.
    pub fn merge(meshes: &[&Mesh]) -> Result<(Mesh, Vec<usize>)> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        let mut offsets = Vec::with_capacity(meshes.len());
        for m in meshes {
            let base = vertices.len();
            offsets.push(faces.len());
            vertices.extend_from_slice(&m.vertices);
            faces.extend(m.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
        }
        Ok((Mesh::new(vertices, faces)?, offsets))
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex(&self, v: usize) -> Vec3 {
        self.vertices[v]
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        self.normals[f]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.areas[f]
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn corner_angles(&self, f: usize) -> [f64; 3] {
        self.corner_angles[f]
    }

    /// Sum of interior angles of all faces meeting at `v`.
    pub fn total_angle(&self, v: usize) -> f64 {
        self.total_angle[v]
    }

    /// One third of the summed area of the faces incident to `v`.
    pub fn vertex_area(&self, v: usize) -> f64 {
        self.vertex_area[v]
    }

    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_area
    }

    /// Area-weighted vertex normal.
    pub fn vertex_normal(&self, v: usize) -> Vec3 {
        self.vertex_normals[v]
    }

    /// True for vertices whose face fan is not a closed disk.
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, f: usize, k: usize) -> bool {
        self.adjacency[f][k].is_none()
    }

    pub fn neighbor(&self, f: usize, k: usize) -> Option<EdgeLink> {
        self.adjacency[f][k]
    }

    pub fn fan(&self, v: usize) -> &Fan {
        &self.fans[v]
    }

    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.neighbor_offsets[v]..self.neighbor_offsets[v + 1]]
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.mean_edge_length
    }

    /// Local index (0..3) of global vertex `v` in face `f`.
    pub fn local_index(&self, f: usize, v: usize) -> Option<usize> {
        self.faces[f].iter().position(|&x| x == v)
    }

    /// Ambient position of a surface point.
    pub fn embed(&self, p: &SurfacePoint) -> Vec3 {
        let [a, b, c] = self.faces[p.face];
        self.vertices[a] * p.bary[0] + self.vertices[b] * p.bary[1] + self.vertices[c] * p.bary[2]
    }

    /// Removes the component of `v` normal to face `f`.
    pub fn project_to_face_plane(&self, f: usize, v: &Vec3) -> Vec3 {
        let n = self.normals[f];
        v - n * n.dot(v)
    }

    /// Barycentric direction of an in-plane ambient vector: coefficients that
    /// sum to zero and reproduce `d` as a combination of the face vertices.
    pub fn bary_direction(&self, f: usize, d: &Vec3) -> [f64; 3] {
        let fr = &self.frames[f];
        let r1 = fr.e1.dot(d);
        let r2 = fr.e2.dot(d);
        let b1 = fr.ginv[0] * r1 + fr.ginv[1] * r2;
        let b2 = fr.ginv[1] * r1 + fr.ginv[2] * r2;
        [-b1 - b2, b1, b2]
    }

    /// Barycentric coordinates of the orthogonal projection of `x` onto the
    /// plane of face `f` (may fall outside the simplex).
    pub fn plane_bary(&self, f: usize, x: &Vec3) -> [f64; 3] {
        let origin = self.vertices[self.faces[f][0]];
        let d = self.bary_direction(f, &(x - origin));
        [1.0 + d[0], d[1], d[2]]
    }

    /// Closest point on the whole mesh, by brute force over every face.
    pub fn closest_point(&self, x: &Vec3) -> (SurfacePoint, Vec3) {
        let mut best = (f64::INFINITY, SurfacePoint::centroid(0), Vec3::zeros());
        for (fi, f) in self.faces.iter().enumerate() {
            let (q, bary) = closest_point_on_triangle(
                x,
                &self.vertices[f[0]],
                &self.vertices[f[1]],
                &self.vertices[f[2]],
            );
            let d2 = (q - x).norm_squared();
            if d2 < best.0 {
                best = (d2, SurfacePoint::new(fi, bary), q);
            }
        }
        (best.1, best.2)
    }

    /// The first face listed in the fan of `v`, together with the local corner index.
    pub fn vertex_face(&self, v: usize) -> Option<(usize, usize)> {
        self.fans[v].wedges.first().map(|w| (w.face, w.corner))
    }

    /// Surface point sitting on vertex `v`.
    pub fn vertex_point(&self, v: usize) -> Option<SurfacePoint> {
        self.vertex_face(v).map(|(f, k)| SurfacePoint::at_vertex(f, k))
    }
}

fn build_adjacency(faces: &[[usize; 3]]) -> Result<Vec<[Option<EdgeLink>; 3]>> {
    let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::with_capacity(faces.len() * 2);
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[(k + 1) % 3], f[(k + 2) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push((fi, k));
        }
    }
    let mut adjacency = vec![[None; 3]; faces.len()];
    for ((a, b), list) in &edges {
        match list.as_slice() {
            [_] => {}
            [(f0, k0), (f1, k1)] => {
                adjacency[*f0][*k0] = Some(EdgeLink { face: *f1, edge: *k1 });
                adjacency[*f1][*k1] = Some(EdgeLink { face: *f0, edge: *k0 });
            }
            _ => return Err(Error::NonManifold(*a, *b, list.len())),
        }
    }
    Ok(adjacency)
}

fn local(face: &[usize; 3], v: usize) -> usize {
    face.iter().position(|&x| x == v).expect("vertex belongs to face")
}

fn build_fan(
    v: usize,
    incident: &[usize],
    faces: &[[usize; 3]],
    adjacency: &[[Option<EdgeLink>; 3]],
    corner_angles: &[[f64; 3]],
) -> Fan {
    if incident.is_empty() {
        return Fan::default();
    }
    // Start on a boundary edge when there is one, so an open fan is walked end to end.
    let mut start = None;
    for &f in incident {
        let k = local(&faces[f], v);
        let (a, b) = (faces[f][(k + 1) % 3], faces[f][(k + 2) % 3]);
        // edge (v, a) is opposite b, edge (v, b) is opposite a
        if adjacency[f][local(&faces[f], b)].is_none() {
            start = Some((f, k, a, b));
            break;
        }
        if adjacency[f][local(&faces[f], a)].is_none() {
            start = Some((f, k, b, a));
            break;
        }
    }
    let open = start.is_some();
    let (f0, k0, a0, b0) = start.unwrap_or_else(|| {
        let f = incident[0];
        let k = local(&faces[f], v);
        (f, k, faces[f][(k + 1) % 3], faces[f][(k + 2) % 3])
    });

    let mut wedges = Vec::with_capacity(incident.len());
    let (mut f, mut k, mut from, mut to) = (f0, k0, a0, b0);
    let mut acc = 0.0;
    let mut closed = false;
    loop {
        let angle = corner_angles[f][k];
        wedges.push(Wedge { face: f, corner: k, from, to, start: acc, angle });
        acc += angle;
        if wedges.len() > incident.len() {
            break;
        }
        // cross the edge (v, to), which is opposite `from` in f
        match adjacency[f][local(&faces[f], from)] {
            None => break,
            Some(link) => {
                if link.face == f0 {
                    closed = !open;
                    break;
                }
                let g = link.face;
                let kg = local(&faces[g], v);
                let third = faces[g][(0..3).find(|&i| i != kg && faces[g][i] != to).unwrap()];
                f = g;
                k = kg;
                from = to;
                to = third;
            }
        }
    }
    if wedges.len() != incident.len() {
        // several fans meet at this vertex; treat it as singular
        closed = false;
        wedges.truncate(incident.len());
    }
    Fan { wedges, closed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single_triangle() -> Mesh {
        Mesh::new(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0), Vec3::new(0.0, 3.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn single_triangle_is_all_boundary() {
        let m = single_triangle();
        assert_eq!(m.num_faces(), 1);
        for k in 0..3 {
            assert!(m.is_boundary_edge(0, k));
            assert!(m.is_boundary_vertex(k));
        }
        assert!((m.total_area() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn embed_examples() {
        let m = single_triangle();
        assert_eq!(m.embed(&SurfacePoint::new(0, [1.0, 0.0, 0.0])), m.vertex(0));
        let c = m.embed(&SurfacePoint::centroid(0));
        assert!((c - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-15);
        let e = m.embed(&SurfacePoint::new(0, [0.0, 0.5, 0.5]));
        assert!((e - Vec3::new(1.5, 1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let err = Mesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, Error::NonManifold(0, 1, 3)));
    }

    #[test]
    fn degenerate_face_rejected() {
        let v = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 1, 2]]), Err(Error::DegenerateFace(0))));
        assert!(matches!(Mesh::new(v, vec![[0, 1, 1]]), Err(Error::DegenerateFace(0))));
    }

    #[test]
    fn adjacency_is_symmetric_and_fans_close() {
        let m = crate::oracles::make_icosphere(2);
        for f in 0..m.num_faces() {
            for k in 0..3 {
                let link = m.neighbor(f, k).expect("closed surface");
                let back = m.neighbor(link.face, link.edge).unwrap();
                assert_eq!(back, EdgeLink { face: f, edge: k });
            }
            let s: f64 = m.corner_angles(f).iter().sum();
            assert!((s - PI).abs() < 1e-10);
        }
        for v in 0..m.num_vertices() {
            let fan = m.fan(v);
            assert!(fan.closed);
            assert!((fan.total() - m.total_angle(v)).abs() < 1e-12);
            assert!(m.total_angle(v) < 2.0 * PI);
        }
        let va: f64 = m.vertex_areas().iter().sum();
        assert!((va - m.total_area()).abs() < 1e-9 * m.total_area());
    }

    #[test]
    fn icosahedron_total_angle_is_five_thirds_pi() {
        let m = crate::oracles::make_icosphere(0);
        assert_eq!(m.num_faces(), 20);
        for v in 0..m.num_vertices() {
            assert!((m.total_angle(v) - 5.0 * PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn planar_grid_interior_vertices_have_full_angle() {
        let m = crate::oracles::make_plane(6, 5, 1.0);
        for v in 0..m.num_vertices() {
            if !m.is_boundary_vertex(v) {
                assert!((m.total_angle(v) - 2.0 * PI).abs() < 1e-9);
            }
        }
        for f in 0..m.num_faces() {
            assert!((m.face_normal(f).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_vertex_exceeds_full_angle() {
        // monkey-saddle-like ring: six neighbours alternating up and down three times
        let mut v = vec![Vec3::zeros()];
        for i in 0..6 {
            let t = i as f64 * PI / 3.0;
            v.push(Vec3::new(t.cos(), t.sin(), if i % 2 == 0 { 0.6 } else { -0.6 }));
        }
        let faces = (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect();
        let m = Mesh::new(v, faces).unwrap();
        assert!(m.fan(0).closed);
        assert!(m.total_angle(0) > 2.0 * PI);
    }

    #[test]
    fn mobius_strip_loads() {
        let m = crate::oracles::make_mobius(24, 1.0, 0.3);
        assert!(m.num_faces() == 48);
        // each interior edge has a partner; the strip has a single boundary loop
        let boundary_edges: usize = (0..m.num_faces())
            .map(|f| (0..3).filter(|&k| m.is_boundary_edge(f, k)).count())
            .sum();
        assert_eq!(boundary_edges, 48);
    }

    #[test]
    fn plane_bary_recovers_coordinates() {
        let m = crate::oracles::make_icosphere(1);
        for f in (0..m.num_faces()).step_by(7) {
            let b = [0.2, 0.45, 0.35];
            let x = m.embed(&SurfacePoint::new(f, b));
            let r = m.plane_bary(f, &x);
            for k in 0..3 {
                assert!((r[k] - b[k]).abs() < 1e-9);
            }
            let (cp, _) = m.closest_point(&x);
            assert_eq!(cp.face, f);
            for k in 0..3 {
                assert!((cp.bary[k] - b[k]).abs() < 1e-9);
            }
        }
    }
}
