use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfacePoint, TangentVector};
use crate::tracer::rotate_between;
use crate::Vec3;

/// Geodesic Voronoi cells of a seed set, with approximate log maps.
#[derive(Clone, Debug)]
pub struct VoronoiPartition {
    /// Nearest seed of each vertex (ties go to the lowest seed index).
    pub assignment: Vec<usize>,
    /// Shortest-path distance of each vertex to its seed.
    pub distances: Vec<f64>,
    /// Vertices of each cell.
    pub cells: Vec<Vec<usize>>,
    /// Log map of each vertex at its seed, in the seed's face plane.
    pub logs: Vec<Vec3>,
}

impl VoronoiPartition {
    pub fn num_seeds(&self) -> usize {
        self.cells.len()
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    seed: usize,
    vertex: usize,
    parent: Option<usize>,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed for a min-heap on (dist, seed, vertex).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.seed.cmp(&self.seed))
            .then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn rotation(from: &Vec3, to: &Vec3) -> Matrix3<f64> {
    Matrix3::from_columns(&[
        rotate_between(from, to, &Vec3::x()),
        rotate_between(from, to, &Vec3::y()),
        rotate_between(from, to, &Vec3::z()),
    ])
}

/// Multi-source Dijkstra over the edge graph. Each seed is a temporary node
/// joined to the corners of its face by straight segments.
///
/// The log map of a vertex is developed along its shortest-path tree branch:
/// every edge is laid into the tangent plane of its parent vertex (keeping
/// its length) and rotated back to the seed by composing minimal rotations
/// between consecutive vertex normals.
pub fn voronoi(mesh: &Mesh, seeds: &[SurfacePoint]) -> Result<VoronoiPartition> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let n = mesh.num_vertices();
    let mut assignment = vec![usize::MAX; n];
    let mut distances = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    let mut positions = Vec::with_capacity(seeds.len());
    for (s, p) in seeds.iter().enumerate() {
        let p = p.validated(mesh.num_faces())?;
        let x = mesh.embed(&p);
        positions.push(x);
        for v in mesh.face(p.face) {
            heap.push(Entry { dist: (mesh.vertex(v) - x).norm(), seed: s, vertex: v, parent: None });
        }
    }
    while let Some(Entry { dist, seed, vertex, parent: par }) = heap.pop() {
        if assignment[vertex] != usize::MAX {
            continue;
        }
        assignment[vertex] = seed;
        distances[vertex] = dist;
        parent[vertex] = par;
        order.push(vertex);
        let x = mesh.vertex(vertex);
        for &w in mesh.vertex_neighbors(vertex) {
            if assignment[w] == usize::MAX {
                heap.push(Entry { dist: dist + (mesh.vertex(w) - x).norm(), seed, vertex: w, parent: Some(vertex) });
            }
        }
    }

    let mut cells = vec![Vec::new(); seeds.len()];
    let mut logs = vec![Vec3::zeros(); n];
    let mut to_seed = vec![Matrix3::identity(); n];
    for &v in &order {
        let s = assignment[v];
        let seed_normal = mesh.face_normal(seeds[s].face);
        let nv = mesh.vertex_normal(v);
        match parent[v] {
            None => {
                logs[v] = mesh.vertex(v) - positions[s];
                to_seed[v] = rotation(&nv, &seed_normal);
            }
            Some(u) => {
                let nu = mesh.vertex_normal(u);
                let d = mesh.vertex(v) - mesh.vertex(u);
                let t = d - nu * nu.dot(&d);
                let t = if t.norm() > 0.0 { t * (d.norm() / t.norm()) } else { t };
                logs[v] = logs[u] + to_seed[u] * t;
                to_seed[v] = to_seed[u] * rotation(&nv, &nu);
            }
        }
        cells[s].push(v);
    }
    for c in &mut cells {
        c.sort_unstable();
    }
    Ok(VoronoiPartition { assignment, distances, cells, logs })
}

/// Area-weighted mean of the log vectors of a cell, at the seed.
pub fn karcher_direction(
    mesh: &Mesh,
    partition: &VoronoiPartition,
    seeds: &[SurfacePoint],
    i: usize,
) -> Result<TangentVector> {
    let cell = partition.cells.get(i).ok_or_else(|| Error::InvalidArgument(format!("no seed {i}")))?;
    if cell.is_empty() {
        return Err(Error::EmptyCell(i));
    }
    let areas = mesh.vertex_areas();
    let (mut sum, mut weight) = (Vec3::zeros(), 0.0);
    for &v in cell {
        sum += partition.logs[v] * areas[v];
        weight += areas[v];
    }
    let dir = mesh.project_to_face_plane(seeds[i].face, &(sum / weight));
    Ok(TangentVector { anchor: seeds[i], dir })
}

/// `1/(2S) sum_i sum_{x in cell i} A(x) d(s_i, x)^2` with the shortest-path
/// distances that define the cells.
pub fn gcvt_energy(mesh: &Mesh, partition: &VoronoiPartition) -> f64 {
    let areas = mesh.vertex_areas();
    let total: f64 = partition.distances.iter().zip(areas).map(|(d, a)| a * d * d).sum();
    total / (2.0 * partition.num_seeds() as f64)
}
