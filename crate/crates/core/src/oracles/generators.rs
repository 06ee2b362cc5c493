//! Deterministic parametric meshes used as fixtures.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::Mesh;
use crate::Vec3;

fn build(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Mesh {
    Mesh::new(vertices, faces).expect("generator produced an invalid mesh")
}

/// Unit icosphere: an icosahedron refined `subdiv` times by 1-to-4 splits,
/// with every vertex pushed to the unit sphere. `F = 20 * 4^subdiv`.
pub fn make_icosphere(subdiv: u32) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vs: &mut Vec<Vec3>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vs.push(((vs[a] + vs[b]) * 0.5).normalize());
                vs.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    build(vertices, faces)
}

/// Point on the torus with major radius `major` and minor radius `minor`.
pub fn torus_point(alpha: f64, beta: f64, major: f64, minor: f64) -> Vec3 {
    let rho = major + minor * beta.cos();
    Vec3::new(rho * alpha.cos(), rho * alpha.sin(), minor * beta.sin())
}

/// Torus sampled on a regular (alpha, beta) grid. `F = 2 * n_alpha * n_beta`.
pub fn make_torus(major: f64, minor: f64, n_alpha: usize, n_beta: usize) -> Mesh {
    let mut vertices = Vec::with_capacity(n_alpha * n_beta);
    for i in 0..n_alpha {
        for j in 0..n_beta {
            let a = TAU * i as f64 / n_alpha as f64;
            let b = TAU * j as f64 / n_beta as f64;
            vertices.push(torus_point(a, b, major, minor));
        }
    }
    let id = |i: usize, j: usize| (i % n_alpha) * n_beta + (j % n_beta);
    let mut faces = Vec::with_capacity(2 * n_alpha * n_beta);
    for i in 0..n_alpha {
        for j in 0..n_beta {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build(vertices, faces)
}

fn grid_faces(nx: usize, ny: usize, flip: impl Fn(usize, usize) -> bool) -> Vec<[usize; 3]> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if flip(i, j) {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            } else {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
    }
    faces
}

/// Square of side `size` centred at the origin in the z = 0 plane, split into
/// `nx * ny` quads of two triangles each.
pub fn make_plane(nx: usize, ny: usize, size: f64) -> Mesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(
                size * (i as f64 / nx as f64 - 0.5),
                size * (j as f64 / ny as f64 - 0.5),
                0.0,
            ));
        }
    }
    build(vertices, grid_faces(nx, ny, |_, _| false))
}

/// Planar square like [`make_plane`] with randomly jittered interior vertices
/// and randomly chosen quad diagonals; every seed gives a different triangulation.
pub fn make_plane_random(n: usize, size: f64, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = size / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut x = Vec3::new(size * (i as f64 / n as f64 - 0.5), size * (j as f64 / n as f64 - 0.5), 0.0);
            if i > 0 && i < n && j > 0 && j < n {
                x.x += rng.gen_range(-0.3..0.3) * h;
                x.y += rng.gen_range(-0.3..0.3) * h;
            }
            vertices.push(x);
        }
    }
    let flips: Vec<bool> = (0..n * n).map(|_| rng.gen_bool(0.5)).collect();
    build(vertices, grid_faces(n, n, |i, j| flips[j * n + i]))
}

/// Open cylinder of the given radius around the z axis, from z = 0 to `height`.
pub fn make_cylinder(radius: f64, height: f64, n_around: usize, n_up: usize) -> Mesh {
    let mut vertices = Vec::with_capacity(n_around * (n_up + 1));
    for j in 0..=n_up {
        for i in 0..n_around {
            let a = TAU * i as f64 / n_around as f64;
            vertices.push(Vec3::new(radius * a.cos(), radius * a.sin(), height * j as f64 / n_up as f64));
        }
    }
    let id = |i: usize, j: usize| j * n_around + i % n_around;
    let mut faces = Vec::with_capacity(2 * n_around * n_up);
    for j in 0..n_up {
        for i in 0..n_around {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build(vertices, faces)
}

/// Open cone with apex at `(0, 0, height)` over a circular base of `radius`
/// in the z = 0 plane. Vertex 0 is the apex.
pub fn make_cone(radius: f64, height: f64, n_around: usize, n_rings: usize) -> Mesh {
    let mut vertices = vec![Vec3::new(0.0, 0.0, height)];
    for j in 1..=n_rings {
        let s = j as f64 / n_rings as f64;
        for i in 0..n_around {
            let a = TAU * i as f64 / n_around as f64;
            vertices.push(Vec3::new(s * radius * a.cos(), s * radius * a.sin(), height * (1.0 - s)));
        }
    }
    let ring = |j: usize, i: usize| 1 + (j - 1) * n_around + i % n_around;
    let mut faces = Vec::new();
    for i in 0..n_around {
        faces.push([0, ring(1, i), ring(1, i + 1)]);
    }
    for j in 1..n_rings {
        for i in 0..n_around {
            faces.push([ring(j, i), ring(j + 1, i), ring(j + 1, i + 1)]);
            faces.push([ring(j, i), ring(j + 1, i + 1), ring(j, i + 1)]);
        }
    }
    build(vertices, faces)
}

/// Flat disk of `radius` made of concentric rings; vertex 0 is the centre.
pub fn make_disk(radius: f64, n_rings: usize, n_around: usize) -> Mesh {
    make_annulus(0.0, radius, n_rings, n_around)
}

/// Flat annulus between radii `inner` and `outer` (a disk when `inner` is 0),
/// with a polygonal hole of `n_around` sides.
pub fn make_annulus(inner: f64, outer: f64, n_rings: usize, n_around: usize) -> Mesh {
    let mut vertices = Vec::new();
    let first_ring = if inner == 0.0 {
        vertices.push(Vec3::zeros());
        1
    } else {
        0
    };
    for j in first_ring..=n_rings {
        let r = inner + (outer - inner) * j as f64 / n_rings as f64;
        for i in 0..n_around {
            let a = TAU * i as f64 / n_around as f64;
            vertices.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let base = first_ring;
    let ring = |j: usize, i: usize| base + (j - first_ring) * n_around + i % n_around;
    let mut faces = Vec::new();
    if first_ring == 1 {
        for i in 0..n_around {
            faces.push([0, ring(1, i), ring(1, i + 1)]);
        }
    }
    for j in first_ring..n_rings {
        for i in 0..n_around {
            faces.push([ring(j, i), ring(j + 1, i), ring(j + 1, i + 1)]);
            faces.push([ring(j, i), ring(j + 1, i + 1), ring(j, i + 1)]);
        }
    }
    build(vertices, faces)
}

/// Möbius strip with `n` segments along the centre circle (F = 2n).
pub fn make_mobius(n: usize, radius: f64, half_width: f64) -> Mesh {
    let mut vertices = Vec::with_capacity(2 * n);
    for i in 0..n {
        let t = TAU * i as f64 / n as f64;
        for s in [-half_width, half_width] {
            let r = radius + s * (0.5 * t).cos();
            vertices.push(Vec3::new(r * t.cos(), r * t.sin(), s * (0.5 * t).sin()));
        }
    }
    let mut faces = Vec::with_capacity(2 * n);
    for i in 0..n {
        let (a, b) = (2 * i, 2 * i + 1);
        let (c, d) = if i + 1 < n { (2 * i + 2, 2 * i + 3) } else { (1, 0) };
        faces.push([a, c, d]);
        faces.push([a, d, b]);
    }
    build(vertices, faces)
}
