use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;

use super::*;
use crate::tracer;
use crate::oracles::{make_annulus, make_icosphere, make_plane, make_plane_random, sphere_exp, to_unit_sphere};

fn right_triangle() -> Mesh {
    Mesh::new(
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
        vec![[0, 1, 2]],
    )
    .unwrap()
}

/// Two triangles sharing the edge (0,0,0)-(1,0,0); the second is folded by `fold` radians.
fn hinge(fold: f64) -> Mesh {
    Mesh::new(
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.5, 1.0, 0.0),
            Vec3::new(0.5, -fold.cos(), fold.sin()),
        ],
        vec![[0, 1, 2], [1, 0, 3]],
    )
    .unwrap()
}

/// First intersection of a 2D ray with the sides of a triangle, by solving each
/// side's line equation directly.
fn ray_exit(o: [f64; 2], d: [f64; 2], tri: [[f64; 2]; 3]) -> (f64, [f64; 2]) {
    let mut best = (f64::INFINITY, [0.0; 2]);
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let e = [b[0] - a[0], b[1] - a[1]];
        let den = d[0] * e[1] - d[1] * e[0];
        if den.abs() < 1e-14 {
            continue;
        }
        let w = [a[0] - o[0], a[1] - o[1]];
        let t = (w[0] * e[1] - w[1] * e[0]) / den;
        let s = (w[0] * d[1] - w[1] * d[0]) / den;
        if t > 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&s) && t < best.0 {
            best = (t, [o[0] + t * d[0], o[1] + t * d[1]]);
        }
    }
    best
}

#[test]
fn in_face_motion() {
    let m = right_triangle();
    let p = SurfacePoint::new(0, [0.5, 0.25, 0.25]);
    let v = Vec3::new(0.05, -0.02, 0.0);
    let t = trace(&m, &p, &v, &TraceConfig::default()).unwrap();
    assert_eq!(t.terminated_by, Termination::LengthReached);
    assert!((m.embed(&t.final_point) - m.embed(&p) - v).norm() < 1e-15);
    assert!((t.traced_length - v.norm()).abs() < 1e-15);
}

#[test]
fn step_exits_at_ray_edge_intersection() {
    let m = right_triangle();
    let p = SurfacePoint::centroid(0);
    for dir in [[-1.0, -0.5], [0.3, -1.0], [1.0, 1.0], [-0.2, 1.0]] {
        let n = (dir[0] * dir[0] + dir[1] * dir[1]) as f64;
        let d = [dir[0] / n.sqrt(), dir[1] / n.sqrt()];
        let (t_ref, hit) = ray_exit([1.0 / 3.0, 1.0 / 3.0], d, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let (q, t) = geodesic_step(&m, &p, &Vec3::new(d[0], d[1], 0.0), 10.0).unwrap();
        assert!((t - t_ref).abs() < 1e-14);
        let x = m.embed(&q);
        assert!((x.x - hit[0]).abs() < 1e-14 && (x.y - hit[1]).abs() < 1e-14);
        assert!(matches!(q.classify(), Location::Edge(_)));
    }
}

#[test]
fn step_along_an_edge_stays_in_face() {
    let m = hinge(0.0);
    let p = SurfacePoint::new(0, [0.6, 0.4, 0.0]);
    let (q, t) = geodesic_step(&m, &p, &Vec3::x(), 0.3).unwrap();
    assert_eq!(q.face, 0);
    assert!((t - 0.3).abs() < 1e-15);
    assert!((m.embed(&q) - Vec3::new(0.7, 0.0, 0.0)).norm() < 1e-15);
    let tr = trace(&m, &p, &(Vec3::x() * 0.3), &TraceConfig::default()).unwrap();
    assert_eq!(tr.final_point.face, 0);
}

#[test]
fn coplanar_edge_crossing_is_identity() {
    let m = hinge(0.0);
    let p = SurfacePoint::new(0, [0.3, 0.7, 0.0]);
    let d = Vec3::new(0.6, -0.8, 0.0);
    let (q, d2, _) = transport_over_edge(&m, &p, 2, &d).unwrap();
    assert_eq!(q.face, 1);
    assert!((d2 - d).norm() < 1e-15);
    assert!((m.embed(&q) - m.embed(&p)).norm() < 1e-15);
}

#[test]
fn folded_edge_crossing_matches_rodrigues() {
    let m = hinge(FRAC_PI_2);
    let p = SurfacePoint::new(0, [0.5, 0.5, 0.0]);
    // perpendicular to the edge, going from face 0 (y > 0) into the folded face
    let d = Vec3::new(0.0, -1.0, 0.0);
    let (_, d2, _) = transport_over_edge(&m, &p, 2, &d).unwrap();
    // rotating face 0 onto face 1 about the x axis by a quarter turn sends -y to +z
    assert!((d2 - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
    assert!(d2.dot(&m.face_normal(1)).abs() < 1e-15);
}

#[test]
fn cube_edge_keeps_angle_to_edge() {
    // two faces of a unit cube meeting along the x axis
    let m = Mesh::new(
        vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 1.0)],
        vec![[0, 1, 2], [1, 0, 3]],
    )
    .unwrap();
    let p = SurfacePoint::new(0, [0.5, 0.5, 0.0]);
    let d = Vec3::new(1.0, -1.0, 0.0).normalize();
    let (_, d2, _) = transport_over_edge(&m, &p, 2, &d).unwrap();
    // unfolding the top face into the xy plane: z -> -y
    let unfolded = Vec3::new(d2.x, -d2.z, 0.0);
    assert!((unfolded - d).norm() < 1e-15);
    assert!((d2.dot(&Vec3::x()) - FRAC_PI_4.cos()).abs() < 1e-15);
}

#[test]
fn flat_vertex_continues_straight() {
    let m = make_plane(4, 4, 4.0);
    // vertex at the origin is the centre of the grid
    let start_pos = Vec3::new(-0.5, -0.25, 0.0);
    let (start, _) = m.closest_point(&start_pos);
    let dir = (Vec3::zeros() - start_pos).normalize();
    let t = trace(&m, &start, &(dir * (start_pos.norm() + 0.7)), &TraceConfig::with_path()).unwrap();
    let expected = dir * 0.7;
    assert!((m.embed(&t.final_point) - expected).norm() < 1e-12);
    assert!((t.final_dir - dir).norm() < 1e-12);
    assert!(t.points.iter().any(|p| matches!(p.classify(), Location::Vertex(_))));
}

/// Six-face cone whose apex angles are exactly pi/4 each (total 3pi/2).
fn exact_cone() -> Mesh {
    let rho = 2.0 * (PI / 8.0).sin();
    let z = -(1.0 - rho * rho).sqrt();
    let mut v = vec![Vec3::zeros()];
    for k in 0..6 {
        let a = PI * k as f64 / 3.0;
        v.push(Vec3::new(rho * a.cos(), rho * a.sin(), z));
    }
    Mesh::new(v, (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect()).unwrap()
}

#[test]
fn cone_apex_bisects_total_angle() {
    let m = exact_cone();
    assert!((m.total_angle(0) - 1.5 * PI).abs() < 1e-12);
    // arrive along the edge from ring vertex 1; equal halves of 3pi/4 lead to ring vertex 4
    let start = SurfacePoint::new(0, [0.5, 0.5, 0.0]);
    let d = (m.vertex(0) - m.vertex(1)).normalize();
    let t = trace(&m, &start, &(d * 0.8), &TraceConfig::default()).unwrap();
    let out = (m.vertex(4) - m.vertex(0)).normalize();
    assert!((m.embed(&t.final_point) - out * 0.3).norm() < 1e-12);
    assert!((t.final_dir - out).norm() < 1e-12);
}

/// Lays the fan of `v0` out in the plane (wedge by wedge, using the corner
/// angles) and continues the incoming ray straight through the origin after a
/// turn of half the total angle. Returns the 3D point at distance `s` past the vertex.
fn unfolded_vertex_oracle(m: &Mesh, v0: usize, incoming_from: Vec3, s: f64) -> Vec3 {
    let fan = m.fan(v0);
    let x0 = m.vertex(v0);
    let theta = m.total_angle(v0);
    // polar angle of the incoming point in the flattened fan
    let w0 = &fan.wedges[0];
    let a = m.vertex(w0.from) - x0;
    let q = incoming_from - x0;
    let phi_in = (a.cross(&q).norm()).atan2(a.dot(&q));
    let phi_out = (phi_in + theta / 2.0) % theta;
    let mut acc = 0.0;
    for w in &fan.wedges {
        let ang = m.corner_angles(w.face)[w.corner];
        if phi_out <= acc + ang {
            // express s * (cos phi, sin phi) in the basis of the two flattened edges
            let (la, lb) = ((m.vertex(w.from) - x0).norm(), (m.vertex(w.to) - x0).norm());
            let ua = [acc.cos() * la, acc.sin() * la];
            let ub = [(acc + ang).cos() * lb, (acc + ang).sin() * lb];
            let t = [s * phi_out.cos(), s * phi_out.sin()];
            let det = ua[0] * ub[1] - ua[1] * ub[0];
            let alpha = (t[0] * ub[1] - t[1] * ub[0]) / det;
            let beta = (ua[0] * t[1] - ua[1] * t[0]) / det;
            return x0 + (m.vertex(w.from) - x0) * alpha + (m.vertex(w.to) - x0) * beta;
        }
        acc += ang;
    }
    unreachable!()
}

#[test]
fn icosahedron_vertex_matches_unfolding() {
    let m = make_icosphere(0);
    let v0 = 0;
    let w0 = m.fan(v0).wedges[0];
    for (wa, wb) in [(0.1, 0.1), (0.15, 0.05), (0.02, 0.2)] {
        let mut bary = [0.0; 3];
        bary[w0.corner] = 1.0 - wa - wb;
        bary[m.local_index(w0.face, w0.from).unwrap()] = wa;
        bary[m.local_index(w0.face, w0.to).unwrap()] = wb;
        let p = SurfacePoint::new(w0.face, bary);
        let x = m.embed(&p);
        let d = m.vertex(v0) - x;
        let s = 0.25;
        let t = trace(&m, &p, &(d.normalize() * (d.norm() + s)), &TraceConfig::default()).unwrap();
        let expected = unfolded_vertex_oracle(&m, v0, x, s);
        assert!((m.embed(&t.final_point) - expected).norm() < 1e-12, "{:?}", (wa, wb));
    }
}

#[test]
fn zero_vector_returns_start() {
    let m = make_icosphere(1);
    let p = SurfacePoint::new(3, [0.2, 0.3, 0.5]);
    let t = trace(&m, &p, &Vec3::zeros(), &TraceConfig::default()).unwrap();
    assert_eq!(t.final_point, p);
    assert_eq!(t.traced_length, 0.0);
    assert_eq!(t.terminated_by, Termination::LengthReached);
}

#[test]
fn north_pole_quarter_turn_matches_sphere() {
    let m = make_icosphere(5);
    let (p, _) = m.closest_point(&Vec3::z());
    let n = m.face_normal(p.face);
    for k in 0..8 {
        let a = k as f64 * FRAC_PI_4;
        let t0 = Vec3::new(a.cos(), a.sin(), 0.0);
        let dir = (t0 - n * n.dot(&t0)).normalize() * FRAC_PI_2;
        let t = trace(&m, &p, &dir, &TraceConfig::default()).unwrap();
        assert_eq!(t.terminated_by, Termination::LengthReached);
        let (ps, vs) = to_unit_sphere(&m, &p, &dir);
        let q = sphere_exp(&ps, &vs).unwrap();
        let err = (m.embed(&t.final_point) - q).norm();
        assert!(err < 5e-3, "direction {k}: {err}");
    }
}

#[test]
fn batch_of_one_matches_trace() {
    let m = make_icosphere(3);
    let p = SurfacePoint::new(17, [0.1, 0.6, 0.3]);
    let n = m.face_normal(17);
    let v = (Vec3::new(0.3, -0.4, 0.8) - n * n.dot(&Vec3::new(0.3, -0.4, 0.8))).normalize() * 1.3;
    let cfg = TraceConfig::with_path();
    let single = trace(&m, &p, &v, &cfg).unwrap();
    let batch = trace_batch(&m, &[TraceRequest::new(p, v)], &cfg, Some(2));
    assert_eq!(batch[0].as_ref().unwrap(), &single);
}

#[test]
fn heterogeneous_batch_is_confined() {
    let a = make_icosphere(2);
    let b = make_plane(5, 5, 2.0);
    let va = {
        let n = a.face_normal(4);
        (Vec3::z() - n * n.z).normalize() * 2.5
    };
    let reqs = vec![
        (0, TraceRequest::new(SurfacePoint::centroid(4), va)),
        (1, TraceRequest::new(SurfacePoint::centroid(24), Vec3::new(0.3, 0.2, 0.0))),
        (1, TraceRequest::new(SurfacePoint::centroid(0), Vec3::new(-5.0, 0.0, 0.0))),
    ];
    let out = tracer::trace_batch_merged(&[&a, &b], &reqs, &TraceConfig::default(), None).unwrap();
    let t0 = out[0].as_ref().unwrap();
    assert!(t0.final_point.face < a.num_faces());
    assert_eq!(t0, &trace(&a, &SurfacePoint::centroid(4), &va, &TraceConfig::default()).unwrap());
    let t1 = out[1].as_ref().unwrap();
    assert!((b.embed(&t1.final_point) - b.embed(&SurfacePoint::centroid(24)) - Vec3::new(0.3, 0.2, 0.0)).norm() < 1e-12);
    assert_eq!(out[2].as_ref().unwrap().terminated_by, Termination::Boundary);
}


#[test]
fn hole_avoidance_off_stops_at_boundary() {
    let m = make_annulus(0.5, 2.0, 6, 32);
    let (p, _) = m.closest_point(&Vec3::new(-1.5, 0.2, 0.0));
    let t = trace(&m, &p, &Vec3::new(3.0, 0.0, 0.0), &TraceConfig::default()).unwrap();
    assert_eq!(t.terminated_by, Termination::Boundary);
    assert!(t.traced_length < 3.0);
    assert!((m.embed(&t.final_point).norm() - 0.5).abs() < 0.02);
}

/// Straight line, slide over the convex hole polygon, resume along the
/// original direction at the tangent vertex; computed from the polygon alone.
fn annulus_detour_oracle(start: Vec3, dir: Vec3, length: f64, inner: f64, n: usize) -> Vec3 {
    let poly: Vec<Vec3> = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            Vec3::new(inner * a.cos(), inner * a.sin(), 0.0)
        })
        .collect();
    // first hit of the ray with the polygon
    let mut hit = (f64::INFINITY, 0usize);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (t, _) = ray_exit([start.x, start.y], [dir.x, dir.y], [[a.x, a.y], [b.x, b.y], [a.x, a.y]]);
        if t < hit.0 {
            hit = (t, i);
        }
    }
    let (t_hit, i) = hit;
    let h = start + dir * t_hit;
    // slide towards the endpoint with more progress along dir
    let (mut cur, step): (usize, isize) =
        if (poly[(i + 1) % n] - poly[i]).dot(&dir) > 0.0 { ((i + 1) % n, 1) } else { (i, -1) };
    let mut used = t_hit + (poly[cur] - h).norm();
    let at = |k: isize| poly[k.rem_euclid(n as isize) as usize];
    loop {
        let ep = at(cur as isize - step) - poly[cur];
        let en = at(cur as isize + step) - poly[cur];
        // dir = alpha * ep + beta * en; strictly positive weights mean the ray enters the hole
        let det = ep.x * en.y - ep.y * en.x;
        let alpha = (dir.x * en.y - dir.y * en.x) / det;
        let beta = (ep.x * dir.y - ep.y * dir.x) / det;
        if !(alpha > 1e-12 && beta > 1e-12) {
            break;
        }
        used += en.norm();
        cur = (cur as isize + step).rem_euclid(n as isize) as usize;
    }
    poly[cur] + dir * (length - used)
}

#[test]
fn hole_avoidance_rounds_convex_hole() {
    let m = make_annulus(0.5, 2.0, 6, 32);
    let cfg = TraceConfig { hole_avoidance: true, record_path: true, ..Default::default() };
    for y in [0.2, -0.3, 0.05] {
        let start = Vec3::new(-1.5, y, 0.0);
        let (p, _) = m.closest_point(&start);
        let t = trace(&m, &p, &Vec3::new(3.0, 0.0, 0.0), &cfg).unwrap();
        assert_eq!(t.terminated_by, Termination::LengthReached);
        assert!((t.traced_length - 3.0).abs() < 1e-9);
        assert!((t.final_dir - Vec3::x()).norm() < 1e-9);
        let expected = annulus_detour_oracle(start, Vec3::x(), 3.0, 0.5, 32);
        assert!((m.embed(&t.final_point) - expected).norm() < 1e-9, "y={y}: {:?} vs {expected:?}", m.embed(&t.final_point));
    }
}

#[test]
fn collinear_boundary_edge_is_a_pure_slide() {
    let m = make_plane(4, 4, 2.0);
    let (p, _) = m.closest_point(&Vec3::new(-0.9, -1.0, 0.0));
    for hole_avoidance in [false, true] {
        let cfg = TraceConfig { hole_avoidance, ..Default::default() };
        let t = trace(&m, &p, &Vec3::new(1.5, 0.0, 0.0), &cfg).unwrap();
        assert_eq!(t.terminated_by, Termination::LengthReached);
        assert!((m.embed(&t.final_point) - Vec3::new(0.6, -1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn max_steps_terminates() {
    let m = make_icosphere(3);
    let cfg = TraceConfig { max_steps: Some(3), ..Default::default() };
    let n = m.face_normal(0);
    let v = (Vec3::z() - n * n.z).normalize() * 3.0;
    let t = trace(&m, &SurfacePoint::centroid(0), &v, &cfg).unwrap();
    assert_eq!(t.terminated_by, Termination::MaxSteps);
    assert_eq!(t.steps, 3);
}

#[test]
fn mobius_trace_runs_around() {
    let m = crate::oracles::make_mobius(48, 1.0, 0.3);
    let p = SurfacePoint::centroid(0);
    let f = m.face(0);
    let d = (m.vertex(f[1]) - m.vertex(f[0])).normalize();
    let d = m.project_to_face_plane(0, &d).normalize();
    let t = trace(&m, &p, &(d * 10.0), &TraceConfig { transport_payload: Some(m.face_normal(0).cross(&d)), ..Default::default() })
        .unwrap();
    assert!(t.traced_length > 0.0);
    assert!((t.payload.unwrap().norm() - 1.0).abs() < 1e-10);
}

fn sphere_sample() -> impl Strategy<Value = (usize, [f64; 3], f64, f64)> {
    (0usize..1280, 0.01..1.0f64, 0.01..1.0f64, 0.0..2.0 * PI, 0.05..3.0f64)
        .prop_map(|(f, a, b, ang, len)| {
            let s = a + b + 0.01;
            (f, [a / s, b / s, 0.01 / s], ang, len)
        })
}

fn in_plane(m: &Mesh, f: usize, ang: f64) -> Vec3 {
    let fr = m.face(f);
    let e = (m.vertex(fr[1]) - m.vertex(fr[0])).normalize();
    let w = m.face_normal(f).cross(&e);
    e * ang.cos() + w * ang.sin()
}

fn check_on_mesh(m: &Mesh, t: &GeodesicTrace) -> std::result::Result<(), TestCaseError> {
    for p in t.points.iter().chain(std::iter::once(&t.final_point)) {
        prop_assert!(p.bary.iter().all(|&b| (0.0..=1.0).contains(&b)));
        prop_assert!((p.bary.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let x = m.embed(p);
        let o = m.vertex(m.face(p.face)[0]);
        prop_assert!((x - o).dot(&m.face_normal(p.face)).abs() < 1e-9);
    }
    for w in t.points.windows(2) {
        let (a, b) = (m.face(w[0].face), m.face(w[1].face));
        prop_assert!(a.iter().any(|v| b.contains(v)));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_traces_keep_invariants((f, b, ang, len) in sphere_sample()) {
        let m = make_icosphere(3);
        let d = in_plane(&m, f, ang);
        let w = m.face_normal(f).cross(&d) * 0.7 + d * 0.3;
        let cfg = TraceConfig { record_path: true, transport_payload: Some(w), ..Default::default() };
        let t = trace(&m, &SurfacePoint::new(f, b), &(d * len), &cfg).unwrap();
        prop_assert_eq!(t.terminated_by, Termination::LengthReached);
        prop_assert!((t.traced_length - len).abs() <= 1e-9 * len);
        let seg: f64 = t.segment_lengths.iter().sum();
        prop_assert!((seg - t.traced_length).abs() <= 1e-9 * len);
        prop_assert!((t.final_dir.norm() - 1.0).abs() < 1e-10);
        prop_assert!((t.payload.unwrap().norm() - w.norm()).abs() < 1e-10 * w.norm());
        prop_assert!(t.final_dir.dot(&m.face_normal(t.final_point.face)).abs() < 1e-10);
        check_on_mesh(&m, &t)?;
    }

    #[test]
    fn flat_meshes_are_euclidean(seed in 0u64..1000, x in -0.5..0.5f64, y in -0.5..0.5f64, ang in 0.0..2.0 * PI, len in 0.0..0.9f64) {
        // five distinct random triangulations per case
        for k in 0..5 {
            let m = make_plane_random(7, 3.0, seed * 5 + k);
            let start = Vec3::new(x, y, 0.0);
            let (p, _) = m.closest_point(&start);
            let v = Vec3::new(ang.cos(), ang.sin(), 0.0) * len;
            let w = Vec3::new(0.3, -0.8, 0.0);
            let cfg = TraceConfig { record_path: true, transport_payload: Some(w), ..Default::default() };
            let t = trace(&m, &p, &v, &cfg).unwrap();
            prop_assert!((m.embed(&t.final_point) - start - v).norm() < 1e-8);
            prop_assert!((t.payload.unwrap() - w).norm() < 1e-10);
            check_on_mesh(&m, &t)?;
        }
    }

    #[test]
    fn edge_crossing_unfolds_to_straight_line(fold in -2.5..2.5f64, s in 0.05..0.95f64, ang in 0.1..3.0f64) {
        let m = hinge(fold);
        let p = SurfacePoint::new(0, [1.0 - s, s, 0.0]);
        // a direction leaving face 0 through the shared edge (y decreasing)
        let d = Vec3::new(ang.cos(), -ang.sin(), 0.0);
        let (_, d2, _) = transport_over_edge(&m, &p, 2, &d).unwrap();
        prop_assert!((d2.norm() - 1.0).abs() < 1e-12);
        // rotate face 1 back into the plane of face 0 with Rodrigues about the x axis
        let c = m.vertex(3);
        let phi = c.z.atan2(-c.y);
        let (sn, cs) = phi.sin_cos();
        let back = Vec3::new(d2.x, cs * d2.y - sn * d2.z, sn * d2.y + cs * d2.z);
        prop_assert!((back - d).norm() < 1e-12);
    }
}

#[test]
fn octant_holonomy_is_quarter_turn() {
    let m = make_icosphere(6);
    let corners = [Vec3::x(), Vec3::z(), Vec3::y()];
    let (mut p, _) = m.closest_point(&corners[0]);
    let n0 = m.face_normal(p.face);
    let w0 = (Vec3::z() - n0 * n0.z).normalize();
    let mut w = w0;
    let mut n_final = n0;
    for leg in 0..3 {
        let target = corners[(leg + 1) % 3];
        let n = m.face_normal(p.face);
        let dir = (target - n * n.dot(&target)).normalize() * FRAC_PI_2;
        let cfg = TraceConfig { transport_payload: Some(w), ..Default::default() };
        let t = trace(&m, &p, &dir, &cfg).unwrap();
        p = t.final_point;
        w = t.payload.unwrap();
        n_final = m.face_normal(p.face);
    }
    let w0p = (w0 - n_final * n_final.dot(&w0)).normalize();
    let angle = w0p.cross(&w).dot(&n_final).atan2(w0p.dot(&w)).abs();
    assert!((angle - FRAC_PI_2).abs() < 2e-2, "holonomy {angle}");
}

#[test]
fn default_step_budget() {
    assert_eq!(default_max_steps(10000), 1100);
}
