use super::*;
use crate::brep::{build_brep, BRepSolid};
use crate::geom::{PI, TAU};
use crate::synth::{self, Synth};

fn solid(g: &crate::step::StepEntityGraph) -> BRepSolid {
    build_brep(g).unwrap()
}

fn all_specs() -> [TessellationSpec; 4] {
    [TessellationSpec::t0(), TessellationSpec::t1(), TessellationSpec::t2(), TessellationSpec::custom(0.01, 30.0)]
}

fn surface_distance(s: &BRepSolid, face: usize, p: Vec3) -> f64 {
    let surf = s.surface_of(face);
    let (u, v) = surf.invert_point(p).unwrap();
    surf.eval(u, v).point.dist(p)
}

/// Closed hemisphere: one equator circle, no seam, plus the base disc.
fn hemisphere(r: f64) -> crate::step::StepEntityGraph {
    let mut sy = Synth::new("hemisphere");
    let a = sy.vertex(Vec3::new(r, 0.0, 0.0));
    let eq = sy.circle(a, Vec3::ZERO, Vec3::Z);
    let sph = sy.sphere(Vec3::ZERO, Vec3::Z, Vec3::X, r);
    sy.face(sph, true, &[vec![(eq, true)]]);
    sy.planar_face(-Vec3::Z, &[vec![eq]]);
    sy.finish_solid()
}

/// Cylinder whose lateral face is bounded by two circles only.
fn seamless_cylinder(r: f64, h: f64) -> crate::step::StepEntityGraph {
    let mut sy = Synth::new("seamless_cylinder");
    let a = sy.vertex(Vec3::new(r, 0.0, 0.0));
    let b = sy.vertex(Vec3::new(r, 0.0, h));
    let bot = sy.circle(a, Vec3::ZERO, Vec3::Z);
    let top = sy.circle(b, Vec3::new(0.0, 0.0, h), Vec3::Z);
    let cyl = sy.cylinder(Vec3::ZERO, Vec3::Z, Vec3::X, r);
    sy.face(cyl, true, &[vec![(bot, true)], vec![(top, false)]]);
    sy.planar_face(-Vec3::Z, &[vec![bot]]);
    sy.planar_face(Vec3::Z, &[vec![top]]);
    sy.finish_solid()
}

#[test]
fn planar_square_area_exact() {
    let s = solid(&synth::single_face(4.0));
    for spec in all_specs() {
        let m = tessellate_face(&s, 0, &spec).unwrap();
        assert!(m.triangles.len() >= 2);
        assert!((m.area() - 16.0).abs() <= 16.0 * 1e-9, "{} {}", spec.name, m.area());
    }
}

#[test]
fn cube_coarse_two_triangles_per_face() {
    let s = solid(&synth::cube(10.0));
    let t = tessellate_solid(&s, &TessellationSpec::custom(0.01, 30.0));
    assert_eq!(t.meshes.len(), 6);
    assert!(t.skipped.is_empty());
    assert_eq!(t.num_triangles(), 12);
    for m in &t.meshes {
        assert_eq!(m.triangles.len(), 2);
    }
    assert!((t.area() - 600.0).abs() < 1e-9);
}

#[test]
fn cube_faces_at_coarse_named_spec_are_dense_enough() {
    let s = solid(&synth::cube(10.0));
    let t = tessellate_solid(&s, &TessellationSpec::t2());
    for m in &t.meshes {
        assert!(m.triangles.len() >= 20, "{}", m.triangles.len());
    }
}

#[test]
fn empty_solid_gives_no_meshes() {
    let mut s = solid(&synth::cube(1.0));
    s.faces.clear();
    assert!(tessellate_solid(&s, &TessellationSpec::t0()).meshes.is_empty());
}

#[test]
fn triangle_normals_point_outward() {
    for (name, g) in synth::fixtures() {
        let s = solid(&g);
        let t = tessellate_solid(&s, &TessellationSpec::t0());
        for m in &t.meshes {
            let face = &s.faces[m.face];
            for k in 0..m.triangles.len() {
                let [a, b, c] = m.triangle(k);
                let n = (b - a).cross(c - a);
                let centroid = (a + b + c) * (1.0 / 3.0);
                let (u, v) = s.surface_of(face.id).invert_point(centroid).unwrap();
                let sn = s.face_normal(face.id, u, v).normal;
                assert!(n.dot(sn) > 0.0, "{name} face {}", face.id);
            }
        }
    }
}

#[test]
fn full_cylinder_area_within_one_percent() {
    let (r, h) = (5.0, 10.0);
    let s = solid(&synth::full_cylinder(r, h));
    let t = tessellate_solid(&s, &TessellationSpec::t0());
    let lateral = t.meshes.iter().find(|m| s.faces[m.face].primitive == crate::brep::PrimitiveType::Cylinder).unwrap();
    let exact = TAU * r * h;
    assert!((lateral.area() - exact).abs() / exact < 0.01, "{}", lateral.area());
}

#[test]
fn seamless_cylinder_joins_both_circles() {
    let (r, h) = (5.0, 10.0);
    let s = solid(&seamless_cylinder(r, h));
    let t = tessellate_solid(&s, &TessellationSpec::t0());
    assert!(t.skipped.is_empty(), "{:?}", t.skipped);
    let lateral = &t.meshes[0];
    let exact = TAU * r * h;
    assert!((lateral.area() - exact).abs() / exact < 0.01, "{}", lateral.area());
}

#[test]
fn hemisphere_closes_at_pole() {
    let s = solid(&hemisphere(2.0));
    let t = tessellate_solid(&s, &TessellationSpec::t0());
    assert!(t.skipped.is_empty(), "{:?}", t.skipped);
    let cap = &t.meshes[0];
    let exact = 2.0 * PI * 4.0;
    assert!((cap.area() - exact).abs() / exact < 0.02, "{}", cap.area());
    let pole = Vec3::new(0.0, 0.0, 2.0);
    assert_eq!(cap.vertices.iter().filter(|v| v.dist(pole) < 1e-9).count(), 1);
}

#[test]
fn sphere_octant_vertices_on_sphere() {
    let s = solid(&synth::sphere_octant(1.0));
    for spec in all_specs() {
        let t = tessellate_solid(&s, &spec);
        assert!(t.skipped.is_empty());
        let tol = spec.chord_tol * s.diagonal();
        let m = &t.meshes[0];
        for v in &m.vertices {
            assert!((v.norm() - 1.0).abs() <= tol, "{}", v.norm());
        }
        let exact = PI / 2.0;
        assert!((m.area() - exact).abs() / exact < 0.05, "{} {}", spec.name, m.area());
    }
}

#[test]
fn split_cylinder_face_ids() {
    let s = solid(&synth::split_cylinder(5.0, 10.0));
    let t = tessellate_solid(&s, &TessellationSpec::t0());
    let ids: Vec<usize> = t.meshes.iter().map(|m| m.face).collect();
    assert_eq!(ids, vec![0, 1, 2, 3]);
}

#[test]
fn fixtures_tessellate_within_tolerance() {
    for (name, g) in synth::fixtures() {
        let s = solid(&g);
        for spec in all_specs() {
            let t = tessellate_solid(&s, &spec);
            assert!(t.skipped.is_empty(), "{name} {}: {:?}", spec.name, t.skipped);
            assert_eq!(t.meshes.len(), s.faces.len());
            let diag = s.diagonal();
            let chord = spec.chord_tol * diag;
            for m in &t.meshes {
                for v in &m.vertices {
                    let d = surface_distance(&s, m.face, *v);
                    assert!(d <= chord.min(s.tol_onsurface()), "{name} {} face {} vertex off surface by {d}", spec.name, m.face);
                }
                for k in 0..m.triangles.len() {
                    let tri = m.triangle(k);
                    assert!(tri_area(tri) > 1e-14 * diag * diag);
                    let c = (tri[0] + tri[1] + tri[2]) * (1.0 / 3.0);
                    let d = surface_distance(&s, m.face, c);
                    assert!(d <= 1.5 * chord, "{name} {} face {} centroid deviation {d} > {chord}", spec.name, m.face);
                }
            }
        }
    }
}

#[test]
fn tessellation_is_deterministic() {
    for (_, g) in synth::fixtures() {
        let s = solid(&g);
        let a = tessellate_solid(&s, &TessellationSpec::t1());
        let b = tessellate_solid(&s, &TessellationSpec::t1());
        assert_eq!(a, b);
    }
}

#[test]
fn halving_chord_tol_never_reduces_curved_triangle_count() {
    for (name, g) in synth::fixtures() {
        let s = solid(&g);
        for base in [TessellationSpec::t0(), TessellationSpec::t2(), TessellationSpec::custom(0.02, 45.0)] {
            let mut fine = base.clone();
            fine.chord_tol *= 0.5;
            let a = tessellate_solid(&s, &base);
            let b = tessellate_solid(&s, &fine);
            for (ma, mb) in a.meshes.iter().zip(&b.meshes) {
                if s.faces[ma.face].primitive == crate::brep::PrimitiveType::Plane {
                    continue;
                }
                assert!(mb.triangles.len() >= ma.triangles.len(), "{name} {} face {}", base.name, ma.face);
            }
        }
    }
}

#[test]
fn shared_edges_have_identical_samples() {
    let s = solid(&synth::filleted_block(10.0, 8.0, 6.0, 2.0));
    let t = tessellate_solid(&s, &TessellationSpec::t0());
    let keys = |m: &FaceMesh| m.vertices.iter().map(|v| v.bits()).collect::<alloc::collections::BTreeSet<_>>();
    for e in &s.edges {
        let f = e.faces();
        let (a, b) = (keys(&t.meshes[f[0]]), keys(&t.meshes[f[1]]));
        let mid = e.curve.eval(e.mid_param());
        let _ = mid;
        assert!(a.contains(&e.start.bits()) && b.contains(&e.start.bits()));
        assert!(a.contains(&e.end.bits()) && b.contains(&e.end.bits()));
    }
}

#[test]
fn rotated_models_still_tessellate() {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for (name, g) in synth::fixtures() {
        let m = synth::random_motion(&mut rng, 50.0);
        let s = solid(&crate::brep::transform_graph(&g, &m));
        let t = tessellate_solid(&s, &TessellationSpec::t0());
        assert!(t.skipped.is_empty(), "{name}: {:?}", t.skipped);
    }
}

#[test]
fn spec_validation() {
    assert!(TessellationSpec::t0().is_valid());
    assert!(!TessellationSpec::custom(0.0, 20.0).is_valid());
    assert!(!TessellationSpec::custom(0.01, 90.0).is_valid());
    assert_eq!(TessellationSpec::by_name("t1"), Some(TessellationSpec::t1()));
    assert!(TessellationSpec::by_name("t9").is_none());
}
