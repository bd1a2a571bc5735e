use super::*;
use crate::brep::{build_brep, PrimitiveType};
use crate::partition::{build_adjacency, extract_parts, DEFAULT_THETA};
use crate::synth;
use proptest::prelude::*;

/// Unit-square grid carrier in the z=0 plane; `label(i, j)` per square.
fn grid(w: usize, h: usize, label: impl Fn(usize, usize) -> u32) -> Carrier {
    let mut c = Carrier::default();
    for j in 0..=h {
        for i in 0..=w {
            c.vertices.push(Vec3::new(i as f64, j as f64, 0.0));
        }
    }
    let v = |i: usize, j: usize| (i + (w + 1) * j) as u32;
    for j in 0..h {
        for i in 0..w {
            for tri in [[v(i, j), v(i + 1, j), v(i + 1, j + 1)], [v(i, j), v(i + 1, j + 1), v(i, j + 1)]] {
                c.triangles.push(tri);
                c.part_label.push(label(i, j));
                c.source_face.push(0);
                c.primitive.push(PrimitiveType::Plane);
            }
        }
    }
    c
}

fn labels_only(l: &[u32]) -> SampledLabels {
    SampledLabels { points: vec![Vec3::ZERO; l.len()], labels: l.to_vec(), ..Default::default() }
}

#[test]
fn single_triangle_carrier() {
    let mut c = Carrier::default();
    c.vertices = vec![Vec3::ZERO, Vec3::X, Vec3::Y];
    c.triangles = vec![[0, 1, 2]];
    c.part_label = vec![4];
    c.source_face = vec![0];
    c.primitive = vec![PrimitiveType::Plane];
    let s = sample_points(&c, 1000, 1, 0.01).unwrap();
    assert!(s.labels.iter().all(|&l| l == 4));
    for p in &s.points {
        assert!(p.x >= 0.0 && p.y >= 0.0 && p.x + p.y <= 1.0 + 1e-12 && p.z == 0.0);
    }
    assert!(s.boundary_points.is_empty());
}

#[test]
fn equal_area_parts_follow_binomial() {
    let c = grid(10, 10, |i, _| if i < 5 { 1 } else { 2 });
    let s = sample_points(&c, 10_000, 42, 0.1).unwrap();
    let ones = s.labels.iter().filter(|&&l| l == 1).count() as f64;
    // mean 5000, sigma 50
    assert!((ones - 5000.0).abs() <= 150.0, "{ones}");
}

#[test]
fn sampling_is_seeded() {
    let c = grid(4, 3, |i, j| (i + j) as u32 % 3 + 1);
    let a = sample_points(&c, 500, 9, 0.05).unwrap();
    assert_eq!(a, sample_points(&c, 500, 9, 0.05).unwrap());
    let b = sample_points(&c, 500, 10, 0.05).unwrap();
    assert_ne!(a.points, b.points);
    let r = agreement(&b, &b).unwrap();
    assert_eq!((r.accuracy, r.miou, r.boundary_accuracy), (1.0, 1.0, 1.0));
}

#[test]
fn boundary_samples_stay_in_band_on_their_side() {
    let c = grid(10, 4, |i, _| if i < 5 { 1 } else { 2 });
    let s = sample_points(&c, 2000, 3, 0.25).unwrap();
    assert_eq!(s.boundary_points.len(), 200);
    for (p, l) in s.boundary_points.iter().zip(&s.boundary_labels) {
        assert!((p.x - 5.0).abs() <= 0.25 + 1e-12);
        assert_eq!(*l, if p.x < 5.0 { 1 } else if p.x > 5.0 { 2 } else { *l });
    }
}

#[test]
fn empty_inputs_rejected() {
    assert_eq!(sample_points(&Carrier::default(), 10, 0, 0.1), Err(EvalError::EmptyCarrier));
    let c = grid(1, 1, |_, _| 1);
    assert_eq!(sample_points(&c, 0, 0, 0.1), Err(EvalError::NoSamples));
    let s = sample_points(&c, 10, 0, 0.1).unwrap();
    assert_eq!(transfer_labels(&s, &Carrier::default(), TransferMode::Triangle), Err(EvalError::EmptyTarget));
    assert_eq!(transfer_from_vertices(&s, &[], &[]), Err(EvalError::EmptyTarget));
}

#[test]
fn transfer_to_own_vertices_is_identity() {
    let c = grid(3, 3, |i, j| (i * 3 + j) as u32 + 1);
    let (v, l) = vertex_labels(&c);
    let pts = SampledLabels { points: v.clone(), labels: l.clone(), ..Default::default() };
    let moved = transfer_from_vertices(&pts, &v, &l).unwrap();
    assert_eq!(moved.labels, l);
}

#[test]
fn single_label_target() {
    let src = grid(3, 3, |i, _| i as u32 + 1);
    let dst = grid(3, 3, |_, _| 7);
    let s = sample_points(&src, 300, 5, 0.1).unwrap();
    for mode in [TransferMode::Vertex, TransferMode::Triangle] {
        let t = transfer_labels(&s, &dst, mode).unwrap();
        assert!(t.labels.iter().chain(&t.boundary_labels).all(|&l| l == 7));
    }
}

#[test]
fn permutation_recovered() {
    let r = [1, 1, 2, 2, 2, 3, 4, 4];
    let perm = |l: u32| [0, 30, 10, 40, 20][l as usize];
    let c: Vec<u32> = r.iter().map(|&l| perm(l)).collect();
    let al = align_labels(&r, &c).unwrap();
    assert_eq!(al.matched, vec![(1, 30), (2, 10), (3, 40), (4, 20)]);
    let rep = agreement(&labels_only(&r), &labels_only(&c)).unwrap();
    let same = agreement(&labels_only(&r), &labels_only(&r)).unwrap();
    assert_eq!((rep.accuracy, rep.miou, rep.boundary_accuracy), (1.0, 1.0, 1.0));
    assert_eq!(rep.per_label_iou, same.per_label_iou);
}

#[test]
fn cardinality_mismatch_leaves_one_unmatched() {
    let r = [1, 1, 2, 2, 3, 3];
    let c = [5, 5, 5, 6, 6, 6];
    let al = align_labels(&r, &c).unwrap();
    assert_eq!(al.matched.len(), 2);
    assert_eq!(al.unmatched_ref.len(), 1);
    assert!(al.unmatched_cand.is_empty());
}

#[test]
fn constant_candidate_against_two_halves() {
    let r: Vec<u32> = (0..100).map(|i| if i < 50 { 1 } else { 2 }).collect();
    let c = vec![9u32; 100];
    let rep = agreement(&labels_only(&r), &labels_only(&c)).unwrap();
    assert_eq!(rep.accuracy, 0.5);
    assert_eq!(rep.miou, 0.25);
    assert_eq!(rep.unmatched_ref, vec![2]);
}

#[test]
fn length_mismatch_rejected() {
    assert_eq!(align_labels(&[1, 2], &[1]).unwrap_err(), EvalError::LengthMismatch);
}

proptest! {
    #[test]
    fn metrics_bounded_and_miou_one_iff_identical(
        r in proptest::collection::vec(1u32..5, 1..200),
        c in proptest::collection::vec(1u32..5, 200),
        perm in Just([3u32, 1, 4, 2]),
    ) {
        let c = &c[..r.len()];
        let rep = agreement(&labels_only(&r), &labels_only(c)).unwrap();
        for m in [rep.accuracy, rep.miou, rep.boundary_accuracy] {
            prop_assert!((0.0..=1.0).contains(&m));
        }
        let mapped: Vec<u32> = c.iter().map(|&l| rep.matched.iter().find(|m| m.1 == l).map_or(0, |m| m.0)).collect();
        prop_assert_eq!(rep.miou == 1.0, mapped == r);

        let permuted: Vec<u32> = r.iter().map(|&l| perm[l as usize - 1]).collect();
        let p = agreement(&labels_only(&r), &labels_only(&permuted)).unwrap();
        prop_assert_eq!((p.accuracy, p.miou), (1.0, 1.0));
    }

    #[test]
    fn accuracy_symmetric_for_bijections(
        r in proptest::collection::vec(1u32..4, 30..120),
        flips in proptest::collection::vec(any::<bool>(), 120),
    ) {
        let c: Vec<u32> = r.iter().zip(&flips).map(|(&l, &f)| if f { l % 3 + 1 } else { l }).collect();
        let a = agreement(&labels_only(&r), &labels_only(&c)).unwrap();
        let b = agreement(&labels_only(&c), &labels_only(&r)).unwrap();
        if a.unmatched_ref.is_empty() && a.unmatched_cand.is_empty() {
            prop_assert_eq!(a.accuracy, b.accuracy);
        }
    }
}

fn partition_of(g: &crate::step::StepEntityGraph) -> (crate::brep::BRepSolid, Partition) {
    let s = build_brep(g).unwrap();
    let p = extract_parts(&build_adjacency(&s), DEFAULT_THETA);
    (s, p)
}

#[test]
fn cube_self_consistency_exact() {
    let (s, p) = partition_of(&synth::cube(10.0));
    for alt in [TessellationSpec::t0(), TessellationSpec::t1(), TessellationSpec::t2()] {
        let r = self_consistency(&s, &p, &TessellationSpec::t0(), &alt, 20, 20_000, 0, DEFAULT_BAND, TransferMode::Triangle).unwrap();
        assert_eq!((r.accuracy, r.miou), (1.0, 1.0), "{}", alt.name);
    }
}

#[test]
fn identical_specs_agree_exactly() {
    let (s, p) = partition_of(&synth::split_cylinder(5.0, 10.0));
    let t = TessellationSpec::t1();
    let r = self_consistency(&s, &p, &t, &t, 20, 5_000, 3, DEFAULT_BAND, TransferMode::Triangle).unwrap();
    assert_eq!((r.accuracy, r.miou, r.boundary_accuracy), (1.0, 1.0, 1.0));
    // welded boundary vertices carry a single label, so vertex transfer is
    // only approximately exact
    let r = self_consistency(&s, &p, &t, &t, 20, 5_000, 3, DEFAULT_BAND, TransferMode::Vertex).unwrap();
    assert!(r.accuracy > 0.9 && r.accuracy < 1.0);
}

#[test]
fn split_cylinder_coarse_vs_default() {
    let (s, p) = partition_of(&synth::split_cylinder(5.0, 10.0));
    let r = self_consistency(&s, &p, &TessellationSpec::t0(), &TessellationSpec::t2(), 20, DEFAULT_SAMPLES, 0, DEFAULT_BAND, TransferMode::Triangle)
        .unwrap();
    assert!(r.miou >= 0.95, "{}", r.miou);
    // frozen from the first verified run (seed 0, 1e5 samples)
    assert!((r.miou - 0.991_079_870_240_607_3).abs() < 1e-12, "{}", r.miou);
    assert!((r.accuracy - 0.996_45).abs() < 1e-12, "{}", r.accuracy);
}
