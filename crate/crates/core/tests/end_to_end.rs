use step_parts_core::analysis::{dihedral_histogram, DEFAULT_BINS};
use step_parts_core::brep::{build_brep, transform_graph};
use step_parts_core::eval::{agreement, sample_points, transfer_labels, TransferMode};
use step_parts_core::geom::{RigidMotion, Vec3};
use step_parts_core::partition::build_adjacency;
use step_parts_core::pipeline::{extract, extract_graph, RunConfig, Stage};
use step_parts_core::step::{parse_step, write_step};
use step_parts_core::synth;

#[test]
fn fixtures_survive_a_part21_round_trip() {
    let cfg = RunConfig::default();
    for (name, g) in synth::fixtures() {
        let bytes = write_step(&g);
        assert_eq!(parse_step(&bytes).unwrap(), g, "{name}");
        let direct = extract_graph(&g, &cfg, &mut |_| {}).unwrap().carrier;
        let parsed = extract(&bytes, &cfg, &mut |_| {}).unwrap().carrier;
        assert_eq!(direct, parsed, "{name}");
        assert!(parsed.meta.skipped_faces.is_empty(), "{name}: {:?}", parsed.meta.skipped_faces);
    }
}

#[test]
fn corpus_extracts_without_skips() {
    let cfg = RunConfig { tess: step_parts_core::tessellate::TessellationSpec::t2(), ..RunConfig::default() };
    for (name, g) in synth::corpus(24, 7) {
        let e = extract_graph(&g, &cfg, &mut |_| {}).unwrap();
        assert!(e.tessellation.skipped.is_empty(), "{name}");
        assert_eq!(e.carrier.meta.num_parts, e.carrier.labels().len());
        let k = e.carrier.meta.num_parts as u32;
        assert_eq!(e.carrier.labels(), (1..=k).collect::<Vec<_>>());
    }
}

#[test]
fn moved_model_agrees_with_original_after_moving_samples() {
    let m = RigidMotion::from_axis_angle(Vec3::new(0.2, -1.0, 0.4), 0.7, Vec3::new(3.0, 1.0, -2.0));
    let g = synth::split_top_box(12.0, 8.0, 5.0);
    let cfg = RunConfig::default();
    let a = extract_graph(&g, &cfg, &mut |_| {}).unwrap().carrier;
    let b = extract_graph(&transform_graph(&g, &m), &cfg, &mut |_| {}).unwrap().carrier;
    assert_eq!(a.meta.num_parts, b.meta.num_parts);
    let mut pts = sample_points(&a, 5_000, 1, 0.1).unwrap();
    for p in pts.points.iter_mut().chain(pts.boundary_points.iter_mut()) {
        *p = m.apply_point(*p);
    }
    let moved = transfer_labels(&pts, &b, TransferMode::Triangle).unwrap();
    let r = agreement(&pts, &moved).unwrap();
    assert!(r.accuracy > 0.999, "{}", r.accuracy);
}

#[test]
fn stages_reported_in_order_and_histogram_counts_models() {
    let mut seen = Vec::new();
    extract(&write_step(&synth::cube(3.0)), &RunConfig::default(), &mut |s| seen.push(s)).unwrap();
    assert_eq!(seen, &Stage::ALL[..5]);
    let graphs: Vec<_> = synth::fixtures().iter().map(|(_, g)| build_adjacency(&build_brep(g).unwrap())).collect();
    let h = dihedral_histogram(&graphs, DEFAULT_BINS, 8.0);
    assert_eq!(h.models, graphs.len());
    assert_eq!(h.counts.iter().sum::<u64>(), h.total);
}
