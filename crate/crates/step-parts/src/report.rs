//! JSON reports and CSV tables.

use std::io::Write;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use step_parts_core::analysis::{primitive_columns, DihedralHistogram, SweepRecord};
use step_parts_core::eval::AgreementReport;
use step_parts_core::pipeline::RunConfig;

struct LabelIou<'a>(&'a [(u32, f64)]);

impl Serialize for LabelIou<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (l, v) in self.0 {
            m.serialize_entry(&l.to_string(), v)?;
        }
        m.end()
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    accuracy: f64,
    miou: f64,
    boundary_accuracy: f64,
    matched: Vec<[u32; 2]>,
    unmatched_ref: &'a [u32],
    unmatched_cand: &'a [u32],
    per_label_iou: LabelIou<'a>,
    num_points: usize,
    num_boundary_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a RunConfig>,
}

/// Agreement report as pretty JSON; `per_label_iou` keys are in label order.
pub fn report_json(r: &AgreementReport, config: Option<&RunConfig>) -> String {
    let j = ReportJson {
        accuracy: r.accuracy,
        miou: r.miou,
        boundary_accuracy: r.boundary_accuracy,
        matched: r.matched.iter().map(|&(a, b)| [a, b]).collect(),
        unmatched_ref: &r.unmatched_ref,
        unmatched_cand: &r.unmatched_cand,
        per_label_iou: LabelIou(&r.per_label_iou),
        num_points: r.num_points,
        num_boundary_points: r.num_boundary_points,
        config,
    };
    serde_json::to_string_pretty(&j).expect("report serialize") + "\n"
}

pub fn write_hist_csv<W: Write>(h: &DihedralHistogram, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin_lo", "bin_hi", "count"])?;
    for (lo, hi, n) in h.rows() {
        out.write_record([lo.to_string(), hi.to_string(), n.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn sweep_header() -> Vec<String> {
    let mut h: Vec<String> = ["model_id", "theta", "P", "H", "S_boundary", "D_intra"].map(String::from).into();
    h.extend(primitive_columns().iter().map(|p| p.as_str().to_string()));
    h
}

/// Rows must already be in model order.
pub fn write_sweep_csv<'a, W: Write>(rows: impl IntoIterator<Item = (&'a str, &'a SweepRecord)>, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(sweep_header())?;
    for (id, r) in rows {
        let mut rec = vec![id.to_string(), r.theta.to_string(), r.parts.to_string(), r.entropy.to_string(), r.s_boundary.to_string(), r.d_intra.to_string()];
        rec.extend(r.primitive_counts.iter().map(|c| c.to_string()));
        out.write_record(rec)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use step_parts_core::analysis::{dihedral_histogram, threshold_sweep, DEFAULT_BINS};
    use step_parts_core::brep::build_brep;
    use step_parts_core::partition::build_adjacency;
    use step_parts_core::synth;
    use step_parts_core::tessellate::TessellationSpec;

    #[test]
    fn report_layout() {
        let r = AgreementReport {
            accuracy: 1.0,
            miou: 0.5,
            boundary_accuracy: 1.0,
            matched: vec![(1, 2), (2, 1)],
            per_label_iou: vec![(2, 0.25), (10, 1.0)],
            unmatched_ref: vec![3],
            ..Default::default()
        };
        let v: serde_json::Value = serde_json::from_str(&report_json(&r, None)).unwrap();
        assert_eq!(v["matched"], serde_json::json!([[1, 2], [2, 1]]));
        assert_eq!(v["unmatched_ref"], serde_json::json!([3]));
        assert_eq!(v["per_label_iou"]["10"], 1.0);
        let text = report_json(&r, None);
        assert!(text.find("\"2\"").unwrap() < text.find("\"10\"").unwrap());
        assert!(v.get("config").is_none());
    }

    #[test]
    fn hist_csv_rows() {
        let g = build_adjacency(&build_brep(&synth::cube(1.0)).unwrap());
        let h = dihedral_histogram([&g], DEFAULT_BINS, 8.0);
        let mut buf = Vec::new();
        write_hist_csv(&h, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), DEFAULT_BINS + 1);
        assert_eq!(lines[0], "bin_lo,bin_hi,count");
        assert_eq!(lines[1], "0,2,0");
        assert_eq!(lines[46], "90,92,12");
    }

    #[test]
    fn sweep_csv_columns() {
        let s = build_brep(&synth::cube(1.0)).unwrap();
        let recs = threshold_sweep(&s, &[4.0, 8.0], &TessellationSpec::t2(), 20).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(recs.iter().map(|r| ("cube", r)), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("model_id,theta,P,H,S_boundary,D_intra,Plane,"));
        assert!(lines[1].starts_with("cube,4,6,2.58496250072"));
        assert_eq!(lines.len(), 3);
    }
}
