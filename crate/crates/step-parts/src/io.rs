//! Carrier files: `<stem>.obj` geometry plus `<stem>.labels.json` sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use step_parts_core::brep::PrimitiveType;
use step_parts_core::carrier::{Carrier, CarrierMeta};
use step_parts_core::geom::Vec3;
use step_parts_core::pipeline::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },
}

impl IoError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }

    fn schema(path: &Path, message: impl Into<String>) -> Self {
        IoError::Schema { path: path.to_path_buf(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarMeta {
    #[serde(flatten)]
    pub carrier: CarrierMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    /// Reserved for per-triangle attributes beyond labels; always empty here.
    #[serde(default)]
    pub extensions: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelsFile {
    pub schema: u32,
    pub meta: SidecarMeta,
    pub part_label: Vec<u32>,
    pub source_face: Vec<u32>,
    pub primitive: Vec<PrimitiveType>,
}

impl LabelsFile {
    pub fn new(c: &Carrier, config: Option<&RunConfig>) -> Self {
        LabelsFile {
            schema: SCHEMA_VERSION,
            meta: SidecarMeta { carrier: c.meta.clone(), config: config.cloned(), extensions: Default::default() },
            part_label: c.part_label.clone(),
            source_face: c.source_face.clone(),
            primitive: c.primitive.clone(),
        }
    }

    pub fn num_triangles(&self) -> usize {
        self.part_label.len()
    }
}

/// OBJ text with one `g part_<id>` line before each label block.
pub fn obj_string(c: &Carrier) -> String {
    let mut s = String::with_capacity(40 * (c.vertices.len() + c.triangles.len()));
    for v in &c.vertices {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    let mut current = None;
    for (t, tri) in c.triangles.iter().enumerate() {
        let l = c.part_label[t];
        if current != Some(l) {
            let _ = writeln!(s, "g part_{l}");
            current = Some(l);
        }
        let _ = writeln!(s, "f {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1);
    }
    s
}

pub fn labels_string(c: &Carrier, config: Option<&RunConfig>) -> String {
    let mut s = serde_json::to_string_pretty(&LabelsFile::new(c, config)).expect("labels serialize");
    s.push('\n');
    s
}

/// Paths of the two carrier files for `stem` in `dir`.
pub fn carrier_paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{stem}.obj")), dir.join(format!("{stem}.labels.json")))
}

pub fn write_carrier(c: &Carrier, config: Option<&RunConfig>, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let (obj, labels) = carrier_paths(dir, stem);
    fs::write(&obj, obj_string(c)).map_err(|e| IoError::io(&obj, e))?;
    fs::write(&labels, labels_string(c, config)).map_err(|e| IoError::io(&labels, e))?;
    Ok((obj, labels))
}

/// Accepts `x.labels.json`, `x.obj` or the bare stem `x`.
pub fn resolve_pair(path: &Path) -> (PathBuf, PathBuf) {
    let s = path.to_string_lossy();
    let stem = s.strip_suffix(".labels.json").or_else(|| s.strip_suffix(".obj")).unwrap_or(&s);
    (PathBuf::from(format!("{stem}.obj")), PathBuf::from(format!("{stem}.labels.json")))
}

pub fn read_labels(path: &Path) -> Result<LabelsFile, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let f: LabelsFile = serde_json::from_str(&text).map_err(|e| IoError::schema(path, e.to_string()))?;
    if f.schema != SCHEMA_VERSION {
        return Err(IoError::schema(path, format!("unsupported schema version {}", f.schema)));
    }
    let n = f.part_label.len();
    if f.source_face.len() != n || f.primitive.len() != n {
        return Err(IoError::schema(path, "per-triangle arrays differ in length"));
    }
    if f.part_label.contains(&0) {
        return Err(IoError::schema(path, "part labels start at 1"));
    }
    Ok(f)
}

fn parse_obj(path: &Path, text: &str) -> Result<(Vec<Vec3>, Vec<[u32; 3]>, Vec<Option<u32>>), IoError> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    let mut groups = Vec::new();
    let mut group = None;
    for (ln, line) in text.lines().enumerate() {
        let bad = |m: &str| IoError::schema(path, format!("line {}: {m}", ln + 1));
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(str::parse).collect::<Result<_, _>>().map_err(|_| bad("bad vertex"))?;
                if c.len() != 3 {
                    return Err(bad("vertex needs 3 coordinates"));
                }
                verts.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let ix: Vec<u32> = it
                    .map(|t| t.split('/').next().unwrap_or("").parse::<u32>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("bad face"))?;
                if ix.len() != 3 || ix.iter().any(|&i| i == 0 || i as usize > verts.len()) {
                    return Err(bad("face must reference 3 existing vertices"));
                }
                tris.push([ix[0] - 1, ix[1] - 1, ix[2] - 1]);
                groups.push(group);
            }
            Some("g") => {
                group = it.next().and_then(|g| g.strip_prefix("part_")).and_then(|g| g.parse().ok());
            }
            _ => {}
        }
    }
    Ok((verts, tris, groups))
}

/// Reads a carrier written by [`write_carrier`]; `path` may name either file
/// or the stem.
pub fn read_carrier(path: &Path) -> Result<(Carrier, Option<RunConfig>), IoError> {
    let (obj, labels) = resolve_pair(path);
    let f = read_labels(&labels)?;
    let text = fs::read_to_string(&obj).map_err(|e| IoError::io(&obj, e))?;
    let (vertices, triangles, groups) = parse_obj(&obj, &text)?;
    if triangles.len() != f.num_triangles() {
        return Err(IoError::schema(&labels, format!("{} labels for {} triangles", f.num_triangles(), triangles.len())));
    }
    if groups.iter().zip(&f.part_label).any(|(g, l)| g.is_some_and(|g| g != *l)) {
        return Err(IoError::schema(&obj, "OBJ groups disagree with part labels"));
    }
    let c = Carrier {
        vertices,
        triangles,
        part_label: f.part_label,
        source_face: f.source_face,
        primitive: f.primitive,
        meta: f.meta.carrier,
    };
    Ok((c, f.meta.config))
}
