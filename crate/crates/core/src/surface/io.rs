use super::{ConeSurface, CurveSegment, Gluing, Marks, MarkedPoints, SurfaceError};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Json,
    Obj,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    name: String,
    faces: Vec<[f64; 3]>,
    gluings: Vec<(usize, usize, usize, usize, bool)>,
    marks: MarkedPoints,
}

/// Lossless JSON form `{name, faces, gluings, marks}`.
pub fn to_json(s: &ConeSurface) -> String {
    let file = MeshFile {
        name: s.name().to_string(),
        faces: s.lengths().to_vec(),
        gluings: s.gluings().iter().map(|g| (g.face, g.slot, g.other_face, g.other_slot, g.reversing)).collect(),
        marks: s.marked_points(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("mesh serializes");
    text.push('\n');
    text
}

pub fn import_json(text: &str) -> Result<ConeSurface, SurfaceError> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| SurfaceError::Format(e.to_string()))?;
    let gluings = file
        .gluings
        .iter()
        .map(|&(face, slot, other_face, other_slot, reversing)| Gluing { face, slot, other_face, other_slot, reversing })
        .collect();
    let mut s = ConeSurface::new(&file.name, file.faces, gluings, Marks::default())?;
    let corner = |v: usize| -> Result<(usize, usize), SurfaceError> {
        s.vertices()
            .get(v)
            .and_then(|x| x.corners.iter().min().copied())
            .ok_or_else(|| SurfaceError::Format(format!("unknown vertex {v}")))
    };
    let mut marks = Marks {
        weierstrass: file.marks.weierstrass.iter().map(|&v| corner(v)).collect::<Result<_, _>>()?,
        p: file.marks.p.map(corner).transpose()?,
        q: file.marks.q.map(corner).transpose()?,
        soul: Vec::new(),
    };
    for seg in &file.marks.soul {
        if seg.face() >= s.num_faces() {
            return Err(SurfaceError::Format(format!("soul segment in unknown face {}", seg.face())));
        }
    }
    marks.soul = file.marks.soul.iter().copied().collect::<Vec<CurveSegment>>();
    s.set_marks(marks);
    Ok(s)
}

/// One triangle per face in its own frame, laid out along the x-axis.
pub fn to_obj(s: &ConeSurface) -> String {
    let mut out = format!("# {}\n", s.name());
    let mut x = 0.0;
    for f in 0..s.num_faces() {
        let p = s.face_corners(f);
        let w = p.iter().map(|q| q[0]).fold(f64::MIN, f64::max) - p.iter().map(|q| q[0]).fold(f64::MAX, f64::min);
        let shift = x - p.iter().map(|q| q[0]).fold(f64::MAX, f64::min);
        for q in p {
            out.push_str(&format!("v {} {} 0\n", q[0] + shift, q[1]));
        }
        x += w + 0.05;
    }
    for f in 0..s.num_faces() {
        out.push_str(&format!("f {} {} {}\n", 3 * f + 1, 3 * f + 2, 3 * f + 3));
    }
    out
}

pub fn export_mesh(s: &ConeSurface, path: &Path, format: MeshFormat) -> Result<(), SurfaceError> {
    let text = match format {
        MeshFormat::Json => to_json(s),
        MeshFormat::Obj => to_obj(s),
    };
    let mut f = std::fs::File::create(path).map_err(|e| SurfaceError::Io(e.to_string()))?;
    f.write_all(text.as_bytes()).map_err(|e| SurfaceError::Io(e.to_string()))
}
