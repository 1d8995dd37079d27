use super::build::glue_by_corners;
use super::{corner_across, ConeSurface, Corner, CurveSegment, EdgeRole, Gluing, Marks, SurfaceError};
use crate::constants::SurfaceParameters;
use std::collections::{BTreeMap, BTreeSet};

/// Corner of sheet 1 corresponding to an original corner.
const MIRROR: [usize; 3] = [0, 2, 1];

/// Index of face `f` on sheet `sheet` of the orientation double cover.
pub fn cover_face(f: usize, sheet: usize) -> usize {
    2 * f + sheet
}

/// Slot of the cover face corresponding to slot `k` of the original face.
pub fn cover_slot(k: usize, sheet: usize) -> usize {
    if sheet == 0 {
        k
    } else {
        2 - k
    }
}

fn cover_corner(c: usize, sheet: usize) -> usize {
    if sheet == 0 {
        c
    } else {
        MIRROR[c]
    }
}

/// Orientation double cover. Face `f` lifts to faces `2f` (same frame) and
/// `2f + 1` (mirrored); a reversing gluing connects opposite sheets.
pub fn orientation_double_cover(s: &ConeSurface) -> Result<ConeSurface, SurfaceError> {
    if s.is_orientable() {
        return Err(SurfaceError::AlreadyOrientable);
    }
    let mut lengths = Vec::with_capacity(2 * s.num_faces());
    for l in s.lengths() {
        lengths.push(*l);
        lengths.push([l[2], l[1], l[0]]);
    }
    let mut gluings = Vec::with_capacity(2 * s.gluings().len());
    for g in s.gluings() {
        let (ka, kb) = (g.slot, (g.slot + 1) % 3);
        let ia = corner_across(ka, g.slot, g.other_slot, g.reversing);
        let ib = corner_across(kb, g.slot, g.other_slot, g.reversing);
        for sheet in 0..2 {
            let other = sheet ^ usize::from(g.reversing);
            gluings.push(glue_by_corners(
                cover_face(g.face, sheet),
                cover_corner(ka, sheet),
                cover_corner(kb, sheet),
                cover_face(g.other_face, other),
                cover_corner(ia, other),
                cover_corner(ib, other),
            ));
        }
    }
    let lift = |c: &Corner| [(cover_face(c.0, 0), c.1), (cover_face(c.0, 1), MIRROR[c.1])];
    let m = s.marks();
    let mut soul = Vec::new();
    for seg in &m.soul {
        soul.push(CurveSegment(cover_face(seg.face(), 0), seg.1, seg.2, seg.3, seg.4));
    }
    let mut marks = Marks {
        weierstrass: m.weierstrass.iter().flat_map(lift).collect(),
        p: m.p.map(|c| (cover_face(c.0, 0), c.1)),
        q: m.q.map(|c| (cover_face(c.0, 0), c.1)),
        soul: Vec::new(),
    };
    let mut out = ConeSurface::new(&format!("{}-cover", s.name()), lengths, gluings, Marks::default())?;
    for seg in &m.soul {
        let f = seg.face();
        let b0 = s.barycentric(f, seg.from());
        let b1 = s.barycentric(f, seg.to());
        let mirror = |b: [f64; 3]| [b[MIRROR[0]], b[MIRROR[1]], b[MIRROR[2]]];
        let y0 = out.from_barycentric(cover_face(f, 1), mirror(b0));
        let y1 = out.from_barycentric(cover_face(f, 1), mirror(b1));
        soul.push(CurveSegment(cover_face(f, 1), y0[0], y0[1], y1[0], y1[1]));
    }
    marks.soul = soul;
    let (tags, roles) = s.labels();
    let mut ctags = Vec::with_capacity(2 * tags.len());
    let mut croles = Vec::with_capacity(2 * roles.len());
    for (t, r) in tags.iter().zip(&roles) {
        ctags.push(*t);
        ctags.push(*t);
        croles.push(*r);
        croles.push([r[2], r[1], r[0]]);
    }
    out.set_labels(ctags, croles);
    out.set_marks(marks);
    Ok(out)
}

/// Paths of mesh edges along which a surface is cut.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutGraph {
    /// Each path is a list of `(face, slot)` edges.
    pub paths: Vec<Vec<(usize, usize)>>,
    /// Vertices where paths end or branch.
    pub endpoints: Vec<usize>,
}

impl CutGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Assembles paths from an unordered set of interior mesh edges. Edges
    /// may be named from either side.
    pub fn from_edges(s: &ConeSurface, edges: &[(usize, usize)]) -> Result<Self, SurfaceError> {
        let mut canon = BTreeSet::new();
        for &(f, k) in edges {
            if f >= s.num_faces() || k > 2 {
                return Err(SurfaceError::BadCut(format!("edge ({f}, {k}) is not in the mesh")));
            }
            let (f2, k2, _) = s
                .partner(f, k)
                .ok_or_else(|| SurfaceError::BadCut(format!("edge ({f}, {k}) is already on the boundary")))?;
            let key = (f, k).min((f2, k2));
            if !canon.insert(key) {
                return Err(SurfaceError::BadCut(format!("edge ({f}, {k}) listed twice")));
            }
        }
        let ends = |e: (usize, usize)| (s.corner_vertex(e.0, e.1), s.corner_vertex(e.0, (e.1 + 1) % 3));
        let mut incident: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for &e in &canon {
            let (a, b) = ends(e);
            incident.entry(a).or_default().push(e);
            incident.entry(b).or_default().push(e);
        }
        if let Some((v, _)) = incident.iter().find(|(_, es)| es.len() == 1) {
            return Err(SurfaceError::BadCut(format!("dangling path ending at vertex {v}")));
        }
        let endpoints: Vec<usize> = incident.iter().filter(|(_, es)| es.len() != 2).map(|(v, _)| *v).collect();
        let mut used = BTreeSet::new();
        let mut paths = Vec::new();
        let starts: Vec<usize> = if endpoints.is_empty() { incident.keys().copied().collect() } else { endpoints.clone() };
        for &v0 in starts.iter().chain(incident.keys()) {
            for &e0 in &incident[&v0] {
                if used.contains(&e0) {
                    continue;
                }
                let mut path = vec![e0];
                used.insert(e0);
                let (a, b) = ends(e0);
                let mut v = if a == v0 { b } else { a };
                while !endpoints.contains(&v) && v != v0 {
                    let next = incident[&v].iter().find(|e| !used.contains(*e)).copied();
                    match next {
                        Some(e) => {
                            used.insert(e);
                            path.push(e);
                            let (a, b) = ends(e);
                            v = if a == v { b } else { a };
                        }
                        None => break,
                    }
                }
                paths.push(path);
            }
        }
        Ok(Self { paths, endpoints })
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.paths.iter().flatten().copied().collect()
    }

    /// The preimage of the graph in the orientation double cover.
    pub fn lift(&self, base: &ConeSurface, cover: &ConeSurface) -> Result<CutGraph, SurfaceError> {
        let _ = base;
        let mut edges = Vec::new();
        for (f, k) in self.edges() {
            for sheet in 0..2 {
                edges.push((cover_face(f, sheet), cover_slot(k, sheet)));
            }
        }
        CutGraph::from_edges(cover, &edges)
    }
}

/// Surface with boundary obtained by cutting, with the removed gluings.
#[derive(Clone, Debug)]
pub struct CutResult {
    pub surface: ConeSurface,
    pub removed: Vec<Gluing>,
}

/// Cuts a surface open along the edges of a graph.
pub fn cut_along_graph(s: &ConeSurface, g: &CutGraph) -> Result<CutResult, SurfaceError> {
    let cut: BTreeSet<(usize, usize)> = g
        .edges()
        .into_iter()
        .map(|(f, k)| {
            let (f2, k2, _) = s.partner(f, k).ok_or_else(|| SurfaceError::BadCut(format!("({f}, {k}) not interior")))?;
            Ok((f, k).min((f2, k2)))
        })
        .collect::<Result<_, SurfaceError>>()?;
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for gl in s.gluings() {
        if cut.contains(&(gl.face, gl.slot)) {
            removed.push(*gl);
        } else {
            kept.push(*gl);
        }
    }
    if removed.len() != cut.len() {
        return Err(SurfaceError::BadCut("graph edge not found in gluing table".into()));
    }
    let name = if removed.is_empty() { s.name().to_string() } else { format!("{}-cut", s.name()) };
    let mut out = ConeSurface::new(&name, s.lengths().to_vec(), kept, s.marks().clone())?;
    let (tags, roles) = s.labels();
    out.set_labels(tags, roles);
    Ok(CutResult { surface: out, removed })
}

/// Restores gluings removed by a cut.
pub fn reglue(s: &ConeSurface, removed: &[Gluing]) -> Result<ConeSurface, SurfaceError> {
    let mut gl = s.gluings().to_vec();
    gl.extend_from_slice(removed);
    let name = s.name().strip_suffix("-cut").unwrap_or(s.name()).to_string();
    let mut out = ConeSurface::new(&name, s.lengths().to_vec(), gl, s.marks().clone())?;
    let (tags, roles) = s.labels();
    out.set_labels(tags, roles);
    Ok(out)
}

/// The graph Γ on the extremal surface: the identified outer sides of the
/// hexagonal annulus, three paths from p to q through the Weierstrass points.
pub fn dyck_cut_graph(s: &ConeSurface) -> Result<CutGraph, SurfaceError> {
    let edges: Vec<(usize, usize)> = s
        .gluings()
        .iter()
        .filter(|g| s.edge_role(g.face, g.slot) == EdgeRole::LongHalf)
        .map(|g| (g.face, g.slot))
        .collect();
    CutGraph::from_edges(s, &edges)
}

/// The flat annulus obtained generically: cover of the extremal surface cut
/// along the lift of Γ.
pub fn collar_via_cover(p: &SurfaceParameters) -> Result<ConeSurface, SurfaceError> {
    let d = super::build_extremal_dyck(p)?;
    let cover = orientation_double_cover(&d)?;
    let gamma = dyck_cut_graph(&d)?.lift(&d, &cover)?;
    Ok(cut_along_graph(&cover, &gamma)?.surface.with_name("collar-via-cover"))
}
