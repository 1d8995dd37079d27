//! Piecewise-flat cone surfaces: construction, gluing surgery and symmetry.

mod build;
mod io;
mod surgery;
mod symmetry;

pub use build::{
    build_collar_flat, build_dyck_like, build_extremal_dyck, build_trapezoid, flat_cylinder, flat_klein_bottle,
    flat_torus, planar_annulus, square_torus_x, strip_annulus, ChartId, SurfaceBuilder, Trapezoid,
};
pub use io::{export_mesh, import_json, to_json, to_obj, MeshFormat};
pub use surgery::{
    collar_via_cover, cover_face, cover_slot, cut_along_graph, dyck_cut_graph, orientation_double_cover, reglue,
    CutGraph, CutResult,
};
pub use symmetry::{automorphisms, check_symmetry, find_isomorphism, Automorphism, SymmetryReport};
pub use crate::capacity::{build_collar_hyperbolic_profile, CollarProfile};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Tolerance for the length of two glued edges.
pub const GLUE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("face {0} violates the strict triangle inequality")]
    Degenerate(usize),
    #[error("edge length mismatch {a} vs {b} between ({f}, {k}) and ({g}, {l})")]
    LengthMismatch { f: usize, k: usize, g: usize, l: usize, a: f64, b: f64 },
    #[error("edge slot ({0}, {1}) is glued twice")]
    DoubleGluing(usize, usize),
    #[error("index out of range: {0}")]
    BadIndex(String),
    #[error("surface is already orientable")]
    AlreadyOrientable,
    #[error("invalid cut graph: {0}")]
    BadCut(String),
    #[error("parameters violate defining relations: {0}")]
    BadParameters(String),
    #[error("assembly mismatch: {0}")]
    Assembly(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("malformed mesh file: {0}")]
    Format(String),
}

/// Identification of edge slot `slot` of `face` with slot `other_slot` of
/// `other_face`. Slot `k` runs from corner `k` to corner `k + 1`. A matching
/// gluing sends corner `k` to corner `other_slot + 1`; a reversing gluing
/// sends corner `k` to corner `other_slot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gluing {
    pub face: usize,
    pub slot: usize,
    pub other_face: usize,
    pub other_slot: usize,
    pub reversing: bool,
}

impl Gluing {
    /// Same identification with the smaller side first.
    pub fn canonical(self) -> Self {
        if (self.other_face, self.other_slot) < (self.face, self.slot) {
            Self {
                face: self.other_face,
                slot: self.other_slot,
                other_face: self.face,
                other_slot: self.slot,
                reversing: self.reversing,
            }
        } else {
            self
        }
    }
}

/// Label of a face used by the family classification; not serialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum FaceTag {
    #[default]
    Plain,
    Band,
    Trapezoid(usize),
}

/// Label of an edge slot; not serialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum EdgeRole {
    #[default]
    Interior,
    ShortBase,
    Leg,
    LongHalf,
    BandSeam,
}

/// A corner of a face, `(face, corner)`.
pub type Corner = (usize, usize);

/// Straight segment of a marked curve inside one face, in face coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSegment(pub usize, pub f64, pub f64, pub f64, pub f64);

impl CurveSegment {
    pub fn face(&self) -> usize {
        self.0
    }
    pub fn from(&self) -> [f64; 2] {
        [self.1, self.2]
    }
    pub fn to(&self) -> [f64; 2] {
        [self.3, self.4]
    }
    pub fn length(&self) -> f64 {
        (self.3 - self.1).hypot(self.4 - self.2)
    }
}

/// Marked vertices and the soul curve, kept as corners so that they
/// survive surgery.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Marks {
    pub weierstrass: Vec<Corner>,
    pub p: Option<Corner>,
    pub q: Option<Corner>,
    pub soul: Vec<CurveSegment>,
}

/// Marked points expressed with vertex ids of a particular surface.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoints {
    pub weierstrass: Vec<usize>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub soul: Vec<CurveSegment>,
}

/// Vertex of the surface: an orbit of corners under the gluings.
#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub angle: f64,
    pub boundary: bool,
    /// Corners in link order.
    pub corners: Vec<Corner>,
}

/// Triangulated piecewise-flat surface with possibly orientation-reversing
/// gluings and possibly nonempty boundary.
#[derive(Clone, Debug)]
pub struct ConeSurface {
    name: String,
    lengths: Vec<[f64; 3]>,
    gluings: Vec<Gluing>,
    marks: Marks,
    face_tags: Vec<FaceTag>,
    edge_roles: Vec<[EdgeRole; 3]>,
    partner: Vec<[Option<(usize, usize, bool)>; 3]>,
    positions: Vec<[[f64; 2]; 3]>,
    corner_angles: Vec<[f64; 3]>,
    corner_vertex: Vec<[usize; 3]>,
    link_offset: Vec<[f64; 3]>,
    link_sign: Vec<[f64; 3]>,
    vertices: Vec<Vertex>,
    orientable: bool,
}

impl PartialEq for ConeSurface {
    /// Structural equality: same faces and same gluing table.
    fn eq(&self, other: &Self) -> bool {
        self.lengths == other.lengths && self.sorted_gluings() == other.sorted_gluings()
    }
}

pub(crate) fn corner_positions(l: &[f64; 3]) -> [[f64; 2]; 3] {
    let (l0, l1, l2) = (l[0], l[1], l[2]);
    let x = (l0 * l0 + l2 * l2 - l1 * l1) / (2.0 * l0);
    let y = (l2 * l2 - x * x).max(0.0).sqrt();
    [[0.0, 0.0], [l0, 0.0], [x, y]]
}

fn angle_between(u: [f64; 2], v: [f64; 2]) -> f64 {
    let c = u[0] * v[0] + u[1] * v[1];
    let s = u[0] * v[1] - u[1] * v[0];
    s.atan2(c).abs()
}

/// Corner angles of a triangle with side lengths `(l0, l1, l2)`, where slot
/// `k` joins corners `k` and `k + 1`.
pub(crate) fn triangle_angles(l: &[f64; 3]) -> [f64; 3] {
    let p = corner_positions(l);
    let mut out = [0.0; 3];
    for c in 0..3 {
        let a = p[c];
        let b = p[(c + 1) % 3];
        let d = p[(c + 2) % 3];
        out[c] = angle_between([b[0] - a[0], b[1] - a[1]], [d[0] - a[0], d[1] - a[1]]);
    }
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Corner of the neighbouring face reached from corner `c` of the face whose
/// slot `k` is glued to slot `k2` (with `c` an endpoint of slot `k`).
pub(crate) fn corner_across(c: usize, k: usize, k2: usize, reversing: bool) -> usize {
    let start = c == k;
    match (start, reversing) {
        (true, false) => (k2 + 1) % 3,
        (true, true) => k2,
        (false, false) => k2,
        (false, true) => (k2 + 1) % 3,
    }
}

impl ConeSurface {
    /// Builds a surface from side lengths and a gluing table, deriving
    /// vertices, cone angles and orientability.
    pub fn new(name: &str, lengths: Vec<[f64; 3]>, gluings: Vec<Gluing>, marks: Marks) -> Result<Self, SurfaceError> {
        let n = lengths.len();
        for (f, l) in lengths.iter().enumerate() {
            let ok = l.iter().all(|x| x.is_finite() && *x > 0.0)
                && l[0] < l[1] + l[2]
                && l[1] < l[0] + l[2]
                && l[2] < l[0] + l[1];
            if !ok {
                return Err(SurfaceError::Degenerate(f));
            }
        }
        let mut partner = vec![[None; 3]; n];
        let mut table = Vec::with_capacity(gluings.len());
        for g in &gluings {
            if g.face >= n || g.other_face >= n || g.slot > 2 || g.other_slot > 2 {
                return Err(SurfaceError::BadIndex(format!("{g:?}")));
            }
            if (g.face, g.slot) == (g.other_face, g.other_slot) {
                return Err(SurfaceError::BadIndex(format!("slot glued to itself {g:?}")));
            }
            let a = lengths[g.face][g.slot];
            let b = lengths[g.other_face][g.other_slot];
            if (a - b).abs() > GLUE_TOL * a.max(1.0) {
                return Err(SurfaceError::LengthMismatch {
                    f: g.face,
                    k: g.slot,
                    g: g.other_face,
                    l: g.other_slot,
                    a,
                    b,
                });
            }
            for (f, k, f2, k2) in [(g.face, g.slot, g.other_face, g.other_slot), (g.other_face, g.other_slot, g.face, g.slot)] {
                if partner[f][k].is_some() {
                    return Err(SurfaceError::DoubleGluing(f, k));
                }
                partner[f][k] = Some((f2, k2, g.reversing));
            }
            table.push(g.canonical());
        }
        table.sort();
        let positions: Vec<_> = lengths.iter().map(corner_positions).collect();
        let corner_angles: Vec<_> = lengths.iter().map(triangle_angles).collect();
        let mut s = Self {
            name: name.to_string(),
            lengths,
            gluings: table,
            marks,
            face_tags: vec![FaceTag::Plain; n],
            edge_roles: vec![[EdgeRole::Interior; 3]; n],
            partner,
            positions,
            corner_angles,
            corner_vertex: vec![[0; 3]; n],
            link_offset: vec![[0.0; 3]; n],
            link_sign: vec![[1.0; 3]; n],
            vertices: Vec::new(),
            orientable: true,
        };
        s.derive_vertices();
        s.orientable = s.compute_orientable();
        Ok(s)
    }

    fn derive_vertices(&mut self) {
        let n = self.lengths.len();
        let mut uf = UnionFind::new(3 * n);
        for f in 0..n {
            for k in 0..3 {
                if let Some((f2, k2, r)) = self.partner[f][k] {
                    for c in [k, (k + 1) % 3] {
                        let c2 = corner_across(c, k, k2, r);
                        uf.union(3 * f + c, 3 * f2 + c2);
                    }
                }
            }
        }
        let mut ids = vec![usize::MAX; 3 * n];
        let mut count = 0;
        for i in 0..3 * n {
            let r = uf.find(i);
            if ids[r] == usize::MAX {
                ids[r] = count;
                count += 1;
            }
            self.corner_vertex[i / 3][i % 3] = ids[r];
        }
        let mut members: Vec<Vec<Corner>> = vec![Vec::new(); count];
        for f in 0..n {
            for c in 0..3 {
                members[self.corner_vertex[f][c]].push((f, c));
            }
        }
        let mut vertices = Vec::with_capacity(count);
        for m in members {
            let angle: f64 = m.iter().map(|&(f, c)| self.corner_angles[f][c]).sum();
            let (boundary, order) = self.walk_link(&m);
            vertices.push(Vertex { angle, boundary, corners: order });
        }
        self.vertices = vertices;
    }

    /// Next corner around a vertex in the direction of increasing link
    /// angle, with the offset and sign of the new corner.
    fn link_step(&self, f: usize, c: usize, offset: f64, sign: f64) -> Option<(usize, usize, f64, f64)> {
        let beta = self.corner_angles[f][c];
        let (slot, edge_angle) = if sign > 0.0 { ((c + 2) % 3, offset + beta) } else { (c, offset) };
        let (f2, k2, r) = self.partner[f][slot]?;
        let c2 = corner_across(c, slot, k2, r);
        if k2 == c2 {
            Some((f2, c2, edge_angle, 1.0))
        } else {
            Some((f2, c2, edge_angle + self.corner_angles[f2][c2], -1.0))
        }
    }

    fn link_step_back(&self, f: usize, c: usize, sign: f64) -> Option<(usize, usize)> {
        let slot = if sign > 0.0 { c } else { (c + 2) % 3 };
        let (f2, k2, r) = self.partner[f][slot]?;
        Some((f2, corner_across(c, slot, k2, r)))
    }

    fn walk_link(&mut self, members: &[Corner]) -> (bool, Vec<Corner>) {
        let mut start = members[0];
        // On a boundary vertex start at the end of the fan.
        let mut sign = 1.0;
        let mut boundary = false;
        {
            let mut cur = start;
            let mut s = 1.0;
            for _ in 0..members.len() + 1 {
                match self.link_step_back(cur.0, cur.1, s) {
                    None => {
                        boundary = true;
                        start = cur;
                        sign = s;
                        break;
                    }
                    Some((f2, c2)) => {
                        // Orientation of the previous corner relative to the link.
                        let slot = if s > 0.0 { cur.1 } else { (cur.1 + 2) % 3 };
                        let (_, k2, _) = self.partner[cur.0][slot].unwrap();
                        s = if k2 == c2 { -1.0 } else { 1.0 };
                        cur = (f2, c2);
                        if cur == members[0] {
                            break;
                        }
                    }
                }
            }
        }
        let mut order = Vec::with_capacity(members.len());
        let (mut f, mut c, mut offset, mut s) = (start.0, start.1, 0.0, sign);
        let mut seen = std::collections::HashSet::new();
        loop {
            if !seen.insert((f, c)) {
                break;
            }
            self.link_offset[f][c] = offset;
            self.link_sign[f][c] = s;
            order.push((f, c));
            match self.link_step(f, c, offset, s) {
                Some((f2, c2, o2, s2)) => {
                    f = f2;
                    c = c2;
                    offset = o2;
                    s = s2;
                }
                None => {
                    boundary = true;
                    break;
                }
            }
        }
        // Corners missed by the walk indicate a non-manifold vertex; keep them.
        for m in members {
            if !seen.contains(m) {
                order.push(*m);
            }
        }
        (boundary, order)
    }

    fn compute_orientable(&self) -> bool {
        let n = self.lengths.len();
        let mut sign = vec![0i8; n];
        for s in 0..n {
            if sign[s] != 0 {
                continue;
            }
            sign[s] = 1;
            let mut stack = vec![s];
            while let Some(f) = stack.pop() {
                for k in 0..3 {
                    if let Some((f2, _, r)) = self.partner[f][k] {
                        let want = if r { -sign[f] } else { sign[f] };
                        if sign[f2] == 0 {
                            sign[f2] = want;
                            stack.push(f2);
                        } else if sign[f2] != want {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn num_faces(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[[f64; 3]] {
        &self.lengths
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn sorted_gluings(&self) -> Vec<Gluing> {
        self.gluings.clone()
    }

    /// Partner of an edge slot: `(face, slot, reversing)`.
    pub fn partner(&self, f: usize, k: usize) -> Option<(usize, usize, bool)> {
        self.partner[f][k]
    }

    /// Corner positions of a face in its own frame.
    pub fn face_corners(&self, f: usize) -> [[f64; 2]; 3] {
        self.positions[f]
    }

    pub fn corner_angle(&self, f: usize, c: usize) -> f64 {
        self.corner_angles[f][c]
    }

    pub fn corner_vertex(&self, f: usize, c: usize) -> usize {
        self.corner_vertex[f][c]
    }

    /// Link angle offset and sign of a corner: a direction making local
    /// angle `φ` with slot `c` has link angle `offset + sign·φ`.
    pub fn corner_link(&self, f: usize, c: usize) -> (f64, f64) {
        (self.link_offset[f][c], self.link_sign[f][c])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn is_orientable(&self) -> bool {
        self.orientable
    }

    pub fn is_closed(&self) -> bool {
        self.partner.iter().all(|p| p.iter().all(Option::is_some))
    }

    pub fn marks(&self) -> &Marks {
        &self.marks
    }

    pub fn face_tag(&self, f: usize) -> FaceTag {
        self.face_tags[f]
    }

    pub fn edge_role(&self, f: usize, k: usize) -> EdgeRole {
        self.edge_roles[f][k]
    }

    pub(crate) fn set_labels(&mut self, tags: Vec<FaceTag>, roles: Vec<[EdgeRole; 3]>) {
        self.face_tags = tags;
        self.edge_roles = roles;
    }

    pub(crate) fn labels(&self) -> (Vec<FaceTag>, Vec<[EdgeRole; 3]>) {
        (self.face_tags.clone(), self.edge_roles.clone())
    }

    pub(crate) fn set_marks(&mut self, marks: Marks) {
        self.marks = marks;
    }

    /// Marked points with vertex ids of this surface.
    pub fn marked_points(&self) -> MarkedPoints {
        let v = |c: &Corner| self.corner_vertex[c.0][c.1];
        MarkedPoints {
            weierstrass: self.marks.weierstrass.iter().map(v).collect(),
            p: self.marks.p.as_ref().map(v),
            q: self.marks.q.as_ref().map(v),
            soul: self.marks.soul.clone(),
        }
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let p = &self.positions[f];
        0.5 * (p[1][0] * p[2][1] - p[1][1] * p[2][0]).abs()
    }

    pub fn area(&self) -> f64 {
        (0..self.num_faces()).map(|f| self.face_area(f)).sum()
    }

    pub fn boundary_slots(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for f in 0..self.num_faces() {
            for k in 0..3 {
                if self.partner[f][k].is_none() {
                    out.push((f, k));
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.gluings.len() + self.boundary_slots().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Number of boundary circles, found by linking boundary slots through
    /// the fans of boundary vertices.
    pub fn boundary_components(&self) -> usize {
        let slots = self.boundary_slots();
        if slots.is_empty() {
            return 0;
        }
        let index: std::collections::HashMap<(usize, usize), usize> =
            slots.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut uf = UnionFind::new(slots.len());
        for (i, &(f, k)) in slots.iter().enumerate() {
            // Walk from the end corner of this slot around the vertex.
            let (mut cf, mut cc) = (f, (k + 1) % 3);
            let mut slot = (k + 1) % 3;
            for _ in 0..4 * self.num_faces() + 4 {
                match self.partner[cf][slot] {
                    None => {
                        uf.union(i, index[&(cf, slot)]);
                        break;
                    }
                    Some((f2, k2, r)) => {
                        let c2 = corner_across(cc, slot, k2, r);
                        cf = f2;
                        cc = c2;
                        slot = if k2 == c2 { (c2 + 2) % 3 } else { c2 };
                    }
                }
            }
        }
        let mut roots: Vec<usize> = (0..slots.len()).map(|i| uf.find(i)).collect();
        roots.sort();
        roots.dedup();
        roots.len()
    }

    /// Interior cone points: vertices whose angle differs from 2π.
    pub fn cone_points(&self, tol: f64) -> Vec<(usize, f64)> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.boundary && (v.angle - 2.0 * PI).abs() > tol)
            .map(|(i, v)| (i, v.angle))
            .collect()
    }

    /// Total curvature `Σ_int(2π − angle) + Σ_∂(π − angle)`.
    pub fn total_curvature(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| if v.boundary { PI - v.angle } else { 2.0 * PI - v.angle })
            .sum()
    }

    /// Deviation from Gauss–Bonnet, `total curvature − 2πχ`.
    pub fn gauss_bonnet_residual(&self) -> f64 {
        self.total_curvature() - 2.0 * PI * self.euler_characteristic() as f64
    }

    pub fn min_cone_angle(&self) -> f64 {
        self.vertices.iter().filter(|v| !v.boundary).map(|v| v.angle).fold(f64::INFINITY, f64::min)
    }

    /// Maps a point on slot `k` of face `f` to the partner face.
    pub fn map_across(&self, f: usize, k: usize, x: [f64; 2]) -> Option<(usize, usize, [f64; 2])> {
        let (f2, k2, r) = self.partner[f][k]?;
        let a = self.positions[f][k];
        let b = self.positions[f][(k + 1) % 3];
        let len = self.lengths[f][k];
        let t = ((x[0] - a[0]) * (b[0] - a[0]) + (x[1] - a[1]) * (b[1] - a[1])) / (len * len);
        let t2 = if r { t } else { 1.0 - t };
        let a2 = self.positions[f2][k2];
        let b2 = self.positions[f2][(k2 + 1) % 3];
        Some((f2, k2, [a2[0] + t2 * (b2[0] - a2[0]), a2[1] + t2 * (b2[1] - a2[1])]))
    }

    /// Barycentric coordinates of a point in a face frame.
    pub fn barycentric(&self, f: usize, x: [f64; 2]) -> [f64; 3] {
        let p = &self.positions[f];
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let l1 = ((x[0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (x[1] - p[0][1])) / det;
        let l2 = ((p[1][0] - p[0][0]) * (x[1] - p[0][1]) - (x[0] - p[0][0]) * (p[1][1] - p[0][1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn from_barycentric(&self, f: usize, b: [f64; 3]) -> [f64; 2] {
        let p = &self.positions[f];
        [
            b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
            b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
        ]
    }

    /// Copy with one face's side lengths replaced, for negative controls.
    /// The gluing table is kept; partner lengths are not adjusted.
    pub fn with_face_lengths_unchecked(&self, f: usize, l: [f64; 3]) -> Self {
        let mut s = self.clone();
        s.lengths[f] = l;
        s.positions[f] = corner_positions(&l);
        s.corner_angles[f] = triangle_angles(&l);
        s.derive_vertices();
        s
    }

    /// Same surface with face `f` renumbered `perm[f]`.
    pub fn relabel_faces(&self, perm: &[usize]) -> Result<Self, SurfaceError> {
        let n = self.num_faces();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&g| g >= n || std::mem::replace(&mut seen[g], true)) {
            return Err(SurfaceError::BadIndex("face relabelling is not a permutation".into()));
        }
        let mut lengths = vec![[0.0; 3]; n];
        let mut tags = vec![FaceTag::Plain; n];
        let mut roles = vec![[EdgeRole::Interior; 3]; n];
        for f in 0..n {
            lengths[perm[f]] = self.lengths[f];
            tags[perm[f]] = self.face_tags[f];
            roles[perm[f]] = self.edge_roles[f];
        }
        let gluings = self
            .gluings
            .iter()
            .map(|g| Gluing { face: perm[g.face], other_face: perm[g.other_face], ..*g })
            .collect();
        let c = |x: &Corner| (perm[x.0], x.1);
        let marks = Marks {
            weierstrass: self.marks.weierstrass.iter().map(c).collect(),
            p: self.marks.p.as_ref().map(c),
            q: self.marks.q.as_ref().map(c),
            soul: self.marks.soul.iter().map(|s| CurveSegment(perm[s.0], s.1, s.2, s.3, s.4)).collect(),
        };
        let mut out = ConeSurface::new(&self.name, lengths, gluings, marks)?;
        out.set_labels(tags, roles);
        Ok(out)
    }

    /// Length of the marked soul curve.
    pub fn soul_length(&self) -> f64 {
        self.marks.soul.iter().map(CurveSegment::length).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_maps_are_involutive() {
        for k in 0..3 {
            for k2 in 0..3 {
                for r in [false, true] {
                    for c in [k, (k + 1) % 3] {
                        let c2 = corner_across(c, k, k2, r);
                        assert!(c2 == k2 || c2 == (k2 + 1) % 3);
                        assert_eq!(corner_across(c2, k2, k, r), c);
                    }
                }
            }
        }
    }

    #[test]
    fn triangle_angles_sum_to_pi() {
        let a = triangle_angles(&[3.0, 4.0, 5.0]);
        assert!((a.iter().sum::<f64>() - PI).abs() < 1e-14);
        let p = corner_positions(&[3.0, 4.0, 5.0]);
        assert!((p[2][0].hypot(p[2][1]) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_face_rejected() {
        let e = ConeSurface::new("bad", vec![[1.0, 1.0, 2.0]], vec![], Marks::default());
        assert_eq!(e.unwrap_err(), SurfaceError::Degenerate(0));
    }
}
