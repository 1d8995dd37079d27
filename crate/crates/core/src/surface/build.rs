use super::{
    corner_positions, ConeSurface, Corner, CurveSegment, EdgeRole, FaceTag, Gluing, Marks, SurfaceError,
};
use crate::constants::{check_defining_relations, SurfaceParameters};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Index of a chart registered with a [`SurfaceBuilder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChartId(pub usize);

struct Chart {
    points: Vec<[f64; 2]>,
    faces: Vec<usize>,
}

/// Assembles a surface from planar charts. Triangles inside a chart that
/// share an edge are glued automatically; edges of different charts (or
/// boundary edges of the same chart) are glued explicitly by endpoints.
#[derive(Default)]
pub struct SurfaceBuilder {
    charts: Vec<Chart>,
    face_points: Vec<[usize; 3]>,
    face_chart: Vec<usize>,
    lengths: Vec<[f64; 3]>,
    gluings: Vec<Gluing>,
    glued: HashMap<(usize, usize), ()>,
    tags: Vec<FaceTag>,
    roles: Vec<[EdgeRole; 3]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Slot of a face joining corners `a` and `b`, and whether it runs from `a`.
fn slot_of(a: usize, b: usize) -> (usize, bool) {
    if b == (a + 1) % 3 {
        (a, true)
    } else {
        (b, false)
    }
}

impl SurfaceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds triangles over chart points; each triangle is reoriented
    /// counterclockwise and internal edges are glued.
    pub fn add_chart(&mut self, points: Vec<[f64; 2]>, triangles: &[[usize; 3]], tag: FaceTag) -> ChartId {
        let cid = self.charts.len();
        let mut faces = Vec::with_capacity(triangles.len());
        let mut directed: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for t in triangles {
            let mut t = *t;
            if cross(points[t[0]], points[t[1]], points[t[2]]) < 0.0 {
                t.swap(1, 2);
            }
            let f = self.lengths.len();
            let l = [
                dist(points[t[0]], points[t[1]]),
                dist(points[t[1]], points[t[2]]),
                dist(points[t[2]], points[t[0]]),
            ];
            self.lengths.push(l);
            self.face_points.push(t);
            self.face_chart.push(cid);
            self.tags.push(tag);
            self.roles.push([EdgeRole::Interior; 3]);
            faces.push(f);
            for k in 0..3 {
                directed.insert((t[k], t[(k + 1) % 3]), (f, k));
            }
        }
        let mut pairs: Vec<_> = directed.iter().filter(|((a, b), _)| a < b).collect();
        pairs.sort();
        for (&(a, b), &(f, k)) in pairs {
            if let Some(&(g, l)) = directed.get(&(b, a)) {
                self.gluings.push(Gluing { face: f, slot: k, other_face: g, other_slot: l, reversing: false });
                self.glued.insert((f, k), ());
                self.glued.insert((g, l), ());
            }
        }
        self.charts.push(Chart { points, faces });
        ChartId(cid)
    }

    fn find_edge(&self, chart: ChartId, a: usize, b: usize) -> Option<(usize, usize, usize)> {
        for &f in &self.charts[chart.0].faces {
            let t = self.face_points[f];
            let ca = t.iter().position(|&x| x == a);
            let cb = t.iter().position(|&x| x == b);
            if let (Some(ca), Some(cb)) = (ca, cb) {
                let (k, _) = slot_of(ca, cb);
                if !self.glued.contains_key(&(f, k)) {
                    return Some((f, ca, cb));
                }
            }
        }
        None
    }

    /// Glues chart edge `a1 b1` to chart edge `a2 b2` with `a1 ↦ a2`, `b1 ↦ b2`.
    pub fn glue(&mut self, c1: ChartId, a1: usize, b1: usize, c2: ChartId, a2: usize, b2: usize) -> Result<(), SurfaceError> {
        self.glue_with_role(c1, a1, b1, c2, a2, b2, None)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn glue_with_role(
        &mut self,
        c1: ChartId,
        a1: usize,
        b1: usize,
        c2: ChartId,
        a2: usize,
        b2: usize,
        role: Option<EdgeRole>,
    ) -> Result<(), SurfaceError> {
        let (f, ca, cb) = self
            .find_edge(c1, a1, b1)
            .ok_or_else(|| SurfaceError::Assembly(format!("no free edge {a1}-{b1} in chart {}", c1.0)))?;
        let (k, _) = slot_of(ca, cb);
        self.glued.insert((f, k), ());
        let found = self.find_edge(c2, a2, b2);
        self.glued.remove(&(f, k));
        let (g, da, db) =
            found.ok_or_else(|| SurfaceError::Assembly(format!("no free edge {a2}-{b2} in chart {}", c2.0)))?;
        let gl = glue_by_corners(f, ca, cb, g, da, db);
        self.glued.insert((gl.face, gl.slot), ());
        self.glued.insert((gl.other_face, gl.other_slot), ());
        if let Some(r) = role {
            self.roles[gl.face][gl.slot] = r;
            self.roles[gl.other_face][gl.other_slot] = r;
        }
        self.gluings.push(gl);
        Ok(())
    }

    /// Labels the chart edge `a b` on every face that has it.
    pub fn set_role(&mut self, chart: ChartId, a: usize, b: usize, role: EdgeRole) {
        for &f in &self.charts[chart.0].faces {
            let t = self.face_points[f];
            if let (Some(ca), Some(cb)) = (t.iter().position(|&x| x == a), t.iter().position(|&x| x == b)) {
                let (k, _) = slot_of(ca, cb);
                self.roles[f][k] = role;
            }
        }
    }

    /// A corner at the given chart point.
    pub fn corner_of(&self, chart: ChartId, point: usize) -> Option<Corner> {
        self.charts[chart.0]
            .faces
            .iter()
            .find_map(|&f| self.face_points[f].iter().position(|&x| x == point).map(|c| (f, c)))
    }

    fn chart_to_face(&self, f: usize, x: [f64; 2]) -> ([f64; 3], [f64; 2]) {
        let chart = &self.charts[self.face_chart[f]];
        let t = self.face_points[f];
        let (p0, p1, p2) = (chart.points[t[0]], chart.points[t[1]], chart.points[t[2]]);
        let det = cross(p0, p1, p2);
        let b1 = cross(p0, x, p2) / det;
        let b2 = cross(p0, p1, x) / det;
        let b = [1.0 - b1 - b2, b1, b2];
        let q = corner_positions(&self.lengths[f]);
        let y = [
            b[0] * q[0][0] + b[1] * q[1][0] + b[2] * q[2][0],
            b[0] * q[0][1] + b[1] * q[1][1] + b[2] * q[2][1],
        ];
        (b, y)
    }

    /// Straight chart segment contained in one face, in that face's frame.
    pub fn segment(&self, chart: ChartId, x0: [f64; 2], x1: [f64; 2]) -> Option<CurveSegment> {
        for &f in &self.charts[chart.0].faces {
            let (b0, y0) = self.chart_to_face(f, x0);
            let (b1, y1) = self.chart_to_face(f, x1);
            if b0.iter().chain(b1.iter()).all(|&v| v >= -1e-12) {
                return Some(CurveSegment(f, y0[0], y0[1], y1[0], y1[1]));
            }
        }
        None
    }

    pub fn num_faces(&self) -> usize {
        self.lengths.len()
    }

    pub fn build(self, name: &str, marks: Marks) -> Result<ConeSurface, SurfaceError> {
        let mut s = ConeSurface::new(name, self.lengths, self.gluings, marks)?;
        s.set_labels(self.tags, self.roles);
        Ok(s)
    }
}

/// Gluing that identifies corner `ca` of `f` with `da` of `g` and `cb` with `db`.
pub(crate) fn glue_by_corners(f: usize, ca: usize, cb: usize, g: usize, da: usize, db: usize) -> Gluing {
    let (k, from_a) = slot_of(ca, cb);
    let (l, _) = slot_of(da, db);
    // Corner at the start of slot k and its image in g.
    let image = if from_a { da } else { db };
    Gluing { face: f, slot: k, other_face: g, other_slot: l, reversing: image == l }
}

/// Isosceles trapezoid with the short side on the x-axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Trapezoid {
    /// Corners `A, B, C, D` counterclockwise; `AB` is the short side.
    pub vertices: [[f64; 2]; 4],
    pub height: f64,
    pub alpha: f64,
    pub short_side: f64,
    pub long_side: f64,
    pub leg: f64,
}

impl Trapezoid {
    pub fn new(alpha: f64, height: f64, short_side: f64) -> Result<Self, SurfaceError> {
        if !(alpha > 0.0 && alpha <= PI / 2.0 + 1e-15 && height > 0.0 && short_side > 0.0) {
            return Err(SurfaceError::BadParameters(format!("alpha {alpha}, height {height}, short {short_side}")));
        }
        let e = height * alpha.cos() / alpha.sin();
        let vertices = [[0.0, 0.0], [short_side, 0.0], [short_side + e, height], [-e, height]];
        Ok(Self {
            vertices,
            height,
            alpha,
            short_side,
            long_side: short_side + 2.0 * e,
            leg: height / alpha.sin(),
        })
    }

    pub fn area(&self) -> f64 {
        0.5 * self.height * (self.short_side + self.long_side)
    }
}

fn validate(p: &SurfaceParameters) -> Result<(), SurfaceError> {
    if !(p.theta > 0.0 && p.theta < PI / 2.0) {
        return Err(SurfaceError::BadParameters(format!("theta = {}", p.theta)));
    }
    for r in check_defining_relations(p) {
        if !r.passes(1e-9) {
            return Err(SurfaceError::BadParameters(format!("{} = {:e}", r.relation, r.value)));
        }
    }
    Ok(())
}

/// The trapezoid of the construction, after checking the defining relations.
pub fn build_trapezoid(p: &SurfaceParameters) -> Result<Trapezoid, SurfaceError> {
    validate(p)?;
    Trapezoid::new(p.alpha, p.h, p.short_side)
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;
const W: usize = 4;

fn add_trapezoid(b: &mut SurfaceBuilder, t: &Trapezoid, index: usize) -> ChartId {
    let v = t.vertices;
    let w = [0.5 * t.short_side, t.height];
    let id = b.add_chart(vec![v[0], v[1], v[2], v[3], w], &[[A, B, W], [B, C, W], [D, A, W]], FaceTag::Trapezoid(index));
    b.set_role(id, A, B, EdgeRole::ShortBase);
    b.set_role(id, B, C, EdgeRole::Leg);
    b.set_role(id, D, A, EdgeRole::Leg);
    b.set_role(id, D, W, EdgeRole::LongHalf);
    b.set_role(id, W, C, EdgeRole::LongHalf);
    id
}

/// Band `[0, n·w] × [−δ, δ]` split into `n` columns of four triangles
/// around centre points on `y = 0`. Returns the chart with bottom points
/// `0..=n`, top points `n+1..=2n+1` and centres after that.
fn add_band(b: &mut SurfaceBuilder, n: usize, width: f64, delta: f64) -> ChartId {
    let mut pts = Vec::new();
    for i in 0..=n {
        pts.push([i as f64 * width, -delta]);
    }
    for i in 0..=n {
        pts.push([i as f64 * width, delta]);
    }
    for j in 0..n {
        pts.push([(j as f64 + 0.5) * width, 0.0]);
    }
    let bot = |i: usize| i;
    let top = |i: usize| n + 1 + i;
    let cen = |j: usize| 2 * n + 2 + j;
    let mut tris = Vec::new();
    for j in 0..n {
        tris.push([bot(j), bot(j + 1), cen(j)]);
        tris.push([bot(j + 1), top(j + 1), cen(j)]);
        tris.push([top(j + 1), top(j), cen(j)]);
        tris.push([top(j), bot(j), cen(j)]);
    }
    b.add_chart(pts, &tris, FaceTag::Band)
}

fn band_soul(b: &SurfaceBuilder, band: ChartId, n: usize, width: f64) -> Vec<CurveSegment> {
    let mut soul = Vec::new();
    for j in 0..n {
        let x0 = j as f64 * width;
        let xc = (j as f64 + 0.5) * width;
        let x1 = (j as f64 + 1.0) * width;
        soul.extend(b.segment(band, [x0, 0.0], [xc, 0.0]));
        soul.extend(b.segment(band, [xc, 0.0], [x1, 0.0]));
    }
    soul
}

/// Dyck's surface assembled from six trapezoids with acute angle `alpha`,
/// height `h` and short side `short`, and a flat Möbius band of width
/// `2·delta` and soul length `3·short`.
pub fn build_dyck_like(alpha: f64, h: f64, short: f64, delta: f64) -> Result<ConeSurface, SurfaceError> {
    if delta <= 0.0 {
        return Err(SurfaceError::BadParameters(format!("delta = {delta}")));
    }
    let t = Trapezoid::new(alpha, h, short)?;
    let mut b = SurfaceBuilder::new();
    let traps: Vec<ChartId> = (0..6).map(|j| add_trapezoid(&mut b, &t, j)).collect();
    for j in 0..6 {
        b.glue_with_role(traps[j], B, C, traps[(j + 1) % 6], A, D, Some(EdgeRole::Leg))?;
    }
    for j in 0..3 {
        b.glue_with_role(traps[j], D, W, traps[j + 3], C, W, Some(EdgeRole::LongHalf))?;
        b.glue_with_role(traps[j], W, C, traps[j + 3], W, D, Some(EdgeRole::LongHalf))?;
    }
    let band = add_band(&mut b, 3, short, delta);
    let (bot, top) = (|i: usize| i, |i: usize| 4 + i);
    b.set_role(band, bot(3), top(3), EdgeRole::BandSeam);
    b.set_role(band, bot(0), top(0), EdgeRole::BandSeam);
    b.glue_with_role(band, bot(3), top(3), band, top(0), bot(0), Some(EdgeRole::BandSeam))?;
    for j in 0..3 {
        b.glue_with_role(band, top(j), top(j + 1), traps[j], A, B, Some(EdgeRole::ShortBase))?;
        b.glue_with_role(band, bot(j), bot(j + 1), traps[j + 3], A, B, Some(EdgeRole::ShortBase))?;
    }
    let soul = band_soul(&b, band, 3, short);
    let corner = |c: ChartId, pt: usize| b.corner_of(c, pt).expect("chart point");
    let marks = Marks {
        weierstrass: (0..3).map(|j| corner(traps[j], W)).collect(),
        p: Some(corner(traps[0], C)),
        q: Some(corner(traps[1], C)),
        soul,
    };
    b.build("dyck", marks)
}

/// The extremal nonpositively curved Dyck's surface.
pub fn build_extremal_dyck(p: &SurfaceParameters) -> Result<ConeSurface, SurfaceError> {
    validate(p)?;
    build_dyck_like(p.alpha, p.h, p.short_side, p.delta).map(|s| s.with_name("dyck-extremal"))
}

/// The flat annulus: a cylinder of circumference `6·short` and height `2δ`
/// with a ring of six trapezoids on each boundary circle; the soul is the
/// middle circle of the cylinder.
pub fn build_collar_flat(p: &SurfaceParameters) -> Result<ConeSurface, SurfaceError> {
    let t = Trapezoid::new(p.alpha, p.h, p.short_side)?;
    let mut b = SurfaceBuilder::new();
    let band = add_band(&mut b, 6, p.short_side, p.delta);
    let (bot, top) = (|i: usize| i, |i: usize| 7 + i);
    b.glue(band, bot(6), top(6), band, bot(0), top(0))?;
    let upper: Vec<ChartId> = (0..6).map(|j| add_trapezoid(&mut b, &t, j)).collect();
    let lower: Vec<ChartId> = (0..6).map(|j| add_trapezoid(&mut b, &t, 6 + j)).collect();
    for j in 0..6 {
        b.glue_with_role(upper[j], B, C, upper[(j + 1) % 6], A, D, Some(EdgeRole::Leg))?;
        b.glue_with_role(lower[(j + 1) % 6], B, C, lower[j], A, D, Some(EdgeRole::Leg))?;
    }
    for j in 0..6 {
        b.glue_with_role(band, top(j), top(j + 1), upper[j], A, B, Some(EdgeRole::ShortBase))?;
        b.glue_with_role(band, bot(j), bot(j + 1), lower[j], B, A, Some(EdgeRole::ShortBase))?;
    }
    let soul = band_soul(&b, band, 6, p.short_side);
    b.build("collar-flat", Marks { soul, ..Marks::default() })
}

fn rectangle(b: &mut SurfaceBuilder, w: f64, h: f64) -> ChartId {
    b.add_chart(vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]], &[[0, 1, 2], [0, 2, 3]], FaceTag::Plain)
}

/// Flat torus `[0, w] × [0, h]` with opposite sides translated.
pub fn flat_torus(w: f64, h: f64) -> ConeSurface {
    let mut b = SurfaceBuilder::new();
    let r = rectangle(&mut b, w, h);
    b.glue(r, 1, 2, r, 0, 3).expect("torus");
    b.glue(r, 0, 1, r, 3, 2).expect("torus");
    b.build("torus", Marks::default()).expect("torus")
}

/// Flat Klein bottle: `(0, y) ~ (w, y)` and `(x, 0) ~ (w − x, h)`.
pub fn flat_klein_bottle(w: f64, h: f64) -> ConeSurface {
    let mut b = SurfaceBuilder::new();
    let r = rectangle(&mut b, w, h);
    b.glue(r, 1, 2, r, 0, 3).expect("klein");
    b.glue(r, 0, 1, r, 2, 3).expect("klein");
    b.build("klein", Marks::default()).expect("klein")
}

/// Unit square torus split into four triangles around its centre.
pub fn square_torus_x() -> ConeSurface {
    let mut b = SurfaceBuilder::new();
    let pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
    let r = b.add_chart(pts, &[[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]], FaceTag::Plain);
    b.glue(r, 1, 2, r, 0, 3).expect("torus");
    b.glue(r, 0, 1, r, 3, 2).expect("torus");
    b.build("torus-x", Marks::default()).expect("torus")
}

/// Grid points `(x_i, y_ij)` on columns, meshed into quads split along a
/// diagonal, with the last column glued to the first.
fn periodic_columns(b: &mut SurfaceBuilder, columns: &[(f64, Vec<f64>)], period: f64) -> Result<ChartId, SurfaceError> {
    let n = columns.len();
    let m = columns[0].1.len();
    let mut pts = Vec::with_capacity((n + 1) * m);
    for i in 0..=n {
        let (x, ys) = if i < n { (columns[i].0, &columns[i].1) } else { (columns[0].0 + period, &columns[0].1) };
        for &y in ys {
            pts.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| i * m + j;
    let mut tris = Vec::new();
    for i in 0..n {
        for j in 0..m - 1 {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let c = b.add_chart(pts, &tris, FaceTag::Plain);
    for j in 0..m - 1 {
        b.glue(c, id(n, j), id(n, j + 1), c, id(0, j), id(0, j + 1))?;
    }
    Ok(c)
}

/// Annulus over a periodic coordinate `t ∈ [0, period)` bounded by
/// `lower(t) < y < upper(t)`, with `nt` columns and `ny` rows.
pub fn strip_annulus(
    period: f64,
    nt: usize,
    ny: usize,
    lower: impl Fn(f64) -> f64,
    upper: impl Fn(f64) -> f64,
) -> Result<ConeSurface, SurfaceError> {
    let mut b = SurfaceBuilder::new();
    let columns: Vec<(f64, Vec<f64>)> = (0..nt)
        .map(|i| {
            let t = period * i as f64 / nt as f64;
            let (lo, hi) = (lower(t), upper(t));
            (t, (0..=ny).map(|j| lo + (hi - lo) * j as f64 / ny as f64).collect())
        })
        .collect();
    periodic_columns(&mut b, &columns, period)?;
    b.build("strip-annulus", Marks::default())
}

/// Flat cylinder of the given circumference and height, with the middle
/// circle marked as its soul.
pub fn flat_cylinder(circumference: f64, height: f64, nx: usize, ny: usize) -> ConeSurface {
    let mut b = SurfaceBuilder::new();
    let columns: Vec<(f64, Vec<f64>)> = (0..nx)
        .map(|i| (circumference * i as f64 / nx as f64, (0..=ny).map(|j| height * j as f64 / ny as f64).collect()))
        .collect();
    let c = periodic_columns(&mut b, &columns, circumference).expect("cylinder");
    let mut soul = Vec::new();
    for i in 0..nx {
        let x0 = [circumference * i as f64 / nx as f64, height / 2.0];
        let x1 = [circumference * (i + 1) as f64 / nx as f64, height / 2.0];
        soul.extend(clip_into_subfaces(&b, c, x0, x1));
    }
    b.build("cylinder", Marks { soul, ..Marks::default() }).expect("cylinder")
}

/// Planar round annulus `r0 ≤ |z| ≤ r1` on a log-polar grid.
pub fn planar_annulus(r0: f64, r1: f64, nr: usize, ntheta: usize) -> ConeSurface {
    let mut b = SurfaceBuilder::new();
    let mut pts = Vec::new();
    for i in 0..=nr {
        let r = r0 * (r1 / r0).powf(i as f64 / nr as f64);
        for j in 0..ntheta {
            let a = 2.0 * PI * j as f64 / ntheta as f64;
            pts.push([r * a.cos(), r * a.sin()]);
        }
    }
    let id = |i: usize, j: usize| i * ntheta + j % ntheta;
    let mut tris = Vec::new();
    for i in 0..nr {
        for j in 0..ntheta {
            tris.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    b.add_chart(pts, &tris, FaceTag::Plain);
    b.build("planar-annulus", Marks::default()).expect("annulus")
}

impl ConeSurface {
    /// Uniform refinement: every face is cut into `n²` similar triangles.
    pub fn subdivide(&self, n: usize) -> ConeSurface {
        assert!(n >= 1);
        if n == 1 {
            return self.clone();
        }
        let mut b = SurfaceBuilder::new();
        let idx = |i: usize, j: usize| -> usize {
            // Row-major index of the barycentric grid point (i, j), i + j ≤ n.
            (0..j).map(|r| n + 1 - r).sum::<usize>() + i
        };
        let (tags, roles) = self.labels();
        let mut charts = Vec::with_capacity(self.num_faces());
        for f in 0..self.num_faces() {
            let p = self.face_corners(f);
            let mut pts = Vec::new();
            for j in 0..=n {
                for i in 0..=n - j {
                    let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                    pts.push([
                        p[0][0] + u * (p[1][0] - p[0][0]) + v * (p[2][0] - p[0][0]),
                        p[0][1] + u * (p[1][1] - p[0][1]) + v * (p[2][1] - p[0][1]),
                    ]);
                }
            }
            let mut tris = Vec::new();
            for j in 0..n {
                for i in 0..n - j {
                    tris.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                    if i + j + 1 < n {
                        tris.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                    }
                }
            }
            let c = b.add_chart(pts, &tris, tags[f]);
            let slot_point = |k: usize, m: usize| match k {
                0 => idx(m, 0),
                1 => idx(n - m, m),
                _ => idx(0, n - m),
            };
            for k in 0..3 {
                for m in 0..n {
                    b.set_role(c, slot_point(k, m), slot_point(k, m + 1), roles[f][k]);
                }
            }
            charts.push(c);
        }
        let slot_point = |k: usize, m: usize| match k {
            0 => idx(m, 0),
            1 => idx(n - m, m),
            _ => idx(0, n - m),
        };
        for g in self.gluings() {
            for m in 0..n {
                let (m0, m1) = if g.reversing { (m, m + 1) } else { (n - m, n - m - 1) };
                b.glue_with_role(
                    charts[g.face],
                    slot_point(g.slot, m),
                    slot_point(g.slot, m + 1),
                    charts[g.other_face],
                    slot_point(g.other_slot, m0),
                    slot_point(g.other_slot, m1),
                    Some(roles[g.face][g.slot]),
                )
                .expect("refined gluing");
            }
        }
        let corner_point = |c: usize| match c {
            0 => idx(0, 0),
            1 => idx(n, 0),
            _ => idx(0, n),
        };
        let map_corner = |x: &Corner| b.corner_of(charts[x.0], corner_point(x.1)).expect("corner");
        let mut soul = Vec::new();
        for s in &self.marks().soul {
            soul.extend(clip_into_subfaces(&b, charts[s.face()], s.from(), s.to()));
        }
        let marks = Marks {
            weierstrass: self.marks().weierstrass.iter().map(map_corner).collect(),
            p: self.marks().p.as_ref().map(map_corner),
            q: self.marks().q.as_ref().map(map_corner),
            soul,
        };
        let name = format!("{}-x{n}", self.name());
        b.build(&name, marks).expect("refinement")
    }
}

/// Splits a chart segment into pieces lying in single faces of the chart.
fn clip_into_subfaces(b: &SurfaceBuilder, chart: ChartId, x0: [f64; 2], x1: [f64; 2]) -> Vec<CurveSegment> {
    let mut out = Vec::new();
    let mut taken = Vec::new();
    for &f in &b.charts[chart.0].faces {
        let t = b.face_points[f];
        let pts = &b.charts[chart.0].points;
        let tri = [pts[t[0]], pts[t[1]], pts[t[2]]];
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let d = [x1[0] - x0[0], x1[1] - x0[1]];
        let mut empty = false;
        for k in 0..3 {
            let a = tri[k];
            let e = tri[(k + 1) % 3];
            // Inside means to the left of each edge.
            let n = [-(e[1] - a[1]), e[0] - a[0]];
            let num = n[0] * (x0[0] - a[0]) + n[1] * (x0[1] - a[1]);
            let den = n[0] * d[0] + n[1] * d[1];
            let scale = (n[0] * n[0] + n[1] * n[1]).sqrt();
            if den.abs() < 1e-15 * scale {
                if num < -1e-12 * scale {
                    empty = true;
                }
                continue;
            }
            let t = -num / den;
            if den > 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
        let len = d[0].hypot(d[1]);
        let seen = taken.iter().any(|&(a, b): &(f64, f64)| (hi.min(b) - lo.max(a)) * len > 1e-12);
        if !empty && !seen && (hi - lo) * len > 1e-12 {
            taken.push((lo, hi));
            let p0 = [x0[0] + lo * d[0], x0[1] + lo * d[1]];
            let p1 = [x0[0] + hi * d[0], x0[1] + hi * d[1]];
            let (_, y0) = b.chart_to_face(f, p0);
            let (_, y1) = b.chart_to_face(f, p1);
            out.push(CurveSegment(f, y0[0], y0[1], y1[0], y1[1]));
        }
    }
    out
}
