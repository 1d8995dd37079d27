use super::plane::{add, cross, dot, norm, point_segment_distance, scale, sub, V2};
use crate::surface::{ConeSurface, CurveSegment, FaceTag};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

/// Default spacing of Steiner points and evaluation grids.
pub const DEFAULT_MESH_H: f64 = 0.005;

/// Graph whose nodes are the vertices and evenly spaced points on every
/// edge; nodes on the boundary of a common face are joined straight.
#[derive(Clone, Debug)]
pub struct SteinerGraph {
    mesh_h: f64,
    num_nodes: usize,
    /// Per face: node id and position in the face frame.
    face_nodes: Vec<Vec<(usize, V2)>>,
    /// Per face: consecutive node pairs along its edges, as indices into
    /// `face_nodes[face]`.
    windows: Vec<Vec<(usize, usize)>>,
    /// Per face and face node: windows ending there.
    node_windows: Vec<Vec<Vec<usize>>>,
    /// Per node: occurrences as `(face, index into face_nodes[face])`.
    occurrences: Vec<Vec<(usize, usize)>>,
    vertex_node: Vec<usize>,
}

impl SteinerGraph {
    pub fn new(s: &ConeSurface, mesh_h: f64) -> Self {
        assert!(mesh_h > 0.0, "mesh spacing must be positive");
        let nf = s.num_faces();
        let mut num_nodes = s.vertices().len();
        let vertex_node: Vec<usize> = (0..num_nodes).collect();
        let mut face_nodes: Vec<Vec<(usize, V2)>> = vec![Vec::new(); nf];
        let mut edge_nodes: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut windows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nf];
        for f in 0..nf {
            let p = s.face_corners(f);
            for c in 0..3 {
                face_nodes[f].push((s.corner_vertex(f, c), p[c]));
            }
            for k in 0..3 {
                let n = (s.lengths()[f][k] / mesh_h).ceil().max(1.0) as usize;
                let ids: Vec<usize> = match s.partner(f, k) {
                    Some((f2, k2, r)) if (f2, k2) < (f, k) => {
                        let mut ids = edge_nodes[&(f2, k2)].clone();
                        if !r {
                            ids.reverse();
                        }
                        ids
                    }
                    _ => {
                        let ids: Vec<usize> = (num_nodes..num_nodes + n - 1).collect();
                        num_nodes += n - 1;
                        edge_nodes.insert((f, k), ids.clone());
                        ids
                    }
                };
                let (a, b) = (p[k], p[(k + 1) % 3]);
                let m = ids.len() + 1;
                let mut prev = k;
                for (i, &id) in ids.iter().enumerate() {
                    let t = (i + 1) as f64 / m as f64;
                    windows[f].push((prev, face_nodes[f].len()));
                    prev = face_nodes[f].len();
                    face_nodes[f].push((id, add(a, scale(sub(b, a), t))));
                }
                windows[f].push((prev, (k + 1) % 3));
            }
        }
        let node_windows = windows
            .iter()
            .enumerate()
            .map(|(f, ws)| {
                let mut nw = vec![Vec::new(); face_nodes[f].len()];
                for (w, &(i, j)) in ws.iter().enumerate() {
                    nw[i].push(w);
                    nw[j].push(w);
                }
                nw
            })
            .collect();
        let mut occurrences = vec![Vec::new(); num_nodes];
        for (f, list) in face_nodes.iter().enumerate() {
            for (i, &(id, _)) in list.iter().enumerate() {
                occurrences[id].push((f, i));
            }
        }
        Self { mesh_h, num_nodes, face_nodes, windows, node_windows, occurrences, vertex_node }
    }

    pub fn mesh_h(&self) -> f64 {
        self.mesh_h
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }
}

/// Minimum over `z` in `[y0, y1]` of the linear interpolant of `d0, d1`
/// at `z` plus `|x − z|`.
fn window_value(x: V2, y0: V2, d0: f64, y1: V2, d1: f64) -> f64 {
    let ends = (d0 + norm(sub(x, y0))).min(d1 + norm(sub(x, y1)));
    let e = sub(y1, y0);
    let len = norm(e);
    if !(len > 0.0) {
        return ends;
    }
    let g = (d1 - d0) / len;
    if !(g.abs() < 1.0) {
        return ends;
    }
    let w = sub(x, y0);
    let (a, n) = (dot(w, e) / len, cross(e, w).abs() / len);
    let c = (1.0 - g * g).sqrt();
    let t = a - g * n / c;
    if t > 0.0 && t < len {
        ends.min(d0 + g * a + n * c)
    } else {
        ends
    }
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Approximate distance to a source set: exact inside the faces that meet
/// the sources, and elsewhere propagated through Steiner points and the
/// windows between consecutive ones.
#[derive(Clone, Debug)]
pub struct DistanceField<'a> {
    s: &'a ConeSurface,
    graph: &'a SteinerGraph,
    sources: Vec<Vec<(V2, V2)>>,
    values: Vec<f64>,
}

/// Source pieces per face, with pieces lying on an edge copied to the
/// neighbouring face.
fn sources_per_face(s: &ConeSurface, curve: &[CurveSegment]) -> Vec<Vec<(V2, V2)>> {
    let mut out = vec![Vec::new(); s.num_faces()];
    for seg in curve {
        let f = seg.face();
        out[f].push((seg.from(), seg.to()));
        let (b0, b1) = (s.barycentric(f, seg.from()), s.barycentric(f, seg.to()));
        for i in 0..3 {
            if b0[i].abs() < 1e-10 && b1[i].abs() < 1e-10 {
                let k = (i + 1) % 3;
                if let (Some((g, _, y0)), Some((_, _, y1))) =
                    (s.map_across(f, k, seg.from()), s.map_across(f, k, seg.to()))
                {
                    out[g].push((y0, y1));
                }
            }
        }
    }
    out
}

impl<'a> DistanceField<'a> {
    /// Distance to a curve given by straight pieces in faces.
    pub fn to_curve(s: &'a ConeSurface, graph: &'a SteinerGraph, curve: &[CurveSegment]) -> Self {
        Self::solve(s, graph, sources_per_face(s, curve))
    }

    /// Distance to a vertex.
    pub fn to_vertex(s: &'a ConeSurface, graph: &'a SteinerGraph, v: usize) -> Self {
        let mut src = vec![Vec::new(); s.num_faces()];
        for &(f, c) in &s.vertices()[v].corners {
            let p = s.face_corners(f)[c];
            src[f].push((p, p));
        }
        Self::solve(s, graph, src)
    }

    fn solve(s: &'a ConeSurface, graph: &'a SteinerGraph, sources: Vec<Vec<(V2, V2)>>) -> Self {
        let mut values = vec![f64::INFINITY; graph.num_nodes];
        for (f, list) in sources.iter().enumerate() {
            for &(a, b) in list {
                for &(id, x) in &graph.face_nodes[f] {
                    values[id] = values[id].min(point_segment_distance(x, a, b));
                }
            }
        }
        let mut heap: BinaryHeap<Item> =
            values.iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(i, &v)| Item(v, i)).collect();
        let mut done = vec![false; graph.num_nodes];
        while let Some(Item(d, n)) = heap.pop() {
            if done[n] || d > values[n] {
                continue;
            }
            done[n] = true;
            for &(f, i) in &graph.occurrences[n] {
                let nodes = &graph.face_nodes[f];
                let x = nodes[i].1;
                for &(m, y) in nodes {
                    let dm = d + norm(sub(y, x));
                    if !done[m] && dm < values[m] {
                        values[m] = dm;
                        heap.push(Item(dm, m));
                    }
                }
                for &w in &graph.node_windows[f][i] {
                    let (a, b) = graph.windows[f][w];
                    let (na, nb) = (nodes[a].0, nodes[b].0);
                    if !(done[na] && done[nb]) {
                        continue;
                    }
                    for &(m, y) in nodes {
                        let dm = window_value(y, nodes[a].1, values[na], nodes[b].1, values[nb]);
                        if !done[m] && dm < values[m] {
                            values[m] = dm;
                            heap.push(Item(dm, m));
                        }
                    }
                }
            }
        }
        Self { s, graph, sources, values }
    }

    /// Value at a point of face `f`.
    pub fn value(&self, f: usize, x: V2) -> f64 {
        let direct = self.sources[f].iter().map(|&(a, b)| point_segment_distance(x, a, b)).fold(f64::INFINITY, f64::min);
        let nodes = &self.graph.face_nodes[f];
        self.graph.windows[f]
            .iter()
            .map(|&(a, b)| window_value(x, nodes[a].1, self.values[nodes[a].0], nodes[b].1, self.values[nodes[b].0]))
            .chain(nodes.iter().map(|&(id, y)| self.values[id] + norm(sub(x, y))))
            .fold(direct, f64::min)
    }

    pub fn vertex_value(&self, v: usize) -> f64 {
        self.values[self.graph.vertex_node[v]]
    }

    /// Values on the evaluation grid of every face.
    fn grids(&self) -> Vec<FaceGrid> {
        (0..self.s.num_faces())
            .into_par_iter()
            .map(|f| {
                let g = FaceGrid::new(self.s, f, self.graph.mesh_h);
                let vals = g.points.iter().map(|&x| self.value(f, x)).collect();
                FaceGrid { values: vals, ..g }
            })
            .collect()
    }

    /// Area of `{x : d(x) ≤ r}` with the field linearly interpolated on the
    /// evaluation grid.
    pub fn sublevel_area(&self, r: f64) -> f64 {
        self.grids().iter().map(|g| g.triangles().map(|(p, v)| area_below(p, v, r)).sum::<f64>()).sum()
    }
}

/// Barycentric grid of spacing about `mesh_h` on one face.
#[derive(Clone, Debug)]
struct FaceGrid {
    n: usize,
    points: Vec<V2>,
    values: Vec<f64>,
}

impl FaceGrid {
    fn new(s: &ConeSurface, f: usize, mesh_h: f64) -> Self {
        let longest = s.lengths()[f].iter().cloned().fold(0.0, f64::max);
        let n = (longest / mesh_h).ceil().max(1.0) as usize;
        let p = s.face_corners(f);
        let mut points = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for j in 0..=n {
            for i in 0..=n - j {
                let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                points.push(add(p[0], add(scale(sub(p[1], p[0]), u), scale(sub(p[2], p[0]), v))));
            }
        }
        Self { n, points, values: Vec::new() }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) - j * (j.saturating_sub(1)) / 2 + i
    }

    fn triangles(&self) -> impl Iterator<Item = ([V2; 3], [f64; 3])> + '_ {
        let n = self.n;
        (0..n).flat_map(move |j| {
            (0..n - j).flat_map(move |i| {
                let mut t = vec![[self.idx(i, j), self.idx(i + 1, j), self.idx(i, j + 1)]];
                if i + j + 1 < n {
                    t.push([self.idx(i + 1, j), self.idx(i + 1, j + 1), self.idx(i, j + 1)]);
                }
                t.into_iter().map(|[a, b, c]| {
                    ([self.points[a], self.points[b], self.points[c]], [self.values[a], self.values[b], self.values[c]])
                })
            })
        })
    }
}

fn tri_area(p: [V2; 3]) -> f64 {
    0.5 * cross(sub(p[1], p[0]), sub(p[2], p[0])).abs()
}

/// Area of the part of a triangle where the linear interpolant of `v` is at
/// most `r`.
pub(crate) fn area_below(p: [V2; 3], v: [f64; 3], r: f64) -> f64 {
    let below: Vec<usize> = (0..3).filter(|&i| v[i] <= r).collect();
    let full = tri_area(p);
    let corner = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        ((r - v[i]) / (v[j] - v[i])) * ((r - v[i]) / (v[k] - v[i]))
    };
    match below.len() {
        3 => full,
        0 => 0.0,
        1 => full * corner(below[0]),
        _ => {
            let above = (0..3).find(|i| !below.contains(i)).unwrap();
            full * (1.0 - corner(above))
        }
    }
}

/// Segment where the linear interpolant of `v` crosses zero.
fn zero_segment(p: [V2; 3], v: [f64; 3]) -> Option<(V2, V2)> {
    let mut pts = Vec::new();
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        if (v[a] < 0.0) != (v[b] < 0.0) {
            let t = v[a] / (v[a] - v[b]);
            pts.push(add(p[a], scale(sub(p[b], p[a]), t)));
        }
    }
    (pts.len() == 2).then(|| (pts[0], pts[1]))
}

/// Sublevel area of the distance to `curve` at one mesh spacing.
pub fn sublevel_area(s: &ConeSurface, curve: &[CurveSegment], r: f64, mesh_h: f64) -> f64 {
    let graph = SteinerGraph::new(s, mesh_h);
    DistanceField::to_curve(s, &graph, curve).sublevel_area(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SublevelArea {
    /// Extrapolated value `2 A(h/2) − A(h)`.
    pub area: f64,
    pub coarse: f64,
    pub fine: f64,
    pub mesh_h: f64,
    /// `|A(h/2) − A(h)|`, the size of the first-order correction.
    pub error_estimate: f64,
}

/// Sublevel area at spacings `mesh_h` and `mesh_h / 2` with Richardson
/// extrapolation for a first-order error.
pub fn sublevel_area_richardson(s: &ConeSurface, curve: &[CurveSegment], r: f64, mesh_h: f64) -> SublevelArea {
    let coarse = sublevel_area(s, curve, r, mesh_h);
    let fine = sublevel_area(s, curve, r, mesh_h / 2.0);
    SublevelArea { area: 2.0 * fine - coarse, coarse, fine, mesh_h, error_estimate: (fine - coarse).abs() }
}

#[derive(Clone, Debug, Serialize)]
pub struct VoronoiCell {
    /// Vertex id of the centre.
    pub center: usize,
    pub area: f64,
    /// Pieces of the cell boundary, in face coordinates.
    pub boundary: Vec<CurveSegment>,
    /// Vertices equidistant, within `tol`, from this centre and a nearest
    /// other centre.
    pub boundary_vertices: Vec<usize>,
}

/// Voronoi cells of vertex centres by nearest-centre labelling of the
/// evaluation grid. Faces tagged as band are left out of every cell.
pub fn voronoi_cells(s: &ConeSurface, centers: &[usize], mesh_h: f64, tol: f64) -> Vec<VoronoiCell> {
    let graph = SteinerGraph::new(s, mesh_h);
    let fields: Vec<DistanceField> = centers.par_iter().map(|&c| DistanceField::to_vertex(s, &graph, c)).collect();
    let grids: Vec<Vec<FaceGrid>> = fields.iter().map(DistanceField::grids).collect();
    let mut cells: Vec<VoronoiCell> = centers
        .iter()
        .map(|&c| VoronoiCell { center: c, area: 0.0, boundary: Vec::new(), boundary_vertices: Vec::new() })
        .collect();
    let m = centers.len();
    for f in 0..s.num_faces() {
        if s.face_tag(f) == FaceTag::Band {
            continue;
        }
        let tris: Vec<Vec<([V2; 3], [f64; 3])>> = grids.iter().map(|g| g[f].triangles().collect()).collect();
        for t in 0..tris[0].len() {
            let p = tris[0][t].0;
            for i in 0..m {
                let mut phi = [0.0; 3];
                for (c, slot) in phi.iter_mut().enumerate() {
                    let other = (0..m).filter(|&j| j != i).map(|j| tris[j][t].1[c]).fold(f64::INFINITY, f64::min);
                    *slot = tris[i][t].1[c] - other;
                }
                cells[i].area += area_below(p, phi, 0.0);
                if let Some((a, b)) = zero_segment(p, phi) {
                    cells[i].boundary.push(CurveSegment(f, a[0], a[1], b[0], b[1]));
                }
            }
        }
    }
    for v in 0..s.vertices().len() {
        let d: Vec<f64> = fields.iter().map(|fd| fd.vertex_value(v)).collect();
        for i in 0..m {
            let other = (0..m).filter(|&j| j != i).map(|j| d[j]).fold(f64::INFINITY, f64::min);
            if (d[i] - other).abs() <= tol {
                cells[i].boundary_vertices.push(v);
            }
        }
    }
    cells
}
