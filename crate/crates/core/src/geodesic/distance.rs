use super::plane::{add, cross, norm, point_segment_distance, scale, sub, Isometry, V2};
use super::wedge::{explore, Bound, Budget, Step, WedgeVisitor};
use super::{GeodesicError, DEFAULT_BUDGET};
use crate::surface::{ConeSurface, CurveSegment};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LOCATE_EPS: f64 = 1e-10;

/// A point of a surface given in the frame of one face.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub face: usize,
    pub x: V2,
}

impl SurfacePoint {
    pub fn new(face: usize, x: V2) -> Self {
        Self { face, x }
    }

    /// The point at vertex `v`, placed at its first corner.
    pub fn vertex(s: &ConeSurface, v: usize) -> Self {
        let (f, c) = s.vertices()[v].corners[0];
        Self { face: f, x: s.face_corners(f)[c] }
    }
}

#[derive(Clone, Copy, Debug)]
enum Location {
    Vertex(usize),
    Frames([(usize, V2); 2], usize),
}

fn locate(s: &ConeSurface, p: &SurfacePoint) -> Result<Location, GeodesicError> {
    if p.face >= s.num_faces() || !p.x.iter().all(|c| c.is_finite()) {
        return Err(GeodesicError::BadPoint(format!("{p:?}")));
    }
    let b = s.barycentric(p.face, p.x);
    if b.iter().any(|&t| t < -LOCATE_EPS) {
        return Err(GeodesicError::BadPoint(format!("{p:?} lies outside its face")));
    }
    let small: Vec<usize> = (0..3).filter(|&i| b[i] < LOCATE_EPS).collect();
    match small.len() {
        0 => Ok(Location::Frames([(p.face, p.x); 2], 1)),
        1 => {
            // Barycentric index i vanishes on the slot opposite corner i.
            let k = (small[0] + 1) % 3;
            match s.map_across(p.face, k, p.x) {
                Some((f2, _, x2)) => Ok(Location::Frames([(p.face, p.x), (f2, x2)], 2)),
                None => Ok(Location::Frames([(p.face, p.x); 2], 1)),
            }
        }
        _ => {
            let c = (0..3).find(|i| !small.contains(i)).unwrap();
            Ok(Location::Vertex(s.corner_vertex(p.face, c)))
        }
    }
}

/// Distances found by straight rays from one source.
struct Sweep<'a> {
    s: &'a ConeSurface,
    targets: &'a [Vec<(V2, V2)>],
    origin: V2,
    vertex: Vec<f64>,
    target: f64,
}

fn clip_to_wedge(o: V2, r: V2, l: V2, a: V2, b: V2) -> Option<(V2, V2)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let ab = sub(b, a);
    let (r, l) = (scale(r, 1.0 / norm(r)), scale(l, 1.0 / norm(l)));
    let tol = 1e-12 * (1.0 + norm(sub(a, o)) + norm(ab));
    for (c0, c1) in [(cross(r, sub(a, o)), cross(r, ab)), (cross(sub(a, o), l), cross(ab, l))] {
        if c1.abs() < 1e-300 {
            if c0 < -tol {
                return None;
            }
        } else if c1 > 0.0 {
            lo = lo.max((-tol - c0) / c1);
        } else {
            hi = hi.min((-tol - c0) / c1);
        }
    }
    let at = |t: f64| add(a, scale(ab, t.clamp(0.0, 1.0)));
    (lo <= hi).then(|| (at(lo), at(hi)))
}

impl Sweep<'_> {
    fn direct_face(&mut self, f: usize, skip_corner: Option<usize>) {
        let p = self.s.face_corners(f);
        for c in 0..3 {
            if Some(c) != skip_corner {
                let v = self.s.corner_vertex(f, c);
                self.vertex[v] = self.vertex[v].min(norm(sub(p[c], self.origin)));
            }
        }
        for &(a, b) in &self.targets[f] {
            self.target = self.target.min(point_segment_distance(self.origin, a, b));
        }
    }
}

impl WedgeVisitor for Sweep<'_> {
    fn face(&mut self, path: &[Step], r: V2, l: V2) {
        let last = path.last().unwrap();
        for &(a, b) in &self.targets[last.face] {
            let (a, b) = (last.map.apply(a), last.map.apply(b));
            if let Some((u, w)) = clip_to_wedge(self.origin, r, l, a, b) {
                self.target = self.target.min(point_segment_distance(self.origin, u, w));
            }
        }
    }

    fn apex(&mut self, path: &[Step], corner: usize, x: V2) {
        let last = path.last().unwrap();
        let v = self.s.corner_vertex(last.face, corner);
        self.vertex[v] = self.vertex[v].min(norm(sub(x, self.origin)));
    }
}

fn sweep(
    s: &ConeSurface,
    targets: &[Vec<(V2, V2)>],
    src: Location,
    reach: f64,
    budget: &Budget,
) -> (Vec<f64>, f64) {
    let bound = Bound::new(reach, false);
    let mut vertex = vec![f64::INFINITY; s.vertices().len()];
    let mut target = f64::INFINITY;
    let run = |f: usize, origin: V2, corner: Option<usize>, vertex: &mut Vec<f64>, target: &mut f64| {
        let mut sw = Sweep { s, targets, origin, vertex: std::mem::take(vertex), target: *target };
        sw.direct_face(f, corner);
        let p = s.face_corners(f);
        let mut path = vec![Step { face: f, map: Isometry::identity(), entered: None }];
        match corner {
            Some(c) => {
                let (r, l) = (sub(p[(c + 1) % 3], origin), sub(p[(c + 2) % 3], origin));
                explore(s, origin, &mut path, (c + 1) % 3, r, l, &bound, budget, &mut sw);
            }
            None => {
                for k in 0..3 {
                    let (r, l) = (sub(p[k], origin), sub(p[(k + 1) % 3], origin));
                    explore(s, origin, &mut path, k, r, l, &bound, budget, &mut sw);
                }
            }
        }
        *vertex = sw.vertex;
        *target = sw.target;
    };
    match src {
        Location::Vertex(v) => {
            for &(f, c) in &s.vertices()[v].corners {
                run(f, s.face_corners(f)[c], Some(c), &mut vertex, &mut target);
            }
            vertex[v] = 0.0;
        }
        Location::Frames(frames, n) => {
            for &(f, x) in &frames[..n] {
                run(f, x, None, &mut vertex, &mut target);
            }
        }
    }
    (vertex, target)
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

/// Shortest distance from `x` to a set of straight targets: Dijkstra over
/// the source and the vertices, with edges given by straight visibility.
fn distance_to_targets(
    s: &ConeSurface,
    x: &SurfacePoint,
    targets: &[Vec<(V2, V2)>],
    l_max: f64,
    budget: usize,
) -> Result<Option<f64>, GeodesicError> {
    if !(l_max > 0.0) {
        return Err(GeodesicError::BadBound(l_max));
    }
    let budget = Budget::new(budget);
    let nv = s.vertices().len();
    let start = locate(s, x)?;
    let mut dist = vec![f64::INFINITY; nv + 1];
    let mut done = vec![false; nv + 1];
    let mut best = f64::INFINITY;
    let mut heap = BinaryHeap::new();
    dist[nv] = 0.0;
    heap.push(Item(0.0, nv));
    while let Some(Item(d, n)) = heap.pop() {
        if done[n] || d > dist[n] {
            continue;
        }
        if d >= best.min(l_max) {
            break;
        }
        done[n] = true;
        let src = if n == nv { start } else { Location::Vertex(n) };
        let reach = best.min(l_max) - d;
        let (vd, td) = sweep(s, targets, src, reach, &budget);
        best = best.min(d + td);
        for (v, &e) in vd.iter().enumerate() {
            if !done[v] && d + e < dist[v] && d + e <= l_max {
                dist[v] = d + e;
                heap.push(Item(d + e, v));
            }
        }
    }
    if budget.exhausted() {
        return Err(GeodesicError::BudgetExhausted(budget.limit()));
    }
    Ok((best <= l_max).then_some(best))
}

fn point_targets(s: &ConeSurface, y: &SurfacePoint) -> Result<Vec<Vec<(V2, V2)>>, GeodesicError> {
    let mut t = vec![Vec::new(); s.num_faces()];
    match locate(s, y)? {
        Location::Vertex(v) => {
            for &(f, c) in &s.vertices()[v].corners {
                let p = s.face_corners(f)[c];
                t[f].push((p, p));
            }
        }
        Location::Frames(fr, n) => {
            for &(f, x) in &fr[..n] {
                t[f].push((x, x));
            }
        }
    }
    Ok(t)
}

/// Length of the shortest path from `x` to `y`, or `None` when it exceeds
/// `l_max`.
pub fn point_distance(
    s: &ConeSurface,
    x: &SurfacePoint,
    y: &SurfacePoint,
    l_max: f64,
) -> Result<Option<f64>, GeodesicError> {
    point_distance_with(s, x, y, l_max, DEFAULT_BUDGET)
}

pub fn point_distance_with(
    s: &ConeSurface,
    x: &SurfacePoint,
    y: &SurfacePoint,
    l_max: f64,
    budget: usize,
) -> Result<Option<f64>, GeodesicError> {
    let targets = point_targets(s, y)?;
    distance_to_targets(s, x, &targets, l_max, budget)
}

/// Distance from `x` to a curve made of straight pieces in faces, or `None`
/// when it exceeds `l_max`.
pub fn distance_to_curve(
    s: &ConeSurface,
    x: &SurfacePoint,
    curve: &[CurveSegment],
    l_max: f64,
) -> Result<Option<f64>, GeodesicError> {
    let mut t = vec![Vec::new(); s.num_faces()];
    for seg in curve {
        if seg.face() >= s.num_faces() {
            return Err(GeodesicError::BadInput(format!("curve segment in face {}", seg.face())));
        }
        t[seg.face()].push((seg.from(), seg.to()));
    }
    distance_to_targets(s, x, &t, l_max, DEFAULT_BUDGET)
}

/// Boundary edges of a surface as a curve.
pub fn boundary_curve(s: &ConeSurface) -> Vec<CurveSegment> {
    s.boundary_slots()
        .into_iter()
        .map(|(f, k)| {
            let p = s.face_corners(f);
            let (a, b) = (p[k], p[(k + 1) % 3]);
            CurveSegment(f, a[0], a[1], b[0], b[1])
        })
        .collect()
}
