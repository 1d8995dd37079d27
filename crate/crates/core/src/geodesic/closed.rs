use super::plane::{
    add, angle_from, clip_line_to_triangle, cross, develop, dot, norm, rot90, scale, segment_distance, sub, Isometry,
    V2,
};
use super::wedge::{explore, Bound, Budget, Step, WedgeVisitor};
use super::{Family, GeodesicError, GeodesicKind, GeodesicPath, Incidence, PathSegment};
use crate::surface::{ConeSurface, EdgeRole, FaceTag};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Default number of unfolding nodes before a search is reported partial.
pub const DEFAULT_BUDGET: usize = 50_000_000;

const JOINT_EPS: f64 = 1e-8;
const SMOOTH_EPS: f64 = 1e-9;
const KEY_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerationOptions {
    pub l_max: f64,
    pub budget: usize,
}

impl EnumerationOptions {
    pub fn new(l_max: f64) -> Self {
        Self { l_max, budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Closed geodesics sorted by length, one per unoriented trace.
    pub paths: Vec<GeodesicPath>,
    /// Set when the node budget ran out; the list may then be incomplete.
    pub partial: bool,
    pub nodes: usize,
}

#[derive(Clone, Debug)]
pub struct Systole {
    pub length: f64,
    pub path: GeodesicPath,
    pub nodes: usize,
}

/// Straight segment between two vertices with no vertex in its interior.
#[derive(Clone, Debug)]
pub struct SaddleConnection {
    pub start: usize,
    pub end: usize,
    pub length: f64,
    /// Link angle of the outgoing direction at `start`.
    pub angle_out: f64,
    /// Link angle of the direction back towards `start`, measured at `end`.
    pub angle_in: f64,
    /// +1 when the link orientations at both ends agree along the segment.
    pub orientation: f64,
    origin: V2,
    target: V2,
    steps: Vec<Step>,
}

fn check_closed(s: &ConeSurface, l_max: f64) -> Result<(), GeodesicError> {
    if !(l_max > 0.0 && l_max.is_finite()) {
        return Err(GeodesicError::BadBound(l_max));
    }
    if !s.is_closed() {
        return Err(GeodesicError::NotClosed);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Corridors from edges: cylinders and one-sided smooth geodesics.

#[derive(Clone, Copy, Debug)]
struct Window {
    l: V2,
    r: V2,
}

fn label(p: V2, q: V2, apex: V2) -> Window {
    if cross(sub(q, p), sub(apex, p)) > 0.0 {
        Window { l: p, r: q }
    } else {
        Window { l: q, r: p }
    }
}

/// Set of unit normals `n` with `n·v ≥ 0` for all constraints, as an
/// angular interval relative to the first constraint.
#[derive(Clone, Copy, Debug)]
struct NormalArc {
    base: f64,
    lo: f64,
    hi: f64,
}

impl NormalArc {
    fn new(v: V2) -> Self {
        Self { base: v[1].atan2(v[0]), lo: -PI / 2.0, hi: PI / 2.0 }
    }

    fn add(&mut self, v: V2) -> bool {
        if norm(v) < 1e-15 {
            return self.hi - self.lo > 1e-12;
        }
        let psi = (v[1].atan2(v[0]) - self.base + PI).rem_euclid(2.0 * PI) - PI;
        self.lo = self.lo.max(psi - PI / 2.0);
        self.hi = self.hi.min(psi + PI / 2.0);
        self.hi - self.lo > 1e-12
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    kind: GeodesicKind,
    length: f64,
    /// Representative line `x0 + s·d`, `s ∈ [0, length]`, in the frame of the
    /// source face.
    x0: V2,
    d: V2,
    /// Line used for the canonical crossing key.
    key_x0: V2,
    reversing: bool,
    steps: Vec<Step>,
}

struct EdgeSearch<'a> {
    s: &'a ConeSurface,
    f0: usize,
    k0: usize,
    bound: &'a Bound,
    budget: &'a Budget,
    windows: Vec<Window>,
    steps: Vec<Step>,
    returns: Vec<usize>,
    out: Vec<Candidate>,
}

impl EdgeSearch<'_> {
    fn offsets(&self, n: V2) -> (f64, f64) {
        let lo = self.windows.iter().map(|w| dot(n, w.r)).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.windows.iter().map(|w| dot(n, w.l)).fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    fn point_on_first_window(&self, n: V2, c: f64) -> V2 {
        let w = self.windows[0];
        let e = sub(w.l, w.r);
        let lambda = (c - dot(n, w.r)) / dot(n, e);
        add(w.r, scale(e, lambda))
    }

    /// Whether the line through `x0` with direction `d` already closes up at
    /// an earlier return to the source edge.
    fn closes_early(&self, x0: V2, d: V2) -> bool {
        self.returns.iter().any(|&j| {
            let w = self.windows[j];
            let e = sub(w.l, w.r);
            let denom = cross(e, d);
            if denom.abs() < 1e-15 {
                return false;
            }
            let mu = cross(sub(x0, w.r), d) / denom;
            let y = add(w.r, scale(e, mu));
            let m = self.steps[j].map;
            let z = m.apply_inv(y);
            let dz = m.apply_vec_inv(d);
            norm(sub(z, x0)) < 1e-9 && norm(sub(dz, d)) < 1e-9
        })
    }

    fn check_closure(&mut self) {
        let t_map = self.steps.last().unwrap().map;
        let t = t_map.t;
        let a = t_map.a;
        if t_map.det() > 0.0 {
            if (a[0][0] - 1.0).abs() + a[0][1].abs() + a[1][0].abs() + (a[1][1] - 1.0).abs() > 1e-9 {
                return;
            }
            let len = norm(t);
            if len < 1e-12 || len > self.bound.get() + 1e-9 {
                return;
            }
            let d = scale(t, 1.0 / len);
            let n = rot90(d);
            let (lo, hi) = self.offsets(n);
            if hi - lo <= 1e-9 {
                return;
            }
            let mid = 0.5 * (lo + hi);
            let key_x0 = self.point_on_first_window(n, mid);
            let mut x0 = key_x0;
            if self.closes_early(x0, d) {
                x0 = self.point_on_first_window(n, lo + 0.25 * (hi - lo));
                if self.closes_early(x0, d) {
                    return;
                }
            }
            self.bound.offer(len);
            self.out.push(Candidate {
                kind: GeodesicKind::Cylinder,
                length: len,
                x0,
                d,
                key_x0,
                reversing: false,
                steps: self.steps.clone(),
            });
        } else {
            // Reflection x ↦ A x: axis u is the +1 eigenvector.
            let phi = a[1][0].atan2(a[0][0]);
            let u = [(phi / 2.0).cos(), (phi / 2.0).sin()];
            let tu = dot(t, u);
            if tu.abs() < 1e-12 || tu.abs() > self.bound.get() + 1e-9 {
                return;
            }
            let d = scale(u, tu.signum());
            let n = rot90(d);
            let c = 0.5 * dot(n, t);
            let (lo, hi) = self.offsets(n);
            if !(c > lo + 1e-9 && c < hi - 1e-9) {
                return;
            }
            let x0 = self.point_on_first_window(n, c);
            if self.closes_early(x0, d) {
                return;
            }
            self.bound.offer(tu.abs());
            self.out.push(Candidate {
                kind: GeodesicKind::Soul,
                length: tu.abs(),
                x0,
                d,
                key_x0: x0,
                reversing: true,
                steps: self.steps.clone(),
            });
        }
    }

    fn dfs(&mut self, arc: NormalArc) {
        let last = *self.steps.last().unwrap();
        let k_in = last.entered.unwrap();
        for k_out in [(k_in + 1) % 3, (k_in + 2) % 3] {
            if !self.budget.tick() {
                return;
            }
            let Some((f2, k2, m2, _)) = develop(self.s, last.face, &last.map, k_out) else {
                continue;
            };
            let p = self.s.face_corners(last.face);
            let q = self.s.face_corners(f2);
            let w = label(
                last.map.apply(p[k_out]),
                last.map.apply(p[(k_out + 1) % 3]),
                m2.apply(q[(k2 + 2) % 3]),
            );
            let w0 = self.windows[0];
            if segment_distance(w0.l, w0.r, w.l, w.r) > self.bound.get() {
                continue;
            }
            let mut arc2 = arc;
            let mut ok = arc2.add(sub(w.l, w.r));
            for old in &self.windows {
                if !ok {
                    break;
                }
                ok = arc2.add(sub(w.l, old.r)) && arc2.add(sub(old.l, w.r));
            }
            if !ok {
                continue;
            }
            self.windows.push(w);
            self.steps.push(Step { face: f2, map: m2, entered: Some(k2) });
            if (f2, k2) == (self.f0, self.k0) {
                self.check_closure();
                self.returns.push(self.steps.len() - 1);
                self.dfs(arc2);
                self.returns.pop();
            } else {
                self.dfs(arc2);
            }
            self.steps.pop();
            self.windows.pop();
        }
    }
}

fn edge_source(s: &ConeSurface, f0: usize, k0: usize, bound: &Bound, budget: &Budget) -> Vec<Candidate> {
    let p = s.face_corners(f0);
    let w0 = label(p[k0], p[(k0 + 1) % 3], p[(k0 + 2) % 3]);
    let mut search = EdgeSearch {
        s,
        f0,
        k0,
        bound,
        budget,
        windows: vec![w0],
        steps: vec![Step { face: f0, map: Isometry::identity(), entered: Some(k0) }],
        returns: Vec::new(),
        out: Vec::new(),
    };
    search.dfs(NormalArc::new(sub(w0.l, w0.r)));
    search.out
}

// ---------------------------------------------------------------------------
// Saddle connections from vertices.

struct ConnectionCollector<'a> {
    s: &'a ConeSurface,
    f0: usize,
    c0: usize,
    origin: V2,
    out: Vec<SaddleConnection>,
}

pub(super) fn link_angle(s: &ConeSurface, f: usize, c: usize, dir: V2) -> f64 {
    let p = s.face_corners(f);
    let e = sub(p[(c + 1) % 3], p[c]);
    let phi = angle_from(e, dir).clamp(0.0, s.corner_angle(f, c));
    let (offset, sign) = s.corner_link(f, c);
    let theta = s.vertices()[s.corner_vertex(f, c)].angle;
    (offset + sign * phi).rem_euclid(theta)
}

impl WedgeVisitor for ConnectionCollector<'_> {
    fn apex(&mut self, path: &[Step], corner: usize, x: V2) {
        let last = path.last().unwrap();
        let v = sub(x, self.origin);
        let back = last.map.apply_vec_inv(scale(v, -1.0));
        let (_, sign0) = self.s.corner_link(self.f0, self.c0);
        let (_, sign1) = self.s.corner_link(last.face, corner);
        self.out.push(SaddleConnection {
            start: self.s.corner_vertex(self.f0, self.c0),
            end: self.s.corner_vertex(last.face, corner),
            length: norm(v),
            angle_out: link_angle(self.s, self.f0, self.c0, v),
            angle_in: link_angle(self.s, last.face, corner, back),
            orientation: sign0 * last.map.det().signum() * sign1,
            origin: self.origin,
            target: x,
            steps: path.to_vec(),
        });
    }
}

fn mesh_edge_connection(s: &ConeSurface, f: usize, c: usize, to: usize) -> SaddleConnection {
    let p = s.face_corners(f);
    let v = sub(p[to], p[c]);
    let (_, s0) = s.corner_link(f, c);
    let (_, s1) = s.corner_link(f, to);
    SaddleConnection {
        start: s.corner_vertex(f, c),
        end: s.corner_vertex(f, to),
        length: norm(v),
        angle_out: link_angle(s, f, c, v),
        angle_in: link_angle(s, f, to, scale(v, -1.0)),
        orientation: s0 * s1,
        origin: p[c],
        target: p[to],
        steps: vec![Step { face: f, map: Isometry::identity(), entered: None }],
    }
}

fn corner_connections(s: &ConeSurface, f0: usize, c0: usize, bound: &Bound, budget: &Budget) -> Vec<SaddleConnection> {
    let p = s.face_corners(f0);
    let origin = p[c0];
    let mut col = ConnectionCollector { s, f0, c0, origin, out: Vec::new() };
    for to in [(c0 + 1) % 3, (c0 + 2) % 3] {
        if norm(sub(p[to], origin)) <= bound.get() {
            col.out.push(mesh_edge_connection(s, f0, c0, to));
        }
    }
    let mut path = vec![Step { face: f0, map: Isometry::identity(), entered: None }];
    let r = sub(p[(c0 + 1) % 3], origin);
    let l = sub(p[(c0 + 2) % 3], origin);
    explore(s, origin, &mut path, (c0 + 1) % 3, r, l, bound, budget, &mut col);
    col.out
}

fn circular_gap(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

fn dedupe_connections(s: &ConeSurface, mut list: Vec<SaddleConnection>) -> Vec<SaddleConnection> {
    list.sort_by(|a, b| {
        (a.start, a.end)
            .cmp(&(b.start, b.end))
            .then(a.length.total_cmp(&b.length))
            .then(a.angle_out.total_cmp(&b.angle_out))
    });
    let mut out: Vec<SaddleConnection> = Vec::with_capacity(list.len());
    for c in list {
        let theta = s.vertices()[c.start].angle;
        let dup = out.iter().rev().take_while(|o| o.start == c.start && o.end == c.end && c.length - o.length < 1e-9).any(
            |o| (o.length - c.length).abs() < 1e-9 && circular_gap(o.angle_out, c.angle_out, theta) < 1e-9,
        );
        if !dup {
            out.push(c);
        }
    }
    out
}

fn connections_within(s: &ConeSurface, bound: &Bound, budget: &Budget) -> Vec<SaddleConnection> {
    let corners: Vec<(usize, usize)> = (0..s.num_faces()).flat_map(|f| (0..3).map(move |c| (f, c))).collect();
    let all: Vec<SaddleConnection> =
        corners.par_iter().flat_map_iter(|&(f, c)| corner_connections(s, f, c, bound, budget)).collect();
    dedupe_connections(s, all)
}

/// All saddle connections (including mesh edges and connections between
/// smooth vertices) of length at most `l_max`.
pub fn saddle_connections(s: &ConeSurface, l_max: f64) -> Result<Vec<SaddleConnection>, GeodesicError> {
    if !(l_max > 0.0) {
        return Err(GeodesicError::BadBound(l_max));
    }
    let budget = Budget::new(DEFAULT_BUDGET);
    let list = connections_within(s, &Bound::new(l_max, false), &budget);
    if budget.exhausted() {
        return Err(GeodesicError::BudgetExhausted(budget.limit()));
    }
    Ok(list)
}

// ---------------------------------------------------------------------------
// Chains of saddle connections.

fn joint_ok(angle_in: f64, angle_out: f64, theta: f64) -> bool {
    let delta = (angle_out - angle_in).rem_euclid(theta);
    delta >= PI - JOINT_EPS && theta - delta >= PI - JOINT_EPS
}

struct ChainSearch<'a> {
    s: &'a ConeSurface,
    conns: &'a [SaddleConnection],
    outgoing: Vec<Vec<usize>>,
    bound: &'a Bound,
    budget: &'a Budget,
}

impl ChainSearch<'_> {
    fn dfs(&self, first: usize, chain: &mut Vec<usize>, len: f64, out: &mut Vec<Vec<usize>>) {
        if !self.budget.tick() {
            return;
        }
        let cur = &self.conns[*chain.last().unwrap()];
        let theta = self.s.vertices()[cur.end].angle;
        if cur.end == self.conns[first].start && joint_ok(cur.angle_in, self.conns[first].angle_out, theta) {
            out.push(chain.clone());
        }
        for &j in &self.outgoing[cur.end] {
            if j < first {
                continue;
            }
            let next = &self.conns[j];
            if len + next.length > self.bound.get() + 1e-9 || !joint_ok(cur.angle_in, next.angle_out, theta) {
                continue;
            }
            chain.push(j);
            self.dfs(first, chain, len + next.length, out);
            chain.pop();
        }
    }
}

fn reverse_ids(s: &ConeSurface, conns: &[SaddleConnection]) -> Vec<usize> {
    conns
        .iter()
        .map(|c| {
            conns
                .iter()
                .position(|o| {
                    o.start == c.end
                        && o.end == c.start
                        && (o.length - c.length).abs() < 1e-9
                        && circular_gap(o.angle_out, c.angle_in, s.vertices()[c.end].angle) < 1e-8
                        && circular_gap(o.angle_in, c.angle_out, s.vertices()[c.start].angle) < 1e-8
                })
                .unwrap_or(usize::MAX)
        })
        .collect()
}

fn canonical_rotation(seq: &[usize]) -> Vec<usize> {
    (0..seq.len()).map(|i| [&seq[i..], &seq[..i]].concat()).min().unwrap_or_default()
}

fn chain_key(chain: &[usize], rev: &[usize]) -> Vec<usize> {
    let forward = canonical_rotation(chain);
    let backward: Vec<usize> = chain.iter().rev().map(|&c| rev[c]).collect();
    forward.min(canonical_rotation(&backward))
}

fn is_periodic(seq: &[usize]) -> bool {
    let m = seq.len();
    (1..m).any(|p| m % p == 0 && (0..m).all(|i| seq[i] == seq[i % p]))
}

fn is_smooth(s: &ConeSurface, v: usize) -> bool {
    (s.vertices()[v].angle - 2.0 * PI).abs() < SMOOTH_EPS
}

// ---------------------------------------------------------------------------
// Paths.

fn clip_steps(s: &ConeSurface, steps: &[Step], x0: V2, d: V2, len: f64, ends_at_vertex: bool) -> Vec<PathSegment> {
    let mut out = Vec::with_capacity(steps.len());
    for (i, st) in steps.iter().enumerate() {
        let p = s.face_corners(st.face);
        let tri = [st.map.apply(p[0]), st.map.apply(p[1]), st.map.apply(p[2])];
        let (a, b) = clip_line_to_triangle(x0, d, &tri).unwrap_or((0.0, 0.0));
        let (a, b) = (a.clamp(0.0, len), b.clamp(0.0, len));
        let exit_slot = if i + 1 < steps.len() {
            let next = steps[i + 1];
            next.entered.and_then(|k| s.partner(next.face, k)).map(|(_, k, _)| k)
        } else if ends_at_vertex {
            None
        } else {
            // The last face of a closed corridor: the line leaves it through
            // the slot leading back to the first face.
            None
        };
        out.push(PathSegment {
            face: st.face,
            entry: st.map.apply_inv(add(x0, scale(d, a))),
            exit: st.map.apply_inv(add(x0, scale(d, b))),
            exit_slot,
        });
    }
    out
}

fn candidate_path(s: &ConeSurface, c: &Candidate) -> GeodesicPath {
    // The final step is the source face reached again; the segments stop
    // before it and the last one exits through the slot leading back.
    let n = c.steps.len() - 1;
    let mut segments = clip_steps(s, &c.steps, c.x0, c.d, c.length, false);
    segments.truncate(n);
    let back = c.steps[n];
    segments[n - 1].exit_slot = back.entered.and_then(|k| s.partner(back.face, k)).map(|(_, k, _)| k);
    GeodesicPath {
        kind: c.kind,
        length: c.length,
        closed: true,
        segments,
        incidences: Vec::new(),
        orientation_reversing: c.reversing,
    }
}

fn crossing_key(s: &ConeSurface, c: &Candidate) -> Vec<(usize, usize, f64)> {
    let mut key = Vec::new();
    for st in &c.steps[1..] {
        let k = st.entered.unwrap();
        let p = s.face_corners(st.face);
        let (a, b) = (st.map.apply(p[k]), st.map.apply(p[(k + 1) % 3]));
        let e = sub(b, a);
        let denom = cross(e, c.d);
        if denom.abs() < 1e-15 {
            continue;
        }
        let lambda = cross(sub(c.key_x0, a), c.d) / denom;
        let (f2, k2, r) = s.partner(st.face, k).unwrap();
        let entry = if (st.face, k) <= (f2, k2) {
            (st.face, k, lambda)
        } else {
            (f2, k2, if r { lambda } else { 1.0 - lambda })
        };
        key.push(entry);
    }
    key.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)).then(x.2.total_cmp(&y.2)));
    key
}

fn same_key(a: &[(usize, usize, f64)], b: &[(usize, usize, f64)]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.0 == y.0 && x.1 == y.1 && (x.2 - y.2).abs() < KEY_EPS)
}

fn chain_path(s: &ConeSurface, conns: &[SaddleConnection], chain: &[usize]) -> GeodesicPath {
    let mut segments = Vec::new();
    let mut incidences = Vec::new();
    let mut length = 0.0;
    let mut orientation = 1.0;
    for (i, &id) in chain.iter().enumerate() {
        let c = &conns[id];
        let v = sub(c.target, c.origin);
        let d = scale(v, 1.0 / c.length);
        segments.extend(clip_steps(s, &c.steps, c.origin, d, c.length, true));
        length += c.length;
        orientation *= c.orientation;
        let next = &conns[chain[(i + 1) % chain.len()]];
        let theta = s.vertices()[c.end].angle;
        let delta = (next.angle_out - c.angle_in).rem_euclid(theta);
        incidences.push(Incidence {
            vertex: c.end,
            after_segment: segments.len() - 1,
            angle_in: c.angle_in,
            angle_out: next.angle_out,
            side_angles: (delta, theta - delta),
        });
    }
    let smooth = chain.iter().all(|&id| is_smooth(s, conns[id].start));
    GeodesicPath {
        kind: if smooth { GeodesicKind::Soul } else { GeodesicKind::SaddleChain },
        length,
        closed: true,
        segments,
        incidences,
        orientation_reversing: orientation < 0.0,
    }
}

fn sort_key(p: &GeodesicPath) -> (i64, GeodesicKind, Vec<usize>, Vec<usize>) {
    ((p.length * 1e9).round() as i64, p.kind, p.cone_points(), p.faces())
}

fn run(s: &ConeSurface, bound: &Bound, budget: &Budget) -> Vec<GeodesicPath> {
    let slots: Vec<(usize, usize)> =
        (0..s.num_faces()).flat_map(|f| (0..3).map(move |k| (f, k))).filter(|&(f, k)| s.partner(f, k).is_some()).collect();
    let candidates: Vec<Candidate> =
        slots.par_iter().flat_map_iter(|&(f, k)| edge_source(s, f, k, bound, budget)).collect();
    let mut smooth: Vec<(Candidate, Vec<(usize, usize, f64)>)> = Vec::new();
    for c in candidates {
        if c.length > bound.get() + 1e-9 {
            continue;
        }
        let key = crossing_key(s, &c);
        if !smooth.iter().any(|(o, k)| (o.length - c.length).abs() < KEY_EPS && same_key(k, &key)) {
            smooth.push((c, key));
        }
    }
    let mut paths: Vec<GeodesicPath> = smooth.iter().map(|(c, _)| candidate_path(s, c)).collect();

    let conns = connections_within(s, bound, budget);
    let mut outgoing = vec![Vec::new(); s.vertices().len()];
    for (i, c) in conns.iter().enumerate() {
        outgoing[c.start].push(i);
    }
    let search = ChainSearch { s, conns: &conns, outgoing, bound, budget };
    let chains: Vec<Vec<usize>> = (0..conns.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            if conns[i].length <= bound.get() + 1e-9 {
                search.dfs(i, &mut vec![i], conns[i].length, &mut out);
            }
            out
        })
        .collect();
    let rev = reverse_ids(s, &conns);
    let mut keys = std::collections::BTreeSet::new();
    for chain in chains {
        if is_periodic(&chain) {
            continue;
        }
        if !keys.insert(chain_key(&chain, &rev)) {
            continue;
        }
        let path = chain_path(s, &conns, &chain);
        if path.kind == GeodesicKind::Soul && !path.orientation_reversing {
            continue;
        }
        if path.length <= bound.get() + 1e-9 {
            bound.offer(path.length);
            paths.push(path);
        }
    }
    paths.retain(|p| p.length <= bound.get() + 1e-9);
    paths.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    paths
}

/// Every closed geodesic of length at most `l_max`, one per unoriented trace;
/// cylinders are reported once by a core curve.
pub fn enumerate_closed_geodesics(s: &ConeSurface, l_max: f64) -> Result<Enumeration, GeodesicError> {
    enumerate_closed_geodesics_with(s, &EnumerationOptions::new(l_max))
}

pub fn enumerate_closed_geodesics_with(s: &ConeSurface, opts: &EnumerationOptions) -> Result<Enumeration, GeodesicError> {
    check_closed(s, opts.l_max)?;
    let bound = Bound::new(opts.l_max, false);
    let budget = Budget::new(opts.budget);
    let paths = run(s, &bound, &budget);
    Ok(Enumeration { paths, partial: budget.exhausted(), nodes: budget.used() })
}

/// Length of the shortest closed geodesic. On a surface whose cone angles
/// are all at least 2π this is the systole.
pub fn systole(s: &ConeSurface, l_max: f64) -> Result<Systole, GeodesicError> {
    systole_with(s, &EnumerationOptions::new(l_max))
}

pub fn systole_with(s: &ConeSurface, opts: &EnumerationOptions) -> Result<Systole, GeodesicError> {
    check_closed(s, opts.l_max)?;
    let min_angle = s.min_cone_angle();
    if min_angle < 2.0 * PI - 1e-9 {
        return Err(GeodesicError::PositiveCurvature(min_angle));
    }
    let bound = Bound::new(opts.l_max, true);
    let budget = Budget::new(opts.budget);
    let paths = run(s, &bound, &budget);
    if budget.exhausted() {
        return Err(GeodesicError::BudgetExhausted(budget.limit()));
    }
    let path = paths.into_iter().next().ok_or(GeodesicError::NoneFound(opts.l_max))?;
    Ok(Systole { length: path.length, path, nodes: budget.used() })
}

// ---------------------------------------------------------------------------
// Checks and classification.

/// Checks that consecutive pieces match across gluings to 1e−10, continue
/// straight across edges, turn by at least π on both sides at vertices and
/// add up to the recorded length.
pub fn verify_local_geodesic(s: &ConeSurface, p: &GeodesicPath) -> Result<(), String> {
    let n = p.segments.len();
    if n == 0 {
        return Err("empty path".into());
    }
    let sum = p.segment_length_sum();
    if (sum - p.length).abs() > 1e-9 * p.length.max(1.0) {
        return Err(format!("length {} differs from segment sum {}", p.length, sum));
    }
    let last = if p.closed { n } else { n - 1 };
    for i in 0..last {
        let a = &p.segments[i];
        let b = &p.segments[(i + 1) % n];
        let da = sub(a.exit, a.entry);
        let db = sub(b.exit, b.entry);
        match a.exit_slot {
            Some(k) => {
                let (f2, _, m, _) = develop(s, a.face, &Isometry::identity(), k).ok_or("exit through boundary")?;
                if f2 != b.face {
                    return Err(format!("segment {i} exits into face {f2}, next is in {}", b.face));
                }
                let gap = norm(sub(m.apply(b.entry), a.exit));
                if gap > 1e-10 {
                    return Err(format!("gluing mismatch {gap:e} after segment {i}"));
                }
                let db_here = m.apply_vec(db);
                let turn = cross(da, db_here) / (norm(da) * norm(db_here));
                if turn.abs() > 1e-9 || dot(da, db_here) <= 0.0 {
                    return Err(format!("path bends across the edge after segment {i}"));
                }
            }
            None => {
                let inc = p
                    .incidences
                    .iter()
                    .find(|x| x.after_segment == i)
                    .ok_or(format!("segment {i} ends at a vertex without incidence"))?;
                let corner_a = (0..3)
                    .find(|&c| norm(sub(s.face_corners(a.face)[c], a.exit)) < 1e-10)
                    .ok_or(format!("segment {i} does not end at a corner"))?;
                let corner_b = (0..3)
                    .find(|&c| norm(sub(s.face_corners(b.face)[c], b.entry)) < 1e-10)
                    .ok_or(format!("segment {} does not start at a corner", i + 1))?;
                let v = s.corner_vertex(a.face, corner_a);
                if v != inc.vertex || s.corner_vertex(b.face, corner_b) != v {
                    return Err(format!("vertex mismatch at incidence after segment {i}"));
                }
                let theta = s.vertices()[v].angle;
                let ain = link_angle(s, a.face, corner_a, scale(da, -1.0));
                let aout = link_angle(s, b.face, corner_b, db);
                let delta = (aout - ain).rem_euclid(theta);
                if delta < PI - JOINT_EPS || theta - delta < PI - JOINT_EPS {
                    return Err(format!("side angles ({delta}, {}) at vertex {v} below π", theta - delta));
                }
                let (x, y) = inc.side_angles;
                if x.min(y) < PI - JOINT_EPS || (x + y - theta).abs() > 1e-9 {
                    return Err(format!("recorded side angles ({x}, {y}) invalid at vertex {v}"));
                }
            }
        }
    }
    Ok(())
}

/// Assigns a closed geodesic of the extremal surface to one of the three
/// systolic families.
pub fn classify_family(s: &ConeSurface, p: &GeodesicPath) -> Family {
    if p.kind == GeodesicKind::Soul && p.segments.iter().all(|g| s.face_tag(g.face) == FaceTag::Band) {
        return Family::MobiusSoul;
    }
    let mut found = [false; 2];
    for g in &p.segments {
        let Some(k) = g.exit_slot else { continue };
        let c = s.face_corners(g.face);
        let e = sub(c[(k + 1) % 3], c[k]);
        let d = sub(g.exit, g.entry);
        let cos = dot(e, d) / (norm(e) * norm(d));
        if cos.abs() > 1e-6 {
            continue;
        }
        match s.edge_role(g.face, k) {
            EdgeRole::ShortBase => found[0] = true,
            EdgeRole::Leg => found[1] = true,
            _ => {}
        }
    }
    if found[0] {
        Family::ShortBaseOrthogonal
    } else if found[1] {
        Family::LegOrthogonal
    } else {
        Family::Other
    }
}
