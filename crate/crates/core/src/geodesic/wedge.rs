use super::plane::{cross, develop, norm, point_segment_distance, slot_between, sub, Isometry, V2};
use crate::surface::ConeSurface;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

/// Node counter shared by parallel explorations.
pub struct Budget {
    used: AtomicUsize,
    limit: usize,
    hit: AtomicBool,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Self { used: AtomicUsize::new(0), limit, hit: AtomicBool::new(false) }
    }

    pub fn tick(&self) -> bool {
        if self.used.fetch_add(1, Ordering::Relaxed) < self.limit {
            true
        } else {
            self.hit.store(true, Ordering::Relaxed);
            false
        }
    }

    pub fn exhausted(&self) -> bool {
        self.hit.load(Ordering::Relaxed)
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::Relaxed).min(self.limit)
    }

    pub fn limit(&self) -> usize {
        self.limit
    }
}

/// Length bound that can only decrease.
pub struct Bound {
    bits: AtomicU64,
    tighten: bool,
}

impl Bound {
    pub fn new(v: f64, tighten: bool) -> Self {
        Self { bits: AtomicU64::new(v.to_bits()), tighten }
    }

    pub fn get(&self) -> f64 {
        f64::from_bits(self.bits.load(Ordering::Relaxed))
    }

    pub fn offer(&self, v: f64) {
        if self.tighten && v >= 0.0 {
            self.bits.fetch_min(v.to_bits(), Ordering::Relaxed);
        }
    }
}

/// One face of a developed corridor.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub face: usize,
    pub map: Isometry,
    /// Slot through which the face was entered.
    pub entered: Option<usize>,
}

pub trait WedgeVisitor {
    /// A face reached by the rays of the wedge `(r, l)` from the origin.
    fn face(&mut self, _path: &[Step], _r: V2, _l: V2) {}
    /// A vertex visible from the origin, as a corner of the last face.
    fn apex(&mut self, _path: &[Step], _corner: usize, _x: V2) {}
}

/// Explores straight rays from `origin` inside the wedge `(r, l)` that leave
/// the last face of `path` through slot `k_out`.
pub fn explore(
    s: &ConeSurface,
    origin: V2,
    path: &mut Vec<Step>,
    k_out: usize,
    r: V2,
    l: V2,
    bound: &Bound,
    budget: &Budget,
    visitor: &mut dyn WedgeVisitor,
) {
    if cross(r, l) <= 1e-13 * norm(r) * norm(l) || !budget.tick() {
        return;
    }
    let last = *path.last().expect("nonempty path");
    let p = s.face_corners(last.face);
    let (pa, pb) = (last.map.apply(p[k_out]), last.map.apply(p[(k_out + 1) % 3]));
    if point_segment_distance(origin, pa, pb) > bound.get() {
        return;
    }
    let Some((f2, k2, m2, [ca, cb])) = develop(s, last.face, &last.map, k_out) else {
        return;
    };
    let (rc, lc) = if cross(sub(pa, origin), sub(pb, origin)) > 0.0 { (ca, cb) } else { (cb, ca) };
    let cx = 3 - ca - cb;
    let q = s.face_corners(f2);
    let x = m2.apply(q[cx]);
    let v = sub(x, origin);
    let nv = norm(v);
    let cr = cross(r, v) / (norm(r) * nv);
    let cl = cross(v, l) / (norm(l) * nv);
    path.push(Step { face: f2, map: m2, entered: Some(k2) });
    visitor.face(path, r, l);
    let eps = 1e-12;
    if cr > eps && cl > eps {
        if nv <= bound.get() {
            visitor.apex(path, cx, x);
        }
        explore(s, origin, path, slot_between(rc, cx), r, v, bound, budget, visitor);
        explore(s, origin, path, slot_between(cx, lc), v, l, bound, budget, visitor);
    } else if cr <= eps {
        explore(s, origin, path, slot_between(cx, lc), r, l, bound, budget, visitor);
    } else {
        explore(s, origin, path, slot_between(rc, cx), r, l, bound, budget, visitor);
    }
    path.pop();
}
