use crate::surface::ConeSurface;

pub type V2 = [f64; 2];

pub fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn scale(a: V2, s: f64) -> V2 {
    [a[0] * s, a[1] * s]
}

pub fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn cross(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn norm(a: V2) -> f64 {
    a[0].hypot(a[1])
}

/// Left normal.
pub fn rot90(a: V2) -> V2 {
    [-a[1], a[0]]
}

/// Counterclockwise angle from `a` to `b` in `(−π, π]`.
pub fn angle_from(a: V2, b: V2) -> f64 {
    cross(a, b).atan2(dot(a, b))
}

/// Distance from `p` to the segment `ab`.
pub fn point_segment_distance(p: V2, a: V2, b: V2) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    let t = if l2 > 0.0 { (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    norm(sub(p, add(a, scale(ab, t))))
}

/// Distance between segments `ab` and `cd`.
pub fn segment_distance(a: V2, b: V2, c: V2, d: V2) -> f64 {
    let o1 = cross(sub(b, a), sub(c, a));
    let o2 = cross(sub(b, a), sub(d, a));
    let o3 = cross(sub(d, c), sub(a, c));
    let o4 = cross(sub(d, c), sub(b, c));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Plane isometry `x ↦ A x + t` with `A` orthogonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub a: [[f64; 2]; 2],
    pub t: V2,
}

impl Isometry {
    pub fn identity() -> Self {
        Self { a: [[1.0, 0.0], [0.0, 1.0]], t: [0.0, 0.0] }
    }

    pub fn apply(&self, x: V2) -> V2 {
        add(self.apply_vec(x), self.t)
    }

    pub fn apply_vec(&self, v: V2) -> V2 {
        [self.a[0][0] * v[0] + self.a[0][1] * v[1], self.a[1][0] * v[0] + self.a[1][1] * v[1]]
    }

    /// Applies the transpose of the linear part.
    pub fn apply_vec_inv(&self, v: V2) -> V2 {
        [self.a[0][0] * v[0] + self.a[1][0] * v[1], self.a[0][1] * v[0] + self.a[1][1] * v[1]]
    }

    pub fn apply_inv(&self, x: V2) -> V2 {
        self.apply_vec_inv(sub(x, self.t))
    }

    pub fn det(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    pub fn inverse(&self) -> Self {
        let a = [[self.a[0][0], self.a[1][0]], [self.a[0][1], self.a[1][1]]];
        let m = Self { a, t: [0.0, 0.0] };
        let t = m.apply_vec(self.t);
        Self { a, t: [-t[0], -t[1]] }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let c0 = self.apply_vec([other.a[0][0], other.a[1][0]]);
        let c1 = self.apply_vec([other.a[0][1], other.a[1][1]]);
        Self { a: [[c0[0], c1[0]], [c0[1], c1[1]]], t: self.apply(other.t) }
    }

    /// The isometry sending `u0 ↦ p`, `u1 ↦ q`, with `u2` landing on the side
    /// of the line `pq` given by the sign of `side`.
    pub fn fit(u0: V2, u1: V2, u2: V2, p: V2, q: V2, side: f64) -> Self {
        let d = sub(u1, u0);
        let e = sub(q, p);
        let l2 = dot(d, d);
        let (c, s) = (dot(d, e) / l2, cross(d, e) / l2);
        let rot = [[c, -s], [s, c]];
        let dr = [d[0], -d[1]];
        let (c2, s2) = (dot(dr, e) / l2, cross(dr, e) / l2);
        let refl = [[c2, s2], [s2, -c2]];
        let mut best = Self::identity();
        let mut best_score = f64::NEG_INFINITY;
        for a in [rot, refl] {
            let mut m = Self { a, t: [0.0, 0.0] };
            m.t = sub(p, m.apply_vec(u0));
            let score = side.signum() * cross(e, sub(m.apply(u2), p));
            if score > best_score {
                best_score = score;
                best = m;
            }
        }
        best
    }
}

/// Slot joining corners `i` and `j`.
pub fn slot_between(i: usize, j: usize) -> usize {
    if j == (i + 1) % 3 {
        i
    } else {
        j
    }
}

/// Face across slot `k` of face `f` placed by `m`: returns the neighbour,
/// its slot, its placement and the corners of the neighbour matching corners
/// `k` and `k + 1` of `f`.
pub fn develop(s: &ConeSurface, f: usize, m: &Isometry, k: usize) -> Option<(usize, usize, Isometry, [usize; 2])> {
    let (f2, k2, r) = s.partner(f, k)?;
    let (ca, cb) = if r { (k2, (k2 + 1) % 3) } else { ((k2 + 1) % 3, k2) };
    let p = s.face_corners(f);
    let q = s.face_corners(f2);
    let (pa, pb, pc) = (m.apply(p[k]), m.apply(p[(k + 1) % 3]), m.apply(p[(k + 2) % 3]));
    let side = -cross(sub(pb, pa), sub(pc, pa));
    let m2 = Isometry::fit(q[ca], q[cb], q[3 - ca - cb], pa, pb, side);
    Some((f2, k2, m2, [ca, cb]))
}

/// Parameter interval of the line `x0 + s·d` inside a triangle.
pub fn clip_line_to_triangle(x0: V2, d: V2, tri: &[V2; 3]) -> Option<(f64, f64)> {
    let orient = cross(sub(tri[1], tri[0]), sub(tri[2], tri[0])).signum();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..3 {
        let a = tri[k];
        let e = sub(tri[(k + 1) % 3], a);
        // Inside: orient · cross(e, x − a) ≥ 0.
        let c0 = orient * cross(e, sub(x0, a));
        let c1 = orient * cross(e, d);
        if c1.abs() <= 1e-12 * norm(e) * norm(d) {
            if c0 < -1e-12 * norm(e) {
                return None;
            }
            continue;
        }
        let s = -c0 / c1;
        if c1 > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
    }
    (lo <= hi + 1e-12).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_matches_points_and_side() {
        let u = [[0.0, 0.0], [1.0, 0.0], [0.3, 0.7]];
        let (p, q) = ([2.0, 1.0], [2.0, 2.0]);
        for side in [1.0, -1.0] {
            let m = Isometry::fit(u[0], u[1], u[2], p, q, side);
            assert!(norm(sub(m.apply(u[0]), p)) < 1e-14);
            assert!(norm(sub(m.apply(u[1]), q)) < 1e-14);
            assert!(side * cross(sub(q, p), sub(m.apply(u[2]), p)) > 0.0);
            let c = m.compose(&m.inverse());
            assert!(norm(sub(c.apply([0.4, -2.0]), [0.4, -2.0])) < 1e-14);
        }
    }

    #[test]
    fn segment_distances() {
        assert_eq!(segment_distance([0.0, 0.0], [1.0, 0.0], [0.5, -1.0], [0.5, 1.0]), 0.0);
        assert!((segment_distance([0.0, 0.0], [1.0, 0.0], [2.0, 1.0], [3.0, 1.0]) - 2f64.sqrt()).abs() < 1e-15);
    }
}
