use super::closed::link_angle;
use super::plane::{add, cross, dot, norm, scale, sub, Isometry, V2};
use super::wedge::{explore, Bound, Budget, Step, WedgeVisitor};
use super::distance::{point_distance, SurfacePoint};
use super::{GeodesicError, DEFAULT_BUDGET};
use crate::surface::{ConeSurface, FaceTag};
use serde::Serialize;

/// Half-plane constraint `⟨x, u⟩ ≤ d/2` with `u` at angle `angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CenterDistance {
    pub distance: f64,
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonPolygon {
    /// Counterclockwise vertices; empty when unbounded.
    pub vertices: Vec<V2>,
    /// Shoelace area, infinite when unbounded.
    pub area: f64,
    pub bounded: bool,
}

fn clip(poly: &[V2], u: V2, c: f64) -> Vec<V2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fa, fb) = (dot(a, u) - c, dot(b, u) - c);
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0) != (fb < 0.0) && fa != fb {
            out.push(add(a, scale(sub(b, a), fa / (fa - fb))));
        }
    }
    out
}

fn shoelace(p: &[V2]) -> f64 {
    0.5 * (0..p.len()).map(|i| cross(p[i], p[(i + 1) % p.len()])).sum::<f64>()
}

/// Intersection of the half-planes `⟨x, u_i⟩ ≤ d_i / 2`.
pub fn comparison_polygon(constraints: &[CenterDistance]) -> Result<ComparisonPolygon, GeodesicError> {
    if constraints.len() < 2 {
        return Err(GeodesicError::BadInput("at least two constraints are needed".into()));
    }
    if constraints.iter().any(|c| !(c.distance > 0.0 && c.distance.is_finite() && c.angle.is_finite())) {
        return Err(GeodesicError::BadInput("distances must be positive and finite".into()));
    }
    let dmax = constraints.iter().map(|c| c.distance).fold(0.0, f64::max);
    let clip_all = |far: f64| {
        let mut poly = vec![[-far, -far], [far, -far], [far, far], [-far, far]];
        for c in constraints {
            poly = clip(&poly, [c.angle.cos(), c.angle.sin()], c.distance / 2.0);
        }
        poly
    };
    let far = 1e6 * dmax;
    let poly = clip_all(far);
    let extent = poly.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
    if poly.is_empty() || extent >= 0.5 * far {
        return Ok(ComparisonPolygon { vertices: Vec::new(), area: f64::INFINITY, bounded: false });
    }
    // Clip again from a box of the polygon's own size for full precision.
    let poly = clip_all(2.0 * extent + dmax);
    let mut vertices: Vec<V2> = Vec::with_capacity(poly.len());
    for p in poly {
        if vertices.last().map_or(true, |q| norm(sub(p, *q)) > 1e-12 * dmax) {
            vertices.push(p);
        }
    }
    if vertices.len() > 1 && norm(sub(vertices[0], *vertices.last().unwrap())) <= 1e-12 * dmax {
        vertices.pop();
    }
    let area = shoelace(&vertices);
    Ok(ComparisonPolygon { vertices, area, bounded: true })
}

/// Constraints of the hexagon made of two trapezoids with base angle `alpha`,
/// height `h` and short side `short`, glued along their long sides, seen
/// from the midpoint of the common side.
pub fn hexagon_constraints(alpha: f64, h: f64, short: f64) -> Vec<CenterDistance> {
    let leg = (short / 2.0) * alpha.sin() + h * alpha.cos();
    let a = std::f64::consts::FRAC_PI_2 - alpha;
    let mut out = vec![
        CenterDistance { distance: 2.0 * h, angle: std::f64::consts::FRAC_PI_2 },
        CenterDistance { distance: 2.0 * h, angle: -std::f64::consts::FRAC_PI_2 },
    ];
    for angle in [a, -a, std::f64::consts::PI - a, a - std::f64::consts::PI] {
        out.push(CenterDistance { distance: 2.0 * leg, angle });
    }
    out
}

struct Collector<'a> {
    s: &'a ConeSurface,
    centers: &'a [usize],
    /// Distance from each cone point to the nearest centre.
    relay: &'a [f64],
    f0: usize,
    c0: usize,
    origin: V2,
    out: Vec<CenterDistance>,
}

impl Collector<'_> {
    fn push(&mut self, v: V2, d: f64) {
        let angle = link_angle(self.s, self.f0, self.c0, v);
        self.out.push(CenterDistance { distance: d, angle });
    }

    /// Feet of perpendiculars on edges between a kept face and a band face.
    fn band_edges(&mut self, f: usize, map: &Isometry, wedge: Option<(V2, V2)>) {
        if self.s.face_tag(f) == FaceTag::Band {
            return;
        }
        let p = self.s.face_corners(f);
        for k in 0..3 {
            let Some((g, _, _)) = self.s.partner(f, k) else { continue };
            if self.s.face_tag(g) != FaceTag::Band {
                continue;
            }
            let (a, b) = (map.apply(p[k]), map.apply(p[(k + 1) % 3]));
            let e = sub(b, a);
            let t = dot(sub(self.origin, a), e) / dot(e, e);
            if !(0.0..=1.0).contains(&t) {
                continue;
            }
            let foot = add(a, scale(e, t));
            let v = sub(foot, self.origin);
            let inside = wedge.map_or(true, |(r, l)| cross(r, v) >= -1e-12 * norm(v) && cross(v, l) >= -1e-12 * norm(v));
            if inside && norm(v) > 1e-12 {
                self.push(v, 2.0 * norm(v));
            }
        }
    }
}

impl WedgeVisitor for Collector<'_> {
    fn face(&mut self, path: &[Step], r: V2, l: V2) {
        let last = *path.last().unwrap();
        self.band_edges(last.face, &last.map, Some((r, l)));
    }

    fn apex(&mut self, path: &[Step], corner: usize, x: V2) {
        let last = path.last().unwrap();
        let w = self.s.corner_vertex(last.face, corner);
        let v = sub(x, self.origin);
        if self.centers.contains(&w) {
            self.push(v, norm(v));
        } else if self.relay[w].is_finite() {
            self.push(v, norm(v) + self.relay[w]);
        }
    }
}

/// Comparison constraints of a smooth centre vertex, as directions around
/// the centre: straight segments of length at most `l_max` to centres
/// (including other lifts of itself), straight segments to cone points
/// extended by the distance from the cone point to the nearest centre, and
/// perpendiculars to the boundary of the band region.
pub fn voronoi_constraints(
    s: &ConeSurface,
    center: usize,
    centers: &[usize],
    l_max: f64,
) -> Result<Vec<CenterDistance>, GeodesicError> {
    let vert = s.vertices().get(center).ok_or_else(|| GeodesicError::BadInput(format!("vertex {center}")))?;
    if (vert.angle - 2.0 * std::f64::consts::PI).abs() > 1e-9 || vert.boundary {
        return Err(GeodesicError::BadInput(format!("centre {center} is not a smooth interior vertex")));
    }
    let mut relay = vec![f64::INFINITY; s.vertices().len()];
    for (w, vx) in s.vertices().iter().enumerate() {
        if vx.angle > 2.0 * std::f64::consts::PI + 1e-9 && !centers.contains(&w) {
            for &c in centers {
                let d = point_distance(s, &SurfacePoint::vertex(s, w), &SurfacePoint::vertex(s, c), l_max)?;
                relay[w] = relay[w].min(d.unwrap_or(f64::INFINITY));
            }
        }
    }
    let bound = Bound::new(l_max, false);
    let budget = Budget::new(DEFAULT_BUDGET);
    let mut out = Vec::new();
    for &(f0, c0) in &vert.corners {
        let p = s.face_corners(f0);
        let origin = p[c0];
        let mut col = Collector { s, centers, relay: &relay, f0, c0, origin, out: Vec::new() };
        for to in [(c0 + 1) % 3, (c0 + 2) % 3] {
            let v = sub(p[to], origin);
            let w = s.corner_vertex(f0, to);
            if centers.contains(&w) && norm(v) <= l_max {
                col.push(v, norm(v));
            } else if relay[w].is_finite() {
                col.push(v, norm(v) + relay[w]);
            }
        }
        col.band_edges(f0, &Isometry::identity(), None);
        let mut path = vec![Step { face: f0, map: Isometry::identity(), entered: None }];
        let (r, l) = (sub(p[(c0 + 1) % 3], origin), sub(p[(c0 + 2) % 3], origin));
        explore(s, origin, &mut path, (c0 + 1) % 3, r, l, &bound, &budget, &mut col);
        out.extend(col.out);
    }
    if budget.exhausted() {
        return Err(GeodesicError::BudgetExhausted(budget.limit()));
    }
    out.sort_by(|a, b| a.angle.total_cmp(&b.angle).then(a.distance.total_cmp(&b.distance)));
    out.dedup_by(|a, b| (a.angle - b.angle).abs() < 1e-9 && (a.distance - b.distance).abs() < 1e-9);
    Ok(out)
}
