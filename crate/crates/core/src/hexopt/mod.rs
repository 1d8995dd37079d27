//! Hexagon area bound and its minimization, the band/hexagon area tradeoff
//! and the lower bounds for alternative decompositions.

use crate::constants::{h_squared_exact, SurfaceParameters};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Angles at or below this are excluded from the feasible simplex.
pub const DEGENERATE_ANGLE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum HexoptError {
    #[error("apex angle {0} is outside (0, π)")]
    BadAngle(f64),
    #[error("apex angles sum to {0}, not π")]
    AngleSum(f64),
    #[error("apex distance {0} is not positive")]
    BadDistance(f64),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("height {0} is outside [0, 1/2]")]
    OutOfDomain(f64),
}

/// Distances from the centre to the three apex directions and the angles
/// between consecutive sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HexagonSpec {
    pub d: [f64; 3],
    pub alpha: [f64; 3],
}

impl HexagonSpec {
    pub fn new(d: [f64; 3], alpha: [f64; 3]) -> Result<Self, HexoptError> {
        if let Some(&x) = d.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(HexoptError::BadDistance(x));
        }
        if let Some(&a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(HexoptError::BadAngle(a));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - PI).abs() > 1e-12 {
            return Err(HexoptError::AngleSum(sum));
        }
        Ok(Self { d, alpha })
    }
}

fn bound_terms(d: &[f64; 3], a: &[f64; 3]) -> f64 {
    (0..3).map(|i| 2.0 * d[i] * d[i] * (a[i] / 2.0).tan()).sum()
}

/// `Σ 2 dᵢ² tan(αᵢ/2)`.
pub fn hex_area_bound(spec: &HexagonSpec) -> Result<f64, HexoptError> {
    if let Some(&a) = spec.alpha.iter().find(|a| !(**a > 0.0 && **a < PI)) {
        return Err(HexoptError::BadAngle(a));
    }
    Ok(bound_terms(&spec.d, &spec.alpha))
}

/// Grid resolutions for [`minimize_hex`]; `phase` shifts both grids by a
/// fraction of their step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HexGrid {
    pub coarse: f64,
    pub fine: f64,
    pub phase: f64,
}

impl Default for HexGrid {
    fn default() -> Self {
        Self { coarse: 1e-3, fine: 1e-5, phase: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HexMinimum {
    pub argmin: [f64; 3],
    pub min: f64,
    pub coarse_argmin: [f64; 3],
    pub coarse_min: f64,
    pub grid_argmin: [f64; 3],
    pub grid_min: f64,
    pub evaluations: usize,
    pub degenerate_excluded: usize,
    /// Second differences of `tan(x/2)` are positive along the search.
    pub convexity_verified: bool,
    /// For `d₁ = d₃`: every asymmetric grid candidate is dominated by its
    /// symmetrization.
    pub symmetric_dominates: Option<bool>,
    pub polish: &'static str,
}

#[derive(Clone, Copy, PartialEq)]
struct Cand {
    v: f64,
    i: i64,
    j: i64,
}

fn better(a: Cand, b: Cand) -> Cand {
    let ka = (a.v, a.i, a.j);
    let kb = (b.v, b.i, b.j);
    if ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(ka.2.cmp(&kb.2)).is_le() {
        a
    } else {
        b
    }
}

struct GridScan {
    best: Option<Cand>,
    evaluations: usize,
    excluded: usize,
    jensen_violations: usize,
}

/// Scans `α₁ = o₁ + i·s`, `α₃ = o₃ + j·s` for `i, j` in the given ranges.
fn scan(d: &[f64; 3], o: [f64; 2], s: f64, ni: i64, nj: i64, jensen: bool) -> GridScan {
    let empty = || GridScan { best: None, evaluations: 0, excluded: 0, jensen_violations: 0 };
    (0..ni)
        .into_par_iter()
        .map(|i| {
            let mut acc = empty();
            let a1 = o[0] + i as f64 * s;
            for j in 0..nj {
                let a3 = o[1] + j as f64 * s;
                let a2 = PI - a1 - a3;
                if a1 <= DEGENERATE_ANGLE || a3 <= DEGENERATE_ANGLE || a2 <= DEGENERATE_ANGLE {
                    if a1 > -s && a3 > -s && a2 > -s {
                        acc.excluded += 1;
                    }
                    continue;
                }
                let v = bound_terms(d, &[a1, a2, a3]);
                acc.evaluations += 1;
                if jensen && a1 != a3 {
                    let m = 0.5 * (a1 + a3);
                    if bound_terms(d, &[m, a2, m]) > v {
                        acc.jensen_violations += 1;
                    }
                }
                let c = Cand { v, i, j };
                acc.best = Some(acc.best.map_or(c, |b| better(b, c)));
            }
            acc
        })
        .reduce(empty, |a, b| GridScan {
            best: match (a.best, b.best) {
                (Some(x), Some(y)) => Some(better(x, y)),
                (x, y) => x.or(y),
            },
            evaluations: a.evaluations + b.evaluations,
            excluded: a.excluded + b.excluded,
            jensen_violations: a.jensen_violations + b.jensen_violations,
        })
}

fn tan_half_convex_at(x: f64, step: f64) -> bool {
    let f = |t: f64| (t / 2.0).tan();
    let s = step.min(0.5 * x).min(0.5 * (PI - x));
    s > 0.0 && f(x - s) + f(x + s) - 2.0 * f(x) > 0.0
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    while b - a > tol {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    0.5 * (a + b)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Solves the stationarity conditions `dᵢ² / cos²(αᵢ/2) = λ`, `Σαᵢ = π`.
fn lagrange_polish(d: &[f64; 3]) -> [f64; 3] {
    let angles = |r: f64| d.map(|x| 2.0 * (x / r).min(1.0).acos());
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    let mut hi = dmax * 2.0;
    while angles(hi).iter().sum::<f64>() < PI {
        hi *= 2.0;
    }
    let r = bisect(|r| angles(r).iter().sum::<f64>() - PI, dmax, hi);
    angles(r)
}

/// Global minimum of the hexagon bound over the simplex of apex angles:
/// coarse grid, fine grid around the coarse minimum, then a polish.
pub fn minimize_hex(d: [f64; 3], grid: &HexGrid) -> Result<HexMinimum, HexoptError> {
    if let Some(&x) = d.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(HexoptError::BadDistance(x));
    }
    if !(grid.coarse > 0.0 && grid.fine > 0.0 && grid.fine <= grid.coarse && grid.coarse < 0.5) {
        return Err(HexoptError::BadGrid(format!("coarse {} fine {}", grid.coarse, grid.fine)));
    }
    if !(grid.phase.is_finite() && (0.0..1.0).contains(&grid.phase)) {
        return Err(HexoptError::BadGrid(format!("phase {}", grid.phase)));
    }
    let symmetric = d[0] == d[2];
    let s = grid.coarse;
    let o = grid.phase * s;
    let n = ((PI - o) / s).floor() as i64 + 1;
    let coarse = scan(&d, [o, o], s, n, n, symmetric);
    let cb = coarse.best.ok_or_else(|| HexoptError::BadGrid("no feasible point".into()))?;
    let at = |o: [f64; 2], s: f64, c: Cand| {
        let (a1, a3) = (o[0] + c.i as f64 * s, o[1] + c.j as f64 * s);
        [a1, PI - a1 - a3, a3]
    };
    let coarse_argmin = at([o, o], s, cb);

    let f = grid.fine;
    let w = 2.0 * s;
    let fo = [coarse_argmin[0] - w + grid.phase * f, coarse_argmin[2] - w + grid.phase * f];
    let nf = (2.0 * w / f).round() as i64 + 1;
    let fine = scan(&d, fo, f, nf, nf, symmetric);
    let fb = fine.best.ok_or_else(|| HexoptError::BadGrid("empty fine window".into()))?;
    let grid_argmin = at(fo, f, fb);

    let (argmin, polish) = if symmetric && coarse.jensen_violations + fine.jensen_violations == 0 {
        let g = |a: f64| bound_terms(&d, &[a, PI - 2.0 * a, a]);
        let a = golden_min(g, DEGENERATE_ANGLE, 0.5 * (PI - DEGENERATE_ANGLE), 1e-12);
        ([a, PI - 2.0 * a, a], "symmetric golden section")
    } else {
        (lagrange_polish(&d), "stationarity bisection")
    };
    let mut min = bound_terms(&d, &argmin);
    let (argmin, polish) = if fb.v < min { (grid_argmin, "grid") } else { (argmin, polish) };
    min = min.min(fb.v);

    let mut convex = (1..((PI / s) as i64)).all(|k| tan_half_convex_at(k as f64 * s, f));
    for pt in [coarse_argmin, grid_argmin, argmin] {
        convex &= pt.iter().all(|&x| tan_half_convex_at(x, f));
    }

    Ok(HexMinimum {
        argmin,
        min,
        coarse_argmin,
        coarse_min: cb.v,
        grid_argmin,
        grid_min: fb.v,
        evaluations: coarse.evaluations + fine.evaluations,
        degenerate_excluded: coarse.excluded + fine.excluded,
        convexity_verified: convex,
        symmetric_dominates: symmetric.then_some(coarse.jensen_violations + fine.jensen_violations == 0),
        polish,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Extremum {
    Minimum,
    Maximum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub h: f64,
    pub value: f64,
    /// Outside the open interval `(0, 1/4)`, where the hexagons collapse.
    pub degenerate: bool,
}

/// `A(h) = 2(1/2 − h) + 3h√(1 − 4h²)`.
pub fn tradeoff_area(h: f64) -> Result<TradeoffPoint, HexoptError> {
    if !(0.0..=0.5).contains(&h) {
        return Err(HexoptError::OutOfDomain(h));
    }
    let value = 2.0 * (0.5 - h) + 3.0 * h * (1.0 - 4.0 * h * h).sqrt();
    Ok(TradeoffPoint { h, value, degenerate: h <= 0.0 || h >= 0.25 })
}

fn tradeoff_slope(h: f64) -> f64 {
    let r = (1.0 - 4.0 * h * h).sqrt();
    -2.0 + 3.0 * r - 12.0 * h * h / r
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tradeoff {
    pub h_star: f64,
    /// `h*²`.
    pub u: f64,
    pub area: f64,
    pub kind: Extremum,
    /// Golden-section estimate before the slope bisection.
    pub golden_h: f64,
    /// `|576u² − 128u + 5|`.
    pub certificate_residual: f64,
    /// `(8 − √19)/72`.
    pub exact_u: f64,
    pub u_deviation: f64,
    pub endpoints: [TradeoffPoint; 2],
}

/// The interior extremum of `A` on `(0, 1/4)`.
pub fn optimize_mobius_tradeoff() -> Tradeoff {
    let a = |h: f64| tradeoff_area(h).map(|p| p.value).unwrap_or(f64::NAN);
    let golden_h = golden_min(|h| -a(h), 1e-9, 0.25 - 1e-9, 1e-9);
    let h_star = bisect(tradeoff_slope, 1e-9, 0.25 - 1e-9);
    let u = h_star * h_star;
    let area = a(h_star);
    let endpoints = [tradeoff_area(0.0).unwrap(), tradeoff_area(0.25).unwrap()];
    let kind = if endpoints.iter().all(|e| e.value < area) { Extremum::Maximum } else { Extremum::Minimum };
    let exact_u = h_squared_exact().to_f64();
    Tradeoff {
        h_star,
        u,
        area,
        kind,
        golden_h,
        certificate_residual: (576.0 * u * u - 128.0 * u + 5.0).abs(),
        exact_u,
        u_deviation: (u - exact_u).abs(),
        endpoints,
    }
}

/// Area of a disk of radius `h`.
pub fn lemma_disk(h: f64) -> f64 {
    PI * h * h
}

/// Area of a strip of half-width `h` around a segment of length `x`.
pub fn lemma_strip(h: f64, x: f64) -> f64 {
    2.0 * h * x
}

/// Area of a region bounded by exactly two edges.
pub fn lemma_two_edges(h: f64) -> f64 {
    h
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseBound {
    pub case: u8,
    pub formula: &'static str,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseBounds {
    pub area: f64,
    pub cases: Vec<CaseBound>,
    pub min_margin: f64,
}

/// Area lower bounds of the alternative decompositions and their margins
/// over the extremal area.
pub fn case_bounds(p: &SurfaceParameters) -> CaseBounds {
    let area = p.area();
    let band = 2.0 * p.delta + 2.0 * p.h;
    let mk = |case, formula, bound: f64| CaseBound { case, formula, bound, margin: bound - area };
    let cases = vec![
        mk(1, "2δ + 2h + 2πh²", band + 2.0 * lemma_disk(p.h)),
        mk(2, "2δ + 2h + πh²", band + lemma_disk(p.h)),
        mk(3, "2δ + 2h + πh²", band + lemma_disk(p.h)),
        mk(4, "2δ + 2h + πh²", band + lemma_disk(p.h)),
    ];
    let min_margin = cases.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    CaseBounds { area, cases, min_margin }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HexoptResiduals {
    /// `|min − h√(1 − 4h²)|`.
    pub hexagon_closed_form: f64,
    /// Largest deviation of the argmin from `(θ, π − 2θ, θ)`.
    pub argmin: f64,
    pub stationarity: f64,
    /// `|h* − h|`.
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HexoptCertificate {
    pub case_bounds: CaseBounds,
    pub hexagon: HexMinimum,
    pub tradeoff: Tradeoff,
    pub residuals: HexoptResiduals,
    pub passes: bool,
}

pub fn hexopt_certificate(p: &SurfaceParameters, grid: &HexGrid) -> Result<HexoptCertificate, HexoptError> {
    let hexagon = minimize_hex([0.25, p.h, 0.25], grid)?;
    let tradeoff = optimize_mobius_tradeoff();
    let case_bounds = case_bounds(p);
    let target = [p.theta, PI - 2.0 * p.theta, p.theta];
    let residuals = HexoptResiduals {
        hexagon_closed_form: (hexagon.min - p.h * (1.0 - 4.0 * p.h * p.h).sqrt()).abs(),
        argmin: (0..3).map(|i| (hexagon.argmin[i] - target[i]).abs()).fold(0.0, f64::max),
        stationarity: tradeoff.certificate_residual,
        height: (tradeoff.h_star - p.h).abs(),
    };
    let passes = residuals.hexagon_closed_form <= 1e-8
        && residuals.argmin <= 1e-4
        && residuals.stationarity <= 1e-9
        && residuals.height <= 1e-8
        && hexagon.convexity_verified
        && case_bounds.min_margin >= 0.006;
    Ok(HexoptCertificate { case_bounds, hexagon, tradeoff, residuals, passes })
}
