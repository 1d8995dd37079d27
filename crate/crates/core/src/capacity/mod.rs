//! Conformal capacity of the flat and hyperbolic collars: the flat
//! test-function upper bound, the Fermi-coordinate lower bound and a
//! piecewise-linear finite-element solver.

mod fem;
mod quad;

pub use fem::{fem_capacity, fem_hyperbolic, fem_refinement, fem_round_annulus};

use crate::constants::{named_constant, SurfaceParameters};
use crate::geodesic::{sublevel_area_richardson, SublevelArea};
use crate::surface::build_collar_flat;
use serde::Serialize;
use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// The separating value between the two collar capacities.
pub const SEPARATION: f64 = 2.29;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("cosh(t)·tanh(ℓ/4) = {arg} is not below 1 (t = {t}, ℓ = {ell})")]
    Domain { t: f64, ell: f64, arg: f64 },
    #[error("bad profile: {0}")]
    BadProfile(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("not an annulus: {0}")]
    NotAnnulus(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("quadrature schemes disagree: {0} vs {1}")]
    Disagreement(f64, f64),
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("{0}")]
    Surface(String),
}

/// `H(s) = 2 arctan(eˢ)`.
pub fn gudermann(s: f64) -> f64 {
    2.0 * s.exp().atan()
}

/// `arctanh(cosh(t)·tanh(ℓ/4))`.
pub fn fermi_half_width(t: f64, ell: f64) -> Result<f64, CapacityError> {
    let arg = t.cosh() * (ell / 4.0).tanh();
    if !(arg.abs() < 1.0) {
        return Err(CapacityError::Domain { t, ell, arg });
    }
    Ok(arg.atanh())
}

#[derive(Clone)]
enum Shape {
    Hyperbolic,
    Constant(f64, f64),
    Custom(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

/// Half-widths `b(t) < 0 < a(t)` of a collar around a closed geodesic of
/// length `ell`, in Fermi coordinates.
#[derive(Clone)]
pub struct CollarProfile {
    pub ell: f64,
    /// Length `L` of an interval `[0, L]` from which the profile on
    /// `[0, ℓ)` is obtained by even reflection about multiples of `L`.
    pub fundamental: Option<f64>,
    shape: Shape,
}

impl fmt::Debug for CollarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shape = match &self.shape {
            Shape::Hyperbolic => "hyperbolic".to_string(),
            Shape::Constant(a, b) => format!("constant({a}, {b})"),
            Shape::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("CollarProfile")
            .field("ell", &self.ell)
            .field("fundamental", &self.fundamental)
            .field("shape", &shape)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileSample {
    pub t: f64,
    pub a: f64,
    pub b: f64,
}

fn check_ell(ell: f64) -> Result<(), CapacityError> {
    if ell > 0.0 && ell.is_finite() {
        Ok(())
    } else {
        Err(CapacityError::BadProfile(format!("length {ell}")))
    }
}

impl CollarProfile {
    /// `a(t) = −b(t) = arctanh(cosh t · tanh(ℓ/4))` on `[0, ℓ/12]`, even
    /// about `ℓ/12` and `ℓ/6`-periodic.
    pub fn hyperbolic(ell: f64) -> Result<Self, CapacityError> {
        check_ell(ell)?;
        fermi_half_width(ell / 12.0, ell)?;
        Ok(Self { ell, fundamental: Some(ell / 12.0), shape: Shape::Hyperbolic })
    }

    pub fn constant(ell: f64, a: f64, b: f64) -> Result<Self, CapacityError> {
        check_ell(ell)?;
        if !(a > 0.0 && b < 0.0) {
            return Err(CapacityError::BadProfile(format!("need b < 0 < a, got a = {a}, b = {b}")));
        }
        Ok(Self { ell, fundamental: None, shape: Shape::Constant(a, b) })
    }

    /// A profile given by `t ↦ (a(t), b(t))` on `[0, ℓ)`; the sign
    /// conditions are checked on evaluation.
    pub fn custom(ell: f64, f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Result<Self, CapacityError> {
        check_ell(ell)?;
        Ok(Self { ell, fundamental: None, shape: Shape::Custom(Arc::new(f)) })
    }

    /// Declares the profile even about multiples of `l`, with `ℓ / l` an
    /// even integer.
    pub fn with_fundamental(mut self, l: f64) -> Result<Self, CapacityError> {
        let k = self.ell / l;
        if !(l > 0.0) || (k - k.round()).abs() > 1e-9 || k.round() as i64 % 2 != 0 {
            return Err(CapacityError::BadProfile(format!("ℓ / {l} is not an even integer")));
        }
        self.fundamental = Some(l);
        Ok(self)
    }

    /// `(a(t), b(t))` for any real `t`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64), CapacityError> {
        if !t.is_finite() {
            return Err(CapacityError::BadProfile(format!("t = {t}")));
        }
        let t = t.rem_euclid(self.ell);
        let (a, b) = match &self.shape {
            Shape::Hyperbolic => {
                let period = self.ell / 6.0;
                let r = t.rem_euclid(period);
                let r = if r > period / 2.0 { period - r } else { r };
                let a = fermi_half_width(r, self.ell)?;
                (a, -a)
            }
            Shape::Constant(a, b) => (*a, *b),
            Shape::Custom(f) => f(t),
        };
        if !(a > 0.0 && b < 0.0 && a.is_finite() && b.is_finite()) {
            return Err(CapacityError::BadProfile(format!("a({t}) = {a}, b({t}) = {b}")));
        }
        Ok((a, b))
    }

    /// Values on the uniform grid `t_k = kℓ/n`, `k < n`.
    pub fn sample(&self, n: usize) -> Result<Vec<ProfileSample>, CapacityError> {
        (0..n)
            .map(|k| {
                let t = self.ell * k as f64 / n as f64;
                self.eval(t).map(|(a, b)| ProfileSample { t, a, b })
            })
            .collect()
    }
}

/// Profile of the hyperbolic collar with `ℓ = 2 arccosh((5 + √17)/2)`
/// evaluated to `digits` significant digits.
pub fn build_collar_hyperbolic_profile(digits: usize) -> Result<CollarProfile, CapacityError> {
    let ell = named_constant("ell", digits.max(1))
        .map_err(|e| CapacityError::BadInput(e.to_string()))?
        .value();
    CollarProfile::hyperbolic(ell)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    UpperClosedForm,
    UpperMesh,
    LowerMuetzel,
    FemRayleigh,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub kind: EstimateKind,
    pub value: f64,
    pub error_estimate: f64,
    pub method: String,
    /// Value of an independent computation of the same quantity.
    pub cross_check: Option<f64>,
}

/// `∫₀^ℓ dt / (H(a(t)) − H(b(t)))`, by adaptive Gauss–Kronrod with a
/// Romberg check, over one fundamental interval when the profile has one.
pub fn muetzel_bound(p: &CollarProfile, tol: f64) -> Result<CapacityEstimate, CapacityError> {
    if !(tol > 0.0) {
        return Err(CapacityError::BadInput(format!("tolerance {tol}")));
    }
    let (len, copies) = match p.fundamental {
        Some(l) => (l, (p.ell / l).round()),
        None => (p.ell, 1.0),
    };
    let failure: RefCell<Option<CapacityError>> = RefCell::new(None);
    let f = |t: f64| match p.eval(t) {
        Ok((a, b)) => 1.0 / (gudermann(a) - gudermann(b)),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let local_tol = tol / copies;
    let gk = quad::gauss_kronrod(&f, 0.0, len, local_tol);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let (gk_value, gk_err, pieces) = gk?;
    let (romberg, levels) = quad::romberg(&f, 0.0, len, local_tol)?;
    let (value, check) = (copies * gk_value, copies * romberg);
    if (value - check).abs() > 2.0 * tol {
        return Err(CapacityError::Disagreement(value, check));
    }
    Ok(CapacityEstimate {
        kind: EstimateKind::LowerMuetzel,
        value,
        error_estimate: copies * gk_err,
        method: format!(
            "{copies} × adaptive Gauss–Kronrod 7/15 on [0, {len}] ({pieces} intervals), Romberg check ({levels} levels), tol {tol:e}"
        ),
        cross_check: Some(check),
    })
}

/// Area `[tan(θ/2) − θ/2] h²` of one of the twelve quadrilaterals missing
/// from the half-width sublevel set near the cone points.
pub fn quadrilateral_correction(p: &SurfaceParameters) -> f64 {
    ((p.theta / 2.0).tan() - p.theta / 2.0) * p.h * p.h
}

/// `2·area − 12[tan(θ/2) − θ/2]h²`, the energy of the distance-to-soul
/// test function.
pub fn flat_capacity_upper(p: &SurfaceParameters) -> CapacityEstimate {
    let value = 2.0 * p.area() - 12.0 * quadrilateral_correction(p);
    CapacityEstimate {
        kind: EstimateKind::UpperClosedForm,
        value,
        error_estimate: 4.0 * f64::EPSILON * value,
        method: "closed form 2·area − 12[tan(θ/2) − θ/2]h²".into(),
        cross_check: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshCheck {
    pub closed_form: f64,
    pub mesh: CapacityEstimate,
    pub sublevel: SublevelArea,
    pub deviation: f64,
    pub agrees: bool,
    pub warning: Option<String>,
}

/// Area of `{x : d(x, soul) ≤ 1/2}` on the flat collar by a distance field
/// with Richardson extrapolation, compared with the closed form within 1e-3.
pub fn flat_capacity_mesh_check(p: &SurfaceParameters, mesh_h: f64) -> Result<MeshCheck, CapacityError> {
    if !(mesh_h > 0.0 && mesh_h.is_finite()) {
        return Err(CapacityError::BadInput(format!("mesh size {mesh_h}")));
    }
    let collar = build_collar_flat(p).map_err(|e| CapacityError::Surface(e.to_string()))?;
    let soul = collar.marks().soul.clone();
    let sublevel = sublevel_area_richardson(&collar, &soul, 0.5, mesh_h);
    let closed_form = flat_capacity_upper(p).value;
    let deviation = (sublevel.area - closed_form).abs();
    let agrees = deviation <= 1e-3;
    let warning = (!agrees).then(|| format!("mesh value {} differs from closed form {closed_form} by {deviation}", sublevel.area));
    let mesh = CapacityEstimate {
        kind: EstimateKind::UpperMesh,
        value: sublevel.area,
        error_estimate: sublevel.error_estimate,
        method: format!("sublevel area at mesh {mesh_h} and {}, Richardson", mesh_h / 2.0),
        cross_check: Some(closed_form),
    };
    Ok(MeshCheck { closed_form, mesh, sublevel, deviation, agrees, warning })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationCertificate {
    pub threshold: f64,
    pub tol: f64,
    pub ell: f64,
    pub upper: CapacityEstimate,
    pub lower: CapacityEstimate,
    pub upper_margin: f64,
    pub lower_margin: f64,
    pub fem_flat: Option<CapacityEstimate>,
    pub fem_hyp: Option<CapacityEstimate>,
    pub certified: bool,
    pub failures: Vec<String>,
}

/// `upper(A≤0) < 2.29 < lower(A−1)`, both margins exceeding `tol`, with
/// optional finite-element values at mesh size `fem_mesh`.
pub fn separation_certificate(
    p: &SurfaceParameters,
    tol: f64,
    fem_mesh: Option<f64>,
) -> Result<SeparationCertificate, CapacityError> {
    let upper = flat_capacity_upper(p);
    let profile = CollarProfile::hyperbolic(p.ell)?;
    let lower = muetzel_bound(&profile, tol.min(1e-6))?;
    let upper_margin = SEPARATION - upper.value;
    let lower_margin = lower.value - SEPARATION;
    let mut failures = Vec::new();
    if upper_margin <= tol {
        failures.push(format!("upper bound {} is not below {SEPARATION} by more than {tol}", upper.value));
    }
    if lower_margin <= tol {
        failures.push(format!("lower bound {} is not above {SEPARATION} by more than {tol}", lower.value));
    }
    let (fem_flat, fem_hyp) = match fem_mesh {
        Some(h) => {
            let collar = build_collar_flat(p).map_err(|e| CapacityError::Surface(e.to_string()))?;
            let ff = fem_capacity(&collar, h, 1e-10)?;
            let fh = fem_hyperbolic(&profile, h, 1e-10)?;
            if ff.value > upper.value + 1e-3 {
                failures.push(format!("flat FEM value {} exceeds the upper bound {}", ff.value, upper.value));
            }
            if fh.value < lower.value - 1e-6 {
                failures.push(format!("hyperbolic FEM value {} is below the lower bound {}", fh.value, lower.value));
            }
            (Some(ff), Some(fh))
        }
        None => (None, None),
    };
    Ok(SeparationCertificate {
        threshold: SEPARATION,
        tol,
        ell: p.ell,
        upper,
        lower,
        upper_margin,
        lower_margin,
        fem_flat,
        fem_hyp,
        certified: failures.is_empty(),
        failures,
    })
}
