use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{csv_table, json_document, text_entries, Entry, Provenance, Rendered, Target};
use clap::ValueEnum;
use dyck::capacity::{
    build_collar_hyperbolic_profile, flat_capacity_mesh_check, muetzel_bound, separation_certificate, CapacityEstimate,
    SEPARATION,
};
use dyck::constants::{check_defining_relations, named_constant, Residual, SurfaceParameters, REGISTRY};
use dyck::geodesic::{
    classify_family, enumerate_closed_geodesics_with, systole_with, Enumeration, EnumerationOptions, Family,
    GeodesicError, GeodesicKind, GeodesicPath,
};
use dyck::hexopt::{hexopt_certificate, HexGrid, HexoptCertificate};
use dyck::surface::{
    build_collar_flat, build_extremal_dyck, check_symmetry, orientation_double_cover, to_json, to_obj, SymmetryReport,
};
use dyck::ConeSurface;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const RELATION_TOL: f64 = 1e-12;
pub const PROFILE_SAMPLES: usize = 256;

/// Extremal parameters, shifted by `--perturb-h`, after checking the
/// defining relations.
pub fn parameters(cfg: &RunConfig) -> Result<(SurfaceParameters, Vec<Residual>), CliError> {
    let mut p = SurfaceParameters::extremal();
    p.h += cfg.perturb_h;
    let residuals = check_defining_relations(&p);
    let bad: Vec<String> = residuals
        .iter()
        .filter(|r| !r.passes(RELATION_TOL))
        .map(|r| format!("{} = {:e}", r.relation, r.value))
        .collect();
    if !bad.is_empty() {
        return Err(CliError::stage(
            "build",
            format!("defining relation residuals exceed {RELATION_TOL:e}: {}", bad.join(", ")),
        ));
    }
    Ok((p, residuals))
}

pub fn extremal_surface(p: &SurfaceParameters) -> Result<ConeSurface, CliError> {
    build_extremal_dyck(p).map_err(|e| CliError::stage("build", e))
}

fn options(cfg: &RunConfig) -> EnumerationOptions {
    EnumerationOptions { l_max: cfg.lmax, budget: cfg.budget }
}

fn systole_error(cfg: &RunConfig, e: GeodesicError) -> CliError {
    match e {
        GeodesicError::NoneFound(_) => CliError::stage("systole", format!("no closed geodesic ≤ {}", cfg.lmax)),
        GeodesicError::BudgetExhausted(n) => {
            CliError::stage("systole", format!("incomplete search: node budget {n} exhausted below {}", cfg.lmax))
        }
        e => CliError::stage("systole", e),
    }
}

/// Closed geodesics up to `--lmax`; an empty or partial search is an error.
pub fn closed_geodesics(cfg: &RunConfig, s: &ConeSurface) -> Result<Enumeration, CliError> {
    let e = enumerate_closed_geodesics_with(s, &options(cfg)).map_err(|e| systole_error(cfg, e))?;
    if e.partial {
        return Err(systole_error(cfg, GeodesicError::BudgetExhausted(cfg.budget)));
    }
    if e.paths.is_empty() {
        return Err(systole_error(cfg, GeodesicError::NoneFound(cfg.lmax)));
    }
    Ok(e)
}

/// Half a unit in the last reported digit.
pub fn rounding_tolerance(value: f64, digits: usize) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    let exponent = value.abs().log10().floor() as i64 - digits as i64;
    format!("5e{exponent}").parse().expect("float literal")
}

// constants

#[derive(Serialize)]
struct ConstantRow {
    name: String,
    decimal: String,
    exact: String,
    field_element: Option<String>,
    reported: Option<String>,
    tolerance: f64,
    provenance: Provenance,
}

#[derive(Serialize)]
struct ConstantsBody<'a> {
    digits: usize,
    constants: &'a [ConstantRow],
}

pub const CONSTANTS_CSV_HEADER: [&str; 5] = ["name", "decimal", "exact", "reported", "tolerance"];

pub fn cmd_constants(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let rows = REGISTRY
        .iter()
        .map(|e| {
            let v = named_constant(e.name, cfg.digits).map_err(|err| CliError::stage("constants", err))?;
            Ok(ConstantRow {
                tolerance: rounding_tolerance(v.value(), cfg.digits),
                name: v.name,
                decimal: v.decimal,
                exact: v.exact,
                field_element: v.field_element,
                reported: v.reported,
                provenance: Provenance::ClosedForm,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let width = rows.iter().map(|r| r.decimal.len()).max().unwrap_or(0);
    let mut text = format!("constants ({} significant digits)\n", cfg.digits);
    for r in &rows {
        let reported = r.reported.as_deref().map(|s| format!("  reported {s}")).unwrap_or_default();
        text.push_str(&format!("  {:<20} {:<width$}  = {}{reported}\n", r.name, r.decimal, r.exact));
    }
    let csv = csv_table(
        &CONSTANTS_CSV_HEADER,
        &rows
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    r.decimal.clone(),
                    r.exact.clone(),
                    r.reported.clone().unwrap_or_default(),
                    format!("{:e}", r.tolerance),
                ]
            })
            .collect::<Vec<_>>(),
    );
    let json = json_document(cfg, &ConstantsBody { digits: cfg.digits, constants: &rows });
    Ok(Rendered { text, json, csv: Some(csv) })
}

// build

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuildTarget {
    /// The extremal surface D≤0
    Dyck,
    /// The flat collar A≤0
    Collar,
    /// The orientation double cover of D≤0
    Cover,
}

#[derive(Serialize)]
struct ConePoint {
    vertex: usize,
    angle: f64,
}

#[derive(Serialize)]
struct BuildBody {
    target: &'static str,
    name: String,
    faces: usize,
    vertices: usize,
    edges: usize,
    euler_characteristic: i64,
    orientable: bool,
    boundary_components: usize,
    cone_points: Vec<ConePoint>,
    symmetry: Option<SymmetryReport>,
    defining_relations: Vec<Residual>,
    entries: Vec<Entry>,
}

pub fn build_target(p: &SurfaceParameters, target: BuildTarget) -> Result<ConeSurface, CliError> {
    let s = extremal_surface(p)?;
    match target {
        BuildTarget::Dyck => Ok(s),
        BuildTarget::Collar => build_collar_flat(p).map_err(|e| CliError::stage("build", e)),
        BuildTarget::Cover => orientation_double_cover(&s).map_err(|e| CliError::stage("build", e)),
    }
}

pub fn cmd_build(cfg: &RunConfig, target: BuildTarget) -> Result<Rendered, CliError> {
    let (p, residuals) = parameters(cfg)?;
    let s = build_target(&p, target)?;
    let name = match target {
        BuildTarget::Dyck => "dyck",
        BuildTarget::Collar => "collar",
        BuildTarget::Cover => "cover",
    };
    let chi = s.euler_characteristic();
    let expected_area = match target {
        BuildTarget::Dyck => p.area(),
        _ => 2.0 * p.area(),
    };
    let entries = vec![
        Entry::check("area", s.area(), Provenance::ClosedForm, Target::Equals(expected_area), 1e-12),
        Entry::info("total curvature", s.total_curvature(), Provenance::ClosedForm, 1e-9),
        Entry::check(
            "gauss-bonnet residual",
            s.gauss_bonnet_residual(),
            Provenance::ClosedForm,
            Target::Equals(0.0),
            1e-9,
        ),
        Entry::check(
            "minimum cone angle",
            s.min_cone_angle(),
            Provenance::ClosedForm,
            Target::AtLeast(2.0 * std::f64::consts::PI),
            1e-9,
        ),
    ];
    let symmetry = (target == BuildTarget::Dyck).then(|| check_symmetry(&s));
    let body = BuildBody {
        target: name,
        name: s.name().to_string(),
        faces: s.num_faces(),
        vertices: s.vertices().len(),
        edges: s.num_edges(),
        euler_characteristic: chi,
        orientable: s.is_orientable(),
        boundary_components: s.boundary_components(),
        cone_points: s.cone_points(1e-9).into_iter().map(|(vertex, angle)| ConePoint { vertex, angle }).collect(),
        symmetry,
        defining_relations: residuals,
        entries,
    };
    let mut text = format!(
        "{name}: {} faces, {} vertices, {} edges, χ = {chi}, {}, {} boundary component(s)\n  cone points: {}\n",
        body.faces,
        body.vertices,
        body.edges,
        if body.orientable { "orientable" } else { "nonorientable" },
        body.boundary_components,
        body.cone_points.iter().map(|c| format!("v{} ({:.12})", c.vertex, c.angle)).collect::<Vec<_>>().join(", "),
    );
    if let Some(sym) = &body.symmetry {
        text.push_str(&format!("  symmetry group order {} (expected {})\n", sym.order, sym.expected));
    }
    text.push_str(&text_entries(&body.entries));
    let json = json_document(cfg, &body);
    Ok(Rendered { text, json, csv: None })
}

// systole

#[derive(Serialize)]
pub struct GeodesicRecord {
    pub length: f64,
    #[serde(rename = "type")]
    pub kind: GeodesicKind,
    pub faces: Vec<usize>,
    pub cone_points: Vec<usize>,
}

impl From<&GeodesicPath> for GeodesicRecord {
    fn from(p: &GeodesicPath) -> Self {
        Self { length: p.length, kind: p.kind, faces: p.faces(), cone_points: p.cone_points() }
    }
}

#[derive(Serialize)]
struct SystoleBody {
    systole: Entry,
    ratio: Entry,
    family: Family,
    shortest: GeodesicRecord,
    orientation_reversing: bool,
    closed_geodesics: usize,
}

pub fn cmd_systole(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let (p, _) = parameters(cfg)?;
    let s = extremal_surface(&p)?;
    let sys = systole_with(&s, &options(cfg)).map_err(|e| systole_error(cfg, e))?;
    let all = closed_geodesics(cfg, &s)?;
    let ratio = sys.length * sys.length / s.area();
    let body = SystoleBody {
        systole: Entry::info("systole", sys.length, Provenance::Enumeration, 1e-9),
        ratio: Entry::info("systolic ratio", ratio, Provenance::Enumeration, 1e-9),
        family: classify_family(&s, &sys.path),
        shortest: GeodesicRecord::from(&sys.path),
        orientation_reversing: sys.path.orientation_reversing,
        closed_geodesics: all.paths.len(),
    };
    let text = format!(
        "systole {} ({:?}, {:?}), systolic ratio {}\n{} closed geodesics of length ≤ {}\n",
        sys.length,
        body.shortest.kind,
        body.family,
        ratio,
        body.closed_geodesics,
        cfg.lmax
    );
    let json = json_document(cfg, &body);
    Ok(Rendered { text, json, csv: None })
}

// hexopt

pub fn hexopt(p: &SurfaceParameters) -> Result<HexoptCertificate, CliError> {
    hexopt_certificate(p, &HexGrid::default()).map_err(|e| CliError::stage("hexopt", e))
}

pub fn cmd_hexopt(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let (p, _) = parameters(cfg)?;
    let c = hexopt(&p)?;
    let mut text = format!(
        "hexagon minimum {} at α = ({}, {}, {}) [{}]\n",
        c.hexagon.min, c.hexagon.argmin[0], c.hexagon.argmin[1], c.hexagon.argmin[2], c.hexagon.polish
    );
    text.push_str(&format!(
        "tradeoff {:?} at h = {} (u = {}, exact {}), area {}, certificate residual {:e}\n",
        c.tradeoff.kind, c.tradeoff.h_star, c.tradeoff.u, c.tradeoff.exact_u, c.tradeoff.area, c.tradeoff.certificate_residual
    ));
    for cb in &c.case_bounds.cases {
        text.push_str(&format!("case {}: {} = {} (margin {})\n", cb.case, cb.formula, cb.bound, cb.margin));
    }
    text.push_str(&format!("certificate {}\n", if c.passes { "passes" } else { "FAILS" }));
    let json = json_document(cfg, &c);
    Ok(Rendered { text, json, csv: None })
}

// capacity

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CapacityAction {
    /// Closed-form upper bound for A≤0 with the mesh cross-check
    Upper,
    /// Fermi-coordinate lower bound for A−1
    Lower,
    /// Finite-element capacities of A≤0 and A−1
    Fem,
    /// Separation certificate
    Certify,
}

#[derive(Serialize)]
pub struct Margins {
    pub threshold: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Serialize)]
pub struct CapacityCertificate {
    pub upper: CapacityEstimate,
    pub lower: CapacityEstimate,
    pub fem_flat: Option<CapacityEstimate>,
    pub fem_hyp: Option<CapacityEstimate>,
    pub margins: Margins,
    pub certified: bool,
    pub failures: Vec<String>,
    pub params_digest: String,
}

#[derive(Serialize)]
struct DigestInput<'a> {
    parameters: &'a SurfaceParameters,
    tol: f64,
    mesh_h: f64,
}

pub fn params_digest(p: &SurfaceParameters, cfg: &RunConfig) -> String {
    let json = serde_json::to_string(&DigestInput { parameters: p, tol: cfg.tol, mesh_h: cfg.mesh_h })
        .expect("parameters serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn estimate_text(e: &CapacityEstimate) -> String {
    format!("  {:?}: {} (error estimate {:e})\n    {}\n", e.kind, e.value, e.error_estimate, e.method)
}

pub fn capacity_certificate(cfg: &RunConfig, p: &SurfaceParameters, fem: bool) -> Result<CapacityCertificate, CliError> {
    let c = separation_certificate(p, cfg.tol, fem.then_some(cfg.mesh_h)).map_err(|e| CliError::stage("capacity", e))?;
    Ok(CapacityCertificate {
        margins: Margins { threshold: SEPARATION, upper: c.upper_margin, lower: c.lower_margin },
        upper: c.upper,
        lower: c.lower,
        fem_flat: c.fem_flat,
        fem_hyp: c.fem_hyp,
        certified: c.certified,
        failures: c.failures,
        params_digest: params_digest(p, cfg),
    })
}

pub fn cmd_capacity(cfg: &RunConfig, action: CapacityAction) -> Result<(Rendered, bool), CliError> {
    let (p, _) = parameters(cfg)?;
    let stage = |e: dyck::capacity::CapacityError| CliError::stage("capacity", e);
    match action {
        CapacityAction::Upper => {
            let m = flat_capacity_mesh_check(&p, cfg.mesh_h).map_err(stage)?;
            let mut text = format!("upper bound {} (closed form)\n", m.closed_form);
            text.push_str(&estimate_text(&m.mesh));
            text.push_str(&format!("  deviation {:e}, {}\n", m.deviation, if m.agrees { "agrees" } else { "DISAGREES" }));
            if let Some(w) = &m.warning {
                eprintln!("warning: {w}");
            }
            Ok((Rendered { text, json: json_document(cfg, &m), csv: None }, true))
        }
        CapacityAction::Lower => {
            let profile = build_collar_hyperbolic_profile(cfg.digits).map_err(stage)?;
            let m = muetzel_bound(&profile, cfg.tol).map_err(stage)?;
            let text = format!("lower bound {}\n{}", m.value, estimate_text(&m));
            Ok((Rendered { text, json: json_document(cfg, &m), csv: None }, true))
        }
        CapacityAction::Fem => {
            let c = capacity_certificate(cfg, &p, true)?;
            let mut text = String::new();
            for e in [&c.fem_flat, &c.fem_hyp].into_iter().flatten() {
                text.push_str(&estimate_text(e));
            }
            #[derive(Serialize)]
            struct Fem<'a> {
                fem_flat: &'a Option<CapacityEstimate>,
                fem_hyp: &'a Option<CapacityEstimate>,
            }
            let json = json_document(cfg, &Fem { fem_flat: &c.fem_flat, fem_hyp: &c.fem_hyp });
            Ok((Rendered { text, json, csv: None }, true))
        }
        CapacityAction::Certify => {
            let c = capacity_certificate(cfg, &p, true)?;
            Ok((Rendered { text: certificate_text(&c), json: json_document(cfg, &c), csv: None }, c.certified))
        }
    }
}

pub fn certificate_text(c: &CapacityCertificate) -> String {
    let mut text = format!(
        "capa A≤0 ≤ {} < {} < {} ≤ capa A−1 (margins {} and {})\n",
        c.upper.value, c.margins.threshold, c.lower.value, c.margins.upper, c.margins.lower
    );
    for e in [&c.fem_flat, &c.fem_hyp].into_iter().flatten() {
        text.push_str(&estimate_text(e));
    }
    for f in &c.failures {
        text.push_str(&format!("  failure: {f}\n"));
    }
    text.push_str(&format!("separation {}\n", if c.certified { "certified" } else { "NOT certified" }));
    text
}

// export

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportTarget {
    /// Mesh of D≤0
    Surface,
    /// Mesh of the flat collar A≤0
    Annulus,
    /// Closed geodesics up to --lmax, sorted by length
    Geodesics,
    /// a(t), b(t) of the hyperbolic collar on 256 points of [0, ℓ)
    Profile,
}

pub fn cmd_export(cfg: &RunConfig, target: ExportTarget, obj: bool) -> Result<Rendered, CliError> {
    match target {
        ExportTarget::Surface | ExportTarget::Annulus => {
            let (p, _) = parameters(cfg)?;
            let s = if target == ExportTarget::Surface {
                extremal_surface(&p)?
            } else {
                build_target(&p, BuildTarget::Collar)?
            };
            let mesh = if obj { to_obj(&s) } else { to_json(&s) };
            Ok(Rendered { text: mesh.clone(), json: mesh, csv: None })
        }
        ExportTarget::Geodesics => {
            let (p, _) = parameters(cfg)?;
            let s = extremal_surface(&p)?;
            let e = closed_geodesics(cfg, &s)?;
            let mut records: Vec<GeodesicRecord> = e.paths.iter().map(GeodesicRecord::from).collect();
            records.sort_by(|a, b| {
                a.length.total_cmp(&b.length).then(a.kind.cmp(&b.kind)).then(a.faces.cmp(&b.faces))
            });
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
                    vec![
                        r.length.to_string(),
                        serde_json::to_value(r.kind).expect("kind").as_str().unwrap_or_default().to_string(),
                        join(&r.faces),
                        join(&r.cone_points),
                    ]
                })
                .collect();
            let csv = csv_table(&["length", "type", "faces", "cone_points"], &rows);
            let mut json = serde_json::to_string_pretty(&records).expect("records serialize");
            json.push('\n');
            Ok(Rendered { text: csv.clone(), json, csv: Some(csv) })
        }
        ExportTarget::Profile => {
            let profile = build_collar_hyperbolic_profile(cfg.digits).map_err(|e| CliError::stage("capacity", e))?;
            let samples = profile.sample(PROFILE_SAMPLES).map_err(|e| CliError::stage("capacity", e))?;
            let rows: Vec<Vec<String>> =
                samples.iter().map(|s| vec![s.t.to_string(), s.a.to_string(), s.b.to_string()]).collect();
            let csv = csv_table(&["t", "a", "b"], &rows);
            let mut json = serde_json::to_string_pretty(&samples).expect("samples serialize");
            json.push('\n');
            Ok(Rendered { text: csv.clone(), json, csv: Some(csv) })
        }
    }
}
