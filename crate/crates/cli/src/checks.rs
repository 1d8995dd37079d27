use crate::commands::{
    certificate_text,    capacity_certificate, closed_geodesics, extremal_surface, hexopt, parameters,
    CapacityCertificate, GeodesicRecord,
};
use crate::config::RunConfig;
use crate::error::{CliError, EXIT_ACCEPTANCE, EXIT_OK};
use crate::report::{csv_table, json_document, text_entries, Entry, Provenance, Rendered, Target};
use dyck::capacity::{
    build_collar_hyperbolic_profile, fem_capacity, fem_hyperbolic, fem_refinement, fem_round_annulus,
    flat_capacity_mesh_check, flat_capacity_upper, gudermann, muetzel_bound, CapacityEstimate, CollarProfile,
};
use dyck::constants::{named_constant, NamedValue, Residual, SurfaceParameters};
use dyck::geodesic::{
    comparison_polygon, verify_local_geodesic, voronoi_cells, voronoi_constraints, DistanceField, Enumeration,
    SteinerGraph,
};
use dyck::hexopt::HexoptCertificate;
use dyck::surface::{build_collar_flat, build_dyck_like, flat_cylinder, orientation_double_cover};
use dyck::ConeSurface;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{E, FRAC_PI_3, PI};

pub const STAGES: [&str; 7] = ["build", "systole", "area", "hexopt", "capacity", "certificate", "properties"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: u8,
    pub title: &'static str,
    pub stage: &'static str,
    pub passed: bool,
    pub entries: Vec<Entry>,
}

impl Check {
    fn new(id: u8, title: &'static str, stage: &'static str, entries: Vec<Entry>) -> Self {
        Self { id, title, stage, passed: entries.iter().all(|e| e.passed), entries }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Passed,
    Failed,
    Error,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: &'static str,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Default, Serialize)]
pub struct Results {
    pub constants: Vec<NamedValue>,
    pub parameters: Option<SurfaceParameters>,
    pub systole: Option<GeodesicRecord>,
    pub closed_geodesics: Option<usize>,
    pub area: Option<f64>,
    pub hexopt: Option<HexoptCertificate>,
    pub capacity: Option<CapacityCertificate>,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub stages: Vec<StageRecord>,
    pub checks: Vec<Check>,
    pub results: Results,
    pub passed: bool,
    pub first_failing_stage: Option<&'static str>,
    pub exit_code: i32,
}

struct Pipeline<'a> {
    cfg: &'a RunConfig,
    params: Option<SurfaceParameters>,
    dyck: Option<ConeSurface>,
    geodesics: Option<Enumeration>,
    fem: Option<(Option<CapacityEstimate>, CapacityEstimate)>,
    results: Results,
    checks: Vec<Check>,
}

const FEM_TOL: f64 = 1e-10;
const RANDOM_SURFACES: usize = 20;
const RANDOM_LMAX: f64 = 3.0;

const CONSTANT_TARGETS: [(&str, &str, f64, f64); 4] = [
    ("h", "h", 0.2248796, 5e-8),
    ("ell", "ℓ", 4.397146, 5e-7),
    ("cos_vartheta", "cos ϑ", 0.5954331, 1e-7),
    ("voronoi_floor", "πh²", 0.15887, 5e-6),
];

impl<'a> Pipeline<'a> {
    fn params(&self) -> SurfaceParameters {
        self.params.expect("build stage ran")
    }

    fn dyck(&self) -> &ConeSurface {
        self.dyck.as_ref().expect("build stage ran")
    }

    fn build(&mut self) -> Result<(), CliError> {
        let (p, _) = parameters(self.cfg)?;
        let s = extremal_surface(&p)?;
        let cover = orientation_double_cover(&s).map_err(|e| CliError::stage("build", e))?;
        let mut entries = Vec::new();
        for (name, label, target, tol) in CONSTANT_TARGETS {
            let v = named_constant(name, self.cfg.digits).map_err(|e| CliError::stage("build", e))?;
            entries.push(Entry::check(label, v.value(), Provenance::ClosedForm, Target::Equals(target), tol));
        }
        self.results.constants = ["h", "theta", "alpha", "delta", "cos_vartheta", "ell", "voronoi_floor"]
            .iter()
            .map(|n| named_constant(n, self.cfg.digits).map_err(|e| CliError::stage("build", e)))
            .collect::<Result<_, _>>()?;
        self.checks.push(Check::new(1, "constants", "build", entries));
        self.checks.push(Check::new(
            4,
            "gauss-bonnet",
            "build",
            vec![
                Entry::check("Σ(2π − angle) on D≤0", s.total_curvature(), Provenance::ClosedForm, Target::Equals(-2.0 * PI), 1e-9),
                Entry::check(
                    "Σ(2π − angle) on the double cover",
                    cover.total_curvature(),
                    Provenance::ClosedForm,
                    Target::Equals(-4.0 * PI),
                    1e-9,
                ),
            ],
        ));
        self.results.parameters = Some(p);
        self.params = Some(p);
        self.dyck = Some(s);
        Ok(())
    }

    fn systole(&mut self) -> Result<(), CliError> {
        let e = closed_geodesics(self.cfg, self.dyck())?;
        let area = self.dyck().area();
        let shortest = &e.paths[0];
        let min = shortest.length;
        let no_shorter = e.paths.iter().all(|p| p.length >= 1.0 - 1e-6);
        self.checks.push(Check::new(
            3,
            "systole",
            "systole",
            vec![
                Entry::check("minimum closed geodesic length", min, Provenance::Enumeration, Target::Equals(1.0), 1e-6),
                Entry::flag("no shorter closed geodesic", no_shorter && !e.partial, Provenance::Enumeration),
                Entry::check("sys²/area", min * min / area, Provenance::Enumeration, Target::Equals(0.86745), 5e-6),
            ],
        ));
        self.results.systole = Some(GeodesicRecord::from(shortest));
        self.results.closed_geodesics = Some(e.paths.len());
        self.geodesics = Some(e);
        Ok(())
    }

    fn area(&mut self) -> Result<(), CliError> {
        let p = self.params();
        let pieces = 2.0 * p.delta + 3.0 * p.h * (1.0 - 4.0 * p.h * p.h).sqrt();
        let radical = 1.0 + (169.0 - 38.0 * 19f64.sqrt()).sqrt() / 12.0;
        self.checks.push(Check::new(
            2,
            "area",
            "area",
            vec![
                Entry::check("2δ + 3h√(1−4h²)", pieces, Provenance::ClosedForm, Target::Equals(1.15279), 5e-6),
                Entry::check("1 + √(169−38√19)/12", radical, Provenance::ClosedForm, Target::Equals(1.15279), 5e-6),
                Entry::check("expression difference", (pieces - radical).abs(), Provenance::ClosedForm, Target::AtMost(0.0), 1e-12),
                Entry::check("surface area", self.dyck().area(), Provenance::ClosedForm, Target::Equals(radical), 1e-12),
            ],
        ));
        self.results.area = Some(radical);
        Ok(())
    }

    fn hexopt(&mut self) -> Result<(), CliError> {
        let p = self.params();
        let c = hexopt(&p)?;
        let target = [p.theta, PI - 2.0 * p.theta, p.theta];
        let mut hex = vec![Entry::check("hexagon minimum", c.hexagon.min, Provenance::Grid, Target::Equals(0.2008510), 1e-6)];
        for (i, name) in ["α₁", "α₂", "α₃"].into_iter().enumerate() {
            hex.push(Entry::check(name, c.hexagon.argmin[i], Provenance::Grid, Target::Equals(target[i]), 1e-4));
        }
        self.checks.push(Check::new(5, "hexagon optimization", "hexopt", hex));
        let exact_u = (8.0 - 19f64.sqrt()) / 72.0;
        let u = c.tradeoff.h_star * c.tradeoff.h_star;
        self.checks.push(Check::new(
            6,
            "tradeoff",
            "hexopt",
            vec![
                Entry::check("h'²", u, Provenance::Grid, Target::Equals(exact_u), 1e-8),
                Entry::check(
                    "|576u² − 128u + 5|",
                    (576.0 * u * u - 128.0 * u + 5.0).abs(),
                    Provenance::Grid,
                    Target::AtMost(0.0),
                    1e-9,
                ),
            ],
        ));
        let cases = c
            .case_bounds
            .cases
            .iter()
            .map(|cb| {
                let name = format!("case {} margin", cb.case);
                Entry::check(&name, cb.margin, Provenance::ClosedForm, Target::AtLeast(0.006), 0.0)
            })
            .collect();
        self.checks.push(Check::new(7, "case analysis", "hexopt", cases));
        self.results.hexopt = Some(c);
        Ok(())
    }

    fn capacity(&mut self) -> Result<(), CliError> {
        let p = self.params();
        let cfg = self.cfg;
        let stage = |e: dyck::capacity::CapacityError| CliError::stage("capacity", e);
        let upper = flat_capacity_upper(&p);
        let mesh = flat_capacity_mesh_check(&p, cfg.mesh_h).map_err(stage)?;
        self.checks.push(Check::new(
            8,
            "capacity upper bound",
            "capacity",
            vec![
                Entry::check("2·area − 12[tan(θ/2) − θ/2]h²", upper.value, Provenance::ClosedForm, Target::Equals(2.28308), 5e-6),
                Entry::check("sublevel area (Richardson)", mesh.mesh.value, Provenance::Mesh, Target::Equals(upper.value), 1e-3),
            ],
        ));

        let profile = build_collar_hyperbolic_profile(cfg.digits).map_err(stage)?;
        let lower = muetzel_bound(&profile, cfg.tol).map_err(stage)?;
        let romberg = lower.cross_check.unwrap_or(f64::NAN);
        let mut entries = vec![
            Entry::check("12∫ dt/(H(a) − H(−a))", lower.value, Provenance::Quadrature, Target::AtLeast(2.29461), 0.0),
            Entry::check("Gauss–Kronrod − Romberg", (lower.value - romberg).abs(), Provenance::Quadrature, Target::AtMost(0.0), 1e-6),
        ];
        for w in [0.1, 0.5, 1.0, 2.0] {
            let c = CollarProfile::constant(profile.ell, w, -w).map_err(stage)?;
            let v = muetzel_bound(&c, cfg.tol).map_err(stage)?.value;
            let exact = profile.ell / (gudermann(w) - gudermann(-w));
            let name = format!("constant width {w}");
            entries.push(Entry::check(&name, v, Provenance::Quadrature, Target::Equals(exact), cfg.tol));
        }
        self.checks.push(Check::new(9, "capacity lower bound", "capacity", entries));

        let cylinder = fem_capacity(&flat_cylinder(2.0, 0.5, 6, 2), 0.1, FEM_TOL).map_err(stage)?;
        let annulus = fem_round_annulus(1.0, E, cfg.mesh_h, FEM_TOL).map_err(stage)?;
        let collar = build_collar_flat(&p).map_err(|e| CliError::stage("capacity", e))?;
        let levels = fem_refinement(&collar, 4.0 * cfg.mesh_h, 3, FEM_TOL).map_err(stage)?;
        let mut entries = vec![
            Entry::check("flat cylinder", cylinder.value, Provenance::Fem, Target::Equals(4.0), 0.005 * 4.0),
            Entry::check("round annulus", annulus.value, Provenance::Fem, Target::Equals(2.0 * PI), 0.005 * 2.0 * PI),
            Entry::check(
                "A≤0 finest",
                levels.last().map_or(f64::NAN, |e| e.value),
                Provenance::Fem,
                Target::AtMost(upper.value),
                1e-3,
            ),
        ];
        for (k, w) in levels.windows(2).enumerate() {
            let name = format!("A≤0 refinement step {}", k + 1);
            entries.push(Entry::check(&name, w[1].value - w[0].value, Provenance::Fem, Target::AtMost(0.0), 1e-4));
        }
        self.checks.push(Check::new(11, "finite elements", "capacity", entries));
        let fem_hyp = fem_hyperbolic(&profile, cfg.mesh_h, FEM_TOL).map_err(stage)?;
        self.fem = Some((levels.last().cloned(), fem_hyp));
        Ok(())
    }

    fn certificate(&mut self) -> Result<(), CliError> {
        let p = self.params();
        let mut c = capacity_certificate(self.cfg, &p, false)?;
        if let Some((flat, hyp)) = self.fem.take() {
            c.fem_flat = flat;
            c.fem_hyp = Some(hyp);
        }
        self.checks.push(Check::new(
            10,
            "separation",
            "certificate",
            vec![
                Entry::check("2.29 − upper", c.margins.upper, Provenance::ClosedForm, Target::AtLeast(4e-3), 0.0),
                Entry::check("lower − 2.29", c.margins.lower, Provenance::Quadrature, Target::AtLeast(4e-3), 0.0),
            ],
        ));
        self.results.capacity = Some(c);
        Ok(())
    }

    fn properties(&mut self) -> Result<(), CliError> {
        let cfg = self.cfg;
        let s = self.dyck();
        let paths = &self.geodesics.as_ref().expect("systole stage ran").paths;
        let bad_paths = paths.iter().filter(|p| verify_local_geodesic(s, p).is_err()).count();
        let mut entries = vec![Entry::check(
            "paths failing local geodesy",
            bad_paths as f64,
            Provenance::Enumeration,
            Target::Equals(0.0),
            0.0,
        )];

        let p = self.params();
        let collar = build_collar_flat(&p).map_err(|e| CliError::stage("properties", e))?;
        let graph = SteinerGraph::new(&collar, 0.02);
        let field = DistanceField::to_curve(&collar, &graph, &collar.marked_points().soul);
        let areas: Vec<f64> = (0..=24).map(|i| field.sublevel_area(0.05 * i as f64)).collect();
        let drop = areas.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
        entries.push(Entry::check("largest sublevel area decrease", drop, Provenance::Mesh, Target::AtMost(0.0), 1e-12));

        let m = s.marked_points();
        let cells = voronoi_cells(s, &m.weierstrass, cfg.mesh_h, 1e-9);
        let mut dev: f64 = 0.0;
        for (i, &w) in m.weierstrass.iter().enumerate() {
            let c = voronoi_constraints(s, w, &m.weierstrass, cfg.lmax).map_err(|e| CliError::stage("properties", e))?;
            let q = comparison_polygon(&c).map_err(|e| CliError::stage("properties", e))?;
            dev = dev.max((q.area - cells[i].area).abs());
        }
        entries.push(Entry::check("|polygon − Voronoi cell| on D≤0", dev, Provenance::Mesh, Target::AtMost(0.0), 1e-3));

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut excess = f64::NEG_INFINITY;
        for _ in 0..RANDOM_SURFACES {
            let alpha = rng.gen_range(FRAC_PI_3..1.5);
            let h = rng.gen_range(0.05..0.4);
            let b = rng.gen_range(0.1..0.6);
            let delta = rng.gen_range(0.05..0.5);
            let r = build_dyck_like(alpha, h, b, delta).map_err(|e| CliError::stage("properties", e))?;
            let m = r.marked_points();
            let cells = voronoi_cells(&r, &m.weierstrass, cfg.mesh_h, 1e-9);
            for (i, &w) in m.weierstrass.iter().enumerate() {
                let c = voronoi_constraints(&r, w, &m.weierstrass, RANDOM_LMAX)
                    .map_err(|e| CliError::stage("properties", e))?;
                let q = comparison_polygon(&c).map_err(|e| CliError::stage("properties", e))?;
                excess = excess.max(if q.bounded { q.area - cells[i].area } else { f64::INFINITY });
            }
        }
        entries.push(Entry::check(
            "max polygon − cell on random surfaces",
            excess,
            Provenance::Mesh,
            Target::AtMost(0.0),
            1e-3,
        ));
        self.checks.push(Check::new(12, "property suites", "properties", entries));
        Ok(())
    }
}

/// Runs the stages in order. A stage error stops the pipeline; failed
/// checks do not.
pub fn run_verify(cfg: &RunConfig) -> VerifyReport {
    let mut pl = Pipeline {
        cfg,
        params: None,
        dyck: None,
        geodesics: None,
        fem: None,
        results: Results::default(),
        checks: Vec::new(),
    };
    let mut stages = Vec::new();
    let mut error: Option<(&'static str, CliError)> = None;
    for stage in STAGES {
        if error.is_some() {
            stages.push(StageRecord { stage, status: StageStatus::Skipped, error: None });
            continue;
        }
        let before = pl.checks.len();
        let outcome = match stage {
            "build" => pl.build(),
            "systole" => pl.systole(),
            "area" => pl.area(),
            "hexopt" => pl.hexopt(),
            "capacity" => pl.capacity(),
            "certificate" => pl.certificate(),
            _ => pl.properties(),
        };
        let status = match &outcome {
            Err(_) => StageStatus::Error,
            Ok(()) if pl.checks[before..].iter().all(|c| c.passed) => StageStatus::Passed,
            Ok(()) => StageStatus::Failed,
        };
        let message = outcome.as_ref().err().map(ToString::to_string);
        stages.push(StageRecord { stage, status, error: message });
        if let Err(e) = outcome {
            error = Some((stage, e));
        }
    }
    pl.checks.sort_by_key(|c| c.id);
    let first_failing_stage = stages
        .iter()
        .find(|s| matches!(s.status, StageStatus::Failed | StageStatus::Error))
        .map(|s| s.stage);
    let passed = error.is_none() && pl.checks.len() == 12 && pl.checks.iter().all(|c| c.passed);
    let exit_code = match &error {
        Some((_, e)) => e.exit_code(),
        None if passed => EXIT_OK,
        None => EXIT_ACCEPTANCE,
    };
    VerifyReport { stages, checks: pl.checks, results: pl.results, passed, first_failing_stage, exit_code }
}

pub fn render_verify(cfg: &RunConfig, r: &VerifyReport) -> Rendered {
    let mut text = String::new();
    for s in &r.stages {
        let status = match s.status {
            StageStatus::Passed => "passed",
            StageStatus::Failed => "FAILED",
            StageStatus::Error => "ERROR",
            StageStatus::Skipped => "skipped",
        };
        text.push_str(&format!("[{}] {status}", s.stage));
        if let Some(e) = &s.error {
            text.push_str(&format!(": {e}"));
        }
        text.push('\n');
        for c in r.checks.iter().filter(|c| c.stage == s.stage) {
            text.push_str(&format!("  {} {:>2}. {}\n", if c.passed { "PASS" } else { "FAIL" }, c.id, c.title));
            text.push_str(&text_entries(&c.entries));
        }
    }
    match r.first_failing_stage {
        Some(s) => text.push_str(&format!("first failing stage: {s}\n")),
        None => text.push_str("all checks passed\n"),
    }
    let rows = r
        .checks
        .iter()
        .flat_map(|c| {
            c.entries.iter().map(move |e| {
                vec![
                    c.id.to_string(),
                    c.stage.to_string(),
                    e.name.clone(),
                    e.value.to_string(),
                    format!("{:e}", e.tolerance),
                    e.provenance.label().to_string(),
                    e.passed.to_string(),
                ]
            })
        })
        .collect::<Vec<_>>();
    let csv = csv_table(&["check", "stage", "entry", "value", "tolerance", "provenance", "passed"], &rows);
    Rendered { text, json: json_document(cfg, r), csv: Some(csv) }
}

#[derive(Serialize)]
pub struct CertifyReport {
    pub defining_relations: Vec<Residual>,
    pub gauss_bonnet: Entry,
    pub systole: Entry,
    pub area: Entry,
    pub hexopt: HexoptCertificate,
    pub capacity: CapacityCertificate,
    pub certified: bool,
}

/// The equality-case certificate: relations, curvature, unit systole,
/// hexagon and case bounds, and capacity separation, without comparison
/// against printed decimals.
pub fn run_certify(cfg: &RunConfig) -> Result<CertifyReport, CliError> {
    let (p, defining_relations) = parameters(cfg)?;
    let s = extremal_surface(&p)?;
    let gauss_bonnet =
        Entry::check("gauss-bonnet residual", s.gauss_bonnet_residual(), Provenance::ClosedForm, Target::Equals(0.0), 1e-9);
    let e = closed_geodesics(cfg, &s)?;
    let systole = Entry::check("systole", e.paths[0].length, Provenance::Enumeration, Target::Equals(1.0), 1e-6);
    let exact_area = 1.0 + (169.0 - 38.0 * 19f64.sqrt()).sqrt() / 12.0;
    let area = Entry::check("area", s.area(), Provenance::ClosedForm, Target::Equals(exact_area), 1e-12);
    let hexopt = hexopt(&p)?;
    let capacity = capacity_certificate(cfg, &p, false)?;
    let certified = gauss_bonnet.passed && systole.passed && area.passed && hexopt.passes && capacity.certified;
    Ok(CertifyReport { defining_relations, gauss_bonnet, systole, area, hexopt, capacity, certified })
}

pub fn render_certify(cfg: &RunConfig, r: &CertifyReport) -> Rendered {
    let mut text = text_entries(&[r.gauss_bonnet.clone(), r.systole.clone(), r.area.clone()]);
    text.push_str(&format!(
        "  hexopt certificate {} (minimum margin of the cases {})\n",
        if r.hexopt.passes { "passes" } else { "FAILS" },
        r.hexopt.case_bounds.min_margin
    ));
    text.push_str(&certificate_text(&r.capacity));
    text.push_str(if r.certified { "certified\n" } else { "NOT certified\n" });
    Rendered { text, json: json_document(cfg, r), csv: None }
}
