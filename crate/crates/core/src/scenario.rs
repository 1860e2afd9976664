//! Scenario configs, the built-in check suites, and report emission.
//!
//! A scenario describes a field (exact Riemann data, a characteristic
//! solution, a finite-volume run, or seeded random piecewise data), the
//! flux/source pair, entropy and test-function lists, and the set of
//! checks to evaluate. Reports carry one record per check and serialize
//! to JSON or CSV.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;

use crate::domain::TestFunction;
use crate::entropy::Entropy1D;
use crate::error::{Error, Result};
use crate::fields::{AnalyticPiecewiseField, Field, InitialDatum, Region};
use crate::flux::{FluxFunction, SourceFunction};
use crate::fourier::{fourier_check, moment_series, mu_hat};
use crate::production::{
    kruzkov, kruzkov_curve, kruzkov_samples, production, production_with_flux,
    solution_residual, working_span, KruzkovCurve,
};
use crate::quad::{integrate_1d, QuadratureSpec};
use crate::represent::{represent_acr, represent_c2};
use crate::solvers::{
    fv_solve, nonentropic_shock_burgers, quadratic_transport_datum,
    quadratic_transport_solution, riemann_burgers, riemann_datum, FVConfig,
};

/// How the field under test is produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FieldSpec {
    /// Exact Burgers Riemann solution (entropic), or the non-entropic
    /// shock when `entropic` is false.
    Riemann { u_l: f64, u_r: f64, entropic: bool },
    /// A named exact solution built by characteristics.
    Characteristic { name: String },
    /// Finite-volume ladder over the listed cell counts.
    Fv { x_lo: f64, x_hi: f64, u_l: f64, u_r: f64, n_cells: Vec<usize> },
    /// Seeded random piecewise-constant fields (generally not solutions).
    RandomPiecewise { count: usize, x_lo: f64, x_hi: f64 },
}

/// One polynomial bump test function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestSpec {
    pub t_center: f64,
    pub t_radius: f64,
    pub x_center: f64,
    pub x_radius: f64,
    #[serde(default = "default_exponent")]
    pub p: u32,
}

fn default_exponent() -> u32 {
    4
}

impl TestSpec {
    pub fn build(&self) -> TestFunction {
        TestFunction::with_exponent(
            self.t_center,
            self.t_radius,
            self.x_center,
            self.x_radius,
            self.p,
        )
    }
}

/// Pass thresholds, pinned by [`Tolerances::default`] and overridable
/// per config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative error of the shock dissipation rate oracle.
    pub dissipation_rel: f64,
    /// Absolute error of mu_k / (line integral) against the jump oracle.
    pub density_abs: f64,
    /// `solution_residual` bound for exact solutions.
    pub residual: f64,
    /// Relative lhs-vs-rhs error of the representation formulas.
    pub representation_rel: f64,
    /// Boundary term magnitude on exact-solution scenarios.
    pub boundary_abs: f64,
    /// Density-vs-Stieltjes agreement for C^2 entropies.
    pub acr_match_abs: f64,
    /// Atom recovery of mu_c through the Stieltjes variant.
    pub atom_abs: f64,
    /// Fourier identity: |mu_hat - via-entropy| <= tol * (1 + |mu_hat|).
    pub fourier_rel: f64,
    /// Moment series partial sum against mu_hat(1).
    pub moment_abs: f64,
    /// Production magnitude per unit C^1 norm on strong solutions.
    pub annihilation: f64,
    /// Flux-offset invariance discrepancy.
    pub invariance_abs: f64,
    /// Midpoint property defect per unit C^1 norm, at epsilon = 1e-3.
    pub midpoint: f64,
    /// Minimum acceptable empirical convergence order of the FV ladder.
    pub fv_order_min: f64,
    /// Kruzkov curve lower bound: min_k mu_k >= -fv_curve_slack * dx * |phi|_C1.
    pub fv_curve_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            dissipation_rel: 1e-4,
            density_abs: 1e-4,
            residual: 1e-8,
            representation_rel: 1e-6,
            boundary_abs: 1e-6,
            acr_match_abs: 1e-8,
            atom_abs: 1e-10,
            fourier_rel: 1e-6,
            moment_abs: 1e-8,
            annihilation: 1e-5,
            invariance_abs: 1e-9,
            midpoint: 1e-3,
            fv_order_min: 0.8,
            fv_curve_slack: 5.0,
        }
    }
}

/// Full description of one scenario run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub t_end: f64,
    pub field: FieldSpec,
    pub flux: String,
    pub source: String,
    #[serde(default)]
    pub entropies: Vec<String>,
    pub tests: Vec<TestSpec>,
    /// Levels for the density and midpoint checks.
    #[serde(default)]
    pub k_values: Vec<f64>,
    /// Fourier evaluation points as (re, im) pairs.
    #[serde(default)]
    pub xi_values: Vec<(f64, f64)>,
    pub checks: Vec<String>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(&bytes);
        format!("{:x}", h.finalize())
    }

    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        FluxFunction::builtin(&self.flux)?;
        SourceFunction::builtin(&self.source)?;
        if self.tests.is_empty() {
            return Err(Error::Config("scenario needs at least one test function".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        for name in &self.entropies {
            entropy_builtin(name)?;
        }
        for c in &self.checks {
            if !KNOWN_CHECKS.contains(&c.as_str()) {
                return Err(Error::Config(format!("unknown check `{c}`")));
            }
        }
        Ok(())
    }
}

const KNOWN_CHECKS: &[&str] = &[
    "dissipation",
    "kruzkov_density",
    "midpoint",
    "residual",
    "rarefaction_flat",
    "sign_separation",
    "representation",
    "fourier",
    "invariance",
    "annihilation",
    "fv_order",
    "fv_curve_bound",
    "random_representation",
];

pub fn entropy_builtin(name: &str) -> Result<Entropy1D<f64>> {
    match name {
        "identity" => Ok(Entropy1D::identity()),
        "quadratic_half" => Ok(Entropy1D::quadratic_half()),
        "square" => Ok(Entropy1D::square()),
        "quartic" => Ok(Entropy1D::quartic()),
        "cosine" => Ok(Entropy1D::cosine()),
        other => Err(Error::UnknownName(format!("entropy `{other}`"))),
    }
}

/// The builtin scenario catalogue.
pub const BUILTIN_SCENARIOS: &[&str] = &[
    "burgers_shock",
    "burgers_rarefaction",
    "nonentropic_shock",
    "paper_x2u_strong",
    "fv_burgers",
    "random_piecewise",
];

pub fn builtin_scenario(name: &str, seed: u64) -> Result<ScenarioConfig> {
    let shock_tests = vec![TestSpec {
        t_center: 1.0,
        t_radius: 0.9,
        x_center: 0.5,
        x_radius: 0.8,
        p: 4,
    }];
    let cfg = match name {
        "burgers_shock" => ScenarioConfig {
            name: name.into(),
            seed,
            t_end: 2.0,
            field: FieldSpec::Riemann { u_l: 1.0, u_r: 0.0, entropic: true },
            flux: "burgers".into(),
            source: "zero".into(),
            entropies: vec!["quadratic_half".into(), "square".into(), "quartic".into()],
            tests: shock_tests,
            k_values: (1..=9).map(|i| i as f64 / 10.0).collect(),
            xi_values: vec![(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (5.0, 0.0), (-5.0, 0.0), (2.0, 1.0)],
            checks: vec![
                "dissipation".into(),
                "kruzkov_density".into(),
                "midpoint".into(),
                "residual".into(),
                "representation".into(),
                "fourier".into(),
                "invariance".into(),
            ],
            quadrature: QuadratureSpec::default(),
            tolerances: Tolerances::default(),
        },
        "burgers_rarefaction" => ScenarioConfig {
            name: name.into(),
            seed,
            t_end: 2.0,
            field: FieldSpec::Riemann { u_l: 0.0, u_r: 1.0, entropic: true },
            flux: "burgers".into(),
            source: "zero".into(),
            entropies: vec!["square".into()],
            tests: vec![TestSpec {
                t_center: 1.0,
                t_radius: 0.9,
                x_center: 0.5,
                x_radius: 1.2,
                p: 4,
            }],
            k_values: vec![],
            xi_values: vec![],
            checks: vec!["residual".into(), "rarefaction_flat".into(), "invariance".into()],
            quadrature: QuadratureSpec::default(),
            tolerances: Tolerances::default(),
        },
        "nonentropic_shock" => ScenarioConfig {
            name: name.into(),
            seed,
            t_end: 2.0,
            field: FieldSpec::Riemann { u_l: 0.0, u_r: 1.0, entropic: false },
            flux: "burgers".into(),
            source: "zero".into(),
            entropies: vec![],
            tests: vec![TestSpec {
                t_center: 1.0,
                t_radius: 0.9,
                x_center: 0.5,
                x_radius: 0.8,
                p: 4,
            }],
            k_values: vec![0.5],
            xi_values: vec![],
            checks: vec!["sign_separation".into()],
            quadrature: QuadratureSpec::default(),
            tolerances: Tolerances::default(),
        },
        "paper_x2u_strong" => ScenarioConfig {
            name: name.into(),
            seed,
            t_end: 0.8,
            field: FieldSpec::Characteristic { name: "quadratic_transport".into() },
            flux: "linear_x2".into(),
            source: "linear_x2".into(),
            entropies: vec!["square".into(), "quartic".into(), "cosine".into()],
            tests: vec![TestSpec {
                t_center: 0.4,
                t_radius: 0.35,
                x_center: -1.2,
                x_radius: 0.7,
                p: 4,
            }],
            k_values: vec![],
            xi_values: vec![],
            checks: vec!["residual".into(), "annihilation".into()],
            quadrature: QuadratureSpec::default(),
            tolerances: Tolerances::default(),
        },
        "fv_burgers" => ScenarioConfig {
            name: name.into(),
            seed,
            t_end: 1.0,
            field: FieldSpec::Fv {
                x_lo: -2.0,
                x_hi: 2.0,
                u_l: 1.0,
                u_r: 0.0,
                n_cells: vec![200, 400, 800],
            },
            flux: "burgers".into(),
            source: "zero".into(),
            entropies: vec![],
            tests: vec![TestSpec {
                t_center: 0.5,
                t_radius: 0.4,
                x_center: 0.25,
                x_radius: 0.6,
                p: 4,
            }],
            k_values: vec![],
            xi_values: vec![],
            checks: vec!["fv_order".into(), "fv_curve_bound".into()],
            quadrature: QuadratureSpec::default(),
            tolerances: Tolerances::default(),
        },
        "random_piecewise" => ScenarioConfig {
            name: name.into(),
            seed,
            t_end: 1.0,
            field: FieldSpec::RandomPiecewise { count: 20, x_lo: -2.0, x_hi: 2.0 },
            flux: "burgers".into(),
            source: "zero".into(),
            entropies: vec!["quartic".into()],
            tests: vec![TestSpec {
                t_center: 0.5,
                t_radius: 0.4,
                x_center: 0.0,
                x_radius: 1.5,
                p: 4,
            }],
            k_values: vec![],
            xi_values: vec![],
            checks: vec!["random_representation".into()],
            quadrature: QuadratureSpec::default(),
            tolerances: Tolerances::default(),
        },
        other => return Err(Error::UnknownName(format!("scenario `{other}`"))),
    };
    Ok(cfg)
}

/// One verified quantity.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckRecord {
    pub check_id: String,
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn compare(check_id: String, anchor: &str, lhs: f64, rhs: f64, tol: f64, relative: bool) -> Self {
        let abs_err = (lhs - rhs).abs();
        let rel_err = abs_err / lhs.abs().max(rhs.abs()).max(1e-30);
        let pass = if relative { rel_err <= tol } else { abs_err <= tol };
        Self { check_id, anchor: anchor.into(), lhs, rhs, abs_err, rel_err, pass }
    }

    /// An upper-bound check: passes when lhs <= rhs.
    fn bound(check_id: String, anchor: &str, lhs: f64, rhs: f64) -> Self {
        let abs_err = (lhs - rhs).max(0.0);
        let rel_err = abs_err / rhs.abs().max(1e-30);
        Self { check_id, anchor: anchor.into(), lhs, rhs, abs_err, rel_err, pass: lhs <= rhs }
    }

    fn failure(check_id: String, anchor: &str, err: &Error) -> Self {
        Self {
            check_id,
            anchor: format!("{anchor}: {err}"),
            lhs: f64::NAN,
            rhs: f64::NAN,
            abs_err: f64::INFINITY,
            rel_err: f64::INFINITY,
            pass: false,
        }
    }
}

/// Full result of one scenario run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub config_sha256: String,
    pub quadrature: QuadratureSpec,
    pub wall_ms: f64,
    pub checks: Vec<CheckRecord>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"check_id,anchor,lhs,rhs,abs_err,rel_err,pass\n")?;
        for c in &self.checks {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e},{}",
                c.check_id,
                c.anchor.replace(',', ";"),
                c.lhs,
                c.rhs,
                c.abs_err,
                c.rel_err,
                c.pass
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

/// Write the report under `dir` as `<scenario>.json` or `<scenario>.csv`.
pub fn emit(report: &RunReport, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = match format {
        ReportFormat::Json => {
            let p = dir.join(format!("{}.json", report.scenario));
            std::fs::write(&p, report.to_json())?;
            p
        }
        ReportFormat::Csv => {
            let p = dir.join(format!("{}.csv", report.scenario));
            let mut f = std::fs::File::create(&p)?;
            report.write_csv(&mut f)?;
            p
        }
    };
    Ok(path)
}

/// CSV for a k -> mu_k sweep: columns `k,value`.
pub fn write_curve_csv<W: Write>(curve: &KruzkovCurve, mut w: W) -> Result<()> {
    w.write_all(b"k,value\n")?;
    for (&k, &v) in curve.k_grid.iter().zip(&curve.values) {
        writeln!(w, "{k:e},{v:e}")?;
    }
    Ok(())
}

/// Level sweeps k -> mu_k for every test function of a scenario, on the
/// default grid over the working span. Finite-volume scenarios use the
/// finest listed mesh; random scenarios are not sweepable.
pub fn scenario_curves(cfg: &ScenarioConfig) -> Result<Vec<(String, KruzkovCurve)>> {
    cfg.validate()?;
    let flux = FluxFunction::builtin(&cfg.flux)?;
    let source = SourceFunction::builtin(&cfg.source)?;
    let spec = cfg.quadrature;
    let built = match &cfg.field {
        FieldSpec::Fv { x_lo, x_hi, u_l, u_r, n_cells } => {
            let n = *n_cells.last().ok_or_else(|| {
                Error::Config("finite-volume scenario lists no resolutions".into())
            })?;
            let datum = riemann_datum(*u_l, *u_r);
            let grid = fv_solve(
                &flux,
                &source,
                &datum,
                &FVConfig {
                    x_lo: *x_lo,
                    x_hi: *x_hi,
                    n_cells: n,
                    t_end: cfg.t_end,
                    ..FVConfig::default()
                },
            )?;
            Built { field: Box::new(grid), datum }
        }
        FieldSpec::RandomPiecewise { .. } => {
            return Err(Error::Config("random scenarios have no canonical curve".into()))
        }
        _ => build_exact_field(cfg)?,
    };
    let span = working_span(built.field.as_ref(), &built.datum);
    let grid = crate::production::default_k_grid(span);
    let mut out = Vec::new();
    for (i, t) in cfg.tests.iter().enumerate() {
        let phi = t.build();
        let curve =
            kruzkov_curve(&grid, built.field.as_ref(), &built.datum, &flux, &source, &phi, &spec)?;
        out.push((format!("phi{i}"), curve));
    }
    Ok(out)
}

/// Integral over t of phi(t, s t): the line integral along a speed-s ray
/// from the origin (the shock-rate normalization).
pub fn line_integral(phi: &TestFunction, speed: f64, spec: &QuadratureSpec) -> f64 {
    let (t0, t1) = phi.t_support();
    integrate_1d(&|t| phi.eval(t, speed * t), t0, t1, &[], spec).value
}

struct Built {
    field: Box<dyn Field>,
    datum: InitialDatum,
}

fn build_exact_field(cfg: &ScenarioConfig) -> Result<Built> {
    match &cfg.field {
        FieldSpec::Riemann { u_l, u_r, entropic } => {
            let field: Box<dyn Field> = if *entropic {
                Box::new(riemann_burgers(*u_l, *u_r, cfg.t_end)?)
            } else {
                Box::new(nonentropic_shock_burgers(*u_l, *u_r, cfg.t_end)?)
            };
            Ok(Built { field, datum: riemann_datum(*u_l, *u_r) })
        }
        FieldSpec::Characteristic { name } => match name.as_str() {
            "quadratic_transport" => Ok(Built {
                field: Box::new(quadratic_transport_solution(cfg.t_end)),
                datum: quadratic_transport_datum(),
            }),
            other => Err(Error::UnknownName(format!("characteristic solution `{other}`"))),
        },
        _ => Err(Error::Config("scenario check needs an exact field".into())),
    }
}

/// Random piecewise-constant field with straight-line interfaces, plus
/// the matching t = 0 datum. Not a weak solution in general.
fn random_field(
    rng: &mut ChaCha8Rng,
    x_lo: f64,
    x_hi: f64,
    t_end: f64,
) -> Result<(AnalyticPiecewiseField, InitialDatum)> {
    let n_if = rng.gen_range(2..=4usize);
    let width = x_hi - x_lo;
    // Interfaces start on a jittered lattice and move slowly, so they
    // cannot cross before t_end.
    let mut regions = Vec::new();
    let mut interfaces: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>> = Vec::new();
    let mut positions = Vec::new();
    let mut speeds = Vec::new();
    let cell = width / (n_if + 1) as f64;
    let max_speed = 0.2 * cell / t_end.max(1e-9);
    for j in 0..n_if {
        let base = x_lo + cell * (j + 1) as f64;
        positions.push(base + rng.gen_range(-0.2..0.2) * cell);
        speeds.push(rng.gen_range(-max_speed..max_speed));
    }
    let mut states = Vec::new();
    for j in 0..=n_if {
        let mut s: f64 = rng.gen_range(-1.0..1.5);
        if j > 0 {
            // Keep adjacent states separated so every interface is a jump.
            while (s - states[j - 1] as f64).abs() < 0.1 {
                s = rng.gen_range(-1.0..1.5);
            }
        }
        states.push(s);
        regions.push(Region::Constant(s));
    }
    for (&p, &v) in positions.iter().zip(&speeds) {
        interfaces.push(Arc::new(move |t: f64| p + v * t));
    }
    let lo = states.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = states.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let field = AnalyticPiecewiseField::new(regions, interfaces, (lo, hi), t_end)?;
    let datum = InitialDatum::piecewise_constant(positions, states)?;
    Ok((field, datum))
}

/// Jump oracle for a two-state Riemann field: the rate of production of
/// E across a speed-s discontinuity, computed from the jump conditions
/// directly (s [E] - [F], with F the matching entropy flux).
fn jump_rate(
    e: &Entropy1D<f64>,
    f: &FluxFunction,
    u_l: f64,
    u_r: f64,
    speed: f64,
    spec: &QuadratureSpec,
) -> f64 {
    let e_jump = e.eval(u_r) - e.eval(u_l);
    // F(u_r) - F(u_l) = int_{u_l}^{u_r} E'(w) f'(w) dw (oriented).
    let df = &f.df_du;
    let (lo, hi) = (u_l.min(u_r), u_l.max(u_r));
    let fe_jump = integrate_1d(&|w| e.deriv(w, spec) * df(0.0, 0.0, w), lo, hi, &[], spec)
        .value
        * (u_r - u_l).signum();
    speed * e_jump - fe_jump
}

fn kruzkov_jump_rate(f: &FluxFunction, u_l: f64, u_r: f64, speed: f64, k: f64) -> f64 {
    let e_jump = (u_r - k).abs() - (u_l - k).abs();
    let phi_jump = crate::flux::phi_jump(f, 0.0, 0.0, u_r, k) - crate::flux::phi_jump(f, 0.0, 0.0, u_l, k);
    speed * e_jump - phi_jump
}

type CheckJob<'a> = Box<dyn FnOnce() -> Vec<CheckRecord> + Send + 'a>;

fn run_jobs(jobs: Vec<CheckJob<'_>>, workers: usize) -> Vec<CheckRecord> {
    let workers = workers.max(1).min(jobs.len().max(1));
    if workers == 1 {
        return jobs.into_iter().flat_map(|j| j()).collect();
    }
    let slots: Vec<Mutex<Option<CheckJob<'_>>>> =
        jobs.into_iter().map(|j| Mutex::new(Some(j))).collect();
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Vec<CheckRecord>>> =
        (0..slots.len()).map(|_| Mutex::new(Vec::new())).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= slots.len() {
                    break;
                }
                let job = slots[i].lock().unwrap().take().expect("job taken once");
                *results[i].lock().unwrap() = job();
            });
        }
    });
    results.into_iter().flat_map(|m| m.into_inner().unwrap()).collect()
}

/// Execute every check listed in the config. Numerical failures become
/// failed records; only configuration problems abort the run.
pub fn run_scenario(cfg: &ScenarioConfig, workers: usize) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let flux = FluxFunction::builtin(&cfg.flux)?;
    let source = SourceFunction::builtin(&cfg.source)?;
    let phis: Vec<TestFunction> = cfg.tests.iter().map(|t| t.build()).collect();
    let spec = cfg.quadrature;
    let tol = cfg.tolerances.clone();

    // A scenario without entropies can only ever report the residual.
    let checks: Vec<String> = if cfg.entropies.is_empty()
        && cfg.checks.iter().any(|c| c == "representation" || c == "annihilation")
    {
        vec!["residual".into()]
    } else {
        cfg.checks.clone()
    };

    let mut jobs: Vec<CheckJob<'_>> = Vec::new();
    for check in &checks {
        let check = check.clone();
        let flux = &flux;
        let source = &source;
        let phis = &phis;
        let tol = &tol;
        jobs.push(Box::new(move || {
            run_check(&check, cfg, flux, source, phis, &spec, tol).unwrap_or_else(|e| {
                vec![CheckRecord::failure(check.clone(), "check aborted", &e)]
            })
        }));
    }
    let checks = run_jobs(jobs, workers);
    Ok(RunReport {
        scenario: cfg.name.clone(),
        config_sha256: cfg.hash(),
        quadrature: spec,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        checks,
    })
}

fn riemann_params(cfg: &ScenarioConfig) -> Result<(f64, f64, f64)> {
    match &cfg.field {
        FieldSpec::Riemann { u_l, u_r, .. } => Ok((*u_l, *u_r, 0.5 * (u_l + u_r))),
        _ => Err(Error::Config("check requires a Riemann field".into())),
    }
}

fn run_check(
    check: &str,
    cfg: &ScenarioConfig,
    flux: &FluxFunction,
    source: &SourceFunction,
    phis: &[TestFunction],
    spec: &QuadratureSpec,
    tol: &Tolerances,
) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    match check {
        "dissipation" => {
            let b = build_exact_field(cfg)?;
            let (u_l, u_r, speed) = riemann_params(cfg)?;
            let e = Entropy1D::quadratic_half();
            for (i, phi) in phis.iter().enumerate() {
                let lhs = production(&e, b.field.as_ref(), &b.datum, flux, source, phi, spec)?
                    .value;
                let rhs = jump_rate(&e, flux, u_l, u_r, speed, spec)
                    * line_integral(phi, speed, spec);
                out.push(CheckRecord::compare(
                    format!("dissipation/phi{i}"),
                    "shock dissipation rate of the half-square entropy",
                    lhs,
                    rhs,
                    tol.dissipation_rel,
                    true,
                ));
            }
        }
        "kruzkov_density" => {
            let b = build_exact_field(cfg)?;
            let (u_l, u_r, speed) = riemann_params(cfg)?;
            for (i, phi) in phis.iter().enumerate() {
                let line = line_integral(phi, speed, spec);
                for &k in &cfg.k_values {
                    let lhs =
                        kruzkov(k, b.field.as_ref(), &b.datum, flux, source, phi, spec)?.value
                            / line;
                    let rhs = kruzkov_jump_rate(flux, u_l, u_r, speed, k);
                    out.push(CheckRecord::compare(
                        format!("kruzkov_density/phi{i}/k={k}"),
                        "level production density against the jump oracle",
                        lhs,
                        rhs,
                        tol.density_abs,
                        false,
                    ));
                }
            }
        }
        "midpoint" => {
            let b = build_exact_field(cfg)?;
            let (u_l, u_r, _) = riemann_params(cfg)?;
            let kbar = u_l.max(u_r);
            let eps = 1e-3;
            for (i, phi) in phis.iter().enumerate() {
                let at = |k: f64| -> Result<f64> {
                    Ok(kruzkov(k, b.field.as_ref(), &b.datum, flux, source, phi, spec)?.value)
                };
                let lhs = at(kbar)?;
                let rhs = 0.5 * (at(kbar - eps)? + at(kbar + eps)?);
                out.push(CheckRecord::compare(
                    format!("midpoint/phi{i}"),
                    "midpoint value at a kink of the level curve",
                    lhs,
                    rhs,
                    tol.midpoint * phi.c1_norm(),
                    false,
                ));
            }
        }
        "residual" => {
            let b = build_exact_field(cfg)?;
            let lhs = solution_residual(b.field.as_ref(), &b.datum, flux, source, phis, spec)?;
            out.push(CheckRecord::bound(
                "residual".into(),
                "identity-entropy production per unit C1 norm",
                lhs,
                tol.residual,
            ));
        }
        "rarefaction_flat" => {
            let b = build_exact_field(cfg)?;
            let span = working_span(b.field.as_ref(), &b.datum);
            let grid = crate::production::default_k_grid(span);
            for (i, phi) in phis.iter().enumerate() {
                let curve =
                    kruzkov_curve(&grid, b.field.as_ref(), &b.datum, flux, source, phi, spec)?;
                let worst = curve.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                out.push(CheckRecord::bound(
                    format!("rarefaction_flat/phi{i}"),
                    "level productions vanish on the rarefaction",
                    worst,
                    tol.density_abs * phi.c1_norm(),
                ));
            }
        }
        "sign_separation" => {
            let b = build_exact_field(cfg)?;
            let (u_l, u_r, speed) = riemann_params(cfg)?;
            for (i, phi) in phis.iter().enumerate() {
                let line = line_integral(phi, speed, spec);
                for &k in &cfg.k_values {
                    let ratio =
                        kruzkov(k, b.field.as_ref(), &b.datum, flux, source, phi, spec)?.value
                            / line;
                    out.push(CheckRecord::bound(
                        format!("sign_separation/phi{i}/k={k}"),
                        "non-entropic shock produces strictly negative level mass",
                        ratio,
                        -0.2,
                    ));
                    let rhs = kruzkov_jump_rate(flux, u_l, u_r, speed, k);
                    out.push(CheckRecord::compare(
                        format!("sign_separation_value/phi{i}/k={k}"),
                        "negative density against the jump oracle",
                        ratio,
                        rhs,
                        tol.density_abs,
                        false,
                    ));
                }
            }
        }
        "representation" => {
            let b = build_exact_field(cfg)?;
            let span = working_span(b.field.as_ref(), &b.datum);
            for name in &cfg.entropies {
                let e = entropy_builtin(name)?;
                if e.second_deriv(0.0).is_none() {
                    continue;
                }
                for (i, phi) in phis.iter().enumerate() {
                    let rep =
                        represent_c2(&e, b.field.as_ref(), &b.datum, flux, source, phi, spec)?;
                    out.push(CheckRecord::compare(
                        format!("representation/{name}/phi{i}"),
                        "production equals the level-density representation",
                        rep.lhs,
                        rep.rhs,
                        tol.representation_rel,
                        true,
                    ));
                    out.push(CheckRecord::bound(
                        format!("representation_boundary/{name}/phi{i}"),
                        "boundary term vanishes on exact solutions",
                        rep.boundary_term.abs(),
                        tol.boundary_abs,
                    ));
                    let acr = e.c2_as_acr(span)?;
                    let rep2 =
                        represent_acr(&acr, b.field.as_ref(), &b.datum, flux, source, phi, spec)?;
                    out.push(CheckRecord::compare(
                        format!("representation_stieltjes/{name}/phi{i}"),
                        "Stieltjes variant agrees with the density variant",
                        rep2.rhs,
                        rep.rhs,
                        tol.acr_match_abs,
                        false,
                    ));
                }
            }
            // Atom recovery through the Stieltjes variant.
            let c = 0.5 * (span.0 + span.1) - 0.1 * (span.1 - span.0);
            let e = Entropy1D::kruzkov(c, span);
            for (i, phi) in phis.iter().enumerate() {
                let rep = represent_acr(&e, b.field.as_ref(), &b.datum, flux, source, phi, spec)?;
                let mu_c = kruzkov(c, b.field.as_ref(), &b.datum, flux, source, phi, spec)?.value;
                out.push(CheckRecord::compare(
                    format!("representation_atom/phi{i}"),
                    "kink entropy recovers the single level production",
                    rep.lhs,
                    mu_c,
                    tol.atom_abs,
                    false,
                ));
            }
        }
        "fourier" => {
            let b = build_exact_field(cfg)?;
            let span = working_span(b.field.as_ref(), &b.datum);
            let xis: Vec<Complex64> =
                cfg.xi_values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            for (i, phi) in phis.iter().enumerate() {
                let samples =
                    kruzkov_samples(span, b.field.as_ref(), &b.datum, flux, source, phi, spec)?;
                let rows = fourier_check(
                    &xis,
                    &samples,
                    b.field.as_ref(),
                    &b.datum,
                    flux,
                    source,
                    phi,
                    spec,
                )?;
                for row in &rows {
                    out.push(CheckRecord::bound(
                        format!("fourier/phi{i}/xi={}", row.xi),
                        "transform of the level curve equals the entropy route",
                        row.abs_err,
                        tol.fourier_rel * (1.0 + row.muhat.norm()),
                    ));
                }
                // Moment series at xi = 1 against the direct transform.
                let moments = moment_series(&samples, 21);
                let partial: Complex64 = moments.iter().sum();
                let direct = mu_hat(&samples, Complex64::new(1.0, 0.0));
                out.push(CheckRecord::compare(
                    format!("fourier_moments/phi{i}"),
                    "moment series partial sum at xi = 1",
                    (partial - direct).norm(),
                    0.0,
                    tol.moment_abs,
                    false,
                ));
            }
        }
        "invariance" => {
            let b = build_exact_field(cfg)?;
            let offset = 0.7;
            let base = flux.clone();
            let shifted = FluxFunction {
                f: {
                    let f = base.f.clone();
                    Arc::new(move |t, x, u| f(t, x, u) + offset)
                },
                df_du: base.df_du.clone(),
                df_dx: base.df_dx.clone(),
                d2f_dtdu: base.d2f_dtdu.clone(),
                d2f_dxdu: base.d2f_dxdu.clone(),
                x_independent: base.x_independent,
            };
            for name in &cfg.entropies {
                let e = entropy_builtin(name)?;
                for (i, phi) in phis.iter().enumerate() {
                    let p1 =
                        production(&e, b.field.as_ref(), &b.datum, flux, source, phi, spec)?
                            .value;
                    let pair = crate::entropy::entropy_flux(&e, &shifted, spec);
                    let p2 = production_with_flux(
                        &e,
                        &pair,
                        b.field.as_ref(),
                        &b.datum,
                        &shifted,
                        source,
                        phi,
                        spec,
                    )?
                    .value;
                    out.push(CheckRecord::compare(
                        format!("invariance_flux_offset/{name}/phi{i}"),
                        "production unchanged by a constant flux offset",
                        p1,
                        p2,
                        tol.invariance_abs,
                        false,
                    ));
                }
            }
        }
        "annihilation" => {
            let b = build_exact_field(cfg)?;
            for name in &cfg.entropies {
                let e = entropy_builtin(name)?;
                for (i, phi) in phis.iter().enumerate() {
                    let p = production(&e, b.field.as_ref(), &b.datum, flux, source, phi, spec)?
                        .value;
                    out.push(CheckRecord::bound(
                        format!("annihilation/{name}/phi{i}"),
                        "strong solutions annihilate every entropy production",
                        p.abs() / phi.c1_norm(),
                        tol.annihilation,
                    ));
                }
            }
        }
        "fv_order" | "fv_curve_bound" => {
            let FieldSpec::Fv { x_lo, x_hi, u_l, u_r, ref n_cells } = cfg.field else {
                return Err(Error::Config("check requires a finite-volume field".into()));
            };
            if n_cells.len() < 2 {
                return Err(Error::Config("finite-volume ladder needs >= 2 resolutions".into()));
            }
            let datum = riemann_datum(u_l, u_r);
            if check == "fv_order" {
                let mut residuals = Vec::new();
                for &n in n_cells {
                    let grid = fv_solve(
                        flux,
                        source,
                        &datum,
                        &FVConfig { x_lo, x_hi, n_cells: n, t_end: cfg.t_end, ..FVConfig::default() },
                    )?;
                    residuals.push(solution_residual(&grid, &datum, flux, source, phis, spec)?);
                }
                let n0 = n_cells[0] as f64;
                let n1 = *n_cells.last().unwrap() as f64;
                let order = (residuals[0] / residuals[residuals.len() - 1]).ln() / (n1 / n0).ln();
                out.push(CheckRecord::bound(
                    "fv_order".into(),
                    "weak residual decays with mesh refinement",
                    -order,
                    -tol.fv_order_min,
                ));
            } else {
                let n = *n_cells.last().unwrap();
                let dx = (x_hi - x_lo) / n as f64;
                let grid = fv_solve(
                    flux,
                    source,
                    &datum,
                    &FVConfig { x_lo, x_hi, n_cells: n, t_end: cfg.t_end, ..FVConfig::default() },
                )?;
                let span = working_span(&grid, &datum);
                let kgrid = crate::production::default_k_grid(span);
                for (i, phi) in phis.iter().enumerate() {
                    let curve = kruzkov_curve(&kgrid, &grid, &datum, flux, source, phi, spec)?;
                    let min = curve.values.iter().cloned().fold(f64::INFINITY, f64::min);
                    out.push(CheckRecord::bound(
                        format!("fv_curve_bound/phi{i}"),
                        "numerical level productions are nonnegative up to O(dx)",
                        -min,
                        tol.fv_curve_slack * dx * phi.c1_norm(),
                    ));
                }
            }
        }
        "random_representation" => {
            let FieldSpec::RandomPiecewise { count, x_lo, x_hi } = cfg.field else {
                return Err(Error::Config("check requires a random piecewise field".into()));
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for trial in 0..count {
                let (field, datum) = random_field(&mut rng, x_lo, x_hi, cfg.t_end)?;
                for name in &cfg.entropies {
                    let e = entropy_builtin(name)?;
                    for (i, phi) in phis.iter().enumerate() {
                        let rep = represent_c2(&e, &field, &datum, flux, source, phi, spec)?;
                        out.push(CheckRecord::compare(
                            format!("random_representation/{trial}/{name}/phi{i}"),
                            "representation formula on a random non-solution field",
                            rep.lhs,
                            rep.rhs,
                            tol.representation_rel,
                            true,
                        ));
                    }
                }
            }
        }
        other => return Err(Error::Config(format!("unknown check `{other}`"))),
    }
    Ok(out)
}
