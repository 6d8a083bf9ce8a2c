//! Run configuration, pipeline dispatch and parameter sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{build_clifford, SpherePoint};
use crate::error::{Error, Result};
use crate::lie::{self, holonomy, levi_civita, validate_structure};
use crate::presets::{self, AlgebraSpec, AlgebraFile, CATALOG};
use crate::product::{gxg_pipeline, ProductParams};
use crate::report::{CheckRecord, InputEcho, Num, VerificationReport};
use crate::spinor::spinor_pipeline;
use crate::tangent::{direct_product_pipeline, tangent_pipeline, TangentMetricParams};
use crate::tol::Tolerance;
use crate::ts7::ts7_pipeline;

pub use crate::spinor::DEFAULT_SEED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Tangent,
    DirectProductCrosscheck,
    Gxg,
    S7,
    Spinor,
    ValidateAlgebra,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::Tangent,
        Pipeline::DirectProductCrosscheck,
        Pipeline::Gxg,
        Pipeline::S7,
        Pipeline::Spinor,
        Pipeline::ValidateAlgebra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Tangent => "tangent",
            Pipeline::DirectProductCrosscheck => "direct-product-crosscheck",
            Pipeline::Gxg => "gxg",
            Pipeline::S7 => "s7",
            Pipeline::Spinor => "spinor",
            Pipeline::ValidateAlgebra => "validate-algebra",
        }
    }

    /// Parameters the pipeline needs, then the ones it accepts optionally.
    fn params(self) -> (&'static [&'static str], &'static [&'static str]) {
        const POINT: &[&str] = &["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"];
        match self {
            Pipeline::Tangent | Pipeline::DirectProductCrosscheck | Pipeline::Spinor => (&["a", "b"], &[]),
            Pipeline::Gxg => (&["a", "b", "c", "d", "lambda"], &[]),
            Pipeline::S7 => (&["a", "b"], POINT),
            Pipeline::ValidateAlgebra => (&[], &[]),
        }
    }

    /// Ranges for random sweeps.
    fn sample_params(self, rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        match self {
            Pipeline::Gxg => {
                for k in ["a", "b", "c", "d"] {
                    out.insert(k.to_string(), rng.random_range(-2.0..2.0));
                }
                out.insert("lambda".into(), rng.random_range(0.2..3.0));
            }
            Pipeline::ValidateAlgebra => {}
            _ => {
                let a: f64 = rng.random_range(0.2..3.0);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                out.insert("a".into(), sign * a);
                out.insert("b".into(), rng.random_range(-3.0..3.0));
            }
        }
        out
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Pipeline::ALL.iter().map(|p| p.name()).collect();
            Error::Config(format!("unknown pipeline '{s}'; available: {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraSource {
    Preset(String),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    pub algebra: Option<AlgebraSource>,
    pub params: BTreeMap<String, f64>,
    /// Sphere points for `s7`; ignored elsewhere.
    pub samples: Option<usize>,
    pub seed: u64,
    pub tolerance: Tolerance,
}

impl RunConfig {
    pub fn new(pipeline: Pipeline) -> Self {
        RunConfig {
            pipeline,
            algebra: None,
            params: BTreeMap::new(),
            samples: None,
            seed: DEFAULT_SEED,
            tolerance: Tolerance::default(),
        }
    }

    pub fn algebra(mut self, name: &str) -> Self {
        self.algebra = Some(AlgebraSource::Preset(name.to_string()));
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str) -> f64 {
        self.params[key]
    }

    fn check_params(&self) -> Result<()> {
        let (required, optional) = self.pipeline.params();
        for k in required {
            if !self.params.contains_key(*k) {
                return Err(Error::Config(format!("pipeline {} needs parameter '{k}'", self.pipeline)));
            }
        }
        for (k, v) in &self.params {
            if !required.contains(&k.as_str()) && !optional.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "pipeline {} does not take parameter '{k}'; expected {}",
                    self.pipeline,
                    required.join(", ")
                )));
            }
            if !v.is_finite() {
                return Err(Error::Config(format!("parameter '{k}' is not finite")));
            }
        }
        let point = optional.iter().filter(|k| self.params.contains_key(**k)).count();
        if point != 0 && point != optional.len() {
            return Err(Error::Config("a sphere point needs all of x1..x8".into()));
        }
        if self.samples == Some(0) {
            return Err(Error::Config("samples must be positive".into()));
        }
        Ok(())
    }

    fn load_algebra(&self, default: &str) -> Result<AlgebraSpec> {
        match &self.algebra {
            None => presets::preset(default),
            Some(AlgebraSource::Preset(name)) => presets::preset(name),
            Some(AlgebraSource::File(path)) => presets::load_algebra(path, self.tolerance.abs_tol),
        }
    }
}

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Pass,
    Fail,
    ConfigError,
    Degenerate,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Fail => 1,
            ExitStatus::ConfigError => 2,
            ExitStatus::Degenerate => 3,
        }
    }

    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Degenerate(_) => ExitStatus::Degenerate,
            Error::Config(_)
            | Error::UnknownPreset { .. }
            | Error::Io(_)
            | Error::Parse(_)
            | Error::InvalidTable(_)
            | Error::IndexOutOfRange { .. } => ExitStatus::ConfigError,
            _ => ExitStatus::Fail,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Option<VerificationReport>,
    pub status: ExitStatus,
    pub error: Option<String>,
}

/// Runs one configuration, timing it.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    let start = Instant::now();
    match execute(cfg) {
        Ok(mut rep) => {
            rep.wall_time_s = Num(start.elapsed().as_secs_f64());
            let status = if rep.pass { ExitStatus::Pass } else { ExitStatus::Fail };
            RunOutcome { report: Some(rep), status, error: None }
        }
        Err(e) => RunOutcome { report: None, status: ExitStatus::of_error(&e), error: Some(e.to_string()) },
    }
}

/// Builds the report without timing.
pub fn execute(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.check_params()?;
    let tol = &cfg.tolerance;
    let tangent = || TangentMetricParams::new(cfg.get("a"), cfg.get("b"));
    match cfg.pipeline {
        Pipeline::Tangent => tangent_pipeline(&cfg.load_algebra("su2")?, tangent()?, tol),
        Pipeline::DirectProductCrosscheck => direct_product_pipeline(&cfg.load_algebra("su2")?, tangent()?, tol),
        Pipeline::Gxg => {
            let p = ProductParams::new(cfg.get("a"), cfg.get("b"), cfg.get("c"), cfg.get("d"), cfg.get("lambda"))?;
            gxg_pipeline(&p, &cfg.load_algebra("su2")?, tol)
        }
        Pipeline::S7 => {
            require_no_algebra(cfg, "s7")?;
            run_s7(cfg, tangent()?)
        }
        Pipeline::Spinor => {
            if let Some(src) = &cfg.algebra {
                if *src != AlgebraSource::Preset("su2".into()) {
                    return Err(Error::Config("the spinor pipeline is defined on su2 only".into()));
                }
            }
            spinor_pipeline(tangent()?, cfg.seed, tol)
        }
        Pipeline::ValidateAlgebra => validate_algebra(cfg),
    }
}

fn require_no_algebra(cfg: &RunConfig, name: &str) -> Result<()> {
    match cfg.algebra {
        None => Ok(()),
        Some(_) => Err(Error::Config(format!("pipeline {name} has a fixed model and takes no algebra"))),
    }
}

/// Seeded point `i` on the unit sphere in ℝ⁸.
pub fn sphere_sample(seed: u64, i: u64) -> SpherePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    loop {
        let v: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(x) = SpherePoint::normalized(DVector::from_vec(v)) {
            return x;
        }
    }
}

fn run_s7(cfg: &RunConfig, p: TangentMetricParams) -> Result<VerificationReport> {
    let rep = build_clifford(7)?;
    if cfg.params.contains_key("x1") {
        let x: Vec<f64> = (1..=8).map(|i| cfg.get(&format!("x{i}"))).collect();
        let x = SpherePoint::normalized(DVector::from_vec(x)).map_err(|e| Error::Config(e.to_string()))?;
        return ts7_pipeline(&rep, p, &x, &cfg.tolerance);
    }
    let samples = cfg.samples.unwrap_or(1);
    let reports = (0..samples as u64)
        .into_par_iter()
        .map(|i| ts7_pipeline(&rep, p, &sphere_sample(cfg.seed, i), &cfg.tolerance))
        .collect::<Result<Vec<_>>>()?;
    let params = [("a".to_string(), Num(p.a)), ("b".to_string(), Num(p.b))].into_iter().collect();
    let echo = InputEcho { algebra: Some("s7xr7".into()), params, samples: Some(samples), seed: Some(cfg.seed) };
    Ok(merge_worst("s7", echo, reports))
}

/// Combines per-sample reports, keeping the worst record of each check.
fn merge_worst(pipeline: &str, echo: InputEcho, reports: Vec<VerificationReport>) -> VerificationReport {
    let severity = |c: &CheckRecord| {
        let ratio = if c.tolerance.0 > 0.0 { c.residual.0 / c.tolerance.0 } else { c.residual.0 * f64::MAX.sqrt() };
        (!c.pass, ratio)
    };
    let mut out = VerificationReport::new(pipeline, echo);
    let mut first = true;
    for r in reports {
        if first {
            out.checks = r.checks;
            out.observations = r.observations;
            first = false;
            continue;
        }
        for c in r.checks {
            match out.checks.iter_mut().find(|o| o.name == c.name) {
                Some(o) => {
                    if severity(&c).partial_cmp(&severity(o)) == Some(std::cmp::Ordering::Greater) {
                        *o = c;
                    }
                }
                None => out.checks.push(c),
            }
        }
    }
    out.recompute_pass();
    out
}

fn validate_algebra(cfg: &RunConfig) -> Result<VerificationReport> {
    let abs = cfg.tolerance.abs_tol;
    let spec = match &cfg.algebra {
        None => return Err(Error::Config(format!("validate-algebra needs an algebra; presets: {}", CATALOG.join(", ")))),
        Some(AlgebraSource::Preset(name)) => presets::preset(name)?,
        Some(AlgebraSource::File(path)) => {
            let file: AlgebraFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            presets::complete_entries(&file, abs)?
        }
    };
    let echo = InputEcho { algebra: Some(spec.name.clone()), params: BTreeMap::new(), samples: None, seed: None };
    let mut rep = VerificationReport::new("validate-algebra", echo);
    let c = &spec.table;
    let d = validate_structure(c, true, abs);
    let skew = d.total_skew.unwrap_or(0.0);
    rep.check("jacobi", &[d.jacobi], Some(0.0), d.jacobi, abs);
    rep.check("antisymmetry", &[d.antisymmetry], Some(0.0), d.antisymmetry, abs);
    rep.check("ad_invariant_metric", &[skew], Some(0.0), skew, abs);
    rep.observe("dimension", &[c.dim() as f64], None);
    if rep.pass {
        rep.observe("center_dim", &[lie::center(c).dim() as f64], None);
        rep.observe("derived_dim", &[lie::derived_dim(c) as f64], None);
        let h = holonomy(&levi_civita(c), c)?;
        rep.observe("levi_civita_holonomy_dim", &[h.dim as f64], None);
    }
    Ok(rep)
}

/// Parameter points for a sweep.
#[derive(Debug, Clone)]
pub enum SweepSpec {
    /// Cartesian product of the listed values; the last key varies fastest.
    Grid(BTreeMap<String, Vec<f64>>),
    /// `samples` seeded draws from the pipeline's default ranges.
    Random { samples: usize },
}

impl SweepSpec {
    pub fn points(&self, pipeline: Pipeline, seed: u64) -> Vec<BTreeMap<String, f64>> {
        match self {
            SweepSpec::Grid(axes) => {
                if axes.is_empty() || axes.values().any(Vec::is_empty) {
                    return Vec::new();
                }
                let mut pts = vec![BTreeMap::new()];
                for (k, vals) in axes {
                    pts = pts
                        .into_iter()
                        .flat_map(|p| {
                            vals.iter().map(move |v| {
                                let mut q = p.clone();
                                q.insert(k.clone(), *v);
                                q
                            })
                        })
                        .collect();
                }
                pts
            }
            SweepSpec::Random { samples } => (0..*samples as u64)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i);
                    pipeline.sample_params(&mut rng)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub params: BTreeMap<String, Num>,
    pub status: ExitStatus,
    pub failed_checks: Vec<String>,
    pub curvature_scalar: Option<Num>,
    pub holonomy_dim: Option<Num>,
    pub curvature_max: Option<Num>,
    /// Set when the point sits on a flat locus and the flatness check passed.
    pub flat: bool,
    /// Largest gating residual.
    pub max_residual: Option<Num>,
    pub error: Option<String>,
    pub report: Option<VerificationReport>,
}

#[derive(Debug, Serialize)]
pub struct SweepResult {
    pub pipeline: Pipeline,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
}

/// Runs `base` at every point of `spec` in parallel. Point order follows the
/// spec, independent of scheduling.
pub fn sweep(base: &RunConfig, spec: &SweepSpec) -> Result<SweepResult> {
    let pts = spec.points(base.pipeline, base.seed);
    if let Some(first) = pts.first() {
        let mut cfg = base.clone();
        cfg.params.extend(first.iter().map(|(k, v)| (k.clone(), *v)));
        cfg.check_params()?;
    }
    let points = pts
        .into_par_iter()
        .enumerate()
        .map(|(index, p)| {
            let mut cfg = base.clone();
            cfg.params.extend(p.iter().map(|(k, v)| (k.clone(), *v)));
            let out = run(&cfg);
            let failed_checks = out
                .report
                .as_ref()
                .map(|r| r.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect())
                .unwrap_or_default();
            let r = out.report.as_ref();
            let checked = |name: &str| r.and_then(|r| r.check_named(name)).and_then(|c| c.values.first().copied());
            SweepPoint {
                index,
                params: cfg.params.iter().map(|(k, v)| (k.clone(), Num(*v))).collect(),
                status: out.status,
                failed_checks,
                curvature_scalar: checked("curvature_scalar")
                    .or_else(|| r.and_then(|r| r.observation("curvature_coefficient")).and_then(|o| o.values.first().copied())),
                holonomy_dim: checked("holonomy_dim"),
                curvature_max: r
                    .and_then(|r| r.observation("curvature_max"))
                    .and_then(|o| o.values.first().copied())
                    .or_else(|| checked("flat_curvature")),
                flat: r.and_then(|r| r.check_named("flat_curvature")).is_some_and(|c| c.pass),
                max_residual: r.map(|r| Num(r.checks.iter().map(|c| c.residual.0).fold(0.0, f64::max))),
                error: out.error,
                report: out.report,
            }
        })
        .collect();
    Ok(SweepResult { pipeline: base.pipeline, seed: base.seed, points })
}

impl SweepResult {
    /// 1 when any point failed or errored, otherwise 0. Degenerate points are
    /// listed but do not fail the sweep.
    pub fn status(&self) -> ExitStatus {
        let bad = self.points.iter().any(|p| matches!(p.status, ExitStatus::Fail | ExitStatus::ConfigError));
        if bad {
            ExitStatus::Fail
        } else {
            ExitStatus::Pass
        }
    }

    pub fn count(&self, status: ExitStatus) -> usize {
        self.points.iter().filter(|p| p.status == status).count()
    }

    fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.points.iter().flat_map(|p| p.params.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn to_csv(&self) -> String {
        let keys = self.keys();
        let cell = |v: Option<Num>| v.map(|v| format!("{:.16e}", v.0)).unwrap_or_default();
        let mut out = format!(
            "index,{},status,flat,curvature_scalar,curvature_max,holonomy_dim,max_residual,failed_checks\n",
            keys.join(",")
        );
        for p in &self.points {
            let vals: Vec<String> = keys.iter().map(|k| cell(p.params.get(k).copied())).collect();
            let status = serde_json::to_value(p.status).expect("status serializes");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                p.index,
                vals.join(","),
                status.as_str().unwrap_or_default(),
                p.flat,
                cell(p.curvature_scalar),
                cell(p.curvature_max),
                cell(p.holonomy_dim),
                cell(p.max_residual),
                p.failed_checks.join(";")
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "sweep {} over {} points: {} pass, {} fail, {} degenerate, {} error\n",
            self.pipeline,
            self.points.len(),
            self.count(ExitStatus::Pass),
            self.count(ExitStatus::Fail),
            self.count(ExitStatus::Degenerate),
            self.count(ExitStatus::ConfigError)
        );
        let mut failing: BTreeMap<&str, usize> = BTreeMap::new();
        for p in &self.points {
            for c in &p.failed_checks {
                *failing.entry(c.as_str()).or_default() += 1;
            }
        }
        let flat: Vec<String> = self.points.iter().filter(|p| p.flat).map(|p| p.index.to_string()).collect();
        if !flat.is_empty() {
            out.push_str(&format!("  flat at points {}\n", flat.join(", ")));
        }
        for (name, n) in failing {
            out.push_str(&format!("  {name}: failed at {n} points\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes")
    }
}
