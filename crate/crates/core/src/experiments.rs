//! Convergence, Richardson, ε-sweep and conditioning studies driven by a
//! TOML run configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{assemble_blocks, assemble_calderon_v, Formulation};
use crate::dense_solver::{cond2, ComplexMatrix};
use crate::error::Error;
use crate::geometry::{normalize_eps, ParametricCurve, ScattererConfig, Vec2};
use crate::kernels::point_source;
use crate::potential::{boundary_error, evaluate_field, observation_error, richardson, DensitySolution, FieldSample};

/// Half-width of the excluded band around the integers in ε-sweeps.
pub const EPS_GUARD: f64 = 0.02;
pub const DEFAULT_SWEEP_STEP: f64 = 0.005;
/// Node count of the ε-sweep in the built-in configuration.
pub const DEFAULT_SWEEP_N: usize = 80;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    /// A solve failed; rows computed before the failure are kept.
    #[error("numerical failure: {source}")]
    Numerical { source: Error, partial: Option<Output> },
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    fn numerical(source: Error, partial: Option<Output>) -> Self {
        RunError::Numerical { source, partial }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulationKind {
    Indirect,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    Richardson,
    SweepEps,
    Cond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    Circle { center: [f64; 2], radius: f64 },
}

impl CurveSpec {
    fn build(&self) -> crate::error::Result<ParametricCurve<f64>> {
        match *self {
            CurveSpec::Ellipse { center, a, b } => ParametricCurve::ellipse(Vec2::new(center[0], center[1]), a, b),
            CurveSpec::Circle { center, radius } => ParametricCurve::circle(Vec2::new(center[0], center[1]), radius),
        }
    }
}

/// ε grid of a sweep: `guard, guard + step, ...` up to `1 - guard`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_guard")]
    pub guard: f64,
}

fn default_step() -> f64 {
    DEFAULT_SWEEP_STEP
}

fn default_guard() -> f64 {
    EPS_GUARD
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { step: DEFAULT_SWEEP_STEP, guard: EPS_GUARD }
    }
}

/// One run, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub curves: Vec<CurveSpec>,
    pub k: f64,
    pub eps: f64,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub formulation: FormulationKind,
    pub z0: [f64; 2],
    pub observation_points: Vec<[f64; 2]>,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl RunConfig {
    /// Two ellipses, `k = 1`, source at `(0.1, 0.2)` and five observation
    /// points, with `N = 10, 20, ..., 640` (`N = 80` for an ε-sweep).
    pub fn two_ellipses(experiment: ExperimentKind, eps: f64) -> Self {
        Self {
            curves: vec![
                CurveSpec::Ellipse { center: [0.0, 0.0], a: 1.0, b: 2.0 },
                CurveSpec::Ellipse { center: [4.0, 5.0], a: 2.0, b: 1.0 },
            ],
            k: 1.0,
            eps,
            n_list: if experiment == ExperimentKind::SweepEps {
                vec![DEFAULT_SWEEP_N]
            } else {
                vec![10, 20, 40, 80, 160, 320, 640]
            },
            formulation: FormulationKind::Indirect,
            z0: [0.1, 0.2],
            observation_points: vec![[-4.0, -4.0], [-5.0, -5.5], [-6.0, -7.0], [7.0, 7.6], [-6.8, -6.0]],
            experiment,
            out: None,
            sweep: SweepSpec::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RunError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_owned(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.curves.is_empty() {
            return bad("at least one curve is required".into());
        }
        if self.n_list.is_empty() {
            return bad("N_list is empty".into());
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0] || w[1] % w[0] != 0) {
            return bad(format!("N_list must be strictly increasing, each entry a multiple of the previous: {:?}", self.n_list));
        }
        if matches!(self.experiment, ExperimentKind::Convergence | ExperimentKind::Richardson)
            && self.n_list.windows(2).any(|w| w[1] != 2 * w[0])
        {
            return bad(format!("convergence rates need N to double between rows: {:?}", self.n_list));
        }
        if self.formulation == FormulationKind::Indirect
            && self.observation_points.is_empty()
            && matches!(self.experiment, ExperimentKind::Convergence | ExperimentKind::Richardson | ExperimentKind::SweepEps)
        {
            return bad("observation_points is empty".into());
        }
        if self.experiment != ExperimentKind::SweepEps {
            normalize_eps(self.eps).map_err(|e| RunError::Config(e.to_string()))?;
        }
        let s = &self.sweep;
        if !(s.step > 0.0) || !(s.guard > 0.0) || s.guard >= 0.5 {
            return bad(format!("sweep needs step > 0 and 0 < guard < 1/2, got {s:?}"));
        }
        // geometry, wavenumber and node counts
        self.scatterer(self.n_list[0], if self.experiment == ExperimentKind::SweepEps { 0.25 } else { self.eps })
            .map_err(|e| RunError::Config(e.to_string()))?;
        Ok(())
    }

    /// Non-fatal remarks about parameter choices outside the analysed range.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let e = normalize_eps(self.eps).ok();
        if self.experiment != ExperimentKind::SweepEps && e == Some(0.5) {
            w.push("eps = 1/2 lies outside the convergence analysis; it is run anyway".into());
        }
        if self.experiment == ExperimentKind::Richardson
            && e.is_some_and(|e| (e.abs() - 1.0 / 6.0).abs() > 1e-9)
        {
            w.push(format!("Richardson extrapolation assumes eps = ±1/6, got {}", self.eps));
        }
        w
    }

    pub fn curves(&self) -> crate::error::Result<Vec<ParametricCurve<f64>>> {
        self.curves.iter().map(CurveSpec::build).collect()
    }

    pub fn scatterer(&self, n: usize, eps: f64) -> crate::error::Result<ScattererConfig<f64>> {
        ScattererConfig::uniform(self.curves()?, self.k, n, eps)
    }

    pub fn source(&self) -> Vec2<f64> {
        Vec2::new(self.z0[0], self.z0[1])
    }

    pub fn points(&self) -> Vec<Vec2<f64>> {
        self.observation_points.iter().map(|p| Vec2::new(p[0], p[1])).collect()
    }

    fn formulation(&self) -> Formulation<f64> {
        let source = self.source();
        match self.formulation {
            FormulationKind::Indirect => Formulation::Indirect { source },
            FormulationKind::Direct => Formulation::Direct { source },
        }
    }

    /// Sweep grid, computed from integer multiples of the step so that
    /// values are reproducible.
    pub fn sweep_grid(&self) -> Vec<f64> {
        let SweepSpec { step, guard } = self.sweep;
        let count = ((1.0 - 2.0 * guard) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| ((guard + i as f64 * step) * 1e12).round() / 1e12).collect()
    }
}

/// Estimated convergence rates `log2(e_{r-1} / e_r)`; the first entry and
/// any entry next to a nonpositive error are `None`.
pub fn ecr(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for r in 1..errors.len() {
        let (a, b) = (errors[r - 1], errors[r]);
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            out[r] = Some((a / b).log2());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub error: f64,
    pub ecr: Option<f64>,
}

/// Errors and rates over a sequence of doubling `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<TableRow>,
    pub eps: f64,
    pub formulation: FormulationKind,
    /// What `error` measures.
    pub error_kind: String,
}

impl ConvergenceTable {
    fn new(ns: &[usize], errors: &[f64], eps: f64, formulation: FormulationKind, error_kind: &str) -> Self {
        let rates = ecr(errors);
        let rows = ns.iter().zip(errors).zip(rates).map(|((&n, &error), ecr)| TableRow { n, error, ecr }).collect();
        Self { rows, eps, formulation, error_kind: error_kind.into() }
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    /// `None` when the solve at this ε failed.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    #[serde(rename = "N")]
    pub n: usize,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub cond_vw: f64,
    pub cond_w: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondTable {
    pub eps: f64,
    pub rows: Vec<CondRow>,
}

/// Result of any experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Output {
    Table(ConvergenceTable),
    Sweep(SweepTable),
    Cond(CondTable),
}

fn solve(cfg: &RunConfig, n: usize, eps: f64) -> crate::error::Result<DensitySolution<f64>> {
    DensitySolution::solve(&cfg.scatterer(n, eps)?, cfg.formulation())
}

fn field_error(cfg: &RunConfig, samples: &[FieldSample<f64>]) -> crate::error::Result<f64> {
    let (z0, k) = (cfg.source(), cfg.k);
    observation_error(samples, |z| point_source(z, z0, k))
}

/// Error of one solve: observation error for the indirect method, nodal
/// boundary error against the exact trace for the direct one.
pub fn solution_error(cfg: &RunConfig, sol: &DensitySolution<f64>) -> crate::error::Result<f64> {
    match cfg.formulation {
        FormulationKind::Indirect => field_error(cfg, &evaluate_field(sol, &cfg.points())?),
        FormulationKind::Direct => {
            let curves = sol.config().curves();
            let (z0, k) = (cfg.source(), cfg.k);
            boundary_error(sol, |p, t| point_source(curves[p].point(t), z0, k))
        }
    }
}

fn error_kind(cfg: &RunConfig) -> &'static str {
    match cfg.formulation {
        FormulationKind::Indirect => "max observation-point error",
        FormulationKind::Direct => "max nodal boundary error",
    }
}

/// One solve per `N`, error per formulation, rates between rows.
pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceTable, RunError> {
    cfg.validate()?;
    let mut ns = Vec::new();
    let mut errors = Vec::new();
    for &n in &cfg.n_list {
        match solve(cfg, n, cfg.eps).and_then(|s| solution_error(cfg, &s)) {
            Ok(e) => {
                ns.push(n);
                errors.push(e);
            }
            Err(e) => {
                let partial = ConvergenceTable::new(&ns, &errors, cfg.eps, cfg.formulation, error_kind(cfg));
                return Err(RunError::numerical(e, Some(Output::Table(partial))));
            }
        }
    }
    Ok(ConvergenceTable::new(&ns, &errors, cfg.eps, cfg.formulation, error_kind(cfg)))
}

/// Row `N` extrapolates the potentials computed with `N` and `2N` nodes.
pub fn run_richardson(cfg: &RunConfig) -> Result<ConvergenceTable, RunError> {
    cfg.validate()?;
    if cfg.formulation != FormulationKind::Indirect {
        return Err(RunError::Config("Richardson extrapolation acts on the indirect-method potential".into()));
    }
    let points = cfg.points();
    let mut fields: BTreeMap<usize, Vec<FieldSample<f64>>> = BTreeMap::new();
    let mut field = |n: usize| -> crate::error::Result<Vec<FieldSample<f64>>> {
        if let Some(f) = fields.get(&n) {
            return Ok(f.clone());
        }
        let f = evaluate_field(&solve(cfg, n, cfg.eps)?, &points)?;
        fields.insert(n, f.clone());
        Ok(f)
    };
    let kind = "max observation-point error of the extrapolated potential";
    let mut ns = Vec::new();
    let mut errors = Vec::new();
    for &n in &cfg.n_list {
        let step = field(n).and_then(|c| Ok((c, field(2 * n)?))).and_then(|(c, f)| field_error(cfg, &richardson(&c, &f)?));
        match step {
            Ok(e) => {
                ns.push(n);
                errors.push(e);
            }
            Err(e) => {
                let partial = ConvergenceTable::new(&ns, &errors, cfg.eps, cfg.formulation, kind);
                return Err(RunError::numerical(e, Some(Output::Table(partial))));
            }
        }
    }
    Ok(ConvergenceTable::new(&ns, &errors, cfg.eps, cfg.formulation, kind))
}

/// One solve per ε of the sweep grid at `N = N_list[0]`; failed solves are
/// kept as rows without an error.
pub fn run_sweep_eps(cfg: &RunConfig) -> Result<SweepTable, RunError> {
    cfg.validate()?;
    let n = cfg.n_list[0];
    let rows = cfg
        .sweep_grid()
        .into_par_iter()
        .map(|epsilon| SweepRow { epsilon, error: solve(cfg, n, epsilon).and_then(|s| solution_error(cfg, &s)).ok() })
        .collect();
    Ok(SweepTable { n, rows })
}

/// `cond2(W)` and `cond2(V W)` per `N`.
pub fn run_cond(cfg: &RunConfig) -> Result<CondTable, RunError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        match cond_pair(cfg, n) {
            Ok(r) => rows.push(r),
            Err(e) => return Err(RunError::numerical(e, Some(Output::Cond(CondTable { eps: cfg.eps, rows })))),
        }
    }
    Ok(CondTable { eps: cfg.eps, rows })
}

/// The two matrices of the conditioning study.
pub fn cond_matrices(cfg: &RunConfig, n: usize) -> crate::error::Result<(ComplexMatrix<f64>, ComplexMatrix<f64>)> {
    let sc = cfg.scatterer(n, cfg.eps)?;
    let (blocks, _) = assemble_blocks(&sc)?;
    Ok((assemble_calderon_v(&sc)?, ComplexMatrix::from_blocks(&blocks)?))
}

fn cond_pair(cfg: &RunConfig, n: usize) -> crate::error::Result<CondRow> {
    let (v, w) = cond_matrices(cfg, n)?;
    let cw = cond2(&w)?;
    let cvw = cond2(&v.matmul(&w)?)?;
    Ok(CondRow { n, cond_vw: cvw.value, cond_w: cw.value, converged: cw.converged && cvw.converged })
}

/// Runs the experiment named in the configuration.
pub fn run(cfg: &RunConfig) -> Result<Output, RunError> {
    Ok(match cfg.experiment {
        ExperimentKind::Convergence => Output::Table(run_convergence(cfg)?),
        ExperimentKind::Richardson => Output::Table(run_richardson(cfg)?),
        ExperimentKind::SweepEps => Output::Sweep(run_sweep_eps(cfg)?),
        ExperimentKind::Cond => Output::Cond(run_cond(cfg)?),
    })
}

/// Scientific notation with 10 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

/// CSV text of an experiment result.
pub fn to_csv(out: &Output) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let rec = |w: &mut csv::Writer<Vec<u8>>, fields: &[String]| w.write_record(fields).expect("in-memory write");
    match out {
        Output::Table(t) => {
            rec(&mut w, &["N".into(), "error".into(), "ecr".into()]);
            for r in &t.rows {
                rec(&mut w, &[r.n.to_string(), sci(r.error), r.ecr.map(sci).unwrap_or_default()]);
            }
        }
        Output::Sweep(s) => {
            rec(&mut w, &["epsilon".into(), "error".into()]);
            for r in &s.rows {
                if let Some(e) = r.error {
                    rec(&mut w, &[sci(r.epsilon), sci(e)]);
                }
            }
        }
        Output::Cond(c) => {
            rec(&mut w, &["N".into(), "cond_vw".into(), "cond_w".into()]);
            for r in &c.rows {
                rec(&mut w, &[r.n.to_string(), sci(r.cond_vw), sci(r.cond_w)]);
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    /// Node count actually used by an ε-sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_n: Option<usize>,
    failed_eps: Vec<f64>,
    warnings: Vec<String>,
    crate_version: &'static str,
}

/// JSON record of the configuration that produced `out`.
pub fn sidecar_json(cfg: &RunConfig, out: Option<&Output>) -> String {
    let (sweep_n, failed_eps) = match out {
        Some(Output::Sweep(s)) => (Some(s.n), s.rows.iter().filter(|r| r.error.is_none()).map(|r| r.epsilon).collect()),
        _ => (None, Vec::new()),
    };
    let sc = Sidecar { config: cfg, sweep_n, failed_eps, warnings: cfg.warnings(), crate_version: env!("CARGO_PKG_VERSION") };
    serde_json::to_string_pretty(&sc).expect("sidecar serializes")
}

/// Writes `<out>` (CSV) and `<out>.json` next to it.
pub fn write_outputs(cfg: &RunConfig, out: &Output, path: &Path) -> Result<PathBuf, RunError> {
    let io = |p: &Path| {
        let p = p.to_owned();
        move |source| RunError::Io { path: p, source }
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, to_csv(out)).map_err(io(path))?;
    let side = sidecar_path(path);
    fs::write(&side, sidecar_json(cfg, Some(out))).map_err(io(&side))?;
    Ok(side)
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".json");
    csv.with_file_name(name)
}
