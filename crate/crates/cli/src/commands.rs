//! One function per subcommand. Each returns a [`Report`]; writing it out
//! is left to the caller.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::json;
use xlindley::estimation::{confidence_interval, fit_correlation, linear_model, mse_and_rec, Parameter};
use xlindley::montecarlo::{run_simulation_study, simulate_pivotal_draws, PivotalConfig, StudyConfig, DEFAULT_TAUS, MIN_REPLICATIONS};
use xlindley::tables::{self, Cell, CoefficientKind, Table};
use xlindley::{CensoredSample, Estimator, PivotalKind, PredictionProblem, Predictor, QuantileTable};

use crate::dataset::Dataset;
use crate::report::{Provenance, Report, REPORT_SCHEMA, REPORT_VERSION, TOOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MomentKind {
    Means,
    Cov,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CoeffKind {
    BlueLocation,
    BlueScale,
    BlieLocation,
    BlieScale,
    Efficiency,
    Prediction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EstimatorChoice {
    Blue,
    Blie,
    Both,
}

impl EstimatorChoice {
    fn methods(self) -> Vec<Estimator> {
        match self {
            EstimatorChoice::Blue => vec![Estimator::Blue],
            EstimatorChoice::Blie => vec![Estimator::Blie],
            EstimatorChoice::Both => vec![Estimator::Blue, Estimator::Blie],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PredictorChoice {
    Blup,
    Blip,
    Both,
}

impl PredictorChoice {
    fn methods(self) -> Vec<Predictor> {
        match self {
            PredictorChoice::Blup => vec![Predictor::Blup],
            PredictorChoice::Blip => vec![Predictor::Blip],
            PredictorChoice::Both => vec![Predictor::Blup, Predictor::Blip],
        }
    }
}

/// Interval settings shared by `estimate`, `predict` and `analyze`.
#[derive(Debug, Clone)]
pub struct IntervalRequest {
    pub level: f64,
    pub table: QuantileTable,
    pub path: PathBuf,
}

impl IntervalRequest {
    /// Intervals are built only from a persisted table, never by simulating
    /// on the fly.
    pub fn from_args(level: Option<f64>, table: Option<&Path>) -> Result<Option<Self>> {
        match (level, table) {
            (None, None) => Ok(None),
            (Some(level), None) => bail!("--level {level} needs --quantile-table; generate one with `xlindley simulate`"),
            (level, Some(path)) => {
                let table = QuantileTable::load(path).with_context(|| format!("loading quantile table {}", path.display()))?;
                Ok(Some(Self { level: level.unwrap_or(0.95), table, path: path.to_path_buf() }))
            }
        }
    }

    /// Adds the replication count and seed of the entries actually used.
    fn stamp(&self, prov: &mut Provenance, kind: PivotalKind, psi: f64, n: usize, m: usize, q: Option<usize>) {
        prov.level = Some(self.level);
        prov.quantile_table = Some(self.path.display().to_string());
        let tau = (1.0 - self.level) / 2.0;
        if let Some(e) = self.table.get(kind, psi, n, m, q, tau) {
            prov.reps = Some(e.reps);
            prov.seed = Some(e.seed);
        }
    }
}

fn check_psi(psi: f64) -> Result<f64> {
    if psi > 0.0 && psi.is_finite() {
        Ok(psi)
    } else {
        bail!("--psi must be positive, got {psi}")
    }
}

pub fn moments(ns: &[usize], psis: &[f64], kind: MomentKind) -> Result<Report> {
    for &p in psis {
        check_psi(p)?;
    }
    let table = match kind {
        MomentKind::Means => tables::means_table(ns, psis)?,
        MomentKind::Cov => tables::covariance_table(ns, psis)?,
        MomentKind::Raw => tables::second_moment_table(ns, psis)?,
    };
    let prov = Provenance { psi: psis.to_vec(), n: ns.to_vec(), ..Provenance::new() };
    Ok(Report::new("moments", prov).with(table))
}

pub fn coeffs(ns: &[usize], m: Option<usize>, q: Option<usize>, psis: &[f64], kind: CoeffKind) -> Result<Report> {
    for &p in psis {
        check_psi(p)?;
    }
    let schemes: Vec<(usize, usize)> = match m {
        Some(m) => ns.iter().map(|&n| (n, m)).collect(),
        None => tables::standard_schemes(ns),
    };
    let table = match kind {
        CoeffKind::BlueLocation => tables::coefficient_table(CoefficientKind::BlueLocation, psis, &schemes)?,
        CoeffKind::BlueScale => tables::coefficient_table(CoefficientKind::BlueScale, psis, &schemes)?,
        CoeffKind::BlieLocation => tables::coefficient_table(CoefficientKind::BlieLocation, psis, &schemes)?,
        CoeffKind::BlieScale => tables::coefficient_table(CoefficientKind::BlieScale, psis, &schemes)?,
        CoeffKind::Efficiency => tables::efficiency_table(psis, &schemes)?,
        CoeffKind::Prediction => {
            let targets: Vec<(usize, usize, usize)> = match (m, q) {
                (Some(m), Some(q)) => ns.iter().map(|&n| (n, m, q)).collect(),
                (Some(m), None) => ns.iter().flat_map(|&n| (n.saturating_sub(m) + 1..=n).map(move |q| (n, m, q))).collect(),
                (None, None) => tables::standard_prediction_schemes(ns),
                (None, Some(_)) => bail!("--q needs --m"),
            };
            tables::prediction_table(psis, &targets)?
        }
    };
    let prov = Provenance { psi: psis.to_vec(), n: ns.to_vec(), m, q, ..Provenance::new() };
    Ok(Report::new("coeffs", prov).with(table))
}

fn estimate_table(
    sample: &CensoredSample,
    psi: f64,
    methods: &[Estimator],
    intervals: Option<&IntervalRequest>,
) -> Result<Table> {
    let model = linear_model(sample.n(), sample.m(), psi)?;
    let est = model.estimates(sample.values())?;
    let c = model.coefficients();
    let eff = mse_and_rec(c);
    let mut cols = vec!["method", "location", "scale", "mse_location", "mse_scale", "cov"];
    if intervals.is_some() {
        cols.extend(["location_lower", "location_upper", "scale_lower", "scale_upper"]);
    }
    let mut t = Table::new("Estimates of location and scale (MSE in units of sigma^2)", &cols);
    for &method in methods {
        let e = est.get(method);
        let mut row = match method {
            Estimator::Blue => vec![
                Cell::Text("BLUE".into()),
                e.location.into(),
                e.scale.into(),
                eff.mse_blue_location.into(),
                eff.mse_blue_scale.into(),
                c.v3.into(),
            ],
            Estimator::Blie => vec![
                Cell::Text("BLIE".into()),
                e.location.into(),
                e.scale.into(),
                eff.mse_blie_location.into(),
                eff.mse_blie_scale.into(),
                Cell::Empty,
            ],
        };
        if let Some(req) = intervals {
            for param in [Parameter::Location, Parameter::Scale] {
                let ci = confidence_interval(sample, psi, param, method, req.level, &req.table)?;
                row.push(ci.lower.into());
                row.push(ci.upper.into());
            }
        }
        t.push(row);
    }
    Ok(t)
}

pub fn estimate(
    data: &Dataset,
    input: &str,
    psi: f64,
    n: Option<usize>,
    m: usize,
    method: EstimatorChoice,
    intervals: Option<&IntervalRequest>,
) -> Result<Report> {
    let psi = check_psi(psi)?;
    let sample = data.sample(n, m)?;
    let mut prov = Provenance { psi: vec![psi], n: vec![sample.n()], m: Some(m), input: Some(input.into()), ..Provenance::new() };
    if let Some(req) = intervals {
        req.stamp(&mut prov, PivotalKind::LocationBlue, psi, sample.n(), m, None);
    }
    let table = estimate_table(&sample, psi, &method.methods(), intervals)?;
    Ok(Report::new("estimate", prov).with(table))
}

fn predict_table(
    sample: &CensoredSample,
    problem: &PredictionProblem,
    methods: &[Predictor],
    intervals: Option<&IntervalRequest>,
) -> Result<Table> {
    let mut cols = vec!["method", "q", "prediction", "mspe", "V4"];
    if intervals.is_some() {
        cols.extend(["lower", "upper"]);
    }
    let mut t = Table::new(format!("Prediction of X({}:{}) (MSPE in units of sigma^2)", problem.q(), problem.n()), &cols);
    for &method in methods {
        let (label, scale) = match method {
            Predictor::Blup => ("BLUP", Estimator::Blue),
            Predictor::Blip => ("BLIP", Estimator::Blie),
        };
        let mut row = vec![
            Cell::Text(label.into()),
            problem.q().into(),
            problem.predict(sample, method)?.into(),
            problem.mspe(method).into(),
            problem.v4.into(),
        ];
        if let Some(req) = intervals {
            let pi = problem.prediction_interval(sample, scale, req.level, &req.table)?;
            row.push(pi.lower.into());
            row.push(pi.upper.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn check_target(sample: &CensoredSample, q: usize) -> Result<()> {
    let observed = sample.n() - sample.m();
    if q <= observed {
        bail!("X({q}:{}) is already observed; --q must lie in {}..={}", sample.n(), observed + 1, sample.n());
    }
    if q > sample.n() {
        bail!("--q {q} exceeds n={}", sample.n());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn predict(
    data: &Dataset,
    input: &str,
    psi: f64,
    n: Option<usize>,
    m: usize,
    q: usize,
    method: PredictorChoice,
    intervals: Option<&IntervalRequest>,
) -> Result<Report> {
    let psi = check_psi(psi)?;
    if m == 0 {
        bail!("prediction needs at least one censored observation (--m >= 1)");
    }
    let sample = data.sample(n, m)?;
    check_target(&sample, q)?;
    let problem = PredictionProblem::new(sample.n(), m, q, psi)?;
    let mut prov = Provenance {
        psi: vec![psi],
        n: vec![sample.n()],
        m: Some(m),
        q: Some(q),
        input: Some(input.into()),
        ..Provenance::new()
    };
    if let Some(req) = intervals {
        req.stamp(&mut prov, PivotalKind::PredictionBlue, psi, sample.n(), m, Some(q));
    }
    let table = predict_table(&sample, &problem, &method.methods(), intervals)?;
    Ok(Report::new("predict", prov).with(table))
}

fn fit_table(sample: &CensoredSample, psis: &[f64]) -> Result<Table> {
    let rs = psis.iter().map(|&p| fit_correlation(sample, check_psi(p)?).map_err(Into::into)).collect::<Result<Vec<f64>>>()?;
    let best = rs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i);
    let mut t = Table::new("Correlation between ordered data and expected order statistics", &["psi", "correlation", "best"]);
    for (i, (&p, &r)) in psis.iter().zip(&rs).enumerate() {
        t.push(vec![p.into(), r.into(), Cell::Text(if Some(i) == best { "*".into() } else { String::new() })]);
    }
    Ok(t)
}

pub fn fit_check(data: &Dataset, input: &str, psis: &[f64], n: Option<usize>, m: usize) -> Result<Report> {
    let sample = data.sample(n, m)?;
    if sample.values().len() < 3 {
        bail!("fit check needs at least three observations, got {}", sample.values().len());
    }
    let prov = Provenance { psi: psis.to_vec(), n: vec![sample.n()], m: Some(m), input: Some(input.into()), ..Provenance::new() };
    Ok(Report::new("fit-check", prov).with(fit_table(&sample, psis)?))
}

/// Grid of shapes tried by `analyze` when none is given.
pub const DEFAULT_FIT_GRID: [f64; 8] = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0];

/// Fit check, complete and singly censored estimates, and prediction of
/// the largest observation from the rest.
pub fn analyze(data: &Dataset, input: &str, psi: f64, grid: &[f64], intervals: Option<&IntervalRequest>) -> Result<Report> {
    let psi = check_psi(psi)?;
    let complete = data.sample(None, 0)?;
    let n = complete.n();
    if n < 4 {
        bail!("analyze needs at least four observations, got {n}");
    }
    let censored = CensoredSample::new(complete.values()[..n - 1].to_vec(), n, 1)?;
    let problem = PredictionProblem::new(n, 1, n, psi)?;

    let mut summary = Table::new(
        "Estimates and predictions (MSE and MSPE in units of sigma^2)",
        &[
            "sample", "phi_hat", "sigma_hat", "phi_tilde", "sigma_tilde", "mse_phi_hat", "mse_sigma_hat", "cov_hat",
            "mse_phi_tilde", "mse_sigma_tilde", "Y_hat", "Y_tilde", "V4", "mspe_Y_hat", "mspe_Y_tilde",
        ],
    );
    for (label, sample) in [("complete", &complete), ("m=1", &censored)] {
        let model = linear_model(n, sample.m(), psi)?;
        let est = model.estimates(sample.values())?;
        let c = model.coefficients();
        let eff = mse_and_rec(c);
        let mut row = vec![
            Cell::Text(label.into()),
            est.blue_location.into(),
            est.blue_scale.into(),
            est.blie_location.into(),
            est.blie_scale.into(),
            eff.mse_blue_location.into(),
            eff.mse_blue_scale.into(),
            c.v3.into(),
            eff.mse_blie_location.into(),
            eff.mse_blie_scale.into(),
        ];
        if sample.m() == 1 {
            row.extend([
                problem.predict(sample, Predictor::Blup)?.into(),
                problem.predict(sample, Predictor::Blip)?.into(),
                problem.v4.into(),
                problem.mspe(Predictor::Blup).into(),
                problem.mspe(Predictor::Blip).into(),
            ]);
        }
        summary.push(row);
    }

    let grid: Vec<f64> = if grid.is_empty() { DEFAULT_FIT_GRID.to_vec() } else { grid.to_vec() };
    let mut prov = Provenance { psi: vec![psi], n: vec![n], m: Some(1), q: Some(n), input: Some(input.into()), ..Provenance::new() };
    let mut report = Report::new("analyze", prov.clone()).with(fit_table(&complete, &grid)?).with(summary);
    if let Some(req) = intervals {
        req.stamp(&mut prov, PivotalKind::LocationBlue, psi, n, 0, None);
        report.provenance = prov;
        let mut ci = estimate_table(&complete, psi, &[Estimator::Blue, Estimator::Blie], Some(req))?;
        ci.title = format!("Complete-sample {:.0}% confidence intervals", req.level * 100.0);
        let mut pi = predict_table(&censored, &problem, &[Predictor::Blup, Predictor::Blip], Some(req))?;
        pi.title = format!("{:.0}% prediction intervals for X({n}:{n})", req.level * 100.0);
        report = report.with(ci).with(pi);
    }
    Ok(report)
}

/// `simulate` configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub psi: Vec<f64>,
    pub n: Vec<usize>,
    /// Censoring counts; `0 … ⌊n/2⌋ − 1` for each `n` when absent.
    #[serde(default)]
    pub m: Option<Vec<usize>>,
    #[serde(default = "default_quantile_reps")]
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default)]
    pub study: Option<StudySettings>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySettings {
    #[serde(default = "default_study_reps")]
    pub reps: usize,
    /// Falls back to the top-level seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_quantile_reps() -> usize {
    10_000
}

fn default_study_reps() -> usize {
    1000
}

fn default_level() -> f64 {
    0.95
}

fn default_taus() -> Vec<f64> {
    DEFAULT_TAUS.to_vec()
}

impl SimulateConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.psi.is_empty() || self.n.is_empty() {
            bail!("config needs at least one psi and one n");
        }
        for &p in &self.psi {
            check_psi(p)?;
        }
        if self.reps < MIN_REPLICATIONS {
            bail!("reps = {} is below the minimum of {MIN_REPLICATIONS}", self.reps);
        }
        if let Some(s) = &self.study {
            if s.reps == 0 {
                bail!("study reps must be positive");
            }
            if !(s.level > 0.0 && s.level < 1.0) {
                bail!("study level must lie in (0, 1), got {}", s.level);
            }
        }
        if self.taus.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            bail!("taus must lie in (0, 1)");
        }
        if self.schemes().is_empty() {
            bail!("config yields no valid (n, m) scheme; need n - m >= 2");
        }
        Ok(())
    }

    pub fn schemes(&self) -> Vec<(usize, usize)> {
        match &self.m {
            None => tables::standard_schemes(&self.n),
            Some(ms) => self.n.iter().flat_map(|&n| ms.iter().filter(move |&&m| m + 2 <= n).map(move |&m| (n, m))).collect(),
        }
    }

    /// Requested levels plus the tails the study's intervals need.
    fn all_taus(&self) -> Vec<f64> {
        let mut taus = self.taus.clone();
        if let Some(s) = &self.study {
            let a = (1.0 - s.level) / 2.0;
            taus.extend([a, 1.0 - a]);
        }
        taus.sort_by(f64::total_cmp);
        taus.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        taus
    }
}

/// Writes `quantiles.csv` (with its JSON sidecar) and, when configured,
/// `study.json` and `study.csv` into `out`.
pub fn simulate(cfg: &SimulateConfig, config_path: &str, out: &Path) -> Result<Report> {
    cfg.validate()?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let taus = cfg.all_taus();
    let mut quantiles = QuantileTable::new();
    let mut studies = Vec::new();
    let mut files = Table::new("Simulated schemes", &["psi", "n", "m", "quantiles", "study_reps"]);
    for &psi in &cfg.psi {
        for (n, m) in cfg.schemes() {
            let draws = simulate_pivotal_draws(&PivotalConfig::new(psi, n, m, cfg.reps, cfg.seed))?;
            let scheme = draws.table(&taus)?;
            let count = scheme.len();
            quantiles.extend(scheme.entries().cloned());
            let mut row = vec![psi.into(), n.into(), m.into(), count.into()];
            if let Some(s) = &cfg.study {
                let mut sc = StudyConfig::new(psi, n, m, s.reps, s.seed.unwrap_or(cfg.seed));
                sc.level = s.level;
                studies.push(run_simulation_study(&sc, &scheme)?);
                row.push(s.reps.into());
            }
            files.push(row);
        }
    }
    quantiles.validate()?;
    let path = out.join("quantiles.csv");
    quantiles.save(&path).with_context(|| format!("writing {}", path.display()))?;

    if cfg.study.is_some() {
        let doc = json!({
            "schema": REPORT_SCHEMA,
            "schema_version": REPORT_VERSION,
            "command": "simulate",
            "tool_version": TOOL_VERSION,
            "config": config_path,
            "studies": studies,
        });
        let path = out.join("study.json");
        std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n").with_context(|| format!("writing {}", path.display()))?;
        let path = out.join("study.csv");
        std::fs::write(&path, study_table(&studies).to_csv(xlindley::tables::Precision::Full))
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let prov = Provenance {
        psi: cfg.psi.clone(),
        n: cfg.n.clone(),
        reps: Some(cfg.reps),
        seed: Some(cfg.seed),
        level: cfg.study.as_ref().map(|s| s.level),
        input: Some(config_path.into()),
        ..Provenance::new()
    };
    Ok(Report::new("simulate", prov).with(files))
}

/// One row per `(ψ, n, m, q)` with estimator averages and interval
/// performance.
pub fn study_table(studies: &[xlindley::montecarlo::SimulationReport]) -> Table {
    let mut cols: Vec<String> = [
        "psi", "n", "m", "q", "N", "seed", "mean_phi_hat", "mean_phi_tilde", "mean_sigma_hat", "mean_sigma_tilde",
        "mean_blup", "mean_blip", "emspe_blup", "emspe_blip",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for kind in PivotalKind::ALL {
        cols.push(format!("aw_{}", kind.label()));
    }
    for kind in PivotalKind::ALL {
        cols.push(format!("cp_{}", kind.label()));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("Simulation study", &col_refs);
    for r in studies {
        let targets: Vec<Option<&xlindley::montecarlo::PredictionSummary>> =
            if r.predictions.is_empty() { vec![None] } else { r.predictions.iter().map(Some).collect() };
        for p in targets {
            let real = |f: fn(&xlindley::montecarlo::PredictionSummary) -> f64| p.map_or(Cell::Empty, |p| f(p).into());
            let mut row: Vec<Cell> = vec![
                r.psi.into(),
                r.n.into(),
                r.m.into(),
                p.map_or(Cell::Empty, |p| p.q.into()),
                r.reps.into(),
                Cell::Text(r.seed.to_string()),
                r.mean_blue_location.into(),
                r.mean_blie_location.into(),
                r.mean_blue_scale.into(),
                r.mean_blie_scale.into(),
                real(|p| p.mean_blup),
                real(|p| p.mean_blip),
                real(|p| p.emspe_blup),
                real(|p| p.emspe_blip),
            ];
            let summary = |kind: PivotalKind| {
                r.interval(kind).or_else(|| p.and_then(|p| p.intervals.iter().find(|s| s.kind == kind))).copied()
            };
            for kind in PivotalKind::ALL {
                row.push(summary(kind).map_or(Cell::Empty, |s| s.average_width.into()));
            }
            for kind in PivotalKind::ALL {
                row.push(summary(kind).map_or(Cell::Empty, |s| s.coverage.into()));
            }
            t.push(row);
        }
    }
    t
}
