//! Ensemble surveys: generate models, solve exactly, upscale along a sweep
//! pyramid, solve each coarse level and collect flow-rate errors.

mod emit;
pub mod stats;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use emit::{emit_report, write_cdf_csv, write_histograms_csv, CDF_POINTS};
pub use stats::{bias_summary, cdf_table, histogram, Bias, Histogram};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::field::{GridShape, TensorField};
use crate::model_gen::{generate_model_detailed, ChannelSpec, ModelParams, XyMode, PRNG_NAME};
use crate::solver::{self, DarcyProblem, Scheme, DEFAULT_RATIO_TOL, EDGE_COLUMNS};
use crate::upscale::{run_plan_with, KkVariant, Method, UpscalePlan};

/// Smallest target the paper deems informative.
pub const MIN_RESOLUTION: usize = 32;
pub const BOOTSTRAP_SEED: u64 = 0x5eed_b007;

fn default_ratio_tol() -> f64 {
    DEFAULT_RATIO_TOL
}
fn default_n_block() -> usize {
    2
}
fn default_resamples() -> usize {
    1000
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyConfig {
    pub n_models: usize,
    pub n: usize,
    pub resolutions: Vec<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub xy_mode: XyMode,
    #[serde(default = "default_ratio_tol")]
    pub ratio_tol: f64,
    #[serde(default)]
    pub seed0: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default = "default_n_block")]
    pub n_block: usize,
    /// Permits targets below [`MIN_RESOLUTION`].
    #[serde(default)]
    pub allow_small_targets: bool,
    #[serde(default)]
    pub kk_variant: KkVariant,
    /// Channel generator settings; `xy_mode` above overrides the one here.
    #[serde(default)]
    pub channel: ChannelSpec,
    /// Bootstrap resamples for the median-|ε| intervals in the summary.
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
}

impl SurveyConfig {
    /// 500 models at 512², decimated to 256, 128, 64 and 32.
    pub fn paper(xy_mode: XyMode) -> Self {
        SurveyConfig {
            n_models: 500,
            n: 512,
            resolutions: vec![256, 128, 64, 32],
            methods: default_methods(),
            xy_mode,
            ratio_tol: DEFAULT_RATIO_TOL,
            seed0: 0,
            parallelism: 0,
            n_block: 2,
            allow_small_targets: false,
            kk_variant: KkVariant::Corrected,
            channel: ChannelSpec::default(),
            bootstrap_resamples: default_resamples(),
        }
    }

    /// 100 models at 128², decimated to 64 and 32.
    pub fn desk(xy_mode: XyMode) -> Self {
        SurveyConfig {
            n_models: 100,
            n: 128,
            resolutions: vec![64, 32],
            ..SurveyConfig::paper(xy_mode)
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: SurveyConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn channel_spec(&self) -> ChannelSpec {
        self.channel.clone().with_xy_mode(self.xy_mode)
    }

    /// Resolutions in decreasing order, deduplicated.
    pub fn ladder(&self) -> Vec<usize> {
        let mut r = self.resolutions.clone();
        r.sort_unstable_by(|a, b| b.cmp(a));
        r.dedup();
        r
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_models == 0 {
            return bad("n_models must be positive".into());
        }
        GridShape::new(self.n).map_err(|e| Error::Config(e.to_string()))?;
        if self.resolutions.is_empty() {
            return bad("resolutions must not be empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if !(self.ratio_tol > 1.0) {
            return bad(format!("ratio_tol must exceed 1, got {}", self.ratio_tol));
        }
        let ladder = self.ladder();
        let lowest = *ladder.last().expect("non-empty");
        if lowest < MIN_RESOLUTION && !self.allow_small_targets {
            return bad(format!(
                "resolution {lowest} is below {MIN_RESOLUTION}; set allow_small_targets to override"
            ));
        }
        for &m in &self.methods {
            let plan = UpscalePlan::new(m, self.n_block, lowest).map_err(|e| Error::Config(e.to_string()))?;
            plan.sweeps(self.n).map_err(|e| Error::Config(e.to_string()))?;
        }
        for &r in &ladder {
            let on_pyramid = (0..)
                .map(|k| self.n_block.checked_pow(k))
                .take_while(|p| p.is_some_and(|p| p <= self.n))
                .any(|p| p.is_some_and(|p| p > 1 && self.n / p == r && self.n.is_multiple_of(p)));
            if !on_pyramid {
                return bad(format!("resolution {r} is not a sweep level of {} with n_block {}", self.n, self.n_block));
            }
        }
        self.channel_spec()
            .validate(self.n)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.n < 64 {
            return bad("model generation needs n >= 64".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelResult {
    pub method: Method,
    pub resolution: usize,
    pub f_model: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub index: usize,
    pub seed: u64,
    pub f_exact: Option<f64>,
    pub validation_ratio: Option<f64>,
    pub admissible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub results: Vec<PanelResult>,
}

impl ModelRecord {
    pub fn epsilon(&self, method: Method, resolution: usize) -> Option<f64> {
        self.results
            .iter()
            .find(|r| r.method == method && r.resolution == resolution)
            .and_then(|r| r.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub method: Method,
    pub resolution: usize,
    pub count: usize,
    pub median_epsilon: f64,
    pub median_abs_epsilon: f64,
    /// 95 % percentile-bootstrap interval of the median `|ε|`.
    pub median_abs_epsilon_ci95: [f64; 2],
    pub negative_fraction: f64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub models: usize,
    pub admissible: usize,
    pub excluded: usize,
    pub panels: Vec<Panel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub code_version: String,
    pub prng: String,
    pub scheme: Scheme,
    pub f_definition: String,
    pub epsilon_definition: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub config: SurveyConfig,
    pub provenance: Provenance,
    pub summary: Summary,
    pub models: Vec<ModelRecord>,
}

impl SurveyReport {
    /// `ε` of every admissible model with a result in this panel, in model order.
    pub fn errors(&self, method: Method, resolution: usize) -> Vec<f64> {
        admissible_errors(&self.models, method, resolution)
    }

    pub fn panel(&self, method: Method, resolution: usize) -> Option<&Panel> {
        self.summary
            .panels
            .iter()
            .find(|p| p.method == method && p.resolution == resolution)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn admissible_errors(models: &[ModelRecord], method: Method, resolution: usize) -> Vec<f64> {
    models
        .iter()
        .filter(|m| m.admissible)
        .filter_map(|m| m.epsilon(method, resolution))
        .collect()
}

fn provenance(config: &SurveyConfig) -> Provenance {
    let mut notes = Vec::new();
    if config.methods.contains(&Method::Kk) {
        let plan = UpscalePlan {
            method: Method::Kk,
            n_block: 2,
            n_target: MIN_RESOLUTION,
            kk_variant: config.kk_variant,
        };
        notes.extend(plan.notes());
    }
    notes.push("coarse levels of one model come from a single sweep pyramid".into());
    notes.push("aggregates use admissible exact solves only".into());
    Provenance {
        code_version: env!("CARGO_PKG_VERSION").into(),
        prng: PRNG_NAME.into(),
        scheme: Scheme::Galerkin,
        f_definition: format!(
            "mean of the per-strip flow profile excluding {EDGE_COLUMNS} strips at each Dirichlet end"
        ),
        epsilon_definition: "(f_exact - f_model) / f_exact * 100; negative = overprediction".into(),
        notes,
    }
}

/// Runs one model through generation, the exact solve and every
/// (method, resolution) pair. Never fails: problems are recorded.
pub fn run_model(config: &SurveyConfig, index: usize) -> ModelRecord {
    run_model_with(config, index, |p| generate_model_detailed(p).map(|m| m.field))
}

/// [`run_model`] with a custom model source (e.g. a fixed field for tests).
pub fn run_model_with(
    config: &SurveyConfig,
    index: usize,
    generate: impl Fn(&ModelParams) -> Result<TensorField>,
) -> ModelRecord {
    let seed = config.seed0.wrapping_add(index as u64);
    let mut rec = ModelRecord {
        index,
        seed,
        f_exact: None,
        validation_ratio: None,
        admissible: false,
        error: None,
        results: Vec::new(),
    };
    let problem = DarcyProblem::with_scheme(Scheme::Galerkin);
    let exact = ModelParams::new(config.n, seed, config.channel_spec())
        .and_then(|p| generate(&p))
        .and_then(|f| problem.solve(&f).map(|r| (f, r)));
    let (field, exact) = match exact {
        Ok(x) => x,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.f_exact = Some(exact.f);
    rec.validation_ratio = Some(exact.validation_ratio);
    rec.admissible = solver::validate(&exact, config.ratio_tol) && exact.f > 0.0;
    if !rec.admissible {
        return rec;
    }
    let ladder = config.ladder();
    let lowest = *ladder.last().expect("validated");
    for &method in &config.methods {
        let plan = UpscalePlan {
            method,
            n_block: config.n_block,
            n_target: lowest,
            kk_variant: config.kk_variant,
        };
        let levels = run_plan_with(&field, &plan, Execution::Sequential).map(|u| u.levels);
        for &res in &ladder {
            let coarse = levels.as_ref().map_err(|e| e.to_string()).and_then(|lv| {
                lv.iter()
                    .find(|f| f.n() == res)
                    .ok_or_else(|| format!("no level at {res}"))
            });
            let out = coarse.and_then(|c| problem.solve(c).map_err(|e| e.to_string()));
            rec.results.push(match out {
                Ok(r) => PanelResult {
                    method,
                    resolution: res,
                    f_model: Some(r.f),
                    epsilon: solver::flow_error(exact.f, r.f).ok(),
                    error: None,
                },
                Err(e) => PanelResult {
                    method,
                    resolution: res,
                    f_model: None,
                    epsilon: None,
                    error: Some(e),
                },
            });
        }
    }
    rec
}

/// Aggregates over admissible models.
pub fn summarize(config: &SurveyConfig, models: &[ModelRecord]) -> Result<Summary> {
    let admissible = models.iter().filter(|m| m.admissible).count();
    let mut panels = Vec::new();
    for &method in &config.methods {
        for &res in &config.ladder() {
            let errs = admissible_errors(models, method, res);
            if errs.is_empty() {
                continue;
            }
            let bias = bias_summary(&errs)?;
            let dist = stats::bootstrap(errs.len(), config.bootstrap_resamples.max(1), BOOTSTRAP_SEED, |ix| {
                stats::median_abs(&ix.iter().map(|&i| errs[i]).collect::<Vec<_>>())
            });
            panels.push(Panel {
                method,
                resolution: res,
                count: errs.len(),
                median_epsilon: bias.median,
                median_abs_epsilon: stats::median_abs(&errs),
                median_abs_epsilon_ci95: stats::percentile_interval(&dist, 0.95),
                negative_fraction: bias.negative_fraction,
                histogram: histogram(&errs)?,
            });
        }
    }
    Ok(Summary {
        models: models.len(),
        admissible,
        excluded: models.len() - admissible,
        panels,
    })
}

pub fn run_survey(config: &SurveyConfig) -> Result<SurveyReport> {
    run_survey_with(config, |p| generate_model_detailed(p).map(|m| m.field))
}

/// [`run_survey`] with a custom model source.
pub fn run_survey_with(
    config: &SurveyConfig,
    generate: impl Fn(&ModelParams) -> Result<TensorField> + Sync + Send,
) -> Result<SurveyReport> {
    config.validate()?;
    let models = exec::with_workers(config.parallelism, || {
        Execution::Parallel.map(config.n_models, |i| run_model_with(config, i, &generate))
    });
    let admissible = models.iter().filter(|m| m.admissible).count();
    if 2 * admissible < models.len() {
        return Err(Error::Inadmissible {
            admissible,
            total: models.len(),
        });
    }
    Ok(SurveyReport {
        config: config.clone(),
        provenance: provenance(config),
        summary: summarize(config, &models)?,
        models,
    })
}

/// Rebuilds summary and provenance from stored records.
pub fn rebuild(report: &SurveyReport) -> Result<SurveyReport> {
    Ok(SurveyReport {
        config: report.config.clone(),
        provenance: provenance(&report.config),
        summary: summarize(&report.config, &report.models)?,
        models: report.models.clone(),
    })
}

/// Per-panel medians keyed by `(method, resolution)`.
pub fn medians(report: &SurveyReport) -> BTreeMap<(Method, usize), (f64, f64)> {
    report
        .summary
        .panels
        .iter()
        .map(|p| ((p.method, p.resolution), (p.median_epsilon, p.median_abs_epsilon)))
        .collect()
}
