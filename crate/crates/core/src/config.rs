//! TOML configuration files for `generate`, `learn` and `sweep`.
//!
//! Every section is optional and falls back to the library defaults; unknown
//! keys are rejected.

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineConfig, Method, RcThresholdMode};
use crate::error::{Result, SclError};
use crate::greedy::HyperParams;
use crate::synth::InstanceParams;

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        SclError::parse(origin, line, e.message().to_string())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateConfig {
    pub seed: u64,
    pub instance: InstanceParams,
}

impl GenerateConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: GenerateConfig = parse_toml(text, origin)?;
        cfg.instance.validate()?;
        Ok(cfg)
    }
}

/// Learner weights. `e_min` and `t_min` are optional so they can default to
/// the ground-truth counts when those are known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub eta: f64,
    pub e_min: Option<usize>,
    pub t_min: Option<usize>,
    pub max_iters: usize,
    pub pinv_tol: f64,
    pub strict_lemma_mode: bool,
    pub prune_closure: bool,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let d = HyperParams::default();
        ParamsConfig {
            alpha1: d.alpha1,
            alpha2: d.alpha2,
            beta1: d.beta1,
            beta2: d.beta2,
            gamma: d.gamma,
            eta: d.eta,
            e_min: None,
            t_min: None,
            max_iters: d.max_iters,
            pinv_tol: d.pinv_tol,
            strict_lemma_mode: d.strict_lemma_mode,
            prune_closure: d.prune_closure,
        }
    }
}

impl ParamsConfig {
    /// Hyperparameters with unset budgets taken from `e_min` / `t_min`.
    pub fn resolve(&self, e_min: usize, t_min: usize) -> HyperParams {
        HyperParams {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            beta1: self.beta1,
            beta2: self.beta2,
            gamma: self.gamma,
            eta: self.eta,
            e_min: self.e_min.unwrap_or(e_min),
            t_min: self.t_min.unwrap_or(t_min),
            max_iters: self.max_iters,
            pinv_tol: self.pinv_tol,
            strict_lemma_mode: self.strict_lemma_mode,
            prune_closure: self.prune_closure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineOptions {
    pub rc_threshold_mode: RcThresholdMode,
    pub rc_abs_threshold: f64,
    pub sep_force_observed: bool,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        let d = BaselineConfig::default();
        BaselineOptions {
            rc_threshold_mode: d.rc_threshold_mode,
            rc_abs_threshold: d.rc_abs_threshold,
            sep_force_observed: d.sep_force_observed,
        }
    }
}

impl BaselineOptions {
    pub fn to_config(&self, method: Method, params: &HyperParams) -> BaselineConfig {
        BaselineConfig {
            method,
            e_min: params.e_min,
            t_min: params.t_min,
            rc_threshold_mode: self.rc_threshold_mode,
            rc_abs_threshold: self.rc_abs_threshold,
            sep_force_observed: self.sep_force_observed,
        }
    }
}

/// `learn --config` file: `[params]` and `[baseline]` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct LearnConfig {
    pub params: ParamsConfig,
    pub baseline: BaselineOptions,
}

impl LearnConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        parse_toml(text, origin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NodeNoiseStd,
    ObservedFraction,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::NodeNoiseStd => "node_noise_std",
            SweepVariable::ObservedFraction => "observed_fraction",
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &InstanceParams, value: f64) -> InstanceParams {
        let mut p = base.clone();
        match self {
            SweepVariable::NodeNoiseStd => p.node_noise_std = value,
            SweepVariable::ObservedFraction => p.observed_fraction = value,
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub n_trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub instance: InstanceParams,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub baseline: BaselineOptions,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

impl SweepSpec {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let spec: SweepSpec = parse_toml(text, origin)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(SclError::invalid("sweep grid is empty"));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(SclError::invalid("sweep grid has a non-finite value"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SclError::invalid("sweep grid must be strictly increasing"));
        }
        if self.n_trials < 1 {
            return Err(SclError::invalid("n_trials must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(SclError::invalid("no methods to run"));
        }
        for (pos, m) in self.methods.iter().enumerate() {
            if self.methods[..pos].contains(m) {
                return Err(SclError::invalid(format!("method {m} listed twice")));
            }
        }
        self.instance.validate()?;
        for &v in &self.grid {
            self.variable.apply(&self.instance, v).validate()?;
        }
        Ok(())
    }
}
