//! Experiment configuration: a TOML file with dotted keys such as
//! `prior.sigma = 0.5` or `family.lambda = 0.01`. Unknown keys are errors.

use std::path::{Path, PathBuf};

use oas_core::components::linalg::Sym2;
use oas_core::{GammaRule, MixingPrior, NormalInverseGamma, NormalInverseWishart, SamplerKind, Schedule};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::synth::SynthName;

/// Seven thousand kept sweeps after a burn-in of 3500.
pub const DEFAULT_ITERATIONS: usize = 10_500;
pub const DEFAULT_BURN_IN: usize = 3_500;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// One sampler name or a list; each runs as its own chain.
    pub sampler: OneOrMany<String>,
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    pub output: PathBuf,
    pub prior: PriorConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub slice_cap: Option<usize>,
    /// Check sampler invariants after every sweep.
    #[serde(default)]
    pub check_invariants: bool,
    /// Compare each chain with the exact partition posterior (small n only).
    #[serde(default)]
    pub compare_oracle: bool,
    #[serde(default)]
    pub grid: GridConfig,
}

fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

fn default_thin() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    /// `pitman-yor`, `dirichlet-process`, `finite-dirichlet` or `gnedin`.
    pub kind: String,
    pub sigma: Option<f64>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub m: Option<u64>,
    pub gamma_hat: Option<f64>,
    /// `constant` (uses `gamma`, default 1) or `theta-over-m` (uses `theta`).
    pub gamma_rule: Option<String>,
}

/// Hyperparameters of the base measure. Omitted values come from the
/// data-dependent default preset.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub phi: Option<OneOrMany<f64>>,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `[xx, xy, yy]`.
    pub psi: Option<[f64; 3]>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    pub synthetic: Option<String>,
    pub seed: Option<u64>,
    /// Seeded row permutation applied after loading.
    pub permute_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    /// `single-block` (default), `prediction-rule`, or `k-blocks` (ordered only).
    pub mode: Option<String>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points of the univariate grid.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Points per axis of the bivariate grid.
    #[serde(default = "default_points_2d")]
    pub points_2d: usize,
    /// Per-component grids are written for `j` up to this bound.
    #[serde(default = "default_components")]
    pub components: usize,
}

fn default_points() -> usize {
    200
}

fn default_points_2d() -> usize {
    40
}

fn default_components() -> usize {
    8
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: default_points(),
            points_2d: default_points_2d(),
            components: default_components(),
        }
    }
}

/// Where the observations come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SynthName, u64),
}

/// How chains start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitChoice {
    SingleBlock,
    PredictionRule,
    KBlocks(usize),
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn need(v: Option<f64>, key: &str, kind: &str) -> CliResult<f64> {
    v.ok_or_else(|| bad(format!("prior.{key} is required for {kind}")))
}

impl PriorConfig {
    pub fn build(&self) -> CliResult<MixingPrior> {
        let unused = |keys: &[(&str, bool)]| -> CliResult<()> {
            match keys.iter().find(|(_, set)| *set) {
                Some((k, _)) => Err(bad(format!("prior.{k} does not apply to {}", self.kind))),
                None => Ok(()),
            }
        };
        let prior = match self.kind.as_str() {
            "pitman-yor" => {
                unused(&[("gamma", self.gamma.is_some()), ("m", self.m.is_some()), ("gamma_hat", self.gamma_hat.is_some()), ("gamma_rule", self.gamma_rule.is_some())])?;
                MixingPrior::pitman_yor(need(self.sigma, "sigma", "pitman-yor")?, need(self.theta, "theta", "pitman-yor")?)
            }
            "dirichlet-process" => {
                unused(&[("sigma", self.sigma.is_some()), ("gamma", self.gamma.is_some()), ("m", self.m.is_some()), ("gamma_hat", self.gamma_hat.is_some()), ("gamma_rule", self.gamma_rule.is_some())])?;
                MixingPrior::dirichlet_process(need(self.theta, "theta", "dirichlet-process")?)
            }
            "finite-dirichlet" => {
                unused(&[("sigma", self.sigma.is_some()), ("theta", self.theta.is_some()), ("gamma_hat", self.gamma_hat.is_some()), ("gamma_rule", self.gamma_rule.is_some())])?;
                let m = self.m.ok_or_else(|| bad("prior.m is required for finite-dirichlet"))?;
                MixingPrior::finite_dirichlet(need(self.gamma, "gamma", "finite-dirichlet")?, m)
            }
            "gnedin" => {
                unused(&[("sigma", self.sigma.is_some()), ("m", self.m.is_some())])?;
                let gamma_hat = need(self.gamma_hat, "gamma_hat", "gnedin")?;
                let rule = match self.gamma_rule.as_deref().unwrap_or("constant") {
                    "constant" => {
                        if self.theta.is_some() {
                            return Err(bad("prior.theta needs gamma_rule = \"theta-over-m\""));
                        }
                        GammaRule::Constant(self.gamma.unwrap_or(1.0))
                    }
                    "theta-over-m" => {
                        if self.gamma.is_some() {
                            return Err(bad("prior.gamma does not apply to gamma_rule = \"theta-over-m\""));
                        }
                        GammaRule::ThetaOverM(need(self.theta, "theta", "theta-over-m")?)
                    }
                    other => return Err(bad(format!("unknown prior.gamma_rule {other:?}"))),
                };
                MixingPrior::gnedin_with_rule(gamma_hat, rule)
            }
            other => return Err(bad(format!("unknown prior.kind {other:?}"))),
        };
        prior.map_err(|e| bad(e.to_string()))
    }
}

impl FamilyConfig {
    pub fn univariate(&self, data: &[f64]) -> CliResult<NormalInverseGamma> {
        if self.psi.is_some() || self.tau.is_some() {
            return Err(bad("family.psi and family.tau apply to bivariate data only"));
        }
        let base = NormalInverseGamma::default_for(data).map_err(|e| bad(e.to_string()))?;
        let phi = match &self.phi {
            None => base.phi(),
            Some(OneOrMany::One(x)) => *x,
            Some(OneOrMany::Many(v)) if v.len() == 1 => v[0],
            Some(_) => return Err(bad("family.phi must be a number for univariate data")),
        };
        NormalInverseGamma::new(
            phi,
            self.lambda.unwrap_or(base.lambda()),
            self.a.unwrap_or(base.a()),
            self.b.unwrap_or(base.b()),
        )
        .map_err(|e| bad(e.to_string()))
    }

    pub fn bivariate(&self, data: &[[f64; 2]]) -> CliResult<NormalInverseWishart> {
        if self.a.is_some() || self.b.is_some() {
            return Err(bad("family.a and family.b apply to univariate data only"));
        }
        let base = NormalInverseWishart::default_for(data).map_err(|e| bad(e.to_string()))?;
        let phi = match &self.phi {
            None => base.phi(),
            Some(OneOrMany::Many(v)) if v.len() == 2 => [v[0], v[1]],
            Some(_) => return Err(bad("family.phi must be a pair for bivariate data")),
        };
        let psi = self.psi.map_or(base.psi(), |[xx, xy, yy]| Sym2::new(xx, xy, yy));
        NormalInverseWishart::new(phi, self.lambda.unwrap_or(base.lambda()), psi, self.tau.unwrap_or(base.tau()))
            .map_err(|e| bad(e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    /// Parse a config file and resolve relative paths against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        if let Some(p) = cfg.data.path.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn samplers(&self) -> CliResult<Vec<SamplerKind>> {
        let names = self.sampler.to_vec();
        if names.is_empty() {
            return Err(bad("sampler list is empty"));
        }
        let mut kinds: Vec<SamplerKind> = Vec::new();
        for name in names {
            let kind: SamplerKind = name.parse().map_err(|e: oas_core::Error| bad(e.to_string()))?;
            if kinds.contains(&kind) {
                return Err(bad(format!("sampler {kind} listed twice")));
            }
            kinds.push(kind);
        }
        Ok(kinds)
    }

    pub fn schedule(&self) -> CliResult<Schedule> {
        Schedule::new(self.iterations, self.burn_in, self.thin).map_err(|e| bad(e.to_string()))
    }

    pub fn data_source(&self) -> CliResult<DataSource> {
        match (&self.data.path, &self.data.synthetic) {
            (Some(p), None) => {
                if self.data.seed.is_some() {
                    return Err(bad("data.seed applies to synthetic data only"));
                }
                Ok(DataSource::File(p.clone()))
            }
            (None, Some(name)) => {
                let seed = self.data.seed.ok_or_else(|| bad("data.seed is required for synthetic data"))?;
                Ok(DataSource::Synthetic(name.parse()?, seed))
            }
            _ => Err(bad("exactly one of data.path and data.synthetic must be set")),
        }
    }

    pub fn init_choice(&self) -> CliResult<InitChoice> {
        match (self.init.mode.as_deref().unwrap_or("single-block"), self.init.k) {
            ("single-block", None) => Ok(InitChoice::SingleBlock),
            ("prediction-rule", None) => Ok(InitChoice::PredictionRule),
            ("k-blocks", Some(k)) => Ok(InitChoice::KBlocks(k)),
            ("k-blocks", None) => Err(bad("init.k is required for k-blocks")),
            (_, Some(_)) => Err(bad("init.k applies to k-blocks only")),
            (other, None) => Err(bad(format!("unknown init.mode {other:?}"))),
        }
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> CliResult<()> {
        let kinds = self.samplers()?;
        self.schedule()?;
        self.prior.build()?;
        self.data_source()?;
        if let InitChoice::KBlocks(_) = self.init_choice()? {
            if kinds.iter().any(|k| *k != SamplerKind::Ordered) {
                return Err(bad("init.mode = \"k-blocks\" is supported by the ordered sampler only"));
            }
        }
        if self.slice_cap == Some(0) {
            return Err(bad("slice_cap must be positive"));
        }
        if self.grid.points < 2 || self.grid.points_2d < 2 {
            return Err(bad("grids need at least two points per axis"));
        }
        Ok(())
    }
}
