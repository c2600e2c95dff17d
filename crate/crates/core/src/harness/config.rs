use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::continuous::ClipBounds;
use crate::error::{Error, Result};
use crate::estimators::DirectionKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ingo,
    Ingostep,
    FastIngo,
    Framework,
    Es,
    Igo,
    BernoulliIngo,
    CategoricalIngo,
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Ingo,
        Algorithm::Ingostep,
        Algorithm::FastIngo,
        Algorithm::Framework,
        Algorithm::Es,
        Algorithm::Igo,
        Algorithm::BernoulliIngo,
        Algorithm::CategoricalIngo,
        Algorithm::Ga,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ingo => "ingo",
            Algorithm::Ingostep => "ingostep",
            Algorithm::FastIngo => "fast_ingo",
            Algorithm::Framework => "framework",
            Algorithm::Es => "es",
            Algorithm::Igo => "igo",
            Algorithm::BernoulliIngo => "bernoulli_ingo",
            Algorithm::CategoricalIngo => "categorical_ingo",
            Algorithm::Ga => "ga",
        }
    }

    pub fn is_discrete(self) -> bool {
        matches!(self, Algorithm::BernoulliIngo | Algorithm::CategoricalIngo | Algorithm::Ga)
    }

    /// Step size used when `beta` is `auto`.
    pub fn default_beta(self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            Algorithm::FastIngo => 1.0 / d.sqrt(),
            Algorithm::Es => 0.01,
            _ => 1.0 / d,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown algorithm `{s}`")))
    }
}

/// A numeric setting that is either resolved from the dimension (`"auto"`) or given.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Setting<T> {
    #[default]
    Auto,
    Value(T),
}

impl<T: Copy> Setting<T> {
    pub fn resolve(self, auto: impl FnOnce() -> T) -> T {
        match self {
            Setting::Auto => auto(),
            Setting::Value(v) => v,
        }
    }
}

impl<T: FromStr> FromStr for Setting<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Setting::Auto);
        }
        s.parse()
            .map(Setting::Value)
            .map_err(|_| Error::ConfigInvalid(format!("expected `auto` or a number, got `{s}`")))
    }
}

impl<T: Serialize> Serialize for Setting<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Setting::Auto => serializer.serialize_str("auto"),
            Setting::Value(v) => v.serialize(serializer),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Setting<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Text(String),
            Value(T),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Value(v) => Ok(Setting::Value(v)),
            Raw::Text(s) if s == "auto" => Ok(Setting::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected `auto` or a number, got `{s}`"))),
        }
    }
}

/// Initial search distribution; defaults to `μ₁ ~ U[0,1]^d` and per-coordinate std 0.5.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
    #[serde(default)]
    pub std: Option<f64>,
}

pub const DEFAULT_INIT_STD: f64 = 0.5;

/// A run stops once the smallest eigenvalue of `Σ` falls below this.
pub const DEFAULT_COLLAPSE_EIGENVALUE: f64 = 1e-200;

fn default_collapse() -> f64 {
    DEFAULT_COLLAPSE_EIGENVALUE
}

fn one() -> usize {
    1
}

fn one_u64() -> u64 {
    1
}

/// A fully seeded experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub objective: String,
    pub dim: usize,
    #[serde(default)]
    pub population: Setting<usize>,
    #[serde(default)]
    pub beta: Setting<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Maximum number of objective evaluations.
    pub budget: u64,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default = "one")]
    pub threads: usize,
    /// Direction sampler for Gaussian algorithms; ES always uses antithetic pairs.
    #[serde(default)]
    pub sampler: Option<DirectionKind>,
    /// Enables `Ĝ` clipping for the `framework` algorithm.
    #[serde(default)]
    pub clip: Option<ClipBounds>,
    #[serde(default)]
    pub max_iterations: Option<u64>,
    #[serde(default = "default_collapse")]
    pub collapse_eigenvalue: f64,
    #[serde(default = "one_u64")]
    pub log_every: u64,
    /// Record wall-clock time per row; off by default so traces are reproducible byte for byte.
    #[serde(default)]
    pub record_timing: bool,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, objective: impl Into<String>, dim: usize, seed: u64, budget: u64) -> Self {
        Self {
            algorithm,
            objective: objective.into(),
            dim,
            population: Setting::Auto,
            beta: Setting::Auto,
            seed,
            budget,
            target: None,
            init: InitConfig::default(),
            threads: 1,
            sampler: None,
            clip: None,
            max_iterations: None,
            collapse_eigenvalue: DEFAULT_COLLAPSE_EIGENVALUE,
            log_every: 1,
            record_timing: false,
        }
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let invalid = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.dim == 0 {
            return invalid("dim must be positive".into());
        }
        let population = self.population.resolve(|| default_population_size(self.dim));
        let beta = self.beta.resolve(|| self.algorithm.default_beta(self.dim));
        if population < 2 {
            return invalid(format!("population must be at least 2, got {population}"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return invalid(format!("beta must be positive, got {beta}"));
        }
        let sampler = match self.algorithm {
            Algorithm::Es => DirectionKind::Antithetic,
            _ => self.sampler.unwrap_or_default(),
        };
        if self.algorithm.is_discrete() && self.sampler.is_some() {
            return invalid("sampler only applies to Gaussian algorithms".into());
        }
        if sampler == DirectionKind::Antithetic && population % 2 != 0 {
            return invalid(format!("antithetic sampling needs an even population, got {population}"));
        }
        if sampler == DirectionKind::Orthogonal && population > self.dim {
            return invalid(format!("orthogonal sampling needs population <= dim ({population} > {})", self.dim));
        }
        if self.algorithm == Algorithm::Ga && (population < 4 || population % 2 != 0) {
            return invalid(format!("ga needs an even population >= 4, got {population}"));
        }
        if self.clip.is_some() && self.algorithm != Algorithm::Framework {
            return invalid("clip bounds only apply to the framework algorithm".into());
        }
        if let Some(c) = self.clip {
            if !(c.b > 0.0 && c.b <= c.gamma_half) {
                return invalid(format!("clip bounds need 0 < b <= gamma_half, got {} and {}", c.b, c.gamma_half));
            }
        }
        if self.budget < population as u64 {
            return invalid(format!("budget {} is smaller than one batch of {population}", self.budget));
        }
        if !(self.collapse_eigenvalue >= 0.0) {
            return invalid(format!("collapse_eigenvalue must be non-negative, got {}", self.collapse_eigenvalue));
        }
        if self.threads == 0 {
            return invalid("threads must be at least 1".into());
        }
        if self.log_every == 0 {
            return invalid("log_every must be at least 1".into());
        }
        if let Some(mean) = &self.init.mean {
            if mean.len() != self.dim || mean.iter().any(|v| !v.is_finite()) {
                return invalid(format!("init.mean must hold {} finite values", self.dim));
            }
        }
        let init_std = self.init.std.unwrap_or(DEFAULT_INIT_STD);
        if !(init_std > 0.0) || !init_std.is_finite() {
            return invalid(format!("init.std must be positive, got {init_std}"));
        }
        Ok(ResolvedConfig { population, beta, sampler, init_std })
    }
}

/// Values of a [`RunConfig`] after `auto` resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub population: usize,
    pub beta: f64,
    pub sampler: DirectionKind,
    pub init_std: f64,
}

/// `N = 2 ⌊3 + ⌊3 ln d⌋ / 2⌋`, always even.
pub fn default_population_size(dim: usize) -> usize {
    let inner = (3.0 * (dim.max(1) as f64).ln()).floor();
    2 * (3.0 + inner / 2.0).floor() as usize
}

/// `N = 20 + 4 ⌊3 + ⌊3 ln d⌋ / 2⌋`, the batch size of the discrete reconstruction protocol.
pub fn discrete_population_size(dim: usize) -> usize {
    20 + 2 * default_population_size(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_formula() {
        assert_eq!(default_population_size(100), 18);
        assert_eq!(default_population_size(1), 6);
        assert_eq!(default_population_size(20), 14);
        for d in 1..500 {
            assert_eq!(default_population_size(d) % 2, 0);
        }
        assert_eq!(discrete_population_size(100), 56);
    }

    #[test]
    fn auto_resolution() {
        let d = 16;
        let cases = [
            (Algorithm::Ingo, 1.0 / 16.0),
            (Algorithm::Ingostep, 1.0 / 16.0),
            (Algorithm::Igo, 1.0 / 16.0),
            (Algorithm::Framework, 1.0 / 16.0),
            (Algorithm::FastIngo, 0.25),
            (Algorithm::Es, 0.01),
            (Algorithm::BernoulliIngo, 1.0 / 16.0),
            (Algorithm::CategoricalIngo, 1.0 / 16.0),
        ];
        for (algo, beta) in cases {
            let r = RunConfig::new(algo, "sphere", d, 0, 1000).resolve().unwrap();
            assert_eq!(r.beta, beta, "{algo}");
            assert_eq!(r.population, default_population_size(d));
        }
    }

    #[test]
    fn setting_parsing_and_serde() {
        assert_eq!("auto".parse::<Setting<f64>>().unwrap(), Setting::Auto);
        assert_eq!("0.5".parse::<Setting<f64>>().unwrap(), Setting::Value(0.5));
        assert!("fast".parse::<Setting<f64>>().is_err());
        let json = r#"{"algorithm":"fast_ingo","objective":"levy","dim":3,"budget":60,"beta":"auto","population":8}"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.beta, Setting::Auto);
        assert_eq!(cfg.population, Setting::Value(8));
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = RunConfig::new(Algorithm::Ingo, "sphere", 4, 0, 3);
        assert!(matches!(cfg.resolve(), Err(Error::ConfigInvalid(_))));
        cfg.budget = 100;
        cfg.sampler = Some(DirectionKind::Orthogonal);
        assert!(cfg.resolve().is_err());
        cfg.population = Setting::Value(4);
        assert!(cfg.resolve().is_ok());
        cfg.threads = 0;
        assert!(cfg.resolve().is_err());

        let mut ga = RunConfig::new(Algorithm::Ga, "binary_reconstruction", 4, 0, 100);
        ga.population = Setting::Value(5);
        assert!(ga.resolve().is_err());
    }
}
