//! Scenario files: a model, an initial condition and run settings, read
//! from TOML. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical::{CanonicalForm, CanonicalOptions};
use crate::error::{Error, Result};
use crate::ibm::{DeathPerturbation, PopulationState};
use crate::model::{DemographyModel, Genotype, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Resident and mutant alleles for two-allele commands.
    #[serde(default)]
    pub dimorphic: Option<DimorphicSpec>,
    #[serde(default)]
    pub invasion: InvasionSpec,
    #[serde(default)]
    pub tss: TssSpec,
    #[serde(default)]
    pub canonical: CanonicalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Homozygotes `(u, u)` at the given density.
    Monomorphic { u: f64, density: f64 },
    /// Explicit genotype counts.
    Counts { counts: Vec<GenotypeCount> },
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self::Monomorphic { u: 0.0, density: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenotypeCount {
    pub u1: f64,
    pub u2: f64,
    pub n: u64,
}

impl InitialCondition {
    pub fn trait_value(&self) -> Option<f64> {
        match self {
            Self::Monomorphic { u, .. } => Some(*u),
            Self::Counts { .. } => None,
        }
    }

    pub fn state(&self, k: f64) -> Result<PopulationState> {
        match self {
            Self::Monomorphic { u, density } => {
                if !(*density >= 0.0) {
                    return Err(Error::Config(format!("initial.density must be nonnegative, got {density}")));
                }
                Ok(PopulationState::monomorphic(*u, (density * k).round() as u64, k))
            }
            Self::Counts { counts } => Ok(counts
                .iter()
                .fold(PopulationState::new(k), |s, c| s.with(Genotype::new(c.u1, c.u2), c.n))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Sampling interval of recorded trajectories.
    #[serde(default = "default_record_every")]
    pub record_every: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
    #[serde(default)]
    pub perturbation: Option<DeathPerturbation>,
}

fn default_horizon() -> f64 {
    50.0
}

fn default_record_every() -> f64 {
    0.5
}

fn default_replicates() -> u64 {
    1
}

fn default_max_events() -> u64 {
    1_000_000_000
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            record_every: default_record_every(),
            seed: 0,
            replicates: default_replicates(),
            max_events: default_max_events(),
            perturbation: None,
        }
    }
}

/// Model parameter varied across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    K,
    Sigma,
    Mu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimorphicSpec {
    pub resident: f64,
    pub mutant: f64,
    /// Initial `(x, y, z)` for flows; defaults to the resident equilibrium
    /// plus mutant densities `(eps / 2, eps / 4)` with `eps = 1e-3`.
    #[serde(default)]
    pub densities: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvasionSpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Also follow replicate invasions to fixation and record phase boundaries.
    #[serde(default)]
    pub phases: bool,
}

fn default_epsilon() -> f64 {
    0.1
}

impl Default for InvasionSpec {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            phases: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TssSpec {
    /// Radius of the stopping neighbourhood around singular strategies.
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Grid used to locate singular strategies.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_eta() -> f64 {
    0.01
}

fn default_resolution() -> usize {
    400
}

impl Default for TssSpec {
    fn default() -> Self {
        Self {
            eta: default_eta(),
            resolution: default_resolution(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalSpec {
    #[serde(default)]
    pub form: CanonicalForm,
    #[serde(default)]
    pub options: CanonicalOptions,
    /// Horizon in rescaled time `t sigma^2`; defaults to `run.horizon`.
    #[serde(default)]
    pub horizon: Option<f64>,
}

impl Scenario {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            initial: InitialCondition::default(),
            run: RunSpec::default(),
            sweep: None,
            dimorphic: None,
            invasion: InvasionSpec::default(),
            tss: TssSpec::default(),
            canonical: CanonicalSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_model(&self) -> Result<DemographyModel> {
        DemographyModel::new(self.model.clone())
    }

    pub fn dimorphic(&self) -> Result<DimorphicSpec> {
        self.dimorphic
            .ok_or_else(|| Error::Config("this command needs a [dimorphic] table with resident and mutant".into()))
    }

    /// One scenario per sweep value, or just `self` without a sweep.
    pub fn expand(&self) -> Result<Vec<(Option<f64>, Scenario)>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![(None, self.clone())]);
        };
        if sweep.values.is_empty() {
            return Err(Error::Config("sweep.values is empty".into()));
        }
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut s = self.clone();
                s.sweep = None;
                match sweep.parameter {
                    SweepParameter::K => {
                        if !(v >= 1.0 && v.fract() == 0.0) {
                            return Err(Error::Config(format!("sweep value {v} is not a valid system size")));
                        }
                        s.model.k = v as u64;
                    }
                    SweepParameter::Sigma => s.model.sigma = v,
                    SweepParameter::Mu => s.model.mu = v,
                }
                Ok((Some(v), s))
            })
            .collect()
    }

    /// Advisory on the separation of ecological and mutational time scales.
    pub fn time_scale_warning(&self) -> Option<String> {
        time_scale_warning(self.model.k, self.model.sigma, self.model.mu)
    }
}

/// Warns unless `ln K / sigma < 1 / (K mu)`. The upper side of the window,
/// exponential in `K`, has no computable constant and is not checked.
pub fn time_scale_warning(k: u64, sigma: f64, mu: f64) -> Option<String> {
    if mu <= 0.0 {
        return None;
    }
    let k = k as f64;
    let invasion_time = k.ln() / sigma;
    let mutation_time = 1.0 / (k * mu);
    (invasion_time >= mutation_time).then(|| {
        format!(
            "time scales not separated: ln K / sigma = {invasion_time:.3e} is not below 1 / (K mu) = {mutation_time:.3e}"
        )
    })
}
