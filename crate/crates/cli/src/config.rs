//! TOML configuration: schema, strict-mode parsing and construction of the
//! core objects.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sda_core::smoother::SmootherConfig;
use sda_core::solver::{InitStrategy, SolveOptions};
use sda_core::synth::{MixtureModel, NoiseSpec, Primitive, TimeSpec};

use crate::CliError;

#[derive(Debug, Deserialize, Serialize)]
pub struct Config {
    pub model: Option<ModelSection>,
    pub smoother: SmootherSection,
    pub solver: SolverSection,
    pub generate: Option<GenerateSection>,
    pub quadrature: Option<QuadratureSection>,
    pub rate_study: Option<RateStudySection>,
    pub grad_check: Option<GradCheckSection>,
    pub gamma_check: Option<GammaCheckSection>,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct ModelSection {
    pub m: usize,
    pub s: usize,
    pub delta: f64,
    pub weights: Vec<f64>,
    pub tracks: Vec<TrackSpec>,
    pub noise: NoiseSection,
    pub time: Option<TimeSection>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrackSpec {
    Constant {
        value: Vec<f64>,
    },
    Affine {
        intercept: Vec<f64>,
        slope: Vec<f64>,
    },
    Sinusoid {
        offset: Vec<f64>,
        amplitude: Vec<f64>,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Cubic {
        c0: Vec<f64>,
        c1: Vec<f64>,
        c2: Vec<f64>,
        c3: Vec<f64>,
    },
}

impl TrackSpec {
    pub fn to_primitive(&self) -> Primitive {
        match self {
            TrackSpec::Constant { value } => Primitive::Constant {
                value: value.clone(),
            },
            TrackSpec::Affine { intercept, slope } => Primitive::Affine {
                intercept: intercept.clone(),
                slope: slope.clone(),
            },
            TrackSpec::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => Primitive::Sinusoid {
                offset: offset.clone(),
                amplitude: amplitude.clone(),
                frequency: *frequency,
                phase: *phase,
            },
            TrackSpec::Cubic { c0, c1, c2, c3 } => Primitive::Cubic {
                c0: c0.clone(),
                c1: c1.clone(),
                c2: c2.clone(),
                c3: c3.clone(),
            },
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NoiseSection {
    Gaussian { sigma: f64 },
    StudentT { dof: f64, scale: f64 },
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TimeSection {
    Uniform,
    Beta { a: f64, b: f64 },
}

#[derive(Debug, Deserialize, Serialize)]
pub struct SmootherSection {
    pub lambda: f64,
    pub ridge: Option<f64>,
    /// Grid size; defaults to the model grid.
    pub m: Option<usize>,
    /// Penalty order; defaults to the model order.
    pub s: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct SolverSection {
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub init: Option<String>,
    /// Separation parameter for the post-hoc check; defaults to the model
    /// delta.
    pub delta: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct GenerateSection {
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub labels: bool,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct QuadratureSection {
    pub t_nodes: Option<usize>,
    pub y_nodes: Option<usize>,
    pub y_radius: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct RateStudySection {
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub reference_n: usize,
    pub base_seed: u64,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct GradCheckSection {
    pub directions: usize,
    pub step: f64,
    pub seed: u64,
    /// Relative offset applied to the truth to obtain the evaluation point.
    pub perturbation: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct GammaCheckSection {
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub base_seed: u64,
}

impl Config {
    /// Load a config file. Unknown keys are fatal in strict mode and
    /// reported on stderr otherwise.
    pub fn load(path: &Path, strict: bool) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let de = toml::de::Deserializer::new(&text);
        let mut unknown = Vec::new();
        let config: Config = serde_ignored::deserialize(de, |path| {
            unknown.push(path.to_string());
        })
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if !unknown.is_empty() {
            let list = unknown.join(", ");
            if strict {
                return Err(CliError::input(format!(
                    "{}: unknown config keys: {list}",
                    path.display()
                )));
            }
            eprintln!("warning: ignoring unknown config keys: {list}");
        }
        Ok(config)
    }

    pub fn model_section(&self) -> Result<&ModelSection, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::input("config is missing the [model] section".into()))
    }

    pub fn build_model(&self) -> Result<MixtureModel, CliError> {
        let section = self.model_section()?;
        let primitives: Vec<Primitive> =
            section.tracks.iter().map(TrackSpec::to_primitive).collect();
        let noise = match section.noise {
            NoiseSection::Gaussian { sigma } => NoiseSpec::Gaussian { sigma },
            NoiseSection::StudentT { dof, scale } => NoiseSpec::StudentT { dof, scale },
        };
        let time = match section.time {
            None | Some(TimeSection::Uniform) => TimeSpec::Uniform,
            Some(TimeSection::Beta { a, b }) => TimeSpec::Beta { a, b },
        };
        Ok(MixtureModel::from_primitives(
            &primitives,
            section.weights.clone(),
            noise,
            time,
            section.delta,
            section.m,
            section.s,
        )?)
    }

    pub fn smoother_config(&self) -> Result<SmootherConfig, CliError> {
        let m = self
            .smoother
            .m
            .or(self.model.as_ref().map(|s| s.m))
            .ok_or_else(|| CliError::input("no grid size: set [smoother].m or [model].m".into()))?;
        let s = self
            .smoother
            .s
            .or(self.model.as_ref().map(|s| s.s))
            .ok_or_else(|| {
                CliError::input("no penalty order: set [smoother].s or [model].s".into())
            })?;
        let ridge = self.smoother.ridge.unwrap_or(SmootherConfig::DEFAULT_RIDGE);
        Ok(SmootherConfig::with_ridge(
            s,
            self.smoother.lambda,
            m,
            ridge,
        )?)
    }

    pub fn solve_options(&self, seed_override: Option<u64>) -> Result<SolveOptions, CliError> {
        let init = match self.solver.init.as_deref() {
            None | Some("perturbed-global") => InitStrategy::PerturbedGlobal,
            Some("random-points") => InitStrategy::RandomPoints,
            Some(other) => {
                return Err(CliError::input(format!(
                    "unknown init strategy {other:?}; use \"perturbed-global\" or \"random-points\""
                )))
            }
        };
        Ok(SolveOptions {
            restarts: self.solver.restarts,
            seed: seed_override.unwrap_or(self.solver.seed),
            init,
        })
    }

    pub fn delta(&self) -> Result<f64, CliError> {
        self.solver
            .delta
            .or(self.model.as_ref().map(|m| m.delta))
            .ok_or_else(|| CliError::input("no delta: set [solver].delta or [model].delta".into()))
    }

    /// Hash of the canonical serialization of the model section; stamped
    /// into generated dataset sidecars.
    pub fn model_hash(&self) -> Result<String, CliError> {
        use sha2::{Digest, Sha256};
        let section = self.model_section()?;
        let canonical = toml::to_string(section)
            .map_err(|e| CliError::input(format!("cannot serialize model section: {e}")))?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(format!("{digest:x}"))
    }
}
