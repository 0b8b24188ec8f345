//! Experiment configuration and run provenance.

use std::path::PathBuf;

use circlewalk_core::packer::{Geometry, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Regular {
        d: usize,
        generations: usize,
        seed: Option<u64>,
    },
    PoissonDelaunay {
        lambda: f64,
        #[serde(rename = "R")]
        radius: f64,
        #[serde(default = "default_margin")]
        margin: f64,
        seed: Option<u64>,
    },
}

fn default_margin() -> f64 {
    2.0
}

impl GeneratorSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            GeneratorSpec::Regular { seed, .. } | GeneratorSpec::PoissonDelaunay { seed, .. } => *seed,
        }
    }

    /// Disc geometry except for the flat lattice.
    pub fn default_geometry(&self) -> Geometry {
        match self {
            GeneratorSpec::Regular { d: 6, .. } => Geometry::Plane,
            _ => Geometry::Disc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSpec {
    pub walks: usize,
    pub steps: usize,
    pub seed: Option<u64>,
    /// Walks stop on entering vertices this many hops from the boundary.
    #[serde(default = "default_collar")]
    pub collar: usize,
}

fn default_collar() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    pub burn_in: f64,
    pub eps: f64,
    pub level: u32,
    /// Largest accepted `|speed - decay|` in combined standard errors.
    pub max_z: f64,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec { burn_in: 0.4, eps: 1e-3, level: 6, max_z: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub walk: Option<WalkSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.generator.seed().is_none() {
            return Err(CliError::Config("generator.seed is required".into()));
        }
        if let Some(w) = &self.walk {
            if w.seed.is_none() {
                return Err(CliError::Config("walk.seed is required".into()));
            }
        }
        if !(0.0..1.0).contains(&self.analysis.burn_in) {
            return Err(CliError::Config(format!("analysis.burn_in must lie in [0, 1), got {}", self.analysis.burn_in)));
        }
        self.solver.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry.unwrap_or_else(|| self.generator.default_geometry())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("configs serialize"))
}

/// Provenance written into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new<T: Serialize>(config: &T, seed: Option<u64>) -> Self {
        Provenance { config_sha256: config_hash(config), seed }
    }

    pub fn lines(&self) -> Vec<String> {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        vec![format!("config_sha256={}", self.config_sha256), format!("seed={seed}")]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_seed_is_a_config_error() {
        let e = ExperimentConfig::parse(r#"{"generator": {"kind": "regular", "d": 7, "generations": 3}}"#);
        assert!(matches!(e, Err(CliError::Config(_))));
        let e = ExperimentConfig::parse(
            r#"{"generator": {"kind": "regular", "d": 7, "generations": 3, "seed": 1}, "walk": {"walks": 2, "steps": 5}}"#,
        );
        assert!(matches!(e, Err(CliError::Config(_))));
    }

    #[test]
    fn defaults_and_hash_stability() {
        let a = ExperimentConfig::parse(r#"{"generator": {"kind": "poisson_delaunay", "lambda": 1, "R": 4, "seed": 1}}"#).unwrap();
        let b = ExperimentConfig::parse("{ \"generator\" : {\"seed\":1, \"R\":4.0, \"lambda\":1.0, \"kind\":\"poisson_delaunay\"} }").unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(a.geometry(), Geometry::Disc);
        assert_eq!(a.solver, SolverConfig::default());
        assert!(matches!(a.generator, GeneratorSpec::PoissonDelaunay { margin, .. } if margin == 2.0));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let e = ExperimentConfig::parse(r#"{"generator": {"kind": "regular", "d": 7, "generations": 3, "seed": 1}, "colour": 1}"#);
        assert!(matches!(e, Err(CliError::Config(_))));
    }
}
