//! Decoder and experiment configuration, read from flat TOML files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cell::{default_geometry, CellGeometry};
use crate::error::{Error, Result};

/// Name of the built-in cell geometry.
pub const DEFAULT_GEOMETRY: &str = "staircase";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    /// Belief-propagation rounds per level.
    pub bp_rounds: usize,
    /// Weight of the previous message in each update, in `[0, 1)`.
    pub damping: f64,
    /// `"staircase"` or a path to a JSON-encoded `CellGeometry`.
    pub geometry: String,
    /// Collect per-level BP statistics.
    pub diagnostics: bool,
    /// Process the cells of a level on the rayon pool.
    pub parallel_cells: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            bp_rounds: 3,
            damping: 0.0,
            geometry: DEFAULT_GEOMETRY.into(),
            diagnostics: false,
            parallel_cells: false,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config(format!("damping {} not in [0, 1)", self.damping)));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<CellGeometry> {
        if self.geometry == DEFAULT_GEOMETRY {
            return Ok(default_geometry());
        }
        let text = std::fs::read_to_string(&self.geometry)?;
        let g: CellGeometry = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", self.geometry)))?;
        g.validate()?;
        Ok(g)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// A Monte Carlo sweep over lattice sizes and error rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub ells: Vec<usize>,
    pub ps: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderConfig,
    /// Output prefix; `.csv` and `.json` are appended.
    pub output: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatSpec {
    ells: Vec<usize>,
    ps: Vec<f64>,
    trials: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    bp_rounds: Option<usize>,
    #[serde(default)]
    damping: Option<f64>,
    #[serde(default)]
    geometry: Option<String>,
    #[serde(default)]
    diagnostics: Option<bool>,
    #[serde(default)]
    parallel_cells: Option<bool>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ells.is_empty() || self.ps.is_empty() {
            return Err(Error::Config("ells and ps must be non-empty".into()));
        }
        for &l in &self.ells {
            if l < 4 || !l.is_power_of_two() {
                return Err(Error::LatticeSize(l, "power of two >= 4"));
            }
        }
        for &p in &self.ps {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Probability(p));
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.decoder.validate()
    }

    /// Parses a flat TOML file; decoder keys sit next to the sweep keys.
    pub fn from_toml(text: &str) -> Result<Self> {
        let f: FlatSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let d = DecoderConfig::default();
        let spec = Self {
            ells: f.ells,
            ps: f.ps,
            trials: f.trials,
            seed: f.seed,
            output: f.output,
            decoder: DecoderConfig {
                bp_rounds: f.bp_rounds.unwrap_or(d.bp_rounds),
                damping: f.damping.unwrap_or(d.damping),
                geometry: f.geometry.unwrap_or(d.geometry),
                diagnostics: f.diagnostics.unwrap_or(d.diagnostics),
                parallel_cells: f.parallel_cells.unwrap_or(d.parallel_cells),
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = DecoderConfig::from_toml("").unwrap();
        assert_eq!(c, DecoderConfig::default());
        assert_eq!(c.bp_rounds, 3);
        assert_eq!(c.damping, 0.0);
        assert!(c.geometry().is_ok());
    }

    #[test]
    fn flat_spec() {
        let s = ExperimentSpec::from_toml(
            "ells = [8, 16]\nps = [0.1, 0.12]\ntrials = 50\nseed = 7\nbp_rounds = 0\n",
        )
        .unwrap();
        assert_eq!(s.ells, vec![8, 16]);
        assert_eq!(s.decoder.bp_rounds, 0);
        assert_eq!(s.seed, 7);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentSpec::from_toml("ells = [6]\nps = [0.1]\ntrials = 1\n").is_err());
        assert!(ExperimentSpec::from_toml("ells = [8]\nps = [1.5]\ntrials = 1\n").is_err());
        assert!(ExperimentSpec::from_toml("ells = [8]\nps = [0.1]\ntrials = 0\n").is_err());
        assert!(ExperimentSpec::from_toml("ells = [8]\nps = [0.1]\ntrials = 1\nfoo = 1\n").is_err());
        assert!(DecoderConfig::from_toml("damping = 1.0").is_err());
    }

    #[test]
    fn geometry_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        std::fs::write(&path, serde_json::to_string(&default_geometry()).unwrap()).unwrap();
        let c = DecoderConfig {
            geometry: path.to_string_lossy().into_owned(),
            ..Default::default()
        };
        assert_eq!(c.geometry().unwrap(), default_geometry());
    }
}
