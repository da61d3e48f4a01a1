//! TOML run configuration: one file describes the model (channels +
//! potential), solver settings, and per-command blocks, so a run is
//! reproducible from the file alone. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use jost_core::{
    Channel, ChannelSet, GridSpec, JostError, NoroTaylorPotential, PolyExpPotential,
    RadialPotential, Result, SolverSettings, TabulatedPotential, ZeroPotential,
};
use nalgebra::DMatrix;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub solver: SolverSettings,
    pub spectrum: Option<SpectrumConfig>,
    pub scan: Option<ScanConfig>,
    pub expand: Option<ExpandConfig>,
    pub eval: Option<EvalConfig>,
    pub accuracy_map: Option<AccuracyMapConfig>,
    pub domain: Option<DomainConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "one")]
    pub hbar: f64,
    pub channels: Vec<ChannelConfig>,
    pub potential: PotentialConfig,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub threshold: f64,
    pub mass: f64,
    #[serde(default)]
    pub l: u32,
}

/// Potential spec: `kind` picks the family, the other keys belong to one
/// family each. A plain struct instead of a tagged enum so that unknown or
/// out-of-place keys fail loudly.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: String,
    /// poly_exp: coupling matrix, row-major nested arrays
    pub strength: Option<Vec<Vec<f64>>>,
    /// poly_exp: power of r in the prefactor
    pub power: Option<u32>,
    /// poly_exp: exponential decay rate
    pub rate: Option<f64>,
    /// table: whitespace-separated `r V11 V12 ...` file
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    #[serde(default = "default_samples_per_unit")]
    pub samples_per_unit: f64,
    #[serde(default)]
    pub seeds: Vec<SeedConfig>,
}

fn default_samples_per_unit() -> f64 {
    400.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub guess: [f64; 2],
    pub sheet: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandConfig {
    pub center: [f64; 2],
    pub order: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub table: PathBuf,
    pub energy: [f64; 2],
    pub sheet: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccuracyMapConfig {
    pub table: PathBuf,
    pub sheet: String,
    pub grid: GridSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub grid: GridSpec,
}

impl RunConfig {
    /// Parse `path`, apply dotted-path overrides, and remember the config's
    /// directory so relative file references resolve against it.
    pub fn load(path: &Path, overrides: &[String]) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| JostError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| JostError::InvalidInput(format!("{}: {e}", path.display())))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| JostError::InvalidInput(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        Ok((cfg, base))
    }

    pub fn model(&self) -> Result<&ModelConfig> {
        self.model
            .as_ref()
            .ok_or_else(|| JostError::InvalidInput("config has no [model] section".into()))
    }
}

/// `key.path=value`: the value is parsed as a TOML literal, or kept as a
/// string if that fails. Intermediate tables are created on demand.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| JostError::InvalidInput(format!("--override needs KEY=VALUE, got {spec:?}")))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(JostError::InvalidInput(format!("--override {spec:?} has an empty key")));
    }
    let value = format!("x = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|t| t.get("x").cloned())
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    let mut current = table;
    for seg in &segments[..segments.len() - 1] {
        current = current
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                JostError::InvalidInput(format!("--override {path}: {seg} is not a table"))
            })?;
    }
    current.insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}

impl ModelConfig {
    /// Build the channel set and the potential; `base` anchors relative
    /// table-file paths.
    pub fn build(&self, base: &Path) -> Result<(ChannelSet, Box<dyn RadialPotential>)> {
        let channels = self
            .channels
            .iter()
            .map(|c| Channel::new(c.threshold, c.mass, c.l))
            .collect::<Result<Vec<_>>>()?;
        let cs = ChannelSet::new(channels, self.hbar)?;
        let pot = self.potential.build(cs.len(), base)?;
        if pot.n_channels() != cs.len() {
            return Err(JostError::InvalidInput(format!(
                "potential couples {} channels, model defines {}",
                pot.n_channels(),
                cs.len()
            )));
        }
        Ok((cs, pot))
    }
}

impl PotentialConfig {
    fn reject_foreign(&self, allowed: &[&str]) -> Result<()> {
        let set = [
            ("strength", self.strength.is_some()),
            ("power", self.power.is_some()),
            ("rate", self.rate.is_some()),
            ("file", self.file.is_some()),
        ];
        for (name, present) in set {
            if present && !allowed.contains(&name) {
                return Err(JostError::InvalidInput(format!(
                    "potential kind {:?} does not take a {name:?} key",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    fn build(&self, n_channels: usize, base: &Path) -> Result<Box<dyn RadialPotential>> {
        match self.kind.as_str() {
            "noro_taylor" => {
                self.reject_foreign(&[])?;
                Ok(Box::new(NoroTaylorPotential))
            }
            "zero" => {
                self.reject_foreign(&[])?;
                Ok(Box::new(ZeroPotential::new(n_channels)))
            }
            "poly_exp" => {
                self.reject_foreign(&["strength", "power", "rate"])?;
                let rows = self.strength.as_ref().ok_or_else(|| {
                    JostError::InvalidInput("poly_exp needs a strength matrix".into())
                })?;
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(JostError::InvalidInput("strength matrix must be square".into()));
                }
                let strength = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                let power = self.power.ok_or_else(|| {
                    JostError::InvalidInput("poly_exp needs a power".into())
                })?;
                let rate = self.rate.ok_or_else(|| {
                    JostError::InvalidInput("poly_exp needs a rate".into())
                })?;
                Ok(Box::new(PolyExpPotential::new(strength, power, rate)?))
            }
            "table" => {
                self.reject_foreign(&["file"])?;
                let file = self.file.as_ref().ok_or_else(|| {
                    JostError::InvalidInput("table potential needs a file".into())
                })?;
                Ok(Box::new(TabulatedPotential::from_path(&resolve(base, file))?))
            }
            other => Err(JostError::InvalidInput(format!(
                "unknown potential kind {other:?} (expected noro_taylor, zero, poly_exp, or table)"
            ))),
        }
    }
}

/// Relative paths in a config count from the config file's directory.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
