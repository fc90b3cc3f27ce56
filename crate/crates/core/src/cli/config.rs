//! Run configuration: a strict TOML schema with one table per module.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::degrees::geometric_grid;
use crate::exhaustion::{
    catalog_exhaustion, ExhaustionName, Filtration, FiltrationKind, SamplerConfig, SamplingScheme,
};
use crate::geometry::MapName;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapName,
    pub exhaustion: ExhaustionName,
    pub profile: ProfileConfig,
    #[serde(default)]
    pub dictionary: DictionaryConfig,
    #[serde(default)]
    pub criterion: CriterionConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default = "default_filtration")]
    pub filtration: FiltrationKind,
    pub grid: GridConfig,
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scheme")]
    pub sampler: SamplingScheme,
    pub shell_rel_width: Option<f64>,
    pub shell_min_width: Option<f64>,
}

fn default_filtration() -> FiltrationKind {
    FiltrationKind::TauSublevel
}

fn default_scheme() -> SamplingScheme {
    SamplingScheme::Rejection
}

/// Either a geometric grid `{min, max, ratio}` or explicit `radii`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub ratio: Option<f64>,
    pub radii: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionaryConfig {
    pub degree_cap: u32,
    pub size: usize,
    /// Seeds the random test-form weights; independent of the sampling seed
    /// so that reseeded runs measure the same dictionary.
    pub seed: u64,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        DictionaryConfig {
            degree_cap: 2,
            size: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CriterionConfig {
    #[default]
    None,
    Thm2 {
        /// Defaults to `2 (2^C2 + 1)` from the finite-type fit.
        k_doubling: Option<f64>,
        #[serde(default = "default_count")]
        count: usize,
    },
    Thm3 {
        epsilon: f64,
        #[serde(default = "default_l")]
        l: f64,
    },
}

fn default_count() -> usize {
    4
}

fn default_l() -> f64 {
    10.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
    Plotdata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json, OutputFormat::Csv, OutputFormat::Plotdata]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

/// Parses `key=value`; the value is read as a TOML value, falling back to a string.
fn parse_override(item: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_owned).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::Config(format!("override key `{key}` has an empty segment")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
    Ok((path, value))
}

fn set_path(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("override paths are nonempty");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path through non-table key `{p}`")))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// A parsed configuration together with the text it was read from, so that
/// validation messages can point at lines.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// The effective TOML (the original file, or its re-serialization after overrides).
    pub source: String,
}

impl LoadedConfig {
    pub fn from_str(source: &str, overrides: &[String]) -> Result<Self> {
        let source = if overrides.is_empty() {
            source.to_owned()
        } else {
            let mut table: toml::Table =
                toml::from_str(source).map_err(|e| Error::Config(format!("config: {e}")))?;
            for item in overrides {
                let (path, value) = parse_override(item)?;
                set_path(&mut table, &path, value)?;
            }
            toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?
        };
        let config: RunConfig = toml::from_str(&source).map_err(|e| {
            let origin = if overrides.is_empty() { "config" } else { "config after overrides" };
            Error::Config(format!("{origin}: {e}"))
        })?;
        let loaded = LoadedConfig { config, source };
        loaded.validate()?;
        Ok(loaded)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text, overrides)
    }

    /// 1-based line of a dotted key, searched from the deepest table header outward.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        let parts: Vec<&str> = key.split('.').collect();
        for split in (0..parts.len()).rev() {
            let section = parts[..split].join(".");
            let name = parts[split];
            let mut current = String::new();
            for (i, line) in self.source.lines().enumerate() {
                let t = line.trim();
                if t.starts_with('[') {
                    current = t.trim_matches(|c| c == '[' || c == ']').trim().to_owned();
                    continue;
                }
                if current == section {
                    if let Some(rest) = t.strip_prefix(name) {
                        if rest.trim_start().starts_with('=') {
                            return Some(i + 1);
                        }
                    }
                }
            }
        }
        None
    }

    fn fail(&self, key: &str, message: String) -> Error {
        match self.line_of(key) {
            Some(line) => Error::Config(format!("line {line}: {key}: {message}")),
            None => Error::Config(format!("{key}: {message}")),
        }
    }

    fn validate(&self) -> Result<()> {
        let c = &self.config;
        let p = &c.profile;
        if p.n_samples == 0 {
            return Err(self.fail("profile.n_samples", "must be positive".into()));
        }
        for (key, v) in [
            ("profile.shell_rel_width", p.shell_rel_width),
            ("profile.shell_min_width", p.shell_min_width),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(self.fail(key, format!("must be positive, got {v}")));
                }
            }
        }
        let grid = self.grid()?;
        let exh = catalog_exhaustion(&c.exhaustion).map_err(|e| self.fail("exhaustion", e.to_string()))?;
        let filtration = Filtration::new(exh, p.filtration).map_err(|e| self.fail("profile.filtration", e.to_string()))?;
        let r0 = filtration.r0_level();
        if grid[0] <= r0 {
            let key = if p.grid.radii.is_some() { "profile.grid.radii" } else { "profile.grid.min" };
            return Err(self.fail(key, format!("grid minimum {} must exceed r0 = {r0}", grid[0])));
        }
        if c.dictionary.size == 0 {
            return Err(self.fail("dictionary.size", "must be positive".into()));
        }
        if c.dictionary.degree_cap == 0 {
            return Err(self.fail("dictionary.degree_cap", "must be positive".into()));
        }
        match &c.criterion {
            CriterionConfig::None => {}
            CriterionConfig::Thm2 { k_doubling, count } => {
                if let Some(k) = k_doubling {
                    if !(k.is_finite() && *k > 1.0) {
                        return Err(self.fail("criterion.k_doubling", format!("must exceed 1, got {k}")));
                    }
                }
                if *count == 0 {
                    return Err(self.fail("criterion.count", "must be positive".into()));
                }
            }
            CriterionConfig::Thm3 { epsilon, l } => {
                if !(*epsilon > 0.0 && *epsilon < 1.0) {
                    return Err(self.fail("criterion.epsilon", format!("must lie in (0, 1), got {epsilon}")));
                }
                if !(l.is_finite() && *l > 0.0) {
                    return Err(self.fail("criterion.l", format!("must be positive, got {l}")));
                }
            }
        }
        if c.output.formats.is_empty() {
            return Err(self.fail("output.formats", "must name at least one format".into()));
        }
        Ok(())
    }

    /// The radius grid in level units of the configured filtration.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = &self.config.profile.grid;
        match (g.min, g.max, g.ratio, &g.radii) {
            (Some(min), Some(max), Some(ratio), None) => {
                if !(min.is_finite() && min > 0.0) {
                    return Err(self.fail("profile.grid.min", format!("must be positive, got {min}")));
                }
                if !(max.is_finite() && max > min) {
                    return Err(self.fail("profile.grid.max", format!("must exceed min, got {max}")));
                }
                if !(ratio.is_finite() && ratio > 1.0) {
                    return Err(self.fail("profile.grid.ratio", format!("must exceed 1, got {ratio}")));
                }
                geometric_grid(min, max, ratio).map_err(|e| self.fail("profile.grid", e.to_string()))
            }
            (None, None, None, Some(radii)) => {
                let ok = !radii.is_empty()
                    && radii.iter().all(|r| r.is_finite() && *r > 0.0)
                    && radii.windows(2).all(|w| w[1] > w[0]);
                if !ok {
                    return Err(self.fail(
                        "profile.grid.radii",
                        "must be a nonempty strictly increasing list of positive radii".into(),
                    ));
                }
                Ok(radii.clone())
            }
            _ => Err(self.fail(
                "profile.grid",
                "give either {min, max, ratio} or {radii}, not a mixture".into(),
            )),
        }
    }

    pub fn sampler(&self) -> SamplerConfig {
        let p = &self.config.profile;
        let mut cfg = match p.sampler {
            SamplingScheme::Rejection => SamplerConfig::default(),
            SamplingScheme::Stratified => SamplerConfig::stratified(),
        };
        if let Some(w) = p.shell_rel_width {
            cfg.shell_rel_width = w;
        }
        if let Some(w) = p.shell_min_width {
            cfg.shell_min_width = w;
        }
        cfg
    }
}
