use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use roughlim::analysis::{default_eps, validate_eps};
use roughlim::family::RoughFamilySpec;
use roughlim::geometry::Aabb;
use roughlim::ideal::IdealSpec;
use roughlim::sequence::{generate, load_csv, SequencePrefix, SequenceSpec};
use roughlim::{DEFAULT_HORIZON, DEFAULT_RESOLUTION};

/// Output directory used when neither the flag, the environment nor the config names one.
pub const DEFAULT_OUT: &str = "roughlim-out";
pub const OUT_ENV: &str = "ROUGHLIM_OUT";

/// A bad config: the offending field and what is wrong with it.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl ToString) -> Self {
        ConfigError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoxSpec {
    Keyword(String),
    Bounds(Aabb),
}

impl Default for BoxSpec {
    fn default() -> Self {
        BoxSpec::Keyword("auto".into())
    }
}

/// The JSON config file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub sequence: Option<SequenceSpec>,
    pub horizon: Option<usize>,
    pub ideal: Option<IdealSpec>,
    pub family: Option<RoughFamilySpec>,
    #[serde(rename = "box")]
    pub bbox: Option<BoxSpec>,
    pub h: Option<f64>,
    pub eps: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub horizon: Option<usize>,
    pub h: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub from_csv: Option<PathBuf>,
}

/// The config after defaults and overrides, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub sequence: Option<SequenceSpec>,
    pub horizon: Option<usize>,
    pub ideal: IdealSpec,
    pub family: Option<RoughFamilySpec>,
    #[serde(rename = "box")]
    pub bbox: BoxSpec,
    pub h: f64,
    pub eps: Vec<f64>,
    pub out: PathBuf,
    pub seed: u64,
}

pub fn read_config(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let field = if field == "." { String::new() } else { field };
        ConfigError::new(&field, e.into_inner())
    })
}

impl RunConfig {
    pub fn resolve(raw: RawConfig, over: Overrides) -> Result<Self, ConfigError> {
        let h = over.h.or(raw.h).unwrap_or(DEFAULT_RESOLUTION);
        if !(h.is_finite() && h > 0.0) {
            return Err(ConfigError::new("h", format!("{h} must be positive")));
        }
        let horizon = over.horizon.or(raw.horizon);
        if horizon == Some(0) {
            return Err(ConfigError::new("horizon", "must be at least 1"));
        }
        let eps = raw.eps.unwrap_or_else(|| default_eps(h));
        validate_eps(&eps, h).map_err(|e| ConfigError::new("eps", e))?;
        let bbox = raw.bbox.unwrap_or_default();
        match &bbox {
            BoxSpec::Keyword(k) if k != "auto" => {
                return Err(ConfigError::new("box", format!("expected \"auto\" or {{lo, hi}}, got {k:?}")))
            }
            BoxSpec::Bounds(b) => {
                Aabb::new(b.lo.clone(), b.hi.clone()).map_err(|e| ConfigError::new("box", e))?;
            }
            _ => {}
        }
        let sequence = match over.from_csv {
            Some(path) => Some(SequenceSpec::Csv { path }),
            None => raw.sequence,
        };
        let out = over
            .out
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .or(raw.out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(RunConfig {
            sequence,
            horizon,
            ideal: raw.ideal.unwrap_or(IdealSpec::Fin),
            family: raw.family,
            bbox,
            h,
            eps,
            out,
            seed: over.seed.or(raw.seed).unwrap_or(0),
        })
    }

    /// Builds the prefix. CSV input uses every row unless a horizon is set;
    /// generated sequences default to [`DEFAULT_HORIZON`] terms. The resolved
    /// horizon is written back so reports echo it.
    pub fn prefix(&mut self) -> Result<SequencePrefix, ConfigError> {
        let spec = self
            .sequence
            .clone()
            .ok_or_else(|| ConfigError::new("sequence", "required by this command"))?;
        let x = match (&spec, self.horizon) {
            (SequenceSpec::Csv { path }, None) => load_csv(path),
            (_, n) => generate(&spec, n.unwrap_or(DEFAULT_HORIZON)),
        }
        .map_err(|e| ConfigError::new("sequence", e))?;
        self.horizon = Some(x.horizon());
        self.ideal
            .at_horizon(x.horizon())
            .map_err(|e| ConfigError::new("ideal", e))?;
        if let BoxSpec::Bounds(b) = &self.bbox {
            if b.dim() != x.dim() {
                return Err(ConfigError::new(
                    "box",
                    format!("{}-dimensional box for a {}-dimensional sequence", b.dim(), x.dim()),
                ));
            }
        }
        Ok(x)
    }

    pub fn family_spec(&self) -> Result<RoughFamilySpec, ConfigError> {
        self.family
            .clone()
            .ok_or_else(|| ConfigError::new("family", "required by this command"))
    }

    /// Checks the family against the dimension and the box it will be evaluated on.
    pub fn check_family(&self, family: &RoughFamilySpec, dim: usize, bbox: &Aabb) -> Result<(), ConfigError> {
        family
            .validate(dim, Some(bbox))
            .map_err(|e| ConfigError::new("family", e))
    }

    pub fn fixed_box(&self) -> Option<&Aabb> {
        match &self.bbox {
            BoxSpec::Bounds(b) => Some(b),
            BoxSpec::Keyword(_) => None,
        }
    }
}
