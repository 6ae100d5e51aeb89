//! JSON configuration of `gnlab verify`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use gnlab::gn::{auto_half_width, GNProblem, Tolerances};
use gnlab::numerics::logspace;
use gnlab::{SpaceSpec, TestFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Ribfs,
    Lorentz,
    Orlicz,
    Falsify,
}

/// Log-spaced dilations `count` points from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max > self.min && self.count >= 2) {
            bail!("s range needs 0 < min < max and count >= 2, got {self:?}");
        }
        Ok(logspace(self.min, self.max, self.count))
    }
}

fn default_family() -> Vec<String> {
    vec!["gauss:r=1".into(), "gauss:r=0.6".into(), "poly:r=1,m=6".into()]
}

fn default_dim() -> usize {
    1
}

fn default_res() -> usize {
    512
}

/// Raw configuration as written by the user; spaces and families stay in
/// their string form so that parse errors can name the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub mode: Mode,
    pub j: usize,
    pub k: usize,
    pub x: String,
    pub y: String,
    pub z: String,
    #[serde(default = "default_family")]
    pub family: Vec<String>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_res")]
    pub res: usize,
    #[serde(default)]
    pub half_width: Option<f64>,
    /// Dilations of the curve; defaults to `[1/4, 4]` for the verifiers and
    /// `[1e-2, 1e2]` for `falsify`.
    #[serde(default)]
    pub s: Option<SRange>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

pub fn parse_space(field: &str, s: &str) -> Result<SpaceSpec> {
    s.parse().with_context(|| format!("field `{field}` = \"{s}\""))
}

pub fn parse_family(field: &str, s: &str) -> Result<TestFamily> {
    s.parse().with_context(|| format!("field `{field}` = \"{s}\""))
}

impl VerifyConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn spaces(&self) -> Result<(SpaceSpec, SpaceSpec, SpaceSpec)> {
        Ok((
            parse_space("x", &self.x)?,
            parse_space("y", &self.y)?,
            parse_space("z", &self.z)?,
        ))
    }

    pub fn s_values(&self) -> Result<Vec<f64>> {
        let default = match self.mode {
            Mode::Falsify => SRange {
                min: 1e-2,
                max: 1e2,
                count: 17,
            },
            _ => SRange {
                min: 0.25,
                max: 4.0,
                count: 9,
            },
        };
        self.s.unwrap_or(default).values()
    }

    pub fn problem(&self) -> Result<GNProblem> {
        let (x, y, z) = self.spaces()?;
        let family = self
            .family
            .iter()
            .enumerate()
            .map(|(i, f)| parse_family(&format!("family[{i}]"), f))
            .collect::<Result<Vec<_>>>()?;
        let half_width = self
            .half_width
            .unwrap_or_else(|| auto_half_width(&family, self.dim, self.res));
        let p = GNProblem {
            j: self.j,
            k: self.k,
            x,
            y,
            z,
            family,
            dim: self.dim,
            res: self.res,
            half_width,
            tolerances: self.tolerances,
        };
        p.validate()?;
        Ok(p)
    }
}
