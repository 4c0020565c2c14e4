//! TOML potential specifications.
//!
//! ```toml
//! type = "square_well"      # hard_core | square_well | shell | tabulated | sum
//! height = 6.0
//! radius = 1.0
//! inner_radius = 0.0        # optional, square_well only
//! hard_core_radius = 0.0    # optional extra hard core for any type
//! ```
//!
//! `shell` takes `mass` and `radius`; `tabulated` takes `grid_file`, a CSV of
//! `r,v` rows (an optional header row and `#` comments are allowed), resolved
//! relative to the spec file. `sum` lists its parts as `[[component]]` tables.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::RadialPotential;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    HardCore,
    SquareWell,
    Shell,
    Tabulated,
    Sum,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(rename = "type")]
    pub kind: Kind,
    pub radius: Option<f64>,
    pub inner_radius: Option<f64>,
    pub height: Option<f64>,
    pub mass: Option<f64>,
    pub grid_file: Option<PathBuf>,
    pub hard_core_radius: Option<f64>,
    #[serde(default)]
    pub component: Vec<PotentialSpec>,
}

fn required(value: Option<f64>, key: &str, kind: Kind) -> Result<f64> {
    value.ok_or_else(|| Error::InvalidPotential(format!("`{key}` is required for type {kind:?}")))
}

impl PotentialSpec {
    pub fn build(&self, base_dir: &Path) -> Result<RadialPotential> {
        let core = match self.kind {
            Kind::HardCore => RadialPotential::hard_core(required(self.radius, "radius", self.kind)?)?,
            Kind::SquareWell => RadialPotential::annulus(
                required(self.height, "height", self.kind)?,
                self.inner_radius.unwrap_or(0.0),
                required(self.radius, "radius", self.kind)?,
            )?,
            Kind::Shell => RadialPotential::shell(
                required(self.mass, "mass", self.kind)?,
                required(self.radius, "radius", self.kind)?,
            )?,
            Kind::Tabulated => {
                let rel = self
                    .grid_file
                    .as_ref()
                    .ok_or_else(|| Error::InvalidPotential("`grid_file` is required for type Tabulated".into()))?;
                let (r, v) = read_grid(&base_dir.join(rel))?;
                RadialPotential::tabulated(r, v)?
            }
            Kind::Sum => {
                if self.component.is_empty() {
                    return Err(Error::InvalidPotential("sum needs at least one [[component]]".into()));
                }
                let parts = self.component.iter().map(|c| c.build(base_dir)).collect::<Result<Vec<_>>>()?;
                RadialPotential::sum(&parts)?
            }
        };
        if self.kind != Kind::Sum && !self.component.is_empty() {
            return Err(Error::InvalidPotential("[[component]] is only allowed with type = \"sum\"".into()));
        }
        match self.hard_core_radius {
            Some(r) if r > 0.0 => RadialPotential::sum(&[core, RadialPotential::hard_core(r)?]),
            _ => Ok(core),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parse a spec from text; relative grid files resolve against `base_dir`.
pub fn parse_spec(text: &str, base_dir: &Path) -> Result<RadialPotential> {
    let spec: PotentialSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        Error::SpecSyntax { line, column, message: e.message().to_string() }
    })?;
    spec.build(base_dir)
}

pub fn load_spec(path: &Path) -> Result<RadialPotential> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_spec(&text, base)
}

fn read_grid(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid_err = |message: String| Error::GridFile { path: path.display().to_string(), message };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| grid_err(e.to_string()))?;
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| grid_err(e.to_string()))?;
        if rec.len() != 2 {
            return Err(grid_err(format!("row {}: expected 2 columns, found {}", i + 1, rec.len())));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => {
                r.push(x);
                v.push(y);
            }
            _ if i == 0 => continue, // header row
            _ => return Err(grid_err(format!("row {}: non-numeric entry", i + 1))),
        }
    }
    Ok((r, v))
}
