//! Run configuration: every path a command touches is checked before any
//! numerics start.

use std::path::{Path, PathBuf};

use num_rational::Rational64;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tolerance: Option<f64>,
    /// `(key, value)` pairs that took precedence over a run file.
    pub overrides: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(subcommand: &str) -> Self {
        Self { subcommand: subcommand.to_owned(), ..Self::default() }
    }

    pub fn input(mut self, path: Option<&Path>) -> Self {
        self.inputs.extend(path.map(Path::to_path_buf));
        self
    }

    pub fn output(mut self, path: Option<&Path>) -> Self {
        self.outputs.extend(path.map(Path::to_path_buf));
        self
    }

    /// Inputs must exist as files; outputs must have an existing parent
    /// directory and must not be directories themselves.
    pub fn resolve(mut self) -> Result<Self, Failure> {
        for p in &mut self.inputs {
            if !p.is_file() {
                return Err(Failure::Validation(format!("{}: input file not found", p.display())));
            }
            *p = p.canonicalize().map_err(|e| Failure::io(p, e))?;
        }
        for p in &mut self.outputs {
            if p.is_dir() {
                return Err(Failure::Validation(format!("{}: output path is a directory", p.display())));
            }
            let parent = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            if !parent.is_dir() {
                return Err(Failure::Validation(format!("{}: output directory does not exist", parent.display())));
            }
            let name = p.file_name().map(ToOwned::to_owned).unwrap_or_default();
            *p = parent.canonicalize().map_err(|e| Failure::io(&parent, e))?.join(name);
        }
        Ok(self)
    }
}

/// Pipeline run file. Relative paths resolve against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineFile {
    pub potential: Option<PathBuf>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub delta: Option<f64>,
    pub rho_a3: Option<Vec<f64>>,
    pub kappa: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl PipelineFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let mut file: Self =
            toml::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        file.potential = file.potential.map(|p| base.join(p));
        file.out_dir = file.out_dir.map(|p| base.join(p));
        Ok(file)
    }

    pub fn kappa(&self) -> Result<Option<Rational64>, Failure> {
        self.kappa.as_deref().map(crate::args::parse_rational).transpose().map_err(Failure::Validation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "T = 10.0\nbogus = 1\n").unwrap();
        let err = PipelineFile::load(&path).unwrap_err();
        assert!(matches!(err, Failure::Validation(m) if m.contains("bogus")));
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "potential = \"hc.toml\"\nrho_a3 = [1e-6]\nkappa = \"1/5\"\n").unwrap();
        let f = PipelineFile::load(&path).unwrap();
        assert_eq!(f.potential.as_deref().unwrap(), dir.path().join("hc.toml"));
        assert_eq!(f.kappa().unwrap(), Some(Rational64::new(1, 5)));
    }

    #[test]
    fn paths_resolved_up_front() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.toml");
        assert!(RunConfig::new("scatter").input(Some(&missing)).resolve().is_err());
        let bad_out = dir.path().join("no/such/dir/out.csv");
        assert!(RunConfig::new("scatter").output(Some(&bad_out)).resolve().is_err());
        let ok = RunConfig::new("scatter").output(Some(&dir.path().join("out.csv"))).resolve().unwrap();
        assert!(ok.outputs[0].is_absolute());
    }
}
