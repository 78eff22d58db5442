use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::SpinNetwork;
use crate::sequence::{ExperimentSpec, RunOptions};

/// One reproducible batch: a network, its experiments and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub network_file: PathBuf,
    pub experiment_files: Vec<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub mask_sub_300ns: bool,
}

fn schema(file: &Path, message: impl ToString) -> Error {
    Error::Schema { file: file.display().to_string(), message: message.to_string() }
}

/// Parses a JSON file; parse errors carry the file and line.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(path, e))?;
    serde_json::from_str(&text).map_err(|e| schema(path, e))
}

impl RunManifest {
    /// Loads a manifest; relative paths inside it are taken relative to
    /// the manifest's own directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut m: RunManifest = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut m.network_file);
        fix(&mut m.output_dir);
        m.experiment_files.iter_mut().for_each(fix);
        m.validate().map_err(|e| schema(path, e))?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment_files.is_empty() {
            return Err(Error::InvalidArgument("experiment list is empty".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn options(&self) -> RunOptions {
        RunOptions { seed: self.seed, noise_sigma: self.noise_sigma, mask_sub_300ns: self.mask_sub_300ns }
    }

    pub fn load_network(&self) -> Result<SpinNetwork> {
        let file = read_json(&self.network_file)?;
        SpinNetwork::from_file_model(file).map_err(|e| schema(&self.network_file, e))
    }

    /// Reads every experiment and checks it against `network`.
    pub fn load_experiments(&self, network: &SpinNetwork) -> Result<Vec<ExperimentSpec>> {
        self.experiment_files
            .iter()
            .map(|p| {
                let spec: ExperimentSpec = read_json(p)?;
                spec.validate(network).map_err(|e| schema(p, e))?;
                Ok(spec)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"network_file": "n.json", "experiment_files": ["e.json"], "output_dir": "out"}"#).unwrap();
        let m = RunManifest::load(&p).unwrap();
        assert_eq!(m.network_file, dir.path().join("n.json"));
        assert_eq!(m.output_dir, dir.path().join("out"));
        assert_eq!(m.seed, 0);
    }

    #[test]
    fn empty_experiment_list_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"network_file": "n.json", "experiment_files": [], "output_dir": "o"}"#).unwrap();
        let e = RunManifest::load(&p).unwrap_err();
        assert!(e.to_string().contains("empty"), "{e}");
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, "{\n  \"network_file\": \"n.json\",\n  \"seed\": \"x\"\n}").unwrap();
        let e = RunManifest::load(&p).unwrap_err().to_string();
        assert!(e.contains("m.json") && e.contains("line 3"), "{e}");
    }
}
