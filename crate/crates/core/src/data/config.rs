use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DataError, Result, SplitRatios};

const HYPERBLOOD_NOISY_BANDS: &str = include_str!("../../data/hyperblood_noisy_bands.toml");

#[derive(Debug, Deserialize)]
struct NoisyBandsFile {
    noisy_bands: Vec<usize>,
}

/// Parses a `noisy_bands = [...]` TOML document.
pub fn parse_noisy_bands(text: &str) -> Result<BTreeSet<usize>> {
    let file: NoisyBandsFile = toml::from_str(text)?;
    Ok(file.noisy_bands.into_iter().collect())
}

/// The noisy-band list shipped for HyperBlood scenes.
pub fn hyperblood_noisy_bands() -> BTreeSet<usize> {
    parse_noisy_bands(HYPERBLOOD_NOISY_BANDS).expect("bundled band list parses")
}

/// Band removal, split seed and split ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Explicit band indices to drop. Takes precedence over the file.
    pub noisy_bands: Option<Vec<usize>>,
    /// TOML file with a `noisy_bands` list, resolved relative to the config.
    pub noisy_bands_file: Option<PathBuf>,
    pub seed: u64,
    pub ratios: SplitRatios,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            noisy_bands: None,
            noisy_bands_file: None,
            seed: 0,
            ratios: SplitRatios::default(),
        }
    }
}

impl PreprocessConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// The bands to drop: the inline list, else the referenced file
    /// (relative paths resolve against `base_dir`), else the bundled
    /// HyperBlood list.
    pub fn resolve_noisy_bands(&self, base_dir: &Path) -> Result<BTreeSet<usize>> {
        if let Some(list) = &self.noisy_bands {
            return Ok(list.iter().copied().collect());
        }
        match &self.noisy_bands_file {
            Some(p) => {
                let path = base_dir.join(p);
                let text = fs::read_to_string(&path).map_err(|e| DataError::Format(format!("{}: {e}", path.display())))?;
                parse_noisy_bands(&text)
            }
            None => Ok(hyperblood_noisy_bands()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_leaves_112_of_120() {
        let drop = hyperblood_noisy_bands();
        assert_eq!(drop.len(), 8);
        assert_eq!(120 - drop.len(), 112);
        assert!(drop.iter().all(|&b| b < 120));
    }

    #[test]
    fn config_precedence() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bands.toml"), "noisy_bands = [5, 6]").unwrap();
        let c = PreprocessConfig::from_toml("seed = 3\nnoisy_bands_file = \"bands.toml\"\n[ratios]\ntest = 0.25\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.ratios.test, 0.25);
        assert_eq!(c.ratios.validation, 0.2);
        assert_eq!(c.resolve_noisy_bands(dir.path()).unwrap(), [5, 6].into());
        let inline = PreprocessConfig {
            noisy_bands: Some(vec![1]),
            ..c
        };
        assert_eq!(inline.resolve_noisy_bands(dir.path()).unwrap(), [1].into());
        assert_eq!(PreprocessConfig::default().resolve_noisy_bands(dir.path()).unwrap(), hyperblood_noisy_bands());
        assert!(PreprocessConfig::from_toml("bogus = 1").is_err());
    }
}
