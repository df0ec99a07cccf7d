//! Run settings: defaults, overlaid by a JSON config file, overlaid by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use gapfill::experiment::Strategy;
use gapfill::gaps::{FilterCriteria, RatioMode};
use gapfill::inject::GapSpec;
use gapfill::models::{ModelConfig, ModelKind};
use gapfill::PropertyKind;

pub const CORPUS_ENV: &str = "GAPFILL_CORPUS";

/// A single string (comma separated) or a list of strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum List {
    One(String),
    Many(Vec<String>),
}

impl List {
    fn items(&self) -> Vec<String> {
        match self {
            List::One(s) => s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
            List::Many(v) => v.clone(),
        }
    }
}

/// Config file layout. Every field is optional and mirrors a flag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub target: Option<List>,
    pub model: Option<List>,
    pub strategy: Option<List>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub per_km: Option<f64>,
    pub test_wells: Option<usize>,
    pub k_max: Option<usize>,
    pub min_depth: Option<f64>,
    pub max_gap: Option<f64>,
    pub min_ratio: Option<f64>,
    pub ratio_mode: Option<RatioMode>,
    pub no_filter: Option<bool>,
    pub models: Option<ModelConfig>,
}

impl FileConfig {
    /// Reads a config file, or the `config` section of a run manifest.
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let value = match value.get("config") {
            Some(inner) if value.get("command").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields of `over` win.
    pub fn overlay(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            corpus, out, seed, jobs, target, model, strategy, mean, std, per_km, test_wells, k_max, min_depth,
            max_gap, min_ratio, ratio_mode, no_filter, models
        )
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub corpus: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub targets: Vec<PropertyKind>,
    pub models: Vec<ModelKind>,
    pub strategies: Vec<Strategy>,
    pub gaps: GapSpec,
    pub test_wells: Option<usize>,
    pub k_max: usize,
    pub filter: FilterCriteria,
    pub no_filter: bool,
    pub model_config: ModelConfig,
}

pub fn parse_targets(items: &[String]) -> Result<Vec<PropertyKind>> {
    if items.iter().any(|s| s.eq_ignore_ascii_case("all")) {
        return Ok(PropertyKind::ALL.to_vec());
    }
    let mut out: Vec<PropertyKind> = items.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn parse_models(items: &[String]) -> Result<Vec<ModelKind>> {
    if items.iter().any(|s| s.eq_ignore_ascii_case("all")) {
        return Ok(ModelKind::ALL.to_vec());
    }
    let mut out: Vec<ModelKind> = items.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn parse_strategies(items: &[String]) -> Result<Vec<Strategy>> {
    let mut out: Vec<Strategy> = items.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

impl Settings {
    pub fn resolve(cfg: FileConfig) -> Result<Settings> {
        let items = |l: &Option<List>, default: &str| {
            l.as_ref().map(List::items).unwrap_or_else(|| vec![default.to_string()])
        };
        let defaults = GapSpec::default();
        let seed = cfg.seed.unwrap_or(0);
        let gaps = GapSpec {
            mean_size: cfg.mean.unwrap_or(defaults.mean_size),
            size_stddev: cfg.std.unwrap_or(defaults.size_stddev),
            gaps_per_km: cfg.per_km.unwrap_or(defaults.gaps_per_km),
            seed,
            aligned: true,
        };
        gaps.validate()?;
        let fd = FilterCriteria::default();
        let filter = FilterCriteria {
            min_depth: cfg.min_depth.unwrap_or(fd.min_depth),
            max_gap: cfg.max_gap.unwrap_or(fd.max_gap),
            min_complete_ratio: cfg.min_ratio.unwrap_or(fd.min_complete_ratio),
            ratio_mode: cfg.ratio_mode.unwrap_or(fd.ratio_mode),
        };
        filter.validate()?;
        let k_max = cfg.k_max.unwrap_or(gapfill::experiment::MAX_NEIGHBORS);
        if k_max > gapfill::experiment::MAX_NEIGHBORS {
            bail!(gapfill::Error::InvalidConfig(format!(
                "k-max {k_max} exceeds the maximum of {} nearest wells",
                gapfill::experiment::MAX_NEIGHBORS
            )));
        }
        if cfg.jobs == Some(0) {
            bail!(gapfill::Error::InvalidConfig("--jobs must be at least 1".into()));
        }
        let corpus = cfg.corpus.or_else(|| std::env::var_os(CORPUS_ENV).map(PathBuf::from));
        let model_config = cfg.models.unwrap_or_default();
        model_config.nn.validate()?;
        Ok(Settings {
            corpus,
            out: cfg.out.unwrap_or_else(|| PathBuf::from("gapfill-out")),
            seed,
            jobs: cfg.jobs,
            targets: parse_targets(&items(&cfg.target, "all"))?,
            models: parse_models(&items(&cfg.model, "gb"))?,
            strategies: parse_strategies(&items(&cfg.strategy, "local"))?,
            gaps,
            test_wells: cfg.test_wells,
            k_max,
            filter,
            no_filter: cfg.no_filter.unwrap_or(false),
            model_config,
        })
    }

    /// The settings in config-file form, so a manifest can be replayed.
    pub fn to_file_config(&self) -> FileConfig {
        let list = |v: Vec<String>| Some(List::Many(v));
        FileConfig {
            corpus: self.corpus.clone(),
            out: Some(self.out.clone()),
            seed: Some(self.seed),
            jobs: self.jobs,
            target: list(self.targets.iter().map(|t| t.to_string()).collect()),
            model: list(self.models.iter().map(|m| m.to_string()).collect()),
            strategy: list(self.strategies.iter().map(|s| s.to_string()).collect()),
            mean: Some(self.gaps.mean_size),
            std: Some(self.gaps.size_stddev),
            per_km: Some(self.gaps.gaps_per_km),
            test_wells: self.test_wells,
            k_max: Some(self.k_max),
            min_depth: Some(self.filter.min_depth),
            max_gap: Some(self.filter.max_gap),
            min_ratio: Some(self.filter.min_complete_ratio),
            ratio_mode: Some(self.filter.ratio_mode),
            no_filter: Some(self.no_filter),
            models: Some(self.model_config),
        }
    }

    pub fn corpus(&self) -> Result<&Path> {
        self.corpus.as_deref().ok_or_else(|| {
            anyhow::Error::new(gapfill::Error::InvalidConfig(format!(
                "no corpus given (use --corpus, the config file or {CORPUS_ENV})"
            )))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let file = FileConfig { seed: Some(3), mean: Some(100.0), target: Some(List::One("gr,nphi".into())), ..Default::default() };
        let flags = FileConfig { seed: Some(9), ..Default::default() };
        let s = Settings::resolve(file.overlay(flags)).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.gaps.mean_size, 100.0);
        assert_eq!(s.targets, vec![PropertyKind::Nphi, PropertyKind::Gr]);
        assert_eq!(s.models, vec![ModelKind::Gb]);
    }

    #[test]
    fn resolved_settings_replay() {
        let s = Settings::resolve(FileConfig { strategy: Some(List::One("global,neighbors:3".into())), ..Default::default() }).unwrap();
        let again = Settings::resolve(s.to_file_config()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Settings::resolve(FileConfig { strategy: Some(List::One("neighbors:12".into())), ..Default::default() }).is_err());
        assert!(Settings::resolve(FileConfig { target: Some(List::One("dt2".into())), ..Default::default() }).is_err());
        assert!(Settings::resolve(FileConfig { mean: Some(-1.0), ..Default::default() }).is_err());
        assert!(serde_json::from_str::<FileConfig>("{\"bogus\": 1}").is_err());
    }
}
