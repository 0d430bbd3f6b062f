//! Run configuration: one TOML document per run, all randomness from one
//! master seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::BoundInputs;
use crate::error::{Error, Result};
use crate::games::GameSpec;
use crate::stats::StatsRequest;
use crate::toy::{FailurePredicate, MicroLwePke, SpreadnessParams, SyntheticFailurePke, ToyScheme, PRESET_NAMES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Demo,
    Games,
    Stats,
    Bounds,
    Spread,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Demo => "demo",
            Command::Games => "games",
            Command::Stats => "stats",
            Command::Bounds => "bounds",
            Command::Spread => "spread",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// A scheme by preset name or spelled out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeConfig {
    Preset { preset: String },
    Inline(ToyScheme),
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig::Preset { preset: "correct".into() }
    }
}

pub const SCHEME_PRESETS: [&str; 5] = ["correct", "fail-1/16", "key-dependent", "parity-leak", "micro-lwe"];

/// Built-in toy schemes.
pub fn scheme_preset(name: &str) -> Option<ToyScheme> {
    let syn = |m, r, k, f| ToyScheme::Synthetic(SyntheticFailurePke::new(m, r, k, f).unwrap());
    Some(match name {
        "correct" => syn(4, 8, 16, FailurePredicate::Never),
        // 16 of 256 randomness values fail under every key
        "fail-1/16" => syn(4, 8, 16, FailurePredicate::randomness_below(16)),
        "key-dependent" => syn(4, 6, 16, FailurePredicate::sum_threshold(70)),
        "parity-leak" => ToyScheme::Synthetic(
            SyntheticFailurePke::new(2, 4, 16, FailurePredicate::ParityMatch { window: 8 })
                .unwrap()
                .with_leak(crate::toy::KeyLeak::Parity),
        ),
        "micro-lwe" => ToyScheme::MicroLwe(MicroLwePke::new(2, 13, vec![-1, 0, 0, 1]).unwrap()),
        _ => return None,
    })
}

impl SchemeConfig {
    pub fn resolve(&self) -> Result<ToyScheme> {
        let s = match self {
            SchemeConfig::Preset { preset } => scheme_preset(preset).ok_or_else(|| {
                Error::Config(format!("unknown scheme preset {preset:?}; known: {}", SCHEME_PRESETS.join(", ")))
            })?,
            SchemeConfig::Inline(s) => s.clone(),
        };
        s.validate().map_err(|e| Error::Config(format!("scheme: {e}")))?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsSettings {
    #[serde(default = "default_keys_per_randomness")]
    pub keys_per_randomness: u64,
    #[serde(default)]
    pub message_sample: Option<u64>,
    #[serde(default = "default_tail_grid")]
    pub tail_grid: Vec<f64>,
}

fn default_keys_per_randomness() -> u64 {
    StatsRequest::default().keys_per_randomness
}

fn default_tail_grid() -> Vec<f64> {
    StatsRequest::default().tail_grid
}

impl Default for StatsSettings {
    fn default() -> Self {
        StatsSettings {
            keys_per_randomness: default_keys_per_randomness(),
            message_sample: None,
            tail_grid: default_tail_grid(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadSettings {
    /// Named parameter sets; all of them by default.
    #[serde(default = "default_presets")]
    pub presets: Vec<String>,
    #[serde(default)]
    pub params: Vec<SpreadnessParams>,
    /// Also enumerate the configured toy scheme.
    #[serde(default)]
    pub toy: bool,
}

fn default_presets() -> Vec<String> {
    PRESET_NAMES.iter().map(|s| s.to_string()).collect()
}

impl Default for SpreadSettings {
    fn default() -> Self {
        SpreadSettings { presets: default_presets(), params: Vec::new(), toy: false }
    }
}

pub const DEFAULT_TRIALS: u64 = 10_000;

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    /// Cycles for `demo`, runs per game for `games`, randomness samples per
    /// message for `stats`.
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub scheme: SchemeConfig,
    /// Also write every game outcome to this file, one JSON record per line.
    #[serde(default)]
    pub outcomes: Option<PathBuf>,
    #[serde(default)]
    pub games: Vec<GameSpec>,
    #[serde(default)]
    pub stats: StatsSettings,
    #[serde(default)]
    pub bounds: Option<BoundInputs>,
    #[serde(default)]
    pub spread: SpreadSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            seed: 0,
            trials: DEFAULT_TRIALS,
            format: Format::Json,
            out: None,
            scheme: SchemeConfig::default(),
            outcomes: None,
            games: Vec::new(),
            stats: StatsSettings::default(),
            bounds: None,
            spread: SpreadSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn stats_request(&self) -> StatsRequest {
        StatsRequest {
            trials: self.trials,
            keys_per_randomness: self.stats.keys_per_randomness,
            message_sample: self.stats.message_sample,
            tail_grid: self.stats.tail_grid.clone(),
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{Advantage, Count, Model};
    use crate::games::{GameKind, QueryLimits};
    use crate::kem::Rejection;

    #[test]
    fn test_full_config_round_trips() {
        let mut bounds = BoundInputs::new(Model::Qrom, Count::pow2(256), 10240.0);
        bounds.q_g = Count::pow2(64);
        bounds.adv_ind = Some(Advantage::Unknown);
        bounds.adv_ow = Some(Advantage::Known(2f64.powi(-128)));
        bounds.delta_ik = Some(1e-40);
        let cfg = RunConfig {
            command: Some(Command::Games),
            seed: 42,
            trials: 500,
            format: Format::Csv,
            out: Some("out.csv".into()),
            scheme: SchemeConfig::Inline(scheme_preset("key-dependent").unwrap()),
            outcomes: Some("runs.jsonl".into()),
            games: vec![GameSpec {
                game: GameKind::IndCcaKem,
                adversary: "blind-0".into(),
                limits: QueryLimits { q_g: 3, q_h: 4, q_d: 5 },
                rejection: Rejection::Implicit,
            }],
            stats: StatsSettings { message_sample: Some(4), ..StatsSettings::default() },
            bounds: Some(bounds),
            spread: SpreadSettings { presets: vec!["hqc-128".into()], toy: true, ..SpreadSettings::default() },
        };
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg, "{text}");
    }

    #[test]
    fn test_minimal_config_uses_defaults() {
        let cfg = RunConfig::from_toml("command = \"spread\"").unwrap();
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert_eq!(cfg.spread.presets.len(), 6);
        assert_eq!(cfg.scheme.resolve().unwrap(), scheme_preset("correct").unwrap());
        assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn test_bad_configs_are_config_errors() {
        for text in ["comand = \"demo\"", "trials = -1", "[scheme]\npreset = \"nope\""] {
            let r = RunConfig::from_toml(text).and_then(|c| c.scheme.resolve().map(|_| ()));
            assert!(matches!(r, Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn test_presets_are_valid() {
        for p in SCHEME_PRESETS {
            scheme_preset(p).unwrap().validate().unwrap();
        }
    }
}
