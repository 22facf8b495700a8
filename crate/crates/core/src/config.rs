//! Layered configuration: built-in defaults overridden by a TOML or JSON
//! file, then by per-session overrides. Overrides are merged key by key and
//! any unknown key is an error.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::capture::NoiseModel;
use crate::difficulty::DdaConfig;
use crate::engine::GameConfig;
use crate::gesture::GestureConfig;
use crate::ik::ArmChain;
use crate::model::{ConfigError, SceneConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    pub scene: SceneConfig,
    pub gesture: GestureConfig,
    pub dda: DdaConfig,
    pub noise: NoiseModel,
    pub avatar: ArmChain,
    pub feedback_frames: u32,
    pub block_size: u32,
}

impl Default for AppConfig {
    fn default() -> Self {
        let game = GameConfig::default();
        Self {
            scene: game.scene,
            gesture: game.gesture,
            dda: game.dda,
            noise: NoiseModel::default(),
            avatar: ArmChain::default(),
            feedback_frames: game.feedback_frames,
            block_size: game.block_size,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("bad config override: {0}")]
    Override(String),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

impl AppConfig {
    pub fn game(&self) -> GameConfig {
        GameConfig {
            scene: self.scene.clone(),
            gesture: self.gesture,
            dda: self.dda,
            feedback_frames: self.feedback_frames,
            block_size: self.block_size,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.game().validate()?;
        self.noise.validate()
    }

    /// Returns a copy with `overrides` merged on top.
    pub fn with_overrides(&self, overrides: &Value) -> Result<Self, ConfigFileError> {
        if !overrides.is_object() {
            return Err(ConfigFileError::Override(
                "overrides must be an object".into(),
            ));
        }
        let mut base = serde_json::to_value(self).expect("config always serializes");
        merge(&mut base, overrides);
        let merged: AppConfig =
            serde_json::from_value(base).map_err(|e| ConfigFileError::Override(e.to_string()))?;
        merged.validate()?;
        Ok(merged)
    }

    /// Defaults overridden by a `.toml` or `.json` file.
    pub fn from_file(path: &Path) -> Result<Self, ConfigFileError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Read {
            path: shown.clone(),
            source,
        })?;
        let parse_err = |reason: String| ConfigFileError::Parse {
            path: shown.clone(),
            reason,
        };
        let overrides: Value = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        } else {
            let t: toml::Value = toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
            serde_json::to_value(t).map_err(|e| parse_err(e.to_string()))?
        };
        Self::default()
            .with_overrides(&overrides)
            .map_err(|e| match e {
                ConfigFileError::Override(reason) => parse_err(reason),
                other => other,
            })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, ConfigFileError> {
        match path {
            Some(p) => Self::from_file(p),
            None => Ok(Self::default()),
        }
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}
