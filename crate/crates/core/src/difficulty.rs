//! Dynamic difficulty adjustment of the target radius.
//!
//! `s_streak` consecutive hits shrink the radius by `alpha`; `f_streak`
//! consecutive misses grow it by `beta`. The radius is clamped to
//! `[r_min, r_max]` and the completed streak counter restarts.

use serde::{Deserialize, Serialize};

use crate::model::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DdaConfig {
    pub r0: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s_streak: u32,
    pub f_streak: u32,
}

impl Default for DdaConfig {
    fn default() -> Self {
        Self {
            r0: 0.15,
            r_min: 0.03,
            r_max: 0.30,
            alpha: 0.8,
            beta: 1.25,
            s_streak: 3,
            f_streak: 3,
        }
    }
}

impl DdaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: &str| Err(ConfigError::Difficulty(m.to_string()));
        let vals = [self.r0, self.r_min, self.r_max, self.alpha, self.beta];
        if vals.iter().any(|v| !v.is_finite()) {
            return err("non-finite value");
        }
        if !(0.0 < self.r_min && self.r_min <= self.r0 && self.r0 <= self.r_max) {
            return err("require 0 < r_min <= r0 <= r_max");
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return err("require 0 < alpha < 1");
        }
        if self.beta <= 1.0 {
            return err("require beta > 1");
        }
        if self.s_streak == 0 || self.f_streak == 0 {
            return err("streak lengths must be at least 1");
        }
        Ok(())
    }

    pub fn initial_state(&self) -> DifficultyState {
        DifficultyState {
            radius: self.r0,
            success_streak: 0,
            miss_streak: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyState {
    pub radius: f64,
    pub success_streak: u32,
    pub miss_streak: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Hit,
    Miss,
}

impl Outcome {
    pub fn from_hit(hit: bool) -> Self {
        if hit {
            Outcome::Hit
        } else {
            Outcome::Miss
        }
    }
}

pub fn dda_update(state: DifficultyState, cfg: &DdaConfig, outcome: Outcome) -> DifficultyState {
    match outcome {
        Outcome::Hit => {
            let streak = state.success_streak + 1;
            if streak >= cfg.s_streak {
                DifficultyState {
                    radius: (state.radius * cfg.alpha).max(cfg.r_min),
                    success_streak: 0,
                    miss_streak: 0,
                }
            } else {
                DifficultyState {
                    radius: state.radius,
                    success_streak: streak,
                    miss_streak: 0,
                }
            }
        }
        Outcome::Miss => {
            let streak = state.miss_streak + 1;
            if streak >= cfg.f_streak {
                DifficultyState {
                    radius: (state.radius * cfg.beta).min(cfg.r_max),
                    success_streak: 0,
                    miss_streak: 0,
                }
            } else {
                DifficultyState {
                    radius: state.radius,
                    success_streak: 0,
                    miss_streak: streak,
                }
            }
        }
    }
}
