//! Key-value text configuration: `key = value` lines, `#` comments.
//!
//! Recognized keys (all optional; unknown keys are rejected to catch typos):
//!
//! ```text
//! vlm.url / vlm.token / vlm.model     remote backend endpoint
//! seed                                u64
//! strategy                            two_view | cross_sectional_only |
//!                                     angled_only | three_view | name |
//!                                     no_probability
//! n_id_retries / n_se2_retries        usize >= 1
//! z_threshold_m                       f64
//! crop_margin_px                      u32
//! funnel_xy_mm / funnel_yaw_deg       f64
//! yaw_flip_prob                       f64 in [0, 1]
//! retry_nesting                       nested | flat
//! spiral.max_radius_mm / spiral.rotations / spiral.waypoint_arc_mm
//! render.mm_per_pixel / render.camera_height_m / render.angled_view_deg
//! render.depth_sigma_mm / render.mask_erosion_px / render.centroid_bias_mm
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::matcher::{InputStrategy, RemoteConfig};
use crate::pipeline::{PipelineConfig, RetryNesting};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`, got {text:?}")]
    Malformed {
        path: String,
        line: usize,
        text: String,
    },
    #[error("unknown config key {key:?}")]
    UnknownKey { key: String },
    #[error("config key {key:?}: cannot parse {value:?} as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

const KNOWN_KEYS: &[&str] = &[
    "vlm.url",
    "vlm.token",
    "vlm.model",
    "seed",
    "strategy",
    "n_id_retries",
    "n_se2_retries",
    "z_threshold_m",
    "crop_margin_px",
    "funnel_xy_mm",
    "funnel_yaw_deg",
    "yaw_flip_prob",
    "retry_nesting",
    "spiral.max_radius_mm",
    "spiral.rotations",
    "spiral.waypoint_arc_mm",
    "render.mm_per_pixel",
    "render.camera_height_m",
    "render.angled_view_deg",
    "render.depth_sigma_mm",
    "render.mask_erosion_px",
    "render.centroid_bias_mm",
];

#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed {
                    path: path.to_string(),
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { key });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse_as<T: std::str::FromStr>(
        &self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
                expected,
            }),
        }
    }

    /// Applies every recognized pipeline key on top of `cfg`.
    pub fn apply_pipeline(&self, cfg: &mut PipelineConfig) -> Result<(), ConfigError> {
        if let Some(v) = self.parse_as::<u64>("seed", "u64")? {
            cfg.seed = v;
        }
        if let Some(v) = self.get("strategy") {
            cfg.strategy = parse_strategy(v)?;
        }
        if let Some(v) = self.parse_as::<usize>("n_id_retries", "usize")? {
            cfg.n_id_retries = v.max(1);
        }
        if let Some(v) = self.parse_as::<usize>("n_se2_retries", "usize")? {
            cfg.n_se2_retries = v.max(1);
        }
        if let Some(v) = self.parse_as::<f64>("z_threshold_m", "f64")? {
            cfg.z_threshold_m = v;
        }
        if let Some(v) = self.parse_as::<u32>("crop_margin_px", "u32")? {
            cfg.crop_margin_px = v;
        }
        if let Some(v) = self.parse_as::<f64>("funnel_xy_mm", "f64")? {
            cfg.funnel_xy_mm = v;
        }
        if let Some(v) = self.parse_as::<f64>("funnel_yaw_deg", "f64")? {
            cfg.funnel_yaw_deg = v;
        }
        if let Some(v) = self.parse_as::<f64>("yaw_flip_prob", "f64")? {
            cfg.yaw_flip_prob = v;
        }
        if let Some(v) = self.get("retry_nesting") {
            cfg.retry_nesting = match v {
                "nested" => RetryNesting::Nested,
                "flat" => RetryNesting::Flat,
                _ => {
                    return Err(ConfigError::BadValue {
                        key: "retry_nesting".into(),
                        value: v.to_string(),
                        expected: "nested | flat",
                    })
                }
            };
        }
        if let Some(v) = self.parse_as::<f64>("spiral.max_radius_mm", "f64")? {
            cfg.spiral.max_radius_mm = v;
        }
        if let Some(v) = self.parse_as::<u32>("spiral.rotations", "u32")? {
            cfg.spiral.rotations = v;
        }
        if let Some(v) = self.parse_as::<f64>("spiral.waypoint_arc_mm", "f64")? {
            cfg.spiral.waypoint_arc_mm = v;
        }
        if let Some(v) = self.parse_as::<f64>("render.mm_per_pixel", "f64")? {
            cfg.render.mm_per_pixel = v;
        }
        if let Some(v) = self.parse_as::<f64>("render.camera_height_m", "f64")? {
            cfg.render.camera_height_m = v;
        }
        if let Some(v) = self.parse_as::<f64>("render.angled_view_deg", "f64")? {
            cfg.render.angled_view_deg = v;
        }
        if let Some(v) = self.parse_as::<f64>("render.depth_sigma_mm", "f64")? {
            cfg.render.noise.depth_sigma_mm = v;
        }
        if let Some(v) = self.parse_as::<u32>("render.mask_erosion_px", "u32")? {
            cfg.render.noise.mask_erosion_px = v;
        }
        if let Some(v) = self.parse_as::<f64>("render.centroid_bias_mm", "f64")? {
            cfg.render.noise.centroid_bias_mm = v;
        }
        Ok(())
    }

    /// Remote backend settings, if a URL is configured. Environment
    /// variables take precedence over file keys.
    pub fn remote_config(&self) -> Option<RemoteConfig> {
        let url = std::env::var(crate::matcher::URL_ENV)
            .ok()
            .or_else(|| self.get("vlm.url").map(String::from))?;
        let mut cfg = RemoteConfig::new(url);
        cfg.token = std::env::var(crate::matcher::TOKEN_ENV)
            .ok()
            .or_else(|| self.get("vlm.token").map(String::from));
        if let Some(model) = self.get("vlm.model") {
            cfg.model = model.to_string();
        }
        Some(cfg)
    }
}

pub fn parse_strategy(s: &str) -> Result<InputStrategy, ConfigError> {
    Ok(match s {
        "two_view" => InputStrategy::TwoView,
        "cross_sectional_only" => InputStrategy::CrossSectionalOnly,
        "angled_only" => InputStrategy::AngledOnly,
        "three_view" => InputStrategy::ThreeView,
        "name" => InputStrategy::Name,
        "no_probability" => InputStrategy::NoProbability,
        _ => {
            return Err(ConfigError::BadValue {
                key: "strategy".into(),
                value: s.to_string(),
                expected: "an input strategy name",
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies_keys() {
        let text = "# comment\nseed = 42\nstrategy = no_probability\nspiral.max_radius_mm = 6.5\nvlm.url = http://localhost:9\n";
        let map = ConfigMap::parse(text, "test").unwrap();
        let mut cfg = PipelineConfig::default();
        map.apply_pipeline(&mut cfg).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.strategy, InputStrategy::NoProbability);
        assert_eq!(cfg.spiral.max_radius_mm, 6.5);
        assert_eq!(map.get("vlm.url"), Some("http://localhost:9"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ConfigMap::parse("nonsense = 1\n", "t"),
            Err(ConfigError::UnknownKey { .. })
        ));
        let map = ConfigMap::parse("seed = pony\n", "t").unwrap();
        let mut cfg = PipelineConfig::default();
        assert!(matches!(
            map.apply_pipeline(&mut cfg),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            ConfigMap::parse("no equals sign\n", "t"),
            Err(ConfigError::Malformed { .. })
        ));
    }
}
