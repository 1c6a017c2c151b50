//! Plain-text `key = value` configuration.
//!
//! Blank lines and `#` comments are ignored. Keys are strict: an unknown or
//! repeated key is an error. Lists are comma separated.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{ConfigError, Error, Result};
use crate::fusion::{FusionConfig, DEFAULT_BUFFER_SIZE, DEFAULT_THRESHOLD, DEFAULT_WEIGHTS};
use crate::synth::{Dropout, ObjectShape, SynthConfig};

pub const FUSION_KEYS: &[&str] = &["buffer_size", "weights", "threshold", "targets"];

pub const SYNTH_KEYS: &[&str] = &[
    "height",
    "width",
    "channels",
    "frames",
    "shape",
    "size",
    "velocity",
    "origin",
    "target_category",
    "background_category",
    "dropout_probability",
    "dropout_frames",
    "partial_occlusion",
    "logit_contrast",
    "noise_sigma",
    "seed",
    "categories",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits `text` into entries, checking keys against `allowed`.
pub fn parse_entries(text: &str, allowed: &[&str]) -> Result<Vec<Entry>, ConfigError> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::MalformedLine {
                line,
                text: raw.trim().to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::MalformedLine {
                line,
                text: raw.trim().to_string(),
            });
        }
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if seen.insert(key.to_string(), line).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

pub fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| bad(key, value, e.to_string()))
}

/// Parses a comma-separated list. An empty value gives an empty list.
pub fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| parse_value(key, item.trim()))
        .collect()
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64), ConfigError> {
    match parse_list::<f64>(key, value)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(bad(key, value, "expected two comma-separated numbers")),
    }
}

fn parse_names(key: &str, value: &str) -> Result<Vec<String>, ConfigError> {
    let names: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(bad(key, value, "empty name in list"));
    }
    Ok(names)
}

/// Fusion settings as written in a file; absent keys stay `None`.
///
/// Layering is `flag > file > default`: merge command-line overrides with
/// [`FusionSettings::or`] and finish with [`FusionSettings::resolve`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FusionSettings {
    pub buffer_size: Option<usize>,
    pub weights: Option<Vec<f64>>,
    pub threshold: Option<f64>,
    pub targets: Option<Vec<String>>,
}

impl FusionSettings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Self::default();
        for Entry { key, value, .. } in parse_entries(text, FUSION_KEYS)? {
            match key.as_str() {
                "buffer_size" => s.buffer_size = Some(parse_value(&key, &value)?),
                "weights" => s.weights = Some(parse_list(&key, &value)?),
                "threshold" => s.threshold = Some(parse_value(&key, &value)?),
                "targets" => s.targets = Some(parse_names(&key, &value)?),
                _ => unreachable!("key list checked by parse_entries"),
            }
        }
        Ok(s)
    }

    /// Fields set in `self` win; the rest come from `fallback`.
    pub fn or(self, fallback: FusionSettings) -> FusionSettings {
        FusionSettings {
            buffer_size: self.buffer_size.or(fallback.buffer_size),
            weights: self.weights.or(fallback.weights),
            threshold: self.threshold.or(fallback.threshold),
            targets: self.targets.or(fallback.targets),
        }
    }

    /// Fills remaining gaps with the defaults and validates.
    pub fn resolve(self) -> Result<FusionConfig, ConfigError> {
        let config = FusionConfig::new(
            self.buffer_size.unwrap_or(DEFAULT_BUFFER_SIZE),
            self.weights.unwrap_or_else(|| DEFAULT_WEIGHTS.to_vec()),
            self.threshold.unwrap_or(DEFAULT_THRESHOLD),
        )?;
        Ok(match self.targets {
            Some(t) => config.with_targets(t),
            None => config,
        })
    }
}

pub fn parse_fusion_config(text: &str) -> Result<FusionConfig, ConfigError> {
    FusionSettings::parse(text)?.resolve()
}

pub fn parse_synth_config(text: &str) -> Result<SynthConfig, ConfigError> {
    let mut c = SynthConfig::default();
    let mut dropout_set = None::<&'static str>;
    for Entry { key, value, .. } in parse_entries(text, SYNTH_KEYS)? {
        let k = key.as_str();
        match k {
            "height" => c.height = parse_value(k, &value)?,
            "width" => c.width = parse_value(k, &value)?,
            "channels" => c.channels = parse_value(k, &value)?,
            "frames" => c.frames = parse_value(k, &value)?,
            "shape" => {
                c.shape = match value.as_str() {
                    "rectangle" => ObjectShape::Rectangle,
                    "disc" => ObjectShape::Disc,
                    _ => return Err(bad(k, &value, "expected rectangle or disc")),
                }
            }
            "size" => c.size = parse_value(k, &value)?,
            "velocity" => c.velocity = parse_pair(k, &value)?,
            "origin" => c.origin = Some(parse_pair(k, &value)?),
            "target_category" => c.target_category = parse_value(k, &value)?,
            "background_category" => c.background_category = parse_value(k, &value)?,
            "dropout_probability" | "dropout_frames" => {
                if let Some(other) = dropout_set {
                    return Err(bad(k, &value, format!("conflicts with `{other}`")));
                }
                c.dropout = if k == "dropout_probability" {
                    dropout_set = Some("dropout_probability");
                    Dropout::Probability(parse_value(k, &value)?)
                } else {
                    dropout_set = Some("dropout_frames");
                    Dropout::Frames(parse_list(k, &value)?)
                };
            }
            "partial_occlusion" => c.partial_occlusion = Some(parse_value(k, &value)?),
            "logit_contrast" => c.logit_contrast = parse_value(k, &value)?,
            "noise_sigma" => c.noise_sigma = parse_value(k, &value)?,
            "seed" => c.seed = parse_value(k, &value)?,
            "categories" => c.category_names = Some(parse_names(k, &value)?),
            _ => unreachable!("key list checked by parse_entries"),
        }
    }
    c.validate()?;
    Ok(c)
}

/// Either kind of config, decided by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Fusion(FusionConfig),
    Synth(SynthConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigKind {
    Fusion,
    Synth,
}

pub fn parse_config(text: &str, kind: ConfigKind) -> Result<ParsedConfig, ConfigError> {
    Ok(match kind {
        ConfigKind::Fusion => ParsedConfig::Fusion(parse_fusion_config(text)?),
        ConfigKind::Synth => ParsedConfig::Synth(parse_synth_config(text)?),
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_fusion_settings(path: impl AsRef<Path>) -> Result<FusionSettings> {
    let path = path.as_ref();
    FusionSettings::parse(&read_text(path)?).map_err(|e| Error::from(e).in_file(path))
}

pub fn read_synth_config(path: impl AsRef<Path>) -> Result<SynthConfig> {
    let path = path.as_ref();
    parse_synth_config(&read_text(path)?).map_err(|e| Error::from(e).in_file(path))
}

/// Renders a fusion config in the same format [`parse_fusion_config`] reads.
pub fn fusion_config_to_text(config: &FusionConfig) -> String {
    let weights: Vec<String> = config.weights().iter().map(|w| w.to_string()).collect();
    let mut out = format!(
        "buffer_size = {}\nweights = {}\nthreshold = {}\n",
        config.buffer_size(),
        weights.join(","),
        config.threshold()
    );
    if let Some(t) = config.targets() {
        out.push_str(&format!("targets = {}\n", t.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_fusion_config("").unwrap();
        assert_eq!(c, FusionConfig::default());
        assert_eq!(c.buffer_size(), 4);
        assert_eq!(c.weights(), &[4.0, 3.0, 2.0, 1.0]);
        assert_eq!(c.threshold(), 1.0);
        assert_eq!(parse_fusion_config("# nothing\n\n   \n").unwrap(), c);
    }

    #[test]
    fn neutral_config() {
        let c = parse_fusion_config("weights = 1,0,0,0\nthreshold = 0\n").unwrap();
        assert_eq!(c.weights(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.threshold(), 0.0);
    }

    #[test]
    fn named_errors() {
        assert_eq!(
            parse_fusion_config("weights = 4,3,2\nbuffer_size = 4"),
            Err(ConfigError::WeightsLength {
                buffer_size: 4,
                weights: 3
            })
        );
        assert!(matches!(
            parse_fusion_config("weights = 4,-3,2,1"),
            Err(ConfigError::NegativeWeight { index: 1, .. })
        ));
        assert_eq!(
            parse_fusion_config("threshold = -0.5"),
            Err(ConfigError::NegativeThreshold(-0.5))
        );
        assert_eq!(
            parse_fusion_config("threshhold = 1"),
            Err(ConfigError::UnknownKey {
                line: 1,
                key: "threshhold".into()
            })
        );
        assert_eq!(
            parse_fusion_config("threshold = 1\nthreshold = 2"),
            Err(ConfigError::DuplicateKey {
                line: 2,
                key: "threshold".into()
            })
        );
        assert!(matches!(
            parse_fusion_config("just words"),
            Err(ConfigError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            parse_fusion_config("buffer_size = four"),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn comments_and_targets() {
        let c = parse_fusion_config(
            "# fusion\nbuffer_size = 2  # short\nweights = 2, 1\ntargets = person, car\n",
        )
        .unwrap();
        assert_eq!(c.buffer_size(), 2);
        assert_eq!(c.targets().unwrap(), ["person", "car"]);
    }

    #[test]
    fn layering_prefers_flags() {
        let file = FusionSettings::parse("threshold = 2\nweights = 1,1,1,1").unwrap();
        let flags = FusionSettings {
            threshold: Some(0.5),
            ..Default::default()
        };
        let c = flags.or(file).resolve().unwrap();
        assert_eq!(c.threshold(), 0.5);
        assert_eq!(c.weights(), &[1.0; 4]);
    }

    #[test]
    fn fusion_text_round_trip() {
        let c = FusionConfig::new(3, vec![0.5, 0.25, 0.125], 0.75)
            .unwrap()
            .with_targets(["car"]);
        assert_eq!(parse_fusion_config(&fusion_config_to_text(&c)).unwrap(), c);
    }

    #[test]
    fn synth_keys() {
        let c = parse_synth_config(
            "height = 32\nwidth = 48\nframes = 5\nsize = 8\nvelocity = 2, 0.5\n\
             dropout_frames = 1,3\nshape = disc\nseed = 9\nnoise_sigma = 0\n",
        )
        .unwrap();
        assert_eq!((c.height, c.width, c.frames, c.size), (32, 48, 5, 8));
        assert_eq!(c.velocity, (2.0, 0.5));
        assert_eq!(c.dropout, Dropout::Frames(vec![1, 3]));
        assert_eq!(c.shape, ObjectShape::Disc);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn synth_rejects_conflicting_dropout() {
        assert!(matches!(
            parse_synth_config("dropout_probability = 0.2\ndropout_frames = 1"),
            Err(ConfigError::InvalidValue { .. })
        ));
    }

    #[test]
    fn synth_exit_is_config_error() {
        assert!(matches!(
            parse_synth_config("width = 20\nsize = 16\nvelocity = 1,0\nframes = 20"),
            Err(ConfigError::ObjectExitsFrame { .. })
        ));
    }

    #[test]
    fn synth_rejects_fusion_keys() {
        assert!(matches!(
            parse_synth_config("threshold = 1"),
            Err(ConfigError::UnknownKey { .. })
        ));
    }
}
