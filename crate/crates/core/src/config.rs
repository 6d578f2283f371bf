//! Analyzer configuration. Every threshold and penalty the rules use is a
//! configurable default, not a built-in claim; the config file is a flat
//! `key = value` format so CI setups can pin their own values.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::formula::DEFAULT_RANGE_CAP;
use crate::modules::InferenceKeywords;
use crate::rules::RuleId;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct AnalyzerConfig {
    /// Score points charged per error finding, per affected dimension.
    pub penalty_error: u32,
    /// Score points charged per warning finding, per affected dimension.
    pub penalty_warning: u32,
    /// Minimum dominant-role fraction for a module to count as cohesive.
    pub cohesion_threshold: f64,
    /// Formula density below which the workbook is probably data-driven
    /// rather than an analytical model.
    pub density_threshold: f64,
    /// Minimum number of separated input runs inside the computations
    /// area before the calculator-design warning fires.
    pub interleave_min: usize,
    /// Ceiling on expanding one range reference into member cells.
    pub range_cap: usize,
    /// Functions a report formula may wrap around a link and still count
    /// as trivial (presentation-only transforms).
    pub trivial_functions: BTreeSet<String>,
    /// Sheet-name keywords for module inference.
    pub keywords: InferenceKeywords,
    /// When set, only the listed rules run.
    pub enabled_rules: Option<BTreeSet<RuleId>>,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            penalty_error: 25,
            penalty_warning: 10,
            cohesion_threshold: 0.8,
            density_threshold: 0.05,
            interleave_min: 2,
            range_cap: DEFAULT_RANGE_CAP,
            trivial_functions: ["ROUND", "TEXT", "ABS"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            keywords: InferenceKeywords::default(),
            enabled_rules: None,
        }
    }
}

impl AnalyzerConfig {
    pub fn rule_enabled(&self, rule: RuleId) -> bool {
        match &self.enabled_rules {
            None => true,
            Some(set) => set.contains(&rule),
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<AnalyzerConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_named(&text, &path.display().to_string())
}

pub fn parse_config(text: &str) -> Result<AnalyzerConfig, ConfigError> {
    parse_config_named(text, "<config>")
}

fn parse_config_named(text: &str, path: &str) -> Result<AnalyzerConfig, ConfigError> {
    let mut config = AnalyzerConfig::default();
    let err = |line: usize, message: String| ConfigError::Syntax {
        path: path.to_string(),
        line,
        message,
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected 'key = value'".to_string()))?;
        let key = key.trim();
        let value = value.trim();

        let parse_u32 = |v: &str| -> Result<u32, ConfigError> {
            v.parse()
                .map_err(|_| err(line_no, format!("{key}: expected an integer, got {v:?}")))
        };
        let parse_usize = |v: &str| -> Result<usize, ConfigError> {
            v.parse()
                .map_err(|_| err(line_no, format!("{key}: expected an integer, got {v:?}")))
        };
        let parse_fraction = |v: &str| -> Result<f64, ConfigError> {
            let f: f64 = v
                .parse()
                .map_err(|_| err(line_no, format!("{key}: expected a number, got {v:?}")))?;
            if !(0.0..=1.0).contains(&f) {
                return Err(err(line_no, format!("{key}: {v} is outside [0, 1]")));
            }
            Ok(f)
        };
        let parse_list = |v: &str| -> Vec<String> {
            v.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        };

        match key {
            "penalty.error" => {
                config.penalty_error = parse_u32(value)?;
                if config.penalty_error == 0 {
                    return Err(err(line_no, "penalty.error must be at least 1".to_string()));
                }
            }
            "penalty.warning" => {
                config.penalty_warning = parse_u32(value)?;
                if config.penalty_warning == 0 {
                    return Err(err(line_no, "penalty.warning must be at least 1".to_string()));
                }
            }
            "cohesion.threshold" => config.cohesion_threshold = parse_fraction(value)?,
            "density.threshold" => config.density_threshold = parse_fraction(value)?,
            "interleave.min" => config.interleave_min = parse_usize(value)?,
            "range.cap" => config.range_cap = parse_usize(value)?,
            "trivial.functions" => {
                config.trivial_functions = parse_list(value).into_iter().collect();
            }
            "keywords.inputs" => config.keywords.inputs = parse_list(value),
            "keywords.computations" => config.keywords.computations = parse_list(value),
            "keywords.reports" => config.keywords.reports = parse_list(value),
            "rules.enabled" => {
                let mut set = BTreeSet::new();
                for id in parse_list(value) {
                    let rule = RuleId::from_code(&id)
                        .ok_or_else(|| err(line_no, format!("unknown rule id {id:?}")))?;
                    set.insert(rule);
                }
                config.enabled_rules = Some(set);
            }
            other => return Err(err(line_no, format!("unknown config key {other:?}"))),
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_documented_values() {
        let c = AnalyzerConfig::default();
        assert_eq!(c.penalty_error, 25);
        assert_eq!(c.penalty_warning, 10);
        assert_eq!(c.cohesion_threshold, 0.8);
        assert_eq!(c.density_threshold, 0.05);
        assert_eq!(c.interleave_min, 2);
        assert_eq!(c.range_cap, 65_536);
        assert!(c.trivial_functions.contains("ROUND"));
    }

    #[test]
    fn overrides_and_comments() {
        let c = parse_config(
            "# tuned\npenalty.error = 40\ntrivial.functions = ROUND, INT\nkeywords.reports = board\nrules.enabled = R1, R7\n",
        )
        .unwrap();
        assert_eq!(c.penalty_error, 40);
        assert!(c.trivial_functions.contains("INT"));
        assert_eq!(c.keywords.reports, vec!["board".to_string()]);
        assert!(c.rule_enabled(RuleId::R7));
        assert!(!c.rule_enabled(RuleId::R9));
    }

    #[test]
    fn bad_keys_and_values_carry_lines() {
        assert!(parse_config("nope = 1").unwrap_err().to_string().contains(":1:"));
        assert!(parse_config("\npenalty.error = x")
            .unwrap_err()
            .to_string()
            .contains(":2:"));
        assert!(parse_config("cohesion.threshold = 1.5").is_err());
        assert!(parse_config("penalty.warning = 0").is_err());
        assert!(parse_config("rules.enabled = R99").is_err());
    }
}
