//! Run configuration: a flat key=value file format, layered overrides, and
//! the resolved-value echo that makes campaigns reproducible.
//!
//! Resolution order is fixed: built-in defaults, then the config file, then
//! the `DPSIM_OUTPUT_DIR` environment variable, then explicit overrides
//! (command-line flags). Every resolved value is echoed to
//! `resolved_config.json` next to the campaign outputs, and that echo can be
//! loaded back to re-analyze a campaign under its original settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::apparatus::{ApparatusConfig, PrecollapseReadout};
use crate::dynamics::CollapseModel;
use crate::error::{Error, Result};
use crate::selfenergy::{MassBody, OverlapCoefficientVariant};

/// Bumped whenever a key is added, removed, or changes meaning.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Which campaign arms a simulate run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Superposed,
    Control,
    Both,
}

/// Full description of one run: the apparatus plus campaign plumbing.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub apparatus: ApparatusConfig,
    pub n_trials: u64,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub mode: Mode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            apparatus: ApparatusConfig::default(),
            n_trials: 1000,
            master_seed: 1,
            output_dir: PathBuf::from("dpsim_output"),
            mode: Mode::Both,
        }
    }
}

/// Every key the file format and `--set` accept, in display order.
pub const CONFIG_KEYS: &[&str] = &[
    "photon_rate",
    "spad_efficiency",
    "spad_dead_time",
    "ambient_dark_rate",
    "cooling_delta",
    "laser_wavelength",
    "geometry_factor",
    "bias_phase",
    "piezo_tau",
    "piezo_full_scale",
    "mirror_mass",
    "mirror_radius",
    "mount_mass",
    "mount_radius",
    "eraser_enabled",
    "entrainment_rate",
    "sample_interval",
    "trace_duration",
    "gamma",
    "gamma_dec",
    "collapse_model",
    "extra_component_times",
    "detector_noise_sigma",
    "detector_quantization",
    "variant",
    "precollapse_readout",
    "n_trials",
    "master_seed",
    "output_dir",
    "mode",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: expected a number, got {value:?}")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: expected a nonnegative integer, got {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(Error::Parse(format!(
            "{key}: expected true/false (or on/off), got {value:?}"
        ))),
    }
}

fn parse_components(key: &str, value: &str) -> Result<Vec<(String, f64)>> {
    let value = value.trim();
    if value.is_empty() || value == "none" {
        return Ok(vec![]);
    }
    value
        .split(',')
        .map(|item| {
            let (label, seconds) = item.split_once(':').ok_or_else(|| {
                Error::Parse(format!(
                    "{key}: expected comma-separated label:seconds entries, got {item:?}"
                ))
            })?;
            Ok((label.trim().to_string(), parse_f64(key, seconds.trim())?))
        })
        .collect()
}

fn rebuild_body(key: &str, label: &str, mass: f64, radius: f64) -> Result<MassBody> {
    MassBody::new(label, mass, radius).map_err(|e| Error::Config(format!("{key}: {e}")))
}

fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = Vec::with_capacity(b.len() + 1);
        cur.push(i + 1);
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != *cb);
            cur.push((prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

fn nearest_key(key: &str) -> &'static str {
    CONFIG_KEYS
        .iter()
        .min_by_key(|candidate| levenshtein(key, candidate))
        .copied()
        .unwrap_or("")
}

impl RunConfig {
    /// Sets one key from its textual value. Validation of cross-field
    /// invariants happens later in [`RunConfig::validate`]; this only
    /// rejects unparseable values and unknown keys.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let a = &mut self.apparatus;
        match key {
            "photon_rate" => a.photon_rate = parse_f64(key, value)?,
            "spad_efficiency" => a.spad_efficiency = parse_f64(key, value)?,
            "spad_dead_time" => a.spad_dead_time = parse_f64(key, value)?,
            "ambient_dark_rate" => a.ambient_dark_rate = parse_f64(key, value)?,
            "cooling_delta" => a.cooling_delta = parse_f64(key, value)?,
            "laser_wavelength" => a.laser_wavelength = parse_f64(key, value)?,
            "geometry_factor" => a.geometry_factor = parse_f64(key, value)?,
            "bias_phase" => a.bias_phase = parse_f64(key, value)?,
            "piezo_tau" => a.piezo_tau = parse_f64(key, value)?,
            "piezo_full_scale" => a.piezo_full_scale = parse_f64(key, value)?,
            "mirror_mass" => {
                a.mirror = rebuild_body(key, "mirror", parse_f64(key, value)?, a.mirror.radius())?
            }
            "mirror_radius" => {
                a.mirror = rebuild_body(key, "mirror", a.mirror.mass(), parse_f64(key, value)?)?
            }
            "mount_mass" => {
                a.mount = rebuild_body(key, "mount", parse_f64(key, value)?, a.mount.radius())?
            }
            "mount_radius" => {
                a.mount = rebuild_body(key, "mount", a.mount.mass(), parse_f64(key, value)?)?
            }
            "eraser_enabled" => a.eraser_enabled = parse_bool(key, value)?,
            "entrainment_rate" => a.entrainment_rate = parse_f64(key, value)?,
            "sample_interval" => a.sample_interval = parse_f64(key, value)?,
            "trace_duration" => a.trace_duration = parse_f64(key, value)?,
            "gamma" => a.gamma = parse_f64(key, value)?,
            "gamma_dec" => a.gamma_dec = parse_f64(key, value)?,
            "collapse_model" => {
                a.collapse_model = match value {
                    "poisson" => CollapseModel::Poisson,
                    "deterministic" => CollapseModel::Deterministic,
                    _ => {
                        return Err(Error::Parse(format!(
                            "{key}: expected poisson or deterministic, got {value:?}"
                        )))
                    }
                }
            }
            "extra_component_times" => a.extra_component_times = parse_components(key, value)?,
            "detector_noise_sigma" => a.detector_noise_sigma = parse_f64(key, value)?,
            "detector_quantization" => a.detector_quantization = parse_f64(key, value)?,
            "variant" => {
                a.variant = match value {
                    "continuity_corrected" => OverlapCoefficientVariant::ContinuityCorrected,
                    "paper_printed" => OverlapCoefficientVariant::PaperPrinted,
                    _ => {
                        return Err(Error::Parse(format!(
                            "{key}: expected continuity_corrected or paper_printed, got {value:?}"
                        )))
                    }
                }
            }
            "precollapse_readout" => {
                a.precollapse_readout = match value {
                    "baseline" => PrecollapseReadout::Baseline,
                    "mixture" => PrecollapseReadout::Mixture,
                    _ => {
                        return Err(Error::Parse(format!(
                            "{key}: expected baseline or mixture, got {value:?}"
                        )))
                    }
                }
            }
            "n_trials" => self.n_trials = parse_u64(key, value)?,
            "master_seed" => self.master_seed = parse_u64(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "mode" => {
                self.mode = match value {
                    "superposed" => Mode::Superposed,
                    "control" => Mode::Control,
                    "both" => Mode::Both,
                    _ => {
                        return Err(Error::Parse(format!(
                            "{key}: expected superposed, control, or both, got {value:?}"
                        )))
                    }
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "unknown config key {key:?}; closest valid key is \"{}\"",
                    nearest_key(key)
                )))
            }
        }
        Ok(())
    }

    /// Applies a whole config file: `key = value` lines, `#` comments
    /// (full-line or trailing), blank lines, and `[section]` headers, which
    /// are accepted and ignored so files can be grouped for humans.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "config line {}: expected key = value, got {raw:?}",
                    index + 1
                ))
            })?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("config line {}: {e}", index + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::Config("output_dir must not be empty".into()));
        }
        self.apparatus.validate()
    }

    /// The full key set with resolved values, ready to be written next to
    /// the campaign outputs.
    pub fn resolved_json(&self) -> Value {
        let a = &self.apparatus;
        json!({
            "config_schema_version": CONFIG_SCHEMA_VERSION,
            "photon_rate": a.photon_rate,
            "spad_efficiency": a.spad_efficiency,
            "spad_dead_time": a.spad_dead_time,
            "ambient_dark_rate": a.ambient_dark_rate,
            "cooling_delta": a.cooling_delta,
            "laser_wavelength": a.laser_wavelength,
            "geometry_factor": a.geometry_factor,
            "bias_phase": a.bias_phase,
            "piezo_tau": a.piezo_tau,
            "piezo_full_scale": a.piezo_full_scale,
            "mirror_mass": a.mirror.mass(),
            "mirror_radius": a.mirror.radius(),
            "mount_mass": a.mount.mass(),
            "mount_radius": a.mount.radius(),
            "eraser_enabled": a.eraser_enabled,
            "entrainment_rate": a.entrainment_rate,
            "sample_interval": a.sample_interval,
            "trace_duration": a.trace_duration,
            "gamma": a.gamma,
            "gamma_dec": a.gamma_dec,
            "collapse_model": a.collapse_model,
            "extra_component_times": a.extra_component_times.iter().map(|(label, seconds)| {
                json!({ "label": label, "seconds": seconds })
            }).collect::<Vec<_>>(),
            "detector_noise_sigma": a.detector_noise_sigma,
            "detector_quantization": a.detector_quantization,
            "variant": a.variant,
            "precollapse_readout": a.precollapse_readout,
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "output_dir": self.output_dir.display().to_string(),
            "mode": self.mode,
        })
    }

    /// Rebuilds a config from a `resolved_config.json` echo. Numbers
    /// round-trip exactly (shortest-representation printing), so a reloaded
    /// campaign reproduces its original behavior bit for bit.
    pub fn from_resolved_json(value: &Value) -> Result<RunConfig> {
        let object = value.as_object().ok_or_else(|| {
            Error::Parse("resolved config: expected a JSON object".into())
        })?;
        let mut config = RunConfig::default();
        for (key, v) in object {
            if key == "config_schema_version" {
                continue;
            }
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                Value::Array(items) if key == "extra_component_times" => items
                    .iter()
                    .map(|item| {
                        let label = item.get("label").and_then(Value::as_str);
                        let seconds = item.get("seconds").and_then(Value::as_f64);
                        match (label, seconds) {
                            (Some(l), Some(s)) => Ok(format!("{l}:{s:e}")),
                            _ => Err(Error::Parse(format!(
                                "resolved config: malformed component entry {item}"
                            ))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
                    .join(","),
                _ => {
                    return Err(Error::Parse(format!(
                        "resolved config: unsupported value for {key:?}"
                    )))
                }
            };
            config.apply(key, &text)?;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Layered load: defaults, then the optional file, then `DPSIM_OUTPUT_DIR`,
/// then explicit overrides, validated at the end.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)?;
        config.apply_file(&text)?;
    }
    if let Ok(dir) = std::env::var("DPSIM_OUTPUT_DIR") {
        if !dir.is_empty() {
            config.output_dir = PathBuf::from(dir);
        }
    }
    for (key, value) in overrides {
        config.apply(key, value)?;
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_keeps_all_defaults() {
        let mut config = RunConfig::default();
        config.apply_file("").unwrap();
        assert_eq!(config, RunConfig::default());
        config
            .apply_file("# only a comment\n\n[apparatus]\n")
            .unwrap();
        assert_eq!(config, RunConfig::default());
    }

    #[test]
    fn file_lines_parse_with_comments_and_sections() {
        let text = "\
# lab notebook, run 12
[source]
photon_rate = 2.5e6   # attenuated
spad_efficiency = 0.4

[campaign]
n_trials = 50
mode = control
eraser_enabled = off
extra_component_times = spad_1:1000, resistor:5e1
";
        let mut config = RunConfig::default();
        config.apply_file(text).unwrap();
        assert_eq!(config.apparatus.photon_rate, 2.5e6);
        assert_eq!(config.apparatus.spad_efficiency, 0.4);
        assert_eq!(config.n_trials, 50);
        assert_eq!(config.mode, Mode::Control);
        assert!(!config.apparatus.eraser_enabled);
        assert_eq!(
            config.apparatus.extra_component_times,
            vec![("spad_1".to_string(), 1000.0), ("resistor".to_string(), 50.0)]
        );
    }

    #[test]
    fn later_layers_win() {
        let mut config = RunConfig::default();
        config.apply_file("cooling_delta = 30\n").unwrap();
        config.apply("cooling_delta", "0").unwrap();
        assert_eq!(config.apparatus.cooling_delta, 0.0);
    }

    #[test]
    fn unknown_key_suggests_the_nearest() {
        let mut config = RunConfig::default();
        let msg = config
            .apply("sample_intervall", "1e-8")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("sample_intervall"), "{msg}");
        assert!(msg.contains("\"sample_interval\""), "{msg}");

        let msg = config.apply("gama", "1").unwrap_err().to_string();
        assert!(msg.contains("\"gamma\""), "{msg}");
    }

    #[test]
    fn invariant_violations_name_field_and_bound() {
        let mut config = RunConfig::default();
        config.apply("spad_efficiency", "1.5").unwrap();
        let msg = config.validate().unwrap_err().to_string();
        assert!(msg.contains("spad_efficiency") && msg.contains("[0, 1]"), "{msg}");

        let mut config = RunConfig::default();
        config.apply("n_trials", "0").unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn bad_values_name_the_key() {
        let mut config = RunConfig::default();
        for (key, value) in [
            ("photon_rate", "fast"),
            ("n_trials", "-3"),
            ("mode", "sideways"),
            ("collapse_model", "coin_flip"),
            ("variant", "fixed"),
            ("eraser_enabled", "maybe"),
            ("extra_component_times", "spad_1=1000"),
        ] {
            let msg = config.apply(key, value).unwrap_err().to_string();
            assert!(msg.contains(key), "{key}: {msg}");
        }
        let msg = config
            .apply_file("photon_rate 2e6\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn bodies_rebuild_from_scalar_keys() {
        let mut config = RunConfig::default();
        config.apply("mirror_mass", "4e-4").unwrap();
        config.apply("mirror_radius", "3e-3").unwrap();
        assert_eq!(config.apparatus.mirror.mass(), 4e-4);
        assert_eq!(config.apparatus.mirror.radius(), 3e-3);
        assert_eq!(config.apparatus.mirror.label(), "mirror");
        assert!(config.apply("mount_mass", "-1").is_err());
    }

    #[test]
    fn resolved_echo_round_trips_exactly() {
        let mut config = RunConfig::default();
        config.apply("photon_rate", "1.2345678901234567e6").unwrap();
        config.apply("bias_phase", "1.5707963267948966").unwrap();
        config.apply("gamma", "0.039788735772973836").unwrap();
        config.apply("collapse_model", "deterministic").unwrap();
        config.apply("variant", "paper_printed").unwrap();
        config.apply("precollapse_readout", "mixture").unwrap();
        config.apply("eraser_enabled", "false").unwrap();
        config.apply("extra_component_times", "spad_1:1e3,piezo_1:0.1").unwrap();
        config.apply("mode", "superposed").unwrap();
        config.apply("master_seed", "987654321").unwrap();
        config.apply("output_dir", "runs/eraser_off").unwrap();

        let echo = config.resolved_json();
        let text = serde_json::to_string(&echo).unwrap();
        let reloaded = RunConfig::from_resolved_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(reloaded, config);
    }

    #[test]
    fn resolved_json_uses_flat_snake_case_values() {
        let echo = RunConfig::default().resolved_json();
        assert_eq!(echo["collapse_model"], "poisson");
        assert_eq!(echo["variant"], "continuity_corrected");
        assert_eq!(echo["precollapse_readout"], "baseline");
        assert_eq!(echo["mode"], "both");
        assert_eq!(echo["config_schema_version"], CONFIG_SCHEMA_VERSION);
        assert_eq!(echo["extra_component_times"][0]["label"], "spad_1");
        assert_eq!(echo["extra_component_times"][0]["seconds"], 1e3);
        for key in CONFIG_KEYS {
            assert!(!echo[*key].is_null(), "missing key {key}");
        }
    }

    #[test]
    fn parse_config_layers_file_under_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "cooling_delta = 30\nn_trials = 7\n").unwrap();
        let overrides = vec![("cooling_delta".to_string(), "0".to_string())];
        let config = parse_config(Some(&path), &overrides).unwrap();
        assert_eq!(config.apparatus.cooling_delta, 0.0);
        assert_eq!(config.n_trials, 7);
    }

    #[test]
    fn parse_config_rejects_invalid_results() {
        let overrides = vec![("spad_efficiency".to_string(), "1.5".to_string())];
        let msg = parse_config(None, &overrides).unwrap_err().to_string();
        assert!(msg.contains("spad_efficiency") && msg.contains("1.5"), "{msg}");
    }

    #[test]
    fn component_list_accepts_empty_and_none() {
        let mut config = RunConfig::default();
        config.apply("extra_component_times", "").unwrap();
        assert!(config.apparatus.extra_component_times.is_empty());
        config.apply("extra_component_times", "none").unwrap();
        assert!(config.apparatus.extra_component_times.is_empty());
    }
}
