//! Campaign files on disk.
//!
//! Trace samples go to CSV with integer-nanosecond timestamps so two runs
//! can be compared byte for byte on any platform; everything else (trial
//! metadata, summaries, the resolved config echo) is JSON with floating
//! seconds. Readers reverse the writers closely enough that an `estimate`
//! pass over saved files reproduces the in-memory analysis.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::analysis::{BenchmarkRow, CampaignSummary};
use crate::apparatus::{TraceSample, TrialRecord, TriggerSource};
use crate::config::RunConfig;
use crate::error::{Error, Result};

const TRACE_HEADER: &str = "trial_id,t_ns,intensity";

fn to_ns(t: f64) -> i64 {
    (t * 1e9).round() as i64
}

fn json_error(context: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{context}: {e}"))
}

/// One row per sample: `trial_id,t_ns,intensity`.
pub fn write_traces_csv(path: &Path, trials: &[TrialRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRACE_HEADER}")?;
    for trial in trials {
        for sample in &trial.samples {
            writeln!(w, "{},{},{}", trial.trial_id, to_ns(sample.t), sample.intensity)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn trial_json(trial: &TrialRecord, debug: bool) -> Value {
    let mut object = Map::new();
    object.insert("trial_id".into(), json!(trial.trial_id));
    object.insert("trigger_time_ns".into(), json!(to_ns(trial.trigger_time)));
    object.insert("trigger_source".into(), json!(trial.trigger_source));
    let collapse = match trial.collapse_time {
        Some(t) if t.is_finite() => json!(to_ns(t)),
        _ => json!("inf"),
    };
    object.insert("collapse_time_ns".into(), collapse);
    if debug {
        object.insert("surviving_branch".into(), json!(trial.surviving_branch));
    }
    object.insert("seed".into(), json!(trial.seed));
    Value::Object(object)
}

/// One JSON object per trial. `surviving_branch` is written only in debug
/// mode; the recorded intensity is the only physical readout, and leaking
/// which branch won would let an analysis cheat.
pub fn write_trials_json(path: &Path, trials: &[TrialRecord], debug: bool) -> Result<()> {
    let rows: Vec<Value> = trials.iter().map(|t| trial_json(t, debug)).collect();
    let text = serde_json::to_string_pretty(&rows)
        .map_err(|e| json_error("serializing trial metadata", e))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn trial_from_json(row: &Value, path: &Path) -> Result<TrialRecord> {
    let context = |what: &str| {
        Error::Parse(format!("{}: trial record {what}", path.display()))
    };
    let field = |key: &str| {
        row.get(key)
            .ok_or_else(|| context(&format!("missing {key:?}")))
    };
    let trial_id = field("trial_id")?
        .as_u64()
        .ok_or_else(|| context("has a non-integer trial_id"))?;
    // Dividing by the exactly representable 1e9 keeps reconstructed times
    // correctly rounded; multiplying by the inexact 1e-9 can land one ulp
    // off the values the simulation held in memory.
    let trigger_time = field("trigger_time_ns")?
        .as_f64()
        .ok_or_else(|| context("has a non-numeric trigger_time_ns"))?
        / 1e9;
    let trigger_source: TriggerSource = serde_json::from_value(field("trigger_source")?.clone())
        .map_err(|e| context(&format!("has a bad trigger_source: {e}")))?;
    let collapse_time = match field("collapse_time_ns")? {
        Value::String(s) if s == "inf" => {
            // A dark trial never prepared a superposition; a photon trial
            // with "inf" outlived the recorded trace.
            if trigger_source.is_dark_count() {
                None
            } else {
                Some(f64::INFINITY)
            }
        }
        Value::Number(n) => Some(
            n.as_f64()
                .ok_or_else(|| context("has a non-numeric collapse_time_ns"))?
                / 1e9,
        ),
        _ => return Err(context("has a bad collapse_time_ns")),
    };
    let surviving_branch = match row.get("surviving_branch") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            serde_json::from_value(v.clone())
                .map_err(|e| context(&format!("has a bad surviving_branch: {e}")))?,
        ),
    };
    let seed = field("seed")?
        .as_u64()
        .ok_or_else(|| context("has a non-integer seed"))?;
    Ok(TrialRecord {
        trial_id,
        trigger_time,
        trigger_source,
        collapse_time,
        surviving_branch,
        seed,
        samples: vec![],
    })
}

/// Loads a campaign arm back from its metadata and trace files. Trials come
/// back in metadata order with their samples attached.
pub fn read_trials(traces_path: &Path, trials_path: &Path) -> Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(trials_path)?;
    let rows: Vec<Value> = serde_json::from_str(&text)
        .map_err(|e| json_error(&trials_path.display().to_string(), e))?;
    let mut trials = Vec::with_capacity(rows.len());
    for row in &rows {
        trials.push(trial_from_json(row, trials_path)?);
    }
    let index: HashMap<u64, usize> = trials
        .iter()
        .enumerate()
        .map(|(i, t)| (t.trial_id, i))
        .collect();

    let reader = BufReader::new(File::open(traces_path)?);
    let mut lines = reader.lines();
    let bad_row = |line: usize, what: &str| {
        Error::Parse(format!("{} line {line}: {what}", traces_path.display()))
    };
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TRACE_HEADER {
        return Err(bad_row(1, "expected header trial_id,t_ns,intensity"));
    }
    for (offset, line) in lines.enumerate() {
        let line = line?;
        let row = line.trim();
        if row.is_empty() {
            continue;
        }
        let lineno = offset + 2;
        let mut parts = row.splitn(3, ',');
        let mut next = |what: &str| {
            parts
                .next()
                .ok_or_else(|| bad_row(lineno, &format!("missing {what}")))
        };
        let trial_id: u64 = next("trial_id")?
            .parse()
            .map_err(|_| bad_row(lineno, "bad trial_id"))?;
        let t_ns: i64 = next("t_ns")?
            .parse()
            .map_err(|_| bad_row(lineno, "bad t_ns"))?;
        let intensity: f64 = next("intensity")?
            .parse()
            .map_err(|_| bad_row(lineno, "bad intensity"))?;
        let slot = *index
            .get(&trial_id)
            .ok_or_else(|| bad_row(lineno, "sample for a trial absent from the metadata"))?;
        trials[slot].samples.push(TraceSample {
            t: t_ns as f64 / 1e9,
            intensity,
        });
    }
    Ok(trials)
}

/// `{arm}_traces.csv` and `{arm}_trials.json` under `dir`.
pub fn arm_paths(dir: &Path, arm: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{arm}_traces.csv")),
        dir.join(format!("{arm}_trials.json")),
    )
}

pub fn write_campaign_arm(dir: &Path, arm: &str, trials: &[TrialRecord], debug: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (traces, metadata) = arm_paths(dir, arm);
    write_traces_csv(&traces, trials)?;
    write_trials_json(&metadata, trials, debug)
}

pub fn read_campaign_arm(dir: &Path, arm: &str) -> Result<Vec<TrialRecord>> {
    let (traces, metadata) = arm_paths(dir, arm);
    read_trials(&traces, &metadata)
}

/// Non-finite values (an unmeasurable γ, an infinite predicted delay) land
/// as JSON nulls.
pub fn write_summary_json(path: &Path, summary: &CampaignSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)
        .map_err(|e| json_error("serializing summary", e))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_resolved_config(path: &Path, config: &RunConfig) -> Result<()> {
    let text = serde_json::to_string_pretty(&config.resolved_json())
        .map_err(|e| json_error("serializing resolved config", e))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_resolved_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| json_error(&path.display().to_string(), e))?;
    RunConfig::from_resolved_json(&value)
}

/// Human-readable aligned columns.
pub fn benchmark_table_text(rows: &[BenchmarkRow]) -> String {
    let mut out = format!(
        "{:<8} {:>12} {:>12} {:>14} {:>10} {:>12} {:>12} {:>13}\n",
        "label",
        "mass_kg",
        "radius_m",
        "displacement_m",
        "lambda",
        "E_g_J",
        "t_gamma1_s",
        "t_gamma_8pi_s"
    );
    for row in rows {
        out.push_str(&format!(
            "{:<8} {:>12.4e} {:>12.4e} {:>14.4e} {:>10.3e} {:>12.4e} {:>12.4e} {:>13.4e}\n",
            row.label,
            row.mass,
            row.radius,
            row.displacement,
            row.lambda,
            row.e_g,
            row.t_gamma1,
            row.t_gamma_8pi
        ));
    }
    out
}

/// Machine-readable companion to [`benchmark_table_text`].
pub fn benchmark_table_csv(rows: &[BenchmarkRow]) -> String {
    let mut out =
        String::from("label,mass_kg,radius_m,displacement_m,lambda,E_g_J,t_gamma1_s,t_gamma_8pi_s\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            row.label,
            row.mass,
            row.radius,
            row.displacement,
            row.lambda,
            row.e_g,
            row.t_gamma1,
            row.t_gamma_8pi
        ));
    }
    out
}

pub const SWEEP_HEADER: &str = "param,value,n_superposed,n_control,mean_onset_superposed_s,\
mean_onset_control_s,mean_excess_delay_s,predicted_mean_delay_s,ks_statistic,ks_p_value,\
gamma_estimate,gamma_ci_low,gamma_ci_high";

/// One summary line per sweep point, matching [`SWEEP_HEADER`].
pub fn sweep_csv_row(param: &str, value: &str, summary: &CampaignSummary) -> String {
    format!(
        "{param},{value},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
        summary.n_superposed,
        summary.n_control,
        summary.mean_onset_superposed,
        summary.mean_onset_control,
        summary.mean_excess_delay,
        summary.predicted_mean_delay,
        summary.ks_statistic,
        summary.ks_p_value,
        summary.gamma_estimate,
        summary.gamma_ci_low,
        summary.gamma_ci_high
    )
}
