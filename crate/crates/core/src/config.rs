//! Run configuration file, the shipped presets and parameter sweeps.
//!
//! The file format is TOML. Grammar (all lengths in the same unit as the beam
//! widths, frequencies in cycles per unit time):
//!
//! ```toml
//! [profile]
//! kind = "gaussian"          # gaussian | rectangular | asymmetric-test
//! width_x = 1.0
//! width_y = 1.0
//! skew = 0.0                 # asymmetric-test only, |skew| < 1
//!
//! [grid]
//! nx = 48                    # cells along x
//! ny = 256                   # cells along y
//! extent_x = 4.5             # half-extent
//! extent_y = 4.5
//!
//! [scenario]
//! tuning = { kind = "constructive" }   # or "destructive-inner", or
//!                                      # { kind = "custom", phi_a = 0.0, phi_b = 1.0, phi_c = 0.0 }
//! blocking = "none"          # none | after-mirror-f | c-arm
//! source_intensity = 1.0
//!
//! [time_series]
//! n_samples = 4096
//! record_length = 1.0
//!
//! [vibration.C]              # one table per mirror: C, E, A, B, F
//! amplitude = 0.001
//! frequency = 23.0
//! phase = 0.0                # optional
//!
//! [output]                   # optional; file names relative to --out
//! time_series = "time_series.csv"
//! spectrum = "spectrum.csv"
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::predicted_peak_powers;
use crate::dynamics::{simulate_run, TimeSeries, TimeSeriesConfig, VibrationSet};
use crate::error::Result;
use crate::exec::Execution;
use crate::interferometer::{check_deflections, Mirror, PerMirror, PhaseConfig, Scenario, Tuning};
use crate::profiles::{line_integral_f2, BeamProfile, Grid};
use crate::spectrum::{power_spectrum, SpectrumReport};

pub const PRESET_NAMES: [&str; 4] = ["constructive", "destructive", "block-after-f", "block-c-arm"];

const PRESET_CONSTRUCTIVE: &str = include_str!("../presets/constructive.toml");
const PRESET_DESTRUCTIVE: &str = include_str!("../presets/destructive.toml");
const PRESET_BLOCK_AFTER_F: &str = include_str!("../presets/block-after-f.toml");
const PRESET_BLOCK_C_ARM: &str = include_str!("../presets/block-c-arm.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default = "default_time_series_path")]
    pub time_series: String,
    #[serde(default = "default_spectrum_path")]
    pub spectrum: String,
}

fn default_time_series_path() -> String {
    "time_series.csv".into()
}

fn default_spectrum_path() -> String {
    "spectrum.csv".into()
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths { time_series: default_time_series_path(), spectrum: default_spectrum_path() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: BeamProfile,
    pub grid: Grid,
    pub scenario: Scenario,
    pub time_series: TimeSeriesConfig,
    pub vibration: VibrationSet,
    #[serde(default)]
    pub output: OutputPaths,
}

/// A configuration problem with the 1-based line it was found on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: TimeSeries,
    pub spectrum: SpectrumReport,
    pub predicted: PerMirror<f64>,
    pub line_integral: f64,
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn parse(text: &str) -> std::result::Result<RunConfig, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of_offset(text, s.start)).unwrap_or(1),
            message: e.message().trim().to_string(),
        })?;
        config.validate().map_err(|(key, message)| ConfigError { line: locate_key(text, key), message })?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration is always representable as TOML")
    }

    pub fn preset(name: &str) -> Option<RunConfig> {
        let text = match name {
            "constructive" => PRESET_CONSTRUCTIVE,
            "destructive" => PRESET_DESTRUCTIVE,
            "block-after-f" => PRESET_BLOCK_AFTER_F,
            "block-c-arm" => PRESET_BLOCK_C_ARM,
            _ => return None,
        };
        Some(RunConfig::parse(text).expect("shipped presets are valid"))
    }

    /// Checks cross-field invariants; returns the offending key path on failure.
    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let s = self.scenario.source_intensity;
        if !(s.is_finite() && s > 0.0) {
            return Err(("scenario.source_intensity", format!("source_intensity must be positive, got {s}")));
        }
        self.time_series.validate().map_err(|e| ("time_series", e.to_string()))?;
        self.vibration.validate(&self.time_series).map_err(|e| ("vibration", e.to_string()))?;
        let amps = self.vibration.tones.map(|_, t| t.amplitude);
        check_deflections(&self.profile, &amps).map_err(|e| ("vibration", e.to_string()))?;
        for shift in amps.path_shifts() {
            for s in [shift, -shift] {
                self.profile.check_coverage(&self.grid, s).map_err(|e| ("grid", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn line_integral(&self) -> f64 {
        line_integral_f2(&self.profile)
    }

    pub fn simulate(&self, exec: Execution) -> Result<TimeSeries> {
        simulate_run(&self.profile, &self.grid, &self.vibration, &self.scenario, &self.time_series, exec)
    }

    /// Simulates, transforms and computes the linear prediction.
    pub fn run(&self, exec: Execution) -> Result<RunOutcome> {
        let series = self.simulate(exec)?;
        let spectrum = power_spectrum(&series.differences(), &self.time_series, &self.vibration)?;
        let line_integral = self.line_integral();
        let predicted = predicted_peak_powers(&self.vibration, &self.scenario, line_integral);
        Ok(RunOutcome { series, spectrum, predicted, line_integral })
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` (`section.leaf`), falling back to its section header, else 1.
fn locate_key(text: &str, key: &str) -> usize {
    let (section, leaf) = key.split_once('.').unwrap_or((key, ""));
    let mut in_section = false;
    let mut header_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[') {
            let name = h.trim_start_matches('[').trim_end_matches(']').trim();
            in_section = name == section || name.starts_with(&format!("{section}."));
            if in_section && header_line.is_none() {
                header_line = Some(i + 1);
            }
            continue;
        }
        if in_section && !leaf.is_empty() {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == leaf {
                    return i + 1;
                }
            }
        }
    }
    header_line.unwrap_or(1)
}

/// Scalar parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Multiplies every vibration amplitude.
    AmplitudeScale,
    /// Skew of the profile (switches a Gaussian to the asymmetric test shape).
    Skew,
    /// Sets φ_B, keeping φ_A and φ_C.
    PhaseB,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::AmplitudeScale => "amplitude-scale",
            SweepParameter::Skew => "skew",
            SweepParameter::PhaseB => "phase-b",
        }
    }

    pub fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParameter::AmplitudeScale => cfg.vibration = base.vibration.scaled(value),
            SweepParameter::Skew => cfg.profile = base.profile.with_skew(value)?,
            SweepParameter::PhaseB => {
                let ph = base.scenario.phases();
                cfg.scenario.tuning = Tuning::custom(PhaseConfig::new(ph.phi_a, value, ph.phi_c));
            }
        }
        Ok(cfg)
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "amplitude-scale" => Ok(SweepParameter::AmplitudeScale),
            "skew" => Ok(SweepParameter::Skew),
            "phase-b" => Ok(SweepParameter::PhaseB),
            other => Err(format!("unknown sweep parameter `{other}` (expected amplitude-scale, skew or phase-b)")),
        }
    }
}

/// One sweep point: the per-mirror peak powers and the DC power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub peak_power: PerMirror<f64>,
    pub dc_power: f64,
}

pub fn sweep(base: &RunConfig, parameter: SweepParameter, values: &[f64], exec: Execution) -> Result<Vec<SweepRow>> {
    values
        .iter()
        .map(|&value| {
            let out = parameter.apply(base, value)?.run(exec)?;
            Ok(SweepRow { value, peak_power: out.spectrum.peak_power, dc_power: out.spectrum.dc_power() })
        })
        .collect()
}

impl RunOutcome {
    pub fn peak(&self, m: Mirror) -> f64 {
        self.spectrum.peak_power[m]
    }
}
