//! Harmonic mirror vibrations and the detector time series.
//!
//! Mirror `i` deflects its beam by `δ_i(t) = a_i·sin(2π f_i t + θ_i)`. The optical
//! frequency exceeds the vibration frequencies by ~12 orders of magnitude, so each
//! sample is an independent static evaluation of the field at the instantaneous
//! deflections.

use serde::{Deserialize, Serialize};

use crate::detector::{qcd_difference, DetectorSample};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::interferometer::{compose_field, Mirror, MirrorDeflections, PerMirror, Scenario};
use crate::profiles::{BeamProfile, Grid};

/// Default vibration frequencies in cycles per record: distinct primes with no
/// pairwise sum or difference equal to another member.
pub const DEFAULT_FREQUENCIES: PerMirror<f64> = PerMirror { c: 23.0, e: 29.0, a: 31.0, b: 37.0, f: 41.0 };

/// Default amplitude as a fraction of the beam height.
pub const DEFAULT_RELATIVE_AMPLITUDE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tone {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Tone {
    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * (std::f64::consts::TAU * self.frequency * t + self.phase).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VibrationSet {
    pub tones: PerMirror<Tone>,
}

impl VibrationSet {
    /// Default frequencies, zero phases, amplitudes `1e-3 · width_y`.
    pub fn default_for(width_y: f64) -> Self {
        VibrationSet {
            tones: DEFAULT_FREQUENCIES.map(|_, &f| Tone {
                amplitude: DEFAULT_RELATIVE_AMPLITUDE * width_y,
                frequency: f,
                phase: 0.0,
            }),
        }
    }

    /// Every amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        VibrationSet { tones: self.tones.map(|_, t| Tone { amplitude: t.amplitude * s, ..*t }) }
    }

    /// Only `mirror` keeps its amplitude.
    pub fn only(&self, mirror: Mirror) -> Self {
        VibrationSet {
            tones: self.tones.map(|m, t| Tone { amplitude: if m == mirror { t.amplitude } else { 0.0 }, ..*t }),
        }
    }

    /// DFT bin of each mirror's tone for the given record.
    pub fn bins(&self, ts: &TimeSeriesConfig) -> PerMirror<usize> {
        self.tones.map(|_, t| (t.frequency * ts.record_length).round() as usize)
    }

    /// Checks the frequency-plan invariants against the record.
    pub fn validate(&self, ts: &TimeSeriesConfig) -> Result<()> {
        let nyquist = 0.5 * ts.sample_rate();
        for (m, t) in self.tones.iter() {
            if !(t.amplitude.is_finite() && t.amplitude >= 0.0) {
                return Err(Error::InvalidVibration(format!("amplitude of {m} must be finite and non-negative")));
            }
            if !t.phase.is_finite() {
                return Err(Error::InvalidVibration(format!("phase of {m} must be finite")));
            }
            if !(t.frequency.is_finite() && t.frequency > 0.0) {
                return Err(Error::InvalidVibration(format!("frequency of {m} must be positive")));
            }
            let cycles = t.frequency * ts.record_length;
            if (cycles - cycles.round()).abs() > 1e-9 * cycles.max(1.0) {
                return Err(Error::InvalidVibration(format!(
                    "frequency of {m} gives {cycles} cycles per record, not an integer"
                )));
            }
            if t.frequency >= nyquist {
                return Err(Error::InvalidVibration(format!(
                    "frequency of {m} ({}) is not below Nyquist ({nyquist})",
                    t.frequency
                )));
            }
        }
        let bins = self.bins(ts);
        for i in Mirror::ALL {
            for j in Mirror::ALL {
                if i != j && bins[i] == bins[j] {
                    return Err(Error::InvalidVibration(format!("mirrors {i} and {j} share frequency bin {}", bins[i])));
                }
                for k in Mirror::ALL {
                    if j >= k || i == j || i == k {
                        continue;
                    }
                    if bins[i] == bins[j] + bins[k] || bins[i] == bins[j].abs_diff(bins[k]) {
                        return Err(Error::InvalidVibration(format!(
                            "frequency of {i} is an intermodulation product of {j} and {k}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSeriesConfig {
    pub n_samples: usize,
    pub record_length: f64,
}

impl Default for TimeSeriesConfig {
    fn default() -> Self {
        TimeSeriesConfig { n_samples: 4096, record_length: 1.0 }
    }
}

impl TimeSeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 4 {
            return Err(Error::InvalidTimeSeries(format!("n_samples must be at least 4, got {}", self.n_samples)));
        }
        if !(self.record_length.is_finite() && self.record_length > 0.0) {
            return Err(Error::InvalidTimeSeries(format!("record_length must be positive, got {}", self.record_length)));
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> f64 {
        self.n_samples as f64 / self.record_length
    }

    /// `t_k = k · T / N`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.record_length / self.n_samples as f64
    }
}

pub fn deflections_at(vibration: &VibrationSet, t: f64) -> MirrorDeflections {
    vibration.tones.map(|_, tone| tone.at(t))
}

/// Detector output sampled over one record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub config: TimeSeriesConfig,
    pub samples: Vec<DetectorSample>,
}

impl TimeSeries {
    pub fn differences(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.d).collect()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| self.config.time(k))
    }
}

/// Runs the nonlinear field + detector pipeline at every sample time.
///
/// Samples are independent; `exec` only changes how they are scheduled, never the
/// values.
pub fn simulate_run(
    profile: &BeamProfile,
    grid: &Grid,
    vibration: &VibrationSet,
    scenario: &Scenario,
    ts: &TimeSeriesConfig,
    exec: Execution,
) -> Result<TimeSeries> {
    ts.validate()?;
    vibration.validate(ts)?;
    let samples = exec.try_map(ts.n_samples, |k| {
        let d = deflections_at(vibration, ts.time(k));
        compose_field(profile, grid, &d, scenario).map(|f| qcd_difference(&f))
    })?;
    Ok(TimeSeries { config: *ts, samples })
}
