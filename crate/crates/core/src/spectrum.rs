//! Power spectrum of the detector difference signal.
//!
//! Convention (shared with [`crate::analytic::predicted_peak_powers`]): with
//! `X_k = Σ_n D_n e^{-2πikn/N}`, the single-sided bin powers are
//!
//! ```text
//! P_0 = |X_0|²/N²,   P_k = 2|X_k|²/N² (0 < k < N/2),   P_{N/2} = |X_{N/2}|²/N²
//! ```
//!
//! so `Σ P_k` equals the mean square of the series and a tone of amplitude `A`
//! sitting on an integer bin has `P = A²/2`. No window is applied: every mirror
//! frequency completes an integer number of cycles per record, so its energy lands
//! in exactly one bin.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dynamics::{TimeSeriesConfig, VibrationSet};
use crate::error::{Error, Result};
use crate::interferometer::{Mirror, PerMirror};

/// A peak is detectable when its power exceeds this multiple of the noise floor.
pub const DETECTION_FACTOR: f64 = 10.0;

/// Single-sided bin powers of a real series.
pub fn bin_powers(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let n2 = (n * n) as f64;
    (0..=n / 2)
        .map(|k| {
            let p = buf[k].norm_sqr() / n2;
            if k == 0 || 2 * k == n {
                p
            } else {
                2.0 * p
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub bin_powers: Vec<f64>,
    /// Bin spacing `1 / record_length`.
    pub bin_width: f64,
    pub peak_bins: PerMirror<usize>,
    pub peak_power: PerMirror<f64>,
    /// Median power of the bins that are neither DC nor a mirror bin.
    pub noise_floor: f64,
}

impl SpectrumReport {
    pub fn dc_power(&self) -> f64 {
        self.bin_powers[0]
    }

    /// Power of everything but the DC bin.
    pub fn ac_power(&self) -> f64 {
        self.bin_powers[1..].iter().sum()
    }

    pub fn is_detectable(&self, mirror: Mirror) -> bool {
        self.peak_power[mirror] > DETECTION_FACTOR * self.noise_floor
    }

    /// Tone amplitude implied by a peak power (`A = sqrt(2P)`).
    pub fn peak_amplitude(&self, mirror: Mirror) -> f64 {
        (2.0 * self.peak_power[mirror]).sqrt()
    }

    /// Mirror whose tone sits on `bin`, if any.
    pub fn mirror_at(&self, bin: usize) -> Option<Mirror> {
        Mirror::ALL.into_iter().find(|&m| self.peak_bins[m] == bin)
    }
}

pub fn power_spectrum(series: &[f64], ts: &TimeSeriesConfig, vibration: &VibrationSet) -> Result<SpectrumReport> {
    if series.len() != ts.n_samples {
        return Err(Error::LengthMismatch { expected: ts.n_samples, got: series.len() });
    }
    ts.validate()?;
    let bins = bin_powers(series);
    let peak_bins = vibration.bins(ts);
    let peak_power = peak_bins.map(|_, &k| bins[k]);
    let mut rest: Vec<f64> = bins
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(k, _)| !Mirror::ALL.iter().any(|&m| peak_bins[m] == *k))
        .map(|(_, &p)| p)
        .collect();
    let noise_floor = median(&mut rest);
    Ok(SpectrumReport { bin_powers: bins, bin_width: 1.0 / ts.record_length, peak_bins, peak_power, noise_floor })
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `peak_power(num) / peak_power(den)`; fails when `den` is not detectable.
pub fn peak_ratio(report: &SpectrumReport, num: Mirror, den: Mirror) -> Result<f64> {
    if !report.is_detectable(den) {
        return Err(Error::NoReferencePeak(den));
    }
    Ok(report.peak_power[num] / report.peak_power[den])
}
