//! CSV writers. Floats are written as `{:.16e}` (17 significant digits), which
//! round-trips every f64 exactly.

use std::path::Path;

use anyhow::{Context, Result};
use mzi_core::config::SweepRow;
use mzi_core::dynamics::TimeSeries;
use mzi_core::spectrum::SpectrumReport;
use mzi_core::Mirror;

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))
}

pub fn write_time_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["sample_index", "t", "D", "upper_power", "lower_power"])?;
    for (k, (t, s)) in series.times().zip(&series.samples).enumerate() {
        w.write_record([k.to_string(), float(t), float(s.d), float(s.upper_power), float(s.lower_power)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum(path: &Path, spectrum: &SpectrumReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["bin_index", "frequency", "power", "is_mirror_peak", "mirror_label"])?;
    for (k, &p) in spectrum.bin_powers.iter().enumerate() {
        let mirror = spectrum.mirror_at(k);
        w.write_record([
            k.to_string(),
            float(k as f64 * spectrum.bin_width),
            float(p),
            mirror.is_some().to_string(),
            mirror.map(|m| m.label().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, parameter: &str, rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec![parameter.to_string()];
    header.extend(Mirror::ALL.iter().map(|m| format!("peak_power_{}", m.label())));
    header.push("dc_power".into());
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![float(row.value)];
        rec.extend(Mirror::ALL.iter().map(|&m| float(row.peak_power[m])));
        rec.push(float(row.dc_power));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
