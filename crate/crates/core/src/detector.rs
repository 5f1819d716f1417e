//! Quad-cell up/down difference signal.

use serde::{Deserialize, Serialize};

use crate::interferometer::FieldMap;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectorSample {
    /// `upper_power - lower_power`.
    pub d: f64,
    pub upper_power: f64,
    pub lower_power: f64,
}

impl DetectorSample {
    pub fn total_power(&self) -> f64 {
        self.upper_power + self.lower_power
    }
}

/// `D = ∬_{y>0} |E|² - ∬_{y<0} |E|²` by the midpoint rule on the field's cells.
///
/// Summation runs row by row in a fixed order, so the result depends only on the
/// field values.
pub fn qcd_difference(field: &FieldMap) -> DetectorSample {
    let wx = field.x_axis().widths();
    let mut upper = 0.0;
    let mut lower = 0.0;
    for (j, (y, wy)) in field.y_axis().cells().enumerate() {
        let row: f64 = field.row(j).iter().zip(wx).map(|(e, w)| e.norm_sqr() * w).sum();
        if y > 0.0 {
            upper += row * wy;
        } else {
            lower += row * wy;
        }
    }
    DetectorSample { d: upper - lower, upper_power: upper, lower_power: lower }
}
