//! Detector-plane field of the nested interferometer.
//!
//! Three beams reach the detector: through mirrors E, A, F (shift `δE + δA + δF`),
//! through E, B, F (shift `δE + δB + δF`) and through C (shift `δC`). Each carries
//! amplitude `√I₀/3` and its accumulated phase:
//!
//! ```text
//! E(x,y) = √I₀/3 · [ f(x, y-δE-δA-δF)·e^{iφA} + f(x, y-δE-δB-δF)·e^{iφB} + f(x, y-δC)·e^{iφC} ]
//! ```
//!
//! The 1/3 prefactors already contain the 2/3 : 1/3 power split at the input and
//! the inner 50:50 splitters. Blocking removes terms: behind mirror F only the C
//! term survives, blocking the C arm removes the C term.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{Axis, BeamProfile, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mirror {
    C,
    E,
    A,
    B,
    F,
}

impl Mirror {
    pub const ALL: [Mirror; 5] = [Mirror::C, Mirror::E, Mirror::A, Mirror::B, Mirror::F];

    pub fn label(self) -> &'static str {
        match self {
            Mirror::C => "C",
            Mirror::E => "E",
            Mirror::A => "A",
            Mirror::B => "B",
            Mirror::F => "F",
        }
    }
}

impl fmt::Display for Mirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One value per mirror.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerMirror<T> {
    #[serde(rename = "C")]
    pub c: T,
    #[serde(rename = "E")]
    pub e: T,
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
    #[serde(rename = "F")]
    pub f: T,
}

impl<T> PerMirror<T> {
    pub fn from_fn(mut f: impl FnMut(Mirror) -> T) -> Self {
        PerMirror { c: f(Mirror::C), e: f(Mirror::E), a: f(Mirror::A), b: f(Mirror::B), f: f(Mirror::F) }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Mirror, &T) -> U) -> PerMirror<U> {
        PerMirror::from_fn(|m| f(m, &self[m]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mirror, &T)> + '_ {
        Mirror::ALL.into_iter().map(move |m| (m, &self[m]))
    }
}

impl<T> Index<Mirror> for PerMirror<T> {
    type Output = T;

    fn index(&self, m: Mirror) -> &T {
        match m {
            Mirror::C => &self.c,
            Mirror::E => &self.e,
            Mirror::A => &self.a,
            Mirror::B => &self.b,
            Mirror::F => &self.f,
        }
    }
}

impl<T> IndexMut<Mirror> for PerMirror<T> {
    fn index_mut(&mut self, m: Mirror) -> &mut T {
        match m {
            Mirror::C => &mut self.c,
            Mirror::E => &mut self.e,
            Mirror::A => &mut self.a,
            Mirror::B => &mut self.b,
            Mirror::F => &mut self.f,
        }
    }
}

/// Instantaneous vertical beam shifts δ produced by each mirror.
pub type MirrorDeflections = PerMirror<f64>;

impl PerMirror<f64> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Only `mirror` deflected, by `value`.
    pub fn only(mirror: Mirror, value: f64) -> Self {
        let mut d = Self::zero();
        d[mirror] = value;
        d
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|_, v| v * s)
    }

    /// Total shifts of the three beams: (A path, B path, C path).
    pub fn path_shifts(&self) -> [f64; 3] {
        [self.e + self.a + self.f, self.e + self.b + self.f, self.c]
    }
}

/// Phase increments accumulated along each beam path, stored as given.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_c: f64,
}

impl PhaseConfig {
    pub fn new(phi_a: f64, phi_b: f64, phi_c: f64) -> Self {
        PhaseConfig { phi_a, phi_b, phi_c }
    }

    /// `φ_AB = φ_A - φ_B`.
    pub fn phi_ab(&self) -> f64 {
        self.phi_a - self.phi_b
    }

    pub fn phi_ac(&self) -> f64 {
        self.phi_a - self.phi_c
    }

    pub fn phi_bc(&self) -> f64 {
        self.phi_b - self.phi_c
    }

    /// Adds `offset` to all three phases.
    pub fn shifted(&self, offset: f64) -> Self {
        PhaseConfig::new(self.phi_a + offset, self.phi_b + offset, self.phi_c + offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Tuning {
    /// φ_A = φ_B = φ_C = 0.
    Constructive,
    /// φ_A = φ_C = 0, φ_B = π: the inner interferometer output is dark.
    DestructiveInner,
    Custom {
        phi_a: f64,
        phi_b: f64,
        phi_c: f64,
    },
}

impl Tuning {
    pub fn custom(phases: PhaseConfig) -> Self {
        Tuning::Custom { phi_a: phases.phi_a, phi_b: phases.phi_b, phi_c: phases.phi_c }
    }

    pub fn phases(&self) -> PhaseConfig {
        match *self {
            Tuning::Constructive => PhaseConfig::new(0.0, 0.0, 0.0),
            Tuning::DestructiveInner => PhaseConfig::new(0.0, std::f64::consts::PI, 0.0),
            Tuning::Custom { phi_a, phi_b, phi_c } => PhaseConfig::new(phi_a, phi_b, phi_c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Blocking {
    #[default]
    None,
    /// Beam blocked right behind mirror F: only the C arm reaches the detector.
    AfterMirrorF,
    /// Beam blocked between mirror C and the output splitter.
    CArm,
}

impl Blocking {
    /// Whether the (A, B, C) path terms reach the detector.
    pub fn open_paths(self) -> [bool; 3] {
        match self {
            Blocking::None => [true, true, true],
            Blocking::AfterMirrorF => [false, false, true],
            Blocking::CArm => [true, true, false],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub tuning: Tuning,
    #[serde(default)]
    pub blocking: Blocking,
    pub source_intensity: f64,
}

impl Scenario {
    pub fn new(tuning: Tuning, blocking: Blocking, source_intensity: f64) -> Result<Self> {
        if !(source_intensity.is_finite() && source_intensity > 0.0) {
            return Err(Error::InvalidInput(format!("source_intensity must be positive, got {source_intensity}")));
        }
        Ok(Scenario { tuning, blocking, source_intensity })
    }

    pub fn constructive() -> Self {
        Scenario { tuning: Tuning::Constructive, blocking: Blocking::None, source_intensity: 1.0 }
    }

    pub fn destructive() -> Self {
        Scenario { tuning: Tuning::DestructiveInner, blocking: Blocking::None, source_intensity: 1.0 }
    }

    pub fn with_blocking(self, blocking: Blocking) -> Self {
        Scenario { blocking, ..self }
    }

    pub fn phases(&self) -> PhaseConfig {
        self.tuning.phases()
    }
}

/// Complex field sampled at the cell centers of a (possibly split) grid, row-major
/// with `y` rows and `x` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    x: Axis,
    y: Axis,
    values: Vec<Complex64>,
}

impl FieldMap {
    pub fn x_axis(&self) -> &Axis {
        &self.x
    }

    pub fn y_axis(&self) -> &Axis {
        &self.y
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Row `j` (fixed y).
    pub fn row(&self, j: usize) -> &[Complex64] {
        let nx = self.x.len();
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.x.len() + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Largest admissible single-mirror deflection, as a fraction of the beam height.
pub const HARD_DEFLECTION_BOUND: f64 = 0.5;

pub fn check_deflections(profile: &BeamProfile, deflections: &MirrorDeflections) -> Result<()> {
    let bound = HARD_DEFLECTION_BOUND * profile.width_y();
    for (mirror, &value) in deflections.iter() {
        if !value.is_finite() || value.abs() > bound {
            return Err(Error::DeflectionOutOfBounds { mirror, value, bound });
        }
    }
    Ok(())
}

/// Composes the detector-plane field for the given deflections and scenario.
///
/// Cells are split at the profile's discontinuities (for every shifted term) so the
/// midpoint rule never straddles an edge.
pub fn compose_field(
    profile: &BeamProfile,
    grid: &Grid,
    deflections: &MirrorDeflections,
    scenario: &Scenario,
) -> Result<FieldMap> {
    check_deflections(profile, deflections)?;
    let phases = scenario.phases();
    let shifts = deflections.path_shifts();
    let phase = [phases.phi_a, phases.phi_b, phases.phi_c];
    let open = scenario.blocking.open_paths();

    let amplitude = scenario.source_intensity.sqrt() / 3.0 * profile.norm_constant();
    let mut terms = Vec::with_capacity(3);
    for k in 0..3 {
        if open[k] {
            profile.check_coverage(grid, shifts[k])?;
            terms.push((shifts[k], Complex64::from_polar(amplitude, phase[k])));
        }
    }

    let x = grid.x_axis(&profile.breakpoints_x());
    let base_breaks = profile.breakpoints_y();
    let y_breaks: Vec<f64> = terms.iter().flat_map(|&(s, _)| base_breaks.iter().map(move |b| b + s)).collect();
    let y = grid.y_axis(&y_breaks);

    let gx: Vec<f64> = x.centers().iter().map(|&xc| profile.x_factor(xc)).collect();
    let mut values = Vec::with_capacity(x.len() * y.len());
    for &yc in y.centers() {
        let mut row = Complex64::new(0.0, 0.0);
        for &(s, coeff) in &terms {
            row += coeff * profile.y_factor(yc - s);
        }
        values.extend(gx.iter().map(|&g| row * g));
    }
    Ok(FieldMap { x, y, values })
}
