//! Transverse beam amplitude profiles and the sampling grid.
//!
//! Every profile is separable, `f(x, y) = N · g(x) · h(y)`, with `N` chosen so that
//! `∬ f² dx dy = 1`. Conventions:
//!
//! * **Gaussian**: `f ∝ exp(-x²/wₓ² - y²/w_y²)`. The widths are the 1/e² *intensity*
//!   half-widths (the amplitude falls to 1/e at `x = wₓ`). `N = sqrt(2 / (π wₓ w_y))`.
//! * **Rectangular**: `f = 1/sqrt(w d)` inside `|x| ≤ w/2, |y| ≤ d/2`, zero outside.
//!   `width_x` is the full width `w`, `width_y` the full height `d`. Points exactly on
//!   an edge take the interior value.
//! * **AsymmetricTest**: the Gaussian above multiplied by `1 + skew · tanh(y/w_y)` and
//!   renormalized numerically. `skew = 0` reproduces the Gaussian.
//!
//! Profiles are closed-form; a shifted profile `f(x, y - δ)` is evaluated directly,
//! never interpolated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intensity at the grid boundary must stay below this fraction of the peak.
pub const COVERAGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Gaussian,
    Rectangular,
    AsymmetricTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct BeamProfile {
    kind: ProfileKind,
    width_x: f64,
    width_y: f64,
    skew: f64,
    norm_constant: f64,
}

/// Serialized form of a [`BeamProfile`]; the normalization constant is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub width_x: f64,
    pub width_y: f64,
    #[serde(default)]
    pub skew: f64,
}

impl TryFrom<ProfileSpec> for BeamProfile {
    type Error = Error;

    fn try_from(spec: ProfileSpec) -> Result<Self> {
        BeamProfile::new(spec.kind, spec.width_x, spec.width_y, spec.skew)
    }
}

impl From<BeamProfile> for ProfileSpec {
    fn from(p: BeamProfile) -> Self {
        ProfileSpec {
            kind: p.kind,
            width_x: p.width_x,
            width_y: p.width_y,
            skew: p.skew,
        }
    }
}

impl BeamProfile {
    pub fn new(kind: ProfileKind, width_x: f64, width_y: f64, skew: f64) -> Result<Self> {
        for (name, w) in [("width_x", width_x), ("width_y", width_y)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidProfile(format!("{name} must be a positive length, got {w}")));
            }
        }
        if !skew.is_finite() {
            return Err(Error::InvalidProfile(format!("skew must be finite, got {skew}")));
        }
        match kind {
            ProfileKind::AsymmetricTest if skew.abs() >= 1.0 => {
                return Err(Error::InvalidProfile(format!("skew must satisfy |skew| < 1, got {skew}")));
            }
            ProfileKind::Gaussian | ProfileKind::Rectangular if skew != 0.0 => {
                return Err(Error::InvalidProfile(format!("skew is only meaningful for asymmetric-test, got {skew}")));
            }
            _ => {}
        }
        let mut profile = BeamProfile { kind, width_x, width_y, skew, norm_constant: 1.0 };
        profile.norm_constant = match kind {
            ProfileKind::Gaussian => (2.0 / (std::f64::consts::PI * width_x * width_y)).sqrt(),
            ProfileKind::Rectangular => 1.0 / (width_x * width_y).sqrt(),
            ProfileKind::AsymmetricTest => {
                let gx2 = width_x * std::f64::consts::FRAC_PI_2.sqrt();
                let gy2 = smooth_integral(|y| profile.y_factor(y).powi(2), width_y);
                1.0 / (gx2 * gy2).sqrt()
            }
        };
        Ok(profile)
    }

    pub fn gaussian(width_x: f64, width_y: f64) -> Result<Self> {
        Self::new(ProfileKind::Gaussian, width_x, width_y, 0.0)
    }

    pub fn rectangular(width: f64, height: f64) -> Result<Self> {
        Self::new(ProfileKind::Rectangular, width, height, 0.0)
    }

    pub fn asymmetric_test(width_x: f64, width_y: f64, skew: f64) -> Result<Self> {
        Self::new(ProfileKind::AsymmetricTest, width_x, width_y, skew)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn width_x(&self) -> f64 {
        self.width_x
    }

    pub fn width_y(&self) -> f64 {
        self.width_y
    }

    pub fn skew(&self) -> f64 {
        self.skew
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// Same widths with a different skew: Gaussian for `skew == 0`, otherwise
    /// `AsymmetricTest`. Rectangular profiles only accept zero.
    pub fn with_skew(&self, skew: f64) -> Result<Self> {
        let kind = match self.kind {
            ProfileKind::Rectangular if skew != 0.0 => {
                return Err(Error::InvalidProfile("a rectangular profile cannot be skewed".into()))
            }
            ProfileKind::Rectangular => ProfileKind::Rectangular,
            _ if skew == 0.0 => ProfileKind::Gaussian,
            _ => ProfileKind::AsymmetricTest,
        };
        Self::new(kind, self.width_x, self.width_y, skew)
    }

    /// `f(x, y)`.
    #[inline]
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        self.norm_constant * self.x_factor(x) * self.y_factor(y)
    }

    /// Unnormalized horizontal factor `g(x)`.
    #[inline]
    pub fn x_factor(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian | ProfileKind::AsymmetricTest => {
                let u = x / self.width_x;
                (-u * u).exp()
            }
            ProfileKind::Rectangular => {
                if x.abs() <= 0.5 * self.width_x {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Unnormalized vertical factor `h(y)`.
    #[inline]
    pub fn y_factor(&self, y: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => {
                let u = y / self.width_y;
                (-u * u).exp()
            }
            ProfileKind::AsymmetricTest => {
                let u = y / self.width_y;
                (-u * u).exp() * (1.0 + self.skew * u.tanh())
            }
            ProfileKind::Rectangular => {
                if y.abs() <= 0.5 * self.width_y {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound on `|h(y)|`, used for the coverage test.
    pub fn y_factor_peak(&self) -> f64 {
        match self.kind {
            ProfileKind::AsymmetricTest => 1.0 + self.skew.abs(),
            _ => 1.0,
        }
    }

    /// True when `f(x, -y) = f(x, y)` holds identically.
    pub fn is_symmetric(&self) -> bool {
        self.kind != ProfileKind::AsymmetricTest || self.skew == 0.0
    }

    /// Discontinuities of `g` (unshifted).
    pub fn breakpoints_x(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Rectangular => vec![-0.5 * self.width_x, 0.5 * self.width_x],
            _ => Vec::new(),
        }
    }

    /// Discontinuities of `h` (unshifted).
    pub fn breakpoints_y(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Rectangular => vec![-0.5 * self.width_y, 0.5 * self.width_y],
            _ => Vec::new(),
        }
    }

    /// Checks that a copy of the profile shifted vertically by `shift` is fully
    /// contained in `grid`.
    pub fn check_coverage(&self, grid: &Grid, shift: f64) -> Result<()> {
        let limit = COVERAGE_TOLERANCE;
        let x_edge = self.x_factor(grid.extent_x).max(self.x_factor(-grid.extent_x));
        if x_edge * x_edge > limit {
            return Err(Error::GridCoverage(format!(
                "intensity at x = ±{} is {:.3e} of the peak",
                grid.extent_x,
                x_edge * x_edge
            )));
        }
        let peak = self.y_factor_peak();
        let y_edge = self.y_factor(grid.extent_y - shift).abs().max(self.y_factor(-grid.extent_y - shift).abs());
        let rel = (y_edge / peak).powi(2);
        if rel > limit {
            return Err(Error::GridCoverage(format!(
                "intensity at y = ±{} with shift {shift} is {rel:.3e} of the peak",
                grid.extent_y
            )));
        }
        Ok(())
    }
}

/// `∫ φ(y) dy` over the real line for a smooth integrand decaying on scale `width`.
/// The midpoint rule converges spectrally for such integrands.
fn smooth_integral(phi: impl Fn(f64) -> f64, width: f64) -> f64 {
    const CELLS: usize = 24_000;
    let half = 12.0 * width;
    let h = 2.0 * half / CELLS as f64;
    (0..CELLS).map(|i| phi(-half + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// `∫ f²(x, 0) dx`, the line integral multiplying the linearized signal.
///
/// Computed by midpoint quadrature along the x axis. For the rectangular kind the
/// integration runs exactly over the support so the result is exact.
pub fn line_integral_f2(profile: &BeamProfile) -> f64 {
    const CELLS: usize = 8192;
    let (lo, hi) = match profile.kind {
        ProfileKind::Rectangular => (-0.5 * profile.width_x, 0.5 * profile.width_x),
        _ => (-12.0 * profile.width_x, 12.0 * profile.width_x),
    };
    let h = (hi - lo) / CELLS as f64;
    (0..CELLS)
        .map(|i| profile.evaluate(lo + (i as f64 + 0.5) * h, 0.0).powi(2))
        .sum::<f64>()
        * h
}

/// `∬ f² dx dy` over `grid` by the midpoint rule (cells split at discontinuities).
pub fn power_integral(profile: &BeamProfile, grid: &Grid) -> f64 {
    let xs = grid.x_axis(&profile.breakpoints_x());
    let ys = grid.y_axis(&profile.breakpoints_y());
    let gx: f64 = xs.cells().map(|(x, w)| profile.x_factor(x).powi(2) * w).sum();
    let gy: f64 = ys.cells().map(|(y, w)| profile.y_factor(y).powi(2) * w).sum();
    profile.norm_constant.powi(2) * gx * gy
}

/// Uniform sampling rectangle `[-extent_x, extent_x] × [-extent_y, extent_y]`.
///
/// Samples sit at cell centers (half-cell staggering): with an even count, `0` is a
/// cell edge and no sample lies on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    nx: usize,
    ny: usize,
    extent_x: f64,
    extent_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub extent_x: f64,
    pub extent_y: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.nx, s.ny, s.extent_x, s.extent_y)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec { nx: g.nx, ny: g.ny, extent_x: g.extent_x, extent_y: g.extent_y }
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize, extent_x: f64, extent_y: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples per axis, got {nx}×{ny}")));
        }
        for (name, e) in [("extent_x", extent_x), ("extent_y", extent_y)] {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} must be a positive length, got {e}")));
            }
        }
        Ok(Grid { nx, ny, extent_x, extent_y })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn extent_x(&self) -> f64 {
        self.extent_x
    }

    pub fn extent_y(&self) -> f64 {
        self.extent_y
    }

    /// Same extents, sample counts multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid { nx: self.nx * factor, ny: self.ny * factor, ..*self }
    }

    pub fn x_axis(&self, breakpoints: &[f64]) -> Axis {
        Axis::new(self.extent_x, self.nx, breakpoints)
    }

    /// The y axis always has an edge at `0` so the upper/lower split is exact.
    pub fn y_axis(&self, breakpoints: &[f64]) -> Axis {
        let mut b = Vec::with_capacity(breakpoints.len() + 1);
        b.push(0.0);
        b.extend_from_slice(breakpoints);
        Axis::new(self.extent_y, self.ny, &b)
    }
}

/// Midpoint-rule cells along one axis: uniform cells, further split at any
/// breakpoints that fall inside them.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    centers: Vec<f64>,
    widths: Vec<f64>,
}

impl Axis {
    fn new(extent: f64, n: usize, breakpoints: &[f64]) -> Axis {
        // extent·k/n with k = 2i - n makes the edge set exactly symmetric about 0.
        let mut edges: Vec<f64> = (0..=n).map(|i| extent * (2 * i as i64 - n as i64) as f64 / n as f64).collect();
        let extra: Vec<f64> = breakpoints.iter().copied().filter(|b| b.abs() < extent).collect();
        if !extra.is_empty() {
            edges.extend(extra);
            edges.sort_by(f64::total_cmp);
            edges.dedup();
        }
        let (centers, widths) = edges
            .windows(2)
            .filter(|e| e[1] > e[0])
            .map(|e| (0.5 * (e[0] + e[1]), e[1] - e[0]))
            .unzip();
        Axis { centers, widths }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// `(center, width)` pairs in ascending order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.centers.iter().copied().zip(self.widths.iter().copied())
    }
}
