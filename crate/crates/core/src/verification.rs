//! Perturbation-order fits, rectangular-profile exactness and the acceptance
//! matrix.

use std::fmt;

use serde::Serialize;

use crate::analytic::{curly_bracket, linearized_signal, signal_scale};
use crate::config::{RunConfig, RunOutcome};
use crate::detector::qcd_difference;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::interferometer::{check_deflections, compose_field, Blocking, Mirror, MirrorDeflections, PerMirror, PhaseConfig, Scenario, Tuning};
use crate::profiles::{line_integral_f2, BeamProfile, Grid, ProfileKind};
use crate::spectrum::DETECTION_FACTOR;

/// Amplitude scales (relative to the default 1e-3·width_y) used for order fits;
/// they span 1.5 decades.
pub const DEFAULT_ORDER_SCALES: [f64; 6] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0];

/// Minimum span of the scale list, in decades.
pub const MIN_SCALE_DECADES: f64 = 1.5;

/// Largest relative mismatch tolerated between the nonlinear detector output and
/// the linear formula for the rectangular profile.
pub const RECT_EXACTNESS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderQuantity {
    /// Amplitude of one mirror's spectral peak.
    PeakAmplitude(Mirror),
    /// Distance between the measured fundamental amplitudes and the linear
    /// prediction, `sqrt(Σ_i (A_i - |A_i^lin|)²)`. The prediction uses the exact
    /// line integral, so for smooth profiles the grid's quadrature error (first
    /// order in the amplitude, `O(h²)`) is part of the residual.
    LinearizationResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderPoint {
    pub scale: f64,
    pub value: f64,
    /// Above `DETECTION_FACTOR × noise floor` of its run.
    pub measurable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OrderFit {
    Fitted { order: f64, points: Vec<OrderPoint> },
    /// Fewer than two points rose above the numeric floor.
    Suppressed { points: Vec<OrderPoint> },
}

impl OrderFit {
    pub fn order(&self) -> Option<f64> {
        match self {
            OrderFit::Fitted { order, .. } => Some(*order),
            OrderFit::Suppressed { .. } => None,
        }
    }

    pub fn points(&self) -> &[OrderPoint] {
        match self {
            OrderFit::Fitted { points, .. } | OrderFit::Suppressed { points } => points,
        }
    }

    /// A suppressed quantity satisfies any lower bound on its order.
    pub fn satisfies(&self, min_order: f64) -> bool {
        self.order().is_none_or(|o| o >= min_order)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn measure(outcome: &RunOutcome, quantity: OrderQuantity) -> (f64, bool) {
    let spec = &outcome.spectrum;
    match quantity {
        OrderQuantity::PeakAmplitude(m) => (spec.peak_amplitude(m), spec.is_detectable(m)),
        OrderQuantity::LinearizationResidual => {
            let r2: f64 = Mirror::ALL
                .iter()
                .map(|&m| (spec.peak_amplitude(m) - (2.0 * outcome.predicted[m]).sqrt()).powi(2))
                .sum();
            let r = r2.sqrt();
            (r, 0.5 * r2 > DETECTION_FACTOR * spec.noise_floor)
        }
    }
}

/// Scales every vibration amplitude of `base` by each entry of `scales`, measures
/// `quantity` and fits its order in the scale.
pub fn order_fit(base: &RunConfig, quantity: OrderQuantity, scales: &[f64], exec: Execution) -> Result<OrderFit> {
    if scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(Error::InvalidInput("order-fit scales must be positive".into()));
    }
    let lo = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().cloned().fold(0.0, f64::max);
    if (hi / lo).log10() < MIN_SCALE_DECADES - 1e-9 {
        return Err(Error::InvalidInput(format!(
            "order-fit scales span {:.2} decades, need at least {MIN_SCALE_DECADES}",
            (hi / lo).log10()
        )));
    }
    let mut points = Vec::with_capacity(scales.len());
    for &scale in scales {
        let mut cfg = base.clone();
        cfg.vibration = base.vibration.scaled(scale);
        let outcome = cfg.run(exec)?;
        let (value, measurable) = measure(&outcome, quantity);
        points.push(OrderPoint { scale, value, measurable: measurable && value > 0.0 });
    }
    let usable: Vec<(f64, f64)> = points.iter().filter(|p| p.measurable).map(|p| (p.scale, p.value)).collect();
    if usable.len() < 2 {
        return Ok(OrderFit::Suppressed { points });
    }
    Ok(OrderFit::Fitted { order: log_log_slope(&usable), points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactnessCase {
    pub deflections: MirrorDeflections,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExactnessStatus {
    Checked { numeric: f64, analytic: f64, relative_discrepancy: f64 },
    OutsideDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub entries: Vec<ExactnessStatus>,
    pub checked: usize,
    pub excluded: usize,
    pub max_relative_discrepancy: f64,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.max_relative_discrepancy <= RECT_EXACTNESS_TOLERANCE
    }
}

/// Whether every beam stays within half its height of the axis (and every single
/// deflection within the hard bound).
pub fn in_exactness_domain(profile: &BeamProfile, d: &MirrorDeflections) -> bool {
    let half = 0.5 * profile.width_y();
    check_deflections(profile, d).is_ok() && d.path_shifts().iter().all(|s| s.abs() <= half)
}

/// Compares the nonlinear detector output with the linear formula for a
/// rectangular profile. Cases outside the exactness domain are reported, not failed.
pub fn rect_exactness(profile: &BeamProfile, grid: &Grid, cases: &[ExactnessCase]) -> Result<ExactnessReport> {
    if profile.kind() != ProfileKind::Rectangular {
        return Err(Error::InvalidInput("exactness holds for the rectangular profile only".into()));
    }
    let line_int = line_integral_f2(profile);
    let mut entries = Vec::with_capacity(cases.len());
    let mut worst: f64 = 0.0;
    for case in cases {
        if !in_exactness_domain(profile, &case.deflections) {
            entries.push(ExactnessStatus::OutsideDomain);
            continue;
        }
        let numeric = qcd_difference(&compose_field(profile, grid, &case.deflections, &case.scenario)?).d;
        let analytic = linearized_signal(&case.deflections, &case.scenario, line_int);
        let largest = case.deflections.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let reference = signal_scale(&case.scenario, line_int)
            * curly_bracket(&case.deflections, &case.scenario).abs().max(largest)
            + f64::MIN_POSITIVE;
        let rel = (numeric - analytic).abs() / reference;
        worst = worst.max(rel);
        entries.push(ExactnessStatus::Checked { numeric, analytic, relative_discrepancy: rel });
    }
    let excluded = entries.iter().filter(|e| matches!(e, ExactnessStatus::OutsideDomain)).count();
    Ok(ExactnessReport { checked: entries.len() - excluded, excluded, entries, max_relative_discrepancy: worst })
}

/// Deterministic deflection sets × every tuning/blocking combination, including a
/// few deliberately outside the exactness domain.
pub fn default_exactness_cases(height: f64) -> Vec<ExactnessCase> {
    let mut sets = vec![
        MirrorDeflections::only(Mirror::C, 0.1),
        MirrorDeflections { a: 0.05, f: 0.05, ..MirrorDeflections::zero() },
        MirrorDeflections { c: 0.12, e: 0.07, a: -0.15, b: 0.2, f: 0.1 },
        MirrorDeflections { c: -0.45, e: 0.2, a: 0.25, b: -0.3, f: 0.04 },
        MirrorDeflections::only(Mirror::E, 0.3),
        MirrorDeflections::only(Mirror::A, 0.6),
        MirrorDeflections { e: 0.2, a: 0.2, f: 0.2, ..MirrorDeflections::zero() },
    ];
    // Small linear congruential sequence for extra in-domain sets.
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    let mut next = || {
        state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for _ in 0..12 {
        sets.push(PerMirror::from_fn(|_| 0.16 * next()));
    }
    let tunings = [Tuning::Constructive, Tuning::DestructiveInner, Tuning::custom(PhaseConfig::new(0.4, 2.1, -0.7))];
    let blockings = [Blocking::None, Blocking::AfterMirrorF, Blocking::CArm];
    let mut cases = Vec::new();
    for tuning in tunings {
        for blocking in blockings {
            for d in &sets {
                cases.push(ExactnessCase {
                    deflections: d.scaled(height),
                    scenario: Scenario { tuning, blocking, source_intensity: 1.0 },
                });
            }
        }
    }
    cases
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::Lt => measured < threshold,
            Relation::Le => measured <= threshold,
            Relation::Gt => measured > threshold,
            Relation::Ge => measured >= threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(label: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Check {
        Check { label: label.into(), measured, relation, threshold, passed: relation.holds(measured, threshold), note: None }
    }

    /// A check whose outcome is decided elsewhere (e.g. a suppressed fit).
    pub fn with_outcome(mut self, passed: bool, note: impl Into<String>) -> Check {
        self.passed = passed;
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: String,
    /// The checks are supposed to fail; the criterion passes when at least one does.
    pub expected_fail: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Criterion {
    fn new(id: u8, title: &str, checks: Vec<Check>) -> Criterion {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Criterion { id, title: title.into(), expected_fail: false, checks, passed }
    }

    fn expected_fail(id: u8, title: &str, checks: Vec<Check>) -> Criterion {
        let passed = checks.iter().any(|c| !c.passed);
        Criterion { id, title: title.into(), expected_fail: true, checks, passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceReport {
    pub criteria: Vec<Criterion>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, id: u8) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

impl fmt::Display for AcceptanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.criteria {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let tag = if c.expected_fail { " [expected-fail control]" } else { "" };
            writeln!(f, "{verdict} {:>2}  {}{tag}", c.id, c.title)?;
            for k in &c.checks {
                let mark = if k.passed { "ok  " } else { "FAIL" };
                write!(f, "        {mark} {}: {:.6e} {} {:.3e}", k.label, k.measured, k.relation.symbol(), k.threshold)?;
                if let Some(note) = &k.note {
                    write!(f, " ({note})")?;
                }
                writeln!(f)?;
            }
        }
        let verdict = if self.all_passed() { "ALL CRITERIA PASS" } else { "SOME CRITERIA FAIL" };
        writeln!(f, "{verdict}")
    }
}

/// Relative spread `max/min - 1` of the given peak powers.
fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo - 1.0
    } else {
        f64::INFINITY
    }
}

fn ratio_error(measured: f64, target: f64) -> f64 {
    (measured / target - 1.0).abs()
}

/// Preset-based run with an optional profile override.
fn preset_run(name: &str, profile: Option<BeamProfile>, exec: Execution) -> Result<RunOutcome> {
    let mut cfg = RunConfig::preset(name).expect("known preset");
    if let Some(p) = profile {
        cfg.profile = p;
    }
    cfg.run(exec)
}

/// Largest deviation of measured from predicted peak powers, relative to the larger
/// of the prediction and the power a unit-coefficient tone would have.
pub fn oracle_deviation(cfg: &RunConfig, outcome: &RunOutcome) -> f64 {
    let scale = signal_scale(&cfg.scenario, outcome.line_integral);
    Mirror::ALL
        .iter()
        .map(|&m| {
            let unit = 0.5 * (scale * cfg.vibration.tones[m].amplitude).powi(2);
            (outcome.peak(m) - outcome.predicted[m]).abs() / outcome.predicted[m].max(unit)
        })
        .fold(0.0, f64::max)
}

fn suppression_checks(label: &str, out: &RunOutcome, bound: f64) -> Vec<Check> {
    [Mirror::E, Mirror::F]
        .iter()
        .map(|&m| Check::new(format!("{label}: {m}/A peak power"), out.peak(m) / out.peak(Mirror::A), Relation::Lt, bound))
        .collect()
}

/// Runs every acceptance criterion.
pub fn run_acceptance_matrix(exec: Execution) -> Result<AcceptanceReport> {
    let gauss = RunConfig::preset("constructive").expect("preset").profile;
    let rect = BeamProfile::rectangular(1.0, 1.0)?;
    let asym = BeamProfile::asymmetric_test(gauss.width_x(), gauss.width_y(), 0.3)?;
    let mut criteria = Vec::new();

    // 1
    let cons_g = preset_run("constructive", None, exec)?;
    let p = &cons_g.spectrum.peak_power;
    criteria.push(Criterion::new(
        1,
        "constructive: E and F peaks are 4x the A peak, A/B/C equal",
        vec![
            Check::new("E/A ratio relative error vs 4", ratio_error(p.e / p.a, 4.0), Relation::Le, 0.01),
            Check::new("F/A ratio relative error vs 4", ratio_error(p.f / p.a, 4.0), Relation::Le, 0.01),
            Check::new("A/B/C spread", spread(&[p.a, p.b, p.c]), Relation::Le, 0.01),
        ],
    ));

    // 2
    let des_g = preset_run("destructive", None, exec)?;
    let des_r = preset_run("destructive", Some(rect), exec)?;
    let mut checks = Vec::new();
    for (label, out, bound) in [("gaussian", &des_g, 1e-6), ("rectangular", &des_r, 1e-10)] {
        let p = &out.spectrum.peak_power;
        checks.push(Check::new(format!("{label}: A/B/C spread"), spread(&[p.a, p.b, p.c]), Relation::Le, 0.01));
        checks.extend(suppression_checks(label, out, bound));
    }
    criteria.push(Criterion::new(2, "destructive: A, B, C equal; E and F absent", checks));

    // 3
    let mut checks = Vec::new();
    let mut after_f = Vec::new();
    for (label, profile) in [("gaussian", None), ("rectangular", Some(rect))] {
        let out = preset_run("block-after-f", profile, exec)?;
        let floor = DETECTION_FACTOR * out.spectrum.noise_floor;
        for m in Mirror::ALL {
            let rel = if m == Mirror::C { Relation::Gt } else { Relation::Le };
            checks.push(Check::new(format!("{label}: {m} peak power vs 10x floor"), out.peak(m), rel, floor));
        }
        after_f.push(out);
    }
    criteria.push(Criterion::new(3, "blocked behind F: only the C peak is present", checks));

    // 4
    let c_arm_r = preset_run("block-c-arm", Some(rect), exec)?;
    let c_arm_g = preset_run("block-c-arm", None, exec)?;
    let floor = DETECTION_FACTOR * c_arm_r.spectrum.noise_floor;
    let intensity = RunConfig::preset("block-c-arm").expect("preset").scenario.source_intensity;
    let mut checks: Vec<Check> = Mirror::ALL
        .iter()
        .map(|&m| Check::new(format!("rectangular: {m} peak power vs 10x floor"), c_arm_r.peak(m), Relation::Le, floor))
        .collect();
    checks.push(Check::new("rectangular: AC power / I0", c_arm_r.spectrum.ac_power() / intensity, Relation::Lt, 1e-10));
    let largest = Mirror::ALL.iter().map(|&m| c_arm_g.peak(m)).fold(0.0, f64::max);
    checks.push(Check::new(
        "gaussian: largest peak / destructive A peak",
        largest / des_g.peak(Mirror::A),
        Relation::Lt,
        1e-6,
    ));
    criteria.push(Criterion::new(4, "C arm blocked, destructive: no peaks", checks));

    // 5
    let grid = RunConfig::preset("destructive").expect("preset").grid;
    let report = rect_exactness(&rect, &grid, &default_exactness_cases(rect.width_y()))?;
    let mut check = Check::new("max relative discrepancy", report.max_relative_discrepancy, Relation::Le, RECT_EXACTNESS_TOLERANCE);
    check.note = Some(format!("{} sets checked, {} outside the domain", report.checked, report.excluded));
    criteria.push(Criterion::new(5, "rectangular profile: linear formula is exact", vec![check]));

    // 6
    let mut checks = Vec::new();
    for (label, profile, min) in [("gaussian", gauss, 2.8), ("asymmetric skew 0.3", asym, 1.8)] {
        for (what, blocking, mirror) in
            [("F peak, destructive", Blocking::None, Mirror::F), ("A peak, destructive + C arm blocked", Blocking::CArm, Mirror::A)]
        {
            let mut cfg = RunConfig::preset("destructive").expect("preset");
            cfg.profile = profile;
            cfg.scenario.blocking = blocking;
            let fit = order_fit(&cfg, OrderQuantity::PeakAmplitude(mirror), &DEFAULT_ORDER_SCALES, exec)?;
            let name = format!("{label}: {what} order");
            checks.push(match fit.order() {
                Some(o) => Check::new(name, o, Relation::Ge, min),
                None => Check::new(name, f64::INFINITY, Relation::Ge, min)
                    .with_outcome(true, "suppressed below measurable order"),
            });
        }
    }
    criteria.push(Criterion::new(6, "suppressed signals are higher order in the deflection", checks));

    // 7
    let mut checks = Vec::new();
    let sc = Scenario::destructive().with_blocking(Blocking::CArm);
    for profile in [gauss, rect, asym] {
        let scale = sc.source_intensity.sqrt() / 3.0 * profile.norm_constant() * profile.y_factor_peak();
        let mut worst: f64 = 0.0;
        for rel in [1e-3, 0.05, 0.2] {
            let d = MirrorDeflections::only(Mirror::E, rel * profile.width_y());
            worst = worst.max(compose_field(&profile, &grid, &d, &sc)?.max_abs() / scale);
        }
        checks.push(Check::new(format!("{:?}: max |E| / single-beam peak", profile.kind()), worst, Relation::Le, 4.0 * f64::EPSILON));
    }
    criteria.push(Criterion::new(7, "mirror E alone leaves the field exactly dark", checks));

    // 8
    let mut checks = Vec::new();
    let runs: [(&str, &str, &RunOutcome); 4] = [
        ("constructive", "gaussian", &cons_g),
        ("destructive", "gaussian", &des_g),
        ("destructive", "rectangular", &des_r),
        ("block-c-arm", "rectangular", &c_arm_r),
    ];
    for (preset, label, out) in runs {
        let mut cfg = RunConfig::preset(preset).expect("preset");
        if label == "rectangular" {
            cfg.profile = rect;
        }
        checks.push(Check::new(format!("{preset}/{label}: peak deviation"), oracle_deviation(&cfg, out), Relation::Le, 0.01));
    }
    for (out, label) in after_f.iter().zip(["gaussian", "rectangular"]) {
        let mut cfg = RunConfig::preset("block-after-f").expect("preset");
        if label == "rectangular" {
            cfg.profile = rect;
        }
        checks.push(Check::new(format!("block-after-f/{label}: peak deviation"), oracle_deviation(&cfg, out), Relation::Le, 0.01));
    }
    for (preset, profile) in [("constructive", rect), ("block-c-arm", gauss)] {
        let mut cfg = RunConfig::preset(preset).expect("preset");
        cfg.profile = profile;
        let out = cfg.run(exec)?;
        let label = if profile.kind() == ProfileKind::Rectangular { "rectangular" } else { "gaussian" };
        checks.push(Check::new(format!("{preset}/{label}: peak deviation"), oracle_deviation(&cfg, &out), Relation::Le, 0.01));
    }
    criteria.push(Criterion::new(8, "nonlinear peaks agree with the linear prediction", checks));

    // 9
    let mut cfg = RunConfig::preset("destructive").expect("preset");
    cfg.scenario.tuning = Tuning::custom(PhaseConfig::new(0.0, std::f64::consts::PI + 0.1, 0.0));
    let detuned = cfg.run(exec)?;
    criteria.push(Criterion::expected_fail(
        9,
        "negative control: phi_B = pi + 0.1 must fail the E/F suppression check",
        suppression_checks("mis-tuned gaussian", &detuned, 1e-6),
    ));

    Ok(AcceptanceReport { criteria })
}
