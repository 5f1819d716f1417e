//! First-order (linearized) difference signal.
//!
//! Expanding `f(x, y - δ) ≈ f(x, y) - δ ∂_y f` in the field and integrating over the
//! two detector halves gives, with `φ_ij = φ_i - φ_j`,
//!
//! ```text
//! D = (2/9)·I₀·{ δC + [δA + δB + 2(δE + δF)]·[1 + cos φAB]
//!              + [δA + δC + δE + δF]·cos φAC
//!              + [δB + δC + δE + δF]·cos φBC } · ∫ f²(x, 0) dx
//! ```
//!
//! The first line is the self-interference of every beam with its own shifted copy;
//! the cosine lines are the C beam interfering with the A and B beams. Blocking the
//! beam behind F leaves `{δC}`; blocking the C arm leaves only the `[1 + cos φAB]`
//! term. For an asymmetric profile the signal also carries a constant offset, which
//! is not modelled here.

use crate::dynamics::VibrationSet;
use crate::interferometer::{Blocking, Mirror, MirrorDeflections, PerMirror, Scenario};

/// `(2/9)·I₀·∫f²(x,0)dx`, the factor in front of the bracket.
pub fn signal_scale(scenario: &Scenario, line_int: f64) -> f64 {
    2.0 / 9.0 * scenario.source_intensity * line_int
}

/// The scenario's curly-bracket combination of deflections and phase cosines.
pub fn curly_bracket(deflections: &MirrorDeflections, scenario: &Scenario) -> f64 {
    let d = deflections;
    let ph = scenario.phases();
    let self_term = (d.a + d.b + 2.0 * (d.e + d.f)) * (1.0 + ph.phi_ab().cos());
    match scenario.blocking {
        Blocking::AfterMirrorF => d.c,
        Blocking::CArm => self_term,
        Blocking::None => {
            d.c + self_term
                + (d.a + d.c + d.e + d.f) * ph.phi_ac().cos()
                + (d.b + d.c + d.e + d.f) * ph.phi_bc().cos()
        }
    }
}

/// Linearized `D` for the given instantaneous deflections.
pub fn linearized_signal(deflections: &MirrorDeflections, scenario: &Scenario, line_int: f64) -> f64 {
    signal_scale(scenario, line_int) * curly_bracket(deflections, scenario)
}

/// Coefficient of each δ in the curly bracket (the bracket is linear, so
/// `bracket = Σ coefficient_i · δ_i`).
pub fn mirror_coefficients(scenario: &Scenario) -> PerMirror<f64> {
    let ph = scenario.phases();
    let inner = 1.0 + ph.phi_ab().cos();
    let (cac, cbc) = (ph.phi_ac().cos(), ph.phi_bc().cos());
    match scenario.blocking {
        Blocking::AfterMirrorF => PerMirror::only(Mirror::C, 1.0),
        Blocking::CArm => PerMirror { c: 0.0, e: 2.0 * inner, a: inner, b: inner, f: 2.0 * inner },
        Blocking::None => PerMirror {
            c: 1.0 + cac + cbc,
            e: 2.0 * inner + cac + cbc,
            a: inner + cac,
            b: inner + cbc,
            f: 2.0 * inner + cac + cbc,
        },
    }
}

/// Predicted spectral peak power of each mirror's tone.
///
/// A tone `A·sin(2πft + θ)` has peak power `A²/2` under the single-sided convention
/// of [`crate::spectrum`] (bin powers sum to the mean square of the series). Here
/// `A = (2/9)·I₀·c_i·a_i·∫f²(x,0)dx` with `c_i` from [`mirror_coefficients`].
pub fn predicted_peak_powers(vibration: &VibrationSet, scenario: &Scenario, line_int: f64) -> PerMirror<f64> {
    let scale = signal_scale(scenario, line_int);
    let coeff = mirror_coefficients(scenario);
    PerMirror::from_fn(|m| {
        let amp = scale * coeff[m] * vibration.tones[m].amplitude;
        0.5 * amp * amp
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{PhaseConfig, Tuning};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn uniform(v: f64) -> MirrorDeflections {
        PerMirror::from_fn(|_| v)
    }

    #[test]
    fn constructive_equal_deflections() {
        let s = linearized_signal(&uniform(0.1), &Scenario::constructive(), 1.0);
        assert!((s - 14.0 * 0.1 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn destructive_reduces_to_a_minus_b_plus_c() {
        let sc = Scenario::destructive();
        let d = MirrorDeflections { c: 0.0, e: 0.0, a: 0.2, b: 0.2, f: 0.0 };
        assert_eq!(linearized_signal(&d, &sc, 1.0), 0.0);
        assert_eq!(linearized_signal(&MirrorDeflections::only(Mirror::E, 0.3), &sc, 1.0), 0.0);
        assert_eq!(linearized_signal(&MirrorDeflections::only(Mirror::F, 0.3), &sc, 1.0), 0.0);
        let d = MirrorDeflections { c: 0.5, e: 0.7, a: 0.2, b: 0.1, f: -0.3 };
        assert!((curly_bracket(&d, &sc) - (0.2 - 0.1 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn blocked_brackets() {
        let d = MirrorDeflections { c: 0.3, e: 1.0, a: 1.0, b: 1.0, f: 1.0 };
        assert_eq!(curly_bracket(&d, &Scenario::constructive().with_blocking(Blocking::AfterMirrorF)), 0.3);
        assert_eq!(curly_bracket(&d, &Scenario::constructive().with_blocking(Blocking::CArm)), 12.0);
        assert_eq!(curly_bracket(&d, &Scenario::destructive().with_blocking(Blocking::CArm)), 0.0);
    }

    #[test]
    fn four_to_one_power_ratio() {
        let vib = VibrationSet::default_for(1.0);
        let p = predicted_peak_powers(&vib, &Scenario::constructive(), 0.8);
        assert!((p.e / p.a - 4.0).abs() < 1e-12 && (p.f / p.a - 4.0).abs() < 1e-12);
        assert!((p.c / p.a - 1.0).abs() < 1e-12 && (p.b / p.a - 1.0).abs() < 1e-12);

        let p = predicted_peak_powers(&vib, &Scenario::destructive(), 0.8);
        assert_eq!(p.e, 0.0);
        assert_eq!(p.f, 0.0);
        assert!((p.b / p.a - 1.0).abs() < 1e-12 && (p.c / p.a - 1.0).abs() < 1e-12);

        let p = predicted_peak_powers(&vib, &Scenario::constructive().with_blocking(Blocking::AfterMirrorF), 0.8);
        assert!(p.c > 0.0 && p.e == 0.0 && p.a == 0.0 && p.b == 0.0 && p.f == 0.0);
    }

    fn deflections() -> impl Strategy<Value = MirrorDeflections> {
        prop::array::uniform5(-1.0..1.0f64).prop_map(|v| MirrorDeflections { c: v[0], e: v[1], a: v[2], b: v[3], f: v[4] })
    }

    fn scenario() -> impl Strategy<Value = Scenario> {
        (-PI..PI, -PI..PI, -PI..PI, 0usize..3).prop_map(|(a, b, c, k)| {
            let blocking = [Blocking::None, Blocking::AfterMirrorF, Blocking::CArm][k];
            Scenario::new(Tuning::custom(PhaseConfig::new(a, b, c)), blocking, 1.5).unwrap()
        })
    }

    proptest! {
        #[test]
        fn linear_in_deflections(d1 in deflections(), d2 in deflections(), k in -3.0..3.0f64, sc in scenario()) {
            let sum = PerMirror::from_fn(|m| d1[m] + k * d2[m]);
            let lhs = linearized_signal(&sum, &sc, 0.7);
            let rhs = linearized_signal(&d1, &sc, 0.7) + k * linearized_signal(&d2, &sc, 0.7);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn coefficients_reproduce_bracket(d in deflections(), sc in scenario()) {
            let c = mirror_coefficients(&sc);
            let via: f64 = Mirror::ALL.iter().map(|&m| c[m] * d[m]).sum();
            prop_assert!((via - curly_bracket(&d, &sc)).abs() <= 1e-12);
        }

        #[test]
        fn constructive_reduction(d in deflections()) {
            let lhs = curly_bracket(&d, &Scenario::constructive());
            let rhs = 3.0 * (d.a + d.b + d.c + 2.0 * (d.e + d.f));
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn blocked_brackets_plus_cross_terms(d in deflections(), sc in scenario()) {
            let ph = sc.phases();
            let cross = (d.a + d.c + d.e + d.f) * ph.phi_ac().cos() + (d.b + d.c + d.e + d.f) * ph.phi_bc().cos();
            let parts = curly_bracket(&d, &sc.with_blocking(Blocking::AfterMirrorF))
                + curly_bracket(&d, &sc.with_blocking(Blocking::CArm))
                + cross;
            prop_assert!((parts - curly_bracket(&d, &sc.with_blocking(Blocking::None))).abs() <= 1e-12);
        }
    }
}
