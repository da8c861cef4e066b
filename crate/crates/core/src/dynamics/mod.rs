//! Two-mode junction dynamics.
//!
//! Energies are measured in the junction energy unit (so `ej1 = Ej1_bar`),
//! charge in units of `Q0/2` and flux in units of `Phi0/(2 pi)`. With these
//! choices the charge equals the imbalance `n` and the flux equals the
//! phase difference `phi`, and time is scaled so that Hamilton's equations
//! carry no prefactors:
//!
//! ```text
//! H = dV Q + e_c Q^2 - ej1 sqrt(1 - Q^2) cos Phi - 2 ej2 (1 - Q^2) cos^2 Phi
//! ```
//!
//! `dV` is the voltage drop produced by the external field.

mod ground;
mod integrate;
mod qubit;

pub use ground::{
    classify_ground_state, grid_minimum, reduced_hamiltonian, GroundKind, GroundState,
    LandscapeMinimum,
};
pub use integrate::{integrate, Form, IntegrationSpec, Sample, Trajectory};
pub use qubit::{qubit_expansion, QubitCoefficients};

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::junction::JunctionParams;
use crate::{Error, Result};

/// Default distance from `|n| = 1` at which the Madelung form is rejected.
pub const MADELUNG_EPS: f64 = 1e-9;

/// Smallest mode amplitude for which a phase is defined.
pub const MIN_AMPLITUDE: f64 = 1e-12;

/// Coefficients of the two-mode Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeParams {
    pub ej1: f64,
    pub ej2: f64,
    /// Charging energy `e_c` multiplying `Q^2`.
    pub charging: f64,
}

impl TwoModeParams {
    pub fn new(ej1: f64, ej2: f64, charging: f64) -> Result<Self> {
        if !(ej1.is_finite() && ej2.is_finite() && charging.is_finite()) {
            return Err(Error::Config("two-mode coefficients must be finite".into()));
        }
        if charging < 0.0 {
            return Err(Error::Config(format!(
                "charging energy must be non-negative, got {charging}"
            )));
        }
        Ok(TwoModeParams { ej1, ej2, charging })
    }

    /// Takes the Josephson energies from `params`; the charging energy is
    /// `norm^2 / (16 C_J)` for finite islands and zero otherwise.
    pub fn from_junction(params: &JunctionParams) -> Self {
        let charging = match (params.norm_bar, params.c_j_bar) {
            (Some(norm), Some(c)) if c > 0.0 => norm * norm / (16.0 * c),
            _ => 0.0,
        };
        TwoModeParams {
            ej1: params.ej1_bar,
            ej2: params.ej2_bar,
            charging,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveKind {
    Constant {
        v_ext_prime: f64,
    },
    /// `amplitude * sin(2 pi frequency t + phase)`.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
}

/// External field and the dipole length converting it to a voltage drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub kind: DriveKind,
    pub dipole: f64,
}

impl DriveSpec {
    pub fn none() -> Self {
        DriveSpec {
            kind: DriveKind::Constant { v_ext_prime: 0.0 },
            dipole: 0.0,
        }
    }

    /// Drive producing the constant voltage drop `dv`.
    pub fn constant_voltage(dv: f64) -> Self {
        DriveSpec {
            kind: DriveKind::Constant { v_ext_prime: -dv },
            dipole: 1.0,
        }
    }

    pub fn v_ext_prime(&self, t: f64) -> f64 {
        match self.kind {
            DriveKind::Constant { v_ext_prime } => v_ext_prime,
            DriveKind::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => amplitude * (2.0 * PI * frequency * t + phase).sin(),
        }
    }

    /// Voltage drop `dV = -d V'_ext`.
    pub fn voltage(&self, t: f64) -> f64 {
        -self.dipole * self.v_ext_prime(t)
    }
}

/// Mode amplitudes of the right- and left-localised states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeState {
    pub amp_r: Complex64,
    pub amp_l: Complex64,
    pub time: f64,
}

impl TwoModeState {
    pub fn norm(&self) -> f64 {
        self.amp_r.norm_sqr() + self.amp_l.norm_sqr()
    }

    /// `n = |a_L|^2 - |a_R|^2`.
    pub fn imbalance(&self) -> f64 {
        self.amp_l.norm_sqr() - self.amp_r.norm_sqr()
    }

    /// `2 Re(a_L* a_R)`, equal to `sqrt(1 - n^2) cos(phi)` for normalised states.
    pub fn coherence(&self) -> f64 {
        2.0 * (self.amp_l.conj() * self.amp_r).re
    }

    pub fn from_madelung(state: &MadelungState, time: f64) -> Self {
        let half = 0.5 * state.phi;
        TwoModeState {
            amp_r: Complex64::from_polar(((1.0 - state.n) / 2.0).max(0.0).sqrt(), half),
            amp_l: Complex64::from_polar(((1.0 + state.n) / 2.0).max(0.0).sqrt(), -half),
            time,
        }
    }

    /// Fails when either amplitude is too small for its phase to be defined.
    pub fn to_madelung(&self) -> Result<MadelungState> {
        let (r, l) = (self.amp_r.norm(), self.amp_l.norm());
        if r < MIN_AMPLITUDE || l < MIN_AMPLITUDE {
            return Err(Error::Singularity(format!(
                "mode amplitude vanished (|a_R| = {r:e}, |a_L| = {l:e})"
            )));
        }
        Ok(MadelungState {
            n: self.imbalance(),
            phi: wrap_angle(self.amp_r.arg() - self.amp_l.arg()),
        })
    }

    /// Equal weights, zero phase difference.
    pub fn symmetric() -> Self {
        TwoModeState {
            amp_r: Complex64::new(FRAC_1_SQRT_2, 0.0),
            amp_l: Complex64::new(FRAC_1_SQRT_2, 0.0),
            time: 0.0,
        }
    }
}

/// Imbalance and phase difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MadelungState {
    pub n: f64,
    pub phi: f64,
}

impl MadelungState {
    pub fn new(n: f64, phi: f64) -> Result<Self> {
        if !(n.is_finite() && phi.is_finite()) || n.abs() > 1.0 {
            return Err(Error::Config(format!(
                "Madelung state needs |n| <= 1 and finite phi, got n = {n}, phi = {phi}"
            )));
        }
        Ok(MadelungState { n, phi })
    }
}

/// Charge in units of `Q0/2` and flux in units of `Phi0/(2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeFluxState {
    pub q: f64,
    pub phi: f64,
}

impl From<MadelungState> for ChargeFluxState {
    fn from(s: MadelungState) -> Self {
        ChargeFluxState { q: s.n, phi: s.phi }
    }
}

impl From<ChargeFluxState> for MadelungState {
    fn from(s: ChargeFluxState) -> Self {
        MadelungState { n: s.q, phi: s.phi }
    }
}

/// Maps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn coupling(params: &TwoModeParams, coherence: f64) -> f64 {
    -0.5 * params.ej1 - 2.0 * params.ej2 * coherence
}

/// `d/dt (a_R, a_L)` for `i d/dt a = [[U, K], [K, -U]] a`.
pub fn two_mode_rhs(
    state: &TwoModeState,
    params: &TwoModeParams,
    drive: &DriveSpec,
) -> (Complex64, Complex64) {
    let k = coupling(params, state.coherence());
    let u = -0.5 * drive.voltage(state.time) - params.charging * state.imbalance();
    let minus_i = Complex64::new(0.0, -1.0);
    (
        minus_i * (u * state.amp_r + k * state.amp_l),
        minus_i * (k * state.amp_r - u * state.amp_l),
    )
}

fn check_interior(n: f64, eps: f64) -> Result<f64> {
    let s2 = 1.0 - n * n;
    if !n.is_finite() || n.abs() > 1.0 - eps {
        return Err(Error::Singularity(format!(
            "imbalance {n} within {eps:e} of |n| = 1"
        )));
    }
    Ok(s2.sqrt())
}

/// `(dn/dt, dphi/dt)`; fails within `eps` of `|n| = 1`.
pub fn madelung_rhs(
    state: &MadelungState,
    params: &TwoModeParams,
    drive: &DriveSpec,
    t: f64,
    eps: f64,
) -> Result<(f64, f64)> {
    let s = check_interior(state.n, eps)?;
    let (sin, cos) = state.phi.sin_cos();
    let k = coupling(params, s * cos);
    let u = -0.5 * drive.voltage(t) - params.charging * state.n;
    Ok((2.0 * k * s * sin, -2.0 * u - 2.0 * k * state.n * cos / s))
}

/// Hamilton's equations `(dQ/dt, dPhi/dt) = (-dH/dPhi, dH/dQ)`.
pub fn charge_flux_rhs(
    state: &ChargeFluxState,
    params: &TwoModeParams,
    drive: &DriveSpec,
    t: f64,
    eps: f64,
) -> Result<(f64, f64)> {
    let s = check_interior(state.q, eps)?;
    let (sin, cos) = state.phi.sin_cos();
    let TwoModeParams { ej1, ej2, charging } = *params;
    let s2 = s * s;
    let q_dot = -ej1 * s * sin - 4.0 * ej2 * s2 * sin * cos;
    let phi_dot = drive.voltage(t)
        + 2.0 * charging * state.q
        + ej1 * state.q * cos / s
        + 4.0 * ej2 * state.q * cos * cos;
    Ok((q_dot, phi_dot))
}

fn energy_from(q: f64, coherence: f64, params: &TwoModeParams, dv: f64) -> f64 {
    dv * q + params.charging * q * q
        - params.ej1 * coherence
        - 2.0 * params.ej2 * coherence * coherence
}

pub fn hamiltonian_energy(
    state: &ChargeFluxState,
    params: &TwoModeParams,
    drive: &DriveSpec,
    t: f64,
) -> f64 {
    let s = (1.0 - state.q * state.q).max(0.0).sqrt();
    energy_from(state.q, s * state.phi.cos(), params, drive.voltage(t))
}

/// Energy of mode amplitudes, regular through `|n| = 1`.
pub fn two_mode_energy(state: &TwoModeState, params: &TwoModeParams, drive: &DriveSpec) -> f64 {
    energy_from(
        state.imbalance(),
        state.coherence(),
        params,
        drive.voltage(state.time),
    )
}

/// Current-phase relation `ej1 sin(phi) + 2 ej2 sin(2 phi)`.
pub fn cpr_current(phi: f64, ej1: f64, ej2: f64) -> f64 {
    ej1 * phi.sin() + 2.0 * ej2 * (2.0 * phi).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    const P: TwoModeParams = TwoModeParams {
        ej1: 0.8,
        ej2: -0.15,
        charging: 0.6,
    };

    #[test]
    fn symmetric_state_is_stationary_for_pure_tunnelling() {
        let params = TwoModeParams::new(1.0, 0.0, 0.0).unwrap();
        let s = TwoModeState::symmetric();
        let (dr, dl) = two_mode_rhs(&s, &params, &DriveSpec::none());
        // both amplitudes rotate by the same phase
        let ratio_r = dr / s.amp_r;
        let ratio_l = dl / s.amp_l;
        assert!((ratio_r - ratio_l).norm() < 1e-15);
        assert!(ratio_r.re.abs() < 1e-15);
    }

    #[test]
    fn balanced_state_has_no_charging_term() {
        let s = TwoModeState::symmetric();
        let no_charge = TwoModeParams { charging: 0.0, ..P };
        let a = two_mode_rhs(&s, &P, &DriveSpec::none());
        let b = two_mode_rhs(&s, &no_charge, &DriveSpec::none());
        assert!((a.0 - b.0).norm() < 1e-15 && (a.1 - b.1).norm() < 1e-15);
    }

    #[test]
    fn madelung_examples() {
        let drive = DriveSpec::constant_voltage(0.3);
        let (n_dot, phi_dot) = madelung_rhs(
            &MadelungState::new(0.0, 0.0).unwrap(),
            &P,
            &drive,
            0.0,
            MADELUNG_EPS,
        )
        .unwrap();
        assert_eq!(n_dot, 0.0);
        // -2 U0 - 2 K n cos / s with n = 0
        assert!((phi_dot - 0.3).abs() < 1e-15);

        let (n_dot, phi_dot) = madelung_rhs(
            &MadelungState::new(0.0, FRAC_PI_2).unwrap(),
            &P,
            &DriveSpec::none(),
            0.0,
            MADELUNG_EPS,
        )
        .unwrap();
        assert!((n_dot + P.ej1).abs() < 1e-15);
        assert_eq!(phi_dot, 0.0);
    }

    #[test]
    fn madelung_singularity() {
        let s = MadelungState::new(1.0 - 1e-12, 0.3).unwrap();
        assert!(matches!(
            madelung_rhs(&s, &P, &DriveSpec::none(), 0.0, MADELUNG_EPS),
            Err(Error::Singularity(_))
        ));
        assert!(MadelungState::new(1.5, 0.0).is_err());
    }

    #[test]
    fn vanishing_amplitude_has_no_phase() {
        let s = TwoModeState {
            amp_r: Complex64::new(0.0, 0.0),
            amp_l: Complex64::new(1.0, 0.0),
            time: 0.0,
        };
        assert!(matches!(s.to_madelung(), Err(Error::Singularity(_))));
    }

    #[test]
    fn hamiltonian_examples() {
        let none = DriveSpec::none();
        let e = hamiltonian_energy(&ChargeFluxState { q: 0.0, phi: 0.0 }, &P, &none, 0.0);
        assert!((e - (-P.ej1 - 2.0 * P.ej2)).abs() < 1e-15);
        let e = hamiltonian_energy(
            &ChargeFluxState {
                q: 0.0,
                phi: FRAC_PI_2,
            },
            &P,
            &none,
            0.0,
        );
        assert!(e.abs() < 1e-15);
    }

    #[test]
    fn cpr_examples() {
        assert_eq!(cpr_current(0.0, 1.0, -0.2), 0.0);
        assert!((cpr_current(FRAC_PI_2, 0.7, -0.2) - 0.7).abs() < 1e-15);
        let (ej1, ej2) = (0.9, -0.17);
        let ic2 = 2.0 * ej2;
        for k in 0..50 {
            let phi = -3.0 + 0.13 * k as f64;
            let lhs = cpr_current(PI - phi, ej1, ej2);
            let rhs = cpr_current(phi, ej1, ej2) - 2.0 * ic2 * (2.0 * phi).sin();
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn sinusoidal_drive() {
        let d = DriveSpec {
            kind: DriveKind::Sinusoid {
                amplitude: 2.0,
                frequency: 0.25,
                phase: 0.0,
            },
            dipole: 3.0,
        };
        assert!((d.voltage(1.0) + 6.0).abs() < 1e-15);
        assert_eq!(DriveSpec::constant_voltage(0.4).voltage(7.0), 0.4);
    }

    #[test]
    fn charging_from_junction() {
        let mut jp = crate::junction::JunctionParams {
            k1_bar: -1.0,
            k2_bar: 0.4,
            ej1_bar: 1.0,
            ej2_bar: -0.1,
            ej1_dual_bar: 1.0,
            ej2_dual_bar: -0.1,
            eplus_bar: 1.0,
            eminus_bar: 3.0,
            ic1_bar: 1.0,
            ic2_bar: -0.2,
            c_j_bar: Some(0.025),
            d_bar: Some(50.0),
            norm_bar: Some(80.0),
        };
        let p = TwoModeParams::from_junction(&jp);
        assert!((p.charging - 6400.0 / 0.4).abs() < 1e-9);
        jp.c_j_bar = None;
        assert_eq!(TwoModeParams::from_junction(&jp).charging, 0.0);
    }

    fn interior() -> impl Strategy<Value = (f64, f64, f64, f64, f64, f64)> {
        (
            -0.95..0.95f64,
            -PI..PI,
            0.01..2.0f64,
            -2.0..-0.01f64,
            0.0..3.0f64,
            -1.0..1.0f64,
        )
    }

    proptest! {
        #[test]
        fn complex_form_conserves_norm((n, phi, ej1, ej2, ec, dv) in interior()) {
            let params = TwoModeParams::new(ej1, ej2, ec).unwrap();
            let s = TwoModeState::from_madelung(&MadelungState::new(n, phi).unwrap(), 0.0);
            let (dr, dl) = two_mode_rhs(&s, &params, &DriveSpec::constant_voltage(dv));
            let d_norm = 2.0 * (s.amp_r.conj() * dr).re + 2.0 * (s.amp_l.conj() * dl).re;
            prop_assert!(d_norm.abs() < 1e-14);
        }

        #[test]
        fn madelung_round_trip((n, phi, ..) in interior()) {
            let m = MadelungState::new(n, phi).unwrap();
            let back = TwoModeState::from_madelung(&m, 0.0).to_madelung().unwrap();
            prop_assert!((back.n - n).abs() < 1e-14);
            prop_assert!(wrap_angle(back.phi - phi).abs() < 1e-14);
        }

        #[test]
        fn forms_agree_pointwise((n, phi, ej1, ej2, ec, dv) in interior()) {
            let params = TwoModeParams::new(ej1, ej2, ec).unwrap();
            let drive = DriveSpec::constant_voltage(dv);
            let m = MadelungState::new(n, phi).unwrap();
            let (a, b) = madelung_rhs(&m, &params, &drive, 0.0, MADELUNG_EPS).unwrap();
            let (c, d) = charge_flux_rhs(&m.into(), &params, &drive, 0.0, MADELUNG_EPS).unwrap();
            prop_assert!((a - c).abs() <= 1e-12 * (1.0 + a.abs()));
            prop_assert!((b - d).abs() <= 1e-12 * (1.0 + b.abs()));

            // complex form mapped through the Madelung variables
            let s = TwoModeState::from_madelung(&m, 0.0);
            let (dr, dl) = two_mode_rhs(&s, &params, &drive);
            let n_dot = 2.0 * (s.amp_l.conj() * dl).re - 2.0 * (s.amp_r.conj() * dr).re;
            let phi_dot = (dr / s.amp_r).im - (dl / s.amp_l).im;
            prop_assert!((n_dot - a).abs() <= 1e-10 * (1.0 + a.abs()));
            prop_assert!((phi_dot - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }

        #[test]
        fn hamilton_equations_match_gradients((n, phi, ej1, ej2, ec, dv) in interior()) {
            let params = TwoModeParams::new(ej1, ej2, ec).unwrap();
            let drive = DriveSpec::constant_voltage(dv);
            let h = 1e-6;
            let e = |q: f64, p: f64| hamiltonian_energy(&ChargeFluxState { q, phi: p }, &params, &drive, 0.0);
            let de_dq = (e(n + h, phi) - e(n - h, phi)) / (2.0 * h);
            let de_dphi = (e(n, phi + h) - e(n, phi - h)) / (2.0 * h);
            let (q_dot, phi_dot) =
                charge_flux_rhs(&ChargeFluxState { q: n, phi }, &params, &drive, 0.0, MADELUNG_EPS).unwrap();
            prop_assert!((q_dot + de_dphi).abs() <= 1e-6 * (1.0 + q_dot.abs()));
            prop_assert!((phi_dot - de_dq).abs() <= 1e-6 * (1.0 + phi_dot.abs()));
        }

        #[test]
        fn energy_forms_agree((n, phi, ej1, ej2, ec, dv) in interior()) {
            let params = TwoModeParams::new(ej1, ej2, ec).unwrap();
            let drive = DriveSpec::constant_voltage(dv);
            let m = MadelungState::new(n, phi).unwrap();
            let a = hamiltonian_energy(&m.into(), &params, &drive, 0.0);
            let b = two_mode_energy(&TwoModeState::from_madelung(&m, 0.0), &params, &drive);
            prop_assert!((a - b).abs() < 1e-13);
        }
    }
}
