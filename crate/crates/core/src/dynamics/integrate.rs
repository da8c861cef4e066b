use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    charge_flux_rhs, hamiltonian_energy, madelung_rhs, two_mode_energy, two_mode_rhs, wrap_angle,
    ChargeFluxState, DriveSpec, MadelungState, TwoModeParams, TwoModeState, MADELUNG_EPS,
    MIN_AMPLITUDE,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Complex,
    Madelung,
    ChargeFlux,
}

impl std::str::FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(Form::Complex),
            "madelung" => Ok(Form::Madelung),
            "charge_flux" => Ok(Form::ChargeFlux),
            other => Err(Error::Config(format!(
                "unknown form {other:?} (expected complex, madelung or charge_flux)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    pub dt: f64,
    /// Rounded to a whole number of steps.
    pub t_end: f64,
    pub form: Form,
    /// Rescale the complex amplitudes to unit norm after each step.
    pub renormalize: bool,
    /// Madelung and charge/flux forms stop within this distance of `|n| = 1`.
    pub eps: f64,
}

impl IntegrationSpec {
    pub fn new(dt: f64, t_end: f64, form: Form) -> Self {
        IntegrationSpec {
            dt,
            t_end,
            form,
            renormalize: false,
            eps: MADELUNG_EPS,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub n: f64,
    /// Continuous (unwrapped) phase difference.
    pub phi: f64,
    pub energy: f64,
    /// `|a_R|^2 + |a_L|^2`; identically 1 for the real forms.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub form: Form,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn max_norm_drift(&self) -> f64 {
        let first = self.samples.first().map_or(1.0, |s| s.norm);
        self.samples
            .iter()
            .map(|s| (s.norm - first).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|E(t) - E(0)|`, relative to `|E(0)|` when that is nonzero.
    pub fn max_energy_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let scale = if first.energy == 0.0 {
            1.0
        } else {
            first.energy.abs()
        };
        self.samples
            .iter()
            .map(|s| (s.energy - first.energy).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

fn rk4<const N: usize, F>(y: [f64; N], t: f64, dt: f64, f: F) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let shift = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    };
    let k1 = f(t, &y)?;
    let k2 = f(t + 0.5 * dt, &shift(&y, &k1, 0.5 * dt))?;
    let k3 = f(t + 0.5 * dt, &shift(&y, &k2, 0.5 * dt))?;
    let k4 = f(t + dt, &shift(&y, &k3, dt))?;
    let mut out = y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

fn pack(s: &TwoModeState) -> [f64; 4] {
    [s.amp_r.re, s.amp_r.im, s.amp_l.re, s.amp_l.im]
}

fn unpack(y: &[f64; 4], time: f64) -> TwoModeState {
    TwoModeState {
        amp_r: Complex64::new(y[0], y[1]),
        amp_l: Complex64::new(y[2], y[3]),
        time,
    }
}

/// Fixed-step fourth-order Runge–Kutta integration from `initial`,
/// sampled after every step.
pub fn integrate(
    initial: &MadelungState,
    params: &TwoModeParams,
    drive: &DriveSpec,
    spec: &IntegrationSpec,
) -> Result<Trajectory> {
    spec.validate()?;
    let steps = spec.steps();
    let dt = spec.dt;
    let mut samples = Vec::with_capacity(steps + 1);

    match spec.form {
        Form::Complex => {
            let mut y = pack(&TwoModeState::from_madelung(initial, 0.0));
            let mut phi = initial.phi;
            let sample = |y: &[f64; 4], t: f64, phi: &mut f64| {
                let s = unpack(y, t);
                if s.amp_r.norm() >= MIN_AMPLITUDE && s.amp_l.norm() >= MIN_AMPLITUDE {
                    let raw = s.amp_r.arg() - s.amp_l.arg();
                    *phi += wrap_angle(raw - *phi);
                }
                Sample {
                    time: t,
                    n: s.imbalance(),
                    phi: *phi,
                    energy: two_mode_energy(&s, params, drive),
                    norm: s.norm(),
                }
            };
            samples.push(sample(&y, 0.0, &mut phi));
            let rhs = |t: f64, y: &[f64; 4]| {
                let (dr, dl) = two_mode_rhs(&unpack(y, t), params, drive);
                Ok([dr.re, dr.im, dl.re, dl.im])
            };
            for k in 0..steps {
                let t = k as f64 * dt;
                y = rk4(y, t, dt, rhs)?;
                if spec.renormalize {
                    let norm = unpack(&y, 0.0).norm().sqrt();
                    y.iter_mut().for_each(|v| *v /= norm);
                }
                samples.push(sample(&y, (k + 1) as f64 * dt, &mut phi));
            }
        }
        Form::Madelung | Form::ChargeFlux => {
            let eps = spec.eps;
            let charge_flux = spec.form == Form::ChargeFlux;
            let rhs = |t: f64, y: &[f64; 2]| {
                let (a, b) = if charge_flux {
                    charge_flux_rhs(
                        &ChargeFluxState { q: y[0], phi: y[1] },
                        params,
                        drive,
                        t,
                        eps,
                    )?
                } else {
                    madelung_rhs(&MadelungState { n: y[0], phi: y[1] }, params, drive, t, eps)?
                };
                Ok([a, b])
            };
            let sample = |y: &[f64; 2], t: f64| Sample {
                time: t,
                n: y[0],
                phi: y[1],
                energy: hamiltonian_energy(
                    &ChargeFluxState { q: y[0], phi: y[1] },
                    params,
                    drive,
                    t,
                ),
                norm: 1.0,
            };
            let mut y = [initial.n, initial.phi];
            samples.push(sample(&y, 0.0));
            for k in 0..steps {
                let t = k as f64 * dt;
                y = rk4(y, t, dt, rhs)?;
                samples.push(sample(&y, (k + 1) as f64 * dt));
            }
        }
    }
    Ok(Trajectory {
        form: spec.form,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::wrap_angle;
    use std::f64::consts::FRAC_PI_2;

    const P: TwoModeParams = TwoModeParams {
        ej1: 1.0,
        ej2: -0.1,
        charging: 0.5,
    };

    #[test]
    fn ground_state_is_fixed_point() {
        let spec = IntegrationSpec::new(1e-3, 10.0, Form::Complex);
        let traj = integrate(
            &MadelungState::new(0.0, 0.0).unwrap(),
            &P,
            &DriveSpec::none(),
            &spec,
        )
        .unwrap();
        assert_eq!(traj.samples.len(), 10_001);
        for s in &traj.samples {
            assert!(s.n.abs() < 1e-9 && s.phi.abs() < 1e-9);
        }
    }

    #[test]
    fn small_oscillation_conserves_energy() {
        for form in [Form::Complex, Form::Madelung, Form::ChargeFlux] {
            let spec = IntegrationSpec::new(1e-3, 10.0, form);
            let traj = integrate(
                &MadelungState::new(0.1, 0.0).unwrap(),
                &P,
                &DriveSpec::none(),
                &spec,
            )
            .unwrap();
            assert!(traj.max_energy_drift() <= 1e-6, "{form:?}");
            assert!(traj.max_norm_drift() <= 1e-9, "{form:?}");
            assert!(traj.samples.iter().all(|s| s.n.abs() <= 0.1 + 1e-9));
            // the imbalance changes sign: it oscillates
            assert!(traj.samples.iter().any(|s| s.n < -0.05));
        }
    }

    #[test]
    fn free_phase_winds_linearly_under_bias() {
        let params = TwoModeParams::new(0.0, 0.0, 0.0).unwrap();
        let spec = IntegrationSpec::new(1e-2, 5.0, Form::ChargeFlux);
        let traj = integrate(
            &MadelungState::new(0.2, 0.1).unwrap(),
            &params,
            &DriveSpec::constant_voltage(0.7),
            &spec,
        )
        .unwrap();
        for s in &traj.samples {
            assert!((s.phi - (0.1 + 0.7 * s.time)).abs() < 1e-12);
            assert_eq!(s.n, 0.2);
        }
    }

    #[test]
    fn complex_and_madelung_trajectories_agree() {
        let spec = |form| IntegrationSpec::new(1e-3, 10.0, form);
        let start = MadelungState::new(0.0, FRAC_PI_2).unwrap();
        let a = integrate(&start, &P, &DriveSpec::none(), &spec(Form::Complex)).unwrap();
        let b = integrate(&start, &P, &DriveSpec::none(), &spec(Form::Madelung)).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            if x.n.abs() <= 0.99 {
                assert!((x.n - y.n).abs() <= 1e-6);
                assert!(wrap_angle(x.phi - y.phi).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn madelung_and_charge_flux_identical() {
        let spec = |form| IntegrationSpec::new(1e-3, 2.0, form);
        let start = MadelungState::new(0.3, 1.0).unwrap();
        let drive = DriveSpec::constant_voltage(0.2);
        let a = integrate(&start, &P, &drive, &spec(Form::Madelung)).unwrap();
        let b = integrate(&start, &P, &drive, &spec(Form::ChargeFlux)).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.n - y.n).abs() < 1e-12 && (x.phi - y.phi).abs() < 1e-12);
        }
    }

    #[test]
    fn madelung_stops_at_pole() {
        // strong bias-free tunnelling drives n towards -1
        let params = TwoModeParams::new(4.0, 0.0, 0.0).unwrap();
        let spec = IntegrationSpec::new(1e-3, 5.0, Form::Madelung);
        let err = integrate(
            &MadelungState::new(0.0, FRAC_PI_2).unwrap(),
            &params,
            &DriveSpec::none(),
            &spec,
        );
        assert!(matches!(err, Err(Error::Singularity(_))));
        let complex = integrate(
            &MadelungState::new(0.0, FRAC_PI_2).unwrap(),
            &params,
            &DriveSpec::none(),
            &IntegrationSpec::new(1e-3, 5.0, Form::Complex),
        )
        .unwrap();
        assert!(complex.max_norm_drift() < 1e-9);
    }

    #[test]
    fn renormalisation_pins_norm() {
        let mut spec = IntegrationSpec::new(0.05, 20.0, Form::Complex);
        spec.renormalize = true;
        let traj = integrate(
            &MadelungState::new(0.4, 0.5).unwrap(),
            &P,
            &DriveSpec::none(),
            &spec,
        )
        .unwrap();
        assert!(traj.max_norm_drift() < 1e-14);
    }

    #[test]
    fn invalid_spec() {
        let spec = IntegrationSpec::new(0.0, 1.0, Form::Complex);
        assert!(integrate(
            &MadelungState::new(0.0, 0.0).unwrap(),
            &P,
            &DriveSpec::none(),
            &spec
        )
        .is_err());
        assert!("euler".parse::<Form>().is_err());
        assert_eq!("charge_flux".parse::<Form>().unwrap(), Form::ChargeFlux);
    }
}
