//! Separation-length sweeps and log-quadratic fits of the critical currents.

use serde::{Deserialize, Serialize};

use crate::bvp::{
    solve_pair, solve_parity, InitialGuess, Parity, ParityPair, ParitySolution, SolverOptions,
};
use crate::junction::{extract, JunctionParams};
use crate::model::{Geometry, Grid};
use crate::par::Execution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "L_bar")]
    pub l_bar: f64,
    #[serde(rename = "Ic1_bar")]
    pub ic1_bar: f64,
    #[serde(rename = "Ic2_bar")]
    pub ic2_bar: f64,
    #[serde(rename = "Ej1_bar")]
    pub ej1_bar: f64,
    #[serde(rename = "Ej2_bar")]
    pub ej2_bar: f64,
    #[serde(rename = "Ej1_dual_bar")]
    pub ej1_dual_bar: f64,
    #[serde(rename = "Ej2_dual_bar")]
    pub ej2_dual_bar: f64,
    #[serde(rename = "Eminus_minus_Eplus")]
    pub eminus_minus_eplus: f64,
    /// Newton iterations of both parity solves.
    pub iterations: usize,
    /// Larger of the two final residual norms.
    pub residual_norm: f64,
}

impl SweepRecord {
    pub fn new(l_bar: f64, pair: &ParityPair, params: &JunctionParams) -> Self {
        SweepRecord {
            l_bar,
            ic1_bar: params.ic1_bar,
            ic2_bar: params.ic2_bar,
            ej1_bar: params.ej1_bar,
            ej2_bar: params.ej2_bar,
            ej1_dual_bar: params.ej1_dual_bar,
            ej2_dual_bar: params.ej2_dual_bar,
            eminus_minus_eplus: params.eminus_bar - params.eplus_bar,
            iterations: pair.even().iterations + pair.odd().iterations,
            residual_norm: pair.even().residual_norm.max(pair.odd().residual_norm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    #[serde(rename = "L_bar")]
    pub l_bar: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Start each solve from the previous separation's states. Forces
    /// sequential evaluation.
    pub warm_start: bool,
    pub execution: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            warm_start: true,
            execution: Execution::Sequential,
        }
    }
}

/// `count` equally spaced values from `start` to `end` inclusive.
pub fn separation_values(start: f64, end: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !(start.is_finite() && end.is_finite()) || start < 0.0 || end < start {
        return Err(Error::Config(format!(
            "sweep range needs 0 <= start <= end and count >= 1, got [{start}, {end}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (end - start) / (count - 1) as f64;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn solve_point(
    geometry: &Geometry,
    grid: &Grid,
    opts: &SolverOptions,
    previous: Option<&ParityPair>,
) -> Result<ParityPair> {
    let Some(prev) = previous else {
        return solve_pair(geometry, grid, opts);
    };
    let warm = |parity: Parity, seed: &ParitySolution| -> Result<ParitySolution> {
        let warm_opts = SolverOptions {
            initial_guess: InitialGuess::Custom {
                psi: seed.psi.clone(),
                v: seed.v.clone(),
            },
            ..opts.clone()
        };
        let cold_opts = SolverOptions {
            initial_guess: InitialGuess::Bulk,
            ..opts.clone()
        };
        solve_parity(parity, geometry, grid, &warm_opts)
            .or_else(|_| solve_parity(parity, geometry, grid, &cold_opts))
    };
    let even = warm(Parity::Even, prev.even())?;
    let odd = warm(Parity::Odd, prev.odd())?;
    ParityPair::from_solutions(even, odd, *geometry, grid.clone())
}

fn evaluate(
    l_bar: f64,
    template: &Geometry,
    grid: &Grid,
    opts: &SolverOptions,
    previous: Option<&ParityPair>,
) -> Result<(ParityPair, SweepRecord)> {
    let geometry = template.with_gap(l_bar)?;
    let pair = solve_point(&geometry, grid, opts, previous)?;
    let params = extract(&pair)?;
    let record = SweepRecord::new(l_bar, &pair, &params);
    Ok((pair, record))
}

/// Solves and extracts at every separation in `l_values`, using `template`
/// for everything but the gap. Failed points are collected; the sweep
/// itself fails only when every point fails.
pub fn run_sweep(
    l_values: &[f64],
    template: &Geometry,
    grid: &Grid,
    opts: &SolverOptions,
    sweep: &SweepOptions,
) -> Result<Sweep> {
    if l_values.is_empty() {
        return Err(Error::Config("sweep needs at least one separation".into()));
    }
    if let Some(bad) = l_values.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::Config(format!(
            "separations must be >= 0, got {bad}"
        )));
    }
    let outcomes: Vec<Result<SweepRecord>> = if sweep.warm_start {
        let mut previous: Option<ParityPair> = None;
        l_values
            .iter()
            .map(
                |&l| match evaluate(l, template, grid, opts, previous.as_ref()) {
                    Ok((pair, record)) => {
                        previous = Some(pair);
                        Ok(record)
                    }
                    Err(e) => Err(e),
                },
            )
            .collect()
    } else {
        sweep.execution.map(l_values, |&l| {
            evaluate(l, template, grid, opts, None).map(|(_, r)| r)
        })
    };

    let mut result = Sweep::default();
    for (&l_bar, outcome) in l_values.iter().zip(outcomes) {
        match outcome {
            Ok(record) => result.records.push(record),
            Err(e) => result.failures.push(SweepFailure {
                l_bar,
                message: e.to_string(),
            }),
        }
    }
    if result.records.is_empty() {
        return Err(Error::SweepFailed(l_values.len()));
    }
    Ok(result)
}

/// `ln|I| ~ a L^2 + b L + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepFits {
    #[serde(rename = "Ic1")]
    pub ic1: FitCoefficients,
    #[serde(rename = "Ic2")]
    pub ic2: FitCoefficients,
}

/// Least-squares fit of `ln|I|` to a quadratic in `L`.
///
/// The abscissa is centred and scaled before forming the normal equations.
pub fn fit_log_quadratic(l: &[f64], current: &[f64]) -> Result<FitCoefficients> {
    if l.len() != current.len() {
        return Err(Error::InvalidInput(format!(
            "fit needs equal lengths, got {} and {}",
            l.len(),
            current.len()
        )));
    }
    if l.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "fit needs at least 3 points, got {}",
            l.len()
        )));
    }
    if let Some(bad) = current.iter().find(|i| !(i.is_finite() && i.abs() > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "fit needs nonzero finite currents, got {bad}"
        )));
    }
    if l.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("fit abscissae must be finite".into()));
    }
    let m = l.len() as f64;
    let mean = l.iter().sum::<f64>() / m;
    let spread = l.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    if spread == 0.0 {
        return Err(Error::InvalidInput("fit abscissae are all equal".into()));
    }
    let y: Vec<f64> = current.iter().map(|i| i.abs().ln()).collect();

    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (x, yi) in l.iter().zip(&y) {
        let t = (x - mean) / spread;
        let row = [t * t, t, 1.0];
        for r in 0..3 {
            aty[r] += row[r] * yi;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let [alpha, beta, gamma] = solve3(ata, aty)?;
    let s = spread;
    let a = alpha / (s * s);
    let b = beta / s - 2.0 * alpha * mean / (s * s);
    let c = alpha * mean * mean / (s * s) - beta * mean / s + gamma;

    let sq: f64 = l
        .iter()
        .zip(&y)
        .map(|(x, yi)| {
            let r = yi - (a * x * x + b * x + c);
            r * r
        })
        .sum();
    Ok(FitCoefficients {
        a,
        b,
        c,
        rms_residual: (sq / m).sqrt(),
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Result<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap_or(k);
        if m[p][k].abs() <= 1e-12 * scale {
            return Err(Error::InvalidInput(
                "rank-deficient fit (fewer than 3 distinct abscissae)".into(),
            ));
        }
        m.swap(k, p);
        v.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= f * m[k][j];
            }
            v[i] -= f * v[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| m[k][j] * x[j]).sum();
        x[k] = (v[k] - s) / m[k][k];
    }
    Ok(x)
}

pub fn extrapolate(fit: &FitCoefficients, l_bar: f64) -> f64 {
    (fit.a * l_bar * l_bar + fit.b * l_bar + fit.c).exp()
}

pub fn fit_sweep(sweep: &Sweep) -> Result<SweepFits> {
    let l: Vec<f64> = sweep.records.iter().map(|r| r.l_bar).collect();
    let ic1: Vec<f64> = sweep.records.iter().map(|r| r.ic1_bar).collect();
    let ic2: Vec<f64> = sweep.records.iter().map(|r| r.ic2_bar).collect();
    Ok(SweepFits {
        ic1: fit_log_quadratic(&l, &ic1)?,
        ic2: fit_log_quadratic(&l, &ic2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_grid;
    use proptest::prelude::*;

    #[test]
    fn exact_exponential_recovered() {
        let l: Vec<f64> = (0..=40).map(f64::from).collect();
        let i: Vec<f64> = l.iter().map(|x| (-0.5 * x + 0.1).exp()).collect();
        let fit = fit_log_quadratic(&l, &i).unwrap();
        assert!(fit.a.abs() < 1e-10);
        assert!((fit.b + 0.5).abs() < 1e-10);
        assert!((fit.c - 0.1).abs() < 1e-10);
        assert!(fit.rms_residual <= 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_log_quadratic(&[0.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_log_quadratic(&[0.0, 1.0, 2.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_log_quadratic(&[1.0, 1.0, 2.0, 2.0], &[1.0, 1.0, 2.0, 2.0]).is_err());
        assert!(fit_log_quadratic(&[3.0; 4], &[1.0; 4]).is_err());
        assert!(fit_log_quadratic(&[0.0, 1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn negative_currents_fit_by_magnitude() {
        let l = [0.0, 1.0, 2.0, 3.0];
        let i: Vec<f64> = l.iter().map(|x: &f64| -(-0.3 * x - 1.0).exp()).collect();
        let fit = fit_log_quadratic(&l, &i).unwrap();
        assert!((fit.b + 0.3).abs() < 1e-10 && (fit.c + 1.0).abs() < 1e-10);
    }

    #[test]
    fn extrapolation() {
        let fit = FitCoefficients {
            a: 0.0,
            b: -0.507,
            c: 0.155,
            rms_residual: 0.0,
        };
        assert!((extrapolate(&fit, 0.0) - 1.168).abs() < 1e-3);
        assert_eq!(extrapolate(&fit, 0.0), 0.155f64.exp());
        let fit2 = FitCoefficients {
            a: -0.005,
            b: -0.590,
            c: -1.819,
            rms_residual: 0.0,
        };
        let ratio = extrapolate(&fit2, 0.0) / extrapolate(&fit, 0.0);
        assert!((ratio - (-1.974f64).exp()).abs() < 1e-12);
        assert!((ratio - 0.139).abs() < 1e-3);
    }

    #[test]
    fn separations() {
        let v = separation_values(0.0, 40.0, 21).unwrap();
        assert_eq!(v.len(), 21);
        assert_eq!(v[7], 14.0);
        assert_eq!(separation_values(3.0, 3.0, 1).unwrap(), vec![3.0]);
        assert!(separation_values(-1.0, 3.0, 4).is_err());
        assert!(separation_values(0.0, 3.0, 0).is_err());
    }

    #[test]
    fn singleton_sweep_matches_standalone() {
        let grid = build_grid(100.0, 0.25).unwrap();
        let template = Geometry::semi_infinite(0.0).unwrap();
        let sweep = run_sweep(
            &[10.0],
            &template,
            &grid,
            &SolverOptions::default(),
            &SweepOptions::default(),
        )
        .unwrap();
        let pair = solve_pair(
            &Geometry::semi_infinite(10.0).unwrap(),
            &grid,
            &SolverOptions::default(),
        )
        .unwrap();
        let p = extract(&pair).unwrap();
        assert_eq!(sweep.records.len(), 1);
        assert_eq!(sweep.records[0].ic1_bar, p.ic1_bar);
        assert_eq!(sweep.records[0].ic2_bar, p.ic2_bar);
    }

    #[test]
    fn warm_and_cold_sweeps_agree() {
        let grid = build_grid(60.0, 0.5).unwrap();
        let template = Geometry::semi_infinite(0.0).unwrap();
        let l = separation_values(0.0, 12.0, 4).unwrap();
        let opts = SolverOptions::default();
        let warm = run_sweep(&l, &template, &grid, &opts, &SweepOptions::default()).unwrap();
        let cold = run_sweep(
            &l,
            &template,
            &grid,
            &opts,
            &SweepOptions {
                warm_start: false,
                execution: Execution::Parallel { threads: 2 },
            },
        )
        .unwrap();
        for (w, c) in warm.records.iter().zip(&cold.records) {
            assert!((w.ic1_bar - c.ic1_bar).abs() <= 1e-10 * c.ic1_bar.abs());
            assert!((w.ic2_bar - c.ic2_bar).abs() <= 1e-8 * c.ic2_bar.abs());
        }
        for w in warm.records.windows(2) {
            assert!(w[1].ic1_bar < w[0].ic1_bar);
        }
    }

    #[test]
    fn failures_are_recorded() {
        let grid = build_grid(60.0, 0.5).unwrap();
        let template = Geometry::semi_infinite(0.0).unwrap();
        let opts = SolverOptions {
            max_iter: 1,
            ..SolverOptions::default()
        };
        // L = 0 converges without iterations for the even state but not the odd one
        let err = run_sweep(
            &[0.0, 8.0],
            &template,
            &grid,
            &opts,
            &SweepOptions::default(),
        );
        assert!(matches!(err, Err(Error::SweepFailed(2))));
        assert!(run_sweep(&[], &template, &grid, &opts, &SweepOptions::default()).is_err());
    }

    proptest! {
        #[test]
        fn exact_quadratics_refit(a in -0.01..0.01f64, b in -1.0..1.0f64, c in -3.0..3.0f64) {
            let l: Vec<f64> = (0..21).map(|k| 2.0 * k as f64).collect();
            let i: Vec<f64> = l.iter().map(|x| (a * x * x + b * x + c).exp()).collect();
            let fit = fit_log_quadratic(&l, &i).unwrap();
            prop_assert!(fit.rms_residual <= 1e-12);
            prop_assert!((fit.a - a).abs() < 1e-10 && (fit.b - b).abs() < 1e-9 && (fit.c - c).abs() < 1e-9);
            for (x, y) in l.iter().zip(&i) {
                prop_assert!((extrapolate(&fit, *x) / y - 1.0).abs() < 1e-10);
            }
        }
    }
}
