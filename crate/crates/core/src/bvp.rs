//! Stationary parity states of the unitless Schrödinger–Poisson system
//!
//! ```text
//!   -psi'' + V psi = 0
//!   2 V'' + psi^2 = rho
//! ```
//!
//! on the half-line `[0, x_max]`, discretised with second-order central
//! differences and solved by damped Newton iteration. Unknowns are
//! interleaved per node (`psi_0, V_0, psi_1, V_1, ...`) so the Jacobian is
//! banded with two sub- and two super-diagonals.
//!
//! Parity enters through the boundary rows at `x = 0`: both parities mirror
//! `V` across the origin (ghost node `V_{-1} = V_1`); the even state mirrors
//! `psi` the same way and the odd state pins `psi_0 = 0`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::model::{sample_background, BackgroundProfile, Geometry, GeometryKind, Grid};
use crate::{Error, Result};

/// Minimum distance between the outer island edge and the grid end.
pub const ISOLATED_MARGIN: f64 = 20.0;

/// Newton steps smaller than this (max-norm) count as stagnated.
const STEP_TOL: f64 = 1e-12;

/// Maximum number of step halvings in the line search.
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Boundary conditions at `x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarField {
    /// `psi = 1`, `V = 0` (semi-infinite electrodes).
    Bulk,
    /// `psi = 0`, `V' = 0` (finite islands surrounded by vacuum).
    Isolated,
}

impl From<GeometryKind> for FarField {
    fn from(kind: GeometryKind) -> Self {
        match kind {
            GeometryKind::SemiInfinite => FarField::Bulk,
            GeometryKind::FiniteIslands => FarField::Isolated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParitySolution {
    pub parity: Parity,
    pub psi: Vec<f64>,
    pub v: Vec<f64>,
    /// Max-norm of the discrete residual at the returned state.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Tolerance the solve was run with.
    pub tol: f64,
}

impl ParitySolution {
    pub fn is_converged(&self) -> bool {
        self.residual_norm <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    /// `psi = 1, V = 0` for semi-infinite electrodes; `psi = sqrt(rho), V = 0`
    /// for finite islands.
    #[default]
    Bulk,
    Custom {
        psi: Vec<f64>,
        v: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial Newton step fraction; halved until the residual decreases.
    pub damping: f64,
    pub initial_guess: InitialGuess,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 50,
            damping: 1.0,
            initial_guess: InitialGuess::Bulk,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

fn check_lengths(psi: &[f64], v: &[f64], n: usize) -> Result<()> {
    if psi.len() != n || v.len() != n {
        return Err(Error::InvalidInput(format!(
            "state length mismatch: psi {}, V {}, grid {}",
            psi.len(),
            v.len(),
            n
        )));
    }
    Ok(())
}

/// Discrete residual, interleaved as `[r1_0, r2_0, r1_1, r2_1, ...]` where
/// `r1 = -D2 psi + V psi` and `r2 = 2 D2 V + psi^2 - rho` in the interior.
pub fn residual(
    psi: &[f64],
    v: &[f64],
    parity: Parity,
    background: &BackgroundProfile,
    grid: &Grid,
    far_field: FarField,
) -> Result<Vec<f64>> {
    let n = grid.len();
    check_lengths(psi, v, n)?;
    if background.len() != n {
        return Err(Error::InvalidInput(format!(
            "background length {} does not match grid {}",
            background.len(),
            n
        )));
    }
    if n < 3 {
        return Err(Error::InvalidInput("grid needs at least 3 nodes".into()));
    }
    let rho = background.values();
    let inv_h2 = 1.0 / (grid.dx() * grid.dx());
    let last = n - 1;
    let mut r = vec![0.0; 2 * n];

    // x = 0: mirror ghost nodes
    r[0] = match parity {
        Parity::Even => -2.0 * (psi[1] - psi[0]) * inv_h2 + v[0] * psi[0],
        Parity::Odd => psi[0],
    };
    r[1] = 4.0 * (v[1] - v[0]) * inv_h2 + psi[0] * psi[0] - rho[0];

    for i in 1..last {
        let d2psi = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) * inv_h2;
        let d2v = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_h2;
        r[2 * i] = -d2psi + v[i] * psi[i];
        r[2 * i + 1] = 2.0 * d2v + psi[i] * psi[i] - rho[i];
    }

    match far_field {
        FarField::Bulk => {
            r[2 * last] = psi[last] - 1.0;
            r[2 * last + 1] = v[last];
        }
        FarField::Isolated => {
            r[2 * last] = psi[last];
            r[2 * last + 1] =
                4.0 * (v[last - 1] - v[last]) * inv_h2 + psi[last] * psi[last] - rho[last];
        }
    }
    Ok(r)
}

/// Analytic Jacobian of [`residual`] with respect to the interleaved unknowns.
pub fn jacobian(
    psi: &[f64],
    v: &[f64],
    parity: Parity,
    grid: &Grid,
    far_field: FarField,
) -> Result<BandMatrix> {
    let n = grid.len();
    check_lengths(psi, v, n)?;
    let inv_h2 = 1.0 / (grid.dx() * grid.dx());
    let last = n - 1;
    let mut jac = BandMatrix::zeros(2 * n, 2, 2);
    let (p, q) = (|i: usize| 2 * i, |i: usize| 2 * i + 1);

    match parity {
        Parity::Even => {
            jac.add(p(0), p(0), 2.0 * inv_h2 + v[0]);
            jac.add(p(0), p(1), -2.0 * inv_h2);
            jac.add(p(0), q(0), psi[0]);
        }
        Parity::Odd => jac.add(p(0), p(0), 1.0),
    }
    jac.add(q(0), q(0), -4.0 * inv_h2);
    jac.add(q(0), q(1), 4.0 * inv_h2);
    jac.add(q(0), p(0), 2.0 * psi[0]);

    for i in 1..last {
        jac.add(p(i), p(i - 1), -inv_h2);
        jac.add(p(i), p(i), 2.0 * inv_h2 + v[i]);
        jac.add(p(i), p(i + 1), -inv_h2);
        jac.add(p(i), q(i), psi[i]);

        jac.add(q(i), q(i - 1), 2.0 * inv_h2);
        jac.add(q(i), q(i), -4.0 * inv_h2);
        jac.add(q(i), q(i + 1), 2.0 * inv_h2);
        jac.add(q(i), p(i), 2.0 * psi[i]);
    }

    match far_field {
        FarField::Bulk => {
            jac.add(p(last), p(last), 1.0);
            jac.add(q(last), q(last), 1.0);
        }
        FarField::Isolated => {
            jac.add(p(last), p(last), 1.0);
            jac.add(q(last), q(last - 1), 4.0 * inv_h2);
            jac.add(q(last), q(last), -4.0 * inv_h2);
            jac.add(q(last), p(last), 2.0 * psi[last]);
        }
    }
    Ok(jac)
}

fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(
        0.0,
        |m, &x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

fn initial_state(
    opts: &SolverOptions,
    background: &BackgroundProfile,
    far_field: FarField,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match &opts.initial_guess {
        InitialGuess::Bulk => {
            let psi = match far_field {
                FarField::Bulk => vec![1.0; n],
                FarField::Isolated => background.values().iter().map(|r| r.sqrt()).collect(),
            };
            Ok((psi, vec![0.0; n]))
        }
        InitialGuess::Custom { psi, v } => {
            check_lengths(psi, v, n)?;
            Ok((psi.clone(), v.clone()))
        }
    }
}

/// Solves one parity state by Newton iteration with backtracking.
///
/// Iteration continues past `tol` until the update stagnates, so returned
/// states are typically accurate to rounding level.
pub fn solve_parity(
    parity: Parity,
    geometry: &Geometry,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<ParitySolution> {
    opts.validate()?;
    let background = sample_background(geometry, grid)?;
    let far_field = FarField::from(geometry.kind());
    if far_field == FarField::Isolated && geometry.extent() + ISOLATED_MARGIN > grid.x_max() {
        return Err(Error::Config(format!(
            "finite islands need x_max >= L/2 + a + {ISOLATED_MARGIN} = {}, got {}",
            geometry.extent() + ISOLATED_MARGIN,
            grid.x_max()
        )));
    }
    let n = grid.len();
    let (mut psi, mut v) = initial_state(opts, &background, far_field, n)?;

    let mut r = residual(&psi, &v, parity, &background, grid, far_field)?;
    let mut norm = max_norm(&r);
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;

    loop {
        if norm == 0.0 || (norm <= opts.tol && last_step <= STEP_TOL) {
            break;
        }
        if iterations == opts.max_iter {
            if norm <= opts.tol {
                break;
            }
            return Err(Error::NonConvergence {
                parity,
                iterations,
                residual: norm,
            });
        }
        let jac = jacobian(&psi, &v, parity, grid, far_field)?;
        let mut step: Vec<f64> = r.iter().map(|x| -x).collect();
        jac.solve_in_place(&mut step)?;

        let mut lambda = opts.damping;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial_psi: Vec<f64> = (0..n).map(|i| psi[i] + lambda * step[2 * i]).collect();
            let trial_v: Vec<f64> = (0..n).map(|i| v[i] + lambda * step[2 * i + 1]).collect();
            let trial_r = residual(&trial_psi, &trial_v, parity, &background, grid, far_field)?;
            let trial_norm = max_norm(&trial_r);
            if trial_norm < norm {
                accepted = Some((trial_psi, trial_v, trial_r, trial_norm));
                break;
            }
            lambda *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((p, q, rr, nn)) => {
                psi = p;
                v = q;
                r = rr;
                norm = nn;
                last_step = lambda * max_norm(&step);
            }
            // rounding floor reached
            None if norm <= opts.tol => break,
            None => {
                return Err(Error::NonConvergence {
                    parity,
                    iterations,
                    residual: norm,
                })
            }
        }
    }

    if parity == Parity::Odd {
        psi[0] = 0.0;
    }
    // psi -> -psi is a symmetry; fix psi > 0 on the positive half-line
    if psi.iter().sum::<f64>() < 0.0 {
        psi.iter_mut().for_each(|x| *x = -*x);
    }

    Ok(ParitySolution {
        parity,
        psi,
        v,
        residual_norm: norm,
        iterations,
        tol: opts.tol,
    })
}

/// Even and odd stationary states together with the left/right basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityPair {
    even: ParitySolution,
    odd: ParitySolution,
    grid: Grid,
    geometry: Geometry,
    psi_l: Vec<f64>,
    psi_r: Vec<f64>,
}

impl ParityPair {
    /// Assembles a pair from half-line states; also used to evaluate
    /// quadratures on prescribed profiles.
    pub fn from_solutions(
        even: ParitySolution,
        odd: ParitySolution,
        geometry: Geometry,
        grid: Grid,
    ) -> Result<Self> {
        if even.parity != Parity::Even || odd.parity != Parity::Odd {
            return Err(Error::InvalidInput(
                "pair needs one even and one odd state".into(),
            ));
        }
        check_lengths(&even.psi, &even.v, grid.len())?;
        check_lengths(&odd.psi, &odd.v, grid.len())?;
        let (psi_l, psi_r) = hadamard_full_line(&even.psi, &odd.psi);
        Ok(ParityPair {
            even,
            odd,
            grid,
            geometry,
            psi_l,
            psi_r,
        })
    }

    pub fn even(&self) -> &ParitySolution {
        &self.even
    }

    pub fn odd(&self) -> &ParitySolution {
        &self.odd
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Left-localised basis function on the full line.
    pub fn psi_l(&self) -> &[f64] {
        &self.psi_l
    }

    /// Right-localised basis function on the full line.
    pub fn psi_r(&self) -> &[f64] {
        &self.psi_r
    }

    pub fn is_converged(&self) -> bool {
        self.even.is_converged() && self.odd.is_converged()
    }
}

/// Reconstructs both parity states on the full line and applies the
/// Hadamard transform `psi_R = (psi+ + psi-)/sqrt2`, `psi_L = (psi+ - psi-)/sqrt2`.
fn hadamard_full_line(even: &[f64], odd: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = even.len();
    let full = 2 * n - 1;
    let mut psi_l = Vec::with_capacity(full);
    let mut psi_r = Vec::with_capacity(full);
    for j in 0..full {
        let (plus, minus) = if j < n - 1 {
            let k = n - 1 - j;
            (even[k], -odd[k])
        } else {
            let k = j + 1 - n;
            (even[k], odd[k])
        };
        psi_r.push((plus + minus) * FRAC_1_SQRT_2);
        psi_l.push((plus - minus) * FRAC_1_SQRT_2);
    }
    (psi_l, psi_r)
}

pub fn solve_pair(geometry: &Geometry, grid: &Grid, opts: &SolverOptions) -> Result<ParityPair> {
    let even = solve_parity(Parity::Even, geometry, grid, opts)?;
    let odd = solve_parity(Parity::Odd, geometry, grid, opts)?;
    ParityPair::from_solutions(even, odd, *geometry, grid.clone())
}

/// `(psi_L, psi_R)` on the full line `[-x_max, x_max]`.
pub fn left_right_basis(pair: &ParityPair) -> (Vec<f64>, Vec<f64>) {
    (pair.psi_l.clone(), pair.psi_r.clone())
}

/// Number of sign changes in a sequence, skipping exact zeros.
pub fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

/// Full-line values of a half-line state with the given parity.
pub fn mirror(values: &[f64], parity: Parity) -> Vec<f64> {
    let n = values.len();
    let s = parity.sign();
    (0..2 * n - 1)
        .map(|j| {
            if j < n - 1 {
                s * values[n - 1 - j]
            } else {
                values[j + 1 - n]
            }
        })
        .collect()
}
