//! Junction parameters from a solved parity pair.
//!
//! All integrals use the left rectangle rule on the full line. Because every
//! integrand here is even, the full-line sum reduces to half-line weights
//! `dx * (1, 2, 2, ..., 2, 1)`; half-line integrals over `[0, x_max]` use
//! half of those weights.

use serde::{Deserialize, Serialize};

use crate::bvp::ParityPair;
use crate::model::{GeometryKind, MaterialSpec, ScaleSet};
use crate::{Error, Result};

/// Largest relative disagreement tolerated between primary and dual
/// formulas before extraction is rejected.
pub const CONSISTENCY_TOL: f64 = 1e-2;

/// Unitless junction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionParams {
    #[serde(rename = "K1_bar")]
    pub k1_bar: f64,
    #[serde(rename = "K2_bar")]
    pub k2_bar: f64,
    #[serde(rename = "Ej1_bar")]
    pub ej1_bar: f64,
    #[serde(rename = "Ej2_bar")]
    pub ej2_bar: f64,
    #[serde(rename = "Ej1_dual_bar")]
    pub ej1_dual_bar: f64,
    #[serde(rename = "Ej2_dual_bar")]
    pub ej2_dual_bar: f64,
    #[serde(rename = "Eplus_bar")]
    pub eplus_bar: f64,
    #[serde(rename = "Eminus_bar")]
    pub eminus_bar: f64,
    #[serde(rename = "Ic1_bar")]
    pub ic1_bar: f64,
    #[serde(rename = "Ic2_bar")]
    pub ic2_bar: f64,
    #[serde(rename = "C_J_bar")]
    pub c_j_bar: Option<f64>,
    pub d_bar: Option<f64>,
    pub norm_bar: Option<f64>,
}

/// SI values of the junction parameters for a given material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// A.
    #[serde(rename = "Ic1")]
    pub ic1: f64,
    #[serde(rename = "Ic2")]
    pub ic2: f64,
    /// J.
    #[serde(rename = "Ej1")]
    pub ej1: f64,
    #[serde(rename = "Ej2")]
    pub ej2: f64,
    #[serde(rename = "Eplus")]
    pub eplus: f64,
    #[serde(rename = "Eminus")]
    pub eminus: f64,
    /// F.
    #[serde(rename = "C_J")]
    pub c_j: Option<f64>,
    /// m.
    pub d: Option<f64>,
    /// Number of bosons `N`.
    pub bosons: Option<f64>,
    /// Dimensionless couplings `K1 = -Ej1/N`, `K2 = -4 Ej2/N` in units of the
    /// energy scale.
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    #[serde(rename = "K2")]
    pub k2: Option<f64>,
}

impl JunctionParams {
    pub fn to_physical(&self, scales: &ScaleSet, material: &MaterialSpec) -> PhysicalParams {
        let e = scales.energy_unit;
        let bosons = self.norm_bar.map(|n| scales.boson_number(n, material));
        PhysicalParams {
            ic1: scales.current_prefactor * self.ic1_bar,
            ic2: scales.current_prefactor * self.ic2_bar,
            ej1: e * self.ej1_bar,
            ej2: e * self.ej2_bar,
            eplus: e * self.eplus_bar,
            eminus: e * self.eminus_bar,
            c_j: self.c_j_bar.map(|c| scales.capacitance_unit * c),
            d: self.d_bar.map(|d| scales.xi * d),
            bosons,
            k1: bosons.map(|n| -self.ej1_bar / n),
            k2: bosons.map(|n| -4.0 * self.ej2_bar / n),
        }
    }
}

/// `dx * sum(samples)`.
pub fn rect_integral(samples: &[f64], dx: f64) -> f64 {
    dx * samples.iter().sum::<f64>()
}

/// Full-line integral of an even function given on the half-line.
fn full_line(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    match n {
        0 => 0.0,
        1 => dx * f[0],
        _ => dx * (f[0] + f[n - 1] + 2.0 * f[1..n - 1].iter().sum::<f64>()),
    }
}

/// Integral over `[0, x_max]`.
fn half_line(f: &[f64], dx: f64) -> f64 {
    0.5 * full_line(f, dx)
}

/// Sum of `term(i)` over the grid edges `(i, i + 1)`.
fn edge_sum<F: Fn(usize) -> f64>(n: usize, term: F) -> f64 {
    (0..n.saturating_sub(1)).map(term).sum()
}

fn require_converged(pair: &ParityPair) -> Result<()> {
    if !pair.is_converged() {
        return Err(Error::InvalidInput(format!(
            "parity pair not converged (residuals {:e}, {:e})",
            pair.even().residual_norm,
            pair.odd().residual_norm
        )));
    }
    Ok(())
}

/// Returns `(K1_bar, K2_bar, Ic1_bar, Ic2_bar)`.
pub fn josephson_couplings(pair: &ParityPair) -> Result<(f64, f64, f64, f64)> {
    require_converged(pair)?;
    let (ic1, ic2) = critical_currents(pair);
    Ok((-ic1, -2.0 * ic2, ic1, ic2))
}

fn critical_currents(pair: &ParityPair) -> (f64, f64) {
    let dx = pair.grid().dx();
    let (e, o) = (pair.even(), pair.odd());
    let n = e.psi.len();
    let mut sum = Vec::with_capacity(n);
    let mut diff = Vec::with_capacity(n);
    for i in 0..n {
        let w = o.v[i] - e.v[i];
        let (pm2, pp2) = (o.psi[i] * o.psi[i], e.psi[i] * e.psi[i]);
        sum.push((pm2 + pp2) * w);
        diff.push((pm2 - pp2) * w);
    }
    (-0.25 * full_line(&sum, dx), -0.125 * full_line(&diff, dx))
}

/// Returns `(Eplus_bar, Eminus_bar)`, the gradient energies
/// `int |psi'|^2 + |V'|^2` of the even and odd states over the full line.
pub fn parity_energies(pair: &ParityPair) -> Result<(f64, f64)> {
    require_converged(pair)?;
    let dx = pair.grid().dx();
    let energy = |psi: &[f64], v: &[f64]| {
        let s = edge_sum(psi.len(), |i| {
            let (a, b) = (psi[i + 1] - psi[i], v[i + 1] - v[i]);
            a * a + b * b
        });
        2.0 * s / dx
    };
    let (e, o) = (pair.even(), pair.odd());
    Ok((energy(&e.psi, &e.v), energy(&o.psi, &o.v)))
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Returns `(Ej1_bar, Ej2_bar, Ej1_dual_bar, Ej2_dual_bar)`.
///
/// The dual forms are `(E- - E+)/2` and `-(1/8) int |(V- - V+)'|^2`.
pub fn josephson_energies(pair: &ParityPair) -> Result<(f64, f64, f64, f64)> {
    require_converged(pair)?;
    let (ic1, ic2) = critical_currents(pair);
    let (ej1, ej2) = (ic1, 0.5 * ic2);
    let (ej1_dual, ej2_dual) = dual_energies(pair);
    for (quantity, primary, dual) in [("Ej1", ej1, ej1_dual), ("Ej2", ej2, ej2_dual)] {
        if relative_gap(primary, dual) > CONSISTENCY_TOL {
            return Err(Error::Inconsistent {
                quantity,
                primary,
                dual,
            });
        }
    }
    Ok((ej1, ej2, ej1_dual, ej2_dual))
}

fn dual_energies(pair: &ParityPair) -> (f64, f64) {
    let dx = pair.grid().dx();
    let (e, o) = (pair.even(), pair.odd());
    let n = e.psi.len();
    // (E- - E+)/2 evaluated termwise to avoid cancellation
    let diff = edge_sum(n, |i| {
        let (pm, pp) = (o.psi[i + 1] - o.psi[i], e.psi[i + 1] - e.psi[i]);
        let (vm, vp) = (o.v[i + 1] - o.v[i], e.v[i + 1] - e.v[i]);
        (pm - pp) * (pm + pp) + (vm - vp) * (vm + vp)
    });
    let ej1_dual = diff / dx;
    let grad_w2 = edge_sum(n, |i| {
        let dw = (o.v[i + 1] - e.v[i + 1]) - (o.v[i] - e.v[i]);
        dw * dw
    });
    (ej1_dual, -0.125 * 2.0 * grad_w2 / dx)
}

/// Returns `(C_J_bar, d_bar, norm_bar)` for finite islands.
pub fn electrostatics(pair: &ParityPair) -> Result<(f64, f64, f64)> {
    if !(pair.geometry().kind() == GeometryKind::FiniteIslands) {
        return Err(Error::UnsupportedGeometry(
            "capacitance and dipole separation need finite islands",
        ));
    }
    let dx = pair.grid().dx();
    let x = pair.grid().nodes();
    let (e, o) = (pair.even(), pair.odd());
    let sq: Vec<f64> = e.psi.iter().map(|p| p * p).collect();
    let norm = full_line(&sq, dx);
    if norm <= 0.0 {
        return Err(Error::InvalidInput("parity state has zero norm".into()));
    }
    let overlap: Vec<f64> = e.psi.iter().zip(&o.psi).map(|(a, b)| a * b).collect();
    let moment: Vec<f64> = overlap.iter().zip(x).map(|(p, x)| p * x).collect();
    let d = 4.0 / norm * half_line(&moment, dx);
    let t = nested_overlap_integral(&overlap, dx);
    Ok((norm * norm / (8.0 * t), d, norm))
}

/// `int_0^inf p(x) int_0^x int_{x'}^inf p(x'') dx'' dx' dx` by two
/// cumulative trapezoid passes.
pub fn nested_overlap_integral(p: &[f64], dx: f64) -> f64 {
    let n = p.len();
    if n < 2 {
        return 0.0;
    }
    // tail[i] = int_{x_i}^{x_max} p
    let mut tail = vec![0.0; n];
    for i in (0..n - 1).rev() {
        tail[i] = tail[i + 1] + 0.5 * dx * (p[i] + p[i + 1]);
    }
    // head[i] = int_0^{x_i} tail
    let mut head = vec![0.0; n];
    for i in 1..n {
        head[i] = head[i - 1] + 0.5 * dx * (tail[i - 1] + tail[i]);
    }
    let integrand: Vec<f64> = p.iter().zip(&head).map(|(a, b)| a * b).collect();
    half_line(&integrand, dx)
}

/// All unitless parameters of a converged pair.
pub fn extract(pair: &ParityPair) -> Result<JunctionParams> {
    let (k1, k2, ic1, ic2) = josephson_couplings(pair)?;
    let (eplus, eminus) = parity_energies(pair)?;
    let (ej1, ej2, ej1_dual, ej2_dual) = josephson_energies(pair)?;
    let (c_j, d, norm) = if pair.geometry().kind() == GeometryKind::FiniteIslands {
        let (c, d, n) = electrostatics(pair)?;
        (Some(c), Some(d), Some(n))
    } else {
        (None, None, None)
    };
    Ok(JunctionParams {
        k1_bar: k1,
        k2_bar: k2,
        ej1_bar: ej1,
        ej2_bar: ej2,
        ej1_dual_bar: ej1_dual,
        ej2_dual_bar: ej2_dual,
        eplus_bar: eplus,
        eminus_bar: eminus,
        ic1_bar: ic1,
        ic2_bar: ic2,
        c_j_bar: c_j,
        d_bar: d,
        norm_bar: norm,
    })
}
