use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundKind {
    Trivial,
    PhiJunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub kind: GroundKind,
    pub n_star: f64,
    /// Non-negative representative; a phi junction is also minimal at `-phi_star`.
    pub phi_star: f64,
    /// True for phi junctions, whose minimum is two-fold.
    pub two_fold: bool,
    /// Set on the boundary `-ej1 = 4 ej2` between the two branches.
    pub degenerate: bool,
    /// Reduced energy at the minimum.
    pub energy: f64,
}

/// `n^2 - ej1 sqrt(1 - n^2) cos(phi) - 2 ej2 (1 - n^2) cos^2(phi)`.
pub fn reduced_hamiltonian(n: f64, phi: f64, ej1: f64, ej2: f64) -> f64 {
    let s2 = 1.0 - n * n;
    let c = phi.cos();
    n * n - ej1 * s2.max(0.0).sqrt() * c - 2.0 * ej2 * s2 * c * c
}

pub fn classify_ground_state(ej1: f64, ej2: f64) -> Result<GroundState> {
    if !(ej1.is_finite() && ej1 > 0.0 && ej2.is_finite() && ej2 < 0.0) {
        return Err(Error::InvalidInput(format!(
            "ground-state classification needs ej1 > 0 and ej2 < 0, got ({ej1}, {ej2})"
        )));
    }
    let (kind, phi_star, degenerate) = if -ej1 < 4.0 * ej2 {
        (GroundKind::Trivial, 0.0, false)
    } else if -ej1 == 4.0 * ej2 {
        (GroundKind::Trivial, 0.0, true)
    } else {
        (GroundKind::PhiJunction, (-ej1 / (4.0 * ej2)).acos(), false)
    };
    Ok(GroundState {
        kind,
        n_star: 0.0,
        phi_star,
        two_fold: kind == GroundKind::PhiJunction,
        degenerate,
        energy: reduced_hamiltonian(0.0, phi_star, ej1, ej2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeMinimum {
    pub energy: f64,
    pub n: f64,
    pub phi: f64,
    /// Spacing of the phase grid.
    pub phi_step: f64,
}

/// Brute-force minimum of [`reduced_hamiltonian`] over `n` in
/// `linspace(-1, 1, points)` and `phi = 2 pi (k - points/2) / points`, which
/// includes `phi = 0` exactly.
pub fn grid_minimum(ej1: f64, ej2: f64, points: usize) -> LandscapeMinimum {
    let phi_step = 2.0 * PI / points as f64;
    let n_step = 2.0 / (points.max(2) - 1) as f64;
    let mut best = LandscapeMinimum {
        energy: f64::INFINITY,
        n: 0.0,
        phi: 0.0,
        phi_step,
    };
    for i in 0..points {
        let n = -1.0 + i as f64 * n_step;
        for k in 0..points {
            let phi = (k as f64 - (points / 2) as f64) * phi_step;
            let e = reduced_hamiltonian(n, phi, ej1, ej2);
            if e < best.energy {
                best = LandscapeMinimum {
                    energy: e,
                    n,
                    phi,
                    phi_step,
                };
            }
        }
    }
    best
}
