//! Physical constants, length scales, junction geometry and the spatial grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// CODATA 2018 values (exact where the SI defines them).
pub mod constants {
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const PLANCK: f64 = 6.626_070_15e-34;
    pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
    pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
    pub const VACUUM_PERMITTIVITY: f64 =
        1.0 / (VACUUM_PERMEABILITY * SPEED_OF_LIGHT * SPEED_OF_LIGHT);
}

use constants::*;

/// London depth used to pick the default bulk density.
pub const DEFAULT_LONDON_DEPTH: f64 = 100e-9;

/// Default cross-section, 1 µm².
pub const DEFAULT_CROSS_SECTION: f64 = 1e-12;

/// Material parameters of the superconducting condensate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    /// Boson charge `q` in coulomb (signed).
    pub charge: f64,
    /// Boson mass `m` in kg.
    pub mass: f64,
    /// Bulk number density `n_s` in 1/m³.
    pub density: f64,
    /// Cross-sectional area `sigma` in m².
    pub cross_section: f64,
}

impl Default for MaterialSpec {
    /// Cooper pairs (`q = -2e`, `m = 2 m_e`) with a 100 nm London depth.
    fn default() -> Self {
        let charge = -2.0 * ELEMENTARY_CHARGE;
        let mass = 2.0 * ELECTRON_MASS;
        MaterialSpec {
            charge,
            mass,
            density: density_for_london_depth(charge, mass, DEFAULT_LONDON_DEPTH),
            cross_section: DEFAULT_CROSS_SECTION,
        }
    }
}

/// Bulk density that yields the requested London penetration depth.
pub fn density_for_london_depth(charge: f64, mass: f64, lambda_l: f64) -> f64 {
    mass / (VACUUM_PERMEABILITY * charge * charge * lambda_l * lambda_l)
}

impl MaterialSpec {
    pub fn new(charge: f64, mass: f64, density: f64, cross_section: f64) -> Result<Self> {
        let spec = MaterialSpec {
            charge,
            mass,
            density,
            cross_section,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.charge, self.mass, self.density, self.cross_section]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("material parameters must be finite".into()));
        }
        if self.charge == 0.0 {
            return Err(Error::Config("boson charge must be nonzero".into()));
        }
        if self.mass <= 0.0 {
            return Err(Error::Config("boson mass must be positive".into()));
        }
        if self.density <= 0.0 {
            return Err(Error::Config("bulk density must be positive".into()));
        }
        if self.cross_section <= 0.0 {
            return Err(Error::Config("cross-section must be positive".into()));
        }
        Ok(())
    }

    /// Flux quantum `h/q` (signed with the charge).
    pub fn flux_quantum(&self) -> f64 {
        PLANCK / self.charge
    }

    /// Total superconducting charge `Q0 = qN` for `bosons` carriers.
    pub fn total_charge(&self, bosons: f64) -> f64 {
        self.charge * bosons
    }
}

/// Derived length scales and the conversion factors from unitless output
/// to SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    /// London penetration depth, m.
    pub lambda_l: f64,
    /// Compton wavelength of the boson, m.
    pub lambda_c: f64,
    /// Healing length, m.
    pub xi: f64,
    /// `m c xi sigma / (mu0 |q| lambda_L^3)`, A. Multiplies `Ic_bar`.
    pub current_prefactor: f64,
    /// `sigma m hbar c xi / (mu0 q^2 lambda_L^3)`, J. Multiplies `Ej_bar`.
    pub energy_unit: f64,
    /// `eps0 sigma / xi`, F. Multiplies `C_J_bar`.
    pub capacitance_unit: f64,
    /// Density scale `m / (mu0 q^2 lambda_L^2)`, 1/m³; `|psi|^2 = density_unit * |psi_bar|^2`.
    pub density_unit: f64,
}

impl ScaleSet {
    /// Number of bosons in a junction with unitless normalisation `norm_bar`.
    pub fn boson_number(&self, norm_bar: f64, material: &MaterialSpec) -> f64 {
        material.cross_section * self.xi * self.density_unit * norm_bar
    }
}

pub fn derive_scales(material: &MaterialSpec) -> Result<ScaleSet> {
    material.validate()?;
    let MaterialSpec {
        charge: q,
        mass: m,
        density: n_s,
        cross_section: sigma,
    } = *material;
    let lambda_l = (m / (VACUUM_PERMEABILITY * n_s * q * q)).sqrt();
    let lambda_c = PLANCK / (m * SPEED_OF_LIGHT);
    let xi = (lambda_l * lambda_c / (4.0 * PI)).sqrt();
    let lambda_l3 = lambda_l * lambda_l * lambda_l;
    let current_prefactor =
        m * SPEED_OF_LIGHT * xi * sigma / (VACUUM_PERMEABILITY * q.abs() * lambda_l3);
    let energy_unit =
        sigma * m * HBAR * SPEED_OF_LIGHT * xi / (VACUUM_PERMEABILITY * q * q * lambda_l3);
    Ok(ScaleSet {
        lambda_l,
        lambda_c,
        xi,
        current_prefactor,
        energy_unit,
        capacitance_unit: VACUUM_PERMITTIVITY * sigma / xi,
        density_unit: m / (VACUUM_PERMEABILITY * q * q * lambda_l * lambda_l),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    SemiInfinite,
    FiniteIslands,
}

/// Mirror-symmetric jellium geometry in units of `xi`.
///
/// `SemiInfinite` fills `|x| > gap/2`; `FiniteIslands` fills
/// `gap/2 < |x| <= gap/2 + island`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    SemiInfinite { gap: f64 },
    FiniteIslands { gap: f64, island: f64 },
}

impl Geometry {
    pub fn semi_infinite(gap: f64) -> Result<Self> {
        let g = Geometry::SemiInfinite { gap };
        g.validate()?;
        Ok(g)
    }

    pub fn finite_islands(gap: f64, island: f64) -> Result<Self> {
        let g = Geometry::FiniteIslands { gap, island };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let gap = self.gap();
        if !(gap.is_finite() && gap >= 0.0) {
            return Err(Error::Config(format!(
                "gap must be finite and >= 0, got {gap}"
            )));
        }
        if let Geometry::FiniteIslands { island, .. } = *self {
            if !(island.is_finite() && island > 0.0) {
                return Err(Error::Config(format!(
                    "island length must be finite and > 0, got {island}"
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> GeometryKind {
        match self {
            Geometry::SemiInfinite { .. } => GeometryKind::SemiInfinite,
            Geometry::FiniteIslands { .. } => GeometryKind::FiniteIslands,
        }
    }

    pub fn gap(&self) -> f64 {
        match *self {
            Geometry::SemiInfinite { gap } | Geometry::FiniteIslands { gap, .. } => gap,
        }
    }

    /// Same kind and island length, different gap.
    pub fn with_gap(&self, gap: f64) -> Result<Self> {
        let g = match *self {
            Geometry::SemiInfinite { .. } => Geometry::SemiInfinite { gap },
            Geometry::FiniteIslands { island, .. } => Geometry::FiniteIslands { gap, island },
        };
        g.validate()?;
        Ok(g)
    }

    /// Outermost material coordinate on the positive half-line.
    pub fn extent(&self) -> f64 {
        match *self {
            Geometry::SemiInfinite { gap } => gap / 2.0,
            Geometry::FiniteIslands { gap, island } => gap / 2.0 + island,
        }
    }

    /// Indicator of the material region at `x`.
    pub fn contains(&self, x: f64) -> bool {
        let r = x.abs();
        match *self {
            Geometry::SemiInfinite { gap } => r > gap / 2.0,
            Geometry::FiniteIslands { gap, island } => r > gap / 2.0 && r <= gap / 2.0 + island,
        }
    }

    /// Length of `[lo, hi]` covered by material (both mirror images).
    pub fn covered_length(&self, lo: f64, hi: f64) -> f64 {
        let (inner, outer) = match *self {
            Geometry::SemiInfinite { gap } => (gap / 2.0, f64::INFINITY),
            Geometry::FiniteIslands { gap, island } => (gap / 2.0, gap / 2.0 + island),
        };
        let overlap = |a: f64, b: f64| (hi.min(b) - lo.max(a)).max(0.0);
        overlap(inner, outer) + overlap(-outer, -inner)
    }
}

/// Uniform half-line grid `0, dx, ..., x_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_max: f64,
    dx: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Full-line coordinates `-x_max, ..., 0, ..., x_max`.
    pub fn full_line_nodes(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..2 * n - 1)
            .map(|j| {
                if j < n - 1 {
                    -self.nodes[n - 1 - j]
                } else {
                    self.nodes[j + 1 - n]
                }
            })
            .collect()
    }
}

/// Tolerance on `x_max / dx` being an integer.
const RATIO_TOL: f64 = 1e-9;

pub fn build_grid(x_max: f64, dx: f64) -> Result<Grid> {
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::Config(format!(
            "x_max must be positive, got {x_max}"
        )));
    }
    if !(dx.is_finite() && dx > 0.0) {
        return Err(Error::Config(format!("dx must be positive, got {dx}")));
    }
    let ratio = x_max / dx;
    let cells = ratio.round();
    if (ratio - cells).abs() > RATIO_TOL || cells < 1.0 {
        return Err(Error::Config(format!(
            "x_max/dx = {ratio} is not a positive integer"
        )));
    }
    let cells = cells as usize;
    let nodes = (0..=cells).map(|i| i as f64 * dx).collect();
    Ok(Grid { x_max, dx, nodes })
}

/// Unitless jellium density `-rho / (q n_s)` on the grid nodes.
///
/// Each node carries the fraction of its cell `[x - dx/2, x + dx/2]` that is
/// material, so nodes away from an edge are exactly 0 or 1 and a node lying
/// on an edge is 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundProfile {
    values: Vec<f64>,
}

impl BackgroundProfile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn sample_background(geometry: &Geometry, grid: &Grid) -> Result<BackgroundProfile> {
    geometry.validate()?;
    if geometry.kind() == GeometryKind::FiniteIslands && geometry.extent() > grid.x_max() {
        return Err(Error::Config(format!(
            "islands extend to {} beyond the grid end {}",
            geometry.extent(),
            grid.x_max()
        )));
    }
    let h = grid.dx();
    let values = grid
        .nodes()
        .iter()
        .map(|&x| {
            let f = geometry.covered_length(x - 0.5 * h, x + 0.5 * h) / h;
            snap_fraction(f)
        })
        .collect();
    Ok(BackgroundProfile { values })
}

// Removes rounding noise from cell boundaries so that interior nodes are
// exactly 0 or 1 and edge nodes exactly 1/2.
fn snap_fraction(f: f64) -> f64 {
    const EPS: f64 = 1e-12;
    for target in [0.0, 0.5, 1.0] {
        if (f - target).abs() < EPS {
            return target;
        }
    }
    f.clamp(0.0, 1.0)
}
