//! Mesoscopic Josephson junction simulator.
//!
//! The crate solves the one-dimensional self-consistent Schrödinger–Poisson
//! problem for the even and odd stationary states of a superconducting
//! condensate in a jellium background, extracts the junction parameters
//! (critical currents, Josephson energies, capacitance, dipole separation)
//! by rectangle-rule quadrature, and integrates the resulting two-mode
//! junction dynamics.
//!
//! All solver-facing quantities are unitless: lengths are measured in the
//! healing length `xi`, the order parameter and potential are scaled so the
//! bulk solution is `psi = 1, V = 0`, and energies are measured in
//! [`ScaleSet::energy_unit`](model::ScaleSet). Physical units are applied only
//! at output.
//!
//! ```no_run
//! use mesojj::bvp::{solve_pair, SolverOptions};
//! use mesojj::junction::extract;
//! use mesojj::model::{build_grid, Geometry};
//!
//! let grid = build_grid(100.0, 0.25).unwrap();
//! let pair = solve_pair(&Geometry::semi_infinite(10.0).unwrap(), &grid, &SolverOptions::default()).unwrap();
//! let params = extract(&pair).unwrap();
//! println!("Ic1 = {:e}, Ic2 = {:e}", params.ic1_bar, params.ic2_bar);
//! ```

pub mod banded;
pub mod bvp;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod junction;
pub mod model;
pub mod par;
pub mod sweep;

pub use error::{Error, Result};
