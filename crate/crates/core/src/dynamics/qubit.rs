use serde::{Deserialize, Serialize};

use super::TwoModeParams;
use crate::junction::JunctionParams;
use crate::{Error, Result};

/// Inputs of the charge-qubit Hamiltonian and the second-order expansion
/// `H = H0(Phi) + H1 Q + H2(Phi) Q^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCoefficients {
    /// `1 / (2 C_J_bar)`.
    pub charging: f64,
    /// `Q^2` coefficient in the dynamics energy unit.
    pub charging_energy: f64,
    /// `d_bar`; `H1 = -d V'_ext`.
    pub dipole: f64,
    pub ej1: f64,
    pub ej2: f64,
    /// `H2 = c0 + c1 + c2 cos(Phi) + c3 cos(2 Phi)`, listed as
    /// `[charging_energy, ej2, ej1/2, ej2]`.
    pub h2_terms: [f64; 4],
    /// Charging term exceeds the combined Josephson contributions to `H2`.
    pub charging_dominates: bool,
    pub report: String,
}

pub fn qubit_expansion(params: &JunctionParams) -> Result<QubitCoefficients> {
    let (Some(c_j), Some(d)) = (params.c_j_bar, params.d_bar) else {
        return Err(Error::UnsupportedGeometry(
            "qubit expansion needs the capacitance and dipole separation of finite islands",
        ));
    };
    if !(c_j > 0.0) {
        return Err(Error::InvalidInput(format!(
            "capacitance must be positive, got {c_j}"
        )));
    }
    let TwoModeParams { ej1, ej2, charging } = TwoModeParams::from_junction(params);
    let h2_terms = [charging, ej2, 0.5 * ej1, ej2];
    let charging_dominates = charging > 2.0 * ej2.abs() + 0.5 * ej1.abs();
    let report = format!(
        "H0 = -({ej1:e}) cos(Phi) - 2 ({ej2:e}) cos^2(Phi)\n\
         H1 = -({d:e}) V'_ext Q\n\
         H2 = [({charging:e}) + ({ej2:e}) + ({:e}) cos(Phi) + ({ej2:e}) cos(2 Phi)] Q^2\n\
         charging 1/(2 C_J) = {:e}; charging term dominates H2: {charging_dominates}\n",
        0.5 * ej1,
        0.5 / c_j,
    );
    Ok(QubitCoefficients {
        charging: 0.5 / c_j,
        charging_energy: charging,
        dipole: d,
        ej1,
        ej2,
        h2_terms,
        charging_dominates,
        report,
    })
}
