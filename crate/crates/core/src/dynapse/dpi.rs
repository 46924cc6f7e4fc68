use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Differential pair integrator operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpiParams {
    pub i_th: f64,
    pub i_tau: f64,
    pub i_in: f64,
    pub i_out: f64,
    /// Capacitance (F).
    pub c: f64,
    /// Thermal voltage (V).
    pub u_t: f64,
    pub kappa: f64,
}

impl DpiParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.i_th, self.i_tau, self.c, self.u_t, self.kappa];
        let currents = [self.i_in, self.i_out];
        if positive.iter().all(|v| *v > 0.0 && v.is_finite())
            && currents.iter().all(|v| *v >= 0.0 && v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::invalid(
                "DPI parameters must be positive (input and output currents nonnegative)",
            ))
        }
    }
}

/// `tau = C U_T / (kappa I_tau)`.
pub fn dpi_tau(p: &DpiParams) -> Result<f64> {
    p.validate()?;
    Ok(p.c * p.u_t / (p.kappa * p.i_tau))
}

/// `dI_out/dt = (1/tau) ((I_th/I_tau) I_in - I_out)`.
pub fn dpi_rate(p: &DpiParams) -> Result<f64> {
    let tau = dpi_tau(p)?;
    Ok(((p.i_th / p.i_tau) * p.i_in - p.i_out) / tau)
}

/// The squared rate in expanded form, `[kappa/(C U_T) (I_th I_in - I_out I_tau)]²`.
pub fn dpi_rate_squared(p: &DpiParams) -> Result<f64> {
    p.validate()?;
    Ok((p.kappa / (p.c * p.u_t) * (p.i_th * p.i_in - p.i_out * p.i_tau)).powi(2))
}
