use serde::{Deserialize, Serialize};

use super::{ReducedPotential, TailLaw, UnitSystem};
use crate::{Error, Result};

/// Reduced mass of the Cs2 pair in electron masses used with the default
/// parameters.
pub const CS2_REDUCED_MASS: f64 = 1.211e5;

/// Ground-state Cs-Cs potential in atomic units:
/// `V = beta/2 r^lambda e^(-eta r) - (C6/r^6 + C8/r^8 + C10/r^10) f_c(r)`
/// with `f_c = 1` for `r >= r_c` and `exp(-(r_c/r - 1)^2)` below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CesiumParams {
    pub beta: f64,
    pub lambda: f64,
    pub eta: f64,
    pub c6: f64,
    pub c8: f64,
    pub c10: f64,
    pub r_c: f64,
}

impl Default for CesiumParams {
    fn default() -> Self {
        Self {
            beta: 1.6e-3,
            lambda: 5.53,
            eta: 1.072,
            c6: 7020.0,
            c8: 1.1e6,
            c10: 1.7e8,
            r_c: 23.1654,
        }
    }
}

impl CesiumParams {
    pub fn cutoff(&self, r: f64) -> f64 {
        if r >= self.r_c {
            1.0
        } else {
            let x = self.r_c / r - 1.0;
            (-x * x).exp()
        }
    }

    /// `V(r)` in hartree.
    pub fn energy(&self, r: f64) -> f64 {
        let repulsive = 0.5 * self.beta * r.powf(self.lambda) * (-self.eta * r).exp();
        let r2 = r * r;
        let r6 = r2 * r2 * r2;
        let dispersion = (self.c6 + (self.c8 + self.c10 / r2) / r2) / r6;
        repulsive - dispersion * self.cutoff(r)
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("eta", self.eta),
            ("c6", self.c6),
            ("c8", self.c8),
            ("c10", self.c10),
            ("r_c", self.r_c),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Parameter(format!("cesium {name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

pub fn cesium_potential(params: CesiumParams, mass: f64) -> Result<ReducedPotential> {
    params.validate()?;
    if !(mass > 0.0) {
        return Err(Error::Parameter(format!("reduced mass must be positive, got {mass}")));
    }
    let units = UnitSystem::atomic(mass);
    let p = ReducedPotential::new(
        format!("Cs2 (m = {mass})"),
        units,
        TailLaw::Power(6.0),
        move |r| units.to_reduced(params.energy(r)),
    );
    Ok(p.with_breakpoints(vec![params.r_c]))
}
