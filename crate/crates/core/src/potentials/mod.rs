//! Reduced potentials `U(r) = 2 mu V(r) / hbar^2` and scattering channels.

mod cesium;
mod tabulated;
mod woods_saxon;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use cesium::{cesium_potential, CesiumParams, CS2_REDUCED_MASS};
pub use tabulated::{
    load_tabulated, parse_tabulated, tabulated_potential, Interpolation, TabulatedTail,
};
pub use woods_saxon::{
    n12c_table, woods_saxon_channel, SpinOrbitSign, TableRow, WoodsSaxon, N12C_DIFFUSENESS,
    N12C_RADIUS, N12C_SPIN_ORBIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitName {
    /// Hartree atomic units, lengths in bohr.
    Atomic,
    /// MeV and fm.
    Nuclear,
    /// `U` supplied directly; lengths in an arbitrary unit `L`.
    Reduced,
}

/// Neutron and carbon-12 rest energies in MeV plus `hbar c` in MeV fm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuclearConstants {
    pub m_projectile: f64,
    pub m_target: f64,
    pub hbar_c: f64,
}

impl Default for NuclearConstants {
    fn default() -> Self {
        Self { m_projectile: 939.565, m_target: 11_177.93, hbar_c: 197.327 }
    }
}

impl NuclearConstants {
    /// `mu c^2` in MeV.
    pub fn reduced_mass(&self) -> f64 {
        self.m_projectile * self.m_target / (self.m_projectile + self.m_target)
    }

    /// `2 mu / hbar^2` in MeV^-1 fm^-2.
    pub fn two_mu_over_hbar2(&self) -> f64 {
        2.0 * self.reduced_mass() / (self.hbar_c * self.hbar_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub name: UnitName,
    /// `2 mu / hbar^2`, converting an energy into `U` in length^-2.
    pub energy_to_reduced: f64,
}

impl UnitSystem {
    /// Atomic units with `hbar = 1`: `U = 2 m V`, `mass` in electron masses.
    pub fn atomic(mass: f64) -> Self {
        Self { name: UnitName::Atomic, energy_to_reduced: 2.0 * mass }
    }

    pub fn nuclear(constants: &NuclearConstants) -> Self {
        Self { name: UnitName::Nuclear, energy_to_reduced: constants.two_mu_over_hbar2() }
    }

    pub fn reduced() -> Self {
        Self { name: UnitName::Reduced, energy_to_reduced: 1.0 }
    }

    pub fn length_unit(&self) -> &'static str {
        match self.name {
            UnitName::Atomic => "a0",
            UnitName::Nuclear => "fm",
            UnitName::Reduced => "L",
        }
    }

    pub fn energy_unit(&self) -> &'static str {
        match self.name {
            UnitName::Atomic => "Eh",
            UnitName::Nuclear => "MeV",
            UnitName::Reduced => "L^-2",
        }
    }

    /// `length_unit^power`, e.g. `fm^-3`.
    pub fn length_power(&self, power: i32) -> String {
        if power == 1 {
            self.length_unit().to_string()
        } else {
            format!("{}^{}", self.length_unit(), power)
        }
    }

    pub fn to_reduced(&self, v: f64) -> f64 {
        v * self.energy_to_reduced
    }

    pub fn to_energy(&self, u: f64) -> f64 {
        u / self.energy_to_reduced
    }

    pub fn default_r_core(&self) -> f64 {
        match self.name {
            UnitName::Atomic => 1e-3,
            UnitName::Nuclear | UnitName::Reduced => 1e-6,
        }
    }
}

/// Large-r behaviour of a potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailLaw {
    /// `U ~ r^-n`.
    Power(f64),
    /// Exponential decay or compact support.
    ShortRange,
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `U(r)` in length^-2. Below `r_core` the value at `r_core` is used.
#[derive(Clone)]
pub struct ReducedPotential {
    evaluator: Evaluator,
    pub r_core: f64,
    pub tail: TailLaw,
    pub label: String,
    pub units: UnitSystem,
    /// Radii where `U` or a low derivative is discontinuous; integrators
    /// stop there instead of stepping across.
    pub breakpoints: Vec<f64>,
    zero: bool,
}

impl fmt::Debug for ReducedPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedPotential")
            .field("label", &self.label)
            .field("r_core", &self.r_core)
            .field("tail", &self.tail)
            .field("units", &self.units)
            .finish()
    }
}

impl ReducedPotential {
    pub fn new<F>(label: impl Into<String>, units: UnitSystem, tail: TailLaw, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            evaluator: Arc::new(f),
            r_core: units.default_r_core(),
            tail,
            label: label.into(),
            units,
            breakpoints: Vec::new(),
            zero: false,
        }
    }

    pub fn zero(units: UnitSystem) -> Self {
        let mut p = Self::new("zero", units, TailLaw::ShortRange, |_| 0.0);
        p.zero = true;
        p
    }

    pub fn with_r_core(mut self, r_core: f64) -> Result<Self> {
        if !(r_core > 0.0) {
            return Err(Error::Parameter(format!("r_core must be positive, got {r_core}")));
        }
        self.r_core = r_core;
        Ok(self)
    }

    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| p.is_finite() && *p > 0.0);
        points.sort_by(f64::total_cmp);
        self.breakpoints = points;
        self
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.evaluator)(r.max(self.r_core))
    }

    /// `V(r)` in the unit system's energy unit.
    pub fn energy(&self, r: f64) -> f64 {
        self.units.to_energy(self.eval(r))
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        match self.tail {
            TailLaw::Power(n) => Some(n),
            TailLaw::ShortRange => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Radius beyond which `|U| r^2` stays below `1e-3` of its peak.
    pub fn range_estimate(&self) -> f64 {
        self.range_estimate_with(1e-3)
    }

    pub fn range_estimate_with(&self, threshold: f64) -> f64 {
        let lo = self.r_core.max(1e-6).ln();
        let hi = 1e6f64.ln();
        let n = 4000;
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let r = (lo + (hi - lo) * i as f64 / n as f64).exp();
                (r, self.eval(r).abs() * r * r)
            })
            .collect();
        let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        if !(peak > 0.0) || !peak.is_finite() {
            return 1.0;
        }
        samples
            .iter()
            .rev()
            .find(|s| s.1 >= threshold * peak)
            .map(|s| s.0)
            .unwrap_or(1.0)
    }
}

/// `U = -u0` inside `r < radius`, zero outside.
pub fn square_well(u0: f64, radius: f64) -> Result<ReducedPotential> {
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!("square well radius must be positive, got {radius}")));
    }
    if u0 == 0.0 {
        return Ok(ReducedPotential::zero(UnitSystem::reduced()));
    }
    let p = ReducedPotential::new(
        format!("square well U0={u0} R={radius}"),
        UnitSystem::reduced(),
        TailLaw::ShortRange,
        move |r| if r < radius { -u0 } else { 0.0 },
    );
    Ok(p.with_breakpoints(vec![radius]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JCoupling {
    None,
    /// `j = l + 1/2`
    Plus,
    /// `j = l - 1/2`
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub l: u32,
    pub j: JCoupling,
    pub units: UnitSystem,
    /// In the unit system's mass unit (electron masses or MeV).
    pub reduced_mass: f64,
}

impl Channel {
    pub fn new(l: u32, j: JCoupling, units: UnitSystem, reduced_mass: f64) -> Result<Self> {
        if j == JCoupling::Minus && l == 0 {
            return Err(Error::Channel("j = l - 1/2 needs l >= 1".into()));
        }
        Ok(Self { l, j, units, reduced_mass })
    }

    /// Eigenvalue of `l.s`: `l/2` for `j = l + 1/2`, `-(l+1)/2` for `j = l - 1/2`.
    pub fn spin_orbit_weight(&self) -> f64 {
        let l = self.l as f64;
        match self.j {
            JCoupling::None => 0.0,
            JCoupling::Plus => 0.5 * l,
            JCoupling::Minus => -0.5 * (l + 1.0),
        }
    }

    /// Spectroscopic label such as `p3/2`.
    pub fn label(&self) -> String {
        let letter = ['s', 'p', 'd', 'f', 'g', 'h', 'i', 'k', 'l', 'm', 'n']
            .get(self.l as usize)
            .copied()
            .unwrap_or('?');
        match self.j {
            JCoupling::None => letter.to_string(),
            JCoupling::Plus => format!("{letter}{}/2", 2 * self.l + 1),
            JCoupling::Minus => format!("{letter}{}/2", 2 * self.l - 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_round_trip() {
        let nuc = UnitSystem::nuclear(&NuclearConstants::default());
        let atomic = UnitSystem::atomic(CS2_REDUCED_MASS);
        for units in [nuc, atomic, UnitSystem::reduced()] {
            for v in [-57.6, 1e-9, 3.25e4, -1.7e-12] {
                let back = units.to_energy(units.to_reduced(v));
                assert!((back - v).abs() <= 1e-12 * v.abs());
            }
        }
    }

    #[test]
    fn nuclear_conversion_factor() {
        let c = NuclearConstants::default();
        assert!((c.two_mu_over_hbar2() - 0.044_518).abs() < 2e-6);
    }

    #[test]
    fn spin_orbit_trace_identity() {
        let u = UnitSystem::reduced();
        for l in 1..12 {
            let plus = Channel::new(l, JCoupling::Plus, u, 1.0).unwrap().spin_orbit_weight();
            let minus = Channel::new(l, JCoupling::Minus, u, 1.0).unwrap().spin_orbit_weight();
            let lf = l as f64;
            assert_eq!((lf + 1.0) * plus + lf * minus, 0.0);
        }
    }

    #[test]
    fn minus_coupling_needs_l() {
        let r = Channel::new(0, JCoupling::Minus, UnitSystem::reduced(), 1.0);
        assert!(matches!(r, Err(Error::Channel(_))));
        let c = Channel::new(2, JCoupling::Minus, UnitSystem::reduced(), 1.0).unwrap();
        assert_eq!(c.label(), "d3/2");
    }

    #[test]
    fn square_well_shape() {
        let w = square_well(2.0, 1.5).unwrap();
        assert_eq!(w.eval(1.0), -2.0);
        assert_eq!(w.eval(1.5), 0.0);
        assert_eq!(w.breakpoints, vec![1.5]);
        assert!(square_well(0.0, 1.0).unwrap().is_zero());
        assert!(square_well(1.0, 0.0).is_err());
        assert!((w.range_estimate() - 1.5).abs() < 0.01);
    }

    #[test]
    fn core_clamp() {
        let p = ReducedPotential::new("lin", UnitSystem::reduced(), TailLaw::ShortRange, |r| r)
            .with_r_core(0.5)
            .unwrap();
        assert_eq!(p.eval(0.1), 0.5);
        assert_eq!(p.eval(2.0), 2.0);
    }
}
