use serde::{Deserialize, Serialize};

use super::{Channel, JCoupling, ReducedPotential, TailLaw, UnitName};
use crate::{Error, Result};

pub const N12C_RADIUS: f64 = 2.86;
pub const N12C_DIFFUSENESS: f64 = 0.65;
pub const N12C_SPIN_ORBIT: f64 = 5.5;

/// Sign with which the spin-orbit form factor enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinOrbitSign {
    /// `V = -V0 f - c_ls Vso f`: binding for `j = l + 1/2`.
    #[default]
    Attractive,
    /// `V = -V0 f + c_ls Vso f`.
    AsPrinted,
}

/// Woods-Saxon central well with a spin-orbit term of the same shape, in MeV and fm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WoodsSaxon {
    pub depth: f64,
    pub radius: f64,
    pub diffuseness: f64,
    pub spin_orbit: f64,
    pub sign: SpinOrbitSign,
}

impl WoodsSaxon {
    /// n + 12C geometry with the given central depth.
    pub fn n12c(depth: f64) -> Self {
        Self {
            depth,
            radius: N12C_RADIUS,
            diffuseness: N12C_DIFFUSENESS,
            spin_orbit: N12C_SPIN_ORBIT,
            sign: SpinOrbitSign::default(),
        }
    }

    pub fn form_factor(&self, r: f64) -> f64 {
        1.0 / (1.0 + ((r - self.radius) / self.diffuseness).exp())
    }

    /// `V(r)` in MeV for spin-orbit weight `c_ls`.
    pub fn energy(&self, r: f64, c_ls: f64) -> f64 {
        let so = match self.sign {
            SpinOrbitSign::Attractive => -c_ls * self.spin_orbit,
            SpinOrbitSign::AsPrinted => c_ls * self.spin_orbit,
        };
        (-self.depth + so) * self.form_factor(r)
    }
}

pub fn woods_saxon_channel(ws: &WoodsSaxon, channel: &Channel) -> Result<ReducedPotential> {
    if !(ws.diffuseness > 0.0) {
        return Err(Error::Parameter(format!(
            "Woods-Saxon diffuseness must be positive, got {}",
            ws.diffuseness
        )));
    }
    if channel.j == JCoupling::None && ws.spin_orbit != 0.0 && channel.l > 0 {
        return Err(Error::Channel(format!(
            "l = {} with a spin-orbit term needs j = l +- 1/2",
            channel.l
        )));
    }
    if channel.units.name != UnitName::Nuclear {
        return Err(Error::Channel("Woods-Saxon parameters are in MeV and fm".into()));
    }
    let c_ls = channel.spin_orbit_weight();
    let units = channel.units;
    let ws = *ws;
    Ok(ReducedPotential::new(
        format!("Woods-Saxon V0={} {}", ws.depth, channel.label()),
        units,
        TailLaw::ShortRange,
        move |r| units.to_reduced(ws.energy(r, c_ls)),
    ))
}

/// One n + 12C channel: depth and the published low-energy parameters
/// (this method, and the reference R-matrix calculation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub label: &'static str,
    pub l: u32,
    pub j: JCoupling,
    pub depth: f64,
    pub a: f64,
    pub r: f64,
    pub p: f64,
    pub a_reference: f64,
    pub r_reference: f64,
}

const N12C: [TableRow; 5] = [
    TableRow { label: "s1/2", l: 0, j: JCoupling::Plus, depth: 57.6, a: 6.51, r: 3.58, p: -0.055, a_reference: 6.43, r_reference: 3.56 },
    TableRow { label: "p3/2", l: 1, j: JCoupling::Plus, depth: 45.1, a: 9.16, r: -1.68, p: 0.038, a_reference: 8.85, r_reference: -1.71 },
    TableRow { label: "p1/2", l: 1, j: JCoupling::Minus, depth: 45.1, a: 23.21, r: -1.15, p: 0.26, a_reference: 22.75, r_reference: -1.16 },
    TableRow { label: "d5/2", l: 2, j: JCoupling::Plus, depth: 56.15, a: 179.6, r: -0.32, p: -28.65, a_reference: 159.9, r_reference: -0.32 },
    TableRow { label: "d3/2", l: 2, j: JCoupling::Minus, depth: 56.15, a: -56.1, r: -0.061, p: -2864.0, a_reference: -57.2, r_reference: -0.065 },
];

pub fn n12c_table() -> &'static [TableRow; 5] {
    &N12C
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{NuclearConstants, UnitSystem};

    fn channel(l: u32, j: JCoupling) -> Channel {
        let c = NuclearConstants::default();
        Channel::new(l, j, UnitSystem::nuclear(&c), c.reduced_mass()).unwrap()
    }

    #[test]
    fn central_depth_at_origin() {
        let ws = WoodsSaxon::n12c(57.6);
        let v = ws.energy(0.0, 0.0);
        assert!((v + 57.6 / (1.0 + (-4.4f64).exp())).abs() < 1e-12);
        assert!((v + 56.9).abs() < 0.05);
    }

    #[test]
    fn p_channels_differ_only_by_weight() {
        let ws = WoodsSaxon::n12c(45.1);
        let p32 = woods_saxon_channel(&ws, &channel(1, JCoupling::Plus)).unwrap();
        let p12 = woods_saxon_channel(&ws, &channel(1, JCoupling::Minus)).unwrap();
        let f = ws.form_factor(1.0);
        assert!((p32.energy(1.0) - (-45.1 - 0.5 * 5.5) * f).abs() < 1e-12);
        assert!((p12.energy(1.0) - (-45.1 + 1.0 * 5.5) * f).abs() < 1e-12);

        let printed = WoodsSaxon { sign: SpinOrbitSign::AsPrinted, ..ws };
        let p32 = woods_saxon_channel(&printed, &channel(1, JCoupling::Plus)).unwrap();
        assert!((p32.energy(1.0) - (-45.1 + 0.5 * 5.5) * f).abs() < 1e-12);
    }

    #[test]
    fn spin_orbit_needs_coupling() {
        let ws = WoodsSaxon::n12c(45.1);
        assert!(woods_saxon_channel(&ws, &channel(1, JCoupling::None)).is_err());
        let no_so = WoodsSaxon { spin_orbit: 0.0, ..ws };
        assert!(woods_saxon_channel(&no_so, &channel(1, JCoupling::None)).is_ok());
    }

    #[test]
    fn table_shapes() {
        let t = n12c_table();
        assert_eq!(t.len(), 5);
        assert_eq!(t[1].depth, t[2].depth);
        assert_eq!(t[3].label, "d5/2");
    }
}
