//! TOML run configuration.
//!
//! ```toml
//! [potential]
//! kind = "cesium"          # cesium | woods-saxon | square-well | tabulated | zero
//! mass = 1.211e5
//!
//! [channel]
//! l = 0
//! j = "none"               # none | plus | minus
//!
//! [run]
//! mode = "scattering-length"
//! k = 0.0
//!
//! [coulomb]                # only read with --enable-coulomb or enabled = true
//! z1 = 1
//! z2 = 6
//! ```

use std::path::{Path, PathBuf};

use calogero::ere::Weighting;
use calogero::potentials::{
    cesium_potential, load_tabulated, square_well, woods_saxon_channel, CesiumParams, JCoupling, NuclearConstants,
    SpinOrbitSign, UnitName, UnitSystem, WoodsSaxon, CS2_REDUCED_MASS,
};
use calogero::{Channel, ReducedPotential};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ScatteringLength,
    EreFit,
    EreDirect,
    Trace,
    NuclearTable,
    OracleCheck,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialSection>,
    #[serde(default)]
    pub channel: ChannelSection,
    pub run: RunSection,
    #[serde(default)]
    pub coulomb: CoulombSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSection {
    Cesium {
        /// Reduced mass in electron masses.
        mass: Option<f64>,
        beta: Option<f64>,
        lambda: Option<f64>,
        eta: Option<f64>,
        c6: Option<f64>,
        c8: Option<f64>,
        c10: Option<f64>,
        r_c: Option<f64>,
        r_core: Option<f64>,
    },
    WoodsSaxon {
        /// Central depth in MeV; optional for nuclear-table.
        depth: Option<f64>,
        radius: Option<f64>,
        diffuseness: Option<f64>,
        spin_orbit: Option<f64>,
        spin_orbit_sign: Option<SpinOrbitSign>,
        m_projectile: Option<f64>,
        m_target: Option<f64>,
        hbar_c: Option<f64>,
        r_core: Option<f64>,
    },
    /// `U = -depth` inside `radius`, in reduced units.
    SquareWell { depth: f64, radius: f64, r_core: Option<f64> },
    /// Path relative to the config file.
    Tabulated { file: PathBuf, r_core: Option<f64> },
    Zero { units: Option<UnitName> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default)]
    pub l: u32,
    #[serde(default = "no_coupling")]
    pub j: JCoupling,
}

fn no_coupling() -> JCoupling {
    JCoupling::None
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { l: 0, j: JCoupling::None }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Option<Mode>,
    /// Wavenumber for scattering-length and trace.
    pub k: Option<f64>,
    /// Wavenumbers for oracle-check.
    pub k_values: Option<Vec<f64>>,
    /// Fixed ere-fit window; all three or none.
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub n_k: Option<usize>,
    pub weighting: Option<Weighting>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub phi_margin: Option<f64>,
    pub epsilon_r: Option<f64>,
    pub scale_length: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoulombSection {
    #[serde(default)]
    pub enabled: bool,
    pub z1: Option<i32>,
    pub z2: Option<i32>,
    /// Nuclear Bohr radius; derived from the mass constants when absent.
    pub a_n: Option<f64>,
}

/// What the command line can override.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub enable_coulomb: bool,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

/// Potential plus the unit system and channel it was built for.
pub struct Built {
    pub potential: ReducedPotential,
    pub channel: Channel,
    pub constants: Option<NuclearConstants>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(PotentialSection::Tabulated { file, .. }) = &mut cfg.potential {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.message().to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.mode.is_some() {
            self.run.mode = o.mode;
        }
        if o.out.is_some() {
            self.run.out.clone_from(&o.out);
        }
        if o.rtol.is_some() {
            self.run.rtol = o.rtol;
        }
        if o.atol.is_some() {
            self.run.atol = o.atol;
        }
        self.coulomb.enabled |= o.enable_coulomb;
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        self.run.mode.ok_or_else(|| CliError::config("run.mode", "missing (or pass --mode)"))
    }

    /// Checks that do not need the potential built.
    pub fn validate(&self) -> Result<(), CliError> {
        let mode = self.mode()?;
        let r = &self.run;
        for (key, v) in [("run.rtol", r.rtol), ("run.atol", r.atol), ("run.phi_margin", r.phi_margin)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(CliError::config(key, format!("must be positive, got {v}")));
                }
            }
        }
        if let Some(k) = r.k {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(CliError::config("run.k", format!("must be finite and non-negative, got {k}")));
            }
        }
        if let Some(ks) = &r.k_values {
            if ks.is_empty() || ks.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
                return Err(CliError::config("run.k_values", "need a non-empty list of positive wavenumbers"));
            }
        }
        match (r.k_min, r.k_max, r.n_k) {
            (None, None, None) => {}
            (Some(lo), Some(hi), Some(n)) => {
                if !(lo > 0.0) || !(hi > lo) {
                    return Err(CliError::config("run.k_min", format!("need 0 < k_min < k_max, got {lo} and {hi}")));
                }
                if n < 5 {
                    return Err(CliError::config("run.n_k", format!("need at least 5 points, got {n}")));
                }
            }
            _ => return Err(CliError::config("run.k_min", "k_min, k_max and n_k go together")),
        }
        if mode != Mode::NuclearTable && self.potential.is_none() {
            return Err(CliError::config("potential", "missing section"));
        }
        if mode == Mode::NuclearTable {
            if let Some(p) = &self.potential {
                if !matches!(p, PotentialSection::WoodsSaxon { .. }) {
                    return Err(CliError::config("potential.kind", "nuclear-table needs woods-saxon (or no potential section)"));
                }
            }
        }
        if matches!(mode, Mode::EreDirect) && self.channel.l != 0 {
            return Err(CliError::config("channel.l", "ere-direct is s-wave only; use ere-fit for l > 0"));
        }
        if self.coulomb.enabled {
            if !matches!(mode, Mode::ScatteringLength | Mode::EreFit) {
                return Err(CliError::config("run.mode", "the Coulomb pipeline supports scattering-length and ere-fit"));
            }
            if self.coulomb.z1.is_none() || self.coulomb.z2.is_none() {
                return Err(CliError::config("coulomb.z1", "z1 and z2 are required with Coulomb enabled"));
            }
        }
        Ok(())
    }

    pub fn nuclear_constants(&self) -> NuclearConstants {
        let d = NuclearConstants::default();
        match &self.potential {
            Some(PotentialSection::WoodsSaxon { m_projectile, m_target, hbar_c, .. }) => NuclearConstants {
                m_projectile: m_projectile.unwrap_or(d.m_projectile),
                m_target: m_target.unwrap_or(d.m_target),
                hbar_c: hbar_c.unwrap_or(d.hbar_c),
            },
            _ => d,
        }
    }

    pub fn spin_orbit_sign(&self) -> SpinOrbitSign {
        match &self.potential {
            Some(PotentialSection::WoodsSaxon { spin_orbit_sign: Some(s), .. }) => *s,
            _ => SpinOrbitSign::default(),
        }
    }

    pub fn build(&self) -> Result<Built, CliError> {
        let section = self.potential.as_ref().ok_or_else(|| CliError::config("potential", "missing section"))?;
        let (l, j) = (self.channel.l, self.channel.j);
        let channel = |units: UnitSystem, mass: f64| {
            Channel::new(l, j, units, mass).map_err(|e| CliError::config("channel.j", e.to_string()))
        };
        let key = |k: &'static str| move |e: calogero::Error| CliError::config(k, e.to_string());
        let core = |p: ReducedPotential, r_core: Option<f64>| match r_core {
            Some(r) => p.with_r_core(r).map_err(key("potential.r_core")),
            None => Ok(p),
        };
        let built = match section {
            PotentialSection::Cesium { mass, beta, lambda, eta, c6, c8, c10, r_c, r_core } => {
                let d = CesiumParams::default();
                let params = CesiumParams {
                    beta: beta.unwrap_or(d.beta),
                    lambda: lambda.unwrap_or(d.lambda),
                    eta: eta.unwrap_or(d.eta),
                    c6: c6.unwrap_or(d.c6),
                    c8: c8.unwrap_or(d.c8),
                    c10: c10.unwrap_or(d.c10),
                    r_c: r_c.unwrap_or(d.r_c),
                };
                let mass = mass.unwrap_or(CS2_REDUCED_MASS);
                let p = cesium_potential(params, mass).map_err(key("potential"))?;
                let ch = channel(p.units, mass)?;
                Built { potential: core(p, *r_core)?, channel: ch, constants: None }
            }
            PotentialSection::WoodsSaxon { depth, radius, diffuseness, spin_orbit, spin_orbit_sign, r_core, .. } => {
                let depth = depth.ok_or_else(|| CliError::config("potential.depth", "missing"))?;
                let d = WoodsSaxon::n12c(depth);
                let ws = WoodsSaxon {
                    depth,
                    radius: radius.unwrap_or(d.radius),
                    diffuseness: diffuseness.unwrap_or(d.diffuseness),
                    spin_orbit: spin_orbit.unwrap_or(d.spin_orbit),
                    sign: spin_orbit_sign.unwrap_or(d.sign),
                };
                let constants = self.nuclear_constants();
                let ch = channel(UnitSystem::nuclear(&constants), constants.reduced_mass())?;
                let p = woods_saxon_channel(&ws, &ch).map_err(key("potential"))?;
                Built { potential: core(p, *r_core)?, channel: ch, constants: Some(constants) }
            }
            PotentialSection::SquareWell { depth, radius, r_core } => {
                let p = square_well(*depth, *radius).map_err(key("potential"))?;
                let ch = channel(p.units, 1.0)?;
                Built { potential: core(p, *r_core)?, channel: ch, constants: None }
            }
            PotentialSection::Tabulated { file, r_core } => {
                let p = load_tabulated(file).map_err(|e| CliError::config("potential.file", format!("{}: {e}", file.display())))?;
                let ch = channel(p.units, 1.0)?;
                Built { potential: core(p, *r_core)?, channel: ch, constants: None }
            }
            PotentialSection::Zero { units } => {
                let u = match units.unwrap_or(UnitName::Reduced) {
                    UnitName::Atomic => UnitSystem::atomic(CS2_REDUCED_MASS),
                    UnitName::Nuclear => UnitSystem::nuclear(&NuclearConstants::default()),
                    UnitName::Reduced => UnitSystem::reduced(),
                };
                let ch = channel(u, 1.0)?;
                Built { potential: ReducedPotential::zero(u), channel: ch, constants: None }
            }
        };
        if self.coulomb.enabled && self.coulomb.a_n.is_none() && built.constants.is_none() {
            return Err(CliError::config("coulomb.a_n", "required unless the potential is woods-saxon"));
        }
        Ok(built)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        let c = RunConfig::parse(text)?;
        c.validate()?;
        Ok(c)
    }

    #[test]
    fn minimal_cesium() {
        let c = parse("[potential]\nkind = \"cesium\"\n[run]\nmode = \"scattering-length\"\n").unwrap();
        let b = c.build().unwrap();
        assert_eq!(b.channel.l, 0);
        assert_eq!(b.potential.units.energy_to_reduced, 2.0 * CS2_REDUCED_MASS);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("[potential]\nkind = \"cesium\"\n[run]\n", "run.mode"),
            ("[potential]\nkind = \"cesium\"\n[run]\nmode = \"trace\"\nrtol = -1.0\n", "run.rtol"),
            ("[run]\nmode = \"trace\"\n", "potential"),
            ("[potential]\nkind = \"cesium\"\n[channel]\nl = 1\n[run]\nmode = \"ere-direct\"\n", "channel.l"),
            ("[potential]\nkind = \"cesium\"\n[run]\nmode = \"ere-fit\"\nk_min = 1e-4\n", "run.k_min"),
            ("[potential]\nkind = \"zero\"\n[run]\nmode = \"trace\"\n[coulomb]\nenabled = true\nz1 = 1\nz2 = 1\n", "run.mode"),
        ];
        for (text, key) in cases {
            match parse(text) {
                Err(CliError::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("[potential]\nkind = \"cesium\"\nmas = 1.0\n[run]\nmode = \"trace\"\n").is_err());
        assert!(RunConfig::parse("[potential]\nkind = \"moon\"\n[run]\nmode = \"trace\"\n").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::parse("[potential]\nkind = \"zero\"\n[run]\nmode = \"trace\"\nrtol = 1e-8\n").unwrap();
        c.apply(&Overrides { mode: Some(Mode::ScatteringLength), rtol: Some(1e-12), ..Default::default() });
        assert_eq!(c.mode().unwrap(), Mode::ScatteringLength);
        assert_eq!(c.run.rtol, Some(1e-12));
    }

    #[test]
    fn woods_saxon_channel_needs_j() {
        let c = parse("[potential]\nkind = \"woods-saxon\"\ndepth = 45.1\n[channel]\nl = 1\n[run]\nmode = \"ere-fit\"\n").unwrap();
        assert!(matches!(c.build(), Err(CliError::Config { .. })));
        let c = parse("[potential]\nkind = \"woods-saxon\"\ndepth = 45.1\n[channel]\nl = 1\nj = \"plus\"\n[run]\nmode = \"ere-fit\"\n").unwrap();
        assert!(c.build().unwrap().constants.is_some());
    }
}
