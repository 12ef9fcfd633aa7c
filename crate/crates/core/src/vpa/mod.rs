//! Variable-phase (Calogero) equations for the scattering-length function
//! `a_l(k, r)` and the s-wave effective-range and shape functions.
//!
//! `a_l(k, r)` starts at zero at the inner cutoff and tends to
//! `-tan(delta_l)/k^(2l+1)` (or the scattering length when `k = 0`). Its
//! poles at bound-state thresholds are removed by integrating
//! `theta = atan(a / S)` against `phi = atan(r)`.

mod direct;
mod theta;

use std::io::{self, Write};

use crate::ode::Stats;
use crate::potentials::{Channel, ReducedPotential, TailLaw, UnitSystem};
use crate::specfun::{double_factorial, riccati_unchecked, DEFAULT_L_MAX};
use crate::{Error, Result};

pub use direct::{integrate_ere_direct, EreDirectResult};
pub use theta::{integrate_theta, integrate_untransformed};

#[derive(Debug, Clone, PartialEq)]
pub struct VpaOptions {
    pub rtol: f64,
    pub atol: f64,
    /// `delta phi`: integration stops at `pi/2 - phi_margin`.
    pub phi_margin: f64,
    /// Richardson-extrapolate the endpoint from `phi_margin` and `10 phi_margin`.
    pub extrapolate: bool,
    /// Start radius; defaults to the potential's `r_core`.
    pub epsilon_r: Option<f64>,
    /// `|cos theta|` below which the final value counts as sitting on a pole.
    pub pole_tolerance: f64,
    pub max_steps: usize,
    /// Record the trace only at these radii instead of at every step.
    pub sample_radii: Option<Vec<f64>>,
    /// Raw-variable integration stops when `|a|` exceeds this multiple of
    /// `max(scale, r^(2l+1))`.
    pub divergence_guard: f64,
    /// Relative change of `p0` over the last decade of `phi_margin` above
    /// which it is reported unreliable.
    pub p0_tolerance: f64,
}

impl Default for VpaOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            phi_margin: 1e-6,
            extrapolate: true,
            epsilon_r: None,
            pole_tolerance: 1e-12,
            max_steps: 2_000_000,
            sample_radii: None,
            divergence_guard: 1e6,
            p0_tolerance: 1e-6,
        }
    }
}

/// Potential, partial wave and wavenumber of one integration.
#[derive(Debug, Clone)]
pub struct VpaProblem {
    pub potential: ReducedPotential,
    pub l: u32,
    pub k: f64,
    /// Length used to make `a_l` dimensionless: `S = scale_length^(2l+1)`.
    pub scale_length: f64,
}

impl VpaProblem {
    pub fn new(potential: ReducedPotential, l: u32, k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Parameter(format!("k must be finite and non-negative, got {k}")));
        }
        if l > DEFAULT_L_MAX {
            return Err(Error::UnsupportedOrder { l, max: DEFAULT_L_MAX });
        }
        let scale_length = potential.range_estimate();
        Ok(Self { potential, l, k, scale_length })
    }

    pub fn for_channel(potential: ReducedPotential, channel: &Channel, k: f64) -> Result<Self> {
        Self::new(potential, channel.l, k)
    }

    pub fn with_scale_length(mut self, scale_length: f64) -> Result<Self> {
        if !(scale_length > 0.0) || !scale_length.is_finite() {
            return Err(Error::Parameter(format!("scale_length must be positive, got {scale_length}")));
        }
        self.scale_length = scale_length;
        Ok(self)
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        let mut p = Self::new(self.potential.clone(), self.l, k)?;
        p.scale_length = self.scale_length;
        Ok(p)
    }

    /// `S = scale_length^(2l+1)`.
    pub fn scale(&self) -> f64 {
        self.scale_length.powi(2 * self.l as i32 + 1)
    }

    /// Coefficients of `da/dr = U (b_u - b_v a)^2` at `r`.
    #[inline]
    pub(crate) fn bracket(&self, r: f64) -> (f64, f64) {
        bracket(self.l, self.k, r)
    }
}

#[inline]
fn bracket(l: u32, k: f64, r: f64) -> (f64, f64) {
    let li = l as i32;
    if k == 0.0 {
        if l == 0 {
            (r, 1.0)
        } else {
            (
                r.powi(li + 1) / double_factorial(2 * l as i64 + 1),
                double_factorial(2 * l as i64 - 1) / r.powi(li),
            )
        }
    } else {
        let p = riccati_unchecked(l, k * r);
        (p.u / k.powi(li + 1), k.powi(li) * p.v)
    }
}

/// `da/dr = U(r) (u_l(kr) - k^(2l+1) v_l(kr) a)^2 / k^(2l+2)` for `k > 0`.
pub fn rhs_general(potential: &ReducedPotential, l: u32, k: f64, r: f64, a: f64) -> f64 {
    debug_assert!(k > 0.0);
    let (bu, bv) = bracket(l, k, r);
    let d = bu - bv * a;
    potential.eval(r) * d * d
}

/// Zero-energy form `da/dr = U(r) (r^(l+1)/(2l+1)!! - (2l-1)!! a / r^l)^2`.
pub fn rhs_zero_energy(potential: &ReducedPotential, l: u32, r: f64, a: f64) -> f64 {
    let (bu, bv) = bracket(l, 0.0, r);
    let d = bu - bv * a;
    potential.eval(r) * d * d
}

/// Outcome of [`validity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validity {
    Ok,
    /// The zero-energy integrand `U r^(2l+2)` decays too slowly for the
    /// scattering length to exist.
    LongRangeWarning { tail_exponent: f64, l: u32 },
}

/// For `U ~ r^-n` the zero-energy equation needs `2l + 2 - n < -1`.
pub fn validity_check(potential: &ReducedPotential, l: u32) -> Validity {
    match potential.tail {
        TailLaw::Power(n) if 2.0 * l as f64 + 2.0 - n >= -1.0 => {
            Validity::LongRangeWarning { tail_exponent: n, l }
        }
        _ => Validity::Ok,
    }
}

/// Sampled path of one `theta(phi)` integration.
#[derive(Debug, Clone)]
pub struct VpaTrace {
    pub l: u32,
    pub k: f64,
    /// `S`; `a = S tan(theta)`.
    pub scale: f64,
    pub units: UnitSystem,
    pub phi: Vec<f64>,
    /// Continuous (unwrapped) angle.
    pub theta: Vec<f64>,
    /// Net number of pole passages up to each sample (signed).
    pub crossings: Vec<i64>,
    /// Net number of passages of `theta` through `pi/2 (mod pi)`.
    pub pole_crossings: u32,
    pub theta_infinity: f64,
    pub a_infinity: f64,
    /// `theta_infinity` lies within `pole_tolerance` of a pole; `a_infinity`
    /// is then meaningless.
    pub at_resonance: bool,
    /// Rough size of the integration error in `a_infinity`.
    pub a_tolerance: f64,
    pub stats: Stats,
}

impl VpaTrace {
    pub fn r(&self) -> Vec<f64> {
        self.phi.iter().map(|p| p.tan()).collect()
    }

    pub fn a(&self) -> Vec<f64> {
        self.theta.iter().map(|t| self.scale * t.tan()).collect()
    }

    /// CSV with columns `phi, r, theta, a, pole_crossings`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let len = self.units.length_unit();
        writeln!(
            w,
            "phi[rad],r[{len}],theta[rad],a[{}],pole_crossings[count]",
            self.units.length_power(2 * self.l as i32 + 1)
        )?;
        for i in 0..self.phi.len() {
            let r = self.phi[i].tan();
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt17(self.phi[i]),
                fmt17(r),
                fmt17(self.theta[i]),
                fmt17(self.scale * self.theta[i].tan()),
                self.crossings[i].unsigned_abs()
            )?;
        }
        Ok(())
    }
}

/// 17 significant digits, the shortest width that round-trips any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Index that advances by one each time `theta` passes `(n + 1/2) pi`.
#[inline]
pub(crate) fn pole_index(theta: f64) -> i64 {
    (theta / std::f64::consts::PI - 0.5).floor() as i64
}
