//! Riccati-Bessel `u_l(rho) = rho j_l(rho)` and Riccati-Neumann
//! `v_l(rho) = -rho y_l(rho)` functions.
//!
//! Sign convention: `u_0 = sin`, `v_0 = cos`, so that `v u' - v' u = 1` and
//! the free solution with phase shift `delta` is `u_l + tan(delta) v_l`.

use crate::{Error, Result};

/// Highest order accepted by [`riccati_bessel`].
pub const DEFAULT_L_MAX: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiPair {
    pub l: u32,
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    /// `du/drho`
    pub du: f64,
    /// `dv/drho`
    pub dv: f64,
}

impl RiccatiPair {
    /// `v u' - v' u`, identically one.
    pub fn wronskian(&self) -> f64 {
        self.v * self.du - self.dv * self.u
    }
}

pub fn riccati_bessel(l: u32, rho: f64) -> Result<RiccatiPair> {
    riccati_bessel_capped(l, rho, DEFAULT_L_MAX)
}

/// Same as [`riccati_bessel`] with a caller-chosen order cap.
pub fn riccati_bessel_capped(l: u32, rho: f64, l_max: u32) -> Result<RiccatiPair> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("riccati_bessel needs rho > 0, got {rho}")));
    }
    if l > l_max {
        return Err(Error::UnsupportedOrder { l, max: l_max });
    }
    Ok(riccati_unchecked(l, rho))
}

/// Hot-path evaluation used by the ODE right-hand sides; arguments are
/// validated once by the caller.
pub(crate) fn riccati_unchecked(l: u32, rho: f64) -> RiccatiPair {
    let (s, c) = rho.sin_cos();
    if l == 0 {
        return RiccatiPair { l, rho, u: s, v: c, du: c, dv: -s };
    }

    // Upward recursion is stable for the irregular function at every rho.
    let mut v_prev = c;
    let mut v = c / rho + s;
    for n in 1..l {
        let next = (2 * n + 1) as f64 / rho * v - v_prev;
        v_prev = v;
        v = next;
    }

    let (u, u_prev) = regular_pair(l, rho, s, c);
    let lf = l as f64;
    RiccatiPair {
        l,
        rho,
        u,
        v,
        du: u_prev - lf * u / rho,
        dv: v_prev - lf * v / rho,
    }
}

/// Returns `(u_l, u_{l-1})` for `l >= 1`.
///
/// Orders up to `floor(rho)` come from the upward recursion, which is stable
/// there. Above that the ratios `u_n/u_{n-1}` are generated downward (Miller)
/// and chained onto the last upward value, so no closed form is evaluated in
/// the region where it cancels.
fn regular_pair(l: u32, rho: f64, s: f64, c: f64) -> (f64, f64) {
    let m = (rho.floor() as u32).min(l);

    let mut u_prev = f64::NAN;
    let mut u = s;
    if m >= 1 {
        u_prev = s;
        u = s / rho - c;
        for n in 1..m {
            let next = (2 * n + 1) as f64 / rho * u - u_prev;
            u_prev = u;
            u = next;
        }
    }
    if m == l {
        return (u, u_prev);
    }

    let top = l + 30;
    let mut ratios = vec![0.0; (l + 1) as usize];
    let mut ratio = 0.0;
    for n in (m + 1..=top).rev() {
        ratio = 1.0 / ((2 * n + 1) as f64 / rho - ratio);
        if n <= l {
            ratios[n as usize] = ratio;
        }
    }
    for n in m + 1..=l {
        u_prev = u;
        u *= ratios[n as usize];
    }
    (u, u_prev)
}

/// `(2l+1)!!`-style double factorial for odd `n >= -1`; `(-1)!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Leading small-argument behaviour `rho^(l+1) / (2l+1)!!`.
pub fn small_rho_u(l: u32, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("small_rho_u needs rho > 0, got {rho}")));
    }
    Ok(rho.powi(l as i32 + 1) / double_factorial(2 * l as i64 + 1))
}

/// Leading small-argument behaviour `(2l-1)!! / rho^l`.
pub fn small_rho_v(l: u32, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("small_rho_v needs rho > 0, got {rho}")));
    }
    Ok(double_factorial(2 * l as i64 - 1) / rho.powi(l as i32))
}

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre(l: u32, x: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, x);
    for n in 1..l {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * x * p1 - nf * p0) / (nf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}
