//! Charged-particle extension: Coulomb wave functions, the Coulomb-modified
//! tangent function and the matching low-energy expansion.
//!
//! Conventions: `eta >= 0` (like charges), derivatives of the scaled
//! functions are taken in `r`, and
//! `calF = k^-1/2 e^(pi eta) F`, `calG = (pi/2) k^-1/2 e^(-pi eta) G`,
//! so that `calG calF' - calG' calF = pi/2`.
//!
//! The variable-phase equation consistent with that Wronskian is
//! `da/dr = (2/pi) U (calF - calG a)^2`, whose limit is
//! `a(inf) = -D^c` with `D^c = (2/pi) e^(2 pi eta) tan(delta)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::ode::{Dopri5, OdeOptions, Stats, Step, StepFailure};
use crate::potentials::ReducedPotential;
use crate::specfun::DEFAULT_L_MAX;
use crate::{Error, Result};

/// Largest `eta` inside the validated envelope.
pub const ETA_MAX: f64 = 20.0;
/// Largest `rho` inside the validated envelope.
pub const RHO_MAX: f64 = 100.0;

const CF_LIMIT: usize = 1_000_000;

/// Charges, nuclear Bohr radius and wavenumber of one charged channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombContext {
    pub eta: f64,
    /// `hbar^2 / (mu Z1 Z2 e^2)`, in the channel's length unit.
    pub a_n: f64,
    pub z1: i32,
    pub z2: i32,
    pub k: f64,
}

impl CoulombContext {
    pub fn new(z1: i32, z2: i32, a_n: f64, k: f64) -> Result<Self> {
        if z1 * z2 <= 0 {
            return Err(Error::Regime("only like charges (Z1 Z2 > 0) are supported".into()));
        }
        if !(a_n > 0.0) || !(k > 0.0) || !a_n.is_finite() || !k.is_finite() {
            return Err(Error::Parameter(format!("need a_N > 0 and k > 0, got {a_n} and {k}")));
        }
        Ok(Self { eta: 1.0 / (k * a_n), a_n, z1, z2, k })
    }

    /// From the reduced mass `mu c^2` and `hbar c` in MeV and MeV fm.
    pub fn nuclear(z1: i32, z2: i32, mu: f64, hbar_c: f64, k: f64) -> Result<Self> {
        const ALPHA: f64 = 1.0 / 137.035_999_084;
        let a_n = hbar_c / (mu * (z1 * z2) as f64 * ALPHA);
        Self::new(z1, z2, a_n, k)
    }
}

/// `prod_{n=1}^{l} (1 + n^2/eta^2)`.
pub fn omega_l(eta: f64, l: u32) -> Result<f64> {
    if l == 0 {
        return Ok(1.0);
    }
    if eta == 0.0 {
        return Err(Error::Domain(format!("omega_l diverges at eta = 0 for l = {l}")));
    }
    Ok((1..=l).map(|n| 1.0 + (n * n) as f64 / (eta * eta)).product())
}

/// Two-term large-`eta` series for `h(eta)` and the size of the first
/// omitted term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HEta {
    pub value: f64,
    pub truncation: f64,
}

pub fn h_eta(eta: f64) -> Result<HEta> {
    if !(eta.abs() > 1.0) || !eta.is_finite() {
        return Err(Error::Regime(format!("h(eta) series needs |eta| > 1, got {eta}")));
    }
    let x = 1.0 / (eta * eta);
    Ok(HEta { value: x / 12.0 + x * x / 120.0, truncation: x * x * x / 252.0 })
}

/// Gamow factor `C_l(eta)`.
pub fn gamow(l: u32, eta: f64) -> f64 {
    let two_pi_eta = 2.0 * PI * eta;
    let mut c = if eta == 0.0 { 1.0 } else { (two_pi_eta / two_pi_eta.exp_m1()).sqrt() };
    for j in 1..=l {
        let j = j as f64;
        c *= (j * j + eta * eta).sqrt() / (j * (2.0 * j + 1.0));
    }
    c
}

/// Regular and irregular Coulomb functions and their `rho` derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombWave {
    pub l: u32,
    pub eta: f64,
    pub rho: f64,
    pub f: f64,
    pub g: f64,
    pub df: f64,
    pub dg: f64,
}

fn check_envelope(l: u32, eta: f64, rho: f64) -> Result<()> {
    if l > DEFAULT_L_MAX {
        return Err(Error::UnsupportedOrder { l, max: DEFAULT_L_MAX });
    }
    if !(0.0..=ETA_MAX).contains(&eta) {
        return Err(Error::Regime(format!("eta = {eta} outside [0, {ETA_MAX}]")));
    }
    if !(rho > 0.0 && rho <= RHO_MAX) {
        return Err(Error::Regime(format!("rho = {rho} outside (0, {RHO_MAX}]")));
    }
    Ok(())
}

/// Below this radius `F` comes from the ascending series and `G` from
/// inward integration; above it, from Steed's continued fractions.
fn steed_threshold(l: u32, eta: f64) -> f64 {
    let tp = eta + (eta * eta + (l * (l + 1)) as f64).sqrt();
    (1.1 * tp).max(2.0)
}

/// `F` and `F'` from `C_l sum_k A_k rho^k`.
fn series_f(l: u32, eta: f64, rho: f64) -> (f64, f64) {
    let lf = l as f64;
    let (mut a2, mut a1) = (0.0, 1.0);
    let mut pow = rho.powi(l as i32 + 1);
    let mut f = pow;
    let mut df = (lf + 1.0) * pow / rho;
    let mut k = lf + 2.0;
    let mut prev = f;
    loop {
        let a = (2.0 * eta * a1 - a2) / ((k + lf) * (k - lf - 1.0));
        pow *= rho;
        let term = a * pow;
        f += term;
        df += k * term / rho;
        // odd terms vanish at eta = 0, so require two small terms in a row
        if (term.abs() + prev.abs() <= 1e-17 * f.abs() && k > lf + 3.0) || k > 4000.0 {
            break;
        }
        prev = term;
        (a2, a1) = (a1, a);
        k += 1.0;
    }
    let c = gamow(l, eta);
    (c * f, c * df)
}

/// `F'/F` by modified Lentz, with the sign of `F` relative to its
/// small-`rho` (positive) behaviour.
fn cf1(l: u32, eta: f64, rho: f64) -> Result<(f64, f64)> {
    let tiny = 1e-300;
    let s = |j: f64| j / rho + eta / j;
    let r2 = |j: f64| 1.0 + eta * eta / (j * j);
    let l1 = l as f64 + 1.0;
    let mut f = s(l1);
    if f == 0.0 {
        f = tiny;
    }
    let (mut c, mut d) = (f, 0.0);
    let mut sign = 1.0;
    let mut j = l1;
    for _ in 0..CF_LIMIT {
        let a = -r2(j);
        let b = s(j) + s(j + 1.0);
        d = b + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        if d < 0.0 {
            sign = -sign;
        }
        let delta = c * d;
        f *= delta;
        j += 1.0;
        if (delta - 1.0).abs() < 2.0 * f64::EPSILON {
            return Ok((f, sign));
        }
    }
    Err(Error::Regime(format!("CF1 did not converge at eta = {eta}, rho = {rho}")))
}

/// `p + i q = (G' + i F') / (G + i F)`.
fn cf2(l: u32, eta: f64, rho: f64) -> Result<Complex64> {
    let tiny = Complex64::new(1e-150, 0.0);
    let i = Complex64::i();
    let a0 = Complex64::new(1.0 + l as f64, eta);
    let b0 = Complex64::new(-(l as f64), eta);
    // K = a1/(b1 + a2/(b2 + ...)), a_n = (a+n-1)(b+n-1), b_n = 2(rho - eta + n i)
    let mut f = tiny;
    let (mut c, mut d) = (f, Complex64::new(0.0, 0.0));
    for n in 1..=CF_LIMIT {
        let nf = n as f64;
        let an = (a0 + nf - 1.0) * (b0 + nf - 1.0);
        let bn = 2.0 * Complex64::new(rho - eta, nf);
        d = bn + an * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = bn + an / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 4.0 * f64::EPSILON {
            return Ok(i * (1.0 - eta / rho) + i / rho * f);
        }
    }
    Err(Error::Regime(format!("CF2 did not converge at eta = {eta}, rho = {rho}")))
}

fn steed(l: u32, eta: f64, rho: f64) -> Result<CoulombWave> {
    let (fr, sign) = cf1(l, eta, rho)?;
    let pq = cf2(l, eta, rho)?;
    let (p, q) = (pq.re, pq.im);
    let gamma = (fr - p) / q;
    let f = sign / (q * (1.0 + gamma * gamma)).sqrt();
    Ok(CoulombWave { l, eta, rho, f, g: gamma * f, df: fr * f, dg: (p * gamma - q) * f })
}

/// Inward solution of the Coulomb equation for `G` between `rho_lo` and
/// the Steed threshold, kept as dense-output steps in `t = -rho`.
#[derive(Debug, Clone)]
struct InwardG {
    steps: Vec<Step<2>>,
}

impl InwardG {
    fn new(l: u32, eta: f64, rho_lo: f64) -> Result<Option<Self>> {
        let top = steed_threshold(l, eta);
        if rho_lo >= top {
            return Ok(None);
        }
        let start = steed(l, eta, top)?;
        let ll = (l * (l + 1)) as f64;
        // in t = -rho: y' = -dy/drho
        let mut rhs = |t: f64, y: &[f64; 2]| {
            let rho = -t;
            [-y[1], -(ll / (rho * rho) + 2.0 * eta / rho - 1.0) * y[0]]
        };
        let opts = OdeOptions { rtol: 1e-13, atol: 1e-300, min_step: 1e-16, ..Default::default() };
        let mut stepper = Dopri5::<2>::new(&opts);
        let (mut t, t_end) = (-top, -rho_lo);
        let mut y = [start.g, start.dg];
        let mut fy = rhs(t, &y);
        let mut steps = Vec::new();
        while t < t_end {
            let step = stepper
                .step(&mut rhs, t, &y, &fy, t_end)
                .map_err(|e| Error::Regime(format!("inward Coulomb integration failed: {e:?}")))?;
            t = step.t1;
            y = step.y1;
            fy = step.f1;
            steps.push(step);
        }
        Ok(Some(Self { steps }))
    }

    fn eval(&self, rho: f64) -> (f64, f64) {
        let t = -rho;
        let i = self.steps.partition_point(|s| s.t1 < t).min(self.steps.len() - 1);
        let s = &self.steps[i];
        let y = if t == s.t1 { s.y1 } else { s.interpolate(t) };
        (y[0], y[1])
    }
}

fn wave_with(l: u32, eta: f64, rho: f64, inward: Option<&InwardG>) -> Result<CoulombWave> {
    if rho >= steed_threshold(l, eta) {
        return steed(l, eta, rho);
    }
    let (f, df) = series_f(l, eta, rho);
    let (g, dg) = match inward {
        Some(tab) => tab.eval(rho),
        None => InwardG::new(l, eta, rho)?.expect("below threshold").eval(rho),
    };
    Ok(CoulombWave { l, eta, rho, f, g, df, dg })
}

/// `F_l(eta, rho)`, `G_l(eta, rho)` and their derivatives inside the
/// envelope `0 <= eta <= 20`, `0 < rho <= 100`.
pub fn coulomb_wave(l: u32, eta: f64, rho: f64) -> Result<CoulombWave> {
    check_envelope(l, eta, rho)?;
    wave_with(l, eta, rho, None)
}

/// Scaled functions and their `r` derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledCoulomb {
    pub f: f64,
    pub g: f64,
    pub df: f64,
    pub dg: f64,
}

fn scale(w: &CoulombWave, eta: f64, k: f64) -> ScaledCoulomb {
    let sf = (PI * eta).exp() / k.sqrt();
    let sg = FRAC_PI_2 * (-PI * eta).exp() / k.sqrt();
    ScaledCoulomb { f: sf * w.f, g: sg * w.g, df: sf * k * w.df, dg: sg * k * w.dg }
}

/// `calF_l(kr)`, `calG_l(kr)` and their derivatives in `r`.
pub fn scaled_coulomb(l: u32, eta: f64, k: f64, r: f64) -> Result<ScaledCoulomb> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Parameter(format!("k must be positive, got {k}")));
    }
    let w = coulomb_wave(l, eta, k * r)?;
    Ok(scale(&w, eta, k))
}

/// `da/dr = (2/pi) U (calF - calG a)^2` given `U(r)`.
pub fn coulomb_calogero_rhs(l: u32, eta: f64, k: f64, r: f64, u: f64, a_c: f64) -> Result<f64> {
    let w = scaled_coulomb(l, eta, k, r)?;
    let d = w.f - w.g * a_c;
    Ok(2.0 / PI * u * d * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoulombOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Outer radius; the potential must be negligible beyond it.
    pub r_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for CoulombOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, r_max: None, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoulombResult {
    pub l: u32,
    pub eta: f64,
    pub k: f64,
    /// `a^c(k, r_max)`.
    pub a_c: f64,
    /// Coulomb-modified tangent `D^c = -a^c`.
    pub d_c: f64,
    pub tan_delta: f64,
    pub pole_crossings: u32,
    pub r_max: f64,
    pub stats: Stats,
}

/// Integrates `theta = atan(a^c)` in `r` from the inner cutoff to `r_max`
/// for the short-range potential `pot` on top of the point Coulomb field.
pub fn integrate_coulomb(
    pot: &ReducedPotential,
    l: u32,
    eta: f64,
    k: f64,
    opts: &CoulombOptions,
) -> Result<CoulombResult> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Parameter(format!("k must be positive, got {k}")));
    }
    let r0 = pot.r_core;
    let r_max = opts
        .r_max
        .unwrap_or_else(|| crate::oracle::default_r_max(pot, l, k, 1e-10).max(2.0 * pot.range_estimate()));
    check_envelope(l, eta, k * r0)?;
    check_envelope(l, eta, k * r_max)?;
    let inward = InwardG::new(l, eta, k * r0)?;
    let (sf, sg) = ((PI * eta).exp() / k.sqrt(), FRAC_PI_2 * (-PI * eta).exp() / k.sqrt());

    let mut stops: Vec<f64> = pot.breakpoints.iter().copied().filter(|b| *b > r0 && *b < r_max).collect();
    stops.push(r_max);
    let ode = OdeOptions { rtol: opts.rtol, atol: opts.atol, max_steps: opts.max_steps, ..Default::default() };
    let mut stepper = Dopri5::<1>::new(&ode).angle(0);
    let (mut r, mut y) = (r0, [0.0]);
    let mut failure = None;
    for stop in stops {
        let (lo, hi) = (r * (1.0 + 8.0 * f64::EPSILON), stop * (1.0 - 8.0 * f64::EPSILON));
        let mut rhs = |x: f64, v: &[f64; 1]| -> [f64; 1] {
            let w = match wave_with(l, eta, k * x, inward.as_ref()) {
                Ok(w) => w,
                Err(e) => {
                    failure.get_or_insert(e);
                    return [0.0];
                }
            };
            let (sn, c) = v[0].sin_cos();
            let d = sf * w.f * c - sg * w.g * sn;
            [2.0 / PI * pot.eval(x.clamp(lo, hi.max(lo))) * d * d]
        };
        let mut fy = rhs(r, &y);
        while r < stop {
            if stepper.stats.accepted >= opts.max_steps {
                return Err(Error::StepBudget { steps: stepper.stats.accepted, r });
            }
            let step = stepper.step(&mut rhs, r, &y, &fy, stop).map_err(|e| match e {
                StepFailure::Underflow { t } => Error::Stiffness { r: t },
                StepFailure::Budget { t } => Error::StepBudget { steps: ode.max_steps, r: t },
            })?;
            r = step.t1;
            y = step.y1;
            fy = step.f1;
        }
        if let Some(e) = failure.take() {
            return Err(e);
        }
    }
    let theta = y[0];
    let a_c = theta.tan();
    let tan_delta = -FRAC_PI_2 * (-2.0 * PI * eta).exp() * a_c;
    Ok(CoulombResult {
        l,
        eta,
        k,
        a_c,
        d_c: -a_c,
        tan_delta,
        pole_crossings: (crate::vpa::pole_index(theta) - crate::vpa::pole_index(0.0)).unsigned_abs() as u32,
        r_max,
        stats: stepper.stats,
    })
}

/// `2 omega_l / ((l!)^2 a_N^(2l+1)) [2/D^c + h(eta)]`, the quantity expanded
/// as `-1/a + r k^2/2 - P r^3 k^4`. At `eta = 0` this is the neutral
/// `1/D = k^(2l+1) / tan(delta)`, written in terms of `D^c = (2/pi) tan(delta)`.
pub fn coulomb_ere_lhs(d_c: f64, eta: f64, l: u32, a_n: f64, k: f64) -> Result<f64> {
    if d_c == 0.0 || !d_c.is_finite() {
        return Err(Error::Domain("D^c = 0 carries no information".into()));
    }
    if eta == 0.0 {
        return Ok(2.0 * k.powi(2 * l as i32 + 1) / (PI * d_c));
    }
    let h = h_eta(eta)?.value;
    let fact: f64 = (1..=l).map(|j| j as f64).product();
    let pref = 2.0 * omega_l(eta, l)? / (fact * fact * a_n.powi(2 * l as i32 + 1));
    Ok(pref * (2.0 / d_c + h))
}

/// Inverse of [`coulomb_ere_lhs`] for `eta > 1`: the `D^c` that produces `lhs`.
pub fn coulomb_d_from_lhs(lhs: f64, eta: f64, l: u32, a_n: f64) -> Result<f64> {
    let h = h_eta(eta)?.value;
    let fact: f64 = (1..=l).map(|j| j as f64).product();
    let pref = 2.0 * omega_l(eta, l)? / (fact * fact * a_n.powi(2 * l as i32 + 1));
    Ok(2.0 / (lhs / pref - h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::riccati_bessel;

    /// Digamma real part on the imaginary line:
    /// Re psi(1 + i eta) = -gamma + eta^2 sum 1/(n (n^2 + eta^2)).
    fn h_exact(eta: f64) -> f64 {
        let n_max = 200_000;
        let mut s = 0.0;
        for n in (1..=n_max).rev() {
            let n = n as f64;
            s += 1.0 / (n * (n * n + eta * eta));
        }
        // tail of the sum beyond n_max
        s += 1.0 / (2.0 * (n_max as f64).powi(2));
        -0.577_215_664_901_532_9 + eta * eta * s - eta.ln()
    }

    /// `F_l` from `C_l rho^(l+1) e^(-i rho) M(l+1-i eta, 2l+2, 2 i rho)`.
    fn kummer_f(l: u32, eta: f64, rho: f64) -> f64 {
        let a = Complex64::new(l as f64 + 1.0, -eta);
        let b = 2.0 * l as f64 + 2.0;
        let z = Complex64::new(0.0, 2.0 * rho);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 0..400 {
            let n = n as f64;
            term = term * (a + n) / (b + n) * z / (n + 1.0);
            sum += term;
        }
        let val = gamow(l, eta) * rho.powi(l as i32 + 1) * Complex64::new(0.0, -rho).exp() * sum;
        assert!(val.im.abs() < 1e-10 * val.re.abs().max(1e-300));
        val.re
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega_l(3.0, 0).unwrap(), 1.0);
        assert!((omega_l(1.0, 2).unwrap() - 10.0).abs() < 1e-14);
        assert!((omega_l(1e8, 3).unwrap() - 1.0).abs() < 1e-14);
        assert!(omega_l(0.0, 1).is_err());
    }

    #[test]
    fn h_series() {
        let h = h_eta(10.0).unwrap();
        assert!((h.value - (1.0 / 1200.0 + 1.0 / 1.2e6)).abs() < 1e-16);
        assert!(h_eta(1e6).unwrap().value < 1e-12);
        assert!(h_eta(1.0).is_err());
        for eta in [2.0, 3.0, 5.0] {
            let h = h_eta(eta).unwrap();
            let err = (h.value - h_exact(eta)).abs();
            // within a factor of two of the first omitted term
            assert!(err < 2.0 * h.truncation && err > 0.2 * h.truncation, "eta={eta}: {err} vs {}", h.truncation);
        }
    }

    #[test]
    fn neutral_limit() {
        for l in 0..=3 {
            for &rho in &[0.3, 1.7, 6.0, 25.0, 90.0] {
                let w = coulomb_wave(l, 0.0, rho).unwrap();
                let p = riccati_bessel(l, rho).unwrap();
                let scale = p.u.abs().max(p.v.abs());
                assert!((w.f - p.u).abs() < 1e-10 * scale, "l={l} rho={rho}: {} vs {}", w.f, p.u);
                assert!((w.g - p.v).abs() < 1e-10 * scale, "l={l} rho={rho}: {} vs {}", w.g, p.v);
                assert!((w.df - p.du).abs() < 1e-9 * scale.max(p.du.abs()));
            }
        }
    }

    #[test]
    fn series_oracle() {
        let w = coulomb_wave(0, 1.0, 1.0).unwrap();
        assert!((w.f - kummer_f(0, 1.0, 1.0)).abs() < 1e-12 * w.f.abs());
        for (l, eta, rho) in [(1, 0.5, 3.0), (2, 2.0, 4.0), (0, 5.0, 12.0), (1, 1.0, 8.0)] {
            let w = coulomb_wave(l, eta, rho).unwrap();
            let exact = kummer_f(l, eta, rho);
            assert!((w.f - exact).abs() < 1e-9 * exact.abs(), "l={l} eta={eta} rho={rho}: {} vs {exact}", w.f);
        }
    }

    #[test]
    fn wronskian_grid() {
        for l in 0..=2 {
            for &eta in &[0.5, 1.0, 5.0] {
                for i in 0..=20 {
                    let rho = 0.5 * (40f64).powf(i as f64 / 20.0);
                    let w = coulomb_wave(l, eta, rho).unwrap();
                    let wr = w.df * w.g - w.f * w.dg;
                    assert!((wr - 1.0).abs() < 1e-8, "l={l} eta={eta} rho={rho}: {wr}");
                    let k = 0.7;
                    let s = scaled_coulomb(l, eta, k, rho / k).unwrap();
                    let ws = s.g * s.df - s.dg * s.f;
                    assert!((ws - FRAC_PI_2).abs() < 1e-8 * FRAC_PI_2, "{ws}");
                }
            }
        }
    }

    #[test]
    fn continuous_across_method_switch() {
        for (l, eta) in [(0, 1.0), (2, 5.0), (1, 20.0)] {
            let t = steed_threshold(l, eta);
            let a = coulomb_wave(l, eta, t * (1.0 - 1e-9)).unwrap();
            let b = coulomb_wave(l, eta, t * (1.0 + 1e-9)).unwrap();
            let gap = b.rho - a.rho;
            // compare with the linear continuation across the gap
            assert!((a.f - (b.f - gap * b.df)).abs() < 1e-8 * b.f.abs().max(b.df.abs()), "F l={l} eta={eta}");
            assert!((a.g - (b.g - gap * b.dg)).abs() < 1e-8 * b.g.abs().max(b.dg.abs()), "G l={l} eta={eta}");
            assert!((a.dg - b.dg).abs() < 1e-6 * b.dg.abs().max(b.g.abs()));
        }
    }

    #[test]
    fn envelope_enforced() {
        assert!(matches!(coulomb_wave(0, 25.0, 1.0), Err(Error::Regime(_))));
        assert!(matches!(coulomb_wave(0, 1.0, 150.0), Err(Error::Regime(_))));
        assert!(matches!(coulomb_wave(0, -1.0, 1.0), Err(Error::Regime(_))));
        assert!(matches!(coulomb_wave(0, 1.0, 0.0), Err(Error::Regime(_))));
    }

    #[test]
    fn zero_potential_and_sign() {
        let zero = ReducedPotential::zero(crate::UnitSystem::reduced());
        let r = integrate_coulomb(&zero, 0, 2.0, 0.5, &CoulombOptions { r_max: Some(10.0), ..Default::default() }).unwrap();
        assert_eq!(r.a_c, 0.0);
        assert!(coulomb_calogero_rhs(1, 1.0, 0.5, 2.0, -3.0, 0.4).unwrap() < 0.0);
        assert!(coulomb_calogero_rhs(1, 1.0, 0.5, 2.0, 3.0, 0.4).unwrap() > 0.0);
    }

    #[test]
    fn small_eta_matches_neutral_phase() {
        use crate::analytic::square_well_tan_delta;
        let well = crate::potentials::square_well(1.0, 1.0).unwrap();
        let k = 0.5;
        let opts = CoulombOptions { r_max: Some(2.0), rtol: 1e-12, atol: 1e-14, ..Default::default() };
        let c = integrate_coulomb(&well, 0, 0.0, k, &opts).unwrap();
        let exact = square_well_tan_delta(1.0, 1.0, 0, k).unwrap();
        assert!((c.tan_delta - exact).abs() < 1e-9 * exact.abs(), "{} vs {exact}", c.tan_delta);
    }

    #[test]
    fn ere_lhs_limits() {
        let (a_n, d) = (3.0, 0.7);
        let lhs = coulomb_ere_lhs(d, 1e7, 1, a_n, 0.1).unwrap();
        assert!((lhs - 4.0 / (a_n.powi(3) * d)).abs() < 1e-10 * lhs.abs());
        // eta = 0: D^c = (2/pi) tan(delta) gives back k^(2l+1)/tan(delta)
        let (k, tan_d) = (0.3, 0.2);
        let lhs0 = coulomb_ere_lhs(2.0 / PI * tan_d, 0.0, 2, a_n, k).unwrap();
        assert!((lhs0 - k.powi(5) / tan_d).abs() < 1e-14);
        assert!(coulomb_ere_lhs(0.0, 3.0, 0, a_n, k).is_err());
    }

    #[test]
    fn ere_round_trip() {
        use crate::ere::{fit_ere, EreParams};
        for l in 0..=1u32 {
            let truth = EreParams { l, a: 4.0, r: 1.5, p: 0.05 };
            let a_n = 30.0;
            let points: Vec<(f64, f64)> = (0..12)
                .map(|i| {
                    let k = 0.004 + 0.0025 * i as f64;
                    let eta = 1.0 / (k * a_n);
                    let lhs = truth.inverse_d(k);
                    let d_c = coulomb_d_from_lhs(lhs, eta, l, a_n).unwrap();
                    let back = coulomb_ere_lhs(d_c, eta, l, a_n, k).unwrap();
                    (k, 1.0 / back)
                })
                .collect();
            let fit = fit_ere(&points, l).unwrap();
            for (x, y) in [(fit.params.a, truth.a), (fit.params.r, truth.r), (fit.params.p, truth.p)] {
                assert!((x - y).abs() < 1e-8 * y.abs(), "l={l}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn context_eta() {
        let c = CoulombContext::new(1, 6, 4.0, 0.25).unwrap();
        assert!((c.eta - 1.0).abs() < 1e-15);
        assert!(CoulombContext::new(1, -1, 4.0, 0.25).is_err());
        let p = CoulombContext::nuclear(1, 1, 469.46, 197.327, 0.1).unwrap();
        assert!((p.a_n - 57.6).abs() < 0.1, "{}", p.a_n);
    }
}
