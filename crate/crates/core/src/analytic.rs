//! Closed-form results for the attractive square well `U = -U0` (`r < R`),
//! used as reference values by tests, the CLI and the demo.

use crate::specfun::{double_factorial, riccati_unchecked};
use crate::{Error, Result};

fn check(u0: f64, radius: f64) -> Result<f64> {
    if !(u0 > 0.0) || !(radius > 0.0) {
        return Err(Error::Parameter(format!(
            "closed forms need an attractive well, got U0 = {u0}, R = {radius}"
        )));
    }
    Ok(u0.sqrt())
}

/// `tan(delta_l)` at wavenumber `k`.
pub fn square_well_tan_delta(u0: f64, radius: f64, l: u32, k: f64) -> Result<f64> {
    check(u0, radius)?;
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k must be positive, got {k}")));
    }
    let q = (k * k + u0).sqrt();
    let inner = riccati_unchecked(l, q * radius);
    let outer = riccati_unchecked(l, k * radius);
    let num = k * outer.du * inner.u - q * inner.du * outer.u;
    let den = q * inner.du * outer.v - k * outer.dv * inner.u;
    Ok(num / den)
}

/// Zero-energy scattering length `a_l` (length^(2l+1)).
pub fn square_well_scattering_length(u0: f64, radius: f64, l: u32) -> Result<f64> {
    let kappa = check(u0, radius)?;
    let inner = riccati_unchecked(l, kappa * radius);
    let (u, du) = (inner.u, kappa * inner.du);
    let lf = l as f64;
    let p = radius.powi(l as i32 + 1) / double_factorial(2 * l as i64 + 1);
    let dp = (lf + 1.0) * radius.powi(l as i32) / double_factorial(2 * l as i64 + 1);
    let q = double_factorial(2 * l as i64 - 1) / radius.powi(l as i32);
    let dq = -lf * q / radius;
    Ok((dp * u - du * p) / (dq * u - du * q))
}

/// s-wave effective range `R - R^3/(3a^2) - 1/(kappa^2 a)`.
pub fn square_well_effective_range(u0: f64, radius: f64) -> Result<f64> {
    check(u0, radius)?;
    let a = square_well_scattering_length(u0, radius, 0)?;
    Ok(radius - radius.powi(3) / (3.0 * a * a) - 1.0 / (u0 * a))
}

/// Number of bound states with angular momentum `l`.
///
/// A new level reaches threshold whenever `u_{l-1}(kappa R)` vanishes
/// (`cos(kappa R)` for `l = 0`), so this counts those zeros below `kappa R`.
pub fn square_well_bound_states(u0: f64, radius: f64, l: u32) -> Result<u32> {
    let x_max = check(u0, radius)? * radius;
    let g = |x: f64| if l == 0 { x.cos() } else { riccati_unchecked(l - 1, x).u };
    let n = ((x_max / 0.01).ceil() as usize).max(10);
    let mut count = 0;
    let mut prev = g(x_max / n as f64);
    for i in 2..=n {
        let cur = g(x_max * i as f64 / n as f64);
        if prev != 0.0 && cur.signum() != prev.signum() {
            count += 1;
        }
        if cur != 0.0 {
            prev = cur;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_wave_scattering_length() {
        let a = square_well_scattering_length(1.0, 1.0, 0).unwrap();
        assert!((a - (1.0 - 1f64.tan())).abs() < 1e-14);
        assert!((a + 0.5574).abs() < 1e-4);
    }

    #[test]
    fn scattering_length_is_the_low_k_limit() {
        for l in 0..=3u32 {
            let a = square_well_scattering_length(2.3, 1.1, l).unwrap();
            let k: f64 = 1e-4;
            let t = square_well_tan_delta(2.3, 1.1, l, k).unwrap();
            let from_phase = -t / k.powi(2 * l as i32 + 1);
            assert!(((from_phase - a) / a).abs() < 1e-6, "l={l}: {from_phase} vs {a}");
        }
    }

    #[test]
    fn effective_range_matches_expansion() {
        // Fit 1/D(k) = -1/a + r k^2/2 + O(k^4) using two small k.
        let (u0, radius) = (1.0, 1.0);
        let a = square_well_scattering_length(u0, radius, 0).unwrap();
        let inv_d = |k: f64| k / square_well_tan_delta(u0, radius, 0, k).unwrap();
        let (k1, k2) = (2e-3, 4e-3);
        let c1_1 = (inv_d(k1) + 1.0 / a) / (k1 * k1);
        let c1_2 = (inv_d(k2) + 1.0 / a) / (k2 * k2);
        let c1 = (4.0 * c1_1 - c1_2) / 3.0;
        let r = square_well_effective_range(u0, radius).unwrap();
        assert!((2.0 * c1 - r).abs() < 1e-6 * r.abs(), "{} vs {}", 2.0 * c1, r);
    }

    #[test]
    fn bound_state_counts() {
        assert_eq!(square_well_bound_states(25.0, 1.0, 0).unwrap(), 2);
        for (kr, n) in [(1.0, 0), (2.0, 1), (5.0, 2), (8.0, 3)] {
            let count = square_well_bound_states(kr * kr, 1.0, 0).unwrap();
            assert_eq!(count, n, "kappa R = {kr}");
            assert_eq!(count, ((kr / std::f64::consts::PI) + 0.5).floor() as u32);
        }
        // p-wave threshold at kappa R = pi.
        assert_eq!(square_well_bound_states(3.1f64.powi(2), 1.0, 1).unwrap(), 0);
        assert_eq!(square_well_bound_states(3.2f64.powi(2), 1.0, 1).unwrap(), 1);
    }
}
