//! s-wave scattering length, effective range and shape parameter from one
//! integration, without a momentum sweep.
//!
//! Writing `theta(k, r) = theta1 + k^2 chi + k^4 xi + ...` for the s-wave
//! angle `a = tan(theta)` gives equations for `chi` and `xi` that stay finite
//! through the zeros and poles of `a0`. With `s, c = sin, cos(theta1)`:
//!
//! `r0 = 2 chi / s^2`, `p0 = (chi^2 c - xi s) / s^3`.
//!
//! Where `|s|` is large the effective-range angle `theta2 = atan(r0)` is
//! integrated instead; the solver switches between the two forms of the
//! second component as `theta1` moves.

use std::io::{self, Write};

use super::theta::{eval_in, map_failure, ode_options, span, Sampler};
use super::{fmt17, pole_index, VpaOptions, VpaTrace};
use crate::ode::{Dopri5, Stats, StepFailure};
use crate::potentials::ReducedPotential;
use crate::Result;

/// Leave the `theta2` form once `|sin(theta1)|` falls below this.
const TO_REGULAR: f64 = 0.05;
/// Enter the `theta2` form once `|sin(theta1)|` rises above this.
const TO_TANGENT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    /// second component is `chi`
    Regular,
    /// second component is `theta2`
    Tangent,
}

#[derive(Debug, Clone)]
pub struct EreDirectResult {
    pub a0: f64,
    pub r0: f64,
    pub p0: f64,
    /// `false` when `p0` still drifts at the end of the integration by more
    /// than `p0_tolerance` (relative), as it does for power-law tails.
    pub p0_reliable: bool,
    /// Relative change of `r0` and `p0` between `phi_end - 10 dphi` and `phi_end`.
    pub r0_change: f64,
    pub p0_change: f64,
    pub bound_states: u32,
    /// `theta1(phi)`; its `a` column is `a0(r)`.
    pub theta1: VpaTrace,
    /// `theta2(phi)`, sampled at the same points; its `a` column is `r0(r)`.
    pub theta2: VpaTrace,
    pub switches: usize,
    pub stats: Stats,
}

impl EreDirectResult {
    /// CSV with columns `phi, r, theta, a, pole_crossings, theta2, r0`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let len = self.theta1.units.length_unit();
        writeln!(
            w,
            "phi[rad],r[{len}],theta[rad],a[{len}],pole_crossings[count],theta2[rad],r0[{len}]"
        )?;
        let t1 = &self.theta1;
        for i in 0..t1.phi.len() {
            let th2 = self.theta2.theta[i];
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt17(t1.phi[i]),
                fmt17(t1.phi[i].tan()),
                fmt17(t1.theta[i]),
                fmt17(t1.theta[i].tan()),
                t1.crossings[i].unsigned_abs(),
                fmt17(th2),
                fmt17(th2.tan())
            )?;
        }
        Ok(())
    }
}

fn rhs(pot: &ReducedPotential, seg: (f64, f64), form: Form, phi: f64, y: &[f64; 3]) -> [f64; 3] {
    let r = phi.tan();
    let u = eval_in(pot, r, seg.0, seg.1) * (1.0 + r * r);
    let (s, c) = y[0].sin_cos();
    let chi = match form {
        Form::Regular => y[1],
        Form::Tangent => 0.5 * y[1].tan() * s * s,
    };
    let xi = y[2];
    let (r2, r3) = (r * r, r * r * r);
    let (r4, r5) = (r2 * r2, r2 * r3);
    let g0 = r * c - s;
    let g1 = -chi * (r * s + c) - r3 * c / 6.0 + r2 * s / 2.0;
    let g2 = -xi * (r * s + c) - r * chi * chi * c / 2.0 + chi * chi * s / 2.0
        + r3 * chi * s / 6.0
        + r2 * chi * c / 2.0
        + r5 * c / 120.0
        - r4 * s / 24.0;
    let second = match form {
        Form::Regular => 2.0 * u * g0 * g1,
        Form::Tangent => {
            let (t2, inv_a) = (y[1].tan(), c / s);
            let c2 = y[1].cos().powi(2);
            c2 * u
                * (2.0 * t2 * r * (1.0 - r * inv_a) - 2.0 * r2 + (8.0 / 3.0) * r3 * inv_a
                    - (2.0 / 3.0) * r4 * inv_a * inv_a)
        }
    };
    [u * g0 * g0, second, u * (g1 * g1 + 2.0 * g0 * g2)]
}

/// `(theta1, chi, xi)` regardless of the current form.
fn regular(form: Form, y: &[f64; 3]) -> [f64; 3] {
    match form {
        Form::Regular => *y,
        Form::Tangent => {
            let s = y[0].sin();
            [y[0], 0.5 * y[1].tan() * s * s, y[2]]
        }
    }
}

fn theta2_of(form: Form, y: &[f64; 3]) -> f64 {
    match form {
        Form::Tangent => y[1],
        Form::Regular => {
            let s = y[0].sin();
            (2.0 * y[1]).atan2(s * s)
        }
    }
}

fn r0_of(z: &[f64; 3]) -> f64 {
    if z[1] == 0.0 {
        return 0.0;
    }
    let s = z[0].sin();
    2.0 * z[1] / (s * s)
}

fn p0_of(z: &[f64; 3]) -> f64 {
    let (s, c) = z[0].sin_cos();
    let num = z[1] * z[1] * c - z[2] * s;
    if num == 0.0 {
        return 0.0;
    }
    num / (s * s * s)
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
    }
}

/// Integrates the coupled zero-energy equations for `a0`, `r0` and `p0`
/// (s-wave, lengths in the potential's unit).
pub fn integrate_ere_direct(pot: &ReducedPotential, opts: &VpaOptions) -> Result<EreDirectResult> {
    let sp = span(&pot.breakpoints, pot.r_core, opts)?;
    let mut sampler = Sampler::new(opts.sample_radii.as_deref());
    let blank = |scale| VpaTrace {
        l: 0,
        k: 0.0,
        scale,
        units: pot.units,
        phi: Vec::new(),
        theta: Vec::new(),
        crossings: Vec::new(),
        pole_crossings: 0,
        theta_infinity: 0.0,
        a_infinity: 0.0,
        at_resonance: false,
        a_tolerance: 0.0,
        stats: Stats::default(),
    };
    let mut t1 = blank(1.0);
    let mut t2 = blank(1.0);
    let base = pole_index(0.0);
    let record = |phi: f64, form: Form, y: &[f64; 3], t1: &mut VpaTrace, t2: &mut VpaTrace| {
        t1.phi.push(phi);
        t1.theta.push(y[0]);
        t1.crossings.push(pole_index(y[0]) - base);
        t2.phi.push(phi);
        t2.theta.push(theta2_of(form, y));
        t2.crossings.push(0);
    };
    if sampler.wants_start(sp.phi0) {
        record(sp.phi0, Form::Regular, &[0.0; 3], &mut t1, &mut t2);
    }

    let mut stepper = Dopri5::<3>::new(&ode_options(opts)).angle(0);
    let mut form = Form::Regular;
    let mut switches = 0;
    let mut phi = sp.phi0;
    let mut y = [0.0; 3];
    let mut mid = [0.0; 3];

    if !pot.is_zero() {
        for &stop in &sp.stops {
            let seg = (phi.tan(), stop.tan());
            let mut fy = rhs(pot, seg, form, phi, &y);
            while phi < stop {
                if stepper.stats.accepted >= opts.max_steps {
                    return Err(map_failure(StepFailure::Budget { t: phi }, &stepper.stats));
                }
                let s0 = y[0].sin();
                let next = match form {
                    Form::Regular if s0.abs() > TO_TANGENT => Some(Form::Tangent),
                    Form::Tangent if s0.abs() < TO_REGULAR => Some(Form::Regular),
                    _ => None,
                };
                if let Some(f) = next {
                    let z = regular(form, &y);
                    y = match f {
                        Form::Regular => z,
                        Form::Tangent => [z[0], theta2_of(Form::Regular, &z), z[2]],
                    };
                    form = f;
                    switches += 1;
                    fy = rhs(pot, seg, form, phi, &y);
                }

                let mut f = |p: f64, v: &[f64; 3]| rhs(pot, seg, form, p, v);
                let step = stepper
                    .step(&mut f, phi, &y, &fy, stop)
                    .map_err(|e| map_failure(e, &stepper.stats))?;
                if form == Form::Tangent {
                    let s1 = step.y1[0].sin();
                    // the theta2 form is singular at sin(theta1) = 0; never step onto it
                    if s1.abs() < 0.5 * TO_REGULAR || s1.signum() != s0.signum() {
                        stepper.shrink(step.h(), 0.5);
                        continue;
                    }
                }
                for (p, v) in sampler.points(&step) {
                    record(p, form, &v, &mut t1, &mut t2);
                }
                phi = step.t1;
                y = step.y1;
                fy = step.f1;
            }
            if stop == sp.phi_mid {
                mid = regular(form, &y);
            }
        }
    } else if let Some(targets) = Sampler::new(opts.sample_radii.as_deref()).targets_after(sp.phi0) {
        for p in targets {
            record(p, form, &y, &mut t1, &mut t2);
        }
    } else {
        record(sp.phi_end, form, &y, &mut t1, &mut t2);
    }

    let end = regular(form, &y);
    let inf: [f64; 3] = if opts.extrapolate {
        std::array::from_fn(|i| end[i] + (end[i] - mid[i]) / 9.0)
    } else {
        end
    };
    let (a0, r0, p0) = (inf[0].tan(), r0_of(&inf), p0_of(&inf));
    let r0_change = relative_change(r0_of(&end), r0_of(&mid));
    let p0_change = relative_change(p0_of(&end), p0_of(&mid));

    t1.theta_infinity = inf[0];
    t1.a_infinity = a0;
    t1.pole_crossings = (pole_index(inf[0]) - base).unsigned_abs() as u32;
    t1.at_resonance = inf[0].cos().abs() < opts.pole_tolerance;
    t1.stats = stepper.stats;
    t2.theta_infinity = r0.atan();
    t2.a_infinity = r0;
    t2.stats = stepper.stats;

    Ok(EreDirectResult {
        a0,
        r0,
        p0,
        p0_reliable: p0.is_finite() && p0_change <= opts.p0_tolerance,
        r0_change,
        p0_change,
        bound_states: t1.pole_crossings,
        theta1: t1,
        theta2: t2,
        switches,
        stats: stepper.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{square_well_effective_range, square_well_scattering_length};
    use crate::potentials::square_well;

    /// `p0 = P r0^3` of the square well: minus the `k^4` coefficient of
    /// `k cot(delta)`, fitted on closed-form phase shifts at tiny `k`.
    fn well_shape(u0: f64) -> f64 {
        let a = square_well_scattering_length(u0, 1.0, 0).unwrap();
        let r = square_well_effective_range(u0, 1.0).unwrap();
        let g = |k: f64| {
            let t = crate::analytic::square_well_tan_delta(u0, 1.0, 0, k).unwrap();
            (k / t + 1.0 / a - 0.5 * r * k * k) / k.powi(4)
        };
        // remove the O(k^6) term by Richardson in k^2
        let (k1, k2) = (0.02, 0.01);
        -(4.0 * g(k2) - g(k1)) / 3.0
    }

    #[test]
    fn square_well_a_r_p() {
        for &u0 in &[0.8, 2.0, 5.0, 12.0, 30.0] {
            let d = integrate_ere_direct(&square_well(u0, 1.0).unwrap(), &VpaOptions::default()).unwrap();
            let a = square_well_scattering_length(u0, 1.0, 0).unwrap();
            let r = square_well_effective_range(u0, 1.0).unwrap();
            assert!((d.a0 - a).abs() < 1e-8 * a.abs().max(1.0), "U0={u0} a {} vs {a}", d.a0);
            assert!((d.r0 - r).abs() < 1e-7 * r.abs().max(1.0), "U0={u0} r {} vs {r}", d.r0);
            let p = well_shape(u0);
            assert!((d.p0 - p).abs() < 1e-4 * p.abs().max(1e-3), "U0={u0} p {} vs {p}", d.p0);
            assert!(d.p0_reliable);
        }
    }

    #[test]
    fn passes_zero_of_a0() {
        // a0 changes sign between consecutive thresholds; pick the zero of
        // tan(kappa) = kappa near kappa = 4.4934
        let kappa: f64 = 4.493409457909064;
        let d = integrate_ere_direct(&square_well(kappa * kappa, 1.0).unwrap(), &VpaOptions::default())
            .unwrap();
        assert!(d.a0.abs() < 1e-7);
        assert!(d.r0.abs() > 1e6, "r0 = {}", d.r0);
        // in, then out of the theta2 form as sin(theta1) returns to zero
        assert!(d.switches >= 2);
    }

    #[test]
    fn zero_potential_exact() {
        let d = integrate_ere_direct(
            &ReducedPotential::zero(crate::UnitSystem::reduced()),
            &VpaOptions::default(),
        )
        .unwrap();
        assert_eq!((d.a0, d.r0, d.p0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn trace_csv_columns() {
        let d = integrate_ere_direct(&square_well(2.0, 1.0).unwrap(), &VpaOptions::default()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header.split(',').count(), 7);
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == 7));
    }
}
