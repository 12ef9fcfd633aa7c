use std::f64::consts::FRAC_PI_2;

use super::{pole_index, VpaOptions, VpaProblem, VpaTrace};
use crate::ode::{Dopri5, OdeOptions, Stats, Step, StepFailure};
use crate::{Error, Result};

/// Integration span in `phi` shared by the compactified solvers.
pub(super) struct Span {
    pub phi0: f64,
    pub phi_mid: f64,
    pub phi_end: f64,
    /// Interior stops (breakpoints), then `phi_mid`, then `phi_end`.
    pub stops: Vec<f64>,
}

pub(super) fn span(breakpoints: &[f64], r_core: f64, opts: &VpaOptions) -> Result<Span> {
    let r0 = opts.epsilon_r.unwrap_or(r_core);
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Parameter(format!("start radius must be positive, got {r0}")));
    }
    if !(opts.phi_margin > 0.0 && opts.phi_margin < 1e-2) {
        return Err(Error::Parameter(format!(
            "phi_margin must lie in (0, 0.01), got {}",
            opts.phi_margin
        )));
    }
    if !(opts.rtol >= 0.0 && opts.atol > 0.0) {
        return Err(Error::Parameter("tolerances must be positive".into()));
    }
    let phi0 = r0.atan();
    let phi_end = FRAC_PI_2 - opts.phi_margin;
    let phi_mid = FRAC_PI_2 - 10.0 * opts.phi_margin;
    if phi0 >= phi_mid {
        return Err(Error::Parameter(format!("start radius {r0} lies beyond the integration end")));
    }
    let mut stops: Vec<f64> = breakpoints
        .iter()
        .map(|b| b.atan())
        .filter(|&p| p > phi0 && p < phi_mid)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(phi_mid);
    stops.push(phi_end);
    Ok(Span { phi0, phi_mid, phi_end, stops })
}

/// `U` evaluated on the side of any discontinuity that belongs to the
/// segment `[lo, hi]`, so stage points landing on a breakpoint in floating
/// point do not pick up the neighbouring value.
#[inline]
pub(super) fn eval_in(pot: &crate::ReducedPotential, r: f64, lo: f64, hi: f64) -> f64 {
    let lo = lo * (1.0 + 8.0 * f64::EPSILON);
    let hi = hi * (1.0 - 8.0 * f64::EPSILON);
    pot.eval(if lo < hi { r.clamp(lo, hi) } else { r })
}

pub(super) fn map_failure(e: StepFailure, stats: &Stats) -> Error {
    match e {
        StepFailure::Underflow { t } => Error::Stiffness { r: t.tan() },
        StepFailure::Budget { t } => Error::StepBudget { steps: stats.accepted, r: t.tan() },
    }
}

pub(super) fn ode_options(opts: &VpaOptions) -> OdeOptions {
    OdeOptions { rtol: opts.rtol, atol: opts.atol, max_steps: opts.max_steps, ..Default::default() }
}

/// Collects trace samples either at every step end or at requested `phi`.
pub(super) struct Sampler {
    targets: Option<Vec<f64>>,
    next: usize,
}

impl Sampler {
    pub fn new(radii: Option<&[f64]>) -> Self {
        let targets = radii.map(|rs| {
            let mut t: Vec<f64> = rs.iter().filter(|r| **r > 0.0).map(|r| r.atan()).collect();
            t.sort_by(f64::total_cmp);
            t
        });
        Self { targets, next: 0 }
    }

    pub fn wants_start(&mut self, phi0: f64) -> bool {
        match &self.targets {
            None => true,
            Some(t) => {
                // samples inside the core are reported at the start point
                let mut hit = false;
                while self.next < t.len() && t[self.next] <= phi0 {
                    self.next += 1;
                    hit = true;
                }
                hit
            }
        }
    }

    /// Requested points beyond `phi0`, or `None` when every step is recorded.
    pub fn targets_after(self, phi0: f64) -> Option<Vec<f64>> {
        self.targets.map(|t| t.into_iter().filter(|p| *p > phi0).collect())
    }

    /// Points inside `(t0, t1]` at which the step should be reported.
    pub fn points<const N: usize>(&mut self, step: &Step<N>) -> Vec<(f64, [f64; N])> {
        match &self.targets {
            None => vec![(step.t1, step.y1)],
            Some(t) => {
                let mut out = Vec::new();
                while self.next < t.len() && t[self.next] <= step.t1 {
                    let p = t[self.next];
                    out.push((p, if p == step.t1 { step.y1 } else { step.interpolate(p) }));
                    self.next += 1;
                }
                out
            }
        }
    }
}

/// Integrates `theta(phi)` from the inner cutoff to `pi/2 - phi_margin` and
/// returns the extrapolated `a_l(k, infinity) = S tan(theta_infinity)`.
pub fn integrate_theta(problem: &VpaProblem, opts: &VpaOptions) -> Result<VpaTrace> {
    let pot = &problem.potential;
    let s = problem.scale();
    let sp = span(&pot.breakpoints, pot.r_core, opts)?;
    let mut sampler = Sampler::new(opts.sample_radii.as_deref());

    let mut trace = VpaTrace {
        l: problem.l,
        k: problem.k,
        scale: s,
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
    let base = pole_index(0.0);
    if sampler.wants_start(sp.phi0) {
        trace.phi.push(sp.phi0);
        trace.theta.push(0.0);
        trace.crossings.push(0);
    }

    if pot.is_zero() {
        let targets = Sampler::new(opts.sample_radii.as_deref())
            .targets_after(sp.phi0)
            .unwrap_or_else(|| vec![sp.phi_end]);
        for p in targets {
            trace.phi.push(p);
            trace.theta.push(0.0);
            trace.crossings.push(0);
        }
        return Ok(trace);
    }

    let rhs = |phi: f64, y: &[f64; 1], lo: f64, hi: f64| -> [f64; 1] {
        let r = phi.tan();
        let (bu, bv) = problem.bracket(r);
        let (sn, c) = y[0].sin_cos();
        let d = bu * c - bv * s * sn;
        [(1.0 + r * r) * eval_in(pot, r, lo, hi) * d * d / s]
    };
    // d(rhs)/d(theta): growth rate of a perturbation of theta
    let jac = |phi: f64, theta: f64, lo: f64, hi: f64| -> f64 {
        let r = phi.tan();
        let (bu, bv) = problem.bracket(r);
        let (sn, c) = theta.sin_cos();
        let d = bu * c - bv * s * sn;
        -2.0 * (1.0 + r * r) * eval_in(pot, r, lo, hi) * d * (bu * sn + bv * s * c) / s
    };

    let mut stepper = Dopri5::<1>::new(&ode_options(opts)).angle(0);
    let mut phi = sp.phi0;
    let mut y = [0.0];
    let mut theta_mid = 0.0;
    // sum of local error bounds, each carried to the current point by the
    // linearised flow exp(int jac)
    let mut propagated = 0.0;
    let tol = opts.atol + opts.rtol;
    for &stop in &sp.stops {
        // the right-hand side may jump at a stop, so restart its derivative
        let (lo, hi) = (phi.tan(), stop.tan());
        let mut rhs = |p: f64, v: &[f64; 1]| rhs(p, v, lo, hi);
        let mut fy = rhs(phi, &y);
        let mut jy = jac(phi, y[0], lo, hi);
        stepper.stats.evaluations += 1;
        while phi < stop {
            if stepper.stats.accepted >= opts.max_steps {
                return Err(map_failure(StepFailure::Budget { t: phi }, &stepper.stats));
            }
            let step = stepper
                .step(&mut rhs, phi, &y, &fy, stop)
                .map_err(|e| map_failure(e, &stepper.stats))?;
            for (p, v) in sampler.points(&step) {
                trace.phi.push(p);
                trace.theta.push(v[0]);
                trace.crossings.push(pole_index(v[0]) - base);
            }
            let j1 = jac(step.t1, step.y1[0], lo, hi);
            let growth = (0.5 * step.h() * (jy + j1)).clamp(-700.0, 700.0).exp();
            propagated = (propagated * growth).min(f64::MAX / 4.0) + tol * step.y1[0].abs().min(1.0);
            jy = j1;
            phi = step.t1;
            y = step.y1;
            fy = step.f1;
        }
        if stop == sp.phi_mid {
            theta_mid = y[0];
        }
    }

    let theta_end = y[0];
    let richardson = (theta_end - theta_mid) / 9.0;
    let theta_inf = if opts.extrapolate { theta_end + richardson } else { theta_end };
    let sec2 = 1.0 + theta_inf.tan().powi(2);
    let local = propagated.max(tol * f64::EPSILON);
    let truncation = if opts.extrapolate { 0.1 * richardson.abs() } else { richardson.abs() };

    trace.theta_infinity = theta_inf;
    trace.a_infinity = s * theta_inf.tan();
    trace.at_resonance = theta_inf.cos().abs() < opts.pole_tolerance;
    trace.pole_crossings = (pole_index(theta_inf) - base).unsigned_abs() as u32;
    trace.a_tolerance = s * sec2 * (local + truncation + f64::EPSILON * theta_inf.abs());
    trace.stats = stepper.stats;
    Ok(trace)
}

/// Integrates the raw equation for `a_l(k, r)` in `r` up to `r_max`,
/// returning the sampled `(r, a)`. Fails with [`Error::Pole`] when `a`
/// runs off to infinity, which happens whenever a bound state is present.
pub fn integrate_untransformed(
    problem: &VpaProblem,
    r_max: f64,
    opts: &VpaOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pot = &problem.potential;
    let r0 = opts.epsilon_r.unwrap_or(pot.r_core);
    if !(r0 > 0.0) || !(r_max > r0) || !r_max.is_finite() {
        return Err(Error::Parameter(format!("need 0 < r_start < r_max, got {r0} and {r_max}")));
    }
    let s = problem.scale();
    let two_l1 = 2 * problem.l as i32 + 1;
    let rhs = |r: f64, y: &[f64; 1], lo: f64, hi: f64| -> [f64; 1] {
        let (bu, bv) = problem.bracket(r);
        let d = bu - bv * y[0];
        [eval_in(pot, r, lo, hi) * d * d]
    };
    let ode = OdeOptions { atol: opts.atol * s, ..ode_options(opts) };
    let mut stepper = Dopri5::<1>::new(&ode);

    let targets = opts.sample_radii.as_ref().map(|v| {
        let mut v: Vec<f64> = v.iter().copied().filter(|x| *x >= r0 && *x <= r_max).collect();
        v.sort_by(f64::total_cmp);
        v
    });
    let mut next = 0;
    let (mut rs, mut as_) = (Vec::new(), Vec::new());
    let push = |rs: &mut Vec<f64>, as_: &mut Vec<f64>, r: f64, a: f64| {
        rs.push(r);
        as_.push(a);
    };
    match &targets {
        None => push(&mut rs, &mut as_, r0, 0.0),
        Some(t) => {
            while next < t.len() && t[next] <= r0 {
                push(&mut rs, &mut as_, r0, 0.0);
                next += 1;
            }
        }
    }

    let mut stops: Vec<f64> =
        pot.breakpoints.iter().copied().filter(|b| *b > r0 && *b < r_max).collect();
    stops.push(r_max);
    let mut r = r0;
    let mut y = [0.0];
    for stop in stops {
        let lo = r;
        let mut rhs = |t: f64, v: &[f64; 1]| rhs(t, v, lo, stop);
        let mut fy = rhs(r, &y);
        while r < stop {
            if stepper.stats.accepted >= opts.max_steps {
                return Err(Error::StepBudget { steps: stepper.stats.accepted, r });
            }
            let h = stepper.current_step().unwrap_or(0.0);
            let step = match stepper.step(&mut rhs, r, &y, &fy, stop) {
                Ok(st) => st,
                Err(StepFailure::Underflow { t }) => {
                    return Err(Error::Pole { lo: t, hi: t + h.abs() })
                }
                Err(StepFailure::Budget { t }) => {
                    return Err(Error::StepBudget { steps: stepper.stats.accepted, r: t })
                }
            };
            let guard = opts.divergence_guard * s.max(step.t1.powi(two_l1));
            if step.y1[0].abs() > guard {
                return Err(Error::Pole { lo: step.t0, hi: step.t1 });
            }
            match &targets {
                None => push(&mut rs, &mut as_, step.t1, step.y1[0]),
                Some(t) => {
                    while next < t.len() && t[next] <= step.t1 {
                        let a = if t[next] == step.t1 {
                            step.y1[0]
                        } else {
                            step.interpolate(t[next])[0]
                        };
                        push(&mut rs, &mut as_, t[next], a);
                        next += 1;
                    }
                }
            }
            r = step.t1;
            y = step.y1;
            fy = step.f1;
        }
    }
    Ok((rs, as_))
}
