//! Dormand-Prince 5(4) stepper with continuous (dense) output.
//!
//! The stepper hands out one accepted step at a time so callers can inspect
//! the new state, reject it on their own criteria, or change the
//! representation of the state between steps.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; estimated from the right-hand side when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Smallest step relative to `max(|t|, 1)` before giving up.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            min_step: 1e-15,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    /// Step size fell below the floor at `t`.
    Underflow { t: f64 },
    /// `max_steps` accepted steps taken before reaching the end point.
    Budget { t: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    /// Derivative at `t1` (first stage of the next step).
    pub f1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Fourth-order continuous extension, valid for `t` in `[t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h();
        let s1 = 1.0 - s;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        })
    }
}

#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    rtol: [f64; N],
    atol: [f64; N],
    angle: [bool; N],
    h: Option<f64>,
    h_max: f64,
    min_step: f64,
    last_rejected: bool,
    pub stats: Stats,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(opts: &OdeOptions) -> Self {
        Self {
            rtol: [opts.rtol; N],
            atol: [opts.atol; N],
            angle: [false; N],
            h: opts.h_init,
            h_max: opts.h_max,
            min_step: opts.min_step,
            last_rejected: false,
            stats: Stats::default(),
        }
    }

    /// Control component `i` in absolute terms (tolerance `atol + rtol`),
    /// which suits angle-like variables whose magnitude carries no scale.
    pub fn absolute(mut self, i: usize) -> Self {
        self.atol[i] += self.rtol[i];
        self.rtol[i] = 0.0;
        self
    }

    /// Like [`Self::absolute`] above magnitude one but relative below it, so
    /// a small angle that is still growing from zero keeps its digits.
    pub fn angle(mut self, i: usize) -> Self {
        self = self.absolute(i);
        self.angle[i] = true;
        self
    }

    /// Caller-side rejection: the next attempt uses a step `factor` times
    /// the one that produced the rejected result.
    pub fn shrink(&mut self, last: f64, factor: f64) {
        self.h = Some(last * factor);
        self.last_rejected = true;
    }

    pub fn current_step(&self) -> Option<f64> {
        self.h
    }

    fn norm(&self, e: &[f64; N], y0: &[f64; N], y1: &[f64; N]) -> f64 {
        self.weighted_norm(e, y0, y1, false)
    }

    /// `coarse` treats angle components as absolute; the initial-step guess
    /// needs a scale that does not vanish with the state.
    fn weighted_norm(&self, e: &[f64; N], y0: &[f64; N], y1: &[f64; N], coarse: bool) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let m = y0[i].abs().max(y1[i].abs());
            let sc = if self.angle[i] && !coarse {
                (self.atol[i] * m.min(1.0)).max(f64::MIN_POSITIVE)
            } else {
                self.atol[i] + self.rtol[i] * m
            };
            let q = e[i] / sc;
            acc += q * q;
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<F>(&mut self, f: &mut F, t: f64, y: &[f64; N], f0: &[f64; N], span: f64) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let d0 = self.weighted_norm(y, y, y, true);
        let d1 = self.weighted_norm(f0, y, y, true);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        let dir = span.signum();
        let y1: [f64; N] = std::array::from_fn(|i| y[i] + dir * h0 * f0[i]);
        let f1 = f(t + dir * h0, &y1);
        self.stats.evaluations += 1;
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
        let d2 = self.weighted_norm(&diff, y, y, true) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Advance from `(t, y)` towards `t_end`, retrying internally until a
    /// step passes the error test. `f0` must be the derivative at `(t, y)`.
    pub fn step<F>(
        &mut self,
        f: &mut F,
        t: f64,
        y: &[f64; N],
        f0: &[f64; N],
        t_end: f64,
    ) -> Result<Step<N>, StepFailure>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let span = t_end - t;
        let dir = span.signum();
        let mut h = match self.h {
            Some(h) => h.abs(),
            None => self.initial_step(f, t, y, f0, span),
        };
        let floor = self.min_step * t.abs().max(1.0);

        loop {
            h = h.min(self.h_max);
            let mut last = false;
            if h >= span.abs() {
                h = span.abs();
                last = true;
            }
            if h < floor && !last {
                return Err(StepFailure::Underflow { t });
            }
            let hs = dir * h;

            let k1 = *f0;
            let k2 = f(t + C2 * hs, &std::array::from_fn(|i| y[i] + hs * A21 * k1[i]));
            let k3 = f(
                t + C3 * hs,
                &std::array::from_fn(|i| y[i] + hs * (A31 * k1[i] + A32 * k2[i])),
            );
            let k4 = f(
                t + C4 * hs,
                &std::array::from_fn(|i| y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])),
            );
            let k5 = f(
                t + C5 * hs,
                &std::array::from_fn(|i| {
                    y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
                }),
            );
            let k6 = f(
                t + hs,
                &std::array::from_fn(|i| {
                    y[i] + hs
                        * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
                }),
            );
            let t1 = if last { t_end } else { t + hs };
            let y1: [f64; N] = std::array::from_fn(|i| {
                y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
            });
            let k7 = f(t1, &y1);
            self.stats.evaluations += 6;

            let e: [f64; N] = std::array::from_fn(|i| {
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            let mut err = self.norm(&e, y, &y1);
            if !err.is_finite() || y1.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }

            if err <= 1.0 {
                let mut fac = if err == 0.0 { 10.0 } else { 0.9 * err.powf(-0.2) };
                fac = fac.clamp(0.2, 10.0);
                if self.last_rejected {
                    fac = fac.min(1.0);
                }
                self.last_rejected = false;
                self.h = Some(h * fac);
                self.stats.accepted += 1;

                let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
                let cont = [
                    *y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]),
                    std::array::from_fn(|i| {
                        hs * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i])
                    }),
                ];
                return Ok(Step { t0: t, t1, y0: *y, y1, f1: k7, cont });
            }

            self.stats.rejected += 1;
            self.last_rejected = true;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
        }
    }
}

/// Integrate from `t0` to `t_end`, passing every accepted step to `observe`.
pub fn integrate<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<([f64; N], Stats), StepFailure>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&Step<N>),
{
    let mut stepper = Dopri5::new(opts);
    let mut t = t0;
    let mut y = y0;
    let mut fy = f(t, &y);
    stepper.stats.evaluations += 1;
    while t != t_end {
        if stepper.stats.accepted >= opts.max_steps {
            return Err(StepFailure::Budget { t });
        }
        let step = stepper.step(&mut f, t, &y, &fy, t_end)?;
        observe(&step);
        t = step.t1;
        y = step.y1;
        fy = step.f1;
    }
    Ok((y, stepper.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = OdeOptions::default();
        let (y, stats) = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, &opts, |_| {}).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        let (y, _) =
            integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 10.0, [10f64.sin(), 10f64.cos()], 0.0, &opts, |_| {})
                .unwrap();
        assert!(y[0].abs() < 1e-10);
        assert!((y[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
        let mut worst: f64 = 0.0;
        integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 20.0, &opts, |s| {
            for j in 1..4 {
                let t = s.t0 + s.h() * j as f64 / 4.0;
                let y = s.interpolate(t);
                worst = worst.max((y[0] - t.sin()).abs());
            }
            let y = s.interpolate(s.t1);
            assert!((y[0] - s.y1[0]).abs() < 1e-14);
        })
        .unwrap();
        assert!(worst < 1e-8, "worst interpolation error {worst}");
    }

    #[test]
    fn caller_rejection_shrinks_the_next_attempt() {
        let opts = OdeOptions::default();
        let mut f = |_: f64, y: &[f64; 1]| [y[0]];
        let mut stepper = Dopri5::new(&opts);
        let s = stepper.step(&mut f, 0.0, &[1.0], &[1.0], 1.0).unwrap();
        stepper.shrink(s.h(), 0.25);
        let s2 = stepper.step(&mut f, 0.0, &[1.0], &[1.0], 1.0).unwrap();
        assert!(s2.h() <= 0.25 * s.h() * (1.0 + 1e-12));
    }

    #[test]
    fn blow_up_reports_underflow() {
        let opts = OdeOptions::default();
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, &opts, |_| {});
        match r {
            Err(StepFailure::Underflow { t }) => assert!((t - 1.0).abs() < 1e-3),
            other => panic!("expected underflow, got {other:?}"),
        }
    }
}
