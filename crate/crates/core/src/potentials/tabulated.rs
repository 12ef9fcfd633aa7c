//! Potentials given on a radial grid.
//!
//! File format: a header line of `key=value` tokens after `#`, then two
//! numeric columns `r V` (whitespace or comma separated).
//!
//! ```text
//! # units=atomic mass=1.211e5 tail=power:6 interpolation=cubic
//! 5.0  1.2e-3
//! ...
//! ```
//!
//! `units` is `atomic` (needs `mass` in electron masses), `nuclear`
//! (optional `mass` = mu c^2 in MeV and `hbar_c`) or `reduced` (second
//! column is already `U`). `tail` is `zero` (default) or `power:n`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NuclearConstants, ReducedPotential, TailLaw, UnitSystem};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Natural cubic spline (C2, fourth order on smooth data).
    #[default]
    Cubic,
    /// Fritsch-Carlson monotone cubic; no overshoot at steps.
    Monotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum TabulatedTail {
    #[default]
    Zero,
    /// Continue as `V_last (r_last / r)^n`.
    Power(f64),
}

#[derive(Debug, Clone)]
struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Hermite {
    fn eval(&self, r: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (r - self.x[i]) / h;
        let t1 = 1.0 - t;
        let h00 = (1.0 + 2.0 * t) * t1 * t1;
        let h10 = t * t1 * t1;
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        h00 * self.y[i] + h * h10 * self.m[i] + h01 * self.y[i + 1] + h * h11 * self.m[i + 1]
    }
}

fn natural_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

    // Second derivatives with M_0 = M_{n-1} = 0 (Thomas algorithm).
    let mut second = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let a = h[i - 1];
        let b = 2.0 * (h[i - 1] + h[i]);
        let cc = h[i];
        let rhs = 6.0 * (delta[i] - delta[i - 1]);
        let denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        second[i] = d[i] - c[i] * second[i + 1];
    }

    let mut m = vec![0.0; n];
    for i in 0..n - 1 {
        m[i] = delta[i] - h[i] * (2.0 * second[i] + second[i + 1]) / 6.0;
    }
    m[n - 1] = delta[n - 2] + h[n - 2] * (second[n - 2] + 2.0 * second[n - 1]) / 6.0;
    m
}

fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / delta[i];
        let b = m[i + 1] / delta[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * delta[i];
            m[i + 1] = tau * b * delta[i];
        }
    }
    m
}

/// Interpolated potential through `(r, V)` samples, `V` in `units`' energy unit.
pub fn tabulated_potential(
    samples: &[(f64, f64)],
    interpolation: Interpolation,
    tail: TabulatedTail,
    units: UnitSystem,
) -> Result<ReducedPotential> {
    if samples.len() < 4 {
        return Err(Error::Format {
            line: 0,
            message: format!("need at least 4 samples, got {}", samples.len()),
        });
    }
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Format {
                line: i + 2,
                message: format!("radii must increase strictly ({} then {})", w[0].0, w[1].0),
            });
        }
    }
    if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite() || s.0 < 0.0) {
        return Err(Error::Format { line: 0, message: "non-finite or negative sample".into() });
    }
    if let TabulatedTail::Power(n) = tail {
        if !(n > 0.0) {
            return Err(Error::Format { line: 0, message: format!("tail exponent must be positive, got {n}") });
        }
    }

    let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let y: Vec<f64> = samples.iter().map(|s| units.to_reduced(s.1)).collect();
    let m = match interpolation {
        Interpolation::Cubic => natural_slopes(&x, &y),
        Interpolation::Monotone => monotone_slopes(&x, &y),
    };
    let spline = Hermite { x, y, m };
    let (r_first, r_last) = (spline.x[0], *spline.x.last().unwrap());
    let u_last = *spline.y.last().unwrap();

    let law = match tail {
        TabulatedTail::Zero => TailLaw::ShortRange,
        TabulatedTail::Power(n) => TailLaw::Power(n),
    };
    let r_core = r_first.max(units.default_r_core());
    let p = ReducedPotential::new(
        format!("tabulated ({} points)", samples.len()),
        units,
        law,
        move |r| {
            if r <= r_last {
                spline.eval(r)
            } else {
                match tail {
                    TabulatedTail::Zero => 0.0,
                    TabulatedTail::Power(n) => u_last * (r_last / r).powf(n),
                }
            }
        },
    );
    let p = p.with_r_core(r_core)?;
    let breaks = if tail == TabulatedTail::Zero { vec![r_last] } else { Vec::new() };
    Ok(p.with_breakpoints(breaks))
}

/// Parse the text format described in the module docs.
pub fn parse_tabulated(text: &str) -> Result<ReducedPotential> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (header_no, header) = lines
        .next()
        .ok_or(Error::Format { line: 1, message: "empty file".into() })?;
    let header = header
        .trim()
        .strip_prefix('#')
        .ok_or(Error::Format { line: header_no + 1, message: "first line must be a '#' header".into() })?;

    let bad = |msg: String| Error::Format { line: header_no + 1, message: msg };
    let mut units_name = None;
    let mut mass = None;
    let mut hbar_c = None;
    let mut tail = TabulatedTail::Zero;
    let mut interpolation = Interpolation::Cubic;
    for token in header.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| bad(format!("expected key=value, got '{token}'")))?;
        let number = || value.parse::<f64>().map_err(|_| bad(format!("{key}: not a number '{value}'")));
        match key {
            "units" => units_name = Some(value.to_string()),
            "mass" => mass = Some(number()?),
            "hbar_c" => hbar_c = Some(number()?),
            "tail" => {
                tail = match value {
                    "zero" | "" => TabulatedTail::Zero,
                    v => {
                        let n = v
                            .strip_prefix("power:")
                            .and_then(|n| n.parse::<f64>().ok())
                            .ok_or_else(|| bad(format!("tail must be zero or power:<n>, got '{v}'")))?;
                        TabulatedTail::Power(n)
                    }
                }
            }
            "interpolation" => {
                interpolation = match value {
                    "cubic" => Interpolation::Cubic,
                    "monotone" => Interpolation::Monotone,
                    v => return Err(bad(format!("unknown interpolation '{v}'"))),
                }
            }
            other => return Err(bad(format!("unknown header key '{other}'"))),
        }
    }

    let units = match units_name.as_deref() {
        Some("atomic") => UnitSystem::atomic(mass.ok_or_else(|| bad("atomic units need mass=".into()))?),
        Some("nuclear") => {
            let mut c = NuclearConstants::default();
            if let Some(hc) = hbar_c {
                c.hbar_c = hc;
            }
            let mut u = UnitSystem::nuclear(&c);
            if let Some(mu) = mass {
                u.energy_to_reduced = 2.0 * mu / (c.hbar_c * c.hbar_c);
            }
            u
        }
        Some("reduced") => UnitSystem::reduced(),
        Some(other) => return Err(bad(format!("unknown units '{other}'"))),
        None => return Err(bad("header must declare units=".into())),
    };
    if !(units.energy_to_reduced > 0.0) {
        return Err(bad("mass must be positive".into()));
    }

    let mut samples = Vec::new();
    for (no, line) in lines {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            return Err(Error::Format { line: no + 1, message: format!("expected two columns, got {}", fields.len()) });
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Format { line: no + 1, message: format!("not a number '{s}'") })
        };
        samples.push((parse(fields[0])?, parse(fields[1])?));
    }
    tabulated_potential(&samples, interpolation, tail, units)
}

pub fn load_tabulated(path: impl AsRef<Path>) -> Result<ReducedPotential> {
    parse_tabulated(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn cubic_reproduces_smooth_function() {
        let xs = grid(200, 0.5, 10.0);
        let s: Vec<(f64, f64)> = xs.iter().map(|&x| (x, (-x).exp() * x.sin())).collect();
        let p = tabulated_potential(&s, Interpolation::Cubic, TabulatedTail::Zero, UnitSystem::reduced()).unwrap();
        for &r in &[1.03f64, 2.7, 5.55, 9.1] {
            let exact = (-r).exp() * r.sin();
            assert!((p.eval(r) - exact).abs() < 1e-6, "r={r}");
        }
        assert_eq!(p.eval(10.5), 0.0);
    }

    #[test]
    fn monotone_does_not_overshoot_a_step() {
        let s: Vec<(f64, f64)> = grid(41, 0.0, 2.0).iter().map(|&x| (x, if x < 1.0 { -1.0 } else { 0.0 })).collect();
        let p = tabulated_potential(&s, Interpolation::Monotone, TabulatedTail::Zero, UnitSystem::reduced()).unwrap();
        let mut r = 0.0;
        while r < 2.0 {
            let v = p.eval(r);
            assert!((-1.0 - 1e-12..=1e-12).contains(&v), "r={r} v={v}");
            r += 0.0013;
        }
    }

    #[test]
    fn power_tail() {
        let s: Vec<(f64, f64)> = grid(10, 1.0, 10.0).iter().map(|&x| (x, -1.0 / x.powi(6))).collect();
        let p = tabulated_potential(&s, Interpolation::Cubic, TabulatedTail::Power(6.0), UnitSystem::reduced()).unwrap();
        assert!((p.eval(20.0) + 1.0 / 20f64.powi(6)).abs() < 1e-18);
        assert_eq!(p.tail_exponent(), Some(6.0));
    }

    #[test]
    fn rejects_bad_tables() {
        let u = UnitSystem::reduced();
        let short = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)];
        assert!(matches!(tabulated_potential(&short, Interpolation::Cubic, TabulatedTail::Zero, u), Err(Error::Format { .. })));
        let dup = [(1.0, 0.0), (2.0, 0.0), (2.0, 0.0), (3.0, 0.0)];
        assert!(matches!(tabulated_potential(&dup, Interpolation::Cubic, TabulatedTail::Zero, u), Err(Error::Format { line: 3, .. })));
        let unsorted = [(1.0, 0.0), (3.0, 0.0), (2.0, 0.0), (4.0, 0.0)];
        assert!(tabulated_potential(&unsorted, Interpolation::Cubic, TabulatedTail::Zero, u).is_err());
    }

    #[test]
    fn parses_text_format() {
        let text = "# units=atomic mass=0.5 tail=power:6\n1 -1\n2, -0.5\n# comment\n3 -0.25\n4 -0.125\n";
        let p = parse_tabulated(text).unwrap();
        assert!((p.eval(2.0) + 0.5).abs() < 1e-15);
        assert_eq!(p.tail_exponent(), Some(6.0));

        let text = "# units=nuclear tail=zero interpolation=monotone\n1 -1\n2 -1\n3 -1\n4 0\n";
        let p = parse_tabulated(text).unwrap();
        assert!((p.energy(1.5) + 1.0).abs() < 1e-12);

        assert!(matches!(parse_tabulated("1 2\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(parse_tabulated("# units=atomic\n1 2\n"), Err(Error::Format { .. })));
        assert!(matches!(
            parse_tabulated("# units=reduced\n1 2\n2 x\n3 1\n4 1\n"),
            Err(Error::Format { line: 3, .. })
        ));
    }
}
