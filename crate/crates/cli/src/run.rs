//! Mode dispatch. Every mode renders its CSV into memory first so a
//! numerical failure never leaves a half-written file behind.

use std::fmt::Write as _;
use std::io::Write;

use calogero::coulomb::{coulomb_ere_lhs, integrate_coulomb, CoulombContext, CoulombOptions};
use calogero::ere::{
    fit_ere_with, fit_points, fit_problem, geometric_grid, nuclear_table, reference_window, sweep_k, write_sweep_csv,
    write_table_csv, EreParams, FitOptions, FitReport,
};
use calogero::oracle::{count_bound_states, phase_shift, NumerovOptions};
use calogero::vpa::{fmt17, integrate_ere_direct, integrate_theta, validity_check, Validity};
use calogero::{UnitSystem, VpaOptions, VpaProblem};

use crate::config::{Built, Mode, RunConfig};
use crate::error::CliError;

pub struct Output {
    pub csv: Vec<u8>,
    pub summary: String,
}

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.validate()?;
    let mode = cfg.mode()?;
    if mode == Mode::NuclearTable {
        return table(cfg);
    }
    let built = cfg.build()?;
    let mut out = match (mode, cfg.coulomb.enabled) {
        (Mode::ScatteringLength, false) => scattering_length(cfg, &built)?,
        (Mode::ScatteringLength, true) => coulomb_scattering_length(cfg, &built)?,
        (Mode::EreFit, false) => ere_fit(cfg, &built)?,
        (Mode::EreFit, true) => coulomb_ere_fit(cfg, &built)?,
        (Mode::EreDirect, _) => ere_direct(cfg, &built)?,
        (Mode::Trace, _) => trace(cfg, &built)?,
        (Mode::OracleCheck, _) => oracle_check(cfg, &built)?,
        (Mode::NuclearTable, _) => unreachable!(),
    };
    if let Validity::LongRangeWarning { tail_exponent, l } = validity_check(&built.potential, built.channel.l) {
        out.summary.push_str(&format!(
            "warning: a U ~ r^-{tail_exponent} tail leaves the l = {l} zero-energy limit undefined\n"
        ));
    }
    Ok(out)
}

fn vpa_options(cfg: &RunConfig) -> VpaOptions {
    let d = VpaOptions::default();
    VpaOptions {
        rtol: cfg.run.rtol.unwrap_or(d.rtol),
        atol: cfg.run.atol.unwrap_or(d.atol),
        phi_margin: cfg.run.phi_margin.unwrap_or(d.phi_margin),
        epsilon_r: cfg.run.epsilon_r,
        sample_radii: Some(Vec::new()),
        ..d
    }
}

fn problem(cfg: &RunConfig, built: &Built, k: f64) -> Result<VpaProblem, CliError> {
    let p = VpaProblem::for_channel(built.potential.clone(), &built.channel, k)
        .map_err(|e| CliError::config("channel.l", e.to_string()))?;
    match cfg.run.scale_length {
        Some(s) => p.with_scale_length(s).map_err(|e| CliError::config("run.scale_length", e.to_string())),
        None => Ok(p),
    }
}

fn units(built: &Built) -> UnitSystem {
    built.potential.units
}

fn fit_options(cfg: &RunConfig) -> FitOptions {
    FitOptions { weighting: cfg.run.weighting.unwrap_or_default(), ..FitOptions::default() }
}

fn fixed_grid(cfg: &RunConfig) -> Option<Vec<f64>> {
    match (cfg.run.k_min, cfg.run.k_max, cfg.run.n_k) {
        (Some(lo), Some(hi), Some(n)) => Some(geometric_grid(hi, hi / lo, n)),
        _ => None,
    }
}

fn scattering_length(cfg: &RunConfig, built: &Built) -> Result<Output, CliError> {
    let k = cfg.run.k.unwrap_or(0.0);
    let t = integrate_theta(&problem(cfg, built, k)?, &vpa_options(cfg))?;
    if t.at_resonance {
        return Err(CliError::Result(format!("a_l(k = {k}) sits on a pole; theta_inf = {}", t.theta_infinity)));
    }
    let u = units(built);
    let l = t.l as i32;
    let la = u.length_power(2 * l + 1);
    let mut csv = Vec::new();
    writeln!(
        csv,
        "l[1],k[{}],a[{la}],a_tolerance[{la}],theta_infinity[rad],pole_crossings[count]",
        u.length_power(-1)
    )?;
    writeln!(
        csv,
        "{},{},{},{},{},{}",
        t.l,
        fmt17(k),
        fmt17(t.a_infinity),
        fmt17(t.a_tolerance),
        fmt17(t.theta_infinity),
        t.pole_crossings
    )?;
    let summary = format!(
        "{} {}: a = {:.10e} +- {:.1e} {la} at k = {k} {}, {} pole crossing(s)\n",
        built.potential.label,
        built.channel.label(),
        t.a_infinity,
        t.a_tolerance,
        u.length_power(-1),
        t.pole_crossings
    );
    Ok(Output { csv, summary })
}

fn context(cfg: &RunConfig, built: &Built, k: f64) -> Result<CoulombContext, CliError> {
    let c = &cfg.coulomb;
    let (z1, z2) = (c.z1.unwrap_or(0), c.z2.unwrap_or(0));
    let ctx = match (c.a_n, &built.constants) {
        (Some(a_n), _) => CoulombContext::new(z1, z2, a_n, k),
        (None, Some(nc)) => CoulombContext::nuclear(z1, z2, nc.reduced_mass(), nc.hbar_c, k),
        (None, None) => return Err(CliError::config("coulomb.a_n", "required unless the potential is woods-saxon")),
    };
    ctx.map_err(|e| CliError::config("coulomb", e.to_string()))
}

fn coulomb_options(cfg: &RunConfig) -> CoulombOptions {
    let d = CoulombOptions::default();
    CoulombOptions { rtol: cfg.run.rtol.unwrap_or(d.rtol), atol: cfg.run.atol.unwrap_or(d.atol), ..d }
}

fn coulomb_scattering_length(cfg: &RunConfig, built: &Built) -> Result<Output, CliError> {
    let k = cfg.run.k.unwrap_or(0.0);
    if !(k > 0.0) {
        return Err(CliError::config("run.k", "the Coulomb pipeline needs k > 0"));
    }
    let ctx = context(cfg, built, k)?;
    let l = built.channel.l;
    let res = integrate_coulomb(&built.potential, l, ctx.eta, k, &coulomb_options(cfg))?;
    let u = units(built);
    let mut csv = Vec::new();
    writeln!(
        csv,
        "l[1],k[{}],eta[1],a_n[{}],a_c[1],d_c[1],tan_delta[1],pole_crossings[count]",
        u.length_power(-1),
        u.length_unit()
    )?;
    writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        l,
        fmt17(k),
        fmt17(ctx.eta),
        fmt17(ctx.a_n),
        fmt17(res.a_c),
        fmt17(res.d_c),
        fmt17(res.tan_delta),
        res.pole_crossings
    )?;
    let summary = format!(
        "{} {} with Z1 Z2 = {}: eta = {:.6}, D^c = {:.10e}, tan(delta) = {:.10e}\n",
        built.potential.label,
        built.channel.label(),
        ctx.z1 * ctx.z2,
        ctx.eta,
        res.d_c,
        res.tan_delta
    );
    Ok(Output { csv, summary })
}

fn ere_fit(cfg: &RunConfig, built: &Built) -> Result<Output, CliError> {
    let prob = problem(cfg, built, 0.0)?;
    let opts = vpa_options(cfg);
    let l = prob.l;
    let (report, ks) = match fixed_grid(cfg) {
        Some(ks) => {
            let pts = sweep_k(&prob, &ks, &opts)?;
            (fit_ere_with(&fit_points(&pts), l, &fit_options(cfg))?, ks)
        }
        None => {
            let mut w = reference_window(&prob, &opts)?;
            w.fit = fit_options(cfg);
            let span = w.span_ratio;
            let report = fit_problem(&prob, &opts, Some(w))?;
            let kw = report.k_window;
            (report, geometric_grid(kw.k_max, span, kw.n_points))
        }
    };
    let points = sweep_k(&prob, &ks, &opts)?;
    let u = units(built);
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &points, Some(&report.params), l, &u)?;
    let mut summary = report.summary(&u);
    if let Some(note) = calogero::ere::expansion_advisory(&prob, report.k_window.k_max) {
        let _ = writeln!(summary, "note: {note}");
    }
    Ok(Output { csv, summary })
}

/// Default Coulomb window: `1 < eta < 19`, inside the validity of the
/// `h(eta)` series and the Coulomb-function envelope.
fn coulomb_grid(cfg: &RunConfig, a_n: f64) -> Vec<f64> {
    fixed_grid(cfg).unwrap_or_else(|| {
        let (lo, hi) = (1.0 / (19.0 * a_n), 1.0 / (1.05 * a_n));
        geometric_grid(hi, hi / lo, 20)
    })
}

fn coulomb_ere_fit(cfg: &RunConfig, built: &Built) -> Result<Output, CliError> {
    let l = built.channel.l;
    let a_n = context(cfg, built, 1.0)?.a_n;
    let opts = coulomb_options(cfg);
    let mut rows = Vec::new();
    for k in coulomb_grid(cfg, a_n) {
        let ctx = context(cfg, built, k)?;
        let res = integrate_coulomb(&built.potential, l, ctx.eta, k, &opts)?;
        let lhs = coulomb_ere_lhs(res.d_c, ctx.eta, l, a_n, k)?;
        rows.push((k, ctx.eta, res.d_c, lhs));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, 1.0 / r.3)).collect();
    let report: FitReport = fit_ere_with(&pts, l, &fit_options(cfg))?;
    let u = units(built);
    let li = l as i32;
    let mut csv = Vec::new();
    writeln!(
        csv,
        "k[{}],eta[1],d_c[1],lhs[{}],lhs_fit[{}]",
        u.length_power(-1),
        u.length_power(-(2 * li + 1)),
        u.length_power(-(2 * li + 1))
    )?;
    let model: &EreParams = &report.params;
    for (k, eta, d_c, lhs) in rows {
        writeln!(csv, "{},{},{},{},{}", fmt17(k), fmt17(eta), fmt17(d_c), fmt17(lhs), fmt17(model.inverse_d(k)))?;
    }
    let summary = format!("Coulomb-modified expansion, a_N = {a_n:.6} {}\n{}", u.length_unit(), report.summary(&u));
    Ok(Output { csv, summary })
}

fn ere_direct(cfg: &RunConfig, built: &Built) -> Result<Output, CliError> {
    let d = integrate_ere_direct(&built.potential, &vpa_options(cfg))?;
    let len = units(built).length_unit();
    let mut csv = Vec::new();
    writeln!(
        csv,
        "a0[{len}],r0[{len}],p0[1],p0_reliable[flag],r0_change[1],p0_change[1],bound_states[count]"
    )?;
    writeln!(
        csv,
        "{},{},{},{},{},{},{}",
        fmt17(d.a0),
        fmt17(d.r0),
        fmt17(d.p0),
        u8::from(d.p0_reliable),
        fmt17(d.r0_change),
        fmt17(d.p0_change),
        d.bound_states
    )?;
    let mut summary = format!(
        "{}: a0 = {:.10e} {len}, r0 = {:.10e} {len}, p0 = {:.6e}, {} bound state(s)\n",
        built.potential.label, d.a0, d.r0, d.p0, d.bound_states
    );
    if !d.p0_reliable {
        let _ = writeln!(summary, "warning: p0 still drifts by {:.1e} at the end of the integration", d.p0_change);
    }
    Ok(Output { csv, summary })
}

fn trace(cfg: &RunConfig, built: &Built) -> Result<Output, CliError> {
    let k = cfg.run.k.unwrap_or(0.0);
    let opts = VpaOptions { sample_radii: None, ..vpa_options(cfg) };
    let mut csv = Vec::new();
    let summary = if built.channel.l == 0 && k == 0.0 {
        let d = integrate_ere_direct(&built.potential, &opts)?;
        d.write_csv(&mut csv)?;
        format!("{} rows; endpoint a0 = {:.10e}, r0 = {:.10e}\n", d.theta1.phi.len(), d.a0, d.r0)
    } else {
        let t = integrate_theta(&problem(cfg, built, k)?, &opts)?;
        t.write_csv(&mut csv)?;
        format!("{} rows; endpoint a = {:.10e}\n", t.phi.len(), t.a_infinity)
    };
    Ok(Output { csv, summary })
}

fn table(cfg: &RunConfig) -> Result<Output, CliError> {
    let rows = nuclear_table(&cfg.nuclear_constants(), cfg.spin_orbit_sign(), &vpa_options(cfg))?;
    let mut csv = Vec::new();
    write_table_csv(&mut csv, &rows)?;
    let mut summary = String::from("channel       a (table)           r (table)           P (table)\n");
    for t in &rows {
        let (p, row) = (&t.fit.params, &t.row);
        let _ = writeln!(
            summary,
            "{:<6} {:>10.4} ({:>7}) {:>10.4} ({:>7}) {:>10.4} ({:>7})",
            row.label, p.a, row.a, p.r, row.r, p.p, row.p
        );
    }
    Ok(Output { csv, summary })
}

fn oracle_check(cfg: &RunConfig, built: &Built) -> Result<Output, CliError> {
    let pot = &built.potential;
    let l = built.channel.l;
    let ks = cfg.run.k_values.clone().unwrap_or_else(|| {
        let range = pot.range_estimate();
        vec![0.01 / range, 0.1 / range, 0.5 / range]
    });
    let opts = vpa_options(cfg);
    let numerov = NumerovOptions::default();
    let u = units(built);
    let la = u.length_power(2 * l as i32 + 1);
    let mut csv = Vec::new();
    writeln!(
        csv,
        "k[{}],a_vpa[{la}],a_vpa_tolerance[{la}],a_numerov[{la}],relative_difference[1],tan_delta_numerov[1],numerov_residual[1]",
        u.length_power(-1)
    )?;
    let mut worst: f64 = 0.0;
    for &k in &ks {
        let t = integrate_theta(&problem(cfg, built, k)?, &opts)?;
        let o = phase_shift(pot, l, k, &numerov)?;
        let diff = (t.a_infinity - o.a).abs() / o.a.abs();
        worst = worst.max(diff);
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt17(k),
            fmt17(t.a_infinity),
            fmt17(t.a_tolerance),
            fmt17(o.a),
            fmt17(diff),
            fmt17(o.tan_delta),
            fmt17(o.residual)
        )?;
    }
    let crossings = integrate_theta(&problem(cfg, built, 0.0)?, &opts)?.pole_crossings;
    let bound = count_bound_states(pot, l)?;
    let summary = format!(
        "{} {}: largest VPA/Numerov relative difference {worst:.2e} over {} k values; bound states {crossings} (VPA) vs {bound} (Numerov)\n",
        pot.label,
        built.channel.label(),
        ks.len()
    );
    Ok(Output { csv, summary })
}
