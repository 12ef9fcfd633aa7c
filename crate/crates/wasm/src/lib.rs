//! Browser bindings: three JSON-in, JSON-out operations for the demo page.
//!
//! The plain functions (`*_json`) carry the logic and are what the tests
//! call; the `#[wasm_bindgen]` wrappers only turn errors into exceptions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use calogero::ere::{fit_points, fit_problem, geometric_grid, sweep_k};
use calogero::potentials::{
    cesium_potential, square_well, woods_saxon_channel, CesiumParams, JCoupling, NuclearConstants, UnitSystem,
    WoodsSaxon, CS2_REDUCED_MASS,
};
use calogero::vpa::integrate_theta;
use calogero::{Channel, ReducedPotential, VpaOptions, VpaProblem};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Trace points kept for plotting.
const MAX_TRACE: usize = 400;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    SquareWell { depth: f64, radius: f64 },
    Cesium { mass: Option<f64> },
    WoodsSaxon { depth: f64, j: Option<JCoupling> },
}

#[derive(Debug, Deserialize)]
pub struct Request {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub l: u32,
    #[serde(default)]
    pub k: f64,
}

#[derive(Debug, Serialize)]
pub struct ScatteringLength {
    pub a: f64,
    pub a_tolerance: f64,
    pub pole_crossings: u32,
    pub at_resonance: bool,
    pub length_unit: &'static str,
    /// `(r, theta)` along the integration; `a = scale tan(theta)`.
    pub trace: Vec<(f64, f64)>,
    pub scale: f64,
}

#[derive(Debug, Serialize)]
pub struct ScanPoint {
    pub depth: f64,
    pub a: f64,
    pub bound_states: u32,
}

#[derive(Debug, Serialize)]
pub struct Fit {
    pub a: f64,
    pub r: f64,
    pub p: f64,
    pub half_widths: [f64; 3],
    pub k_min: f64,
    pub k_max: f64,
    pub length_unit: &'static str,
    /// `(k, D, D_fit)`
    pub points: Vec<(f64, f64, f64)>,
}

fn build(spec: &PotentialSpec, l: u32) -> Result<ReducedPotential, String> {
    let p = match spec {
        PotentialSpec::SquareWell { depth, radius } => square_well(*depth, *radius),
        PotentialSpec::Cesium { mass } => cesium_potential(CesiumParams::default(), mass.unwrap_or(CS2_REDUCED_MASS)),
        PotentialSpec::WoodsSaxon { depth, j } => {
            let c = NuclearConstants::default();
            let j = j.unwrap_or(if l == 0 { JCoupling::None } else { JCoupling::Plus });
            Channel::new(l, j, UnitSystem::nuclear(&c), c.reduced_mass())
                .and_then(|ch| woods_saxon_channel(&WoodsSaxon::n12c(*depth), &ch))
        }
    };
    p.map_err(|e| e.to_string())
}

fn parse(json: &str) -> Result<Request, String> {
    serde_json::from_str(json).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// `a_l(k, inf)` with a thinned `theta(r)` trace.
pub fn scattering_length_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let pot = build(&req.potential, req.l)?;
    let unit = pot.units.length_unit();
    let prob = VpaProblem::new(pot, req.l, req.k).map_err(|e| e.to_string())?;
    let t = integrate_theta(&prob, &VpaOptions::default()).map_err(|e| e.to_string())?;
    let stride = t.phi.len().div_ceil(MAX_TRACE).max(1);
    let mut trace: Vec<(f64, f64)> = t.phi.iter().zip(&t.theta).step_by(stride).map(|(p, th)| (p.tan(), *th)).collect();
    // keep the last finite radius
    if let Some(i) = t.phi.iter().rposition(|p| p.tan() < 1e12) {
        trace.push((t.phi[i].tan(), t.theta[i]));
    }
    to_json(&ScatteringLength {
        a: t.a_infinity,
        a_tolerance: t.a_tolerance,
        pole_crossings: t.pole_crossings,
        at_resonance: t.at_resonance,
        length_unit: unit,
        trace,
        scale: t.scale,
    })
}

/// Zero-energy `a_l` of a square well of `radius` across `n` depths.
pub fn depth_scan_json(radius: f64, l: u32, depth_max: f64, n: usize) -> Result<String, String> {
    if !(depth_max > 0.0) || !(radius > 0.0) || !(2..=5000).contains(&n) {
        return Err("need depth_max > 0, radius > 0 and 2 <= n <= 5000".into());
    }
    let opts = VpaOptions { sample_radii: Some(Vec::new()), ..Default::default() };
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let depth = depth_max * i as f64 / n as f64;
        let pot = square_well(depth, radius).map_err(|e| e.to_string())?;
        let prob = VpaProblem::new(pot, l, 0.0).and_then(|p| p.with_scale_length(radius)).map_err(|e| e.to_string())?;
        let t = integrate_theta(&prob, &opts).map_err(|e| e.to_string())?;
        out.push(ScanPoint { depth, a: t.a_infinity, bound_states: t.pole_crossings });
    }
    to_json(&out)
}

/// Low-k sweep with automatic window choice and the fitted expansion.
pub fn ere_fit_json(request: &str) -> Result<String, String> {
    let req = parse(request)?;
    let pot = build(&req.potential, req.l)?;
    let unit = pot.units.length_unit();
    let prob = VpaProblem::new(pot, req.l, 0.0).map_err(|e| e.to_string())?;
    let opts = VpaOptions::default();
    let fit = fit_problem(&prob, &opts, None).map_err(|e| e.to_string())?;
    let w = fit.k_window;
    let ks = geometric_grid(w.k_max, w.k_max / w.k_min, w.n_points);
    let sweep = sweep_k(&prob, &ks, &opts).map_err(|e| e.to_string())?;
    let points = fit_points(&sweep).into_iter().map(|(k, d)| (k, d, fit.params.d(k))).collect();
    to_json(&Fit {
        a: fit.params.a,
        r: fit.params.r,
        p: fit.params.p,
        half_widths: fit.half_widths_95,
        k_min: w.k_min,
        k_max: w.k_max,
        length_unit: unit,
        points,
    })
}

#[wasm_bindgen]
pub fn scattering_length(request: &str) -> Result<String, JsError> {
    scattering_length_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn depth_scan(radius: f64, l: u32, depth_max: f64, n: usize) -> Result<String, JsError> {
    depth_scan_json(radius, l, depth_max, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ere_fit(request: &str) -> Result<String, JsError> {
    ere_fit_json(request).map_err(|e| JsError::new(&e))
}
