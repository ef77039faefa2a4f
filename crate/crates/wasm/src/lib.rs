//! Browser bindings for three interactive views: the closed-form Berry
//! phase as a function of the loop corner, the Wilson-loop holonomy of the
//! Z block against that closed form, and a Landau-Zener leakage scan.
//!
//! Every export returns a JSON string; the plain Rust functions underneath
//! are what the native tests exercise.

use std::f64::consts::{FRAC_PI_2, PI};

use holo_core::evolution::{landau_zener_scan, minimal_gap, RampProfile};
use holo_core::gates::{extract_logical, ideal_gate, Encoding, EncodingScheme, GateLabel};
use holo_core::holonomy::{berry_phase_z, loop_holonomy, standard_loop, EnergySelector, StandardLoop};
use holo_core::linalg::phase_stripped_distance;
use holo_core::network::{BlockKind, BlockLayout};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Bias used by every view.
pub const H_BIAS: f64 = 0.3;

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub phi2_star: Vec<f64>,
    pub berry_phase: Vec<f64>,
}

/// `φ_B(φ₂*)` on `points` corners evenly spaced in `[0, π/2)`.
pub fn berry_curve(gamma2: f64, phi1_star: f64, points: usize) -> Result<Curve, String> {
    if !(2..=2000).contains(&points) {
        return Err(format!("points must lie in [2, 2000], got {points}"));
    }
    let mut curve = Curve {
        phi2_star: Vec::with_capacity(points),
        berry_phase: Vec::with_capacity(points),
    };
    for k in 0..points {
        let p = FRAC_PI_2 * k as f64 / points as f64;
        curve.phi2_star.push(p);
        curve
            .berry_phase
            .push(berry_phase_z(gamma2, phi1_star, p).map_err(|e| e.to_string())?);
    }
    Ok(curve)
}

#[derive(Debug, Clone, Serialize)]
pub struct HolonomyView {
    pub closed_form: f64,
    pub wilson_phase: f64,
    pub distance: f64,
    pub discretization_error_estimate: f64,
    pub samples: usize,
    /// Row-major `[re, im]` entries of the extracted gate.
    pub gate: Vec<[f64; 2]>,
    /// Loop corners `(φ₁, φ₂)` for drawing.
    pub path: Vec<[f64; 2]>,
}

/// Wilson-loop Z gate for the rectangle with corner `(φ₁*, φ₂*)`.
pub fn z_holonomy(gamma2: f64, phi1_star: f64, phi2_star: f64, samples_per_segment: usize) -> Result<HolonomyView, String> {
    if !(16..=5000).contains(&samples_per_segment) {
        return Err(format!("samples per segment must lie in [16, 5000], got {samples_per_segment}"));
    }
    let err = |e: holo_core::HoloError| e.to_string();
    let layout = BlockLayout::z_block(gamma2).map_err(err)?;
    let kind = StandardLoop::ZRect { phi1_star, phi2_star };
    let lp = standard_loop(kind, samples_per_segment, H_BIAS).map_err(err)?;
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).map_err(err)?;
    let enc = Encoding::new(BlockKind::ZBlock, EncodingScheme::SingleBox).map_err(err)?;
    let gate = extract_logical(&hol, layout.basis(), &enc).map_err(err)?;
    let closed_form = berry_phase_z(gamma2, phi1_star, phi2_star).map_err(err)?;
    let ideal = ideal_gate(GateLabel::UZ, closed_form).map_err(err)?;
    let m = &gate.matrix;
    let path = lp
        .segments
        .iter()
        .map(|s| {
            let p = s.start();
            [p.phis["J1"], p.phis["J2"]]
        })
        .chain(std::iter::once([FRAC_PI_2, 0.0]))
        .collect();
    Ok(HolonomyView {
        closed_form,
        wilson_phase: (m[(1, 1)] / m[(0, 0)]).arg(),
        distance: phase_stripped_distance(m, &ideal.matrix),
        discretization_error_estimate: hol.discretization_error_estimate,
        samples: hol.samples,
        gate: m.transpose().iter().map(|z| [z.re, z.im]).collect(),
        path,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanView {
    pub gap: f64,
    pub eta_over_gap: Vec<f64>,
    pub leakage: Vec<f64>,
    pub fitted: Vec<bool>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub pi_gap: f64,
}

/// Leakage of the Z reference rectangle at `η = Δ/k` for `k` evenly
/// spaced in `[k_min, k_max]`.
pub fn lz_scan(gamma2: f64, k_min: f64, k_max: f64, points: usize) -> Result<ScanView, String> {
    if !(2..=40).contains(&points) {
        return Err(format!("points must lie in [2, 40], got {points}"));
    }
    if !(k_min >= 1.0 && k_max > k_min && k_max <= 200.0) {
        return Err(format!("need 1 <= k_min < k_max <= 200, got {k_min} and {k_max}"));
    }
    let err = |e: holo_core::HoloError| e.to_string();
    let layout = BlockLayout::z_block(gamma2).map_err(err)?;
    let kind = StandardLoop::ZRect {
        phi1_star: PI / 3.0,
        phi2_star: PI / 3.0,
    };
    let lp = standard_loop(kind, 64, H_BIAS).map_err(err)?;
    let gap = minimal_gap(&layout, &lp, EnergySelector::Computational).map_err(err)?.gap;
    let ks: Vec<f64> = (0..points)
        .map(|i| k_min + (k_max - k_min) * i as f64 / (points - 1) as f64)
        .collect();
    let etas: Vec<f64> = ks.iter().map(|k| gap / k).collect();
    let scan = landau_zener_scan(&layout, &lp, &etas, RampProfile::Smooth).map_err(err)?;
    let fit = scan.r_squared.is_finite();
    Ok(ScanView {
        gap,
        eta_over_gap: ks.iter().map(|k| 1.0 / k).collect(),
        leakage: scan.rows.iter().map(|r| r.leakage).collect(),
        fitted: scan.rows.iter().map(|r| r.fitted).collect(),
        slope: fit.then_some(scan.slope),
        intercept: fit.then_some(scan.intercept),
        r_squared: fit.then_some(scan.r_squared),
        pi_gap: PI * gap,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = berryCurve)]
pub fn berry_curve_js(gamma2: f64, phi1_star: f64, points: usize) -> Result<String, JsError> {
    to_json(berry_curve(gamma2, phi1_star, points))
}

#[wasm_bindgen(js_name = zHolonomy)]
pub fn z_holonomy_js(gamma2: f64, phi1_star: f64, phi2_star: f64, samples_per_segment: usize) -> Result<String, JsError> {
    to_json(z_holonomy(gamma2, phi1_star, phi2_star, samples_per_segment))
}

#[wasm_bindgen(js_name = lzScan)]
pub fn lz_scan_js(gamma2: f64, k_min: f64, k_max: f64, points: usize) -> Result<String, JsError> {
    to_json(lz_scan(gamma2, k_min, k_max, points))
}
