//! Time-dependent Schrödinger propagation along adiabatic loop schedules.
//!
//! Each loop segment is traversed with a ramp profile `s(τ)` whose velocity
//! vanishes at both ends, so the Hamiltonian comes to rest at every corner.
//! Segment durations are chosen so that the largest `‖∂H/∂t‖` on the loop
//! equals `η·Δ`, with `Δ` the minimal gap along the loop.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{HoloError, Result};
use crate::holonomy::{computational_anchor, EnergySelector, ParameterLoop, CLOSURE_TOL};
use crate::linalg::{polar_unitary, unitarity_error, CMatrix, CVector, C64};
use crate::network::{BlockKind, BlockLayout, ControlSettings};
use crate::spectrum::{eigendecompose, eigendecompose_matrix, SubspaceBasis};

/// Leakage values below this are treated as numerical noise.
pub const LEAKAGE_FLOOR: f64 = 1e-13;

/// Minimum number of time steps of a schedule.
pub const MIN_STEPS: usize = 100;

/// Default largest time step when none is requested explicitly.
pub const DEFAULT_DT: f64 = 0.25;

const SPEED_GRID: usize = 400;

/// Shape of the per-segment ramp `s(τ)`, `τ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampProfile {
    /// Constant speed; the Hamiltonian jumps in velocity at every corner.
    Linear,
    /// `(1 − cos πτ)/2`: zero velocity at the ends, once differentiable.
    CosineEase,
    /// `f(τ)/(f(τ) + f(1−τ))` with `f(x) = e^{−1/x}`: every derivative
    /// vanishes at the ends.
    #[default]
    Smooth,
}

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn bump_derivative(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp() / (x * x)
    }
}

impl RampProfile {
    pub fn value(self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, 1.0);
        match self {
            RampProfile::Linear => t,
            RampProfile::CosineEase => 0.5 * (1.0 - (PI * t).cos()),
            RampProfile::Smooth => {
                let (a, b) = (bump(t), bump(1.0 - t));
                a / (a + b)
            }
        }
    }

    pub fn derivative(self, tau: f64) -> f64 {
        if !(0.0..=1.0).contains(&tau) {
            return 0.0;
        }
        match self {
            RampProfile::Linear => 1.0,
            RampProfile::CosineEase => 0.5 * PI * (PI * tau).sin(),
            RampProfile::Smooth => {
                let (a, b) = (bump(tau), bump(1.0 - tau));
                let (da, db) = (bump_derivative(tau), bump_derivative(1.0 - tau));
                let den = a + b;
                (da * b + a * db) / (den * den)
            }
        }
    }
}

/// Timing of a loop traversal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_time: f64,
    pub time_steps: usize,
    pub profile: RampProfile,
    /// Declared adiabaticity, `max ‖∂H/∂t‖ = η·Δ`.
    pub eta: f64,
    /// Minimal gap `Δ` the durations were computed with.
    pub gap: f64,
    pub segment_durations: Vec<f64>,
    pub segment_steps: Vec<usize>,
}

/// Smallest distance from the computational energy to any other eigenvalue
/// over all loop samples, with the index of the sample where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub gap: f64,
    pub sample: usize,
}

/// Smallest distance from the selected level to any other level of the
/// computational sector along the loop.
pub fn minimal_gap(block: &BlockLayout, lp: &ParameterLoop, selector: EnergySelector) -> Result<GapReport> {
    let mut best = GapReport {
        gap: f64::INFINITY,
        sample: 0,
    };
    let sector = block.computational_sector();
    for (k, p) in lp.points().iter().enumerate() {
        let es = eigendecompose(&block.hamiltonian(p)?);
        let g = es.gap_in(selector.energy(block.kind(), p), es.default_tolerance(), &sector);
        if g < best.gap {
            best = GapReport { gap: g, sample: k };
        }
    }
    if !best.gap.is_finite() || best.gap <= 0.0 {
        return Err(HoloError::NoSubspace {
            energy: selector.energy(block.kind(), &lp.start()),
            tol: 0.0,
        });
    }
    Ok(best)
}

fn spectral_norm(m: &CMatrix) -> f64 {
    eigendecompose_matrix(m)
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `‖dH/ds‖` along segment `k` at fractional position `s`, by central
/// differences in `s` (one-sided at the ends).
fn segment_rate(block: &BlockLayout, lp: &ParameterLoop, k: usize, s: f64) -> Result<f64> {
    let seg = &lp.segments[k];
    let eps = 1e-5;
    let (lo, hi) = ((s - eps).max(0.0), (s + eps).min(1.0));
    let hp = block.hamiltonian(&seg.point(hi))?;
    let hm = block.hamiltonian(&seg.point(lo))?;
    Ok(spectral_norm(&((hp.matrix() - hm.matrix()) / C64::new(hi - lo, 0.0))))
}

/// `max_τ ‖dH/ds(s(τ))‖·s′(τ)` over a segment, i.e. `max ‖∂H/∂t‖` for unit
/// duration.
fn segment_peak_speed(
    block: &BlockLayout,
    lp: &ParameterLoop,
    k: usize,
    profile: RampProfile,
    grid: usize,
) -> Result<f64> {
    let mut peak = 0.0f64;
    for i in 0..=grid {
        let tau = (i as f64 + 0.5) / (grid as f64 + 1.0);
        let v = segment_rate(block, lp, k, profile.value(tau))? * profile.derivative(tau);
        peak = peak.max(v);
    }
    Ok(peak)
}

impl Schedule {
    /// Durations such that `max ‖∂H/∂t‖ = η·Δ` on every segment that moves
    /// the Hamiltonian. `time_steps = None` picks a step of at most
    /// [`DEFAULT_DT`].
    pub fn adiabatic(
        block: &BlockLayout,
        lp: &ParameterLoop,
        eta: f64,
        profile: RampProfile,
        time_steps: Option<usize>,
    ) -> Result<Schedule> {
        let gap = minimal_gap(block, lp, EnergySelector::Computational)?.gap;
        Schedule::with_gap(block, lp, eta, gap, profile, time_steps)
    }

    /// [`Schedule::adiabatic`] with a known gap.
    pub fn with_gap(
        block: &BlockLayout,
        lp: &ParameterLoop,
        eta: f64,
        gap: f64,
        profile: RampProfile,
        time_steps: Option<usize>,
    ) -> Result<Schedule> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(HoloError::Domain(format!("eta must be positive, got {eta}")));
        }
        if !(gap > 0.0) {
            return Err(HoloError::Domain(format!("gap must be positive, got {gap}")));
        }
        let mut durations = Vec::with_capacity(lp.segments.len());
        for k in 0..lp.segments.len() {
            let peak = segment_peak_speed(block, lp, k, profile, SPEED_GRID)?;
            durations.push(peak / (eta * gap));
        }
        let total_time: f64 = durations.iter().sum();
        if !(total_time > 0.0) {
            // the Hamiltonian never moves: any positive duration is adiabatic
            let n = lp.segments.len() as f64;
            durations.iter_mut().for_each(|d| *d = 1.0 / n);
            return Schedule::from_durations(durations, eta, gap, profile, time_steps);
        }
        Schedule::from_durations(durations, eta, gap, profile, time_steps)
    }

    /// Explicit segment durations.
    pub fn from_durations(
        segment_durations: Vec<f64>,
        eta: f64,
        gap: f64,
        profile: RampProfile,
        time_steps: Option<usize>,
    ) -> Result<Schedule> {
        if segment_durations.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(HoloError::Domain("segment durations must be finite and non-negative".into()));
        }
        let total_time: f64 = segment_durations.iter().sum();
        if !(total_time > 0.0) {
            return Err(HoloError::Domain("total time must be positive".into()));
        }
        let requested = time_steps.unwrap_or_else(|| (total_time / DEFAULT_DT).ceil() as usize);
        if requested < MIN_STEPS {
            if time_steps.is_some() {
                return Err(HoloError::Domain(format!(
                    "need at least {MIN_STEPS} time steps, got {requested}"
                )));
            }
        }
        let requested = requested.max(MIN_STEPS);
        let n_seg = segment_durations.len();
        let segment_steps: Vec<usize> = segment_durations
            .iter()
            .map(|d| {
                if *d == 0.0 {
                    0
                } else {
                    ((requested as f64 * d / total_time).round() as usize).max(MIN_STEPS / n_seg.max(1)).max(1)
                }
            })
            .collect();
        let time_steps = segment_steps.iter().sum();
        Ok(Schedule {
            total_time,
            time_steps,
            profile,
            eta,
            gap,
            segment_durations,
            segment_steps,
        })
    }

    /// Same schedule with every segment's step count doubled.
    pub fn refined(&self) -> Schedule {
        let mut s = self.clone();
        s.segment_steps.iter_mut().for_each(|n| *n *= 2);
        s.time_steps *= 2;
        s
    }

    pub fn check_loop(&self, lp: &ParameterLoop) -> Result<()> {
        if self.segment_durations.len() != lp.segments.len() {
            return Err(HoloError::Domain(format!(
                "schedule has {} segments but the loop has {}",
                self.segment_durations.len(),
                lp.segments.len()
            )));
        }
        if self.time_steps < MIN_STEPS {
            return Err(HoloError::Domain(format!(
                "need at least {MIN_STEPS} time steps, got {}",
                self.time_steps
            )));
        }
        Ok(())
    }

    /// Control point at time `t` (clamped to `[0, total_time]`).
    pub fn position(&self, lp: &ParameterLoop, t: f64) -> ControlSettings {
        let mut rest = t.max(0.0);
        for (k, seg) in lp.segments.iter().enumerate() {
            let d = self.segment_durations[k];
            if rest <= d && d > 0.0 {
                return seg.point(self.profile.value(rest / d));
            }
            rest -= d;
        }
        lp.segments.last().expect("segments").end()
    }

    /// `max ‖∂H/∂t‖ / Δ` measured on a grid offset from the one used to set
    /// the durations.
    pub fn realized_eta(&self, block: &BlockLayout, lp: &ParameterLoop) -> Result<f64> {
        self.check_loop(lp)?;
        let mut peak = 0.0f64;
        for (k, d) in self.segment_durations.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            let p = segment_peak_speed(block, lp, k, self.profile, 3 * SPEED_GRID + 1)?;
            peak = peak.max(p / d);
        }
        Ok(peak / self.gap)
    }
}

/// `exp(−i·H·dt)` via the eigen-decomposition of `H`, followed by one
/// Newton–Schulz step `U(3 − U†U)/2` that squares the unitarity error.
pub fn step_unitary(h: &CMatrix, dt: f64) -> CMatrix {
    let es = eigendecompose_matrix(h);
    let v = &es.eigenvectors;
    let mut scaled = v.clone();
    for (j, lam) in es.eigenvalues.iter().enumerate() {
        let col = v.column(j) * C64::from_polar(1.0, -lam * dt);
        scaled.set_column(j, &col);
    }
    let u = scaled * v.adjoint();
    let n = u.nrows();
    let corr = CMatrix::identity(n, n) * C64::new(1.5, 0.0) - (u.adjoint() * &u) * C64::new(0.5, 0.0);
    u * corr
}

/// Unitary `exp(−i·H·dt)` of a small dense block, Newton–Schulz polished.
fn block_exponential(h: &CMatrix, dt: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let col = v.column(j) * C64::from_polar(1.0, -lam * dt);
        scaled.set_column(j, &col);
    }
    let u = scaled * v.adjoint();
    let n = u.nrows();
    let corr = CMatrix::identity(n, n) * C64::new(1.5, 0.0) - (u.adjoint() * &u) * C64::new(0.5, 0.0);
    u * corr
}

/// `psi ← exp(−i·H·dt)·psi`, one decoupled block of `H` at a time.
pub fn apply_step(h: &CMatrix, dt: f64, psi: &mut CMatrix) {
    for comp in crate::spectrum::components(h) {
        if comp.len() == 1 {
            let i = comp[0];
            let ph = C64::from_polar(1.0, -h[(i, i)].re * dt);
            for z in psi.row_mut(i).iter_mut() {
                *z *= ph;
            }
            continue;
        }
        let k = comp.len();
        let sub = CMatrix::from_fn(k, k, |r, c| h[(comp[r], comp[c])]);
        let u = block_exponential(&sub, dt);
        let rows = CMatrix::from_fn(k, psi.ncols(), |r, c| psi[(comp[r], c)]);
        let out = u * rows;
        for (r, &i) in comp.iter().enumerate() {
            for c in 0..psi.ncols() {
                psi[(i, c)] = out[(r, c)];
            }
        }
    }
}

/// Propagate the columns of `states` through the schedule.
pub fn propagate_columns(
    block: &BlockLayout,
    lp: &ParameterLoop,
    schedule: &Schedule,
    states: &CMatrix,
) -> Result<CMatrix> {
    schedule.check_loop(lp)?;
    if states.nrows() != block.basis().dim() {
        return Err(HoloError::Dimension(format!(
            "state has dimension {} but the block basis has {}",
            states.nrows(),
            block.basis().dim()
        )));
    }
    let mut psi = states.clone();
    for (k, seg) in lp.segments.iter().enumerate() {
        let (d, n) = (schedule.segment_durations[k], schedule.segment_steps[k]);
        if d == 0.0 || n == 0 {
            continue;
        }
        let dt = d / n as f64;
        for i in 0..n {
            let tau = (i as f64 + 0.5) / n as f64;
            let h = block.hamiltonian(&seg.point(schedule.profile.value(tau)))?;
            apply_step(h.matrix(), dt, &mut psi);
        }
    }
    Ok(psi)
}

/// Propagate one state through the schedule.
pub fn propagate(
    block: &BlockLayout,
    lp: &ParameterLoop,
    schedule: &Schedule,
    initial: &CVector,
) -> Result<CVector> {
    let n = initial.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(HoloError::Domain(format!("initial state must be normalised, norm is {n}")));
    }
    let m = CMatrix::from_columns(&[initial.clone()]);
    Ok(propagate_columns(block, lp, schedule, &m)?.column(0).into_owned())
}

/// Result of propagating the computational subspace around a loop.
#[derive(Debug, Clone)]
pub struct GateEstimate {
    /// Transfer matrix in the anchor basis, dynamic phase removed,
    /// polar-unitarised.
    pub unitary: CMatrix,
    pub leakage: f64,
    /// Common dynamic phase `−E·T` that was removed.
    pub dynamic_phase: f64,
    pub raw_unitarity_error: f64,
    /// Largest deviation of a propagated column norm from 1.
    pub norm_error: f64,
    pub anchor: SubspaceBasis,
    pub total_time: f64,
    pub time_steps: usize,
}

/// Propagate every anchor vector of the computational subspace around the
/// loop and project back.
pub fn adiabatic_gate(block: &BlockLayout, lp: &ParameterLoop, schedule: &Schedule) -> Result<GateEstimate> {
    let mismatch = lp.endpoint_mismatch();
    if mismatch > CLOSURE_TOL {
        return Err(HoloError::OpenLoop(mismatch));
    }
    let start = lp.start();
    let anchor = computational_anchor(block, &start)?;
    let psi = propagate_columns(block, lp, schedule, &anchor.vectors)?;
    let norm_error = psi.column_iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max);
    let raw = anchor.vectors.adjoint() * &psi;
    let dim = raw.ncols() as f64;
    let kept = raw.iter().map(|z| z.norm_sqr()).sum::<f64>() / dim;
    let leakage = (1.0 - kept).max(0.0);
    let energy = match block.kind() {
        BlockKind::Prototype => 0.0,
        k => k.degenerate_energy(start.h),
    };
    let dynamic_phase = -energy * schedule.total_time;
    let raw = raw * C64::from_polar(1.0, -dynamic_phase);
    Ok(GateEstimate {
        raw_unitarity_error: unitarity_error(&raw),
        unitary: polar_unitary(&raw),
        leakage,
        dynamic_phase,
        norm_error,
        anchor,
        total_time: schedule.total_time,
        time_steps: schedule.time_steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzRow {
    pub eta: f64,
    pub leakage: f64,
    pub total_time: f64,
    /// Whether the row entered the log-linear fit.
    pub fitted: bool,
}

/// Leakage against `η` with a least-squares fit of `ln(leakage)` vs `1/η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LzScan {
    pub gap: f64,
    pub rows: Vec<LzRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, intercept, r2))
}

#[cfg(feature = "parallel")]
fn map_indexed<T: Send, F: Fn(f64) -> Result<T> + Sync + Send>(xs: &[f64], f: F) -> Result<Vec<T>> {
    use rayon::prelude::*;
    xs.par_iter().map(|&x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T, F: Fn(f64) -> Result<T>>(xs: &[f64], f: F) -> Result<Vec<T>> {
    xs.iter().map(|&x| f(x)).collect()
}

/// Leakage of the computational subspace for each `η` (absolute units,
/// sorted descending). Points below [`LEAKAGE_FLOOR`] are kept in the table
/// but excluded from the fit.
pub fn landau_zener_scan(
    block: &BlockLayout,
    lp: &ParameterLoop,
    etas: &[f64],
    profile: RampProfile,
) -> Result<LzScan> {
    if etas.is_empty() {
        return Err(HoloError::Domain("need at least one eta".into()));
    }
    if etas.iter().any(|e| !(*e > 0.0)) {
        return Err(HoloError::Domain("etas must be positive".into()));
    }
    if etas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HoloError::Domain("etas must be sorted in descending order".into()));
    }
    let gap = minimal_gap(block, lp, EnergySelector::Computational)?.gap;
    let rows = map_indexed(etas, |eta| {
        let sched = Schedule::with_gap(block, lp, eta, gap, profile, None)?;
        let g = adiabatic_gate(block, lp, &sched)?;
        Ok(LzRow {
            eta,
            leakage: g.leakage,
            total_time: sched.total_time,
            fitted: g.leakage >= LEAKAGE_FLOOR,
        })
    })?;
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.fitted)
        .map(|r| (1.0 / r.eta, r.leakage.ln()))
        .unzip();
    let (slope, intercept, r_squared) = linear_fit(&x, &y).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    Ok(LzScan {
        gap,
        rows,
        slope,
        intercept,
        r_squared,
    })
}
