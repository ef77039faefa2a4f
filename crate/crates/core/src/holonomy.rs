//! Loop holonomies of the degenerate computational subspace.
//!
//! Two independent routes are provided: a discrete Wilson loop built from
//! overlaps of numerically detected eigenspaces along a sampled parameter
//! loop ([`loop_holonomy`]), and the closed-form phase integrals for the
//! rectangular Z/CZ loops ([`berry_phase_z`]) and the X-block path
//! ([`rotation_angle_x`]).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{HoloError, Result};
use crate::junction::{amplitude, phase_shift, JunctionParams};
use crate::linalg::{polar_unitary, procrustes_align, unitarity_error, CMatrix, C64};
use crate::network::{joint_tunneling_amplitudes, BlockKind, BlockLayout, ControlSettings};
use crate::quadrature::integrate;
use crate::spectrum::{
    analytic_cz_subspace, analytic_x_subspace, analytic_z_subspace, eigendecompose, SubspaceBasis,
};

/// Absolute tolerance of the closed-form phase quadratures.
pub const QUAD_TOL: f64 = 1e-10;

/// Maximal endpoint mismatch of a closed loop.
pub const CLOSURE_TOL: f64 = 1e-12;

/// Smallest singular value of a neighbouring-sample overlap accepted while
/// tracking the subspace.
const MIN_OVERLAP: f64 = 0.5;

/// How fluxes are interpolated along a straight segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Linear in each reduced flux.
    Flux,
    /// Linear in `cos φ` of each junction, i.e. a straight line in the
    /// coupling magnitudes of symmetric junctions.
    Cosine,
}

/// Geometry of one loop segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SegmentPath {
    Line {
        from: ControlSettings,
        to: ControlSettings,
        interpolation: Interpolation,
    },
    /// Explicit polyline; positions between points are interpolated
    /// linearly in flux.
    Sampled { points: Vec<ControlSettings> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub path: SegmentPath,
    pub samples: usize,
}

fn lerp_controls(a: &ControlSettings, b: &ControlSettings, s: f64, interp: Interpolation) -> ControlSettings {
    let mut out = a.clone();
    for (k, va) in &a.phis {
        let vb = b.phis.get(k).copied().unwrap_or(*va);
        let v = match interp {
            _ if vb == *va => *va,
            Interpolation::Flux => va + (vb - va) * s,
            Interpolation::Cosine => {
                let cosv = (1.0 - s) * va.cos().max(0.0) + s * vb.cos().max(0.0);
                let sign = if va + vb < 0.0 { -1.0 } else { 1.0 };
                sign * cosv.clamp(0.0, 1.0).acos()
            }
        };
        out.phis.insert(k.clone(), v);
    }
    out.h = a.h + (b.h - a.h) * s;
    out.n_g = None;
    out
}

impl Segment {
    pub fn line(from: ControlSettings, to: ControlSettings, interpolation: Interpolation, samples: usize) -> Self {
        Segment {
            path: SegmentPath::Line { from, to, interpolation },
            samples,
        }
    }

    pub fn start(&self) -> ControlSettings {
        self.point(0.0)
    }

    pub fn end(&self) -> ControlSettings {
        self.point(1.0)
    }

    /// Control point at fractional position `s ∈ [0, 1]`.
    pub fn point(&self, s: f64) -> ControlSettings {
        match &self.path {
            SegmentPath::Line { from, to, interpolation } => {
                if s <= 0.0 {
                    from.clone()
                } else if s >= 1.0 {
                    to.clone()
                } else {
                    lerp_controls(from, to, s, *interpolation)
                }
            }
            SegmentPath::Sampled { points } => {
                let n = points.len() - 1;
                if n == 0 || s <= 0.0 {
                    return points[0].clone();
                }
                if s >= 1.0 {
                    return points[n].clone();
                }
                let x = s * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                lerp_controls(&points[i], &points[i + 1], x - i as f64, Interpolation::Flux)
            }
        }
    }
}

/// Closed path in control space made of consecutive segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLoop {
    pub segments: Vec<Segment>,
}

impl ParameterLoop {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(HoloError::Domain("a loop needs at least one segment".into()));
        }
        for (k, s) in segments.iter().enumerate() {
            if s.samples == 0 {
                return Err(HoloError::Domain(format!("segment {k} has no samples")));
            }
            if let SegmentPath::Sampled { points } = &s.path {
                if points.is_empty() {
                    return Err(HoloError::Domain(format!("segment {k} has no points")));
                }
            }
        }
        for (k, w) in segments.windows(2).enumerate() {
            let gap = w[0].end().distance(&w[1].start());
            if gap > CLOSURE_TOL {
                return Err(HoloError::Domain(format!(
                    "segments {k} and {} do not join (mismatch {gap:e})",
                    k + 1
                )));
            }
        }
        Ok(ParameterLoop { segments })
    }

    pub fn start(&self) -> ControlSettings {
        self.segments[0].start()
    }

    pub fn endpoint_mismatch(&self) -> f64 {
        self.segments[0].start().distance(&self.segments.last().expect("segments").end())
    }

    pub fn is_closed(&self) -> bool {
        self.endpoint_mismatch() <= CLOSURE_TOL
    }

    pub fn total_samples(&self) -> usize {
        self.segments.iter().map(|s| s.samples).sum()
    }

    /// All sample points, first to last, with segment joints listed once.
    /// A closed loop with `n` samples yields `n + 1` points, the last equal
    /// to the first.
    pub fn points(&self) -> Vec<ControlSettings> {
        let mut out = vec![self.start()];
        for seg in &self.segments {
            for j in 1..=seg.samples {
                out.push(seg.point(j as f64 / seg.samples as f64));
            }
        }
        out
    }

    /// Largest difference between adjacent samples (flux or `h`).
    pub fn max_step(&self) -> f64 {
        self.points().windows(2).map(|w| w[0].distance(&w[1])).fold(0.0, f64::max)
    }

    /// Same path, traversed backwards.
    pub fn reversed(&self) -> ParameterLoop {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| {
                let path = match &s.path {
                    SegmentPath::Line { from, to, interpolation } => SegmentPath::Line {
                        from: to.clone(),
                        to: from.clone(),
                        interpolation: *interpolation,
                    },
                    SegmentPath::Sampled { points } => SegmentPath::Sampled {
                        points: points.iter().rev().cloned().collect(),
                    },
                };
                Segment { path, samples: s.samples }
            })
            .collect();
        ParameterLoop { segments }
    }

    /// Same path with every segment's sample count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> ParameterLoop {
        ParameterLoop {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    path: s.path.clone(),
                    samples: s.samples * factor,
                })
                .collect(),
        }
    }
}

/// The canonical loops of the three gate blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StandardLoop {
    /// Rectangle in `(φ₁, φ₂)` of the Z block.
    ZRect { phi1_star: f64, phi2_star: f64 },
    /// Closed path in `(φ₁, φ₂)` of the X block at fixed `φ₃`.
    XPath { phi_star: f64, phi3: f64 },
    /// Rectangle in `(φ₁, φ₂)` of the CZ block with `φ₁′ = φ₂′ = 0`.
    CzRect { phi1_star: f64, phi2_star: f64 },
}

fn check_corner(name: &str, v: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&v) {
        return Err(HoloError::Domain(format!("{name} must lie in [0, pi/2], got {v}")));
    }
    Ok(())
}

/// Rectangle in two fluxes starting where the switchable junction is off:
/// `(π/2, 0) → (π/2, b*) → (a*, b*) → (a*, 0) → (π/2, 0)` in
/// `(φ_switch, φ_phase)`. In this orientation the phase picked up by the
/// dark state equals [`berry_phase_z`].
pub fn rect_loop(
    base: &ControlSettings,
    switch: &str,
    phase: &str,
    switch_star: f64,
    phase_star: f64,
    samples_per_segment: usize,
) -> Result<ParameterLoop> {
    check_corner("switch corner", switch_star)?;
    check_corner("phase corner", phase_star)?;
    if samples_per_segment < 16 {
        return Err(HoloError::Domain(format!(
            "need at least 16 samples per segment, got {samples_per_segment}"
        )));
    }
    let at = |a: f64, b: f64| base.clone().with_phi(switch, a).with_phi(phase, b);
    let corners = [
        at(FRAC_PI_2, 0.0),
        at(FRAC_PI_2, phase_star),
        at(switch_star, phase_star),
        at(switch_star, 0.0),
        at(FRAC_PI_2, 0.0),
    ];
    let segments = corners
        .windows(2)
        .map(|w| Segment::line(w[0].clone(), w[1].clone(), Interpolation::Flux, samples_per_segment))
        .collect();
    ParameterLoop::new(segments)
}

/// X-block path at fixed `φ₃`, starting and ending with `J₁ = J₂ = 0`.
///
/// In the plane `(x₁, x₂) = (cos φ₁, cos φ₂)` it runs radially from the
/// origin to `(1, c)`, along `x₂ = c` to `(c, c)`, along `x₁ = c` to
/// `(c, 1)` and radially back, with `c = cos φ*`. The radial legs do not
/// rotate the dark subspace, so the whole holonomy comes from the two
/// straight legs, each contributing half of [`rotation_angle_x`].
pub fn x_path(base: &ControlSettings, phi_star: f64, samples_per_segment: usize) -> Result<ParameterLoop> {
    check_corner("phi_star", phi_star)?;
    if samples_per_segment < 16 {
        return Err(HoloError::Domain(format!(
            "need at least 16 samples per segment, got {samples_per_segment}"
        )));
    }
    let at = |a: f64, b: f64| base.clone().with_phi("J1", a).with_phi("J2", b);
    let o = at(FRAC_PI_2, FRAC_PI_2);
    let p1 = at(0.0, phi_star);
    let p2 = at(phi_star, phi_star);
    let p3 = at(phi_star, 0.0);
    ParameterLoop::new(vec![
        Segment::line(o.clone(), p1.clone(), Interpolation::Cosine, samples_per_segment),
        Segment::line(p1, p2.clone(), Interpolation::Flux, samples_per_segment),
        Segment::line(p2, p3.clone(), Interpolation::Flux, samples_per_segment),
        Segment::line(p3, o, Interpolation::Cosine, samples_per_segment),
    ])
}

/// Build one of the canonical loops with the given bias `h`.
pub fn standard_loop(kind: StandardLoop, samples_per_segment: usize, h: f64) -> Result<ParameterLoop> {
    match kind {
        StandardLoop::ZRect { phi1_star, phi2_star } => {
            let base = ControlSettings::new([("J1", FRAC_PI_2), ("J2", 0.0)], h);
            rect_loop(&base, "J1", "J2", phi1_star, phi2_star, samples_per_segment)
        }
        StandardLoop::CzRect { phi1_star, phi2_star } => {
            let base = ControlSettings::new([("J1", FRAC_PI_2), ("J2", 0.0), ("J1'", 0.0), ("J2'", 0.0)], h);
            rect_loop(&base, "J1", "J2", phi1_star, phi2_star, samples_per_segment)
        }
        StandardLoop::XPath { phi_star, phi3 } => {
            if !(phi3.abs() <= FRAC_PI_2) {
                return Err(HoloError::Domain(format!("phi3 must satisfy |phi3| <= pi/2, got {phi3}")));
            }
            let base = ControlSettings::new([("J1", FRAC_PI_2), ("J2", FRAC_PI_2), ("J3", phi3)], h);
            x_path(&base, phi_star, samples_per_segment)
        }
    }
}

/// Phase-gate loop in the two-box encoding on X-block hardware: `J2` stays
/// off (`φ₂ = π/2`), `J1` is the switch and the asymmetric `J3` carries the
/// phase. Picks up [`berry_phase_rect`] with `γ₃` and the `J3`/`J1`
/// Josephson-energy ratio on `|1̄⟩ = |10⟩₁₂`.
pub fn two_box_phase_loop(
    phi1_star: f64,
    phi3_star: f64,
    samples_per_segment: usize,
    h: f64,
) -> Result<ParameterLoop> {
    let base = ControlSettings::new([("J1", FRAC_PI_2), ("J2", FRAC_PI_2), ("J3", 0.0)], h);
    rect_loop(&base, "J1", "J3", phi1_star, phi3_star, samples_per_segment)
}

/// Which eigenvalue band to follow around a loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergySelector {
    /// The block's degenerate energy at each sample (`−h/2` or `−h`).
    Computational,
    Fixed(f64),
}

impl EnergySelector {
    pub fn energy(&self, kind: BlockKind, controls: &ControlSettings) -> f64 {
        match self {
            EnergySelector::Computational => kind.degenerate_energy(controls.h),
            EnergySelector::Fixed(e) => *e,
        }
    }
}

/// Closed-form degenerate basis of a block at a control point, or the
/// charge-state basis of the two-box encoding when the closed form is
/// singular (X block with `J₁ = J₂ = 0`).
///
/// Order: Z `(λ₁, λ₂)`, X `(λ₁, λ₂)` (or `(|01⟩₁₂, |10⟩₁₂)` at the
/// singular point), CZ `(λ₀₀, λ₀₁, λ₁₀, λ₁₁)`.
pub fn computational_anchor(block: &BlockLayout, controls: &ControlSettings) -> Result<SubspaceBasis> {
    let js = block.couplings(controls)?;
    let h = controls.h;
    match block.kind() {
        BlockKind::ZBlock => analytic_z_subspace(js["J1"], js["J2"], h),
        BlockKind::XBlock => {
            if js["J1"].norm_sqr() + js["J2"].norm_sqr() == 0.0 {
                let b = block.basis();
                let v0 = b.charge_vector(&["2"])?;
                let v1 = b.charge_vector(&["1"])?;
                Ok(SubspaceBasis {
                    energy: BlockKind::XBlock.degenerate_energy(h),
                    vectors: CMatrix::from_columns(&[v0, v1]),
                    tolerance: 0.0,
                })
            } else {
                analytic_x_subspace(js["J1"], js["J2"], js["J3"], h)
            }
        }
        BlockKind::CzBlock => {
            let e_c = controls.e_c.or(block.e_c()).expect("CZ layout carries e_c");
            let (ja, jb) = joint_tunneling_amplitudes(js["J1"], js["J1'"], js["J2"], js["J2'"], e_c)?;
            analytic_cz_subspace(ja, jb, h)
        }
        BlockKind::Prototype => Err(HoloError::Layout("prototype has no computational anchor".into())),
    }
}

/// Numerically detected degenerate subspace at one control point, restricted
/// to [`BlockLayout::computational_sector`].
pub fn numeric_subspace(
    block: &BlockLayout,
    controls: &ControlSettings,
    selector: EnergySelector,
) -> Result<SubspaceBasis> {
    subspace_in_sector(block, controls, selector, &block.computational_sector())
}

fn subspace_in_sector(
    block: &BlockLayout,
    controls: &ControlSettings,
    selector: EnergySelector,
    sector: &[bool],
) -> Result<SubspaceBasis> {
    let h = block.hamiltonian(controls)?;
    let es = eigendecompose(&h);
    let tol = es.default_tolerance();
    es.subspace_in(selector.energy(block.kind(), controls), tol, sector)
}

/// Outcome of a discrete Wilson-loop evaluation.
#[derive(Debug, Clone)]
pub struct HolonomyResult {
    /// Holonomy in the basis of `gauge_anchor`: a state `anchor·c` at the
    /// loop start returns as `anchor·(unitary·c)`.
    pub unitary: CMatrix,
    pub subspace_dim: usize,
    pub gauge_anchor: SubspaceBasis,
    /// `‖U_N − U_{N/2}‖_F`, the change when every other sample is dropped.
    pub discretization_error_estimate: f64,
    /// Deviation from unitarity before the final polar projection.
    pub raw_unitarity_error: f64,
    pub samples: usize,
}

/// Track the degenerate subspace around the loop and return the transported
/// frames at every sample. Frame `k` is obtained from the eigensolver's
/// basis at sample `k` by the Procrustes rotation closest to frame `k−1`.
fn transport(anchor: &SubspaceBasis, stride: usize, subspaces: &[SubspaceBasis]) -> Result<CMatrix> {
    let mut frame = procrustes_align(&subspaces[0].vectors, &anchor.vectors, MIN_OVERLAP)?;
    let mut k = stride;
    while k < subspaces.len() {
        frame = procrustes_align(&subspaces[k].vectors, &frame, MIN_OVERLAP)?;
        k += stride;
    }
    Ok(anchor.vectors.adjoint() * frame)
}

/// Discrete Wilson loop of the computational subspace of `block` around a
/// closed loop, expressed in the gauge of `anchor` (which must span the
/// subspace at the loop start).
pub fn loop_holonomy_with_anchor(
    block: &BlockLayout,
    lp: &ParameterLoop,
    selector: EnergySelector,
    anchor: &SubspaceBasis,
) -> Result<HolonomyResult> {
    let mismatch = lp.endpoint_mismatch();
    if mismatch > CLOSURE_TOL {
        return Err(HoloError::OpenLoop(mismatch));
    }
    let points = lp.points();
    let sector = block.computational_sector();
    let subspaces = points
        .iter()
        .map(|p| subspace_in_sector(block, p, selector, &sector))
        .collect::<Result<Vec<_>>>()?;
    let dim = anchor.dim();
    for (k, s) in subspaces.iter().enumerate() {
        if s.dim() != dim {
            return Err(HoloError::DimensionChange {
                expected: dim,
                found: s.dim(),
                sample: k,
            });
        }
    }
    let start_gap = subspaces[0].projector_distance(anchor);
    if start_gap > 1e-8 {
        return Err(HoloError::Encoding(format!(
            "anchor does not span the subspace at the loop start (projector distance {start_gap:e})"
        )));
    }
    let raw = transport(anchor, 1, &subspaces)?;
    let raw_unitarity_error = unitarity_error(&raw);
    let unitary = polar_unitary(&raw);
    let n = points.len() - 1;
    let discretization_error_estimate = if n % 2 == 0 && n >= 4 {
        let coarse = polar_unitary(&transport(anchor, 2, &subspaces)?);
        crate::linalg::frobenius(&(&unitary - coarse))
    } else {
        f64::NAN
    };
    Ok(HolonomyResult {
        unitary,
        subspace_dim: dim,
        gauge_anchor: anchor.clone(),
        discretization_error_estimate,
        raw_unitarity_error,
        samples: n,
    })
}

/// [`loop_holonomy_with_anchor`] with the anchor from
/// [`computational_anchor`] at the loop start.
pub fn loop_holonomy(block: &BlockLayout, lp: &ParameterLoop, selector: EnergySelector) -> Result<HolonomyResult> {
    let anchor = computational_anchor(block, &lp.start())?;
    loop_holonomy_with_anchor(block, lp, selector, &anchor)
}

/// Central-difference estimate of the Wilczek–Zee connection
/// `A_ab = ⟨λ_a|∂λ_b⟩` along `direction` in the gauge of the closed-form
/// basis ([`computational_anchor`] at each point).
#[derive(Debug, Clone)]
pub struct ConnectionEstimate {
    /// Anti-Hermitian part of the finite-difference matrix.
    pub matrix: CMatrix,
    /// Norm of the discarded Hermitian part.
    pub hermitian_residual: f64,
}

pub fn wilczek_zee_connection(
    block: &BlockLayout,
    controls: &ControlSettings,
    direction: &BTreeMap<String, f64>,
    selector: EnergySelector,
    step: f64,
) -> Result<ConnectionEstimate> {
    if !(step > 0.0) {
        return Err(HoloError::Domain(format!("step must be > 0, got {step}")));
    }
    let norm = direction.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(HoloError::Domain("direction must be non-zero".into()));
    }
    let shifted = |sign: f64| -> ControlSettings {
        let mut c = controls.clone();
        for (k, v) in direction {
            let cur = c.phis.get(k).copied().unwrap_or(0.0);
            c.phis.insert(k.clone(), cur + sign * step * v / norm);
        }
        c
    };
    let sector = block.computational_sector();
    let gauge = |c: &ControlSettings| -> Result<CMatrix> {
        let num = subspace_in_sector(block, c, selector, &sector)?;
        let ana = computational_anchor(block, c)?;
        if num.dim() != ana.dim() {
            return Err(HoloError::DimensionChange {
                expected: ana.dim(),
                found: num.dim(),
                sample: 0,
            });
        }
        procrustes_align(&num.vectors, &ana.vectors, MIN_OVERLAP)
    };
    let v0 = gauge(controls)?;
    let vp = gauge(&shifted(1.0))?;
    let vm = gauge(&shifted(-1.0))?;
    let raw = v0.adjoint() * (vp - vm) / C64::new(2.0 * step, 0.0);
    let anti = (&raw - raw.adjoint()) * C64::new(0.5, 0.0);
    let herm = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    Ok(ConnectionEstimate {
        matrix: anti,
        hermitian_residual: crate::linalg::frobenius(&herm),
    })
}

/// Phase acquired by the dark state around the rectangular Z-block loop,
/// `(1−γ₂²)/4 ∫₀^{φ₂*} [1/(cos²φ₁* + A₂²) − 1/A₂²] dφ₂`, for equal
/// Josephson energies of the two junctions.
pub fn berry_phase_z(gamma2: f64, phi1_star: f64, phi2_star: f64) -> Result<f64> {
    berry_phase_rect(gamma2, phi1_star, phi2_star, 1.0)
}

/// [`berry_phase_z`] when the phase-carrying coupling has `ratio` times the
/// Josephson energy of the switchable one (the closed form above is
/// `ratio = 1`). The bracket becomes
/// `ρ²/(cos²φ₁* + ρ²A₂²) − 1/A₂²` with `ρ = ratio`.
pub fn berry_phase_rect(gamma2: f64, phi1_star: f64, phi2_star: f64, ratio: f64) -> Result<f64> {
    check_corner("phi1_star", phi1_star)?;
    check_corner("phi2_star", phi2_star)?;
    if !(gamma2 > 0.0) {
        return Err(HoloError::Domain(format!("gamma2 must be > 0, got {gamma2}")));
    }
    if !(ratio > 0.0) {
        return Err(HoloError::Domain(format!("coupling ratio must be > 0, got {ratio}")));
    }
    if gamma2 == 1.0 {
        if phi2_star == FRAC_PI_2 {
            return Err(HoloError::Domain(
                "gamma2 = 1 with phi2_star = pi/2 makes the integrand singular".into(),
            ));
        }
        return Ok(0.0);
    }
    let c2 = {
        let c = (FRAC_PI_2 - phi1_star).sin();
        c * c
    };
    let r2 = ratio * ratio;
    let prefactor = (1.0 - gamma2 * gamma2) / 4.0;
    // combined bracket −c²/((c² + ρ²A²) A²), free of cancellation
    let integrand = |p: f64| -> f64 {
        let a = amplitude(gamma2, p).expect("validated domain");
        let a2 = a * a;
        -c2 / ((c2 + r2 * a2) * a2)
    };
    let r = integrate(integrand, 0.0, phi2_star, QUAD_TOL / prefactor.abs().max(1e-300))?;
    Ok(prefactor * r.value)
}

/// Rotation angle and conjugating phase of the X-block gate:
/// `φ = 2 ∫_{cos φ*}^1 cos φ* dx / ((x² + cos²φ*) √(1 + (x² + cos²φ*)/A₃²))`
/// and `φ′ = α₃/2 − π/4`, for equal Josephson energies of `J₁`, `J₂`, `J₃`.
pub fn rotation_angle_x(phi_star: f64, junction3: &JunctionParams) -> Result<(f64, f64)> {
    check_corner("phi_star", phi_star)?;
    junction3.validate()?;
    if junction3.gamma == 1.0 {
        return Err(HoloError::Domain("the X gate needs an asymmetric J3 (gamma3 != 1)".into()));
    }
    let a3 = amplitude(junction3.gamma, junction3.phi)?;
    let alpha3 = phase_shift(junction3.gamma, junction3.phi)?;
    let c = (FRAC_PI_2 - phi_star).sin();
    let phi_prime = alpha3 / 2.0 - FRAC_PI_4;
    if c == 0.0 {
        return Ok((0.0, phi_prime));
    }
    let a32 = a3 * a3;
    let integrand = |x: f64| {
        let r2 = x * x + c * c;
        c / (r2 * (1.0 + r2 / a32).sqrt())
    };
    let r = integrate(integrand, c, 1.0, QUAD_TOL / 2.0)?;
    Ok((2.0 * r.value, phi_prime))
}
