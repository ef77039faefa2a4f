//! Exit criteria of the simulator. Every test prints one
//! `ACn PASS|FAIL ...` line and then asserts the criterion.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use holo_core::analysis::{fidelity, ErrorBudget, REFERENCE_FIDELITY};
use holo_core::evolution::{adiabatic_gate, landau_zener_scan, minimal_gap, RampProfile, Schedule};
use holo_core::gates::{
    compose, conjugated_x_rotation, euler_decompose, extract_from_anchor, extract_logical, ideal_gate, Encoding,
    EncodingScheme, GateLabel,
};
use holo_core::holonomy::{
    berry_phase_z, loop_holonomy, rotation_angle_x, standard_loop, EnergySelector, StandardLoop,
};
use holo_core::junction::JunctionParams;
use holo_core::linalg::{phase_stripped_distance, unitarity_error, wrap_angle, CMatrix, C64};
use holo_core::network::{
    joint_tunneling_amplitudes, BlockKind, BlockLayout, ControlSettings,
};
use holo_core::spectrum::{analytic_cz_subspace, analytic_x_subspace, analytic_z_subspace, eigendecompose};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

const H_BIAS: f64 = 0.3;
const WILSON_SAMPLES: usize = 10_000;
const HALVING_STEPS_PER_UNIT: f64 = 32.0;

fn report(id: &str, pass: bool, detail: String) {
    println!("{id} {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn z_rect() -> StandardLoop {
    StandardLoop::ZRect {
        phi1_star: FRAC_PI_3,
        phi2_star: FRAC_PI_3,
    }
}

/// Phase of `|1̄⟩` relative to `|0̄⟩` of a diagonal 2x2 gate.
fn relative_phase(m: &CMatrix) -> f64 {
    (m[(1, 1)] / m[(0, 0)]).arg()
}

struct ZMethods {
    quadrature: f64,
    wilson: CMatrix,
    dynamic: CMatrix,
    dynamic_leakage: f64,
}

/// `dt` overrides the default integration step; the midpoint error is a small
/// relative correction to the O(eta) non-adiabatic term, so deep-adiabatic
/// runs can afford a coarser step.
fn z_three_methods(gamma2: f64, eta_over_gap: f64, dt: Option<f64>) -> ZMethods {
    let layout = BlockLayout::z_block(gamma2).unwrap();
    let enc = Encoding::new(BlockKind::ZBlock, EncodingScheme::SingleBox).unwrap();
    let quadrature = berry_phase_z(gamma2, FRAC_PI_3, FRAC_PI_3).unwrap();

    let lp = standard_loop(z_rect(), WILSON_SAMPLES / 4, H_BIAS).unwrap();
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
    let wilson = extract_logical(&hol, layout.basis(), &enc).unwrap().matrix;

    let coarse = standard_loop(z_rect(), 64, H_BIAS).unwrap();
    let gap = minimal_gap(&layout, &coarse, EnergySelector::Computational).unwrap().gap;
    let mut sched = Schedule::with_gap(&layout, &coarse, gap * eta_over_gap, gap, RampProfile::default(), None).unwrap();
    if let Some(dt) = dt {
        let steps = (sched.total_time / dt).ceil() as usize;
        sched = Schedule::with_gap(&layout, &coarse, gap * eta_over_gap, gap, RampProfile::default(), Some(steps)).unwrap();
    }
    let g = adiabatic_gate(&layout, &coarse, &sched).unwrap();
    let dynamic = extract_from_anchor(&g.unitary, &g.anchor, layout.basis(), &enc).unwrap().matrix;
    ZMethods {
        quadrature,
        wilson,
        dynamic,
        dynamic_leakage: g.leakage,
    }
}

#[test]
fn ac1_cross_method_z_gate() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for gamma2 in [0.4, 0.6, 0.8] {
        let m = z_three_methods(gamma2, 1.0 / 300.0, None);
        let (a, b, c) = (m.quadrature, relative_phase(&m.wilson), relative_phase(&m.dynamic));
        let worst = [wrap_angle(a - b), wrap_angle(a - c), wrap_angle(b - c)]
            .iter()
            .fold(0.0f64, |x, d| x.max(d.abs()));
        pass &= worst < 1e-3;
        details.push(format!(
            "g2={gamma2}: quad={a:.6} wilson={b:.6} dyn={c:.6} max|diff|={worst:.2e} leak={:.1e}",
            m.dynamic_leakage
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    report("AC1", pass, format!("[{}] runtime={elapsed:.1?} (limit 120s)", details.join("; ")));
    assert!(pass);
}

#[test]
fn ac2_symmetric_junction_gives_identity() {
    // The dressed dark state picks up an energy shift linear in eta
    // (2.6e-4 at gap/300), so the evolution is run deep in the adiabatic limit.
    let m = z_three_methods(1.0, 1.0 / 400_000.0, Some(4.0));
    let id = CMatrix::identity(2, 2);
    let quad_gate = ideal_gate(GateLabel::UZ, m.quadrature).unwrap().matrix;
    let d = [
        phase_stripped_distance(&quad_gate, &id),
        phase_stripped_distance(&m.wilson, &id),
        phase_stripped_distance(&m.dynamic, &id),
    ];
    let pass = d.iter().all(|v| *v < 1e-6);
    report(
        "AC2",
        pass,
        format!("distances to identity: quad={:.1e} wilson={:.1e} dyn={:.1e} (tol 1e-6)", d[0], d[1], d[2]),
    );
    assert!(pass);
}

fn random_flux(rng: &mut StdRng) -> f64 {
    rng.random_range(-FRAC_PI_2..FRAC_PI_2)
}

/// Largest `|λ − E|/range` over the computational eigenvalues and the
/// largest closed-form eigen-residual, for one random control point.
fn degeneracy_check(layout: &BlockLayout, controls: &ControlSettings) -> (f64, f64) {
    let kind = layout.kind();
    let h = layout.hamiltonian(controls).unwrap();
    let es = eigendecompose(&h);
    let target = kind.degenerate_energy(controls.h);
    let sector = layout.computational_sector();
    // eigenvalues of the sector closest to the target, as many as the subspace dimension
    let mut in_sector: Vec<f64> = es
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let v = es.eigenvectors.column(*k);
            v.iter().zip(&sector).filter(|(_, &m)| m).map(|(z, _)| z.norm_sqr()).sum::<f64>() > 0.5
        })
        .map(|(_, l)| *l)
        .collect();
    in_sector.sort_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()));
    let energy_err = in_sector[..kind.subspace_dim()]
        .iter()
        .map(|l| (l - target).abs())
        .fold(0.0, f64::max)
        / es.spectral_range();
    let js = layout.couplings(controls).unwrap();
    let analytic = match kind {
        BlockKind::ZBlock => analytic_z_subspace(js["J1"], js["J2"], controls.h),
        BlockKind::XBlock => analytic_x_subspace(js["J1"], js["J2"], js["J3"], controls.h),
        BlockKind::CzBlock => {
            let (ja, jb) =
                joint_tunneling_amplitudes(js["J1"], js["J1'"], js["J2"], js["J2'"], layout.e_c().unwrap()).unwrap();
            analytic_cz_subspace(ja, jb, controls.h)
        }
        BlockKind::Prototype => unreachable!(),
    }
    .unwrap();
    (energy_err, analytic.max_residual(&h))
}

#[test]
fn ac3_degeneracy_preservation() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let mut pass = true;
    let mut details = Vec::new();
    for kind in [BlockKind::ZBlock, BlockKind::XBlock, BlockKind::CzBlock] {
        let (mut worst_e, mut worst_r) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            let gamma = rng.random_range(0.2..0.9);
            let h = rng.random_range(0.05..1.0);
            let (layout, controls) = match kind {
                BlockKind::ZBlock => (
                    BlockLayout::z_block(gamma).unwrap(),
                    ControlSettings::new([("J1", random_flux(&mut rng)), ("J2", random_flux(&mut rng))], h),
                ),
                BlockKind::XBlock => {
                    let phi3 = random_flux(&mut rng);
                    (
                        BlockLayout::x_block(gamma, phi3).unwrap(),
                        ControlSettings::new(
                            [("J1", random_flux(&mut rng)), ("J2", random_flux(&mut rng)), ("J3", phi3)],
                            h,
                        ),
                    )
                }
                _ => {
                    let e_c = rng.random_range(3.0..10.0);
                    let gp = rng.random_range(0.2..0.9);
                    let mut c = ControlSettings::new(
                        [
                            ("J1", random_flux(&mut rng)),
                            ("J2", random_flux(&mut rng)),
                            ("J1'", random_flux(&mut rng)),
                            ("J2'", random_flux(&mut rng)),
                        ],
                        h,
                    );
                    c.e_c = Some(e_c);
                    (BlockLayout::cz_block(gamma, gp, e_c).unwrap(), c)
                }
            };
            let (e, r) = degeneracy_check(&layout, &controls);
            worst_e = worst_e.max(e);
            worst_r = worst_r.max(r);
        }
        pass &= worst_e <= 1e-10 && worst_r < 1e-11;
        details.push(format!("{kind:?}: |dE|/range={worst_e:.1e} residual={worst_r:.1e}"));
    }
    report("AC3", pass, format!("[{}] (tol 1e-10 / 1e-11, 50 draws each)", details.join("; ")));
    assert!(pass);
}

#[test]
fn ac4_cz_selectivity() {
    let gamma2 = 0.6;
    let layout = BlockLayout::cz_block(gamma2, 0.6, 4.0).unwrap();
    let lp = standard_loop(
        StandardLoop::CzRect {
            phi1_star: FRAC_PI_3,
            phi2_star: FRAC_PI_3,
        },
        WILSON_SAMPLES / 4,
        H_BIAS,
    )
    .unwrap();
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
    let enc = Encoding::new(BlockKind::CzBlock, EncodingScheme::SingleBox).unwrap();
    let g = extract_logical(&hol, layout.basis(), &enc).unwrap().matrix;
    let expected = berry_phase_z(gamma2, FRAC_PI_3, FRAC_PI_3).unwrap();
    let ph: Vec<f64> = (0..4).map(|i| g[(i, i)].arg()).collect();
    let spectators = [ph[0], ph[1], ph[3]];
    let spread = spectators
        .iter()
        .flat_map(|a| spectators.iter().map(move |b| wrap_angle(a - b).abs()))
        .fold(0.0, f64::max);
    let slot = wrap_angle(ph[2] - ph[0]);
    let off_diag = (0..4)
        .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|ij| g[ij].norm())
        .fold(0.0, f64::max);
    let pass = spread < 1e-5 && (slot - expected).abs() < 1e-3 && off_diag < 1e-6;
    report(
        "AC4",
        pass,
        format!(
            "spectator spread={spread:.1e} (tol 1e-5), |1b0b> phase={slot:.6} vs closed form {expected:.6} (tol 1e-3), max off-diagonal={off_diag:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn ac5_x_gate_conjugation_identity() {
    let (gamma3, phi3, phi_star) = (0.5, FRAC_PI_4, FRAC_PI_3);
    let layout = BlockLayout::x_block(gamma3, phi3).unwrap();
    let lp = standard_loop(StandardLoop::XPath { phi_star, phi3 }, WILSON_SAMPLES / 4, H_BIAS).unwrap();
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
    let enc = Encoding::new(BlockKind::XBlock, EncodingScheme::TwoBox).unwrap();
    let g = extract_logical(&hol, layout.basis(), &enc).unwrap().matrix;
    let j3 = JunctionParams::new(1.0, gamma3, phi3).unwrap();
    let (phi, phi_prime) = rotation_angle_x(phi_star, &j3).unwrap();
    let target = conjugated_x_rotation(phi, phi_prime);
    let d = phase_stripped_distance(&g, &target);
    let pass = d < 1e-3;
    report(
        "AC5",
        pass,
        format!(
            "phi={phi:.6} phi'={phi_prime:.6}; extracted=[[{:.5}, {:.5}], [{:.5}, {:.5}]]; distance={d:.3e} (tol 1e-3)",
            g[(0, 0)],
            g[(0, 1)],
            g[(1, 0)],
            g[(1, 1)]
        ),
    );
    assert!(pass);
}

#[test]
fn ac6_landau_zener_scaling() {
    let start = Instant::now();
    let layout = BlockLayout::z_block(0.6).unwrap();
    let lp = standard_loop(z_rect(), 64, H_BIAS).unwrap();
    let gap = minimal_gap(&layout, &lp, EnergySelector::Computational).unwrap().gap;
    let etas: Vec<f64> = (1..=10).map(|k| gap / (3.0 * k as f64)).collect();
    let scan = landau_zener_scan(&layout, &lp, &etas, RampProfile::default()).unwrap();
    let at_third = scan.rows[0].leakage;
    let elapsed = start.elapsed();
    let fit_ok = scan.r_squared > 0.95 && scan.slope < 0.0;
    let leak_ok = at_third <= 1e-4;
    let pass = fit_ok && leak_ok && elapsed < Duration::from_secs(300);
    report(
        "AC6",
        pass,
        format!(
            "gap={gap:.4} slope={:.4} R2={:.4} (need >0.95, slope<0: {}), leakage(eta=gap/3)={at_third:.2e} (need <=1e-4: {}), runtime={elapsed:.1?}",
            scan.slope,
            scan.r_squared,
            if fit_ok { "ok" } else { "no" },
            if leak_ok { "ok" } else { "no" }
        ),
    );
    assert!(pass);
}

#[test]
fn ac7_fidelity_formula() {
    let exact = fidelity(0.0, 0.0).unwrap() == 1.0;
    let n = 100;
    let ps: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let ds: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
    let mut monotone = true;
    for &d in &ds {
        for w in ps.windows(2) {
            monotone &= fidelity(w[1], d).unwrap() <= fidelity(w[0], d).unwrap();
        }
    }
    for &p in &ps {
        for w in ds.windows(2) {
            monotone &= fidelity(p, w[1]).unwrap() <= fidelity(p, w[0]).unwrap();
        }
    }
    let standard = ErrorBudget::standard(1.0).evaluate().unwrap().fidelity_lz;
    let value_ok = (standard - 0.9997).abs() <= 1e-4;
    let pass = exact && monotone && value_ok;
    report(
        "AC7",
        pass,
        format!(
            "F(0,0)==1: {exact}; monotone on 100-point grids: {monotone}; standard budget F={standard:.6} (target 0.9997 +- 1e-4; quoted reference {REFERENCE_FIDELITY} not reproduced by the formula)"
        ),
    );
    assert!(pass);
}

fn haar_unitary(rng: &mut StdRng) -> CMatrix {
    let mut g = CMatrix::from_fn(2, 2, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    // Gram-Schmidt on the columns
    let n0 = g.column(0).norm();
    let c0 = g.column(0) / C64::new(n0, 0.0);
    g.set_column(0, &c0);
    let proj = c0.dotc(&g.column(1));
    let c1 = g.column(1) - &c0 * proj;
    let n1 = c1.norm();
    g.set_column(1, &(c1 / C64::new(n1, 0.0)));
    g
}

fn reconstruct(target: &CMatrix) -> f64 {
    let e = euler_decompose(target).unwrap();
    let product = compose(&e.gates().unwrap()).unwrap().matrix * C64::from_polar(1.0, e.global_phase);
    (product - target).norm()
}

#[test]
fn ac8_universality_composition() {
    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let worst = (0..100).map(|_| reconstruct(&haar_unitary(&mut rng))).fold(0.0, f64::max);
    let s = 0.5f64.sqrt();
    let hadamard = CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
    );
    let h_res = reconstruct(&hadamard);
    let pass = worst < 1e-8 && h_res < 1e-8;
    report(
        "AC8",
        pass,
        format!("worst residual over 100 Haar unitaries={worst:.1e}; Hadamard residual={h_res:.1e} (tol 1e-8)"),
    );
    assert!(pass);
}

#[test]
fn ac9_numerical_hygiene() {
    let mut worst_norm = 0.0f64;
    let mut worst_unitarity = 0.0f64;
    let mut worst_halving = 0.0f64;
    let cases: Vec<(BlockLayout, StandardLoop)> = vec![
        (BlockLayout::z_block(0.6).unwrap(), z_rect()),
        (
            BlockLayout::x_block(0.5, FRAC_PI_4).unwrap(),
            StandardLoop::XPath {
                phi_star: FRAC_PI_3,
                phi3: FRAC_PI_4,
            },
        ),
        (
            BlockLayout::cz_block(0.6, 0.6, 4.0).unwrap(),
            StandardLoop::CzRect {
                phi1_star: FRAC_PI_3,
                phi2_star: FRAC_PI_3,
            },
        ),
    ];
    for (layout, kind) in &cases {
        let lp = standard_loop(*kind, 256, H_BIAS).unwrap();
        let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
        worst_unitarity = worst_unitarity.max(hol.raw_unitarity_error).max(unitarity_error(&hol.unitary));
        let coarse = standard_loop(*kind, 64, H_BIAS).unwrap();
        let gap = minimal_gap(layout, &coarse, EnergySelector::Computational).unwrap().gap;
        for k in [3.0, 10.0, 30.0] {
            let s = Schedule::with_gap(layout, &coarse, gap / k, gap, RampProfile::default(), None).unwrap();
            let g = adiabatic_gate(layout, &coarse, &s).unwrap();
            worst_norm = worst_norm.max(g.norm_error);
            if k == 10.0 {
                // Midpoint stepping is second order; compare two step counts in
                // the asymptotic regime (dt = 1/32 against 1/64).
                let steps = (s.total_time * HALVING_STEPS_PER_UNIT).ceil() as usize;
                let base = Schedule::with_gap(layout, &coarse, gap / k, gap, RampProfile::default(), Some(steps)).unwrap();
                let a = adiabatic_gate(layout, &coarse, &base).unwrap();
                let b = adiabatic_gate(layout, &coarse, &base.refined()).unwrap();
                worst_norm = worst_norm.max(a.norm_error).max(b.norm_error);
                worst_halving = worst_halving.max((a.unitary - b.unitary).norm());
            }
        }
    }
    let pass = worst_norm <= 1e-12 && worst_unitarity <= 1e-10 && worst_halving < 1e-8;
    report(
        "AC9",
        pass,
        format!(
            "max norm drift={worst_norm:.1e} (tol 1e-12); max holonomy unitarity error={worst_unitarity:.1e} (tol 1e-10); step-halving change={worst_halving:.1e} (tol 1e-8)"
        ),
    );
    assert!(pass);
}
