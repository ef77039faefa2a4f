//! Holonomies of the reference loops against closed forms.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use holo_core::gates::{
    conjugated_x_rotation, extract_logical, ideal_gate, Encoding, EncodingScheme, GateLabel,
};
use holo_core::holonomy::{
    berry_phase_rect, berry_phase_z, loop_holonomy, rotation_angle_x, standard_loop, two_box_phase_loop,
    EnergySelector, StandardLoop,
};
use holo_core::junction::JunctionParams;
use holo_core::linalg::{phase_stripped_distance, CMatrix, C64};
use holo_core::network::{BlockKind, BlockLayout};

const H: f64 = 0.3;

fn x_gate(gamma3: f64, phi3: f64, phi_star: f64, samples: usize) -> CMatrix {
    let layout = BlockLayout::x_block(gamma3, phi3).unwrap();
    let lp = standard_loop(StandardLoop::XPath { phi_star, phi3 }, samples, H).unwrap();
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
    let enc = Encoding::new(BlockKind::XBlock, EncodingScheme::TwoBox).unwrap();
    extract_logical(&hol, layout.basis(), &enc).unwrap().matrix
}

fn real_rotation(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(c, 0.0)],
    )
}

/// Azimuth swept by `(cos φ₁, cos φ₂)` between the two straight legs.
fn swept_azimuth(phi_star: f64) -> f64 {
    let c = phi_star.cos();
    1.0f64.atan2(c) - c.atan2(1.0)
}

#[test]
fn x_holonomy_is_solid_angle_rotation() {
    for (gamma3, phi3, phi_star) in [(0.5, FRAC_PI_4, FRAC_PI_3), (0.3, 0.2, FRAC_PI_4), (0.7, 1.0, FRAC_PI_6)] {
        let m = x_gate(gamma3, phi3, phi_star, 2500);
        let jp = JunctionParams::new(1.0, gamma3, phi3).unwrap();
        let (phi, _) = rotation_angle_x(phi_star, &jp).unwrap();
        let expected = real_rotation(swept_azimuth(phi_star) - phi);
        let d = phase_stripped_distance(&m, &expected);
        assert!(d < 1e-5, "gamma3={gamma3} phi3={phi3} phi*={phi_star}: distance {d:.2e}");
    }
}

/// The coupling phase of `J3` can be gauged away, so the gate stays real.
#[test]
fn x_holonomy_is_real() {
    for phi3 in [0.1, FRAC_PI_4, 1.2] {
        let m = x_gate(0.5, phi3, FRAC_PI_3, 1000);
        let worst = m.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
        assert!(worst < 1e-9, "phi3={phi3}: imaginary part {worst:.2e}");
    }
}

/// Stated relation for the X gate: the loop gives the conjugated rotation
/// with the angles of `rotation_angle_x`. The holonomy is a real rotation
/// independent of `α₃`, so this does not hold (see the solid-angle test).
#[test]
fn x_holonomy_matches_conjugated_rotation() {
    let jp = JunctionParams::new(1.0, 0.5, FRAC_PI_4).unwrap();
    let (phi, phi_prime) = rotation_angle_x(FRAC_PI_3, &jp).unwrap();
    let m = x_gate(0.5, FRAC_PI_4, FRAC_PI_3, 2500);
    let d = phase_stripped_distance(&m, &conjugated_x_rotation(phi, phi_prime));
    assert!(d < 1e-4, "distance {d:.3e}");
}

#[test]
fn two_box_phase_gate_on_x_hardware() {
    for (gamma3, phi1_star, phi3_star) in [(0.6, FRAC_PI_3, FRAC_PI_3), (0.4, FRAC_PI_4, 1.2)] {
        let layout = BlockLayout::x_block(gamma3, 0.0).unwrap();
        let lp = two_box_phase_loop(phi1_star, phi3_star, 2500, H).unwrap();
        let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
        let enc = Encoding::new(BlockKind::ZBlock, EncodingScheme::TwoBox).unwrap();
        let gate = extract_logical(&hol, layout.basis(), &enc).unwrap();
        let phase = berry_phase_rect(gamma3, phi1_star, phi3_star, 1.0).unwrap();
        assert!((phase - berry_phase_z(gamma3, phi1_star, phi3_star).unwrap()).abs() < 1e-14);
        let ideal = ideal_gate(GateLabel::UZ, phase).unwrap();
        let d = phase_stripped_distance(&gate.matrix, &ideal.matrix);
        assert!(d < 1e-5, "gamma3={gamma3}: distance {d:.2e} (phase {phase})");
    }
}

#[test]
fn z_gate_tracks_closed_form_over_angles() {
    let layout = BlockLayout::z_block(0.5).unwrap();
    let enc = Encoding::new(BlockKind::ZBlock, EncodingScheme::SingleBox).unwrap();
    for (p1, p2) in [(0.2, 0.4), (FRAC_PI_4, 1.3), (1.4, FRAC_PI_6)] {
        let lp = standard_loop(StandardLoop::ZRect { phi1_star: p1, phi2_star: p2 }, 2500, H).unwrap();
        let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
        let gate = extract_logical(&hol, layout.basis(), &enc).unwrap();
        let ideal = ideal_gate(GateLabel::UZ, berry_phase_z(0.5, p1, p2).unwrap()).unwrap();
        assert!(gate.distance(&ideal) < 1e-5);
    }
}

#[test]
fn degenerate_rectangle_is_identity() {
    let layout = BlockLayout::z_block(0.6).unwrap();
    let lp = standard_loop(
        StandardLoop::ZRect {
            phi1_star: FRAC_PI_2,
            phi2_star: FRAC_PI_3,
        },
        64,
        H,
    )
    .unwrap();
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
    assert!(phase_stripped_distance(&hol.unitary, &CMatrix::identity(2, 2)) < 1e-12);
}

#[test]
fn cz_gate_is_controlled_phase() {
    let layout = BlockLayout::cz_block(0.6, 0.6, 4.0).unwrap();
    let lp = standard_loop(
        StandardLoop::CzRect {
            phi1_star: FRAC_PI_3,
            phi2_star: FRAC_PI_3,
        },
        1000,
        H,
    )
    .unwrap();
    let hol = loop_holonomy(&layout, &lp, EnergySelector::Computational).unwrap();
    let enc = Encoding::new(BlockKind::CzBlock, EncodingScheme::SingleBox).unwrap();
    let gate = extract_logical(&hol, layout.basis(), &enc).unwrap();
    assert_eq!(gate.label, GateLabel::UCz);
    let ideal = ideal_gate(GateLabel::UCz, berry_phase_z(0.6, FRAC_PI_3, FRAC_PI_3).unwrap()).unwrap();
    assert!(gate.distance(&ideal) < 1e-5);
    for k in [0, 1, 3] {
        assert!((gate.matrix[(k, k)] - C64::new(1.0, 0.0)).norm() < 1e-6);
    }
}
