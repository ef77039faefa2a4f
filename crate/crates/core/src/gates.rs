//! Logical gates: ideal targets, extraction from loop holonomies or
//! propagated transfer matrices, composition and ZXZ decomposition.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{HoloError, Result};
use crate::holonomy::HolonomyResult;
use crate::linalg::{phase_stripped_distance, unitarity_error, wrap_angle, CMatrix, C64};
use crate::network::{Basis, BlockKind};
use crate::spectrum::SubspaceBasis;

/// Tolerance on unitarity of every constructed gate.
pub const GATE_UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateLabel {
    #[serde(rename = "U_Z")]
    UZ,
    #[serde(rename = "U_X")]
    UX,
    #[serde(rename = "U_CZ")]
    UCz,
    #[serde(rename = "COMPOSED")]
    Composed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalGate {
    pub matrix: CMatrix,
    pub label: GateLabel,
    pub angles: Vec<f64>,
    pub determinant: C64,
}

impl LogicalGate {
    pub fn new(matrix: CMatrix, label: GateLabel, angles: Vec<f64>) -> Result<Self> {
        if !matrix.is_square() || !(matrix.nrows() == 2 || matrix.nrows() == 4) {
            return Err(HoloError::Dimension(format!(
                "logical gates are 2x2 or 4x4, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let err = unitarity_error(&matrix);
        if err > GATE_UNITARITY_TOL {
            return Err(HoloError::Domain(format!("gate is not unitary (error {err:e})")));
        }
        let determinant = matrix.determinant();
        Ok(LogicalGate {
            matrix,
            label,
            angles,
            determinant,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius distance to `other` minimised over a global phase.
    pub fn distance(&self, other: &LogicalGate) -> f64 {
        phase_stripped_distance(&self.matrix, &other.matrix)
    }
}

/// `U_Z(φ) = diag(1, e^{iφ})`.
pub fn phase_gate(phi: f64) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::from_polar(1.0, phi)]))
}

/// `U_X(φ) = exp(iφσ^x)`.
pub fn x_rotation(phi: f64) -> CMatrix {
    let (s, c) = phi.sin_cos();
    CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(0.0, s), C64::new(0.0, s), C64::new(c, 0.0)])
}

/// `U_CZ(φ)`: phase `e^{iφ}` on `|1̄0̄⟩` in the order `(0̄0̄, 0̄1̄, 1̄0̄, 1̄1̄)`.
pub fn controlled_phase(phi: f64) -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(2, 2)] = C64::from_polar(1.0, phi);
    m
}

pub fn ideal_gate(label: GateLabel, angle: f64) -> Result<LogicalGate> {
    let m = match label {
        GateLabel::UZ => phase_gate(angle),
        GateLabel::UX => x_rotation(angle),
        GateLabel::UCz => controlled_phase(angle),
        GateLabel::Composed => {
            return Err(HoloError::Domain("COMPOSED has no ideal form; use compose".into()));
        }
    };
    LogicalGate::new(m, label, vec![angle])
}

/// Product of `gates`, the first listed acting first.
pub fn compose(gates: &[LogicalGate]) -> Result<LogicalGate> {
    let first = gates
        .first()
        .ok_or_else(|| HoloError::Domain("nothing to compose".into()))?;
    let mut m = first.matrix.clone();
    let mut angles = first.angles.clone();
    for g in &gates[1..] {
        if g.dim() != m.nrows() {
            return Err(HoloError::Dimension(format!(
                "cannot compose a {}-dimensional gate with a {}-dimensional one",
                m.nrows(),
                g.dim()
            )));
        }
        m = &g.matrix * m;
        angles.extend(&g.angles);
    }
    LogicalGate::new(m, GateLabel::Composed, angles)
}

/// ZXZ angles with `target = e^{iθ}·U_Z(a)·U_X(b)·U_Z(c)` (matrix product,
/// so `U_Z(c)` acts first), `b ∈ [0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub global_phase: f64,
}

impl EulerAngles {
    pub fn matrix(&self) -> CMatrix {
        phase_gate(self.a) * x_rotation(self.b) * phase_gate(self.c) * C64::from_polar(1.0, self.global_phase)
    }

    /// The same product as gates in application order.
    pub fn gates(&self) -> Result<Vec<LogicalGate>> {
        Ok(vec![
            ideal_gate(GateLabel::UZ, self.c)?,
            ideal_gate(GateLabel::UX, self.b)?,
            ideal_gate(GateLabel::UZ, self.a)?,
        ])
    }
}

const EULER_DEGENERATE: f64 = 1e-14;

pub fn euler_decompose(target: &CMatrix) -> Result<EulerAngles> {
    if target.nrows() != 2 || target.ncols() != 2 {
        return Err(HoloError::Dimension(format!(
            "ZXZ decomposition needs a 2x2 matrix, got {}x{}",
            target.nrows(),
            target.ncols()
        )));
    }
    let err = unitarity_error(target);
    if err > 1e-8 {
        return Err(HoloError::Domain(format!("target is not unitary (error {err:e})")));
    }
    let (t00, t01, t10, t11) = (target[(0, 0)], target[(0, 1)], target[(1, 0)], target[(1, 1)]);
    let b = t10.norm().atan2(t00.norm());
    let angles = if t10.norm() <= EULER_DEGENERATE {
        let theta = t00.arg();
        EulerAngles {
            a: wrap_angle(t11.arg() - theta),
            b: 0.0,
            c: 0.0,
            global_phase: theta,
        }
    } else if t00.norm() <= EULER_DEGENERATE {
        let theta = wrap_angle(t10.arg() - FRAC_PI_2);
        EulerAngles {
            a: 0.0,
            b: FRAC_PI_2,
            c: wrap_angle(t01.arg() - theta - FRAC_PI_2),
            global_phase: theta,
        }
    } else {
        let theta = t00.arg();
        EulerAngles {
            a: wrap_angle(t10.arg() - theta - FRAC_PI_2),
            b,
            c: wrap_angle(t01.arg() - theta - FRAC_PI_2),
            global_phase: theta,
        }
    };
    Ok(angles)
}

/// How logical states are stored in charge states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingScheme {
    /// `|0̄⟩, |1̄⟩` are the empty and occupied states of box 1 (and 1′).
    SingleBox,
    /// `|0̄⟩ → |01⟩₁₂`, `|1̄⟩ → |10⟩₁₂`.
    TwoBox,
}

/// Charge states of the computational basis on a given block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub scheme: EncodingScheme,
    pub block: BlockKind,
    /// Occupied boxes of each logical basis state, in computational order.
    pub logical_states: Vec<Vec<String>>,
}

fn owned(states: &[&[&str]]) -> Vec<Vec<String>> {
    states.iter().map(|s| s.iter().map(|b| b.to_string()).collect()).collect()
}

impl Encoding {
    pub fn new(block: BlockKind, scheme: EncodingScheme) -> Result<Encoding> {
        let logical_states = match (block, scheme) {
            (BlockKind::ZBlock, EncodingScheme::SingleBox) => owned(&[&[], &["1"]]),
            (BlockKind::ZBlock | BlockKind::XBlock, EncodingScheme::TwoBox) => owned(&[&["2"], &["1"]]),
            (BlockKind::CzBlock, EncodingScheme::SingleBox) => owned(&[
                &["0'", "2'"],
                &["1'", "0'", "2'"],
                &["1", "0'", "2'"],
                &["1", "1'", "0'", "2'"],
            ]),
            (BlockKind::XBlock, EncodingScheme::SingleBox) => {
                return Err(HoloError::Encoding(
                    "the X block needs the two-box encoding over boxes 1 and 2".into(),
                ))
            }
            (BlockKind::CzBlock, EncodingScheme::TwoBox) => {
                return Err(HoloError::Encoding(
                    "the CZ block layout only carries the single-box encoding".into(),
                ))
            }
            (BlockKind::Prototype, _) => {
                return Err(HoloError::Encoding("the prototype has no logical encoding".into()))
            }
        };
        Ok(Encoding {
            scheme,
            block,
            logical_states,
        })
    }

    pub fn dim(&self) -> usize {
        self.logical_states.len()
    }

    /// Charge-basis vectors of the logical states as columns.
    pub fn vectors(&self, basis: &Basis) -> Result<CMatrix> {
        let cols = self
            .logical_states
            .iter()
            .map(|occ| {
                let refs: Vec<&str> = occ.iter().map(String::as_str).collect();
                basis.charge_vector(&refs)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::from_columns(&cols))
    }
}

/// Fix the global phase: the largest entry of the first column becomes real
/// and positive.
pub fn canonical_phase(m: &CMatrix) -> CMatrix {
    let mut best = C64::new(0.0, 0.0);
    for z in m.column(0).iter() {
        if z.norm() > best.norm() + 1e-12 {
            best = *z;
        }
    }
    if best.norm() == 0.0 {
        return m.clone();
    }
    m * (best.conj() / best.norm())
}

/// Re-express a subspace operator given in the basis `anchor` in the
/// computational basis of `encoding`, with the global phase fixed by
/// [`canonical_phase`].
pub fn extract_from_anchor(
    unitary: &CMatrix,
    anchor: &SubspaceBasis,
    basis: &Basis,
    encoding: &Encoding,
) -> Result<LogicalGate> {
    if unitary.nrows() != encoding.dim() || anchor.dim() != encoding.dim() {
        return Err(HoloError::Encoding(format!(
            "subspace has dimension {} but the encoding has {} states",
            anchor.dim(),
            encoding.dim()
        )));
    }
    if anchor.vectors.nrows() != basis.dim() {
        return Err(HoloError::Encoding("anchor and basis dimensions differ".into()));
    }
    let e = encoding.vectors(basis)?;
    let change = e.adjoint() * &anchor.vectors;
    let err = unitarity_error(&change);
    if err > 1e-8 {
        return Err(HoloError::Encoding(format!(
            "encoding states do not span the subspace at the loop start (error {err:e})"
        )));
    }
    let logical = &change * unitary * change.adjoint();
    let logical = canonical_phase(&crate::linalg::polar_unitary(&logical));
    let (label, angles) = classify(&logical);
    LogicalGate::new(logical, label, angles)
}

fn classify(m: &CMatrix) -> (GateLabel, Vec<f64>) {
    let off: f64 = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|ij| m[ij].norm())
        .fold(0.0, f64::max);
    let diagonal = off < 1e-6;
    match (m.nrows(), diagonal) {
        (2, true) => (GateLabel::UZ, vec![(m[(1, 1)] / m[(0, 0)]).arg()]),
        (4, true) => (GateLabel::UCz, vec![(m[(2, 2)] / m[(0, 0)]).arg()]),
        _ => (GateLabel::Composed, Vec::new()),
    }
}

/// Logical gate realised by a loop holonomy.
pub fn extract_logical(holonomy: &HolonomyResult, basis: &Basis, encoding: &Encoding) -> Result<LogicalGate> {
    extract_from_anchor(&holonomy.unitary, &holonomy.gauge_anchor, basis, encoding)
}

/// `U_Z†(φ′)·U_X(φ)·U_Z(φ′)` as a matrix product.
pub fn conjugated_x_rotation(phi: f64, phi_prime: f64) -> CMatrix {
    phase_gate(-phi_prime) * x_rotation(phi) * phase_gate(phi_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};
    use proptest::prelude::*;

    fn hadamard() -> CMatrix {
        let s = 0.5f64.sqrt();
        CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
    }

    #[test]
    fn ideal_gates() {
        let id = ideal_gate(GateLabel::UZ, 0.0).unwrap();
        assert_eq!(id.matrix, CMatrix::identity(2, 2));
        let x = ideal_gate(GateLabel::UX, FRAC_PI_2).unwrap();
        let i_sx = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        assert!(max_abs_diff(&x.matrix, &i_sx) < 1e-15);
        let cz = ideal_gate(GateLabel::UCz, 0.4).unwrap();
        for i in 0..4 {
            let want = if i == 2 { C64::from_polar(1.0, 0.4) } else { c(1.0, 0.0) };
            assert_eq!(cz.matrix[(i, i)], want);
        }
        assert!((cz.determinant - C64::from_polar(1.0, 0.4)).norm() < 1e-15);
        assert!(ideal_gate(GateLabel::Composed, 0.1).is_err());
    }

    #[test]
    fn composition_order_and_cancellation() {
        let z = ideal_gate(GateLabel::UZ, 0.7).unwrap();
        let zi = ideal_gate(GateLabel::UZ, -0.7).unwrap();
        let id = compose(&[z.clone(), zi]).unwrap();
        assert!(max_abs_diff(&id.matrix, &CMatrix::identity(2, 2)) < 1e-15);
        // first listed acts first
        let x = ideal_gate(GateLabel::UX, 0.3).unwrap();
        let zx = compose(&[z.clone(), x.clone()]).unwrap();
        assert!(max_abs_diff(&zx.matrix, &(&x.matrix * &z.matrix)) < 1e-15);
        assert!(compose(&[z, ideal_gate(GateLabel::UCz, 0.1).unwrap()]).is_err());
        assert!(compose(&[]).is_err());
    }

    #[test]
    fn removing_conjugation_leaves_x_rotation() {
        let (phi, pp) = (0.35, -0.62);
        let conj = LogicalGate::new(conjugated_x_rotation(phi, pp), GateLabel::Composed, vec![phi, pp]).unwrap();
        let g = compose(&[
            ideal_gate(GateLabel::UZ, -pp).unwrap(),
            conj,
            ideal_gate(GateLabel::UZ, pp).unwrap(),
        ])
        .unwrap();
        assert!(max_abs_diff(&g.matrix, &x_rotation(phi)) < 1e-15);
    }

    #[test]
    fn euler_examples() {
        let e = euler_decompose(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!((e.a, e.b, e.c, e.global_phase), (0.0, 0.0, 0.0, 0.0));
        let e = euler_decompose(&x_rotation(0.3)).unwrap();
        assert!(e.a.abs() < 1e-15 && (e.b - 0.3).abs() < 1e-15 && e.c.abs() < 1e-15);
        let h = hadamard();
        let e = euler_decompose(&h).unwrap();
        assert!(max_abs_diff(&e.matrix(), &h) < 1e-10);
        let composed = compose(&e.gates().unwrap()).unwrap();
        assert!(phase_stripped_distance(&composed.matrix, &h) < 1e-8);
    }

    #[test]
    fn euler_degenerate_targets() {
        let d = phase_gate(1.1) * C64::from_polar(1.0, 0.4);
        let e = euler_decompose(&d).unwrap();
        assert_eq!((e.b, e.c), (0.0, 0.0));
        assert!((e.a - 1.1).abs() < 1e-14);
        let anti = x_rotation(FRAC_PI_2) * phase_gate(0.8) * C64::from_polar(1.0, -0.2);
        let e = euler_decompose(&anti).unwrap();
        assert_eq!(e.a, 0.0);
        assert!(max_abs_diff(&e.matrix(), &anti) < 1e-14);
        assert!(euler_decompose(&CMatrix::identity(3, 3)).is_err());
        assert!(euler_decompose(&(CMatrix::identity(2, 2) * c(2.0, 0.0))).is_err());
    }

    #[test]
    fn encodings() {
        assert!(Encoding::new(BlockKind::XBlock, EncodingScheme::SingleBox).is_err());
        assert!(Encoding::new(BlockKind::CzBlock, EncodingScheme::TwoBox).is_err());
        assert_eq!(Encoding::new(BlockKind::CzBlock, EncodingScheme::SingleBox).unwrap().dim(), 4);
        let e = Encoding::new(BlockKind::XBlock, EncodingScheme::TwoBox).unwrap();
        let b = Basis::boxes(BlockKind::XBlock.boxes());
        let v = e.vectors(&b).unwrap();
        // |0̄⟩ = |01⟩₁₂: box 2 occupied
        assert_eq!(v.column(0).into_owned(), b.charge_vector(&["2"]).unwrap());
    }

    #[test]
    fn canonical_phase_makes_leading_entry_positive() {
        let m = x_rotation(0.3) * C64::from_polar(1.0, 2.0);
        let p = canonical_phase(&m);
        assert!((p[(0, 0)] - c(0.3f64.cos(), 0.0)).norm() < 1e-15);
    }

    fn random_unitary(a: f64, b: f64, c_: f64, t: f64) -> CMatrix {
        phase_gate(a) * x_rotation(b) * phase_gate(c_) * C64::from_polar(1.0, t)
    }

    proptest! {
        #[test]
        fn distance_is_a_pseudometric(
            p in proptest::collection::vec(-3.0f64..3.0, 12)
        ) {
            let u = random_unitary(p[0], p[1], p[2], p[3]);
            let v = random_unitary(p[4], p[5], p[6], p[7]);
            let w = random_unitary(p[8], p[9], p[10], p[11]);
            prop_assert!(phase_stripped_distance(&u, &u) < 1e-7);
            prop_assert!((phase_stripped_distance(&u, &v) - phase_stripped_distance(&v, &u)).abs() < 1e-12);
            prop_assert!(
                phase_stripped_distance(&u, &w)
                    <= phase_stripped_distance(&u, &v) + phase_stripped_distance(&v, &w) + 1e-7
            );
        }

        #[test]
        fn euler_round_trip(a in -3.1f64..3.1, b in -3.1f64..3.1, c_ in -3.1f64..3.1, t in -3.1f64..3.1) {
            let u = random_unitary(a, b, c_, t);
            let e = euler_decompose(&u).unwrap();
            prop_assert!((0.0..=FRAC_PI_2 + 1e-15).contains(&e.b));
            prop_assert!(max_abs_diff(&e.matrix(), &u) < 1e-10);
        }
    }
}
