//! Charge bases, gate-block layouts and Hamiltonian assembly.
//!
//! Conventions used throughout:
//! - a basis state is a bit string with one bit per box (1 = one excess
//!   Cooper pair), boxes in the layout's declared order, first box most
//!   significant, states enumerated lexicographically;
//! - `σ^z = |0⟩⟨0| − |1⟩⟨1|` on every box, so states with box 0 empty sit
//!   at `−h/2` under `−½ h σ₀^z`;
//! - `σ_n⁺ σ_0⁻` moves one pair from box 0 to box n.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HoloError, Result};
use crate::junction::JunctionParams;
use crate::linalg::{CMatrix, CVector, C64};

/// Deviation from Hermiticity tolerated at construction.
pub const HERMITIAN_TOL: f64 = 1e-13;

/// Occupation bits of every box in a block, in the block's box order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChargeState {
    pub occupations: Vec<bool>,
}

impl ChargeState {
    pub fn from_bits(bits: &[u8]) -> Self {
        ChargeState {
            occupations: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    pub fn index(&self) -> usize {
        self.occupations
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
    }

    pub fn from_index(index: usize, n_boxes: usize) -> Self {
        let occupations = (0..n_boxes)
            .map(|k| (index >> (n_boxes - 1 - k)) & 1 == 1)
            .collect();
        ChargeState { occupations }
    }

    pub fn pairs(&self) -> usize {
        self.occupations.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for ChargeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for &b in &self.occupations {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, "⟩")
    }
}

/// The basis an operator acts on.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// `|0̂⟩, |1̂⟩, …, |N̂⟩` of the prototype model.
    Prototype(usize),
    /// Charge states over the listed boxes.
    Boxes(Arc<Vec<String>>),
}

impl Basis {
    pub fn boxes(labels: &[&str]) -> Self {
        Basis::Boxes(Arc::new(labels.iter().map(|s| s.to_string()).collect()))
    }

    pub fn dim(&self) -> usize {
        match self {
            Basis::Prototype(n) => n + 1,
            Basis::Boxes(b) => 1 << b.len(),
        }
    }

    pub fn box_position(&self, label: &str) -> Option<usize> {
        match self {
            Basis::Prototype(_) => None,
            Basis::Boxes(b) => b.iter().position(|x| x == label),
        }
    }

    /// Unit vector of the charge state given as `(box label, occupied)`
    /// pairs; boxes not listed are empty.
    pub fn charge_vector(&self, occupied: &[&str]) -> Result<CVector> {
        let Basis::Boxes(boxes) = self else {
            return Err(HoloError::Layout("prototype basis has no boxes".into()));
        };
        let mut bits = vec![false; boxes.len()];
        for label in occupied {
            let pos = self
                .box_position(label)
                .ok_or_else(|| HoloError::Layout(format!("unknown box {label}")))?;
            bits[pos] = true;
        }
        let mut v = CVector::zeros(self.dim());
        v[ChargeState { occupations: bits }.index()] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn state(&self, index: usize) -> Option<ChargeState> {
        match self {
            Basis::Boxes(b) if index < self.dim() => Some(ChargeState::from_index(index, b.len())),
            _ => None,
        }
    }
}

/// Dense Hermitian matrix on a labelled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    basis: Basis,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix, basis: Basis) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != basis.dim() {
            return Err(HoloError::Dimension(format!(
                "matrix {}x{} on basis of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        let dev = matrix
            .iter()
            .zip(matrix.adjoint().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(HoloError::NonHermitian(dev));
        }
        Ok(HermitianOperator { matrix, basis })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// Largest absolute entry; used to scale tolerances.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)].norm() == 0.0))
    }
}

/// Total excess-pair number over the listed boxes, as a diagonal operator.
pub fn number_operator(basis: &Basis, boxes: &[&str]) -> Result<CMatrix> {
    let positions: Vec<usize> = boxes
        .iter()
        .map(|b| {
            basis
                .box_position(b)
                .ok_or_else(|| HoloError::Layout(format!("unknown box {b}")))
        })
        .collect::<Result<_>>()?;
    let n = basis.dim();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        let st = basis.state(i).expect("state");
        let count = positions.iter().filter(|&&p| st.occupations[p]).count();
        m[(i, i)] = C64::new(count as f64, 0.0);
    }
    Ok(m)
}

/// Prototype model: `ε|0̂⟩⟨0̂| − ½ Σ_i (Ω_i |î⟩⟨0̂| + Ω_i* |0̂⟩⟨î|)`.
pub fn prototype_hamiltonian(epsilon: f64, omegas: &[C64]) -> Result<HermitianOperator> {
    if omegas.is_empty() {
        return Err(HoloError::Domain("prototype needs at least one coupling".into()));
    }
    let n = omegas.len() + 1;
    let mut m = CMatrix::zeros(n, n);
    m[(0, 0)] = C64::new(epsilon, 0.0);
    for (i, &om) in omegas.iter().enumerate() {
        m[(i + 1, 0)] = -0.5 * om;
        m[(0, i + 1)] = -0.5 * om.conj();
    }
    HermitianOperator::new(m, Basis::Prototype(omegas.len()))
}

/// Kind of gate block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    Prototype,
    ZBlock,
    XBlock,
    CzBlock,
}

impl BlockKind {
    /// Box order of the charge basis.
    pub fn boxes(self) -> &'static [&'static str] {
        match self {
            BlockKind::Prototype => &[],
            BlockKind::ZBlock => &["0", "1", "2"],
            BlockKind::XBlock => &["0", "1", "2", "3"],
            BlockKind::CzBlock => &["1", "1'", "0", "0'", "2", "2'"],
        }
    }

    /// Junctions (label, box, reservoir box) present in the block.
    pub fn junction_slots(self) -> &'static [(&'static str, &'static str, &'static str)] {
        match self {
            BlockKind::Prototype => &[],
            BlockKind::ZBlock => &[("J1", "1", "0"), ("J2", "2", "0")],
            BlockKind::XBlock => &[("J1", "1", "0"), ("J2", "2", "0"), ("J3", "3", "0")],
            BlockKind::CzBlock => &[
                ("J1", "1", "0"),
                ("J2", "2", "0"),
                ("J1'", "1'", "0'"),
                ("J2'", "2'", "0'"),
            ],
        }
    }

    /// Junctions that must be switchable (`γ = 1`).
    pub fn switchable(self) -> &'static [&'static str] {
        match self {
            BlockKind::Prototype => &[],
            BlockKind::ZBlock => &["J1"],
            BlockKind::XBlock => &["J1", "J2"],
            BlockKind::CzBlock => &["J1", "J1'"],
        }
    }

    /// Degenerate energy of the computational subspace in units of `h`.
    pub fn degenerate_energy(self, h: f64) -> f64 {
        match self {
            BlockKind::CzBlock => -h,
            _ => -0.5 * h,
        }
    }

    /// Dimension of the computational subspace.
    pub fn subspace_dim(self) -> usize {
        match self {
            BlockKind::CzBlock => 4,
            BlockKind::Prototype => 0,
            _ => 2,
        }
    }

    /// Occupied boxes of the charge states that make up the computational
    /// states (and their ancilla partners).
    pub fn computational_charge_states(self) -> &'static [&'static [&'static str]] {
        match self {
            BlockKind::Prototype => &[],
            BlockKind::ZBlock => &[&[], &["1"], &["2"]],
            BlockKind::XBlock => &[&["1"], &["2"], &["3"]],
            BlockKind::CzBlock => &[
                &["0'", "2'"],
                &["1'", "0'", "2'"],
                &["1", "0'", "2'"],
                &["1'", "0'", "2"],
                &["1", "1'", "0'", "2'"],
            ],
        }
    }
}

/// A junction placed between two boxes of a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub label: String,
    pub boxes: (String, String),
    pub params: JunctionParams,
}

/// Which boxes and junctions make up a gate block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLayout {
    kind: BlockKind,
    basis: Basis,
    junctions: Vec<Junction>,
    e_c: Option<f64>,
}

impl BlockLayout {
    /// Build a layout from junction parameters keyed by label. Every slot of
    /// the block kind must be present, and the switch-off junctions must
    /// have `γ = 1`. The CZ block additionally needs the charging energy.
    pub fn new(kind: BlockKind, params: &BTreeMap<String, JunctionParams>, e_c: Option<f64>) -> Result<Self> {
        if kind == BlockKind::Prototype {
            return Err(HoloError::Layout("the prototype model has no box layout".into()));
        }
        let mut junctions = Vec::new();
        for &(label, a, b) in kind.junction_slots() {
            let p = params
                .get(label)
                .ok_or_else(|| HoloError::Layout(format!("missing junction {label}")))?;
            p.validate()?;
            if kind.switchable().contains(&label) && !p.is_switchable() {
                return Err(HoloError::Layout(format!(
                    "junction {label} must be built from identical junctions (gamma = 1), got {}",
                    p.gamma
                )));
            }
            junctions.push(Junction {
                label: label.to_string(),
                boxes: (a.to_string(), b.to_string()),
                params: *p,
            });
        }
        if let Some(extra) = params.keys().find(|k| !kind.junction_slots().iter().any(|s| s.0 == k.as_str())) {
            return Err(HoloError::Layout(format!("junction {extra} does not belong to {kind:?}")));
        }
        if kind == BlockKind::CzBlock {
            match e_c {
                Some(ec) if ec > 0.0 => {}
                _ => return Err(HoloError::Layout("CZ block needs a charging energy e_c > 0".into())),
            }
        }
        Ok(BlockLayout {
            kind,
            basis: Basis::boxes(kind.boxes()),
            junctions,
            e_c,
        })
    }

    /// Z block with `J1` symmetric and `J2` of asymmetry `gamma2`; unit `E_J`.
    pub fn z_block(gamma2: f64) -> Result<Self> {
        let mut p = BTreeMap::new();
        p.insert("J1".to_string(), JunctionParams::symmetric(0.0));
        p.insert("J2".to_string(), JunctionParams::new(1.0, gamma2, 0.0)?);
        BlockLayout::new(BlockKind::ZBlock, &p, None)
    }

    /// X block with `J1`, `J2` symmetric and `J3` of asymmetry `gamma3`.
    pub fn x_block(gamma3: f64, phi3: f64) -> Result<Self> {
        let mut p = BTreeMap::new();
        p.insert("J1".to_string(), JunctionParams::symmetric(0.0));
        p.insert("J2".to_string(), JunctionParams::symmetric(0.0));
        p.insert("J3".to_string(), JunctionParams::new(1.0, gamma3, phi3)?);
        BlockLayout::new(BlockKind::XBlock, &p, None)
    }

    /// CZ block: `J1`, `J1'` symmetric, `J2` and `J2'` of asymmetry `gamma2`
    /// and `gamma2p`. The Josephson energy of `J2'` is set so that
    /// `|J2'(0)| = |J1'(0)|`, which makes the joint amplitudes proportional to
    /// the unprimed couplings with a common factor.
    pub fn cz_block(gamma2: f64, gamma2p: f64, e_c: f64) -> Result<Self> {
        let mut p = BTreeMap::new();
        p.insert("J1".to_string(), JunctionParams::symmetric(0.0));
        p.insert("J2".to_string(), JunctionParams::new(1.0, gamma2, 0.0)?);
        p.insert("J1'".to_string(), JunctionParams::symmetric(0.0));
        p.insert("J2'".to_string(), JunctionParams::new(2.0 / (1.0 + gamma2p), gamma2p, 0.0)?);
        BlockLayout::new(BlockKind::CzBlock, &p, Some(e_c))
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn junction(&self, label: &str) -> Option<&Junction> {
        self.junctions.iter().find(|j| j.label == label)
    }

    pub fn e_c(&self) -> Option<f64> {
        self.e_c
    }

    /// Default control point: the fluxes stored in the junction parameters.
    pub fn default_controls(&self, h: f64) -> ControlSettings {
        ControlSettings {
            phis: self
                .junctions
                .iter()
                .map(|j| (j.label.clone(), j.params.phi))
                .collect(),
            h,
            n_g: None,
            e_c: self.e_c,
        }
    }

    /// Invariant sector of the computational states: every charge state
    /// connected to one of them by the Hamiltonian at a generic control
    /// point. Other pair-number sectors may hold spectator states at the
    /// same energy; they never mix with the computational ones.
    pub fn computational_sector(&self) -> Vec<bool> {
        let n = self.basis.dim();
        if self.kind == BlockKind::Prototype {
            return vec![true; n];
        }
        let generic = ControlSettings {
            phis: self.junctions.iter().map(|j| (j.label.clone(), 0.3)).collect(),
            h: 0.37,
            n_g: None,
            e_c: self.e_c,
        };
        let h = self.hamiltonian(&generic).expect("generic control point is valid");
        let seeds: Vec<usize> = self
            .kind
            .computational_charge_states()
            .iter()
            .filter_map(|occ| {
                let v = self.basis.charge_vector(occ).ok()?;
                v.iter().position(|z| z.re == 1.0)
            })
            .collect();
        crate::spectrum::coupled_sector(h.matrix(), &seeds)
    }

    /// Complex couplings of all junctions at the given controls.
    pub fn couplings(&self, controls: &ControlSettings) -> Result<BTreeMap<String, C64>> {
        let mut out = BTreeMap::new();
        for j in &self.junctions {
            let phi = controls
                .phis
                .get(&j.label)
                .ok_or_else(|| HoloError::Layout(format!("no flux given for junction {}", j.label)))?;
            out.insert(j.label.clone(), j.params.with_phi(*phi).coupling()?);
        }
        Ok(out)
    }

    pub fn check_controls(&self, controls: &ControlSettings) -> Result<()> {
        controls.validate()?;
        for j in &self.junctions {
            if !controls.phis.contains_key(&j.label) {
                return Err(HoloError::Layout(format!("no flux given for junction {}", j.label)));
            }
        }
        if let Some(extra) = controls.phis.keys().find(|k| self.junction(k).is_none()) {
            return Err(HoloError::Layout(format!("flux given for unknown junction {extra}")));
        }
        Ok(())
    }

    /// Hamiltonian of the block at the given control point.
    pub fn hamiltonian(&self, controls: &ControlSettings) -> Result<HermitianOperator> {
        self.check_controls(controls)?;
        let js = self.couplings(controls)?;
        match self.kind {
            BlockKind::ZBlock => z_hamiltonian(js["J1"], js["J2"], controls.h),
            BlockKind::XBlock => x_hamiltonian(js["J1"], js["J2"], js["J3"], controls.h),
            BlockKind::CzBlock => {
                let e_c = controls.e_c.or(self.e_c).expect("validated at construction");
                let (ja, jb) = joint_tunneling_amplitudes(js["J1"], js["J1'"], js["J2"], js["J2'"], e_c)?;
                cz_hamiltonian(ja, jb, controls.h)
            }
            BlockKind::Prototype => unreachable!("rejected at construction"),
        }
    }
}

/// Instantaneous control values: reduced fluxes per junction and the bias
/// `h = E_C (2 n_g − 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSettings {
    pub phis: BTreeMap<String, f64>,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_c: Option<f64>,
}

impl ControlSettings {
    pub fn new<'a>(phis: impl IntoIterator<Item = (&'a str, f64)>, h: f64) -> Self {
        ControlSettings {
            phis: phis.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            h,
            n_g: None,
            e_c: None,
        }
    }

    /// Bias from the gate charge: `h = E_C (2 n_g − 1)`.
    pub fn from_gate_charge<'a>(phis: impl IntoIterator<Item = (&'a str, f64)>, e_c: f64, n_g: f64) -> Self {
        let mut c = ControlSettings::new(phis, e_c * (2.0 * n_g - 1.0));
        c.n_g = Some(n_g);
        c.e_c = Some(e_c);
        c
    }

    pub fn validate(&self) -> Result<()> {
        if !self.h.is_finite() {
            return Err(HoloError::Domain("bias h must be finite".into()));
        }
        if let (Some(ng), Some(ec)) = (self.n_g, self.e_c) {
            let expect = ec * (2.0 * ng - 1.0);
            if (expect - self.h).abs() > 1e-12 {
                return Err(HoloError::Domain(format!(
                    "h = {} inconsistent with E_C(2 n_g - 1) = {expect}",
                    self.h
                )));
            }
        }
        if let Some(ec) = self.e_c {
            if !(ec > 0.0) {
                return Err(HoloError::Domain(format!("e_c must be > 0, got {ec}")));
            }
        }
        Ok(())
    }

    pub fn phi(&self, label: &str) -> Option<f64> {
        self.phis.get(label).copied()
    }

    pub fn with_phi(mut self, label: &str, phi: f64) -> Self {
        self.phis.insert(label.to_string(), phi);
        self
    }

    /// Largest difference in any flux or in `h`.
    pub fn distance(&self, other: &ControlSettings) -> f64 {
        let mut d = (self.h - other.h).abs();
        for (k, v) in &self.phis {
            match other.phis.get(k) {
                Some(w) => d = d.max((v - w).abs()),
                None => return f64::INFINITY,
            }
        }
        if other.phis.len() != self.phis.len() {
            return f64::INFINITY;
        }
        d
    }
}

/// Builder for many-box operators on a charge basis.
struct ChargeOperatorBuilder {
    n_boxes: usize,
    m: CMatrix,
}

impl ChargeOperatorBuilder {
    fn new(n_boxes: usize) -> Self {
        let d = 1 << n_boxes;
        ChargeOperatorBuilder {
            n_boxes,
            m: CMatrix::zeros(d, d),
        }
    }

    fn bit(&self, idx: usize, pos: usize) -> bool {
        (idx >> (self.n_boxes - 1 - pos)) & 1 == 1
    }

    fn flip(&self, idx: usize, pos: usize) -> usize {
        idx ^ (1 << (self.n_boxes - 1 - pos))
    }

    /// Adds `−½ (amp · T + h.c.)` where `T` moves one pair from each box in
    /// `from` to the matching box in `to` (every source occupied, every
    /// destination empty).
    fn add_transfer(&mut self, moves: &[(usize, usize)], amp: C64) {
        let d = 1usize << self.n_boxes;
        for idx in 0..d {
            if !moves.iter().all(|&(src, dst)| self.bit(idx, src) && !self.bit(idx, dst)) {
                continue;
            }
            let mut out = idx;
            for &(src, dst) in moves {
                out = self.flip(self.flip(out, src), dst);
            }
            self.m[(out, idx)] += -0.5 * amp;
            self.m[(idx, out)] += -0.5 * amp.conj();
        }
    }

    /// Adds `coef · σ^z` on one box.
    fn add_sigma_z(&mut self, pos: usize, coef: f64) {
        let d = 1usize << self.n_boxes;
        for idx in 0..d {
            let s = if self.bit(idx, pos) { -1.0 } else { 1.0 };
            self.m[(idx, idx)] += C64::new(coef * s, 0.0);
        }
    }
}

/// Z block on boxes (0, 1, 2):
/// `−½ Σ_{n=1,2} (J_n σ_n⁺σ_0⁻ + h.c.) − ½ h σ_0^z`.
pub fn z_hamiltonian(j1: C64, j2: C64, h: f64) -> Result<HermitianOperator> {
    let mut b = ChargeOperatorBuilder::new(3);
    b.add_transfer(&[(0, 1)], j1);
    b.add_transfer(&[(0, 2)], j2);
    b.add_sigma_z(0, -0.5 * h);
    HermitianOperator::new(b.m, Basis::boxes(BlockKind::ZBlock.boxes()))
}

/// X block on boxes (0, 1, 2, 3):
/// `−½ Σ_{n=1,2,3} (J_n σ_n⁺σ_0⁻ + h.c.) − ½ h σ_0^z`.
pub fn x_hamiltonian(j1: C64, j2: C64, j3: C64, h: f64) -> Result<HermitianOperator> {
    let mut b = ChargeOperatorBuilder::new(4);
    b.add_transfer(&[(0, 1)], j1);
    b.add_transfer(&[(0, 2)], j2);
    b.add_transfer(&[(0, 3)], j3);
    b.add_sigma_z(0, -0.5 * h);
    HermitianOperator::new(b.m, Basis::boxes(BlockKind::XBlock.boxes()))
}

/// Joint-tunnelling amplitudes `J_a = 4 J₁ J₁′*/E_C`, `J_b = 4 J₂ J₂′*/E_C`.
pub fn joint_tunneling_amplitudes(j1: C64, j1p: C64, j2: C64, j2p: C64, e_c: f64) -> Result<(C64, C64)> {
    if !(e_c > 0.0) {
        return Err(HoloError::Domain(format!("e_c must be > 0, got {e_c}")));
    }
    Ok((4.0 * j1 * j1p.conj() / e_c, 4.0 * j2 * j2p.conj() / e_c))
}

/// CZ block on boxes (1, 1′, 0, 0′, 2, 2′) with joint tunnelling:
/// `−½[J_a (σ₁⁺σ₀⁻)(σ₁′⁻σ₀′⁺) + h.c.] − ½[J_b (σ₂⁺σ₀⁻)(σ₂′⁻σ₀′⁺) + h.c.]
///  − ½ h (σ₀^z − σ₀′^z)`.
pub fn cz_hamiltonian(j_a: C64, j_b: C64, h: f64) -> Result<HermitianOperator> {
    // positions in the (1, 1', 0, 0', 2, 2') order
    const B1: usize = 0;
    const B1P: usize = 1;
    const B0: usize = 2;
    const B0P: usize = 3;
    const B2: usize = 4;
    const B2P: usize = 5;
    let mut b = ChargeOperatorBuilder::new(6);
    b.add_transfer(&[(B0, B1), (B1P, B0P)], j_a);
    b.add_transfer(&[(B0, B2), (B2P, B0P)], j_b);
    b.add_sigma_z(B0, -0.5 * h);
    b.add_sigma_z(B0P, 0.5 * h);
    HermitianOperator::new(b.m, Basis::boxes(BlockKind::CzBlock.boxes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frobenius};
    use std::f64::consts::FRAC_PI_2;

    fn residual(h: &HermitianOperator, v: &CVector, e: f64) -> f64 {
        (h.apply(v) - v * C64::new(e, 0.0)).norm()
    }

    fn normalized(v: CVector) -> CVector {
        let n = v.norm();
        v / C64::new(n, 0.0)
    }

    fn z_lambda1(j1: C64, j2: C64) -> CVector {
        let b = Basis::boxes(BlockKind::ZBlock.boxes());
        normalized(b.charge_vector(&["1"]).unwrap() * j2.conj() - b.charge_vector(&["2"]).unwrap() * j1.conj())
    }

    #[test]
    fn charge_state_index_is_lexicographic() {
        assert_eq!(ChargeState::from_bits(&[1, 0, 0]).index(), 4);
        assert_eq!(ChargeState::from_bits(&[0, 1, 0]).index(), 2);
        assert_eq!(ChargeState::from_index(5, 3), ChargeState::from_bits(&[1, 0, 1]));
        assert_eq!(ChargeState::from_bits(&[1, 0, 1]).to_string(), "|101⟩");
    }

    #[test]
    fn prototype_zero_couplings() {
        let h = prototype_hamiltonian(0.0, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(frobenius(h.matrix()), 0.0);
        assert!(h.is_diagonal());
    }

    #[test]
    fn prototype_rejects_empty() {
        assert!(prototype_hamiltonian(1.0, &[]).is_err());
    }

    #[test]
    fn prototype_bright_states() {
        // at ε = 0 the bright pair is (|Ω̂⟩ ∓ |0̂⟩)/√2 at energies ±Ω/2
        let h = prototype_hamiltonian(0.0, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let s = 0.5f64.sqrt();
        let bright = CVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(s, 0.0)]);
        let zero = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let plus = (&bright - &zero) * c(s, 0.0);
        let minus = (&bright + &zero) * c(s, 0.0);
        assert!(residual(&h, &plus, s) < 1e-14);
        assert!(residual(&h, &minus, -s) < 1e-14);
    }

    #[test]
    fn z_block_without_tunnelling() {
        let h = 0.7;
        let op = z_hamiltonian(c(0.0, 0.0), c(0.0, 0.0), h).unwrap();
        assert!(op.is_diagonal());
        let b = op.basis().clone();
        for occ in [&[][..], &["1"][..], &["2"][..]] {
            assert!(residual(&op, &b.charge_vector(occ).unwrap(), -h / 2.0) < 1e-15);
        }
    }

    #[test]
    fn z_block_transfer_matrix_element() {
        let op = z_hamiltonian(c(0.3, 0.2), c(0.0, 0.0), 0.0).unwrap();
        let from = ChargeState::from_bits(&[1, 0, 0]).index();
        let to = ChargeState::from_bits(&[0, 1, 0]).index();
        assert_eq!(op.matrix()[(to, from)], c(-0.15, -0.1));
    }

    #[test]
    fn z_block_degenerate_states() {
        let (j1, j2, h) = (c(1.0, 0.0), c(0.0, 1.0), 0.5);
        let op = z_hamiltonian(j1, j2, h).unwrap();
        assert!(residual(&op, &z_lambda1(j1, j2), -h / 2.0) < 1e-12);
        let vac = op.basis().charge_vector(&[]).unwrap();
        assert!(residual(&op, &vac, -h / 2.0) < 1e-12);
        // generic couplings
        let (j1, j2) = (c(0.3, -1.1), c(-0.4, 0.8));
        let op = z_hamiltonian(j1, j2, -0.9).unwrap();
        assert!(residual(&op, &z_lambda1(j1, j2), 0.45) < 1e-12);
        // J1 = 0 leaves the pair on box 1 as the dark state
        let lam = z_lambda1(c(0.0, 0.0), c(0.0, 1.0));
        let expect = op.basis().charge_vector(&["1"]).unwrap() * c(0.0, -1.0);
        assert!((lam - expect).norm() < 1e-15);
    }

    #[test]
    fn z_block_one_pair_sector_is_shifted_prototype() {
        let (j1, j2, h) = (c(0.8, -0.1), c(0.3, 0.6), 0.35);
        let op = z_hamiltonian(j1, j2, h).unwrap();
        let proto = prototype_hamiltonian(h, &[j1, j2]).unwrap();
        let idx = [
            ChargeState::from_bits(&[1, 0, 0]).index(),
            ChargeState::from_bits(&[0, 1, 0]).index(),
            ChargeState::from_bits(&[0, 0, 1]).index(),
        ];
        let sector = CMatrix::from_fn(3, 3, |r, col| op.matrix()[(idx[r], idx[col])]);
        let shifted = proto.matrix() - CMatrix::identity(3, 3) * c(h / 2.0, 0.0);
        assert!(frobenius(&(sector - shifted)) < 1e-13);
    }

    #[test]
    fn z_block_conserves_pair_number() {
        let op = z_hamiltonian(c(0.8, -0.1), c(0.3, 0.6), 0.35).unwrap();
        let n = number_operator(op.basis(), &["0", "1", "2"]).unwrap();
        assert!(frobenius(&(op.matrix() * &n - &n * op.matrix())) < 1e-14);
    }

    fn x_states(j1: C64, j2: C64, j3: C64) -> (CVector, CVector) {
        let b = Basis::boxes(BlockKind::XBlock.boxes());
        let s10 = b.charge_vector(&["1"]).unwrap();
        let s01 = b.charge_vector(&["2"]).unwrap();
        let s3 = b.charge_vector(&["3"]).unwrap();
        let l1 = &s10 * j2.conj() - &s01 * j1.conj();
        let w = j3.conj() / (j1.norm_sqr() + j2.norm_sqr());
        let l2 = (&s10 * j1 + &s01 * j2) * w - s3;
        (normalized(l1), normalized(l2))
    }

    #[test]
    fn x_block_degenerate_states() {
        let (j1, j2, j3, h) = (c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), 0.4);
        let op = x_hamiltonian(j1, j2, j3, h).unwrap();
        let (l1, l2) = x_states(j1, j2, j3);
        assert!(residual(&op, &l1, -h / 2.0) < 1e-12);
        assert!(residual(&op, &l2, -h / 2.0) < 1e-12);
        let (j1, j2, j3) = (c(0.2, 0.9), c(-1.0, 0.3), c(0.4, -0.7));
        let op = x_hamiltonian(j1, j2, j3, -0.3).unwrap();
        let (l1, l2) = x_states(j1, j2, j3);
        assert!(residual(&op, &l1, 0.15) < 1e-12);
        assert!(residual(&op, &l2, 0.15) < 1e-12);
    }

    #[test]
    fn x_block_without_tunnelling_and_j3_zero() {
        let op = x_hamiltonian(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 0.6).unwrap();
        assert!(op.is_diagonal());
        let b = op.basis().clone();
        for occ in [&[][..], &["1"][..], &["2"][..], &["3"][..], &["1", "2"][..]] {
            assert!(residual(&op, &b.charge_vector(occ).unwrap(), -0.3) < 1e-15);
        }
        let (_, l2) = x_states(c(1.0, 0.0), c(0.5, 0.5), c(0.0, 0.0));
        let expect = -b.charge_vector(&["3"]).unwrap();
        assert!((l2 - expect).norm() < 1e-15);
    }

    #[test]
    fn joint_amplitudes() {
        let z = c(0.0, 0.0);
        let (ja, _) = joint_tunneling_amplitudes(z, c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), 2.0).unwrap();
        assert_eq!(ja, z);
        let (ja, _) = joint_tunneling_amplitudes(c(1.0, 0.0), c(1.0, 0.0), z, z, 4.0).unwrap();
        assert!((ja - c(1.0, 0.0)).norm() < 1e-15);
        let (ja, jb) = joint_tunneling_amplitudes(c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0), 8.0).unwrap();
        assert!((ja - c(0.0, -0.5)).norm() < 1e-15);
        assert!((jb - c(1.0, 0.0)).norm() < 1e-15);
        assert!(joint_tunneling_amplitudes(z, z, z, z, 0.0).is_err());
    }

    fn cz_states(ja: C64, jb: C64) -> [CVector; 4] {
        let b = Basis::boxes(BlockKind::CzBlock.boxes());
        let anc = ["0'", "2'"];
        let with = |logical: &[&str], ancilla: &[&str]| {
            let occ: Vec<&str> = logical.iter().chain(ancilla.iter()).copied().collect();
            b.charge_vector(&occ).unwrap()
        };
        let l00 = with(&[], &anc);
        let l01 = with(&["1'"], &anc);
        let l11 = with(&["1", "1'"], &anc);
        let l10 = with(&["1"], &anc) * jb.conj() - with(&["1'"], &["0'", "2"]) * ja.conj();
        [l00, l01, normalized(l10), l11]
    }

    #[test]
    fn cz_block_degenerate_states() {
        let (ja, jb, h) = (c(1.0, 0.0), c(1.0, 1.0), 0.3);
        let op = cz_hamiltonian(ja, jb, h).unwrap();
        for v in cz_states(ja, jb) {
            assert!(residual(&op, &v, -h) < 1e-12);
        }
        let op = cz_hamiltonian(c(0.0, 0.0), c(0.0, 0.0), h).unwrap();
        for v in cz_states(c(0.0, 0.0), c(1.0, 0.0)) {
            assert!(residual(&op, &v, -h) < 1e-12);
        }
    }

    #[test]
    fn cz_block_lambda10_with_jb_zero() {
        let b = Basis::boxes(BlockKind::CzBlock.boxes());
        let [_, _, l10, _] = cz_states(c(0.6, 0.0), c(0.0, 0.0));
        let dir = b.charge_vector(&["1'", "0'", "2"]).unwrap() * c(-1.0, 0.0);
        assert!((l10 - dir).norm() < 1e-15);
    }

    #[test]
    fn cz_block_conserves_triple_numbers() {
        let op = cz_hamiltonian(c(0.4, -0.2), c(1.0, 0.7), 0.3).unwrap();
        for triple in [["1", "0", "2"], ["1'", "0'", "2'"]] {
            let n = number_operator(op.basis(), &triple).unwrap();
            assert!(frobenius(&(op.matrix() * &n - &n * op.matrix())) < 1e-14);
        }
    }

    #[test]
    fn layout_validation() {
        assert!(BlockLayout::z_block(0.6).is_ok());
        let mut p = BTreeMap::new();
        p.insert("J1".to_string(), JunctionParams::new(1.0, 0.9, 0.0).unwrap());
        p.insert("J2".to_string(), JunctionParams::new(1.0, 0.6, 0.0).unwrap());
        assert!(matches!(BlockLayout::new(BlockKind::ZBlock, &p, None), Err(HoloError::Layout(_))));
        p.insert("J1".to_string(), JunctionParams::symmetric(0.0));
        p.insert("J3".to_string(), JunctionParams::symmetric(0.0));
        assert!(BlockLayout::new(BlockKind::ZBlock, &p, None).is_err());
        assert!(BlockLayout::cz_block(0.6, 0.6, 0.0).is_err());
        assert!(BlockLayout::x_block(0.5, 0.3).is_ok());
    }

    #[test]
    fn controls_validation() {
        let c = ControlSettings::from_gate_charge([("J1", 0.0), ("J2", 0.0)], 2.0, 0.6);
        assert!((c.h - 0.4).abs() < 1e-15);
        assert!(c.validate().is_ok());
        let mut bad = c.clone();
        bad.h = 0.5;
        assert!(bad.validate().is_err());
        let layout = BlockLayout::z_block(0.6).unwrap();
        let missing = ControlSettings::new([("J1", 0.0)], 0.1);
        assert!(layout.hamiltonian(&missing).is_err());
    }

    #[test]
    fn all_junctions_off_gives_diagonal_operator() {
        let z = BlockLayout::z_block(1.0).unwrap();
        let ctl = ControlSettings::new([("J1", FRAC_PI_2), ("J2", FRAC_PI_2)], 0.3);
        assert!(z.hamiltonian(&ctl).unwrap().is_diagonal());
        let x = BlockLayout::new(
            BlockKind::XBlock,
            &[("J1", 1.0), ("J2", 1.0), ("J3", 1.0)]
                .iter()
                .map(|&(k, g)| (k.to_string(), JunctionParams::new(1.0, g, 0.0).unwrap()))
                .collect(),
            None,
        )
        .unwrap();
        let ctl = ControlSettings::new([("J1", FRAC_PI_2), ("J2", -FRAC_PI_2), ("J3", FRAC_PI_2)], 0.3);
        assert!(x.hamiltonian(&ctl).unwrap().is_diagonal());
    }

    #[test]
    fn layout_hamiltonian_matches_direct_assembly() {
        let layout = BlockLayout::cz_block(0.6, 0.6, 4.0).unwrap();
        let ctl = ControlSettings::new([("J1", 0.4), ("J2", 0.9), ("J1'", 0.0), ("J2'", 0.0)], 0.3);
        let js = layout.couplings(&ctl).unwrap();
        let (ja, jb) = joint_tunneling_amplitudes(js["J1"], js["J1'"], js["J2"], js["J2'"], 4.0).unwrap();
        let direct = cz_hamiltonian(ja, jb, 0.3).unwrap();
        assert!(frobenius(&(layout.hamiltonian(&ctl).unwrap().matrix() - direct.matrix())) < 1e-15);
        // |J2'(0)| equals |J1'(0)| in the reference CZ layout
        assert!((js["J2'"].norm() - js["J1'"].norm()).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(m, Basis::Prototype(1)), Err(HoloError::NonHermitian(_))));
    }
}
