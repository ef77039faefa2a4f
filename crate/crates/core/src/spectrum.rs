//! Eigen-analysis of block Hamiltonians: full decomposition, detection of
//! the degenerate computational subspace, and the closed-form degenerate
//! bases of each block.

use crate::error::{HoloError, Result};
use crate::linalg::{orthonormalize, procrustes_align, projector, CMatrix, CVector, C64};
use crate::network::{Basis, BlockKind, HermitianOperator};

/// Relative width of the degeneracy window: `tol = DEGENERACY_REL_TOL ×
/// spectral range`.
pub const DEGENERACY_REL_TOL: f64 = 1e-9;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors as
/// the columns of `eigenvectors`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn spectral_range(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        let range = self.spectral_range();
        if range > 0.0 {
            DEGENERACY_REL_TOL * range
        } else {
            DEGENERACY_REL_TOL
        }
    }

    /// Orthonormal basis of all eigenvectors with `|λ − energy| ≤ tol`.
    pub fn subspace(&self, energy: f64, tol: f64) -> Result<SubspaceBasis> {
        let cols: Vec<CVector> = self
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| (l - energy).abs() <= tol)
            .map(|(k, _)| self.eigenvectors.column(k).into_owned())
            .collect();
        if cols.is_empty() {
            return Err(HoloError::NoSubspace { energy, tol });
        }
        Ok(SubspaceBasis {
            energy,
            vectors: CMatrix::from_columns(&cols),
            tolerance: tol,
        })
    }

    /// [`EigenSystem::subspace`] keeping only eigenvectors that live in the
    /// states flagged by `mask`.
    pub fn subspace_in(&self, energy: f64, tol: f64, mask: &[bool]) -> Result<SubspaceBasis> {
        let cols: Vec<CVector> = self
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| (l - energy).abs() <= tol)
            .map(|(k, _)| self.eigenvectors.column(k).into_owned())
            .filter(|v| {
                let inside: f64 = v.iter().zip(mask).filter(|(_, &m)| m).map(|(z, _)| z.norm_sqr()).sum();
                inside > 0.5
            })
            .collect();
        if cols.is_empty() {
            return Err(HoloError::NoSubspace { energy, tol });
        }
        Ok(SubspaceBasis {
            energy,
            vectors: CMatrix::from_columns(&cols),
            tolerance: tol,
        })
    }

    /// [`EigenSystem::gap`] restricted to eigenvectors with most of their
    /// weight inside `mask`. Levels of sectors the Hamiltonian never couples
    /// to cannot be reached and are ignored.
    pub fn gap_in(&self, energy: f64, tol: f64, mask: &[bool]) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let v = self.eigenvectors.column(*k);
                let inside: f64 = v.iter().zip(mask).filter(|(_, &m)| m).map(|(z, _)| z.norm_sqr()).sum();
                inside > 0.5
            })
            .map(|(_, l)| (l - energy).abs())
            .filter(|&d| d > tol)
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `energy` to the nearest eigenvalue outside the window
    /// `|λ − energy| ≤ tol`.
    pub fn gap(&self, energy: f64, tol: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| (l - energy).abs())
            .filter(|&d| d > tol)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Orthonormal basis (columns of `vectors`) of a degenerate eigenspace.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub energy: f64,
    pub vectors: CMatrix,
    pub tolerance: f64,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    pub fn projector(&self) -> CMatrix {
        projector(&self.vectors)
    }

    /// Frobenius distance between the projectors of two subspaces.
    pub fn projector_distance(&self, other: &SubspaceBasis) -> f64 {
        crate::linalg::frobenius(&(self.projector() - other.projector()))
    }

    /// Re-express the same span in the gauge closest to `reference`.
    pub fn aligned_to(&self, reference: &SubspaceBasis) -> Result<SubspaceBasis> {
        if reference.dim() != self.dim() {
            return Err(HoloError::Dimension(format!(
                "cannot align a {}-dimensional subspace to a {}-dimensional one",
                self.dim(),
                reference.dim()
            )));
        }
        Ok(SubspaceBasis {
            vectors: procrustes_align(&self.vectors, &reference.vectors, 1e-6)?,
            ..self.clone()
        })
    }

    /// Largest eigen-residual `‖(H − E) v‖` over the basis vectors.
    pub fn max_residual(&self, h: &HermitianOperator) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.vector(k);
                (h.apply(&v) - &v * C64::new(self.energy, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Connected components of the coupling graph of `m` (entries that are
/// exactly zero do not connect). Block-diagonalising along these components
/// is exact.
pub(crate) fn components(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)] != C64::new(0.0, 0.0) || m[(j, i)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// States connected to any of `seeds` through non-zero entries of `m`.
pub fn coupled_sector(m: &CMatrix, seeds: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; m.nrows()];
    for comp in components(m) {
        if comp.iter().any(|i| seeds.contains(i)) {
            comp.iter().for_each(|&i| mask[i] = true);
        }
    }
    mask
}

/// Eigen-decomposition of a Hermitian matrix given as a raw dense array.
/// The matrix is split into its decoupled blocks first and each block is
/// diagonalised separately.
pub fn eigendecompose_matrix(m: &CMatrix) -> EigenSystem {
    let n = m.nrows();
    let mut pairs: Vec<(f64, CVector)> = Vec::with_capacity(n);
    for comp in components(m) {
        if comp.len() == 1 {
            let i = comp[0];
            let mut v = CVector::zeros(n);
            v[i] = C64::new(1.0, 0.0);
            pairs.push((m[(i, i)].re, v));
            continue;
        }
        let k = comp.len();
        let sub = CMatrix::from_fn(k, k, |r, c| m[(comp[r], comp[c])]);
        let eig = sub.symmetric_eigen();
        for col in 0..k {
            let mut v = CVector::zeros(n);
            for (r, &i) in comp.iter().enumerate() {
                v[i] = eig.eigenvectors[(r, col)];
            }
            pairs.push((eig.eigenvalues[col], v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<CVector> = pairs.into_iter().map(|p| p.1).collect();
    EigenSystem {
        eigenvalues,
        eigenvectors: CMatrix::from_columns(&cols),
    }
}

pub fn eigendecompose(h: &HermitianOperator) -> EigenSystem {
    eigendecompose_matrix(h.matrix())
}

/// Orthonormal basis of the eigenspace within `tol` of `energy`.
pub fn degenerate_subspace(h: &HermitianOperator, energy: f64, tol: f64) -> Result<SubspaceBasis> {
    if !(tol > 0.0) {
        return Err(HoloError::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    eigendecompose(h).subspace(energy, tol)
}

/// [`degenerate_subspace`] with the default window `1e−9 × spectral range`.
pub fn degenerate_subspace_default(h: &HermitianOperator, energy: f64) -> Result<SubspaceBasis> {
    let es = eigendecompose(h);
    let tol = es.default_tolerance();
    es.subspace(energy, tol)
}

fn subspace_from(vectors: Vec<CVector>, energy: f64) -> SubspaceBasis {
    let raw = CMatrix::from_columns(&vectors);
    let vectors = orthonormalize(&raw, 0.0);
    SubspaceBasis {
        energy,
        vectors,
        tolerance: 0.0,
    }
}

fn unit(v: CVector) -> CVector {
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn require_nonzero(a: C64, b: C64, what: &str) -> Result<()> {
    if a.norm_sqr() + b.norm_sqr() == 0.0 {
        return Err(HoloError::Domain(format!("{what}: both couplings vanish, dark state undefined")));
    }
    Ok(())
}

/// Z-block degenerate pair at energy `−h/2`:
/// `|λ₁⟩ ∝ J₂*|010⟩ − J₁*|001⟩`, `|λ₂⟩ = |000⟩` (boxes 0, 1, 2).
pub fn analytic_z_subspace(j1: C64, j2: C64, h: f64) -> Result<SubspaceBasis> {
    require_nonzero(j1, j2, "analytic_z_subspace")?;
    let b = Basis::boxes(BlockKind::ZBlock.boxes());
    let l1 = unit(b.charge_vector(&["1"])? * j2.conj() - b.charge_vector(&["2"])? * j1.conj());
    let l2 = b.charge_vector(&[])?;
    Ok(subspace_from(vec![l1, l2], BlockKind::ZBlock.degenerate_energy(h)))
}

/// X-block degenerate pair at energy `−h/2`:
/// `|λ₁⟩ ∝ (J₂*|10⟩₁₂ − J₁*|01⟩₁₂)|00⟩₀₃`,
/// `|λ₂⟩ ∝ J₃*/(|J₁|²+|J₂|²) (J₁|10⟩₁₂ + J₂|01⟩₁₂)|00⟩₀₃ − |00⟩₁₂|01⟩₀₃`.
pub fn analytic_x_subspace(j1: C64, j2: C64, j3: C64, h: f64) -> Result<SubspaceBasis> {
    require_nonzero(j1, j2, "analytic_x_subspace")?;
    let b = Basis::boxes(BlockKind::XBlock.boxes());
    let s10 = b.charge_vector(&["1"])?;
    let s01 = b.charge_vector(&["2"])?;
    let s3 = b.charge_vector(&["3"])?;
    let l1 = unit(&s10 * j2.conj() - &s01 * j1.conj());
    let w = j3.conj() / (j1.norm_sqr() + j2.norm_sqr());
    let l2 = unit((&s10 * j1 + &s01 * j2) * w - s3);
    Ok(subspace_from(vec![l1, l2], BlockKind::XBlock.degenerate_energy(h)))
}

/// CZ-block degenerate quartet at energy `−h`, in the order
/// `(λ₀₀, λ₀₁, λ₁₀, λ₁₁)`; boxes (1, 1′, 0, 0′, 2, 2′).
pub fn analytic_cz_subspace(j_a: C64, j_b: C64, h: f64) -> Result<SubspaceBasis> {
    require_nonzero(j_a, j_b, "analytic_cz_subspace")?;
    let b = Basis::boxes(BlockKind::CzBlock.boxes());
    let l00 = b.charge_vector(&["0'", "2'"])?;
    let l01 = b.charge_vector(&["1'", "0'", "2'"])?;
    let l11 = b.charge_vector(&["1", "1'", "0'", "2'"])?;
    let l10 = unit(b.charge_vector(&["1", "0'", "2'"])? * j_b.conj() - b.charge_vector(&["1'", "0'", "2"])? * j_a.conj());
    Ok(subspace_from(vec![l00, l01, l10, l11], BlockKind::CzBlock.degenerate_energy(h)))
}
