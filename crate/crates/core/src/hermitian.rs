use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wedge::STRUCTURE_TOL;
use crate::{CMatrix, CVector};

/// A complex Hermitian `k × k` matrix.
///
/// Construction checks `max |A - A*| ≤ 1e-10 (1 + max |A|)` and then stores the
/// Hermitian part `(A + A*)/2`, so spectral routines never see round-off
/// asymmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRows", into = "MatrixRows")]
pub struct HermitianMatrix {
    m: CMatrix,
}

/// Eigendecomposition with eigenvalues sorted in descending order; column `k`
/// of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let adj = m.adjoint();
        let deviation = (&m - &adj).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if deviation > STRUCTURE_TOL * (1.0 + scale) || !deviation.is_finite() {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { m: (m + adj) * Complex64::new(0.5, 0.0) })
    }

    /// Like [`HermitianMatrix::new`] and additionally requires
    /// `λ_min ≥ -1e-10 (λ_max + 1)`.
    pub fn new_psd(m: CMatrix) -> Result<Self> {
        let h = Self::new(m)?;
        h.check_psd()?;
        Ok(h)
    }

    pub fn identity(k: usize) -> Self {
        Self { m: CMatrix::identity(k, k) }
    }

    pub fn zeros(k: usize) -> Self {
        Self { m: CMatrix::zeros(k, k) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&d| Complex64::new(d, 0.0)));
        Self { m: CMatrix::from_diagonal(&v) }
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigh(&self) -> Eigh {
        let k = self.size();
        if k == 0 {
            return Eigh { values: Vec::new(), vectors: CMatrix::zeros(0, 0) };
        }
        let eig = SymmetricEigen::new(self.m.clone());
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
        Eigh { values, vectors }
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().values
    }

    pub fn check_psd(&self) -> Result<()> {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(&max), Some(&min)) if min < -STRUCTURE_TOL * (max.max(0.0) + 1.0) => {
                Err(Error::NotPositiveSemidefinite { min_eigenvalue: min })
            }
            _ => Ok(()),
        }
    }

    pub fn is_psd(&self) -> bool {
        self.check_psd().is_ok()
    }

    /// `Re ⟨v, A v⟩`.
    pub fn quadratic_form(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.m * v)).re
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), found: other.size() });
        }
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn scale(&self, factor: f64) -> HermitianMatrix {
        Self { m: &self.m * Complex64::new(factor, 0.0) }
    }

    /// `B* A B`, Hermitian by construction.
    pub fn congruence(&self, b: &CMatrix) -> Result<HermitianMatrix> {
        if b.nrows() != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), found: b.nrows() });
        }
        let m = b.adjoint() * &self.m * b;
        let adj = m.adjoint();
        Ok(Self { m: (m + adj) * Complex64::new(0.5, 0.0) })
    }
}

/// Row-major JSON form: a list of rows, each a list of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(transparent)]
pub(crate) struct MatrixRows(pub Vec<Vec<Complex64>>);

impl From<&CMatrix> for MatrixRows {
    fn from(m: &CMatrix) -> Self {
        MatrixRows((0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect())
    }
}

impl TryFrom<MatrixRows> for CMatrix {
    type Error = Error;

    fn try_from(rows: MatrixRows) -> Result<Self> {
        let r = rows.0.len();
        let c = rows.0.first().map_or(0, |row| row.len());
        if let Some(bad) = rows.0.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, found: bad.len() });
        }
        Ok(CMatrix::from_fn(r, c, |i, j| rows.0[i][j]))
    }
}

impl TryFrom<MatrixRows> for HermitianMatrix {
    type Error = Error;

    fn try_from(rows: MatrixRows) -> Result<Self> {
        HermitianMatrix::new(CMatrix::try_from(rows)?)
    }
}

impl From<HermitianMatrix> for MatrixRows {
    fn from(h: HermitianMatrix) -> Self {
        MatrixRows::from(&h.m)
    }
}
