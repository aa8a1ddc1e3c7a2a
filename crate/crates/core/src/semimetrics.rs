//! Semi-distances on projective space induced by PSD operators on `Λ²(C^n)`.
//!
//! An operator is stored as `Q = E*E` so that `d_E(x, y) = ‖E (x ∧ y)‖ =
//! √⟨Q (x∧y), x∧y⟩`. Operators that are diagonal in a wedge basis
//! `{u_i ∧ u_j}` additionally carry the unitary `U = [u_1 … u_n]` and the
//! matrix of eigenvalue labels `d_ij`, which gives the fast evaluation
//! `d_E(x,y)² = Σ_{i<j} d_ij² |x'_i y'_j - x'_j y'_i|²` with `x' = U* x`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distmat::DistanceMatrix;
use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, MatrixRows};
use crate::wedge::{compound2, inner, unitary_deviation, wedge_dim, wedge_into, StateVector, STRUCTURE_TOL};
use crate::{CMatrix, CVector};

/// Diagonal representation `Q (u_i ∧ u_j) = d_ij² u_i ∧ u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalForm {
    basis: CMatrix,
    dmat: DistanceMatrix,
    standard: bool,
}

impl DiagonalForm {
    /// Columns are the basis vectors `u_i`.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn dmat(&self) -> &DistanceMatrix {
        &self.dmat
    }

    /// True when the basis is the standard one.
    pub fn is_standard(&self) -> bool {
        self.standard
    }
}

/// Hermitian PSD operator `Q = E²` on `Λ²(C^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeOperatorQ {
    n: usize,
    q: HermitianMatrix,
    diagonal: Option<DiagonalForm>,
}

impl WedgeOperatorQ {
    /// Wraps `Q` directly; it must be PSD of size `n(n-1)/2`.
    pub fn from_q(n: usize, q: HermitianMatrix) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: n });
        }
        if q.size() != wedge_dim(n) {
            return Err(Error::DimensionMismatch { expected: wedge_dim(n), found: q.size() });
        }
        q.check_psd()?;
        Ok(Self { n, q, diagonal: None })
    }

    /// Forms `Q = E*E` from an arbitrary operator `E`.
    pub fn from_e(n: usize, e: &CMatrix) -> Result<Self> {
        let (rows, cols) = e.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        Self::from_q(n, HermitianMatrix::new(e.adjoint() * e)?)
    }

    /// Operator diagonal in the wedge basis of the unitary `basis`, with
    /// eigenvalues of `E` given by the entries of `dmat`.
    pub fn from_diagonal(dmat: DistanceMatrix, basis: CMatrix) -> Result<Self> {
        let n = dmat.n();
        if n < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: n });
        }
        let (rows, cols) = basis.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows != n {
            return Err(Error::DimensionMismatch { expected: n, found: rows });
        }
        let deviation = unitary_deviation(&basis);
        if deviation > STRUCTURE_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        let standard = basis == CMatrix::identity(n, n);
        let labels: Vec<f64> = dmat.upper().iter().map(|d| d * d).collect();
        let diag = HermitianMatrix::from_real_diagonal(&labels);
        let q = if standard { diag } else { diag.congruence(&compound2(&basis)?.adjoint())? };
        Ok(Self { n, q, diagonal: Some(DiagonalForm { basis, dmat, standard }) })
    }

    /// Diagonal in the standard wedge basis.
    pub fn standard_diagonal(dmat: DistanceMatrix) -> Self {
        let n = dmat.n();
        Self::from_diagonal(dmat, CMatrix::identity(n, n)).expect("identity basis is unitary")
    }

    /// `E = I`, inducing the Hilbert-Schmidt distance.
    pub fn identity(n: usize) -> Result<Self> {
        Ok(Self::standard_diagonal(DistanceMatrix::from_upper(n, &vec![1.0; wedge_dim(n)])?))
    }

    pub fn zero(n: usize) -> Result<Self> {
        Ok(Self::standard_diagonal(DistanceMatrix::from_upper(n, &vec![0.0; wedge_dim(n)])?))
    }

    pub(crate) fn with_parts(n: usize, q: HermitianMatrix, diagonal: Option<DiagonalForm>) -> Self {
        Self { n, q, diagonal }
    }

    pub(crate) fn diagonal_form(basis: CMatrix, dmat: DistanceMatrix) -> DiagonalForm {
        let standard = basis == CMatrix::identity(dmat.n(), dmat.n());
        DiagonalForm { basis, dmat, standard }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &HermitianMatrix {
        &self.q
    }

    pub fn diagonal(&self) -> Option<&DiagonalForm> {
        self.diagonal.as_ref()
    }

    /// Drops the diagonal form, forcing evaluation through the dense matrix.
    pub fn into_dense(self) -> Self {
        Self { diagonal: None, ..self }
    }

    /// Eigenvalues of `E = √Q`, descending.
    pub fn e_eigenvalues(&self) -> Vec<f64> {
        self.q.eigenvalues().into_iter().map(|v| v.max(0.0).sqrt()).collect()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found });
        }
        Ok(())
    }

    /// `⟨Q (x∧y), x∧y⟩` clamped at zero, using the diagonal form when present.
    pub(crate) fn quad(&self, x: &CVector, y: &CVector) -> f64 {
        match &self.diagonal {
            Some(diag) if diag.standard => diagonal_quad(&diag.dmat, x.as_slice(), y.as_slice()),
            Some(diag) => {
                let xs = diag.basis.ad_mul(x);
                let ys = diag.basis.ad_mul(y);
                diagonal_quad(&diag.dmat, xs.as_slice(), ys.as_slice())
            }
            None => self.dense_quad(x, y),
        }
    }

    /// `⟨Q (x∧y), x∧y⟩` through the dense matrix, ignoring any diagonal form.
    pub fn dense_quad(&self, x: &CVector, y: &CVector) -> f64 {
        let mut w = CVector::zeros(wedge_dim(self.n));
        wedge_into(x.as_slice(), y.as_slice(), w.as_mut_slice());
        self.q.quadratic_form(&w).max(0.0)
    }

    /// `‖E (x∧y)‖` for raw vectors of the right length.
    pub(crate) fn norm_of_wedge(&self, x: &CVector, y: &CVector) -> f64 {
        self.quad(x, y).sqrt()
    }
}

fn diagonal_quad(dmat: &DistanceMatrix, x: &[Complex64], y: &[Complex64]) -> f64 {
    let n = x.len();
    let d = dmat.matrix();
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dij = d[(i, j)];
            if dij != 0.0 {
                acc += dij * dij * (x[i] * y[j] - x[j] * y[i]).norm_sqr();
            }
        }
    }
    acc
}

/// `√(1 - |⟨x,y⟩|²)`, clamped to `[0, 1]`; equals `‖x ∧ y‖` for unit vectors.
pub fn hs_distance(x: &StateVector, y: &StateVector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    let o = inner(x.as_vector(), y.as_vector()).norm_sqr();
    Ok((1.0 - o).clamp(0.0, 1.0).sqrt())
}

/// `d_E(x, y) = √⟨Q (x∧y), x∧y⟩`.
pub fn semidistance(q: &WedgeOperatorQ, x: &StateVector, y: &StateVector) -> Result<f64> {
    q.check_dim(x.dim())?;
    q.check_dim(y.dim())?;
    Ok(q.norm_of_wedge(x.as_vector(), y.as_vector()))
}

/// `u ⊗ v` with index `a n + b ↦ u_a v_b`.
fn kron(u: &CVector, v: &CVector) -> CVector {
    let n = v.len();
    CVector::from_fn(u.len() * n, |k, _| u[k / n] * v[k % n])
}

/// Quantum cost matrix `C = Σ_{i<j} d_ij w_ij w_ij*` on `C^n ⊗ C^n`, with the
/// unit antisymmetric tensors `w_ij = (u_i⊗u_j - u_j⊗u_i)/√2`.
pub fn cost_matrix(d: &DistanceMatrix, basis: &CMatrix) -> Result<HermitianMatrix> {
    let n = d.n();
    if basis.nrows() != n || basis.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: basis.nrows() });
    }
    let mut c = CMatrix::zeros(n * n, n * n);
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for i in 0..n {
        let ui = basis.column(i).into_owned();
        for j in i + 1..n {
            let dij = d.get(i, j);
            if dij == 0.0 {
                continue;
            }
            let uj = basis.column(j).into_owned();
            let w = (kron(&ui, &uj) - kron(&uj, &ui)) * s;
            c += (&w * w.adjoint()) * Complex64::new(dij, 0.0);
        }
    }
    HermitianMatrix::new(c)
}

/// `tr[(xx* ⊗ yy*) C²]`, the transport cost of the product coupling, which
/// is the only coupling when both states are pure.
pub fn product_coupling_cost(c: &HermitianMatrix, x: &StateVector, y: &StateVector) -> Result<f64> {
    let xy = kron(x.as_vector(), y.as_vector());
    if xy.len() != c.size() {
        return Err(Error::DimensionMismatch { expected: c.size(), found: xy.len() });
    }
    Ok((c.matrix() * xy).norm_squared())
}

/// Pure-state transport value rescaled to coincide with the operator
/// semi-distance: `√(2 tr[(xx* ⊗ yy*) C²])`. The product state `x ⊗ y`
/// carries only half of `‖x ∧ y‖²` on the antisymmetric subspace.
pub fn pure_state_wasserstein(c: &HermitianMatrix, x: &StateVector, y: &StateVector) -> Result<f64> {
    Ok((2.0 * product_coupling_cost(c, x, y)?).sqrt())
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FormTag {
    Dense,
    Diagonal,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    n: usize,
    form: FormTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dmat: Option<DistanceMatrix>,
}

impl Serialize for WedgeOperatorQ {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = OperatorJson {
            n: self.n,
            form: if self.diagonal.is_some() { FormTag::Diagonal } else { FormTag::Dense },
            q: Some(MatrixRows::from(self.q.matrix())),
            basis: self.diagonal.as_ref().map(|d| MatrixRows::from(&d.basis)),
            dmat: self.diagonal.as_ref().map(|d| d.dmat.clone()),
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WedgeOperatorQ {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let json = OperatorJson::deserialize(d)?;
        let op = match json.form {
            FormTag::Dense => {
                let rows = json.q.ok_or_else(|| D::Error::missing_field("q"))?;
                let q = HermitianMatrix::try_from(rows).map_err(D::Error::custom)?;
                WedgeOperatorQ::from_q(json.n, q)
            }
            FormTag::Diagonal => {
                let dmat = json.dmat.ok_or_else(|| D::Error::missing_field("dmat"))?;
                let basis = match json.basis {
                    Some(rows) => CMatrix::try_from(rows).map_err(D::Error::custom)?,
                    None => CMatrix::identity(dmat.n(), dmat.n()),
                };
                if dmat.n() != json.n {
                    return Err(D::Error::custom(Error::DimensionMismatch { expected: json.n, found: dmat.n() }));
                }
                WedgeOperatorQ::from_diagonal(dmat, basis)
            }
        };
        op.map_err(D::Error::custom)
    }
}
