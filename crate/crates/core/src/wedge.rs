//! Linear algebra on `C^n` and its second exterior power.
//!
//! Bivectors are stored in the flat pair basis `e_i ∧ e_j`, `i < j`, in
//! lexicographic order `(0,1), (0,2), …, (0,n-1), (1,2), …`. The coordinate at
//! pair `(i,j)` of `x ∧ y` is `x_i y_j - x_j y_i`, with no `1/√2` factor, so the
//! basis `{e_i ∧ e_j}` is orthonormal in flat coordinates and
//! `‖x ∧ y‖² = ‖x‖²‖y‖² - |⟨x,y⟩|²` holds exactly.
//!
//! For `n = 3` a bivector can be read as the cross product of its factors;
//! no separate cross-product API is exposed.
//!
//! Inner products are conjugate-linear in the first argument:
//! `⟨a, b⟩ = Σ conj(a_i) b_i`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Tolerance for identities that should hold to double precision.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for structural checks (Hermitian, unitary, PSD).
pub const STRUCTURE_TOL: f64 = 1e-10;

const GS_RANK_TOL: f64 = 1e-10;

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

fn check_same_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A unit vector of `C^n` standing for a pure state, i.e. a point of the
/// projective space. Equality ignores the global phase.
#[derive(Debug, Clone)]
pub struct StateVector(CVector);

impl StateVector {
    /// Wraps `entries`, which must already have unit norm (within 1e-12).
    pub fn new(entries: CVector) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: entries.len() });
        }
        let norm = entries.norm();
        if (norm - 1.0).abs() > IDENTITY_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(entries))
    }

    /// Normalizes `entries`; fails on a (numerically) zero vector.
    pub fn normalized(entries: CVector) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: entries.len() });
        }
        let norm = entries.norm();
        if !(norm > f64::MIN_POSITIVE) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(entries.unscale(norm)))
    }

    /// The standard basis vector `e_i` of `C^n`.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::DimensionMismatch { expected: n, found: i + 1 });
        }
        let mut v = CVector::zeros(n);
        v[i] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_inner(self) -> CVector {
        self.0
    }

    /// `|⟨self, other⟩|`, the modulus of the overlap.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        inner(&self.0, &other.0).norm()
    }

    /// True when both vectors represent the same ray, i.e. `|⟨x,y⟩| ≥ 1 - tol`.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> bool {
        self.dim() == other.dim() && self.overlap(other) >= 1.0 - tol
    }
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.same_ray(other, IDENTITY_TOL)
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Complex64>::deserialize(d)?;
        StateVector::normalized(CVector::from_vec(raw)).map_err(serde::de::Error::custom)
    }
}

/// Bijection between pairs `(i, j)`, `i < j < n`, and flat indices `0..n(n-1)/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndexMap {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndexMap {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: n });
        }
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Ok(Self { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n(n-1)/2`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Flat index of `(i, j)` with `i < j < n`.
    pub fn flat(&self, i: usize, j: usize) -> Option<usize> {
        (i < j && j < self.n).then(|| flat_index(self.n, i, j))
    }

    pub fn pair(&self, k: usize) -> Option<(usize, usize)> {
        self.pairs.get(k).copied()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// `n(n-1)/2`.
#[inline]
pub fn wedge_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[inline]
pub(crate) fn flat_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Element of `Λ²(C^n)` in flat pair coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector {
    n: usize,
    coords: CVector,
}

impl Bivector {
    pub fn zeros(n: usize) -> Self {
        Self { n, coords: CVector::zeros(wedge_dim(n)) }
    }

    pub fn from_coords(n: usize, coords: CVector) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: n });
        }
        check_same_len(wedge_dim(n), coords.len())?;
        Ok(Self { n, coords })
    }

    /// Dimension of the underlying space `C^n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &CVector {
        &self.coords
    }

    pub fn into_coords(self) -> CVector {
        self.coords
    }

    /// Coordinate at pair `(i, j)`, `i < j`.
    pub fn get(&self, i: usize, j: usize) -> Option<Complex64> {
        (i < j && j < self.n).then(|| self.coords[flat_index(self.n, i, j)])
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coords.norm_squared()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Bivector) -> Complex64 {
        self.coords.dotc(&other.coords)
    }

    /// The antisymmetric `n × n` matrix `M` with `M_ij = c_ij` for `i < j`.
    pub fn to_antisymmetric(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                m[(i, j)] = self.coords[k];
                m[(j, i)] = -self.coords[k];
                k += 1;
            }
        }
        m
    }
}

/// `x ∧ y` in flat pair coordinates.
pub fn wedge(x: &CVector, y: &CVector) -> Result<Bivector> {
    check_same_len(x.len(), y.len())?;
    let n = x.len();
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: n });
    }
    let mut coords = CVector::zeros(wedge_dim(n));
    wedge_into(x.as_slice(), y.as_slice(), coords.as_mut_slice());
    Ok(Bivector { n, coords })
}

/// Writes the flat coordinates of `x ∧ y` into `out` (length `n(n-1)/2`).
#[inline]
pub(crate) fn wedge_into(x: &[Complex64], y: &[Complex64], out: &mut [Complex64]) {
    let n = x.len();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            out[k] = x[i] * y[j] - x[j] * y[i];
            k += 1;
        }
    }
}

/// Orthonormalizes `vectors` with classical Gram-Schmidt, run twice per vector.
///
/// Fails with [`Error::RankDeficient`] naming the first vector whose residual
/// after projection is at most `1e-10` (relative to its own norm when that
/// exceeds 1).
pub fn gram_schmidt(vectors: &[CVector]) -> Result<Vec<CVector>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    if vectors.len() > n {
        return Err(Error::RankDeficient { index: n });
    }
    let mut out: Vec<CVector> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        check_same_len(n, v.len())?;
        let scale = v.norm().max(1.0);
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = inner(q, &w);
                w.axpy(-c, q, Complex64::new(1.0, 0.0));
            }
        }
        let norm = w.norm();
        if !(norm > GS_RANK_TOL * scale) {
            return Err(Error::RankDeficient { index });
        }
        out.push(w.unscale(norm));
    }
    Ok(out)
}

/// Standard complex Gaussian vector (real and imaginary parts `N(0,1)`).
pub fn complex_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Haar-distributed unit vector: a normalized standard complex Gaussian.
pub fn haar_random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: n });
    }
    loop {
        let g = complex_gaussian(n, rng);
        let norm = g.norm();
        if norm > 1e-150 {
            return Ok(StateVector(g.unscale(norm)));
        }
    }
}

/// Three Haar vectors orthonormalized by Gram-Schmidt.
pub fn haar_orthonormal_triple<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<[CVector; 3]> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { min: 3, found: n });
    }
    loop {
        let raw = [complex_gaussian(n, rng), complex_gaussian(n, rng), complex_gaussian(n, rng)];
        if let Ok(mut q) = gram_schmidt(&raw) {
            let z = q.pop().unwrap();
            let y = q.pop().unwrap();
            let x = q.pop().unwrap();
            return Ok([x, y, z]);
        }
    }
}

/// Haar-distributed unitary from Gram-Schmidt on a complex Ginibre matrix.
pub fn haar_random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    if n < 1 {
        return Err(Error::DimensionTooSmall { min: 1, found: n });
    }
    loop {
        let cols: Vec<CVector> = (0..n).map(|_| complex_gaussian(n, rng)).collect();
        if let Ok(q) = gram_schmidt(&cols) {
            return Ok(CMatrix::from_columns(&q));
        }
    }
}

/// `max |U*U - I|` entrywise.
pub fn unitary_deviation(u: &CMatrix) -> f64 {
    let k = u.ncols();
    let g = u.adjoint() * u;
    let id = CMatrix::identity(k, k);
    (g - id).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// The second compound matrix: entry `((i,j),(p,q))` is the 2×2 minor
/// `a_ip a_jq - a_iq a_jp`. It represents `A ∧ A` on the pair basis.
pub fn compound2(a: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: n });
    }
    let pairs = PairIndexMap::new(n)?;
    let m = pairs.len();
    Ok(DMatrix::from_fn(m, m, |r, c| {
        let (i, j) = pairs.pairs[r];
        let (p, q) = pairs.pairs[c];
        a[(i, p)] * a[(j, q)] - a[(i, q)] * a[(j, p)]
    }))
}

/// `(a ∧ b)^∨(y) = ⟨y, b⟩ a - ⟨y, a⟩ b`, anti-linear in `y`.
pub fn vee_apply(a: &CVector, b: &CVector, y: &CVector) -> Result<CVector> {
    check_same_len(a.len(), b.len())?;
    check_same_len(a.len(), y.len())?;
    Ok(a * inner(y, b) - b * inner(y, a))
}

/// The anti-linear map `C^∨` defined by `⟨C^∨(y), x⟩ = ⟨C, x ∧ y⟩`.
///
/// In coordinates `C^∨(y) = M ȳ` where `M` is the antisymmetric matrix of `C`.
pub fn bivector_vee(c: &Bivector, y: &CVector) -> Result<CVector> {
    check_same_len(c.n, y.len())?;
    let mut out = CVector::zeros(c.n);
    vee_into(c.n, c.coords.as_slice(), y.as_slice(), out.as_mut_slice());
    Ok(out)
}

#[inline]
pub(crate) fn vee_into(n: usize, c: &[Complex64], y: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let cij = c[k];
            out[i] += cij * y[j].conj();
            out[j] -= cij * y[i].conj();
            k += 1;
        }
    }
}

impl fmt::Display for Bivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut k = 0;
        write!(f, "[")?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if k > 0 {
                    write!(f, ", ")?;
                }
                let c = self.coords[k];
                write!(f, "({},{}): {}{:+}i", i + 1, j + 1, c.re, c.im)?;
                k += 1;
            }
        }
        write!(f, "]")
    }
}

/// Builds a complex vector from real parts.
pub fn real_vector(values: &[f64]) -> CVector {
    DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)))
}
