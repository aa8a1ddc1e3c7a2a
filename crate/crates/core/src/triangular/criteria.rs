use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deficit::{deficit_raw, DeficitRecord};
use super::minimize::{minimize_deficit, MinimizeOptions};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::rng::{fork, substream};
use crate::semimetrics::WedgeOperatorQ;
use crate::wedge::{haar_orthonormal_triple, wedge, StateVector, IDENTITY_TOL, STRUCTURE_TOL};
use crate::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SufficientSpectral,
    SubspaceSampling,
    TripleSampling,
    ClosedFormN3,
    Minimizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedTriangular,
    CertifiedNot,
    Inconclusive,
}

/// Outcome of one triangularity test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub method: Method,
    pub verdict: Verdict,
    pub worst: Option<DeficitRecord>,
    pub samples: usize,
    pub tolerance: f64,
}

impl CriterionReport {
    /// `CertifiedNot` when the worst record re-verifies below `-tolerance`,
    /// otherwise `Inconclusive`.
    fn from_worst(q: &WedgeOperatorQ, method: Method, worst: Option<DeficitRecord>, samples: usize, tol: f64) -> Result<Self> {
        let verdict = match &worst {
            Some(rec) if rec.deficit < -tol && rec.reverify(q)? < -tol => Verdict::CertifiedNot,
            _ => Verdict::Inconclusive,
        };
        Ok(Self { method, verdict, worst, samples, tolerance: tol })
    }
}

fn check_orthonormal(ws: &[&StateVector]) -> Result<()> {
    let mut overlap: f64 = 0.0;
    for a in 0..ws.len() {
        for b in a + 1..ws.len() {
            overlap = overlap.max(ws[a].overlap(ws[b]));
        }
    }
    if overlap >= STRUCTURE_TOL {
        return Err(Error::NotOrthonormal { overlap });
    }
    Ok(())
}

/// The compression of `Q` to `Λ²(span(w1, w2, w3))` in the ordered basis
/// `(w1∧w2, w1∧w3, w2∧w3)`.
pub fn restriction(q: &WedgeOperatorQ, w1: &StateVector, w2: &StateVector, w3: &StateVector) -> Result<HermitianMatrix> {
    for w in [w1, w2, w3] {
        if w.dim() != q.n() {
            return Err(Error::DimensionMismatch { expected: q.n(), found: w.dim() });
        }
    }
    check_orthonormal(&[w1, w2, w3])?;
    let cols = [
        wedge(w1.as_vector(), w2.as_vector())?.into_coords(),
        wedge(w1.as_vector(), w3.as_vector())?.into_coords(),
        wedge(w2.as_vector(), w3.as_vector())?.into_coords(),
    ];
    q.q().congruence(&CMatrix::from_columns(&cols))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion3d {
    /// `λ1 ≥ λ2 ≥ λ3 ≥ 0`.
    pub eigenvalues: [f64; 3],
    pub holds: bool,
}

/// For a PSD 3×3 `F` with eigenvalues `λ1 ≥ λ2 ≥ λ3`, holds iff
/// `√λ2 + √λ3 ≥ √λ1 - 1e-12`.
pub fn check_3d_criterion(f: &HermitianMatrix) -> Result<Criterion3d> {
    if f.size() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: f.size() });
    }
    f.check_psd()?;
    let ev = f.eigenvalues();
    let l = [ev[0].max(0.0), ev[1].max(0.0), ev[2].max(0.0)];
    let holds = l[1].sqrt() + l[2].sqrt() >= l[0].sqrt() - IDENTITY_TOL;
    Ok(Criterion3d { eigenvalues: l, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientCertificate {
    /// Eigenvalues of `E`, descending.
    pub sigma: Vec<f64>,
    pub certified: bool,
}

/// Spectral test `σ_{m-1} + σ_m ≥ σ_1`; a pass certifies triangularity.
pub fn sufficient_condition(q: &WedgeOperatorQ) -> SufficientCertificate {
    let sigma = q.e_eigenvalues();
    let m = sigma.len();
    let certified = m < 2 || sigma[m - 2] + sigma[m - 1] >= sigma[0] - IDENTITY_TOL;
    SufficientCertificate { sigma, certified }
}

/// True certifies that `Q` is triangular; false is inconclusive.
pub fn certify_sufficient(q: &WedgeOperatorQ) -> bool {
    sufficient_condition(q).certified
}

pub fn sufficient_report(q: &WedgeOperatorQ, tol: f64) -> CriterionReport {
    let verdict = if certify_sufficient(q) { Verdict::CertifiedTriangular } else { Verdict::Inconclusive };
    CriterionReport { method: Method::SufficientSpectral, verdict, worst: None, samples: 0, tolerance: tol }
}

fn record_from(q: &WedgeOperatorQ, v: [CVector; 3]) -> Result<DeficitRecord> {
    let [x, y, z] = v;
    DeficitRecord::evaluate(q, StateVector::normalized(x)?, StateVector::normalized(y)?, StateVector::normalized(z)?)
}

fn min_by_index<T: Send>(items: impl ParallelIterator<Item = (usize, f64, T)>) -> Option<(usize, f64, T)> {
    items.min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

/// Evaluates the deficit on `count` Haar-random orthonormal triples.
pub fn sample_triples_test<R: Rng + ?Sized>(q: &WedgeOperatorQ, count: usize, rng: &mut R, tol: f64) -> Result<CriterionReport> {
    let n = q.n();
    if n < 3 {
        return Err(Error::DimensionTooSmall { min: 3, found: n });
    }
    let seed = fork(rng);
    let best = min_by_index((0..count).into_par_iter().map(|i| {
        let [x, y, z] = haar_orthonormal_triple(n, &mut substream(seed, &[i as u64])).expect("n >= 3");
        let f = deficit_raw(q, &x, &y, &z).expect("dimensions match");
        (i, f, [x, y, z])
    }));
    let worst = best.map(|(_, _, v)| record_from(q, v)).transpose()?;
    CriterionReport::from_worst(q, Method::TripleSampling, worst, count, tol)
}

/// The vector orthogonal to the plane of a bivector of a 3-dimensional space,
/// given its coordinates `(c12, c13, c23)` relative to an orthonormal basis.
fn plane_normal(c: &[Complex64], w: &[&CVector; 3]) -> CVector {
    let k = [c[2].conj(), -c[1].conj(), c[0].conj()];
    w[0] * k[0] + w[1] * k[1] + w[2] * k[2]
}

/// The triple attaining `√λ2 + √λ3 - √λ1` inside `span(w)`: with `u_k` the
/// normal of the plane of the `k`-th eigen-bivector of the restriction,
/// returns `(u2, u3, u1)`.
fn restriction_witness(f: &HermitianMatrix, w: &[&CVector; 3]) -> [CVector; 3] {
    let eig = f.eigh();
    let u = |k: usize| {
        let col: Vec<Complex64> = eig.vectors.column(k).iter().copied().collect();
        plane_normal(&col, w)
    };
    [u(1), u(2), u(0)]
}

/// Draws `count` Haar-random 3-dimensional subspaces, applies the
/// restriction criterion to each and, where it fails, builds the violating
/// triple from the eigen-bivectors of the restriction.
pub fn sample_subspaces_test<R: Rng + ?Sized>(q: &WedgeOperatorQ, count: usize, rng: &mut R, tol: f64) -> Result<CriterionReport> {
    let n = q.n();
    if n < 3 {
        return Err(Error::DimensionTooSmall { min: 3, found: n });
    }
    let seed = fork(rng);
    let results: Vec<Result<(usize, f64, [CVector; 3])>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let ws = haar_orthonormal_triple(n, &mut substream(seed, &[i as u64])).expect("n >= 3");
            let states: Vec<StateVector> = ws.iter().map(|w| StateVector::normalized(w.clone())).collect::<Result<_>>()?;
            let f = restriction(q, &states[0], &states[1], &states[2])?;
            let l = check_3d_criterion(&f)?.eigenvalues;
            let margin = l[1].sqrt() + l[2].sqrt() - l[0].sqrt();
            Ok((i, margin, restriction_witness(&f, &[&ws[0], &ws[1], &ws[2]])))
        })
        .collect();
    let mut best: Option<(usize, f64, [CVector; 3])> = None;
    for r in results {
        let item = r?;
        if best.as_ref().is_none_or(|b| item.1 < b.1) {
            best = Some(item);
        }
    }
    let worst = best.map(|(_, _, v)| record_from(q, v)).transpose()?;
    CriterionReport::from_worst(q, Method::SubspaceSampling, worst, count, tol)
}

/// Runs [`minimize_deficit`] and reports its best record.
pub fn minimizer_report<R: Rng + ?Sized>(q: &WedgeOperatorQ, opts: &MinimizeOptions, rng: &mut R, tol: f64) -> Result<CriterionReport> {
    let rec = minimize_deficit(q, opts, rng)?;
    let samples = opts.restarts;
    CriterionReport::from_worst(q, Method::Minimizer, Some(rec), samples, tol)
}

/// Exact answer for `n = 3` diagonal operators: triangular iff the largest
/// label is at most the sum of the other two; otherwise the witness is the
/// basis triple attaining the minimum.
pub fn closed_form_report(q: &WedgeOperatorQ, tol: f64) -> Result<CriterionReport> {
    let diag = q.diagonal().ok_or(Error::NotDiagonalForm)?;
    if q.n() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: q.n() });
    }
    let d = diag.dmat();
    // Labels are indexed by the basis vector they omit: the pair (i, j) has
    // the complementary index 3 - i - j.
    let mut by_missing = [(d.get(1, 2), 0usize), (d.get(0, 2), 1), (d.get(0, 1), 2)];
    by_missing.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mu = super::cone::mu_closed_form_n3(d.get(0, 1), d.get(0, 2), d.get(1, 2))?;
    let u = |k: usize| diag.basis().column(k).into_owned();
    // The largest label belongs to the pair {x, y}; z is the vector it omits.
    let k = by_missing[0].1;
    let (i, j) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let rec = record_from(q, [u(i), u(j), u(k)])?;
    let verdict = if mu >= 0.0 {
        Verdict::CertifiedTriangular
    } else if rec.reverify(q)? < -tol {
        Verdict::CertifiedNot
    } else {
        Verdict::Inconclusive
    };
    Ok(CriterionReport { method: Method::ClosedFormN3, verdict, worst: Some(rec), samples: 1, tolerance: tol })
}
