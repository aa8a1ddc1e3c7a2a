use crate::distmat::DistanceMatrix;
use crate::error::{Error, Result};
use crate::semimetrics::WedgeOperatorQ;
use crate::wedge::{compound2, unitary_deviation, STRUCTURE_TOL};
use crate::CMatrix;

fn check_labels(d: [f64; 3]) -> Result<[f64; 3]> {
    let names = [(0, 1), (0, 2), (1, 2)];
    for (v, (i, j)) in d.iter().zip(names) {
        if !(*v >= 0.0) {
            return Err(Error::NegativeEntry { i, j, value: *v });
        }
    }
    let mut s = d;
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Minimum of the deficit for an `n = 3` diagonal operator with labels
/// `d12, d13, d23` (in any order): `min(0, d_a + d_b - d_max)`.
pub fn mu_closed_form_n3(d12: f64, d13: f64, d23: f64) -> Result<f64> {
    let [a, b, c] = check_labels([d12, d13, d23])?;
    Ok((a + b - c).min(0.0))
}

/// For triangular `n = 3` labels: true iff the largest equals the sum of the
/// other two and is positive.
pub fn extreme_ray_n3(d12: f64, d13: f64, d23: f64) -> Result<bool> {
    let [a, b, c] = check_labels([d12, d13, d23])?;
    Ok(c > 0.0 && (c - (a + b)).abs() <= 1e-12)
}

/// `Q1 + Q2`, i.e. `E = √(E1² + E2²)`. The result keeps a diagonal form when
/// both inputs are diagonal in the same basis.
pub fn cone_combine(q1: &WedgeOperatorQ, q2: &WedgeOperatorQ) -> Result<WedgeOperatorQ> {
    if q1.n() != q2.n() {
        return Err(Error::DimensionMismatch { expected: q1.n(), found: q2.n() });
    }
    let q = q1.q().add(q2.q())?;
    let diagonal = match (q1.diagonal(), q2.diagonal()) {
        (Some(a), Some(b)) if (a.basis() - b.basis()).norm() <= 1e-12 => {
            let upper: Vec<f64> = a
                .dmat()
                .upper()
                .iter()
                .zip(b.dmat().upper())
                .map(|(x, y)| (x * x + y * y).sqrt())
                .collect();
            let dmat = DistanceMatrix::from_upper(q1.n(), &upper)?;
            Some(WedgeOperatorQ::diagonal_form(a.basis().clone(), dmat))
        }
        _ => None,
    };
    Ok(WedgeOperatorQ::with_parts(q1.n(), q, diagonal))
}

/// `Q^U = C₂(U)* Q C₂(U)`, so that `d_{Q^U}(x, y) = d_Q(Ux, Uy)`.
pub fn conjugate_local(q: &WedgeOperatorQ, u: &CMatrix) -> Result<WedgeOperatorQ> {
    let (rows, cols) = u.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows != q.n() {
        return Err(Error::DimensionMismatch { expected: q.n(), found: rows });
    }
    let deviation = unitary_deviation(u);
    if deviation > STRUCTURE_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let conj = q.q().congruence(&compound2(u)?)?;
    let diagonal = q
        .diagonal()
        .map(|d| WedgeOperatorQ::diagonal_form(u.ad_mul(d.basis()), d.dmat().clone()));
    Ok(WedgeOperatorQ::with_parts(q.n(), conj, diagonal))
}

/// Exchanges the eigenvalues of the wedge eigenvectors `u_i∧u_j` and
/// `u_k∧u_l` of a diagonal operator. Pairs are 0-based and unordered.
pub fn permute_wedge_basis(q: &WedgeOperatorQ, a: (usize, usize), b: (usize, usize)) -> Result<WedgeOperatorQ> {
    let diag = q.diagonal().ok_or(Error::NotDiagonalForm)?;
    let n = q.n();
    for (i, j) in [a, b] {
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidPair { i, j, n });
        }
    }
    let mut d = diag.dmat().matrix().clone();
    let (da, db) = (d[a], d[b]);
    for ((i, j), v) in [(a, db), (b, da)] {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    WedgeOperatorQ::from_diagonal(DistanceMatrix::new(d)?, diag.basis().clone())
}
