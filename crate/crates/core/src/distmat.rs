//! Distance matrices: validation, construction from point clouds, snowflake
//! powers, Schoenberg's Euclidean-embeddability test and the product matrix
//! `Δ(x) = x xᵀ - diag(x²)`.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed in `d_ij ≤ d_ik + d_kj`; flat triangles count as valid.
pub const TRIANGLE_SLACK: f64 = 1e-12;
/// Relative eigenvalue cutoff used for the Schoenberg rank.
pub const RANK_TOL: f64 = 1e-8;
/// Relative tolerance for the Schoenberg PSD flag.
pub const PSD_TOL: f64 = 1e-10;

const STRUCT_TOL: f64 = 1e-12;

/// A triangle inequality violation `d_ij > d_ik + d_kj` (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleWitness {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// `d_ij - d_ik - d_kj`, strictly above [`TRIANGLE_SLACK`].
    pub margin: f64,
}

impl fmt::Display for TriangleWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d({0},{1}) > d({0},{2}) + d({2},{1}) by {3:e}",
            self.i + 1,
            self.j + 1,
            self.k + 1,
            self.margin
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Validity {
    Valid,
    Violated { witness: TriangleWitness },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Checks symmetry, nonnegativity and the zero diagonal.
fn check_structure(d: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = d.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    for i in 0..rows {
        if !d[(i, i)].is_finite() || d[(i, i)].abs() > STRUCT_TOL {
            return Err(Error::NonzeroDiagonal { i, value: d[(i, i)] });
        }
        for j in 0..rows {
            let v = d[(i, j)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeEntry { i, j, value: v });
            }
            if (v - d[(j, i)]).abs() > STRUCT_TOL * (1.0 + v.abs()) {
                return Err(Error::Asymmetric { i, j });
            }
        }
    }
    Ok(())
}

fn triangle_scan(d: &DMatrix<f64>) -> Validity {
    let n = d.nrows();
    for i in 0..n {
        for j in i + 1..n {
            for k in (0..n).filter(|&k| k != i && k != j) {
                let margin = d[(i, j)] - d[(i, k)] - d[(k, j)];
                if margin > TRIANGLE_SLACK {
                    return Validity::Violated { witness: TriangleWitness { i, j, k, margin } };
                }
            }
        }
    }
    Validity::Valid
}

/// Validates a raw matrix: structural defects (asymmetry, negative entries,
/// nonzero diagonal) are errors; a triangle violation is reported through
/// the lexicographically first witness `(i, j, k)`, `i < j`.
pub fn validate(entries: &DMatrix<f64>) -> Result<Validity> {
    check_structure(entries)?;
    Ok(triangle_scan(entries))
}

/// Symmetric, nonnegative, zero-diagonal real matrix. The triangle status is
/// computed at construction; matrices that violate it are still
/// representable (they label operators that are not distance-induced).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistanceMatrixJson", into = "DistanceMatrixJson")]
pub struct DistanceMatrix {
    d: DMatrix<f64>,
    validity: Validity,
}

impl DistanceMatrix {
    pub fn new(d: DMatrix<f64>) -> Result<Self> {
        check_structure(&d)?;
        let d = (&d + d.transpose()) * 0.5;
        let validity = triangle_scan(&d);
        Ok(Self { d, validity })
    }

    /// Builds from the strict upper triangle in row-major order
    /// `d_12, d_13, …, d_1n, d_23, …`.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        let m = n * n.saturating_sub(1) / 2;
        if upper.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: upper.len() });
        }
        let mut d = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                d[(i, j)] = upper[k];
                d[(j, i)] = upper[k];
                k += 1;
            }
        }
        Self::new(d)
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// Strict upper triangle, row-major.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| self.d[(i, j)]).collect()
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    pub fn is_valid(&self) -> bool {
        self.validity.is_valid()
    }

    /// All off-diagonal entries strictly positive.
    pub fn is_positive(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i == j || self.d[(i, j)] > 0.0))
    }

    /// Simultaneous row/column permutation: entry `(a,b)` of the result is
    /// `d[perm[a], perm[b]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: perm.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |a, b| self.d[(perm[a], perm[b])]))
    }
}

#[derive(Serialize, Deserialize)]
struct DistanceMatrixJson {
    n: usize,
    d: Vec<f64>,
}

impl TryFrom<DistanceMatrixJson> for DistanceMatrix {
    type Error = Error;

    fn try_from(j: DistanceMatrixJson) -> Result<Self> {
        DistanceMatrix::from_upper(j.n, &j.d)
    }
}

impl From<DistanceMatrix> for DistanceMatrixJson {
    fn from(d: DistanceMatrix) -> Self {
        DistanceMatrixJson { n: d.n(), d: d.upper() }
    }
}

/// Exponent `p ∈ [1, ∞]` of an `ℓ_p` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::OutOfRange { name: "p", value: p })
        }
    }

    pub fn norm(&self, v: impl Iterator<Item = f64>) -> f64 {
        match *self {
            Self::Infinity => v.map(f64::abs).fold(0.0, f64::max),
            Self::Finite(p) if p == 1.0 => v.map(f64::abs).sum(),
            Self::Finite(p) if p == 2.0 => v.map(|x| x * x).sum::<f64>().sqrt(),
            Self::Finite(p) => v.map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for NormExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::Parse(format!("bad exponent {s:?}")))?;
                Self::new(p)
            }
        }
    }
}

impl From<NormExponent> for String {
    fn from(p: NormExponent) -> Self {
        p.to_string()
    }
}

impl TryFrom<String> for NormExponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `n ≥ 2` points of a common dimension `N` with a norm exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    p: NormExponent,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, p: NormExponent) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DimensionTooSmall { min: 2, found: points.len() });
        }
        let dim = points[0].len();
        if let Some(bad) = points.iter().find(|q| q.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        if let NormExponent::Finite(v) = p {
            NormExponent::new(v)?;
        }
        Ok(Self { points, p })
    }

    /// Parses one point per CSV row. A first row that does not parse as
    /// numbers is treated as a header.
    pub fn from_csv<R: Read>(reader: R, p: NormExponent) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut points = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => points.push(v),
                Err(_) if row == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("row {}: {e}", row + 1))),
            }
        }
        Self::new(points, p)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn exponent(&self) -> NormExponent {
        self.p
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// `d_ij = ‖p_i - p_j‖_p`.
pub fn from_points(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let pts = &cloud.points;
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = cloud.p.norm(pts[i].iter().zip(&pts[j]).map(|(a, b)| a - b));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DistanceMatrix::new(d).expect("norm distances are structurally valid")
}

/// Entrywise power `d_ij^p`, `p > 0`.
pub fn hadamard_power(d: &DistanceMatrix, p: f64) -> Result<DistanceMatrix> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::OutOfRange { name: "p", value: p });
    }
    DistanceMatrix::new(d.d.map(|v| if v == 0.0 { 0.0 } else { v.powf(p) }))
}

/// The Gram-type matrix `a_ij = (d²_{0,i} + d²_{0,j} - d²_{i,j}) / 2`,
/// `i, j = 1..n-1`, with its spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SchoenbergGram {
    #[serde(serialize_with = "real_rows")]
    pub a: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub psd: bool,
    pub rank: usize,
    #[serde(skip)]
    eigenvectors: DMatrix<f64>,
}

fn real_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for r in 0..m.nrows() {
        seq.serialize_element(&m.row(r).iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}

impl SchoenbergGram {
    pub fn determinant(&self) -> f64 {
        self.a.determinant()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

pub fn schoenberg_gram(d: &DistanceMatrix) -> SchoenbergGram {
    let n = d.n();
    let k = n.saturating_sub(1);
    let sq = d.d.map(|v| v * v);
    let a = DMatrix::from_fn(k, k, |i, j| 0.5 * (sq[(0, i + 1)] + sq[(0, j + 1)] - sq[(i + 1, j + 1)]));
    if k == 0 {
        return SchoenbergGram { a, eigenvalues: Vec::new(), psd: true, rank: 0, eigenvectors: DMatrix::zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let largest = eigenvalues[0];
    let smallest = eigenvalues[k - 1];
    let psd = smallest >= -PSD_TOL * (1.0 + largest.max(0.0));
    let rank = if largest > 0.0 {
        eigenvalues.iter().filter(|&&v| v > RANK_TOL * largest).count()
    } else {
        0
    };
    SchoenbergGram { a, eigenvalues, psd, rank, eigenvectors }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Embedding {
    Points { cloud: PointCloud },
    NotEmbeddable { min_eigenvalue: f64 },
}

/// Euclidean realization of `d` when its Schoenberg matrix is PSD: `p_0 = 0`
/// and `p_{i}` is row `i-1` of `V_r Λ_r^{1/2}`, truncated at the numerical
/// rank (at least one coordinate is always kept).
pub fn embed_points(d: &DistanceMatrix) -> Embedding {
    let g = schoenberg_gram(d);
    if !g.psd {
        return Embedding::NotEmbeddable { min_eigenvalue: g.min_eigenvalue() };
    }
    let n = d.n();
    let dim = g.rank.max(1);
    let mut points = vec![vec![0.0; dim]; n];
    for (i, point) in points.iter_mut().enumerate().skip(1) {
        for (c, coord) in point.iter_mut().enumerate().take(g.rank) {
            *coord = g.eigenvectors[(i - 1, c)] * g.eigenvalues[c].max(0.0).sqrt();
        }
    }
    let cloud = PointCloud::new(points, NormExponent::Finite(2.0)).expect("n >= 2 points of equal dimension");
    Embedding::Points { cloud }
}

/// `Δ(x) = x xᵀ - diag(x_1², …, x_n²)`: off-diagonal entries `x_i x_j`.
pub fn delta_product(x: &[f64]) -> Result<DistanceMatrix> {
    if let Some((i, &v)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeEntry { i, j: i, value: v });
    }
    let n = x.len();
    DistanceMatrix::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { x[i] * x[j] }))
}
