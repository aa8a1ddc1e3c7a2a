use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semimetrics::WedgeOperatorQ;
use crate::wedge::{vee_into, wedge_dim, wedge_into, StateVector, STRUCTURE_TOL};
use crate::{CMatrix, CVector};

/// A triple together with its triangle deficit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitRecord {
    pub x: StateVector,
    pub y: StateVector,
    pub z: StateVector,
    /// `f(x,y,z) = d_E(x,z) + d_E(y,z) - d_E(x,y)`.
    pub deficit: f64,
    /// Norm of the Lagrange stationarity residual; `None` where the deficit
    /// is not differentiable.
    pub residual: Option<f64>,
    pub iterations: usize,
}

impl DeficitRecord {
    /// Evaluates the deficit of a triple; `iterations` is zero.
    pub fn evaluate(q: &WedgeOperatorQ, x: StateVector, y: StateVector, z: StateVector) -> Result<Self> {
        let deficit = deficit(q, &x, &y, &z)?;
        let residual = stationarity_residual(q, x.as_vector(), y.as_vector(), z.as_vector()).ok();
        Ok(Self { x, y, z, deficit, residual, iterations: 0 })
    }

    /// Recomputes the deficit through the dense quadratic form of `Q`,
    /// independently of any diagonal fast path.
    pub fn reverify(&self, q: &WedgeOperatorQ) -> Result<f64> {
        check_dims(q, &[self.x.as_vector(), self.y.as_vector(), self.z.as_vector()])?;
        let (x, y, z) = (self.x.as_vector(), self.y.as_vector(), self.z.as_vector());
        Ok(q.dense_quad(x, z).sqrt() + q.dense_quad(y, z).sqrt() - q.dense_quad(x, y).sqrt())
    }
}

pub(crate) fn check_dims(q: &WedgeOperatorQ, vs: &[&CVector]) -> Result<()> {
    for v in vs {
        if v.len() != q.n() {
            return Err(Error::DimensionMismatch { expected: q.n(), found: v.len() });
        }
    }
    Ok(())
}

/// `f(x,y,z) = ‖E(x∧z)‖ + ‖E(y∧z)‖ - ‖E(x∧y)‖`; the triangle inequality holds
/// for the triple iff this is nonnegative.
pub fn deficit(q: &WedgeOperatorQ, x: &StateVector, y: &StateVector, z: &StateVector) -> Result<f64> {
    deficit_raw(q, x.as_vector(), y.as_vector(), z.as_vector())
}

/// [`deficit`] on vectors that need not be normalized.
pub fn deficit_raw(q: &WedgeOperatorQ, x: &CVector, y: &CVector, z: &CVector) -> Result<f64> {
    check_dims(q, &[x, y, z])?;
    Ok(q.norm_of_wedge(x, z) + q.norm_of_wedge(y, z) - q.norm_of_wedge(x, y))
}

/// Evaluation of `Q` in coordinates where it is cheapest to apply: the
/// eigenbasis for diagonal operators, the standard basis otherwise.
pub(crate) struct Evaluator<'a> {
    n: usize,
    basis: Option<&'a CMatrix>,
    kind: Kind<'a>,
}

enum Kind<'a> {
    Weights(Vec<f64>),
    Dense(&'a CMatrix),
}

/// The three `E`-norms and the bivectors `Q(x∧z)`, `Q(y∧z)`, `Q(x∧y)`.
pub(crate) struct Terms {
    pub s_xz: f64,
    pub s_yz: f64,
    pub s_xy: f64,
    qw_xz: Vec<Complex64>,
    qw_yz: Vec<Complex64>,
    qw_xy: Vec<Complex64>,
}

impl Terms {
    pub fn deficit(&self) -> f64 {
        self.s_xz + self.s_yz - self.s_xy
    }

    pub fn min_norm(&self) -> f64 {
        self.s_xz.min(self.s_yz).min(self.s_xy)
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(q: &'a WedgeOperatorQ) -> Self {
        let n = q.n();
        match q.diagonal() {
            Some(diag) => {
                let weights = diag.dmat().upper().iter().map(|d| d * d).collect();
                let basis = (!diag.is_standard()).then(|| diag.basis());
                Self { n, basis, kind: Kind::Weights(weights) }
            }
            None => Self { n, basis: None, kind: Kind::Dense(q.q().matrix()) },
        }
    }

    /// Maps a vector into working coordinates.
    pub fn to_work(&self, v: &CVector) -> CVector {
        match self.basis {
            Some(u) => u.ad_mul(v),
            None => v.clone(),
        }
    }

    /// Maps a vector (or a gradient) out of working coordinates.
    pub fn from_work(&self, v: &CVector) -> CVector {
        match self.basis {
            Some(u) => u * v,
            None => v.clone(),
        }
    }

    fn apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        match &self.kind {
            Kind::Weights(d2) => w.iter().zip(d2).map(|(c, d)| c * d).collect(),
            Kind::Dense(q) => {
                let m = w.len();
                (0..m).map(|r| (0..m).map(|c| q[(r, c)] * w[c]).sum()).collect()
            }
        }
    }

    fn term(&self, a: &CVector, b: &CVector) -> (f64, Vec<Complex64>) {
        let mut w = vec![Complex64::new(0.0, 0.0); wedge_dim(self.n)];
        wedge_into(a.as_slice(), b.as_slice(), &mut w);
        let qw = self.apply(&w);
        let quad: f64 = w.iter().zip(&qw).map(|(a, b)| (a.conj() * b).re).sum();
        (quad.max(0.0).sqrt(), qw)
    }

    /// All three terms for vectors in working coordinates.
    pub fn terms(&self, x: &CVector, y: &CVector, z: &CVector) -> Terms {
        let (s_xz, qw_xz) = self.term(x, z);
        let (s_yz, qw_yz) = self.term(y, z);
        let (s_xy, qw_xy) = self.term(x, y);
        Terms { s_xz, s_yz, s_xy, qw_xz, qw_yz, qw_xy }
    }

    /// Euclidean gradients in working coordinates.
    pub fn gradient(&self, t: &Terms, x: &CVector, y: &CVector, z: &CVector) -> Result<[CVector; 3]> {
        let wedge_norm = t.min_norm();
        if !(wedge_norm > STRUCTURE_TOL) {
            return Err(Error::SingularConfiguration { wedge_norm });
        }
        let n = self.n;
        let vee = |c: &[Complex64], v: &CVector| {
            let mut out = CVector::zeros(n);
            vee_into(n, c, v.as_slice(), out.as_mut_slice());
            out
        };
        let gx = vee(&t.qw_xz, z) / Complex64::new(t.s_xz, 0.0) - vee(&t.qw_xy, y) / Complex64::new(t.s_xy, 0.0);
        let gy = vee(&t.qw_yz, z) / Complex64::new(t.s_yz, 0.0) + vee(&t.qw_xy, x) / Complex64::new(t.s_xy, 0.0);
        let gz = -(vee(&t.qw_xz, x) / Complex64::new(t.s_xz, 0.0)) - vee(&t.qw_yz, y) / Complex64::new(t.s_yz, 0.0);
        Ok([gx, gy, gz])
    }
}

/// Euclidean gradients of `f` with respect to `x`, `y` and `z`.
///
/// The deficit is a real function of complex vectors; a returned vector `g`
/// satisfies `df = Re⟨g, dx⟩`, so its real and imaginary parts are the
/// partial derivatives along the real and imaginary parts of the argument.
/// Valid at any point with nonzero wedge norms, not only on the sphere.
pub fn deficit_gradient(q: &WedgeOperatorQ, x: &CVector, y: &CVector, z: &CVector) -> Result<[CVector; 3]> {
    check_dims(q, &[x, y, z])?;
    let ev = Evaluator::new(q);
    let (xw, yw, zw) = (ev.to_work(x), ev.to_work(y), ev.to_work(z));
    let t = ev.terms(&xw, &yw, &zw);
    let [gx, gy, gz] = ev.gradient(&t, &xw, &yw, &zw)?;
    Ok([ev.from_work(&gx), ev.from_work(&gy), ev.from_work(&gz)])
}

/// Tangential components `g - Re⟨v, g⟩ v` of the gradients on the product of
/// unit spheres.
pub fn projected_gradient(q: &WedgeOperatorQ, x: &CVector, y: &CVector, z: &CVector) -> Result<[CVector; 3]> {
    let [gx, gy, gz] = deficit_gradient(q, x, y, z)?;
    Ok([project(x, gx), project(y, gy), project(z, gz)])
}

pub(crate) fn project(v: &CVector, g: CVector) -> CVector {
    let c = v.dotc(&g).re;
    g - v * Complex64::new(c, 0.0)
}

/// `‖(∇_x f - λx, ∇_y f - μy, ∇_z f - νz)‖` with the multipliers
/// `λ = d(x,z) - d(x,y)`, `μ = d(y,z) - d(x,y)`, `ν = d(x,z) + d(y,z)`.
pub fn stationarity_residual(q: &WedgeOperatorQ, x: &CVector, y: &CVector, z: &CVector) -> Result<f64> {
    check_dims(q, &[x, y, z])?;
    let ev = Evaluator::new(q);
    let (xw, yw, zw) = (ev.to_work(x), ev.to_work(y), ev.to_work(z));
    let t = ev.terms(&xw, &yw, &zw);
    let g = ev.gradient(&t, &xw, &yw, &zw)?;
    Ok(residual_from(&t, &g, &xw, &yw, &zw))
}

pub(crate) fn residual_from(t: &Terms, g: &[CVector; 3], x: &CVector, y: &CVector, z: &CVector) -> f64 {
    let lambda = Complex64::new(t.s_xz - t.s_xy, 0.0);
    let mu = Complex64::new(t.s_yz - t.s_xy, 0.0);
    let nu = Complex64::new(t.s_xz + t.s_yz, 0.0);
    let rx = (&g[0] - x * lambda).norm_squared();
    let ry = (&g[1] - y * mu).norm_squared();
    let rz = (&g[2] - z * nu).norm_squared();
    (rx + ry + rz).sqrt()
}
