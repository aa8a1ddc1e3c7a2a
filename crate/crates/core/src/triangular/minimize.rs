use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deficit::{check_dims, deficit, project, residual_from, DeficitRecord, Evaluator};
use crate::error::{Error, Result};
use crate::rng::{fork, substream};
use crate::semimetrics::WedgeOperatorQ;
use crate::wedge::{haar_orthonormal_triple, haar_random_state, StateVector, STRUCTURE_TOL};
use crate::CVector;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-16;
const FIRST_STEP_LENGTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub max_steps: usize,
    /// Stop when the norm of the tangential gradient falls below this.
    pub grad_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { restarts: 20, max_steps: 500, grad_tol: 1e-9 }
    }
}

struct Local {
    v: [CVector; 3],
    f: f64,
    residual: Option<f64>,
    iterations: usize,
}

fn normalize(v: CVector) -> CVector {
    let n = v.norm();
    v.unscale(n)
}

/// Projected gradient descent with Armijo backtracking from one start, in
/// the evaluator's working coordinates.
fn descend(ev: &Evaluator<'_>, start: [CVector; 3], opts: &MinimizeOptions) -> Local {
    let [mut x, mut y, mut z] = start;
    let mut t = ev.terms(&x, &y, &z);
    let mut step: Option<f64> = None;
    let mut previous: Option<([CVector; 3], [CVector; 3])> = None;
    let mut iterations = 0;
    let residual = loop {
        let Ok(g) = ev.gradient(&t, &x, &y, &z) else {
            break None;
        };
        let res = residual_from(&t, &g, &x, &y, &z);
        let [gx, gy, gz] = g;
        let p = [project(&x, gx), project(&y, gy), project(&z, gz)];
        let gn2: f64 = p.iter().map(|v| v.norm_squared()).sum();
        let gn = gn2.sqrt();
        if gn < opts.grad_tol || iterations >= opts.max_steps {
            break Some(res);
        }
        let f = t.deficit();
        let mut alpha = match (&previous, step) {
            (Some((pv, pg)), Some(a)) => barzilai_borwein(pv, pg, &[&x, &y, &z], &p).unwrap_or(2.0 * a),
            _ => FIRST_STEP_LENGTH / gn,
        };
        let accepted = loop {
            if alpha * gn < MIN_STEP {
                break None;
            }
            let a = Complex64::new(alpha, 0.0);
            let cand = [normalize(&x - &p[0] * a), normalize(&y - &p[1] * a), normalize(&z - &p[2] * a)];
            let ct = ev.terms(&cand[0], &cand[1], &cand[2]);
            if ct.min_norm() > STRUCTURE_TOL && ct.deficit() <= f - ARMIJO_C * alpha * gn2 {
                break Some((cand, ct));
            }
            alpha *= 0.5;
        };
        match accepted {
            Some(([cx, cy, cz], ct)) => {
                previous = Some(([x.clone(), y.clone(), z.clone()], p));
                x = cx;
                y = cy;
                z = cz;
                t = ct;
                step = Some(alpha);
                iterations += 1;
            }
            None => break Some(res),
        }
    };
    Local { f: t.deficit(), v: [x, y, z], residual, iterations }
}

/// Step length `<s,s>/<s,r>` from the last move `s` and the change `r` in
/// the tangential gradient, as long as the curvature along `s` is positive.
fn barzilai_borwein(pv: &[CVector; 3], pg: &[CVector; 3], v: &[&CVector; 3], g: &[CVector; 3]) -> Option<f64> {
    let mut ss = 0.0;
    let mut sr = 0.0;
    for k in 0..3 {
        let s = v[k] - &pv[k];
        let r = &g[k] - &pg[k];
        ss += s.norm_squared();
        sr += s.dotc(&r).re;
    }
    (sr > 0.0 && ss > 0.0).then(|| ss / sr)
}

/// Searches for the minimum of the deficit over the product of three unit
/// spheres.
///
/// Starts are the basis triples `(u_i, u_j, u_k)` of the diagonal form (when
/// present) followed by `restarts` Haar-random orthonormal triples. Each start
/// is refined by projected gradient descent and the lowest record is
/// returned; ties go to the earliest start. Every start draws from its own
/// substream of a seed taken from `rng`, so the result does not depend on the
/// thread count.
pub fn minimize_deficit<R: Rng + ?Sized>(
    q: &WedgeOperatorQ,
    opts: &MinimizeOptions,
    rng: &mut R,
) -> Result<DeficitRecord> {
    if opts.restarts == 0 {
        return Err(Error::OutOfRange { name: "restarts", value: 0.0 });
    }
    let n = q.n();
    let seed = fork(rng);
    let ev = Evaluator::new(q);

    let mut basis_starts = Vec::new();
    if q.diagonal().is_some() && n >= 3 {
        let e = |i: usize| {
            let mut v = CVector::zeros(n);
            v[i] = Complex64::new(1.0, 0.0);
            v
        };
        for k in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    if i != k && j != k {
                        basis_starts.push([e(i), e(j), e(k)]);
                    }
                }
            }
        }
    }
    let n_basis = basis_starts.len();

    let best = (0..n_basis + opts.restarts)
        .into_par_iter()
        .map(|idx| {
            let start = if idx < n_basis {
                basis_starts[idx].clone()
            } else {
                random_start(n, seed, (idx - n_basis) as u64)
            };
            (idx, descend(&ev, start, opts))
        })
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0)))
        .expect("at least one start");

    let Local { v: [x, y, z], residual, iterations, .. } = best.1;
    let x = StateVector::normalized(ev.from_work(&x))?;
    let y = StateVector::normalized(ev.from_work(&y))?;
    let z = StateVector::normalized(ev.from_work(&z))?;
    check_dims(q, &[x.as_vector()])?;
    let deficit = deficit(q, &x, &y, &z)?;
    Ok(DeficitRecord { x, y, z, deficit, residual, iterations })
}

fn random_start(n: usize, seed: u64, index: u64) -> [CVector; 3] {
    let mut r = substream(seed, &[index]);
    if n >= 3 {
        haar_orthonormal_triple(n, &mut r).expect("n >= 3")
    } else {
        let mut s = || haar_random_state(n, &mut r).expect("n >= 2").into_inner();
        [s(), s(), s()]
    }
}
