//! The two-angle function
//! `F(a,b,t,θ,φ) = √(a²cos²θ + b²sin²θ) + √(a²cos²φ + b²sin²φ) - (a+b) t sin(θ+φ)`
//! on `[0, π/2]²` and a numerical search for its minimum `ω(a,b,t)`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigParams {
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::OutOfRange { name, value });
    }
    Ok(())
}

fn check_angle(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&value) {
        return Err(Error::OutOfRange { name, value });
    }
    Ok(())
}

impl TrigParams {
    pub fn new(a: f64, b: f64, t: f64, theta: f64, phi: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        check_positive("t", t)?;
        check_angle("theta", theta)?;
        check_angle("phi", phi)?;
        Ok(Self { a, b, t, theta, phi })
    }
}

#[inline]
fn radical(a: f64, b: f64, angle: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    (a * a * c * c + b * b * s * s).sqrt()
}

#[inline]
fn f_raw(a: f64, b: f64, t: f64, theta: f64, phi: f64) -> f64 {
    radical(a, b, theta) + radical(a, b, phi) - (a + b) * t * (theta + phi).sin()
}

pub fn f_eval(p: &TrigParams) -> f64 {
    f_raw(p.a, p.b, p.t, p.theta, p.phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaOptions {
    /// Grid points per axis, boundary angles included.
    pub grid: usize,
    /// Nelder-Mead iterations after the grid scan.
    pub refine: usize,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self { grid: 400, refine: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaMin {
    pub value: f64,
    pub theta: f64,
    pub phi: f64,
}

/// `ω(a,b,t) = min F` over `[0, π/2]²`: a grid scan followed by Nelder-Mead
/// refinement with vertices clamped to the square.
pub fn omega_min(a: f64, b: f64, t: f64, opts: &OmegaOptions) -> Result<OmegaMin> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("t", t)?;
    if opts.grid < 2 {
        return Err(Error::OutOfRange { name: "grid", value: opts.grid as f64 });
    }
    let g = opts.grid;
    let h = FRAC_PI_2 / (g - 1) as f64;
    let angle = |k: usize| if k == g - 1 { FRAC_PI_2 } else { k as f64 * h };
    let f = |th: f64, ph: f64| f_raw(a, b, t, th, ph);

    let (_, value, theta, phi) = (0..g)
        .into_par_iter()
        .map(|i| {
            let th = angle(i);
            (0..g)
                .map(|j| (i * g + j, f(th, angle(j)), th, angle(j)))
                .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
                .expect("grid is nonempty")
        })
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
        .expect("grid is nonempty");

    let clamp = |p: [f64; 2]| [p[0].clamp(0.0, FRAC_PI_2), p[1].clamp(0.0, FRAC_PI_2)];
    let eval = |p: [f64; 2]| f(p[0], p[1]);
    let mut simplex = [[theta, phi], clamp([theta + h, phi]), clamp([theta, phi + h])];
    if simplex[1] == simplex[0] {
        simplex[1] = clamp([theta - h, phi]);
    }
    if simplex[2] == simplex[0] {
        simplex[2] = clamp([theta, phi - h]);
    }
    let mut vals = simplex.map(eval);
    for _ in 0..opts.refine {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        let [best, mid, worst] = order;
        if (vals[worst] - vals[best]).abs() < 1e-15 && dist(simplex[worst], simplex[best]) < 1e-12 {
            break;
        }
        let centroid = [(simplex[best][0] + simplex[mid][0]) / 2.0, (simplex[best][1] + simplex[mid][1]) / 2.0];
        let towards = |s: f64| clamp([
            centroid[0] + s * (simplex[worst][0] - centroid[0]),
            centroid[1] + s * (simplex[worst][1] - centroid[1]),
        ]);
        let reflected = towards(-1.0);
        let fr = eval(reflected);
        if fr < vals[best] {
            let expanded = towards(-2.0);
            let fe = eval(expanded);
            (simplex[worst], vals[worst]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < vals[mid] {
            (simplex[worst], vals[worst]) = (reflected, fr);
        } else {
            let contracted = if fr < vals[worst] { towards(-0.5) } else { towards(0.5) };
            let fc = eval(contracted);
            if fc < vals[worst].min(fr) {
                (simplex[worst], vals[worst]) = (contracted, fc);
            } else {
                for k in [mid, worst] {
                    simplex[k] = [
                        (simplex[k][0] + simplex[best][0]) / 2.0,
                        (simplex[k][1] + simplex[best][1]) / 2.0,
                    ];
                    vals[k] = eval(simplex[k]);
                }
            }
        }
    }
    let k = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("three vertices");
    if vals[k] < value {
        Ok(OmegaMin { value: vals[k], theta: simplex[k][0], phi: simplex[k][1] })
    } else {
        Ok(OmegaMin { value, theta, phi })
    }
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}
