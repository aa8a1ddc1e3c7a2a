//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use wedgetri::distmat::{delta_product, embed_points, from_points, hadamard_power, schoenberg_gram, Embedding, NormExponent, PointCloud};
use wedgetri::harness::random_distance_matrix;
use wedgetri::semimetrics::WedgeOperatorQ;
use wedgetri::triangular::{
    certify_sufficient, closed_form_report, cone_combine, conjugate_local, deficit, deficit_gradient, deficit_raw,
    minimize_deficit, sample_triples_test, sufficient_condition, MinimizeOptions, Verdict,
};
use wedgetri::trig_lemma::{omega_min, OmegaOptions};
use wedgetri::wedge::{compound2, haar_random_state, haar_random_unitary, inner, wedge, wedge_dim, StateVector};
use wedgetri::{CMatrix, CVector, DistanceMatrix};

const CLOSED_FORM_TOL: f64 = 1e-6;
const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(60);
const SAMPLING_FLOOR: f64 = -1e-12;
const TABLE_FLOOR: f64 = -1e-13;
const TABLE_BUDGET: Duration = Duration::from_secs(600);
const EMBED_TOL: f64 = 1e-10;
const OMEGA_TOL: f64 = 1e-4;
const ARGMIN_TOL: f64 = 1e-3;
const GRADIENT_STEP: f64 = 1e-5;
const GRADIENT_REL_TOL: f64 = 1e-6;
const LAGRANGE_TOL: f64 = 1e-12;
const COMPOUND_TOL: f64 = 1e-10;
const CONJUGATION_TOL: f64 = 1e-10;
const ORTHOGONALITY_TOL: f64 = 1e-5;
const RAY_TOL: f64 = 1e-4;
const CONVERGED_RESIDUAL: f64 = 1e-6;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `min(0, d_a + d_b - d_max)` written out case by case.
fn closed_form_oracle(d12: f64, d13: f64, d23: f64) -> f64 {
    let largest = d12.max(d13).max(d23);
    let rest = d12 + d13 + d23 - largest;
    if largest > rest {
        rest - largest
    } else {
        0.0
    }
}

fn random_basis_operator(upper: &[f64], n: usize, r: &mut ChaCha8Rng) -> (WedgeOperatorQ, CMatrix) {
    let u = haar_random_unitary(n, r).unwrap();
    let d = DistanceMatrix::from_upper(n, upper).unwrap();
    (WedgeOperatorQ::from_diagonal(d, u.clone()).unwrap(), u)
}

type Outcome = (bool, String);

fn criterion_1() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut r = rng(101);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut violating = 0;
    for _ in 0..200 {
        let mut d = [r.random_range(0.05..2.0), r.random_range(0.05..2.0), r.random_range(0.05..2.0)];
        d.sort_by(f64::total_cmp);
        let [d12, d13, d23] = d;
        if d23 > d12 + d13 {
            violating += 1;
        }
        // Dense form in a random basis.
        let (q, _) = random_basis_operator(&[d12, d13, d23], 3, &mut r);
        let q = q.into_dense();
        let rec = pool.install(|| minimize_deficit(&q, &MinimizeOptions::default(), &mut r)).unwrap();
        worst = worst.max((rec.deficit - closed_form_oracle(d12, d13, d23)).abs());
    }
    let elapsed = start.elapsed();
    (
        worst < CLOSED_FORM_TOL && elapsed < CLOSED_FORM_BUDGET,
        format!("max |min - closed form| = {worst:.2e} over 200 operators ({violating} violating), {:.1}s on 1 thread", elapsed.as_secs_f64()),
    )
}

fn sampled_floor(q: &WedgeOperatorQ, r: &mut ChaCha8Rng) -> f64 {
    let rep = sample_triples_test(q, 10_000, r, -SAMPLING_FLOOR).unwrap();
    rep.worst.unwrap().deficit
}

fn criterion_2() -> Outcome {
    let mut r = rng(102);
    let mut worst = f64::INFINITY;
    for n in 3..=6 {
        for _ in 0..10 {
            let points = (0..n).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
            let cloud = PointCloud::new(points, NormExponent::Finite(2.0)).unwrap();
            let u = haar_random_unitary(n, &mut r).unwrap();
            let q = WedgeOperatorQ::from_diagonal(from_points(&cloud), u).unwrap();
            worst = worst.min(sampled_floor(&q, &mut r));
        }
    }
    (worst >= SAMPLING_FLOOR, format!("40 operators x 1e4 orthonormal triples, min deficit {worst:.3e}"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(103);
    let mut worst = f64::INFINITY;
    let mut drawn = 0;
    for n in 3..=6 {
        let mut accepted = 0;
        while accepted < 10 {
            let lambda: Vec<f64> = (0..n).map(|_| r.random_range(0.2..2.0)).collect();
            drawn += 1;
            let d = delta_product(&lambda).unwrap();
            if !d.is_valid() {
                continue;
            }
            accepted += 1;
            let u = haar_random_unitary(n, &mut r).unwrap();
            let q = WedgeOperatorQ::from_diagonal(d, u).unwrap();
            worst = worst.min(sampled_floor(&q, &mut r));
        }
    }
    (worst >= SAMPLING_FLOOR, format!("40 product operators ({drawn} drawn), min deficit {worst:.3e}"))
}

fn criterion_4() -> Outcome {
    let d = DistanceMatrix::from_upper(4, &[1.0, 1.0, 2.0, 2.0, 1.0, 1.0]).unwrap();
    let q = WedgeOperatorQ::standard_diagonal(d);
    let sigma = sufficient_condition(&q).sigma;
    let expected = [2.0, 2.0, 1.0, 1.0, 1.0, 1.0];
    let spectrum_ok = sigma.len() == 6 && sigma.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12);
    let certified = certify_sufficient(&q);
    let floor = sampled_floor(&q, &mut rng(104));
    (
        spectrum_ok && certified && floor >= SAMPLING_FLOOR,
        format!("sigma = {sigma:.3?}, certified = {certified}, min sampled deficit {floor:.3e}"),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_wedgetri"))
        .args(["reproduce-table", "--dims", "3..8", "--dmats", "100", "--triples", "1000", "--seed", "7", "--threads", "4"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&output.stdout);
    let mut lines = stdout.lines();
    let header_ok = lines.next() == Some("dim,vector_mode,samples,min_random_D,min_linf_D");
    let mut rows = 0;
    let mut worst = f64::INFINITY;
    let mut shape_ok = true;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        shape_ok &= cells.len() == 5 && cells[2] == "100000";
        for cell in &cells[3..] {
            worst = worst.min(cell.parse::<f64>().unwrap_or(f64::NEG_INFINITY));
        }
        rows += 1;
    }
    let pass = output.status.code() == Some(0)
        && header_ok
        && shape_ok
        && rows == 12
        && worst >= TABLE_FLOOR
        && elapsed < TABLE_BUDGET;
    (pass, format!("{rows} rows, min over table {worst:.3e}, {:.1}s", elapsed.as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let collinear = DistanceMatrix::from_upper(3, &[1.0, 3.0, 2.0]).unwrap();
    let g = schoenberg_gram(&collinear);
    let mut reproduced = f64::INFINITY;
    if let Embedding::Points { cloud } = embed_points(&collinear) {
        let back = from_points(&cloud);
        reproduced = (back.matrix() - collinear.matrix()).amax();
    }
    let collinear_ok = g.psd && g.rank == 1 && reproduced < EMBED_TOL;

    let mut dets = Vec::new();
    let mut none_embed = true;
    for b4 in [1.0, 1.5, 2.0] {
        let d = delta_product(&[1.0, 1.0, 0.5, b4]).unwrap();
        dets.push(schoenberg_gram(&d).determinant());
        none_embed &= matches!(embed_points(&d), Embedding::NotEmbeddable { .. });
    }
    let family_ok = dets.iter().all(|&d| d < 0.0) && (dets[0] + 1.0 / 16.0).abs() < 1e-12 && none_embed;
    (
        collinear_ok && family_ok,
        format!("collinear rank {} psd {} max error {reproduced:.1e}; det A = {dets:.4?}", g.rank, g.psd),
    )
}

fn grid_oracle(a: f64, b: f64, t: f64) -> f64 {
    let g = 1201;
    let h = FRAC_PI_2 / (g - 1) as f64;
    let f = |th: f64, ph: f64| {
        (a * a * th.cos().powi(2) + b * b * th.sin().powi(2)).sqrt()
            + (a * a * ph.cos().powi(2) + b * b * ph.sin().powi(2)).sqrt()
            - (a + b) * t * (th + ph).sin()
    };
    let mut best = f64::INFINITY;
    for i in 0..g {
        for j in 0..g {
            best = best.min(f(i as f64 * h, j as f64 * h));
        }
    }
    best
}

fn criterion_7() -> Outcome {
    let mut r = rng(107);
    let opts = OmegaOptions::default();
    let mut worst: f64 = 0.0;
    let mut argmin_ok = true;
    let mut positive_ok = true;
    for k in 0..50 {
        let a = r.random_range(0.2..3.0);
        let b = if k % 5 == 0 { a } else { r.random_range(0.2..3.0) };
        let t = match k % 3 {
            0 => r.random_range(0.05..0.95),
            1 => 1.0,
            _ => r.random_range(1.05..3.0),
        };
        let m = omega_min(a, b, t, &opts).unwrap();
        let expected = if a == b {
            2.0 * a * (1.0 - t)
        } else if t == 1.0 {
            0.0
        } else if t > 1.0 {
            (a + b) * (1.0 - t)
        } else {
            positive_ok &= m.value > 0.0;
            grid_oracle(a, b, t)
        };
        worst = worst.max((m.value - expected).abs());
        if t == 1.0 {
            let line = (m.theta + m.phi - FRAC_PI_2).abs() < ARGMIN_TOL;
            let curve = (m.theta.tan() * m.phi.tan() - a / b).abs() < ARGMIN_TOL;
            argmin_ok &= line || curve;
        }
    }
    (
        worst < OMEGA_TOL && argmin_ok && positive_ok,
        format!("max |omega - closed form| = {worst:.2e}, argmin conditions {argmin_ok}, case (a) positive {positive_ok}"),
    )
}

fn fd_gradient(q: &WedgeOperatorQ, v: &[CVector; 3], which: usize) -> CVector {
    let n = q.n();
    CVector::from_fn(n, |k, _| {
        let mut parts = [0.0; 2];
        for (p, unit) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)].into_iter().enumerate() {
            let mut plus = v.clone();
            let mut minus = v.clone();
            plus[which][k] += unit * GRADIENT_STEP;
            minus[which][k] -= unit * GRADIENT_STEP;
            let fp = deficit_raw(q, &plus[0], &plus[1], &plus[2]).unwrap();
            let fm = deficit_raw(q, &minus[0], &minus[1], &minus[2]).unwrap();
            parts[p] = (fp - fm) / (2.0 * GRADIENT_STEP);
        }
        Complex64::new(parts[0], parts[1])
    })
}

fn random_psd_operator(n: usize, r: &mut ChaCha8Rng) -> WedgeOperatorQ {
    let m = wedge_dim(n);
    let e = CMatrix::from_fn(m, m, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    WedgeOperatorQ::from_e(n, &e).unwrap()
}

fn criterion_8() -> Outcome {
    let mut r = rng(108);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = 3 + k % 4;
        let q = random_psd_operator(n, &mut r);
        let v = [0, 1, 2].map(|_| haar_random_state(n, &mut r).unwrap().into_inner());
        let g = deficit_gradient(&q, &v[0], &v[1], &v[2]).unwrap();
        let fd = [0, 1, 2].map(|w| fd_gradient(&q, &v, w));
        let num: f64 = (0..3).map(|w| (&g[w] - &fd[w]).norm_squared()).sum::<f64>().sqrt();
        let den: f64 = (0..3).map(|w| g[w].norm_squared()).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    (worst < GRADIENT_REL_TOL, format!("max relative error {worst:.2e} over 100 configurations"))
}

fn criterion_9() -> Outcome {
    let mut r = rng(109);
    let mut details = Vec::new();

    let mut lagrange: f64 = 0.0;
    for k in 0..1000 {
        let n = 2 + k % 7;
        let x = CVector::from_fn(n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let y = CVector::from_fn(n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let lhs = wedge(&x, &y).unwrap().norm_squared();
        let rhs = x.norm_squared() * y.norm_squared() - inner(&x, &y).norm_sqr();
        lagrange = lagrange.max((lhs - rhs).abs());
    }
    details.push(format!("lagrange {lagrange:.1e}"));

    let mut compound: f64 = 0.0;
    for k in 0..1000 {
        let n = 2 + k % 5;
        let mut m = || CMatrix::from_fn(n, n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let (a, b) = (m(), m());
        let diff = compound2(&(&a * &b)).unwrap() - compound2(&a).unwrap() * compound2(&b).unwrap();
        compound = compound.max(diff.iter().map(|c| c.norm()).fold(0.0, f64::max));
    }
    details.push(format!("compound {compound:.1e}"));

    let mut snowflake_ok = true;
    for k in 0..1000 {
        let d = random_distance_matrix(3 + k % 6, &mut r).unwrap();
        let p = r.random_range(0.01..0.99);
        snowflake_ok &= hadamard_power(&d, p).unwrap().is_valid();
    }
    details.push(format!("snowflake {snowflake_ok}"));

    // Pairs of certified operators: n = 3 diagonal operators with a
    // triangular closed form, or n = 4 operators passing the spectral test,
    // each in its own random basis.
    let mut cone_floor = f64::INFINITY;
    let mut certified_inputs = true;
    for k in 0..1000 {
        let (n, lo, hi) = if k % 2 == 0 { (3, 0.1, 2.0) } else { (4, 1.0, 1.9) };
        let make = |r: &mut ChaCha8Rng| loop {
            let upper: Vec<f64> = (0..wedge_dim(n)).map(|_| r.random_range(lo..hi)).collect();
            let (q, _) = random_basis_operator(&upper, n, r);
            let ok = if n == 3 {
                closed_form_report(&q, 1e-12).unwrap().verdict == Verdict::CertifiedTriangular
            } else {
                certify_sufficient(&q)
            };
            if ok {
                return q;
            }
        };
        let (q1, q2) = (make(&mut r), make(&mut r));
        certified_inputs &= q1.diagonal().unwrap().basis() != q2.diagonal().unwrap().basis();
        let sum = cone_combine(&q1, &q2).unwrap();
        let rep = sample_triples_test(&sum, 300, &mut r, 1e-12).unwrap();
        cone_floor = cone_floor.min(rep.worst.unwrap().deficit);
    }
    details.push(format!("cone min deficit {cone_floor:.2e}"));

    let mut conj: f64 = 0.0;
    for k in 0..1000 {
        let n = 3 + k % 4;
        let q = random_psd_operator(n, &mut r);
        let u = haar_random_unitary(n, &mut r).unwrap();
        let qu = conjugate_local(&q, &u).unwrap();
        let s: Vec<StateVector> = (0..3).map(|_| haar_random_state(n, &mut r).unwrap()).collect();
        let us: Vec<StateVector> = s.iter().map(|v| StateVector::normalized(&u * v.as_vector()).unwrap()).collect();
        let lhs = deficit(&q, &us[0], &us[1], &us[2]).unwrap();
        let rhs = deficit(&qu, &s[0], &s[1], &s[2]).unwrap();
        conj = conj.max((lhs - rhs).abs());
    }
    details.push(format!("conjugation {conj:.1e}"));

    let pass = lagrange < LAGRANGE_TOL
        && compound < COMPOUND_TOL
        && snowflake_ok
        && certified_inputs
        && cone_floor >= SAMPLING_FLOOR
        && conj < CONJUGATION_TOL;
    (pass, details.join(", "))
}

fn criterion_10() -> Outcome {
    let mut r = rng(110);
    let mut checked = 0;
    let mut converged = 0;
    let mut worst_orth: f64 = 0.0;
    let mut worst_ray: f64 = 0.0;
    while checked < 20 {
        let mut d = [r.random_range(0.1..1.0), r.random_range(0.1..1.0), r.random_range(0.1..3.0)];
        d.sort_by(f64::total_cmp);
        let [d12, d13, d23] = d;
        if d23 <= d12 + d13 + 0.05 {
            continue;
        }
        checked += 1;
        let (q, u) = random_basis_operator(&[d12, d13, d23], 3, &mut r);
        let rec = minimize_deficit(&q.into_dense(), &MinimizeOptions::default(), &mut r).unwrap();
        if rec.deficit >= -1e-6 || !rec.residual.is_some_and(|res| res < CONVERGED_RESIDUAL) {
            continue;
        }
        converged += 1;
        worst_orth = worst_orth.max(rec.z.overlap(&rec.x)).max(rec.z.overlap(&rec.y));
        let col = |k: usize| StateVector::normalized(u.column(k).into_owned()).unwrap();
        let (u1, u2, u3) = (col(0), col(1), col(2));
        // Distance to the ray, 1 - |<a, b>|, for the best assignment of {x, y}.
        let gap = |a: &StateVector, b: &StateVector| 1.0 - a.overlap(b);
        let pair = (gap(&rec.x, &u2).max(gap(&rec.y, &u3))).min(gap(&rec.x, &u3).max(gap(&rec.y, &u2)));
        worst_ray = worst_ray.max(pair.max(gap(&rec.z, &u1)));
    }
    (
        converged == checked && worst_orth < ORTHOGONALITY_TOL && worst_ray < RAY_TOL,
        format!("{converged}/{checked} converged, max |<z,x>|,|<z,y>| = {worst_orth:.1e}, max ray gap {worst_ray:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("n=3 closed form via the minimizer", criterion_1),
        ("Euclidean-induced operators are triangular", criterion_2),
        ("reducible operators are triangular", criterion_3),
        ("square l1 operator passes the spectral test", criterion_4),
        ("Monte Carlo table at desk scale", criterion_5),
        ("Schoenberg matrices", criterion_6),
        ("two-angle lemma", criterion_7),
        ("gradient against finite differences", criterion_8),
        ("structure properties", criterion_9),
        ("geometry of violating minima", criterion_10),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check();
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2}: {} {name} ({detail}) [{:.1}s]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
