//! Monte Carlo search for triangle-inequality violations of the quantum
//! 2-Wasserstein semi-distance: random distance matrices, random triples,
//! and the summary table over dimensions.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distmat::{from_points, DistanceMatrix, NormExponent, PointCloud};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::semimetrics::WedgeOperatorQ;
use crate::triangular::{deficit_raw, DeficitRecord};
use crate::wedge::{haar_orthonormal_triple, haar_random_state, StateVector};
use crate::CVector;

/// Default violation threshold.
pub const DEFAULT_TOL: f64 = 1e-13;
/// Draws of a single entry after which the partial matrix is discarded.
pub const MAX_DRAWS_PER_ENTRY: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmatMode {
    RandomUniform,
    LinfPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorMode {
    Haar,
    Orthonormal,
}

impl fmt::Display for DmatMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DmatMode::RandomUniform => "random-uniform",
            DmatMode::LinfPoints => "linf-points",
        })
    }
}

impl fmt::Display for VectorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VectorMode::Haar => "haar",
            VectorMode::Orthonormal => "orthonormal",
        })
    }
}

impl FromStr for DmatMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-uniform" | "random" => Ok(DmatMode::RandomUniform),
            "linf-points" | "linf" => Ok(DmatMode::LinfPoints),
            other => Err(Error::Parse(format!("unknown distance-matrix mode '{other}'"))),
        }
    }
}

impl FromStr for VectorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(VectorMode::Haar),
            "orthonormal" => Ok(VectorMode::Orthonormal),
            other => Err(Error::Parse(format!("unknown vector mode '{other}'"))),
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub dim: usize,
    pub num_dmats: usize,
    pub triples_per_dmat: usize,
    pub dmat_mode: DmatMode,
    pub vector_mode: VectorMode,
    pub seed: u64,
    pub tol: f64,
    /// Debug switch: overwrite `d12 = d13 = 1`, `d23 = 3` in every matrix.
    #[serde(default, skip_serializing_if = "is_false")]
    pub plant_violation: bool,
}

impl TrialConfig {
    pub fn new(dim: usize, dmat_mode: DmatMode, vector_mode: VectorMode, seed: u64) -> Self {
        Self {
            dim,
            num_dmats: 100,
            triples_per_dmat: 1000,
            dmat_mode,
            vector_mode,
            seed,
            tol: DEFAULT_TOL,
            plant_violation: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::DimensionTooSmall { min: 3, found: self.dim });
        }
        if self.num_dmats == 0 {
            return Err(Error::OutOfRange { name: "num_dmats", value: 0.0 });
        }
        if self.triples_per_dmat == 0 {
            return Err(Error::OutOfRange { name: "triples_per_dmat", value: 0.0 });
        }
        if !(self.tol > 0.0) {
            return Err(Error::OutOfRange { name: "tol", value: self.tol });
        }
        Ok(())
    }
}

/// Bookkeeping of the rejection sampler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionStats {
    /// Partial matrices discarded because an entry had no admissible value.
    pub restarts: usize,
    /// Draws spent on each upper-triangle entry of the returned matrix, in
    /// lexicographic order.
    pub draws: Vec<usize>,
}

/// Uniform `[0, 1]` entries drawn in lexicographic order; each entry is
/// redrawn until it satisfies every triangle inequality whose other two
/// sides are already drawn. A partial matrix whose next entry has an empty
/// admissible interval, or needs more than [`MAX_DRAWS_PER_ENTRY`] draws, is
/// discarded and the matrix restarted.
pub fn random_distance_matrix_with_stats<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(DistanceMatrix, RejectionStats)> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { min: 3, found: n });
    }
    let mut restarts = 0;
    'attempt: loop {
        let mut d = DMatrix::<f64>::zeros(n, n);
        let mut draws = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                // Pairs before (i, j) in lexicographic order close a triangle
                // with (i, j) only through vertices k < i.
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for k in 0..i {
                    lo = lo.max((d[(k, i)] - d[(k, j)]).abs());
                    hi = hi.min(d[(k, i)] + d[(k, j)]);
                }
                if lo > hi {
                    restarts += 1;
                    continue 'attempt;
                }
                let mut count = 0;
                let v = loop {
                    count += 1;
                    let u: f64 = rng.random();
                    if (lo..=hi).contains(&u) {
                        break u;
                    }
                    if count >= MAX_DRAWS_PER_ENTRY {
                        restarts += 1;
                        continue 'attempt;
                    }
                };
                draws.push(count);
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        return Ok((DistanceMatrix::new(d)?, RejectionStats { restarts, draws }));
    }
}

pub fn random_distance_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DistanceMatrix> {
    Ok(random_distance_matrix_with_stats(n, rng)?.0)
}

/// `n` points uniform in `[0, 1]^{2n}` under the sup norm.
pub fn linf_cloud<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointCloud> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { min: 3, found: n });
    }
    let points = (0..n).map(|_| (0..2 * n).map(|_| rng.random::<f64>()).collect()).collect();
    PointCloud::new(points, NormExponent::Infinity)
}

/// Sup-norm distances between `n` uniform points of `[0, 1]^{2n}`.
pub fn linf_distance_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DistanceMatrix> {
    Ok(from_points(&linf_cloud(n, rng)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: TrialConfig,
    pub samples: usize,
    pub min_deficit: f64,
    pub argmin: Option<DeficitRecord>,
    /// Distance matrix of the operator at which `argmin` was found.
    pub argmin_dmat: Option<DistanceMatrix>,
    pub violations: usize,
    /// Whole-matrix restarts of the rejection sampler.
    pub dmat_restarts: usize,
    pub interrupted: bool,
    pub wall_time_s: f64,
}

impl SearchReport {
    pub const CSV_HEADER: &'static str = "dim,mode,vector_mode,samples,min_deficit,violations,seed,wall_time_s";

    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{},{},{},{:e},{},{},{:.3}",
            c.dim, c.dmat_mode, c.vector_mode, self.samples, self.min_deficit, self.violations, c.seed, self.wall_time_s
        )
    }
}

struct DmatResult {
    index: usize,
    dmat: DistanceMatrix,
    best: (usize, f64, [CVector; 3]),
    violations: usize,
    restarts: usize,
}

fn draw_dmat(config: &TrialConfig, index: usize) -> Result<(DistanceMatrix, usize)> {
    let mut r = substream(config.seed, &[0, index as u64]);
    let (dmat, restarts) = match config.dmat_mode {
        DmatMode::RandomUniform => {
            let (d, stats) = random_distance_matrix_with_stats(config.dim, &mut r)?;
            (d, stats.restarts)
        }
        DmatMode::LinfPoints => (linf_distance_matrix(config.dim, &mut r)?, 0),
    };
    if !config.plant_violation {
        return Ok((dmat, restarts));
    }
    let mut d = dmat.matrix().clone();
    for ((i, j), v) in [((0, 1), 1.0), ((0, 2), 1.0), ((1, 2), 3.0)] {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    Ok((DistanceMatrix::new(d)?, restarts))
}

fn draw_triple(config: &TrialConfig, dmat_index: usize, triple_index: usize) -> [CVector; 3] {
    let mut r = substream(config.seed, &[1, dmat_index as u64, triple_index as u64]);
    let n = config.dim;
    match config.vector_mode {
        VectorMode::Orthonormal => haar_orthonormal_triple(n, &mut r).expect("dim >= 3"),
        VectorMode::Haar => {
            let mut s = || haar_random_state(n, &mut r).expect("dim >= 3").into_inner();
            [s(), s(), s()]
        }
    }
}

fn search_dmat(config: &TrialConfig, index: usize) -> Result<DmatResult> {
    let (dmat, restarts) = draw_dmat(config, index)?;
    let q = WedgeOperatorQ::standard_diagonal(dmat.clone());
    let mut best: Option<(usize, f64, [CVector; 3])> = None;
    let mut violations = 0;
    for t in 0..config.triples_per_dmat {
        let v = draw_triple(config, index, t);
        let f = deficit_raw(&q, &v[0], &v[1], &v[2])?;
        if f < -config.tol {
            violations += 1;
        }
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((t, f, v));
        }
    }
    Ok(DmatResult { index, dmat, best: best.expect("triples_per_dmat >= 1"), violations, restarts })
}

/// Runs the search; stops early (flagging the report as interrupted) once
/// `cancel` is set.
pub fn run_search_with_cancel(config: &TrialConfig, cancel: &AtomicBool) -> Result<SearchReport> {
    config.validate()?;
    let start = Instant::now();
    let results: Vec<Option<Result<DmatResult>>> = (0..config.num_dmats)
        .into_par_iter()
        .map(|i| (!cancel.load(Ordering::Relaxed)).then(|| search_dmat(config, i)))
        .collect();
    let mut done = Vec::with_capacity(results.len());
    for r in results.into_iter().flatten() {
        done.push(r?);
    }
    let interrupted = done.len() < config.num_dmats;
    let violations = done.iter().map(|r| r.violations).sum();
    let dmat_restarts = done.iter().map(|r| r.restarts).sum();
    let samples = done.len() * config.triples_per_dmat;
    let best = done
        .into_iter()
        .min_by(|a, b| a.best.1.total_cmp(&b.best.1).then(a.index.cmp(&b.index)));

    let (min_deficit, argmin, argmin_dmat) = match best {
        None => (f64::NAN, None, None),
        Some(r) => {
            let (_, f, [x, y, z]) = r.best;
            let q = WedgeOperatorQ::standard_diagonal(r.dmat.clone());
            let record = DeficitRecord {
                x: StateVector::normalized(x)?,
                y: StateVector::normalized(y)?,
                z: StateVector::normalized(z)?,
                deficit: f,
                residual: None,
                iterations: 0,
            };
            let recomputed = record.reverify(&q)?;
            if (recomputed - f).abs() > 1e-12 {
                return Err(Error::Verification { reported: f, recomputed });
            }
            (f, Some(record), Some(r.dmat))
        }
    };
    Ok(SearchReport {
        config: config.clone(),
        samples,
        min_deficit,
        argmin,
        argmin_dmat,
        violations,
        dmat_restarts,
        interrupted,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_search(config: &TrialConfig) -> Result<SearchReport> {
    run_search_with_cancel(config, &AtomicBool::new(false))
}

/// One line of the summary table: both distance-matrix modes for one
/// dimension and vector mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub dim: usize,
    pub vector_mode: VectorMode,
    pub samples: usize,
    #[serde(rename = "min_random_D")]
    pub min_random_d: f64,
    #[serde(rename = "min_linf_D")]
    pub min_linf_d: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<TableRow>,
    pub reports: Vec<SearchReport>,
    pub interrupted: bool,
}

impl Table {
    pub const CSV_HEADER: &'static str = "dim,vector_mode,samples,min_random_D,min_linf_D";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{:e},{:e}", r.dim, r.vector_mode, r.samples, r.min_random_d, r.min_linf_d)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableConfig {
    pub dims: Vec<usize>,
    pub num_dmats: usize,
    pub triples_per_dmat: usize,
    pub seed: u64,
    pub tol: f64,
}

/// Runs both distance-matrix modes and both vector modes for every
/// dimension, all with the same master seed.
pub fn reproduce_table(config: &TableConfig, cancel: &AtomicBool) -> Result<Table> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut interrupted = false;
    'dims: for &dim in &config.dims {
        for vector_mode in [VectorMode::Haar, VectorMode::Orthonormal] {
            let mut pair = Vec::with_capacity(2);
            for dmat_mode in [DmatMode::RandomUniform, DmatMode::LinfPoints] {
                let trial = TrialConfig {
                    num_dmats: config.num_dmats,
                    triples_per_dmat: config.triples_per_dmat,
                    tol: config.tol,
                    ..TrialConfig::new(dim, dmat_mode, vector_mode, config.seed)
                };
                let report = run_search_with_cancel(&trial, cancel)?;
                interrupted |= report.interrupted;
                pair.push(report);
            }
            rows.push(TableRow {
                dim,
                vector_mode,
                samples: pair[0].samples,
                min_random_d: pair[0].min_deficit,
                min_linf_d: pair[1].min_deficit,
                violations: pair[0].violations + pair[1].violations,
            });
            reports.extend(pair);
            if interrupted {
                break 'dims;
            }
        }
    }
    Ok(Table { rows, reports, interrupted })
}
