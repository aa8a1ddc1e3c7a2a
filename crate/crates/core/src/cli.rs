//! Command-line front end. Exit codes: 0 success, 1 usage or invalid input,
//! 2 a certified triangle-inequality violation, 3 I/O failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::distmat::{embed_points, from_points, hadamard_power, schoenberg_gram, NormExponent, PointCloud};
use crate::error::Error;
use crate::harness::{reproduce_table, run_search_with_cancel, DmatMode, TableConfig, TrialConfig, VectorMode, DEFAULT_TOL};
use crate::hermitian::MatrixRows;
use crate::rng::from_seed;
use crate::semimetrics::{hs_distance, semidistance, WedgeOperatorQ};
use crate::triangular::{
    check_3d_criterion, cone_combine, conjugate_local, extreme_ray_n3, minimize_deficit, mu_closed_form_n3,
    permute_wedge_basis, restriction, sample_subspaces_test, sample_triples_test, sufficient_condition,
    MinimizeOptions, Verdict,
};
use crate::trig_lemma::{f_eval, omega_min, OmegaOptions, TrigParams};
use crate::wedge::{haar_random_unitary, StateVector};
use crate::{CMatrix, DistanceMatrix, Validity};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "wedgetri", version, about = "Operator-induced semi-distances on projective space and their triangle inequality")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Violation tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OperatorArg {
    /// Operator JSON, or a distance-matrix JSON for the standard diagonal operator.
    operator: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise Hilbert-Schmidt distances and semi-distances of a list of vectors.
    Dist {
        /// JSON list of vectors, each a list of [re, im] pairs.
        vectors: PathBuf,
        #[arg(long)]
        operator: Option<PathBuf>,
    },
    /// Check the triangle inequality of a distance matrix.
    ValidateDmat { dmat: PathBuf },
    /// Distance matrix of a CSV point cloud under an l_p norm.
    FromPoints {
        points: PathBuf,
        /// Norm exponent, a number >= 1 or "inf".
        #[arg(long, default_value = "2")]
        p: NormExponent,
    },
    /// Entrywise power of a distance matrix.
    Snowflake {
        dmat: PathBuf,
        #[arg(long)]
        p: f64,
    },
    /// Gram-type matrix of squared distances, its spectrum and rank.
    Schoenberg { dmat: PathBuf },
    /// Euclidean points realizing a distance matrix, when they exist.
    Embed { dmat: PathBuf },
    /// Spectral sufficient condition for triangularity.
    CheckSufficient(OperatorArg),
    /// Restriction criterion on the span of three orthonormal vectors.
    #[command(name = "check-3d")]
    Check3d {
        #[command(flatten)]
        op: OperatorArg,
        /// JSON list of three orthonormal vectors.
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Search random triples (or random 3-dimensional subspaces) for violations.
    SampleTriples {
        #[command(flatten)]
        op: OperatorArg,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, value_enum, default_value = "triples")]
        method: SampleMethod,
    },
    /// Minimize the triangle deficit by projected gradient descent.
    Minimize {
        #[command(flatten)]
        op: OperatorArg,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_steps: usize,
        #[arg(long, default_value_t = 1e-9)]
        grad_tol: f64,
    },
    /// Minimum deficit of a three-dimensional diagonal operator.
    #[command(allow_negative_numbers = true)]
    Mu3 { d12: f64, d13: f64, d23: f64 },
    /// Whether three labels span an extreme ray (d_max = d_a + d_b > 0).
    #[command(name = "extreme-ray3", allow_negative_numbers = true)]
    ExtremeRay3 { d12: f64, d13: f64, d23: f64 },
    /// Sum of two operators.
    Combine { first: PathBuf, second: PathBuf },
    /// Conjugate an operator by the local unitary U on each factor.
    Conjugate {
        #[command(flatten)]
        op: OperatorArg,
        /// Unitary as rows of [re, im] pairs; a Haar-random one when omitted.
        #[arg(long)]
        unitary: Option<PathBuf>,
    },
    /// Exchange the eigenvalues of two wedge basis vectors (pairs are 1-based, e.g. 1,3).
    SwapBasis {
        #[command(flatten)]
        op: OperatorArg,
        #[arg(long, value_parser = parse_pair)]
        first: (usize, usize),
        #[arg(long, value_parser = parse_pair)]
        second: (usize, usize),
    },
    /// Minimum of the two-angle function F(a, b, t, theta, phi).
    LemmaA {
        a: f64,
        b: f64,
        t: f64,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long, default_value_t = 400)]
        refine: usize,
        /// Evaluate F at these angles instead of minimizing.
        #[arg(long, requires = "phi")]
        theta: Option<f64>,
        #[arg(long, requires = "theta")]
        phi: Option<f64>,
    },
    /// Monte Carlo search over random distance matrices and random triples.
    Search {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        dmats: usize,
        #[arg(long, default_value_t = 1000)]
        triples: usize,
        #[arg(long, value_enum, default_value = "random-uniform")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "orthonormal")]
        vector_mode: VectorArg,
        #[arg(long, hide = true)]
        plant_violation: bool,
    },
    /// Summary table of minima over a range of dimensions.
    ReproduceTable {
        /// Inclusive range such as 3..11, or a comma list.
        #[arg(long, default_value = "3..11", value_parser = parse_dims)]
        dims: DimList,
        #[arg(long, default_value_t = 100)]
        dmats: usize,
        #[arg(long, default_value_t = 1000)]
        triples: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleMethod {
    Triples,
    Subspaces,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    RandomUniform,
    LinfPoints,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VectorArg {
    Haar,
    Orthonormal,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'i,j', got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    let (i, j) = (parse(a)?, parse(b)?);
    if i == 0 || j == 0 {
        return Err("pair indices are 1-based".into());
    }
    Ok((i - 1, j - 1))
}

#[derive(Debug, Clone)]
struct DimList(Vec<usize>);

fn parse_dims(s: &str) -> Result<DimList, String> {
    parse_dim_list(s).map(DimList)
}

fn parse_dim_list(s: &str) -> Result<Vec<usize>, String> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    if let Some((a, b)) = s.split_once("..") {
        let (lo, hi) = (parse(a)?, parse(b.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty range '{s}'"));
        }
        Ok((lo..=hi).collect())
    } else {
        s.split(',').map(parse).collect()
    }
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_reader(open(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_operator(path: &Path) -> Result<WedgeOperatorQ, Failure> {
    let value: serde_json::Value = read_json(path)?;
    let bad = |e: serde_json::Error| Failure::Input(format!("{}: {e}", path.display()));
    if value.get("form").is_some() {
        serde_json::from_value(value).map_err(bad)
    } else {
        Ok(WedgeOperatorQ::standard_diagonal(serde_json::from_value(value).map_err(bad)?))
    }
}

fn read_vectors(path: &Path) -> Result<Vec<StateVector>, Failure> {
    read_json(path)
}

struct Output {
    format: Format,
    out: Option<PathBuf>,
}

impl Output {
    fn sink(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(p) => Box::new(File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn text(&self, s: &str) -> Result<(), Failure> {
        let mut w = self.sink()?;
        writeln!(w, "{s}")?;
        w.flush()?;
        Ok(())
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<(), Failure> {
        let s = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
        self.text(&s)
    }

    /// JSON by default, or the given CSV lines.
    fn report<T: Serialize>(&self, value: &T, csv: impl FnOnce() -> Vec<String>) -> Result<(), Failure> {
        match self.format {
            Format::Json => self.json(value),
            Format::Csv => self.text(&csv().join("\n")),
        }
    }
}

fn matrix_csv(m: &nalgebra::DMatrix<f64>) -> Vec<String> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        .collect()
}

fn validity_csv(v: &Validity) -> Vec<String> {
    let mut lines = vec!["status,i,j,k,margin".to_string()];
    lines.push(match v {
        Validity::Valid => "valid,,,,".to_string(),
        Validity::Violated { witness: w } => format!("violated,{},{},{},{}", w.i + 1, w.j + 1, w.k + 1, w.margin),
    });
    lines
}

static CANCEL: AtomicBool = AtomicBool::new(false);

/// Ctrl-C stops scheduling new work; finished work is still reported.
fn install_interrupt_handler() -> &'static AtomicBool {
    let _ = ctrlc::set_handler(|| CANCEL.store(true, Ordering::SeqCst));
    &CANCEL
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // A second initialization attempt in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            EXIT_IO
        }
    }
}

fn execute(cli: Cli) -> CmdResult {
    let default_format = match cli.command {
        Command::Search { .. } | Command::ReproduceTable { .. } => Format::Csv,
        _ => Format::Json,
    };
    let out = Output { format: cli.format.unwrap_or(default_format), out: cli.out };
    let seed = cli.seed;
    let mut rng = from_seed(seed);
    let tol_or = |default: f64| cli.tol.unwrap_or(default);
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(Failure::Input(format!("--tol must be positive, got {t}")));
        }
    }

    match cli.command {
        Command::Dist { vectors, operator } => {
            let vs = read_vectors(&vectors)?;
            let op = operator.as_deref().map(read_operator).transpose()?;
            let mut rows = Vec::new();
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    let hs = hs_distance(&vs[i], &vs[j])?;
                    let sd = op.as_ref().map(|q| semidistance(q, &vs[i], &vs[j])).transpose()?;
                    rows.push(json!({"i": i + 1, "j": j + 1, "hs": hs, "semidistance": sd}));
                }
            }
            out.report(&rows, || {
                let mut lines = vec!["i,j,hs,semidistance".to_string()];
                for r in &rows {
                    let sd = r["semidistance"].as_f64().map(|v| v.to_string()).unwrap_or_default();
                    lines.push(format!("{},{},{},{}", r["i"], r["j"], r["hs"], sd));
                }
                lines
            })?;
            Ok(EXIT_OK)
        }
        Command::ValidateDmat { dmat } => {
            let d: DistanceMatrix = read_json(&dmat)?;
            let v = d.validity();
            out.report(&v, || validity_csv(&v))?;
            if let Validity::Violated { witness } = &v {
                eprintln!("violated: {witness}");
                return Ok(EXIT_VIOLATION);
            }
            Ok(EXIT_OK)
        }
        Command::FromPoints { points, p } => {
            let cloud = PointCloud::from_csv(open(&points)?, p)?;
            let d = from_points(&cloud);
            out.report(&d, || matrix_csv(d.matrix()))?;
            Ok(EXIT_OK)
        }
        Command::Snowflake { dmat, p } => {
            let d: DistanceMatrix = read_json(&dmat)?;
            let s = hadamard_power(&d, p)?;
            out.report(&json!({"dmat": &s, "validity": s.validity()}), || matrix_csv(s.matrix()))?;
            Ok(EXIT_OK)
        }
        Command::Schoenberg { dmat } => {
            let d: DistanceMatrix = read_json(&dmat)?;
            let g = schoenberg_gram(&d);
            out.report(&json!({"gram": &g, "determinant": g.determinant()}), || matrix_csv(&g.a))?;
            Ok(EXIT_OK)
        }
        Command::Embed { dmat } => {
            let d: DistanceMatrix = read_json(&dmat)?;
            let e = embed_points(&d);
            out.json(&e)?;
            Ok(EXIT_OK)
        }
        Command::CheckSufficient(op) => {
            let q = read_operator(&op.operator)?;
            let c = sufficient_condition(&q);
            out.report(&c, || {
                let sig = c.sigma.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
                vec!["certified,sigma".into(), format!("{},{sig}", c.certified)]
            })?;
            Ok(EXIT_OK)
        }
        Command::Check3d { op, vectors } => {
            let q = read_operator(&op.operator)?;
            let vs = read_vectors(&vectors)?;
            if vs.len() != 3 {
                return Err(Failure::Input(format!("expected 3 vectors, found {}", vs.len())));
            }
            let f = restriction(&q, &vs[0], &vs[1], &vs[2])?;
            let c = check_3d_criterion(&f)?;
            let restricted = MatrixRows::from(f.matrix());
            out.report(&json!({"restriction": restricted, "eigenvalues": c.eigenvalues, "holds": c.holds}), || {
                let l = c.eigenvalues;
                vec!["holds,lambda1,lambda2,lambda3".into(), format!("{},{},{},{}", c.holds, l[0], l[1], l[2])]
            })?;
            Ok(if c.holds { EXIT_OK } else { EXIT_VIOLATION })
        }
        Command::SampleTriples { op, count, method } => {
            let q = read_operator(&op.operator)?;
            let tol = tol_or(1e-12);
            let rep = match method {
                SampleMethod::Triples => sample_triples_test(&q, count, &mut rng, tol)?,
                SampleMethod::Subspaces => sample_subspaces_test(&q, count, &mut rng, tol)?,
            };
            out.report(&rep, || {
                let worst = rep.worst.as_ref().map(|w| w.deficit.to_string()).unwrap_or_default();
                vec![
                    "method,verdict,samples,worst_deficit,tolerance".into(),
                    format!("{:?},{:?},{},{worst},{}", rep.method, rep.verdict, rep.samples, rep.tolerance),
                ]
            })?;
            Ok(if rep.verdict == Verdict::CertifiedNot { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::Minimize { op, restarts, max_steps, grad_tol } => {
            let q = read_operator(&op.operator)?;
            let opts = MinimizeOptions { restarts, max_steps, grad_tol };
            let rec = minimize_deficit(&q, &opts, &mut rng)?;
            let tol = tol_or(1e-12);
            let violated = rec.deficit < -tol && rec.reverify(&q)? < -tol;
            out.report(&rec, || {
                let res = rec.residual.map(|r| r.to_string()).unwrap_or_default();
                vec!["deficit,residual,iterations".into(), format!("{},{res},{}", rec.deficit, rec.iterations)]
            })?;
            Ok(if violated { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::Mu3 { d12, d13, d23 } => {
            out.text(&mu_closed_form_n3(d12, d13, d23)?.to_string())?;
            Ok(EXIT_OK)
        }
        Command::ExtremeRay3 { d12, d13, d23 } => {
            out.text(&extreme_ray_n3(d12, d13, d23)?.to_string())?;
            Ok(EXIT_OK)
        }
        Command::Combine { first, second } => {
            let q = cone_combine(&read_operator(&first)?, &read_operator(&second)?)?;
            out.json(&q)?;
            Ok(EXIT_OK)
        }
        Command::Conjugate { op, unitary } => {
            let q = read_operator(&op.operator)?;
            let u = match unitary {
                Some(path) => CMatrix::try_from(read_json::<MatrixRows>(&path)?)?,
                None => haar_random_unitary(q.n(), &mut rng)?,
            };
            out.json(&conjugate_local(&q, &u)?)?;
            Ok(EXIT_OK)
        }
        Command::SwapBasis { op, first, second } => {
            let q = read_operator(&op.operator)?;
            out.json(&permute_wedge_basis(&q, first, second)?)?;
            Ok(EXIT_OK)
        }
        Command::LemmaA { a, b, t, grid, refine, theta, phi } => {
            if let (Some(theta), Some(phi)) = (theta, phi) {
                let p = TrigParams::new(a, b, t, theta, phi)?;
                out.text(&f_eval(&p).to_string())?;
            } else {
                let m = omega_min(a, b, t, &OmegaOptions { grid, refine })?;
                out.report(&m, || vec!["value,theta,phi".into(), format!("{},{},{}", m.value, m.theta, m.phi)])?;
            }
            Ok(EXIT_OK)
        }
        Command::Search { dim, dmats, triples, mode, vector_mode, plant_violation } => {
            let config = TrialConfig {
                num_dmats: dmats,
                triples_per_dmat: triples,
                tol: tol_or(DEFAULT_TOL),
                plant_violation,
                ..TrialConfig::new(dim, dmat_mode(mode), vector_mode_of(vector_mode), seed)
            };
            let cancel = install_interrupt_handler();
            let rep = run_search_with_cancel(&config, cancel)?;
            out.report(&rep, || vec![crate::harness::SearchReport::CSV_HEADER.into(), rep.csv_row()])?;
            if rep.interrupted {
                eprintln!("interrupted: partial report over {} samples", rep.samples);
            }
            Ok(if rep.violations > 0 { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::ReproduceTable { dims, dmats, triples } => {
            let config = TableConfig { dims: dims.0, num_dmats: dmats, triples_per_dmat: triples, seed, tol: tol_or(DEFAULT_TOL) };
            let cancel = install_interrupt_handler();
            let table = reproduce_table(&config, cancel)?;
            match out.format {
                Format::Json => out.json(&table)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    let mut w = out.sink()?;
                    w.write_all(&buf)?;
                    w.flush()?;
                }
            }
            if table.interrupted {
                eprintln!("interrupted: partial table");
            }
            let violations: usize = table.rows.iter().map(|r| r.violations).sum();
            Ok(if violations > 0 { EXIT_VIOLATION } else { EXIT_OK })
        }
    }
}

fn dmat_mode(m: ModeArg) -> DmatMode {
    match m {
        ModeArg::RandomUniform => DmatMode::RandomUniform,
        ModeArg::LinfPoints => DmatMode::LinfPoints,
    }
}

fn vector_mode_of(v: VectorArg) -> VectorMode {
    match v {
        VectorArg::Haar => VectorMode::Haar,
        VectorArg::Orthonormal => VectorMode::Orthonormal,
    }
}
