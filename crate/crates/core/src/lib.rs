//! Triangle inequality for semi-distances induced by operators on the
//! exterior square of a finite-dimensional Hilbert space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub mod cli;
pub mod distmat;
pub mod error;
pub mod harness;
pub mod hermitian;
pub mod rng;
pub mod semimetrics;
pub mod triangular;
pub mod trig_lemma;
pub mod wedge;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub use distmat::{DistanceMatrix, Validity};
pub use error::{Error, Result};
pub use hermitian::HermitianMatrix;
pub use semimetrics::{hs_distance, semidistance, WedgeOperatorQ};
pub use wedge::{wedge, Bivector, PairIndexMap, StateVector};
