//! Triangle inequality for operator-induced semi-distances: the deficit
//! functional, its minimization, and certificates for or against
//! triangularity.

mod cone;
mod criteria;
mod deficit;
mod minimize;

pub use cone::{cone_combine, conjugate_local, extreme_ray_n3, mu_closed_form_n3, permute_wedge_basis};
pub use criteria::{
    certify_sufficient, check_3d_criterion, closed_form_report, minimizer_report, restriction, sample_subspaces_test,
    sample_triples_test, sufficient_condition, sufficient_report, Criterion3d, CriterionReport, Method,
    SufficientCertificate, Verdict,
};
pub use deficit::{
    deficit, deficit_gradient, deficit_raw, projected_gradient, stationarity_residual, DeficitRecord,
};
pub use minimize::{minimize_deficit, MinimizeOptions};
