//! Fixed point of the excursion characteristic function, the ℓ recursion,
//! Ψ_q bounds and the non-constancy certificate, all in big-float arithmetic.

pub mod charfunc;
pub mod error;
pub mod model;
pub mod psi;
pub mod scheme;
pub mod table;

pub use charfunc::{
    ell_exact_lattice, ell_recursion, ell_trajectory, fixed_point_depth, phi_fixed_point, phi_sweeps, EllStepper,
};
pub use error::{CertError, Result};
pub use model::{CertModel, Exponent, ModelSpec, ThetaSpec};
pub use psi::{matrix_discrepancy, psi_bound, t_product, t_product_lower_left, Mat2};
pub use scheme::{
    certify_pair, ell_at, evaluate, evaluate_with_ells, Bounds, CertInput, CertResult, Evaluation, RhsForm,
    AGREEMENT_DIGITS,
};
pub use table::{
    format_table, full_table, reproduce_table, s_label, table_betas, TableOptions, TableRow, TABLE_BETAS_2,
    TABLE_BETAS_3, TABLE_HEADER,
};
