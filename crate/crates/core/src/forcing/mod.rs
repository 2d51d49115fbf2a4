//! Density expressions and forcing-constraint verification.

mod expression;
mod moments;
mod polynomial;
mod verify;

pub use expression::{
    evaluate_expression, express_flag_product, express_lambda_integral, express_mu_integral, DensityExpression,
    EvalMode, Evaluation, Measured, EXACT_TAIL_EPSILON,
};
pub use moments::{moment_uniformity_statistic, MomentMode};
pub use polynomial::{integrate_lambda, polynomial_constraint_residual, Poly2, MAX_DEGREE};
pub use verify::{
    reports_csv, square_closed_form_residual, square_integral_mc, verify_monotone_forcing, verify_square_forcing,
    ForcingReport, Tolerances, VerifyConfig, SQUARE_CHECK_BLOCKS, SQUARE_CHECK_GRID,
};
