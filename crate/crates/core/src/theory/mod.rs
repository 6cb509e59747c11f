//! Candidate test functions, certified inf-sup bounds and the battery of
//! measured operator estimates.

pub mod certify;
pub mod fit;
pub mod pairing;
pub mod props;
pub mod test_functions;

pub use certify::{measure_certified_inf_sup, CertifiedInfSup};
pub use props::{verify_all, verify_proposition, PropositionReport, VerifyOptions, PROPOSITION_IDS};
pub use test_functions::{
    appendix_term_decomposition, candidate_test_function_appendix, candidate_test_function_main,
    AppendixDecomposition, RecipeMode, TestFunctionRecipe,
};
