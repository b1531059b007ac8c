//! Almost-analytic extensions, Helffer–Sjöstrand calculus, resolvent symbols
//! and parametrices.

mod extension;
mod funcalc;
mod hs;
mod resolvent;

pub use extension::{
    build_almost_analytic_extension, default_decay_heights, AlmostAnalyticExtension, ChiShape,
    ChiSpec, DbarDecay, ExtensionKind, TAIL_TOLERANCE,
};
pub use funcalc::{functional_calculus_symbol, FuncalcHypotheses, FuncalcSymbol};
pub use hs::{
    hermitian_eigenvalues, hs_function_of_matrix, hs_function_of_operator,
    spectral_function_oracle, tridiagonalize, ErrorBudget, HsResult, HsSpec, Tridiagonal,
    HERMITIAN_TOLERANCE,
};
pub use resolvent::{
    parametrix_symbol, resolvent_symbol, verify_resolvent_bound, Parametrix, ResolventBound,
};
