pub mod calculus;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod quantum;
pub mod semiclassics;
pub mod symbols;
pub mod toeplitz;

pub use error::{Error, Result};
pub use geometry::{ModelGeometry, ModelId};
pub use quantum::{build_basis, build_quadrature, QuadratureRule, QuadratureSpec, QuantumBasis};
pub use symbols::{parse_symbol, OrderFunction, Symbol, SymbolExpr};
