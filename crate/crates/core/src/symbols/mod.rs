//! Symbols in `z, z̄`, their exact derivatives, and class certification.

mod certify;
mod expr;
mod parse;
pub mod profile;
mod symbol;
mod tape;

pub use certify::{
    alpha_key, check_order_function, check_symbol_class, Certificate, SampleGrid, Witness,
    DEFAULT_CERT_LEVELS, STABILITY_FACTOR,
};
pub use expr::{Node, SymbolExpr, Var};
pub use parse::parse_symbol;
pub use symbol::{scale_symbol, OrderFunction, Symbol, SymbolSpec};
pub use tape::Tape;
