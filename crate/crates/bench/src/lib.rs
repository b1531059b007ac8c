//! Fixtures shared by the benchmarks.

use toeplitz_core::toeplitz::{assemble, ToeplitzMatrix};
use toeplitz_core::{
    build_basis, build_quadrature, ModelGeometry, QuadratureRule, QuadratureSpec, QuantumBasis,
    Symbol,
};

pub const BUMP: &str = "bump(0, 1.2)*exp(-5*z*conj(z))";
pub const HEIGHT_PLUS_TWO: &str = "(1 - z*conj(z))/(1 + z*conj(z)) + 2";

pub struct Fixture {
    pub basis: QuantumBasis,
    pub rule: QuadratureRule,
    pub symbol: Symbol,
}

impl Fixture {
    pub fn new(geometry: ModelGeometry, n: usize, symbol: &str) -> Self {
        let symbol = Symbol::parse(symbol).expect("fixture symbol parses");
        let radius = symbol.support_radius(n).unwrap_or(1.0);
        let basis = build_basis(&geometry, n, radius).expect("fixture basis");
        let rule = build_quadrature(&basis, &QuadratureSpec::default()).expect("fixture rule");
        Self {
            basis,
            rule,
            symbol,
        }
    }

    pub fn bargmann(n: usize) -> Self {
        Self::new(ModelGeometry::bargmann(), n, BUMP)
    }

    pub fn projective(n: usize) -> Self {
        Self::new(ModelGeometry::projective_line(), n, HEIGHT_PLUS_TWO)
    }

    pub fn matrix(&self) -> ToeplitzMatrix {
        assemble(&self.symbol, &self.basis, &self.rule).expect("fixture assembles")
    }
}
