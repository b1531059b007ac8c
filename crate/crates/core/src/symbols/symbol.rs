use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expr::SymbolExpr;
use super::parse::parse_symbol;
use super::profile::DEFAULT_PROFILE_CAP;
use crate::error::{Error, Result};

/// An `N`-dependent symbol `N^power · expr_N`.
///
/// `expr` may itself contain `N^ρ` factors. With `concentrate` set, the
/// function is replaced by `z ↦ expr(N^δ z)` at each level, which produces
/// the derivative growth `N^{δ|α|}` of the exotic classes.
#[derive(Clone, Debug)]
pub struct Symbol {
    pub expr: SymbolExpr,
    pub delta: f64,
    pub power: f64,
    pub concentrate: bool,
    pub max_derivative_order: u32,
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if (0.0..0.5).contains(&delta) {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

impl Symbol {
    pub fn new(expr: SymbolExpr) -> Self {
        Self {
            expr,
            delta: 0.0,
            power: 0.0,
            concentrate: false,
            max_derivative_order: DEFAULT_PROFILE_CAP,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(parse_symbol(text)?))
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        self.delta = delta;
        Ok(self)
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    pub fn concentrated(mut self, on: bool) -> Self {
        self.concentrate = on;
        self
    }

    pub fn with_max_derivative_order(mut self, order: u32) -> Self {
        self.max_derivative_order = order;
        self
    }

    /// The concrete function at level `n`.
    pub fn at_level(&self, n: usize) -> SymbolExpr {
        let nf = n as f64;
        let mut e = self.expr.instantiate(nf);
        if self.concentrate && self.delta > 0.0 {
            e = e.dilate(nf.powf(-self.delta));
        }
        if self.power != 0.0 {
            e = SymbolExpr::real(nf.powf(self.power)) * e;
        }
        e
    }

    /// Support radius at level `n` (bounded supports shrink under concentration).
    pub fn support_radius(&self, n: usize) -> Option<f64> {
        self.at_level(n).support_radius()
    }

    pub fn is_real(&self) -> bool {
        self.expr.is_conjugation_symmetric()
    }
}

impl From<SymbolExpr> for Symbol {
    fn from(expr: SymbolExpr) -> Self {
        Symbol::new(expr)
    }
}

/// Order-function candidate `m`, positive on the sample grid.
#[derive(Clone, Debug)]
pub struct OrderFunction {
    pub expr: SymbolExpr,
    pub delta: f64,
    pub certificate: Option<(f64, u32)>,
}

impl OrderFunction {
    pub fn new(expr: SymbolExpr, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self {
            expr,
            delta,
            certificate: None,
        })
    }

    pub fn one() -> Self {
        Self {
            expr: SymbolExpr::one(),
            delta: 0.0,
            certificate: None,
        }
    }

    pub fn at_level(&self, n: usize) -> SymbolExpr {
        self.expr.instantiate(n as f64)
    }
}

/// Serialized form of a symbol, used in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub expr: String,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub power: f64,
    #[serde(default)]
    pub concentrate: bool,
}

impl SymbolSpec {
    pub fn build(&self) -> Result<Symbol> {
        Ok(Symbol::parse(&self.expr)?
            .with_delta(self.delta)?
            .with_power(self.power)
            .concentrated(self.concentrate))
    }
}

/// `f = N^δ g` and the order function `m = N^{2δ} g + 1`.
///
/// `g` must be non-negative; this is checked on a 41×41 grid covering its
/// support (or `[-2, 2]²` when unbounded).
pub fn scale_symbol(g: &SymbolExpr, delta: f64) -> Result<(Symbol, OrderFunction)> {
    check_delta(delta)?;
    let half = g.support_radius().map(|r| r.max(1e-3)).unwrap_or(2.0);
    let tape = super::tape::Tape::compile(&g.instantiate(1.0));
    let n = 41;
    for i in 0..n {
        for j in 0..n {
            let z = Complex64::new(
                -half + 2.0 * half * i as f64 / (n - 1) as f64,
                -half + 2.0 * half * j as f64 / (n - 1) as f64,
            );
            let v = tape.eval(z);
            if v.re < -1e-14 || v.im.abs() > 1e-12 {
                return Err(Error::NegativeSeed {
                    value: v.re,
                    re: z.re,
                    im: z.im,
                });
            }
        }
    }
    let f = Symbol::new(g.clone()).with_delta(delta)?.with_power(delta);
    let m = OrderFunction::new(
        SymbolExpr::level(2.0 * delta) * g.clone() + SymbolExpr::one(),
        delta,
    )?;
    Ok((f, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_zero_collapse() {
        let g = parse_symbol("bump(0, 1)").unwrap();
        let (f, m) = scale_symbol(&g, 0.0).unwrap();
        assert_eq!(f.at_level(50), g);
        let z = Complex64::new(0.2, 0.1);
        assert!((m.at_level(50).eval(z) - (g.eval(z) + 1.0)).norm() < 1e-15);
    }

    #[test]
    fn quarter_delta_at_hundred() {
        let g = parse_symbol("bump(0, 1)").unwrap();
        let (f, m) = scale_symbol(&g, 0.25).unwrap();
        let origin = Complex64::new(0.0, 0.0);
        assert!((m.at_level(100).eval(origin).re - 11.0).abs() < 1e-12);
        assert!((f.at_level(100).eval(origin).re - 100f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_seed_and_bad_delta() {
        let g = parse_symbol("bump(0, 1) - 0.5").unwrap();
        assert!(matches!(
            scale_symbol(&g, 0.1),
            Err(Error::NegativeSeed { .. })
        ));
        let ok = parse_symbol("bump(0, 1)").unwrap();
        assert!(matches!(
            scale_symbol(&ok, 0.5),
            Err(Error::DeltaOutOfRange(_))
        ));
        assert!(matches!(
            scale_symbol(&ok, -0.1),
            Err(Error::DeltaOutOfRange(_))
        ));
    }

    #[test]
    fn concentration_shrinks_support() {
        let f = Symbol::parse("bump(0, 1)")
            .unwrap()
            .with_delta(0.25)
            .unwrap()
            .concentrated(true);
        assert!((f.support_radius(16).unwrap() - 0.5).abs() < 1e-15);
    }
}
