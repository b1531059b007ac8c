use num_complex::Complex64;
use serde::Serialize;

use super::extension::ChiSpec;
use crate::error::{Error, Result};
use crate::symbols::{
    check_symbol_class, Certificate, OrderFunction, SampleGrid, Symbol, SymbolExpr, Tape,
    STABILITY_FACTOR,
};

/// Grid evidence for the functional-calculus hypotheses.
#[derive(Clone, Debug, Serialize)]
pub struct FuncalcHypotheses {
    /// `min f` per level.
    pub min_value: Vec<(usize, f64)>,
    /// Smallest `C ≥ 1` with `|f| ≥ m/C - C` on the grid, per level.
    pub ellipticity: Vec<(usize, f64)>,
    pub class: Certificate,
}

#[derive(Clone, Debug)]
pub struct FuncalcSymbol {
    pub f: Symbol,
    pub chi: ChiSpec,
    pub hypotheses: FuncalcHypotheses,
}

impl FuncalcSymbol {
    /// The order-0 prediction `χ ∘ f₀` at level `n`.
    pub fn principal(&self, n: usize) -> SymbolExpr {
        self.chi.compose(&self.f.at_level(n))
    }
}

fn sample(e: &SymbolExpr, pts: &[Complex64]) -> Vec<Complex64> {
    let tape = Tape::compile(e);
    let mut buf = Vec::new();
    pts.iter()
        .map(|z| tape.eval_with(*z, z.conj(), &mut buf))
        .collect()
}

/// Certifies `f ≥ 0`, `m ≥ 1`, `|f| ≥ C⁻¹m - C` and `f ∈ S_δ(m)` on the grid and
/// returns the principal symbol `χ ∘ f₀`. Uncertified inputs are refused.
pub fn functional_calculus_symbol(
    f: &Symbol,
    m: &OrderFunction,
    chi: ChiSpec,
    levels: &[usize],
    grid: &SampleGrid,
) -> Result<FuncalcSymbol> {
    if levels.is_empty() {
        return Err(Error::Config(
            "certification needs at least one level".into(),
        ));
    }
    let pts = grid.nodes();
    let mut min_value = Vec::new();
    let mut ellipticity = Vec::new();
    for &n in levels {
        let fv = sample(&f.at_level(n), &pts);
        let mv = sample(&m.at_level(n), &pts);
        let mut lo = f64::INFINITY;
        let mut c = 1.0f64;
        for (k, (a, b)) in fv.iter().zip(&mv).enumerate() {
            let z = pts[k];
            if !a.is_finite() || a.im.abs() > 1e-12 * a.re.abs().max(1.0) {
                return Err(Error::Hypothesis(format!(
                    "f is not real-valued at {z} (N = {n})"
                )));
            }
            if b.re < 1.0 - 1e-12 {
                return Err(Error::Hypothesis(format!(
                    "order function m = {:.3e} < 1 at {z} (N = {n})",
                    b.re
                )));
            }
            lo = lo.min(a.re);
            // C² + |f|C - m ≥ 0
            let fa = a.re.abs();
            c = c.max(0.5 * (-fa + (fa * fa + 4.0 * b.re).sqrt()));
        }
        if lo < -1e-12 {
            return Err(Error::Hypothesis(format!(
                "f takes the negative value {lo:.3e} (N = {n})"
            )));
        }
        min_value.push((n, lo));
        ellipticity.push((n, c));
    }
    if let [.., (_, prev), (n, last)] = ellipticity[..] {
        if last > STABILITY_FACTOR * prev {
            return Err(Error::Hypothesis(format!(
                "lower bound |f| >= m/C - C needs C growing with N ({prev:.3e} -> {last:.3e} at N = {n})"
            )));
        }
    }
    let class = check_symbol_class(f, m, levels, 2, grid)?;
    if !class.certified {
        return Err(Error::Hypothesis(format!(
            "f is not certified in S_delta(m): {}",
            class.note
        )));
    }
    Ok(FuncalcSymbol {
        f: f.clone(),
        chi,
        hypotheses: FuncalcHypotheses {
            min_value,
            ellipticity,
            class,
        },
    })
}
