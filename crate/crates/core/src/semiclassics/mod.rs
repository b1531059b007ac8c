//! Star-product coefficients, Poisson brackets and kernel expansions.

mod bidiff;

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, ModelId};
use crate::symbols::profile::DEFAULT_PROFILE_CAP;
use crate::symbols::{SymbolExpr, Var};

pub use bidiff::{bargmann_recursion, BiDiff, Multi};

/// Pairs farther apart than `OFFDIAG_WINDOW / √N` are outside the
/// near-diagonal regime of the off-diagonal expansion.
pub const OFFDIAG_WINDOW: f64 = 4.0;

/// Memoized mixed derivatives of one expression.
pub struct Derivatives {
    base: SymbolExpr,
    cap: u32,
    cache: HashMap<(u32, u32), SymbolExpr>,
}

impl Derivatives {
    pub fn new(base: SymbolExpr, cap: u32) -> Self {
        let mut cache = HashMap::new();
        cache.insert((0, 0), base.clone());
        Self { base, cap, cache }
    }

    pub fn base(&self) -> &SymbolExpr {
        &self.base
    }

    /// `∂^a ∂̄^b` of the base expression.
    pub fn get(&mut self, a: u32, b: u32) -> Result<SymbolExpr> {
        if let Some(e) = self.cache.get(&(a, b)) {
            return Ok(e.clone());
        }
        let out = if b > 0 {
            self.get(a, b - 1)?
                .derivative_capped(Var::ConjZ, self.cap)?
        } else {
            self.get(a - 1, 0)?.derivative_capped(Var::Z, self.cap)?
        };
        self.cache.insert((a, b), out.clone());
        Ok(out)
    }
}

/// Materializes `Σ c ∂^a∂̄^b f · ∂^c∂̄^d g`.
pub fn apply_bidiff(op: &BiDiff, f: &mut Derivatives, g: &mut Derivatives) -> Result<SymbolExpr> {
    let mut terms = Vec::with_capacity(op.terms.len());
    for (&[a, b, c, d], coef) in &op.terms {
        let df = f.get(a, b)?;
        if df.is_zero() {
            continue;
        }
        let dg = g.get(c, d)?;
        if dg.is_zero() {
            continue;
        }
        let c = coef.to_f64().expect("finite rational");
        terms.push(SymbolExpr::product([SymbolExpr::real(c), df, dg]));
    }
    Ok(SymbolExpr::sum(terms))
}

/// `H⁻¹` as an expression: `1` on the plane, `(1 + |z|²)²` on the projective line.
pub fn inverse_metric(geometry: &ModelGeometry) -> SymbolExpr {
    match geometry.model {
        ModelId::BargmannPlane => SymbolExpr::one(),
        ModelId::ProjectiveLine => (SymbolExpr::one() + SymbolExpr::abs2()).powi(2),
    }
}

/// Coefficients `h_0..h_J` of `f ⋆ g`, with bookkeeping.
#[derive(Clone, Debug)]
pub struct StarSeries {
    pub terms: Vec<SymbolExpr>,
    /// Largest derivative orders of `f` and `g` appearing in each `h_j`.
    pub derivative_orders: Vec<(u32, u32)>,
    /// Exponent `2δj` of the class growth of `h_j`.
    pub growth_exponents: Vec<f64>,
}

impl StarSeries {
    /// `Σ_{j≤J} N^{-j} h_j`.
    pub fn truncated_sum(&self, n: usize, order: usize) -> SymbolExpr {
        let nf = n as f64;
        SymbolExpr::sum(
            self.terms
                .iter()
                .take(order + 1)
                .enumerate()
                .map(|(j, h)| SymbolExpr::real(nf.powi(-(j as i32))) * h.clone()),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StarReport {
    pub j: u32,
    pub operator: String,
}

/// `h_j(f, g)` for one `j`. On the projective line only `j ≤ 1` is available.
pub fn star_term(
    f: &SymbolExpr,
    g: &SymbolExpr,
    geometry: &ModelGeometry,
    j: u32,
) -> Result<SymbolExpr> {
    star_term_capped(f, g, geometry, j, DEFAULT_PROFILE_CAP)
}

pub fn star_term_capped(
    f: &SymbolExpr,
    g: &SymbolExpr,
    geometry: &ModelGeometry,
    j: u32,
    cap: u32,
) -> Result<SymbolExpr> {
    match (geometry.model, j) {
        (_, 0) => Ok(f * g),
        (ModelId::BargmannPlane, _) => {
            let ops = bargmann_recursion(j);
            let mut df = Derivatives::new(f.clone(), cap);
            let mut dg = Derivatives::new(g.clone(), cap);
            apply_bidiff(&ops[j as usize], &mut df, &mut dg)
        }
        (ModelId::ProjectiveLine, 1) => {
            let df = f.derivative_capped(Var::Z, cap)?;
            let dg = g.derivative_capped(Var::ConjZ, cap)?;
            Ok(SymbolExpr::product([
                SymbolExpr::real(-1.0),
                inverse_metric(geometry),
                df,
                dg,
            ]))
        }
        (ModelId::ProjectiveLine, _) => Err(Error::Unsupported(format!(
            "star coefficient h_{j} on the projective line (only j <= 1)"
        ))),
    }
}

/// Largest star order available on the geometry.
pub fn max_star_order(geometry: &ModelGeometry) -> Option<u32> {
    match geometry.model {
        ModelId::BargmannPlane => None,
        ModelId::ProjectiveLine => Some(1),
    }
}

/// `h_0..h_J` on the Bargmann plane from the kernel-composition recursion.
pub fn star_series_bargmann(
    f: &SymbolExpr,
    g: &SymbolExpr,
    order: u32,
    delta: f64,
) -> Result<StarSeries> {
    let ops = bargmann_recursion(order);
    let cap = (2 * order).max(DEFAULT_PROFILE_CAP);
    let mut df = Derivatives::new(f.clone(), cap);
    let mut dg = Derivatives::new(g.clone(), cap);
    let mut terms = Vec::with_capacity(ops.len());
    terms.push(f * g);
    for op in ops.iter().skip(1) {
        terms.push(apply_bidiff(op, &mut df, &mut dg)?);
    }
    Ok(StarSeries {
        terms,
        derivative_orders: ops.iter().map(|o| o.max_orders()).collect(),
        growth_exponents: (0..=order).map(|j| 2.0 * delta * j as f64).collect(),
    })
}

/// Star series on any model, up to the available order.
pub fn star_series(
    f: &SymbolExpr,
    g: &SymbolExpr,
    geometry: &ModelGeometry,
    order: u32,
    delta: f64,
) -> Result<StarSeries> {
    if geometry.is_bargmann() {
        return star_series_bargmann(f, g, order, delta);
    }
    let mut terms = Vec::new();
    for j in 0..=order {
        terms.push(star_term(f, g, geometry, j)?);
    }
    Ok(StarSeries {
        derivative_orders: (0..=order).map(|j| (j, j)).collect(),
        growth_exponents: (0..=order).map(|j| 2.0 * delta * j as f64).collect(),
        terms,
    })
}

/// Star product of two `N^{-j}` series, truncated after order `order`.
pub fn star_of_series(
    a: &[SymbolExpr],
    b: &[SymbolExpr],
    geometry: &ModelGeometry,
    order: usize,
) -> Result<Vec<SymbolExpr>> {
    let mut out = vec![Vec::new(); order + 1];
    for (i, ai) in a.iter().enumerate().take(order + 1) {
        if ai.is_zero() {
            continue;
        }
        for (k, bk) in b.iter().enumerate().take(order + 1 - i) {
            if bk.is_zero() {
                continue;
            }
            for c in 0..=(order - i - k) {
                out[i + k + c].push(star_term(ai, bk, geometry, c as u32)?);
            }
        }
    }
    Ok(out.into_iter().map(SymbolExpr::sum).collect())
}

/// `Σ_j N^{-j} a_j` as a single expression.
pub fn sum_series(a: &[SymbolExpr], n: usize) -> SymbolExpr {
    let nf = n as f64;
    SymbolExpr::sum(
        a.iter()
            .enumerate()
            .map(|(j, t)| SymbolExpr::real(nf.powi(-(j as i32))) * t.clone()),
    )
}

/// `{f, g} = (iH)⁻¹ (∂f ∂̄g − ∂g ∂̄f)`.
pub fn poisson_bracket(
    f: &SymbolExpr,
    g: &SymbolExpr,
    geometry: &ModelGeometry,
) -> Result<SymbolExpr> {
    let fz = f.derivative(Var::Z)?;
    let fzb = f.derivative(Var::ConjZ)?;
    let gz = g.derivative(Var::Z)?;
    let gzb = g.derivative(Var::ConjZ)?;
    let inner = &fz * &gzb - &gz * &fzb;
    Ok(SymbolExpr::product([
        SymbolExpr::constant(Complex64::new(0.0, -1.0)),
        inverse_metric(geometry),
        inner,
    ]))
}

/// Predicted `e^{-Nφ(x)} T_{N,f}(x, x̄)`:
/// `(N/2π) Σ_{j≤J} N^{-j} (∂∂̄)^j f / j!` on the plane. The projective line
/// supports `J ≤ 1`, where the first correction is `f + H⁻¹∂∂̄f`.
pub fn diagonal_kernel_expansion(
    f: &SymbolExpr,
    n: usize,
    x: Complex64,
    order: u32,
    geometry: &ModelGeometry,
) -> Result<Complex64> {
    let nf = n as f64;
    let lead = nf / (2.0 * PI);
    match geometry.model {
        ModelId::BargmannPlane => {
            let mut d = Derivatives::new(f.clone(), (2 * order).max(DEFAULT_PROFILE_CAP));
            let mut acc = Complex64::new(0.0, 0.0);
            let mut fact = 1.0;
            for j in 0..=order {
                if j > 0 {
                    fact *= j as f64;
                }
                acc += d.get(j, j)?.eval(x) * (nf.powi(-(j as i32)) / fact);
            }
            Ok(acc * lead)
        }
        ModelId::ProjectiveLine => {
            geometry.potential_at(x)?;
            let f0 = f.eval(x);
            match order {
                0 => Ok(f0 * lead),
                1 => {
                    let lap = f.differentiate(1, 1)?.eval(x) * inverse_metric(geometry).eval(x);
                    Ok((f0 + (f0 + lap) / nf) * lead)
                }
                _ => Err(Error::Unsupported(format!(
                    "diagonal expansion of order {order} on the projective line"
                ))),
            }
        }
    }
}

/// Predicted weighted kernel `e^{-(N/2)(φ(x)+φ(y))} T_{N,f}(x, ȳ)` near the
/// diagonal (Bargmann only). Coefficients are evaluated at `(x, ȳ)` through
/// the polarized extension; bump factors use the real midpoint.
pub fn offdiagonal_kernel_expansion(
    f: &SymbolExpr,
    n: usize,
    x: Complex64,
    y_conj: Complex64,
    order: u32,
    geometry: &ModelGeometry,
) -> Result<Complex64> {
    if !geometry.is_bargmann() {
        return Err(Error::Unsupported(
            "off-diagonal expansion is implemented on the Bargmann plane only".into(),
        ));
    }
    let nf = n as f64;
    let y = y_conj.conj();
    let distance = (x - y).norm();
    let window = OFFDIAG_WINDOW / nf.sqrt();
    if distance > window {
        return Err(Error::OutOfWindow { distance, window });
    }
    let mut d = Derivatives::new(f.clone(), (2 * order).max(DEFAULT_PROFILE_CAP));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut fact = 1.0;
    for j in 0..=order {
        if j > 0 {
            fact *= j as f64;
        }
        acc += d.get(j, j)?.eval_polarized(x, y_conj) * (nf.powi(-(j as i32)) / fact);
    }
    let phase = x * y_conj * nf - 0.5 * nf * (x.norm_sqr() + y.norm_sqr());
    Ok(phase.exp() * (nf / (2.0 * PI)) * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol;

    fn p(s: &str) -> SymbolExpr {
        parse_symbol(s).unwrap()
    }

    fn close_on_grid(a: &SymbolExpr, b: &SymbolExpr, tol: f64) -> bool {
        (0..41).all(|i| {
            (0..41).all(|k| {
                let z = Complex64::new(-1.0 + i as f64 / 20.0, -1.0 + k as f64 / 20.0);
                (a.eval(z) - b.eval(z)).norm() <= tol
            })
        })
    }

    #[test]
    fn star_examples() {
        let g = ModelGeometry::bargmann();
        let s = star_series_bargmann(&p("z*conj(z)"), &p("z*conj(z)"), 1, 0.0).unwrap();
        assert!(close_on_grid(&s.terms[0], &p("(z*conj(z))^2"), 1e-14));
        assert!(close_on_grid(&s.terms[1], &p("-z*conj(z)"), 1e-14));
        let s = star_series_bargmann(&p("z"), &p("conj(z)"), 1, 0.0).unwrap();
        assert!(close_on_grid(&s.terms[1], &p("-1"), 1e-14));
        let s = star_series_bargmann(&p("conj(z)"), &p("z"), 1, 0.0).unwrap();
        assert!(s.terms[1].is_zero());
        let f = p("bump(0, 1)");
        let h = p("z*bump(0.2, 0.5)");
        assert!(close_on_grid(
            &star_term(&f, &h, &g, 1).unwrap(),
            &star_series_bargmann(&f, &h, 1, 0.0).unwrap().terms[1],
            1e-12
        ));
        let c = ModelGeometry::projective_line();
        let want = p("-(1 + z*conj(z))^2*conj(z)*z");
        assert!(close_on_grid(
            &star_term(&p("z*conj(z)"), &p("z*conj(z)"), &c, 1).unwrap(),
            &want,
            1e-12
        ));
        assert!(star_term(&f, &h, &c, 2).is_err());
    }

    #[test]
    fn h0_symmetric_and_bracket_identity() {
        let f = p("bump(0, 1)*z");
        let g = p("bump(0.3, 0.6) + conj(z)");
        for geom in [ModelGeometry::bargmann(), ModelGeometry::projective_line()] {
            let (fg, gf) = (
                star_term(&f, &g, &geom, 0).unwrap(),
                star_term(&g, &f, &geom, 0).unwrap(),
            );
            assert_eq!(fg.canonical_key(), gf.canonical_key());
            let lhs = SymbolExpr::i()
                * (star_term(&f, &g, &geom, 1).unwrap() - star_term(&g, &f, &geom, 1).unwrap());
            assert!(close_on_grid(
                &lhs,
                &poisson_bracket(&f, &g, &geom).unwrap(),
                1e-12
            ));
        }
        let b = ModelGeometry::bargmann();
        assert!(close_on_grid(
            &poisson_bracket(&p("z*conj(z)"), &p("z + conj(z)"), &b).unwrap(),
            &p("i*(z - conj(z))"),
            1e-15
        ));
        assert!(close_on_grid(
            &poisson_bracket(&f, &f, &b).unwrap(),
            &SymbolExpr::zero(),
            0.0
        ));
    }

    #[test]
    fn expansion_special_values() {
        let b = ModelGeometry::bargmann();
        let origin = Complex64::new(0.0, 0.0);
        let v = diagonal_kernel_expansion(&p("z*conj(z)"), 64, origin, 1, &b).unwrap();
        assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let x = Complex64::new(0.2, -0.1);
        let f = p("bump(0, 1)");
        let d0 = diagonal_kernel_expansion(&f, 32, x, 0, &b).unwrap();
        assert!((d0 - f.eval(x) * (32.0 / (2.0 * PI))).norm() < 1e-14);
        let off = offdiagonal_kernel_expansion(&f, 32, x, x.conj(), 2, &b).unwrap();
        assert!((off - diagonal_kernel_expansion(&f, 32, x, 2, &b).unwrap()).norm() < 1e-12);
        assert!(matches!(
            offdiagonal_kernel_expansion(&f, 32, x, (x + 1.0).conj(), 1, &b),
            Err(Error::OutOfWindow { .. })
        ));
        assert!(
            diagonal_kernel_expansion(&f, 32, x, 2, &ModelGeometry::projective_line()).is_err()
        );
    }

    #[test]
    fn series_star_matches_direct() {
        let b = ModelGeometry::bargmann();
        let f = p("bump(0, 1) + 2");
        let g = p("conj(z)*bump(0, 1)");
        let direct = star_series_bargmann(&f, &g, 2, 0.0).unwrap().terms;
        let via = star_of_series(std::slice::from_ref(&f), std::slice::from_ref(&g), &b, 2).unwrap();
        assert!(via
            .iter()
            .zip(&direct)
            .all(|(a, d)| close_on_grid(a, d, 1e-12)));
    }
}
