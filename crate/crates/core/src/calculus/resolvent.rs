use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ModelGeometry;
use crate::semiclassics::{max_star_order, star_of_series, sum_series, StarSeries};
use crate::symbols::{
    check_symbol_class, Certificate, OrderFunction, SampleGrid, Symbol, SymbolExpr, Tape,
    STABILITY_FACTOR,
};

fn min_distance_ratio(
    f: &SymbolExpr,
    z: Complex64,
    m: &SymbolExpr,
    pts: &[Complex64],
) -> (f64, Complex64) {
    let tf = Tape::compile(f);
    let tm = Tape::compile(m);
    let mut buf = Vec::new();
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    // a real f - z that changes sign vanishes between grid points
    let (mut below, mut above) = (None, None);
    for p in pts {
        let w = tf.eval_with(*p, p.conj(), &mut buf) - z;
        let d = w.norm() / tm.eval_with(*p, p.conj(), &mut buf).re;
        if !(d >= best.0) {
            best = (d, *p);
        }
        if w.im.abs() <= 1e-12 * w.re.abs().max(1.0) {
            if w.re < 0.0 {
                below = Some(*p);
            } else if w.re > 0.0 {
                above = Some(*p);
            }
        }
    }
    match (below, above) {
        (Some(p), Some(_)) => (0.0, p),
        _ => best,
    }
}

/// Certifies `|f - z| ≥ c m` on the grid with a level-stable `c > 0`; returns `c`.
fn certify_distance(
    f: &Symbol,
    z: Complex64,
    m: &OrderFunction,
    levels: &[usize],
    grid: &SampleGrid,
) -> Result<f64> {
    let pts = grid.nodes();
    let mut prev: Option<f64> = None;
    let mut worst = f64::INFINITY;
    for &n in levels {
        let (c, at) = min_distance_ratio(&f.at_level(n), z, &m.at_level(n), &pts);
        if !(c > 1e-10) {
            return Err(Error::Hypothesis(format!(
                "pole on grid: |f - z| / m = {c:.3e} at {at} (N = {n})"
            )));
        }
        if let Some(p) = prev {
            if c * STABILITY_FACTOR < p && n == *levels.last().expect("nonempty") {
                return Err(Error::Hypothesis(format!(
                    "|f - z| / m decays with N ({p:.3e} -> {c:.3e})"
                )));
            }
        }
        prev = Some(c);
        worst = worst.min(c);
    }
    Ok(worst)
}

/// `s₁ = (z - f)⁻¹` as a level-dependent symbol. For real `z` the distance
/// `|f - z| ≥ c m` must certify on the grid.
pub fn resolvent_symbol(
    f: &Symbol,
    z: Complex64,
    m: &OrderFunction,
    levels: &[usize],
    grid: &SampleGrid,
) -> Result<Symbol> {
    if z.im == 0.0 {
        certify_distance(f, z, m, levels, grid)?;
    }
    let scaled = if f.power != 0.0 {
        SymbolExpr::level(f.power) * f.expr.clone()
    } else {
        f.expr.clone()
    };
    let s1 = (SymbolExpr::constant(z) - scaled).recip();
    Ok(Symbol {
        expr: s1,
        delta: f.delta,
        power: 0.0,
        concentrate: f.concentrate,
        max_derivative_order: f.max_derivative_order,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolventBound {
    pub certificate: Certificate,
    /// `|Im z|`, or the certified distance constant for real `z`.
    pub scale: f64,
    /// `C_α` in `|∂^α s₁| ≤ C_α scale^{-1-|α|} N^{δ|α|} m⁻¹`.
    pub constants: BTreeMap<String, f64>,
}

/// Grid check of `|∂^α s₁| ≤ C |Im z|^{-1-|α|} N^{δ|α|} m⁻¹` for `|α| ≤ max_alpha`.
pub fn verify_resolvent_bound(
    f: &Symbol,
    z: Complex64,
    m: &OrderFunction,
    levels: &[usize],
    max_alpha: u32,
    grid: &SampleGrid,
) -> Result<ResolventBound> {
    let s1 = resolvent_symbol(f, z, m, levels, grid)?;
    let scale = if z.im != 0.0 {
        z.im.abs()
    } else {
        certify_distance(f, z, m, levels, grid)?
    };
    let minv = OrderFunction::new(m.expr.recip(), m.delta)?;
    let certificate = check_symbol_class(&s1, &minv, levels, max_alpha, grid)?;
    let constants = certificate
        .per_alpha
        .iter()
        .map(|(k, v)| {
            let order: i32 = k
                .split(',')
                .map(|s| s.parse::<i32>().expect("alpha key"))
                .sum();
            (k.clone(), v * scale.powi(1 + order))
        })
        .collect();
    Ok(ResolventBound {
        certificate,
        scale,
        constants,
    })
}

/// Right and left parametrices of `T_{f-z}` at one level.
#[derive(Clone, Debug)]
pub struct Parametrix {
    pub n: usize,
    pub z: Complex64,
    pub order: usize,
    /// `(f - z)⁻¹`.
    pub s1: SymbolExpr,
    /// `N^{-j}` coefficients of `(f - z) ⋆ s₁ - 1`.
    pub defect: Vec<SymbolExpr>,
    /// `g = s₁ ⋆ s₃` with `T_{f-z} T_g = 1 + O(N^{-J-1})`.
    pub right: StarSeries,
    /// `g = s₃' ⋆ s₁` with `T_g T_{f-z} = 1 + O(N^{-J-1})`.
    pub left: StarSeries,
    pub min_distance: f64,
}

impl Parametrix {
    pub fn right_symbol(&self) -> SymbolExpr {
        sum_series(&self.right.terms, self.n)
    }

    pub fn left_symbol(&self) -> SymbolExpr {
        sum_series(&self.left.terms, self.n)
    }
}

fn neg_series(a: &[SymbolExpr]) -> Vec<SymbolExpr> {
    a.iter().map(|t| t.neg()).collect()
}

fn add_series(a: &mut Vec<SymbolExpr>, b: &[SymbolExpr]) {
    if a.len() < b.len() {
        a.resize(b.len(), SymbolExpr::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x = &*x + y;
    }
}

/// `Σ_{k≤J} (-d)^{⋆k}` for a series `d` without constant term.
fn neumann(d: &[SymbolExpr], geometry: &ModelGeometry, order: usize) -> Result<Vec<SymbolExpr>> {
    let nd = neg_series(d);
    let mut term = vec![SymbolExpr::one()];
    let mut acc = term.clone();
    for _ in 0..order {
        term = star_of_series(&term, &nd, geometry, order)?;
        add_series(&mut acc, &term);
    }
    Ok(acc)
}

fn without_constant(mut p: Vec<SymbolExpr>) -> Vec<SymbolExpr> {
    if let Some(first) = p.first_mut() {
        *first = SymbolExpr::zero();
    }
    p
}

fn bookkeeping(terms: Vec<SymbolExpr>, geometry: &ModelGeometry, delta: f64) -> StarSeries {
    let k = if geometry.is_bargmann() { 2 } else { 1 };
    StarSeries {
        derivative_orders: (0..terms.len() as u32).map(|j| (k * j, k * j)).collect(),
        growth_exponents: (0..terms.len()).map(|j| 2.0 * delta * j as f64).collect(),
        terms,
    }
}

/// Parametrix of `T_{N, f-z}` truncated at order `J`, at level `n`.
pub fn parametrix_symbol(
    f: &Symbol,
    z: Complex64,
    order: usize,
    geometry: &ModelGeometry,
    m: &OrderFunction,
    n: usize,
    grid: &SampleGrid,
) -> Result<Parametrix> {
    if let Some(max) = max_star_order(geometry) {
        if order > max as usize {
            return Err(Error::Unsupported(format!(
                "parametrix order {order} needs star terms beyond h_{max} on this model"
            )));
        }
    }
    let min_distance = certify_distance(f, z, m, &[n], grid)?;
    let fz = f.at_level(n) - SymbolExpr::constant(z);
    let s1 = fz.recip();
    let a = [fz];
    let b = [s1.clone()];
    let defect = without_constant(star_of_series(&a, &b, geometry, order)?);
    let s3 = neumann(&defect, geometry, order)?;
    let right = star_of_series(&b, &s3, geometry, order)?;
    let defect_left = without_constant(star_of_series(&b, &a, geometry, order)?);
    let s3l = neumann(&defect_left, geometry, order)?;
    let left = star_of_series(&s3l, &b, geometry, order)?;
    Ok(Parametrix {
        n,
        z,
        order,
        s1,
        defect,
        right: bookkeeping(right, geometry, f.delta),
        left: bookkeeping(left, geometry, f.delta),
        min_distance,
    })
}
