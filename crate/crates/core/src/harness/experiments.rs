use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Experiment, SweepConfig};
use super::report::{fit_metric, Check, ConvergenceReport, Fit, Row};
use crate::calculus::{
    functional_calculus_symbol, hs_function_of_matrix, parametrix_symbol, spectral_function_oracle,
    ChiSpec, HsSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, ModelId};
use crate::quantum::gauss::gauss_legendre;
use crate::quantum::{build_basis, build_quadrature, QuadratureRule, QuadratureSpec, QuantumBasis};
use crate::semiclassics::{diagonal_kernel_expansion, poisson_bracket, star_series};
use crate::symbols::{check_symbol_class, OrderFunction, SampleGrid, Symbol, SymbolExpr, Tape};
use crate::toeplitz::{
    assemble_expr, commutator, compose, matrix_norm, operator_norm, trace, weighted_kernel_at,
    CMatrix, ToeplitzMatrix,
};

/// Height function of the projective line; its Toeplitz trace vanishes.
pub const HEIGHT: &str = "(1 - z*conj(z))/(1 + z*conj(z))";

const RADIAL_PANELS: usize = 64;
const RADIAL_NODES: usize = 16;
const ANGLES: usize = 512;
/// Exact identities (traces, amplitudes) are checked to this.
const EXACT: f64 = 1e-9;
const PERTURBATION: f64 = 1e-12;

/// `∫ f dμ` with `μ = 2 ∂∂̄φ` in the chart. Bargmann integrands need a
/// bounded support; the projective line is integrated in polar angle
/// `r = tan(θ/2)`, where `dμ = ½ sin θ dθ dϕ`.
pub fn volume_integral(geometry: &ModelGeometry, f: &SymbolExpr) -> Result<f64> {
    let support = f.support_radius();
    let (top, cp1) = match (geometry.model, support) {
        (ModelId::BargmannPlane, Some(r)) => (r, false),
        (ModelId::BargmannPlane, None) => {
            return Err(Error::Unsupported(
                "volume integral on the plane needs a compactly supported symbol".into(),
            ))
        }
        (ModelId::ProjectiveLine, Some(r)) => (2.0 * r.atan(), true),
        (ModelId::ProjectiveLine, None) => (PI, true),
    };
    let (gx, gw) = gauss_legendre(RADIAL_NODES);
    let h = top / RADIAL_PANELS as f64;
    let mut nodes = Vec::with_capacity(RADIAL_PANELS * RADIAL_NODES);
    for p in 0..RADIAL_PANELS {
        let a = p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let t = a + 0.5 * h * (x + 1.0);
            let w = 0.5 * h * w;
            nodes.push(if cp1 {
                ((0.5 * t).tan(), 0.5 * t.sin() * w)
            } else {
                (t, 2.0 * t * w)
            });
        }
    }
    let tape = Tape::compile(f);
    let dphi = 2.0 * PI / ANGLES as f64;
    let total: f64 = nodes
        .par_iter()
        .map_init(Vec::new, |buf, &(r, w)| {
            let ring: f64 = (0..ANGLES)
                .map(|k| {
                    let z = Complex64::from_polar(r, k as f64 * dphi);
                    tape.eval_with(z, z.conj(), buf).re
                })
                .sum();
            ring * dphi * w
        })
        .sum();
    Ok(total)
}

struct Level {
    basis: QuantumBasis,
    rule: QuadratureRule,
}

impl Level {
    fn new(geometry: &ModelGeometry, n: usize, radius: f64) -> Result<Self> {
        let basis = build_basis(geometry, n, radius)?;
        let rule = build_quadrature(&basis, &QuadratureSpec::default())?;
        Ok(Self { basis, rule })
    }

    fn quantize(&self, e: &SymbolExpr) -> Result<ToeplitzMatrix> {
        assemble_expr(e, &self.basis, &self.rule)
    }
}

fn symbol(text: &str, delta: f64) -> Result<Symbol> {
    Ok(Symbol::parse(text)?.with_delta(delta)?.concentrated(true))
}

fn order_function(text: &str, delta: f64) -> Result<OrderFunction> {
    let e = crate::symbols::parse_symbol(text)?;
    if e == SymbolExpr::one() {
        return Ok(OrderFunction::one());
    }
    OrderFunction::new(e, delta)
}

fn required<'a>(field: &'a Option<String>, name: &str) -> Result<&'a str> {
    field
        .as_deref()
        .ok_or_else(|| Error::Config(format!("experiment needs `{name}`")))
}

/// Explicit radius scaled by `N^{-δ}`, else the widest symbol support, else 1.
fn basis_radius(c: &SweepConfig, symbols: &[&Symbol], n: usize) -> f64 {
    let delta = c.delta.unwrap_or(0.0);
    if let Some(r) = c.basis_radius {
        return r * (n as f64).powf(-delta);
    }
    symbols
        .iter()
        .map(|s| s.support_radius(n))
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
        .filter(|r| *r > 0.0)
        .unwrap_or(1.0)
}

fn per_level<T: Send>(
    levels: &[usize],
    work: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    levels.par_iter().map(|&n| work(n)).collect()
}

fn rows_of(metric: &str, levels: &[usize], values: &[f64]) -> Vec<Row> {
    levels
        .iter()
        .zip(values)
        .map(|(&n, &value)| Row {
            metric: metric.into(),
            n,
            value,
        })
        .collect()
}

fn pairs(levels: &[usize], values: &[f64]) -> Vec<(usize, f64)> {
    levels.iter().copied().zip(values.iter().copied()).collect()
}

struct Builder {
    rows: Vec<Row>,
    fits: Vec<Fit>,
    checks: Vec<Check>,
    tolerance_override: Option<f64>,
}

impl Builder {
    fn new(c: &SweepConfig) -> Self {
        Self {
            rows: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            tolerance_override: c.slope_tolerance,
        }
    }

    fn series(&mut self, metric: &str, levels: &[usize], values: &[f64]) {
        self.rows.extend(rows_of(metric, levels, values));
    }

    fn fitted(
        &mut self,
        metric: &str,
        levels: &[usize],
        values: &[f64],
        predicted: f64,
        tolerance: f64,
        provenance: &str,
    ) {
        self.series(metric, levels, values);
        let tol = self.tolerance_override.unwrap_or(tolerance);
        self.fits.push(fit_metric(
            metric,
            &pairs(levels, values),
            predicted,
            tol,
            provenance,
        ));
    }

    fn check(&mut self, name: &str, value: f64, limit: f64) {
        self.checks.push(Check::below(name, value, limit));
    }

    fn finish(self, c: SweepConfig) -> ConvergenceReport {
        ConvergenceReport::new(c, self.rows, self.fits, self.checks)
    }
}

/// Runs the configured sweep. Deterministic for a fixed configuration.
pub fn run_experiment(config: &SweepConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let c = config.resolved();
    let mut out = Builder::new(&c);
    match c.experiment {
        Experiment::Composition => composition(&c, &mut out)?,
        Experiment::Commutator => commutator_sweep(&c, &mut out)?,
        Experiment::Trace => trace_sweep(&c, &mut out)?,
        Experiment::Funcalc => funcalc(&c, &mut out)?,
        Experiment::Parametrix => parametrix(&c, &mut out)?,
        Experiment::Kernel => kernel(&c, &mut out)?,
        Experiment::SymbolClass => symbol_class(&c, &mut out)?,
    }
    Ok(out.finish(c))
}

fn delta_of(c: &SweepConfig) -> f64 {
    c.delta.unwrap_or(0.0)
}

fn order_of(c: &SweepConfig) -> u32 {
    c.order.unwrap_or(1)
}

fn composition(c: &SweepConfig, out: &mut Builder) -> Result<()> {
    let geometry = c.geometry()?;
    let delta = delta_of(c);
    let order = order_of(c);
    let f = symbol(required(&c.f, "f")?, delta)?;
    let g = symbol(required(&c.g, "g")?, delta)?;
    let levels = c.levels();
    let values = per_level(levels, |n| {
        let lv = Level::new(&geometry, n, basis_radius(c, &[&f, &g], n))?;
        let (fe, ge) = (f.at_level(n), g.at_level(n));
        let tf = lv.quantize(&fe)?;
        let tg = lv.quantize(&ge)?;
        let star = star_series(&fe, &ge, &geometry, order, delta)?;
        let ts = lv.quantize(&star.truncated_sum(n, order as usize))?;
        let raw = operator_norm(&compose(&tf, &tg)?.sub(&ts)?);
        let scale = operator_norm(&tf) * operator_norm(&tg);
        Ok((raw, if scale > 0.0 { raw / scale } else { raw }))
    })?;
    let (raw, normalized): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
    out.series("composition_raw", levels, &raw);
    out.fitted(
        "composition",
        levels,
        &normalized,
        -((order + 1) as f64) * (1.0 - 2.0 * delta),
        0.4,
        "star-product remainder after order J: N^{-(J+1)(1-2δ)}",
    );
    Ok(())
}

fn commutator_sweep(c: &SweepConfig, out: &mut Builder) -> Result<()> {
    let geometry = c.geometry()?;
    let delta = delta_of(c);
    let f = symbol(required(&c.f, "f")?, delta)?;
    let g = symbol(required(&c.g, "g")?, delta)?;
    let levels = c.levels();
    let values = per_level(levels, |n| {
        let lv = Level::new(&geometry, n, basis_radius(c, &[&f, &g], n))?;
        let (fe, ge) = (f.at_level(n), g.at_level(n));
        let tf = lv.quantize(&fe)?;
        let tg = lv.quantize(&ge)?;
        let tb = lv.quantize(&poisson_bracket(&fe, &ge, &geometry)?)?;
        let scale = Complex64::new(0.0, -1.0 / n as f64);
        let d = commutator(&tf, &tg)?.sub(&tb.scale(scale))?;
        Ok(matrix_norm(&d.trusted_block()))
    })?;
    out.fitted(
        "commutator",
        levels,
        &values,
        -2.0 * (1.0 - 2.0 * delta),
        0.2,
        "second star coefficient: N^{-2(1-2δ)}",
    );
    Ok(())
}

fn trace_sweep(c: &SweepConfig, out: &mut Builder) -> Result<()> {
    let geometry = c.geometry()?;
    let delta = delta_of(c);
    let f = symbol(required(&c.f, "f")?, delta)?;
    let levels = c.levels();
    let cp1 = geometry.model == ModelId::ProjectiveLine;
    let height = crate::symbols::parse_symbol(HEIGHT)?;
    let values = per_level(levels, |n| {
        let lv = Level::new(&geometry, n, basis_radius(c, &[&f], n))?;
        let fe = f.at_level(n);
        let tr = trace(&lv.quantize(&fe)?).re;
        let predicted = n as f64 / (2.0 * PI) * volume_integral(&geometry, &fe)?;
        let identity = trace(&lv.quantize(&SymbolExpr::one())?).re;
        let expected = if cp1 {
            (n + 1) as f64
        } else {
            lv.basis.dim as f64
        };
        let h = if cp1 {
            trace(&lv.quantize(&height)?).norm()
        } else {
            0.0
        };
        Ok(((tr - predicted).abs(), (identity - expected).abs(), h))
    })?;
    let defect: Vec<f64> = values.iter().map(|v| v.0).collect();
    out.fitted(
        "trace_defect",
        levels,
        &defect,
        0.0,
        0.3,
        "trace formula remainder: O(N^{0})",
    );
    let hi = defect.iter().copied().fold(0.0, f64::max);
    let lo = defect.iter().copied().fold(f64::INFINITY, f64::min);
    out.check(
        "trace_defect_ratio",
        if lo > 0.0 { hi / lo } else { f64::INFINITY },
        3.0,
    );
    let id: Vec<f64> = values.iter().map(|v| v.1).collect();
    out.series("trace_identity_error", levels, &id);
    out.check(
        "trace_identity_error",
        id.iter().copied().fold(0.0, f64::max),
        EXACT,
    );
    if cp1 {
        let h: Vec<f64> = values.iter().map(|v| v.2).collect();
        out.series("trace_height", levels, &h);
        out.check("trace_height", h.iter().copied().fold(0.0, f64::max), EXACT);
    }
    Ok(())
}

/// Seeded Hermitian matrix with spectral norm `norm`.
pub fn random_hermitian(dim: usize, norm: f64, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let s = matrix_norm(&h);
    h * Complex64::new(norm / s, 0.0)
}

fn funcalc(c: &SweepConfig, out: &mut Builder) -> Result<()> {
    let geometry = c.geometry()?;
    let delta = delta_of(c);
    let f = symbol(required(&c.f, "f")?, delta)?;
    let m = order_function(c.m.as_deref().unwrap_or("1"), delta)?;
    let chi = c.chi.unwrap_or(ChiSpec::bump(2.0, 1.0));
    let levels = c.levels();
    let fs = functional_calculus_symbol(&f, &m, chi, levels, &SampleGrid::default())?;
    let chi_fn = move |x: f64| Complex64::new(chi.eval(x), 0.0);
    let values = per_level(levels, |n| {
        let lv = Level::new(&geometry, n, basis_radius(c, &[&f], n))?;
        let tf = lv.quantize(&f.at_level(n))?;
        let oracle = spectral_function_oracle(&tf.entries, &chi_fn)?;
        let principal = lv.quantize(&fs.principal(n))?;
        Ok(matrix_norm(&(&oracle - &principal.entries)))
    })?;
    out.fitted(
        "funcalc",
        levels,
        &values,
        -1.0,
        0.3,
        "principal symbol χ∘f₀ up to O(N^{-1})",
    );

    let n = c.hs_level.unwrap_or(64);
    let tolerance = c.hs_tolerance.unwrap_or(1e-6);
    let lv = Level::new(&geometry, n, basis_radius(c, &[&f], n))?;
    let tf = lv.quantize(&f.at_level(n))?;
    let ext = chi.extension(c.strip.unwrap_or(0.5), c.decay_order.unwrap_or(4))?;
    let spec = HsSpec {
        floor: c.floor,
        tolerance,
        ..HsSpec::default()
    };
    let floor = spec.floor.unwrap_or((n as f64).powi(-2));
    let hs = hs_function_of_matrix(&tf.entries, &ext, floor, &spec)?;
    let oracle = spectral_function_oracle(&tf.entries, &chi_fn)?;
    let err = matrix_norm(&(&hs.matrix - &oracle));
    out.series("hs_vs_oracle", &[n], &[err]);
    let b = hs.budget;
    for (name, v) in [
        ("hs_budget", b.total),
        ("hs_budget_quadrature", b.quadrature),
        ("hs_budget_floor_band", b.floor_band),
        ("hs_budget_pruned", b.pruned),
        ("hs_budget_roundoff", b.roundoff),
    ] {
        out.series(name, &[n], &[v]);
    }
    out.check("hs_vs_oracle", err, tolerance);
    out.check(
        "hs_error_over_budget",
        if hs.budget.total > 0.0 {
            err / hs.budget.total
        } else {
            f64::INFINITY
        },
        1.0,
    );
    let r = random_hermitian(tf.dim(), PERTURBATION, c.seed.unwrap_or(0));
    let perturbed = hs_function_of_matrix(&(&tf.entries + &r), &ext, floor, &spec)?;
    let moved = matrix_norm(&(&perturbed.matrix - &hs.matrix));
    out.series("perturbation_response", &[n], &[moved]);
    out.check("perturbation_response", moved, 1e-9);
    Ok(())
}

fn parametrix(c: &SweepConfig, out: &mut Builder) -> Result<()> {
    let geometry = c.geometry()?;
    let delta = delta_of(c);
    let order = order_of(c);
    let f = symbol(required(&c.f, "f")?, delta)?;
    let m = order_function(c.m.as_deref().unwrap_or("1"), delta)?;
    let [re, im] = c.z.unwrap_or([0.0, 0.0]);
    let z = Complex64::new(re, im);
    let levels = c.levels();
    let grid = SampleGrid::default();
    let values = per_level(levels, |n| {
        let p = parametrix_symbol(&f, z, order as usize, &geometry, &m, n, &grid)?;
        let lv = Level::new(&geometry, n, basis_radius(c, &[&f], n))?;
        let shifted = f.at_level(n) - SymbolExpr::constant(z);
        let tf = lv.quantize(&shifted)?;
        let right = lv.quantize(&p.right_symbol())?;
        let left = lv.quantize(&p.left_symbol())?;
        let id = ToeplitzMatrix::identity(&lv.basis);
        let er = matrix_norm(&compose(&tf, &right)?.sub(&id)?.trusted_block());
        let el = matrix_norm(&compose(&left, &tf)?.sub(&id)?.trusted_block());
        let gap = matrix_norm(&left.sub(&right)?.trusted_block());
        Ok((er, el, gap))
    })?;
    let predicted = -((order + 1) as f64) * (1.0 - 2.0 * delta);
    let provenance = "parametrix remainder after order J: N^{-(J+1)(1-2δ)}";
    let right: Vec<f64> = values.iter().map(|v| v.0).collect();
    let left: Vec<f64> = values.iter().map(|v| v.1).collect();
    let gap: Vec<f64> = values.iter().map(|v| v.2).collect();
    out.fitted(
        "parametrix_right",
        levels,
        &right,
        predicted,
        0.4,
        provenance,
    );
    out.fitted("parametrix_left", levels, &left, predicted, 0.4, provenance);
    out.series("left_right_gap", levels, &gap);
    let ratio = values
        .iter()
        .map(|(r, l, g)| g / r.max(*l).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    out.check("left_right_gap_over_residual", ratio, 1.0);
    Ok(())
}

fn kernel(c: &SweepConfig, out: &mut Builder) -> Result<()> {
    let geometry = c.geometry()?;
    let delta = delta_of(c);
    let order = order_of(c);
    let f = symbol(required(&c.f, "f")?, delta)?;
    let [re, im] = c.point.unwrap_or([0.3, 0.1]);
    let x = Complex64::new(re, im);
    let levels = c.levels();
    let samples = c.pairs.unwrap_or(32);
    let seed = c.seed.unwrap_or(0);
    let values = per_level(levels, |n| {
        let nf = n as f64;
        let lead = nf / (2.0 * PI);
        let lv = Level::new(&geometry, n, basis_radius(c, &[&f], n))?;
        let fe = f.at_level(n);
        let w = weighted_kernel_at(&lv.quantize(&fe)?, &lv.basis, x, x)?.value;
        let diag = (0..=order)
            .map(|j| {
                let e = diagonal_kernel_expansion(&fe, n, x, j, &geometry)?;
                Ok((w - e).norm() / lead)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let plane = build_basis(&ModelGeometry::bargmann(), n, 1.0)?;
        let line = build_basis(&ModelGeometry::projective_line(), n, 1.0)?;
        let mut gauss = 0.0f64;
        let mut amplitude = 0.0f64;
        for _ in 0..samples {
            let p = Complex64::from_polar(
                0.3 * rng.random::<f64>().sqrt(),
                rng.random_range(0.0..2.0 * PI),
            );
            let q = p + Complex64::from_polar(
                3.0 / nf.sqrt() * rng.random::<f64>(),
                rng.random_range(0.0..2.0 * PI),
            );
            let k = plane.weighted_kernel_at(p, q)?.value.norm();
            let g = lead * (-0.5 * nf * (p - q).norm_sqr()).exp();
            gauss = gauss.max((k - g).abs() / g);
            let a = line.weighted_kernel_at(p * 3.0, p * 3.0)?.value.re / lead;
            amplitude = amplitude.max((a - (1.0 + 1.0 / nf)).abs());
        }
        Ok((diag, gauss, amplitude))
    })?;
    for j in 0..=order {
        let v: Vec<f64> = values.iter().map(|r| r.0[j as usize]).collect();
        out.fitted(
            &format!("diagonal_J{j}"),
            levels,
            &v,
            -((j + 1) as f64),
            0.3,
            "diagonal kernel expansion truncated after N^{-J}: O(N^{-(J+1)})",
        );
    }
    let gauss: Vec<f64> = values.iter().map(|r| r.1).collect();
    let amplitude: Vec<f64> = values.iter().map(|r| r.2).collect();
    out.series("offdiagonal_gaussian", levels, &gauss);
    out.series("cp1_amplitude", levels, &amplitude);
    out.check(
        "offdiagonal_gaussian",
        gauss.iter().copied().fold(0.0, f64::max),
        1e-8,
    );
    out.check(
        "cp1_amplitude",
        amplitude.iter().copied().fold(0.0, f64::max),
        1e-12,
    );
    Ok(())
}

fn symbol_class(c: &SweepConfig, out: &mut Builder) -> Result<()> {
    let delta = delta_of(c);
    let f = Symbol::parse(required(&c.f, "f")?)?.with_delta(delta)?;
    let m = order_function(c.m.as_deref().unwrap_or("1"), delta)?;
    let levels = c.levels();
    let cert = check_symbol_class(
        &f,
        &m,
        levels,
        c.max_alpha.unwrap_or(2),
        &SampleGrid::default(),
    )?;
    let (ns, cs): (Vec<usize>, Vec<f64>) = cert.per_level.iter().copied().unzip();
    out.series("class_constant", &ns, &cs);
    for (alpha, value) in &cert.per_alpha {
        out.series(
            &format!("alpha_{alpha}"),
            &[*levels.last().expect("nonempty")],
            &[*value],
        );
    }
    out.check("uncertified", if cert.certified { 0.0 } else { 1.0 }, 0.5);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol;

    #[test]
    fn volume_of_the_sphere_and_height() {
        let g = ModelGeometry::projective_line();
        let one = volume_integral(&g, &SymbolExpr::one()).unwrap();
        assert!((one - 2.0 * PI).abs() < 1e-12, "{one}");
        let h = volume_integral(&g, &parse_symbol(HEIGHT).unwrap()).unwrap();
        assert!(h.abs() < 1e-12, "{h}");
    }

    #[test]
    fn volume_of_a_disc() {
        // radial symbol: 2π ∫ f(r) 2r dr by composite Simpson
        let g = ModelGeometry::bargmann();
        let e = parse_symbol("(1 + z*conj(z))*bump(0, 1)").unwrap();
        let m = 20_000;
        let h = 1.0 / m as f64;
        let simpson: f64 = (0..=m)
            .map(|k| {
                let r = k as f64 * h;
                let w = if k == 0 || k == m {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * e.eval(Complex64::new(r, 0.0)).re * 2.0 * r
            })
            .sum::<f64>()
            * h
            / 3.0
            * 2.0
            * PI;
        let v = volume_integral(&g, &e).unwrap();
        assert!((v - simpson).abs() < 1e-10, "{v} {simpson}");
        assert!(volume_integral(&g, &parse_symbol("z").unwrap()).is_err());
    }

    #[test]
    fn random_hermitian_is_normalized() {
        let r = random_hermitian(12, 1e-12, 3);
        assert!((matrix_norm(&r) - 1e-12).abs() < 1e-24);
        assert!((&r - r.adjoint()).norm() == 0.0);
        assert_eq!(r, random_hermitian(12, 1e-12, 3));
    }

    #[test]
    fn exact_commutator_reaches_the_floor() {
        let mut c = SweepConfig::new(Experiment::Commutator);
        c.f = Some("z*conj(z)".into());
        c.g = Some("z + conj(z)".into());
        c.n_list = Some(vec![32, 64, 128]);
        let r = run_experiment(&c).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert!(r.series("commutator").iter().all(|p| p.1 < 1e-9));
    }

    #[test]
    fn failed_hypothesis_aborts() {
        let mut c = SweepConfig::new(Experiment::Funcalc);
        c.f = Some("bump(0, 1) - 0.5".into());
        c.n_list = Some(vec![16, 24, 32]);
        assert!(matches!(run_experiment(&c), Err(Error::Hypothesis(_))));
    }
}
