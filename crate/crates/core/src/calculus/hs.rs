//! `χ(A) = -π⁻¹ ∫ ∂̄χ̃(z) (z - A)⁻¹ dm(z)` by strip quadrature.
//!
//! `A` is reduced once to a real tridiagonal `T = Q* A Q`; every node then
//! needs the full inverse of `z - T`, which costs `O(D²)` through the two
//! pivot sweeps. Only the upper half plane is visited: the resolvent at `z̄`
//! is the entrywise conjugate of the one at `z` in the tridiagonal basis.

use std::f64::consts::PI;

use nalgebra::linalg::SymmetricTridiagonal;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extension::AlmostAnalyticExtension;
use crate::error::{Error, Result};
use crate::harness::METRIC_FLOOR;
use crate::quantum::gauss::gauss_legendre;
use crate::toeplitz::{hermitian_deviation, CMatrix, ToeplitzMatrix};

/// Relative Hermitian tolerance accepted by the solvers.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

const CHUNKS: usize = 64;
/// Trapezoid points across one cutoff margin.
const MARGIN_POINTS: f64 = 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsSpec {
    /// Lower end of the strip; `None` means `N^{-2}`.
    pub floor: Option<f64>,
    /// Gauss–Legendre nodes per geometric `y` panel.
    pub y_nodes: usize,
    /// Geometric `y` panels per halving of the height.
    pub panels_per_octave: usize,
    /// Trapezoid spacing in `x` is at most `y_lo / x_per_y` on each panel.
    pub x_per_y: f64,
    /// Coarsen rows on panels where `∂̄χ̃` is small; off, the nodes do not depend on χ.
    pub adaptive_rows: bool,
    /// Nodes whose contribution bound `|c|/y` is below this are skipped.
    pub prune: f64,
    pub tolerance: f64,
}

impl Default for HsSpec {
    fn default() -> Self {
        Self {
            floor: None,
            y_nodes: 8,
            panels_per_octave: 8,
            x_per_y: 4.0,
            adaptive_rows: true,
            prune: 1e-17,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// `sup |F(λ) - χ(λ)|` over the spectral hull, `F` the quadrature's rational function.
    pub quadrature: f64,
    /// Bound for the discarded band `|Im z| < floor`, extrapolating the local decay.
    pub floor_band: f64,
    /// Sum of the bounds of skipped nodes and panels.
    pub pruned: f64,
    pub roundoff: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct HsResult {
    pub matrix: CMatrix,
    pub budget: ErrorBudget,
    pub floor: f64,
    pub nodes: usize,
    pub pruned_nodes: usize,
    /// Spectrum enclosure from Gershgorin discs of `T`.
    pub spectral_hull: (f64, f64),
    /// `Σ |c| / y²`: first-order sensitivity to a perturbation of `A`.
    pub lipschitz: f64,
}

pub(crate) fn check_hermitian(a: &CMatrix) -> Result<()> {
    let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let dev = hermitian_deviation(a);
    if dev > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NonHermitian(dev));
    }
    Ok(())
}

fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `A = Q T Q*` with `T` real symmetric tridiagonal.
pub struct Tridiagonal {
    pub q: CMatrix,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

pub fn tridiagonalize(a: &CMatrix) -> Result<Tridiagonal> {
    let d = a.nrows();
    if d == 0 || a.ncols() != d {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: a.ncols(),
        });
    }
    check_hermitian(a)?;
    let h = hermitian_part(a);
    let q = SymmetricTridiagonal::new(h.clone()).q();
    let t = q.adjoint() * &h * &q;
    // rephase so the off-diagonal is real and non-negative
    let mut phase = vec![Complex64::new(1.0, 0.0); d];
    let mut off = Vec::with_capacity(d.saturating_sub(1));
    for k in 0..d.saturating_sub(1) {
        let v = t[(k + 1, k)];
        let r = v.norm();
        phase[k + 1] = if r > 0.0 { phase[k] * v / r } else { phase[k] };
        off.push(r);
    }
    let diag = (0..d).map(|k| t[(k, k)].re).collect();
    let mut q = q;
    for (k, p) in phase.iter().enumerate() {
        let mut col = q.column_mut(k);
        col *= *p;
    }
    Ok(Tridiagonal { q, diag, off })
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let d = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..d {
            let r = if k > 0 { self.off[k - 1] } else { 0.0 }
                + if k + 1 < d { self.off[k] } else { 0.0 };
            lo = lo.min(self.diag[k] - r);
            hi = hi.max(self.diag[k] + r);
        }
        (lo, hi)
    }

    /// Upper triangle (row-major, `i ≤ j`) of `(z - T)⁻¹`, written into `out`.
    fn resolvent_upper(
        &self,
        z: Complex64,
        fwd: &mut [Complex64],
        bwd: &mut [Complex64],
        out: &mut [Complex64],
    ) -> bool {
        let d = self.dim();
        let m = |k: usize| z - self.diag[k];
        fwd[0] = m(0);
        for k in 1..d {
            let b = self.off[k - 1];
            fwd[k] = m(k) - b * b / fwd[k - 1];
        }
        bwd[d - 1] = m(d - 1);
        for k in (0..d - 1).rev() {
            let b = self.off[k];
            bwd[k] = m(k) - b * b / bwd[k + 1];
        }
        for j in 0..d {
            let g = (fwd[j] + bwd[j] - m(j)).inv();
            if !g.is_finite() {
                return false;
            }
            out[upper_index(d, j, j)] = g;
            let mut v = g;
            for i in (0..j).rev() {
                v *= self.off[i] / fwd[i];
                out[upper_index(d, i, j)] = v;
            }
        }
        true
    }

    /// `Q X Q*` for a complex-symmetric `X` given by its upper triangle.
    fn to_original(&self, upper: &[Complex64]) -> CMatrix {
        let d = self.dim();
        let x = DMatrix::from_fn(d, d, |i, j| {
            if i <= j {
                upper[upper_index(d, i, j)]
            } else {
                upper[upper_index(d, j, i)]
            }
        });
        &self.q * x * self.q.adjoint()
    }
}

#[inline]
fn upper_index(d: usize, i: usize, j: usize) -> usize {
    i * d - i * (i + 1) / 2 + j
}

#[derive(Clone, Copy)]
struct Node {
    z: Complex64,
    /// `-π⁻¹ w ∂̄χ̃(z)`.
    c: Complex64,
    /// `conj(-π⁻¹ w ∂̄χ̃(z̄))`; equals `c` for real χ.
    c_low: Complex64,
}

struct Rule {
    nodes: Vec<Node>,
    pruned_nodes: usize,
    pruned: f64,
}

fn strip_rule(ext: &AlmostAnalyticExtension, floor: f64, spec: &HsSpec) -> Rule {
    let (xa, xb) = ext.x_range();
    let (gy, gw) = gauss_legendre(spec.y_nodes);
    let real = ext.is_real();
    let mut panels = Vec::new();
    let mut top = ext.half_width;
    let ratio = 0.5f64.powf(1.0 / spec.panels_per_octave.max(1) as f64);
    while top > floor {
        let lo = (top * ratio).max(floor);
        panels.push((lo, top));
        top = lo;
    }
    let mut nodes = Vec::new();
    let mut pruned = 0.0;
    let mut pruned_nodes = 0;
    let mut exhausted = false;
    for &(lo, hi) in &panels {
        // below Y/2 the vertical cutoff is flat and ∂̄χ̃ decays towards the axis,
        // so a negligible panel there ends the sweep
        let sup = [lo, 0.5 * (lo + hi), hi]
            .iter()
            .map(|&y| ext.sup_dbar(y, 401))
            .fold(0.0, f64::max);
        let bound = 2.0 / PI * (xb - xa) * (hi - lo) * sup / lo;
        if exhausted || (bound < spec.prune && hi <= 0.5 * ext.half_width) {
            exhausted = true;
            pruned += bound;
            continue;
        }
        // trapezoid error for the Cauchy kernel is ~ exp(-2π y/h) times the panel's
        // size, so panels with small ∂̄χ̃ get away with coarser rows
        let per_y = if !spec.adaptive_rows {
            spec.x_per_y
        } else {
            ((bound / (1e-3 * spec.tolerance)).max(1.0).ln() / (2.0 * PI)).clamp(1.0, spec.x_per_y)
        };
        let h = (lo / per_y).min(ext.margin / MARGIN_POINTS);
        let nx = ((xb - xa) / h).ceil() as usize;
        let hx = (xb - xa) / nx as f64;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let panel: Vec<(Node, f64)> = (0..gy.len())
            .into_par_iter()
            .flat_map_iter(|k| {
                let y = mid + half * gy[k];
                let w = hx * half * gw[k] / PI;
                let up = ext.dbar_row(y, xa, hx, nx + 1);
                let down = if real {
                    Vec::new()
                } else {
                    ext.dbar_row(-y, xa, hx, nx + 1)
                };
                (0..=nx).map(move |i| {
                    let z = Complex64::new(xa + hx * i as f64, y);
                    let c = -w * up[i];
                    let c_low = if real { c } else { (-w * down[i]).conj() };
                    (Node { z, c, c_low }, (c.norm() + c_low.norm()) / y)
                })
            })
            .collect();
        for (node, b) in panel {
            if b == 0.0 {
                continue;
            }
            if b < spec.prune {
                pruned += b;
                pruned_nodes += 1;
            } else {
                nodes.push(node);
            }
        }
    }
    Rule {
        nodes,
        pruned_nodes,
        pruned,
    }
}

/// `χ(A)` for a Hermitian Toeplitz matrix; the floor defaults to `N^{-2}`.
pub fn hs_function_of_operator(
    a: &ToeplitzMatrix,
    ext: &AlmostAnalyticExtension,
    spec: &HsSpec,
) -> Result<HsResult> {
    let floor = spec.floor.unwrap_or((a.n as f64).powi(-2));
    hs_function_of_matrix(&a.entries, ext, floor, spec)
}

pub fn hs_function_of_matrix(
    a: &CMatrix,
    ext: &AlmostAnalyticExtension,
    floor: f64,
    spec: &HsSpec,
) -> Result<HsResult> {
    if !(floor > 0.0 && floor < ext.half_width) {
        return Err(Error::Config(format!(
            "floor {floor} must lie in (0, Y = {})",
            ext.half_width
        )));
    }
    let tri = tridiagonalize(a)?;
    let d = tri.dim();
    let hull = tri.gershgorin();
    let rule = strip_rule(ext, floor, spec);
    let real = ext.is_real();
    let len = d * (d + 1) / 2;
    let chunk = rule.nodes.len().div_ceil(CHUNKS).max(1);
    let partial: Vec<Result<(Vec<Complex64>, Vec<Complex64>)>> = rule
        .nodes
        .par_chunks(chunk)
        .map(|nodes| {
            let mut up = vec![Complex64::new(0.0, 0.0); len];
            let mut low = if real {
                Vec::new()
            } else {
                vec![Complex64::new(0.0, 0.0); len]
            };
            let mut g = vec![Complex64::new(0.0, 0.0); len];
            let mut fwd = vec![Complex64::new(0.0, 0.0); d];
            let mut bwd = vec![Complex64::new(0.0, 0.0); d];
            for node in nodes {
                if !tri.resolvent_upper(node.z, &mut fwd, &mut bwd, &mut g) {
                    return Err(Error::Resolution(format!(
                        "resolvent solve broke down at z = {}",
                        node.z
                    )));
                }
                for (u, v) in up.iter_mut().zip(&g) {
                    *u += node.c * v;
                }
                if !real {
                    for (u, v) in low.iter_mut().zip(&g) {
                        *u += node.c_low * v;
                    }
                }
            }
            Ok((up, low))
        })
        .collect();
    let mut up = vec![Complex64::new(0.0, 0.0); len];
    let mut low = if real {
        Vec::new()
    } else {
        vec![Complex64::new(0.0, 0.0); len]
    };
    for p in partial {
        let (u, l) = p?;
        for (a, b) in up.iter_mut().zip(&u) {
            *a += b;
        }
        for (a, b) in low.iter_mut().zip(&l) {
            *a += b;
        }
    }
    let lower = if real { &up } else { &low };
    let combined: Vec<Complex64> = up.iter().zip(lower).map(|(u, l)| u + l.conj()).collect();
    let matrix = tri.to_original(&combined);

    let quadrature = quadrature_defect(ext, &rule, hull);
    let (xa, xb) = ext.x_range();
    let floor_band = 2.0 / PI * (xb - xa) * band_integral(ext, floor);
    let weight: f64 = rule
        .nodes
        .iter()
        .map(|n| (n.c.norm() + n.c_low.norm()) / n.z.im)
        .sum();
    let lipschitz: f64 = rule
        .nodes
        .iter()
        .map(|n| (n.c.norm() + n.c_low.norm()) / (n.z.im * n.z.im))
        .sum();
    let roundoff = 64.0 * f64::EPSILON * d as f64 * weight;
    let total = 2.0 * quadrature + floor_band + rule.pruned + roundoff;
    let budget = ErrorBudget {
        quadrature,
        floor_band,
        pruned: rule.pruned,
        roundoff,
        total,
    };
    if total > spec.tolerance {
        return Err(Error::Budget {
            budget: total,
            tolerance: spec.tolerance,
        });
    }
    Ok(HsResult {
        matrix,
        budget,
        floor,
        nodes: rule.nodes.len(),
        pruned_nodes: rule.pruned_nodes,
        spectral_hull: hull,
        lipschitz,
    })
}

/// `∫_0^f sup_x |∂̄χ̃(x+iy)| dy / y` under the model `sup ≤ s(f) (y/f)^k` below the
/// floor, `k` the slope measured between `f/2` and `f`.
fn band_integral(ext: &AlmostAnalyticExtension, floor: f64) -> f64 {
    let at = ext.sup_dbar(floor, 2001);
    if at == 0.0 {
        return 0.0;
    }
    if at <= METRIC_FLOOR {
        // evaluation noise, not a decay profile; charge it with order one
        return at;
    }
    let below = ext.sup_dbar(0.5 * floor, 2001);
    let k = (at / below).log2();
    if !(k > 0.5) {
        return f64::INFINITY;
    }
    at / k
}

/// `max |F(λ) - χ(λ)|` over sample points of the hull, `F` the rational
/// function realized by the nodes. The points are offset irrationally so
/// they do not lock onto the trapezoid lattice.
fn quadrature_defect(ext: &AlmostAnalyticExtension, rule: &Rule, hull: (f64, f64)) -> f64 {
    const POINTS: usize = 257;
    let width = (hull.1 - hull.0).max(0.0);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..POINTS)
        .into_par_iter()
        .map(|k| {
            let frac = (k as f64 + (k as f64 * golden).fract()) / POINTS as f64;
            let lam = hull.0 + width * frac.min(1.0);
            let mut f = Complex64::new(0.0, 0.0);
            for n in &rule.nodes {
                let r = (n.z - lam).inv();
                f += n.c * r + (n.c_low * r).conj();
            }
            (f - ext.base(lam)).norm()
        })
        .reduce(|| 0.0, f64::max)
}

/// Reference `χ(A)` from a dense Hermitian eigendecomposition.
pub fn spectral_function_oracle(a: &CMatrix, chi: &dyn Fn(f64) -> Complex64) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: a.ncols(),
        });
    }
    check_hermitian(a)?;
    let eig = hermitian_part(a).symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        let mut col = scaled.column_mut(k);
        col *= chi(*lam);
    }
    Ok(scaled * v.adjoint())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let mut ev: Vec<f64> = hermitian_part(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ChiSpec;
    use crate::toeplitz::matrix_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, seed: u64, lo: f64, hi: f64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let (q, _) = g.qr().unpack();
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| {
            Complex64::new(rng.random_range(lo..hi), 0.0)
        }));
        let m = &q * lam * q.adjoint();
        hermitian_part(&m)
    }

    #[test]
    fn tridiagonal_reconstructs() {
        let a = random_hermitian(12, 3, -1.0, 1.0);
        let t = tridiagonalize(&a).unwrap();
        let d = t.dim();
        let tm = DMatrix::from_fn(d, d, |i, j| {
            let v = if i == j {
                t.diag[i]
            } else if i == j + 1 {
                t.off[j]
            } else if j == i + 1 {
                t.off[i]
            } else {
                0.0
            };
            Complex64::new(v, 0.0)
        });
        assert!(matrix_norm(&(&t.q * tm * t.q.adjoint() - &a)) < 1e-12);
    }

    #[test]
    fn tridiagonal_resolvent_is_inverse() {
        let a = random_hermitian(9, 5, -2.0, 2.0);
        let t = tridiagonalize(&a).unwrap();
        let z = Complex64::new(0.3, 0.01);
        let mut out = vec![Complex64::new(0.0, 0.0); 45];
        let (mut f, mut b) = (
            vec![Complex64::new(0.0, 0.0); 9],
            vec![Complex64::new(0.0, 0.0); 9],
        );
        assert!(t.resolvent_upper(z, &mut f, &mut b, &mut out));
        let g = t.to_original(&out);
        let zi = CMatrix::identity(9, 9) * z - &a;
        assert!(matrix_norm(&(g * zi - CMatrix::identity(9, 9))) < 1e-10);
    }

    #[test]
    fn oracle_on_diagonal_matrix() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let r = spectral_function_oracle(&a, &|x| Complex64::new(x * x, 0.0)).unwrap();
        for (k, v) in [0.25, 1.0, 4.0].iter().enumerate() {
            assert!((r[(k, k)].re - v).abs() < 1e-14);
        }
        assert!(r[(0, 1)].norm() < 1e-14);
        let mut bad = a.clone();
        bad[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            spectral_function_oracle(&bad, &|x| Complex64::new(x, 0.0)),
            Err(Error::NonHermitian(_))
        ));
    }

    #[test]
    fn plateau_covering_spectrum_gives_identity() {
        let a = random_hermitian(20, 7, 1.8, 2.2);
        let ext = ChiSpec::plateau(2.0, 2.0).extension(0.5, 4).unwrap();
        let r = hs_function_of_matrix(&a, &ext, 1e-3, &HsSpec::default()).unwrap();
        let err = matrix_norm(&(&r.matrix - CMatrix::identity(20, 20)));
        assert!(err <= r.budget.total.max(1e-12), "{err} vs {:?}", r.budget);
        assert!(hermitian_deviation(&r.matrix) < 1e-9);
    }

    #[test]
    fn disjoint_support_gives_zero() {
        let a = random_hermitian(16, 11, -1.0, 0.5);
        let ext = ChiSpec::bump(2.0, 1.0).extension(0.5, 4).unwrap();
        let r = hs_function_of_matrix(&a, &ext, 1e-3, &HsSpec::default()).unwrap();
        assert!(matrix_norm(&r.matrix) <= r.budget.total.max(1e-12));
    }

    #[test]
    fn budget_covers_oracle_on_random_cases() {
        let c = ChiSpec::bump(0.2, 1.0);
        let ext = c.extension(0.5, 4).unwrap();
        for seed in 0..10 {
            let a = random_hermitian(24, 100 + seed, -1.0, 1.0);
            let r = hs_function_of_matrix(&a, &ext, 1e-3, &HsSpec::default()).unwrap();
            let o = spectral_function_oracle(&a, &|x| Complex64::new(c.eval(x), 0.0)).unwrap();
            let err = matrix_norm(&(&r.matrix - o));
            assert!(
                err <= r.budget.total,
                "seed {seed}: {err:e} > {:?}",
                r.budget
            );
            assert!(err < 1e-6);
        }
    }

    #[test]
    fn linear_in_chi_at_fixed_nodes() {
        let a = random_hermitian(10, 21, -1.0, 1.0);
        let spec = HsSpec {
            prune: 0.0,
            adaptive_rows: false,
            ..HsSpec::default()
        };
        // same support, so the x-cutoffs coincide
        let (w, s1) = ChiSpec::bump(0.0, 1.0).samples(2048);
        let s2: Vec<Complex64> = s1
            .iter()
            .enumerate()
            .map(|(k, v)| v * (1.5 + w.0 + (w.1 - w.0) * k as f64 / 2048.0))
            .collect();
        let sum: Vec<Complex64> = s1.iter().zip(&s2).map(|(a, b)| a + 2.0 * b).collect();
        let e1 = crate::calculus::build_almost_analytic_extension(w, &s1, 0.5, 4).unwrap();
        let e2 = crate::calculus::build_almost_analytic_extension(w, &s2, 0.5, 4).unwrap();
        let es = crate::calculus::build_almost_analytic_extension(w, &sum, 0.5, 4).unwrap();
        let h = |e| hs_function_of_matrix(&a, e, 1e-3, &spec).unwrap().matrix;
        let lhs = h(&es);
        let rhs = h(&e1) + h(&e2) * Complex64::new(2.0, 0.0);
        let err = matrix_norm(&(lhs - rhs));
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn complex_chi_matches_oracle() {
        let a = random_hermitian(12, 42, -0.8, 0.8);
        let c = ChiSpec::bump(0.0, 1.0);
        let (w, s) = c.samples(2048);
        let h = (w.1 - w.0) / 2048.0;
        let cs: Vec<Complex64> = s
            .iter()
            .enumerate()
            .map(|(k, v)| v * Complex64::new(1.0, w.0 + h * k as f64))
            .collect();
        let ext = crate::calculus::build_almost_analytic_extension(w, &cs, 0.5, 4).unwrap();
        assert!(!ext.is_real());
        let r = hs_function_of_matrix(&a, &ext, 1e-3, &HsSpec::default()).unwrap();
        let o = spectral_function_oracle(&a, &|x| Complex64::new(1.0, x) * c.eval(x)).unwrap();
        assert!(matrix_norm(&(&r.matrix - o)) <= r.budget.total);
    }
}
