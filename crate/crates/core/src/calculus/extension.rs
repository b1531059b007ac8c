//! Fourier-built almost-analytic extensions of compactly supported cut-offs.
//!
//! With `χ̂` the discrete spectrum of the samples,
//! `χ̃(x+iy) = ψ(x) Σ_ξ χ̂(ξ) e^{iξ(x+iy)} σ(ξy)` where `σ` is the even plateau
//! (1 on `[-½,½]`, 0 outside `[-1,1]`) and `ψ ≡ 1` near the support of χ.
//! Because `∂̄ e^{iξz} = 0`, the ∂̄-derivative only sees `σ'` and `ψ'`:
//! `∂̄χ̃ = ψ Σ χ̂ e^{iξz} (i/2) ξ σ'(ξy) + ½ψ' Σ χ̂ e^{iξz} σ(ξy)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{least_squares_slope, METRIC_FLOOR};
use crate::symbols::profile::{
    plateau, plateau_derivative, profile_derivative, smooth_step, smooth_step_derivative,
};
use crate::symbols::SymbolExpr;

/// Spectral tail allowed in the top eighth of the frequency band.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Coefficients below this fraction of the largest are dropped.
/// Phase recurrences are re-seeded this often.
const RESYNC: usize = 512;
const MODE_CUTOFF: f64 = 1e-18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChiShape {
    /// `p(t²)` with `t = (x-c)/w`; supported on `|x-c| < w`.
    Bump,
    /// 1 on `|x-c| ≤ w/2`, 0 on `|x-c| ≥ w`.
    Plateau,
}

/// A cut-off `χ` on the real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSpec {
    pub center: f64,
    pub width: f64,
    pub shape: ChiShape,
}

fn plateau_of_square(u: f64) -> f64 {
    let s = (u - 0.25) / 0.75;
    let a = profile_derivative(0, s);
    let b = profile_derivative(0, 1.0 - s);
    a / (a + b)
}

impl ChiSpec {
    pub fn bump(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            shape: ChiShape::Bump,
        }
    }

    pub fn plateau(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            shape: ChiShape::Plateau,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        match self.shape {
            ChiShape::Bump => profile_derivative(0, t * t),
            ChiShape::Plateau => plateau_of_square(t * t),
        }
    }

    /// Interval outside which χ vanishes.
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    /// `χ ∘ f` as an expression tree.
    pub fn compose(&self, f: &SymbolExpr) -> SymbolExpr {
        let t = (f.clone() - SymbolExpr::real(self.center)) * SymbolExpr::real(1.0 / self.width);
        let u = t.powi(2);
        match self.shape {
            ChiShape::Bump => SymbolExpr::profile(u, 0),
            ChiShape::Plateau => {
                let s = (u - SymbolExpr::real(0.25)) * SymbolExpr::real(1.0 / 0.75);
                let a = SymbolExpr::profile(s.clone(), 0);
                let b = SymbolExpr::profile(SymbolExpr::one() - s, 0);
                a.clone() * (&a + &b).recip()
            }
        }
    }

    /// Samples on a periodic window four widths wide.
    pub fn samples(&self, points: usize) -> ((f64, f64), Vec<Complex64>) {
        let window = (
            self.center - 2.0 * self.width,
            self.center + 2.0 * self.width,
        );
        let h = (window.1 - window.0) / points as f64;
        let vals = (0..points)
            .map(|k| Complex64::new(self.eval(window.0 + h * k as f64), 0.0))
            .collect();
        (window, vals)
    }

    pub fn extension(&self, half_width: f64, target_order: u32) -> Result<AlmostAnalyticExtension> {
        let (window, vals) = self.samples(2048);
        build_almost_analytic_extension(window, &vals, half_width, target_order)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtensionKind {
    Spectral,
    /// `χ̃(x+iy) = χ(x)`; kept as a negative control.
    Naive,
    /// An exact polynomial times the cut-off `ψ`.
    Polynomial(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct AlmostAnalyticExtension {
    pub window: (f64, f64),
    pub samples: Vec<Complex64>,
    /// Interval where the base function is non-negligible.
    pub support: (f64, f64),
    /// `ψ ≡ 1` within `margin` of the support, 0 beyond `2·margin`.
    pub margin: f64,
    pub half_width: f64,
    pub target_order: u32,
    pub kind: ExtensionKind,
    modes: Vec<(f64, Complex64)>,
    real: bool,
}

/// Result of a ∂̄-decay measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbarDecay {
    pub ys: Vec<f64>,
    pub sup_values: Vec<f64>,
    pub slope: f64,
    pub stderr: f64,
    pub points_used: usize,
    pub target_order: u32,
    /// `max_y sup_x |∂̄χ̃| / y^M` over the measured heights.
    pub constant: f64,
    pub meets_target: bool,
}

/// Builds χ̃ from samples of χ on the periodic window `[a, b)`.
pub fn build_almost_analytic_extension(
    window: (f64, f64),
    samples: &[Complex64],
    half_width: f64,
    target_order: u32,
) -> Result<AlmostAnalyticExtension> {
    let n = samples.len();
    if n < 16 {
        return Err(Error::Resolution(format!("{n} samples are too few")));
    }
    if !(half_width > 0.0 && half_width < 1.0) {
        return Err(Error::Config(format!(
            "strip half-width {half_width} must lie in (0, 1) for the cutoff design"
        )));
    }
    let (a, b) = window;
    let len = b - a;
    let h = len / n as f64;
    let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Resolution(
            "base function vanishes identically".into(),
        ));
    }
    // exact zeros: the cutoff then depends on the support alone, not on the scale
    let live: Vec<usize> = (0..n).filter(|&k| samples[k].norm() > 0.0).collect();
    let (lo, hi) = (live[0], *live.last().expect("nonempty"));
    if lo == 0 || hi == n - 1 {
        return Err(Error::Resolution(
            "base function is not compactly supported inside the sample window".into(),
        ));
    }
    let support = (a + h * (lo - 1) as f64, a + h * (hi + 1) as f64);
    let margin = (support.0 - a).min(b - support.1) / 3.0;

    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let cmax = buf.iter().map(|c| c.norm() * scale).fold(0.0, f64::max);
    let band = n / 16;
    let tail = (n / 2 - band..n / 2 + band)
        .map(|k| buf[k].norm() * scale)
        .fold(0.0, f64::max);
    if tail > TAIL_TOLERANCE * cmax {
        return Err(Error::Resolution(format!(
            "spectral tail {:.3e} exceeds {TAIL_TOLERANCE:e} of the peak; refine the samples",
            tail / cmax
        )));
    }
    let mut modes = Vec::new();
    for (k, c) in buf.iter().enumerate() {
        let c = c * scale;
        if c.norm() < MODE_CUTOFF * cmax {
            continue;
        }
        let kk = if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        let xi = 2.0 * PI * kk / len;
        // shift the phase so the series is in x rather than x - a
        modes.push((xi, c * Complex64::from_polar(1.0, -xi * a)));
    }
    modes.sort_by(|p, q| p.0.abs().total_cmp(&q.0.abs()));
    let real = samples.iter().all(|v| v.im == 0.0);
    Ok(AlmostAnalyticExtension {
        window,
        samples: samples.to_vec(),
        support,
        margin,
        half_width,
        target_order,
        kind: ExtensionKind::Spectral,
        modes,
        real,
    })
}

impl AlmostAnalyticExtension {
    /// The naive extension of the same base function.
    pub fn naive(&self) -> Self {
        Self {
            kind: ExtensionKind::Naive,
            ..self.clone()
        }
    }

    /// `p(z) ψ(x)` for a real polynomial `p` (coefficients in increasing degree),
    /// with `ψ ≡ 1` on `plateau` widened by `margin`.
    pub fn polynomial(coeffs: Vec<f64>, plateau: (f64, f64), margin: f64, half_width: f64) -> Self {
        Self {
            window: (plateau.0 - 3.0 * margin, plateau.1 + 3.0 * margin),
            samples: Vec::new(),
            support: plateau,
            margin,
            half_width,
            target_order: u32::MAX,
            kind: ExtensionKind::Polynomial(coeffs),
            modes: Vec::new(),
            real: true,
        }
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Interval in `x` outside which χ̃ vanishes.
    pub fn x_range(&self) -> (f64, f64) {
        (
            self.support.0 - 2.0 * self.margin,
            self.support.1 + 2.0 * self.margin,
        )
    }

    fn cutoff(&self, x: f64) -> (f64, f64) {
        let (d, sign) = if x < self.support.0 {
            (self.support.0 - x, -1.0)
        } else if x > self.support.1 {
            (x - self.support.1, 1.0)
        } else {
            return (1.0, 0.0);
        };
        let s = (d - self.margin) / self.margin;
        (
            1.0 - smooth_step(s),
            -sign * smooth_step_derivative(s) / self.margin,
        )
    }

    /// `τ(y)` and `τ'(y)`: 1 for `|y| ≤ Y/2`, 0 from `|y| = Y` on, so χ̃ is compactly supported.
    fn vertical(&self, y: f64) -> (f64, f64) {
        let half = 0.5 * self.half_width;
        let s = (y.abs() - half) / half;
        if s <= 0.0 {
            return (1.0, 0.0);
        }
        (
            1.0 - smooth_step(s),
            -y.signum() * smooth_step_derivative(s) / half,
        )
    }

    /// Spectral sums `Σ c e^{iξz} σ(ξy)` and `Σ c e^{iξz} (i/2) ξ σ'(ξy)`.
    fn sums(&self, z: Complex64, want_value: bool) -> (Complex64, Complex64) {
        let (x, y) = (z.re, z.im);
        let mut value = Complex64::new(0.0, 0.0);
        let mut dbar = Complex64::new(0.0, 0.0);
        // modes are sorted by |ξ|: σ(ξy) needs |ξy| < 1, σ'(ξy) needs |ξy| > ½
        let ay = y.abs();
        let (lo, hi) = if ay == 0.0 {
            (0, self.modes.len())
        } else {
            let hi = self.modes.partition_point(|m| m.0.abs() * ay < 1.0);
            let lo = if want_value {
                0
            } else {
                self.modes.partition_point(|m| m.0.abs() * ay <= 0.5)
            };
            (lo, hi)
        };
        for &(xi, c) in &self.modes[lo..hi] {
            let t = xi * y;
            let dp = plateau_derivative(t);
            let e = c * Complex64::from_polar((-t).exp(), xi * x);
            if want_value {
                value += e * plateau(t);
            }
            if dp != 0.0 {
                dbar += e * Complex64::new(0.0, 0.5 * xi * dp);
            }
        }
        (value, dbar)
    }

    fn poly(&self, coeffs: &[f64], z: Complex64) -> Complex64 {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        let (psi, _) = self.cutoff(z.re);
        let (tau, _) = self.vertical(z.im);
        if psi == 0.0 || tau == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        tau * psi * self.unscaled(z)
    }

    fn unscaled(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            ExtensionKind::Spectral => self.sums(z, true).0,
            ExtensionKind::Naive => self.sums(Complex64::new(z.re, 0.0), true).0,
            ExtensionKind::Polynomial(c) => self.poly(c, z),
        }
    }

    /// The base function on the real line.
    pub fn base(&self, x: f64) -> Complex64 {
        self.value(Complex64::new(x, 0.0))
    }

    pub fn dbar(&self, z: Complex64) -> Complex64 {
        let (psi, dpsi) = self.cutoff(z.re);
        let (tau, dtau) = self.vertical(z.im);
        if (psi == 0.0 && dpsi == 0.0) || (tau == 0.0 && dtau == 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let need_value = dpsi != 0.0 || dtau != 0.0;
        // ∂̄(τψu) = τ ψ ∂̄u + ½ τ ψ' u + (i/2) τ' ψ u
        let (v, d) = match &self.kind {
            ExtensionKind::Spectral => self.sums(z, need_value),
            ExtensionKind::Naive => {
                // u(x) = χ(x): ∂̄u = ½ χ'(x)
                let x = z.re;
                let mut v = Complex64::new(0.0, 0.0);
                let mut dv = Complex64::new(0.0, 0.0);
                for &(xi, c) in &self.modes {
                    let e = c * Complex64::from_polar(1.0, xi * x);
                    v += e;
                    dv += e * Complex64::new(0.0, xi);
                }
                (v, 0.5 * dv)
            }
            ExtensionKind::Polynomial(c) => (self.poly(c, z), Complex64::new(0.0, 0.0)),
        };
        tau * (psi * d + 0.5 * dpsi * v) + Complex64::new(0.0, 0.5 * dtau * psi) * v
    }

    /// `∂̄χ̃(x₀ + k h + iy)` for `k < count`. Spectral extensions advance the
    /// mode phases by recurrence instead of evaluating exponentials per point.
    pub fn dbar_row(&self, y: f64, x0: f64, h: f64, count: usize) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let (tau, dtau) = self.vertical(y);
        if !matches!(self.kind, ExtensionKind::Spectral) || (tau == 0.0 && dtau == 0.0) {
            return (0..count)
                .map(|k| self.dbar(Complex64::new(x0 + h * k as f64, y)))
                .collect();
        }
        let ay = y.abs();
        let hi = if ay == 0.0 {
            self.modes.len()
        } else {
            self.modes.partition_point(|m| m.0.abs() * ay < 1.0)
        };
        // (value weight, ∂̄ weight, step, phase)
        let mut active: Vec<(Complex64, Complex64, Complex64, Complex64)> = self.modes[..hi]
            .iter()
            .map(|&(xi, c)| {
                let t = xi * y;
                let a = c * (-t).exp();
                (
                    a * plateau(t),
                    a * Complex64::new(0.0, 0.5 * xi * plateau_derivative(t)),
                    Complex64::from_polar(1.0, xi * h),
                    Complex64::from_polar(1.0, xi * x0),
                )
            })
            .collect();
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let x = x0 + h * k as f64;
            if k % RESYNC == 0 && k > 0 {
                for (m, &(xi, _)) in active.iter_mut().zip(&self.modes) {
                    m.3 = Complex64::from_polar(1.0, xi * x);
                }
            }
            let (psi, dpsi) = self.cutoff(x);
            if psi == 0.0 && dpsi == 0.0 {
                out.push(zero);
            } else {
                let need_value = dpsi != 0.0 || dtau != 0.0;
                let (mut v, mut d) = (zero, zero);
                for m in &active {
                    if need_value {
                        v += m.0 * m.3;
                    }
                    d += m.1 * m.3;
                }
                out.push(
                    tau * (psi * d + 0.5 * dpsi * v) + Complex64::new(0.0, 0.5 * dtau * psi) * v,
                );
            }
            for m in active.iter_mut() {
                m.3 *= m.2;
            }
        }
        out
    }

    /// `sup_x |∂̄χ̃(x+iy)|` over a uniform grid of `points` abscissae in the x-range.
    pub fn sup_dbar(&self, y: f64, points: usize) -> f64 {
        let (a, b) = self.x_range();
        let h = (b - a) / (points - 1) as f64;
        (0..points)
            .into_par_iter()
            .map(|k| self.dbar(Complex64::new(a + h * k as f64, y)).norm())
            .reduce(|| 0.0, f64::max)
    }

    /// Measures `sup_x |∂̄χ̃(x+iy)|` at the given heights and fits the log-log slope,
    /// ignoring values at the `1e-13` floor.
    pub fn measure_dbar_decay(&self, ys: &[f64]) -> Result<DbarDecay> {
        let sup: Vec<f64> = ys.iter().map(|&y| self.sup_dbar(y, 2001)).collect();
        let keep: Vec<usize> = (0..ys.len()).filter(|&k| sup[k] > METRIC_FLOOR).collect();
        let (slope, stderr) = if keep.len() >= 2 {
            let lx: Vec<f64> = keep.iter().map(|&k| ys[k].ln()).collect();
            let ly: Vec<f64> = keep.iter().map(|&k| sup[k].ln()).collect();
            let (s, e, _) = least_squares_slope(&lx, &ly).ok_or(Error::TooFewPoints(keep.len()))?;
            (s, e)
        } else if sup.iter().all(|&v| v <= METRIC_FLOOR) {
            // vanishes to working precision at every height
            (f64::INFINITY, 0.0)
        } else {
            return Err(Error::TooFewPoints(keep.len()));
        };
        let m = self.target_order.min(64) as i32;
        let constant = ys
            .iter()
            .zip(&sup)
            .map(|(y, s)| s / y.powi(m))
            .fold(0.0, f64::max);
        Ok(DbarDecay {
            ys: ys.to_vec(),
            sup_values: sup,
            slope,
            stderr,
            points_used: keep.len(),
            target_order: self.target_order,
            constant,
            meets_target: slope >= self.target_order as f64 - 0.3,
        })
    }
}

/// Geometric heights `10^{-3} .. 10^{-1}` used for decay fits.
pub fn default_decay_heights() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi() -> ChiSpec {
        ChiSpec::bump(2.0, 1.0)
    }

    #[test]
    fn restricts_to_base_on_real_grid() {
        let c = chi();
        let (window, vals) = c.samples(2048);
        let ext = build_almost_analytic_extension(window, &vals, 0.5, 4).unwrap();
        let h = (window.1 - window.0) / 2048.0;
        for k in (0..2048).step_by(7) {
            let x = window.0 + h * k as f64;
            assert!((ext.base(x) - vals[k]).norm() < 1e-10, "x = {x}");
        }
        // off-grid points use the trigonometric interpolant
        assert!((ext.base(2.123).re - c.eval(2.123)).abs() < 1e-10);
    }

    #[test]
    fn bump_decay_and_naive_control() {
        let ext = chi().extension(0.5, 4).unwrap();
        let ys = default_decay_heights();
        let d = ext.measure_dbar_decay(&ys).unwrap();
        assert!(d.meets_target, "{d:?}");
        assert!(d.slope >= 3.7);
        let naive = ext.naive().measure_dbar_decay(&ys).unwrap();
        assert!(naive.slope.abs() < 0.1, "{naive:?}");
        assert!(!naive.meets_target);
    }

    #[test]
    fn polynomial_extension_is_holomorphic_on_plateau() {
        let ext = AlmostAnalyticExtension::polynomial(vec![1.0, -2.0, 0.5], (1.0, 3.0), 0.25, 0.5);
        for x in [1.0, 1.7, 2.4, 3.0] {
            for y in [1e-3, 0.1, 0.25] {
                assert_eq!(ext.dbar(Complex64::new(x, y)), Complex64::new(0.0, 0.0));
            }
        }
        assert!(ext.dbar(Complex64::new(3.3, 0.1)).norm() > 0.0);
    }

    #[test]
    fn rejects_unresolved_and_tall_strips() {
        let c = chi();
        let (window, vals) = c.samples(2048);
        assert!(matches!(
            build_almost_analytic_extension(window, &vals, 1.5, 4),
            Err(Error::Config(_))
        ));
        // a jump is not resolved by any sample count
        let step: Vec<Complex64> = (0..512)
            .map(|k| Complex64::new(if (100..300).contains(&k) { 1.0 } else { 0.0 }, 0.0))
            .collect();
        assert!(matches!(
            build_almost_analytic_extension((0.0, 1.0), &step, 0.5, 4),
            Err(Error::Resolution(_))
        ));
        // support touching the window edge
        let (w, v) = ChiSpec::bump(0.0, 1.0).samples(1024);
        let shifted: Vec<Complex64> = v.iter().cycle().skip(512).take(1024).copied().collect();
        assert!(matches!(
            build_almost_analytic_extension(w, &shifted, 0.5, 4),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn composition_matches_real_evaluation() {
        for c in [ChiSpec::bump(2.0, 0.5), ChiSpec::plateau(2.0, 0.8)] {
            let g = c.compose(&crate::parse_symbol("z + conj(z)").unwrap());
            for x in [0.6, 0.8, 1.0, 1.1, 1.3] {
                let v = g.eval(Complex64::new(x, 0.0)).re;
                assert!((v - c.eval(2.0 * x)).abs() < 1e-13, "{c:?} {x}");
            }
        }
        let p = ChiSpec::plateau(0.0, 1.0);
        assert_eq!(p.eval(0.3), 1.0);
        assert_eq!(p.eval(1.2), 0.0);
        assert!(p.eval(0.75) > 0.0 && p.eval(0.75) < 1.0);
    }
}
