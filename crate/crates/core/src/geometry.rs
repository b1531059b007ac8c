//! The two exactly solvable model Kähler manifolds.
//!
//! Both models are rotation invariant in their distinguished chart, with the
//! convention `i ∂∂̄φ = ω`:
//!
//! * the Bargmann plane, `φ(z) = |z|²`, `ψ(x, ȳ) = x ȳ`;
//! * the projective line in the affine chart, `φ(z) = log(1 + |z|²)`,
//!   `ψ(x, ȳ) = log(1 + x ȳ)`.
//!
//! The volume density with respect to planar Lebesgue measure is `μ = 2H`
//! where `H = ∂∂̄φ`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default radius of the projective-line chart.
pub const DEFAULT_CHART_BOUND: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    BargmannPlane,
    ProjectiveLine,
}

/// A model quantizable Kähler manifold in one fixed chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelGeometry {
    pub model: ModelId,
    /// Radius beyond which projective-line computations must switch chart.
    /// Infinite for the Bargmann plane.
    pub chart_bound: f64,
}

impl ModelGeometry {
    pub fn bargmann() -> Self {
        Self {
            model: ModelId::BargmannPlane,
            chart_bound: f64::INFINITY,
        }
    }

    pub fn projective_line() -> Self {
        Self {
            model: ModelId::ProjectiveLine,
            chart_bound: DEFAULT_CHART_BOUND,
        }
    }

    pub fn with_chart_bound(mut self, bound: f64) -> Self {
        if self.model == ModelId::ProjectiveLine {
            self.chart_bound = bound;
        }
        self
    }

    pub fn is_bargmann(&self) -> bool {
        self.model == ModelId::BargmannPlane
    }

    /// Identifier used in configuration files.
    pub fn id(&self) -> &'static str {
        match self.model {
            ModelId::BargmannPlane => "bargmann",
            ModelId::ProjectiveLine => "cp1",
        }
    }

    fn check_chart(&self, z: Complex64) -> Result<()> {
        let r = z.norm();
        if !(r <= self.chart_bound) {
            return Err(Error::ChartOverflow {
                re: z.re,
                im: z.im,
                bound: self.chart_bound,
            });
        }
        Ok(())
    }

    /// Kähler potential `φ(z)`.
    pub fn potential_at(&self, z: Complex64) -> Result<f64> {
        self.check_chart(z)?;
        Ok(self.potential_unchecked(z.norm_sqr()))
    }

    /// Potential as a function of `|z|²`, without the chart check.
    pub(crate) fn potential_unchecked(&self, r2: f64) -> f64 {
        match self.model {
            ModelId::BargmannPlane => r2,
            ModelId::ProjectiveLine => r2.ln_1p(),
        }
    }

    /// Polarized extension `ψ(x, ȳ)`, holomorphic in `x` and anti-holomorphic in `y`.
    pub fn extension_at(&self, x: Complex64, y_conj: Complex64) -> Result<Complex64> {
        self.check_chart(x)?;
        self.check_chart(y_conj)?;
        let p = x * y_conj;
        match self.model {
            ModelId::BargmannPlane => Ok(p),
            ModelId::ProjectiveLine => {
                let w = Complex64::new(1.0, 0.0) + p;
                if w.im == 0.0 && w.re <= 0.0 {
                    return Err(Error::NonPolarizable { re: w.re, im: w.im });
                }
                Ok(w.ln())
            }
        }
    }

    /// `(H, μ)` with `H = ∂∂̄φ` and `μ = 2H`.
    pub fn metric_volume_at(&self, z: Complex64) -> Result<(f64, f64)> {
        self.check_chart(z)?;
        let h = self.metric_unchecked(z.norm_sqr());
        Ok((h, 2.0 * h))
    }

    pub(crate) fn metric_unchecked(&self, r2: f64) -> f64 {
        match self.model {
            ModelId::BargmannPlane => 1.0,
            ModelId::ProjectiveLine => (1.0 + r2).powi(-2),
        }
    }

    /// Distance used by order-function certification: chart-Euclidean on the
    /// plane, Fubini–Study `atan(|x - y| / |1 + x̄ y|)` on the projective line.
    pub fn distance(&self, x: Complex64, y: Complex64) -> f64 {
        match self.model {
            ModelId::BargmannPlane => (x - y).norm(),
            ModelId::ProjectiveLine => {
                let num = (x - y).norm();
                let den = (Complex64::new(1.0, 0.0) + x.conj() * y).norm();
                num.atan2(den)
            }
        }
    }

    /// Antipodal chart map `z ↦ 1/z` of the projective line.
    pub fn to_antipodal_chart(&self, z: Complex64) -> Result<Complex64> {
        match self.model {
            ModelId::ProjectiveLine if z.norm_sqr() > 0.0 => Ok(z.inv()),
            ModelId::ProjectiveLine => Err(Error::Unsupported(
                "origin maps to the point at infinity".into(),
            )),
            ModelId::BargmannPlane => Err(Error::Unsupported(
                "the Bargmann plane has a single chart".into(),
            )),
        }
    }

    /// Phase-domination gap `Re ψ(x, ȳ) - ½(φ(x) + φ(y))`.
    pub fn phase_gap(&self, x: Complex64, y: Complex64) -> Result<f64> {
        let psi = self.extension_at(x, y.conj())?;
        Ok(psi.re - 0.5 * (self.potential_at(x)? + self.potential_at(y)?))
    }

    /// Fits the largest `C` with `Re ψ(x,ȳ) - ½(φ(x)+φ(y)) ≤ -C|x-y|²` on the
    /// samples. Diagonal pairs are skipped.
    pub fn phase_domination_check(
        &self,
        samples: &[(Complex64, Complex64)],
    ) -> Result<PhaseDomination> {
        let mut constant = f64::INFINITY;
        let mut violations = Vec::new();
        let mut used = 0;
        for &(x, y) in samples {
            let d2 = (x - y).norm_sqr();
            let gap = self.phase_gap(x, y)?;
            if d2 == 0.0 {
                if gap.abs() > 1e-12 {
                    violations.push((x, y, gap));
                }
                continue;
            }
            used += 1;
            let c = -gap / d2;
            if c <= 0.0 {
                violations.push((x, y, gap));
            }
            constant = constant.min(c);
        }
        if used == 0 {
            constant = f64::INFINITY;
        }
        Ok(PhaseDomination {
            constant,
            pairs_checked: used,
            violations,
        })
    }
}

#[derive(Clone, Debug)]
pub struct PhaseDomination {
    /// Largest admissible constant (`∞` when only diagonal pairs were given).
    pub constant: f64,
    pub pairs_checked: usize,
    /// Offending pairs `(x, y, gap)`.
    pub violations: Vec<(Complex64, Complex64, f64)>,
}

impl PhaseDomination {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.constant > 0.0
    }
}

impl fmt::Display for ModelGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bargmann" | "bargmann_plane" => Ok(Self::bargmann()),
            "cp1" | "projective_line" => Ok(Self::projective_line()),
            other => Err(Error::Config(format!(
                "unknown geometry `{other}` (expected bargmann | cp1)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn potentials() {
        let b = ModelGeometry::bargmann();
        let p = ModelGeometry::projective_line();
        assert_eq!(b.potential_at(c(0.0, 0.0)).unwrap(), 0.0);
        assert!((b.potential_at(c(1.0, 1.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!((p.potential_at(c(1.0, 0.0)).unwrap() - LN_2).abs() < 1e-15);
        assert!(matches!(
            p.potential_at(c(11.0, 0.0)),
            Err(Error::ChartOverflow { .. })
        ));
    }

    #[test]
    fn extensions() {
        let b = ModelGeometry::bargmann();
        let p = ModelGeometry::projective_line();
        assert_eq!(
            b.extension_at(c(2.0, 0.0), c(3.0, 0.0)).unwrap(),
            c(6.0, 0.0)
        );
        assert!((p.extension_at(c(1.0, 0.0), c(1.0, 0.0)).unwrap() - c(LN_2, 0.0)).norm() < 1e-15);
        for g in [b, p] {
            for x in [c(0.3, -0.2), c(-1.1, 0.7), c(2.0, 1.5)] {
                let d = g.extension_at(x, x.conj()).unwrap();
                assert!((d.re - g.potential_at(x).unwrap()).abs() < 1e-14);
                assert!(d.im.abs() < 1e-14);
            }
        }
        assert!(matches!(
            p.extension_at(c(2.0, 0.0), c(-0.5, 0.0)),
            Err(Error::NonPolarizable { .. })
        ));
    }

    #[test]
    fn metric_and_volume() {
        let b = ModelGeometry::bargmann();
        let p = ModelGeometry::projective_line();
        assert_eq!(b.metric_volume_at(c(0.4, 3.0)).unwrap(), (1.0, 2.0));
        assert_eq!(p.metric_volume_at(c(0.0, 0.0)).unwrap(), (1.0, 2.0));
        let (h, mu) = p.metric_volume_at(c(1.0, 0.0)).unwrap();
        assert!((h - 0.25).abs() < 1e-15 && (mu - 0.5).abs() < 1e-15);
    }

    #[test]
    fn metric_matches_finite_difference_laplacian() {
        // ∂∂̄ = Δ/4 on the plane.
        let p = ModelGeometry::projective_line();
        let step = 1e-3;
        for z in [c(0.2, 0.1), c(-0.7, 0.4), c(1.3, -0.9)] {
            let f = |w: Complex64| p.potential_at(w).unwrap();
            let lap = (f(z + step) + f(z - step) + f(z + c(0.0, step)) + f(z - c(0.0, step))
                - 4.0 * f(z))
                / (step * step);
            let (h, _) = p.metric_volume_at(z).unwrap();
            assert!((lap / 4.0 - h).abs() < 1e-6, "{z}: {} vs {h}", lap / 4.0);
        }
    }

    #[test]
    fn bargmann_phase_constant_is_one_half() {
        let b = ModelGeometry::bargmann();
        let pairs: Vec<_> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.37;
                (c(t.cos(), 0.3 * t.sin()), c(0.5 * t.sin(), -t.cos() * 0.2))
            })
            .collect();
        let rep = b.phase_domination_check(&pairs).unwrap();
        assert!((rep.constant - 0.5).abs() < 1e-12);
        assert!(rep.holds());
    }

    #[test]
    fn diagonal_pairs_are_vacuous() {
        let p = ModelGeometry::projective_line();
        let rep = p
            .phase_domination_check(&[(c(0.3, 0.1), c(0.3, 0.1))])
            .unwrap();
        assert!(rep.violations.is_empty());
        assert_eq!(rep.pairs_checked, 0);
    }

    #[test]
    fn projective_phase_constant_is_positive() {
        let p = ModelGeometry::projective_line();
        let mut pairs = Vec::new();
        let n = 15;
        for i in 0..n {
            for j in 0..n {
                let x = c(
                    -1.0 + 2.0 * i as f64 / (n - 1) as f64,
                    -1.0 + 2.0 * j as f64 / (n - 1) as f64,
                );
                if x.norm() > 1.0 {
                    continue;
                }
                for k in 0..8 {
                    let th = 2.0 * PI * k as f64 / 8.0;
                    let y = x + Complex64::from_polar(0.5 * (1 + k % 3) as f64 / 3.0, th);
                    if y.norm() <= 1.0 {
                        pairs.push((x, y));
                    }
                }
            }
        }
        let rep = p.phase_domination_check(&pairs).unwrap();
        assert!(rep.holds());
        assert!(rep.constant > 0.05, "C = {}", rep.constant);
    }

    #[test]
    fn extension_is_holomorphic_in_x_and_antiholomorphic_in_y() {
        let h = 1e-5;
        for g in [ModelGeometry::bargmann(), ModelGeometry::projective_line()] {
            for (x, y) in [(c(0.3, 0.2), c(0.1, -0.4)), (c(-0.5, 0.6), c(-0.2, 0.3))] {
                let psi = |x: Complex64, y: Complex64| g.extension_at(x, y.conj()).unwrap();
                // ∂_{x̄} = ½(∂_re + i ∂_im)
                let dxbar = 0.5
                    * ((psi(x + h, y) - psi(x - h, y)) / (2.0 * h)
                        + Complex64::i() * (psi(x + c(0.0, h), y) - psi(x - c(0.0, h), y))
                            / (2.0 * h));
                let dy = 0.5
                    * ((psi(x, y + h) - psi(x, y - h)) / (2.0 * h)
                        - Complex64::i() * (psi(x, y + c(0.0, h)) - psi(x, y - c(0.0, h)))
                            / (2.0 * h));
                assert!(dxbar.norm() < 1e-8, "{g}: {dxbar}");
                assert!(dy.norm() < 1e-8, "{g}: {dy}");
            }
        }
    }

    #[test]
    fn geometry_ids_round_trip() {
        for g in [ModelGeometry::bargmann(), ModelGeometry::projective_line()] {
            assert_eq!(g.id().parse::<ModelGeometry>().unwrap(), g);
        }
        assert!("torus".parse::<ModelGeometry>().is_err());
    }
}
