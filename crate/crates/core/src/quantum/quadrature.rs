use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::basis::QuantumBasis;
use super::gauss::composite;
use crate::error::{Error, Result};
use crate::geometry::ModelId;

/// One radial node; `log_weight` already contains `e^{-Nφ} μ r dr` but not
/// the angular factor `2π / L`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RadialNode {
    pub r: f64,
    pub log_weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_panel: usize,
    /// Angular node count; `None` means `2D + 4`.
    pub angular: Option<usize>,
    /// Extra radial halvings applied before certification starts.
    pub base_refinement: u32,
    pub max_refinements: u32,
    pub target: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_panel: 12,
            angular: None,
            base_refinement: 0,
            max_refinements: 4,
            target: 1e-10,
        }
    }
}

/// Tensor rule: substituted radial Gauss–Legendre panels times uniform angles.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub n: usize,
    pub model: ModelId,
    pub radial: Vec<RadialNode>,
    pub angular: usize,
    pub refinement: u32,
    pub target: f64,
    /// Worst relative error in reproducing `‖z^k‖²`, `k < D`.
    pub norm_error: f64,
    pub worst_index: usize,
}

fn radial_nodes(basis: &QuantumBasis, nodes_per_panel: usize, refinement: u32) -> Vec<RadialNode> {
    let nf = basis.level();
    let scale = (1u64 << refinement) as f64;
    match basis.geometry.model {
        ModelId::BargmannPlane => {
            let k_max = (basis.dim + 8) as f64;
            let t_max = k_max + 14.0 * (k_max + 1.0).sqrt() + 40.0;
            let s_max = t_max.sqrt();
            let width = 0.5 / scale;
            let panels = (s_max / width).ceil() as usize;
            composite(0.0, panels as f64 * width, panels, nodes_per_panel)
                .into_iter()
                .map(|(s, w)| RadialNode {
                    r: s / nf.sqrt(),
                    log_weight: (2.0 * s / nf).ln() - s * s + w.ln(),
                })
                .collect()
        }
        ModelId::ProjectiveLine => {
            let panels = (PI * nf.sqrt() * scale).ceil().max(4.0) as usize;
            composite(0.0, PI, panels, nodes_per_panel)
                .into_iter()
                .map(|(theta, w)| {
                    let half = 0.5 * theta;
                    let c = half.cos();
                    RadialNode {
                        r: half.tan(),
                        log_weight: 2.0 * nf * c.ln() + (0.5 * theta.sin()).ln() + w.ln(),
                    }
                })
                .filter(|node| node.log_weight.is_finite())
                .collect()
        }
    }
}

fn norm_errors(basis: &QuantumBasis, radial: &[RadialNode]) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for k in 0..basis.dim {
        let q: f64 = radial
            .iter()
            .map(|node| (node.log_weight + 2.0 * k as f64 * node.r.ln() - basis.log_norms[k]).exp())
            .sum::<f64>()
            * 2.0
            * PI;
        let err = (q - 1.0).abs();
        if !(err <= worst.0) {
            worst = (err, k);
        }
    }
    worst
}

/// Builds and certifies the rule, halving radial panels until every monomial
/// norm is reproduced to the target.
pub fn build_quadrature(basis: &QuantumBasis, spec: &QuadratureSpec) -> Result<QuadratureRule> {
    let angular = spec.angular.unwrap_or(2 * basis.dim + 4);
    if angular < basis.dim + 1 {
        return Err(Error::Aliasing {
            angular,
            dim: basis.dim,
        });
    }
    let mut last = (f64::INFINITY, 0);
    for level in spec.base_refinement..=spec.base_refinement + spec.max_refinements {
        let radial = radial_nodes(basis, spec.nodes_per_panel, level);
        let (err, idx) = norm_errors(basis, &radial);
        if err < spec.target {
            return Ok(QuadratureRule {
                n: basis.n,
                model: basis.geometry.model,
                radial,
                angular,
                refinement: level,
                target: spec.target,
                norm_error: err,
                worst_index: idx,
            });
        }
        last = (err, idx);
    }
    Err(Error::QuadratureNonConvergence {
        worst_index: last.1,
        worst_error: last.0,
        target: spec.target,
    })
}

impl QuadratureRule {
    pub fn angles(&self) -> Vec<f64> {
        (0..self.angular)
            .map(|l| 2.0 * PI * l as f64 / self.angular as f64)
            .collect()
    }

    /// `∫ F e^{-Nφ} μ dm`, summed in node order.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let dth = 2.0 * PI / self.angular as f64;
        let angles = self.angles();
        let per_node: Vec<Complex64> = self
            .radial
            .par_iter()
            .map(|node| {
                let s: Complex64 = angles
                    .iter()
                    .map(|&t| f(Complex64::from_polar(node.r, t)))
                    .sum();
                s * node.log_weight.exp() * dth
            })
            .collect();
        per_node.into_iter().sum()
    }

    /// Like [`integrate`](Self::integrate) but the integrand returns a log
    /// magnitude and phase, for kernels that overflow in linear scale.
    pub fn integrate_log<F>(&self, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        let dth = (2.0 * PI / self.angular as f64).ln();
        let angles = self.angles();
        let per_node: Vec<Complex64> = self
            .radial
            .par_iter()
            .map(|node| {
                angles
                    .iter()
                    .map(|&t| (f(Complex64::from_polar(node.r, t)) + node.log_weight + dth).exp())
                    .sum()
            })
            .collect();
        per_node.into_iter().sum()
    }

    /// Assembles `A_jk = ∫ F e_k ē_j e^{-Nφ} μ dm` in the orthonormal basis.
    ///
    /// `samples(r, out)` fills `out[l] = F(r e^{iθ_l})`. Radial nodes beyond
    /// `support` are skipped. Every entry is summed over radial nodes in a
    /// fixed order, so the result does not depend on thread scheduling.
    pub fn assemble_matrix<F>(
        &self,
        basis: &QuantumBasis,
        support: Option<f64>,
        samples: F,
    ) -> Result<DMatrix<Complex64>>
    where
        F: Fn(f64, &mut [Complex64]) -> Result<()> + Sync,
    {
        if basis.n != self.n || basis.geometry.model != self.model {
            return Err(Error::LevelMismatch {
                left: basis.n,
                right: self.n,
            });
        }
        let d = basis.dim;
        let l = self.angular;
        let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(l);
        let dth = 2.0 * PI / l as f64;
        let limit = support.map(|s| s * (1.0 + 1e-12));
        let active: Vec<&RadialNode> = self
            .radial
            .iter()
            .filter(|node| limit.is_none_or(|s| node.r <= s))
            .collect();

        struct NodeData {
            spectrum: Vec<Complex64>,
            a: Vec<f64>,
            lo: usize,
        }

        let data: Vec<Option<NodeData>> = active
            .par_iter()
            .map(|node| -> Result<Option<NodeData>> {
                let lr = node.r.ln();
                let a_full: Vec<f64> = (0..d)
                    .map(|j| {
                        (0.5 * node.log_weight + j as f64 * lr - 0.5 * basis.log_norms[j]).exp()
                    })
                    .collect();
                let Some(lo) = a_full.iter().position(|&v| v >= 1e-17) else {
                    return Ok(None);
                };
                let hi = d - a_full.iter().rev().position(|&v| v >= 1e-17).unwrap_or(0);
                let mut buf = vec![Complex64::new(0.0, 0.0); l];
                samples(node.r, &mut buf)?;
                if let Some(bad) = buf
                    .iter()
                    .position(|v| !(v.re.is_finite() && v.im.is_finite()))
                {
                    let z = Complex64::from_polar(node.r, dth * bad as f64);
                    return Err(Error::NonFinite { re: z.re, im: z.im });
                }
                fft.process(&mut buf);
                for v in buf.iter_mut() {
                    *v *= dth;
                }
                Ok(Some(NodeData {
                    spectrum: buf,
                    a: a_full[lo..hi].to_vec(),
                    lo,
                }))
            })
            .collect::<Result<_>>()?;
        let data: Vec<NodeData> = data.into_iter().flatten().collect();

        let rows: Vec<Vec<Complex64>> = (0..d)
            .into_par_iter()
            .map(|j| {
                let mut row = vec![Complex64::new(0.0, 0.0); d];
                for nd in &data {
                    let hi = nd.lo + nd.a.len();
                    if j < nd.lo || j >= hi {
                        continue;
                    }
                    let aj = nd.a[j - nd.lo];
                    for k in nd.lo..hi {
                        let m = (j + l - k) % l;
                        row[k] += nd.spectrum[m] * (aj * nd.a[k - nd.lo]);
                    }
                }
                row
            })
            .collect();
        Ok(DMatrix::from_fn(d, d, |j, k| rows[j][k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelGeometry;
    use crate::quantum::build_basis;

    #[test]
    fn bargmann_norms_reproduced() {
        let b = build_basis(&ModelGeometry::bargmann(), 10, 1.0).unwrap();
        let rule = build_quadrature(&b, &QuadratureSpec::default()).unwrap();
        assert!(rule.norm_error < 1e-10);
        let mass = rule.integrate(|_| Complex64::new(1.0, 0.0));
        assert!((mass.re - 2.0 * PI / 10.0).abs() / (2.0 * PI / 10.0) < 1e-9);
    }

    #[test]
    fn projective_volume() {
        let b = build_basis(&ModelGeometry::projective_line(), 20, 1.0).unwrap();
        let rule = build_quadrature(&b, &QuadratureSpec::default()).unwrap();
        assert!(rule.norm_error < 1e-10);
        // e^{Nφ} cancels the weight, leaving the Fubini–Study volume.
        let vol = rule.integrate(|z| Complex64::new((1.0 + z.norm_sqr()).powi(20), 0.0));
        assert!((vol.re - 2.0 * PI).abs() < 1e-9, "{vol}");
    }

    #[test]
    fn aliasing_detected() {
        let b = build_basis(&ModelGeometry::bargmann(), 10, 1.0).unwrap();
        let spec = QuadratureSpec {
            angular: Some(b.dim),
            ..Default::default()
        };
        assert!(matches!(
            build_quadrature(&b, &spec),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn non_convergence_reported() {
        let b = build_basis(&ModelGeometry::bargmann(), 10, 1.0).unwrap();
        let spec = QuadratureSpec {
            nodes_per_panel: 1,
            max_refinements: 0,
            target: 1e-14,
            ..Default::default()
        };
        assert!(matches!(
            build_quadrature(&b, &spec),
            Err(Error::QuadratureNonConvergence { .. })
        ));
    }
}
