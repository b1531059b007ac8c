use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::basis::QuantumBasis;
use super::quadrature::QuadratureRule;
use crate::error::Result;
use crate::geometry::ModelId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Bargmann only: `|N x ȳ|` reaches the truncation degree, so the basis
    /// sum misses a non-negligible tail.
    pub tail_warning: bool,
}

impl QuantumBasis {
    /// `Π_N(x, ȳ) = Σ_k x^k ȳ^k / ‖z^k‖²`.
    pub fn bergman_kernel_at(&self, x: Complex64, y_conj: Complex64) -> Result<KernelValue> {
        self.geometry.extension_at(x, y_conj)?;
        let w = x * y_conj;
        Ok(KernelValue {
            value: self.kernel_series(w, 0.0),
            tail_warning: self.tail_warning(w),
        })
    }

    fn tail_warning(&self, w: Complex64) -> bool {
        self.geometry.model == ModelId::BargmannPlane && self.level() * w.norm() >= self.dim as f64
    }

    /// `ln Π_N(x, ȳ)` from the closed form (branch of the log is irrelevant
    /// after exponentiation since `N` is an integer).
    pub fn log_closed_form_kernel(&self, x: Complex64, y_conj: Complex64) -> Complex64 {
        let nf = self.level();
        match self.geometry.model {
            ModelId::BargmannPlane => Complex64::new((nf / (2.0 * PI)).ln(), 0.0) + x * y_conj * nf,
            ModelId::ProjectiveLine => {
                Complex64::new(((nf + 1.0) / (2.0 * PI)).ln(), 0.0)
                    + (Complex64::new(1.0, 0.0) + x * y_conj).ln() * nf
            }
        }
    }

    /// `(N/2π) e^{N x ȳ}` or `((N+1)/2π)(1 + x ȳ)^N`.
    pub fn closed_form_kernel(&self, x: Complex64, y_conj: Complex64) -> Complex64 {
        let nf = self.level();
        match self.geometry.model {
            ModelId::BargmannPlane => (x * y_conj * nf).exp() * (nf / (2.0 * PI)),
            ModelId::ProjectiveLine => {
                (Complex64::new(1.0, 0.0) + x * y_conj).powu(self.n as u32)
                    * ((nf + 1.0) / (2.0 * PI))
            }
        }
    }

    /// `e^{-(N/2)(φ(x)+φ(y))} Π_N(x, ȳ)` from the basis sum.
    pub fn weighted_kernel_at(&self, x: Complex64, y: Complex64) -> Result<KernelValue> {
        let shift = -0.5
            * self.level()
            * (self.geometry.potential_at(x)? + self.geometry.potential_at(y)?);
        let w = x * y.conj();
        Ok(KernelValue {
            value: self.kernel_series(w, shift),
            tail_warning: self.tail_warning(w),
        })
    }

    /// Weighted kernel from the closed form.
    pub fn weighted_closed_form(&self, x: Complex64, y: Complex64) -> Result<Complex64> {
        let shift = -0.5
            * self.level()
            * (self.geometry.potential_at(x)? + self.geometry.potential_at(y)?);
        Ok((self.log_closed_form_kernel(x, y.conj()) + shift).exp())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproducingReport {
    /// `max |G - I|` for the Gram matrix of orthonormalized monomials.
    pub gram_max_deviation: f64,
    /// `max |∫ΠΠ / Π - 1|` over the sampled pairs.
    pub idempotence_max_relative: f64,
    pub pairs_checked: usize,
}

/// Checks the Gram matrix and `Π ∘ Π = Π` at the given pairs.
pub fn verify_reproducing(
    basis: &QuantumBasis,
    rule: &QuadratureRule,
    pairs: &[(Complex64, Complex64)],
) -> Result<ReproducingReport> {
    let gram = rule.assemble_matrix(basis, None, |_, out| {
        out.fill(Complex64::new(1.0, 0.0));
        Ok(())
    })?;
    let mut dev = 0.0f64;
    for j in 0..basis.dim {
        for k in 0..basis.dim {
            let target = if j == k { 1.0 } else { 0.0 };
            dev = dev.max((gram[(j, k)] - target).norm());
        }
    }
    let mut worst = 0.0f64;
    for &(x, y) in pairs {
        let yc = y.conj();
        let base = basis.log_closed_form_kernel(x, yc);
        let val = rule.integrate_log(|w| {
            basis.log_closed_form_kernel(x, w.conj()) + basis.log_closed_form_kernel(w, yc) - base
        });
        worst = worst.max((val - 1.0).norm());
    }
    Ok(ReproducingReport {
        gram_max_deviation: dev,
        idempotence_max_relative: worst,
        pairs_checked: pairs.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub n: usize,
    /// Least-squares slope of `ln(weighted / diagonal value)` against `N|x-y|²`.
    pub gaussian_slope: f64,
    /// Bargmann only: `max |weighted - (N/2π) e^{-N|x-y|²/2}|` relative.
    pub gaussian_max_relative: Option<f64>,
    /// Constants of the bound `|weighted| ≤ C N e^{-c √N dist}`.
    pub bound_constant: f64,
    pub fitted_rate: f64,
    pub holds: bool,
}

pub fn verify_offdiagonal_decay(
    basis: &QuantumBasis,
    pairs: &[(Complex64, Complex64)],
) -> Result<DecayReport> {
    let nf = basis.level();
    let diag = match basis.geometry.model {
        ModelId::BargmannPlane => nf / (2.0 * PI),
        ModelId::ProjectiveLine => (nf + 1.0) / (2.0 * PI),
    };
    let c_bound = 1.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rate = f64::INFINITY;
    let mut gauss_dev = 0.0f64;
    for &(x, y) in pairs {
        let w = basis.weighted_closed_form(x, y)?.norm();
        let d2 = (x - y).norm_sqr();
        if basis.geometry.model == ModelId::BargmannPlane {
            let g = diag * (-0.5 * nf * d2).exp();
            gauss_dev = gauss_dev.max((w - g).abs() / g);
        }
        let dist = basis.geometry.distance(x, y);
        if dist > 0.0 {
            xs.push(nf * d2);
            ys.push((w / diag).ln());
            rate = rate.min(((c_bound * nf).ln() - w.ln()) / (nf.sqrt() * dist));
        }
    }
    let slope = crate::harness::least_squares_slope(&xs, &ys)
        .map(|f| f.0)
        .unwrap_or(f64::NAN);
    Ok(DecayReport {
        n: basis.n,
        gaussian_slope: slope,
        gaussian_max_relative: (basis.geometry.model == ModelId::BargmannPlane)
            .then_some(gauss_dev),
        bound_constant: c_bound,
        fitted_rate: rate,
        holds: rate > 0.0,
    })
}
