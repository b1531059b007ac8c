use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, ModelId};

/// Largest dense dimension allowed by default.
pub const DEFAULT_DIM_CAP: usize = 2048;

/// `ln k!` for `k = 0..=n`.
pub fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Orthogonal monomial basis `1, z, …, z^{D-1}` of the level-`N` sections.
#[derive(Clone, Debug, Serialize)]
pub struct QuantumBasis {
    pub n: usize,
    pub dim: usize,
    pub geometry: ModelGeometry,
    /// Radius used to size the Bargmann truncation.
    pub support_radius: f64,
    /// `ln ‖z^k‖²`.
    pub log_norms: Vec<f64>,
}

pub fn build_basis(
    geometry: &ModelGeometry,
    n: usize,
    support_radius: f64,
) -> Result<QuantumBasis> {
    build_basis_capped(geometry, n, support_radius, DEFAULT_DIM_CAP)
}

pub fn build_basis_capped(
    geometry: &ModelGeometry,
    n: usize,
    support_radius: f64,
    cap: usize,
) -> Result<QuantumBasis> {
    if n == 0 {
        return Err(Error::Config("level N must be at least 1".into()));
    }
    let nf = n as f64;
    let dim = match geometry.model {
        ModelId::BargmannPlane => {
            if !(support_radius.is_finite() && support_radius > 0.0) {
                return Err(Error::Config(format!(
                    "Bargmann truncation needs a finite positive support radius, got {support_radius}"
                )));
            }
            (2.0 * nf * support_radius * support_radius).ceil() as usize + 16
        }
        ModelId::ProjectiveLine => n + 1,
    };
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let lf = log_factorials(dim.max(n + 1) + 1);
    let two_pi = (2.0 * PI).ln();
    let log_norms = (0..dim)
        .map(|k| match geometry.model {
            ModelId::BargmannPlane => two_pi + lf[k] - (k as f64 + 1.0) * nf.ln(),
            ModelId::ProjectiveLine => two_pi + lf[k] + lf[n - k] - lf[n + 1],
        })
        .collect();
    Ok(QuantumBasis {
        n,
        dim,
        geometry: *geometry,
        support_radius,
        log_norms,
    })
}

impl QuantumBasis {
    pub fn squared_norm(&self, k: usize) -> f64 {
        self.log_norms[k].exp()
    }

    pub fn level(&self) -> f64 {
        self.n as f64
    }

    /// `e_k(z) e^{-Nφ(z)/2}` for the orthonormal basis `e_k = z^k / ‖z^k‖`.
    pub fn weighted_values(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let phi = self.geometry.potential_at(z)?;
        let half = -0.5 * self.level() * phi;
        let r = z.norm();
        let theta = z.arg();
        Ok((0..self.dim)
            .map(|k| {
                if r == 0.0 {
                    return if k == 0 {
                        Complex64::new((half - 0.5 * self.log_norms[0]).exp(), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                }
                let mag = (k as f64 * r.ln() - 0.5 * self.log_norms[k] + half).exp();
                Complex64::from_polar(mag, k as f64 * theta)
            })
            .collect())
    }

    /// Sum `Σ_k w^k / ‖z^k‖²` in the log domain, `w = x ȳ`.
    pub(crate) fn kernel_series(&self, w: Complex64, shift: f64) -> Complex64 {
        if w.norm_sqr() == 0.0 {
            return Complex64::new((shift - self.log_norms[0]).exp(), 0.0);
        }
        let lw = w.ln();
        (0..self.dim)
            .map(|k| (lw * k as f64 + (shift - self.log_norms[k])).exp())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_norms() {
        let b = build_basis(&ModelGeometry::bargmann(), 4, 1.0).unwrap();
        assert!((b.squared_norm(2) - PI / 16.0).abs() < 1e-15);
        assert_eq!(b.dim, 8 + 16);
        let c = build_basis(&ModelGeometry::projective_line(), 2, 1.0).unwrap();
        assert_eq!(c.dim, 3);
        assert!((c.squared_norm(1) - 2.0 * PI / 6.0).abs() < 1e-15);
        assert_eq!(
            build_basis(&ModelGeometry::projective_line(), 57, 1.0)
                .unwrap()
                .dim,
            58
        );
    }

    #[test]
    fn large_levels_stay_finite() {
        let c = build_basis(&ModelGeometry::projective_line(), 1000, 1.0).unwrap();
        assert!(c.log_norms.iter().all(|v| v.is_finite()));
        let b = build_basis(&ModelGeometry::bargmann(), 512, 1.0).unwrap();
        assert!(b.log_norms.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn dimension_cap() {
        let err = build_basis(&ModelGeometry::bargmann(), 2000, 1.0).unwrap_err();
        assert!(matches!(err, Error::DimensionCap { .. }));
        assert!(build_basis(&ModelGeometry::bargmann(), 8, f64::INFINITY).is_err());
    }
}
