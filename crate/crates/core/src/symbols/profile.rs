//! The compactly supported profile `p(u) = exp(1 - 1/(1-u))` on `u < 1`, zero
//! for `u ≥ 1`, and its closed-form derivatives.
//!
//! Writing `q = 1/(1-u)`, every derivative has the form `p⁽ⁿ⁾(u) = Pₙ(q) p(u)`
//! with `P₀ = 1` and `Pₙ₊₁(q) = q² (Pₙ'(q) - Pₙ(q))`.

use std::sync::OnceLock;

/// Largest derivative order for which coefficients are tabulated.
pub const MAX_TABULATED_ORDER: u32 = 24;

/// Default cap on materialized profile derivatives.
pub const DEFAULT_PROFILE_CAP: u32 = 8;

fn table() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut polys = vec![vec![1.0]];
        for n in 0..MAX_TABULATED_ORDER as usize {
            let p = &polys[n];
            let mut next = vec![0.0; p.len() + 2];
            for (k, &a) in p.iter().enumerate() {
                if k > 0 {
                    next[k + 1] += k as f64 * a;
                }
                next[k + 2] -= a;
            }
            polys.push(next);
        }
        polys
    })
}

/// Evaluates `p⁽ⁿ⁾(u)`.
pub fn profile_derivative(order: u32, u: f64) -> f64 {
    assert!(
        order <= MAX_TABULATED_ORDER,
        "profile order {order} not tabulated"
    );
    if !(u < 1.0) {
        return 0.0;
    }
    let q = 1.0 / (1.0 - u);
    let e = 1.0 - q;
    if e < -740.0 {
        return 0.0;
    }
    let base = e.exp();
    if order == 0 {
        return base;
    }
    let coeffs = &table()[order as usize];
    let poly = coeffs.iter().rev().fold(0.0, |acc, &c| acc * q + c);
    poly * base
}

/// Smooth step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

pub fn smooth_step_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    let da = a / (s * s);
    let db = -b / ((1.0 - s) * (1.0 - s));
    (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// Even plateau: 1 on `|t| ≤ 1/2`, 0 on `|t| ≥ 1`.
pub fn plateau(t: f64) -> f64 {
    smooth_step(2.0 - 2.0 * t.abs())
}

pub fn plateau_derivative(t: f64) -> f64 {
    -2.0 * t.signum() * smooth_step_derivative(2.0 - 2.0 * t.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for order in 0..8 {
            for &u in &[0.0, 0.1, 0.35, 0.6, 0.8] {
                let fd = (profile_derivative(order, u + h) - profile_derivative(order, u - h))
                    / (2.0 * h);
                let exact = profile_derivative(order + 1, u);
                let scale = exact.abs().max(1.0);
                assert!(
                    (fd - exact).abs() / scale < 1e-5,
                    "order {order} u {u}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn values_and_support() {
        assert_eq!(profile_derivative(0, 0.0), 1.0);
        assert_eq!(profile_derivative(0, 1.0), 0.0);
        assert_eq!(profile_derivative(3, 1.5), 0.0);
        assert_eq!(profile_derivative(5, 1.0 - 1e-9), 0.0);
        assert!((profile_derivative(1, 0.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(0.0), 1.0);
        assert_eq!(plateau(0.5), 1.0);
        assert_eq!(plateau(-1.0), 0.0);
        assert!((plateau(0.75) - 0.5).abs() < 1e-12);
        let h = 1e-6;
        for &t in &[-0.9, -0.6, 0.55, 0.7, 0.95] {
            let fd = (plateau(t + h) - plateau(t - h)) / (2.0 * h);
            assert!((fd - plateau_derivative(t)).abs() < 1e-6);
        }
    }
}
