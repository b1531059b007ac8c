//! Bidifferential operators `Σ c · ∂^a ∂̄^b f · ∂^c ∂̄^d g` with rational
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;

/// Exponents `[a, b, c, d]` of `∂^a ∂̄^b f · ∂^c ∂̄^d g`.
pub type Multi = [u32; 4];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BiDiff {
    pub terms: BTreeMap<Multi, Rational64>,
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

impl BiDiff {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `f · g`.
    pub fn product() -> Self {
        Self::monomial([0, 0, 0, 0], Rational64::from_integer(1))
    }

    pub fn monomial(m: Multi, c: Rational64) -> Self {
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    fn add_term(&mut self, m: Multi, c: Rational64) {
        let e = self
            .terms
            .entry(m)
            .or_insert_with(|| Rational64::from_integer(0));
        *e += c;
        if *e == Rational64::from_integer(0) {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, *c);
        }
        out
    }

    pub fn scale(&self, c: Rational64) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(*m, v * c);
        }
        out
    }

    /// Leibniz rule for `∂` applied to the product.
    pub fn d(&self) -> Self {
        let mut out = Self::zero();
        for (&[a, b, c, d], &v) in &self.terms {
            out.add_term([a + 1, b, c, d], v);
            out.add_term([a, b, c + 1, d], v);
        }
        out
    }

    /// Leibniz rule for `∂̄`.
    pub fn dbar(&self) -> Self {
        let mut out = Self::zero();
        for (&[a, b, c, d], &v) in &self.terms {
            out.add_term([a, b + 1, c, d], v);
            out.add_term([a, b, c, d + 1], v);
        }
        out
    }

    /// `(∂∂̄)^k` applied to the product.
    pub fn laplace_pow(&self, k: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.d().dbar();
        }
        out
    }

    /// Largest derivative order falling on `f` and on `g`.
    pub fn max_orders(&self) -> (u32, u32) {
        self.terms
            .keys()
            .fold((0, 0), |(p, q), &[a, b, c, d]| (p.max(a + b), q.max(c + d)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(-1)^j / j! · ∂^j f · ∂̄^j g`.
    pub fn closed_form_bargmann(j: u32) -> Self {
        let sign = if j.is_multiple_of(2) { 1 } else { -1 };
        Self::monomial([j, 0, 0, j], Rational64::new(sign, factorial(j)))
    }
}

/// Bargmann star coefficients `h_0..h_J` as bidifferential operators, from
/// the kernel-composition recursion with diagonal coefficients
/// `C_d[u] = (∂∂̄)^d u / d!`:
///
/// `h_j = Σ_{a+b+d=j} ∂̄^d(∂∂̄)^a f · ∂^d(∂∂̄)^b g / (a! b! d!) − Σ_{d≥1} (∂∂̄)^d h_{j-d} / d!`.
pub fn bargmann_recursion(max_j: u32) -> Vec<BiDiff> {
    let mut out: Vec<BiDiff> = Vec::with_capacity(max_j as usize + 1);
    for j in 0..=max_j {
        let mut h = BiDiff::zero();
        for d in 0..=j {
            for a in 0..=(j - d) {
                let b = j - d - a;
                let c = Rational64::new(1, factorial(a) * factorial(b) * factorial(d));
                h = h.add(&BiDiff::monomial([a, a + d, b + d, b], c));
            }
        }
        for d in 1..=j {
            let corr = out[(j - d) as usize]
                .laplace_pow(d)
                .scale(Rational64::new(-1, factorial(d)));
            h = h.add(&corr);
        }
        out.push(h);
    }
    out
}

impl fmt::Display for BiDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&[a, b, c, d], v)| format!("({v}) d^{a}db^{b} f * d^{c}db^{d} g"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_matches_closed_form() {
        let hs = bargmann_recursion(6);
        for (j, h) in hs.iter().enumerate() {
            assert_eq!(*h, BiDiff::closed_form_bargmann(j as u32), "j = {j}: {h}");
            let (p, q) = h.max_orders();
            assert!(p <= 2 * j as u32 && q <= 2 * j as u32);
        }
    }

    #[test]
    fn leibniz() {
        let p = BiDiff::product().d();
        assert_eq!(p.terms.len(), 2);
        let lap = BiDiff::product().laplace_pow(1);
        assert_eq!(lap.terms.len(), 4);
    }
}
