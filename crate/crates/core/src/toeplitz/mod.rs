//! Dense Toeplitz matrices `T_{N,f}` in the orthonormal monomial basis.

mod io;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ModelId;
use crate::quantum::{KernelValue, QuadratureRule, QuantumBasis};
use crate::symbols::{Symbol, SymbolExpr, Tape};

pub use io::{read_binary, write_binary, write_csv, MATRIX_MAGIC};

pub type CMatrix = DMatrix<Complex64>;

/// Fraction of trailing Bargmann rows and columns excluded from entrywise
/// comparisons, where truncation error concentrates.
pub const TRUNCATION_CORNER: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct ToeplitzMatrix {
    pub n: usize,
    pub model: ModelId,
    pub entries: CMatrix,
    pub provenance: String,
    pub hermitian: bool,
}

impl ToeplitzMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn identity(basis: &QuantumBasis) -> Self {
        Self {
            n: basis.n,
            model: basis.geometry.model,
            entries: CMatrix::identity(basis.dim, basis.dim),
            provenance: "I".into(),
            hermitian: true,
        }
    }

    pub fn from_entries(
        n: usize,
        model: ModelId,
        entries: CMatrix,
        provenance: impl Into<String>,
    ) -> Self {
        let hermitian = hermitian_deviation(&entries) <= 1e-10 * entries.norm().max(1.0);
        Self {
            n,
            model,
            entries,
            provenance: provenance.into(),
            hermitian,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LevelMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// Number of leading rows that are kept by entrywise comparisons.
    pub fn trusted_rows(&self) -> usize {
        match self.model {
            ModelId::BargmannPlane => {
                self.dim() - (TRUNCATION_CORNER * self.dim() as f64).ceil() as usize
            }
            ModelId::ProjectiveLine => self.dim(),
        }
    }

    /// Leading block outside the truncation corner.
    pub fn trusted_block(&self) -> CMatrix {
        let k = self.trusted_rows();
        self.entries.view((0, 0), (k, k)).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            model: self.model,
            entries: self.entries.adjoint(),
            provenance: format!("({})^*", self.provenance),
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_entries(
            self.n,
            self.model,
            self.entries.map(|v| v * c),
            format!("{c}*({})", self.provenance),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_entries(
            self.n,
            self.model,
            &self.entries - &other.entries,
            format!("({}) - ({})", self.provenance, other.provenance),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_entries(
            self.n,
            self.model,
            &self.entries + &other.entries,
            format!("({}) + ({})", self.provenance, other.provenance),
        ))
    }
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..d {
        for k in j..d {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

/// `T_{N,f}` with `A_jk = ⟨f e_k, e_j⟩`, computed from the quadrature rule.
pub fn assemble(
    symbol: &Symbol,
    basis: &QuantumBasis,
    rule: &QuadratureRule,
) -> Result<ToeplitzMatrix> {
    let f = symbol.at_level(basis.n);
    assemble_expr(&f, basis, rule)
}

/// As [`assemble`] for an expression already instantiated at the basis level.
pub fn assemble_expr(
    f: &SymbolExpr,
    basis: &QuantumBasis,
    rule: &QuadratureRule,
) -> Result<ToeplitzMatrix> {
    if f.contains_level() {
        return Err(Error::Config(format!(
            "symbol `{f}` still contains N; instantiate it first"
        )));
    }
    let angles = rule.angles();
    let units: Vec<Complex64> = angles
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let entries = if let Some(c) = f.as_const() {
        rule.assemble_matrix(basis, None, |_, out| {
            out.fill(c);
            Ok(())
        })?
    } else {
        let tape = Tape::compile(f);
        rule.assemble_matrix(basis, f.support_radius(), |r, out| {
            let mut buf = Vec::with_capacity(tape.len());
            for (slot, u) in out.iter_mut().zip(&units) {
                let z = u * r;
                *slot = tape.eval_with(z, z.conj(), &mut buf);
            }
            Ok(())
        })?
    };
    let mut t = ToeplitzMatrix::from_entries(basis.n, basis.geometry.model, entries, f.to_string());
    t.hermitian = t.hermitian || f.is_conjugation_symmetric();
    Ok(t)
}

pub fn compose(a: &ToeplitzMatrix, b: &ToeplitzMatrix) -> Result<ToeplitzMatrix> {
    a.check_compatible(b)?;
    Ok(ToeplitzMatrix::from_entries(
        a.n,
        a.model,
        &a.entries * &b.entries,
        format!("({}) o ({})", a.provenance, b.provenance),
    ))
}

pub fn commutator(a: &ToeplitzMatrix, b: &ToeplitzMatrix) -> Result<ToeplitzMatrix> {
    a.check_compatible(b)?;
    let ab = &a.entries * &b.entries;
    let ba = &b.entries * &a.entries;
    let mut out = ToeplitzMatrix::from_entries(
        a.n,
        a.model,
        ab - ba,
        format!("[{}, {}]", a.provenance, b.provenance),
    );
    out.hermitian = false;
    Ok(out)
}

pub fn trace(a: &ToeplitzMatrix) -> Complex64 {
    a.entries.trace()
}

/// Largest singular value.
pub fn operator_norm(a: &ToeplitzMatrix) -> f64 {
    matrix_norm(&a.entries)
}

pub fn matrix_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `e^{-(N/2)(φ(x)+φ(y))} Σ_jk e_j(x) A_jk ē_k(y)`.
pub fn weighted_kernel_at(
    a: &ToeplitzMatrix,
    basis: &QuantumBasis,
    x: Complex64,
    y: Complex64,
) -> Result<KernelValue> {
    if a.dim() != basis.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: basis.dim,
        });
    }
    let ex = basis.weighted_values(x)?;
    let ey = basis.weighted_values(y)?;
    let mut value = Complex64::new(0.0, 0.0);
    for k in 0..basis.dim {
        let mut col = Complex64::new(0.0, 0.0);
        for j in 0..basis.dim {
            col += ex[j] * a.entries[(j, k)];
        }
        value += col * ey[k].conj();
    }
    let nf = basis.level();
    let tail = basis.geometry.model == ModelId::BargmannPlane
        && nf * x.norm_sqr().max(y.norm_sqr()) >= (1.0 - TRUNCATION_CORNER) * basis.dim as f64;
    Ok(KernelValue {
        value,
        tail_warning: tail,
    })
}

/// Entry `⟨f e_k, e_j⟩` by direct summation over all quadrature nodes;
/// an independent spot check of [`assemble`].
pub fn entry_by_quadrature(
    f: &SymbolExpr,
    basis: &QuantumBasis,
    rule: &QuadratureRule,
    j: usize,
    k: usize,
) -> Complex64 {
    let tape = Tape::compile(f);
    let (lj, lk) = (basis.log_norms[j], basis.log_norms[k]);
    rule.integrate(|z| {
        if z.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mag = ((j + k) as f64 * z.norm().ln() - 0.5 * (lj + lk)).exp();
        let phase = Complex64::from_polar(1.0, (k as f64 - j as f64) * z.arg());
        tape.eval(z) * phase * mag
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ModelGeometry;
    use crate::quantum::{build_basis, build_quadrature, QuadratureSpec};
    use crate::symbols::parse_symbol;

    fn setup(geom: ModelGeometry, n: usize, r: f64) -> (QuantumBasis, QuadratureRule) {
        let b = build_basis(&geom, n, r).unwrap();
        let rule = build_quadrature(&b, &QuadratureSpec::default()).unwrap();
        (b, rule)
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_and_diagonal_oracles() {
        let (b, rule) = setup(ModelGeometry::bargmann(), 20, 1.0);
        let one = assemble(&Symbol::parse("1").unwrap(), &b, &rule).unwrap();
        assert!(max_abs(&(one.entries.clone() - CMatrix::identity(b.dim, b.dim))) < 1e-10);
        let t = assemble(&Symbol::parse("z*conj(z)").unwrap(), &b, &rule).unwrap();
        for k in 0..b.dim {
            assert!(
                (t.entries[(k, k)] - Complex64::new((k as f64 + 1.0) / 20.0, 0.0)).norm() < 1e-10
            );
        }
        let (p, prule) = setup(ModelGeometry::projective_line(), 24, 1.0);
        let h = assemble(
            &Symbol::parse("(1 - z*conj(z))/(1 + z*conj(z))").unwrap(),
            &p,
            &prule,
        )
        .unwrap();
        for k in 0..p.dim {
            let want = (24.0 - 2.0 * k as f64) / 26.0;
            assert!((h.entries[(k, k)].re - want).abs() < 1e-10);
        }
        assert!(trace(&h).norm() < 1e-10);
        assert!(h.hermitian);
    }

    #[test]
    fn radial_is_diagonal_and_adjoint_rule() {
        let (b, rule) = setup(ModelGeometry::bargmann(), 16, 1.0);
        let t = assemble(&Symbol::parse("bump(0, 1)").unwrap(), &b, &rule).unwrap();
        let mut off = 0.0f64;
        for j in 0..b.dim {
            for k in 0..b.dim {
                if j != k {
                    off = off.max(t.entries[(j, k)].norm());
                }
            }
        }
        assert!(off < 1e-10);
        let f = parse_symbol("(1 + 2*i)*z*bump(0.2, 0.5)").unwrap();
        let a = assemble_expr(&f, &b, &rule).unwrap();
        let c = assemble_expr(&f.conjugate(), &b, &rule).unwrap();
        assert!(max_abs(&(a.entries.adjoint() - c.entries)) < 1e-10);
    }

    #[test]
    fn spot_check_entries() {
        let (b, rule) = setup(ModelGeometry::projective_line(), 12, 1.0);
        let f = parse_symbol("bump(0.3, 0.6)*(z + 2)").unwrap();
        let t = assemble_expr(&f, &b, &rule).unwrap();
        for (j, k) in [(0, 0), (2, 3), (5, 1), (12, 11)] {
            let direct = entry_by_quadrature(&f, &b, &rule, j, k);
            assert!((direct - t.entries[(j, k)]).norm() < 1e-12, "{j},{k}");
        }
    }

    #[test]
    fn linearity() {
        let (b, rule) = setup(ModelGeometry::bargmann(), 16, 1.0);
        let f = parse_symbol("bump(0.3, 0.6)").unwrap();
        let g = parse_symbol("z*bump(0, 1)").unwrap();
        let combo = SymbolExpr::real(2.0) * f.clone() + SymbolExpr::i() * g.clone();
        let lhs = assemble_expr(&combo, &b, &rule).unwrap().entries;
        let rhs = assemble_expr(&f, &b, &rule).unwrap().entries * Complex64::new(2.0, 0.0)
            + assemble_expr(&g, &b, &rule).unwrap().entries * Complex64::i();
        assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn algebra() {
        let (b, rule) = setup(ModelGeometry::bargmann(), 16, 1.0);
        let a = assemble(&Symbol::parse("bump(0.3, 0.6)").unwrap(), &b, &rule).unwrap();
        let bb = assemble(&Symbol::parse("z*bump(0, 1)").unwrap(), &b, &rule).unwrap();
        let i = ToeplitzMatrix::identity(&b);
        assert!(max_abs(&(compose(&i, &a).unwrap().entries - &a.entries)) < 1e-15);
        assert!(max_abs(&commutator(&a, &a).unwrap().entries) < 1e-15);
        let ab = compose(&a, &bb).unwrap();
        assert!(operator_norm(&ab) <= operator_norm(&a) * operator_norm(&bb) + 1e-12);
        let h = assemble(&Symbol::parse("bump(0, 1)").unwrap(), &b, &rule).unwrap();
        let k = commutator(&a, &h).unwrap();
        assert!(max_abs(&(k.entries.adjoint() + &k.entries)) < 1e-10);
        assert!(operator_norm(&h) <= 1.0 + 1e-8);
        assert!((operator_norm(&i) - 1.0).abs() < 1e-12);
        let other = build_basis(&ModelGeometry::bargmann(), 17, 1.0).unwrap();
        assert!(compose(&a, &ToeplitzMatrix::identity(&other)).is_err());
    }

    #[test]
    fn weighted_kernel_identity() {
        let (b, _) = setup(ModelGeometry::bargmann(), 16, 1.0);
        let i = ToeplitzMatrix::identity(&b);
        let v =
            weighted_kernel_at(&i, &b, Complex64::new(0.2, 0.1), Complex64::new(0.2, 0.1)).unwrap();
        assert!((v.value.re - 16.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-10);
    }
}
