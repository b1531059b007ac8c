//! Expression trees in `z` and `z̄` with exact Wirtinger derivatives.
//!
//! Trees are immutable and reference counted; subtrees produced by
//! differentiation are shared, so a tree is really a DAG. All constructors
//! fold constants and flatten sums and products, which keeps printed forms
//! canonical enough that `parse(print(t)) == t`.

use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_complex::Complex64;

use super::profile::{profile_derivative, DEFAULT_PROFILE_CAP, MAX_TABULATED_ORDER};
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct SymbolExpr(pub(crate) Arc<Node>);

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(Complex64),
    Z,
    ConjZ,
    /// `N^exponent`, substituted by [`SymbolExpr::instantiate`].
    Level(f64),
    Add(Vec<SymbolExpr>),
    Mul(Vec<SymbolExpr>),
    Neg(SymbolExpr),
    Pow(SymbolExpr, u32),
    Exp(SymbolExpr),
    Recip(SymbolExpr),
    /// `p⁽ᵒʳᵈᵉʳ⁾(|z - center|² / radius²)`.
    Bump {
        center: Complex64,
        radius: f64,
        order: u32,
    },
    /// `p⁽ᵒʳᵈᵉʳ⁾(Re arg)`.
    Profile {
        arg: SymbolExpr,
        order: u32,
    },
}

/// Wirtinger variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Z,
    ConjZ,
}

impl PartialEq for SymbolExpr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl fmt::Debug for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolExpr({self})")
    }
}

fn is_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

fn is_one(c: Complex64) -> bool {
    c.re == 1.0 && c.im == 0.0
}

impl SymbolExpr {
    fn new(node: Node) -> Self {
        Self(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(Node::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    pub fn i() -> Self {
        Self::constant(Complex64::i())
    }

    pub fn z() -> Self {
        Self::new(Node::Z)
    }

    pub fn conj_z() -> Self {
        Self::new(Node::ConjZ)
    }

    /// `|z|²`
    pub fn abs2() -> Self {
        Self::z() * Self::conj_z()
    }

    pub fn level(exponent: f64) -> Self {
        if exponent == 0.0 {
            return Self::one();
        }
        Self::new(Node::Level(exponent))
    }

    pub fn bump(center: Complex64, radius: f64) -> Self {
        Self::bump_derivative(center, radius, 0)
    }

    pub fn bump_derivative(center: Complex64, radius: f64, order: u32) -> Self {
        assert!(radius > 0.0, "bump radius must be positive");
        Self::new(Node::Bump {
            center,
            radius,
            order,
        })
    }

    pub fn profile(arg: SymbolExpr, order: u32) -> Self {
        if let Node::Const(c) = arg.node() {
            return Self::real(profile_derivative(order, c.re));
        }
        Self::new(Node::Profile { arg, order })
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Const(c) if is_zero(*c))
    }

    pub fn sum(terms: impl IntoIterator<Item = SymbolExpr>) -> Self {
        let mut flat = Vec::new();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut saw_const = false;
        for t in terms {
            match t.node() {
                Node::Add(children) => {
                    for c in children {
                        if let Node::Const(v) = c.node() {
                            acc += v;
                            saw_const = true;
                        } else {
                            flat.push(c.clone());
                        }
                    }
                }
                Node::Const(v) => {
                    acc += v;
                    saw_const = true;
                }
                _ => flat.push(t),
            }
        }
        if saw_const && !is_zero(acc) {
            flat.push(Self::constant(acc));
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => Self::new(Node::Add(flat)),
        }
    }

    pub fn product(factors: impl IntoIterator<Item = SymbolExpr>) -> Self {
        let mut flat = Vec::new();
        let mut acc = Complex64::new(1.0, 0.0);
        for f in factors {
            match f.node() {
                Node::Mul(children) => {
                    for c in children {
                        if let Node::Const(v) = c.node() {
                            acc *= v;
                        } else {
                            flat.push(c.clone());
                        }
                    }
                }
                Node::Const(v) => acc *= v,
                _ => flat.push(f),
            }
        }
        if is_zero(acc) {
            return Self::zero();
        }
        if flat.is_empty() {
            return Self::constant(acc);
        }
        if !is_one(acc) {
            flat.insert(0, Self::constant(acc));
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        Self::new(Node::Mul(flat))
    }

    pub fn neg(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(-c),
            Node::Neg(inner) => inner.clone(),
            Node::Mul(_) => Self::product([Self::real(-1.0), self.clone()]),
            _ => Self::new(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, k: u32) -> Self {
        match (k, self.node()) {
            (0, _) => Self::one(),
            (1, _) => self.clone(),
            (_, Node::Const(c)) => Self::constant(c.powu(k)),
            (_, Node::Pow(base, m)) => Self::new(Node::Pow(base.clone(), m * k)),
            (_, Node::Level(e)) => Self::level(e * k as f64),
            _ => Self::new(Node::Pow(self.clone(), k)),
        }
    }

    pub fn exp(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(c.exp()),
            _ => Self::new(Node::Exp(self.clone())),
        }
    }

    pub fn recip(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(c.inv()),
            Node::Recip(inner) => inner.clone(),
            _ => Self::new(Node::Recip(self.clone())),
        }
    }

    /// Replaces every `N^ρ` node by its value at level `n`.
    pub fn instantiate(&self, n: f64) -> Self {
        self.map_leaves(&mut |node| match node {
            Node::Level(e) => Some(SymbolExpr::real(n.powf(*e))),
            _ => None,
        })
    }

    /// Dilates every bump about the origin: center and radius are both
    /// multiplied by `factor`.
    /// The dilated function `z ↦ e(z / factor)`.
    pub fn dilate(&self, factor: f64) -> Self {
        let inv = SymbolExpr::real(1.0 / factor);
        self.map_leaves(&mut |node| match node {
            Node::Z => Some(inv.clone() * SymbolExpr::z()),
            Node::ConjZ => Some(inv.clone() * SymbolExpr::conj_z()),
            Node::Bump {
                center,
                radius,
                order,
            } => Some(SymbolExpr::bump_derivative(
                center * factor,
                radius * factor,
                *order,
            )),
            _ => None,
        })
    }

    pub fn contains_level(&self) -> bool {
        self.any(&|n| matches!(n, Node::Level(_)))
    }

    fn any(&self, pred: &dyn Fn(&Node) -> bool) -> bool {
        if pred(self.node()) {
            return true;
        }
        match self.node() {
            Node::Add(c) | Node::Mul(c) => c.iter().any(|e| e.any(pred)),
            Node::Neg(e) | Node::Pow(e, _) | Node::Exp(e) | Node::Recip(e) => e.any(pred),
            Node::Profile { arg, .. } => arg.any(pred),
            _ => false,
        }
    }

    /// Rebuilds the tree, replacing leaves for which `f` returns a value.
    fn map_leaves(&self, f: &mut dyn FnMut(&Node) -> Option<SymbolExpr>) -> Self {
        let mut memo: HashMap<*const Node, SymbolExpr> = HashMap::new();
        self.map_leaves_memo(f, &mut memo)
    }

    fn map_leaves_memo(
        &self,
        f: &mut dyn FnMut(&Node) -> Option<SymbolExpr>,
        memo: &mut HashMap<*const Node, SymbolExpr>,
    ) -> Self {
        let key = Arc::as_ptr(&self.0);
        if let Some(done) = memo.get(&key) {
            return done.clone();
        }
        if let Some(rep) = f(self.node()) {
            memo.insert(key, rep.clone());
            return rep;
        }
        let out = match self.node() {
            Node::Add(c) => Self::sum(
                c.iter()
                    .map(|e| e.map_leaves_memo(f, memo))
                    .collect::<Vec<_>>(),
            ),
            Node::Mul(c) => Self::product(
                c.iter()
                    .map(|e| e.map_leaves_memo(f, memo))
                    .collect::<Vec<_>>(),
            ),
            Node::Neg(e) => e.map_leaves_memo(f, memo).neg(),
            Node::Pow(e, k) => e.map_leaves_memo(f, memo).powi(*k),
            Node::Exp(e) => e.map_leaves_memo(f, memo).exp(),
            Node::Recip(e) => e.map_leaves_memo(f, memo).recip(),
            Node::Profile { arg, order } => Self::profile(arg.map_leaves_memo(f, memo), *order),
            _ => self.clone(),
        };
        memo.insert(key, out.clone());
        out
    }

    /// Structural complex conjugate: swaps `z` and `z̄` and conjugates constants.
    pub fn conjugate(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(c.conj()),
            Node::Z => Self::conj_z(),
            Node::ConjZ => Self::z(),
            Node::Level(_) => self.clone(),
            Node::Add(c) => Self::sum(c.iter().map(|e| e.conjugate()).collect::<Vec<_>>()),
            Node::Mul(c) => Self::product(c.iter().map(|e| e.conjugate()).collect::<Vec<_>>()),
            Node::Neg(e) => e.conjugate().neg(),
            Node::Pow(e, k) => e.conjugate().powi(*k),
            Node::Exp(e) => e.conjugate().exp(),
            Node::Recip(e) => e.conjugate().recip(),
            // Derivative bumps carry their polynomial cofactors outside the
            // node, so the node itself is real.
            Node::Bump { .. } => self.clone(),
            Node::Profile { arg, order } => Self::profile(arg.conjugate(), *order),
        }
    }

    /// Order-independent key: children of sums and products are sorted.
    pub fn canonical_key(&self) -> String {
        match self.node() {
            Node::Add(c) => {
                let mut keys: Vec<_> = c.iter().map(|e| e.canonical_key()).collect();
                keys.sort();
                format!("add[{}]", keys.join(","))
            }
            Node::Mul(c) => {
                let mut keys: Vec<_> = c.iter().map(|e| e.canonical_key()).collect();
                keys.sort();
                format!("mul[{}]", keys.join(","))
            }
            Node::Neg(e) => format!("neg[{}]", e.canonical_key()),
            Node::Pow(e, k) => format!("pow[{},{k}]", e.canonical_key()),
            Node::Exp(e) => format!("exp[{}]", e.canonical_key()),
            Node::Recip(e) => format!("recip[{}]", e.canonical_key()),
            Node::Profile { arg, order } => format!("profile[{order},{}]", arg.canonical_key()),
            _ => self.to_string(),
        }
    }

    /// Structural test for real-valuedness on the diagonal `z̄ = conj(z)`:
    /// the expanded forms of the tree and its conjugate coincide.
    pub fn is_conjugation_symmetric(&self) -> bool {
        let a = self.expanded_form();
        let b = self.conjugate().expanded_form();
        if a.len() != b.len() {
            return false;
        }
        a.iter().all(|(k, ca)| match b.get(k) {
            Some(cb) => (ca - cb).norm() <= 1e-13 * ca.norm().max(cb.norm()).max(1.0),
            None => false,
        })
    }

    /// Sum of monomials in opaque factors with complex coefficients.
    /// Products of sums are distributed while the term count stays small.
    fn expanded_form(&self) -> std::collections::BTreeMap<String, Complex64> {
        use std::collections::BTreeMap;
        const MAX_TERMS: usize = 4096;
        type Form = BTreeMap<String, Complex64>;
        fn atom(key: String) -> Form {
            let mut m = BTreeMap::new();
            m.insert(key, Complex64::new(1.0, 0.0));
            m
        }
        fn join(a: &str, b: &str) -> String {
            let mut parts: Vec<&str> = a
                .split('·')
                .chain(b.split('·'))
                .filter(|s| !s.is_empty())
                .collect();
            parts.sort_unstable();
            parts.join("·")
        }
        fn mul(a: &Form, b: &Form) -> Option<Form> {
            if a.len() * b.len() > MAX_TERMS {
                return None;
            }
            let mut out = BTreeMap::new();
            for (ka, ca) in a {
                for (kb, cb) in b {
                    *out.entry(join(ka, kb)).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
                }
            }
            Some(out)
        }
        fn render(f: &Form) -> String {
            f.iter()
                .map(|(k, c)| format!("{:e},{:e}:{k}", c.re, c.im))
                .collect::<Vec<_>>()
                .join(";")
        }
        fn go(e: &SymbolExpr) -> Form {
            match e.node() {
                Node::Const(c) => {
                    let mut m = BTreeMap::new();
                    if !is_zero(*c) {
                        m.insert(String::new(), *c);
                    }
                    m
                }
                Node::Add(children) => {
                    let mut out: Form = BTreeMap::new();
                    for c in children {
                        for (k, v) in go(c) {
                            *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
                        }
                    }
                    out.retain(|_, v| !is_zero(*v));
                    out
                }
                Node::Neg(x) => go(x).into_iter().map(|(k, v)| (k, -v)).collect(),
                Node::Mul(children) => {
                    let mut acc = go(&SymbolExpr::one());
                    for c in children {
                        match mul(&acc, &go(c)) {
                            Some(next) => acc = next,
                            None => return atom(e.canonical_key()),
                        }
                    }
                    acc
                }
                Node::Pow(x, k) => {
                    let base = go(x);
                    let mut acc = go(&SymbolExpr::one());
                    for _ in 0..*k {
                        match mul(&acc, &base) {
                            Some(next) => acc = next,
                            None => return atom(e.canonical_key()),
                        }
                    }
                    acc
                }
                Node::Exp(x) => atom(format!("exp[{}]", render(&go(x)))),
                Node::Recip(x) => atom(format!("recip[{}]", render(&go(x)))),
                // Profiles read only the real part of their argument.
                Node::Profile { arg, order } => {
                    let a = render(&go(arg));
                    let b = render(&go(&arg.conjugate()));
                    atom(format!("profile{order}[{}]", a.min(b)))
                }
                _ => atom(e.to_string()),
            }
        }
        go(self)
    }

    /// Radius of a disk centered at the origin containing the support, or
    /// `None` when the support is unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) if is_zero(*c) => Some(0.0),
            Node::Const(_) | Node::Z | Node::ConjZ | Node::Level(_) => None,
            Node::Add(c) => c
                .iter()
                .map(|e| e.support_radius())
                .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r))),
            Node::Mul(c) => c.iter().filter_map(|e| e.support_radius()).reduce(f64::min),
            Node::Neg(e) | Node::Pow(e, _) => e.support_radius(),
            Node::Exp(_) | Node::Recip(_) | Node::Profile { .. } => None,
            Node::Bump { center, radius, .. } => Some(center.norm() + radius),
        }
    }

    /// Largest bump/profile derivative order in the tree.
    pub fn max_profile_order(&self) -> u32 {
        match self.node() {
            Node::Bump { order, .. } => *order,
            Node::Profile { arg, order } => (*order).max(arg.max_profile_order()),
            Node::Add(c) | Node::Mul(c) => {
                c.iter().map(|e| e.max_profile_order()).max().unwrap_or(0)
            }
            Node::Neg(e) | Node::Pow(e, _) | Node::Exp(e) | Node::Recip(e) => e.max_profile_order(),
            _ => 0,
        }
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn node_count(&self) -> usize {
        fn walk(e: &SymbolExpr, seen: &mut std::collections::HashSet<*const Node>) {
            if !seen.insert(Arc::as_ptr(&e.0)) {
                return;
            }
            match e.node() {
                Node::Add(c) | Node::Mul(c) => c.iter().for_each(|x| walk(x, seen)),
                Node::Neg(x) | Node::Pow(x, _) | Node::Exp(x) | Node::Recip(x) => walk(x, seen),
                Node::Profile { arg, .. } => walk(arg, seen),
                _ => {}
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    /// Evaluates at independent values of `z` and `z̄`. Bump factors are
    /// evaluated at the real midpoint `(z + conj(z̄))/2`.
    pub fn eval_polarized(&self, z: Complex64, zbar: Complex64) -> Complex64 {
        super::tape::Tape::compile(self).eval_polarized(z, zbar)
    }

    /// Evaluates on the diagonal `z̄ = conj(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_polarized(z, z.conj())
    }

    /// Single Wirtinger derivative with the default profile cap.
    pub fn derivative(&self, var: Var) -> Result<Self> {
        self.derivative_capped(var, DEFAULT_PROFILE_CAP)
    }

    pub fn derivative_capped(&self, var: Var, cap: u32) -> Result<Self> {
        let cap = cap.min(MAX_TABULATED_ORDER);
        let mut memo = HashMap::new();
        self.d(var, cap, &mut memo)
    }

    /// `∂ᵃ ∂̄ᵇ` of the tree.
    pub fn differentiate(&self, a: u32, b: u32) -> Result<Self> {
        self.differentiate_capped(a, b, DEFAULT_PROFILE_CAP)
    }

    pub fn differentiate_capped(&self, a: u32, b: u32, cap: u32) -> Result<Self> {
        let mut out = self.clone();
        for _ in 0..a {
            out = out.derivative_capped(Var::Z, cap)?;
        }
        for _ in 0..b {
            out = out.derivative_capped(Var::ConjZ, cap)?;
        }
        Ok(out)
    }

    fn d(&self, var: Var, cap: u32, memo: &mut HashMap<*const Node, SymbolExpr>) -> Result<Self> {
        let key = Arc::as_ptr(&self.0);
        if let Some(done) = memo.get(&key) {
            return Ok(done.clone());
        }
        let out = match self.node() {
            Node::Const(_) | Node::Level(_) => Self::zero(),
            Node::Z => Self::real(if var == Var::Z { 1.0 } else { 0.0 }),
            Node::ConjZ => Self::real(if var == Var::ConjZ { 1.0 } else { 0.0 }),
            Node::Add(c) => {
                let mut terms = Vec::with_capacity(c.len());
                for e in c {
                    terms.push(e.d(var, cap, memo)?);
                }
                Self::sum(terms)
            }
            Node::Mul(c) => {
                let mut terms = Vec::with_capacity(c.len());
                for i in 0..c.len() {
                    let di = c[i].d(var, cap, memo)?;
                    if di.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<SymbolExpr> = c.to_vec();
                    factors[i] = di;
                    terms.push(Self::product(factors));
                }
                Self::sum(terms)
            }
            Node::Neg(e) => e.d(var, cap, memo)?.neg(),
            Node::Pow(e, k) => {
                let de = e.d(var, cap, memo)?;
                Self::product([Self::real(*k as f64), e.powi(k - 1), de])
            }
            Node::Exp(e) => {
                let de = e.d(var, cap, memo)?;
                Self::product([self.clone(), de])
            }
            Node::Recip(e) => {
                let de = e.d(var, cap, memo)?;
                Self::product([Self::real(-1.0), self.powi(2), de])
            }
            Node::Bump {
                center,
                radius,
                order,
            } => {
                if order + 1 > cap {
                    return Err(Error::DerivativeCap {
                        requested: order + 1,
                        cap,
                    });
                }
                let lin = match var {
                    Var::Z => Self::conj_z() - Self::constant(center.conj()),
                    Var::ConjZ => Self::z() - Self::constant(*center),
                };
                Self::product([
                    Self::real(1.0 / (radius * radius)),
                    Self::bump_derivative(*center, *radius, order + 1),
                    lin,
                ])
            }
            Node::Profile { arg, order } => {
                if order + 1 > cap {
                    return Err(Error::DerivativeCap {
                        requested: order + 1,
                        cap,
                    });
                }
                let da = arg.d(var, cap, memo)?;
                Self::product([Self::profile(arg.clone(), order + 1), da])
            }
        };
        memo.insert(key, out.clone());
        Ok(out)
    }
}

impl ops::Add for SymbolExpr {
    type Output = SymbolExpr;
    fn add(self, rhs: SymbolExpr) -> SymbolExpr {
        SymbolExpr::sum([self, rhs])
    }
}

impl ops::Sub for SymbolExpr {
    type Output = SymbolExpr;
    fn sub(self, rhs: SymbolExpr) -> SymbolExpr {
        SymbolExpr::sum([self, rhs.neg()])
    }
}

impl ops::Mul for SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, rhs: SymbolExpr) -> SymbolExpr {
        SymbolExpr::product([self, rhs])
    }
}

impl ops::Div for SymbolExpr {
    type Output = SymbolExpr;
    fn div(self, rhs: SymbolExpr) -> SymbolExpr {
        SymbolExpr::product([self, rhs.recip()])
    }
}

impl ops::Neg for SymbolExpr {
    type Output = SymbolExpr;
    fn neg(self) -> SymbolExpr {
        SymbolExpr::neg(&self)
    }
}

impl<'a> ops::Add for &'a SymbolExpr {
    type Output = SymbolExpr;
    fn add(self, rhs: &'a SymbolExpr) -> SymbolExpr {
        SymbolExpr::sum([self.clone(), rhs.clone()])
    }
}

impl<'a> ops::Sub for &'a SymbolExpr {
    type Output = SymbolExpr;
    fn sub(self, rhs: &'a SymbolExpr) -> SymbolExpr {
        SymbolExpr::sum([self.clone(), rhs.neg()])
    }
}

impl<'a> ops::Mul for &'a SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, rhs: &'a SymbolExpr) -> SymbolExpr {
        SymbolExpr::product([self.clone(), rhs.clone()])
    }
}

// ---- printing -------------------------------------------------------------

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_const(c: Complex64) -> (String, u8) {
    if c.im == 0.0 {
        let s = fmt_real(c.re);
        let prec = if c.re.is_sign_negative() {
            PREC_MUL
        } else {
            PREC_ATOM
        };
        (s, prec)
    } else if c.re == 0.0 {
        (format!("({}*i)", fmt_real(c.im)), PREC_ATOM)
    } else {
        (
            format!("({} + {}*i)", fmt_real(c.re), fmt_real(c.im)),
            PREC_ATOM,
        )
    }
}

impl SymbolExpr {
    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Add(_) => PREC_ADD,
            Node::Mul(_) => PREC_MUL,
            Node::Recip(_) => PREC_MUL,
            Node::Neg(_) => PREC_UNARY,
            Node::Const(c) => fmt_const(*c).1,
            _ => PREC_ATOM,
        }
    }

    fn write_at(&self, out: &mut String, min_prec: u8) {
        let needs = self.precedence() < min_prec;
        if needs {
            out.push('(');
        }
        self.write_bare(out);
        if needs {
            out.push(')');
        }
    }

    fn write_bare(&self, out: &mut String) {
        match self.node() {
            Node::Const(c) => out.push_str(&fmt_const(*c).0),
            Node::Z => out.push('z'),
            Node::ConjZ => out.push_str("conj(z)"),
            Node::Level(e) => {
                if *e == 1.0 {
                    out.push('N');
                } else {
                    out.push_str(&format!("N^({})", fmt_real(*e)));
                }
            }
            Node::Add(children) => {
                for (k, c) in children.iter().enumerate() {
                    if k == 0 {
                        c.write_at(out, PREC_ADD);
                        continue;
                    }
                    match c.node() {
                        Node::Neg(inner) => {
                            out.push_str(" - ");
                            inner.write_at(out, PREC_MUL);
                        }
                        _ => {
                            out.push_str(" + ");
                            c.write_at(out, PREC_MUL);
                        }
                    }
                }
            }
            Node::Mul(children) => {
                for (k, c) in children.iter().enumerate() {
                    if k > 0 {
                        out.push('*');
                    }
                    match c.node() {
                        Node::Recip(_) if k > 0 => {
                            out.push('(');
                            c.write_bare(out);
                            out.push(')');
                        }
                        _ => c.write_at(out, if k == 0 { PREC_MUL } else { PREC_UNARY }),
                    }
                }
            }
            Node::Neg(inner) => {
                out.push('-');
                inner.write_at(out, PREC_ATOM);
            }
            Node::Pow(base, k) => {
                base.write_at(out, PREC_ATOM);
                out.push_str(&format!("^{k}"));
            }
            Node::Exp(e) => {
                out.push_str("exp(");
                e.write_bare(out);
                out.push(')');
            }
            Node::Recip(e) => {
                out.push_str("1/");
                out.push('(');
                e.write_bare(out);
                out.push(')');
            }
            Node::Bump {
                center,
                radius,
                order,
            } => {
                if *order == 0 && center.im == 0.0 {
                    out.push_str(&format!(
                        "bump({}, {})",
                        fmt_real(center.re),
                        fmt_real(*radius)
                    ));
                } else if *order == 0 {
                    out.push_str(&format!(
                        "bump({}, {}, {})",
                        fmt_real(center.re),
                        fmt_real(center.im),
                        fmt_real(*radius)
                    ));
                } else {
                    out.push_str(&format!(
                        "bumpd({order}, {}, {}, {})",
                        fmt_real(center.re),
                        fmt_real(center.im),
                        fmt_real(*radius)
                    ));
                }
            }
            Node::Profile { arg, order } => {
                out.push_str(&format!("profile({order}, "));
                arg.write_bare(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_bare(&mut s);
        f.write_str(&s)
    }
}
