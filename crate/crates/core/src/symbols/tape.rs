//! Flattened evaluation of expression DAGs.
//!
//! Each distinct node becomes one slot; evaluating a point is a single pass
//! over the slots in topological order.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::expr::{Node, SymbolExpr};
use super::profile::profile_derivative;

#[derive(Clone, Debug)]
enum Op {
    Const(Complex64),
    Z,
    ConjZ,
    Unset,
    Add(Vec<usize>),
    Mul(Vec<usize>),
    Neg(usize),
    Pow(usize, u32),
    Exp(usize),
    Recip(usize),
    Bump {
        center: Complex64,
        inv_r2: f64,
        order: u32,
    },
    Profile(usize, u32),
}

#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub fn compile(expr: &SymbolExpr) -> Self {
        let mut ops = Vec::new();
        let mut slots = HashMap::new();
        push(expr, &mut ops, &mut slots);
        Self { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluates using caller-provided scratch space.
    pub fn eval_with(&self, z: Complex64, zbar: Complex64, buf: &mut Vec<Complex64>) -> Complex64 {
        buf.clear();
        buf.reserve(self.ops.len());
        let mid = 0.5 * (z + zbar.conj());
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Z => z,
                Op::ConjZ => zbar,
                Op::Unset => Complex64::new(f64::NAN, f64::NAN),
                Op::Add(c) => c.iter().map(|&i| buf[i]).sum(),
                Op::Mul(c) => c
                    .iter()
                    .fold(Complex64::new(1.0, 0.0), |acc, &i| acc * buf[i]),
                Op::Neg(i) => -buf[*i],
                Op::Pow(i, k) => buf[*i].powu(*k),
                Op::Exp(i) => buf[*i].exp(),
                Op::Recip(i) => buf[*i].inv(),
                Op::Bump {
                    center,
                    inv_r2,
                    order,
                } => {
                    let u = (mid - center).norm_sqr() * inv_r2;
                    Complex64::new(profile_derivative(*order, u), 0.0)
                }
                Op::Profile(i, order) => {
                    Complex64::new(profile_derivative(*order, buf[*i].re), 0.0)
                }
            };
            buf.push(v);
        }
        *buf.last().expect("tape is never empty")
    }

    pub fn eval_polarized(&self, z: Complex64, zbar: Complex64) -> Complex64 {
        let mut buf = Vec::new();
        self.eval_with(z, zbar, &mut buf)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_polarized(z, z.conj())
    }
}

fn push(e: &SymbolExpr, ops: &mut Vec<Op>, slots: &mut HashMap<*const Node, usize>) -> usize {
    let key = Arc::as_ptr(&e.0);
    if let Some(&s) = slots.get(&key) {
        return s;
    }
    let op = match e.node() {
        Node::Const(c) => Op::Const(*c),
        Node::Z => Op::Z,
        Node::ConjZ => Op::ConjZ,
        Node::Level(_) => Op::Unset,
        Node::Add(c) => Op::Add(c.iter().map(|x| push(x, ops, slots)).collect()),
        Node::Mul(c) => Op::Mul(c.iter().map(|x| push(x, ops, slots)).collect()),
        Node::Neg(x) => Op::Neg(push(x, ops, slots)),
        Node::Pow(x, k) => Op::Pow(push(x, ops, slots), *k),
        Node::Exp(x) => Op::Exp(push(x, ops, slots)),
        Node::Recip(x) => Op::Recip(push(x, ops, slots)),
        Node::Bump {
            center,
            radius,
            order,
        } => Op::Bump {
            center: *center,
            inv_r2: 1.0 / (radius * radius),
            order: *order,
        },
        Node::Profile { arg, order } => Op::Profile(push(arg, ops, slots), *order),
    };
    ops.push(op);
    let s = ops.len() - 1;
    slots.insert(key, s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol;

    #[test]
    fn shared_subtrees_compile_once() {
        let a = parse_symbol("exp(z*conj(z))").unwrap();
        let e = &a * &a + a.clone();
        let tape = Tape::compile(&e);
        // z, conj z, z*conj z, exp, mul, add
        assert_eq!(tape.len(), 6);
        let z = Complex64::new(0.3, -0.2);
        let v = (z.norm_sqr()).exp();
        assert!((tape.eval(z) - Complex64::new(v * v + v, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn level_without_instantiation_is_nan() {
        let e = parse_symbol("N^0.5*z").unwrap();
        assert!(Tape::compile(&e).eval(Complex64::new(1.0, 0.0)).re.is_nan());
        let inst = e.instantiate(4.0);
        assert!((Tape::compile(&inst).eval(Complex64::new(1.0, 0.0)).re - 2.0).abs() < 1e-15);
    }
}
