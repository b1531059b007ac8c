//! Grid certification of order functions and symbol classes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expr::SymbolExpr;
use super::symbol::{OrderFunction, Symbol};
use super::tape::Tape;
use crate::error::Result;
use crate::geometry::ModelGeometry;

/// Deterministic square sample grid `[-h, h]²` with `n × n` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub half_width: f64,
    pub points: usize,
    pub center: (f64, f64),
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            half_width: 1.5,
            points: 41,
            center: (0.0, 0.0),
        }
    }
}

impl SampleGrid {
    pub fn new(half_width: f64, points: usize) -> Self {
        Self {
            half_width,
            points,
            center: (0.0, 0.0),
        }
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        let n = self.points.max(2);
        let step = 2.0 * self.half_width / (n - 1) as f64;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(Complex64::new(
                    self.center.0 - self.half_width + step * i as f64,
                    self.center.1 - self.half_width + step * j as f64,
                ));
            }
        }
        out
    }
}

/// Stability rule: the constant at the largest level may exceed the
/// previous one by at most this factor.
pub const STABILITY_FACTOR: f64 = 1.1;

pub const DEFAULT_CERT_LEVELS: [usize; 7] = [16, 32, 64, 128, 256, 512, 1024];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: usize,
    pub x: (f64, f64),
    pub y: Option<(f64, f64)>,
    pub value: f64,
}

/// Result of a certification run. `certified == false` is a result, not an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub certified: bool,
    #[serde(rename = "M0")]
    pub m0: Option<u32>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub per_alpha: BTreeMap<String, f64>,
    /// Constant per level for the reported (or last tried) exponent.
    pub per_level: Vec<(usize, f64)>,
    pub witness: Option<Witness>,
    pub note: String,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

fn stable(per_level: &[(usize, f64)]) -> bool {
    if per_level.iter().any(|(_, c)| !c.is_finite()) {
        return false;
    }
    match per_level.len() {
        0 => false,
        1 => true,
        k => per_level[k - 1].1 <= STABILITY_FACTOR * per_level[k - 2].1 + 1e-300,
    }
}

fn eval_real(tape: &Tape, pts: &[Complex64]) -> Vec<f64> {
    pts.par_iter()
        .map_init(Vec::new, |buf, &z| tape.eval_with(z, z.conj(), buf).re)
        .collect()
}

fn eval_abs(tape: &Tape, pts: &[Complex64]) -> Vec<f64> {
    pts.par_iter()
        .map_init(Vec::new, |buf, &z| tape.eval_with(z, z.conj(), buf).norm())
        .collect()
}

/// Searches the smallest `M₀` in `m0_range` for which
/// `m(x)/m(y) ≤ C (1 + N^δ d(x,y))^{M₀}` holds on all grid pairs with a
/// level-stable `C`.
pub fn check_order_function(
    m: &OrderFunction,
    delta: f64,
    levels: &[usize],
    grid: &SampleGrid,
    geometry: &ModelGeometry,
    m0_max: u32,
) -> Certificate {
    let pts = grid.nodes();
    let np = pts.len();
    let mut dist = vec![0.0; np * np];
    for (i, x) in pts.iter().enumerate() {
        for (j, y) in pts.iter().enumerate() {
            dist[i * np + j] = geometry.distance(*x, *y);
        }
    }
    let exps = (m0_max + 1) as usize;
    // per N, per M0: (C, argmax pair)
    let mut table: Vec<Vec<(f64, usize)>> = Vec::with_capacity(levels.len());
    for &n in levels {
        let vals = eval_real(&Tape::compile(&m.at_level(n)), &pts);
        if let Some(k) = vals.iter().position(|v| !v.is_finite() || *v <= 0.0) {
            let p = pts[k];
            return Certificate {
                certified: false,
                m0: None,
                c: None,
                per_alpha: BTreeMap::new(),
                per_level: vec![(n, vals[k])],
                witness: Some(Witness {
                    n,
                    x: (p.re, p.im),
                    y: None,
                    value: vals[k],
                }),
                note: "order function not positive and finite on the grid".into(),
            };
        }
        let scale = (n as f64).powf(delta);
        let best: Vec<(f64, usize)> = (0..np)
            .into_par_iter()
            .map(|i| {
                let mut local = vec![(0.0f64, 0usize); exps];
                for j in 0..np {
                    let ratio = vals[i] / vals[j];
                    let base = 1.0 + scale * dist[i * np + j];
                    let mut denom = 1.0;
                    for slot in local.iter_mut() {
                        let v = ratio / denom;
                        if v > slot.0 {
                            *slot = (v, i * np + j);
                        }
                        denom *= base;
                    }
                }
                local
            })
            .reduce(
                || vec![(0.0f64, 0usize); exps],
                |a, b| {
                    a.iter()
                        .zip(&b)
                        .map(|(x, y)| if y.0 > x.0 { *y } else { *x })
                        .collect()
                },
            );
        table.push(best);
    }
    let mut last = Vec::new();
    for m0 in 0..=m0_max {
        let per_level: Vec<(usize, f64)> = levels
            .iter()
            .zip(&table)
            .map(|(&n, t)| (n, t[m0 as usize].0))
            .collect();
        if stable(&per_level) {
            let c = per_level.iter().map(|p| p.1).fold(0.0, f64::max);
            return Certificate {
                certified: true,
                m0: Some(m0),
                c: Some(c),
                per_alpha: BTreeMap::new(),
                per_level,
                witness: None,
                note: String::new(),
            };
        }
        last = per_level;
    }
    let top = table.len() - 1;
    let (value, pair) = table[top][m0_max as usize];
    let (x, y) = (pts[pair / np], pts[pair % np]);
    Certificate {
        certified: false,
        m0: None,
        c: None,
        per_alpha: BTreeMap::new(),
        per_level: last,
        witness: Some(Witness {
            n: levels[top],
            x: (x.re, x.im),
            y: Some((y.re, y.im)),
            value,
        }),
        note: format!("ratio constant grows with N at every M0 <= {m0_max}"),
    }
}

/// Offending multi-index, its per-level constants and the worst point.
type Failure = (String, Vec<(usize, f64)>, Witness);

pub fn alpha_key(a: u32, b: u32) -> String {
    format!("{a},{b}")
}

/// Constants `C_α` with `|∂^a ∂̄^b f| ≤ C_α N^{δ(a+b)} m` on the grid,
/// for all `a + b ≤ max_alpha`.
pub fn check_symbol_class(
    f: &Symbol,
    m: &OrderFunction,
    levels: &[usize],
    max_alpha: u32,
    grid: &SampleGrid,
) -> Result<Certificate> {
    let pts = grid.nodes();
    let mut per_alpha = BTreeMap::new();
    let mut failure: Option<Failure> = None;
    let cap = max_alpha.max(f.max_derivative_order);
    let m_vals: Vec<Vec<f64>> = levels
        .iter()
        .map(|&n| eval_real(&Tape::compile(&m.at_level(n)), &pts))
        .collect();
    let inst: Vec<SymbolExpr> = levels.iter().map(|&n| f.at_level(n)).collect();
    for order in 0..=max_alpha {
        for a in 0..=order {
            let b = order - a;
            let mut per_level = Vec::with_capacity(levels.len());
            let mut worst = None;
            for (k, &n) in levels.iter().enumerate() {
                let d = inst[k].differentiate_capped(a, b, cap)?;
                let vals = eval_abs(&Tape::compile(&d), &pts);
                let w = (n as f64).powf(f.delta * order as f64);
                let (idx, c) = vals
                    .iter()
                    .zip(&m_vals[k])
                    .map(|(v, mv)| v / (w * mv))
                    .enumerate()
                    .fold((0, 0.0f64), |acc, (i, v)| {
                        if v > acc.1 || v.is_nan() {
                            (i, v)
                        } else {
                            acc
                        }
                    });
                per_level.push((n, c));
                worst = Some((n, idx, c));
            }
            let key = alpha_key(a, b);
            let c = per_level.iter().map(|p| p.1).fold(0.0, f64::max);
            per_alpha.insert(key.clone(), c);
            if !stable(&per_level) && per_level.iter().any(|p| p.1 > 1e-12) && failure.is_none() {
                let (n, idx, value) = worst.expect("nonempty levels");
                let p = pts[idx];
                failure = Some((
                    key,
                    per_level,
                    Witness {
                        n,
                        x: (p.re, p.im),
                        y: None,
                        value,
                    },
                ));
            }
        }
    }
    Ok(match failure {
        None => Certificate {
            certified: true,
            m0: None,
            c: per_alpha.values().copied().reduce(f64::max),
            per_alpha,
            per_level: Vec::new(),
            witness: None,
            note: String::new(),
        },
        Some((key, per_level, witness)) => Certificate {
            certified: false,
            m0: None,
            c: None,
            per_alpha,
            per_level,
            witness: Some(witness),
            note: format!("bound grows with N at alpha = ({key})"),
        },
    })
}
