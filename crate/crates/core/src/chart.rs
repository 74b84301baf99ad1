//! Chart functions: maps from coordinate jets to output jets.
//!
//! Every geometric object (metric components, Lee forms, maps, vector
//! fields, almost complex structures) is exposed through [`ChartFn`]. The
//! input jets may be seeded coordinates or arbitrary jets, so chart
//! functions compose, and evaluating them on order-0 jets gives plain
//! values for the finite-difference oracle.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::Complex;
use crate::autodiff::{lift_point_order, real_values, Jet, Layout};
use crate::error::{Error, Result};
use crate::exprlang::{eval_jet, Expr, JetEnv};

pub trait ChartFn: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>>;

    /// Output jets of the given order at a real point.
    fn series_at(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.eval(&lift_point_order(p, order))
    }

    /// Plain complex values at a point.
    fn values_at(&self, p: &[f64]) -> Result<Vec<Complex>> {
        Ok(self.series_at(p, 0)?.iter().map(Jet::value).collect())
    }
}

pub type SharedFn = Arc<dyn ChartFn>;

/// How a name in an expression is bound to the input coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Binding {
    Real { name: String, index: usize },
    /// `name = x[re] + i x[im]`.
    Complex { name: String, re: usize, im: usize },
}

impl Binding {
    pub fn real(name: &str, index: usize) -> Binding {
        Binding::Real {
            name: name.to_string(),
            index,
        }
    }
}

/// Expressions evaluated with the inputs bound to named coordinates.
#[derive(Clone, Debug)]
pub struct ExprFn {
    input_dim: usize,
    bindings: Vec<Binding>,
    exprs: Vec<Expr>,
}

impl ExprFn {
    pub fn new(input_dim: usize, bindings: Vec<Binding>, exprs: Vec<Expr>) -> Result<Self> {
        let mut bound = std::collections::HashSet::new();
        for b in &bindings {
            let (name, idx) = match b {
                Binding::Real { name, index } => (name, vec![*index]),
                Binding::Complex { name, re, im } => (name, vec![*re, *im]),
            };
            if idx.iter().any(|&i| i >= input_dim) {
                return Err(Error::Dimension {
                    expected: input_dim,
                    found: idx.into_iter().max().unwrap_or(0) + 1,
                });
            }
            bound.insert(name.clone());
        }
        for e in &exprs {
            if let Some(v) = e.variables().into_iter().find(|v| !bound.contains(v)) {
                return Err(Error::UnboundVariable(v));
            }
        }
        Ok(ExprFn {
            input_dim,
            bindings,
            exprs,
        })
    }

    /// Expressions in real coordinates named `coords[i]`.
    pub fn real_coords(coords: &[String], exprs: Vec<Expr>) -> Result<Self> {
        let bindings = coords
            .iter()
            .enumerate()
            .map(|(i, n)| Binding::real(n, i))
            .collect();
        ExprFn::new(coords.len(), bindings, exprs)
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }
}

impl ChartFn for ExprFn {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.exprs.len()
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_input(x, self.input_dim)?;
        let layout = x[0].layout().clone();
        let mut env = JetEnv::new(layout);
        for b in &self.bindings {
            match b {
                Binding::Real { name, index } => {
                    env.bind(name, x[*index].clone());
                }
                Binding::Complex { name, re, im } => {
                    let z = &x[*re] + &x[*im].scale(Complex::i());
                    env.bind(name, z);
                }
            }
        }
        self.exprs.iter().map(|e| eval_jet(e, &env)).collect()
    }
}

pub(crate) fn check_input(x: &[Jet], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: x.len(),
        });
    }
    if let Some(first) = x.first() {
        if let Some(bad) = x.iter().find(|j| j.nvars() != first.nvars()) {
            return Err(Error::Dimension {
                expected: first.nvars(),
                found: bad.nvars(),
            });
        }
    }
    Ok(())
}

type JetClosure = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// A chart function backed by a closure.
#[derive(Clone)]
pub struct FnChart {
    input_dim: usize,
    output_dim: usize,
    f: Arc<JetClosure>,
}

impl FnChart {
    pub fn new<F>(input_dim: usize, output_dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        FnChart {
            input_dim,
            output_dim,
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for FnChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnChart({} -> {})", self.input_dim, self.output_dim)
    }
}

impl ChartFn for FnChart {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_input(x, self.input_dim)?;
        (self.f)(x)
    }
}

/// Runs `f` on freshly seeded coordinates at the value of `x`, with
/// `extra` orders of headroom, then substitutes `x` back in.
///
/// This is how chart functions that differentiate their own inputs stay
/// composable: derivatives are taken with respect to the seeded
/// coordinates, never with respect to whatever `x` happens to be.
pub fn at_point_then_compose<F>(x: &[Jet], extra: usize, f: F) -> Result<Vec<Jet>>
where
    F: FnOnce(&[Jet]) -> Result<Vec<Jet>>,
{
    let order = x.first().map(Jet::order).unwrap_or(0);
    let p = real_values(x);
    let seeded = lift_point_order(&p, order + extra);
    let out = f(&seeded)?;
    if is_seed(x) {
        return Ok(out.into_iter().map(|j| j.truncate(order)).collect());
    }
    let deltas: Vec<Jet> = x.iter().zip(&p).map(|(j, &v)| j.add_scalar(-v)).collect();
    out.iter().map(|j| j.compose(&deltas)).collect()
}

/// True when `x` are exactly the seeded coordinate jets of their layout.
fn is_seed(x: &[Jet]) -> bool {
    let Some(first) = x.first() else {
        return true;
    };
    let layout: &Arc<Layout> = first.layout();
    if layout.nvars() != x.len() {
        return false;
    }
    x.iter().enumerate().all(|(i, j)| {
        if j.layout().order() != layout.order() || j.max_imag() != 0.0 {
            return false;
        }
        let seed = Jet::variable(layout, i, j.value().re);
        seed == *j
    })
}

/// Evaluates `f` at `p` and returns real values, failing if any output has
/// an imaginary part larger than `tol`.
pub fn real_values_at(f: &dyn ChartFn, p: &[f64], tol: f64) -> Result<Vec<f64>> {
    f.values_at(p)?
        .into_iter()
        .map(|z| {
            if z.im.abs() > tol * z.re.abs().max(1.0) {
                Err(Error::Domain(format!("expected a real value, got {z}")))
            } else {
                Ok(z.re)
            }
        })
        .collect()
}

/// Named real coordinates mapped to their values.
pub fn coordinate_map(names: &[String], p: &[f64]) -> HashMap<String, Complex> {
    names
        .iter()
        .zip(p)
        .map(|(n, &v)| (n.clone(), Complex::new(v, 0.0)))
        .collect()
}
