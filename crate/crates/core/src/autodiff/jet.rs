//! Truncated multivariate Taylor series ("jets") with complex coefficients
//! over real base directions.
//!
//! A jet of order `K` in `n` variables stores the Taylor coefficients
//! `c_m` of every monomial `δ^m` with `|m| ≤ K`, so that
//! `f(p + δ) = Σ c_m δ^m + O(|δ|^{K+1})`. Monomials are stored graded by
//! total degree, which makes truncation to a lower order a prefix slice.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::Complex;
use crate::error::{Error, Result};

/// Values with modulus at or below this are treated as singular by
/// division, `log` and `sqrt`.
pub const EPS_DOMAIN: f64 = 1e-14;

/// Monomial bookkeeping shared by every jet with the same `(nvars, order)`.
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(a, b, out)`: coefficient `a` times coefficient `b` lands in `out`.
    mul: Vec<(u32, u32, u32)>,
    /// Per variable: `(src, dst, factor)` for `∂/∂x_i`.
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

type LayoutCache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;

impl Layout {
    pub fn get(nvars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<LayoutCache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(Layout::build(nvars, order)))
            .clone()
    }

    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps = Vec::new();
        for deg in 0..=order {
            let mut cur = vec![0u8; nvars];
            push_degree(&mut exps, &mut cur, 0, deg);
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let mut mul = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            let da: usize = ea.iter().map(|&x| x as usize).sum();
            for (b, eb) in exps.iter().enumerate() {
                let db: usize = eb.iter().map(|&x| x as usize).sum();
                if da + db > order {
                    continue;
                }
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                mul.push((a as u32, b as u32, index[&sum] as u32));
            }
        }

        let mut deriv = vec![Vec::new(); nvars];
        for (src, e) in exps.iter().enumerate() {
            for (i, table) in deriv.iter_mut().enumerate() {
                if e[i] == 0 {
                    continue;
                }
                let mut lower = e.clone();
                lower[i] -= 1;
                table.push((src as u32, index[&lower] as u32, e[i] as f64));
            }
        }

        Layout {
            nvars,
            order,
            exps,
            index,
            mul,
            deriv,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exps
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, var: usize, remaining: usize) {
    if var + 1 == cur.len() {
        cur[var] = remaining as u8;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_degree(out, cur, var + 1, remaining - k);
    }
    cur[var] = 0;
}

#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    c: Vec<Complex>,
}

impl Jet {
    pub fn constant(layout: &Arc<Layout>, value: impl Into<Complex>) -> Jet {
        let mut c = vec![Complex::new(0.0, 0.0); layout.len()];
        c[0] = value.into();
        Jet {
            layout: layout.clone(),
            c,
        }
    }

    pub fn zero(layout: &Arc<Layout>) -> Jet {
        Jet::constant(layout, 0.0)
    }

    /// The coordinate function `x_i`, valued `value` at the base point.
    pub fn variable(layout: &Arc<Layout>, i: usize, value: f64) -> Jet {
        assert!(i < layout.nvars, "variable index {i} out of range");
        let mut j = Jet::constant(layout, value);
        if layout.order >= 1 {
            let mut e = vec![0u8; layout.nvars];
            e[i] = 1;
            j.c[layout.index[&e]] = Complex::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coeffs(layout: &Arc<Layout>, c: Vec<Complex>) -> Jet {
        assert_eq!(c.len(), layout.len());
        Jet {
            layout: layout.clone(),
            c,
        }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.c
    }

    pub fn value(&self) -> Complex {
        self.c[0]
    }

    /// `∂f/∂x_i` at the base point.
    pub fn grad(&self, i: usize) -> Complex {
        self.partial(&unit(self.nvars(), &[i]))
    }

    /// `∂²f/∂x_i∂x_j` at the base point.
    pub fn hess(&self, i: usize, j: usize) -> Complex {
        self.partial(&unit(self.nvars(), &[i, j]))
    }

    pub fn gradient(&self) -> Vec<Complex> {
        (0..self.nvars()).map(|i| self.grad(i)).collect()
    }

    pub fn hessian(&self) -> Vec<Vec<Complex>> {
        let n = self.nvars();
        (0..n)
            .map(|i| (0..n).map(|j| self.hess(i, j)).collect())
            .collect()
    }

    /// Partial derivative `∂^m f` at the base point; zero beyond the order.
    pub fn partial(&self, m: &[u8]) -> Complex {
        match self.layout.index.get(m) {
            Some(&k) => {
                let fact: f64 = m.iter().map(|&e| factorial(e as usize)).product();
                self.c[k] * fact
            }
            None => Complex::new(0.0, 0.0),
        }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.nvars(), order);
        let c = self.c[..layout.len()].to_vec();
        Jet { layout, c }
    }

    /// `∂/∂x_i` as a jet of one order less.
    ///
    /// # Panics
    /// If the jet has order zero.
    pub fn derivative(&self, i: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let layout = Layout::get(self.nvars(), self.order() - 1);
        let mut c = vec![Complex::new(0.0, 0.0); layout.len()];
        for &(src, dst, f) in &self.layout.deriv[i] {
            if (dst as usize) < c.len() {
                c[dst as usize] += self.c[src as usize] * f;
            }
        }
        Jet { layout, c }
    }

    fn map_coeffs(&self, f: impl Fn(Complex) -> Complex) -> Jet {
        Jet {
            layout: self.layout.clone(),
            c: self.c.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Complex conjugate. Base directions are real, so this acts
    /// coefficient-wise.
    pub fn conj(&self) -> Jet {
        self.map_coeffs(|z| z.conj())
    }

    pub fn re(&self) -> Jet {
        self.map_coeffs(|z| Complex::new(z.re, 0.0))
    }

    pub fn im(&self) -> Jet {
        self.map_coeffs(|z| Complex::new(z.im, 0.0))
    }

    pub fn scale(&self, s: impl Into<Complex>) -> Jet {
        let s = s.into();
        self.map_coeffs(|z| z * s)
    }

    pub fn add_scalar(&self, s: impl Into<Complex>) -> Jet {
        let mut out = self.clone();
        out.c[0] += s.into();
        out
    }

    /// Largest modulus of any imaginary coefficient.
    pub fn max_imag(&self) -> f64 {
        self.c.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    fn check_dims(&self, other: &Jet) -> Result<()> {
        if self.nvars() != other.nvars() {
            return Err(Error::Dimension {
                expected: self.nvars(),
                found: other.nvars(),
            });
        }
        Ok(())
    }

    fn common_layout(&self, other: &Jet) -> Arc<Layout> {
        if self.order() <= other.order() {
            self.layout.clone()
        } else {
            other.layout.clone()
        }
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.check_dims(other)?;
        let layout = self.common_layout(other);
        let c = (0..layout.len()).map(|k| self.c[k] + other.c[k]).collect();
        Ok(Jet { layout, c })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_dims(other)?;
        let layout = self.common_layout(other);
        let c = (0..layout.len()).map(|k| self.c[k] - other.c[k]).collect();
        Ok(Jet { layout, c })
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_dims(other)?;
        let layout = self.common_layout(other);
        let mut c = vec![Complex::new(0.0, 0.0); layout.len()];
        for &(a, b, o) in &layout.mul {
            c[o as usize] += self.c[a as usize] * other.c[b as usize];
        }
        Ok(Jet { layout, c })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        self.check_dims(other)?;
        self.try_mul(&other.recip()?)
    }

    /// `Σ_k coeffs[k] (self - value)^k`, the composition of a univariate
    /// Taylor expansion about `value` with this jet.
    fn apply_series(&self, coeffs: &[Complex]) -> Jet {
        let k = self.order();
        debug_assert!(coeffs.len() > k);
        let mut delta = self.clone();
        delta.c[0] = Complex::new(0.0, 0.0);
        let mut r = Jet::constant(&self.layout, coeffs[k]);
        for j in (0..k).rev() {
            r = (&r * &delta).add_scalar(coeffs[j]);
        }
        r
    }

    fn guard(&self, what: &str) -> Result<Complex> {
        let a = self.value();
        if a.norm() <= EPS_DOMAIN {
            return Err(Error::Domain(format!("{what} at {a}")));
        }
        Ok(a)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.guard("division by zero")?;
        let inv = 1.0 / a;
        let mut coeffs = Vec::with_capacity(self.order() + 1);
        let mut t = inv;
        for _ in 0..=self.order() {
            coeffs.push(t);
            t = -t * inv;
        }
        Ok(self.apply_series(&coeffs))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let coeffs: Vec<Complex> = (0..=self.order())
            .map(|k| e / factorial(k))
            .collect();
        self.apply_series(&coeffs)
    }

    /// Principal branch.
    pub fn log(&self) -> Result<Jet> {
        let a = self.guard("log at branch point")?;
        let mut coeffs = vec![a.ln()];
        let inv = 1.0 / a;
        let mut p = inv;
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            coeffs.push(p * (sign / k as f64));
            p *= inv;
        }
        Ok(self.apply_series(&coeffs))
    }

    /// Principal branch.
    pub fn sqrt(&self) -> Result<Jet> {
        let a = self.guard("sqrt at branch point")?;
        let s = a.sqrt();
        let inv = 1.0 / a;
        let mut coeffs = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        let mut p = Complex::new(1.0, 0.0);
        for k in 0..=self.order() {
            coeffs.push(s * p * binom);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            p *= inv;
        }
        Ok(self.apply_series(&coeffs))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [s, c, -s, -c];
        let coeffs: Vec<Complex> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.apply_series(&coeffs)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = [c, -s, -c, s];
        let coeffs: Vec<Complex> = (0..=self.order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.apply_series(&coeffs)
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.layout, 1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// Substitutes `x_i = base_i + deltas[i]` into this series, where each
    /// delta has zero value. The result lives in the deltas' layout and is
    /// exact up to the smaller of the two orders.
    pub fn compose(&self, deltas: &[Jet]) -> Result<Jet> {
        if deltas.len() != self.nvars() {
            return Err(Error::Dimension {
                expected: self.nvars(),
                found: deltas.len(),
            });
        }
        let target = match deltas.first() {
            Some(d) => d.layout.clone(),
            None => return Err(Error::Evaluation("compose needs a target layout".into())),
        };
        for d in deltas {
            self.check_dims_layout(d, &target)?;
        }
        let order = self.order().min(target.order);
        let layout = Layout::get(target.nvars, order);
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(deltas.len());
        for d in deltas {
            let mut d = d.truncate(order);
            d.c[0] = Complex::new(0.0, 0.0);
            let mut p = vec![Jet::constant(&layout, 1.0)];
            for e in 1..=order {
                let next = &p[e - 1] * &d;
                p.push(next);
            }
            powers.push(p);
        }
        let mut out = Jet::zero(&layout);
        for (k, m) in self.layout.exps.iter().enumerate() {
            let deg: usize = m.iter().map(|&e| e as usize).sum();
            if deg > order || self.c[k] == Complex::new(0.0, 0.0) {
                continue;
            }
            let mut term = Jet::constant(&layout, self.c[k]);
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[i][e as usize];
                }
            }
            out += &term;
        }
        Ok(out)
    }

    fn check_dims_layout(&self, d: &Jet, target: &Arc<Layout>) -> Result<()> {
        if d.nvars() != target.nvars {
            return Err(Error::Dimension {
                expected: target.nvars,
                found: d.nvars(),
            });
        }
        Ok(())
    }
}

fn unit(n: usize, idx: &[usize]) -> Vec<u8> {
    let mut e = vec![0u8; n];
    for &i in idx {
        e[i] += 1;
    }
    e
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Lifts a point to coordinate jets: `x_i` has value `p_i`, gradient `e_i`.
pub fn lift_point_order(p: &[f64], order: usize) -> Vec<Jet> {
    let layout = Layout::get(p.len(), order);
    p.iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(&layout, i, v))
        .collect()
}

/// Second-order seed jets for `p`.
pub fn lift_point(p: &[f64]) -> Vec<Jet> {
    lift_point_order(p, 2)
}

/// Values of a slice of jets, real parts only.
pub fn real_values(x: &[Jet]) -> Vec<f64> {
    x.iter().map(|j| j.value().re).collect()
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.nvars())
            .field("order", &self.order())
            .field("coeffs", &self.c)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.nvars() == other.nvars() && self.order() == other.order() && self.c == other.c
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.$try(rhs).expect("jet dimension mismatch")
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$try(&rhs).expect("jet dimension mismatch")
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$try(rhs).expect("jet dimension mismatch")
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$try(&rhs).expect("jet dimension mismatch")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

/// Elementary operations of [`jet_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Mul,
    Div,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Conj,
}

/// Applies an elementary operation to jet arguments, checking arity and
/// dimensions.
pub fn jet_arith(op: JetOp, args: &[Jet]) -> Result<Jet> {
    let arity = match op {
        JetOp::Add | JetOp::Mul | JetOp::Div => 2,
        _ => 1,
    };
    if args.len() != arity {
        return Err(Error::Evaluation(format!(
            "{op:?} takes {arity} argument(s), got {}",
            args.len()
        )));
    }
    let a = &args[0];
    match op {
        JetOp::Add => a.try_add(&args[1]),
        JetOp::Mul => a.try_mul(&args[1]),
        JetOp::Div => a.try_div(&args[1]),
        JetOp::Sqrt => a.sqrt(),
        JetOp::Exp => Ok(a.exp()),
        JetOp::Log => a.log(),
        JetOp::Sin => Ok(a.sin()),
        JetOp::Cos => Ok(a.cos()),
        JetOp::Conj => Ok(a.conj()),
    }
}
