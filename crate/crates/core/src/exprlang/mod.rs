//! Expression language for metric components, Lee forms, surface
//! parametrizations and maps.
//!
//! Grammar (highest binding first): `^` with an integer exponent
//! (right-associative), unary `-`, then `*` `/`, then `+` `-` (both
//! left-associative). `i` is the imaginary unit. Recognized calls are
//! `sin cos exp log sqrt conj re im abs`.
//!
//! Evaluation is over [`Jet`]s whose base directions are real, so `conj`,
//! `re`, `im` and `abs` are differentiated as real-analytic operations.

mod lexer;
mod parser;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::Complex;
use crate::autodiff::{Jet, Layout};
use crate::error::{Error, Result};

pub use parser::{parse, parse_predicate};

#[derive(Clone, Debug, PartialEq, Error)]
#[error("syntax error at byte {offset}: found {found}, expected one of [{}]", expected.join(", "))]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Conj,
    Re,
    Im,
    Abs,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Conj,
        Func::Re,
        Func::Im,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

pub type Expression = Expr;

impl Expr {
    pub fn real(x: f64) -> Expr {
        Expr::Const(Complex::new(x, 0.0))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces variables by expressions.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(map))),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.substitute(map)), *n),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(map))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.substitute(map)), Box::new(b.substitute(map)))
            }
        }
    }

    /// Canonical text form; [`parse`] reads it back to the same tree.
    pub fn render(&self) -> String {
        self.to_string()
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow(_, _) => 4,
            Expr::Const(c) if c.im != 0.0 && c.re != 0.0 => 1,
            Expr::Const(c) if c.im != 0.0 && c.im != 1.0 => 2,
            Expr::Const(c) if c.re < 0.0 => 3,
            _ => 5,
        }
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => {
                if c.im == 0.0 {
                    if c.re < 0.0 {
                        write!(f, "-{}", fmt_real(-c.re))
                    } else {
                        write!(f, "{}", fmt_real(c.re))
                    }
                } else if c.re == 0.0 {
                    if c.im == 1.0 {
                        write!(f, "i")
                    } else {
                        write!(f, "{}*i", fmt_real(c.im))
                    }
                } else {
                    write!(f, "{} + {}*i", fmt_real(c.re), fmt_real(c.im))
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(a, 3, f)
            }
            Expr::Pow(a, n) => {
                wrap(a, 5, f)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                wrap(a, p, f)?;
                write!(f, " {} ", op.symbol())?;
                wrap(b, p + 1, f)
            }
        }
    }
}

/// Variable bindings plus the jet layout used for constants.
#[derive(Clone)]
pub struct JetEnv {
    layout: Arc<Layout>,
    vars: HashMap<String, Jet>,
}

impl JetEnv {
    pub fn new(layout: Arc<Layout>) -> Self {
        JetEnv {
            layout,
            vars: HashMap::new(),
        }
    }

    pub fn bind(&mut self, name: &str, value: Jet) -> &mut Self {
        self.vars.insert(name.to_string(), value);
        self
    }

    pub fn with(mut self, name: &str, value: Jet) -> Self {
        self.bind(name, value);
        self
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn get(&self, name: &str) -> Option<&Jet> {
        self.vars.get(name)
    }
}

/// Evaluates `e` over jets. All bound jets must share the base dimension of
/// the environment layout.
pub fn eval_jet(e: &Expr, env: &JetEnv) -> Result<Jet> {
    match e {
        Expr::Const(c) => Ok(Jet::constant(&env.layout, *c)),
        Expr::Var(v) => {
            let j = env
                .vars
                .get(v)
                .ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            if j.nvars() != env.layout.nvars() {
                return Err(Error::Dimension {
                    expected: env.layout.nvars(),
                    found: j.nvars(),
                });
            }
            Ok(j.clone())
        }
        Expr::Neg(a) => Ok(-eval_jet(a, env)?),
        Expr::Pow(a, n) => eval_jet(a, env)?.powi(*n),
        Expr::Binary(op, a, b) => {
            let x = eval_jet(a, env)?;
            let y = eval_jet(b, env)?;
            match op {
                BinOp::Add => x.try_add(&y),
                BinOp::Sub => x.try_sub(&y),
                BinOp::Mul => x.try_mul(&y),
                BinOp::Div => x.try_div(&y),
            }
        }
        Expr::Call(func, a) => {
            let x = eval_jet(a, env)?;
            match func {
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Exp => Ok(x.exp()),
                Func::Log => x.log(),
                Func::Sqrt => x.sqrt(),
                Func::Conj => Ok(x.conj()),
                Func::Re => Ok(x.re()),
                Func::Im => Ok(x.im()),
                Func::Abs => {
                    let r = x.re();
                    let i = x.im();
                    (&r * &r + &i * &i).sqrt()
                }
            }
        }
    }
}

/// Plain complex evaluation at a point.
pub fn eval_value(e: &Expr, vars: &HashMap<String, Complex>) -> Result<Complex> {
    let layout = Layout::get(0, 0);
    let mut env = JetEnv::new(layout.clone());
    for (k, v) in vars {
        env.bind(k, Jet::constant(&layout, *v));
    }
    Ok(eval_jet(e, &env)?.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "!=",
            CmpOp::Eq => "==",
        }
    }
}

/// Two sides closer than this count as equal for `==` and `!=`.
pub const PREDICATE_EQ_TOL: f64 = 1e-12;

/// A conjunction of comparisons between real parts, e.g. `x4 > 0 && x1^2 < 4`.
#[derive(Clone, Debug, PartialEq)]
pub struct Predicate {
    pub clauses: Vec<(Expr, CmpOp, Expr)>,
}

impl Predicate {
    pub fn always() -> Predicate {
        Predicate { clauses: vec![] }
    }

    pub fn eval(&self, vars: &HashMap<String, Complex>) -> Result<bool> {
        for (a, op, b) in &self.clauses {
            let x = eval_value(a, vars)?.re;
            let y = eval_value(b, vars)?.re;
            let ok = match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
                CmpOp::Ne => (x - y).abs() > PREDICATE_EQ_TOL,
                CmpOp::Eq => (x - y).abs() <= PREDICATE_EQ_TOL,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Evaluates against real coordinates named by `names`.
    pub fn holds_at(&self, names: &[String], p: &[f64]) -> Result<bool> {
        let vars: HashMap<String, Complex> = names
            .iter()
            .zip(p)
            .map(|(n, &v)| (n.clone(), Complex::new(v, 0.0)))
            .collect();
        self.eval(&vars)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return write!(f, "true");
        }
        for (k, (a, op, b)) in self.clauses.iter().enumerate() {
            if k > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{a} {} {b}", op.symbol())?;
        }
        Ok(())
    }
}
