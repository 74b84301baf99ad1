use std::collections::HashMap;

use super::lexer::{tokenize, Spanned, Tok};
use super::{eval_value, BinOp, CmpOp, Expr, Func, Predicate, SyntaxError};
use crate::algebra::Complex;
use crate::error::{Error, Result};

const OPERAND: &[&str] = &["number", "identifier", "(", "-"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.exponent()?;
        let n = constant_integer(&exponent).ok_or_else(|| SyntaxError {
            offset: at,
            expected: vec!["integer exponent".into()],
            found: format!("`{exponent}`"),
        })?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn exponent(&mut self) -> Result<Expr, SyntaxError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.exponent()?));
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Number(x) => {
                self.bump();
                Ok(Expr::real(x))
            }
            Tok::Ident(name) => {
                let at = self.offset();
                self.bump();
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name).ok_or_else(|| SyntaxError {
                        offset: at,
                        expected: Func::ALL.iter().map(|f| f.name().to_string()).collect(),
                        found: format!("unknown function `{name}`"),
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::call(func, arg));
                }
                if name == "i" {
                    return Ok(Expr::Const(Complex::i()));
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error(OPERAND)),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[t.symbol()]))
        }
    }
}

fn constant_integer(e: &Expr) -> Option<i32> {
    if !e.variables().is_empty() {
        return None;
    }
    let v = eval_value(e, &HashMap::new()).ok()?;
    if v.im != 0.0 || v.re.fract() != 0.0 || v.re.abs() > i32::MAX as f64 {
        return None;
    }
    Some(v.re as i32)
}

fn parser_for(src: &str) -> Result<Parser, SyntaxError> {
    Ok(Parser {
        toks: tokenize(src)?,
        pos: 0,
    })
}

/// Parses a complete expression.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = parser_for(src)?;
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax(p.error(&["+", "-", "*", "/", "^", "end of input"])));
    }
    Ok(e)
}

/// Parses a guard such as `x4 > 0 && t^2*S - 6 != 0`. Empty input is the
/// always-true predicate.
pub fn parse_predicate(src: &str) -> Result<Predicate> {
    let mut p = parser_for(src)?;
    let mut clauses = Vec::new();
    if *p.peek() == Tok::End {
        return Ok(Predicate { clauses });
    }
    loop {
        let lhs = p.expr()?;
        let op = match p.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Ne => CmpOp::Ne,
            Tok::EqEq => CmpOp::Eq,
            _ => return Err(Error::Syntax(p.error(&["<", "<=", ">", ">=", "!=", "=="]))),
        };
        p.bump();
        let rhs = p.expr()?;
        clauses.push((lhs, op, rhs));
        match p.peek() {
            Tok::AndAnd => {
                p.bump();
            }
            Tok::End => break,
            _ => return Err(Error::Syntax(p.error(&["&&", "end of input"]))),
        }
    }
    Ok(Predicate { clauses })
}
