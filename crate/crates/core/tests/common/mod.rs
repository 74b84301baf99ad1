#![allow(dead_code)]

use hspace::exprlang::{BinOp, Expr, Func};
use rand::Rng;

/// Random smooth expression in `x1..x3`, defined on all of R^3.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.6) {
            Expr::var(&format!("x{}", rng.random_range(1..=3)))
        } else {
            Expr::real((rng.random_range(-20..=20) as f64) / 8.0)
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.random_range(0..9) {
        0 => Expr::binary(BinOp::Add, a, random_expr(rng, depth - 1)),
        1 => Expr::binary(BinOp::Sub, a, random_expr(rng, depth - 1)),
        2 | 3 => Expr::binary(BinOp::Mul, a, random_expr(rng, depth - 1)),
        // denominators bounded away from zero
        4 => {
            let b = random_expr(rng, depth - 1);
            Expr::binary(BinOp::Div, a, positive(b))
        }
        5 => Expr::Pow(Box::new(a), rng.random_range(2..=3)),
        6 => Expr::call(if rng.random_bool(0.5) { Func::Sin } else { Func::Cos }, a),
        7 => Expr::call(Func::Exp, Expr::call(Func::Sin, a)),
        _ => Expr::call(if rng.random_bool(0.5) { Func::Sqrt } else { Func::Log }, positive(a)),
    }
}

/// `1 + e^2`
pub fn positive(e: Expr) -> Expr {
    Expr::binary(BinOp::Add, Expr::real(1.0), Expr::Pow(Box::new(e), 2))
}
