use nalgebra::{DMatrix, DVector};

use crate::algebra::Complex;
use crate::chart::ChartFn;
use crate::error::{Error, Result};

/// Ratio of extreme singular values of the Gram matrix below which the
/// spanning fields count as dependent.
pub const SPAN_TOL: f64 = 1e-10;

/// Size of the part of every pairwise Lie bracket lying outside the span of
/// `fields` at `p`, measured in the coordinate Hermitian inner product.
pub fn frobenius_residual(fields: &[&dyn ChartFn], p: &[f64]) -> Result<f64> {
    let n = p.len();
    let k = fields.len();
    let mut values = Vec::with_capacity(k);
    let mut jac = Vec::with_capacity(k);
    for f in fields {
        if f.input_dim() != n || f.output_dim() != n {
            return Err(Error::Dimension {
                expected: n,
                found: f.output_dim(),
            });
        }
        let s = f.series_at(p, 1)?;
        values.push(DVector::from_iterator(n, s.iter().map(|j| j.value())));
        // jac[a][(i, j)] = ∂_j X_a^i
        jac.push(DMatrix::from_fn(n, n, |i, j| s[i].grad(j)));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let span = DMatrix::from_columns(&values);
    let gram = span.adjoint() * &span;
    let sv = gram.clone().singular_values();
    let max = sv.max();
    if max == 0.0 || sv.min() <= SPAN_TOL * max {
        return Err(Error::DegenerateSpan);
    }
    let gram_inv = gram
        .try_inverse()
        .ok_or(Error::DegenerateSpan)?;
    let projector = &span * gram_inv * span.adjoint();
    let complement = DMatrix::<Complex>::identity(n, n) - projector;
    let mut total = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            let bracket = &jac[b] * &values[a] - &jac[a] * &values[b];
            total += (&complement * bracket).norm_squared();
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ExprFn;
    use crate::exprlang::parse;

    fn field(coords: &[&str], comps: &[&str]) -> ExprFn {
        let c: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        ExprFn::real_coords(&c, comps.iter().map(|s| parse(s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn constant_distributions_are_integrable() {
        let xs = ["x1", "x2", "x3"];
        let a = field(&xs, &["1", "i", "0"]);
        let b = field(&xs, &["0", "0", "1"]);
        assert_eq!(frobenius_residual(&[&a, &b], &[0.2, 0.1, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn twisted_plane_field() {
        let xs = ["x1", "x2", "x3"];
        let a = field(&xs, &["1", "0", "0"]);
        let b = field(&xs, &["0", "1", "x1"]);
        let r = frobenius_residual(&[&a, &b], &[0.0, 0.0, 0.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        let r = frobenius_residual(&[&a, &b], &[1e-3, 0.0, 0.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-5);
    }

    #[test]
    fn dependent_fields() {
        let xs = ["x1", "x2", "x3"];
        let a = field(&xs, &["1", "0", "0"]);
        let b = field(&xs, &["2", "0", "0"]);
        assert_eq!(frobenius_residual(&[&a, &b], &[0.0; 3]), Err(Error::DegenerateSpan));
    }
}
