use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::autodiff::{lift_point_order, Jet};
use crate::chart::{ExprFn, FnChart, SharedFn};
use crate::error::{Error, Result};
use crate::exprlang::{parse, parse_predicate, Expr, Predicate};

/// Tolerance on `|g_ij - g_ji|` and on imaginary parts of metric values.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// A metric on a coordinate chart.
///
/// Components are a chart function with `dim * dim` outputs in row-major
/// order. The orientation is the sign attached to `dx1 ^ ... ^ dxn`.
#[derive(Clone)]
pub struct MetricChart {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub orientation: i8,
    pub guard: Predicate,
    components: SharedFn,
    exprs: Option<Vec<Expr>>,
}

impl fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("coords", &self.coords)
            .field("orientation", &self.orientation)
            .field("guard", &self.guard.to_string())
            .finish()
    }
}

pub fn default_coords(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

impl MetricChart {
    pub fn from_exprs(
        name: &str,
        coords: Vec<String>,
        matrix: Vec<Vec<Expr>>,
        orientation: i8,
        guard: Predicate,
    ) -> Result<Self> {
        let dim = coords.len();
        if matrix.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: matrix.len(),
            });
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: row.len(),
            });
        }
        let flat: Vec<Expr> = matrix.into_iter().flatten().collect();
        let f = ExprFn::real_coords(&coords, flat.clone())?;
        let mut m = MetricChart::from_fn(name, coords, Arc::new(f), orientation, guard)?;
        m.exprs = Some(flat);
        Ok(m)
    }

    /// Parses component strings; `guard` may be empty.
    pub fn parse(
        name: &str,
        coords: &[&str],
        matrix: &[&[&str]],
        orientation: i8,
        guard: &str,
    ) -> Result<Self> {
        let m = matrix
            .iter()
            .map(|row| row.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MetricChart::from_exprs(
            name,
            coords.iter().map(|s| s.to_string()).collect(),
            m,
            orientation,
            parse_predicate(guard)?,
        )
    }

    pub fn from_fn(
        name: &str,
        coords: Vec<String>,
        components: SharedFn,
        orientation: i8,
        guard: Predicate,
    ) -> Result<Self> {
        let dim = coords.len();
        if components.input_dim() != dim || components.output_dim() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: components.output_dim(),
            });
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::Domain(format!("orientation must be +1 or -1, got {orientation}")));
        }
        for v in guard.clauses.iter().flat_map(|(a, _, b)| {
            let mut s = a.variables();
            s.extend(b.variables());
            s
        }) {
            if !coords.contains(&v) {
                return Err(Error::UnboundVariable(v));
            }
        }
        Ok(MetricChart {
            name: name.to_string(),
            dim,
            coords,
            orientation,
            guard,
            components,
            exprs: None,
        })
    }

    /// The component expressions, when the chart was built from expressions.
    pub fn exprs(&self) -> Option<&[Expr]> {
        self.exprs.as_deref()
    }

    pub fn components(&self) -> &SharedFn {
        &self.components
    }

    pub fn with_orientation(&self, orientation: i8) -> Self {
        MetricChart {
            orientation,
            ..self.clone()
        }
    }

    /// The metric `exp(2 omega) g`, where `omega` is a real scalar chart function.
    pub fn conformal(&self, name: &str, omega: SharedFn) -> Result<Self> {
        if omega.input_dim() != self.dim || omega.output_dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: omega.output_dim(),
            });
        }
        let g = self.components.clone();
        let n = self.dim;
        let f = FnChart::new(n, n * n, move |x| {
            let w = omega.eval(x)?.remove(0).scale(2.0).exp();
            Ok(g.eval(x)?.iter().map(|c| c * &w).collect())
        });
        MetricChart::from_fn(
            name,
            self.coords.clone(),
            Arc::new(f),
            self.orientation,
            self.guard.clone(),
        )
    }

    pub fn in_domain(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: p.len(),
            });
        }
        self.guard.holds_at(&self.coords, p)
    }

    pub fn check_domain(&self, p: &[f64]) -> Result<()> {
        if self.in_domain(p)? {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{p:?} violates the guard `{}` of {}",
                self.guard, self.name
            )))
        }
    }

    /// Components on arbitrary input jets, with no validation.
    pub fn eval(&self, x: &[Jet]) -> Result<Vec<Vec<Jet>>> {
        let flat = self.components.eval(x)?;
        Ok(flat.chunks(self.dim).map(|r| r.to_vec()).collect())
    }

    /// Component jets of the given order at `p`, after checking the guard,
    /// symmetry and positive-definiteness of the value.
    pub fn series_at(&self, p: &[f64], order: usize) -> Result<Vec<Vec<Jet>>> {
        self.check_domain(p)?;
        let g = self.eval(&lift_point_order(p, order))?;
        validate(&g)?;
        Ok(g)
    }

    pub fn value_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.series_at(p, 0)?;
        Ok(real_matrix(&g))
    }
}

pub(crate) fn real_matrix(g: &[Vec<Jet>]) -> DMatrix<f64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |i, j| g[i][j].value().re)
}

fn validate(g: &[Vec<Jet>]) -> Result<()> {
    let n = g.len();
    let scale = g
        .iter()
        .flatten()
        .map(|j| j.value().norm())
        .fold(1.0_f64, f64::max);
    for i in 0..n {
        for j in 0..n {
            let v = g[i][j].value();
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Domain(format!("metric component ({i},{j}) is not finite")));
            }
            if v.im.abs() > SYMMETRY_TOL * scale {
                return Err(Error::Domain(format!("metric component ({i},{j}) is not real")));
            }
            if (v - g[j][i].value()).norm() > SYMMETRY_TOL * scale {
                return Err(Error::Domain(format!("metric is not symmetric at ({i},{j})")));
            }
        }
    }
    let m = real_matrix(g);
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().map(|e| e.abs()).fold(0.0_f64, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min.abs() <= 1e-14 * max {
        return Err(Error::SingularMetric(format!("smallest eigenvalue {min:e}")));
    }
    if min < 0.0 {
        return Err(Error::Domain(format!(
            "metric is not positive definite (eigenvalue {min:e})"
        )));
    }
    Ok(())
}

fn diagonal(name: &str, dim: usize, entries: &[&str], guard: &str) -> MetricChart {
    let coords = default_coords(dim);
    let coord_refs: Vec<&str> = coords.iter().map(String::as_str).collect();
    let rows: Vec<Vec<&str>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { entries[i] } else { "0" }).collect())
        .collect();
    let row_refs: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
    MetricChart::parse(name, &coord_refs, &row_refs, 1, guard).expect("builtin metric")
}

pub const BUILTIN_METRICS: &[&str] = &[
    "flat-2",
    "flat-3",
    "flat-4",
    "hyperbolic-3",
    "hyperbolic-4",
    "round-s3",
    "r2xh2",
];

/// Built-in metric charts, all positively oriented.
pub fn builtin_metric(name: &str) -> Option<MetricChart> {
    let m = match name {
        "flat-2" => diagonal(name, 2, &["1", "1"], ""),
        "flat-3" => diagonal(name, 3, &["1", "1", "1"], ""),
        "flat-4" => diagonal(name, 4, &["1", "1", "1", "1"], ""),
        "hyperbolic-3" => {
            let e = "1/x3^2";
            diagonal(name, 3, &[e, e, e], "x3 > 0")
        }
        "hyperbolic-4" => {
            let e = "1/x4^2";
            diagonal(name, 4, &[e, e, e, e], "x4 > 0")
        }
        "round-s3" => {
            let e = "4/(1 + x1^2 + x2^2 + x3^2)^2";
            diagonal(name, 3, &[e, e, e], "")
        }
        "r2xh2" => diagonal(name, 4, &["1", "1", "1", "exp(2*x1)"], ""),
        _ => return None,
    };
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid() {
        for name in BUILTIN_METRICS {
            let m = builtin_metric(name).unwrap();
            let mut p = vec![0.3; m.dim];
            *p.last_mut().unwrap() = 0.7;
            assert!(m.value_at(&p).is_ok(), "{name}");
        }
        assert!(builtin_metric("nope").is_none());
    }

    #[test]
    fn guard_and_definiteness() {
        let h = builtin_metric("hyperbolic-4").unwrap();
        assert!(matches!(h.value_at(&[0.0, 0.0, 0.0, -1.0]), Err(Error::Domain(_))));
        let bad = MetricChart::parse("bad", &["x", "y"], &[&["1", "0"], &["0", "-1"]], 1, "").unwrap();
        assert!(matches!(bad.value_at(&[0.0, 0.0]), Err(Error::Domain(_))));
        let sing = MetricChart::parse("s", &["x", "y"], &[&["1", "1"], &["1", "1"]], 1, "").unwrap();
        assert!(matches!(sing.value_at(&[0.0, 0.0]), Err(Error::SingularMetric(_))));
        let asym = MetricChart::parse("a", &["x", "y"], &[&["1", "x"], &["0", "1"]], 1, "").unwrap();
        assert!(asym.value_at(&[0.0, 0.0]).is_ok());
        assert!(matches!(asym.value_at(&[0.5, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn unbound_names_are_rejected() {
        let r = MetricChart::parse("u", &["x"], &[&["y"]], 1, "");
        assert!(matches!(r, Err(Error::UnboundVariable(_))));
        let r = MetricChart::parse("u", &["x"], &[&["1"]], 1, "z > 0");
        assert!(matches!(r, Err(Error::UnboundVariable(_))));
    }
}
