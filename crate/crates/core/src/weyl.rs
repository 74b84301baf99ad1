//! Weyl structures on 3-dimensional charts.
//!
//! The Lee form convention is `D h = -2 α ⊗ h`, so the connection is
//! `Γ^D = Γ^h + δ^i_j α_k + δ^i_k α_j - h_jk α^i` and the gauge change
//! `(h, α) -> (e^{2ω} h, α - dω)` leaves `D` unchanged.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::autodiff::matrix::{inverse, truncate_matrix};
use crate::autodiff::{lift_point_order, Jet};
use crate::chart::{ExprFn, FnChart, SharedFn};
use crate::error::{Error, Result};
use crate::exprlang::parse;
use crate::geometry::{
    builtin_metric, curvature, levi_civita, ricci_series, riemann_series, tensor_norm,
    trace_free, ConnSeries, ConnectionCoefficients, ConnectionField, MetricChart,
};

#[derive(Clone)]
pub struct WeylStructure {
    pub name: String,
    pub h: MetricChart,
    /// Lee form components `α_i`, real valued.
    pub alpha: SharedFn,
}

impl fmt::Debug for WeylStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeylStructure")
            .field("name", &self.name)
            .field("h", &self.h)
            .finish()
    }
}

impl WeylStructure {
    pub fn new(name: &str, h: MetricChart, alpha: SharedFn) -> Result<Self> {
        if h.dim != 3 {
            return Err(Error::Dimension {
                expected: 3,
                found: h.dim,
            });
        }
        if alpha.input_dim() != 3 || alpha.output_dim() != 3 {
            return Err(Error::Dimension {
                expected: 3,
                found: alpha.output_dim(),
            });
        }
        Ok(WeylStructure {
            name: name.to_string(),
            h,
            alpha,
        })
    }

    /// Lee form from expressions in the coordinates of `h`.
    pub fn with_alpha_exprs(name: &str, h: MetricChart, alpha: &[&str]) -> Result<Self> {
        let exprs = alpha.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        let f = ExprFn::real_coords(&h.coords, exprs)?;
        WeylStructure::new(name, h, Arc::new(f))
    }

    /// `(h, 0)`.
    pub fn metric_only(name: &str, h: MetricChart) -> Result<Self> {
        let n = h.dim;
        let zero = FnChart::new(n, n, move |x| Ok(vec![Jet::zero(x[0].layout()); n]));
        WeylStructure::new(name, h, Arc::new(zero))
    }

    /// The gauge-equivalent pair `(e^{2ω} h, α - dω)`.
    pub fn gauge(&self, omega: SharedFn) -> Result<Self> {
        let h = self.h.conformal(&format!("{}-gauged", self.h.name), omega.clone())?;
        let alpha = self.alpha.clone();
        let f = FnChart::new(3, 3, move |x| {
            let a = alpha.eval(x)?;
            let dw = crate::chart::at_point_then_compose(x, 1, |s| {
                let w = omega.eval(s)?.remove(0);
                Ok((0..3).map(|i| w.derivative(i)).collect())
            })?;
            Ok(a.iter().zip(&dw).map(|(a, d)| a - d).collect())
        });
        WeylStructure::new(&format!("{}-gauged", self.name), h, Arc::new(f))
    }

    /// Lee form jets of `order` at `p`.
    pub fn alpha_series(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.alpha.eval(&lift_point_order(p, order))
    }

    /// `dα` as an antisymmetric matrix of jets of `order` at `p`.
    pub fn d_alpha_series(&self, p: &[f64], order: usize) -> Result<Vec<Vec<Jet>>> {
        let a = self.alpha_series(p, order + 1)?;
        Ok((0..3)
            .map(|i| (0..3).map(|j| &a[j].derivative(i) - &a[i].derivative(j)).collect())
            .collect())
    }
}

/// Weyl connection coefficients from metric jets of order `K` and Lee form
/// jets of order at least `K - 1`.
pub fn weyl_connection_series(h: &[Vec<Jet>], alpha: &[Jet]) -> Result<ConnSeries> {
    let mut c = levi_civita(h)?;
    let order = c.order();
    let n = c.dim;
    let hl = truncate_matrix(h, order);
    let hinv = inverse(&hl)?;
    let a: Vec<Jet> = alpha.iter().map(|j| j.truncate(order)).collect();
    let up: Vec<Jet> = (0..n)
        .map(|k| {
            let mut acc = Jet::zero(a[0].layout());
            for l in 0..n {
                acc += &(&hinv[k][l] * &a[l]);
            }
            acc
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut extra = -(&hl[i][j] * &up[k]);
                if k == i {
                    extra += &a[j];
                }
                if k == j {
                    extra += &a[i];
                }
                let idx = (k * n + i) * n + j;
                c.gamma[idx] = &c.gamma[idx] + &extra;
            }
        }
    }
    Ok(c)
}

impl ConnectionField for WeylStructure {
    fn dim(&self) -> usize {
        3
    }

    fn series_at(&self, p: &[f64], order: usize) -> Result<ConnSeries> {
        let h = self.h.series_at(p, order + 1)?;
        let a = self.alpha_series(p, order)?;
        weyl_connection_series(&h, &a)
    }
}

pub fn weyl_connection(w: &WeylStructure, p: &[f64]) -> Result<ConnectionCoefficients> {
    Ok(ConnectionField::series_at(w, p, 0)?.values())
}

/// Scalar curvature of the Weyl connection as a jet of `order` at `p`: the
/// `h`-trace of the symmetrized Ricci tensor.
pub fn weyl_scalar_series(w: &WeylStructure, p: &[f64], order: usize) -> Result<Jet> {
    let h = w.h.series_at(p, order + 2)?;
    let a = w.alpha_series(p, order + 1)?;
    let c = weyl_connection_series(&h, &a)?;
    let ric = ricci_series(&riemann_series(&c)?, 3);
    let hinv = inverse(&truncate_matrix(&h, order))?;
    let mut s = Jet::zero(hinv[0][0].layout());
    for j in 0..3 {
        for k in 0..3 {
            let sym = (&ric[j][k] + &ric[k][j]).scale(0.5);
            s += &(&hinv[j][k] * &sym);
        }
    }
    Ok(s)
}

pub fn weyl_scalar(w: &WeylStructure, p: &[f64]) -> Result<f64> {
    let c = curvature(w, p, Some(&w.h))?;
    Ok(c.scalar.unwrap_or(f64::NAN))
}

/// `h`-norm of the trace-free symmetrized Ricci tensor of the Weyl connection.
pub fn einstein_weyl_residual(w: &WeylStructure, p: &[f64]) -> Result<f64> {
    let c = curvature(w, p, None)?;
    let h: DMatrix<f64> = w.h.value_at(p)?;
    tensor_norm(&h, &trace_free(&h, &c.ricci_sym())?)
}

/// Covariant derivative `(D_m h)_ij` at `p`, indexed `[m][i][j]`.
pub fn covariant_derivative_of_h(w: &WeylStructure, p: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let h = w.h.series_at(p, 1)?;
    let c = ConnectionField::series_at(w, p, 0)?.values();
    let n = 3;
    Ok((0..n)
        .map(|m| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut v = h[i][j].grad(m).re;
                            for l in 0..n {
                                v -= c.get(l, m, i) * h[l][j].value().re;
                                v -= c.get(l, m, j) * h[i][l].value().re;
                            }
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

pub const BUILTIN_WEYL: &[&str] = &["flat-euclidean", "round-s3", "hyperbolic-3", "s2xr"];

/// Built-in Einstein-Weyl structures.
pub fn builtin_weyl(name: &str) -> Option<WeylStructure> {
    let w = match name {
        "flat-euclidean" => WeylStructure::metric_only(name, builtin_metric("flat-3")?),
        "round-s3" => WeylStructure::metric_only(name, builtin_metric("round-s3")?),
        "hyperbolic-3" => WeylStructure::metric_only(name, builtin_metric("hyperbolic-3")?),
        // unit S^2 times a line, with the Lee form along the line
        "s2xr" => {
            let e = "4/(1 + x1^2 + x2^2)^2";
            let h = MetricChart::parse(
                "s2xr",
                &["x1", "x2", "x3"],
                &[&[e, "0", "0"], &["0", e, "0"], &["0", "0", "1"]],
                1,
                "",
            )
            .ok()?;
            WeylStructure::with_alpha_exprs(name, h, &["0", "0", "1"])
        }
        _ => return None,
    };
    w.ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_with(alpha: &[&str]) -> WeylStructure {
        WeylStructure::with_alpha_exprs("t", builtin_metric("flat-3").unwrap(), alpha).unwrap()
    }

    #[test]
    fn flat_with_exact_lee_form() {
        let w = flat_with(&["1", "0", "0"]);
        let c = weyl_connection(&w, &[0.3, 0.2, 0.1]).unwrap();
        assert_eq!(c.get(0, 0, 0), 1.0);
        assert_eq!(c.get(0, 1, 1), -1.0);
        assert_eq!(c.get(1, 0, 1), 1.0);
        assert_eq!(c.torsion(), 0.0);
    }

    #[test]
    fn metric_case_reduces_to_levi_civita() {
        let w = builtin_weyl("hyperbolic-3").unwrap();
        let p = [0.1, 0.2, 0.7];
        assert_eq!(
            weyl_connection(&w, &p).unwrap(),
            crate::geometry::christoffel(&w.h, &p).unwrap()
        );
        assert!((weyl_scalar(&w, &p).unwrap() + 6.0).abs() < 1e-10);
        let s3 = builtin_weyl("round-s3").unwrap();
        assert!((weyl_scalar(&s3, &p).unwrap() - 6.0).abs() < 1e-10);
        assert!(einstein_weyl_residual(&s3, &p).unwrap() < 1e-10);
    }

    #[test]
    fn lee_form_convention() {
        let w = WeylStructure::with_alpha_exprs(
            "t",
            builtin_metric("round-s3").unwrap(),
            &["x2", "sin(x3)", "x1*x2"],
        )
        .unwrap();
        let p = [0.3, -0.5, 0.8];
        let dh = covariant_derivative_of_h(&w, &p).unwrap();
        let h = w.h.value_at(&p).unwrap();
        let a = [p[1], p[2].sin(), p[0] * p[1]];
        for m in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((dh[m][i][j] + 2.0 * a[m] * h[(i, j)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_closed_lee_form_is_not_einstein_weyl() {
        let w = flat_with(&["x2", "0", "0"]);
        assert!(einstein_weyl_residual(&w, &[0.1, 0.2, 0.3]).unwrap() > 0.1);
    }

    #[test]
    fn s2_times_line_is_einstein_weyl() {
        let w = builtin_weyl("s2xr").unwrap();
        let p = [0.3, -0.2, 0.5];
        assert!(einstein_weyl_residual(&w, &p).unwrap() < 1e-10);
        let s = weyl_scalar(&w, &p).unwrap();
        let js = weyl_scalar_series(&w, &p, 2).unwrap();
        assert!((js.value().re - s).abs() < 1e-12);
    }

    #[test]
    fn gauge_change_keeps_the_connection() {
        let w = builtin_weyl("s2xr").unwrap();
        let omega = ExprFn::real_coords(&w.h.coords, vec![parse("0.3*x1 - x2*x3").unwrap()]).unwrap();
        let g = w.gauge(Arc::new(omega)).unwrap();
        let p = [0.2, 0.4, -0.3];
        let a = weyl_connection(&w, &p).unwrap();
        let b = weyl_connection(&g, &p).unwrap();
        for (x, y) in a.gamma.iter().zip(&b.gamma) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
