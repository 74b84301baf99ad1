use nalgebra::DMatrix;

use crate::autodiff::matrix::{inverse, truncate_matrix};
use crate::autodiff::Jet;
use crate::error::{Error, Result};

use super::metric::{real_matrix, MetricChart};

/// Connection coefficients `Γ^k_ij` stored at `k*n*n + i*n + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionCoefficients {
    pub dim: usize,
    pub gamma: Vec<f64>,
}

impl ConnectionCoefficients {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.dim + i) * self.dim + j]
    }

    /// Largest `|Γ^k_ij - Γ^k_ji|`.
    pub fn torsion(&self) -> f64 {
        let n = self.dim;
        let mut t = 0.0_f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    t = t.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        t
    }
}

/// Connection coefficients as jets in the chart coordinates.
#[derive(Clone, Debug)]
pub struct ConnSeries {
    pub dim: usize,
    pub gamma: Vec<Jet>,
}

impl ConnSeries {
    pub fn get(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.gamma[(k * self.dim + i) * self.dim + j]
    }

    pub fn order(&self) -> usize {
        self.gamma[0].order()
    }

    pub fn values(&self) -> ConnectionCoefficients {
        ConnectionCoefficients {
            dim: self.dim,
            gamma: self.gamma.iter().map(|j| j.value().re).collect(),
        }
    }
}

/// A connection given as a field over a chart.
pub trait ConnectionField: Send + Sync {
    fn dim(&self) -> usize;

    /// Coefficients as jets of `order` at `p`.
    fn series_at(&self, p: &[f64], order: usize) -> Result<ConnSeries>;
}

/// The trivial connection of a coordinate chart.
#[derive(Clone, Copy, Debug)]
pub struct FlatConnection {
    pub dim: usize,
}

impl ConnectionField for FlatConnection {
    fn dim(&self) -> usize {
        self.dim
    }

    fn series_at(&self, p: &[f64], order: usize) -> Result<ConnSeries> {
        let layout = crate::autodiff::Layout::get(p.len(), order);
        Ok(ConnSeries {
            dim: self.dim,
            gamma: vec![Jet::zero(&layout); self.dim.pow(3)],
        })
    }
}

/// A metric chart acts as its Levi-Civita connection.
impl ConnectionField for MetricChart {
    fn dim(&self) -> usize {
        self.dim
    }

    fn series_at(&self, p: &[f64], order: usize) -> Result<ConnSeries> {
        let g = MetricChart::series_at(self, p, order + 1)?;
        levi_civita(&g)
    }
}

/// Levi-Civita coefficients from metric jets of order `K >= 1`; the result
/// has order `K - 1`.
pub fn levi_civita(g: &[Vec<Jet>]) -> Result<ConnSeries> {
    let n = g.len();
    let order = g[0][0].order();
    if order == 0 {
        return Err(Error::Evaluation("metric jets carry no derivatives".into()));
    }
    let ginv = inverse(&truncate_matrix(g, order - 1))?;
    // dg[m][i][j] = ∂_m g_ij
    let dg: Vec<Vec<Vec<Jet>>> = (0..n)
        .map(|m| {
            (0..n)
                .map(|i| (0..n).map(|j| g[i][j].derivative(m)).collect())
                .collect()
        })
        .collect();
    let layout = ginv[0][0].layout().clone();
    let mut gamma = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = Jet::zero(&layout);
                for l in 0..n {
                    let s = &(&dg[i][j][l] + &dg[j][i][l]) - &dg[l][i][j];
                    acc += &(&ginv[k][l] * &s);
                }
                gamma.push(acc.scale(0.5));
            }
        }
    }
    Ok(ConnSeries { dim: n, gamma })
}

/// Levi-Civita connection coefficients of `g` at `p`.
pub fn christoffel(g: &MetricChart, p: &[f64]) -> Result<ConnectionCoefficients> {
    Ok(ConnectionField::series_at(g, p, 0)?.values())
}

/// `R^i_jkl` as jets at `(((i*n + j)*n + k)*n + l)`, one order below the connection.
pub fn riemann_series(c: &ConnSeries) -> Result<Vec<Jet>> {
    let n = c.dim;
    let order = c.order();
    if order == 0 {
        return Err(Error::Evaluation("connection jets carry no derivatives".into()));
    }
    let low: Vec<Jet> = c.gamma.iter().map(|j| j.truncate(order - 1)).collect();
    let g = |k: usize, i: usize, j: usize| &low[(k * n + i) * n + j];
    let layout = low[0].layout().clone();
    let mut r = Vec::with_capacity(n.pow(4));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = &c.get(i, l, j).derivative(k) - &c.get(i, k, j).derivative(l);
                    for m in 0..n {
                        acc += &(g(i, k, m) * g(m, l, j));
                        acc = &acc - &(g(i, l, m) * g(m, k, j));
                    }
                    r.push(acc.truncate(layout.order()));
                }
            }
        }
    }
    Ok(r)
}

/// `Ric_jk = R^i_jik` from Riemann jets.
pub fn ricci_series(r: &[Jet], n: usize) -> Vec<Vec<Jet>> {
    let at = |i: usize, j: usize, k: usize, l: usize| &r[((i * n + j) * n + k) * n + l];
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let mut acc = at(0, j, 0, k).clone();
                    for i in 1..n {
                        acc += at(i, j, i, k);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Curvature values at a point.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub dim: usize,
    /// `R^i_jkl` at `(((i*n + j)*n + k)*n + l)`.
    pub riemann: Vec<f64>,
    pub ricci: DMatrix<f64>,
    pub scalar: Option<f64>,
}

impl Curvature {
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.riemann[((i * n + j) * n + k) * n + l]
    }

    /// Largest violation of `R^i_jkl + R^i_klj + R^i_ljk = 0`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.riemann(i, j, k, l)
                            + self.riemann(i, k, l, j)
                            + self.riemann(i, l, j, k);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn ricci_sym(&self) -> DMatrix<f64> {
        (&self.ricci + self.ricci.transpose()) * 0.5
    }
}

/// Riemann, Ricci and (with a metric) scalar curvature of a connection at `p`.
pub fn curvature(
    conn: &dyn ConnectionField,
    p: &[f64],
    metric: Option<&MetricChart>,
) -> Result<Curvature> {
    let n = conn.dim();
    let c = conn.series_at(p, 1)?;
    let r = riemann_series(&c)?;
    let ric = ricci_series(&r, n);
    let ricci = DMatrix::from_fn(n, n, |j, k| ric[j][k].value().re);
    let scalar = match metric {
        Some(g) => {
            let gv = g.value_at(p)?;
            Some(trace_with(&gv, &((&ricci + ricci.transpose()) * 0.5))?)
        }
        None => None,
    };
    Ok(Curvature {
        dim: n,
        riemann: r.iter().map(|j| j.value().re).collect(),
        ricci,
        scalar,
    })
}

pub(crate) fn invert(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("metric value is not invertible".into()))
}

/// `g^{jk} T_jk`.
pub fn trace_with(g: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64> {
    let ginv = invert(g)?;
    Ok(ginv.component_mul(t).sum())
}

/// Norm of a covariant 2-tensor: `sqrt(g^ik g^jl T_ij T_kl)`.
pub fn tensor_norm(g: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64> {
    let ginv = invert(g)?;
    let m = &ginv * t * &ginv;
    Ok(m.component_mul(t).sum().max(0.0).sqrt())
}

/// Trace-free part of a symmetric tensor with respect to `g`.
pub fn trace_free(g: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = trace_with(g, t)?;
    Ok(t - g * (s / g.nrows() as f64))
}

/// `|Ric - (s/n) g|_g` for the Levi-Civita connection of `g`.
pub fn einstein_residual(g: &MetricChart, p: &[f64]) -> Result<f64> {
    let c = curvature(g, p, None)?;
    let gv = g.value_at(p)?;
    tensor_norm(&gv, &trace_free(&gv, &c.ricci_sym())?)
}

/// Scalar curvature of `g` at `p`.
pub fn scalar_curvature(g: &MetricChart, p: &[f64]) -> Result<f64> {
    Ok(curvature(g, p, Some(g))?.scalar.unwrap_or(f64::NAN))
}

/// Metric value and lowered Riemann tensor `R_ijkl = g_im R^m_jkl`.
pub(crate) fn lowered_riemann(g: &MetricChart, p: &[f64]) -> Result<(DMatrix<f64>, Curvature, Vec<f64>)> {
    let series = MetricChart::series_at(g, p, 2)?;
    let gv = real_matrix(&series);
    let c = levi_civita(&series)?;
    let r = riemann_series(&c)?;
    let n = g.dim;
    let ric = ricci_series(&r, n);
    let curv = Curvature {
        dim: n,
        riemann: r.iter().map(|j| j.value().re).collect(),
        ricci: DMatrix::from_fn(n, n, |j, k| ric[j][k].value().re),
        scalar: None,
    };
    let mut low = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += gv[(i, m)] * curv.riemann(m, j, k, l);
                    }
                    low[((i * n + j) * n + k) * n + l] = s;
                }
            }
        }
    }
    Ok((gv, curv, low))
}
