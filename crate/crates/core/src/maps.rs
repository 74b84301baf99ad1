//! Maps between charts: differential, horizontal conformality, tension,
//! harmonic morphisms, and almost Hermitian structures of submersions.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::Complex;
use crate::autodiff::matrix::{inverse, truncate_matrix};
use crate::autodiff::{lift_point_order, real_values, Jet};
use crate::chart::{at_point_then_compose, check_input, ChartFn, ExprFn, FnChart, SharedFn};
use crate::error::{Error, Result};
use crate::exprlang::{parse, parse_predicate, Expr, Predicate};
use crate::geometry::{ConnectionField, MetricChart};
use crate::report::{CheckReport, CheckResult, Metadata};

/// Imaginary parts of real components larger than this are a domain error.
pub const REAL_TOL: f64 = 1e-10;

/// Relative horizontal-conformality residual accepted when building `J`.
pub const HWC_TOL: f64 = 1e-6;

/// A map from a real chart to real or complex target coordinates. Each
/// complex component counts as two real target coordinates (real part,
/// imaginary part); as a [`ChartFn`] the map returns the real coordinates.
#[derive(Clone)]
pub struct MapChart {
    pub name: String,
    pub coords: Vec<String>,
    pub guard: Predicate,
    components: SharedFn,
    complex: Vec<bool>,
    exprs: Option<Vec<Expr>>,
}

impl fmt::Debug for MapChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapChart")
            .field("name", &self.name)
            .field("coords", &self.coords)
            .field("complex", &self.complex)
            .finish()
    }
}

fn has_imaginary_constant(e: &Expr) -> bool {
    match e {
        Expr::Const(c) => c.im != 0.0,
        Expr::Var(_) => false,
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => has_imaginary_constant(a),
        Expr::Binary(_, a, b) => has_imaginary_constant(a) || has_imaginary_constant(b),
    }
}

impl MapChart {
    pub fn new(
        name: &str,
        coords: Vec<String>,
        components: SharedFn,
        complex: Vec<bool>,
        guard: Predicate,
    ) -> Result<Self> {
        if components.input_dim() != coords.len() || components.output_dim() != complex.len() {
            return Err(Error::Dimension {
                expected: complex.len(),
                found: components.output_dim(),
            });
        }
        Ok(MapChart {
            name: name.to_string(),
            coords,
            guard,
            components,
            complex,
            exprs: None,
        })
    }

    /// Components containing an imaginary constant are complex targets.
    pub fn from_exprs(name: &str, coords: Vec<String>, exprs: Vec<Expr>, guard: Predicate) -> Result<Self> {
        let complex = exprs.iter().map(has_imaginary_constant).collect();
        let f = ExprFn::real_coords(&coords, exprs.clone())?;
        let mut m = MapChart::new(name, coords, Arc::new(f), complex, guard)?;
        m.exprs = Some(exprs);
        Ok(m)
    }

    pub fn parse(name: &str, coords: &[&str], components: &[&str], guard: &str) -> Result<Self> {
        let exprs = components.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        MapChart::from_exprs(
            name,
            coords.iter().map(|s| s.to_string()).collect(),
            exprs,
            parse_predicate(guard)?,
        )
    }

    pub fn exprs(&self) -> Option<&[Expr]> {
        self.exprs.as_deref()
    }

    pub fn source_dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of real target coordinates.
    pub fn target_dim(&self) -> usize {
        self.complex.iter().map(|&c| if c { 2 } else { 1 }).sum()
    }

    pub fn complex_flags(&self) -> &[bool] {
        &self.complex
    }

    pub fn with_guard(&self, guard: Predicate) -> Self {
        MapChart {
            guard,
            ..self.clone()
        }
    }

    pub fn check_domain(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.source_dim() {
            return Err(Error::Dimension {
                expected: self.source_dim(),
                found: p.len(),
            });
        }
        if self.guard.holds_at(&self.coords, p)? {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{p:?} violates the guard `{}` of {}",
                self.guard, self.name
            )))
        }
    }

    /// Component jets, complex components kept complex.
    pub fn eval_complex(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        self.components.eval(x)
    }

    pub fn complex_values_at(&self, p: &[f64]) -> Result<Vec<Complex>> {
        self.components.values_at(p)
    }

    /// `outer ∘ self`, where `outer` reads the real target coordinates of `self`.
    pub fn then(&self, outer: &MapChart) -> Result<MapChart> {
        if outer.source_dim() != self.target_dim() {
            return Err(Error::Dimension {
                expected: self.target_dim(),
                found: outer.source_dim(),
            });
        }
        let inner = self.clone();
        let o = outer.clone();
        let f = FnChart::new(self.source_dim(), outer.complex.len(), move |x| {
            let y = inner.eval(x)?;
            o.eval_complex(&y)
        });
        MapChart::new(
            &format!("{}∘{}", outer.name, self.name),
            self.coords.clone(),
            Arc::new(f),
            outer.complex.clone(),
            self.guard.clone(),
        )
    }
}

impl ChartFn for MapChart {
    fn input_dim(&self) -> usize {
        self.source_dim()
    }

    fn output_dim(&self) -> usize {
        self.target_dim()
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let c = self.components.eval(x)?;
        let mut out = Vec::with_capacity(self.target_dim());
        for (j, &is_complex) in c.iter().zip(&self.complex) {
            if is_complex {
                out.push(j.re());
                out.push(j.im());
            } else {
                let v = j.value();
                if v.im.abs() > REAL_TOL * v.re.abs().max(1.0) {
                    return Err(Error::Domain(format!(
                        "real component of {} took the value {v}",
                        self.name
                    )));
                }
                out.push(j.re());
            }
        }
        Ok(out)
    }
}

/// Jacobian of a map at a point and its numerical rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Differential {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

pub fn differential(f: &MapChart, p: &[f64]) -> Result<Differential> {
    f.check_domain(p)?;
    let y = f.series_at(p, 1)?;
    let matrix = DMatrix::from_fn(y.len(), p.len(), |a, i| y[a].grad(i).re);
    let sv = matrix.clone().singular_values();
    let max = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-12 * max.max(1.0)).count();
    Ok(Differential { matrix, rank })
}

/// Squared dilation and residual of horizontal weak conformality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hwc {
    pub lambda: f64,
    pub residual: f64,
}

pub fn hwc_residual(f: &MapChart, g_m: &MetricChart, g_n: &MetricChart, p: &[f64]) -> Result<Hwc> {
    let d = differential(f, p)?.matrix;
    if d.iter().all(|&v| v == 0.0) {
        return Ok(Hwc {
            lambda: 0.0,
            residual: 0.0,
        });
    }
    let q = real_values(&f.series_at(p, 0)?);
    let gm_inv = invert(&g_m.value_at(p)?)?;
    let gn = g_n.value_at(&q)?;
    let gn_inv = invert(&gn)?;
    let pb = &d * gm_inv * d.transpose();
    let m = gn.nrows() as f64;
    let lambda = (&pb * &gn).trace() / m;
    let t = &pb - &gn_inv * lambda;
    let lowered = &gn * &t * &gn;
    let residual = lowered.component_mul(&t).sum().max(0.0).sqrt();
    Ok(Hwc { lambda, residual })
}

fn invert(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("metric value is not invertible".into()))
}

/// Tension field `τ^a` in the real target coordinates.
pub fn tension_field(
    f: &MapChart,
    g_m: &MetricChart,
    target_conn: &dyn ConnectionField,
    p: &[f64],
) -> Result<Vec<f64>> {
    f.check_domain(p)?;
    let y = f.series_at(p, 2)?;
    let q = real_values(&y);
    let n = p.len();
    let m = y.len();
    if target_conn.dim() != m {
        return Err(Error::Dimension {
            expected: m,
            found: target_conn.dim(),
        });
    }
    let gm_inv = invert(&g_m.value_at(p)?)?;
    let cm = ConnectionField::series_at(g_m, p, 0)?.values();
    let cn = target_conn.series_at(&q, 0)?.values();
    let grad = |a: usize, i: usize| y[a].grad(i).re;
    let mut tau = vec![0.0; m];
    for (a, t) in tau.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = gm_inv[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let mut v = y[a].hess(i, j).re;
                for k in 0..n {
                    v -= cm.get(k, i, j) * grad(a, k);
                }
                for b in 0..m {
                    for c in 0..m {
                        v += cn.get(a, b, c) * grad(b, i) * grad(c, j);
                    }
                }
                s += w * v;
            }
        }
        *t = s;
    }
    Ok(tau)
}

/// Euclidean norm of a tension vector measured with `g_n` at the image point.
pub fn tension_norm(f: &MapChart, g_n: &MetricChart, p: &[f64], tau: &[f64]) -> Result<f64> {
    let q = real_values(&f.series_at(p, 0)?);
    let gn = g_n.value_at(&q)?;
    let mut s = 0.0;
    for a in 0..tau.len() {
        for b in 0..tau.len() {
            s += gn[(a, b)] * tau[a] * tau[b];
        }
    }
    Ok(s.max(0.0).sqrt())
}

/// Checks `|τ|` and the horizontal-conformality residual over `samples`.
/// The report holds two checks, `<name>/tension` and `<name>/hwc`.
pub fn harmonic_morphism_verdict(
    name: &str,
    f: &MapChart,
    g_m: &MetricChart,
    target_conn: &dyn ConnectionField,
    g_n: &MetricChart,
    samples: &[Vec<f64>],
    tol: f64,
) -> CheckReport {
    let tension = CheckResult::from_samples(
        &format!("{name}/tension"),
        tol,
        samples.iter().map(|p| {
            let r = tension_field(f, g_m, target_conn, p).and_then(|t| tension_norm(f, g_n, p, &t));
            (p.clone(), r)
        }),
    );
    let hwc = CheckResult::from_samples(
        &format!("{name}/hwc"),
        tol,
        samples
            .iter()
            .map(|p| (p.clone(), hwc_residual(f, g_m, g_n, p).map(|h| h.residual))),
    );
    CheckReport::new(vec![tension, hwc], Metadata::default())
}

/// `g(u, v)`, bilinear.
pub fn dot(g: &[Vec<Jet>], u: &[Jet], v: &[Jet]) -> Jet {
    let mut acc = Jet::zero(u[0].layout());
    for i in 0..u.len() {
        for j in 0..v.len() {
            acc += &(&(&g[i][j] * &u[i]) * &v[j]);
        }
    }
    acc
}

fn axpy(a: &Jet, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
    y.iter().zip(x).map(|(yi, xi)| yi - &(a * xi)).collect()
}

fn normalize(g: &[Vec<Jet>], v: &[Jet]) -> Result<Vec<Jet>> {
    let r = dot(g, v, v).sqrt()?.recip()?;
    Ok(v.iter().map(|c| c * &r).collect())
}

/// Orthonormal frame of the horizontal plane of a submersion to a surface:
/// `e1 ∝ ∇f^1` and `e2` the unit part of `∇f^2` orthogonal to it. Fails
/// unless the gradients are independent and conformal within [`HWC_TOL`].
pub fn horizontal_frame(g: &[Vec<Jet>], df: &[Vec<Jet>]) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let n = g.len();
    let ginv = inverse(g)?;
    let layout = g[0][0].layout().clone();
    let raise = |w: &[Jet]| -> Vec<Jet> {
        (0..n)
            .map(|i| {
                let mut acc = Jet::zero(&layout);
                for k in 0..n {
                    acc += &(&ginv[i][k] * &w[k]);
                }
                acc
            })
            .collect()
    };
    let g1 = raise(&df[0]);
    let g2 = raise(&df[1]);
    let n1 = dot(g, &g1, &g1).value().re;
    let n2 = dot(g, &g2, &g2).value().re;
    let c12 = dot(g, &g1, &g2).value().re;
    let scale = n1.max(n2);
    if scale <= 1e-24 || n1 * n2 - c12 * c12 <= 1e-20 * scale * scale {
        return Err(Error::NotSubmersive);
    }
    let hwc = ((n1 - n2).powi(2) + 2.0 * c12 * c12).sqrt() / (n1 + n2);
    if hwc > HWC_TOL {
        return Err(Error::NotHorizontallyConformal(hwc));
    }
    let e1 = normalize(g, &g1)?;
    let e2 = normalize(g, &axpy(&dot(g, &e1, &g2), &e1, &g2))?;
    Ok((e1, e2))
}

/// Extends an orthonormal set to `total` vectors by Gram-Schmidt on the
/// coordinate vectors, taking the best conditioned candidate each time.
pub fn complete_frame(
    g: &[Vec<Jet>],
    mut basis: Vec<Vec<Jet>>,
    total: usize,
) -> Result<Vec<Vec<Jet>>> {
    let n = g.len();
    let layout = g[0][0].layout().clone();
    let mut pool: Vec<usize> = (0..n).collect();
    while basis.len() < total {
        let mut best: Option<(usize, Vec<Jet>, f64)> = None;
        for (slot, &c) in pool.iter().enumerate() {
            let mut v: Vec<Jet> = (0..n)
                .map(|i| Jet::constant(&layout, if i == c { 1.0 } else { 0.0 }))
                .collect();
            for b in &basis {
                v = axpy(&dot(g, b, &v), b, &v);
            }
            let len = dot(g, &v, &v).value().re;
            if best.as_ref().is_none_or(|(_, _, l)| len > *l) {
                best = Some((slot, v, len));
            }
        }
        let Some((slot, v, _)) = best else {
            return Err(Error::Dimension {
                expected: total,
                found: n,
            });
        };
        pool.remove(slot);
        basis.push(normalize(g, &v)?);
    }
    Ok(basis)
}

/// The almost Hermitian structure of a submersion to a surface, as jets.
///
/// `g` and `df` (rows `∂_i f^a` for the two real target coordinates) share a
/// layout. The horizontal plane is rotated so that `J ∇f^1 ∝ ∇f^2`, and the
/// vertical rotation is chosen so that the frame `(e1, Je1, v, Jv)` has
/// orientation `orientation * chart_orientation` in coordinates.
pub fn hermitian_jets(
    g: &[Vec<Jet>],
    df: &[Vec<Jet>],
    orientation: i8,
    chart_orientation: i8,
) -> Result<Vec<Vec<Jet>>> {
    let n = g.len();
    if n != 4 || df.len() != 2 {
        return Err(Error::Dimension {
            expected: 4,
            found: n,
        });
    }
    let layout = g[0][0].layout().clone();
    let (e1, e2) = horizontal_frame(g, df)?;
    let mut basis = complete_frame(g, vec![e1, e2], n)?;
    let det = DMatrix::from_fn(n, n, |i, a| basis[a][i].value().re).determinant();
    let want = f64::from(orientation) * f64::from(chart_orientation);
    if det * want < 0.0 {
        basis[3] = basis[3].iter().map(|c| -c).collect();
    }
    // J = E J0 E^T g with J0 e1 = e2, J0 e3 = e4
    let rotated: [(usize, usize, f64); 4] = [(1, 0, 1.0), (0, 1, -1.0), (3, 2, 1.0), (2, 3, -1.0)];
    let mut lowered: Vec<Vec<Jet>> = vec![vec![Jet::zero(&layout); n]; 4];
    for (a, row) in lowered.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            let mut acc = Jet::zero(&layout);
            for l in 0..n {
                acc += &(&basis[a][l] * &g[l][k]);
            }
            *slot = acc;
        }
    }
    let mut j = vec![vec![Jet::zero(&layout); n]; n];
    for &(out, inp, s) in &rotated {
        for i in 0..n {
            for k in 0..n {
                j[i][k] = &j[i][k] + &(&basis[out][i] * &lowered[inp][k]).scale(s);
            }
        }
    }
    Ok(j)
}

/// The almost Hermitian structure of a 4 → 2 map as a chart function with
/// 16 outputs `J^i_k` in row-major order.
#[derive(Clone, Debug)]
pub struct HermitianField {
    pub map: MapChart,
    pub metric: MetricChart,
    pub orientation: i8,
}

impl ChartFn for HermitianField {
    fn input_dim(&self) -> usize {
        4
    }

    fn output_dim(&self) -> usize {
        16
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_input(x, 4)?;
        if self.map.target_dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: self.map.target_dim(),
            });
        }
        at_point_then_compose(x, 1, |s| {
            let order = s[0].order() - 1;
            let y = self.map.eval(s)?;
            let df: Vec<Vec<Jet>> = y
                .iter()
                .map(|ya| (0..4).map(|i| ya.derivative(i)).collect())
                .collect();
            let g = truncate_matrix(&self.metric.eval(s)?, order);
            let j = hermitian_jets(&g, &df, self.orientation, self.metric.orientation)?;
            Ok(j.into_iter().flatten().collect())
        })
    }
}

/// `J` at a point, checking the guards of map and metric.
pub fn hermitian_from_submersion(
    f: &MapChart,
    g_m: &MetricChart,
    orientation: i8,
    p: &[f64],
) -> Result<DMatrix<f64>> {
    f.check_domain(p)?;
    g_m.check_domain(p)?;
    let field = HermitianField {
        map: f.clone(),
        metric: g_m.clone(),
        orientation,
    };
    let v = field.series_at(p, 0)?;
    Ok(DMatrix::from_fn(4, 4, |i, k| v[i * 4 + k].value().re))
}

/// Coordinate norm of the Nijenhuis tensor of a matrix-valued chart function.
pub fn nijenhuis_residual(j: &dyn ChartFn, p: &[f64]) -> Result<f64> {
    let n = p.len();
    if j.output_dim() != n * n {
        return Err(Error::Dimension {
            expected: n * n,
            found: j.output_dim(),
        });
    }
    let s = j.eval(&lift_point_order(p, 1))?;
    let val = |i: usize, k: usize| s[i * n + k].value().re;
    let d = |m: usize, i: usize, k: usize| s[i * n + k].grad(m).re;
    let jm = DMatrix::from_fn(n, n, val);
    let defect = (&jm * &jm + DMatrix::identity(n, n)).norm();
    if defect > 1e-8 {
        return Err(Error::NotAlmostComplex(defect));
    }
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            for i in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += val(k, a) * d(k, i, b) - val(k, b) * d(k, i, a);
                    v += val(i, k) * (d(b, k, a) - d(a, k, b));
                }
                total += v * v;
            }
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_metric, FlatConnection};

    fn xs(n: usize) -> Vec<&'static str> {
        ["x1", "x2", "x3", "x4"][..n].to_vec()
    }

    #[test]
    fn differentials() {
        let f = MapChart::parse("id", &xs(3), &["x1", "x2", "x3"], "").unwrap();
        let d = differential(&f, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(d.matrix, DMatrix::identity(3, 3));
        assert_eq!(d.rank, 3);
        let f = MapChart::parse("phi", &xs(3), &["x1 + i*sqrt(x2^2 + x3^2)"], "").unwrap();
        assert_eq!(f.target_dim(), 2);
        let d = differential(&f, &[0.0, 1.0, 0.0]).unwrap();
        let expect = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!((d.matrix - expect).norm() < 1e-15);
    }

    #[test]
    fn horizontal_conformality() {
        let flat3 = builtin_metric("flat-3").unwrap();
        let flat2 = builtin_metric("flat-2").unwrap();
        let p = [0.3, -0.4, 0.5];
        let f = MapChart::parse("a", &xs(3), &["x1 + i*x2"], "").unwrap();
        let h = hwc_residual(&f, &flat3, &flat2, &p).unwrap();
        assert_eq!((h.lambda, h.residual), (1.0, 0.0));
        let f = MapChart::parse("b", &xs(3), &["x1 + i*2*x2"], "").unwrap();
        let h = hwc_residual(&f, &flat3, &flat2, &p).unwrap();
        assert!((h.lambda - 2.5).abs() < 1e-14);
        assert!((h.residual - 4.5f64.sqrt()).abs() < 1e-14);
        let f = MapChart::parse("c", &xs(3), &["x1 + i*sqrt(x2^2 + x3^2)"], "").unwrap();
        let h = hwc_residual(&f, &flat3, &flat2, &p).unwrap();
        assert!((h.lambda - 1.0).abs() < 1e-14 && h.residual < 1e-10);
        let f = MapChart::parse("k", &xs(3), &["1 + i"], "").unwrap();
        assert_eq!(hwc_residual(&f, &flat3, &flat2, &p).unwrap().residual, 0.0);
    }

    #[test]
    fn tension_examples() {
        let flat3 = builtin_metric("flat-3").unwrap();
        let p = [0.3, -0.4, 0.5];
        let f = MapChart::parse("sq", &xs(3), &["x1^2"], "").unwrap();
        let t = tension_field(&f, &flat3, &FlatConnection { dim: 1 }, &p).unwrap();
        assert!((t[0] - 2.0).abs() < 1e-14);
        let hyp = builtin_metric("hyperbolic-4").unwrap();
        let f = MapChart::parse("phi", &xs(4), &["x1 + i*sqrt(x2^2 + x3^2 + x4^2)"], "x4 > 0").unwrap();
        let t = tension_field(&f, &hyp, &FlatConnection { dim: 2 }, &[0.2, 0.3, -0.1, 0.7]).unwrap();
        assert!(t.iter().all(|v| v.abs() < 1e-12), "{t:?}");
    }

    #[test]
    fn verdicts() {
        let flat3 = builtin_metric("flat-3").unwrap();
        let flat1 = MetricChart::parse("line", &["y"], &[&["1"]], 1, "").unwrap();
        let samples = vec![vec![0.1, 0.2, 0.3], vec![-0.5, 0.4, 0.1]];
        let f = MapChart::parse("sq", &xs(3), &["x1^2"], "").unwrap();
        let r = harmonic_morphism_verdict("sq", &f, &flat3, &FlatConnection { dim: 1 }, &flat1, &samples, 1e-6);
        assert!(!r.pass());
        let t = r.get("sq/tension").unwrap();
        assert!((t.max_residual - 2.0).abs() < 1e-14);
        let flat2 = builtin_metric("flat-2").unwrap();
        let f = MapChart::parse("lin", &xs(3), &["x1 + i*x2"], "").unwrap();
        let r = harmonic_morphism_verdict("lin", &f, &flat3, &FlatConnection { dim: 2 }, &flat2, &samples, 1e-6);
        assert!(r.pass());
    }

    #[test]
    fn standard_complex_structure() {
        let flat4 = builtin_metric("flat-4").unwrap();
        let f = MapChart::parse("lin", &xs(4), &["x1 + i*x2"], "").unwrap();
        let j = hermitian_from_submersion(&f, &flat4, 1, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut expect = DMatrix::zeros(4, 4);
        expect[(1, 0)] = 1.0;
        expect[(0, 1)] = -1.0;
        expect[(3, 2)] = 1.0;
        expect[(2, 3)] = -1.0;
        assert!((j - expect).norm() < 1e-15);
        let field = HermitianField {
            map: f,
            metric: flat4,
            orientation: 1,
        };
        assert!(nijenhuis_residual(&field, &[0.1, 0.2, 0.3, 0.4]).unwrap() < 1e-12);
    }

    #[test]
    fn hermitian_structure_invariants() {
        let hyp = builtin_metric("hyperbolic-4").unwrap();
        let f = MapChart::parse("phi", &xs(4), &["x1 + i*sqrt(x2^2 + x3^2 + x4^2)"], "x4 > 0").unwrap();
        let p = [0.2, 0.3, -0.1, 0.7];
        let g = hyp.value_at(&p).unwrap();
        for o in [1, -1] {
            let j = hermitian_from_submersion(&f, &hyp, o, &p).unwrap();
            assert!((&j * &j + DMatrix::identity(4, 4)).norm() < 1e-12);
            assert!((j.transpose() * &g * &j - &g).norm() < 1e-12);
        }
        let bad = MapChart::parse("b", &xs(4), &["x1 + i*2*x2"], "").unwrap();
        assert!(matches!(
            hermitian_from_submersion(&bad, &builtin_metric("flat-4").unwrap(), 1, &p),
            Err(Error::NotHorizontallyConformal(_))
        ));
        let flat = MapChart::parse("c", &xs(4), &["x1 + i*x1"], "").unwrap();
        assert_eq!(
            hermitian_from_submersion(&flat, &builtin_metric("flat-4").unwrap(), 1, &p),
            Err(Error::NotSubmersive)
        );
    }

    #[test]
    fn nijenhuis_requires_almost_complex() {
        let id = ExprFn::real_coords(
            &["a".into(), "b".into()],
            ["1", "0", "0", "1"].iter().map(|s| parse(s).unwrap()).collect(),
        )
        .unwrap();
        assert!(matches!(nijenhuis_residual(&id, &[0.0, 0.0]), Err(Error::NotAlmostComplex(_))));
    }
}
