use nalgebra::{DMatrix, SMatrix};

use crate::error::{Error, Result};

use super::curvature::lowered_riemann;
use super::forms::permutation_sign;
use super::metric::MetricChart;

/// Norms of the Weyl tensor and of its self-dual and anti-self-dual parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylNorms {
    pub total: f64,
    pub self_dual: f64,
    pub anti_self_dual: f64,
}

/// Basis 2-forms `e^a ^ e^b`, `a < b`.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Hodge star on 2-forms of an oriented orthonormal coframe in dimension 4.
pub fn star_matrix(orientation: i8) -> SMatrix<f64, 6, 6> {
    let mut s = SMatrix::<f64, 6, 6>::zeros();
    for (p, &(a, b)) in PAIRS.iter().enumerate() {
        for (q, &(c, d)) in PAIRS.iter().enumerate() {
            let sign = permutation_sign(&[a, b, c, d]);
            if sign != 0 {
                s[(q, p)] = f64::from(orientation) * f64::from(sign);
            }
        }
    }
    s
}

/// Weyl tensor `W_ijkl` with all indices lowered, in chart coordinates.
pub fn weyl_tensor(g: &MetricChart, p: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = g.dim;
    if n < 3 {
        return Err(Error::Dimension {
            expected: 4,
            found: n,
        });
    }
    let (gv, curv, r) = lowered_riemann(g, p)?;
    let ric = curv.ricci_sym();
    let s = super::curvature::trace_with(&gv, &ric)?;
    let nf = n as f64;
    let schouten = (&ric - &gv * (s / (2.0 * (nf - 1.0)))) / (nf - 2.0);
    let mut w = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let kn = schouten[(i, k)] * gv[(j, l)] + schouten[(j, l)] * gv[(i, k)]
                        - schouten[(i, l)] * gv[(j, k)]
                        - schouten[(j, k)] * gv[(i, l)];
                    let idx = ((i * n + j) * n + k) * n + l;
                    w[idx] = r[idx] - kn;
                }
            }
        }
    }
    Ok((gv, w))
}

/// `|W|`, `|W+|`, `|W-|` of a 4-dimensional metric, with tensor norms.
pub fn weyl_split(g: &MetricChart, p: &[f64]) -> Result<WeylNorms> {
    if g.dim != 4 {
        return Err(Error::Dimension {
            expected: 4,
            found: g.dim,
        });
    }
    let (gv, w) = weyl_tensor(g, p)?;
    let chol = gv
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularMetric("metric is not positive definite".into()))?;
    // columns of L^{-T} are a g-orthonormal frame with the chart orientation
    let frame = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("singular Cholesky factor".into()))?
        .transpose();
    let n = 4;
    let at = |i: usize, j: usize, k: usize, l: usize| w[((i * n + j) * n + k) * n + l];
    let frame_component = |a: usize, b: usize, c: usize, d: usize| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let fij = frame[(i, a)] * frame[(j, b)];
                if fij == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        s += fij * frame[(k, c)] * frame[(l, d)] * at(i, j, k, l);
                    }
                }
            }
        }
        s
    };
    let mut m = SMatrix::<f64, 6, 6>::zeros();
    for (pi, &(a, b)) in PAIRS.iter().enumerate() {
        for (qi, &(c, d)) in PAIRS.iter().enumerate() {
            m[(pi, qi)] = frame_component(a, b, c, d);
        }
    }
    let star = star_matrix(g.orientation);
    let id = SMatrix::<f64, 6, 6>::identity();
    let plus = (id + star) * 0.5;
    let minus = (id - star) * 0.5;
    Ok(WeylNorms {
        total: 2.0 * m.norm(),
        self_dual: 2.0 * (plus * m * plus).norm(),
        anti_self_dual: 2.0 * (minus * m * minus).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_metric;

    #[test]
    fn star_squares_to_identity() {
        for o in [1, -1] {
            let s = star_matrix(o);
            assert!((s * s - SMatrix::<f64, 6, 6>::identity()).norm() < 1e-15);
        }
    }

    #[test]
    fn conformally_flat_metrics() {
        for name in ["hyperbolic-4", "flat-4"] {
            let g = builtin_metric(name).unwrap();
            let w = weyl_split(&g, &[0.2, -0.1, 0.3, 0.9]).unwrap();
            assert!(w.total < 1e-9, "{name}: {w:?}");
        }
    }

    fn surface_product(e: &str, f: &str) -> MetricChart {
        MetricChart::parse(
            "product",
            &["x1", "x2", "x3", "x4"],
            &[
                &[e, "0", "0", "0"],
                &["0", e, "0", "0"],
                &["0", "0", f, "0"],
                &["0", "0", "0", f],
            ],
            1,
            "",
        )
        .unwrap()
    }

    // A product of surfaces is Kähler for both orientations, so each half of
    // W is fixed by the scalar curvature s: |W+| = |W-| = |s|/sqrt(6).
    fn check_kahler_product(g: &MetricChart, s: f64) {
        let w = weyl_split(g, &[0.1, 0.2, -0.3, 0.4]).unwrap();
        let expect = s.abs() / 6f64.sqrt();
        assert!((w.self_dual - expect).abs() < 1e-9, "{w:?}");
        assert!((w.anti_self_dual - expect).abs() < 1e-9, "{w:?}");
        let sum = (w.self_dual.powi(2) + w.anti_self_dual.powi(2)).sqrt();
        assert!((sum - w.total).abs() < 1e-9);
    }

    #[test]
    fn surface_products() {
        let sphere = |a: &str, b: &str| format!("4/(1 + {a}^2 + {b}^2)^2");
        let disc = |a: &str, b: &str| format!("4/(1 - {a}^2 - {b}^2)^2");
        check_kahler_product(&surface_product(&sphere("x1", "x2"), &sphere("x3", "x4")), 4.0);
        check_kahler_product(&builtin_metric("r2xh2").unwrap(), -2.0);
        // opposite curvatures: conformally flat
        let g = surface_product(&sphere("x1", "x2"), &disc("x3", "x4"));
        assert!(weyl_split(&g, &[0.1, 0.2, -0.3, 0.4]).unwrap().total < 1e-9);
    }
}
