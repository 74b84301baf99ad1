use crate::autodiff::matrix::inverse_det;
use crate::autodiff::{lift_point_order, Jet};
use crate::error::{Error, Result};

use super::metric::MetricChart;

/// Sign of the permutation taking `0..n` to `idx`, or 0 on a repeat.
pub fn permutation_sign(idx: &[usize]) -> i8 {
    let mut sign = 1;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if idx[a] == idx[b] {
                return 0;
            }
            if idx[a] > idx[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// A 1-form (covector) or 2-form (antisymmetric matrix) in chart components.
#[derive(Clone, Debug, PartialEq)]
pub enum Form<T> {
    One(Vec<T>),
    Two(Vec<Vec<T>>),
}

impl<T> Form<T> {
    pub fn degree(&self) -> usize {
        match self {
            Form::One(_) => 1,
            Form::Two(_) => 2,
        }
    }
}

/// Hodge dual with respect to the volume form `orientation * sqrt(det g) dx1^...^dxn`,
/// on metric and form jets sharing a layout.
pub fn hodge_star_jets(g: &[Vec<Jet>], orientation: i8, form: &Form<Jet>) -> Result<Form<Jet>> {
    let n = g.len();
    let (ginv, det) = inverse_det(g)?;
    let vol = det.sqrt()?.scale(f64::from(orientation));
    let layout = vol.layout().clone();
    let raise1 = |a: &[Jet]| -> Vec<Jet> {
        (0..n)
            .map(|i| {
                let mut acc = Jet::zero(&layout);
                for k in 0..n {
                    acc += &(&ginv[i][k] * &a[k]);
                }
                acc
            })
            .collect()
    };
    let raise2 = |w: &[Vec<Jet>]| -> Vec<Vec<Jet>> {
        let half: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|b| {
                        let mut acc = Jet::zero(&layout);
                        for a in 0..n {
                            acc += &(&ginv[i][a] * &w[a][b]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = Jet::zero(&layout);
                        for b in 0..n {
                            acc += &(&half[i][b] * &ginv[j][b]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };
    match (n, form) {
        (3, Form::Two(w)) => {
            check_square(w, n)?;
            let up = raise2(w);
            let out = (0..3)
                .map(|k| {
                    let mut acc = Jet::zero(&layout);
                    for i in 0..3 {
                        for j in 0..3 {
                            let s = permutation_sign(&[i, j, k]);
                            if s != 0 {
                                acc += &up[i][j].scale(0.5 * f64::from(s));
                            }
                        }
                    }
                    &acc * &vol
                })
                .collect();
            Ok(Form::One(out))
        }
        (3, Form::One(a)) => {
            if a.len() != 3 {
                return Err(Error::Dimension {
                    expected: 3,
                    found: a.len(),
                });
            }
            let up = raise1(a);
            let out = (0..3)
                .map(|j| {
                    (0..3)
                        .map(|k| {
                            let mut acc = Jet::zero(&layout);
                            for (i, u) in up.iter().enumerate() {
                                let s = permutation_sign(&[i, j, k]);
                                if s != 0 {
                                    acc += &u.scale(f64::from(s));
                                }
                            }
                            &acc * &vol
                        })
                        .collect()
                })
                .collect();
            Ok(Form::Two(out))
        }
        (4, Form::Two(w)) => {
            check_square(w, n)?;
            let up = raise2(w);
            let out = (0..4)
                .map(|k| {
                    (0..4)
                        .map(|l| {
                            let mut acc = Jet::zero(&layout);
                            for i in 0..4 {
                                for j in 0..4 {
                                    let s = permutation_sign(&[i, j, k, l]);
                                    if s != 0 {
                                        acc += &up[i][j].scale(0.5 * f64::from(s));
                                    }
                                }
                            }
                            &acc * &vol
                        })
                        .collect()
                })
                .collect();
            Ok(Form::Two(out))
        }
        _ => Err(Error::Domain(format!(
            "Hodge star of a {}-form is not supported in dimension {n}",
            form.degree()
        ))),
    }
}

fn check_square<T>(w: &[Vec<T>], n: usize) -> Result<()> {
    if w.len() != n || w.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            found: w.len(),
        });
    }
    Ok(())
}

fn to_jets(form: &Form<f64>, layout: &std::sync::Arc<crate::autodiff::Layout>) -> Form<Jet> {
    match form {
        Form::One(a) => Form::One(a.iter().map(|&v| Jet::constant(layout, v)).collect()),
        Form::Two(w) => Form::Two(
            w.iter()
                .map(|r| r.iter().map(|&v| Jet::constant(layout, v)).collect())
                .collect(),
        ),
    }
}

fn to_values(form: &Form<Jet>) -> Form<f64> {
    match form {
        Form::One(a) => Form::One(a.iter().map(|j| j.value().re).collect()),
        Form::Two(w) => Form::Two(
            w.iter()
                .map(|r| r.iter().map(|j| j.value().re).collect())
                .collect(),
        ),
    }
}

/// Hodge dual of a form at a point: 2 to 1 and 1 to 2 in dimension 3, 2 to 2 in dimension 4.
pub fn hodge_star(g: &MetricChart, p: &[f64], form: &Form<f64>) -> Result<Form<f64>> {
    let gs = g.series_at(p, 0)?;
    let layout = lift_point_order(p, 0)[0].layout().clone();
    Ok(to_values(&hodge_star_jets(&gs, g.orientation, &to_jets(form, &layout))?))
}

/// Pointwise norm `sqrt(ω_I ω^I / p!)`.
pub fn form_norm(g: &MetricChart, p: &[f64], form: &Form<f64>) -> Result<f64> {
    let ginv = super::curvature::invert(&g.value_at(p)?)?;
    let n = g.dim;
    let sq = match form {
        Form::One(a) => {
            if a.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: a.len(),
                });
            }
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += ginv[(i, j)] * a[i] * a[j];
                }
            }
            s
        }
        Form::Two(w) => {
            check_square(w, n)?;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            s += ginv[(i, k)] * ginv[(j, l)] * w[i][j] * w[k][l];
                        }
                    }
                }
            }
            s / 2.0
        }
    };
    Ok(sq.max(0.0).sqrt())
}

/// The 2-form `dx^a ^ dx^b` as an antisymmetric matrix.
pub fn wedge_basis(n: usize, a: usize, b: usize) -> Form<f64> {
    let mut w = vec![vec![0.0; n]; n];
    w[a][b] = 1.0;
    w[b][a] = -1.0;
    Form::Two(w)
}
