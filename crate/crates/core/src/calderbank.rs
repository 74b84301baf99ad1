//! Four-dimensional metrics with a pole of order two built over a
//! three-dimensional Einstein-Weyl space, and the retraction onto the base.
//!
//! Over `(h, α)` with Weyl scalar curvature `S` the metric on `I × M`,
//! coordinates `(t, x)`, is
//!
//! ```text
//! g = t^-2 ( F h + F^-1 β^2 ),   F = 1 - t^2 S / 6,   β = dt + t α + t^2/2 *dα
//! ```

use std::sync::Arc;

use crate::autodiff::{real_values, Jet};
use crate::chart::{at_point_then_compose, check_input, FnChart};
use crate::error::{Error, Result};
use crate::exprlang::{CmpOp, Expr, Predicate};
use crate::geometry::{hodge_star_jets, Form, MetricChart};
use crate::maps::{harmonic_morphism_verdict, MapChart};
use crate::report::CheckReport;
use crate::sampling::DomainBox;
use crate::weyl::{einstein_weyl_residual, weyl_scalar, weyl_scalar_series, WeylStructure};

/// `|F|` below which a point is on the boundary of the admissible interval.
pub const INTERVAL_TOL: f64 = 1e-12;
/// Samples of the base used to bound the interval and the Einstein-Weyl residual.
pub const BASE_SAMPLES: usize = 200;
pub const POLE_T: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct HSpaceChart {
    pub base: WeylStructure,
    /// Upper end of the interval `0 < t < t_max`; infinite when `S <= 0` on the samples.
    pub t_max: f64,
    pub interval_guard: Predicate,
    pub g: MetricChart,
    /// Largest Einstein-Weyl residual of the base over the samples.
    pub base_residual: f64,
}

/// `S` and `*dα` of the base as jets on base-coordinate jets.
fn base_data(w: &WeylStructure, y: &[Jet]) -> Result<Vec<Jet>> {
    at_point_then_compose(y, 0, |s| {
        let p = real_values(s);
        let order = s[0].order();
        let scalar = weyl_scalar_series(w, &p, order)?;
        let h = w.h.series_at(&p, order)?;
        let da = w.d_alpha_series(&p, order)?;
        let Form::One(star) = hodge_star_jets(&h, w.h.orientation, &Form::Two(da))? else {
            unreachable!("the dual of a 2-form in dimension 3 is a 1-form")
        };
        let mut out = vec![scalar];
        out.extend(star);
        Ok(out)
    })
}

fn metric_jets(w: &WeylStructure, x: &[Jet]) -> Result<Vec<Jet>> {
    check_input(x, 4)?;
    let t = &x[0];
    let y = &x[1..];
    let h = w.h.eval(y)?;
    let alpha = w.alpha.eval(y)?;
    let data = base_data(w, y)?;
    let t2 = t * t;
    let f = (&t2 * &data[0]).scale(-1.0 / 6.0).add_scalar(1.0);
    if f.value().norm() <= INTERVAL_TOL {
        return Err(Error::IntervalViolation(t.value().re));
    }
    let finv = f.recip()?;
    let tinv2 = t2.recip()?;
    let mut beta = vec![Jet::constant(t.layout(), 1.0)];
    for i in 0..3 {
        beta.push(&(t * &alpha[i]) + &(&t2 * &data[1 + i]).scale(0.5));
    }
    let mut g = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            let mut v = &(&beta[a] * &beta[b]) * &finv;
            if a > 0 && b > 0 {
                v += &(&f * &h[a - 1][b - 1]);
            }
            g.push(&v * &tinv2);
        }
    }
    Ok(g)
}

fn interval(w: &WeylStructure, base: &DomainBox) -> Result<(f64, f64)> {
    let mut t_max = f64::INFINITY;
    let mut worst = 0.0_f64;
    for p in base.sample(BASE_SAMPLES, 0) {
        if !w.h.in_domain(&p)? {
            continue;
        }
        let s = weyl_scalar(w, &p)?;
        if s > 0.0 {
            t_max = t_max.min((6.0 / s).sqrt());
        }
        worst = worst.max(einstein_weyl_residual(w, &p)?);
    }
    Ok((t_max, worst))
}

/// Builds the metric over `w`, bounding the interval by sampling `base`.
pub fn calderbank_metric(w: &WeylStructure, base: &DomainBox) -> Result<HSpaceChart> {
    if base.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: base.dim(),
        });
    }
    if w.h.coords.iter().any(|c| c == "t") {
        return Err(Error::Config("base coordinates may not be named t".into()));
    }
    let (t_max, base_residual) = interval(w, base)?;
    let mut clauses = vec![(Expr::var("t"), CmpOp::Gt, Expr::real(0.0))];
    if t_max.is_finite() {
        clauses.push((Expr::var("t"), CmpOp::Lt, Expr::real(t_max)));
    }
    let interval_guard = Predicate { clauses };
    let mut guard = interval_guard.clone();
    guard.clauses.extend(w.h.guard.clauses.iter().cloned());
    let mut coords = vec!["t".to_string()];
    coords.extend(w.h.coords.iter().cloned());
    let me = w.clone();
    let f = FnChart::new(4, 16, move |x| metric_jets(&me, x));
    let g = MetricChart::from_fn(
        &format!("hspace-{}", w.name),
        coords,
        Arc::new(f),
        w.h.orientation,
        guard,
    )?;
    Ok(HSpaceChart {
        base: w.clone(),
        t_max,
        interval_guard,
        g,
        base_residual,
    })
}

impl HSpaceChart {
    /// The orientation of `g` for which `W+` is the smaller half at `p`.
    pub fn asd_orientation(&self, p: &[f64]) -> Result<i8> {
        let n = crate::geometry::weyl_split(&self.g, p)?;
        Ok(if n.self_dual <= n.anti_self_dual {
            self.g.orientation
        } else {
            -self.g.orientation
        })
    }
}

/// `‖t^2 g(t, x) - (1 ⊕ h(x))‖` at `t = 1e-4`.
pub fn pole_check(hs: &HSpaceChart, x: &[f64]) -> Result<f64> {
    let mut p = vec![POLE_T];
    p.extend_from_slice(x);
    let g = hs.g.components().values_at(&p)?;
    let h = hs.base.h.value_at(x)?;
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let limit = match (a, b) {
                (0, 0) => 1.0,
                (0, _) | (_, 0) => 0.0,
                _ => h[(a - 1, b - 1)],
            };
            s += (POLE_T * POLE_T * g[a * 4 + b].re - limit).powi(2);
        }
    }
    Ok(s.sqrt())
}

/// `ψ(t, x) = x`.
pub fn retract(hs: &HSpaceChart) -> MapChart {
    let coords: Vec<String> = hs.g.coords.clone();
    let exprs = hs.base.h.coords.iter().map(|c| Expr::var(c)).collect();
    MapChart::from_exprs(&format!("retract-{}", hs.base.name), coords, exprs, hs.g.guard.clone())
        .expect("coordinate projection is well formed")
}

/// `f ∘ ψ` for a map `f` on the base.
pub fn compose_extension(f: &MapChart, hs: &HSpaceChart) -> Result<MapChart> {
    if f.source_dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: f.source_dim(),
        });
    }
    retract(hs).then(f)
}

/// Harmonic morphism verdict for `ψ` against the Weyl connection of the base.
pub fn retract_verdict(hs: &HSpaceChart, samples: &[Vec<f64>], tol: f64) -> CheckReport {
    harmonic_morphism_verdict(
        &format!("retract-{}", hs.base.name),
        &retract(hs),
        &hs.g,
        &hs.base,
        &hs.base.h,
        samples,
        tol,
    )
}
