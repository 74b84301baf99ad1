//! The flat twistor model: contact form on CP^3, surfaces, the quaternionic
//! incidence map `x = (z1 + z2 j)^{-1} (z3 + z4 j)` and the submersions it
//! induces, skies, and horizontal isotropic directions.
//!
//! Points of R^4 are quaternions `x_A + x_B i + x_C j + x_D k`, stored in
//! that order; the boundary slice is `x_D = 0`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::algebra::{hamilton, Complex, ProjectivePoint, Quaternion};
use crate::autodiff::{lift_point_order, real_values, Jet};
use crate::chart::{at_point_then_compose, check_input, Binding, ChartFn, ExprFn, FnChart};
use crate::error::{Error, Result};
use crate::exprlang::{parse, Expr, Func, Predicate};
use crate::geometry::{default_coords, frobenius_residual, MetricChart};
use crate::maps::{complete_frame, horizontal_frame, MapChart};
use crate::sampling::DomainBox;

pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_STEP_TOL: f64 = 1e-12;
pub const NEWTON_RESIDUAL_TOL: f64 = 1e-10;
/// Singular-value ratio below which the incidence Jacobian is singular.
pub const JACOBIAN_TOL: f64 = 1e-12;
/// Relative size of `|z1 + z2 j|` below which the incidence point is at infinity.
pub const INFINITY_TOL: f64 = 1e-12;
/// Largest number of continuation steps tried before giving up.
pub const MAX_CONTINUATION_STEPS: usize = 256;
/// Contact residual accepted for a surface feeding a submersion.
pub const CONTACT_TOL: f64 = 1e-10;

/// `θ(z, w) = z1 w3 - z3 w1 - z2 w4 + z4 w2`.
pub fn contact_pairing(z: &[Complex; 4], w: &[Complex; 4]) -> Complex {
    z[0] * w[2] - z[2] * w[0] - z[1] * w[3] + z[3] * w[1]
}

/// Real parameters `(u_re, u_im, v_re, v_im)`.
pub fn params(u: Complex, v: Complex) -> [f64; 4] {
    [u.re, u.im, v.re, v.im]
}

/// A surface in CP^3 given by homogeneous coordinates holomorphic in `(u, v)`.
#[derive(Clone)]
pub struct SurfacePatch {
    pub name: String,
    exprs: Vec<Expr>,
    f: ExprFn,
    pub domain: DomainBox,
}

impl fmt::Debug for SurfacePatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z: Vec<String> = self.exprs.iter().map(|e| e.to_string()).collect();
        f.debug_struct("SurfacePatch")
            .field("name", &self.name)
            .field("z", &z)
            .field("domain", &self.domain)
            .finish()
    }
}

impl SurfacePatch {
    pub fn new(name: &str, exprs: Vec<Expr>, domain: DomainBox) -> Result<Self> {
        if exprs.len() != 4 {
            return Err(Error::Dimension {
                expected: 4,
                found: exprs.len(),
            });
        }
        if domain.dim() != 4 {
            return Err(Error::Dimension {
                expected: 4,
                found: domain.dim(),
            });
        }
        let bindings = vec![
            Binding::Complex {
                name: "u".into(),
                re: 0,
                im: 1,
            },
            Binding::Complex {
                name: "v".into(),
                re: 2,
                im: 3,
            },
        ];
        let f = ExprFn::new(4, bindings, exprs.clone())?;
        Ok(SurfacePatch {
            name: name.to_string(),
            exprs,
            f,
            domain,
        })
    }

    pub fn parse(name: &str, z: [&str; 4], domain: DomainBox) -> Result<Self> {
        let exprs = z.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        SurfacePatch::new(name, exprs, domain)
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    pub fn with_domain(self, domain: DomainBox) -> Result<Self> {
        if domain.dim() != 4 {
            return Err(Error::Dimension {
                expected: 4,
                found: domain.dim(),
            });
        }
        Ok(SurfacePatch { domain, ..self })
    }

    /// Homogeneous coordinate jets on parameter jets.
    pub fn eval(&self, s: &[Jet]) -> Result<Vec<Jet>> {
        self.f.eval(s)
    }

    pub fn coords_at(&self, s: &[f64; 4]) -> Result<[Complex; 4]> {
        let z = self.f.values_at(s)?;
        Ok([z[0], z[1], z[2], z[3]])
    }

    pub fn point(&self, s: &[f64; 4]) -> Result<ProjectivePoint> {
        ProjectivePoint::new(self.coords_at(s)?)
    }
}

/// Largest Cauchy-Riemann defect `|∂z/∂w_im - i ∂z/∂w_re|` over the
/// coordinates and both parameters `w = u, v`.
pub fn cauchy_riemann_residual(s: &SurfacePatch, p: &[f64; 4]) -> Result<f64> {
    let z = s.eval(&lift_point_order(p, 1))?;
    let mut worst = 0.0_f64;
    for zk in &z {
        for (re, im) in [(0, 1), (2, 3)] {
            let d = zk.grad(im) - Complex::i() * zk.grad(re);
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

/// `θ(z, ∂_v z)` at the parameters.
pub fn contact_residual(s: &SurfacePatch, p: &[f64; 4]) -> Result<Complex> {
    let z = s.eval(&lift_point_order(p, 1))?;
    let dz: Vec<Complex> = z.iter().map(|j| j.grad(2)).collect();
    let zv: Vec<Complex> = z.iter().map(Jet::value).collect();
    Ok(contact_pairing(
        &[zv[0], zv[1], zv[2], zv[3]],
        &[dz[0], dz[1], dz[2], dz[3]],
    ))
}

/// `w = (-conj z2, conj z1, -conj z4, conj z3)` in the parameters `(conj u, conj v)`.
pub fn conjugate_surface(s: &SurfacePatch) -> SurfacePatch {
    let swap: HashMap<String, Expr> = ["u", "v"]
        .iter()
        .map(|n| (n.to_string(), Expr::call(Func::Conj, Expr::var(n))))
        .collect();
    let c = |k: usize| Expr::call(Func::Conj, s.exprs[k].substitute(&swap));
    let exprs = vec![Expr::neg(c(1)), c(0), Expr::neg(c(3)), c(2)];
    let (lo, hi) = (&s.domain.lo, &s.domain.hi);
    let domain = DomainBox {
        lo: vec![lo[0], -hi[1], lo[2], -hi[3]],
        hi: vec![hi[0], -lo[1], hi[2], -lo[3]],
    };
    SurfacePatch::new(&format!("{}-conjugate", s.name), exprs, domain)
        .expect("conjugating keeps the bindings of a valid patch")
}

/// Quaternion components of `(z1 + z2 j)^{-1} (z3 + z4 j)` from coordinate jets.
pub fn incidence_jets(z: &[Jet]) -> Result<Vec<Jet>> {
    let q = |a: &Jet, b: &Jet| [a.re(), a.im(), b.re(), b.im()];
    let q1 = q(&z[0], &z[1]);
    let q2 = q(&z[2], &z[3]);
    let n1 = q1.iter().map(|c| c.value().norm_sqr()).sum::<f64>().sqrt();
    let n2 = q2.iter().map(|c| c.value().norm_sqr()).sum::<f64>().sqrt();
    if n1 <= INFINITY_TOL * n1.max(n2) || n1 == 0.0 {
        return Err(Error::IncidenceAtInfinity(n1));
    }
    let norm2 = &(&(&q1[0] * &q1[0]) + &(&q1[1] * &q1[1])) + &(&(&q1[2] * &q1[2]) + &(&q1[3] * &q1[3]));
    let r = norm2.recip()?;
    let inv = [&q1[0] * &r, -(&q1[1] * &r), -(&q1[2] * &r), -(&q1[3] * &r)];
    Ok(hamilton(&inv, &q2).to_vec())
}

pub fn incidence_point(s: &SurfacePatch, p: &[f64; 4]) -> Result<[f64; 4]> {
    let z = s.coords_at(p)?;
    let q1 = Quaternion::from_complex_pair(z[0], z[1]);
    let q2 = Quaternion::from_complex_pair(z[2], z[3]);
    let n1 = q1.norm();
    if n1 <= INFINITY_TOL * n1.max(q2.norm()) || n1 == 0.0 {
        return Err(Error::IncidenceAtInfinity(n1));
    }
    Ok((q1.inv()? * q2).to_array())
}

fn incidence_with_jacobian(s: &SurfacePatch, p: &[f64; 4]) -> Result<(Vector4<f64>, Matrix4<f64>)> {
    let x = incidence_jets(&s.eval(&lift_point_order(p, 1))?)?;
    let v = Vector4::from_fn(|a, _| x[a].value().re);
    let j = Matrix4::from_fn(|a, i| x[a].grad(i).re);
    Ok((v, j))
}

fn solve_checked(j: &Matrix4<f64>, r: &Vector4<f64>) -> Result<Vector4<f64>> {
    let sv = j.singular_values();
    let max = sv.max();
    let ratio = if max > 0.0 { sv.min() / max } else { 0.0 };
    if ratio < JACOBIAN_TOL {
        return Err(Error::SingularJacobian(ratio));
    }
    j.lu().solve(r).ok_or(Error::SingularJacobian(ratio))
}

/// Newton iteration for `incidence_point(s, ·) = x` from `guess`.
pub fn invert_incidence(s: &SurfacePatch, x: &[f64; 4], guess: &[f64; 4]) -> Result<[f64; 4]> {
    let target = Vector4::from_column_slice(x);
    let mut p = Vector4::from_column_slice(guess);
    let mut last_step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let arr: [f64; 4] = p.into();
        let (v, j) = incidence_with_jacobian(s, &arr)?;
        let r = v - target;
        residual = r.norm();
        if last_step < NEWTON_STEP_TOL * p.norm().max(1.0) && residual < NEWTON_RESIDUAL_TOL {
            if !s.domain.contains(&arr) {
                return Err(Error::OutOfDomain(format!(
                    "parameters {arr:?} leave the domain of {}",
                    s.name
                )));
            }
            return Ok(arr);
        }
        let step = solve_checked(&j, &r)?;
        p -= step;
        last_step = step.norm();
        if !p.iter().all(|c| c.is_finite()) {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

/// A region of R^4 and parameters whose incidence point lies in it; points
/// of the region are reached by continuation from that anchor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRegion {
    pub region: DomainBox,
    pub guess: [f64; 4],
}

/// The map `x ↦ u` of a contact surface, realized by inverting the incidence map.
#[derive(Debug)]
pub struct SurfaceSubmersion {
    pub surface: SurfacePatch,
    seeds: Vec<(SeedRegion, [f64; 4])>,
}

impl SurfaceSubmersion {
    /// Parameters over `x`, continuing from the anchor of the first region containing `x`.
    pub fn solve(&self, x: &[f64]) -> Result<[f64; 4]> {
        let x: [f64; 4] = x.try_into().map_err(|_| Error::Dimension {
            expected: 4,
            found: x.len(),
        })?;
        let Some((seed, anchor)) = self.seeds.iter().find(|(s, _)| s.region.contains(&x)) else {
            return Err(Error::OutOfDomain(format!("{x:?} lies in no seed region")));
        };
        let mut steps = 1;
        let mut last_err = None;
        while steps <= MAX_CONTINUATION_STEPS {
            let mut p = seed.guess;
            let mut ok = true;
            for k in 1..=steps {
                let t = k as f64 / steps as f64;
                let xk: [f64; 4] = std::array::from_fn(|a| anchor[a] + t * (x[a] - anchor[a]));
                match invert_incidence(&self.surface, &xk, &p) {
                    Ok(q) => p = q,
                    Err(e) => {
                        last_err = Some(e);
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(p);
            }
            steps *= 2;
        }
        Err(last_err.unwrap_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        }))
    }

    /// Parameter jets over incidence-point jets `x` of any order.
    pub fn solve_jets(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_input(x, 4)?;
        let p0 = self.solve(&real_values(x))?;
        let (_, j) = incidence_with_jacobian(&self.surface, &p0)?;
        let jinv = j
            .try_inverse()
            .ok_or(Error::SingularJacobian(0.0))?;
        let layout = x[0].layout().clone();
        let mut s: Vec<Jet> = p0.iter().map(|&v| Jet::constant(&layout, v)).collect();
        for _ in 0..=layout.order() {
            let xs = incidence_jets(&self.surface.eval(&s)?)?;
            let r: Vec<Jet> = xs.iter().zip(x).map(|(a, b)| a - b).collect();
            s = (0..4)
                .map(|a| {
                    let mut acc = s[a].clone();
                    for (b, rb) in r.iter().enumerate() {
                        acc = &acc - &rb.scale(jinv[(a, b)]);
                    }
                    acc
                })
                .collect();
        }
        Ok(s)
    }

    /// `φ̃(x) = u(x)` as a map from R^4 to C.
    pub fn map(self: &Arc<Self>) -> MapChart {
        let me = self.clone();
        let f = FnChart::new(4, 1, move |x| {
            let s = me.solve_jets(x)?;
            Ok(vec![&s[0] + &s[1].scale(Complex::i())])
        });
        MapChart::new(
            &self.surface.name,
            default_coords(4),
            Arc::new(f),
            vec![true],
            Predicate::always(),
        )
        .expect("dimensions are fixed")
    }

    /// The restriction of `φ̃` to the slice `x_D = 0`.
    pub fn slice_map(self: &Arc<Self>) -> MapChart {
        let me = self.clone();
        let f = FnChart::new(3, 1, move |x| {
            let mut y = x.to_vec();
            y.push(Jet::zero(x[0].layout()));
            let s = me.solve_jets(&y)?;
            Ok(vec![&s[0] + &s[1].scale(Complex::i())])
        });
        MapChart::new(
            &format!("{}-slice", self.surface.name),
            default_coords(3),
            Arc::new(f),
            vec![true],
            Predicate::always(),
        )
        .expect("dimensions are fixed")
    }
}

/// Number of parameter samples used to certify the contact condition.
pub const CONTACT_SAMPLES: usize = 64;

pub fn submersion_from_surface(s: &SurfacePatch, seeds: Vec<SeedRegion>) -> Result<Arc<SurfaceSubmersion>> {
    let mut worst = 0.0_f64;
    for p in s.domain.sample(CONTACT_SAMPLES, 0) {
        let p: [f64; 4] = p.try_into().expect("domain is 4-dimensional");
        worst = worst.max(contact_residual(s, &p)?.norm());
    }
    if worst > CONTACT_TOL {
        return Err(Error::ContactViolation(worst));
    }
    let mut anchored = Vec::with_capacity(seeds.len());
    for seed in seeds {
        if seed.region.dim() != 4 {
            return Err(Error::Dimension {
                expected: 4,
                found: seed.region.dim(),
            });
        }
        let anchor = incidence_point(s, &seed.guess)?;
        if !seed.region.contains(&anchor) {
            return Err(Error::OutOfDomain(format!(
                "anchor {anchor:?} of a seed lies outside its region"
            )));
        }
        anchored.push((seed, anchor));
    }
    Ok(Arc::new(SurfaceSubmersion {
        surface: s.clone(),
        seeds: anchored,
    }))
}

fn half_space(axis: usize, positive: bool, guess: [f64; 4]) -> SeedRegion {
    let mut lo = vec![-3.0; 4];
    let mut hi = vec![3.0; 4];
    if positive {
        lo[axis] = 0.05;
    } else {
        hi[axis] = -0.05;
    }
    SeedRegion {
        region: DomainBox { lo, hi },
        guess,
    }
}

/// Seeds for `(1, v, u, uv)` on the branch `u_im > 0`. Each region is a
/// half-space slab avoiding the degenerate axis `x_B = x_C = x_D = 0`.
pub fn model_seed_table() -> Vec<SeedRegion> {
    vec![
        half_space(3, true, [0.0, 1.0, 1.0, 0.0]),
        half_space(3, false, [0.0, 1.0, -1.0, 0.0]),
        half_space(2, true, [0.0, 1.0, 0.0, -1.0]),
        half_space(2, false, [0.0, 1.0, 0.0, 1.0]),
        half_space(1, true, [0.0, 1.0, 0.0, 0.0]),
        half_space(1, false, [0.0, 1.0, 2.0, 0.0]),
    ]
}

pub const BUILTIN_SURFACES: &[&str] = &["model-rotational", "transverse-plane"];

fn default_parameter_box() -> DomainBox {
    DomainBox {
        lo: vec![-5.0, -5.0, -1000.0, -1000.0],
        hi: vec![5.0, 5.0, 1000.0, 1000.0],
    }
}

/// The branch `u_im > 0`; Newton steps landing on the conjugate branch are rejected.
fn upper_branch_box() -> DomainBox {
    DomainBox {
        lo: vec![-5.0, 1e-9, -1000.0, -1000.0],
        hi: vec![5.0, 5.0, 1000.0, 1000.0],
    }
}

/// Built-in surfaces with their seed tables.
pub fn builtin_surface(name: &str) -> Option<(SurfacePatch, Vec<SeedRegion>)> {
    match name {
        "model-rotational" => Some((
            SurfacePatch::parse(name, ["1", "v", "u", "u*v"], upper_branch_box()).ok()?,
            model_seed_table(),
        )),
        "transverse-plane" => Some((
            SurfacePatch::parse(name, ["1", "u", "v", "0"], default_parameter_box()).ok()?,
            vec![],
        )),
        _ => None,
    }
}

/// `[σ : τ : z3 : z4]` with `z3 + z4 j = (σ + τ j) x`.
pub fn sky(x: &[f64; 4], s: [Complex; 2]) -> Result<ProjectivePoint> {
    let q = Quaternion::from_complex_pair(s[0], s[1]) * Quaternion::from_array(*x);
    let (z3, z4) = q.to_complex_pair();
    ProjectivePoint::new([s[0], s[1], z3, z4])
}

/// `|θ(Z, W)| / (|Z| |W|)` for `Z` on the sky of `x` and `W` a second,
/// independent point of the same line, i.e. a tangent direction at `Z`.
pub fn sky_tangent_pairing(x: &[f64; 4], s: [Complex; 2]) -> Result<f64> {
    let z = sky(x, s)?.z;
    let w = sky(x, [-s[1].conj(), s[0].conj()])?.z;
    let norm = |v: &[Complex; 4]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok(contact_pairing(&z, &w).norm() / (norm(&z) * norm(&w)))
}

/// The isotropic direction `e1 + sign i e2` of the horizontal plane of a
/// 3 → 2 map, as a field with three complex outputs.
#[derive(Clone, Debug)]
pub struct IsotropicField {
    pub map: MapChart,
    pub metric: MetricChart,
    pub sign: i8,
}

/// The unit vertical field of a 3 → 2 map.
#[derive(Clone, Debug)]
pub struct VerticalField {
    pub map: MapChart,
    pub metric: MetricChart,
}

fn frame_jets(map: &MapChart, metric: &MetricChart, s: &[Jet]) -> Result<(Vec<Vec<Jet>>, Vec<Vec<Jet>>)> {
    let order = s[0].order() - 1;
    if map.target_dim() != 2 || map.source_dim() != 3 {
        return Err(Error::Dimension {
            expected: 2,
            found: map.target_dim(),
        });
    }
    let y = map.eval(s)?;
    let df: Vec<Vec<Jet>> = y
        .iter()
        .map(|ya| (0..3).map(|i| ya.derivative(i)).collect())
        .collect();
    let g: Vec<Vec<Jet>> = metric
        .eval(s)?
        .iter()
        .map(|r| r.iter().map(|j| j.truncate(order)).collect())
        .collect();
    let (e1, e2) = horizontal_frame(&g, &df)?;
    Ok((g, vec![e1, e2]))
}

impl ChartFn for IsotropicField {
    fn input_dim(&self) -> usize {
        3
    }

    fn output_dim(&self) -> usize {
        3
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_input(x, 3)?;
        at_point_then_compose(x, 1, |s| {
            let (_, e) = frame_jets(&self.map, &self.metric, s)?;
            let i = Complex::new(0.0, f64::from(self.sign));
            Ok(e[0].iter().zip(&e[1]).map(|(a, b)| a + &b.scale(i)).collect())
        })
    }
}

impl ChartFn for VerticalField {
    fn input_dim(&self) -> usize {
        3
    }

    fn output_dim(&self) -> usize {
        3
    }

    fn eval(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        check_input(x, 3)?;
        at_point_then_compose(x, 1, |s| {
            let (g, e) = frame_jets(&self.map, &self.metric, s)?;
            Ok(complete_frame(&g, e, 3)?.remove(2))
        })
    }
}

/// `[e1 + i e2, e1 - i e2]` at `p`.
pub fn horizontal_isotropic_directions(
    f: &MapChart,
    g: &MetricChart,
    p: &[f64],
) -> Result<[Vec<Complex>; 2]> {
    f.check_domain(p)?;
    g.check_domain(p)?;
    let dir = |sign: i8| {
        IsotropicField {
            map: f.clone(),
            metric: g.clone(),
            sign,
        }
        .values_at(p)
    };
    Ok([dir(1)?, dir(-1)?])
}

/// `|g(d, d)|` for a complex vector.
pub fn isotropy_residual(g: &MetricChart, p: &[f64], d: &[Complex]) -> Result<f64> {
    let gv = g.value_at(p)?.map(|v| Complex::new(v, 0.0));
    let dv = DVector::from_column_slice(d);
    Ok((dv.transpose() * &gv * &dv)[(0, 0)].norm())
}

/// Frobenius residual of `d^⊥ = span(d, vertical)` for the isotropic field of the given sign.
pub fn d_perp_residual(f: &MapChart, g: &MetricChart, sign: i8, p: &[f64]) -> Result<f64> {
    f.check_domain(p)?;
    g.check_domain(p)?;
    let d = IsotropicField {
        map: f.clone(),
        metric: g.clone(),
        sign,
    };
    let v = VerticalField {
        map: f.clone(),
        metric: g.clone(),
    };
    frobenius_residual(&[&d, &v], p)
}

/// `x_A + i |(x_B, x_C, x_D)|`, the closed form of the model submersion on `u_im > 0`.
pub fn model_closed_form(x: &[f64]) -> Complex {
    let r = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    Complex::new(x[0], r)
}

/// Jacobian of the incidence map at parameters, for diagnostics.
pub fn incidence_jacobian(s: &SurfacePatch, p: &[f64; 4]) -> Result<DMatrix<f64>> {
    let (_, j) = incidence_with_jacobian(s, p)?;
    Ok(DMatrix::from_column_slice(4, 4, j.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn model() -> SurfacePatch {
        builtin_surface("model-rotational").unwrap().0
    }

    #[test]
    fn pairing_examples() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        assert_eq!(contact_pairing(&[one, zero, zero, zero], &[zero, zero, one, zero]), one);
        assert_eq!(contact_pairing(&[one, zero, zero, zero], &[zero, one, zero, zero]), zero);
        let z = [c(0.3, 1.0), c(-2.0, 0.5), c(0.1, 0.1), c(4.0, -1.0)];
        assert_eq!(contact_pairing(&z, &z), zero);
    }

    #[test]
    fn contact_residuals() {
        let p = params(c(0.3, 0.7), c(-1.2, 0.4));
        assert_eq!(contact_residual(&model(), &p).unwrap().norm(), 0.0);
        let plane = builtin_surface("transverse-plane").unwrap().0;
        assert_eq!(contact_residual(&plane, &p).unwrap(), c(1.0, 0.0));
        let conj = conjugate_surface(&model());
        assert!(contact_residual(&conj, &p).unwrap().norm() < 1e-14);
        assert!(cauchy_riemann_residual(&conj, &p).unwrap() < 1e-14);
        assert!(cauchy_riemann_residual(&model(), &p).unwrap() < 1e-14);
        let bad = SurfacePatch::parse("b", ["1", "conj(v)", "u", "0"], default_parameter_box()).unwrap();
        assert!(cauchy_riemann_residual(&bad, &p).unwrap() > 1.0);
    }

    #[test]
    fn conjugate_of_model() {
        let s = model();
        let w = conjugate_surface(&s);
        let (u, v) = (c(0.3, 0.7), c(-1.2, 0.4));
        let got = w.coords_at(&params(u, v)).unwrap();
        let expect = [-v, c(1.0, 0.0), -u * v, u];
        for k in 0..4 {
            assert!((got[k] - expect[k]).norm() < 1e-14);
        }
        let ww = conjugate_surface(&w);
        let p = params(u, v);
        assert!(ww.point(&p).unwrap().distance(&s.point(&p).unwrap()) < 1e-14);
    }

    #[test]
    fn incidence_examples() {
        let s = model();
        let x = incidence_point(&s, &params(c(0.0, 1.0), c(0.0, 0.0))).unwrap();
        assert_eq!(x, [0.0, 1.0, 0.0, 0.0]);
        let x = incidence_point(&s, &params(c(0.0, 1.0), c(1.0, 0.0))).unwrap();
        for (a, b) in x.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let x = incidence_point(&s, &params(c(0.7, 0.0), c(0.0, 0.0))).unwrap();
        assert_eq!(x, [0.7, 0.0, 0.0, 0.0]);
        let far = SurfacePatch::parse("f", ["0", "0", "1", "u"], default_parameter_box()).unwrap();
        assert!(matches!(
            incidence_point(&far, &[0.0; 4]),
            Err(Error::IncidenceAtInfinity(_))
        ));
    }

    #[test]
    fn jet_incidence_matches_closed_form() {
        // x = (u + |v|^2 conj(u) + 2 i u_im v j) / (1 + |v|^2)
        let s = model();
        let (u, v) = (c(0.3, 0.7), c(-1.2, 0.4));
        let x = incidence_point(&s, &params(u, v)).unwrap();
        let n = 1.0 + v.norm_sqr();
        let first = (u + v.norm_sqr() * u.conj()) / n;
        let second = Complex::i() * 2.0 * u.im * v / n;
        let q = Quaternion::from_complex_pair(first, second).to_array();
        for k in 0..4 {
            assert!((x[k] - q[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn newton_inversion() {
        let s = model();
        let p = invert_incidence(&s, &[0.0, 1.0, 0.0, 0.0], &params(c(0.0, 0.9), c(0.1, 0.0))).unwrap();
        let expect = [0.0, 1.0, 0.0, 0.0];
        for k in 0..4 {
            assert!((p[k] - expect[k]).abs() < 1e-12);
        }
        let r = invert_incidence(&s, &[0.5, 0.0, 0.0, 0.0], &params(c(0.5, 0.0), c(0.2, 0.1)));
        assert!(matches!(r, Err(Error::SingularJacobian(_))));
    }

    #[test]
    fn model_submersion() {
        let (s, seeds) = builtin_surface("model-rotational").unwrap();
        let sub = submersion_from_surface(&s, seeds).unwrap();
        let phi = sub.map();
        for x in [[0.3, -0.5, 0.2, 0.8], [-1.0, -0.4, 0.9, -0.2], [0.1, 0.6, 0.0, 0.0]] {
            let u = phi.complex_values_at(&x).unwrap()[0];
            assert!((u - model_closed_form(&x)).norm() < 1e-10, "{x:?}");
        }
        let slice = sub.slice_map();
        let y = slice.series_at(&[0.2, 0.5, -0.3], 2).unwrap();
        // Im part is the radius: d/dx2 = x2/r
        let r = (0.25f64 + 0.09).sqrt();
        assert!((y[1].grad(1).re - 0.5 / r).abs() < 1e-9);
        assert!((y[1].hess(1, 1).re - (1.0 / r - 0.25 / r.powi(3))).abs() < 1e-8);
        let plane = builtin_surface("transverse-plane").unwrap().0;
        assert!(matches!(
            submersion_from_surface(&plane, vec![]),
            Err(Error::ContactViolation(_))
        ));
    }

    #[test]
    fn skies() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let z = sky(&[0.0, 1.0, 0.0, 0.0], [one, zero]).unwrap();
        assert_eq!(z.z, [one, zero, c(0.0, 1.0), zero]);
        let z = sky(&[0.0; 4], [c(0.3, 0.1), c(-0.2, 1.0)]).unwrap();
        assert_eq!(z.z[2], zero);
        assert!(sky_tangent_pairing(&[0.4, -1.0, 2.0, 0.0], [c(0.3, 0.1), c(-0.2, 1.0)]).unwrap() < 1e-15);
        // off the boundary slice the sky is not a contact curve
        assert!(sky_tangent_pairing(&[0.4, -1.0, 2.0, 0.5], [c(0.3, 0.1), c(-0.2, 1.0)]).unwrap() > 0.1);
    }

    #[test]
    fn isotropic_directions() {
        let flat = crate::geometry::builtin_metric("flat-3").unwrap();
        let lin = MapChart::parse("lin", &["x1", "x2", "x3"], &["x1 + i*x2"], "").unwrap();
        let [dp, dm] = horizontal_isotropic_directions(&lin, &flat, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(dp, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        assert_eq!(dm, vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)]);
        let rad = MapChart::parse("rad", &["x1", "x2", "x3"], &["x1 + i*sqrt(x2^2 + x3^2)"], "").unwrap();
        let [dp, _] = horizontal_isotropic_directions(&rad, &flat, &[0.0, 1.0, 0.0]).unwrap();
        assert!((dp[1] - c(0.0, 1.0)).norm() < 1e-15);
        let p = [0.2, -0.4, 0.7];
        for d in horizontal_isotropic_directions(&rad, &flat, &p).unwrap() {
            assert!(isotropy_residual(&flat, &p, &d).unwrap() < 1e-14);
        }
        for sign in [1, -1] {
            assert!(d_perp_residual(&rad, &flat, sign, &p).unwrap() < 1e-10);
        }
    }
}
