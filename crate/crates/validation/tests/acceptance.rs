//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use hspace::algebra::{Complex, Quaternion};
use hspace::autodiff::{fd_derivatives, DEFAULT_STEP};
use hspace::calderbank::{calderbank_metric, compose_extension, pole_check, retract, retract_verdict, HSpaceChart};
use hspace::chart::{ChartFn, ExprFn};
use hspace::geometry::{builtin_metric, default_coords, einstein_residual, scalar_curvature, weyl_split};
use hspace::maps::{
    harmonic_morphism_verdict, hwc_residual, nijenhuis_residual, HermitianField, MapChart,
};
use hspace::report::CheckResult;
use hspace::sampling::DomainBox;
use hspace::suite::{builtin_suite, run_suite, Overrides};
use hspace::twistor::{
    builtin_surface, contact_residual, d_perp_residual, incidence_point, params, sky_tangent_pairing,
    submersion_from_surface, SurfacePatch, SurfaceSubmersion,
};
use hspace::weyl::builtin_weyl;
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::sync::Arc;

fn verdict(id: &str, title: &str, pass: bool, detail: String) {
    // straight to the process stdout so the line shows without --nocapture
    let line = format!("criterion {id:<3} {}  {title}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn max_of<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn boxed(lo: &[f64], hi: &[f64]) -> DomainBox {
    DomainBox::new(lo.to_vec(), hi.to_vec()).unwrap()
}

fn hspace(name: &str) -> HSpaceChart {
    calderbank_metric(&builtin_weyl(name).unwrap(), &boxed(&[-1.0; 3], &[1.0; 3])).unwrap()
}

fn model() -> (SurfacePatch, Arc<SurfaceSubmersion>) {
    let (s, seeds) = builtin_surface("model-rotational").unwrap();
    let sub = submersion_from_surface(&s, seeds).unwrap();
    (s, sub)
}

/// Points of `{0.1 < t < 1, |x| < 1}`.
fn half_ball_samples(count: usize) -> Vec<Vec<f64>> {
    boxed(&[0.1, -1.0, -1.0, -1.0], &[1.0, 1.0, 1.0, 1.0])
        .sample(4 * count, 0)
        .into_iter()
        .filter(|p| p[0] < 1.0 && p[1..].iter().map(|v| v * v).sum::<f64>() < 1.0)
        .take(count)
        .collect()
}

fn upper_half_space_samples(count: usize) -> Vec<Vec<f64>> {
    boxed(&[-1.0, -1.0, -1.0, 0.1], &[1.0, 1.0, 1.0, 1.0]).sample(count, 0)
}

/// Points with `t > 0.1`, kept away from the axis `x2 = x3 = 0`.
fn retract_samples(count: usize) -> Vec<Vec<f64>> {
    boxed(&[0.1, -1.0, -1.0, -1.0], &[1.0, 1.0, 1.0, 1.0])
        .sample(2 * count, 0)
        .into_iter()
        .filter(|p| p[2] * p[2] + p[3] * p[3] > 0.01)
        .take(count)
        .collect()
}

#[test]
fn criterion_01_hspace_over_flat_space_is_hyperbolic() {
    let h = hspace("flat-euclidean");
    let samples = half_ball_samples(100);
    assert_eq!(samples.len(), 100);
    let s = max_of(samples.iter().map(|p| (scalar_curvature(&h.g, p).unwrap() + 12.0).abs()));
    let e = max_of(samples.iter().map(|p| einstein_residual(&h.g, p).unwrap()));
    let w = max_of(samples.iter().map(|p| weyl_split(&h.g, p).unwrap().total));
    verdict(
        "1",
        "flat base gives constant curvature",
        s < 1e-6 && e < 1e-6 && w < 1e-6,
        format!("|s+12| {s:.2e}, einstein {e:.2e}, |W| {w:.2e}"),
    );
}

#[test]
fn criterion_02_contact_condition() {
    let (s, _) = model();
    let dom = boxed(&[-2.0, 0.1, -3.0, -3.0], &[2.0, 2.0, 3.0, 3.0]);
    let r = max_of(dom.sample(500, 0).iter().map(|p| {
        contact_residual(&s, &[p[0], p[1], p[2], p[3]]).unwrap().norm()
    }));
    let plane = SurfacePatch::parse("plane", ["1", "u", "v", "0"], dom.clone()).unwrap();
    let check = CheckResult::from_samples(
        "plane-contact",
        1e-10,
        dom.sample(500, 0).into_iter().map(|p| {
            let r = contact_residual(&plane, &[p[0], p[1], p[2], p[3]]).map(|c| c.norm());
            (p, r)
        }),
    );
    let constant = dom
        .sample(50, 3)
        .iter()
        .all(|p| contact_residual(&plane, &[p[0], p[1], p[2], p[3]]).unwrap() == Complex::new(1.0, 0.0));
    verdict(
        "2",
        "contact surfaces",
        r < 1e-10 && !check.pass && check.max_residual == 1.0 && constant,
        format!("model max {r:.2e}; plane max {} pass={}", check.max_residual, check.pass),
    );
}

#[test]
fn criterion_03_incidence_pipeline() {
    let (s, sub) = model();
    let params_box = boxed(&[-1.0, 0.2, -1.5, -1.5], &[1.0, 1.5, 1.5, 1.5]);
    let round_trip = max_of(params_box.sample(200, 0).iter().map(|p| {
        let x = incidence_point(&s, &[p[0], p[1], p[2], p[3]]).unwrap();
        let back = incidence_point(&s, &sub.solve(&x).unwrap()).unwrap();
        x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }));
    // away from the axis x_B = x_C = x_D = 0, on both sides of every coordinate plane
    let phi = sub.map();
    let pts: Vec<Vec<f64>> = boxed(&[-1.0; 4], &[1.0; 4])
        .sample(300, 0)
        .into_iter()
        .filter(|x| x[1..].iter().map(|v| v * v).sum::<f64>() > 0.01)
        .take(200)
        .collect();
    let closed = max_of(pts.iter().map(|x| {
        let r = (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
        (phi.complex_values_at(x).unwrap()[0] - Complex::new(x[0], r)).norm()
    }));
    verdict(
        "3",
        "incidence round trip and closed form",
        round_trip < 1e-9 && closed < 1e-8,
        format!("round trip {round_trip:.2e}, closed form {closed:.2e}"),
    );
}

#[test]
fn criterion_04_harmonic_morphism_and_boundary() {
    let (_, sub) = model();
    let phi = sub.map();
    let hyp = builtin_metric("hyperbolic-4").unwrap();
    let flat2 = builtin_metric("flat-2").unwrap();
    let flat3 = builtin_metric("flat-3").unwrap();
    let samples = upper_half_space_samples(100);
    let r = harmonic_morphism_verdict("phi", &phi, &hyp, &flat2, &flat2, &samples, 1e-6);
    let tension = r.get("phi/tension").unwrap();
    let hwc = r.get("phi/hwc").unwrap();
    let slice = sub.slice_map();
    let slice_pts = boxed(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0])
        .sample(200, 0)
        .into_iter()
        .filter(|x| x[1] * x[1] + x[2] * x[2] > 0.01)
        .take(100);
    let boundary = max_of(slice_pts.map(|x| hwc_residual(&slice, &flat3, &flat2, &x).unwrap().residual));
    verdict(
        "4",
        "twistorial map is a harmonic morphism, boundary horizontally conformal",
        tension.pass && hwc.max_residual < 1e-8 && hwc.errors.is_empty() && boundary < 1e-8,
        format!(
            "|tau| {:.2e}, hwc {:.2e}, boundary hwc {boundary:.2e}",
            tension.max_residual, hwc.max_residual
        ),
    );
}

#[test]
fn criterion_05_unique_integrable_orientation() {
    let (_, sub) = model();
    let phi = sub.map();
    let hyp = builtin_metric("hyperbolic-4").unwrap();
    let field = |o| HermitianField {
        map: phi.clone(),
        metric: hyp.clone(),
        orientation: o,
    };
    let (plus, minus) = (field(1), field(-1));
    let mut exactly_one = true;
    let (mut max_plus, mut max_minus) = (0.0_f64, 0.0_f64);
    for p in upper_half_space_samples(50) {
        let np = nijenhuis_residual(&plus, &p).unwrap();
        let nm = nijenhuis_residual(&minus, &p).unwrap();
        exactly_one &= (np < 1e-6) != (nm < 1e-6);
        max_plus = max_plus.max(np);
        max_minus = max_minus.max(nm);
    }
    verdict(
        "5",
        "exactly one orientation integrable",
        exactly_one,
        format!("max |N| for J+ {max_plus:.2e}, for J- {max_minus:.2e}"),
    );
}

#[test]
fn criterion_06a_retract_is_a_harmonic_morphism() {
    let h = hspace("flat-euclidean");
    let samples = retract_samples(100);
    let r = retract_verdict(&h, &samples, 1e-8);
    let psi = retract(&h);
    let dilation = max_of(
        samples
            .iter()
            .map(|p| (hwc_residual(&psi, &h.g, &h.base.h, p).unwrap().lambda - p[0] * p[0]).abs()),
    );
    let lin = MapChart::parse("lin", &["x1", "x2", "x3"], &["x1 + i*x2"], "").unwrap();
    let ext = compose_extension(&lin, &h).unwrap();
    let flat2 = builtin_metric("flat-2").unwrap();
    let e = harmonic_morphism_verdict("lin", &ext, &h.g, &flat2, &flat2, &samples, 1e-8);
    verdict(
        "6a",
        "retract and x1 + i x2 extension",
        r.pass() && dilation < 1e-8 && e.pass(),
        format!(
            "retract |tau| {:.2e} hwc {:.2e}, |Lambda - t^2| {dilation:.2e}, extension |tau| {:.2e}",
            r.checks[1].max_residual, r.checks[0].max_residual, e.checks[1].max_residual
        ),
    );
}

#[test]
fn criterion_06b_radial_extension() {
    let h = hspace("flat-euclidean");
    let samples = retract_samples(100);
    let f = MapChart::parse("rad", &["x1", "x2", "x3"], &["x1 + i*sqrt(x2^2 + x3^2)"], "").unwrap();
    let ext = compose_extension(&f, &h).unwrap();
    let flat2 = builtin_metric("flat-2").unwrap();
    let e = harmonic_morphism_verdict("rad", &ext, &h.g, &flat2, &flat2, &samples, 1e-8);
    verdict(
        "6b",
        "x1 + i|(x2, x3)| extension",
        e.pass(),
        format!(
            "|tau| {:.2e}, hwc {:.2e}",
            e.get("rad/tension").unwrap().max_residual,
            e.get("rad/hwc").unwrap().max_residual
        ),
    );
}

#[test]
fn criterion_07_isotropic_distributions_integrable() {
    let (_, sub) = model();
    let slice = sub.slice_map();
    let flat3 = builtin_metric("flat-3").unwrap();
    let pts: Vec<Vec<f64>> = boxed(&[-1.0; 3], &[1.0; 3])
        .sample(200, 0)
        .into_iter()
        .filter(|x| x[1] * x[1] + x[2] * x[2] > 0.01)
        .take(100)
        .collect();
    assert_eq!(pts.len(), 100);
    let r = max_of(pts.iter().flat_map(|p| {
        [1, -1].map(|s| d_perp_residual(&slice, &flat3, s, p).unwrap())
    }));
    verdict("7", "d-perp is integrable for both signs", r < 1e-6, format!("max {r:.2e}"));
}

#[test]
fn criterion_08_pole_of_order_two() {
    let pts = boxed(&[-1.0; 3], &[1.0; 3]).sample(100, 0);
    let (hf, hr) = (hspace("flat-euclidean"), hspace("round-s3"));
    let flat = max_of(pts.iter().map(|x| pole_check(&hf, x).unwrap()));
    let round = max_of(pts.iter().map(|x| pole_check(&hr, x).unwrap()));
    verdict(
        "8",
        "t^2 g extends to t = 0",
        flat < 1e-6 && round < 1e-6,
        format!("flat {flat:.2e}, round {round:.2e}"),
    );
}

#[test]
fn criterion_09_skies_are_contact_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        // points of the boundary slice x_D = 0
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0];
        let s = [
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ];
        worst = worst.max(sky_tangent_pairing(&x, s).unwrap());
    }
    verdict("9", "sky tangents pair to zero", worst < 1e-10, format!("max {worst:.2e}"));
}

fn left_matrix(q: Quaternion) -> Matrix4<f64> {
    let [a, b, c, d] = q.to_array();
    Matrix4::new(a, -b, -c, -d, b, a, -d, c, c, d, a, -b, d, -c, b, a)
}

fn random_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::from_array(std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
}

#[test]
fn criterion_10_infrastructure() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);

    let mut grad_err = 0.0_f64;
    let mut hess_err = 0.0_f64;
    for _ in 0..500 {
        let e = common::random_expr(&mut rng, 4);
        let f = ExprFn::real_coords(&default_coords(3), vec![e]).unwrap();
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let jet = f.series_at(&p, 2).unwrap().remove(0);
        let (g, h) = fd_derivatives(|q| Ok(f.values_at(q)?[0]), &p, DEFAULT_STEP).unwrap();
        for i in 0..3 {
            let a = jet.grad(i);
            grad_err = grad_err.max((a - g[i]).norm() / a.norm().max(1.0));
            for j in 0..3 {
                let a = jet.hess(i, j);
                hess_err = hess_err.max((a - h[i][j]).norm() / a.norm().max(1.0));
            }
        }
    }

    let mut quat_err = 0.0_f64;
    for _ in 0..500 {
        let (p, q, r) = (random_quaternion(&mut rng), random_quaternion(&mut rng), random_quaternion(&mut rng));
        let diff = |a: Quaternion, b: Quaternion| (a - b).norm();
        quat_err = quat_err
            .max(diff((p * q) * r, p * (q * r)))
            .max(((p * q).norm() - p.norm() * q.norm()).abs())
            .max(diff((p * q).conj(), q.conj() * p.conj()))
            .max(diff(p * p.inv().unwrap(), Quaternion::from_array([1.0, 0.0, 0.0, 0.0])))
            .max((left_matrix(p) * left_matrix(q) - left_matrix(p * q)).norm());
    }
    let units = [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]].map(Quaternion::from_array);
    let (i, j, k) = (units[0], units[1], units[2]);
    let minus_one = Quaternion::from_array([-1.0, 0.0, 0.0, 0.0]);
    let table = i * i == minus_one && j * j == minus_one && k * k == minus_one && i * j * k == minus_one && i * j == k;

    let suite = builtin_suite("hspace-flat").unwrap();
    let overrides = Overrides {
        samples: Some(10),
        tolerance: None,
    };
    let a = run_suite(&suite, Some(42), overrides).unwrap().to_canonical_json().unwrap();
    let b = run_suite(&suite, Some(42), overrides).unwrap().to_canonical_json().unwrap();
    let c = run_suite(&suite, Some(43), overrides).unwrap().to_canonical_json().unwrap();

    verdict(
        "10",
        "AD against FD, quaternion laws, reproducible reports",
        grad_err < 1e-6 && hess_err < 1e-4 && quat_err < 1e-12 && table && a == b && a != c,
        format!(
            "grad {grad_err:.2e}, hess {hess_err:.2e}, quaternion {quat_err:.2e}, identical reports {}",
            a == b
        ),
    );
}

#[test]
fn incidence_parameters_are_exact_at_anchors() {
    let (s, _) = model();
    let x = incidence_point(&s, &params(Complex::new(0.0, 1.0), Complex::new(0.0, 0.0))).unwrap();
    assert_eq!(x, [0.0, 1.0, 0.0, 0.0]);
}
