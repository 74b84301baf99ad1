//! Running a configured suite of checks into a report.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::calderbank::{calderbank_metric, compose_extension, pole_check, retract, HSpaceChart};
use crate::chart::coordinate_map;
use crate::config::{CheckKind, CheckSpec, Config, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::exprlang::{eval_value, parse, parse_predicate};
use crate::geometry::{
    builtin_metric, einstein_residual, ConnectionField, scalar_curvature, weyl_split, MetricChart,
};
use crate::maps::{hwc_residual, nijenhuis_residual, tension_field, tension_norm, HermitianField, MapChart};
use crate::report::{CheckReport, CheckResult, Metadata, TOOL_VERSION};
use crate::twistor::{
    builtin_surface, cauchy_riemann_residual, contact_residual, d_perp_residual, incidence_point,
    sky_tangent_pairing, submersion_from_surface, SeedRegion, SurfacePatch, SurfaceSubmersion,
};
use crate::weyl::{builtin_weyl, einstein_weyl_residual, weyl_scalar, WeylStructure};
use crate::algebra::Complex;

/// Command-line overrides applied to every check.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
}

type Built<T> = BTreeMap<String, Result<T>>;

/// The objects a configuration declares. Objects that fail to build are
/// kept as errors and fail only the checks that use them.
pub struct World {
    metrics: Built<MetricChart>,
    hspaces: Built<HSpaceChart>,
    weyls: Built<WeylStructure>,
    surfaces: Built<SurfacePatch>,
    submersions: Built<Arc<SurfaceSubmersion>>,
    maps: Built<MapChart>,
}

fn get<'a, T>(table: &'a Built<T>, name: &Option<String>) -> Result<&'a T> {
    let name = name
        .as_ref()
        .ok_or_else(|| Error::Config("missing reference".into()))?;
    match table.get(name) {
        Some(Ok(v)) => Ok(v),
        Some(Err(e)) => Err(e.clone()),
        None => Err(Error::Config(format!("unknown name `{name}`"))),
    }
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::Config(format!("unknown built-in {kind} `{name}`"))
}

impl World {
    pub fn build(c: &Config) -> World {
        let mut metrics: Built<MetricChart> = BTreeMap::new();
        for (name, m) in c.metric.iter().filter(|(_, m)| m.hspace.is_none()) {
            let built = if let Some(b) = &m.builtin {
                builtin_metric(b).ok_or_else(|| unknown("metric", b))
            } else {
                let comps = m.components.clone().unwrap_or_default();
                let rows: Vec<Vec<&str>> = comps.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
                let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
                let coords: Vec<&str> = m.coords.iter().flatten().map(String::as_str).collect();
                MetricChart::parse(name, &coords, &rows, 1, m.guard.as_deref().unwrap_or(""))
            };
            let built = built.and_then(|g| {
                let g = match m.orientation {
                    Some(o) => g.with_orientation(o),
                    None => g,
                };
                match (&m.guard, &m.builtin) {
                    (Some(s), Some(_)) => {
                        let mut g = g;
                        g.guard.clauses.extend(parse_predicate(s)?.clauses);
                        Ok(g)
                    }
                    _ => Ok(g),
                }
            });
            metrics.insert(name.clone(), built);
        }
        let mut weyls = BTreeMap::new();
        for (name, w) in &c.weyl {
            let built = if let Some(b) = &w.builtin {
                builtin_weyl(b).ok_or_else(|| unknown("Weyl structure", b))
            } else {
                get(&metrics, &w.metric).and_then(|h| match &w.alpha {
                    Some(a) => {
                        let a: Vec<&str> = a.iter().map(String::as_str).collect();
                        WeylStructure::with_alpha_exprs(name, h.clone(), &a)
                    }
                    None => WeylStructure::metric_only(name, h.clone()),
                })
            };
            weyls.insert(name.clone(), built);
        }
        let mut hspaces = BTreeMap::new();
        for (name, m) in c.metric.iter().filter(|(_, m)| m.hspace.is_some()) {
            let built = get(&weyls, &m.hspace).and_then(|w| {
                let hs = calderbank_metric(w, m.base.as_ref().expect("validated"))?;
                Ok(match m.orientation {
                    Some(o) => HSpaceChart {
                        g: hs.g.with_orientation(o),
                        ..hs
                    },
                    None => hs,
                })
            });
            metrics.insert(name.clone(), built.as_ref().map(|h| h.g.clone()).map_err(Clone::clone));
            hspaces.insert(name.clone(), built);
        }
        let mut surfaces = BTreeMap::new();
        let mut submersions = BTreeMap::new();
        for (name, s) in &c.surface {
            let built: Result<(SurfacePatch, Vec<SeedRegion>)> = if let Some(b) = &s.builtin {
                builtin_surface(b).ok_or_else(|| unknown("surface", b)).and_then(|(p, seeds)| {
                    let p = match &s.domain {
                        Some(d) => p.with_domain(d.clone())?,
                        None => p,
                    };
                    Ok((p, seeds))
                })
            } else {
                let z: Vec<&str> = s.z.iter().flatten().map(String::as_str).collect();
                if z.len() != 4 {
                    Err(Error::Config(format!("surface `{name}` needs four coordinates")))
                } else {
                    SurfacePatch::parse(name, [z[0], z[1], z[2], z[3]], s.domain.clone().expect("validated"))
                        .map(|p| (p, vec![]))
                }
            };
            let built = built.map(|(p, seeds)| (p, s.seeds.clone().unwrap_or(seeds)));
            let sub = match &built {
                Ok((p, seeds)) if !seeds.is_empty() => submersion_from_surface(p, seeds.clone()),
                Ok(_) => Err(Error::Config(format!("surface `{name}` has no seed regions"))),
                Err(e) => Err(e.clone()),
            };
            surfaces.insert(name.clone(), built.map(|(p, _)| p));
            submersions.insert(name.clone(), sub);
        }
        let mut maps: Built<MapChart> = BTreeMap::new();
        // explicit and surface maps first; retracts may compose with them
        for (name, m) in &c.map {
            let built = if let Some(comps) = &m.components {
                let coords: Vec<&str> = m.coords.iter().flatten().map(String::as_str).collect();
                let comps: Vec<&str> = comps.iter().map(String::as_str).collect();
                MapChart::parse(name, &coords, &comps, m.guard.as_deref().unwrap_or(""))
            } else if m.surface.is_some() {
                get(&submersions, &m.surface).map(|s| if m.slice { s.slice_map() } else { s.map() })
            } else {
                continue;
            };
            maps.insert(name.clone(), built);
        }
        for (name, m) in c.map.iter().filter(|(_, m)| m.retract.is_some()) {
            let built = get(&hspaces, &m.retract).and_then(|h| match &m.compose {
                Some(_) => compose_extension(get(&maps, &m.compose)?, h),
                None => Ok(retract(h)),
            });
            maps.insert(name.clone(), built);
        }
        World {
            metrics,
            hspaces,
            weyls,
            surfaces,
            submersions,
            maps,
        }
    }
}

impl World {
    pub fn weyl(&self, name: &str) -> Result<WeylStructure> {
        get(&self.weyls, &Some(name.to_string())).cloned()
    }
}

fn sample_residuals<F>(points: Vec<Vec<f64>>, f: F) -> Vec<(Vec<f64>, Result<f64>)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    points
        .into_par_iter()
        .map(|p| {
            let r = f(&p);
            (p, r)
        })
        .collect()
}

fn target<'a>(w: &'a World, c: &CheckSpec) -> Result<(&'a dyn ConnectionField, &'a MetricChart)> {
    if c.target.is_some() {
        let g = get(&w.metrics, &c.target)?;
        Ok((g, g))
    } else {
        let weyl = get(&w.weyls, &c.target_weyl)?;
        Ok((weyl, &weyl.h))
    }
}

fn expected_expr(c: &CheckSpec) -> Result<crate::exprlang::Expr> {
    parse(c.expected_expr.as_deref().unwrap_or(""))
}

fn as4(p: &[f64]) -> [f64; 4] {
    [p[0], p[1], p[2], p[3]]
}

fn residuals(w: &World, c: &CheckSpec, points: Vec<Vec<f64>>) -> Result<Vec<(Vec<f64>, Result<f64>)>> {
    use CheckKind::*;
    let expected = c.expected.unwrap_or(0.0);
    Ok(match c.kind {
        ScalarCurvature => {
            let g = get(&w.metrics, &c.metric)?;
            sample_residuals(points, |p| Ok((scalar_curvature(g, p)? - expected).abs()))
        }
        Einstein => {
            let g = get(&w.metrics, &c.metric)?;
            sample_residuals(points, |p| einstein_residual(g, p))
        }
        WeylNorm => {
            let g = get(&w.metrics, &c.metric)?;
            sample_residuals(points, |p| Ok(weyl_split(g, p)?.total))
        }
        AntiSelfDual => {
            let g = get(&w.metrics, &c.metric)?;
            sample_residuals(points, |p| {
                let n = weyl_split(g, p)?;
                Ok(n.self_dual.min(n.anti_self_dual))
            })
        }
        WeylScalar => {
            let weyl = get(&w.weyls, &c.weyl)?;
            sample_residuals(points, |p| Ok((weyl_scalar(weyl, p)? - expected).abs()))
        }
        EinsteinWeyl => {
            let weyl = get(&w.weyls, &c.weyl)?;
            sample_residuals(points, |p| einstein_weyl_residual(weyl, p))
        }
        Contact => {
            let s = get(&w.surfaces, &c.surface)?;
            sample_residuals(points, |p| Ok(contact_residual(s, &as4(p))?.norm()))
        }
        Holomorphic => {
            let s = get(&w.surfaces, &c.surface)?;
            sample_residuals(points, |p| cauchy_riemann_residual(s, &as4(p)))
        }
        IncidenceRoundtrip => {
            let sub = get(&w.submersions, &c.surface)?;
            sample_residuals(points, |p| {
                let x = incidence_point(&sub.surface, &as4(p))?;
                let back = incidence_point(&sub.surface, &sub.solve(&x)?)?;
                Ok(x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            })
        }
        SubmersionMatch => {
            let f = get(&w.maps, &c.map)?;
            let e = expected_expr(c)?;
            sample_residuals(points, |p| {
                let want = eval_value(&e, &coordinate_map(&f.coords, p))?;
                Ok((f.complex_values_at(p)?[0] - want).norm())
            })
        }
        HarmonicMorphism | Tension | Hwc | Dilation => {
            let f = get(&w.maps, &c.map)?;
            let g = get(&w.metrics, &c.metric)?;
            let (conn, gn) = target(w, c)?;
            let e = if c.kind == Dilation { Some(expected_expr(c)?) } else { None };
            let kind = c.kind;
            sample_residuals(points, |p| {
                let tension = || -> Result<f64> { tension_norm(f, gn, p, &tension_field(f, g, conn, p)?) };
                match kind {
                    Tension => tension(),
                    Hwc => Ok(hwc_residual(f, g, gn, p)?.residual),
                    Dilation => {
                        let want = eval_value(e.as_ref().expect("parsed"), &coordinate_map(&f.coords, p))?;
                        Ok((hwc_residual(f, g, gn, p)?.lambda - want.re).abs())
                    }
                    _ => Ok(tension()?.max(hwc_residual(f, g, gn, p)?.residual)),
                }
            })
        }
        Nijenhuis | Twistorial => {
            let f = get(&w.maps, &c.map)?;
            let g = get(&w.metrics, &c.metric)?;
            let field = |orientation: i8| HermitianField {
                map: f.clone(),
                metric: g.clone(),
                orientation,
            };
            let orientation = c.orientation;
            sample_residuals(points, |p| {
                f.check_domain(p)?;
                g.check_domain(p)?;
                match orientation {
                    Some(o) if c.kind == Nijenhuis => nijenhuis_residual(&field(o), p),
                    _ => Ok(nijenhuis_residual(&field(1), p)?.min(nijenhuis_residual(&field(-1), p)?)),
                }
            })
        }
        FrobeniusIsotropic => {
            let f = get(&w.maps, &c.map)?;
            let g = get(&w.metrics, &c.metric)?;
            sample_residuals(points, |p| Ok(d_perp_residual(f, g, 1, p)?.max(d_perp_residual(f, g, -1, p)?)))
        }
        Skies => sample_residuals(points, |p| {
            let x = [p[0], p[1], p[2], 0.0];
            sky_tangent_pairing(&x, [Complex::new(p[3], p[4]), Complex::new(p[5], p[6])])
        }),
        Pole => {
            let h = get(&w.hspaces, &c.metric)?;
            sample_residuals(points, |p| pole_check(h, p))
        }
    })
}

fn run_check(w: &World, config: &Config, c: &CheckSpec, seed: u64, o: Overrides) -> CheckResult {
    let tol = o.tolerance.unwrap_or(c.tolerance);
    let count = o.samples.or(c.samples).or(config.samples).unwrap_or(DEFAULT_SAMPLES);
    let points = c.domain.sample(count, seed);
    match residuals(w, c, points) {
        Ok(r) => CheckResult::from_samples(&c.name, tol, r),
        Err(e) => CheckResult::failed(&c.name, tol, &e),
    }
}

/// Runs every check of a validated configuration. The seed defaults to the
/// configuration's own, then to 0.
pub fn run_suite(config: &Config, seed: Option<u64>, overrides: Overrides) -> Result<CheckReport> {
    config.validate()?;
    let seed = seed.or(config.seed).unwrap_or(0);
    let world = World::build(config);
    let checks: Vec<CheckResult> = config
        .check
        .par_iter()
        .map(|c| run_check(&world, config, c, seed, overrides))
        .collect();
    Ok(CheckReport::new(
        checks,
        Metadata {
            seed,
            config_digest: config.digest(),
            tool_version: TOOL_VERSION.to_string(),
        },
    ))
}

pub const BUILTIN_SUITES: &[&str] = &["hspace-flat"];

const HSPACE_FLAT: &str = r#"
samples = 50

[metric.hyp4]
builtin = "hyperbolic-4"

[metric.flat3]
builtin = "flat-3"

[metric.flat2]
builtin = "flat-2"

[weyl.flat]
builtin = "flat-euclidean"

[weyl.round]
builtin = "round-s3"

[metric.hflat]
hspace = "flat"
base = { lo = [-1, -1, -1], hi = [1, 1, 1] }

[metric.hround]
hspace = "round"
base = { lo = [-1, -1, -1], hi = [1, 1, 1] }

[surface.model]
builtin = "model-rotational"

[map.phi]
surface = "model"

[map.phi0]
surface = "model"
slice = true

[map.psi]
retract = "hflat"

[map.psi-round]
retract = "hround"

[map.lin]
coords = ["x1", "x2", "x3"]
components = ["x1 + i*x2"]

[map.lin-ext]
retract = "hflat"
compose = "lin"

[[check]]
name = "hflat-scalar"
kind = "scalar-curvature"
metric = "hflat"
expected = -12.0
tolerance = 1e-6
domain = { lo = [0.1, -1, -1, -1], hi = [1, 1, 1, 1] }

[[check]]
name = "hflat-einstein"
kind = "einstein"
metric = "hflat"
tolerance = 1e-6
domain = { lo = [0.1, -1, -1, -1], hi = [1, 1, 1, 1] }

[[check]]
name = "hflat-weyl"
kind = "weyl-norm"
metric = "hflat"
tolerance = 1e-6
domain = { lo = [0.1, -1, -1, -1], hi = [1, 1, 1, 1] }

[[check]]
name = "hround-einstein"
kind = "einstein"
metric = "hround"
tolerance = 1e-6
domain = { lo = [0.1, -1, -1, -1], hi = [0.9, 1, 1, 1] }

[[check]]
name = "hround-half-flat"
kind = "anti-self-dual"
metric = "hround"
tolerance = 1e-6
domain = { lo = [0.1, -1, -1, -1], hi = [0.9, 1, 1, 1] }

[[check]]
name = "round-einstein-weyl"
kind = "einstein-weyl"
weyl = "round"
tolerance = 1e-8
domain = { lo = [-1, -1, -1], hi = [1, 1, 1] }

[[check]]
name = "round-scalar"
kind = "weyl-scalar"
weyl = "round"
expected = 6.0
tolerance = 1e-8
domain = { lo = [-1, -1, -1], hi = [1, 1, 1] }

[[check]]
name = "hflat-pole"
kind = "pole"
metric = "hflat"
tolerance = 1e-6
domain = { lo = [-1, -1, -1], hi = [1, 1, 1] }

[[check]]
name = "hround-pole"
kind = "pole"
metric = "hround"
tolerance = 1e-6
domain = { lo = [-1, -1, -1], hi = [1, 1, 1] }

[[check]]
name = "model-contact"
kind = "contact"
surface = "model"
tolerance = 1e-10
domain = { lo = [-2, 0.1, -2, -2], hi = [2, 2, 2, 2] }

[[check]]
name = "model-holomorphic"
kind = "holomorphic"
surface = "model"
tolerance = 1e-10
domain = { lo = [-2, 0.1, -2, -2], hi = [2, 2, 2, 2] }

[[check]]
name = "model-roundtrip"
kind = "incidence-roundtrip"
surface = "model"
tolerance = 1e-9
domain = { lo = [-1, 0.2, -1, -1], hi = [1, 1.5, 1, 1] }

[[check]]
name = "phi-closed-form"
kind = "submersion-match"
map = "phi"
expected_expr = "x1 + i*sqrt(x2^2 + x3^2 + x4^2)"
tolerance = 1e-8
domain = { lo = [-1, -1, -1, 0.1], hi = [1, 1, 1, 1] }

[[check]]
name = "phi-tension"
kind = "tension"
map = "phi"
metric = "hyp4"
target = "flat2"
tolerance = 1e-6
domain = { lo = [-1, -1, -1, 0.1], hi = [1, 1, 1, 1] }

[[check]]
name = "phi-hwc"
kind = "hwc"
map = "phi"
metric = "hyp4"
target = "flat2"
tolerance = 1e-8
domain = { lo = [-1, -1, -1, 0.1], hi = [1, 1, 1, 1] }

[[check]]
name = "phi-twistorial"
kind = "twistorial"
map = "phi"
metric = "hyp4"
tolerance = 1e-6
domain = { lo = [-1, -1, -1, 0.1], hi = [1, 1, 1, 1] }

[[check]]
name = "phi-slice-hwc"
kind = "hwc"
map = "phi0"
metric = "flat3"
target = "flat2"
tolerance = 1e-8
domain = { lo = [-1, -1, 0.1], hi = [1, 1, 1] }

[[check]]
name = "phi-slice-frobenius"
kind = "frobenius-isotropic"
map = "phi0"
metric = "flat3"
tolerance = 1e-6
domain = { lo = [-1, -1, 0.1], hi = [1, 1, 1] }

[[check]]
name = "skies"
kind = "skies"
tolerance = 1e-10
domain = { lo = [-1, -1, -1, -1, -1, -1, -1], hi = [1, 1, 1, 1, 1, 1, 1] }

[[check]]
name = "psi-harmonic-morphism"
kind = "harmonic-morphism"
map = "psi"
metric = "hflat"
target_weyl = "flat"
tolerance = 1e-8
domain = { lo = [0.1, -1, -1, -1], hi = [1, 1, 1, 1] }

[[check]]
name = "psi-dilation"
kind = "dilation"
map = "psi"
metric = "hflat"
target_weyl = "flat"
expected_expr = "t^2"
tolerance = 1e-8
domain = { lo = [0.1, -1, -1, -1], hi = [1, 1, 1, 1] }

[[check]]
name = "psi-round-harmonic-morphism"
kind = "harmonic-morphism"
map = "psi-round"
metric = "hround"
target_weyl = "round"
tolerance = 1e-6
domain = { lo = [0.1, -1, -1, -1], hi = [0.9, 1, 1, 1] }

[[check]]
name = "lin-extension"
kind = "harmonic-morphism"
map = "lin-ext"
metric = "hflat"
target = "flat2"
tolerance = 1e-8
domain = { lo = [0.1, -1, -1, -1], hi = [1, 1, 1, 1] }
"#;

pub fn builtin_suite(name: &str) -> Option<Config> {
    match name {
        "hspace-flat" => Some(Config::from_toml(HSPACE_FLAT).expect("built-in suite is valid")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_contact_surface_fails_with_unit_residual() {
        let c = Config::from_toml(
            r#"
[surface.plane]
z = ["1", "u", "v", "0"]
domain = { lo = [-1, -1, -1, -1], hi = [1, 1, 1, 1] }

[[check]]
name = "plane-contact"
kind = "contact"
surface = "plane"
tolerance = 1e-10
domain = { lo = [-1, -1, -1, -1], hi = [1, 1, 1, 1] }
samples = 20
"#,
        )
        .unwrap();
        let r = run_suite(&c, Some(1), Overrides::default()).unwrap();
        let check = r.get("plane-contact").unwrap();
        assert!(!check.pass);
        assert_eq!(check.max_residual, 1.0);
        assert_eq!(check.sample_count, 20);
    }

    #[test]
    fn broken_objects_fail_only_their_checks() {
        let c = Config::from_toml(
            r#"
[surface.plane]
z = ["1", "u", "v", "0"]
domain = { lo = [-1, -1, -1, -1], hi = [1, 1, 1, 1] }
seeds = [{ region = { lo = [-1, -1, -1, -1], hi = [1, 1, 1, 1] }, guess = [0, 1, 0, 0] }]

[map.f]
surface = "plane"

[[check]]
name = "a"
kind = "submersion-match"
map = "f"
expected_expr = "x1"
tolerance = 1e-8
domain = { lo = [0, 0, 0, 0], hi = [1, 1, 1, 1] }

[[check]]
name = "b"
kind = "skies"
tolerance = 1e-10
domain = { lo = [-1, -1, -1, -1, -1, -1, -1], hi = [1, 1, 1, 1, 1, 1, 1] }
samples = 5
"#,
        )
        .unwrap();
        let r = run_suite(&c, None, Overrides::default()).unwrap();
        assert_eq!(r.get("a").unwrap().errors[0].kind, "ContactViolation");
        assert!(r.get("b").unwrap().pass);
    }

    #[test]
    fn overrides_apply() {
        let c = builtin_suite("hspace-flat").unwrap();
        let mut small = c.clone();
        small.check.retain(|c| c.name == "skies");
        let r = run_suite(&small, Some(9), Overrides { samples: Some(7), tolerance: Some(0.5) }).unwrap();
        assert_eq!(r.checks[0].sample_count, 7);
        assert_eq!(r.checks[0].tolerance, 0.5);
        assert_eq!(r.metadata.seed, 9);
    }
}
