//! Suite configuration documents (TOML).
//!
//! ```toml
//! seed = 42
//! samples = 100
//!
//! [metric.hyp]
//! builtin = "hyperbolic-4"
//!
//! [map.phi]
//! coords = ["x1", "x2", "x3"]
//! components = ["x1 + i*x2"]
//!
//! [[check]]
//! name = "hyp-einstein"
//! kind = "einstein"
//! metric = "hyp"
//! tolerance = 1e-6
//! domain = { lo = [-1, -1, -1, 0.1], hi = [1, 1, 1, 1] }
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampling::DomainBox;
use crate::twistor::SeedRegion;

pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default)]
    pub metric: BTreeMap<String, MetricSpec>,
    #[serde(default)]
    pub weyl: BTreeMap<String, WeylSpec>,
    #[serde(default)]
    pub surface: BTreeMap<String, SurfaceSpec>,
    #[serde(default)]
    pub map: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub check: Vec<CheckSpec>,
}

/// A metric is a built-in, explicit components, or the H-space over a Weyl structure.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub builtin: Option<String>,
    pub coords: Option<Vec<String>>,
    pub components: Option<Vec<Vec<String>>>,
    pub orientation: Option<i8>,
    pub guard: Option<String>,
    /// Weyl structure whose H-space metric this is.
    pub hspace: Option<String>,
    /// Base box used to bound the interval of an H-space.
    pub base: Option<DomainBox>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylSpec {
    pub builtin: Option<String>,
    pub metric: Option<String>,
    pub alpha: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub builtin: Option<String>,
    /// Homogeneous coordinates in the complex parameters `u`, `v`.
    pub z: Option<Vec<String>>,
    /// Box over `(u_re, u_im, v_re, v_im)`.
    pub domain: Option<DomainBox>,
    pub seeds: Option<Vec<SeedRegion>>,
}

/// A map is explicit components, the submersion of a surface (or its
/// restriction to `x4 = 0`), or the retract of an H-space optionally
/// followed by another map.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub coords: Option<Vec<String>>,
    pub components: Option<Vec<String>>,
    pub guard: Option<String>,
    pub surface: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub slice: bool,
    /// H-space metric to retract.
    pub retract: Option<String>,
    /// Map applied after the retract.
    pub compose: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    ScalarCurvature,
    Einstein,
    WeylNorm,
    AntiSelfDual,
    WeylScalar,
    EinsteinWeyl,
    Contact,
    Holomorphic,
    IncidenceRoundtrip,
    SubmersionMatch,
    HarmonicMorphism,
    Hwc,
    Tension,
    Dilation,
    Nijenhuis,
    Twistorial,
    FrobeniusIsotropic,
    Skies,
    Pole,
}

impl CheckKind {
    fn domain_dim(self) -> Option<usize> {
        match self {
            CheckKind::Contact | CheckKind::Holomorphic | CheckKind::IncidenceRoundtrip => Some(4),
            CheckKind::Skies => Some(7),
            CheckKind::Pole => Some(3),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    pub kind: CheckKind,
    pub tolerance: f64,
    /// Sample box. Skies use `(x_A, x_B, x_C, σ_re, σ_im, τ_re, τ_im)` with `x_D = 0`.
    pub domain: DomainBox,
    pub samples: Option<usize>,
    pub metric: Option<String>,
    pub weyl: Option<String>,
    pub surface: Option<String>,
    pub map: Option<String>,
    /// Target metric for map checks.
    pub target: Option<String>,
    /// Target Weyl structure; its connection and metric are used.
    pub target_weyl: Option<String>,
    pub expected: Option<f64>,
    /// Expression in the map coordinates, complex allowed.
    pub expected_expr: Option<String>,
    pub orientation: Option<i8>,
}

fn exactly_one(what: &str, options: &[(&str, bool)]) -> Result<()> {
    let set: Vec<&str> = options.iter().filter(|(_, b)| *b).map(|(n, _)| *n).collect();
    if set.len() != 1 {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        return Err(Error::Config(format!(
            "{what} needs exactly one of {}, found {}",
            names.join(", "),
            if set.is_empty() { "none".to_string() } else { set.join(", ") }
        )));
    }
    Ok(())
}

fn require<T>(what: &str, field: &str, v: &Option<T>) -> Result<()> {
    if v.is_none() {
        return Err(Error::Config(format!("{what} is missing `{field}`")));
    }
    Ok(())
}

fn reference<V>(what: &str, section: &str, name: &Option<String>, table: &BTreeMap<String, V>) -> Result<()> {
    if let Some(n) = name {
        if !table.contains_key(n) {
            return Err(Error::Config(format!("{what} refers to unknown {section} `{n}`")));
        }
    }
    Ok(())
}

fn checked_box(what: &str, b: &DomainBox) -> Result<()> {
    DomainBox::new(b.lo.clone(), b.hi.clone())
        .map(|_| ())
        .map_err(|e| Error::Config(format!("{what}: {e}")))
}

impl Config {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Config> {
        let c: Config = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    /// Hex SHA-256 of the normalized document, independent of formatting.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("configs serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, m) in &self.metric {
            let what = format!("metric `{name}`");
            exactly_one(
                &what,
                &[
                    ("builtin", m.builtin.is_some()),
                    ("components", m.components.is_some()),
                    ("hspace", m.hspace.is_some()),
                ],
            )?;
            if m.components.is_some() {
                require(&what, "coords", &m.coords)?;
            }
            if let Some(w) = &m.hspace {
                reference(&what, "weyl structure", &m.hspace, &self.weyl)?;
                require(&what, "base", &m.base)?;
                if let Some(wm) = &self.weyl[w].metric {
                    if self.metric.get(wm).is_some_and(|x| x.hspace.is_some()) {
                        return Err(Error::Config(format!("{what}: the base metric `{wm}` is itself an H-space")));
                    }
                }
            }
            if let Some(b) = &m.base {
                checked_box(&what, b)?;
            }
            if let Some(o) = m.orientation {
                if o != 1 && o != -1 {
                    return Err(Error::Config(format!("{what}: orientation must be 1 or -1")));
                }
            }
        }
        for (name, w) in &self.weyl {
            let what = format!("weyl structure `{name}`");
            exactly_one(&what, &[("builtin", w.builtin.is_some()), ("metric", w.metric.is_some())])?;
            reference(&what, "metric", &w.metric, &self.metric)?;
            if w.builtin.is_some() && w.alpha.is_some() {
                return Err(Error::Config(format!("{what}: `alpha` cannot be combined with `builtin`")));
            }
        }
        for (name, s) in &self.surface {
            let what = format!("surface `{name}`");
            exactly_one(&what, &[("builtin", s.builtin.is_some()), ("z", s.z.is_some())])?;
            if s.z.is_some() {
                require(&what, "domain", &s.domain)?;
            }
            if let Some(b) = &s.domain {
                checked_box(&what, b)?;
            }
            for seed in s.seeds.iter().flatten() {
                checked_box(&what, &seed.region)?;
            }
        }
        for (name, m) in &self.map {
            let what = format!("map `{name}`");
            exactly_one(
                &what,
                &[
                    ("components", m.components.is_some()),
                    ("surface", m.surface.is_some()),
                    ("retract", m.retract.is_some()),
                ],
            )?;
            if m.components.is_some() {
                require(&what, "coords", &m.coords)?;
            }
            reference(&what, "surface", &m.surface, &self.surface)?;
            reference(&what, "metric", &m.retract, &self.metric)?;
            if let Some(r) = &m.retract {
                if self.metric[r].hspace.is_none() {
                    return Err(Error::Config(format!("{what}: `{r}` is not an H-space metric")));
                }
            }
            reference(&what, "map", &m.compose, &self.map)?;
            if let Some(c) = &m.compose {
                if m.retract.is_none() {
                    return Err(Error::Config(format!("{what}: `compose` needs `retract`")));
                }
                if self.map[c].retract.is_some() {
                    return Err(Error::Config(format!("{what}: `{c}` is itself a retract")));
                }
            }
        }
        let mut names = BTreeSet::new();
        for c in &self.check {
            let what = format!("check `{}`", c.name);
            if !names.insert(c.name.as_str()) {
                return Err(Error::Config(format!("duplicate check name `{}`", c.name)));
            }
            checked_box(&what, &c.domain)?;
            if !(c.tolerance >= 0.0) {
                return Err(Error::Config(format!("{what}: tolerance must be non-negative")));
            }
            if let Some(d) = c.kind.domain_dim() {
                if c.domain.dim() != d {
                    return Err(Error::Config(format!("{what}: domain must have {d} coordinates")));
                }
            }
            reference(&what, "metric", &c.metric, &self.metric)?;
            reference(&what, "weyl structure", &c.weyl, &self.weyl)?;
            reference(&what, "surface", &c.surface, &self.surface)?;
            reference(&what, "map", &c.map, &self.map)?;
            reference(&what, "metric", &c.target, &self.metric)?;
            reference(&what, "weyl structure", &c.target_weyl, &self.weyl)?;
            use CheckKind::*;
            match c.kind {
                ScalarCurvature => {
                    require(&what, "metric", &c.metric)?;
                    require(&what, "expected", &c.expected)?;
                }
                Einstein | WeylNorm | AntiSelfDual => require(&what, "metric", &c.metric)?,
                WeylScalar => {
                    require(&what, "weyl", &c.weyl)?;
                    require(&what, "expected", &c.expected)?;
                }
                EinsteinWeyl => require(&what, "weyl", &c.weyl)?,
                Contact | Holomorphic | IncidenceRoundtrip => require(&what, "surface", &c.surface)?,
                SubmersionMatch => {
                    require(&what, "map", &c.map)?;
                    require(&what, "expected_expr", &c.expected_expr)?;
                }
                HarmonicMorphism | Hwc | Tension | Dilation => {
                    require(&what, "map", &c.map)?;
                    require(&what, "metric", &c.metric)?;
                    exactly_one(
                        &what,
                        &[("target", c.target.is_some()), ("target_weyl", c.target_weyl.is_some())],
                    )?;
                    if c.kind == Dilation {
                        require(&what, "expected_expr", &c.expected_expr)?;
                    }
                }
                Nijenhuis => {
                    require(&what, "map", &c.map)?;
                    require(&what, "metric", &c.metric)?;
                    require(&what, "orientation", &c.orientation)?;
                }
                Twistorial | FrobeniusIsotropic => {
                    require(&what, "map", &c.map)?;
                    require(&what, "metric", &c.metric)?;
                }
                Skies => {}
                Pole => {
                    require(&what, "metric", &c.metric)?;
                    if self.metric[c.metric.as_ref().unwrap()].hspace.is_none() {
                        return Err(Error::Config(format!("{what}: pole checks need an H-space metric")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
seed = 3
[metric.hyp]
builtin = "hyperbolic-4"

[[check]]
name = "e"
kind = "einstein"
metric = "hyp"
tolerance = 1e-6
domain = { lo = [-1, -1, -1, 0.1], hi = [1, 1, 1, 1] }
"#;

    #[test]
    fn parses_and_digests() {
        let c = Config::from_toml(DOC).unwrap();
        assert_eq!(c.check[0].kind, CheckKind::Einstein);
        let spaced = DOC.replace("seed = 3", "seed    =    3\n\n");
        assert_eq!(Config::from_toml(&spaced).unwrap().digest(), c.digest());
        let other = DOC.replace("1e-6", "1e-7");
        assert_ne!(Config::from_toml(&other).unwrap().digest(), c.digest());
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = Config::from_toml(&DOC.replace("metric = \"hyp\"", "metric = \"hyp\"\nbogus = 1")).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = Config::from_toml("colour = 1").unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
    }

    #[test]
    fn references_and_requirements() {
        let e = Config::from_toml(&DOC.replace("metric = \"hyp\"", "metric = \"nope\"")).unwrap_err();
        assert!(e.to_string().contains("nope"));
        let e = Config::from_toml(&DOC.replace("\"einstein\"", "\"scalar-curvature\"")).unwrap_err();
        assert!(e.to_string().contains("expected"));
        let e = Config::from_toml(&DOC.replace("hi = [1, 1, 1, 1]", "hi = [1, 1, 1, 0]")).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let twice = format!("{DOC}\n{}", &DOC[DOC.find("[[check]]").unwrap()..]);
        assert!(Config::from_toml(&twice).unwrap_err().to_string().contains("duplicate"));
    }
}
