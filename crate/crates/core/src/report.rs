//! Check reports and their canonical JSON form.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub point: Vec<f64>,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub sample_count: usize,
    pub worst_point: Vec<f64>,
    pub pass: bool,
    pub errors: Vec<SampleError>,
}

impl CheckResult {
    /// Aggregates per-sample residuals. Failed samples and non-finite
    /// residuals are recorded as errors.
    pub fn from_samples<I>(name: &str, tolerance: f64, samples: I) -> CheckResult
    where
        I: IntoIterator<Item = (Vec<f64>, Result<f64>)>,
    {
        let mut max_residual = 0.0_f64;
        let mut worst_point = Vec::new();
        let mut errors = Vec::new();
        let mut sample_count = 0;
        for (point, r) in samples {
            sample_count += 1;
            match r {
                Ok(v) if v.is_finite() => {
                    if worst_point.is_empty() || v > max_residual {
                        max_residual = v;
                        worst_point = point;
                    }
                }
                Ok(_) => errors.push(SampleError {
                    point,
                    kind: "NonFiniteResidual".into(),
                }),
                Err(e) => errors.push(SampleError {
                    point,
                    kind: e.kind().into(),
                }),
            }
        }
        CheckResult::new(name, max_residual, tolerance, sample_count, worst_point, errors)
    }

    pub fn new(
        name: &str,
        max_residual: f64,
        tolerance: f64,
        sample_count: usize,
        worst_point: Vec<f64>,
        errors: Vec<SampleError>,
    ) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            max_residual,
            tolerance,
            sample_count,
            worst_point,
            pass: max_residual <= tolerance && errors.is_empty(),
            errors,
        }
    }

    /// A check that could not run at all.
    pub fn failed(name: &str, tolerance: f64, err: &Error) -> CheckResult {
        CheckResult::new(
            name,
            0.0,
            tolerance,
            0,
            vec![],
            vec![SampleError {
                point: vec![],
                kind: err.kind().into(),
            }],
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub config_digest: String,
    pub tool_version: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
    pub metadata: Metadata,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

impl CheckReport {
    pub fn new(mut checks: Vec<CheckResult>, metadata: Metadata) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        CheckReport { checks, metadata }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Canonical JSON: sorted keys, reals with 17 significant digits.
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter::new());
        value
            .serialize(&mut ser)
            .map_err(|e| Error::Io(e.to_string()))?;
        out.push(b'\n');
        String::from_utf8(out).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn emit(&self, path: &Path) -> Result<()> {
        let text = self.to_canonical_json()?;
        std::fs::write(path, text)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
    }
}

/// Pretty printing with every real written in `{:.16e}` form.
struct CanonicalFormatter {
    inner: PrettyFormatter<'static>,
}

impl CanonicalFormatter {
    fn new() -> Self {
        CanonicalFormatter {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
