use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hspace::calderbank::calderbank_metric;
use hspace::config::{CheckKind, CheckSpec, Config, MapSpec, MetricSpec, SurfaceSpec, WeylSpec};
use hspace::geometry::builtin_metric;
use hspace::report::CheckReport;
use hspace::sampling::DomainBox;
use hspace::suite::{builtin_suite, run_suite, Overrides};
use hspace::twistor::builtin_surface;
use hspace::weyl::builtin_weyl;
use hspace::{Error, Result};

const REPORT_DIR_VAR: &str = "HSPACE_REPORT_DIR";
const REPORT_FILE: &str = "hspace-report.json";

#[derive(Parser)]
#[command(name = "hspace", version, about = "Numerical verification of twistorial harmonic morphisms on H-spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Suite configuration (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed offset for the Halton samples
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per check, overriding the configuration
    #[arg(long)]
    samples: Option<usize>,
    /// Tolerance for every check, overriding the configuration
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; defaults to hspace-report.json in $HSPACE_REPORT_DIR or the working directory
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature checks for a metric
    VerifyMetric {
        /// Metric name in the configuration, or a built-in
        #[arg(long)]
        metric: String,
        /// Expected constant scalar curvature
        #[arg(long, allow_hyphen_values = true)]
        scalar: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Einstein-Weyl checks for a Weyl structure
    VerifyWeyl {
        #[arg(long)]
        weyl: String,
        /// Expected constant Weyl scalar curvature
        #[arg(long, allow_hyphen_values = true)]
        scalar: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Contact, incidence and harmonic morphism checks for a surface in CP^3
    SurfacePipeline {
        #[arg(long)]
        surface: String,
        #[command(flatten)]
        common: Common,
    },
    /// Checks of the H-space metric over a Weyl structure and of its retract
    Calderbank {
        #[arg(long)]
        weyl: String,
        #[command(flatten)]
        common: Common,
    },
    /// Runs every check of a configuration or built-in suite
    Run {
        /// Built-in suite name
        #[arg(long, conflicts_with = "config")]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn check(name: &str, kind: CheckKind, tolerance: f64, domain: DomainBox) -> CheckSpec {
    CheckSpec {
        name: name.to_string(),
        kind,
        tolerance,
        domain,
        samples: None,
        metric: None,
        weyl: None,
        surface: None,
        map: None,
        target: None,
        target_weyl: None,
        expected: None,
        expected_expr: None,
        orientation: None,
    }
}

fn unit_box(dim: usize) -> DomainBox {
    let mut lo = vec![-1.0; dim];
    if let Some(l) = lo.last_mut() {
        *l = 0.1;
    }
    DomainBox { lo, hi: vec![1.0; dim] }
}

fn base_config(common: &Common) -> Result<Config> {
    match &common.config {
        Some(p) => {
            let mut c = Config::load(p)?;
            c.check.clear();
            Ok(c)
        }
        None => Ok(Config::default()),
    }
}

fn verify_metric(common: &Common, name: &str, scalar: Option<f64>) -> Result<Config> {
    let mut c = base_config(common)?;
    let dim = match c.metric.get(name) {
        Some(m) if m.hspace.is_some() => 4,
        Some(m) => match (&m.builtin, &m.coords) {
            (Some(b), _) => builtin_metric(b).map(|g| g.dim),
            (None, Some(coords)) => Some(coords.len()),
            _ => None,
        }
        .ok_or_else(|| Error::Config(format!("cannot determine the dimension of `{name}`")))?,
        None => {
            let g = builtin_metric(name).ok_or_else(|| Error::Config(format!("unknown metric `{name}`")))?;
            c.metric.insert(
                name.to_string(),
                MetricSpec {
                    builtin: Some(name.to_string()),
                    ..Default::default()
                },
            );
            g.dim
        }
    };
    let domain = unit_box(dim);
    let mut add = |suffix: &str, kind: CheckKind| {
        let mut k = check(&format!("{name}-{suffix}"), kind, 1e-6, domain.clone());
        k.metric = Some(name.to_string());
        k.expected = scalar;
        c.check.push(k);
    };
    add("einstein", CheckKind::Einstein);
    if scalar.is_some() {
        add("scalar", CheckKind::ScalarCurvature);
    }
    if dim == 4 {
        add("weyl", CheckKind::WeylNorm);
        add("half-flat", CheckKind::AntiSelfDual);
    }
    Ok(c)
}

fn ensure_weyl(c: &mut Config, name: &str) -> Result<()> {
    if !c.weyl.contains_key(name) {
        if builtin_weyl(name).is_none() {
            return Err(Error::Config(format!("unknown Weyl structure `{name}`")));
        }
        c.weyl.insert(
            name.to_string(),
            WeylSpec {
                builtin: Some(name.to_string()),
                ..Default::default()
            },
        );
    }
    Ok(())
}

fn verify_weyl(common: &Common, name: &str, scalar: Option<f64>) -> Result<Config> {
    let mut c = base_config(common)?;
    ensure_weyl(&mut c, name)?;
    let mut k = check(&format!("{name}-einstein-weyl"), CheckKind::EinsteinWeyl, 1e-6, unit_box(3));
    k.weyl = Some(name.to_string());
    c.check.push(k.clone());
    if let Some(s) = scalar {
        k.name = format!("{name}-scalar");
        k.kind = CheckKind::WeylScalar;
        k.expected = Some(s);
        c.check.push(k);
    }
    Ok(c)
}

fn surface_pipeline(common: &Common, name: &str) -> Result<Config> {
    let mut c = base_config(common)?;
    if !c.surface.contains_key(name) {
        if builtin_surface(name).is_none() {
            return Err(Error::Config(format!("unknown surface `{name}`")));
        }
        c.surface.insert(
            name.to_string(),
            SurfaceSpec {
                builtin: Some(name.to_string()),
                ..Default::default()
            },
        );
    }
    for m in ["hyperbolic-4", "flat-2"] {
        c.metric.entry(m.to_string()).or_insert(MetricSpec {
            builtin: Some(m.to_string()),
            ..Default::default()
        });
    }
    let map = format!("{name}-submersion");
    c.map.insert(
        map.clone(),
        MapSpec {
            surface: Some(name.to_string()),
            ..Default::default()
        },
    );
    let params = DomainBox {
        lo: vec![-1.0, 0.2, -1.0, -1.0],
        hi: vec![1.0, 1.5, 1.0, 1.0],
    };
    for (suffix, kind, tol) in [
        ("contact", CheckKind::Contact, 1e-10),
        ("holomorphic", CheckKind::Holomorphic, 1e-10),
        ("roundtrip", CheckKind::IncidenceRoundtrip, 1e-9),
    ] {
        let mut k = check(&format!("{name}-{suffix}"), kind, tol, params.clone());
        k.surface = Some(name.to_string());
        c.check.push(k);
    }
    for (suffix, kind, tol) in [
        ("tension", CheckKind::Tension, 1e-6),
        ("hwc", CheckKind::Hwc, 1e-8),
        ("twistorial", CheckKind::Twistorial, 1e-6),
    ] {
        let mut k = check(&format!("{name}-{suffix}"), kind, tol, unit_box(4));
        k.map = Some(map.clone());
        k.metric = Some("hyperbolic-4".into());
        if kind != CheckKind::Twistorial {
            k.target = Some("flat-2".into());
        }
        c.check.push(k);
    }
    Ok(c)
}

fn calderbank(common: &Common, name: &str) -> Result<Config> {
    let mut c = base_config(common)?;
    ensure_weyl(&mut c, name)?;
    let base = DomainBox {
        lo: vec![-1.0; 3],
        hi: vec![1.0; 3],
    };
    let hs_name = format!("hspace-{name}");
    c.metric.insert(
        hs_name.clone(),
        MetricSpec {
            hspace: Some(name.to_string()),
            base: Some(base.clone()),
            ..Default::default()
        },
    );
    let retract = format!("retract-{name}");
    c.map.insert(
        retract.clone(),
        MapSpec {
            retract: Some(hs_name.clone()),
            ..Default::default()
        },
    );
    // the interval bound needs the built structure
    let weyl = hspace::suite::World::build(&c).weyl(name)?;
    let t_max = calderbank_metric(&weyl, &base)?.t_max;
    let t_hi = if t_max.is_finite() { 0.9 * t_max } else { 1.0 };
    let domain = DomainBox {
        lo: vec![0.1 * t_hi, -1.0, -1.0, -1.0],
        hi: vec![t_hi, 1.0, 1.0, 1.0],
    };
    for (suffix, kind) in [("einstein", CheckKind::Einstein), ("half-flat", CheckKind::AntiSelfDual)] {
        let mut k = check(&format!("{hs_name}-{suffix}"), kind, 1e-6, domain.clone());
        k.metric = Some(hs_name.clone());
        c.check.push(k);
    }
    let mut k = check(&format!("{hs_name}-pole"), CheckKind::Pole, 1e-6, base);
    k.metric = Some(hs_name.clone());
    c.check.push(k);
    let mut k = check(&format!("{retract}-harmonic-morphism"), CheckKind::HarmonicMorphism, 1e-6, domain);
    k.map = Some(retract);
    k.metric = Some(hs_name);
    k.target_weyl = Some(name.to_string());
    c.check.push(k);
    Ok(c)
}

fn report_path(common: &Common) -> PathBuf {
    match &common.report {
        Some(p) => p.clone(),
        None => {
            let dir = std::env::var_os(REPORT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            dir.join(REPORT_FILE)
        }
    }
}

fn print_summary(report: &CheckReport, path: &Path) {
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        let errors = if c.errors.is_empty() {
            String::new()
        } else {
            let mut kinds: Vec<&str> = c.errors.iter().map(|e| e.kind.as_str()).collect();
            kinds.dedup();
            format!("  errors: {} ({})", c.errors.len(), kinds.join(", "))
        };
        println!(
            "{status}  {:<32} max {:.3e}  tol {:.1e}  n {}{errors}",
            c.name, c.max_residual, c.tolerance, c.sample_count
        );
    }
    println!("report written to {}", path.display());
}

fn run(cli: Cli) -> Result<bool> {
    let (config, common) = match &cli.command {
        Command::VerifyMetric { metric, scalar, common } => (verify_metric(common, metric, *scalar)?, common),
        Command::VerifyWeyl { weyl, scalar, common } => (verify_weyl(common, weyl, *scalar)?, common),
        Command::SurfacePipeline { surface, common } => (surface_pipeline(common, surface)?, common),
        Command::Calderbank { weyl, common } => (calderbank(common, weyl)?, common),
        Command::Run { suite, common } => {
            let config = match (suite, &common.config) {
                (Some(s), _) => builtin_suite(s).ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))?,
                (None, Some(p)) => Config::load(p)?,
                (None, None) => return Err(Error::Config("run needs --config or --suite".into())),
            };
            (config, common)
        }
    };
    let overrides = Overrides {
        samples: common.samples,
        tolerance: common.tol,
    };
    let report = run_suite(&config, common.seed, overrides)?;
    let path = report_path(common);
    report.emit(&path)?;
    print_summary(&report, &path);
    Ok(report.pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
