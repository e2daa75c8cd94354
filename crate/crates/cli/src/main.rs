mod config;
mod svg;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ConfigError, RunConfig, CONFIG_ENV};
use stokes_audit::audit::{
    antisymmetry_pair, cylinder_ledger, find_antipodal, find_fixed_point, no_retraction_audit,
    odd_winding_certificate, rim_curve, AntipodalOptions, AuditReport, FixedPointOptions, LedgerTolerances,
};
use stokes_audit::constructions::{
    brouwer_retraction, cylinder_pipeline, reduce_dimension, winding_sphere_map, PipelineParams, PoleSelection,
    ReduceParams,
};
use stokes_audit::forms::{mapping_degree, stokes_check, volume_pullback_integral, winding_integral, IntegralResult};
use stokes_audit::geometry::{ball_volume, make_cylinder_mesh, make_disk_mesh, make_sphere_mesh, CurveMesh, Pole};
use stokes_audit::linalg::normalized;
use stokes_audit::mapexpr::{parse_map, Domain, GridMap, MapExpr, Normalized, SmoothMap};
use stokes_audit::Error;

#[derive(Parser)]
#[command(name = "stokes-audit", version)]
#[command(about = "Audit Stokes-theorem identities, degrees and fixed-point / antipodal witnesses")]
struct Cli {
    /// Config file of `key = value` lines (default: $STOKES_AUDIT_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Mesh resolution for the command's domain
    #[arg(long, global = true)]
    resolution: Option<usize>,

    /// Finite-difference stencil order (2 or 4)
    #[arg(long, global = true)]
    stencil_order: Option<u8>,

    /// Finite-difference step
    #[arg(long, global = true)]
    stencil_step: Option<f64>,

    /// Write the JSON report here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Suppress the verdict summary on stderr
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate det Dm over a disk
    Integrate(DomainMap),
    /// Winding certificate of a closed curve t -> (h1, h2), t in [0, 1)
    Winding(MapArg),
    /// Degree of a sphere self-map
    Degree(SphereMap),
    /// Compare both sides of Stokes' identity on a disk
    StokesCheck {
        #[command(flatten)]
        target: DomainMap,
        /// 1-based coordinate carried as the 0-form
        #[arg(long, default_value_t = 1)]
        coordinate: usize,
    },
    /// Search for a witness
    #[command(subcommand)]
    Find(FindCommand),
    /// Audit the no-retraction chain for the map built from a disk self-map
    Retraction {
        /// Disk dimension
        #[arg(long, default_value_t = 2)]
        disk: usize,
        #[arg(long)]
        map: String,
    },
    /// Build the equivariant cylinder map and audit its integral ledger
    CylinderLedger {
        /// Sphere self-map g (normalised); default identity
        #[arg(long, conflicts_with = "winding")]
        map: Option<String>,
        /// Use the horizontal winding-k map as g
        #[arg(long)]
        winding: Option<u32>,
        /// Replace g by a non-equivariant control
        #[arg(long, value_enum)]
        inject: Option<Injection>,
        /// Cap margin of the isotopy
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        /// Write the rim image curve as SVG
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Lower the dimension of an odd sphere map by one
    Reduce {
        #[command(flatten)]
        target: SphereMap,
        /// Target pole A (comma-separated); sampled from the seed if absent
        #[arg(long, requires = "pole_b")]
        pole_a: Option<String>,
        /// Domain pole B (comma-separated)
        #[arg(long, requires = "pole_a")]
        pole_b: Option<String>,
        /// Pole sampling attempts
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        /// Smallest admissible distance to the poles
        #[arg(long)]
        pole_tolerance: Option<f64>,
        /// Dump the reduced map on a mesh as CSV
        #[arg(long)]
        emit_csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FindCommand {
    /// Fixed point of a self-map of the disk
    Fixed {
        #[arg(long, default_value_t = 2)]
        disk: usize,
        #[arg(long)]
        map: String,
    },
    /// Point with f(x) = f(-x) for f: S^n -> R^n
    Antipodal {
        #[command(flatten)]
        target: SphereMap,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
}

#[derive(Args)]
struct MapArg {
    #[arg(long)]
    map: String,
}

#[derive(Args)]
struct DomainMap {
    /// disk2, disk3, ...
    #[arg(long, default_value = "disk2")]
    domain: String,
    #[arg(long)]
    map: String,
}

#[derive(Args)]
struct SphereMap {
    /// Sphere dimension n (domain S^n)
    #[arg(long, default_value_t = 2)]
    sphere: usize,
    #[arg(long)]
    map: String,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Auto,
    Bisection,
    Multistart,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Injection {
    /// g = winding-2 map, whose rim integral is an even multiple of pi
    Even,
}

/// Exit codes: 0 pass, 2 parse, 3 precondition or domain, 4 failed verdict.
enum Failure {
    Parse(String),
    Precondition(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::Arity(_) => Failure::Parse(e.to_string()),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Parse(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

fn load_config(cli: &Cli) -> Outcome<RunConfig> {
    let mut cfg = RunConfig::default();
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty()).map(PathBuf::from));
    if let Some(p) = path {
        cfg.apply_file(&p)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.stencil_order {
        cfg.stencil_order = o;
    }
    if let Some(h) = cli.stencil_step {
        cfg.stencil_step = h;
    }
    if let Some(r) = cli.resolution {
        match &cli.command {
            Command::Integrate(t) | Command::StokesCheck { target: t, .. } => match parse_domain(&t.domain)? {
                Domain::Disk(n) if n >= 3 => cfg.disk3_resolution = r,
                _ => cfg.disk2_resolution = r,
            },
            Command::Retraction { disk, .. } | Command::Find(FindCommand::Fixed { disk, .. }) => {
                if *disk >= 3 {
                    cfg.disk3_resolution = r
                } else {
                    cfg.disk2_resolution = r
                }
            }
            Command::Winding(_) => cfg.curve_samples = r,
            Command::CylinderLedger { .. } => cfg.cylinder_resolution = r,
            Command::Degree(_) | Command::Reduce { .. } | Command::Find(FindCommand::Antipodal { .. }) => {
                cfg.sphere_resolution = r
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_domain(s: &str) -> Outcome<Domain> {
    s.parse::<Domain>().map_err(|e| Failure::Parse(e.to_string()))
}

fn parse_vector(s: &str) -> Outcome<Vec<f64>> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| Failure::Parse(format!("invalid number '{c}' in '{s}'"))))
        .collect()
}

fn base_report(command: &str, source: &str, cfg: &RunConfig) -> AuditReport {
    let mut r = AuditReport::new(command, source).with_seed(cfg.seed);
    r.set_config("stencil_order", cfg.stencil_order);
    r.set_config("stencil_step", cfg.stencil_step);
    r
}

fn run(cli: &Cli, cfg: &RunConfig) -> Outcome<AuditReport> {
    let stencil = cfg.stencil()?;
    match &cli.command {
        Command::Integrate(t) => {
            let domain = parse_domain(&t.domain)?;
            let Domain::Disk(n) = domain else {
                return Err(Failure::Precondition(format!("integrate needs a disk domain, got {domain}")));
            };
            let m = parse_map(&t.map, domain)?;
            let mesh = make_disk_mesh(n, cfg.disk_resolution(n))?;
            let mut r = base_report("integrate", m.source(), cfg);
            r.set_config("domain", domain.to_string());
            r.set_config("resolution", mesh.resolution);
            r.quantity("volume_integral", volume_pullback_integral(&m, &mesh, stencil)?);
            r.certificate("ball_volume", ball_volume(n));
            Ok(r)
        }
        Command::Winding(t) => {
            let h = parse_map(&t.map, Domain::Curve)?;
            let curve = CurveMesh::new(cfg.curve_samples)?;
            let mut r = base_report("winding", h.source(), cfg);
            r.set_config("curve_samples", cfg.curve_samples);
            let cert = odd_winding_certificate(&h, &curve)?;
            let (a, b) = antisymmetry_pair(&h, &curve)?;
            r.quantity("net_arclength", winding_integral(&h, &curve)?);
            r.quantity("h1_dh2", a);
            r.quantity("h2_dh1", b);
            r.certificate("winding", cert);
            // int h1 dh2 + int h2 dh1 = [h1 h2] over the parameter interval
            let (h0, h1) = (h.eval(&[0.0])?, h.eval(&[1.0])?);
            r.certificate(
                "antisymmetry",
                serde_json::json!({
                    "sum": a.value + b.value,
                    "endpoint_term": h1[0] * h1[1] - h0[0] * h0[1],
                    "closure_gap": stokes_audit::linalg::distance(&h0, &h1),
                }),
            );
            let ratio = a.value / PI;
            r.verdict("odd_multiple_of_pi", odd_gap(ratio), cfg.rounding_tolerance, &["h1_dh2"])?;
            Ok(r)
        }
        Command::Degree(t) => {
            let m = parse_map(&t.map, Domain::Sphere(t.sphere))?;
            let mesh = make_sphere_mesh(t.sphere, cfg.sphere_resolution)?;
            let coarse = mapping_degree(&m, &mesh, stencil)?;
            let fine = mapping_degree(&m, &mesh.refine()?, stencil)?;
            let mut r = base_report("degree", m.source(), cfg);
            r.set_config("sphere", t.sphere);
            r.set_config("resolution", mesh.resolution);
            r.quantity("normalised_boundary_integral", IntegralResult::refined(coarse.value, fine.value, mesh.resolution));
            r.certificate("degree", coarse);
            r.verdict("integer_degree", coarse.residual, cfg.rounding_tolerance, &["normalised_boundary_integral"])?;
            Ok(r)
        }
        Command::StokesCheck { target, coordinate } => {
            let domain = parse_domain(&target.domain)?;
            let Domain::Disk(n) = domain else {
                return Err(Failure::Precondition(format!("stokes-check needs a disk domain, got {domain}")));
            };
            if *coordinate == 0 || *coordinate > n {
                return Err(Failure::Precondition(format!("coordinate must lie in 1..={n}")));
            }
            let m = parse_map(&target.map, domain)?;
            let mesh = make_disk_mesh(n, cfg.disk_resolution(n))?;
            let c = stokes_check(&m, &mesh, coordinate - 1, stencil)?;
            let mut r = base_report("stokes-check", m.source(), cfg);
            r.set_config("domain", domain.to_string());
            r.set_config("resolution", mesh.resolution);
            r.set_config("coordinate", coordinate);
            r.quantity("volume_integral", c.volume);
            r.quantity("boundary_integral", c.boundary);
            r.certificate("sign", c.sign);
            r.certificate("refined_residual", c.refined_residual);
            r.verdict("stokes_identity", c.residual, cfg.stokes_tolerance, &["volume_integral", "boundary_integral"])?;
            Ok(r)
        }
        Command::Find(FindCommand::Fixed { disk, map }) => {
            let m = parse_map(map, Domain::Disk(*disk))?;
            let w = find_fixed_point(&m, FixedPointOptions::default())?;
            let mut r = base_report("find-fixed", m.source(), cfg);
            r.set_config("disk", disk);
            r.verdict("fixed_point_defect", w.defect, cfg.fixed_tolerance, &[])?;
            r.witness(w);
            Ok(r)
        }
        Command::Find(FindCommand::Antipodal { target, method }) => {
            let n = target.sphere;
            if *method == Method::Bisection && n != 1 {
                return Err(Failure::Precondition(format!("bisection needs S^1, got S^{n}")));
            }
            if *method == Method::Multistart && n == 1 {
                return Err(Failure::Precondition("on S^1 the search is always a bisection".into()));
            }
            let m = parse_map(&target.map, Domain::Sphere(n))?;
            let opts = AntipodalOptions {
                resolution: cfg.sphere_resolution,
                ..AntipodalOptions::default()
            };
            let w = find_antipodal(&m, opts)?;
            let mut r = base_report("find-antipodal", m.source(), cfg);
            r.set_config("sphere", n);
            r.set_config("resolution", cfg.sphere_resolution);
            let tol = if n == 1 { cfg.bisection_tolerance } else { cfg.antipodal_tolerance };
            r.verdict("antipodal_defect", w.defect, tol, &[])?;
            r.witness(w);
            Ok(r)
        }
        Command::Retraction { disk, map } => {
            let m = parse_map(map, Domain::Disk(*disk))?;
            let source = m.source().to_string();
            let g = brouwer_retraction(Arc::new(m), 1e-6)?;
            let mesh = make_disk_mesh(*disk, cfg.disk_resolution(*disk))?;
            let audit = no_retraction_audit(&g, &mesh, stencil)?;
            let mut r = base_report("retraction", &source, cfg);
            r.config.extend(audit.config);
            r.quantities = audit.quantities;
            r.certificates = audit.certificates;
            r.verdicts = audit.verdicts;
            Ok(r)
        }
        Command::CylinderLedger {
            map,
            winding,
            inject,
            eps,
            svg,
        } => {
            let (g, source): (Arc<dyn SmoothMap>, String) = match (inject, winding, map) {
                (Some(Injection::Even), _, _) => (winding_sphere_map(2), "winding(2), injected even control".into()),
                (None, Some(k), _) => (winding_sphere_map(*k), format!("winding({k})")),
                (None, None, Some(src)) => {
                    let m = parse_map(src, Domain::Sphere(2))?;
                    let source = m.source().to_string();
                    (Arc::new(Normalized(m)), source)
                }
                (None, None, None) => (Arc::new(MapExpr::identity(Domain::Sphere(2))), "identity".into()),
            };
            let mut params = PipelineParams::standard();
            params.isotopy.eps = *eps;
            let pipeline = cylinder_pipeline(g, &params)?;
            let mesh = make_cylinder_mesh(cfg.cylinder_resolution)?;
            let tol = LedgerTolerances {
                stokes: cfg.stokes_tolerance,
                odd_residual: cfg.rounding_tolerance,
                ..LedgerTolerances::default()
            };
            let audit = cylinder_ledger(&pipeline.map, &mesh, stencil, tol)?;
            let mut r = base_report("cylinder-ledger", &source, cfg);
            r.config.extend(audit.config);
            r.set_config("pole_a", params.a.coords());
            r.set_config("pole_b", params.b.coords());
            r.set_config("eps", eps);
            r.quantities = audit.quantities;
            r.certificates = audit.certificates;
            r.certificate("pipeline", pipeline.report);
            r.verdicts = audit.verdicts;
            if let Some(path) = svg {
                let curve = rim_curve(&pipeline.map, 720)?;
                write_file(path, &svg::curve_svg(&curve, &format!("rim image of {source}")))?;
            }
            Ok(r)
        }
        Command::Reduce {
            target,
            pole_a,
            pole_b,
            trials,
            eps,
            pole_tolerance,
            emit_csv,
        } => {
            let n = target.sphere;
            let m = parse_map(&target.map, Domain::Sphere(n))?;
            let source = m.source().to_string();
            let poles = match (pole_a, pole_b) {
                (Some(a), Some(b)) => PoleSelection::Given {
                    a: Pole::new(normalized(&parse_vector(a)?))?,
                    b: Pole::new(normalized(&parse_vector(b)?))?,
                },
                _ => PoleSelection::Sampled {
                    seed: cfg.seed,
                    trials: *trials,
                },
            };
            let mut params = ReduceParams {
                eps: *eps,
                pole_tolerance: pole_tolerance.unwrap_or(cfg.pole_tolerance),
                check_resolution: cfg.sphere_resolution,
                ..ReduceParams::default()
            };
            params.isotopy.eps = *eps;
            let reduced = reduce_dimension(Arc::new(m), &poles, &params)?;
            let mut r = base_report("reduce", &source, cfg);
            r.set_config("sphere", n);
            r.set_config("eps", eps);
            r.set_config("pole_tolerance", params.pole_tolerance);
            r.set_config("resolution", cfg.sphere_resolution);
            r.certificate("reduction", &reduced.report);
            r.verdict(
                "equivariance_defect",
                reduced.report.equivariance_defect,
                cfg.equivariance_tolerance,
                &[],
            )?;
            if let Some(path) = emit_csv {
                let mesh = Arc::new(make_sphere_mesh(n - 1, cfg.sphere_resolution)?);
                write_file(path, &GridMap::tabulate(&reduced, mesh)?.to_csv())?;
            }
            Ok(r)
        }
    }
}

/// Distance from `x` to the nearest odd integer.
fn odd_gap(x: f64) -> f64 {
    let h = (x - 1.0) / 2.0;
    2.0 * (h - h.round()).abs()
}

fn write_file(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|e| Failure::Precondition(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(&cli).and_then(|cfg| run(&cli, &cfg));
    let report = match result {
        Ok(r) => r,
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Precondition(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let json = report.to_json();
    match &cli.output {
        Some(path) => {
            if let Err(Failure::Precondition(msg) | Failure::Parse(msg)) = write_file(path, &format!("{json}\n")) {
                eprintln!("error: {msg}");
                return ExitCode::from(3);
            }
        }
        None => println!("{json}"),
    }
    if !cli.quiet {
        for v in &report.verdicts {
            eprintln!(
                "{} {}: observed {:.3e}, tolerance {:.1e}",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.observed,
                v.tolerance
            );
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}
