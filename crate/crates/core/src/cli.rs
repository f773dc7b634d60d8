//! Command-line front end over the geometry, mode, and verification
//! layers. Five subcommands: `geometry-check` runs the closed-form
//! connection tables against numeric oracles, `mode` samples a mode's
//! ten components over a grid, `verify` produces a residual report
//! against one governing system, `dispersion` scans the closure
//! constraint along σ = iκ, and `specfun` evaluates one special
//! function directly.
//!
//! Exit codes: 0 when every requested check passed, 1 when a tolerance
//! failed (the offending table is printed), 2 when the request itself
//! was unusable. Output is byte-deterministic for a fixed configuration:
//! fixed row ordering, 17-significant-digit numeric cells, seeded
//! sampling. Every run echoes its resolved configuration into the
//! output header. A flat key=value config file supplies defaults;
//! explicit flags win.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::c64;
use crate::geometry::{
    christoffel_at, christoffel_numeric, ricci_rotation, ricci_rotation_contracted, FieldPoint,
};
use crate::modes::{
    build_mode_massless_gradient, build_mode_sigma, build_mode_sigma0_massive, dispersion_residual,
    scalar_master_potential, AxialKind, ModeField, QuantumNumbers, RadialKind,
};
use crate::operators::TenComponentField;
use crate::specfun::{bessel_i, bessel_j, bessel_k, bessel_y, macdonald_imag_order};
use crate::verify::{
    residual_system_with, richardson, EquationResidual, FdScheme, Grid, SystemParams, SystemTag,
};

/// Column names for `mode` CSV output: the grid coordinates followed by
/// real and imaginary parts of the ten components in flatten order.
pub const MODE_CSV_HEADER: &str = "r,z,Re(Phi0),Im(Phi0),Re(Phi1),Im(Phi1),Re(Phi2),Im(Phi2),\
                                   Re(Phi3),Im(Phi3),Re(E1),Im(E1),Re(E2),Im(E2),Re(E3),Im(E3),\
                                   Re(H1),Im(H1),Re(H2),Im(H2),Re(H3),Im(H3)";

/// Entry point behind the binary. `argv` starts with the program name.
pub fn run(argv: &[String]) -> u8 {
    init_threads();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// DKP_H3_THREADS caps the rayon pool. Silently a no-op once the global
/// pool exists, so repeated `run` calls in one process stay safe.
fn init_threads() {
    if let Ok(raw) = std::env::var("DKP_H3_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

type CliResult<T> = Result<T, UsageError>;

fn bad<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(UsageError(msg.into()))
}

#[derive(Parser, Debug)]
#[command(
    name = "dkp-h3",
    about = "Ten-component spin-1 modes on the horospherical slicing: build, sample, verify"
)]
struct Cli {
    /// Flat key=value defaults file; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check closed-form connection tables against numeric oracles.
    GeometryCheck(GeometryCheckArgs),
    /// Build a mode and sample all ten components over a grid.
    Mode(ModeCmdArgs),
    /// Residual report for a mode against one governing system.
    Verify(VerifyCmdArgs),
    /// Scan closure and field-equation residuals along sigma = i*kappa.
    Dispersion(DispersionCmdArgs),
    /// Evaluate one special function: value and derivative.
    Specfun(SpecfunCmdArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the payload here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<String>,
    /// Payload format.
    #[arg(long, value_enum, ignore_case = true)]
    format: Option<FormatArg>,
}

#[derive(Args, Debug)]
struct GridCmdArgs {
    /// Smallest radial coordinate (must stay positive).
    #[arg(long)]
    r_min: Option<f64>,
    /// Largest radial coordinate.
    #[arg(long)]
    r_max: Option<f64>,
    /// Radial sample count.
    #[arg(long)]
    n_r: Option<usize>,
    /// Smallest axial coordinate.
    #[arg(long)]
    z_min: Option<f64>,
    /// Largest axial coordinate.
    #[arg(long)]
    z_max: Option<f64>,
    /// Axial sample count.
    #[arg(long)]
    n_z: Option<usize>,
}

#[derive(Args, Debug)]
struct ModeSelectArgs {
    /// Solution family to build.
    #[arg(long, value_enum, ignore_case = true)]
    family: Option<FamilyArg>,
    /// Energy parameter.
    #[arg(long)]
    eps: Option<f64>,
    /// Azimuthal integer.
    #[arg(long)]
    m: Option<i32>,
    /// Real part of the axial separation constant sigma.
    #[arg(long)]
    sigma_re: Option<f64>,
    /// Imaginary part of sigma.
    #[arg(long)]
    sigma_im: Option<f64>,
    /// Radial separation constant (positive).
    #[arg(long)]
    lambda: Option<f64>,
    /// Mass parameter.
    #[arg(long)]
    mass: Option<f64>,
    /// Radial branch.
    #[arg(long, value_enum, ignore_case = true)]
    radial: Option<RadialArg>,
    /// Axial branch.
    #[arg(long, value_enum, ignore_case = true)]
    axial: Option<AxialArg>,
}

#[derive(Args, Debug)]
struct GeometryCheckArgs {
    /// Number of random sample points.
    #[arg(long)]
    points: Option<usize>,
    /// Seed for the sample-point stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Base step for the numeric-differentiation oracle.
    #[arg(long)]
    h: Option<f64>,
    /// Largest allowed absolute entry difference.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct ModeCmdArgs {
    #[command(flatten)]
    mode: ModeSelectArgs,
    #[command(flatten)]
    grid: GridCmdArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyCmdArgs {
    /// Governing system to test against.
    #[arg(long, value_enum, ignore_case = true)]
    system: Option<SystemArg>,
    #[command(flatten)]
    mode: ModeSelectArgs,
    #[command(flatten)]
    grid: GridCmdArgs,
    /// Finite-difference step.
    #[arg(long)]
    h: Option<f64>,
    /// Finite-difference order (2 or 4).
    #[arg(long)]
    fd_order: Option<u32>,
    /// Combine steps h and h/2 into the step-extrapolated report.
    #[arg(long)]
    richardson: bool,
    /// Pass threshold on the largest relative residual.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct DispersionCmdArgs {
    /// Energy parameter.
    #[arg(long)]
    eps: Option<f64>,
    /// Mass parameter (positive).
    #[arg(long)]
    mass: Option<f64>,
    /// Azimuthal integer for the probe modes.
    #[arg(long)]
    m: Option<i32>,
    /// Radial separation constant for the probe modes.
    #[arg(long)]
    lambda: Option<f64>,
    /// Scan range start:end:count with inclusive endpoints.
    #[arg(long, value_name = "A:B:N")]
    kappa_range: Option<String>,
    /// Radial branch for the probe modes.
    #[arg(long, value_enum, ignore_case = true)]
    radial: Option<RadialArg>,
    /// Axial branch for the probe modes.
    #[arg(long, value_enum, ignore_case = true)]
    axial: Option<AxialArg>,
    #[command(flatten)]
    grid: GridCmdArgs,
    /// Finite-difference step for the residual column.
    #[arg(long)]
    h: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SpecfunCmdArgs {
    /// Which function to evaluate.
    #[arg(long = "fn", value_enum, ignore_case = true)]
    function: Option<FnArg>,
    /// Order (the imaginary order kappa for kimag).
    #[arg(long)]
    order: Option<f64>,
    /// Argument.
    #[arg(long)]
    arg: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Sigma,
    Sigma0,
    Massless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RadialArg {
    J,
    Y,
}

impl From<RadialArg> for RadialKind {
    fn from(v: RadialArg) -> Self {
        match v {
            RadialArg::J => RadialKind::J,
            RadialArg::Y => RadialKind::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxialArg {
    Decaying,
    Growing,
}

impl From<AxialArg> for AxialKind {
    fn from(v: AxialArg) -> Self {
        match v {
            AxialArg::Decaying => AxialKind::Decaying,
            AxialArg::Growing => AxialKind::Growing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    Full,
    Helicity,
    Sigma0,
    Massless,
    Scalar,
}

impl SystemArg {
    fn tag(self) -> SystemTag {
        match self {
            SystemArg::Full => SystemTag::Full9,
            SystemArg::Helicity => SystemTag::Helicity12,
            SystemArg::Sigma0 => SystemTag::Sigma021,
            SystemArg::Massless => SystemTag::Massless25,
            SystemArg::Scalar => SystemTag::Scalar23a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FnArg {
    J,
    Y,
    I,
    K,
    Kimag,
}

fn enum_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

/// All numeric cells print through this: 17 significant digits, enough
/// to round-trip any f64 bit pattern.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number, or null when the value has no JSON representation.
fn jnum(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn jc(c: Complex64) -> Value {
    Value::Array(vec![jnum(c.re), jnum(c.im)])
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json serialization");
    s.push('\n');
    s
}

/// Merges flag values over config-file entries over built-in defaults,
/// recording every resolved key in resolution order for the echo header.
struct Resolver {
    cfg: HashMap<String, String>,
    echo: Vec<(String, String)>,
}

impl Resolver {
    fn new(cfg: HashMap<String, String>) -> Self {
        Resolver {
            cfg,
            echo: Vec::new(),
        }
    }

    fn record(&mut self, key: &str, value: String) {
        self.echo.push((key.to_string(), value));
    }

    fn raw(&self, key: &str) -> Option<String> {
        self.cfg.get(key).map(|s| s.trim().to_string())
    }

    fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> CliResult<f64> {
        let v = match flag {
            Some(v) => v,
            None => match self.raw(key) {
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| UsageError(format!("config key {key}: {s:?} is not a number")))?,
                None => default,
            },
        };
        self.record(key, fmt_f(v));
        Ok(v)
    }

    fn f64_required(&mut self, key: &str, flag: Option<f64>) -> CliResult<f64> {
        if flag.is_none() && self.raw(key).is_none() {
            return bad(format!("--{key} is required (flag or config file)"));
        }
        self.f64(key, flag, f64::NAN)
    }

    fn int<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: std::str::FromStr + std::fmt::Display + Copy,
    {
        let v = match flag {
            Some(v) => v,
            None => match self.raw(key) {
                Some(s) => s.parse::<T>().map_err(|_| {
                    UsageError(format!("config key {key}: {s:?} is not a valid value"))
                })?,
                None => default,
            },
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    fn pick<T: ValueEnum + Copy>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> CliResult<T> {
        let v = match flag {
            Some(v) => v,
            None => match self.raw(key) {
                Some(s) => T::from_str(&s, true)
                    .map_err(|e| UsageError(format!("config key {key}: {e}")))?,
                None => default,
            },
        };
        self.record(key, enum_name(v));
        Ok(v)
    }

    fn pick_required<T: ValueEnum + Copy>(&mut self, key: &str, flag: Option<T>) -> CliResult<T> {
        let v = match flag {
            Some(v) => v,
            None => match self.raw(key) {
                Some(s) => T::from_str(&s, true)
                    .map_err(|e| UsageError(format!("config key {key}: {e}")))?,
                None => return bad(format!("--{key} is required (flag or config file)")),
            },
        };
        self.record(key, enum_name(v));
        Ok(v)
    }

    fn toggle(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        let v = if flag {
            true
        } else {
            match self.raw(key) {
                Some(s) => match s.to_ascii_lowercase().as_str() {
                    "true" | "1" | "yes" | "on" => true,
                    "false" | "0" | "no" | "off" => false,
                    _ => return bad(format!("config key {key}: {s:?} is not a boolean")),
                },
                None => false,
            }
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    fn text(&mut self, key: &str, flag: Option<String>, default: &str) -> CliResult<String> {
        let v = flag
            .or_else(|| self.raw(key))
            .unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        Ok(v)
    }

    fn text_opt(&mut self, key: &str, flag: Option<String>) -> Option<String> {
        let v = flag.or_else(|| self.raw(key));
        if let Some(ref s) = v {
            self.record(key, s.clone());
        }
        v
    }
}

fn load_config(path: Option<&str>) -> CliResult<HashMap<String, String>> {
    let Some(path) = path else {
        return Ok(HashMap::new());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {path}: {e}")))?;
    parse_config(&text).map_err(|msg| UsageError(format!("config {path}: {msg}")))
}

/// Flat key=value lines; blank lines and # comments are skipped, later
/// duplicates win.
fn parse_config(text: &str) -> Result<HashMap<String, String>, String> {
    let mut out = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key=value, got {raw:?}", idx + 1));
        };
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::GeometryCheck(a) => cmd_geometry_check(Resolver::new(cfg), a),
        Cmd::Mode(a) => cmd_mode(Resolver::new(cfg), a),
        Cmd::Verify(a) => cmd_verify(Resolver::new(cfg), a),
        Cmd::Dispersion(a) => cmd_dispersion(Resolver::new(cfg), a),
        Cmd::Specfun(a) => cmd_specfun(Resolver::new(cfg), a),
    }
}

/// Header comment block echoing the resolved configuration.
fn csv_preamble(sub: &str, echo: &[(String, String)]) -> String {
    let mut s = format!("# dkp-h3 {sub}\n");
    for (k, v) in echo {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn json_config(sub: &str, echo: &[(String, String)]) -> Value {
    let mut map = Map::new();
    map.insert("subcommand".into(), Value::String(sub.into()));
    for (k, v) in echo {
        map.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(map)
}

/// Payload goes to the output file or stdout. Status lines print only
/// when the payload went to a file, keeping stdout machine-readable.
fn deliver(payload: &str, output: Option<&str>, status: &[String]) -> CliResult<()> {
    match output {
        Some(path) => {
            std::fs::write(path, payload)
                .map_err(|e| UsageError(format!("cannot write {path}: {e}")))?;
            for line in status {
                println!("{line}");
            }
        }
        None => print!("{payload}"),
    }
    Ok(())
}

fn cmd_geometry_check(mut res: Resolver, a: GeometryCheckArgs) -> CliResult<bool> {
    let points = res.int("points", a.points, 100usize)?;
    let seed = res.int("seed", a.seed, 42u64)?;
    let h = res.f64("h", a.h, 1e-4)?;
    let tol = res.f64("tol", a.tol, 1e-7)?;
    let format = res.pick("format", a.out.format, FormatArg::Csv)?;
    let output = res.text_opt("output", a.out.output);
    if points == 0 {
        return bad("--points must be at least 1");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_connection = 0.0f64;
    let mut worst_rotation = 0.0f64;
    let mut cancellation_warnings = 0usize;
    for _ in 0..points {
        let r = rng.gen_range(0.1..=5.0);
        let z = rng.gen_range(-2.0..=2.0);
        let p = FieldPoint::new(r, z).map_err(|e| UsageError(e.to_string()))?;
        let closed = christoffel_at(&p);
        let numeric = christoffel_numeric(&p, h).map_err(|e| UsageError(e.to_string()))?;
        if numeric.cancellation.is_some() {
            cancellation_warnings += 1;
        }
        let rot_closed = ricci_rotation(&p);
        let rot_contracted = ricci_rotation_contracted(&p);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    worst_connection = worst_connection
                        .max((closed.get(i, j, k) - numeric.table.get(i, j, k)).abs());
                    worst_rotation = worst_rotation
                        .max((rot_closed.get(i, j, k) - rot_contracted.get(i, j, k)).abs());
                }
            }
        }
    }

    let checks = [
        ("christoffel-closed-vs-numeric", worst_connection),
        ("rotation-closed-vs-contracted", worst_rotation),
    ];
    let pass = checks.iter().all(|(_, worst)| *worst <= tol);

    let payload = match format {
        FormatArg::Csv => {
            let mut s = csv_preamble("geometry-check", &res.echo);
            s.push_str("check,max_abs_diff,tol,status\n");
            for (name, worst) in &checks {
                let _ = writeln!(
                    s,
                    "{name},{},{},{}",
                    fmt_f(*worst),
                    fmt_f(tol),
                    verdict(*worst <= tol)
                );
            }
            let _ = writeln!(s, "# cancellation_warnings = {cancellation_warnings}");
            let _ = writeln!(s, "# result = {}", verdict(pass));
            s
        }
        FormatArg::Json => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|(name, worst)| {
                    json!({
                        "check": name,
                        "max_abs_diff": jnum(*worst),
                        "tol": jnum(tol),
                        "pass": *worst <= tol,
                    })
                })
                .collect();
            pretty(json!({
                "config": json_config("geometry-check", &res.echo),
                "checks": rows,
                "cancellation_warnings": cancellation_warnings,
                "pass": pass,
            }))
        }
    };

    let mut status = vec![format!("geometry-check: {}", verdict(pass))];
    if !pass {
        for (name, worst) in &checks {
            if *worst > tol {
                status.push(format!(
                    "  {name}: max {} exceeds tol {}",
                    fmt_f(*worst),
                    fmt_f(tol)
                ));
            }
        }
    }
    deliver(&payload, output.as_deref(), &status)?;
    Ok(pass)
}

struct ResolvedMode {
    family: FamilyArg,
    qn: QuantumNumbers,
    radial: RadialKind,
    axial: AxialKind,
}

fn resolve_mode(
    res: &mut Resolver,
    ms: &ModeSelectArgs,
    default_family: FamilyArg,
) -> CliResult<ResolvedMode> {
    let family = res.pick("family", ms.family, default_family)?;
    let eps = res.f64("eps", ms.eps, SQRT_2)?;
    let m = res.int("m", ms.m, 1i32)?;
    let sigma_im_default = if family == FamilyArg::Sigma { 1.0 } else { 0.0 };
    let sigma_re = res.f64("sigma-re", ms.sigma_re, 0.0)?;
    let sigma_im = res.f64("sigma-im", ms.sigma_im, sigma_im_default)?;
    let lambda = res.f64("lambda", ms.lambda, 1.0)?;
    let mass_default = if family == FamilyArg::Massless {
        0.0
    } else {
        1.0
    };
    let mass = res.f64("mass", ms.mass, mass_default)?;
    let radial = res.pick("radial", ms.radial, RadialArg::J)?;
    let axial = res.pick("axial", ms.axial, AxialArg::Decaying)?;
    if family == FamilyArg::Massless && mass != 0.0 {
        return bad("the massless family requires mass = 0");
    }
    Ok(ResolvedMode {
        family,
        qn: QuantumNumbers {
            epsilon: eps,
            m,
            sigma: c64(sigma_re, sigma_im),
            lambda,
            mass,
        },
        radial: radial.into(),
        axial: axial.into(),
    })
}

fn build_mode(rm: &ResolvedMode) -> CliResult<ModeField> {
    let built = match rm.family {
        FamilyArg::Sigma => build_mode_sigma(rm.qn, rm.radial, rm.axial),
        FamilyArg::Sigma0 => build_mode_sigma0_massive(rm.qn, rm.radial, rm.axial),
        FamilyArg::Massless => scalar_master_potential(
            rm.qn.m,
            rm.qn.lambda,
            rm.qn.epsilon,
            0.0,
            rm.radial,
            rm.axial,
        )
        .and_then(|pot| build_mode_massless_gradient(pot, rm.qn.epsilon)),
    };
    built.map_err(|e| UsageError(e.to_string()))
}

fn resolve_grid(res: &mut Resolver, g: &GridCmdArgs) -> CliResult<Grid> {
    let r_min = res.f64("r-min", g.r_min, 0.5)?;
    let r_max = res.f64("r-max", g.r_max, 3.0)?;
    let n_r = res.int("n-r", g.n_r, 20usize)?;
    let z_min = res.f64("z-min", g.z_min, -1.0)?;
    let z_max = res.f64("z-max", g.z_max, 1.0)?;
    let n_z = res.int("n-z", g.n_z, 20usize)?;
    Grid::new(r_min, r_max, n_r, z_min, z_max, n_z).map_err(|e| UsageError(e.to_string()))
}

fn cmd_mode(mut res: Resolver, a: ModeCmdArgs) -> CliResult<bool> {
    let rm = resolve_mode(&mut res, &a.mode, FamilyArg::Sigma)?;
    let grid = resolve_grid(&mut res, &a.grid)?;
    let format = res.pick("format", a.out.format, FormatArg::Csv)?;
    let output = res.text_opt("output", a.out.output);
    let mode = build_mode(&rm)?;

    let payload = match format {
        FormatArg::Csv => {
            let mut s = csv_preamble("mode", &res.echo);
            s.push_str(MODE_CSV_HEADER);
            s.push('\n');
            for (r, z) in grid.points() {
                let _ = write!(s, "{},{}", fmt_f(r), fmt_f(z));
                for c in mode.sample(r, z).flatten() {
                    let _ = write!(s, ",{},{}", fmt_f(c.re), fmt_f(c.im));
                }
                s.push('\n');
            }
            s
        }
        FormatArg::Json => {
            let samples: Vec<Value> = grid
                .points()
                .into_iter()
                .map(|(r, z)| {
                    let t = mode.sample(r, z);
                    json!({
                        "r": jnum(r),
                        "z": jnum(z),
                        "phi0": jc(t.phi0),
                        "phi": t.phi.iter().copied().map(jc).collect::<Vec<_>>(),
                        "e": t.e.iter().copied().map(jc).collect::<Vec<_>>(),
                        "h": t.h.iter().copied().map(jc).collect::<Vec<_>>(),
                    })
                })
                .collect();
            pretty(json!({
                "config": json_config("mode", &res.echo),
                "samples": samples,
            }))
        }
    };

    let status = vec![format!("mode: sampled {} points", grid.len())];
    deliver(&payload, output.as_deref(), &status)?;
    Ok(true)
}

fn cmd_verify(mut res: Resolver, a: VerifyCmdArgs) -> CliResult<bool> {
    let system = res.pick("system", a.system, SystemArg::Full)?;
    let default_family = match system {
        SystemArg::Full | SystemArg::Helicity => FamilyArg::Sigma,
        SystemArg::Sigma0 | SystemArg::Scalar => FamilyArg::Sigma0,
        SystemArg::Massless => FamilyArg::Massless,
    };
    let rm = resolve_mode(&mut res, &a.mode, default_family)?;
    let grid = resolve_grid(&mut res, &a.grid)?;
    let h = res.f64("h", a.h, 1e-3)?;
    let fd_order = res.int("fd-order", a.fd_order, 2u32)?;
    let use_richardson = res.toggle("richardson", a.richardson)?;
    let tol = res.f64("tol", a.tol, 1e-6)?;
    let format = res.pick("format", a.out.format, FormatArg::Csv)?;
    let output = res.text_opt("output", a.out.output);

    let tag = system.tag();
    let scheme = match fd_order {
        2 => FdScheme::Order2,
        4 => FdScheme::Order4,
        other => return bad(format!("--fd-order must be 2 or 4, got {other}")),
    };
    if tag == SystemTag::Helicity12 && scheme == FdScheme::Order4 {
        return bad("the helicity system differentiates at order 2; drop --fd-order 4");
    }

    let mode = build_mode(&rm)?;
    let params: SystemParams = mode.quantum_numbers().into();
    let base = residual_system_with(&mode, params, &grid, h, tag, scheme)
        .map_err(|e| UsageError(e.to_string()))?;
    let report = if use_richardson {
        let fine = residual_system_with(&mode, params, &grid, h / 2.0, tag, scheme)
            .map_err(|e| UsageError(e.to_string()))?;
        richardson(&base, &fine).map_err(|e| UsageError(e.to_string()))?
    } else {
        base
    };

    let pass = report.max_relative() <= tol;
    let offending: Vec<&EquationResidual> = report
        .equations
        .iter()
        .filter(|eq| eq.max_rel > tol)
        .collect();

    let payload = match format {
        FormatArg::Csv => {
            let mut s = csv_preamble("verify", &res.echo);
            s.push_str("index,label,max_abs,rms_abs,max_rel,rms_rel,convergence_order\n");
            for eq in &report.equations {
                let order = eq.convergence_order.map(fmt_f).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{order}",
                    eq.index,
                    eq.label,
                    fmt_f(eq.max_abs),
                    fmt_f(eq.rms_abs),
                    fmt_f(eq.max_rel),
                    fmt_f(eq.rms_rel),
                );
            }
            let _ = writeln!(s, "# flagged_points = {}", report.flagged_points);
            let _ = writeln!(s, "# max_relative = {}", fmt_f(report.max_relative()));
            let _ = writeln!(s, "# tol = {}", fmt_f(tol));
            for eq in &offending {
                let _ = writeln!(
                    s,
                    "# offending: {} {} max_rel = {}",
                    eq.index,
                    eq.label,
                    fmt_f(eq.max_rel)
                );
            }
            let _ = writeln!(s, "# result = {}", verdict(pass));
            s
        }
        FormatArg::Json => pretty(json!({
            "config": json_config("verify", &res.echo),
            "report": serde_json::to_value(&report).expect("report serialization"),
            "tol": jnum(tol),
            "pass": pass,
            "offending": offending.iter().map(|eq| eq.label.clone()).collect::<Vec<_>>(),
        })),
    };

    let mut status = vec![format!(
        "verify {tag}: {} (max relative {}, tol {})",
        verdict(pass),
        fmt_f(report.max_relative()),
        fmt_f(tol),
    )];
    for eq in &offending {
        status.push(format!(
            "  eq {} ({}): max_rel = {}",
            eq.index,
            eq.label,
            fmt_f(eq.max_rel)
        ));
    }
    deliver(&payload, output.as_deref(), &status)?;
    Ok(pass)
}

fn cmd_dispersion(mut res: Resolver, a: DispersionCmdArgs) -> CliResult<bool> {
    let eps = res.f64("eps", a.eps, SQRT_2)?;
    let mass = res.f64("mass", a.mass, 1.0)?;
    let m = res.int("m", a.m, 1i32)?;
    let lambda = res.f64("lambda", a.lambda, 1.0)?;
    let range = res.text("kappa-range", a.kappa_range, "0:2:41")?;
    let radial = res.pick("radial", a.radial, RadialArg::J)?;
    let axial = res.pick("axial", a.axial, AxialArg::Decaying)?;
    let grid = resolve_grid(&mut res, &a.grid)?;
    let h = res.f64("h", a.h, 1e-3)?;
    let format = res.pick("format", a.out.format, FormatArg::Csv)?;
    let output = res.text_opt("output", a.out.output);

    if !(mass > 0.0) {
        return bad("--mass must be positive for a dispersion scan");
    }
    let kappas = parse_kappa_range(&range)?;

    let mut rows: Vec<(f64, f64, Option<f64>)> = Vec::with_capacity(kappas.len());
    for &kappa in &kappas {
        let sigma = c64(0.0, kappa);
        let closure = dispersion_residual(eps, sigma, mass);
        let system = if kappa == 0.0 {
            None
        } else {
            let qn = QuantumNumbers {
                epsilon: eps,
                m,
                sigma,
                lambda,
                mass,
            };
            let mode = build_mode_sigma(qn, radial.into(), axial.into())
                .map_err(|e| UsageError(format!("kappa = {kappa}: {e}")))?;
            let report = residual_system_with(
                &mode,
                qn.into(),
                &grid,
                h,
                SystemTag::Full9,
                FdScheme::Order2,
            )
            .map_err(|e| UsageError(e.to_string()))?;
            Some(report.max_relative())
        };
        rows.push((kappa, closure, system));
    }

    // First strict minimum wins, so ties resolve deterministically.
    let mut closure_min = (f64::NAN, f64::INFINITY);
    let mut system_min: Option<(f64, f64)> = None;
    for &(kappa, closure, system) in &rows {
        if closure < closure_min.1 {
            closure_min = (kappa, closure);
        }
        if let Some(sys) = system {
            if system_min.is_none_or(|(_, best)| sys < best) {
                system_min = Some((kappa, sys));
            }
        }
    }

    let payload = match format {
        FormatArg::Csv => {
            let mut s = csv_preamble("dispersion", &res.echo);
            s.push_str("kappa,closure_residual,system_max_rel\n");
            for &(kappa, closure, system) in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    fmt_f(kappa),
                    fmt_f(closure),
                    fmt_f(system.unwrap_or(f64::NAN))
                );
            }
            let _ = writeln!(s, "# closure_minimum_kappa = {}", fmt_f(closure_min.0));
            let _ = writeln!(
                s,
                "# system_minimum_kappa = {}",
                fmt_f(system_min.map_or(f64::NAN, |(k, _)| k))
            );
            let _ = writeln!(s, "# result = PASS");
            s
        }
        FormatArg::Json => {
            let jrows: Vec<Value> = rows
                .iter()
                .map(|&(kappa, closure, system)| {
                    json!({
                        "kappa": jnum(kappa),
                        "closure_residual": jnum(closure),
                        "system_max_rel": system.map(jnum).unwrap_or(Value::Null),
                    })
                })
                .collect();
            pretty(json!({
                "config": json_config("dispersion", &res.echo),
                "rows": jrows,
                "closure_minimum_kappa": jnum(closure_min.0),
                "system_minimum_kappa": system_min.map(|(k, _)| jnum(k)).unwrap_or(Value::Null),
                "pass": true,
            }))
        }
    };

    let status = vec![format!(
        "dispersion: closure minimum at kappa = {}, system minimum at kappa = {}",
        fmt_f(closure_min.0),
        fmt_f(system_min.map_or(f64::NAN, |(k, _)| k)),
    )];
    deliver(&payload, output.as_deref(), &status)?;
    Ok(true)
}

/// Parses "start:end:count" with inclusive endpoints into sample values.
fn parse_kappa_range(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return bad(format!(
            "--kappa-range expects start:end:count, got {text:?}"
        ));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| UsageError(format!("kappa-range start {:?} is not a number", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| UsageError(format!("kappa-range end {:?} is not a number", parts[1])))?;
    let n: usize = parts[2].trim().parse().map_err(|_| {
        UsageError(format!(
            "kappa-range count {:?} is not an integer",
            parts[2]
        ))
    })?;
    if !(a.is_finite() && b.is_finite()) {
        return bad("kappa-range endpoints must be finite");
    }
    if b <= a {
        return bad("kappa-range end must exceed start");
    }
    if n < 2 {
        return bad("kappa-range count must be at least 2");
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

fn cmd_specfun(mut res: Resolver, a: SpecfunCmdArgs) -> CliResult<bool> {
    let function = res.pick_required::<FnArg>("fn", a.function)?;
    let order = res.f64("order", a.order, 0.0)?;
    let arg = res.f64_required("arg", a.arg)?;
    let format = res.pick("format", a.out.format, FormatArg::Csv)?;
    let output = res.text_opt("output", a.out.output);

    let out = match function {
        FnArg::J => bessel_j(order, arg),
        FnArg::Y => bessel_y(order, arg),
        FnArg::I => bessel_i(order, arg),
        FnArg::K => bessel_k(order, arg),
        FnArg::Kimag => macdonald_imag_order(order, arg),
    }
    .map_err(|e| UsageError(e.to_string()))?;

    let payload = match format {
        FormatArg::Csv => {
            let mut s = csv_preamble("specfun", &res.echo);
            s.push_str("value,derivative\n");
            let _ = writeln!(s, "{},{}", fmt_f(out.value.re), fmt_f(out.derivative.re));
            let _ = writeln!(s, "# result = PASS");
            s
        }
        FormatArg::Json => pretty(json!({
            "config": json_config("specfun", &res.echo),
            "value": jnum(out.value.re),
            "derivative": jnum(out.derivative.re),
            "pass": true,
        })),
    };

    let status = vec![format!(
        "specfun: value = {}, derivative = {}",
        fmt_f(out.value.re),
        fmt_f(out.derivative.re),
    )];
    deliver(&payload, output.as_deref(), &status)?;
    Ok(true)
}
