//! Command-line front end: `bubble build|verify|evolve|classify|sweep|run`.
//!
//! Every invocation is first turned into a [`RunManifest`], which is written
//! next to the outputs so that `bubble run <out>/manifest.json` repeats it.

mod manifest;
mod sweep;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use manifest::{ManifestCommand, RunManifest, FORMAT_VERSION};
pub use sweep::{run_sweep, SweepEntry, SweepGrid, SweepRow};

use crate::catalogue::{build, BuildReport, ConfigurationSpec};
use crate::error::Error;
use crate::flow::{classify, evolve, write_trace_csv, Classification, Configuration, FlowParams};
use crate::geometry::{Cluster, LabeledMesh, ToleranceProfile};
use crate::io::{read_off, write_obj, write_off};
use crate::variation::{fit_multipliers, VariationReport};

/// Process exit codes. The numeric values are a stable contract.
///
/// | code | meaning |
/// |---|---|
/// | 0 | success |
/// | 1 | a check failed: sweep row, classification, convexity |
/// | 2 | usage, schema, JSON or mesh format error |
/// | 3 | the catalogue constructor rejected the spec |
/// | 4 | the flow did not converge (outputs are still written) |
/// | 5 | mesh degeneracy during the flow |
/// | 6 | verify: stationarity residual above tolerance |
/// | 7 | verify: junction angle outside tolerance |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitCode {
    Success = 0,
    CheckFailed = 1,
    InputError = 2,
    ConstructionError = 3,
    NonConvergence = 4,
    MeshDegeneracy = 5,
    ResidualAboveTolerance = 6,
    AngleOutOfTolerance = 7,
}

impl ExitCode {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Exit code for a library error.
    pub fn for_error(e: &Error) -> ExitCode {
        use Error::*;
        match e {
            Io(_) | Json(_) | Csv(_) | Format { .. } => ExitCode::InputError,
            NonPositiveVolume(_) | InvalidSpec(_) | NonEqualVolumes(_) | ResolutionTooCoarse { .. }
            | OverlapError(_) | TangencyOnInterface | VolumeOutOfRange { .. } | BranchAmbiguity { .. }
            | SolverFailure(_) | IntegrationFailure(_) | PinchOff { .. } => ExitCode::ConstructionError,
            NonConvergence { .. } => ExitCode::NonConvergence,
            MeshDegeneracy(_) => ExitCode::MeshDegeneracy,
            _ => ExitCode::CheckFailed,
        }
    }
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ExitCode, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError::new(ExitCode::InputError, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(ExitCode::for_error(&e), e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bubble", version, about = "Stationary convex bubble clusters: build, verify, evolve, classify")]
pub struct Cli {
    /// Tolerance profile: default, strict or loose.
    #[arg(long, global = true)]
    pub tolerance_profile: Option<String>,
    /// Seed overriding the one in the spec or flow parameters.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a catalogue configuration from a spec JSON file.
    Build { spec: PathBuf },
    /// Fit multipliers and junction angles for a labeled OFF mesh.
    Verify { mesh: PathBuf },
    /// Run the volume-preserving flow, then classify.
    Evolve {
        /// Spec JSON or labeled OFF mesh.
        input: PathBuf,
        /// Flow parameters JSON.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Classify a spec JSON or labeled OFF mesh.
    Classify { input: PathBuf },
    /// Build, verify and classify every row of a grid (default grid if omitted).
    Sweep { grid: Option<PathBuf> },
    /// Execute a run manifest.
    Run { manifest: PathBuf },
}

/// JSON schemas of every file the CLI reads or writes, keyed by file stem.
pub fn schemas() -> Vec<(&'static str, serde_json::Value)> {
    fn of<T: schemars::JsonSchema>() -> serde_json::Value {
        schemars::schema_for!(T).to_value()
    }
    vec![
        ("build_report", of::<BuildReport>()),
        ("classification", of::<Classification>()),
        ("configuration_spec", of::<ConfigurationSpec>()),
        ("flow_params", of::<FlowParams>()),
        ("run_manifest", of::<RunManifest>()),
        ("sweep_grid", of::<SweepGrid>()),
        ("verify_report", of::<VerifyReport>()),
    ]
}

/// Configures logging from `BUBBLE_LOG` (error, warn, info, debug).
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("BUBBLE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses arguments, runs the command and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::Success,
                _ => ExitCode::InputError,
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> CliResult<ExitCode> {
    let manifest = match &cli.command {
        Command::Run { manifest } => {
            let m = RunManifest::load(manifest)?;
            return execute(&m);
        }
        Command::Build { spec } => RunManifest::new(ManifestCommand::Build, Some(spec.clone()), None),
        Command::Verify { mesh } => RunManifest::new(ManifestCommand::Verify, Some(mesh.clone()), None),
        Command::Evolve { input, params } => RunManifest::new(ManifestCommand::Evolve, Some(input.clone()), params.clone()),
        Command::Classify { input } => RunManifest::new(ManifestCommand::Classify, Some(input.clone()), None),
        Command::Sweep { grid } => RunManifest::new(ManifestCommand::CatalogueSweep, grid.clone(), None),
    };
    let absolute = |p: &Path| std::path::absolute(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())));
    let manifest = RunManifest {
        input: manifest.input.as_deref().map(absolute).transpose()?,
        params: manifest.params.as_deref().map(absolute).transpose()?,
        out: absolute(&cli.out)?,
        seed: cli.seed,
        tolerance_profile: cli.tolerance_profile.clone(),
        ..manifest
    };
    manifest.check()?;
    execute(&manifest)
}

/// Executes a validated manifest and writes it into the output directory.
pub fn execute(m: &RunManifest) -> CliResult<ExitCode> {
    std::fs::create_dir_all(&m.out).map_err(|e| CliError::input(format!("{}: {e}", m.out.display())))?;
    write_json(&m.out.join("manifest.json"), m)?;
    let profile = profile(m.tolerance_profile.as_deref())?;
    match m.command {
        ManifestCommand::Build => cmd_build(m),
        ManifestCommand::Verify => cmd_verify(m, &profile),
        ManifestCommand::Evolve => cmd_evolve(m, &profile),
        ManifestCommand::Classify => cmd_classify(m, &profile),
        ManifestCommand::CatalogueSweep => cmd_sweep(m, &profile),
    }
}

fn profile(name: Option<&str>) -> CliResult<ToleranceProfile> {
    let name = name.unwrap_or("default");
    ToleranceProfile::named(name).ok_or_else(|| {
        CliError::input(format!(
            "unknown tolerance profile `{name}`; expected one of {:?}",
            ToleranceProfile::NAMES
        ))
    })
}

/// Pretty JSON with a trailing newline; key order follows the types.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Byte offset of a 1-based line and column in `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    start + column.saturating_sub(1)
}

/// Reads and deserializes JSON, reporting the byte offset of parse errors.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::input(format!(
            "{}: invalid JSON at byte {} (line {}, column {}): {e}",
            path.display(),
            byte_offset(&text, e.line(), e.column()),
            e.line(),
            e.column()
        ))
    })
}

fn is_off(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("off"))
}

fn stem(path: Option<&Path>, fallback: &str) -> String {
    path.and_then(|p| p.file_stem())
        .and_then(|s| s.to_str())
        .unwrap_or(fallback)
        .to_string()
}

fn load_spec(m: &RunManifest) -> CliResult<ConfigurationSpec> {
    let mut spec: ConfigurationSpec = match (&m.spec, &m.input) {
        (Some(v), _) => serde_json::from_value(v.clone()).map_err(|e| CliError::input(format!("inline spec: {e}")))?,
        (None, Some(p)) => read_json(p)?,
        (None, None) => return Err(CliError::input("no spec given")),
    };
    if let Some(seed) = m.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

/// Equivalent-ball radius of the smallest region, used to scale tolerances of
/// meshes that carry no construction record.
fn relative_edge(mesh: &LabeledMesh, volumes: &[f64]) -> f64 {
    let v = volumes.iter().cloned().fold(f64::INFINITY, f64::min);
    let r = (3.0 * v / (4.0 * std::f64::consts::PI)).cbrt();
    mesh.mean_edge_length() / r
}

fn cluster_from_off(path: &Path, profile: &ToleranceProfile) -> CliResult<Cluster> {
    let mesh = read_off(path).map_err(|e| match e {
        Error::Io(io) => CliError::input(format!("{}: {io}", path.display())),
        other => CliError::input(format!("{}: {other}", path.display())),
    })?;
    let mut c = Cluster::from_mesh(mesh);
    c.tolerance = profile.for_resolution(relative_edge(&c.mesh, &c.target_volumes));
    Ok(c)
}

fn load_cluster(m: &RunManifest, profile: &ToleranceProfile) -> CliResult<Cluster> {
    match &m.input {
        Some(p) if is_off(p) && m.spec.is_none() => cluster_from_off(p, profile),
        _ => {
            let spec = load_spec(m)?;
            let mut c = build(&spec)?;
            let freq = c.construction.as_ref().map_or(20, |k| k.frequency.max(1));
            c.tolerance = profile.for_resolution(1.0 / freq as f64);
            Ok(c)
        }
    }
}

fn write_meshes(out: &Path, stem: &str, mesh: &LabeledMesh) -> CliResult<()> {
    write_off(mesh, &out.join(format!("{stem}.off")))?;
    write_obj(mesh, &out.join(format!("{stem}.obj")))?;
    Ok(())
}

fn cmd_build(m: &RunManifest) -> CliResult<ExitCode> {
    let spec = load_spec(m)?;
    let cluster = build(&spec)?;
    let name = stem(m.input.as_deref(), "mesh");
    write_meshes(&m.out, &name, &cluster.mesh)?;
    let report = BuildReport::new(&cluster);
    write_json(&m.out.join(format!("{name}.report.json")), &report)?;
    println!(
        "built {} ({}): {} vertices, {} faces, volumes {:?}",
        report.kind, report.branch, report.vertices, report.faces, report.achieved_volumes
    );
    Ok(ExitCode::Success)
}

/// Output of `bubble verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
pub struct VerifyReport {
    pub passed: bool,
    /// Failed predicates in evaluation order.
    pub failed: Vec<String>,
    pub tolerance: ToleranceProfile,
    pub volumes: Vec<f64>,
    pub report: VariationReport,
}

/// Residual and junction-angle checks against the cluster's tolerance.
pub fn verify_cluster(c: &Cluster) -> crate::Result<(VerifyReport, ExitCode)> {
    let report = fit_multipliers(c)?;
    let tol = &c.tolerance;
    let mut failed = Vec::new();
    let mut code = ExitCode::Success;
    if !(report.residual_rel <= tol.residual_rel) {
        failed.push(format!("residual_rel {:.4e} > {:.4e}", report.residual_rel, tol.residual_rel));
        code = ExitCode::ResidualAboveTolerance;
    }
    let worst = report.worst_angle_deviation();
    if worst > tol.angle_deg {
        failed.push(format!("junction angle deviation {worst:.4}° > {}°", tol.angle_deg));
        if code == ExitCode::Success {
            code = ExitCode::AngleOutOfTolerance;
        }
    }
    Ok((
        VerifyReport {
            passed: failed.is_empty(),
            failed,
            tolerance: tol.clone(),
            volumes: c.volumes(),
            report,
        },
        code,
    ))
}

fn cmd_verify(m: &RunManifest, profile: &ToleranceProfile) -> CliResult<ExitCode> {
    let path = m.input.as_deref().ok_or_else(|| CliError::input("verify needs a mesh"))?;
    let c = cluster_from_off(path, profile)?;
    let (report, code) = verify_cluster(&c)?;
    write_json(&m.out.join(format!("{}.verify.json", stem(Some(path), "mesh"))), &report)?;
    println!(
        "lambdas {:?}, residual_rel {:.4e}, worst angle deviation {:.4}°",
        report.report.lambdas,
        report.report.residual_rel,
        report.report.worst_angle_deviation()
    );
    for f in &report.failed {
        eprintln!("failed: {f}");
    }
    Ok(code)
}

fn classification_code(cl: &Classification) -> ExitCode {
    if cl.configuration == Configuration::Unclassified {
        ExitCode::CheckFailed
    } else {
        ExitCode::Success
    }
}

fn report_classification(cl: &Classification) {
    println!("{} -> {:?}", cl.case_label, cl.configuration);
    for f in &cl.failed {
        eprintln!("failed: {f}");
    }
}

fn cmd_classify(m: &RunManifest, profile: &ToleranceProfile) -> CliResult<ExitCode> {
    let c = load_cluster(m, profile)?;
    let cl = classify(&c)?;
    write_json(&m.out.join(format!("{}.classification.json", stem(m.input.as_deref(), "cluster"))), &cl)?;
    report_classification(&cl);
    Ok(classification_code(&cl))
}

fn cmd_evolve(m: &RunManifest, profile: &ToleranceProfile) -> CliResult<ExitCode> {
    let cluster = load_cluster(m, profile)?;
    let mut params: FlowParams = match (&m.flow, &m.params) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => read_json(p)?,
        (None, None) => FlowParams::default(),
    };
    if let Some(seed) = m.seed {
        params.seed = seed;
    }
    let out = evolve(&cluster, &params)?;
    let name = stem(m.input.as_deref(), "cluster");
    write_meshes(&m.out, &format!("{name}.final"), &out.cluster.mesh)?;
    let trace_path = m.out.join(format!("{name}.trace.csv"));
    let file = std::fs::File::create(&trace_path).map_err(|e| CliError::input(format!("{}: {e}", trace_path.display())))?;
    write_trace_csv(&out.trace, out.cluster.k, std::io::BufWriter::new(file))?;
    println!(
        "{} steps, residual_rel {:.4e} -> {:.4e} ({})",
        out.trace.len() - 1,
        out.initial_residual(),
        out.final_residual(),
        out.stop_reason
    );
    let classification = classify(&out.cluster);
    if let Ok(cl) = &classification {
        write_json(&m.out.join(format!("{name}.classification.json")), cl)?;
    }
    if !out.converged {
        eprintln!(
            "error: {}",
            Error::NonConvergence {
                steps: out.trace.len() - 1,
                residual_rel: out.final_residual()
            }
        );
        return Ok(ExitCode::NonConvergence);
    }
    let cl = classification?;
    report_classification(&cl);
    Ok(classification_code(&cl))
}

fn cmd_sweep(m: &RunManifest, profile: &ToleranceProfile) -> CliResult<ExitCode> {
    let grid: SweepGrid = match &m.input {
        Some(p) => read_json(p)?,
        None => SweepGrid::default_grid(),
    };
    let rows = run_sweep(&grid.expand(), profile);
    let path = m.out.join("sweep.csv");
    let file = std::fs::File::create(&path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    sweep::write_rows(&rows, file)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    println!("{} rows, {failed} failed", rows.len());
    for r in rows.iter().filter(|r| !r.passed) {
        eprintln!("row {} ({}): {}", r.index, r.kind, r.message);
    }
    Ok(if failed == 0 { ExitCode::Success } else { ExitCode::CheckFailed })
}
