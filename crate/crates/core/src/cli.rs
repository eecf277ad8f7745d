//! Command-line front end: loads a run configuration, dispatches to a pipeline
//! and writes the report files.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::{Command, Format, RunConfig};
use crate::eigen::{refine_and_extrapolate, smallest_eigenpairs_with, ConvergenceTable, SolverOptions, SpectralReport};
use crate::error::{Error, Result};
use crate::expr::CoefficientExpr;
use crate::forms::{assemble_pencil, options_for};
use crate::geometry::{self, DistanceEval, Domain, SuperharmonicityReport, Verdict};
use crate::hardy::{lambda_bound, verify_hardy, CertificateVerdict, HardyBoundSpec, HardyCertificate, LambdaMethod};
use crate::mesh::{axisymmetric_reduce, build_mesh_1d, build_trimesh, grading_for_ratio, Mesh, MeshSummary};
use crate::report::{to_json, write_atomic, Report, EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK};
use crate::spectral::{
    check_form_nonnegativity, check_pointwise_criterion, discreteness_diagnostic, persson_sequence, CriterionReport,
    Discreteness, ProblemSpec,
};

#[derive(Debug, Parser)]
#[command(name = "hardylab", version, about = "Hardy inequalities and discreteness of spectra for degenerate elliptic forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Distance function, its gradient and Laplacian; superharmonicity scans.
    Distance(RunArgs),
    /// Certify a weighted Hardy inequality on a refinement ladder.
    Hardy(RunArgs),
    /// Smallest eigenvalues of a form on the whole domain.
    Spectrum(RunArgs),
    /// Strip minima μ_k for δ_k = 1/k.
    Persson(RunArgs),
    /// Pointwise and form criteria for the negative part of the potential.
    Criteria(RunArgs),
    /// Full discreteness diagnostic.
    Diagnose(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the eigensolver start vectors (overrides `[numerics] seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Validate the configuration and build meshes without solving.
    #[arg(long)]
    pub dry_run: bool,
    /// Output formats, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

impl CliCommand {
    fn parts(&self) -> (Command, &RunArgs) {
        match self {
            CliCommand::Distance(a) => (Command::Distance, a),
            CliCommand::Hardy(a) => (Command::Hardy, a),
            CliCommand::Spectrum(a) => (Command::Spectrum, a),
            CliCommand::Persson(a) => (Command::Persson, a),
            CliCommand::Criteria(a) => (Command::Criteria, a),
            CliCommand::Diagnose(a) => (Command::Diagnose, a),
        }
    }
}

/// What a pipeline produced: a status word, exit code, JSON payload and optional CSV.
pub struct Outcome {
    pub status: String,
    pub exit_code: i32,
    pub result: serde_json::Value,
    pub csv: Option<String>,
}

impl Outcome {
    fn new<T: Serialize>(status: &str, exit_code: i32, result: &T, csv: Option<String>) -> Self {
        Outcome {
            status: status.into(),
            exit_code,
            result: serde_json::to_value(result).expect("result serializes"),
            csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEvaluation {
    pub point: Vec<f64>,
    pub analytic: DistanceEval,
    pub finite_difference: Option<DistanceEval>,
    /// Largest difference over `d`, `∇d`, `−Δd` between both evaluations.
    pub max_difference: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub evaluations: Vec<PointEvaluation>,
    pub scan: Option<SuperharmonicityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub spectrum: SpectralReport,
    pub convergence: Option<ConvergenceTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaResult {
    pub pointwise: CriterionReport,
    pub form: CriterionReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DryRun {
    pub meshes: Vec<MeshSummary>,
}

fn difference(a: &DistanceEval, b: &DistanceEval) -> f64 {
    let mut m = (a.d - b.d).abs().max((a.neg_laplacian - b.neg_laplacian).abs());
    for i in 0..3 {
        m = m.max((a.grad[i] - b.grad[i]).abs());
    }
    m
}

fn run_distance(cfg: &RunConfig) -> Result<Outcome> {
    let dom = &cfg.domain;
    let mut evaluations = Vec::new();
    for p in &cfg.distance.points {
        let analytic = geometry::distance_calculus(dom, p, 0.0)?;
        let fd = match cfg.distance.fd_step {
            Some(h) => {
                let h = if h > 0.0 { h } else { geometry::default_fd_step(dom) };
                Some(geometry::distance_calculus_fd(dom, p, h)?)
            }
            None => None,
        };
        let max_difference = fd.as_ref().map(|f| difference(&analytic, f));
        evaluations.push(PointEvaluation { point: p.clone(), analytic, finite_difference: fd, max_difference });
    }
    let scan = match &cfg.distance.scan {
        Some(region) => Some(geometry::superharmonicity_scan(dom, region.clone(), cfg.distance.resolution.unwrap_or(200))?),
        None => None,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["point", "d", "grad", "neg_laplacian", "near_ridge"]).unwrap();
    for e in &evaluations {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(" ");
        w.write_record([
            join(&e.point),
            format!("{:.17e}", e.analytic.d),
            join(&e.analytic.grad),
            format!("{:.17e}", e.analytic.neg_laplacian),
            e.analytic.near_ridge.to_string(),
        ])
        .unwrap();
    }
    let csv = String::from_utf8(w.into_inner().unwrap()).unwrap();
    let (status, code) = match scan.as_ref().map(|s| s.verdict) {
        Some(Verdict::Pass) => ("PASS", EXIT_OK),
        Some(Verdict::Fail) => ("FAIL", EXIT_NEGATIVE),
        None => ("OK", EXIT_OK),
    };
    Ok(Outcome::new(status, code, &DistanceResult { evaluations, scan }, Some(csv)))
}

fn hardy_bound(cfg: &RunConfig) -> Result<HardyBoundSpec> {
    let beta = cfg.form.beta.unwrap_or(0.0);
    match cfg.lambda_method()? {
        LambdaMethod::None => HardyBoundSpec::manual(beta, cfg.hardy.alpha.unwrap_or(0.0), cfg.hardy.lambda.unwrap_or(0.0)),
        method => lambda_bound(&cfg.domain, method, beta),
    }
}

fn solver(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { tol: cfg.tol(), seed: cfg.seed(), ..SolverOptions::default() }
}

fn run_hardy(cfg: &RunConfig) -> Result<Outcome> {
    let bound = hardy_bound(cfg)?;
    let cert: HardyCertificate = verify_hardy(&cfg.domain, &bound, &cfg.ladder(), &solver(cfg))?;
    let (status, code) = match cert.verdict {
        CertificateVerdict::Certified => ("CERTIFIED", EXIT_OK),
        CertificateVerdict::Inconclusive => ("INCONCLUSIVE", EXIT_NEGATIVE),
    };
    let csv = cert.to_csv();
    Ok(Outcome::new(status, code, &cert, Some(csv)))
}

/// Whole-domain mesh for `spectrum` (the torus is meshed in its cross-section).
fn spectrum_mesh(cfg: &RunConfig) -> Result<Mesh> {
    let n = &cfg.numerics;
    let domain = match &cfg.domain {
        Domain::Torus { .. } => axisymmetric_reduce(&cfg.domain, 0)?.cross_section,
        d => d.clone(),
    };
    Ok(match &domain {
        Domain::Interval { .. } => {
            let elements = n.n.unwrap_or(256);
            let g = n.size_ratio.map(|r| grading_for_ratio(elements, r)).unwrap_or(1.0);
            Mesh::OneD(build_mesh_1d(&domain, elements, g)?)
        }
        _ => {
            let h = n.h.unwrap_or(geometry::interior_diameter(&domain) / 8.0);
            Mesh::TwoD(build_trimesh(&domain, h, n.grading.unwrap_or(1.0))?)
        }
    })
}

fn run_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let mut form = cfg.form.form();
    if let Domain::Torus { .. } = cfg.domain {
        let red = axisymmetric_reduce(&cfg.domain, cfg.numerics.mode.unwrap_or(0))?;
        if red.mode > 0 {
            form.q = CoefficientExpr::parse(&format!("({}) + ({}) * ({})", form.q.source(), form.a.source(), red.potential.source()))?;
        }
    }
    let weight = cfg.form.weight.clone().unwrap_or_else(|| CoefficientExpr::constant(1.0));
    let opts = options_for(&cfg.domain);
    let solver = solver(cfg);
    let base = spectrum_mesh(cfg)?;
    let pencil = assemble_pencil(&base, &form, &weight, &opts)?;
    let count = cfg.numerics.count.unwrap_or(5).min(pencil.dof());
    let mut spectrum = smallest_eigenpairs_with(&pencil, count, &solver)?;
    spectrum.mesh = Some(base.summary());
    let levels = cfg.numerics.levels.unwrap_or(1);
    let convergence = if levels >= 3 {
        Some(refine_and_extrapolate(
            levels,
            |l| assemble_pencil(&base.refine_times(l)?, &form, &weight, &opts),
            &solver,
        )?)
    } else {
        None
    };
    let csv = spectrum.to_csv();
    Ok(Outcome::new("OK", EXIT_OK, &SpectrumResult { spectrum, convergence }, Some(csv)))
}

fn run_persson(problem: &ProblemSpec) -> Result<Outcome> {
    let seq = persson_sequence(problem)?;
    let csv = seq.to_csv();
    Ok(Outcome::new("OK", EXIT_OK, &seq, Some(csv)))
}

fn criteria_csv(reports: &[&CriterionReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["criterion", "verdict", "worst_margin", "k", "level", "dof", "minimum"]).unwrap();
    for r in reports {
        let name = serde_json::to_value(r.criterion).unwrap().as_str().unwrap().to_string();
        let verdict = serde_json::to_value(r.verdict).unwrap().as_str().unwrap().to_string();
        if r.levels.is_empty() {
            w.write_record([name.clone(), verdict.clone(), format!("{:.17e}", r.worst_margin), r.k.to_string(), String::new(), String::new(), String::new()])
                .unwrap();
        }
        for l in &r.levels {
            w.write_record([
                name.clone(),
                verdict.clone(),
                format!("{:.17e}", r.worst_margin),
                r.k.to_string(),
                l.level.to_string(),
                l.dof.to_string(),
                format!("{:.17e}", l.minimum),
            ])
            .unwrap();
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn run_criteria(problem: &ProblemSpec) -> Result<Outcome> {
    let pointwise = check_pointwise_criterion(problem, problem.remainder, problem.samples)?;
    let form = check_form_nonnegativity(problem, problem.k0())?;
    let pass = pointwise.verdict == Verdict::Pass && form.verdict == Verdict::Pass;
    let csv = criteria_csv(&[&pointwise, &form]);
    let (status, code) = if pass { ("PASS", EXIT_OK) } else { ("FAIL", EXIT_NEGATIVE) };
    Ok(Outcome::new(status, code, &CriteriaResult { pointwise, form }, Some(csv)))
}

fn run_diagnose(problem: &ProblemSpec) -> Result<Outcome> {
    let rep = discreteness_diagnostic(problem)?;
    let csv = rep.persson.as_ref().map(|s| s.to_csv());
    let (status, code) = match rep.verdict {
        Discreteness::Discrete => ("DISCRETE", EXIT_OK),
        Discreteness::Inconclusive => ("INCONCLUSIVE", EXIT_NEGATIVE),
    };
    Ok(Outcome::new(status, code, &rep, csv))
}

fn dry_run(cfg: &RunConfig) -> Result<Outcome> {
    let meshes: Vec<Mesh> = match cfg.command {
        Command::Distance => Vec::new(),
        Command::Hardy => {
            hardy_bound(cfg)?;
            cfg.ladder().meshes(&cfg.domain)?
        }
        Command::Spectrum => vec![spectrum_mesh(cfg)?],
        Command::Persson | Command::Criteria | Command::Diagnose => {
            let p = cfg.problem()?;
            p.k_values.iter().map(|&k| p.strip_mesh(k)).collect::<Result<_>>()?
        }
    };
    let summaries = meshes.iter().map(Mesh::summary).collect();
    Ok(Outcome::new("VALID", EXIT_OK, &DryRun { meshes: summaries }, None))
}

/// Runs the configured pipeline.
pub fn execute(cfg: &RunConfig, dry: bool) -> Result<Outcome> {
    if dry {
        return dry_run(cfg);
    }
    match cfg.command {
        Command::Distance => run_distance(cfg),
        Command::Hardy => run_hardy(cfg),
        Command::Spectrum => run_spectrum(cfg),
        Command::Persson => run_persson(&cfg.problem()?),
        Command::Criteria => run_criteria(&cfg.problem()?),
        Command::Diagnose => run_diagnose(&cfg.problem()?),
    }
}

/// Loads the config named by `args`, applying command-line overrides.
pub fn resolve(command: Command, args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if cfg.command != command {
        return Err(Error::Config {
            field: "command".into(),
            message: format!("config is for `{}` but `{}` was invoked", cfg.command.name(), command.name()),
        });
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.numerics.seed = Some(seed);
    }
    if let Some(f) = &args.format {
        cfg.output.formats = f.clone();
    }
    Ok(cfg)
}

/// Files written by a run.
pub struct RunFiles {
    pub report: Report,
    pub written: Vec<PathBuf>,
}

/// Runs one invocation and writes its files. Errors become an `ERROR` report
/// whenever an output directory is known.
pub fn run(cli: &Cli) -> RunFiles {
    let (command, args) = cli.command.parts();
    let cfg = match resolve(command, args) {
        Ok(c) => c,
        Err(e) => {
            let report = Report::new(command.name(), "ERROR", EXIT_ERROR, None).with_error(&e);
            let written = args
                .out
                .as_ref()
                .and_then(|dir| write_atomic(&dir.join(format!("{}.json", command.name())), &to_json(&report)).ok())
                .into_iter()
                .collect();
            return RunFiles { report, written };
        }
    };
    let (report, csv) = match execute(&cfg, args.dry_run) {
        Ok(o) => {
            let mut r = Report::new(command.name(), &o.status, o.exit_code, Some(cfg.clone()));
            r.result = Some(o.result);
            (r, o.csv)
        }
        Err(e) => (Report::new(command.name(), "ERROR", EXIT_ERROR, Some(cfg.clone())).with_error(&e), None),
    };
    let mut written = Vec::new();
    let dir = &cfg.output.dir;
    let mut failure = None;
    if cfg.output.formats.contains(&Format::Json) || report.exit_code == EXIT_ERROR {
        match write_atomic(&dir.join(format!("{}.json", command.name())), &to_json(&report)) {
            Ok(p) => written.push(p),
            Err(e) => failure = Some(e),
        }
    }
    if let (true, Some(csv)) = (cfg.output.formats.contains(&Format::Csv), csv) {
        match write_atomic(&dir.join(format!("{}.csv", command.name())), &csv) {
            Ok(p) => written.push(p),
            Err(e) => failure = Some(e),
        }
    }
    match failure {
        Some(e) => RunFiles { report: Report::new(command.name(), "ERROR", EXIT_ERROR, Some(cfg)).with_error(&e), written },
        None => RunFiles { report, written },
    }
}

/// Entry point shared by the binary and tests; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let files = run(&cli);
    let r = &files.report;
    match &r.error {
        Some(err) => eprintln!("{}: {} ({})", r.command, err.message, err.kind),
        None => println!("{}: {}", r.command, r.status),
    }
    for p in &files.written {
        println!("  wrote {}", p.display());
    }
    r.exit_code
}
