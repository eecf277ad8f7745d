//! Boundary-strip exhaustion for the bottom of the essential spectrum, the
//! pointwise and form-level criteria for a Hardy-dominated negative part of
//! the potential, and the resulting discreteness diagnostic.
//!
//! Strips are `{0 < d < 1/k}`. On each strip the form is restricted to
//! functions vanishing on the inner interface `{d = 1/k}` and on ∂Ω.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{smallest_eigenpairs_with, SolverOptions};
use crate::error::{Error, Result};
use crate::expr::{CoefficientExpr, EvalPoint, Var};
use crate::forms::{assemble_pencil, options_for, AssemblyOptions, FormSpec};
use crate::geometry::{self, Domain, Verdict};
use crate::hardy::kappa;
use crate::mesh::{axisymmetric_reduce, build_mesh_1d_aligned, build_trimesh, grading_for_ratio, Mesh, StripSpec};

/// Tolerance of pointwise criteria (pure arithmetic).
pub const POINTWISE_TOL: f64 = 1e-8;
/// Tolerance of form criteria (discretization limited).
pub const FORM_TOL: f64 = 1e-4;
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Slack on the fitted growth exponent in the discreteness verdict.
pub const EXPONENT_SLACK: f64 = 0.1;

/// How strip meshes are built for each `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshRecipe {
    /// 1D: elements across each boundary strip.
    pub n_strip: usize,
    /// 1D: smallest/largest element ratio inside a strip when grading is on.
    pub size_ratio: f64,
    /// 2D: target size away from the boundary (`None`: `D_int / 8`), capped at `δ_k / 6`.
    pub h: Option<f64>,
    /// 2D boundary grading; `None` picks 0.15 for singular data and 1 otherwise.
    pub grading: Option<f64>,
    /// Force graded (`Some(true)`) or uniform (`Some(false)`) meshes.
    pub graded: Option<bool>,
}

impl Default for MeshRecipe {
    fn default() -> Self {
        MeshRecipe { n_strip: 200, size_ratio: 1e-6, h: None, grading: None, graded: None }
    }
}

/// Boundary condition on the inner strip interface for the form criterion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceCondition {
    /// Functions vanish on the interface and on ∂Ω.
    #[default]
    Dirichlet,
    /// Functions vanish on ∂Ω only; the interface is free.
    Free,
}

/// Remainder term `λ d^α` of the Hardy inequality used by the pointwise criterion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Remainder {
    pub lambda: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub form: FormSpec,
    pub gamma: f64,
    /// Increasing strip indices; `δ_k = 1/k`, the first entry is `k₀`.
    pub k_values: Vec<usize>,
    #[serde(default)]
    pub mesh: MeshRecipe,
    #[serde(default)]
    pub interface: InterfaceCondition,
    #[serde(default)]
    pub remainder: Remainder,
    #[serde(default = "default_levels")]
    pub form_levels: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub solver: SolverOptions,
}

fn default_levels() -> usize {
    3
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl ProblemSpec {
    pub fn new(domain: Domain, form: FormSpec, gamma: f64, k_values: Vec<usize>) -> Self {
        let solver = if domain.dimension() == 1 { SolverOptions::default() } else { SolverOptions::with_tol(crate::eigen::DEFAULT_TOL_2D) };
        ProblemSpec {
            domain,
            form,
            gamma,
            k_values,
            mesh: MeshRecipe::default(),
            interface: InterfaceCondition::default(),
            remainder: Remainder::default(),
            form_levels: default_levels(),
            samples: DEFAULT_SAMPLES,
            solver,
        }
    }

    pub fn k0(&self) -> usize {
        self.k_values[0]
    }

    pub fn beta(&self) -> f64 {
        self.form.beta_or_zero()
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.form.validate()?;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("γ = {} must lie in (0, 1)", self.gamma)));
        }
        if self.k_values.is_empty() || self.k_values[0] == 0 || self.k_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!("k values must be positive and increasing, got {:?}", self.k_values)));
        }
        if self.domain.dimension() == 3 && !matches!(self.domain, Domain::Torus { .. }) {
            return Err(Error::InvalidArgument("3D computations are only available for the torus".into()));
        }
        if let Some(sigma) = &self.form.sigma {
            // The boundary carries the Dirichlet condition here; a Robin coefficient
            // would act on ∂Ω, outside every Ω_k, where its negative part must vanish.
            if !sigma.is_zero() {
                return Err(Error::InvalidArgument(
                    "strip computations take Dirichlet conditions on all of ∂Ω; remove the boundary coefficient".into(),
                ));
            }
        }
        if self.samples == 0 || self.form_levels == 0 {
            return Err(Error::InvalidArgument("samples and form_levels must be positive".into()));
        }
        Ok(())
    }

    /// Domain on which meshes live (the torus is reduced to its cross-section).
    fn mesh_domain(&self) -> Result<Domain> {
        match &self.domain {
            Domain::Torus { .. } => Ok(axisymmetric_reduce(&self.domain, 0)?.cross_section),
            d => Ok(d.clone()),
        }
    }

    fn assembly(&self) -> AssemblyOptions {
        options_for(&self.domain)
    }

    fn singular(&self) -> bool {
        self.form.a.uses(Var::D) || self.form.q.uses(Var::D)
    }

    fn graded(&self) -> bool {
        self.mesh.graded.unwrap_or_else(|| self.singular() || !self.form.q.is_zero())
    }

    /// Mesh of the strip `{d < 1/k}` with Dirichlet nodes on ∂Ω and the inner interface.
    pub fn strip_mesh(&self, k: usize) -> Result<Mesh> {
        let delta = 1.0 / k as f64;
        let strip = StripSpec::touching(delta);
        let domain = self.mesh_domain()?;
        let reach = geometry::max_distance(&domain);
        let full = match &domain {
            Domain::Interval { .. } => {
                let g = if self.graded() { grading_for_ratio(2 * self.mesh.n_strip, self.mesh.size_ratio) } else { 1.0 };
                Mesh::OneD(build_mesh_1d_aligned(&domain, delta.min(reach), self.mesh.n_strip, g)?)
            }
            _ => {
                let dint = geometry::interior_diameter(&domain);
                let h = self.mesh.h.unwrap_or(dint / 8.0).min(delta.min(reach) / 6.0);
                let g = self.mesh.grading.unwrap_or(if self.graded() { 0.15 } else { 1.0 });
                Mesh::TwoD(build_trimesh(&domain, h, g)?)
            }
        };
        full.restrict_to_strip(&strip)
    }
}

/// Radical inverse of `i` in `base`.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut f = inv;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    inv = out;
    inv
}

/// Up to `count` Halton points of `domain` with `0 < d < delta`, in sequence order.
pub fn halton_strip_samples(domain: &Domain, delta: f64, count: usize) -> Vec<(Vec<f64>, f64)> {
    const BASES: [u64; 3] = [2, 3, 5];
    let (lo, hi) = domain.bounding_box();
    let dim = lo.len();
    let mut out = Vec::with_capacity(count);
    let budget = (count as u64).saturating_mul(10_000).max(100_000);
    let mut i = 1u64;
    while out.len() < count && i <= budget {
        let p: Vec<f64> = (0..dim).map(|j| lo[j] + (hi[j] - lo[j]) * radical_inverse(i, BASES[j])).collect();
        let d = geometry::signed_distance(domain, &p);
        if d > 0.0 && d < delta {
            out.push((p, d));
        }
        i += 1;
    }
    out
}

fn eval_at(cylindrical: bool, p: &[f64], d: f64) -> EvalPoint {
    if cylindrical {
        EvalPoint::cylindrical(p[0], p[1], d)
    } else {
        EvalPoint::cartesian(p, d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// `q₋ ≤ (1−γ)κ(β) d^{β−2}` at sample points.
    PointwiseHardy,
    /// `q₋ ≤ (1−γ)[κ(β) d^{β−2} + λ d^α]` at sample points.
    PointwiseRemainder,
    /// `(1−γ)∫a|∇u|² − ∫q₋|u|² ≥ 0` on the strip, by a refinement ladder.
    FormNonnegativity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormLevel {
    pub level: usize,
    pub dof: usize,
    pub min_element_size: f64,
    pub minimum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: CriterionKind,
    pub verdict: Verdict,
    pub worst_margin: f64,
    /// Sample point (pointwise) or `[k]` (form).
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<FormLevel>,
}

/// Samples `margin = (1−γ)[κ(β)d^{β−2} + λd^α] − q₋` on `{0 < d < 1/k₀}`.
pub fn check_pointwise_criterion(problem: &ProblemSpec, remainder: Remainder, samples: usize) -> Result<CriterionReport> {
    problem.validate()?;
    if !(remainder.lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("λ = {} must be non-negative", remainder.lambda)));
    }
    let beta = problem.beta();
    let domain = problem.mesh_domain()?;
    let cylindrical = matches!(problem.domain, Domain::Torus { .. });
    let k0 = problem.k0();
    let pts = halton_strip_samples(&domain, 1.0 / k0 as f64, samples);
    if pts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let kap = kappa(beta);
    let mut worst = f64::INFINITY;
    let mut worst_point = Vec::new();
    for (p, d) in &pts {
        let ep = eval_at(cylindrical, p, *d);
        let allowed = (1.0 - problem.gamma) * (kap * d.powf(beta - 2.0) + remainder.lambda * d.powf(remainder.alpha));
        let margin = allowed - problem.form.q.eval_neg(&ep);
        if margin < worst || margin.is_nan() {
            worst = margin;
            worst_point = p.clone();
        }
    }
    let pass = worst >= -POINTWISE_TOL;
    Ok(CriterionReport {
        criterion: if remainder.lambda > 0.0 { CriterionKind::PointwiseRemainder } else { CriterionKind::PointwiseHardy },
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        worst_margin: worst,
        worst_point,
        tolerance: POINTWISE_TOL,
        k: k0,
        samples: Some(pts.len()),
        levels: Vec::new(),
    })
}

/// Numerator `(1−γ)a` with potential `−q₋`.
fn domination_form(problem: &ProblemSpec) -> Result<FormSpec> {
    let a = CoefficientExpr::parse(&format!("{:e} * ({})", 1.0 - problem.gamma, problem.form.a.source()))?;
    let q = if problem.form.q.is_zero() {
        CoefficientExpr::constant(0.0)
    } else {
        CoefficientExpr::parse(&format!("-neg({})", problem.form.q.source()))?
    };
    Ok(FormSpec::new(a, q))
}

/// Smallest value of `[(1−γ)∫a|∇u|² − ∫q₋|u|²] / ∫|u|²` on the strip `{d < 1/k}`
/// over `form_levels` nested refinements; passes when no level drops below `−FORM_TOL`.
pub fn check_form_nonnegativity(problem: &ProblemSpec, k: usize) -> Result<CriterionReport> {
    problem.validate()?;
    let form = domination_form(problem)?;
    let mut mesh = problem.strip_mesh(k)?;
    if problem.interface == InterfaceCondition::Free {
        mesh = mesh.release_interface();
    }
    let opts = problem.assembly();
    let one = CoefficientExpr::constant(1.0);
    let mut levels = Vec::with_capacity(problem.form_levels);
    for level in 0..problem.form_levels {
        if level > 0 {
            mesh = mesh.refine()?;
        }
        let pencil = assemble_pencil(&mesh, &form, &one, &opts)?;
        let report = smallest_eigenpairs_with(&pencil, 1, &problem.solver)?;
        levels.push(FormLevel {
            level,
            dof: pencil.dof(),
            min_element_size: mesh.min_element_size(),
            minimum: report.eigenvalues[0],
        });
    }
    let worst = levels.iter().map(|l| l.minimum).fold(f64::INFINITY, f64::min);
    Ok(CriterionReport {
        criterion: CriterionKind::FormNonnegativity,
        verdict: if worst >= -FORM_TOL { Verdict::Pass } else { Verdict::Fail },
        worst_margin: worst,
        worst_point: vec![k as f64],
        tolerance: FORM_TOL,
        k,
        samples: None,
        levels,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerssonEntry {
    pub k: usize,
    pub delta: f64,
    pub dof: usize,
    pub mu: f64,
    pub residual: f64,
    /// `κ(β) k^{2−β}`, present when `a = d^β` and `q ≥ 0` on the strip.
    pub strip_bound: Option<f64>,
    /// `γ κ(β) k^{2−β}`.
    pub criterion_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerssonSequence {
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub entries: Vec<PerssonEntry>,
    /// Least-squares slope of `log μ_k` against `log k` (absent if some `μ_k ≤ 0`).
    pub fitted_exponent: Option<f64>,
}

impl PerssonSequence {
    /// `k,delta,dof,mu,bound` with the strip bound when it applies.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "delta", "dof", "mu", "bound"]).unwrap();
        for e in &self.entries {
            w.write_record([
                e.k.to_string(),
                format!("{:.17e}", e.delta),
                e.dof.to_string(),
                format!("{:.17e}", e.mu),
                e.strip_bound.map(|b| format!("{b:.17e}")).unwrap_or_default(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Whether `a = d^β` and `q ≥ 0` hold on sampled points of the first strip.
fn strip_bound_applies(problem: &ProblemSpec) -> Result<bool> {
    let beta = match problem.form.beta {
        Some(b) => b,
        None => return Ok(false),
    };
    let domain = problem.mesh_domain()?;
    let cylindrical = matches!(problem.domain, Domain::Torus { .. });
    let pts = halton_strip_samples(&domain, 1.0 / problem.k0() as f64, 2000);
    Ok(pts.iter().all(|(p, d)| {
        let ep = eval_at(cylindrical, p, *d);
        let a = problem.form.a.eval(&ep);
        (a - d.powf(beta)).abs() <= 1e-12 * a.abs().max(1.0) && problem.form.q.eval_neg(&ep) == 0.0
    }))
}

/// `μ_k = min 𝔱[u]/‖u‖²` over functions supported in `{d < 1/k}`, for every `k`.
pub fn persson_sequence(problem: &ProblemSpec) -> Result<PerssonSequence> {
    problem.validate()?;
    let beta = problem.beta();
    let kap = kappa(beta);
    let bound_applies = strip_bound_applies(problem)?;
    let opts = problem.assembly();
    let one = CoefficientExpr::constant(1.0);
    let entries = problem
        .k_values
        .par_iter()
        .map(|&k| -> Result<PerssonEntry> {
            let mesh = problem.strip_mesh(k)?;
            let pencil = assemble_pencil(&mesh, &problem.form, &one, &opts)?;
            let report = smallest_eigenpairs_with(&pencil, 1, &problem.solver)?;
            let growth = (k as f64).powf(2.0 - beta);
            Ok(PerssonEntry {
                k,
                delta: 1.0 / k as f64,
                dof: pencil.dof(),
                mu: report.eigenvalues[0],
                residual: report.residuals[0],
                strip_bound: bound_applies.then_some(kap * growth),
                criterion_bound: problem.gamma * kap * growth,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fitted_exponent = loglog_slope(&entries.iter().map(|e| (e.k as f64, e.mu)).collect::<Vec<_>>());
    Ok(PerssonSequence { beta, gamma: problem.gamma, kappa: kap, entries, fitted_exponent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Discreteness {
    Discrete,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub verdict: Discreteness,
    /// First stage that did not pass, if any.
    pub failing_stage: Option<String>,
    pub reasons: Vec<String>,
    pub pointwise: Option<CriterionReport>,
    pub form: Option<CriterionReport>,
    pub persson: Option<PerssonSequence>,
    /// `2 − β − slack`.
    pub required_exponent: f64,
}

/// Runs pointwise check, form check at `k₀`, then the strip sequence. The spectrum is
/// reported DISCRETE when every stage passes, `μ_k` grows at least like `k^{2−β−0.1}`
/// and stays above `γκ(β)k^{2−β}`; otherwise INCONCLUSIVE. Later stages are skipped
/// once one fails.
pub fn discreteness_diagnostic(problem: &ProblemSpec) -> Result<DiagnosticReport> {
    problem.validate()?;
    if problem.k_values.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "the diagnostic needs at least 5 k values, got {}",
            problem.k_values.len()
        )));
    }
    let required_exponent = 2.0 - problem.beta() - EXPONENT_SLACK;
    let mut report = DiagnosticReport {
        verdict: Discreteness::Inconclusive,
        failing_stage: None,
        reasons: Vec::new(),
        pointwise: None,
        form: None,
        persson: None,
        required_exponent,
    };
    let pointwise = check_pointwise_criterion(problem, problem.remainder, problem.samples)?;
    let passed = pointwise.verdict == Verdict::Pass;
    if !passed {
        report.reasons.push(format!("pointwise criterion fails: worst margin {:e} at {:?}", pointwise.worst_margin, pointwise.worst_point));
    }
    report.pointwise = Some(pointwise);
    if !passed {
        report.failing_stage = Some("pointwise".into());
        return Ok(report);
    }
    let form = check_form_nonnegativity(problem, problem.k0())?;
    let passed = form.verdict == Verdict::Pass;
    if !passed {
        report.reasons.push(format!("form criterion fails at k = {}: minimum {:e}", problem.k0(), form.worst_margin));
    }
    report.form = Some(form);
    if !passed {
        report.failing_stage = Some("form".into());
        return Ok(report);
    }
    let seq = persson_sequence(problem)?;
    match seq.fitted_exponent {
        Some(p) if p >= required_exponent => {}
        Some(p) => report.reasons.push(format!("fitted exponent {p} below {required_exponent}")),
        None => report.reasons.push("some strip minimum is not positive; no growth exponent".into()),
    }
    for e in &seq.entries {
        if !(e.mu >= e.criterion_bound) {
            report.reasons.push(format!("μ_{} = {} below γκk^(2−β) = {}", e.k, e.mu, e.criterion_bound));
        }
    }
    report.persson = Some(seq);
    if report.reasons.is_empty() {
        report.verdict = Discreteness::Discrete;
    } else {
        report.failing_stage = Some("persson".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::coef;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    fn problem(form: FormSpec, gamma: f64, ks: Vec<usize>) -> ProblemSpec {
        ProblemSpec::new(unit(), form, gamma, ks)
    }

    #[test]
    fn halton_points_lie_in_the_strip() {
        let disc = Domain::disc([0.0, 0.0], 1.0).unwrap();
        let pts = halton_strip_samples(&disc, 0.25, 500);
        assert_eq!(pts.len(), 500);
        assert!(pts.iter().all(|(p, d)| *d > 0.0 && *d < 0.25 && (geometry::signed_distance(&disc, p) - d).abs() < 1e-15));
        assert_relative_eq!(radical_inverse(6, 2), 0.375);
    }

    #[test]
    fn laplacian_strips_match_interval_eigenvalues() {
        let seq = persson_sequence(&problem(FormSpec::laplacian(), 0.5, vec![2, 4])).unwrap();
        for e in &seq.entries {
            let exact = PI * PI * (e.k * e.k) as f64;
            assert!((e.mu - exact).abs() < 1e-3 * exact, "k = {}: {} vs {exact}", e.k, e.mu);
            assert_eq!(e.strip_bound, Some(0.25 * (e.k * e.k) as f64));
        }
    }

    #[test]
    fn weighted_strip_bound() {
        let seq = persson_sequence(&problem(FormSpec::power(0.5), 0.9, vec![4])).unwrap();
        assert!(seq.entries[0].mu >= 0.5);
    }

    #[test]
    fn pointwise_examples() {
        let check = |beta: f64, q: &str| {
            let form = FormSpec::power(beta).with_q(coef(q));
            check_pointwise_criterion(&problem(form, 0.5, vec![2]), Remainder::default(), 2000).unwrap()
        };
        let ok = check(0.0, "-0.1 * d^-2");
        assert_eq!(ok.verdict, Verdict::Pass);
        assert!(ok.worst_margin > 0.0);
        assert_eq!(check(0.0, "-0.2 * d^-2").verdict, Verdict::Fail);
        assert_eq!(check(0.5, "-0.125 * d^-1.5").verdict, Verdict::Fail);
    }

    #[test]
    fn form_check_dichotomy() {
        let form = |c: f64| FormSpec::laplacian().with_q(coef(&format!("-{c} * d^-2")));
        let sub = check_form_nonnegativity(&problem(form(0.125), 0.5, vec![2]), 2).unwrap();
        assert_eq!(sub.verdict, Verdict::Pass, "{sub:?}");
        let sup = check_form_nonnegativity(&problem(form(0.3), 0.5, vec![2]), 2).unwrap();
        assert_eq!(sup.verdict, Verdict::Fail);
        let first = sup.levels.first().unwrap().minimum;
        let last = sup.levels.last().unwrap().minimum;
        assert!(first < 0.0 && last < 10.0 * first, "{:?}", sup.levels);
        let free = check_form_nonnegativity(&problem(FormSpec::laplacian(), 0.5, vec![2]), 2).unwrap();
        assert!(free.worst_margin > 0.0);
    }

    #[test]
    fn diagnostic_gates_on_pointwise_failure() {
        let form = FormSpec::laplacian().with_q(coef("-0.3 * d^-2"));
        let rep = discreteness_diagnostic(&problem(form, 0.5, vec![2, 3, 4, 5, 6])).unwrap();
        assert_eq!(rep.verdict, Discreteness::Inconclusive);
        assert_eq!(rep.failing_stage.as_deref(), Some("pointwise"));
        assert!(rep.form.is_none() && rep.persson.is_none());
    }

    #[test]
    fn loglog_slope_recovers_power() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 3.0 * (k as f64).powf(1.5))).collect();
        assert_relative_eq!(loglog_slope(&pts).unwrap(), 1.5, epsilon = 1e-12);
        assert!(loglog_slope(&[(1.0, -1.0), (2.0, 1.0)]).is_none());
    }

    #[test]
    fn invalid_problems() {
        assert!(problem(FormSpec::laplacian(), 1.0, vec![2]).validate().is_err());
        assert!(problem(FormSpec::laplacian(), 0.5, vec![3, 2]).validate().is_err());
        let short = discreteness_diagnostic(&problem(FormSpec::laplacian(), 0.5, vec![2, 3]));
        assert!(matches!(short, Err(Error::InvalidArgument(_))));
    }
}
