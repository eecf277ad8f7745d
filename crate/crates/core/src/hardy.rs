//! Explicit Hardy constants, a catalogue of lower bounds for the remainder
//! constant `λ(Ω)`, and numerical certification of the weighted Hardy
//! inequality
//!
//! ```text
//! ∫ d^β |∇u|²  ≥  κ(β) ∫ d^{β−2} |u|²  +  λ ∫ d^α |u|²,      κ(β) = (1−β)²/4.
//! ```

use serde::{Deserialize, Serialize};

use crate::eigen::{smallest_eigenpairs_with, SolverOptions};
use crate::error::{Error, Result};
use crate::expr::CoefficientExpr;
use crate::forms::{assemble_pencil, hardy_weight, AssemblyOptions, FormSpec};
use crate::geometry::{self, Domain, ScanRegion, Verdict};
use crate::mesh::{axisymmetric_reduce, build_mesh_1d, build_trimesh, grading_for_ratio, Mesh};

/// Lower bound for the Avkhadiev–Wirths constant.
pub const LAMBDA_ZERO: f64 = 0.94;
/// Absolute tolerance on certificate margins.
pub const CERT_TOL: f64 = 1e-4;
/// Grid resolution used when a bound needs `−Δd ≥ 0`.
pub const SCAN_RESOLUTION: usize = 200;

pub const CERTIFICATE_SEMANTICS: &str = "The discrete space is conforming, so each discrete minimum is an upper bound \
     of the continuum infimum. CERTIFIED means the inequality holds on every tested finite element subspace; \
     it is consistent with, but never a proof of, the continuum inequality.";

/// `κ(β) = (1−β)²/4`.
pub fn kappa(beta: f64) -> f64 {
    (1.0 - beta).powi(2) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyConstants {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    /// Weighted remainder constant on domains with `−Δd ≥ 0`, present for `α > β − 2`.
    pub c_fmt: Option<f64>,
    /// Tubular-neighbourhood constant, present for `α > (β − 3)/2`.
    pub c_tub: Option<f64>,
}

/// Both branches of the weighted constant, `(α+2−β)²` and `(1−β)(2α+3−β)`,
/// each times `2^{α−β}`. They agree at `α = −1`.
pub fn c_fmt_branches(alpha: f64, beta: f64) -> (f64, f64) {
    let scale = 2f64.powf(alpha - beta);
    (scale * (alpha + 2.0 - beta).powi(2), scale * (1.0 - beta) * (2.0 * alpha + 3.0 - beta))
}

pub fn hardy_constants(alpha: f64, beta: f64) -> Result<HardyConstants> {
    if !(beta < 1.0) || !alpha.is_finite() {
        return Err(Error::ExponentOutOfRange(format!("need β < 1 and finite α, got β = {beta}, α = {alpha}")));
    }
    let c_fmt = (alpha > beta - 2.0).then(|| {
        let (low, high) = c_fmt_branches(alpha, beta);
        if alpha < -1.0 {
            low
        } else {
            high
        }
    });
    let c_tub = (alpha > (beta - 3.0) / 2.0).then(|| {
        2f64.powf(alpha - beta + 1.0) * (2.0 * alpha - beta + 3.0) / (1.0 - beta).powf(alpha - beta + 2.0)
    });
    Ok(HardyConstants { alpha, beta, kappa: kappa(beta), c_fmt, c_tub })
}

/// Source of the remainder constant `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LambdaMethod {
    /// User-supplied λ (no catalogue entry).
    None,
    BrezisMarcus,
    FmtDint,
    AvkhadievWirths,
    HhlVolume,
    EvansLewisVolume,
    FmtWeighted { alpha: f64 },
    Tubular { alpha: f64, delta: f64 },
}

impl LambdaMethod {
    pub fn label(&self) -> &'static str {
        match self {
            LambdaMethod::None => "none",
            LambdaMethod::BrezisMarcus => "brezis_marcus",
            LambdaMethod::FmtDint => "fmt_dint",
            LambdaMethod::AvkhadievWirths => "avkhadiev_wirths",
            LambdaMethod::HhlVolume => "hhl_volume",
            LambdaMethod::EvansLewisVolume => "evans_lewis_volume",
            LambdaMethod::FmtWeighted { .. } => "fmt_weighted",
            LambdaMethod::Tubular { .. } => "tubular",
        }
    }

    /// Parses `name` with the exponent / tube width supplied separately.
    pub fn from_name(name: &str, alpha: Option<f64>, delta: Option<f64>) -> Result<Self> {
        let need_alpha = || alpha.ok_or_else(|| Error::InvalidArgument(format!("method {name} needs alpha")));
        Ok(match name {
            "none" => LambdaMethod::None,
            "brezis_marcus" => LambdaMethod::BrezisMarcus,
            "fmt_dint" => LambdaMethod::FmtDint,
            "avkhadiev_wirths" => LambdaMethod::AvkhadievWirths,
            "hhl_volume" => LambdaMethod::HhlVolume,
            "evans_lewis_volume" => LambdaMethod::EvansLewisVolume,
            "fmt_weighted" => LambdaMethod::FmtWeighted { alpha: need_alpha()? },
            "tubular" => LambdaMethod::Tubular {
                alpha: need_alpha()?,
                delta: delta.ok_or_else(|| Error::InvalidArgument("method tubular needs delta".into()))?,
            },
            other => return Err(Error::InvalidArgument(format!("unknown lambda method '{other}'"))),
        })
    }
}

/// Which hypotheses were checked for a bound, and how.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    pub convex: bool,
    pub c2_boundary: bool,
    /// Verdict of the `−Δd ≥ 0` scan, when one was needed.
    pub superharmonic: Option<Verdict>,
    pub scan_min: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyBoundSpec {
    pub beta: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub method: LambdaMethod,
    pub lambda: f64,
    pub applicability: Applicability,
}

impl HardyBoundSpec {
    /// A user-chosen `λ`, no catalogue lookup.
    pub fn manual(beta: f64, alpha: f64, lambda: f64) -> Result<Self> {
        if !(beta < 1.0) {
            return Err(Error::ExponentOutOfRange(format!("β = {beta} must be below 1")));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("λ = {lambda} must be non-negative")));
        }
        Ok(HardyBoundSpec {
            beta,
            alpha,
            kappa: kappa(beta),
            method: LambdaMethod::None,
            lambda,
            applicability: Applicability::default(),
        })
    }
}

fn unit_sphere_area(n: usize) -> f64 {
    // |S^{n−1}| = 2 π^{n/2} / Γ(n/2)
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half(n: usize) -> f64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        // Γ(1/2) = √π, Γ(x+1) = xΓ(x)
        (0..n / 2).fold(sqrt_pi, |g, k| g * (k as f64 + 0.5))
    }
}

/// `K(n) = n^{1−2/n} |S^{n−1}|^{2/n}`.
pub fn volume_constant(n: usize) -> f64 {
    let nf = n as f64;
    nf.powf(1.0 - 2.0 / nf) * unit_sphere_area(n).powf(2.0 / nf)
}

fn not_applicable(method: &LambdaMethod, hypothesis: impl Into<String>) -> Error {
    Error::MethodNotApplicable { method: method.label().to_string(), hypothesis: hypothesis.into() }
}

/// Evaluates a catalogue bound for `λ(Ω)` after checking its hypotheses.
///
/// The unweighted entries (`brezis_marcus` … `evans_lewis_volume`) bound the
/// classical inequality, i.e. `β = 0`, `α = 0`, and need a convex domain.
/// `fmt_weighted` needs `−Δd ≥ 0` on the whole domain, `tubular` on the tube
/// `{d < δ}` together with a C² boundary.
pub fn lambda_bound(domain: &Domain, method: LambdaMethod, beta: f64) -> Result<HardyBoundSpec> {
    domain.validate()?;
    if !(beta < 1.0) {
        return Err(Error::ExponentOutOfRange(format!("β = {beta} must be below 1")));
    }
    let mut app = Applicability { convex: domain.is_convex(), c2_boundary: domain.has_c2_boundary(), ..Default::default() };
    let n = domain.dimension();
    let catalogue = |app: &Applicability| -> Result<()> {
        if beta != 0.0 {
            return Err(not_applicable(&method, "catalogue bounds are for the unweighted inequality (β = 0)"));
        }
        if !app.convex {
            return Err(not_applicable(&method, format!("domain must be convex ({} is not)", domain.name())));
        }
        Ok(())
    };
    let (alpha, lambda) = match method {
        LambdaMethod::None => {
            return Err(Error::InvalidArgument("method none has no catalogue value; supply λ directly".into()))
        }
        LambdaMethod::BrezisMarcus => {
            catalogue(&app)?;
            let diam = domain.diameter();
            app.notes.push(format!("diameter D = {diam}"));
            (0.0, 1.0 / (4.0 * diam * diam))
        }
        LambdaMethod::FmtDint => {
            catalogue(&app)?;
            let dint = geometry::interior_diameter(domain);
            app.notes.push(format!("interior diameter D_int = {dint}"));
            (0.0, 3.0 / (dint * dint))
        }
        LambdaMethod::AvkhadievWirths => {
            catalogue(&app)?;
            let dint = geometry::interior_diameter(domain);
            app.notes.push(format!("interior diameter D_int = {dint}; λ₀ = {LAMBDA_ZERO}"));
            (0.0, 4.0 * LAMBDA_ZERO / (dint * dint))
        }
        LambdaMethod::HhlVolume | LambdaMethod::EvansLewisVolume => {
            catalogue(&app)?;
            let vol = geometry::volume(domain);
            let k = volume_constant(n);
            app.notes.push(format!("|Ω| = {vol}, K({n}) = {k}"));
            let scale = vol.powf(2.0 / n as f64);
            let lambda = if matches!(method, LambdaMethod::HhlVolume) { k / (4.0 * scale) } else { 3.0 * k / (2.0 * scale) };
            (0.0, lambda)
        }
        LambdaMethod::FmtWeighted { alpha } => {
            let c = hardy_constants(alpha, beta)?
                .c_fmt
                .ok_or_else(|| not_applicable(&method, format!("needs α > β − 2, got α = {alpha}, β = {beta}")))?;
            let scan = geometry::superharmonicity_scan(domain, ScanRegion::Full, SCAN_RESOLUTION)?;
            app.superharmonic = Some(scan.verdict);
            app.scan_min = Some(scan.min_value);
            if scan.verdict == Verdict::Fail {
                return Err(not_applicable(
                    &method,
                    format!("−Δd ≥ 0 fails on the domain (min {} at {:?})", scan.min_value, scan.argmin),
                ));
            }
            let dint = geometry::interior_diameter(domain);
            app.notes.push(format!("C = {c}, D_int = {dint}"));
            (alpha, c * dint.powf(beta - alpha - 2.0))
        }
        LambdaMethod::Tubular { alpha, delta } => {
            if !app.c2_boundary {
                return Err(not_applicable(&method, format!("boundary must be C² ({} is not)", domain.name())));
            }
            if !(delta > 0.0 && delta <= (1.0 - beta) / 2.0) {
                return Err(not_applicable(&method, format!("needs 0 < δ ≤ (1−β)/2 = {}, got δ = {delta}", (1.0 - beta) / 2.0)));
            }
            let c = hardy_constants(alpha, beta)?
                .c_tub
                .ok_or_else(|| not_applicable(&method, format!("needs α > (β − 3)/2, got α = {alpha}, β = {beta}")))?;
            let scan = geometry::superharmonicity_scan(domain, ScanRegion::Tubular { delta }, SCAN_RESOLUTION)?;
            app.superharmonic = Some(scan.verdict);
            app.scan_min = Some(scan.min_value);
            if scan.verdict == Verdict::Fail {
                return Err(not_applicable(
                    &method,
                    format!("−Δd ≥ 0 fails in the tube d < {delta} (min {} at {:?})", scan.min_value, scan.argmin),
                ));
            }
            app.notes.push(format!("C = {c}; the bound holds for u supported in the tube d < {delta}"));
            (alpha, c * delta)
        }
    };
    Ok(HardyBoundSpec { beta, alpha, kappa: kappa(beta), method, lambda, applicability: app })
}

/// Meshes used by [`verify_hardy`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardyLadder {
    /// Elements of the coarsest 1D mesh.
    pub elements: usize,
    /// Ratio smallest/largest element of the coarsest 1D mesh.
    pub size_ratio: f64,
    /// Each 1D level splits every element into this many.
    pub refine_factor: usize,
    /// Target size of the coarsest 2D mesh; `None` means `D_int / 8`.
    pub h: Option<f64>,
    /// 2D boundary grading.
    pub grading: f64,
    pub levels: usize,
    pub cert_tol: f64,
}

impl Default for HardyLadder {
    fn default() -> Self {
        HardyLadder { elements: 256, size_ratio: 1e-6, refine_factor: 4, h: None, grading: 0.15, levels: 3, cert_tol: CERT_TOL }
    }
}

impl HardyLadder {
    /// The meshes of the ladder, coarse to fine.
    pub fn meshes(&self, domain: &Domain) -> Result<Vec<Mesh>> {
        if self.levels == 0 {
            return Err(Error::InvalidArgument("ladder needs at least one level".into()));
        }
        match domain {
            Domain::Interval { .. } => {
                let g = grading_for_ratio(self.elements, self.size_ratio);
                let base = build_mesh_1d(domain, self.elements, g)?;
                let mut out = vec![Mesh::OneD(base)];
                for _ in 1..self.levels {
                    let Mesh::OneD(last) = out.last().unwrap() else { unreachable!() };
                    out.push(Mesh::OneD(last.refine(self.refine_factor)));
                }
                Ok(out)
            }
            Domain::Torus { .. } => self.meshes_2d(&axisymmetric_reduce(domain, 0)?.cross_section),
            _ => self.meshes_2d(domain),
        }
    }

    fn meshes_2d(&self, domain: &Domain) -> Result<Vec<Mesh>> {
        let h = self.h.unwrap_or_else(|| geometry::interior_diameter(domain) / 8.0);
        let mut out = vec![Mesh::TwoD(build_trimesh(domain, h, self.grading)?)];
        for _ in 1..self.levels {
            let next = out.last().unwrap().refine()?;
            out.push(next);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyLevel {
    pub level: usize,
    pub dof: usize,
    pub min_element_size: f64,
    pub max_element_size: f64,
    pub minimum: f64,
    pub margin: f64,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CertificateVerdict {
    Certified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyCertificate {
    pub domain: Domain,
    pub bound: HardyBoundSpec,
    pub ladder: HardyLadder,
    pub levels: Vec<HardyLevel>,
    /// Margin on the finest level.
    pub margin: f64,
    pub verdict: CertificateVerdict,
    pub semantics: String,
}

impl HardyCertificate {
    /// `beta,alpha,lambda,level,dof,minimum,margin`, one row per level.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["beta", "alpha", "lambda", "level", "dof", "minimum", "margin"]).unwrap();
        for l in &self.levels {
            w.write_record([
                format!("{:e}", self.bound.beta),
                format!("{:e}", self.bound.alpha),
                format!("{:e}", self.bound.lambda),
                l.level.to_string(),
                l.dof.to_string(),
                format!("{:.17e}", l.minimum),
                format!("{:.17e}", l.margin),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Numerator `∫ d^β|∇u|² − λ∫ d^α|u|²` of the certification quotient.
pub fn hardy_numerator(beta: f64, alpha: f64, lambda: f64) -> Result<FormSpec> {
    let form = FormSpec::power(beta);
    if lambda == 0.0 {
        return Ok(form);
    }
    let q = CoefficientExpr::parse(&format!("-{lambda:e} * d^{alpha}"))?;
    Ok(form.with_q(q))
}

/// Smallest value of the Hardy quotient on one mesh.
pub fn hardy_minimum(mesh: &Mesh, bound: &HardyBoundSpec, opts: &AssemblyOptions, solver: &SolverOptions) -> Result<(f64, f64, usize)> {
    let form = hardy_numerator(bound.beta, bound.alpha, bound.lambda)?;
    let pencil = assemble_pencil(mesh, &form, &hardy_weight(bound.beta), opts)?;
    let report = smallest_eigenpairs_with(&pencil, 1, solver)?;
    Ok((report.eigenvalues[0], report.residuals[0], pencil.dof()))
}

/// Solves the Hardy quotient across `ladder` and certifies `minimum − κ(β) ≥ −cert_tol`.
pub fn verify_hardy(domain: &Domain, bound: &HardyBoundSpec, ladder: &HardyLadder, solver: &SolverOptions) -> Result<HardyCertificate> {
    if !(bound.beta < 1.0) {
        return Err(Error::ExponentOutOfRange(format!("β = {} must be below 1", bound.beta)));
    }
    if !(bound.lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("λ = {} must be non-negative", bound.lambda)));
    }
    let opts = crate::forms::options_for(domain);
    let meshes = ladder.meshes(domain)?;
    let mut levels = Vec::with_capacity(meshes.len());
    for (i, mesh) in meshes.iter().enumerate() {
        let (minimum, residual, dof) = hardy_minimum(mesh, bound, &opts, solver)?;
        levels.push(HardyLevel {
            level: i,
            dof,
            min_element_size: mesh.min_element_size(),
            max_element_size: mesh.max_element_size(),
            minimum,
            margin: minimum - bound.kappa,
            residual,
        });
    }
    let margin = levels.last().unwrap().margin;
    let ok = levels.iter().all(|l| l.margin >= -ladder.cert_tol);
    Ok(HardyCertificate {
        domain: domain.clone(),
        bound: bound.clone(),
        ladder: ladder.clone(),
        levels,
        margin,
        verdict: if ok { CertificateVerdict::Certified } else { CertificateVerdict::Inconclusive },
        semantics: CERTIFICATE_SEMANTICS.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn constants_by_substitution() {
        assert_eq!(hardy_constants(0.0, 0.0).unwrap().kappa, 0.25);
        let c = hardy_constants(-1.0, 0.0).unwrap();
        assert_relative_eq!(c.c_fmt.unwrap(), 0.5, epsilon = 1e-15);
        let (b1, b2) = c_fmt_branches(-1.0, 0.0);
        assert_relative_eq!(b1, b2, epsilon = 1e-15);
        let c = hardy_constants(0.0, 0.0).unwrap();
        assert_relative_eq!(c.c_fmt.unwrap(), 3.0, epsilon = 1e-15);
        assert_relative_eq!(c.c_tub.unwrap(), 6.0, epsilon = 1e-15);
        assert!(matches!(hardy_constants(0.0, 1.0), Err(Error::ExponentOutOfRange(_))));
        let out = hardy_constants(-2.5, 0.0).unwrap();
        assert!(out.c_fmt.is_none() && out.c_tub.is_none() && out.kappa == 0.25);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(1), 2.0, epsilon = 1e-14);
        assert_relative_eq!(unit_sphere_area(2), 2.0 * std::f64::consts::PI, epsilon = 1e-14);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * std::f64::consts::PI, epsilon = 1e-13);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * std::f64::consts::PI.powi(2), epsilon = 1e-13);
        assert_relative_eq!(volume_constant(2), 2.0 * std::f64::consts::PI, epsilon = 1e-14);
    }

    #[test]
    fn catalogue_examples() {
        let lam = |d: &Domain, m| lambda_bound(d, m, 0.0).unwrap().lambda;
        assert_relative_eq!(lam(&unit(), LambdaMethod::FmtDint), 3.0, epsilon = 1e-14);
        assert_relative_eq!(lam(&unit(), LambdaMethod::AvkhadievWirths), 3.76, epsilon = 1e-14);
        assert_relative_eq!(lam(&unit(), LambdaMethod::BrezisMarcus), 0.25, epsilon = 1e-14);
        let disc = Domain::disc([0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(lam(&disc, LambdaMethod::HhlVolume), 0.5, epsilon = 1e-14);
        assert_relative_eq!(lam(&disc, LambdaMethod::EvansLewisVolume), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let annulus = Domain::annulus([0.0, 0.0], 1.0, 2.0).unwrap();
        let err = lambda_bound(&annulus, LambdaMethod::FmtDint, 0.0).unwrap_err();
        assert!(matches!(err, Error::MethodNotApplicable { ref hypothesis, .. } if hypothesis.contains("convex")));
        let err = lambda_bound(&annulus, LambdaMethod::FmtWeighted { alpha: 0.0 }, 0.0).unwrap_err();
        assert!(matches!(err, Error::MethodNotApplicable { ref hypothesis, .. } if hypothesis.contains("Δd")));
        let square = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let err = lambda_bound(&square, LambdaMethod::Tubular { alpha: 0.0, delta: 0.1 }, 0.0).unwrap_err();
        assert!(matches!(err, Error::MethodNotApplicable { ref hypothesis, .. } if hypothesis.contains("C²")));
        let torus = Domain::torus(3.0, 1.0).unwrap();
        let ok = lambda_bound(&torus, LambdaMethod::Tubular { alpha: 0.0, delta: 0.5 }, 0.0).unwrap();
        assert_relative_eq!(ok.lambda, 3.0, epsilon = 1e-14);
        assert_eq!(ok.applicability.superharmonic, Some(Verdict::Pass));
        let err = lambda_bound(&torus, LambdaMethod::Tubular { alpha: 0.0, delta: 0.6 }, 0.0).unwrap_err();
        assert!(matches!(err, Error::MethodNotApplicable { ref hypothesis, .. } if hypothesis.contains("δ")));
        let thin = Domain::torus(1.8, 1.0).unwrap();
        assert!(lambda_bound(&thin, LambdaMethod::FmtWeighted { alpha: 0.0 }, 0.0).is_err());
        assert!(lambda_bound(&unit(), LambdaMethod::FmtDint, 0.5).is_err());
    }

    #[test]
    fn weighted_bound_reproduces_interior_diameter_bound() {
        let w = lambda_bound(&unit(), LambdaMethod::FmtWeighted { alpha: 0.0 }, 0.0).unwrap();
        let c = lambda_bound(&unit(), LambdaMethod::FmtDint, 0.0).unwrap();
        assert_relative_eq!(w.lambda, c.lambda, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn branches_meet_at_minus_one(beta in -20.0f64..0.999) {
            let (a, b) = c_fmt_branches(-1.0, beta);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn kappa_positive_and_decreasing(b1 in -50.0f64..0.999, b2 in -50.0f64..0.999) {
            prop_assert!(kappa(b1) > 0.0);
            if b1 < b2 {
                prop_assert!(kappa(b1) > kappa(b2));
            }
        }

        #[test]
        fn tubular_constant_positive(beta in -10.0f64..0.999, t in 0.001f64..10.0) {
            let alpha = (beta - 3.0) / 2.0 + t;
            prop_assert!(hardy_constants(alpha, beta).unwrap().c_tub.unwrap() > 0.0);
        }
    }

    #[test]
    fn classical_hardy_is_certified() {
        let bound = HardyBoundSpec::manual(0.0, 0.0, 0.0).unwrap();
        let cert = verify_hardy(&unit(), &bound, &HardyLadder::default(), &SolverOptions::default()).unwrap();
        assert_eq!(cert.verdict, CertificateVerdict::Certified);
        for w in cert.levels.windows(2) {
            assert!(w[1].minimum <= w[0].minimum + 1e-12);
        }
        assert!(cert.levels.iter().all(|l| l.margin >= 0.0));
        assert_eq!(cert.to_csv().lines().count(), 4);
    }

    #[test]
    fn larger_lambda_lowers_minimum() {
        let mesh = &HardyLadder { levels: 1, ..Default::default() }.meshes(&unit()).unwrap()[0];
        let opts = AssemblyOptions::default();
        let mins: Vec<f64> = [0.0, 1.0, 3.0]
            .iter()
            .map(|&lam| hardy_minimum(mesh, &HardyBoundSpec::manual(0.0, 0.0, lam).unwrap(), &opts, &SolverOptions::default()).unwrap().0)
            .collect();
        assert!(mins[0] > mins[1] && mins[1] > mins[2], "{mins:?}");
    }
}
