//! Run configuration: a sectioned TOML file naming one pipeline plus its data.
//!
//! ```toml
//! command = "hardy"
//!
//! [domain]
//! kind = "interval"
//! a = 0.0
//! b = 1.0
//!
//! [form]
//! beta = 0.0
//!
//! [hardy]
//! alpha = 0.0
//! lambda = 3.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eigen::{DEFAULT_SEED, DEFAULT_TOL_1D, DEFAULT_TOL_2D};
use crate::error::{Error, Result};
use crate::expr::CoefficientExpr;
use crate::forms::FormSpec;
use crate::geometry::{Domain, ScanRegion};
use crate::hardy::{HardyLadder, LambdaMethod, CERT_TOL};
use crate::spectral::{InterfaceCondition, MeshRecipe, ProblemSpec, Remainder, DEFAULT_SAMPLES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Distance,
    Hardy,
    Spectrum,
    Persson,
    Criteria,
    Diagnose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Distance => "distance",
            Command::Hardy => "hardy",
            Command::Spectrum => "spectrum",
            Command::Persson => "persson",
            Command::Criteria => "criteria",
            Command::Diagnose => "diagnose",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Coefficients. Missing `a` means `d^beta`, missing `q` means 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSection {
    pub a: Option<CoefficientExpr>,
    pub q: Option<CoefficientExpr>,
    pub sigma: Option<CoefficientExpr>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Denominator weight for `spectrum` (default 1).
    pub weight: Option<CoefficientExpr>,
}

impl FormSection {
    pub fn form(&self) -> FormSpec {
        let beta = self.beta.unwrap_or(0.0);
        let mut form = FormSpec::power(beta);
        if let Some(a) = &self.a {
            form.a = a.clone();
        }
        if let Some(q) = &self.q {
            form.q = q.clone();
        }
        form.sigma = self.sigma.clone();
        form
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    /// 1D: elements of the base mesh (`hardy`, `spectrum`) or per strip (`persson` ...).
    pub n: Option<usize>,
    /// 2D target size.
    pub h: Option<f64>,
    /// 2D boundary grading, or 1D per-layer factor for `spectrum`.
    pub grading: Option<f64>,
    /// 1D smallest/largest element ratio for graded meshes.
    pub size_ratio: Option<f64>,
    pub levels: Option<usize>,
    pub tol: Option<f64>,
    /// Explicit strip indices; otherwise `k_min..=k_max`.
    pub k: Option<Vec<usize>>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Eigenpairs requested by `spectrum`.
    pub count: Option<usize>,
    /// Azimuthal mode for the torus in `spectrum`.
    pub mode: Option<u32>,
    pub interface: Option<InterfaceCondition>,
    pub cert_tol: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardySection {
    /// Catalogue method; `none` (default) uses `lambda`.
    pub method: Option<String>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    /// Tube width for `tubular`.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSection {
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Also evaluate by finite differences with this step (`0` picks the default step).
    pub fd_step: Option<f64>,
    /// Run a superharmonicity scan over this region.
    pub scan: Option<ScanRegion>,
    pub resolution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir(), formats: default_formats() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub domain: Domain,
    #[serde(default)]
    pub form: FormSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub hardy: HardySection,
    #[serde(default)]
    pub distance: DistanceSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), message: message.into() }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, col)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let location = e.span().map(|s| {
                let (l, c) = line_col(text, s.start);
                format!("line {l}, column {c}")
            });
            let message = e.message().to_string();
            let field = message
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| location.clone().unwrap_or_else(|| "<document>".into()));
            config_error(&field, match location {
                Some(loc) => format!("{loc}: {message}"),
                None => message,
            })
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate().map_err(|e| config_error("domain", e.to_string()))?;
        let n = &self.numerics;
        let positive = |field: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0) => Err(config_error(field, format!("must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("numerics.h", n.h)?;
        positive("numerics.tol", n.tol)?;
        positive("numerics.cert_tol", n.cert_tol)?;
        if let Some(g) = n.grading {
            if !(g > 0.0 && g <= 1.0) {
                return Err(config_error("numerics.grading", format!("must lie in (0, 1], got {g}")));
            }
        }
        if let Some(r) = n.size_ratio {
            if !(r > 0.0 && r <= 1.0) {
                return Err(config_error("numerics.size_ratio", format!("must lie in (0, 1], got {r}")));
            }
        }
        if matches!(n.levels, Some(0)) {
            return Err(config_error("numerics.levels", "must be at least 1"));
        }
        if let Some(b) = self.form.beta {
            if !(b < 1.0) {
                return Err(config_error("form.beta", format!("must be below 1, got {b}")));
            }
        }
        if let Some(g) = self.form.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(config_error("form.gamma", format!("must lie in (0, 1), got {g}")));
            }
        }
        match self.command {
            Command::Distance => {
                let dim = self.domain.dimension();
                if self.distance.points.is_empty() && self.distance.scan.is_none() {
                    return Err(config_error("distance.points", "give points and/or a scan region"));
                }
                if let Some(p) = self.distance.points.iter().find(|p| p.len() != dim) {
                    return Err(config_error("distance.points", format!("point {p:?} does not have dimension {dim}")));
                }
            }
            Command::Hardy => {
                self.lambda_method()?;
            }
            Command::Persson | Command::Criteria | Command::Diagnose => {
                self.problem()?.validate().map_err(|e| config_error("form", e.to_string()))?;
            }
            Command::Spectrum => {
                if matches!(n.count, Some(0)) {
                    return Err(config_error("numerics.count", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.numerics.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn tol(&self) -> f64 {
        self.numerics.tol.unwrap_or(if self.domain.dimension() == 1 { DEFAULT_TOL_1D } else { DEFAULT_TOL_2D })
    }

    pub fn lambda_method(&self) -> Result<LambdaMethod> {
        let h = &self.hardy;
        let name = h.method.as_deref().unwrap_or("none");
        let method = LambdaMethod::from_name(name, h.alpha, h.delta).map_err(|e| config_error("hardy.method", e.to_string()))?;
        if method == LambdaMethod::None && h.lambda.is_none() {
            return Err(config_error("hardy.lambda", "give lambda or a catalogue method"));
        }
        if let Some(l) = h.lambda {
            if !(l >= 0.0) {
                return Err(config_error("hardy.lambda", format!("must be non-negative, got {l}")));
            }
        }
        Ok(method)
    }

    pub fn ladder(&self) -> HardyLadder {
        let n = &self.numerics;
        let d = HardyLadder::default();
        HardyLadder {
            elements: n.n.unwrap_or(d.elements),
            size_ratio: n.size_ratio.unwrap_or(d.size_ratio),
            refine_factor: d.refine_factor,
            h: n.h,
            grading: n.grading.unwrap_or(d.grading),
            levels: n.levels.unwrap_or(d.levels),
            cert_tol: n.cert_tol.unwrap_or(CERT_TOL),
        }
    }

    pub fn k_values(&self) -> Result<Vec<usize>> {
        let n = &self.numerics;
        if let Some(k) = &n.k {
            return Ok(k.clone());
        }
        let lo = n.k_min.unwrap_or(2);
        let hi = n.k_max.unwrap_or(16);
        if hi < lo {
            return Err(config_error("numerics.k_max", format!("k_max = {hi} is below k_min = {lo}")));
        }
        Ok((lo..=hi).collect())
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let n = &self.numerics;
        let gamma = self.form.gamma.unwrap_or(0.5);
        let mut p = ProblemSpec::new(self.domain.clone(), self.form.form(), gamma, self.k_values()?);
        let d = MeshRecipe::default();
        p.mesh = MeshRecipe {
            n_strip: n.n.unwrap_or(d.n_strip),
            size_ratio: n.size_ratio.unwrap_or(d.size_ratio),
            h: n.h,
            grading: n.grading,
            graded: None,
        };
        p.interface = n.interface.unwrap_or_default();
        p.remainder = Remainder { lambda: self.hardy.lambda.unwrap_or(0.0), alpha: self.hardy.alpha.unwrap_or(0.0) };
        p.form_levels = n.levels.unwrap_or(3);
        p.samples = n.samples.unwrap_or(DEFAULT_SAMPLES);
        p.solver.tol = self.tol();
        p.solver.seed = self.seed();
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HARDY: &str = r#"
command = "hardy"

[domain]
kind = "interval"
a = 0.0
b = 1.0

[hardy]
lambda = 3.0
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::parse(HARDY).unwrap();
        assert_eq!(cfg.command, Command::Hardy);
        assert_eq!(cfg.domain, Domain::interval(0.0, 1.0).unwrap());
        assert_eq!(cfg.ladder().levels, 3);
        assert_eq!(cfg.output.formats, vec![Format::Json]);
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_field_and_line() {
        let bad = HARDY.replace("lambda = 3.0", "lambda = 3.0\nlamda = 1.0");
        match RunConfig::parse(&bad) {
            Err(Error::Config { field, message }) => {
                assert_eq!(field, "lamda");
                assert!(message.contains("line 11"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let bad = HARDY.replace("[hardy]\nlambda = 3.0", "[form]\nq = \"d^^2\"");
        assert!(matches!(RunConfig::parse(&bad), Err(Error::Config { .. })));
        let bad = HARDY.replace("b = 1.0", "b = -1.0");
        assert!(matches!(RunConfig::parse(&bad), Err(Error::Config { field, .. }) if field == "domain"));
        let bad = HARDY.replace("[hardy]\nlambda = 3.0", "");
        assert!(matches!(RunConfig::parse(&bad), Err(Error::Config { field, .. }) if field == "hardy.lambda"));
    }

    #[test]
    fn problem_from_config() {
        let text = r#"
command = "diagnose"
[domain]
kind = "interval"
a = 0.0
b = 1.0
[form]
beta = 0.5
q = "-0.03*d^-1.5"
gamma = 0.5
[numerics]
k_min = 2
k_max = 6
"#;
        let p = RunConfig::parse(text).unwrap().problem().unwrap();
        assert_eq!(p.k_values, vec![2, 3, 4, 5, 6]);
        assert_eq!(p.form.a.source(), "d^0.5");
        assert_eq!(p.gamma, 0.5);
    }
}
