use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::sample;
use crate::domain::{ConvexDomain, DomainSpec};
use crate::error::{Error, Result};
use crate::functions::{ExpSum, Term};
use crate::norms::QuadratureSpec;

/// One `[[function]]` block: terms `(re c, im c, m, re λ, im λ)` of `Σ c z^m e^{λz}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default)]
    pub id: Option<String>,
    pub terms: Vec<[f64; 5]>,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<ExpSum> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let m = t[2];
                if !(m >= 0.0 && m.fract() == 0.0 && m <= f64::from(u32::MAX)) {
                    return Err(Error::Config(format!("power {m} is not a nonnegative integer")));
                }
                Ok(Term::new(C64::new(t[0], t[1]), m as u32, C64::new(t[3], t[4])))
            })
            .collect::<Result<Vec<_>>>()?;
        ExpSum::new(terms)
    }
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Collar width of the localization estimate; `σ/2` when absent.
    pub epsilon: Option<f64>,
    pub a_abs: f64,
    pub A_abs: f64,
    pub seed: u64,
    pub safety_factor: f64,
    /// Directions `φ` used by the ray-wise checks.
    pub directions: Vec<f64>,
    pub near_points: usize,
    pub far_points: usize,
    pub distance_points: usize,
    /// Number of seeded random exponential sums added to the `[[function]]` blocks.
    pub family: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            beta: vec![0.0],
            alpha: vec![0.75, 1.0, 1.4, 1.6, 2.0],
            epsilon: None,
            a_abs: 1.0,
            A_abs: 1.0,
            seed: 0,
            safety_factor: 10.0,
            directions: vec![0.0, 2.0],
            near_points: 50,
            far_points: 20,
            distance_points: 100,
            family: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: Format,
    /// Record wall-clock times; off by default so reports are reproducible.
    pub timing: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("verify-out"), format: Format::Both, timing: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default, rename = "function")]
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A validated configuration with its domain and functions built.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: RunConfig,
    pub domain: ConvexDomain,
    pub functions: Vec<(String, ExpSum)>,
    pub eps: f64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Check every field and build the objects the checks run on.
    pub fn prepare(&self) -> Result<Prepared> {
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let domain = self.domain.build().map_err(cfg)?;
        self.quadrature.validate().map_err(cfg)?;
        let v = &self.verify;
        if v.beta.is_empty() {
            return Err(Error::Config("verify.beta is empty".into()));
        }
        if let Some(b) = v.beta.iter().find(|b| !(**b > -0.5 && **b < 1.5)) {
            return Err(Error::Config(format!("β={b} outside (−1/2, 3/2)")));
        }
        if let Some(a) = v.alpha.iter().find(|a| !(**a > 0.0 && **a < 2.5)) {
            return Err(Error::Config(format!("α={a} outside (0, 5/2)")));
        }
        if !(v.a_abs > 0.0 && v.A_abs > 0.0 && v.safety_factor > 0.0) {
            return Err(Error::Config("a_abs, A_abs and safety_factor must be positive".into()));
        }
        let m = domain.metrics();
        let eps = v.epsilon.unwrap_or(0.5 * m.min_width);
        if !(eps > 0.0 && eps <= m.circumradius) {
            return Err(Error::Config(format!("ε={eps} outside (0, R={}]", m.circumradius)));
        }
        let mut functions = Vec::new();
        for (k, spec) in self.functions.iter().enumerate() {
            let id = spec.id.clone().unwrap_or_else(|| format!("f{k}"));
            let f = spec.build().map_err(cfg)?;
            if f.pole_margin(&domain) < 1e-6 * m.min_width {
                return Err(Error::Config(format!("function {id}: pole outside domain")));
            }
            functions.push((id, f));
        }
        functions.extend(sample::family(&domain, v.family, v.seed));
        let mut seen = std::collections::HashSet::new();
        if let Some((id, _)) = functions.iter().find(|(id, _)| !seen.insert(id.clone())) {
            return Err(Error::Config(format!("duplicate function id {id}")));
        }
        if functions.is_empty() {
            return Err(Error::Config("no functions: add [[function]] blocks or verify.family".into()));
        }
        Ok(Prepared { config: self.clone(), domain, functions, eps })
    }
}
