use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shortest round-trip form, in exponent notation away from `[1e-4, 1e9)`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e9).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Lemma1,
    Lemma2,
    Theorem1Ratio,
    Theorem2Localization,
    Lemma5,
    Lemma7,
    Theorem1primeConsistency,
    MainTheoremRatio,
    OracleTail,
    OracleKernel,
    OracleDistance,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::OracleTail,
        CheckId::OracleKernel,
        CheckId::OracleDistance,
        CheckId::Lemma1,
        CheckId::Lemma2,
        CheckId::Theorem1Ratio,
        CheckId::Theorem2Localization,
        CheckId::Lemma5,
        CheckId::Lemma7,
        CheckId::Theorem1primeConsistency,
        CheckId::MainTheoremRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Lemma1 => "lemma1",
            CheckId::Lemma2 => "lemma2",
            CheckId::Theorem1Ratio => "theorem1_ratio",
            CheckId::Theorem2Localization => "theorem2_localization",
            CheckId::Lemma5 => "lemma5",
            CheckId::Lemma7 => "lemma7",
            CheckId::Theorem1primeConsistency => "theorem1prime_consistency",
            CheckId::MainTheoremRatio => "main_theorem_ratio",
            CheckId::OracleTail => "oracle_tail",
            CheckId::OracleKernel => "oracle_kernel",
            CheckId::OracleDistance => "oracle_distance",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown check id {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        })
    }
}

/// `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    /// `(rhs − lhs) / max(|lhs|, |rhs|)`, negative exactly when violated.
    pub fn margin(&self) -> f64 {
        if !self.lhs.is_finite() || !self.rhs.is_finite() {
            return f64::NEG_INFINITY;
        }
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.rhs - self.lhs) / scale
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    pub value: f64,
}

/// One verified inequality group; the reported `lhs`, `rhs` are those of
/// the tightest member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub check_id: CheckId,
    pub domain: String,
    pub beta: f64,
    pub func_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constants: Vec<Constant>,
    pub margin: f64,
    pub status: Status,
    pub err_estimate: f64,
    pub runtime_ms: u64,
    pub inequalities: Vec<Inequality>,
    pub note: String,
}

impl Record {
    pub fn new(check_id: CheckId, domain: &str, beta: f64, func_id: impl Into<String>) -> Self {
        Self {
            check_id,
            domain: domain.to_string(),
            beta,
            func_id: func_id.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            constants: Vec::new(),
            margin: f64::NEG_INFINITY,
            status: Status::Fail,
            err_estimate: 0.0,
            runtime_ms: 0,
            inequalities: Vec::new(),
            note: String::new(),
        }
    }

    pub fn bound(mut self, label: &str, lhs: f64, rhs: f64) -> Self {
        self.inequalities.push(Inequality { label: label.to_string(), lhs, rhs });
        self
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        self.constants.push(Constant { name: name.to_string(), value });
        self
    }

    pub fn constants<'a>(mut self, items: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        for (name, value) in items {
            self = self.constant(name, value);
        }
        self
    }

    pub fn err(mut self, e: f64) -> Self {
        self.err_estimate = e;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if self.note.is_empty() {
            self.note = note;
        } else {
            self.note = format!("{}; {note}", self.note);
        }
        self
    }

    /// Settle margin and status from the inequalities.
    pub fn finish(mut self) -> Self {
        let tightest = self
            .inequalities
            .iter()
            .map(|i| (i.margin(), i))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match tightest {
            Some((m, i)) => {
                self.margin = m;
                self.lhs = i.lhs;
                self.rhs = i.rhs;
            }
            None => self.margin = f64::NEG_INFINITY,
        }
        self.status = if self.margin >= 0.0 { Status::Pass } else { Status::Fail };
        self
    }

    /// A check that could not be evaluated.
    pub fn failed(self, reason: &Error) -> Self {
        let mut r = self.note(format!("error: {reason}"));
        r.inequalities.clear();
        r.finish()
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// `name=value;...` as written to the CSV report.
    pub fn constants_field(&self) -> String {
        self.constants.iter().map(|c| format!("{}={}", c.name, format_number(c.value))).collect::<Vec<_>>().join(";")
    }
}
