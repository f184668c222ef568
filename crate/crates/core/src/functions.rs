//! Exponential sums `F(z) = Σ cⱼ z^{mⱼ} e^{λⱼ z}` and their Borel transforms.
//!
//! The Borel transform of `c z^m e^{λz}` is `c·m!/(ζ−λ)^{m+1}`, so every
//! quantity derived from `γ` has a closed form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};

const POLE_TOL: f64 = 1e-12;
// e^{709.78} is the largest finite double.
const LOG_MAX: f64 = 709.78;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: C64,
    pub power: u32,
    pub freq: C64,
}

impl Term {
    pub fn new(coeff: C64, power: u32, freq: C64) -> Self {
        Self { coeff, power, freq }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    terms: Vec<Term>,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

// k!/(k−m)!
fn falling(k: u32, m: u32) -> f64 {
    (k - m + 1..=k).map(f64::from).product()
}

/// Outcome of checking a function against a domain and weight exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct Validation {
    pub reasons: Vec<String>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.reasons.is_empty()
    }
}

impl ExpSum {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidFunction("term list is empty".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if !t.coeff.is_finite() || !t.freq.is_finite() {
                return Err(Error::InvalidFunction(format!("term {i} is not finite")));
            }
            if terms[..i].iter().any(|s| s.power == t.power && s.freq == t.freq) {
                return Err(Error::InvalidFunction(format!(
                    "term {i} repeats the (λ, m) pair of an earlier term"
                )));
            }
        }
        Ok(Self { terms })
    }

    /// `c e^{λz}`.
    pub fn exponential(coeff: C64, freq: C64) -> Self {
        Self { terms: vec![Term::new(coeff, 0, freq)] }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `F(z)·c·z^k`, shifting every power by `k`.
    pub fn times_power(&self, k: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.coeff, t.power + k, t.freq))
                .collect(),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            terms: self.terms.iter().map(|t| Term::new(t.coeff * s, t.power, t.freq)).collect(),
        }
    }

    pub fn poles(&self) -> impl Iterator<Item = C64> + '_ {
        self.terms.iter().map(|t| t.freq)
    }

    fn term_logs(&self, z: C64) -> Vec<(f64, f64)> {
        // (log-magnitude, phase) of each term, −∞ for vanishing terms
        let lz = z.ln();
        self.terms
            .iter()
            .map(|t| {
                if t.coeff == C64::new(0.0, 0.0) || (t.power > 0 && z == C64::new(0.0, 0.0)) {
                    return (f64::NEG_INFINITY, 0.0);
                }
                let e = t.freq * z;
                let (lm, ph) = if t.power == 0 {
                    (0.0, 0.0)
                } else {
                    (t.power as f64 * lz.re, t.power as f64 * lz.im)
                };
                (t.coeff.norm().ln() + lm + e.re, t.coeff.arg() + ph + e.im)
            })
            .collect()
    }

    /// `F(z)`.
    pub fn eval(&self, z: C64) -> Result<C64> {
        let logs = self.term_logs(z);
        for (i, &(lm, _)) in logs.iter().enumerate() {
            if lm > LOG_MAX {
                return Err(Error::MagnitudeOverflow { term: i, log_magnitude: lm });
            }
        }
        Ok(logs
            .iter()
            .filter(|(lm, _)| lm.is_finite())
            .map(|&(lm, ph)| C64::from_polar(lm.exp(), ph))
            .sum())
    }

    /// `ln |F(z)|`, finite even where `|F|` itself would overflow.
    pub fn ln_abs(&self, z: C64) -> f64 {
        let logs = self.term_logs(z);
        let top = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let s: C64 = logs
            .iter()
            .filter(|(lm, _)| lm.is_finite())
            .map(|&(lm, ph)| C64::from_polar((lm - top).exp(), ph))
            .sum();
        top + s.norm().ln()
    }

    fn check_pole(&self, zeta: C64) -> Result<()> {
        if self.terms.iter().any(|t| (zeta - t.freq).norm() < POLE_TOL) {
            return Err(Error::PoleProximity { re: zeta.re, im: zeta.im });
        }
        Ok(())
    }

    /// `γ(ζ) = Σ cⱼ mⱼ!/(ζ−λⱼ)^{mⱼ+1}`.
    pub fn gamma(&self, zeta: C64) -> Result<C64> {
        self.check_pole(zeta)?;
        Ok(self
            .terms
            .iter()
            .map(|t| t.coeff * factorial(t.power) / (zeta - t.freq).powu(t.power + 1))
            .sum())
    }

    /// `γ″(ζ) = Σ cⱼ (mⱼ+2)!/(ζ−λⱼ)^{mⱼ+3}`.
    pub fn gamma_dd(&self, zeta: C64) -> Result<C64> {
        self.check_pole(zeta)?;
        Ok(self.gamma_dd_unchecked(zeta))
    }

    pub(crate) fn gamma_dd_unchecked(&self, zeta: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| t.coeff * factorial(t.power + 2) / (zeta - t.freq).powu(t.power + 3))
            .sum()
    }

    /// `F^{(k)}(0)`, the Laurent coefficient `γ_k`.
    pub fn taylor_coeff(&self, k: u32) -> C64 {
        self.terms
            .iter()
            .filter(|t| k >= t.power)
            .map(|t| t.coeff * falling(k, t.power) * t.freq.powu(k - t.power))
            .sum()
    }

    /// `γ″_k = (k+2)(k+1) F^{(k)}(0)` for `k = 0..=k_max`.
    pub fn laurent_gamma_dd_coeffs(&self, k_max: usize) -> Vec<C64> {
        (0..=k_max as u32)
            .map(|k| f64::from((k + 2) * (k + 1)) * self.taylor_coeff(k))
            .collect()
    }

    /// `γ″_k / ρ^k`, evaluated without forming `ρ^k` or `λ^k` separately.
    pub fn scaled_gamma_dd_coeff(&self, k: u32, rho: f64) -> C64 {
        let kk = f64::from(k);
        self.terms
            .iter()
            .filter(|t| k >= t.power)
            .map(|t| {
                t.coeff
                    * ((kk + 2.0) * (kk + 1.0) * falling(k, t.power))
                    * (t.freq / rho).powu(k - t.power)
                    / rho.powi(t.power as i32)
            })
            .sum()
    }

    /// Order of the zero of `F` at the origin: the first `k` with `F^{(k)}(0) ≠ 0`.
    pub fn vanishing_order(&self) -> u32 {
        for k in 0..64 {
            let scale: f64 = self
                .terms
                .iter()
                .filter(|t| k >= t.power)
                .map(|t| t.coeff.norm() * falling(k, t.power) * t.freq.norm().powi((k - t.power) as i32))
                .sum();
            if scale > 0.0 && self.taylor_coeff(k).norm() > 1e-13 * scale {
                return k;
            }
        }
        64
    }

    /// Smallest depth of a pole inside `D`: `min_j min_φ (h(φ) − Re λⱼe^{iφ})`.
    pub fn pole_margin(&self, domain: &ConvexDomain) -> f64 {
        self.poles()
            .map(|l| -domain.separation(l).0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self, domain: &ConvexDomain, beta: f64) -> Validation {
        let mut reasons = Vec::new();
        let sigma = domain.metrics().min_width;
        for (i, t) in self.terms.iter().enumerate() {
            let depth = -domain.separation(t.freq).0;
            if depth < 1e-6 * sigma {
                reasons.push(format!(
                    "pole outside domain: term {i} has λ={}{:+}i (interior depth {depth:.3e})",
                    t.freq.re, t.freq.im
                ));
            }
        }
        if beta >= 0.5 {
            let f0 = self.taylor_coeff(0);
            if self.vanishing_order() == 0 {
                reasons.push(format!("F(0)={}≠0 while β={beta} ≥ 1/2", fmt_c(f0)));
            }
        }
        Validation { reasons }
    }
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        let f = ExpSum::exponential(c(1.0), c(0.3));
        assert_eq!(f.eval(c(0.0)).unwrap(), c(1.0));
        let g = f.times_power(1);
        assert_eq!(g.eval(c(0.0)).unwrap(), c(0.0));
        let s = ExpSum::new(vec![Term::new(c(1.0), 0, c(0.3)), Term::new(c(-1.0), 0, c(-0.3))])
            .unwrap();
        assert_relative_eq!(s.eval(c(1.0)).unwrap().re, 2.0 * 0.3f64.sinh(), epsilon = 1e-15);
    }

    #[test]
    fn overflow_is_reported_with_term() {
        let f = ExpSum::new(vec![Term::new(c(1.0), 0, c(0.1)), Term::new(c(1.0), 2, c(1.0))])
            .unwrap();
        match f.eval(c(800.0)) {
            Err(Error::MagnitudeOverflow { term, .. }) => assert_eq!(term, 1),
            other => panic!("{other:?}"),
        }
        let l = f.ln_abs(c(800.0));
        assert_relative_eq!(l, 800.0 + 2.0 * 800f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn borel_examples() {
        let f = ExpSum::exponential(c(1.0), c(0.3));
        assert_relative_eq!(f.gamma(c(2.0)).unwrap().re, 1.0 / 1.7, epsilon = 1e-15);
        assert_relative_eq!(f.gamma_dd(c(2.0)).unwrap().re, 2.0 / 1.7f64.powi(3), epsilon = 1e-15);
        let g = f.times_power(1);
        let z = C64::new(1.5, -0.7);
        let d = z - c(0.3);
        assert!((g.gamma(z).unwrap() - 1.0 / (d * d)).norm() < 1e-15);
        assert!((g.gamma_dd(z).unwrap() - 6.0 / d.powu(4)).norm() < 1e-14);
        assert!(matches!(f.gamma(c(0.3)), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn laurent_coefficient_examples() {
        let lam = C64::new(0.2, 0.1);
        let f = ExpSum::exponential(c(1.0), lam);
        let co = f.laurent_gamma_dd_coeffs(6);
        for (k, v) in co.iter().enumerate() {
            let expect = ((k + 2) * (k + 1)) as f64 * lam.powu(k as u32);
            assert!((v - expect).norm() < 1e-15);
        }
        assert_eq!(f.times_power(1).laurent_gamma_dd_coeffs(0)[0], c(0.0));
        let even = ExpSum::new(vec![Term::new(c(1.0), 0, c(0.3)), Term::new(c(1.0), 0, c(-0.3))])
            .unwrap();
        assert_eq!(even.taylor_coeff(1), c(0.0));
        assert_eq!(even.vanishing_order(), 0);
        let odd = ExpSum::new(vec![Term::new(c(1.0), 0, c(0.3)), Term::new(c(-1.0), 0, c(-0.3))])
            .unwrap();
        assert_eq!(odd.vanishing_order(), 1);
    }

    #[test]
    fn gamma_matches_laurent_series_far_out() {
        let f = ExpSum::new(vec![
            Term::new(C64::new(0.5, 0.2), 0, C64::new(0.2, 0.3)),
            Term::new(c(1.0), 2, c(-0.4)),
            Term::new(C64::new(0.0, 1.0), 1, C64::new(-0.1, -0.3)),
        ])
        .unwrap();
        for k in 0..8 {
            let zeta = 4.0 * C64::from_polar(1.0, 0.7 * k as f64);
            let series: C64 = (0..=50u32).map(|j| f.taylor_coeff(j) / zeta.powu(j + 1)).sum();
            let exact = f.gamma(zeta).unwrap();
            assert!((series - exact).norm() < 1e-10 * exact.norm());
        }
    }

    #[test]
    fn scaled_coefficients_match_plain_ones() {
        let f = ExpSum::new(vec![Term::new(c(1.0), 1, c(0.3)), Term::new(c(2.0), 0, c(-0.2))])
            .unwrap();
        let plain = f.laurent_gamma_dd_coeffs(10);
        for k in 0..=10u32 {
            let s = f.scaled_gamma_dd_coeff(k, 2.0);
            assert!((s * 2f64.powi(k as i32) - plain[k as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn validation_examples() {
        let d = ConvexDomain::disk(c(0.0), 1.0).unwrap();
        let f = ExpSum::exponential(c(1.0), c(0.3));
        assert!(f.validate(&d, 0.0).passed());
        let v = f.validate(&d, 0.5);
        assert!(!v.passed());
        assert!(v.reasons[0].contains("F(0)=1≠0"));
        let far = ExpSum::exponential(c(1.0), c(1.5));
        let v = far.validate(&d, 0.0);
        assert!(v.reasons[0].contains("pole outside domain"));
    }

    #[test]
    fn rejects_duplicate_terms() {
        let t = Term::new(c(1.0), 0, c(0.3));
        assert!(ExpSum::new(vec![t, t]).is_err());
        assert!(ExpSum::new(vec![]).is_err());
    }
}
