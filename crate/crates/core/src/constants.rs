//! Explicit constants of the norm estimates as functions of `β` and the
//! domain geometry. The two absolute constants of the radial estimate are
//! unknown and enter as parameters `a_abs`, `A_abs`.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// `a₀(β) = ∫₀^∞ t^{2β+4} e^{−2t} dt = Γ(2β+5)/2^{2β+5}`.
pub fn a0(beta: f64) -> f64 {
    gamma(2.0 * beta + 5.0) / 2f64.powf(2.0 * beta + 5.0)
}

/// `a₋(β) = ∫₀¹ t (1+t)^{−(2β+5)} dt`.
pub fn a_minus(beta: f64) -> f64 {
    let n = 2.0 * beta + 5.0;
    quad::integrate(|t: f64| t * (1.0 + t).powf(-n), 0.0, 1.0, Tolerance::new(0.0, 1e-14)).value
}

/// `a₊(β) = ∫₁^∞ t (1+t)^{−(2β+5)} dt`, mapped to `(0, 1]` by `t = 1/s`.
pub fn a_plus(beta: f64) -> f64 {
    let n = 2.0 * beta + 5.0;
    quad::integrate(
        |s: f64| s.powf(n - 3.0) * (1.0 + s).powf(-n),
        0.0,
        1.0,
        Tolerance::new(0.0, 1e-14),
    )
    .value
}

pub fn b0(alpha: f64) -> f64 {
    16f64.powf(alpha) / (4f64.powf(2.0 - alpha) - 1.0)
}

pub fn b1(alpha: f64) -> f64 {
    16f64.powf(alpha) / (2f64.powf(3.0 - 2.0 * alpha) - 1.0)
}

pub fn b0_primed(alpha: f64) -> f64 {
    16f64.powf(alpha) / (2f64.powf(3.0 - alpha) - 1.0)
}

pub fn b1_primed(alpha: f64) -> f64 {
    16f64.powf(alpha) / (2f64.powf(5.0 - 2.0 * alpha) - 1.0)
}

/// `B(α, D) = 256 (20R)^{2α} (|∂D| + πε)² / (π² ε^{2(α+1)})`.
pub fn b_domain(alpha: f64, domain: &ConvexDomain, eps: f64) -> f64 {
    let m = domain.metrics();
    256.0 * (20.0 * m.circumradius).powf(2.0 * alpha) * (m.perimeter + PI * eps).powi(2)
        / (PI * PI * eps.powf(2.0 * (alpha + 1.0)))
}

/// Constants of the localization estimate at one `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Localization {
    pub alpha: f64,
    pub eps: f64,
    /// Whether the moment-condition variants `B₀′`, `B₁′` were selected.
    pub primed: bool,
    pub b0: f64,
    pub b1: f64,
    pub b: f64,
}

impl Localization {
    /// `(1 + B₀)(1 + B)`.
    pub fn factor(&self) -> f64 {
        (1.0 + self.b0) * (1.0 + self.b)
    }

    /// `(1 + 5R B₁)(1 + 5R B)` for the `dist^{2α+1}` estimate.
    pub fn shifted_factor(&self, circumradius: f64) -> f64 {
        (1.0 + 5.0 * circumradius * self.b1) * (1.0 + 5.0 * circumradius * self.b)
    }
}

/// Localization constants; `α ∈ [3/2, 5/2)` selects the primed pair and
/// requires `F(0) = 0` of the caller.
pub fn localization(alpha: f64, domain: &ConvexDomain, eps: f64) -> Result<Localization> {
    if !(0.0..2.5).contains(&alpha) {
        return Err(Error::OutOfRange(format!("α={alpha} must lie in [0, 5/2)")));
    }
    let r = domain.metrics().circumradius;
    if !(eps > 0.0 && eps <= r) {
        return Err(Error::OutOfRange(format!("ε={eps} must lie in (0, R={r}]")));
    }
    let primed = alpha >= 1.5;
    let (b0v, b1v) = if primed { (b0_primed(alpha), b1_primed(alpha)) } else { (b0(alpha), b1(alpha)) };
    Ok(Localization { alpha, eps, primed, b0: b0v, b1: b1v, b: b_domain(alpha, domain, eps) })
}

/// Every constant of the two-sided norm estimate at one `(β, D)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct ConstantBundle {
    pub beta: f64,
    pub a_abs: f64,
    pub A_abs: f64,
    pub a0: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    pub a: f64,
    pub A: f64,
    pub localization: Localization,
    pub m: f64,
    pub M: f64,
    pub M0: f64,
    pub c: f64,
    pub C: f64,
}

/// `m(β,D) = (2/9) 4^{−(β+1)} (1 + 25 diam²/(4σ²))^{−(β+1)}`.
pub fn m_lower(beta: f64, domain: &ConvexDomain) -> f64 {
    let g = domain.metrics();
    let ratio = 1.0 + 25.0 * g.diameter.powi(2) / (4.0 * g.min_width.powi(2));
    2.0 / 9.0 * 4f64.powf(-(beta + 1.0)) * ratio.powf(-(beta + 1.0))
}

/// `M(β,D) = 6·4^{β+4} diam⁴ / ((4^{β+1} − 1)|D|²)`.
pub fn m_upper(beta: f64, domain: &ConvexDomain) -> f64 {
    let g = domain.metrics();
    6.0 * 4f64.powf(beta + 4.0) * g.diameter.powi(4) / ((4f64.powf(beta + 1.0) - 1.0) * g.area.powi(2))
}

/// `M₀(D) = 4 diam² |∂D| / (σ² |D|)`.
pub fn m_far(domain: &ConvexDomain) -> f64 {
    let g = domain.metrics();
    4.0 * g.diameter.powi(2) * g.perimeter / (g.min_width.powi(2) * g.area)
}

#[allow(non_snake_case)]
pub fn constant_bundle(
    beta: f64,
    domain: &ConvexDomain,
    eps: f64,
    a_abs: f64,
    A_abs: f64,
) -> Result<ConstantBundle> {
    if !(beta > -0.5 && beta < 1.5) {
        return Err(Error::OutOfRange(format!("β={beta} must lie in (−1/2, 3/2)")));
    }
    if !(a_abs > 0.0 && A_abs > 0.0) {
        return Err(Error::OutOfRange("a_abs and A_abs must be positive".into()));
    }
    let a0v = a0(beta);
    let am = a_minus(beta);
    let ap = a_plus(beta);
    let one2b = 1.0 + 2.0 * beta;
    let a = a_abs * a0v * 2f64.powf(-(2.0 * beta + 5.0)) * one2b * one2b / (4.0 * (2.0 + beta));
    let A = A_abs * a0v * 2.0 * (2.0 + beta).powi(2) / one2b * (1.0 + ap / am);
    let loc = localization(beta + 1.0, domain, eps)?;
    let m = m_lower(beta, domain);
    let M = m_upper(beta, domain);
    let M0 = m_far(domain);
    let c = m / (A * loc.factor());
    let C = (M + M0 * loc.shifted_factor(domain.metrics().circumradius)) / a;
    Ok(ConstantBundle {
        beta,
        a_abs,
        A_abs,
        a0: a0v,
        a_minus: am,
        a_plus: ap,
        a,
        A,
        localization: loc,
        m,
        M,
        M0,
        c,
        C,
    })
}

impl ConstantBundle {
    /// `(name, value)` pairs in report order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let l = &self.localization;
        vec![
            ("a0", self.a0),
            ("a_minus", self.a_minus),
            ("a_plus", self.a_plus),
            ("a", self.a),
            ("A", self.A),
            (if l.primed { "B0'" } else { "B0" }, l.b0),
            (if l.primed { "B1'" } else { "B1" }, l.b1),
            ("B", l.b),
            ("eps", l.eps),
            ("m", self.m),
            ("M", self.M),
            ("M0", self.M0),
            ("c", self.c),
            ("C", self.C),
        ]
    }
}
