//! The radial weight `v`, its Young conjugate `ṽ`, the boundary graph `f`
//! seen from an exterior point, its conjugate `g`, and the moduli `ρ`, `ρ±`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::domain::{cis, ConvexDomain};
use crate::error::{Error, Result};
use crate::norms::ln_chord_transform;
use crate::quad;

const FD_STEP: f64 = 1e-4;
const ROOT_TOL: f64 = 1e-13;
const RHO_TOL: f64 = 1e-10;

/// `η(r) = e^{2h(φ)r}/K(re^{iφ})`, `u = ½ ln(η/r⁴)` and `v = u − β ln r` along one ray.
#[derive(Clone, Copy, Debug)]
pub struct RadialWeight<'a> {
    domain: &'a ConvexDomain,
    phi: f64,
    beta: f64,
}

/// `(v, v′, v″)` at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivatives {
    pub v: f64,
    pub dv: f64,
    pub ddv: f64,
}

/// `ṽ(x)`, the maximiser `r(x)` and `ṽ″(x) = 1/v″(r(x))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conjugate {
    pub value: f64,
    pub r: f64,
    pub second: f64,
}

impl<'a> RadialWeight<'a> {
    pub fn new(domain: &'a ConvexDomain, phi: f64, beta: f64) -> Result<Self> {
        if !(beta > -0.5) || !beta.is_finite() {
            return Err(Error::OutOfRange(format!("β={beta} must exceed −1/2")));
        }
        Ok(Self { domain, phi, beta })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The same ray with another β.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.domain, self.phi, beta)
    }

    fn ln_j(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::OutOfRange(format!("radial weight needs r > 0, got {r}")));
        }
        let l = ln_chord_transform(self.domain, r, self.phi);
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::KernelOverflow { r })
        }
    }

    pub fn ln_eta(&self, r: f64) -> Result<f64> {
        Ok(-self.ln_j(r)?)
    }

    pub fn u(&self, r: f64) -> Result<f64> {
        Ok(-0.5 * self.ln_j(r)? - 2.0 * r.ln())
    }

    pub fn v(&self, r: f64) -> Result<f64> {
        Ok(self.u(r)? - self.beta * r.ln())
    }

    /// Central differences with step `r·10⁻⁴`, Richardson-extrapolated once.
    pub fn derivatives(&self, r: f64) -> Result<Derivatives> {
        let v0 = self.v(r)?;
        let stencil = |h: f64| -> Result<(f64, f64)> {
            let (p, m) = (self.v(r + h)?, self.v(r - h)?);
            Ok(((p - m) / (2.0 * h), (p - 2.0 * v0 + m) / (h * h)))
        };
        let h = r * FD_STEP;
        let (d1, d2) = stencil(h)?;
        let (e1, e2) = stencil(0.5 * h)?;
        Ok(Derivatives { v: v0, dv: (4.0 * e1 - d1) / 3.0, ddv: (4.0 * e2 - d2) / 3.0 })
    }

    /// `(r, v, v′, v″)` rows, the diagnostic table of a ray.
    pub fn table(&self, radii: &[f64]) -> Result<Vec<[f64; 4]>> {
        radii
            .iter()
            .map(|&r| self.derivatives(r).map(|d| [r, d.v, d.dv, d.ddv]))
            .collect()
    }
}

pub fn v_derivatives(w: &RadialWeight, r: f64) -> Result<Derivatives> {
    w.derivatives(r)
}

/// `ṽ(x) = sup_{r>0}(xr − v(r))` for `x < 0`, with the maximiser searched
/// only inside `[−(½+β)/x, −(2+β)/x]`.
pub fn young_conjugate_radial(w: &RadialWeight, x: f64) -> Result<Conjugate> {
    if !(x < 0.0) || !x.is_finite() {
        return Err(Error::OutOfRange(format!("ṽ is defined for x < 0, got {x}")));
    }
    let lo = -(0.5 + w.beta) / x;
    let hi = -(2.0 + w.beta) / x;
    let violation = Error::BracketViolation { x, lo, hi };
    let slope = |r: f64| w.derivatives(r).map(|d| d.dv - x);
    let (at_lo, at_hi) = (slope(lo)?, slope(hi)?);
    // v′ is only known to finite-difference accuracy at the bracket ends
    let slack = 1e-6 * x.abs();
    if at_lo > slack || at_hi < -slack {
        return Err(violation);
    }
    let mut failure = None;
    let r = quad::bisect(
        |r| match slope(r) {
            Ok(s) => s,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        lo,
        hi,
        ROOT_TOL * hi,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let d = w.derivatives(r)?;
    if !(d.ddv > 0.0) {
        return Err(violation);
    }
    Ok(Conjugate { value: x * r - d.v, r, second: 1.0 / d.ddv })
}

/// `D` seen from an exterior point `ζ`: `ζ` is the origin and the ordinate
/// axis points to the nearest boundary point, so that the lower boundary is
/// the graph of a convex `f` on `[X₁, X₂]` with `min f = f(0) = dist(ζ)`.
#[derive(Clone, Debug)]
pub struct BoundaryGraph {
    domain: ConvexDomain,
    zeta: C64,
    // frame coordinates are (z − ζ)·rotation
    rotation: C64,
    pub distance: f64,
    pub x1: f64,
    pub x2: f64,
}

pub fn boundary_graph(domain: &ConvexDomain, zeta: C64) -> Result<BoundaryGraph> {
    let (gap, phi_star) = domain.separation(zeta);
    if gap <= 0.0 {
        return Err(Error::NotExterior { re: zeta.re, im: zeta.im });
    }
    let mut graph = BoundaryGraph {
        domain: domain.clone(),
        zeta,
        rotation: cis(phi_star - 0.5 * PI),
        distance: gap,
        x1: 0.0,
        x2: 0.0,
    };
    graph.x1 = -graph.support(PI);
    graph.x2 = graph.support(0.0);
    Ok(graph)
}

impl BoundaryGraph {
    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    pub fn to_frame(&self, z: C64) -> C64 {
        (z - self.zeta) * self.rotation
    }

    pub fn from_frame(&self, w: C64) -> C64 {
        self.zeta + w / self.rotation
    }

    /// Support function of the domain in the frame.
    pub fn support(&self, psi: f64) -> f64 {
        let phi = psi + self.rotation.arg();
        self.domain.h(phi) - (self.zeta * cis(phi)).re
    }

    fn support_point(&self, psi: f64) -> C64 {
        self.to_frame(self.domain.support_point(psi + self.rotation.arg()))
    }

    /// Normal angle `ψ ∈ [0, π]` of the lower support line touching at abscissa `x`.
    fn normal_angle(&self, x: f64) -> f64 {
        // the abscissa of the support point decreases from X₂ to X₁ on [0, π]
        quad::bisect(|psi| self.support_point(psi).re - x, 0.0, PI, 1e-15)
    }

    fn check(&self, x: f64) -> Result<()> {
        let pad = 1e-12 * (self.x2 - self.x1);
        if x < self.x1 - pad || x > self.x2 + pad {
            return Err(Error::OutOfRange(format!("x={x} outside [{}, {}]", self.x1, self.x2)));
        }
        Ok(())
    }

    /// `f(x)` and `f′(x)`; the slope is infinite at a vertical end.
    pub fn f_and_slope(&self, x: f64) -> Result<(f64, f64)> {
        self.check(x)?;
        let psi = self.normal_angle(x);
        let (s, c) = psi.sin_cos();
        if s <= 1e-12 {
            // vertical support line: the lowest point of the end chord
            let p = self.support_point(psi);
            return Ok((p.im, if c > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY }));
        }
        Ok(((x * c - self.support(psi)) / s, c / s))
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        self.f_and_slope(x).map(|p| p.0)
    }

    /// `g(t) = sup_{x∈[X₁,X₂]}(xt − f(x)) = √(1+t²)·H(arccot t)`.
    pub fn g(&self, t: f64) -> f64 {
        let psi = 1f64.atan2(t);
        t.hypot(1.0) * self.support(psi)
    }

    /// `g′(t)`, the abscissa of the point where the slope of `f` is `t`.
    pub fn g_prime(&self, t: f64) -> f64 {
        self.support_point(1f64.atan2(t)).re
    }

    /// `ρ₋(f, x₀, δ)` and `ρ₊(f, x₀, δ)`.
    pub fn rho_pm(&self, x0: f64, delta: f64) -> Result<(f64, f64)> {
        let (f0, slope) = self.f_and_slope(x0)?;
        if !(delta > 0.0) {
            return Err(Error::OutOfRange(format!("δ={delta} must be positive")));
        }
        // ∫₀^ρ |f′(x₀ ± y) − f′(x₀)| dy = f(x₀ ± ρ) − f(x₀) ∓ ρ f′(x₀)
        let side = |sign: f64, cap: f64| -> Result<f64> {
            if cap <= 0.0 {
                return Ok(0.0);
            }
            let excess = |rho: f64| -> f64 {
                let x = (x0 + sign * rho).clamp(self.x1, self.x2);
                match self.f(x) {
                    Ok(fx) if slope.is_finite() => fx - f0 - sign * rho * slope - delta,
                    _ => f64::INFINITY,
                }
            };
            if excess(cap) <= 0.0 {
                return Ok(cap);
            }
            Ok(quad::bisect(excess, 0.0, cap, RHO_TOL * cap))
        };
        Ok((side(-1.0, x0 - self.x1)?, side(1.0, self.x2 - x0)?))
    }

    /// Tangent angles `φ₁ ≤ φ₂` of the two tangents from the origin, measured from the abscissa.
    pub fn tangent_inclinations(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain.tangent_angles(self.zeta)?;
        let turn = self.rotation.arg();
        // a support line with normal angle θ has inclination π/2 − θ in the frame
        let incl = |theta: f64| (0.5 * PI - (theta - turn)).rem_euclid(PI);
        let (a, b) = (incl(hi), incl(lo));
        Ok((a.min(b), a.max(b)))
    }
}

/// `ρ(g, t₀, δ) = sup{s > 0 : ∫_{−s}^{s} |g′(t₀+t) − g′(t₀)| dt ≤ δ}` for a convex `g`.
///
/// For convex `g` the integral equals `g(t₀+s) + g(t₀−s) − 2g(t₀)`.
/// Returns infinity when `g` is affine near `t₀` on every scale tried.
pub fn rho(g: impl Fn(f64) -> f64, t0: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::OutOfRange(format!("δ={delta} must be positive")));
    }
    let g0 = g(t0);
    let excess = |s: f64| g(t0 + s) + g(t0 - s) - 2.0 * g0 - delta;
    let mut hi = 1.0;
    while excess(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e15 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.5 * hi;
    while lo > 1e-300 && excess(lo) > 0.0 {
        lo *= 0.5;
    }
    Ok(quad::bisect(excess, lo, hi, RHO_TOL * lo.max(f64::MIN_POSITIVE)))
}
