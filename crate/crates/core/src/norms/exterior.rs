//! Weighted integrals of `|γ″|²` over the exterior of `D` and its pieces.
//!
//! Near `D` the points are written as `ζ = z(θ) + d e^{−iθ}` so that the
//! distance to `D` is the coordinate `d`; along the flat edges of a smoothed
//! polygon the same is done with the edge parameter in place of `θ`. Beyond
//! the split circle `|ζ| = ρ` polar coordinates with `r = ρ/s` are used.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use super::radial::MAX_ANGULAR_GROWTH;
use super::weights::{p0_weight, p_weight};
use super::{NormValue, QuadratureSpec};
use crate::domain::{cis, ConvexDomain};
use crate::error::{Error, Result};
use crate::functions::ExpSum;
use crate::quad::{self, Tolerance};

/// Pointwise weight multiplying `|γ″(ζ)|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    /// `dist(ζ)^k`.
    DistPow(f64),
    /// `|ζ|^k`.
    AbsPow(f64),
    /// `p(ζ)` at the given `β`.
    P(f64),
    /// `p₀(ζ)` at the given `β`; only defined close to `D`.
    P0(f64),
}

impl Weight {
    // Growth exponent at infinity.
    fn far_exponent(&self) -> Option<f64> {
        match *self {
            Weight::DistPow(k) | Weight::AbsPow(k) => Some(k),
            Weight::P(beta) => Some(2.0 * beta + 3.0),
            Weight::P0(_) => None,
        }
    }

    fn eval(&self, domain: &ConvexDomain, zeta: C64, dist: Option<f64>) -> Result<f64> {
        Ok(match *self {
            Weight::DistPow(k) => dist.unwrap_or_else(|| domain.distance(zeta)).powf(k),
            Weight::AbsPow(k) => zeta.norm().powf(k),
            Weight::P(beta) => p_weight(domain, zeta, beta)?,
            Weight::P0(beta) => p0_weight(domain, zeta, beta)?,
        })
    }

    fn check(&self) -> Result<()> {
        let k = match *self {
            Weight::DistPow(k) => k,
            Weight::AbsPow(_) => return Ok(()),
            Weight::P(beta) | Weight::P0(beta) => 2.0 * beta + 2.0,
        };
        if k > -1.0 {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("weight {self:?} is not integrable at ∂D")))
        }
    }
}

/// Integration region, always intersected with `ℂ ∖ D̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Exterior,
    /// `D(ε) ∖ D̄`.
    Collar(f64),
    /// `B(ρ) ∖ D̄`.
    Ball(f64),
    /// `|ζ| ≥ ρ`.
    Outside(f64),
    /// `ρ₁ ≤ |ζ| < ρ₂`.
    Annulus(f64, f64),
}

enum Reach {
    Collar(f64),
    Ball(f64),
}

struct Ctx<'a> {
    domain: &'a ConvexDomain,
    f: &'a ExpSum,
    weight: Weight,
    rel: f64,
    max_intervals: usize,
    failure: RefCell<Option<Error>>,
    // 1D integrals already done, keyed by the bits of their parameters
    memo: RefCell<HashMap<[u64; 5], (f64, f64)>>,
}

impl Ctx<'_> {
    fn remember(&self, key: [u64; 5], compute: impl FnOnce() -> (f64, f64)) -> (f64, f64) {
        if let Some(&v) = self.memo.borrow().get(&key) {
            return v;
        }
        let v = compute();
        self.memo.borrow_mut().insert(key, v);
        v
    }

    fn value(&self, zeta: C64, dist: Option<f64>) -> f64 {
        match self.weight.eval(self.domain, zeta, dist) {
            Ok(w) => self.f.gamma_dd_unchecked(zeta).norm_sqr() * w,
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }

    fn tol(&self) -> Tolerance {
        Tolerance::new(0.0, self.rel).with_max_intervals(self.max_intervals)
    }

    // ∫₀^{d_hi} G(base + d·n) (a + b d) dd with d = d_hi y².
    fn ray(&self, base: C64, normal: C64, jac: (f64, f64), d_hi: f64) -> (f64, f64) {
        if d_hi <= 0.0 {
            return (0.0, 0.0);
        }
        let key = [base.re.to_bits(), base.im.to_bits(), normal.re.to_bits(), normal.im.to_bits(), d_hi.to_bits() ^ jac.0.to_bits().rotate_left(17)];
        self.remember(key, || {
            let g = |y: f64| {
                let d = d_hi * y * y;
                self.value(base + d * normal, Some(d)) * (jac.0 + jac.1 * d) * 2.0 * d_hi * y
            };
            let out = quad::integrate_breaks(g, &[0.0, 0.125, 0.25, 0.5, 1.0], self.tol());
            (out.value, out.error)
        })
    }
}

fn exit_distance(base: C64, normal: C64, reach: &Reach) -> f64 {
    match *reach {
        Reach::Collar(eps) => eps,
        Reach::Ball(rho) => {
            let b = (base.conj() * normal).re;
            let c = base.norm_sqr() - rho * rho;
            (-b + (b * b - c).max(0.0).sqrt()).max(0.0)
        }
    }
}

fn near_field(ctx: &Ctx, reach: &Reach, n: usize) -> (f64, f64) {
    let domain = ctx.domain;
    let mut value = 0.0;
    let mut error = 0.0;
    for (theta, w) in domain.angular_nodes(n) {
        let base = domain.support_point(theta);
        let normal = cis(-theta);
        let d_hi = exit_distance(base, normal, reach);
        let (v, e) = ctx.ray(base, normal, (domain.density(theta), 1.0), d_hi);
        value += w * v;
        error += w * e;
    }
    let perimeter = domain.metrics().perimeter;
    for atom in domain.atoms() {
        let (a, b) = domain.offset_segment(atom);
        let normal = cis(-atom.angle);
        let m = ((n as f64 * atom.length / perimeter).ceil() as usize).max(8);
        for (s, w) in quad::composite_gauss_legendre(&[0.0, 1.0], m) {
            let base = a + (b - a) * s;
            let d_hi = exit_distance(base, normal, reach);
            let (v, e) = ctx.ray(base, normal, (1.0, 0.0), d_hi);
            value += w * atom.length * v;
            error += w * atom.length * e;
        }
    }
    (value, error)
}

// |ζ| ≥ ρ: r = ρ/s, s = y^q, with q chosen so the integrand is O(y) at 0.
fn far_field(ctx: &Ctx, rho: f64, decay: f64, n: usize) -> (f64, f64) {
    let q = (2.0 / (decay + 1.0)).max(1.0);
    let mut value = 0.0;
    let mut error = 0.0;
    let step = TAU / n as f64;
    for k in 0..n {
        let dir = cis(k as f64 * TAU / n as f64);
        let (v, e) = ctx.remember([dir.re.to_bits(), dir.im.to_bits(), rho.to_bits(), q.to_bits(), 1], || {
            let g = |y: f64| {
                let s = y.powf(q);
                let r = rho / s;
                let jac = r * rho / (s * s) * q * y.powf(q - 1.0);
                if !jac.is_finite() {
                    return 0.0;
                }
                ctx.value(r * dir, None) * jac
            };
            let out = quad::integrate_breaks(g, &[0.0, 0.25, 0.5, 1.0], ctx.tol());
            (out.value, out.error)
        });
        value += step * v;
        error += step * e;
    }
    (value, error)
}

fn annulus(ctx: &Ctx, r1: f64, r2: f64, n: usize) -> (f64, f64) {
    let mut value = 0.0;
    let mut error = 0.0;
    let step = TAU / n as f64;
    for k in 0..n {
        let dir = cis(k as f64 * TAU / n as f64);
        let (v, e) = ctx.remember([dir.re.to_bits(), dir.im.to_bits(), r1.to_bits(), r2.to_bits(), 2], || {
            let out = quad::integrate(|r: f64| ctx.value(r * dir, None) * r, r1, r2, ctx.tol());
            (out.value, out.error)
        });
        value += step * v;
        error += step * e;
    }
    (value, error)
}

fn decay_exponent(f: &ExpSum, weight: &Weight) -> Result<f64> {
    let k0 = f64::from(f.vanishing_order());
    let e = weight
        .far_exponent()
        .ok_or_else(|| Error::Undefined(format!("{weight:?} is not defined far from D")))?;
    // |γ″|² r^{e+1} dr ~ s^{2k0+3−e} ds
    let a = 2.0 * k0 + 3.0 - e;
    if a <= -1.0 {
        return Err(Error::NormDivergent(format!(
            "|γ″|²·{weight:?} decays like |ζ|^{} at infinity",
            -(2.0 * k0 + 6.0) + e
        )));
    }
    Ok(a)
}

fn region_sum(ctx: &Ctx, region: Region, split: f64, n: usize) -> Result<(f64, f64)> {
    let radius = ctx.domain.metrics().circumradius;
    let need_outside = |rho: f64| {
        if rho >= radius {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("radius {rho} cuts into D (R={radius})")))
        }
    };
    Ok(match region {
        Region::Exterior => {
            let rho = split * radius;
            let decay = decay_exponent(ctx.f, &ctx.weight)?;
            let (a, ea) = near_field(ctx, &Reach::Ball(rho), n);
            let (b, eb) = far_field(ctx, rho, decay, n);
            (a + b, ea + eb)
        }
        Region::Collar(eps) => {
            if !(eps > 0.0) {
                return Err(Error::OutOfRange(format!("collar width {eps} must be positive")));
            }
            near_field(ctx, &Reach::Collar(eps), n)
        }
        Region::Ball(rho) => {
            need_outside(rho)?;
            near_field(ctx, &Reach::Ball(rho), n)
        }
        Region::Outside(rho) => {
            need_outside(rho)?;
            let decay = decay_exponent(ctx.f, &ctx.weight)?;
            far_field(ctx, rho, decay, n)
        }
        Region::Annulus(r1, r2) => {
            need_outside(r1)?;
            if !(r2 > r1) {
                return Err(Error::OutOfRange(format!("annulus radii {r1} ≥ {r2}")));
            }
            annulus(ctx, r1, r2, n)
        }
    })
}

/// `∫_{region} |γ″(ζ)|² w(ζ) dm(ζ)`. Angular rules are doubled until they
/// agree with their half-size versions.
pub fn weighted_exterior_integral(
    domain: &ConvexDomain,
    f: &ExpSum,
    weight: Weight,
    region: Region,
    spec: &QuadratureSpec,
) -> Result<NormValue> {
    weight.check()?;
    if f.pole_margin(domain) < 1e-6 * domain.metrics().min_width {
        return Err(Error::InvalidFunction("pole outside domain".into()));
    }
    let ctx = Ctx {
        domain,
        f,
        weight,
        rel: spec.rel_tol / 10.0,
        max_intervals: spec.max_subdiv,
        failure: RefCell::new(None),
        memo: RefCell::new(HashMap::new()),
    };
    let mut n = spec.angular_nodes;
    let (mut coarse, _) = region_sum(&ctx, region, spec.split_radius, n / 2)?;
    loop {
        let (fine, fine_err) = region_sum(&ctx, region, spec.split_radius, n)?;
        if let Some(e) = ctx.failure.borrow_mut().take() {
            return Err(e);
        }
        let diff = (fine - coarse).abs();
        if diff <= 0.1 * spec.rel_tol * fine.abs() || n >= MAX_ANGULAR_GROWTH * spec.angular_nodes {
            return Ok(NormValue::new(fine, diff + fine_err, vec![n, n / 2]));
        }
        coarse = fine;
        n *= 2;
    }
}

/// `‖γ‖²_{G^α} = ∫_{ℂ∖D̄} |γ″|² dist^{2α} dm`.
pub fn galpha_norm(domain: &ConvexDomain, f: &ExpSum, alpha: f64, spec: &QuadratureSpec) -> Result<NormValue> {
    if !(alpha > 0.0) {
        return Err(Error::OutOfRange(format!("α={alpha} must be positive")));
    }
    weighted_exterior_integral(domain, f, Weight::DistPow(2.0 * alpha), Region::Exterior, spec)
}

/// The same integrand restricted to the collar `D(ε) ∖ D̄`.
pub fn localized_galpha(
    domain: &ConvexDomain,
    f: &ExpSum,
    alpha: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<NormValue> {
    if !(alpha > 0.0) {
        return Err(Error::OutOfRange(format!("α={alpha} must be positive")));
    }
    weighted_exterior_integral(domain, f, Weight::DistPow(2.0 * alpha), Region::Collar(eps), spec)
}

/// `∫_{|ζ|≥ρ} |γ″|² |ζ|^{2t} dm = 2π Σ_k |γ″_k|² / (2(k+2−t) ρ^{2(k+2−t)})`,
/// summed until the terms stop mattering.
pub fn laurent_tail(f: &ExpSum, t: f64, rho: f64) -> Result<f64> {
    let k0 = f.vanishing_order();
    if t >= f64::from(k0) + 2.0 {
        return Err(Error::TailDivergent { t, first_nonzero: k0 as usize });
    }
    let top = f.poles().map(|l| l.norm()).fold(0.0, f64::max);
    if !(rho > top) {
        return Err(Error::OutOfRange(format!("ρ={rho} must exceed every |λ| (max {top})")));
    }
    let lead = rho.powf(2.0 * t - 4.0);
    let mut sum = 0.0;
    let mut quiet = 0;
    for k in k0..20_000 {
        let b = f.scaled_gamma_dd_coeff(k, rho).norm_sqr();
        let term = PI * b * lead / (f64::from(k) + 2.0 - t);
        sum += term;
        if term <= 1e-18 * sum {
            quiet += 1;
            if quiet >= 8 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(sum)
}

/// Tensor-product nodes over `ℂ ∖ D̄` carrying precomputed weights, so that
/// one weight (typically `p`) serves a whole family of functions. Levels with
/// doubled angular resolution are built on demand.
pub struct ExteriorGrid {
    domain: ConvexDomain,
    weight: Weight,
    rho: f64,
    q: f64,
    base: usize,
    levels: Vec<OnceCell<Result<Vec<(C64, f64)>>>>,
}

/// Finest level is this many times the configured angular node count.
pub const MAX_GRID_GROWTH: usize = 8;

fn grid_nodes(
    domain: &ConvexDomain,
    weight: &Weight,
    rho: f64,
    q: f64,
    n: usize,
    n_far: usize,
    per_panel: usize,
) -> Result<Vec<(C64, f64)>> {
    let y_rule = quad::composite_gauss_legendre(&[0.0, 0.125, 0.25, 0.5, 1.0], per_panel);
    let far_rule = quad::composite_gauss_legendre(&[0.0, 0.25, 0.5, 1.0], per_panel);
    let reach = Reach::Ball(rho);
    let mut nodes = Vec::new();
    let push_ray = |base: C64, normal: C64, jac: (f64, f64), w: f64, nodes: &mut Vec<(C64, f64)>| -> Result<()> {
        let d_hi = exit_distance(base, normal, &reach);
        for &(y, wy) in &y_rule {
            let d = d_hi * y * y;
            let zeta = base + d * normal;
            let mass = w * wy * (jac.0 + jac.1 * d) * 2.0 * d_hi * y;
            nodes.push((zeta, mass * weight.eval(domain, zeta, Some(d))?));
        }
        Ok(())
    };
    for (theta, w) in domain.angular_nodes(n) {
        push_ray(domain.support_point(theta), cis(-theta), (domain.density(theta), 1.0), w, &mut nodes)?;
    }
    let perimeter = domain.metrics().perimeter;
    for atom in domain.atoms() {
        let (a, b) = domain.offset_segment(atom);
        let m = ((n as f64 * atom.length / perimeter).ceil() as usize).max(8);
        for (s, w) in quad::composite_gauss_legendre(&[0.0, 1.0], m) {
            push_ray(a + (b - a) * s, cis(-atom.angle), (1.0, 0.0), w * atom.length, &mut nodes)?;
        }
    }
    let step = TAU / n_far as f64;
    for k in 0..n_far {
        let dir = cis(k as f64 * step);
        for &(y, wy) in &far_rule {
            let s = y.powf(q);
            let r = rho / s;
            let mass = step * wy * r * rho / (s * s) * q * y.powf(q - 1.0);
            let zeta = r * dir;
            nodes.push((zeta, mass * weight.eval(domain, zeta, None)?));
        }
    }
    Ok(nodes)
}

impl ExteriorGrid {
    /// Nodes for functions vanishing at the origin to order at least `min_order`.
    /// The two coarsest levels are built here so that weight failures surface early.
    pub fn new(domain: &ConvexDomain, weight: Weight, min_order: u32, spec: &QuadratureSpec) -> Result<Self> {
        weight.check()?;
        let e = weight
            .far_exponent()
            .ok_or_else(|| Error::Undefined(format!("{weight:?} is not defined far from D")))?;
        let a = 2.0 * f64::from(min_order) + 3.0 - e;
        if a <= -1.0 {
            return Err(Error::NormDivergent(format!(
                "{weight:?} is not integrable against functions of order {min_order}"
            )));
        }
        let base = (spec.angular_nodes / 2).max(2);
        let count = (MAX_GRID_GROWTH * spec.angular_nodes / base).max(2).ilog2() as usize + 1;
        let grid = Self {
            domain: domain.clone(),
            weight,
            rho: spec.split_radius * domain.metrics().circumradius,
            q: (2.0 / (a + 1.0)).max(1.0),
            base,
            levels: (0..count).map(|_| OnceCell::new()).collect(),
        };
        grid.level(0)?;
        grid.level(1)?;
        Ok(grid)
    }

    fn level(&self, k: usize) -> Result<&[(C64, f64)]> {
        let n = self.base << k;
        // beyond ρ the integrand is analytic in the angle, so the far field
        // stays at the configured resolution
        let n_far = n.min(2 * self.base);
        self.levels[k]
            .get_or_init(|| grid_nodes(&self.domain, &self.weight, self.rho, self.q, n, n_far, 8 + n / 16))
            .as_deref()
            .map_err(Clone::clone)
    }

    /// Nodes at the configured resolution.
    pub fn len(&self) -> usize {
        self.level(1).map_or(0, <[_]>::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn sum(&self, k: usize, f: &ExpSum) -> Result<f64> {
        Ok(self.level(k)?.iter().map(|&(z, w)| f.gamma_dd_unchecked(z).norm_sqr() * w).sum())
    }

    /// `∫ |γ″|² w dm` for one function at the configured resolution.
    pub fn integrate(&self, f: &ExpSum) -> NormValue {
        let fine = self.sum(1, f).expect("built in new");
        let coarse = self.sum(0, f).expect("built in new");
        NormValue::new(fine, (fine - coarse).abs(), vec![self.base * 2, self.base])
    }

    /// The same integral, doubling the angular resolution from at least
    /// `min_nodes` until two successive levels agree to `rel`. At the finest
    /// level the last difference is reported whether or not it met `rel`.
    pub fn integrate_to(&self, f: &ExpSum, min_nodes: usize, rel: f64) -> Result<NormValue> {
        let mut k = 1;
        while k + 1 < self.levels.len() && self.base << k < min_nodes {
            k += 1;
        }
        let mut coarse = self.sum(k - 1, f)?;
        loop {
            let fine = self.sum(k, f)?;
            let diff = (fine - coarse).abs();
            if diff <= rel * fine.abs() || k + 1 == self.levels.len() {
                return Ok(NormValue::new(fine, diff, vec![self.base << k, self.base << (k - 1)]));
            }
            coarse = fine;
            k += 1;
        }
    }
}
