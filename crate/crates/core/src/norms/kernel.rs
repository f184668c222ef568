//! `K(λ) = ∫_D e^{2Re(λz)} dm(z)` through the chord representation
//! `K(re^{iφ}) = e^{2rh(φ)} ∫_{−R_φ}^0 e^{2rx} u(x,φ) dx`, kept in log form.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::domain::{cis, ConvexDomain};
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

// Beyond e^{-CUT} relative to the peak the chord integrand is dropped.
const CUT: f64 = 50.0;
const LOG_MAX: f64 = 709.0;

/// Upper limit of the ψ-substitution `x = −R_φ sin²(ψ/2)` at rate `r`.
fn psi_limit(r: f64, width: f64) -> f64 {
    let big = 2.0 * r * width;
    if big <= CUT {
        PI
    } else {
        2.0 * (CUT / big).sqrt().asin()
    }
}

fn chord_integral<F: Fn(f64) -> f64>(domain: &ConvexDomain, r: f64, phi: f64, moment: F) -> f64 {
    let width = domain.width(phi);
    let top = psi_limit(r, width);
    let f = |psi: f64| {
        let s = (0.5 * psi).sin();
        let x = -width * s * s;
        (2.0 * r * x).exp() * domain.chord_length(x, phi) * moment(x) * 0.5 * width * psi.sin()
    };
    let breaks = [0.0, 0.25 * top, 0.5 * top, top];
    quad::integrate_breaks(f, &breaks, Tolerance::new(0.0, 1e-14)).value
}

/// `ln ∫_{−R_φ}^0 e^{2rx} u(x,φ) dx`, so that `ln K(re^{iφ}) = 2rh(φ) + ln J`.
pub fn ln_chord_transform(domain: &ConvexDomain, r: f64, phi: f64) -> f64 {
    if r == 0.0 {
        return domain.metrics().area.ln();
    }
    chord_integral(domain, r, phi, |_| 1.0).ln()
}

/// `ln K(λ)`.
pub fn ln_laplace_kernel(domain: &ConvexDomain, lambda: C64) -> f64 {
    let r = lambda.norm();
    if r == 0.0 {
        return domain.metrics().area.ln();
    }
    let phi = lambda.arg();
    2.0 * r * domain.h(phi) + ln_chord_transform(domain, r, phi)
}

/// `K(λ)`; errors only when the value itself is not representable.
pub fn laplace_kernel(domain: &ConvexDomain, lambda: C64) -> Result<f64> {
    let l = ln_laplace_kernel(domain, lambda);
    if l > LOG_MAX {
        return Err(Error::KernelOverflow { r: lambda.norm() });
    }
    Ok(l.exp())
}

/// `ln K₁(λ) = ln ∫_{∂D} e^{2Re(λz)} ds(z)`.
pub fn ln_boundary_kernel(domain: &ConvexDomain, lambda: C64) -> f64 {
    let r = lambda.norm();
    let phi = if r == 0.0 { 0.0 } else { lambda.arg() };
    let e = cis(phi);
    let h = domain.h(phi);
    let depth = |z: C64| (z * e).re - h;
    let rho = domain.density(phi).max(1e-3 * domain.metrics().diameter);
    let spread = (4.0 / (r * rho).max(1e-300).sqrt()).min(PI);
    let mut breaks = vec![phi - PI, phi - spread, phi - 0.25 * spread, phi, phi + 0.25 * spread, phi + spread, phi + PI];
    for atom in domain.atoms() {
        let mut a = atom.angle;
        while a > phi - PI {
            a -= 2.0 * PI;
        }
        while a < phi - PI {
            a += 2.0 * PI;
        }
        breaks.push(a);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let smooth = quad::integrate_breaks(
        |theta: f64| (2.0 * r * depth(domain.support_point(theta))).exp() * domain.density(theta),
        &breaks,
        Tolerance::new(0.0, 1e-13),
    )
    .value;
    let flat: f64 = domain
        .atoms()
        .iter()
        .map(|atom| {
            let (a, b) = domain.offset_segment(atom);
            let (xa, xb) = (depth(a), depth(b));
            let y = 2.0 * r * (xb - xa);
            let factor = if y.abs() < 1e-12 { 1.0 + 0.5 * y } else { y.exp_m1() / y };
            atom.length * (2.0 * r * xa).exp() * factor
        })
        .sum();
    2.0 * r * h + (smooth + flat).ln()
}

pub fn boundary_kernel(domain: &ConvexDomain, lambda: C64) -> Result<f64> {
    let l = ln_boundary_kernel(domain, lambda);
    if l > LOG_MAX {
        return Err(Error::KernelOverflow { r: lambda.norm() });
    }
    Ok(l.exp())
}

/// Moments of the tilted chord measure `e^{2rx} u(x,φ) dx` on `[−R_φ, 0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelMoments {
    pub ln_mass: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Independent route to the derivatives of `ln J`: `(ln J)′ = 2·mean`,
/// `(ln J)″ = 4·variance`.
pub fn kernel_moments(domain: &ConvexDomain, r: f64, phi: f64) -> KernelMoments {
    let m0 = chord_integral(domain, r, phi, |_| 1.0);
    let m1 = chord_integral(domain, r, phi, |x| x);
    let mean = m1 / m0;
    let c2 = chord_integral(domain, r, phi, |x| (x - mean) * (x - mean));
    KernelMoments { ln_mass: m0.ln(), mean, variance: c2 / m0 }
}
