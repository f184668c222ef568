//! `K₀(t, φ)` and the exterior weights `p(ζ)`, `p₀(ζ)` obtained by
//! integrating over the directions whose support line separates `ζ` from `D`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::constants::a0;
use crate::domain::{cis, ConvexDomain};
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

const WEIGHT_TOL: f64 = 1e-11;

/// `K₀(t, φ) = a₀(β) ∫_{−R_φ}^0 u(x, φ) |x + t|^{−(2β+5)} dx` for `t < 0`.
pub fn k0(domain: &ConvexDomain, t: f64, phi: f64, beta: f64) -> Result<f64> {
    if !(t < 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("K₀ needs t < 0, got {t}")));
    }
    let width = domain.width(phi);
    let power = 2.0 * beta + 5.0;
    // x = −R_φ sin²(ψ/2); breaks where |x| ≈ |t|·4^j
    let mut breaks = vec![0.0];
    let mut x = -t;
    while x < width {
        breaks.push(2.0 * (x / width).sqrt().asin());
        x *= 4.0;
    }
    breaks.push(PI);
    let f = |psi: f64| {
        let s = (0.5 * psi).sin();
        let x = -width * s * s;
        domain.chord_length(x, phi) * (x + t).abs().powf(-power) * 0.5 * width * psi.sin()
    };
    // scale the absolute floor to the size of the answer
    let size = domain.metrics().area * (-t).powf(-power) * 2f64.powf(-power);
    let integral = quad::integrate_breaks(f, &breaks, Tolerance::new(1e-14 * size, 1e-12)).value;
    Ok(a0(beta) * integral)
}

struct Arc {
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    atoms: Vec<(f64, f64)>,
}

fn separating_arc(domain: &ConvexDomain, zeta: C64) -> Result<Arc> {
    let (gap, star) = domain.separation(zeta);
    if gap <= 0.0 {
        return Err(Error::NotExterior { re: zeta.re, im: zeta.im });
    }
    let (lo, hi) = domain.tangent_angles_from(zeta, star);
    let mut breaks = vec![lo, star, hi];
    let mut atoms = Vec::new();
    for atom in domain.atoms() {
        // copies of the atom angle inside (lo, hi)
        let mut a = atom.angle + 2.0 * PI * ((lo - atom.angle) / (2.0 * PI)).ceil();
        while a < hi {
            if a > lo {
                breaks.push(a);
                atoms.push((a, atom.length));
            }
            a += 2.0 * PI;
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(Arc { lo, hi, breaks, atoms })
}

// Sign changes of `f` over the arc, located by a scan and bisection.
fn crossings(arc: &Arc, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = 24;
    let step = (arc.hi - arc.lo) / n as f64;
    let mut out = Vec::new();
    let mut prev = (arc.lo, f(arc.lo));
    for k in 1..=n {
        let theta = arc.lo + step * k as f64;
        let cur = (theta, f(theta));
        if (prev.1 > 0.0) != (cur.1 > 0.0) {
            out.push(quad::bisect(&f, prev.0, cur.0, 1e-14));
        }
        prev = cur;
    }
    out
}

// Angles where the gap reaches the width, so that s(−g) saturates at |D|.
fn saturation_angles(domain: &ConvexDomain, zeta: C64, arc: &Arc) -> Vec<f64> {
    crossings(arc, |theta| gap(domain, zeta, theta) - domain.width(theta))
}

// Angles where the cutting line at depth g passes an end of a flat edge,
// where s(−g, θ) loses a derivative.
fn junction_angles(domain: &ConvexDomain, zeta: C64, arc: &Arc) -> Vec<f64> {
    let mut out = Vec::new();
    for atom in domain.atoms() {
        let (a, b) = domain.offset_segment(atom);
        for c in [a, b] {
            out.extend(crossings(arc, |theta| ((c + zeta) * cis(theta)).re - 2.0 * domain.h(theta)));
        }
    }
    out
}

fn gap(domain: &ConvexDomain, zeta: C64, theta: f64) -> f64 {
    (zeta * cis(theta)).re - domain.h(theta)
}

/// `p(ζ) = ∫_{φ₋}^{φ₊} g(θ)^{2β+3} / s(−g(θ), θ) dΔ(θ)` with
/// `g(θ) = Re ζe^{iθ} − h(θ)`.
pub fn p_weight(domain: &ConvexDomain, zeta: C64, beta: f64) -> Result<f64> {
    let mut arc = separating_arc(domain, zeta)?;
    let kinks = saturation_angles(domain, zeta, &arc);
    let saturated = !kinks.is_empty();
    arc.breaks.extend(kinks);
    arc.breaks.extend(junction_angles(domain, zeta, &arc));
    arc.breaks.sort_by(f64::total_cmp);
    let power = 2.0 * beta + 3.0;
    let term = |theta: f64| {
        let g = gap(domain, zeta, theta);
        if g <= 0.0 {
            return 0.0;
        }
        g.powf(power) / domain.section_area(-g, theta)
    };
    let integrand = |theta: f64| term(theta) * domain.density(theta);
    let tol = Tolerance::new(0.0, WEIGHT_TOL);
    // saturation and polygon corners leave endpoint singularities that make
    // Gauss-Kronrod bisect a lot; tanh-sinh copes
    let smooth = if saturated || domain.is_polygonal() {
        arc.breaks.windows(2).map(|w| quad::tanh_sinh(integrand, w[0], w[1], tol).value).sum()
    } else {
        quad::integrate_breaks(integrand, &arc.breaks, tol).value
    };
    let flat: f64 = arc.atoms.iter().map(|&(a, len)| len * term(a)).sum();
    debug_assert!(arc.lo < arc.hi);
    Ok(smooth + flat)
}

/// `p₀(ζ) = ∫_{φ₋}^{φ₊} g(θ)^{2β+2} / u(−g(θ), θ) dΔ(θ)`; undefined once the
/// translated support line misses `D`.
pub fn p0_weight(domain: &ConvexDomain, zeta: C64, beta: f64) -> Result<f64> {
    let arc = separating_arc(domain, zeta)?;
    let power = 2.0 * beta + 2.0;
    let mut missed = None;
    let mut term = |theta: f64| {
        let g = gap(domain, zeta, theta);
        if g <= 0.0 {
            return 0.0;
        }
        let u = domain.chord_length(-g, theta);
        if u <= 0.0 {
            missed.get_or_insert(theta);
            return 0.0;
        }
        g.powf(power) / u
    };
    let smooth = quad::integrate_breaks(
        |theta: f64| term(theta) * domain.density(theta),
        &arc.breaks,
        Tolerance::new(0.0, WEIGHT_TOL),
    )
    .value;
    let flat: f64 = arc.atoms.iter().map(|&(a, len)| len * term(a)).sum();
    if let Some(theta) = missed {
        return Err(Error::Undefined(format!(
            "p₀ at {}{:+}i: the chord at θ={theta:.6} is empty",
            zeta.re, zeta.im
        )));
    }
    Ok(smooth + flat)
}
