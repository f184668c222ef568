//! Bounded convex domains described through the support function
//! `h(φ) = max_{z∈D̄} Re(z e^{iφ})`.
//!
//! Every domain is stored as a core shape (a point, an ellipse or a convex
//! polygon) plus a nonnegative offset, i.e. the Minkowski sum
//! `core ⊕ B(offset)`. Disks are points with positive offset, smoothed
//! polygons are polygons with positive offset, and dilation only moves the
//! offset, so `h`, `h′`, `h″` stay piecewise analytic.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Scan resolution used when a separating angle has to be bracketed.
pub const ANGLE_SCAN: usize = 720;

const ATOM_ANGLE_TOL: f64 = 1e-12;

pub(crate) fn cis(t: f64) -> C64 {
    C64::new(t.cos(), t.sin())
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Area of the segment of the unit disk cut off at depth `d ∈ [0, 2]`.
pub(crate) fn unit_segment_area(d: f64) -> f64 {
    let d = d.clamp(0.0, 2.0);
    let x = 4.0 * (0.5 * d).sqrt().asin();
    0.5 * x_minus_sin(x)
}

fn x_minus_sin(x: f64) -> f64 {
    if x < 1.0 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -x2 / ((k + 1.0) * (k + 2.0));
            sum += term;
            k += 2.0;
        }
        sum
    } else {
        x - x.sin()
    }
}

/// Declarative description of a domain, as it appears in a run config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        a: f64,
        b: f64,
        #[serde(default)]
        rotation: f64,
    },
    SmoothedPolygon {
        vertices: Vec<[f64; 2]>,
        rounding: f64,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<ConvexDomain> {
        let c = |p: &[f64; 2]| C64::new(p[0], p[1]);
        match self {
            DomainSpec::Disk { center, radius } => ConvexDomain::disk(c(center), *radius),
            DomainSpec::Ellipse { center, a, b, rotation } => {
                ConvexDomain::ellipse(c(center), *a, *b, *rotation)
            }
            DomainSpec::SmoothedPolygon { vertices, rounding } => {
                ConvexDomain::smoothed_polygon(vertices.iter().map(c).collect(), *rounding)
            }
        }
    }
}

/// A flat piece of the boundary: an atom of the arc measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    /// Normal angle `φ` with outward normal `e^{-iφ}`, in `[0, 2π)`.
    pub angle: f64,
    pub length: f64,
    start: C64,
    end: C64,
}

#[derive(Clone, Debug, PartialEq)]
enum Core {
    Point(C64),
    Ellipse { center: C64, a: f64, b: f64, rotation: f64 },
    Polygon { vertices: Vec<C64>, atoms: Vec<Atom> },
}

/// `(h, h′, h″)` at one angle; `h″` excludes atoms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub h: f64,
    pub dh: f64,
    pub ddh: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    Point(C64),
    Segment(C64, C64),
}

/// Global size descriptors of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Metrics {
    /// Smallest width σ.
    pub min_width: f64,
    pub diameter: f64,
    /// Circumradius about the origin, `max_{z∈D̄} |z|`.
    pub circumradius: f64,
    pub area: f64,
    pub perimeter: f64,
}

/// Chord length `u(t, φ)` and cut-off area `s(t, φ)` at depth `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Section {
    pub chord: f64,
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexDomain {
    core: Core,
    offset: f64,
    metrics: Metrics,
}

impl ConvexDomain {
    pub fn disk(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidDomain(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self::assemble(Core::Point(center), radius))
    }

    pub fn ellipse(center: C64, a: f64, b: f64, rotation: f64) -> Result<Self> {
        if !(b > 0.0 && a >= b && a.is_finite()) || !center.is_finite() || !rotation.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "ellipse semi-axes must satisfy a ≥ b > 0, got a={a}, b={b}"
            )));
        }
        Ok(Self::assemble(Core::Ellipse { center, a, b, rotation }, 0.0))
    }

    /// Convex polygon (counter-clockwise vertices) dilated by `rounding > 0`.
    pub fn smoothed_polygon(vertices: Vec<C64>, rounding: f64) -> Result<Self> {
        if !(rounding > 0.0 && rounding.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "rounding radius must be positive, got {rounding}"
            )));
        }
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain("a polygon needs at least three vertices".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("non-finite vertex".into()));
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        for k in 0..n {
            let d1 = vertices[(k + 1) % n] - vertices[k];
            let d2 = vertices[(k + 2) % n] - vertices[(k + 1) % n];
            let cross = d1.re * d2.im - d1.im * d2.re;
            if cross <= 1e-12 * scale * scale {
                return Err(Error::InvalidDomain(format!(
                    "vertices must be strictly convex and counter-clockwise (turn at vertex {})",
                    (k + 1) % n
                )));
            }
        }
        let atoms = (0..n)
            .map(|k| {
                let start = vertices[k];
                let end = vertices[(k + 1) % n];
                let d = end - start;
                let normal = C64::new(d.im, -d.re) / d.norm();
                Atom {
                    angle: wrap_angle(-normal.arg()),
                    length: d.norm(),
                    start,
                    end,
                }
            })
            .collect();
        Ok(Self::assemble(Core::Polygon { vertices, atoms }, rounding))
    }

    /// Minkowski sum with the disk `B(ε)`.
    pub fn dilate(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidDomain(format!("dilation radius must be positive, got {eps}")));
        }
        Ok(Self::assemble(self.core.clone(), self.offset + eps))
    }

    fn assemble(core: Core, offset: f64) -> Self {
        let mut d = Self {
            core,
            offset,
            metrics: Metrics {
                min_width: 0.0,
                diameter: 0.0,
                circumradius: 0.0,
                area: 0.0,
                perimeter: 0.0,
            },
        };
        d.metrics = d.compute_metrics();
        d
    }

    pub fn metrics(&self) -> Metrics {
        self.metrics
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.core, Core::Point(_))
    }

    pub fn is_polygonal(&self) -> bool {
        matches!(self.core, Core::Polygon { .. })
    }

    /// `(center, radius)` when the domain is a disk.
    pub fn as_disk(&self) -> Option<(C64, f64)> {
        match self.core {
            Core::Point(c) => Some((c, self.offset)),
            _ => None,
        }
    }

    /// `(center, a, b, rotation)` when the domain is an undilated ellipse.
    pub fn as_ellipse(&self) -> Option<(C64, f64, f64, f64)> {
        match self.core {
            Core::Ellipse { center, a, b, rotation } if self.offset == 0.0 => {
                Some((center, a, b, rotation))
            }
            _ => None,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        match &self.core {
            Core::Polygon { atoms, .. } => atoms,
            _ => &[],
        }
    }

    /// A point well inside the domain.
    pub fn interior_point(&self) -> C64 {
        match &self.core {
            Core::Point(c) => *c,
            Core::Ellipse { center, .. } => *center,
            Core::Polygon { vertices, .. } => {
                vertices.iter().sum::<C64>() / vertices.len() as f64
            }
        }
    }

    pub fn label(&self) -> String {
        let cstr = |c: C64| format!("{}{:+}i", c.re, c.im);
        match &self.core {
            Core::Point(c) => format!("disk(c={},r={})", cstr(*c), self.offset),
            Core::Ellipse { center, a, b, rotation } => {
                let base = format!("ellipse(c={},a={a},b={b},rot={rotation})", cstr(*center));
                if self.offset > 0.0 {
                    format!("{base}+B({})", self.offset)
                } else {
                    base
                }
            }
            Core::Polygon { vertices, .. } => {
                format!("smoothed_polygon(n={},eps={})", vertices.len(), self.offset)
            }
        }
    }

    fn ellipse_parts(a: f64, b: f64, omega: f64) -> (f64, f64, f64) {
        let (s, c) = omega.sin_cos();
        let hh = (a * a * c * c + b * b * s * s).sqrt();
        let q = 0.5 * (b * b - a * a);
        let s2 = (2.0 * omega).sin();
        let c2 = (2.0 * omega).cos();
        let d1 = q * s2 / hh;
        let d2 = 2.0 * q * c2 / hh - d1 * d1 / hh;
        (hh, d1, d2)
    }

    fn active_vertex(vertices: &[C64], e: C64) -> C64 {
        let mut best = vertices[0];
        let mut best_val = (best * e).re;
        for &v in &vertices[1..] {
            let val = (v * e).re;
            if val > best_val {
                best = v;
                best_val = val;
            }
        }
        best
    }

    /// `h(φ)` alone.
    pub fn h(&self, phi: f64) -> f64 {
        let e = cis(phi);
        self.offset
            + match &self.core {
                Core::Point(c) => (c * e).re,
                Core::Ellipse { center, a, b, rotation } => {
                    let (s, c) = (phi + rotation).sin_cos();
                    (center * e).re + (a * a * c * c + b * b * s * s).sqrt()
                }
                Core::Polygon { vertices, .. } => {
                    vertices.iter().map(|v| (v * e).re).fold(f64::NEG_INFINITY, f64::max)
                }
            }
    }

    pub fn support(&self, phi: f64) -> Support {
        let e = cis(phi);
        let (h, dh, ddh) = match &self.core {
            Core::Point(c) => {
                let p = c * e;
                (p.re, -p.im, -p.re)
            }
            Core::Ellipse { center, a, b, rotation } => {
                let p = center * e;
                let (hh, d1, d2) = Self::ellipse_parts(*a, *b, phi + rotation);
                (p.re + hh, -p.im + d1, -p.re + d2)
            }
            Core::Polygon { vertices, .. } => {
                let p = Self::active_vertex(vertices, e) * e;
                (p.re, -p.im, -p.re)
            }
        };
        Support { h: h + self.offset, dh, ddh }
    }

    /// Width in direction φ, `R_φ = h(φ) + h(φ+π)`.
    pub fn width(&self, phi: f64) -> f64 {
        self.h(phi) + self.h(phi + PI)
    }

    /// Absolutely continuous part of the arc measure, `h + h″`.
    pub fn density(&self, phi: f64) -> f64 {
        self.offset
            + match &self.core {
                Core::Ellipse { a, b, rotation, .. } => {
                    let (s, c) = (phi + rotation).sin_cos();
                    let hh = (a * a * c * c + b * b * s * s).sqrt();
                    a * a * b * b / (hh * hh * hh)
                }
                _ => 0.0,
            }
    }

    fn atom_at(&self, theta: f64) -> Option<&Atom> {
        self.atoms().iter().find(|a| {
            let d = wrap_angle(theta - a.angle);
            d.min(TAU - d) < ATOM_ANGLE_TOL
        })
    }

    pub(crate) fn offset_segment(&self, atom: &Atom) -> (C64, C64) {
        let n = cis(-atom.angle);
        (atom.start + self.offset * n, atom.end + self.offset * n)
    }

    /// A support point with outward normal `e^{-iθ}`; at an atom angle one
    /// endpoint of the segment is returned.
    pub fn support_point(&self, theta: f64) -> C64 {
        let n = cis(-theta);
        let base = match &self.core {
            Core::Point(c) => *c,
            Core::Ellipse { center, a, b, rotation } => {
                let omega = theta + rotation;
                let (s, c) = omega.sin_cos();
                let hh = (a * a * c * c + b * b * s * s).sqrt();
                center + cis(*rotation) * C64::new(a * a * c, -b * b * s) / hh
            }
            Core::Polygon { vertices, .. } => Self::active_vertex(vertices, cis(theta)),
        };
        base + self.offset * n
    }

    /// `z(θ) = (h − i h′) e^{−iθ}`, the boundary point with outward normal `e^{−iθ}`.
    pub fn boundary_point(&self, theta: f64) -> BoundaryPoint {
        if let Some(atom) = self.atom_at(theta) {
            let (a, b) = self.offset_segment(atom);
            return BoundaryPoint::Segment(a, b);
        }
        BoundaryPoint::Point(self.support_point(theta))
    }

    /// Arc measure of `(φ₁, φ₂]`, density integral plus atoms.
    pub fn arc_measure(&self, phi1: f64, phi2: f64) -> f64 {
        let span = (phi2 - phi1).clamp(0.0, TAU);
        let phi2 = phi1 + span;
        let mut total = self.offset * span;
        match &self.core {
            Core::Ellipse { a, b, rotation, .. } => {
                let (a, b, rot) = (*a, *b, *rotation);
                let f = |t: f64| {
                    let (s, c) = (t + rot).sin_cos();
                    let hh = (a * a * c * c + b * b * s * s).sqrt();
                    a * a * b * b / (hh * hh * hh)
                };
                let pieces = ((span / (PI / 4.0)).ceil() as usize).max(1);
                let breaks: Vec<f64> =
                    (0..=pieces).map(|k| phi1 + span * k as f64 / pieces as f64).collect();
                total += quad::integrate_breaks(f, &breaks, Tolerance::new(0.0, 1e-15)).value;
            }
            Core::Polygon { atoms, .. } => {
                for atom in atoms {
                    // count the copies angle + 2πk lying in (φ₁, φ₂]
                    let first = atom.angle + TAU * ((phi1 - atom.angle) / TAU).floor();
                    let mut x = first;
                    while x <= phi1 {
                        x += TAU;
                    }
                    while x <= phi2 {
                        total += atom.length;
                        x += TAU;
                    }
                }
            }
            Core::Point(_) => {}
        }
        total
    }

    fn compute_metrics(&self) -> Metrics {
        let eps = self.offset;
        match &self.core {
            Core::Point(c) => Metrics {
                min_width: 2.0 * eps,
                diameter: 2.0 * eps,
                circumradius: c.norm() + eps,
                area: PI * eps * eps,
                perimeter: self.arc_measure(0.0, TAU),
            },
            Core::Ellipse { center, a, b, rotation } => {
                let (center, a, b, rot) = (*center, *a, *b, *rotation);
                let r2 = |t: f64| (center + cis(rot) * C64::new(a * t.cos(), b * t.sin())).norm_sqr();
                let n = ANGLE_SCAN;
                let step = TAU / n as f64;
                let best = (0..n)
                    .map(|k| k as f64 * step)
                    .max_by(|x, y| r2(*x).total_cmp(&r2(*y)))
                    .unwrap_or(0.0);
                let (_, m) = quad::golden_max(r2, best - step, best + step, 1e-13);
                let core_perimeter_area = PI * a * b;
                let perimeter = self.arc_measure(0.0, TAU);
                let core_perimeter = perimeter - TAU * eps;
                Metrics {
                    min_width: 2.0 * b + 2.0 * eps,
                    diameter: 2.0 * a + 2.0 * eps,
                    circumradius: m.sqrt() + eps,
                    area: core_perimeter_area + eps * core_perimeter + PI * eps * eps,
                    perimeter,
                }
            }
            Core::Polygon { vertices, atoms } => {
                let n = vertices.len();
                let shoelace: f64 = (0..n)
                    .map(|k| {
                        let p = vertices[k];
                        let q = vertices[(k + 1) % n];
                        p.re * q.im - q.re * p.im
                    })
                    .sum::<f64>()
                    * 0.5;
                let boundary: f64 = atoms.iter().map(|a| a.length).sum();
                let hp = |phi: f64| {
                    let e = cis(phi);
                    vertices.iter().map(|v| (v * e).re).fold(f64::NEG_INFINITY, f64::max)
                };
                let min_width = atoms
                    .iter()
                    .map(|a| hp(a.angle) + hp(a.angle + PI))
                    .fold(f64::INFINITY, f64::min);
                let mut diameter: f64 = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        diameter = diameter.max((vertices[i] - vertices[j]).norm());
                    }
                }
                Metrics {
                    min_width: min_width + 2.0 * eps,
                    diameter: diameter + 2.0 * eps,
                    circumradius: vertices.iter().map(|v| v.norm()).fold(0.0, f64::max) + eps,
                    area: shoelace + eps * boundary + PI * eps * eps,
                    perimeter: self.arc_measure(0.0, TAU),
                }
            }
        }
    }

    /// `max_φ (Re ζe^{iφ} − h(φ))` and a maximising angle.
    ///
    /// Positive values are the distance from an exterior point; for interior
    /// points the value is minus the distance to the boundary.
    pub fn separation(&self, zeta: C64) -> (f64, f64) {
        // g + g″ = −(h + h″) ≤ 0, so g has a single local maximum where it is
        // positive; a coarse scan suffices unless ζ lies in D̄
        if zeta.norm() > 2.0 * self.metrics.circumradius {
            if let Some(found) = self.separation_newton(zeta) {
                return found;
            }
        }
        let coarse = self.separation_scan(zeta, 64, -zeta.arg());
        if coarse.0 > 0.0 {
            return coarse;
        }
        let fine = self.separation_scan(zeta, ANGLE_SCAN, 0.0);
        if fine.0 >= coarse.0 {
            fine
        } else {
            coarse
        }
    }

    // derivative of Re ζe^{iφ} − h(φ) and its own derivative −(g + h + h″)
    fn slope_and_curvature(&self, zeta: C64, phi: f64) -> (f64, f64) {
        let w = zeta * cis(phi);
        let s = self.support(phi);
        (-w.im - s.dh, -w.re - s.ddh)
    }

    // far away the maximiser is close to −arg ζ
    fn separation_newton(&self, zeta: C64) -> Option<(f64, f64)> {
        let mut phi = -zeta.arg();
        for _ in 0..20 {
            let (s, ds) = self.slope_and_curvature(zeta, phi);
            if !(ds < 0.0) {
                return None;
            }
            let step = s / ds;
            phi -= step;
            if step.abs() < 1e-14 {
                let val = (zeta * cis(phi)).re - self.h(phi);
                return (val > 0.0).then_some((val, phi));
            }
            if step.abs() > 0.5 {
                return None;
            }
        }
        None
    }

    fn separation_scan(&self, zeta: C64, n: usize, origin: f64) -> (f64, f64) {
        let g = |phi: f64| (zeta * cis(phi)).re - self.h(phi);
        let step = TAU / n as f64;
        let mut best = origin;
        let mut best_val = f64::NEG_INFINITY;
        for k in 0..n {
            let phi = origin + k as f64 * step;
            let v = g(phi);
            if v > best_val {
                best_val = v;
                best = phi;
            }
        }
        // the slope −Im ζe^{iφ} − h′(φ) is decreasing through the maximum
        let slope = |phi: f64| -(zeta * cis(phi)).im - self.support(phi).dh;
        let (a, b) = (best - step, best + step);
        let phi = if slope(a) > 0.0 && slope(b) < 0.0 {
            quad::newton_bracketed(|phi| self.slope_and_curvature(zeta, phi), a, b, 1e-15)
        } else {
            quad::golden_max(g, a, b, 1e-12).0
        };
        let val = g(phi);
        if val >= best_val {
            (val, phi)
        } else {
            (best_val, best)
        }
    }

    /// Euclidean distance from `ζ` to `D̄`.
    pub fn distance(&self, zeta: C64) -> f64 {
        self.separation(zeta).0.max(0.0)
    }

    /// Endpoints `φ₋ < φ₊` of the arc of angles whose support line separates `ζ` from `D`.
    pub fn tangent_angles(&self, zeta: C64) -> Result<(f64, f64)> {
        let (gap, phi_star) = self.separation(zeta);
        if gap <= 0.0 {
            return Err(Error::NotExterior { re: zeta.re, im: zeta.im });
        }
        Ok(self.tangent_angles_from(zeta, phi_star))
    }

    /// [`Self::tangent_angles`] given a separating angle with a positive gap.
    pub(crate) fn tangent_angles_from(&self, zeta: C64, phi_star: f64) -> (f64, f64) {
        let g = |phi: f64| (zeta * cis(phi)).re - self.h(phi);
        // g ≥ 0 on a single arc around φ* and g(φ* ± π) < 0
        let walk = |dir: f64| quad::bisect(g, phi_star, phi_star + dir * PI, 1e-15);
        (walk(-1.0), walk(1.0))
    }

    /// Endpoints of the chord `{Re(ze^{iφ}) = h(φ) + t} ∩ D̄`, or `None` outside `(−R_φ, 0]`.
    pub fn chord_endpoints(&self, t: f64, phi: f64) -> Option<(C64, C64)> {
        let width = self.width(phi);
        if t > 0.0 || t < -width || !t.is_finite() {
            return None;
        }
        let e = cis(phi);
        let back = e.conj();
        match &self.core {
            Core::Point(c) => {
                let q = self.offset + t;
                let half = (-t * (2.0 * self.offset + t)).max(0.0).sqrt();
                Some((c + C64::new(q, -half) * back, c + C64::new(q, half) * back))
            }
            Core::Ellipse { center, a, b, rotation } if self.offset == 0.0 => {
                let omega = phi + rotation;
                let (so, co) = omega.sin_cos();
                let big_a = a * co;
                let big_b = -b * so;
                let hh = big_a.hypot(big_b);
                let s0 = big_b.atan2(big_a);
                let alpha = (-t * (2.0 * hh + t)).max(0.0).sqrt().atan2(hh + t);
                let point =
                    |s: f64| center + cis(*rotation) * C64::new(a * s.cos(), b * s.sin());
                Some((point(s0 - alpha), point(s0 + alpha)))
            }
            _ => {
                if t == 0.0 {
                    return Some(match self.boundary_point(phi) {
                        BoundaryPoint::Point(z) => (z, z),
                        BoundaryPoint::Segment(a, b) => (a, b),
                    });
                }
                if let Core::Polygon { vertices, .. } = &self.core {
                    return self.polygon_chord(vertices, t, phi);
                }
                let left = self.chord_root(t, phi, phi - PI, phi);
                let right = self.chord_root(t, phi, phi, phi + PI);
                Some((left, right))
            }
        }
    }

    // The dilated polygon is the union of vertex disks and thickened edges;
    // its chord runs between the extreme crossings of those pieces.
    fn polygon_chord(&self, vertices: &[C64], t: f64, phi: f64) -> Option<(C64, C64)> {
        let e = cis(phi);
        let h = self.h(phi);
        let rho = self.offset;
        let frame: Vec<C64> = vertices.iter().map(|v| v * e - h).collect();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut push = |s: f64| {
            lo = lo.min(s);
            hi = hi.max(s);
        };
        for w in &frame {
            let dx = t - w.re;
            if dx.abs() <= rho {
                let half = (rho * rho - dx * dx).sqrt();
                push(w.im - half);
                push(w.im + half);
            }
        }
        for (k, &p) in frame.iter().enumerate() {
            let q = frame[(k + 1) % frame.len()];
            let n = (q - p) * C64::i() / (q - p).norm() * rho;
            let corners = [p + n, q + n, q - n, p - n];
            for j in 0..4 {
                let (a, b) = (corners[j], corners[(j + 1) % 4]);
                if (a.re - t) * (b.re - t) <= 0.0 && a.re != b.re {
                    push(a.im + (b.im - a.im) * (t - a.re) / (b.re - a.re));
                }
            }
        }
        if lo > hi {
            return None;
        }
        let back = e.conj();
        Some(((C64::new(t, lo) + h) * back, (C64::new(t, hi) + h) * back))
    }

    // Boundary point on the side θ ∈ [lo, hi] where the depth crosses t.
    fn chord_root(&self, t: f64, phi: f64, lo: f64, hi: f64) -> C64 {
        let e = cis(phi);
        let h = self.h(phi);
        let depth = |theta: f64| (self.support_point(theta) * e).re - h - t;
        let theta = quad::bisect(depth, lo, hi, 1e-15);
        if let Some(atom) = self.atom_at(theta).or_else(|| {
            self.atoms().iter().find(|a| {
                let d = wrap_angle(theta - a.angle);
                d.min(TAU - d) < 1e-9
            })
        }) {
            let (a, b) = self.offset_segment(atom);
            let fa = (a * e).re - h - t;
            let fb = (b * e).re - h - t;
            if fa * fb <= 0.0 && fa != fb {
                return a + (b - a) * (fa / (fa - fb));
            }
        }
        self.support_point(theta)
    }

    /// `u(t, φ)`: chord length at depth `t ≤ 0` in the frame `w = ze^{iφ} − h(φ)`.
    pub fn chord_length(&self, t: f64, phi: f64) -> f64 {
        self.chord_endpoints(t, phi).map_or(0.0, |(a, b)| (a - b).norm())
    }

    /// `s(t, φ) = ∫_t^0 u(x, φ) dx`.
    pub fn section_area(&self, t: f64, phi: f64) -> f64 {
        if t >= 0.0 {
            return 0.0;
        }
        let width = self.width(phi);
        if t <= -width {
            return self.metrics.area;
        }
        match &self.core {
            Core::Point(_) => self.offset * self.offset * unit_segment_area(-t / self.offset),
            Core::Ellipse { a, b, .. } if self.offset == 0.0 => {
                a * b * unit_segment_area(-2.0 * t / width)
            }
            Core::Polygon { vertices, .. } => self.polygon_section(vertices, t, phi),
            _ => self.section_by_quadrature(t, phi),
        }
    }

    // Green's theorem over the part of the boundary with depth above t, in a
    // frame whose origin lies on the cutting line so the chord adds nothing.
    fn polygon_section(&self, vertices: &[C64], t: f64, phi: f64) -> f64 {
        let e = cis(phi);
        let shift = self.h(phi) + t;
        let rho = self.offset;
        let frame: Vec<C64> = vertices.iter().map(|v| v * e - shift).collect();
        let n = frame.len();
        let normal = |k: usize| {
            let d = frame[(k + 1) % n] - frame[k];
            -C64::i() * d / d.norm()
        };
        let mut twice = 0.0;
        for k in 0..n {
            let nk = normal(k);
            let (p, q) = (frame[k] + rho * nk, frame[(k + 1) % n] + rho * nk);
            let (fp, fq) = (p.re, q.re);
            let piece = match (fp >= 0.0, fq >= 0.0) {
                (true, true) => Some((p, q)),
                (false, false) => None,
                (true, false) => Some((p, p + (q - p) * (fp / (fp - fq)))),
                (false, true) => Some((p + (q - p) * (fp / (fp - fq)), q)),
            };
            if let Some((a, b)) = piece {
                twice += (a.conj() * b).im;
            }
            // arc around the next vertex, from this edge's normal to the next one's
            let c = frame[(k + 1) % n];
            let start = nk.arg();
            let mut end = normal((k + 1) % n).arg();
            if end < start {
                end += TAU;
            }
            let k_cos = -c.re / rho;
            if k_cos >= 1.0 {
                continue;
            }
            let gamma = if k_cos <= -1.0 { PI } else { k_cos.acos() };
            for m in -2..=2 {
                let centre = TAU * f64::from(m);
                let lo = start.max(centre - gamma);
                let hi = end.min(centre + gamma);
                if hi > lo {
                    let chord = -C64::i() * (cis(hi) - cis(lo));
                    twice += rho * rho * (hi - lo) + rho * (c.conj() * chord).re;
                }
            }
        }
        0.5 * twice
    }

    fn section_by_quadrature(&self, t: f64, phi: f64) -> f64 {
        let width = self.width(phi);
        let tol = Tolerance::new(1e-15 * self.metrics.area, 1e-13);
        if -t <= 0.5 * width {
            let top = (-t).sqrt();
            quad::integrate(|y: f64| 2.0 * y * self.chord_length(-y * y, phi), 0.0, top, tol).value
        } else {
            let top = (width + t).sqrt();
            let rest =
                quad::integrate(|y: f64| 2.0 * y * self.chord_length(-width + y * y, phi), 0.0, top, tol)
                    .value;
            (self.metrics.area - rest).max(0.0)
        }
    }

    pub fn chord_and_section(&self, t: f64, phi: f64) -> Section {
        Section {
            chord: self.chord_length(t, phi),
            area: self.section_area(t, phi),
        }
    }

    /// Quadrature nodes for plain `dθ` over one turn.
    ///
    /// Smooth domains use the periodic trapezoid rule; polygonal ones use
    /// Gauss–Legendre panels between consecutive atom angles so the kinks of
    /// angular integrands sit on panel edges.
    pub fn angular_nodes(&self, n: usize) -> Vec<(f64, f64)> {
        let atoms = self.atoms();
        if atoms.is_empty() {
            // k·2π/n keeps the nodes of n/2 bit-identical to the even nodes of n
            let w = TAU / n as f64;
            return (0..n).map(|k| (k as f64 * TAU / n as f64, w)).collect();
        }
        let mut angles: Vec<f64> = atoms.iter().map(|a| a.angle).collect();
        angles.sort_by(f64::total_cmp);
        angles.push(angles[0] + TAU);
        let mut nodes = Vec::with_capacity(n + 8 * atoms.len());
        for w in angles.windows(2) {
            let len = w[1] - w[0];
            let m = ((n as f64 * len / TAU).ceil() as usize).max(4);
            nodes.extend(quad::composite_gauss_legendre(&[w[0], w[1]], m));
        }
        nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_disk() -> ConvexDomain {
        ConvexDomain::disk(C64::new(0.0, 0.0), 1.0).unwrap()
    }

    fn ellipse21() -> ConvexDomain {
        ConvexDomain::ellipse(C64::new(0.0, 0.0), 2.0, 1.0, 0.0).unwrap()
    }

    fn rounded_square() -> ConvexDomain {
        let v = vec![
            C64::new(-1.0, -1.0),
            C64::new(1.0, -1.0),
            C64::new(1.0, 1.0),
            C64::new(-1.0, 1.0),
        ];
        ConvexDomain::smoothed_polygon(v, 0.25).unwrap()
    }

    // Ramanujan's second approximation is far too coarse for 1e-10; the
    // oracle is Richardson-extrapolated inscribed polygons.
    fn ellipse_perimeter_oracle(a: f64, b: f64) -> f64 {
        let poly = |n: usize| {
            (0..n)
                .map(|k| {
                    let t0 = TAU * k as f64 / n as f64;
                    let t1 = TAU * (k + 1) as f64 / n as f64;
                    (C64::new(a * t1.cos(), b * t1.sin()) - C64::new(a * t0.cos(), b * t0.sin()))
                        .norm()
                })
                .sum::<f64>()
        };
        let p1 = poly(20_000);
        let p2 = poly(40_000);
        (4.0 * p2 - p1) / 3.0
    }

    #[test]
    fn disk_support_examples() {
        let d = unit_disk();
        let s = d.support(1.3);
        assert_relative_eq!(s.h, 1.0);
        assert_eq!(s.dh, 0.0);
        assert_eq!(s.ddh, 0.0);
        let a = d.support(0.7);
        let b = d.support(0.7 + TAU);
        assert_relative_eq!(a.h, b.h, epsilon = 1e-15);
    }

    #[test]
    fn ellipse_support_matches_sampled_boundary() {
        let d = ellipse21();
        assert_relative_eq!(d.support(0.0).h, 2.0, epsilon = 1e-15);
        for &phi in &[0.0, 0.4, 1.1, 2.5, 4.0] {
            let e = cis(phi);
            let sampled = (0..100_000)
                .map(|k| {
                    let t = TAU * k as f64 / 100_000.0;
                    (C64::new(2.0 * t.cos(), t.sin()) * e).re
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((d.h(phi) - sampled).abs() < 1e-8);
        }
    }

    #[test]
    fn ellipse_derivatives_by_differences() {
        let d = ConvexDomain::ellipse(C64::new(0.3, -0.2), 2.0, 1.0, 0.4).unwrap();
        let step = 1e-4;
        for &phi in &[0.1, 1.0, 2.2, 5.0] {
            let s = d.support(phi);
            let d1 = (d.h(phi + step) - d.h(phi - step)) / (2.0 * step);
            let d2 = (d.h(phi + step) - 2.0 * d.h(phi) + d.h(phi - step)) / (step * step);
            assert!((s.dh - d1).abs() < 1e-7);
            assert!((s.ddh - d2).abs() < 1e-5);
            assert_relative_eq!(d.density(phi), s.h + s.ddh, epsilon = 1e-12);
        }
    }

    #[test]
    fn boundary_point_examples() {
        let d = unit_disk();
        let BoundaryPoint::Point(z) = d.boundary_point(0.0) else { panic!() };
        assert!((z - C64::new(1.0, 0.0)).norm() < 1e-15);
        let BoundaryPoint::Point(z) = d.boundary_point(PI / 2.0) else { panic!() };
        assert!((z - C64::new(0.0, -1.0)).norm() < 1e-15);
        let BoundaryPoint::Point(z) = ellipse21().boundary_point(0.0) else { panic!() };
        assert!((z - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn boundary_point_matches_support_formula() {
        let d = ConvexDomain::disk(C64::new(1.0, 0.5), 0.7).unwrap();
        for &theta in &[0.0, 0.9, 2.0, 4.4] {
            let s = d.support(theta);
            let z = C64::new(s.h, -s.dh) * cis(-theta);
            assert!((d.support_point(theta) - z).norm() < 1e-14);
        }
        let e = ConvexDomain::ellipse(C64::new(-0.4, 0.2), 1.5, 0.6, 0.8).unwrap();
        for &theta in &[0.0, 0.9, 2.0, 4.4] {
            let s = e.support(theta);
            let z = C64::new(s.h, -s.dh) * cis(-theta);
            assert!((e.support_point(theta) - z).norm() < 1e-13);
        }
    }

    #[test]
    fn polygon_atoms_report_segments() {
        let d = rounded_square();
        match d.boundary_point(PI / 2.0) {
            BoundaryPoint::Segment(a, b) => {
                assert!((a - C64::new(-1.0, -1.25)).norm() < 1e-14);
                assert!((b - C64::new(1.0, -1.25)).norm() < 1e-14);
            }
            other => panic!("expected a segment, got {other:?}"),
        }
        let BoundaryPoint::Point(z) = d.boundary_point(-PI / 4.0) else { panic!() };
        let corner = C64::new(1.0, 1.0) + 0.25 * cis(PI / 4.0);
        assert!((z - corner).norm() < 1e-14);
    }

    #[test]
    fn arc_measure_examples() {
        let d = unit_disk();
        assert_relative_eq!(d.arc_measure(0.0, TAU), TAU, epsilon = 1e-15);
        assert_relative_eq!(d.arc_measure(0.0, PI), PI, epsilon = 1e-15);
        let e = ellipse21();
        let oracle = ellipse_perimeter_oracle(2.0, 1.0);
        assert_relative_eq!(e.arc_measure(0.0, TAU), oracle, epsilon = 1e-10);
        assert!((oracle - 9.6884).abs() < 1e-4);
        assert_eq!(e.arc_measure(0.0, TAU), e.metrics().perimeter);
    }

    #[test]
    fn polygon_arc_measure_counts_atoms_once() {
        let d = rounded_square();
        let p = 8.0 + TAU * 0.25;
        assert_relative_eq!(d.metrics().perimeter, p, epsilon = 1e-14);
        assert_relative_eq!(d.arc_measure(1.0, 1.0 + TAU), p, epsilon = 1e-14);
        // (π/2 − 0.1, π/2] contains the bottom edge atom
        assert_relative_eq!(d.arc_measure(PI / 2.0 - 0.1, PI / 2.0), 2.0 + 0.025, epsilon = 1e-14);
        assert_relative_eq!(d.arc_measure(PI / 2.0, PI / 2.0 + 0.1), 0.025, epsilon = 1e-14);
    }

    #[test]
    fn metric_examples() {
        let m = unit_disk().metrics();
        assert_eq!((m.min_width, m.diameter, m.circumradius), (2.0, 2.0, 1.0));
        assert_relative_eq!(m.area, PI);
        assert_relative_eq!(m.perimeter, TAU);
        let m = ellipse21().metrics();
        assert_eq!((m.min_width, m.diameter), (2.0, 4.0));
        assert_relative_eq!(m.circumradius, 2.0, epsilon = 1e-12);
        assert_relative_eq!(m.area, TAU, epsilon = 1e-15);
        let shifted = ConvexDomain::disk(C64::new(3.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(shifted.metrics().circumradius, 4.0);
    }

    // area = ½∫(h² − h′²)dφ for smooth boundaries
    #[test]
    fn area_from_support_function() {
        for d in [
            ConvexDomain::ellipse(C64::new(0.5, 0.2), 1.7, 0.9, 0.3).unwrap(),
            ConvexDomain::ellipse(C64::new(0.5, 0.2), 1.7, 0.9, 0.3).unwrap().dilate(0.2).unwrap(),
        ] {
            let n = 4096;
            let a: f64 = (0..n)
                .map(|k| {
                    let s = d.support(TAU * k as f64 / n as f64);
                    0.5 * (s.h * s.h - s.dh * s.dh) * TAU / n as f64
                })
                .sum();
            assert_relative_eq!(a, d.metrics().area, epsilon = 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        assert_relative_eq!(unit_disk().distance(C64::new(3.0, 0.0)), 2.0, epsilon = 1e-15);
        assert_relative_eq!(ellipse21().distance(C64::new(0.0, 2.0)), 1.0, epsilon = 1e-14);
        assert_eq!(unit_disk().distance(C64::new(0.5, 0.0)), 0.0);
    }

    #[test]
    fn tangent_angle_examples() {
        let d = unit_disk();
        let (lo, hi) = d.tangent_angles(C64::new(2.0, 0.0)).unwrap();
        assert!((lo + PI / 3.0).abs() < 1e-13 && (hi - PI / 3.0).abs() < 1e-13);
        let (lo, hi) = d.tangent_angles(C64::new(0.0, 2.0)).unwrap();
        assert!((hi - lo - 2.0 * PI / 3.0).abs() < 1e-13);
        assert!((wrap_angle(0.5 * (lo + hi)) - wrap_angle(-PI / 2.0)).abs() < 1e-12);
        let (lo, hi) = d.tangent_angles(C64::new(1.0 + 1e-8, 0.0)).unwrap();
        assert!(hi - lo < 1e-3);
        assert!(matches!(d.tangent_angles(C64::new(0.2, 0.0)), Err(Error::NotExterior { .. })));
    }

    #[test]
    fn section_examples() {
        let d = unit_disk();
        let s = d.chord_and_section(-1.0, 0.4);
        assert_relative_eq!(s.chord, 2.0, epsilon = 1e-15);
        assert_relative_eq!(s.area, PI / 2.0, epsilon = 1e-15);
        let s = d.chord_and_section(-2.0, 0.4);
        assert!(s.chord < 1e-7);
        assert_relative_eq!(s.area, PI, epsilon = 1e-15);
        assert_eq!(d.chord_and_section(0.0, 0.4), Section { chord: 0.0, area: 0.0 });
    }

    #[test]
    fn ellipse_closed_form_chords_agree_with_root_finding() {
        let base = ConvexDomain::ellipse(C64::new(0.1, 0.3), 1.8, 0.7, 0.6).unwrap();
        let tiny = base.dilate(1e-300).unwrap();
        for &phi in &[0.0, 0.7, 2.9, 5.1] {
            let w = base.width(phi);
            for frac in [0.01, 0.3, 0.5, 0.9, 0.999] {
                let t = -frac * w;
                let a = base.chord_length(t, phi);
                let b = tiny.chord_length(t, phi);
                assert!((a - b).abs() < 1e-10, "φ={phi} t={t}: {a} vs {b}");
                let sa = base.section_area(t, phi);
                let sb = tiny.section_area(t, phi);
                assert!((sa - sb).abs() < 1e-10 * base.metrics().area);
            }
        }
    }

    #[test]
    fn polygon_chords_agree_with_root_finding() {
        let verts = vec![C64::new(0.0, -1.0), C64::new(2.0, -0.5), C64::new(1.5, 1.0), C64::new(-0.5, 0.8)];
        let d = ConvexDomain::smoothed_polygon(verts, 0.15).unwrap();
        for &phi in &[0.0, 0.7, 2.9, 5.1] {
            let w = d.width(phi);
            for frac in [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let t = -frac * w;
                let (a, b) = d.chord_endpoints(t, phi).unwrap();
                let left = d.chord_root(t, phi, phi - PI, phi);
                let right = d.chord_root(t, phi, phi, phi + PI);
                let close = |x: C64, y: C64| (x - y).norm() < 1e-12;
                assert!(close(a, left) && close(b, right) || close(a, right) && close(b, left), "φ={phi} t={t}");
            }
        }
    }

    #[test]
    fn polygon_sections_agree_with_quadrature() {
        let verts = vec![C64::new(0.0, -1.0), C64::new(2.0, -0.5), C64::new(1.5, 1.0), C64::new(-0.5, 0.8)];
        let d = ConvexDomain::smoothed_polygon(verts, 0.15).unwrap();
        for &phi in &[0.0, 0.7, 2.9, 5.1] {
            let w = d.width(phi);
            for frac in [1e-4, 0.01, 0.3, 0.5, 0.9, 0.999] {
                let t = -frac * w;
                let exact = d.section_area(t, phi);
                let quad = d.section_by_quadrature(t, phi);
                assert!((exact - quad).abs() < 1e-11 * d.metrics().area, "φ={phi} t={t}: {exact} vs {quad}");
            }
            if let Core::Polygon { vertices, .. } = &d.core {
                assert_relative_eq!(d.polygon_section(vertices, -w, phi), d.metrics().area, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn polygon_sections_against_shapes() {
        let d = rounded_square();
        // depth 0.25 from the bottom: exactly the part below the square edge
        let s = d.chord_and_section(-0.25, PI / 2.0);
        assert_relative_eq!(s.chord, 2.5, epsilon = 1e-12);
        let expected = 2.0 * 0.25 + PI * 0.25 * 0.25 / 2.0;
        assert_relative_eq!(s.area, expected, epsilon = 1e-10);
        let full = d.chord_and_section(-1.5, PI / 2.0);
        assert_relative_eq!(full.chord, 2.5, epsilon = 1e-12);
        assert_relative_eq!(d.section_area(-2.5, PI / 2.0), d.metrics().area, epsilon = 1e-12);
    }

    #[test]
    fn dilation_examples() {
        let d = unit_disk().dilate(0.5).unwrap();
        assert_eq!(d.as_disk(), Some((C64::new(0.0, 0.0), 1.5)));
        let e = ellipse21().dilate(0.1).unwrap();
        assert_relative_eq!(
            e.metrics().perimeter,
            ellipse21().metrics().perimeter + 0.2 * PI,
            epsilon = 1e-13
        );
        let sq = rounded_square();
        let big = sq.dilate(0.3).unwrap();
        assert_eq!(sq.atoms().len(), big.atoms().len());
        for (a, b) in sq.atoms().iter().zip(big.atoms()) {
            assert_eq!((a.angle, a.length), (b.angle, b.length));
        }
        assert_relative_eq!(big.density(0.3), sq.density(0.3) + 0.3, epsilon = 1e-15);
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(ConvexDomain::disk(C64::new(0.0, 0.0), 0.0).is_err());
        assert!(ConvexDomain::ellipse(C64::new(0.0, 0.0), 1.0, 2.0, 0.0).is_err());
        let cw = vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)];
        assert!(ConvexDomain::smoothed_polygon(cw.clone(), 0.1).is_err());
        let ccw: Vec<C64> = cw.into_iter().rev().collect();
        assert!(ConvexDomain::smoothed_polygon(ccw.clone(), 0.0).is_err());
        assert!(ConvexDomain::smoothed_polygon(ccw, 0.1).is_ok());
    }

    #[test]
    fn unit_segment_area_small_depths() {
        for &d in &[1e-12f64, 1e-8, 1e-4, 0.3] {
            let direct = (1.0 - d).acos() - (1.0 - d) * (2.0 * d - d * d).sqrt();
            let series = 4.0 * 2f64.sqrt() / 3.0 * d.powf(1.5) * (1.0 - 0.15 * d);
            let got = unit_segment_area(d);
            if d < 1e-3 {
                assert_relative_eq!(got, series, max_relative = 1e-6);
            } else {
                assert_relative_eq!(got, direct, max_relative = 1e-13);
            }
        }
    }
}
