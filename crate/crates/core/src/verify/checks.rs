use std::f64::consts::{FRAC_PI_3, PI, TAU};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::Prepared;
use super::record::{CheckId, Record};
use super::sample::exterior_points;
use crate::conjugates::{young_conjugate_radial, RadialWeight};
use crate::constants::{self, constant_bundle, ConstantBundle};
use crate::domain::{cis, DomainSpec};
use crate::error::Result;
use crate::functions::ExpSum;
use crate::norms::{
    galpha_norm, halfplane_integral, k0, ln_laplace_kernel, localized_galpha, p0_weight, p_weight,
    weighted_exterior_integral, ExteriorGrid, NormEngine, QuadratureSpec, Region, Weight,
};
use crate::norms::laurent_tail;
use crate::quad;
use crate::special::ln_bessel_i1;

const STABILITY: f64 = 0.05;
const SLACK: f64 = 0.01;
const DUALITY_TOL: f64 = 1e-4;
const IDENTITY_TOL: f64 = 1e-4;
// successive angular levels of the weighted-area grid must agree this well
const GRID_TOL: f64 = 5e-3;
const TAIL_TOL: f64 = 1e-6;
const KERNEL_TOL: f64 = 1e-8;
const DISTANCE_TOL: f64 = 1e-8;
const RAY_DIRECTIONS: [f64; 2] = [0.0, FRAC_PI_3];

/// Everything the checks share: the prepared run and two norm engines
/// (configured and refined tolerances) with a common kernel cache.
pub struct Context {
    pub run: Prepared,
    label: String,
    spec: QuadratureSpec,
    refined: QuadratureSpec,
    engine: NormEngine,
    fine: NormEngine,
}

impl Context {
    pub fn new(run: Prepared) -> Self {
        let spec = run.config.quadrature;
        let refined = spec.refined();
        let engine = NormEngine::new(run.domain.clone(), spec);
        let fine = engine.with_spec(refined);
        Self { label: run.domain.label(), spec, refined, engine, fine, run }
    }

    fn bundle(&self, beta: f64) -> Result<ConstantBundle> {
        let v = &self.run.config.verify;
        constant_bundle(beta, &self.run.domain, self.run.eps, v.a_abs, v.A_abs)
    }

    fn record(&self, id: CheckId, beta: f64, func: impl Into<String>) -> Record {
        Record::new(id, &self.label, beta, func)
    }

    /// Evaluate one record, turning errors into failed records.
    fn attempt(&self, base: Record, body: impl FnOnce(Record) -> Result<Record>) -> Record {
        let start = Instant::now();
        let mut rec = match body(base.clone()) {
            Ok(r) => r.finish(),
            Err(e) => base.failed(&e),
        };
        if self.run.config.output.timing {
            rec.runtime_ms = start.elapsed().as_millis() as u64;
        }
        rec
    }
}

pub fn run_check(ctx: &Context, id: CheckId) -> Vec<Record> {
    match id {
        CheckId::Lemma1 => lemma1(ctx),
        CheckId::Lemma2 => lemma2(ctx),
        CheckId::Theorem1Ratio => theorem1_ratio(ctx),
        CheckId::Theorem2Localization => theorem2_localization(ctx),
        CheckId::Lemma5 => near_weights(ctx, CheckId::Lemma5),
        CheckId::Lemma7 => near_weights(ctx, CheckId::Lemma7),
        CheckId::Theorem1primeConsistency => theorem1prime(ctx),
        CheckId::MainTheoremRatio => main_theorem(ctx),
        CheckId::OracleTail => oracle_tail(ctx),
        CheckId::OracleKernel => oracle_kernel(ctx),
        CheckId::OracleDistance => oracle_distance(ctx),
    }
}

/// Every check, each on its own thread; records come back in check order.
pub fn run_all(ctx: &Context) -> Vec<Record> {
    std::thread::scope(|s| {
        let handles: Vec<_> = CheckId::ALL.into_iter().map(|id| s.spawn(move || run_check(ctx, id))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("check thread panicked")).collect()
    })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| lo * (step * k as f64).exp()).collect()
}

/// Past the first weight threshold the norm needs `F(0) = 0`; such
/// functions are replaced by `zF`.
fn regime(id: &str, f: &ExpSum, switch: bool) -> (String, ExpSum) {
    if switch && f.vanishing_order() == 0 {
        (format!("{id}*z"), f.times_power(1))
    } else {
        (id.to_string(), f.clone())
    }
}

fn drift(coarse: f64, fine: f64) -> f64 {
    ((fine - coarse) / fine).abs()
}

fn lemma1(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let mut out = Vec::new();
    for &beta in &ctx.run.config.verify.beta {
        for phi in RAY_DIRECTIONS {
            for r in log_grid(0.1, 20.0, 20) {
                let base = ctx.record(CheckId::Lemma1, beta, format!("phi={phi:.4},r={r:.4}"));
                out.push(ctx.attempt(base, |rec| {
                    let w = RadialWeight::new(domain, phi, beta)?;
                    let d = w.derivatives(r)?;
                    let x = d.dv;
                    let c = young_conjugate_radial(&w, x)?;
                    let (lo, hi) = (0.5 + beta, 2.0 + beta);
                    let one2b = 1.0 + 2.0 * beta;
                    Ok(rec
                        .bound("v''>=", (1.0 - SLACK) * lo / (r * r), d.ddv)
                        .bound("v''<=", d.ddv, (1.0 + SLACK) * hi / (r * r))
                        .bound("v'>=", -(1.0 + SLACK) * hi / r, d.dv)
                        .bound("v'<=", d.dv, -(1.0 - SLACK) * lo / r)
                        .bound("conj''>=", (1.0 - SLACK) * one2b * one2b / (4.0 * hi * x * x), c.second)
                        .bound("conj''<=", c.second, (1.0 + SLACK) * 2.0 * hi * hi / (one2b * x * x))
                        .bound("duality", (c.second * d.ddv - 1.0).abs(), DUALITY_TOL)
                        .constants([("phi", phi), ("r", r), ("dv", d.dv), ("ddv", d.ddv), ("conj_dd", c.second)])
                        .err((c.r - r).abs() / r))
                }));
            }
        }
    }
    out
}

fn lemma2(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let mut out = Vec::new();
    for &beta in &ctx.run.config.verify.beta {
        let a0 = constants::a0(beta);
        let (am, ap) = (constants::a_minus(beta), constants::a_plus(beta));
        let n = 2.0 * beta + 5.0;
        for phi in RAY_DIRECTIONS {
            for t in [-0.25, -0.5, -1.0, -3.0] {
                let base = ctx.record(CheckId::Lemma2, beta, format!("phi={phi:.4},t={t}"));
                out.push(ctx.attempt(base, |rec| {
                    let k = k0(domain, t, phi, beta)?;
                    let s = domain.section_area(t, phi);
                    let scale = a0 * s / t.abs().powf(n);
                    Ok(rec
                        .bound("lower", 2f64.powf(-n) * scale, k)
                        .bound("upper", k, (1.0 + ap / am) * scale)
                        .constants([("a0", a0), ("a_minus", am), ("a_plus", ap), ("s", s), ("K0", k)])
                        .err(1e-10 * k))
                }));
            }
        }
    }
    out
}

fn theorem1_ratio(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let mut out = Vec::new();
    for &beta in &ctx.run.config.verify.beta {
        for (id, f) in &ctx.run.functions {
            let (fid, g) = regime(id, f, beta >= 0.5);
            for &phi in &ctx.run.config.verify.directions {
                let base = ctx.record(CheckId::Theorem1Ratio, beta, format!("{fid}@phi={phi:.4}"));
                out.push(ctx.attempt(base, |rec| {
                    let b = ctx.bundle(beta)?;
                    let radial = ctx.engine.radial_integral(&g, beta, phi)?;
                    let radial2 = ctx.fine.radial_integral(&g, beta, phi)?;
                    let half = halfplane_integral(domain, &g, beta, phi, &ctx.spec)?;
                    let half2 = halfplane_integral(domain, &g, beta, phi, &ctx.refined)?;
                    let ratio = radial.value / half.value;
                    let ratio2 = radial2.value / half2.value;
                    Ok(rec
                        .bound("positive", 0.0, ratio)
                        .bound("refinement", drift(ratio, ratio2), STABILITY)
                        .constants([("1/A", 1.0 / b.A), ("1/a", 1.0 / b.a), ("ratio", ratio), ("ratio_refined", ratio2)])
                        .err(ratio.abs() * (radial.relative_error() + half.relative_error()))
                        .note("a_abs and A_abs are unknown; ratio is reported against them"))
                }));
            }
        }
    }
    out
}

/// `16^t / (4^{q−t} − 1)`, the ratio of an outer to an annular integral
/// for a weight of order `|ζ|^{2t}` whose Laurent series starts at `q − 2`.
fn annulus_constant(t: f64, q: f64) -> f64 {
    16f64.powf(t) / (4f64.powf(q - t) - 1.0)
}

fn theorem2_localization(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let spec = &ctx.spec;
    let eps = ctx.run.eps;
    let big_r = domain.metrics().circumradius;
    let mut out = Vec::new();
    for &alpha in &ctx.run.config.verify.alpha {
        let primed = alpha >= 1.5;
        let q = if primed { 3.0 } else { 2.0 };
        for (id, f) in &ctx.run.functions {
            let (fid, g) = regime(id, f, primed);
            let loc = constants::localization(alpha, domain, eps);
            let base = ctx.record(CheckId::Theorem2Localization, alpha, fid.clone());
            let local = localized_galpha(domain, &g, alpha, eps, spec);
            out.push(ctx.attempt(base, |rec| {
                let loc = loc.clone()?;
                let full = galpha_norm(domain, &g, alpha, spec)?;
                let local = local.clone()?;
                Ok(rec
                    .bound("localization", full.value, loc.factor() * local.value)
                    .constants([
                        (if primed { "B0'" } else { "B0" }, loc.b0),
                        ("B", loc.b),
                        ("eps", eps),
                        ("full", full.value),
                        ("local", local.value),
                    ])
                    .err(full.error_estimate + loc.factor() * local.error_estimate)
                    .note("beta column holds alpha"))
            }));
            let base = ctx.record(CheckId::Theorem2Localization, alpha, format!("{fid}/shifted"));
            out.push(ctx.attempt(base, |rec| {
                let loc = loc.clone()?;
                let shifted =
                    weighted_exterior_integral(domain, &g, Weight::DistPow(2.0 * alpha + 1.0), Region::Exterior, spec)?;
                let local = local.clone()?;
                let factor = loc.shifted_factor(big_r);
                Ok(rec
                    .bound("localization", shifted.value, factor * local.value)
                    .constants([
                        (if primed { "B1'" } else { "B1" }, loc.b1),
                        ("B", loc.b),
                        ("R", big_r),
                        ("shifted", shifted.value),
                        ("local", local.value),
                    ])
                    .err(shifted.error_estimate + factor * local.error_estimate)
                    .note("dist^(2a+1) against the collar integral; beta column holds alpha"))
            }));
            for (tag, t) in [("annulus", alpha), ("annulus_half", alpha + 0.5)] {
                let base = ctx.record(CheckId::Theorem2Localization, alpha, format!("{fid}/{tag}"));
                out.push(ctx.attempt(base, |rec| {
                    let w = Weight::DistPow(2.0 * t);
                    let outer = weighted_exterior_integral(domain, &g, w, Region::Outside(4.0 * big_r), spec)?;
                    let ring =
                        weighted_exterior_integral(domain, &g, w, Region::Annulus(2.0 * big_r, 4.0 * big_r), spec)?;
                    let k = annulus_constant(t, q);
                    Ok(rec
                        .bound("outer<=k*annulus", outer.value, k * ring.value)
                        .constants([("t", t), ("k", k), ("outer", outer.value), ("annulus", ring.value)])
                        .err(outer.error_estimate + k * ring.error_estimate)
                        .note("|z|>=4R against 2R<=|z|<4R with the constant the argument produces; beta column holds alpha"))
                }));
            }
        }
    }
    out
}

fn near_weights(ctx: &Context, id: CheckId) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let v = &ctx.run.config.verify;
    let g = domain.metrics();
    let half = 0.5 * g.min_width;
    let near = exterior_points(domain, v.near_points, 0.0, half, v.seed);
    let far = if id == CheckId::Lemma7 {
        exterior_points(domain, v.far_points, half, half + g.diameter, v.seed.wrapping_add(1))
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    for &beta in &v.beta {
        let (m, big_m, m0) = (constants::m_lower(beta, domain), constants::m_upper(beta, domain), constants::m_far(domain));
        let pw = 2.0 * beta + 2.0;
        for (k, pt) in near.iter().enumerate() {
            let base = ctx.record(id, beta, format!("near{k:02}"));
            out.push(ctx.attempt(base, |rec| {
                let d = pt.distance;
                let p = p_weight(domain, pt.zeta, beta)?;
                let rec = if id == CheckId::Lemma5 {
                    let p0 = p0_weight(domain, pt.zeta, beta)?;
                    rec.bound("lower", 2.0 / 3.0 * p0, p).bound("upper", p, 2.0 * p0).constant("p0", p0)
                } else {
                    rec.bound("lower", m * d.powf(pw), p)
                        .bound("upper", p, big_m * d.powf(pw))
                        .constants([("m", m), ("M", big_m)])
                };
                Ok(rec
                    .constants([("dist", d), ("p", p)])
                    .err(1e-10 * p)
                    .note(format!("zeta={}{:+}i", pt.zeta.re, pt.zeta.im)))
            }));
        }
        for (k, pt) in far.iter().enumerate() {
            let base = ctx.record(id, beta, format!("far{k:02}"));
            out.push(ctx.attempt(base, |rec| {
                let d = pt.distance;
                let p = p_weight(domain, pt.zeta, beta)?;
                Ok(rec
                    .bound("upper", p, m0 * d.powf(pw + 1.0) + big_m * d.powf(pw))
                    .constants([("M0", m0), ("M", big_m), ("dist", d), ("p", p)])
                    .err(1e-10 * p)
                    .note(format!("zeta={}{:+}i", pt.zeta.re, pt.zeta.im)))
            }));
        }
    }
    out
}

/// `Σ HP(θ) dΔ(θ)` over the boundary, smooth part plus edges.
fn halfplane_sum(ctx: &Context, f: &ExpSum, beta: f64, n: usize) -> Result<f64> {
    let domain = &ctx.run.domain;
    let mut sum = 0.0;
    for (theta, w) in domain.angular_nodes(n) {
        let rho = domain.density(theta);
        if rho > 0.0 {
            sum += w * rho * halfplane_integral(domain, f, beta, theta, &ctx.refined)?.value;
        }
    }
    for atom in domain.atoms() {
        sum += atom.length * halfplane_integral(domain, f, beta, atom.angle, &ctx.refined)?.value;
    }
    Ok(sum)
}

fn theorem1prime(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let mut out = Vec::new();
    for &beta in &ctx.run.config.verify.beta {
        let min_order = u32::from(beta >= 0.5);
        let grid = ExteriorGrid::new(domain, Weight::P(beta), min_order, &ctx.spec);
        for (k, (id, f)) in ctx.run.functions.iter().enumerate() {
            let (fid, g) = regime(id, f, beta >= 0.5);
            let base = ctx.record(CheckId::Theorem1primeConsistency, beta, fid.clone());
            out.push(ctx.attempt(base, |rec| {
                let grid = grid.as_ref().map_err(Clone::clone)?;
                let b = ctx.bundle(beta)?;
                let norm = ctx.engine.pbeta_norm(&g, beta)?;
                let norm2 = ctx.fine.pbeta_norm(&g, beta)?;
                let area = grid.integrate_to(&g, ctx.spec.angular_nodes, GRID_TOL)?;
                let area2 = grid.integrate_to(&g, ctx.refined.angular_nodes, GRID_TOL / 10.0)?;
                let ratio = norm.value / area.value;
                let ratio2 = norm2.value / area2.value;
                Ok(rec
                    .bound("positive", 0.0, ratio)
                    .bound("refinement", drift(ratio, ratio2), STABILITY)
                    .constants([
                        ("1/A", 1.0 / b.A),
                        ("1/a", 1.0 / b.a),
                        ("ratio", ratio),
                        ("ratio_refined", ratio2),
                        ("weighted_area", area2.value),
                    ])
                    .err(ratio.abs() * (norm.relative_error() + area.relative_error())))
            }));
            if k > 0 {
                continue;
            }
            let base = ctx.record(CheckId::Theorem1primeConsistency, beta, format!("{fid}/identity"));
            out.push(ctx.attempt(base, |rec| {
                let grid = grid.as_ref().map_err(Clone::clone)?;
                let area = grid.integrate_to(&g, ctx.refined.angular_nodes, IDENTITY_TOL / 10.0)?;
                let sum = halfplane_sum(ctx, &g, beta, ctx.refined.angular_nodes)?;
                Ok(rec
                    .bound("identity", drift(sum, area.value), IDENTITY_TOL)
                    .constants([("weighted_area", area.value), ("halfplane_sum", sum)])
                    .err(area.relative_error())
                    .note("area integral of |g''|^2 p against the boundary sum of half-plane integrals"))
            }));
        }
    }
    out
}

fn main_theorem(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let v = &ctx.run.config.verify;
    let mut out = Vec::new();
    for &beta in &v.beta {
        let mut ratios = Vec::new();
        for (id, f) in &ctx.run.functions {
            let (fid, g) = regime(id, f, beta >= 0.5);
            let base = ctx.record(CheckId::MainTheoremRatio, beta, fid);
            let rec = ctx.attempt(base, |rec| {
                let b = ctx.bundle(beta)?;
                let p = ctx.engine.pbeta_norm(&g, beta)?;
                let p2 = ctx.fine.pbeta_norm(&g, beta)?;
                let gn = galpha_norm(domain, &g, beta + 1.0, &ctx.spec)?;
                let gn2 = galpha_norm(domain, &g, beta + 1.0, &ctx.refined)?;
                let ratio = p.value / gn.value;
                let ratio2 = p2.value / gn2.value;
                Ok(rec
                    .bound("positive", 0.0, ratio)
                    .bound("refinement", drift(ratio, ratio2), STABILITY)
                    .constants([("c", b.c), ("C", b.C), ("ratio", ratio), ("ratio_refined", ratio2)])
                    .err(ratio.abs() * (p.relative_error() + gn.relative_error())))
            });
            if rec.passed() {
                ratios.push(rec.constants.iter().find(|c| c.name == "ratio_refined").map_or(f64::NAN, |c| c.value));
            }
            out.push(rec);
        }
        if ratios.len() >= 2 {
            let base = ctx.record(CheckId::MainTheoremRatio, beta, "family");
            out.push(ctx.attempt(base, |rec| {
                let b = ctx.bundle(beta)?;
                let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
                let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
                let allowed = v.safety_factor * b.C / b.c;
                Ok(rec
                    .bound("spread", hi / lo, allowed)
                    .constants([
                        ("min_ratio", lo),
                        ("max_ratio", hi),
                        ("C/c", b.C / b.c),
                        ("safety", v.safety_factor),
                        ("members", ratios.len() as f64),
                    ])
                    .note("max/min of the refined ratios over the functions"))
            }));
        }
    }
    out
}

fn oracle_tail(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let rho = 4.0 * domain.metrics().circumradius;
    let mut out = Vec::new();
    for (id, f) in &ctx.run.functions {
        let k0 = f64::from(f.vanishing_order());
        for t in [0.0, 0.5, 1.0] {
            if t >= k0 + 2.0 {
                continue;
            }
            let base = ctx.record(CheckId::OracleTail, t, id.clone());
            out.push(ctx.attempt(base, |rec| {
                let series = laurent_tail(f, t, rho)?;
                let polar = weighted_exterior_integral(domain, f, Weight::AbsPow(2.0 * t), Region::Outside(rho), &ctx.spec)?;
                Ok(rec
                    .bound("agreement", drift(polar.value, series), TAIL_TOL)
                    .constants([("t", t), ("rho", rho), ("series", series), ("quadrature", polar.value)])
                    .err(polar.relative_error())
                    .note("beta column holds t"))
            }));
        }
    }
    out
}

fn oracle_kernel(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let exact: Box<dyn Fn(C64) -> f64> = if let Some((c, rad)) = domain.as_disk() {
        Box::new(move |l: C64| {
            let k = rad * l.norm();
            (PI * rad * rad).ln() + 2.0 * (l * c).re + ln_bessel_i1(2.0 * k) - k.ln()
        })
    } else if let Some((c, a, b, rot)) = domain.as_ellipse() {
        Box::new(move |l: C64| {
            let w = l * cis(rot);
            let k = (a * w.re).hypot(b * w.im);
            (a * b * PI).ln() + 2.0 * (l * c).re + ln_bessel_i1(2.0 * k) - k.ln()
        })
    } else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for phi in [0.0, FRAC_PI_3, 2.0] {
        for r in log_grid(0.1, 5.0, 12) {
            let lambda = r * cis(phi);
            let base = ctx.record(CheckId::OracleKernel, 0.0, format!("phi={phi:.4},r={r:.4}"));
            out.push(ctx.attempt(base, |rec| {
                let num = ln_laplace_kernel(domain, lambda);
                let closed = exact(lambda);
                Ok(rec
                    .bound("agreement", (num - closed).exp_m1().abs(), KERNEL_TOL)
                    .constants([("ln_K", num), ("ln_K_closed", closed)]))
            }));
        }
    }
    out
}

/// Distance to the domain described by `spec`, by elementary geometry;
/// negative inside.
fn brute_distance(spec: &DomainSpec, z: C64) -> f64 {
    let c = |p: &[f64; 2]| C64::new(p[0], p[1]);
    match spec {
        DomainSpec::Disk { center, radius } => (z - c(center)).norm() - radius,
        DomainSpec::Ellipse { center, a, b, rotation } => {
            let w = (z - c(center)) * cis(-rotation);
            if (w.re / a).powi(2) + (w.im / b).powi(2) <= 1.0 {
                return -1.0;
            }
            let gap = |t: f64| -(w - C64::new(a * t.cos(), b * t.sin())).norm();
            let n = 4096;
            let step = TAU / n as f64;
            let k = (0..n)
                .map(|k| (k, gap(k as f64 * step)))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .map_or(0, |(k, _)| k);
            let t0 = k as f64 * step;
            -quad::golden_max(gap, t0 - step, t0 + step, 1e-12).1
        }
        DomainSpec::SmoothedPolygon { vertices, rounding } => {
            let v: Vec<C64> = vertices.iter().map(c).collect();
            let n = v.len();
            let orient = (0..n).map(|i| (v[i].conj() * v[(i + 1) % n]).im).sum::<f64>().signum();
            let outside = (0..n).any(|i| {
                let (p, q) = (v[i], v[(i + 1) % n]);
                orient * ((q - p).conj() * (z - p)).im < 0.0
            });
            if !outside {
                return -1.0;
            }
            let seg = |p: C64, q: C64| {
                let e = q - p;
                let t = (((z - p) * e.conj()).re / e.norm_sqr()).clamp(0.0, 1.0);
                (z - p - e * t).norm()
            };
            (0..n).map(|i| seg(v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min) - rounding
        }
    }
}

fn oracle_distance(ctx: &Context) -> Vec<Record> {
    let domain = &ctx.run.domain;
    let v = &ctx.run.config.verify;
    let g = domain.metrics();
    let centre = domain.interior_point();
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed ^ 0xd157);
    let mut points = Vec::new();
    for _ in 0..100 * v.distance_points.max(1) {
        if points.len() == v.distance_points {
            break;
        }
        let z = centre + rng.gen_range(0.0..2.5 * g.diameter) * cis(rng.gen_range(0.0..TAU));
        let d = brute_distance(&ctx.run.config.domain, z);
        if d > 1e-3 * g.min_width {
            points.push((z, d));
        }
    }
    points
        .into_iter()
        .enumerate()
        .map(|(k, (z, brute))| {
            let base = ctx.record(CheckId::OracleDistance, 0.0, format!("pt{k:03}"));
            ctx.attempt(base, |rec| {
                let d = domain.distance(z);
                Ok(rec
                    .bound("agreement", (d - brute).abs(), DISTANCE_TOL)
                    .constants([("dist", d), ("brute", brute)])
                    .note(format!("zeta={}{:+}i", z.re, z.im)))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_distances() {
        let disk = DomainSpec::Disk { center: [1.0, 0.0], radius: 1.0 };
        assert!((brute_distance(&disk, C64::new(4.0, 0.0)) - 2.0).abs() < 1e-15);
        let ell = DomainSpec::Ellipse { center: [0.0, 0.0], a: 2.0, b: 1.0, rotation: 0.0 };
        assert!((brute_distance(&ell, C64::new(0.0, 3.0)) - 2.0).abs() < 1e-12);
        assert!((brute_distance(&ell, C64::new(5.0, 0.0)) - 3.0).abs() < 1e-12);
        let sq = DomainSpec::SmoothedPolygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            rounding: 0.1,
        };
        assert!((brute_distance(&sq, C64::new(2.0, 2.0)) - (2f64.sqrt() - 0.1)).abs() < 1e-15);
        assert!(brute_distance(&sq, C64::new(0.5, 0.5)) < 0.0);
    }

    #[test]
    fn annulus_constant_matches_stated_b0() {
        for alpha in [0.3, 1.0, 1.4] {
            assert!((annulus_constant(alpha, 2.0) - constants::b0(alpha)).abs() < 1e-12 * constants::b0(alpha));
        }
    }
}
