//! The radial integral `I_φ = ∫₀^∞ |F(re^{iφ})|² / (K(re^{iφ}) r^{2β}) dr`
//! and the `P_β` norm `∫ I_φ dΔ(φ)`.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64 as C64;

use super::kernel::ln_chord_transform;
use super::{NormValue, QuadratureSpec};
use crate::domain::{cis, ConvexDomain};
use crate::error::{Error, Result};
use crate::functions::ExpSum;
use crate::quad::{self, Tolerance};

const CACHE_LIMIT: usize = 4_000_000;
const TAYLOR_TERMS: u32 = 40;
pub(crate) const MAX_ANGULAR_GROWTH: usize = 32;

/// Shared state for repeated norm evaluations over one domain: the values of
/// `ln J(r, φ)` are cached, since they do not depend on `F` or `β`.
pub struct NormEngine {
    domain: ConvexDomain,
    spec: QuadratureSpec,
    cache: Mutex<HashMap<(u64, u64), f64>>,
}

/// `ln |F(re^{iφ})|` along one ray, switching to the Taylor series near the
/// origin where the closed form cancels.
struct Ray<'a> {
    f: &'a ExpSum,
    dir: C64,
    coeffs: Vec<C64>,
    first: u32,
    small: f64,
}

impl<'a> Ray<'a> {
    fn new(f: &'a ExpSum, phi: f64) -> Self {
        let first = f.vanishing_order();
        let top = f.terms().iter().map(|t| t.freq.norm()).fold(0.0, f64::max);
        let mut inv_fact = 1.0;
        let coeffs = (0..first + TAYLOR_TERMS)
            .map(|k| {
                if k > 0 {
                    inv_fact /= f64::from(k);
                }
                if k < first {
                    C64::new(0.0, 0.0)
                } else {
                    f.taylor_coeff(k) * inv_fact
                }
            })
            .collect();
        let max_power = f.terms().iter().map(|t| t.power).max().unwrap_or(0);
        let small = if max_power >= first + TAYLOR_TERMS / 2 {
            0.0
        } else if top == 0.0 {
            f64::INFINITY
        } else {
            0.25 / top
        };
        Self { f, dir: cis(phi), coeffs, first, small }
    }

    fn ln_abs(&self, r: f64) -> f64 {
        if r < self.small {
            let z = r * self.dir;
            let mut acc = C64::new(0.0, 0.0);
            for c in self.coeffs[self.first as usize..].iter().rev() {
                acc = acc * z + c;
            }
            return f64::from(self.first) * r.ln() + acc.norm().ln();
        }
        self.f.ln_abs(r * self.dir)
    }
}

impl NormEngine {
    pub fn new(domain: ConvexDomain, spec: QuadratureSpec) -> Self {
        Self { domain, spec, cache: Mutex::new(HashMap::new()) }
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Same cache, different tolerances.
    pub fn with_spec(&self, spec: QuadratureSpec) -> Self {
        let cache = self.cache.lock().map(|c| c.clone()).unwrap_or_default();
        Self { domain: self.domain.clone(), spec, cache: Mutex::new(cache) }
    }

    /// `ln J(r, φ)`, memoised.
    pub fn ln_chord(&self, r: f64, phi: f64) -> f64 {
        let key = (r.to_bits(), phi.to_bits());
        if let Some(&v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return v;
        }
        let v = ln_chord_transform(&self.domain, r, phi);
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() > CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, v);
        v
    }

    /// `ln K(re^{iφ})`.
    pub fn ln_kernel(&self, r: f64, phi: f64) -> f64 {
        2.0 * r * self.domain.h(phi) + self.ln_chord(r, phi)
    }

    fn check_function(&self, f: &ExpSum, beta: f64) -> Result<u32> {
        if !(beta > -0.5) {
            return Err(Error::OutOfRange(format!("β={beta} must exceed −1/2")));
        }
        let sigma = self.domain.metrics().min_width;
        if f.pole_margin(&self.domain) < 1e-6 * sigma {
            return Err(Error::InvalidFunction("pole outside domain".into()));
        }
        let p = f.vanishing_order();
        let exponent = 2.0 * f64::from(p) - 2.0 * beta;
        if exponent <= -1.0 {
            return Err(Error::NormDivergent(format!(
                "integrand behaves like r^{exponent} at r=0 (F vanishes to order {p}, β={beta})"
            )));
        }
        Ok(p)
    }

    /// `I_φ` for one direction.
    pub fn radial_integral(&self, f: &ExpSum, beta: f64, phi: f64) -> Result<NormValue> {
        let p = self.check_function(f, beta)?;
        self.radial_unchecked(f, beta, phi, p)
    }

    fn radial_unchecked(&self, f: &ExpSum, beta: f64, phi: f64, p: u32) -> Result<NormValue> {
        let rel = self.spec.rel_tol / 10.0;
        let max_intervals = self.spec.max_subdiv;
        let sigma = self.domain.metrics().min_width;
        let ray = Ray::new(f, phi);
        let h = self.domain.h(phi);
        let integrand = |r: f64| {
            let l = 2.0 * ray.ln_abs(r) - 2.0 * r * h - self.ln_chord(r, phi) - 2.0 * beta * r.ln();
            let v = l.exp();
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let scale = 2.0 / sigma;
        let r_max = 2000.0 / sigma;
        let exponent = 2.0 * f64::from(p) - 2.0 * beta;
        let smooth_at_zero = (exponent - exponent.round()).abs() < 1e-12;
        let first = if smooth_at_zero {
            quad::integrate(integrand, 0.0, scale, Tolerance::new(0.0, rel).with_max_intervals(max_intervals))
        } else {
            quad::tanh_sinh(integrand, 0.0, scale, Tolerance::new(0.0, rel))
        };
        let mut total = first.value;
        let mut error = first.error;
        let mut prev = first.value;
        let mut lo = scale;
        loop {
            let hi = 2.0 * lo;
            if hi > r_max {
                return Err(Error::NormDivergent(format!(
                    "radial integrand at φ={phi} still contributes beyond r={lo:.3e}"
                )));
            }
            let tol = Tolerance::new(rel * total.abs(), rel).with_max_intervals(max_intervals);
            let piece = quad::integrate(integrand, lo, hi, tol);
            total += piece.value;
            error += piece.error;
            let q = if prev > 0.0 { piece.value / prev } else { 0.0 };
            prev = piece.value;
            lo = hi;
            if piece.value <= 1e-3 * rel * total && q < 0.5 {
                error += piece.value * q / (1.0 - q);
                break;
            }
        }
        if !total.is_finite() {
            return Err(Error::NormDivergent(format!("radial integral at φ={phi} is not finite")));
        }
        Ok(NormValue::new(total, error, Vec::new()))
    }

    // Σ w·I(θ) over the angular rule with `n` nodes, plus the atom terms.
    fn angular_sum(
        &self,
        f: &ExpSum,
        beta: f64,
        p: u32,
        n: usize,
        seen: &mut HashMap<u64, NormValue>,
    ) -> Result<(f64, f64)> {
        let mut radial = |theta: f64| -> Result<NormValue> {
            if let Some(v) = seen.get(&theta.to_bits()) {
                return Ok(v.clone());
            }
            let v = self.radial_unchecked(f, beta, theta, p)?;
            seen.insert(theta.to_bits(), v.clone());
            Ok(v)
        };
        let mut value = 0.0;
        let mut error = 0.0;
        for (theta, w) in self.domain.angular_nodes(n) {
            let weight = w * self.domain.density(theta);
            if weight == 0.0 {
                continue;
            }
            let i = radial(theta)?;
            value += weight * i.value;
            error += weight * i.error_estimate;
        }
        for atom in self.domain.atoms() {
            let i = radial(atom.angle)?;
            value += atom.length * i.value;
            error += atom.length * i.error_estimate;
        }
        Ok((value, error))
    }

    /// `‖F‖²_{P_β} = ∫₀^{2π} I_φ dΔ(φ)`. The angular rule is doubled from
    /// the configured node count until it agrees with its half-size version.
    pub fn pbeta_norm(&self, f: &ExpSum, beta: f64) -> Result<NormValue> {
        let p = self.check_function(f, beta)?;
        let mut seen = HashMap::new();
        let mut n = self.spec.angular_nodes;
        let (mut coarse, _) = self.angular_sum(f, beta, p, n / 2, &mut seen)?;
        loop {
            let (fine, fine_err) = self.angular_sum(f, beta, p, n, &mut seen)?;
            let diff = (fine - coarse).abs();
            if diff <= 0.1 * self.spec.rel_tol * fine.abs() || n >= MAX_ANGULAR_GROWTH * self.spec.angular_nodes {
                return Ok(NormValue::new(fine, diff + fine_err, vec![n, n / 2]));
            }
            coarse = fine;
            n *= 2;
        }
    }
}

/// `I_φ` with a fresh engine.
pub fn radial_integral(
    domain: &ConvexDomain,
    f: &ExpSum,
    beta: f64,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<NormValue> {
    NormEngine::new(domain.clone(), *spec).radial_integral(f, beta, phi)
}

/// `‖F‖²_{P_β}` with a fresh engine.
pub fn pbeta_norm(domain: &ConvexDomain, f: &ExpSum, beta: f64, spec: &QuadratureSpec) -> Result<NormValue> {
    NormEngine::new(domain.clone(), *spec).pbeta_norm(f, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_bessel_i1;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_disk() -> ConvexDomain {
        ConvexDomain::disk(C64::new(0.0, 0.0), 1.0).unwrap()
    }

    fn one() -> ExpSum {
        ExpSum::exponential(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    fn bessel_oracle(beta: f64) -> f64 {
        // I_φ = ∫ r^{1−2β}/(π I₁(2r)) dr, split at 1 for the endpoint behaviour
        let g = |r: f64| (r.powf(1.0 - 2.0 * beta).ln() - PI.ln() - ln_bessel_i1(2.0 * r)).exp();
        let tol = Tolerance::new(0.0, 1e-13);
        quad::tanh_sinh(g, 0.0, 1.0, tol).value + quad::integrate(g, 1.0, 60.0, tol).value
    }

    #[test]
    fn constant_function_matches_bessel_oracle() {
        let d = unit_disk();
        let spec = QuadratureSpec::default();
        let i = radial_integral(&d, &one(), 0.0, 0.4, &spec).unwrap();
        assert_relative_eq!(i.value, bessel_oracle(0.0), max_relative = 1e-9);
        let n = pbeta_norm(&d, &one(), 0.0, &spec).unwrap();
        assert_relative_eq!(n.value, 2.0 * PI * bessel_oracle(0.0), max_relative = 1e-9);
        let i = radial_integral(&d, &one(), 0.3, 1.0, &spec).unwrap();
        assert_relative_eq!(i.value, bessel_oracle(0.3), max_relative = 1e-9);
    }

    #[test]
    fn constant_function_diverges_at_half() {
        let d = unit_disk();
        let spec = QuadratureSpec::default();
        let err = pbeta_norm(&d, &one(), 0.5, &spec).unwrap_err();
        assert!(matches!(err, Error::NormDivergent(_)));
        assert!(pbeta_norm(&d, &one().times_power(1), 0.5, &spec).is_ok());
    }

    #[test]
    fn radial_integral_peaks_toward_the_pole() {
        let d = unit_disk();
        let engine = NormEngine::new(d, QuadratureSpec::default());
        let f = ExpSum::exponential(C64::new(1.0, 0.0), C64::new(0.3, 0.0));
        let values: Vec<f64> = (0..24)
            .map(|k| engine.radial_integral(&f, 0.0, k as f64 * PI / 12.0).unwrap().value)
            .collect();
        let argmax = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(argmax, 0);
    }

    #[test]
    fn radial_integral_is_rotation_invariant_for_constants() {
        let engine = NormEngine::new(unit_disk(), QuadratureSpec::default());
        let a = engine.radial_integral(&one(), 0.0, 0.0).unwrap().value;
        for k in 1..8 {
            let b = engine.radial_integral(&one(), 0.0, k as f64 * 0.7).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn small_r_series_agrees_with_closed_form() {
        let f = ExpSum::new(vec![
            crate::functions::Term::new(C64::new(1.0, 0.0), 0, C64::new(0.3, 0.1)),
            crate::functions::Term::new(C64::new(-1.0, 0.0), 0, C64::new(-0.3, 0.2)),
        ])
        .unwrap();
        let ray = Ray::new(&f, 0.7);
        let r = 0.9 * ray.small;
        assert_relative_eq!(ray.ln_abs(r), f.ln_abs(r * cis(0.7)), max_relative = 1e-12);
    }

    #[test]
    fn refinement_moves_norm_below_tolerance() {
        let d = ConvexDomain::ellipse(C64::new(0.0, 0.0), 2.0, 1.0, 0.3).unwrap();
        let engine = NormEngine::new(d, QuadratureSpec::default());
        let f = ExpSum::exponential(C64::new(1.0, 0.0), C64::new(0.5, -0.2));
        let a = engine.pbeta_norm(&f, 0.0).unwrap();
        let fine = engine.with_spec(engine.spec().refined());
        let b = fine.pbeta_norm(&f, 0.0).unwrap();
        assert!((a.value - b.value).abs() < 1e-8 * b.value, "{a:?} {b:?}");
    }
}
