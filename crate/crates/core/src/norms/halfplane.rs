//! `∫_{x<0} ∫_ℝ |γ″(e^{−iφ}(h(φ) − x − iy))|² |x|^{2β+3} / s(x, φ) dy dx`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

use super::{NormValue, QuadratureSpec};
use crate::domain::{cis, ConvexDomain};
use crate::error::{Error, Result};
use crate::functions::ExpSum;
use crate::quad::{self, Tolerance};

struct Frame<'a> {
    f: &'a ExpSum,
    back: C64,
    h: f64,
    // pole positions (x_λ > 0, y_λ) in the frame
    poles: Vec<(f64, f64)>,
}

impl Frame<'_> {
    fn zeta(&self, x: f64, y: f64) -> C64 {
        self.back * C64::new(self.h - x, -y)
    }

    /// `Y(x) = ∫ |γ″|² dy` along the line at signed depth `x < 0`.
    fn line(&self, x: f64, rel: f64) -> (f64, f64) {
        let near = self.poles.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let scale = x.abs() + near;
        let center = self.poles.iter().map(|p| p.1).sum::<f64>() / self.poles.len() as f64;
        // y = center + scale·tan ψ
        let mut breaks = vec![-FRAC_PI_2, 0.0, FRAC_PI_2];
        for &(_, y) in &self.poles {
            breaks.push(((y - center) / scale).atan());
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let g = |psi: f64| {
            let c = psi.cos();
            let y = center + scale * psi.tan();
            self.f.gamma_dd_unchecked(self.zeta(x, y)).norm_sqr() * scale / (c * c)
        };
        let out = quad::integrate_breaks(g, &breaks, Tolerance::new(0.0, rel));
        (out.value, out.error)
    }
}

/// The half-plane integral in direction `φ`, equal in the mean to `I_φ`
/// up to the constants of the radial estimate.
pub fn halfplane_integral(
    domain: &ConvexDomain,
    f: &ExpSum,
    beta: f64,
    phi: f64,
    spec: &QuadratureSpec,
) -> Result<NormValue> {
    if !(beta > -0.5) {
        return Err(Error::OutOfRange(format!("β={beta} must exceed −1/2")));
    }
    if f.pole_margin(domain) < 1e-6 * domain.metrics().min_width {
        return Err(Error::InvalidFunction("pole outside domain".into()));
    }
    let k0 = f.vanishing_order();
    let decay = 2.0 * f64::from(k0) - 2.0 * beta;
    if decay <= -1.0 {
        return Err(Error::IntegralDivergent(format!(
            "integrand decays like |x|^{} for x → −∞",
            -decay - 2.0
        )));
    }
    let e = cis(phi);
    let h = domain.h(phi);
    let frame = Frame {
        f,
        back: e.conj(),
        h,
        poles: f.poles().map(|l| (h - (l * e).re, -(l * e).im)).collect(),
    };
    let width = domain.width(phi);
    let area = domain.metrics().area;
    let power = 2.0 * beta + 3.0;
    let rel = spec.rel_tol / 10.0;
    let inner = rel / 10.0;
    let tol = Tolerance::new(0.0, rel).with_max_intervals(spec.max_subdiv);
    let mut inner_err = 0.0;

    // x = −R_φ y² on [−R_φ, 0]
    let near = quad::integrate_breaks(
        |y: f64| {
            let x = -width * y * y;
            let (line, err) = frame.line(x, inner);
            let w = (-x).powf(power) / domain.section_area(x, phi) * 2.0 * width * y;
            inner_err += err * w;
            line * w
        },
        &[0.0, 0.125, 0.25, 0.5, 1.0],
        tol,
    );
    // x = −R_φ / s, s = v^q on x < −R_φ
    let q = (2.0 / (decay + 1.0)).max(1.0);
    let far = quad::integrate(
        |v: f64| {
            let s = v.powf(q);
            let x = -width / s;
            let (line, err) = frame.line(x, inner);
            let w = (-x).powf(power) / area * width / (s * s) * q * v.powf(q - 1.0);
            if !w.is_finite() {
                return 0.0;
            }
            inner_err += err * w;
            line * w
        },
        0.0,
        1.0,
        tol,
    );
    let value = near.value + far.value;
    let error = near.error + far.error + inner_err / 21.0;
    if !value.is_finite() {
        return Err(Error::IntegralDivergent(format!("half-plane integral at φ={phi} is not finite")));
    }
    Ok(NormValue::new(value, error, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_disk() -> ConvexDomain {
        ConvexDomain::disk(C64::new(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn rotation_covariance_on_the_disk() {
        let d = unit_disk();
        let spec = QuadratureSpec::default();
        let lam = C64::new(0.3, 0.1);
        let phi = 0.9;
        let a = halfplane_integral(&d, &ExpSum::exponential(C64::new(1.0, 0.0), lam), 0.0, phi, &spec).unwrap();
        // rotating ζ by e^{−iφ} maps the pole λ to λe^{iφ}
        let rotated = ExpSum::exponential(C64::new(1.0, 0.0), lam * cis(phi));
        let b = halfplane_integral(&d, &rotated, 0.0, 0.0, &spec).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-8);
    }

    #[test]
    fn quadratic_scaling() {
        let d = ConvexDomain::ellipse(C64::new(0.0, 0.0), 2.0, 1.0, 0.4).unwrap();
        let spec = QuadratureSpec::default();
        let f = ExpSum::exponential(C64::new(1.0, 0.0), C64::new(0.5, 0.2));
        let a = halfplane_integral(&d, &f, 0.25, 1.0, &spec).unwrap();
        let b = halfplane_integral(&d, &f.scaled(C64::new(2.0, 0.0)), 0.25, 1.0, &spec).unwrap();
        assert_relative_eq!(b.value, 4.0 * a.value, max_relative = 1e-12);
    }

    #[test]
    fn line_integral_matches_residue_formula() {
        // γ″ = 2/(ζ−λ)³: ∫ 4/|a + iy|⁶ dy = 4·3π/(8a⁵) with a the distance to the line
        let d = unit_disk();
        let f = ExpSum::exponential(C64::new(1.0, 0.0), C64::new(0.2, 0.0));
        let frame = Frame { f: &f, back: C64::new(1.0, 0.0), h: 1.0, poles: vec![(0.8, 0.0)] };
        let (y, _) = frame.line(-0.5, 1e-13);
        let a = 1.3f64;
        assert_relative_eq!(y, 4.0 * 3.0 * std::f64::consts::PI / (8.0 * a.powi(5)), max_relative = 1e-11);
        let _ = d;
    }

    #[test]
    fn divergence_for_nonvanishing_f_at_large_beta() {
        let d = unit_disk();
        let f = ExpSum::exponential(C64::new(1.0, 0.0), C64::new(0.2, 0.0));
        let err = halfplane_integral(&d, &f, 0.5, 0.0, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, Error::IntegralDivergent(_)));
        assert!(halfplane_integral(&d, &f.times_power(1), 0.5, 0.0, &QuadratureSpec::default()).is_ok());
    }
}
