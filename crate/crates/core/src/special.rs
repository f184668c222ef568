//! Modified Bessel function I₁, used as a closed-form oracle for the
//! Laplace kernel of disks and ellipses.

use std::f64::consts::PI;

/// `ln I₁(x)` for `x > 0`.
pub fn ln_bessel_i1(x: f64) -> f64 {
    assert!(x > 0.0, "ln_bessel_i1 needs x > 0");
    if x <= 50.0 {
        bessel_i1_series(x).ln()
    } else {
        x + scaled_i1_asymptotic(x).ln()
    }
}

/// `I₁(x)`; overflows to infinity past roughly `x = 713`.
pub fn bessel_i1(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let s = x.signum();
    s * ln_bessel_i1(x.abs()).exp()
}

fn bessel_i1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 0..500 {
        let k = k as f64;
        term *= q / ((k + 1.0) * (k + 2.0));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

// e^{-x} I₁(x) from the Hankel expansion; accurate to rounding for x > 50.
fn scaled_i1_asymptotic(x: f64) -> f64 {
    let mu = 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}
