use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{cis, ConvexDomain};
use crate::functions::{ExpSum, Term};

/// Additive recurrence with the plastic-number step, a 3-dimensional
/// low-discrepancy sequence; `shift` is a random Cranley–Patterson offset.
struct R3 {
    step: [f64; 3],
    state: [f64; 3],
}

impl R3 {
    fn new(shift: [f64; 3]) -> Self {
        // root of x⁴ = x + 1
        let g = 1.220_744_084_605_759_5_f64;
        Self { step: [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)], state: shift }
    }
}

impl Iterator for R3 {
    type Item = [f64; 3];

    fn next(&mut self) -> Option<[f64; 3]> {
        for (s, d) in self.state.iter_mut().zip(self.step) {
            *s = (*s + d).fract();
        }
        Some(self.state)
    }
}

/// An exterior point at prescribed distance with its nearest boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExteriorSample {
    pub zeta: C64,
    pub distance: f64,
}

/// `count` points with `dist ∈ (lo, hi]`, spread over the boundary by arc length.
pub fn exterior_points(domain: &ConvexDomain, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<ExteriorSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = [rng.gen(), rng.gen(), rng.gen()];
    let perimeter = domain.metrics().perimeter;
    let edges: Vec<_> = domain.atoms().to_vec();
    let flat: f64 = edges.iter().map(|a| a.length).sum();
    R3::new(shift)
        .take(count)
        .map(|[u, v, w]| {
            let distance = hi - (hi - lo) * v;
            let zeta = if w * perimeter < flat {
                // a point facing the interior of an edge
                let mut s = u * flat;
                let atom = edges
                    .iter()
                    .find(|a| {
                        let inside = s < a.length;
                        if !inside {
                            s -= a.length;
                        }
                        inside
                    })
                    .unwrap_or(&edges[edges.len() - 1]);
                let (p, q) = domain.offset_segment(atom);
                let t = (s / atom.length).clamp(0.0, 1.0);
                p + (q - p) * t + distance * cis(-atom.angle)
            } else {
                let theta = TAU * u;
                domain.support_point(theta) + distance * cis(-theta)
            };
            ExteriorSample { zeta, distance }
        })
        .collect()
}

/// Seeded random exponential sums with poles well inside the domain.
pub fn family(domain: &ConvexDomain, count: usize, seed: u64) -> Vec<(String, ExpSum)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let centre = domain.interior_point();
    (0..count)
        .map(|k| {
            let n = 1 + k % 3;
            let mut terms: Vec<Term> = Vec::with_capacity(n);
            while terms.len() < n {
                let theta = rng.gen_range(0.0..TAU);
                let depth = rng.gen_range(0.1..0.7);
                let freq = centre + (domain.support_point(theta) - centre) * depth;
                let coeff = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let power = u32::from(rng.gen_bool(0.3));
                if terms.iter().all(|t| (t.freq - freq).norm() > 1e-3) {
                    terms.push(Term::new(coeff, power, freq));
                }
            }
            let f = ExpSum::new(terms).expect("distinct frequencies");
            (format!("fam{k:02}"), f)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_sit_at_their_distance() {
        let square = vec![C64::new(-1.0, -1.0), C64::new(1.0, -1.0), C64::new(1.0, 1.0), C64::new(-1.0, 1.0)];
        for d in [ConvexDomain::ellipse(C64::new(0.0, 0.0), 2.0, 1.0, 0.4).unwrap(), ConvexDomain::smoothed_polygon(square, 0.1).unwrap()] {
            let pts = exterior_points(&d, 40, 0.05, 0.5, 3);
            assert_eq!(pts.len(), 40);
            for p in &pts {
                assert!(p.distance > 0.05 && p.distance <= 0.5);
                assert!((d.distance(p.zeta) - p.distance).abs() < 1e-9, "{:?}", p);
            }
            assert_eq!(pts, exterior_points(&d, 40, 0.05, 0.5, 3));
        }
    }

    #[test]
    fn family_is_seeded_and_interior() {
        let d = ConvexDomain::disk(C64::new(0.0, 0.0), 1.0).unwrap();
        let a = family(&d, 6, 11);
        let b = family(&d, 6, 11);
        assert_eq!(a.len(), 6);
        for ((ia, fa), (ib, fb)) in a.iter().zip(&b) {
            assert_eq!(ia, ib);
            assert_eq!(fa, fb);
            assert!(fa.pole_margin(&d) > 0.25);
        }
    }
}
