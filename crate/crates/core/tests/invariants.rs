use std::f64::consts::{PI, TAU};

use exptype_core::constants::constant_bundle;
use exptype_core::domain::ConvexDomain;
use exptype_core::functions::ExpSum;
use exptype_core::norms::{galpha_norm, pbeta_norm, QuadratureSpec};
use exptype_core::verify::{exterior_points, CheckId, Record};
use exptype_core::C64;
use proptest::prelude::*;

fn domain(kind: u8, size: f64, shape: f64, rotation: f64) -> ConvexDomain {
    match kind % 3 {
        0 => ConvexDomain::disk(C64::new(0.1, -0.2), size).unwrap(),
        1 => ConvexDomain::ellipse(C64::new(0.0, 0.1), size, size * shape, rotation).unwrap(),
        _ => {
            let v = (0..3).map(|k| size * C64::from_polar(1.0, rotation + TAU * f64::from(k) / 3.0)).collect();
            ConvexDomain::smoothed_polygon(v, 0.3 * shape).unwrap()
        }
    }
}

fn domains() -> impl Strategy<Value = ConvexDomain> {
    (0u8..3, 0.5f64..2.0, 0.3f64..1.0, 0.0f64..PI).prop_map(|(k, s, q, r)| domain(k, s, q, r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn record_status_follows_margin_sign(lhs in -1e3f64..1e3, rhs in -1e3f64..1e3, other in 0.0f64..1.0) {
        let r = Record::new(CheckId::Lemma2, "d", 0.0, "f")
            .bound("a", lhs, rhs)
            .bound("b", other, 1.0)
            .finish();
        prop_assert_eq!(r.passed(), lhs <= rhs);
        prop_assert!((-2.0..=2.0).contains(&r.margin));
        prop_assert_eq!(r.passed(), r.margin >= 0.0);
    }

    #[test]
    fn support_function_bounds_the_boundary(d in domains(), phi in 0.0f64..TAU, theta in 0.0f64..TAU) {
        let z = d.support_point(theta);
        let reach = (z * C64::from_polar(1.0, phi)).re;
        prop_assert!(reach <= d.h(phi) + 1e-9);
        prop_assert!(d.width(phi) >= d.metrics().min_width - 1e-9);
        prop_assert!(d.density(phi) >= 0.0);
    }

    #[test]
    fn separation_is_the_distance_outside(d in domains(), theta in 0.0f64..TAU, dist in 1e-3f64..10.0) {
        let zeta = d.support_point(theta) + dist * C64::from_polar(1.0, -theta);
        let (sep, _) = d.separation(zeta);
        prop_assert!((sep - dist).abs() <= 1e-7 * dist.max(1.0), "sep {} dist {}", sep, dist);
        prop_assert!((d.distance(zeta) - dist).abs() <= 1e-7 * dist.max(1.0));
    }

    #[test]
    fn sections_grow_with_depth(d in domains(), phi in 0.0f64..TAU, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let w = d.width(phi);
        let (shallow, deep) = if a < b { (a, b) } else { (b, a) };
        let s1 = d.section_area(-shallow * w, phi);
        let s2 = d.section_area(-deep * w, phi);
        prop_assert!(s1 <= s2 + 1e-9 * d.metrics().area);
        prop_assert!(s2 <= d.metrics().area * (1.0 + 1e-9));
        prop_assert!(d.chord_length(-deep * w, phi) <= d.metrics().diameter + 1e-9);
    }

    #[test]
    fn sampled_points_sit_at_their_distance(d in domains(), seed in any::<u64>()) {
        for p in exterior_points(&d, 12, 0.05, 2.0, seed) {
            prop_assert!(p.distance > 0.05 && p.distance <= 2.0);
            prop_assert!((d.distance(p.zeta) - p.distance).abs() <= 1e-7);
        }
    }

    #[test]
    fn constants_are_ordered(beta in -0.45f64..1.45, d in domains()) {
        let eps = d.metrics().min_width / 2.0;
        let b = constant_bundle(beta, &d, eps, 1.0, 1.0).unwrap();
        prop_assert!(b.a > 0.0 && b.a <= b.A);
        prop_assert!(b.m > 0.0 && b.m <= b.M);
        prop_assert!(b.c > 0.0 && b.c <= b.C);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn norms_scale_quadratically(re in -2.0f64..2.0, im in -2.0f64..2.0, lx in -0.5f64..0.5, ly in -0.5f64..0.5) {
        prop_assume!(re.hypot(im) > 0.1);
        let d = ConvexDomain::disk(C64::new(0.0, 0.0), 1.0).unwrap();
        let spec = QuadratureSpec::default();
        let f = ExpSum::exponential(C64::new(1.0, 0.0), C64::new(lx, ly));
        let s = C64::new(re, im);
        let g = f.scaled(s);
        let k = s.norm_sqr();
        let p = pbeta_norm(&d, &f, 0.0, &spec).unwrap().value;
        let q = pbeta_norm(&d, &g, 0.0, &spec).unwrap().value;
        prop_assert!((q - k * p).abs() <= 1e-9 * q);
        let a = galpha_norm(&d, &f, 1.0, &spec).unwrap().value;
        let b = galpha_norm(&d, &g, 1.0, &spec).unwrap().value;
        prop_assert!((b - k * a).abs() <= 1e-9 * b);
    }
}
