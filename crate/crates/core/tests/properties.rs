use std::f64::consts::PI;

use proptest::prelude::*;
use strip_spectrum::{bracket_for, count_bounds, discrete_spectrum, lambda_bound, solve_in_bracket, Geometry, Parity};

fn width() -> impl Strategy<Value = f64> {
    prop_oneof![Just(PI), Just(PI / 2.0), 0.3f64..PI]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brackets_nest(d in width(), l in 0.05f64..40.0, m in 1usize..50) {
        let g = Geometry::new(d, l).unwrap();
        prop_assert!(lambda_bound(&g, m - 1).unwrap() < lambda_bound(&g, m).unwrap());
        let b = bracket_for(&g, m).unwrap();
        prop_assert_eq!(b.lower.to_bits(), lambda_bound(&g, m - 1).unwrap().to_bits());
        prop_assert_eq!(b.is_below_threshold, b.upper < 1.0);
    }

    #[test]
    fn bounds_fall_with_l(d in width(), l in 0.05f64..20.0, dl in 0.01f64..5.0, m in 1usize..20) {
        let a = Geometry::new(d, l).unwrap();
        let b = Geometry::new(d, l + dl).unwrap();
        prop_assert!(lambda_bound(&b, m).unwrap() < lambda_bound(&a, m).unwrap());
        let (lo, hi) = count_bounds(&a).unwrap();
        prop_assert_eq!(hi, lo + 1);
    }

    #[test]
    fn spectrum_respects_brackets_and_count(d in width(), l in 0.2f64..7.0) {
        let g = Geometry::new(d, l).unwrap();
        let s = discrete_spectrum(&g, 30, 1e-10).unwrap();
        let (lo, hi) = count_bounds(&g).unwrap();
        prop_assert!(s.points.len() >= lo && s.points.len() <= hi);
        prop_assert!(s.warnings.is_empty());
        for (i, p) in s.points.iter().enumerate() {
            prop_assert_eq!(p.m, i + 1);
            prop_assert_eq!(p.parity, if p.m % 2 == 1 { Parity::Even } else { Parity::Odd });
            prop_assert!(p.bracket.contains_strictly(p.lambda));
        }
        for w in s.points.windows(2) {
            prop_assert!(w[1].lambda - w[0].lambda > 1e-9);
        }
    }

    #[test]
    fn first_eigenvalue_falls_with_l(d in width(), l in 0.3f64..5.0, dl in 0.05f64..1.0) {
        let a = solve_in_bracket(&Geometry::new(d, l).unwrap(), 1, 30, 1e-12).unwrap();
        let b = solve_in_bracket(&Geometry::new(d, l + dl).unwrap(), 1, 30, 1e-12).unwrap();
        prop_assert!(b.lambda < a.lambda);
    }
}
