use std::sync::OnceLock;

use monoweight::corpus::{random_bump, random_shapes, BumpLayout};
use monoweight::function::{Bump, Dilated, Scaled, TestFunction};
use monoweight::inequalities::{morrey_quotient, series_criterion, sobolev_quotient, trudinger_functional};
use monoweight::integrals::Integrator;
use monoweight::isoperimetry::{isoperimetric_quotient, weighted_amgm, Shape};
use monoweight::neumann::{decode_mask, encode_mask, flux_apply, GridDomain2D, Shape2D};
use monoweight::quadrature::{ball_rule, box_rule};
use monoweight::rearrangement::{rearrange_with, RadialProfile};
use monoweight::region::AxisBox;
use monoweight::weights::{
    ball_measure, ball_perimeter, critical_exponent, full_ball_quotient, isoperimetric_constant,
};
use monoweight::{exec::pairwise_sum, Exec, WeightVector};
use proptest::prelude::*;
use rand::SeedableRng;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), Just(2.0), 0.0..3.0f64]
}

fn weight() -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(exponent(), 1..=3).prop_map(|v| WeightVector::new(v).unwrap())
}

fn planar_weight() -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(exponent(), 2).prop_map(|v| WeightVector::new(v).unwrap())
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * x.abs().max(y.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn critical_exponent_is_dimensionally_consistent(a in weight(), t in 0.01..0.99f64) {
        let d = a.effective_dimension();
        let p = 1.0 + t * (d - 1.0);
        prop_assume!(p < d);
        let ps = critical_exponent(&a, p).unwrap();
        prop_assert!((1.0 / p - 1.0 / ps - 1.0 / d).abs() < 1e-14);
    }

    #[test]
    fn isoperimetric_constant_from_ball(a in weight()) {
        let d = a.effective_dimension();
        let q = ball_perimeter(&a) / ball_measure(&a).powf((d - 1.0) / d);
        prop_assert!(close(isoperimetric_constant(&a), q, 1e-13));
        let k = a.positive_count() as f64;
        prop_assert!(close(full_ball_quotient(&a) / isoperimetric_constant(&a), 2f64.powf(k / d), 1e-14));
    }

    #[test]
    fn ball_quadrature_matches_gamma_formula(a in weight()) {
        let q = ball_rule(&a, 1.0, 30).total_weight();
        prop_assert!(close(q, ball_measure(&a), 1e-6), "{q} vs {}", ball_measure(&a));
    }

    #[test]
    fn box_rule_is_exact_for_low_degree(a in weight(), m in 0..16i32) {
        let rule = box_rule(&a, &AxisBox::unit(a.dim()), 8).unwrap();
        let exact: f64 = a.exponents().iter().map(|ai| 1.0 / (m as f64 + ai + 1.0)).product();
        let approx = rule.integrate(|x| x.iter().map(|xi| xi.powi(m)).product::<f64>());
        prop_assert!(close(approx, exact, 1e-12), "{approx} vs {exact}");
        prop_assert!(rule.weights().iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn shapes_respect_the_isoperimetric_bound_and_scale(a in weight(), seed in 0u64..1000, lambda in 0.3..3.0f64) {
        for s in random_shapes(&a, 4, seed) {
            let r = isoperimetric_quotient(&a, &s).unwrap();
            prop_assert!(r.margin >= -1e-6, "{s:?}: {r:?}");
            let scaled = isoperimetric_quotient(&a, &s.scaled(lambda)).unwrap();
            prop_assert!(close(scaled.quotient, r.quotient, 1e-10));
        }
    }

    #[test]
    fn geometric_mean_below_arithmetic(
        w in prop::collection::vec(0.0..10.0f64, 1..6),
        l in prop::collection::vec(0.0..3.0f64, 6),
    ) {
        let lambda = &l[..w.len()];
        prop_assume!(lambda.iter().sum::<f64>() > 1e-3);
        let (gm, am) = weighted_amgm(&w, lambda).unwrap();
        prop_assert!(gm <= am * (1.0 + 1e-12));
    }

    #[test]
    fn equal_entries_give_amgm_equality(v in 0.01..10.0f64, l in prop::collection::vec(0.1..3.0f64, 1..6)) {
        let w = vec![v; l.len()];
        let (gm, am) = weighted_amgm(&w, &l).unwrap();
        prop_assert!(close(gm, am, 1e-12));
    }

    #[test]
    fn mask_run_lengths_round_trip(mask in prop::collection::vec(any::<bool>(), 0..400)) {
        let runs = encode_mask(&mask);
        prop_assert_eq!(runs.iter().sum::<usize>(), mask.len());
        prop_assert_eq!(decode_mask(&runs, mask.len()).unwrap(), mask);
    }

    #[test]
    fn profile_csv_round_trips(mut steps in prop::collection::vec(0.01..1.0f64, 2..30), top in 0.1..5.0f64) {
        let mut radii = vec![0.0];
        for s in &steps {
            radii.push(radii.last().unwrap() + s);
        }
        steps.sort_by(|x, y| y.total_cmp(x));
        let mut values = vec![top];
        for (k, _) in steps.iter().enumerate() {
            values.push(top * (1.0 - (k + 1) as f64 / steps.len() as f64));
        }
        let p = RadialProfile::new(radii, values).unwrap();
        prop_assert_eq!(RadialProfile::from_csv(&p.to_csv()).unwrap(), p);
    }

    #[test]
    fn pairwise_sum_matches_naive(v in prop::collection::vec(-1e3..1e3f64, 0..500)) {
        let naive: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&v) - naive).abs() <= 1e-12 * scale);
        let seq = Exec::Sequential.map(&v, |x| x * x);
        prop_assert_eq!(seq, Exec::default().map(&v, |x| x * x));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sobolev_quotient_is_dilation_and_scale_invariant(a in planar_weight(), seed in 0u64..10_000, lambda in 0.4..2.5f64, c in 0.1..10.0f64) {
        let d = a.effective_dimension();
        let p = (1.0 + d) / 2.0;
        let spec = random_bump(&a, BumpLayout::NearOrigin, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let u = spec.build(&a, p).unwrap();
        let q = sobolev_quotient(&a, p, u.as_ref()).unwrap();
        let qd = sobolev_quotient(&a, p, &Dilated::new(u.as_ref(), lambda)).unwrap();
        let qs = sobolev_quotient(&a, p, &Scaled::new(u.as_ref(), c)).unwrap();
        prop_assert!(close(q, qd, 1e-10) && close(q, qs, 1e-10), "{q} {qd} {qs}");
    }

    #[test]
    fn trudinger_functional_ignores_scaling(seed in 0u64..10_000, c in 0.1..10.0f64) {
        let a = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let crit = series_criterion(&a).unwrap();
        let spec = random_bump(&a, BumpLayout::NearOrigin, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let u = spec.build(&a, 4.0).unwrap();
        let omega = Shape::sector_ball(6.0);
        let integ = Integrator::default();
        let f = trudinger_functional(&a, u.as_ref(), &omega, crit.c1, &integ).unwrap();
        let fc = trudinger_functional(&a, &Scaled::new(u.as_ref(), c), &omega, crit.c1, &integ).unwrap();
        prop_assert!(close(f, fc, 1e-12) && f >= 1.0 && f <= crit.c2);
    }

    #[test]
    fn neumann_flux_is_symmetric(
        u in prop::collection::vec(-1.0..1.0f64, 4096),
        v in prop::collection::vec(-1.0..1.0f64, 4096),
    ) {
        static DOM: OnceLock<GridDomain2D> = OnceLock::new();
        let dom = DOM.get_or_init(|| {
            let a = WeightVector::new(vec![1.0, 2.0]).unwrap();
            GridDomain2D::from_shape(&a, &Shape2D::Ellipse { center: [1.5, 1.2], semi: [0.9, 0.5] }, 0.03).unwrap()
        });
        let n = dom.cells.len();
        prop_assume!(n <= u.len());
        let (u, v) = (&u[..n], &v[..n]);
        let ku = flux_apply(dom, u, Exec::default());
        let kv = flux_apply(dom, v, Exec::default());
        let lhs = pairwise_sum(&ku.iter().zip(v).map(|(x, y)| x * y).collect::<Vec<_>>());
        let rhs = pairwise_sum(&kv.iter().zip(u).map(|(x, y)| x * y).collect::<Vec<_>>());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
        // constants are in the kernel
        let ones = vec![1.0; n];
        prop_assert!(flux_apply(dom, &ones, Exec::default()).iter().all(|x| x.abs() < 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn morrey_ratio_is_dilation_invariant(seed in 0u64..10_000, lambda in 0.4..2.5f64) {
        let a = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let spec = random_bump(&a, BumpLayout::NearOrigin, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let u = spec.build(&a, 6.0).unwrap();
        let integ = Integrator::default();
        let r = morrey_quotient(&a, 6.0, u.as_ref(), 5, &integ).unwrap().ratio;
        let rd = morrey_quotient(&a, 6.0, &Dilated::new(u.as_ref(), lambda), 5, &integ).unwrap().ratio;
        prop_assert!(close(r, rd, 1e-6), "{r} vs {rd}");
    }

    #[test]
    fn rearranged_profile_is_nonincreasing_and_keeps_the_maximum(
        cx in 0.9..2.0f64, cy in 0.9..2.0f64, r in 0.3..0.8f64, amp in 0.5..2.0f64,
    ) {
        let a = WeightVector::new(vec![1.0, 0.5]).unwrap();
        let u = Bump::anisotropic(vec![cx, cy], vec![r, 1.2 * r], amp);
        let rr = rearrange_with(&a, &u, &Integrator::default(), 64).unwrap();
        let vals = &rr.profile.values;
        prop_assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(close(vals[0], u.value(&[cx, cy]), 1e-3), "{} vs {amp}", vals[0]);
        prop_assert!(*vals.last().unwrap() <= 1e-12);
    }
}
