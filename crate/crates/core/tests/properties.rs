mod common;

use std::collections::BTreeSet;

use common::*;
use fiberwise::approximation::{dist_bounds, flatten, nesting_check};
use fiberwise::check::all_passed;
use fiberwise::exactnum::{q, EndpointsMode, PlFunction, Rational, Side};
use fiberwise::functions::sampling::{interior_point, point, rational_in};
use fiberwise::functions::RepresentableFunction;
use fiberwise::lurlab::{day_norm_sq, lur_deficiency, triangle_holds, SparseVector};
use fiberwise::oscillation::{grid_diameter, level_set, osc_at, oscillate, LevelSet};
use fiberwise::quotients::{build_quotient, linearity_defect, transfer};
use fiberwise::spaces::separate_points;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=20).prop_map(|(n, d)| Rational::new(n, d))
}

fn random_pl<R: Rng>(rng: &mut R) -> PlFunction {
    let mut xs: BTreeSet<Rational> = (0..rng.gen_range(0..4)).map(|_| interior_point(rng, 32)).collect();
    xs.insert(Rational::zero());
    xs.insert(Rational::one());
    let bps = xs
        .into_iter()
        .map(|x| {
            let v = rational_in(rng, -2, 2, 16);
            if rng.gen_bool(0.3) {
                fiberwise::exactnum::Breakpoint::jump(x, rational_in(rng, -2, 2, 16), v, rational_in(rng, -2, 2, 16))
            } else {
                fiberwise::exactnum::Breakpoint::continuous(x, v)
            }
        })
        .collect();
    PlFunction::new(bps).unwrap()
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn rational_field_laws(a in small_rational(), b in small_rational(), c in small_rational()) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        let text = a.to_string();
        prop_assert_eq!(text.parse::<Rational>().unwrap(), a);
    }
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn pl_combination_is_pointwise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_pl(&mut r);
        let g = random_pl(&mut r);
        let (a, b) = (rational_in(&mut r, -3, 3, 8), rational_in(&mut r, -3, 3, 8));
        let h = PlFunction::linear_combine(&[a.clone(), b.clone()], &[&f, &g]).unwrap();
        for _ in 0..8 {
            let x = interior_point(&mut r, 64);
            for side in [Side::Left, Side::At, Side::Right] {
                let want = &a * f.eval(&x, side).unwrap() + &b * g.eval(&x, side).unwrap();
                prop_assert_eq!(h.eval(&x, side).unwrap(), want);
            }
        }
    }

    #[test]
    fn pl_range_contains_sampled_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_pl(&mut r);
        let mut ends = [interior_point(&mut r, 64), interior_point(&mut r, 64)];
        ends.sort();
        let [a, b] = ends;
        let (lo, hi) = f.range(&a, &b, EndpointsMode::ValuesOnly).unwrap();
        for _ in 0..16 {
            let t = Rational::new(r.gen_range(0..=64), 64);
            let x = &a + &(&b - &a) * &t;
            let v = f.eval(&x, Side::At).unwrap();
            prop_assert!(v >= lo && v <= hi);
        }
        let (llo, lhi) = f.range(&a, &b, EndpointsMode::IncludeLimits).unwrap();
        prop_assert!(llo <= lo && lhi >= hi);
    }

    #[test]
    fn bridge_interpolates(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut ends = [interior_point(&mut r, 64), interior_point(&mut r, 64)];
        ends.sort();
        prop_assume!(ends[0] < ends[1]);
        let (va, vb) = (rational_in(&mut r, -2, 2, 16), rational_in(&mut r, -2, 2, 16));
        let f = PlFunction::bridge(&ends[0], &ends[1], &va, &vb).unwrap();
        prop_assert_eq!(f.value(&ends[0]).unwrap(), va.clone());
        prop_assert_eq!(f.value(&ends[1]).unwrap(), vb.clone());
        prop_assert_eq!(f.value(&Rational::zero()).unwrap(), va);
        prop_assert_eq!(f.value(&Rational::one()).unwrap(), vb);
    }

    #[test]
    fn sup_norm_matches_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let h = function(&mut r, &m);
        prop_assert!(h.is_valid());
        prop_assert_eq!(h.sup_norm(), sup_by_evaluation(&h));
        for _ in 0..8 {
            let p = point(&mut r, &m, &h.fibers().keys().cloned().collect::<Vec<_>>(), 64);
            prop_assert!(h.eval(&p).unwrap().abs() <= h.sup_norm());
        }
    }

    #[test]
    fn combination_is_pointwise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let (h1, h2) = (function(&mut r, &m), function(&mut r, &m));
        let (a, b) = (rational_in(&mut r, -3, 3, 8), rational_in(&mut r, -3, 3, 8));
        let s = RepresentableFunction::linear_combine(&[a.clone(), b.clone()], &[&h1, &h2]).unwrap();
        prop_assert!(s.is_valid(), "{:?}", s.validate());
        let near: Vec<Rational> = h1.fibers().keys().chain(h2.fibers().keys()).cloned().collect();
        for _ in 0..12 {
            let p = point(&mut r, &m, &near, 64);
            prop_assert_eq!(s.eval(&p).unwrap(), &a * h1.eval(&p).unwrap() + &b * h2.eval(&p).unwrap());
        }
    }

    #[test]
    fn function_json_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let h = function(&mut r, &m);
        let back: RepresentableFunction = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        prop_assert_eq!(back, h);
        let back_m: fiberwise::spaces::FiberedSpaceModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back_m, m);
    }

    #[test]
    fn oscillation_matches_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let h = function(&mut r, &m);
        let profile = oscillate(&h).unwrap();
        for a in h.fibers().keys() {
            prop_assert_eq!(profile.at(a), osc_by_evaluation(&h, a));
        }
        prop_assert!(profile.sup() <= Rational::integer(2) * h.sup_norm());
    }

    #[test]
    fn oscillation_is_a_seminorm(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let (h1, h2) = (function(&mut r, &m), function(&mut r, &m));
        let lambda = rational_in(&mut r, -4, 4, 16);
        let sum = RepresentableFunction::linear_combine(&[q(1, 1), q(1, 1)], &[&h1, &h2]).unwrap();
        let scaled = h1.scale(&lambda);
        let ys: BTreeSet<Rational> = h1.fibers().keys().chain(h2.fibers().keys()).cloned().collect();
        for y in ys {
            let (o1, o2) = (osc_at(&h1, &y).unwrap(), osc_at(&h2, &y).unwrap());
            prop_assert!(osc_at(&sum, &y).unwrap() <= &o1 + &o2);
            prop_assert_eq!(osc_at(&scaled, &y).unwrap(), lambda.abs() * o1);
        }
    }

    #[test]
    fn level_sets_shrink_as_threshold_grows(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let h = function(&mut r, &m);
        let e1 = Rational::new(1, r.gen_range(1..=16));
        let e2 = &e1 * Rational::new(r.gen_range(1..=4), 4);
        let (LevelSet::Points(big), LevelSet::Points(small)) = (level_set(&h, &e2).unwrap(), level_set(&h, &e1).unwrap()) else {
            return Err(TestCaseError::fail("finite models have finite level sets"));
        };
        prop_assert!(small.is_subset(&big));
        prop_assert!(big.len() <= h.fibers().len());
    }

    #[test]
    fn grid_diameter_grows_to_oscillation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = function(&mut r, &fiberwise::spaces::FiberedSpaceModel::lex_square());
        for y in h.fibers().keys() {
            let mut prev = Rational::zero();
            for k in [1i64, 2, 4, 8, 16, 64] {
                let grid: Vec<Rational> = (0..=k).map(|i| Rational::new(i, k)).collect();
                let d = grid_diameter(&h, y, &grid).unwrap();
                prop_assert!(d >= prev && d <= osc_at(&h, y).unwrap());
                prev = d;
            }
            let exact = osc_at(&h, y).unwrap();
            let all: Vec<Rational> = match h.fibers().get(y).unwrap() {
                fiberwise::functions::FiberFn::Pl(f) => f.breakpoints().iter().map(|b| b.x.clone()).collect(),
                _ => unreachable!(),
            };
            prop_assert_eq!(grid_diameter(&h, y, &all).unwrap(), exact);
        }
    }
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn quotient_maps_compose(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let a: BTreeSet<Rational> = (0..r.gen_range(0..5)).map(|_| interior_point(&mut r, 16)).collect();
        let k = subset(&mut r, &a);
        let ya = build_quotient(&m, &a).unwrap();
        let yak = ya.further(&k).unwrap();
        let near: Vec<Rational> = a.iter().cloned().collect();
        for _ in 0..10 {
            let p = point(&mut r, &m, &near, 16);
            let z = ya.collapse(&p).unwrap();
            prop_assert_eq!(ya.project(&z).unwrap(), m.normalize_base(&p.base));
            let w = yak.collapse(&z).unwrap();
            prop_assert_eq!(yak.project(&w).unwrap(), ya.project(&z).unwrap());
        }
    }

    #[test]
    fn quotients_are_hausdorff(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let a: BTreeSet<Rational> = (0..r.gen_range(0..4)).map(|_| interior_point(&mut r, 16)).collect();
        let ya = build_quotient(&m, &a).unwrap();
        let near: Vec<Rational> = a.iter().cloned().collect();
        for _ in 0..6 {
            let z1 = ya.collapse(&point(&mut r, &m, &near, 16)).unwrap();
            let z2 = ya.collapse(&point(&mut r, &m, &near, 16)).unwrap();
            let (n1, n2) = (ya.model().normalize_point(&z1), ya.model().normalize_point(&z2));
            if n1 == n2 {
                continue;
            }
            let (u, v) = separate_points(ya.model(), &z1, &z2).unwrap();
            prop_assert!(!u.intersects(&v, ya.model()));
        }
    }

    #[test]
    fn quotient_metric_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let a: BTreeSet<Rational> = (0..r.gen_range(0..4)).map(|_| interior_point(&mut r, 16)).collect();
        let ya = build_quotient(&m, &a).unwrap();
        let near: Vec<Rational> = a.iter().cloned().collect();
        let zs: Vec<_> = (0..4).map(|_| ya.collapse(&point(&mut r, &m, &near, 16)).unwrap()).collect();
        for x in &zs {
            for y in &zs {
                let d = ya.metric(x, y).unwrap();
                prop_assert_eq!(d.is_zero(), ya.model().normalize_point(x) == ya.model().normalize_point(y));
                prop_assert_eq!(d.clone(), ya.metric(y, x).unwrap());
                for z in &zs {
                    prop_assert!(d <= ya.metric(x, z).unwrap() + ya.metric(z, y).unwrap());
                }
            }
        }
    }

    #[test]
    fn transfer_is_a_linear_isometry(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let (h1, h2) = (function(&mut r, &m), function(&mut r, &m));
        let mut a: BTreeSet<Rational> = oscillate(&h1).unwrap().support().unwrap();
        a.extend(oscillate(&h2).unwrap().support().unwrap());
        a.extend((0..r.gen_range(0..3)).map(|_| interior_point(&mut r, 16)));
        let t = transfer(&h1, &a).unwrap();
        prop_assert_eq!(t.function.sup_norm(), h1.sup_norm());
        for y in &a {
            prop_assert_eq!(t.function.fiber_range(y).unwrap(), h1.fiber_range(y).unwrap());
        }
        let coeffs = [rational_in(&mut r, -2, 2, 8), rational_in(&mut r, -2, 2, 8)];
        prop_assert!(linearity_defect(&coeffs, &[&h1, &h2], &a).unwrap().is_zero());
    }

    #[test]
    fn flatten_postconditions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let h = function(&mut r, &m);
        let supp = oscillate(&h).unwrap().support().unwrap();
        let mut keep = subset(&mut r, &supp);
        if r.gen_bool(0.3) {
            keep.insert(interior_point(&mut r, 16));
        }
        let c = [q(3, 2), q(2, 1), q(9, 8)][r.gen_range(0..3)].clone();
        let plan = flatten(&h, &keep, &c).unwrap();
        prop_assert!(all_passed(&plan.checks), "{:?}", plan.checks);
        // independent lower bound: an oscillation of size s forces error s/2
        prop_assert!(Rational::integer(2) * &plan.achieved_error >= plan.s);
        prop_assert_eq!(plan.achieved_error.clone(), plan.p.distance(&h).unwrap());
        for p in candidates(&h) {
            let gap = (plan.p.eval(&p).unwrap() - h.eval(&p).unwrap()).abs();
            prop_assert!(gap <= plan.achieved_error);
        }
        let again = flatten(&plan.p, &keep, &c).unwrap();
        prop_assert_eq!(again.p, plan.p);
        prop_assert!(again.achieved_error.is_zero());
    }

    #[test]
    fn distance_sandwich(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let h = function(&mut r, &m);
        let supp = oscillate(&h).unwrap().support().unwrap();
        let keep = subset(&mut r, &supp);
        let d = dist_bounds(&h, &keep).unwrap();
        prop_assert!(all_passed(&d.checks), "{:?}", d.checks);
        prop_assert!(d.lower <= d.upper);
        for w in d.schedule.windows(2) {
            prop_assert!(w[1][0] < w[0][0]);
        }
    }

    #[test]
    fn nesting_holds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = any_model(&mut r);
        let hs: Vec<RepresentableFunction> = (0..4).map(|_| function(&mut r, &m)).collect();
        let a = oscillate(&hs[0]).unwrap().support().unwrap();
        let mut b = a.clone();
        b.extend((0..2).map(|_| interior_point(&mut r, 16)));
        prop_assert!(nesting_check(&a, &b, &hs).unwrap());
    }
}

fn random_vector<R: Rng>(r: &mut R, max_len: usize) -> SparseVector {
    let n = r.gen_range(0..=max_len);
    SparseVector::from_entries((0..n).map(|i| (format!("g{}", r.gen_range(0..8) * 10 + i), rational_in(r, -3, 3, 12))))
}

/// Day's norm as the supremum over every ordering of the support.
fn day_norm_brute(x: &SparseVector) -> Rational {
    fn perms(items: &mut Vec<Rational>, k: usize, best: &mut Rational) {
        if k == items.len() {
            let v: Rational = items.iter().enumerate().map(|(i, a)| Rational::new(1, 4).powi(i as u32 + 1) * a.powi(2)).sum();
            if v > *best {
                *best = v;
            }
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            perms(items, k + 1, best);
            items.swap(k, i);
        }
    }
    let mut items: Vec<Rational> = x.entries().values().cloned().collect();
    let mut best = Rational::zero();
    perms(&mut items, 0, &mut best);
    best
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn day_norm_is_greedy_optimal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_vector(&mut r, 6);
        prop_assert_eq!(day_norm_sq(&x), day_norm_brute(&x));
    }

    #[test]
    fn day_norm_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_vector(&mut r, 6), random_vector(&mut r, 6));
        let lambda = rational_in(&mut r, -3, 3, 8);
        prop_assert_eq!(day_norm_sq(&x.scale(&lambda)), lambda.powi(2) * day_norm_sq(&x));
        let s = x.sup_norm().powi(2);
        prop_assert!(Rational::new(1, 4) * &s <= day_norm_sq(&x));
        prop_assert!(day_norm_sq(&x) <= Rational::new(1, 3) * &s);
        prop_assert!(triangle_holds(&x, &y));
        prop_assert!(!lur_deficiency(&x, &y).is_negative());
        let relabeled = SparseVector::from_entries(x.entries().iter().map(|(k, v)| (format!("z{k}"), v.clone())));
        prop_assert_eq!(day_norm_sq(&relabeled), day_norm_sq(&x));
    }
}
