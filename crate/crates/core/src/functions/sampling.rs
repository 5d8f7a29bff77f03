//! Seeded random generators for valid representable functions and points.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::{FiberFn, RepresentableFunction};
use crate::exactnum::{Breakpoint, PlFunction, Rational, Side};
use crate::spaces::{FiberCoord, FiberKind, FiberedSpaceModel, TopologyMode, XPoint};

/// Size knobs for the generators.
#[derive(Clone, Copy, Debug)]
pub struct SampleParams {
    pub max_denominator: i64,
    pub max_support: usize,
    pub max_extra_nodes: usize,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams { max_denominator: 64, max_support: 8, max_extra_nodes: 3 }
    }
}

/// A rational in `[lo, hi]` with denominator at most `max_den`.
pub fn rational_in<R: Rng>(rng: &mut R, lo: i64, hi: i64, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    Rational::new(rng.gen_range(lo * d..=hi * d), d)
}

/// A rational in the open interval `(0, 1)`.
pub fn interior_point<R: Rng>(rng: &mut R, max_den: i64) -> Rational {
    let d = rng.gen_range(2..=max_den.max(2));
    Rational::new(rng.gen_range(1..d), d)
}

/// A base point in `[0, 1]`; the ends come up now and then.
pub fn base_point<R: Rng>(rng: &mut R, max_den: i64) -> Rational {
    match rng.gen_range(0..16) {
        0 => Rational::zero(),
        1 => Rational::one(),
        _ => interior_point(rng, max_den),
    }
}

/// A point of the fiber of kind `kind`.
pub fn fiber_coord<R: Rng>(rng: &mut R, kind: FiberKind, max_den: i64) -> FiberCoord {
    match kind {
        FiberKind::Singleton => FiberCoord::Singleton,
        FiberKind::FiniteChain(k) => FiberCoord::Index(rng.gen_range(0..k)),
        FiberKind::Interval => FiberCoord::Coord(match rng.gen_range(0..6) {
            0 => Rational::zero(),
            1 => Rational::one(),
            _ => interior_point(rng, max_den),
        }),
    }
}

/// A point of `X`, biased towards the given base points.
pub fn point<R: Rng>(rng: &mut R, model: &FiberedSpaceModel, near: &[Rational], max_den: i64) -> XPoint {
    let base = if !near.is_empty() && rng.gen_bool(0.5) {
        near[rng.gen_range(0..near.len())].clone()
    } else {
        base_point(rng, max_den)
    };
    let base = model.normalize_base(&base);
    let kind = model.fiber_at(&base);
    let fiber = if model.mode() == TopologyMode::Product {
        fiber_coord(rng, FiberKind::Interval, max_den)
    } else {
        fiber_coord(rng, kind, max_den)
    };
    XPoint { base, fiber }
}

fn distinct_points<R: Rng>(rng: &mut R, n: usize, p: &SampleParams, allow_ends: bool) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for _ in 0..n {
        out.insert(if allow_ends { base_point(rng, p.max_denominator) } else { interior_point(rng, p.max_denominator) });
    }
    out
}

fn value<R: Rng>(rng: &mut R, p: &SampleParams) -> Rational {
    rational_in(rng, -1, 1, p.max_denominator)
}

fn continuous_base<R: Rng>(rng: &mut R, p: &SampleParams, wrap: bool) -> PlFunction {
    let n = rng.gen_range(0..=p.max_extra_nodes + 1);
    let mut xs = distinct_points(rng, n, p, false);
    xs.insert(Rational::zero());
    xs.insert(Rational::one());
    let mut nodes: Vec<(Rational, Rational)> = xs.into_iter().map(|x| (x, value(rng, p))).collect();
    if wrap {
        let first = nodes[0].1.clone();
        nodes.last_mut().expect("two nodes").1 = first;
    }
    PlFunction::from_nodes(&nodes).expect("sorted nodes")
}

/// A random function satisfying every continuity constraint of `model`.
pub fn random_function<R: Rng>(rng: &mut R, model: &FiberedSpaceModel, p: &SampleParams) -> RepresentableFunction {
    match model.mode() {
        TopologyMode::Product => {
            let base = continuous_base(rng, p, false);
            let slope = if rng.gen_bool(0.2) { Rational::zero() } else { value(rng, p) };
            RepresentableFunction::product(base, slope)
        }
        TopologyMode::DoubleCircle => {
            let base = continuous_base(rng, p, true);
            let n = rng.gen_range(0..=p.max_support);
            let fibers: BTreeMap<Rational, FiberFn> = distinct_points(rng, n, p, true)
                .into_iter()
                .map(|a| model.normalize_base(&a))
                .filter(|a| model.fiber_at(a) == FiberKind::FiniteChain(2))
                .map(|a| {
                    let lower = base.eval_unchecked(&a, Side::At);
                    let upper = value(rng, p);
                    (a, FiberFn::Values(vec![lower, upper]))
                })
                .collect();
            RepresentableFunction::with_parts(model.clone(), base, fibers, Rational::zero())
        }
        TopologyMode::Order => random_order_function(rng, model, p),
    }
}

fn random_order_function<R: Rng>(rng: &mut R, model: &FiberedSpaceModel, p: &SampleParams) -> RepresentableFunction {
    let n = rng.gen_range(0..=p.max_support);
    let active: BTreeSet<Rational> = distinct_points(rng, n, p, true)
        .into_iter()
        .filter(|a| !(a.is_zero() || *a == Rational::one()) || model.fiber_at(a) != FiberKind::Singleton)
        .collect();
    let extra = rng.gen_range(0..=p.max_extra_nodes);
    let mut xs = distinct_points(rng, extra, p, false);
    xs.extend(active.iter().cloned());
    xs.insert(Rational::zero());
    xs.insert(Rational::one());
    let mut bps = Vec::new();
    for x in xs {
        if active.contains(&x) {
            let left = value(rng, p);
            let right = if model.fiber_at(&x) == FiberKind::Singleton { left.clone() } else { value(rng, p) };
            bps.push(Breakpoint::jump(x, left, value(rng, p), right));
        } else {
            bps.push(Breakpoint::continuous(x, value(rng, p)));
        }
    }
    let base = PlFunction::new(bps).expect("sorted breakpoints");
    let mut fibers = BTreeMap::new();
    for a in active {
        let lo = if a.is_zero() { value(rng, p) } else { base.eval_unchecked(&a, Side::Left) };
        let hi = if a == Rational::one() { value(rng, p) } else { base.eval_unchecked(&a, Side::Right) };
        let f = match model.fiber_at(&a) {
            FiberKind::Singleton => FiberFn::Values(vec![lo]),
            FiberKind::FiniteChain(k) => {
                let mut vs = vec![lo];
                vs.extend((2..k).map(|_| value(rng, p)));
                vs.push(hi);
                FiberFn::Values(vs)
            }
            FiberKind::Interval => {
                let m = rng.gen_range(0..=p.max_extra_nodes);
                let mut ts = distinct_points(rng, m, p, false);
                ts.insert(Rational::zero());
                ts.insert(Rational::one());
                let nodes: Vec<(Rational, Rational)> = ts
                    .into_iter()
                    .map(|t| {
                        let v = if t.is_zero() {
                            lo.clone()
                        } else if t == Rational::one() {
                            hi.clone()
                        } else {
                            value(rng, p)
                        };
                        (t, v)
                    })
                    .collect();
                FiberFn::Pl(PlFunction::from_nodes(&nodes).expect("sorted nodes"))
            }
        };
        fibers.insert(a, f);
    }
    RepresentableFunction::with_parts(model.clone(), base, fibers, Rational::zero())
}

/// A random custom model of the given mode.
pub fn random_model<R: Rng>(rng: &mut R, mode: TopologyMode, p: &SampleParams) -> FiberedSpaceModel {
    match mode {
        TopologyMode::Product => FiberedSpaceModel::product_square(),
        TopologyMode::DoubleCircle => {
            let default = if rng.gen_bool(0.5) { FiberKind::FiniteChain(2) } else { FiberKind::Singleton };
            let n = rng.gen_range(0..=p.max_support);
            let explicit: Vec<(Rational, FiberKind)> = distinct_points(rng, n, p, true)
                .into_iter()
                .map(|a| (a, if default == FiberKind::Singleton { FiberKind::FiniteChain(2) } else { FiberKind::Singleton }))
                .collect();
            FiberedSpaceModel::custom(mode, default, explicit).expect("valid custom model")
        }
        TopologyMode::Order => {
            let kinds = [FiberKind::Singleton, FiberKind::FiniteChain(2), FiberKind::FiniteChain(3), FiberKind::Interval];
            let default = kinds[rng.gen_range(0..kinds.len())];
            let n = rng.gen_range(0..=p.max_support);
            let explicit: Vec<(Rational, FiberKind)> = distinct_points(rng, n, p, true)
                .into_iter()
                .map(|a| (a, kinds[rng.gen_range(0..kinds.len())]))
                .collect();
            FiberedSpaceModel::custom(mode, default, explicit).expect("valid custom model")
        }
    }
}
