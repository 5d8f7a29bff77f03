#![allow(dead_code)]

use std::collections::BTreeSet;

use fiberwise::exactnum::Rational;
use fiberwise::functions::sampling::{random_function, random_model, SampleParams};
use fiberwise::functions::{FiberFn, RepresentableFunction};
use fiberwise::spaces::{FiberKind, FiberedSpaceModel, TopologyMode, XPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_models() -> Vec<FiberedSpaceModel> {
    vec![FiberedSpaceModel::lex_square(), FiberedSpaceModel::double_arrow(), FiberedSpaceModel::double_circle()]
}

/// One of the standard models, or now and then a random custom one.
pub fn any_model<R: Rng>(rng: &mut R) -> FiberedSpaceModel {
    match rng.gen_range(0..5) {
        0 => FiberedSpaceModel::lex_square(),
        1 => FiberedSpaceModel::double_arrow(),
        2 => FiberedSpaceModel::double_circle(),
        3 => random_model(rng, TopologyMode::Order, &SampleParams::default()),
        _ => random_model(rng, TopologyMode::DoubleCircle, &SampleParams::default()),
    }
}

pub fn function<R: Rng>(rng: &mut R, model: &FiberedSpaceModel) -> RepresentableFunction {
    random_function(rng, model, &SampleParams::default())
}

pub fn set(xs: &[Rational]) -> BTreeSet<Rational> {
    xs.iter().cloned().collect()
}

fn plain_point(model: &FiberedSpaceModel, x: &Rational) -> XPoint {
    if model.mode() == TopologyMode::Product {
        return XPoint::coord(x.clone(), Rational::zero());
    }
    match model.fiber_at(x) {
        FiberKind::Singleton => XPoint::base_only(x.clone()),
        FiberKind::FiniteChain(_) => XPoint::index(x.clone(), 0),
        FiberKind::Interval => XPoint::coord(x.clone(), Rational::zero()),
    }
}

/// Points of the fiber at `y` on which `h` attains every extreme value.
pub fn fiber_candidates(h: &RepresentableFunction, y: &Rational) -> Vec<XPoint> {
    let model = h.space();
    let y = model.normalize_base(y);
    if model.mode() == TopologyMode::Product {
        return vec![XPoint::coord(y.clone(), Rational::zero()), XPoint::coord(y, Rational::one())];
    }
    match h.fibers().get(&y) {
        Some(FiberFn::Pl(f)) => f.breakpoints().iter().map(|b| XPoint::coord(y.clone(), b.x.clone())).collect(),
        Some(FiberFn::Values(vs)) => match model.fiber_at(&y) {
            FiberKind::Singleton => vec![XPoint::base_only(y)],
            _ => (0..vs.len() as u32).map(|i| XPoint::index(y.clone(), i)).collect(),
        },
        None => vec![plain_point(model, &y)],
    }
}

/// A finite set of points of `X` on which `|h|` attains its supremum.
pub fn candidates(h: &RepresentableFunction) -> Vec<XPoint> {
    let mut xs: BTreeSet<Rational> = h.base().breakpoints().iter().map(|b| b.x.clone()).collect();
    xs.extend(h.fibers().keys().cloned());
    xs.iter().flat_map(|x| fiber_candidates(h, x)).collect()
}

/// `‖h‖∞` by evaluation at candidate points.
pub fn sup_by_evaluation(h: &RepresentableFunction) -> Rational {
    candidates(h).iter().map(|p| h.eval(p).unwrap().abs()).max().unwrap()
}

/// Fiber oscillation by evaluation.
pub fn osc_by_evaluation(h: &RepresentableFunction, y: &Rational) -> Rational {
    let vals: Vec<Rational> = fiber_candidates(h, y).iter().map(|p| h.eval(p).unwrap()).collect();
    vals.iter().max().unwrap().clone() - vals.iter().min().unwrap().clone()
}

/// A random subset of `from`.
pub fn subset<R: Rng>(rng: &mut R, from: &BTreeSet<Rational>) -> BTreeSet<Rational> {
    from.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}
