//! Continuous functions on a [`FiberedSpaceModel`] that are exactly computable:
//! a piecewise-linear base function plus a finite table of fiber corrections.

pub mod sampling;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exactnum::{EndpointsMode, PlFunction, RangeAcc, Rational, Side};
use crate::spaces::{FiberCoord, FiberKind, FiberedSpaceModel, TopologyMode, XPoint};

/// The function restricted to one active fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiberFn {
    /// On an interval fiber, as a function of the fiber coordinate.
    Pl(PlFunction),
    /// On a chain (or singleton) fiber, one value per point in order.
    Values(Vec<Rational>),
}

impl FiberFn {
    pub fn range(&self) -> (Rational, Rational) {
        match self {
            FiberFn::Pl(f) => f.full_range(),
            FiberFn::Values(vs) => {
                let mut acc = RangeAcc::default();
                vs.iter().cloned().for_each(|v| acc.push(v));
                acc.get().unwrap_or((Rational::zero(), Rational::zero()))
            }
        }
    }

    pub fn diameter(&self) -> Rational {
        let (lo, hi) = self.range();
        hi - lo
    }

    /// Value at the fiber minimum and maximum.
    fn ends(&self) -> Option<(Rational, Rational)> {
        match self {
            FiberFn::Pl(f) => Some((f.eval_unchecked(&Rational::zero(), Side::At), f.eval_unchecked(&Rational::one(), Side::At))),
            FiberFn::Values(vs) => Some((vs.first()?.clone(), vs.last()?.clone())),
        }
    }

    fn constant(kind: FiberKind, v: Rational) -> FiberFn {
        match kind {
            FiberKind::Interval => FiberFn::Pl(PlFunction::constant(v)),
            FiberKind::FiniteChain(k) => FiberFn::Values(vec![v; k as usize]),
            FiberKind::Singleton => FiberFn::Values(vec![v]),
        }
    }

    fn combine(coeffs: &[Rational], parts: &[FiberFn]) -> Result<FiberFn> {
        match &parts[0] {
            FiberFn::Pl(_) => {
                let pls = parts
                    .iter()
                    .map(|p| match p {
                        FiberFn::Pl(f) => Ok(f),
                        FiberFn::Values(_) => domain("mixed fiber representations"),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FiberFn::Pl(PlFunction::linear_combine(coeffs, &pls)?))
            }
            FiberFn::Values(first) => {
                let mut out = vec![Rational::zero(); first.len()];
                for (c, p) in coeffs.iter().zip(parts) {
                    match p {
                        FiberFn::Values(vs) if vs.len() == out.len() => {
                            for (o, v) in out.iter_mut().zip(vs) {
                                *o += &(c * v);
                            }
                        }
                        _ => return domain("mismatched fiber value tables"),
                    }
                }
                Ok(FiberFn::Values(out))
            }
        }
    }
}

/// A failed continuity constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<Rational>,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.at {
            Some(a) => write!(f, "at {a}: {}", self.constraint),
            None => write!(f, "{}", self.constraint),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub struct RepresentableFunction {
    space: FiberedSpaceModel,
    base: PlFunction,
    fibers: BTreeMap<Rational, FiberFn>,
    /// Coefficient of the fiber coordinate; product mode only.
    slope: Rational,
}

impl RepresentableFunction {
    pub fn new(
        space: FiberedSpaceModel,
        base: PlFunction,
        fibers: impl IntoIterator<Item = (Rational, FiberFn)>,
        slope: Rational,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (at, fiber) in fibers {
            space.check_base(&at)?;
            let at = space.normalize_base(&at);
            if table.insert(at.clone(), fiber).is_some() {
                return domain(format!("duplicate fiber entry at {at}"));
            }
        }
        Ok(RepresentableFunction { space, base, fibers: table, slope })
    }

    /// `base ∘ f`, with no fiber corrections.
    pub fn from_base(space: FiberedSpaceModel, base: PlFunction) -> Self {
        RepresentableFunction { space, base, fibers: BTreeMap::new(), slope: Rational::zero() }
    }

    pub fn constant(space: FiberedSpaceModel, c: Rational) -> Self {
        Self::from_base(space, PlFunction::constant(c))
    }

    /// `(x, t) ↦ base(x) + slope·t` on the product square.
    pub fn product(base: PlFunction, slope: Rational) -> Self {
        RepresentableFunction {
            space: FiberedSpaceModel::product_square(),
            base,
            fibers: BTreeMap::new(),
            slope,
        }
    }

    pub fn space(&self) -> &FiberedSpaceModel {
        &self.space
    }

    pub fn base(&self) -> &PlFunction {
        &self.base
    }

    pub fn fibers(&self) -> &BTreeMap<Rational, FiberFn> {
        &self.fibers
    }

    pub fn slope(&self) -> &Rational {
        &self.slope
    }

    pub fn active_set(&self) -> impl Iterator<Item = &Rational> {
        self.fibers.keys()
    }

    pub fn is_active(&self, y: &Rational) -> bool {
        self.fibers.contains_key(&self.space.normalize_base(y))
    }

    /// Same data on another model; used when reinterpreting on a quotient.
    pub(crate) fn with_parts(
        space: FiberedSpaceModel,
        base: PlFunction,
        fibers: BTreeMap<Rational, FiberFn>,
        slope: Rational,
    ) -> Self {
        RepresentableFunction { space, base, fibers, slope }
    }

    /// Every continuity constraint of the topology mode, checked exactly.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |at: Option<&Rational>, c: String| out.push(Violation { at: at.cloned(), constraint: c });
        let mode = self.space.mode();
        if mode != TopologyMode::Product && !self.slope.is_zero() {
            push(None, "a fiber slope is only meaningful on the product square".into());
        }
        for bp in self.base.breakpoints() {
            let exempt = mode == TopologyMode::Order && self.fibers.contains_key(&bp.x);
            if !exempt && !bp.is_continuous() {
                push(Some(&bp.x), "base function jumps off the active set".into());
            }
        }
        match mode {
            TopologyMode::Product => {
                if !self.fibers.is_empty() {
                    push(None, "product-square functions carry no fiber table".into());
                }
            }
            TopologyMode::DoubleCircle => {
                let v0 = self.base.eval_unchecked(&Rational::zero(), Side::At);
                let v1 = self.base.eval_unchecked(&Rational::one(), Side::At);
                if v0 != v1 {
                    push(Some(&Rational::zero()), format!("base values at 0 and 1 differ ({v0} ≠ {v1})"));
                }
                for (a, fiber) in &self.fibers {
                    let kind = self.space.fiber_at(a);
                    if let Some(msg) = shape_mismatch(kind, fiber) {
                        push(Some(a), msg);
                        continue;
                    }
                    let lower = fiber.ends().expect("shape checked").0;
                    let b = self.base.eval_unchecked(a, Side::At);
                    if lower != b {
                        push(Some(a), format!("inner-circle value {lower} differs from base value {b}"));
                    }
                }
            }
            TopologyMode::Order => {
                for (a, fiber) in &self.fibers {
                    let kind = self.space.fiber_at(a);
                    if let Some(msg) = shape_mismatch(kind, fiber) {
                        push(Some(a), msg);
                        continue;
                    }
                    if let FiberFn::Pl(f) = fiber {
                        if f.jumps().next().is_some() {
                            push(Some(a), "fiber function is discontinuous".into());
                        }
                    }
                    let (lo_end, hi_end) = fiber.ends().expect("shape checked");
                    if !a.is_zero() {
                        let l = self.base.eval_unchecked(a, Side::Left);
                        if lo_end != l {
                            push(Some(a), format!("min-end mismatch {lo_end} ≠ left limit {l}"));
                        }
                    }
                    if *a != Rational::one() {
                        let r = self.base.eval_unchecked(a, Side::Right);
                        if hi_end != r {
                            push(Some(a), format!("max-end mismatch {hi_end} ≠ right limit {r}"));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidFunction(v.iter().map(ToString::to_string).collect()))
        }
    }

    /// `h(p)`. Assumes the function validates.
    pub fn eval(&self, p: &XPoint) -> Result<Rational> {
        self.space.check_point(p)?;
        let y = self.space.normalize_base(&p.base);
        if self.space.mode() == TopologyMode::Product {
            return Ok(self.base.eval_unchecked(&y, Side::At) + &self.slope * p.position());
        }
        match self.fibers.get(&y) {
            None => Ok(self.base.eval_unchecked(&y, Side::At)),
            Some(FiberFn::Pl(f)) => Ok(f.eval_unchecked(&p.position(), Side::At)),
            Some(FiberFn::Values(vs)) => {
                let i = match p.fiber {
                    FiberCoord::Index(i) => i as usize,
                    _ => 0,
                };
                vs.get(i)
                    .cloned()
                    .ok_or_else(|| Error::Domain(format!("fiber table at {y} has no entry {i}")))
            }
        }
    }

    /// The function on the fiber over `y`, materialized even when `y` is inactive.
    pub fn fiber_fn_at(&self, y: &Rational) -> FiberFn {
        let y = self.space.normalize_base(y);
        match self.fibers.get(&y) {
            Some(f) => f.clone(),
            None => {
                let v = self.base.eval_unchecked(&y, Side::At);
                let kind = self.space.fiber_at(&y);
                if self.space.mode() == TopologyMode::Product {
                    FiberFn::Pl(PlFunction::affine(self.slope.clone(), v))
                } else {
                    FiberFn::constant(kind, v)
                }
            }
        }
    }

    /// `(inf, sup)` of `h` over the fiber `f⁻¹(y)`.
    pub fn fiber_range(&self, y: &Rational) -> Result<(Rational, Rational)> {
        self.space.check_base(y)?;
        Ok(self.fiber_fn_at(y).range())
    }

    /// `(inf, sup)` of `h` over `f⁻¹([l, r])`.
    pub fn range_over(&self, l: &Rational, r: &Rational) -> Result<(Rational, Rational)> {
        self.space.check_base(l)?;
        self.space.check_base(r)?;
        if l > r {
            return domain(format!("empty interval [{l}, {r}]"));
        }
        if self.space.mode() == TopologyMode::Product {
            let (lo, hi) = self.base.range(l, r, EndpointsMode::ValuesOnly)?;
            let zero = Rational::zero();
            let lo = lo + std::cmp::min(&zero, &self.slope);
            let hi = hi + std::cmp::max(&zero, &self.slope);
            return Ok((lo, hi));
        }
        let order = self.space.mode() == TopologyMode::Order;
        let mut acc = RangeAcc::default();
        let mut xs: Vec<&Rational> = vec![l, r];
        xs.extend(self.base.breakpoints().iter().map(|b| &b.x).filter(|x| *x > l && *x < r));
        for x in xs {
            let active = self.fibers.contains_key(&self.space.normalize_base(x));
            if !(order && active) {
                acc.push(self.base.eval_unchecked(x, Side::At));
            }
            if x > l {
                acc.push(self.base.eval_unchecked(x, Side::Left));
            }
            if x < r {
                acc.push(self.base.eval_unchecked(x, Side::Right));
            }
        }
        for (a, fiber) in &self.fibers {
            let inside = a >= l && a <= r || (self.space.wraps() && a.is_zero() && *r == Rational::one());
            if inside {
                acc.push_range(fiber.range());
            }
        }
        Ok(acc.finish())
    }

    /// `(inf, sup)` over all of `X`.
    pub fn range(&self) -> (Rational, Rational) {
        self.range_over(&Rational::zero(), &Rational::one())
            .expect("unit interval is valid")
    }

    /// `‖h‖∞`, exact.
    pub fn sup_norm(&self) -> Rational {
        let (lo, hi) = self.range();
        std::cmp::max(lo.abs(), hi.abs())
    }

    /// `Σ coeffs[i]·fs[i]` on a common model; the active set is the union.
    pub fn linear_combine(coeffs: &[Rational], fs: &[&RepresentableFunction]) -> Result<RepresentableFunction> {
        if coeffs.len() != fs.len() || fs.is_empty() {
            return domain("need one coefficient per function and at least one function");
        }
        let space = fs[0].space.clone();
        if fs.iter().any(|f| f.space != space) {
            return domain("functions live on different spaces");
        }
        let bases: Vec<&PlFunction> = fs.iter().map(|f| &f.base).collect();
        let base = PlFunction::linear_combine(coeffs, &bases)?;
        let mut keys: Vec<&Rational> = fs.iter().flat_map(|f| f.fibers.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut fibers = BTreeMap::new();
        for a in keys {
            let parts: Vec<FiberFn> = fs.iter().map(|f| f.fiber_fn_at(a)).collect();
            fibers.insert(a.clone(), FiberFn::combine(coeffs, &parts)?);
        }
        let slope = coeffs.iter().zip(fs).map(|(c, f)| c * &f.slope).sum();
        Ok(RepresentableFunction { space, base, fibers, slope })
    }

    pub fn sub(&self, other: &RepresentableFunction) -> Result<RepresentableFunction> {
        Self::linear_combine(&[Rational::one(), -Rational::one()], &[self, other])
    }

    pub fn scale(&self, c: &Rational) -> RepresentableFunction {
        Self::linear_combine(std::slice::from_ref(c), &[self]).expect("single function")
    }

    /// `‖self − other‖∞`.
    pub fn distance(&self, other: &RepresentableFunction) -> Result<Rational> {
        Ok(self.sub(other)?.sup_norm())
    }
}

fn shape_mismatch(kind: FiberKind, fiber: &FiberFn) -> Option<String> {
    let ok = match (kind, fiber) {
        (FiberKind::Interval, FiberFn::Pl(_)) => true,
        (FiberKind::FiniteChain(k), FiberFn::Values(vs)) => vs.len() == k as usize,
        (FiberKind::Singleton, FiberFn::Values(vs)) => vs.len() == 1,
        _ => false,
    };
    (!ok).then(|| format!("fiber data does not match the {kind} fiber"))
}

#[derive(Serialize, Deserialize)]
struct FiberEntry {
    at: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pl: Option<PlFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct FunctionRepr {
    space: FiberedSpaceModel,
    base: PlFunction,
    #[serde(default)]
    fibers: Vec<FiberEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slope: Option<Rational>,
}

impl TryFrom<FunctionRepr> for RepresentableFunction {
    type Error = Error;

    fn try_from(r: FunctionRepr) -> Result<Self> {
        let fibers = r
            .fibers
            .into_iter()
            .map(|e| match (e.pl, e.values) {
                (Some(pl), None) => Ok((e.at, FiberFn::Pl(pl))),
                (None, Some(vs)) if !vs.is_empty() => Ok((e.at, FiberFn::Values(vs))),
                _ => Err(Error::Parse(format!("fiber entry at {} needs exactly one of pl/values", e.at))),
            })
            .collect::<Result<Vec<_>>>()?;
        RepresentableFunction::new(r.space, r.base, fibers, r.slope.unwrap_or_else(Rational::zero))
    }
}

impl From<RepresentableFunction> for FunctionRepr {
    fn from(h: RepresentableFunction) -> Self {
        let fibers = h
            .fibers
            .into_iter()
            .map(|(at, f)| match f {
                FiberFn::Pl(pl) => FiberEntry { at, pl: Some(pl), values: None },
                FiberFn::Values(vs) => FiberEntry { at, pl: None, values: Some(vs) },
            })
            .collect();
        FunctionRepr {
            space: h.space,
            base: h.base,
            fibers,
            slope: (!h.slope.is_zero()).then_some(h.slope),
        }
    }
}

/// The canonical specimens used throughout the tests and the CLI samples.
pub mod specimens {
    use super::*;
    use crate::exactnum::{q, Breakpoint};

    /// Lexicographic square: unit step at 1/2 with the identity on the fiber.
    pub fn unit_jump() -> RepresentableFunction {
        let base = PlFunction::new(vec![
            Breakpoint::continuous(q(0, 1), q(0, 1)),
            Breakpoint::jump(q(1, 2), q(0, 1), q(0, 1), q(1, 1)),
            Breakpoint::continuous(q(1, 1), q(1, 1)),
        ])
        .expect("valid");
        RepresentableFunction::new(
            FiberedSpaceModel::lex_square(),
            base,
            [(q(1, 2), FiberFn::Pl(PlFunction::identity()))],
            Rational::zero(),
        )
        .expect("valid")
    }

    /// Double arrow: `x` jumping up by 1/3 at 1/4.
    pub fn arrow_jump() -> RepresentableFunction {
        let base = PlFunction::new(vec![
            Breakpoint::continuous(q(0, 1), q(0, 1)),
            Breakpoint::jump(q(1, 4), q(1, 4), q(1, 4), q(7, 12)),
            Breakpoint::continuous(q(1, 1), q(4, 3)),
        ])
        .expect("valid");
        RepresentableFunction::new(
            FiberedSpaceModel::double_arrow(),
            base,
            [(q(1, 4), FiberFn::Values(vec![q(1, 4), q(7, 12)]))],
            Rational::zero(),
        )
        .expect("valid")
    }

    /// Lexicographic square: two active fibers with oscillation 1/2 at 1/3 and
    /// 1/4 at 2/3.
    pub fn two_fibers() -> RepresentableFunction {
        let base = PlFunction::new(vec![
            Breakpoint::continuous(q(0, 1), q(0, 1)),
            Breakpoint::jump(q(1, 3), q(0, 1), q(0, 1), q(1, 2)),
            Breakpoint::jump(q(2, 3), q(1, 2), q(1, 2), q(3, 4)),
            Breakpoint::continuous(q(1, 1), q(3, 4)),
        ])
        .expect("valid");
        let f13 = PlFunction::affine(q(1, 2), q(0, 1));
        let f23 = PlFunction::affine(q(1, 4), q(1, 2));
        RepresentableFunction::new(
            FiberedSpaceModel::lex_square(),
            base,
            [(q(1, 3), FiberFn::Pl(f13)), (q(2, 3), FiberFn::Pl(f23))],
            Rational::zero(),
        )
        .expect("valid")
    }

    /// Product square: the fiber coordinate `(x, t) ↦ t`.
    pub fn product_coordinate() -> RepresentableFunction {
        RepresentableFunction::product(PlFunction::zero(), Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::specimens::*;
    use super::*;
    use crate::exactnum::{q, Breakpoint};

    #[test]
    fn validate_examples() {
        assert!(unit_jump().validate().is_empty());
        let flipped = RepresentableFunction::new(
            FiberedSpaceModel::lex_square(),
            unit_jump().base().clone(),
            [(q(1, 2), FiberFn::Pl(PlFunction::affine(q(-1, 1), q(1, 1))))],
            Rational::zero(),
        )
        .unwrap();
        let v = flipped.validate();
        assert!(!v.is_empty());
        assert!(v.iter().all(|v| v.at == Some(q(1, 2))));
        assert!(v[0].constraint.contains("min-end mismatch 1/1"));
        let c = RepresentableFunction::constant(FiberedSpaceModel::lex_square(), q(3, 1));
        assert!(c.validate().is_empty());
        assert!(arrow_jump().is_valid() && two_fibers().is_valid() && product_coordinate().is_valid());
    }

    #[test]
    fn validate_flags_stray_jumps_and_shapes() {
        let m = FiberedSpaceModel::lex_square();
        let step = unit_jump().base().clone();
        let no_fiber = RepresentableFunction::from_base(m.clone(), step.clone());
        assert_eq!(no_fiber.validate()[0].at, Some(q(1, 2)));
        let wrong_shape =
            RepresentableFunction::new(m, step, [(q(1, 2), FiberFn::Values(vec![q(0, 1), q(1, 1)]))], Rational::zero())
                .unwrap();
        assert!(wrong_shape.validate()[0].constraint.contains("does not match"));
    }

    #[test]
    fn validate_double_circle() {
        let m = FiberedSpaceModel::double_circle();
        let wavy = PlFunction::from_nodes(&[(q(0, 1), q(0, 1)), (q(1, 2), q(1, 1)), (q(1, 1), q(0, 1))]).unwrap();
        let ok = RepresentableFunction::new(
            m.clone(),
            wavy.clone(),
            [(q(1, 2), FiberFn::Values(vec![q(1, 1), q(-1, 1)]))],
            Rational::zero(),
        )
        .unwrap();
        assert!(ok.is_valid());
        let bad_lower =
            RepresentableFunction::new(m.clone(), wavy, [(q(1, 2), FiberFn::Values(vec![q(0, 1), q(-1, 1)]))], Rational::zero())
                .unwrap();
        assert_eq!(bad_lower.validate().len(), 1);
        let no_wrap = RepresentableFunction::from_base(m, PlFunction::identity());
        assert_eq!(no_wrap.validate().len(), 1);
    }

    #[test]
    fn eval_examples() {
        let h1 = unit_jump();
        assert_eq!(h1.eval(&XPoint::coord(q(1, 2), q(1, 4))).unwrap(), q(1, 4));
        assert_eq!(h1.eval(&XPoint::coord(q(1, 4), q(5, 7))).unwrap(), q(0, 1));
        let h2 = arrow_jump();
        assert_eq!(h2.eval(&XPoint::index(q(1, 4), 1)).unwrap(), q(7, 12));
        assert_eq!(h2.eval(&XPoint::index(q(1, 4), 0)).unwrap(), q(1, 4));
        assert!(matches!(h1.eval(&XPoint::index(q(1, 4), 0)), Err(Error::Domain(_))));
        let g = product_coordinate();
        assert_eq!(g.eval(&XPoint::coord(q(1, 3), q(2, 5))).unwrap(), q(2, 5));
    }

    #[test]
    fn sup_norm_examples() {
        let h1 = unit_jump();
        assert_eq!(h1.sup_norm(), q(1, 1));
        assert_eq!(h1.scale(&q(0, 1)).sup_norm(), q(0, 1));
        let zero = RepresentableFunction::linear_combine(&[q(1, 1), q(-1, 1)], &[&h1, &h1]).unwrap();
        assert_eq!(zero.sup_norm(), q(0, 1));
        assert!(zero.is_valid());
        assert_eq!(arrow_jump().sup_norm(), q(4, 3));
        assert_eq!(two_fibers().sup_norm(), q(3, 4));
        let shifted = RepresentableFunction::product(PlFunction::constant(q(-2, 1)), q(1, 2));
        assert_eq!(shifted.sup_norm(), q(2, 1));
    }

    #[test]
    fn sup_norm_ignores_base_value_on_active_fiber() {
        // the base value at an active point of the order topology is never attained
        let base = PlFunction::new(vec![
            Breakpoint::continuous(q(0, 1), q(0, 1)),
            Breakpoint::jump(q(1, 2), q(0, 1), q(100, 1), q(1, 1)),
            Breakpoint::continuous(q(1, 1), q(1, 1)),
        ])
        .unwrap();
        let h = RepresentableFunction::new(
            FiberedSpaceModel::lex_square(),
            base,
            [(q(1, 2), FiberFn::Pl(PlFunction::identity()))],
            Rational::zero(),
        )
        .unwrap();
        assert!(h.is_valid());
        assert_eq!(h.sup_norm(), q(1, 1));
    }

    #[test]
    fn combine_rejects_mixed_spaces() {
        let a = unit_jump();
        let b = arrow_jump();
        assert!(matches!(
            RepresentableFunction::linear_combine(&[q(1, 1), q(1, 1)], &[&a, &b]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn combine_materializes_inactive_fibers() {
        let h1 = unit_jump();
        let h4 = two_fibers();
        let s = RepresentableFunction::linear_combine(&[q(1, 1), q(2, 1)], &[&h1, &h4]).unwrap();
        assert!(s.is_valid());
        assert_eq!(s.active_set().count(), 3);
        let p = XPoint::coord(q(1, 2), q(1, 3));
        assert_eq!(s.eval(&p).unwrap(), h1.eval(&p).unwrap() + q(2, 1) * h4.eval(&p).unwrap());
    }

    #[test]
    fn json_round_trip() {
        for h in [unit_jump(), arrow_jump(), two_fibers(), product_coordinate()] {
            let text = serde_json::to_string(&h).unwrap();
            let back: RepresentableFunction = serde_json::from_str(&text).unwrap();
            assert_eq!(back, h);
        }
        let bad = r#"{"space":{"model":"lex_square"},"base":{"breakpoints":[{"x":"0","left":"0","value":"0","right":"0"},{"x":"1","left":"0","value":"0","right":"0"}]},"fibers":[{"at":"1/2"}]}"#;
        assert!(serde_json::from_str::<RepresentableFunction>(bad).is_err());
    }
}
