//! Piecewise-linear functions on `[0, 1]` with one-sided limits at breakpoints.
//!
//! Between two consecutive breakpoints the function is affine, running from the
//! right limit of the first to the left limit of the second. A breakpoint whose
//! three numbers agree is a point of continuity; otherwise it is a jump.

use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{domain, Error, Result};

/// Which one-sided limit (or the value itself) to read at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    At,
    Right,
}

/// Whether `range` also counts limits approached from outside the interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointsMode {
    IncludeLimits,
    ValuesOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub x: Rational,
    pub left: Rational,
    pub value: Rational,
    pub right: Rational,
}

impl Breakpoint {
    pub fn continuous(x: Rational, y: Rational) -> Self {
        Breakpoint { x, left: y.clone(), value: y.clone(), right: y }
    }

    pub fn jump(x: Rational, left: Rational, value: Rational, right: Rational) -> Self {
        Breakpoint { x, left, value, right }
    }

    pub fn is_continuous(&self) -> bool {
        self.left == self.value && self.value == self.right
    }
}

#[derive(Deserialize)]
struct PlRepr {
    breakpoints: Vec<Breakpoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlRepr")]
pub struct PlFunction {
    breakpoints: Vec<Breakpoint>,
}

impl TryFrom<PlRepr> for PlFunction {
    type Error = Error;

    fn try_from(repr: PlRepr) -> Result<Self> {
        PlFunction::new(repr.breakpoints)
    }
}

impl PlFunction {
    /// Breakpoints must be strictly increasing, start at 0 and end at 1.
    ///
    /// The left limit at 0 and the right limit at 1 are meaningless and are
    /// normalized to the value there.
    pub fn new(mut breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return domain("a PL function needs breakpoints at 0 and 1");
        }
        if !breakpoints[0].x.is_zero() || breakpoints.last().unwrap().x != Rational::one() {
            return domain("first breakpoint must be 0 and last must be 1");
        }
        if breakpoints.windows(2).any(|w| w[0].x >= w[1].x) {
            return domain("breakpoints must be strictly increasing");
        }
        let first = &mut breakpoints[0];
        first.left = first.value.clone();
        let last = breakpoints.last_mut().unwrap();
        last.right = last.value.clone();
        Ok(PlFunction { breakpoints })
    }

    /// Continuous interpolant through `(x, y)` nodes; nodes must include 0 and 1.
    pub fn from_nodes(nodes: &[(Rational, Rational)]) -> Result<Self> {
        PlFunction::new(
            nodes
                .iter()
                .map(|(x, y)| Breakpoint::continuous(x.clone(), y.clone()))
                .collect(),
        )
    }

    pub fn constant(c: Rational) -> Self {
        PlFunction {
            breakpoints: vec![
                Breakpoint::continuous(Rational::zero(), c.clone()),
                Breakpoint::continuous(Rational::one(), c),
            ],
        }
    }

    pub fn zero() -> Self {
        PlFunction::constant(Rational::zero())
    }

    /// `x ↦ slope·x + intercept`.
    pub fn affine(slope: Rational, intercept: Rational) -> Self {
        let at_one = &slope + &intercept;
        PlFunction {
            breakpoints: vec![
                Breakpoint::continuous(Rational::zero(), intercept),
                Breakpoint::continuous(Rational::one(), at_one),
            ],
        }
    }

    pub fn identity() -> Self {
        PlFunction::affine(Rational::one(), Rational::zero())
    }

    /// Affine interpolation from `(a, va)` to `(b, vb)`, held constant outside `[a, b]`.
    pub fn bridge(a: &Rational, b: &Rational, va: &Rational, vb: &Rational) -> Result<Self> {
        if a >= b {
            return domain(format!("bridge needs a < b, got [{a}, {b}]"));
        }
        if !a.in_unit_interval() || !b.in_unit_interval() {
            return domain(format!("bridge interval [{a}, {b}] outside [0,1]"));
        }
        let mut nodes = Vec::with_capacity(4);
        if !a.is_zero() {
            nodes.push((Rational::zero(), va.clone()));
        }
        nodes.push((a.clone(), va.clone()));
        nodes.push((b.clone(), vb.clone()));
        if *b != Rational::one() {
            nodes.push((Rational::one(), vb.clone()));
        }
        PlFunction::from_nodes(&nodes)
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// Points where the left limit, value and right limit disagree.
    pub fn jumps(&self) -> impl Iterator<Item = &Breakpoint> {
        self.breakpoints.iter().filter(|b| !b.is_continuous())
    }

    fn check_point(x: &Rational) -> Result<()> {
        if !x.in_unit_interval() {
            return domain(format!("point {x} outside [0,1]"));
        }
        Ok(())
    }

    /// Index of the breakpoint at `x`, or `Err(i)` with `x` inside segment `i`.
    fn locate(&self, x: &Rational) -> std::result::Result<usize, usize> {
        match self.breakpoints.binary_search_by(|b| b.x.cmp(x)) {
            Ok(i) => Ok(i),
            Err(i) => Err(i - 1),
        }
    }

    fn interpolate(&self, seg: usize, x: &Rational) -> Rational {
        let p = &self.breakpoints[seg];
        let r = &self.breakpoints[seg + 1];
        let t = (x - &p.x) / (&r.x - &p.x);
        &p.right + (&r.left - &p.right) * t
    }

    pub fn eval(&self, x: &Rational, side: Side) -> Result<Rational> {
        Self::check_point(x)?;
        if side == Side::Left && x.is_zero() {
            return domain("left limit at 0 is undefined");
        }
        if side == Side::Right && *x == Rational::one() {
            return domain("right limit at 1 is undefined");
        }
        Ok(self.eval_unchecked(x, side))
    }

    /// Value at `x ∈ [0,1]`; one-sided limits at domain ends fall back to the value.
    pub(crate) fn eval_unchecked(&self, x: &Rational, side: Side) -> Rational {
        match self.locate(x) {
            Ok(i) => {
                let b = &self.breakpoints[i];
                match side {
                    Side::Left => b.left.clone(),
                    Side::At => b.value.clone(),
                    Side::Right => b.right.clone(),
                }
            }
            Err(seg) => self.interpolate(seg, x),
        }
    }

    pub fn value(&self, x: &Rational) -> Result<Rational> {
        self.eval(x, Side::At)
    }

    /// Exact `(inf, sup)` over the closed interval `[a, b]`.
    ///
    /// Limits approached from inside the interval always count. With
    /// `IncludeLimits` the limits at `a` from the left and at `b` from the right
    /// count as well, which is the range over the closure of a slightly larger
    /// neighbourhood.
    pub fn range(&self, a: &Rational, b: &Rational, mode: EndpointsMode) -> Result<(Rational, Rational)> {
        Self::check_point(a)?;
        Self::check_point(b)?;
        if a > b {
            return domain(format!("empty interval [{a}, {b}]"));
        }
        let mut acc = RangeAcc::default();
        acc.push(self.eval_unchecked(a, Side::At));
        acc.push(self.eval_unchecked(b, Side::At));
        if a < b {
            acc.push(self.eval_unchecked(a, Side::Right));
            acc.push(self.eval_unchecked(b, Side::Left));
            for bp in self.breakpoints.iter().filter(|bp| &bp.x > a && &bp.x < b) {
                acc.push(bp.left.clone());
                acc.push(bp.value.clone());
                acc.push(bp.right.clone());
            }
        }
        if mode == EndpointsMode::IncludeLimits {
            if !a.is_zero() {
                acc.push(self.eval_unchecked(a, Side::Left));
            }
            if *b != Rational::one() {
                acc.push(self.eval_unchecked(b, Side::Right));
            }
        }
        Ok(acc.finish())
    }

    /// `sup - inf` over `[a, b]`.
    pub fn diameter(&self, a: &Rational, b: &Rational, mode: EndpointsMode) -> Result<Rational> {
        let (lo, hi) = self.range(a, b, mode)?;
        Ok(hi - lo)
    }

    /// Range over the whole domain.
    pub fn full_range(&self) -> (Rational, Rational) {
        self.range(&Rational::zero(), &Rational::one(), EndpointsMode::ValuesOnly)
            .expect("unit interval is valid")
    }

    pub fn sup_abs(&self) -> Rational {
        let (lo, hi) = self.full_range();
        std::cmp::max(lo.abs(), hi.abs())
    }

    /// Same function with breakpoints added at `xs` (continuity points there
    /// unless they already exist).
    pub fn refine<'a>(&self, xs: impl IntoIterator<Item = &'a Rational>) -> PlFunction {
        let mut extra: Vec<&Rational> = xs
            .into_iter()
            .filter(|x| x.in_unit_interval() && self.locate(x).is_err())
            .collect();
        if extra.is_empty() {
            return self.clone();
        }
        extra.sort();
        extra.dedup();
        let mut out = Vec::with_capacity(self.breakpoints.len() + extra.len());
        let mut it = extra.into_iter().peekable();
        for (i, bp) in self.breakpoints.iter().enumerate() {
            if i > 0 {
                while let Some(x) = it.next_if(|x| **x < bp.x) {
                    out.push(Breakpoint::continuous(x.clone(), self.interpolate(i - 1, x)));
                }
            }
            out.push(bp.clone());
        }
        PlFunction { breakpoints: out }
    }

    /// Pointwise `Σ coeffs[i]·fs[i]`, including at every one-sided limit.
    pub fn linear_combine(coeffs: &[Rational], fs: &[&PlFunction]) -> Result<PlFunction> {
        if coeffs.len() != fs.len() {
            return domain("coefficient and function counts differ");
        }
        if fs.is_empty() {
            return Ok(PlFunction::zero());
        }
        let mut xs: Vec<Rational> = fs
            .iter()
            .flat_map(|f| f.breakpoints.iter().map(|b| b.x.clone()))
            .collect();
        xs.sort();
        xs.dedup();
        let breakpoints = xs
            .into_iter()
            .map(|x| {
                let mut left = Rational::zero();
                let mut value = Rational::zero();
                let mut right = Rational::zero();
                for (c, f) in coeffs.iter().zip(fs) {
                    left += &(c * f.eval_unchecked(&x, Side::Left));
                    value += &(c * f.eval_unchecked(&x, Side::At));
                    right += &(c * f.eval_unchecked(&x, Side::Right));
                }
                Breakpoint { x, left, value, right }
            })
            .collect();
        Ok(PlFunction::new(breakpoints)?.simplified())
    }

    pub fn scale(&self, c: &Rational) -> PlFunction {
        PlFunction {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|b| Breakpoint {
                    x: b.x.clone(),
                    left: c * &b.left,
                    value: c * &b.value,
                    right: c * &b.right,
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &PlFunction) -> PlFunction {
        PlFunction::linear_combine(&[Rational::one(), Rational::one()], &[self, other])
            .expect("matching lengths")
    }

    pub fn sub(&self, other: &PlFunction) -> PlFunction {
        PlFunction::linear_combine(&[Rational::one(), -Rational::one()], &[self, other])
            .expect("matching lengths")
    }

    /// Drops interior continuity breakpoints that lie on the line through their
    /// neighbours. The function is unchanged.
    pub fn simplified(&self) -> PlFunction {
        let n = self.breakpoints.len();
        if n <= 2 {
            return self.clone();
        }
        let mut out: Vec<Breakpoint> = vec![self.breakpoints[0].clone()];
        for i in 1..n - 1 {
            let b = &self.breakpoints[i];
            let prev = out.last().unwrap();
            let next = &self.breakpoints[i + 1];
            let collinear = b.is_continuous()
                && (&b.value - &prev.right) * (&next.x - &b.x) == (&next.left - &b.value) * (&b.x - &prev.x);
            if !collinear {
                out.push(b.clone());
            }
        }
        out.push(self.breakpoints[n - 1].clone());
        PlFunction { breakpoints: out }
    }

    /// Replaces the function on `[l, r]` by `patch`.
    ///
    /// At `l` the left limit and value come from `self` and the right limit from
    /// `patch`; symmetrically at `r`.
    pub fn splice(&self, l: &Rational, r: &Rational, patch: &PlFunction) -> Result<PlFunction> {
        Self::check_point(l)?;
        Self::check_point(r)?;
        if l >= r {
            return domain(format!("splice needs l < r, got [{l}, {r}]"));
        }
        let mut out: Vec<Breakpoint> = self
            .breakpoints
            .iter()
            .filter(|b| &b.x < l)
            .cloned()
            .collect();
        out.push(Breakpoint {
            x: l.clone(),
            left: self.eval_unchecked(l, Side::Left),
            value: self.eval_unchecked(l, Side::At),
            right: patch.eval_unchecked(l, Side::Right),
        });
        out.extend(
            patch
                .breakpoints
                .iter()
                .filter(|b| &b.x > l && &b.x < r)
                .cloned(),
        );
        out.push(Breakpoint {
            x: r.clone(),
            left: patch.eval_unchecked(r, Side::Left),
            value: self.eval_unchecked(r, Side::At),
            right: self.eval_unchecked(r, Side::Right),
        });
        out.extend(self.breakpoints.iter().filter(|b| &b.x > r).cloned());
        Ok(PlFunction::new(out)?.simplified())
    }

    /// Copy with the value (not the limits) at an existing or new point replaced.
    pub fn with_value_at(&self, x: &Rational, value: Rational) -> Result<PlFunction> {
        Self::check_point(x)?;
        let mut f = self.refine(std::iter::once(x));
        let i = f.locate(x).expect("refined");
        let bp = &mut f.breakpoints[i];
        bp.value = value;
        if bp.x.is_zero() {
            bp.left = bp.value.clone();
        }
        if bp.x == Rational::one() {
            bp.right = bp.value.clone();
        }
        Ok(f)
    }
}

#[derive(Default)]
pub(crate) struct RangeAcc {
    bounds: Option<(Rational, Rational)>,
}

impl RangeAcc {
    pub(crate) fn push(&mut self, v: Rational) {
        self.bounds = Some(match self.bounds.take() {
            None => (v.clone(), v),
            Some((lo, hi)) => {
                let lo = if v < lo { v.clone() } else { lo };
                let hi = if v > hi { v } else { hi };
                (lo, hi)
            }
        });
    }

    pub(crate) fn push_range(&mut self, (lo, hi): (Rational, Rational)) {
        self.push(lo);
        self.push(hi);
    }

    pub(crate) fn finish(self) -> (Rational, Rational) {
        self.bounds.expect("range of a nonempty set")
    }

    pub(crate) fn get(self) -> Option<(Rational, Rational)> {
        self.bounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;

    fn unit_step() -> PlFunction {
        // 0 on [0,1/2), 1 on (1/2,1], value 0 at 1/2
        PlFunction::new(vec![
            Breakpoint::continuous(q(0, 1), q(0, 1)),
            Breakpoint::jump(q(1, 2), q(0, 1), q(0, 1), q(1, 1)),
            Breakpoint::continuous(q(1, 1), q(1, 1)),
        ])
        .unwrap()
    }

    fn shifted() -> PlFunction {
        // x on [0,1/4), x+1/3 on (1/4,1]
        PlFunction::new(vec![
            Breakpoint::continuous(q(0, 1), q(0, 1)),
            Breakpoint::jump(q(1, 4), q(1, 4), q(1, 4), q(7, 12)),
            Breakpoint::continuous(q(1, 1), q(4, 3)),
        ])
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(PlFunction::identity().eval(&q(1, 2), Side::At).unwrap(), q(1, 2));
        assert_eq!(unit_step().eval(&q(1, 2), Side::Right).unwrap(), q(1, 1));
        assert_eq!(unit_step().eval(&q(1, 2), Side::At).unwrap(), q(0, 1));
        assert_eq!(shifted().eval(&q(1, 4), Side::Right).unwrap(), q(7, 12));
        assert_eq!(shifted().eval(&q(1, 2), Side::At).unwrap(), q(5, 6));
    }

    #[test]
    fn eval_domain_errors() {
        let f = PlFunction::identity();
        assert!(matches!(f.eval(&q(0, 1), Side::Left), Err(Error::Domain(_))));
        assert!(matches!(f.eval(&q(1, 1), Side::Right), Err(Error::Domain(_))));
        assert!(matches!(f.eval(&q(3, 2), Side::At), Err(Error::Domain(_))));
        assert!(matches!(f.eval(&q(-1, 2), Side::At), Err(Error::Domain(_))));
    }

    #[test]
    fn range_examples() {
        let id = PlFunction::identity();
        assert_eq!(id.range(&q(1, 4), &q(3, 4), EndpointsMode::ValuesOnly).unwrap(), (q(1, 4), q(3, 4)));
        assert_eq!(unit_step().range(&q(0, 1), &q(1, 1), EndpointsMode::ValuesOnly).unwrap(), (q(0, 1), q(1, 1)));
        assert_eq!(
            shifted().range(&q(1, 8), &q(3, 8), EndpointsMode::IncludeLimits).unwrap(),
            (q(1, 8), q(17, 24))
        );
        assert!(id.range(&q(3, 4), &q(1, 4), EndpointsMode::ValuesOnly).is_err());
    }

    #[test]
    fn degenerate_range_semantics() {
        let f = unit_step();
        let half = q(1, 2);
        assert_eq!(f.range(&half, &half, EndpointsMode::ValuesOnly).unwrap(), (q(0, 1), q(0, 1)));
        assert_eq!(f.range(&half, &half, EndpointsMode::IncludeLimits).unwrap(), (q(0, 1), q(1, 1)));
        // at the domain ends only the inward limit exists
        assert_eq!(f.range(&q(1, 1), &q(1, 1), EndpointsMode::IncludeLimits).unwrap(), (q(1, 1), q(1, 1)));
    }

    #[test]
    fn range_endpoint_modes_differ_at_jump() {
        // interval ending exactly at the jump: the right limit only counts with IncludeLimits
        let f = unit_step();
        assert_eq!(f.range(&q(1, 4), &q(1, 2), EndpointsMode::ValuesOnly).unwrap(), (q(0, 1), q(0, 1)));
        assert_eq!(f.range(&q(1, 4), &q(1, 2), EndpointsMode::IncludeLimits).unwrap(), (q(0, 1), q(1, 1)));
    }

    #[test]
    fn bridge_examples() {
        let z = PlFunction::bridge(&q(0, 1), &q(1, 1), &q(0, 1), &q(0, 1)).unwrap();
        assert_eq!(z.full_range(), (q(0, 1), q(0, 1)));
        let b = PlFunction::bridge(&q(1, 4), &q(3, 4), &q(0, 1), &q(1, 1)).unwrap();
        assert_eq!(b.value(&q(1, 2)).unwrap(), q(1, 2));
        let c = PlFunction::bridge(&q(0, 1), &q(1, 1), &q(1, 4), &q(7, 12)).unwrap();
        assert_eq!(c.value(&q(1, 3)).unwrap(), q(13, 36));
        assert!(matches!(
            PlFunction::bridge(&q(1, 2), &q(1, 2), &q(0, 1), &q(1, 1)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_breakpoints() {
        let bp = |x| Breakpoint::continuous(x, q(0, 1));
        assert!(PlFunction::new(vec![bp(q(0, 1))]).is_err());
        assert!(PlFunction::new(vec![bp(q(1, 4)), bp(q(1, 1))]).is_err());
        assert!(PlFunction::new(vec![bp(q(0, 1)), bp(q(1, 2)), bp(q(1, 2)), bp(q(1, 1))]).is_err());
    }

    #[test]
    fn endpoint_limits_normalized() {
        let f = PlFunction::new(vec![
            Breakpoint::jump(q(0, 1), q(9, 1), q(1, 1), q(1, 1)),
            Breakpoint::jump(q(1, 1), q(1, 1), q(1, 1), q(9, 1)),
        ])
        .unwrap();
        assert_eq!(f, PlFunction::constant(q(1, 1)));
    }

    #[test]
    fn linear_combine_keeps_limits() {
        let s = unit_step();
        let d = PlFunction::linear_combine(&[q(1, 1), q(-1, 1)], &[&s, &s]).unwrap();
        assert_eq!(d, PlFunction::zero());
        let two = PlFunction::linear_combine(&[q(2, 1)], &[&s]).unwrap();
        assert_eq!(two.eval(&q(1, 2), Side::Right).unwrap(), q(2, 1));
        let sum = s.add(&shifted());
        assert_eq!(sum.eval(&q(1, 4), Side::Right).unwrap(), q(7, 12));
        assert_eq!(sum.eval(&q(1, 2), Side::Right).unwrap(), q(11, 6));
    }

    #[test]
    fn splice_and_refine() {
        let s = unit_step();
        let patch = PlFunction::bridge(&q(1, 4), &q(3, 4), &q(0, 1), &q(1, 1)).unwrap();
        let p = s.splice(&q(1, 4), &q(3, 4), &patch).unwrap();
        assert!(p.jumps().next().is_none());
        assert_eq!(p.value(&q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(p.value(&q(1, 8)).unwrap(), q(0, 1));
        assert_eq!(p.value(&q(7, 8)).unwrap(), q(1, 1));
        let r = s.refine([q(1, 3), q(2, 3)].iter());
        assert_eq!(r.breakpoints().len(), 5);
        assert_eq!(r.simplified(), s);
    }

    #[test]
    fn with_value_at_changes_only_value() {
        let f = PlFunction::identity().with_value_at(&q(1, 2), q(5, 1)).unwrap();
        assert_eq!(f.eval(&q(1, 2), Side::Left).unwrap(), q(1, 2));
        assert_eq!(f.eval(&q(1, 2), Side::At).unwrap(), q(5, 1));
        assert_eq!(f.eval(&q(1, 2), Side::Right).unwrap(), q(1, 2));
    }
}
