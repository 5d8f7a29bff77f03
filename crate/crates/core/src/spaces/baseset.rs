use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exactnum::Rational;

/// An interval of the base `[0, 1]`, each end open or closed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl BaseInterval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Self {
        BaseInterval { lo, hi, lo_closed, hi_closed }
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn point(a: Rational) -> Self {
        Self::new(a.clone(), a, true, true)
    }

    /// Open interval `(y − r, y + r)` cut to `[0, 1]`; a cut end becomes closed.
    pub fn around(y: &Rational, r: &Rational) -> Self {
        let lo = y - r;
        let hi = y + r;
        let (lo, lo_closed) = if lo.is_negative() { (Rational::zero(), true) } else { (lo, false) };
        let (hi, hi_closed) = if hi > Rational::one() { (Rational::one(), true) } else { (hi, false) };
        Self::new(lo, hi, lo_closed, hi_closed)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi && self.lo_closed && self.hi_closed
    }

    pub fn contains(&self, y: &Rational) -> bool {
        let above = if self.lo_closed { *y >= self.lo } else { *y > self.lo };
        let below = if self.hi_closed { *y <= self.hi } else { *y < self.hi };
        above && below
    }

    pub fn intersect(&self, other: &BaseInterval) -> BaseInterval {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_closed),
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_closed),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_closed),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_closed),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        BaseInterval { lo, hi, lo_closed, hi_closed }
    }

    /// `self ⊆ other`, for nonempty `self`.
    pub fn is_within(&self, other: &BaseInterval) -> bool {
        let lo_ok = other.lo < self.lo || (other.lo == self.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok = other.hi > self.hi || (other.hi == self.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl fmt::Display for BaseInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// A finite union of base intervals, kept as sorted maximal components.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BaseSet {
    parts: Vec<BaseInterval>,
}

impl BaseSet {
    pub fn empty() -> Self {
        BaseSet::default()
    }

    pub fn from_parts(parts: impl IntoIterator<Item = BaseInterval>) -> Self {
        let mut parts: Vec<BaseInterval> = parts.into_iter().filter(|p| !p.is_empty()).collect();
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut merged: Vec<BaseInterval> = Vec::with_capacity(parts.len());
        for p in parts {
            if let Some(last) = merged.last_mut() {
                let touches = last.hi > p.lo || (last.hi == p.lo && (last.hi_closed || p.lo_closed));
                if touches {
                    if p.hi > last.hi {
                        last.hi = p.hi;
                        last.hi_closed = p.hi_closed;
                    } else if p.hi == last.hi {
                        last.hi_closed |= p.hi_closed;
                    }
                    continue;
                }
            }
            merged.push(p);
        }
        BaseSet { parts: merged }
    }

    pub fn parts(&self) -> &[BaseInterval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, y: &Rational) -> bool {
        self.parts.iter().any(|p| p.contains(y))
    }

    pub fn is_subset_of(&self, other: &BaseSet) -> bool {
        self.parts
            .iter()
            .all(|p| other.parts.iter().any(|o| p.is_within(o)))
    }

    pub fn union(&self, other: &BaseSet) -> BaseSet {
        BaseSet::from_parts(self.parts.iter().chain(&other.parts).cloned())
    }

    /// Openness in `[0,1]`, or in the circle `[0,1]/(0≡1)` when `wrap` is set.
    pub fn is_open(&self, wrap: bool) -> bool {
        let one = Rational::one();
        for p in &self.parts {
            if p.is_point() {
                return false;
            }
            if p.lo_closed && !p.lo.is_zero() {
                return false;
            }
            if p.hi_closed && p.hi != one {
                return false;
            }
        }
        if wrap {
            let has_zero = self.contains(&Rational::zero());
            let has_one = self.contains(&one);
            if has_zero != has_one {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for BaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;

    #[test]
    fn merging() {
        let s = BaseSet::from_parts([
            BaseInterval::open(q(1, 2), q(3, 4)),
            BaseInterval::point(q(1, 2)),
            BaseInterval::open(q(1, 4), q(1, 2)),
        ]);
        assert_eq!(s.parts(), &[BaseInterval::open(q(1, 4), q(3, 4))]);
        let gap = BaseSet::from_parts([
            BaseInterval::open(q(1, 4), q(1, 2)),
            BaseInterval::open(q(1, 2), q(3, 4)),
        ]);
        assert_eq!(gap.parts().len(), 2);
        assert!(!gap.contains(&q(1, 2)));
        assert_eq!(gap.to_string(), "(1/4, 1/2) ∪ (1/2, 3/4)");
    }

    #[test]
    fn nested_merge_keeps_outer_end() {
        let s = BaseSet::from_parts([
            BaseInterval::closed(q(0, 1), q(1, 1)),
            BaseInterval::open(q(1, 4), q(1, 2)),
        ]);
        assert_eq!(s.parts(), &[BaseInterval::closed(q(0, 1), q(1, 1))]);
    }

    #[test]
    fn subset_and_open() {
        let big = BaseSet::from_parts([BaseInterval::new(q(0, 1), q(1, 2), true, false)]);
        let small = BaseSet::from_parts([BaseInterval::open(q(1, 8), q(1, 4))]);
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        assert!(big.is_open(false));
        assert!(!big.is_open(true));
        let wrapped = big.union(&BaseSet::from_parts([BaseInterval::new(q(3, 4), q(1, 1), false, true)]));
        assert!(wrapped.is_open(true));
        assert!(!BaseSet::from_parts([BaseInterval::point(q(1, 2))]).is_open(false));
    }

    #[test]
    fn around_clips() {
        assert_eq!(BaseInterval::around(&q(1, 8), &q(1, 4)), BaseInterval::new(q(0, 1), q(3, 8), true, false));
        assert_eq!(BaseInterval::around(&q(1, 2), &q(1, 4)), BaseInterval::open(q(1, 4), q(3, 4)));
    }
}
