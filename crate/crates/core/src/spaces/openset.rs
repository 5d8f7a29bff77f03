//! Symbolic open sets: finite unions of tubes, boxes and single-fiber slabs.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::baseset::{BaseInterval, BaseSet};
use super::model::{FiberKind, FiberedSpaceModel, TopologyMode, XPoint};
use crate::error::{domain, Error, Result};
use crate::exactnum::Rational;

/// An interval of fiber positions. Chain indices are the integers `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiberRange {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl FiberRange {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Self {
        FiberRange { lo, hi, lo_closed, hi_closed }
    }

    pub fn open(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn index(i: u32) -> Self {
        let r = Rational::integer(i as i64);
        Self::closed(r.clone(), r)
    }

    pub fn contains(&self, t: &Rational) -> bool {
        let above = if self.lo_closed { *t >= self.lo } else { *t > self.lo };
        let below = if self.hi_closed { *t <= self.hi } else { *t < self.hi };
        above && below
    }

    fn as_interval(&self) -> BaseInterval {
        BaseInterval::new(self.lo.clone(), self.hi.clone(), self.lo_closed, self.hi_closed)
    }

    fn from_interval(iv: BaseInterval) -> Self {
        FiberRange::new(iv.lo, iv.hi, iv.lo_closed, iv.hi_closed)
    }

    pub fn is_empty(&self) -> bool {
        self.as_interval().is_empty()
    }

    pub fn intersect(&self, other: &FiberRange) -> FiberRange {
        FiberRange::from_interval(self.as_interval().intersect(&other.as_interval()))
    }

    /// Some point of the fiber lies in the range.
    pub fn meets(&self, kind: FiberKind) -> bool {
        match kind {
            FiberKind::Singleton => self.contains(&Rational::zero()),
            FiberKind::Interval => !self
                .as_interval()
                .intersect(&BaseInterval::closed(Rational::zero(), Rational::one()))
                .is_empty(),
            FiberKind::FiniteChain(k) => (0..k).any(|i| self.contains(&Rational::integer(i as i64))),
        }
    }

    /// `range ∩ fiber` is open in the fiber's own topology.
    fn relatively_open(&self, kind: FiberKind) -> bool {
        match kind {
            FiberKind::Interval => {
                let one = Rational::one();
                let lo_bad = self.lo_closed && self.lo.is_positive() && self.lo <= one;
                let hi_bad = self.hi_closed && !self.hi.is_negative() && self.hi < one;
                !(lo_bad || hi_bad)
            }
            _ => true,
        }
    }
}

/// The fiber positions a piece selects over one base point.
#[derive(Clone, Debug, PartialEq, Eq)]
enum FiberSel {
    All,
    Range(FiberRange),
}

impl FiberSel {
    fn meets(&self, kind: FiberKind) -> bool {
        match self {
            FiberSel::All => true,
            FiberSel::Range(r) => r.meets(kind),
        }
    }

    fn intersect(&self, other: &FiberSel) -> FiberSel {
        match (self, other) {
            (FiberSel::All, x) | (x, FiberSel::All) => x.clone(),
            (FiberSel::Range(a), FiberSel::Range(b)) => FiberSel::Range(a.intersect(b)),
        }
    }
}

/// Whether the union of `sels` covers every point of the fiber.
fn covers_fiber(sels: &[FiberSel], kind: FiberKind) -> bool {
    if sels.contains(&FiberSel::All) {
        return true;
    }
    let ranges: Vec<&FiberRange> = sels
        .iter()
        .filter_map(|s| match s {
            FiberSel::Range(r) => Some(r),
            FiberSel::All => None,
        })
        .collect();
    let covered = |t: &Rational| ranges.iter().any(|r| r.contains(t));
    match kind {
        FiberKind::Singleton => covered(&Rational::zero()),
        FiberKind::FiniteChain(k) => (0..k).all(|i| covered(&Rational::integer(i as i64))),
        FiberKind::Interval => {
            let mut pts: Vec<Rational> = vec![Rational::zero(), Rational::one()];
            for r in &ranges {
                for e in [&r.lo, &r.hi] {
                    if e.in_unit_interval() {
                        pts.push(e.clone());
                    }
                }
            }
            pts.sort();
            pts.dedup();
            pts.iter().all(covered) && pts.windows(2).all(|w| covered(&w[0].midpoint(&w[1])))
        }
    }
}

/// One primitive shape of an [`OpenSet`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    /// `f⁻¹(I)`: whole fibers over a base interval.
    Tube(BaseInterval),
    /// `I × J`: the same fiber range over every base point of `I`.
    Box { base: BaseInterval, fiber: FiberRange },
    /// `{a} × J`: part of the single fiber over `a`.
    Slab { at: Rational, fiber: FiberRange },
}

impl Piece {
    fn base(&self) -> BaseInterval {
        match self {
            Piece::Tube(b) | Piece::Box { base: b, .. } => b.clone(),
            Piece::Slab { at, .. } => BaseInterval::point(at.clone()),
        }
    }

    fn selection(&self) -> FiberSel {
        match self {
            Piece::Tube(_) => FiberSel::All,
            Piece::Box { fiber, .. } | Piece::Slab { fiber, .. } => FiberSel::Range(fiber.clone()),
        }
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fr = |r: &FiberRange| {
            format!(
                "{}{}, {}{}",
                if r.lo_closed { '[' } else { '(' },
                r.lo,
                r.hi,
                if r.hi_closed { ']' } else { ')' }
            )
        };
        match self {
            Piece::Tube(b) => write!(f, "f⁻¹{b}"),
            Piece::Box { base, fiber } => write!(f, "{base}×{}", fr(fiber)),
            Piece::Slab { at, fiber } => write!(f, "{{{at}}}×{}", fr(fiber)),
        }
    }
}

/// A finite union of [`Piece`]s in some [`FiberedSpaceModel`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpenSet {
    pieces: Vec<Piece>,
}

impl OpenSet {
    pub fn empty() -> Self {
        OpenSet::default()
    }

    pub fn from_pieces(pieces: impl IntoIterator<Item = Piece>) -> Self {
        OpenSet { pieces: pieces.into_iter().collect() }
    }

    pub fn tube(base: BaseInterval) -> Self {
        OpenSet::from_pieces([Piece::Tube(base)])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn push(&mut self, piece: Piece) {
        self.pieces.push(piece);
    }

    pub fn union(mut self, other: OpenSet) -> OpenSet {
        self.pieces.extend(other.pieces);
        self
    }

    /// Base containment with `0 ≡ 1` on the circle.
    fn base_contains(model: &FiberedSpaceModel, base: &BaseInterval, y: &Rational) -> bool {
        if base.contains(y) {
            return true;
        }
        if model.wraps() {
            if y.is_zero() {
                return base.contains(&Rational::one());
            }
            if *y == Rational::one() {
                return base.contains(&Rational::zero());
            }
        }
        false
    }

    fn selections_at(&self, model: &FiberedSpaceModel, y: &Rational) -> Vec<FiberSel> {
        self.pieces
            .iter()
            .filter(|p| Self::base_contains(model, &p.base(), y))
            .map(Piece::selection)
            .collect()
    }

    pub fn contains(&self, model: &FiberedSpaceModel, p: &XPoint) -> bool {
        let t = p.position();
        self.selections_at(model, &p.base).iter().any(|s| match s {
            FiberSel::All => true,
            FiberSel::Range(r) => r.contains(&t),
        })
    }

    /// Evaluates `pred` on every critical base point and every gap between
    /// them and assembles the base points where it holds.
    fn sweep<'a>(
        model: &FiberedSpaceModel,
        pieces: impl IntoIterator<Item = &'a Piece>,
        pred: impl Fn(&Rational) -> bool,
    ) -> BaseSet {
        let mut pts = model.critical_points();
        for p in pieces {
            let b = p.base();
            for e in [b.lo, b.hi] {
                if e.in_unit_interval() {
                    pts.push(e);
                }
            }
        }
        pts.sort();
        pts.dedup();
        let mut parts = Vec::new();
        for (i, c) in pts.iter().enumerate() {
            if pred(c) {
                parts.push(BaseInterval::point(c.clone()));
            }
            if let Some(next) = pts.get(i + 1) {
                if pred(&c.midpoint(next)) {
                    parts.push(BaseInterval::open(c.clone(), next.clone()));
                }
            }
        }
        BaseSet::from_parts(parts)
    }

    fn has_left_collar(&self, model: &FiberedSpaceModel, y: &Rational) -> bool {
        let y = if model.wraps() && y.is_zero() { Rational::one() } else { y.clone() };
        self.pieces.iter().any(|p| match p {
            Piece::Tube(b) => b.lo < y && y <= b.hi,
            _ => false,
        })
    }

    fn has_right_collar(&self, model: &FiberedSpaceModel, y: &Rational) -> bool {
        let y = if model.wraps() && *y == Rational::one() { Rational::zero() } else { y.clone() };
        self.pieces.iter().any(|p| match p {
            Piece::Tube(b) => b.lo <= y && y < b.hi,
            _ => false,
        })
    }

    fn check_base_open(&self, model: &FiberedSpaceModel, base: &BaseInterval) -> Result<()> {
        let bad = |why: &str| Err(Error::Topology(format!("base interval {base}: {why}")));
        if base.lo >= base.hi {
            return bad("degenerate");
        }
        if base.lo.is_negative() || base.hi > Rational::one() {
            return bad("outside [0,1]");
        }
        if base.lo_closed && !base.lo.is_zero() {
            return bad("closed at an interior point");
        }
        if base.hi_closed && base.hi != Rational::one() {
            return bad("closed at an interior point");
        }
        if model.wraps() {
            if base.lo_closed && !self.has_left_collar(model, &Rational::zero()) {
                return bad("contains the circle point 0 without an arc ending at 1");
            }
            if base.hi_closed && !self.has_right_collar(model, &Rational::one()) {
                return bad("contains the circle point 1 without an arc starting at 0");
            }
        }
        Ok(())
    }

    /// Fails with `TopologyError` naming the first piece that has a point
    /// without a neighbourhood inside the union.
    pub fn check_open(&self, model: &FiberedSpaceModel) -> Result<()> {
        for piece in &self.pieces {
            self.check_piece(model, piece)
                .map_err(|e| match e {
                    Error::Topology(msg) => Error::Topology(format!("{piece}: {msg}")),
                    other => other,
                })?;
        }
        Ok(())
    }

    fn check_piece(&self, model: &FiberedSpaceModel, piece: &Piece) -> Result<()> {
        let topo = |msg: String| Err(Error::Topology(msg));
        match piece {
            Piece::Tube(base) => self.check_base_open(model, base),
            Piece::Box { base, fiber } => {
                self.check_base_open(model, base)?;
                let mut kinds = vec![model.default_kind()];
                kinds.extend(
                    model
                        .explicit_fibers()
                        .iter()
                        .filter(|(y, _)| Self::base_contains(model, base, y))
                        .map(|(_, k)| *k),
                );
                match model.mode() {
                    TopologyMode::Product => {
                        if !fiber.relatively_open(FiberKind::Interval) {
                            return topo("fiber range is not open in [0,1]".into());
                        }
                    }
                    TopologyMode::Order => {
                        for kind in kinds {
                            if covers_fiber(&[FiberSel::Range(fiber.clone())], kind) {
                                continue;
                            }
                            let ends = fiber.contains(&Rational::zero()) || fiber.contains(&kind.max_position());
                            if !fiber.relatively_open(kind) || ends {
                                return topo(format!(
                                    "over {kind} fibers a partial range must be open and avoid the fiber ends"
                                ));
                            }
                        }
                    }
                    TopologyMode::DoubleCircle => {
                        let lower = fiber.contains(&Rational::zero());
                        let upper = fiber.contains(&Rational::one());
                        if lower && !upper && kinds.contains(&FiberKind::FiniteChain(2)) {
                            return topo("inner-circle points need the outer copy nearby".into());
                        }
                    }
                }
                Ok(())
            }
            Piece::Slab { at, fiber } => {
                model.check_base(at)?;
                let kind = model.fiber_at(at);
                if !fiber.meets(kind) {
                    return Ok(());
                }
                if !fiber.relatively_open(kind) {
                    return topo(format!("range is not open in the {kind} fiber"));
                }
                let one = Rational::one();
                match model.mode() {
                    TopologyMode::Product => topo("a single fiber piece has empty interior in the product".into()),
                    TopologyMode::Order => {
                        let has_min = fiber.contains(&Rational::zero());
                        let has_max = fiber.contains(&kind.max_position());
                        if has_min && !at.is_zero() && !self.has_left_collar(model, at) {
                            return topo(format!("fiber minimum at {at} needs a left collar"));
                        }
                        if has_max && *at != one && !self.has_right_collar(model, at) {
                            return topo(format!("fiber maximum at {at} needs a right collar"));
                        }
                        Ok(())
                    }
                    TopologyMode::DoubleCircle => {
                        if fiber.contains(&Rational::zero())
                            && !(self.has_left_collar(model, at) && self.has_right_collar(model, at))
                        {
                            return topo(format!("inner point at {at} needs a two-sided arc"));
                        }
                        Ok(())
                    }
                }
            }
        }
    }

    /// `f(U)`.
    pub fn image(&self, model: &FiberedSpaceModel) -> BaseSet {
        Self::sweep(model, &self.pieces, |y| {
            let kind = model.fiber_at(y);
            self.selections_at(model, y).iter().any(|s| s.meets(kind))
        })
    }

    /// The small image `f♯(U) = {y : f⁻¹(y) ⊆ U}`; `U` must be open.
    pub fn small_image(&self, model: &FiberedSpaceModel) -> Result<BaseSet> {
        self.check_open(model)?;
        Ok(Self::sweep(model, &self.pieces, |y| {
            covers_fiber(&self.selections_at(model, y), model.fiber_at(y))
        }))
    }

    pub fn intersects(&self, other: &OpenSet, model: &FiberedSpaceModel) -> bool {
        let all: Vec<&Piece> = self.pieces.iter().chain(&other.pieces).collect();
        let meet = Self::sweep(model, all, |y| {
            let kind = model.fiber_at(y);
            let mine = self.selections_at(model, y);
            let theirs = other.selections_at(model, y);
            mine.iter()
                .any(|a| theirs.iter().any(|b| a.intersect(b).meets(kind)))
        });
        !meet.is_empty()
    }
}

impl fmt::Display for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "∅");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// `f♯(U)` as a free function.
pub fn small_image(model: &FiberedSpaceModel, set: &OpenSet) -> Result<BaseSet> {
    set.small_image(model)
}

/// Open arc `(lo, hi)` of the circle `[0,1]/(0≡1)` with `hi − lo < 1`,
/// split into base intervals.
fn circle_arc(lo: Rational, hi: Rational) -> Vec<BaseInterval> {
    let zero = Rational::zero();
    let one = Rational::one();
    if lo.is_negative() {
        vec![
            BaseInterval::open(&lo + &one, one),
            BaseInterval::new(zero, hi, true, false),
        ]
    } else if hi > one {
        vec![
            BaseInterval::open(lo, one.clone()),
            BaseInterval::new(zero, hi - one, true, false),
        ]
    } else {
        vec![BaseInterval::open(lo, hi)]
    }
    .into_iter()
    .filter(|b| !b.is_empty())
    .collect()
}

fn tubes(parts: Vec<BaseInterval>) -> OpenSet {
    OpenSet::from_pieces(parts.into_iter().map(Piece::Tube))
}

fn tube_around(model: &FiberedSpaceModel, y: &Rational, r: &Rational) -> OpenSet {
    if model.wraps() {
        tubes(circle_arc(y - r, y + r))
    } else {
        OpenSet::tube(BaseInterval::around(y, r))
    }
}

fn left_collar(model: &FiberedSpaceModel, y: &Rational, e: &Rational) -> OpenSet {
    if model.wraps() {
        tubes(circle_arc(y - e, y.clone()))
    } else if y.is_zero() {
        OpenSet::empty()
    } else {
        let lo = std::cmp::max(y - e, Rational::zero());
        OpenSet::tube(BaseInterval::open(lo, y.clone()))
    }
}

fn right_collar(model: &FiberedSpaceModel, y: &Rational, e: &Rational) -> OpenSet {
    if model.wraps() {
        tubes(circle_arc(y.clone(), y + e))
    } else if *y == Rational::one() {
        OpenSet::empty()
    } else {
        let hi = std::cmp::min(y + e, Rational::one());
        OpenSet::tube(BaseInterval::open(y.clone(), hi))
    }
}

/// Fiber range of radius `r` around `t` inside `[0, max]`. A clipped end is
/// closed only when `t` sits on it.
fn fiber_window(t: &Rational, r: &Rational, max: &Rational) -> FiberRange {
    let lo = t - r;
    let hi = t + r;
    let (lo, lo_closed) = if lo.is_negative() { (Rational::zero(), t.is_zero()) } else { (lo, false) };
    let (hi, hi_closed) = if hi > *max { (max.clone(), t == max) } else { (hi, false) };
    FiberRange::new(lo, hi, lo_closed, hi_closed)
}

/// Disjoint open neighbourhoods of two distinct points, verified before return.
pub fn separate_points(model: &FiberedSpaceModel, p: &XPoint, q: &XPoint) -> Result<(OpenSet, OpenSet)> {
    model.check_point(p)?;
    model.check_point(q)?;
    let p = model.normalize_point(p);
    let q = model.normalize_point(q);
    if p == q {
        return domain(format!("cannot separate {p} from itself"));
    }
    let (u, v) = if p.base != q.base {
        let d = (&p.base - &q.base).abs();
        let d = if model.wraps() { std::cmp::min(d.clone(), Rational::one() - d) } else { d };
        let r = d * Rational::half();
        (tube_around(model, &p.base, &r), tube_around(model, &q.base, &r))
    } else {
        let (lo_pt, hi_pt, swapped) = if p.position() < q.position() { (&p, &q, false) } else { (&q, &p, true) };
        let (a, b) = same_fiber_pair(model, lo_pt, hi_pt)?;
        if swapped { (b, a) } else { (a, b) }
    };
    if !u.contains(model, &p) || !v.contains(model, &q) {
        return Err(Error::Invariant("separating sets miss their points".into()));
    }
    u.check_open(model)?;
    v.check_open(model)?;
    if u.intersects(&v, model) {
        return Err(Error::Invariant(format!("separating sets {u} and {v} meet")));
    }
    Ok((u, v))
}

/// Neighbourhoods of `p` below `q` in the same fiber.
fn same_fiber_pair(model: &FiberedSpaceModel, p: &XPoint, q: &XPoint) -> Result<(OpenSet, OpenSet)> {
    let y = &p.base;
    let kind = model.fiber_at(y);
    let max = kind.max_position();
    let tp = p.position();
    let tq = q.position();
    let quarter = Rational::new(1, 4);
    let collar = |side_room: Rational| side_room * Rational::half();
    match model.mode() {
        TopologyMode::Order => {
            let (jp, jq) = match kind {
                FiberKind::Interval => {
                    let r = (&tq - &tp) * &quarter;
                    (fiber_window(&tp, &r, &max), fiber_window(&tq, &r, &max))
                }
                _ => (FiberRange::closed(tp.clone(), tp.clone()), FiberRange::closed(tq.clone(), tq.clone())),
            };
            let mut u = OpenSet::from_pieces([Piece::Slab { at: y.clone(), fiber: jp }]);
            if tp.is_zero() {
                u = u.union(left_collar(model, y, &collar(y.clone())));
            }
            let mut v = OpenSet::from_pieces([Piece::Slab { at: y.clone(), fiber: jq }]);
            if tq == max {
                v = v.union(right_collar(model, y, &collar(Rational::one() - y)));
            }
            Ok((u, v))
        }
        TopologyMode::DoubleCircle => {
            // inner point: punctured arc plus itself; outer point is isolated
            let u = left_collar(model, y, &quarter)
                .union(right_collar(model, y, &quarter))
                .union(OpenSet::from_pieces([Piece::Slab { at: y.clone(), fiber: FiberRange::index(0) }]));
            let v = OpenSet::from_pieces([Piece::Slab { at: y.clone(), fiber: FiberRange::index(1) }]);
            Ok((u, v))
        }
        TopologyMode::Product => {
            let r = (&tq - &tp) * &quarter;
            let base = BaseInterval::around(y, &quarter);
            Ok((
                OpenSet::from_pieces([Piece::Box { base: base.clone(), fiber: fiber_window(&tp, &r, &max) }]),
                OpenSet::from_pieces([Piece::Box { base, fiber: fiber_window(&tq, &r, &max) }]),
            ))
        }
    }
}
