use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exactnum::Rational;

/// How fibers are glued to the base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyMode {
    /// Lexicographic order: approaching a base point from the left lands on the
    /// fiber minimum, from the right on the fiber maximum.
    Order,
    /// Ordinary product `[0,1] × fiber`.
    Product,
    /// Alexandroff double circle: index 0 is the inner circle, index 1 the
    /// outer copy whose points are isolated. Base points 0 and 1 coincide.
    DoubleCircle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiberKind {
    Singleton,
    /// Points `0 < 1 < … < k−1`, `k ≥ 2`.
    FiniteChain(u32),
    /// A copy of `[0, 1]`.
    Interval,
}

impl FiberKind {
    /// Position of the fiber maximum; the minimum is always at 0.
    pub fn max_position(&self) -> Rational {
        match self {
            FiberKind::Singleton => Rational::zero(),
            FiberKind::FiniteChain(k) => Rational::integer(*k as i64 - 1),
            FiberKind::Interval => Rational::one(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, FiberKind::Singleton)
    }

    fn parse(kind: &str, size: Option<u32>) -> Result<Self> {
        match (kind, size) {
            ("interval", _) => Ok(FiberKind::Interval),
            ("singleton", _) => Ok(FiberKind::Singleton),
            ("chain", Some(k)) if k >= 2 => Ok(FiberKind::FiniteChain(k)),
            ("chain", Some(1)) => Ok(FiberKind::Singleton),
            ("chain", _) => Err(Error::Parse("chain fiber needs a size ≥ 2".into())),
            (other, _) => Err(Error::Parse(format!("unknown fiber kind {other:?}"))),
        }
    }

    fn parse_default(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(FiberKind::Interval),
            "singleton" => Ok(FiberKind::Singleton),
            _ => match s.strip_prefix("chain").map(str::parse::<u32>) {
                Some(Ok(k)) => FiberKind::parse("chain", Some(k)),
                _ => Err(Error::Parse(format!("unknown default fiber {s:?}"))),
            },
        }
    }

    fn default_label(&self) -> String {
        match self {
            FiberKind::Singleton => "singleton".into(),
            FiberKind::Interval => "interval".into(),
            FiberKind::FiniteChain(k) => format!("chain{k}"),
        }
    }
}

impl fmt::Display for FiberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberKind::Singleton => write!(f, "singleton"),
            FiberKind::FiniteChain(k) => write!(f, "chain({k})"),
            FiberKind::Interval => write!(f, "interval"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelName {
    LexSquare,
    DoubleArrow,
    DoubleCircle,
    ProductSquare,
    Custom,
}

impl ModelName {
    fn label(&self) -> &'static str {
        match self {
            ModelName::LexSquare => "lex_square",
            ModelName::DoubleArrow => "double_arrow",
            ModelName::DoubleCircle => "double_circle",
            ModelName::ProductSquare => "product_square",
            ModelName::Custom => "custom",
        }
    }
}

/// A map `f: X → [0,1]` described by its fibers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct FiberedSpaceModel {
    name: ModelName,
    mode: TopologyMode,
    explicit: BTreeMap<Rational, FiberKind>,
    default: FiberKind,
}

impl FiberedSpaceModel {
    pub fn lex_square() -> Self {
        Self::named(ModelName::LexSquare, TopologyMode::Order, FiberKind::Interval)
    }

    pub fn double_arrow() -> Self {
        Self::named(ModelName::DoubleArrow, TopologyMode::Order, FiberKind::FiniteChain(2))
    }

    pub fn double_circle() -> Self {
        Self::named(ModelName::DoubleCircle, TopologyMode::DoubleCircle, FiberKind::FiniteChain(2))
    }

    pub fn product_square() -> Self {
        Self::named(ModelName::ProductSquare, TopologyMode::Product, FiberKind::Interval)
    }

    fn named(name: ModelName, mode: TopologyMode, default: FiberKind) -> Self {
        FiberedSpaceModel { name, mode, explicit: BTreeMap::new(), default }
    }

    /// A model with an arbitrary default and a finite table of exceptions.
    pub fn custom(
        mode: TopologyMode,
        default: FiberKind,
        explicit: impl IntoIterator<Item = (Rational, FiberKind)>,
    ) -> Result<Self> {
        Self::build(ModelName::Custom, mode, default, explicit)
    }

    fn build(
        name: ModelName,
        mode: TopologyMode,
        default: FiberKind,
        explicit: impl IntoIterator<Item = (Rational, FiberKind)>,
    ) -> Result<Self> {
        let mut model = FiberedSpaceModel { name, mode, explicit: BTreeMap::new(), default };
        model.check_kind(&default)?;
        for (at, kind) in explicit {
            if !at.in_unit_interval() {
                return domain(format!("fiber key {at} outside [0,1]"));
            }
            model.check_kind(&kind)?;
            let at = model.normalize_base(&at);
            if let Some(prev) = model.explicit.insert(at.clone(), kind) {
                if prev != kind {
                    return domain(format!("conflicting fiber kinds at {at}"));
                }
            }
        }
        if mode == TopologyMode::Product && (default != FiberKind::Interval || !model.explicit.is_empty()) {
            return domain("product mode supports only the square [0,1]×[0,1]");
        }
        model.explicit.retain(|_, k| *k != default);
        Ok(model)
    }

    fn check_kind(&self, kind: &FiberKind) -> Result<()> {
        if let FiberKind::FiniteChain(k) = kind {
            if *k < 2 {
                return domain("chain fibers need at least two points");
            }
        }
        if self.mode == TopologyMode::DoubleCircle
            && !matches!(kind, FiberKind::Singleton | FiberKind::FiniteChain(2))
        {
            return domain("double-circle fibers are singletons or two-point chains");
        }
        Ok(())
    }

    pub fn name(&self) -> ModelName {
        self.name
    }

    pub fn mode(&self) -> TopologyMode {
        self.mode
    }

    pub fn default_kind(&self) -> FiberKind {
        self.default
    }

    pub fn explicit_fibers(&self) -> &BTreeMap<Rational, FiberKind> {
        &self.explicit
    }

    pub fn wraps(&self) -> bool {
        self.mode == TopologyMode::DoubleCircle
    }

    /// Identifies base point 1 with 0 on the circle.
    pub fn normalize_base(&self, y: &Rational) -> Rational {
        if self.wraps() && *y == Rational::one() {
            Rational::zero()
        } else {
            y.clone()
        }
    }

    pub fn fiber_at(&self, y: &Rational) -> FiberKind {
        self.explicit
            .get(&self.normalize_base(y))
            .copied()
            .unwrap_or(self.default)
    }

    pub fn check_base(&self, y: &Rational) -> Result<()> {
        if !y.in_unit_interval() {
            return domain(format!("base point {y} outside [0,1]"));
        }
        Ok(())
    }

    pub fn check_point(&self, p: &XPoint) -> Result<()> {
        self.check_base(&p.base)?;
        let kind = self.fiber_at(&p.base);
        let ok = match (kind, &p.fiber) {
            (FiberKind::Singleton, FiberCoord::Singleton) => true,
            (FiberKind::FiniteChain(k), FiberCoord::Index(i)) => *i < k,
            (FiberKind::Interval, FiberCoord::Coord(t)) => t.in_unit_interval(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            domain(format!("point {p} does not lie in the {kind} fiber at {}", p.base))
        }
    }

    /// Canonical form of a point (base normalized on the circle).
    pub fn normalize_point(&self, p: &XPoint) -> XPoint {
        XPoint { base: self.normalize_base(&p.base), fiber: p.fiber.clone() }
    }

    /// Base points with a non-default fiber, and 0 and 1.
    pub(crate) fn critical_points(&self) -> Vec<Rational> {
        let mut pts: Vec<Rational> = self.explicit.keys().cloned().collect();
        pts.push(Rational::zero());
        pts.push(Rational::one());
        pts
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberCoord {
    Singleton,
    Index(u32),
    Coord(Rational),
}

/// A point of `X`: a base point and a position in its fiber.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct XPoint {
    pub base: Rational,
    pub fiber: FiberCoord,
}

impl XPoint {
    pub fn coord(base: Rational, t: Rational) -> Self {
        XPoint { base, fiber: FiberCoord::Coord(t) }
    }

    pub fn index(base: Rational, i: u32) -> Self {
        XPoint { base, fiber: FiberCoord::Index(i) }
    }

    pub fn base_only(base: Rational) -> Self {
        XPoint { base, fiber: FiberCoord::Singleton }
    }

    /// Fiber position as a rational; chain indices map to integers, singletons to 0.
    pub fn position(&self) -> Rational {
        match &self.fiber {
            FiberCoord::Singleton => Rational::zero(),
            FiberCoord::Index(i) => Rational::integer(*i as i64),
            FiberCoord::Coord(t) => t.clone(),
        }
    }
}

impl fmt::Display for XPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.fiber {
            FiberCoord::Singleton => write!(f, "({})", self.base),
            FiberCoord::Index(i) => write!(f, "({}, #{i})", self.base),
            FiberCoord::Coord(t) => write!(f, "({}, {t})", self.base),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FiberEntry {
    at: Rational,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    size: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    model: String,
    #[serde(default)]
    fibers: Vec<FiberEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    topology: Option<TopologyMode>,
}

impl TryFrom<SpaceRepr> for FiberedSpaceModel {
    type Error = Error;

    fn try_from(repr: SpaceRepr) -> Result<Self> {
        let (name, mode, default) = match repr.model.as_str() {
            "lex_square" => (ModelName::LexSquare, TopologyMode::Order, FiberKind::Interval),
            "double_arrow" => (ModelName::DoubleArrow, TopologyMode::Order, FiberKind::FiniteChain(2)),
            "double_circle" => (ModelName::DoubleCircle, TopologyMode::DoubleCircle, FiberKind::FiniteChain(2)),
            "product_square" => (ModelName::ProductSquare, TopologyMode::Product, FiberKind::Interval),
            "custom" => {
                let default = repr
                    .default
                    .as_deref()
                    .ok_or_else(|| Error::Parse("custom model needs a default fiber".into()))?;
                (
                    ModelName::Custom,
                    repr.topology.unwrap_or(TopologyMode::Order),
                    FiberKind::parse_default(default)?,
                )
            }
            other => return Err(Error::Parse(format!("unknown model {other:?}"))),
        };
        if name != ModelName::Custom {
            if let Some(d) = &repr.default {
                if FiberKind::parse_default(d)? != default {
                    return Err(Error::Parse(format!("{} has default fiber {}", repr.model, default.default_label())));
                }
            }
            if repr.topology.is_some_and(|t| t != mode) {
                return Err(Error::Parse(format!("{} has a fixed topology", repr.model)));
            }
        }
        let explicit = repr
            .fibers
            .into_iter()
            .map(|e| Ok((e.at, FiberKind::parse(&e.kind, e.size)?)))
            .collect::<Result<Vec<_>>>()?;
        FiberedSpaceModel::build(name, mode, default, explicit)
    }
}

impl From<FiberedSpaceModel> for SpaceRepr {
    fn from(m: FiberedSpaceModel) -> Self {
        let fibers = m
            .explicit
            .iter()
            .map(|(at, kind)| {
                let (kind, size) = match kind {
                    FiberKind::Singleton => ("singleton", None),
                    FiberKind::Interval => ("interval", None),
                    FiberKind::FiniteChain(k) => ("chain", Some(*k)),
                };
                FiberEntry { at: at.clone(), kind: kind.into(), size }
            })
            .collect();
        SpaceRepr {
            model: m.name.label().into(),
            fibers,
            default: Some(m.default.default_label()),
            topology: (m.name == ModelName::Custom).then_some(m.mode),
        }
    }
}
