//! The fiberwise oscillation map `Ω_f`, its level sets, `c₀` membership and
//! the full-closedness analyzer.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exactnum::{EndpointsMode, PlFunction, RangeAcc, Rational};
use crate::functions::sampling::{random_function, SampleParams};
use crate::functions::RepresentableFunction;
use crate::spaces::{BaseInterval, FiberRange, FiberedSpaceModel, TopologyMode, XPoint};

/// A base interval on which some level set is all of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfiniteWitness {
    pub interval: [Rational; 2],
    pub epsilon: Rational,
}

impl InfiniteWitness {
    fn whole(epsilon: Rational) -> Self {
        InfiniteWitness { interval: [Rational::zero(), Rational::one()], epsilon }
    }
}

/// `Ω_f(h)`: finitely many positive values, or the same value everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub enum OscillationProfile {
    Finite(BTreeMap<Rational, Rational>),
    /// Oscillation equal to `epsilon` over the whole interval.
    Infinite(InfiniteWitness),
}

impl OscillationProfile {
    /// `Ω_f(h)(y)`.
    pub fn at(&self, y: &Rational) -> Rational {
        match self {
            OscillationProfile::Finite(m) => m.get(y).cloned().unwrap_or_else(Rational::zero),
            OscillationProfile::Infinite(w) => {
                let inside = *y >= w.interval[0] && *y <= w.interval[1];
                if inside {
                    w.epsilon.clone()
                } else {
                    Rational::zero()
                }
            }
        }
    }

    pub fn support(&self) -> Option<BTreeSet<Rational>> {
        match self {
            OscillationProfile::Finite(m) => Some(m.keys().cloned().collect()),
            OscillationProfile::Infinite(_) => None,
        }
    }

    /// `‖Ω_f(h)‖∞`.
    pub fn sup(&self) -> Rational {
        match self {
            OscillationProfile::Finite(m) => m.values().max().cloned().unwrap_or_else(Rational::zero),
            OscillationProfile::Infinite(w) => w.epsilon.clone(),
        }
    }

    /// Sup of the profile away from `keep`; finite profiles only.
    pub fn sup_outside(&self, keep: &BTreeSet<Rational>) -> Rational {
        match self {
            OscillationProfile::Finite(m) => m
                .iter()
                .filter(|(a, _)| !keep.contains(*a))
                .map(|(_, v)| v.clone())
                .max()
                .unwrap_or_else(Rational::zero),
            OscillationProfile::Infinite(w) => w.epsilon.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, OscillationProfile::Finite(_))
    }
}

#[derive(Serialize, Deserialize)]
struct SupportEntry {
    at: Rational,
    osc: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    support: Option<Vec<SupportEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    infinite: Option<InfiniteWitness>,
}

impl TryFrom<ProfileRepr> for OscillationProfile {
    type Error = Error;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        match (r.support, r.infinite) {
            (Some(s), None) => {
                if s.iter().any(|e| !e.osc.is_positive()) {
                    return Err(Error::Parse("oscillation values must be positive".into()));
                }
                Ok(OscillationProfile::Finite(s.into_iter().map(|e| (e.at, e.osc)).collect()))
            }
            (None, Some(w)) => Ok(OscillationProfile::Infinite(w)),
            _ => Err(Error::Parse("profile needs exactly one of support/infinite".into())),
        }
    }
}

impl From<OscillationProfile> for ProfileRepr {
    fn from(p: OscillationProfile) -> Self {
        match p {
            OscillationProfile::Finite(m) => ProfileRepr {
                support: Some(m.into_iter().map(|(at, osc)| SupportEntry { at, osc }).collect()),
                infinite: None,
            },
            OscillationProfile::Infinite(w) => ProfileRepr { support: None, infinite: Some(w) },
        }
    }
}

/// `osc` of `h` over the fiber at `y`. Does not validate `h`.
pub fn osc_at(h: &RepresentableFunction, y: &Rational) -> Result<Rational> {
    h.space().check_base(y)?;
    Ok(h.fiber_fn_at(y).diameter())
}

pub fn oscillate(h: &RepresentableFunction) -> Result<OscillationProfile> {
    h.ensure_valid()?;
    Ok(profile_unchecked(h))
}

pub(crate) fn profile_unchecked(h: &RepresentableFunction) -> OscillationProfile {
    if h.space().mode() == TopologyMode::Product {
        let mu = h.slope().abs();
        return if mu.is_zero() {
            OscillationProfile::Finite(BTreeMap::new())
        } else {
            OscillationProfile::Infinite(InfiniteWitness::whole(mu))
        };
    }
    OscillationProfile::Finite(
        h.fibers()
            .iter()
            .map(|(a, f)| (a.clone(), f.diameter()))
            .filter(|(_, d)| d.is_positive())
            .collect(),
    )
}

/// `H_{h,ε} = {y : Ω_f(h)(y) ≥ ε}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSet {
    Points(BTreeSet<Rational>),
    Infinite(InfiniteWitness),
}

impl LevelSet {
    pub fn points(&self) -> Option<&BTreeSet<Rational>> {
        match self {
            LevelSet::Points(p) => Some(p),
            LevelSet::Infinite(_) => None,
        }
    }
}

pub fn level_set(h: &RepresentableFunction, epsilon: &Rational) -> Result<LevelSet> {
    if !epsilon.is_positive() {
        return domain(format!("level threshold must be positive, got {epsilon}"));
    }
    Ok(level_set_of(&oscillate(h)?, epsilon))
}

pub fn level_set_of(profile: &OscillationProfile, epsilon: &Rational) -> LevelSet {
    match profile {
        OscillationProfile::Finite(m) => {
            LevelSet::Points(m.iter().filter(|(_, v)| *v >= epsilon).map(|(a, _)| a.clone()).collect())
        }
        OscillationProfile::Infinite(w) if w.epsilon >= *epsilon => {
            LevelSet::Infinite(InfiniteWitness { interval: w.interval.clone(), epsilon: epsilon.clone() })
        }
        OscillationProfile::Infinite(_) => LevelSet::Points(BTreeSet::new()),
    }
}

/// One level of the chain `K_m = H_{h,1/m}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLevel {
    pub m: u64,
    pub points: BTreeSet<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Certificate {
    /// `K_1 ⊆ … ⊆ K_M` with `K_M` the whole support.
    InC0 { chain: Vec<ChainLevel> },
    NotInC0 { witness: InfiniteWitness },
}

impl C0Certificate {
    pub fn holds(&self) -> bool {
        matches!(self, C0Certificate::InC0 { .. })
    }
}

/// Least `m ≥ 1` with `v ≥ 1/m`, so `y ∈ K_m` exactly when `m ≥ level_index(Ω(y))`.
pub(crate) fn level_index(v: &Rational) -> u64 {
    let m = v.recip().expect("positive").ceil_integer();
    u64::try_from(m).unwrap_or(u64::MAX).max(1)
}

pub fn in_c0(h: &RepresentableFunction) -> Result<C0Certificate> {
    match oscillate(h)? {
        OscillationProfile::Infinite(w) => Ok(C0Certificate::NotInC0 { witness: w }),
        OscillationProfile::Finite(m) => {
            let mut ms: BTreeSet<u64> = m.values().map(level_index).collect();
            ms.insert(1);
            let chain = ms
                .into_iter()
                .map(|k| ChainLevel { m: k, points: m.iter().filter(|(_, v)| level_index(v) <= k).map(|(a, _)| a.clone()).collect() })
                .collect();
            Ok(C0Certificate::InC0 { chain })
        }
    }
}

/// Diameter of `h` over the grid points of the fiber at `y`; never exceeds
/// `Ω_f(h)(y)`.
pub fn grid_diameter(h: &RepresentableFunction, y: &Rational, grid: &[Rational]) -> Result<Rational> {
    let model = h.space();
    model.check_base(y)?;
    let kind = if model.mode() == TopologyMode::Product {
        crate::spaces::FiberKind::Interval
    } else {
        model.fiber_at(y)
    };
    let max = kind.max_position();
    let mut acc = RangeAcc::default();
    for t in grid {
        if t.is_negative() || *t > max {
            return domain(format!("grid position {t} outside the fiber at {y}"));
        }
        let p = match kind {
            crate::spaces::FiberKind::Singleton => XPoint::base_only(y.clone()),
            crate::spaces::FiberKind::FiniteChain(_) => {
                if !t.is_integer() {
                    return domain(format!("chain position {t} is not an index"));
                }
                XPoint::index(y.clone(), u32::try_from(t.numer()).map_err(|_| Error::Domain("index too large".into()))?)
            }
            crate::spaces::FiberKind::Interval => XPoint::coord(y.clone(), t.clone()),
        };
        acc.push(h.eval(&p)?);
    }
    Ok(acc.get().map(|(lo, hi)| hi - lo).unwrap_or_else(Rational::zero))
}

/// A closed subset `base × fiber` of the product square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedBox {
    pub base: BaseInterval,
    pub fiber: FiberRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum FullClosedness {
    FullyClosed {
        /// Random functions checked for finite level sets.
        sampled: usize,
        seed: u64,
    },
    NotFullyClosed {
        a: ClosedBox,
        b: ClosedBox,
        g: RepresentableFunction,
        epsilon: Rational,
        /// `f(A) ∩ f(B)`.
        common_image: BaseInterval,
    },
}

impl FullClosedness {
    pub fn is_fully_closed(&self) -> bool {
        matches!(self, FullClosedness::FullyClosed { .. })
    }

    /// Symbolic checks of a non-closedness certificate; empty for `FullyClosed`.
    pub fn verify(&self) -> Vec<(&'static str, bool)> {
        let FullClosedness::NotFullyClosed { a, b, g, epsilon, common_image } = self else {
            return Vec::new();
        };
        let image = |c: &ClosedBox| c.base.clone();
        let box_range = |c: &ClosedBox| -> Option<(Rational, Rational)> {
            let (lo, hi) = g.base().range(&c.base.lo, &c.base.hi, EndpointsMode::ValuesOnly).ok()?;
            let m = g.slope();
            let (t0, t1) = (m * &c.fiber.lo, m * &c.fiber.hi);
            Some((lo + std::cmp::min(&t0, &t1), hi + std::cmp::max(&t0, &t1)))
        };
        let closed = |c: &ClosedBox| c.base.lo_closed && c.base.hi_closed && c.fiber.lo_closed && c.fiber.hi_closed;
        let disjoint = c_disjoint(a, b);
        let meet = image(a).intersect(&image(b));
        let covers = !common_image.is_empty() && !common_image.is_point() && common_image.is_within(&meet);
        let separated = match (box_range(a), box_range(b)) {
            (Some((alo, ahi)), Some((blo, bhi))) => alo == ahi && blo == bhi && (&bhi - &alo).abs() >= *epsilon,
            _ => false,
        };
        let infinite = matches!(level_set_of(&profile_unchecked(g), epsilon), LevelSet::Infinite(_));
        vec![
            ("closed_sets", closed(a) && closed(b)),
            ("disjoint", disjoint),
            ("common_image_is_interval", covers),
            ("g_separates", separated),
            ("level_set_infinite", infinite),
        ]
    }
}

fn c_disjoint(a: &ClosedBox, b: &ClosedBox) -> bool {
    a.base.intersect(&b.base).is_empty() || a.fiber.intersect(&b.fiber).is_empty()
}

/// How many random functions the analyzer checks by default.
pub const DEFAULT_SAMPLES: usize = 64;

pub fn full_closedness(model: &FiberedSpaceModel, seed: u64, samples: usize) -> Result<FullClosedness> {
    if model.mode() == TopologyMode::Product {
        let bottom = FiberRange::closed(Rational::zero(), Rational::zero());
        let top = FiberRange::closed(Rational::one(), Rational::one());
        let all = BaseInterval::closed(Rational::zero(), Rational::one());
        let g = RepresentableFunction::product(PlFunction::zero(), Rational::one());
        return Ok(FullClosedness::NotFullyClosed {
            a: ClosedBox { base: all.clone(), fiber: bottom },
            b: ClosedBox { base: all.clone(), fiber: top },
            g,
            epsilon: Rational::one(),
            common_image: all,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = SampleParams::default();
    for _ in 0..samples {
        let h = random_function(&mut rng, model, &params);
        let profile = oscillate(&h)?;
        let OscillationProfile::Finite(m) = &profile else {
            return Err(Error::Invariant("sampled function has an infinite oscillation profile".into()));
        };
        for eps in m.values() {
            match level_set_of(&profile, eps) {
                LevelSet::Points(p) if p.iter().all(|a| h.fibers().contains_key(a)) => {}
                _ => return Err(Error::Invariant(format!("level set at {eps} is not a finite subset of the active set"))),
            }
        }
    }
    Ok(FullClosedness::FullyClosed { sampled: samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;
    use crate::functions::specimens::*;

    #[test]
    fn oscillate_examples() {
        let p = oscillate(&unit_jump()).unwrap();
        assert_eq!(p, OscillationProfile::Finite([(q(1, 2), q(1, 1))].into()));
        let c = RepresentableFunction::constant(FiberedSpaceModel::lex_square(), q(2, 3));
        assert_eq!(oscillate(&c).unwrap(), OscillationProfile::Finite(BTreeMap::new()));
        let p2 = oscillate(&arrow_jump()).unwrap();
        assert_eq!(p2.at(&q(1, 4)), q(1, 3));
        assert_eq!(p2.support().unwrap().len(), 1);
    }

    #[test]
    fn level_set_examples() {
        let h4 = two_fibers();
        assert_eq!(level_set(&h4, &q(1, 3)).unwrap(), LevelSet::Points([q(1, 3)].into()));
        let big = h4.sup_norm() * q(2, 1) + q(1, 1);
        assert_eq!(level_set(&h4, &big).unwrap(), LevelSet::Points(BTreeSet::new()));
        match level_set(&product_coordinate(), &q(1, 1)).unwrap() {
            LevelSet::Infinite(w) => assert_eq!(w.interval, [q(0, 1), q(1, 1)]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(level_set(&h4, &q(0, 1)), Err(Error::Domain(_))));
        assert!(matches!(level_set(&h4, &q(-1, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn c0_examples() {
        match in_c0(&unit_jump()).unwrap() {
            C0Certificate::InC0 { chain } => {
                assert_eq!(chain[0], ChainLevel { m: 1, points: [q(1, 2)].into() });
            }
            other => panic!("{other:?}"),
        }
        match in_c0(&product_coordinate()).unwrap() {
            C0Certificate::NotInC0 { witness } => assert_eq!(witness.epsilon, q(1, 1)),
            other => panic!("{other:?}"),
        }
        let c = RepresentableFunction::constant(FiberedSpaceModel::double_arrow(), q(1, 1));
        match in_c0(&c).unwrap() {
            C0Certificate::InC0 { chain } => assert!(chain.iter().all(|l| l.points.is_empty())),
            other => panic!("{other:?}"),
        }
        match in_c0(&two_fibers()).unwrap() {
            C0Certificate::InC0 { chain } => {
                let ms: Vec<u64> = chain.iter().map(|l| l.m).collect();
                assert_eq!(ms, vec![1, 2, 4]);
                assert_eq!(chain[2].points.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn analyzer_verdicts() {
        assert!(full_closedness(&FiberedSpaceModel::lex_square(), 1, 32).unwrap().is_fully_closed());
        assert!(full_closedness(&FiberedSpaceModel::double_circle(), 1, 32).unwrap().is_fully_closed());
        assert!(full_closedness(&FiberedSpaceModel::double_arrow(), 1, 32).unwrap().is_fully_closed());
        let w = full_closedness(&FiberedSpaceModel::product_square(), 1, 32).unwrap();
        assert!(!w.is_fully_closed());
        for (name, ok) in w.verify() {
            assert!(ok, "{name}");
        }
    }

    #[test]
    fn grid_lower_bound() {
        let h = unit_jump();
        let coarse = [q(0, 1), q(1, 2)];
        let fine = [q(0, 1), q(1, 2), q(1, 1)];
        assert_eq!(grid_diameter(&h, &q(1, 2), &coarse).unwrap(), q(1, 2));
        assert_eq!(grid_diameter(&h, &q(1, 2), &fine).unwrap(), q(1, 1));
    }

    #[test]
    fn profile_json() {
        let p = oscillate(&unit_jump()).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"support":[{"at":"1/2","osc":"1/1"}]}"#);
        let inf = oscillate(&product_coordinate()).unwrap();
        let text = serde_json::to_string(&inf).unwrap();
        assert_eq!(text, r#"{"infinite":{"interval":["0/1","1/1"],"epsilon":"1/1"}}"#);
        assert_eq!(serde_json::from_str::<OscillationProfile>(&text).unwrap(), inf);
    }
}
