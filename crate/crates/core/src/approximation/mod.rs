//! Fiber flattening: replace `h` near each oscillation point outside a keep
//! set `K` by an affine bridge, staying within `c·s` of `h`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::check::{all_passed, failures, Check};
use crate::error::{domain, Error, Result};
use crate::exactnum::{PlFunction, Rational, Side};
use crate::functions::RepresentableFunction;
use crate::oscillation::{level_index, level_set_of, oscillate, LevelSet, OscillationProfile};
use crate::spaces::TopologyMode;

/// Default flattening constant.
pub fn default_c() -> Rational {
    Rational::new(3, 2)
}

/// The constants tried by [`dist_bounds`], decreasing towards 1.
pub fn c_schedule() -> Vec<Rational> {
    vec![Rational::new(2, 1), Rational::new(3, 2), Rational::new(9, 8), Rational::new(17, 16)]
}

const MAX_HALVINGS: u32 = 256;

/// One replaced neighbourhood `f⁻¹([a−δ, a+δ])`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bridge {
    pub at: Rational,
    pub osc: Rational,
    pub delta: Rational,
    /// Closed base interval; when `lo > hi` it is the arc through 0 on the circle.
    pub interval: [Rational; 2],
    /// Range of `h` over the preimage of the interval.
    pub range: [Rational; 2],
}

impl Bridge {
    pub fn covers(&self, y: &Rational) -> bool {
        let [lo, hi] = &self.interval;
        if lo <= hi {
            y >= lo && y <= hi
        } else {
            y >= lo || y <= hi
        }
    }

    pub fn meets(&self, other: &Bridge) -> bool {
        other.interval.iter().any(|e| self.covers(e)) || self.interval.iter().any(|e| other.covers(e))
    }

    pub fn diameter(&self) -> Rational {
        &self.range[1] - &self.range[0]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproximationPlan {
    pub p: RepresentableFunction,
    pub keep: BTreeSet<Rational>,
    pub c: Rational,
    /// Largest oscillation of `h` off the keep set.
    pub s: Rational,
    #[serde(rename = "errorBound")]
    pub error_bound: Rational,
    #[serde(rename = "achievedError")]
    pub achieved_error: Rational,
    pub bridges: Vec<Bridge>,
    pub checks: Vec<Check>,
}

impl ApproximationPlan {
    pub fn ensure(&self) -> Result<()> {
        if all_passed(&self.checks) {
            Ok(())
        } else {
            Err(Error::Invariant(format!("flatten postconditions failed: {}", failures(&self.checks).join(", "))))
        }
    }
}

fn finite_profile(h: &RepresentableFunction) -> Result<std::collections::BTreeMap<Rational, Rational>> {
    if h.space().mode() == TopologyMode::Product {
        return Err(Error::UnsupportedTopology("flattening needs finite oscillation support".into()));
    }
    match oscillate(h)? {
        OscillationProfile::Finite(m) => Ok(m),
        OscillationProfile::Infinite(_) => Err(Error::UnsupportedTopology("infinite oscillation profile".into())),
    }
}

fn normalized_keep(h: &RepresentableFunction, keep: &BTreeSet<Rational>) -> Result<BTreeSet<Rational>> {
    keep.iter()
        .map(|a| {
            h.space().check_base(a)?;
            Ok(h.space().normalize_base(a))
        })
        .collect()
}

/// Build `p` with `supp Ω_f(p) ⊆ K` and `‖p − h‖∞ ≤ c·s`; the postconditions
/// are recorded in `checks`.
pub fn flatten(h: &RepresentableFunction, keep: &BTreeSet<Rational>, c: &Rational) -> Result<ApproximationPlan> {
    if *c <= Rational::one() {
        return Err(Error::Parameter(format!("c must exceed 1, got {c}")));
    }
    let profile = finite_profile(h)?;
    let keep = normalized_keep(h, keep)?;
    let wrap = h.space().wraps();
    let targets: Vec<(&Rational, &Rational)> = profile.iter().filter(|(a, _)| !keep.contains(*a)).collect();
    let s = targets.iter().map(|(_, v)| (*v).clone()).max().unwrap_or_else(Rational::zero);

    let mut marks: BTreeSet<Rational> = h.fibers().keys().cloned().collect();
    marks.extend(keep.iter().cloned());
    marks.insert(Rational::zero());
    if !wrap {
        marks.insert(Rational::one());
    }

    let mut base = h.base().clone();
    let mut fibers = h.fibers().clone();
    let mut bridges = Vec::new();
    for (a, osc) in targets {
        let gap = marks
            .iter()
            .filter(|m| *m != a)
            .map(|m| base_distance(a, m, wrap))
            .min()
            .unwrap_or_else(Rational::half);
        let mut delta = gap / Rational::integer(3);
        let bound = c * osc;
        let mut halvings = 0;
        let range = loop {
            let (lo, hi) = neighbourhood_range(h, a, &delta)?;
            if &hi - &lo < bound {
                break [lo, hi];
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::Invariant(format!("no admissible neighbourhood found at {a}")));
            }
            delta = delta * Rational::half();
        };
        base = bridge_base(h, &base, a, &delta, wrap)?;
        fibers.remove(a);
        let interval = if wrap {
            [wrap_point(&(a - &delta)), wrap_point(&(a + &delta))]
        } else {
            [std::cmp::max(a - &delta, Rational::zero()), std::cmp::min(a + &delta, Rational::one())]
        };
        bridges.push(Bridge { at: a.clone(), osc: osc.clone(), delta, interval, range });
    }

    let p = RepresentableFunction::with_parts(h.space().clone(), base, fibers, h.slope().clone());
    let achieved_error = p.distance(h)?;
    let error_bound = c * &s;
    let checks = flatten_checks(h, &p, &keep, &bridges, c, &achieved_error, &error_bound);
    Ok(ApproximationPlan { p, keep, c: c.clone(), s, error_bound, achieved_error, bridges, checks })
}

fn flatten_checks(
    h: &RepresentableFunction,
    p: &RepresentableFunction,
    keep: &BTreeSet<Rational>,
    bridges: &[Bridge],
    c: &Rational,
    achieved: &Rational,
    bound: &Rational,
) -> Vec<Check> {
    let valid = p.is_valid();
    let support_kept = valid
        && match oscillate(p) {
            Ok(OscillationProfile::Finite(m)) => m.keys().all(|a| keep.contains(a)),
            _ => false,
        };
    let disjoint = bridges
        .iter()
        .enumerate()
        .all(|(i, b)| bridges[i + 1..].iter().all(|o| !b.meets(o)));
    let avoids = bridges.iter().all(|b| {
        h.fibers().keys().chain(keep).filter(|m| **m != b.at).all(|m| !b.covers(m))
    });
    let local = bridges.iter().all(|b| b.diameter() < c * &b.osc);
    let within = bridges.iter().all(|b| bridge_within_range(p, b));
    vec![
        Check::new("p_valid", valid),
        Check::new("support_in_keep", support_kept),
        Check::new("bridges_disjoint", disjoint),
        Check::new("bridges_avoid_marked_points", avoids),
        Check::new("local_diameter_below_c_osc", local),
        Check::new("bridge_values_within_local_range", within),
        Check::new("error_within_c_s", achieved <= bound),
    ]
}

fn bridge_within_range(p: &RepresentableFunction, b: &Bridge) -> bool {
    let [lo, hi] = &b.interval;
    let parts: Vec<(Rational, Rational)> = if lo <= hi {
        vec![(lo.clone(), hi.clone())]
    } else {
        vec![(lo.clone(), Rational::one()), (Rational::zero(), hi.clone())]
    };
    parts.iter().all(|(l, r)| match p.range_over(l, r) {
        Ok((plo, phi)) => plo >= b.range[0] && phi <= b.range[1],
        Err(_) => false,
    })
}

fn base_distance(a: &Rational, b: &Rational, wrap: bool) -> Rational {
    let d = (a - b).abs();
    if wrap {
        std::cmp::min(d.clone(), Rational::one() - d)
    } else {
        d
    }
}

fn wrap_point(y: &Rational) -> Rational {
    if y.is_negative() {
        y + Rational::one()
    } else if *y > Rational::one() {
        y - Rational::one()
    } else {
        y.clone()
    }
}

/// Range of `h` over `f⁻¹([a−δ, a+δ])`, cut to `[0, 1]` or wrapped on the circle.
fn neighbourhood_range(h: &RepresentableFunction, a: &Rational, delta: &Rational) -> Result<(Rational, Rational)> {
    let lo = a - delta;
    let hi = a + delta;
    let one = Rational::one();
    let zero = Rational::zero();
    let mut pieces = Vec::new();
    if h.space().wraps() && lo.is_negative() {
        pieces.push((lo + &one, one.clone()));
        pieces.push((zero, hi));
    } else if h.space().wraps() && hi > one {
        pieces.push((lo, one.clone()));
        pieces.push((zero, hi - &one));
    } else {
        pieces.push((std::cmp::max(lo, zero), std::cmp::min(hi, one)));
    }
    let mut out: Option<(Rational, Rational)> = None;
    for (l, r) in pieces {
        let (plo, phi) = h.range_over(&l, &r)?;
        out = Some(match out {
            None => (plo, phi),
            Some((olo, ohi)) => (std::cmp::min(olo, plo), std::cmp::max(ohi, phi)),
        });
    }
    Ok(out.expect("at least one piece"))
}

/// The base function with the affine bridge across `[a−δ, a+δ]` spliced in.
fn bridge_base(h: &RepresentableFunction, base: &PlFunction, a: &Rational, delta: &Rational, wrap: bool) -> Result<PlFunction> {
    let one = Rational::one();
    let value = |x: &Rational| h.base().eval_unchecked(x, Side::At);
    if wrap && a.is_zero() {
        let l = &one - delta;
        let (u, w) = (value(&l), value(delta));
        let mid = (&u + &w) * Rational::half();
        let right = PlFunction::from_nodes(&[(Rational::zero(), mid.clone()), (delta.clone(), w), (one.clone(), Rational::zero())])?;
        let left = PlFunction::from_nodes(&[(Rational::zero(), Rational::zero()), (l.clone(), u), (one.clone(), mid.clone())])?;
        let spliced = base.splice(&Rational::zero(), delta, &right)?.splice(&l, &one, &left)?;
        return spliced.with_value_at(&Rational::zero(), mid.clone())?.with_value_at(&one, mid);
    }
    if a.is_zero() {
        let v = value(delta);
        let patched = base.splice(&Rational::zero(), delta, &PlFunction::constant(v.clone()))?;
        return patched.with_value_at(&Rational::zero(), v);
    }
    if *a == one {
        let l = &one - delta;
        let v = value(&l);
        let patched = base.splice(&l, &one, &PlFunction::constant(v.clone()))?;
        return patched.with_value_at(&one, v);
    }
    let (l, r) = (a - delta, a + delta);
    let patch = PlFunction::bridge(&l, &r, &value(&l), &value(&r))?;
    base.splice(&l, &r, &patch)
}

/// `lower ≤ dist(h, Z_K) ≤ upper`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistBounds {
    pub lower: Rational,
    pub upper: Rational,
    pub s: Rational,
    /// Achieved error for each `c` of the schedule, in schedule order.
    pub schedule: Vec<[Rational; 2]>,
    pub checks: Vec<Check>,
}

pub fn dist_bounds(h: &RepresentableFunction, keep: &BTreeSet<Rational>) -> Result<DistBounds> {
    let schedule = c_schedule();
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    let mut upper: Option<Rational> = None;
    let mut s = Rational::zero();
    let mut monotone = true;
    for c in &schedule {
        let plan = flatten(h, keep, c)?;
        plan.ensure()?;
        s = plan.s.clone();
        let next = match &upper {
            Some(u) => std::cmp::min(u.clone(), plan.achieved_error.clone()),
            None => plan.achieved_error.clone(),
        };
        monotone &= upper.as_ref().is_none_or(|u| next <= *u);
        upper = Some(next);
        runs.push([c.clone(), plan.achieved_error]);
    }
    let upper = upper.expect("nonempty schedule");
    let lower = &s * Rational::half();
    let c_min = schedule.iter().min().expect("nonempty schedule");
    checks.push(Check::new("lower_le_upper", lower <= upper));
    checks.push(Check::new("upper_nonincreasing", monotone));
    checks.push(Check::new("upper_le_cmin_s", upper <= c_min * &s));
    Ok(DistBounds { lower, upper, s, schedule: runs, checks })
}

/// `K_m` over the levels `m_start..=m_end` on which it is constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub m_start: u64,
    /// `None` once the support is exhausted.
    pub m_end: Option<u64>,
    pub keep: BTreeSet<Rational>,
    pub lower: Rational,
    pub upper: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    /// Decay constant: `upper ≤ c/m` is asserted for every `m`.
    pub c: Rational,
    pub checks: Vec<Check>,
}

/// The increasing chain `K_m = H_{h,1/m}` with distance bounds at every level.
pub fn bprime_chain(h: &RepresentableFunction) -> Result<ChainReport> {
    let profile = finite_profile(h)?;
    let wrapped = OscillationProfile::Finite(profile.clone());
    let mut starts: BTreeSet<u64> = profile.values().map(level_index).collect();
    starts.insert(1);
    let starts: Vec<u64> = starts.into_iter().collect();
    let c = c_schedule().into_iter().min().expect("nonempty schedule");
    let mut steps = Vec::new();
    let mut monotone = true;
    let mut decays = true;
    let mut consistent = true;
    let mut bounds_ok = true;
    for (i, &m_start) in starts.iter().enumerate() {
        let m_end = starts.get(i + 1).map(|n| n - 1);
        let keep: BTreeSet<Rational> = profile.iter().filter(|(_, v)| level_index(v) <= m_start).map(|(a, _)| a.clone()).collect();
        for m in std::iter::once(m_start).chain(m_end) {
            let eps = Rational::new(1, m as i64);
            consistent &= matches!(level_set_of(&wrapped, &eps), LevelSet::Points(ref p) if *p == keep);
        }
        if let Some(prev) = steps.last() {
            let prev: &ChainStep = prev;
            monotone &= prev.keep.is_subset(&keep);
        }
        let bounds = dist_bounds(h, &keep)?;
        bounds_ok &= all_passed(&bounds.checks);
        decays &= match m_end {
            Some(end) => bounds.upper <= &c / Rational::integer(end as i64),
            None => bounds.upper.is_zero(),
        };
        steps.push(ChainStep { m_start, m_end, keep, lower: bounds.lower, upper: bounds.upper });
    }
    let checks = vec![
        Check::new("chain_increasing", monotone),
        Check::new("chain_matches_level_sets", consistent),
        Check::new("upper_le_c_over_m", decays),
        Check::new("distance_bounds_consistent", bounds_ok),
        Check::new("exhausted_at_zero", steps.last().is_some_and(|s| s.m_end.is_none() && s.upper.is_zero())),
    ];
    Ok(ChainReport { steps, c, checks })
}

/// `Z_A ⊆ Z_B` on the samples whose support lies in `A`.
pub fn nesting_check(a: &BTreeSet<Rational>, b: &BTreeSet<Rational>, samples: &[RepresentableFunction]) -> Result<bool> {
    if !a.is_subset(b) {
        return domain("nesting needs A ⊆ B");
    }
    for q in samples {
        let Some(supp) = oscillate(q)?.support() else { continue };
        let supp: BTreeSet<Rational> = supp.iter().map(|y| q.space().normalize_base(y)).collect();
        if supp.is_subset(a) && !supp.is_subset(b) {
            return Ok(false);
        }
    }
    Ok(true)
}
