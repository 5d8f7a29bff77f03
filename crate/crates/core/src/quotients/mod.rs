//! Quotients `Y_A` collapsing every fiber off a finite keep set, the maps
//! `f_A`, `π_A`, and the isometry `T_A`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::RepresentableFunction;
use crate::exactnum::Rational;
use crate::oscillation::oscillate;
use crate::spaces::{FiberCoord, FiberKind, FiberedSpaceModel, TopologyMode, XPoint};

/// `Y_A` together with the model it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientModel {
    parent: FiberedSpaceModel,
    keep: BTreeSet<Rational>,
    model: FiberedSpaceModel,
}

pub fn build_quotient(parent: &FiberedSpaceModel, keep: &BTreeSet<Rational>) -> Result<QuotientModel> {
    if parent.mode() == TopologyMode::Product {
        return Err(Error::UnsupportedTopology(
            "collapsing product fibers does not give a Hausdorff quotient".into(),
        ));
    }
    for a in keep {
        parent.check_base(a)?;
    }
    let keep: BTreeSet<Rational> = keep.iter().map(|a| parent.normalize_base(a)).collect();
    let explicit: Vec<(Rational, FiberKind)> = keep.iter().map(|a| (a.clone(), parent.fiber_at(a))).collect();
    let model = FiberedSpaceModel::custom(parent.mode(), FiberKind::Singleton, explicit)?;
    Ok(QuotientModel { parent: parent.clone(), keep, model })
}

impl QuotientModel {
    pub fn parent(&self) -> &FiberedSpaceModel {
        &self.parent
    }

    pub fn keep(&self) -> &BTreeSet<Rational> {
        &self.keep
    }

    pub fn model(&self) -> &FiberedSpaceModel {
        &self.model
    }

    /// `Y_{A,K}`: collapse again, keeping only `K`.
    pub fn further(&self, k: &BTreeSet<Rational>) -> Result<QuotientModel> {
        build_quotient(&self.model, k)
    }

    /// `f_A`: a point of the parent to its class in the quotient.
    pub fn collapse(&self, p: &XPoint) -> Result<XPoint> {
        self.parent.check_point(p)?;
        let p = self.parent.normalize_point(p);
        if self.model.fiber_at(&p.base).is_trivial() {
            Ok(XPoint::base_only(p.base))
        } else {
            Ok(p)
        }
    }

    /// `π_A`: a quotient point to its base point.
    pub fn project(&self, z: &XPoint) -> Result<Rational> {
        self.model.check_point(z)?;
        Ok(self.model.normalize_base(&z.base))
    }

    /// An exact compatible metric on the quotient.
    ///
    /// Order mode: distance along the line obtained by opening each kept fiber
    /// into a unit gap. Double-circle mode: circular base distance, plus one for
    /// each isolated point involved.
    pub fn metric(&self, z1: &XPoint, z2: &XPoint) -> Result<Rational> {
        self.model.check_point(z1)?;
        self.model.check_point(z2)?;
        let z1 = self.model.normalize_point(z1);
        let z2 = self.model.normalize_point(z2);
        match self.model.mode() {
            TopologyMode::Order => Ok((self.line_position(&z1) - self.line_position(&z2)).abs()),
            _ => {
                if z1 == z2 {
                    return Ok(Rational::zero());
                }
                let d = (&z1.base - &z2.base).abs();
                let circ = std::cmp::min(d.clone(), Rational::one() - d);
                let upper = |z: &XPoint| match z.fiber {
                    FiberCoord::Index(1) => Rational::one(),
                    _ => Rational::zero(),
                };
                Ok(circ + upper(&z1) + upper(&z2))
            }
        }
    }

    fn line_position(&self, z: &XPoint) -> Rational {
        let before = self.model.explicit_fibers().range(..z.base.clone()).count() as i64;
        let kind = self.model.fiber_at(&z.base);
        let within = if kind.is_trivial() { Rational::zero() } else { z.position() / kind.max_position() };
        &z.base + Rational::integer(before) + within
    }
}

/// Metrizability of a model with a finite explicit fiber table.
pub fn is_metrizable(model: &FiberedSpaceModel) -> bool {
    model.default_kind().is_trivial() || model.mode() == TopologyMode::Product
}

/// `T_A h`, with the isometry and fiber-image equalities already checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub quotient: QuotientModel,
    pub function: RepresentableFunction,
}

/// `T_A h = h ∘ f_A⁻¹` for `h` with oscillation support inside `A`.
pub fn transfer(h: &RepresentableFunction, keep: &BTreeSet<Rational>) -> Result<Transfer> {
    let profile = oscillate(h)?;
    let quotient = build_quotient(h.space(), keep)?;
    let support = profile.support().expect("finite in supported modes");
    if let Some(a) = support.iter().find(|a| !quotient.keep.contains(*a)) {
        return Err(Error::Membership(format!("oscillation support point {a} lies outside the keep set")));
    }
    let mut base = h.base().clone();
    let mut fibers = BTreeMap::new();
    for (a, f) in h.fibers() {
        if quotient.keep.contains(a) {
            fibers.insert(a.clone(), f.clone());
        } else if h.space().mode() == TopologyMode::Order {
            // a constant fiber collapses to its value
            let (v, _) = f.range();
            base = base.with_value_at(a, v)?.simplified();
        }
    }
    let function = RepresentableFunction::with_parts(quotient.model.clone(), base, fibers, Rational::zero());
    if let Err(e) = function.ensure_valid() {
        return Err(Error::Invariant(format!("transferred function is discontinuous: {e}")));
    }
    if function.sup_norm() != h.sup_norm() {
        return Err(Error::Invariant("T_A changed the sup norm".into()));
    }
    for y in &quotient.keep {
        if function.fiber_range(y)? != h.fiber_range(y)? {
            return Err(Error::Invariant(format!("fiber images differ at {y}")));
        }
    }
    Ok(Transfer { quotient, function })
}

/// Linearity defect `‖T_A(Σ cᵢhᵢ) − Σ cᵢ·T_A hᵢ‖∞`.
pub fn linearity_defect(
    coeffs: &[Rational],
    hs: &[&RepresentableFunction],
    keep: &BTreeSet<Rational>,
) -> Result<Rational> {
    let combined = RepresentableFunction::linear_combine(coeffs, hs)?;
    let lhs = transfer(&combined, keep)?.function;
    let images = hs
        .iter()
        .map(|h| transfer(h, keep).map(|t| t.function))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&RepresentableFunction> = images.iter().collect();
    let rhs = RepresentableFunction::linear_combine(coeffs, &refs)?;
    lhs.distance(&rhs)
}
