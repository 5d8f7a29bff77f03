//! Day's norm on finitely supported vectors of `c₀(Γ)` and LUR probes.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exactnum::Rational;

/// A finitely supported vector; zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VectorRepr", into = "VectorRepr")]
pub struct SparseVector {
    entries: BTreeMap<String, Rational>,
}

impl SparseVector {
    pub fn zero() -> Self {
        SparseVector::default()
    }

    pub fn from_entries<S: Into<String>>(entries: impl IntoIterator<Item = (S, Rational)>) -> Self {
        let mut v = SparseVector::zero();
        for (k, x) in entries {
            v.add_at(k.into(), &x);
        }
        v
    }

    /// `λ·e_γ`.
    pub fn unit(index: &str, scale: Rational) -> Self {
        Self::from_entries([(index, scale)])
    }

    fn add_at(&mut self, k: String, x: &Rational) {
        let slot = self.entries.entry(k).or_insert_with(Rational::zero);
        *slot += x;
        if slot.is_zero() {
            self.entries.retain(|_, v| !v.is_zero());
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, Rational> {
        &self.entries
    }

    pub fn get(&self, k: &str) -> Rational {
        self.entries.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        for (k, x) in &other.entries {
            out.add_at(k.clone(), x);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> SparseVector {
        if c.is_zero() {
            return SparseVector::zero();
        }
        SparseVector { entries: self.entries.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn sup_norm(&self) -> Rational {
        self.entries.values().map(Rational::abs).max().unwrap_or_else(Rational::zero)
    }

    /// Support indices ordered by decreasing `|x(γ)|`, ties by index.
    pub fn greedy_order(&self) -> Vec<&String> {
        let mut keys: Vec<&String> = self.entries.keys().collect();
        keys.sort_by(|a, b| match self.entries[*b].abs().cmp(&self.entries[*a].abs()) {
            Ordering::Equal => a.cmp(b),
            o => o,
        });
        keys
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    index: String,
    value: Rational,
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    entries: Vec<Entry>,
}

impl TryFrom<VectorRepr> for SparseVector {
    type Error = Error;

    fn try_from(r: VectorRepr) -> Result<Self, Error> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &r.entries {
            if !seen.insert(e.index.as_str()) {
                return Err(Error::Parse(format!("duplicate index {:?}", e.index)));
            }
        }
        Ok(SparseVector::from_entries(r.entries.into_iter().map(|e| (e.index, e.value))))
    }
}

impl From<SparseVector> for VectorRepr {
    fn from(v: SparseVector) -> Self {
        VectorRepr { entries: v.entries.into_iter().map(|(index, value)| Entry { index, value }).collect() }
    }
}

fn weight(rank: usize) -> Rational {
    Rational::new(1, 4).powi(rank as u32)
}

/// `‖x‖²` for Day's norm: `Σ_k 4^{−k} x(γ_k)²` over the greedy order.
pub fn day_norm_sq(x: &SparseVector) -> Rational {
    x.greedy_order()
        .into_iter()
        .enumerate()
        .map(|(i, k)| weight(i + 1) * x.entries[k].powi(2))
        .sum()
}

/// `D(x, y) = 2‖x‖² + 2‖y‖² − ‖x+y‖²`.
pub fn lur_deficiency(x: &SparseVector, y: &SparseVector) -> Rational {
    Rational::integer(2) * day_norm_sq(x) + Rational::integer(2) * day_norm_sq(y) - day_norm_sq(&x.add(y))
}

/// `‖x + y‖ ≤ ‖x‖ + ‖y‖`, decided exactly from the squared norms.
pub fn triangle_holds(x: &SparseVector, y: &SparseVector) -> bool {
    let (nx, ny) = (day_norm_sq(x), day_norm_sq(y));
    let t = day_norm_sq(&x.add(y)) - &nx - &ny;
    !t.is_positive() || t.powi(2) <= Rational::integer(4) * nx * ny
}

/// One term of a probe sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub n: usize,
    pub norm_sq: Rational,
    pub mid_norm_sq: Rational,
    pub sup_dist: Rational,
    pub deficiency: Rational,
    /// `D ≤ tol`.
    pub premise: bool,
    /// `4^{|S|}·D`, an upper bound on `‖x_n − x‖∞²` with `S` the joint support.
    pub sup_dist_sq_bound: Rational,
    /// Every coordinate satisfies `(x_n − x)(γ)² ≤ 4^{rank γ}·D`, ranks taken
    /// in the greedy order of `x + x_n`.
    pub certified: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LurReport {
    pub x_norm_sq: Rational,
    pub tol: Rational,
    pub rows: Vec<ProbeRow>,
    pub consistent: bool,
}

pub fn lur_probe(x: &SparseVector, sequence: &[SparseVector], tol: &Rational) -> LurReport {
    let rows: Vec<ProbeRow> = sequence
        .iter()
        .enumerate()
        .map(|(i, xn)| {
            let d = lur_deficiency(x, xn);
            let sum = x.add(xn);
            let diff = xn.sub(x);
            let ranks: BTreeMap<&String, usize> = sum.greedy_order().into_iter().enumerate().map(|(i, k)| (k, i + 1)).collect();
            let joint = x.entries.keys().chain(xn.entries.keys()).collect::<std::collections::BTreeSet<_>>();
            // indices outside supp(x + x_n) come after it in any optimal order
            let mut tail = ranks.len();
            let certified = joint.iter().all(|k| {
                let rank = ranks.get(*k).copied().unwrap_or_else(|| {
                    tail += 1;
                    tail
                });
                diff.get(k).powi(2) <= &d / weight(rank)
            });
            let sup_dist = diff.sup_norm();
            let bound = &d / weight(joint.len());
            let premise = d <= *tol;
            let consistent = !premise || (certified && sup_dist.powi(2) <= bound);
            ProbeRow {
                n: i + 1,
                norm_sq: day_norm_sq(xn),
                mid_norm_sq: day_norm_sq(&sum.scale(&Rational::half())),
                sup_dist,
                deficiency: d,
                premise,
                sup_dist_sq_bound: bound,
                certified,
                consistent,
            }
        })
        .collect();
    let consistent = rows.iter().all(|r| r.consistent);
    LurReport { x_norm_sq: day_norm_sq(x), tol: tol.clone(), rows, consistent }
}

/// Default probe tolerance.
pub fn default_tol() -> Rational {
    Rational::new(1, 1000)
}
