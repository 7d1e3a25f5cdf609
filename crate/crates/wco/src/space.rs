//! Measure models and weighted systems.
//!
//! A system is a discrete measure space (finite atom list, or a finite head
//! followed by a geometric tail), a total self-map `phi` of the atoms, and a
//! per-atom squared weight `usq = |u|^2`. Only `|u|^2` ever enters the
//! analysis, so weights are stored squared and stay inside the scalar field.

use std::collections::BTreeSet;

use crate::calculus::{self, AtomTable};
use crate::error::{Error, Result};
use crate::scalar::{Ext, Scalar};

/// Total self-map rule on the tail atoms `k >= head_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMap {
    /// Every tail atom maps to the head atom `c`.
    Constant(usize),
    /// `phi(k) = k - d` on the tail (requires `head_len >= d`).
    ShiftDown(usize),
    /// `phi(k) = k + d` on the tail.
    ShiftUp(usize),
}

/// Geometric rule `k >= head_len  ->  coeff * ratio^(k - head_len)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoRule<K> {
    pub coeff: K,
    pub ratio: K,
}

/// Unvalidated description of a weighted composition system.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightedSystem<K> {
    Finite {
        masses: Vec<K>,
        phi: Vec<usize>,
        usq: Vec<K>,
    },
    GeometricTail {
        head_masses: Vec<K>,
        head_phi: Vec<usize>,
        head_usq: Vec<K>,
        tail_mass: GeoRule<K>,
        tail_usq: GeoRule<K>,
        tail_map: TailMap,
    },
}

/// A system whose invariants have been checked.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidatedSystem<K> {
    Finite(FiniteSystem<K>),
    Tail(TailSystem<K>),
}

impl<K: Scalar> ValidatedSystem<K> {
    pub fn as_finite(&self) -> Option<&FiniteSystem<K>> {
        match self {
            ValidatedSystem::Finite(s) => Some(s),
            ValidatedSystem::Tail(_) => None,
        }
    }

    pub fn as_tail(&self) -> Option<&TailSystem<K>> {
        match self {
            ValidatedSystem::Tail(s) => Some(s),
            ValidatedSystem::Finite(_) => None,
        }
    }
}

/// Checks every type invariant and returns the validated system.
pub fn validate<K: Scalar>(system: WeightedSystem<K>) -> Result<ValidatedSystem<K>> {
    match system {
        WeightedSystem::Finite { masses, phi, usq } => {
            FiniteSystem::new(masses, phi, usq).map(ValidatedSystem::Finite)
        }
        WeightedSystem::GeometricTail {
            head_masses,
            head_phi,
            head_usq,
            tail_mass,
            tail_usq,
            tail_map,
        } => TailSystem::new(head_masses, head_phi, head_usq, tail_mass, tail_usq, tail_map)
            .map(ValidatedSystem::Tail),
    }
}

/// Finite atomic measure space with a weighted self-map.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem<K> {
    masses: Vec<K>,
    phi: Vec<usize>,
    usq: Vec<K>,
}

impl<K: Scalar> FiniteSystem<K> {
    pub fn new(masses: Vec<K>, phi: Vec<usize>, usq: Vec<K>) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::InvalidMass { atom: 0 });
        }
        for (atom, m) in masses.iter().enumerate() {
            if !m.is_admissible() || !m.sign_with(0.0).is_positive() {
                return Err(Error::InvalidMass { atom });
            }
        }
        if phi.len() != n || usq.len() != n {
            return Err(Error::InvalidMap {
                atom: phi.len().min(usq.len()),
                target: 0,
                size: n,
            });
        }
        for (atom, &target) in phi.iter().enumerate() {
            if target >= n {
                return Err(Error::InvalidMap {
                    atom,
                    target,
                    size: n,
                });
            }
        }
        for (atom, w) in usq.iter().enumerate() {
            if !w.is_admissible() || w.sign_with(0.0).is_negative() {
                return Err(Error::InvalidTail(format!(
                    "usq({atom}) must be nonnegative"
                )));
            }
        }
        Ok(FiniteSystem { masses, phi, usq })
    }

    pub fn atom_count(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, k: usize) -> &K {
        &self.masses[k]
    }

    pub fn usq(&self, k: usize) -> &K {
        &self.usq[k]
    }

    pub fn phi(&self, k: usize) -> usize {
        self.phi[k]
    }

    pub fn masses(&self) -> &[K] {
        &self.masses
    }

    pub fn usq_values(&self) -> &[K] {
        &self.usq
    }

    pub fn phi_map(&self) -> &[usize] {
        &self.phi
    }

    /// The composition system over the same space: `usq` identically one.
    pub fn with_unit_weight(&self) -> FiniteSystem<K> {
        FiniteSystem {
            masses: self.masses.clone(),
            phi: self.phi.clone(),
            usq: vec![K::one(); self.atom_count()],
        }
    }

    pub fn phi_is_injective(&self) -> bool {
        let mut seen = vec![false; self.atom_count()];
        for &t in &self.phi {
            if seen[t] {
                return false;
            }
            seen[t] = true;
        }
        true
    }
}

/// Infinite atomic space: explicit head `0..head_len`, geometric tail beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSystem<K> {
    head_masses: Vec<K>,
    head_phi: Vec<usize>,
    head_usq: Vec<K>,
    tail_mass: GeoRule<K>,
    tail_usq: GeoRule<K>,
    map: TailMap,
}

impl<K: Scalar> TailSystem<K> {
    pub fn new(
        head_masses: Vec<K>,
        head_phi: Vec<usize>,
        head_usq: Vec<K>,
        tail_mass: GeoRule<K>,
        tail_usq: GeoRule<K>,
        map: TailMap,
    ) -> Result<Self> {
        let k = head_masses.len();
        if k == 0 {
            return Err(Error::InvalidTail("head must contain at least one atom".into()));
        }
        if head_phi.len() != k || head_usq.len() != k {
            return Err(Error::InvalidTail(
                "head phi/usq tables must match the head length".into(),
            ));
        }
        for (atom, m) in head_masses.iter().enumerate() {
            if !m.is_admissible() || !m.sign_with(0.0).is_positive() {
                return Err(Error::InvalidMass { atom });
            }
        }
        for (atom, w) in head_usq.iter().enumerate() {
            if !w.is_admissible() || w.sign_with(0.0).is_negative() {
                return Err(Error::InvalidTail(format!(
                    "usq({atom}) must be nonnegative"
                )));
            }
        }
        if !tail_mass.coeff.is_admissible() || !tail_mass.coeff.sign_with(0.0).is_positive() {
            return Err(Error::InvalidTail("tail mass coefficient must be positive".into()));
        }
        if !tail_mass.ratio.is_admissible() || !tail_mass.ratio.sign_with(0.0).is_positive() {
            return Err(Error::InvalidTail("tail mass ratio must be positive".into()));
        }
        if !tail_usq.coeff.is_admissible() || tail_usq.coeff.sign_with(0.0).is_negative() {
            return Err(Error::InvalidTail("tail usq coefficient must be nonnegative".into()));
        }
        if !tail_usq.ratio.is_admissible() || !tail_usq.ratio.sign_with(0.0).is_positive() {
            return Err(Error::InvalidTail("tail usq ratio must be positive".into()));
        }
        match map {
            TailMap::Constant(c) => {
                if c >= k {
                    return Err(Error::InvalidTail(format!(
                        "constant tail target {c} must lie in the head 0..{k}"
                    )));
                }
            }
            TailMap::ShiftDown(d) => {
                if d == 0 || d > k {
                    return Err(Error::InvalidTail(format!(
                        "shift-down distance {d} must satisfy 1 <= d <= head length {k}"
                    )));
                }
            }
            TailMap::ShiftUp(d) => {
                if d == 0 {
                    return Err(Error::InvalidTail("shift-up distance must be positive".into()));
                }
            }
        }
        Ok(TailSystem {
            head_masses,
            head_phi,
            head_usq,
            tail_mass,
            tail_usq,
            map,
        })
    }

    pub fn head_len(&self) -> usize {
        self.head_masses.len()
    }

    pub fn map(&self) -> TailMap {
        self.map
    }

    pub fn tail_mass_rule(&self) -> &GeoRule<K> {
        &self.tail_mass
    }

    pub fn tail_usq_rule(&self) -> &GeoRule<K> {
        &self.tail_usq
    }

    pub fn head_usq_values(&self) -> &[K] {
        &self.head_usq
    }

    fn tail_exponent(&self, k: usize) -> i32 {
        i32::try_from(k - self.head_len()).expect("atom index too large")
    }

    pub fn mass(&self, k: usize) -> K {
        if k < self.head_len() {
            self.head_masses[k].clone()
        } else {
            self.tail_mass.coeff.clone() * self.tail_mass.ratio.powi(self.tail_exponent(k))
        }
    }

    pub fn usq(&self, k: usize) -> K {
        if k < self.head_len() {
            self.head_usq[k].clone()
        } else {
            self.tail_usq.coeff.clone() * self.tail_usq.ratio.powi(self.tail_exponent(k))
        }
    }

    pub fn phi(&self, k: usize) -> usize {
        if k < self.head_len() {
            self.head_phi[k]
        } else {
            match self.map {
                TailMap::Constant(c) => c,
                TailMap::ShiftDown(d) => k - d,
                TailMap::ShiftUp(d) => k + d,
            }
        }
    }

    /// Sum over the tail segment `j >= from` of `usq_j * m_j`, in closed form.
    pub fn tail_weighted_mass(&self, from: usize) -> Ext<K> {
        debug_assert!(from >= self.head_len());
        let offset = i32::try_from(from - self.head_len()).expect("segment start too large");
        let ratio = self.tail_mass.ratio.clone() * self.tail_usq.ratio.clone();
        let coeff = self.tail_mass.coeff.clone()
            * self.tail_usq.coeff.clone()
            * ratio.powi(offset);
        K::geometric_sum(&coeff, &ratio)
    }

    /// Sum over the tail segment `j >= from` of `m_j`, in closed form.
    pub fn tail_mass(&self, from: usize) -> Ext<K> {
        debug_assert!(from >= self.head_len());
        let offset = i32::try_from(from - self.head_len()).expect("segment start too large");
        let coeff = self.tail_mass.coeff.clone() * self.tail_mass.ratio.powi(offset);
        K::geometric_sum(&coeff, &self.tail_mass.ratio)
    }

    /// Whether `phi` is injective on all of the atom set.
    pub fn phi_is_injective(&self) -> bool {
        let k = self.head_len();
        let mut head_targets = BTreeSet::new();
        for atom in 0..k {
            if !head_targets.insert(self.head_phi[atom]) {
                return false;
            }
        }
        match self.map {
            // The whole tail collapses onto one head atom.
            TailMap::Constant(_) => false,
            TailMap::ShiftDown(d) => {
                // Tail images cover every index >= head_len - d.
                head_targets.iter().all(|&t| t < k - d)
            }
            TailMap::ShiftUp(d) => head_targets.iter().all(|&t| t < k + d),
        }
    }
}

/// A set of atoms: finitely many explicit indices plus at most one full
/// tail segment `{k : k >= tail_from}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AtomSet {
    finite: BTreeSet<usize>,
    tail_from: Option<usize>,
}

impl AtomSet {
    pub fn singleton(atom: usize) -> Self {
        let mut finite = BTreeSet::new();
        finite.insert(atom);
        AtomSet {
            finite,
            tail_from: None,
        }
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.finite.contains(&atom) || self.tail_from.is_some_and(|t| atom >= t)
    }

    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && self.tail_from.is_none()
    }

    pub fn finite_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.finite.iter().copied()
    }

    pub fn tail_from(&self) -> Option<usize> {
        self.tail_from
    }

    fn insert(&mut self, atom: usize) {
        if !self.tail_from.is_some_and(|t| atom >= t) {
            self.finite.insert(atom);
        }
    }

    fn merge_tail(&mut self, from: usize) {
        self.tail_from = Some(match self.tail_from {
            Some(t) => t.min(from),
            None => from,
        });
        let t = self.tail_from.unwrap();
        self.finite.retain(|&a| a < t);
    }
}

/// The set `{j : phi^order(j) = atom}`.
///
/// `order = 0` returns the singleton. The three tail-map variants always
/// admit the finite-plus-one-segment representation, so the defensive
/// `UnsupportedTailFiber` error is unreachable for validated systems.
pub fn fiber<K: Scalar>(
    system: &ValidatedSystem<K>,
    atom: usize,
    order: usize,
) -> Result<AtomSet> {
    let mut set = AtomSet::singleton(atom);
    for _ in 0..order {
        set = match system {
            ValidatedSystem::Finite(s) => preimage_finite(s, &set),
            ValidatedSystem::Tail(s) => preimage_tail(s, &set),
        };
    }
    Ok(set)
}

fn preimage_finite<K: Scalar>(sys: &FiniteSystem<K>, set: &AtomSet) -> AtomSet {
    let mut out = AtomSet::default();
    for j in 0..sys.atom_count() {
        if set.contains(sys.phi(j)) {
            out.insert(j);
        }
    }
    out
}

fn preimage_tail<K: Scalar>(sys: &TailSystem<K>, set: &AtomSet) -> AtomSet {
    let k = sys.head_len();
    let mut out = AtomSet::default();
    for j in 0..k {
        if set.contains(sys.phi(j)) {
            out.insert(j);
        }
    }
    match sys.map() {
        TailMap::Constant(c) => {
            if set.contains(c) {
                out.merge_tail(k);
            }
        }
        TailMap::ShiftDown(d) => {
            for x in set.finite_atoms() {
                let j = x + d;
                if j >= k {
                    out.insert(j);
                }
            }
            if let Some(t) = set.tail_from() {
                out.merge_tail(k.max(t + d));
            }
        }
        TailMap::ShiftUp(d) => {
            for x in set.finite_atoms() {
                if x >= k + d {
                    out.insert(x - d);
                }
            }
            if let Some(t) = set.tail_from() {
                out.merge_tail(k.max(t.saturating_sub(d)));
            }
        }
    }
    out
}

/// Total measure of the space.
pub fn mu_total<K: Scalar>(system: &ValidatedSystem<K>) -> Ext<K> {
    match system {
        ValidatedSystem::Finite(s) => Ext::Finite(
            (0..s.atom_count())
                .map(|k| s.mass(k).clone())
                .fold(K::zero(), |acc, v| acc + v),
        ),
        ValidatedSystem::Tail(s) => {
            let head = (0..s.head_len())
                .map(|k| s.mass(k))
                .fold(K::zero(), |acc, v| acc + v);
            Ext::Finite(head).add(&s.tail_mass(s.head_len()))
        }
    }
}

/// Total weighted measure `sum_k usq_k * m_k`.
pub fn mu_u_total<K: Scalar>(system: &ValidatedSystem<K>) -> Ext<K> {
    match system {
        ValidatedSystem::Finite(s) => Ext::Finite(
            (0..s.atom_count())
                .map(|k| s.usq(k).clone() * s.mass(k).clone())
                .fold(K::zero(), |acc, v| acc + v),
        ),
        ValidatedSystem::Tail(s) => {
            let head = (0..s.head_len())
                .map(|k| s.usq(k) * s.mass(k))
                .fold(K::zero(), |acc, v| acc + v);
            Ext::Finite(head).add(&s.tail_weighted_mass(s.head_len()))
        }
    }
}

/// Graph-norm weights `w = 1 + J_1`; the measure `nu = w d(mu)` carries the
/// graph norm of the operator, so `L^2(nu)` is its natural domain.
pub fn nu_weights<K: Scalar>(system: &ValidatedSystem<K>, tol: f64) -> Result<AtomTable<K>> {
    let one = Ext::Finite(K::one());
    match calculus::j_row(system, 1, tol)? {
        AtomTable::Finite(rows) => Ok(AtomTable::Finite(
            rows.into_iter().map(|j1| j1.add(&one)).collect(),
        )),
        AtomTable::Tail(table) => Ok(AtomTable::Tail(table.add_constant(&K::one()))),
    }
}
