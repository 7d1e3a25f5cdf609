//! Finite sums of geometric terms `t -> sum_i a_i * r_i^t` with exact sign
//! and supremum analysis over the integer half-line `t >= 0`.
//!
//! These represent J values, alternating sums and weight ratios on the tail
//! of a geometric-tail space, where pointwise verdicts over infinitely many
//! atoms have to be decided in finite time. The decision procedure sorts
//! terms by ratio, bounds the crossover point past which the dominant term
//! wins, and scans everything below it.

use crate::scalar::{Ext, Scalar, Sign, SignInfo};

/// Normalized geometric polynomial: pairwise distinct positive ratios in
/// strictly decreasing order, nonzero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPoly<K> {
    terms: Vec<(K, K)>, // (coefficient, ratio)
}

/// Sign of a geometric polynomial over all of `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolySign {
    Zero,
    NonNegative,
    NonPositive,
    /// Both strict signs occur; the witness is the index at which mixedness
    /// became established (the later of the first strict occurrences).
    Mixed { witness: u64 },
}

/// Supremum of a geometric polynomial over `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySup<K> {
    pub value: Ext<K>,
    /// Index attaining the supremum, or `None` when it is only a limit.
    pub attained_at: Option<u64>,
}

impl<K: Scalar> GeoPoly<K> {
    pub fn zero() -> Self {
        GeoPoly { terms: Vec::new() }
    }

    pub fn constant(a: K) -> Self {
        Self::from_terms(vec![(a, K::one())])
    }

    /// Single term `a * r^t`; requires `r > 0`.
    pub fn term(a: K, r: K) -> Self {
        Self::from_terms(vec![(a, r)])
    }

    pub fn from_terms(terms: Vec<(K, K)>) -> Self {
        let mut poly = GeoPoly { terms };
        poly.normalize();
        poly
    }

    fn normalize(&mut self) {
        for (_, r) in &self.terms {
            assert!(
                r.sign_with(0.0).is_positive(),
                "geometric ratios must be positive"
            );
        }
        self.terms.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("ratios are finite and comparable")
        });
        let mut merged: Vec<(K, K)> = Vec::with_capacity(self.terms.len());
        for (a, r) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((acc, ratio)) if *ratio == r => *acc = acc.clone() + a,
                _ => merged.push((a, r)),
            }
        }
        merged.retain(|(a, _)| !a.is_zero());
        self.terms = merged;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(K, K)] {
        &self.terms
    }

    pub fn eval(&self, t: u64) -> K {
        let e = i32::try_from(t).expect("evaluation index too large");
        self.terms
            .iter()
            .map(|(a, r)| a.clone() * r.powi(e))
            .fold(K::zero(), |acc, v| acc + v)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(terms)
    }

    pub fn scale(&self, factor: &K) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(a, r)| (a.clone() * factor.clone(), r.clone()))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(&(K::zero() - K::one()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, r) in &self.terms {
            for (b, s) in &other.terms {
                terms.push((a.clone() * b.clone(), r.clone() * s.clone()));
            }
        }
        Self::from_terms(terms)
    }

    /// The polynomial `t -> p(t + 1)`.
    pub fn shift_one(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(a, r)| (a.clone() * r.clone(), r.clone()))
                .collect(),
        )
    }

    /// Rebases the half-line: returns `q` with `q(t) = p(t + offset)`.
    pub fn rebase(&self, offset: u64) -> Self {
        let e = i32::try_from(offset).expect("offset too large");
        Self::from_terms(
            self.terms
                .iter()
                .map(|(a, r)| (a.clone() * r.powi(e), r.clone()))
                .collect(),
        )
    }

    /// Limit as `t -> inf`: finite value, `+inf`, or `None` for `-inf`.
    pub fn limit(&self) -> Option<Ext<K>> {
        match self.terms.first() {
            None => Some(Ext::zero()),
            Some((a, r)) => {
                if *r > K::one() {
                    if a.sign_with(0.0).is_positive() {
                        Some(Ext::Infinite)
                    } else {
                        None
                    }
                } else if *r == K::one() {
                    Some(Ext::Finite(a.clone()))
                } else {
                    Some(Ext::zero())
                }
            }
        }
    }

    /// Sign of the leading term together with a crossover index `t0`:
    /// for every `t >= t0` the polynomial has that strict sign.
    ///
    /// Bound: with ratios `r1 > r2 >= ...` it suffices that
    /// `|a1| (r1/r2)^t > sum_{i>=2} |a_i|`, and the left side is increasing.
    pub fn eventual_sign(&self) -> (Sign, u64) {
        match self.terms.len() {
            0 => (Sign::Zero, 0),
            1 => {
                let s = self.terms[0].0.sign_with(0.0).sign;
                (s, 0)
            }
            _ => {
                let lead = &self.terms[0];
                let second_ratio = self.terms[1].1.clone();
                let rest: K = self
                    .terms
                    .iter()
                    .skip(1)
                    .map(|(a, _)| a.abs())
                    .fold(K::zero(), |acc, v| acc + v);
                let quotient = lead.1.clone() / second_ratio;
                let mut bound = lead.0.abs();
                let mut t0 = 0u64;
                while bound <= rest {
                    bound = bound * quotient.clone();
                    t0 += 1;
                    assert!(t0 < 100_000, "crossover bound failed to converge");
                }
                (lead.0.sign_with(0.0).sign, t0)
            }
        }
    }

    /// Decides the sign of the polynomial over all integers `t >= 0`.
    pub fn sign_over(&self, tol: f64) -> PolySign {
        if self.is_zero() {
            return PolySign::Zero;
        }
        let (eventual, t0) = self.eventual_sign();
        let mut first_pos: Option<u64> = None;
        let mut first_neg: Option<u64> = None;
        for t in 0..t0 {
            match self.eval(t).sign_with(tol).sign {
                Sign::Positive => first_pos.get_or_insert(t),
                Sign::Negative => first_neg.get_or_insert(t),
                Sign::Zero => continue,
            };
        }
        match eventual {
            Sign::Positive => first_pos.get_or_insert(t0),
            Sign::Negative => first_neg.get_or_insert(t0),
            // A multi-term polynomial has a nonzero leading coefficient, so
            // Sign::Zero only happens for tolerance-snapped float leads;
            // treat the tail as zero then.
            Sign::Zero => &mut 0,
        };
        match (first_pos, first_neg) {
            (None, None) => PolySign::Zero,
            (Some(_), None) => PolySign::NonNegative,
            (None, Some(_)) => PolySign::NonPositive,
            (Some(p), Some(n)) => PolySign::Mixed {
                witness: p.max(n),
            },
        }
    }

    /// Exact supremum over `t >= 0`.
    ///
    /// The first difference `p(t+1) - p(t)` is itself a geometric polynomial,
    /// so past its crossover the polynomial is monotone: if eventually
    /// nonincreasing the supremum sits in the scanned prefix, otherwise it is
    /// the limit (possibly `+inf`).
    pub fn sup(&self) -> PolySup<K> {
        if self.is_zero() {
            return PolySup {
                value: Ext::zero(),
                attained_at: Some(0),
            };
        }
        let diff = self.shift_one().sub(self);
        let (diff_sign, t1) = diff.eventual_sign();
        let mut best = self.eval(0);
        let mut best_at = 0u64;
        for t in 1..=t1 {
            let v = self.eval(t);
            if v > best {
                best = v;
                best_at = t;
            }
        }
        if diff_sign == Sign::Positive {
            // Strictly increasing beyond t1: compare the prefix max with the
            // limit, which is approached but never attained.
            match self.limit() {
                Some(Ext::Infinite) => PolySup {
                    value: Ext::Infinite,
                    attained_at: None,
                },
                Some(Ext::Finite(limit)) => {
                    if best >= limit {
                        PolySup {
                            value: Ext::Finite(best),
                            attained_at: Some(best_at),
                        }
                    } else {
                        PolySup {
                            value: Ext::Finite(limit),
                            attained_at: None,
                        }
                    }
                }
                None => unreachable!("increasing polynomial cannot tend to -inf"),
            }
        } else {
            PolySup {
                value: Ext::Finite(best),
                attained_at: Some(best_at),
            }
        }
    }
}

/// Sign of `p` over atoms `k >= from`, reporting the witness as an absolute
/// atom index (`p` is indexed relative to `from`).
pub fn geopoly_sign<K: Scalar>(p: &GeoPoly<K>, from: usize, tol: f64) -> PolySign {
    match p.sign_over(tol) {
        PolySign::Mixed { witness } => PolySign::Mixed {
            witness: witness + from as u64,
        },
        other => other,
    }
}

/// Sign info of a single evaluation, for float-mode fuzz tracking.
pub fn eval_sign<K: Scalar>(p: &GeoPoly<K>, t: u64, tol: f64) -> SignInfo {
    p.eval(t).sign_with(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;

    fn rat(p: i64, q: i64) -> BigRational {
        <BigRational as Scalar>::ratio(p, q)
    }

    #[test]
    fn constant_negative_is_nonpositive() {
        let p = GeoPoly::constant(rat(-1, 1));
        assert_eq!(p.sign_over(0.0), PolySign::NonPositive);
    }

    #[test]
    fn empty_poly_is_zero() {
        let p: GeoPoly<BigRational> = GeoPoly::zero();
        assert_eq!(p.sign_over(0.0), PolySign::Zero);
        assert_eq!(p.sup().value, Ext::zero());
    }

    #[test]
    fn mixed_sign_with_witness() {
        // 1*1^t - 2*(1/2)^t: t=0 -> -1, t=1 -> 0, t=2 -> 1/2 > 0.
        let p = GeoPoly::from_terms(vec![(rat(1, 1), rat(1, 1)), (rat(-2, 1), rat(1, 2))]);
        assert_eq!(p.eval(0), rat(-1, 1));
        assert_eq!(p.eval(1), rat(0, 1));
        assert_eq!(p.eval(2), rat(1, 2));
        assert_eq!(p.sign_over(0.0), PolySign::Mixed { witness: 2 });
        assert_eq!(geopoly_sign(&p, 0, 0.0), PolySign::Mixed { witness: 2 });
    }

    #[test]
    fn merging_cancels_terms() {
        let p = GeoPoly::from_terms(vec![(rat(3, 1), rat(1, 2)), (rat(-3, 1), rat(2, 4))]);
        assert!(p.is_zero());
    }

    #[test]
    fn sup_of_decaying_term_is_at_zero() {
        let p = GeoPoly::term(rat(5, 1), rat(1, 3));
        let sup = p.sup();
        assert_eq!(sup.value, Ext::Finite(rat(5, 1)));
        assert_eq!(sup.attained_at, Some(0));
    }

    #[test]
    fn sup_of_growing_term_is_infinite() {
        let p = GeoPoly::term(rat(1, 2), rat(3, 2));
        let sup = p.sup();
        assert_eq!(sup.value, Ext::Infinite);
        assert_eq!(sup.attained_at, None);
    }

    #[test]
    fn sup_approaching_limit_from_below() {
        // 1 - (1/2)^t increases to 1 but never attains it.
        let p = GeoPoly::from_terms(vec![(rat(1, 1), rat(1, 1)), (rat(-1, 1), rat(1, 2))]);
        let sup = p.sup();
        assert_eq!(sup.value, Ext::Finite(rat(1, 1)));
        assert_eq!(sup.attained_at, None);
    }

    #[test]
    fn sup_with_interior_maximum() {
        // 4*(1/2)^t - 4*(1/4)^t: 0 at t=0, 1 at t=1, 3/4 at t=2, decays.
        let p = GeoPoly::from_terms(vec![(rat(4, 1), rat(1, 2)), (rat(-4, 1), rat(1, 4))]);
        let sup = p.sup();
        assert_eq!(sup.value, Ext::Finite(rat(1, 1)));
        assert_eq!(sup.attained_at, Some(1));
    }

    #[test]
    fn rebase_matches_shifted_eval() {
        let p = GeoPoly::from_terms(vec![(rat(2, 1), rat(1, 2)), (rat(1, 1), rat(3, 1))]);
        let q = p.rebase(3);
        for t in 0..6 {
            assert_eq!(q.eval(t), p.eval(t + 3));
        }
    }

    #[test]
    fn product_matches_pointwise_product() {
        let p = GeoPoly::from_terms(vec![(rat(1, 1), rat(1, 2)), (rat(-1, 1), rat(1, 3))]);
        let q = GeoPoly::from_terms(vec![(rat(2, 1), rat(1, 1)), (rat(1, 1), rat(1, 2))]);
        let pq = p.mul(&q);
        for t in 0..8 {
            assert_eq!(pq.eval(t), p.eval(t) * q.eval(t));
        }
    }
}
