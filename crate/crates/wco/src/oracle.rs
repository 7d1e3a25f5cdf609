//! Brute-force ground truth on finite spaces.
//!
//! Everything here works in atom coordinates with the mass-weighted inner
//! product `<f, g> = sum_k f_k g_k m_k`, so only `usq` and masses appear and
//! rational mode stays exact; square roots enter only the display matrix.
//! The route is independent of the J calculus: operator powers are applied
//! to vectors, norms are summed, and the binomial Gram matrix is recovered
//! from the quadratic form by polarization.

use rand::Rng;

use crate::corpus::rng_for;
use crate::scalar::{binomial, Scalar, Sign};
use crate::space::FiniteSystem;

/// The operator `T f = u * (f o phi)` in structured form: one nonzero per
/// row, at column `target[j] = phi(j)`, with squared magnitude tracked so
/// the representation is exact in rational mode.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<K> {
    targets: Vec<usize>,
    weights_sq: Vec<K>,
    masses: Vec<K>,
}

impl<K: Scalar> OperatorMatrix<K> {
    pub fn dim(&self) -> usize {
        self.targets.len()
    }

    pub fn target(&self, row: usize) -> usize {
        self.targets[row]
    }

    pub fn weight_sq(&self, row: usize) -> &K {
        &self.weights_sq[row]
    }

    /// Matrix product `self * other` (apply `other` first is false: this is
    /// the composition `(self . other) f = self(other(f))`).
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.dim();
        OperatorMatrix {
            targets: (0..n).map(|k| other.targets[self.targets[k]]).collect(),
            weights_sq: (0..n)
                .map(|k| self.weights_sq[k].clone() * other.weights_sq[self.targets[k]].clone())
                .collect(),
            masses: self.masses.clone(),
        }
    }

    pub fn power(&self, exponent: usize) -> Self {
        let mut acc = OperatorMatrix {
            targets: (0..self.dim()).collect(),
            weights_sq: vec![K::one(); self.dim()],
            masses: self.masses.clone(),
        };
        for _ in 0..exponent {
            acc = acc.compose(self);
        }
        acc
    }

    /// Entry in the orthonormalized atom basis, for display only:
    /// `u_j * sqrt(m_j / m_k)` at `(j, phi(j))`, with `u_j = sqrt(usq_j)`.
    pub fn entry_f64(&self, row: usize, col: usize) -> f64 {
        if self.targets[row] != col {
            return 0.0;
        }
        let to_f64 = |v: &K| v.render().parse::<f64>().unwrap_or(f64::NAN);
        let w = to_f64(&self.weights_sq[row]).sqrt();
        w * (to_f64(&self.masses[row]) / to_f64(&self.masses[col])).sqrt()
    }

    /// Diagonal of `M* M` in the weighted inner product:
    /// `(1/m_j) sum_{k : phi(k) = j} usq_k m_k`. `M* M` is structurally
    /// diagonal because each row of `M` has a single nonzero.
    pub fn star_self_diagonal(&self) -> Vec<K> {
        let n = self.dim();
        let mut sums = vec![K::zero(); n];
        for k in 0..n {
            let j = self.targets[k];
            sums[j] = sums[j].clone() + self.weights_sq[k].clone() * self.masses[k].clone();
        }
        (0..n)
            .map(|j| sums[j].clone() / self.masses[j].clone())
            .collect()
    }

    /// `M* M = I`, decided exactly from squared data.
    pub fn star_product_is_identity(&self, tol: f64) -> bool {
        self.star_self_diagonal()
            .iter()
            .all(|d| (d.clone() - K::one()).sign_with(tol).is_zero())
    }

    /// `M M* = I`, decided exactly from squared data: every diagonal entry
    /// `usq_k m_k / m_phi(k)` is one, and colliding rows (same target) have
    /// vanishing weight product, which kills every off-diagonal entry.
    pub fn self_star_is_identity(&self, tol: f64) -> bool {
        let n = self.dim();
        for k in 0..n {
            let diag = self.weights_sq[k].clone() * self.masses[k].clone()
                / self.masses[self.targets[k]].clone();
            if !(diag - K::one()).sign_with(tol).is_zero() {
                return false;
            }
        }
        for k in 0..n {
            for l in (k + 1)..n {
                if self.targets[k] == self.targets[l] {
                    let prod = self.weights_sq[k].clone() * self.weights_sq[l].clone();
                    if !prod.sign_with(tol).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// The matrix of the operator on a finite space.
pub fn matrix_of<K: Scalar>(sys: &FiniteSystem<K>) -> OperatorMatrix<K> {
    OperatorMatrix {
        targets: sys.phi_map().to_vec(),
        weights_sq: sys.usq_values().to_vec(),
        masses: sys.masses().to_vec(),
    }
}

/// `||f||^2 = sum_k f_k^2 m_k`.
pub fn norm_sq<K: Scalar>(sys: &FiniteSystem<K>, f: &[K]) -> K {
    (0..sys.atom_count())
        .map(|k| f[k].clone() * f[k].clone() * sys.mass(k).clone())
        .fold(K::zero(), |acc, v| acc + v)
}

/// `||T^i f||^2` for `i = 0..=max_order`, in one incremental pass of the
/// squared coordinates: `|Tg|^2_k = usq_k |g|^2_phi(k)`.
pub fn norm_sequence<K: Scalar>(sys: &FiniteSystem<K>, f: &[K], max_order: usize) -> Vec<K> {
    let n = sys.atom_count();
    let mut gsq: Vec<K> = (0..n).map(|k| f[k].clone() * f[k].clone()).collect();
    let weighted_sum = |g: &[K]| {
        (0..n)
            .map(|k| g[k].clone() * sys.mass(k).clone())
            .fold(K::zero(), |acc, v| acc + v)
    };
    let mut norms = Vec::with_capacity(max_order + 1);
    norms.push(weighted_sum(&gsq));
    for _ in 0..max_order {
        gsq = (0..n)
            .map(|k| sys.usq(k).clone() * gsq[sys.phi(k)].clone())
            .collect();
        norms.push(weighted_sum(&gsq));
    }
    norms
}

/// `||T^n f||^2`.
pub fn iterated_norm_sq<K: Scalar>(sys: &FiniteSystem<K>, f: &[K], order: usize) -> K {
    norm_sequence(sys, f, order).pop().expect("nonempty")
}

/// `sum_i (-1)^i C(order, i) seq[i]` over a norm sequence.
fn alternating_sum<K: Scalar>(seq: &[K], order: usize) -> K {
    (0..=order)
        .map(|i| {
            let c = K::from_int(if i % 2 == 0 {
                binomial(order, i) as i64
            } else {
                -(binomial(order, i) as i64)
            });
            c * seq[i].clone()
        })
        .fold(K::zero(), |acc, v| acc + v)
}

/// The alternating binomial form
/// `Theta_n(f) = sum_i (-1)^i C(n, i) ||T^i f||^2`.
pub fn theta<K: Scalar>(sys: &FiniteSystem<K>, order: usize, f: &[K]) -> K {
    alternating_sum(&norm_sequence(sys, f, order), order)
}

/// Dense square matrix over the scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<K> {
    n: usize,
    entries: Vec<K>,
}

impl<K: Scalar> DenseMatrix<K> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            entries: vec![K::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> &K {
        &self.entries[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: K) {
        self.entries[row * self.n + col] = value;
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| i == j || self.get(i, j).sign_with(tol).is_zero())
        })
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.entries.iter().all(|v| v.sign_with(tol).is_zero())
    }

    pub fn diagonal(&self) -> Vec<K> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    /// `v^T M v`.
    pub fn quadratic(&self, v: &[K]) -> K {
        let mut acc = K::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc = acc + v[i].clone() * self.get(i, j).clone() * v[j].clone();
            }
        }
        acc
    }
}

/// Norm sequences of all polarization probes: `basis[j]` holds
/// `||T^i e_j||^2` and `pairs[(j,l)]` holds `||T^i (e_j + e_l)||^2`,
/// each for `i = 0..=max_order`. One vector iteration per probe serves
/// every order at once.
struct PolarizationData<K> {
    basis: Vec<Vec<K>>,
    pairs: Vec<((usize, usize), Vec<K>)>,
}

fn polarization_data<K: Scalar>(sys: &FiniteSystem<K>, max_order: usize) -> PolarizationData<K> {
    let n = sys.atom_count();
    let mut basis = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![K::zero(); n];
        e[j] = K::one();
        basis.push(norm_sequence(sys, &e, max_order));
    }
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for l in (j + 1)..n {
            let mut e = vec![K::zero(); n];
            e[j] = K::one();
            e[l] = K::one();
            pairs.push(((j, l), norm_sequence(sys, &e, max_order)));
        }
    }
    PolarizationData { basis, pairs }
}

impl<K: Scalar> PolarizationData<K> {
    /// Gram matrix of `f -> sum_i coeff_i ||T^i f||^2` where the alternating
    /// sum is taken at `order`: `G[j][l] = <B e_j, e_l>_m`.
    fn gram_at(&self, order: usize) -> DenseMatrix<K> {
        let n = self.basis.len();
        let mut gram = DenseMatrix::zeros(n);
        let basis_values: Vec<K> = self
            .basis
            .iter()
            .map(|seq| alternating_sum(seq, order))
            .collect();
        for (j, value) in basis_values.iter().enumerate() {
            gram.set(j, j, value.clone());
        }
        let two = K::from_int(2);
        for ((j, l), seq) in &self.pairs {
            let mixed = (alternating_sum(seq, order)
                - basis_values[*j].clone()
                - basis_values[*l].clone())
                / two.clone();
            gram.set(*j, *l, mixed.clone());
            gram.set(*l, *j, mixed);
        }
        gram
    }
}

/// Symmetric Gram matrix of the quadratic form `f -> Theta_n(f)` recovered
/// by polarization: `G[j][l] = <B_n e_j, e_l>_m` with `e_j` atom indicators.
pub fn theta_form_gram<K: Scalar>(sys: &FiniteSystem<K>, order: usize) -> DenseMatrix<K> {
    polarization_data(sys, order).gram_at(order)
}

/// Gram matrix of `f -> ||T^i f||^2`, i.e. of `(T^i)* T^i`.
pub fn power_form_gram<K: Scalar>(sys: &FiniteSystem<K>, order: usize) -> DenseMatrix<K> {
    let n = sys.atom_count();
    let data = polarization_data(sys, order);
    let mut gram = DenseMatrix::zeros(n);
    for j in 0..n {
        gram.set(j, j, data.basis[j][order].clone());
    }
    let two = K::from_int(2);
    for ((j, l), seq) in &data.pairs {
        let mixed =
            (seq[order].clone() - data.basis[*j][order].clone() - data.basis[*l][order].clone())
                / two.clone();
        gram.set(*j, *l, mixed.clone());
        gram.set(*l, *j, mixed);
    }
    gram
}

fn gram_to_operator<K: Scalar>(sys: &FiniteSystem<K>, gram: &DenseMatrix<K>) -> DenseMatrix<K> {
    let n = sys.atom_count();
    let mut b = DenseMatrix::zeros(n);
    for l in 0..n {
        for j in 0..n {
            b.set(l, j, gram.get(j, l).clone() / sys.mass(l).clone());
        }
    }
    b
}

/// The operator matrix `B_n = sum_i (-1)^i C(n,i) (T*)^i T^i` in atom
/// coordinates, from the polarized form: `B[l][j] = G[j][l] / m_l`.
///
/// Contract: `B_n` is diagonal with `B_n[k][k] = Delta_{J,n}(k)`; both facts
/// are cross-checked against the J calculus by the test suites rather than
/// assumed here.
pub fn binomial_gram<K: Scalar>(sys: &FiniteSystem<K>, order: usize) -> DenseMatrix<K> {
    gram_to_operator(sys, &theta_form_gram(sys, order))
}

/// `B_n` for every order `1..=max_order`, sharing one vector iteration per
/// polarization probe across all orders.
pub fn binomial_grams<K: Scalar>(sys: &FiniteSystem<K>, max_order: usize) -> Vec<DenseMatrix<K>> {
    let data = polarization_data(sys, max_order);
    (1..=max_order)
        .map(|order| gram_to_operator(sys, &data.gram_at(order)))
        .collect()
}

/// Exact positive-semidefiniteness of a symmetric matrix by pivoted
/// elimination with rational Schur complements. Used only as the defensive
/// fallback when a polarized Gram matrix unexpectedly fails diagonality.
pub fn is_positive_semidefinite<K: Scalar>(matrix: &DenseMatrix<K>, tol: f64) -> bool {
    let n = matrix.dim();
    let mut a = matrix.clone();
    let mut active: Vec<usize> = (0..n).collect();
    loop {
        // Largest diagonal entry among active indices.
        let mut pivot: Option<usize> = None;
        for &i in &active {
            if a.get(i, i).sign_with(tol).is_negative() {
                return false;
            }
            match pivot {
                Some(p) if a.get(i, i) <= a.get(p, p) => {}
                _ => pivot = Some(i),
            }
        }
        let Some(p) = pivot else {
            return true;
        };
        if a.get(p, p).sign_with(tol).is_zero() {
            // All remaining diagonals vanish; PSD forces the block to be zero.
            return active
                .iter()
                .all(|&i| active.iter().all(|&j| a.get(i, j).sign_with(tol).is_zero()));
        }
        let d = a.get(p, p).clone();
        active.retain(|&i| i != p);
        for &i in &active {
            for &j in &active {
                let updated = a.get(i, j).clone()
                    - a.get(i, p).clone() * a.get(p, j).clone() / d.clone();
                a.set(i, j, updated);
            }
        }
    }
}

/// `M* M = M M* = I` in the weighted inner product, decided exactly from
/// squared magnitudes and mass ratios.
pub fn unitary_check<K: Scalar>(sys: &FiniteSystem<K>, tol: f64) -> bool {
    let m = matrix_of(sys);
    m.star_product_is_identity(tol) && m.self_star_is_identity(tol)
}

/// Verdict at one order, from the matrix route.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOrderVerdict<K> {
    pub order: usize,
    pub expansive: bool,
    pub isometry: bool,
    /// Diagonal of the polarized binomial Gram matrix.
    pub diagonal: Vec<K>,
    /// Whether the polarized matrix was diagonal (it always should be).
    pub gram_diagonal: bool,
    /// True when the defensive PSD fallback decided the verdict.
    pub used_psd_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport<K> {
    pub orders: Vec<OracleOrderVerdict<K>>,
    pub trials: usize,
    pub seed: u64,
    /// Sign disagreements between sampled Theta values and the verdicts;
    /// always empty unless something is broken.
    pub trial_failures: Vec<String>,
}

impl<K: Scalar> OracleReport<K> {
    /// `(order, expansive, isometry)` triples for agreement checks.
    pub fn verdict_triples(&self) -> Vec<(usize, bool, bool)> {
        self.orders
            .iter()
            .map(|o| (o.order, o.expansive, o.isometry))
            .collect()
    }
}

/// Brute-force verdicts for orders `1..=max_order`, plus `trials` random
/// vectors per order asserting sign agreement of `Theta` with the verdict.
pub fn oracle_verdicts<K: Scalar>(
    sys: &FiniteSystem<K>,
    max_order: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> OracleReport<K> {
    let data = polarization_data(sys, max_order);
    let mut orders = Vec::with_capacity(max_order);
    let mut trial_failures = Vec::new();
    for order in 1..=max_order {
        let gram = data.gram_at(order);
        let b = gram_to_operator(sys, &gram);
        let gram_diagonal = b.is_diagonal(tol);
        let diagonal = b.diagonal();
        let (expansive, isometry, used_psd_fallback) = if gram_diagonal {
            let expansive = diagonal.iter().all(|d| !d.sign_with(tol).is_positive());
            let isometry = diagonal.iter().all(|d| d.sign_with(tol).is_zero());
            (expansive, isometry, false)
        } else {
            // Defensive fallback: decide semidefiniteness of the symmetric
            // form matrix by exact pivoted elimination.
            let neg = {
                let n = gram.dim();
                let mut m = DenseMatrix::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        m.set(i, j, K::zero() - gram.get(i, j).clone());
                    }
                }
                m
            };
            (is_positive_semidefinite(&neg, tol), gram.is_zero(tol), true)
        };

        if !expansive {
            // The worst atom is a deterministic witness: Theta at its
            // indicator must be positive.
            let worst = diagonal
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(k, _)| k)
                .unwrap();
            if !alternating_sum(&data.basis[worst], order)
                .sign_with(tol)
                .is_positive()
            {
                trial_failures.push(format!(
                    "order {order}: witness atom {worst} fails to produce positive Theta"
                ));
            }
        }

        orders.push(OracleOrderVerdict {
            order,
            expansive,
            isometry,
            diagonal,
            gram_diagonal,
            used_psd_fallback,
        });
    }

    // Random vectors: one norm sequence per trial serves every order.
    for trial in 0..trials {
        let mut rng = rng_for(seed, trial as u64);
        let f: Vec<K> = (0..sys.atom_count())
            .map(|_| K::ratio(rng.random_range(-9..=9), rng.random_range(1..=9)))
            .collect();
        let norms = norm_sequence(sys, &f, max_order);
        for verdict in &orders {
            let value = alternating_sum(&norms, verdict.order);
            let sign = value.sign_with(tol).sign;
            let bad = if verdict.isometry {
                sign != Sign::Zero
            } else if verdict.expansive {
                sign == Sign::Positive
            } else {
                false
            };
            if bad {
                trial_failures.push(format!(
                    "order {} trial {trial}: Theta = {} contradicts the verdict",
                    verdict.order,
                    value.render()
                ));
            }
        }
    }

    OracleReport {
        orders,
        trials,
        seed,
        trial_failures,
    }
}

/// Mismatches between oracle verdicts and criteria verdicts given as
/// `(order, expansive, isometry)` triples. Any entry is a defect.
pub fn agreement_failures<K: Scalar>(
    oracle: &OracleReport<K>,
    criteria: &[(usize, bool, bool)],
) -> Vec<String> {
    let mut failures = Vec::new();
    for verdict in &oracle.orders {
        match criteria.iter().find(|(o, _, _)| *o == verdict.order) {
            None => failures.push(format!("order {} missing from criteria", verdict.order)),
            Some(&(_, expansive, isometry)) => {
                if expansive != verdict.expansive {
                    failures.push(format!(
                        "order {}: oracle expansive={} but criteria say {}",
                        verdict.order, verdict.expansive, expansive
                    ));
                }
                if isometry != verdict.isometry {
                    failures.push(format!(
                        "order {}: oracle isometry={} but criteria say {}",
                        verdict.order, verdict.isometry, isometry
                    ));
                }
            }
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{delta, j_table};
    use num::rational::BigRational;

    fn rat(p: i64, q: i64) -> BigRational {
        <BigRational as Scalar>::ratio(p, q)
    }

    fn rats(values: &[(i64, i64)]) -> Vec<BigRational> {
        values.iter().map(|&(p, q)| rat(p, q)).collect()
    }

    fn s1() -> FiniteSystem<BigRational> {
        FiniteSystem::new(
            rats(&[(1, 1), (2, 1), (1, 1)]),
            vec![0, 0, 1],
            rats(&[(1, 1), (1, 1), (4, 1)]),
        )
        .unwrap()
    }

    fn two_cycle() -> FiniteSystem<BigRational> {
        FiniteSystem::new(
            rats(&[(1, 1), (1, 1)]),
            vec![1, 0],
            rats(&[(1, 1), (1, 1)]),
        )
        .unwrap()
    }

    #[test]
    fn two_cycle_matrix_is_permutation() {
        let m = matrix_of(&two_cycle());
        assert_eq!(m.entry_f64(0, 1), 1.0);
        assert_eq!(m.entry_f64(1, 0), 1.0);
        assert_eq!(m.entry_f64(0, 0), 0.0);
        assert_eq!(m.entry_f64(1, 1), 0.0);
    }

    #[test]
    fn star_self_diagonal_is_j1() {
        let sys = s1();
        let m = matrix_of(&sys);
        assert_eq!(m.star_self_diagonal(), rats(&[(3, 1), (2, 1), (0, 1)]));
    }

    #[test]
    fn one_atom_multiplication_matrix() {
        let sys = FiniteSystem::new(rats(&[(1, 1)]), vec![0], rats(&[(4, 1)])).unwrap();
        let m = matrix_of(&sys);
        assert_eq!(m.entry_f64(0, 0), 2.0);
        assert_eq!(m.star_self_diagonal(), rats(&[(4, 1)]));
    }

    #[test]
    fn theta_on_s1_witness_atom() {
        let sys = s1();
        let f = rats(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(theta(&sys, 1, &f), rat(1, 1));
    }

    #[test]
    fn theta_identity_system_vanishes() {
        let sys = FiniteSystem::new(
            rats(&[(1, 1), (2, 1)]),
            vec![0, 1],
            rats(&[(1, 1), (1, 1)]),
        )
        .unwrap();
        for n in 1..5 {
            let f = rats(&[(3, 2), (-7, 3)]);
            assert_eq!(theta(&sys, n, &f), rat(0, 1));
        }
    }

    #[test]
    fn theta_multiplication_closed_form() {
        // phi = id, usq = 4, f = indicator: Theta_2 = 1 - 2*4 + 16 = 9.
        let sys = FiniteSystem::new(rats(&[(1, 1)]), vec![0], rats(&[(4, 1)])).unwrap();
        let f = rats(&[(1, 1)]);
        assert_eq!(theta(&sys, 2, &f), rat(9, 1));
    }

    #[test]
    fn binomial_gram_of_s1_is_diag_of_delta() {
        let sys = s1();
        let b = binomial_gram(&sys, 1);
        assert!(b.is_diagonal(0.0));
        assert_eq!(b.diagonal(), rats(&[(-2, 1), (-1, 1), (1, 1)]));
        let jt = j_table(&sys, 1, 0.0).unwrap();
        assert_eq!(b.diagonal(), delta(&jt, 1, 0).unwrap());
    }

    #[test]
    fn binomial_gram_identity_is_zero() {
        let sys = FiniteSystem::new(
            rats(&[(1, 1), (2, 1), (5, 3)]),
            vec![0, 1, 2],
            rats(&[(1, 1), (1, 1), (1, 1)]),
        )
        .unwrap();
        for n in 1..4 {
            assert!(binomial_gram(&sys, n).is_zero(0.0));
        }
    }

    #[test]
    fn power_gram_diagonal_matches_j() {
        let sys = s1();
        let jt = j_table(&sys, 3, 0.0).unwrap();
        for i in 0..=3 {
            let g = power_form_gram(&sys, i);
            assert!(g.is_diagonal(0.0));
            // Diagonal of the form matrix is J_i(k) * m_k.
            for k in 0..3 {
                assert_eq!(
                    g.get(k, k),
                    &(jt.value(i, k).clone() * sys.mass(k).clone())
                );
            }
        }
    }

    #[test]
    fn psd_check_on_hand_matrices() {
        let mut m = DenseMatrix::zeros(2);
        m.set(0, 0, rat(2, 1));
        m.set(0, 1, rat(1, 1));
        m.set(1, 0, rat(1, 1));
        m.set(1, 1, rat(2, 1));
        assert!(is_positive_semidefinite(&m, 0.0));

        let mut m = DenseMatrix::zeros(2);
        m.set(0, 1, rat(1, 1));
        m.set(1, 0, rat(1, 1));
        assert!(!is_positive_semidefinite(&m, 0.0));

        let zero: DenseMatrix<BigRational> = DenseMatrix::zeros(3);
        assert!(is_positive_semidefinite(&zero, 0.0));

        // Rank-one positive: [[1, 2], [2, 4]].
        let mut m = DenseMatrix::zeros(2);
        m.set(0, 0, rat(1, 1));
        m.set(0, 1, rat(2, 1));
        m.set(1, 0, rat(2, 1));
        m.set(1, 1, rat(4, 1));
        assert!(is_positive_semidefinite(&m, 0.0));

        // Indefinite: [[1, 3], [3, 1]].
        let mut m = DenseMatrix::zeros(2);
        m.set(0, 0, rat(1, 1));
        m.set(0, 1, rat(3, 1));
        m.set(1, 0, rat(3, 1));
        m.set(1, 1, rat(1, 1));
        assert!(!is_positive_semidefinite(&m, 0.0));
    }

    #[test]
    fn unitary_checks() {
        assert!(unitary_check(&two_cycle(), 0.0));
        assert!(!unitary_check(&s1(), 0.0));
        let identity = FiniteSystem::new(rats(&[(1, 1)]), vec![0], rats(&[(1, 1)])).unwrap();
        assert!(unitary_check(&identity, 0.0));
        // Rotation with compensating weights: m = (1, 2), phi = (1, 0),
        // usq = (2, 1/2) makes usq_k m_k = m_phi(k).
        let weighted = FiniteSystem::new(
            rats(&[(1, 1), (2, 1)]),
            vec![1, 0],
            rats(&[(2, 1), (1, 2)]),
        )
        .unwrap();
        assert!(unitary_check(&weighted, 0.0));
        // Breaking one weight breaks unitarity.
        let broken = FiniteSystem::new(
            rats(&[(1, 1), (2, 1)]),
            vec![1, 0],
            rats(&[(2, 1), (1, 3)]),
        )
        .unwrap();
        assert!(!unitary_check(&broken, 0.0));
    }

    #[test]
    fn oracle_verdicts_on_known_systems() {
        // Identity: isometry at all orders, no trial failures.
        let identity = FiniteSystem::new(
            rats(&[(1, 1), (3, 1)]),
            vec![0, 1],
            rats(&[(1, 1), (1, 1)]),
        )
        .unwrap();
        let report = oracle_verdicts(&identity, 3, 25, 42, 0.0);
        assert!(report.trial_failures.is_empty());
        for v in &report.orders {
            assert!(v.expansive && v.isometry && v.gram_diagonal);
        }

        // Multiplication by 2: expansive at order 1, not at order 2.
        let mult = FiniteSystem::new(rats(&[(1, 1)]), vec![0], rats(&[(4, 1)])).unwrap();
        let report = oracle_verdicts(&mult, 2, 25, 7, 0.0);
        assert!(report.trial_failures.is_empty());
        assert!(report.orders[0].expansive && !report.orders[0].isometry);
        assert!(!report.orders[1].expansive);

        // S1: not expansive at order 1.
        let report = oracle_verdicts(&s1(), 1, 25, 3, 0.0);
        assert!(report.trial_failures.is_empty());
        assert!(!report.orders[0].expansive);
    }

    #[test]
    fn agreement_flags_mismatches() {
        let report = oracle_verdicts(&two_cycle(), 2, 0, 0, 0.0);
        let good = vec![(1, true, true), (2, true, true)];
        assert!(agreement_failures(&report, &good).is_empty());
        let bad = vec![(1, false, false), (2, true, true)];
        assert_eq!(agreement_failures(&report, &bad).len(), 2);
    }
}
