//! Seeded random system generation and the batch cross-check sweeps.
//!
//! Sweeps are data parallel: every item derives its own RNG from
//! `(seed, index)`, so results are identical whichever execution mode runs
//! them. With the `parallel` feature (default) `Exec::Auto` fans work out
//! over rayon; `Exec::Sequential` is the always-available fallback and the
//! baseline the benchmark suite compares against.

use num::rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::calculus::{delta, j_table};
use crate::classify::{self, DomainInvariance, Options};
use crate::oracle;
use crate::scalar::Scalar;
use crate::space::{FiniteSystem, ValidatedSystem};

/// RNG for item `index` of a sweep seeded with `seed`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random rational `p/q` with `p, q` uniform in `1..=9`.
pub fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    <BigRational as Scalar>::ratio(rng.random_range(1..=9), rng.random_range(1..=9))
}

/// Random squared weight: zero with probability 1/8, else `random_rational`.
pub fn random_usq(rng: &mut ChaCha8Rng) -> BigRational {
    if rng.random_range(0..8u32) == 0 {
        <BigRational as Scalar>::zero()
    } else {
        random_rational(rng)
    }
}

/// Random finite system on `n_atoms` atoms: random rational masses and
/// squared weights, `phi` uniform over all self-maps.
pub fn random_finite_system(rng: &mut ChaCha8Rng, n_atoms: usize) -> FiniteSystem<BigRational> {
    let masses = (0..n_atoms).map(|_| random_rational(rng)).collect();
    let phi = (0..n_atoms).map(|_| rng.random_range(0..n_atoms)).collect();
    let usq = (0..n_atoms).map(|_| random_usq(rng)).collect();
    FiniteSystem::new(masses, phi, usq).expect("generated data satisfies the invariants")
}

/// Sweep item `index`: atom count uniform in `1..=max_atoms`, then a random
/// system, all derived deterministically from `(seed, index)`.
pub fn sample_system(seed: u64, index: u64, max_atoms: usize) -> FiniteSystem<BigRational> {
    let mut rng = rng_for(seed, index);
    let n = rng.random_range(1..=max_atoms);
    random_finite_system(&mut rng, n)
}

/// Execution mode for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    Auto,
    /// Always sequential.
    Sequential,
}

/// Order-preserving indexed map in the requested execution mode.
pub fn map_indexed<R, F>(exec: Exec, count: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..count).map(f).collect(),
        Exec::Auto => {
            #[cfg(feature = "parallel")]
            {
                (0..count).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..count).map(f).collect()
            }
        }
    }
}

/// Outcome of a corpus sweep; `violations` must be empty for a healthy build.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub systems: u64,
    /// Systems that satisfied the sweep's hypothesis (when it has one).
    pub hits: u64,
    pub violations: Vec<String>,
}

impl SweepReport {
    fn merge(reports: Vec<SweepReport>) -> SweepReport {
        let mut merged = SweepReport::default();
        for r in reports {
            merged.systems += r.systems;
            merged.hits += r.hits;
            merged.violations.extend(r.violations);
        }
        merged
    }
}

/// Outcome of the oracle cross-check sweep, with one violation bucket per
/// property so the acceptance tests can gate each independently. Every
/// bucket must be empty for a healthy build.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossCheckReport {
    pub systems: u64,
    /// Recursion/direct J route disagreements.
    pub recursion_direct: Vec<String>,
    /// Polarized binomial Gram not equal to `diag(Delta_n)`.
    pub gram: Vec<String>,
    /// Per-order verdict disagreements between criteria and oracle.
    pub agreement: Vec<String>,
    /// Sampled Theta values inconsistent with the verdict signs.
    pub theta_trials: Vec<String>,
}

impl CrossCheckReport {
    pub fn all_clear(&self) -> bool {
        self.recursion_direct.is_empty()
            && self.gram.is_empty()
            && self.agreement.is_empty()
            && self.theta_trials.is_empty()
    }

    fn merge(reports: Vec<CrossCheckReport>) -> CrossCheckReport {
        let mut merged = CrossCheckReport::default();
        for r in reports {
            merged.systems += r.systems;
            merged.recursion_direct.extend(r.recursion_direct);
            merged.gram.extend(r.gram);
            merged.agreement.extend(r.agreement);
            merged.theta_trials.extend(r.theta_trials);
        }
        merged
    }
}

/// Cross-checks criteria against the oracle on one random corpus:
/// recursion/direct J agreement up to `j_orders`, `B_n = diag(Delta_n)` up
/// to `max_order`, verdict agreement per order, and sign consistency of
/// `trials` sampled Theta values per system and order.
pub fn corpus_cross_check(
    seed: u64,
    count: u64,
    max_atoms: usize,
    max_order: usize,
    j_orders: usize,
    trials: usize,
    exec: Exec,
) -> CrossCheckReport {
    let reports = map_indexed(exec, count, |index| {
        let mut report = CrossCheckReport {
            systems: 1,
            ..CrossCheckReport::default()
        };
        let sys = sample_system(seed, index, max_atoms);

        // Recursion vs direct J route, to the deeper order.
        let jt = match j_table(&sys, max_order.max(j_orders), 0.0) {
            Ok(jt) => jt,
            Err(e) => {
                report.recursion_direct.push(format!("system {index}: {e}"));
                return report;
            }
        };

        // Polarized binomial Gram must be diag(Delta_n), exactly.
        let grams = oracle::binomial_grams(&sys, max_order);
        for (b, order) in grams.iter().zip(1..=max_order) {
            if !b.is_diagonal(0.0) {
                report
                    .gram
                    .push(format!("system {index} order {order}: Gram not diagonal"));
                continue;
            }
            let expected = delta(&jt, order, 0).expect("orders available");
            if b.diagonal() != expected {
                report.gram.push(format!(
                    "system {index} order {order}: Gram diagonal differs from Delta"
                ));
            }
        }

        // Verdict agreement between criteria and oracle, plus Theta trials.
        let opts = Options {
            max_order,
            alt_shifts: 1,
            alt_depth: 1,
            tolerance: 0.0,
        };
        let validated = ValidatedSystem::Finite(sys.clone());
        match classify::expansivity(&validated, &opts) {
            Ok(classification) => {
                let oracle_report =
                    oracle::oracle_verdicts(&sys, max_order, trials, seed ^ index, 0.0);
                for failure in
                    oracle::agreement_failures(&oracle_report, &classification.verdict_triples())
                {
                    report.agreement.push(format!("system {index}: {failure}"));
                }
                for failure in oracle_report.trial_failures {
                    report
                        .theta_trials
                        .push(format!("system {index}: {failure}"));
                }
            }
            Err(e) => report.agreement.push(format!("system {index}: {e}")),
        }
        report
    });
    CrossCheckReport::merge(reports)
}

/// Outcome of the 2-expansive audit sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TwoExpansiveAuditReport {
    pub systems: u64,
    /// Systems found 2-expansive (`Delta_2 <= 0` at every atom).
    pub two_expansive: u64,
    /// 2-expansive systems that also had injective `phi` and strictly
    /// positive weight, and therefore had to pass the unitary check.
    pub unitary_qualifying: u64,
    pub ladder_violations: Vec<String>,
    pub invariance_violations: Vec<String>,
    pub unitary_violations: Vec<String>,
}

impl TwoExpansiveAuditReport {
    pub fn all_clear(&self) -> bool {
        self.ladder_violations.is_empty()
            && self.invariance_violations.is_empty()
            && self.unitary_violations.is_empty()
    }

    fn merge(reports: Vec<TwoExpansiveAuditReport>) -> TwoExpansiveAuditReport {
        let mut merged = TwoExpansiveAuditReport::default();
        for r in reports {
            merged.systems += r.systems;
            merged.two_expansive += r.two_expansive;
            merged.unitary_qualifying += r.unitary_qualifying;
            merged.ladder_violations.extend(r.ladder_violations);
            merged.invariance_violations.extend(r.invariance_violations);
            merged.unitary_violations.extend(r.unitary_violations);
        }
        merged
    }
}

/// Audits every 2-expansive system in a random corpus: the J ladder
/// `1 <= J_1 <= J_2 <= J_3` atomwise with `J_2 <= 2 J_1 - 1`, domain
/// invariance, and unitarity whenever `phi` is injective with strictly
/// positive weight.
pub fn two_expansive_audit_sweep(
    seed: u64,
    count: u64,
    max_atoms: usize,
    exec: Exec,
) -> TwoExpansiveAuditReport {
    let one = <BigRational as Scalar>::one();
    let two = <BigRational as Scalar>::from_int(2);
    let reports = map_indexed(exec, count, |index| {
        let mut report = TwoExpansiveAuditReport {
            systems: 1,
            ..TwoExpansiveAuditReport::default()
        };
        let sys = sample_system(seed, index, max_atoms);
        let jt = j_table(&sys, 3, 0.0).expect("rational routes agree");

        // 2-expansive <=> Delta_2 <= 0 at every atom.
        let delta2 = delta(&jt, 2, 0).expect("order 2 available");
        if delta2.iter().any(|v| v.sign_with(0.0).is_positive()) {
            return report;
        }
        report.two_expansive = 1;

        for k in 0..sys.atom_count() {
            let j1 = jt.value(1, k).clone();
            let j2 = jt.value(2, k).clone();
            let j3 = jt.value(3, k).clone();
            if j1 < one {
                report
                    .ladder_violations
                    .push(format!("system {index}: J_1({k}) < 1"));
            }
            if j2 < j1 || j3 < j2 {
                report
                    .ladder_violations
                    .push(format!("system {index}: J ladder decreases at atom {k}"));
            }
            if j2 > two.clone() * j1 - one.clone() {
                report
                    .ladder_violations
                    .push(format!("system {index}: J_2({k}) > 2 J_1({k}) - 1"));
            }
        }

        let validated = ValidatedSystem::Finite(sys.clone());
        match classify::domain_invariance(&validated, 0.0) {
            Ok(DomainInvariance::Yes { .. }) => {}
            other => report.invariance_violations.push(format!(
                "system {index}: 2-expansive but domain invariance is {other:?}"
            )),
        }

        let positive_weight =
            (0..sys.atom_count()).all(|k| sys.usq(k).sign_with(0.0).is_positive());
        if positive_weight && sys.phi_is_injective() {
            report.unitary_qualifying = 1;
            if !oracle::unitary_check(&sys, 0.0) {
                report.unitary_violations.push(format!(
                    "system {index}: injective with positive weight but not unitary"
                ));
            }
        }
        report
    });
    TwoExpansiveAuditReport::merge(reports)
}

/// Exhaustive composition-operator audit: over every self-map of `1..=max_atoms`
/// atoms and `masses_per_map` random mass vectors each, any 2-expansive
/// composition system (unit weight) must have `h_1 = 1` everywhere.
pub fn composition_exhaustive_sweep(
    seed: u64,
    masses_per_map: u64,
    max_atoms: usize,
    exec: Exec,
) -> SweepReport {
    let one = <BigRational as Scalar>::one();
    // Index all (n, phi, mass-sample) combinations in one flat range.
    let mut combos: Vec<(usize, Vec<usize>)> = Vec::new();
    for n in 1..=max_atoms {
        let maps = (n as u64).pow(n as u32);
        for code in 0..maps {
            let mut phi = Vec::with_capacity(n);
            let mut rest = code;
            for _ in 0..n {
                phi.push((rest % n as u64) as usize);
                rest /= n as u64;
            }
            combos.push((n, phi));
        }
    }
    let total = combos.len() as u64 * masses_per_map;
    let reports = map_indexed(exec, total, |index| {
        let mut report = SweepReport {
            systems: 1,
            ..SweepReport::default()
        };
        let (n, phi) = &combos[(index / masses_per_map) as usize];
        let mut rng = rng_for(seed, index);
        let masses: Vec<BigRational> = (0..*n).map(|_| random_rational(&mut rng)).collect();
        let usq = vec![one.clone(); *n];
        let sys = FiniteSystem::new(masses, phi.clone(), usq).expect("valid by construction");
        let jt = j_table(&sys, 2, 0.0).expect("rational routes agree");
        let delta2 = delta(&jt, 2, 0).expect("order 2 available");
        if delta2.iter().any(|v| v.sign_with(0.0).is_positive()) {
            return report;
        }
        report.hits = 1;
        for k in 0..sys.atom_count() {
            if jt.value(1, k) != &one {
                report.violations.push(format!(
                    "map {phi:?} sample {}: h_1({k}) = {} != 1",
                    index % masses_per_map,
                    jt.value(1, k).render(),
                ));
            }
        }
        report
    });
    SweepReport::merge(reports)
}
