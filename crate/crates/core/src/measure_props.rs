//! Property harness for entanglement measures: vanishing on separable
//! states, monotonicity under an operation class (deterministic and on
//! average), local-unitary invariance, conjugation by local invertibles and
//! the universal measure `E_uni`.
//!
//! Violations are data. A failed evaluation is recorded as skipped and never
//! counted as a violation.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{self, BipartiteDims, DensityOperator, Subsystem};
use crate::linalg;
use crate::locc::{self, LocalOperatorPair, OpClass, SeparableOperation};
use crate::quasiprob;
use crate::se_solver::SolverConfig;
use crate::witness::{self, SearchConfig};

pub const DEFAULT_SLACK: f64 = 1e-7;
const BRANCH_FLOOR: f64 = 1e-12;

type Evaluator = dyn Fn(&DensityOperator) -> Result<f64> + Send + Sync;

/// A function of states declared monotone under `declared_class`.
#[derive(Clone)]
pub struct MeasureUnderTest {
    pub name: String,
    pub declared_class: OpClass,
    evaluate: Arc<Evaluator>,
}

impl fmt::Debug for MeasureUnderTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureUnderTest")
            .field("name", &self.name)
            .field("declared_class", &self.declared_class)
            .finish()
    }
}

impl MeasureUnderTest {
    pub fn new<F>(name: impl Into<String>, declared_class: OpClass, evaluate: F) -> Self
    where
        F: Fn(&DensityOperator) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            declared_class,
            evaluate: Arc::new(evaluate),
        }
    }

    pub fn evaluate(&self, rho: &DensityOperator) -> Result<f64> {
        (self.evaluate)(rho)
    }
}

/// `r_S − 1`. Pure inputs use the Schmidt rank. Mixed inputs use the
/// quasi-probability readout, whose value is witness-confirmed from below;
/// an open readout fails the evaluation.
pub fn schmidt_number_measure(cfg: SolverConfig) -> MeasureUnderTest {
    MeasureUnderTest::new("schmidt", OpClass::General, move |rho| {
        if let Some(pure) = rho.as_pure() {
            return Ok(pure.schmidt_rank() as f64 - 1.0);
        }
        let value = quasiprob::schmidt_number(rho, &cfg)?;
        Ok(value as f64 - 1.0)
    })
}

/// `tr ρ²`; increases under suitable filters, so it is not a monotone.
pub fn purity_measure() -> MeasureUnderTest {
    MeasureUnderTest::new("purity", OpClass::LocalInvertible, |rho| Ok(rho.purity()))
}

/// `1 − tr ρ₁²` of the first marginal.
pub fn marginal_purity_deficit() -> MeasureUnderTest {
    MeasureUnderTest::new("marginal-purity-deficit", OpClass::LocalUnitary, |rho| {
        let m = hilbert::partial_trace(rho.matrix(), Subsystem::Second, rho.dims())?;
        Ok(1.0 - linalg::trace(&(&m * &m)).re)
    })
}

pub type StateSampler = dyn Fn(u64) -> DensityOperator + Send + Sync;
pub type OperationSampler = dyn Fn(u64, BipartiteDims) -> SeparableOperation + Send + Sync;

/// State and operation generators driving the checks. `separable` produces
/// states on which the measure must vanish.
pub struct Samplers {
    pub states: Box<StateSampler>,
    pub separable: Box<StateSampler>,
    pub operations: Box<OperationSampler>,
}

impl Samplers {
    /// Operations of one class drawn with the crate's sampler.
    pub fn class_operations(class: OpClass) -> Box<OperationSampler> {
        Box::new(move |seed, dims| locc::sample_operation(class, dims, seed))
    }

    /// Pure states of random Schmidt rank, random mixed states of each
    /// Schmidt-rank class, and mixtures of product states, alternating
    /// between `dims`. Separable samples are product states or diagonal
    /// mixtures of product basis states.
    pub fn standard(dims: Vec<BipartiteDims>) -> Self {
        let dims_states = dims.clone();
        let states: Box<StateSampler> = Box::new(move |seed| {
            let mut rng = hilbert::rng_from(seed);
            let d = dims_states[(seed % dims_states.len() as u64) as usize];
            let k = 1 + (seed / 7 % d.min() as u64) as usize;
            match seed / 3 % 3 {
                0 => hilbert::random_pure_rank_with(&mut rng, d, k).density(),
                1 => hilbert::random_density_with(&mut rng, d, 1 + (seed % 4) as usize),
                _ => hilbert::random_separable_with(&mut rng, d, 1 + (seed % 3) as usize),
            }
        });
        let separable: Box<StateSampler> = Box::new(move |seed| {
            let mut rng = hilbert::rng_from(seed);
            let d = dims[(seed % dims.len() as u64) as usize];
            if seed % 2 == 0 {
                hilbert::random_separable_with(&mut rng, d, 1)
            } else {
                let w = hilbert::simplex_weights(&mut rng, d.total());
                let diag = linalg::CVec::from_iterator(d.total(), w.iter().map(|&x| linalg::real(x)));
                DensityOperator::new(d, linalg::CMat::from_diagonal(&diag)).expect("diagonal mixture")
            }
        });
        Self {
            states,
            separable,
            operations: Self::class_operations(OpClass::General),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Separable,
    Monotonicity,
    AverageMonotonicity,
    LuInvariance,
    Chain,
}

/// Everything needed to reproduce one violation.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: CheckKind,
    pub trial: usize,
    pub seed: u64,
    pub operation: Option<SeparableOperation>,
    pub state: DensityOperator,
    pub before: f64,
    pub after: f64,
    pub deficit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PropertyVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub measure: String,
    pub checks_run: usize,
    pub skipped: usize,
    pub violations: Vec<Violation>,
    pub max_deficit: f64,
    pub slack: f64,
    pub verdict: PropertyVerdict,
}

impl PropertyReport {
    fn from_outcomes(measure: &str, outcomes: Vec<TrialOutcome>, slack: f64) -> Self {
        let mut checks_run = 0;
        let mut skipped = 0;
        let mut violations = Vec::new();
        let mut max_deficit = 0.0f64;
        for o in outcomes {
            checks_run += o.checks;
            skipped += o.skipped;
            for v in o.violations {
                max_deficit = max_deficit.max(v.deficit);
                violations.push(v);
            }
            max_deficit = max_deficit.max(o.max_deficit);
        }
        Self {
            measure: measure.to_string(),
            checks_run,
            skipped,
            verdict: if max_deficit <= slack {
                PropertyVerdict::Pass
            } else {
                PropertyVerdict::Fail
            },
            violations,
            max_deficit,
            slack,
        }
    }
}

#[derive(Default)]
struct TrialOutcome {
    checks: usize,
    skipped: usize,
    max_deficit: f64,
    violations: Vec<Violation>,
}

impl TrialOutcome {
    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        kind: CheckKind,
        trial: usize,
        seed: u64,
        operation: Option<&SeparableOperation>,
        state: &DensityOperator,
        before: f64,
        after: f64,
        deficit: f64,
        slack: f64,
    ) {
        self.checks += 1;
        self.max_deficit = self.max_deficit.max(deficit);
        if deficit > slack {
            self.violations.push(Violation {
                kind,
                trial,
                seed,
                operation: operation.cloned(),
                state: state.clone(),
                before,
                after,
                deficit,
            });
        }
    }
}

/// Checks `E = 0` on separable samples and `E(ρ) ≥ E(Λρ/trΛρ)` on every
/// trial; for local unitaries the equality is checked in both directions.
pub fn check_measure_axioms(
    m: &MeasureUnderTest,
    samplers: &Samplers,
    n: usize,
    seed: u64,
    slack: f64,
) -> PropertyReport {
    let outcomes: Vec<TrialOutcome> = (0..n)
        .into_par_iter()
        .map(|t| {
            let mut out = TrialOutcome::default();
            let sep_seed = hilbert::derive_seed(seed, 20, t as u64);
            let sep = (samplers.separable)(sep_seed);
            match m.evaluate(&sep) {
                Ok(e) => out.record(CheckKind::Separable, t, sep_seed, None, &sep, e, e, e.abs(), slack),
                Err(_) => out.skipped += 1,
            }

            let state_seed = hilbert::derive_seed(seed, 21, t as u64);
            let rho = (samplers.states)(state_seed);
            let op = (samplers.operations)(hilbert::derive_seed(seed, 22, t as u64), rho.dims());
            let Ok(after_state) = locc::apply(&op, &rho) else {
                return out;
            };
            let Ok(before) = m.evaluate(&rho) else {
                out.skipped += 1;
                return out;
            };
            match m.evaluate(&after_state) {
                Ok(after) => {
                    let (kind, deficit) = if op.class() == OpClass::LocalUnitary {
                        (CheckKind::LuInvariance, (after - before).abs())
                    } else {
                        (CheckKind::Monotonicity, after - before)
                    };
                    out.record(kind, t, state_seed, Some(&op), &rho, before, after, deficit, slack);
                }
                _ => out.skipped += 1,
            }
            out
        })
        .collect();
    PropertyReport::from_outcomes(&m.name, outcomes, slack)
}

/// Averaged monotonicity: `E(ρ) ≥ Σ_k p_k E(ρ_k)` over the branches of a
/// multi-pair operation, with `p_k` the normalized branch traces.
pub fn check_average_monotonicity(
    m: &MeasureUnderTest,
    samplers: &Samplers,
    n: usize,
    seed: u64,
    slack: f64,
) -> PropertyReport {
    let outcomes: Vec<TrialOutcome> = (0..n)
        .into_par_iter()
        .map(|t| {
            let mut out = TrialOutcome::default();
            let state_seed = hilbert::derive_seed(seed, 23, t as u64);
            let rho = (samplers.states)(state_seed);
            let op = (samplers.operations)(hilbert::derive_seed(seed, 24, t as u64), rho.dims());
            let Ok(before) = m.evaluate(&rho) else {
                out.skipped += 1;
                return out;
            };
            let branches = op.branches(&rho);
            let total: f64 = branches.iter().map(|(p, _)| p).sum();
            if !(total > BRANCH_FLOOR) {
                return out;
            }
            let mut average = 0.0;
            for (p, mat) in branches {
                let w = p / total;
                if w < BRANCH_FLOOR {
                    continue;
                }
                let branch = match DensityOperator::normalized(rho.dims(), linalg::hermitian_part(&mat)) {
                    Ok(b) => b,
                    Err(_) => {
                        out.skipped += 1;
                        return out;
                    }
                };
                match m.evaluate(&branch) {
                    Ok(e) => average += w * e,
                    Err(_) => {
                        out.skipped += 1;
                        return out;
                    }
                }
            }
            out.record(
                CheckKind::AverageMonotonicity,
                t,
                state_seed,
                Some(&op),
                &rho,
                before,
                average,
                average - before,
                slack,
            );
            out
        })
        .collect();
    PropertyReport::from_outcomes(&m.name, outcomes, slack)
}

/// `E′(ρ) = E(T ρ T† / tr)` for a local invertible `T`. The declared class
/// becomes the conjugated class `T⁻¹∘Λ∘T`, which carries the same tag.
pub fn conjugate_measure(m: &MeasureUnderTest, t: &SeparableOperation) -> Result<MeasureUnderTest> {
    if t.class() != OpClass::LocalInvertible && t.class() != OpClass::LocalUnitary {
        return Err(Error::WrongClass {
            expected: "LI".into(),
            found: t.class().tag().into(),
        });
    }
    let inner = m.clone();
    let t = t.clone();
    Ok(MeasureUnderTest::new(
        format!("{}'", m.name),
        m.declared_class,
        move |rho| inner.evaluate(&locc::apply(&t, rho)?),
    ))
}

#[derive(Debug, Clone)]
pub struct EUniResult {
    pub value: f64,
    pub best_operation: SeparableOperation,
}

impl SearchConfig {
    /// Budget used by [`e_uni`]: 256 sampled filters, 3 sweeps on the best 8.
    pub fn e_uni_default() -> Self {
        Self {
            li_samples: 256,
            lp_samples: 0,
            refine_best: 8,
            sweeps: 3,
            ..Self::default()
        }
    }
}

/// Lower bound on `E_uni(ρ) = sup_{Λ ∈ LI} E(Λρ/trΛρ)`.
pub fn e_uni(m: &MeasureUnderTest, rho: &DensityOperator, search: &SearchConfig) -> Result<EUniResult> {
    let dims = rho.dims();
    let work = search.frame.prepare(rho);
    let mut candidates = vec![LocalOperatorPair::new(linalg::identity(dims.d1), linalg::identity(dims.d2))];
    let mut rng = hilbert::rng_from(hilbert::derive_seed(search.seed, 30, 0));
    for _ in 0..search.li_samples {
        candidates.push(locc::sample_operation_with(&mut rng, OpClass::LocalInvertible, dims).pairs()[0].clone());
    }
    let objective = |p: &LocalOperatorPair| -> Option<f64> {
        if !witness::is_invertible(p) {
            return None;
        }
        let op = SeparableOperation::new(dims, vec![p.clone()], OpClass::General).ok()?;
        let out = locc::apply(&op, &work).ok()?;
        m.evaluate(&out).ok()
    };
    let mut scored: Vec<(f64, usize)> = candidates
        .par_iter()
        .enumerate()
        .filter_map(|(k, p)| objective(p).map(|v| (v, k)))
        .collect();
    if scored.is_empty() {
        return Err(Error::invalid("measure evaluable on at least one filtered state", 0.0));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let refined: Vec<(f64, LocalOperatorPair)> = scored
        .iter()
        .take(search.refine_best)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&(_, k)| {
            let (p, v) = witness::coordinate_ascent(&candidates[k], search.sweeps, objective);
            (v, p)
        })
        .collect();
    let mut best = (scored[0].0, candidates[scored[0].1].clone());
    for (v, p) in refined {
        if v > best.0 {
            best = (v, p);
        }
    }
    let best_operation = SeparableOperation::new(dims, vec![best.1.clone()], OpClass::LocalInvertible)
        .or_else(|_| SeparableOperation::new(dims, vec![best.1], OpClass::General))?;
    Ok(EUniResult {
        value: best.0,
        best_operation,
    })
}

/// One truncation `|φ_r⟩ → |φ_{r−1}⟩` of the projection chain.
#[derive(Debug, Clone, Serialize)]
pub struct ChainStep {
    pub from_rank: usize,
    pub before: f64,
    pub after: f64,
    /// Distance of the projected state to `|φ_{r−1}⟩` after phase alignment.
    pub state_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    pub report: PropertyReport,
}

impl ChainReport {
    /// Measure value before each step, e.g. `3, 2, 1` for `r_max = 4`.
    pub fn values(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.before.round() as usize).collect()
    }
}

/// Truncates `|φ_{r_max}⟩` down to `|φ_1⟩` one Schmidt rank at a time and
/// checks that the Schmidt-number measure drops by exactly one per step.
pub fn check_projection_chain(r_max: usize, dims: BipartiteDims) -> Result<ChainReport> {
    if r_max < 2 || r_max > dims.min() {
        return Err(Error::OutOfRange {
            what: "chain length",
            detail: format!("need 2 <= r_max <= {}, got {r_max}", dims.min()),
        });
    }
    let m = schmidt_number_measure(SolverConfig::default());
    let mut state = hilbert::phi_r(r_max, dims)?;
    let mut steps = Vec::new();
    let mut outcome = TrialOutcome::default();
    for r in (2..=r_max).rev() {
        let before = m.evaluate(&state.density())?;
        let next = locc::apply_pure(&locc::truncation_projection(r - 1, dims)?, &state)?;
        let after = m.evaluate(&next.density())?;
        let target = hilbert::phi_r(r - 1, dims)?;
        let deviation = (next.phase_aligned() - target.phase_aligned()).norm();
        let deficit = ((before - after) - 1.0).abs().max(deviation);
        outcome.record(
            CheckKind::Chain,
            r_max - r,
            0,
            None,
            &state.density(),
            before,
            after,
            deficit,
            DEFAULT_SLACK,
        );
        steps.push(ChainStep {
            from_rank: r,
            before,
            after,
            state_deviation: deviation,
        });
        state = next;
    }
    Ok(ChainReport {
        steps,
        report: PropertyReport::from_outcomes(&m.name, vec![outcome], DEFAULT_SLACK),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{phi_r, random_density, random_pure, BipartitePureState};
    use crate::linalg::{real, CVec};

    fn d(a: usize, b: usize) -> BipartiteDims {
        BipartiteDims::new(a, b).unwrap()
    }

    #[test]
    fn schmidt_measure_examples() {
        let m = schmidt_number_measure(SolverConfig::default());
        let prod = BipartitePureState::basis(d(2, 2), 0, 1).unwrap().density();
        assert_eq!(m.evaluate(&prod).unwrap(), 0.0);
        assert_eq!(m.evaluate(&phi_r(3, d(3, 3)).unwrap().density()).unwrap(), 2.0);
        let li = locc::sample_operation(OpClass::LocalInvertible, d(2, 2), 4);
        let filtered = locc::apply_pure(&li, &phi_r(2, d(2, 2)).unwrap()).unwrap();
        assert_eq!(m.evaluate(&filtered.density()).unwrap(), 1.0);
        assert_eq!(m.evaluate(&DensityOperator::maximally_mixed(d(2, 2))).unwrap(), 0.0);
    }

    #[test]
    fn chain_values() {
        let c = check_projection_chain(4, d(4, 4)).unwrap();
        assert_eq!(c.values(), vec![3, 2, 1]);
        assert_eq!(c.report.verdict, PropertyVerdict::Pass);
        let c = check_projection_chain(2, d(2, 2)).unwrap();
        assert_eq!(c.steps.len(), 1);
        assert_eq!((c.steps[0].before, c.steps[0].after), (1.0, 0.0));
    }

    #[test]
    fn purity_fails_under_filters() {
        let mut s = Samplers::standard(vec![d(2, 2)]);
        s.operations = Samplers::class_operations(OpClass::LocalInvertible);
        let report = check_measure_axioms(&purity_measure(), &s, 40, 1, DEFAULT_SLACK);
        assert_eq!(report.verdict, PropertyVerdict::Fail);
        assert!(!report.violations.is_empty());
    }

    #[test]
    fn lu_sampler_is_two_sided() {
        let mut s = Samplers::standard(vec![d(2, 3)]);
        s.operations = Samplers::class_operations(OpClass::LocalUnitary);
        let report = check_measure_axioms(&marginal_purity_deficit(), &s, 30, 2, DEFAULT_SLACK);
        assert_eq!(report.verdict, PropertyVerdict::Fail, "separable check must fail for this measure");
        assert!(report.violations.iter().all(|v| v.kind == CheckKind::Separable));
    }

    #[test]
    fn conjugation_by_identity_and_argmax_shift() {
        let dims = d(2, 2);
        let m = marginal_purity_deficit();
        let id = SeparableOperation::identity(dims, OpClass::LocalInvertible);
        let same = conjugate_measure(&m, &id).unwrap();
        for s in 0..10 {
            let rho = random_density(dims, s, 2);
            assert!((same.evaluate(&rho).unwrap() - m.evaluate(&rho).unwrap()).abs() < 1e-14);
        }
        let t = locc::sample_operation(OpClass::LocalInvertible, dims, 9);
        let conj = conjugate_measure(&m, &t).unwrap();
        let phi = phi_r(2, dims).unwrap();
        let pre_image = locc::apply_pure(&locc::invert(&t).unwrap(), &phi).unwrap();
        let mut set: Vec<BipartitePureState> = (0..20).map(|s| random_pure(dims, 100 + s)).collect();
        set.push(phi.clone());
        set.push(pre_image.clone());
        let argmax = |f: &MeasureUnderTest| {
            (0..set.len())
                .max_by(|&a, &b| {
                    let fa = f.evaluate(&set[a].density()).unwrap();
                    let fb = f.evaluate(&set[b].density()).unwrap();
                    fa.total_cmp(&fb)
                })
                .unwrap()
        };
        assert_eq!(argmax(&m), set.len() - 2);
        assert_eq!(argmax(&conj), set.len() - 1);
    }

    #[test]
    fn e_uni_of_marginal_deficit_reaches_maximal_value() {
        let dims = d(2, 2);
        let psi = BipartitePureState::new(
            dims,
            CVec::from_vec(vec![real(0.9f64.sqrt()), real(0.0), real(0.0), real(0.1f64.sqrt())]),
        )
        .unwrap();
        let m = marginal_purity_deficit();
        let r = e_uni(&m, &psi.density(), &SearchConfig::e_uni_default()).unwrap();
        assert!(r.value >= m.evaluate(&psi.density()).unwrap());
        assert!((r.value - 0.5).abs() < 0.01, "{}", r.value);
    }

    #[test]
    fn average_monotonicity_on_pure_states_with_projections() {
        let m = schmidt_number_measure(SolverConfig::default());
        let s = Samplers {
            states: Box::new(|seed| random_pure(d(3, 3), seed).density()),
            separable: Box::new(|seed| hilbert::random_separable(d(3, 3), seed, 1)),
            operations: Box::new(|seed, dims| {
                let a = locc::sample_operation(OpClass::LocalProjection, dims, seed);
                let b = locc::sample_operation(OpClass::LocalProjection, dims, seed + 1);
                let pairs = vec![a.pairs()[0].clone(), b.pairs()[0].clone()];
                SeparableOperation::new(dims, pairs, OpClass::General).unwrap()
            }),
        };
        let r = check_average_monotonicity(&m, &s, 30, 3, DEFAULT_SLACK);
        assert_eq!(r.verdict, PropertyVerdict::Pass);
        assert!(r.checks_run > 0);
    }
}
