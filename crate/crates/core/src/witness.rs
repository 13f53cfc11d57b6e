//! Schmidt-number witnesses and the measures built on them: certification
//! by `tr(ρL) > f₁₂⁽ʳ⁾(L)`, the partial-transpose pseudo-measure `E_PT`, the
//! witness-based measure and the operational measure `E_M`.
//!
//! The suprema over operation classes are not computable; the searches
//! here return lower bounds over explicit operation families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, BipartiteDims, DensityOperator, Observable};
use crate::linalg::{self, CMat, CVec};
use crate::locc::{self, LocalOperatorPair, OpClass, SeparableOperation};
use crate::se_solver::{self, SolverConfig};

pub const CERTIFICATION_THRESHOLD: f64 = 1e-7;
const NPT_THRESHOLD: f64 = -1e-10;
const ANNIHILATION: f64 = 1e-14;
const DEGENERATE_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    CertifiedAboveR,
    Inconclusive,
}

/// Frame in which a search-based quantity is evaluated. `Canonical` first
/// rotates `ρ` into its canonical local-unitary frame, which makes the
/// result exactly invariant under local unitaries whenever that frame is
/// unique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Frame {
    Input,
    #[default]
    Canonical,
}

impl Frame {
    pub(crate) fn prepare(self, rho: &DensityOperator) -> DensityOperator {
        match self {
            Frame::Input => rho.clone(),
            Frame::Canonical => locc::lu_canonical_form(rho),
        }
    }
}

/// Threshold side of a witness: the solver value of `f₁₂⁽ʳ⁾(L)` and, if
/// requested, the independent oracle value. Both are lower bounds on the
/// true threshold; the larger one is used.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessThreshold {
    pub r: usize,
    pub f12_r_value: f64,
    pub oracle_value: Option<f64>,
    pub restarts: usize,
    pub converged_restarts: usize,
}

impl WitnessThreshold {
    pub fn compute(l: &Observable, r: usize, cfg: &SolverConfig, oracle_samples: Option<usize>) -> Result<Self> {
        let dims = l.dims();
        if r == 0 || r >= dims.min() {
            return Err(Error::OutOfRange {
                what: "witness level r",
                detail: format!("need 1 <= r < {}, got {r}", dims.min()),
            });
        }
        let report = se_solver::f12_r_report(l, r, cfg)?;
        let oracle_value = match oracle_samples {
            Some(n) => Some(se_solver::oracle_f12_r(l, r, n, cfg.seed)?),
            None => None,
        };
        Ok(Self {
            r,
            f12_r_value: report.max_lambda(),
            oracle_value,
            restarts: report.restarts,
            converged_restarts: report.converged_restarts,
        })
    }

    pub fn value(&self) -> f64 {
        self.oracle_value.map_or(self.f12_r_value, |o| o.max(self.f12_r_value))
    }
}

#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub r: usize,
    pub observable: Observable,
    pub f12_r_value: f64,
    pub oracle_value: Option<f64>,
    pub expectation_value: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub restarts: usize,
    pub converged_restarts: usize,
}

/// Evaluates a precomputed threshold against `ρ`.
pub fn certify_against(rho: &DensityOperator, l: &Observable, threshold: &WitnessThreshold) -> Result<WitnessCertificate> {
    let expectation_value = hilbert::expectation(rho, l)?;
    let margin = expectation_value - threshold.value();
    Ok(WitnessCertificate {
        r: threshold.r,
        observable: l.clone(),
        f12_r_value: threshold.f12_r_value,
        oracle_value: threshold.oracle_value,
        expectation_value,
        margin,
        verdict: if margin > CERTIFICATION_THRESHOLD {
            Verdict::CertifiedAboveR
        } else {
            Verdict::Inconclusive
        },
        restarts: threshold.restarts,
        converged_restarts: threshold.converged_restarts,
    })
}

/// Certifies Schmidt number `> r` when `tr(ρL)` exceeds `f₁₂⁽ʳ⁾(L)` by more
/// than the certification threshold.
pub fn certify_schmidt_number(
    rho: &DensityOperator,
    l: &Observable,
    r: usize,
    cfg: &SolverConfig,
    oracle_samples: Option<usize>,
) -> Result<WitnessCertificate> {
    rho.dims().check_same(&l.dims())?;
    let threshold = WitnessThreshold::compute(l, r, cfg, oracle_samples)?;
    certify_against(rho, l, &threshold)
}

#[derive(Debug, Clone)]
pub struct NptResult {
    pub npt: bool,
    pub min_eigenvalue: f64,
    pub eigenvector: CVec,
}

pub fn is_npt(rho: &DensityOperator) -> NptResult {
    let pt = hilbert::partial_transpose(rho);
    let (vals, vecs) = linalg::eigh(&pt);
    NptResult {
        npt: vals[0] < NPT_THRESHOLD,
        min_eigenvalue: vals[0],
        eigenvector: vecs.column(0).into_owned(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub li_samples: usize,
    pub lp_samples: usize,
    /// Number of best LI candidates refined by coordinate ascent.
    pub refine_best: usize,
    pub sweeps: usize,
    pub frame: Frame,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            li_samples: 64,
            lp_samples: 32,
            refine_best: 4,
            sweeps: 3,
            frame: Frame::Canonical,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EptResult {
    /// Lower bound on `E_PT`, clamped at zero.
    pub value: f64,
    pub raw: f64,
    pub best_r: usize,
    pub best_operation: SeparableOperation,
}

fn pt_objective(rho: &CMat, pair: &LocalOperatorPair, v: &CMat) -> Option<f64> {
    let k = pair.joint();
    let sigma = &k * rho * k.adjoint();
    let t = linalg::trace(&sigma).re;
    if t <= ANNIHILATION || !t.is_finite() {
        return None;
    }
    Some(-(linalg::trace(&(sigma * v)).re) / t)
}

/// Greedy coordinate ascent over the real and imaginary parts of every entry
/// of `A` and `B`.
pub(crate) fn coordinate_ascent<F>(pair: &LocalOperatorPair, sweeps: usize, objective: F) -> (LocalOperatorPair, f64)
where
    F: Fn(&LocalOperatorPair) -> Option<f64>,
{
    let mut best = pair.clone();
    let mut best_val = objective(&best).unwrap_or(f64::NEG_INFINITY);
    let mut step = 0.5;
    for _ in 0..sweeps {
        for side in 0..2 {
            let n = if side == 0 { best.a.nrows() } else { best.b.nrows() };
            for i in 0..n {
                for j in 0..n {
                    for imag in [false, true] {
                        for scale in [step, step * 0.2, step * 0.04] {
                            for sign in [1.0, -1.0] {
                                let mut trial = best.clone();
                                let m = if side == 0 { &mut trial.a } else { &mut trial.b };
                                let delta = sign * scale;
                                if imag {
                                    m[(i, j)].im += delta;
                                } else {
                                    m[(i, j)].re += delta;
                                }
                                if let Some(v) = objective(&trial) {
                                    if v > best_val + 1e-15 {
                                        best_val = v;
                                        best = trial;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        step *= 0.5;
    }
    (best, best_val)
}

pub(crate) fn is_invertible(pair: &LocalOperatorPair) -> bool {
    let smin = |m: &CMat| linalg::svd(m).0.last().copied().unwrap_or(0.0);
    smin(&pair.a) > 1e-10 && smin(&pair.b) > 1e-10
}

/// Lower bound on `E_PT(ρ) = sup_Λ −tr[Λ(ρ)V_r]/tr Λ(ρ)` over the identity,
/// sampled local invertible and local projection filters, and coordinate
/// ascent refinements of the best invertible ones, for every `r` from 2 to
/// `min(d₁, d₂)`.
pub fn e_pt_lower_bound(rho: &DensityOperator, search: &SearchConfig) -> Result<EptResult> {
    let dims = rho.dims();
    if dims.min() < 2 {
        return Err(Error::OutOfRange {
            what: "dimensions",
            detail: format!("E_PT needs min(d1, d2) >= 2, got {dims}"),
        });
    }
    let work = search.frame.prepare(rho);
    let m = work.matrix().clone();
    let mut candidates: Vec<(OpClass, LocalOperatorPair)> = vec![(
        OpClass::LocalInvertible,
        LocalOperatorPair::new(linalg::identity(dims.d1), linalg::identity(dims.d2)),
    )];
    let mut rng = hilbert::rng_from(hilbert::derive_seed(search.seed, 10, 0));
    for _ in 0..search.li_samples {
        let op = locc::sample_operation_with(&mut rng, OpClass::LocalInvertible, dims);
        candidates.push((OpClass::LocalInvertible, op.pairs()[0].clone()));
    }
    for _ in 0..search.lp_samples {
        let op = locc::sample_operation_with(&mut rng, OpClass::LocalProjection, dims);
        candidates.push((OpClass::LocalProjection, op.pairs()[0].clone()));
    }

    let levels: Vec<(usize, CMat)> = (2..=dims.min())
        .map(|r| Ok((r, hilbert::swap_witness_v(r, dims)?.matrix().clone())))
        .collect::<Result<_>>()?;

    // (value, level index, candidate index, refined pair)
    let per_level: Vec<(f64, usize, OpClass, LocalOperatorPair)> = levels
        .par_iter()
        .enumerate()
        .map(|(li, (_, v))| {
            let mut scored: Vec<(f64, usize)> = candidates
                .iter()
                .enumerate()
                .filter_map(|(k, (_, p))| pt_objective(&m, p, v).map(|val| (val, k)))
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut best = scored
                .first()
                .map(|&(val, k)| (val, li, candidates[k].0, candidates[k].1.clone()))
                .unwrap_or((f64::NEG_INFINITY, li, OpClass::LocalInvertible, candidates[0].1.clone()));
            let refinable: Vec<usize> = scored
                .iter()
                .filter(|(_, k)| candidates[*k].0 == OpClass::LocalInvertible)
                .take(search.refine_best)
                .map(|&(_, k)| k)
                .collect();
            for k in refinable {
                let (pair, val) = coordinate_ascent(&candidates[k].1, search.sweeps, |p| {
                    if is_invertible(p) {
                        pt_objective(&m, p, v)
                    } else {
                        None
                    }
                });
                if val > best.0 {
                    best = (val, li, OpClass::LocalInvertible, pair);
                }
            }
            best
        })
        .collect();
    let (raw, li, class, pair) = per_level
        .into_iter()
        .fold(None::<(f64, usize, OpClass, LocalOperatorPair)>, |acc, x| match acc {
            Some(a) if a.0 >= x.0 => Some(a),
            _ => Some(x),
        })
        .expect("at least one level");
    let best_operation = SeparableOperation::new(dims, vec![pair.clone()], class)
        .or_else(|_| SeparableOperation::new(dims, vec![pair], OpClass::General))?;
    Ok(EptResult {
        value: raw.max(0.0),
        raw,
        best_r: levels[li].0,
        best_operation,
    })
}

#[derive(Debug, Clone)]
pub struct WitnessMeasureResult {
    pub value: f64,
    pub raw: f64,
    pub best_index: usize,
    pub thresholds: Vec<f64>,
}

/// `max_W −tr(ρW)` over `W = f₁₂(L)·I − L` for the supplied `L`, clamped at
/// zero. Each `W` is nonnegative on separable states by construction.
pub fn witness_measure_lower_bound(
    rho: &DensityOperator,
    family: &[Observable],
    frame: Frame,
    cfg: &SolverConfig,
) -> Result<WitnessMeasureResult> {
    if family.is_empty() {
        return Err(Error::invalid("nonempty witness family", 0.0));
    }
    let work = frame.prepare(rho);
    let thresholds: Vec<f64> = family
        .iter()
        .map(|l| {
            rho.dims().check_same(&l.dims())?;
            se_solver::f12_r(l, 1, cfg)
        })
        .collect::<Result<_>>()?;
    let mut raw = f64::NEG_INFINITY;
    let mut best_index = 0;
    for (k, (l, f12)) in family.iter().zip(&thresholds).enumerate() {
        let v = hilbert::expectation(&work, l)? - f12;
        if v > raw {
            raw = v;
            best_index = k;
        }
    }
    Ok(WitnessMeasureResult {
        value: raw.max(0.0),
        raw,
        best_index,
        thresholds,
    })
}

/// Operation family `C_X` under test for the operational measure.
#[derive(Debug, Clone)]
pub enum OperationSampler {
    /// `count` sampled operations of one class, preceded by the identity
    /// when `include_identity` is set. Smaller counts with the same seed give
    /// nested families.
    Sampled {
        class: OpClass,
        count: usize,
        seed: u64,
        include_identity: bool,
    },
    Explicit(Vec<SeparableOperation>),
}

impl OperationSampler {
    pub fn operations(&self, dims: BipartiteDims) -> Vec<SeparableOperation> {
        match self {
            OperationSampler::Sampled {
                class,
                count,
                seed,
                include_identity,
            } => {
                let mut ops = Vec::with_capacity(count + 1);
                if *include_identity {
                    ops.push(SeparableOperation::identity(dims, *class));
                }
                let mut rng = hilbert::rng_from(hilbert::derive_seed(*seed, 11, 0));
                for _ in 0..*count {
                    ops.push(locc::sample_operation_with(&mut rng, *class, dims));
                }
                ops
            }
            OperationSampler::Explicit(ops) => ops.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OperationalMeasureResult {
    pub value: f64,
    pub best_operation: Option<SeparableOperation>,
    pub f_m: f64,
    pub f12_m: f64,
    pub raw_supremum: f64,
}

/// `E_M(ρ) = max_Λ [tr(Λ(ρ)M) − f₁₂(M)] / [f(M) − f₁₂(M)]` over the sampled
/// family, clamped to `[0, 1]`; zero by convention when `f(M) = f₁₂(M)`.
pub fn operational_measure(
    rho: &DensityOperator,
    m: &Observable,
    sampler: &OperationSampler,
    frame: Frame,
    cfg: &SolverConfig,
) -> Result<OperationalMeasureResult> {
    let dims = rho.dims();
    dims.check_same(&m.dims())?;
    let f_m = se_solver::f_max(m);
    let f12_m = se_solver::f12_r(m, 1, cfg)?.min(f_m);
    if (f_m - f12_m).abs() <= DEGENERATE_GAP {
        return Ok(OperationalMeasureResult {
            value: 0.0,
            best_operation: None,
            f_m,
            f12_m,
            raw_supremum: 0.0,
        });
    }
    let work = frame.prepare(rho);
    let ops = sampler.operations(dims);
    let scores: Vec<Option<f64>> = ops
        .par_iter()
        .map(|op| {
            let out = locc::apply(op, &work).ok()?;
            hilbert::expectation(&out, m).ok()
        })
        .collect();
    let mut raw = f64::NEG_INFINITY;
    let mut best = None;
    for (k, s) in scores.iter().enumerate() {
        if let Some(e) = s {
            let v = (e - f12_m) / (f_m - f12_m);
            if v > raw {
                raw = v;
                best = Some(k);
            }
        }
    }
    Ok(OperationalMeasureResult {
        value: raw.clamp(0.0, 1.0),
        best_operation: best.map(|k| ops[k].clone()),
        f_m,
        f12_m,
        raw_supremum: raw,
    })
}
