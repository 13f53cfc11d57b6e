//! Entanglement quasi-probabilities built from the r-SE solutions of a state.
//!
//! With `L = ρ`, the stationary vectors `χ_k` satisfy `λ_k = ⟨χ_k|ρ|χ_k⟩`,
//! and the weights of `ρ = Σ_l p_l |χ_l⟩⟨χ_l|` solve `G·p = λ` with
//! `G_kl = |⟨χ_k|χ_l⟩|²`. That system is the normal equation of projecting
//! `ρ` onto the span of the projectors in the Hilbert-Schmidt inner product,
//! so its residual is the reconstruction distance.
//!
//! When the solution set is overcomplete the weights are not unique. The
//! minimal-norm solution is computed first; a nonnegative least-squares fit
//! is then tried on the same projectors and preferred when it also
//! reconstructs `ρ`. A negative weight therefore means no nonnegative
//! combination of the discovered vectors reproduces the state.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{self, check_schmidt_level, BipartitePureState, DensityOperator, Observable};
use crate::linalg::{self, CMat};
use crate::se_solver::{self, SolverConfig};
use crate::witness::{self, Verdict};

pub const RESIDUAL_GATE: f64 = 1e-6;
pub const NEGATIVITY_TOLERANCE: f64 = -1e-6;
const LSTSQ_CUTOFF: f64 = 1e-10;
const PRUNE: f64 = 1e-12;
const DISCOVERY_BATCH: usize = 16;

#[derive(Debug, Clone)]
pub struct Component {
    pub chi: BipartitePureState,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct QuasiProbability {
    pub r: usize,
    pub components: Vec<Component>,
    pub gram: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    pub reconstruction_residual: f64,
    pub min_weight: f64,
    /// Number of r-SE solutions the solver reported before pruning.
    pub solutions_found: usize,
    /// Whether the weights come from the nonnegative fit.
    pub nonnegative_fit: bool,
}

impl QuasiProbability {
    pub fn succeeded(&self) -> bool {
        self.reconstruction_residual <= RESIDUAL_GATE
    }

    pub fn is_classical(&self) -> bool {
        self.succeeded() && self.min_weight >= NEGATIVITY_TOLERANCE
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn reconstruct(&self) -> CMat {
        let n = self.components.first().map_or(0, |c| c.chi.dims().total());
        let mut m = CMat::zeros(n, n);
        for c in &self.components {
            m += c.chi.projector().scale(c.weight);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct Pseudomixture {
    pub mu: f64,
    pub sigma: DensityOperator,
    pub sigma_prime: Option<DensityOperator>,
}

impl Pseudomixture {
    pub fn reconstruct(&self) -> CMat {
        let mut m = self.sigma.matrix().scale(1.0 + self.mu);
        if let Some(sp) = &self.sigma_prime {
            m -= sp.matrix().scale(self.mu);
        }
        m
    }
}

/// Real vectorization of a Hermitian matrix that preserves the
/// Hilbert-Schmidt inner product.
fn hermitian_vec(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    let s2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in i + 1..n {
            out.push(s2 * m[(i, j)].re);
            out.push(s2 * m[(i, j)].im);
        }
    }
    out
}

/// Minimal-norm least squares by SVD with relative singular-value cutoff.
fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> DVector<f64> {
    let (s, u, v) = linalg::svd_real(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let eps = (cutoff * smax).max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(a.ncols());
    for (k, &sk) in s.iter().enumerate() {
        if sk > eps {
            x += v.column(k) * (u.column(k).dot(b) / sk);
        }
    }
    x
}

/// Minimal-norm solution of `G p = λ` for the symmetric Gram matrix through
/// its eigenvalues, dropping those below `cutoff` relative to the largest.
fn gram_solve(g: &DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> DVector<f64> {
    let eig = g.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = (cutoff * top).max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(g.ncols());
    for (k, &val) in eig.eigenvalues.iter().enumerate() {
        if val.abs() > eps {
            let q = eig.eigenvectors.column(k);
            x += q * (q.dot(b) / val);
        }
    }
    x
}

/// Lawson-Hanson nonnegative least squares: `min ‖A x − b‖` with `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let z_sub = min_norm_lstsq(&sub, b, 1e-13);
            if z_sub.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (c, &k) in idx.iter().enumerate() {
                    x[k] = z_sub[c];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (c, &k) in idx.iter().enumerate() {
                if z_sub[c] <= 0.0 {
                    let denom = x[k] - z_sub[c];
                    if denom > 0.0 {
                        alpha = alpha.min(x[k] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (c, &k) in idx.iter().enumerate() {
                x[k] += alpha * (z_sub[c] - x[k]);
                if x[k] <= 1e-15 {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Adds eigenvectors of `ρ` that are themselves verified r-SE vectors.
/// Truncations of the eigenvectors of `ρ` to at most `r` of their Schmidt
/// terms, kept when they pass the r-SE residual. For pure `ρ` these are
/// exactly the saddle solutions, which restarts rarely reach.
fn eigenvector_candidates(rho: &DensityOperator, l: &Observable, r: usize, tol: f64) -> Vec<BipartitePureState> {
    schmidt_truncations(rho, r, false)
        .into_iter()
        .filter(|candidate| {
            let ansatz = se_solver::RankRAnsatz::from_state(candidate, 1e-10);
            let lambda = l.expectation_pure(candidate);
            se_solver::rse_residual(l, &ansatz, lambda).is_ok_and(|res| res <= tol)
        })
        .collect()
}

/// Eigenvectors of `ρ` cut to subsets of at most `r` Schmidt terms, or only
/// to their leading `r` terms when `leading_only`.
fn schmidt_truncations(rho: &DensityOperator, r: usize, leading_only: bool) -> Vec<BipartitePureState> {
    let dims = rho.dims();
    let (_, vecs) = linalg::eigh(rho.matrix());
    let mut out = Vec::new();
    for k in 0..vecs.ncols() {
        let Ok(state) = BipartitePureState::normalized(dims, vecs.column(k).into_owned()) else {
            continue;
        };
        let (s, u, v) = linalg::svd(&state.coefficient_matrix());
        let rank = s.iter().filter(|&&x| x > 1e-10).count();
        for mask in 1u32..(1 << rank) {
            if mask.count_ones() as usize > r || (leading_only && mask != (1 << rank.min(r)) - 1) {
                continue;
            }
            let mut c = CMat::zeros(dims.d1, dims.d2);
            for n in (0..rank).filter(|n| mask & (1 << n) != 0) {
                c += (u.column(n) * v.column(n).adjoint()).scale(s[n]);
            }
            if let Ok(candidate) = BipartitePureState::from_coefficient_matrix(&c.unscale(linalg::fro(&c))) {
                out.push(candidate);
            }
        }
    }
    out
}

fn gram_of(states: &[BipartitePureState]) -> DMatrix<f64> {
    let n = states.len();
    DMatrix::from_fn(n, n, |k, l| states[k].fidelity(&states[l]))
}

struct Fit {
    weights: DVector<f64>,
    residual: f64,
    nonnegative: bool,
    lambdas: Vec<f64>,
}

/// Nonnegative least squares when it passes the residual gate, otherwise the
/// minimum-norm solution of the Gram system.
fn fit_weights(rho: &DensityOperator, l: &Observable, states: &[BipartitePureState]) -> Fit {
    let lambdas: Vec<f64> = states.iter().map(|s| l.expectation_pure(s)).collect();
    if states.is_empty() {
        return Fit {
            weights: DVector::zeros(0),
            residual: rho.matrix().norm(),
            nonnegative: false,
            lambdas,
        };
    }
    let gram = gram_of(states);
    let min_norm = gram_solve(&gram, &DVector::from_column_slice(&lambdas), LSTSQ_CUTOFF);
    let target = DVector::from_vec(hermitian_vec(rho.matrix()));
    let columns: Vec<Vec<f64>> = states.iter().map(|s| hermitian_vec(&s.projector())).collect();
    let a = DMatrix::from_fn(target.len(), states.len(), |i, k| columns[k][i]);
    let residual_of = |p: &DVector<f64>| (&a * p - &target).norm();
    let nonneg = nnls(&a, &target);
    let nonneg_residual = residual_of(&nonneg);
    if nonneg_residual <= RESIDUAL_GATE {
        Fit {
            weights: nonneg,
            residual: nonneg_residual,
            nonnegative: true,
            lambdas,
        }
    } else {
        Fit {
            residual: residual_of(&min_norm),
            weights: min_norm,
            nonnegative: false,
            lambdas,
        }
    }
}

/// Quasi-probability `P_{r-Ent}` of `ρ` from its r-SE solutions.
///
/// Returns [`Error::IncompleteBasis`] carrying the partial result when the
/// discovered solutions cannot reconstruct `ρ` within the residual gate.
pub fn build_quasiprob(rho: &DensityOperator, r: usize, cfg: &SolverConfig) -> Result<QuasiProbability> {
    check_schmidt_level(r, rho.dims())?;
    let l = Observable::from_density(rho);
    let mut states: Vec<BipartitePureState> = Vec::new();
    let absorb = |states: &mut Vec<BipartitePureState>, found: Vec<BipartitePureState>| {
        let before = states.len();
        for s in found {
            if !states.iter().any(|k| k.fidelity(&s) >= cfg.dedupe_overlap) {
                states.push(s);
            }
        }
        states.len() - before
    };
    absorb(&mut states, eigenvector_candidates(rho, &l, r, cfg.tol_residual));
    let mut fit = fit_weights(rho, &l, &states);
    // restarts in batches until the fit is nonnegative or a batch finds
    // nothing new; at most one restart per real parameter of ρ, so the
    // minimum-side solutions can span the operator space
    let n = rho.dims().total();
    let budget = cfg.restarts.max(n * n);
    let mut used = 0;
    let mut batch = 0u64;
    while used < budget && !(fit.nonnegative && fit.residual <= RESIDUAL_GATE) {
        let size = DISCOVERY_BATCH.min(budget - used);
        let run = SolverConfig {
            restarts: size,
            seed: if batch == 0 { cfg.seed } else { hilbert::derive_seed(cfg.seed, 7, batch) },
            ..cfg.clone()
        };
        used += size;
        batch += 1;
        let found = match se_solver::solve_rse_report(&l, r, &run) {
            Ok(report) => report.solutions.into_iter().map(|s| s.state).collect(),
            Err(Error::Convergence { .. }) if !states.is_empty() => Vec::new(),
            Err(e) => return Err(e),
        };
        let added = absorb(&mut states, found);
        if added == 0 && batch > 1 {
            break;
        }
        fit = fit_weights(rho, &l, &states);
    }
    let solutions_found = states.len();
    let Fit {
        weights,
        residual,
        nonnegative: nonnegative_fit,
        lambdas,
    } = fit;

    let mut components = Vec::new();
    let mut kept_lambdas = Vec::new();
    let mut kept_states = Vec::new();
    for (k, state) in states.into_iter().enumerate() {
        if weights[k].abs() >= PRUNE {
            components.push(Component {
                chi: state.clone(),
                weight: weights[k],
            });
            kept_lambdas.push(lambdas[k]);
            kept_states.push(state);
        }
    }
    let min_weight = components.iter().map(|c| c.weight).fold(f64::INFINITY, f64::min);
    let qp = QuasiProbability {
        r,
        gram: gram_of(&kept_states),
        lambdas: kept_lambdas,
        components,
        reconstruction_residual: residual,
        min_weight: if min_weight.is_finite() { min_weight } else { 0.0 },
        solutions_found,
        nonnegative_fit,
    };
    if qp.succeeded() {
        Ok(qp)
    } else {
        Err(Error::IncompleteBasis {
            level: r,
            residual,
            partial: Box::new(qp),
        })
    }
}

#[derive(Debug, Clone)]
pub enum LevelOutcome {
    /// Nonnegative, or negative with the negativity confirmed by the
    /// witness `L = ρ`.
    Complete(QuasiProbability),
    /// The discovered solutions do not reconstruct `ρ`.
    Incomplete(QuasiProbability),
    /// Reconstructs `ρ` only with negative weights, but the witness `L = ρ`
    /// does not certify a Schmidt number above this level. The found set
    /// may simply miss the states of a nonnegative decomposition.
    Unconfirmed(QuasiProbability),
}

impl LevelOutcome {
    pub fn distribution(&self) -> &QuasiProbability {
        match self {
            LevelOutcome::Complete(q) | LevelOutcome::Incomplete(q) | LevelOutcome::Unconfirmed(q) => q,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, LevelOutcome::Complete(_))
    }
}

/// Schmidt-number readout: the smallest level with a nonnegative
/// distribution. Negativity at a level counts only when the witness `L = ρ`
/// certifies it, so a reported value is bounded from both sides. `value` is
/// `None` when an incomplete or unconfirmed level below it leaves the answer
/// open; `lower..=upper` then brackets it.
#[derive(Debug, Clone)]
pub struct SchmidtNumberEstimate {
    pub value: Option<usize>,
    pub lower: usize,
    pub upper: usize,
    pub levels: Vec<(usize, LevelOutcome)>,
}

pub fn estimate_schmidt_number(rho: &DensityOperator, cfg: &SolverConfig) -> Result<SchmidtNumberEstimate> {
    let top = rho.dims().min();
    let l = Observable::from_density(rho);
    let mut levels = Vec::new();
    let mut lower = 1;
    let mut upper = top;
    let mut open_below = false;
    for r in 1..=top {
        match build_quasiprob(rho, r, cfg) {
            Ok(qp) if qp.is_classical() => {
                levels.push((r, LevelOutcome::Complete(qp)));
                upper = r;
                break;
            }
            Ok(qp) => {
                if certified_above(rho, &l, r, cfg)? {
                    levels.push((r, LevelOutcome::Complete(qp)));
                    lower = r + 1;
                } else {
                    open_below = true;
                    levels.push((r, LevelOutcome::Unconfirmed(qp)));
                }
            }
            Err(Error::IncompleteBasis { partial, .. }) => {
                if certified_above(rho, &l, r, cfg)? {
                    lower = r + 1;
                }
                open_below = true;
                levels.push((r, LevelOutcome::Incomplete(*partial)));
            }
            Err(e) => return Err(e),
        }
    }
    let lower = lower.min(upper);
    Ok(SchmidtNumberEstimate {
        value: (!open_below || lower == upper).then_some(upper),
        lower,
        upper,
        levels,
    })
}

/// The value of [`estimate_schmidt_number`] without the bracket. Stops at
/// the first level that is neither nonnegative nor certified, since no
/// higher level can then determine the Schmidt number, and reports it as
/// [`Error::IncompleteBasis`].
pub fn schmidt_number(rho: &DensityOperator, cfg: &SolverConfig) -> Result<usize> {
    let top = rho.dims().min();
    let l = Observable::from_density(rho);
    for r in 1..=top {
        let partial = match build_quasiprob(rho, r, cfg) {
            Ok(qp) if qp.is_classical() => return Ok(r),
            Ok(qp) => qp,
            Err(Error::IncompleteBasis { partial, .. }) => *partial,
            Err(e) => return Err(e),
        };
        if !certified_above(rho, &l, r, cfg)? {
            return Err(Error::IncompleteBasis {
                level: r,
                residual: partial.reconstruction_residual,
                partial: Box::new(partial),
            });
        }
    }
    unreachable!("the top level returns either way")
}

/// Witness `L = ρ` certifies a Schmidt number above `r`.
/// The ascent is also started from the leading truncations of the
/// eigenvectors, which for nearly degenerate Schmidt spectra sit at the
/// maximum that random starts approach only slowly.
fn certified_above(rho: &DensityOperator, l: &Observable, r: usize, cfg: &SolverConfig) -> Result<bool> {
    if r >= rho.dims().min() {
        return Ok(false);
    }
    let warm = schmidt_truncations(rho, r, true);
    // any rank-r state bounds f12 from below, so this already decides it
    let floor = warm.iter().map(|s| l.expectation_pure(s)).fold(f64::NEG_INFINITY, f64::max);
    if hilbert::expectation(rho, l)? - floor <= witness::CERTIFICATION_THRESHOLD {
        return Ok(false);
    }
    let report = se_solver::f12_r_warm(l, r, cfg, &warm)?;
    let threshold = witness::WitnessThreshold {
        r,
        f12_r_value: report.max_lambda(),
        oracle_value: None,
        restarts: report.restarts,
        converged_restarts: report.converged_restarts,
    };
    Ok(witness::certify_against(rho, l, &threshold)?.verdict == Verdict::CertifiedAboveR)
}

/// Splits a successful distribution into `ρ = (1+μ)σ − μσ′`.
pub fn pseudomixture(qp: &QuasiProbability) -> Result<Pseudomixture> {
    if !qp.succeeded() {
        return Err(Error::IncompleteBasis {
            level: qp.r,
            residual: qp.reconstruction_residual,
            partial: Box::new(qp.clone()),
        });
    }
    let dims = qp
        .components
        .first()
        .map(|c| c.chi.dims())
        .ok_or_else(|| Error::invalid("nonempty distribution", 0.0))?;
    let n = dims.total();
    let mut pos = CMat::zeros(n, n);
    let mut neg = CMat::zeros(n, n);
    let mut pos_sum = 0.0;
    let mut mu = 0.0;
    for c in &qp.components {
        if c.weight > 0.0 {
            pos += c.chi.projector().scale(c.weight);
            pos_sum += c.weight;
        } else {
            neg += c.chi.projector().scale(-c.weight);
            mu -= c.weight;
        }
    }
    let sigma = DensityOperator::normalized(dims, pos.unscale(pos_sum))?;
    let sigma_prime = if mu > 0.0 {
        Some(DensityOperator::normalized(dims, neg.unscale(mu))?)
    } else {
        None
    };
    Ok(Pseudomixture { mu, sigma, sigma_prime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{phi_r, BipartiteDims};

    fn d(a: usize, b: usize) -> BipartiteDims {
        BipartiteDims::new(a, b).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default().with_seed(11)
    }

    #[test]
    fn real_lstsq_is_exact_on_rank_deficient_input() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..200 {
            let (m, n) = (3 + trial % 7, 2 + trial % 9);
            let rank = 1 + trial % m.min(n);
            let mut a = DMatrix::zeros(m, n);
            for _ in 0..rank {
                let x = DVector::from_fn(m, |_, _| rng.random::<f64>() - 0.5);
                let y = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
                a += x * y.transpose();
            }
            let truth = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
            let b = &a * &truth;
            let x = min_norm_lstsq(&a, &b, 1e-10);
            assert!((&a * &x - &b).norm() < 1e-10 * (1.0 + b.norm()), "trial {trial}");
        }
    }

    #[test]
    fn early_readout_agrees_with_estimate() {
        let cfg = SolverConfig::default();
        let d = BipartiteDims::new(2, 3).unwrap();
        let phi = phi_r(2, d).unwrap().density();
        let corner = BipartitePureState::basis(d, 1, 2).unwrap().density();
        let states = [
            DensityOperator::mixture(&[(0.7, &phi), (0.3, &corner)]).unwrap(),
            crate::hilbert::random_density(d, 3, 4),
            crate::hilbert::random_separable(d, 3, 2),
        ];
        for rho in &states {
            let est = estimate_schmidt_number(rho, &cfg).unwrap();
            match schmidt_number(rho, &cfg) {
                Ok(v) => assert_eq!(Some(v), est.value),
                Err(Error::IncompleteBasis { .. }) => assert_eq!(est.value, None),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn nnls_small_problem() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, -1.0, 0.0]);
        let x = nnls(&a, &b);
        assert!(x.iter().all(|&v| v >= 0.0));
        // unconstrained optimum (1, -1) is infeasible; best is (0.5, 0)
        assert!((x[0] - 0.5).abs() < 1e-12 && x[1].abs() < 1e-12);
    }

    #[test]
    fn product_state_single_component() {
        let rho = BipartitePureState::basis(d(2, 2), 0, 0).unwrap().density();
        let qp = build_quasiprob(&rho, 1, &cfg()).unwrap();
        assert!(qp.reconstruction_residual < 1e-9);
        assert!(qp.min_weight >= -1e-8);
        assert!((qp.weight_sum() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bell_state_shows_negativity_at_r1() {
        let rho = phi_r(2, d(2, 2)).unwrap().density();
        let qp = build_quasiprob(&rho, 1, &cfg()).unwrap();
        assert!(qp.min_weight < NEGATIVITY_TOLERANCE);
        assert!((qp.weight_sum() - 1.0).abs() < 1e-6);
        let pm = pseudomixture(&qp).unwrap();
        assert!(pm.mu > 0.0);
        assert!(linalg::max_abs_diff(&pm.reconstruct(), rho.matrix()) < 1e-6);
        let two = build_quasiprob(&rho, 2, &cfg()).unwrap();
        assert!(two.min_weight >= -1e-8);
    }

    #[test]
    fn gram_structure_and_lambda_identity() {
        let rho = phi_r(2, d(2, 2)).unwrap().density();
        let qp = build_quasiprob(&rho, 1, &cfg()).unwrap();
        for k in 0..qp.gram.nrows() {
            assert!((qp.gram[(k, k)] - 1.0).abs() < 1e-12);
            for l in 0..k {
                assert!((qp.gram[(k, l)] - qp.gram[(l, k)]).abs() < 1e-14);
            }
            let expect = crate::hilbert::expectation(&rho, &Observable::projector(&qp.components[k].chi)).unwrap();
            assert!((qp.lambdas[k] - expect).abs() < 1e-8);
            assert!(qp.components[k].chi.schmidt_rank() <= 1);
        }
    }

    #[test]
    fn schmidt_number_of_phi3_and_maximally_mixed() {
        let est = estimate_schmidt_number(&phi_r(3, d(3, 3)).unwrap().density(), &cfg()).unwrap();
        assert_eq!(est.value, Some(3));
        let est = estimate_schmidt_number(&DensityOperator::maximally_mixed(d(2, 2)), &cfg()).unwrap();
        assert_eq!(est.value, Some(1));
        let pm = pseudomixture(match &est.levels[0].1 {
            LevelOutcome::Complete(q) => q,
            other => panic!("level not complete: {other:?}"),
        })
        .unwrap();
        assert_eq!(pm.mu, 0.0);
        assert!(pm.sigma_prime.is_none());
    }
}
