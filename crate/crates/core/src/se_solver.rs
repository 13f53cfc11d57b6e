//! Solver for the rank-r separability eigenvalue (r-SE) equations
//!
//! ```text
//! L_y |x⃗⟩ = λ (Y ⊗ I₁) |x⃗⟩,      L_x |y⃗⟩ = λ (X ⊗ I₂) |y⃗⟩
//! ```
//!
//! for the ansatz `|ψ_r⟩ = Σ_k |x_k⟩⊗|y_k⟩`, where `X`, `Y` are the Gram
//! matrices of the local vectors and `L_x`, `L_y` the block operators
//! `(⟨x_i|L|x_j⟩)` and `(⟨y_i|L|y_j⟩)`.
//!
//! Each restart draws a random ansatz and alternates between the two sides.
//! With one side fixed the other equation is a generalized Hermitian
//! eigenproblem, reduced to an ordinary one with the inverse square root of
//! the Gram matrix. Three kinds of trajectory are run from every start:
//!
//! * `Max` takes the top eigenpair at every half-step. `λ` is then
//!   nondecreasing and the trajectory converges to a local maximum; the
//!   largest value over all restarts is the estimate of `f₁₂⁽ʳ⁾(L)`.
//! * `Min` takes the bottom eigenpair (the same ascent applied to `-L`).
//! * `Track` follows the eigenpair with the largest overlap with the current
//!   state. Started from the intermediate eigenvectors of the first
//!   half-step, these reach the non-extremal stationary points.
//!
//! A trajectory is reported only if both equations hold to `tol_residual`.
//! When the fixed side has fewer than `r` independent vectors, its span is
//! padded with random orthogonal directions so the rank can grow again.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    self, check_schmidt_level, BipartiteDims, BipartitePureState, Observable, Subsystem,
};
use crate::linalg::{self, CMat, CVec, ZERO};

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol_lambda: f64,
    pub tol_residual: f64,
    pub dedupe_overlap: f64,
    pub seed: u64,
    pub gram_rank_cutoff: f64,
    /// Polish the intermediate eigenpairs of each start into additional
    /// stationary points.
    pub polish_candidates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iter: 500,
            tol_lambda: 1e-10,
            tol_residual: 1e-8,
            dedupe_overlap: 1.0 - 1e-6,
            seed: 0,
            gram_rank_cutoff: 1e-10,
            polish_candidates: true,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_lambda", self.tol_lambda),
            ("tol_residual", self.tol_residual),
            ("gram_rank_cutoff", self.gram_rank_cutoff),
        ] {
            if !(v > 0.0) {
                return Err(Error::invalid(format!("{name} > 0"), v));
            }
        }
        if !(self.dedupe_overlap > 0.0 && self.dedupe_overlap <= 1.0) {
            return Err(Error::invalid("dedupe_overlap in (0, 1]", self.dedupe_overlap));
        }
        if self.restarts == 0 || self.max_iter == 0 {
            return Err(Error::invalid("restarts and max_iter >= 1", 0.0));
        }
        Ok(())
    }
}

/// `|ψ_r⟩ = Σ_k |x_k⟩⊗|y_k⟩`; vectors need be neither orthogonal nor
/// normalized, only the assembled state has unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRAnsatz {
    pub r: usize,
    pub x_vectors: Vec<CVec>,
    pub y_vectors: Vec<CVec>,
}

impl RankRAnsatz {
    pub fn assemble(&self) -> CVec {
        let d1 = self.x_vectors.first().map_or(0, |v| v.len());
        let d2 = self.y_vectors.first().map_or(0, |v| v.len());
        let mut v = CVec::zeros(d1 * d2);
        for (x, y) in self.x_vectors.iter().zip(&self.y_vectors) {
            v += x.kronecker(y);
        }
        v
    }

    pub fn gram_x(&self) -> CMat {
        gram(&self.x_vectors)
    }

    pub fn gram_y(&self) -> CMat {
        gram(&self.y_vectors)
    }

    /// Canonical gauge from the Schmidt form: `x_k = √s_k e_k`, `y_k = √s_k f_k`.
    pub fn from_state(state: &BipartitePureState, cutoff: f64) -> Self {
        let (s, u, v) = linalg::svd(&state.coefficient_matrix());
        let rank = s.iter().filter(|&&x| x > cutoff).count().max(1);
        let x_vectors = (0..rank)
            .map(|k| u.column(k).into_owned().scale(s[k].sqrt()))
            .collect();
        let y_vectors = (0..rank)
            .map(|k| v.column(k).map(|z| z.conj()).scale(s[k].sqrt()))
            .collect();
        Self {
            r: rank,
            x_vectors,
            y_vectors,
        }
    }
}

fn gram(vectors: &[CVec]) -> CMat {
    let r = vectors.len();
    CMat::from_fn(r, r, |i, j| vectors[i].dotc(&vectors[j]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrajectoryKind {
    Max,
    Min,
    Track,
}

/// One stationary point of the r-SE equations.
#[derive(Debug, Clone)]
pub struct RSESolution {
    pub lambda: f64,
    pub ansatz: RankRAnsatz,
    pub state: BipartitePureState,
    pub gram_x: CMat,
    pub gram_y: CMat,
    pub residual: f64,
    pub iterations: usize,
    pub kind: TrajectoryKind,
}

/// Solver output with restart statistics.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub r: usize,
    pub solutions: Vec<RSESolution>,
    pub restarts: usize,
    pub trajectories: usize,
    pub converged_trajectories: usize,
    pub converged_restarts: usize,
    pub best_unconverged_residual: Option<f64>,
    pub total_iterations: usize,
    /// `λ` after every half-step of each `Max` trajectory, in restart order.
    pub ascent_traces: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn max_lambda(&self) -> f64 {
        self.solutions
            .iter()
            .map(|s| s.lambda)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Block operator and Gram matrix for one fixed side.
///
/// With `side_vectors` on `H₂` (the `y_k`, `side = Second`) the `(i, j)`
/// block is `tr₂[L (I₁ ⊗ |y_j⟩⟨y_i|)] = ⟨y_i|L|y_j⟩`, an operator on `H₁`;
/// with vectors on `H₁` it is `tr₁[L (|x_j⟩⟨x_i| ⊗ I₂)]`. Row index of the
/// result is `i·d + a`.
pub fn assemble_blocks(
    l: &Observable,
    side_vectors: &[CVec],
    side: Subsystem,
) -> Result<(CMat, CMat)> {
    let dims = l.dims();
    let (fixed_dim, free_dim) = match side {
        Subsystem::Second => (dims.d2, dims.d1),
        Subsystem::First => (dims.d1, dims.d2),
    };
    if side_vectors.is_empty() {
        return Err(Error::invalid("at least one side vector", 0.0));
    }
    for v in side_vectors {
        if v.len() != fixed_dim {
            return Err(Error::dims(fixed_dim, v.len()));
        }
    }
    let r = side_vectors.len();
    let m = l.matrix();
    // contracted[(j, composite row)] = Σ_d L[row, (·, d)] v_j[d]
    let n = dims.total();
    let mut right: Vec<CMat> = Vec::with_capacity(r);
    for v in side_vectors {
        // L (I ⊗ |v⟩) or L (|v⟩ ⊗ I) as an n × free_dim matrix
        let mut t = CMat::zeros(n, free_dim);
        for row in 0..n {
            for b in 0..free_dim {
                let mut acc = ZERO;
                for (d, vd) in v.iter().enumerate() {
                    let col = match side {
                        Subsystem::Second => dims.index(b, d),
                        Subsystem::First => dims.index(d, b),
                    };
                    acc += m[(row, col)] * vd;
                }
                t[(row, b)] = acc;
            }
        }
        right.push(t);
    }
    let mut block = CMat::zeros(r * free_dim, r * free_dim);
    for (i, vi) in side_vectors.iter().enumerate() {
        for (j, tj) in right.iter().enumerate() {
            for a in 0..free_dim {
                for b in 0..free_dim {
                    let mut acc = ZERO;
                    for (c, vc) in vi.iter().enumerate() {
                        let row = match side {
                            Subsystem::Second => dims.index(a, c),
                            Subsystem::First => dims.index(c, a),
                        };
                        acc += vc.conj() * tj[(row, b)];
                    }
                    block[(i * free_dim + a, j * free_dim + b)] = acc;
                }
            }
        }
    }
    Ok((block, gram(side_vectors)))
}

/// Max over both equation residuals for the given ansatz and `λ`.
pub fn rse_residual(l: &Observable, ansatz: &RankRAnsatz, lambda: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (fixed, free, side) in [
        (&ansatz.y_vectors, &ansatz.x_vectors, Subsystem::Second),
        (&ansatz.x_vectors, &ansatz.y_vectors, Subsystem::First),
    ] {
        let (block, g) = assemble_blocks(l, fixed, side)?;
        let d = free[0].len();
        let stacked = CVec::from_iterator(free.len() * d, free.iter().flat_map(|v| v.iter().copied()));
        let metric = linalg::kron(&g, &linalg::identity(d));
        let res = &block * &stacked - (&metric * &stacked).scale(lambda);
        worst = worst.max(linalg::vec_norm(&res));
    }
    Ok(worst)
}

/// Largest eigenvalue `f(L)`.
pub fn f_max(l: &Observable) -> f64 {
    *l.eigenvalues().last().expect("nonempty operator")
}

// ---------------------------------------------------------------------------
// iteration machinery

struct Trajectory {
    coeff: CMat,
    trace: Vec<f64>,
    iterations: usize,
    residual: f64,
}

fn state_of(coeff: &CMat) -> BipartitePureState {
    BipartitePureState::from_coefficient_matrix(coeff).expect("nonzero iterate")
}

/// Orthonormal support of one side of `coeff`, padded with random
/// orthogonal directions up to `r` (bounded by the side dimension). The fixed
/// vectors are orthonormal so the half-step Gram matrix is the identity; the
/// free partners carry the Schmidt coefficients and padding partners are zero.
fn side_frame<R: Rng>(
    coeff: &CMat,
    side: Subsystem,
    r: usize,
    cutoff: f64,
    rng: &mut R,
) -> (Vec<CVec>, Vec<CVec>) {
    let (s, u, v) = linalg::svd(coeff);
    let rank = s.iter().filter(|&&x| x > cutoff).count().max(1);
    // ψ = Σ s_k u_k ⊗ conj(v_k)
    let (fixed_basis, free_basis): (Vec<CVec>, Vec<CVec>) = match side {
        Subsystem::Second => (
            (0..rank).map(|k| v.column(k).map(|z| z.conj())).collect(),
            (0..rank).map(|k| u.column(k).into_owned()).collect(),
        ),
        Subsystem::First => (
            (0..rank).map(|k| u.column(k).into_owned()).collect(),
            (0..rank).map(|k| v.column(k).map(|z| z.conj())).collect(),
        ),
    };
    let dim = fixed_basis[0].len();
    let mut fixed: Vec<CVec> = fixed_basis.clone();
    let mut free: Vec<CVec> = free_basis
        .iter()
        .zip(&s)
        .map(|(f, sk)| f.scale(*sk))
        .collect();
    let mut ortho = fixed_basis;
    while fixed.len() < r.min(dim) {
        let mut cand = hilbert::gaussian_vector(rng, dim);
        for _ in 0..2 {
            for q in &ortho {
                let proj = q.dotc(&cand);
                cand -= q.scale(1.0).map(|z| z * proj);
            }
        }
        let n = linalg::vec_norm(&cand);
        if n < 1e-8 {
            continue;
        }
        let unit = cand.unscale(n);
        ortho.push(unit.clone());
        fixed.push(unit);
        free.push(CVec::zeros(free[0].len()));
    }
    (fixed, free)
}

/// Groups ascending eigenvalues into clusters of numerically equal values.
fn clusters(vals: &[f64]) -> Vec<(usize, usize)> {
    let scale = vals.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > tol {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// Picks the next iterate in reduced coordinates according to `kind`.
fn choose(kind: TrajectoryKind, vals: &[f64], vecs: &CMat, current: &CVec) -> (f64, CVec) {
    let groups = clusters(vals);
    let weight = |(a, b): (usize, usize)| -> f64 {
        (a..b).map(|k| vecs.column(k).dotc(current).norm_sqr()).sum()
    };
    let group = match kind {
        TrajectoryKind::Max => *groups.last().unwrap(),
        TrajectoryKind::Min => groups[0],
        TrajectoryKind::Track => *groups
            .iter()
            .max_by(|x, y| weight(**x).total_cmp(&weight(**y)))
            .unwrap(),
    };
    let (a, b) = group;
    let mut proj = CVec::zeros(vecs.nrows());
    for k in a..b {
        let col = vecs.column(k);
        let amp = col.dotc(current);
        proj += col.map(|z| z * amp);
    }
    let n = linalg::vec_norm(&proj);
    let z = if n > 1e-8 {
        proj.unscale(n)
    } else {
        vecs.column(b - 1).into_owned()
    };
    let lambda = vals[a..b].iter().sum::<f64>() / (b - a) as f64;
    (lambda, z)
}

struct HalfStep {
    /// Reduced operator eigen-decomposition.
    vals: Vec<f64>,
    vecs: CMat,
    /// Map from reduced coordinates to stacked free vectors: `W ⊗ I`.
    lift: CMat,
    fixed: Vec<CVec>,
    current: CVec,
}

fn half_step_setup<R: Rng>(
    l: &Observable,
    coeff: &CMat,
    side: Subsystem,
    r: usize,
    cutoff: f64,
    rng: &mut R,
) -> HalfStep {
    let (fixed, free) = side_frame(coeff, side, r, cutoff, rng);
    let (block, g) = assemble_blocks(l, &fixed, side).expect("consistent dimensions");
    let free_dim = free[0].len();
    let w = linalg::inv_sqrt_support(&g, cutoff);
    let lift = linalg::kron(&w, &linalg::identity(free_dim));
    let reduced = lift.adjoint() * &block * &lift;
    let (vals, vecs) = linalg::eigh(&reduced);
    // current state in reduced coordinates: z = ((W† G) ⊗ I) x⃗
    let stacked = CVec::from_iterator(
        free.len() * free_dim,
        free.iter().flat_map(|v| v.iter().copied()),
    );
    let back = linalg::kron(&(w.adjoint() * &g), &linalg::identity(free_dim));
    let current = back * stacked;
    HalfStep {
        vals,
        vecs,
        lift,
        fixed,
        current,
    }
}

fn half_step_finish(step: &HalfStep, z: &CVec, side: Subsystem, dims: BipartiteDims) -> CMat {
    let stacked = &step.lift * z;
    let free_dim = match side {
        Subsystem::Second => dims.d1,
        Subsystem::First => dims.d2,
    };
    let mut coeff = CMat::zeros(dims.d1, dims.d2);
    for (k, fixed) in step.fixed.iter().enumerate() {
        let free = stacked.rows(k * free_dim, free_dim);
        match side {
            Subsystem::Second => coeff += free * fixed.transpose(),
            Subsystem::First => coeff += fixed * free.transpose(),
        }
    }
    coeff
}

const STALL_WINDOW: usize = 25;

fn run_trajectory<R: Rng>(
    l: &Observable,
    r: usize,
    cfg: &SolverConfig,
    kind: TrajectoryKind,
    start: CMat,
    rng: &mut R,
) -> Trajectory {
    let dims = l.dims();
    let mut coeff = start;
    let norm = linalg::fro(&coeff);
    coeff.unscale_mut(norm);
    let mut lambda = state_expectation(l, &coeff);
    let mut trace = vec![lambda];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    // stationary iterations without the residual halving
    let mut stalled = 0;
    let mut stall_best = f64::INFINITY;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let previous = lambda;
        for side in [Subsystem::Second, Subsystem::First] {
            let step = half_step_setup(l, &coeff, side, r, cfg.gram_rank_cutoff, rng);
            let (lam, z) = choose(kind, &step.vals, &step.vecs, &step.current);
            coeff = half_step_finish(&step, &z, side, dims);
            let n = linalg::fro(&coeff);
            coeff.unscale_mut(n);
            lambda = lam;
            if kind == TrajectoryKind::Max {
                trace.push(lambda);
            }
        }
        if (lambda - previous).abs() < cfg.tol_lambda {
            let ansatz = RankRAnsatz::from_state(&state_of(&coeff), cfg.gram_rank_cutoff);
            let exact = state_expectation(l, &coeff);
            residual = rse_residual(l, &ansatz, exact).unwrap_or(f64::INFINITY);
            if residual <= cfg.tol_residual {
                break;
            }
            if residual < 0.5 * stall_best {
                stall_best = residual;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= STALL_WINDOW {
                    break;
                }
            }
        }
    }
    Trajectory {
        coeff,
        trace,
        iterations,
        residual,
    }
}

fn state_expectation(l: &Observable, coeff: &CMat) -> f64 {
    l.expectation_pure(&state_of(coeff))
}

fn random_start<R: Rng>(dims: BipartiteDims, r: usize, rng: &mut R) -> CMat {
    let mut coeff = CMat::zeros(dims.d1, dims.d2);
    for _ in 0..r {
        let x = hilbert::gaussian_vector(rng, dims.d1);
        let y = hilbert::gaussian_vector(rng, dims.d2);
        coeff += x * y.transpose();
    }
    coeff
}

struct RestartOutcome {
    trajectories: Vec<(TrajectoryKind, Trajectory)>,
}

fn run_restart(
    l: &Observable,
    r: usize,
    cfg: &SolverConfig,
    index: usize,
    warm: Option<&CMat>,
    ascent_only: bool,
) -> RestartOutcome {
    let dims = l.dims();
    let mut rng = hilbert::rng_from(hilbert::derive_seed(cfg.seed, 1, index as u64));
    let start = match warm {
        Some(c) => c.clone(),
        None => random_start(dims, r, &mut rng),
    };
    let mut trajectories = Vec::new();
    let max = run_trajectory(l, r, cfg, TrajectoryKind::Max, start.clone(), &mut rng);
    trajectories.push((TrajectoryKind::Max, max));
    if warm.is_some() || ascent_only {
        return RestartOutcome { trajectories };
    }
    let min = run_trajectory(l, r, cfg, TrajectoryKind::Min, start.clone(), &mut rng);
    trajectories.push((TrajectoryKind::Min, min));
    if cfg.polish_candidates {
        let mut normalized = start;
        let n = linalg::fro(&normalized);
        normalized.unscale_mut(n);
        let step = half_step_setup(l, &normalized, Subsystem::Second, r, cfg.gram_rank_cutoff, &mut rng);
        let groups = clusters(&step.vals);
        if groups.len() > 2 {
            for &(a, _) in &groups[1..groups.len() - 1] {
                let z = step.vecs.column(a).into_owned();
                let seed_coeff = half_step_finish(&step, &z, Subsystem::Second, dims);
                let t = run_trajectory(l, r, cfg, TrajectoryKind::Track, seed_coeff, &mut rng);
                trajectories.push((TrajectoryKind::Track, t));
            }
        }
    }
    RestartOutcome { trajectories }
}

fn to_solution(l: &Observable, kind: TrajectoryKind, t: &Trajectory, cutoff: f64) -> RSESolution {
    let state = state_of(&t.coeff);
    let ansatz = RankRAnsatz::from_state(&state, cutoff);
    RSESolution {
        lambda: l.expectation_pure(&state),
        gram_x: ansatz.gram_x(),
        gram_y: ansatz.gram_y(),
        ansatz,
        state,
        residual: t.residual,
        iterations: t.iterations,
        kind,
    }
}

fn lexicographic(a: &CVec, b: &CVec) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Sorts by `λ` descending (ties by phase-aligned amplitudes) and drops
/// states whose fidelity with an already kept one reaches `overlap`.
pub(crate) fn dedupe_sorted(mut solutions: Vec<RSESolution>, overlap: f64) -> Vec<RSESolution> {
    solutions.sort_by(|a, b| {
        b.lambda
            .total_cmp(&a.lambda)
            .then_with(|| lexicographic(&a.state.phase_aligned(), &b.state.phase_aligned()))
    });
    let mut kept: Vec<RSESolution> = Vec::new();
    for s in solutions {
        if kept.iter().any(|k| k.state.fidelity(&s.state) >= overlap) {
            continue;
        }
        kept.push(s);
    }
    kept
}

fn solve_inner(
    l: &Observable,
    r: usize,
    cfg: &SolverConfig,
    warm_starts: &[BipartitePureState],
    ascent_only: bool,
) -> Result<SolveReport> {
    let dims = l.dims();
    check_schmidt_level(r, dims)?;
    cfg.validate()?;
    let warm: Vec<CMat> = warm_starts
        .iter()
        .map(|s| {
            dims.check_same(&s.dims())?;
            Ok(s.coefficient_matrix())
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Option<&CMat>)> = (0..cfg.restarts)
        .map(|i| (i, None))
        .chain(warm.iter().enumerate().map(|(i, c)| (cfg.restarts + i, Some(c))))
        .collect();
    let outcomes: Vec<RestartOutcome> = jobs
        .par_iter()
        .map(|(i, w)| run_restart(l, r, cfg, *i, *w, ascent_only))
        .collect();

    let mut solutions = Vec::new();
    let mut trajectories = 0;
    let mut converged_trajectories = 0;
    let mut converged_restarts = 0;
    let mut best_unconverged: Option<f64> = None;
    let mut total_iterations = 0;
    let mut ascent_traces = Vec::new();
    for outcome in &outcomes {
        let mut any = false;
        for (kind, t) in &outcome.trajectories {
            trajectories += 1;
            total_iterations += t.iterations;
            if *kind == TrajectoryKind::Max {
                ascent_traces.push(t.trace.clone());
            }
            if t.residual <= cfg.tol_residual {
                converged_trajectories += 1;
                any = true;
                solutions.push(to_solution(l, *kind, t, cfg.gram_rank_cutoff));
            } else {
                best_unconverged = Some(best_unconverged.map_or(t.residual, |b: f64| b.min(t.residual)));
            }
        }
        if any {
            converged_restarts += 1;
        }
    }
    if solutions.is_empty() {
        return Err(Error::Convergence {
            restarts: jobs.len(),
            best_residual: best_unconverged.unwrap_or(f64::INFINITY),
        });
    }
    Ok(SolveReport {
        r,
        solutions: dedupe_sorted(solutions, cfg.dedupe_overlap),
        restarts: jobs.len(),
        trajectories,
        converged_trajectories,
        converged_restarts,
        best_unconverged_residual: best_unconverged,
        total_iterations,
        ascent_traces,
    })
}

/// Full solver run with statistics.
pub fn solve_rse_report(l: &Observable, r: usize, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_inner(l, r, cfg, &[], false)
}

/// Like [`solve_rse_report`] with extra `Max` trajectories started from the
/// given states (any Schmidt rank up to `r`).
pub fn solve_rse_warm(
    l: &Observable,
    r: usize,
    cfg: &SolverConfig,
    warm_starts: &[BipartitePureState],
) -> Result<SolveReport> {
    solve_inner(l, r, cfg, warm_starts, false)
}

/// Deduplicated r-SE solutions sorted by `λ` descending.
pub fn solve_rse(l: &Observable, r: usize, cfg: &SolverConfig) -> Result<Vec<RSESolution>> {
    Ok(solve_rse_report(l, r, cfg)?.solutions)
}

/// Largest r-SE found; a certified lower bound on `f₁₂⁽ʳ⁾(L)` (every solution
/// is an explicit rank-≤r unit vector). Only ascent trajectories are run.
pub fn f12_r(l: &Observable, r: usize, cfg: &SolverConfig) -> Result<f64> {
    Ok(f12_r_report(l, r, cfg)?.max_lambda())
}

/// Ascent trajectories only; the report holds the maxima found.
pub fn f12_r_report(l: &Observable, r: usize, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_inner(l, r, cfg, &[], true)
}

/// [`f12_r_report`] with extra ascents from the given states.
pub fn f12_r_warm(l: &Observable, r: usize, cfg: &SolverConfig, warm_starts: &[BipartitePureState]) -> Result<SolveReport> {
    solve_inner(l, r, cfg, warm_starts, true)
}

// ---------------------------------------------------------------------------
// r = 1: plain separability eigenvalue equations L_b|a⟩ = g|a⟩, L_a|b⟩ = g|b⟩

/// `L_b = tr₂[L (I ⊗ |b⟩⟨b|)]` for unit `b`, or the mirrored `L_a`.
fn reduced_operator(l: &Observable, v: &CVec, side: Subsystem) -> CMat {
    let dims = l.dims();
    let m = l.matrix();
    match side {
        Subsystem::Second => CMat::from_fn(dims.d1, dims.d1, |a, b| {
            let mut acc = ZERO;
            for c in 0..dims.d2 {
                for d in 0..dims.d2 {
                    acc += v[c].conj() * m[(dims.index(a, c), dims.index(b, d))] * v[d];
                }
            }
            acc
        }),
        Subsystem::First => CMat::from_fn(dims.d2, dims.d2, |c, d| {
            let mut acc = ZERO;
            for a in 0..dims.d1 {
                for b in 0..dims.d1 {
                    acc += v[a].conj() * m[(dims.index(a, c), dims.index(b, d))] * v[b];
                }
            }
            acc
        }),
    }
}

fn se_residual(l: &Observable, a: &CVec, b: &CVec, g: f64) -> f64 {
    let la = reduced_operator(l, a, Subsystem::First);
    let lb = reduced_operator(l, b, Subsystem::Second);
    let r1 = linalg::vec_norm(&(&lb * a - a.scale(g)));
    let r2 = linalg::vec_norm(&(&la * b - b.scale(g)));
    r1.max(r2)
}

fn se_trajectory<R: Rng>(
    l: &Observable,
    cfg: &SolverConfig,
    kind: TrajectoryKind,
    mut a: CVec,
    mut b: CVec,
    _rng: &mut R,
) -> (CVec, CVec, f64, f64, usize) {
    a.unscale_mut(linalg::vec_norm(&a));
    b.unscale_mut(linalg::vec_norm(&b));
    let mut g = l.expectation_pure(&BipartitePureState::product(&a, &b).expect("unit vectors"));
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let previous = g;
        let lb = reduced_operator(l, &b, Subsystem::Second);
        let (vals, vecs) = linalg::eigh(&lb);
        let (ga, na) = choose(kind, &vals, &vecs, &a);
        a = na;
        let la = reduced_operator(l, &a, Subsystem::First);
        let (vals, vecs) = linalg::eigh(&la);
        let (gb, nb) = choose(kind, &vals, &vecs, &b);
        b = nb;
        let _ = ga;
        g = gb;
        if (g - previous).abs() < cfg.tol_lambda {
            residual = se_residual(l, &a, &b, g);
            if residual <= cfg.tol_residual {
                break;
            }
        }
    }
    (a, b, g, residual, iterations)
}

/// r = 1 specialization on normalized local vectors with ordinary
/// eigenproblems on `H₁` and `H₂`.
pub fn se_solve_r1(l: &Observable, cfg: &SolverConfig) -> Result<Vec<RSESolution>> {
    cfg.validate()?;
    let dims = l.dims();
    let runs: Vec<Vec<(TrajectoryKind, CVec, CVec, f64, f64, usize)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = hilbert::rng_from(hilbert::derive_seed(cfg.seed, 2, i as u64));
            let a0 = hilbert::gaussian_vector(&mut rng, dims.d1);
            let b0 = hilbert::gaussian_vector(&mut rng, dims.d2);
            let mut out = Vec::new();
            for kind in [TrajectoryKind::Max, TrajectoryKind::Min] {
                let (a, b, g, res, it) = se_trajectory(l, cfg, kind, a0.clone(), b0.clone(), &mut rng);
                out.push((kind, a, b, g, res, it));
            }
            if cfg.polish_candidates {
                let mut b = b0.clone();
                b.unscale_mut(linalg::vec_norm(&b));
                let (vals, vecs) = linalg::eigh(&reduced_operator(l, &b, Subsystem::Second));
                let groups = clusters(&vals);
                if groups.len() > 2 {
                    for &(s, _) in &groups[1..groups.len() - 1] {
                        let a = vecs.column(s).into_owned();
                        let (a, b, g, res, it) =
                            se_trajectory(l, cfg, TrajectoryKind::Track, a, b.clone(), &mut rng);
                        out.push((TrajectoryKind::Track, a, b, g, res, it));
                    }
                }
            }
            out
        })
        .collect();
    let mut solutions = Vec::new();
    let mut best = f64::INFINITY;
    for (kind, a, b, g, res, it) in runs.into_iter().flatten() {
        if res <= cfg.tol_residual {
            let state = BipartitePureState::product(&a, &b)?;
            let ansatz = RankRAnsatz {
                r: 1,
                x_vectors: vec![a],
                y_vectors: vec![b],
            };
            solutions.push(RSESolution {
                lambda: g,
                gram_x: ansatz.gram_x(),
                gram_y: ansatz.gram_y(),
                ansatz,
                state,
                residual: res,
                iterations: it,
                kind,
            });
        } else {
            best = best.min(res);
        }
    }
    if solutions.is_empty() {
        return Err(Error::Convergence {
            restarts: cfg.restarts,
            best_residual: best,
        });
    }
    Ok(dedupe_sorted(solutions, cfg.dedupe_overlap))
}

// ---------------------------------------------------------------------------
// independent lower-bound oracle

/// Orthonormal basis of the span of `vectors` by modified Gram-Schmidt.
fn orthonormal_span(vectors: &[CVec]) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let p = q.dotc(&w);
                w -= q.map(|z| z * p);
            }
        }
        let n = linalg::vec_norm(&w);
        let scale = linalg::vec_norm(v).max(1e-300);
        if n > 1e-10 * scale {
            basis.push(w.unscale(n));
        }
    }
    basis
}

/// Projects the flat vector `psi` onto `H₁ ⊗ span(basis)` (`side = Second`)
/// or `span(basis) ⊗ H₂`, returning the components with respect to `basis`.
fn project_side(psi: &CVec, basis: &[CVec], side: Subsystem, dims: BipartiteDims) -> (CVec, Vec<CVec>) {
    let mut out = CVec::zeros(dims.total());
    let mut partners = Vec::with_capacity(basis.len());
    for q in basis {
        let partner = match side {
            Subsystem::Second => CVec::from_fn(dims.d1, |a, _| {
                (0..dims.d2).map(|b| q[b].conj() * psi[dims.index(a, b)]).sum()
            }),
            Subsystem::First => CVec::from_fn(dims.d2, |b, _| {
                (0..dims.d1).map(|a| q[a].conj() * psi[dims.index(a, b)]).sum()
            }),
        };
        match side {
            Subsystem::Second => out += partner.kronecker(q),
            Subsystem::First => out += q.kronecker(&partner),
        }
        partners.push(partner);
    }
    (out, partners)
}

/// Brute-force lower bound on `f₁₂⁽ʳ⁾(L)`: best `⟨ψ_r|L|ψ_r⟩` over `samples`
/// random rank-r starts, each followed by 50 shifted power-iteration steps
/// alternating between the two sides. Uses no eigensolver.
pub fn oracle_f12_r(l: &Observable, r: usize, samples: usize, seed: u64) -> Result<f64> {
    let dims = l.dims();
    check_schmidt_level(r, dims)?;
    if samples == 0 {
        return Err(Error::invalid("samples >= 1", 0.0));
    }
    let m = l.matrix();
    let n = dims.total();
    // Gershgorin lower bound keeps L + shift positive semidefinite.
    let lower = (0..n)
        .map(|i| m[(i, i)].re - (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let shift = (-lower).max(0.0);
    let shifted = m + linalg::identity(n).scale(shift);
    let value = |v: &CVec| -> f64 { v.dotc(&(m * v)).re / v.norm_squared() };
    let best = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = hilbert::rng_from(hilbert::derive_seed(seed, 3, s as u64));
            let xs: Vec<CVec> = (0..r).map(|_| hilbert::gaussian_vector(&mut rng, dims.d1)).collect();
            let ys: Vec<CVec> = (0..r).map(|_| hilbert::gaussian_vector(&mut rng, dims.d2)).collect();
            let mut psi = CVec::zeros(n);
            for (x, y) in xs.iter().zip(&ys) {
                psi += x.kronecker(y);
            }
            let mut best = value(&psi);
            let mut basis = orthonormal_span(&ys);
            let mut side = Subsystem::Second;
            for _ in 0..50 {
                let pushed = &shifted * &psi;
                let (proj, partners) = project_side(&pushed, &basis, side, dims);
                let norm = linalg::vec_norm(&proj);
                if norm < 1e-300 {
                    break;
                }
                psi = proj.unscale(norm);
                best = best.max(value(&psi));
                let (_, partners_unit) = project_side(&psi, &basis, side, dims);
                let _ = partners;
                basis = orthonormal_span(&partners_unit);
                side = match side {
                    Subsystem::Second => Subsystem::First,
                    Subsystem::First => Subsystem::Second,
                };
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{phi_r, random_pure};

    fn d(a: usize, b: usize) -> BipartiteDims {
        BipartiteDims::new(a, b).unwrap()
    }

    fn random_observable(dims: BipartiteDims, seed: u64) -> Observable {
        let mut rng = hilbert::rng_from(seed);
        let n = dims.total();
        let g = CMat::from_fn(n, n, |_, _| hilbert::gaussian_vector(&mut rng, 1)[0]);
        Observable::new(dims, linalg::hermitian_part(&g)).unwrap()
    }

    fn quick() -> SolverConfig {
        SolverConfig::default().with_restarts(16)
    }

    #[test]
    fn blocks_for_single_normalized_vector() {
        let dims = d(2, 3);
        let l = random_observable(dims, 1);
        let b = hilbert::random_unit_vector(&mut hilbert::rng_from(2), 3);
        let (block, g) = assemble_blocks(&l, &[b.clone()], Subsystem::Second).unwrap();
        assert!((g[(0, 0)].re - 1.0).abs() < 1e-12);
        // L_b = tr₂[L (I ⊗ |b⟩⟨b|)]
        let lb = hilbert::partial_trace(
            &(l.matrix() * linalg::kron(&linalg::identity(2), &linalg::projector(&b))),
            Subsystem::Second,
            dims,
        )
        .unwrap();
        assert!(linalg::max_abs_diff(&block, &lb) < 1e-12);
    }

    #[test]
    fn identity_blocks_equal_gram_kron_identity() {
        let dims = d(3, 2);
        let l = Observable::identity(dims);
        let mut rng = hilbert::rng_from(3);
        let ys: Vec<CVec> = (0..2).map(|_| hilbert::gaussian_vector(&mut rng, 2)).collect();
        let (block, g) = assemble_blocks(&l, &ys, Subsystem::Second).unwrap();
        assert!(linalg::max_abs_diff(&block, &linalg::kron(&g, &linalg::identity(3))) < 1e-12);
    }

    #[test]
    fn blocks_are_hermitian() {
        let dims = d(3, 3);
        let l = random_observable(dims, 4);
        let mut rng = hilbert::rng_from(5);
        for side in [Subsystem::First, Subsystem::Second] {
            let vs: Vec<CVec> = (0..2).map(|_| hilbert::gaussian_vector(&mut rng, 3)).collect();
            let (block, _) = assemble_blocks(&l, &vs, side).unwrap();
            assert!(linalg::hermiticity_deviation(&block) < 1e-12);
        }
    }

    #[test]
    fn product_projector_top_solution() {
        let dims = d(2, 2);
        let l = Observable::projector(&BipartitePureState::basis(dims, 0, 0).unwrap());
        let sols = solve_rse(&l, 1, &quick()).unwrap();
        assert!((sols[0].lambda - 1.0).abs() < 1e-10);
        let x = &sols[0].ansatz.x_vectors[0];
        assert!((x[0].norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bell_projector_r1_is_half() {
        let l = Observable::projector(&phi_r(2, d(2, 2)).unwrap());
        let v = f12_r(&l, 1, &quick()).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
    }

    #[test]
    fn phi3_values() {
        let l = Observable::projector(&phi_r(3, d(3, 3)).unwrap());
        assert!((f12_r(&l, 1, &quick()).unwrap() - 1.0 / 3.0).abs() < 1e-9);
        assert!((f12_r(&l, 2, &quick()).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!((f12_r(&l, 3, &quick()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_f12_is_one() {
        let l = Observable::identity(d(2, 3));
        for r in 1..=2 {
            assert!((f12_r(&l, r, &quick()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn solutions_satisfy_both_equations() {
        let dims = d(3, 3);
        let l = random_observable(dims, 7);
        let cfg = quick();
        let report = solve_rse_report(&l, 2, &cfg).unwrap();
        assert!(report.solutions.len() > 1);
        for s in &report.solutions {
            assert!(s.residual <= cfg.tol_residual);
            let res = rse_residual(&l, &s.ansatz, s.lambda).unwrap();
            assert!(res <= 1e-8, "residual {res}");
            assert!((l.expectation_pure(&s.state) - s.lambda).abs() < 1e-8);
            assert!(s.state.schmidt_rank() <= 2);
            assert!(linalg::eigvalsh(&s.gram_x)[0] >= -1e-10);
        }
        for trace in &report.ascent_traces {
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn full_rank_ceiling_matches_f_max() {
        for (a, b) in [(2, 2), (2, 3), (3, 2)] {
            let dims = d(a, b);
            let l = random_observable(dims, 9);
            let v = f12_r(&l, dims.min(), &quick()).unwrap();
            assert!((v - f_max(&l)).abs() < 1e-8);
        }
    }

    #[test]
    fn r1_specialization_agrees() {
        let dims = d(2, 3);
        let l = random_observable(dims, 10);
        let a = f12_r(&l, 1, &quick()).unwrap();
        let b = se_solve_r1(&l, &quick()).unwrap()[0].lambda;
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn r1_tensor_product_observable() {
        let dims = d(2, 2);
        let a = CMat::from_row_slice(2, 2, &[linalg::real(2.0), linalg::c(0.0, 1.0), linalg::c(0.0, -1.0), linalg::real(1.0)]);
        let b = CMat::from_diagonal(&CVec::from_vec(vec![linalg::real(0.5), linalg::real(3.0)]));
        let l = Observable::new(dims, linalg::kron(&a, &b)).unwrap();
        let top_a = *linalg::eigvalsh(&a).last().unwrap();
        let g = se_solve_r1(&l, &quick()).unwrap()[0].lambda;
        assert!((g - top_a * 3.0).abs() < 1e-9);
    }

    #[test]
    fn oracle_bounds() {
        let dims = d(2, 2);
        let l = Observable::projector(&phi_r(2, dims).unwrap());
        let o = oracle_f12_r(&l, 1, 2000, 1).unwrap();
        assert!(o <= f_max(&l) + 1e-12);
        assert!(o <= 0.5 + 1e-12 && o > 0.5 - 1e-4);
        let lr = random_observable(d(3, 3), 12);
        let o1 = oracle_f12_r(&lr, 1, 200, 5).unwrap();
        let o2 = oracle_f12_r(&lr, 2, 200, 5).unwrap();
        assert!(o1 <= f12_r(&lr, 1, &quick()).unwrap() + 1e-8);
        assert!(o2 >= o1 - 1e-3);
    }

    #[test]
    fn deterministic_under_seed() {
        let l = random_observable(d(2, 3), 13);
        let a = solve_rse(&l, 2, &quick()).unwrap();
        let b = solve_rse(&l, 2, &quick()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.lambda.to_bits(), y.lambda.to_bits());
        }
    }

    #[test]
    fn rejects_bad_rank() {
        let l = Observable::identity(d(2, 2));
        assert!(solve_rse(&l, 3, &quick()).is_err());
        assert!(solve_rse(&l, 0, &quick()).is_err());
        let _ = random_pure(d(2, 2), 1);
    }
}
