//! Finite-dimensional bipartite Hilbert-space arithmetic.
//!
//! Composite basis vectors `|i, j⟩` of `H₁ ⊗ H₂` are indexed as `i·d2 + j`
//! everywhere in the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, CVec, ONE, ZERO};

pub const NORM_TOL: f64 = 1e-12;
pub const DENSITY_TOL: f64 = 1e-10;
pub const DEFAULT_SCHMIDT_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub d1: usize,
    pub d2: usize,
}

impl BipartiteDims {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::OutOfRange {
                what: "dimension",
                detail: format!("({d1}, {d2}) must both be >= 1"),
            });
        }
        Ok(Self { d1, d2 })
    }

    pub fn total(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn min(&self) -> usize {
        self.d1.min(self.d2)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.d2 + j
    }

    pub(crate) fn check_matrix(&self, m: &CMat) -> Result<()> {
        let n = self.total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::dims(
                format!("{n}x{n}"),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &BipartiteDims) -> Result<()> {
        if self != other {
            return Err(Error::dims(
                format!("{}x{}", self.d1, self.d2),
                format!("{}x{}", other.d1, other.d2),
            ));
        }
        Ok(())
    }
}

impl std::fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.d1, self.d2)
    }
}

/// Normalized state vector on `H₁ ⊗ H₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState {
    dims: BipartiteDims,
    amplitudes: CVec,
}

impl BipartitePureState {
    /// Validates length, finiteness and unit norm (within 1e-12).
    pub fn new(dims: BipartiteDims, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::dims(dims.total(), amplitudes.len()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("finite amplitudes", f64::NAN));
        }
        let norm = linalg::vec_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid("unit norm", (norm - 1.0).abs()));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Normalizes `amplitudes` first; fails only on a zero or non-finite vector.
    pub fn normalized(dims: BipartiteDims, amplitudes: CVec) -> Result<Self> {
        let norm = linalg::vec_norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("nonzero finite vector", norm));
        }
        Self::new(dims, amplitudes.unscale(norm))
    }

    pub fn product(a: &CVec, b: &CVec) -> Result<Self> {
        let dims = BipartiteDims::new(a.len(), b.len())?;
        Self::normalized(dims, a.kronecker(b))
    }

    /// `|i, j⟩`.
    pub fn basis(dims: BipartiteDims, i: usize, j: usize) -> Result<Self> {
        if i >= dims.d1 || j >= dims.d2 {
            return Err(Error::OutOfRange {
                what: "basis index",
                detail: format!("({i}, {j}) in {dims}"),
            });
        }
        let mut v = CVec::zeros(dims.total());
        v[dims.index(i, j)] = ONE;
        Self::new(dims, v)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// Amplitudes reshaped into the `d1 × d2` coefficient matrix.
    pub fn coefficient_matrix(&self) -> CMat {
        let d = self.dims;
        CMat::from_fn(d.d1, d.d2, |i, j| self.amplitudes[d.index(i, j)])
    }

    pub fn from_coefficient_matrix(m: &CMat) -> Result<Self> {
        let dims = BipartiteDims::new(m.nrows(), m.ncols())?;
        let v = CVec::from_fn(dims.total(), |k, _| m[(k / dims.d2, k % dims.d2)]);
        Self::normalized(dims, v)
    }

    pub fn projector(&self) -> CMat {
        linalg::projector(&self.amplitudes)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            dims: self.dims,
            matrix: self.projector(),
        }
    }

    pub fn inner(&self, other: &Self) -> num_complex::Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn phase_aligned(&self) -> CVec {
        linalg::phase_align(&self.amplitudes)
    }

    pub fn schmidt_rank(&self) -> usize {
        schmidt_decompose(self, DEFAULT_SCHMIDT_CUTOFF)
            .map(|s| s.rank)
            .unwrap_or(0)
    }
}

/// Trace-one PSD Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: BipartiteDims,
    matrix: CMat,
}

impl DensityOperator {
    /// Checks Hermiticity, trace and positivity, each within 1e-10.
    pub fn new(dims: BipartiteDims, matrix: CMat) -> Result<Self> {
        dims.check_matrix(&matrix)?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("finite entries", f64::NAN));
        }
        let herm = linalg::hermiticity_deviation(&matrix);
        if herm > DENSITY_TOL {
            return Err(Error::invalid("Hermiticity", herm));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::invalid("unit trace", (tr - 1.0).abs()));
        }
        let matrix = linalg::hermitian_part(&matrix);
        let min_eig = linalg::eigvalsh(&matrix)[0];
        if min_eig < -DENSITY_TOL {
            return Err(Error::invalid("positive semidefiniteness", -min_eig));
        }
        Ok(Self { dims, matrix })
    }

    /// Divides by the trace before validating.
    pub fn normalized(dims: BipartiteDims, matrix: CMat) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::invalid("positive trace", tr));
        }
        Self::new(dims, matrix.unscale(tr))
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self {
            dims,
            matrix: linalg::identity(n).unscale(n as f64),
        }
    }

    pub fn from_ensemble(ensemble: &Ensemble) -> Self {
        let dims = ensemble.members[0].dims();
        let mut m = CMat::zeros(dims.total(), dims.total());
        for (p, member) in ensemble.weights.iter().zip(&ensemble.members) {
            m += member.projector().scale(*p);
        }
        Self { dims, matrix: m }
    }

    /// Convex mixture `Σ w_k ρ_k`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let dims = parts
            .first()
            .ok_or_else(|| Error::invalid("nonempty mixture", 0.0))?
            .1
            .dims;
        let mut m = CMat::zeros(dims.total(), dims.total());
        for (w, rho) in parts {
            dims.check_same(&rho.dims)?;
            if *w < 0.0 {
                return Err(Error::invalid("nonnegative mixture weight", -w));
            }
            m += rho.matrix.scale(*w);
        }
        Self::new(dims, m)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `(U₁ ⊗ U₂) ρ (U₁ ⊗ U₂)†`, no validation of unitarity.
    pub fn local_conjugate(&self, u1: &CMat, u2: &CMat) -> Self {
        let u = linalg::kron(u1, u2);
        Self {
            dims: self.dims,
            matrix: linalg::hermitian_part(&(&u * &self.matrix * u.adjoint())),
        }
    }

    /// Rank-one case recognized by its spectrum: returns the top eigenvector
    /// when the largest eigenvalue is 1 within the density tolerance.
    pub fn as_pure(&self) -> Option<BipartitePureState> {
        let (vals, vecs) = linalg::eigh(&self.matrix);
        let top = *vals.last()?;
        if (top - 1.0).abs() > DENSITY_TOL {
            return None;
        }
        let v = vecs.column(vals.len() - 1).into_owned();
        BipartitePureState::normalized(self.dims, linalg::phase_align(&v)).ok()
    }

    pub(crate) fn from_trusted(dims: BipartiteDims, matrix: CMat) -> Self {
        Self { dims, matrix }
    }
}

/// Hermitian operator on `H₁ ⊗ H₂` (witness candidates, measured observables).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dims: BipartiteDims,
    matrix: CMat,
}

impl Observable {
    pub fn new(dims: BipartiteDims, matrix: CMat) -> Result<Self> {
        dims.check_matrix(&matrix)?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("finite entries", f64::NAN));
        }
        let herm = linalg::hermiticity_deviation(&matrix);
        if herm > DENSITY_TOL {
            return Err(Error::invalid("Hermiticity", herm));
        }
        Ok(Self {
            dims,
            matrix: linalg::hermitian_part(&matrix),
        })
    }

    pub fn identity(dims: BipartiteDims) -> Self {
        Self {
            dims,
            matrix: linalg::identity(dims.total()),
        }
    }

    pub fn projector(state: &BipartitePureState) -> Self {
        Self {
            dims: state.dims(),
            matrix: state.projector(),
        }
    }

    pub fn from_density(rho: &DensityOperator) -> Self {
        Self {
            dims: rho.dims(),
            matrix: rho.matrix().clone(),
        }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dims: self.dims,
            matrix: self.matrix.scale(factor),
        }
    }

    /// `⟨ψ|L|ψ⟩`.
    pub fn expectation_pure(&self, state: &BipartitePureState) -> f64 {
        let v = state.amplitudes();
        v.dotc(&(&self.matrix * v)).re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    /// Columns are the left Schmidt vectors `e_n`.
    pub left_basis: CMat,
    /// Columns are the right Schmidt vectors `f_n`.
    pub right_basis: CMat,
    pub rank: usize,
}

impl SchmidtDecomposition {
    /// `Σ λ_n |e_n⟩ ⊗ |f_n⟩` as a flat amplitude vector.
    pub fn reconstruct(&self) -> CVec {
        let d1 = self.left_basis.nrows();
        let d2 = self.right_basis.nrows();
        let mut v = CVec::zeros(d1 * d2);
        for n in 0..self.rank {
            let e = self.left_basis.column(n).into_owned();
            let f = self.right_basis.column(n).into_owned();
            v += e.kronecker(&f).scale(self.coefficients[n]);
        }
        v
    }
}

/// Weighted list of pure states; the mixture it describes is a valid density.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    weights: Vec<f64>,
    members: Vec<BipartitePureState>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, members: Vec<BipartitePureState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != members.len() {
            return Err(Error::dims(members.len(), weights.len()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::invalid("positive ensemble weight", *w));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DENSITY_TOL {
            return Err(Error::invalid("weights sum to one", (total - 1.0).abs()));
        }
        let dims = members[0].dims();
        for m in &members {
            dims.check_same(&m.dims())?;
        }
        Ok(Self { weights, members })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[BipartitePureState] {
        &self.members
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_ensemble(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Schmidt decomposition of a pure state; coefficients at or below `cutoff`
/// are dropped.
pub fn schmidt_decompose(state: &BipartitePureState, cutoff: f64) -> Result<SchmidtDecomposition> {
    if !(cutoff >= 0.0) {
        return Err(Error::OutOfRange {
            what: "cutoff",
            detail: format!("{cutoff}"),
        });
    }
    let norm = linalg::vec_norm(state.amplitudes());
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::invalid("unit norm", (norm - 1.0).abs()));
    }
    let (s, u, v) = linalg::svd(&state.coefficient_matrix());
    let rank = s.iter().filter(|&&x| x > cutoff).count();
    // C = Σ s u v†, so the right Schmidt vectors are the conjugated v.
    let right = CMat::from_fn(v.nrows(), rank, |r, col| v[(r, col)].conj());
    Ok(SchmidtDecomposition {
        coefficients: s[..rank].to_vec(),
        left_basis: u.columns(0, rank).into_owned(),
        right_basis: right,
        rank,
    })
}

/// Partial transpose on the second subsystem:
/// `⟨i,j|ρ^PT|k,l⟩ = ⟨i,l|ρ|k,j⟩`.
pub fn partial_transpose_matrix(m: &CMat, dims: BipartiteDims) -> Result<CMat> {
    dims.check_matrix(m)?;
    let d2 = dims.d2;
    Ok(CMat::from_fn(dims.total(), dims.total(), |row, col| {
        let (i, j) = (row / d2, row % d2);
        let (k, l) = (col / d2, col % d2);
        m[(dims.index(i, l), dims.index(k, j))]
    }))
}

pub fn partial_transpose(rho: &DensityOperator) -> CMat {
    partial_transpose_matrix(rho.matrix(), rho.dims()).expect("validated density")
}

/// Traces out `subsystem`, returning an operator on the remaining factor.
pub fn partial_trace(op: &CMat, subsystem: Subsystem, dims: BipartiteDims) -> Result<CMat> {
    dims.check_matrix(op)?;
    let (d1, d2) = (dims.d1, dims.d2);
    Ok(match subsystem {
        Subsystem::Second => CMat::from_fn(d1, d1, |i, k| {
            (0..d2).map(|j| op[(dims.index(i, j), dims.index(k, j))]).sum()
        }),
        Subsystem::First => CMat::from_fn(d2, d2, |j, l| {
            (0..d1).map(|i| op[(dims.index(i, j), dims.index(i, l))]).sum()
        }),
    })
}

fn check_rank(r: usize, dims: BipartiteDims) -> Result<()> {
    if r == 0 || r > dims.min() {
        return Err(Error::OutOfRange {
            what: "r",
            detail: format!("{r} not in 1..={} for {dims}", dims.min()),
        });
    }
    Ok(())
}

pub(crate) fn check_schmidt_level(r: usize, dims: BipartiteDims) -> Result<()> {
    check_rank(r, dims)
}

/// `(1/√r) Σ_{k<r} |k,k⟩`.
pub fn phi_r(r: usize, dims: BipartiteDims) -> Result<BipartitePureState> {
    check_rank(r, dims)?;
    let mut v = CVec::zeros(dims.total());
    let amp = 1.0 / (r as f64).sqrt();
    for k in 0..r {
        v[dims.index(k, k)] = real(amp);
    }
    BipartitePureState::normalized(dims, v)
}

/// Partial transpose of `|φ_r⟩⟨φ_r|`: `(1/r) Σ_{k,l<r} |k,l⟩⟨l,k|`.
pub fn swap_witness_v(r: usize, dims: BipartiteDims) -> Result<Observable> {
    check_rank(r, dims)?;
    let mut m = CMat::zeros(dims.total(), dims.total());
    let w = real(1.0 / r as f64);
    for k in 0..r {
        for l in 0..r {
            m[(dims.index(k, l), dims.index(l, k))] = w;
        }
    }
    Observable::new(dims, m)
}

/// `tr(ρ L)`; the imaginary residue is discarded.
pub fn expectation(rho: &DensityOperator, l: &Observable) -> Result<f64> {
    rho.dims().check_same(&l.dims())?;
    let m = rho.matrix();
    let lm = l.matrix();
    let n = m.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * lm[(j, i)];
        }
    }
    Ok(acc.re)
}

pub(crate) fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        linalg::c(re, im)
    })
}

pub(crate) fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    let v = gaussian_vector(rng, n);
    let norm = linalg::vec_norm(&v);
    v.unscale(norm)
}

/// Points uniformly distributed on the probability simplex.
pub(crate) fn simplex_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub(crate) fn rng_from(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent stream seed for item `index` of stream `stream` (splitmix64).
pub(crate) fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn random_pure_with<R: Rng>(rng: &mut R, dims: BipartiteDims) -> BipartitePureState {
    BipartitePureState::normalized(dims, gaussian_vector(rng, dims.total()))
        .expect("gaussian vector is nonzero")
}

/// Unitarily invariant random pure state.
pub fn random_pure(dims: BipartiteDims, seed: u64) -> BipartitePureState {
    random_pure_with(&mut rng_from(seed), dims)
}

/// Random pure state of Schmidt rank exactly `k` (almost surely): a random
/// coefficient matrix of rank `k`, normalized.
pub fn random_pure_with_rank(dims: BipartiteDims, k: usize, seed: u64) -> Result<BipartitePureState> {
    check_schmidt_level(k, dims)?;
    Ok(random_pure_rank_with(&mut rng_from(seed), dims, k))
}

pub(crate) fn random_pure_rank_with<R: Rng>(rng: &mut R, dims: BipartiteDims, k: usize) -> BipartitePureState {
    let mut coeff = CMat::zeros(dims.d1, dims.d2);
    for _ in 0..k {
        coeff += gaussian_vector(rng, dims.d1) * gaussian_vector(rng, dims.d2).transpose();
    }
    BipartitePureState::from_coefficient_matrix(&coeff).expect("nonzero coefficients")
}

/// Uniform-simplex mixture of `mix_count` random pure projectors.
pub fn random_density(dims: BipartiteDims, seed: u64, mix_count: usize) -> DensityOperator {
    let mut rng = rng_from(seed);
    random_density_with(&mut rng, dims, mix_count.max(1))
}

pub(crate) fn random_density_with<R: Rng>(
    rng: &mut R,
    dims: BipartiteDims,
    mix_count: usize,
) -> DensityOperator {
    let weights = simplex_weights(rng, mix_count);
    let mut m = CMat::zeros(dims.total(), dims.total());
    for w in weights {
        m += random_pure_with(rng, dims).projector().scale(w);
    }
    let tr = linalg::trace(&m).re;
    DensityOperator::from_trusted(dims, m.unscale(tr))
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase fix.
pub(crate) fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        linalg::c(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..n {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Random mixture of product projectors; always separable.
pub fn random_separable(dims: BipartiteDims, seed: u64, mix_count: usize) -> DensityOperator {
    let mut rng = rng_from(seed);
    random_separable_with(&mut rng, dims, mix_count.max(1))
}

pub(crate) fn random_separable_with<R: Rng>(
    rng: &mut R,
    dims: BipartiteDims,
    mix_count: usize,
) -> DensityOperator {
    let weights = simplex_weights(rng, mix_count);
    let mut m = CMat::zeros(dims.total(), dims.total());
    for w in weights {
        let a = random_unit_vector(rng, dims.d1);
        let b = random_unit_vector(rng, dims.d2);
        m += linalg::projector(&a.kronecker(&b)).scale(w);
    }
    let tr = linalg::trace(&m).re;
    DensityOperator::from_trusted(dims, m.unscale(tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};

    fn d(a: usize, b: usize) -> BipartiteDims {
        BipartiteDims::new(a, b).unwrap()
    }

    #[test]
    fn bell_state_schmidt() {
        let s = schmidt_decompose(&phi_r(2, d(2, 2)).unwrap(), 1e-10).unwrap();
        assert_eq!(s.rank, 2);
        for l in &s.coefficients {
            assert!((l - 0.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_rank_one() {
        let s = schmidt_decompose(&BipartitePureState::basis(d(2, 3), 0, 0).unwrap(), 1e-10).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized() {
        let v = CVec::from_element(4, c(1.0, 0.0));
        assert!(matches!(
            BipartitePureState::new(d(2, 2), v),
            Err(Error::Invalid { .. })
        ));
    }

    #[test]
    fn reconstruct_up_to_phase() {
        let psi = random_pure(d(3, 4), 11);
        let s = schmidt_decompose(&psi, 1e-10).unwrap();
        let rebuilt = linalg::phase_align(&s.reconstruct());
        let diff = (&rebuilt - psi.phase_aligned()).norm();
        assert!(diff < 1e-10);
    }

    #[test]
    fn pt_of_bell_has_negative_half() {
        let rho = phi_r(2, d(2, 2)).unwrap().density();
        let pt = partial_transpose(&rho);
        let min = linalg::eigvalsh(&pt)[0];
        assert!((min + 0.5).abs() < 1e-12);
        let back = partial_transpose_matrix(&pt, rho.dims()).unwrap();
        assert_eq!(back, *rho.matrix());
    }

    #[test]
    fn product_pt_invariant() {
        let rho = BipartitePureState::basis(d(2, 2), 0, 0).unwrap().density();
        assert_eq!(partial_transpose(&rho), *rho.matrix());
    }

    #[test]
    fn bell_marginal_maximally_mixed() {
        let rho = phi_r(2, d(2, 2)).unwrap().density();
        let m = partial_trace(rho.matrix(), Subsystem::Second, rho.dims()).unwrap();
        assert!(max_abs_diff(&m, &linalg::identity(2).unscale(2.0)) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_operator() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(2.0, 0.0)]);
        let b = CMat::from_row_slice(3, 3, &[
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0),
        ]);
        let ab = linalg::kron(&a, &b);
        let out = partial_trace(&ab, Subsystem::Second, d(2, 3)).unwrap();
        assert!(max_abs_diff(&out, &a.scale(6.0)) < 1e-12);
        let out2 = partial_trace(&ab, Subsystem::First, d(2, 3)).unwrap();
        assert!(max_abs_diff(&out2, &b.scale(3.0)) < 1e-12);
        assert!(partial_trace(&ab, Subsystem::First, d(3, 3)).is_err());
    }

    #[test]
    fn phi_r_shapes() {
        let p = phi_r(1, d(2, 2)).unwrap();
        assert_eq!(p, BipartitePureState::basis(d(2, 2), 0, 0).unwrap());
        let p3 = phi_r(3, d(3, 4)).unwrap();
        let s = schmidt_decompose(&p3, 1e-10).unwrap();
        assert_eq!(s.rank, 3);
        assert!(s.coefficients.iter().all(|x| (x - (1.0f64 / 3.0).sqrt()).abs() < 1e-12));
        assert!(phi_r(4, d(3, 4)).is_err());
        assert!(phi_r(0, d(3, 4)).is_err());
    }

    #[test]
    fn swap_witness_expectations() {
        let dims = d(2, 2);
        let v = swap_witness_v(2, dims).unwrap();
        let vals = v.eigenvalues();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in vals.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let phi = phi_r(2, dims).unwrap();
        assert!((v.expectation_pure(&phi) - 0.5).abs() < 1e-12);
        let s = (0.5f64).sqrt();
        let singlet = BipartitePureState::new(
            dims,
            CVec::from_vec(vec![real(0.0), real(s), real(-s), real(0.0)]),
        )
        .unwrap();
        assert!((v.expectation_pure(&singlet) + 0.5).abs() < 1e-12);
        // V equals the partial transpose of |φ_r⟩⟨φ_r|.
        let pt = partial_transpose(&phi.density());
        assert!(max_abs_diff(&pt, v.matrix()) < 1e-14);
    }

    #[test]
    fn expectation_examples() {
        let dims = d(2, 2);
        let phi = phi_r(2, dims).unwrap();
        let rho = phi.density();
        assert!((expectation(&rho, &Observable::identity(dims)).unwrap() - 1.0).abs() < 1e-12);
        assert!((expectation(&rho, &Observable::projector(&phi)).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(dims);
        assert!((expectation(&mixed, &Observable::projector(&phi)).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn random_states_are_valid_and_deterministic() {
        let dims = d(3, 2);
        assert_eq!(random_pure(dims, 5), random_pure(dims, 5));
        assert!((linalg::vec_norm(random_pure(dims, 5).amplitudes()) - 1.0).abs() < 1e-12);
        let rho = random_density(dims, 9, 3);
        assert_eq!(rho, random_density(dims, 9, 3));
        assert!(rho.eigenvalues()[0] >= -1e-12);
        assert!((linalg::trace(rho.matrix()).re - 1.0).abs() < 1e-12);
        assert!(DensityOperator::new(dims, rho.matrix().clone()).is_ok());
    }

    #[test]
    fn density_validation_names_invariant() {
        let dims = d(2, 2);
        let mut m = linalg::identity(4).unscale(4.0);
        m[(0, 1)] = c(0.3, 0.0);
        match DensityOperator::new(dims, m) {
            Err(Error::Invalid { invariant, magnitude }) => {
                assert_eq!(invariant, "Hermiticity");
                assert!((magnitude - 0.3).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        let neg = CMat::from_diagonal(&CVec::from_vec(vec![real(1.5), real(-0.5), real(0.0), real(0.0)]));
        assert!(matches!(DensityOperator::new(dims, neg), Err(Error::Invalid { .. })));
    }
}
