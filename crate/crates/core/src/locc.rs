//! Separable operations `ρ ↦ Σ (A_i⊗B_i) ρ (A_i⊗B_i)† / tr(·)` and the
//! local-unitary, local-invertible and local-projection subclasses.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    self, schmidt_decompose, BipartiteDims, BipartitePureState, DensityOperator, Ensemble,
    DEFAULT_SCHMIDT_CUTOFF,
};
use crate::linalg::{self, real, CMat, ONE};

pub const ANNIHILATION_TOL: f64 = 1e-14;
pub const CLASS_TOL: f64 = 1e-10;
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpClass {
    #[serde(rename = "LU")]
    LocalUnitary,
    #[serde(rename = "LI")]
    LocalInvertible,
    #[serde(rename = "LP")]
    LocalProjection,
    #[serde(rename = "GENERAL")]
    General,
}

impl OpClass {
    pub fn tag(&self) -> &'static str {
        match self {
            OpClass::LocalUnitary => "LU",
            OpClass::LocalInvertible => "LI",
            OpClass::LocalProjection => "LP",
            OpClass::General => "GENERAL",
        }
    }
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for OpClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LU" => Ok(OpClass::LocalUnitary),
            "LI" => Ok(OpClass::LocalInvertible),
            "LP" => Ok(OpClass::LocalProjection),
            "GENERAL" => Ok(OpClass::General),
            other => Err(Error::Parse(format!("unknown operation class {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperatorPair {
    pub a: CMat,
    pub b: CMat,
}

impl LocalOperatorPair {
    pub fn new(a: CMat, b: CMat) -> Self {
        Self { a, b }
    }

    pub fn joint(&self) -> CMat {
        linalg::kron(&self.a, &self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableOperation {
    dims: BipartiteDims,
    pairs: Vec<LocalOperatorPair>,
    class: OpClass,
}

fn unitarity_deviation(m: &CMat) -> f64 {
    linalg::max_abs_diff(&(m.adjoint() * m), &linalg::identity(m.nrows()))
}

fn projector_deviation(m: &CMat) -> f64 {
    let idem = linalg::max_abs_diff(&(m * m), m);
    idem.max(linalg::hermiticity_deviation(m))
}

fn smallest_singular(m: &CMat) -> f64 {
    linalg::svd(m).0.last().copied().unwrap_or(0.0)
}

impl SeparableOperation {
    /// Validates shapes, finiteness and the invariants of `class`.
    pub fn new(dims: BipartiteDims, pairs: Vec<LocalOperatorPair>, class: OpClass) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("nonempty pair list", 0.0));
        }
        for p in &pairs {
            if p.a.shape() != (dims.d1, dims.d1) || p.b.shape() != (dims.d2, dims.d2) {
                return Err(Error::dims(
                    format!("{0}x{0} and {1}x{1}", dims.d1, dims.d2),
                    format!("{:?} and {:?}", p.a.shape(), p.b.shape()),
                ));
            }
            if p.a.iter().chain(p.b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::invalid("finite local operators", f64::NAN));
            }
        }
        if class != OpClass::General && pairs.len() != 1 {
            return Err(Error::invalid(
                format!("{class} operation has a single pair"),
                pairs.len() as f64,
            ));
        }
        let p = &pairs[0];
        match class {
            OpClass::LocalUnitary => {
                let dev = unitarity_deviation(&p.a).max(unitarity_deviation(&p.b));
                if dev > CLASS_TOL {
                    return Err(Error::invalid("LU unitarity", dev));
                }
            }
            OpClass::LocalInvertible => {
                let s = smallest_singular(&p.a).min(smallest_singular(&p.b));
                if s <= CLASS_TOL {
                    return Err(Error::invalid("LI invertibility (smallest singular value)", s));
                }
            }
            OpClass::LocalProjection => {
                let dev = projector_deviation(&p.a).max(projector_deviation(&p.b));
                if dev > CLASS_TOL {
                    return Err(Error::invalid("LP projector property", dev));
                }
            }
            OpClass::General => {}
        }
        Ok(Self { dims, pairs, class })
    }

    pub fn identity(dims: BipartiteDims, class: OpClass) -> Self {
        Self {
            dims,
            pairs: vec![LocalOperatorPair::new(
                linalg::identity(dims.d1),
                linalg::identity(dims.d2),
            )],
            class,
        }
    }

    pub fn local_unitary(u1: CMat, u2: CMat) -> Result<Self> {
        let dims = BipartiteDims::new(u1.nrows(), u2.nrows())?;
        Self::new(dims, vec![LocalOperatorPair::new(u1, u2)], OpClass::LocalUnitary)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn pairs(&self) -> &[LocalOperatorPair] {
        &self.pairs
    }

    pub fn class(&self) -> OpClass {
        self.class
    }

    /// Same operator list with a different tag; the tag invariants are
    /// rechecked.
    pub fn retagged(&self, class: OpClass) -> Result<Self> {
        Self::new(self.dims, self.pairs.clone(), class)
    }

    /// `Σ (A_i⊗B_i) ρ (A_i⊗B_i)†` before normalization.
    pub fn apply_unnormalized(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for p in &self.pairs {
            let k = p.joint();
            out += &k * rho * k.adjoint();
        }
        out
    }

    /// Individual branches `(A_k⊗B_k) ρ (A_k⊗B_k)†` with their traces.
    pub fn branches(&self, rho: &DensityOperator) -> Vec<(f64, CMat)> {
        self.pairs
            .iter()
            .map(|p| {
                let k = p.joint();
                let m = &k * rho.matrix() * k.adjoint();
                (linalg::trace(&m).re, m)
            })
            .collect()
    }
}

/// Applies `op` and renormalizes; fails when the trace drops to 1e-14 or below.
pub fn apply(op: &SeparableOperation, rho: &DensityOperator) -> Result<DensityOperator> {
    op.dims.check_same(&rho.dims())?;
    let out = op.apply_unnormalized(rho.matrix());
    let tr = linalg::trace(&out).re;
    if !(tr > ANNIHILATION_TOL) {
        return Err(Error::Annihilated { trace: tr });
    }
    Ok(DensityOperator::from_trusted(
        rho.dims(),
        linalg::hermitian_part(&out).unscale(tr),
    ))
}

/// Applies a single-pair operation to a pure state and renormalizes.
pub fn apply_pure(op: &SeparableOperation, psi: &BipartitePureState) -> Result<BipartitePureState> {
    op.dims.check_same(&psi.dims())?;
    if op.pairs.len() != 1 {
        return Err(Error::invalid("single-pair operation on a pure state", op.pairs.len() as f64));
    }
    let v = op.pairs[0].joint() * psi.amplitudes();
    let n2 = linalg::vec_norm(&v).powi(2);
    if !(n2 > ANNIHILATION_TOL) {
        return Err(Error::Annihilated { trace: n2 });
    }
    BipartitePureState::normalized(psi.dims(), v)
}

fn composed_class(a: OpClass, b: OpClass) -> OpClass {
    use OpClass::*;
    match (a, b) {
        (LocalUnitary, LocalUnitary) => LocalUnitary,
        (LocalUnitary | LocalInvertible, LocalUnitary | LocalInvertible) => LocalInvertible,
        _ => General,
    }
}

/// `op1 ∘ op2`: all products `(A₁A₂, B₁B₂)`, so that applying the result
/// equals applying `op2` first and then `op1`.
pub fn compose(op1: &SeparableOperation, op2: &SeparableOperation) -> Result<SeparableOperation> {
    op1.dims.check_same(&op2.dims)?;
    let mut pairs = Vec::with_capacity(op1.pairs.len() * op2.pairs.len());
    for p1 in &op1.pairs {
        for p2 in &op2.pairs {
            pairs.push(LocalOperatorPair::new(&p1.a * &p2.a, &p1.b * &p2.b));
        }
    }
    let class = composed_class(op1.class, op2.class);
    Ok(SeparableOperation {
        dims: op1.dims,
        pairs,
        class,
    })
}

fn condition_number(m: &CMat) -> f64 {
    let (s, _, _) = linalg::svd(m);
    let lo = s.last().copied().unwrap_or(0.0);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        s[0] / lo
    }
}

/// Inverse of a local invertible: `(A⁻¹, B⁻¹)`.
pub fn invert(op: &SeparableOperation) -> Result<SeparableOperation> {
    if op.class != OpClass::LocalInvertible {
        return Err(Error::WrongClass {
            expected: "LI".into(),
            found: op.class.to_string(),
        });
    }
    let p = &op.pairs[0];
    let cond = condition_number(&p.a).max(condition_number(&p.b));
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned { condition: cond });
    }
    let a = p.a.clone().try_inverse().ok_or(Error::IllConditioned { condition: cond })?;
    let b = p.b.clone().try_inverse().ok_or(Error::IllConditioned { condition: cond })?;
    Ok(SeparableOperation {
        dims: op.dims,
        pairs: vec![LocalOperatorPair::new(a, b)],
        class: OpClass::LocalInvertible,
    })
}

/// Filter `U₁(Σ_k √r λ_k |k⟩⟨k|) ⊗ U₂`, mapping `|φ_r⟩` to
/// `Σ λ_k U₁|k⟩⊗U₂|k⟩`. Diagonal entries beyond `r` are set to one so the
/// filter stays invertible on the whole space.
pub fn local_filter_t(
    u1: &CMat,
    u2: &CMat,
    lambdas: &[f64],
    r: usize,
) -> Result<SeparableOperation> {
    let dims = BipartiteDims::new(u1.nrows(), u2.nrows())?;
    hilbert::check_schmidt_level(r, dims)?;
    if lambdas.len() != r {
        return Err(Error::dims(r, lambdas.len()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::invalid("positive Schmidt coefficient", *bad));
    }
    let norm: f64 = lambdas.iter().map(|l| l * l).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("squared coefficients sum to one", (norm - 1.0).abs()));
    }
    let scale = (r as f64).sqrt();
    let diag = CMat::from_fn(dims.d1, dims.d1, |i, j| {
        if i != j {
            linalg::ZERO
        } else if i < r {
            real(scale * lambdas[i])
        } else {
            ONE
        }
    });
    SeparableOperation::new(
        dims,
        vec![LocalOperatorPair::new(u1 * diag, u2.clone())],
        OpClass::LocalInvertible,
    )
}

/// `(Σ_{k<r} |k⟩⟨k|) ⊗ I₂`.
pub fn truncation_projection(r: usize, dims: BipartiteDims) -> Result<SeparableOperation> {
    if r == 0 || r > dims.d1 {
        return Err(Error::OutOfRange {
            what: "projector rank",
            detail: format!("{r} not in 1..={}", dims.d1),
        });
    }
    let p = CMat::from_fn(dims.d1, dims.d1, |i, j| if i == j && i < r { ONE } else { linalg::ZERO });
    SeparableOperation::new(
        dims,
        vec![LocalOperatorPair::new(p, linalg::identity(dims.d2))],
        OpClass::LocalProjection,
    )
}

/// Kraus pairs producing `Σ p_k |ψ_k⟩⟨ψ_k|` from the generator
/// `|ψ̃⟩ = Σ λ_n |e_n, f_n⟩`: for member `Σ_m μ_m |g_m, h_m⟩`,
/// `A_k = Σ_m √p_k μ_m/λ_m |g_m⟩⟨e_m|` and `B_k = Σ_m |h_m⟩⟨f_m|`.
pub fn generator_kraus(
    generator: &BipartitePureState,
    ensemble: &Ensemble,
) -> Result<SeparableOperation> {
    let dims = generator.dims();
    let gen = schmidt_decompose(generator, DEFAULT_SCHMIDT_CUTOFF)?;
    let mut pairs = Vec::with_capacity(ensemble.members().len());
    for (k, (p, member)) in ensemble.weights().iter().zip(ensemble.members()).enumerate() {
        dims.check_same(&member.dims())?;
        let mem = schmidt_decompose(member, DEFAULT_SCHMIDT_CUTOFF)?;
        if mem.rank > gen.rank {
            return Err(Error::RankExceeded {
                member: k,
                member_rank: mem.rank,
                generator_rank: gen.rank,
            });
        }
        let mut a = CMat::zeros(dims.d1, dims.d1);
        let mut b = CMat::zeros(dims.d2, dims.d2);
        for m in 0..mem.rank {
            let w = p.sqrt() * mem.coefficients[m] / gen.coefficients[m];
            a += (mem.left_basis.column(m) * gen.left_basis.column(m).adjoint()).scale(w);
            b += mem.right_basis.column(m) * gen.right_basis.column(m).adjoint();
        }
        pairs.push(LocalOperatorPair::new(a, b));
    }
    SeparableOperation::new(dims, pairs, OpClass::General)
}

fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let v = hilbert::gaussian_vector(rng, 1);
        v[0]
    });
    let (s, u, v) = linalg::svd(&g);
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        out += (u.column(k) * v.column(k).adjoint()).scale(s[k].clamp(0.2, 5.0));
    }
    out
}

fn random_projector<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let rank = rng.random_range(1..=n);
    let u = hilbert::random_unitary(rng, n);
    let cols = u.columns(0, rank);
    &cols * cols.adjoint()
}

fn random_bounded<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| hilbert::gaussian_vector(rng, 1)[0]);
    let top = linalg::svd(&g).0[0];
    g.unscale(top)
}

pub(crate) fn sample_operation_with<R: Rng>(
    rng: &mut R,
    class: OpClass,
    dims: BipartiteDims,
) -> SeparableOperation {
    let (d1, d2) = (dims.d1, dims.d2);
    let pairs = match class {
        OpClass::LocalUnitary => vec![LocalOperatorPair::new(
            hilbert::random_unitary(rng, d1),
            hilbert::random_unitary(rng, d2),
        )],
        OpClass::LocalInvertible => vec![LocalOperatorPair::new(
            random_invertible(rng, d1),
            random_invertible(rng, d2),
        )],
        OpClass::LocalProjection => vec![LocalOperatorPair::new(
            random_projector(rng, d1),
            random_projector(rng, d2),
        )],
        OpClass::General => {
            let count = rng.random_range(1..=4);
            (0..count)
                .map(|_| LocalOperatorPair::new(random_bounded(rng, d1), random_bounded(rng, d2)))
                .collect()
        }
    };
    SeparableOperation { dims, pairs, class }
}

/// Deterministic random operation of the given class.
pub fn sample_operation(class: OpClass, dims: BipartiteDims, seed: u64) -> SeparableOperation {
    sample_operation_with(&mut hilbert::rng_from(seed), class, dims)
}

/// Local unitary frame `(W₁, W₂)` in which `ρ` takes a canonical form:
/// marginals diagonal with descending eigenvalues and the phases fixed by
/// making `⟨k,0|ρ|0,0⟩` and `⟨0,l|ρ|0,0⟩` real positive. Returns `None`
/// when the marginal spectra are degenerate or a phase reference vanishes,
/// since the frame is then not unique.
pub fn canonical_lu_frame(rho: &DensityOperator) -> Option<(CMat, CMat)> {
    const GAP: f64 = 1e-6;
    const REF: f64 = 1e-8;
    let dims = rho.dims();
    let mut frames = Vec::with_capacity(2);
    for side in [hilbert::Subsystem::Second, hilbert::Subsystem::First] {
        let marginal = hilbert::partial_trace(rho.matrix(), side, dims).ok()?;
        let (vals, vecs) = linalg::eigh(&marginal);
        if vals.windows(2).any(|w| w[1] - w[0] < GAP) {
            return None;
        }
        let n = vals.len();
        // rows are eigenvectors†, largest eigenvalue first
        frames.push(CMat::from_fn(n, n, |row, col| vecs[(col, n - 1 - row)].conj()));
    }
    let (mut w1, mut w2) = (frames.remove(0), frames.remove(0));
    let rotated = rho.local_conjugate(&w1, &w2);
    let m = rotated.matrix();
    let origin = dims.index(0, 0);
    for k in 1..dims.d1 {
        let e = m[(dims.index(k, 0), origin)];
        if e.norm() < REF {
            return None;
        }
        let phase = e.conj() / e.norm();
        for col in 0..dims.d1 {
            w1[(k, col)] *= phase;
        }
    }
    for l in 1..dims.d2 {
        let e = m[(dims.index(0, l), origin)];
        if e.norm() < REF {
            return None;
        }
        let phase = e.conj() / e.norm();
        for col in 0..dims.d2 {
            w2[(l, col)] *= phase;
        }
    }
    Some((w1, w2))
}

/// `ρ` rotated into its canonical local frame, or unchanged when no unique
/// frame exists.
pub fn lu_canonical_form(rho: &DensityOperator) -> DensityOperator {
    match canonical_lu_frame(rho) {
        Some((w1, w2)) => rho.local_conjugate(&w1, &w2),
        None => rho.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{phi_r, random_density, random_pure, random_separable};
    use crate::linalg::max_abs_diff;

    fn d(a: usize, b: usize) -> BipartiteDims {
        BipartiteDims::new(a, b).unwrap()
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let rho = random_density(d(2, 3), 1, 3);
        let out = apply(&SeparableOperation::identity(d(2, 3), OpClass::General), &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-14);
    }

    #[test]
    fn truncation_maps_phi3_to_phi2() {
        let dims = d(3, 3);
        let rho = phi_r(3, dims).unwrap().density();
        let p = truncation_projection(2, dims).unwrap();
        let raw = p.apply_unnormalized(rho.matrix());
        assert!((linalg::trace(&raw).re - 2.0 / 3.0).abs() < 1e-14);
        let out = apply(&p, &rho).unwrap();
        assert!(max_abs_diff(out.matrix(), phi_r(2, dims).unwrap().density().matrix()) < 1e-14);
        let full = truncation_projection(3, dims).unwrap();
        assert!(max_abs_diff(apply(&full, &rho).unwrap().matrix(), rho.matrix()) < 1e-14);
        assert!(truncation_projection(4, dims).is_err());
    }

    #[test]
    fn annihilation_is_an_error() {
        let dims = d(2, 2);
        let rho = BipartitePureState::basis(dims, 1, 1).unwrap().density();
        let p = truncation_projection(1, dims).unwrap();
        assert!(matches!(apply(&p, &rho), Err(Error::Annihilated { .. })));
    }

    #[test]
    fn lu_preserves_schmidt_coefficients() {
        let psi = random_pure(d(3, 3), 4);
        let op = sample_operation(OpClass::LocalUnitary, d(3, 3), 8);
        let out = apply_pure(&op, &psi).unwrap();
        let a = schmidt_decompose(&psi, 1e-10).unwrap().coefficients;
        let b = schmidt_decompose(&out, 1e-10).unwrap().coefficients;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn compose_tags_and_order() {
        let dims = d(2, 3);
        let li1 = sample_operation(OpClass::LocalInvertible, dims, 1);
        let li2 = sample_operation(OpClass::LocalInvertible, dims, 2);
        let c = compose(&li1, &li2).unwrap();
        assert_eq!(c.class(), OpClass::LocalInvertible);
        assert!(c.retagged(OpClass::LocalInvertible).is_ok());
        let lp = sample_operation(OpClass::LocalProjection, dims, 3);
        assert_eq!(compose(&lp, &lp).unwrap().class(), OpClass::General);
        let rho = random_density(dims, 5, 4);
        let g = sample_operation(OpClass::General, dims, 6);
        let lhs = apply(&compose(&g, &li1).unwrap(), &rho).unwrap();
        let rhs = apply(&g, &apply(&li1, &rho).unwrap()).unwrap();
        assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-10);
    }

    #[test]
    fn invert_round_trip_and_class_errors() {
        let dims = d(2, 2);
        let id = SeparableOperation::identity(dims, OpClass::LocalInvertible);
        assert_eq!(invert(&id).unwrap(), id);
        let li = sample_operation(OpClass::LocalInvertible, dims, 10);
        let back = invert(&invert(&li).unwrap()).unwrap();
        assert!(max_abs_diff(&back.pairs()[0].a, &li.pairs()[0].a) < 1e-8);
        let lu = sample_operation(OpClass::LocalUnitary, dims, 10);
        assert!(matches!(invert(&lu), Err(Error::WrongClass { .. })));
        let bad = SeparableOperation::new(
            dims,
            vec![LocalOperatorPair::new(
                CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, real(1e-9)])),
                linalg::identity(2),
            )],
            OpClass::LocalInvertible,
        )
        .unwrap();
        assert!(matches!(invert(&bad), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn filter_sets_schmidt_coefficients() {
        let dims = d(2, 2);
        let phi = phi_r(2, dims).unwrap();
        let i2 = linalg::identity(2);
        let same = local_filter_t(&i2, &i2, &[0.5f64.sqrt(), 0.5f64.sqrt()], 2).unwrap();
        let out = apply_pure(&same, &phi).unwrap();
        assert!((out.fidelity(&phi) - 1.0).abs() < 1e-12);
        let t = local_filter_t(&i2, &i2, &[0.9f64.sqrt(), 0.1f64.sqrt()], 2).unwrap();
        let s = schmidt_decompose(&apply_pure(&t, &phi).unwrap(), 1e-10).unwrap();
        assert_eq!(s.rank, 2);
        assert!((s.coefficients[0] - 0.9f64.sqrt()).abs() < 1e-12);
        assert!((s.coefficients[1] - 0.1f64.sqrt()).abs() < 1e-12);
        assert!(local_filter_t(&i2, &i2, &[1.0, 0.0], 2).is_err());
    }

    #[test]
    fn generator_kraus_bell_to_product() {
        let dims = d(2, 2);
        let phi = phi_r(2, dims).unwrap();
        let ens = Ensemble::new(vec![1.0], vec![BipartitePureState::basis(dims, 0, 0).unwrap()]).unwrap();
        let op = generator_kraus(&phi, &ens).unwrap();
        let out = op.pairs()[0].joint() * phi.amplitudes();
        let target = BipartitePureState::basis(dims, 0, 0).unwrap();
        assert!((linalg::vec_norm(&(out - target.amplitudes()))) < 1e-12);
        let too_big = Ensemble::new(vec![1.0], vec![phi.clone()]).unwrap();
        let product = BipartitePureState::basis(dims, 0, 0).unwrap();
        assert!(matches!(
            generator_kraus(&product, &too_big),
            Err(Error::RankExceeded { .. })
        ));
    }

    #[test]
    fn sampled_classes_satisfy_invariants() {
        let dims = d(3, 2);
        for seed in 0..20 {
            for class in [
                OpClass::LocalUnitary,
                OpClass::LocalInvertible,
                OpClass::LocalProjection,
                OpClass::General,
            ] {
                let op = sample_operation(class, dims, seed);
                assert!(op.retagged(class).is_ok(), "{class} seed {seed}");
                assert_eq!(op, sample_operation(class, dims, seed));
            }
        }
    }

    #[test]
    fn general_ops_keep_separable_states_ppt() {
        let dims = d(2, 3);
        for seed in 0..30 {
            let rho = random_separable(dims, seed, 3);
            let op = sample_operation(OpClass::General, dims, 100 + seed);
            let out = apply(&op, &rho).unwrap();
            let min = linalg::eigvalsh(&hilbert::partial_transpose(&out))[0];
            assert!(min >= -1e-10);
        }
    }

    #[test]
    fn canonical_frame_is_lu_invariant() {
        let dims = d(2, 3);
        let rho = random_density(dims, 3, 2);
        let lu = sample_operation(OpClass::LocalUnitary, dims, 4);
        let rotated = apply(&lu, &rho).unwrap();
        let a = lu_canonical_form(&rho);
        let b = lu_canonical_form(&rotated);
        assert!(canonical_lu_frame(&rho).is_some());
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-10);
    }
}
