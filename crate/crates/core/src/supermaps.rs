//! Supermaps A = (A0→A1) ⟶ B = (B0→B1) represented by Choi matrices over
//! A0 A1 B0 B1, together with the superchannel characterization, realization
//! extraction and composition, duals, and the noise-model checkers.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::channels::{
    choi_from_kraus, compose, identity_channel, random_channel_with, require_cptp, tensor, Channel, ChannelError,
    KrausSet,
};
use crate::linalg::{
    eigh, kron, lambda_min, link_product, partial_trace, permute_systems, CMatrix, LinalgError, SystemShape, C64,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupermapError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a superchannel: {0}")]
    NotSuperchannel(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Leg dimensions (d_A0, d_A1, d_B0, d_B1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DimSpec {
    pub a0: usize,
    pub a1: usize,
    pub b0: usize,
    pub b1: usize,
}

impl DimSpec {
    pub fn new(a0: usize, a1: usize, b0: usize, b1: usize) -> Self {
        DimSpec { a0, a1, b0, b1 }
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.a0, self.a1, self.b0, self.b1]
    }

    pub fn side(&self) -> usize {
        self.a0 * self.a1 * self.b0 * self.b1
    }

    /// Dimensions with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        DimSpec::new(self.b0, self.b1, self.a0, self.a1)
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape::new(&self.as_array())
    }
}

impl fmt::Display for DimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.a0, self.a1, self.b0, self.b1)
    }
}

/// A supermap given by its Choi matrix over A0 A1 B0 B1.
#[derive(Clone, Debug, PartialEq)]
pub struct Superchannel {
    pub dims: DimSpec,
    pub choi: CMatrix,
}

/// Pre-processing B0 → A0⊗E, side memory E, post-processing A1⊗E → B1.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub pre: Channel,
    pub post: Channel,
    pub d_e: usize,
}

/// One failed condition of a checker, with its Frobenius residual (or the
/// most negative eigenvalue for positivity).
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: &'static str,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub holds: bool,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    fn from_checks(checks: Vec<(&'static str, f64, f64)>) -> Self {
        let violations: Vec<Violation> = checks
            .into_iter()
            .filter(|(_, r, tol)| !(*r <= *tol))
            .map(|(c, r, _)| Violation { condition: c, residual: r })
            .collect();
        PropertyReport { holds: violations.is_empty(), violations }
    }

    fn failed(condition: &'static str) -> Self {
        PropertyReport { holds: false, violations: vec![Violation { condition, residual: f64::INFINITY }] }
    }

    fn merge(mut self, other: PropertyReport) -> Self {
        self.holds &= other.holds;
        self.violations.extend(other.violations);
        self
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            return write!(f, "yes");
        }
        write!(f, "no")?;
        for v in &self.violations {
            write!(f, " [{}: {:.3e}]", v.condition, v.residual)?;
        }
        Ok(())
    }
}

impl Superchannel {
    pub fn new(dims: DimSpec, choi: CMatrix) -> Result<Self, SupermapError> {
        if choi.rows != dims.side() || choi.cols != dims.side() {
            return Err(SupermapError::Dimension(format!(
                "choi is {}x{}, dims {} need side {}",
                choi.rows,
                choi.cols,
                dims,
                dims.side()
            )));
        }
        let defect = choi.hermiticity_defect();
        if defect > crate::linalg::hermitian_tolerance(&choi) {
            return Err(LinalgError::NotHermitian(defect).into());
        }
        Ok(Superchannel { dims, choi: choi.hermitian_part() })
    }

    /// Marginal keeping the listed legs (0 = A0, 1 = A1, 2 = B0, 3 = B1).
    pub fn marginal(&self, keep: &[usize]) -> CMatrix {
        partial_trace(&self.choi, &self.dims.shape(), keep).expect("dims validated")
    }
}

fn uniform(d: usize) -> CMatrix {
    CMatrix::identity(d).scale(1.0 / d as f64)
}

fn eff_tol(s: &Superchannel, tol: f64) -> f64 {
    tol * s.choi.frobenius_norm().max(1.0)
}

/// The identity supermap on channels d0 → d1.
pub fn identity_superchannel(d0: usize, d1: usize) -> Superchannel {
    let j = kron(&CMatrix::max_entangled(d0), &CMatrix::max_entangled(d1));
    // φ₊^{A0B0} ⊗ φ₊^{A1B1} → A0 A1 B0 B1
    let choi = permute_systems(&j, &SystemShape::new(&[d0, d0, d1, d1]), &[0, 2, 1, 3]).expect("consistent");
    Superchannel { dims: DimSpec::new(d0, d1, d0, d1), choi }
}

pub fn choi_from_realization(r: &Realization, dims: DimSpec) -> Result<Superchannel, SupermapError> {
    let e = r.d_e;
    if r.pre.d_in != dims.b0 || r.pre.d_out != dims.a0 * e || r.post.d_in != dims.a1 * e || r.post.d_out != dims.b1 {
        return Err(SupermapError::Dimension(format!(
            "realization (pre {}→{}, post {}→{}, d_E {}) does not fit dims {}",
            r.pre.d_in, r.pre.d_out, r.post.d_in, r.post.d_out, e, dims
        )));
    }
    require_cptp(&r.pre, 1e-8, "pre-processing")?;
    require_cptp(&r.post, 1e-8, "post-processing")?;
    // Link pre (B0, A0, E) with post (A1, E, B1) over E, giving B0 A0 A1 B1.
    let j = link_product(&r.pre.choi, &[dims.b0, dims.a0, e], &r.post.choi, &[dims.a1, e, dims.b1], &[(2, 1)])?;
    let choi = permute_systems(&j, &SystemShape::new(&[dims.b0, dims.a0, dims.a1, dims.b1]), &[1, 2, 0, 3])?;
    Superchannel::new(dims, choi)
}

/// Check positivity and the two marginal conditions of a superchannel.
pub fn is_superchannel(s: &Superchannel, tol: f64) -> PropertyReport {
    let t = eff_tol(s, tol);
    let d = s.dims;
    let lmin = lambda_min(&s.choi);
    let a1b0 = s.marginal(&[1, 2]).distance(&CMatrix::identity(d.a1 * d.b0));
    let ab0 = s.marginal(&[0, 1, 2]);
    let a0b0 = s.marginal(&[0, 2]);
    let rhs = permute_systems(&kron(&a0b0, &uniform(d.a1)), &SystemShape::new(&[d.a0, d.b0, d.a1]), &[0, 2, 1])
        .expect("consistent");
    PropertyReport::from_checks(vec![
        ("positivity", -lmin, t),
        ("J^{A1B0} = I", a1b0, t),
        ("J^{AB0} = J^{A0B0} ⊗ u^{A1}", ab0.distance(&rhs), t),
    ])
}

/// Θ[Ψ]: J_Φ = Tr_A[J_Θ ((J_Ψ)ᵀ ⊗ I^B)].
pub fn apply(s: &Superchannel, psi: &Channel) -> Result<Channel, SupermapError> {
    let d = s.dims;
    if psi.d_in != d.a0 || psi.d_out != d.a1 {
        return Err(SupermapError::Dimension(format!(
            "channel {}→{} does not match input legs of {}",
            psi.d_in, psi.d_out, d
        )));
    }
    let j = link_product(&psi.choi, &[d.a0, d.a1], &s.choi, &d.as_array(), &[(0, 0), (1, 1)])?;
    Ok(Channel::new(d.b0, d.b1, j)?)
}

/// post ∘ (Ψ ⊗ id_E) ∘ pre, computed by channel composition.
pub fn apply_realization(r: &Realization, psi: &Channel) -> Result<Channel, SupermapError> {
    let mid = tensor(psi, &identity_channel(r.d_e));
    let first = compose(&mid, &r.pre)?;
    Ok(compose(&r.post, &first)?)
}

/// Extract pre- and post-processing from a superchannel Choi matrix.
pub fn realize(s: &Superchannel) -> Result<Realization, SupermapError> {
    let report = is_superchannel(s, 1e-7);
    if !report.holds {
        return Err(SupermapError::NotSuperchannel(report.to_string()));
    }
    let d = s.dims;
    let rho = s.marginal(&[0, 2]).scale(1.0 / d.a1 as f64);
    let e = eigh(&rho)?;
    let lmax = e.values[0];
    let keep: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > 1e-9 * lmax).collect();
    let de = keep.len();
    let (a0, b0, a1, b1) = (d.a0, d.b0, d.a1, d.b1);

    // ψ^{A0B0E} = Σ_k √λ_k |u_k⟩|k⟩; pre isometry V|b⟩ = Σ_{a,k} ψ[a,b,k] |a,k⟩.
    let v = CMatrix::from_fn(a0 * de, b0, |ak, b| {
        let (a, k) = (ak / de, ak % de);
        e.vectors[(a * b0 + b, keep[k])] * e.values[keep[k]].sqrt()
    });
    let pre = choi_from_kraus(&KrausSet { d_in: b0, d_out: a0 * de, operators: vec![v] })?;

    // Post Choi on (E, A1, B1) is the compression of J (ordered A0B0 A1 B1)
    // by columns u_k/√λ_k, then reordered to (A1, E, B1).
    let jp = permute_systems(&s.choi, &d.shape(), &[0, 2, 1, 3])?;
    let w = CMatrix::from_fn(a0 * b0, de, |x, k| e.vectors[(x, keep[k])] / e.values[keep[k]].sqrt());
    let wi = kron(&w, &CMatrix::identity(a1 * b1));
    let p = wi.adjoint().matmul(&jp).matmul(&wi);
    let p = permute_systems(&p, &SystemShape::new(&[de, a1, b1]), &[1, 0, 2])?;
    let post = Channel::new(a1 * de, b1, p)?;
    Ok(Realization { pre, post, d_e: de })
}

/// Choi matrix with the A and B legs exchanged, no conjugation.
pub fn transpose_supermap(s: &Superchannel) -> Superchannel {
    let choi = permute_systems(&s.choi, &s.dims.shape(), &[2, 3, 0, 1]).expect("dims validated");
    Superchannel { dims: s.dims.swapped(), choi }
}

/// The adjoint supermap B → A: ⟨Φ, Θ*[Ψ]⟩ = ⟨Θ[Φ], Ψ⟩.
pub fn dual(s: &Superchannel) -> Superchannel {
    let t = transpose_supermap(s);
    Superchannel { dims: t.dims, choi: t.choi.conj() }
}

/// Σₓ pₓ U_post,x ∘ Ψ ∘ U_pre,x.
pub fn random_unitary_superchannel(
    probs: &[f64],
    pre_unitaries: &[CMatrix],
    post_unitaries: &[CMatrix],
    dims: DimSpec,
) -> Result<Superchannel, SupermapError> {
    if dims.a0 != dims.b0 || dims.a1 != dims.b1 {
        return Err(SupermapError::Dimension(format!("random unitary superchannels need d_A0 = d_B0 and d_A1 = d_B1, got {}", dims)));
    }
    if probs.len() != pre_unitaries.len() || probs.len() != post_unitaries.len() || probs.is_empty() {
        return Err(SupermapError::Invalid("probabilities and unitaries must have equal nonzero length".into()));
    }
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(SupermapError::Invalid("probabilities must be nonnegative and sum to 1".into()));
    }
    let (d0, d1) = (dims.a0, dims.a1);
    let phi0 = crate::channels::phi_plus_vector(d0);
    let phi1 = crate::channels::phi_plus_vector(d1);
    let mut acc = CMatrix::zeros(dims.side(), dims.side());
    for ((&p, up), uq) in probs.iter().zip(pre_unitaries).zip(post_unitaries) {
        for (u, dd) in [(up, d0), (uq, d1)] {
            if u.rows != dd || u.cols != dd || u.adjoint().matmul(u).distance(&CMatrix::identity(dd)) > 1e-8 {
                return Err(SupermapError::Invalid(format!("expected a {}x{} unitary", dd, dd)));
            }
        }
        let alpha = kron(&CMatrix::identity(d0), &up.transpose()).matmul(&phi0);
        let beta = kron(&CMatrix::identity(d1), uq).matmul(&phi1);
        let term = kron(&CMatrix::projector(&alpha), &CMatrix::projector(&beta));
        acc += &term.scale(p);
    }
    // A0 B0 A1 B1 → A0 A1 B0 B1
    let choi = permute_systems(&acc, &SystemShape::new(&[d0, d0, d1, d1]), &[0, 2, 1, 3])?;
    Superchannel::new(dims, choi)
}

/// Random superchannel from a random pre-/post-processing pair.
pub fn random_superchannel<R: Rng>(dims: DimSpec, d_e: usize, rng: &mut R) -> Result<Superchannel, SupermapError> {
    let r = random_realization(dims, d_e, rng)?;
    choi_from_realization(&r, dims)
}

pub fn random_realization<R: Rng>(dims: DimSpec, d_e: usize, rng: &mut R) -> Result<Realization, SupermapError> {
    let pre_rank = (dims.b0 + dims.a0 * d_e - 1) / (dims.a0 * d_e);
    let pre = random_channel_with(dims.b0, dims.a0 * d_e, pre_rank.max(1) + 1, rng)?;
    let post_in = dims.a1 * d_e;
    let post_rank = (post_in + dims.b1 - 1) / dims.b1;
    let post = random_channel_with(post_in, dims.b1, post_rank.max(1), rng)?;
    Ok(Realization { pre, post, d_e })
}

/// Random-unitary superchannel with Haar unitaries and Dirichlet weights.
pub fn random_ru_superchannel<R: Rng>(d0: usize, d1: usize, terms: usize, rng: &mut R) -> Superchannel {
    let p = crate::random::random_probabilities(terms, rng);
    let pre: Vec<CMatrix> = (0..terms).map(|_| crate::random::haar_unitary(d0, rng)).collect();
    let post: Vec<CMatrix> = (0..terms).map(|_| crate::random::haar_unitary(d1, rng)).collect();
    random_unitary_superchannel(&p, &pre, &post, DimSpec::new(d0, d1, d0, d1)).expect("valid by construction")
}

/// Doubly stochastic: a superchannel whose dual is also a superchannel.
pub fn is_doubly_stochastic(s: &Superchannel, tol: f64) -> PropertyReport {
    let d = s.dims;
    if d.a0 * d.b1 != d.a1 * d.b0 {
        return is_superchannel(s, tol).merge(PropertyReport::failed("dimensions admit no doubly stochastic map"));
    }
    let t = eff_tol(s, tol);
    let a0b1 = s.marginal(&[0, 3]).distance(&CMatrix::identity(d.a0 * d.b1));
    is_superchannel(s, tol)
        .merge(PropertyReport::from_checks(vec![("J^{A0B1} = I", a0b1, t)]))
        .merge(uniformity_condition(s, t))
}

fn uniformity_condition(s: &Superchannel, t: f64) -> PropertyReport {
    let d = s.dims;
    let a0b = s.marginal(&[0, 2, 3]);
    let rhs = kron(&s.marginal(&[0, 2]), &uniform(d.b1));
    PropertyReport::from_checks(vec![("J^{A0B} = J^{A0B0} ⊗ u^{B1}", a0b.distance(&rhs), t)])
}

/// Completely uniformity preserving: J^{A0B} = J^{A0B0} ⊗ u^{B1}.
pub fn is_completely_uniformity_preserving(s: &Superchannel, tol: f64) -> PropertyReport {
    is_superchannel(s, tol).merge(uniformity_condition(s, eff_tol(s, tol)))
}

/// Completely unital-channel preserving: J^{AB1} = u^{A0} ⊗ J^{A1B1} and
/// J^{A0B1} = I. Requires square legs.
pub fn is_completely_unital_preserving(s: &Superchannel, tol: f64) -> PropertyReport {
    let d = s.dims;
    if d.a0 != d.a1 || d.b0 != d.b1 {
        return PropertyReport::failed("requires d_A0 = d_A1 and d_B0 = d_B1");
    }
    let t = eff_tol(s, tol);
    let ab1 = s.marginal(&[0, 1, 3]);
    let rhs = kron(&uniform(d.a0), &s.marginal(&[1, 3]));
    let a0b1 = s.marginal(&[0, 3]).distance(&CMatrix::identity(d.a0 * d.b1));
    is_superchannel(s, tol).merge(PropertyReport::from_checks(vec![
        ("J^{AB1} = u^{A0} ⊗ J^{A1B1}", ab1.distance(&rhs), t),
        ("J^{A0B1} = I", a0b1, t),
    ]))
}

/// Superchannel Θ[Ψ] = post ∘ Ψ ∘ pre with no side memory.
pub fn superchannel_from_pair(pre: &Channel, post: &Channel) -> Result<Superchannel, SupermapError> {
    let dims = DimSpec::new(pre.d_out, post.d_in, pre.d_in, post.d_out);
    choi_from_realization(&Realization { pre: pre.clone(), post: post.clone(), d_e: 1 }, dims)
}

/// ⟨Θ₁, Θ₂⟩ as Tr[J₁† J₂].
pub fn supermap_inner(a: &Superchannel, b: &Superchannel) -> C64 {
    crate::linalg::hs_inner(&a.choi, &b.choi)
}
