//! Quantum majorization of channel families: is there a superchannel Θ with
//! Θ[srcⱼ] = dstⱼ for every j? Decided by a direct phase-1 feasibility
//! program over J_Θ and, independently, by the minimax program
//!
//!   f = min_Λ max_Θ Σₖ ⟨Θ[Sₖ] − Dₖ, Λₖ⟩,
//!
//! whose sign separates the two cases. Infeasible verdicts carry a witness
//! family Λ and the two extended conditional min-entropies it separates.
//!
//! Families are handled in classical-quantum form: groups x of CP maps
//! {S_{y|x}}_y whose sum over y is trace preserving. A plain channel family
//! is the case of one map per group.

use thiserror::Error;

use crate::channels::{replacement_channel, require_cptp, Channel, ChannelError};
use crate::entropies::{ecme_unchecked, BipartiteChannel, EntropyError};
use crate::linalg::{
    eigh, kron, lambda_min, link_product, partial_trace, permute_systems, psd_projection, CMatrix, LinalgError,
    SystemShape, C64,
};
use crate::sdp::{solve, solve_feasibility, Cone, ConicProgram, SolveStatus, Term};
use crate::supermaps::{is_superchannel, DimSpec, Superchannel, SupermapError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MajorizationError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid family: {0}")]
    Invalid(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Supermap(#[from] SupermapError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Default decision margin.
pub const DEFAULT_TOL: f64 = 1e-6;

fn uniform(d: usize) -> CMatrix {
    CMatrix::identity(d).scale(1.0 / d as f64)
}

/// A list of channels with common input and output dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelFamily {
    pub d_in: usize,
    pub d_out: usize,
    pub channels: Vec<Channel>,
}

impl ChannelFamily {
    pub fn new(d_in: usize, d_out: usize, channels: Vec<Channel>) -> Result<Self, MajorizationError> {
        for (j, c) in channels.iter().enumerate() {
            if c.d_in != d_in || c.d_out != d_out {
                return Err(MajorizationError::Dimension(format!(
                    "member {} is {}→{}, family is {}→{}",
                    j, c.d_in, c.d_out, d_in, d_out
                )));
            }
            require_cptp(c, 1e-7, &format!("member {}", j))?;
        }
        Ok(ChannelFamily { d_in, d_out, channels })
    }

    /// Family built from a non-empty list; dimensions are taken from the first member.
    pub fn from_channels(channels: Vec<Channel>) -> Result<Self, MajorizationError> {
        let first = channels
            .first()
            .ok_or_else(|| MajorizationError::Invalid("empty list; use ChannelFamily::new".into()))?;
        let (a, b) = (first.d_in, first.d_out);
        ChannelFamily::new(a, b, channels)
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn to_cq(&self) -> CqFamily {
        CqFamily {
            d0: self.d_in,
            d1: self.d_out,
            maps: self.channels.iter().map(|c| vec![c.choi.clone()]).collect(),
        }
    }
}

/// Classical-quantum family: `maps[x][y]` is the Choi matrix of a CP map
/// d0 → d1, and Σ_y maps[x][y] is trace preserving for every x.
#[derive(Clone, Debug, PartialEq)]
pub struct CqFamily {
    pub d0: usize,
    pub d1: usize,
    pub maps: Vec<Vec<CMatrix>>,
}

impl CqFamily {
    pub fn validate(&self, tol: f64) -> Result<(), MajorizationError> {
        let side = self.d0 * self.d1;
        let shape = SystemShape::new(&[self.d0, self.d1]);
        for (x, group) in self.maps.iter().enumerate() {
            let mut sum = CMatrix::zeros(self.d0, self.d0);
            for (y, m) in group.iter().enumerate() {
                if m.rows != side || m.cols != side {
                    return Err(MajorizationError::Dimension(format!("map ({}, {}) has side {}", x, y, m.rows)));
                }
                if lambda_min(m) < -tol * m.frobenius_norm().max(1.0) {
                    return Err(MajorizationError::Invalid(format!("map ({}, {}) is not CP", x, y)));
                }
                sum += &partial_trace(m, &shape, &[0])?;
            }
            let defect = sum.distance(&CMatrix::identity(self.d0));
            if defect > tol {
                return Err(MajorizationError::Invalid(format!(
                    "group {} is not trace preserving (defect {:.2e})",
                    x, defect
                )));
            }
        }
        Ok(())
    }

    pub fn members(&self) -> usize {
        self.maps.iter().map(|g| g.len()).sum()
    }

    fn shape_matches(&self, other: &CqFamily) -> Result<(), MajorizationError> {
        let a: Vec<usize> = self.maps.iter().map(|g| g.len()).collect();
        let b: Vec<usize> = other.maps.iter().map(|g| g.len()).collect();
        if a != b {
            return Err(MajorizationError::Dimension(format!("group sizes {:?} and {:?} differ", a, b)));
        }
        Ok(())
    }

    fn flat(&self) -> impl Iterator<Item = &CMatrix> {
        self.maps.iter().flatten()
    }
}

/// Rank-one projectors onto |i⟩, (|i⟩+|j⟩)/√2 and (|i⟩+i|j⟩)/√2 for i < j:
/// d² linearly independent states.
pub fn rank_one_frame(d: usize) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = (0..d).map(|i| CMatrix::projector(&CMatrix::basis(d, i))).collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
        for i in 0..d {
            for j in i + 1..d {
                let mut v = CMatrix::zeros(d, 1);
                v[(i, 0)] = C64::new(h, 0.0);
                v[(j, 0)] = phase * h;
                out.push(CMatrix::projector(&v));
            }
        }
    }
    out
}

/// Input states on R0 and an informationally complete POVM on R1. Both sides
/// of a bipartite comparison must be reduced with the same frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameSpec {
    pub d_r0: usize,
    pub d_r1: usize,
}

impl FrameSpec {
    pub fn new(d_r0: usize, d_r1: usize) -> Self {
        FrameSpec { d_r0, d_r1 }
    }

    pub fn inputs(&self) -> Vec<CMatrix> {
        rank_one_frame(self.d_r0)
    }

    /// E_y = S^{-1/2} P_y S^{-1/2} with S = Σ_y P_y.
    pub fn povm(&self) -> Vec<CMatrix> {
        let ps = rank_one_frame(self.d_r1);
        let mut s = CMatrix::zeros(self.d_r1, self.d_r1);
        for p in &ps {
            s += p;
        }
        let isq = eigh(&s).expect("frame operator is Hermitian").map(|l| 1.0 / l.sqrt());
        ps.iter().map(|p| isq.matmul(p).matmul(&isq).hermitian_part()).collect()
    }
}

/// Φ_{y|x}(ρ) = Tr_{R1}[(E_y ⊗ I) Φ(|φ_x⟩⟨φ_x| ⊗ ρ)] for a bipartite channel
/// whose first party is R and second party is A.
pub fn reduce_to_cq(phi: &BipartiteChannel, frame: &FrameSpec) -> Result<CqFamily, MajorizationError> {
    let d = phi.dims;
    if d.a0 != frame.d_r0 || d.a1 != frame.d_r1 {
        return Err(MajorizationError::Dimension(format!(
            "frame is for R = ({}, {}), channel has R = ({}, {})",
            frame.d_r0, frame.d_r1, d.a0, d.a1
        )));
    }
    let povm = frame.povm();
    let mut maps = Vec::new();
    for rho in frame.inputs() {
        let mut group = Vec::with_capacity(povm.len());
        for e in &povm {
            let probe = kron(&rho, &e.transpose());
            group.push(link_product(&probe, &[d.a0, d.a1], &phi.choi, &d.as_array(), &[(0, 0), (1, 1)])?);
        }
        maps.push(group);
    }
    Ok(CqFamily { d0: d.b0, d1: d.b1, maps })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// Neither a validated superchannel nor a separating witness clears the margin.
    Boundary,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Feasible => 0,
            Verdict::Infeasible => 3,
            Verdict::Boundary => 4,
        }
    }
}

/// Test family Λ that separates the source from the target.
#[derive(Clone, Debug)]
pub struct Witness {
    /// `lambda[x][y]`: Choi matrix of Λ_{y|x} on the target legs; for each x
    /// the sum over y is d_X⁻¹ times a trace-preserving map.
    pub lambda: Vec<Vec<CMatrix>>,
    /// H^ext(B|A) of Σ S_{y|x} ⊗ Λ̃_{y|x} (source side).
    pub h_source: f64,
    /// H^ext(B|B̃) of Σ D_{y|x} ⊗ Λ̃_{y|x} (target side).
    pub h_target: f64,
    /// Σ ⟨Θ[S] − D, Λ⟩ maximized over Θ; negative for a valid witness.
    pub margin: f64,
    /// Frobenius size of the correction applied to make Λ PSD and normalized.
    pub repair: f64,
}

impl Witness {
    /// h_source − h_target; positive when the entropy condition is violated.
    pub fn separation(&self) -> f64 {
        self.h_source - self.h_target
    }
}

#[derive(Clone, Debug)]
pub struct MajorizationCertificate {
    pub verdict: Verdict,
    /// Phase-1 slack t* of the direct program.
    pub slack: f64,
    pub superchannel: Option<Superchannel>,
    /// max_j ‖Θ[srcⱼ] − dstⱼ‖_F for the returned superchannel.
    pub residual: Option<f64>,
    pub witness: Option<Witness>,
}

fn target_dims(src: &CqFamily, dst: &CqFamily) -> DimSpec {
    DimSpec::new(src.d0, src.d1, dst.d0, dst.d1)
}

/// Tr_A[J_Θ (Sᵀ ⊗ I)], the Choi matrix of Θ applied to the map with Choi S.
fn apply_choi(theta: &CMatrix, d: DimSpec, s: &CMatrix) -> CMatrix {
    link_product(s, &[d.a0, d.a1], theta, &d.as_array(), &[(0, 0), (1, 1)]).expect("consistent")
}

fn superchannel_program(d: DimSpec) -> (ConicProgram, usize) {
    let n = d.side();
    let mut p = ConicProgram::new();
    let v = p.add_var(n, Cone::Psd);
    let shape = d.shape();
    p.add_constraint(
        Cone::Zero,
        vec![Term::from_map(v, n, |m| partial_trace(m, &shape, &[1, 2]).expect("consistent"))],
        CMatrix::identity(d.a1 * d.b0),
    );
    let ua1 = uniform(d.a1);
    let s3 = SystemShape::new(&[d.a0, d.b0, d.a1]);
    let g = d.a0 * d.a1 * d.b0;
    p.add_constraint(
        Cone::Zero,
        vec![Term::from_map(v, n, |m| {
            let ab0 = partial_trace(m, &shape, &[0, 1, 2]).expect("consistent");
            let a0b0 = partial_trace(m, &shape, &[0, 2]).expect("consistent");
            &ab0 - &permute_systems(&kron(&a0b0, &ua1), &s3, &[0, 2, 1]).expect("consistent")
        })],
        CMatrix::zeros(g, g),
    );
    (p, v)
}

fn check_pair(src: &CqFamily, dst: &CqFamily) -> Result<(), MajorizationError> {
    src.shape_matches(dst)?;
    src.validate(1e-7)?;
    dst.validate(1e-7)?;
    Ok(())
}

/// Direct decision for classical-quantum families.
pub fn majorize_cq(src: &CqFamily, dst: &CqFamily, tol: f64) -> Result<MajorizationCertificate, MajorizationError> {
    check_pair(src, dst)?;
    let d = target_dims(src, dst);
    let n = d.side();
    let (mut p, v) = superchannel_program(d);
    let first_affine = p.constraints.len();
    for (s, t) in src.flat().zip(dst.flat()) {
        let s = s.clone();
        p.add_constraint(Cone::Zero, vec![Term::from_map(v, n, move |m| apply_choi(m, d, &s))], t.clone());
    }
    let r = solve_feasibility(&p, tol);

    let mut cert = MajorizationCertificate { verdict: Verdict::Boundary, slack: r.slack, superchannel: None, residual: None, witness: None };
    if r.slack.is_finite() && r.slack <= tol {
        let choi = psd_projection(&r.point[v]);
        if let Ok(theta) = Superchannel::new(d, choi) {
            let residual = src
                .flat()
                .zip(dst.flat())
                .map(|(s, t)| apply_choi(&theta.choi, d, s).distance(t))
                .fold(0.0, f64::max);
            let valid = is_superchannel(&theta, tol).holds && residual <= tol;
            cert.residual = Some(residual);
            cert.superchannel = Some(theta);
            if valid {
                cert.verdict = Verdict::Feasible;
                return Ok(cert);
            }
        }
    }
    if let Some(w) = &r.witness {
        if w.value > 0.0 {
            let ys: Vec<CMatrix> = w.y[first_affine..].to_vec();
            let lambda = to_witness_family(dst, &unflatten(dst, ys));
            let witness = evaluate_witness(src, dst, lambda)?;
            let clears = witness.margin < -tol && witness.separation() > tol;
            cert.witness = Some(witness);
            if clears {
                cert.verdict = Verdict::Infeasible;
            }
        }
    }
    Ok(cert)
}

/// Does a superchannel map srcⱼ to dstⱼ for every j?
pub fn majorize_direct(
    src: &ChannelFamily,
    dst: &ChannelFamily,
    tol: f64,
) -> Result<MajorizationCertificate, MajorizationError> {
    if src.len() != dst.len() {
        return Err(MajorizationError::Dimension(format!(
            "families have {} and {} members",
            src.len(),
            dst.len()
        )));
    }
    majorize_cq(&src.to_cq(), &dst.to_cq(), tol)
}

fn unflatten(shape: &CqFamily, flat: Vec<CMatrix>) -> Vec<Vec<CMatrix>> {
    let mut it = flat.into_iter();
    shape.maps.iter().map(|g| (0..g.len()).map(|_| it.next().expect("sizes agree")).collect()).collect()
}

/// Normalization of a witness family: Σ_y Tr_{B1} Λ_{y|x} = I/d_X for every x.
fn group_marginal(group: &[CMatrix], d0: usize, d1: usize) -> CMatrix {
    let shape = SystemShape::new(&[d0, d1]);
    let mut acc = CMatrix::zeros(d0, d0);
    for m in group {
        acc += &partial_trace(m, &shape, &[0]).expect("consistent");
    }
    acc
}

/// Affine map of an arbitrary Hermitian separating family into the
/// normalized PSD witness class. Terms that are the same for every y of a
/// group do not change the separation value, so only the sign-carrying part
/// is kept, scaled by the largest admissible ε.
fn to_witness_family(dst: &CqFamily, y: &[Vec<CMatrix>]) -> Vec<Vec<CMatrix>> {
    let (d0, d1) = (dst.d0, dst.d1);
    let nx = y.len().max(1) as f64;
    let scale = y.iter().flatten().map(|m| m.frobenius_norm()).fold(0.0, f64::max).max(1e-300);
    let shifted: Vec<Vec<CMatrix>> = y
        .iter()
        .map(|group| {
            let my = group.len() as f64;
            let g: Vec<CMatrix> = group.iter().map(|m| m.scale(1.0 / scale)).collect();
            let t = &uniform(d0).scale(d0 as f64 / nx) - &group_marginal(&g, d0, d1);
            let fix = kron(&t, &CMatrix::identity(d1)).scale(1.0 / (my * d1 as f64));
            g.iter().map(|m| m + &fix).collect()
        })
        .collect();
    let mut eps: f64 = 1.0;
    for group in &shifted {
        let b = 1.0 / (group.len() as f64 * d1 as f64 * nx);
        for m in group {
            let l = lambda_min(m);
            if l < 0.0 {
                eps = eps.min(b / (b - l));
            }
        }
    }
    let eps = 0.999 * eps;
    shifted
        .iter()
        .map(|group| {
            let b = 1.0 / (group.len() as f64 * d1 as f64 * nx);
            let base = CMatrix::identity(d0 * d1).scale(b * (1.0 - eps));
            group.iter().map(|m| &base + &m.scale(eps)).collect()
        })
        .collect()
}

/// PSD projection followed by a congruence restoring Σ_y Tr_{B1} Λ_{y|x} = I/d_X.
/// Returns the repaired family and the Frobenius size of the change.
pub fn repair_witness(lambda: &[Vec<CMatrix>], d0: usize, d1: usize) -> (Vec<Vec<CMatrix>>, f64) {
    let nx = lambda.len().max(1) as f64;
    let mut change = 0.0;
    let mut out = Vec::with_capacity(lambda.len());
    for group in lambda {
        let proj: Vec<CMatrix> = group.iter().map(psd_projection).collect();
        let marg = group_marginal(&proj, d0, d1);
        let e = eigh(&marg).expect("Hermitian");
        let c = if e.values.last().copied().unwrap_or(0.0) > 1e-14 {
            e.map(|l| (1.0 / (nx * l)).sqrt())
        } else {
            CMatrix::identity(d0)
        };
        let k = kron(&c, &CMatrix::identity(d1));
        let fixed: Vec<CMatrix> = proj.iter().map(|m| k.matmul(m).matmul(&k).hermitian_part()).collect();
        for (a, b) in group.iter().zip(&fixed) {
            change += a.distance(b).powi(2);
        }
        out.push(fixed);
    }
    (out, change.sqrt())
}

/// Σ_{x,y} S_{y|x} ⊗ Λ_{y|x}ᵀ on (A0 A1 B0 B1).
fn witness_operator(family: &CqFamily, lambda: &[Vec<CMatrix>]) -> CMatrix {
    let side = family.d0 * family.d1 * lambda_side(lambda);
    let mut acc = CMatrix::zeros(side, side);
    for (s, l) in family.flat().zip(lambda.iter().flatten()) {
        acc += &kron(s, &l.transpose());
    }
    acc
}

fn lambda_side(lambda: &[Vec<CMatrix>]) -> usize {
    lambda.iter().flatten().next().map_or(1, |m| m.rows)
}

/// Repairs Λ and evaluates both entropies of the separation it certifies.
pub fn evaluate_witness(src: &CqFamily, dst: &CqFamily, lambda: Vec<Vec<CMatrix>>) -> Result<Witness, MajorizationError> {
    let (lambda, repair) = repair_witness(&lambda, dst.d0, dst.d1);
    let ds = DimSpec::new(src.d0, src.d1, dst.d0, dst.d1);
    let dt = DimSpec::new(dst.d0, dst.d1, dst.d0, dst.d1);
    let hs = ecme_unchecked(ds, &witness_operator(src, &lambda))?;
    let ht = ecme_unchecked(dt, &witness_operator(dst, &lambda))?;
    let direct: f64 = dst.flat().zip(lambda.iter().flatten()).map(|(d, l)| crate::linalg::hs_inner(d, l).re).sum();
    // max_Θ Σ ⟨Θ[S], Λ⟩ = d_{B0} 2^{−H^ext(B|A)}
    let margin = dst.d0 as f64 * (-hs.value).exp2() - direct;
    Ok(Witness { lambda, h_source: hs.value, h_target: ht.value, margin, repair })
}

/// Result of the minimax program.
#[derive(Clone, Debug)]
pub struct Minimax {
    /// f(src, dst): zero when the target is reachable, negative otherwise.
    pub value: f64,
    pub dual_value: f64,
    /// Optimal test family, `lambda[x][y]` on the target legs.
    pub lambda: Vec<Vec<CMatrix>>,
    /// Optimal γ on A0 A1 B0.
    pub gamma: CMatrix,
    pub status: SolveStatus,
}

impl Minimax {
    /// f ≥ −ε.
    pub fn majorizes(&self, eps: f64) -> bool {
        self.value >= -eps
    }
}

/// f = min Tr[γ]/d_{A0} − Σ Tr[D_{y|x} Λ_{y|x}] subject to
/// γ ⊗ I_{B1} ⪰ Σ S_{y|x}ᵀ ⊗ Λ_{y|x}, γ^{A0B0} = u^{A0} ⊗ γ^{B0},
/// Λ_{y|x} ⪰ 0 and Σ_y Tr_{B1} Λ_{y|x} = I/d_X.
pub fn minimax_cq(src: &CqFamily, dst: &CqFamily) -> Result<Minimax, MajorizationError> {
    check_pair(src, dst)?;
    let d = target_dims(src, dst);
    let gdim = d.a0 * d.a1 * d.b0;
    let ldim = d.b0 * d.b1;
    let nx = src.maps.len().max(1) as f64;
    let mut p = ConicProgram::new();
    let g = p.add_var(gdim, Cone::Free);
    p.set_objective(g, CMatrix::identity(gdim).scale(1.0 / d.a0 as f64));
    let mut lv: Vec<Vec<usize>> = Vec::new();
    for group in &dst.maps {
        let mut ids = Vec::new();
        for t in group {
            let k = p.add_var(ldim, Cone::Psd);
            p.set_objective(k, t.scale(-1.0));
            ids.push(k);
        }
        lv.push(ids);
    }
    let ib1 = CMatrix::identity(d.b1);
    let mut terms = vec![Term::from_map(g, gdim, move |m| kron(m, &ib1))];
    for (s, &k) in src.flat().zip(lv.iter().flatten()) {
        let st = s.transpose();
        terms.push(Term::from_map(k, ldim, move |m| kron(&st, m).scale(-1.0)));
    }
    p.add_constraint(Cone::Psd, terms, CMatrix::zeros(d.side(), d.side()));
    let shape = SystemShape::new(&[d.a0, d.a1, d.b0]);
    let ua0 = uniform(d.a0);
    p.add_constraint(
        Cone::Zero,
        vec![Term::from_map(g, gdim, |m| {
            let a0b0 = partial_trace(m, &shape, &[0, 2]).expect("consistent");
            let b0 = partial_trace(m, &shape, &[2]).expect("consistent");
            &a0b0 - &kron(&ua0, &b0)
        })],
        CMatrix::zeros(d.a0 * d.b0, d.a0 * d.b0),
    );
    let lshape = SystemShape::new(&[d.b0, d.b1]);
    for ids in &lv {
        let terms: Vec<Term> = ids
            .iter()
            .map(|&k| Term::from_map(k, ldim, |m| partial_trace(m, &lshape, &[0]).expect("consistent")))
            .collect();
        p.add_constraint(Cone::Zero, terms, CMatrix::identity(d.b0).scale(1.0 / nx));
    }
    let s = solve(&p);
    if !s.primal_value.is_finite() || (s.status != SolveStatus::Optimal && s.gap.abs() > 1e-5) {
        return Err(MajorizationError::Solver(format!("minimax: {:?}, gap {:.3e}", s.status, s.gap)));
    }
    let lambda = lv.iter().map(|ids| ids.iter().map(|&k| s.x[k].clone()).collect()).collect();
    Ok(Minimax { value: s.primal_value, dual_value: s.dual_value, lambda, gamma: s.x[g].clone(), status: s.status })
}

pub fn majorize_minimax(src: &ChannelFamily, dst: &ChannelFamily) -> Result<Minimax, MajorizationError> {
    if src.len() != dst.len() {
        return Err(MajorizationError::Dimension(format!(
            "families have {} and {} members",
            src.len(),
            dst.len()
        )));
    }
    minimax_cq(&src.to_cq(), &dst.to_cq())
}

/// Witness from the optimal Λ of the minimax program.
pub fn extract_witness(src: &CqFamily, dst: &CqFamily, m: &Minimax) -> Result<Witness, MajorizationError> {
    evaluate_witness(src, dst, m.lambda.clone())
}

/// H^ext(R|A) and H^ext(R|B) of (1/n) Σⱼ srcⱼ ⊗ Λⱼ and (1/n) Σⱼ dstⱼ ⊗ Λⱼ.
/// Reachability forces the first to be at most the second.
pub fn entropy_pair(src: &ChannelFamily, dst: &ChannelFamily, lambda: &[Channel]) -> Result<(f64, f64), MajorizationError> {
    if lambda.len() != src.len() || src.len() != dst.len() || src.is_empty() {
        return Err(MajorizationError::Dimension("families and test channels must have one common, non-zero length".into()));
    }
    let mix = |fam: &ChannelFamily| -> Result<f64, MajorizationError> {
        let n = fam.len() as f64;
        let mut acc: Option<BipartiteChannel> = None;
        for (c, l) in fam.channels.iter().zip(lambda) {
            let term = BipartiteChannel::product(c, l);
            acc = Some(match acc {
                None => term,
                Some(a) => BipartiteChannel::new(a.dims, &a.choi + &term.choi)?,
            });
        }
        let a = acc.expect("non-empty");
        let total = BipartiteChannel::new(a.dims, a.choi.scale(1.0 / n))?;
        Ok(crate::entropies::ecme(&total)?.value)
    };
    Ok((mix(src)?, mix(dst)?))
}

/// Is there a superchannel on the second party with (id_R ⊗ Θ)[phi] = psi?
/// Both channels are reduced with the same frame.
pub fn majorize_bipartite(
    phi: &BipartiteChannel,
    psi: &BipartiteChannel,
    tol: f64,
) -> Result<MajorizationCertificate, MajorizationError> {
    if phi.dims.a0 != psi.dims.a0 || phi.dims.a1 != psi.dims.a1 {
        return Err(MajorizationError::Dimension(format!("reference legs differ: {} vs {}", phi.dims, psi.dims)));
    }
    let frame = FrameSpec::new(phi.dims.a0, phi.dims.a1);
    majorize_cq(&reduce_to_cq(phi, &frame)?, &reduce_to_cq(psi, &frame)?, tol)
}

/// Reachability by a superchannel that also maps the replacement channel
/// with output `gibbs_in` to the replacement channel with output `gibbs_out`.
pub fn gibbs_majorize(
    src: &ChannelFamily,
    dst: &ChannelFamily,
    gibbs_in: &CMatrix,
    gibbs_out: &CMatrix,
    tol: f64,
) -> Result<MajorizationCertificate, MajorizationError> {
    if gibbs_in.rows != src.d_out || gibbs_out.rows != dst.d_out {
        return Err(MajorizationError::Dimension(format!(
            "Gibbs states have sides {} and {}, outputs are {} and {}",
            gibbs_in.rows, gibbs_out.rows, src.d_out, dst.d_out
        )));
    }
    let mut s = src.clone();
    let mut t = dst.clone();
    s.channels.push(replacement_channel(src.d_in, gibbs_in)?);
    t.channels.push(replacement_channel(dst.d_in, gibbs_out)?);
    majorize_direct(&s, &t, tol)
}
