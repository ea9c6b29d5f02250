//! Min-entropy, conditional min-entropy, the extended min-entropy of a
//! channel and the extended conditional min-entropy (ECME) of a bipartite
//! channel, computed by semidefinite programs. All logarithms are base 2.

use rand::Rng;
use thiserror::Error;

use crate::channels::{apply_on, is_channel, Channel, ChannelError};
use crate::linalg::{
    eigh, hs_inner, kron, link_product, partial_trace, permute_systems, CMatrix, LinalgError, SystemShape,
};
use crate::random::{random_pure, rng_from_seed};
use crate::sdp::{solve, solve_with, Cone, ConicProgram, ConicSolution, SolveStatus, SolverOptions, Term};
use crate::supermaps::{DimSpec, Superchannel, SupermapError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a channel: {0}")]
    NotCptp(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Supermap(#[from] SupermapError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

const CLASSICAL_TOL: f64 = 1e-10;

fn uniform(d: usize) -> CMatrix {
    CMatrix::identity(d).scale(1.0 / d as f64)
}

fn checked(sol: ConicSolution, what: &str) -> Result<ConicSolution, EntropyError> {
    let bad = !sol.primal_value.is_finite()
        || !sol.dual_value.is_finite()
        || (sol.status != SolveStatus::Optimal && sol.gap.abs() > 1e-5 * sol.primal_value.abs().max(1.0));
    if bad {
        return Err(EntropyError::Solver(format!(
            "{}: status {:?}, gap {:.3e}, infeasibility {:.3e}/{:.3e}",
            what, sol.status, sol.gap, sol.primal_infeasibility, sol.dual_infeasibility
        )));
    }
    Ok(sol)
}

/// −log₂ λ_max(ρ).
pub fn h_min(rho: &CMatrix) -> Result<f64, EntropyError> {
    let e = eigh(rho)?;
    Ok(-e.values[0].log2())
}

/// H_min(A1|A0) of an operator on A0 ⊗ A1 together with the optimizers.
#[derive(Clone, Debug)]
pub struct CondMinEntropy {
    /// −log₂ of the primal optimum min{Tr σ : σ ⊗ I ⪰ ρ}.
    pub value: f64,
    /// −log₂ of the optimum of the dual program, solved separately.
    pub dual_value: f64,
    /// Optimal σ on A0.
    pub sigma: CMatrix,
    /// Optimal dual point Y on A0A1 (Y ⪰ 0, Tr_{A1} Y = I).
    pub dual_point: CMatrix,
    pub status: SolveStatus,
}

fn cond_min_program(rho: &CMatrix, d0: usize, d1: usize) -> ConicProgram {
    let mut p = ConicProgram::new();
    let s = p.add_var(d0, Cone::Free);
    p.set_objective(s, CMatrix::identity(d0));
    let i1 = CMatrix::identity(d1);
    p.add_constraint(Cone::Psd, vec![Term::from_map(s, d0, |m| kron(m, &i1))], rho.clone());
    p
}

/// H_min(A1|A0)_ρ for ρ on A0 ⊗ A1 (conditioning system first). The primal
/// program and its dual are solved independently.
pub fn h_min_cond(rho: &CMatrix, d0: usize, d1: usize) -> Result<CondMinEntropy, EntropyError> {
    if rho.rows != d0 * d1 || rho.cols != d0 * d1 {
        return Err(EntropyError::Dimension(format!("operator is {}x{}, expected side {}·{}", rho.rows, rho.cols, d0, d1)));
    }
    if rho.hermiticity_defect() > crate::linalg::hermitian_tolerance(rho) {
        return Err(EntropyError::Invalid("operator is not Hermitian".into()));
    }
    let rho = rho.hermitian_part();
    let p = cond_min_program(&rho, d0, d1);
    let a = checked(solve_with(&p, &SolverOptions::as_given()), "conditional min-entropy")?;
    let b = checked(solve_with(&p.dualize(), &SolverOptions::as_given()), "conditional min-entropy dual")?;
    let status = if a.status == SolveStatus::Optimal && b.status == SolveStatus::Optimal {
        SolveStatus::Optimal
    } else {
        SolveStatus::NumericalFailure
    };
    Ok(CondMinEntropy {
        value: -a.primal_value.log2(),
        dual_value: -(-b.primal_value).log2(),
        sigma: a.x[0].clone(),
        dual_point: b.x[0].clone(),
        status,
    })
}

/// Extended min-entropy H_min(A1|A0) of the normalized Choi matrix J/d_in.
pub fn h_min_ext(c: &Channel) -> Result<f64, EntropyError> {
    Ok(h_min_cond(&c.normalized_choi(), c.d_in, c.d_out)?.value)
}

/// Which legs of a bipartite channel are classical (diagonal in the
/// computational basis).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassicalLegs {
    pub a0: bool,
    pub a1: bool,
    pub b0: bool,
    pub b1: bool,
}

/// A channel A0B0 → A1B1 with Choi matrix ordered A0 A1 B0 B1.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteChannel {
    pub dims: DimSpec,
    pub choi: CMatrix,
    pub classical: ClassicalLegs,
}

/// Off-diagonal mass of leg `k`: the Frobenius norm of the entries whose
/// row and column indices differ on that leg.
fn leg_coherence(m: &CMatrix, dims: &[usize], k: usize) -> f64 {
    let stride: usize = dims[k + 1..].iter().product();
    let d = dims[k];
    let mut s = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if (i / stride) % d != (j / stride) % d {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

impl BipartiteChannel {
    /// Validates shape and Hermiticity only.
    pub fn new(dims: DimSpec, choi: CMatrix) -> Result<Self, EntropyError> {
        if choi.rows != dims.side() || choi.cols != dims.side() {
            return Err(EntropyError::Dimension(format!("choi side {} does not match dims {}", choi.rows, dims)));
        }
        let defect = choi.hermiticity_defect();
        if defect > crate::linalg::hermitian_tolerance(&choi) {
            return Err(LinalgError::NotHermitian(defect).into());
        }
        Ok(BipartiteChannel { dims, choi: choi.hermitian_part(), classical: ClassicalLegs::default() })
    }

    /// Mark legs as classical, verifying that the Choi matrix carries no
    /// coherence on them.
    pub fn with_classical(mut self, legs: ClassicalLegs) -> Result<Self, EntropyError> {
        let dims = self.dims.as_array();
        for (k, flag) in [legs.a0, legs.a1, legs.b0, legs.b1].into_iter().enumerate() {
            if flag {
                let c = leg_coherence(&self.choi, &dims, k);
                if c > CLASSICAL_TOL {
                    return Err(EntropyError::Invalid(format!("leg {} is not classical (off-diagonal mass {:.3e})", k, c)));
                }
            }
        }
        self.classical = legs;
        Ok(self)
    }

    /// From a channel A0B0 → A1B1 whose Choi matrix is ordered A0 B0 A1 B1.
    pub fn from_channel(c: &Channel, dims: DimSpec) -> Result<Self, EntropyError> {
        if c.d_in != dims.a0 * dims.b0 || c.d_out != dims.a1 * dims.b1 {
            return Err(EntropyError::Dimension(format!("channel {}→{} does not fit {}", c.d_in, c.d_out, dims)));
        }
        let shape = SystemShape::new(&[dims.a0, dims.b0, dims.a1, dims.b1]);
        BipartiteChannel::new(dims, permute_systems(&c.choi, &shape, &[0, 2, 1, 3])?)
    }

    /// The same map as a channel with Choi matrix ordered A0 B0 A1 B1.
    pub fn as_channel(&self) -> Channel {
        let d = self.dims;
        let j = permute_systems(&self.choi, &d.shape(), &[0, 2, 1, 3]).expect("dims validated");
        Channel { d_in: d.a0 * d.b0, d_out: d.a1 * d.b1, choi: j }
    }

    /// Ψ^A ⊗ Φ^B.
    pub fn product(psi: &Channel, phi: &Channel) -> Self {
        let dims = DimSpec::new(psi.d_in, psi.d_out, phi.d_in, phi.d_out);
        BipartiteChannel { dims, choi: kron(&psi.choi, &phi.choi), classical: ClassicalLegs::default() }
    }

    /// The replacement channel with output σ on A1B1.
    pub fn replacement(a0: usize, b0: usize, sigma: &CMatrix, a1: usize, b1: usize) -> Result<Self, EntropyError> {
        if sigma.rows != a1 * b1 {
            return Err(EntropyError::Dimension("replacement state does not match A1B1".into()));
        }
        let j = kron(&CMatrix::identity(a0 * b0), sigma);
        let shape = SystemShape::new(&[a0, b0, a1, b1]);
        BipartiteChannel::new(DimSpec::new(a0, a1, b0, b1), permute_systems(&j, &shape, &[0, 2, 1, 3])?)
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        is_channel(&self.as_channel(), tol).cptp()
    }

    /// ω = J / (d_A0 d_B0).
    pub fn normalized_choi(&self) -> CMatrix {
        self.choi.scale(1.0 / (self.dims.a0 * self.dims.b0) as f64)
    }

    /// Marginal of the normalized Choi matrix on the listed legs.
    pub fn normalized_marginal(&self, keep: &[usize]) -> CMatrix {
        partial_trace(&self.normalized_choi(), &self.dims.shape(), keep).expect("dims validated")
    }
}

/// Ω ⊗ Γ as a bipartite channel between AA' and BB'.
pub fn tensor_bipartite(x: &BipartiteChannel, y: &BipartiteChannel) -> BipartiteChannel {
    let (p, q) = (x.dims, y.dims);
    let k = kron(&x.choi, &y.choi);
    let shape = SystemShape::new(&[p.a0, p.a1, p.b0, p.b1, q.a0, q.a1, q.b0, q.b1]);
    let j = permute_systems(&k, &shape, &[0, 4, 1, 5, 2, 6, 3, 7]).expect("consistent");
    BipartiteChannel {
        dims: DimSpec::new(p.a0 * q.a0, p.a1 * q.a1, p.b0 * q.b0, p.b1 * q.b1),
        choi: j,
        classical: ClassicalLegs::default(),
    }
}

/// (Θ ⊗ 1^B)[Ω] for a superchannel Θ from the A legs of Ω to new legs C.
pub fn apply_on_a_side(theta: &Superchannel, omega: &BipartiteChannel) -> Result<BipartiteChannel, EntropyError> {
    let (t, d) = (theta.dims, omega.dims);
    if t.a0 != d.a0 || t.a1 != d.a1 {
        return Err(EntropyError::Dimension(format!("superchannel {} does not act on A legs of {}", t, d)));
    }
    let j = link_product(&omega.choi, &d.as_array(), &theta.choi, &t.as_array(), &[(0, 0), (1, 1)])?;
    // B0 B1 C0 C1 → C0 C1 B0 B1
    let j = permute_systems(&j, &SystemShape::new(&[d.b0, d.b1, t.b0, t.b1]), &[2, 3, 0, 1])?;
    BipartiteChannel::new(DimSpec::new(t.b0, t.b1, d.b0, d.b1), j)
}

/// Marginal of a tripartite channel obtained by feeding γ into C0 and
/// discarding C1. The input's A legs are ordered (A0 C0) and (A1 C1).
pub fn condition_on_input(
    omega: &BipartiteChannel,
    a0: usize,
    c0: usize,
    a1: usize,
    c1: usize,
    gamma: &CMatrix,
) -> Result<BipartiteChannel, EntropyError> {
    let d = omega.dims;
    if d.a0 != a0 * c0 || d.a1 != a1 * c1 || gamma.rows != c0 {
        return Err(EntropyError::Dimension("tripartite legs do not match".into()));
    }
    let dims = [a0, c0, a1, c1, d.b0, d.b1];
    let j = link_product(gamma, &[c0], &omega.choi, &dims, &[(0, 1)])?;
    let j = partial_trace(&j, &SystemShape::new(&[a0, a1, c1, d.b0, d.b1]), &[0, 1, 3, 4])?;
    BipartiteChannel::new(DimSpec::new(a0, a1, d.b0, d.b1), j)
}

/// ECME value with both optimizers.
#[derive(Clone, Debug)]
pub struct Ecme {
    /// −log₂ min Tr γ.
    pub value: f64,
    /// −log₂(d_A0 max Tr[α ω]) from the separately solved dual program.
    pub dual_value: f64,
    /// Optimal γ on A0 A1 B0.
    pub gamma: CMatrix,
    /// Optimal α: the Choi matrix of a superchannel A → B.
    pub alpha: Superchannel,
    pub status: SolveStatus,
}

impl Ecme {
    /// |primal − dual| in bits.
    pub fn gap(&self) -> f64 {
        (self.value - self.dual_value).abs()
    }
}

fn ecme_primal_program(d: DimSpec, omega: &CMatrix) -> ConicProgram {
    let g = d.a0 * d.a1 * d.b0;
    let mut p = ConicProgram::new();
    let v = p.add_var(g, Cone::Free);
    p.set_objective(v, CMatrix::identity(g));
    let ib1 = CMatrix::identity(d.b1);
    p.add_constraint(Cone::Psd, vec![Term::from_map(v, g, |m| kron(m, &ib1))], omega.clone());
    let shape = SystemShape::new(&[d.a0, d.a1, d.b0]);
    let ua0 = uniform(d.a0);
    let marg = Term::from_map(v, g, |m| {
        let a0b0 = partial_trace(m, &shape, &[0, 2]).expect("consistent");
        let b0 = partial_trace(m, &shape, &[2]).expect("consistent");
        &a0b0 - &kron(&ua0, &b0)
    });
    p.add_constraint(Cone::Zero, vec![marg], CMatrix::zeros(d.a0 * d.b0, d.a0 * d.b0));
    p
}

fn ecme_dual_program(d: DimSpec, omega: &CMatrix) -> ConicProgram {
    let n = d.side();
    let mut p = ConicProgram::new();
    let v = p.add_var(n, Cone::Psd);
    p.set_objective(v, omega.scale(-(d.a0 as f64)));
    let shape = d.shape();
    let ua1 = uniform(d.a1);
    let s3 = SystemShape::new(&[d.a0, d.b0, d.a1]);
    let cond1 = Term::from_map(v, n, |m| {
        let ab0 = partial_trace(m, &shape, &[0, 1, 2]).expect("consistent");
        let a0b0 = partial_trace(m, &shape, &[0, 2]).expect("consistent");
        let rhs = permute_systems(&kron(&a0b0, &ua1), &s3, &[0, 2, 1]).expect("consistent");
        &ab0 - &rhs
    });
    let g = d.a0 * d.a1 * d.b0;
    p.add_constraint(Cone::Zero, vec![cond1], CMatrix::zeros(g, g));
    let cond2 = Term::from_map(v, n, |m| partial_trace(m, &shape, &[1, 2]).expect("consistent"));
    p.add_constraint(Cone::Zero, vec![cond2], CMatrix::identity(d.a1 * d.b0));
    p
}

/// H^ext(B|A) of a CPTP bipartite channel, with the primal program over γ
/// and the dual program over superchannel Choi matrices solved separately.
pub fn ecme(omega: &BipartiteChannel) -> Result<Ecme, EntropyError> {
    if !omega.is_cptp(1e-7) {
        return Err(EntropyError::NotCptp("bipartite channel is not CPTP".into()));
    }
    ecme_unchecked(omega.dims, &omega.choi)
}

/// ECME of an arbitrary Hermitian operator J over A0 A1 B0 B1, used for
/// witness families that are CP but not necessarily TP.
pub fn ecme_unchecked(d: DimSpec, choi: &CMatrix) -> Result<Ecme, EntropyError> {
    let omega = choi.scale(1.0 / (d.a0 * d.b0) as f64);
    let pa = checked(solve_with(&ecme_primal_program(d, &omega), &SolverOptions::as_given()), "ECME primal")?;
    let pb = checked(solve_with(&ecme_dual_program(d, &omega), &SolverOptions::as_given()), "ECME dual")?;
    let status = if pa.status == SolveStatus::Optimal && pb.status == SolveStatus::Optimal {
        SolveStatus::Optimal
    } else {
        SolveStatus::NumericalFailure
    };
    Ok(Ecme {
        value: -pa.primal_value.log2(),
        dual_value: -(-pb.primal_value).log2(),
        gamma: pa.x[0].clone(),
        alpha: Superchannel { dims: d, choi: pb.x[0].clone() },
        status,
    })
}

/// ECME value from the primal program alone (whichever of the program and
/// its dual is smaller is handed to the solver).
pub fn ecme_value(omega: &BipartiteChannel) -> Result<f64, EntropyError> {
    ecme_value_unchecked(omega.dims, &omega.choi)
}

pub fn ecme_value_unchecked(d: DimSpec, choi: &CMatrix) -> Result<f64, EntropyError> {
    let omega = choi.scale(1.0 / (d.a0 * d.b0) as f64);
    let s = checked(solve(&ecme_primal_program(d, &omega)), "ECME")?;
    Ok(-s.primal_value.log2())
}

/// max over CPTP Λ of ⟨Λ, Ψ⟩ = Tr[J_Λ J_Ψ].
#[derive(Clone, Debug)]
pub struct SupportFunction {
    pub value: f64,
    pub optimizer: Channel,
}

pub fn support_function_channels(psi: &Channel) -> Result<SupportFunction, EntropyError> {
    let n = psi.d_in * psi.d_out;
    let mut p = ConicProgram::new();
    let v = p.add_var(n, Cone::Psd);
    p.set_objective(v, psi.choi.scale(-1.0));
    let shape = psi.shape();
    let tp = Term::from_map(v, n, |m| partial_trace(m, &shape, &[0]).expect("consistent"));
    p.add_constraint(Cone::Zero, vec![tp], CMatrix::identity(psi.d_in));
    let s = checked(solve(&p), "support function")?;
    let optimizer = Channel::new(psi.d_in, psi.d_out, s.x[0].clone())?;
    Ok(SupportFunction { value: -s.primal_value, optimizer })
}

/// 2^(−H^ext(B|A)) for a bipartite channel with classical B legs.
pub fn guess_probability_sdp(omega: &BipartiteChannel) -> Result<f64, EntropyError> {
    if !(omega.classical.b0 && omega.classical.b1) {
        return Err(EntropyError::Invalid("B legs must be marked classical".into()));
    }
    Ok(2f64.powf(-ecme_value(omega)?))
}

/// Instruments {Ω_{x|y}}: for each input y of B0 and outcome x of B1 a CP
/// map A0 → A1 given by its Choi matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalInstrumentFamily {
    pub d_a0: usize,
    pub d_a1: usize,
    /// maps[y][x]
    pub maps: Vec<Vec<CMatrix>>,
}

impl ClassicalInstrumentFamily {
    pub fn new(d_a0: usize, d_a1: usize, maps: Vec<Vec<CMatrix>>) -> Result<Self, EntropyError> {
        let f = ClassicalInstrumentFamily { d_a0, d_a1, maps };
        f.validate(1e-8)?;
        Ok(f)
    }

    pub fn d_b0(&self) -> usize {
        self.maps.len()
    }

    pub fn d_b1(&self) -> usize {
        self.maps.first().map_or(0, |m| m.len())
    }

    fn validate(&self, tol: f64) -> Result<(), EntropyError> {
        let n = self.d_a0 * self.d_a1;
        if self.maps.is_empty() || self.maps.iter().any(|m| m.len() != self.d_b1() || m.is_empty()) {
            return Err(EntropyError::Invalid("instrument family must be a nonempty rectangular table".into()));
        }
        for (y, row) in self.maps.iter().enumerate() {
            let mut sum = CMatrix::zeros(self.d_a0, self.d_a0);
            for j in row {
                if j.rows != n || j.cols != n {
                    return Err(EntropyError::Dimension(format!("instrument element is {}x{}, expected {}", j.rows, j.cols, n)));
                }
                if crate::linalg::lambda_min(j) < -tol * j.frobenius_norm().max(1.0) {
                    return Err(EntropyError::Invalid(format!("element for y = {} is not CP", y)));
                }
                sum += &partial_trace(j, &SystemShape::new(&[self.d_a0, self.d_a1]), &[0])?;
            }
            let def = sum.distance(&CMatrix::identity(self.d_a0));
            if def > tol.max(1e-8) * (self.d_a0 as f64) {
                return Err(EntropyError::Invalid(format!("instrument for y = {} is not trace preserving ({:.3e})", y, def)));
            }
        }
        Ok(())
    }

    /// J_Ω = Σ_{x,y} J_{x|y} ⊗ |y⟩⟨y| ⊗ |x⟩⟨x| over A0 A1 B0 B1.
    pub fn to_bipartite(&self) -> BipartiteChannel {
        let (b0, b1) = (self.d_b0(), self.d_b1());
        let n = self.d_a0 * self.d_a1 * b0 * b1;
        let mut j = CMatrix::zeros(n, n);
        for (y, row) in self.maps.iter().enumerate() {
            for (x, m) in row.iter().enumerate() {
                let py = CMatrix::projector(&CMatrix::basis(b0, y));
                let px = CMatrix::projector(&CMatrix::basis(b1, x));
                j += &kron(&kron(m, &py), &px);
            }
        }
        BipartiteChannel {
            dims: DimSpec::new(self.d_a0, self.d_a1, b0, b1),
            choi: j,
            classical: ClassicalLegs { a0: false, a1: false, b0: true, b1: true },
        }
    }

    /// Read the instruments off a bipartite channel with classical B legs.
    pub fn from_bipartite(omega: &BipartiteChannel) -> Result<Self, EntropyError> {
        let d = omega.dims;
        let checked = omega.clone().with_classical(ClassicalLegs { b0: true, b1: true, ..Default::default() })?;
        let na = d.a0 * d.a1;
        let maps = (0..d.b0)
            .map(|y| {
                (0..d.b1)
                    .map(|x| {
                        let off = y * d.b1 + x;
                        let nb = d.b0 * d.b1;
                        CMatrix::from_fn(na, na, |i, j| checked.choi[(i * nb + off, j * nb + off)])
                    })
                    .collect()
            })
            .collect();
        ClassicalInstrumentFamily::new(d.a0, d.a1, maps)
    }

    fn is_fully_classical(&self) -> bool {
        let dims = [self.d_a0, self.d_a1];
        self.maps.iter().flatten().all(|j| leg_coherence(j, &dims, 0) <= CLASSICAL_TOL && leg_coherence(j, &dims, 1) <= CLASSICAL_TOL)
    }
}

/// Result of the guessing-probability oracle.
#[derive(Clone, Debug)]
pub struct GuessOracle {
    pub value: f64,
    /// Per-input values P^{(y)}.
    pub per_input: Vec<f64>,
    /// True when every P^{(y)} was obtained by exact enumeration.
    pub exact: bool,
    /// True when some seesaw run hit its iteration cap before converging.
    pub stalled: bool,
    pub restarts: usize,
}

const SEESAW_RESTARTS: usize = 50;
const SEESAW_PATIENCE: usize = 8;
const SEESAW_TOL: f64 = 1e-9;
const SEESAW_MAX_ITERS: usize = 500;

/// P_guess = (1/d_B0) Σ_y P^{(y)}, computed without the ECME programs: exact
/// enumeration for fully classical instruments, otherwise a seesaw between
/// the measurement and the input state, which yields a lower bound.
pub fn guess_probability_oracle(fam: &ClassicalInstrumentFamily, seed: u64) -> Result<GuessOracle, EntropyError> {
    fam.validate(1e-8)?;
    let mut per_input = Vec::new();
    let mut stalled = false;
    let mut restarts = 0;
    let exact = fam.is_fully_classical();
    let mut rng = rng_from_seed(seed);
    for row in &fam.maps {
        if exact {
            per_input.push(enumerate_classical(fam.d_a0, fam.d_a1, row));
        } else {
            let (v, st, r) = seesaw(fam.d_a0, fam.d_a1, row, &mut rng)?;
            stalled |= st;
            restarts += r;
            per_input.push(v);
        }
    }
    let value = per_input.iter().sum::<f64>() / per_input.len() as f64;
    Ok(GuessOracle { value, per_input, exact, stalled, restarts })
}

/// max_a Σ_b max_x p(b, x | a).
fn enumerate_classical(d_a0: usize, d_a1: usize, row: &[CMatrix]) -> f64 {
    (0..d_a0)
        .map(|a| {
            (0..d_a1)
                .map(|b| row.iter().map(|j| j[(a * d_a1 + b, a * d_a1 + b)].re).fold(f64::NEG_INFINITY, f64::max))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Optimal measurement for the ensemble {ρ_x}: returns (value, POVM).
fn best_povm(rhos: &[CMatrix]) -> Result<(f64, Vec<CMatrix>), EntropyError> {
    let n = rhos[0].rows;
    if rhos.len() == 1 {
        return Ok((rhos[0].trace().re, vec![CMatrix::identity(n)]));
    }
    if rhos.len() == 2 {
        let diff = &rhos[0] - &rhos[1];
        let e = eigh(&diff)?;
        let mut p0 = CMatrix::zeros(n, n);
        for (k, &l) in e.values.iter().enumerate() {
            if l > 0.0 {
                p0 += &CMatrix::projector(&e.vectors.column(k));
            }
        }
        let p1 = &CMatrix::identity(n) - &p0;
        let v = hs_inner(&p0, &rhos[0]).re + hs_inner(&p1, &rhos[1]).re;
        return Ok((v, vec![p0, p1]));
    }
    // min Tr Y s.t. Y ⪰ ρ_x; the multipliers form the optimal POVM.
    let mut p = ConicProgram::new();
    let y = p.add_var(n, Cone::Free);
    p.set_objective(y, CMatrix::identity(n));
    for r in rhos {
        p.add_constraint(Cone::Psd, vec![Term::identity(y, n)], r.clone());
    }
    let s = checked(solve_with(&p, &SolverOptions::as_given()), "measurement")?;
    let povm: Vec<CMatrix> = s.y.iter().map(crate::linalg::psd_projection).collect();
    let v = povm.iter().zip(rhos).map(|(p, r)| hs_inner(p, r).re).sum();
    Ok((v, povm))
}

fn seesaw<R: Rng>(d_a0: usize, d_a1: usize, row: &[CMatrix], rng: &mut R) -> Result<(f64, bool, usize), EntropyError> {
    let maps: Vec<Channel> = row.iter().map(|j| Channel::new(d_a0, d_a1, j.clone())).collect::<Result<_, _>>()?;
    // Heisenberg-picture maps: Choi of Ω† is the conjugated swap of J_Ω.
    let adjoints: Vec<Channel> = row
        .iter()
        .map(|j| {
            let s = permute_systems(j, &SystemShape::new(&[d_a0, d_a1]), &[1, 0]).expect("consistent");
            Channel::new(d_a1, d_a0, s.conj())
        })
        .collect::<Result<_, _>>()?;
    let run = |eta: CMatrix| -> Result<(f64, bool), EntropyError> {
        let mut eta = eta;
        let mut last = f64::NEG_INFINITY;
        for _ in 0..SEESAW_MAX_ITERS {
            let rhos: Vec<CMatrix> = maps
                .iter()
                .map(|m| apply_on(m, &eta, &[d_a0, d_a0], 0))
                .collect::<Result<_, _>>()?;
            let (v, povm) = best_povm(&rhos)?;
            let mut k = CMatrix::zeros(d_a0 * d_a0, d_a0 * d_a0);
            for (a, p) in adjoints.iter().zip(&povm) {
                k += &apply_on(a, p, &[d_a1, d_a0], 0)?;
            }
            let e = eigh(&k.hermitian_part())?;
            let value = e.values[0].max(v);
            eta = CMatrix::projector(&e.vectors.column(0));
            if value - last < SEESAW_TOL {
                return Ok((value.max(last), false));
            }
            last = value;
        }
        Ok((last, true))
    };
    let phi = crate::channels::phi_plus_vector(d_a0).scale(1.0 / (d_a0 as f64).sqrt());
    let (mut best, mut stalled) = run(CMatrix::projector(&phi))?;
    let mut since = 0;
    let mut restarts = 0;
    while restarts < SEESAW_RESTARTS - 1 && since < SEESAW_PATIENCE {
        restarts += 1;
        let psi = random_pure(d_a0 * d_a0, rng);
        let (v, st) = run(CMatrix::projector(&psi))?;
        stalled |= st;
        if v > best + 1e-7 {
            best = v;
            since = 0;
        } else {
            best = best.max(v);
            since += 1;
        }
    }
    Ok((best, stalled, restarts))
}

/// Outcome of one axiom check.
#[derive(Clone, Debug)]
pub struct AxiomResult {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest slack observed; negative means violated.
    pub worst_margin: f64,
    pub checks: usize,
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// A doubly stochastic superchannel on square legs: a random-unitary
/// superchannel, optionally mixed with the completely depolarizing one.
pub fn random_ds_superchannel<R: Rng>(d0: usize, d1: usize, rng: &mut R) -> Superchannel {
    let terms = rng.gen_range(1..=4);
    let ru = crate::supermaps::random_ru_superchannel(d0, d1, terms, rng);
    if rng.gen_bool(0.5) {
        return ru;
    }
    let t: f64 = rng.gen();
    let side = ru.dims.side();
    let dep = CMatrix::identity(side).scale(1.0 / (d0 * d1) as f64);
    Superchannel { dims: ru.dims, choi: &ru.choi.scale(t) + &dep.scale(1.0 - t) }
}

/// Monotonicity under sampled doubly stochastic superchannels, additivity
/// under tensor products, and the two normalization points, for an entropy
/// function `f` of channels.
pub fn entropy_axiom_suite(
    f: &dyn Fn(&Channel) -> Result<f64, EntropyError>,
    instances: &[Channel],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AxiomReport, EntropyError> {
    let mut rng = rng_from_seed(seed);
    let mut mono = f64::INFINITY;
    let mut n_mono = 0;
    for c in instances {
        let base = f(c)?;
        for _ in 0..samples {
            let theta = random_ds_superchannel(c.d_in, c.d_out, &mut rng);
            let out = crate::supermaps::apply(&theta, c)?;
            mono = mono.min(f(&out)? - base);
            n_mono += 1;
        }
    }
    let mut add = f64::INFINITY;
    let mut n_add = 0;
    for w in instances.windows(2) {
        let t = crate::channels::tensor(&w[0], &w[1]);
        if t.d_in * t.d_out > 64 {
            continue;
        }
        add = add.min(-(f(&t)? - f(&w[0])? - f(&w[1])?).abs());
        n_add += 1;
    }
    let mut norm = f64::INFINITY;
    for d in [2usize, 3] {
        let u = crate::channels::uniform_channel(d, d);
        norm = norm.min(-(f(&u)? - (d as f64).log2()).abs());
        let pure = CMatrix::projector(&CMatrix::basis(d, 0));
        let r = crate::channels::replacement_channel(d, &pure)?;
        norm = norm.min(-f(&r)?.abs());
    }
    let res = |name, m: f64, checks| AxiomResult { name, passed: m >= -tol, worst_margin: m, checks };
    Ok(AxiomReport {
        results: vec![res("monotonicity", mono, n_mono), res("additivity", add, n_add), res("normalization", norm, 4)],
    })
}

/// The normalized Choi marginal of a bipartite channel on A1 B1 and the
/// H_min(B1|A1) upper bound on the ECME.
pub fn ecme_upper_bound(omega: &BipartiteChannel) -> Result<f64, EntropyError> {
    let d = omega.dims;
    let m = omega.normalized_marginal(&[1, 3]);
    Ok(h_min_cond(&m, d.a1, d.b1)?.value)
}

/// H_min(AB1|B0)_ω − log₂(d_A0 d_A1), a lower bound on the ECME.
pub fn ecme_lower_bound(omega: &BipartiteChannel) -> Result<f64, EntropyError> {
    let d = omega.dims;
    let w = omega.normalized_choi();
    let r = permute_systems(&w, &d.shape(), &[2, 0, 1, 3])?;
    let h = h_min_cond(&r, d.b0, d.a0 * d.a1 * d.b1)?.value;
    Ok(h - ((d.a0 * d.a1) as f64).log2())
}
