//! Linear maps between matrix algebras, stored as unnormalized Choi matrices
//! `J = Σ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` with the input leg first.

use rand::Rng;
use thiserror::Error;

use crate::linalg::{
    eigh, hermitian_tolerance, inverse_permutation, is_psd, kron, link_product, partial_trace, permute_systems,
    CMatrix, LinalgError, SystemShape, C64, ONE,
};
use crate::random::{random_isometry, rng_from_seed};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not CPTP: {0}")]
    NotCptp(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A linear map C^{d_in} → C^{d_out} given by its Choi matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub d_in: usize,
    pub d_out: usize,
    pub choi: CMatrix,
}

/// Kraus representation; operators are d_out × d_in.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    pub d_in: usize,
    pub d_out: usize,
    pub operators: Vec<CMatrix>,
}

impl KrausSet {
    /// ‖Σ K†K − I‖_F.
    pub fn tp_defect(&self) -> f64 {
        let mut s = CMatrix::zeros(self.d_in, self.d_in);
        for k in &self.operators {
            s += &k.adjoint().matmul(k);
        }
        s.distance(&CMatrix::identity(self.d_in))
    }

    pub fn trace_preserving(&self, tol: f64) -> bool {
        self.tp_defect() <= tol
    }
}

/// CP and TP verdicts of a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelVerdict {
    pub cp: bool,
    pub tp: bool,
}

impl ChannelVerdict {
    pub fn cptp(&self) -> bool {
        self.cp && self.tp
    }
}

impl Channel {
    pub fn new(d_in: usize, d_out: usize, choi: CMatrix) -> Result<Self, ChannelError> {
        if d_in == 0 || d_out == 0 || choi.rows != d_in * d_out || choi.cols != d_in * d_out {
            return Err(ChannelError::Shape(format!(
                "choi is {}x{}, expected side {}·{}",
                choi.rows, choi.cols, d_in, d_out
            )));
        }
        if !choi.is_finite() {
            return Err(ChannelError::Shape("choi has non-finite entries".into()));
        }
        let defect = choi.hermiticity_defect();
        if defect > hermitian_tolerance(&choi) {
            return Err(LinalgError::NotHermitian(defect).into());
        }
        Ok(Channel { d_in, d_out, choi: choi.hermitian_part() })
    }

    /// A state viewed as a preparation channel with trivial input.
    pub fn state(rho: &CMatrix) -> Result<Self, ChannelError> {
        Channel::new(1, rho.rows, rho.clone())
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape::new(&[self.d_in, self.d_out])
    }

    /// Tr_out J, which equals I for trace-preserving maps.
    pub fn input_marginal(&self) -> CMatrix {
        partial_trace(&self.choi, &self.shape(), &[0]).expect("choi shape is validated")
    }

    /// J / d_in.
    pub fn normalized_choi(&self) -> CMatrix {
        self.choi.scale(1.0 / self.d_in as f64)
    }

    /// Kraus operators from the spectral decomposition of a PSD Choi matrix.
    pub fn kraus(&self) -> Result<KrausSet, ChannelError> {
        let e = eigh(&self.choi)?;
        let cut = 1e-13 * e.values.first().copied().unwrap_or(0.0).abs().max(1e-300);
        let mut ops = Vec::new();
        for (k, &l) in e.values.iter().enumerate() {
            if l < -1e-9 * self.choi.frobenius_norm().max(1.0) {
                return Err(ChannelError::NotCptp("choi has a negative eigenvalue".into()));
            }
            if l <= cut {
                continue;
            }
            let s = l.sqrt();
            // |v⟩ = Σ_{i,a} v[i·d_out + a] |i⟩|a⟩ ↦ K[a,i] = √λ v[i·d_out + a]
            ops.push(CMatrix::from_fn(self.d_out, self.d_in, |a, i| e.vectors[(i * self.d_out + a, k)] * s));
        }
        Ok(KrausSet { d_in: self.d_in, d_out: self.d_out, operators: ops })
    }
}

pub fn choi_from_kraus(k: &KrausSet) -> Result<Channel, ChannelError> {
    let n = k.d_in * k.d_out;
    let mut j = CMatrix::zeros(n, n);
    for op in &k.operators {
        if op.rows != k.d_out || op.cols != k.d_in {
            return Err(ChannelError::Shape(format!(
                "Kraus operator is {}x{}, expected {}x{}",
                op.rows, op.cols, k.d_out, k.d_in
            )));
        }
        // vec: |v⟩ = Σ_i |i⟩ ⊗ K|i⟩
        let v = CMatrix::from_fn(n, 1, |x, _| op[(x % k.d_out, x / k.d_out)]);
        j += &v.matmul(&v.adjoint());
    }
    Channel::new(k.d_in, k.d_out, j)
}

pub fn is_channel(c: &Channel, tol: f64) -> ChannelVerdict {
    let cp = is_psd(&c.choi, tol);
    let tp = c.input_marginal().distance(&CMatrix::identity(c.d_in)) <= tol;
    ChannelVerdict { cp, tp }
}

pub fn require_cptp(c: &Channel, tol: f64, what: &str) -> Result<(), ChannelError> {
    let v = is_channel(c, tol * c.choi.frobenius_norm().max(1.0));
    if v.cptp() {
        Ok(())
    } else {
        Err(ChannelError::NotCptp(format!("{} (cp: {}, tp: {})", what, v.cp, v.tp)))
    }
}

/// Φ(ρ) = Tr_in[J (ρᵀ ⊗ I)].
pub fn apply(c: &Channel, rho: &CMatrix) -> Result<CMatrix, ChannelError> {
    if rho.rows != c.d_in || rho.cols != c.d_in {
        return Err(ChannelError::Shape(format!("input is {}x{}, channel expects {}", rho.rows, rho.cols, c.d_in)));
    }
    Ok(link_product(rho, &[c.d_in], &c.choi, &[c.d_in, c.d_out], &[(0, 0)])?)
}

/// Apply the channel to subsystem `sys` of a multipartite operator; the output
/// replaces the input leg in place.
pub fn apply_on(c: &Channel, rho: &CMatrix, dims: &[usize], sys: usize) -> Result<CMatrix, ChannelError> {
    if sys >= dims.len() || dims[sys] != c.d_in {
        return Err(ChannelError::Shape(format!("subsystem {} of {:?} does not match d_in {}", sys, dims, c.d_in)));
    }
    let out = link_product(rho, dims, &c.choi, &[c.d_in, c.d_out], &[(sys, 0)])?;
    // out is ordered (others..., output); move the output leg back to `sys`.
    let n = dims.len();
    let mut new_dims: Vec<usize> = dims.iter().enumerate().filter(|(k, _)| *k != sys).map(|(_, &d)| d).collect();
    new_dims.push(c.d_out);
    let mut perm: Vec<usize> = (0..n - 1).collect();
    perm.insert(sys, n - 1);
    Ok(permute_systems(&out, &SystemShape::new(&new_dims), &perm)?)
}

/// Heisenberg-picture action: Tr[Y Φ(ρ)] = Tr[Φ†(Y) ρ].
pub fn apply_adjoint(c: &Channel, y: &CMatrix) -> Result<CMatrix, ChannelError> {
    if y.rows != c.d_out || y.cols != c.d_out {
        return Err(ChannelError::Shape("adjoint input has wrong size".into()));
    }
    let m = c.choi.matmul(&kron(&CMatrix::identity(c.d_in), y));
    Ok(partial_trace(&m, &c.shape(), &[0])?.transpose())
}

/// `outer ∘ inner`.
pub fn compose(outer: &Channel, inner: &Channel) -> Result<Channel, ChannelError> {
    if inner.d_out != outer.d_in {
        return Err(ChannelError::Shape(format!("cannot compose {}→{} after {}→{}", outer.d_in, outer.d_out, inner.d_in, inner.d_out)));
    }
    let j = link_product(&inner.choi, &[inner.d_in, inner.d_out], &outer.choi, &[outer.d_in, outer.d_out], &[(1, 0)])?;
    Channel::new(inner.d_in, outer.d_out, j)
}

/// f ⊗ g acting on (in_f ⊗ in_g) → (out_f ⊗ out_g).
pub fn tensor(f: &Channel, g: &Channel) -> Channel {
    let k = kron(&f.choi, &g.choi);
    let shape = SystemShape::new(&[f.d_in, f.d_out, g.d_in, g.d_out]);
    let j = permute_systems(&k, &shape, &[0, 2, 1, 3]).expect("shape is consistent");
    Channel { d_in: f.d_in * g.d_in, d_out: f.d_out * g.d_out, choi: j }
}

/// ⟨f, g⟩ = Tr[J_f† J_g].
pub fn map_inner(f: &Channel, g: &Channel) -> C64 {
    crate::linalg::hs_inner(&f.choi, &g.choi)
}

pub fn identity_channel(d: usize) -> Channel {
    Channel { d_in: d, d_out: d, choi: CMatrix::max_entangled(d) }
}

pub fn unitary_channel(u: &CMatrix) -> Channel {
    let k = KrausSet { d_in: u.cols, d_out: u.rows, operators: vec![u.clone()] };
    choi_from_kraus(&k).expect("single operator has consistent shape")
}

/// The channel that outputs the maximally mixed state.
pub fn uniform_channel(d_in: usize, d_out: usize) -> Channel {
    let u = CMatrix::identity(d_out).scale(1.0 / d_out as f64);
    replacement_channel(d_in, &u).expect("uniform state is valid")
}

/// X ↦ Tr[X] σ.
pub fn replacement_channel(d_in: usize, sigma: &CMatrix) -> Result<Channel, ChannelError> {
    if !sigma.is_square() {
        return Err(ChannelError::Shape("replacement state must be square".into()));
    }
    Channel::new(d_in, sigma.rows, kron(&CMatrix::identity(d_in), sigma))
}

/// Stinespring sampling: a Haar isometry C^{d_in} → C^{d_out·rank} split into
/// Kraus blocks.
pub fn random_channel(d_in: usize, d_out: usize, kraus_rank: usize, seed: u64) -> Result<Channel, ChannelError> {
    let mut rng = rng_from_seed(seed);
    random_channel_with(d_in, d_out, kraus_rank, &mut rng)
}

pub fn random_channel_with<R: Rng>(d_in: usize, d_out: usize, kraus_rank: usize, rng: &mut R) -> Result<Channel, ChannelError> {
    if kraus_rank == 0 || kraus_rank * d_out < d_in {
        return Err(ChannelError::Shape(format!(
            "no isometry from dimension {} into {}·{}",
            d_in, d_out, kraus_rank
        )));
    }
    let v = random_isometry(d_out * kraus_rank, d_in, rng);
    let ops = (0..kraus_rank)
        .map(|k| CMatrix::from_fn(d_out, d_in, |a, i| v[(k * d_out + a, i)]))
        .collect();
    choi_from_kraus(&KrausSet { d_in, d_out, operators: ops })
}

/// Random mixture of unitary channels (a unital channel).
pub fn random_mixed_unitary<R: Rng>(d: usize, terms: usize, rng: &mut R) -> Channel {
    let p = crate::random::random_probabilities(terms, rng);
    let mut j = CMatrix::zeros(d * d, d * d);
    for w in p {
        let u = crate::random::haar_unitary(d, rng);
        j += &unitary_channel(&u).choi.scale(w);
    }
    Channel { d_in: d, d_out: d, choi: j }
}

/// Tensor permutation helper: reorder systems of a Choi-like operator.
pub fn reorder(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    permute_systems(m, &SystemShape::new(dims), perm).expect("caller supplies consistent dims")
}

/// Inverse of `reorder`.
pub fn unorder(m: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    reorder(m, &new_dims, &inverse_permutation(perm))
}

/// ρ ↦ Tr[ρ] for a square matrix, as a 1×1 matrix.
pub fn trace_channel(d: usize) -> Channel {
    Channel { d_in: d, d_out: 1, choi: CMatrix::identity(d) }
}

/// Unit vector helper used in constructions: Σ_i |i⟩|i⟩.
pub fn phi_plus_vector(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, 1, |x, _| if x / d == x % d { ONE } else { crate::linalg::ZERO })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, rng_from_seed};

    fn replace0() -> KrausSet {
        KrausSet {
            d_in: 2,
            d_out: 2,
            operators: vec![
                CMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]),
                CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]),
            ],
        }
    }

    #[test]
    fn identity_choi_is_phi_plus() {
        let k = KrausSet { d_in: 2, d_out: 2, operators: vec![CMatrix::identity(2)] };
        assert_eq!(choi_from_kraus(&k).unwrap().choi, CMatrix::max_entangled(2));
    }

    #[test]
    fn replacement_choi() {
        let c = choi_from_kraus(&replace0()).unwrap();
        assert_eq!(c.choi, kron(&CMatrix::identity(2), &CMatrix::diag(&[1.0, 0.0])));
        assert!(replace0().trace_preserving(1e-12));
    }

    #[test]
    fn verdicts() {
        assert_eq!(is_channel(&identity_channel(2), 1e-8), ChannelVerdict { cp: true, tp: true });
        let neg = Channel::new(2, 2, CMatrix::identity(4).scale(-1.0)).unwrap();
        assert_eq!(is_channel(&neg, 1e-8), ChannelVerdict { cp: false, tp: false });
        // Transpose map: J = swap.
        let swap = CMatrix::from_fn(4, 4, |i, j| if i == (j % 2) * 2 + j / 2 { ONE } else { crate::linalg::ZERO });
        let t = Channel::new(2, 2, swap).unwrap();
        assert_eq!(is_channel(&t, 1e-8), ChannelVerdict { cp: false, tp: true });
    }

    #[test]
    fn random_channels_are_cptp_and_reproducible() {
        for rank in 1..4 {
            let c = random_channel(2, 3, rank, 42).unwrap();
            assert!(is_channel(&c, 1e-10).cptp());
            assert_eq!(c, random_channel(2, 3, rank, 42).unwrap());
        }
        let u = random_channel(3, 3, 1, 9).unwrap();
        let e = eigh(&u.choi).unwrap();
        assert_eq!(e.values.iter().filter(|&&l| l > 1e-9).count(), 1);
        assert!(random_channel(4, 2, 1, 0).is_err());
    }

    #[test]
    fn apply_matches_kraus_sum() {
        let mut rng = rng_from_seed(1);
        for s in 0..50 {
            let c = random_channel(3, 2, 2, s).unwrap();
            let k = c.kraus().unwrap();
            let rho = random_density(3, 3, &mut rng);
            let mut want = CMatrix::zeros(2, 2);
            for op in &k.operators {
                want += &op.matmul(&rho).matmul(&op.adjoint());
            }
            assert!(apply(&c, &rho).unwrap().distance(&want) <= 1e-10);
        }
    }

    #[test]
    fn uniform_and_identity_act_as_expected() {
        let mut rng = rng_from_seed(2);
        let rho = random_density(2, 2, &mut rng);
        assert!(apply(&uniform_channel(2, 2), &rho).unwrap().distance(&CMatrix::identity(2).scale(0.5)) < 1e-14);
        assert!(apply(&identity_channel(2), &rho).unwrap().distance(&rho) < 1e-14);
        assert_eq!(uniform_channel(2, 2).choi, CMatrix::identity(4).scale(0.5));
    }

    #[test]
    fn compose_matches_repeated_application() {
        let mut rng = rng_from_seed(3);
        let f = random_channel(2, 3, 2, 10).unwrap();
        let g = random_channel(3, 2, 3, 11).unwrap();
        let gf = compose(&g, &f).unwrap();
        assert!(is_channel(&gf, 1e-10).cptp());
        let rho = random_density(2, 2, &mut rng);
        let want = apply(&g, &apply(&f, &rho).unwrap()).unwrap();
        assert!(apply(&gf, &rho).unwrap().distance(&want) < 1e-12);
        assert!(compose(&identity_channel(2), &g).unwrap().choi.distance(&g.choi) < 1e-14);
    }

    #[test]
    fn tensor_marginals_factor() {
        let mut rng = rng_from_seed(4);
        let f = random_channel(2, 2, 2, 20).unwrap();
        let g = random_channel(3, 2, 2, 21).unwrap();
        let fg = tensor(&f, &g);
        assert!(is_channel(&fg, 1e-10).cptp());
        let (a, b) = (random_density(2, 2, &mut rng), random_density(3, 3, &mut rng));
        let want = kron(&apply(&f, &a).unwrap(), &apply(&g, &b).unwrap());
        assert!(apply(&fg, &kron(&a, &b)).unwrap().distance(&want) < 1e-12);
    }

    #[test]
    fn apply_on_subsystem() {
        let mut rng = rng_from_seed(5);
        let f = random_channel(2, 3, 2, 30).unwrap();
        let (a, b) = (random_density(3, 3, &mut rng), random_density(2, 2, &mut rng));
        let got = apply_on(&f, &kron(&a, &b), &[3, 2], 1).unwrap();
        assert!(got.distance(&kron(&a, &apply(&f, &b).unwrap())) < 1e-12);
    }

    #[test]
    fn adjoint_is_heisenberg_picture() {
        let mut rng = rng_from_seed(6);
        let f = random_channel(2, 3, 2, 40).unwrap();
        let rho = random_density(2, 2, &mut rng);
        let y = random_density(3, 3, &mut rng);
        let lhs = crate::linalg::hs_inner(&y, &apply(&f, &rho).unwrap());
        let rhs = crate::linalg::hs_inner(&apply_adjoint(&f, &y).unwrap(), &rho);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn map_inner_matches_basis_sum() {
        for s in 0..10 {
            let f = random_channel(2, 3, 2, 100 + s).unwrap();
            let g = random_channel(2, 3, 3, 200 + s).unwrap();
            let mut want = C64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    let eij = CMatrix::from_fn(2, 2, |a, b| if a == i && b == j { ONE } else { crate::linalg::ZERO });
                    let fe = link_product(&eij, &[2], &f.choi, &[2, 3], &[(0, 0)]).unwrap();
                    let ge = link_product(&eij, &[2], &g.choi, &[2, 3], &[(0, 0)]).unwrap();
                    want += crate::linalg::hs_inner(&fe, &ge);
                }
            }
            assert!((map_inner(&f, &g) - want).norm() < 1e-12);
        }
        assert!((map_inner(&identity_channel(3), &identity_channel(3)).re - 9.0).abs() < 1e-14);
    }

    #[test]
    fn kraus_roundtrip() {
        let c = random_channel(2, 2, 3, 77).unwrap();
        let back = choi_from_kraus(&c.kraus().unwrap()).unwrap();
        assert!(back.choi.distance(&c.choi) < 1e-12);
    }
}
