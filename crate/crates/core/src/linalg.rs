//! Dense complex matrices and the multipartite index gymnastics used by the
//! rest of the crate: Kronecker products, partial traces and transposes,
//! subsystem permutations, the link product of Choi matrices and a Jacobi
//! eigensolver for Hermitian matrices.
//!
//! Multi-indices are row-major with subsystem 0 as the most significant digit.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is singular")]
    Singular,
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        CMatrix { rows, cols, data }
    }

    /// Build from real row slices.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// Column vector from amplitudes.
    pub fn ket(amps: &[C64]) -> Self {
        Self::from_vec(amps.len(), 1, amps.to_vec())
    }

    /// Computational basis vector |i⟩ in dimension d.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = Self::zeros(d, 1);
        v[(i, 0)] = ONE;
        v
    }

    /// |v⟩⟨v| for a column vector v.
    pub fn projector(v: &CMatrix) -> Self {
        v.matmul(&v.adjoint())
    }

    /// Unnormalized maximally entangled operator φ₊ = Σ |ii⟩⟨jj| on C^d ⊗ C^d.
    pub fn max_entangled(d: usize) -> Self {
        let mut m = Self::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                m[(i * d + i, j * d + j)] = ONE;
            }
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// ‖m − m†‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// (m + m†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &mut out[i * m..(i + 1) * m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[l * m..(l + 1) * m];
                for j in 0..m {
                    row[j] += a * orow[j];
                }
            }
        }
        CMatrix { rows: n, cols: m, data: out }
    }

    pub fn column(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    pub fn distance(&self, other: &CMatrix) -> f64 {
        (self - other).frobenius_norm()
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().partial_cmp(&a[(y, col)].norm()).unwrap())
                .unwrap();
            if a[(piv, col)].norm() <= 1e-14 * scale {
                return Err(LinalgError::Singular);
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] -= f * ac;
                    inv[(r, j)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: &CMatrix) -> CMatrix {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                CMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }
        impl $tr<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: CMatrix) -> CMatrix {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: &CMatrix) -> CMatrix {
                (&self).$f(rhs)
            }
        }
    };
}
elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Mul<CMatrix> for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        self.matmul(&rhs)
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(-1.0)
    }
}

/// Ordered subsystem dimensions of a multipartite operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemShape {
    pub dims: Vec<usize>,
}

impl SystemShape {
    pub fn new(dims: &[usize]) -> Self {
        SystemShape { dims: dims.to_vec() }
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn check(&self, m: &CMatrix) -> Result<(), LinalgError> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(LinalgError::Dimension("subsystem of dimension 0".into()));
        }
        if !m.is_square() || m.rows != self.total() {
            return Err(LinalgError::Dimension(format!(
                "{}x{} matrix does not fit subsystem dims {:?}",
                m.rows, m.cols, self.dims
            )));
        }
        Ok(())
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (r, c) = (a.rows * b.rows, a.cols * b.cols);
    let mut out = CMatrix::zeros(r, c);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..b.rows {
                let base = (i * b.rows + k) * c + j * b.cols;
                for l in 0..b.cols {
                    out.data[base + l] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_all(ms: &[&CMatrix]) -> CMatrix {
    ms.iter().fold(CMatrix::identity(1), |acc, m| kron(&acc, m))
}

/// Trace out every subsystem not listed in `keep`; kept subsystems stay in
/// their original order.
pub fn partial_trace(m: &CMatrix, shape: &SystemShape, keep: &[usize]) -> Result<CMatrix, LinalgError> {
    shape.check(m)?;
    let n = shape.dims.len();
    if keep.iter().any(|&k| k >= n) {
        return Err(LinalgError::Dimension(format!("keep {:?} out of range for {} systems", keep, n)));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..n).filter(|k| !keep_sorted.contains(k)).collect();
    let st = strides(&shape.dims);
    let kdims: Vec<usize> = keep_sorted.iter().map(|&k| shape.dims[k]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&k| shape.dims[k]).collect();
    let kd: usize = kdims.iter().product();
    let td: usize = tdims.iter().product();
    // Offsets of each kept / traced multi-index in the full index.
    let offsets = |sys: &[usize], ds: &[usize]| -> Vec<usize> {
        let tot: usize = ds.iter().product();
        let mut dig = vec![0; ds.len()];
        (0..tot)
            .map(|x| {
                digits(x, ds, &mut dig);
                sys.iter().zip(&dig).map(|(&s, &d)| st[s] * d).sum()
            })
            .collect()
    };
    let koff = offsets(&keep_sorted, &kdims);
    let toff = offsets(&traced, &tdims);
    let side = m.cols;
    let mut out = CMatrix::zeros(kd, kd);
    for i in 0..kd {
        for j in 0..kd {
            let mut s = ZERO;
            for t in 0..td {
                s += m.data[(koff[i] + toff[t]) * side + koff[j] + toff[t]];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Transpose the listed subsystems.
pub fn partial_transpose(m: &CMatrix, shape: &SystemShape, sys: &[usize]) -> Result<CMatrix, LinalgError> {
    shape.check(m)?;
    let n = shape.dims.len();
    if sys.iter().any(|&k| k >= n) {
        return Err(LinalgError::Dimension(format!("system {:?} out of range", sys)));
    }
    let st = strides(&shape.dims);
    let side = m.rows;
    let mut out = CMatrix::zeros(side, side);
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    for i in 0..side {
        digits(i, &shape.dims, &mut di);
        for j in 0..side {
            digits(j, &shape.dims, &mut dj);
            let (mut ni, mut nj) = (i, j);
            for &s in sys {
                ni = ni - di[s] * st[s] + dj[s] * st[s];
                nj = nj - dj[s] * st[s] + di[s] * st[s];
            }
            out[(ni, nj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Reorder subsystems: output subsystem k is input subsystem `perm[k]`.
pub fn permute_systems(m: &CMatrix, shape: &SystemShape, perm: &[usize]) -> Result<CMatrix, LinalgError> {
    shape.check(m)?;
    let n = shape.dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(LinalgError::Dimension(format!("{:?} is not a permutation of {} systems", perm, n)));
    }
    let map = permutation_map(&shape.dims, perm);
    let side = m.rows;
    let mut out = CMatrix::zeros(side, side);
    for i in 0..side {
        for j in 0..side {
            out.data[i * side + j] = m.data[map[i] * side + map[j]];
        }
    }
    Ok(out)
}

/// For each new flat index, the old flat index it reads from.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let mut dig = vec![0; dims.len()];
    (0..total)
        .map(|x| {
            digits(x, &new_dims, &mut dig);
            perm.iter().zip(&dig).map(|(&p, &d)| st[p] * d).sum()
        })
        .collect()
}

/// Inverse of a permutation given in the `permute_systems` convention.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Permute the subsystems of a column vector.
pub fn permute_vector(v: &CMatrix, dims: &[usize], perm: &[usize]) -> CMatrix {
    let map = permutation_map(dims, perm);
    CMatrix::from_fn(v.rows, 1, |i, _| v[(map[i], 0)])
}

/// Link product of two operators sharing some subsystems:
/// `Tr_S[(A^{T_S} ⊗ I)(I ⊗ B)]`, where `pairs` lists (system of A, system of B)
/// to be contracted. The result lives on A's remaining systems followed by B's
/// remaining systems, each in original order. For Choi matrices this is the
/// Choi matrix of the composed network.
pub fn link_product(
    a: &CMatrix,
    a_dims: &[usize],
    b: &CMatrix,
    b_dims: &[usize],
    pairs: &[(usize, usize)],
) -> Result<CMatrix, LinalgError> {
    let sa = SystemShape::new(a_dims);
    let sb = SystemShape::new(b_dims);
    sa.check(a)?;
    sb.check(b)?;
    for &(x, y) in pairs {
        if x >= a_dims.len() || y >= b_dims.len() || a_dims[x] != b_dims[y] {
            return Err(LinalgError::Dimension(format!("cannot contract system {} with {}", x, y)));
        }
    }
    let a_shared: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let b_shared: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let a_rest: Vec<usize> = (0..a_dims.len()).filter(|k| !a_shared.contains(k)).collect();
    let b_rest: Vec<usize> = (0..b_dims.len()).filter(|k| !b_shared.contains(k)).collect();
    let pa: Vec<usize> = a_rest.iter().chain(&a_shared).copied().collect();
    let pb: Vec<usize> = b_shared.iter().chain(&b_rest).copied().collect();
    let ap = permute_systems(a, &sa, &pa)?;
    let bp = permute_systems(b, &sb, &pb)?;
    let r1: usize = a_rest.iter().map(|&k| a_dims[k]).product();
    let r2: usize = b_rest.iter().map(|&k| b_dims[k]).product();
    let s: usize = a_shared.iter().map(|&k| a_dims[k]).product();
    let (na, nb) = (r1 * s, s * r2);
    let n = r1 * r2;
    let mut out = CMatrix::zeros(n, n);
    // out[(i1,i2),(j1,j2)] = Σ_{t,u} A[(i1,t),(j1,u)] · B[(t,i2),(u,j2)]
    for i1 in 0..r1 {
        for j1 in 0..r1 {
            for t in 0..s {
                for u in 0..s {
                    let x = ap.data[(i1 * s + t) * na + j1 * s + u];
                    if x == ZERO {
                        continue;
                    }
                    for i2 in 0..r2 {
                        let brow = (t * r2 + i2) * nb + u * r2;
                        let orow = (i1 * r2 + i2) * n + j1 * r2;
                        for j2 in 0..r2 {
                            out.data[orow + j2] += x * bp.data[brow + j2];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues sorted descending,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    /// V diag(f(λ)) V†.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = CMatrix::zeros(n, n);
        for k in 0..n {
            if fv[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * fv[k];
                for j in 0..n {
                    out.data[i * n + j] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

pub fn hermitian_tolerance(m: &CMatrix) -> f64 {
    1e-9 * m.frobenius_norm().max(1.0)
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn eigh(m: &CMatrix) -> Result<Eigh, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Dimension("eigh of a non-square matrix".into()));
    }
    let defect = m.hermiticity_defect();
    if defect > hermitian_tolerance(m) {
        return Err(LinalgError::NotHermitian(defect));
    }
    Ok(eigh_unchecked(&m.hermitian_part()))
}

fn eigh_unchecked(m: &CMatrix) -> Eigh {
    let n = m.rows;
    let mut a = m.clone();
    let mut v = CMatrix::identity(n);
    let norm = m.frobenius_norm();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * norm.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = phase.conj();
                // U on (p,q): [[c, s],[−s·e, c·e]]
                let (upp, upq, uqp, uqq) = (C64::new(c, 0.0), C64::new(s, 0.0), -e * s, e * c);
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * upp + akq * uqp;
                    a[(k, q)] = akp * upq + akq * uqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.partial_cmp(&a[(x, x)].re).unwrap());
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Eigh { values, vectors }
}

pub fn is_psd(m: &CMatrix, tol: f64) -> bool {
    match eigh(m) {
        Ok(e) => e.values.last().map_or(true, |&l| l >= -tol),
        Err(_) => false,
    }
}

/// Smallest eigenvalue of a Hermitian matrix (Hermitian part is used).
pub fn lambda_min(m: &CMatrix) -> f64 {
    eigh_unchecked(&m.hermitian_part()).values.last().copied().unwrap_or(0.0)
}

pub fn lambda_max(m: &CMatrix) -> f64 {
    eigh_unchecked(&m.hermitian_part()).values.first().copied().unwrap_or(0.0)
}

/// Tr[x† y].
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> C64 {
    assert_eq!((x.rows, x.cols), (y.rows, y.cols), "shape mismatch");
    x.data.iter().zip(&y.data).map(|(a, b)| a.conj() * b).sum()
}

/// Sum of singular values of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigh_unchecked(&m.hermitian_part()).values.iter().map(|l| l.abs()).sum()
}

/// Project onto the PSD cone by clipping negative eigenvalues.
pub fn psd_projection(m: &CMatrix) -> CMatrix {
    eigh_unchecked(&m.hermitian_part()).map(|l| l.max(0.0))
}

/// Principal square root of a PSD matrix (negative eigenvalues are clipped).
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    eigh_unchecked(&m.hermitian_part()).map(|l| l.max(0.0).sqrt())
}

/// Gram–Schmidt on the columns (modified, twice for stability).
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let mut q = m.clone();
    for j in 0..q.cols {
        for _ in 0..2 {
            for k in 0..j {
                let mut dot = ZERO;
                for i in 0..q.rows {
                    dot += q[(i, k)].conj() * q[(i, j)];
                }
                for i in 0..q.rows {
                    let qk = q[(i, k)];
                    q[(i, j)] -= dot * qk;
                }
            }
        }
        let nrm = (0..q.rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..q.rows {
            q[(i, j)] /= nrm;
        }
    }
    q
}
