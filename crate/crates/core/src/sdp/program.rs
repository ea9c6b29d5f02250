//! Conic programs over Hermitian blocks.
//!
//! Primal:  inf  Σ_k Tr[X_k H1_k] + constant
//!          s.t. Γ_j(X) − H2_j ∈ K2_j,  X_k ∈ K1_k
//! Dual:    sup  Σ_j Tr[Y_j H2_j] + constant
//!          s.t. H1 − Γ*(Y) ∈ K1*,  Y ∈ K2*
//!
//! Each linear map Γ_j is a sum of terms, one per variable block it reads,
//! stored as the images of an orthonormal Hermitian basis of that block.

use serde_json::{json, Value};

use crate::linalg::{CMatrix, C64};

/// Cone attached to a variable block (Psd or Free) or a constraint block
/// (Psd, Zero or Free).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Psd,
    Zero,
    Free,
}

impl Cone {
    pub fn dual(self) -> Cone {
        match self {
            Cone::Psd => Cone::Psd,
            Cone::Zero => Cone::Free,
            Cone::Free => Cone::Zero,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cone::Psd => "psd",
            Cone::Zero => "zero",
            Cone::Free => "free",
        }
    }
}

/// Sparse Hermitian matrix, both triangles stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SparseHerm {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseHerm {
    pub fn from_dense(m: &CMatrix) -> Self {
        let cut = 1e-15 * m.max_abs().max(1e-300);
        let mut entries = Vec::new();
        for i in 0..m.rows {
            for j in 0..m.cols {
                let z = m[(i, j)];
                if z.norm() > cut {
                    entries.push((i, j, z));
                }
            }
        }
        SparseHerm { dim: m.rows, entries }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(i, j, z) in &self.entries {
            m[(i, j)] += z;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        SparseHerm { dim: self.dim, entries: self.entries.iter().map(|&(i, j, z)| (i, j, z * s)).collect() }
    }
}

/// Number of real coordinates of an n×n Hermitian matrix.
pub fn herm_coords(n: usize) -> usize {
    n * n
}

/// Orthonormal Hermitian basis element k of dimension n: diagonal units,
/// then (E_ij + E_ji)/√2 and i(E_ij − E_ji)/√2 for i < j.
pub fn herm_basis(n: usize, k: usize) -> SparseHerm {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    if k < n {
        return SparseHerm { dim: n, entries: vec![(k, k, C64::new(1.0, 0.0))] };
    }
    let (i, j, imag) = offdiag_index(n, k - n);
    let entries = if imag {
        vec![(i, j, C64::new(0.0, r)), (j, i, C64::new(0.0, -r))]
    } else {
        vec![(i, j, C64::new(r, 0.0)), (j, i, C64::new(r, 0.0))]
    };
    SparseHerm { dim: n, entries }
}

fn offdiag_index(n: usize, mut k: usize) -> (usize, usize, bool) {
    let imag = k % 2 == 1;
    k /= 2;
    for i in 0..n {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k, imag);
        }
        k -= row;
    }
    unreachable!("basis index out of range")
}

/// Coordinates ⟨B_k, M⟩ of a Hermitian matrix.
pub fn herm_to_coords(m: &CMatrix) -> Vec<f64> {
    let n = m.rows;
    let s = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            // Tr[B M] is √2 Re M_ji for the real element and −√2 Im M_ji
            // for the imaginary one.
            let z = m[(j, i)];
            out.push(s * z.re);
            out.push(-s * z.im);
        }
    }
    out
}

/// Inverse of `herm_to_coords`.
pub fn coords_to_herm(n: usize, x: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        m[(i, i)] = C64::new(x[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (x[k], x[k + 1]);
            m[(i, j)] = C64::new(a * r, b * r);
            m[(j, i)] = C64::new(a * r, -b * r);
            k += 2;
        }
    }
    m
}

/// One summand of a constraint map: the images Γ(B_k) of the basis of the
/// variable block `var`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub var: usize,
    pub images: Vec<SparseHerm>,
}

impl Term {
    /// Tabulate a linear, Hermiticity-preserving map on the basis of an
    /// n-dimensional block.
    pub fn from_map(var: usize, n: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let images = (0..herm_coords(n)).map(|k| SparseHerm::from_dense(&f(&herm_basis(n, k).to_dense()))).collect();
        Term { var, images }
    }

    /// X ↦ X.
    pub fn identity(var: usize, n: usize) -> Self {
        Term { var, images: (0..herm_coords(n)).map(|k| herm_basis(n, k)).collect() }
    }

    /// Scalar variable (1×1 block) times a fixed Hermitian matrix.
    pub fn scalar_times(var: usize, m: &CMatrix) -> Self {
        Term { var, images: vec![SparseHerm::from_dense(m)] }
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let c = herm_to_coords(x);
        let dim = self.images.first().map_or(0, |s| s.dim);
        let mut out = CMatrix::zeros(dim, dim);
        for (xk, img) in c.iter().zip(&self.images) {
            if *xk == 0.0 {
                continue;
            }
            for &(i, j, z) in &img.entries {
                out[(i, j)] += z * *xk;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarBlock {
    pub dim: usize,
    pub cone: Cone,
    pub objective: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintBlock {
    pub dim: usize,
    pub cone: Cone,
    pub terms: Vec<Term>,
    pub offset: CMatrix,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConicProgram {
    pub vars: Vec<VarBlock>,
    pub constraints: Vec<ConstraintBlock>,
    pub constant: f64,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a Hermitian variable block; returns its index.
    pub fn add_var(&mut self, dim: usize, cone: Cone) -> usize {
        assert!(cone != Cone::Zero, "variable blocks are PSD or free");
        self.vars.push(VarBlock { dim, cone, objective: CMatrix::zeros(dim, dim) });
        self.vars.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, h1: CMatrix) {
        assert_eq!(h1.rows, self.vars[var].dim, "objective size");
        self.vars[var].objective = h1;
    }

    /// Add Σ terms(X) − offset ∈ cone; returns the constraint index.
    pub fn add_constraint(&mut self, cone: Cone, terms: Vec<Term>, offset: CMatrix) -> usize {
        let dim = offset.rows;
        for t in &terms {
            assert!(t.var < self.vars.len(), "term refers to unknown variable");
            assert_eq!(t.images.len(), herm_coords(self.vars[t.var].dim), "term does not match variable size");
            assert!(t.images.iter().all(|s| s.dim == dim), "term image size differs from offset");
        }
        self.constraints.push(ConstraintBlock { dim, cone, terms, offset });
        self.constraints.len() - 1
    }

    pub fn var_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.vars.len() + 1);
        let mut acc = 0;
        for v in &self.vars {
            off.push(acc);
            acc += herm_coords(v.dim);
        }
        off.push(acc);
        off
    }

    /// Γ_j(X).
    pub fn constraint_value(&self, j: usize, x: &[CMatrix]) -> CMatrix {
        let c = &self.constraints[j];
        let mut out = CMatrix::zeros(c.dim, c.dim);
        for t in &c.terms {
            out += &t.apply(&x[t.var]);
        }
        out
    }

    pub fn objective_value(&self, x: &[CMatrix]) -> f64 {
        self.constant
            + self.vars.iter().zip(x).map(|(v, xk)| crate::linalg::hs_inner(&v.objective, xk).re).sum::<f64>()
    }

    /// Γ*(Y) for each variable block.
    pub fn adjoint_value(&self, y: &[CMatrix]) -> Vec<CMatrix> {
        let mut out: Vec<Vec<f64>> = self.vars.iter().map(|v| vec![0.0; herm_coords(v.dim)]).collect();
        for (c, yj) in self.constraints.iter().zip(y) {
            for t in &c.terms {
                for (k, img) in t.images.iter().enumerate() {
                    let mut s = 0.0;
                    for &(a, b, z) in &img.entries {
                        s += (z.conj() * yj[(a, b)]).re;
                    }
                    out[t.var][k] += s;
                }
            }
        }
        out.iter().zip(&self.vars).map(|(x, v)| coords_to_herm(v.dim, x)).collect()
    }

    /// The dual program written again in primal form:
    /// inf −Tr[Y H2] − constant s.t. (−Γ*)(Y) − (−H1) ∈ K1*, Y ∈ K2*.
    /// Free-cone constraints have the zero dual cone and are dropped.
    pub fn dualize(&self) -> ConicProgram {
        let mut d = ConicProgram { constant: -self.constant, ..Default::default() };
        let mut map = vec![None; self.constraints.len()];
        for (j, c) in self.constraints.iter().enumerate() {
            if c.cone == Cone::Free {
                continue;
            }
            let v = d.add_var(c.dim, c.cone.dual());
            d.set_objective(v, c.offset.scale(-1.0));
            map[j] = Some(v);
        }
        for (k, v) in self.vars.iter().enumerate() {
            let mut terms = Vec::new();
            for (j, c) in self.constraints.iter().enumerate() {
                let Some(yv) = map[j] else { continue };
                for t in c.terms.iter().filter(|t| t.var == k) {
                    terms.push(adjoint_term(t, yv, c.dim, v.dim));
                }
            }
            d.add_constraint(v.cone.dual(), terms, v.objective.scale(-1.0));
        }
        d
    }

    /// Sparse-triplet JSON dump. Matrices are lists of `[row, col, re, im]`;
    /// term images are listed per basis coordinate of the variable block (the
    /// basis is documented in `herm_basis`).
    pub fn to_triplet_json(&self) -> Value {
        let trip = |m: &SparseHerm| -> Value {
            Value::Array(m.entries.iter().map(|&(i, j, z)| json!([i, j, z.re, z.im])).collect())
        };
        json!({
            "constant": self.constant,
            "vars": self.vars.iter().map(|v| json!({
                "dim": v.dim, "cone": v.cone.name(), "objective": trip(&SparseHerm::from_dense(&v.objective)),
            })).collect::<Vec<_>>(),
            "constraints": self.constraints.iter().map(|c| json!({
                "dim": c.dim, "cone": c.cone.name(), "offset": trip(&SparseHerm::from_dense(&c.offset)),
                "terms": c.terms.iter().map(|t| json!({
                    "var": t.var,
                    "images": t.images.iter().map(|s| trip(s)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// −Γ* as a term from the block of Y (dimension `ydim`) into a block of
/// dimension `xdim`.
fn adjoint_term(t: &Term, yvar: usize, ydim: usize, xdim: usize) -> Term {
    // Real coordinate matrix G[l][k] = ⟨B_l^{(y)}, Γ(B_k^{(x)})⟩; the adjoint
    // sends B_l^{(y)} to Σ_k G[l][k] B_k^{(x)}.
    let ny = herm_coords(ydim);
    let mut g = vec![vec![0.0; t.images.len()]; ny];
    for (k, img) in t.images.iter().enumerate() {
        let c = herm_to_coords(&img.to_dense());
        for l in 0..ny {
            g[l][k] = c[l];
        }
    }
    let images = g
        .iter()
        .map(|row| {
            let neg: Vec<f64> = row.iter().map(|x| -x).collect();
            SparseHerm::from_dense(&coords_to_herm(xdim, &neg))
        })
        .collect();
    Term { var: yvar, images }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_coords_roundtrip() {
        let n = 3;
        for a in 0..9 {
            for b in 0..9 {
                let ip = crate::linalg::hs_inner(&herm_basis(n, a).to_dense(), &herm_basis(n, b).to_dense());
                assert!((ip.re - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15 && ip.im.abs() < 1e-15);
            }
            let c = herm_to_coords(&herm_basis(n, a).to_dense());
            for (k, x) in c.iter().enumerate() {
                assert!((x - if k == a { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        assert!(coords_to_herm(3, &herm_to_coords(&m)).distance(&m) < 1e-14);
    }

    #[test]
    fn adjoint_of_term_is_transpose() {
        let mut p = ConicProgram::new();
        let x = p.add_var(2, Cone::Free);
        let t = Term::from_map(x, 2, |m| crate::linalg::kron(m, &CMatrix::identity(2)));
        p.add_constraint(Cone::Psd, vec![t], CMatrix::zeros(4, 4));
        let xm = CMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64 - i as f64));
        let xm = xm.hermitian_part();
        let ym = CMatrix::from_fn(4, 4, |i, j| C64::new((i * j) as f64, (i as f64) - (j as f64))).hermitian_part();
        let lhs = crate::linalg::hs_inner(&ym, &p.constraint_value(0, &[xm.clone()])).re;
        let rhs = crate::linalg::hs_inner(&p.adjoint_value(&[ym])[0], &xm).re;
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
