//! Infeasible-start primal-dual interior-point method for complex linear
//! matrix inequalities with affine equalities:
//!
//!   min cᵀz  s.t.  S_b = Σ_i z_i F_i^b − F0_b ⪰ 0,  E z = e
//!   max Σ_b ⟨F0_b, X_b⟩ + eᵀv  s.t.  ⟨F_i, X⟩ + (Eᵀv)_i = c_i,  X_b ⪰ 0
//!
//! HKM search direction with Mehrotra predictor-corrector. Equalities are
//! orthonormalized by a pivoted QR and handled through a nullspace basis of the
//! Schur system.

use nalgebra::{DMatrix, DVector};

use crate::linalg::C64;

pub(crate) type Sparse = Vec<(usize, usize, C64)>;

pub(crate) struct Block {
    pub dim: usize,
    pub f0: DMatrix<C64>,
    /// (variable index, F_i restricted to this block).
    pub terms: Vec<(usize, Sparse)>,
}

pub(crate) struct Lmi {
    pub n: usize,
    pub c: DVector<f64>,
    pub blocks: Vec<Block>,
    pub eq_a: DMatrix<f64>,
    pub eq_b: DVector<f64>,
}

pub(crate) struct Settings {
    pub max_iters: usize,
    pub gap_target: f64,
    pub feas_target: f64,
}

pub(crate) struct IpmResult {
    pub z: DVector<f64>,
    /// Multipliers of the original equality rows.
    pub v: DVector<f64>,
    pub x: Vec<DMatrix<C64>>,
    pub pobj: f64,
    pub dobj: f64,
    /// Relative residual of the z-side constraints (slack and equalities).
    pub z_infeas: f64,
    /// Relative residual of ⟨F_i, X⟩ + (Eᵀv)_i = c_i.
    pub x_infeas: f64,
    pub iterations: usize,
}

pub(crate) enum Outcome {
    Done(IpmResult),
    /// The equalities E z = e have no solution; the vector y satisfies
    /// Eᵀy ≈ 0 and eᵀy > 0.
    Inconsistent(DVector<f64>),
}

struct Equalities {
    /// Orthonormal rows spanning the row space of E.
    e: DMatrix<f64>,
    rhs: DVector<f64>,
    /// Orthonormal basis of the nullspace of E (n × (n − r)).
    null: DMatrix<f64>,
    /// Maps reduced multipliers back: v = back · v'.
    back: DMatrix<f64>,
}

fn reduce_equalities(a: &DMatrix<f64>, b: &DVector<f64>, n: usize) -> Result<Option<Equalities>, DVector<f64>> {
    if a.nrows() == 0 {
        return Ok(None);
    }
    // Row space of E from a column-pivoted QR of Eᵀ.
    let qr = a.transpose().col_piv_qr();
    let rr = qr.r();
    let rdiag: Vec<f64> = (0..rr.nrows().min(rr.ncols())).map(|i| rr[(i, i)]).collect();
    let rmax = rdiag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let r = rdiag.iter().take_while(|x| x.abs() > 1e-10 * rmax.max(1e-300)).count();
    let e = qr.q().columns(0, r).transpose();
    // E = M e with M = E eᵀ of full column rank; M = U T.
    let m = a * e.transpose();
    let (u, t) = if r == 0 {
        (DMatrix::zeros(a.nrows(), 0), DMatrix::zeros(0, 0))
    } else {
        let mq = m.qr();
        (mq.q(), mq.r())
    };
    let res = b - &u * (u.transpose() * b);
    if res.norm() > 1e-9 * b.norm().max(1.0) {
        return Err(&res / res.norm());
    }
    let tinv = if r == 0 { t } else { t.try_inverse().ok_or_else(|| res.clone())? };
    let rhs = &tinv * (u.transpose() * b);
    let back = &u * tinv.transpose();
    let null = if r == n {
        DMatrix::zeros(n, 0)
    } else {
        let p = DMatrix::identity(n, n) - e.transpose() * &e;
        let eig = p.symmetric_eigen();
        let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        eig.eigenvectors.select_columns(&cols)
    };
    Ok(Some(Equalities { e, rhs, null, back }))
}

fn herm(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

fn re_trace_prod(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    // Re Tr[A B]
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

impl Lmi {
    /// A*(z) restricted to block b.
    fn adj(&self, b: usize, z: &DVector<f64>) -> DMatrix<C64> {
        let blk = &self.blocks[b];
        let mut m = DMatrix::zeros(blk.dim, blk.dim);
        for (i, f) in &blk.terms {
            let zi = z[*i];
            if zi == 0.0 {
                continue;
            }
            for &(a, c, v) in f {
                m[(a, c)] += v * zi;
            }
        }
        m
    }

    /// A(W)_i = Σ_b Re Tr[F_i^b W_b].
    fn op(&self, w: &[DMatrix<C64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for (blk, wb) in self.blocks.iter().zip(w) {
            for (i, f) in &blk.terms {
                let mut s = 0.0;
                for &(a, c, v) in f {
                    s += (v * wb[(c, a)]).re;
                }
                out[*i] += s;
            }
        }
        out
    }

    /// M_ij = Σ_b Re Tr[F_i X F_j S⁻¹].
    fn schur(&self, x: &[DMatrix<C64>], sinv: &[DMatrix<C64>]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (b, blk) in self.blocks.iter().enumerate() {
            let nb = blk.dim;
            let mut pos = vec![usize::MAX; nb];
            for (j, fj) in &blk.terms {
                let mut rows: Vec<usize> = fj.iter().map(|e| e.0).collect();
                rows.sort_unstable();
                rows.dedup();
                if rows.is_empty() {
                    continue;
                }
                for (k, &r) in rows.iter().enumerate() {
                    pos[r] = k;
                }
                let mut p = DMatrix::<C64>::zeros(rows.len(), nb);
                for &(a, c, v) in fj {
                    let r = pos[a];
                    for q in 0..nb {
                        p[(r, q)] += v * sinv[b][(c, q)];
                    }
                }
                let g = x[b].select_columns(&rows) * p;
                for (i, fi) in &blk.terms {
                    let mut s = 0.0;
                    for &(a, c, v) in fi {
                        s += (v * g[(c, a)]).re;
                    }
                    m[(*i, *j)] += s;
                }
            }
        }
        let mt = m.transpose();
        (m + mt).scale(0.5)
    }
}

fn max_step(x: &DMatrix<C64>, dx: &DMatrix<C64>) -> Option<f64> {
    let ch = x.clone().cholesky()?;
    let l = ch.l();
    let y = l.solve_lower_triangular(dx)?;
    let z = l.solve_lower_triangular(&y.adjoint())?;
    let lmin = herm(&z).symmetric_eigenvalues().min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn factor(k: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = k.clone().cholesky() {
        return Some(c);
    }
    let scale = (0..k.nrows()).map(|i| k[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut delta = 1e-14 * scale;
    while delta < 1e-6 * scale {
        let mut kk = k.clone();
        for i in 0..kk.nrows() {
            kk[(i, i)] += delta;
        }
        if let Some(c) = kk.cholesky() {
            return Some(c);
        }
        delta *= 100.0;
    }
    None
}

#[derive(Clone)]
struct Point {
    z: DVector<f64>,
    v: DVector<f64>,
    x: Vec<DMatrix<C64>>,
    s: Vec<DMatrix<C64>>,
}

struct Direction {
    dz: DVector<f64>,
    dv: DVector<f64>,
    dx: Vec<DMatrix<C64>>,
    ds: Vec<DMatrix<C64>>,
}

pub(crate) fn solve(lmi: &Lmi, set: &Settings) -> Outcome {
    let n = lmi.n;
    let eq = match reduce_equalities(&lmi.eq_a, &lmi.eq_b, n) {
        Ok(e) => e,
        Err(y) => return Outcome::Inconsistent(y),
    };
    let total: usize = lmi.blocks.iter().map(|b| b.dim).sum();

    // Initial point.
    let mut pt = Point {
        z: DVector::zeros(n),
        v: DVector::zeros(eq.as_ref().map_or(0, |e| e.e.nrows())),
        x: Vec::new(),
        s: Vec::new(),
    };
    for blk in &lmi.blocks {
        let nb = blk.dim as f64;
        let mut xi: f64 = 10f64.max(nb.sqrt());
        let mut eta: f64 = 10f64.max(nb.sqrt()).max(blk.f0.norm());
        for (i, f) in &blk.terms {
            let fn_ = f.iter().map(|e| e.2.norm_sqr()).sum::<f64>().sqrt();
            xi = xi.max(nb * (1.0 + lmi.c[*i].abs()) / (1.0 + fn_));
            eta = eta.max(fn_);
        }
        pt.x.push(DMatrix::identity(blk.dim, blk.dim).scale(xi));
        pt.s.push(DMatrix::identity(blk.dim, blk.dim).scale(eta));
    }

    let c_norm = lmi.c.norm();
    let f0_norm = lmi.blocks.iter().map(|b| b.f0.norm_squared()).sum::<f64>().sqrt();
    let e_norm = eq.as_ref().map_or(0.0, |e| e.rhs.norm());

    let mut best: Option<(f64, IpmResult)> = None;
    let mut since_best = 0usize;
    let mut iterations = 0usize;

    loop {
        // Residuals and the reportable state at the current point.
        let ax = lmi.op(&pt.x);
        let mut rp = &lmi.c - &ax;
        if let Some(e) = &eq {
            rp -= e.e.transpose() * &pt.v;
        }
        let rd: Vec<DMatrix<C64>> =
            (0..lmi.blocks.len()).map(|b| &pt.s[b] - lmi.adj(b, &pt.z) + &lmi.blocks[b].f0).collect();
        let re = eq.as_ref().map(|e| &e.rhs - &e.e * &pt.z);
        let pobj = lmi.c.dot(&pt.z);
        let mut dobj: f64 = lmi.blocks.iter().zip(&pt.x).map(|(b, x)| re_trace_prod(&b.f0, x)).sum();
        if let Some(e) = &eq {
            dobj += e.rhs.dot(&pt.v);
        }
        let rd_norm = rd.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        let z_inf = (rd_norm / (1.0 + f0_norm)).max(re.as_ref().map_or(0.0, |r| r.norm() / (1.0 + e_norm)));
        let x_inf = rp.norm() / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / pobj.abs().max(1.0);
        let merit = gap.max(z_inf * 10.0).max(x_inf * 10.0);
        let improved = best.as_ref().map_or(true, |(m, _)| merit < *m);
        if improved {
            let v = eq.as_ref().map_or(DVector::zeros(lmi.eq_a.nrows()), |e| &e.back * &pt.v);
            best = Some((
                merit,
                IpmResult {
                    z: pt.z.clone(),
                    v,
                    x: pt.x.clone(),
                    pobj,
                    dobj,
                    z_infeas: z_inf,
                    x_infeas: x_inf,
                    iterations,
                },
            ));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if (gap <= set.gap_target && z_inf <= set.feas_target && x_inf <= set.feas_target)
            || iterations >= set.max_iters
            || since_best > 12
            || total == 0
        {
            break;
        }
        iterations += 1;

        // Factorizations.
        let mut sinv = Vec::with_capacity(pt.s.len());
        let mut ok = true;
        for s in &pt.s {
            match s.clone().cholesky() {
                Some(c) => sinv.push(herm(&c.inverse())),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let m = lmi.schur(&pt.x, &sinv);
        let k = match &eq {
            Some(e) => e.null.transpose() * &m * &e.null,
            None => m.clone(),
        };
        let chol = if k.nrows() == 0 { None } else { factor(&k) };
        if k.nrows() > 0 && chol.is_none() {
            break;
        }

        let mu = pt.x.iter().zip(&pt.s).map(|(x, s)| re_trace_prod(x, s)).sum::<f64>() / total as f64;

        let direction = |rc: &[DMatrix<C64>]| -> Direction {
            let w: Vec<DMatrix<C64>> = (0..rc.len()).map(|b| &rc[b] + &pt.x[b] * &rd[b] * &sinv[b]).collect();
            let h = lmi.op(&w) - &rp;
            let dz = match &eq {
                Some(e) => {
                    let re = re.as_ref().expect("equalities present");
                    let base = e.e.transpose() * re;
                    let t = &h - &m * &base;
                    let rhs = e.null.transpose() * t;
                    let dy = match &chol {
                        Some(c) => c.solve(&rhs),
                        None => DVector::zeros(0),
                    };
                    base + &e.null * dy
                }
                None => chol.as_ref().map_or(DVector::zeros(n), |c| c.solve(&h)),
            };
            let dv = match &eq {
                Some(e) => &e.e * (&m * &dz - &h),
                None => DVector::zeros(0),
            };
            let ds: Vec<DMatrix<C64>> = (0..rc.len()).map(|b| lmi.adj(b, &dz) - &rd[b]).collect();
            let dx: Vec<DMatrix<C64>> =
                (0..rc.len()).map(|b| herm(&(&rc[b] - &pt.x[b] * &ds[b] * &sinv[b]))).collect();
            Direction { dz, dv, dx, ds }
        };
        let steps = |d: &Direction| -> Option<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for b in 0..pt.x.len() {
                ap = ap.min(max_step(&pt.x[b], &d.dx[b])?);
                ad = ad.min(max_step(&pt.s[b], &d.ds[b])?);
            }
            Some((ap, ad))
        };

        // Predictor.
        let rc_aff: Vec<DMatrix<C64>> = pt.x.iter().map(|x| -x).collect();
        let da = direction(&rc_aff);
        let Some((ap, ad)) = steps(&da) else { break };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = (0..pt.x.len())
            .map(|b| re_trace_prod(&(&pt.x[b] + da.dx[b].scale(ap)), &(&pt.s[b] + da.ds[b].scale(ad))))
            .sum::<f64>()
            / total as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).max(0.0).powi(3).min(1.0) } else { 0.0 };

        // Corrector.
        let rc: Vec<DMatrix<C64>> = (0..pt.x.len())
            .map(|b| sinv[b].scale(sigma * mu) - &pt.x[b] - &da.dx[b] * &da.ds[b] * &sinv[b])
            .collect();
        let d = direction(&rc);
        let Some((ap, ad)) = steps(&d) else { break };
        let tau = 0.98;
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            break;
        }
        pt.z += d.dz.scale(ad);
        if pt.v.len() > 0 {
            pt.v += d.dv.scale(ap);
        }
        for b in 0..pt.x.len() {
            pt.x[b] = herm(&(&pt.x[b] + d.dx[b].scale(ap)));
            pt.s[b] = herm(&(&pt.s[b] + d.ds[b].scale(ad)));
        }
    }
    let (_, mut r) = best.expect("at least one iterate");
    r.iterations = iterations;
    Outcome::Done(r)
}
