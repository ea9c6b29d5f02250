//! Conic programs over Hermitian blocks and an interior-point solver for them.
//!
//! `solve` returns both a primal and a dual point together with their values,
//! so every optimum comes with a duality-gap certificate. `solve_feasibility`
//! decides nonemptiness of the constraint set through a phase-1 program and
//! returns a separating dual witness when the set is empty.

mod ipm;
mod program;

pub use program::{
    coords_to_herm, herm_basis, herm_coords, herm_to_coords, Cone, ConicProgram, ConstraintBlock, SparseHerm, Term,
    VarBlock,
};

use nalgebra::{DMatrix, DVector};

use crate::linalg::{hs_inner, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Which program the interior-point method runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// The program or its `dualize()`, whichever has fewer free coordinates.
    Auto,
    /// Exactly the program given.
    AsGiven,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Gap accepted as optimal, relative to max(1, |α|).
    pub gap_tol: f64,
    /// Relative feasibility residual accepted as optimal.
    pub feas_tol: f64,
    pub formulation: Formulation,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let max_iters = std::env::var("QSC_MAX_ITERS").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(200);
        SolverOptions { max_iters, gap_tol: 1e-7, feas_tol: 1e-8, formulation: Formulation::Auto }
    }
}

impl SolverOptions {
    pub fn as_given() -> Self {
        SolverOptions { formulation: Formulation::AsGiven, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Primal value α (the infimum).
    pub primal_value: f64,
    /// Dual value β.
    pub dual_value: f64,
    /// α − β.
    pub gap: f64,
    /// Primal point, one matrix per variable block.
    pub x: Vec<CMatrix>,
    /// Dual point, one matrix per constraint block. For `Infeasible` this is
    /// a Farkas certificate: Γ*(Y) = 0 and Σ Tr[Y_j H2_j] > 0.
    pub y: Vec<CMatrix>,
    /// Dual slack H1 − Γ*(Y), one matrix per variable block.
    pub var_duals: Vec<CMatrix>,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
}

/// Solve with default options.
pub fn solve(p: &ConicProgram) -> ConicSolution {
    solve_with(p, &SolverOptions::default())
}

pub fn solve_with(p: &ConicProgram, opts: &SolverOptions) -> ConicSolution {
    if opts.formulation == Formulation::AsGiven {
        return solve_direct(p, opts);
    }
    let d = p.dualize();
    if internal_size(&d) < internal_size(p) {
        let sd = solve_direct(&d, opts);
        if sd.status == SolveStatus::Optimal {
            return from_dual_solution(p, sd);
        }
        // Inconsistent equalities of `p` make its dual unbounded, which the
        // dual run cannot certify; the program as given can.
        let sp = solve_direct(p, opts);
        if sd.status == SolveStatus::Infeasible || sp.status != SolveStatus::NumericalFailure || sp.gap.abs() <= sd.gap.abs() {
            return sp;
        }
        return from_dual_solution(p, sd);
    }
    solve_direct(p, opts)
}

/// Coordinates left after eliminating equality rows.
fn internal_size(p: &ConicProgram) -> usize {
    let n: usize = p.vars.iter().map(|v| herm_coords(v.dim)).sum();
    let m: usize = p.constraints.iter().filter(|c| c.cone == Cone::Zero).map(|c| herm_coords(c.dim)).sum();
    n.saturating_sub(m)
}

/// Translate a solution of `p.dualize()` into one of `p`.
fn from_dual_solution(p: &ConicProgram, sd: ConicSolution) -> ConicSolution {
    let x: Vec<CMatrix> = sd.y.clone();
    let mut y = Vec::with_capacity(p.constraints.len());
    let mut k = 0;
    for c in &p.constraints {
        if c.cone == Cone::Free {
            y.push(CMatrix::zeros(c.dim, c.dim));
        } else {
            y.push(sd.x[k].clone());
            k += 1;
        }
    }
    let var_duals = var_duals(p, &y);
    ConicSolution {
        status: sd.status,
        primal_value: -sd.dual_value,
        dual_value: -sd.primal_value,
        gap: sd.gap,
        x,
        y,
        var_duals,
        primal_infeasibility: sd.dual_infeasibility,
        dual_infeasibility: sd.primal_infeasibility,
        iterations: sd.iterations,
    }
}

fn var_duals(p: &ConicProgram, y: &[CMatrix]) -> Vec<CMatrix> {
    let adj = p.adjoint_value(y);
    p.vars.iter().zip(adj).map(|(v, a)| &v.objective - &a).collect()
}

fn to_dmatrix(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.rows, m.cols, &m.data)
}

fn from_dmatrix(m: &DMatrix<C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

struct Layout {
    offsets: Vec<usize>,
    /// For each LMI block: Err(var) for a PSD variable, Ok(constraint) for a
    /// PSD constraint.
    blocks: Vec<Result<usize, usize>>,
    /// (constraint index, first equality row).
    eq_rows: Vec<(usize, usize)>,
}

fn assemble(p: &ConicProgram) -> (ipm::Lmi, Layout) {
    let offsets = p.var_offsets();
    let n = *offsets.last().expect("offsets end");
    let mut c = DVector::zeros(n);
    for (k, v) in p.vars.iter().enumerate() {
        let h = herm_to_coords(&v.objective);
        for (l, x) in h.iter().enumerate() {
            c[offsets[k] + l] = *x;
        }
    }
    let mut blocks = Vec::new();
    let mut layout_blocks = Vec::new();
    for (k, v) in p.vars.iter().enumerate() {
        if v.cone != Cone::Psd {
            continue;
        }
        let terms = (0..herm_coords(v.dim)).map(|l| (offsets[k] + l, herm_basis(v.dim, l).entries)).collect();
        blocks.push(ipm::Block { dim: v.dim, f0: DMatrix::zeros(v.dim, v.dim), terms });
        layout_blocks.push(Err(k));
    }
    let mut eq_rows = Vec::new();
    let mut m = 0;
    for (j, con) in p.constraints.iter().enumerate() {
        match con.cone {
            Cone::Psd => {
                let mut terms: Vec<(usize, ipm::Sparse)> = Vec::new();
                for t in &con.terms {
                    for (l, img) in t.images.iter().enumerate() {
                        if !img.entries.is_empty() {
                            terms.push((offsets[t.var] + l, img.entries.clone()));
                        }
                    }
                }
                blocks.push(ipm::Block { dim: con.dim, f0: to_dmatrix(&con.offset), terms });
                layout_blocks.push(Ok(j));
            }
            Cone::Zero => {
                eq_rows.push((j, m));
                m += herm_coords(con.dim);
            }
            Cone::Free => {}
        }
    }
    let mut eq_a = DMatrix::zeros(m, n);
    let mut eq_b = DVector::zeros(m);
    for &(j, row) in &eq_rows {
        let con = &p.constraints[j];
        for (l, x) in herm_to_coords(&con.offset).iter().enumerate() {
            eq_b[row + l] = *x;
        }
        for t in &con.terms {
            for (k, img) in t.images.iter().enumerate() {
                if img.entries.is_empty() {
                    continue;
                }
                let coords = herm_to_coords(&img.to_dense());
                for (l, x) in coords.iter().enumerate() {
                    eq_a[(row + l, offsets[t.var] + k)] += *x;
                }
            }
        }
    }
    (ipm::Lmi { n, c, blocks, eq_a, eq_b }, Layout { offsets, blocks: layout_blocks, eq_rows })
}

fn solve_direct(p: &ConicProgram, opts: &SolverOptions) -> ConicSolution {
    let (lmi, layout) = assemble(p);
    let settings = ipm::Settings {
        max_iters: opts.max_iters,
        gap_target: opts.gap_tol * 1e-3,
        feas_target: opts.feas_tol * 1e-3,
    };
    let zero_y = || -> Vec<CMatrix> { p.constraints.iter().map(|c| CMatrix::zeros(c.dim, c.dim)).collect() };
    match ipm::solve(&lmi, &settings) {
        ipm::Outcome::Inconsistent(yv) => {
            let mut y = zero_y();
            for &(j, row) in &layout.eq_rows {
                let d = p.constraints[j].dim;
                y[j] = coords_to_herm(d, &yv.as_slice()[row..row + herm_coords(d)]);
            }
            let x = p.vars.iter().map(|v| CMatrix::zeros(v.dim, v.dim)).collect();
            ConicSolution {
                status: SolveStatus::Infeasible,
                primal_value: f64::INFINITY,
                dual_value: f64::INFINITY,
                gap: f64::NAN,
                var_duals: var_duals(p, &y),
                x,
                y,
                primal_infeasibility: f64::INFINITY,
                dual_infeasibility: 0.0,
                iterations: 0,
            }
        }
        ipm::Outcome::Done(r) => {
            let x: Vec<CMatrix> = p
                .vars
                .iter()
                .enumerate()
                .map(|(k, v)| coords_to_herm(v.dim, &r.z.as_slice()[layout.offsets[k]..layout.offsets[k + 1]]))
                .collect();
            let mut y = zero_y();
            for (b, which) in layout.blocks.iter().enumerate() {
                if let Ok(j) = which {
                    y[*j] = from_dmatrix(&r.x[b]);
                }
            }
            for &(j, row) in &layout.eq_rows {
                let d = p.constraints[j].dim;
                y[j] = coords_to_herm(d, &r.v.as_slice()[row..row + herm_coords(d)]);
            }
            let primal_value = r.pobj + p.constant;
            let dual_value = r.dobj + p.constant;
            let gap = primal_value - dual_value;
            let ok = gap.abs() <= opts.gap_tol * primal_value.abs().max(1.0)
                && r.z_infeas <= opts.feas_tol
                && r.x_infeas <= opts.feas_tol;
            ConicSolution {
                status: if ok { SolveStatus::Optimal } else { SolveStatus::NumericalFailure },
                primal_value,
                dual_value,
                gap,
                var_duals: var_duals(p, &y),
                x,
                y,
                primal_infeasibility: r.z_infeas,
                dual_infeasibility: r.x_infeas,
                iterations: r.iterations,
            }
        }
    }
}

/// Outcome of a phase-1 feasibility test.
#[derive(Clone, Debug)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// Optimal phase-1 slack t*: the least t with X_k + tI ⪰ 0 and every PSD
    /// constraint relaxed by tI. Infinite when the equalities are inconsistent.
    pub slack: f64,
    /// Phase-1 primal point restricted to the original variables.
    pub point: Vec<CMatrix>,
    /// Separating witness when infeasible: multipliers Y_j (one per
    /// constraint) and W_k (one per PSD variable, zero for free ones) with
    /// Γ*(Y) + W = 0, Y_j ⪰ 0 on PSD constraints, W_k ⪰ 0, and
    /// Σ Tr[Y_j H2_j] > 0.
    pub witness: Option<FeasibilityWitness>,
    pub status: SolveStatus,
}

#[derive(Clone, Debug)]
pub struct FeasibilityWitness {
    pub y: Vec<CMatrix>,
    pub w: Vec<CMatrix>,
    /// Σ Tr[Y_j H2_j].
    pub value: f64,
}

/// Phase-1 test of {X : Γ(X) − H2 ∈ K2, X ∈ K1}. The objective of `p` is
/// ignored. Feasible iff t* ≤ `tol`.
pub fn solve_feasibility(p: &ConicProgram, tol: f64) -> FeasibilityResult {
    let mut q = ConicProgram::new();
    for v in &p.vars {
        q.add_var(v.dim, Cone::Free);
    }
    let t = q.add_var(1, Cone::Free);
    q.set_objective(t, CMatrix::identity(1));
    let mut map = vec![None; p.constraints.len()];
    for (j, c) in p.constraints.iter().enumerate() {
        match c.cone {
            Cone::Psd => {
                let mut terms = c.terms.clone();
                terms.push(Term::scalar_times(t, &CMatrix::identity(c.dim)));
                map[j] = Some(q.add_constraint(Cone::Psd, terms, c.offset.clone()));
            }
            Cone::Zero => map[j] = Some(q.add_constraint(Cone::Zero, c.terms.clone(), c.offset.clone())),
            Cone::Free => {}
        }
    }
    let mut wmap = vec![None; p.vars.len()];
    for (k, v) in p.vars.iter().enumerate() {
        if v.cone == Cone::Psd {
            let terms = vec![Term::identity(k, v.dim), Term::scalar_times(t, &CMatrix::identity(v.dim))];
            wmap[k] = Some(q.add_constraint(Cone::Psd, terms, CMatrix::zeros(v.dim, v.dim)));
        }
    }
    // t ≥ −1 keeps the phase-1 objective bounded.
    q.add_constraint(Cone::Psd, vec![Term::identity(t, 1)], CMatrix::identity(1).scale(-1.0));

    let sol = solve(&q);
    let pick = |j: Option<usize>, d: usize| j.map_or_else(|| CMatrix::zeros(d, d), |j| sol.y[j].clone());
    let y: Vec<CMatrix> = p.constraints.iter().zip(&map).map(|(c, j)| pick(*j, c.dim)).collect();
    let w: Vec<CMatrix> = p.vars.iter().zip(&wmap).map(|(v, j)| pick(*j, v.dim)).collect();
    let value: f64 = p.constraints.iter().zip(&y).map(|(c, yj)| hs_inner(yj, &c.offset).re).sum();
    let point = sol.x[..p.vars.len()].to_vec();
    if sol.status == SolveStatus::Infeasible {
        return FeasibilityResult {
            feasible: false,
            slack: f64::INFINITY,
            point,
            witness: Some(FeasibilityWitness { y, w, value }),
            status: SolveStatus::Infeasible,
        };
    }
    let slack = sol.primal_value;
    let feasible = slack <= tol;
    FeasibilityResult {
        feasible,
        slack,
        point,
        witness: if feasible { None } else { Some(FeasibilityWitness { y, w, value }) },
        status: sol.status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, lambda_min};

    fn lambda_max_program(rho: &CMatrix) -> ConicProgram {
        let d = rho.rows;
        let mut p = ConicProgram::new();
        let t = p.add_var(1, Cone::Free);
        p.set_objective(t, CMatrix::identity(1));
        p.add_constraint(Cone::Psd, vec![Term::scalar_times(t, &CMatrix::identity(d))], rho.clone());
        p
    }

    #[test]
    fn lambda_max_program_value() {
        let rho = CMatrix::diag(&[0.75, 0.25]);
        let p = lambda_max_program(&rho);
        for opts in [SolverOptions::default(), SolverOptions::as_given()] {
            let s = solve_with(&p, &opts);
            assert_eq!(s.status, SolveStatus::Optimal);
            assert!((s.primal_value - 0.75).abs() < 1e-8, "{}", s.primal_value);
            assert!((s.dual_value - 0.75).abs() < 1e-8);
            assert!((s.y[0].trace().re - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn dualized_lambda_max_is_trace_one_program() {
        let rho = CMatrix::diag(&[0.75, 0.25]);
        let d = lambda_max_program(&rho).dualize();
        assert_eq!(d.vars.len(), 1);
        assert_eq!(d.vars[0].cone, Cone::Psd);
        assert_eq!(d.constraints[0].cone, Cone::Zero);
        let s = solve_with(&d, &SolverOptions::as_given());
        assert!((s.primal_value + 0.75).abs() < 1e-8);
    }

    #[test]
    fn trace_above_entangled_projector() {
        let phi = CMatrix::max_entangled(2).scale(0.5);
        let mut p = ConicProgram::new();
        let x = p.add_var(4, Cone::Free);
        p.set_objective(x, CMatrix::identity(4));
        p.add_constraint(Cone::Psd, vec![Term::identity(x, 4)], phi.clone());
        for opts in [SolverOptions::default(), SolverOptions::as_given()] {
            let s = solve_with(&p, &opts);
            assert_eq!(s.status, SolveStatus::Optimal);
            assert!((s.primal_value - 1.0).abs() < 1e-8);
            assert!(s.x[0].distance(&phi) < 1e-6);
        }
    }

    #[test]
    fn complex_entries_are_handled() {
        // λ_max of a Hermitian matrix with imaginary off-diagonals.
        let m = CMatrix::from_vec(2, 2, vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)]);
        let s = solve(&lambda_max_program(&m));
        assert!((s.primal_value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn conditional_min_entropy_program_and_dual_agree() {
        let mut rng = crate::random::rng_from_seed(11);
        let rho = crate::random::random_density(4, 4, &mut rng);
        let mut p = ConicProgram::new();
        let s = p.add_var(2, Cone::Free);
        p.set_objective(s, CMatrix::identity(2));
        let t = Term::from_map(s, 2, |m| kron(m, &CMatrix::identity(2)));
        p.add_constraint(Cone::Psd, vec![t], rho.clone());
        let a = solve_with(&p, &SolverOptions::as_given());
        let b = solve_with(&p.dualize(), &SolverOptions::as_given());
        assert_eq!(a.status, SolveStatus::Optimal);
        assert_eq!(b.status, SolveStatus::Optimal);
        assert!((a.primal_value + b.primal_value).abs() < 1e-7);
        assert!(a.gap >= -1e-9);
        // complementary slackness on the PSD constraint block
        let slack = &p.constraint_value(0, &a.x) - &rho;
        assert!(hs_inner(&slack, &a.y[0]).re.abs() < 1e-6);
        assert!(lambda_min(&a.y[0]) > -1e-8);
    }

    #[test]
    fn feasibility_examples() {
        let mut p = ConicProgram::new();
        let x = p.add_var(2, Cone::Psd);
        let tr = Term::from_map(x, 2, |m| CMatrix::identity(1).scale(m.trace().re));
        p.add_constraint(Cone::Zero, vec![tr.clone()], CMatrix::identity(1));
        let r = solve_feasibility(&p, 1e-8);
        assert!(r.feasible);

        let mut q = ConicProgram::new();
        let x = q.add_var(2, Cone::Free);
        q.add_constraint(Cone::Psd, vec![Term::identity(x, 2)], CMatrix::identity(2));
        q.add_constraint(Cone::Zero, vec![tr], CMatrix::zeros(1, 1));
        let r = solve_feasibility(&q, 1e-8);
        assert!(!r.feasible);
        let w = r.witness.expect("witness");
        assert!(w.value > 1e-3);
        // Γ*(Y) + W = 0 with W = 0 for the free variable
        let adj = q.adjoint_value(&w.y);
        assert!(adj[0].frobenius_norm() < 1e-6);
        assert!(lambda_min(&w.y[0]) > -1e-8);
    }

    #[test]
    fn inconsistent_equalities_give_farkas_certificate() {
        let mut p = ConicProgram::new();
        let x = p.add_var(1, Cone::Free);
        p.add_constraint(Cone::Zero, vec![Term::identity(x, 1)], CMatrix::identity(1));
        p.add_constraint(Cone::Zero, vec![Term::identity(x, 1)], CMatrix::zeros(1, 1));
        let s = solve_with(&p, &SolverOptions::as_given());
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(p.adjoint_value(&s.y)[0].frobenius_norm() < 1e-9);
        let v: f64 = p.constraints.iter().zip(&s.y).map(|(c, y)| hs_inner(y, &c.offset).re).sum();
        assert!(v > 0.1);
    }

    #[test]
    fn zero_program() {
        let mut p = ConicProgram::new();
        let x = p.add_var(2, Cone::Psd);
        p.add_constraint(Cone::Zero, vec![Term::identity(x, 2)], CMatrix::zeros(2, 2));
        let s = solve(&p);
        assert!(s.primal_value.abs() < 1e-8 && s.dual_value.abs() < 1e-8);
    }
}
