//! Embedded primal-dual interior-point method for small dense SDPs.
//!
//! The problem is lowered to block-diagonal conic form
//!
//! ```text
//!     maximize  b'y   subject to   S(y) = C - sum_i y_i A_i  >= 0
//! ```
//!
//! with one dense block per matrix inequality and matrix variable, and one
//! diagonal block collecting all scalar constraints. The solver runs the
//! standard predictor-corrector path-following scheme on the primal-dual
//! pair (HKM search direction, Mehrotra centering), with per-variable and
//! per-row equilibration of the data up front. Problems in this crate are
//! tiny — block sizes around a dozen, a few hundred scalar variables — so
//! all linear algebra is dense.

use nalgebra::{DMatrix, DVector};

use super::{SdpProblem, SdpSolution, SolveStatus, SolverBackend};
use crate::multipliers::Sense;

/// Dense inequality block: `S_b(y) = C_b - sum_i y_i A_{i,b}`.
pub(crate) struct DenseBlock {
    pub dim: usize,
    pub c: DMatrix<f64>,
    /// Per-variable coefficient, `None` when the variable does not appear.
    pub a: Vec<Option<DMatrix<f64>>>,
}

/// Diagonal block holding every scalar inequality as one row
/// `s_row = c_row - sum_i y_i a_{i,row} >= 0`.
pub(crate) struct DiagBlock {
    pub c: DVector<f64>,
    /// Per-variable sparse column: (row, coefficient).
    pub cols: Vec<Vec<(usize, f64)>>,
    /// Per-row sparse row: (variable, coefficient).
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl DiagBlock {
    pub fn len(&self) -> usize {
        self.c.len()
    }
}

pub(crate) struct ConicData {
    pub n_vars: usize,
    /// Objective to maximize.
    pub b: DVector<f64>,
    pub dense: Vec<DenseBlock>,
    pub diag: DiagBlock,
}

/// Lowers a problem into block conic form: one dense block per LMI
/// (`S = -expr`), one per PSD-constrained matrix variable (`S = P`), and
/// diagonal rows for the scalar constraints (equalities become two rows).
pub(crate) fn lower(p: &SdpProblem) -> ConicData {
    let n_vars = p.n_scalars();
    let mut b = DVector::zeros(n_vars);
    for &(j, c) in &p.objective {
        b[j] += c;
    }

    let mut dense = Vec::new();
    for lmi in &p.lmis {
        let mut a: Vec<Option<DMatrix<f64>>> = vec![None; n_vars];
        for (j, k) in &lmi.terms {
            let entry = a[*j].get_or_insert_with(|| DMatrix::zeros(lmi.dim, lmi.dim));
            *entry += k;
        }
        dense.push(DenseBlock {
            dim: lmi.dim,
            c: -&lmi.constant,
            a,
        });
    }
    for (idx, info) in p.psd_vars().iter().enumerate() {
        if !info.require_psd {
            continue;
        }
        let dim = info.dim;
        let mut a: Vec<Option<DMatrix<f64>>> = vec![None; n_vars];
        let mut var = info.vars.start;
        for i in 0..dim {
            for j in i..dim {
                let mut e = DMatrix::zeros(dim, dim);
                e[(i, j)] = -1.0;
                e[(j, i)] = -1.0;
                a[var] = Some(e);
                var += 1;
            }
        }
        debug_assert_eq!(var, p.psd_vars()[idx].vars.end);
        dense.push(DenseBlock {
            dim,
            c: DMatrix::zeros(dim, dim),
            a,
        });
    }

    let mut c_rows: Vec<f64> = Vec::new();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_vars];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let push_row = |c_rows: &mut Vec<f64>,
                    cols: &mut Vec<Vec<(usize, f64)>>,
                    rows: &mut Vec<Vec<(usize, f64)>>,
                    terms: &[(usize, f64)],
                    rhs: f64,
                    flip: bool| {
        let row = c_rows.len();
        let sign = if flip { -1.0 } else { 1.0 };
        c_rows.push(sign * rhs);
        let mut r = Vec::with_capacity(terms.len());
        for &(j, coef) in terms {
            cols[j].push((row, sign * coef));
            r.push((j, sign * coef));
        }
        rows.push(r);
    };
    for con in &p.linear {
        match con.sense {
            // s = rhs - a'y >= 0
            Sense::Le => push_row(
                &mut c_rows,
                &mut cols,
                &mut rows,
                &con.terms,
                con.rhs,
                false,
            ),
            // s = a'y - rhs >= 0
            Sense::Ge => push_row(&mut c_rows, &mut cols, &mut rows, &con.terms, con.rhs, true),
            Sense::Eq => {
                push_row(
                    &mut c_rows,
                    &mut cols,
                    &mut rows,
                    &con.terms,
                    con.rhs,
                    false,
                );
                push_row(&mut c_rows, &mut cols, &mut rows, &con.terms, con.rhs, true);
            }
        }
    }

    ConicData {
        n_vars,
        b,
        dense,
        diag: DiagBlock {
            c: DVector::from_vec(c_rows),
            cols,
            rows,
        },
    }
}

/// Block-diagonal symmetric value mirroring the conic structure.
#[derive(Clone)]
struct BlockSym {
    dense: Vec<DMatrix<f64>>,
    diag: DVector<f64>,
}

impl BlockSym {
    fn scaled_identity(data: &ConicData, s: f64) -> Self {
        BlockSym {
            dense: data
                .dense
                .iter()
                .map(|b| DMatrix::identity(b.dim, b.dim) * s)
                .collect(),
            diag: DVector::from_element(data.diag.len(), s),
        }
    }

    fn dot(&self, other: &BlockSym) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.dense.iter().zip(&other.dense) {
            acc += a.dot(b);
        }
        acc + self.diag.dot(&other.diag)
    }

    fn axpy(&mut self, alpha: f64, other: &BlockSym) {
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            *a += b * alpha;
        }
        self.diag.axpy(alpha, &other.diag, 1.0);
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Cholesky factors of a block value, used for inverse actions and steps.
struct BlockChol {
    dense: Vec<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    diag: DVector<f64>,
}

fn factor(v: &BlockSym) -> Option<BlockChol> {
    let mut dense = Vec::with_capacity(v.dense.len());
    for m in &v.dense {
        dense.push(nalgebra::Cholesky::new(m.clone())?);
    }
    if v.diag.iter().any(|&x| x <= 0.0) {
        return None;
    }
    Some(BlockChol {
        dense,
        diag: v.diag.clone(),
    })
}

/// Largest step `alpha` keeping `v + alpha dv` in the cone, given factors of
/// `v`. Returns `f64::INFINITY` when unconstrained.
fn max_step(chol: &BlockChol, dv: &BlockSym) -> f64 {
    let mut alpha = f64::INFINITY;
    for (f, d) in chol.dense.iter().zip(&dv.dense) {
        if d.nrows() == 0 {
            continue;
        }
        let l = f.l();
        let t = l
            .solve_lower_triangular(d)
            .expect("Cholesky factor is nonsingular");
        let g = l
            .solve_lower_triangular(&t.transpose())
            .expect("Cholesky factor is nonsingular");
        let g = (&g + g.transpose()) * 0.5;
        let min_eig = g
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-14 {
            alpha = alpha.min(-1.0 / min_eig);
        }
    }
    for (s, ds) in chol.diag.iter().zip(dv.diag.iter()) {
        if *ds < 0.0 {
            alpha = alpha.min(-s / ds);
        }
    }
    alpha
}

/// Interior-point solver parameters. `Default` reads the
/// `LURYE_SOLVER_VERBOSE` environment variable for iteration logging.
///
/// The acceptance thresholds match the trust levels the engine applies on
/// top (`GAP_TRUST`, `PRIMAL_RESIDUAL_TRUST`): an exit iterate is optimal
/// when its relative gap clears `accept_gap` and both feasibility residuals
/// clear `accept_feas`.
#[derive(Debug, Clone)]
pub struct InteriorPoint {
    pub max_iters: usize,
    /// Target relative duality gap and feasibility residuals.
    pub tol: f64,
    /// Duality-gap level still accepted as optimal at exit.
    pub accept_gap: f64,
    /// Residual level still accepted as optimal at exit.
    pub accept_feas: f64,
    pub step_fraction: f64,
    pub verbose: bool,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self {
            max_iters: 120,
            tol: 1e-9,
            accept_gap: super::GAP_TRUST,
            accept_feas: super::PRIMAL_RESIDUAL_TRUST,
            step_fraction: 0.98,
            verbose: std::env::var("LURYE_SOLVER_VERBOSE").is_ok_and(|v| v != "0"),
        }
    }
}

struct Equilibration {
    /// Per-variable scale: `y_original = d * y_scaled`.
    d: Vec<f64>,
}

fn equilibrate(data: &mut ConicData) -> Equilibration {
    let n = data.n_vars;
    let mut d = vec![1.0; n];
    for i in 0..n {
        let mut m: f64 = 0.0;
        for block in &data.dense {
            if let Some(a) = &block.a[i] {
                m = m.max(a.amax());
            }
        }
        for &(_, c) in &data.diag.cols[i] {
            m = m.max(c.abs());
        }
        if m > 0.0 {
            d[i] = 1.0 / m;
        }
    }
    for (i, &di) in d.iter().enumerate() {
        if di != 1.0 {
            for block in &mut data.dense {
                if let Some(a) = &mut block.a[i] {
                    *a *= di;
                }
            }
            for entry in &mut data.diag.cols[i] {
                entry.1 *= di;
            }
            data.b[i] *= di;
        }
    }
    for rows in &mut data.diag.rows {
        for entry in rows.iter_mut() {
            entry.1 *= d[entry.0];
        }
    }
    // per-row scaling of the diagonal block
    let nrows = data.diag.len();
    let mut row_scale = vec![1.0; nrows];
    for row in 0..nrows {
        let mut m = data.diag.c[row].abs();
        for &(_, c) in &data.diag.rows[row] {
            m = m.max(c.abs());
        }
        if m > 0.0 {
            row_scale[row] = 1.0 / m;
        }
    }
    for row in 0..nrows {
        let s = row_scale[row];
        if s != 1.0 {
            data.diag.c[row] *= s;
            for entry in &mut data.diag.rows[row] {
                entry.1 *= s;
            }
        }
    }
    for cols in &mut data.diag.cols {
        for entry in cols.iter_mut() {
            entry.1 *= row_scale[entry.0];
        }
    }
    // dense block scaling normalizes the constant part
    for block in &mut data.dense {
        let m = block.c.amax();
        if m > 1.0 {
            block.c /= m;
            for a in block.a.iter_mut().flatten() {
                *a /= m;
            }
        }
    }
    Equilibration { d }
}

impl ConicData {
    fn barrier_dim(&self) -> f64 {
        (self.dense.iter().map(|b| b.dim).sum::<usize>() + self.diag.len()) as f64
    }

    /// `A(V)_i = <A_i, V>` for a symmetric block value.
    fn apply_a(&self, v: &BlockSym) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_vars);
        for (block, vb) in self.dense.iter().zip(&v.dense) {
            for (i, a) in block.a.iter().enumerate() {
                if let Some(a) = a {
                    out[i] += a.dot(vb);
                }
            }
        }
        for (i, col) in self.diag.cols.iter().enumerate() {
            for &(row, c) in col {
                out[i] += c * v.diag[row];
            }
        }
        out
    }

    /// `A_i` contracted against a generally nonsymmetric block value:
    /// `out_i = tr(A_i U)`; since every `A_i` is symmetric this equals
    /// `<A_i, U^T>`.
    fn apply_a_general(&self, u_dense: &[DMatrix<f64>], u_diag: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_vars);
        for (block, ub) in self.dense.iter().zip(u_dense) {
            let ut = ub.transpose();
            for (i, a) in block.a.iter().enumerate() {
                if let Some(a) = a {
                    out[i] += a.dot(&ut);
                }
            }
        }
        for (i, col) in self.diag.cols.iter().enumerate() {
            for &(row, c) in col {
                out[i] += c * u_diag[row];
            }
        }
        out
    }

    /// `A^T(y) = sum_i y_i A_i`.
    fn apply_at(&self, y: &DVector<f64>) -> BlockSym {
        let mut out = BlockSym {
            dense: self
                .dense
                .iter()
                .map(|b| DMatrix::zeros(b.dim, b.dim))
                .collect(),
            diag: DVector::zeros(self.diag.len()),
        };
        for (block, ob) in self.dense.iter().zip(&mut out.dense) {
            for (i, a) in block.a.iter().enumerate() {
                if let Some(a) = a {
                    if y[i] != 0.0 {
                        *ob += a * y[i];
                    }
                }
            }
        }
        for (i, col) in self.diag.cols.iter().enumerate() {
            if y[i] != 0.0 {
                for &(row, c) in col {
                    out.diag[row] += c * y[i];
                }
            }
        }
        out
    }

    fn c_value(&self) -> BlockSym {
        BlockSym {
            dense: self.dense.iter().map(|b| b.c.clone()).collect(),
            diag: self.diag.c.clone(),
        }
    }

    fn a_frob_norm(&self, i: usize) -> f64 {
        let mut acc = 0.0;
        for block in &self.dense {
            if let Some(a) = &block.a[i] {
                acc += a.norm_squared();
            }
        }
        for &(_, c) in &self.diag.cols[i] {
            acc += c * c;
        }
        acc.sqrt()
    }
}

impl SolverBackend for InteriorPoint {
    fn name(&self) -> &str {
        "interior-point"
    }

    fn solve_standard_form(&self, problem: &SdpProblem) -> SdpSolution {
        let mut data = lower(problem);
        let n = data.n_vars;
        if n == 0 {
            // constant problem: check the constant blocks
            let c = data.c_value();
            let feasible = c.dense.iter().all(|m| {
                m.nrows() == 0
                    || m.clone()
                        .symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .all(|&l| l >= -1e-12)
            }) && c.diag.iter().all(|&x| x >= -1e-12);
            return SdpSolution {
                status: if feasible {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Infeasible
                },
                values: Vec::new(),
                objective_value: 0.0,
                duality_gap: 0.0,
                primal_residual: 0.0,
                dual_residual: 0.0,
                iterations: 0,
            };
        }
        if data.dense.iter().all(|b| b.dim == 0) && data.diag.len() == 0 {
            // unconstrained scalars: bounded only for a zero objective
            let trivial = data.b.iter().all(|&c| c == 0.0);
            return SdpSolution {
                status: if trivial {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::NumericalTrouble
                },
                values: vec![0.0; n],
                objective_value: 0.0,
                duality_gap: 0.0,
                primal_residual: 0.0,
                dual_residual: 0.0,
                iterations: 0,
            };
        }

        let eq = equilibrate(&mut data);
        let nu = data.barrier_dim();
        let c = data.c_value();
        let c_norm = c.norm();
        let b_norm = data.b.norm();

        // SDPT3-style initial scales
        let mut xi_p: f64 = 10.0_f64.max(nu.sqrt());
        let mut xi_d: f64 = 10.0_f64.max(nu.sqrt()).max(c_norm);
        for i in 0..n {
            let an = data.a_frob_norm(i);
            xi_p = xi_p.max(nu * (1.0 + data.b[i].abs()) / (1.0 + an));
            xi_d = xi_d.max(an);
        }

        let mut x = BlockSym::scaled_identity(&data, xi_p);
        let mut s = BlockSym::scaled_identity(&data, xi_d);
        let mut y = DVector::<f64>::zeros(n);

        let mut best: Option<(f64, DVector<f64>, f64, f64, f64, f64)> = None;
        let mut iterations = 0;
        let mut stall = 0usize;
        let mut prev_merit = f64::INFINITY;

        for iter in 0..self.max_iters {
            iterations = iter;
            // residuals
            let ax = data.apply_a(&x);
            let rp = &data.b - &ax;
            let aty = data.apply_at(&y);
            let mut rd = c.clone();
            rd.axpy(-1.0, &aty);
            rd.axpy(-1.0, &s);
            let mu = x.dot(&s) / nu;

            let pobj = c.dot(&x);
            let dobj = data.b.dot(&y);
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            let pinf = rp.norm() / (1.0 + b_norm);
            let dinf = rd.norm() / (1.0 + c_norm);
            // merit normalized by the acceptance thresholds
            let merit = (gap / self.accept_gap)
                .max(pinf / self.accept_feas)
                .max(dinf / self.accept_feas);

            if self.verbose {
                eprintln!(
                    "ipm iter {iter:3}  mu {mu:9.2e}  gap {gap:9.2e}  pinf {pinf:9.2e}  dinf {dinf:9.2e}"
                );
            }

            if best.as_ref().is_none_or(|(m, ..)| merit < *m) {
                best = Some((merit, y.clone(), dobj, gap, pinf, dinf));
            }
            if gap <= self.tol && pinf <= self.tol && dinf <= self.tol {
                break;
            }
            if merit > 0.9 * prev_merit {
                stall += 1;
                if stall > 12 {
                    break;
                }
            } else {
                stall = 0;
            }
            prev_merit = merit;

            let Some(s_chol) = factor(&s) else { break };
            let Some(x_chol) = factor(&x) else { break };

            // S^-1 and shared pieces
            let s_inv = BlockSym {
                dense: s_chol.dense.iter().map(|f| f.inverse()).collect(),
                diag: s_chol.diag.map(|v| 1.0 / v),
            };

            // Schur complement M_ij = tr(A_i X A_j S^-1)
            let mut schur = DMatrix::<f64>::zeros(n, n);
            for (bi, block) in data.dense.iter().enumerate() {
                let xb = &x.dense[bi];
                for (j, aj) in block.a.iter().enumerate() {
                    let Some(aj) = aj else { continue };
                    // Wt_j = (S^-1 A_j) X; tr(A_i X A_j S^-1) = <A_i, Wt_j>
                    let t = s_chol.dense[bi].solve(aj);
                    let wt = &t * xb;
                    for (i, ai) in block.a.iter().enumerate() {
                        if let Some(ai) = ai {
                            schur[(i, j)] += ai.dot(&wt);
                        }
                    }
                }
            }
            for (j, col) in data.diag.cols.iter().enumerate() {
                for &(row, aj) in col {
                    let f = aj * x.diag[row] * s_inv.diag[row];
                    for &(i, ai) in &data.diag.rows[row] {
                        schur[(i, j)] += ai * f;
                    }
                }
            }

            let lu = schur.clone().lu();

            let solve_schur = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
                if let Some(mut sol) = lu.solve(rhs) {
                    if sol.iter().all(|v| v.is_finite()) {
                        // iterative refinement, kept only when it helps
                        let resid = rhs - &schur * &sol;
                        if let Some(corr) = lu.solve(&resid) {
                            if corr.iter().all(|v| v.is_finite()) {
                                let cand = &sol + &corr;
                                if (rhs - &schur * &cand).norm() < resid.norm() {
                                    sol = cand;
                                }
                            }
                        }
                        return Some(sol);
                    }
                }
                // regularized retry
                let scale = schur.amax().max(1.0);
                let mut reg = schur.clone();
                for i in 0..n {
                    reg[(i, i)] += 1e-12 * scale;
                }
                let sol = reg.lu().solve(rhs)?;
                sol.iter().all(|v| v.is_finite()).then_some(sol)
            };

            // common rhs piece: A(X Rd S^-1)
            let xrd_dense: Vec<DMatrix<f64>> = data
                .dense
                .iter()
                .enumerate()
                .map(|(bi, _)| {
                    let z = &x.dense[bi] * &rd.dense[bi];
                    s_chol.dense[bi].solve(&z.transpose()).transpose()
                })
                .collect();
            let xrd_diag = DVector::from_fn(data.diag.len(), |r, _| {
                x.diag[r] * rd.diag[r] * s_inv.diag[r]
            });
            let a_xrd = data.apply_a_general(&xrd_dense, &xrd_diag);
            let a_sinv = data.apply_a(&s_inv);

            // predictor (affine direction, sigma = 0)
            let rhs_aff = &data.b + &a_xrd;
            let Some(dy_aff) = solve_schur(&rhs_aff) else {
                break;
            };
            let mut ds_aff = rd.clone();
            ds_aff.axpy(-1.0, &data.apply_at(&dy_aff));
            // dX_aff = -X - (X dS_aff) S^-1, symmetrized
            let mut dx_aff = BlockSym {
                dense: Vec::with_capacity(data.dense.len()),
                diag: DVector::zeros(data.diag.len()),
            };
            for bi in 0..data.dense.len() {
                let z = &x.dense[bi] * &ds_aff.dense[bi];
                let zs = s_chol.dense[bi].solve(&z.transpose()).transpose();
                let m = -&x.dense[bi] - zs;
                dx_aff.dense.push((&m + m.transpose()) * 0.5);
            }
            for r in 0..data.diag.len() {
                dx_aff.diag[r] = -x.diag[r] - x.diag[r] * ds_aff.diag[r] * s_inv.diag[r];
            }

            let ap_aff = self.step_fraction * max_step(&x_chol, &dx_aff);
            let ad_aff = self.step_fraction * max_step(&s_chol, &ds_aff);
            let ap_aff = ap_aff.min(1.0);
            let ad_aff = ad_aff.min(1.0);
            let mut x_trial = x.clone();
            x_trial.axpy(ap_aff, &dx_aff);
            let mut s_trial = s.clone();
            s_trial.axpy(ad_aff, &ds_aff);
            let mu_aff = x_trial.dot(&s_trial) / nu;
            let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 0.999);

            // corrector
            let corr_dense: Vec<DMatrix<f64>> = (0..data.dense.len())
                .map(|bi| &dx_aff.dense[bi] * &ds_aff.dense[bi])
                .collect();
            let corr_diag =
                DVector::from_fn(data.diag.len(), |r, _| dx_aff.diag[r] * ds_aff.diag[r]);
            let corr_sinv_dense: Vec<DMatrix<f64>> = (0..data.dense.len())
                .map(|bi| {
                    s_chol.dense[bi]
                        .solve(&corr_dense[bi].transpose())
                        .transpose()
                })
                .collect();
            let corr_sinv_diag =
                DVector::from_fn(data.diag.len(), |r, _| corr_diag[r] * s_inv.diag[r]);
            let a_corr = data.apply_a_general(&corr_sinv_dense, &corr_sinv_diag);

            let mut rhs = &data.b + &a_xrd + &a_corr;
            rhs.axpy(-sigma * mu, &a_sinv, 1.0);
            let Some(dy) = solve_schur(&rhs) else { break };
            let mut ds = rd.clone();
            ds.axpy(-1.0, &data.apply_at(&dy));
            let mut dx = BlockSym {
                dense: Vec::with_capacity(data.dense.len()),
                diag: DVector::zeros(data.diag.len()),
            };
            for bi in 0..data.dense.len() {
                let z = &x.dense[bi] * &ds.dense[bi] + &corr_dense[bi];
                let zs = s_chol.dense[bi].solve(&z.transpose()).transpose();
                let m = &s_inv.dense[bi] * (sigma * mu) - &x.dense[bi] - zs;
                dx.dense.push((&m + m.transpose()) * 0.5);
            }
            for r in 0..data.diag.len() {
                dx.diag[r] = sigma * mu * s_inv.diag[r]
                    - x.diag[r]
                    - (x.diag[r] * ds.diag[r] + corr_diag[r]) * s_inv.diag[r];
            }

            let ap = (self.step_fraction * max_step(&x_chol, &dx)).min(1.0);
            let ad = (self.step_fraction * max_step(&s_chol, &ds)).min(1.0);
            if ap < 1e-10 && ad < 1e-10 {
                break;
            }
            x.axpy(ap, &dx);
            y.axpy(ad, &dy, 1.0);
            s.axpy(ad, &ds);
        }

        let (merit, y_best, dobj, gap, pinf, dinf) =
            best.unwrap_or((f64::INFINITY, y, 0.0, 1.0, 1.0, 1.0));
        let values: Vec<f64> = (0..n).map(|i| eq.d[i] * y_best[i]).collect();
        let status = if merit <= 1.0 {
            SolveStatus::Optimal
        } else {
            SolveStatus::NumericalTrouble
        };
        SdpSolution {
            status,
            values,
            objective_value: dobj,
            duality_gap: gap,
            primal_residual: pinf,
            dual_residual: dinf,
            iterations: iterations + 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::LinearConstraint;
    use crate::sdp::{solve, LmiExpr};

    #[test]
    fn scalar_bound_lp() {
        // maximize y subject to y <= 3
        let mut p = SdpProblem::new("lp");
        let v = p.add_scalar("y");
        p.add_linear(LinearConstraint::le(vec![(v, 1.0)], 3.0));
        p.objective = vec![(v, 1.0)];
        let sol = solve(&p, &InteriorPoint::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.values[v] - 3.0).abs() < 1e-6, "y = {}", sol.values[v]);
    }

    #[test]
    fn equality_constraint() {
        // maximize y1 subject to y1 + y2 = 2, y1 <= 5, y2 >= -1
        let mut p = SdpProblem::new("eq");
        let y1 = p.add_scalar("y1");
        let y2 = p.add_scalar("y2");
        p.add_linear(LinearConstraint {
            terms: vec![(y1, 1.0), (y2, 1.0)],
            sense: Sense::Eq,
            rhs: 2.0,
        });
        p.add_linear(LinearConstraint::le(vec![(y1, 1.0)], 5.0));
        p.add_linear(LinearConstraint::ge(vec![(y2, 1.0)], -1.0));
        p.objective = vec![(y1, 1.0)];
        let sol = solve(&p, &InteriorPoint::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(
            (sol.values[y1] - 3.0).abs() < 1e-5,
            "y1 = {}",
            sol.values[y1]
        );
        assert!(
            (sol.values[y2] + 1.0).abs() < 1e-5,
            "y2 = {}",
            sol.values[y2]
        );
    }

    #[test]
    fn off_diagonal_sdp() {
        // maximize t subject to [[-1, t], [t, -1]] <= 0: optimum t = 1
        let mut p = SdpProblem::new("offdiag");
        let t = p.add_scalar("t");
        let mut k = DMatrix::zeros(2, 2);
        k[(0, 1)] = 1.0;
        k[(1, 0)] = 1.0;
        p.add_lmi(LmiExpr {
            dim: 2,
            constant: -DMatrix::identity(2, 2),
            terms: vec![(t, k)],
        });
        p.objective = vec![(t, 1.0)];
        let sol = solve(&p, &InteriorPoint::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.values[t] - 1.0).abs() < 1e-6, "t = {}", sol.values[t]);
    }

    #[test]
    fn lyapunov_slack_sdp() {
        // maximize t s.t. A'PA - P + tI <= 0, P >= 0, tr(P) <= 10, A = 0.6:
        // with p <= 10, optimum t = (1 - 0.36) * 10 = 6.4
        let mut p = SdpProblem::new("lyap");
        let pv = p.add_sym_var("P", 1, true);
        let pvar = p.psd_vars()[pv].vars.start;
        let t = p.add_scalar("t");
        p.add_lmi(LmiExpr {
            dim: 1,
            constant: DMatrix::zeros(1, 1),
            terms: vec![
                (pvar, DMatrix::from_element(1, 1, 0.36 - 1.0)),
                (t, DMatrix::identity(1, 1)),
            ],
        });
        p.add_linear(LinearConstraint::le(vec![(pvar, 1.0)], 10.0));
        p.objective = vec![(t, 1.0)];
        let sol = solve(&p, &InteriorPoint::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 6.4).abs() < 1e-5);
    }
}
