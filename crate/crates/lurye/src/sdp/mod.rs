//! Semidefinite feasibility problems and their solution.
//!
//! [`SdpProblem`] is a standard-form carrier: scalar decision variables
//! (symmetric matrix variables are expanded into their upper-triangle
//! coordinates), affine matrix expressions required negative semidefinite,
//! affine scalar constraints, and an optional linear objective to maximize.
//!
//! [`assemble_lmi`] encodes the stability condition for an augmented system
//! `Ghat` and a multiplier class `M(theta)`:
//!
//! ```text
//!     LMI(P, M) = [ A'PA - P   A'PB ]  +  [C'; D'] M [C  D]
//!                 [ B'PA       B'PB ]
//! ```
//!
//! as `maximize t` subject to `LMI(P, M(theta)) + t I <= 0`, `P >= 0`, the
//! class sign constraints, and scale bounds. Every admissible class is a
//! cone, so the bounds only normalize the certificate scale; the sign of the
//! optimal `t` — the strictness witness — is unaffected. A solution
//! certifies the strict inequality when `t` clears [`strictness_floor`].
//!
//! Solving goes through the [`SolverBackend`] trait; the in-repo backend is
//! a dense primal-dual interior-point method ([`ipm::InteriorPoint`]).
//! [`solve`] re-checks every reported optimum against an independent dense
//! eigensolver before trusting it.

pub mod ipm;

use nalgebra::DMatrix;
use std::ops::Range;

use crate::augment::AugmentedSystem;
use crate::multipliers::{LinearConstraint, MultiplierSpec};
use crate::{Error, Result};

/// Duality gap below which a backend optimum is trusted.
pub const GAP_TRUST: f64 = 1e-7;
/// Primal residual above which a solve is numerical trouble.
pub const PRIMAL_RESIDUAL_TRUST: f64 = 1e-5;
/// Independent re-verification slack on LMI eigenvalues.
pub const LMI_EIG_TOL: f64 = 1e-7;
/// Independent re-verification slack on eigenvalues of P.
pub const P_EIG_TOL: f64 = 1e-8;

/// An affine symmetric-matrix expression `constant + sum x_j * coeff_j`,
/// constrained negative semidefinite.
#[derive(Debug, Clone)]
pub struct LmiExpr {
    pub dim: usize,
    pub constant: DMatrix<f64>,
    pub terms: Vec<(usize, DMatrix<f64>)>,
}

impl LmiExpr {
    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.clone();
        for (j, k) in &self.terms {
            if x[*j] != 0.0 {
                m += k * x[*j];
            }
        }
        m
    }
}

/// Symmetric matrix variable expanded into scalar coordinates.
#[derive(Debug, Clone)]
pub struct PsdVarInfo {
    pub name: String,
    pub dim: usize,
    /// Scalar variable ids, upper triangle row-major: (0,0), (0,1) ... (n,n).
    pub vars: Range<usize>,
    /// When set the variable is constrained positive semidefinite; otherwise
    /// it is a free symmetric matrix.
    pub require_psd: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    pub name: String,
    scalar_names: Vec<String>,
    psd_vars: Vec<PsdVarInfo>,
    pub lmis: Vec<LmiExpr>,
    pub linear: Vec<LinearConstraint>,
    /// Coefficients of the functional to maximize.
    pub objective: Vec<(usize, f64)>,
}

impl SdpProblem {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn n_scalars(&self) -> usize {
        self.scalar_names.len()
    }

    pub fn scalar_names(&self) -> &[String] {
        &self.scalar_names
    }

    pub fn psd_vars(&self) -> &[PsdVarInfo] {
        &self.psd_vars
    }

    pub fn add_scalar(&mut self, name: impl Into<String>) -> usize {
        self.scalar_names.push(name.into());
        self.scalar_names.len() - 1
    }

    /// Declares a symmetric matrix variable; its upper-triangle entries
    /// become scalar variables. Returns the index into
    /// [`SdpProblem::psd_vars`].
    pub fn add_sym_var(&mut self, name: impl Into<String>, dim: usize, require_psd: bool) -> usize {
        let name = name.into();
        let start = self.n_scalars();
        for i in 0..dim {
            for j in i..dim {
                self.add_scalar(format!("{name}[{i},{j}]"));
            }
        }
        self.psd_vars.push(PsdVarInfo {
            name,
            dim,
            vars: start..self.n_scalars(),
            require_psd,
        });
        self.psd_vars.len() - 1
    }

    /// Reconstructs the matrix value of a declared symmetric variable.
    pub fn sym_value(&self, psd_index: usize, values: &[f64]) -> DMatrix<f64> {
        let info = &self.psd_vars[psd_index];
        let mut m = DMatrix::zeros(info.dim, info.dim);
        let mut k = info.vars.start;
        for i in 0..info.dim {
            for j in i..info.dim {
                m[(i, j)] = values[k];
                m[(j, i)] = values[k];
                k += 1;
            }
        }
        m
    }

    pub fn add_lmi(&mut self, expr: LmiExpr) {
        self.lmis.push(expr);
    }

    pub fn add_linear(&mut self, c: LinearConstraint) {
        self.linear.push(c);
    }

    /// Worst residuals of a candidate point, via a dense eigensolver.
    pub fn residuals(&self, x: &[f64]) -> PointResiduals {
        let mut worst_lmi: f64 = f64::NEG_INFINITY;
        for lmi in &self.lmis {
            let m = lmi.eval(x);
            let scale = 1.0 + m.norm();
            let max_eig = symmetric_eigenvalues(&m).1;
            worst_lmi = worst_lmi.max(max_eig / scale);
        }
        let mut worst_psd: f64 = f64::NEG_INFINITY;
        for (idx, info) in self.psd_vars.iter().enumerate() {
            if !info.require_psd {
                continue;
            }
            let p = self.sym_value(idx, x);
            let scale = 1.0 + p.norm();
            worst_psd = worst_psd.max(-symmetric_eigenvalues(&p).0 / scale);
        }
        let worst_linear = self
            .linear
            .iter()
            .map(|c| c.violation(x) / (1.0 + c.rhs.abs()))
            .fold(f64::NEG_INFINITY, f64::max);
        PointResiduals {
            worst_lmi,
            worst_psd,
            worst_linear,
        }
    }

    /// Writes the problem in the SDPA sparse format (`.dat-s`), one
    /// inequality block per LMI and matrix variable plus a diagonal block
    /// for the scalar constraints.
    ///
    /// The emitted problem is `min c'x` subject to
    /// `X = sum_i x_i F_i - F_0, X >= 0`; the mapping from this problem is
    /// `c = -objective`, `F_0 = -C`, `F_i = -A_i` where `C - sum_i x_i A_i`
    /// collects all blocks. Cross-checking with an external SDPA-format
    /// solver: the external optimal value equals minus the maximum of the
    /// objective here.
    pub fn dump_sdpa_sparse(&self) -> String {
        let conic = ipm::lower(self);
        let mut out = String::new();
        out.push_str(&format!("\"{}\"\n", self.name));
        out.push_str(&format!("{}\n", conic.n_vars));
        let n_blocks = conic.dense.len() + usize::from(conic.diag.len() > 0);
        out.push_str(&format!("{n_blocks}\n"));
        let mut sizes: Vec<String> = conic.dense.iter().map(|b| b.dim.to_string()).collect();
        if conic.diag.len() > 0 {
            sizes.push(format!("-{}", conic.diag.len()));
        }
        out.push_str(&sizes.join(" "));
        out.push('\n');
        let c: Vec<String> = (0..conic.n_vars)
            .map(|i| format!("{:.17e}", -conic.b[i]))
            .collect();
        out.push_str(&c.join(" "));
        out.push('\n');
        // entry lines: matno block i j value (1-based, upper triangle)
        let push_mat = |out: &mut String, matno: usize, blkno: usize, m: &DMatrix<f64>| {
            for i in 0..m.nrows() {
                for j in i..m.ncols() {
                    if m[(i, j)] != 0.0 {
                        out.push_str(&format!(
                            "{matno} {blkno} {} {} {:.17e}\n",
                            i + 1,
                            j + 1,
                            m[(i, j)]
                        ));
                    }
                }
            }
        };
        for (bi, block) in conic.dense.iter().enumerate() {
            let neg_c = -&block.c;
            push_mat(&mut out, 0, bi + 1, &neg_c);
            for (var, a) in block.a.iter().enumerate() {
                if let Some(a) = a {
                    let neg_a = -a;
                    push_mat(&mut out, var + 1, bi + 1, &neg_a);
                }
            }
        }
        if conic.diag.len() > 0 {
            let blkno = conic.dense.len() + 1;
            for (row, &cv) in conic.diag.c.iter().enumerate() {
                if cv != 0.0 {
                    out.push_str(&format!("0 {blkno} {} {} {:.17e}\n", row + 1, row + 1, -cv));
                }
            }
            for (var, col) in conic.diag.cols.iter().enumerate() {
                for &(row, a) in col {
                    if a != 0.0 {
                        out.push_str(&format!(
                            "{} {blkno} {} {} {:.17e}\n",
                            var + 1,
                            row + 1,
                            row + 1,
                            -a
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Scaled residuals of a candidate point (negative values mean satisfied
/// with margin).
#[derive(Debug, Clone, Copy)]
pub struct PointResiduals {
    pub worst_lmi: f64,
    pub worst_psd: f64,
    pub worst_linear: f64,
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in eig.eigenvalues.iter() {
        lo = lo.min(l);
        hi = hi.max(l);
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalTrouble,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

/// A conic solver usable behind [`solve`]. Implementations must be
/// deterministic for identical inputs and report the achieved duality gap.
pub trait SolverBackend {
    fn name(&self) -> &str;
    fn solve_standard_form(&self, problem: &SdpProblem) -> SdpSolution;
}

/// Runs a backend and independently re-verifies any reported optimum with a
/// dense eigensolver; an optimum failing verification is downgraded to
/// [`SolveStatus::NumericalTrouble`].
pub fn solve(problem: &SdpProblem, backend: &dyn SolverBackend) -> SdpSolution {
    let mut sol = backend.solve_standard_form(problem);
    if sol.status == SolveStatus::Optimal {
        if sol.duality_gap > GAP_TRUST || sol.primal_residual > PRIMAL_RESIDUAL_TRUST {
            sol.status = SolveStatus::NumericalTrouble;
            return sol;
        }
        let res = problem.residuals(&sol.values);
        if res.worst_lmi > LMI_EIG_TOL
            || res.worst_psd > P_EIG_TOL
            || res.worst_linear > LMI_EIG_TOL
        {
            sol.status = SolveStatus::NumericalTrouble;
        }
    }
    sol
}

/// Knobs for [`assemble_lmi`] and [`feasibility`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Enforce `P >= 0` (required for internal stability); disabling it
    /// gives the input-output-style comparison variant.
    pub require_psd_p: bool,
    /// Box bound on each multiplier parameter. Classes are cones, so this
    /// only pins the certificate scale.
    pub theta_bound: f64,
    /// Bound on `trace(P)` (per-entry bounds when `P` is free).
    pub p_bound: f64,
    /// Lower bound on the slack variable `t`.
    pub t_lower: f64,
    /// Apply a diagonal state rescaling before assembly when the realization
    /// data spread exceeds this threshold.
    pub balance_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            require_psd_p: true,
            theta_bound: 1e3,
            p_bound: 1e6,
            t_lower: -1e7,
            balance_threshold: 1e8,
        }
    }
}

/// Variable bookkeeping for an assembled stability LMI.
#[derive(Debug, Clone)]
pub struct AssembledLmi {
    pub problem: SdpProblem,
    /// Index of `P` in `problem.psd_vars()`.
    pub p_index: usize,
    pub theta_vars: Range<usize>,
    pub t_var: usize,
}

/// Builds the stability feasibility SDP for an augmented system and a
/// multiplier class: `maximize t` s.t. `LMI(P, M(theta)) + t I <= 0`,
/// `P >= 0`, class constraints, and scale bounds.
pub fn assemble_lmi(
    aug: &AugmentedSystem,
    spec: &MultiplierSpec,
    opts: &SolveOptions,
) -> Result<AssembledLmi> {
    if spec.horizon != aug.horizon {
        return Err(Error::Dimension(format!(
            "multiplier horizon {} does not match augmented horizon {}",
            spec.horizon, aug.horizon
        )));
    }
    if aug.n_outputs() != spec.dim() {
        return Err(Error::Dimension(format!(
            "augmented system has {} outputs, multiplier acts on {}",
            aug.n_outputs(),
            spec.dim()
        )));
    }
    let n = aug.order();
    let nu = aug.sys.n_inputs();
    let lmi_dim = n + nu;

    let mut problem = SdpProblem::new(format!("{}-N{}", spec.kind, spec.horizon));
    let p_index = problem.add_sym_var("P", n, opts.require_psd_p);
    let p_vars = problem.psd_vars()[p_index].vars.clone();
    let theta_start = problem.n_scalars();
    for name in &spec.param_names {
        problem.add_scalar(format!("theta.{name}"));
    }
    let theta_vars = theta_start..problem.n_scalars();
    let t_var = problem.add_scalar("t");

    // [A B] stacked for the quadratic Lyapunov difference
    let mut ab = DMatrix::zeros(n, lmi_dim);
    ab.view_mut((0, 0), (n, n)).copy_from(&aug.sys.a);
    ab.view_mut((0, n), (n, nu)).copy_from(&aug.sys.b);
    // [C D] for the multiplier term
    let ny = aug.n_outputs();
    let mut h = DMatrix::zeros(ny, lmi_dim);
    h.view_mut((0, 0), (ny, n)).copy_from(&aug.sys.c);
    h.view_mut((0, n), (ny, nu)).copy_from(&aug.sys.d);

    let mut terms: Vec<(usize, DMatrix<f64>)> = Vec::new();
    // P coordinates: [A B]' E [A B] - blkdiag(E, 0)
    let mut var = p_vars.start;
    for i in 0..n {
        for j in i..n {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            let mut k = ab.transpose() * &e * &ab;
            k.view_mut((0, 0), (n, n)).sub_assign_from(&e);
            terms.push((var, k));
            var += 1;
        }
    }
    // theta coordinates: H' B_j H
    for (j, basis) in spec.basis.iter().enumerate() {
        terms.push((theta_start + j, h.transpose() * basis * &h));
    }
    // slack: + t I
    terms.push((t_var, DMatrix::identity(lmi_dim, lmi_dim)));

    problem.add_lmi(LmiExpr {
        dim: lmi_dim,
        constant: DMatrix::zeros(lmi_dim, lmi_dim),
        terms,
    });

    // class constraints, offset into problem variables
    for c in &spec.constraints {
        problem.add_linear(LinearConstraint {
            terms: c.terms.iter().map(|&(j, a)| (theta_start + j, a)).collect(),
            sense: c.sense,
            rhs: c.rhs,
        });
    }
    // scale hygiene: parameter box, trace bound, slack floor
    for j in theta_vars.clone() {
        problem.add_linear(LinearConstraint::le(vec![(j, 1.0)], opts.theta_bound));
        problem.add_linear(LinearConstraint::ge(vec![(j, 1.0)], -opts.theta_bound));
    }
    if opts.require_psd_p {
        let mut diag_terms = Vec::with_capacity(n);
        let mut k = p_vars.start;
        for i in 0..n {
            for j in i..n {
                if i == j {
                    diag_terms.push((k, 1.0));
                }
                k += 1;
            }
        }
        if n > 0 {
            problem.add_linear(LinearConstraint::le(diag_terms, opts.p_bound));
        }
    } else {
        for k in p_vars.clone() {
            problem.add_linear(LinearConstraint::le(vec![(k, 1.0)], opts.p_bound));
            problem.add_linear(LinearConstraint::ge(vec![(k, 1.0)], -opts.p_bound));
        }
    }
    problem.add_linear(LinearConstraint::ge(vec![(t_var, 1.0)], opts.t_lower));
    problem.objective = vec![(t_var, 1.0)];

    Ok(AssembledLmi {
        problem,
        p_index,
        theta_vars,
        t_var,
    })
}

/// Acceptance threshold on the strictness witness:
/// `t >= 1e-9 * (1 + ||D' M D||)`.
pub fn strictness_floor(aug: &AugmentedSystem, m: &DMatrix<f64>) -> f64 {
    let dmd = aug.sys.d.transpose() * m * &aug.sys.d;
    1e-9 * (1.0 + dmd.norm())
}

/// Outcome of a feasibility solve, with the recovered certificate pieces.
#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub p: DMatrix<f64>,
    pub theta: Vec<f64>,
    /// Achieved `t` in `LMI + t I <= 0`.
    pub strictness: f64,
    pub t_min: f64,
    pub status: SolveStatus,
    pub duality_gap: f64,
    pub iterations: usize,
    /// Independently re-verified largest eigenvalue of `LMI(P, M(theta))`.
    pub lmi_max_eig: f64,
    /// Independently re-verified smallest eigenvalue of `P`.
    pub p_min_eig: f64,
}

/// Solves the stability feasibility problem for one multiplier class.
///
/// `feasible` is set only when the backend optimum survives independent
/// eigenvalue re-verification and the strictness witness clears its floor.
pub fn feasibility(
    aug: &AugmentedSystem,
    spec: &MultiplierSpec,
    opts: &SolveOptions,
    backend: &dyn SolverBackend,
) -> Result<FeasibilityResult> {
    let assembled = assemble_lmi(aug, spec, opts)?;
    let sol = solve(&assembled.problem, backend);
    let theta: Vec<f64> = assembled
        .theta_vars
        .clone()
        .map(|j| sol.values[j])
        .collect();
    let p = assembled.problem.sym_value(assembled.p_index, &sol.values);
    let t = sol.values[assembled.t_var];
    let m = spec.matrix(&theta);
    let t_min = strictness_floor(aug, &m);

    let (lmi_min_unused, lmi_max_eig) = {
        let lmi = evaluate_stability_lmi(aug, &p, &m);
        symmetric_eigenvalues(&lmi)
    };
    let _ = lmi_min_unused;
    let (p_min_eig, _) = symmetric_eigenvalues(&p);

    let verified = sol.status == SolveStatus::Optimal
        && t >= t_min
        && lmi_max_eig <= -t + LMI_EIG_TOL
        && (!opts.require_psd_p || p_min_eig >= -P_EIG_TOL)
        && spec.is_admissible(&theta, LMI_EIG_TOL);

    Ok(FeasibilityResult {
        feasible: verified,
        p,
        theta,
        strictness: t,
        t_min,
        status: sol.status,
        duality_gap: sol.duality_gap,
        iterations: sol.iterations,
        lmi_max_eig,
        p_min_eig,
    })
}

/// Evaluates `LMI(P, M)` for given values (no slack term).
pub fn evaluate_stability_lmi(
    aug: &AugmentedSystem,
    p: &DMatrix<f64>,
    m: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = aug.order();
    let nu = aug.sys.n_inputs();
    let mut ab = DMatrix::zeros(n, n + nu);
    ab.view_mut((0, 0), (n, n)).copy_from(&aug.sys.a);
    ab.view_mut((0, n), (n, nu)).copy_from(&aug.sys.b);
    let ny = aug.n_outputs();
    let mut h = DMatrix::zeros(ny, n + nu);
    h.view_mut((0, 0), (ny, n)).copy_from(&aug.sys.c);
    h.view_mut((0, n), (ny, nu)).copy_from(&aug.sys.d);
    let mut lmi = ab.transpose() * p * ab + h.transpose() * m * h;
    lmi.view_mut((0, 0), (n, n)).sub_assign_from(p);
    lmi
}

trait SubAssignFrom {
    fn sub_assign_from(&mut self, other: &DMatrix<f64>);
}

impl<'a> SubAssignFrom for nalgebra::DMatrixViewMut<'a, f64> {
    fn sub_assign_from(&mut self, other: &DMatrix<f64>) {
        for j in 0..other.ncols() {
            for i in 0..other.nrows() {
                self[(i, j)] -= other[(i, j)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::augment;
    use crate::lti::{benchmark_plant, StateSpace};
    use crate::multipliers::{make_spec, MultiplierKind, Sense};
    use ipm::InteriorPoint;

    #[test]
    fn empty_problem_is_trivially_optimal() {
        let problem = SdpProblem::new("empty");
        let sol = solve(&problem, &InteriorPoint::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective_value, 0.0);
    }

    #[test]
    fn scalar_lmi_maximum() {
        // maximize x subject to [x + 1] <= 0: optimum x = -1
        let mut problem = SdpProblem::new("scalar");
        let x = problem.add_scalar("x");
        problem.add_lmi(LmiExpr {
            dim: 1,
            constant: DMatrix::from_element(1, 1, 1.0),
            terms: vec![(x, DMatrix::from_element(1, 1, 1.0))],
        });
        problem.objective = vec![(x, 1.0)];
        let sol = solve(&problem, &InteriorPoint::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.values[x] + 1.0).abs() < 1e-6, "x = {}", sol.values[x]);
    }

    #[test]
    fn assembled_problem_dimensions() {
        let aug = augment(&benchmark_plant().scale(-0.5), 1).unwrap();
        let spec = make_spec(MultiplierKind::SlopeDynamic, 1);
        let assembled = assemble_lmi(&aug, &spec, &SolveOptions::default()).unwrap();
        // P is 4x4 (10 coords), 3 taps, 1 slack
        assert_eq!(assembled.problem.n_scalars(), 10 + 3 + 1);
        assert_eq!(assembled.problem.lmis[0].dim, 5);
    }

    #[test]
    fn horizon_mismatch_rejected() {
        let aug = augment(&benchmark_plant(), 1).unwrap();
        let spec = make_spec(MultiplierKind::SlopeDynamic, 2);
        assert!(assemble_lmi(&aug, &spec, &SolveOptions::default()).is_err());
    }

    #[test]
    fn sdpa_dump_has_expected_header() {
        let aug = augment(&benchmark_plant().scale(-0.5), 0).unwrap();
        let spec = make_spec(MultiplierKind::ReluDynamic, 0);
        let assembled = assemble_lmi(&aug, &spec, &SolveOptions::default()).unwrap();
        let dump = assembled.problem.dump_sdpa_sparse();
        let mut lines = dump.lines();
        assert!(lines.next().unwrap().starts_with('"'));
        let m: usize = lines.next().unwrap().trim().parse().unwrap();
        assert_eq!(m, assembled.problem.n_scalars());
        let nblocks: usize = lines.next().unwrap().trim().parse().unwrap();
        assert_eq!(nblocks, 3); // LMI block, P block, diagonal block
    }

    #[test]
    fn assembled_lmi_matches_dissipation_identity() {
        // for any (x, w): [x; w]' LMI [x; w] = V(x+) - V(x) + r' M r
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = benchmark_plant().scale(-0.8);
        for aug in [
            crate::augment::augment(&g, 2).unwrap(),
            crate::augment::lift_block(&g, 3).unwrap(),
        ] {
            let n = aug.order();
            let nu = aug.sys.n_inputs();
            let spec = make_spec(MultiplierKind::ReluDynamic, aug.horizon);
            let theta: Vec<f64> = (0..spec.n_params())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let m = spec.matrix(&theta);
            let mut p = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            p = (&p + p.transpose()) * 0.5;
            let lmi = evaluate_stability_lmi(&aug, &p, &m);
            for _ in 0..20 {
                let x = nalgebra::DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
                let w = nalgebra::DVector::from_fn(nu, |_, _| rng.random_range(-1.0..1.0f64));
                let mut xw = nalgebra::DVector::zeros(n + nu);
                xw.rows_mut(0, n).copy_from(&x);
                xw.rows_mut(n, nu).copy_from(&w);
                let quad = (xw.transpose() * &lmi * &xw)[(0, 0)];
                let x_next = &aug.sys.a * &x + &aug.sys.b * &w;
                let r = &aug.sys.c * &x + &aug.sys.d * &w;
                let expect = (x_next.transpose() * &p * &x_next)[(0, 0)]
                    - (x.transpose() * &p * &x)[(0, 0)]
                    + (r.transpose() * &m * &r)[(0, 0)];
                assert!(
                    (quad - expect).abs() <= 1e-10 * (1.0 + expect.abs()),
                    "identity violated: {quad} vs {expect}"
                );
            }
            // the assembled problem evaluates to the same matrix (plus slack)
            let assembled = assemble_lmi(&aug, &spec, &SolveOptions::default()).unwrap();
            let mut values = vec![0.0; assembled.problem.n_scalars()];
            let mut k = assembled.problem.psd_vars()[assembled.p_index].vars.start;
            for i in 0..n {
                for j in i..n {
                    values[k] = p[(i, j)];
                    k += 1;
                }
            }
            for (offset, j) in assembled.theta_vars.clone().enumerate() {
                values[j] = theta[offset];
            }
            values[assembled.t_var] = 0.25;
            let eval = assembled.problem.lmis[0].eval(&values);
            let expect = &lmi + DMatrix::identity(n + nu, n + nu) * 0.25;
            assert!((&eval - &expect).abs().max() < 1e-12);
        }
    }

    #[test]
    fn tiny_relu_problem_cross_checked_by_grid() {
        // 1-state plant in negative feedback, horizon 0: brute-force the
        // (p, m1, m2, m3) space and compare the verdict with the solver's.
        // (The positive-feedback loop of this plant is exactly marginal —
        // ||G||_inf = 1 — and certifiable only in the negative convention.)
        let plant = StateSpace::new(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::zeros(1, 1),
        )
        .unwrap()
        .scale(-1.0);
        let aug = augment(&plant, 0).unwrap();
        let spec = make_spec(MultiplierKind::ReluDynamic, 0);
        let mut grid_feasible = None;
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        'outer: for &p in &grid {
            for &m1 in &grid {
                for &m2 in &grid {
                    for &m3 in &[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
                        let m = spec.matrix(&[m1, m2, m3]);
                        let lmi = evaluate_stability_lmi(&aug, &DMatrix::from_element(1, 1, p), &m);
                        let (_, max_eig) = symmetric_eigenvalues(&lmi);
                        if p >= 0.0 && max_eig < -1e-6 {
                            grid_feasible = Some((p, m1, m2, m3));
                            break 'outer;
                        }
                    }
                }
            }
        }
        let witness = grid_feasible.expect("grid search must find a feasible point");
        let res = feasibility(
            &aug,
            &spec,
            &SolveOptions::default(),
            &InteriorPoint::default(),
        )
        .unwrap();
        assert!(
            res.feasible,
            "solver must agree with the grid witness {witness:?}"
        );
        assert!(res.strictness > res.t_min);
    }

    #[test]
    fn class_nesting_by_substitution() {
        // a feasible slope-dynamic witness embeds into the ReLU dynamic
        // class with the same P, verified without re-solving
        let g = benchmark_plant().scale(-0.5);
        let aug = augment(&g, 1).unwrap();
        let slope = make_spec(MultiplierKind::SlopeDynamic, 1);
        let relu = make_spec(MultiplierKind::ReluDynamic, 1);
        let res = feasibility(
            &aug,
            &slope,
            &SolveOptions::default(),
            &InteriorPoint::default(),
        )
        .unwrap();
        assert!(res.feasible);
        let embedded = crate::multipliers::embed_slope_theta(&res.theta);
        assert!(relu.is_admissible(&embedded, 1e-9));
        let m_slope = slope.matrix(&res.theta);
        let m_relu = relu.matrix(&embedded);
        assert_eq!(m_slope, m_relu);
        let lmi = evaluate_stability_lmi(&aug, &res.p, &m_relu);
        let (_, max_eig) = symmetric_eigenvalues(&lmi);
        assert!(
            max_eig <= -res.strictness + LMI_EIG_TOL,
            "embedded witness must satisfy the same LMI: {max_eig}"
        );
    }

    #[test]
    fn horizon_padding_by_substitution() {
        // a feasible witness at filter horizon N remains (non-strictly)
        // feasible at N + 1 with zero-padded taps and an embedded P
        let g = benchmark_plant().scale(-0.5);
        let n_psi = 1;
        let aug = augment(&g, n_psi).unwrap();
        let spec = make_spec(MultiplierKind::SlopeDynamic, n_psi);
        let res = feasibility(
            &aug,
            &spec,
            &SolveOptions::default(),
            &InteriorPoint::default(),
        )
        .unwrap();
        assert!(res.feasible);

        let aug_next = augment(&g, n_psi + 1).unwrap();
        let spec_next = make_spec(MultiplierKind::SlopeDynamic, n_psi + 1);
        let mut theta_next = vec![0.0; spec_next.n_params()];
        theta_next[1..=2 * n_psi + 1].copy_from_slice(&res.theta);
        assert!(spec_next.is_admissible(&theta_next, 1e-12));

        // state maps: plant states, then v-registers, then w-registers
        let np = aug.n_plant;
        let map = |i: usize| -> usize {
            if i < np + n_psi {
                i
            } else {
                i + 1
            }
        };
        let n_big = aug_next.order();
        let mut p_next = DMatrix::zeros(n_big, n_big);
        for i in 0..aug.order() {
            for j in 0..aug.order() {
                p_next[(map(i), map(j))] = res.p[(i, j)];
            }
        }
        let lmi = evaluate_stability_lmi(&aug_next, &p_next, &spec_next.matrix(&theta_next));
        let (_, max_eig) = symmetric_eigenvalues(&lmi);
        assert!(
            max_eig <= 1e-9,
            "padded witness must stay feasible (non-strict): {max_eig}"
        );
    }

    #[test]
    fn sdpa_dump_round_trips() {
        // parse the dump back and compare the encoded constraints against
        // the in-memory problem at random points
        use rand::{Rng, SeedableRng};
        let aug = augment(&benchmark_plant().scale(-0.7), 1).unwrap();
        let spec = make_spec(MultiplierKind::SlopeDynamic, 1);
        let assembled = assemble_lmi(&aug, &spec, &SolveOptions::default()).unwrap();
        let problem = &assembled.problem;
        let dump = problem.dump_sdpa_sparse();

        let mut lines = dump.lines();
        lines.next(); // name
        let m: usize = lines.next().unwrap().trim().parse().unwrap();
        assert_eq!(m, problem.n_scalars());
        let n_blocks: usize = lines.next().unwrap().trim().parse().unwrap();
        let sizes: Vec<isize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(sizes.len(), n_blocks);
        let c: Vec<f64> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(c.len(), m);

        // F matrices per (matno, block), dense blocks only
        let dims: Vec<usize> = sizes
            .iter()
            .map(|&s| if s < 0 { (-s) as usize } else { s as usize })
            .collect();
        let mut f: Vec<Vec<DMatrix<f64>>> = (0..=m)
            .map(|_| dims.iter().map(|&d| DMatrix::zeros(d, d)).collect())
            .collect();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let (matno, blk): (usize, usize) = (parts[0].parse().unwrap(), parts[1].parse().unwrap());
            let (i, j): (usize, usize) = (parts[2].parse().unwrap(), parts[3].parse().unwrap());
            let v: f64 = parts[4].parse().unwrap();
            f[matno][blk - 1][(i - 1, j - 1)] = v;
            f[matno][blk - 1][(j - 1, i - 1)] = v;
        }

        // the SDPA problem is X = sum_i x_i F_i - F_0 >= 0; at any x the
        // first block must equal -(LMI expression): dump objective is the
        // negated maximization objective
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut block0 = -f[0][0].clone();
            for (i, &xi) in x.iter().enumerate() {
                block0 += &f[i + 1][0] * xi;
            }
            let expect = -problem.lmis[0].eval(&x);
            assert!(
                (&block0 - &expect).abs().max() < 1e-12,
                "dumped first block must match the negated LMI"
            );
        }
        for (j, &cj) in c.iter().enumerate() {
            let direct: f64 = problem
                .objective
                .iter()
                .filter(|(var, _)| *var == j)
                .map(|(_, w)| *w)
                .sum();
            assert_eq!(cj, -direct);
        }
    }

    #[test]
    fn lyapunov_necessity_unstable_plant() {
        // with theta pinned to zero the LMI needs A'PA - P < 0, impossible
        // for an unstable A
        let unstable = StateSpace::new(
            DMatrix::from_element(1, 1, 1.1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let aug = augment(&unstable, 0).unwrap();
        let mut spec = make_spec(MultiplierKind::SlopeDynamic, 0);
        // force m_0 = 0: the only parameter pinned to zero
        spec.constraints.push(LinearConstraint {
            terms: vec![(0, 1.0)],
            sense: Sense::Le,
            rhs: 0.0,
        });
        let res = feasibility(
            &aug,
            &spec,
            &SolveOptions::default(),
            &InteriorPoint::default(),
        )
        .unwrap();
        assert!(!res.feasible, "unstable plant with M = 0 must not certify");
        assert!(res.strictness < res.t_min);
    }
}
