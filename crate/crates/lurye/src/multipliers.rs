//! Multiplier classes and their quadratic constraints.
//!
//! Four linearly parameterized families of symmetric matrices `M` of size
//! `(2N+2) x (2N+2)` act on the filter output
//! `r(k) = [v(k)..v(k-N), w(k)..w(k-N)]`:
//!
//! * [`ZfParams`] — dynamic class for `[0,1]` slope-restricted
//!   nonlinearities (Zames-Falb taps `m_{-N}..m_N`, `m_i <= 0` off the
//!   center, nonnegative tap sum). The running sum
//!   `sum_{k<=T0} r(k)' M r(k)` is nonnegative for every horizon.
//! * [`ReluIqcParams`] — dynamic class specific to ReLU (`m1, m2 >= 0`,
//!   `m3_i >= 0` off the center, free center tap). Strictly larger than the
//!   slope-restricted class under the embedding [`zf_embed`].
//! * [`StaticSlopeParams`] — full doubly hyperdominant `Q0`, pointwise
//!   quadratic constraint on each window.
//! * [`StaticReluParams`] — full entrywise-nonnegative symmetric `Q1, Q2`
//!   plus Metzler `Q3`, pointwise constraint for ReLU windows.
//!
//! [`toeplitz_sum_oracle`] evaluates the running sum both via the filter
//! recursion and via the equivalent banded-Toeplitz quadratic form over
//! stacked signals; agreement of the two routes is the correctness check for
//! the dynamic classes.

use nalgebra::DMatrix;

use crate::augment::build_psi;
use crate::{Error, Result};

/// Off-diagonal entries nonpositive, all row and column sums nonnegative.
pub fn is_doubly_hyperdominant(q: &DMatrix<f64>) -> bool {
    if q.nrows() != q.ncols() {
        return false;
    }
    let n = q.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && q[(i, j)] > 0.0 {
                return false;
            }
        }
    }
    (0..n).all(|i| q.row(i).sum() >= 0.0) && (0..n).all(|j| q.column(j).sum() >= 0.0)
}

/// Off-diagonal entries nonnegative.
pub fn is_metzler(q: &DMatrix<f64>) -> bool {
    if q.nrows() != q.ncols() {
        return false;
    }
    let n = q.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || q[(i, j)] >= 0.0))
}

/// Zames-Falb taps `m_i`, `i = -N..N`, stored as `taps[N + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfParams {
    taps: Vec<f64>,
}

impl ZfParams {
    /// `taps` lists `m_{-N}, ..., m_0, ..., m_N` (odd length).
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.len() % 2 == 0 {
            return Err(Error::InvalidParams(
                "tap vector must have odd length 2N+1".into(),
            ));
        }
        let p = Self { taps };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(taps: Vec<f64>) -> Self {
        debug_assert!(taps.len() % 2 == 1);
        Self { taps }
    }

    pub fn horizon(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Tap `m_i` for `|i| <= N`, zero outside.
    pub fn tap(&self, i: isize) -> f64 {
        let n = self.horizon() as isize;
        if i.abs() > n {
            0.0
        } else {
            self.taps[(n + i) as usize]
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.horizon() as isize;
        for i in -n..=n {
            if i != 0 && self.tap(i) > 0.0 {
                return Err(Error::InvalidParams(format!(
                    "m_{i} = {} must be nonpositive",
                    self.tap(i)
                )));
            }
        }
        let sum: f64 = self.taps.iter().sum();
        if sum < 0.0 {
            return Err(Error::InvalidParams(format!(
                "tap sum {sum} must be nonnegative"
            )));
        }
        Ok(())
    }
}

/// ReLU dynamic-class parameters: `m1_i, m2_i >= 0` for `i = 0..N` and
/// `m3_i` for `i = -N..N` with `m3_i >= 0` off the center.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluIqcParams {
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    m3: Vec<f64>,
}

impl ReluIqcParams {
    pub fn new(m1: Vec<f64>, m2: Vec<f64>, m3: Vec<f64>) -> Result<Self> {
        if m1.len() != m2.len() || m3.len() != 2 * m1.len() - 1 || m1.is_empty() {
            return Err(Error::InvalidParams(format!(
                "inconsistent lengths: m1 {}, m2 {}, m3 {}",
                m1.len(),
                m2.len(),
                m3.len()
            )));
        }
        let p = Self { m1, m2, m3 };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(m1: Vec<f64>, m2: Vec<f64>, m3: Vec<f64>) -> Self {
        debug_assert!(m1.len() == m2.len() && m3.len() == 2 * m1.len() - 1);
        Self { m1, m2, m3 }
    }

    pub fn horizon(&self) -> usize {
        self.m1.len() - 1
    }

    /// Tap `m3_i` for `|i| <= N`, zero outside.
    pub fn m3_tap(&self, i: isize) -> f64 {
        let n = self.horizon() as isize;
        if i.abs() > n {
            0.0
        } else {
            self.m3[(n + i) as usize]
        }
    }

    pub fn m3_taps(&self) -> &[f64] {
        &self.m3
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("m1", &self.m1), ("m2", &self.m2)] {
            if let Some(bad) = v.iter().find(|&&x| x < 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} entry {bad} must be nonnegative"
                )));
            }
        }
        let n = self.horizon() as isize;
        for i in -n..=n {
            if i != 0 && self.m3_tap(i) < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "m3_{i} = {} must be nonnegative",
                    self.m3_tap(i)
                )));
            }
        }
        Ok(())
    }
}

/// Static slope-restricted class: any doubly hyperdominant `Q0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticSlopeParams {
    pub q0: DMatrix<f64>,
}

impl StaticSlopeParams {
    pub fn new(q0: DMatrix<f64>) -> Result<Self> {
        let p = Self { q0 };
        p.validate()?;
        Ok(p)
    }

    pub fn window(&self) -> usize {
        self.q0.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.q0.nrows() != self.q0.ncols() {
            return Err(Error::InvalidParams("Q0 must be square".into()));
        }
        if !is_doubly_hyperdominant(&self.q0) {
            return Err(Error::InvalidParams(
                "Q0 must be doubly hyperdominant".into(),
            ));
        }
        Ok(())
    }
}

/// Static ReLU class: symmetric entrywise-nonnegative `Q1, Q2`, Metzler `Q3`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticReluParams {
    pub q1: DMatrix<f64>,
    pub q2: DMatrix<f64>,
    pub q3: DMatrix<f64>,
}

impl StaticReluParams {
    pub fn new(q1: DMatrix<f64>, q2: DMatrix<f64>, q3: DMatrix<f64>) -> Result<Self> {
        let p = Self { q1, q2, q3 };
        p.validate()?;
        Ok(p)
    }

    pub fn window(&self) -> usize {
        self.q1.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.q1.nrows();
        for (name, q) in [("Q1", &self.q1), ("Q2", &self.q2), ("Q3", &self.q3)] {
            if q.nrows() != w || q.ncols() != w {
                return Err(Error::InvalidParams(format!("{name} has wrong size")));
            }
        }
        for (name, q) in [("Q1", &self.q1), ("Q2", &self.q2)] {
            if *q != q.transpose() {
                return Err(Error::InvalidParams(format!("{name} must be symmetric")));
            }
            if q.iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be entrywise nonnegative"
                )));
            }
        }
        if !is_metzler(&self.q3) {
            return Err(Error::InvalidParams("Q3 must be Metzler".into()));
        }
        Ok(())
    }
}

/// Arrowhead matrix: first row `(c_0..c_N)`, first column `(c_0, r_1..r_N)`,
/// zeros elsewhere.
fn arrowhead(first_row: &[f64], first_col_tail: &[f64]) -> DMatrix<f64> {
    let n1 = first_row.len();
    let mut m = DMatrix::zeros(n1, n1);
    for (j, &c) in first_row.iter().enumerate() {
        m[(0, j)] = c;
    }
    for (i, &c) in first_col_tail.iter().enumerate() {
        m[(i + 1, 0)] = c;
    }
    m
}

fn slope_block(m0: &DMatrix<f64>) -> DMatrix<f64> {
    let n1 = m0.nrows();
    let mut m = DMatrix::zeros(2 * n1, 2 * n1);
    m.view_mut((0, n1), (n1, n1)).copy_from(&m0.transpose());
    m.view_mut((n1, 0), (n1, n1)).copy_from(m0);
    m.view_mut((n1, n1), (n1, n1))
        .copy_from(&(-(m0 + m0.transpose())));
    m
}

fn relu_block(m1: &DMatrix<f64>, m2: &DMatrix<f64>, m3: &DMatrix<f64>) -> DMatrix<f64> {
    let n1 = m1.nrows();
    let mut m = DMatrix::zeros(2 * n1, 2 * n1);
    m.view_mut((0, 0), (n1, n1)).copy_from(m1);
    m.view_mut((0, n1), (n1, n1))
        .copy_from(&(-(m3.transpose() + m1)));
    m.view_mut((n1, 0), (n1, n1)).copy_from(&(-(m3 + m1)));
    m.view_mut((n1, n1), (n1, n1))
        .copy_from(&(m1 + m2 + m3 + m3.transpose()));
    m
}

fn zf_m0(p: &ZfParams) -> DMatrix<f64> {
    let n = p.horizon();
    let row: Vec<f64> = (0..=n as isize).map(|i| p.tap(i)).collect();
    let col: Vec<f64> = (1..=n as isize).map(|i| p.tap(-i)).collect();
    arrowhead(&row, &col)
}

fn relu_m123(p: &ReluIqcParams) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = p.horizon();
    let m1 = arrowhead(&p.m1, &p.m1[1..]);
    let m2 = arrowhead(&p.m2, &p.m2[1..]);
    let row: Vec<f64> = (0..=n as isize).map(|i| p.m3_tap(i)).collect();
    let col: Vec<f64> = (1..=n as isize).map(|i| p.m3_tap(-i)).collect();
    (m1, m2, arrowhead(&row, &col))
}

/// `M = [[0, M0'], [M0, -(M0 + M0')]]` with the arrowhead `M0` from the taps.
pub fn build_m_slope_dynamic(p: &ZfParams) -> Result<DMatrix<f64>> {
    p.validate()?;
    Ok(slope_block(&zf_m0(p)))
}

/// `M = [[M1, -M3'-M1], [-M3-M1, M1+M2+M3+M3']]` from arrowhead blocks.
pub fn build_m_relu_dynamic(p: &ReluIqcParams) -> Result<DMatrix<f64>> {
    p.validate()?;
    let (m1, m2, m3) = relu_m123(p);
    Ok(relu_block(&m1, &m2, &m3))
}

/// Static slope-restricted form with a full doubly hyperdominant `Q0`.
pub fn build_m_slope_static(p: &StaticSlopeParams) -> Result<DMatrix<f64>> {
    p.validate()?;
    Ok(slope_block(&p.q0))
}

/// Static ReLU form with full `Q1, Q2, Q3`.
pub fn build_m_relu_static(p: &StaticReluParams) -> Result<DMatrix<f64>> {
    p.validate()?;
    Ok(relu_block(&p.q1, &p.q2, &p.q3))
}

/// Maps slope-restricted taps into the ReLU dynamic class:
/// `m1 = m2 = 0`, `m3_i = -m_i`. The resulting matrix is identical.
pub fn zf_embed(p: &ZfParams) -> ReluIqcParams {
    let n = p.horizon();
    ReluIqcParams::new_unchecked(
        vec![0.0; n + 1],
        vec![0.0; n + 1],
        p.taps().iter().map(|&m| -m).collect(),
    )
}

/// The four multiplier classes searched over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum MultiplierKind {
    SlopeStatic,
    SlopeDynamic,
    ReluStatic,
    ReluDynamic,
}

impl MultiplierKind {
    pub const ALL: [MultiplierKind; 4] = [
        MultiplierKind::ReluDynamic,
        MultiplierKind::ReluStatic,
        MultiplierKind::SlopeDynamic,
        MultiplierKind::SlopeStatic,
    ];

    pub fn is_dynamic(&self) -> bool {
        matches!(
            self,
            MultiplierKind::SlopeDynamic | MultiplierKind::ReluDynamic
        )
    }

    /// True when the class is valid for every `[0,1]` slope-restricted
    /// nonlinearity (as opposed to ReLU only).
    pub fn is_slope_restricted(&self) -> bool {
        matches!(
            self,
            MultiplierKind::SlopeStatic | MultiplierKind::SlopeDynamic
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MultiplierKind::SlopeStatic => "slope-static",
            MultiplierKind::SlopeDynamic => "slope-dynamic",
            MultiplierKind::ReluStatic => "relu-static",
            MultiplierKind::ReluDynamic => "relu-dynamic",
        }
    }
}

impl std::str::FromStr for MultiplierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slope-static" => Ok(MultiplierKind::SlopeStatic),
            "slope-dynamic" => Ok(MultiplierKind::SlopeDynamic),
            "relu-static" => Ok(MultiplierKind::ReluStatic),
            "relu-dynamic" => Ok(MultiplierKind::ReluDynamic),
            other => Err(Error::InvalidArgument(format!(
                "unknown multiplier kind {other:?} (expected slope-static, slope-dynamic, relu-static or relu-dynamic)"
            ))),
        }
    }
}

impl std::fmt::Display for MultiplierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Comparison sense of a scalar constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `sum coeff_j * x_j  (sense)  rhs` over scalar decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn le(terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            terms,
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn ge(terms: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self {
            terms,
            sense: Sense::Ge,
            rhs,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Signed violation; positive means the constraint is broken.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.eval(x);
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Typed view of a parameter vector, used by the oracle layer.
#[derive(Debug, Clone)]
pub enum MultiplierParams {
    SlopeDynamic(ZfParams),
    ReluDynamic(ReluIqcParams),
    SlopeStatic(StaticSlopeParams),
    ReluStatic(StaticReluParams),
}

/// A multiplier class exposed as decision variables: `M(theta)` is the sum
/// of `basis` matrices weighted by the parameter vector, admissible exactly
/// when `constraints` hold.
#[derive(Debug, Clone)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    /// Filter horizon N; matrices act on `r` of size `2N + 2`.
    pub horizon: usize,
    pub basis: Vec<DMatrix<f64>>,
    pub constraints: Vec<LinearConstraint>,
    pub param_names: Vec<String>,
}

impl MultiplierSpec {
    pub fn n_params(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.horizon + 2
    }

    /// `M(theta)`.
    pub fn matrix(&self, theta: &[f64]) -> DMatrix<f64> {
        assert_eq!(theta.len(), self.n_params(), "theta length mismatch");
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (t, b) in theta.iter().zip(&self.basis) {
            if *t != 0.0 {
                m += b * *t;
            }
        }
        m
    }

    /// Largest constraint violation (<= 0 means admissible).
    pub fn max_violation(&self, theta: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(theta))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_admissible(&self, theta: &[f64], tol: f64) -> bool {
        self.max_violation(theta) <= tol
    }

    /// Reconstructs typed parameters from a raw vector.
    pub fn params(&self, theta: &[f64]) -> MultiplierParams {
        assert_eq!(theta.len(), self.n_params());
        let n = self.horizon;
        match self.kind {
            MultiplierKind::SlopeDynamic => {
                MultiplierParams::SlopeDynamic(ZfParams::new_unchecked(theta.to_vec()))
            }
            MultiplierKind::ReluDynamic => {
                let m1 = theta[..n + 1].to_vec();
                let m2 = theta[n + 1..2 * (n + 1)].to_vec();
                let m3 = theta[2 * (n + 1)..].to_vec();
                MultiplierParams::ReluDynamic(ReluIqcParams::new_unchecked(m1, m2, m3))
            }
            MultiplierKind::SlopeStatic => {
                let w = n + 1;
                let q0 = DMatrix::from_fn(w, w, |i, j| theta[i * w + j]);
                MultiplierParams::SlopeStatic(StaticSlopeParams { q0 })
            }
            MultiplierKind::ReluStatic => {
                let w = n + 1;
                let tri = w * (w + 1) / 2;
                let q1 = sym_from_upper(&theta[..tri], w);
                let q2 = sym_from_upper(&theta[tri..2 * tri], w);
                let q3 = DMatrix::from_fn(w, w, |i, j| theta[2 * tri + i * w + j]);
                MultiplierParams::ReluStatic(StaticReluParams { q1, q2, q3 })
            }
        }
    }

    /// A strictly admissible parameter vector, handy as a solver seed and in
    /// tests.
    pub fn interior_point(&self) -> Vec<f64> {
        let n = self.horizon;
        match self.kind {
            MultiplierKind::SlopeDynamic => {
                let mut theta = vec![-0.25 / (n.max(1) as f64); 2 * n + 1];
                theta[n] = 1.0;
                theta
            }
            MultiplierKind::ReluDynamic => vec![1.0; 4 * n + 3],
            MultiplierKind::SlopeStatic => {
                let w = n + 1;
                let off = -0.5 / w as f64;
                let mut theta = vec![off; w * w];
                for i in 0..w {
                    theta[i * w + i] = 1.0;
                }
                theta
            }
            MultiplierKind::ReluStatic => {
                let w = n + 1;
                vec![1.0; w * (w + 1) + w * w]
            }
        }
    }
}

fn sym_from_upper(upper: &[f64], w: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(w, w);
    let mut k = 0;
    for i in 0..w {
        for j in i..w {
            q[(i, j)] = upper[k];
            q[(j, i)] = upper[k];
            k += 1;
        }
    }
    q
}

/// Builds the parameterized class for a given kind and horizon: one basis
/// matrix per free scalar, plus the admissibility constraints.
pub fn make_spec(kind: MultiplierKind, horizon: usize) -> MultiplierSpec {
    let n = horizon;
    match kind {
        MultiplierKind::SlopeDynamic => {
            let n_params = 2 * n + 1;
            let mut basis = Vec::with_capacity(n_params);
            let mut names = Vec::with_capacity(n_params);
            for j in 0..n_params {
                let mut taps = vec![0.0; n_params];
                taps[j] = 1.0;
                basis.push(slope_block(&zf_m0(&ZfParams::new_unchecked(taps))));
                names.push(format!("m[{}]", j as isize - n as isize));
            }
            let mut constraints = Vec::new();
            for j in 0..n_params {
                if j != n {
                    constraints.push(LinearConstraint::le(vec![(j, 1.0)], 0.0));
                }
            }
            constraints.push(LinearConstraint::ge(
                (0..n_params).map(|j| (j, 1.0)).collect(),
                0.0,
            ));
            MultiplierSpec {
                kind,
                horizon,
                basis,
                constraints,
                param_names: names,
            }
        }
        MultiplierKind::ReluDynamic => {
            let n_params = 4 * n + 3;
            let mut basis = Vec::with_capacity(n_params);
            let mut names = Vec::with_capacity(n_params);
            for j in 0..n_params {
                let mut theta = vec![0.0; n_params];
                theta[j] = 1.0;
                let m1 = theta[..n + 1].to_vec();
                let m2 = theta[n + 1..2 * (n + 1)].to_vec();
                let m3 = theta[2 * (n + 1)..].to_vec();
                let (b1, b2, b3) = relu_m123(&ReluIqcParams::new_unchecked(m1, m2, m3));
                basis.push(relu_block(&b1, &b2, &b3));
            }
            for i in 0..=n {
                names.push(format!("m1[{i}]"));
            }
            for i in 0..=n {
                names.push(format!("m2[{i}]"));
            }
            for i in 0..2 * n + 1 {
                names.push(format!("m3[{}]", i as isize - n as isize));
            }
            let mut constraints = Vec::new();
            for j in 0..2 * (n + 1) {
                constraints.push(LinearConstraint::ge(vec![(j, 1.0)], 0.0));
            }
            for j in 0..2 * n + 1 {
                if j != n {
                    constraints.push(LinearConstraint::ge(vec![(2 * (n + 1) + j, 1.0)], 0.0));
                }
            }
            MultiplierSpec {
                kind,
                horizon,
                basis,
                constraints,
                param_names: names,
            }
        }
        MultiplierKind::SlopeStatic => {
            let w = n + 1;
            let n_params = w * w;
            let mut basis = Vec::with_capacity(n_params);
            let mut names = Vec::with_capacity(n_params);
            for i in 0..w {
                for j in 0..w {
                    let mut q0 = DMatrix::zeros(w, w);
                    q0[(i, j)] = 1.0;
                    basis.push(slope_block(&q0));
                    names.push(format!("Q0[{i},{j}]"));
                }
            }
            let mut constraints = Vec::new();
            for i in 0..w {
                for j in 0..w {
                    if i != j {
                        constraints.push(LinearConstraint::le(vec![(i * w + j, 1.0)], 0.0));
                    }
                }
            }
            for i in 0..w {
                constraints.push(LinearConstraint::ge(
                    (0..w).map(|j| (i * w + j, 1.0)).collect(),
                    0.0,
                ));
            }
            for j in 0..w {
                constraints.push(LinearConstraint::ge(
                    (0..w).map(|i| (i * w + j, 1.0)).collect(),
                    0.0,
                ));
            }
            MultiplierSpec {
                kind,
                horizon,
                basis,
                constraints,
                param_names: names,
            }
        }
        MultiplierKind::ReluStatic => {
            let w = n + 1;
            let tri = w * (w + 1) / 2;
            let n_params = 2 * tri + w * w;
            let mut basis = Vec::with_capacity(n_params);
            let mut names = Vec::with_capacity(n_params);
            let zero = DMatrix::zeros(w, w);
            for block in 0..2 {
                let mut k = 0;
                for i in 0..w {
                    for j in i..w {
                        let mut theta = vec![0.0; tri];
                        theta[k] = 1.0;
                        let q = sym_from_upper(&theta, w);
                        if block == 0 {
                            basis.push(relu_block(&q, &zero, &zero));
                            names.push(format!("Q1[{i},{j}]"));
                        } else {
                            basis.push(relu_block(&zero, &q, &zero));
                            names.push(format!("Q2[{i},{j}]"));
                        }
                        k += 1;
                    }
                }
            }
            for i in 0..w {
                for j in 0..w {
                    let mut q3 = DMatrix::zeros(w, w);
                    q3[(i, j)] = 1.0;
                    basis.push(relu_block(&zero, &zero, &q3));
                    names.push(format!("Q3[{i},{j}]"));
                }
            }
            let mut constraints = Vec::new();
            for j in 0..2 * tri {
                constraints.push(LinearConstraint::ge(vec![(j, 1.0)], 0.0));
            }
            for i in 0..w {
                for j in 0..w {
                    if i != j {
                        constraints
                            .push(LinearConstraint::ge(vec![(2 * tri + i * w + j, 1.0)], 0.0));
                    }
                }
            }
            MultiplierSpec {
                kind,
                horizon,
                basis,
                constraints,
                param_names: names,
            }
        }
    }
}

/// Embeds a slope-dynamic parameter vector into the ReLU dynamic class at
/// the raw-theta level (`m1 = m2 = 0`, `m3 = -m`).
pub fn embed_slope_theta(theta_slope: &[f64]) -> Vec<f64> {
    let n = (theta_slope.len() - 1) / 2;
    let mut theta = vec![0.0; 4 * n + 3];
    for (j, &m) in theta_slope.iter().enumerate() {
        theta[2 * (n + 1) + j] = -m;
    }
    theta
}

/// Banded Toeplitz matrix of the slope-dynamic running-sum identity:
/// entry `(i, j)` is `m_{j-i}` for `|j - i| <= N`, zero outside.
pub fn zf_toeplitz(p: &ZfParams, size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| p.tap(j as isize - i as isize))
}

/// Banded Toeplitz matrices of the ReLU running-sum identity.
pub fn relu_toeplitz(p: &ReluIqcParams, size: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let band = |taps: &[f64], i: usize, j: usize| {
        let d = (j as isize - i as isize).unsigned_abs();
        if d < taps.len() {
            taps[d]
        } else {
            0.0
        }
    };
    let q1 = DMatrix::from_fn(size, size, |i, j| band(&p.m1, i, j));
    let q2 = DMatrix::from_fn(size, size, |i, j| band(&p.m2, i, j));
    let q3 = DMatrix::from_fn(size, size, |i, j| p.m3_tap(j as isize - i as isize));
    (q1, q2, q3)
}

/// Dynamic-class parameters accepted by the running-sum oracle.
#[derive(Debug, Clone)]
pub enum DynamicParams {
    Slope(ZfParams),
    Relu(ReluIqcParams),
}

impl DynamicParams {
    fn horizon(&self) -> usize {
        match self {
            DynamicParams::Slope(p) => p.horizon(),
            DynamicParams::Relu(p) => p.horizon(),
        }
    }
}

/// Evaluates the running sum `sum_{k=0..T0} r(k)' M r(k)` by two independent
/// routes and returns both values.
///
/// The left value drives the FIR filter with `(v, w)` from zero initial
/// conditions and accumulates the quadratic form of `M`. The right value
/// stacks the signals in reverse time and evaluates the equivalent quadratic
/// form built from banded Toeplitz matrices of size `T0 + 1` (which, for
/// `T0 < N`, automatically uses only the taps `|i| <= T0`). When `w` is not
/// supplied it is computed as `ReLU(v)`.
pub fn toeplitz_sum_oracle(
    params: &DynamicParams,
    v: &[f64],
    w: Option<&[f64]>,
    t0: usize,
) -> Result<(f64, f64)> {
    if v.len() < t0 + 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples, got {}",
            t0 + 1,
            v.len()
        )));
    }
    let w_owned: Vec<f64>;
    let w = match w {
        Some(w) => {
            if w.len() < t0 + 1 {
                return Err(Error::InvalidArgument("w shorter than T0 + 1".into()));
            }
            w
        }
        None => {
            w_owned = v.iter().map(|&x| x.max(0.0)).collect();
            &w_owned
        }
    };

    let n = params.horizon();
    let m = match params {
        DynamicParams::Slope(p) => build_m_slope_dynamic(p)?,
        DynamicParams::Relu(p) => build_m_relu_dynamic(p)?,
    };

    // route 1: filter recursion
    let psi = build_psi(n);
    let u: Vec<_> = v
        .iter()
        .zip(w)
        .take(t0 + 1)
        .map(|(&a, &b)| nalgebra::DVector::from_vec(vec![a, b]))
        .collect();
    let (_, r) = psi.simulate(&u, &nalgebra::DVector::zeros(psi.order()))?;
    let lhs: f64 = r.iter().map(|rk| (rk.transpose() * &m * rk)[(0, 0)]).sum();

    // route 2: stacked quadratic form with banded Toeplitz blocks
    let size = t0 + 1;
    let vbar = nalgebra::DVector::from_fn(size, |i, _| v[t0 - i]);
    let wbar = nalgebra::DVector::from_fn(size, |i, _| w[t0 - i]);
    let q = match params {
        DynamicParams::Slope(p) => slope_block(&zf_toeplitz(p, size)),
        DynamicParams::Relu(p) => {
            let (q1, q2, q3) = relu_toeplitz(p, size);
            relu_block(&q1, &q2, &q3)
        }
    };
    let mut stacked = nalgebra::DVector::zeros(2 * size);
    stacked.rows_mut(0, size).copy_from(&vbar);
    stacked.rows_mut(size, size).copy_from(&wbar);
    let rhs = (stacked.transpose() * &q * &stacked)[(0, 0)];

    Ok((lhs, rhs))
}
