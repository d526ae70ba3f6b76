//! Discrete-time LTI systems: state-space models, transfer-function
//! realization, interconnection algebra, and simulation.
//!
//! The plant `G`, the FIR filter built in [`mod@crate::augment`], and the
//! augmented system are all plain [`StateSpace`] values,
//!
//! ```text
//!     x(k+1) = A x(k) + B u(k)
//!     y(k)   = C x(k) + D u(k)
//! ```
//!
//! with dense `f64` matrices. `n_x = 0` is legal and models a static gain.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Spectral radius must be below `1 - SCHUR_MARGIN` to count as Schur.
pub const SCHUR_MARGIN: f64 = 1e-12;

/// Rational transfer function in `z`, coefficients in descending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl TransferFunction {
    /// Requires a nonzero leading denominator coefficient and a proper
    /// ratio: deg(num) <= deg(den), with leading zeros of `num` ignored.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if den.is_empty() || den[0] == 0.0 {
            return Err(Error::ImproperTransferFunction(
                "denominator leading coefficient must be nonzero".into(),
            ));
        }
        if num.is_empty() {
            return Err(Error::ImproperTransferFunction("empty numerator".into()));
        }
        let num_deg = effective_degree(&num);
        let den_deg = den.len() - 1;
        if num_deg > den_deg {
            return Err(Error::ImproperTransferFunction(format!(
                "deg(num) = {num_deg} exceeds deg(den) = {den_deg}"
            )));
        }
        Ok(Self { num, den })
    }
}

fn effective_degree(coeffs: &[f64]) -> usize {
    let lead = coeffs
        .iter()
        .position(|&c| c != 0.0)
        .unwrap_or(coeffs.len() - 1);
    coeffs.len() - 1 - lead
}

/// Discrete-time state-space system (A, B, C, D).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() || c.ncols() != a.ncols() {
            return Err(Error::Dimension(format!(
                "state dimension mismatch: A is {}x{}, B has {} rows, C has {} cols",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "D must be {}x{}, got {}x{}",
                c.nrows(),
                b.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Static gain, `n_x = 0`.
    pub fn from_gain(d: DMatrix<f64>) -> Self {
        let (ny, nu) = (d.nrows(), d.ncols());
        Self {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, nu),
            c: DMatrix::zeros(ny, 0),
            d,
        }
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_siso(&self) -> bool {
        self.n_inputs() == 1 && self.n_outputs() == 1
    }

    /// Largest eigenvalue magnitude of A. Zero for a static gain.
    pub fn spectral_radius(&self) -> f64 {
        if self.order() == 0 {
            return 0.0;
        }
        self.a
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }

    /// True iff all eigenvalues of A lie strictly inside the unit disk.
    pub fn is_schur(&self) -> bool {
        self.spectral_radius() < 1.0 - SCHUR_MARGIN
    }

    /// Scales the output map: C and D multiplied by `alpha`.
    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &self.c * alpha,
            d: &self.d * alpha,
        }
    }

    /// Series interconnection: the output of `self` feeds `other`.
    ///
    /// State is stacked `[x_self; x_other]` and the transfer function is the
    /// product `other(z) * self(z)`.
    pub fn series(&self, other: &StateSpace) -> Result<Self> {
        if self.n_outputs() != other.n_inputs() {
            return Err(Error::Dimension(format!(
                "series: first system has {} outputs, second expects {} inputs",
                self.n_outputs(),
                other.n_inputs()
            )));
        }
        let (n1, n2) = (self.order(), other.order());
        let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, 0), (n2, n1))
            .copy_from(&(&other.b * &self.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);

        let mut b = DMatrix::zeros(n1 + n2, self.n_inputs());
        b.view_mut((0, 0), (n1, self.n_inputs())).copy_from(&self.b);
        b.view_mut((n1, 0), (n2, self.n_inputs()))
            .copy_from(&(&other.b * &self.d));

        let mut c = DMatrix::zeros(other.n_outputs(), n1 + n2);
        c.view_mut((0, 0), (other.n_outputs(), n1))
            .copy_from(&(&other.d * &self.c));
        c.view_mut((0, n1), (other.n_outputs(), n2))
            .copy_from(&other.c);

        let d = &other.d * &self.d;
        StateSpace::new(a, b, c, d)
    }

    /// Stacks an identity feed-through below the outputs: `[self; I]`.
    ///
    /// Same input, outputs become `[y; u]`.
    pub fn stack_unity(&self) -> Self {
        let nu = self.n_inputs();
        let ny = self.n_outputs();
        let n = self.order();
        let mut c = DMatrix::zeros(ny + nu, n);
        c.view_mut((0, 0), (ny, n)).copy_from(&self.c);
        let mut d = DMatrix::zeros(ny + nu, nu);
        d.view_mut((0, 0), (ny, nu)).copy_from(&self.d);
        d.view_mut((ny, 0), (nu, nu))
            .copy_from(&DMatrix::identity(nu, nu));
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c,
            d,
        }
    }

    /// Runs the recursion from `x0`. Returns `len(u) + 1` states and
    /// `len(u)` outputs.
    pub fn simulate(
        &self,
        u: &[DVector<f64>],
        x0: &DVector<f64>,
    ) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
        if x0.len() != self.order() {
            return Err(Error::Dimension(format!(
                "x0 has {} entries, system has {} states",
                x0.len(),
                self.order()
            )));
        }
        let mut states = Vec::with_capacity(u.len() + 1);
        let mut outputs = Vec::with_capacity(u.len());
        let mut x = x0.clone();
        for uk in u {
            if uk.len() != self.n_inputs() {
                return Err(Error::Dimension(format!(
                    "input sample has {} entries, system has {} inputs",
                    uk.len(),
                    self.n_inputs()
                )));
            }
            outputs.push(&self.c * &x + &self.d * uk);
            states.push(x.clone());
            x = &self.a * &x + &self.b * uk;
        }
        states.push(x);
        Ok((states, outputs))
    }

    /// First `len` impulse-response samples of a SISO system.
    pub fn impulse_response(&self, len: usize) -> Result<Vec<f64>> {
        if !self.is_siso() {
            return Err(Error::Dimension("impulse_response requires SISO".into()));
        }
        let mut u = vec![DVector::zeros(1); len];
        if len > 0 {
            u[0][0] = 1.0;
        }
        let (_, y) = self.simulate(&u, &DVector::zeros(self.order()))?;
        Ok(y.iter().map(|yk| yk[0]).collect())
    }

    /// Rough conditioning estimate of the stacked data `[A B; C D]`: ratio of
    /// the largest to the smallest nonzero row/column 1-norm.
    pub fn scaling_spread(&self) -> f64 {
        let n = self.order();
        let stacked = self.stacked_data();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..n {
            let r: f64 = stacked.row(i).iter().map(|v| v.abs()).sum();
            let c: f64 = stacked.column(i).iter().map(|v| v.abs()).sum();
            for m in [r, c] {
                if m > 0.0 {
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
            }
        }
        if hi == 0.0 {
            1.0
        } else {
            hi / lo.max(f64::MIN_POSITIVE)
        }
    }

    fn stacked_data(&self) -> DMatrix<f64> {
        let n = self.order();
        let (ny, nu) = (self.n_outputs(), self.n_inputs());
        let mut s = DMatrix::zeros(n + ny, n + nu);
        s.view_mut((0, 0), (n, n)).copy_from(&self.a);
        s.view_mut((0, n), (n, nu)).copy_from(&self.b);
        s.view_mut((n, 0), (ny, n)).copy_from(&self.c);
        s.view_mut((n, n), (ny, nu)).copy_from(&self.d);
        s
    }

    /// Diagonal similarity scaling (Osborne-style, powers of two) that
    /// equalizes row and column norms of the stacked data. Returns the
    /// rescaled realization and the diagonal `d` with `A' = D^-1 A D`,
    /// `B' = D^-1 B`, `C' = C D`. The input-output map is unchanged.
    pub fn balanced(&self) -> (StateSpace, DVector<f64>) {
        let n = self.order();
        let mut d = DVector::from_element(n, 1.0);
        if n == 0 {
            return (self.clone(), d);
        }
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        let mut c = self.c.clone();
        for _ in 0..24 {
            let mut changed = false;
            for i in 0..n {
                let mut row: f64 = a.row(i).iter().map(|v| v.abs()).sum::<f64>()
                    + b.row(i).iter().map(|v| v.abs()).sum::<f64>();
                let mut col: f64 = a.column(i).iter().map(|v| v.abs()).sum::<f64>()
                    + c.column(i).iter().map(|v| v.abs()).sum::<f64>();
                row -= a[(i, i)].abs();
                col -= a[(i, i)].abs();
                if row == 0.0 || col == 0.0 {
                    continue;
                }
                // col scales by f, row by 1/f; balance at f = sqrt(row/col)
                let f = (row / col).sqrt().log2().round();
                if f == 0.0 {
                    continue;
                }
                let f = f.clamp(-16.0, 16.0).exp2();
                // x_i -> x_i / f: row i scales by 1/f, column i by f
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
                for j in 0..b.ncols() {
                    b[(i, j)] /= f;
                }
                for j in 0..c.nrows() {
                    c[(j, i)] *= f;
                }
                d[i] *= f;
                changed = true;
            }
            if !changed {
                break;
            }
        }
        (
            StateSpace {
                a,
                b,
                c,
                d: self.d.clone(),
            },
            d,
        )
    }
}

/// Realizes a proper transfer function in controllable companion form.
///
/// The denominator is normalized monic; a constant ratio yields `n_x = 0`.
pub fn tf_to_ss(tf: &TransferFunction) -> Result<StateSpace> {
    let lead = tf.den[0];
    let den: Vec<f64> = tf.den.iter().map(|c| c / lead).collect();
    let n = den.len() - 1;
    // pad numerator to len n+1 with leading zeros, normalized by lead
    let mut num = vec![0.0; n + 1];
    for (i, &c) in tf.num.iter().rev().enumerate() {
        if i <= n {
            num[n - i] = c / lead;
        } else if c != 0.0 {
            return Err(Error::ImproperTransferFunction(
                "numerator degree exceeds denominator degree".into(),
            ));
        }
    }
    let b0 = num[0];
    if n == 0 {
        return Ok(StateSpace::from_gain(DMatrix::from_element(1, 1, b0)));
    }
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = -den[j + 1];
    }
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    let mut b = DMatrix::zeros(n, 1);
    b[(0, 0)] = 1.0;
    let mut c = DMatrix::zeros(1, n);
    for j in 0..n {
        c[(0, j)] = num[j + 1] - b0 * den[j + 1];
    }
    let d = DMatrix::from_element(1, 1, b0);
    StateSpace::new(a, b, c, d)
}

/// Plant description file: `{"tf": {...}}` or `{"ss": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tf: Option<TransferFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ss: Option<SsMatrices>,
}

/// Raw state-space matrices as nested row-major arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SsMatrices {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Dimension(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

impl PlantFile {
    pub fn into_state_space(self) -> Result<StateSpace> {
        match (self.tf, self.ss) {
            (Some(tf), None) => {
                let tf = TransferFunction::new(tf.num, tf.den)?;
                tf_to_ss(&tf)
            }
            (None, Some(ss)) => StateSpace::new(
                rows_to_matrix(&ss.a, "A")?,
                rows_to_matrix(&ss.b, "B")?,
                rows_to_matrix(&ss.c, "C")?,
                rows_to_matrix(&ss.d, "D")?,
            ),
            _ => Err(Error::InvalidArgument(
                "plant file must contain exactly one of \"tf\" or \"ss\"".into(),
            )),
        }
    }
}

/// Loads a plant from a JSON description file.
pub fn load_plant(path: &std::path::Path) -> Result<StateSpace> {
    let text = std::fs::read_to_string(path)?;
    let file: PlantFile = serde_json::from_str(&text)?;
    file.into_state_space()
}

/// The benchmark plant G(z) = (2z + 0.92) / (z^2 - 0.5z).
pub fn benchmark_plant() -> StateSpace {
    tf_to_ss(&TransferFunction::new(vec![2.0, 0.92], vec![1.0, -0.5, 0.0]).unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Long-division oracle: impulse coefficients of num/den in z^-1.
    fn long_division(num: &[f64], den: &[f64], len: usize) -> Vec<f64> {
        let n = den.len() - 1;
        let mut padded = vec![0.0; n + 1];
        let off = n + 1 - num.len();
        padded[off..].copy_from_slice(num);
        let mut h = Vec::with_capacity(len);
        let mut rem = padded;
        for _ in 0..len {
            let q = rem[0] / den[0];
            h.push(q);
            for j in 0..den.len() {
                rem[j] -= q * den[j];
            }
            rem.remove(0);
            rem.push(0.0);
        }
        h
    }

    #[test]
    fn benchmark_realization_matches_long_division() {
        let g = benchmark_plant();
        let h = g.impulse_response(4).unwrap();
        let expect = long_division(&[2.0, 0.92], &[1.0, -0.5, 0.0], 4);
        assert_eq!(expect, vec![0.0, 2.0, 1.92, 0.96]);
        for (a, b) in h.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn static_gain_realization() {
        let tf = TransferFunction::new(vec![3.0], vec![1.0]).unwrap();
        let g = tf_to_ss(&tf).unwrap();
        assert_eq!(g.order(), 0);
        assert_eq!(g.d[(0, 0)], 3.0);
    }

    #[test]
    fn one_state_geometric_series() {
        let tf = TransferFunction::new(vec![1.0, 0.0], vec![1.0, -0.5]).unwrap();
        let g = tf_to_ss(&tf).unwrap();
        assert_eq!(g.order(), 1);
        let h = g.impulse_response(6).unwrap();
        for (k, v) in h.iter().enumerate() {
            assert_abs_diff_eq!(v, &0.5f64.powi(k as i32), epsilon = 1e-12);
        }
    }

    #[test]
    fn improper_rejected() {
        assert!(TransferFunction::new(vec![1.0, 0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TransferFunction::new(vec![1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn scale_zero_and_identity() {
        let g = benchmark_plant();
        let z = g.scale(0.0);
        assert!(z.c.iter().all(|&v| v == 0.0) && z.d.iter().all(|&v| v == 0.0));
        let same = g.scale(1.0);
        assert_eq!(same, g);
        let neg = g.scale(-1.0);
        let h = g.impulse_response(10).unwrap();
        let hn = neg.impulse_response(10).unwrap();
        for (a, b) in h.iter().zip(&hn) {
            assert_abs_diff_eq!(*a, -*b, epsilon = 1e-14);
        }
    }

    #[test]
    fn series_with_identity_and_gain() {
        let g = benchmark_plant();
        let id = StateSpace::from_gain(DMatrix::identity(1, 1));
        let gi = id.series(&g).unwrap();
        assert_eq!(
            gi.impulse_response(8).unwrap(),
            g.impulse_response(8).unwrap()
        );
        let twice = g
            .series(&StateSpace::from_gain(DMatrix::from_element(1, 1, 2.0)))
            .unwrap();
        let h = g.impulse_response(8).unwrap();
        let h2 = twice.impulse_response(8).unwrap();
        for (a, b) in h.iter().zip(&h2) {
            assert_abs_diff_eq!(2.0 * a, *b, epsilon = 1e-13);
        }
    }

    #[test]
    fn series_state_count() {
        let s1 = tf_to_ss(&TransferFunction::new(vec![1.0], vec![1.0, -0.3]).unwrap()).unwrap();
        let s2 = tf_to_ss(&TransferFunction::new(vec![1.0], vec![1.0, 0.1]).unwrap()).unwrap();
        assert_eq!(s1.series(&s2).unwrap().order(), 2);
    }

    #[test]
    fn series_dimension_mismatch() {
        let g = benchmark_plant();
        let two_in = StateSpace::from_gain(DMatrix::identity(2, 2));
        assert!(g.series(&two_in).is_err());
    }

    #[test]
    fn simulate_impulse_one_state() {
        let sys = StateSpace::new(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let h = sys.impulse_response(5).unwrap();
        assert_eq!(h[0], 0.0);
        for k in 1..5 {
            assert_abs_diff_eq!(h[k], 0.5f64.powi(k as i32 - 1), epsilon = 1e-15);
        }
    }

    #[test]
    fn simulate_zero_is_exactly_zero() {
        let g = benchmark_plant();
        let u = vec![DVector::zeros(1); 20];
        let (xs, ys) = g.simulate(&u, &DVector::zeros(2)).unwrap();
        assert_eq!(xs.len(), 21);
        assert_eq!(ys.len(), 20);
        assert!(xs.iter().all(|x| x.iter().all(|&v| v == 0.0)));
        assert!(ys.iter().all(|y| y.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn schur_predicate() {
        let stable = StateSpace::new(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        assert!(stable.is_schur());
        let marginal = StateSpace::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        assert!(!marginal.is_schur());
    }

    #[test]
    fn benchmark_plant_is_schur() {
        // characteristic polynomial z^2 - 0.5 z has roots {0.5, 0}
        let g = benchmark_plant();
        assert!(g.is_schur());
        assert_abs_diff_eq!(g.spectral_radius(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn balanced_preserves_io_map() {
        let mut g = benchmark_plant();
        g.c *= 221.0; // lopsided scaling
        let (gb, _) = g.balanced();
        let h = g.impulse_response(20).unwrap();
        let hb = gb.impulse_response(20).unwrap();
        for (a, b) in h.iter().zip(&hb) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9 * (1.0 + a.abs()));
        }
        assert!(gb.scaling_spread() <= g.scaling_spread());
    }

    #[test]
    fn plant_file_round_trip() {
        let json = r#"{"tf": {"num": [2.0, 0.92], "den": [1.0, -0.5, 0.0]}}"#;
        let plant: PlantFile = serde_json::from_str(json).unwrap();
        let g = plant.into_state_space().unwrap();
        assert_eq!(g, benchmark_plant());

        let json = r#"{"ss": {"A": [[0.5]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]]}}"#;
        let plant: PlantFile = serde_json::from_str(json).unwrap();
        assert_eq!(plant.into_state_space().unwrap().order(), 1);
    }

    #[test]
    fn plant_file_rejects_bad_shapes() {
        // exactly one of tf/ss is required
        let neither: PlantFile = serde_json::from_str("{}").unwrap();
        assert!(neither.into_state_space().is_err());
        let both: PlantFile = serde_json::from_str(
            r#"{"tf": {"num": [1.0], "den": [1.0]},
                "ss": {"A": [[0.0]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]]}}"#,
        )
        .unwrap();
        assert!(both.into_state_space().is_err());
        // ragged matrix rows
        let ragged: PlantFile = serde_json::from_str(
            r#"{"ss": {"A": [[0.5, 0.0], [1.0]], "B": [[1.0], [0.0]],
                "C": [[1.0, 0.0]], "D": [[0.0]]}}"#,
        )
        .unwrap();
        assert!(ragged.into_state_space().is_err());
    }

    proptest! {
        #[test]
        fn realization_matches_long_division(
            den_tail in proptest::collection::vec(-0.9f64..0.9, 1..5),
            num in proptest::collection::vec(-2.0f64..2.0, 1..6),
        ) {
            // build a stable-ish monic denominator so responses stay bounded
            let mut den = vec![1.0];
            den.extend(den_tail.iter().map(|c| c / den_tail.len() as f64));
            prop_assume!(num.len() <= den.len());
            let tf = TransferFunction::new(num.clone(), den.clone()).unwrap();
            let sys = tf_to_ss(&tf).unwrap();
            let h = sys.impulse_response(50).unwrap();
            let oracle = long_division(&num, &den, 50);
            for (a, b) in h.iter().zip(&oracle) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn series_composes_io_maps(
            u in proptest::collection::vec(-1.0f64..1.0, 1..30),
            p1 in -0.9f64..0.9,
            p2 in -0.9f64..0.9,
        ) {
            let s1 = tf_to_ss(&TransferFunction::new(vec![1.0, 0.3], vec![1.0, -p1]).unwrap()).unwrap();
            let s2 = tf_to_ss(&TransferFunction::new(vec![0.7, 0.0], vec![1.0, -p2]).unwrap()).unwrap();
            let cascade = s1.series(&s2).unwrap();
            let uvec: Vec<_> = u.iter().map(|&v| DVector::from_element(1, v)).collect();
            let (_, y_direct) = cascade.simulate(&uvec, &DVector::zeros(cascade.order())).unwrap();
            let (_, mid) = s1.simulate(&uvec, &DVector::zeros(s1.order())).unwrap();
            let (_, y_chain) = s2.simulate(&mid, &DVector::zeros(s2.order())).unwrap();
            for (a, b) in y_direct.iter().zip(&y_chain) {
                prop_assert!((a[0] - b[0]).abs() <= 1e-12 * (1.0 + b[0].abs()));
            }
        }
    }
}
