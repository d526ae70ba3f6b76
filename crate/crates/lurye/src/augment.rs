//! FIR filter and plant augmentation.
//!
//! The filter has two scalar inputs `(v, w)` and `2N + 2` outputs
//!
//! ```text
//!     r(k) = [v(k), ..., v(k-N), w(k), ..., w(k-N)]
//! ```
//!
//! realized by two independent length-`N` shift registers (v-chain first,
//! then w-chain), so the output ordering above is literal. Zero initial
//! conditions encode `v(j) = w(j) = 0` for `j < 0`. The augmented system
//! feeds the plant output and its own input through the filter:
//! `Ghat = Psi_N * [G; 1]`, a single-input system producing `r`.

use nalgebra::{DMatrix, DVector};

use crate::lti::StateSpace;
use crate::{Error, Result};

/// How the multiplier window is realized on top of the plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentationKind {
    /// Sliding window via the FIR filter: scalar input, per-step recursion.
    Filter,
    /// Block lifting: the plant advanced `window` steps at a time, with the
    /// stacked window as a vector input.
    BlockLift,
}

/// A window-augmented realization with output `r = [v-window; w-window]`,
/// together with the bookkeeping needed to slice its state.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub sys: StateSpace,
    /// Filter horizon N: the window holds `N + 1` samples per signal.
    pub horizon: usize,
    /// Plant state dimension; plant states come first in `sys`.
    pub n_plant: usize,
    pub kind: AugmentationKind,
}

impl AugmentedSystem {
    /// Total state dimension: `n_plant + 2N` for the filter realization,
    /// `n_plant` for a block lift.
    pub fn order(&self) -> usize {
        self.sys.order()
    }

    /// Output dimension `2N + 2`.
    pub fn n_outputs(&self) -> usize {
        self.sys.n_outputs()
    }

    /// Applies a diagonal state rescaling when the realization data is badly
    /// scaled; the input-output map (and hence `r`) is unchanged.
    pub fn balanced(&self) -> (AugmentedSystem, DVector<f64>) {
        let (sys, d) = self.sys.balanced();
        (
            AugmentedSystem {
                sys,
                horizon: self.horizon,
                n_plant: self.n_plant,
                kind: self.kind,
            },
            d,
        )
    }

    /// Window length `N + 1`.
    pub fn window(&self) -> usize {
        self.horizon + 1
    }
}

/// Builds the 2-input, `(2N+2)`-output FIR filter.
///
/// Inputs are `(v, w)`; the state is `[v(k-1)..v(k-N), w(k-1)..w(k-N)]`.
pub fn build_psi(n: usize) -> StateSpace {
    let nx = 2 * n;
    let ny = 2 * n + 2;
    let mut a = DMatrix::zeros(nx, nx);
    let mut b = DMatrix::zeros(nx, 2);
    let mut c = DMatrix::zeros(ny, nx);
    let mut d = DMatrix::zeros(ny, 2);
    if n > 0 {
        b[(0, 0)] = 1.0;
        b[(n, 1)] = 1.0;
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
            a[(n + i, n + i - 1)] = 1.0;
        }
    }
    d[(0, 0)] = 1.0;
    d[(n + 1, 1)] = 1.0;
    for j in 1..=n {
        c[(j, j - 1)] = 1.0;
        c[(n + 1 + j, n + j - 1)] = 1.0;
    }
    StateSpace::new(a, b, c, d).expect("filter realization is dimension-consistent")
}

/// Augments a scalar plant with the FIR filter: `Psi_N * [G; 1]`.
pub fn augment(g: &StateSpace, n: usize) -> Result<AugmentedSystem> {
    if !g.is_siso() {
        return Err(Error::Dimension(format!(
            "augmentation requires a scalar plant, got {} inputs / {} outputs",
            g.n_inputs(),
            g.n_outputs()
        )));
    }
    let stacked = g.stack_unity();
    let sys = stacked.series(&build_psi(n))?;
    Ok(AugmentedSystem {
        sys,
        horizon: n,
        n_plant: g.order(),
        kind: AugmentationKind::Filter,
    })
}

/// Block-lifts a scalar plant over windows of `window` samples: the state
/// advances `window` steps per tick, the input is the stacked
/// `[w(kW), ..., w(kW+W-1)]`, and the output is `[v-block; w-block]`.
///
/// With a repeated (elementwise) nonlinearity acting on the block, internal
/// stability of the lifted interconnection gives internal stability of the
/// per-step loop.
pub fn lift_block(g: &StateSpace, window: usize) -> Result<AugmentedSystem> {
    if !g.is_siso() {
        return Err(Error::Dimension(format!(
            "block lifting requires a scalar plant, got {} inputs / {} outputs",
            g.n_inputs(),
            g.n_outputs()
        )));
    }
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let n = g.order();
    let w = window;
    // powers A^0 .. A^W
    let mut powers = Vec::with_capacity(w + 1);
    powers.push(DMatrix::identity(n, n));
    for i in 0..w {
        powers.push(&powers[i] * &g.a);
    }
    let a = powers[w].clone();
    let mut b = DMatrix::zeros(n, w);
    for j in 0..w {
        b.view_mut((0, j), (n, 1))
            .copy_from(&(&powers[w - 1 - j] * &g.b));
    }
    // outputs [v-block; w-block]: v(kW+i) = C A^i x + sum_{j<i} C A^{i-j-1} B w_j + D w_i
    let mut c = DMatrix::zeros(2 * w, n);
    let mut d = DMatrix::zeros(2 * w, w);
    for i in 0..w {
        c.view_mut((i, 0), (1, n)).copy_from(&(&g.c * &powers[i]));
        for j in 0..i {
            let markov = (&g.c * &powers[i - j - 1] * &g.b)[(0, 0)];
            d[(i, j)] = markov;
        }
        d[(i, i)] = g.d[(0, 0)];
        d[(w + i, i)] = 1.0;
    }
    Ok(AugmentedSystem {
        sys: StateSpace::new(a, b, c, d)?,
        horizon: w - 1,
        n_plant: n,
        kind: AugmentationKind::BlockLift,
    })
}

/// Sufficient well-posedness check for the loop `v = C x + D phi(v)` with a
/// 1-Lipschitz nonlinearity: unique solvability holds whenever `|D| < 1`
/// (contraction; `D = 0` makes the equation explicit). Returns false when the
/// condition fails — an inconclusive answer, not a proof of ill-posedness.
pub fn check_well_posed(g: &StateSpace) -> bool {
    g.is_siso() && g.d[(0, 0)].abs() < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::benchmark_plant;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn drive(sys: &StateSpace, v: &[f64], w: &[f64]) -> Vec<DVector<f64>> {
        let u: Vec<_> = v
            .iter()
            .zip(w)
            .map(|(&a, &b)| DVector::from_vec(vec![a, b]))
            .collect();
        let (_, r) = sys.simulate(&u, &DVector::zeros(sys.order())).unwrap();
        r
    }

    /// Definitional r(k): delayed samples with zero padding before k = 0.
    fn r_expected(v: &[f64], w: &[f64], n: usize, k: usize) -> Vec<f64> {
        let at = |s: &[f64], j: isize| if j < 0 { 0.0 } else { s[j as usize] };
        let mut r = Vec::with_capacity(2 * n + 2);
        for i in 0..=n {
            r.push(at(v, k as isize - i as isize));
        }
        for i in 0..=n {
            r.push(at(w, k as isize - i as isize));
        }
        r
    }

    #[test]
    fn psi_zero_horizon_is_static_identity() {
        let psi = build_psi(0);
        assert_eq!(psi.order(), 0);
        let r = drive(&psi, &[3.0, -1.0], &[0.5, 2.0]);
        assert_eq!(r[0].as_slice(), &[3.0, 0.5]);
        assert_eq!(r[1].as_slice(), &[-1.0, 2.0]);
    }

    #[test]
    fn psi_one_step_shift() {
        let psi = build_psi(1);
        assert_eq!(psi.order(), 2);
        let r = drive(&psi, &[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(r[0].as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r[1].as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn psi_matches_direct_indexing() {
        let n = 3;
        let psi = build_psi(n);
        let v: Vec<f64> = (0..10).map(|k| ((k * 7 + 3) % 11) as f64 - 5.0).collect();
        let w: Vec<f64> = (0..10).map(|k| ((k * 5 + 1) % 13) as f64 - 6.0).collect();
        let r = drive(&psi, &v, &w);
        for k in 0..10 {
            assert_eq!(r[k].as_slice(), r_expected(&v, &w, n, k).as_slice());
        }
    }

    #[test]
    fn psi_state_matrix_nilpotent() {
        for n in 0..=5 {
            let psi = build_psi(n);
            let mut p = DMatrix::<f64>::identity(psi.order(), psi.order());
            for _ in 0..n.max(1) {
                p = &p * &psi.a;
            }
            assert!(p.iter().all(|&x| x == 0.0), "A^{n} must vanish");
        }
    }

    #[test]
    fn augment_static_gain() {
        let g = StateSpace::from_gain(DMatrix::from_element(1, 1, 4.0));
        let aug = augment(&g, 0).unwrap();
        assert_eq!(aug.order(), 0);
        assert_eq!(aug.sys.d.as_slice(), &[4.0, 1.0]);
    }

    #[test]
    fn augment_dimensions() {
        let aug = augment(&benchmark_plant(), 1).unwrap();
        assert_eq!(aug.order(), 4);
        assert_eq!(aug.n_outputs(), 4);
        assert_eq!(aug.n_plant, 2);
        for n in 0..=4 {
            let aug = augment(&benchmark_plant(), n).unwrap();
            assert_eq!(aug.order(), 2 + 2 * n);
        }
    }

    #[test]
    fn augment_rejects_mimo() {
        let g = StateSpace::from_gain(DMatrix::identity(2, 2));
        assert!(augment(&g, 1).is_err());
    }

    #[test]
    fn augmented_output_equals_delayed_signals() {
        let g = benchmark_plant();
        let n = 2;
        let aug = augment(&g, n).unwrap();
        let w: Vec<f64> = (0..12).map(|k| (k as f64 * 0.37).sin()).collect();
        let u: Vec<_> = w.iter().map(|&x| DVector::from_element(1, x)).collect();
        let (_, r) = aug.sys.simulate(&u, &DVector::zeros(aug.order())).unwrap();
        let (_, v_out) = g.simulate(&u, &DVector::zeros(g.order())).unwrap();
        let v: Vec<f64> = v_out.iter().map(|y| y[0]).collect();
        for k in 0..12 {
            let expect = r_expected(&v, &w, n, k);
            for (a, b) in r[k].iter().zip(&expect) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lift_window_one_matches_unity_stack() {
        let g = benchmark_plant();
        let lifted = lift_block(&g, 1).unwrap();
        let stacked = g.stack_unity();
        assert_eq!(lifted.sys, stacked);
        assert_eq!(lifted.horizon, 0);
        assert_eq!(lifted.kind, AugmentationKind::BlockLift);
    }

    #[test]
    fn lifted_blocks_reproduce_per_step_signals() {
        let g = benchmark_plant();
        let w_len = 3;
        let lifted = lift_block(&g, w_len).unwrap();
        let input: Vec<f64> = (0..12).map(|k| (k as f64 * 0.53).cos()).collect();
        // per-step simulation
        let u: Vec<_> = input.iter().map(|&x| DVector::from_element(1, x)).collect();
        let x0 = DVector::from_vec(vec![0.3, -0.7]);
        let (xs, vs) = g.simulate(&u, &x0).unwrap();
        // block simulation
        let blocks: Vec<_> = input
            .chunks(w_len)
            .map(DVector::from_column_slice)
            .collect();
        let (bx, by) = lifted.sys.simulate(&blocks, &x0).unwrap();
        for (kappa, y) in by.iter().enumerate() {
            for i in 0..w_len {
                let k = kappa * w_len + i;
                assert_abs_diff_eq!(y[i], vs[k][0], epsilon = 1e-12);
                assert_abs_diff_eq!(y[w_len + i], input[k], epsilon = 1e-15);
            }
            assert_abs_diff_eq!(
                (&bx[kappa] - &xs[kappa * w_len]).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn lift_static_gain() {
        let g = StateSpace::from_gain(DMatrix::from_element(1, 1, 2.0));
        let lifted = lift_block(&g, 2).unwrap();
        assert_eq!(lifted.order(), 0);
        assert_eq!(lifted.sys.n_inputs(), 2);
        assert_eq!(lifted.sys.n_outputs(), 4);
        assert_eq!(lifted.sys.d[(0, 0)], 2.0);
        assert_eq!(lifted.sys.d[(1, 1)], 2.0);
        assert_eq!(lifted.sys.d[(1, 0)], 0.0);
    }

    #[test]
    fn well_posedness_conditions() {
        assert!(check_well_posed(&benchmark_plant())); // D = 0
        let half = StateSpace::from_gain(DMatrix::from_element(1, 1, 0.5));
        assert!(check_well_posed(&half));
        let two = StateSpace::from_gain(DMatrix::from_element(1, 1, 2.0));
        assert!(!check_well_posed(&two));
    }

    proptest! {
        #[test]
        fn psi_output_is_definitional(
            n in 0usize..5,
            v in proptest::collection::vec(-3.0f64..3.0, 1..15),
            w in proptest::collection::vec(-3.0f64..3.0, 1..15),
        ) {
            let len = v.len().min(w.len());
            let psi = build_psi(n);
            let r = drive(&psi, &v[..len], &w[..len]);
            for k in 0..len {
                let expect = r_expected(&v[..len], &w[..len], n, k);
                for (a, b) in r[k].iter().zip(&expect) {
                    prop_assert_eq!(*a, *b);
                }
            }
        }
    }
}
