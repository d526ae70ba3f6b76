//! Top-level stability certification and margin computation.
//!
//! A plant `G` sits in negative feedback with gain `alpha` and a scalar
//! nonlinearity: the plant seen by the nonlinearity is `-alpha * G`, i.e.
//! `v = -alpha (G w)`, `w = phi(v)`. [`certify`] augments this loop plant
//! with the FIR filter, assembles the multiplier-class LMI and solves it;
//! a feasible, independently re-verified solution certifies internal
//! stability for every nonlinearity the chosen class covers (ReLU for the
//! `relu-*` classes, all `[0,1]` slope-restricted functions for `slope-*`).
//!
//! [`margin`] bisects over `alpha` to find the largest certified gain, and
//! [`margin_table`] sweeps all four classes over a horizon range.

use serde::{Deserialize, Serialize};

use crate::augment::{augment, check_well_posed, lift_block, AugmentedSystem};
use crate::lti::StateSpace;
use crate::multipliers::{make_spec, MultiplierKind, MultiplierSpec};
use crate::sdp::{feasibility, FeasibilityResult, SolveOptions, SolveStatus, SolverBackend};
use crate::{Error, Result};

/// A certification method: multiplier class plus lift size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Method {
    pub kind: MultiplierKind,
    /// Lift size N as reported in margin tables (window of N samples under
    /// the default convention).
    pub horizon: usize,
}

impl Method {
    pub fn new(kind: MultiplierKind, horizon: usize) -> Self {
        Self { kind, horizon }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(N={})", self.kind, self.horizon)
    }
}

/// How the reported lift size `N` maps onto a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HorizonConvention {
    /// `N` counts stacked samples, matching the reference margin tables:
    /// dynamic classes run the FIR filter with horizon `N - 1`, static
    /// classes block-lift the plant over windows of `N` samples.
    #[default]
    LiftSize,
    /// `N` is the FIR filter horizon directly (windows of `N + 1` samples);
    /// static classes use the same sliding-window filter with full free
    /// matrices instead of block lifting. Strictly less conservative for
    /// the static classes, but it does not reproduce the reference tables.
    FilterHorizon,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CertifyOptions {
    pub convention: HorizonConvention,
    pub solve: SolveOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedStable,
    Inconclusive,
}

/// Outcome of one certification run. Keeps the augmented realization and
/// multiplier class actually used so the witness can be re-verified and
/// checked along simulated trajectories.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub method: Method,
    pub alpha: f64,
    pub verdict: Verdict,
    pub well_posed: bool,
    pub witness: FeasibilityResult,
    pub aug: AugmentedSystem,
    pub spec: MultiplierSpec,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedStable
    }

    /// Multiplier matrix of the witness.
    pub fn multiplier_matrix(&self) -> nalgebra::DMatrix<f64> {
        self.spec.matrix(&self.witness.theta)
    }
}

/// Builds the window realization for a method under a convention.
pub fn build_augmentation(
    loop_plant: &StateSpace,
    method: Method,
    convention: HorizonConvention,
) -> Result<AugmentedSystem> {
    match convention {
        HorizonConvention::LiftSize => {
            if method.horizon == 0 {
                return Err(Error::InvalidArgument(
                    "lift size must be at least 1".into(),
                ));
            }
            if method.kind.is_dynamic() {
                augment(loop_plant, method.horizon - 1)
            } else {
                lift_block(loop_plant, method.horizon)
            }
        }
        HorizonConvention::FilterHorizon => augment(loop_plant, method.horizon),
    }
}

/// Builds the loop plant `-alpha G`, augments it, and solves the
/// multiplier-class feasibility problem.
pub fn certify(
    g: &StateSpace,
    method: Method,
    alpha: f64,
    opts: &CertifyOptions,
    backend: &dyn SolverBackend,
) -> Result<Certificate> {
    if !g.is_siso() {
        return Err(Error::Dimension("plant must be scalar".into()));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    let loop_plant = g.scale(-alpha);
    let well_posed = check_well_posed(&loop_plant);
    let mut aug = build_augmentation(&loop_plant, method, opts.convention)?;
    if aug.sys.scaling_spread() > opts.solve.balance_threshold {
        aug = aug.balanced().0;
    }
    let spec = make_spec(method.kind, aug.horizon);
    let witness = feasibility(&aug, &spec, &opts.solve, backend)?;
    let verdict = if witness.feasible && well_posed {
        Verdict::CertifiedStable
    } else {
        Verdict::Inconclusive
    };
    Ok(Certificate {
        method,
        alpha,
        verdict,
        well_posed,
        witness,
        aug,
        spec,
    })
}

/// One probe of the bisection log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginProbe {
    pub alpha: f64,
    pub certified: bool,
    pub strictness: f64,
    pub numerical_trouble: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginResult {
    pub method: Method,
    /// Largest certified gain found.
    pub alpha_lo: f64,
    /// Smallest non-certified gain probed (equals the cap when it was
    /// certified).
    pub alpha_hi: f64,
    /// Bisection steps taken (excluding the two bracket probes).
    pub iterations: usize,
    pub cap_reached: bool,
    /// True unless even `alpha = 0` failed to certify.
    pub lo_certified: bool,
    pub log: Vec<MarginProbe>,
}

impl MarginResult {
    pub fn margin(&self) -> f64 {
        self.alpha_lo
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MarginOptions {
    /// Initial upper bracket for the bisection.
    pub alpha_hi: f64,
    /// Stop when `hi - lo <= tol * (1 + hi)`.
    pub tol: f64,
    pub certify: CertifyOptions,
}

impl Default for MarginOptions {
    fn default() -> Self {
        Self {
            alpha_hi: 400.0,
            tol: 1e-3,
            certify: CertifyOptions::default(),
        }
    }
}

/// Bisection for the stability margin. Numerical trouble at a probe counts
/// as "not certified", so the returned margin is a lower bound.
pub fn margin(
    g: &StateSpace,
    method: Method,
    opts: &MarginOptions,
    backend: &dyn SolverBackend,
) -> Result<MarginResult> {
    if opts.tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut log = Vec::new();
    let mut probe = |alpha: f64| -> Result<bool> {
        let cert = certify(g, method, alpha, &opts.certify, backend)?;
        log.push(MarginProbe {
            alpha,
            certified: cert.is_certified(),
            strictness: cert.witness.strictness,
            numerical_trouble: cert.witness.status == SolveStatus::NumericalTrouble,
        });
        Ok(cert.is_certified())
    };

    let lo_certified = probe(0.0)?;
    if !lo_certified {
        return Ok(MarginResult {
            method,
            alpha_lo: 0.0,
            alpha_hi: 0.0,
            iterations: 0,
            cap_reached: false,
            lo_certified: false,
            log,
        });
    }
    if probe(opts.alpha_hi)? {
        return Ok(MarginResult {
            method,
            alpha_lo: opts.alpha_hi,
            alpha_hi: opts.alpha_hi,
            iterations: 0,
            cap_reached: true,
            lo_certified: true,
            log,
        });
    }

    let mut lo = 0.0;
    let mut hi = opts.alpha_hi;
    let mut iterations = 0;
    while hi - lo > opts.tol * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(MarginResult {
        method,
        alpha_lo: lo,
        alpha_hi: hi,
        iterations,
        cap_reached: false,
        lo_certified: true,
        log,
    })
}

/// One cell of the margin table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginCell {
    pub method: Method,
    pub margin: f64,
    pub iterations: usize,
    pub cap_reached: bool,
    /// Populated when the cell failed outright instead of returning a
    /// bracketing result.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginTable {
    pub cells: Vec<MarginCell>,
}

impl MarginTable {
    pub fn get(&self, kind: MultiplierKind, horizon: usize) -> Option<&MarginCell> {
        self.cells
            .iter()
            .find(|c| c.method.kind == kind && c.method.horizon == horizon)
    }

    /// CSV with header `method,N,margin,iterations,cap_reached`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,N,margin,iterations,cap_reached\n");
        for cell in &self.cells {
            out.push_str(&format!(
                "{},{},{:.6},{},{}\n",
                cell.method.kind,
                cell.method.horizon,
                cell.margin,
                cell.iterations,
                cell.cap_reached
            ));
        }
        out
    }
}

/// Sweeps `methods x horizons`, computing one margin per cell. Cells are
/// independent; `jobs > 1` runs them on that many threads. Per-cell failures
/// are recorded and the sweep continues.
pub fn margin_table(
    g: &StateSpace,
    kinds: &[MultiplierKind],
    horizons: &[usize],
    opts: &MarginOptions,
    jobs: usize,
    backend: &(dyn SolverBackend + Sync),
) -> MarginTable {
    let methods: Vec<Method> = kinds
        .iter()
        .flat_map(|&kind| horizons.iter().map(move |&n| Method::new(kind, n)))
        .collect();
    let jobs = jobs.max(1).min(methods.len().max(1));
    let mut cells: Vec<Option<MarginCell>> = vec![None; methods.len()];
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk_index in 0..jobs {
            let methods = &methods;
            let handle = scope.spawn(move || {
                let mut done = Vec::new();
                let mut i = chunk_index;
                while i < methods.len() {
                    let m = methods[i];
                    let cell = match margin(g, m, opts, backend) {
                        Ok(r) => MarginCell {
                            method: m,
                            margin: r.margin(),
                            iterations: r.iterations,
                            cap_reached: r.cap_reached,
                            error: None,
                        },
                        Err(e) => MarginCell {
                            method: m,
                            margin: f64::NAN,
                            iterations: 0,
                            cap_reached: false,
                            error: Some(e.to_string()),
                        },
                    };
                    done.push((i, cell));
                    i += jobs;
                }
                done
            });
            handles.push(handle);
        }
        for handle in handles {
            for (i, cell) in handle.join().expect("margin worker panicked") {
                cells[i] = Some(cell);
            }
        }
    });
    MarginTable {
        cells: cells
            .into_iter()
            .map(|c| c.expect("all cells computed"))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::benchmark_plant;
    use crate::sdp::ipm::InteriorPoint;
    use nalgebra::DMatrix;

    #[test]
    fn alpha_zero_certifies_for_every_class() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        for kind in MultiplierKind::ALL {
            let cert = certify(
                &g,
                Method::new(kind, 1),
                0.0,
                &CertifyOptions::default(),
                &backend,
            )
            .unwrap();
            assert!(cert.is_certified(), "{kind:?} must certify the open loop");
        }
    }

    #[test]
    fn benchmark_examples_at_pinned_gains() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        // margin(relu-dynamic, N=2) is about 1.4553, so alpha = 1.0 certifies
        let cert = certify(
            &g,
            Method::new(MultiplierKind::ReluDynamic, 2),
            1.0,
            &CertifyOptions::default(),
            &backend,
        )
        .unwrap();
        assert!(cert.is_certified());
        // margin(slope-dynamic, N=1) is about 0.6500, so alpha = 0.7 does not
        let cert = certify(
            &g,
            Method::new(MultiplierKind::SlopeDynamic, 1),
            0.7,
            &CertifyOptions::default(),
            &backend,
        )
        .unwrap();
        assert!(!cert.is_certified());
    }

    #[test]
    fn relaxing_p_changes_little_on_benchmark() {
        // dropping P >= 0 gives the input-output comparison variant; for
        // this plant the slope-dynamic margin is unchanged up to bisection
        // resolution
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        let strict = MarginOptions {
            tol: 1e-2,
            ..Default::default()
        };
        let mut relaxed = strict;
        relaxed.certify.solve.require_psd_p = false;
        let m = Method::new(MultiplierKind::SlopeDynamic, 2);
        let a = margin(&g, m, &strict, &backend).unwrap();
        let b = margin(&g, m, &relaxed, &backend).unwrap();
        assert!(
            (a.margin() - b.margin()).abs() <= 0.05,
            "{} vs {}",
            a.margin(),
            b.margin()
        );
    }

    #[test]
    fn lift_size_zero_rejected() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        assert!(certify(
            &g,
            Method::new(MultiplierKind::ReluDynamic, 0),
            0.5,
            &CertifyOptions::default(),
            &backend
        )
        .is_err());
    }

    #[test]
    fn filter_convention_uses_psi_horizon_directly() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        let opts = CertifyOptions {
            convention: HorizonConvention::FilterHorizon,
            ..Default::default()
        };
        // under the filter convention N=1 means psi horizon 1, whose
        // slope-dynamic margin is about 0.909: alpha = 0.7 now certifies
        let cert = certify(
            &g,
            Method::new(MultiplierKind::SlopeDynamic, 1),
            0.7,
            &opts,
            &backend,
        )
        .unwrap();
        assert!(cert.is_certified());
    }

    #[test]
    fn negative_alpha_rejected() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        assert!(certify(
            &g,
            Method::new(MultiplierKind::ReluDynamic, 1),
            -1.0,
            &CertifyOptions::default(),
            &backend
        )
        .is_err());
    }

    #[test]
    fn zero_plant_margin_hits_cap() {
        let zero = StateSpace::from_gain(DMatrix::zeros(1, 1));
        let backend = InteriorPoint::default();
        let opts = MarginOptions::default();
        let r = margin(
            &zero,
            Method::new(MultiplierKind::ReluDynamic, 1),
            &opts,
            &backend,
        )
        .unwrap();
        assert!(r.cap_reached);
        assert_eq!(r.alpha_lo, 400.0);
    }

    #[test]
    fn bisection_log_keeps_bracket_invariant() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        let opts = MarginOptions {
            tol: 1e-2,
            ..Default::default()
        };
        let r = margin(
            &g,
            Method::new(MultiplierKind::SlopeDynamic, 1),
            &opts,
            &backend,
        )
        .unwrap();
        assert!(r.lo_certified);
        assert!(!r.cap_reached);
        assert!(r.alpha_hi - r.alpha_lo <= opts.tol * (1.0 + r.alpha_hi));
        // every probe below alpha_lo certified, every probe above alpha_hi not
        for p in &r.log {
            if p.alpha <= r.alpha_lo {
                assert!(p.certified, "probe at {} should certify", p.alpha);
            }
            if p.alpha >= r.alpha_hi {
                assert!(!p.certified, "probe at {} should not certify", p.alpha);
            }
        }
    }

    #[test]
    fn table_records_cell_failures_and_continues() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        let opts = MarginOptions {
            tol: 1e-2,
            ..Default::default()
        };
        // horizon 0 is invalid under the lift convention: that cell must
        // carry the error while the other cell still computes
        let table = margin_table(
            &g,
            &[MultiplierKind::SlopeDynamic],
            &[0, 1],
            &opts,
            1,
            &backend,
        );
        assert_eq!(table.cells.len(), 2);
        assert!(table.cells[0].error.is_some());
        assert!(table.cells[0].margin.is_nan());
        assert!(table.cells[1].error.is_none());
        assert!(table.cells[1].margin > 0.6);
    }

    #[test]
    fn parallel_table_matches_sequential() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        let opts = MarginOptions {
            tol: 1e-2,
            ..Default::default()
        };
        let kinds = [MultiplierKind::SlopeDynamic, MultiplierKind::ReluStatic];
        let horizons = [1, 2];
        let seq = margin_table(&g, &kinds, &horizons, &opts, 1, &backend);
        let par = margin_table(&g, &kinds, &horizons, &opts, 3, &backend);
        for (a, b) in seq.cells.iter().zip(&par.cells) {
            assert_eq!(a.method, b.method);
            assert_eq!(a.margin, b.margin);
            assert_eq!(a.iterations, b.iterations);
        }
    }

    #[test]
    fn margin_is_deterministic() {
        let g = benchmark_plant();
        let backend = InteriorPoint::default();
        let opts = MarginOptions {
            tol: 1e-2,
            ..Default::default()
        };
        let m = Method::new(MultiplierKind::SlopeDynamic, 1);
        let a = margin(&g, m, &opts, &backend).unwrap();
        let b = margin(&g, m, &opts, &backend).unwrap();
        assert_eq!(a.alpha_lo, b.alpha_lo);
        assert_eq!(a.log.len(), b.log.len());
        for (x, y) in a.log.iter().zip(&b.log) {
            assert_eq!(x.alpha, y.alpha);
            assert_eq!(x.certified, y.certified);
            assert_eq!(x.strictness, y.strictness);
        }
    }
}
