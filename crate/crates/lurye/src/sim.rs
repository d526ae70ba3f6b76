//! Time-domain validation: nonlinear closed-loop simulation, pointwise ReLU
//! checks, dissipation-inequality verification along trajectories, and
//! randomized falsification probes.
//!
//! Simulation runs on the augmented realization so the trace carries the
//! filter output `r` and the augmented state needed to evaluate the storage
//! function of a certificate.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::augment::{augment, check_well_posed, AugmentedSystem};
use crate::certify::Certificate;
use crate::lti::StateSpace;
use crate::multipliers::MultiplierSpec;
use crate::{Error, Result};

/// Scalar nonlinearities used in simulation and property sampling. All of
/// them fix zero and have slopes in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Phi {
    Relu,
    Identity,
    /// `phi(v) = g v` with `g` in `[0, 1]`.
    LinearGain(f64),
    /// `clamp(v, -limit, limit)`.
    Saturation(f64),
    /// Monotone piecewise-linear function anchored at zero: segment widths
    /// and slopes for `v > 0` and `v < 0`, with a tail slope each side.
    PiecewiseLinear {
        pos: Vec<(f64, f64)>,
        neg: Vec<(f64, f64)>,
        pos_tail: f64,
        neg_tail: f64,
    },
}

impl Phi {
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Phi::Relu => v.max(0.0),
            Phi::Identity => v,
            Phi::LinearGain(g) => g * v,
            Phi::Saturation(limit) => v.clamp(-limit, *limit),
            Phi::PiecewiseLinear {
                pos,
                neg,
                pos_tail,
                neg_tail,
            } => {
                let (segments, tail, x) = if v >= 0.0 {
                    (pos, pos_tail, v)
                } else {
                    (neg, neg_tail, -v)
                };
                let mut remaining = x;
                let mut acc = 0.0;
                for &(width, slope) in segments {
                    if remaining <= width {
                        acc += slope * remaining;
                        remaining = 0.0;
                        break;
                    }
                    acc += slope * width;
                    remaining -= width;
                }
                acc += tail * remaining;
                if v >= 0.0 {
                    acc
                } else {
                    -acc
                }
            }
        }
    }

    /// Samples a random monotone piecewise-linear function with slopes in
    /// `[0, 1]` and `phi(0) = 0`.
    pub fn sample_slope_restricted<R: Rng>(rng: &mut R) -> Phi {
        let side = |rng: &mut R| -> Vec<(f64, f64)> {
            (0..rng.random_range(1..4usize))
                .map(|_| (rng.random_range(0.1..2.0), rng.random_range(0.0..1.0)))
                .collect()
        };
        Phi::PiecewiseLinear {
            pos: side(rng),
            neg: side(rng),
            pos_tail: rng.random_range(0.0..1.0),
            neg_tail: rng.random_range(0.0..1.0),
        }
    }
}

/// Pointwise ReLU output and its defining residuals
/// `(w (w - v), min(w, 0), min(w - v, 0))`, all zero for an exact ReLU.
pub fn relu_pointwise_checks(v: f64) -> (f64, [f64; 3]) {
    let w = v.max(0.0);
    (w, [w * (w - v), w.min(0.0), (w - v).min(0.0)])
}

/// Closed-loop trajectories of the Lurye loop, recorded on the augmented
/// realization.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    /// Plant states, `steps + 1` entries.
    pub x: Vec<DVector<f64>>,
    /// Augmented states (plant + filter registers), `steps + 1` entries.
    pub x_aug: Vec<DVector<f64>>,
    /// Loop signals, `steps` entries each, with `w(k) = phi(v(k))`.
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// Filter outputs, `steps` entries.
    pub r: Vec<DVector<f64>>,
    /// Storage-function values along `x_aug`, filled by
    /// [`SimulationTrace::with_storage`].
    pub storage: Option<Vec<f64>>,
}

impl SimulationTrace {
    pub fn steps(&self) -> usize {
        self.v.len()
    }

    /// Evaluates `V(x) = x' P x` along the augmented states.
    pub fn with_storage(mut self, p: &DMatrix<f64>) -> Self {
        self.storage = Some(
            self.x_aug
                .iter()
                .map(|x| (x.transpose() * p * x)[(0, 0)])
                .collect(),
        );
        self
    }

    /// CSV dump `k,x...,v,w,V` (signals rows only).
    pub fn to_csv(&self) -> String {
        let nx = self.x.first().map_or(0, |x| x.len());
        let mut out = String::from("k");
        for i in 0..nx {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",v,w,V\n");
        for k in 0..self.steps() {
            out.push_str(&k.to_string());
            for i in 0..nx {
                out.push_str(&format!(",{:.12e}", self.x[k][i]));
            }
            let v_val = self
                .storage
                .as_ref()
                .map_or(String::from(""), |s| format!("{:.12e}", s[k]));
            out.push_str(&format!(",{:.12e},{:.12e},{v_val}\n", self.v[k], self.w[k]));
        }
        out
    }
}

/// Simulates the loop `v = -alpha (G w)`, `w = phi(v)` for `steps` steps
/// from plant state `x0` (filter registers start at zero).
///
/// A nonzero loop feed-through is resolved by fixed-point iteration, valid
/// under the contraction well-posedness condition.
pub fn simulate_loop(
    g: &StateSpace,
    alpha: f64,
    phi: &Phi,
    x0: &DVector<f64>,
    steps: usize,
    horizon: usize,
) -> Result<SimulationTrace> {
    let loop_plant = g.scale(-alpha);
    if !check_well_posed(&loop_plant) {
        return Err(Error::LoopNotConvergent(format!(
            "loop feed-through {} is not a contraction",
            loop_plant.d[(0, 0)]
        )));
    }
    let aug = augment(&loop_plant, horizon)?;
    simulate_loop_augmented(&aug, phi, x0, steps)
}

/// Same as [`simulate_loop`] but on an already-built augmented realization
/// (so certificates can be checked on the exact realization they were
/// issued for). For a block-lifted realization `steps` counts blocks and
/// the trace's `v`, `w` collect the flattened per-step signals, while
/// `x`, `x_aug`, `r` are block-indexed.
pub fn simulate_loop_augmented(
    aug: &AugmentedSystem,
    phi: &Phi,
    x0: &DVector<f64>,
    steps: usize,
) -> Result<SimulationTrace> {
    if x0.len() != aug.n_plant {
        return Err(Error::Dimension(format!(
            "x0 has {} entries, plant has {} states",
            x0.len(),
            aug.n_plant
        )));
    }
    let n = aug.order();
    let nu = aug.sys.n_inputs();
    let sys = &aug.sys;
    // the nonlinearity channel reads the first nu outputs
    let c_v = sys.c.rows(0, nu).clone_owned();
    let d_v = sys.d.view((0, 0), (nu, nu)).clone_owned();

    let mut x = DVector::zeros(n);
    x.rows_mut(0, aug.n_plant).copy_from(x0);

    let mut trace = SimulationTrace {
        x: Vec::with_capacity(steps + 1),
        x_aug: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps * nu),
        w: Vec::with_capacity(steps * nu),
        r: Vec::with_capacity(steps),
        storage: None,
    };

    for _ in 0..steps {
        let cv = &c_v * &x;
        // solve v = cv + D_v phi(v) componentwise; a sequential pass is
        // exact for the strictly lower-triangular block-lift structure and
        // iterating handles a contraction feed-through
        let mut v: DVector<f64> = DVector::zeros(nu);
        let mut w: DVector<f64> = DVector::zeros(nu);
        let mut converged = false;
        for _ in 0..200 {
            let mut change: f64 = 0.0;
            for i in 0..nu {
                let mut vi: f64 = cv[i];
                for j in 0..nu {
                    if d_v[(i, j)] != 0.0 {
                        vi += d_v[(i, j)] * w[j];
                    }
                }
                change = change.max((vi - v[i]).abs() / (1.0 + vi.abs()));
                v[i] = vi;
                w[i] = phi.eval(vi);
            }
            if change <= 1e-12 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::LoopNotConvergent(format!(
                "fixed-point iteration stalled at v = {:?}",
                v.as_slice()
            )));
        }
        let r = &sys.c * &x + &sys.d * &w;
        trace.x.push(x.rows(0, aug.n_plant).clone_owned());
        trace.x_aug.push(x.clone());
        for i in 0..nu {
            trace.v.push(v[i]);
            trace.w.push(w[i]);
        }
        trace.r.push(r);
        x = &sys.a * &x + &sys.b * &w;
    }
    trace.x.push(x.rows(0, aug.n_plant).clone_owned());
    trace.x_aug.push(x);
    Ok(trace)
}

/// Maximum over the trace of the per-step dissipation left-hand side
///
/// ```text
///     V(x(k+1)) - V(x(k)) + eps * x(k)'x(k) + r(k)' M r(k)
/// ```
///
/// which a valid certificate keeps nonpositive (up to solver tolerance)
/// along every closed-loop trajectory.
pub fn check_dissipation(
    aug: &AugmentedSystem,
    p: &DMatrix<f64>,
    spec: &MultiplierSpec,
    theta: &[f64],
    trace: &SimulationTrace,
    eps: f64,
) -> f64 {
    assert_eq!(aug.n_outputs(), spec.dim(), "multiplier size mismatch");
    assert_eq!(p.nrows(), aug.order(), "storage matrix size mismatch");
    let m = spec.matrix(theta);
    let storage = |x: &DVector<f64>| (x.transpose() * p * x)[(0, 0)];
    let mut worst = f64::NEG_INFINITY;
    for k in 0..trace.r.len() {
        let xk = &trace.x_aug[k];
        let lhs = storage(&trace.x_aug[k + 1]) - storage(xk)
            + eps * xk.norm_squared()
            + (trace.r[k].transpose() * &m * &trace.r[k])[(0, 0)];
        worst = worst.max(lhs);
    }
    if trace.r.is_empty() {
        0.0
    } else {
        worst
    }
}

/// Dissipation check for a certificate: simulates the certified loop from
/// `x0` and evaluates the per-step inequality with `eps` equal to the
/// strictness witness.
pub fn check_certificate_dissipation(
    cert: &Certificate,
    x0: &DVector<f64>,
    steps: usize,
) -> Result<f64> {
    let trace = simulate_loop_augmented(&cert.aug, &Phi::Relu, x0, steps)?;
    Ok(check_dissipation(
        &cert.aug,
        &cert.witness.p,
        &cert.spec,
        &cert.witness.theta,
        &trace,
        cert.witness.strictness,
    ))
}

/// Simulates the ReLU loop from `trials` random unit-norm initial states and
/// reports the worst observed growth `max_k ||x(k)|| / ||x0||`. Evidence
/// only — never a proof of instability.
pub fn falsification_probe(
    g: &StateSpace,
    alpha: f64,
    trials: usize,
    steps: usize,
    seed: u64,
) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = g.order();
    if n == 0 {
        return Ok(1.0);
    }
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let mut x0 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
        let norm = x0.norm();
        if norm == 0.0 {
            continue;
        }
        x0 /= norm;
        let trace = simulate_loop(g, alpha, &Phi::Relu, &x0, steps, 0)?;
        for x in &trace.x {
            worst = worst.max(x.norm());
        }
    }
    Ok(worst)
}
