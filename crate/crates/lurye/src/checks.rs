//! Randomized and exhaustive validation batteries.
//!
//! Shared by the `validate` CLI subcommand and the acceptance test suite,
//! so both run exactly the same code. Every battery is deterministic given
//! the seed in [`ValidateConfig`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::augment::build_psi;
use crate::multipliers::{
    build_m_relu_dynamic, build_m_relu_static, build_m_slope_dynamic, build_m_slope_static,
    is_doubly_hyperdominant, is_metzler, relu_toeplitz, toeplitz_sum_oracle, zf_toeplitz,
    DynamicParams, ReluIqcParams, StaticReluParams, StaticSlopeParams, ZfParams,
};
use crate::sim::Phi;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateConfig {
    pub seed: u64,
    /// Random instances per battery.
    pub instances: usize,
    /// Largest filter horizon exercised.
    pub max_horizon: usize,
    /// Largest running-sum endpoint exercised.
    pub max_t0: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            seed: 0x1d5a,
            instances: 200,
            max_horizon: 5,
            max_t0: 12,
        }
    }
}

/// Random admissible Zames-Falb taps.
pub fn random_zf<R: Rng>(rng: &mut R, n: usize) -> ZfParams {
    let mut taps: Vec<f64> = (0..2 * n + 1)
        .map(|_| -rng.random_range(0.0..1.0))
        .collect();
    let off_sum: f64 = taps
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != n)
        .map(|(_, &t)| t)
        .sum();
    taps[n] = -off_sum + rng.random_range(0.0..1.0);
    ZfParams::new(taps).expect("construction is admissible")
}

/// Random admissible ReLU dynamic-class parameters.
pub fn random_relu_iqc<R: Rng>(rng: &mut R, n: usize) -> ReluIqcParams {
    let m1 = (0..n + 1).map(|_| rng.random_range(0.0..1.0)).collect();
    let m2 = (0..n + 1).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut m3: Vec<f64> = (0..2 * n + 1).map(|_| rng.random_range(0.0..1.0)).collect();
    m3[n] = rng.random_range(-1.0..1.0);
    ReluIqcParams::new(m1, m2, m3).expect("construction is admissible")
}

/// Random doubly hyperdominant matrix of the given size.
pub fn random_doubly_hyperdominant<R: Rng>(rng: &mut R, size: usize) -> StaticSlopeParams {
    let mut q = DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            0.0
        } else {
            -rng.random_range(0.0..1.0f64)
        }
    });
    for i in 0..size {
        let row: f64 = (0..size).filter(|&j| j != i).map(|j| q[(i, j)].abs()).sum();
        let col: f64 = (0..size).filter(|&j| j != i).map(|j| q[(j, i)].abs()).sum();
        q[(i, i)] = row.max(col) + rng.random_range(0.0..0.5);
    }
    StaticSlopeParams::new(q).expect("construction is admissible")
}

/// Random admissible static ReLU-class matrices.
pub fn random_static_relu<R: Rng>(rng: &mut R, size: usize) -> StaticReluParams {
    let sym_nonneg = |rng: &mut R| {
        let mut q = DMatrix::zeros(size, size);
        for i in 0..size {
            for j in i..size {
                let val = rng.random_range(0.0..1.0);
                q[(i, j)] = val;
                q[(j, i)] = val;
            }
        }
        q
    };
    let q1 = sym_nonneg(rng);
    let q2 = sym_nonneg(rng);
    let q3 = DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            rng.random_range(-1.0..1.0)
        } else {
            rng.random_range(0.0..1.0)
        }
    });
    StaticReluParams::new(q1, q2, q3).expect("construction is admissible")
}

fn random_signal<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-3.0..3.0)).collect()
}

/// Running sums `sum_{k<=T0} r(k)' M r(k)` for all `T0 < len`, from the
/// filter recursion.
fn running_sums(m: &DMatrix<f64>, n: usize, v: &[f64], w: &[f64]) -> Vec<f64> {
    let psi = build_psi(n);
    let u: Vec<_> = v
        .iter()
        .zip(w)
        .map(|(&a, &b)| DVector::from_vec(vec![a, b]))
        .collect();
    let (_, r) = psi
        .simulate(&u, &DVector::zeros(psi.order()))
        .expect("filter simulation cannot fail on consistent input");
    let mut acc = 0.0;
    r.iter()
        .map(|rk| {
            acc += (rk.transpose() * m * rk)[(0, 0)];
            acc
        })
        .collect()
}

/// Two-route equality of the running sum for both dynamic classes,
/// including `T0 < N` truncation cases.
pub fn check_toeplitz_equality(cfg: &ValidateConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA1);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for i in 0..cfg.instances {
        let n = rng.random_range(0..=cfg.max_horizon);
        let t0 = rng.random_range(0..=cfg.max_t0);
        let v = random_signal(&mut rng, t0 + 1);
        let params = if i % 2 == 0 {
            DynamicParams::Slope(random_zf(&mut rng, n))
        } else {
            DynamicParams::Relu(random_relu_iqc(&mut rng, n))
        };
        // slope class: also exercise a non-ReLU slope-restricted w
        let w: Option<Vec<f64>> = match &params {
            DynamicParams::Slope(_) if rng.random_bool(0.5) => {
                let phi = Phi::sample_slope_restricted(&mut rng);
                Some(v.iter().map(|&x| phi.eval(x)).collect())
            }
            _ => None,
        };
        let (lhs, rhs) = toeplitz_sum_oracle(&params, &v, w.as_deref(), t0)
            .expect("oracle inputs are consistent");
        let err = (lhs - rhs).abs() / (1.0 + lhs.abs());
        worst = worst.max(err);
        if (lhs - rhs).abs() > 1e-9 * (1.0 + lhs.abs()) {
            failures += 1;
        }
    }
    CheckOutcome::new(
        "toeplitz-sum-equality",
        failures == 0,
        format!(
            "{} instances, worst relative deviation {worst:.3e}",
            cfg.instances
        ),
    )
}

/// Nonnegativity of every running sum for the slope-dynamic class with
/// sampled `[0,1]` slope-restricted nonlinearities (ReLU included).
pub fn check_hard_iqc_slope(cfg: &ValidateConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA2);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    let phis = |rng: &mut ChaCha8Rng| -> Phi {
        match rng.random_range(0..4u8) {
            0 => Phi::Relu,
            1 => Phi::Saturation(1.0),
            2 => Phi::LinearGain(0.5),
            _ => Phi::sample_slope_restricted(rng),
        }
    };
    for _ in 0..cfg.instances {
        let n = rng.random_range(0..=cfg.max_horizon);
        let p = random_zf(&mut rng, n);
        let m = build_m_slope_dynamic(&p).expect("admissible by construction");
        let phi = phis(&mut rng);
        let v = random_signal(&mut rng, cfg.max_t0 + 1);
        let w: Vec<f64> = v.iter().map(|&x| phi.eval(x)).collect();
        for sum in running_sums(&m, n, &v, &w) {
            worst = worst.min(sum);
            if sum < -1e-9 {
                failures += 1;
            }
        }
    }
    CheckOutcome::new(
        "hard-iqc-slope-nonnegativity",
        failures == 0,
        format!(
            "{} instances, most negative running sum {worst:.3e}",
            cfg.instances
        ),
    )
}

/// Nonnegativity of every running sum for the ReLU dynamic class.
pub fn check_hard_iqc_relu(cfg: &ValidateConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA3);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..cfg.instances {
        let n = rng.random_range(0..=cfg.max_horizon);
        let p = random_relu_iqc(&mut rng, n);
        let m = build_m_relu_dynamic(&p).expect("admissible by construction");
        let v = random_signal(&mut rng, cfg.max_t0 + 1);
        let w: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
        for sum in running_sums(&m, n, &v, &w) {
            worst = worst.min(sum);
            if sum < -1e-9 {
                failures += 1;
            }
        }
    }
    CheckOutcome::new(
        "hard-iqc-relu-nonnegativity",
        failures == 0,
        format!(
            "{} instances, most negative running sum {worst:.3e}",
            cfg.instances
        ),
    )
}

/// Pointwise nonnegativity of the static quadratic constraints on every
/// window (slope-restricted windows for the hyperdominant class, ReLU
/// windows for the static ReLU class).
pub fn check_static_pointwise(cfg: &ValidateConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA4);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for i in 0..cfg.instances {
        let n = rng.random_range(0..=cfg.max_horizon);
        let slope_class = i % 2 == 0;
        let (m, phi) = if slope_class {
            let p = random_doubly_hyperdominant(&mut rng, n + 1);
            (
                build_m_slope_static(&p).expect("admissible"),
                Phi::sample_slope_restricted(&mut rng),
            )
        } else {
            let p = random_static_relu(&mut rng, n + 1);
            (build_m_relu_static(&p).expect("admissible"), Phi::Relu)
        };
        let v = random_signal(&mut rng, cfg.max_t0 + 1);
        let w: Vec<f64> = v.iter().map(|&x| phi.eval(x)).collect();
        let psi = build_psi(n);
        let u: Vec<_> = v
            .iter()
            .zip(&w)
            .map(|(&a, &b)| DVector::from_vec(vec![a, b]))
            .collect();
        let (_, r) = psi
            .simulate(&u, &DVector::zeros(psi.order()))
            .expect("consistent");
        for rk in &r {
            let val = (rk.transpose() * &m * rk)[(0, 0)];
            worst = worst.min(val);
            if val < -1e-9 {
                failures += 1;
            }
        }
    }
    CheckOutcome::new(
        "static-pointwise-nonnegativity",
        failures == 0,
        format!(
            "{} instances, most negative window value {worst:.3e}",
            cfg.instances
        ),
    )
}

/// Independent reference predicates, written against the definitions.
fn reference_doubly_hyperdominant(q: &DMatrix<f64>) -> bool {
    let n = q.nrows();
    let mut ok = true;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            row_sum += q[(i, j)];
            if i != j {
                ok &= q[(i, j)] <= 0.0;
            }
        }
        ok &= row_sum >= 0.0;
    }
    for j in 0..n {
        let mut col_sum = 0.0;
        for i in 0..n {
            col_sum += q[(i, j)];
        }
        ok &= col_sum >= 0.0;
    }
    ok
}

fn reference_metzler(q: &DMatrix<f64>) -> bool {
    let n = q.nrows();
    let mut ok = true;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                ok &= q[(i, j)] >= 0.0;
            }
        }
    }
    ok
}

/// Exhaustive truth table on all 3x3 matrices with entries in {-1, 0, 1}.
pub fn check_predicates_exhaustive() -> CheckOutcome {
    let mut mismatches = 0usize;
    let mut total = 0usize;
    let values = [-1.0, 0.0, 1.0];
    let mut idx = [0usize; 9];
    loop {
        let q = DMatrix::from_fn(3, 3, |i, j| values[idx[3 * i + j]]);
        total += 1;
        if is_doubly_hyperdominant(&q) != reference_doubly_hyperdominant(&q) {
            mismatches += 1;
        }
        if is_metzler(&q) != reference_metzler(&q) {
            mismatches += 1;
        }
        // odometer over 3^9 sign patterns
        let mut pos = 0;
        loop {
            idx[pos] += 1;
            if idx[pos] < 3 {
                break;
            }
            idx[pos] = 0;
            pos += 1;
            if pos == 9 {
                break;
            }
        }
        if pos == 9 {
            break;
        }
    }
    CheckOutcome::new(
        "predicates-exhaustive-3x3",
        mismatches == 0 && total == 19683,
        format!("{total} sign patterns, {mismatches} mismatches"),
    )
}

/// The banded Toeplitz matrices built from admissible dynamic parameters
/// must land in the matching structured classes.
pub fn check_toeplitz_structure(cfg: &ValidateConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA5);
    let mut failures = 0usize;
    for _ in 0..cfg.instances {
        let n = rng.random_range(0..=cfg.max_horizon);
        let size = rng.random_range(1..=cfg.max_t0 + 1);
        let zf = random_zf(&mut rng, n);
        if !is_doubly_hyperdominant(&zf_toeplitz(&zf, size)) {
            failures += 1;
        }
        let relu = random_relu_iqc(&mut rng, n);
        let (q1, q2, q3) = relu_toeplitz(&relu, size);
        if !is_metzler(&q3) {
            failures += 1;
        }
        if q1.iter().any(|&x| x < 0.0) || q2.iter().any(|&x| x < 0.0) {
            failures += 1;
        }
        if q1 != q1.transpose() || q2 != q2.transpose() {
            failures += 1;
        }
    }
    CheckOutcome::new(
        "toeplitz-structure",
        failures == 0,
        format!("{} instances, {failures} failures", cfg.instances),
    )
}

/// Hard-IQC sums along closed-loop ReLU traces of the benchmark plant stay
/// nonnegative for sampled admissible parameters (cross-module check).
pub fn check_trace_iqc_nonnegativity(cfg: &ValidateConfig) -> CheckOutcome {
    use crate::lti::benchmark_plant;
    use crate::sim::simulate_loop;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA6);
    let g = benchmark_plant();
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    let trials = (cfg.instances / 4).max(10);
    for _ in 0..trials {
        let n = rng.random_range(0..=cfg.max_horizon.min(3));
        let alpha = rng.random_range(0.0..2.0);
        let x0 = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0f64));
        let trace = simulate_loop(&g, alpha, &Phi::Relu, &x0, cfg.max_t0 + 1, n)
            .expect("benchmark loop is well posed");
        let m = if rng.random_bool(0.5) {
            build_m_slope_dynamic(&random_zf(&mut rng, n)).expect("admissible")
        } else {
            build_m_relu_dynamic(&random_relu_iqc(&mut rng, n)).expect("admissible")
        };
        let mut acc = 0.0;
        for rk in &trace.r {
            acc += (rk.transpose() * &m * rk)[(0, 0)];
            worst = worst.min(acc);
            if acc < -1e-9 {
                failures += 1;
            }
        }
    }
    CheckOutcome::new(
        "trace-iqc-nonnegativity",
        failures == 0,
        format!("{trials} trials, most negative running sum {worst:.3e}"),
    )
}

/// Runs every battery.
pub fn run_all(cfg: &ValidateConfig) -> Vec<CheckOutcome> {
    vec![
        check_toeplitz_equality(cfg),
        check_hard_iqc_slope(cfg),
        check_hard_iqc_relu(cfg),
        check_static_pointwise(cfg),
        check_predicates_exhaustive(),
        check_toeplitz_structure(cfg),
        check_trace_iqc_nonnegativity(cfg),
    ]
}
