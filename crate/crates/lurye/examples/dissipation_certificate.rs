//! Verify an issued certificate along simulated trajectories.
//!
//! A certificate provides `(P, theta, t)` with `LMI(P, M(theta)) <= -t I`.
//! Along every closed-loop trajectory this forces the per-step dissipation
//! inequality
//!
//! ```text
//!     V(x(k+1)) - V(x(k)) + t ||x(k)||^2 + r(k)' M r(k) <= 0
//! ```
//!
//! This example certifies the benchmark loop, then evaluates that
//! inequality along random trajectories — and shows that a wrong storage
//! function is caught.
//!
//! ```bash
//! cargo run --example dissipation_certificate
//! ```

use lurye::certify::{certify, CertifyOptions, Method};
use lurye::lti::benchmark_plant;
use lurye::multipliers::MultiplierKind;
use lurye::sdp::ipm::InteriorPoint;
use lurye::sim::{check_dissipation, simulate_loop_augmented, Phi};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let plant = benchmark_plant();
    let cert = certify(
        &plant,
        Method::new(MultiplierKind::ReluDynamic, 2),
        0.6,
        &CertifyOptions::default(),
        &InteriorPoint::default(),
    )
    .expect("certification failed");
    assert!(cert.is_certified());
    println!(
        "certified {} at alpha = {} (t = {:.2e})",
        cert.method, cert.alpha, cert.witness.strictness
    );

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let tol = 1e-7 * (1.0 + cert.witness.p.norm());
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let x0 = DVector::from_fn(cert.aug.n_plant, |_, _| rng.random_range(-1.0..1.0f64));
        let trace = simulate_loop_augmented(&cert.aug, &Phi::Relu, &x0, 300).unwrap();
        let v = check_dissipation(
            &cert.aug,
            &cert.witness.p,
            &cert.spec,
            &cert.witness.theta,
            &trace,
            cert.witness.strictness,
        );
        worst = worst.max(v);
    }
    println!("worst per-step dissipation value over 20 trajectories: {worst:.3e} (tol {tol:.3e})");

    // wrong storage function: the same check must report a violation
    let zero_p = DMatrix::zeros(cert.aug.order(), cert.aug.order());
    let x0 = DVector::from_vec(vec![1.0, 0.0]);
    let trace = simulate_loop_augmented(&cert.aug, &Phi::Relu, &x0, 100).unwrap();
    let violation = check_dissipation(
        &cert.aug,
        &zero_p,
        &cert.spec,
        &cert.witness.theta,
        &trace,
        1.0,
    );
    println!("same check with P = 0 (invalid certificate): {violation:.3e} > 0");
}
