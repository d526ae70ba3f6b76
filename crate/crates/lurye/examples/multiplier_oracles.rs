//! The two-route running-sum identity behind the dynamic multiplier
//! classes, plus the hard-IQC nonnegativity it implies.
//!
//! For admissible taps, the sum `sum_{k<=T0} r(k)' M r(k)` computed through
//! the FIR filter equals a quadratic form of the reverse-stacked signals
//! built from banded Toeplitz matrices — and is nonnegative whenever
//! `w = phi(v)` for a nonlinearity the class covers.
//!
//! ```bash
//! cargo run --example multiplier_oracles
//! ```

use lurye::checks::{random_relu_iqc, random_zf};
use lurye::multipliers::{toeplitz_sum_oracle, zf_embed, zf_toeplitz, DynamicParams};
use lurye::sim::Phi;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // hand-checkable case: taps (0, 1, -1) with a short signal
    let p = random_zf(&mut rng, 1);
    println!("sampled taps: {:?}", p.taps());
    println!(
        "their banded Toeplitz matrix (size 4) is doubly hyperdominant: {}",
        lurye::multipliers::is_doubly_hyperdominant(&zf_toeplitz(&p, 4))
    );

    let v: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
    let (lhs, rhs) = toeplitz_sum_oracle(&DynamicParams::Slope(p.clone()), &v, None, 9).unwrap();
    println!("slope class, ReLU signal:   filter route {lhs:+.9}, Toeplitz route {rhs:+.9}");

    let phi = Phi::Saturation(1.0);
    let w: Vec<f64> = v.iter().map(|&x| phi.eval(x)).collect();
    let (lhs, rhs) =
        toeplitz_sum_oracle(&DynamicParams::Slope(p.clone()), &v, Some(&w), 9).unwrap();
    println!("slope class, saturation:    filter route {lhs:+.9}, Toeplitz route {rhs:+.9}");

    let relu_params = random_relu_iqc(&mut rng, 2);
    let (lhs, rhs) = toeplitz_sum_oracle(&DynamicParams::Relu(relu_params), &v, None, 9).unwrap();
    println!("relu class, ReLU signal:    filter route {lhs:+.9}, Toeplitz route {rhs:+.9}");

    // the slope class embeds into the ReLU class without changing M
    let embedded = zf_embed(&p);
    let m_slope = lurye::multipliers::build_m_slope_dynamic(&p).unwrap();
    let m_relu = lurye::multipliers::build_m_relu_dynamic(&embedded).unwrap();
    println!("zf_embed reproduces M entrywise: {}", m_slope == m_relu);

    // running sums stay nonnegative over every horizon
    let mut worst = f64::INFINITY;
    for _ in 0..500 {
        let n = rng.random_range(0..4usize);
        let p = random_zf(&mut rng, n);
        let v: Vec<f64> = (0..13).map(|_| rng.random_range(-3.0..3.0)).collect();
        for t0 in 0..13 {
            let (sum, _) =
                toeplitz_sum_oracle(&DynamicParams::Slope(p.clone()), &v, None, t0).unwrap();
            worst = worst.min(sum);
        }
    }
    println!("most negative running sum over 500 random slope instances: {worst:.3e}");
}
