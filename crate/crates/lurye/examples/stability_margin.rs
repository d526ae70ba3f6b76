//! Find the largest certified loop gain by bisection.
//!
//! ```bash
//! cargo run --example stability_margin
//! ```

use lurye::certify::{margin, MarginOptions, Method};
use lurye::lti::benchmark_plant;
use lurye::multipliers::MultiplierKind;
use lurye::sdp::ipm::InteriorPoint;

fn main() {
    let plant = benchmark_plant();
    let method = Method::new(MultiplierKind::SlopeDynamic, 2);
    let opts = MarginOptions::default();

    let result =
        margin(&plant, method, &opts, &InteriorPoint::default()).expect("margin run failed");

    println!("{method}: bisection on [0, {}]", opts.alpha_hi);
    for probe in &result.log {
        println!(
            "  alpha {:>12.6}  {}  (t = {:+.2e})",
            probe.alpha,
            if probe.certified {
                "certified   "
            } else {
                "inconclusive"
            },
            probe.strictness
        );
    }
    println!(
        "margin: {:.4} (bracket width {:.2e}, {} bisection steps)",
        result.margin(),
        result.alpha_hi - result.alpha_lo,
        result.iterations
    );
}
