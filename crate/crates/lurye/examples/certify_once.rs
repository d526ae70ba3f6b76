//! Issue a single stability certificate.
//!
//! Certifies the benchmark plant G(z) = (2z + 0.92)/(z^2 - 0.5z) in negative
//! feedback with gain alpha = 1.0 against the ReLU dynamic-IQC class at lift
//! size 2, then prints the witness.
//!
//! ```bash
//! cargo run --example certify_once
//! ```

use lurye::certify::{certify, CertifyOptions, Method};
use lurye::lti::benchmark_plant;
use lurye::multipliers::MultiplierKind;
use lurye::sdp::ipm::InteriorPoint;

fn main() {
    let plant = benchmark_plant();
    let method = Method::new(MultiplierKind::ReluDynamic, 2);
    let alpha = 1.0;

    let cert = certify(
        &plant,
        method,
        alpha,
        &CertifyOptions::default(),
        &InteriorPoint::default(),
    )
    .expect("certification run failed");

    println!("plant: G(z) = (2z + 0.92)/(z^2 - 0.5z), loop gain alpha = {alpha}");
    println!("method: {method}");
    println!("verdict: {:?}", cert.verdict);
    println!("well posed: {}", cert.well_posed);
    println!(
        "strictness witness t = {:.3e} (floor {:.3e})",
        cert.witness.strictness, cert.witness.t_min
    );
    println!(
        "re-verified: max eig LMI(P, M) = {:.3e}, min eig P = {:.3e}",
        cert.witness.lmi_max_eig, cert.witness.p_min_eig
    );
    println!("multiplier parameters:");
    for (name, value) in cert.spec.param_names.iter().zip(&cert.witness.theta) {
        if value.abs() > 1e-9 {
            println!("  {name:>8} = {value:+.6}");
        }
    }
}
