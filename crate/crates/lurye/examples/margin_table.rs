//! Reproduce the full margin table: four multiplier classes at lift sizes
//! 1 through 4, printed next to the shipped reference values.
//!
//! ```bash
//! cargo run --release --example margin_table
//! ```

use lurye::certify::{margin_table, MarginOptions};
use lurye::cli::{parse_reference, REFERENCE_MARGINS_CSV};
use lurye::lti::benchmark_plant;
use lurye::multipliers::MultiplierKind;
use lurye::sdp::ipm::InteriorPoint;

fn main() {
    let plant = benchmark_plant();
    let backend = InteriorPoint::default();
    let horizons = [1, 2, 3, 4];

    let table = margin_table(
        &plant,
        &MultiplierKind::ALL,
        &horizons,
        &MarginOptions::default(),
        2,
        &backend,
    );
    let reference = parse_reference(REFERENCE_MARGINS_CSV).expect("shipped reference parses");

    println!(
        "{:<16} {:>3} {:>12} {:>12} {:>10}",
        "method", "N", "margin", "reference", "deviation"
    );
    for cell in &table.cells {
        let reference = reference
            .iter()
            .find(|(k, n, _)| *k == cell.method.kind && *n == cell.method.horizon)
            .map(|(_, _, m)| *m);
        let (ref_text, dev_text) = match reference {
            Some(r) => (
                format!("{r:.4}"),
                format!("{:.2e}", (cell.margin - r).abs() / (1.0 + r)),
            ),
            None => ("-".into(), "-".into()),
        };
        println!(
            "{:<16} {:>3} {:>12.4} {:>12} {:>10}{}",
            cell.method.kind.to_string(),
            cell.method.horizon,
            cell.margin,
            ref_text,
            dev_text,
            if cell.cap_reached { "  (cap)" } else { "" }
        );
    }
    println!();
    println!("CSV:\n{}", table.to_csv());
}
