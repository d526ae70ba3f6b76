//! Work with the SDP layer directly: assemble the stability LMI, dump it
//! in the SDPA sparse format for cross-checking with external solvers, and
//! solve it with the embedded interior-point backend.
//!
//! ```bash
//! cargo run --example sdp_interface
//! ```

use lurye::augment::augment;
use lurye::lti::benchmark_plant;
use lurye::multipliers::{make_spec, MultiplierKind};
use lurye::sdp::ipm::InteriorPoint;
use lurye::sdp::{assemble_lmi, feasibility, solve, SolveOptions};

fn main() {
    let loop_plant = benchmark_plant().scale(-0.5);
    let aug = augment(&loop_plant, 1).unwrap();
    let spec = make_spec(MultiplierKind::SlopeDynamic, 1);
    let opts = SolveOptions::default();

    let assembled = assemble_lmi(&aug, &spec, &opts).unwrap();
    println!(
        "assembled problem: {} scalar variables, LMI block {}x{}, {} scalar constraints",
        assembled.problem.n_scalars(),
        assembled.problem.lmis[0].dim,
        assembled.problem.lmis[0].dim,
        assembled.problem.linear.len()
    );

    let dump = assembled.problem.dump_sdpa_sparse();
    println!("\nSDPA sparse dump (first lines):");
    for line in dump.lines().take(6) {
        println!("  {line}");
    }
    println!("  ... ({} lines total)", dump.lines().count());

    let backend = InteriorPoint::default();
    let sol = solve(&assembled.problem, &backend);
    println!(
        "\nraw solve: status {:?}, objective (max t) = {:.4e}, gap {:.1e}, {} iterations",
        sol.status, sol.objective_value, sol.duality_gap, sol.iterations
    );

    let res = feasibility(&aug, &spec, &opts, &backend).unwrap();
    println!(
        "feasibility verdict: {} (t = {:.3e} vs floor {:.3e})",
        res.feasible, res.strictness, res.t_min
    );
    println!("witness taps m_-1..m_1: {:?}", res.theta);
}
