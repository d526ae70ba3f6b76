//! Internal-stability certificates for discrete-time Lurye feedback loops.
//!
//! A discrete-time LTI plant `G` sits in negative feedback with gain `alpha`
//! and a scalar nonlinearity `phi` (a ReLU, or any `[0,1]` slope-restricted
//! function fixing zero):
//!
//! ```text
//!     x(k+1) = A x(k) + B w(k)
//!     v(k)   = -alpha * (C x(k) + D w(k))
//!     w(k)   = phi(v(k))
//! ```
//!
//! The engine proves global asymptotic stability of the origin by searching
//! over four classes of quadratic constraints on the filtered signals
//! `r(k) = [v(k)..v(k-N), w(k)..w(k-N)]` — static or dynamic, specialized to
//! ReLU or valid for the whole slope-restricted family — and solving the
//! resulting linear matrix inequality as a semidefinite program with an
//! embedded interior-point method. Margins come from bisection over `alpha`.
//!
//! Entry points:
//!
//! * [`certify::certify`] — one certificate for a `(class, horizon, alpha)`.
//! * [`certify::margin`] — largest certified gain by bisection.
//! * [`certify::margin_table`] — the full class-by-horizon margin sweep.
//! * [`sim::simulate_loop`] / [`sim::check_dissipation`] — trajectory-level
//!   validation of issued certificates.
//! * [`checks::run_all`] — randomized and exhaustive oracle batteries.
//!
//! The `examples/` directory has one runnable program per capability; the
//! `lurye` binary wraps the same calls behind `certify`, `margin`,
//! `table2`, `simulate` and `validate` subcommands.

pub mod augment;
pub mod certify;
pub mod checks;
pub mod cli;
pub mod lti;
pub mod multipliers;
pub mod sdp;
pub mod sim;

mod error;

pub use error::{Error, Result};

pub use augment::{augment, build_psi, check_well_posed, lift_block, AugmentedSystem};
pub use certify::{
    certify, margin, margin_table, Certificate, CertifyOptions, HorizonConvention, MarginOptions,
    MarginResult, Method, Verdict,
};
pub use lti::{tf_to_ss, StateSpace, TransferFunction};
pub use multipliers::{make_spec, MultiplierKind, MultiplierSpec};
pub use sdp::{assemble_lmi, feasibility, FeasibilityResult, SdpProblem, SolverBackend};
pub use sim::{simulate_loop, Phi, SimulationTrace};
