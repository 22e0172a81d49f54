//! Steady-state sideband cooling of a mechanical resonator coupled to a
//! two-level defect.
//!
//! Three master equations describe the same system at different levels of
//! detail: [`ModelVariant::Full`] keeps the cavity, [`ModelVariant::Eliminated`]
//! works on the resonator–TLS polariton ladder with the cavity adiabatically
//! eliminated, and [`ModelVariant::Simple`] adds the TLS naively to the bare
//! cooling equation. Frequencies and rates are ratios to ω_m.
//!
//! ```
//! use tlscool::{steady_state, ModelVariant, SystemParams};
//!
//! let s = steady_state(&SystemParams::default(), ModelVariant::Eliminated)?;
//! println!("n_ss = {:.4e}, <sigma_z> = {:.4}", s.n_ss, s.sigma_z_ss);
//! # Ok::<(), tlscool::Error>(())
//! ```
//!
//! The guide in `book/` walks through the model; its snippets run as doc
//! tests.

pub mod cli;
pub mod error;
pub mod liouvillian;
pub mod model;
pub mod polariton;
pub mod rates;
pub mod selfcheck;
pub mod sparse;
pub mod steady;
pub mod sweep;

pub use error::{Error, Result};
pub use liouvillian::{Liouvillian, ModelVariant};
pub use model::{validate_params, RawParams, SystemParams};
pub use steady::{solve_steady, steady_state, SteadyState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/polaritons.md")]
    mod polaritons {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/master-equations.md")]
    mod master_equations {}
    #[doc = include_str!("../../../book/src/steady-state.md")]
    mod steady_state {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
