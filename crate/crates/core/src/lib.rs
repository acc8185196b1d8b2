//! Greedy kernel interpolation.
//!
//! Points are picked one at a time from a finite [`CandidateSet`] by the
//! beta-greedy scale `|r_n(x)|^beta P_n(x)^(1 - beta)`, and the interpolant,
//! power function and residual are updated through the Newton basis.
//! [`analysis`] turns the resulting [`RunTrace`]s into convergence
//! diagnostics; [`experiment`] drives complete runs from JSON configs.
//!
//! ```
//! use gkl::{run_greedy, CandidateSet, KernelModel, SelectionRule, StopCriteria};
//!
//! let kernel = KernelModel::wendland_k0();
//! let cands = CandidateSet::from_points(vec![vec![0.0], vec![0.5], vec![1.0]]).unwrap();
//! let f: Vec<f64> = cands.points().map(|x| x[0]).collect();
//! let stop = StopCriteria::new(10, 0.0, 1e-12).unwrap();
//! let trace = run_greedy(&kernel, &cands, &f, &SelectionRule::f_greedy(), &stop).unwrap();
//! assert_eq!(trace.len(), 1);
//! ```

// `!(x > y)` style comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// frozen reference values keep all digits of the oracle output
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod greedy;
pub mod kernels;
pub mod plot;
pub mod targets;

pub use analysis::RunTrace;
pub use error::{Error, Result};
pub use geometry::CandidateSet;
pub use greedy::{
    run_greedy, run_greedy_masked, GreedyState, SelectionRule, SelectionVariant, StopCriteria,
    StopReason,
};
pub use kernels::{KernelModel, KernelRegistry, Smoothness};
