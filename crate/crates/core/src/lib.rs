//! Numerical workbench for the Cesaro operator on the Hardy space of the disc.

pub mod cesaro_ops;
pub mod error;
pub mod h2core;
pub mod halfplane_chain;
pub mod kriete_trutt;
pub mod linalg;
pub mod model_spaces;
pub mod quadrature;
pub mod report;
pub mod sobol;
pub mod special;
pub mod subspace_lab;
pub mod suites;

pub use error::{Error, Result};
pub use h2core::{CoeffFun, PowerLogParams};
pub use report::{CheckReport, Provenance};
pub use suites::{run_suite, Suite, SuiteConfig, SuiteRun, Summary};
