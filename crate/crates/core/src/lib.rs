//! Numerical laboratory for blow-up of semilinear damped wave equations
//! `u_tt - a(t) Δu + b(t) u_t = f(t, x) |u|^p`: damping diagnostics,
//! critical exponents, test-function scaling scans and a radial solver.

pub mod auxcalc;
pub mod coeffs;
pub mod error;
pub mod exponents;
pub mod functional;
pub mod quad;
pub mod report;
pub mod simulator;
pub mod testfn;

pub use auxcalc::{AuxOptions, AuxRow, AuxTable, EquivalenceReport, HypothesisReport};
pub use coeffs::{DampingModel, Perturbation, ProblemSpec};
pub use error::{Error, Result};
pub use exponents::{ExponentReport, GrushinReport, HardyReport};
pub use functional::{ScanOptions, ScanResult, ScanRow, SpaceMeasure, Term, TermFit, Verdict};
pub use simulator::{Gaussian, InitialData, SimOutcome, SimSpec, SimVerdict, SweepReport, TraceRow};
pub use testfn::{BumpProfile, MultiIndex, ScalingFamily};
