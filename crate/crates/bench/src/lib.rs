//! Shared fixtures for the kernel benchmarks.

use blowuplab_core::{DampingModel, Gaussian, InitialData, ProblemSpec, SimSpec};

pub fn damping_catalog() -> [(&'static str, DampingModel); 3] {
    [
        ("constant", DampingModel::Constant { mu: 1.0 }),
        ("decaying", DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 }),
        ("growing", DampingModel::PowerLaw { mu: 1.0, kappa: -0.5 }),
    ]
}

pub fn scan_radii() -> Vec<f64> {
    (3..=8).map(|k| 2f64.powi(k)).collect()
}

/// The amplitude-5 exhibit: `u0 = 0`, Gaussian `u1`, `n = 1`.
pub fn exhibit(p: f64, t_max: f64) -> SimSpec {
    let data = InitialData { u0: Gaussian::new(0.0, 1.0), u1: Gaussian::new(5.0, 1.0) };
    SimSpec::new(ProblemSpec::unit(1, p), data, t_max)
}
