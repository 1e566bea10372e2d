//! JSON run configuration and its merge with command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use blowuplab_core::simulator::DEFAULT_CFL;
use blowuplab_core::{DampingModel, Gaussian, InitialData, Perturbation, ProblemSpec, ScanOptions, SimSpec};
use serde::Deserialize;

use crate::args::{DampingArgs, DampingKind, PerturbationKind, ProblemArgs, SimFlags};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// when present, must name the subcommand being run
    pub command: Option<String>,
    #[serde(alias = "spec")]
    pub problem: Option<ProblemSpec>,
    pub damping: Option<DampingModel>,
    pub simulation: Option<SimSpec>,
    pub r_list: Option<Vec<f64>>,
    pub p_list: Option<Vec<f64>>,
    pub horizon: Option<f64>,
    pub margin: Option<f64>,
    pub points_per_decade: Option<usize>,
    pub scan_options: Option<ScanOptions>,
    /// parameter points for `exponents`
    pub grid: Option<Vec<ExponentPoint>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentPoint {
    pub n: usize,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))?;
        if let Some(c) = &cfg.command {
            if c != command {
                bail!("config is for command '{c}', not '{command}'");
            }
        }
        Ok(cfg)
    }
}

pub fn damping(flags: &DampingArgs, base: Option<DampingModel>) -> Result<DampingModel> {
    if !flags.any() {
        return Ok(base.unwrap_or(DampingModel::Constant { mu: 1.0 }));
    }
    let kind = flags.damping.unwrap_or(if flags.perturbation.is_some() {
        DampingKind::Perturbed
    } else if flags.kappa.is_some() {
        DampingKind::Powerlaw
    } else {
        DampingKind::Constant
    });
    let mu = flags.mu.or(base.map(|b| b.mu())).unwrap_or(1.0);
    let kappa = flags.kappa.unwrap_or(0.0);
    let model = match kind {
        DampingKind::Constant => {
            if flags.kappa.is_some() {
                bail!("--kappa does not apply to constant damping");
            }
            DampingModel::Constant { mu }
        }
        DampingKind::Powerlaw => DampingModel::PowerLaw { mu, kappa },
        DampingKind::Perturbed => {
            let param = flags.perturbation_param;
            let perturbation = match flags.perturbation {
                Some(PerturbationKind::Log) | None => Perturbation::LogPower { exponent: param.unwrap_or(1.0) },
                Some(PerturbationKind::Sine) => Perturbation::SineWiggle { rate: param.unwrap_or(0.25) },
            };
            DampingModel::PerturbedPower { mu, kappa, perturbation }
        }
    };
    model.validate()?;
    Ok(model)
}

/// Config problem overridden by flags; `p` falls back to `default_p`.
pub fn problem(flags: &ProblemArgs, base: Option<ProblemSpec>, default_p: Option<f64>) -> Result<ProblemSpec> {
    let mut spec = match base {
        Some(s) => s,
        None => {
            let Some(p) = flags.p.or(default_p) else {
                bail!("the power p is required: pass --p or a config with a problem");
            };
            ProblemSpec::unit(flags.n.unwrap_or(1), p)
        }
    };
    if let Some(n) = flags.n {
        spec.n = n;
    }
    if let Some(p) = flags.p {
        spec.p = p;
    }
    if let Some(v) = flags.alpha {
        spec.alpha = v;
    }
    if let Some(v) = flags.gamma {
        spec.gamma = v;
    }
    if let Some(v) = flags.delta {
        spec.delta = v;
    }
    if let Some(v) = flags.c_a {
        spec.c_a = v;
    }
    if let Some(v) = flags.c_f {
        spec.c_f = v;
    }
    spec.damping = damping(&flags.damping, Some(spec.damping).filter(|_| base.is_some()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn simulation(flags: &SimFlags, cfg: &RunConfig, default_p: Option<f64>) -> Result<SimSpec> {
    let base = cfg.simulation;
    let problem = problem(&flags.problem, base.map(|s| s.problem).or(cfg.problem), default_p)?;
    let mut spec = base.unwrap_or_else(|| {
        let data = InitialData { u0: Gaussian::new(0.0, 1.0), u1: Gaussian::new(1.0, 1.0) };
        SimSpec::new(problem, data, 50.0)
    });
    spec.problem = problem;
    if let Some(a) = flags.amplitude {
        spec.data.u1.amplitude = a;
    }
    if let Some(w) = flags.width {
        spec.data.u1.width = w;
    }
    if let Some(a) = flags.u0_amplitude {
        spec.data.u0.amplitude = a;
    }
    if let Some(w) = flags.u0_width {
        spec.data.u0.width = w;
    }
    if let Some(t) = flags.t_max {
        spec.t_max = t;
    }
    spec.r_max = flags.r_max.or(spec.r_max);
    spec.cells = flags.cells.or(spec.cells);
    spec.dt = flags.dt.or(spec.dt);
    spec.cfl = flags.cfl.unwrap_or(if base.is_some() { spec.cfl } else { DEFAULT_CFL });
    if let Some(t) = flags.threshold {
        spec.blowup_threshold = t;
    }
    if flags.linear {
        spec.nonlinear = false;
    }
    if let Some(k) = flags.record_every {
        spec.record_every = k;
    }
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_alone_selects_a_power_law() {
        let flags = DampingArgs { kappa: Some(0.5), ..Default::default() };
        assert_eq!(damping(&flags, None).unwrap(), DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 });
    }

    #[test]
    fn flags_override_the_config_problem() {
        let base = ProblemSpec::from_json(r#"{"n": 2, "p": 3.0, "gamma": 1.0, "damping": {"kind": "constant", "mu": 2.0}}"#)
            .unwrap();
        let flags = ProblemArgs { p: Some(1.5), ..Default::default() };
        let spec = problem(&flags, Some(base), None).unwrap();
        assert_eq!((spec.n, spec.p, spec.gamma), (2, 1.5, 1.0));
        assert_eq!(spec.damping, DampingModel::Constant { mu: 2.0 });
    }

    #[test]
    fn missing_power_is_an_error() {
        assert!(problem(&ProblemArgs::default(), None, None).is_err());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"horizon": 10, "colour": "red"}"#).is_err());
    }

    #[test]
    fn simulation_flags_reach_the_initial_data() {
        let flags = SimFlags {
            problem: ProblemArgs { p: Some(2.0), ..Default::default() },
            amplitude: Some(5.0),
            linear: true,
            ..Default::default()
        };
        let spec = simulation(&flags, &RunConfig::default(), None).unwrap();
        assert_eq!(spec.data.u1.amplitude, 5.0);
        assert_eq!(spec.data.u0.amplitude, 0.0);
        assert!(!spec.nonlinear);
        assert_eq!(spec.t_max, 50.0);
    }
}
