//! Coefficient families: the damping `b(t)`, and the representative speed
//! `a(t)` and nonlinearity weight `f(t, x)` built on top of `B(t)`.

use serde::{Deserialize, Serialize};

use crate::auxcalc::AuxTable;
use crate::error::{Error, Result};

/// Slowly varying factor multiplying a power-law damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// `v(t) = log(e + t)^exponent`
    LogPower { exponent: f64 },
    /// `v(t) = 1 + (1+t)^rate * sin((1+t)^(-2 rate))`, `rate > 0`
    SineWiggle { rate: f64 },
}

impl Perturbation {
    fn validate(&self) -> Result<()> {
        match *self {
            Perturbation::LogPower { exponent } if exponent.is_finite() => Ok(()),
            Perturbation::SineWiggle { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            Perturbation::LogPower { .. } => Err(Error::InvalidParameter(
                "log perturbation exponent must be finite".into(),
            )),
            Perturbation::SineWiggle { .. } => Err(Error::InvalidParameter(
                "sine perturbation rate must be positive".into(),
            )),
        }
    }

    /// `(v(t), v'(t))`
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Perturbation::LogPower { exponent } => {
                let l = (std::f64::consts::E + t).ln();
                let v = l.powf(exponent);
                let dv = exponent * l.powf(exponent - 1.0) / (std::f64::consts::E + t);
                (v, dv)
            }
            Perturbation::SineWiggle { rate } => {
                let s = 1.0 + t;
                let phase = s.powf(-2.0 * rate);
                let grow = s.powf(rate);
                let v = 1.0 + grow * phase.sin();
                let dv = rate * grow / s * phase.sin()
                    - 2.0 * rate * grow * phase / s * phase.cos();
                (v, dv)
            }
        }
    }
}

/// Damping coefficient family `b(t) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingModel {
    Constant {
        mu: f64,
    },
    /// `b(t) = mu / (1+t)^kappa`
    #[serde(alias = "powerlaw")]
    PowerLaw { mu: f64, kappa: f64 },
    /// `b(t) = mu / (1+t)^kappa * v(t)`
    #[serde(alias = "perturbed")]
    PerturbedPower {
        mu: f64,
        kappa: f64,
        perturbation: Perturbation,
    },
}

impl DampingModel {
    pub fn constant(mu: f64) -> Result<Self> {
        let m = DampingModel::Constant { mu };
        m.validate()?;
        Ok(m)
    }

    pub fn power_law(mu: f64, kappa: f64) -> Result<Self> {
        let m = DampingModel::PowerLaw { mu, kappa };
        m.validate()?;
        Ok(m)
    }

    pub fn perturbed(mu: f64, kappa: f64, perturbation: Perturbation) -> Result<Self> {
        let m = DampingModel::PerturbedPower {
            mu,
            kappa,
            perturbation,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let mu = self.mu();
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "damping amplitude mu must be positive, got {mu}"
            )));
        }
        match *self {
            DampingModel::Constant { .. } => Ok(()),
            DampingModel::PowerLaw { kappa, .. } => {
                if kappa > -1.0 && kappa <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "damping exponent kappa must lie in (-1, 1], got {kappa}"
                    )))
                }
            }
            DampingModel::PerturbedPower {
                kappa,
                perturbation,
                ..
            } => {
                if !(kappa.abs() > 0.0 && kappa.abs() < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "perturbed damping needs 0 < |kappa| < 1, got {kappa}"
                    )));
                }
                perturbation.validate()
            }
        }
    }

    pub fn mu(&self) -> f64 {
        match *self {
            DampingModel::Constant { mu }
            | DampingModel::PowerLaw { mu, .. }
            | DampingModel::PerturbedPower { mu, .. } => mu,
        }
    }

    /// Power-law exponent of the family (0 for constant damping).
    pub fn kappa(&self) -> f64 {
        match *self {
            DampingModel::Constant { .. } => 0.0,
            DampingModel::PowerLaw { kappa, .. } | DampingModel::PerturbedPower { kappa, .. } => {
                kappa
            }
        }
    }

    /// Whether the effective-damping conditions hold, decided from the
    /// closed-form limits of the family rather than from samples.
    ///
    /// For `kappa = 1` the limit of `b'/b^2` is `-1/mu`, so `mu > 1` is needed.
    pub fn analytically_admissible(&self) -> bool {
        match *self {
            DampingModel::Constant { .. } => true,
            DampingModel::PowerLaw { mu, kappa } => kappa < 1.0 || mu > 1.0,
            DampingModel::PerturbedPower { .. } => true,
        }
    }

    pub fn b(&self, t: f64) -> f64 {
        match *self {
            DampingModel::Constant { mu } => mu,
            DampingModel::PowerLaw { mu, kappa } => mu * (1.0 + t).powf(-kappa),
            DampingModel::PerturbedPower {
                mu,
                kappa,
                perturbation,
            } => mu * (1.0 + t).powf(-kappa) * perturbation.eval(t).0,
        }
    }

    pub fn db(&self, t: f64) -> f64 {
        match *self {
            DampingModel::Constant { .. } => 0.0,
            DampingModel::PowerLaw { mu, kappa } => -mu * kappa * (1.0 + t).powf(-kappa - 1.0),
            DampingModel::PerturbedPower {
                mu,
                kappa,
                perturbation,
            } => {
                let (v, dv) = perturbation.eval(t);
                let s = 1.0 + t;
                mu * (-kappa * s.powf(-kappa - 1.0) * v + s.powf(-kappa) * dv)
            }
        }
    }
}

pub fn eval_b(model: &DampingModel, t: f64) -> f64 {
    model.b(t)
}

pub fn eval_db(model: &DampingModel, t: f64) -> f64 {
    model.db(t)
}

/// Full parameter set of the semilinear Cauchy problem
/// `u_tt - a(t) Δu + b(t) u_t = f(t, x) |u|^p` in `n` space dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblemSpec")]
pub struct ProblemSpec {
    pub n: usize,
    /// decay of the speed: `a(t) ~ B(t)^-alpha`
    pub alpha: f64,
    /// time power of the nonlinearity weight: `f ~ B(t)^gamma |x|^delta`
    pub gamma: f64,
    pub delta: f64,
    pub p: f64,
    pub damping: DampingModel,
    pub c_a: f64,
    pub c_f: f64,
}

#[derive(Deserialize)]
struct RawProblemSpec {
    n: usize,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    delta: f64,
    p: f64,
    damping: DampingModel,
    #[serde(default = "one")]
    c_a: f64,
    #[serde(default = "one")]
    c_f: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawProblemSpec> for ProblemSpec {
    type Error = Error;

    fn try_from(raw: RawProblemSpec) -> Result<Self> {
        let spec = ProblemSpec {
            n: raw.n,
            alpha: raw.alpha,
            gamma: raw.gamma,
            delta: raw.delta,
            p: raw.p,
            damping: raw.damping,
            c_a: raw.c_a,
            c_f: raw.c_f,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ProblemSpec {
    /// Unit coefficients: `a = b = f = 1` in dimension `n`.
    pub fn unit(n: usize, p: f64) -> Self {
        ProblemSpec {
            n,
            alpha: 0.0,
            gamma: 0.0,
            delta: 0.0,
            p,
            damping: DampingModel::Constant { mu: 1.0 },
            c_a: 1.0,
            c_f: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParameter(m));
        if self.n < 1 {
            return fail("space dimension n must be at least 1".into());
        }
        if !(self.alpha < 1.0) {
            return fail(format!("alpha must be below 1, got {}", self.alpha));
        }
        if !(self.gamma > -1.0) {
            return fail(format!("gamma must exceed -1, got {}", self.gamma));
        }
        if !self.delta.is_finite() {
            return fail("delta must be finite".into());
        }
        if !(self.p > 1.0) {
            return fail(format!("p must exceed 1, got {}", self.p));
        }
        if !(self.c_a > 0.0) || !(self.c_f > 0.0) {
            return fail("constants c_a and c_f must be positive".into());
        }
        self.damping.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Hölder conjugate `p' = p / (p - 1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Time-scaling exponent `d = 2 / (1 - alpha)` that balances the
    /// time and space terms of the test-function estimate.
    pub fn time_scaling_exponent(&self) -> f64 {
        2.0 / (1.0 - self.alpha)
    }

    /// `B(t) + B0` raised to `exponent`, with the shift `B0 = B(1)` applied
    /// only when `shift` is set.
    fn shifted_power(&self, aux: &AuxTable, t: f64, exponent: f64, shift: bool) -> Result<f64> {
        if exponent == 0.0 {
            return Ok(1.0);
        }
        let b = aux.big_b(t)?;
        let b0 = if shift { aux.big_b(1.0)? } else { 0.0 };
        Ok((b + b0).powf(exponent))
    }

    /// Representative speed `a(t) = c_a (B(t) + B0)^-alpha`.
    pub fn a(&self, t: f64, aux: &AuxTable) -> Result<f64> {
        Ok(self.c_a * self.shifted_power(aux, t, -self.alpha, self.alpha != 0.0)?)
    }

    /// Representative weight `f(t, r) = c_f (B(t) + B0)^gamma r^delta`, `r = |x|`.
    pub fn f(&self, t: f64, r: f64, aux: &AuxTable) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
        }
        if self.delta < 0.0 && r == 0.0 {
            return Err(Error::Singular(format!(
                "f(t, x) = |x|^{} is singular at x = 0",
                self.delta
            )));
        }
        let radial = if self.delta == 0.0 { 1.0 } else { r.powf(self.delta) };
        Ok(self.c_f * self.shifted_power(aux, t, self.gamma, self.gamma < 0.0)? * radial)
    }
}

pub fn eval_a(spec: &ProblemSpec, t: f64, aux: &AuxTable) -> Result<f64> {
    spec.a(t, aux)
}

pub fn eval_f(spec: &ProblemSpec, t: f64, r: f64, aux: &AuxTable) -> Result<f64> {
    spec.f(t, r, aux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxcalc::{AuxOptions, AuxTable};

    fn table(model: DampingModel, horizon: f64) -> AuxTable {
        AuxTable::build(model, horizon, AuxOptions::default()).unwrap()
    }

    #[test]
    fn closed_forms_of_b() {
        assert_eq!(eval_b(&DampingModel::Constant { mu: 2.0 }, 7.0), 2.0);
        let pl = DampingModel::PowerLaw { mu: 1.0, kappa: 1.0 };
        assert_eq!(eval_b(&pl, 1.0), 0.5);
        let grow = DampingModel::PowerLaw { mu: 3.0, kappa: -0.5 };
        assert!((eval_b(&grow, 3.0) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_of_b() {
        assert_eq!(eval_db(&DampingModel::Constant { mu: 2.0 }, 5.0), 0.0);
        let pl = DampingModel::PowerLaw { mu: 1.0, kappa: 1.0 };
        assert_eq!(eval_db(&pl, 0.0), -1.0);
        for t in [0.0, 0.3, 2.0, 17.0, 1e3] {
            let r = eval_db(&pl, t) / eval_b(&pl, t).powi(2);
            assert!((r + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_law_limits_are_approached_monotonically() {
        let m = DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 };
        let mut prev_ratio = f64::INFINITY;
        let mut prev_log = f64::INFINITY;
        for t in [1e3, 1e4, 1e5] {
            let ratio = (m.db(t) / m.b(t).powi(2)).abs();
            let log = (t * m.db(t) / m.b(t) + 0.5).abs();
            assert!(ratio < prev_ratio && log < prev_log);
            prev_ratio = ratio;
            prev_log = log;
        }
        assert!(prev_ratio < 1e-2 && prev_log < 1e-4);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(DampingModel::constant(0.0).is_err());
        assert!(DampingModel::power_law(1.0, 1.5).is_err());
        assert!(DampingModel::power_law(1.0, -1.0).is_err());
        assert!(DampingModel::perturbed(1.0, 1.0, Perturbation::LogPower { exponent: 1.0 }).is_err());
        assert!(DampingModel::perturbed(1.0, 0.5, Perturbation::SineWiggle { rate: 0.0 }).is_err());
    }

    #[test]
    fn admissibility_of_critical_power() {
        assert!(!DampingModel::PowerLaw { mu: 0.5, kappa: 1.0 }.analytically_admissible());
        assert!(DampingModel::PowerLaw { mu: 2.0, kappa: 1.0 }.analytically_admissible());
        assert!(DampingModel::PowerLaw { mu: 0.1, kappa: 0.99 }.analytically_admissible());
    }

    #[test]
    fn perturbed_models_stay_positive() {
        let models = [
            DampingModel::perturbed(1.0, 0.5, Perturbation::LogPower { exponent: -2.0 }).unwrap(),
            DampingModel::perturbed(0.3, -0.5, Perturbation::SineWiggle { rate: 0.5 }).unwrap(),
            DampingModel::perturbed(2.0, 0.9, Perturbation::SineWiggle { rate: 2.0 }).unwrap(),
        ];
        for m in models {
            for k in 0..=2000 {
                let t = 0.05 * k as f64;
                assert!(m.b(t) > 0.0, "{m:?} at {t}");
            }
        }
    }

    #[test]
    fn speed_representative() {
        let unit = ProblemSpec::unit(1, 2.0);
        let aux = table(unit.damping, 10.0);
        assert_eq!(unit.a(3.0, &aux).unwrap(), 1.0);

        let spec = ProblemSpec { alpha: 0.5, ..unit };
        let a = spec.a(4.0, &aux).unwrap();
        assert!((a - 5f64.powf(-0.5)).abs() < 1e-12);

        // continuity in alpha
        let near = ProblemSpec { alpha: 1e-9, ..unit };
        assert!((near.a(4.0, &aux).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn weight_representative() {
        let unit = ProblemSpec::unit(1, 2.0);
        let aux = table(unit.damping, 10.0);
        assert_eq!(unit.f(2.0, 5.0, &aux).unwrap(), 1.0);

        let spec = ProblemSpec { gamma: 1.0, ..unit };
        assert!((spec.f(3.0, 0.7, &aux).unwrap() - 3.0).abs() < 1e-12);

        let singular = ProblemSpec { delta: -1.0, ..unit };
        assert!(matches!(singular.f(1.0, 0.0, &aux), Err(Error::Singular(_))));
        assert!((singular.f(1.0, 2.0, &aux).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn out_of_table_is_reported() {
        let spec = ProblemSpec { alpha: 0.5, ..ProblemSpec::unit(1, 2.0) };
        let aux = table(spec.damping, 10.0);
        assert!(matches!(spec.a(11.0, &aux), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn parses_json() {
        let text = r#"{"n": 2, "alpha": 0.25, "gamma": 0.5, "delta": 0, "p": 2.5,
            "damping": {"kind": "power_law", "mu": 1, "kappa": 0.5}, "c_a": 1, "c_f": 2}"#;
        let spec = ProblemSpec::from_json(text).unwrap();
        assert_eq!(spec.n, 2);
        assert_eq!(spec.damping, DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 });
        assert_eq!(spec.c_f, 2.0);

        let pert = r#"{"n": 1, "p": 2, "damping": {"kind": "perturbed", "mu": 1, "kappa": 0.5,
            "perturbation": {"kind": "log_power", "exponent": 1}}}"#;
        assert!(ProblemSpec::from_json(pert).is_ok());

        let bad = r#"{"n": 1, "gamma": -1.5, "p": 2, "damping": {"kind": "constant", "mu": 1}}"#;
        let err = ProblemSpec::from_json(bad).unwrap_err();
        assert!(err.to_string().contains("gamma must exceed -1"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn model() -> impl Strategy<Value = DampingModel> {
            prop_oneof![
                (0.1f64..5.0).prop_map(|mu| DampingModel::Constant { mu }),
                (0.1f64..5.0, -0.95f64..1.0).prop_map(|(mu, kappa)| DampingModel::PowerLaw { mu, kappa }),
                (0.1f64..5.0, 0.1f64..0.9, -2.0f64..2.0).prop_map(|(mu, kappa, exponent)| {
                    DampingModel::PerturbedPower {
                        mu,
                        kappa,
                        perturbation: Perturbation::LogPower { exponent },
                    }
                }),
                (0.1f64..5.0, -0.9f64..-0.1, 0.2f64..2.0).prop_map(|(mu, kappa, rate)| {
                    DampingModel::PerturbedPower {
                        mu,
                        kappa,
                        perturbation: Perturbation::SineWiggle { rate },
                    }
                }),
            ]
        }

        proptest! {
            #[test]
            fn derivative_matches_central_difference(m in model(), t in 0.0f64..100.0) {
                let h = 1e-5 * (1.0 + t);
                // the closed forms extend smoothly to t > -1, so the stencil may dip below 0
                let fd = (m.b(t + h) - m.b(t - h)) / (2.0 * h);
                let exact = m.db(t);
                let scale = exact.abs().max(1e-3 * m.b(t));
                prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {fd} exact {exact}");
            }

            #[test]
            fn damping_is_positive(m in model(), t in 0.0f64..1e4) {
                prop_assert!(m.b(t) > 0.0);
            }
        }
    }
}
