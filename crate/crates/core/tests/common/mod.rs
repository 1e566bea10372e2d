//! Independent closed forms for the damping diagnostics.

#![allow(dead_code)]

use blowuplab_core::DampingModel;

/// `Γ(2/3)`
const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;

/// `(B, β, Γ, g)` at `t`, or `None` for models without a closed form here.
pub fn closed_form(model: &DampingModel, t: f64) -> Option<(f64, f64, f64, f64)> {
    match *model {
        DampingModel::Constant { mu } => {
            let beta = (-mu * t).exp();
            Some((t / mu, beta, beta / mu, 1.0 / mu))
        }
        DampingModel::PowerLaw { mu, kappa } if mu == 1.0 && kappa == 0.5 => {
            // b = (1+t)^(-1/2), ∫b = 2(v - 1) with v = sqrt(1+t)
            let v = (1.0 + t).sqrt();
            let big_b = (2.0 / 3.0) * ((1.0 + t).powf(1.5) - 1.0);
            let beta = (-2.0 * (v - 1.0)).exp();
            let g = v + 0.5;
            Some((big_b, beta, beta * g, g))
        }
        DampingModel::PowerLaw { mu, kappa } if mu == 1.0 && kappa == -0.5 => {
            // b = (1+t)^(1/2), ∫b = (2/3)((1+t)^(3/2) - 1)
            let big_b = 2.0 * ((1.0 + t).sqrt() - 1.0);
            let w = (2.0 / 3.0) * (1.0 + t).powf(1.5);
            let beta = (-(w - 2.0 / 3.0)).exp();
            let g = (2.0 / 3.0) * 1.5f64.powf(2.0 / 3.0) * scaled_upper_gamma(2.0 / 3.0, w);
            Some((big_b, beta, beta * g, g))
        }
        DampingModel::PowerLaw { mu, kappa } if kappa == 1.0 && mu > 1.0 => {
            let s = 1.0 + t;
            let big_b = (s * s - 1.0) / (2.0 * mu);
            let beta = s.powf(-mu);
            let g = s / (mu - 1.0);
            Some((big_b, beta, beta * g, g))
        }
        _ => None,
    }
}

/// `e^x Γ(a, x)`: series for the lower function when `x < a + 1`,
/// Lentz continued fraction otherwise. Only `a = 2/3` is supported by the
/// series branch, which needs `Γ(a)`.
pub fn scaled_upper_gamma(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        assert!((a - 2.0 / 3.0).abs() < 1e-15);
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut k = a;
        while term.abs() > 1e-17 * sum.abs() {
            k += 1.0;
            term *= x / k;
            sum += term;
        }
        let lower = sum * x.powf(a) * (-x).exp();
        return (GAMMA_TWO_THIRDS - lower) * x.exp();
    }
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    x.powf(a) * h
}

pub fn rel_err(x: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        x.abs()
    } else {
        ((x - exact) / exact).abs()
    }
}

/// Damping families used across the checks.
pub fn catalog() -> Vec<DampingModel> {
    use blowuplab_core::Perturbation;
    vec![
        DampingModel::Constant { mu: 0.5 },
        DampingModel::Constant { mu: 1.0 },
        DampingModel::Constant { mu: 2.0 },
        DampingModel::PowerLaw { mu: 1.0, kappa: -0.5 },
        DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 },
        DampingModel::PowerLaw { mu: 2.0, kappa: 1.0 },
        DampingModel::PerturbedPower {
            mu: 1.0,
            kappa: 0.5,
            perturbation: Perturbation::LogPower { exponent: 1.0 },
        },
        DampingModel::PerturbedPower {
            mu: 1.0,
            kappa: 0.5,
            perturbation: Perturbation::SineWiggle { rate: 0.25 },
        },
    ]
}
