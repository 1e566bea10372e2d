//! Closed-form critical exponents and admissible ranges of `p`.

use serde::Serialize;

use crate::coeffs::ProblemSpec;
use crate::error::{Error, Result};

/// Positive part `[x]⁺`.
pub fn pos(x: f64) -> f64 {
    x.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentContext {
    Damped,
    QuasiHomogeneous,
    GrushinCoarse,
    TricomiRefined,
    WaveTricomi,
    Hardy,
    HardyDamped,
}

/// An admissible range `p_min < p ≤ p_crit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentReport {
    pub p_min: f64,
    pub p_crit: f64,
    pub meaningful: bool,
    pub context: ExponentContext,
}

impl ExponentReport {
    fn new(p_min: f64, p_crit: f64, context: ExponentContext) -> Self {
        ExponentReport {
            p_min,
            p_crit,
            meaningful: p_min < p_crit,
            context,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.p_min < p && p <= self.p_crit
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// The value of `δ` at which the damped range becomes empty.
pub fn meaningful_delta_threshold(n: usize, alpha: f64, gamma: f64) -> f64 {
    (n as f64 * pos(gamma + alpha) - 2.0 * (1.0 + gamma)) / (1.0 - alpha)
}

/// `p_C = 1 + 2(1+γ)/(n(1-α)) + δ/n` and
/// `p_min = 1 + max{[γ+α]⁺/(1-α), [δ]⁺/n}` for the damped wave.
pub fn p_crit_damped(n: usize, alpha: f64, gamma: f64, delta: f64) -> Result<ExponentReport> {
    require(n >= 1, || "space dimension must be at least 1".into())?;
    require(alpha < 1.0, || format!("alpha must be below 1, got {alpha}"))?;
    require(gamma > -1.0, || format!("gamma must exceed -1, got {gamma}"))?;
    require(delta.is_finite(), || "delta must be finite".into())?;
    let nf = n as f64;
    let p_crit = 1.0 + 2.0 * (1.0 + gamma) / (nf * (1.0 - alpha)) + delta / nf;
    let p_min = 1.0 + (pos(gamma + alpha) / (1.0 - alpha)).max(pos(delta) / nf);
    let mut report = ExponentReport::new(p_min, p_crit, ExponentContext::Damped);
    // decide on the linear condition in δ, which is exact at the boundary
    report.meaningful = delta > meaningful_delta_threshold(n, alpha, gamma);
    Ok(report)
}

pub fn p_crit_for(spec: &ProblemSpec) -> Result<ExponentReport> {
    p_crit_damped(spec.n, spec.alpha, spec.gamma, spec.delta)
}

pub fn fujita(n: usize) -> Result<f64> {
    require(n >= 1, || "Fujita exponent needs n >= 1".into())?;
    Ok(1.0 + 2.0 / n as f64)
}

pub fn kato(n: usize) -> Result<f64> {
    require(n >= 2, || format!("Kato exponent needs n >= 2, got {n}"))?;
    Ok(1.0 + 2.0 / (n as f64 - 1.0))
}

/// Positive root of `k p² - (k+2) p - 2 = 0`.
pub fn strauss(k: usize) -> Result<f64> {
    require(k >= 1, || "Strauss exponent needs k >= 1".into())?;
    let k = k as f64;
    let c = 0.5 + 1.0 / k;
    Ok(c + (c * c + 2.0 / k).sqrt())
}

pub fn sobolev(n: usize) -> Result<f64> {
    require(n >= 3, || format!("Sobolev exponent needs n >= 3, got {n}"))?;
    Ok((n as f64 + 2.0) / (n as f64 - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicExponents {
    pub n: usize,
    pub fujita: f64,
    pub kato: Option<f64>,
    /// `p_Str(n-1)`
    pub strauss: Option<f64>,
    pub sobolev: Option<f64>,
}

pub fn classic_exponents(n: usize) -> Result<ClassicExponents> {
    Ok(ClassicExponents {
        n,
        fujita: fujita(n)?,
        kato: kato(n).ok(),
        strauss: if n >= 3 { strauss(n - 1).ok() } else { None },
        sobolev: sobolev(n).ok(),
    })
}

/// Upper bound `1 + (θ+h)/(d-h)` for a quasi-homogeneous operator of type
/// `(d1, d2, h)` on `R^{N1} × R^{N2}` with weight `|x1|^{θ1} |x2|^{θ2}`.
/// No lower bound is available in general, so `p_min = 1`.
pub fn quasi_homog_range(
    d1: f64,
    d2: f64,
    n1: usize,
    n2: usize,
    h: f64,
    theta1: f64,
    theta2: f64,
) -> Result<ExponentReport> {
    require(d1 > 0.0 && d2 > 0.0, || "weights d1, d2 must be positive".into())?;
    let theta = d1 * theta1 + d2 * theta2;
    let d = d1 * n1 as f64 + d2 * n2 as f64;
    require(h > -theta && h < d, || {
        format!("empty range: h = {h} must lie in ({}, {d})", -theta)
    })?;
    Ok(ExponentReport::new(
        1.0,
        1.0 + (theta + h) / (d - h),
        ExponentContext::QuasiHomogeneous,
    ))
}

/// Local integrability of `|x1|^{-θ1(p'-1)} |x2|^{-θ2(p'-1)}` near the
/// coordinate subspaces, for constant coefficients.
pub fn quasi_homog_weight_integrable(n1: usize, n2: usize, theta1: f64, theta2: f64, p: f64) -> bool {
    let q = 1.0 / (p - 1.0);
    pos(theta1) * q < n1 as f64 && pos(theta2) * q < n2 as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrushinReport {
    pub coarse: ExponentReport,
    /// only for the Tricomi case `k = 1`, `θ2 = 0`
    pub refined: Option<ExponentReport>,
}

/// Ranges for `Δ_x u + g_γ(x) Δ_y u = |x|^{θ1} |y|^{θ2} |u|^p`, `x ∈ R^k`, `y ∈ R^{N-k}`.
pub fn grushin_tricomi_ranges(n: usize, k: usize, gamma: f64, theta1: f64, theta2: f64) -> Result<GrushinReport> {
    require(k >= 1 && k < n, || format!("need 1 <= k <= N-1, got k = {k}, N = {n}"))?;
    let nf = n as f64;
    let kf = k as f64;
    let num = 2.0 + theta1 + (1.0 + gamma) * theta2;
    let den = nf + (nf - kf) * gamma - 2.0;
    require(num > 0.0, || "need 2 + θ1 + (1+γ)θ2 > 0".into())?;
    require(den > 0.0, || "need N + (N-k)γ - 2 > 0".into())?;
    let coarse = ExponentReport::new(
        1.0 + (pos(theta1) / kf).max(pos(theta2) / (nf - kf)),
        1.0 + num / den,
        ExponentContext::GrushinCoarse,
    );
    let refined = if k == 1 && theta2 == 0.0 {
        Some(tricomi_refined(n, gamma, theta1)?)
    } else {
        None
    };
    Ok(GrushinReport { coarse, refined })
}

/// `1 + [θ-2γ]⁺/(1+2γ) < p ≤ 1 + (θ+2)/(N+(N-1)γ-2)` for `u_xx + x^{2γ} Δ_y u = |x|^θ |u|^p`.
pub fn tricomi_refined(n: usize, gamma: f64, theta: f64) -> Result<ExponentReport> {
    require(n >= 2, || "Tricomi range needs N >= 2".into())?;
    require(theta > -2.0, || format!("theta must exceed -2, got {theta}"))?;
    require(1.0 + 2.0 * gamma > 0.0, || "need 1 + 2γ > 0".into())?;
    let nf = n as f64;
    let den = nf + (nf - 1.0) * gamma - 2.0;
    require(den > 0.0, || "need N + (N-1)γ - 2 > 0".into())?;
    Ok(ExponentReport::new(
        1.0 + pos(theta - 2.0 * gamma) / (1.0 + 2.0 * gamma),
        1.0 + (theta + 2.0) / den,
        ExponentContext::TricomiRefined,
    ))
}

/// Range for `u_tt - t^{2γ} Δu = f(t)|u|^p` with `f ≳ t^θ`.
pub fn wave_tricomi_range(n: usize, gamma: f64, theta: f64) -> Result<ExponentReport> {
    require(n >= 1, || "space dimension must be at least 1".into())?;
    require(theta > -2.0, || format!("theta must exceed -2, got {theta}"))?;
    require(1.0 + 2.0 * gamma > 0.0, || "need 1 + 2γ > 0".into())?;
    let nf = n as f64;
    let den = nf + nf * gamma - 1.0;
    require(den > 0.0, || "need n + nγ - 1 > 0".into())?;
    Ok(ExponentReport::new(
        1.0 + pos(theta - 2.0 * gamma) / (1.0 + 2.0 * gamma),
        1.0 + (theta + 2.0) / den,
        ExponentContext::WaveTricomi,
    ))
}

/// `s(n, λ) = sqrt((n-2)²/4 + λ) - (n-2)/2`, the exponent of `|x|^s` solving
/// `-Δg + λ|x|^{-2} g = 0`.
pub fn hardy_s(n: usize, lambda: f64) -> Result<f64> {
    require(n >= 3, || format!("Hardy potential needs n >= 3, got {n}"))?;
    require(lambda >= 0.0, || format!("lambda must be nonnegative, got {lambda}"))?;
    let h = (n as f64 - 2.0) / 2.0;
    Ok((h * h + lambda).sqrt() - h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyReport {
    pub s: f64,
    pub range: ExponentReport,
    /// `λ > n-1`, i.e. `s > 1`: the multiplier `|x|^s` has bounded derivatives
    pub strict_multiplier: bool,
}

/// `1 < p ≤ 1 + 2/(n-2+s+2/m)` for `∂_t^m u - Δu + λ|x|^{-2} u = |u|^p`.
pub fn hardy_range(n: usize, lambda: f64, m: usize) -> Result<HardyReport> {
    require(m >= 1, || "time order m must be at least 1".into())?;
    let s = hardy_s(n, lambda)?;
    let den = n as f64 - 2.0 + s + 2.0 / m as f64;
    let upper = (den + 2.0) / den;
    Ok(HardyReport {
        s,
        range: ExponentReport::new(1.0, upper, ExponentContext::Hardy),
        strict_multiplier: lambda > n as f64 - 1.0,
    })
}

/// Damped wave with speed `a`, damping `b` and mass term `a(t) λ |x|^{-2}`.
pub fn hardy_damped_range(n: usize, lambda: f64, alpha: f64, gamma: f64, delta: f64) -> Result<HardyReport> {
    require(alpha < 1.0, || format!("alpha must be below 1, got {alpha}"))?;
    require(gamma > -1.0, || format!("gamma must exceed -1, got {gamma}"))?;
    let s = hardy_s(n, lambda)?;
    let ns = n as f64 + s;
    let upper = 1.0 + (2.0 / ns) * ((1.0 + gamma) / (1.0 - alpha) + delta / 2.0);
    let lower = 1.0 + (pos(gamma + alpha) / (1.0 - alpha)).max(pos(delta) / ns);
    Ok(HardyReport {
        s,
        range: ExponentReport::new(lower, upper, ExponentContext::HardyDamped),
        strict_multiplier: lambda > n as f64 - 1.0,
    })
}
