//! Auxiliary functions of the damping:
//!
//! * `B(t) = ∫_0^t 1/b`, and its inverse `A`,
//! * `β(t) = exp(-∫_0^t b)`,
//! * `Γ(t) = ∫_t^∞ β`, `b̂₁ = 1/Γ(0)`,
//! * the multiplier `g = Γ/β`, which solves `-g' + g b = 1`, `g(0) = 1/b̂₁`.
//!
//! `β` and `Γ` underflow quickly for strong damping, so the table keeps
//! their logarithms and computes `g` directly as
//! `g(t) = ∫_t^∞ exp(-∫_t^τ b) dτ`, chained block by block.

use serde::Serialize;

use crate::coeffs::DampingModel;
use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod15, integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxOptions {
    /// absolute tolerance for `B`, and for the residual of the inverse
    pub quad_tol: f64,
    /// relative tolerance used for `g` and for the exponent `∫ b`
    pub rel_tol: f64,
    pub points_per_decade: usize,
    /// first positive grid point
    pub first_point: f64,
}

impl Default for AuxOptions {
    fn default() -> Self {
        AuxOptions {
            quad_tol: 1e-10,
            rel_tol: 1e-13,
            points_per_decade: 64,
            first_point: 1e-2,
        }
    }
}

impl AuxOptions {
    fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.quad_tol.min(1e-12), self.rel_tol)
    }
}

// blocks of the g-chain are kept short relative to the scale (1 + t) on
// which the damping families vary and to the decay length 1/b of the weight,
// so one Kronrod panel resolves ∫ b inside and the adaptive rule sees the peak
const BLOCK_FRACTION: f64 = 0.25;
const DECAY_LENGTHS: f64 = 4.0;
const TAIL_LIMIT: f64 = 1e150;

fn block_end(model: &DampingModel, s: f64, limit: f64) -> f64 {
    let len = (BLOCK_FRACTION * (1.0 + s)).min(DECAY_LENGTHS / model.b(s));
    (s + len).min(limit)
}

/// `(∫_a^c exp(-∫_a^τ b) dτ, ∫_a^c b)` over one short block.
fn g_block(model: &DampingModel, a: f64, c: f64, rel: f64) -> Result<(f64, f64)> {
    // offsets from `a` keep node spacing resolvable when a is large
    let b = |h: f64| model.b(a + h);
    let len = c - a;
    let tol = Tolerance::new(1e-300, rel);
    let int_b = integrate(b, 0.0, len, tol)?.value;
    let j = integrate(
        |h: f64| if h <= 0.0 { 1.0 } else { (-gauss_kronrod15(&b, 0.0, h).0).exp() },
        0.0,
        len,
        tol,
    )?
    .value;
    Ok((j, int_b))
}

/// `(∫_a^c exp(-∫_a^τ b) dτ, ∫_a^c b)` over an arbitrary interval.
fn g_span(model: &DampingModel, a: f64, c: f64, rel: f64) -> Result<(f64, f64)> {
    let mut j_total = 0.0;
    let mut int_total: f64 = 0.0;
    let mut s = a;
    while s < c {
        // the rest of the weight cannot move j_total any more
        if j_total > 0.0 && (-int_total).exp() * (c - s) <= 1e-3 * f64::EPSILON * j_total {
            let rest = integrate(|x: f64| model.b(x), s, c, Tolerance::new(1e-300, rel))?.value;
            return Ok((j_total, int_total + rest));
        }
        let e = block_end(model, s, c);
        let (j, ib) = g_block(model, s, e, rel)?;
        j_total += (-int_total).exp() * j;
        int_total += ib;
        s = e;
    }
    Ok((j_total, int_total))
}

/// `∫_s^∞ exp(-∫_s^τ b)` is asymptotically `b / (b² + b')`; exact for
/// constant damping and for `mu / (1+t)`.
fn tail_proxy(model: &DampingModel, s: f64) -> Option<f64> {
    let b = model.b(s);
    let denom = b * b + model.db(s);
    (denom > 0.0).then(|| b / denom)
}

/// `g(t) = Γ(t)/β(t)`, evaluated from scratch by chaining blocks towards
/// infinity until two successive tail estimates agree.
fn g_to_infinity(model: &DampingModel, t: f64, rel: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut s = t;
    let mut predicted = tail_proxy(model, s);
    while s < TAIL_LIMIT {
        let c = block_end(model, s, f64::INFINITY);
        let (j, ib) = g_block(model, s, c, rel)?;
        let new_total = total + weight * j;
        let new_weight = weight * (-ib).exp();
        let new_predicted = tail_proxy(model, c);
        if let (Some(old), Some(new)) = (predicted, new_predicted) {
            let est_old = total + weight * old;
            let est_new = new_total + new_weight * new;
            if (est_new - est_old).abs() <= rel * est_new {
                return Ok(est_new);
            }
        }
        if new_weight == 0.0 {
            return Ok(new_total);
        }
        total = new_total;
        weight = new_weight;
        s = c;
        predicted = new_predicted;
    }
    Err(Error::TailNonconvergence { reached: s })
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be finite and nonnegative, got {t}")))
    }
}

/// `B(t) = ∫_0^t 1/b` by adaptive quadrature.
pub fn compute_big_b(model: &DampingModel, t: f64) -> Result<f64> {
    check_time(t)?;
    let tol = AuxOptions::default().tolerance();
    Ok(integrate(|s| 1.0 / model.b(s), 0.0, t, tol)?.value)
}

/// `β(t) = exp(-∫_0^t b)`.
pub fn compute_beta(model: &DampingModel, t: f64) -> Result<f64> {
    check_time(t)?;
    let tol = AuxOptions::default().tolerance();
    Ok((-integrate(|s| model.b(s), 0.0, t, tol)?.value).exp())
}

/// `Γ(t) = ∫_t^∞ β`.
pub fn compute_big_gamma(model: &DampingModel, t: f64) -> Result<f64> {
    check_time(t)?;
    let opts = AuxOptions::default();
    let g = g_to_infinity(model, t, opts.rel_tol)?;
    Ok(compute_beta(model, t)? * g)
}

/// `b̂₁ = 1 / Γ(0) = 1 / ‖β‖_{L¹}`.
pub fn compute_bhat1(model: &DampingModel) -> Result<f64> {
    Ok(1.0 / g_to_infinity(model, 0.0, AuxOptions::default().rel_tol)?)
}

/// Tabulated auxiliary functions on a log-spaced grid `0 = t_0 < … < t_K`.
///
/// Off-grid values are computed from the nearest grid point below with a
/// local quadrature, so they carry the same accuracy as grid values.
#[derive(Debug, Clone)]
pub struct AuxTable {
    model: DampingModel,
    opts: AuxOptions,
    grid: Vec<f64>,
    big_b: Vec<f64>,
    /// `ln β = -∫_0^t b`
    ln_beta: Vec<f64>,
    g: Vec<f64>,
    bhat1: f64,
}

impl AuxTable {
    pub fn build(model: DampingModel, horizon: f64, opts: AuxOptions) -> Result<Self> {
        model.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "table horizon must be positive, got {horizon}"
            )));
        }
        if opts.points_per_decade == 0 || !(opts.first_point > 0.0) {
            return Err(Error::InvalidParameter("grid options must be positive".into()));
        }
        let grid = log_grid(horizon, opts.first_point, opts.points_per_decade);
        let tol = opts.tolerance();
        let k = grid.len();

        let mut big_b = vec![0.0; k];
        let mut ln_beta = vec![0.0; k];
        let mut spans = Vec::with_capacity(k - 1);
        for i in 0..k - 1 {
            let (a, c) = (grid[i], grid[i + 1]);
            let db = integrate(|s| 1.0 / model.b(s), a, c, tol)?.value;
            let (j, ib) = g_span(&model, a, c, opts.rel_tol)?;
            big_b[i + 1] = big_b[i] + db;
            ln_beta[i + 1] = ln_beta[i] - ib;
            spans.push((j, ib));
        }

        let mut g = vec![0.0; k];
        g[k - 1] = g_to_infinity(&model, grid[k - 1], opts.rel_tol)?;
        for i in (0..k - 1).rev() {
            let (j, ib) = spans[i];
            g[i] = j + (-ib).exp() * g[i + 1];
        }
        let bhat1 = 1.0 / g[0];

        Ok(AuxTable {
            model,
            opts,
            grid,
            big_b,
            ln_beta,
            g,
            bhat1,
        })
    }

    pub fn model(&self) -> &DampingModel {
        &self.model
    }

    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("grid is nonempty")
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn quad_tol(&self) -> f64 {
        self.opts.quad_tol
    }

    pub fn bhat1(&self) -> f64 {
        self.bhat1
    }

    pub fn big_b_values(&self) -> &[f64] {
        &self.big_b
    }

    pub fn ln_beta_values(&self) -> &[f64] {
        &self.ln_beta
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    pub fn beta_values(&self) -> Vec<f64> {
        self.ln_beta.iter().map(|l| l.exp()).collect()
    }

    pub fn ln_big_gamma_values(&self) -> Vec<f64> {
        self.ln_beta.iter().zip(&self.g).map(|(l, g)| l + g.ln()).collect()
    }

    pub fn big_gamma_values(&self) -> Vec<f64> {
        self.ln_big_gamma_values().into_iter().map(f64::exp).collect()
    }

    fn locate(&self, t: f64, what: &'static str) -> Result<usize> {
        let max = self.horizon();
        if !(t >= 0.0) || t > max {
            return Err(Error::OutOfRange { what, value: t, max });
        }
        // last index with grid[i] <= t
        let i = self.grid.partition_point(|&x| x <= t) - 1;
        Ok(i.min(self.grid.len() - 1))
    }

    pub fn big_b(&self, t: f64) -> Result<f64> {
        let i = self.locate(t, "t")?;
        if t == self.grid[i] {
            return Ok(self.big_b[i]);
        }
        let db = integrate(|s| 1.0 / self.model.b(s), self.grid[i], t, self.opts.tolerance())?;
        Ok(self.big_b[i] + db.value)
    }

    pub fn ln_beta(&self, t: f64) -> Result<f64> {
        let i = self.locate(t, "t")?;
        if t == self.grid[i] {
            return Ok(self.ln_beta[i]);
        }
        let ib = integrate(|s| self.model.b(s), self.grid[i], t, self.opts.tolerance())?;
        Ok(self.ln_beta[i] - ib.value)
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        Ok(self.ln_beta(t)?.exp())
    }

    /// `g(t) = Γ(t)/β(t)`.
    pub fn g(&self, t: f64) -> Result<f64> {
        let i = self.locate(t, "t")?;
        if t == self.grid[i] {
            return Ok(self.g[i]);
        }
        let (j, ib) = g_span(&self.model, t, self.grid[i + 1], self.opts.rel_tol)?;
        Ok(j + (-ib).exp() * self.g[i + 1])
    }

    /// `g'(t)` from the identity `g' = g b - 1`.
    pub fn g_prime(&self, t: f64) -> Result<f64> {
        Ok(self.g(t)? * self.model.b(t) - 1.0)
    }

    pub fn big_gamma(&self, t: f64) -> Result<f64> {
        Ok((self.ln_beta(t)? + self.g(t)?.ln()).exp())
    }

    /// `A(s) = B⁻¹(s)`: bracket in the table, then safeguarded Newton on
    /// `B(t) - s` with the exact derivative `1/b(t)`.
    pub fn invert_big_b(&self, s: f64) -> Result<f64> {
        let max = *self.big_b.last().expect("grid is nonempty");
        if !(s >= 0.0) || s > max {
            return Err(Error::OutOfRange {
                what: "B",
                value: s,
                max,
            });
        }
        let i = (self.big_b.partition_point(|&v| v <= s) - 1).min(self.grid.len() - 1);
        if s == self.big_b[i] {
            return Ok(self.grid[i]);
        }
        let (mut lo, mut hi) = (self.grid[i], self.grid[i + 1]);
        let base = self.big_b[i];
        let tol = self.opts.tolerance();
        let residual_tol = self.opts.quad_tol.max(8.0 * f64::EPSILON * s);
        let big_b_at = |t: f64| -> Result<f64> {
            Ok(base + integrate(|x| 1.0 / self.model.b(x), self.grid[i], t, tol)?.value)
        };

        // secant start from the bracketing table values
        let frac = (s - base) / (self.big_b[i + 1] - base);
        let mut t = lo + frac * (hi - lo);
        for _ in 0..100 {
            let r = big_b_at(t)? - s;
            if r.abs() <= residual_tol {
                return Ok(t);
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = t - r * self.model.b(t);
            t = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(t);
            }
        }
        Err(Error::QuadratureNonconvergence {
            a: self.grid[i],
            b: self.grid[i + 1],
            err: (big_b_at(t)? - s).abs(),
            tol: residual_tol,
        })
    }

    /// Rows `(t, B, β, Γ, g)` at the grid points.
    pub fn rows(&self) -> Vec<AuxRow> {
        let gamma = self.big_gamma_values();
        (0..self.grid.len())
            .map(|i| AuxRow {
                t: self.grid[i],
                big_b: self.big_b[i],
                beta: self.ln_beta[i].exp(),
                big_gamma: gamma[i],
                g: self.g[i],
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct AuxRow {
    pub t: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub beta: f64,
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub g: f64,
}

pub fn invert_big_b(aux: &AuxTable, s: f64) -> Result<f64> {
    aux.invert_big_b(s)
}

pub fn compute_g(aux: &AuxTable, t: f64) -> Result<f64> {
    aux.g(t)
}

/// `0`, then `first, …, horizon` with `per_decade` points per decade.
fn log_grid(horizon: f64, first: f64, per_decade: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    if horizon <= first {
        grid.push(horizon);
        return grid;
    }
    let decades = (horizon / first).log10();
    let steps = (decades * per_decade as f64).ceil() as usize;
    for k in 0..steps {
        grid.push(first * 10f64.powf(k as f64 / per_decade as f64));
    }
    grid.push(horizon);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs());
    grid
}

fn log_samples(from: f64, to: f64, per_decade: usize) -> Vec<f64> {
    let n = ((to / from).log10() * per_decade as f64).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| from * (to / from).powf(k as f64 / n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisVerdicts {
    /// `liminf b'/b² > -1`
    pub liminf_ratio: bool,
    /// `limsup t b'/b < 1`
    pub limsup_log_derivative: bool,
    /// `liminf t b(t) > 1`
    pub tb_lower: bool,
    /// growth exponent `m < 1` in `-M/t ≤ b'/b ≤ m/t`
    pub growth: bool,
    /// `(b² + b')/b² ≥ ε > 0`
    pub effective: bool,
}

impl HypothesisVerdicts {
    pub fn all(&self) -> bool {
        self.liminf_ratio && self.limsup_log_derivative && self.tb_lower && self.growth && self.effective
    }
}

/// Tail-window evidence for the effective-damping conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub horizon: f64,
    pub margin: f64,
    pub liminf_est: f64,
    pub limsup_est: f64,
    pub tb_liminf: f64,
    pub growth_m: f64,
    pub growth_big_m: f64,
    pub eps_lower: f64,
    pub c_upper: f64,
    /// fitted constant in `|b'| ≤ C b²` over the whole sampled range
    pub derivative_bound: f64,
    pub passes: HypothesisVerdicts,
    /// the tail extrema still drift by more than half the margin
    pub inconclusive: bool,
    /// verdict from the closed-form limits of the family
    pub analytic: bool,
}

pub const DEFAULT_MARGIN: f64 = 0.05;

pub fn check_hypothesis(model: &DampingModel, horizon: f64, margin: f64) -> Result<HypothesisReport> {
    model.validate()?;
    if !(horizon >= 100.0) {
        return Err(Error::Precondition(format!(
            "hypothesis check needs a horizon of at least 100, got {horizon}"
        )));
    }
    let samples = log_samples(1e-3, horizon, 64);
    let tail_start = horizon / 10.0;
    let split = horizon / 10f64.sqrt();

    struct Window {
        ratio_min: f64,
        log_max: f64,
        log_min: f64,
        tb_min: f64,
        eff_min: f64,
        eff_max: f64,
    }
    let empty = || Window {
        ratio_min: f64::INFINITY,
        log_max: f64::NEG_INFINITY,
        log_min: f64::INFINITY,
        tb_min: f64::INFINITY,
        eff_min: f64::INFINITY,
        eff_max: f64::NEG_INFINITY,
    };
    let (mut early, mut late) = (empty(), empty());
    let mut derivative_bound: f64 = 0.0;
    for &t in std::iter::once(&0.0).chain(&samples) {
        let b = model.b(t);
        let db = model.db(t);
        derivative_bound = derivative_bound.max(db.abs() / (b * b));
        if t < tail_start {
            continue;
        }
        let w = if t < split { &mut early } else { &mut late };
        let ratio = db / (b * b);
        let log_der = t * db / b;
        w.ratio_min = w.ratio_min.min(ratio);
        w.log_max = w.log_max.max(log_der);
        w.log_min = w.log_min.min(log_der);
        w.tb_min = w.tb_min.min(t * b);
        w.eff_min = w.eff_min.min(1.0 + ratio);
        w.eff_max = w.eff_max.max(1.0 + ratio);
    }

    let liminf_est = early.ratio_min.min(late.ratio_min);
    let limsup_est = early.log_max.max(late.log_max);
    let tb_liminf = early.tb_min.min(late.tb_min);
    let growth_m = limsup_est.max(0.0);
    let growth_big_m = (-early.log_min.min(late.log_min)).max(0.0);
    let eps_lower = early.eff_min.min(late.eff_min);
    let c_upper = early.eff_max.max(late.eff_max);
    let drift = (early.ratio_min - late.ratio_min)
        .abs()
        .max((early.log_max - late.log_max).abs());

    Ok(HypothesisReport {
        horizon,
        margin,
        liminf_est,
        limsup_est,
        tb_liminf,
        growth_m,
        growth_big_m,
        eps_lower,
        c_upper,
        derivative_bound,
        passes: HypothesisVerdicts {
            liminf_ratio: liminf_est > -1.0 + margin,
            limsup_log_derivative: limsup_est < 1.0 - margin,
            tb_lower: tb_liminf > 1.0,
            growth: growth_m < 1.0 - margin,
            effective: eps_lower > 0.0,
        },
        inconclusive: drift > 0.5 * margin,
        analytic: model.analytically_admissible(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub lambda: f64,
    pub b_ratio_min: f64,
    pub b_ratio_max: f64,
    /// `[λ^-M, λ^m]`
    pub b_bounds: (f64, f64),
    /// `min B(λt)/B(t) / λ^(1-m)`
    pub big_b_lower_ratio: f64,
    /// `max B(λt)/B(t) / λ^(1+M)`
    pub big_b_upper_ratio: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// range of `Γ b / β = g b`
    pub gamma_ratio: (f64, f64),
    /// range of `B b / t`
    pub big_b_ratio: (f64, f64),
    pub growth_m: f64,
    pub growth_big_m: f64,
    pub scaling: Vec<ScalingCheck>,
}

/// Slack allowed on the implicit constants of `B(λt)/B(t) ≍ λ^…`.
pub const SCALING_CONSTANT: f64 = 2.0;

/// Ranges of `Γb/β` and `Bb/t` over the grid points in `[from, to]`, and the
/// dilation bounds on `b` and `B` for `λ ∈ {2, 4, 8}`.
pub fn verify_equivalences(aux: &AuxTable, from: f64, to: f64, margin: f64) -> Result<EquivalenceReport> {
    if to > aux.horizon() {
        return Err(Error::OutOfRange {
            what: "window end",
            value: to,
            max: aux.horizon(),
        });
    }
    let model = aux.model();
    let mut gamma_ratio = (f64::INFINITY, f64::NEG_INFINITY);
    let mut big_b_ratio = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, &t) in aux.grid.iter().enumerate() {
        if t < from || t > to {
            continue;
        }
        let b = model.b(t);
        let gr = aux.g[i] * b;
        gamma_ratio = (gamma_ratio.0.min(gr), gamma_ratio.1.max(gr));
        if t > 0.0 {
            let br = aux.big_b[i] * b / t;
            big_b_ratio = (big_b_ratio.0.min(br), big_b_ratio.1.max(br));
        }
    }

    let (mut growth_m, mut growth_big_m) = (0.0, 0.0);
    let mut scaling = Vec::new();
    if to >= 100.0 {
        let hyp = check_hypothesis(model, to, margin)?;
        growth_m = hyp.growth_m + margin;
        growth_big_m = hyp.growth_big_m + margin;
        for lambda in [2.0, 4.0, 8.0] {
            let mut check = ScalingCheck {
                lambda,
                b_ratio_min: f64::INFINITY,
                b_ratio_max: f64::NEG_INFINITY,
                b_bounds: (lambda.powf(-growth_big_m), lambda.powf(growth_m)),
                big_b_lower_ratio: f64::INFINITY,
                big_b_upper_ratio: f64::NEG_INFINITY,
                passes: false,
            };
            for t in log_samples(to / 80.0, to / 8.0, 8) {
                let br = model.b(lambda * t) / model.b(t);
                check.b_ratio_min = check.b_ratio_min.min(br);
                check.b_ratio_max = check.b_ratio_max.max(br);
                let bb = aux.big_b(lambda * t)? / aux.big_b(t)?;
                check.big_b_lower_ratio = check.big_b_lower_ratio.min(bb / lambda.powf(1.0 - growth_m));
                check.big_b_upper_ratio = check.big_b_upper_ratio.max(bb / lambda.powf(1.0 + growth_big_m));
            }
            check.passes = check.b_ratio_min >= check.b_bounds.0
                && check.b_ratio_max <= check.b_bounds.1
                && check.big_b_lower_ratio >= 1.0 / SCALING_CONSTANT
                && check.big_b_upper_ratio <= SCALING_CONSTANT;
            scaling.push(check);
        }
    }

    Ok(EquivalenceReport {
        gamma_ratio,
        big_b_ratio,
        growth_m,
        growth_big_m,
        scaling,
    })
}
