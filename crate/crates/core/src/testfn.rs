//! Cut-off functions, product test functions and the scaled boxes they live on.
//!
//! The bridge between the plateau and zero is
//! `G(s) = e^{-1/(1-s)} / (e^{-1/s} + e^{-1/(1-s)}) = 1 / (1 + e^{q(s)})`,
//! `q(s) = 1/(1-s) - 1/s`, which is smooth on `[0, 1]` with all
//! derivatives vanishing at both ends.

use serde::Serialize;

use crate::auxcalc::AuxTable;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 2;

/// `(q, q', q'')` of the bridge exponent.
fn bridge_exponent(s: f64) -> (f64, f64, f64) {
    let u = 1.0 - s;
    (
        1.0 / u - 1.0 / s,
        1.0 / (s * s) + 1.0 / (u * u),
        2.0 / (u * u * u) - 2.0 / (s * s * s),
    )
}

/// `(G, 1 - G, ln G)` evaluated without cancellation.
fn logistic_parts(q: f64) -> (f64, f64, f64) {
    if q > 0.0 {
        let e = (-q).exp();
        (e / (1.0 + e), 1.0 / (1.0 + e), -q - e.ln_1p())
    } else {
        let e = q.exp();
        (1.0 / (1.0 + e), e / (1.0 + e), -e.ln_1p())
    }
}

/// `|y|` mapped onto the bridge variable, or where it falls.
enum Zone {
    Plateau,
    Bridge { s: f64, sign: f64 },
    Outside,
}

fn zone(y: f64) -> Zone {
    let a = y.abs();
    if a <= 0.5 {
        Zone::Plateau
    } else if a >= 1.0 {
        Zone::Outside
    } else {
        Zone::Bridge {
            s: 2.0 * (a - 0.5),
            sign: y.signum(),
        }
    }
}

/// `(Φ, Φ', Φ'')` of the even bump.
pub fn phi_derivatives(y: f64) -> [f64; 3] {
    match zone(y) {
        Zone::Plateau => [1.0, 0.0, 0.0],
        Zone::Outside => [0.0, 0.0, 0.0],
        Zone::Bridge { s, sign } => {
            let (q, dq, ddq) = bridge_exponent(s);
            let (g, h, _) = logistic_parts(q);
            let dg = -g * h * dq;
            let ddg = -(dg * (h - g) * dq + g * h * ddq);
            [g, 2.0 * sign * dg, 4.0 * ddg]
        }
    }
}

/// `ln Φ` and the logarithmic derivatives `(Φ'/Φ, Φ''/Φ)` inside the bridge.
fn phi_log_ratios(y: f64) -> Option<(f64, f64, f64)> {
    match zone(y) {
        Zone::Bridge { s, sign } => {
            let (q, dq, ddq) = bridge_exponent(s);
            let (g, h, ln_g) = logistic_parts(q);
            // G'/G = -(1-G) q'
            let r1 = -h * dq;
            let r2 = -(r1 * (h - g) * dq + h * ddq);
            Some((ln_g, 2.0 * sign * r1, 4.0 * r2))
        }
        _ => None,
    }
}

/// A bump `Φ` raised to an integer power `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BumpProfile {
    pub sigma: u32,
    pub max_order: usize,
}

impl BumpProfile {
    pub fn new(sigma: u32) -> Result<Self> {
        if sigma == 0 {
            return Err(Error::InvalidParameter("sigma must be a positive integer".into()));
        }
        Ok(BumpProfile {
            sigma,
            max_order: MAX_ORDER,
        })
    }

    /// `σ = ceil(2 p') + 1`, enough for second derivatives in the Hölder step.
    pub fn for_exponent(p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        let pc = p / (p - 1.0);
        Self::new((2.0 * pc).ceil() as u32 + 1)
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.max_order {
            Err(Error::OrderOverflow {
                order,
                max: self.max_order,
            })
        } else {
            Ok(())
        }
    }

    fn power_derivative(&self, phi: [f64; 3], order: usize) -> f64 {
        let s = self.sigma as i32;
        let sf = s as f64;
        let [v, d1, d2] = phi;
        match order {
            0 => v.powi(s),
            1 => sf * v.powi(s - 1) * d1,
            _ => {
                let first = if s >= 2 { sf * (sf - 1.0) * v.powi(s - 2) * d1 * d1 } else { 0.0 };
                first + sf * v.powi(s - 1) * d2
            }
        }
    }

    /// `d^order/dy^order Φ^σ(y)`.
    pub fn bump_eval(&self, order: usize, y: f64) -> Result<f64> {
        self.check_order(order)?;
        Ok(match zone(y) {
            Zone::Plateau => (order == 0) as u8 as f64,
            Zone::Outside => 0.0,
            Zone::Bridge { .. } => self.power_derivative(phi_derivatives(y), order),
        })
    }

    /// `d^order/dt^order η^σ(t)`: one-sided cut-off, 1 on `[0, 1/2]`, 0 from 1 on.
    pub fn eta_eval(&self, order: usize, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("time cut-off needs t >= 0, got {t}")));
        }
        self.bump_eval(order, t)
    }

    /// `|d^k Φ^σ|^r / Φ^σ` with `0/0 := 0`.
    pub fn power_ratio(&self, order: usize, r: f64, y: f64) -> Result<f64> {
        self.check_order(order)?;
        let Some((ln_phi, r1, r2)) = phi_log_ratios(y) else {
            // plateau: derivatives vanish, Φ = 1; outside: 0/0
            return Ok(if order == 0 && y.abs() <= 0.5 { 1.0 } else { 0.0 });
        };
        let sf = self.sigma as f64;
        // d^k Φ^σ = Φ^σ P_k
        let p = match order {
            0 => 1.0,
            1 => sf * r1,
            _ => sf * (sf - 1.0) * r1 * r1 + sf * r2,
        };
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok((sf * (r - 1.0) * ln_phi + r * p.abs().ln()).exp())
    }
}

/// Maximum of `|d^k Φ^σ|^r / Φ^σ` over a uniform grid on `[-1, 1]`.
pub fn power_lemma_check(profile: &BumpProfile, r: f64, order: usize, grid_size: usize) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("r must exceed 1, got {r}")));
    }
    let needed = order as f64 * r / (r - 1.0);
    if (profile.sigma as f64) < needed {
        return Err(Error::Precondition(format!(
            "sigma = {} is below k r' = {needed}",
            profile.sigma
        )));
    }
    let n = grid_size.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        let y = -1.0 + 2.0 * i as f64 / n as f64;
        worst = worst.max(profile.power_ratio(order, r, y)?);
    }
    Ok(worst)
}

/// Orders of a derivative in `(t, x_1, …, x_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MultiIndex {
    pub alpha0: usize,
    pub alpha: Vec<usize>,
}

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex {
            alpha0: 0,
            alpha: vec![0; n],
        }
    }

    pub fn time(n: usize, order: usize) -> Self {
        MultiIndex {
            alpha0: order,
            alpha: vec![0; n],
        }
    }

    pub fn space(n: usize, i: usize, order: usize) -> Self {
        let mut alpha = vec![0; n];
        alpha[i] = order;
        MultiIndex { alpha0: 0, alpha }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn order(&self) -> usize {
        self.alpha0 + self.alpha.iter().sum::<usize>()
    }

    /// One of the three terms `∂_t²`, `∂_t`, `∂_{x_i}²` of the damped-wave adjoint.
    pub fn is_damped_wave_term(&self) -> bool {
        let space: usize = self.alpha.iter().sum();
        match (self.alpha0, space) {
            (2, 0) | (1, 0) => true,
            (0, 2) => self.alpha.iter().filter(|&&a| a > 0).count() == 1,
            _ => false,
        }
    }
}

/// `F(R) = diag(A(R^d), R, …, R)`.
#[derive(Debug, Clone)]
pub struct ScalingFamily<'a> {
    pub n: usize,
    pub d: f64,
    pub aux: &'a AuxTable,
    pub r: f64,
    f0: f64,
}

impl<'a> ScalingFamily<'a> {
    pub fn new(n: usize, d: f64, aux: &'a AuxTable, r: f64) -> Result<Self> {
        if n == 0 || !(d > 0.0) {
            return Err(Error::InvalidParameter("scaling needs n >= 1 and d > 0".into()));
        }
        if !(r > 1.0) {
            return Err(Error::InvalidParameter(format!("scaling parameter R must exceed 1, got {r}")));
        }
        let f0 = aux.invert_big_b(r.powf(d))?;
        Ok(ScalingFamily { n, d, aux, r, f0 })
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// `F_i(R)`, `i = 0` being time.
    pub fn f(&self, i: usize) -> f64 {
        if i == 0 {
            self.f0
        } else {
            self.r
        }
    }

    /// `∏ F_i^{-α_i}`.
    pub fn scale_factor(&self, alpha: &MultiIndex) -> f64 {
        self.f0.powi(-(alpha.alpha0 as i32)) * self.r.powi(-(alpha.alpha.iter().sum::<usize>() as i32))
    }
}

fn check_point(n: usize, alpha: &MultiIndex, x: &[f64]) -> Result<()> {
    if alpha.n() != n || x.len() != n {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: n = {n}, multi-index {} , point {}",
            alpha.n(),
            x.len()
        )));
    }
    Ok(())
}

/// `∂^α [η^σ(t) ∏ Φ^σ(x_i)]`.
pub fn psi_deriv(profile: &BumpProfile, alpha: &MultiIndex, t: f64, x: &[f64]) -> Result<f64> {
    check_point(alpha.n(), alpha, x)?;
    let mut v = profile.eta_eval(alpha.alpha0, t)?;
    for (&a, &xi) in alpha.alpha.iter().zip(x) {
        if v == 0.0 {
            return Ok(0.0);
        }
        v *= profile.bump_eval(a, xi)?;
    }
    Ok(v)
}

/// `∂^α ψ_R` at `(t, x)` where `ψ_R(t, x) = ψ(t/F_0, x/R)`.
pub fn psi_r_deriv(
    family: &ScalingFamily<'_>,
    profile: &BumpProfile,
    alpha: &MultiIndex,
    t: f64,
    x: &[f64],
) -> Result<f64> {
    check_point(family.n, alpha, x)?;
    let y: Vec<f64> = x.iter().map(|xi| xi / family.r).collect();
    Ok(family.scale_factor(alpha) * psi_deriv(profile, alpha, t / family.f0, &y)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// where `ψ_R ≡ 1`
    Sharp,
    /// the part of `Q̃_R` carrying the support of `∂^α ψ_R`
    Alpha,
    /// the rest of `Q̃_R`
    Rest,
    Outside,
}

/// Classification against `Q̃_R = [0, F_0] × ∏[-F_i, F_i]`.
pub fn box_region(family: &ScalingFamily<'_>, alpha: &MultiIndex, t: f64, x: &[f64]) -> Result<Region> {
    check_point(family.n, alpha, x)?;
    let f0 = family.f0;
    let r = family.r;
    if t < 0.0 || t > f0 || x.iter().any(|xi| xi.abs() > r) {
        return Ok(Region::Outside);
    }
    if t <= f0 / 2.0 && x.iter().all(|xi| xi.abs() <= r / 2.0) {
        return Ok(Region::Sharp);
    }
    let time_ok = alpha.alpha0 == 0 || t >= f0 / 2.0;
    let space_ok = alpha
        .alpha
        .iter()
        .zip(x)
        .all(|(&a, xi)| a == 0 || xi.abs() >= r / 2.0);
    Ok(if time_ok && space_ok && alpha.order() > 0 {
        Region::Alpha
    } else {
        Region::Rest
    })
}
