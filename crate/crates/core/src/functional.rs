//! Scaling functionals of the modified test-function argument.
//!
//! For the multiplied operator `D = g (∂_t² - aΔ + b∂_t)` with
//! `g = Γ/β`, the adjoint is
//! `D* = g ∂_t² - g a Δ + (g' - 1) ∂_t`. For each of its terms `α̃`
//! the nonexistence argument needs `H_α̃(R) G_α̃(R)^{1/p'}` bounded, where
//! `H_α̃ = ∏ F_i^{-α_i}` and
//! `G_α̃ = ∫ |a_α̃|^{p'} (g f)^{-(p'-1)}` over the part of the scaled box
//! where `∂^α̃ ψ_R` can be nonzero.

use std::cell::RefCell;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxcalc::{compute_big_b, AuxOptions, AuxTable};
use crate::coeffs::ProblemSpec;
use crate::error::{Error, Result};
use crate::exponents::p_crit_for;
use crate::quad::{integrate, CompositeRule, Tolerance};
use crate::testfn::{BumpProfile, MultiIndex, ScalingFamily};

/// Coefficients of `D*`; `zero` is the zeroth-order coefficient `g'' - (g b)'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DStarCoefficients {
    pub time2: f64,
    pub laplacian: f64,
    pub time1: f64,
    pub zero: f64,
}

pub fn dstar_coefficients(spec: &ProblemSpec, aux: &AuxTable, t: f64) -> Result<DStarCoefficients> {
    let model = aux.model();
    let g = aux.g(t)?;
    let b = model.b(t);
    let db = model.db(t);
    let gp = g * b - 1.0;
    // g'' from differentiating g' = g b - 1
    let gpp = gp * b + g * db;
    let gb_prime = gp * b + g * db;
    Ok(DStarCoefficients {
        time2: g,
        laplacian: -g * spec.a(t, aux)?,
        time1: gp - 1.0,
        zero: gpp - gb_prime,
    })
}

/// The three kinds of terms of `D*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    #[serde(rename = "2e0")]
    TwoE0,
    #[serde(rename = "e0")]
    E0,
    #[serde(rename = "2e_space")]
    TwoESpace,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::TwoE0, Term::E0, Term::TwoESpace];

    pub fn tag(&self) -> &'static str {
        match self {
            Term::TwoE0 => "2e0",
            Term::E0 => "e0",
            Term::TwoESpace => "2e_space",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Term> {
        Term::ALL.into_iter().find(|t| t.tag() == tag)
    }

    /// Representative multi-index; all space directions are equivalent.
    pub fn multi_index(&self, n: usize) -> MultiIndex {
        match self {
            Term::TwoE0 => MultiIndex::time(n, 2),
            Term::E0 => MultiIndex::time(n, 1),
            Term::TwoESpace => MultiIndex::space(n, 0, 2),
        }
    }

    pub fn from_multi_index(alpha: &MultiIndex) -> Result<Term> {
        if !alpha.is_damped_wave_term() {
            return Err(Error::InvalidParameter(format!(
                "multi-index {alpha:?} is not a term of the damped-wave adjoint"
            )));
        }
        Ok(match alpha.alpha0 {
            2 => Term::TwoE0,
            1 => Term::E0,
            _ => Term::TwoESpace,
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn h_alpha(family: &ScalingFamily<'_>, alpha: &MultiIndex) -> f64 {
    family.scale_factor(alpha)
}

/// How the `x`-part of `G` is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceMeasure {
    /// `|x| ≤ R` or `R/2 ≤ |x| ≤ R` with weight `ω_n r^{n-1}`
    #[default]
    Radial,
    /// the actual boxes, for `n ≤ 3`
    ExactBox,
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma_fn(h)
}

// Γ at positive half-integers, which is all the sphere area needs
fn gamma_fn(x: f64) -> f64 {
    if (x - 0.5).abs() < 1e-12 {
        return std::f64::consts::PI.sqrt();
    }
    if (x - 1.0).abs() < 1e-12 {
        return 1.0;
    }
    (x - 1.0) * gamma_fn(x - 1.0)
}

/// `∫ |x|^{-s}` over the unit region of a term, so that the `R`-region gives
/// this value times `R^{n-s}`.
fn unit_space_integral(n: usize, s: f64, term: Term, measure: SpaceMeasure) -> Result<f64> {
    let e = n as f64 - s;
    let annulus = term == Term::TwoESpace;
    match measure {
        SpaceMeasure::Radial => {
            let w = sphere_area(n);
            if annulus {
                if e.abs() < 1e-14 {
                    Ok(w * std::f64::consts::LN_2)
                } else {
                    Ok(w * (1.0 - 0.5f64.powf(e)) / e)
                }
            } else {
                Ok(w / e)
            }
        }
        SpaceMeasure::ExactBox => {
            if n > 3 {
                return Err(Error::InvalidParameter("exact box integration supports n <= 3".into()));
            }
            let tol = Tolerance::new(1e-12, 1e-9);
            let first = if annulus { (0.5, 1.0) } else { (0.0, 1.0) };
            // by symmetry, 2^n times the positive orthant
            let orthant = match n {
                1 => integrate(|x: f64| x.powf(-s), first.0, first.1, tol)?.value,
                2 => integrate(
                    |x: f64| integrate(|y: f64| (x * x + y * y).powf(-s / 2.0), 0.0, 1.0, tol).map_or(f64::NAN, |r| r.value),
                    first.0,
                    first.1,
                    tol,
                )?
                .value,
                _ => integrate(
                    |x: f64| {
                        integrate(
                            |y: f64| {
                                integrate(|z: f64| (x * x + y * y + z * z).powf(-s / 2.0), 0.0, 1.0, tol)
                                    .map_or(f64::NAN, |r| r.value)
                            },
                            0.0,
                            1.0,
                            tol,
                        )
                        .map_or(f64::NAN, |r| r.value)
                    },
                    first.0,
                    first.1,
                    tol,
                )?
                .value,
            };
            Ok(2f64.powi(n as i32) * orthant)
        }
    }
}

/// `G_α̃(R) = ∫_{Q̃_R^(α̃)} |a_α̃|^{p'} (g f)^{-(p'-1)}`.
pub fn g_alpha(spec: &ProblemSpec, family: &ScalingFamily<'_>, alpha: &MultiIndex, measure: SpaceMeasure) -> Result<f64> {
    let term = Term::from_multi_index(alpha)?;
    let aux = family.aux;
    let pc = spec.p_conj();
    let q = pc - 1.0;
    let s = spec.delta * q;
    if s >= spec.n as f64 {
        return Err(Error::NonIntegrable(format!(
            "|x|^(-delta (p'-1)) with delta (p'-1) = {s} >= n = {} is not locally integrable",
            spec.n
        )));
    }
    let f0 = family.f0();
    let (t_lo, t_hi) = match term {
        Term::TwoESpace => (0.0, f0),
        _ => (f0 / 2.0, f0),
    };
    let model = aux.model();
    let time_integrand = |t: f64| -> Result<f64> {
        let g = aux.g(t)?;
        // f at |x| = 1 carries the time weight
        let w = spec.f(t, 1.0, aux)?;
        let coeff = match term {
            Term::TwoE0 => g,
            Term::E0 => (g * model.b(t) - 2.0).abs(),
            Term::TwoESpace => g * spec.a(t, aux)?,
        };
        Ok(coeff.powf(pc) * (g * w).powf(-q))
    };
    let failure = RefCell::new(None);
    let time = integrate(
        |t| match time_integrand(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        t_lo,
        t_hi,
        Tolerance::new(0.0, 1e-9),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let space = unit_space_integral(spec.n, s, term, measure)? * family.r.powf(spec.n as f64 - s);
    Ok(time?.value * space)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// all slopes at most this: bounded
    pub bounded_max: f64,
    /// some slope at least this: growing
    pub growing_min: f64,
    pub measure: SpaceMeasure,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            bounded_max: 0.02,
            growing_min: 0.05,
            measure: SpaceMeasure::Radial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub term: Term,
    pub r: f64,
    pub h: f64,
    pub g: f64,
    pub product: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermFit {
    pub term: Term,
    pub fitted: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    /// grouped by term, sorted by `R` within each term
    pub rows: Vec<ScanRow>,
    pub fits: Vec<TermFit>,
    pub verdict: Verdict,
}

impl ScanResult {
    pub fn fit(&self, term: Term) -> Option<&TermFit> {
        self.fits.iter().find(|f| f.term == term)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Exponent `A(s) ≈ s^ν` of the inverse of `B` for the damping families.
fn inverse_growth(spec: &ProblemSpec) -> f64 {
    1.0 / (1.0 + spec.damping.kappa())
}

/// Closed-form growth exponent of `H_α̃ G_α̃^{1/p'}` in `R` with `d = 2/(1-α)`.
pub fn predicted_slope(spec: &ProblemSpec, term: Term) -> f64 {
    let d = spec.time_scaling_exponent();
    let n = spec.n as f64;
    let common = -d * spec.gamma - spec.delta + (n + spec.delta + d * (1.0 + spec.gamma)) / spec.p_conj();
    match term {
        Term::TwoESpace => -2.0 - d * spec.alpha + common,
        Term::E0 => -d + common,
        Term::TwoE0 => -2.0 * d * inverse_growth(spec) + common,
    }
}

/// The `∂_t²` estimate is never worse than the `∂_t` one.
pub fn two_e0_estimate_is_better(spec: &ProblemSpec) -> bool {
    predicted_slope(spec, Term::TwoE0) <= predicted_slope(spec, Term::E0)
}

/// Table horizon reaching `A(s_max)`, found by doubling on `B`.
pub fn horizon_for(spec: &ProblemSpec, s_max: f64) -> Result<f64> {
    let mut h: f64 = 16.0;
    while compute_big_b(&spec.damping, h)? < s_max {
        h *= 2.0;
        if h > 1e13 {
            return Err(Error::InvalidParameter(format!(
                "B(t) does not reach {s_max} before t = 1e13"
            )));
        }
    }
    Ok(h)
}

fn check_scan_input(spec: &ProblemSpec, r_list: &[f64]) -> Result<()> {
    if r_list.len() < 4 {
        return Err(Error::InvalidParameter("the R list needs at least 4 entries".into()));
    }
    if r_list[0] <= 1.0 || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("the R list must be increasing and above 1".into()));
    }
    let report = p_crit_for(spec)?;
    if spec.p <= report.p_min {
        return Err(Error::Precondition(format!(
            "p = {} does not exceed p_min = {}",
            spec.p, report.p_min
        )));
    }
    Ok(())
}

pub fn scan_condition(spec: &ProblemSpec, r_list: &[f64], opts: &ScanOptions) -> Result<ScanResult> {
    spec.validate()?;
    check_scan_input(spec, r_list)?;
    let d = spec.time_scaling_exponent();
    let r_max = *r_list.last().expect("nonempty");
    let horizon = horizon_for(spec, r_max.powf(d))?;
    let aux = AuxTable::build(spec.damping, horizon, AuxOptions::default())?;
    scan_with_table(spec, &aux, r_list, opts)
}

pub fn scan_with_table(spec: &ProblemSpec, aux: &AuxTable, r_list: &[f64], opts: &ScanOptions) -> Result<ScanResult> {
    check_scan_input(spec, r_list)?;
    let d = spec.time_scaling_exponent();
    let pc = spec.p_conj();
    let per_r: Vec<Vec<ScanRow>> = r_list
        .par_iter()
        .map(|&r| -> Result<Vec<ScanRow>> {
            let family = ScalingFamily::new(spec.n, d, aux, r)?;
            Term::ALL
                .iter()
                .map(|&term| {
                    let alpha = term.multi_index(spec.n);
                    let h = h_alpha(&family, &alpha);
                    let g = g_alpha(spec, &family, &alpha, opts.measure)?;
                    Ok(ScanRow {
                        term,
                        r,
                        h,
                        g,
                        product: h * g.powf(1.0 / pc),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let tail = r_list.len().div_ceil(2);
    let mut rows = Vec::with_capacity(3 * r_list.len());
    let mut fits = Vec::with_capacity(3);
    for term in Term::ALL {
        let term_rows: Vec<ScanRow> = per_r
            .iter()
            .flat_map(|rs| rs.iter().filter(|row| row.term == term).cloned())
            .collect();
        let start = term_rows.len() - tail;
        let xs: Vec<f64> = term_rows[start..].iter().map(|row| row.r).collect();
        let ys: Vec<f64> = term_rows[start..].iter().map(|row| row.product).collect();
        fits.push(TermFit {
            term,
            fitted: log_log_slope(&xs, &ys),
            predicted: predicted_slope(spec, term),
        });
        rows.extend(term_rows);
    }
    let verdict = if fits.iter().all(|f| f.fitted <= opts.bounded_max) {
        Verdict::Bounded
    } else if fits.iter().any(|f| f.fitted >= opts.growing_min) {
        Verdict::Growing
    } else {
        Verdict::Inconclusive
    };
    Ok(ScanResult { rows, fits, verdict })
}

/// Smooth functions with known derivatives, used as exact solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manufactured {
    Zero,
    /// `e^{-t} ∏ cos x_i`
    ExpCos,
}

impl Manufactured {
    /// `(u, u_t, u_tt, Δu)`.
    pub fn eval(&self, t: f64, x: &[f64]) -> (f64, f64, f64, f64) {
        match self {
            Manufactured::Zero => (0.0, 0.0, 0.0, 0.0),
            Manufactured::ExpCos => {
                let u = (-t).exp() * x.iter().map(|xi| xi.cos()).product::<f64>();
                (u, -u, u, -(x.len() as f64) * u)
            }
        }
    }
}

/// `Φ(t, x) = η^σ((t + shift)/T) ∏ Φ^σ(x_i / X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestPair {
    pub sigma: u32,
    pub time_scale: f64,
    pub space_scale: f64,
    /// moves `t = 0` into the decreasing part of `η` so `Φ_t(0, ·) ≠ 0`
    pub time_shift: f64,
}

impl TestPair {
    /// `(Φ, Φ_t, Φ_tt, ΔΦ)`.
    fn eval(&self, profile: &BumpProfile, t: f64, x: &[f64]) -> Result<(f64, f64, f64, f64)> {
        let tau = (t + self.time_shift) / self.time_scale;
        let e0 = profile.eta_eval(0, tau)?;
        let e1 = profile.eta_eval(1, tau)? / self.time_scale;
        let e2 = profile.eta_eval(2, tau)? / (self.time_scale * self.time_scale);
        let mut vals = Vec::with_capacity(x.len());
        for &xi in x {
            let y = xi / self.space_scale;
            vals.push((profile.bump_eval(0, y)?, profile.bump_eval(2, y)? / (self.space_scale * self.space_scale)));
        }
        let space: f64 = vals.iter().map(|v| v.0).product();
        let mut lap = 0.0;
        for i in 0..vals.len() {
            let mut term = vals[i].1;
            for (j, v) in vals.iter().enumerate() {
                if j != i {
                    term *= v.0;
                }
            }
            lap += term;
        }
        Ok((e0 * space, e1 * space, e2 * space, e0 * lap))
    }
}

/// Composite Gauss-Legendre grid over `[0, t_max] × [-x_max, x_max]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadGrid {
    pub t_max: f64,
    pub x_max: f64,
    pub panels_t: usize,
    pub panels_x: usize,
    pub order: usize,
}

impl QuadGrid {
    pub fn refined(&self) -> Self {
        QuadGrid {
            panels_t: 2 * self.panels_t,
            panels_x: 2 * self.panels_x,
            ..*self
        }
    }
}

/// Visits every tensor node of `rule^n`.
fn for_each_node(rule: &CompositeRule, n: usize, mut visit: impl FnMut(&[f64], f64) -> Result<()>) -> Result<()> {
    let m = rule.nodes.len();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    loop {
        let mut w = 1.0;
        for k in 0..n {
            x[k] = rule.nodes[idx[k]];
            w *= rule.weights[idx[k]];
        }
        visit(&x, w)?;
        let mut k = 0;
        loop {
            if k == n {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `|LHS - RHS|` of the weak formulation for a smooth `u`, with the
/// forcing `f|u|^p` replaced by `u_tt - aΔu + b u_t` evaluated pointwise.
pub fn weak_residual(
    u: Manufactured,
    spec: &ProblemSpec,
    aux: &AuxTable,
    pair: &TestPair,
    grid: &QuadGrid,
) -> Result<f64> {
    if !(pair.time_shift >= 0.0 && pair.time_shift < pair.time_scale) {
        return Err(Error::InvalidParameter("time shift must lie in [0, T)".into()));
    }
    let t_support = pair.time_scale - pair.time_shift;
    if t_support > grid.t_max || pair.space_scale > grid.x_max {
        return Err(Error::SupportEscape(format!(
            "support [0, {t_support}] x [-{0}, {0}]^n exceeds [0, {1}] x [-{2}, {2}]^n",
            pair.space_scale, grid.t_max, grid.x_max
        )));
    }
    let profile = BumpProfile::new(pair.sigma)?;
    let model = aux.model();
    let n = spec.n;
    let t_rule = CompositeRule::new(0.0, grid.t_max, grid.panels_t, grid.order);
    let x_rule = CompositeRule::new(-grid.x_max, grid.x_max, grid.panels_x, grid.order);

    let mut bulk = 0.0;
    for (&t, &wt) in t_rule.nodes.iter().zip(&t_rule.weights) {
        let a = spec.a(t, aux)?;
        let b = model.b(t);
        let db = model.db(t);
        for_each_node(&x_rule, n, |x, wx| {
            let (phi, phi_t, phi_tt, lap_phi) = pair.eval(&profile, t, x)?;
            if phi == 0.0 && phi_t == 0.0 && phi_tt == 0.0 && lap_phi == 0.0 {
                return Ok(());
            }
            let (uu, ut, utt, lap_u) = u.eval(t, x);
            let forcing = utt - a * lap_u + b * ut;
            let lhs = uu * (phi_tt - a * lap_phi - b * phi_t - db * phi);
            bulk += wt * wx * (lhs - forcing * phi);
            Ok(())
        })?;
    }

    let b0 = model.b(0.0);
    let mut data = 0.0;
    for_each_node(&x_rule, n, |x, wx| {
        let (phi, phi_t, _, _) = pair.eval(&profile, 0.0, x)?;
        let (u0, u1, _, _) = u.eval(0.0, x);
        data += wx * ((u1 + u0 * b0) * phi - u0 * phi_t);
        Ok(())
    })?;
    Ok((bulk - data).abs())
}

/// Radially symmetric samples at `r_j = j dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSamples {
    pub n: usize,
    pub dr: f64,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

/// `∫_{R^n} (u_1 + b̂₁ u_0) dx` by the trapezoid rule in `r` with weight `ω_n r^{n-1}`.
pub fn data_functional(samples: &RadialSamples, bhat1: f64) -> Result<f64> {
    if samples.u0.len() != samples.u1.len() || samples.u0.len() < 2 {
        return Err(Error::InvalidParameter("u0 and u1 need the same length, at least 2".into()));
    }
    let w = sphere_area(samples.n);
    let last = samples.u0.len() - 1;
    let mut total = 0.0;
    for j in 0..=last {
        let r = j as f64 * samples.dr;
        let weight = if j == 0 || j == last { 0.5 } else { 1.0 };
        total += weight * (samples.u1[j] + bhat1 * samples.u0[j]) * r.powi(samples.n as i32 - 1);
    }
    Ok(w * samples.dr * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::DampingModel;

    fn unit_aux(horizon: f64) -> AuxTable {
        AuxTable::build(DampingModel::Constant { mu: 1.0 }, horizon, AuxOptions::default()).unwrap()
    }

    #[test]
    fn dstar_for_unit_damping() {
        let aux = unit_aux(100.0);
        let spec = ProblemSpec::unit(1, 3.0);
        let c = dstar_coefficients(&spec, &aux, 3.3).unwrap();
        assert!((c.time2 - 1.0).abs() < 1e-12);
        assert!((c.laplacian + 1.0).abs() < 1e-12);
        assert!((c.time1 + 1.0).abs() < 1e-12);
        assert_eq!(c.zero, 0.0);
    }

    #[test]
    fn dstar_zero_order_vanishes() {
        let model = DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 };
        let aux = AuxTable::build(model, 200.0, AuxOptions::default()).unwrap();
        let mut spec = ProblemSpec::unit(2, 2.0);
        spec.damping = model;
        let mut bound: f64 = 0.0;
        for &t in aux.grid() {
            bound = bound.max(aux.g(t).unwrap() * model.b(t));
        }
        for k in 0..100 {
            let t = 2.0 * k as f64 + 0.123;
            let c = dstar_coefficients(&spec, &aux, t).unwrap();
            assert_eq!(c.zero, 0.0);
            assert!(c.time1.abs() <= 2.0 + bound);
        }
    }

    #[test]
    fn h_alpha_examples() {
        let aux = unit_aux(200.0);
        let fam = ScalingFamily::new(1, 2.0, &aux, 10.0).unwrap();
        assert!((h_alpha(&fam, &Term::TwoESpace.multi_index(1)) - 1e-2).abs() < 1e-15);
        assert!((h_alpha(&fam, &Term::E0.multi_index(1)) - 1e-2).abs() < 1e-12);
        assert!((h_alpha(&fam, &Term::TwoE0.multi_index(1)) - 1e-4).abs() < 1e-14);
    }

    #[test]
    fn g_alpha_is_box_volume_for_unit_coefficients() {
        let aux = unit_aux(5000.0);
        let spec = ProblemSpec::unit(1, 3.0);
        let fam = ScalingFamily::new(1, 2.0, &aux, 16.0).unwrap();
        // [0, 256] x {8 <= |x| <= 16}
        let g = g_alpha(&spec, &fam, &Term::TwoESpace.multi_index(1), SpaceMeasure::Radial).unwrap();
        assert!((g - 256.0 * 16.0).abs() < 1e-6 * g, "{g}");
        let g0 = g_alpha(&spec, &fam, &Term::E0.multi_index(1), SpaceMeasure::ExactBox).unwrap();
        assert!((g0 - 128.0 * 32.0).abs() < 1e-6 * g0, "{g0}");
    }

    #[test]
    fn nonintegrable_weight_is_rejected() {
        let aux = unit_aux(5000.0);
        let mut spec = ProblemSpec::unit(1, 3.0);
        spec.delta = 2.0; // delta (p'-1) = 1 = n
        let fam = ScalingFamily::new(1, 2.0, &aux, 4.0).unwrap();
        let r = g_alpha(&spec, &fam, &Term::E0.multi_index(1), SpaceMeasure::Radial);
        assert!(matches!(r, Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn radial_and_box_agree_for_flat_weight_in_one_dimension() {
        for term in Term::ALL {
            for s in [0.0, 0.4, -0.7] {
                let a = unit_space_integral(1, s, term, SpaceMeasure::Radial).unwrap();
                let b = unit_space_integral(1, s, term, SpaceMeasure::ExactBox).unwrap();
                assert!((a - b).abs() < 1e-8 * a, "{term} {s}: {a} vs {b}");
            }
        }
        assert!((unit_space_integral(2, 0.0, Term::E0, SpaceMeasure::ExactBox).unwrap() - 4.0).abs() < 1e-9);
        assert!((unit_space_integral(3, 0.0, Term::TwoESpace, SpaceMeasure::ExactBox).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn predicted_slopes_at_criticality() {
        let spec = ProblemSpec::unit(1, 3.0);
        assert_eq!(predicted_slope(&spec, Term::TwoESpace), 0.0);
        assert_eq!(predicted_slope(&spec, Term::E0), 0.0);
        assert!(two_e0_estimate_is_better(&spec));
        let spec2 = ProblemSpec::unit(2, 2.0);
        assert_eq!(predicted_slope(&spec2, Term::TwoESpace), 0.0);
        assert_eq!(predicted_slope(&spec2, Term::E0), 0.0);
    }

    #[test]
    fn slope_fit_is_exact_for_powers() {
        let xs = [8.0, 16.0, 32.0, 64.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.75)).collect();
        assert!((log_log_slope(&xs, &ys) + 0.75).abs() < 1e-13);
    }

    #[test]
    fn scan_rejects_short_lists_and_small_p() {
        let spec = ProblemSpec::unit(1, 3.0);
        assert!(scan_condition(&spec, &[2.0, 4.0, 8.0], &ScanOptions::default()).is_err());
        let mut s2 = ProblemSpec::unit(1, 1.2);
        s2.gamma = 0.5;
        assert!(matches!(
            scan_condition(&s2, &[2.0, 4.0, 8.0, 16.0], &ScanOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    fn reference_pair() -> TestPair {
        TestPair {
            sigma: 3,
            time_scale: 4.0,
            space_scale: 3.0,
            time_shift: 1.0,
        }
    }

    #[test]
    fn weak_residual_zero_solution() {
        let aux = unit_aux(10.0);
        let spec = ProblemSpec::unit(1, 2.0);
        let grid = QuadGrid {
            t_max: 3.0,
            x_max: 3.0,
            panels_t: 4,
            panels_x: 4,
            order: 6,
        };
        assert_eq!(weak_residual(Manufactured::Zero, &spec, &aux, &reference_pair(), &grid).unwrap(), 0.0);
    }

    #[test]
    fn weak_residual_detects_escape() {
        let aux = unit_aux(10.0);
        let spec = ProblemSpec::unit(1, 2.0);
        let grid = QuadGrid {
            t_max: 2.0,
            x_max: 3.0,
            panels_t: 4,
            panels_x: 4,
            order: 6,
        };
        let r = weak_residual(Manufactured::ExpCos, &spec, &aux, &reference_pair(), &grid);
        assert!(matches!(r, Err(Error::SupportEscape(_))));
    }

    #[test]
    fn weak_residual_small_for_exact_solution() {
        let aux = unit_aux(10.0);
        let spec = ProblemSpec::unit(1, 2.0);
        let grid = QuadGrid {
            t_max: 3.0,
            x_max: 3.0,
            panels_t: 32,
            panels_x: 32,
            order: 8,
        };
        let r = weak_residual(Manufactured::ExpCos, &spec, &aux, &reference_pair(), &grid).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn data_functional_examples() {
        let dr = 0.01;
        let m = 1000;
        let gauss: Vec<f64> = (0..=m).map(|j| (-(j as f64 * dr).powi(2)).exp() / std::f64::consts::PI.sqrt()).collect();
        let zero = vec![0.0; m + 1];
        let s = RadialSamples {
            n: 1,
            dr,
            u0: zero.clone(),
            u1: gauss.clone(),
        };
        assert!((data_functional(&s, 3.0).unwrap() - 1.0).abs() < 1e-12);
        let cancel = RadialSamples {
            n: 1,
            dr,
            u0: gauss.clone(),
            u1: gauss.iter().map(|v| -2.0 * v).collect(),
        };
        assert!(data_functional(&cancel, 2.0).unwrap().abs() < 1e-15);
        let mixed = RadialSamples {
            n: 1,
            dr,
            u0: gauss.clone(),
            u1: gauss.iter().map(|v| -v).collect(),
        };
        assert!((data_functional(&mixed, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }
}
